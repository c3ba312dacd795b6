//! Baselines and the similarity and property reports.

use std::fmt::Write as _;

use pharmasyn_chem::{morgan_fp, murcko_scaffold, properties, tanimoto, Molecule, FP_BITS};
use pharmasyn_synthesis::{sample_tree_lenient, BuildingBlockCatalog, ReactionTemplateSet, SyntheticTree, DEFAULT_MAX_DEPTH};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DesignError;

/// Radius for report fingerprints (ECFP4-like).
pub const REPORT_FP_RADIUS: u32 = 2;

/// `n` random routes of depth up to [`DEFAULT_MAX_DEPTH`]. Routes cut short by
/// the sampling budget are kept as they are, since they still replay.
pub fn random_baseline(
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    n: usize,
    seed: u64,
) -> Result<Vec<SyntheticTree>, DesignError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Ok(sample_tree_lenient(catalog, templates, DEFAULT_MAX_DEPTH, &mut rng)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Aggregate {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSimilarity {
    pub smiles: String,
    pub tanimoto: f64,
    pub murcko_tanimoto: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub reference: String,
    pub pairs: Vec<PairSimilarity>,
    pub tanimoto: Aggregate,
    pub murcko_tanimoto: Aggregate,
}

fn report_fp(mol: &Molecule) -> pharmasyn_chem::BitFingerprint {
    morgan_fp(mol, REPORT_FP_RADIUS, FP_BITS)
}

/// Tanimoto of whole-molecule and Murcko-scaffold fingerprints. An acyclic
/// molecule has an empty scaffold whose fingerprint is all zeros, so it
/// scores 0 against a ring-bearing scaffold and 1 against another empty one.
pub fn pair_similarity(mol: &Molecule, reference: &Molecule) -> Result<PairSimilarity, DesignError> {
    let t = tanimoto(&report_fp(mol), &report_fp(reference))?;
    let m = tanimoto(&report_fp(&murcko_scaffold(mol)), &report_fp(&murcko_scaffold(reference)))?;
    Ok(PairSimilarity {
        smiles: mol.smiles().to_string(),
        tanimoto: t,
        murcko_tanimoto: m,
    })
}

pub fn similarity_report(generated: &[Molecule], reference: &Molecule) -> Result<SimilarityReport, DesignError> {
    if generated.is_empty() {
        return Err(DesignError::Config("similarity report needs at least one molecule".into()));
    }
    let pairs = generated
        .iter()
        .map(|m| pair_similarity(m, reference))
        .collect::<Result<Vec<_>, _>>()?;
    let t: Vec<f64> = pairs.iter().map(|p| p.tanimoto).collect();
    let m: Vec<f64> = pairs.iter().map(|p| p.murcko_tanimoto).collect();
    Ok(SimilarityReport {
        reference: reference.smiles().to_string(),
        tanimoto: Aggregate::of(&t).expect("non-empty"),
        murcko_tanimoto: Aggregate::of(&m).expect("non-empty"),
        pairs,
    })
}

impl SimilarityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("smiles,tanimoto,murcko_tanimoto\n");
        for p in &self.pairs {
            writeln!(s, "{},{},{}", p.smiles, p.tanimoto, p.murcko_tanimoto).unwrap();
        }
        s
    }
}

/// Percentile `q` in [0, 100] with linear interpolation between order
/// statistics: rank (n − 1)·q/100, as numpy's default.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (v.len() - 1) as f64 * q / 100.0;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyTable {
    /// Optional row label, e.g. a target's PDB id.
    pub label: Option<String>,
    pub n: usize,
    pub mw_mean: f64,
    pub logp_p5: f64,
    pub logp_p95: f64,
    pub qed_mean: f64,
}

pub fn property_table(molecules: &[Molecule], label: Option<&str>) -> Result<PropertyTable, DesignError> {
    if molecules.is_empty() {
        return Err(DesignError::Config("property table needs at least one molecule".into()));
    }
    let props: Vec<_> = molecules.iter().map(properties).collect();
    Ok(table_from_values(
        label,
        &props.iter().map(|p| p.mw).collect::<Vec<_>>(),
        &props.iter().map(|p| p.logp).collect::<Vec<_>>(),
        &props.iter().map(|p| p.qed).collect::<Vec<_>>(),
    ))
}

/// Table row from raw per-molecule values. Slices must be non-empty and of
/// equal length.
pub fn table_from_values(label: Option<&str>, mw: &[f64], logp: &[f64], qed: &[f64]) -> PropertyTable {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    PropertyTable {
        label: label.map(str::to_string),
        n: mw.len(),
        mw_mean: mean(mw),
        logp_p5: percentile(logp, 5.0).expect("non-empty"),
        logp_p95: percentile(logp, 95.0).expect("non-empty"),
        qed_mean: mean(qed),
    }
}

const TABLE_COLUMNS: [&str; 4] = ["MW", "LogP 5%", "LogP 95%", "QED"];

/// Fixed-width text table. The id column appears when any row has a label.
pub fn render_property_table(rows: &[PropertyTable]) -> String {
    let labelled = rows.iter().any(|r| r.label.is_some());
    let mut s = String::new();
    if labelled {
        write!(s, "{:<8} ", "PDB ID").unwrap();
    }
    writeln!(s, "{:>8} {:>8} {:>8} {:>6}", TABLE_COLUMNS[0], TABLE_COLUMNS[1], TABLE_COLUMNS[2], TABLE_COLUMNS[3]).unwrap();
    for r in rows {
        if labelled {
            write!(s, "{:<8} ", r.label.as_deref().unwrap_or("-")).unwrap();
        }
        writeln!(s, "{:>8.2} {:>8.2} {:>8.2} {:>6.2}", r.mw_mean, r.logp_p5, r.logp_p95, r.qed_mean).unwrap();
    }
    s
}

pub fn property_csv(rows: &[PropertyTable]) -> String {
    let mut s = String::from("label,n,mw_mean,logp_p5,logp_p95,qed_mean\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.label.as_deref().unwrap_or(""),
            r.n,
            r.mw_mean,
            r.logp_p5,
            r.logp_p95,
            r.qed_mean
        )
        .unwrap();
    }
    s
}
