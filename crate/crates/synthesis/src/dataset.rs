//! Training-triple generation: random route, conformer of the final
//! product, pharmacophore points.

use std::io::{self, BufRead, Write};

use pharmasyn_chem::{canonicalize, extract_pharmacophores, gen_conformer, PharmacophoreGraph, PharmacophorePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::BuildingBlockCatalog;
use crate::error::SynthesisError;
use crate::sample::sample_tree_lenient;
use crate::template::ReactionTemplateSet;
use crate::tree::SyntheticTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTriple {
    #[serde(flatten)]
    pub tree: SyntheticTree,
    pub points: Vec<PharmacophorePoint>,
    pub conformer_seed: u64,
}

impl TrainingTriple {
    pub fn graph(&self) -> PharmacophoreGraph {
        PharmacophoreGraph::new(self.points.clone())
    }
}

/// Pharmacophore graph of a route's final product under a conformer seed.
pub fn graph_for(tree: &SyntheticTree, conformer_seed: u64) -> Result<PharmacophoreGraph, String> {
    let mol = canonicalize(&tree.final_smiles).map_err(|e| e.to_string())?;
    let conf = gen_conformer(&mol, conformer_seed).map_err(|e| e.to_string())?;
    extract_pharmacophores(&conf).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub triples: Vec<TrainingTriple>,
    /// Candidates dropped for failed embedding or empty pharmacophores.
    pub skipped: Vec<(String, String)>,
}

/// Emits exactly `n` triples; failing candidates are skipped and replaced.
pub fn make_dataset(
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    n: usize,
    max_depth: usize,
    seed: u64,
) -> Result<Dataset, SynthesisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Dataset::default();
    while out.triples.len() < n {
        let tree = sample_tree_lenient(catalog, templates, max_depth, &mut rng)?;
        let conformer_seed = u64::from(rng.random::<u32>());
        match graph_for(&tree, conformer_seed) {
            Ok(graph) => out.triples.push(TrainingTriple {
                tree,
                points: graph.points,
                conformer_seed,
            }),
            Err(reason) => out.skipped.push((tree.final_smiles, reason)),
        }
        if out.skipped.len() > 100 + 10 * n {
            return Err(SynthesisError::InvalidTree(
                "too many candidates failed embedding or typing".into(),
            ));
        }
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(items: &[T], mut w: impl Write) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(r: impl BufRead) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", k + 1)))?;
        out.push(v);
    }
    Ok(out)
}
