//! Adapter for an external SMINA-compatible docking program.
//!
//! Ligands get one conformer each and are written as rigid PDBQT files with
//! heavy atoms only. The receptor must already be prepared.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pharmasyn_chem::element::symbol;
use pharmasyn_chem::{gen_conformer, ChemError, Conformer, Molecule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DockError {
    #[error("docking program '{tool}' not found; docking is disabled")]
    ExternalToolMissing { tool: String },
    #[error("docking failed for {ligand}: {output}")]
    ToolFailure { ligand: String, output: String },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Chem(#[from] ChemError),
}

impl From<std::io::Error> for DockError {
    fn from(e: std::io::Error) -> Self {
        DockError::Io(e.to_string())
    }
}

pub const DEFAULT_BOX_EDGE: f64 = 25.0;
pub const MAX_POSES: usize = 10;
pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockingJob {
    pub receptor: PathBuf,
    pub ligands: Vec<Molecule>,
    /// Box center; `None` centers each box on its ligand's centroid.
    pub center: Option<[f64; 3]>,
    pub box_edge: f64,
    /// Capped at [`MAX_POSES`].
    pub num_modes: usize,
    pub executable: String,
    /// Concurrent external processes.
    pub workers: usize,
    pub seed: u64,
    /// Where ligand and pose files go.
    pub work_dir: PathBuf,
}

impl DockingJob {
    pub fn new(receptor: impl Into<PathBuf>, ligands: Vec<Molecule>, work_dir: impl Into<PathBuf>) -> Self {
        DockingJob {
            receptor: receptor.into(),
            ligands,
            center: None,
            box_edge: DEFAULT_BOX_EDGE,
            num_modes: MAX_POSES,
            executable: "smina".into(),
            workers: DEFAULT_WORKERS,
            seed: 0,
            work_dir: work_dir.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseScore {
    pub mode: usize,
    /// kcal/mol
    pub affinity: f64,
    pub rmsd_lb: f64,
    pub rmsd_ub: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockResult {
    pub smiles: String,
    pub best_affinity: f64,
    pub poses: Vec<PoseScore>,
}

/// Rows of the affinity table that follows the `-----+----` rule in the
/// program's log. Stops at the first line that is not a pose row.
pub fn parse_affinity_table(log: &str) -> Vec<PoseScore> {
    let mut rows = Vec::new();
    let mut in_table = false;
    for line in log.lines() {
        if !in_table {
            in_table = line.trim_start().starts_with("-----+");
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let parsed = (f.len() == 4)
            .then(|| {
                Some(PoseScore {
                    mode: f[0].parse().ok()?,
                    affinity: f[1].parse().ok()?,
                    rmsd_lb: f[2].parse().ok()?,
                    rmsd_ub: f[3].parse().ok()?,
                })
            })
            .flatten();
        match parsed {
            Some(p) => rows.push(p),
            None => break,
        }
    }
    rows
}

/// AutoDock atom type for heavy atom `i`.
fn autodock_type(mol: &pharmasyn_chem::Mol, i: usize) -> String {
    let a = mol.atom(i);
    match a.element {
        6 if a.aromatic => "A".into(),
        7 if a.charge <= 0 && a.hydrogens == 0 && mol.degree(i) < 3 => "NA".into(),
        8 => "OA".into(),
        16 => "SA".into(),
        e => symbol(e).to_string(),
    }
}

/// Rigid-ligand PDBQT text for a conformer.
pub fn write_pdbqt(conf: &Conformer) -> String {
    let mol = conf.parent.mol();
    let mut s = format!("REMARK  Name = {}\nROOT\n", conf.parent.smiles());
    for (i, xyz) in conf.coords.iter().enumerate() {
        let ty = autodock_type(mol, i);
        let name = format!("{}{}", symbol(mol.atom(i).element), i + 1);
        writeln!(
            s,
            "ATOM  {:>5} {:<4} UNL     1    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00    {:>+6.3} {:<2}",
            i + 1,
            name,
            xyz[0],
            xyz[1],
            xyz[2],
            0.0,
            ty
        )
        .unwrap();
    }
    s.push_str("ENDROOT\nTORSDOF 0\n");
    s
}

pub fn centroid(coords: &[[f64; 3]]) -> [f64; 3] {
    let n = coords.len().max(1) as f64;
    let mut c = [0.0; 3];
    for p in coords {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    c
}

/// Command-line arguments for one ligand.
pub fn docking_args(job: &DockingJob, ligand: &Path, out: &Path, center: [f64; 3]) -> Vec<String> {
    let mut a: Vec<String> = vec![
        "-r".into(),
        job.receptor.display().to_string(),
        "-l".into(),
        ligand.display().to_string(),
    ];
    for (axis, c) in ["x", "y", "z"].iter().zip(center) {
        a.push(format!("--center_{axis}"));
        a.push(format!("{c:.3}"));
    }
    for axis in ["x", "y", "z"] {
        a.push(format!("--size_{axis}"));
        a.push(format!("{}", job.box_edge));
    }
    a.extend([
        "--num_modes".into(),
        job.num_modes.min(MAX_POSES).to_string(),
        "--seed".into(),
        job.seed.to_string(),
        "--cpu".into(),
        "1".into(),
        "-o".into(),
        out.display().to_string(),
    ]);
    a
}

/// Resolves a program name against PATH; paths containing a separator are
/// checked directly.
pub fn find_executable(name: &str) -> Option<PathBuf> {
    let is_file = |p: &Path| p.is_file();
    if name.contains(std::path::MAIN_SEPARATOR) {
        let p = PathBuf::from(name);
        return is_file(&p).then_some(p);
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|d| d.join(name))
            .find(|p| is_file(p))
    })
}

fn dock_one(job: &DockingJob, exe: &Path, k: usize, mol: &Molecule) -> Result<DockResult, DockError> {
    let conf = gen_conformer(mol, job.seed)?;
    let lig = job.work_dir.join(format!("ligand_{k}.pdbqt"));
    let out = job.work_dir.join(format!("poses_{k}.pdbqt"));
    std::fs::write(&lig, write_pdbqt(&conf))?;
    let center = job.center.unwrap_or_else(|| centroid(&conf.coords));
    let output = Command::new(exe).args(docking_args(job, &lig, &out, center)).output()?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    let fail = |extra: &str| DockError::ToolFailure {
        ligand: mol.smiles().to_string(),
        output: format!("{extra}{}{}", stdout, String::from_utf8_lossy(&output.stderr)),
    };
    if !output.status.success() {
        return Err(fail(&format!("exit status {}\n", output.status)));
    }
    let poses = parse_affinity_table(&stdout);
    let Some(best) = poses.iter().map(|p| p.affinity).reduce(f64::min) else {
        return Err(fail("no affinity table in output\n"));
    };
    Ok(DockResult {
        smiles: mol.smiles().to_string(),
        best_affinity: best,
        poses,
    })
}

/// Docks every ligand with at most `job.workers` processes at a time.
/// Results are in ligand order; the first failure is returned.
pub fn dock(job: &DockingJob) -> Result<Vec<DockResult>, DockError> {
    if job.ligands.is_empty() {
        return Ok(Vec::new());
    }
    let exe = find_executable(&job.executable).ok_or_else(|| DockError::ExternalToolMissing {
        tool: job.executable.clone(),
    })?;
    std::fs::create_dir_all(&job.work_dir)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<DockResult, DockError>>>> = Mutex::new(vec![None; job.ligands.len()]);
    std::thread::scope(|s| {
        for _ in 0..job.workers.clamp(1, job.ligands.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(mol) = job.ligands.get(k) else { break };
                let r = dock_one(job, &exe, k, mol);
                results.lock().expect("no poisoned workers")[k] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every ligand visited"))
        .collect()
}
