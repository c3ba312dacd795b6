use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;

/// Pharmacophore-conditioned design of synthesizable molecules.
#[derive(Parser, Debug)]
#[command(name = "pharmasyn", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with optional "train", "generation", "ga" and "datagen" sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Building-block TSV (id<TAB>SMILES); defaults to the bundled desk catalog.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Reaction template file (id<TAB>arity<TAB>SMARTS); defaults to the bundled set.
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,
    /// Model checkpoint to write (train) or read (everything else).
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Objective {
    NegLogp,
    Qed,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample random routes and write training triples as JSON Lines.
    Datagen {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Train a model on triples and write the checkpoint.
    Train {
        /// Triples JSONL from `datagen`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        d_model: Option<usize>,
        /// Let the block loss move the target embeddings too.
        #[arg(long)]
        no_detach: bool,
        /// Per-epoch metrics CSV.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Decode one route per query graph.
    Generate {
        /// Triples JSONL whose pharmacophore points are used as queries.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Query molecules; their pharmacophores come from one conformer.
        #[arg(long)]
        smiles: Vec<String>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Fail instead of skipping reactions that do not apply.
        #[arg(long)]
        no_mask: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Sample synthesizable analogs that grow from a seed molecule.
    Expand {
        #[arg(long)]
        smiles: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Genetic optimization of routes by block swaps.
    Optimize {
        /// Seed routes as JSONL; random routes are drawn when absent.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Number of random seed routes.
        #[arg(long, default_value_t = 8)]
        random: usize,
        #[arg(long, value_enum, default_value = "neg-logp")]
        objective: Objective,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        topk: Option<usize>,
        #[arg(long)]
        neighbor_k: Option<usize>,
        /// Lineage JSONL output.
        #[arg(long)]
        lineage: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Nearest building blocks in the learned embedding space.
    Neighbors {
        #[arg(long)]
        block: u32,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Property table and similarity report for a molecule set.
    Eval {
        /// SMILES lines or route JSONL.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Evaluate this many random-baseline molecules instead.
        #[arg(long)]
        random: Option<usize>,
        /// Reference molecule for the similarity report.
        #[arg(long)]
        reference: Option<String>,
        /// Row label, e.g. a PDB id.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        csv: bool,
    },
    /// Dock molecules with an external SMINA-compatible program.
    Dock {
        /// Prepared receptor (PDBQT).
        #[arg(long)]
        receptor: PathBuf,
        /// SMILES lines or route JSONL.
        #[arg(long)]
        input: PathBuf,
        /// Box center x,y,z; each ligand's centroid when absent.
        #[arg(long, value_parser = parse_center, allow_hyphen_values = true)]
        center: Option<[f64; 3]>,
        #[arg(long, default_value_t = 25.0)]
        box_edge: f64,
        #[arg(long, default_value_t = 10)]
        num_modes: usize,
        #[arg(long, default_value = "smina")]
        executable: String,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long)]
        work_dir: Option<PathBuf>,
    },
}

fn parse_center(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected x,y,z, got {} values", v.len()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match commands::run(&cli.global, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CliError;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_work_after_the_subcommand() {
        let c = Cli::try_parse_from(["pharmasyn", "datagen", "--n", "3", "--seed", "9", "--json"]).unwrap();
        assert_eq!(c.global.seed, 9);
        assert!(c.global.json);
        assert!(matches!(c.command, Command::Datagen { n: 3, .. }));
    }

    #[test]
    fn center_takes_three_values() {
        let c = Cli::try_parse_from([
            "pharmasyn", "dock", "--receptor", "r.pdbqt", "--input", "l.smi", "--center", "1,2.5,-3",
        ])
        .unwrap();
        let Command::Dock { center, .. } = c.command else { panic!() };
        assert_eq!(center, Some([1.0, 2.5, -3.0]));
        assert!(Cli::try_parse_from(["pharmasyn", "dock", "--receptor", "r", "--input", "l", "--center", "1,2"]).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 1);
        let missing = pharmasyn_design::DockError::ExternalToolMissing { tool: "smina".into() };
        assert_eq!(CliError::from(missing).exit_code(), 3);
    }
}
