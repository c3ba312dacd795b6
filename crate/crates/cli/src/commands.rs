use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use pharmasyn_chem::{canonicalize, Molecule};
use pharmasyn_design::{
    dock, property_table, random_baseline, render_property_table, similarity_report, Designer, DockingJob,
    GenerationConfig, NegLogP, Qed, Scorer,
};
use pharmasyn_design::eval::property_csv;
use pharmasyn_model::{train, write_metrics_csv, Checkpoint};
use pharmasyn_synthesis::{
    make_dataset, read_jsonl, write_jsonl, BuildingBlockCatalog, ReactionTemplateSet, SyntheticTree, TrainingTriple,
};
use serde::Serialize;

use crate::config::FileConfig;
use crate::error::CliError;
use crate::{Command, Global, Objective};

fn catalog(g: &Global) -> Result<BuildingBlockCatalog, CliError> {
    Ok(match &g.catalog {
        Some(p) => BuildingBlockCatalog::load(p)?,
        None => BuildingBlockCatalog::desk(),
    })
}

fn templates(g: &Global) -> Result<ReactionTemplateSet, CliError> {
    Ok(match &g.templates {
        Some(p) => ReactionTemplateSet::load(p)?,
        None => ReactionTemplateSet::desk(),
    })
}

fn checkpoint_path(g: &Global) -> Result<&Path, CliError> {
    g.checkpoint
        .as_deref()
        .ok_or_else(|| CliError::Usage("--checkpoint is required for this command".into()))
}

fn load_checkpoint(g: &Global) -> Result<Checkpoint, CliError> {
    Ok(Checkpoint::load(checkpoint_path(g)?)?)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Writes to `out` or stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_jsonl(items, &mut buf)?;
    Ok(buf)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// One molecule per line: either SMILES (first field) or a route object,
/// whose final product is used. Failed `generate` records are skipped.
fn read_molecules(path: &Path) -> Result<Vec<Molecule>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let smiles = if line.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(line)?;
            // `generate` records wrap the route and may carry an error instead.
            if v.get("error").is_some() {
                continue;
            }
            v.get("final")
                .or_else(|| v.get("tree").and_then(|t| t.get("final")))
                .and_then(|s| s.as_str())
                .ok_or_else(|| CliError::Runtime(format!("{}:{}: route has no \"final\"", path.display(), k + 1)))?
                .to_string()
        } else {
            line.split_whitespace().next().unwrap_or_default().to_string()
        };
        out.push(canonicalize(&smiles)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct GenRecord {
    query: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<SyntheticTree>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn run(g: &Global, command: Command) -> Result<(), CliError> {
    let cfg = FileConfig::load(g.config.as_deref())?;
    match command {
        Command::Datagen { n, max_depth, out } => {
            let ds = make_dataset(
                &catalog(g)?,
                &templates(g)?,
                n,
                max_depth.unwrap_or(cfg.datagen.max_depth),
                g.seed,
            )?;
            emit(out.as_deref(), &jsonl(&ds.triples)?)?;
            if g.json {
                eprintln!("{}", serde_json::json!({"triples": ds.triples.len(), "skipped": ds.skipped.len()}));
            } else {
                eprintln!("{} triples, {} candidates skipped", ds.triples.len(), ds.skipped.len());
            }
        }
        Command::Train {
            data,
            epochs,
            lr,
            batch_size,
            d_model,
            no_detach,
            metrics,
        } => {
            let path = checkpoint_path(g)?.to_path_buf();
            let triples: Vec<TrainingTriple> = read_jsonl(open(&data)?)?;
            let mut tc = cfg.train.clone();
            tc.seed = g.seed;
            tc.epochs = epochs.unwrap_or(tc.epochs);
            tc.lr = lr.unwrap_or(tc.lr);
            tc.batch_size = batch_size.unwrap_or(tc.batch_size);
            tc.d_model = d_model.unwrap_or(tc.d_model);
            tc.detach_targets &= !no_detach;
            tc.validate().map_err(CliError::Usage)?;
            let out = train(&triples, &catalog(g)?, &templates(g)?, &tc)?;
            out.checkpoint.save(&path)?;
            if let Some(m) = metrics {
                let mut buf = Vec::new();
                write_metrics_csv(&out.metrics, &mut buf)?;
                emit(Some(&m), &buf)?;
            }
            let last = out.metrics.last().copied().unwrap_or_default();
            if g.json {
                print_json(&last)?;
            } else {
                println!(
                    "epoch {}: L_B {:.4} L_rxn {:.4} block_acc {:.3} rxn_acc {:.3}",
                    last.epoch, last.l_b, last.l_rxn, last.block_acc, last.rxn_acc
                );
            }
        }
        Command::Generate {
            data,
            smiles,
            max_steps,
            no_mask,
            out,
        } => {
            let (cat, tpl, ckpt) = (catalog(g)?, templates(g)?, load_checkpoint(g)?);
            let d = Designer::new(&ckpt, &cat, &tpl)?;
            let gen = GenerationConfig {
                max_steps: max_steps.unwrap_or(cfg.generation.max_steps),
                mask_inapplicable: cfg.generation.mask_inapplicable && !no_mask,
                ..cfg.generation.clone()
            };
            let mut graphs = Vec::new();
            if let Some(p) = data {
                let triples: Vec<TrainingTriple> = read_jsonl(open(&p)?)?;
                graphs.extend(triples.iter().map(|t| Ok(t.graph())));
            }
            for s in &smiles {
                graphs.push(Designer::query_graph(&canonicalize(s)?));
            }
            if graphs.is_empty() {
                return Err(CliError::Usage("give --data or at least one --smiles".into()));
            }
            let records: Vec<GenRecord> = graphs
                .into_iter()
                .enumerate()
                .map(|(query, graph)| match graph.and_then(|gr| d.generate(&gr, &gen)) {
                    Ok(tree) => GenRecord {
                        query,
                        tree: Some(tree),
                        error: None,
                    },
                    Err(e) => GenRecord {
                        query,
                        tree: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            emit(out.as_deref(), &jsonl(&records)?)?;
        }
        Command::Expand {
            smiles,
            n,
            max_steps,
            top_k,
            temperature,
            out,
        } => {
            let (cat, tpl, ckpt) = (catalog(g)?, templates(g)?, load_checkpoint(g)?);
            let d = Designer::new(&ckpt, &cat, &tpl)?;
            let gen = GenerationConfig {
                max_steps: max_steps.unwrap_or(cfg.generation.max_steps),
                top_k: top_k.unwrap_or(cfg.generation.top_k),
                temperature: temperature.unwrap_or(cfg.generation.temperature),
                ..cfg.generation.clone()
            };
            let seed = canonicalize(&smiles)?;
            let e = d.hit_expand(&seed, n, &gen, g.seed)?;
            emit(out.as_deref(), &jsonl(&e.routes)?)?;
            if g.json {
                eprintln!("{}", serde_json::json!({"seed": seed.smiles(), "seed_id": e.seed_id, "routes": e.routes.len()}));
            } else {
                eprintln!("seed {} is block {} in the routes' catalog", seed.smiles(), e.seed_id);
            }
        }
        Command::Optimize {
            seeds,
            random,
            objective,
            cycles,
            population,
            topk,
            neighbor_k,
            lineage,
            out,
        } => {
            let (cat, tpl, ckpt) = (catalog(g)?, templates(g)?, load_checkpoint(g)?);
            let d = Designer::new(&ckpt, &cat, &tpl)?;
            let seed_trees: Vec<SyntheticTree> = match seeds {
                Some(p) => read_jsonl(open(&p)?)?,
                None => random_baseline(&cat, &tpl, random, g.seed)?,
            };
            let mut ga = cfg.ga.clone();
            ga.cycles = cycles.unwrap_or(ga.cycles);
            ga.population = population.unwrap_or(ga.population);
            ga.topk_parents = topk.unwrap_or(ga.topk_parents);
            ga.neighbor_k = neighbor_k.unwrap_or(ga.neighbor_k);
            let scorer: &dyn Scorer = match objective {
                Objective::NegLogp => &NegLogP,
                Objective::Qed => &Qed,
            };
            let r = d.optimize(&seed_trees, scorer, &ga, g.seed)?;
            if let Some(p) = lineage {
                emit(Some(&p), &jsonl(&r.lineage)?)?;
            }
            emit(out.as_deref(), &jsonl(&r.elites)?)?;
            if g.json {
                eprintln!("{}", serde_json::json!({"scorer": scorer.name(), "best_per_cycle": r.best_per_cycle}));
            } else {
                eprintln!("{} best per cycle: {:?}", scorer.name(), r.best_per_cycle);
            }
        }
        Command::Neighbors { block, k } => {
            let (cat, tpl, ckpt) = (catalog(g)?, templates(g)?, load_checkpoint(g)?);
            let d = Designer::new(&ckpt, &cat, &tpl)?;
            let hits = d.nearest_blocks(block, k)?;
            if g.json {
                let rows: Vec<_> = hits
                    .iter()
                    .map(|&(id, cos)| serde_json::json!({"id": id, "cosine": cos, "smiles": cat.get(id).map(|b| b.mol.smiles().to_string()).ok()}))
                    .collect();
                print_json(&rows)?;
            } else {
                for (id, cos) in hits {
                    println!("{id}\t{cos:.4}\t{}", cat.get(id)?.mol.smiles());
                }
            }
        }
        Command::Eval {
            input,
            random,
            reference,
            label,
            csv,
        } => {
            let mols = match (input, random) {
                (Some(p), None) => read_molecules(&p)?,
                (None, Some(n)) => random_baseline(&catalog(g)?, &templates(g)?, n, g.seed)?
                    .iter()
                    .map(|t| t.final_molecule())
                    .collect::<Result<_, _>>()?,
                _ => return Err(CliError::Usage("give exactly one of --input or --random".into())),
            };
            if mols.is_empty() {
                return Err(CliError::Runtime("no molecules to evaluate".into()));
            }
            let table = property_table(&mols, label.as_deref())?;
            let sim = reference
                .map(|r| similarity_report(&mols, &canonicalize(&r)?))
                .transpose()?;
            if g.json {
                print_json(&serde_json::json!({"properties": table, "similarity": sim}))?;
            } else if csv {
                print!("{}", property_csv(std::slice::from_ref(&table)));
                if let Some(s) = &sim {
                    print!("{}", s.to_csv());
                }
            } else {
                print!("{}", render_property_table(std::slice::from_ref(&table)));
                if let Some(s) = &sim {
                    println!(
                        "tanimoto mean {:.3} [{:.3}, {:.3}]  murcko mean {:.3} [{:.3}, {:.3}]",
                        s.tanimoto.mean,
                        s.tanimoto.min,
                        s.tanimoto.max,
                        s.murcko_tanimoto.mean,
                        s.murcko_tanimoto.min,
                        s.murcko_tanimoto.max
                    );
                }
            }
        }
        Command::Dock {
            receptor,
            input,
            center,
            box_edge,
            num_modes,
            executable,
            workers,
            work_dir,
        } => {
            let ligands = read_molecules(&input)?;
            let work_dir = work_dir.unwrap_or_else(|| std::env::temp_dir().join("pharmasyn-dock"));
            let mut job = DockingJob::new(receptor, ligands, work_dir);
            job.center = center;
            job.box_edge = box_edge;
            job.num_modes = num_modes;
            job.executable = executable;
            job.workers = workers;
            job.seed = g.seed;
            let results = dock(&job)?;
            if g.json {
                print_json(&results)?;
            } else {
                for r in results {
                    println!("{}\t{:.2}", r.smiles, r.best_affinity);
                }
            }
        }
    }
    Ok(())
}
