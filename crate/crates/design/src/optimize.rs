//! Elitist genetic search over routes. A child swaps one block of its parent
//! for a Z′ neighbour and re-derives the reactions from that step on.

use std::collections::HashSet;
use std::io::Write;

use pharmasyn_chem::{properties, Molecule};
use pharmasyn_synthesis::{
    apply_step, extend, replay, write_jsonl, BuildingBlockCatalog, ReactionTemplateSet, RouteBuilder, SyntheticTree,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DesignError;
use crate::generate::Designer;
use crate::neighbors::nearest_in_index;

/// Maps a molecule to a fitness; higher is better. Must be deterministic.
pub trait Scorer {
    fn name(&self) -> &str;
    fn score(&self, mol: &Molecule) -> f64;
}

/// Lower logP scores higher.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegLogP;

impl Scorer for NegLogP {
    fn name(&self) -> &str {
        "neg_logp"
    }
    fn score(&self, mol: &Molecule) -> f64 {
        -properties(mol).logp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Qed;

impl Scorer for Qed {
    fn name(&self) -> &str {
        "qed"
    }
    fn score(&self, mol: &Molecule) -> f64 {
        properties(mol).qed
    }
}

/// Wraps a closure.
pub struct FnScorer<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(&Molecule) -> f64> Scorer for FnScorer<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn score(&self, mol: &Molecule) -> f64 {
        (self.f)(mol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Children proposed per cycle.
    pub population: usize,
    pub cycles: usize,
    /// Elites kept after each cycle.
    pub topk_parents: usize,
    /// Z′ neighbours a mutated block is drawn from.
    pub neighbor_k: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 32,
            cycles: 3,
            topk_parents: 8,
            neighbor_k: 8,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), DesignError> {
        if [self.population, self.cycles, self.topk_parents, self.neighbor_k].contains(&0) {
            return Err(DesignError::Config("GA sizes must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: usize,
    /// Cycle that produced it; 0 for seeds.
    pub cycle: usize,
    pub tree: SyntheticTree,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageEvent {
    pub cycle: usize,
    pub parent_id: usize,
    pub child_id: usize,
    pub mutated_step: usize,
    pub old_block: u32,
    pub new_block: u32,
    /// Reaction chosen where the new block joins the route; `None` for a
    /// one-block route.
    pub reaction: Option<u32>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub seeds: Vec<Individual>,
    /// Final elites, best first.
    pub elites: Vec<Individual>,
    pub lineage: Vec<LineageEvent>,
    /// Best elite score after seeding and after every cycle.
    pub best_per_cycle: Vec<f64>,
}

impl OptimizeResult {
    pub fn write_lineage(&self, w: impl Write) -> std::io::Result<()> {
        write_jsonl(&self.lineage, w)
    }
}

/// Best first; among equal scores the older individual wins, so a cycle
/// whose children only tie cannot displace an elite.
fn rank(pool: &mut [Individual]) {
    pool.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
}

/// Outcome of one mutation.
struct Child {
    tree: SyntheticTree,
    mutated_step: usize,
    old_block: u32,
    new_block: u32,
    reaction: Option<u32>,
}

/// Templates that join `product` and `block`, with their products.
fn applicable_joins(
    templates: &ReactionTemplateSet,
    product: &Molecule,
    block: &Molecule,
) -> Vec<(u32, Option<pharmasyn_synthesis::Order>, Molecule)> {
    templates
        .templates()
        .iter()
        .filter(|t| t.arity == 2)
        .filter_map(|t| extend(t, product, Some(block)).ok().map(|(m, o)| (t.id, o, m)))
        .collect()
}

/// Replaces the block at `step` with `new_block`. Steps before it are kept
/// as recorded. The joining reaction is resampled uniformly among those that
/// apply, and later steps keep their reaction when it still applies or
/// resample otherwise. `None` if some step has no applicable reaction.
fn rebuild<R: Rng>(
    tree: &SyntheticTree,
    step: usize,
    new_block: u32,
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    rng: &mut R,
) -> Result<Option<(SyntheticTree, Option<u32>)>, DesignError> {
    let root = if step == 0 { new_block } else { tree.steps[0].block.expect("replayed root") };
    let mut route = RouteBuilder::start(root, &catalog.get(root)?.mol);
    let join = step.max(1);
    let mut join_reaction = None;
    for (i, s) in tree.steps.iter().enumerate().skip(1) {
        let block_id = if i == step { new_block } else { s.block.expect("bimolecular route") };
        let block = &catalog.get(block_id)?.mol;
        let recorded = s.reaction.expect("reaction after step 0");
        if i < join {
            let t = templates.get(recorded)?;
            let p = apply_step(t, route.current(), Some(block), s.order)?;
            route.push(Some(block_id), recorded, s.order, p);
            continue;
        }
        let kept = (i > join)
            .then(|| extend(templates.get(recorded).ok()?, route.current(), Some(block)).ok())
            .flatten();
        let (rid, order, product) = match kept {
            Some((p, o)) => (recorded, o, p),
            None => {
                let options = applicable_joins(templates, route.current(), block);
                let Some(pick) = options.choose(rng) else {
                    return Ok(None);
                };
                pick.clone()
            }
        };
        if i == join {
            join_reaction = Some(rid);
        }
        route.push(Some(block_id), rid, order, product);
    }
    Ok(Some((route.finish(), join_reaction)))
}

impl Designer<'_> {
    fn mutate<R: Rng>(&self, parent: &SyntheticTree, neighbor_k: usize, rng: &mut R) -> Result<Option<Child>, DesignError> {
        let step = rng.random_range(0..parent.steps.len());
        let old_block = parent.steps[step].block.ok_or(DesignError::Config(
            "GA routes must carry a block at every step".into(),
        ))?;
        let pool = nearest_in_index(&self.index, old_block, neighbor_k)?;
        let Some(&(new_block, _)) = pool.choose(rng) else {
            return Ok(None);
        };
        let Some((tree, reaction)) = rebuild(parent, step, new_block, self.catalog, self.templates, rng)? else {
            return Ok(None);
        };
        if replay(&tree, self.catalog, self.templates).is_err() {
            return Ok(None);
        }
        Ok(Some(Child {
            tree,
            mutated_step: step,
            old_block,
            new_block,
            reaction,
        }))
    }

    /// Runs `cfg.cycles` rounds of mutate, score, select. Each cycle proposes
    /// `cfg.population` children, taking parents from the elites in turn.
    /// Children that fail replay or repeat a molecule already in the pool are
    /// dropped. The elites are the best `topk_parents` of old elites and new
    /// children, so the best score never decreases.
    pub fn optimize(
        &self,
        seed_trees: &[SyntheticTree],
        scorer: &dyn Scorer,
        cfg: &GaConfig,
        rng_seed: u64,
    ) -> Result<OptimizeResult, DesignError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut seeds = Vec::with_capacity(seed_trees.len());
        for (id, tree) in seed_trees.iter().enumerate() {
            let mol = replay(tree, self.catalog, self.templates)?;
            seeds.push(Individual {
                id,
                cycle: 0,
                tree: tree.clone(),
                score: scorer.score(&mol),
            });
        }
        let mut elites = seeds.clone();
        rank(&mut elites);
        elites.truncate(cfg.topk_parents);
        if elites.is_empty() {
            return Err(DesignError::ExtinctPopulation);
        }
        let mut next_id = seeds.len();
        let mut lineage = Vec::new();
        let mut best_per_cycle = vec![elites[0].score];

        for cycle in 1..=cfg.cycles {
            let mut seen: HashSet<String> = elites.iter().map(|e| e.tree.final_smiles.clone()).collect();
            let mut pool = elites.clone();
            for j in 0..cfg.population {
                let parent = &elites[j % elites.len()];
                let Some(child) = self.mutate(&parent.tree, cfg.neighbor_k, &mut rng)? else {
                    continue;
                };
                if !seen.insert(child.tree.final_smiles.clone()) {
                    continue;
                }
                let score = scorer.score(&child.tree.final_molecule()?);
                lineage.push(LineageEvent {
                    cycle,
                    parent_id: parent.id,
                    child_id: next_id,
                    mutated_step: child.mutated_step,
                    old_block: child.old_block,
                    new_block: child.new_block,
                    reaction: child.reaction,
                    score,
                });
                pool.push(Individual {
                    id: next_id,
                    cycle,
                    tree: child.tree,
                    score,
                });
                next_id += 1;
            }
            rank(&mut pool);
            pool.truncate(cfg.topk_parents);
            elites = pool;
            best_per_cycle.push(elites[0].score);
        }
        Ok(OptimizeResult {
            seeds,
            elites,
            lineage,
            best_per_cycle,
        })
    }

    /// Z′-cosine neighbours of a catalog block.
    pub fn nearest_blocks(&self, id: u32, k: usize) -> Result<Vec<(u32, f64)>, DesignError> {
        nearest_in_index(&self.index, id, k)
    }
}
