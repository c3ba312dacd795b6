//! Teacher-forced batches, losses and the training loop.

use std::io::Write;
use std::rc::Rc;

use ndarray::{Array2, NdFloat};
use pharmasyn_chem::{canonicalize, morgan_fp, PharmacophoreGraph, FP_BITS};
use pharmasyn_nn::{clip_global_norm, Adam, Gradients, Graph, Var};
use pharmasyn_synthesis::{BuildingBlockCatalog, ReactionTemplateSet, SyntheticTree, TrainingTriple, BLOCK_FP_RADIUS};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::{ModelConfig, TrainConfig};
use crate::decoder::{self, BlockChoice, PackedSequences, RetrievalIndex, TokenSequence};
use crate::egnn::{self, PackedGraphs};
use crate::error::ModelError;
use crate::model::Model;
use crate::num;

/// One route prepared for teacher forcing. Position k of `seq` predicts
/// `target_blocks[k]` and, before the END position, `target_rxns[k]`.
#[derive(Debug, Clone)]
pub struct Example {
    pub graph: PharmacophoreGraph,
    pub seq: TokenSequence,
    pub target_blocks: Vec<BlockChoice>,
    /// Reaction vocabulary index; `None` at the END position.
    pub target_rxns: Vec<Option<usize>>,
}

/// Token sequence [START, fp(P1), .., fp(Pm)] for a route's products.
pub fn route_tokens(tree: &SyntheticTree) -> Result<TokenSequence, ModelError> {
    let mut seq = TokenSequence::start();
    for p in &tree.products {
        let mol = canonicalize(p).map_err(|e| ModelError::UnsupportedTree(e.to_string()))?;
        seq.push(&morgan_fp(&mol, BLOCK_FP_RADIUS, FP_BITS));
    }
    Ok(seq)
}

impl Example {
    pub fn new(
        tree: &SyntheticTree,
        graph: PharmacophoreGraph,
        templates: &ReactionTemplateSet,
    ) -> Result<Self, ModelError> {
        let bad = |m: String| ModelError::UnsupportedTree(m);
        let mut target_blocks = Vec::with_capacity(tree.depth() + 1);
        let mut target_rxns = Vec::with_capacity(tree.depth() + 1);
        for step in &tree.steps {
            let block = step
                .block
                .ok_or_else(|| bad("unimolecular steps have no block to predict".into()))?;
            target_blocks.push(BlockChoice::Block(block));
            target_rxns.push(Some(templates.vocab_index(step.reaction).map_err(|e| bad(e.to_string()))?));
        }
        target_blocks.push(BlockChoice::End);
        target_rxns.push(None);
        let seq = route_tokens(tree)?;
        Ok(Example {
            graph,
            seq,
            target_blocks,
            target_rxns,
        })
    }

    pub fn from_triple(t: &TrainingTriple, templates: &ReactionTemplateSet) -> Result<Self, ModelError> {
        Self::new(&t.tree, t.graph(), templates)
    }
}

/// Packed examples plus per-position targets.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub graphs: PackedGraphs<T>,
    pub seqs: PackedSequences,
    pub target_blocks: Vec<BlockChoice>,
    /// Fingerprint on-bits of block targets; empty for END rows.
    pub target_bits: Rc<[Vec<usize>]>,
    pub is_end: Vec<bool>,
    pub target_rxns: Rc<[Option<usize>]>,
}

impl<T: NdFloat> Batch<T> {
    pub fn new(examples: &[&Example], catalog: &BuildingBlockCatalog, fp_bits: usize) -> Result<Self, ModelError> {
        let graphs: Vec<&PharmacophoreGraph> = examples.iter().map(|e| &e.graph).collect();
        let seqs: Vec<&TokenSequence> = examples.iter().map(|e| &e.seq).collect();
        let mut target_blocks = Vec::new();
        let mut target_bits = Vec::new();
        let mut is_end = Vec::new();
        let mut target_rxns = Vec::new();
        for e in examples {
            if e.target_blocks.len() != e.seq.len() || e.target_rxns.len() != e.seq.len() {
                return Err(ModelError::ShapeMismatch {
                    what: "targets per position",
                    expected: e.seq.len(),
                    got: e.target_blocks.len(),
                });
            }
            for (&b, &r) in e.target_blocks.iter().zip(&e.target_rxns) {
                target_blocks.push(b);
                match b {
                    BlockChoice::Block(id) => {
                        let blk = catalog
                            .get(id)
                            .map_err(|err| ModelError::UnsupportedTree(err.to_string()))?;
                        target_bits.push(blk.fp.on_bits());
                        is_end.push(false);
                    }
                    BlockChoice::End => {
                        target_bits.push(Vec::new());
                        is_end.push(true);
                    }
                }
                target_rxns.push(r);
            }
        }
        Ok(Batch {
            graphs: PackedGraphs::pack(&graphs)?,
            seqs: PackedSequences::pack(&seqs, (0..examples.len()).collect(), fp_bits)?,
            target_blocks,
            target_bits: target_bits.into(),
            is_end,
            target_rxns: target_rxns.into(),
        })
    }

    pub fn n_positions(&self) -> usize {
        self.target_blocks.len()
    }
}

/// Tape handles of one forward pass.
pub struct Forward {
    pub z: Var,
    pub z_target: Var,
    pub logits: Var,
    pub l_b: Var,
    pub l_rxn: Var,
    pub total: Var,
}

/// Mean over rows of (1 − cos(Z_i, Z′_i)).
pub fn block_loss<T: NdFloat>(g: &mut Graph<T>, z: Var, z_target: Var) -> Result<Var, ModelError> {
    let n = g.shape(z).0;
    for v in [z, z_target] {
        if g.value(v).rows().into_iter().any(|r| r.dot(&r) == T::zero()) {
            return Err(ModelError::ZeroVector);
        }
    }
    let cos = g.row_cosine(z, z_target);
    let s = g.sum_all(cos);
    let s = g.scale(s, num(-1.0 / n as f64));
    let one = g.constant(Array2::ones((1, 1)));
    Ok(g.add(one, s))
}

/// Mean cross-entropy over positions that have a target.
pub fn rxn_loss<T: NdFloat>(g: &mut Graph<T>, logits: Var, targets: &Rc<[Option<usize>]>) -> Var {
    let k = g.shape(logits).1;
    assert!(targets.iter().flatten().all(|&t| t < k), "reaction target outside vocabulary");
    let n = targets.iter().filter(|t| t.is_some()).count().max(1);
    let w: Rc<[T]> = vec![num::<T>(1.0 / n as f64); targets.len()].into();
    g.cross_entropy(logits, targets.clone(), w)
}

/// Builds the full loss graph: L = L_B + L_rxn.
pub fn forward<T: NdFloat>(
    g: &mut Graph<T>,
    cfg: &ModelConfig,
    batch: &Batch<T>,
    detach_targets: bool,
) -> Result<Forward, ModelError> {
    let (memory, _) = egnn::encode_packed(g, cfg, &batch.graphs)?;
    let emb = decoder::embed_sequence(g, cfg, &batch.seqs);
    let causal = Rc::new(batch.seqs.causal_mask());
    let cross = Rc::new(batch.seqs.cross_mask(&batch.graphs.graph_of));
    let z = decoder::decode(g, cfg, emb, memory, &causal, &cross)?;

    let n = batch.n_positions();
    let proj = decoder::project_blocks(g, batch.target_bits.clone());
    let keep = Array2::from_shape_fn((n, 1), |(i, _)| num::<T>(if batch.is_end[i] { 0.0 } else { 1.0 }));
    let proj = g.mul_const(proj, Rc::new(keep.clone()));
    let end_col = g.constant(keep.mapv(|v| T::one() - v));
    let end = g.param_named("dec.end");
    let end_rows = g.matmul(end_col, end);
    let z_target = g.add(proj, end_rows);
    // the reaction head always trains the projection
    let cos_target = if detach_targets { g.detach(z_target) } else { z_target };
    let l_b = block_loss(g, z, cos_target)?;
    let logits = decoder::reaction_logits(g, z, z_target);
    let l_rxn = rxn_loss(g, logits, &batch.target_rxns);
    let total = g.add(l_b, l_rxn);
    Ok(Forward {
        z,
        z_target,
        logits,
        l_b,
        l_rxn,
        total,
    })
}

/// Loss value and gradients for every parameter.
pub fn total_loss<T: NdFloat>(
    model: &Model<T>,
    batch: &Batch<T>,
    detach_targets: bool,
) -> Result<(T, Gradients<T>), ModelError> {
    let mut g = Graph::new(&model.params);
    let f = forward(&mut g, &model.config, batch, detach_targets)?;
    Ok((g.scalar(f.total), g.backward(f.total)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub l_b: f64,
    pub l_rxn: f64,
    pub block_acc: f64,
    pub rxn_acc: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    l_b: f64,
    l_rxn: f64,
    positions: usize,
    rxn_positions: usize,
    block_hits: usize,
    rxn_hits: usize,
}

impl Tally {
    fn finish(self, epoch: usize) -> EpochMetrics {
        let d = |a: f64, n: usize| if n == 0 { 0.0 } else { a / n as f64 };
        EpochMetrics {
            epoch,
            l_b: d(self.l_b, self.positions),
            l_rxn: d(self.l_rxn, self.rxn_positions),
            block_acc: d(self.block_hits as f64, self.positions),
            rxn_acc: d(self.rxn_hits as f64, self.rxn_positions),
        }
    }
}

fn tally_batch<T: NdFloat>(
    g: &Graph<T>,
    f: &Forward,
    batch: &Batch<T>,
    index: &RetrievalIndex<T>,
    t: &mut Tally,
) -> Result<(), ModelError> {
    let n = batch.n_positions();
    let nr = batch.target_rxns.iter().filter(|r| r.is_some()).count();
    t.l_b += g.scalar(f.l_b).to_f64().unwrap_or(f64::NAN) * n as f64;
    t.l_rxn += g.scalar(f.l_rxn).to_f64().unwrap_or(f64::NAN) * nr as f64;
    t.positions += n;
    t.rxn_positions += nr;
    let z = g.value(f.z);
    let logits = g.value(f.logits);
    for i in 0..n {
        if decoder::select_block(z.row(i), index)? == batch.target_blocks[i] {
            t.block_hits += 1;
        }
        if let Some(target) = batch.target_rxns[i] {
            if argmax(logits.row(i).iter().copied()) == target {
                t.rxn_hits += 1;
            }
        }
    }
    Ok(())
}

/// Index of the largest value; first wins ties.
pub fn argmax<T: PartialOrd>(it: impl IntoIterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in it.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((i, v));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Teacher-forced losses and accuracies over `examples`.
pub fn evaluate<T: NdFloat>(
    model: &Model<T>,
    examples: &[Example],
    catalog: &BuildingBlockCatalog,
    batch_size: usize,
) -> Result<EpochMetrics, ModelError> {
    let index = model.retrieval_index(catalog);
    let mut tally = Tally::default();
    let refs: Vec<&Example> = examples.iter().collect();
    for chunk in refs.chunks(batch_size.max(1)) {
        let batch = Batch::new(chunk, catalog, model.config.fp_bits)?;
        let mut g = Graph::new(&model.params);
        let f = forward(&mut g, &model.config, &batch, true)?;
        tally_batch(&g, &f, &batch, &index, &mut tally)?;
    }
    Ok(tally.finish(0))
}

pub const METRICS_HEADER: &str = "epoch,L_B,L_rxn,block_acc,rxn_acc";

pub fn write_metrics_csv(metrics: &[EpochMetrics], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for m in metrics {
        writeln!(w, "{},{},{},{},{}", m.epoch, m.l_b, m.l_rxn, m.block_acc, m.rxn_acc)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub metrics: Vec<EpochMetrics>,
}

/// Trains a model whose architecture follows `cfg.d_model`.
pub fn train(
    triples: &[TrainingTriple],
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    cfg: &TrainConfig,
) -> Result<TrainOutput, ModelError> {
    train_with(triples, catalog, templates, cfg, ModelConfig::new(cfg.d_model, templates.vocab_size()), |_| {})
}

/// Full training loop with an explicit architecture and a per-epoch callback.
pub fn train_with(
    triples: &[TrainingTriple],
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    cfg: &TrainConfig,
    model_cfg: ModelConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutput, ModelError> {
    cfg.validate().map_err(ModelError::Config)?;
    if triples.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if model_cfg.rxn_vocab != templates.vocab_size() {
        return Err(ModelError::ShapeMismatch {
            what: "reaction vocabulary",
            expected: templates.vocab_size(),
            got: model_cfg.rxn_vocab,
        });
    }
    let examples = triples
        .iter()
        .map(|t| Example::from_triple(t, templates))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model: Model<f32> = Model::init_with(model_cfg, &mut rng)?;
    let mut opt = Adam::new(&model.params, cfg.lr);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut tally = Tally::default();
        for chunk in order.chunks(cfg.batch_size) {
            let refs: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let batch = &Batch::new(&refs, catalog, model.config.fp_bits)?;
            let mut grads = {
                let index = model.retrieval_index(catalog);
                let mut g = Graph::new(&model.params);
                let f = forward(&mut g, &model.config, batch, cfg.detach_targets)?;
                let loss = f64::from(g.scalar(f.total));
                if !loss.is_finite() {
                    return Err(ModelError::Divergence { epoch, loss });
                }
                tally_batch(&g, &f, batch, &index, &mut tally)?;
                g.backward(f.total)
            };
            clip_global_norm(&mut grads, cfg.grad_clip);
            opt.step(&mut model.params, &grads);
        }
        let m = tally.finish(epoch);
        on_epoch(&m);
        metrics.push(m);
    }
    let checkpoint = Checkpoint::new(model, cfg.clone(), catalog, templates);
    Ok(TrainOutput { checkpoint, metrics })
}
