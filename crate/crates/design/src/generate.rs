//! Route generation from a trained model: greedy decoding for pharmacophore
//! queries and top-k sampling for hit expansion.

use ndarray::{Array1, Array2, ArrayView1};
use pharmasyn_chem::{extract_pharmacophores, gen_conformer, morgan_fp, Molecule, PharmacophoreGraph, FP_BITS};
use pharmasyn_model::{select_block, BlockChoice, Checkpoint, Model, RetrievalIndex, TokenSequence};
use pharmasyn_synthesis::{
    extend, BuildingBlockCatalog, Order, ReactionTemplateSet, RouteBuilder, SyntheticTree, BLOCK_FP_RADIUS,
};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DesignError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    /// Upper bound on route length, counting the first block.
    pub max_steps: usize,
    /// Skip reactions that do not apply to the current pair instead of failing.
    pub mask_inapplicable: bool,
    /// Candidate pool for sampled decoding.
    pub top_k: usize,
    pub temperature: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_steps: 4,
            mask_inapplicable: true,
            top_k: 16,
            temperature: 1.0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), DesignError> {
        if self.max_steps == 0 || self.top_k == 0 || !(self.temperature > 0.0) {
            return Err(DesignError::Config(
                "max_steps and top_k must be positive, temperature > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Conformer seed used when a molecule has to be turned into a query graph.
pub const QUERY_CONFORMER_SEED: u64 = 0;

/// A trained model bound to the catalog and templates it was trained on,
/// with the retrieval index built once.
#[derive(Debug, Clone)]
pub struct Designer<'a> {
    pub model: &'a Model<f32>,
    pub catalog: &'a BuildingBlockCatalog,
    pub templates: &'a ReactionTemplateSet,
    pub index: RetrievalIndex<f32>,
}

/// A reaction step chosen for a (product, block) pair.
#[derive(Debug, Clone)]
struct Extension {
    reaction: u32,
    order: Option<Order>,
    product: Molecule,
}

/// Routes grown from a molecule that need not be in the catalog. Replay them
/// against `catalog`, which is the original catalog plus the seed under
/// `seed_id` when it was not already a block.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub seed: Molecule,
    pub seed_id: u32,
    pub catalog: BuildingBlockCatalog,
    pub routes: Vec<SyntheticTree>,
}

impl<'a> Designer<'a> {
    /// Refuses a checkpoint trained against different inputs.
    pub fn new(
        ckpt: &'a Checkpoint,
        catalog: &'a BuildingBlockCatalog,
        templates: &'a ReactionTemplateSet,
    ) -> Result<Self, DesignError> {
        ckpt.check_inputs(catalog, templates)?;
        Ok(Self::from_model(&ckpt.model, catalog, templates))
    }

    pub fn from_model(
        model: &'a Model<f32>,
        catalog: &'a BuildingBlockCatalog,
        templates: &'a ReactionTemplateSet,
    ) -> Self {
        Designer {
            model,
            catalog,
            templates,
            index: model.retrieval_index(catalog),
        }
    }

    /// Z′ row of a catalog block.
    pub fn block_embedding(&self, id: u32) -> Result<ArrayView1<'_, f32>, DesignError> {
        let row = self
            .index
            .row_of(BlockChoice::Block(id))
            .ok_or(DesignError::UnknownBlock(id))?;
        Ok(self.index.zprime.row(row))
    }

    fn last_z(&self, memory: &Array2<f32>, seq: &TokenSequence) -> Result<Array1<f32>, DesignError> {
        let z = self.model.decode(memory, seq)?;
        Ok(z.row(z.nrows() - 1).to_owned())
    }

    /// Most probable applicable template for joining `product` and `block`.
    /// With masking off, only the argmax is tried and failure is an error.
    fn choose_reaction(
        &self,
        z: ArrayView1<f32>,
        block: u32,
        product: &Molecule,
        mask: bool,
        step: usize,
    ) -> Result<Option<Extension>, DesignError> {
        let probs = self.model.reaction_probs(z, self.block_embedding(block)?);
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        let block_mol = &self.catalog.get(block)?.mol;
        for idx in order {
            // NONE only ever labels the first step
            let Some(Some(rid)) = self.templates.reaction_at(idx) else {
                continue;
            };
            let t = self.templates.get(rid)?;
            if t.arity != 2 {
                continue;
            }
            match extend(t, product, Some(block_mol)) {
                Ok((product, order)) => {
                    return Ok(Some(Extension {
                        reaction: rid,
                        order,
                        product,
                    }))
                }
                Err(_) if mask => continue,
                Err(_) => return Err(DesignError::Inapplicable { step, reaction: rid }),
            }
        }
        Ok(None)
    }

    /// Greedy decoding: cosine argmax for blocks and the most probable
    /// applicable reaction, until END, a dead pair or `max_steps`.
    pub fn generate(&self, graph: &PharmacophoreGraph, cfg: &GenerationConfig) -> Result<SyntheticTree, DesignError> {
        cfg.validate()?;
        let memory = self.model.encode(graph)?.h;
        let mut seq = TokenSequence::start();
        let z = self.last_z(&memory, &seq)?;
        let BlockChoice::Block(first) = select_block(z.view(), &self.index)? else {
            return Err(DesignError::DeadEnd);
        };
        let mut route = RouteBuilder::start(first, &self.catalog.get(first)?.mol);
        while route.len() < cfg.max_steps {
            seq.push(&morgan_fp(route.current(), BLOCK_FP_RADIUS, FP_BITS));
            let z = self.last_z(&memory, &seq)?;
            let BlockChoice::Block(b) = select_block(z.view(), &self.index)? else {
                break;
            };
            match self.choose_reaction(z.view(), b, route.current(), cfg.mask_inapplicable, route.len())? {
                Some(ext) => route.push(Some(b), ext.reaction, ext.order, ext.product),
                None => break,
            }
        }
        Ok(route.finish())
    }

    /// Query graph for a molecule: one conformer, then pharmacophore extraction.
    pub fn query_graph(mol: &Molecule) -> Result<PharmacophoreGraph, DesignError> {
        let conf = gen_conformer(mol, QUERY_CONFORMER_SEED)?;
        Ok(extract_pharmacophores(&conf)?)
    }

    /// Samples `n` routes that start from `seed`. Decoding is primed with
    /// [START, fp(seed)] and conditioned on the seed's own pharmacophore
    /// graph. Blocks are drawn from the `top_k` cosine candidates with
    /// softmax(cos / temperature). The first extension never draws END and
    /// only considers candidates that react with the seed.
    pub fn hit_expand(
        &self,
        seed: &Molecule,
        n: usize,
        cfg: &GenerationConfig,
        rng_seed: u64,
    ) -> Result<Expansion, DesignError> {
        cfg.validate()?;
        if cfg.max_steps < 2 {
            return Err(DesignError::Config("hit expansion needs max_steps of at least 2".into()));
        }
        let (catalog, seed_id) = seeded_catalog(self.catalog, seed)?;
        let mut out = Expansion {
            seed: seed.clone(),
            seed_id,
            catalog,
            routes: Vec::with_capacity(n),
        };
        if n == 0 {
            return Ok(out);
        }
        let memory = self.model.encode(&Self::query_graph(seed)?)?.h;
        let mut seq = TokenSequence::start();
        seq.push(&morgan_fp(seed, BLOCK_FP_RADIUS, FP_BITS));

        // The first extension is the same for every sample, so its viable
        // candidates are worked out once.
        let z1 = self.last_z(&memory, &seq)?;
        let mut first = Vec::new();
        for (choice, cos) in self.index.ranked(z1.view())?.into_iter().take(cfg.top_k) {
            if let BlockChoice::Block(b) = choice {
                if let Some(ext) = self.choose_reaction(z1.view(), b, seed, true, 1)? {
                    first.push((b, cos, ext));
                }
            }
        }
        if first.is_empty() {
            return Err(DesignError::DeadEnd);
        }
        let first_dist = softmax_weights(first.iter().map(|f| f.1), cfg.temperature);

        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for _ in 0..n {
            let mut route = RouteBuilder::start(seed_id, seed);
            let mut seq = seq.clone();
            let (b, _, ext) = &first[first_dist.sample(&mut rng)];
            route.push(Some(*b), ext.reaction, ext.order, ext.product.clone());
            while route.len() < cfg.max_steps {
                seq.push(&morgan_fp(route.current(), BLOCK_FP_RADIUS, FP_BITS));
                let z = self.last_z(&memory, &seq)?;
                let pool: Vec<_> = self.index.ranked(z.view())?.into_iter().take(cfg.top_k).collect();
                let dist = softmax_weights(pool.iter().map(|p| p.1), cfg.temperature);
                let BlockChoice::Block(b) = pool[dist.sample(&mut rng)].0 else {
                    break;
                };
                match self.choose_reaction(z.view(), b, route.current(), true, route.len())? {
                    Some(ext) => route.push(Some(b), ext.reaction, ext.order, ext.product),
                    None => break,
                }
            }
            out.routes.push(route.finish());
        }
        Ok(out)
    }
}

fn softmax_weights(scores: impl Iterator<Item = f32>, temperature: f64) -> WeightedIndex<f64> {
    let s: Vec<f64> = scores.map(f64::from).collect();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = s.iter().map(|&v| ((v - max) / temperature).exp()).collect();
    WeightedIndex::new(w).expect("non-empty pool with positive weights")
}

/// The catalog with `seed` added as a block. A seed that is already a block
/// keeps its id; otherwise it gets one past the largest id.
pub fn seeded_catalog(
    catalog: &BuildingBlockCatalog,
    seed: &Molecule,
) -> Result<(BuildingBlockCatalog, u32), DesignError> {
    if let Some(b) = catalog.blocks().iter().find(|b| b.mol.smiles() == seed.smiles()) {
        return Ok((catalog.clone(), b.id));
    }
    let seed_id = catalog.blocks().iter().map(|b| b.id).max().map_or(0, |m| m + 1);
    let entries = catalog
        .blocks()
        .iter()
        .map(|b| (b.id, b.mol.smiles()))
        .chain(std::iter::once((seed_id, seed.smiles())))
        .enumerate()
        .map(|(k, (id, s))| (k + 1, id, s));
    Ok((BuildingBlockCatalog::from_entries(entries)?, seed_id))
}
