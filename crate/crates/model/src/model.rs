use std::rc::Rc;

use ndarray::{Array1, Array2, ArrayView1, NdFloat};
use pharmasyn_chem::{BitFingerprint, PharmacophoreGraph};
use pharmasyn_nn::{softmax_rows, Graph, ParamStore};
use pharmasyn_synthesis::BuildingBlockCatalog;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::decoder::{self, PackedSequences, RetrievalIndex, TokenSequence};
use crate::egnn::{self, EncoderOutput, PackedGraphs};
use crate::error::ModelError;

/// Encoder, decoder and heads sharing one parameter store.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub params: ParamStore<T>,
}

impl<T: NdFloat> Model<T> {
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with(config, &mut rng)
    }

    pub fn init_with(config: ModelConfig, rng: &mut ChaCha8Rng) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::Config)?;
        let mut params = ParamStore::new();
        egnn::add_params(&mut params, &config, rng)?;
        decoder::add_params(&mut params, &config, rng)?;
        Ok(Model { config, params })
    }

    pub fn cast<U: NdFloat>(&self) -> Model<U> {
        Model {
            config: self.config.clone(),
            params: self.params.cast(),
        }
    }

    pub fn encode(&self, graph: &PharmacophoreGraph) -> Result<EncoderOutput<T>, ModelError> {
        self.encode_packed(&PackedGraphs::pack(&[graph])?)
    }

    pub fn encode_packed(&self, packed: &PackedGraphs<T>) -> Result<EncoderOutput<T>, ModelError> {
        let mut g = Graph::new(&self.params);
        let (h, x) = egnn::encode_packed(&mut g, &self.config, packed)?;
        Ok(EncoderOutput {
            h: g.value(h).clone(),
            x_out: g.value(x).clone(),
        })
    }

    /// Z for every position of `seq` against a single graph's memory.
    pub fn decode(&self, memory: &Array2<T>, seq: &TokenSequence) -> Result<Array2<T>, ModelError> {
        let packed = PackedSequences::pack(&[seq], vec![0], self.config.fp_bits)?;
        let mut g = Graph::new(&self.params);
        let mem = g.constant(memory.clone());
        let emb = decoder::embed_sequence(&mut g, &self.config, &packed);
        let causal = Rc::new(packed.causal_mask());
        let cross = Rc::new(packed.cross_mask(&vec![0; memory.nrows()]));
        let z = decoder::decode(&mut g, &self.config, emb, mem, &causal, &cross)?;
        Ok(g.value(z).clone())
    }

    pub fn retrieval_index(&self, catalog: &BuildingBlockCatalog) -> RetrievalIndex<T> {
        RetrievalIndex::build(&self.params, catalog)
    }

    pub fn project_block(&self, fp: &BitFingerprint) -> Array1<T> {
        let mut g = Graph::new(&self.params);
        let z = decoder::project_blocks(&mut g, vec![fp.on_bits()].into());
        g.value(z).row(0).to_owned()
    }

    pub fn end_embedding(&self) -> Array1<T> {
        self.params.get("dec.end").expect("end embedding").row(0).to_owned()
    }

    pub fn reaction_probs(&self, z: ArrayView1<T>, zprime_next: ArrayView1<T>) -> Array1<T> {
        decoder::predict_reaction(&self.params, z, zprime_next)
    }

    /// Reaction probabilities for many (z, Z′) pairs at once.
    pub fn reaction_probs_batch(&self, z: &Array2<T>, zprime: &Array2<T>) -> Array2<T> {
        let mut g = Graph::new(&self.params);
        let zv = g.constant(z.clone());
        let zp = g.constant(zprime.clone());
        let l = decoder::reaction_logits(&mut g, zv, zp);
        softmax_rows(g.value(l))
    }
}
