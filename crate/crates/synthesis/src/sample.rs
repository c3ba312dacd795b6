//! Random route sampling.

use rand::Rng;

use crate::catalog::BuildingBlockCatalog;
use crate::error::SynthesisError;
use crate::template::{ReactionTemplate, ReactionTemplateSet};
use crate::tree::{extend, RouteBuilder, SyntheticTree};

/// Attempts per extension step before giving up.
pub const RETRY_BUDGET: usize = 50;

/// Which templates the current product can enter, per reactant slot.
fn product_slots(templates: &ReactionTemplateSet, product: &pharmasyn_chem::Molecule) -> Vec<[bool; 2]> {
    templates
        .templates()
        .iter()
        .map(|t| {
            let a = t.slot_matches(0, product);
            let b = t.arity == 2 && t.slot_matches(1, product);
            [a, b]
        })
        .collect()
}

/// Samples a linear route of uniformly drawn depth in `[1, max_depth]`.
///
/// Each extension draws a block uniformly and one template uniformly among
/// those applicable to (product, block) in either order, or to the product
/// alone for unimolecular templates. After [`RETRY_BUDGET`] failed draws the
/// route so far is returned inside `SamplingExhausted`.
pub fn sample_tree<R: Rng + ?Sized>(
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    max_depth: usize,
    rng: &mut R,
) -> Result<SyntheticTree, SynthesisError> {
    if max_depth == 0 {
        return Err(SynthesisError::InvalidTree("max_depth must be at least 1".into()));
    }
    let depth = rng.random_range(1..=max_depth);
    let blocks = catalog.blocks();
    let first = &blocks[rng.random_range(0..blocks.len())];
    let mut route = RouteBuilder::start(first.id, &first.mol);
    while route.len() < depth {
        let slots = product_slots(templates, route.current());
        let mut extended = false;
        for _ in 0..RETRY_BUDGET {
            let block = &blocks[rng.random_range(0..blocks.len())];
            let options: Vec<&ReactionTemplate> = templates
                .templates()
                .iter()
                .zip(&slots)
                .filter(|(t, s)| match t.arity {
                    1 => s[0],
                    _ => (s[0] && t.slot_matches(1, &block.mol)) || (s[1] && t.slot_matches(0, &block.mol)),
                })
                .map(|(t, _)| t)
                .collect();
            if options.is_empty() {
                continue;
            }
            let t = options[rng.random_range(0..options.len())];
            let new_block = (t.arity == 2).then_some(&block.mol);
            if let Ok((product, order)) = extend(t, route.current(), new_block) {
                route.push((t.arity == 2).then_some(block.id), t.id, order, product);
                extended = true;
                break;
            }
        }
        if !extended {
            return Err(SynthesisError::SamplingExhausted {
                partial: Box::new(route.finish()),
            });
        }
    }
    Ok(route.finish())
}

/// Like [`sample_tree`] but accepts a truncated route.
pub fn sample_tree_lenient<R: Rng + ?Sized>(
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
    max_depth: usize,
    rng: &mut R,
) -> Result<SyntheticTree, SynthesisError> {
    match sample_tree(catalog, templates, max_depth, rng) {
        Err(SynthesisError::SamplingExhausted { partial }) => Ok(*partial),
        other => other,
    }
}
