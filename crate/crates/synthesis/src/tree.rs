//! Linear synthetic routes and their replay.

use pharmasyn_chem::{canonicalize, Molecule};
use serde::{Deserialize, Serialize};

use crate::catalog::BuildingBlockCatalog;
use crate::error::SynthesisError;
use crate::template::{applicable, apply, ReactionTemplate, ReactionTemplateSet};

/// Which reactant slot the current product occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    ProductFirst,
    BlockFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    /// New building block; `None` only for unimolecular steps.
    pub block: Option<u32>,
    /// Template id; `None` (NONE) at step 0.
    pub reaction: Option<u32>,
    pub order: Option<Order>,
}

impl Step {
    pub fn start(block: u32) -> Step {
        Step {
            block: Some(block),
            reaction: None,
            order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyntheticTree {
    pub steps: Vec<Step>,
    /// Canonical SMILES after each step.
    pub products: Vec<String>,
    #[serde(rename = "final")]
    pub final_smiles: String,
}

impl SyntheticTree {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// Block ids in route order.
    pub fn blocks(&self) -> Vec<u32> {
        self.steps.iter().filter_map(|s| s.block).collect()
    }

    pub fn final_molecule(&self) -> Result<Molecule, SynthesisError> {
        canonicalize(&self.final_smiles).map_err(|e| SynthesisError::InvalidTree(e.to_string()))
    }

    fn check_shape(&self) -> Result<(), SynthesisError> {
        let bad = |m: &str| Err(SynthesisError::InvalidTree(m.to_string()));
        let Some(first) = self.steps.first() else {
            return bad("no steps");
        };
        if first.block.is_none() || first.reaction.is_some() {
            return bad("step 0 must be a block with reaction NONE");
        }
        if self.steps[1..].iter().any(|s| s.reaction.is_none()) {
            return bad("reaction NONE after step 0");
        }
        if self.products.len() != self.steps.len() {
            return bad("products and steps differ in length");
        }
        if self.products.last() != Some(&self.final_smiles) {
            return bad("final is not the last product");
        }
        Ok(())
    }
}

/// Applies `t` to the current product and an optional new block. Bimolecular
/// templates try (product, block) first, then (block, product).
pub fn extend(
    t: &ReactionTemplate,
    product: &Molecule,
    block: Option<&Molecule>,
) -> Result<(Molecule, Option<Order>), SynthesisError> {
    match (t.arity, block) {
        (1, None) => Ok((apply(t, &[product])?, None)),
        (2, Some(b)) => {
            let mut last = SynthesisError::NoProduct { template: t.id };
            for (order, pair) in [(Order::ProductFirst, [product, b]), (Order::BlockFirst, [b, product])] {
                if !applicable(t, &pair)? {
                    continue;
                }
                match apply(t, &pair) {
                    Ok(m) => return Ok((m, Some(order))),
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
        (arity, b) => Err(SynthesisError::ArityMismatch {
            template: t.id,
            expected: arity,
            got: 1 + usize::from(b.is_some()),
        }),
    }
}

/// Runs one recorded step exactly as stored.
pub fn apply_step(
    t: &ReactionTemplate,
    product: &Molecule,
    block: Option<&Molecule>,
    order: Option<Order>,
) -> Result<Molecule, SynthesisError> {
    match (block, order) {
        (None, None) => apply(t, &[product]),
        (Some(b), Some(Order::ProductFirst)) => apply(t, &[product, b]),
        (Some(b), Some(Order::BlockFirst)) => apply(t, &[b, product]),
        _ => Err(SynthesisError::InvalidTree(
            "order must be set exactly for bimolecular steps".into(),
        )),
    }
}

/// Recomputes every product and checks it against the stored route.
pub fn replay(
    tree: &SyntheticTree,
    catalog: &BuildingBlockCatalog,
    templates: &ReactionTemplateSet,
) -> Result<Molecule, SynthesisError> {
    tree.check_shape()?;
    let mut product: Option<Molecule> = None;
    for (i, step) in tree.steps.iter().enumerate() {
        let block = step.block.map(|id| catalog.get(id)).transpose()?;
        let next = match (&product, step.reaction) {
            (None, None) => block.expect("checked shape").mol.clone(),
            (Some(p), Some(rid)) => {
                let t = templates.get(rid)?;
                apply_step(t, p, block.map(|b| &b.mol), step.order)?
            }
            _ => unreachable!("checked shape"),
        };
        if next.smiles() != tree.products[i] {
            return Err(SynthesisError::ReplayMismatch {
                step: i,
                expected: tree.products[i].clone(),
                got: next.smiles().to_string(),
            });
        }
        product = Some(next);
    }
    Ok(product.expect("at least one step"))
}

/// Incrementally built route.
#[derive(Debug, Clone)]
pub struct RouteBuilder {
    steps: Vec<Step>,
    products: Vec<Molecule>,
}

impl RouteBuilder {
    pub fn start(block_id: u32, block: &Molecule) -> Self {
        RouteBuilder {
            steps: vec![Step::start(block_id)],
            products: vec![block.clone()],
        }
    }

    pub fn current(&self) -> &Molecule {
        self.products.last().expect("non-empty route")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, block: Option<u32>, reaction: u32, order: Option<Order>, product: Molecule) {
        self.steps.push(Step {
            block,
            reaction: Some(reaction),
            order,
        });
        self.products.push(product);
    }

    pub fn finish(&self) -> SyntheticTree {
        SyntheticTree {
            steps: self.steps.clone(),
            products: self.products.iter().map(|m| m.smiles().to_string()).collect(),
            final_smiles: self.current().smiles().to_string(),
        }
    }
}
