use std::cmp::Ordering;

use pharmasyn_model::{BlockChoice, RetrievalIndex};

use crate::error::DesignError;

/// The `k` blocks whose Z′ rows are most cosine-similar to block `id`'s row.
/// The block itself and END are excluded; ties go to the smaller id.
pub fn nearest_in_index(index: &RetrievalIndex<f32>, id: u32, k: usize) -> Result<Vec<(u32, f64)>, DesignError> {
    let row = index.row_of(BlockChoice::Block(id)).ok_or(DesignError::UnknownBlock(id))?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let cos = index.cosines(index.zprime.row(row))?;
    let mut out: Vec<(u32, f64)> = index
        .ids
        .iter()
        .zip(cos)
        .filter_map(|(&c, v)| match c {
            BlockChoice::Block(b) if b != id => Some((b, f64::from(v))),
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    out.truncate(k);
    Ok(out)
}
