use rayon::prelude::*;

use super::dist2;
use crate::error::{Error, Result};

fn check_sets<P: AsRef<[f64]>>(a: &[P], b: &[P]) -> Result<usize> {
    let dim = a
        .first()
        .map(|p| p.as_ref().len())
        .ok_or(Error::EmptySet)?;
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    for p in a.iter().chain(b) {
        if p.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    Ok(dim)
}

/// `sup_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff<P: AsRef<[f64]> + Sync>(a: &[P], b: &[P]) -> Result<f64> {
    check_sets(a, b)?;
    let worst = a
        .par_iter()
        .map(|p| {
            b.iter()
                .map(|q| dist2(p.as_ref(), q.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff<P: AsRef<[f64]> + Sync>(a: &[P], b: &[P]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}
