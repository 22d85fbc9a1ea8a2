//! The q-Wasserstein distance between persistence diagrams.
//!
//! `W_q(X, Y)` is the q-th root of the cheapest augmented matching cost
//! between `X` and `Y`, where moving a point costs its Euclidean
//! displacement to the power `q` and pairing two diagonal padding points
//! is free. Larger `q` emphasises the largest single displacement;
//! `q` close to 1 damps the influence of outlying features.

use alloc::string::String;
use alloc::vec::Vec;

use crate::assignment::{build_cost_matrix, solve_assignment};
use crate::diagram::{augment, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::num;

/// A full symmetric matrix of pairwise diagram distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
    pub q: f64,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Total order on diagrams used to pick a canonical evaluation order, so
/// that `wasserstein_distance(x, y)` and `wasserstein_distance(y, x)`
/// run the identical computation and are bitwise equal.
fn canonical_le(x: &PersistenceDiagram, y: &PersistenceDiagram) -> bool {
    if x.len() != y.len() {
        return x.len() < y.len();
    }
    for (px, py) in x.points().iter().zip(y.points()) {
        match px
            .birth
            .total_cmp(&py.birth)
            .then(px.death.total_cmp(&py.death))
        {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    true
}

/// The q-Wasserstein distance between two diagrams.
///
/// Zero exactly when the two diagrams have identical off-diagonal
/// content, symmetric by construction, and satisfies the triangle
/// inequality up to floating-point roundoff.
pub fn wasserstein_distance(x: &PersistenceDiagram, y: &PersistenceDiagram, q: f64) -> Result<f64> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    let (a, b) = if canonical_le(x, y) { (x, y) } else { (y, x) };
    let costs = build_cost_matrix(&augment(a, b), q)?;
    let total = solve_assignment(&costs).total_cost;
    Ok(num::powf(total, 1.0 / q))
}

/// Pairwise distance matrix of an ensemble.
///
/// Entry `(i, j)` is `W_q(diagrams[i], diagrams[j])`; the diagonal is
/// exactly zero and only the upper triangle is computed, then mirrored.
pub fn distance_matrix(diagrams: &[PersistenceDiagram], q: f64) -> Result<DistanceMatrix> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    if diagrams.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "distance matrix of an empty ensemble",
        )));
    }
    let n = diagrams.len();
    let mut entries = alloc::vec![0.0_f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = wasserstein_distance(&diagrams[i], &diagrams[j], q)?;
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        size: n,
        entries,
        q,
    })
}
