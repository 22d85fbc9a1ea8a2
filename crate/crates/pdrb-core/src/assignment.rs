//! Exact minimum-cost bijections between augmented diagrams.
//!
//! The distance between two diagrams reduces, after augmentation, to a
//! square assignment problem. [`solve_assignment`] is a dense
//! shortest-augmenting-path solver with dual potentials (O(K³));
//! [`brute_force_assignment`] enumerates all permutations for small
//! instances and exists solely as an independent cross-check — the two
//! must never be merged.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{AugmentedPair, PointFlag};
use crate::error::{Error, Result};
use crate::num;

/// Largest size accepted by the factorial-time brute-force solver.
pub const BRUTE_FORCE_MAX: usize = 8;

/// A dense square cost matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Builds a matrix from row-major entries, validating shape and that
    /// every entry is finite and non-negative.
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::SizeMismatch(String::from(
                "cost matrix entries must have length size * size",
            )));
        }
        for &e in &entries {
            if !e.is_finite() {
                return Err(Error::NonFinite(String::from("cost matrix")));
            }
            if e < 0.0 {
                return Err(Error::InvalidArgument(String::from(
                    "cost matrix entry is negative",
                )));
            }
        }
        Ok(CostMatrix { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// A bijection between the rows and columns of a [`CostMatrix`] together
/// with its total cost `Σ_i entries(i, permutation[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `permutation[row] = column` matched to that row.
    pub permutation: Vec<usize>,
    pub total_cost: f64,
}

/// Builds the matching cost matrix of an augmented pair.
///
/// Entry `(i, j)` is the Euclidean distance between `left[i]` and
/// `right[j]` raised to the power `q`, except that matching two diagonal
/// padding points is free. The flags decide, never the coordinates, so an
/// explicit zero-persistence input point still pays its distance.
pub fn build_cost_matrix(pair: &AugmentedPair, q: f64) -> Result<CostMatrix> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    let size = pair.size();
    let mut entries = Vec::with_capacity(size * size);
    for (lp, lf) in &pair.left {
        for (rp, rf) in &pair.right {
            let cost = if *lf == PointFlag::Diagonal && *rf == PointFlag::Diagonal {
                0.0
            } else {
                let db = lp.birth - rp.birth;
                let dd = lp.death - rp.death;
                num::pow_q_from_sq(db * db + dd * dd, q)
            };
            entries.push(cost);
        }
    }
    CostMatrix::new(size, entries)
}

/// Solves the square assignment problem exactly.
///
/// Shortest-augmenting-path formulation with row/column potentials,
/// processing rows in index order, so the result is deterministic for a
/// given matrix. The reported cost is recomputed as the direct sum over
/// the returned permutation, not from the potentials.
pub fn solve_assignment(costs: &CostMatrix) -> Assignment {
    let n = costs.size();
    if n == 0 {
        return Assignment {
            permutation: Vec::new(),
            total_cost: 0.0,
        };
    }
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut matched_row = vec![0_usize; n + 1]; // matched_row[col] = row + 1, 0 = free
    let mut way = vec![0_usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0_usize;
        let mut min_to_col = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = costs.at(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_to_col[j] {
                    min_to_col[j] = reduced;
                    way[j] = j0;
                }
                if min_to_col[j] < delta {
                    delta = min_to_col[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to_col[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Walk the augmenting path backwards, flipping matches.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut permutation = vec![0_usize; n];
    for col in 1..=n {
        permutation[matched_row[col] - 1] = col - 1;
    }
    let total_cost = (0..n).map(|i| costs.at(i, permutation[i])).sum();
    Assignment {
        permutation,
        total_cost,
    }
}

/// Enumerates every permutation of a small matrix and returns the best.
///
/// Ties are broken toward the lexicographically smallest permutation by
/// enumerating in lexicographic order and replacing only on strictly
/// smaller cost. Sizes above [`BRUTE_FORCE_MAX`] are rejected.
pub fn brute_force_assignment(costs: &CostMatrix) -> Result<Assignment> {
    let n = costs.size();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            size: n,
            max: BRUTE_FORCE_MAX,
        });
    }
    if n == 0 {
        return Ok(Assignment {
            permutation: Vec::new(),
            total_cost: 0.0,
        });
    }
    let mut best_perm: Option<Vec<usize>> = None;
    let mut best_cost = f64::INFINITY;
    let mut current = vec![0_usize; n];
    let mut used = vec![false; n];
    enumerate(
        costs,
        0,
        0.0,
        &mut current,
        &mut used,
        &mut best_perm,
        &mut best_cost,
    );
    let permutation = best_perm.expect("n >= 1 always yields a permutation");
    let total_cost = (0..n).map(|i| costs.at(i, permutation[i])).sum();
    Ok(Assignment {
        permutation,
        total_cost,
    })
}

fn enumerate(
    costs: &CostMatrix,
    row: usize,
    cost_so_far: f64,
    current: &mut Vec<usize>,
    used: &mut Vec<bool>,
    best_perm: &mut Option<Vec<usize>>,
    best_cost: &mut f64,
) {
    let n = costs.size();
    if row == n {
        if cost_so_far < *best_cost {
            *best_cost = cost_so_far;
            *best_perm = Some(current.clone());
        }
        return;
    }
    for col in 0..n {
        if used[col] {
            continue;
        }
        used[col] = true;
        current[row] = col;
        enumerate(
            costs,
            row + 1,
            cost_so_far + costs.at(row, col),
            current,
            used,
            best_perm,
            best_cost,
        );
        used[col] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{augment, PersistenceDiagram};

    #[test]
    fn cost_matrix_of_single_point_pair() {
        let x = PersistenceDiagram::from_pairs(&[(0.0, 2.0)]).unwrap();
        let y = PersistenceDiagram::from_pairs(&[(0.0, 4.0)]).unwrap();
        let costs = build_cost_matrix(&augment(&x, &y), 2.0).unwrap();
        assert_eq!(costs.entries(), &[4.0, 2.0, 8.0, 0.0]);
    }

    #[test]
    fn cost_matrix_against_empty_diagram() {
        let x = PersistenceDiagram::empty();
        let y = PersistenceDiagram::from_pairs(&[(0.0, 4.0)]).unwrap();
        let costs = build_cost_matrix(&augment(&x, &y), 2.0).unwrap();
        assert_eq!(costs.entries(), &[8.0]);
    }

    #[test]
    fn cost_matrix_rejects_bad_exponent() {
        let pair = augment(&PersistenceDiagram::empty(), &PersistenceDiagram::empty());
        assert!(matches!(
            build_cost_matrix(&pair, 0.5),
            Err(Error::InvalidExponent(_))
        ));
        assert!(matches!(
            build_cost_matrix(&pair, f64::NAN),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn solver_matches_known_optimum() {
        let x = PersistenceDiagram::from_pairs(&[(0.0, 2.0)]).unwrap();
        let y = PersistenceDiagram::from_pairs(&[(0.0, 4.0)]).unwrap();
        let costs = build_cost_matrix(&augment(&x, &y), 2.0).unwrap();
        let solved = solve_assignment(&costs);
        assert_eq!(solved.permutation, vec![0, 1]);
        assert_eq!(solved.total_cost, 4.0);
    }

    #[test]
    fn solver_handles_empty_matrix() {
        let costs = CostMatrix::new(0, Vec::new()).unwrap();
        let solved = solve_assignment(&costs);
        assert!(solved.permutation.is_empty());
        assert_eq!(solved.total_cost, 0.0);
    }

    #[test]
    fn solver_picks_cross_match_when_cheaper() {
        // Direct matches cost 10 each; crossing costs 1 each.
        let costs = CostMatrix::new(2, vec![10.0, 1.0, 1.0, 10.0]).unwrap();
        let solved = solve_assignment(&costs);
        assert_eq!(solved.permutation, vec![1, 0]);
        assert_eq!(solved.total_cost, 2.0);
    }

    #[test]
    fn brute_force_ties_break_lexicographically() {
        let costs = CostMatrix::new(3, vec![1.0; 9]).unwrap();
        let solved = brute_force_assignment(&costs).unwrap();
        assert_eq!(solved.permutation, vec![0, 1, 2]);
        assert_eq!(solved.total_cost, 3.0);
    }

    #[test]
    fn brute_force_rejects_large_matrices() {
        let costs = CostMatrix::new(9, vec![0.0; 81]).unwrap();
        assert!(matches!(
            brute_force_assignment(&costs),
            Err(Error::TooLarge {
                size: 9,
                max: BRUTE_FORCE_MAX
            })
        ));
    }

    #[test]
    fn solver_agrees_with_brute_force_on_fixed_matrix() {
        let costs = CostMatrix::new(
            4,
            vec![
                7.0, 5.0, 9.0, 8.0, //
                6.0, 4.0, 3.0, 7.0, //
                5.0, 8.0, 1.0, 8.0, //
                7.0, 6.0, 9.0, 4.0,
            ],
        )
        .unwrap();
        let fast = solve_assignment(&costs);
        let slow = brute_force_assignment(&costs).unwrap();
        // Two optima share this cost; the solvers may break the tie
        // differently, but the cost must agree exactly.
        assert_eq!(fast.total_cost, 16.0);
        assert_eq!(slow.total_cost, 16.0);
        let mut seen = vec![false; 4];
        for &col in &fast.permutation {
            assert!(!seen[col]);
            seen[col] = true;
        }
    }
}
