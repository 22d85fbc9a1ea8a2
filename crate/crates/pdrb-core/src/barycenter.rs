//! Fréchet means of diagram ensembles under the q-Wasserstein metric.
//!
//! [`compute_barycenter`] alternates two steps from an initial diagram:
//! an assignment step that matches the working barycenter against every
//! ensemble member, and an update step that moves each barycenter point
//! to the weighted ground barycenter of its matched targets. The Fréchet
//! energy `E_F(B) = Σ_i λ_i W_q^q(B, X_i)` never increases along the
//! iteration, and in practice fewer than ten outer iterations suffice.
//!
//! Diagram sizes are not fixed across iterations: an input point matched
//! to diagonal padding spawns a new barycenter point, and a barycenter
//! point matched to diagonal padding in every plan collapses onto the
//! diagonal, where it stays (flagged) until the final pruning removes it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::assignment::{build_cost_matrix, solve_assignment};
use crate::diagram::{
    augment, project_to_diagonal, prune, AugmentedPair, DiagramPoint, FlaggedPoint,
    PersistenceDiagram, PointFlag,
};
use crate::error::{Error, Result};
use crate::ground::{ground_barycenter_mixed, line_distance, Point2};
use crate::num;

/// Choice of the initial barycenter iterate.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BarycenterInit {
    /// Start from the first ensemble member (the default).
    #[default]
    FirstDiagram,
    /// Start from the member at this index.
    Index(usize),
    /// Start from an arbitrary diagram (used for warm starts, e.g. from a
    /// previous clustering centroid).
    Diagram(PersistenceDiagram),
}

/// Parameters of the barycenter iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterConfig {
    /// Metric exponent, `q >= 1`. Values near 1 damp outlier features;
    /// `q = 1` itself is accepted but numerically delicate (the ground
    /// objective loses strict convexity) and off by default in the CLI.
    pub q: f64,
    /// Per-member weights; `None` means uniform. Entries must be
    /// non-negative, finite and sum to one (within 1e-9). Zero-weight
    /// members are skipped entirely.
    pub weights: Option<Vec<f64>>,
    /// Outer iteration cap.
    pub max_outer_iters: usize,
    /// Step tolerance handed to the ground solver.
    pub ground_tol: f64,
    /// Iteration cap for the ground solver.
    pub ground_max_iters: usize,
    /// Persistence threshold applied to the final diagram.
    pub prune_epsilon: f64,
    /// Early-stop threshold: the iteration ends once no point moved
    /// farther than this and no point was spawned or reflagged.
    pub displacement_tol: f64,
    pub init: BarycenterInit,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        BarycenterConfig {
            q: 2.0,
            weights: None,
            max_outer_iters: 10,
            ground_tol: 1e-9,
            ground_max_iters: 10_000,
            prune_epsilon: 0.0,
            displacement_tol: 1e-7,
            init: BarycenterInit::FirstDiagram,
        }
    }
}

/// Outcome of a barycenter computation.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterResult {
    /// The barycenter, pruned of diagonal and near-diagonal points.
    pub diagram: PersistenceDiagram,
    /// Fréchet energy of the iterate: entry `t` is the energy after `t`
    /// update steps, so entry 0 belongs to the initialisation. The
    /// sequence is non-increasing (up to roundoff near 1e-9).
    pub energy_trace: Vec<f64>,
    /// Number of update steps executed.
    pub iterations: usize,
    /// Whether the displacement criterion stopped the iteration before
    /// the cap.
    pub converged: bool,
}

fn validate_weights(weights: &[f64], m: usize, tol: f64) -> Result<()> {
    if weights.len() != m {
        return Err(Error::SizeMismatch(String::from(
            "one weight per ensemble member required",
        )));
    }
    let mut total = 0.0;
    let mut any_positive = false;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeights(String::from(
                "weights must be non-negative and finite",
            )));
        }
        any_positive |= w > 0.0;
        total += w;
    }
    if !any_positive {
        return Err(Error::InvalidWeights(String::from(
            "at least one weight must be positive",
        )));
    }
    if num::abs(total - 1.0) > tol {
        return Err(Error::InvalidWeights(String::from("weights must sum to 1")));
    }
    Ok(())
}

/// Fréchet energy `Σ_i λ_i W_q^q(b, ensemble[i])` of a candidate diagram.
///
/// The q-th powers are the raw optimal matching costs (no root/re-power
/// round trip), so the value of an exact barycenter of two single-point
/// diagrams comes out exactly.
pub fn frechet_energy(
    b: &PersistenceDiagram,
    ensemble: &[PersistenceDiagram],
    weights: &[f64],
    q: f64,
) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "energy of an empty ensemble",
        )));
    }
    validate_weights(weights, ensemble.len(), 1e-9)?;
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    let mut energy = 0.0;
    for (x, &w) in ensemble.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let costs = build_cost_matrix(&augment(b, x), q)?;
        energy += w * solve_assignment(&costs).total_cost;
    }
    Ok(energy)
}

/// Uniform weight vector of length `m`.
pub fn uniform_weights(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

/// Builds the augmented pair between a flagged working diagram and an
/// ensemble member. Reduces to [`augment`] when the working diagram
/// carries no diagonal points: each side is padded with the projections
/// of the other side's entries.
fn flagged_pair(working: &[FlaggedPoint], input: &PersistenceDiagram) -> AugmentedPair {
    let size = working.len() + input.len();
    let mut left = Vec::with_capacity(size);
    let mut right = Vec::with_capacity(size);
    left.extend_from_slice(working);
    for p in input.points() {
        left.push((project_to_diagonal(p), PointFlag::Diagonal));
    }
    for p in input.points() {
        right.push((*p, PointFlag::OffDiagonal));
    }
    for (p, _) in working {
        right.push((project_to_diagonal(p), PointFlag::Diagonal));
    }
    AugmentedPair { left, right }
}

/// Fréchet energy of the flagged working diagram, from fresh optimal
/// plans. Matches [`frechet_energy`] exactly while no working point is
/// flagged diagonal.
fn working_energy(
    working: &[FlaggedPoint],
    ensemble: &[PersistenceDiagram],
    weights: &[f64],
    q: f64,
) -> Result<f64> {
    let mut energy = 0.0;
    for (x, &w) in ensemble.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let costs = build_cost_matrix(&flagged_pair(working, x), q)?;
        energy += w * solve_assignment(&costs).total_cost;
    }
    Ok(energy)
}

/// One matched target of a working point: position, padding flag and the
/// weight of the ensemble member it came from.
type Target = (DiagramPoint, PointFlag, f64);

/// Solves the update subproblem of one working point over its matched
/// targets and returns the candidate position. Off-diagonal matches
/// attract toward their fixed positions; diagonal matches attract toward
/// the diagonal as a set (their recorded position is irrelevant, because
/// the cheapest diagonal representative follows the moving point). The
/// targets' weights sum to one across both kinds.
///
/// With `warm_start` the iterative solvers begin at that point instead of
/// the targets' mean, so re-solving an unchanged problem returns the start
/// itself (up to the solver tolerance) rather than a fresh noisy approach.
fn ground_argmin(
    targets: &[Target],
    q: f64,
    warm_start: Option<Point2>,
    tol: f64,
    max_iters: usize,
) -> Result<Point2> {
    let mut points: Vec<Point2> = Vec::with_capacity(targets.len());
    let mut weights: Vec<f64> = Vec::with_capacity(targets.len());
    let mut line_mass = 0.0;
    for (p, f, w) in targets {
        match f {
            PointFlag::OffDiagonal => {
                points.push(Point2::from(*p));
                weights.push(*w);
            }
            PointFlag::Diagonal => line_mass += *w,
        }
    }
    Ok(ground_barycenter_mixed(&points, &weights, line_mass, q, warm_start, tol, max_iters)?.point)
}

/// The update subproblem's objective at `at`: off-diagonal matches pay
/// their powered distance, diagonal matches pay the powered distance to
/// the diagonal itself.
fn ground_value(targets: &[Target], q: f64, at: &Point2) -> f64 {
    targets
        .iter()
        .map(|(p, f, w)| match f {
            PointFlag::OffDiagonal => w * num::pow_q(at.distance(&Point2::from(*p)), q),
            PointFlag::Diagonal => w * num::pow_q(line_distance(at), q),
        })
        .sum()
}

/// Clamps a plane point into the closed half-plane above the diagonal.
/// The projection can only decrease distances to targets that all lie in
/// that half-plane, so clamping never worsens a candidate.
fn clamp_to_half_plane(p: Point2) -> DiagramPoint {
    if p.x <= p.y {
        DiagramPoint {
            birth: p.x,
            death: p.y,
        }
    } else {
        let mid = 0.5 * (p.x + p.y);
        DiagramPoint {
            birth: mid,
            death: mid,
        }
    }
}

/// Computes the weighted q-Wasserstein barycenter of an ensemble.
///
/// Alternates optimal assignments against every (positive-weight) member
/// with per-point ground-barycenter updates, growing or shrinking the
/// working diagram as points spawn from, or collapse onto, the diagonal.
/// Every candidate move is accepted only if it does not increase its
/// point's matched cost, which makes the reported energy trace
/// non-increasing by construction.
pub fn compute_barycenter(
    ensemble: &[PersistenceDiagram],
    config: &BarycenterConfig,
) -> Result<BarycenterResult> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "barycenter of an empty ensemble",
        )));
    }
    if !config.q.is_finite() || config.q < 1.0 {
        return Err(Error::InvalidExponent(config.q));
    }
    let m = ensemble.len();
    let weights = match &config.weights {
        None => uniform_weights(m),
        Some(w) => {
            validate_weights(w, m, 1e-9)?;
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        }
    };
    let init = match &config.init {
        BarycenterInit::FirstDiagram => &ensemble[0],
        BarycenterInit::Index(i) => ensemble
            .get(*i)
            .ok_or_else(|| Error::InvalidArgument(String::from("init index out of range")))?,
        BarycenterInit::Diagram(d) => d,
    };
    let q = config.q;

    let mut working: Vec<FlaggedPoint> = init
        .points()
        .iter()
        .map(|p| (*p, PointFlag::OffDiagonal))
        .collect();
    let mut trace = vec![working_energy(&working, ensemble, &weights, q)?];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..config.max_outer_iters {
        // Assignment step: match the working diagram against every member.
        let mut targets: Vec<Vec<Target>> = vec![Vec::with_capacity(m); working.len()];
        let mut spawns: Vec<(f64, DiagramPoint)> = Vec::new();
        for (x, &w) in ensemble.iter().zip(&weights) {
            if w == 0.0 {
                continue;
            }
            let pair = flagged_pair(&working, x);
            let costs = build_cost_matrix(&pair, q)?;
            let plan = solve_assignment(&costs);
            for (l, slot) in targets.iter_mut().enumerate() {
                let (p, f) = pair.right[plan.permutation[l]];
                slot.push((p, f, w));
            }
            // An input point claimed by a padding row wants a new
            // barycenter point.
            let mut row_of_col = vec![0_usize; pair.size()];
            for (row, &col) in plan.permutation.iter().enumerate() {
                row_of_col[col] = row;
            }
            for (col, p) in x.points().iter().enumerate() {
                if row_of_col[col] >= working.len() {
                    spawns.push((w, *p));
                }
            }
        }

        // Update step.
        let mut next: Vec<FlaggedPoint> = Vec::with_capacity(working.len() + spawns.len());
        let mut max_displacement = 0.0_f64;
        let mut reflagged = false;
        for ((pos, flag), slot) in working.iter().zip(&targets) {
            let all_diagonal = slot.iter().all(|(_, f, _)| *f == PointFlag::Diagonal);
            let current = Point2::from(*pos);
            match (flag, all_diagonal) {
                (PointFlag::Diagonal, true) => {
                    // Already free of charge; stay put.
                    next.push((*pos, PointFlag::Diagonal));
                }
                (PointFlag::Diagonal, false) => {
                    // Revive only if some off-diagonal position beats
                    // staying; on the diagonal the point pays for its
                    // off-diagonal matches alone.
                    let candidate =
                        ground_argmin(slot, q, None, config.ground_tol, config.ground_max_iters)?;
                    let stay_cost = ground_value(slot, q, &current);
                    if ground_value(slot, q, &candidate) < stay_cost {
                        let revived = clamp_to_half_plane(candidate);
                        max_displacement = max_displacement.max(pos.distance(&revived));
                        reflagged = true;
                        next.push((revived, PointFlag::OffDiagonal));
                    } else {
                        next.push((*pos, PointFlag::Diagonal));
                    }
                }
                (PointFlag::OffDiagonal, true) => {
                    // Matched to the diagonal everywhere: every diagonal
                    // position is free of charge, so snap to the nearest.
                    let collapsed = project_to_diagonal(pos);
                    max_displacement = max_displacement.max(pos.distance(&collapsed));
                    reflagged = true;
                    next.push((collapsed, PointFlag::Diagonal));
                }
                (PointFlag::OffDiagonal, false) => {
                    // Warm-start from the current position: once the
                    // matches stabilise the solver returns it unchanged,
                    // so the displacement genuinely reaches zero.
                    let candidate = ground_argmin(
                        slot,
                        q,
                        Some(current),
                        config.ground_tol,
                        config.ground_max_iters,
                    )?;
                    // Keep the old position unless the move pays off
                    // (warm-started solves never lose, so this guards the
                    // diagonal clamp and exact ties).
                    let moved =
                        if ground_value(slot, q, &candidate) <= ground_value(slot, q, &current) {
                            clamp_to_half_plane(candidate)
                        } else {
                            *pos
                        };
                    max_displacement = max_displacement.max(pos.distance(&moved));
                    next.push((moved, PointFlag::OffDiagonal));
                }
            }
        }
        let spawned = !spawns.is_empty();
        for (w, y) in spawns {
            let proj = project_to_diagonal(&y);
            let point = if w >= 1.0 - 1e-12 {
                y
            } else {
                let slot = [
                    (y, PointFlag::OffDiagonal, w),
                    (proj, PointFlag::Diagonal, 1.0 - w),
                ];
                let candidate =
                    ground_argmin(&slot, q, None, config.ground_tol, config.ground_max_iters)?;
                // Never spawn worse than the diagonal itself.
                if ground_value(&slot, q, &candidate) <= ground_value(&slot, q, &Point2::from(proj))
                {
                    clamp_to_half_plane(candidate)
                } else {
                    proj
                }
            };
            next.push((point, PointFlag::OffDiagonal));
        }

        working = next;
        iterations += 1;
        trace.push(working_energy(&working, ensemble, &weights, q)?);
        if !spawned && !reflagged && max_displacement <= config.displacement_tol {
            converged = true;
            break;
        }
    }

    let survivors: Vec<DiagramPoint> = working
        .iter()
        .filter(|(_, f)| *f == PointFlag::OffDiagonal)
        .map(|(p, _)| *p)
        .collect();
    let diagram = prune(&PersistenceDiagram::new(survivors)?, config.prune_epsilon)?;
    Ok(BarycenterResult {
        diagram,
        energy_trace: trace,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(pairs).unwrap()
    }

    #[test]
    fn energy_of_midpoint_candidate() {
        let b = diagram(&[(0.0, 3.0)]);
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])];
        let e = frechet_energy(&b, &ensemble, &[0.5, 0.5], 2.0).unwrap();
        assert_eq!(e, 1.0);
    }

    #[test]
    fn energy_of_empty_candidate() {
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])];
        let e = frechet_energy(&PersistenceDiagram::empty(), &ensemble, &[0.5, 0.5], 2.0).unwrap();
        assert_eq!(e, 5.0);
    }

    #[test]
    fn energy_validates_inputs() {
        let ensemble = [diagram(&[(0.0, 2.0)])];
        assert!(frechet_energy(&PersistenceDiagram::empty(), &[], &[], 2.0).is_err());
        assert!(frechet_energy(&PersistenceDiagram::empty(), &ensemble, &[0.7], 2.0).is_err());
        assert!(frechet_energy(&PersistenceDiagram::empty(), &ensemble, &[1.0], 0.5).is_err());
    }

    #[test]
    fn barycenter_of_two_single_point_diagrams() {
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])];
        let result = compute_barycenter(&ensemble, &BarycenterConfig::default()).unwrap();
        assert_eq!(result.diagram.len(), 1);
        let p = result.diagram.points()[0];
        assert!((p.birth - 0.0).abs() < 1e-9 && (p.death - 3.0).abs() < 1e-9);
        let energy = result.energy_trace.last().unwrap();
        assert!((energy - 1.0).abs() < 1e-9);
        assert!(result.converged);
    }

    #[test]
    fn barycenter_of_single_member_is_that_member() {
        let x = diagram(&[(0.0, 2.0), (1.0, 3.0)]);
        let result =
            compute_barycenter(core::slice::from_ref(&x), &BarycenterConfig::default()).unwrap();
        assert_eq!(result.diagram.points(), x.points());
        assert_eq!(*result.energy_trace.last().unwrap(), 0.0);
    }

    #[test]
    fn trace_is_non_increasing() {
        let ensemble = [
            diagram(&[(0.0, 2.0), (1.0, 4.0)]),
            diagram(&[(0.5, 1.5)]),
            diagram(&[(0.0, 3.0), (2.0, 2.5), (0.2, 0.9)]),
        ];
        for q in [1.2, 1.5, 2.0] {
            let config = BarycenterConfig {
                q,
                ..BarycenterConfig::default()
            };
            let result = compute_barycenter(&ensemble, &config).unwrap();
            for pair in result.energy_trace.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "trace increased at q={q}: {pair:?}"
                );
            }
        }
    }

    #[test]
    fn intermediate_exponent_lands_between_the_pair() {
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])];
        let config = BarycenterConfig {
            q: 1.5,
            ..BarycenterConfig::default()
        };
        let result = compute_barycenter(&ensemble, &config).unwrap();
        assert_eq!(result.diagram.len(), 1);
        let p = result.diagram.points()[0];
        // The objective is symmetric in the two targets: the midpoint wins.
        assert!((p.birth).abs() < 1e-6 && (p.death - 3.0).abs() < 1e-6);
        let reference =
            frechet_energy(&diagram(&[(0.0, 3.0)]), &ensemble, &[0.5, 0.5], 1.5).unwrap();
        assert!(*result.energy_trace.last().unwrap() <= reference + 1e-9);
    }

    #[test]
    fn zero_weight_members_are_ignored() {
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(5.0, 9.0)])];
        let config = BarycenterConfig {
            weights: Some(vec![1.0, 0.0]),
            init: BarycenterInit::Index(0),
            ..BarycenterConfig::default()
        };
        let result = compute_barycenter(&ensemble, &config).unwrap();
        assert_eq!(result.diagram.points(), ensemble[0].points());
    }

    #[test]
    fn one_hot_weight_reproduces_that_member_from_elsewhere() {
        // Started at member 0 but weighted entirely toward member 1, the
        // iteration must walk over to member 1.
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(1.0, 5.0), (0.0, 1.0)])];
        let config = BarycenterConfig {
            weights: Some(vec![0.0, 1.0]),
            ..BarycenterConfig::default()
        };
        let result = compute_barycenter(&ensemble, &config).unwrap();
        let e = frechet_energy(&result.diagram, &ensemble, &[0.0, 1.0], 2.0).unwrap();
        assert!(e < 1e-18, "energy {e}");
    }

    /// Classical arithmetic-mean update at q = 2, written independently of
    /// the production ground solver: the new position is the fixed point of
    /// `x <- (Σ λ_i y_i + Λ π(x)) / (W + Λ)`, where the off-diagonal matches
    /// contribute their fixed positions and every diagonal match contributes
    /// the projection of the *moving* point. The map is a contraction with
    /// ratio Λ/(W+Λ), so plain iteration converges geometrically.
    fn arithmetic_mean_update(slot: &[Target]) -> Point2 {
        let mut sum = Point2 { x: 0.0, y: 0.0 };
        let mut w_off = 0.0;
        let mut line = 0.0;
        for (p, f, w) in slot {
            match f {
                PointFlag::OffDiagonal => {
                    sum.x += w * p.birth;
                    sum.y += w * p.death;
                    w_off += w;
                }
                PointFlag::Diagonal => line += w,
            }
        }
        if w_off == 0.0 {
            // All matches diagonal: any diagonal point is optimal; the
            // production loop snaps to the current projection instead of
            // solving, so this case is not cross-checked here.
            unreachable!("cross-check slots always carry an off-diagonal match");
        }
        let mut x = Point2 {
            x: sum.x / w_off,
            y: sum.y / w_off,
        };
        for _ in 0..200 {
            let mid = 0.5 * (x.x + x.y);
            x = Point2 {
                x: (sum.x + line * mid) / (w_off + line),
                y: (sum.y + line * mid) / (w_off + line),
            };
        }
        x
    }

    #[test]
    fn update_step_matches_arithmetic_mean_at_q2() {
        // Mismatched cardinalities force diagonal matches, so both the
        // pure-mean case and the diagonally-attracted case occur.
        let working = [
            (
                DiagramPoint {
                    birth: 0.0,
                    death: 6.0,
                },
                PointFlag::OffDiagonal,
            ),
            (
                DiagramPoint {
                    birth: 2.0,
                    death: 4.1,
                },
                PointFlag::OffDiagonal,
            ),
            (
                DiagramPoint {
                    birth: 0.3,
                    death: 1.0,
                },
                PointFlag::OffDiagonal,
            ),
        ];
        let ensemble = [
            diagram(&[(0.0, 6.2), (2.1, 3.9)]),
            diagram(&[(0.1, 5.8)]),
            diagram(&[(0.0, 6.0), (1.9, 4.0), (0.2, 0.8)]),
        ];
        let weights = [0.5, 0.2, 0.3];

        let mut slots: Vec<Vec<Target>> = vec![Vec::new(); working.len()];
        for (x, &w) in ensemble.iter().zip(&weights) {
            let pair = flagged_pair(&working, x);
            let costs = build_cost_matrix(&pair, 2.0).unwrap();
            let plan = solve_assignment(&costs);
            for (l, slot) in slots.iter_mut().enumerate() {
                let (p, f) = pair.right[plan.permutation[l]];
                slot.push((p, f, w));
            }
        }

        let mut saw_diagonal_match = false;
        for slot in &slots {
            assert!(slot.iter().any(|(_, f, _)| *f == PointFlag::OffDiagonal));
            saw_diagonal_match |= slot.iter().any(|(_, f, _)| *f == PointFlag::Diagonal);
            let solver = ground_argmin(slot, 2.0, None, 1e-12, 10_000).unwrap();
            let mean = arithmetic_mean_update(slot);
            assert!(
                (solver.x - mean.x).abs() <= 1e-8 && (solver.y - mean.y).abs() <= 1e-8,
                "solver ({}, {}) vs mean update ({}, {})",
                solver.x,
                solver.y,
                mean.x,
                mean.y
            );
        }
        assert!(
            saw_diagonal_match,
            "layout must exercise diagonal attraction"
        );
    }

    #[test]
    fn weights_are_validated() {
        let ensemble = [diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])];
        for bad in [vec![0.5, 0.4], vec![-0.1, 1.1], vec![0.0, 0.0], vec![1.0]] {
            let config = BarycenterConfig {
                weights: Some(bad),
                ..BarycenterConfig::default()
            };
            assert!(compute_barycenter(&ensemble, &config).is_err());
        }
    }

    #[test]
    fn mismatched_sizes_spawn_and_collapse_points() {
        let ensemble = [
            diagram(&[(0.0, 6.0)]),
            diagram(&[(0.0, 6.2), (2.0, 4.0)]),
            diagram(&[(0.1, 5.8), (2.1, 3.9)]),
        ];
        let result = compute_barycenter(&ensemble, &BarycenterConfig::default()).unwrap();
        // The long-lived feature is shared by all three; the short one by
        // two of three, far enough from the diagonal to survive.
        assert_eq!(result.diagram.len(), 2);
        for pair in result.energy_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        assert!(matches!(
            compute_barycenter(&[], &BarycenterConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn barycenter_of_empty_diagrams_is_empty() {
        let ensemble = [PersistenceDiagram::empty(), PersistenceDiagram::empty()];
        let result = compute_barycenter(&ensemble, &BarycenterConfig::default()).unwrap();
        assert!(result.diagram.is_empty());
        assert!(result.converged);
        assert_eq!(result.energy_trace[0], 0.0);
    }
}
