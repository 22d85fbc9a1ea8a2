//! Weighted ground barycenters of finitely many plane points.
//!
//! The barycenter update step repeatedly minimises
//! `V_q(x) = Σ_i λ_i ‖x − y_i‖^q` over `x ∈ ℝ²` for a small set of target
//! points. `V_q` is strictly convex for `q > 1` (unique minimiser); for
//! `q = 1` it is the weighted geometric-median objective, whose minimiser
//! is unique only under a non-collinearity condition — two-target
//! problems are minimised by every point of the connecting segment.
//!
//! [`ground_barycenter`] is the production solver; [`grid_search_oracle`]
//! is a deliberately naive exhaustive-evaluation reference used to
//! cross-check it, and the two must never share code paths.

use alloc::string::String;
use alloc::vec::Vec;

use crate::diagram::DiagramPoint;
use crate::error::{Error, Result};
use crate::num;

/// A point of the plane the ground problems live in.
///
/// Unlike [`DiagramPoint`] there is no half-plane constraint: targets and
/// iterates may lie anywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        num::norm2(self.x - other.x, self.y - other.y)
    }
}

impl From<DiagramPoint> for Point2 {
    fn from(p: DiagramPoint) -> Self {
        Point2 {
            x: p.birth,
            y: p.death,
        }
    }
}

/// A weighted point set together with the exponent `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundProblem {
    targets: Vec<Point2>,
    weights: Vec<f64>,
    q: f64,
}

impl GroundProblem {
    /// Builds a problem, validating that there is at least one target,
    /// that the weights are strictly positive and sum to one (within
    /// 1e-12), and that `q >= 1`.
    pub fn new(targets: Vec<Point2>, weights: Vec<f64>, q: f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument(String::from(
                "ground problem needs at least one target",
            )));
        }
        if targets.len() != weights.len() {
            return Err(Error::SizeMismatch(String::from(
                "one weight per target required",
            )));
        }
        for t in &targets {
            if !t.x.is_finite() || !t.y.is_finite() {
                return Err(Error::NonFinite(String::from("ground problem target")));
            }
        }
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidWeights(String::from(
                    "weights must be strictly positive",
                )));
            }
            total += w;
        }
        if num::abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidWeights(String::from("weights must sum to 1")));
        }
        if !q.is_finite() || q < 1.0 {
            return Err(Error::InvalidExponent(q));
        }
        Ok(GroundProblem {
            targets,
            weights,
            q,
        })
    }

    pub fn targets(&self) -> &[Point2] {
        &self.targets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Result of a ground-barycenter solve.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSolution {
    /// Best iterate found.
    pub point: Point2,
    /// `V_q` at that point.
    pub value: f64,
    /// Mirrors [`check_uniqueness`]: whether the sufficient uniqueness
    /// condition holds for this problem.
    pub unique: bool,
    /// Iterations spent (0 for closed-form cases).
    pub iterations: usize,
    /// False when the iteration cap was hit before the step tolerance.
    pub converged: bool,
}

/// Evaluates `V_q(x) = Σ_i λ_i ‖x − y_i‖^q`.
pub fn v_q(problem: &GroundProblem, x: &Point2) -> f64 {
    problem.view().value(x)
}

/// Distance from a plane point to the diagonal line `{u = v}`.
pub(crate) fn line_distance(p: &Point2) -> f64 {
    num::abs(p.y - p.x) / core::f64::consts::SQRT_2
}

/// Orthogonal projection of a plane point onto the diagonal line `{u = v}`.
fn line_projection(p: &Point2) -> Point2 {
    let mid = 0.5 * (p.x + p.y);
    Point2 { x: mid, y: mid }
}

/// Internal solver view: point targets plus an optional extra mass
/// attracted to the diagonal line `{u = v}` as a set, minimising
///
/// `G(x) = Σ_i w_i ‖x − y_i‖^q + line_mass · dist(x, {u = v})^q`.
///
/// With `line_mass = 0` this is exactly `V_q`. The non-zero case serves
/// the barycenter update step, where a match that points at the diagonal
/// is free to use the moving point's own projection, so only the distance
/// to the line constrains it — freezing the projection as a point target
/// would make the update merely approach its fixed point geometrically
/// instead of landing on it.
struct MixedView<'a> {
    targets: &'a [Point2],
    weights: &'a [f64],
    line_mass: f64,
    q: f64,
}

impl GroundProblem {
    fn view(&self) -> MixedView<'_> {
        MixedView {
            targets: &self.targets,
            weights: &self.weights,
            line_mass: 0.0,
            q: self.q,
        }
    }
}

impl MixedView<'_> {
    fn value(&self, x: &Point2) -> f64 {
        let q = self.q;
        let mut total: f64 = self
            .targets
            .iter()
            .zip(self.weights)
            .map(|(t, &w)| w * num::pow_q(x.distance(t), q))
            .sum();
        if self.line_mass > 0.0 {
            total += self.line_mass * num::pow_q(line_distance(x), q);
        }
        total
    }

    /// Gradient for `q > 1`; each point term is defined as zero at its
    /// target and the line term as zero on the line, which are the
    /// correct one-sided limits for every `q > 1`.
    fn gradient(&self, x: &Point2) -> Point2 {
        let q = self.q;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (t, &w) in self.targets.iter().zip(self.weights) {
            let dx = x.x - t.x;
            let dy = x.y - t.y;
            let d = num::norm2(dx, dy);
            if d == 0.0 {
                continue;
            }
            let scale = w * q * num::pow_q(d, q) / (d * d);
            gx += scale * dx;
            gy += scale * dy;
        }
        if self.line_mass > 0.0 {
            let d = line_distance(x);
            if d > 0.0 {
                let proj = line_projection(x);
                let scale = self.line_mass * q * num::pow_q(d, q) / (d * d);
                gx += scale * (x.x - proj.x);
                gy += scale * (x.y - proj.y);
            }
        }
        Point2 { x: gx, y: gy }
    }
}

/// Whether the sufficient condition for a unique minimiser holds.
///
/// For `q > 1` the objective is strictly convex, so the answer is always
/// true. For `q = 1` uniqueness is guaranteed when some three targets are
/// affinely independent (non-collinear); with every target on one line —
/// in particular with fewer than three targets — the condition fails and
/// the minimiser may be a whole segment.
pub fn check_uniqueness(problem: &GroundProblem) -> bool {
    if problem.q > 1.0 {
        return true;
    }
    let ts = &problem.targets;
    for i in 0..ts.len() {
        for j in (i + 1)..ts.len() {
            for k in (j + 1)..ts.len() {
                let ux = ts[j].x - ts[i].x;
                let uy = ts[j].y - ts[i].y;
                let vx = ts[k].x - ts[i].x;
                let vy = ts[k].y - ts[i].y;
                if ux * vy - uy * vx != 0.0 {
                    return true;
                }
            }
        }
    }
    false
}

fn weighted_mean(problem: &GroundProblem) -> Point2 {
    let mut x = 0.0;
    let mut y = 0.0;
    for (t, &w) in problem.targets.iter().zip(&problem.weights) {
        x += w * t.x;
        y += w * t.y;
    }
    Point2 { x, y }
}

/// Weighted mean of raw targets whose weights need not sum to one.
fn mean_of_targets(targets: &[Point2], weights: &[f64]) -> Point2 {
    let mut x = 0.0;
    let mut y = 0.0;
    let mut total = 0.0;
    for (t, &w) in targets.iter().zip(weights) {
        x += w * t.x;
        y += w * t.y;
        total += w;
    }
    Point2 {
        x: x / total,
        y: y / total,
    }
}

/// Minimises `V_q` over the plane.
///
/// * `q = 2`: closed-form weighted arithmetic mean, no iteration.
/// * `q > 1, q ≠ 2`: gradient descent from the weighted mean with
///   backtracking (Armijo) line search; stops once a step moves the
///   iterate by at most `tol`.
/// * `q = 1`: Weiszfeld iteration with the standard guard for iterates
///   that land on a target (the step is damped by the target's weight
///   relative to the pull of the remaining targets).
///
/// The returned value never exceeds `V_q` at the initial point; when the
/// iteration cap is reached first, the best iterate is still returned
/// with `converged = false`.
pub fn ground_barycenter(
    problem: &GroundProblem,
    tol: f64,
    max_iters: usize,
) -> Result<GroundSolution> {
    let init = weighted_mean(problem);
    ground_barycenter_from(problem, init, tol, max_iters)
}

/// Same as [`ground_barycenter`] but starts the iterative solvers from
/// `init` instead of the weighted mean.
///
/// Fixed-point loops that repeatedly re-minimise over a slowly changing
/// target set should warm-start from the previous minimiser: when the
/// targets have stabilised, the solver then returns the initial point
/// unchanged instead of re-approaching it from the mean with fresh
/// line-search noise. The closed-form `q = 2` branch ignores `init`.
pub fn ground_barycenter_from(
    problem: &GroundProblem,
    init: Point2,
    tol: f64,
    max_iters: usize,
) -> Result<GroundSolution> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "tolerance must be positive",
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument(String::from(
            "max_iters must be at least 1",
        )));
    }
    if !init.x.is_finite() || !init.y.is_finite() {
        return Err(Error::NonFinite(String::from(
            "initial point must be finite",
        )));
    }
    let unique = check_uniqueness(problem);

    // All targets coincident: that point is optimal for every q.
    let first = problem.targets[0];
    if problem
        .targets
        .iter()
        .all(|t| t.x == first.x && t.y == first.y)
    {
        return Ok(GroundSolution {
            point: first,
            value: 0.0,
            unique,
            iterations: 0,
            converged: true,
        });
    }

    if problem.q == 2.0 {
        let point = weighted_mean(problem);
        let value = v_q(problem, &point);
        return Ok(GroundSolution {
            point,
            value,
            unique,
            iterations: 0,
            converged: true,
        });
    }

    if problem.q == 1.0 {
        return Ok(weiszfeld(&problem.view(), init, tol, max_iters, unique));
    }

    Ok(descend(&problem.view(), init, tol, max_iters, unique))
}

/// Minimises the mixed objective `Σ_i w_i ‖x − y_i‖^q + line_mass ·
/// dist(x, {u = v})^q` — point targets plus a mass attracted to the
/// diagonal line as a set.
///
/// The barycenter update step produces exactly such problems: a match
/// that points at the diagonal always uses the moving point's own
/// projection as its representative, so its cost depends only on the
/// distance to the line. Solving against the line directly lands on the
/// stationary position in one solve.
///
/// `weights` must be strictly positive with at least one target (they
/// need not sum to one); `line_mass` must be non-negative and finite.
/// `init` seeds the iterative solvers; `None` starts from the targets'
/// weighted mean. The closed-form `q = 2` branch ignores `init`; the
/// `unique` field reports the strict-convexity guarantee `q > 1`.
pub(crate) fn ground_barycenter_mixed(
    targets: &[Point2],
    weights: &[f64],
    line_mass: f64,
    q: f64,
    init: Option<Point2>,
    tol: f64,
    max_iters: usize,
) -> Result<GroundSolution> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "mixed ground problem needs at least one target",
        )));
    }
    if targets.len() != weights.len() {
        return Err(Error::SizeMismatch(String::from(
            "one weight per target required",
        )));
    }
    for t in targets {
        if !t.x.is_finite() || !t.y.is_finite() {
            return Err(Error::NonFinite(String::from(
                "mixed ground problem target",
            )));
        }
    }
    for &w in weights {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::InvalidWeights(String::from(
                "weights must be strictly positive",
            )));
        }
    }
    if !line_mass.is_finite() || line_mass < 0.0 {
        return Err(Error::InvalidWeights(String::from(
            "line mass must be non-negative and finite",
        )));
    }
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "tolerance must be positive",
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument(String::from(
            "max_iters must be at least 1",
        )));
    }
    if let Some(p) = &init {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::NonFinite(String::from(
                "initial point must be finite",
            )));
        }
    }
    let view = MixedView {
        targets,
        weights,
        line_mass,
        q,
    };
    let unique = q > 1.0;

    if q == 2.0 {
        // Closed form in the rotated frame: the coordinate along the line
        // is a plain weighted mean (the line mass never pulls along it),
        // while the coordinate across the line is additionally shrunk
        // toward zero by the line mass.
        let mut w_total = 0.0;
        let mut bx = 0.0;
        let mut by = 0.0;
        for (t, &w) in targets.iter().zip(weights) {
            w_total += w;
            bx += w * t.x;
            by += w * t.y;
        }
        let along = (bx + by) / w_total;
        let across = (by - bx) / (w_total + line_mass);
        let point = Point2 {
            x: 0.5 * (along - across),
            y: 0.5 * (along + across),
        };
        let value = view.value(&point);
        return Ok(GroundSolution {
            point,
            value,
            unique,
            iterations: 0,
            converged: true,
        });
    }

    let start = init.unwrap_or_else(|| mean_of_targets(targets, weights));
    if q == 1.0 {
        return Ok(weiszfeld(&view, start, tol, max_iters, unique));
    }
    Ok(descend(&view, start, tol, max_iters, unique))
}

/// Gradient descent with Armijo backtracking from the given start point.
fn descend(
    view: &MixedView<'_>,
    init: Point2,
    tol: f64,
    max_iters: usize,
    unique: bool,
) -> GroundSolution {
    const ARMIJO_C: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-300;
    let mut x = init;
    let mut value = view.value(&x);
    let mut step = 1.0_f64;
    for iter in 1..=max_iters {
        let g = view.gradient(&x);
        let g_sq = g.x * g.x + g.y * g.y;
        if g_sq == 0.0 {
            return GroundSolution {
                point: x,
                value,
                unique,
                iterations: iter,
                converged: true,
            };
        }
        // Backtrack until the Armijo sufficient-decrease test passes.
        let mut t = step;
        let (accepted, new_value) = loop {
            let cand = Point2 {
                x: x.x - t * g.x,
                y: x.y - t * g.y,
            };
            let cand_value = view.value(&cand);
            if cand_value <= value - ARMIJO_C * t * g_sq {
                break (cand, cand_value);
            }
            t *= 0.5;
            if t < MIN_STEP {
                // No admissible step: numerically at the minimum.
                return GroundSolution {
                    point: x,
                    value,
                    unique,
                    iterations: iter,
                    converged: true,
                };
            }
        };
        let moved = num::norm2(accepted.x - x.x, accepted.y - x.y);
        x = accepted;
        value = new_value;
        // Let the next line search start slightly above the accepted step
        // so it can grow back after a cautious stretch.
        step = (t * 2.0).min(1e6);
        if moved <= tol {
            return GroundSolution {
                point: x,
                value,
                unique,
                iterations: iter,
                converged: true,
            };
        }
    }
    GroundSolution {
        point: x,
        value,
        unique,
        iterations: max_iters,
        converged: false,
    }
}

/// Weiszfeld iteration for the weighted geometric median (`q = 1`).
///
/// When an iterate coincides with a target, the classical update is
/// undefined; the step toward the remaining targets is then damped by the
/// coincident target's weight, which is the standard convergent fix. A
/// line mass acts like a target sitting at the iterate's own projection,
/// and counts as coincident when the iterate lies on the line.
fn weiszfeld(
    view: &MixedView<'_>,
    init: Point2,
    tol: f64,
    max_iters: usize,
    unique: bool,
) -> GroundSolution {
    let mut x = init;
    let mut best_value = view.value(&x);
    let mut best_point = x;
    for iter in 1..=max_iters {
        let mut sum_w_over_d = 0.0;
        let mut tx = 0.0;
        let mut ty = 0.0;
        // Pull of the non-coincident attractors and weight of coincident ones.
        let mut rx = 0.0;
        let mut ry = 0.0;
        let mut anchor_weight = 0.0;
        for (t, &w) in view.targets.iter().zip(view.weights) {
            let d = x.distance(t);
            if d == 0.0 {
                anchor_weight += w;
                continue;
            }
            let inv = w / d;
            sum_w_over_d += inv;
            tx += inv * t.x;
            ty += inv * t.y;
            rx += inv * (t.x - x.x);
            ry += inv * (t.y - x.y);
        }
        if view.line_mass > 0.0 {
            let d = line_distance(&x);
            if d == 0.0 {
                anchor_weight += view.line_mass;
            } else {
                let proj = line_projection(&x);
                let inv = view.line_mass / d;
                sum_w_over_d += inv;
                tx += inv * proj.x;
                ty += inv * proj.y;
                rx += inv * (proj.x - x.x);
                ry += inv * (proj.y - x.y);
            }
        }
        if sum_w_over_d == 0.0 {
            // Every attractor coincides with the iterate: optimal.
            return GroundSolution {
                point: x,
                value: 0.0,
                unique,
                iterations: iter,
                converged: true,
            };
        }
        let weiszfeld_point = Point2 {
            x: tx / sum_w_over_d,
            y: ty / sum_w_over_d,
        };
        let next = if anchor_weight == 0.0 {
            weiszfeld_point
        } else {
            let r = num::norm2(rx, ry);
            if r <= anchor_weight {
                // The anchor's weight dominates the pull of the rest:
                // the current iterate is the minimiser.
                return GroundSolution {
                    point: x,
                    value: best_value,
                    unique,
                    iterations: iter,
                    converged: true,
                };
            }
            // Damped step (Vardi–Zhang): blend toward the Weiszfeld point.
            let blend = anchor_weight / r;
            Point2 {
                x: (1.0 - blend) * weiszfeld_point.x + blend * x.x,
                y: (1.0 - blend) * weiszfeld_point.y + blend * x.y,
            }
        };
        let moved = num::norm2(next.x - x.x, next.y - x.y);
        x = next;
        let value = view.value(&x);
        if value < best_value {
            best_value = value;
            best_point = x;
        }
        if moved <= tol {
            return GroundSolution {
                point: best_point,
                value: best_value,
                unique,
                iterations: iter,
                converged: true,
            };
        }
    }
    GroundSolution {
        point: best_point,
        value: best_value,
        unique,
        iterations: max_iters,
        converged: false,
    }
}

/// Exhaustive reference minimiser: evaluates `V_q` on a regular grid of
/// the given resolution covering the targets' bounding box padded by one
/// diameter on every side, and returns the node with the smallest value
/// (first node scanned wins ties; the scan is row-major from the lower
/// left corner).
///
/// This is an oracle for tests: its cost grows quadratically with the
/// padded extent over the resolution.
pub fn grid_search_oracle(problem: &GroundProblem, resolution: f64) -> Result<Point2> {
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "resolution must be positive",
        )));
    }
    let ts = &problem.targets;
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for t in ts {
        min_x = min_x.min(t.x);
        max_x = max_x.max(t.x);
        min_y = min_y.min(t.y);
        max_y = max_y.max(t.y);
    }
    let mut diameter = 0.0_f64;
    for i in 0..ts.len() {
        for j in (i + 1)..ts.len() {
            diameter = diameter.max(ts[i].distance(&ts[j]));
        }
    }
    let x0 = min_x - diameter;
    let y0 = min_y - diameter;
    let nx = (num::floor((max_x + diameter - x0) / resolution) as usize) + 1;
    let ny = (num::floor((max_y + diameter - y0) / resolution) as usize) + 1;
    let mut best = Point2 { x: x0, y: y0 };
    let mut best_value = f64::INFINITY;
    for iy in 0..ny {
        let y = y0 + iy as f64 * resolution;
        for ix in 0..nx {
            let x = x0 + ix as f64 * resolution;
            let p = Point2 { x, y };
            let value = v_q(problem, &p);
            if value < best_value {
                best_value = value;
                best = p;
            }
        }
    }
    Ok(best)
}
