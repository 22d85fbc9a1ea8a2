//! Dictionary learning: encode an ensemble as barycentric combinations
//! of a small set of learned atom diagrams.
//!
//! Every input `X_ℓ` is approximated by `reconstruct(D, λ_ℓ)`, the
//! weighted barycenter of the atoms under its coefficient vector, and
//! the encoding energy `Σ_ℓ W_q^q(reconstruct(D, λ_ℓ), X_ℓ)` is driven
//! down by gradient descent on the atom coordinates and on pre-softmax
//! coefficient parameters (the softmax keeps every λ_ℓ on the simplex).
//!
//! Gradients go through the barycenter via a frozen-plan surrogate: at
//! the current iterate all matchings are fixed, each reconstruction
//! point becomes the argmin of a smooth weighted ground objective, and
//! the implicit function theorem turns the argmin's 2x2 Hessian into
//! exact derivatives with respect to atom points and coefficients.
//! [`fd_gradient_check`] validates those derivatives against central
//! finite differences of the same surrogate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::assignment::{build_cost_matrix, solve_assignment};
use crate::barycenter::{compute_barycenter, BarycenterConfig, BarycenterInit};
use crate::diagram::{augment, DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::ground::{ground_barycenter, GroundProblem, Point2};
use crate::metric::wasserstein_distance;
use crate::num;

/// A set of atom diagrams.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Vec<PersistenceDiagram>,
}

impl Dictionary {
    pub fn new(atoms: Vec<PersistenceDiagram>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument(String::from(
                "a dictionary needs at least one atom",
            )));
        }
        Ok(Dictionary { atoms })
    }

    pub fn atoms(&self) -> &[PersistenceDiagram] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A point on the coefficient simplex: non-negative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights(String::from(
                "empty coefficient vector",
            )));
        }
        let mut total = 0.0;
        for &e in &entries {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::InvalidWeights(String::from(
                    "coefficients must be non-negative and finite",
                )));
            }
            total += e;
        }
        if num::abs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidWeights(String::from(
                "coefficients must sum to 1",
            )));
        }
        Ok(CoefficientVector { entries })
    }

    /// Maps an unconstrained parameter vector onto the simplex.
    pub fn from_pre_softmax(w: &[f64]) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights(String::from(
                "empty coefficient vector",
            )));
        }
        Ok(CoefficientVector {
            entries: softmax(w),
        })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

fn softmax(w: &[f64]) -> Vec<f64> {
    let peak = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = w.iter().map(|&x| num::exp(x - peak)).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// Parameters of [`encode`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeConfig {
    /// Metric exponent.
    pub q: f64,
    /// Number of atoms to learn.
    pub m: usize,
    /// Seed for the clustering-based initialisation.
    pub seed: u64,
    /// Epoch cap.
    pub epochs: usize,
    /// Adam learning rate for atom coordinates.
    pub lr_atoms: f64,
    /// Adam learning rate for pre-softmax coefficients.
    pub lr_weights: f64,
    /// Relative energy-change threshold that ends the run.
    pub tol: f64,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            q: 2.0,
            m: 2,
            seed: 0,
            epochs: 200,
            lr_atoms: 1e-2,
            lr_weights: 1e-2,
            tol: 1e-6,
        }
    }
}

/// Outcome of [`encode`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingResult {
    pub dictionary: Dictionary,
    /// One simplex vector per input, aligned with the input order.
    pub coefficients: Vec<CoefficientVector>,
    /// True encoding energy per epoch; entry 0 is the initialisation.
    /// Non-increasing by construction (updates that would raise it are
    /// rescaled or skipped).
    pub energy_trace: Vec<f64>,
    /// Epochs executed.
    pub epochs: usize,
    /// Whether the relative-change criterion stopped the run early.
    pub converged: bool,
}

/// Barycentric reconstruction of one coefficient vector.
///
/// The iteration warm-starts from the dominant atom (lowest index on
/// ties), so a one-hot vector reproduces that atom exactly.
pub fn reconstruct(
    dictionary: &Dictionary,
    coefficients: &CoefficientVector,
    q: f64,
) -> Result<PersistenceDiagram> {
    let lambda = coefficients.entries();
    if lambda.len() != dictionary.len() {
        return Err(Error::SizeMismatch(String::from(
            "one coefficient per atom required",
        )));
    }
    let dominant = (0..lambda.len())
        .max_by(|&a, &b| lambda[a].total_cmp(&lambda[b]).then(b.cmp(&a)))
        .expect("coefficient vectors are non-empty");
    let config = BarycenterConfig {
        q,
        weights: Some(lambda.to_vec()),
        init: BarycenterInit::Index(dominant),
        ..BarycenterConfig::default()
    };
    Ok(compute_barycenter(dictionary.atoms(), &config)?.diagram)
}

/// True encoding energy `Σ_ℓ W_q^q(reconstruct(D, λ_ℓ), X_ℓ)`.
pub fn encoding_energy(
    dictionary: &Dictionary,
    coefficients: &[CoefficientVector],
    inputs: &[PersistenceDiagram],
    q: f64,
) -> Result<f64> {
    if coefficients.len() != inputs.len() {
        return Err(Error::SizeMismatch(String::from(
            "one coefficient vector per input required",
        )));
    }
    let mut energy = 0.0;
    for (lambda, x) in coefficients.iter().zip(inputs) {
        let b = reconstruct(dictionary, lambda, q)?;
        let costs = build_cost_matrix(&augment(&b, x), q)?;
        energy += solve_assignment(&costs).total_cost;
    }
    Ok(energy)
}

/// Inner target of one reconstruction point in a frozen plan: an atom
/// point (followed through perturbations) or a diagonal point frozen as
/// a constant.
#[derive(Debug, Clone, Copy)]
enum InnerTarget {
    AtomPoint(usize),
    Fixed(Point2),
}

/// One reconstruction point's frozen structure: its inner targets (one
/// per atom) and the constant outer target its matched cost is paid to.
#[derive(Debug, Clone)]
struct FrozenPoint {
    /// Exactly one entry per atom: `(atom index, target)`.
    inner: Vec<(usize, InnerTarget)>,
    outer: Point2,
}

#[derive(Debug, Clone)]
struct FrozenPlan {
    points: Vec<FrozenPoint>,
    /// Matching cost of input points claimed by padding; independent of
    /// every parameter.
    constant: f64,
}

/// Distances below this are clamped inside Hessian assembly; for q < 2
/// the curvature terms diverge at coincidence.
const DISTANCE_FLOOR: f64 = 1e-9;

/// Resolves an inner target to a plane point under the current atoms.
fn target_position(target: &InnerTarget, atom: &PersistenceDiagram) -> Point2 {
    match target {
        InnerTarget::AtomPoint(idx) => Point2::from(atom.points()[*idx]),
        InnerTarget::Fixed(p) => *p,
    }
}

/// Gradient and Hessian of the weighted ground objective at `x`. A
/// target closer than the distance floor contributes nothing to the
/// gradient (its own term's gradient vanishes at coincidence for q > 1)
/// and a clamped curvature block.
fn ground_derivatives(
    targets: &[Point2],
    weights: &[f64],
    q: f64,
    x: &Point2,
) -> ((f64, f64), [[f64; 2]; 2]) {
    let mut g = (0.0, 0.0);
    let mut h = [[0.0; 2]; 2];
    for (t, &w) in targets.iter().zip(weights) {
        let r = (x.x - t.x, x.y - t.y);
        let d = num::norm2(r.0, r.1);
        if d >= DISTANCE_FLOOR {
            let scale = w * q * num::pow_q(d, q) / (d * d);
            g.0 += scale * r.0;
            g.1 += scale * r.1;
        }
        let block = curvature_block(w, r, q);
        for (h_row, b_row) in h.iter_mut().zip(&block) {
            h_row[0] += b_row[0];
            h_row[1] += b_row[1];
        }
    }
    (g, h)
}

/// Polishes a ground argmin to near machine precision with damped Newton
/// steps on the gradient.
///
/// The line-search solver compares objective values, so it bottoms out
/// once true decreases drop below f64 rounding — around 1e-8 in position
/// — which is far too coarse for envelope gradients and their
/// finite-difference validation. Newton on the gradient has no such
/// floor: each step is accepted only if it shrinks the gradient norm.
fn newton_refine(targets: &[Point2], weights: &[f64], q: f64, mut x: Point2) -> Point2 {
    let (g0, _) = ground_derivatives(targets, weights, q, &x);
    let mut best = num::norm2(g0.0, g0.1);
    let floor = 1e-13 * (1.0 + best);
    for _ in 0..60 {
        if best <= floor {
            break;
        }
        let (g, h) = ground_derivatives(targets, weights, q, &x);
        let full = solve2(h, g);
        let mut scale = 1.0;
        let mut advanced = false;
        for _ in 0..12 {
            let cand = Point2 {
                x: x.x - scale * full.0,
                y: x.y - scale * full.1,
            };
            let (cg, _) = ground_derivatives(targets, weights, q, &cand);
            let cn = num::norm2(cg.0, cg.1);
            if cn < best {
                x = cand;
                best = cn;
                advanced = true;
                break;
            }
            scale *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    x
}

/// Re-solves one frozen reconstruction point as the argmin of its
/// weighted ground objective, polished for gradient-grade accuracy.
fn surrogate_point(
    point: &FrozenPoint,
    atoms: &[PersistenceDiagram],
    lambda: &[f64],
    q: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Point2> {
    let targets: Vec<Point2> = point
        .inner
        .iter()
        .map(|(j, t)| target_position(t, &atoms[*j]))
        .collect();
    let weights: Vec<f64> = point.inner.iter().map(|(j, _)| lambda[*j]).collect();
    let problem = GroundProblem::new(targets.clone(), weights.clone(), q)?;
    let coarse = ground_barycenter(&problem, tol, max_iters)?.point;
    Ok(newton_refine(&targets, &weights, q, coarse))
}

/// Surrogate energy of one input's frozen plan under given parameters.
fn surrogate_energy(
    plan: &FrozenPlan,
    atoms: &[PersistenceDiagram],
    lambda: &[f64],
    q: f64,
    tol: f64,
    max_iters: usize,
) -> Result<f64> {
    let mut energy = plan.constant;
    for point in &plan.points {
        let x = surrogate_point(point, atoms, lambda, q, tol, max_iters)?;
        energy += num::pow_q(x.distance(&point.outer), q);
    }
    Ok(energy)
}

/// Freezes the reconstruction structure of one input at the current
/// parameters: one optimal plan against each atom fixes every
/// reconstruction point's inner targets, and one optimal plan against
/// the input fixes its outer target.
fn freeze_plan(
    b: &PersistenceDiagram,
    atoms: &[PersistenceDiagram],
    input: &PersistenceDiagram,
    q: f64,
) -> Result<FrozenPlan> {
    let n_points = b.len();
    let mut inner: Vec<Vec<(usize, InnerTarget)>> = vec![Vec::with_capacity(atoms.len()); n_points];
    for (j, atom) in atoms.iter().enumerate() {
        let pair = augment(b, atom);
        let costs = build_cost_matrix(&pair, q)?;
        let plan = solve_assignment(&costs);
        for (r, slot) in inner.iter_mut().enumerate() {
            let col = plan.permutation[r];
            let target = if col < atom.len() {
                InnerTarget::AtomPoint(col)
            } else {
                InnerTarget::Fixed(Point2::from(pair.right[col].0))
            };
            slot.push((j, target));
        }
    }
    let pair = augment(b, input);
    let costs = build_cost_matrix(&pair, q)?;
    let plan = solve_assignment(&costs);
    let mut points = Vec::with_capacity(n_points);
    for (r, inner_targets) in inner.into_iter().enumerate() {
        let outer = Point2::from(pair.right[plan.permutation[r]].0);
        points.push(FrozenPoint {
            inner: inner_targets,
            outer,
        });
    }
    let mut constant = 0.0;
    for row in n_points..pair.size() {
        constant += costs.at(row, plan.permutation[row]);
    }
    Ok(FrozenPlan { points, constant })
}

/// The 2x2 block `λ q [(q-2) d^{q-4} r rᵀ + d^{q-2} I]`; the inner
/// Hessian is the sum of these over targets, and the cross-derivative
/// with respect to a target position is its negation.
fn curvature_block(weight: f64, r: (f64, f64), q: f64) -> [[f64; 2]; 2] {
    let d = num::norm2(r.0, r.1).max(DISTANCE_FLOOR);
    let radial = weight * q * (q - 2.0) * num::pow_q(d, q) / (d * d * d * d);
    let diag = weight * q * num::pow_q(d, q) / (d * d);
    [
        [radial * r.0 * r.0 + diag, radial * r.0 * r.1],
        [radial * r.0 * r.1, radial * r.1 * r.1 + diag],
    ]
}

/// Solves `H s = rhs` for a symmetric 2x2 `H`, with a proportional ridge
/// against near-singular corners.
fn solve2(h: [[f64; 2]; 2], rhs: (f64, f64)) -> (f64, f64) {
    let ridge = 1e-12 * (1.0 + num::abs(h[0][0]) + num::abs(h[1][1]));
    let (a, b, c) = (h[0][0] + ridge, h[0][1], h[1][1] + ridge);
    let det = a * c - b * b;
    ((c * rhs.0 - b * rhs.1) / det, (a * rhs.1 - b * rhs.0) / det)
}

/// Gradient of `‖x - t‖^q` with respect to `x`; zero at coincidence
/// (the magnitude `q d^{q-1}` vanishes there for every q > 1).
fn outer_gradient(x: &Point2, t: &Point2, q: f64) -> (f64, f64) {
    let r = (x.x - t.x, x.y - t.y);
    let d = num::norm2(r.0, r.1);
    if d < DISTANCE_FLOOR {
        return (0.0, 0.0);
    }
    let scale = q * num::pow_q(d, q) / (d * d);
    (scale * r.0, scale * r.1)
}

/// Accumulates the frozen-plan gradients of one input into the flat atom
/// gradient (layout: atom-major, point-major, birth before death) and
/// that input's coefficient gradient `∂E/∂λ`.
fn accumulate_gradients(
    plan: &FrozenPlan,
    atoms: &[PersistenceDiagram],
    lambda: &[f64],
    q: f64,
    tol: f64,
    max_iters: usize,
    atom_offsets: &[usize],
    grad_atoms: &mut [f64],
    grad_lambda: &mut [f64],
) -> Result<()> {
    for point in &plan.points {
        let x = surrogate_point(point, atoms, lambda, q, tol, max_iters)?;
        let g_out = outer_gradient(&x, &point.outer, q);
        if g_out.0 == 0.0 && g_out.1 == 0.0 {
            continue;
        }
        let mut hessian = [[0.0; 2]; 2];
        let mut blocks = Vec::with_capacity(point.inner.len());
        for (j, target) in &point.inner {
            let t = target_position(target, &atoms[*j]);
            let r = (x.x - t.x, x.y - t.y);
            let block = curvature_block(lambda[*j], r, q);
            for (h_row, b_row) in hessian.iter_mut().zip(&block) {
                h_row[0] += b_row[0];
                h_row[1] += b_row[1];
            }
            blocks.push((r, block));
        }
        let s = solve2(hessian, g_out);
        for ((j, target), (r, block)) in point.inner.iter().zip(&blocks) {
            // dE/dλ_j = -u_jᵀ H⁻¹ g_out with u_j = q d^{q-2} r_j.
            let d = num::norm2(r.0, r.1).max(DISTANCE_FLOOR);
            let scale = q * num::pow_q(d, q) / (d * d);
            grad_lambda[*j] -= scale * (r.0 * s.0 + r.1 * s.1);
            // dE/dy_j = M_j H⁻¹ g_out, and M_j is this target's block.
            if let InnerTarget::AtomPoint(idx) = *target {
                let gx = block[0][0] * s.0 + block[0][1] * s.1;
                let gy = block[1][0] * s.0 + block[1][1] * s.1;
                let base = atom_offsets[*j] + 2 * idx;
                grad_atoms[base] += gx;
                grad_atoms[base + 1] += gy;
            }
        }
    }
    Ok(())
}

/// Maximum relative disagreement between the analytic frozen-plan
/// gradient and a central finite difference of the same surrogate.
///
/// `pre_softmax` holds one unconstrained coefficient parameter vector
/// per input (length = atom count); `step` is the differencing step.
/// The error is normalised by the largest analytic component, so a
/// near-critical instance (all gradients tiny) scores small rather than
/// exploding.
pub fn fd_gradient_check(
    dictionary: &Dictionary,
    pre_softmax: &[Vec<f64>],
    inputs: &[PersistenceDiagram],
    q: f64,
    step: f64,
) -> Result<f64> {
    if pre_softmax.len() != inputs.len() {
        return Err(Error::SizeMismatch(String::from(
            "one parameter vector per input required",
        )));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "differencing step must be positive",
        )));
    }
    if !q.is_finite() || q <= 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    for w in pre_softmax {
        if w.len() != dictionary.len() {
            return Err(Error::SizeMismatch(String::from(
                "one parameter per atom required",
            )));
        }
    }
    let tol = 1e-12;
    let iters = 100_000;
    let atoms = dictionary.atoms();
    let atom_offsets = atom_layout(atoms);
    let n_atom_params =
        atom_offsets.last().copied().unwrap_or(0) + atoms.last().map_or(0, |a| 2 * a.len());
    // Freeze one plan per input at the current parameters.
    let mut plans = Vec::with_capacity(inputs.len());
    let mut lambdas = Vec::with_capacity(inputs.len());
    for (w, x) in pre_softmax.iter().zip(inputs) {
        let lambda = softmax(w);
        let b = reconstruct(dictionary, &CoefficientVector::new(lambda.clone())?, q)?;
        plans.push(freeze_plan(&b, atoms, x, q)?);
        lambdas.push(lambda);
    }
    // Analytic gradients.
    let mut grad_atoms = vec![0.0; n_atom_params];
    let mut grad_w = vec![vec![0.0; dictionary.len()]; inputs.len()];
    for ((plan, lambda), g_w) in plans.iter().zip(&lambdas).zip(grad_w.iter_mut()) {
        let mut grad_lambda = vec![0.0; dictionary.len()];
        accumulate_gradients(
            plan,
            atoms,
            lambda,
            q,
            tol,
            iters,
            &atom_offsets,
            &mut grad_atoms,
            &mut grad_lambda,
        )?;
        chain_softmax(&grad_lambda, lambda, g_w);
    }
    // Finite differences of the same surrogate, atom parameters first.
    let total_surrogate = |atoms: &[PersistenceDiagram], ws: &[Vec<f64>]| -> Result<f64> {
        let mut e = 0.0;
        for (plan, w) in plans.iter().zip(ws) {
            e += surrogate_energy(plan, atoms, &softmax(w), q, tol, iters)?;
        }
        Ok(e)
    };
    let mut worst_abs = 0.0_f64;
    let mut largest = 0.0_f64;
    for g in grad_atoms.iter().chain(grad_w.iter().flatten()) {
        largest = largest.max(num::abs(*g));
    }
    let mut flat_atoms = atoms_to_vec(atoms);
    for p in 0..flat_atoms.len() {
        let kept = flat_atoms[p];
        flat_atoms[p] = kept + step;
        let plus = total_surrogate(&vec_to_atoms(&flat_atoms, atoms)?, pre_softmax)?;
        flat_atoms[p] = kept - step;
        let minus = total_surrogate(&vec_to_atoms(&flat_atoms, atoms)?, pre_softmax)?;
        flat_atoms[p] = kept;
        worst_abs = worst_abs.max(num::abs((plus - minus) / (2.0 * step) - grad_atoms[p]));
    }
    let mut ws = pre_softmax.to_vec();
    for l in 0..ws.len() {
        for j in 0..dictionary.len() {
            let kept = ws[l][j];
            ws[l][j] = kept + step;
            let plus = total_surrogate(atoms, &ws)?;
            ws[l][j] = kept - step;
            let minus = total_surrogate(atoms, &ws)?;
            ws[l][j] = kept;
            worst_abs = worst_abs.max(num::abs((plus - minus) / (2.0 * step) - grad_w[l][j]));
        }
    }
    Ok(worst_abs / largest.max(1e-8))
}

/// Pulls a coefficient gradient back through the softmax:
/// `∂E/∂w_k = λ_k (∂E/∂λ_k - Σ_j λ_j ∂E/∂λ_j)`.
fn chain_softmax(grad_lambda: &[f64], lambda: &[f64], out: &mut [f64]) {
    let inner: f64 = grad_lambda.iter().zip(lambda).map(|(g, l)| g * l).sum();
    for ((o, &g), &l) in out.iter_mut().zip(grad_lambda).zip(lambda) {
        *o = l * (g - inner);
    }
}

/// Flat offsets of each atom's first coordinate in the packed layout.
fn atom_layout(atoms: &[PersistenceDiagram]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(atoms.len());
    let mut cursor = 0;
    for atom in atoms {
        offsets.push(cursor);
        cursor += 2 * atom.len();
    }
    offsets
}

fn atoms_to_vec(atoms: &[PersistenceDiagram]) -> Vec<f64> {
    let mut flat = Vec::new();
    for atom in atoms {
        for p in atom.points() {
            flat.push(p.birth);
            flat.push(p.death);
        }
    }
    flat
}

/// Rebuilds atom diagrams from the packed layout, folding any point that
/// crossed the diagonal back onto it.
fn vec_to_atoms(flat: &[f64], template: &[PersistenceDiagram]) -> Result<Vec<PersistenceDiagram>> {
    let mut atoms = Vec::with_capacity(template.len());
    let mut cursor = 0;
    for atom in template {
        let mut points = Vec::with_capacity(atom.len());
        for _ in 0..atom.len() {
            let (b, d) = (flat[cursor], flat[cursor + 1]);
            cursor += 2;
            if b <= d {
                points.push(DiagramPoint { birth: b, death: d });
            } else {
                let mid = 0.5 * (b + d);
                points.push(DiagramPoint {
                    birth: mid,
                    death: mid,
                });
            }
        }
        atoms.push(PersistenceDiagram::new(points)?);
    }
    Ok(atoms)
}

struct Adam {
    first: Vec<f64>,
    second: Vec<f64>,
    steps: i32,
    lr: f64,
}

impl Adam {
    fn new(size: usize, lr: f64) -> Self {
        Adam {
            first: vec![0.0; size],
            second: vec![0.0; size],
            steps: 0,
            lr,
        }
    }

    /// Folds a gradient into the moments and returns the descent
    /// direction to subtract (already scaled by the learning rate).
    fn direction(&mut self, grad: &[f64]) -> Vec<f64> {
        const BETA1: f64 = 0.9;
        const BETA2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.steps += 1;
        let bias1 = 1.0 - num::powf(BETA1, self.steps as f64);
        let bias2 = 1.0 - num::powf(BETA2, self.steps as f64);
        let mut dir = Vec::with_capacity(grad.len());
        for ((m, v), &g) in self.first.iter_mut().zip(&mut self.second).zip(grad) {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            dir.push(self.lr * (*m / bias1) / (num::sqrt(*v / bias2) + EPS));
        }
        dir
    }
}

/// Learns a dictionary and coefficients for an ensemble.
///
/// Atoms start from a k-means clustering of the inputs and coefficients
/// from a softmax over negative distances to those atoms. Each epoch
/// freezes the current reconstruction plans, takes one Adam step on the
/// analytic surrogate gradients, and accepts the step only if the true
/// encoding energy does not increase — otherwise the step is halved a
/// few times and finally skipped, which keeps the energy trace
/// non-increasing. The run stops early once the relative energy change
/// drops below `tol`.
pub fn encode(inputs: &[PersistenceDiagram], config: &EncodeConfig) -> Result<EncodingResult> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "encoding an empty ensemble",
        )));
    }
    if config.m == 0 || config.m > inputs.len() {
        return Err(Error::InvalidArgument(String::from(
            "atom count must be between 1 and the ensemble size",
        )));
    }
    if !config.q.is_finite() || config.q <= 1.0 {
        return Err(Error::InvalidExponent(config.q));
    }
    if config.epochs == 0
        || !(config.lr_atoms > 0.0)
        || !(config.lr_weights > 0.0)
        || !(config.tol >= 0.0)
    {
        return Err(Error::InvalidArgument(String::from(
            "epochs, learning rates and tolerance must be positive",
        )));
    }
    let q = config.q;
    let clusters = crate::clustering::kmeans(
        inputs,
        &crate::clustering::KmeansConfig {
            k: config.m,
            q,
            seed: config.seed,
            ..crate::clustering::KmeansConfig::default()
        },
    )?;
    let mut atoms = clusters.centroids;
    // Diffuse initial coefficients: softmax of distances scaled by their
    // mean, so every reconstruction starts as a genuine blend.
    let mut distances = vec![vec![0.0; config.m]; inputs.len()];
    let mut mean = 0.0;
    for (x, row) in inputs.iter().zip(distances.iter_mut()) {
        for (atom, d) in atoms.iter().zip(row.iter_mut()) {
            *d = wasserstein_distance(x, atom, q)?;
            mean += *d;
        }
    }
    mean /= (inputs.len() * config.m) as f64;
    let scale = if mean > 0.0 { mean } else { 1.0 };
    let mut ws: Vec<Vec<f64>> = distances
        .iter()
        .map(|row| row.iter().map(|d| -d / scale).collect())
        .collect();

    let atom_offsets = atom_layout(&atoms);
    let n_atom_params = atoms.iter().map(|a| 2 * a.len()).sum();
    let mut adam_atoms = Adam::new(n_atom_params, config.lr_atoms);
    let mut adam_w = Adam::new(inputs.len() * config.m, config.lr_weights);

    let solver_tol = 1e-11;
    let solver_iters = 100_000;
    let true_energy = |atoms: &[PersistenceDiagram], ws: &[Vec<f64>]| -> Result<f64> {
        let dict = Dictionary::new(atoms.to_vec())?;
        let mut e = 0.0;
        for (w, x) in ws.iter().zip(inputs) {
            let b = reconstruct(&dict, &CoefficientVector::from_pre_softmax(w)?, q)?;
            let costs = build_cost_matrix(&augment(&b, x), q)?;
            e += solve_assignment(&costs).total_cost;
        }
        Ok(e)
    };

    let mut energy = true_energy(&atoms, &ws)?;
    let mut trace = vec![energy];
    let mut epochs = 0;
    let mut converged = false;
    for _ in 0..config.epochs {
        epochs += 1;
        // Freeze plans and accumulate gradients at the current point.
        let dict = Dictionary::new(atoms.clone())?;
        let mut grad_atoms = vec![0.0; n_atom_params];
        let mut grad_w = vec![0.0; inputs.len() * config.m];
        for (l, (w, x)) in ws.iter().zip(inputs).enumerate() {
            let lambda = softmax(w);
            let b = reconstruct(&dict, &CoefficientVector::new(lambda.clone())?, q)?;
            let plan = freeze_plan(&b, &atoms, x, q)?;
            let mut grad_lambda = vec![0.0; config.m];
            accumulate_gradients(
                &plan,
                &atoms,
                &lambda,
                q,
                solver_tol,
                solver_iters,
                &atom_offsets,
                &mut grad_atoms,
                &mut grad_lambda,
            )?;
            chain_softmax(
                &grad_lambda,
                &lambda,
                &mut grad_w[l * config.m..(l + 1) * config.m],
            );
        }
        let dir_atoms = adam_atoms.direction(&grad_atoms);
        let dir_w = adam_w.direction(&grad_w);

        // Accept the largest halving of the step that does not raise the
        // true energy.
        let flat = atoms_to_vec(&atoms);
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..20 {
            let moved: Vec<f64> = flat
                .iter()
                .zip(&dir_atoms)
                .map(|(x, d)| x - scale * d)
                .collect();
            let candidate_atoms = vec_to_atoms(&moved, &atoms)?;
            let mut candidate_ws = ws.clone();
            for (l, row) in candidate_ws.iter_mut().enumerate() {
                for (j, w) in row.iter_mut().enumerate() {
                    *w -= scale * dir_w[l * config.m + j];
                }
            }
            let candidate_energy = true_energy(&candidate_atoms, &candidate_ws)?;
            if candidate_energy <= energy {
                atoms = candidate_atoms;
                ws = candidate_ws;
                energy = candidate_energy;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(energy);
        // A rejected step is skipped, not fatal: the Adam moments decay
        // toward the fresh gradient over the following epochs, so descent
        // can resume in a better direction.
        if accepted && previous - energy < config.tol * previous.max(1e-300) {
            converged = true;
            break;
        }
    }

    let coefficients = ws
        .iter()
        .map(|w| CoefficientVector::from_pre_softmax(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodingResult {
        dictionary: Dictionary::new(atoms)?,
        coefficients,
        energy_trace: trace,
        epochs,
        converged,
    })
}

/// Planar embedding of a three-atom dictionary and its encoded inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarLayout {
    /// Atom positions: first at the origin, second on the positive x
    /// axis, third in the upper half-plane.
    pub atom_positions: [(f64, f64); 3],
    /// One position per input: its coefficients applied to the atoms.
    pub points: Vec<(f64, f64)>,
    /// True when the three pairwise distances violated the triangle
    /// inequality and the third atom was clamped onto the x axis.
    pub clamped: bool,
}

/// Lays out a dictionary of exactly three atoms in the plane so that
/// pairwise Euclidean distances reproduce the pairwise W_q distances,
/// then places every input at the barycentric combination of the atom
/// positions given by its coefficients.
pub fn planar_layout(
    dictionary: &Dictionary,
    coefficients: &[CoefficientVector],
    q: f64,
) -> Result<PlanarLayout> {
    if dictionary.len() != 3 {
        return Err(Error::InvalidArgument(String::from(
            "planar layout requires exactly three atoms",
        )));
    }
    for c in coefficients {
        if c.entries().len() != 3 {
            return Err(Error::SizeMismatch(String::from(
                "one coefficient per atom required",
            )));
        }
    }
    let atoms = dictionary.atoms();
    let d12 = wasserstein_distance(&atoms[0], &atoms[1], q)?;
    let d13 = wasserstein_distance(&atoms[0], &atoms[2], q)?;
    let d23 = wasserstein_distance(&atoms[1], &atoms[2], q)?;
    if d12 <= 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "the first two atoms coincide; the layout frame is degenerate",
        )));
    }
    let x3 = (d12 * d12 + d13 * d13 - d23 * d23) / (2.0 * d12);
    let y3_squared = d13 * d13 - x3 * x3;
    let clamped = y3_squared < 0.0;
    let y3 = num::sqrt(y3_squared.max(0.0));
    let positions = [(0.0, 0.0), (d12, 0.0), (x3, y3)];
    let points = coefficients
        .iter()
        .map(|c| {
            let l = c.entries();
            (
                l[0] * positions[0].0 + l[1] * positions[1].0 + l[2] * positions[2].0,
                l[0] * positions[0].1 + l[1] * positions[1].1 + l[2] * positions[2].1,
            )
        })
        .collect();
    Ok(PlanarLayout {
        atom_positions: positions,
        points,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(pairs).unwrap()
    }

    fn two_atom_dictionary() -> Dictionary {
        Dictionary::new(vec![
            diagram(&[(0.0, 2.0), (1.0, 3.0)]),
            diagram(&[(0.0, 4.0)]),
        ])
        .unwrap()
    }

    #[test]
    fn one_hot_reconstruction_is_exact() {
        let dict = two_atom_dictionary();
        for (j, atom) in dict.atoms().iter().enumerate() {
            let mut entries = vec![0.0; 2];
            entries[j] = 1.0;
            let lambda = CoefficientVector::new(entries).unwrap();
            let b = reconstruct(&dict, &lambda, 2.0).unwrap();
            assert_eq!(b.points(), atom.points());
        }
    }

    #[test]
    fn encoding_energy_of_self_dictionary_is_zero() {
        let inputs = [diagram(&[(0.0, 2.0)]), diagram(&[(1.0, 5.0)])];
        let dict = Dictionary::new(inputs.to_vec()).unwrap();
        let coeffs = [
            CoefficientVector::new(vec![1.0, 0.0]).unwrap(),
            CoefficientVector::new(vec![0.0, 1.0]).unwrap(),
        ];
        let e = encoding_energy(&dict, &coeffs, &inputs, 2.0).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn coefficient_vectors_are_validated() {
        assert!(CoefficientVector::new(vec![]).is_err());
        assert!(CoefficientVector::new(vec![0.5, 0.4]).is_err());
        assert!(CoefficientVector::new(vec![-0.1, 1.1]).is_err());
        let softmaxed = CoefficientVector::from_pre_softmax(&[0.0, 1000.0]).unwrap();
        assert!((softmaxed.entries().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let dict = two_atom_dictionary();
        let inputs = [diagram(&[(0.2, 2.4)]), diagram(&[(0.4, 3.1), (1.0, 2.0)])];
        for q in [1.5, 2.0] {
            let pre = vec![vec![0.3, -0.2], vec![-0.5, 0.4]];
            let err = fd_gradient_check(&dict, &pre, &inputs, q, 1e-5).unwrap();
            assert!(err <= 1e-4, "relative error {err} at q={q}");
        }
    }

    #[test]
    fn encode_drives_energy_down_monotonically() {
        let inputs = [
            diagram(&[(0.0, 2.0)]),
            diagram(&[(0.0, 2.2)]),
            diagram(&[(3.0, 6.0)]),
            diagram(&[(3.0, 6.2)]),
        ];
        let config = EncodeConfig {
            m: 2,
            epochs: 40,
            seed: 1,
            ..EncodeConfig::default()
        };
        let result = encode(&inputs, &config).unwrap();
        for pair in result.energy_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "trace increased: {pair:?}");
        }
        assert!(result.energy_trace.last().unwrap() < result.energy_trace.first().unwrap());
        assert_eq!(result.coefficients.len(), 4);
        assert_eq!(result.dictionary.len(), 2);
    }

    #[test]
    fn encode_validates_inputs() {
        let inputs = [diagram(&[(0.0, 2.0)])];
        assert!(encode(&[], &EncodeConfig::default()).is_err());
        let too_many = EncodeConfig {
            m: 2,
            ..EncodeConfig::default()
        };
        assert!(encode(&inputs, &too_many).is_err());
        let bad_q = EncodeConfig {
            m: 1,
            q: 1.0,
            ..EncodeConfig::default()
        };
        assert!(encode(&inputs, &bad_q).is_err());
    }

    #[test]
    fn layout_of_right_triangle_distances() {
        // Single points far from the diagonal: pairwise distances are the
        // plain Euclidean gaps 3, 4, 5.
        let dict = Dictionary::new(vec![
            diagram(&[(0.0, 100.0)]),
            diagram(&[(3.0, 100.0)]),
            diagram(&[(0.0, 104.0)]),
        ])
        .unwrap();
        let uniform = CoefficientVector::new(vec![1.0 / 3.0; 3]).unwrap();
        let layout = planar_layout(&dict, &[uniform], 2.0).unwrap();
        let [a1, a2, a3] = layout.atom_positions;
        assert!((a1.0).abs() < 1e-9 && (a1.1).abs() < 1e-9);
        assert!((a2.0 - 3.0).abs() < 1e-9 && (a2.1).abs() < 1e-9);
        assert!((a3.0).abs() < 1e-9 && (a3.1 - 4.0).abs() < 1e-9);
        assert!(!layout.clamped);
        let p = layout.points[0];
        assert!((p.0 - 1.0).abs() < 1e-9 && (p.1 - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn layout_reproduces_pairwise_distances() {
        let dict = Dictionary::new(vec![
            diagram(&[(0.0, 100.0)]),
            diagram(&[(3.0, 100.0)]),
            diagram(&[(0.0, 104.0)]),
        ])
        .unwrap();
        let layout = planar_layout(&dict, &[], 2.0).unwrap();
        let [a1, a2, a3] = layout.atom_positions;
        let euclid =
            |p: (f64, f64), r: (f64, f64)| ((p.0 - r.0).powi(2) + (p.1 - r.1).powi(2)).sqrt();
        assert!((euclid(a1, a2) - 3.0).abs() < 1e-9);
        assert!((euclid(a1, a3) - 4.0).abs() < 1e-9);
        assert!((euclid(a2, a3) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn layout_validates_shape() {
        let two = Dictionary::new(vec![diagram(&[(0.0, 1.0)]), diagram(&[(0.0, 2.0)])]).unwrap();
        assert!(planar_layout(&two, &[], 2.0).is_err());
        let coincident = Dictionary::new(vec![
            diagram(&[(0.0, 1.0)]),
            diagram(&[(0.0, 1.0)]),
            diagram(&[(0.0, 2.0)]),
        ])
        .unwrap();
        assert!(planar_layout(&coincident, &[], 2.0).is_err());
    }
}
