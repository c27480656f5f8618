//! Certified randomness `H*` and its robustness bounds.
//!
//! `H*(E)` is the smallest average entropy `Σ p(λ) H(E^λ)` over ensembles
//! whose mean is `E`, where a fraction at least `1 − ε` of the weight sits in
//! `Q^ω_{J,α}` and the rest is unconstrained. `H` is concave, so only extreme
//! points matter: arc points of `Q` mixed with the corners of the square, and
//! the four deterministic corners for the unconstrained part. Discretizing the
//! arcs turns the problem into a small linear program whose value is the
//! lower convex envelope of `H` on the candidate set.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::lp::{solve, LinearProgram, LpOutcome};
use crate::sets::{boundary_grid, in_relaxed_quantum_set, overlap_gamma, Branch, DEFAULT_TOL};
use crate::types::{check_failure_probability, Angle, Correlation, ErrorBudget, ScenarioParams};

/// Smallest accepted number of points per arc.
pub const MIN_GRID: usize = 16;

const WEIGHT_FLOOR: f64 = 1e-12;

fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// `H(E) = ½ Σ_x h((1 + E_x)/2)` in bits.
pub fn entropy_h(e: Correlation) -> f64 {
    let (p1, p2) = e.probabilities();
    0.5 * (binary_entropy(p1) + binary_entropy(p2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub weight: f64,
    pub correlation: Correlation,
    /// `true` for the unconstrained part of weight at most `ε`.
    pub free: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub entries: Vec<EnsembleEntry>,
}

impl Ensemble {
    pub fn mean(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((0.0, 0.0), |(a, b), e| (a + e.weight * e.correlation.e1(), b + e.weight * e.correlation.e2()))
    }

    pub fn average_entropy(&self) -> f64 {
        self.entries.iter().map(|e| e.weight * entropy_h(e.correlation)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    /// Bits of certified randomness; `+∞` when infeasible.
    pub h_star: f64,
    pub ensemble: Ensemble,
    pub grid_resolution: usize,
    pub status: SolveStatus,
    pub candidates: usize,
    pub iterations: usize,
}

/// Extreme points of `Q^ω_{J,α}` on a grid of `grid` points per arc.
pub fn relaxed_extreme_points(params: ScenarioParams, omega: f64, grid: usize) -> Result<Vec<Correlation>> {
    let omega = check_failure_probability("omega", omega)?;
    if grid < MIN_GRID {
        return Err(domain("grid", grid as f64, "grid ≥ 16"));
    }
    if params.distinguishable() {
        return Ok(Correlation::CORNERS.to_vec());
    }
    let params = params.with_alpha(Angle::new(params.alpha.radians().abs())?);
    let mut base = vec![Correlation::CORNERS[0], Correlation::CORNERS[1]];
    if params.j_alpha() > 0.0 {
        base.extend(boundary_grid(params, Branch::Lower, grid)?);
        base.extend(boundary_grid(params, Branch::Upper, grid)?);
    }
    if omega == 0.0 {
        return Ok(base);
    }
    let mut out = Vec::with_capacity(4 * base.len());
    for b in &base {
        for c in &Correlation::CORNERS {
            out.push(Correlation::new_clamped(
                (1.0 - omega) * b.e1() + omega * c.e1(),
                (1.0 - omega) * b.e2() + omega * c.e2(),
                1e-12,
            )?);
        }
    }
    Ok(out)
}

/// Discretized `H*` for the target `e`.
pub fn certify_hstar(
    e: Correlation,
    params: ScenarioParams,
    budget: ErrorBudget,
    grid: usize,
) -> Result<CertificationResult> {
    let mut points = relaxed_extreme_points(params, budget.omega(), grid)?;
    if in_relaxed_quantum_set(e, params, budget.omega(), DEFAULT_TOL)? {
        points.push(e);
    }
    let constrained = points.len();
    let free = if budget.epsilon() > 0.0 { 4 } else { 0 };
    let n = constrained + free + usize::from(free > 0);
    let mut c = Vec::with_capacity(n);
    let mut rows = vec![Vec::with_capacity(n); 3 + usize::from(free > 0)];
    for p in &points {
        c.push(entropy_h(*p));
        rows[0].push(p.e1());
        rows[1].push(p.e2());
        rows[2].push(1.0);
        if free > 0 {
            rows[3].push(0.0);
        }
    }
    let mut b = vec![e.e1(), e.e2(), 1.0];
    if free > 0 {
        for corner in &Correlation::CORNERS {
            c.push(0.0);
            rows[0].push(corner.e1());
            rows[1].push(corner.e2());
            rows[2].push(1.0);
            rows[3].push(1.0);
        }
        // slack for Σ free ≤ ε
        c.push(0.0);
        rows[0].push(0.0);
        rows[1].push(0.0);
        rows[2].push(0.0);
        rows[3].push(1.0);
        b.push(budget.epsilon());
    }
    let lp = LinearProgram { c, rows, b };
    match solve(&lp) {
        LpOutcome::Optimal { x, objective, iterations } => {
            let mut entries = Vec::new();
            for (i, &w) in x.iter().enumerate().take(constrained + free) {
                if w > WEIGHT_FLOOR {
                    let (correlation, is_free) = if i < constrained {
                        (points[i], false)
                    } else {
                        (Correlation::CORNERS[i - constrained], true)
                    };
                    entries.push(EnsembleEntry { weight: w, correlation, free: is_free });
                }
            }
            Ok(CertificationResult {
                h_star: objective.max(0.0),
                ensemble: Ensemble { entries },
                grid_resolution: grid,
                status: SolveStatus::Optimal,
                candidates: constrained + free,
                iterations,
            })
        }
        LpOutcome::Infeasible | LpOutcome::Unbounded => Ok(CertificationResult {
            h_star: f64::INFINITY,
            ensemble: Ensemble::default(),
            grid_resolution: grid,
            status: SolveStatus::Infeasible,
            candidates: constrained + free,
            iterations: 0,
        }),
    }
}

/// Angle `α + 2s·cot(Jα)/J` whose error-free set contains `Q^s_{J,α}`.
pub fn shifted_alpha(params: ScenarioParams, shift_budget: f64) -> Result<f64> {
    let x = params.j_alpha();
    if !(x > 0.0 && x < FRAC_PI_2) {
        return Err(domain("J·alpha", x, "(0, π/2)"));
    }
    let a = params.alpha.radians();
    if shift_budget == 0.0 {
        return Ok(a);
    }
    Ok(a + 2.0 * shift_budget / (x.tan() * params.j.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustBound {
    pub value: f64,
    pub shifted_alpha: Option<f64>,
    /// `true` when `Jα ∉ (0, π/2)` (or the error-free value is not finite)
    /// and the bound degenerates to zero.
    pub vacuous: bool,
}

/// Lower bound on `H*_{ε,ω,α}` from the error-free value at a larger angle:
/// `H*_{0,0}(α′) + log₂(1 − ε) − ε·log₂(2/ε)/(1 − ε)`, with
/// `α′ = α + 2(ε + ω)cot(Jα)/J`, clamped at zero.
pub fn hstar_robust_lower_bound(
    params: ScenarioParams,
    budget: ErrorBudget,
    hstar_at: impl Fn(Angle) -> f64,
) -> RobustBound {
    let vacuous = RobustBound { value: 0.0, shifted_alpha: None, vacuous: true };
    let Ok(alpha) = shifted_alpha(params, budget.epsilon() + budget.omega()) else {
        return vacuous;
    };
    let Ok(angle) = Angle::new(alpha) else {
        return vacuous;
    };
    let base = hstar_at(angle);
    if !base.is_finite() {
        return RobustBound { shifted_alpha: Some(alpha), ..vacuous };
    }
    let eps = budget.epsilon();
    let penalty = if eps == 0.0 { 0.0 } else { (1.0 - eps).log2() - eps * (2.0 / eps).log2() / (1.0 - eps) };
    RobustBound { value: (base + penalty).max(0.0), shifted_alpha: Some(alpha), vacuous: false }
}

fn cos_star(t: f64) -> f64 {
    if (0.0..=FRAC_PI_2).contains(&t) {
        t.cos()
    } else {
        0.0
    }
}

/// `(1 − ω)² cos x − cos_*(x + 2ω cot x)` with `cos_*` zero beyond `π/2`.
pub fn arccos_shift_margin(omega: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(domain("omega", omega, "[0, 1]"));
    }
    if !(0.0..=FRAC_PI_2).contains(&x) {
        return Err(domain("x", x, "[0, π/2]"));
    }
    let lhs = (1.0 - omega).powi(2) * x.cos();
    let shifted = if omega == 0.0 { x } else { x + 2.0 * omega / x.tan() };
    Ok(lhs - cos_star(shifted))
}

/// Whether `(1 − ω)² cos x ≥ cos_*(x + 2ω cot x)` holds up to round-off.
pub fn arccos_shift_check(omega: f64, x: f64) -> Result<bool> {
    Ok(arccos_shift_margin(omega, x)? >= -1e-12)
}

/// `tH(E) + (1−t)H(E′) + h(t) − H(tE + (1−t)E′)`, non-negative for all inputs.
pub fn mixing_entropy_slack(t: f64, e: Correlation, f: Correlation) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain("t", t, "[0, 1]"));
    }
    let mix = Correlation::new_clamped(t * e.e1() + (1.0 - t) * f.e1(), t * e.e2() + (1.0 - t) * f.e2(), 1e-12)?;
    Ok(t * entropy_h(e) + (1.0 - t) * entropy_h(f) + binary_entropy(t) - entropy_h(mix))
}

/// Peak probability `w_pk = (1 − γ)/2` of the equivalent max-peak scenario.
pub fn max_peak_equivalent(params: ScenarioParams) -> f64 {
    (1.0 - overlap_gamma(params)) / 2.0
}
