//! Correlation sets of the two-setting rotation scenario and their boundaries.
//!
//! All sets live in the square `[-1, 1]²` of bias pairs `(E1, E2)`:
//!
//! * the quantum set `Q_{J,α}`: overlap `g(E) ≥ γ` with `γ = cos(Jα)`;
//! * the rotation-box set `R_{J,α}`: `½|arcsin E2 − arcsin E1| ≤ Jα`, which
//!   describes the same region;
//! * the classical set `C_{J,α}`: the diagonal `E1 = E2`;
//! * the relaxed sets `Q^ω = (1−ω)Q + ω[-1,1]²` and `C^ε = {|E1 − E2| ≤ 2ε}`.
//!
//! Whenever `|Jα| ≥ π/2` every set is the full square.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::types::{check_failure_probability, Correlation, ScenarioParams};

/// Default slack for membership tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Absorbs the last-bit error of `|E1 − E2|` against `2ε`.
const COMPARISON_SLACK: f64 = 1e-12;

/// Smallest overlap `|⟨φ|U_α|φ⟩|` over all states with spin at most `J`.
pub fn overlap_gamma(params: ScenarioParams) -> f64 {
    let x = params.j_alpha().abs();
    if x < FRAC_PI_2 {
        x.cos()
    } else {
        0.0
    }
}

/// `g(E1, E2) = ½(√(1+E1)√(1+E2) + √(1−E1)√(1−E2))`, the largest fidelity of
/// two pure states that a two-outcome measurement can map onto `(E1, E2)`.
pub fn overlap_g(e: Correlation) -> f64 {
    let (a, b) = (e.e1(), e.e2());
    0.5 * (((1.0 + a) * (1.0 + b)).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt())
}

/// Half the arcsine gap `½|arcsin E2 − arcsin E1|`.
pub fn rotation_box_gap(e: Correlation) -> f64 {
    0.5 * (e.e2().asin() - e.e1().asin()).abs()
}

pub fn in_quantum_set(e: Correlation, params: ScenarioParams, tol: f64) -> bool {
    params.distinguishable() || overlap_g(e) >= overlap_gamma(params) - tol
}

pub fn in_classical_set(e: Correlation, params: ScenarioParams, tol: f64) -> bool {
    params.distinguishable() || (e.e1() - e.e2()).abs() <= tol
}

/// Membership in the set of correlations produced by degree-`2J`
/// trigonometric rotation boxes.
pub fn in_rotation_box_set(e: Correlation, params: ScenarioParams, tol: f64) -> bool {
    params.distinguishable() || rotation_box_gap(e) <= params.j_alpha().abs() + tol
}

/// Signed distance of `e` from the complement of `Q^ω_{J,α}`, in units of
/// the half-angle `Jα`; non-negative exactly for members.
///
/// `e` lies in `(1−ω)Q + ω[-1,1]²` iff the box of points `q` with
/// `|e_i − (1−ω)q_i| ≤ ω` meets `Q`. In arcsine coordinates `Q` is the band
/// `|u2 − u1| ≤ 2Jα`, so it suffices to compare the band with the extreme
/// values of `u2 − u1` over the (square-clipped) box.
pub fn relaxed_quantum_margin(e: Correlation, params: ScenarioParams, omega: f64) -> Result<f64> {
    let omega = check_failure_probability("omega", omega)?;
    if params.distinguishable() {
        return Ok(f64::INFINITY);
    }
    let band = 2.0 * params.j_alpha().abs();
    let scale = 1.0 - omega;
    let lo = |x: f64| ((x - omega) / scale).clamp(-1.0, 1.0).asin();
    let hi = |x: f64| ((x + omega) / scale).clamp(-1.0, 1.0).asin();
    let upper = band - (lo(e.e2()) - hi(e.e1()));
    let lower = band + (hi(e.e2()) - lo(e.e1()));
    Ok(0.5 * upper.min(lower))
}

/// Membership in `Q^ω_{J,α} = (1−ω)Q_{J,α} + ω[-1,1]²`.
pub fn in_relaxed_quantum_set(e: Correlation, params: ScenarioParams, omega: f64, tol: f64) -> Result<bool> {
    Ok(relaxed_quantum_margin(e, params, omega)? >= -tol)
}

/// Membership in `C^ε_{J,α}`: `|E1 − E2| ≤ 2ε` unless `|Jα| ≥ π/2`.
pub fn in_relaxed_classical_set(e: Correlation, params: ScenarioParams, epsilon: f64) -> Result<bool> {
    let epsilon = check_failure_probability("epsilon", epsilon)?;
    Ok(params.distinguishable() || (e.e1() - e.e2()).abs() <= 2.0 * epsilon + COMPARISON_SLACK)
}

/// Which of the two curved boundary arcs of `Q_{J,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `c1`, the arc below the diagonal (`E1 ≥ E2`), `τ ∈ [0, π/(2J) − α]`.
    Lower,
    /// `c2`, the arc above the diagonal (`E2 ≥ E1`), `τ ∈ [α, π/(2J)]`.
    Upper,
}

fn require_curved(params: ScenarioParams) -> Result<()> {
    let x = params.j_alpha();
    if x > 0.0 && x < FRAC_PI_2 {
        Ok(())
    } else {
        Err(domain("J·alpha", x, "(0, π/2)"))
    }
}

/// Parameter interval of the requested arc.
pub fn boundary_interval(params: ScenarioParams, branch: Branch) -> Result<(f64, f64)> {
    require_curved(params)?;
    let j = params.j.value();
    let a = params.alpha.radians();
    Ok(match branch {
        Branch::Lower => (0.0, FRAC_PI_2 / j - a),
        Branch::Upper => (a, FRAC_PI_2 / j),
    })
}

pub(crate) fn clamp_tau(params: ScenarioParams, branch: Branch, tau: f64) -> Result<f64> {
    let (lo, hi) = boundary_interval(params, branch)?;
    let slack = 1e-12 * hi.abs().max(1.0);
    if !tau.is_finite() || tau < lo - slack || tau > hi + slack {
        return Err(domain(
            "tau",
            tau,
            match branch {
                Branch::Lower => "[0, π/(2J) − α]",
                Branch::Upper => "[α, π/(2J)]",
            },
        ));
    }
    Ok(tau.clamp(lo, hi))
}

/// Point `c1(τ)`: probabilities `(cos²(Jτ), cos²(J(τ+α)))`.
pub fn boundary_curve_c1(params: ScenarioParams, tau: f64) -> Result<Correlation> {
    let tau = clamp_tau(params, Branch::Lower, tau)?;
    let two_j = f64::from(params.j.two_j());
    // 2cos²θ − 1 = cos 2θ keeps full precision near the corners.
    Correlation::new_clamped((two_j * tau).cos(), (two_j * (tau + params.alpha.radians())).cos(), 0.0)
}

/// Point `c2(τ)`: probabilities `(cos²(Jτ), cos²(J(τ−α)))`.
pub fn boundary_curve_c2(params: ScenarioParams, tau: f64) -> Result<Correlation> {
    let tau = clamp_tau(params, Branch::Upper, tau)?;
    let two_j = f64::from(params.j.two_j());
    Correlation::new_clamped((two_j * tau).cos(), (two_j * (tau - params.alpha.radians())).cos(), 0.0)
}

pub fn boundary_curve(params: ScenarioParams, branch: Branch, tau: f64) -> Result<Correlation> {
    match branch {
        Branch::Lower => boundary_curve_c1(params, tau),
        Branch::Upper => boundary_curve_c2(params, tau),
    }
}

/// `n ≥ 2` points of an arc at evenly spaced `τ`, endpoints included.
pub fn boundary_grid(params: ScenarioParams, branch: Branch, n: usize) -> Result<Vec<Correlation>> {
    let (lo, hi) = boundary_interval(params, branch)?;
    if n < 2 {
        return Err(domain("boundary grid size", n as f64, "n ≥ 2"));
    }
    (0..n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            boundary_curve(params, branch, t)
        })
        .collect()
}
