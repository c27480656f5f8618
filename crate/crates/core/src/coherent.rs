//! Coherent states truncated at `N` photons as an example of a spin bound
//! that holds only approximately.
//!
//! The tail weight `η` beyond `N` puts the truncated state within trace
//! distance `κ = √η` of the true one, which moves each bias by at most `2κ`.
//! The resulting correlations stay inside the relaxed set `Q^δ` with
//! `δ = 2(κ + √(κ(1−κ)) tan(Jα))`, which is checked numerically here.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sets::{boundary_grid, relaxed_quantum_margin, Branch};
use crate::types::{Correlation, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams {
    /// Mean photon number `|β|²`.
    pub beta_abs_sq: f64,
    /// Photon-number cutoff `N`.
    pub n_cut: u32,
}

impl CoherentParams {
    pub fn new(beta_abs_sq: f64, n_cut: u32) -> Result<Self> {
        if !(beta_abs_sq.is_finite() && beta_abs_sq >= 0.0) {
            return Err(domain("|beta|^2", beta_abs_sq, "[0, ∞)"));
        }
        Ok(Self { beta_abs_sq, n_cut })
    }
}

/// `η = P(n > N)` for `n ~ Poisson(|β|²)`.
///
/// Starts from the log of the term next to the split and sums the shorter,
/// cancellation-free side with the recursion `t_{n+1} = t_n·λ/(n+1)`.
pub fn truncation_eta(p: CoherentParams) -> f64 {
    let lambda = p.beta_abs_sq;
    if lambda == 0.0 {
        return 0.0;
    }
    let n = u64::from(p.n_cut);
    let ln_term = |k: u64| -> f64 {
        let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
        -lambda + k as f64 * lambda.ln() - ln_fact
    };
    if (n + 1) as f64 > lambda {
        let mut t = ln_term(n + 1).exp();
        let mut sum = 0.0;
        let mut k = n + 1;
        while t > 0.0 && t > sum * 1e-17 {
            sum += t;
            k += 1;
            t *= lambda / k as f64;
        }
        sum.min(1.0)
    } else {
        let mut t = ln_term(n).exp();
        let mut sum = 0.0;
        let mut k = n;
        loop {
            sum += t;
            if k == 0 || t <= sum * 1e-17 {
                break;
            }
            t *= k as f64 / lambda;
            k -= 1;
        }
        (1.0 - sum).clamp(0.0, 1.0)
    }
}

/// Trace distance `κ = √η` between the coherent state and its truncation.
pub fn kappa_from_eta(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain("eta", eta, "[0, 1]"));
    }
    Ok(eta.sqrt())
}

/// `δ = 2(κ + √(κ(1−κ)) tan(Jα))`.
pub fn delta_inflation(kappa: f64, params: ScenarioParams) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(domain("kappa", kappa, "[0, 1)"));
    }
    let x = params.j_alpha();
    if !(x > 0.0 && x < FRAC_PI_2) {
        return Err(domain("J·alpha", x, "(0, π/2)"));
    }
    Ok(2.0 * (kappa + (kappa * (1.0 - kappa)).sqrt() * x.tan()))
}

/// Largest change `2κ` of a bias under a perturbation of trace distance `κ`,
/// since `|tr(M(ρ − σ))| ≤ D(ρ, σ)` for `0 ≤ M ≤ 1`.
pub fn perturbed_correlation_bound(kappa: f64) -> f64 {
    2.0 * kappa
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub kappa: f64,
    pub delta: f64,
    /// `δ ≥ 1`: `Q^δ` is the whole square and nothing is checked.
    pub saturated: bool,
    pub included: bool,
    /// Smallest [`relaxed_quantum_margin`] over the checked points.
    pub worst_margin: Option<f64>,
    pub worst_point: Option<Correlation>,
    pub points_checked: usize,
}

/// Checks that the `2κ`-inflated boundary of `Q_{J,α}` lies in `Q^δ`.
///
/// For each of `grid` points per arc, the four corners `(E1 ± 2κ, E2 ± 2κ)`,
/// clipped to the square, are tested; this covers the outer points of the
/// error boxes and more.
pub fn error_set_inclusion_check(params: ScenarioParams, kappa: f64, grid: usize) -> Result<InclusionReport> {
    let delta = delta_inflation(kappa, params)?;
    let mut report = InclusionReport {
        kappa,
        delta,
        saturated: delta >= 1.0,
        included: true,
        worst_margin: None,
        worst_point: None,
        points_checked: 0,
    };
    if report.saturated {
        return Ok(report);
    }
    let r = perturbed_correlation_bound(kappa);
    let mut worst = f64::INFINITY;
    for branch in [Branch::Lower, Branch::Upper] {
        for b in boundary_grid(params, branch, grid)? {
            for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let e = Correlation::new_clamped(
                    (b.e1() + s1 * r).clamp(-1.0, 1.0),
                    (b.e2() + s2 * r).clamp(-1.0, 1.0),
                    0.0,
                )?;
                let m = relaxed_quantum_margin(e, params, delta)?;
                report.points_checked += 1;
                if m < worst {
                    worst = m;
                    report.worst_point = Some(e);
                }
            }
        }
    }
    report.worst_margin = Some(worst);
    report.included = worst >= -crate::sets::DEFAULT_TOL;
    Ok(report)
}
