//! Seeded Monte-Carlo suites that test the closed-form claims against
//! independent computations.
//!
//! Work is split into fixed-size chunks, each with its own generator from
//! [`task_rng`]; chunk results are merged in index order, so reports do not
//! depend on the number of threads.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::{bernstein_check, coefficients_from_quantum, sample_valid_box_with};
use crate::certify::{arccos_shift_margin, mixing_entropy_slack, shifted_alpha};
use crate::coherent::error_set_inclusion_check;
use crate::error::Result;
use crate::quantum::{born_probability, random_model, Representation};
use crate::rng::task_rng;
use crate::sets::{in_quantum_set, in_rotation_box_set, overlap_g, overlap_gamma, relaxed_quantum_margin};
use crate::types::{Angle, Correlation, ScenarioParams, SpinBound};

const CHUNK: usize = 1000;
const MAX_LISTED: usize = 10;

/// A correlation claimed to be reachable, checked against `Q_{J,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedPoint {
    pub e1: f64,
    pub e2: f64,
    pub two_j: u32,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Boxes per degree `n = 2J ∈ 1..=max_degree`.
    pub set_equality_samples: usize,
    pub set_equality_alpha_points: usize,
    pub max_degree: u32,
    pub bernstein_samples: usize,
    pub bernstein_grid: usize,
    /// Models per `2J ∈ 0..=max_degree`.
    pub fourier_samples: usize,
    pub fourier_angles: usize,
    pub arccos_grid_side: usize,
    pub concavity_samples: usize,
    pub inclusion_samples: usize,
    pub coherent_grid: usize,
    pub coherent_alpha_points: usize,
    pub coherent_kappas: Vec<f64>,
    pub inject: Option<InjectedPoint>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            set_equality_samples: 2_000,
            set_equality_alpha_points: 50,
            max_degree: 8,
            bernstein_samples: 1_000,
            bernstein_grid: 256,
            fourier_samples: 200,
            fourier_angles: 200,
            arccos_grid_side: 300,
            concavity_samples: 20_000,
            inclusion_samples: 20_000,
            coherent_grid: 201,
            coherent_alpha_points: 19,
            coherent_kappas: vec![1e-4, 1e-3, 5e-3, 1e-2, 2e-2, 5e-2],
            inject: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub what: String,
    pub two_j: Option<u32>,
    pub alpha: Option<f64>,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    /// Smallest slack of the tested inequality; negative means violated.
    pub worst_margin: f64,
    pub violation_count: u64,
    /// The first few violations in sampling order.
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Default)]
struct Tally {
    checks: u64,
    worst: f64,
    count: u64,
    listed: Vec<Violation>,
}

impl Tally {
    fn new() -> Self {
        Self { worst: f64::INFINITY, ..Default::default() }
    }

    /// Records one check with slack `margin`; `failed` decides the verdict.
    fn record(&mut self, margin: f64, failed: bool, violation: impl FnOnce() -> Violation) {
        self.checks += 1;
        self.worst = self.worst.min(margin);
        if failed {
            self.count += 1;
            if self.listed.len() < MAX_LISTED {
                self.listed.push(violation());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.worst = self.worst.min(other.worst);
        self.count += other.count;
        for v in other.listed {
            if self.listed.len() < MAX_LISTED {
                self.listed.push(v);
            }
        }
        self
    }

    fn into_report(self, name: &str) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            passed: self.count == 0,
            checks: self.checks,
            worst_margin: self.worst,
            violation_count: self.count,
            violations: self.listed,
        }
    }
}

/// Runs `work(rng, range)` over `total` items in chunks and merges in order.
fn chunked(
    seed: u64,
    stream: u64,
    total: usize,
    work: impl Fn(&mut ChaCha8Rng, std::ops::Range<usize>) -> Tally + Sync,
) -> Tally {
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = task_rng(seed, (stream << 32) | c as u64);
            work(&mut rng, c * CHUNK..((c + 1) * CHUNK).min(total))
        })
        .collect();
    parts.into_iter().fold(Tally::new(), Tally::merge)
}

fn point_violation(what: &str, params: ScenarioParams, e: Correlation, value: f64) -> Violation {
    Violation {
        what: what.to_string(),
        two_j: Some(params.j.two_j()),
        alpha: Some(params.alpha.radians()),
        e1: Some(e.e1()),
        e2: Some(e.e2()),
        value,
    }
}

/// Every valid degree-`2J` box gives correlations in `Q_{J,α}` and `R_{J,α}`.
pub fn set_equality_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    for n in 1..=cfg.max_degree {
        let points = cfg.set_equality_alpha_points;
        let part = chunked(cfg.seed, u64::from(n), cfg.set_equality_samples, |rng, range| {
            let mut t = Tally::new();
            for _ in range {
                let b = sample_valid_box_with(n as usize, rng);
                let p0 = b.eval(Angle::ZERO);
                for i in 1..=points {
                    let alpha = PI / f64::from(n) * i as f64 / (points + 1) as f64;
                    let params = ScenarioParams::from_raw(n, alpha).expect("finite angle");
                    let pa = b.eval(Angle::new(alpha).expect("finite angle"));
                    let e = Correlation::new_clamped(2.0 * p0 - 1.0, 2.0 * pa - 1.0, 1e-9)
                        .expect("valid boxes stay within tolerance of [0, 1]");
                    let margin = overlap_g(e) - overlap_gamma(params);
                    let ok = in_quantum_set(e, params, 1e-9) && in_rotation_box_set(e, params, 1e-9);
                    t.record(margin, !ok, || point_violation("box correlation outside Q", params, e, margin));
                }
            }
            t
        });
        tally = tally.merge(part);
    }
    if let Some(inj) = cfg.inject {
        let params = ScenarioParams::from_raw(inj.two_j, inj.alpha)?;
        let e = Correlation::new(inj.e1, inj.e2)?;
        let margin = overlap_g(e) - overlap_gamma(params);
        let ok = in_quantum_set(e, params, 1e-9);
        tally.record(margin, !ok, || point_violation("injected correlation outside Q", params, e, margin));
    }
    Ok(tally.into_report("set_equality"))
}

/// `T′² + n²T² ≤ n²` for random valid boxes of degree `1..=max_degree`.
pub fn bernstein_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    for n in 1..=cfg.max_degree {
        let part = chunked(cfg.seed, 100 + u64::from(n), cfg.bernstein_samples, |rng, range| {
            let mut t = Tally::new();
            for _ in range {
                let b = sample_valid_box_with(n as usize, rng);
                let excess = bernstein_check(&b, cfg.bernstein_grid).expect("sampled boxes are valid");
                t.record(-excess, excess > 1e-8, || Violation {
                    what: "Bernstein inequality".into(),
                    two_j: Some(n),
                    alpha: None,
                    e1: None,
                    e2: None,
                    value: excess,
                });
            }
            t
        });
        tally = tally.merge(part);
    }
    Ok(tally.into_report("bernstein"))
}

/// Fourier coefficients of random quantum models stop at degree `2J` and
/// reproduce the Born probabilities.
pub fn fourier_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut tally = Tally::new();
    for two_j in 0..=cfg.max_degree {
        let rep = Representation::full(SpinBound::from_two_j(two_j));
        let angles = cfg.fourier_angles;
        let part = chunked(cfg.seed, 200 + u64::from(two_j), cfg.fourier_samples, |rng, range| {
            let mut t = Tally::new();
            for _ in range {
                let m = random_model(&rep, rng);
                let b = match coefficients_from_quantum(&m) {
                    Ok(b) => b,
                    Err(_) => {
                        t.record(f64::NEG_INFINITY, true, || Violation {
                            what: "conjugate symmetry".into(),
                            two_j: Some(two_j),
                            alpha: None,
                            e1: None,
                            e2: None,
                            value: f64::NAN,
                        });
                        continue;
                    }
                };
                let degree_ok = b.degree() <= two_j as usize;
                t.record(0.0, !degree_ok, || Violation {
                    what: "Fourier degree above 2J".into(),
                    two_j: Some(two_j),
                    alpha: None,
                    e1: None,
                    e2: None,
                    value: b.degree() as f64,
                });
                let mut worst: f64 = 0.0;
                let mut at = 0.0;
                for i in 0..angles {
                    let a = TAU * i as f64 / angles as f64;
                    let ang = Angle::new(a).expect("finite angle");
                    let d = (b.eval(ang) - born_probability(&m, ang)).abs();
                    if d > worst {
                        worst = d;
                        at = a;
                    }
                }
                t.record(1e-10 - worst, worst > 1e-10, || Violation {
                    what: "box differs from Born probability".into(),
                    two_j: Some(two_j),
                    alpha: Some(at),
                    e1: None,
                    e2: None,
                    value: worst,
                });
            }
            t
        });
        tally = tally.merge(part);
    }
    Ok(tally.into_report("fourier_degree"))
}

/// Grid check of `(1 − ω)² cos x ≥ cos_*(x + 2ω cot x)`.
pub fn arccos_lemma_suite(side: usize) -> Result<SuiteReport> {
    let rows: Vec<Tally> = (0..side)
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::new();
            let om = i as f64 / (side - 1).max(1) as f64;
            for k in 0..side {
                let x = FRAC_PI_2 * k as f64 / (side - 1).max(1) as f64;
                let m = arccos_shift_margin(om, x).expect("grid inside the domain");
                t.record(m, m < -1e-12, || Violation {
                    what: format!("arccos shift lemma at omega = {om}"),
                    two_j: None,
                    alpha: Some(x),
                    e1: None,
                    e2: None,
                    value: m,
                });
            }
            t
        })
        .collect();
    Ok(rows.into_iter().fold(Tally::new(), Tally::merge).into_report("arccos_shift_lemma"))
}

fn random_correlation(rng: &mut ChaCha8Rng) -> Correlation {
    Correlation::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)).expect("in range")
}

/// `H(tE + (1−t)E′) ≤ tH(E) + (1−t)H(E′) + h(t)` on random triples.
pub fn concavity_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let tally = chunked(cfg.seed, 300, cfg.concavity_samples, |rng, range| {
        let mut t = Tally::new();
        for _ in range {
            let s: f64 = rng.random_range(0.0..=1.0);
            let (e, f) = (random_correlation(rng), random_correlation(rng));
            let m = mixing_entropy_slack(s, e, f).expect("t in [0, 1]");
            t.record(m, m < -1e-12, || Violation {
                what: format!("entropy mixing bound at t = {s}"),
                two_j: None,
                alpha: None,
                e1: Some(e.e1()),
                e2: Some(e.e2()),
                value: m,
            });
        }
        t
    });
    Ok(tally.into_report("entropy_mixing_bound"))
}

/// `Q^ω_{J,α} ⊆ Q_{J, α + 2ω cot(Jα)/J}` on random memberships.
pub fn relaxed_inclusion_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let max = cfg.max_degree.max(1);
    let tally = chunked(cfg.seed, 400, cfg.inclusion_samples, |rng, range| {
        let mut t = Tally::new();
        for _ in range {
            let two_j = rng.random_range(1..=max);
            let frac: f64 = rng.random_range(0.01..0.99);
            let alpha = frac * PI / f64::from(two_j);
            let params = ScenarioParams::from_raw(two_j, alpha).expect("finite angle");
            let omega: f64 = rng.random_range(0.0..0.5);
            let e = random_correlation(rng);
            let inside = relaxed_quantum_margin(e, params, omega).expect("omega < 1") >= 0.0;
            if !inside {
                continue;
            }
            let wide = shifted_alpha(params, omega).expect("0 < Jα < π/2");
            let target = params.with_alpha(Angle::new(wide).expect("finite angle"));
            let margin = if target.distinguishable() { 1.0 } else { overlap_g(e) - overlap_gamma(target) };
            t.record(margin, margin < -1e-9, || point_violation("relaxed point outside shifted Q", params, e, margin));
        }
        t
    });
    Ok(tally.into_report("relaxed_set_inclusion"))
}

/// Numerical inclusion of the coherent-state error set in `Q^δ` over
/// `J ∈ {½, …, 3}`, angles across `(0, π/(2J))` and the configured `κ`.
pub fn coherent_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut jobs = Vec::new();
    for two_j in 1..=6u32 {
        for i in 0..cfg.coherent_alpha_points {
            let frac = 0.05 + 0.9 * i as f64 / (cfg.coherent_alpha_points - 1).max(1) as f64;
            for &k in &cfg.coherent_kappas {
                jobs.push((two_j, frac * PI / f64::from(two_j), k));
            }
        }
    }
    let parts: Vec<Result<Tally>> = jobs
        .par_iter()
        .map(|&(two_j, alpha, kappa)| {
            let params = ScenarioParams::from_raw(two_j, alpha)?;
            let r = error_set_inclusion_check(params, kappa, cfg.coherent_grid)?;
            let mut t = Tally::new();
            if let Some(m) = r.worst_margin {
                let p = r.worst_point.unwrap_or(Correlation::CORNERS[0]);
                t.record(m, !r.included, || {
                    point_violation(&format!("error set outside Q^delta, kappa = {kappa}"), params, p, m)
                });
            }
            Ok(t)
        })
        .collect();
    let mut tally = Tally::new();
    for p in parts {
        tally = tally.merge(p?);
    }
    Ok(tally.into_report("coherent_inclusion"))
}

/// All suites in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = vec![
        set_equality_suite(cfg)?,
        bernstein_suite(cfg)?,
        fourier_suite(cfg)?,
        arccos_lemma_suite(cfg.arccos_grid_side)?,
        concavity_suite(cfg)?,
        relaxed_inclusion_suite(cfg)?,
        coherent_suite(cfg)?,
    ];
    Ok(VerifyReport { passed: suites.iter().all(|s| s.passed), suites })
}
