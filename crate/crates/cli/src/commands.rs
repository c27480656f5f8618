//! The five subcommands. Each merges its configuration, computes a result
//! record and hands it to [`crate::output`].

use std::f64::consts::TAU;
use std::time::Instant;

use serde::Serialize;
use spincert::certify::{certify_hstar, hstar_robust_lower_bound, Ensemble, RobustBound, SolveStatus};
use spincert::coherent::{
    delta_inflation, error_set_inclusion_check, kappa_from_eta, truncation_eta, CoherentParams, InclusionReport,
};
use spincert::quantum::{born_probability, extremal_model, sample_outcomes};
use spincert::rng::derive_seed;
use spincert::sets::{boundary_grid, in_quantum_set, in_relaxed_quantum_set, Branch, DEFAULT_TOL};
use spincert::verify::{run_all, VerifyConfig, VerifyReport};
use spincert::{Angle, Correlation, ErrorBudget, ScenarioParams};

use crate::config::{load, BoundaryConfig, CertifyConfig, CliError, CoherentConfig, ModelSpec, SimulateConfig};
use crate::output::{emit, Report};
use crate::{BoundaryArgs, CertifyArgs, CoherentArgs, Common, Format, SimulateArgs, VerifyArgs};

fn wall(common: &Common, start: Instant) -> Option<f64> {
    common.timing.then(|| start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryData {
    pub notices: Vec<String>,
    pub polylines: Vec<Polyline>,
}

fn polyline(label: impl Into<String>, pts: impl IntoIterator<Item = Correlation>) -> Polyline {
    Polyline { label: label.into(), points: pts.into_iter().map(|e| [e.e1(), e.e2()]).collect() }
}

/// Outline of `(1 − δ)Q + δ[−1, 1]²` from its support points: for each of
/// `directions` unit vectors `u` the maximizer of `u·p` over `extremes`,
/// shifted by `δ·sign(u)`. Consecutive repeats are dropped and the polygon is
/// closed.
pub fn relaxed_outline(extremes: &[Correlation], delta: f64, directions: usize) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    for k in 0..directions {
        // Half-step offset keeps `u` off the axes, where `sign` is ambiguous.
        let t = TAU * (k as f64 + 0.5) / directions as f64;
        let (u1, u2) = (t.cos(), t.sin());
        let best = extremes
            .iter()
            .copied()
            .fold(None::<(f64, Correlation)>, |acc, p| {
                let v = u1 * p.e1() + u2 * p.e2();
                match acc {
                    Some((bv, _)) if bv >= v => acc,
                    _ => Some((v, p)),
                }
            })
            .map(|(_, p)| p)
            .unwrap_or(Correlation::CORNERS[0]);
        let q = [(1.0 - delta) * best.e1() + delta * u1.signum(), (1.0 - delta) * best.e2() + delta * u2.signum()];
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if let Some(&first) = out.first() {
        out.push(first);
    }
    out
}

fn square() -> Vec<Correlation> {
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .into_iter()
        .map(|(a, b)| Correlation::new(a, b).expect("corner"))
        .collect()
}

pub fn boundary_data(cfg: &BoundaryConfig) -> Result<BoundaryData, CliError> {
    let params = cfg.params()?;
    let params = params.with_alpha(Angle::new(params.alpha.radians().abs())?);
    let diagonal = vec![Correlation::CORNERS[1], Correlation::CORNERS[0]];
    let mut notices = Vec::new();
    let mut polylines = Vec::new();
    if params.distinguishable() {
        notices.push("J·alpha ≥ π/2: every correlation is reachable, Q is the full square".to_string());
        polylines.push(polyline("square", square()));
        polylines.push(polyline("classical", diagonal));
        return Ok(BoundaryData { notices, polylines });
    }
    if params.j_alpha() == 0.0 {
        notices.push("alpha = 0: Q coincides with the classical diagonal".to_string());
        polylines.push(polyline("classical", diagonal));
        return Ok(BoundaryData { notices, polylines });
    }
    let c1 = boundary_grid(params, Branch::Lower, cfg.grid)?;
    let c2 = boundary_grid(params, Branch::Upper, cfg.grid)?;
    let mut extremes = vec![Correlation::CORNERS[0], Correlation::CORNERS[1]];
    extremes.extend(c1.iter().copied());
    extremes.extend(c2.iter().copied());
    polylines.push(polyline("c1", c1));
    polylines.push(polyline("c2", c2));
    polylines.push(polyline("classical", diagonal));
    for &d in &cfg.deltas {
        polylines.push(Polyline { label: format!("relaxed_{d}"), points: relaxed_outline(&extremes, d, 4 * cfg.grid) });
    }
    Ok(BoundaryData { notices, polylines })
}

pub fn boundary(args: &BoundaryArgs, start: Instant) -> Result<(), CliError> {
    let mut cfg: BoundaryConfig = load(args.common.config.as_deref())?;
    if let Some(v) = args.scenario.two_j {
        cfg.two_j = v;
    }
    if let Some(v) = args.scenario.alpha_radians() {
        cfg.alpha = v;
    }
    if let Some(v) = &args.delta {
        cfg.deltas = v.clone();
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let data = boundary_data(&cfg)?;
    for n in &data.notices {
        eprintln!("notice: {n}");
    }
    let report = Report::new("boundary", cfg.seed, &cfg, &data, wall(&args.common, start));
    let text = match args.common.format.unwrap_or(Format::Csv) {
        Format::Json => report.to_json()?,
        Format::Csv => {
            let mut s = report.csv_preamble(&data.notices)?;
            s.push_str("e1,e2,label\n");
            for line in &data.polylines {
                for p in &line.points {
                    s.push_str(&format!("{},{},{}\n", p[0], p[1], line.label));
                }
            }
            s
        }
    };
    emit(args.common.out.as_deref(), &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Simulation {
    pub model: ModelSpec,
    pub samples: u64,
    /// `(n₊, n₋)` at angle `0`.
    pub counts_zero: (u64, u64),
    /// `(n₊, n₋)` at angle `α`.
    pub counts_alpha: (u64, u64),
    /// Correlation of the model itself.
    pub exact: Correlation,
    /// One standard error of each estimated bias.
    pub standard_error: (f64, f64),
}

fn simulate_model(
    params: ScenarioParams,
    model: ModelSpec,
    samples: u64,
    seed: u64,
) -> Result<(Correlation, Simulation), CliError> {
    let m = extremal_model(params, model.tau, model.branch)?;
    let zero = sample_outcomes(&m, Angle::ZERO, samples, derive_seed(seed, 1));
    let at = sample_outcomes(&m, params.alpha, samples, derive_seed(seed, 2));
    let n = samples as f64;
    let bias = |(p, q): (u64, u64)| (p as f64 - q as f64) / n;
    let estimate = Correlation::new_clamped(bias(zero), bias(at), 0.0)?;
    let exact = Correlation::from_probabilities(born_probability(&m, Angle::ZERO), born_probability(&m, params.alpha))?;
    let se = |e: f64| ((1.0 - e * e).max(0.0) / n).sqrt();
    Ok((
        estimate,
        Simulation {
            model,
            samples,
            counts_zero: zero,
            counts_alpha: at,
            exact,
            standard_error: (se(exact.e1()), se(exact.e2())),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyResults {
    pub target: Correlation,
    pub simulation: Option<Simulation>,
    pub in_quantum_set: bool,
    pub in_relaxed_quantum_set: bool,
    pub status: SolveStatus,
    /// `None` when infeasible.
    pub h_star: Option<f64>,
    pub ensemble: Ensemble,
    pub candidates: usize,
    pub iterations: usize,
    pub robust_bound: RobustBound,
}

pub fn certify_results(cfg: &CertifyConfig) -> Result<CertifyResults, CliError> {
    let (params, budget) = cfg.validate()?;
    let (target, simulation) = match (cfg.e1, cfg.e2, cfg.model) {
        (Some(e1), Some(e2), _) => (Correlation::new(e1, e2)?, None),
        (_, _, Some(m)) => {
            let (e, s) = simulate_model(params, m, cfg.samples, cfg.seed)?;
            (e, Some(s))
        }
        _ => unreachable!("checked by validate"),
    };
    let r = certify_hstar(target, params, budget, cfg.grid)?;
    let robust = hstar_robust_lower_bound(params, budget, |a| {
        certify_hstar(target, params.with_alpha(a), ErrorBudget::NONE, cfg.grid).map_or(f64::NAN, |r| r.h_star)
    });
    Ok(CertifyResults {
        target,
        simulation,
        in_quantum_set: in_quantum_set(target, params, DEFAULT_TOL),
        in_relaxed_quantum_set: in_relaxed_quantum_set(target, params, budget.omega(), DEFAULT_TOL)?,
        status: r.status,
        h_star: r.h_star.is_finite().then_some(r.h_star),
        ensemble: r.ensemble,
        candidates: r.candidates,
        iterations: r.iterations,
        robust_bound: robust,
    })
}

fn json_only(common: &Common, command: &str) -> Result<(), CliError> {
    match common.format {
        Some(Format::Csv) => Err(CliError::Config(format!("{command} writes JSON reports only"))),
        _ => Ok(()),
    }
}

pub fn certify(args: &CertifyArgs, start: Instant) -> Result<(), CliError> {
    json_only(&args.common, "certify")?;
    let mut cfg: CertifyConfig = load(args.common.config.as_deref())?;
    if let Some(v) = args.scenario.two_j {
        cfg.two_j = v;
    }
    if let Some(v) = args.scenario.alpha_radians() {
        cfg.alpha = v;
    }
    if args.e1.is_some() || args.e2.is_some() {
        cfg.e1 = args.e1;
        cfg.e2 = args.e2;
        cfg.model = None;
    }
    if args.tau.is_some() || args.branch.is_some() {
        let base = cfg.model.unwrap_or(ModelSpec { tau: 0.0, branch: Branch::Lower });
        cfg.model = Some(ModelSpec {
            tau: args.tau.unwrap_or(base.tau),
            branch: args.branch.map_or(base.branch, Branch::from),
        });
        cfg.e1 = None;
        cfg.e2 = None;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.omega {
        cfg.omega = v;
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let res = certify_results(&cfg)?;
    let text = Report::new("certify", cfg.seed, &cfg, &res, wall(&args.common, start)).to_json()?;
    emit(args.common.out.as_deref(), &text)?;
    match res.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(CliError::Infeasible(format!(
            "target ({}, {}) is outside the relaxed quantum set and no free weight is allowed",
            res.target.e1(),
            res.target.e2()
        ))),
    }
}

pub fn verify(args: &VerifyArgs, start: Instant) -> Result<(), CliError> {
    json_only(&args.common, "verify")?;
    let mut cfg: VerifyConfig = load(args.common.config.as_deref())?;
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.samples {
        cfg.set_equality_samples = v;
    }
    let report: VerifyReport = run_all(&cfg)?;
    let text = Report::new("verify", cfg.seed, &cfg, &report, wall(&args.common, start)).to_json()?;
    emit(args.common.out.as_deref(), &text)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        Err(CliError::VerificationFailed(failed.join(", ")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentRow {
    pub n_cut: u32,
    pub eta: f64,
    pub kappa: f64,
    /// `None` when `κ = 1`.
    pub delta: Option<f64>,
    pub inclusion: Option<InclusionReport>,
}

pub fn coherent_rows(cfg: &CoherentConfig) -> Result<Vec<CoherentRow>, CliError> {
    let params = cfg.params()?;
    (0..=cfg.n_max)
        .map(|n| {
            let eta = truncation_eta(CoherentParams::new(cfg.beta_abs_sq, n)?);
            let kappa = kappa_from_eta(eta)?;
            let (delta, inclusion) = if kappa < 1.0 {
                (Some(delta_inflation(kappa, params)?), Some(error_set_inclusion_check(params, kappa, cfg.grid)?))
            } else {
                (None, None)
            };
            Ok(CoherentRow { n_cut: n, eta, kappa, delta, inclusion })
        })
        .collect()
}

pub fn coherent(args: &CoherentArgs, start: Instant) -> Result<(), CliError> {
    let mut cfg: CoherentConfig = load(args.common.config.as_deref())?;
    if let Some(v) = args.scenario.two_j {
        cfg.two_j = v;
    }
    if let Some(v) = args.scenario.alpha_radians() {
        cfg.alpha = v;
    }
    if let Some(v) = args.beta_sq {
        cfg.beta_abs_sq = v;
    }
    if let Some(v) = args.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = args.grid {
        cfg.grid = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let rows = coherent_rows(&cfg)?;
    let report = Report::new("coherent", cfg.seed, &cfg, &rows, wall(&args.common, start));
    let text = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json()?,
        Format::Csv => {
            let mut s = report.csv_preamble(&[])?;
            s.push_str("n_cut,eta,kappa,delta,saturated,included,worst_margin\n");
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            for r in &rows {
                let inc = r.inclusion.as_ref();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.n_cut,
                    r.eta,
                    r.kappa,
                    opt(r.delta),
                    inc.map_or(String::new(), |i| i.saturated.to_string()),
                    inc.map_or(String::new(), |i| i.included.to_string()),
                    opt(inc.and_then(|i| i.worst_margin)),
                ));
            }
            s
        }
    };
    emit(args.common.out.as_deref(), &text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateResults {
    pub estimate: Correlation,
    pub simulation: Simulation,
    pub estimate_in_quantum_set: bool,
}

pub fn simulate(args: &SimulateArgs, start: Instant) -> Result<(), CliError> {
    json_only(&args.common, "simulate")?;
    let mut cfg: SimulateConfig = load(args.common.config.as_deref())?;
    if let Some(v) = args.scenario.two_j {
        cfg.two_j = v;
    }
    if let Some(v) = args.scenario.alpha_radians() {
        cfg.alpha = v;
    }
    if let Some(v) = args.tau {
        cfg.tau = v;
    }
    if let Some(v) = args.branch {
        cfg.branch = v.into();
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    let params = cfg.params()?;
    let (estimate, simulation) =
        simulate_model(params, ModelSpec { tau: cfg.tau, branch: cfg.branch }, cfg.samples, cfg.seed)?;
    let res = SimulateResults {
        estimate,
        simulation,
        estimate_in_quantum_set: in_quantum_set(estimate, params, DEFAULT_TOL),
    };
    let text = Report::new("simulate", cfg.seed, &cfg, &res, wall(&args.common, start)).to_json()?;
    emit(args.common.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spincert::sets::{overlap_g, overlap_gamma};

    #[test]
    fn default_boundary_starts_at_c1_origin() {
        let d = boundary_data(&BoundaryConfig::default()).unwrap();
        let c1 = &d.polylines[0];
        assert_eq!(c1.label, "c1");
        assert_eq!(c1.points.len(), 1000);
        assert_eq!(c1.points[0][0], 1.0);
        assert!((c1.points[0][1] - 0.248_176).abs() < 1e-6);
        assert!(d.notices.is_empty());
        let labels: Vec<&str> = d.polylines.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels, ["c1", "c2", "classical", "relaxed_0.15", "relaxed_0.3"]);
    }

    #[test]
    fn zero_relaxation_traces_the_quantum_boundary() {
        let cfg = BoundaryConfig { deltas: vec![0.0], grid: 200, ..BoundaryConfig::default() };
        let d = boundary_data(&cfg).unwrap();
        let q = ScenarioParams::from_raw(2, 0.66).unwrap();
        let outline = &d.polylines[3].points;
        assert!(outline.len() > 100);
        for p in outline {
            let e = Correlation::new(p[0], p[1]).unwrap();
            let corner = p[0] == p[1] && p[0].abs() == 1.0;
            assert!(corner || (overlap_g(e) - overlap_gamma(q)).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn relaxed_outline_is_in_the_relaxed_set() {
        let cfg = BoundaryConfig { deltas: vec![0.15, 0.3], grid: 200, ..BoundaryConfig::default() };
        let d = boundary_data(&cfg).unwrap();
        let q = ScenarioParams::from_raw(2, 0.66).unwrap();
        for (line, om) in d.polylines[3..].iter().zip([0.15, 0.3]) {
            for p in &line.points {
                let e = Correlation::new_clamped(p[0], p[1], 1e-12).unwrap();
                let m = spincert::sets::relaxed_quantum_margin(e, q, om).unwrap();
                let on_square = p[0].abs() == 1.0 || p[1].abs() == 1.0;
                assert!(m > -1e-9 && (on_square || m < 1e-2), "{p:?} margin {m}");
            }
        }
    }

    #[test]
    fn distinguishable_angles_give_the_square() {
        let cfg = BoundaryConfig { alpha: 2.0, ..BoundaryConfig::default() };
        let d = boundary_data(&cfg).unwrap();
        assert_eq!(d.notices.len(), 1);
        assert_eq!(d.polylines[0].label, "square");
        assert_eq!(d.polylines[0].points.len(), 5);
    }

    #[test]
    fn certify_center_is_zero_and_midpoint_positive() {
        let c = CertifyConfig { e1: Some(0.0), e2: Some(0.0), grid: 64, ..CertifyConfig::default() };
        let r = certify_results(&c).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.h_star.unwrap().abs() < 1e-6);

        let q = ScenarioParams::from_raw(2, 0.66).unwrap();
        let (a, b) = spincert::sets::boundary_interval(q, Branch::Lower).unwrap();
        let mid = spincert::sets::boundary_curve_c1(q, 0.5 * (a + b)).unwrap();
        let c = CertifyConfig { e1: Some(mid.e1()), e2: Some(mid.e2()), grid: 64, ..CertifyConfig::default() };
        let r = certify_results(&c).unwrap();
        let lib = certify_hstar(mid, q, ErrorBudget::NONE, 64).unwrap().h_star;
        assert!(r.h_star.unwrap() > 0.0);
        assert_eq!(r.h_star.unwrap(), lib);
        assert!((r.robust_bound.value - lib).abs() < 1e-12);
    }

    #[test]
    fn infeasible_target_is_reported() {
        let c = CertifyConfig { e1: Some(1.0), e2: Some(-1.0), grid: 32, ..CertifyConfig::default() };
        let r = certify_results(&c).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.h_star.is_none());
    }

    #[test]
    fn coherent_rows_follow_the_cutoff() {
        let cfg = CoherentConfig { n_max: 5, grid: 51, ..CoherentConfig::default() };
        let rows = coherent_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert!((rows[3].eta - 0.018_988).abs() < 1e-5);
        assert!(rows.windows(2).all(|w| w[1].eta < w[0].eta));
        assert!(rows[5].inclusion.unwrap().included);
    }
}
