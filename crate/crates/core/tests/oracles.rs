use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use spincert::certify::{certify_hstar, entropy_h, SolveStatus};
use spincert::coherent::{truncation_eta, CoherentParams};
use spincert::quantum::{
    correlation_of, decompose_into_extremal, mix_models, random_model, QuantumModel, Representation, StateVector,
    TwoOutcomePovm, C64,
};
use spincert::rng::task_rng;
use spincert::sets::{in_quantum_set, in_relaxed_quantum_set, overlap_g, overlap_gamma};
use spincert::{Angle, Correlation, ErrorBudget, ScenarioParams, SpinBound};

fn params(two_j: u32, alpha: f64) -> ScenarioParams {
    ScenarioParams::from_raw(two_j, alpha).unwrap()
}

/// Boundary points of `Q_{J,α}` straight from `cos²` parametrizations,
/// `per_curve` points per arc at evenly spaced `τ`.
fn boundary_points(q: ScenarioParams, per_curve: usize) -> Vec<(f64, f64)> {
    let j = q.j.value();
    let a = q.alpha.radians();
    let mut pts = Vec::new();
    for i in 0..per_curve {
        let t = (PI / (2.0 * j) - a) * i as f64 / (per_curve - 1) as f64;
        pts.push((2.0 * (j * t).cos().powi(2) - 1.0, 2.0 * (j * (t + a)).cos().powi(2) - 1.0));
    }
    for i in 0..per_curve {
        let t = a + (PI / (2.0 * j) - a) * i as f64 / (per_curve - 1) as f64;
        pts.push((2.0 * (j * t).cos().powi(2) - 1.0, 2.0 * (j * (t - a)).cos().powi(2) - 1.0));
    }
    pts
}

fn h(p: (f64, f64)) -> f64 {
    let bin = |e: f64| {
        let x = (1.0 + e) / 2.0;
        let t = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
        t(x) + t(1.0 - x)
    };
    0.5 * (bin(p.0) + bin(p.1))
}

/// Minimum of `Σ w_i H(p_i)` over all triples of `pts` containing `e` in
/// their convex hull (barycentric weights by Cramer's rule).
fn exhaustive_triples(pts: &[(f64, f64)], e: (f64, f64)) -> f64 {
    let hs: Vec<f64> = pts.iter().map(|&p| h(p)).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        let a = pts[i];
        for j in i + 1..pts.len() {
            let b = pts[j];
            for k in j + 1..pts.len() {
                let c = pts[k];
                let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
                if det.abs() < 1e-14 {
                    continue;
                }
                let u = ((e.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (e.1 - a.1)) / det;
                let v = ((b.0 - a.0) * (e.1 - a.1) - (e.0 - a.0) * (b.1 - a.1)) / det;
                let w = 1.0 - u - v;
                if u < -1e-12 || v < -1e-12 || w < -1e-12 {
                    continue;
                }
                best = best.min(w * hs[i] + u * hs[j] + v * hs[k]);
            }
        }
    }
    best
}

#[test]
fn lp_matches_exhaustive_triples() {
    let q = params(2, 0.66);
    let mut rng = task_rng(101, 0);
    let mut base = boundary_points(q, 100);
    base.push((1.0, 1.0));
    base.push((-1.0, -1.0));
    let mut done = 0;
    while done < 8 {
        let e = Correlation::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)).unwrap();
        if !in_quantum_set(e, q, 0.0) {
            continue;
        }
        done += 1;
        let mut pts = base.clone();
        pts.push((e.e1(), e.e2()));
        let oracle = exhaustive_triples(&pts, (e.e1(), e.e2()));
        let lp = certify_hstar(e, q, ErrorBudget::NONE, 100).unwrap();
        assert!((lp.h_star - oracle).abs() < 1e-4, "{e:?}: lp {} vs oracle {oracle}", lp.h_star);
    }
}

/// Convex hull (monotone chain), counter-clockwise.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed distance to the polygon boundary, positive inside.
fn signed_distance(poly: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let mut d = f64::INFINITY;
    let mut inside = true;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ex, ey) = (b.0 - a.0, b.1 - a.1);
        let cross = ex * (p.1 - a.1) - ey * (p.0 - a.0);
        if cross < 0.0 {
            inside = false;
        }
        let t = (((p.0 - a.0) * ex + (p.1 - a.1) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
        d = d.min((p.0 - a.0 - t * ex).hypot(p.1 - a.1 - t * ey));
    }
    if inside {
        d
    } else {
        -d
    }
}

#[test]
fn relaxed_membership_matches_corner_mixing_hull() {
    let corners = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let mut rng = task_rng(102, 0);
    for &(tj, alpha) in &[(2u32, 0.66), (1, 1.2), (4, 0.2), (6, 0.45)] {
        let q = params(tj, alpha);
        let mut ext = boundary_points(q, 2000);
        ext.push((1.0, 1.0));
        ext.push((-1.0, -1.0));
        for &om in &[0.0, 0.05, 0.3, 0.45, 0.8] {
            let mixed: Vec<(f64, f64)> = ext
                .iter()
                .flat_map(|&b| corners.iter().map(move |&c| ((1.0 - om) * b.0 + om * c.0, (1.0 - om) * b.1 + om * c.1)))
                .collect();
            let poly = hull(mixed);
            let mut checked = 0;
            while checked < 2000 {
                let p = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                let d = signed_distance(&poly, p);
                if d.abs() < 1e-4 {
                    continue;
                }
                checked += 1;
                let e = Correlation::new(p.0, p.1).unwrap();
                assert_eq!(in_relaxed_quantum_set(e, q, om, 0.0).unwrap(), d > 0.0, "{p:?} omega {om} J2 {tj}");
            }
        }
    }
}

#[test]
fn relaxed_example_points_against_hull() {
    let q = params(2, 0.66);
    let om = 0.3;
    let corners = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let mut ext = boundary_points(q, 4000);
    ext.push((1.0, 1.0));
    ext.push((-1.0, -1.0));
    let mixed: Vec<(f64, f64)> = ext
        .iter()
        .flat_map(|&b| corners.iter().map(move |&c| ((1.0 - om) * b.0 + om * c.0, (1.0 - om) * b.1 + om * c.1)))
        .collect();
    let poly = hull(mixed);
    // (1, 0.4) is a hull vertex; (1, −0.4) lies outside.
    assert!(signed_distance(&poly, (1.0, 0.4)).abs() < 1e-9);
    assert!(signed_distance(&poly, (1.0, -0.4)) < -1e-3);
    assert!(in_relaxed_quantum_set(Correlation::new(1.0, 0.4).unwrap(), q, om, 1e-9).unwrap());
    assert!(!in_relaxed_quantum_set(Correlation::new(1.0, -0.4).unwrap(), q, om, 1e-9).unwrap());
}

#[test]
fn eta_matches_incomplete_gamma() {
    use statrs::function::gamma::gamma_lr;
    for &(l, n) in &[(1.0, 3u32), (1.0, 0), (0.3, 5), (4.0, 2), (12.0, 20), (40.0, 30), (80.0, 100)] {
        let ours = truncation_eta(CoherentParams::new(l, n).unwrap());
        // P(X > N) = P(N + 1, λ), the regularized lower incomplete gamma.
        let oracle = gamma_lr(f64::from(n) + 1.0, l);
        assert!((ours - oracle).abs() < 1e-12 * oracle.max(1e-3), "{l} {n}: {ours} vs {oracle}");
    }
    assert!((truncation_eta(CoherentParams::new(1.0, 3).unwrap()) - 0.018_988).abs() < 1e-5);
}

#[test]
fn random_models_are_sound() {
    let mut rng = task_rng(103, 0);
    for tj in 0..=6u32 {
        for f in [0.1, 0.5, 0.9, 1.5] {
            let q = params(tj.max(1), f * PI / f64::from(tj.max(1)));
            let rep = Representation::with_multiplicity(SpinBound::from_two_j(tj), 2).unwrap();
            for _ in 0..300 {
                let m = random_model(&rep, &mut rng);
                let e = correlation_of(&m, q);
                assert!(in_quantum_set(e, q, 1e-9), "{e:?} J2 {tj}");
            }
        }
    }
}

#[test]
fn interior_targets_have_extremal_decompositions() {
    let mut rng = task_rng(104, 0);
    for &(tj, alpha) in &[(1u32, 1.0), (2, 0.66), (5, 0.1), (8, 0.35)] {
        let q = params(tj, alpha);
        let mut done = 0;
        while done < 250 {
            let e = Correlation::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)).unwrap();
            if !in_quantum_set(e, q, 0.0) {
                continue;
            }
            done += 1;
            let parts = decompose_into_extremal(e, q).unwrap();
            assert!(parts.len() <= 3);
            let got = mix_models(&parts, q).unwrap();
            assert!((got.e1() - e.e1()).abs() < 1e-9 && (got.e2() - e.e2()).abs() < 1e-9);
        }
    }
}

/// Purifies `ρ = Σ λ_k |v_k⟩⟨v_k|` on `rep ⊗ C^d` as `Σ √λ_k |v_k⟩|k⟩` and
/// measures `M ⊗ 1`.
fn purified(rep: &Representation, rho: &DMatrix<C64>, m: &DMatrix<C64>) -> QuantumModel {
    let d = rep.dim();
    let eig = SymmetricEigen::new(rho.clone());
    let big = rep.with_ancilla(d).unwrap();
    let mut psi = DVector::<C64>::zeros(d * d);
    for k in 0..d {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        for s in 0..d {
            psi[s * d + k] += eig.eigenvectors[(s, k)] * lam;
        }
    }
    let mut mm = DMatrix::<C64>::zeros(d * d, d * d);
    for s in 0..d {
        for t in 0..d {
            for b in 0..d {
                mm[(s * d + b, t * d + b)] = m[(s, t)];
            }
        }
    }
    QuantumModel::new(big, StateVector::normalized(psi).unwrap(), TwoOutcomePovm::new(mm).unwrap()).unwrap()
}

#[test]
fn mixed_states_have_pure_models_with_equal_statistics() {
    let mut rng = task_rng(105, 0);
    for tj in 1..=4u32 {
        let q = params(tj, 0.7 * PI / f64::from(tj));
        let rep = Representation::full(SpinBound::from_two_j(tj));
        let d = rep.dim();
        let labels = rep.slot_labels();
        for _ in 0..50 {
            let g = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let rho = &g * g.adjoint();
            let rho = &rho / rho.trace();
            let effect = TwoOutcomePovm::random(d, &mut rng);
            let pure = purified(&rep, &rho, effect.matrix());
            for alpha in [0.0, q.alpha.radians()] {
                let u = DMatrix::from_diagonal(&DVector::from_iterator(
                    d,
                    labels.iter().map(|&l| C64::from_polar(1.0, f64::from(l) * alpha / 2.0)),
                ));
                let direct = (effect.matrix() * &u * &rho * u.adjoint()).trace().re;
                let via = spincert::quantum::born_probability(&pure, Angle::new(alpha).unwrap());
                assert!((direct - via).abs() < 1e-10);
            }
            let e = correlation_of(&pure, q);
            assert!(in_quantum_set(e, q, 1e-9));
        }
    }
}

#[test]
fn correlation_shift_is_bounded_by_trace_distance() {
    let mut rng = task_rng(106, 0);
    for _ in 0..10_000 {
        let d = 4;
        let a = StateVector::random(d, &mut rng);
        let b = StateVector::random(d, &mut rng);
        let m = TwoOutcomePovm::random(d, &mut rng);
        let ov = a.amplitudes().dotc(b.amplitudes()).norm_sqr();
        let dist = (1.0 - ov).max(0.0).sqrt();
        let pa = (a.amplitudes().adjoint() * m.matrix() * a.amplitudes())[(0, 0)].re;
        let pb = (b.amplitudes().adjoint() * m.matrix() * b.amplitudes())[(0, 0)].re;
        assert!(2.0 * (pa - pb).abs() <= spincert::coherent::perturbed_correlation_bound(dist) + 1e-12);
    }
}

#[test]
fn certified_value_below_point_entropy() {
    let q = params(2, 0.66);
    let mut rng = task_rng(107, 0);
    for _ in 0..30 {
        let e = Correlation::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)).unwrap();
        let r = certify_hstar(e, q, ErrorBudget::NONE, 64).unwrap();
        if in_quantum_set(e, q, 0.0) {
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!(r.h_star <= entropy_h(e) + 1e-12);
        } else if overlap_g(e) < overlap_gamma(q) - 1e-6 {
            assert_eq!(r.status, SolveStatus::Infeasible);
        }
    }
}
