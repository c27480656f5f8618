//! Rotation boxes: outcome probabilities `P(+1|α)` that are trigonometric
//! polynomials of degree `n = 2J`,
//!
//! `P(α) = c_0 + Σ_{k=1}^{n} (c_k cos kα + s_k sin kα)`,
//!
//! and are valid when `0 ≤ P ≤ 1` on the whole circle.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quantum::{constant_model, rotate, QuantumModel, Representation, StateVector, TwoOutcomePovm, C64};
use crate::rng::task_rng;
use crate::types::{Angle, SpinBound};

/// Tolerance on `[0, 1]` for box validity.
pub const VALIDITY_TOL: f64 = 1e-10;

const CONJUGATE_TOL: f64 = 1e-12;

/// Coefficients `c_0..c_n` and `s_1..s_n`; `cos.len() == sin.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationBoxCoeffs {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Certified range of a box over the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRange {
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
}

impl BoxRange {
    pub fn is_valid(&self) -> bool {
        self.min >= -VALIDITY_TOL && self.max <= 1.0 + VALIDITY_TOL
    }
}

impl RotationBoxCoeffs {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() + 1 {
            return Err(Error::MalformedCoefficients(format!(
                "{} cosine and {} sine coefficients",
                cos.len(),
                sin.len()
            )));
        }
        if cos.iter().chain(&sin).any(|v| !v.is_finite()) {
            return Err(Error::MalformedCoefficients("non-finite coefficient".into()));
        }
        Ok(Self { cos, sin })
    }

    pub fn constant(c0: f64) -> Self {
        Self { cos: vec![c0], sin: vec![] }
    }

    pub fn degree(&self) -> usize {
        self.sin.len()
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// `s_k` with the convention `s_0 = 0`.
    fn s(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.sin[k - 1]
        }
    }

    /// The raw series, which may leave `[0, 1]` for invalid boxes.
    pub fn eval(&self, alpha: Angle) -> f64 {
        self.eval_raw(alpha.radians())
    }

    fn eval_raw(&self, a: f64) -> f64 {
        let step = C64::from_polar(1.0, a);
        let mut z = C64::new(1.0, 0.0);
        let mut acc = self.cos[0];
        for k in 1..=self.degree() {
            z *= step;
            acc += self.cos[k] * z.re + self.s(k) * z.im;
        }
        acc
    }

    fn derivative(&self, a: f64) -> f64 {
        let step = C64::from_polar(1.0, a);
        let mut z = C64::new(1.0, 0.0);
        let mut acc = 0.0;
        for k in 1..=self.degree() {
            z *= step;
            acc += k as f64 * (self.s(k) * z.re - self.cos[k] * z.im);
        }
        acc
    }

    fn second_derivative(&self, a: f64) -> f64 {
        let step = C64::from_polar(1.0, a);
        let mut z = C64::new(1.0, 0.0);
        let mut acc = 0.0;
        for k in 1..=self.degree() {
            z *= step;
            let kk = (k * k) as f64;
            acc -= kk * (self.cos[k] * z.re + self.s(k) * z.im);
        }
        acc
    }

    /// Complex coefficients `p_k`, `k = −n..n`, of `Σ p_k e^{ikα}`, stored at `k + n`.
    fn exponential_coeffs(&self) -> Vec<C64> {
        let n = self.degree();
        let mut p = vec![C64::new(0.0, 0.0); 2 * n + 1];
        p[n] = C64::new(self.cos[0], 0.0);
        for k in 1..=n {
            let pk = C64::new(self.cos[k], -self.s(k)) * 0.5;
            p[n + k] = pk;
            p[n - k] = pk.conj();
        }
        p
    }

    fn from_exponential_coeffs(p: &[C64]) -> Self {
        let n = (p.len() - 1) / 2;
        let cos = std::iter::once(p[n].re).chain((1..=n).map(|k| 2.0 * p[n + k].re)).collect();
        let sin = (1..=n).map(|k| -2.0 * p[n + k].im).collect();
        Self { cos, sin }
    }

    /// Global minimum and maximum over the circle.
    ///
    /// Candidates are `α = 0` and every sign change of `T′`, found by
    /// bracketing on a grid. A cell without a sign change is discarded only
    /// when `|T′|` at its ends exceeds what `|T″| ≤ Σ k²|p_k|` allows to
    /// vanish inside; otherwise it is split. The reported extremes are
    /// attained values.
    pub fn range(&self) -> BoxRange {
        let scale = self.cos.iter().chain(&self.sin).fold(0.0f64, |m, v| m.max(v.abs()));
        let cutoff = 1e-15 * scale;
        let m =
            (1..=self.degree()).rev().find(|&k| self.cos[k].abs() > cutoff || self.s(k).abs() > cutoff).unwrap_or(0);
        let mut r = BoxRange { min: f64::INFINITY, max: f64::NEG_INFINITY, argmin: 0.0, argmax: 0.0 };
        let mut consider = |a: f64| {
            let v = self.eval_raw(a);
            if v < r.min {
                r.min = v;
                r.argmin = a;
            }
            if v > r.max {
                r.max = v;
                r.argmax = a;
            }
        };
        consider(0.0);
        if m > 0 {
            for a in self.critical_angles(m) {
                consider(a);
            }
        }
        r.argmin = r.argmin.rem_euclid(TAU);
        r.argmax = r.argmax.rem_euclid(TAU);
        r
    }

    fn critical_angles(&self, m: usize) -> Vec<f64> {
        const MIN_CELL: f64 = 1e-12;
        let lip: f64 = (1..=m).map(|k| (k * k) as f64 * self.cos[k].hypot(self.s(k))).sum();
        let cells = 8 * m + 8;
        let h = TAU / cells as f64;
        let grid: Vec<(f64, f64)> = (0..=cells)
            .map(|i| {
                let a = h * i as f64;
                (a, self.derivative(a))
            })
            .collect();
        let mut out = Vec::new();
        let mut stack: Vec<[(f64, f64); 2]> = grid.windows(2).rev().map(|w| [w[0], w[1]]).collect();
        while let Some([(a, da), (b, db)]) = stack.pop() {
            if da == 0.0 {
                out.push(a);
            } else if (da < 0.0) != (db < 0.0) && db != 0.0 {
                out.push(self.bracketed_root(a, da, b));
            } else if da.abs() + db.abs() > lip * (b - a) {
                continue;
            } else if b - a < MIN_CELL {
                out.push(0.5 * (a + b));
            } else {
                let c = 0.5 * (a + b);
                let mid = (c, self.derivative(c));
                stack.push([mid, (b, db)]);
                stack.push([(a, da), mid]);
            }
        }
        out
    }

    /// Root of `T′` in `[a, b]`, where `T′(a) = da` and `T′(b)` differ in
    /// sign; Newton steps that leave the bracket fall back to bisection.
    fn bracketed_root(&self, mut a: f64, mut da: f64, mut b: f64) -> f64 {
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let dx = self.derivative(x);
            if dx == 0.0 {
                return x;
            }
            if (dx < 0.0) == (da < 0.0) {
                a = x;
                da = dx;
            } else {
                b = x;
            }
            let newton = x - dx / self.second_derivative(x);
            let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || b - a <= 4.0 * f64::EPSILON * b.max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }

    /// The range, or [`Error::InvalidBox`] when it leaves `[0, 1]`.
    pub fn validate(&self) -> Result<BoxRange> {
        let r = self.range();
        if r.is_valid() {
            Ok(r)
        } else {
            Err(Error::InvalidBox { min: r.min, max: r.max })
        }
    }
}

/// Largest `T′(α)² + n²T(α)² − n²` over `grid` angles, with `T = 1 − 2P` and
/// `n` the box degree. Non-positive for every valid box.
pub fn bernstein_check(b: &RotationBoxCoeffs, grid: usize) -> Result<f64> {
    b.validate()?;
    if grid == 0 {
        return Err(domain("grid", 0.0, "grid ≥ 1"));
    }
    let n2 = (b.degree() * b.degree()) as f64;
    Ok((0..grid)
        .map(|i| {
            let a = TAU * i as f64 / grid as f64;
            let t = 1.0 - 2.0 * b.eval_raw(a);
            let dt = -2.0 * b.derivative(a);
            dt * dt + n2 * t * t - n2
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Fourier coefficients of `α ↦ P(+1|α)` for a quantum model.
///
/// `P(α) = Σ_l a_l e^{ilα}` with `a_l = Σ_{m_k − m_i = l} φ_i* M_{ik} φ_k`.
/// The result has degree `2·max|m|`; coefficients beyond the spread of the
/// occupied labels are never written and stay exactly zero.
pub fn coefficients_from_quantum(model: &QuantumModel) -> Result<RotationBoxCoeffs> {
    let labels = model.representation().slot_labels();
    let n = model.representation().two_j_required() as usize;
    let phi = model.state().amplitudes();
    let m = model.povm().matrix();
    let mut a = vec![C64::new(0.0, 0.0); 2 * n + 1];
    for (i, &li) in labels.iter().enumerate() {
        for (k, &lk) in labels.iter().enumerate() {
            let l = (lk - li) / 2;
            let idx = (l + n as i32) as usize;
            a[idx] += phi[i].conj() * m[(i, k)] * phi[k];
        }
    }
    for l in 0..=n {
        let deviation = (a[n + l] - a[n - l].conj()).norm();
        if deviation > CONJUGATE_TOL {
            return Err(Error::ConjugateSymmetry { l, deviation });
        }
    }
    Ok(RotationBoxCoeffs::from_exponential_coeffs(&a))
}

/// Coefficients of the product `P1·P2`, the probability of `(+1, +1)` for
/// two independent boxes; the degrees add.
pub fn compose_boxes(b1: &RotationBoxCoeffs, b2: &RotationBoxCoeffs) -> RotationBoxCoeffs {
    let (p, q) = (b1.exponential_coeffs(), b2.exponential_coeffs());
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    RotationBoxCoeffs::from_exponential_coeffs(&out)
}

/// Degree-one box `c0 + c1 cos α + s1 sin α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpinBoxParams {
    pub c0: f64,
    pub c1: f64,
    pub s1: f64,
}

impl HalfSpinBoxParams {
    pub fn to_box(self) -> RotationBoxCoeffs {
        RotationBoxCoeffs { cos: vec![self.c0, self.c1], sin: vec![self.s1] }
    }

    fn radius(self) -> f64 {
        self.c1.hypot(self.s1)
    }
}

/// Validity of a degree-one box: `√(c1² + s1²) ≤ min(c0, 1 − c0)`.
pub fn in_r_half(p: HalfSpinBoxParams) -> bool {
    const SLACK: f64 = 1e-12;
    p.c0 >= -SLACK && p.c0 <= 1.0 + SLACK && p.radius() <= p.c0.min(1.0 - p.c0) + SLACK
}

/// Spin-½ models whose mixture reproduces the degree-one box.
///
/// With `r = √(c1² + s1²)` and `τ = atan2(s1, c1)`, the box equals
/// `2r · ½(1 + cos(α − τ)) + (c0 − r) · 1 + (1 − c0 − r) · 0`. The circle
/// point is realized by `U_{−τ}(|−½⟩ + |½⟩)/√2` measured against
/// `(|−½⟩ + |½⟩)/√2`.
pub fn quantum_model_for_half_box(p: HalfSpinBoxParams) -> Result<Vec<(f64, QuantumModel)>> {
    if !in_r_half(p) {
        return Err(Error::InvalidBox { min: p.c0 - p.radius(), max: p.c0 + p.radius() });
    }
    let r = p.radius();
    let c0 = p.c0.clamp(0.0, 1.0);
    let weights = [2.0 * r, (c0 - r).max(0.0), (1.0 - c0 - r).max(0.0)];
    let total: f64 = weights.iter().sum();
    let half = SpinBound::HALF;
    let mut out = Vec::with_capacity(3);
    if weights[0] > 0.0 {
        let rep = Representation::extremes(half);
        let phi = StateVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2])?;
        let tau = p.s1.atan2(p.c1);
        let state = rotate(&rep, &phi, Angle::new(-tau)?)?;
        let model = QuantumModel::new(rep, state, TwoOutcomePovm::projector(&phi))?;
        out.push((weights[0] / total, model));
    }
    if weights[1] > 0.0 {
        out.push((weights[1] / total, constant_model(half, true)));
    }
    if weights[2] > 0.0 {
        out.push((weights[2] / total, constant_model(half, false)));
    }
    Ok(out)
}

/// Random valid box of the given degree.
///
/// Gaussian coefficients with spectral decay are mapped affinely onto
/// `[0, 1]` (probability ½) or onto a random sub-interval.
pub fn sample_valid_box_with<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> RotationBoxCoeffs {
    if degree == 0 {
        return RotationBoxCoeffs::constant(rng.random_range(0.0..=1.0));
    }
    loop {
        let mut cos = vec![0.0];
        let mut sin = Vec::with_capacity(degree);
        for k in 1..=degree {
            let w = 1.0 / (k as f64).sqrt();
            cos.push(w * rng.sample::<f64, _>(StandardNormal));
            sin.push(w * rng.sample::<f64, _>(StandardNormal));
        }
        let raw = RotationBoxCoeffs { cos, sin };
        let r = raw.range();
        let span = r.max - r.min;
        if !(span.is_finite() && span > 1e-9) {
            continue;
        }
        let (lo, hi) = if rng.random_bool(0.5) {
            (0.0, 1.0)
        } else {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            (a.min(b), a.max(b))
        };
        let scale = (hi - lo) / span;
        let mut cos: Vec<f64> = raw.cos.iter().map(|c| c * scale).collect();
        cos[0] = lo + (raw.cos[0] - r.min) * scale;
        let sin = raw.sin.iter().map(|s| s * scale).collect();
        let b = RotationBoxCoeffs { cos, sin };
        // Scaling keeps the critical angles, so the extremes stay at `argmin`
        // and `argmax`; this only guards against rounding.
        let mapped =
            BoxRange { min: b.eval_raw(r.argmin), max: b.eval_raw(r.argmax), argmin: r.argmin, argmax: r.argmax };
        if mapped.is_valid() {
            return b;
        }
    }
}

/// Random valid box from a seed.
pub fn sample_valid_box(degree: usize, seed: u64) -> RotationBoxCoeffs {
    sample_valid_box_with(degree, &mut task_rng(seed, 0))
}
