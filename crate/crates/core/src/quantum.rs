//! Finite-dimensional quantum models of the rotation scenario.
//!
//! A model is a representation `U_α = ⊕_j 1_{n_j} e^{ijα}`, a pure state and
//! a two-outcome POVM. Its statistics are `P(+1|α) = ⟨φ|U_α† M₊ U_α|φ⟩`.
//! Basis slots are ordered level by level in increasing label, with the
//! `n_j` copies of a level adjacent.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{domain, Error, RepresentationError, Result};
use crate::rng::task_rng;
use crate::sets::{clamp_tau, overlap_g, overlap_gamma, Branch};
use crate::types::{Angle, Correlation, ScenarioParams, SpinBound};

pub type C64 = Complex<f64>;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const EFFECT_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-12;

/// One SO(2) level: label `m = two_m / 2` occurring `multiplicity` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub two_m: i32,
    pub multiplicity: usize,
}

/// A unitary representation of SO(2) (or of its double cover) with labels of
/// a single parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    levels: Vec<Level>,
}

impl Representation {
    pub fn new(mut levels: Vec<Level>) -> std::result::Result<Self, RepresentationError> {
        if levels.is_empty() {
            return Err(RepresentationError::Empty);
        }
        levels.sort_by_key(|l| l.two_m);
        for l in &levels {
            if l.multiplicity == 0 {
                return Err(RepresentationError::ZeroMultiplicity { label: f64::from(l.two_m) / 2.0 });
            }
        }
        for w in levels.windows(2) {
            if w[0].two_m == w[1].two_m {
                return Err(RepresentationError::DuplicateLabel { label: f64::from(w[0].two_m) / 2.0 });
            }
            if (w[1].two_m - w[0].two_m) % 2 != 0 {
                return Err(RepresentationError::MixedParity {
                    a: f64::from(w[0].two_m) / 2.0,
                    b: f64::from(w[1].two_m) / 2.0,
                });
            }
        }
        Ok(Self { levels })
    }

    /// All `2J + 1` labels `−J, …, J`, each once.
    pub fn full(j: SpinBound) -> Self {
        Self::with_multiplicity(j, 1).expect("evenly spaced labels are a valid representation")
    }

    /// All `2J + 1` labels with the same multiplicity.
    pub fn with_multiplicity(j: SpinBound, multiplicity: usize) -> std::result::Result<Self, RepresentationError> {
        let tj = j.two_j() as i32;
        Self::new((-tj..=tj).step_by(2).map(|two_m| Level { two_m, multiplicity }).collect())
    }

    /// Only the extreme labels `±J` (a single level when `J = 0`).
    pub fn extremes(j: SpinBound) -> Self {
        let tj = j.two_j() as i32;
        let mut levels = vec![Level { two_m: -tj, multiplicity: 1 }];
        if tj != 0 {
            levels.push(Level { two_m: tj, multiplicity: 1 });
        }
        Self { levels }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// `2·max|m|`, the smallest `2J` this representation respects.
    pub fn two_j_required(&self) -> u32 {
        self.levels.iter().map(|l| l.two_m.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn respects(&self, j: SpinBound) -> bool {
        self.two_j_required() <= j.two_j()
    }

    /// `two_m` of every basis slot.
    pub fn slot_labels(&self) -> Vec<i32> {
        self.levels.iter().flat_map(|l| std::iter::repeat_n(l.two_m, l.multiplicity)).collect()
    }

    /// Tensor product with a trivial `copies`-dimensional representation;
    /// slot `(s, b)` of the result is `s·copies + b`.
    pub fn with_ancilla(&self, copies: usize) -> std::result::Result<Self, RepresentationError> {
        Self::new(self.levels.iter().map(|l| Level { two_m: l.two_m, multiplicity: l.multiplicity * copies }).collect())
    }
}

/// Checks raw labels against a spin bound.
///
/// Labels must share a parity and fit in `[-J, J]`. Labels that differ by
/// integers but are not centred on the half-integer lattice (or overshoot the
/// bound) only fix a projective phase, so the error reports the shift that
/// brings them to the centred form.
pub fn validate_representation(
    levels: &[(f64, usize)],
    bound: f64,
) -> std::result::Result<Representation, RepresentationError> {
    const LATTICE_TOL: f64 = 1e-9;
    if levels.is_empty() {
        return Err(RepresentationError::Empty);
    }
    let labels: Vec<f64> = levels.iter().map(|&(m, _)| m).collect();
    for &(label, mult) in levels {
        if mult == 0 {
            return Err(RepresentationError::ZeroMultiplicity { label });
        }
    }
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            if (a - b).abs() < LATTICE_TOL {
                return Err(RepresentationError::DuplicateLabel { label: a });
            }
            let d = a - b;
            if (d - d.round()).abs() > LATTICE_TOL {
                return Err(RepresentationError::MixedParity { a, b });
            }
        }
    }
    let lo = labels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let required = (hi - lo) / 2.0;
    let on_lattice = labels.iter().all(|m| (2.0 * m - (2.0 * m).round()).abs() < LATTICE_TOL);
    let within = lo >= -bound - LATTICE_TOL && hi <= bound + LATTICE_TOL;
    if on_lattice && within {
        let rep = Representation::new(
            levels.iter().map(|&(m, multiplicity)| Level { two_m: (2.0 * m).round() as i32, multiplicity }).collect(),
        )?;
        return Ok(rep);
    }
    if required <= bound + LATTICE_TOL {
        let shift = -(hi + lo) / 2.0;
        Err(RepresentationError::Shiftable {
            labels: labels.clone(),
            bound,
            shift,
            shifted: labels.iter().map(|m| m + shift).collect(),
            shifted_j: required,
        })
    } else {
        Err(RepresentationError::BoundViolation { labels, bound, required })
    }
}

/// A normalized vector of amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        let norm_sq = amps.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amps })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Ok(Self { amps: amps / C64::from(norm) })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(amps.len(), amps.iter().map(|&a| C64::new(a, 0.0))))
    }

    /// Haar-random state from normalized complex Gaussians.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let v = DVector::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            if let Ok(s) = Self::normalized(v) {
                return s;
            }
        }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }
}

/// A two-outcome measurement given by its `+1` effect `0 ≤ M₊ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoOutcomePovm {
    m_plus: DMatrix<C64>,
}

impl TwoOutcomePovm {
    /// Validates hermiticity and the spectrum, then stores the exactly
    /// Hermitian part.
    pub fn new(m_plus: DMatrix<C64>) -> Result<Self> {
        if !m_plus.is_square() {
            return Err(Error::InvalidEffect(format!("effect is {}x{}", m_plus.nrows(), m_plus.ncols())));
        }
        let asym = (&m_plus - m_plus.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidEffect(format!("not Hermitian (deviation {asym:e})")));
        }
        let m_plus = (&m_plus + m_plus.adjoint()) * C64::from(0.5);
        if m_plus.nrows() > 0 {
            let eig = SymmetricEigen::new(m_plus.clone()).eigenvalues;
            let (lo, hi) = (eig.min(), eig.max());
            if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
                return Err(Error::InvalidEffect(format!("spectrum [{lo}, {hi}] leaves [0, 1]")));
            }
        }
        Ok(Self { m_plus })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m_plus: DMatrix::identity(dim, dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { m_plus: DMatrix::zeros(dim, dim) }
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        Self { m_plus: v * v.adjoint() }
    }

    /// `M₊ = G†G / λ_max(G†G + H†H)` with complex Gaussian `G`, `H`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut gauss =
            || DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let (g, h) = (gauss(), gauss());
        let gg = g.adjoint() * &g;
        let total = &gg + h.adjoint() * &h;
        let total = (&total + total.adjoint()) * C64::from(0.5);
        let top = SymmetricEigen::new(total).eigenvalues.max();
        let m = (&gg + gg.adjoint()) * C64::from(0.5 / top);
        Self { m_plus: m }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m_plus
    }

    pub fn dim(&self) -> usize {
        self.m_plus.nrows()
    }
}

/// Representation, state and measurement of matching dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    rep: Representation,
    state: StateVector,
    povm: TwoOutcomePovm,
}

impl QuantumModel {
    pub fn new(rep: Representation, state: StateVector, povm: TwoOutcomePovm) -> Result<Self> {
        let d = rep.dim();
        for got in [state.dim(), povm.dim()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        Ok(Self { rep, state, povm })
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn povm(&self) -> &TwoOutcomePovm {
        &self.povm
    }
}

fn phase(two_m: i32, alpha: f64) -> C64 {
    C64::from_polar(1.0, f64::from(two_m) * alpha / 2.0)
}

/// `U_α|ψ⟩`: each slot of level `m` picks up `e^{imα}`.
pub fn rotate(rep: &Representation, state: &StateVector, alpha: Angle) -> Result<StateVector> {
    let labels = rep.slot_labels();
    if labels.len() != state.dim() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: state.dim() });
    }
    let a = alpha.radians();
    let amps = DVector::from_iterator(
        labels.len(),
        labels.iter().zip(state.amplitudes().iter()).map(|(&m, &z)| z * phase(m, a)),
    );
    Ok(StateVector { amps })
}

/// `P(+1|α) = ⟨φ|U_α† M₊ U_α|φ⟩`, clamped to `[0, 1]`.
pub fn born_probability(model: &QuantumModel, alpha: Angle) -> f64 {
    let a = alpha.radians();
    let phi = model.state.amplitudes();
    let m = model.povm.matrix();
    let psi: Vec<C64> = model.rep.slot_labels().iter().zip(phi.iter()).map(|(&l, &z)| z * phase(l, a)).collect();
    let mut acc = 0.0;
    for (i, pi) in psi.iter().enumerate() {
        let mut row = C64::new(0.0, 0.0);
        for (k, pk) in psi.iter().enumerate() {
            row += m[(i, k)] * pk;
        }
        acc += (pi.conj() * row).re;
    }
    acc.clamp(0.0, 1.0)
}

/// `(2P(+1|0) − 1, 2P(+1|α) − 1)`.
pub fn correlation_of(model: &QuantumModel, params: ScenarioParams) -> Correlation {
    let p0 = born_probability(model, Angle::ZERO);
    let pa = born_probability(model, params.alpha);
    // Both probabilities are clamped, so the biases are in range.
    Correlation::new_clamped(2.0 * p0 - 1.0, 2.0 * pa - 1.0, 0.0).expect("clamped probabilities give valid biases")
}

/// `(|−J⟩ + |J⟩)/√2` on the two-level representation [`Representation::extremes`].
fn balanced_state() -> StateVector {
    StateVector { amps: DVector::from_element(2, C64::new(FRAC_1_SQRT_2, 0.0)) }
}

/// Model whose correlation is `c1(τ)` (lower) or `c2(τ)` (upper).
///
/// With `φ = (|−J⟩ + |J⟩)/√2`, the lower branch measures `U_τ†|φ⟩` and the
/// upper branch `U_τ|φ⟩`, so `P(+1|α) = cos²(J(τ ± α))`.
pub fn extremal_model(params: ScenarioParams, tau: f64, branch: Branch) -> Result<QuantumModel> {
    let tau = clamp_tau(params, branch, tau)?;
    let rep = Representation::extremes(params.j);
    let phi = balanced_state();
    let signed = match branch {
        Branch::Lower => -tau,
        Branch::Upper => tau,
    };
    let target = rotate(&rep, &phi, Angle::new(signed)?)?;
    let povm = TwoOutcomePovm::projector(&target);
    QuantumModel::new(rep, phi, povm)
}

/// Deterministic model on `{−J, J}` with `M₊ = 1` (`(1, 1)`) or `M₊ = 0` (`(−1, −1)`).
pub fn constant_model(j: SpinBound, outcome_plus: bool) -> QuantumModel {
    let rep = Representation::extremes(j);
    let d = rep.dim();
    let state = if d == 2 { balanced_state() } else { StateVector::from_real(&[1.0]).expect("unit vector") };
    let povm = if outcome_plus { TwoOutcomePovm::identity(d) } else { TwoOutcomePovm::zero(d) };
    QuantumModel { rep, state, povm }
}

/// Convex combination of the models' correlations.
pub fn mix_models(entries: &[(f64, QuantumModel)], params: ScenarioParams) -> Result<Correlation> {
    check_weights(entries.iter().map(|(w, _)| *w))?;
    let (mut e1, mut e2) = (0.0, 0.0);
    for (w, m) in entries {
        let c = correlation_of(m, params);
        e1 += w * c.e1();
        e2 += w * c.e2();
    }
    Correlation::new_clamped(e1, e2, 1e-12)
}

pub(crate) fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0usize;
    for w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::BadWeights(format!("weight {w} is negative or not finite")));
        }
        total += w;
        count += 1;
    }
    if count == 0 || (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::BadWeights(format!("{count} weights sum to {total}")));
    }
    Ok(())
}

/// Writes a member of `Q_{J,α}` as a mixture of at most three extremal models.
///
/// Seen from the corner `(−1, −1)`, the rest of the boundary is, by angle:
/// the arc `c1`, two straight edges through `(1, 1)`, and the arc `c2`. The
/// target is split along the ray from the corner; on an edge the target is
/// inside a triangle with vertices `(−1, −1)`, `(1, 1)` and an arc endpoint.
/// Requires `0 < Jα < π/2`.
pub fn decompose_into_extremal(e: Correlation, params: ScenarioParams) -> Result<Vec<(f64, QuantumModel)>> {
    let (lo1, hi1) = crate::sets::boundary_interval(params, Branch::Lower)?;
    let (lo2, hi2) = crate::sets::boundary_interval(params, Branch::Upper)?;
    let gamma = overlap_gamma(params);
    if overlap_g(e) < gamma - crate::sets::DEFAULT_TOL {
        return Err(domain("overlap g(E) − γ", overlap_g(e) - gamma, "[0, 1]"));
    }
    let j = params.j;
    let (x, y) = (e.e1() + 1.0, e.e2() + 1.0);
    if x.hypot(y) < 1e-15 {
        return Ok(vec![(1.0, constant_model(j, false))]);
    }
    let angle = |c: Correlation| (c.e2() + 1.0).atan2(c.e1() + 1.0);
    let theta = y.atan2(x);
    let c1_top = crate::sets::boundary_curve_c1(params, lo1)?;
    let c2_top = crate::sets::boundary_curve_c2(params, lo2)?;

    let mut out = Vec::with_capacity(3);
    if theta <= angle(c1_top) || theta >= angle(c2_top) {
        let (branch, lo, hi) =
            if theta <= angle(c1_top) { (Branch::Lower, lo1, hi1) } else { (Branch::Upper, lo2, hi2) };
        let tau = bisect_ray(params, branch, lo, hi, theta)?;
        let y_pt = crate::sets::boundary_curve(params, branch, tau)?;
        let (yx, yy) = (y_pt.e1() + 1.0, y_pt.e2() + 1.0);
        let w = ((x * yx + y * yy) / (yx * yx + yy * yy)).clamp(0.0, 1.0);
        out.push((w, extremal_model(params, tau, branch)?));
        out.push((1.0 - w, constant_model(j, false)));
    } else {
        let (apex, branch, tau) = if theta <= std::f64::consts::FRAC_PI_4 {
            (c1_top, Branch::Lower, lo1)
        } else {
            (c2_top, Branch::Upper, lo2)
        };
        let w = barycentric(e, Correlation::CORNERS[1], Correlation::CORNERS[0], apex);
        out.push((w[0], constant_model(j, false)));
        out.push((w[1], constant_model(j, true)));
        out.push((w[2], extremal_model(params, tau, branch)?));
    }
    out.retain(|(w, _)| *w > 0.0);
    let total: f64 = out.iter().map(|(w, _)| w).sum();
    for (w, _) in &mut out {
        *w /= total;
    }
    Ok(out)
}

/// `τ` at which the ray from `(−1, −1)` with angle `theta` meets the arc.
/// The ray angle decreases along `c1` and increases along `c2`.
fn bisect_ray(params: ScenarioParams, branch: Branch, lo: f64, hi: f64, theta: f64) -> Result<f64> {
    let angle_at = |t: f64| -> Result<f64> {
        let c = crate::sets::boundary_curve(params, branch, t)?;
        Ok((c.e2() + 1.0).atan2(c.e1() + 1.0))
    };
    let increasing = branch == Branch::Upper;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let below = angle_at(mid)? < theta;
        if below == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Barycentric weights of `p` in the triangle `(a, b, c)`, clipped at zero.
fn barycentric(p: Correlation, a: Correlation, b: Correlation, c: Correlation) -> [f64; 3] {
    let det = (b.e1() - a.e1()) * (c.e2() - a.e2()) - (c.e1() - a.e1()) * (b.e2() - a.e2());
    let u = ((p.e1() - a.e1()) * (c.e2() - a.e2()) - (c.e1() - a.e1()) * (p.e2() - a.e2())) / det;
    let v = ((b.e1() - a.e1()) * (p.e2() - a.e2()) - (p.e1() - a.e1()) * (b.e2() - a.e2())) / det;
    let w = [(1.0 - u - v).max(0.0), u.max(0.0), v.max(0.0)];
    let s: f64 = w.iter().sum();
    [w[0] / s, w[1] / s, w[2] / s]
}

/// Seeded outcome counts `(n₊, n₋)` for `n` runs at angle `alpha`.
pub fn sample_outcomes(model: &QuantumModel, alpha: Angle, n: u64, seed: u64) -> (u64, u64) {
    let p = born_probability(model, alpha);
    let mut rng = task_rng(seed, 0);
    let plus = sample_binomial(n, p, &mut rng);
    (plus, n - plus)
}

fn sample_binomial(n: u64, p: f64, rng: &mut ChaCha8Rng) -> u64 {
    match Binomial::new(n, p) {
        Ok(d) => d.sample(rng),
        Err(_) => unreachable!("p is clamped to [0, 1]"),
    }
}

/// `|⟨φ|U_α|φ⟩|` for the given representation and state.
pub fn overlap_of_state(rep: &Representation, state: &StateVector, alpha: Angle) -> Result<f64> {
    let rotated = rotate(rep, state, alpha)?;
    Ok(state.amplitudes().dotc(rotated.amplitudes()).norm())
}

/// Smallest `|⟨φ|U_α|φ⟩|` over `n_samples` Haar-random states on all
/// `2J + 1` levels; an upper estimate of [`overlap_gamma`].
pub fn brute_force_min_overlap(params: ScenarioParams, n_samples: usize, seed: u64) -> f64 {
    let rep = Representation::full(params.j);
    let labels = rep.slot_labels();
    let a = params.alpha.radians();
    let phases: Vec<C64> = labels.iter().map(|&m| phase(m, a)).collect();
    let mut rng = task_rng(seed, 0);
    let mut best = f64::INFINITY;
    for _ in 0..n_samples {
        let s = StateVector::random(labels.len(), &mut rng);
        let ov: C64 = s.amplitudes().iter().zip(&phases).map(|(z, ph)| ph * z.norm_sqr()).sum();
        best = best.min(ov.norm());
    }
    best
}

/// Haar-random state and random effect on `rep`.
pub fn random_model<R: Rng + ?Sized>(rep: &Representation, rng: &mut R) -> QuantumModel {
    let d = rep.dim();
    QuantumModel { rep: rep.clone(), state: StateVector::random(d, rng), povm: TwoOutcomePovm::random(d, rng) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{boundary_curve_c1, boundary_curve_c2, in_quantum_set};
    use std::f64::consts::{PI, TAU};

    fn ang(a: f64) -> Angle {
        Angle::new(a).unwrap()
    }

    fn p(two_j: u32, alpha: f64) -> ScenarioParams {
        ScenarioParams::from_raw(two_j, alpha).unwrap()
    }

    #[test]
    fn rotate_examples() {
        let mut rng = task_rng(1, 0);
        let rep = Representation::full(SpinBound::ONE);
        let s = StateVector::random(3, &mut rng);
        assert_eq!(rotate(&rep, &s, ang(0.0)).unwrap(), s);
        let back = rotate(&rep, &s, ang(TAU)).unwrap();
        assert!((back.amplitudes() - s.amplitudes()).norm() < 1e-12);

        let half = Representation::full(SpinBound::HALF);
        let up = StateVector::from_real(&[1.0, 0.0]).unwrap();
        let r = rotate(&half, &up, ang(PI)).unwrap();
        assert!((r.amplitudes()[0] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(rotate(&half, &s, ang(0.1)).is_err());
    }

    #[test]
    fn rotations_compose() {
        let mut rng = task_rng(2, 0);
        let rep = Representation::with_multiplicity(SpinBound::from_two_j(3), 2).unwrap();
        let s = StateVector::random(rep.dim(), &mut rng);
        let two = rotate(&rep, &rotate(&rep, &s, ang(0.3)).unwrap(), ang(1.1)).unwrap();
        let one = rotate(&rep, &s, ang(1.4)).unwrap();
        assert!((two.amplitudes() - one.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn born_examples() {
        let j = SpinBound::ONE;
        let rep = Representation::full(j);
        let top = StateVector::from_real(&[0.0, 0.0, 1.0]).unwrap();
        let ident = QuantumModel::new(rep.clone(), top.clone(), TwoOutcomePovm::identity(3)).unwrap();
        assert_eq!(born_probability(&ident, ang(0.7)), 1.0);
        let proj = QuantumModel::new(rep, top.clone(), TwoOutcomePovm::projector(&top)).unwrap();
        assert!((born_probability(&proj, ang(2.3)) - 1.0).abs() < 1e-15);

        let ext = Representation::extremes(j);
        let phi = balanced_state();
        let m = QuantumModel::new(ext, phi.clone(), TwoOutcomePovm::projector(&phi)).unwrap();
        for a in [0.1, 0.66, 1.2] {
            assert!((born_probability(&m, ang(a)) - a.cos().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn extremal_models_hit_the_boundary() {
        let q = p(2, 0.66);
        let c = correlation_of(&extremal_model(q, 0.0, Branch::Lower).unwrap(), q);
        assert!((c.e1() - 1.0).abs() < 1e-10 && (c.e2() - 0.248_175_451_652_372_9).abs() < 1e-10);
        let c = correlation_of(&extremal_model(q, 0.66, Branch::Upper).unwrap(), q);
        assert!((c.e1() - 0.248_175_451_652_372_9).abs() < 1e-10 && (c.e2() - 1.0).abs() < 1e-10);
        let h = p(1, std::f64::consts::FRAC_PI_2);
        let c = correlation_of(&extremal_model(h, 0.0, Branch::Lower).unwrap(), h);
        assert!((c.e1() - 1.0).abs() < 1e-10 && c.e2().abs() < 1e-10);
        for k in 0..=20 {
            let t = 0.9 * k as f64 / 20.0;
            let want = boundary_curve_c1(q, t).unwrap();
            let got = correlation_of(&extremal_model(q, t, Branch::Lower).unwrap(), q);
            assert!((got.e1() - want.e1()).abs() < 1e-10 && (got.e2() - want.e2()).abs() < 1e-10);
            let t2 = 0.66 + t;
            let want = boundary_curve_c2(q, t2).unwrap();
            let got = correlation_of(&extremal_model(q, t2, Branch::Upper).unwrap(), q);
            assert!((got.e1() - want.e1()).abs() < 1e-10 && (got.e2() - want.e2()).abs() < 1e-10);
        }
        assert!(extremal_model(q, 1.0, Branch::Lower).is_err());
    }

    #[test]
    fn coin_model_is_unbiased() {
        let rep = Representation::full(SpinBound::ONE);
        let mut rng = task_rng(3, 0);
        let s = StateVector::random(3, &mut rng);
        let half = TwoOutcomePovm::new(DMatrix::identity(3, 3) * C64::from(0.5)).unwrap();
        let m = QuantumModel::new(rep, s, half).unwrap();
        let c = correlation_of(&m, p(2, 0.4));
        assert!(c.e1().abs() < 1e-15 && c.e2().abs() < 1e-15);
    }

    #[test]
    fn mix_examples() {
        let q = p(2, 0.66);
        let j = q.j;
        let single = mix_models(&[(1.0, constant_model(j, true))], q).unwrap();
        assert_eq!((single.e1(), single.e2()), (1.0, 1.0));
        let half = mix_models(&[(0.5, constant_model(j, true)), (0.5, constant_model(j, false))], q).unwrap();
        assert_eq!((half.e1(), half.e2()), (0.0, 0.0));
        assert!(mix_models(&[(0.6, constant_model(j, true))], q).is_err());
        assert!(mix_models(&[(1.2, constant_model(j, true)), (-0.2, constant_model(j, false))], q).is_err());
    }

    #[test]
    fn three_boundary_models_mix_to_interior_point() {
        let q = p(2, 0.66);
        let pts: Vec<(f64, Branch)> = vec![(0.2, Branch::Lower), (0.9, Branch::Upper), (1.3, Branch::Upper)];
        let models: Vec<QuantumModel> = pts.iter().map(|&(t, b)| extremal_model(q, t, b).unwrap()).collect();
        let cs: Vec<Correlation> = models.iter().map(|m| correlation_of(m, q)).collect();
        let target = Correlation::new(
            (cs[0].e1() + cs[1].e1() + cs[2].e1()) / 3.0,
            (cs[0].e2() + cs[1].e2() + cs[2].e2()) / 3.0,
        )
        .unwrap();
        let w = barycentric(target, cs[0], cs[1], cs[2]);
        let entries: Vec<(f64, QuantumModel)> = w.iter().copied().zip(models).collect();
        let got = mix_models(&entries, q).unwrap();
        assert!((got.e1() - target.e1()).abs() < 1e-9 && (got.e2() - target.e2()).abs() < 1e-9);
    }

    #[test]
    fn decomposition_reproduces_targets() {
        let q = p(3, 0.5);
        let mut rng = task_rng(4, 0);
        let mut hits = 0;
        while hits < 300 {
            let e = Correlation::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)).unwrap();
            if !in_quantum_set(e, q, 0.0) {
                continue;
            }
            hits += 1;
            let parts = decompose_into_extremal(e, q).unwrap();
            assert!(parts.len() <= 3);
            let got = mix_models(&parts, q).unwrap();
            assert!((got.e1() - e.e1()).abs() < 1e-9, "{e:?} -> {got:?}");
            assert!((got.e2() - e.e2()).abs() < 1e-9, "{e:?} -> {got:?}");
        }
        for e in [Correlation::CORNERS[0], Correlation::CORNERS[1]] {
            let got = mix_models(&decompose_into_extremal(e, q).unwrap(), q).unwrap();
            assert!((got.e1() - e.e1()).abs() < 1e-12 && (got.e2() - e.e2()).abs() < 1e-12);
        }
        assert!(decompose_into_extremal(Correlation::CORNERS[2], q).is_err());
    }

    #[test]
    fn sampling_examples() {
        let j = SpinBound::ONE;
        assert_eq!(sample_outcomes(&constant_model(j, true), ang(0.3), 100, 5), (100, 0));
        assert_eq!(sample_outcomes(&constant_model(j, false), ang(0.3), 100, 5), (0, 100));
        let ext = Representation::extremes(j);
        let half = TwoOutcomePovm::new(DMatrix::identity(2, 2) * C64::from(0.5)).unwrap();
        let coin = QuantumModel::new(ext, balanced_state(), half).unwrap();
        let (plus, minus) = sample_outcomes(&coin, ang(0.0), 1_000_000, 42);
        assert_eq!(plus + minus, 1_000_000);
        assert!((plus as i64 - 500_000).abs() <= 1500);
        assert_eq!(sample_outcomes(&coin, ang(0.0), 1000, 9), sample_outcomes(&coin, ang(0.0), 1000, 9));
    }

    #[test]
    fn representation_validation() {
        let ok = validate_representation(&[(-1.0, 1), (0.0, 2), (1.0, 1)], 1.0).unwrap();
        assert_eq!(ok.dim(), 4);
        match validate_representation(&[(-0.25, 1), (0.75, 1)], 0.75) {
            Err(RepresentationError::Shiftable { shifted, shifted_j, .. }) => {
                assert!((shifted[0] + 0.5).abs() < 1e-12 && (shifted[1] - 0.5).abs() < 1e-12);
                assert!((shifted_j - 0.5).abs() < 1e-12);
            }
            other => panic!("expected shift hint, got {other:?}"),
        }
        assert!(matches!(
            validate_representation(&[(0.0, 1), (0.5, 1)], 1.0),
            Err(RepresentationError::MixedParity { .. })
        ));
        assert!(matches!(
            validate_representation(&[(-2.0, 1), (1.0, 1)], 1.0),
            Err(RepresentationError::BoundViolation { .. })
        ));
        assert!(matches!(
            validate_representation(&[(0.0, 1), (2.0, 1)], 1.0),
            Err(RepresentationError::Shiftable { .. })
        ));
        assert!(matches!(validate_representation(&[], 1.0), Err(RepresentationError::Empty)));
        assert!(matches!(validate_representation(&[(0.0, 0)], 1.0), Err(RepresentationError::ZeroMultiplicity { .. })));
        assert!(matches!(
            validate_representation(&[(1.0, 1), (1.0, 1)], 1.0),
            Err(RepresentationError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn povm_validation() {
        let bad =
            DMatrix::from_row_slice(2, 2, &[C64::from(0.5), C64::new(0.0, 0.1), C64::new(0.0, 0.1), C64::from(0.5)]);
        assert!(TwoOutcomePovm::new(bad).is_err());
        assert!(TwoOutcomePovm::new(DMatrix::identity(2, 2) * C64::from(1.01)).is_err());
        let mut rng = task_rng(5, 0);
        for _ in 0..50 {
            let m = TwoOutcomePovm::random(4, &mut rng);
            assert!(TwoOutcomePovm::new(m.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn overlap_minimizer_attains_gamma() {
        let q = p(2, 0.66);
        let full = Representation::full(q.j);
        let s = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).unwrap();
        let ov = overlap_of_state(&full, &s, q.alpha).unwrap();
        assert!((ov - 0.66f64.cos()).abs() < 1e-14);
        assert!((brute_force_min_overlap(p(2, 0.0), 100, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_overlap_approaches_gamma() {
        let q = p(2, 0.66);
        let v = brute_force_min_overlap(q, 100_000, 11);
        let g = overlap_gamma(q);
        assert!(v >= g - 1e-15 && v - g < 1e-3, "{v} vs {g}");
    }
}
