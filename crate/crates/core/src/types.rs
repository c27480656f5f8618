//! Domain values: the spin bound, rotation angles, correlations and error budgets.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Maximal absolute SO(2) label `J` carried by the transmitted system.
///
/// Stored as the integer `2J` so half-integers are exact and branch
/// conditions on `Jα` never depend on how `J` was typed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinBound {
    two_j: u32,
}

impl SpinBound {
    pub const ZERO: SpinBound = SpinBound { two_j: 0 };
    pub const HALF: SpinBound = SpinBound { two_j: 1 };
    pub const ONE: SpinBound = SpinBound { two_j: 2 };

    pub const fn from_two_j(two_j: u32) -> Self {
        Self { two_j }
    }

    pub const fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn value(self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// `true` for integer spin (bosonic labels), `false` for half-odd-integer.
    pub const fn is_integer(self) -> bool {
        self.two_j.is_multiple_of(2)
    }
}

impl fmt::Display for SpinBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

/// A rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() {
            Ok(Self(radians))
        } else {
            Err(domain("angle", radians, "finite reals"))
        }
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub const fn radians(self) -> f64 {
        self.0
    }

    /// The same rotation expressed in `[0, 2π)`.
    pub fn canonical(self) -> Self {
        let r = self.0.rem_euclid(TAU);
        Self(if r >= TAU { 0.0 } else { r })
    }
}

/// Outcome biases `(E1, E2)` for the unrotated and the rotated setting.
///
/// `E_x = P(+1|x) - P(-1|x)`, so both components lie in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    e1: f64,
    e2: f64,
}

impl Correlation {
    pub fn new(e1: f64, e2: f64) -> Result<Self> {
        check_bias("e1", e1)?;
        check_bias("e2", e2)?;
        Ok(Self { e1, e2 })
    }

    /// Builds a correlation from `P(+1|0)` and `P(+1|α)`.
    pub fn from_probabilities(p_zero: f64, p_alpha: f64) -> Result<Self> {
        Self::new(2.0 * p_zero - 1.0, 2.0 * p_alpha - 1.0)
    }

    /// Like [`Correlation::new`] but clamps components that overshoot
    /// `[-1, 1]` by at most `slack`, which absorbs round-off in mixtures.
    pub fn new_clamped(e1: f64, e2: f64, slack: f64) -> Result<Self> {
        let clamp = |name, v: f64| {
            if v.is_finite() && v.abs() <= 1.0 + slack {
                Ok(v.clamp(-1.0, 1.0))
            } else {
                Err(domain(name, v, "[-1, 1]"))
            }
        };
        Ok(Self { e1: clamp("e1", e1)?, e2: clamp("e2", e2)? })
    }

    pub const fn e1(self) -> f64 {
        self.e1
    }

    pub const fn e2(self) -> f64 {
        self.e2
    }

    pub fn probabilities(self) -> (f64, f64) {
        ((1.0 + self.e1) / 2.0, (1.0 + self.e2) / 2.0)
    }

    pub fn swapped(self) -> Self {
        Self { e1: self.e2, e2: self.e1 }
    }

    pub fn negated(self) -> Self {
        Self { e1: -self.e1, e2: -self.e2 }
    }

    /// The four deterministic behaviours `(±1, ±1)`.
    pub const CORNERS: [Correlation; 4] = [
        Correlation { e1: 1.0, e2: 1.0 },
        Correlation { e1: -1.0, e2: -1.0 },
        Correlation { e1: 1.0, e2: -1.0 },
        Correlation { e1: -1.0, e2: 1.0 },
    ];
}

fn check_bias(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(name, v, "[-1, 1]"))
    }
}

/// The pair `(J, α)` that indexes every correlation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub j: SpinBound,
    pub alpha: Angle,
}

impl ScenarioParams {
    pub fn new(j: SpinBound, alpha: Angle) -> Self {
        Self { j, alpha }
    }

    /// Convenience constructor from `2J` and radians.
    pub fn from_raw(two_j: u32, alpha: f64) -> Result<Self> {
        Ok(Self::new(SpinBound::from_two_j(two_j), Angle::new(alpha)?))
    }

    /// `Jα`, evaluated as `(2J · α) / 2`.
    pub fn j_alpha(self) -> f64 {
        f64::from(self.j.two_j()) * self.alpha.radians() / 2.0
    }

    /// `true` when `|Jα| ≥ π/2`: the rotated state can be orthogonal to the
    /// original one and every correlation is reachable.
    pub fn distinguishable(self) -> bool {
        self.j_alpha().abs() >= FRAC_PI_2
    }

    pub fn with_alpha(self, alpha: Angle) -> Self {
        Self { alpha, ..self }
    }
}

/// Failure probabilities for the spin assumption.
///
/// `epsilon` is epistemic (an eavesdropper may know when the bound fails),
/// `omega` is ontic (nobody can predict it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    epsilon: f64,
    omega: f64,
}

impl ErrorBudget {
    pub const NONE: ErrorBudget = ErrorBudget { epsilon: 0.0, omega: 0.0 };

    pub fn new(epsilon: f64, omega: f64) -> Result<Self> {
        Ok(Self {
            epsilon: check_failure_probability("epsilon", epsilon)?,
            omega: check_failure_probability("omega", omega)?,
        })
    }

    pub const fn epsilon(self) -> f64 {
        self.epsilon
    }

    pub const fn omega(self) -> f64 {
        self.omega
    }
}

pub(crate) fn check_failure_probability(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(domain(name, v, "[0, 1)"))
    }
}
