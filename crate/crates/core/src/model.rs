//! Physical parameters of the curved beam and the piecewise-constant
//! viscoelastic coefficient acting on the axial force.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BresseError, Result};

/// Relative tolerance used when comparing the two wave speeds.
pub const DEFAULT_SPEED_TOL: f64 = 1e-12;

/// Material and geometric constants of the Bresse beam.
///
/// `rho1 = ρA`, `rho2 = ρI`, `k1 = kGA`, `k2 = EI`, `k3 = EA`, `l = 1/R`.
/// The damping coefficient equals `d0` on `(alpha, beta)` and vanishes
/// elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub rho1: f64,
    pub rho2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub l: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            l: 1.0,
            length: 1.0,
            alpha: 0.25,
            beta: 0.75,
            d0: 1.0,
        }
    }
}

impl ModelParams {
    /// Checks positivity of all constants and `0 < alpha < beta < L`.
    pub fn validate(self) -> Result<Self> {
        let named = [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("l", self.l),
            ("L", self.length),
            ("d0", self.d0),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(BresseError::NonPositiveParameter(name.to_string()));
            }
        }
        let interval_ok = self.alpha.is_finite()
            && self.beta.is_finite()
            && 0.0 < self.alpha
            && self.alpha < self.beta
            && self.beta < self.length;
        if !interval_ok {
            return Err(BresseError::BadInterval {
                alpha: self.alpha,
                beta: self.beta,
                length: self.length,
            });
        }
        Ok(self)
    }

    /// Damping coefficient `d(x)`; zero at the jump points themselves.
    pub fn damping_at(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.length).contains(&x) {
            return Err(BresseError::OutOfDomain {
                x,
                length: self.length,
            });
        }
        Ok(if self.alpha < x && x < self.beta {
            self.d0
        } else {
            0.0
        })
    }

    pub fn shear_speed_sq(&self) -> f64 {
        self.k1 / self.rho1
    }

    pub fn bending_speed_sq(&self) -> f64 {
        self.k2 / self.rho2
    }

    pub fn classify_speeds(&self, rel_tol: f64) -> SpeedClass {
        let (a, b) = (self.shear_speed_sq(), self.bending_speed_sq());
        let variant = if (a - b).abs() <= rel_tol * a.max(b) {
            SpeedVariant::EqualSpeeds
        } else {
            SpeedVariant::UnequalSpeeds
        };
        SpeedClass::from(variant)
    }

    /// Copy of `self` with `k2` adjusted so that `k1/rho1 = k2/rho2`.
    pub fn with_equal_speeds(mut self) -> Self {
        self.k2 = self.rho2 * self.k1 / self.rho1;
        self
    }

    /// Hex SHA-256 of the exact bit patterns of all parameters.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in [
            self.rho1, self.rho2, self.k1, self.k2, self.k3, self.l, self.length, self.alpha,
            self.beta, self.d0,
        ] {
            h.update(v.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpeedVariant {
    EqualSpeeds,
    UnequalSpeeds,
}

/// Stability regime together with the predicted exponents: the resolvent
/// grows like `λ^ℓ` along the imaginary axis and the energy of data in the
/// operator domain decays like `t^{-γ}` with `γ = 2/ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedClass {
    pub variant: SpeedVariant,
    pub predicted_resolvent_exponent: u32,
    pub predicted_decay_exponent: f64,
}

impl From<SpeedVariant> for SpeedClass {
    fn from(variant: SpeedVariant) -> Self {
        let ell = match variant {
            SpeedVariant::EqualSpeeds => 2,
            SpeedVariant::UnequalSpeeds => 4,
        };
        SpeedClass {
            variant,
            predicted_resolvent_exponent: ell,
            predicted_decay_exponent: 2.0 / ell as f64,
        }
    }
}
