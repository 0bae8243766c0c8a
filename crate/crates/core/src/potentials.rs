//! Pair potentials `V(r)` with closed-form first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A radial pair potential. All families are attractive for `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Potential {
    /// `V(r) = -k/r`
    Newtonian { k: f64 },
    /// `V(r) = -k/r²`, the critical inverse-square case.
    Jacobi { k: f64 },
    /// `V(r) = -k/r^α`
    Homogeneous { k: f64, alpha: f64 },
    /// `V(r) = k r²`
    Harmonic { k: f64 },
}

/// `(V(r), V'(r), V''(r))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl Potential {
    pub fn newtonian(k: f64) -> Self {
        Potential::Newtonian { k }
    }

    pub fn jacobi(k: f64) -> Self {
        Potential::Jacobi { k }
    }

    pub fn homogeneous(k: f64, alpha: f64) -> Self {
        Potential::Homogeneous { k, alpha }
    }

    pub fn harmonic(k: f64) -> Self {
        Potential::Harmonic { k }
    }

    pub fn coupling(&self) -> f64 {
        match *self {
            Potential::Newtonian { k }
            | Potential::Jacobi { k }
            | Potential::Homogeneous { k, .. }
            | Potential::Harmonic { k } => k,
        }
    }

    /// Check `k > 0` and `α > 0`.
    pub fn validate(&self) -> Result<()> {
        let k = self.coupling();
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidInput(format!("potential coupling must be positive, got {k}")));
        }
        if let Potential::Homogeneous { alpha, .. } = *self {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidInput(format!("homogeneous exponent must be positive, got {alpha}")));
            }
        }
        Ok(())
    }

    /// True for the families that blow up at `r = 0`.
    pub fn is_singular(&self) -> bool {
        !matches!(self, Potential::Harmonic { .. })
    }

    /// The exponent `α` of `-k/r^α` for the singular families.
    pub fn singular_exponent(&self) -> Option<f64> {
        match *self {
            Potential::Newtonian { .. } => Some(1.0),
            Potential::Jacobi { .. } => Some(2.0),
            Potential::Homogeneous { alpha, .. } => Some(alpha),
            Potential::Harmonic { .. } => None,
        }
    }

    /// `r³V'(r)` is constant exactly for the inverse-square law, so balance
    /// conditions against a centrifugal term do not fix a length scale.
    pub fn is_scale_degenerate(&self) -> bool {
        self.singular_exponent() == Some(2.0)
    }

    /// Whether `V' ≥ 0` on the whole domain, decided per family.
    pub fn is_attractive(&self) -> bool {
        self.coupling() >= 0.0
    }

    pub fn eval(&self, r: f64) -> Result<Derivatives> {
        if self.is_singular() && !(r > 0.0) || !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!("potential evaluated at r = {r}")));
        }
        let d = match *self {
            Potential::Newtonian { k } => {
                let inv = 1.0 / r;
                Derivatives { value: -k * inv, first: k * inv * inv, second: -2.0 * k * inv * inv * inv }
            }
            Potential::Jacobi { k } => {
                let inv2 = 1.0 / (r * r);
                Derivatives { value: -k * inv2, first: 2.0 * k * inv2 / r, second: -6.0 * k * inv2 * inv2 }
            }
            Potential::Homogeneous { k, alpha } => {
                let p = r.powf(-alpha);
                Derivatives {
                    value: -k * p,
                    first: alpha * k * p / r,
                    second: -alpha * (alpha + 1.0) * k * p / (r * r),
                }
            }
            Potential::Harmonic { k } => Derivatives { value: k * r * r, first: 2.0 * k * r, second: 2.0 * k },
        };
        Ok(d)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.eval(r).map(|d| d.value)
    }

    pub fn first(&self, r: f64) -> Result<f64> {
        self.eval(r).map(|d| d.first)
    }
}

/// A potential applied to a pair of bodies, optionally scaled by `m_j m_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    pub potential: Potential,
    #[serde(default)]
    pub mass_weighted: bool,
}

impl PairPotential {
    pub fn new(potential: Potential, mass_weighted: bool) -> Self {
        Self { potential, mass_weighted }
    }

    pub fn weight(&self, mj: f64, mk: f64) -> f64 {
        if self.mass_weighted {
            mj * mk
        } else {
            1.0
        }
    }

    pub fn eval(&self, r: f64, mj: f64, mk: f64) -> Result<Derivatives> {
        let w = self.weight(mj, mk);
        let d = self.potential.eval(r)?;
        Ok(Derivatives { value: w * d.value, first: w * d.first, second: w * d.second })
    }
}

impl From<Potential> for PairPotential {
    fn from(potential: Potential) -> Self {
        Self { potential, mass_weighted: false }
    }
}
