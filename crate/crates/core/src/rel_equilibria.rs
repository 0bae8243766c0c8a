//! Relative equilibria of the n-body problem for the double planar rotation group.
//!
//! `q(t) = exp(t hat(ω)) q₀` solves the equations of motion exactly when
//! `∇_j U(q₀) = −m_j hat(ω)² q_j` for every body, i.e. when `q₀` is a critical
//! point of the augmented potential `U + ½ Σ m_j q_jᵀ hat(ω)² q_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::{GroupVelocity, Vec4, ZERO_TOL};
use crate::nbody::{grad_u, potential_energy, Configuration, PhaseState};
use crate::potentials::PairPotential;

/// Residual tolerance on unit-scale configurations.
pub const RE_TOL: f64 = 1e-9;

/// Residual below which a configuration counts as balanced.
pub fn re_tolerance(c: &Configuration) -> f64 {
    RE_TOL * c.diameter().max(1.0)
}

fn hat_squared(omega: GroupVelocity, q: &Vec4) -> Vec4 {
    q.component_mul(&omega.hat_squared_diagonal())
}

/// `U(q) − ½ Σ_j m_j |hat(ω) q_j|²`.
pub fn augmented_potential(c: &Configuration, omega: GroupVelocity, pp: &PairPotential) -> Result<f64> {
    let u = potential_energy(c, pp)?;
    let spin: f64 = c.masses.iter().zip(&c.positions).map(|(m, q)| m * q.dot(&hat_squared(omega, q))).sum();
    Ok(u + 0.5 * spin)
}

/// Per-body `∇_j U + m_j hat(ω)² q_j`; this is also the gradient of the
/// augmented potential.
pub fn re_residual(c: &Configuration, omega: GroupVelocity, pp: &PairPotential) -> Result<Vec<Vec4>> {
    let g = grad_u(c, pp)?;
    Ok(g.into_iter()
        .zip(c.masses.iter().zip(&c.positions))
        .map(|(gj, (m, q))| gj + hat_squared(omega, q) * *m)
        .collect())
}

fn max_norm(v: &[Vec4]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Angular rate on one principal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRate {
    /// `|ω_j|`; the sign is not fixed by the balance equations.
    Determined(f64),
    /// No body has a component in this plane, so any rate works.
    Undetermined,
}

impl AngularRate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            AngularRate::Determined(w) => Some(w),
            AngularRate::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct REResult {
    pub omega1: AngularRate,
    pub omega2: AngularRate,
    pub residual_norm: f64,
    pub is_central: bool,
    /// `−ω²` of the common rate when the configuration is central.
    pub lambda: Option<f64>,
}

impl REResult {
    /// Group velocity with undetermined components replaced by `fill`.
    pub fn group_velocity(&self, fill: f64) -> GroupVelocity {
        GroupVelocity::new(self.omega1.value().unwrap_or(fill), self.omega2.value().unwrap_or(fill))
    }
}

/// Find `(ω₁², ω₂²)` with `∇_j U = m_j ω² q_j` on each plane, by least squares.
///
/// Positions are used as given: the rotation is about the origin, which must
/// be the centre of mass for a genuine relative equilibrium, and the
/// configuration is assumed aligned with the principal planes.
pub fn solve_balanced_omega(c: &Configuration, pp: &PairPotential) -> Result<REResult> {
    c.validate()?;
    let g = grad_u(c, pp)?;
    let tol = re_tolerance(c);
    let mut rates = [AngularRate::Undetermined; 2];
    let mut squares = [None; 2];
    for (block, idx) in [(0usize, [0usize, 1]), (1, [2, 3])] {
        let (mut num, mut den) = (0.0, 0.0);
        for ((gj, q), m) in g.iter().zip(&c.positions).zip(&c.masses) {
            for &i in &idx {
                num += m * q[i] * gj[i];
                den += m * m * q[i] * q[i];
            }
        }
        if den > ZERO_TOL * ZERO_TOL {
            let w2 = num / den;
            if w2 < -tol {
                return Err(Error::NotBalanced { residual: w2.abs(), tolerance: tol });
            }
            let w2 = w2.max(0.0);
            squares[block] = Some(w2);
            rates[block] = AngularRate::Determined(w2.sqrt());
        }
    }
    let omega = GroupVelocity::new(squares[0].unwrap_or(0.0).sqrt(), squares[1].unwrap_or(0.0).sqrt());
    let residual_norm = max_norm(&re_residual(c, omega, pp)?);
    if !(residual_norm < tol) {
        return Err(Error::NotBalanced { residual: residual_norm, tolerance: tol });
    }
    let common = match squares {
        [Some(a), Some(b)] if (a - b).abs() < tol => Some(0.5 * (a + b)),
        [Some(a), None] | [None, Some(a)] => Some(a),
        [None, None] => Some(0.0),
        _ => None,
    };
    Ok(REResult {
        omega1: rates[0],
        omega2: rates[1],
        residual_norm,
        is_central: common.is_some(),
        lambda: common.map(|w2| -w2),
    })
}

/// Least-squares `λ` for `∇U + λ M q = 0` and whether the residual vanishes.
pub fn is_central(c: &Configuration, pp: &PairPotential) -> Result<(bool, f64)> {
    c.validate()?;
    let g = grad_u(c, pp)?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((gj, q), m) in g.iter().zip(&c.positions).zip(&c.masses) {
        num += m * q.dot(gj);
        den += m * m * q.norm_squared();
    }
    let lambda = if den > 0.0 { -num / den } else { 0.0 };
    let residual = g
        .iter()
        .zip(&c.positions)
        .zip(&c.masses)
        .map(|((gj, q), m)| (gj + q * (lambda * m)).norm())
        .fold(0.0, f64::max);
    Ok((residual < re_tolerance(c), lambda))
}

/// Initial state of the relative equilibrium: momenta `m_j hat(ω) q_j`.
pub fn re_initial_state(c: &Configuration, omega: GroupVelocity) -> PhaseState {
    let momenta = c
        .positions
        .iter()
        .zip(&c.masses)
        .map(|(q, m)| crate::geom4::infinitesimal_action(omega, q) * *m)
        .collect();
    PhaseState { config: c.clone(), momenta }
}

/// Bodies on a line through the origin: `q_j = λ_j q₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearSpec {
    pub q0: [f64; 4],
    pub lambdas: Vec<f64>,
}

impl CollinearSpec {
    pub fn validate(&self) -> Result<()> {
        if !(Vec4::from(self.q0).norm() > 0.0) {
            return Err(Error::InvalidInput("collinear direction q0 must be nonzero".into()));
        }
        for (i, a) in self.lambdas.iter().enumerate() {
            if !(a.is_finite() && *a != 0.0) {
                return Err(Error::InvalidInput(format!("λ_{i} must be finite and nonzero")));
            }
            if self.lambdas[..i].contains(a) {
                return Err(Error::InvalidInput(format!("λ values must be distinct, {a} repeats")));
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<Vec4> {
        let q0 = Vec4::from(self.q0);
        self.lambdas.iter().map(|l| q0 * *l).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollinearCase {
    /// The line lies in `Oxy`; only `ω₁` matters.
    InOxy,
    /// The line lies in `Ozw`; only `ω₂` matters.
    InOzw,
    /// The line meets neither plane; the two rates must agree.
    Oblique,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearReport {
    pub case: CollinearCase,
    /// Per-body residual of the scalar balance condition.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// For the oblique case, the full residual of the rescaled projections
    /// onto `Oxy` and `Ozw`, each treated as a planar configuration.
    pub projection_residuals: Option<[f64; 2]>,
}

/// Scalar balance on a line: `Σ_i V'(|λ_i − λ_j| |q₀|) sgn(λ_j − λ_i) − ω² m_j λ_j |q₀|`.
fn scalar_condition(lambdas: &[f64], norm: f64, omega2: f64, masses: &[f64], pp: &PairPotential) -> Result<Vec<f64>> {
    let n = lambdas.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            if i == j {
                continue;
            }
            let d = (lambdas[i] - lambdas[j]).abs() * norm;
            s += pp.eval(d, masses[i], masses[j])?.first * (lambdas[j] - lambdas[i]).signum();
        }
        out.push(s - omega2 * masses[j] * lambdas[j] * norm);
    }
    Ok(out)
}

/// Case analysis of a collinear candidate relative equilibrium.
///
/// The oblique case requires `ω₁² = ω₂²`; the sign of each rate is free since
/// only `hat(ω)²` enters the balance equations.
pub fn collinear_re_classify(
    spec: &CollinearSpec,
    omega: GroupVelocity,
    pp: &PairPotential,
    masses: &[f64],
) -> Result<CollinearReport> {
    spec.validate()?;
    if masses.len() != spec.lambdas.len() {
        return Err(Error::InvalidInput(format!("{} masses for {} bodies", masses.len(), spec.lambdas.len())));
    }
    let q0 = Vec4::from(spec.q0);
    let norm = q0.norm();
    let xy = q0.x.hypot(q0.y);
    let zw = q0.z.hypot(q0.w);
    let (w1s, w2s) = (omega.omega1 * omega.omega1, omega.omega2 * omega.omega2);
    let (case, w2) = if zw <= ZERO_TOL * norm {
        (CollinearCase::InOxy, w1s)
    } else if xy <= ZERO_TOL * norm {
        (CollinearCase::InOzw, w2s)
    } else if (w1s - w2s).abs() <= RE_TOL * w1s.max(w2s).max(1.0) {
        (CollinearCase::Oblique, 0.5 * (w1s + w2s))
    } else {
        return Err(Error::InvalidCase(format!(
            "line meets neither principal plane but ω₁² = {w1s} differs from ω₂² = {w2s}"
        )));
    };
    let residuals = scalar_condition(&spec.lambdas, norm, w2, masses, pp)?;
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let projection_residuals = if case == CollinearCase::Oblique {
        let rate = w2.sqrt();
        let mut out = [0.0; 2];
        for (slot, (range, omega)) in [(0..2, GroupVelocity::new(rate, 0.0)), (2..4, GroupVelocity::new(0.0, rate))]
            .into_iter()
            .enumerate()
        {
            let mut dir = Vec4::zeros();
            for i in range {
                dir[i] = q0[i];
            }
            let scaled = dir * (norm / dir.norm());
            let c = Configuration { masses: masses.to_vec(), positions: spec.lambdas.iter().map(|l| scaled * *l).collect() };
            out[slot] = max_norm(&re_residual(&c, omega, pp)?);
        }
        Some(out)
    } else {
        None
    };
    Ok(CollinearReport { case, residuals, max_residual, projection_residuals })
}
