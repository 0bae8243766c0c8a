//! One body in a central force field on R^4.
//!
//! With `H = |p|²/2 + V(|q|)` the torus momentum `μ = (μ₁, μ₂)` is conserved
//! and the motion reduces to the radii `(r₁, r₂)` of the projections onto the
//! `Oxy` and `Ozw` planes with the reduced Hamiltonian
//! `½(p_r1² + p_r2²) + μ₁²/(2r₁²) + μ₂²/(2r₂²) + V(√(r₁² + r₂²))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::{momentum_map_single, to_double_polar, Momentum, Vec4};
use crate::integrator::{leapfrog_step, segment_min_norm, IntegratorSettings, Outcome};
use crate::potentials::Potential;
use crate::roots::{bisect, require_roots, LogGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCentralState {
    pub r1: f64,
    pub r2: f64,
    pub p_r1: f64,
    pub p_r2: f64,
    pub mu: Momentum,
}

/// Polar coordinates on the reduced plane: `r₁ = R cos φ`, `r₂ = R sin φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarReducedState {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

impl ReducedCentralState {
    pub fn from_cartesian(q: &Vec4, p: &Vec4) -> Self {
        let dp = to_double_polar(q, Some(p));
        let m = dp.momenta.expect("momenta requested");
        Self { r1: dp.r1, r2: dp.r2, p_r1: m.p_r1, p_r2: m.p_r2, mu: Momentum::new(m.p_theta1, m.p_theta2) }
    }

    pub fn to_polar(&self) -> PolarReducedState {
        let r = self.r1.hypot(self.r2);
        let phi = self.r2.atan2(self.r1);
        let (p_r, p_phi) = if r > 0.0 {
            ((self.r1 * self.p_r1 + self.r2 * self.p_r2) / r, self.r1 * self.p_r2 - self.r2 * self.p_r1)
        } else {
            (self.p_r1, 0.0)
        };
        PolarReducedState { r, phi, p_r, p_phi }
    }
}

fn centrifugal(mu: f64, r: f64) -> Result<f64> {
    if mu == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(mu * mu / (2.0 * r * r))
    } else {
        Err(Error::Domain(format!("centrifugal term with momentum {mu} at zero radius")))
    }
}

/// `Ṽ = μ₁²/(2r₁²) + μ₂²/(2r₂²) + V(√(r₁² + r₂²))`.
pub fn effective_potential(mu: Momentum, r1: f64, r2: f64, v: &Potential) -> Result<f64> {
    Ok(centrifugal(mu.mu1, r1)? + centrifugal(mu.mu2, r2)? + v.value(r1.hypot(r2))?)
}

/// Whether `(r₁, r₂)` lies in the Hill region `Ṽ ≤ h`.
pub fn hill_allowed(h: f64, mu: Momentum, r1: f64, r2: f64, v: &Potential) -> Result<bool> {
    Ok(effective_potential(mu, r1, r2, v)? <= h)
}

pub fn reduced_energy(s: &ReducedCentralState, v: &Potential) -> Result<f64> {
    Ok(0.5 * (s.p_r1 * s.p_r1 + s.p_r2 * s.p_r2) + effective_potential(s.mu, s.r1, s.r2, v)?)
}

/// Angular rates `(θ̇₁, θ̇₂) = (μ₁/r₁², μ₂/r₂²)`.
pub fn reconstruction_rates(s: &ReducedCentralState) -> (f64, f64) {
    let rate = |mu: f64, r: f64| if mu == 0.0 { 0.0 } else { mu / (r * r) };
    (rate(s.mu.mu1, s.r1), rate(s.mu.mu2, s.r2))
}

/// Angle `φ ∈ (0, π/2)` of the proportional-motion manifold, `tan φ = √(μ₂/μ₁)`.
///
/// On this ray the reduced force has no `φ` component, so `P_φ = 0` is
/// preserved and `r₁/r₂` stays constant.
pub fn proportional_phi(mu: Momentum) -> Result<Vec<f64>> {
    if mu.is_zero() {
        return Err(Error::ZeroMomentum);
    }
    let ratio = mu.mu2 / mu.mu1;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::NoRealRoot(format!(
            "tan φ = √(μ₂/μ₁) has no solution in (0, π/2) for μ = ({}, {})",
            mu.mu1, mu.mu2
        )));
    }
    Ok(vec![ratio.sqrt().atan()])
}

/// Radii `R₀` of the circular proportional motions: roots of
/// `R³V'(R) = (|μ₁| + |μ₂|)²`.
pub fn radial_equilibrium(v: &Potential, mu: Momentum) -> Result<Vec<f64>> {
    v.validate()?;
    if v.is_scale_degenerate() {
        return Err(Error::DegeneratePotential(
            "R³V'(R) is constant for the inverse-square potential".into(),
        ));
    }
    let l2 = (mu.mu1.abs() + mu.mu2.abs()).powi(2);
    let f = |r: f64| {
        let d = v.eval(r).expect("r > 0 on the scan grid");
        r * r * r * d.first - l2
    };
    let df = |r: f64| {
        let d = v.eval(r).expect("r > 0 on the scan grid");
        3.0 * r * r * d.first + r * r * r * d.second
    };
    require_roots(f, df, LogGrid::default(), "radial equilibrium")
}

/// Eccentricity vector `(|p|² − k/|q|) q − (q·p) p`.
pub fn lrl_vector(q: &Vec4, p: &Vec4, k: f64) -> Result<Vec4> {
    let r = q.norm();
    if !(r > 0.0) {
        return Err(Error::Domain("eccentricity vector at the origin".into()));
    }
    Ok(q * (p.norm_squared() - k / r) - p * q.dot(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerOrbit {
    /// Semi-latus rectum `(μ₁² + μ₂²)/k`.
    pub p: f64,
    pub eccentricity: f64,
    /// Set for unbound orbits (`h ≥ 0`, so `ε ≥ 1`).
    pub unbound: bool,
}

/// Conic parameters of a Kepler orbit with energy `h` and momentum `μ`.
///
/// `μ₁² + μ₂²` stands in for `|q ∧ p|²`, which is exact only for orbits in
/// `Oxy` or `Ozw`. An orbit plane tilted between them carries angular
/// momentum outside the torus and has a smaller eccentricity than reported.
pub fn kepler_orbit_params(h: f64, mu: Momentum, k: f64) -> Result<KeplerOrbit> {
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!("Kepler coupling must be positive, got {k}")));
    }
    let l2 = mu.mu1 * mu.mu1 + mu.mu2 * mu.mu2;
    let radicand = 1.0 + 2.0 * h * l2 / (k * k);
    if radicand < 0.0 {
        return Err(Error::InvalidRadicand(radicand));
    }
    let eccentricity = radicand.sqrt();
    Ok(KeplerOrbit { p: l2 / k, eccentricity, unbound: h >= 0.0 })
}

/// Whether an orbit with momentum `μ` can reach the origin. Exact-zero test.
///
/// Supported for `V = -k/r^α` with `α < 2`, where the centrifugal barrier
/// dominates near the origin whenever `μ ≠ 0`.
pub fn is_collision_possible(mu: Momentum, v: &Potential) -> Result<bool> {
    match v.singular_exponent() {
        Some(alpha) if alpha < 2.0 => Ok(mu.is_zero()),
        _ => Err(Error::UnsupportedPotential(format!("collision criterion needs -k/r^α with α < 2, got {v:?}"))),
    }
}

/// Smallest radius `|q|` compatible with energy `h` and momentum `μ`.
///
/// `μ₁²/cos²φ + μ₂²/sin²φ ≥ (|μ₁| + |μ₂|)²`, so every allowed point has
/// `L²/(2|q|²) + V(|q|) ≤ h` with `L = |μ₁| + |μ₂|`; the bound is the
/// smallest such radius. Zero when `μ = 0`.
pub fn hill_min_radius(h: f64, mu: Momentum, v: &Potential) -> Result<f64> {
    let l = mu.mu1.abs() + mu.mu2.abs();
    if l == 0.0 {
        return Ok(0.0);
    }
    let g = |r: f64| l * l / (2.0 * r * r) + v.value(r).expect("r > 0") - h;
    let grid = LogGrid { lo: 1e-8, hi: 1e8, nodes: 1600 };
    let pts: Vec<f64> = grid.points().collect();
    if g(pts[0]) <= 0.0 {
        return Err(Error::NotApplicable("centrifugal barrier does not dominate near the origin".into()));
    }
    for w in pts.windows(2) {
        if g(w[1]) <= 0.0 {
            return Ok(bisect(&g, w[0], w[1]));
        }
    }
    Err(Error::NoRoot(format!("energy {h} is below the effective potential everywhere")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralSample {
    pub t: f64,
    pub q: [f64; 4],
    pub p: [f64; 4],
    pub energy: f64,
    pub mu: Momentum,
    pub a_xy: f64,
    pub a_zw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralTrajectory {
    pub samples: Vec<CentralSample>,
    pub outcome: Outcome,
}

pub fn cartesian_energy(q: &Vec4, p: &Vec4, v: &Potential) -> Result<f64> {
    Ok(0.5 * p.norm_squared() + v.value(q.norm())?)
}

fn sample(t: f64, q: &Vec4, p: &Vec4, v: &Potential) -> Result<CentralSample> {
    let mu = momentum_map_single(q, p);
    Ok(CentralSample {
        t,
        q: (*q).into(),
        p: (*p).into(),
        energy: cartesian_energy(q, p, v)?,
        mu,
        // A = ½ r² θ̇ = ½ (x ẏ − y ẋ) for unit mass
        a_xy: 0.5 * mu.mu1,
        a_zw: 0.5 * mu.mu2,
    })
}

/// Leapfrog integration of `H = |p|²/2 + V(|q|)` in Cartesian coordinates.
///
/// Stops with [`Outcome::Collision`] when `|q|` along a drift segment falls
/// below the collision threshold.
pub fn integrate_central(q0: Vec4, p0: Vec4, v: &Potential, settings: &IntegratorSettings) -> Result<CentralTrajectory> {
    v.validate()?;
    settings.validate()?;
    if q0.norm() < settings.collision_threshold {
        return Err(Error::InvalidInput("initial position is inside the collision threshold".into()));
    }
    let mut q = [q0];
    let mut p = [p0];
    let mut samples = vec![sample(0.0, &q0, &p0, v)?];
    let mut accel = |q: &[Vec4], f: &mut [Vec4]| -> Result<()> {
        let r = q[0].norm();
        f[0] = -q[0] * (v.first(r)? / r);
        Ok(())
    };
    for step in 1..=settings.steps {
        let before = q[0];
        let half_kick = {
            let mut f = [Vec4::zeros()];
            accel(&q, &mut f)?;
            p[0] + f[0] * (0.5 * settings.dt)
        };
        let after = before + half_kick * settings.dt;
        let min_distance = segment_min_norm(&before, &after);
        let t = step as f64 * settings.dt;
        if min_distance < settings.collision_threshold {
            return Ok(CentralTrajectory { samples, outcome: Outcome::Collision { time: t, step, min_distance } });
        }
        leapfrog_step(&mut q, &mut p, &[1.0], settings.dt, &mut accel)?;
        if settings.records(step) {
            samples.push(sample(t, &q[0], &p[0], v)?);
        }
    }
    Ok(CentralTrajectory { samples, outcome: Outcome::Completed })
}
