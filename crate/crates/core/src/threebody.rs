//! The three-body problem reduced by translations and the torus to six
//! degrees of freedom.
//!
//! Jacobi vectors `u = q₂ − q₁` and `v = q₃ − (m₁q₁ + m₂q₂)/(m₁ + m₂)` are
//! written in double-polar form `u = (R₁, Θ_R1, R₂, Θ_R2)`,
//! `v = (S₁, Θ_S1, S₂, Θ_S2)`. With `Φ_j = Θ_Rj − Θ_Sj` and `Ψ_j = Θ_Sj` the
//! momenta are `P_Φj = P_ΘRj` and `P_Ψj = P_ΘRj + P_ΘSj = μ_j`; the angles
//! `Ψ_j` are cyclic, leaving
//!
//! ```text
//! H = (P_R² + P_Φ²/R²)/(2M₁) + (P_S² + (μ − P_Φ)²/S²)/(2M₂) + V(d₁₂) + V(d₁₃) + V(d₂₃)
//! ```
//!
//! summed over both planes. Variables are ordered
//! `(R₁, R₂, S₁, S₂, Φ₁, Φ₂, P_R1, P_R2, P_S1, P_S2, P_Φ1, P_Φ2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::{momentum_map_single, to_double_polar, DoublePolar, Momentum, PolarMomenta, Vec4};
use crate::integrator::{rk4_step, IntegratorSettings, Outcome};
use crate::nbody::{Configuration, PhaseState};
use crate::potentials::{PairPotential, Potential};
use crate::roots::{require_roots, LogGrid};

pub const DIM: usize = 12;

/// Distances below this count as collisions in the reduced system.
pub const COLLISION_DISTANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeBodyMasses {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl ThreeBodyMasses {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let m = Self { m1, m2, m3 };
        if [m1, m2, m3].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(format!("masses must be positive, got ({m1}, {m2}, {m3})")));
        }
        Ok(m)
    }

    pub fn equal() -> Self {
        Self { m1: 1.0, m2: 1.0, m3: 1.0 }
    }

    pub fn total(&self) -> f64 {
        self.m1 + self.m2 + self.m3
    }

    /// `M₁ = m₁m₂/(m₁ + m₂)`
    pub fn big_m1(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    /// `M₂ = m₃(m₁ + m₂)/(m₁ + m₂ + m₃)`
    pub fn big_m2(&self) -> f64 {
        self.m3 * (self.m1 + self.m2) / self.total()
    }

    /// `α₁ = m₂/(m₁ + m₂)`
    pub fn alpha1(&self) -> f64 {
        self.m2 / (self.m1 + self.m2)
    }

    /// `α₂ = m₁/(m₁ + m₂)`
    pub fn alpha2(&self) -> f64 {
        self.m1 / (self.m1 + self.m2)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub r1: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub p_r1: f64,
    pub p_r2: f64,
    pub p_s1: f64,
    pub p_s2: f64,
    pub p_phi1: f64,
    pub p_phi2: f64,
    pub mu: Momentum,
}

impl ReducedState {
    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.r1, self.r2, self.s1, self.s2, self.phi1, self.phi2, self.p_r1, self.p_r2, self.p_s1, self.p_s2,
            self.p_phi1, self.p_phi2,
        ]
    }

    pub fn from_array(z: &[f64; DIM], mu: Momentum) -> Self {
        Self {
            r1: z[0],
            r2: z[1],
            s1: z[2],
            s2: z[3],
            phi1: z[4],
            phi2: z[5],
            p_r1: z[6],
            p_r2: z[7],
            p_s1: z[8],
            p_s2: z[9],
            p_phi1: z[10],
            p_phi2: z[11],
            mu,
        }
    }
}

/// Jacobi vectors of a three-body configuration.
pub fn to_jacobi(c: &Configuration) -> Result<(Vec4, Vec4, ThreeBodyMasses)> {
    c.validate()?;
    if c.len() != 3 {
        return Err(Error::InvalidInput(format!("Jacobi coordinates need 3 bodies, got {}", c.len())));
    }
    let m = ThreeBodyMasses::new(c.masses[0], c.masses[1], c.masses[2])?;
    let q = &c.positions;
    let u = q[1] - q[0];
    let v = q[2] - (q[0] * m.m1 + q[1] * m.m2) / (m.m1 + m.m2);
    Ok((u, v, m))
}

/// Positions with centre of mass at the origin from Jacobi vectors.
pub fn from_jacobi(u: &Vec4, v: &Vec4, m: &ThreeBodyMasses) -> Configuration {
    let c12 = -v * (m.m3 / m.total());
    Configuration {
        masses: m.as_array().to_vec(),
        positions: vec![c12 - u * m.alpha1(), c12 + u * m.alpha2(), c12 + v],
    }
}

/// Jacobi momenta `(p_u, p_v)` conjugate to `(u, v)`.
pub fn jacobi_momenta(p: &[Vec4], m: &ThreeBodyMasses) -> (Vec4, Vec4) {
    let m12 = m.m1 + m.m2;
    let pu = (p[1] * m.m1 - p[0] * m.m2) / m12;
    let pv = (p[2] * m12 - (p[0] + p[1]) * m.m3) / m.total();
    (pu, pv)
}

/// Cartesian momenta with zero total momentum from Jacobi momenta.
pub fn momenta_from_jacobi(pu: &Vec4, pv: &Vec4, m: &ThreeBodyMasses) -> Vec<Vec4> {
    vec![-pu - pv * m.alpha2(), pu - pv * m.alpha1(), *pv]
}

/// Reduced state of a full state, together with the cyclic angles `(Ψ₁, Ψ₂)`.
///
/// Total linear momentum is discarded. When a projection of `v` vanishes the
/// corresponding angle is undefined and set to 0.
pub fn reduce(s: &PhaseState) -> Result<(ReducedState, [f64; 2])> {
    let (u, v, m) = to_jacobi(&s.config)?;
    let (pu, pv) = jacobi_momenta(&s.momenta, &m);
    let a = to_double_polar(&u, Some(&pu));
    let b = to_double_polar(&v, Some(&pv));
    let (ma, mb) = (a.momenta.expect("requested"), b.momenta.expect("requested"));
    let rs = ReducedState {
        r1: a.r1,
        r2: a.r2,
        s1: b.r1,
        s2: b.r2,
        phi1: a.theta1 - b.theta1,
        phi2: a.theta2 - b.theta2,
        p_r1: ma.p_r1,
        p_r2: ma.p_r2,
        p_s1: mb.p_r1,
        p_s2: mb.p_r2,
        p_phi1: ma.p_theta1,
        p_phi2: ma.p_theta2,
        mu: Momentum::new(ma.p_theta1 + mb.p_theta1, ma.p_theta2 + mb.p_theta2),
    };
    Ok((rs, [b.theta1, b.theta2]))
}

/// Full state with centre of mass at rest at the origin from a reduced state
/// and cyclic angles `(Ψ₁, Ψ₂)`.
pub fn reconstruct(s: &ReducedState, psi: [f64; 2], m: &ThreeBodyMasses) -> Result<PhaseState> {
    let (u, pu) = DoublePolar::from_coords(s.r1, psi[0] + s.phi1, s.r2, psi[1] + s.phi2)
        .with_momenta(PolarMomenta { p_r1: s.p_r1, p_theta1: s.p_phi1, p_r2: s.p_r2, p_theta2: s.p_phi2 })
        .to_cartesian()?;
    let (v, pv) = DoublePolar::from_coords(s.s1, psi[0], s.s2, psi[1])
        .with_momenta(PolarMomenta {
            p_r1: s.p_s1,
            p_theta1: s.mu.mu1 - s.p_phi1,
            p_r2: s.p_s2,
            p_theta2: s.mu.mu2 - s.p_phi2,
        })
        .to_cartesian()?;
    let config = from_jacobi(&u, &v, m);
    let momenta = momenta_from_jacobi(&pu.expect("set"), &pv.expect("set"), m);
    PhaseState::new(config, momenta)
}

/// `(u·v` coupling sign, `α)` for the pairs (1,3) and (2,3): `q₃ − q₁ = v + α₁u`,
/// `q₃ − q₂ = v − α₂u`.
fn legs(m: &ThreeBodyMasses) -> [(f64, f64); 2] {
    [(1.0, m.alpha1()), (-1.0, m.alpha2())]
}

/// `|S e^{iΦ} + σα R|` summed in quadrature over both planes, without cancellation.
fn leg_distance(z: &[f64; DIM], sigma: f64, alpha: f64) -> f64 {
    let mut d2 = 0.0;
    for j in 0..2 {
        let (r, s, phi) = (z[j], z[2 + j], z[4 + j]);
        let (sn, cs) = phi.sin_cos();
        let x = s * cs + sigma * alpha * r;
        let y = s * sn;
        d2 += x * x + y * y;
    }
    d2.sqrt()
}

fn distances_raw(z: &[f64; DIM], m: &ThreeBodyMasses) -> [f64; 3] {
    let [(s13, a13), (s23, a23)] = legs(m);
    [z[0].hypot(z[1]), leg_distance(z, s13, a13), leg_distance(z, s23, a23)]
}

fn check_distances(d: [f64; 3]) -> Result<[f64; 3]> {
    for (idx, (i, j)) in [(0usize, (1usize, 2usize)), (1, (1, 3)), (2, (2, 3))] {
        if !(d[idx] >= COLLISION_DISTANCE) {
            return Err(Error::Collision { i, j, distance: d[idx] });
        }
    }
    Ok(d)
}

/// Mutual distances `(d₁₂, d₁₃, d₂₃)`.
pub fn distances(s: &ReducedState, m: &ThreeBodyMasses) -> Result<[f64; 3]> {
    check_distances(distances_raw(&s.to_array(), m))
}

fn pair_masses(m: &ThreeBodyMasses) -> [(f64, f64); 3] {
    [(m.m1, m.m2), (m.m1, m.m3), (m.m2, m.m3)]
}

fn inv_square_term(c: f64, r: f64) -> Result<f64> {
    if c == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(c * c / (r * r))
    } else {
        Err(Error::Domain(format!("angular momentum {c} at zero radius")))
    }
}

pub fn reduced_energy_3b(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<f64> {
    energy_array(&s.to_array(), s.mu, m, pp)
}

fn energy_array(z: &[f64; DIM], mu: Momentum, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<f64> {
    let (bm1, bm2) = (m.big_m1(), m.big_m2());
    let mus = [mu.mu1, mu.mu2];
    let mut t = 0.0;
    for j in 0..2 {
        t += (z[6 + j].powi(2) + inv_square_term(z[10 + j], z[j])?) / (2.0 * bm1);
        t += (z[8 + j].powi(2) + inv_square_term(mus[j] - z[10 + j], z[2 + j])?) / (2.0 * bm2);
    }
    let d = check_distances(distances_raw(z, m))?;
    let mut u = 0.0;
    for (dk, (a, b)) in d.iter().zip(pair_masses(m)) {
        u += pp.eval(*dk, a, b)?.value;
    }
    Ok(t + u)
}

fn inv_cube_term(c: f64, r: f64) -> Result<f64> {
    if c == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(c * c / (r * r * r))
    } else {
        Err(Error::Domain(format!("angular momentum {c} at zero radius")))
    }
}

fn ratio_term(c: f64, r: f64) -> Result<f64> {
    if c == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(c / (r * r))
    } else {
        Err(Error::Domain(format!("angular momentum {c} at zero radius")))
    }
}

/// Gradient `∇H` in the fixed variable order.
pub fn gradient_array(z: &[f64; DIM], mu: Momentum, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<[f64; DIM]> {
    let (bm1, bm2) = (m.big_m1(), m.big_m2());
    let mus = [mu.mu1, mu.mu2];
    let d = check_distances(distances_raw(z, m))?;
    let pm = pair_masses(m);
    // V'(d)/d for each pair
    let mut e = [0.0; 3];
    for k in 0..3 {
        e[k] = pp.eval(d[k], pm[k].0, pm[k].1)?.first / d[k];
    }
    let [(s13, a13), (s23, a23)] = legs(m);
    let mut g = [0.0; DIM];
    for j in 0..2 {
        let (r, s, phi) = (z[j], z[2 + j], z[4 + j]);
        let (sn, cs) = phi.sin_cos();
        let p_phi = z[10 + j];
        let rest = mus[j] - p_phi;
        // d(d²)/2 for each leg: d²_leg = Σ S² + α²R² + 2σα R S cos Φ
        let mut d_r = e[0] * r;
        let mut d_s = 0.0;
        let mut d_phi = 0.0;
        for (ek, (sigma, alpha)) in [(e[1], (s13, a13)), (e[2], (s23, a23))] {
            d_r += ek * (alpha * alpha * r + sigma * alpha * s * cs);
            d_s += ek * (s + sigma * alpha * r * cs);
            d_phi += ek * (-sigma * alpha * r * s * sn);
        }
        g[j] = -inv_cube_term(p_phi, r)? / bm1 + d_r;
        g[2 + j] = -inv_cube_term(rest, s)? / bm2 + d_s;
        g[4 + j] = d_phi;
        g[6 + j] = z[6 + j] / bm1;
        g[8 + j] = z[8 + j] / bm2;
        g[10 + j] = ratio_term(p_phi, r)? / bm1 - ratio_term(rest, s)? / bm2;
    }
    Ok(g)
}

fn rates_array(z: &[f64; DIM], mu: Momentum, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<[f64; DIM]> {
    let g = gradient_array(z, mu, m, pp)?;
    let mut out = [0.0; DIM];
    for i in 0..6 {
        out[i] = g[6 + i];
        out[6 + i] = -g[i];
    }
    Ok(out)
}

/// Hamilton's equations `ż = 𝕁 ∇H`.
pub fn eom_3b(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<ReducedState> {
    let rates = rates_array(&s.to_array(), s.mu, m, pp)?;
    Ok(ReducedState::from_array(&rates, Momentum::default()))
}

pub fn rate_norm(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<f64> {
    let r = rates_array(&s.to_array(), s.mu, m, pp)?;
    Ok(r.iter().map(|x| x * x).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReBranch {
    /// `sin Φ₁ = sin Φ₂ = 0`: the projections of `u` and `v` are parallel.
    Collinear,
    /// `m₂ V'(d₁₃)/d₁₃ = m₁ V'(d₂₃)/d₂₃`.
    Balanced,
    Neither,
}

/// Which factor of `Ṗ_Φj ∝ R_j S_j sin Φ_j (α₁V'(d₁₃)/d₁₃ − α₂V'(d₂₃)/d₂₃)` vanishes.
pub fn re_branch(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential, tol: f64) -> Result<ReBranch> {
    if s.phi1.sin().abs() <= tol && s.phi2.sin().abs() <= tol {
        return Ok(ReBranch::Collinear);
    }
    let d = distances(s, m)?;
    let e13 = pp.eval(d[1], m.m1, m.m3)?.first / d[1];
    let e23 = pp.eval(d[2], m.m2, m.m3)?.first / d[2];
    let (lhs, rhs) = (m.m2 * e13, m.m1 * e23);
    if (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs()) {
        Ok(ReBranch::Balanced)
    } else {
        Ok(ReBranch::Neither)
    }
}

/// Parameters of the equal-mass equilateral relative equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilateralData {
    pub gamma: f64,
    pub c1: f64,
    pub r0: f64,
    /// Side length `r₀√(3(1 + γ²))`.
    pub side: f64,
    pub state: ReducedState,
}

/// `γ = √|μ₂/μ₁|`.
pub fn gamma_of(mu: Momentum) -> f64 {
    (mu.mu2 / mu.mu1).abs().sqrt()
}

/// Right-hand side constant of `r³V'(r√(3(1+γ²))) = κ c₁²`: balance of the
/// centrifugal force of a vertex on a circle of radius `r` in each plane
/// against the attraction of the other two.
pub fn equilateral_kappa(gamma: f64) -> f64 {
    (3.0 * (1.0 + gamma * gamma)).sqrt() / 3.0
}

/// Radii `r₀` with `r³V'(r√(3(1+γ²))) = √(3(1+γ²))/3 · c₁²`.
pub fn equilateral_radii(v: &Potential, gamma: f64, c1: f64) -> Result<Vec<f64>> {
    let s = (3.0 * (1.0 + gamma * gamma)).sqrt();
    let rhs = equilateral_kappa(gamma) * c1 * c1;
    let f = |r: f64| r.powi(3) * v.first(r * s).expect("r > 0") - rhs;
    let df = |r: f64| {
        let d = v.eval(r * s).expect("r > 0");
        3.0 * r * r * d.first + r.powi(3) * s * d.second
    };
    require_roots(f, df, LogGrid::default(), "equilateral radius")
}

/// The `μ₁²` for which every radius solves the inverse-square balance:
/// `μ₁² = 6k/(1 + γ²)²`.
pub fn jacobi_continuum_mu_squared(k: f64, gamma: f64) -> f64 {
    6.0 * k / (1.0 + gamma * gamma).powi(2)
}

/// Reduced equilibrium of three unit masses at the vertices of an
/// equilateral triangle rotating with equal rates in both planes.
///
/// Uses the smallest root `r₀`. For the inverse-square potential the radius
/// is arbitrary on the curve `μ₁² = 6k/(1 + γ²)²` and `r₀ = 1` is returned.
pub fn equilateral_equilibrium(mu1: f64, mu2: f64, v: &Potential) -> Result<EquilateralData> {
    v.validate()?;
    if !(mu1 != 0.0 && mu1.is_finite() && mu2.is_finite()) {
        return Err(Error::InvalidInput(format!("equilateral equilibrium needs μ₁ ≠ 0, got {mu1}")));
    }
    if mu1 * mu2 < 0.0 {
        return Err(Error::InvalidInput("equal rates in both planes need μ₁ and μ₂ of the same sign".into()));
    }
    let mu = Momentum::new(mu1, mu2);
    let gamma = gamma_of(mu);
    let c1 = mu1 / 3.0;
    let r0 = if v.is_scale_degenerate() {
        let target = jacobi_continuum_mu_squared(v.coupling(), gamma);
        if ((mu1 * mu1 - target) / target).abs() > 1e-12 {
            return Err(Error::DegeneratePotential(format!(
                "inverse-square balance holds only for μ₁² = {target}, got {}",
                mu1 * mu1
            )));
        }
        1.0
    } else {
        equilateral_radii(v, gamma, c1)?[0]
    };
    let sq3 = 3f64.sqrt();
    let state = ReducedState {
        r1: r0 * sq3,
        r2: gamma * r0 * sq3,
        s1: 1.5 * r0,
        s2: 1.5 * gamma * r0,
        phi1: -FRAC_PI_2,
        phi2: -FRAC_PI_2,
        p_r1: 0.0,
        p_r2: 0.0,
        p_s1: 0.0,
        p_s2: 0.0,
        p_phi1: mu1 / 2.0,
        p_phi2: mu2 / 2.0,
        mu,
    };
    let side = r0 * (3.0 * (1.0 + gamma * gamma)).sqrt();
    Ok(EquilateralData { gamma, c1, r0, side, state })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedSample {
    pub t: f64,
    pub state: ReducedState,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedTrajectory {
    pub samples: Vec<ReducedSample>,
    pub outcome: Outcome,
}

/// RK4 integration of the reduced system; the reduced Hamiltonian is not
/// separable so leapfrog does not apply.
pub fn integrate_reduced(
    s0: &ReducedState,
    m: &ThreeBodyMasses,
    pp: &PairPotential,
    settings: &IntegratorSettings,
) -> Result<ReducedTrajectory> {
    settings.validate()?;
    let mu = s0.mu;
    let mut z = s0.to_array();
    let mut samples = vec![ReducedSample { t: 0.0, state: *s0, energy: reduced_energy_3b(s0, m, pp)? }];
    let f = |y: &[f64; DIM]| rates_array(y, mu, m, pp);
    for step in 1..=settings.steps {
        let t = step as f64 * settings.dt;
        let next = match rk4_step(&z, settings.dt, &f) {
            Ok(next) => next,
            Err(Error::Collision { distance, .. }) => {
                return Ok(ReducedTrajectory {
                    samples,
                    outcome: Outcome::Collision { time: t, step, min_distance: distance },
                })
            }
            Err(e) => return Err(e),
        };
        let d = distances_raw(&next, m);
        let min_distance = d.iter().copied().fold(f64::INFINITY, f64::min);
        if min_distance < settings.collision_threshold {
            return Ok(ReducedTrajectory { samples, outcome: Outcome::Collision { time: t, step, min_distance } });
        }
        z = next;
        if settings.records(step) {
            let state = ReducedState::from_array(&z, mu);
            samples.push(ReducedSample { t, state, energy: reduced_energy_3b(&state, m, pp)? });
        }
    }
    Ok(ReducedTrajectory { samples, outcome: Outcome::Completed })
}

/// Torus momentum of a full three-body state.
pub fn total_momentum_map(s: &PhaseState) -> Momentum {
    s.config
        .positions
        .iter()
        .zip(&s.momenta)
        .fold(Momentum::default(), |acc, (q, p)| acc + momentum_map_single(q, p))
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Unknowns of the equilibrium equations: `(R, S, Φ, P_Φ)` in both planes.
/// Radial momenta vanish at any equilibrium.
const EQ_VARS: [usize; 8] = [0, 1, 2, 3, 4, 5, 10, 11];

fn eq_residual(x: &[f64; 8], mu: Momentum, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<[f64; 8]> {
    let mut z = [0.0; DIM];
    for (k, &i) in EQ_VARS.iter().enumerate() {
        z[i] = x[k];
    }
    let g = gradient_array(&z, mu, m, pp)?;
    let mut r = [0.0; 8];
    for (k, &i) in EQ_VARS.iter().enumerate() {
        r[k] = g[i];
    }
    Ok(r)
}

fn norm8(r: &[f64; 8]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Equilibrium of the reduced system near `seed` by Gauss–Newton with a
/// pseudo-inverse step (the equations are rank deficient along families)
/// and backtracking. The seed's momentum values `μ` are kept fixed.
///
/// Forces vanish at infinity, so iterates leaving a ball of `10³` times the
/// seed's size count as divergence.
pub fn find_reduced_equilibrium(
    seed: &ReducedState,
    m: &ThreeBodyMasses,
    pp: &PairPotential,
    tol: f64,
    max_iter: usize,
) -> Result<ReducedState> {
    use nalgebra::{SMatrix, SVector};
    let mu = seed.mu;
    let z0 = seed.to_array();
    let mut x = [0.0; 8];
    for (k, &i) in EQ_VARS.iter().enumerate() {
        x[k] = z0[i];
    }
    let mut r = eq_residual(&x, mu, m, pp)?;
    let mut norm = norm8(&r);
    let bound = 1e3 * x[..4].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for _ in 0..max_iter {
        if norm <= tol {
            let mut z = [0.0; DIM];
            for (k, &i) in EQ_VARS.iter().enumerate() {
                z[i] = x[k];
            }
            return Ok(ReducedState::from_array(&z, mu));
        }
        let mut jac = SMatrix::<f64, 8, 8>::zeros();
        for c in 0..8 {
            let h = 1e-6 * x[c].abs().max(1e-2);
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (rp, rm) = (eq_residual(&xp, mu, m, pp)?, eq_residual(&xm, mu, m, pp)?);
            for row in 0..8 {
                jac[(row, c)] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&SVector::<f64, 8>::from(r), 1e-10 * smax)
            .map_err(|_| Error::NoConvergence { iterations: 0, residual: norm })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let mut trial = x;
            for k in 0..8 {
                trial[k] -= lambda * step[k];
            }
            if trial[..4].iter().any(|v| *v <= 0.0 || *v > bound) {
                lambda *= 0.5;
                continue;
            }
            if let Ok(rt) = eq_residual(&trial, mu, m, pp) {
                let nt = norm8(&rt);
                if nt < norm {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: norm })
}
