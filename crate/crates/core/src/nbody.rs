//! The n-body problem in R^4: `H = ½ pᵀ M⁻¹ p + Σ_{j<k} V(|q_j − q_k|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::{momentum_map_single, Momentum, Vec4};
use crate::integrator::{leapfrog_step, segment_min_norm, IntegratorSettings, Outcome};
use crate::potentials::PairPotential;

/// Pair distances below this are treated as collisions by singular potentials.
pub const CONTACT_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub masses: Vec<f64>,
    pub positions: Vec<Vec4>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub config: Configuration,
    pub momenta: Vec<Vec4>,
}

impl Configuration {
    pub fn new(masses: Vec<f64>, positions: Vec<Vec4>) -> Result<Self> {
        let c = Self { masses, positions };
        c.validate()?;
        Ok(c)
    }

    /// Unit masses at the given positions.
    pub fn unit_masses(positions: Vec<Vec4>) -> Self {
        Self { masses: vec![1.0; positions.len()], positions }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::InvalidInput("configuration has no bodies".into()));
        }
        if self.masses.len() != self.positions.len() {
            return Err(Error::InvalidInput(format!(
                "{} masses for {} positions",
                self.masses.len(),
                self.positions.len()
            )));
        }
        if let Some(m) = self.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidInput(format!("masses must be positive, got {m}")));
        }
        if self.positions.iter().any(|q| !q.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("positions must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn center_of_mass(&self) -> Vec4 {
        let weighted = self.masses.iter().zip(&self.positions).fold(Vec4::zeros(), |acc, (m, q)| acc + q * *m);
        weighted / self.total_mass()
    }

    /// Largest pairwise distance (0 for a single body).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                d = d.max((self.positions[j] - self.positions[k]).norm());
            }
        }
        d
    }

    pub fn min_pair_distance(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                let d = (self.positions[j] - self.positions[k]).norm();
                if best.is_none_or(|b| d < b.2) {
                    best = Some((j, k, d));
                }
            }
        }
        best
    }
}

impl PhaseState {
    pub fn new(config: Configuration, momenta: Vec<Vec4>) -> Result<Self> {
        config.validate()?;
        if momenta.len() != config.len() {
            return Err(Error::InvalidInput(format!("{} momenta for {} bodies", momenta.len(), config.len())));
        }
        if momenta.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("momenta must be finite".into()));
        }
        Ok(Self { config, momenta })
    }

    pub fn total_momentum(&self) -> Vec4 {
        self.momenta.iter().sum()
    }
}

/// Mass-weighted centroid moved to the origin.
pub fn recenter(c: &Configuration) -> Configuration {
    let g = c.center_of_mass();
    Configuration { masses: c.masses.clone(), positions: c.positions.iter().map(|q| q - g).collect() }
}

fn pair_distance(c: &Configuration, pp: &PairPotential, j: usize, k: usize) -> Result<f64> {
    let d = (c.positions[j] - c.positions[k]).norm();
    if pp.potential.is_singular() && d < CONTACT_DISTANCE {
        return Err(Error::Collision { i: j, j: k, distance: d });
    }
    Ok(d)
}

/// `U(q) = Σ_{j<k} V(|q_j − q_k|)`, each term scaled by `m_j m_k` when mass-weighted.
pub fn potential_energy(c: &Configuration, pp: &PairPotential) -> Result<f64> {
    let mut u = 0.0;
    for j in 0..c.len() {
        for k in j + 1..c.len() {
            let d = pair_distance(c, pp, j, k)?;
            u += pp.eval(d, c.masses[j], c.masses[k])?.value;
        }
    }
    Ok(u)
}

/// `∇_j U = Σ_{i≠j} V'(|q_i − q_j|) (q_j − q_i)/|q_i − q_j|`, summed in a fixed order.
pub fn grad_u(c: &Configuration, pp: &PairPotential) -> Result<Vec<Vec4>> {
    let mut g = vec![Vec4::zeros(); c.len()];
    for j in 0..c.len() {
        for k in j + 1..c.len() {
            let d = pair_distance(c, pp, j, k)?;
            if d == 0.0 {
                continue;
            }
            let f = pp.eval(d, c.masses[j], c.masses[k])?.first / d;
            let delta = (c.positions[j] - c.positions[k]) * f;
            g[j] += delta;
            g[k] -= delta;
        }
    }
    Ok(g)
}

pub fn kinetic_energy(s: &PhaseState) -> f64 {
    s.momenta.iter().zip(&s.config.masses).map(|(p, m)| 0.5 * p.norm_squared() / m).sum()
}

pub fn total_energy(s: &PhaseState, pp: &PairPotential) -> Result<f64> {
    Ok(kinetic_energy(s) + potential_energy(&s.config, pp)?)
}

pub fn momentum_map_total(s: &PhaseState) -> Momentum {
    s.config
        .positions
        .iter()
        .zip(&s.momenta)
        .fold(Momentum::default(), |acc, (q, p)| acc + momentum_map_single(q, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBodySample {
    pub t: f64,
    pub positions: Vec<[f64; 4]>,
    pub momenta: Vec<[f64; 4]>,
    pub energy: f64,
    pub mu: Momentum,
    pub centroid: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBodyTrajectory {
    pub samples: Vec<NBodySample>,
    pub outcome: Outcome,
}

impl NBodySample {
    pub fn state(&self, masses: &[f64]) -> PhaseState {
        PhaseState {
            config: Configuration {
                masses: masses.to_vec(),
                positions: self.positions.iter().map(|q| Vec4::from(*q)).collect(),
            },
            momenta: self.momenta.iter().map(|p| Vec4::from(*p)).collect(),
        }
    }
}

fn sample(t: f64, s: &PhaseState, pp: &PairPotential) -> Result<NBodySample> {
    Ok(NBodySample {
        t,
        positions: s.config.positions.iter().map(|q| (*q).into()).collect(),
        momenta: s.momenta.iter().map(|p| (*p).into()).collect(),
        energy: total_energy(s, pp)?,
        mu: momentum_map_total(s),
        centroid: s.config.center_of_mass().into(),
    })
}

/// Closest approach of any pair over the straight drift from `a` to `b`.
fn closest_approach(a: &[Vec4], b: &[Vec4]) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            let d = segment_min_norm(&(a[j] - a[k]), &(b[j] - b[k]));
            if d < best.2 {
                best = (j, k, d);
            }
        }
    }
    best
}

/// Leapfrog (kick-drift-kick) propagation with per-sample diagnostics.
///
/// Stops with [`Outcome::Collision`] when two bodies come closer than the
/// collision threshold during a drift.
pub fn integrate(s0: &PhaseState, pp: &PairPotential, settings: &IntegratorSettings) -> Result<NBodyTrajectory> {
    settings.validate()?;
    pp.potential.validate()?;
    s0.config.validate()?;
    let masses = s0.config.masses.clone();
    let inv_mass: Vec<f64> = masses.iter().map(|m| 1.0 / m).collect();
    let mut q = s0.config.positions.clone();
    let mut p = s0.momenta.clone();
    let mut samples = vec![sample(0.0, s0, pp)?];
    let mut force = |q: &[Vec4], f: &mut [Vec4]| -> Result<()> {
        let c = Configuration { masses: masses.clone(), positions: q.to_vec() };
        for (fj, gj) in f.iter_mut().zip(grad_u(&c, pp)?) {
            *fj = -gj;
        }
        Ok(())
    };
    let mut kick = vec![Vec4::zeros(); q.len()];
    for step in 1..=settings.steps {
        let t = step as f64 * settings.dt;
        force(&q, &mut kick)?;
        let drifted: Vec<Vec4> = (0..q.len())
            .map(|j| q[j] + (p[j] + kick[j] * (0.5 * settings.dt)) * (inv_mass[j] * settings.dt))
            .collect();
        let (_, _, d) = closest_approach(&q, &drifted);
        if q.len() > 1 && d < settings.collision_threshold {
            return Ok(NBodyTrajectory { samples, outcome: Outcome::Collision { time: t, step, min_distance: d } });
        }
        leapfrog_step(&mut q, &mut p, &inv_mass, settings.dt, &mut force)?;
        if settings.records(step) {
            let s = PhaseState { config: Configuration { masses: masses.clone(), positions: q.clone() }, momenta: p.clone() };
            samples.push(sample(t, &s, pp)?);
        }
    }
    Ok(NBodyTrajectory { samples, outcome: Outcome::Completed })
}
