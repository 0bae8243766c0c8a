//! Fixed-step integrators shared by the dynamics modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::Vec4;

pub const DEFAULT_COLLISION_THRESHOLD: f64 = 1e-6;

fn default_threshold() -> f64 {
    DEFAULT_COLLISION_THRESHOLD
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_threshold")]
    pub collision_threshold: f64,
    /// Keep every `record_every`-th step in the returned trajectory.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl IntegratorSettings {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self { dt, steps, collision_threshold: DEFAULT_COLLISION_THRESHOLD, record_every: 1 }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn collision_threshold(mut self, threshold: f64) -> Self {
        self.collision_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidInput(format!("time step must be finite and nonzero, got {}", self.dt)));
        }
        if !(self.collision_threshold.is_finite() && self.collision_threshold >= 0.0) {
            return Err(Error::InvalidInput("collision threshold must be nonnegative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn records(&self, step: usize) -> bool {
        step % self.record_every == 0 || step == self.steps
    }
}

/// How a propagation ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// Two bodies (or the body and the centre) came closer than the threshold
    /// during step `step`, which ended at `time`.
    Collision { time: f64, step: usize, min_distance: f64 },
}

impl Outcome {
    pub fn is_collision(&self) -> bool {
        matches!(self, Outcome::Collision { .. })
    }
}

/// Minimum of `|a + s (b - a)|` over `s ∈ [0, 1]`.
pub fn segment_min_norm(a: &Vec4, b: &Vec4) -> f64 {
    let d = b - a;
    let dd = d.norm_squared();
    if dd == 0.0 {
        return a.norm();
    }
    let s = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    (a + d * s).norm()
}

/// One kick-drift-kick step. `accel` writes accelerations for positions `q`.
pub fn leapfrog_step<F>(q: &mut [Vec4], p: &mut [Vec4], inv_mass: &[f64], dt: f64, accel: &mut F) -> Result<()>
where
    F: FnMut(&[Vec4], &mut [Vec4]) -> Result<()>,
{
    let n = q.len();
    let mut force = vec![Vec4::zeros(); n];
    accel(q, &mut force)?;
    for j in 0..n {
        p[j] += force[j] * (0.5 * dt);
        q[j] += p[j] * (inv_mass[j] * dt);
    }
    accel(q, &mut force)?;
    for j in 0..n {
        p[j] += force[j] * (0.5 * dt);
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta step for `y' = f(y)`.
pub fn rk4_step<const N: usize, F>(y: &[f64; N], dt: f64, f: &F) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> Result<[f64; N]>,
{
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&axpy(y, &k1, 0.5 * dt))?;
    let k3 = f(&axpy(y, &k2, 0.5 * dt))?;
    let k4 = f(&axpy(y, &k3, dt))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}
