//! Regular polygons in R^4 and their relative equilibria.
//!
//! A regular n-gon is the orbit of a point under a double planar rotation
//! `R = (R_{2πa₁/b₁}, R_{2πa₂/b₂})` of order `n = lcm(b₁, b₂)`. Its
//! projections onto `Oxy` and `Ozw` are regular `b₁`- and `b₂`-gons (possibly
//! star polygons). With equal masses the set of such polygons is invariant
//! under the dynamics and the motion reduces to the radii `(r₁, r₂)`.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::{DoublePolar, PolarMomenta};
use crate::nbody::{Configuration, PhaseState};
use crate::potentials::Potential;
use crate::roots::{positive_roots, LogGrid};

/// Largest order for which synchronisation is decided by enumerating labellings.
pub const EXHAUSTIVE_SYNC_MAX: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NGonSpec {
    pub a1: u32,
    pub b1: u32,
    pub a2: u32,
    pub b2: u32,
    pub r1: f64,
    pub r2: f64,
    #[serde(default)]
    pub theta1: f64,
    #[serde(default)]
    pub theta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NGonType {
    /// Contained in one principal plane.
    PlanarPrincipal,
    /// Planar but in neither principal plane.
    PlanarGeneral,
    /// Both projections are n-gons that cannot be made convex together.
    TypeI,
    /// At least one projection has fewer than n vertices.
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGonClass {
    pub kind: NGonType,
    pub n: u32,
    /// Vertex counts of the projections onto `Oxy` and `Ozw` (1 for a point).
    pub projections: [u32; 2],
}

impl NGonSpec {
    pub fn new(a1: u32, b1: u32, a2: u32, b2: u32, r1: f64, r2: f64) -> Self {
        Self { a1, b1, a2, b2, r1, r2, theta1: 0.0, theta2: 0.0 }
    }

    pub fn active(&self) -> [bool; 2] {
        [self.r1 > 0.0, self.r2 > 0.0]
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.r1, self.r2] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidInput(format!("polygon radii must be nonnegative, got {r}")));
            }
        }
        if !(self.theta1.is_finite() && self.theta2.is_finite()) {
            return Err(Error::InvalidInput("polygon phases must be finite".into()));
        }
        let active = self.active();
        if !active[0] && !active[1] {
            return Err(Error::InvalidInput("at least one polygon radius must be positive".into()));
        }
        for (j, (a, b)) in [(self.a1, self.b1), (self.a2, self.b2)].into_iter().enumerate() {
            if !active[j] {
                continue;
            }
            if a == 0 || b < 2 {
                return Err(Error::InvalidInput(format!(
                    "block {}: need a ≥ 1 and b ≥ 2 for a centred polygon, got a = {a}, b = {b}",
                    j + 1
                )));
            }
            if a.gcd(&b) != 1 {
                return Err(Error::InvalidInput(format!("block {}: gcd({a}, {b}) ≠ 1", j + 1)));
            }
        }
        Ok(())
    }

    /// `n = lcm` of the active denominators.
    pub fn order(&self) -> u32 {
        match self.active() {
            [true, true] => self.b1.lcm(&self.b2),
            [true, false] => self.b1,
            _ => self.b2,
        }
    }

    fn block_angle(&self, j: usize, k: u32) -> f64 {
        let (a, b) = if j == 0 { (self.a1, self.b1) } else { (self.a2, self.b2) };
        2.0 * PI * (a as f64) * (k as f64) / (b as f64)
    }

    /// `|sin(k a_j π / b_j)|` for the active blocks, 0 otherwise.
    fn half_chord(&self, j: usize, k: u32) -> f64 {
        if self.active()[j] {
            (0.5 * self.block_angle(j, k)).sin().abs()
        } else {
            0.0
        }
    }
}

/// Vertex `i` at double-polar `(r₁, θ₁ + 2πa₁i/b₁, r₂, θ₂ + 2πa₂i/b₂)`, unit masses.
pub fn build(spec: &NGonSpec) -> Result<Configuration> {
    spec.validate()?;
    let n = spec.order();
    let positions = (0..n)
        .map(|i| {
            let dp = DoublePolar::from_coords(
                spec.r1,
                spec.theta1 + spec.block_angle(0, i),
                spec.r2,
                spec.theta2 + spec.block_angle(1, i),
            );
            dp.to_cartesian().map(|(q, _)| q)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = spec.r1.max(spec.r2);
    for i in 0..positions.len() {
        for k in i + 1..positions.len() {
            if (positions[i] - positions[k]).norm() <= 1e-12 * scale {
                return Err(Error::DegenerateSpec(format!("vertices {i} and {k} coincide")));
            }
        }
    }
    Ok(Configuration::unit_masses(positions))
}

fn residue_pm(a1: u32, a2: u32, n: u32) -> bool {
    let (a1, a2) = (a1 % n, a2 % n);
    a1 == a2 || (a1 + a2) % n == 0
}

pub fn classify(spec: &NGonSpec) -> Result<NGonClass> {
    spec.validate()?;
    let n = spec.order();
    let active = spec.active();
    let projections = [if active[0] { spec.b1 } else { 1 }, if active[1] { spec.b2 } else { 1 }];
    let kind = if !(active[0] && active[1]) {
        NGonType::PlanarPrincipal
    } else if spec.b1 == n && spec.b2 == n {
        if residue_pm(spec.a1, spec.a2, n) {
            NGonType::PlanarGeneral
        } else {
            NGonType::TypeI
        }
    } else {
        NGonType::TypeII
    };
    Ok(NGonClass { kind, n, projections })
}

/// `|q − R^k q| = 2√(r₁² sin²(ka₁π/b₁) + r₂² sin²(ka₂π/b₂))`.
pub fn pair_distance(spec: &NGonSpec, k: u32) -> Result<f64> {
    spec.validate()?;
    let n = spec.order();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("pair offset must be in 1..{n}, got {k}")));
    }
    Ok(2.0 * half_distance(spec, spec.r1, spec.r2, k))
}

fn half_distance(spec: &NGonSpec, r1: f64, r2: f64, k: u32) -> f64 {
    (r1 * spec.half_chord(0, k)).hypot(r2 * spec.half_chord(1, k))
}

/// Whether a single relabelling makes both projections convex.
///
/// Requires both projections to be n-gons. Decided by enumerating the `2n`
/// labellings that make the first projection convex for `n ≤ 12`, and by
/// `a₁ ≡ ±a₂ (mod n)` beyond.
pub fn is_synchronised(spec: &NGonSpec) -> Result<bool> {
    spec.validate()?;
    let n = spec.order();
    if spec.active() != [true, true] || spec.b1 != n || spec.b2 != n {
        return Err(Error::NotApplicable(format!(
            "synchronisation needs both projections to be {n}-gons, got ({}, {})",
            spec.b1, spec.b2
        )));
    }
    if n > EXHAUSTIVE_SYNC_MAX {
        return Ok(residue_pm(spec.a1, spec.a2, n));
    }
    // vertex i sits at angle index a_j i (mod n) in projection j; a labelling
    // is convex in projection j when consecutive angle indices differ by a
    // constant ±1 (mod n)
    let inv1 = (0..n).find(|x| (x * spec.a1) % n == 1).expect("a₁ is invertible mod n");
    for start in 0..n {
        for dir in [1, n - 1] {
            let label = |s: u32| ((start + s * dir) % n * inv1) % n;
            let step = |s: u32| (spec.a2 * (label(s + 1) + n - label(s))) % n;
            let first = step(0);
            if (first == 1 || first == n - 1) && (1..n).all(|s| step(s) == first) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Symmetric phase-space point: every vertex has radial momenta `p_rj` and
/// angular momenta `c_j` in plane `j`.
pub fn symmetric_state(spec: &NGonSpec, p_r1: f64, p_r2: f64, c1: f64, c2: f64) -> Result<PhaseState> {
    let config = build(spec)?;
    let n = spec.order();
    let momenta = (0..n)
        .map(|i| {
            let dp = DoublePolar::from_coords(
                spec.r1,
                spec.theta1 + spec.block_angle(0, i),
                spec.r2,
                spec.theta2 + spec.block_angle(1, i),
            )
            .with_momenta(PolarMomenta { p_r1, p_theta1: c1, p_r2, p_theta2: c2 });
            dp.to_cartesian().map(|(_, p)| p.expect("momenta set"))
        })
        .collect::<Result<Vec<_>>>()?;
    PhaseState::new(config, momenta)
}

fn centrifugal(c: f64, r: f64, block: usize) -> Result<f64> {
    if c == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(c * c / (r * r))
    } else {
        Err(Error::Domain(format!("block {block}: angular momentum {c} at zero radius")))
    }
}

/// Energy of the symmetric polygon reduced to the radii:
/// `(n/2)(p_r1² + c₁²/r₁² + p_r2² + c₂²/r₂²) + (n/2) Σ_{k=1}^{n−1} V(d_k)`.
#[allow(clippy::too_many_arguments)]
pub fn reduced_ngon_energy(
    r1: f64,
    p_r1: f64,
    r2: f64,
    p_r2: f64,
    c1: f64,
    c2: f64,
    spec: &NGonSpec,
    v: &Potential,
) -> Result<f64> {
    spec.validate()?;
    let n = spec.order();
    let kinetic = p_r1 * p_r1 + centrifugal(c1, r1, 1)? + p_r2 * p_r2 + centrifugal(c2, r2, 2)?;
    let mut pot = 0.0;
    for k in 1..n {
        pot += v.value(2.0 * half_distance(spec, r1, r2, k))?;
    }
    Ok(0.5 * n as f64 * (kinetic + pot))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReRadii {
    pub r1: f64,
    pub r2: f64,
    /// Max over blocks of `|c_j²/r_j⁴ − Σ_k V'(2s_k)/s_k sin²(k a_j π/b_j)|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Right-hand side `Σ_k [V'(2s_k)/s_k] sin²(k a_j π/b_j)` for block `j`, and
/// its partial derivatives in `(r₁, r₂)`.
fn block_force(spec: &NGonSpec, v: &Potential, r1: f64, r2: f64, j: usize) -> Result<(f64, [f64; 2])> {
    let n = spec.order();
    let (mut f, mut df) = (0.0, [0.0; 2]);
    for k in 1..n {
        let s = half_distance(spec, r1, r2, k);
        let sj = spec.half_chord(j, k);
        if sj == 0.0 {
            continue;
        }
        let d = v.eval(2.0 * s)?;
        let g = d.first / s;
        // dg/ds = 2V''/s − V'/s²
        let dg = 2.0 * d.second / s - d.first / (s * s);
        f += g * sj * sj;
        for (i, r) in [r1, r2].into_iter().enumerate() {
            let si = spec.half_chord(i, k);
            df[i] += dg * (r * si * si / s) * sj * sj;
        }
    }
    Ok((f, df))
}

fn block_residual(spec: &NGonSpec, v: &Potential, r: [f64; 2], c: [f64; 2], j: usize) -> Result<f64> {
    let (f, _) = block_force(spec, v, r[0], r[1], j)?;
    Ok(c[j] * c[j] / r[j].powi(4) - f)
}

const NEWTON_MAX_ITER: usize = 200;

/// Radii of the relative equilibria of the symmetric polygon with angular
/// momenta `(c₁, c₂)` per vertex:
/// `c_j²/r_j⁴ = Σ_{k=1}^{n−1} [V'(2s_k)/s_k] sin²(k a_j π/b_j)`.
///
/// Which blocks are active is read from the sign of the radii in `spec`; the
/// radii themselves are not used. For planar polygons the two equations
/// coincide and `r₂ = √|c₂/c₁| r₁`.
pub fn solve_re_radii(spec: &NGonSpec, c1: f64, c2: f64, v: &Potential) -> Result<ReRadii> {
    spec.validate()?;
    v.validate()?;
    let c = [c1, c2];
    let active = spec.active();
    for j in 0..2 {
        if active[j] && c[j] == 0.0 {
            return Err(Error::InactiveBlock { block: j + 1 });
        }
        if !active[j] && c[j] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "block {} has angular momentum {} but zero radius",
                j + 1,
                c[j]
            )));
        }
    }
    let class = classify(spec)?;
    let lead = if active[0] { 0 } else { 1 };
    let gamma = if active == [true, true] { (c[1] / c[0]).abs().sqrt() } else { 0.0 };
    let ray = |t: f64| -> [f64; 2] {
        match active {
            [true, true] => [t, gamma * t],
            [true, false] => [t, 0.0],
            _ => [0.0, t],
        }
    };

    // scalar equation along the ray r₂ = γ r₁, which is exact for planar polygons
    let g = |t: f64| -> f64 {
        let r = ray(t);
        block_force(spec, v, r[0], r[1], lead).map(|(f, _)| c[lead] * c[lead] - r[lead].powi(4) * f).unwrap_or(f64::NAN)
    };
    let dg = |t: f64| -> f64 {
        let h = 1e-7 * t;
        (g(t + h) - g(t - h)) / (2.0 * h)
    };
    let seeds = positive_roots(g, dg, LogGrid::default());
    let Some(&t0) = seeds.first() else {
        return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
    };
    let mut r = ray(t0);

    let planar = matches!(class.kind, NGonType::PlanarPrincipal | NGonType::PlanarGeneral);
    let mut iterations = 0;
    if !planar {
        // damped Newton on F_j = c_j² − r_j⁴ f_j(r₁, r₂)
        loop {
            if iterations >= NEWTON_MAX_ITER {
                let residual = (0..2).map(|j| block_residual(spec, v, r, c, j).map(f64::abs)).sum::<Result<f64>>()?;
                return Err(Error::NoConvergence { iterations, residual });
            }
            iterations += 1;
            let mut fvec = [0.0; 2];
            let mut jac = nalgebra::Matrix2::zeros();
            for j in 0..2 {
                let (f, df) = block_force(spec, v, r[0], r[1], j)?;
                let r4 = r[j].powi(4);
                fvec[j] = c[j] * c[j] - r4 * f;
                for i in 0..2 {
                    jac[(j, i)] = -r4 * df[i] - if i == j { 4.0 * r[j].powi(3) * f } else { 0.0 };
                }
            }
            let Some(inv) = jac.try_inverse() else {
                return Err(Error::NoConvergence { iterations, residual: fvec[0].abs() + fvec[1].abs() });
            };
            let step = -(inv * nalgebra::Vector2::new(fvec[0], fvec[1]));
            let mut lambda = 1.0;
            while (r[0] + lambda * step[0] <= 0.0 || r[1] + lambda * step[1] <= 0.0) && lambda > 1e-12 {
                lambda *= 0.5;
            }
            r = [r[0] + lambda * step[0], r[1] + lambda * step[1]];
            if (lambda * step.norm()) < 1e-14 * (r[0].hypot(r[1])) {
                break;
            }
        }
    }
    let mut residual: f64 = 0.0;
    for j in 0..2 {
        if active[j] {
            residual = residual.max(block_residual(spec, v, r, c, j)?.abs());
        }
    }
    Ok(ReRadii { r1: r[0], r2: r[1], residual, iterations })
}
