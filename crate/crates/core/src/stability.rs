//! Linear analysis of the equal-mass equilateral relative equilibrium of the
//! reduced three-body problem.
//!
//! The Hessian `D²H` at the equilibrium is split into `6 × 6` blocks
//! `[[A, B], [Bᵀ, D]]` (configuration, momenta). The linearization is
//! `M = 𝕁 D²H` with `𝕁 = [[0, I], [−I, 0]]`. A kernel of `M` of dimension
//! one whose square has a two-dimensional kernel signals a nilpotent part,
//! and the equilibrium drifts away linearly in time.

use nalgebra::{Complex, DMatrix, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom4::Momentum;
use crate::integrator::IntegratorSettings;
use crate::potentials::{PairPotential, Potential};
use crate::threebody::{
    equilateral_equilibrium, gradient_array, integrate_reduced, rate_norm, ReducedState, ThreeBodyMasses, DIM,
};

pub type Mat12 = SMatrix<f64, 12, 12>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat2 = SMatrix<f64, 2, 2>;

/// Rate norm above which a state is not accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Rows and columns of `D²H` forming `[F]`: `(R₁, R₂, S₁, S₂, P_Φ1, P_Φ2)`.
pub const F_INDICES: [usize; 6] = [0, 1, 2, 3, 10, 11];

#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks {
    pub full: Mat12,
    /// Hessian of the potential part alone in `(R, S, Φ)`.
    pub d2v: Mat6,
    pub a1: Mat2,
    pub a2: Mat2,
    pub b1: Mat2,
    pub b2: Mat2,
    pub d1: Mat2,
    pub d2: Mat2,
    pub d3: Mat2,
    pub a_coeff: f64,
    pub a_block: Mat2,
    pub gamma: f64,
}

impl HessianBlocks {
    pub fn a(&self) -> Mat6 {
        self.full.fixed_view::<6, 6>(0, 0).into_owned()
    }

    pub fn b(&self) -> Mat6 {
        self.full.fixed_view::<6, 6>(0, 6).into_owned()
    }

    pub fn d(&self) -> Mat6 {
        self.full.fixed_view::<6, 6>(6, 6).into_owned()
    }
}

/// Largest entrywise mismatch between an analytic block and its finite
/// difference counterpart, relative to the largest analytic entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub name: String,
    pub abs_error: f64,
    pub rel_error: f64,
}

fn d2<const R: usize, const C: usize>(fd: &SMatrix<f64, R, C>, an: &SMatrix<f64, R, C>) -> (f64, f64) {
    let err = (fd - an).abs().max();
    let scale = an.abs().max();
    (err, if scale > 0.0 { err / scale } else { err })
}

/// Symmetric Hessian of `H` at `z` by central differences of the analytic
/// gradient with one Richardson extrapolation.
pub fn numerical_hessian(z: &[f64; DIM], mu: Momentum, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<Mat12> {
    let scale = z[..4].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut h = Mat12::zeros();
    for c in 0..DIM {
        let step = 1e-4 * z[c].abs().max(scale.max(1.0));
        let diff = |s: f64| -> Result<[f64; DIM]> {
            let (mut zp, mut zm) = (*z, *z);
            zp[c] += s;
            zm[c] -= s;
            let (gp, gm) = (gradient_array(&zp, mu, m, pp)?, gradient_array(&zm, mu, m, pp)?);
            let mut out = [0.0; DIM];
            for r in 0..DIM {
                out[r] = (gp[r] - gm[r]) / (2.0 * s);
            }
            Ok(out)
        };
        let coarse = diff(step)?;
        let fine = diff(0.5 * step)?;
        for r in 0..DIM {
            h[(r, c)] = (4.0 * fine[r] - coarse[r]) / 3.0;
        }
    }
    Ok(0.5 * (h + h.transpose()))
}

/// `a = 3l(lV''(l) − V'(l)) / (8(1 + γ²)²)`, the curvature of the potential
/// in the `(Φ₁, Φ₂)` directions per unit of `[[1, γ²], [γ², γ⁴]]` at an
/// equilateral triangle of side `l`.
pub fn a_coefficient(v: &Potential, l: f64, gamma: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("side length must be positive, got {l}")));
    }
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("γ must be finite, got {gamma}")));
    }
    let d = v.eval(l)?;
    let g2 = 1.0 + gamma * gamma;
    Ok(3.0 * l * (l * d.second - d.first) / (8.0 * g2 * g2))
}

pub fn a_matrix(a: f64, gamma: f64) -> Mat2 {
    let g2 = gamma * gamma;
    Mat2::new(a, g2 * a, g2 * a, g2 * g2 * a)
}

/// Eigenpairs of `a[[1, γ²], [γ², γ⁴]]`: `(0, (−γ², 1))` and `(a(1 + γ⁴), (1, γ²))`.
pub fn a_matrix_spectrum(a: f64, gamma: f64) -> [(f64, [f64; 2]); 2] {
    let g2 = gamma * gamma;
    [(0.0, [-g2, 1.0]), (a * (1.0 + g2 * g2), [1.0, g2])]
}

fn diag2(x: f64, y: f64) -> Mat2 {
    Mat2::new(x, 0.0, 0.0, y)
}

/// Hessian at an equilibrium of the reduced system with the analytic blocks
/// of its kinetic part. `a_coeff` and `a_block` are only meaningful at the
/// equal-mass equilateral equilibrium.
pub fn hessian(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<HessianBlocks> {
    let rate_norm = rate_norm(s, m, pp)?;
    let scale = s.r1.hypot(s.r2).max(s.s1.hypot(s.s2)).max(1.0);
    if rate_norm > EQUILIBRIUM_TOL * scale {
        return Err(Error::NotAnEquilibrium { rate_norm });
    }
    let z = s.to_array();
    let full = numerical_hessian(&z, s.mu, m, pp)?;
    // the potential part alone: same configuration, no momenta
    let mut zc = [0.0; DIM];
    zc[..6].copy_from_slice(&z[..6]);
    let hv = numerical_hessian(&zc, Momentum::default(), m, pp)?;
    let d2v = hv.fixed_view::<6, 6>(0, 0).into_owned();

    let (bm1, bm2) = (m.big_m1(), m.big_m2());
    let (r, sv) = ([s.r1, s.r2], [s.s1, s.s2]);
    let p = [s.p_phi1, s.p_phi2];
    let rest = [s.mu.mu1 - s.p_phi1, s.mu.mu2 - s.p_phi2];
    let each = |f: &dyn Fn(usize) -> f64| diag2(f(0), f(1));
    let a1 = each(&|j| 3.0 * p[j] * p[j] / (bm1 * r[j].powi(4)));
    let a2 = each(&|j| 3.0 * rest[j] * rest[j] / (bm2 * sv[j].powi(4)));
    let b1 = each(&|j| -2.0 * p[j] / (bm1 * r[j].powi(3)));
    let b2 = each(&|j| 2.0 * rest[j] / (bm2 * sv[j].powi(3)));
    let d1 = diag2(1.0 / bm1, 1.0 / bm1);
    let d2 = diag2(1.0 / bm2, 1.0 / bm2);
    let d3 = each(&|j| 1.0 / (bm1 * r[j] * r[j]) + 1.0 / (bm2 * sv[j] * sv[j]));

    let gamma = if s.r1 > 0.0 { s.r2 / s.r1 } else { 0.0 };
    let side = s.r1.hypot(s.r2);
    let a_coeff = a_coefficient(&pp.potential, side, gamma)? * pp.weight(1.0, 1.0);
    Ok(HessianBlocks { full, d2v, a1, a2, b1, b2, d1, d2, d3, a_coeff, a_block: a_matrix(a_coeff, gamma), gamma })
}

/// Analytic blocks against the finite-difference Hessian. The `[a]` check
/// is only meaningful at the equilateral equilibrium.
pub fn cross_check(h: &HessianBlocks) -> Vec<BlockCheck> {
    let sub = |m: &Mat12, r: usize, c: usize| -> Mat2 { m.fixed_view::<2, 2>(r, c).into_owned() };
    let kin = h.full.fixed_view::<6, 6>(0, 0).into_owned() - h.d2v;
    let kin12 = {
        let mut k = Mat12::zeros();
        k.fixed_view_mut::<6, 6>(0, 0).copy_from(&kin);
        k
    };
    let mut dv12 = Mat12::zeros();
    dv12.fixed_view_mut::<6, 6>(0, 0).copy_from(&h.d2v);
    let checks: [(&'static str, Mat2, Mat2); 8] = [
        ("a1", sub(&kin12, 0, 0), h.a1),
        ("a2", sub(&kin12, 2, 2), h.a2),
        ("b1", sub(&h.full, 0, 10), h.b1),
        ("b2", sub(&h.full, 2, 10), h.b2),
        ("d1", sub(&h.full, 6, 6), h.d1),
        ("d2", sub(&h.full, 8, 8), h.d2),
        ("d3", sub(&h.full, 10, 10), h.d3),
        ("a", sub(&dv12, 4, 4), h.a_block),
    ];
    checks
        .into_iter()
        .map(|(name, fd, an)| {
            let (abs_error, rel_error) = d2(&fd, &an);
            BlockCheck { name: name.to_string(), abs_error, rel_error }
        })
        .collect()
}

/// `[F]`: the restriction of `D²H` to `(R, S, P_Φ)` and its determinant.
pub fn f_matrix(h: &HessianBlocks) -> (Mat6, f64) {
    let f = Mat6::from_fn(|r, c| h.full[(F_INDICES[r], F_INDICES[c])]);
    (f, f.determinant())
}

pub fn symplectic_j() -> Mat12 {
    let mut j = Mat12::zeros();
    for i in 0..6 {
        j[(i, 6 + i)] = 1.0;
        j[(6 + i, i)] = -1.0;
    }
    j
}

/// `M = 𝕁 D²H` at an equilibrium.
pub fn linearize(s: &ReducedState, m: &ThreeBodyMasses, pp: &PairPotential) -> Result<(Mat12, HessianBlocks)> {
    let h = hessian(s, m, pp)?;
    Ok((symplectic_j() * h.full, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unstable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `(re, im)` pairs sorted by real then imaginary part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub dim_ker_m: usize,
    pub dim_ker_m2: usize,
    pub det_f: f64,
    pub f_nonsingular: bool,
    pub nilpotent: bool,
    pub verdict: Verdict,
    /// Largest real part in the spectrum.
    pub max_real_part: f64,
    /// An eigenvalue lies off the imaginary axis, which already makes the
    /// equilibrium unstable independently of `verdict`.
    pub spectrally_unstable: bool,
}

/// Relative size of a real part that counts as off the imaginary axis.
pub const SPECTRAL_TOL: f64 = 1e-6;

/// Number of singular values below `tol · σ_max`.
pub fn kernel_dim(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return m.ncols();
    }
    sv.iter().filter(|s| **s <= tol * smax).count()
}

/// Orthonormal basis of the numerical kernel of `m`.
pub fn kernel_basis(m: &DMatrix<f64>, tol: f64) -> Vec<DVec> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol * smax {
            out.push(vt.row(k).transpose().into_owned());
        }
    }
    out
}

pub type DVec = nalgebra::DVector<f64>;

fn to_dmatrix(m: &Mat12) -> DMatrix<f64> {
    DMatrix::from_column_slice(12, 12, m.as_slice())
}

pub fn spectral_report(m: &Mat12, det_f: f64, f: &Mat6) -> SpectralReport {
    let mut eig: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let dm = to_dmatrix(m);
    let dim_ker_m = kernel_dim(&dm, RANK_TOL);
    let dim_ker_m2 = kernel_dim(&(&dm * &dm), RANK_TOL);
    let fsv = f.svd(false, false).singular_values;
    let f_nonsingular = det_f != 0.0 && fsv.min() > RANK_TOL * fsv.max();
    let nilpotent = dim_ker_m2 > dim_ker_m;
    let verdict = if f_nonsingular && nilpotent { Verdict::Unstable } else { Verdict::Indeterminate };
    let max_real_part = eig.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let radius = eig.iter().map(|c| c.norm()).fold(0.0, f64::max);
    SpectralReport {
        max_real_part,
        spectrally_unstable: max_real_part > SPECTRAL_TOL * radius,
        eigenvalues: eig.iter().map(|c| [c.re, c.im]).collect(),
        dim_ker_m,
        dim_ker_m2,
        det_f,
        f_nonsingular,
        nilpotent,
        verdict,
    }
}

/// Everything computed for one equilateral equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilateralAnalysis {
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
    pub r0: f64,
    pub state: ReducedState,
    pub report: SpectralReport,
    pub max_block_error: f64,
}

/// Analysis of the equal-mass equilateral equilibrium with `μ₁ = mu` and
/// `μ₂ = γ²μ`.
pub fn analyse_equilateral(mu: f64, gamma: f64, v: &Potential) -> Result<(EquilateralAnalysis, HessianBlocks, Mat12)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("γ must be positive, got {gamma}")));
    }
    let eq = equilateral_equilibrium(mu, gamma * gamma * mu, v)?;
    let m = ThreeBodyMasses::equal();
    let pp = PairPotential::from(*v);
    let (lin, h) = linearize(&eq.state, &m, &pp)?;
    let (f, det_f) = f_matrix(&h);
    let report = spectral_report(&lin, det_f, &f);
    let max_block_error = cross_check(&h).iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok((
        EquilateralAnalysis { mu1: mu, mu2: gamma * gamma * mu, gamma, r0: eq.r0, state: eq.state, report, max_block_error },
        h,
        lin,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub gamma: f64,
    pub det_f: f64,
    pub dim_ker: usize,
    pub dim_ker2: usize,
    pub verdict: Verdict,
}

/// Grid evaluation in row-major order of `(mu, gamma)`.
pub fn sweep(mus: &[f64], gammas: &[f64], v: &Potential) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(mus.len() * gammas.len());
    for &mu in mus {
        for &gamma in gammas {
            let (an, _, _) = analyse_equilateral(mu, gamma, v)?;
            rows.push(SweepRow {
                mu,
                gamma,
                det_f: an.report.det_f,
                dim_ker: an.report.dim_ker_m,
                dim_ker2: an.report.dim_ker_m2,
                verdict: an.report.verdict,
            });
        }
    }
    Ok(rows)
}

/// A Jordan chain `M w = v₀` with `v₀` spanning `ker M` and `w ⊥ ker M`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain {
    pub kernel: SVector<f64, 12>,
    pub generalized: SVector<f64, 12>,
}

pub fn jordan_chain(m: &Mat12) -> Result<JordanChain> {
    let dm = to_dmatrix(m);
    let ker = kernel_basis(&dm, RANK_TOL);
    let ker2 = kernel_basis(&(&dm * &dm), RANK_TOL);
    if ker.len() != 1 || ker2.len() <= ker.len() {
        return Err(Error::NotApplicable(format!(
            "no rank-two Jordan chain (kernel dimensions {} and {})",
            ker.len(),
            ker2.len()
        )));
    }
    let k = &ker[0];
    // the element of ker M² farthest from ker M
    let w = ker2
        .iter()
        .map(|x| x - k * k.dot(x))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty");
    let w = &w / w.norm();
    let mw = &dm * &w;
    Ok(JordanChain { kernel: SVector::from_column_slice(mw.as_slice()), generalized: SVector::from_column_slice(w.as_slice()) })
}

/// Drift of the nonlinear flow started at `z_e + εw`: the coordinate along
/// `v₀ = Mw` of the deviation, sampled at the given times.
pub fn drift_samples(
    s: &ReducedState,
    chain: &JordanChain,
    eps: f64,
    dt: f64,
    times: &[f64],
    m: &ThreeBodyMasses,
    pp: &PairPotential,
) -> Result<Vec<(f64, f64)>> {
    let ze = s.to_array();
    let mut z0 = ze;
    for i in 0..DIM {
        z0[i] += eps * chain.generalized[i];
    }
    let v0 = chain.kernel;
    let tmax = times.iter().copied().fold(0.0, f64::max);
    let steps = (tmax / dt).round() as usize;
    let traj = integrate_reduced(&ReducedState::from_array(&z0, s.mu), m, pp, &IntegratorSettings::new(dt, steps))?;
    if traj.outcome.is_collision() {
        return Err(Error::NotApplicable("collision during drift integration".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let idx = (t / dt).round() as usize;
        let z = traj.samples[idx].state.to_array();
        let proj: f64 = (0..DIM).map(|i| (z[i] - ze[i]) * v0[i]).sum::<f64>() / v0.norm_squared();
        out.push((traj.samples[idx].t, proj));
    }
    Ok(out)
}

/// Least-squares slope of `log y` against `log t`.
pub fn loglog_slope(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|(t, y)| (t.ln(), y.abs().ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn a_coefficient_newtonian() {
        // lV'' − V' = −3/l² so a = −9/(8(1+γ²)² l)
        let v = Potential::newtonian(1.0);
        assert_abs_diff_eq!(a_coefficient(&v, 1.0, 1.0).unwrap(), -9.0 / 32.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a_coefficient(&v, 2.0, 0.5).unwrap(), -9.0 / (8.0 * 1.25f64.powi(2) * 2.0), epsilon = 1e-15);
        assert_eq!(a_coefficient(&Potential::harmonic(1.0), 3.0, 1.0).unwrap(), 0.0);
        assert!(matches!(a_coefficient(&v, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn a_spectrum_matches_eigensolver() {
        for (a, g) in [(-0.3, 1.0), (1.7, 0.6), (-2.0, 1.9)] {
            let spec = a_matrix_spectrum(a, g);
            let mat = a_matrix(a, g);
            for (lambda, u) in spec {
                let u = nalgebra::Vector2::new(u[0], u[1]);
                assert!((mat * u - u * lambda).norm() < 1e-12);
            }
            let e = mat.symmetric_eigen().eigenvalues;
            let (lo, hi) = (e.min(), e.max());
            let expect = [0.0f64.min(spec[1].0), 0.0f64.max(spec[1].0)];
            assert_abs_diff_eq!(lo, expect[0], epsilon = 1e-12);
            assert_abs_diff_eq!(hi, expect[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn blocks_match_at_reference_point() {
        let (_, h, _) = analyse_equilateral(3.0, 1.0, &Potential::newtonian(1.0)).unwrap();
        for c in cross_check(&h) {
            assert!(c.rel_error < 1e-5, "{c:?}");
        }
        assert!((h.full - h.full.transpose()).abs().max() < 1e-10);
    }

    #[test]
    fn equilateral_family_makes_kernel_two_dimensional() {
        // at fixed μ the equilateral equilibria form a curve, so [F] is
        // singular and the zero eigenvalue of M is semisimple
        let (an, _, lin) = analyse_equilateral(3.0, 1.0, &Potential::newtonian(1.0)).unwrap();
        assert!(!an.report.f_nonsingular);
        assert_eq!(an.report.dim_ker_m, 2);
        assert_eq!(an.report.dim_ker_m2, 2);
        assert!(!an.report.nilpotent);
        assert_eq!(an.report.verdict, Verdict::Indeterminate);
        assert!(matches!(jordan_chain(&lin), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn lagrange_quartet() {
        // equal masses violate Routh's condition: in the frame rotating at ω
        // the planar triangle has λ² = −(ω²/2)(1 ± 2√2 i); here ω = c₁/ρ² = 1/24
        let (an, _, _) = analyse_equilateral(3.0, 1.0, &Potential::newtonian(1.0)).unwrap();
        let w = 1.0 / 24.0;
        let want = Complex::new(-0.5 * w * w, -2f64.sqrt() * w * w).sqrt();
        assert!(an.report.spectrally_unstable);
        assert_abs_diff_eq!(an.report.max_real_part, want.re.abs(), epsilon = 1e-9);
        let hits = an
            .report
            .eigenvalues
            .iter()
            .filter(|[re, im]| (re.abs() - want.re.abs()).abs() < 1e-9 && (im.abs() - want.im.abs()).abs() < 1e-9)
            .count();
        assert_eq!(hits, 4);
    }

    #[test]
    fn rejects_non_equilibrium() {
        let eq = equilateral_equilibrium(3.0, 3.0, &Potential::newtonian(1.0)).unwrap();
        let off = ReducedState { r1: eq.state.r1 * 1.1, ..eq.state };
        let pp = PairPotential::from(Potential::newtonian(1.0));
        assert!(matches!(hessian(&off, &ThreeBodyMasses::equal(), &pp), Err(Error::NotAnEquilibrium { .. })));
    }

    #[test]
    fn slope_of_power_law() {
        let s: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, 3.0 * (k as f64).powf(1.5))).collect();
        assert_abs_diff_eq!(loglog_slope(&s), 1.5, epsilon = 1e-12);
    }
}
