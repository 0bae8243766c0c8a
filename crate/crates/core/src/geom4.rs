//! Linear geometry of rotations in four dimensions.
//!
//! Every rotation of R^4 is conjugate to a pair of independent planar
//! rotations of the `Oxy` and `Ozw` planes, and every infinitesimal rotation
//! is conjugate to a block-diagonal antisymmetric matrix. This module computes
//! those normal forms and provides the torus action (the double planar
//! rotation group `SO(2) x SO(2)`) together with its momentum map.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

/// Absolute tolerance for zero tests on coordinates.
pub const ZERO_TOL: f64 = 1e-12;

/// Tolerance on `RᵀR = I`, `det R = 1` and `ξᵀ = -ξ` checks.
pub const MATRIX_TOL: f64 = 1e-9;

/// An element `(ω₁, ω₂)` of `so(2) x so(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupVelocity {
    pub omega1: f64,
    pub omega2: f64,
}

impl GroupVelocity {
    pub const fn new(omega1: f64, omega2: f64) -> Self {
        Self { omega1, omega2 }
    }

    /// Diagonal of `hat(ω)²`, i.e. `(-ω₁², -ω₁², -ω₂², -ω₂²)`.
    pub fn hat_squared_diagonal(&self) -> Vec4 {
        let a = -self.omega1 * self.omega1;
        let b = -self.omega2 * self.omega2;
        Vec4::new(a, a, b, b)
    }
}

/// Angular momentum pair `(μ₁, μ₂)`: the value of the torus momentum map.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Momentum {
    pub mu1: f64,
    pub mu2: f64,
}

impl Momentum {
    pub const fn new(mu1: f64, mu2: f64) -> Self {
        Self { mu1, mu2 }
    }

    pub fn is_zero(&self) -> bool {
        self.mu1 == 0.0 && self.mu2 == 0.0
    }
}

impl std::ops::Add for Momentum {
    type Output = Momentum;
    fn add(self, rhs: Momentum) -> Momentum {
        Momentum::new(self.mu1 + rhs.mu1, self.mu2 + rhs.mu2)
    }
}

/// `R = Q S(θ₁, θ₂) Qᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationNormalForm {
    pub theta1: f64,
    pub theta2: f64,
    pub q: Mat4,
}

impl RotationNormalForm {
    pub fn reassemble(&self) -> Mat4 {
        self.q * double_rotation(self.theta1, self.theta2) * self.q.transpose()
    }
}

/// `ξ = Q hat(ω) Qᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieNormalForm {
    pub omega: GroupVelocity,
    pub q: Mat4,
}

impl LieNormalForm {
    pub fn reassemble(&self) -> Mat4 {
        self.q * hat(self.omega) * self.q.transpose()
    }
}

/// Isotropy subgroup of a point under the double planar rotation group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitType {
    /// The origin: fixed by the whole torus.
    FullTorus,
    /// A nonzero point of the `Oxy` plane: fixed by rotations of `Ozw`.
    SO2zw,
    /// A nonzero point of the `Ozw` plane: fixed by rotations of `Oxy`.
    SO2xy,
    /// Generic point with trivial isotropy.
    Trivial,
}

/// Conjugate momenta in double-polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarMomenta {
    pub p_r1: f64,
    pub p_theta1: f64,
    pub p_r2: f64,
    pub p_theta2: f64,
}

/// `x = r₁cosθ₁, y = r₁sinθ₁, z = r₂cosθ₂, w = r₂sinθ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DoublePolar {
    pub r1: f64,
    pub theta1: f64,
    pub r2: f64,
    pub theta2: f64,
    pub momenta: Option<PolarMomenta>,
    /// Set when `r₁` is below tolerance; `θ₁` is then reported as 0.
    pub angle1_undefined: bool,
    /// Set when `r₂` is below tolerance; `θ₂` is then reported as 0.
    pub angle2_undefined: bool,
}

pub fn hat(omega: GroupVelocity) -> Mat4 {
    let (a, b) = (omega.omega1, omega.omega2);
    Mat4::new(
        0.0, -a, 0.0, 0.0, //
        a, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -b, //
        0.0, 0.0, b, 0.0,
    )
}

/// The normal form `S(θ₁, θ₂)`: rotation by `θ₁` in `Oxy` and `θ₂` in `Ozw`.
pub fn double_rotation(theta1: f64, theta2: f64) -> Mat4 {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    Mat4::new(
        c1, -s1, 0.0, 0.0, //
        s1, c1, 0.0, 0.0, //
        0.0, 0.0, c2, -s2, //
        0.0, 0.0, s2, c2,
    )
}

/// `exp(hat(ω))`, evaluated blockwise in closed form.
pub fn exp_hat(omega: GroupVelocity) -> Mat4 {
    double_rotation(omega.omega1, omega.omega2)
}

/// The block exchange `τ(x, y, z, w) = (z, w, x, y)`.
pub fn block_swap() -> Mat4 {
    Mat4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    )
}

// diag(1,-1,1,-1): conjugation flips the sign of both block angles
fn block_flip() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(1.0, -1.0, 1.0, -1.0))
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn gram_schmidt(v: &Vec4, basis: &[Vec4]) -> Vec4 {
    let mut out = *v;
    // two passes for numerical orthogonality
    for _ in 0..2 {
        for b in basis {
            out -= b * b.dot(&out);
        }
    }
    out
}

/// Generalized cross product: the unit vector completing `(a, b, c)` to a
/// positively oriented orthonormal frame.
fn complete_frame(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let m = nalgebra::Matrix3x4::from_rows(&[a.transpose(), b.transpose(), c.transpose()]);
    let mut d = Vec4::zeros();
    for k in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&j| j != k).collect();
        let minor = nalgebra::Matrix3::from_fn(|r, s| m[(r, cols[s])]);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        d[k] = sign * minor.determinant();
    }
    d.normalize()
}

/// Orthonormal frame adapted to the two invariant planes of a normal matrix,
/// given its commuting symmetric and antisymmetric parts.
fn invariant_frame(sym: &Mat4, skew: &Mat4) -> Mat4 {
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vecs: Vec<Vec4> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let scale = skew.amax().max(1.0);

    let q1 = vecs[0].normalize();
    let k1 = skew * q1;
    let q2 = if k1.norm() > 1e-7 * scale {
        gram_schmidt(&k1, &[q1]).normalize()
    } else {
        // zero skew part on this plane: its partner shares the eigenvalue
        gram_schmidt(&vecs[1], &[q1]).normalize()
    };
    let q3 = vecs
        .iter()
        .map(|v| gram_schmidt(v, &[q1, q2]))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("four eigenvectors")
        .normalize();
    let q4 = complete_frame(&q1, &q2, &q3);
    Mat4::from_columns(&[q1, q2, q3, q4])
}

/// Candidate re-labellings of a block-diagonal normal form: identity, block
/// exchange, simultaneous sign flip, and both.
fn normal_form_symmetries() -> [(Mat4, bool, bool); 4] {
    let t = block_swap();
    let f = block_flip();
    [
        (Mat4::identity(), false, false),
        (t, true, false),
        (f, false, true),
        (t * f, true, true),
    ]
}

fn check_rotation(r: &Mat4) -> Result<()> {
    let orthogonality = (r.transpose() * r - Mat4::identity()).amax();
    let det = r.determinant();
    if !orthogonality.is_finite() || orthogonality > MATRIX_TOL || (det - 1.0).abs() > MATRIX_TOL {
        return Err(Error::NotARotation { orthogonality, det });
    }
    Ok(())
}

/// Normal form `R = Q S(θ₁, θ₂) Qᵀ` of a rotation of R^4.
///
/// The pair `(θ₁, θ₂)` is only defined up to block exchange and a
/// simultaneous sign change; the returned representative satisfies
/// `θ₁ ≤ θ₂` and is the lexicographically largest such pair. When the
/// invariant planes are not unique (`R = I`, or `θ₁ = ±θ₂ = ±π/2`) any valid
/// `Q` may be returned.
pub fn rotation_normal_form(r: &Mat4) -> Result<RotationNormalForm> {
    check_rotation(r)?;
    let sym = r + r.transpose();
    let skew = r - r.transpose();
    let q = invariant_frame(&sym, &skew);
    let b = q.transpose() * r * q;
    let theta1 = b[(1, 0)].atan2(b[(0, 0)]);
    let theta2 = b[(3, 2)].atan2(b[(2, 2)]);

    let mut best: Option<RotationNormalForm> = None;
    for (p, swap, flip) in normal_form_symmetries() {
        let (mut t1, mut t2) = if swap { (theta2, theta1) } else { (theta1, theta2) };
        if flip {
            t1 = wrap_angle(-t1);
            t2 = wrap_angle(-t2);
        }
        if t1 > t2 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => (t1, t2) > (b.theta1, b.theta2),
        };
        if better {
            best = Some(RotationNormalForm { theta1: t1, theta2: t2, q: q * p });
        }
    }
    Ok(best.expect("one ordering always satisfies θ₁ ≤ θ₂"))
}

/// Normal form `ξ = Q hat(ω) Qᵀ` of an infinitesimal rotation.
///
/// The representative satisfies `|ω₁| ≤ |ω₂|`, ties broken by taking the
/// lexicographically largest pair. For `|ω₁| = |ω₂|` the invariant planes
/// are not unique and any valid `Q` may be returned.
pub fn lie_normal_form(xi: &Mat4) -> Result<LieNormalForm> {
    let defect = (xi + xi.transpose()).amax();
    if !defect.is_finite() || defect > MATRIX_TOL * xi.amax().max(1.0) {
        return Err(Error::NotAntisymmetric { defect });
    }
    let xi = (xi - xi.transpose()) * 0.5;
    let q = invariant_frame(&(xi * xi), &xi);
    let b = q.transpose() * xi * q;
    let w1 = 0.5 * (b[(1, 0)] - b[(0, 1)]);
    let w2 = 0.5 * (b[(3, 2)] - b[(2, 3)]);
    let scale = w1.abs().max(w2.abs()).max(1.0);

    let mut best: Option<LieNormalForm> = None;
    for (p, swap, flip) in normal_form_symmetries() {
        let (mut a, mut c) = if swap { (w2, w1) } else { (w1, w2) };
        if flip {
            a = -a;
            c = -c;
        }
        if a.abs() > c.abs() + 1e-12 * scale {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => (a, c) > (b.omega.omega1, b.omega.omega2),
        };
        if better {
            best = Some(LieNormalForm { omega: GroupVelocity::new(a, c), q: q * p });
        }
    }
    Ok(best.expect("one ordering always satisfies |ω₁| ≤ |ω₂|"))
}

/// `hat(ω) q = (-ω₁y, ω₁x, -ω₂w, ω₂z)`.
pub fn infinitesimal_action(omega: GroupVelocity, q: &Vec4) -> Vec4 {
    Vec4::new(
        -omega.omega1 * q.y,
        omega.omega1 * q.x,
        -omega.omega2 * q.w,
        omega.omega2 * q.z,
    )
}

pub fn isotropy_type(q: &Vec4) -> OrbitType {
    isotropy_type_tol(q, ZERO_TOL)
}

pub fn isotropy_type_tol(q: &Vec4, tol: f64) -> OrbitType {
    let xy_zero = q.x.hypot(q.y) <= tol;
    let zw_zero = q.z.hypot(q.w) <= tol;
    match (xy_zero, zw_zero) {
        (true, true) => OrbitType::FullTorus,
        (false, true) => OrbitType::SO2zw,
        (true, false) => OrbitType::SO2xy,
        (false, false) => OrbitType::Trivial,
    }
}

/// Cartesian to double-polar coordinates, with cotangent-lifted momenta when
/// `p` is given (`p_θ₁ = x p_y − y p_x`, `p_r₁ = (x p_x + y p_y)/r₁`).
pub fn to_double_polar(q: &Vec4, p: Option<&Vec4>) -> DoublePolar {
    to_double_polar_tol(q, p, ZERO_TOL)
}

pub fn to_double_polar_tol(q: &Vec4, p: Option<&Vec4>, tol: f64) -> DoublePolar {
    let plane = |a: f64, b: f64, pa: f64, pb: f64| {
        let r = a.hypot(b);
        if r <= tol {
            // angle 0 by convention: radial direction is the first axis
            (r, 0.0, pa, a * pb - b * pa, true)
        } else {
            let theta = b.atan2(a);
            (r, theta, (a * pa + b * pb) / r, a * pb - b * pa, false)
        }
    };
    let pv = p.copied().unwrap_or_else(Vec4::zeros);
    let (r1, theta1, p_r1, p_theta1, u1) = plane(q.x, q.y, pv.x, pv.y);
    let (r2, theta2, p_r2, p_theta2, u2) = plane(q.z, q.w, pv.z, pv.w);
    DoublePolar {
        r1,
        theta1,
        r2,
        theta2,
        momenta: p.map(|_| PolarMomenta { p_r1, p_theta1, p_r2, p_theta2 }),
        angle1_undefined: u1,
        angle2_undefined: u2,
    }
}

impl DoublePolar {
    pub fn from_coords(r1: f64, theta1: f64, r2: f64, theta2: f64) -> Self {
        Self { r1, theta1, r2, theta2, ..Default::default() }
    }

    pub fn with_momenta(mut self, momenta: PolarMomenta) -> Self {
        self.momenta = Some(momenta);
        self
    }

    /// Inverse map. Returns the Cartesian momenta when polar momenta are set.
    pub fn to_cartesian(&self) -> Result<(Vec4, Option<Vec4>)> {
        if !(self.r1 >= 0.0 && self.r2 >= 0.0) {
            return Err(Error::Domain(format!(
                "polar radii must be nonnegative, got ({}, {})",
                self.r1, self.r2
            )));
        }
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        let q = Vec4::new(self.r1 * c1, self.r1 * s1, self.r2 * c2, self.r2 * s2);
        let p = self.momenta.map(|m| {
            let tangential = |p_theta: f64, r: f64| if r > 0.0 { p_theta / r } else { 0.0 };
            let t1 = tangential(m.p_theta1, self.r1);
            let t2 = tangential(m.p_theta2, self.r2);
            Vec4::new(
                c1 * m.p_r1 - s1 * t1,
                s1 * m.p_r1 + c1 * t1,
                c2 * m.p_r2 - s2 * t2,
                s2 * m.p_r2 + c2 * t2,
            )
        });
        Ok((q, p))
    }
}

/// `J(q, p) = (p_y q_x − p_x q_y, p_w q_z − p_z q_w)`.
pub fn momentum_map_single(q: &Vec4, p: &Vec4) -> Momentum {
    Momentum::new(p.y * q.x - p.x * q.y, p.w * q.z - p.z * q.w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hat_of_unit_first_rate() {
        let m = hat(GroupVelocity::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m.iter().filter(|x| **x != 0.0).count(), 2);
        assert_eq!(hat(GroupVelocity::default()), Mat4::zeros());
        let h = hat(GroupVelocity::new(2.0, -3.0));
        assert_eq!(h.transpose(), -h);
    }

    #[test]
    fn hat_squared_is_diagonal() {
        let w = GroupVelocity::new(0.7, -1.3);
        let h = hat(w);
        assert_abs_diff_eq!(h * h, Mat4::from_diagonal(&w.hat_squared_diagonal()), epsilon = 1e-15);
    }

    #[test]
    fn identity_normal_form() {
        let nf = rotation_normal_form(&Mat4::identity()).unwrap();
        assert_abs_diff_eq!(nf.theta1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.theta2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.reassemble(), Mat4::identity(), epsilon = 1e-12);
    }

    #[test]
    fn block_swap_normal_form() {
        let tau = block_swap();
        // independent route: eigenvalues of τ from a generic eigensolver
        let mut eig: Vec<f64> = tau.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig.as_slice(), [-1.0, -1.0, 1.0, 1.0].as_slice(), epsilon = 1e-12);

        let nf = rotation_normal_form(&tau).unwrap();
        assert_abs_diff_eq!(nf.theta1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.theta2, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.reassemble(), tau, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.q.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn already_normal_rotation_is_reordered() {
        let s = double_rotation(PI / 3.0, PI / 5.0);
        let nf = rotation_normal_form(&s).unwrap();
        // canonical ordering θ₁ ≤ θ₂ exchanges the blocks
        assert_abs_diff_eq!(nf.theta1, PI / 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.theta2, PI / 3.0, epsilon = 1e-12);
        // the first invariant plane of the normal form is Ozw
        let first = nf.q.fixed_view::<2, 2>(0, 0).abs().max();
        assert_abs_diff_eq!(first, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.reassemble(), s, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_rotation() {
        let reflection = Mat4::from_diagonal(&Vec4::new(-1.0, 1.0, 1.0, 1.0));
        assert!(matches!(rotation_normal_form(&reflection), Err(Error::NotARotation { .. })));
        let skewed = Mat4::identity() * 1.01;
        assert!(matches!(rotation_normal_form(&skewed), Err(Error::NotARotation { .. })));
    }

    #[test]
    fn lie_normal_form_trivial_cases() {
        let nf = lie_normal_form(&hat(GroupVelocity::new(1.0, 2.0))).unwrap();
        assert_abs_diff_eq!(nf.omega.omega1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.omega.omega2, 2.0, epsilon = 1e-12);
        // planes are kept, though the frame may turn inside each of them
        assert_abs_diff_eq!(nf.q.fixed_view::<2, 2>(2, 0).abs().max(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nf.reassemble(), hat(GroupVelocity::new(1.0, 2.0)), epsilon = 1e-12);

        let nf = lie_normal_form(&Mat4::zeros()).unwrap();
        assert_eq!(nf.omega, GroupVelocity::new(0.0, 0.0));
        assert_abs_diff_eq!(nf.q.transpose() * nf.q, Mat4::identity(), epsilon = 1e-12);
    }

    #[test]
    fn lie_normal_form_rejects_symmetric() {
        assert!(matches!(lie_normal_form(&Mat4::identity()), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn infinitesimal_action_examples() {
        let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(infinitesimal_action(GroupVelocity::new(1.0, 0.0), &e1), Vec4::new(0.0, 1.0, 0.0, 0.0));
        let q = Vec4::new(3.0, -1.0, 2.0, 5.0);
        assert_eq!(infinitesimal_action(GroupVelocity::default(), &q), Vec4::zeros());
        let q = Vec4::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(infinitesimal_action(GroupVelocity::new(1.0, 2.0), &q), Vec4::new(-1.0, 0.0, 0.0, 2.0));
        let w = GroupVelocity::new(1.0, 2.0);
        assert_eq!(hat(w) * q, infinitesimal_action(w, &q));
    }

    #[test]
    fn orbit_types() {
        assert_eq!(isotropy_type(&Vec4::zeros()), OrbitType::FullTorus);
        assert_eq!(isotropy_type(&Vec4::new(1.0, 1.0, 0.0, 0.0)), OrbitType::SO2zw);
        assert_eq!(isotropy_type(&Vec4::new(0.0, 0.0, 0.0, -2.0)), OrbitType::SO2xy);
        assert_eq!(isotropy_type(&Vec4::new(1.0, 0.0, 1.0, 0.0)), OrbitType::Trivial);
        assert_eq!(isotropy_type(&Vec4::new(1.0, 0.0, 1e-13, 0.0)), OrbitType::SO2zw);
        assert_eq!(isotropy_type_tol(&Vec4::new(1.0, 0.0, 1e-13, 0.0), 0.0), OrbitType::Trivial);
    }

    #[test]
    fn double_polar_examples() {
        let dp = to_double_polar(&Vec4::new(1.0, 0.0, 0.0, 1.0), None);
        assert_abs_diff_eq!(dp.r1, 1.0);
        assert_abs_diff_eq!(dp.theta1, 0.0);
        assert_abs_diff_eq!(dp.r2, 1.0);
        assert_abs_diff_eq!(dp.theta2, PI / 2.0);
        assert!(dp.momenta.is_none());

        let dp = to_double_polar(&Vec4::new(1.0, 0.0, 0.0, 0.0), Some(&Vec4::new(0.0, 1.0, 0.0, 0.0)));
        let m = dp.momenta.unwrap();
        assert_abs_diff_eq!(m.p_theta1, 1.0);
        assert!(dp.angle2_undefined);
        assert!(!dp.angle1_undefined);
        assert_eq!(dp.theta2, 0.0);
    }

    #[test]
    fn double_polar_momentum_roundtrip() {
        let q = Vec4::new(0.3, -1.2, 2.0, 0.7);
        let p = Vec4::new(-0.4, 0.9, 0.1, -1.5);
        let dp = to_double_polar(&q, Some(&p));
        let m = dp.momenta.unwrap();
        let j = momentum_map_single(&q, &p);
        assert_abs_diff_eq!(m.p_theta1, j.mu1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.p_theta2, j.mu2, epsilon = 1e-15);
        let (q2, p2) = dp.to_cartesian().unwrap();
        assert_abs_diff_eq!(q2, q, epsilon = 1e-14);
        assert_abs_diff_eq!(p2.unwrap(), p, epsilon = 1e-14);
    }

    #[test]
    fn inverse_polar_rejects_negative_radius() {
        let dp = DoublePolar::from_coords(-1.0, 0.0, 1.0, 0.0);
        assert!(matches!(dp.to_cartesian(), Err(Error::Domain(_))));
    }

    #[test]
    fn momentum_map_examples() {
        let j = momentum_map_single(&Vec4::new(1.0, 0.0, 0.0, 0.0), &Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(j, Momentum::new(1.0, 0.0));
        let q = Vec4::new(0.4, -2.0, 1.5, 0.2);
        let j = momentum_map_single(&q, &(q * 2.5));
        assert_abs_diff_eq!(j.mu1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.mu2, 0.0, epsilon = 1e-15);
        let j = momentum_map_single(&Vec4::new(0.0, 0.0, 1.0, 0.0), &Vec4::new(0.0, 0.0, 0.0, 2.0));
        assert_eq!(j, Momentum::new(0.0, 2.0));
    }
}
