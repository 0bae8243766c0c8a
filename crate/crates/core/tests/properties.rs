use nbody4d::geom4::{
    double_rotation, exp_hat, hat, infinitesimal_action, isotropy_type, momentum_map_single, rotation_normal_form,
};
use nbody4d::nbody::{grad_u, kinetic_energy, potential_energy, recenter, total_energy, Configuration, PhaseState};
use nbody4d::ngons::{build, pair_distance, reduced_ngon_energy, symmetric_state, NGonSpec};
use nbody4d::rel_equilibria::{re_residual, solve_balanced_omega};
use nbody4d::{GroupVelocity, Mat4, PairPotential, Potential, Vec4};
use proptest::prelude::*;

fn vec4(range: f64) -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-range..range).prop_map(Vec4::from)
}

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

/// Orthogonal matrix from the QR factor of a random matrix.
fn orthogonal() -> impl Strategy<Value = Mat4> {
    prop::array::uniform16(-1.0..1.0f64).prop_filter_map("well conditioned", |a| {
        let m = Mat4::from_column_slice(&a);
        (m.determinant().abs() > 1e-2).then(|| m.qr().q())
    })
}

fn potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.1..5.0f64).prop_map(Potential::newtonian),
        (0.1..5.0f64).prop_map(Potential::jacobi),
        (0.1..5.0f64, 0.2..3.5f64).prop_map(|(k, a)| Potential::homogeneous(k, a)),
        (0.1..5.0f64).prop_map(Potential::harmonic),
    ]
}

fn configuration(n: usize) -> impl Strategy<Value = Configuration> {
    (prop::collection::vec(0.2..3.0f64, n), prop::collection::vec(vec4(3.0), n)).prop_filter_map(
        "no near collisions",
        |(m, q)| {
            let c = Configuration::new(m, q).ok()?;
            (c.min_pair_distance()?.2 > 0.1).then_some(c)
        },
    )
}

fn block() -> impl Strategy<Value = (u32, u32)> {
    (2u32..=9).prop_flat_map(|b| (1..b).prop_filter("coprime", move |a| num_gcd(*a, b) == 1).prop_map(move |a| (a, b)))
}

fn num_gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

proptest! {
    #[test]
    fn rotation_is_tangent_to_spheres(w1 in -5.0..5.0f64, w2 in -5.0..5.0f64, q in vec4(10.0)) {
        let omega = GroupVelocity::new(w1, w2);
        let scale = (w1.abs() + w2.abs()) * q.norm_squared() + 1.0;
        prop_assert!(q.dot(&(hat(omega) * q)).abs() < 1e-14 * scale);
        prop_assert!((infinitesimal_action(omega, &q) - hat(omega) * q).norm() < 1e-14 * scale);
    }

    #[test]
    fn exponential_is_a_rotation(w1 in -20.0..20.0f64, w2 in -20.0..20.0f64) {
        let r = exp_hat(GroupVelocity::new(w1, w2));
        prop_assert!((r.transpose() * r - Mat4::identity()).abs().max() < 1e-13);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn normal_form_reassembles(t1 in angle(), t2 in angle(), q in orthogonal()) {
        let r = q * double_rotation(t1, t2) * q.transpose();
        let nf = rotation_normal_form(&r).unwrap();
        prop_assert!((nf.reassemble() - r).abs().max() < 1e-10);
        // the normal form is unique up to the order and signs of the angles
        let mut got = [nf.theta1.cos(), nf.theta2.cos()];
        let mut want = [t1.cos(), t2.cos()];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        prop_assert!((got[0] - want[0]).abs() < 1e-8 && (got[1] - want[1]).abs() < 1e-8);
    }

    #[test]
    fn momentum_map_is_torus_invariant(t1 in angle(), t2 in angle(), q in vec4(5.0), p in vec4(5.0)) {
        let r = double_rotation(t1, t2);
        let a = momentum_map_single(&q, &p);
        let b = momentum_map_single(&(r * q), &(r * p));
        prop_assert!((a.mu1 - b.mu1).abs() < 1e-12 * (1.0 + q.norm() * p.norm()));
        prop_assert!((a.mu2 - b.mu2).abs() < 1e-12 * (1.0 + q.norm() * p.norm()));
    }

    #[test]
    fn isotropy_is_constant_on_orbits(t1 in angle(), t2 in angle(), q in vec4(5.0), zero_xy: bool, zero_zw: bool) {
        let mut q = q;
        if zero_xy { q.x = 0.0; q.y = 0.0; }
        if zero_zw { q.z = 0.0; q.w = 0.0; }
        prop_assert_eq!(isotropy_type(&q), isotropy_type(&(double_rotation(t1, t2) * q)));
    }

    #[test]
    fn potential_derivatives_match_differences(v in potential(), r in 0.1..10.0f64) {
        let d = v.eval(r).unwrap();
        let h = 1e-5 * r;
        let fd1 = (v.value(r + h).unwrap() - v.value(r - h).unwrap()) / (2.0 * h);
        let fd2 = (v.first(r + h).unwrap() - v.first(r - h).unwrap()) / (2.0 * h);
        prop_assert!((fd1 - d.first).abs() <= 1e-6 * d.first.abs().max(1e-12));
        prop_assert!((fd2 - d.second).abs() <= 1e-6 * d.second.abs().max(1e-12));
    }

    #[test]
    fn third_law(c in configuration(4), v in potential(), weighted: bool) {
        let g = grad_u(&c, &PairPotential::new(v, weighted)).unwrap();
        let total: Vec4 = g.iter().sum();
        let scale: f64 = g.iter().map(|x| x.norm()).sum();
        prop_assert!(total.norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn potential_is_translation_invariant(c in configuration(3), shift in vec4(10.0), v in potential()) {
        let pp = PairPotential::new(v, true);
        let before = potential_energy(&c, &pp).unwrap();
        let moved = Configuration { masses: c.masses.clone(), positions: c.positions.iter().map(|q| q + shift).collect() };
        let centred = recenter(&moved);
        prop_assert!(centred.center_of_mass().norm() < 1e-12 * (1.0 + shift.norm()));
        let after = potential_energy(&centred, &pp).unwrap();
        prop_assert!((before - after).abs() < 1e-11 * (1.0 + before.abs()));
        // momenta are untouched, so the kinetic part carries over unchanged
        let momenta = vec![Vec4::new(0.3, -0.1, 0.2, 0.5); 3];
        let a = PhaseState::new(c.clone(), momenta.clone()).unwrap();
        let b = PhaseState::new(centred, momenta).unwrap();
        prop_assert_eq!(kinetic_energy(&a), kinetic_energy(&b));
        prop_assert!((total_energy(&a, &pp).unwrap() - total_energy(&b, &pp).unwrap()).abs() < 1e-11 * (1.0 + before.abs()));
    }

    #[test]
    fn polygon_distances_are_symmetric((a1, b1) in block(), (a2, b2) in block(), r1 in 0.1..3.0f64, r2 in 0.1..3.0f64) {
        let spec = NGonSpec::new(a1, b1, a2, b2, r1, r2);
        let n = spec.order();
        for k in 1..n {
            prop_assert!((pair_distance(&spec, k).unwrap() - pair_distance(&spec, n - k).unwrap()).abs() < 1e-12 * (r1 + r2));
        }
        let c = build(&spec).unwrap();
        for k in 1..n as usize {
            let d = (c.positions[0] - c.positions[k]).norm();
            prop_assert!((d - pair_distance(&spec, k as u32).unwrap()).abs() < 1e-12 * (r1 + r2));
        }
    }

    #[test]
    fn reduced_polygon_energy_is_total_energy(
        (a1, b1) in block(), (a2, b2) in block(),
        r1 in 0.3..3.0f64, r2 in 0.3..3.0f64,
        pr1 in -1.0..1.0f64, pr2 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64,
    ) {
        let spec = NGonSpec::new(a1, b1, a2, b2, r1, r2);
        let v = Potential::newtonian(1.0);
        let Ok(state) = symmetric_state(&spec, pr1, pr2, c1, c2) else { return Ok(()); };
        let full = total_energy(&state, &PairPotential::new(v, false)).unwrap();
        let red = reduced_ngon_energy(r1, pr1, r2, pr2, c1, c2, &spec, &v).unwrap();
        prop_assert!((full - red).abs() < 1e-10 * (1.0 + full.abs()));
    }

    #[test]
    fn balanced_polygon_has_its_rates(
        (a1, b1) in block(), (a2, b2) in block(), r1 in 0.3..3.0f64, r2 in 0.3..3.0f64,
    ) {
        // every regular polygon with equal masses is a balanced configuration
        let spec = NGonSpec::new(a1, b1, a2, b2, r1, r2);
        let Ok(c) = build(&spec) else { return Ok(()); };
        let pp = PairPotential::new(Potential::newtonian(1.0), false);
        let res = solve_balanced_omega(&c, &pp).unwrap();
        let omega = res.group_velocity(0.0);
        let scale = grad_u(&c, &pp).unwrap().iter().map(|g| g.norm()).fold(0.0, f64::max);
        prop_assert!(re_residual(&c, omega, &pp).unwrap().iter().all(|r| r.norm() < 1e-9 * scale));
        // a wrong rate in an occupied plane leaves a residual
        let off = GroupVelocity::new(omega.omega1 * 1.1 + 0.01, omega.omega2);
        prop_assert!(re_residual(&c, off, &pp).unwrap().iter().any(|r| r.norm() > 1e-6 * scale));
    }
}
