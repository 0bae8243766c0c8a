use std::f64::consts::PI;

use nalgebra::DMatrix;
use nbody4d::central_force::{integrate_central, is_collision_possible};
use nbody4d::geom4::momentum_map_single;
use nbody4d::integrator::IntegratorSettings;
use nbody4d::nbody::{integrate, total_energy, Configuration, NBodyTrajectory, PhaseState};
use nbody4d::ngons::{solve_re_radii, symmetric_state, NGonSpec};
use nbody4d::rel_equilibria::{is_central, re_initial_state, re_residual, solve_balanced_omega, CollinearSpec};
use nbody4d::stability::{analyse_equilateral, kernel_basis, RANK_TOL};
use nbody4d::threebody::{
    equilateral_equilibrium, integrate_reduced, rate_norm, reconstruct, reduce, reduced_energy_3b, wrap,
    ThreeBodyMasses,
};
use nbody4d::{GroupVelocity, Momentum, PairPotential, Potential, Vec4};

fn newton() -> PairPotential {
    PairPotential::new(Potential::newtonian(1.0), true)
}

fn pairwise(pos: &[[f64; 4]]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            out.push((Vec4::from(pos[i]) - Vec4::from(pos[j])).norm());
        }
    }
    out
}

fn distance_drift(traj: &NBodyTrajectory) -> f64 {
    let d0 = pairwise(&traj.samples[0].positions);
    traj.samples
        .iter()
        .flat_map(|s| pairwise(&s.positions).into_iter().zip(d0.clone()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Two circular binaries of unit masses on a wide circular orbit, in
/// different planes.
fn four_body() -> PhaseState {
    let (sep, wide): (f64, f64) = (1.5, 12.0);
    let vb = (2.0 / sep).sqrt() / 2.0;
    let vo = (4.0 / wide).sqrt() / 2.0;
    let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let binaries = [
        (e1 * (wide / 2.0), Vec4::new(0.0, 1.0, 0.0, 0.0) * vo, Vec4::new(0.0, 0.0, 1.0, 0.0), Vec4::new(0.0, 0.0, 0.0, 1.0)),
        (e1 * (-wide / 2.0), Vec4::new(0.0, -1.0, 0.0, 0.0) * vo, Vec4::new(0.0, 0.6, 0.8, 0.0), Vec4::new(0.0, 0.0, 0.0, -1.0)),
    ];
    let (mut q, mut p) = (Vec::new(), Vec::new());
    for (c, v, a, b) in binaries {
        q.push(c + a * (sep / 2.0));
        q.push(c - a * (sep / 2.0));
        p.push(v + b * vb);
        p.push(v - b * vb);
    }
    PhaseState::new(Configuration::new(vec![1.0; 4], q).unwrap(), p).unwrap()
}

#[test]
fn four_body_conservation() {
    let s0 = four_body();
    let traj = integrate(&s0, &newton(), &IntegratorSettings::new(1e-3, 100_000).record_every(100)).unwrap();
    assert!(!traj.outcome.is_collision());
    let (e0, mu0) = (traj.samples[0].energy, traj.samples[0].mu);
    for s in &traj.samples {
        assert!(((s.energy - e0) / e0).abs() < 1e-6, "energy drift {} at t = {}", (s.energy - e0) / e0, s.t);
        assert!((s.mu.mu1 - mu0.mu1).abs() < 1e-9 && (s.mu.mu2 - mu0.mu2).abs() < 1e-9);
    }
}

#[test]
fn planes_are_invariant() {
    // positions and momenta in the plane spanned by a and b
    let a = Vec4::new(1.0, 2.0, -1.0, 0.5).normalize();
    let b = Vec4::new(0.0, 1.0, 1.0, 1.0);
    let b = (b - a * a.dot(&b)).normalize();
    let q = vec![a * 1.0 + b * 0.2, a * -0.7 + b * 0.9, b * -1.1];
    let p = vec![b * 0.4, a * -0.3 + b * -0.2, a * 0.3 - b * 0.2];
    let s0 = PhaseState::new(Configuration::new(vec![1.0, 0.8, 1.3], q).unwrap(), p).unwrap();
    let traj = integrate(&s0, &newton(), &IntegratorSettings::new(1e-3, 5000).record_every(50)).unwrap();
    for s in &traj.samples {
        for x in s.positions.iter().chain(&s.momenta) {
            let x = Vec4::from(*x);
            let off = x - a * a.dot(&x) - b * b.dot(&x);
            assert!(off.norm() < 1e-10);
        }
    }
}

#[test]
fn central_configuration_rotates_rigidly_with_equal_rates() {
    // equilateral triangle in an oblique plane
    let a = Vec4::new(1.0, 0.0, 1.0, 0.0) / 2f64.sqrt();
    let b = Vec4::new(0.0, 1.0, 0.0, 1.0) / 2f64.sqrt();
    let q: Vec<Vec4> = (0..3).map(|k| {
        let t = 2.0 * PI * k as f64 / 3.0;
        a * t.cos() + b * t.sin()
    }).collect();
    let c = Configuration::new(vec![1.0; 3], q).unwrap();
    let pp = newton();
    let (central, lambda) = is_central(&c, &pp).unwrap();
    assert!(central && lambda < 0.0);
    let w = (-lambda).sqrt();
    let omega = GroupVelocity::new(w, w);
    assert!(re_residual(&c, omega, &pp).unwrap().iter().all(|r| r.norm() < 1e-12));
    let s0 = re_initial_state(&c, omega);
    let steps = 20_000;
    let traj = integrate(&s0, &pp, &IntegratorSettings::new(2.0 * PI / w / steps as f64, steps).record_every(20)).unwrap();
    assert!(distance_drift(&traj) < 1e-6);
}

#[test]
fn balanced_square_digon_is_rigid() {
    // Type II polygon: square in Oxy, digon in Ozw, with distinct rates
    let spec = NGonSpec::new(1, 4, 1, 2, 1.0, 0.6);
    let c = nbody4d::ngons::build(&spec).unwrap();
    let pp = PairPotential::new(Potential::newtonian(1.0), false);
    let res = solve_balanced_omega(&c, &pp).unwrap();
    let omega = res.group_velocity(0.0);
    assert!((omega.omega1 - omega.omega2).abs() > 1e-3);
    let s0 = re_initial_state(&c, omega);
    let steps = 20_000;
    let period = 2.0 * PI / omega.omega1.abs().max(omega.omega2.abs());
    let traj = integrate(&s0, &pp, &IntegratorSettings::new(period / steps as f64, steps).record_every(20)).unwrap();
    assert!(distance_drift(&traj) < 1e-6);
}

#[test]
fn oblique_collinear_motion_stays_planar() {
    let spec = CollinearSpec { q0: [0.6, 0.8, 0.3, -0.4], lambdas: vec![2.0, -1.0] };
    let a = Vec4::from(spec.q0).norm();
    let w = (1.0 / (9.0 * a * a) / (2.0 * a)).sqrt();
    let c = Configuration::new(vec![1.0, 2.0], spec.positions()).unwrap();
    let pp = PairPotential::new(Potential::newtonian(1.0), false);
    let omega = GroupVelocity::new(w, w);
    let s0 = re_initial_state(&c, omega);
    let steps = 10_000;
    let traj = integrate(&s0, &pp, &IntegratorSettings::new(2.0 * PI / w / steps as f64, steps).record_every(50)).unwrap();
    let rows: Vec<[f64; 4]> = traj.samples.iter().flat_map(|s| s.positions.clone()).collect();
    let m = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let sv = m.svd(false, false).singular_values;
    let rank = sv.iter().filter(|s| **s > 1e-8 * sv.max()).count();
    assert_eq!(rank, 2, "{sv}");
}

#[test]
fn polygon_relative_equilibrium_keeps_radii() {
    // pentagon in Oxy over a pentagram in Ozw
    let mut spec = NGonSpec::new(1, 5, 2, 5, 1.0, 1.0);
    let (c1, c2) = (1.0, 0.7);
    let v = Potential::newtonian(1.0);
    let r = solve_re_radii(&spec, c1, c2, &v).unwrap();
    assert!(r.residual < 1e-10);
    spec.r1 = r.r1;
    spec.r2 = r.r2;
    let s0 = symmetric_state(&spec, 0.0, 0.0, c1, c2).unwrap();
    let rate = (c1 / (r.r1 * r.r1)).abs().max((c2 / (r.r2 * r.r2)).abs());
    let steps = 20_000;
    let traj = integrate(&s0, &PairPotential::new(v, false), &IntegratorSettings::new(2.0 * PI / rate / steps as f64, steps).record_every(20))
        .unwrap();
    for s in &traj.samples {
        // the vertices share common radii, which stay near the equilibrium
        let (a, b) = (s.positions[0][0].hypot(s.positions[0][1]), s.positions[0][2].hypot(s.positions[0][3]));
        for q in &s.positions {
            assert!((q[0].hypot(q[1]) - a).abs() < 1e-8 && (q[2].hypot(q[3]) - b).abs() < 1e-8);
        }
        assert!((a - r.r1).abs() < 1e-6 && (b - r.r2).abs() < 1e-6);
    }
}

#[test]
fn zero_momentum_without_collision() {
    // μ = (0, 0) but motion in the xz plane: the body misses the origin
    let v = Potential::newtonian(1.0);
    let (q, p) = (Vec4::new(1.0, 0.0, 0.0, 0.0), Vec4::new(0.0, 0.0, 0.8, 0.0));
    assert!(momentum_map_single(&q, &p).is_zero());
    assert!(is_collision_possible(Momentum::new(0.0, 0.0), &v).unwrap());
    let traj = integrate_central(q, p, &v, &IntegratorSettings::new(1e-3, 20_000)).unwrap();
    assert!(!traj.outcome.is_collision());
    let closest = traj.samples.iter().map(|s| Vec4::from(s.q).norm()).fold(f64::INFINITY, f64::min);
    assert!(closest > 0.4);
}

fn triple() -> PhaseState {
    let q = vec![Vec4::new(-1.0, 0.1, 0.3, 0.0), Vec4::new(1.0, 0.0, -0.2, 0.4), Vec4::new(0.2, 1.5, 0.5, -0.6)];
    let p = vec![Vec4::new(0.1, -0.4, 0.2, 0.1), Vec4::new(-0.2, 0.4, 0.1, -0.3), Vec4::new(0.1, 0.0, -0.3, 0.2)];
    let masses = vec![1.0, 1.5, 0.8];
    let total: Vec4 = p.iter().sum();
    let mt: f64 = masses.iter().sum();
    let p = p.iter().zip(&masses).map(|(pi, m)| pi - total * (m / mt)).collect();
    PhaseState::new(Configuration::new(masses, q).unwrap(), p).unwrap()
}

#[test]
fn reduction_preserves_energy_and_momentum() {
    let pp = newton();
    let s = triple();
    let (red, psi) = reduce(&s).unwrap();
    let m = ThreeBodyMasses::new(1.0, 1.5, 0.8).unwrap();
    let e_full = total_energy(&s, &pp).unwrap();
    assert!((reduced_energy_3b(&red, &m, &pp).unwrap() - e_full).abs() < 1e-12);
    let mu = momentum_map_single(&s.config.positions[0], &s.momenta[0])
        + momentum_map_single(&s.config.positions[1], &s.momenta[1])
        + momentum_map_single(&s.config.positions[2], &s.momenta[2]);
    assert!((red.mu.mu1 - mu.mu1).abs() < 1e-12 && (red.mu.mu2 - mu.mu2).abs() < 1e-12);
    let back = reconstruct(&red, psi, &m).unwrap();
    let com = s.config.center_of_mass();
    for (a, b) in back.config.positions.iter().zip(&s.config.positions) {
        assert!((a - (b - com)).norm() < 1e-12);
    }
    for (a, b) in back.momenta.iter().zip(&s.momenta) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn reduced_and_full_trajectories_agree() {
    let pp = newton();
    let s = triple();
    let m = ThreeBodyMasses::new(1.0, 1.5, 0.8).unwrap();
    let (red, _) = reduce(&s).unwrap();
    let settings = IntegratorSettings::new(2.5e-5, 80_000).record_every(4000);
    let full = integrate(&s, &pp, &settings).unwrap();
    let reduced = integrate_reduced(&red, &m, &pp, &settings).unwrap();
    let e0 = full.samples[0].energy;
    for (f, r) in full.samples.iter().zip(&reduced.samples) {
        let (rf, _) = reduce(&f.state(&s.config.masses)).unwrap();
        let (a, b) = (rf.to_array(), r.state.to_array());
        for i in 0..12 {
            let d = if i == 4 || i == 5 { wrap(a[i] - b[i]) } else { a[i] - b[i] };
            assert!(d.abs() < 1e-6, "t = {}, component {i}: {} vs {}", f.t, a[i], b[i]);
        }
        // cyclic momenta of the unreduced chart stay fixed
        assert!((rf.mu.mu1 - red.mu.mu1).abs() < 1e-9 && (rf.mu.mu2 - red.mu.mu2).abs() < 1e-9);
        assert!((reduced_energy_3b(&rf, &m, &pp).unwrap() - f.energy).abs() < 1e-8 * e0.abs());
        assert!((r.energy - e0).abs() < 1e-8 * e0.abs());
    }
}

#[test]
fn equilateral_equilibrium_stays_put() {
    let pp = newton();
    let m = ThreeBodyMasses::equal();
    let eq = equilateral_equilibrium(2.0, 1.0, &Potential::newtonian(1.0)).unwrap();
    assert!(rate_norm(&eq.state, &m, &pp).unwrap() < 1e-10);
    let traj = integrate_reduced(&eq.state, &m, &pp, &IntegratorSettings::new(1e-2, 1000).record_every(100)).unwrap();
    let z0 = eq.state.to_array();
    for s in &traj.samples {
        let z = s.state.to_array();
        assert!((0..12).all(|i| (z[i] - z0[i]).abs() < 1e-9));
    }
    // and in the full system it is a rigid rotation
    let full = reconstruct(&eq.state, [0.3, -1.1], &m).unwrap();
    let w = eq.state.mu.mu1 / 3.0 / (eq.r0 * eq.r0);
    let steps = 20_000;
    let traj = integrate(&full, &pp, &IntegratorSettings::new(2.0 * PI / w / steps as f64, steps).record_every(20)).unwrap();
    assert!(distance_drift(&traj) < 1e-6);
}

#[test]
fn equilateral_kernel_structure() {
    for mu in [0.5, 1.0, 1.5, 2.0] {
        for gamma in [0.5, 1.0, 1.5, 2.0] {
            let (an, h, lin) = analyse_equilateral(mu, gamma, &Potential::newtonian(1.0)).unwrap();
            let r = &an.report;
            // zero has even algebraic multiplicity
            assert_eq!(r.dim_ker_m2 % 2, 0);
            // [F] is singular here, so no nilpotent verdict is possible
            assert!(!r.f_nonsingular);
            assert!(r.spectrally_unstable);
            // infinitesimally symplectic: the spectrum is closed under λ ↦ −λ and λ ↦ λ̄
            let radius = r.eigenvalues.iter().map(|e| e[0].hypot(e[1])).fold(0.0, f64::max);
            for e in &r.eigenvalues {
                for image in [[-e[0], -e[1]], [e[0], -e[1]]] {
                    let gap = r.eigenvalues.iter().map(|f| (f[0] - image[0]).hypot(f[1] - image[1])).fold(f64::INFINITY, f64::min);
                    assert!(gap < 1e-8 * radius, "{e:?}");
                }
            }
            let full = DMatrix::from_column_slice(12, 12, h.full.as_slice());
            let g2 = gamma * gamma;
            for k in kernel_basis(&full, RANK_TOL) {
                // radial momenta vanish and the angle part lies in ker[a]
                assert!((6..10).all(|i| k[i].abs() < 1e-6), "{k}");
                assert!((k[4] + g2 * k[5]).abs() < 1e-6, "{k}");
            }
            let lin = DMatrix::from_column_slice(12, 12, lin.as_slice());
            assert_eq!(kernel_basis(&lin, RANK_TOL).len(), r.dim_ker_m);
        }
    }
}
