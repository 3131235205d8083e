//! Coupled system structure, time stepping and the discrete energy.

use std::sync::Arc;

use porostokes::assembly::{
    assemble_bjs, assemble_interface_coupling, assemble_load, assemble_system, assemble_weighted_mass,
    interface_quadrature, DirichletData, Sources, Spaces, Traction, Unknown,
};
use porostokes::field::ScalarField;
use porostokes::mesh::Marker;
use porostokes::mms::{
    error_norms, exact_state, manufactured_load, mms_mesh, run_manufactured, ManufacturedCase, MmsParameters,
    MultiplierNorm, REPORT_ORDER,
};
use porostokes::system::{discrete_energy, run_transient, Factorization, Stepper, TransientState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WALLS: [Marker; 4] = [Marker::WallLeft, Marker::WallRight, Marker::WallBottom, Marker::WallTop];

fn homogeneous(spaces: &Spaces) -> DirichletData {
    let sets: Vec<_> = [Unknown::StokesVelocity, Unknown::RelativeVelocity, Unknown::Displacement]
        .into_iter()
        .map(|u| (u, spaces.get(u).dirichlet_bcs(&WALLS, None, &|_, _| [0.0; 2], 0.0).unwrap()))
        .collect();
    DirichletData::from_sets(spaces, &sets).unwrap()
}

fn zero_theta_case() -> ManufacturedCase {
    ManufacturedCase::new(MmsParameters {
        theta: 0.0,
        ..MmsParameters::default()
    })
}

#[test]
fn energy_does_not_increase_without_sources() {
    let case = zero_theta_case();
    for level in [0, 1] {
        let mesh = Arc::new(mms_mesh(level).unwrap());
        let spaces = Spaces::taylor_hood(mesh).unwrap();
        let bc = homogeneous(&spaces);
        let stepper = Stepper::new(assemble_system(&spaces, &case.materials()).unwrap(), 0.05, &bc.dofs()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11 + level as u64);
        let mut x: Vec<f64> = (0..spaces.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for d in bc.dofs() {
            x[d] = 0.0;
        }
        let mut state = TransientState { t: 0.0, x, step: 0 };
        let e0 = discrete_energy(&stepper.system, &state.x);
        assert!(e0 > 0.0);
        let mut prev = e0;
        let zero = vec![0.0; spaces.dim()];
        for _ in 0..50 {
            let (next, _) = stepper.step(&state, &zero, &bc).unwrap();
            let e = discrete_energy(&stepper.system, &next.x);
            assert!(e <= prev + 1e-10 * e0, "level {level} step {}: {e} > {prev}", next.step);
            prev = e;
            state = next;
        }
        assert!(prev < e0);
    }
}

#[test]
fn energy_of_uniform_solid_velocity() {
    // ρ_p = ρ_s(1−φ) + ρ_f φ = 1 with ρ_s = ρ_f = 1, so E = ½|Ω_P|
    let case = ManufacturedCase::default();
    let mesh = Arc::new(mms_mesh(0).unwrap());
    let spaces = Spaces::taylor_hood(mesh).unwrap();
    let sys = assemble_system(&spaces, &case.materials()).unwrap();
    let mut x = vec![0.0; spaces.dim()];
    assert_eq!(discrete_energy(&sys, &x), 0.0);
    let us = spaces.us.interpolate(&|_, _| [1.0, 0.0], 0.0).unwrap();
    x[spaces.range(Unknown::SolidVelocity)].copy_from_slice(&us);
    assert!((discrete_energy(&sys, &x) - 0.5).abs() < 1e-12);
}

#[test]
fn zero_data_stays_zero() {
    let case = ManufacturedCase::default();
    let spaces = Spaces::taylor_hood(Arc::new(mms_mesh(0).unwrap())).unwrap();
    let bc = homogeneous(&spaces);
    let stepper = Stepper::new(assemble_system(&spaces, &case.materials()).unwrap(), 0.1, &bc.dofs()).unwrap();
    let n = spaces.dim();
    let fin = run_transient(
        &stepper,
        TransientState { t: 0.0, x: vec![0.0; n], step: 0 },
        5,
        &mut |_| Ok(vec![0.0; n]),
        &mut |_| Ok(bc.clone()),
        &mut |_, _, _| Ok(()),
    )
    .unwrap();
    assert_eq!(fin.step, 5);
    assert!((fin.t - 0.5).abs() < 1e-14);
    assert!(fin.x.iter().all(|&v| v == 0.0));
}

#[test]
fn single_step_run_equals_one_step() {
    let case = ManufacturedCase::default();
    let mesh = Arc::new(mms_mesh(0).unwrap());
    let run = run_manufactured(&case, mesh.clone(), 0.1, 1, &mut |_, _| Ok(())).unwrap();
    let spaces = Spaces::taylor_hood(mesh).unwrap();
    let sys = assemble_system(&spaces, &case.materials()).unwrap();
    let bc = porostokes::mms::boundary_data(&case, &spaces, 0.1).unwrap();
    let stepper = Stepper::new(sys, 0.1, &bc.dofs()).unwrap();
    let state = TransientState {
        t: 0.0,
        x: exact_state(&case, &spaces, 0.0).unwrap(),
        step: 0,
    };
    let load = manufactured_load(&case, &stepper.system, 0.1).unwrap();
    let (next, _) = stepper.step(&state, &load, &bc).unwrap();
    for (a, b) in next.x.iter().zip(&run.final_state.x) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn direct_solve_residual_on_coarsest_system() {
    let case = ManufacturedCase::default();
    let spaces = Spaces::taylor_hood(Arc::new(mms_mesh(0).unwrap())).unwrap();
    assert_eq!(spaces.dim(), 1107);
    let sys = assemble_system(&spaces, &case.materials()).unwrap();
    let bc = homogeneous(&spaces);
    let a = sys.e.combine(1.0 / 0.078, &sys.h, 1.0);
    let c = porostokes::assembly::apply_dirichlet(&a, &bc.dofs()).unwrap();
    let lu = Factorization::new(&c.matrix).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b: Vec<f64> = (0..spaces.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = lu.solve(&b).unwrap();
    let r: f64 = c.matrix.mul_vec(&x).iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r / nb <= 1e-10, "relative residual {}", r / nb);
}

#[test]
fn block_placement() {
    use Unknown::*;
    let case = ManufacturedCase::default();
    let spaces = Spaces::taylor_hood(Arc::new(mms_mesh(0).unwrap())).unwrap();
    let m = case.materials();
    let sys = assemble_system(&spaces, &m).unwrap();
    // H[u_f, p_S] = Bᵀ and H[p_S, u_f] = −B
    let up = sys.h.block(StokesVelocity, StokesPressure);
    let pu = sys.h.block(StokesPressure, StokesVelocity);
    assert!(up.add(1.0, &pu.transpose()).max_abs() <= 1e-13 * up.max_abs());
    for (r, c) in [(PorePressure, RelativeVelocity), (Multiplier, StokesVelocity), (Multiplier, RelativeVelocity)] {
        let a = sys.h.block(c, r);
        let b = sys.h.block(r, c);
        assert!(a.add(1.0, &b.transpose()).max_abs() <= 1e-13 * a.max_abs());
    }
    // E[p_P, p_P] = M_{(1−φ)²/K} = 0.81 × unit mass
    let store = sys.e.block(PorePressure, PorePressure);
    let unit = assemble_weighted_mass(&spaces.pp, &spaces.pp, &ScalarField::Constant(1.0)).unwrap();
    assert!(store.add(-0.81, &unit).max_abs() <= 1e-15);
    for (r, c) in [(RelativeVelocity, RelativeVelocity), (SolidVelocity, SolidVelocity)] {
        let b = if r == SolidVelocity { sys.h.block(r, c) } else { sys.e.block(r, c) };
        assert!(b.asymmetry() <= 1e-13 * b.max_abs());
    }
    // the θ mass is negative semidefinite
    let mt = assemble_weighted_mass(&spaces.ur, &spaces.ur, &ScalarField::Constant(-0.01)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let v: Vec<f64> = (0..spaces.ur.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(mt.bilinear(&v, &v) <= 0.0);
    }
}

#[test]
fn interface_coupling_and_slip_forms() {
    let mesh = Arc::new(mms_mesh(0).unwrap());
    let spaces = Spaces::taylor_hood(mesh.clone()).unwrap();
    let qps = interface_quadrature(&mesh, &mesh.interface(), 5).unwrap();
    let (bf, bp, bs) = assemble_interface_coupling(&spaces.uf, &spaces.ur, &spaces.ys, &spaces.lambda, &qps).unwrap();
    // u_f·n_S = 1, u_r·n_P = −1 with n_S = (0, 1): telescoping normals
    let uf = spaces.uf.interpolate(&|_, _| [0.3, 1.0], 0.0).unwrap();
    let ur = spaces.ur.interpolate(&|_, _| [-0.7, 1.0], 0.0).unwrap();
    let ones = vec![1.0; spaces.lambda.dim()];
    assert!((bf.bilinear(&ones, &uf) - 1.0).abs() < 1e-13);
    let total: Vec<f64> = bf.mul_vec(&uf).iter().zip(bp.mul_vec(&ur)).map(|(a, b)| a + b).collect();
    assert!(total.iter().all(|v| v.abs() < 1e-14));
    let ys = spaces.ys.interpolate(&|_, _| [0.0, 2.0], 0.0).unwrap();
    assert!((bs.bilinear(&ones, &ys) + 2.0).abs() < 1e-13);

    // |u_f − w_s|²_BJS with u_f = (1, 0), w_s = 0, μ_f = 10, α = κ = 1 → 10
    let bjs = assemble_bjs(&spaces.uf, &spaces.ys, 10.0, 1.0, &ScalarField::Constant(1.0), &qps).unwrap();
    let uf = spaces.uf.interpolate(&|_, _| [1.0, 0.0], 0.0).unwrap();
    assert!((bjs.ff.bilinear(&uf, &uf) - 10.0).abs() < 1e-12);
    // equal tangential traces give a zero slip form
    let ws = spaces.ys.interpolate(&|_, _| [1.0, 0.0], 0.0).unwrap();
    let q = bjs.ff.bilinear(&uf, &uf) - 2.0 * bjs.fs.bilinear(&uf, &ws) + bjs.ss.bilinear(&ws, &ws);
    assert!(q.abs() < 1e-12);
    assert!(bjs.sf.add(-1.0, &bjs.fs.transpose()).max_abs() == 0.0);
    let off = assemble_bjs(&spaces.uf, &spaces.ys, 10.0, 0.0, &ScalarField::Constant(1.0), &qps).unwrap();
    assert_eq!(off.ff.max_abs() + off.fs.max_abs() + off.ss.max_abs(), 0.0);
}

#[test]
fn one_step_errors_are_within_coarse_table_magnitudes() {
    // h = 0.1398 row: 0.0357, 0.9008, 0.1364, 0.06018, 0.1815, 0.04864, 0.2977
    let table = [0.0357, 0.9008, 0.1364, 0.06018, 0.1815, 0.04864, 0.2977];
    let case = ManufacturedCase::default();
    let mesh = Arc::new(mms_mesh(1).unwrap());
    let h = mesh.h();
    let run = run_manufactured(&case, mesh.clone(), h * h, 1, &mut |_, _| Ok(())).unwrap();
    let qps = interface_quadrature(&mesh, &mesh.interface(), 8).unwrap();
    let lam = MultiplierNorm::new(mesh).unwrap();
    let e = error_norms(&case, &run.spaces, &qps, &lam, &run.final_state.x, run.final_state.t).unwrap();
    for k in 0..7 {
        assert!(e[k] <= 10.0 * table[k], "{}: {} vs {}", REPORT_ORDER[k].name(), e[k], table[k]);
    }
    assert!(run.max_interface_ratio <= 1e-8);
}

/// Manufactured run with the Stokes bottom wall carrying the exact traction
/// `σ_f^S n` instead of the exact velocity.
#[test]
fn traction_boundary_reproduces_manufactured_solution() {
    let case = ManufacturedCase::default();
    let mesh = Arc::new(mms_mesh(1).unwrap());
    let spaces = Spaces::taylor_hood(mesh.clone()).unwrap();
    let bc = |t: f64| {
        let mut sets = Vec::new();
        for u in [Unknown::StokesVelocity, Unknown::RelativeVelocity, Unknown::Displacement] {
            let markers: &[Marker] = if u == Unknown::StokesVelocity {
                &[Marker::WallLeft, Marker::WallRight]
            } else {
                &WALLS
            };
            let g = |x: [f64; 2], t: f64| case.value(u, x, t);
            sets.push((u, spaces.get(u).dirichlet_bcs(markers, None, &g, t)?));
        }
        DirichletData::from_sets(&spaces, &sets)
    };
    let steps = 20;
    let tau = 1.0 / steps as f64;
    let stepper = Stepper::new(assemble_system(&spaces, &case.materials()).unwrap(), tau, &bc(0.0).unwrap().dofs()).unwrap();
    let g = |x: [f64; 2], t: f64, n: [f64; 2]| {
        let s = case.stokes_stress(x, t);
        [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
    };
    let sys = &stepper.system;
    let load = |t: f64| {
        let mut l = manufactured_load(&case, sys, t)?;
        let tr = [Traction {
            unknown: Unknown::StokesVelocity,
            markers: vec![Marker::WallBottom],
            g: &g,
        }];
        let b = assemble_load(sys, &Sources::default(), None, &tr, t)?;
        for (a, b) in l.iter_mut().zip(b) {
            *a += b;
        }
        Ok(l)
    };
    let init = TransientState {
        t: 0.0,
        x: exact_state(&case, &spaces, 0.0).unwrap(),
        step: 0,
    };
    let fin = run_transient(&stepper, init, steps, &mut |t| load(t), &mut |t| bc(t), &mut |_, _, _| Ok(())).unwrap();
    let reference = run_manufactured(&case, mesh.clone(), tau, steps, &mut |_, _| Ok(())).unwrap();
    let qps = interface_quadrature(&mesh, &mesh.interface(), 8).unwrap();
    let lam = MultiplierNorm::new(mesh).unwrap();
    let e = error_norms(&case, &spaces, &qps, &lam, &fin.x, fin.t).unwrap();
    let r = error_norms(&case, &spaces, &qps, &lam, &reference.final_state.x, 1.0).unwrap();
    for k in 0..7 {
        assert!(e[k] <= 1.5 * r[k] + 1e-12, "{}: {} vs {}", REPORT_ORDER[k].name(), e[k], r[k]);
    }
}
