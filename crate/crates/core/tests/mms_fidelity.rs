//! Hand-coded derivatives of the manufactured fields against central finite
//! differences, and the synthesized data against the strong form.

use porostokes::assembly::Unknown;
use porostokes::mms::{ManufacturedCase, MmsParameters, ScalarJet, VectorJet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const REL: f64 = 1e-6;

fn points(n: usize, seed: u64) -> Vec<([f64; 2], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| ([rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)], rng.gen_range(0.05..2.0)))
        .collect()
}

fn close(a: f64, b: f64, scale: f64, what: &str) {
    assert!(
        (a - b).abs() <= REL * scale.max(1.0),
        "{what}: hand-coded {a} vs finite difference {b} (scale {scale})"
    );
}

fn shift(x: [f64; 2], j: usize, h: f64) -> [f64; 2] {
    let mut y = x;
    y[j] += h;
    y
}

fn check_vector(name: &str, f: &dyn Fn([f64; 2], f64) -> VectorJet, x: [f64; 2], t: f64) {
    let j0 = f(x, t);
    let scale = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let gs = scale(&j0.grad.concat());
    let hs = scale(&j0.hess.concat().concat());
    for j in 0..2 {
        let (p, m) = (f(shift(x, j, H), t), f(shift(x, j, -H), t));
        for i in 0..2 {
            close(j0.grad[i][j], (p.value[i] - m.value[i]) / (2.0 * H), gs, &format!("{name} ∂{j} value {i}"));
            for k in 0..2 {
                close(
                    j0.hess[i][k][j],
                    (p.grad[i][k] - m.grad[i][k]) / (2.0 * H),
                    hs,
                    &format!("{name} ∂{j} grad {i}{k}"),
                );
            }
        }
    }
    let (p, m) = (f(x, t + H), f(x, t - H));
    let ds = scale(&j0.dt).max(scale(&j0.value));
    let dds = scale(&j0.dtt).max(ds);
    for i in 0..2 {
        close(j0.dt[i], (p.value[i] - m.value[i]) / (2.0 * H), ds, &format!("{name} ∂t"));
        close(j0.dtt[i], (p.dt[i] - m.dt[i]) / (2.0 * H), dds, &format!("{name} ∂tt"));
    }
}

fn check_scalar(name: &str, f: &dyn Fn([f64; 2], f64) -> ScalarJet, x: [f64; 2], t: f64) {
    let j0 = f(x, t);
    let gs = j0.grad[0].abs().max(j0.grad[1].abs());
    let hs = j0.hess.concat().iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for j in 0..2 {
        let (p, m) = (f(shift(x, j, H), t), f(shift(x, j, -H), t));
        close(j0.grad[j], (p.value - m.value) / (2.0 * H), gs, &format!("{name} ∂{j}"));
        for k in 0..2 {
            close(j0.hess[k][j], (p.grad[k] - m.grad[k]) / (2.0 * H), hs, &format!("{name} ∂{j} grad {k}"));
        }
    }
    let (p, m) = (f(x, t + H), f(x, t - H));
    close(j0.dt, (p.value - m.value) / (2.0 * H), j0.dt.abs(), &format!("{name} ∂t"));
    close(j0.dtt, (p.dt - m.dt) / (2.0 * H), j0.dtt.abs(), &format!("{name} ∂tt"));
}

#[test]
pub fn field_derivatives_match_finite_differences() {
    let c = ManufacturedCase::default();
    for (x, t) in points(100, 1) {
        check_vector("u_f", &|x, t| c.stokes_velocity(x, t), x, t);
        check_vector("u_r", &|x, t| c.relative_velocity(x, t), x, t);
        check_vector("u_s", &|x, t| c.solid_velocity(x, t), x, t);
        check_vector("y_s", &|x, t| c.displacement(x, t), x, t);
        check_scalar("p_S", &|x, t| c.stokes_pressure(x, t), x, t);
        check_scalar("p_P", &|x, t| c.pore_pressure(x, t), x, t);
    }
}

#[test]
pub fn solid_velocity_is_time_derivative_of_displacement() {
    let c = ManufacturedCase::default();
    for (x, t) in points(100, 2) {
        let us = c.solid_velocity(x, t);
        let ys = c.displacement(x, t);
        for i in 0..2 {
            assert!((us.value[i] - ys.dt[i]).abs() <= 1e-12);
            assert!((us.dt[i] - ys.dtt[i]).abs() <= 1e-12);
        }
        let k = c.sources(x, t).kinematic;
        assert!(k[0].abs() <= 1e-12 && k[1].abs() <= 1e-12);
    }
}

/// `∇·σ` by central differences of the stress function.
fn fd_div(s: &dyn Fn([f64; 2]) -> [[f64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    let mut d = [0.0; 2];
    for j in 0..2 {
        let (p, m) = (s(shift(x, j, H)), s(shift(x, j, -H)));
        for i in 0..2 {
            d[i] += (p[i][j] - m[i][j]) / (2.0 * H);
        }
    }
    d
}

fn fd_dt(f: &dyn Fn(f64) -> [f64; 2], t: f64) -> [f64; 2] {
    let (p, m) = (f(t + H), f(t - H));
    [(p[0] - m[0]) / (2.0 * H), (p[1] - m[1]) / (2.0 * H)]
}

fn fd_divergence(u: &dyn Fn([f64; 2]) -> [f64; 2], x: [f64; 2]) -> f64 {
    (0..2).map(|j| (u(shift(x, j, H))[j] - u(shift(x, j, -H))[j]) / (2.0 * H)).sum()
}

#[test]
fn sources_match_strong_form_by_finite_differences() {
    let c = ManufacturedCase::default();
    let p = c.params;
    for (x, t) in points(100, 3) {
        let s = c.sources(x, t);
        let div_s = fd_div(&|y| c.stokes_stress(y, t), x);
        let div_fp = fd_div(&|y| c.porous_fluid_stress(y, t), x);
        let div_sp = fd_div(&|y| c.solid_stress(y, t), x);
        let dur = fd_dt(&|t| c.value(Unknown::RelativeVelocity, x, t), t);
        let dus = fd_dt(&|t| c.value(Unknown::SolidVelocity, x, t), t);
        let ur = c.value(Unknown::RelativeVelocity, x, t);
        let us = c.value(Unknown::SolidVelocity, x, t);
        let rfp = p.rho_f * p.phi;
        for i in 0..2 {
            let v = ur[i] + us[i];
            let fs = -div_s[i];
            let fr = rfp * (dur[i] + dus[i]) - div_fp[i] + p.phi * p.phi / p.kappa * ur[i] - p.theta * v;
            let fw = rfp * dur[i] + p.rho_p * dus[i] - div_fp[i] - div_sp[i] - p.theta * v;
            close(s.stokes_force[i], fs, fs.abs(), "Stokes momentum");
            close(s.relative_force[i], fr, fr.abs(), "relative momentum");
            close(s.solid_force[i], fw, fw.abs(), "total momentum");
        }
        let storage = (1.0 - p.phi).powi(2) / p.k_bulk;
        let dp = fd_dt(&|t| c.value(Unknown::PorePressure, x, t), t)[0];
        let g = storage * dp
            + fd_divergence(&|y| c.value(Unknown::SolidVelocity, y, t), x)
            + p.phi * fd_divergence(&|y| c.value(Unknown::RelativeVelocity, y, t), x);
        close(s.pore_mass, g, g.abs(), "mass balance");
        let gs = fd_divergence(&|y| c.value(Unknown::StokesVelocity, y, t), x);
        close(s.stokes_mass, gs, 1.0, "Stokes mass");
    }
}

#[test]
fn stokes_source_at_reference_point() {
    // u_f is solenoidal, so stokes_mass vanishes and f_S = −μ_f Δu_f + ∇p_S.
    // At (¼, ¼), t = π/2: u_f = (−½, ½), Δu_f = −2π² u_f, ∇p_S = −(π/2)(1, 1).
    let c = ManufacturedCase::default();
    let pi = std::f64::consts::PI;
    let s = c.sources([0.25, 0.25], pi / 2.0);
    let expect = [-10.0 * pi * pi - pi / 2.0, 10.0 * pi * pi - pi / 2.0];
    for i in 0..2 {
        assert!((s.stokes_force[i] - expect[i]).abs() < 1e-12 * 100.0);
    }
    assert!(s.stokes_mass.abs() < 1e-14);
}

#[test]
fn interface_residuals_from_independent_stresses() {
    let c = ManufacturedCase::default();
    let p = c.params;
    for (x, t) in points(50, 4) {
        let x = [x[0], 1.0];
        let m = c.interface_corrections(x, t).unwrap();
        let ss = c.stokes_stress(x, t);
        let fp = c.porous_fluid_stress(x, t);
        let sp = c.solid_stress(x, t);
        // n_S = (0, 1), n_P = (0, −1), τ = (1, 0)
        let m2 = -ss[1][1] + fp[1][1];
        close(m.m2, m2, m2.abs(), "m2");
        for i in 0..2 {
            let m3 = ss[i][1] - fp[i][1] - sp[i][1];
            close(m.m3[i], m3, m3.abs(), "m3");
        }
        let v = c.relative_velocity(x, t);
        let e01 = 0.5 * (v.grad[0][1] + v.grad[1][0]);
        let w = c.solid_velocity(x, t);
        let e01 = e01 + 0.5 * (w.grad[0][1] + w.grad[1][0]);
        let m5 = -2.0 * p.mu_f * p.phi * e01;
        close(m.m5, m5, m5.abs(), "m5");
        let uf = c.value(Unknown::StokesVelocity, x, t);
        let dy = c.displacement(x, t).dt;
        let ur = c.value(Unknown::RelativeVelocity, x, t);
        let m1 = uf[1] - (ur[1] + dy[1]);
        close(m.m1, m1, m1.abs(), "m1");
    }
    assert!(c.interface_corrections([0.5, 0.9], 1.0).is_err());
}

#[test]
fn initial_time_has_no_porous_motion() {
    let c = ManufacturedCase::new(MmsParameters::default());
    for (x, _) in points(20, 5) {
        for u in [Unknown::RelativeVelocity, Unknown::SolidVelocity, Unknown::Displacement] {
            assert_eq!(c.value(u, x, 0.0), [0.0, 0.0]);
        }
    }
}
