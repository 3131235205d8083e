//! Closed-form fields on `Ω_S = (0,1)²`, `Ω_P = (0,1)×(1,2)` and the data they
//! induce.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::{InterfaceCorrection, MaterialFields, Unknown};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Value and derivatives of a vector field at one `(x, t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VectorJet {
    pub value: [f64; 2],
    /// `grad[i][j] = ∂_j u_i`
    pub grad: [[f64; 2]; 2],
    /// `hess[i][j][k] = ∂_j ∂_k u_i`
    pub hess: [[[f64; 2]; 2]; 2],
    pub dt: [f64; 2],
    pub dtt: [f64; 2],
}

/// Value and derivatives of a scalar field at one `(x, t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub dt: f64,
    pub dtt: f64,
}

impl VectorJet {
    pub fn div(&self) -> f64 {
        self.grad[0][0] + self.grad[1][1]
    }

    pub fn laplacian(&self) -> [f64; 2] {
        [0, 1].map(|i| self.hess[i][0][0] + self.hess[i][1][1])
    }

    /// `∇(∇·u)`
    pub fn grad_div(&self) -> [f64; 2] {
        [0, 1].map(|j| self.hess[0][0][j] + self.hess[1][1][j])
    }

    /// `∇·(2ε(u))` for a constant coefficient.
    pub fn div_sym_grad(&self) -> [f64; 2] {
        let (a, b) = (self.laplacian(), self.grad_div());
        [a[0] + b[0], a[1] + b[1]]
    }

    pub fn strain(&self) -> [[f64; 2]; 2] {
        let g = self.grad;
        let off = 0.5 * (g[0][1] + g[1][0]);
        [[g[0][0], off], [off, g[1][1]]]
    }

    fn scaled(&self, s: f64) -> VectorJet {
        let mut out = *self;
        out.value = out.value.map(|v| v * s);
        out.grad = out.grad.map(|r| r.map(|v| v * s));
        out.hess = out.hess.map(|m| m.map(|r| r.map(|v| v * s)));
        out.dt = out.dt.map(|v| v * s);
        out.dtt = out.dtt.map(|v| v * s);
        out
    }

    fn plus(&self, o: &VectorJet) -> VectorJet {
        let mut out = *self;
        for i in 0..2 {
            out.value[i] += o.value[i];
            out.dt[i] += o.dt[i];
            out.dtt[i] += o.dtt[i];
            for j in 0..2 {
                out.grad[i][j] += o.grad[i][j];
                for k in 0..2 {
                    out.hess[i][j][k] += o.hess[i][j][k];
                }
            }
        }
        out
    }
}

/// Coefficients of the verification problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmsParameters {
    pub lambda_p: f64,
    pub mu_p: f64,
    pub mu_f: f64,
    pub alpha_bjs: f64,
    pub phi: f64,
    pub kappa: f64,
    pub rho_p: f64,
    pub rho_f: f64,
    pub k_bulk: f64,
    pub theta: f64,
}

impl Default for MmsParameters {
    fn default() -> Self {
        MmsParameters {
            lambda_p: 10.0,
            mu_p: 10.0,
            mu_f: 10.0,
            alpha_bjs: 1.0,
            phi: 0.1,
            kappa: 1.0,
            rho_p: 1.0,
            rho_f: 1.0,
            k_bulk: 1.0,
            theta: -0.01,
        }
    }
}

/// Right-hand sides obtained by inserting the exact fields in the strong
/// equations, one per equation row.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ManufacturedSources {
    /// Stokes momentum.
    pub stokes_force: [f64; 2],
    /// Momentum row tested with `v_r`.
    pub relative_force: [f64; 2],
    /// Momentum row tested with `w_s`.
    pub solid_force: [f64; 2],
    /// `∇·u_f`
    pub stokes_mass: f64,
    /// Pore mass balance.
    pub pore_mass: f64,
    /// `u_s − ∂_t y_s`, zero by construction.
    pub kinematic: [f64; 2],
}

/// The manufactured solution together with its parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub params: MmsParameters,
}

const K4: f64 = 4.0 * PI;

impl ManufacturedCase {
    pub fn new(params: MmsParameters) -> Self {
        ManufacturedCase { params }
    }

    /// Constant material fields for the assembly.
    pub fn materials(&self) -> MaterialFields {
        let p = &self.params;
        MaterialFields {
            mu_f: p.mu_f,
            mu_p: ScalarField::Constant(p.mu_p),
            lambda_p: ScalarField::Constant(p.lambda_p),
            rho_f: p.rho_f,
            rho_p: ScalarField::Constant(p.rho_p),
            phi: ScalarField::Constant(p.phi),
            kappa: ScalarField::Constant(p.kappa),
            k_bulk: ScalarField::Constant(p.k_bulk),
            theta: p.theta,
            alpha_bjs: p.alpha_bjs,
            viscosity_scaled_permeability: false,
        }
    }

    /// `u_f = sin t (−cos πx sin πy, sin πx cos πy)`
    pub fn stokes_velocity(&self, x: [f64; 2], t: f64) -> VectorJet {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let p2 = PI * PI;
        let space = VectorJet {
            value: [-cx * sy, sx * cy],
            grad: [[PI * sx * sy, -PI * cx * cy], [PI * cx * cy, -PI * sx * sy]],
            hess: [
                [[p2 * cx * sy, p2 * sx * cy], [p2 * sx * cy, p2 * cx * sy]],
                [[-p2 * sx * cy, -p2 * cx * sy], [-p2 * cx * sy, -p2 * sx * cy]],
            ],
            dt: [0.0; 2],
            dtt: [0.0; 2],
        };
        with_time(space, t.sin(), t.cos(), -t.sin())
    }

    /// `p_S = sin t cos πx cos πy`
    pub fn stokes_pressure(&self, x: [f64; 2], t: f64) -> ScalarJet {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let p2 = PI * PI;
        let (s, c) = t.sin_cos();
        ScalarJet {
            value: s * cx * cy,
            grad: [-s * PI * sx * cy, -s * PI * cx * sy],
            hess: [[-s * p2 * cx * cy, s * p2 * sx * sy], [s * p2 * sx * sy, -s * p2 * cx * cy]],
            dt: c * cx * cy,
            dtt: -s * cx * cy,
        }
    }

    /// `u_r = (t² sin²4πy − t x³ cos 4πy, t² sin²4πy + 2t x³ sin 4πy)`
    pub fn relative_velocity(&self, x: [f64; 2], t: f64) -> VectorJet {
        let (s, c) = (K4 * x[1]).sin_cos();
        let s2 = (2.0 * K4 * x[1]).sin();
        let c2 = (2.0 * K4 * x[1]).cos();
        let (x1, x2, x3) = (x[0], x[0] * x[0], x[0].powi(3));
        let k = K4;
        let t2 = t * t;
        VectorJet {
            value: [t2 * s * s - t * x3 * c, t2 * s * s + 2.0 * t * x3 * s],
            grad: [
                [-3.0 * t * x2 * c, t2 * k * s2 + t * x3 * k * s],
                [6.0 * t * x2 * s, t2 * k * s2 + 2.0 * t * x3 * k * c],
            ],
            hess: [
                [
                    [-6.0 * t * x1 * c, 3.0 * t * x2 * k * s],
                    [3.0 * t * x2 * k * s, 2.0 * t2 * k * k * c2 + t * x3 * k * k * c],
                ],
                [
                    [12.0 * t * x1 * s, 6.0 * t * x2 * k * c],
                    [6.0 * t * x2 * k * c, 2.0 * t2 * k * k * c2 - 2.0 * t * x3 * k * k * s],
                ],
            ],
            dt: [2.0 * t * s * s - x3 * c, 2.0 * t * s * s + 2.0 * x3 * s],
            dtt: [2.0 * s * s, 2.0 * s * s],
        }
    }

    /// `u_s = t x³ (cos 4πy, −2 sin 4πy)`
    pub fn solid_velocity(&self, x: [f64; 2], t: f64) -> VectorJet {
        with_time(solid_shape(x), t, 1.0, 0.0)
    }

    /// `y_s = ½ t² x³ (cos 4πy, −2 sin 4πy)`
    pub fn displacement(&self, x: [f64; 2], t: f64) -> VectorJet {
        with_time(solid_shape(x), 0.5 * t * t, t, 1.0)
    }

    /// `p_P = cos t sin πx sin πy`
    pub fn pore_pressure(&self, x: [f64; 2], t: f64) -> ScalarJet {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let p2 = PI * PI;
        let (s, c) = t.sin_cos();
        ScalarJet {
            value: c * sx * sy,
            grad: [c * PI * cx * sy, c * PI * sx * cy],
            hess: [[-c * p2 * sx * sy, c * p2 * cx * cy], [c * p2 * cx * cy, -c * p2 * sx * sy]],
            dt: -s * sx * sy,
            dtt: -c * sx * sy,
        }
    }

    /// `σ_f^S = 2μ_f ε(u_f) − p_S I`
    pub fn stokes_stress(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let e = self.stokes_velocity(x, t).strain();
        let p = self.stokes_pressure(x, t).value;
        stress(e, 2.0 * self.params.mu_f, 0.0, -p)
    }

    /// `σ_f^P = 2μ_f φ ε(u_r + u_s) − φ p_P I`
    pub fn porous_fluid_stress(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let v = self.relative_velocity(x, t).plus(&self.solid_velocity(x, t));
        let p = self.pore_pressure(x, t).value;
        let phi = self.params.phi;
        stress(v.strain(), 2.0 * self.params.mu_f * phi, 0.0, -phi * p)
    }

    /// `σ_s^P = 2μ_p ε(y_s) + λ_p (∇·y_s) I − (1−φ) p_P I`
    pub fn solid_stress(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let y = self.displacement(x, t);
        let p = self.pore_pressure(x, t).value;
        let pr = &self.params;
        stress(y.strain(), 2.0 * pr.mu_p, pr.lambda_p * y.div(), -(1.0 - pr.phi) * p)
    }

    /// `λ = −(σ_f^S n_S)·n_S` with `n_S = (0, 1)`.
    pub fn multiplier(&self, x: [f64; 2], t: f64) -> f64 {
        -self.stokes_stress(x, t)[1][1]
    }

    /// Value of the exact field matching an unknown; scalars use slot 0.
    pub fn value(&self, u: Unknown, x: [f64; 2], t: f64) -> [f64; 2] {
        match u {
            Unknown::StokesVelocity => self.stokes_velocity(x, t).value,
            Unknown::RelativeVelocity => self.relative_velocity(x, t).value,
            Unknown::Displacement => self.displacement(x, t).value,
            Unknown::SolidVelocity => self.solid_velocity(x, t).value,
            Unknown::StokesPressure => [self.stokes_pressure(x, t).value, 0.0],
            Unknown::PorePressure => [self.pore_pressure(x, t).value, 0.0],
            Unknown::Multiplier => [self.multiplier(x, t), 0.0],
        }
    }

    /// Value and gradient rows of the exact field matching an unknown.
    pub fn value_grad(&self, u: Unknown, x: [f64; 2], t: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let sc = |j: ScalarJet| ([j.value, 0.0], [j.grad, [0.0; 2]]);
        let vc = |j: VectorJet| (j.value, j.grad);
        match u {
            Unknown::StokesVelocity => vc(self.stokes_velocity(x, t)),
            Unknown::RelativeVelocity => vc(self.relative_velocity(x, t)),
            Unknown::Displacement => vc(self.displacement(x, t)),
            Unknown::SolidVelocity => vc(self.solid_velocity(x, t)),
            Unknown::StokesPressure => sc(self.stokes_pressure(x, t)),
            Unknown::PorePressure => sc(self.pore_pressure(x, t)),
            Unknown::Multiplier => ([self.multiplier(x, t), 0.0], [[0.0; 2]; 2]),
        }
    }

    /// Volume sources at `(x, t)`.
    pub fn sources(&self, x: [f64; 2], t: f64) -> ManufacturedSources {
        let p = &self.params;
        let uf = self.stokes_velocity(x, t);
        let ps = self.stokes_pressure(x, t);
        let ur = self.relative_velocity(x, t);
        let us = self.solid_velocity(x, t);
        let ys = self.displacement(x, t);
        let pp = self.pore_pressure(x, t);
        let v = ur.plus(&us);

        let visc_s = uf.div_sym_grad();
        let stokes_force = [0, 1].map(|i| -p.mu_f * visc_s[i] + ps.grad[i]);

        let rfp = p.rho_f * p.phi;
        let visc_p = v.div_sym_grad();
        let relative_force = [0, 1].map(|i| {
            rfp * (ur.dt[i] + us.dt[i]) - p.mu_f * p.phi * visc_p[i] + p.phi * pp.grad[i]
                + p.phi * p.phi / p.kappa * ur.value[i]
                - p.theta * v.value[i]
        });

        let elas = ys.div_sym_grad();
        let gd = ys.grad_div();
        let solid_force = [0, 1].map(|i| {
            rfp * ur.dt[i] + p.rho_p * us.dt[i] - p.mu_f * p.phi * visc_p[i] - p.mu_p * elas[i] - p.lambda_p * gd[i]
                + pp.grad[i]
                - p.theta * v.value[i]
        });

        let storage = (1.0 - p.phi) * (1.0 - p.phi) / p.k_bulk;
        let pore_mass = storage * pp.dt + us.div() + p.phi * ur.div();

        ManufacturedSources {
            stokes_force,
            relative_force,
            solid_force,
            stokes_mass: uf.div(),
            pore_mass,
            kinematic: [us.value[0] - ys.dt[0], us.value[1] - ys.dt[1]],
        }
    }

    /// Residuals of the interface conditions for porous normal `n_p` and
    /// tangent `tau`, at any point.
    pub fn corrections_with(&self, x: [f64; 2], t: f64, n_p: [f64; 2], tau: [f64; 2]) -> InterfaceCorrection {
        let p = &self.params;
        let n_s = [-n_p[0], -n_p[1]];
        let mv = |m: [[f64; 2]; 2], n: [f64; 2]| [m[0][0] * n[0] + m[0][1] * n[1], m[1][0] * n[0] + m[1][1] * n[1]];
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let sf = mv(self.stokes_stress(x, t), n_s);
        let fp = mv(self.porous_fluid_stress(x, t), n_p);
        let sp = mv(self.solid_stress(x, t), n_p);
        let uf = self.stokes_velocity(x, t).value;
        let ur = self.relative_velocity(x, t).value;
        let dy = self.displacement(x, t).dt;
        let beta = p.mu_f * p.alpha_bjs / p.kappa.sqrt();
        InterfaceCorrection {
            m1: dot(uf, n_s) + dot([dy[0] + ur[0], dy[1] + ur[1]], n_p),
            m2: -dot(sf, n_s) + dot(fp, n_p),
            m3: [sf[0] + fp[0] + sp[0], sf[1] + fp[1] + sp[1]],
            m4: -dot(sf, tau) - beta * dot([uf[0] - dy[0], uf[1] - dy[1]], tau),
            m5: dot(fp, tau),
        }
    }

    /// Interface corrections on `Σ = {y = 1}` with `n_S = (0,1)`,
    /// `n_P = (0,−1)`, `τ = (1,0)`.
    pub fn interface_corrections(&self, x: [f64; 2], t: f64) -> Result<InterfaceCorrection> {
        if (x[1] - 1.0).abs() > 1e-10 || !(-1e-10..=1.0 + 1e-10).contains(&x[0]) {
            return Err(Error::Argument(format!("point {x:?} is not on the interface y = 1")));
        }
        Ok(self.corrections_with(x, t, [0.0, -1.0], [1.0, 0.0]))
    }
}

/// `x³ (cos 4πy, −2 sin 4πy)` with time slots zeroed.
fn solid_shape(x: [f64; 2]) -> VectorJet {
    let (s, c) = (K4 * x[1]).sin_cos();
    let (x1, x2, x3) = (x[0], x[0] * x[0], x[0].powi(3));
    let k = K4;
    VectorJet {
        value: [x3 * c, -2.0 * x3 * s],
        grad: [[3.0 * x2 * c, -x3 * k * s], [-6.0 * x2 * s, -2.0 * x3 * k * c]],
        hess: [
            [[6.0 * x1 * c, -3.0 * x2 * k * s], [-3.0 * x2 * k * s, -x3 * k * k * c]],
            [[-12.0 * x1 * s, -6.0 * x2 * k * c], [-6.0 * x2 * k * c, 2.0 * x3 * k * k * s]],
        ],
        dt: [0.0; 2],
        dtt: [0.0; 2],
    }
}

/// `a(t) F(x)` given `a`, `a'`, `a''`.
fn with_time(space: VectorJet, a: f64, da: f64, dda: f64) -> VectorJet {
    let mut out = space.scaled(a);
    out.dt = space.value.map(|v| v * da);
    out.dtt = space.value.map(|v| v * dda);
    out
}

fn stress(e: [[f64; 2]; 2], two_mu: f64, lam_div: f64, iso: f64) -> [[f64; 2]; 2] {
    let d = lam_div + iso;
    [[two_mu * e[0][0] + d, two_mu * e[0][1]], [two_mu * e[1][0], two_mu * e[1][1] + d]]
}
