//! Error norms against the exact fields.

use std::sync::Arc;

use crate::assembly::{apply_dirichlet, assemble_stiffness, ConstrainedMatrix, DirichletData, Spaces, Unknown, TraceQp};
use crate::error::Result;
use crate::fespace::{barycentric_gradients, shape_values, Family, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::mesh::{Marker, Mesh2D};
use crate::parallel::map_chunks;
use crate::quadrature::triangle_rule;
use crate::system::Factorization;

use super::exact::ManufacturedCase;

/// Quadrature order used for volume errors.
pub const ERROR_ORDER: usize = 6;

/// Unknowns in report column order.
pub const REPORT_ORDER: [Unknown; 7] = [
    Unknown::StokesVelocity,
    Unknown::StokesPressure,
    Unknown::RelativeVelocity,
    Unknown::PorePressure,
    Unknown::Displacement,
    Unknown::SolidVelocity,
    Unknown::Multiplier,
];

/// Whether the report measures this unknown in `H¹` (otherwise `L²`, or the
/// dual trace norm for the multiplier).
pub fn uses_h1(u: Unknown) -> bool {
    matches!(u, Unknown::StokesVelocity | Unknown::Displacement)
}

/// `(‖e‖²_{L²}, ‖∇e‖²_{L²})` over the cells of `space`.
pub fn squared_errors(
    space: &FunctionSpace,
    coeffs: &[f64],
    exact: &(dyn Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) + Sync),
) -> Result<(f64, f64)> {
    let rule = triangle_rule(ERROR_ORDER)?;
    let mesh = space.mesh();
    let nc = space.components();
    let parts = map_chunks(space.cells().len(), 256, |range| {
        let (mut l2, mut h1) = (0.0, 0.0);
        for c in range {
            let x = mesh.triangle_coords(space.cells()[c]);
            let (_, area) = barycentric_gradients(&x);
            for q in 0..rule.len() {
                let l = rule.points[q];
                let p = [
                    l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0],
                    l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1],
                ];
                let w = 2.0 * area * rule.weights[q];
                let (v, g) = exact(p);
                let vh = space.eval_cell(coeffs, c, l);
                for i in 0..nc {
                    l2 += w * (v[i] - vh[i]).powi(2);
                    let gh = space.grad_cell(coeffs, c, l, i);
                    h1 += w * ((g[i][0] - gh[0]).powi(2) + (g[i][1] - gh[1]).powi(2));
                }
            }
        }
        vec![(l2, h1)]
    });
    Ok(parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)))
}

/// Discrete `H^{-1/2}(Σ)` norm: for trace data `e`, solve `−Δψ = 0` in `Ω_P`
/// with `∇ψ·n = e` on Σ and `ψ = 0` on the outer porous boundary using P1,
/// and return `‖∇ψ_h‖_{L²(Ω_P)}`.
pub struct MultiplierNorm {
    space: FunctionSpace,
    constrained: ConstrainedMatrix,
    zero: DirichletData,
    lu: Factorization,
    stiffness: crate::sparse::CsrMatrix,
}

impl MultiplierNorm {
    pub fn new(mesh: Arc<Mesh2D>) -> Result<MultiplierNorm> {
        let space = FunctionSpace::new(mesh.clone(), Region::Porous, Family::P1, 1)?;
        let stiffness = assemble_stiffness(&space, &ScalarField::Constant(1.0))?;
        let outer: Vec<Marker> = mesh.markers().into_iter().filter(|m| *m != Marker::Interface).collect();
        let dofs = space.boundary_nodes(&outer)?;
        let constrained = apply_dirichlet(&stiffness, &dofs)?;
        let lu = Factorization::new(&constrained.matrix)?;
        Ok(MultiplierNorm {
            space,
            constrained,
            zero: DirichletData {
                entries: dofs.into_iter().map(|d| (d, 0.0)).collect(),
            },
            lu,
            stiffness,
        })
    }

    /// Norm of the trace function whose values at `qps` are `e`.
    pub fn norm(&self, qps: &[TraceQp], e: &[f64]) -> Result<f64> {
        let mut rhs = vec![0.0; self.space.dim()];
        let mut phi = [0.0; 6];
        for (qp, &v) in qps.iter().zip(e) {
            shape_values(Family::P1, qp.l_porous, &mut phi);
            let c = self
                .space
                .cell_of_triangle(qp.porous_triangle)
                .expect("interface triangle belongs to the porous region");
            for (k, &n) in self.space.cell_nodes(c).iter().enumerate() {
                rhs[n] += qp.w * phi[k] * v;
            }
        }
        self.constrained.constrain_rhs(&mut rhs, &self.zero)?;
        let psi = self.lu.solve(&rhs)?;
        Ok(self.stiffness.bilinear(&psi, &psi).max(0.0).sqrt())
    }
}

/// Errors of the discrete state `x` at time `t` in report column order:
/// `H¹` for `u_f` and `y_s`, `L²` for the other fields, the dual trace norm
/// for `λ`.
pub fn error_norms(
    case: &ManufacturedCase,
    spaces: &Spaces,
    qps: &[TraceQp],
    lambda_norm: &MultiplierNorm,
    x: &[f64],
    t: f64,
) -> Result<[f64; 7]> {
    let mut out = [0.0; 7];
    for (k, u) in REPORT_ORDER.into_iter().enumerate() {
        let coeffs = &x[spaces.range(u)];
        out[k] = if u == Unknown::Multiplier {
            let lam = spaces.get(u);
            let e: Vec<f64> = qps
                .iter()
                .map(|q| {
                    let n = lam.cell_nodes(q.edge);
                    let lh = (1.0 - q.s) * coeffs[n[0]] + q.s * coeffs[n[1]];
                    case.multiplier(q.x, t) - lh
                })
                .collect();
            lambda_norm.norm(qps, &e)?
        } else {
            let (l2, h1) = squared_errors(spaces.get(u), coeffs, &|p| case.value_grad(u, p, t))?;
            if uses_h1(u) {
                (l2 + h1).sqrt()
            } else {
                l2.sqrt()
            }
        };
    }
    Ok(out)
}
