//! Volume bilinear forms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{barycentric_gradients, shape_gradients, shape_values, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::parallel::map_chunks;
use crate::quadrature::triangle_rule;
use crate::sparse::CsrMatrix;

/// Quadrature order for matrices with variable coefficients.
pub const VOLUME_ORDER: usize = 6;

/// Data handed to a form kernel at one quadrature point.
pub(crate) struct Qp<'a> {
    /// Physical quadrature weight.
    pub w: f64,
    pub tri: [usize; 3],
    pub l: [f64; 3],
    pub gl: &'a [[f64; 2]; 3],
    pub phi_a: &'a [f64],
    pub grad_a: &'a [[f64; 2]],
    pub phi_b: &'a [f64],
    pub grad_b: &'a [[f64; 2]],
}

pub(crate) fn check_pair(a: &FunctionSpace, b: &FunctionSpace) -> Result<()> {
    if a.region() != b.region() || a.region() == Region::Interface {
        return Err(Error::Argument(format!(
            "spaces live on {:?} and {:?}; volume forms need one subdomain",
            a.region(),
            b.region()
        )));
    }
    if !Arc::ptr_eq(a.mesh(), b.mesh()) && !a.mesh().same_topology(b.mesh()) {
        return Err(Error::Argument("spaces are built on different meshes".into()));
    }
    Ok(())
}

/// Generic cell loop. The local matrix is indexed
/// `[(ka * ca + i) * (nb * cb) + kb * cb + j]` for test node `ka`, component
/// `i` and trial node `kb`, component `j`.
pub(crate) fn assemble_pair(
    va: &FunctionSpace,
    vb: &FunctionSpace,
    order: usize,
    kernel: &(dyn Fn(&Qp, &mut [f64]) + Sync),
) -> Result<CsrMatrix> {
    check_pair(va, vb)?;
    let rule = triangle_rule(order)?;
    let mesh = va.mesh();
    let (na, ca, nb, cb) = (va.local_nodes(), va.components(), vb.local_nodes(), vb.components());
    let (ra, rb) = (na * ca, nb * cb);
    let ncell = va.cells().len();
    let trip = map_chunks(ncell, 512, |range| {
        let mut out = Vec::with_capacity(range.len() * ra * rb);
        let mut local = vec![0.0; ra * rb];
        let mut phi_a = [0.0; 6];
        let mut phi_b = [0.0; 6];
        let mut grad_a = [[0.0; 2]; 6];
        let mut grad_b = [[0.0; 2]; 6];
        for c in range {
            let t = va.cells()[c];
            let cbi = vb.cell_of_triangle(t).expect("same subdomain");
            let tri = mesh.triangles()[t];
            let (gl, area) = barycentric_gradients(&mesh.triangle_coords(t));
            local.iter_mut().for_each(|v| *v = 0.0);
            for q in 0..rule.len() {
                let l = rule.points[q];
                shape_values(va.family(), l, &mut phi_a);
                shape_values(vb.family(), l, &mut phi_b);
                shape_gradients(va.family(), l, &gl, &mut grad_a);
                shape_gradients(vb.family(), l, &gl, &mut grad_b);
                let qp = Qp {
                    w: 2.0 * area * rule.weights[q],
                    tri,
                    l,
                    gl: &gl,
                    phi_a: &phi_a[..na],
                    grad_a: &grad_a[..na],
                    phi_b: &phi_b[..nb],
                    grad_b: &grad_b[..nb],
                };
                kernel(&qp, &mut local);
            }
            let (nodes_a, nodes_b) = (va.cell_nodes(c), vb.cell_nodes(cbi));
            for ka in 0..na {
                for i in 0..ca {
                    let row = va.dof(nodes_a[ka], i);
                    for kb in 0..nb {
                        for j in 0..cb {
                            let col = vb.dof(nodes_b[kb], j);
                            out.push((row, col, local[(ka * ca + i) * rb + kb * cb + j]));
                        }
                    }
                }
            }
        }
        out
    });
    Ok(CsrMatrix::from_triplets(va.dim(), vb.dim(), &trip))
}

fn require_vector(v: &FunctionSpace) -> Result<()> {
    if v.components() != 2 {
        return Err(Error::Argument("form needs a vector space".into()));
    }
    Ok(())
}

/// `(2 c ε(u), ε(v))` with test space `va` and trial space `vb`.
pub fn assemble_strain(va: &FunctionSpace, vb: &FunctionSpace, c: &ScalarField) -> Result<CsrMatrix> {
    require_vector(va)?;
    require_vector(vb)?;
    let rb = 2 * vb.local_nodes();
    assemble_pair(va, vb, VOLUME_ORDER, &|q, local| {
        let wc = q.w * c.at(q.tri, q.l);
        for (ka, ga) in q.grad_a.iter().enumerate() {
            for (kb, gb) in q.grad_b.iter().enumerate() {
                let dot = ga[0] * gb[0] + ga[1] * gb[1];
                for i in 0..2 {
                    for j in 0..2 {
                        let d = if i == j { dot } else { 0.0 };
                        local[(2 * ka + i) * rb + 2 * kb + j] += wc * (d + gb[i] * ga[j]);
                    }
                }
            }
        }
    })
}

/// `(c ∇·u, ∇·v)`.
pub fn assemble_grad_div(va: &FunctionSpace, vb: &FunctionSpace, c: &ScalarField) -> Result<CsrMatrix> {
    require_vector(va)?;
    require_vector(vb)?;
    let rb = 2 * vb.local_nodes();
    assemble_pair(va, vb, VOLUME_ORDER, &|q, local| {
        let wc = q.w * c.at(q.tri, q.l);
        for (ka, ga) in q.grad_a.iter().enumerate() {
            for (kb, gb) in q.grad_b.iter().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        local[(2 * ka + i) * rb + 2 * kb + j] += wc * gb[j] * ga[i];
                    }
                }
            }
        }
    })
}

/// Stokes viscous form `(2 μ_f ε(u), ε(v))`.
pub fn assemble_stokes_viscous(v: &FunctionSpace, mu_f: f64) -> Result<CsrMatrix> {
    assemble_strain(v, v, &ScalarField::Constant(mu_f))
}

/// Brinkman viscous form `(2 μ_f φ ε(u), ε(v))`, test space `va`.
pub fn assemble_brinkman_viscous(va: &FunctionSpace, vb: &FunctionSpace, mu_f: f64, phi: &ScalarField) -> Result<CsrMatrix> {
    assemble_strain(va, vb, &phi.scale(mu_f))
}

/// Elasticity `(2 μ_p ε(y), ε(w)) + (λ_p ∇·y, ∇·w)`.
pub fn assemble_elasticity(v: &FunctionSpace, mu_p: &ScalarField, lambda_p: &ScalarField) -> Result<CsrMatrix> {
    let a = assemble_strain(v, v, mu_p)?;
    let b = assemble_grad_div(v, v, lambda_p)?;
    Ok(a.add(1.0, &b))
}

/// `B` with entries `-(∇·(weight v_j), q_i)`: rows follow the scalar space
/// `q`, columns the vector space `v`. The weight must be constant or nodal.
pub fn assemble_divergence_coupling(v: &FunctionSpace, q: &FunctionSpace, weight: &ScalarField) -> Result<CsrMatrix> {
    require_vector(v)?;
    if q.components() != 1 {
        return Err(Error::Argument("pressure space must be scalar".into()));
    }
    if matches!(weight, ScalarField::Composite(_)) {
        return Err(Error::Argument("divergence weight must be constant or nodal".into()));
    }
    let rb = 2 * v.local_nodes();
    assemble_pair(q, v, VOLUME_ORDER, &|p, local| {
        let w = weight.at(p.tri, p.l);
        let gw = weight.grad(p.tri, p.gl).unwrap_or([0.0; 2]);
        for (ka, &m) in p.phi_a.iter().enumerate() {
            for kb in 0..p.phi_b.len() {
                for j in 0..2 {
                    let div = w * p.grad_b[kb][j] + gw[j] * p.phi_b[kb];
                    local[ka * rb + 2 * kb + j] -= p.w * div * m;
                }
            }
        }
    })
}

/// Weighted mass `(ξ u, v)`; both spaces need the same component count.
pub fn assemble_weighted_mass(va: &FunctionSpace, vb: &FunctionSpace, xi: &ScalarField) -> Result<CsrMatrix> {
    if va.components() != vb.components() {
        return Err(Error::Argument("mass matrix needs equal component counts".into()));
    }
    let c = va.components();
    let rb = c * vb.local_nodes();
    assemble_pair(va, vb, VOLUME_ORDER, &|q, local| {
        let wx = q.w * xi.at(q.tri, q.l);
        for (ka, &a) in q.phi_a.iter().enumerate() {
            for (kb, &b) in q.phi_b.iter().enumerate() {
                for i in 0..c {
                    local[(ka * c + i) * rb + kb * c + i] += wx * a * b;
                }
            }
        }
    })
}

/// Scalar stiffness `(c ∇u, ∇v)`.
pub fn assemble_stiffness(v: &FunctionSpace, c: &ScalarField) -> Result<CsrMatrix> {
    if v.components() != 1 {
        return Err(Error::Argument("stiffness needs a scalar space".into()));
    }
    let rb = v.local_nodes();
    assemble_pair(v, v, VOLUME_ORDER, &|q, local| {
        let wc = q.w * c.at(q.tri, q.l);
        for (ka, ga) in q.grad_a.iter().enumerate() {
            for (kb, gb) in q.grad_b.iter().enumerate() {
                local[ka * rb + kb] += wc * (ga[0] * gb[0] + ga[1] * gb[1]);
            }
        }
    })
}
