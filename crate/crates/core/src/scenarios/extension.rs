//! Harmonic extension of the interface displacement into the Stokes region.

use std::sync::Arc;

use crate::assembly::{apply_dirichlet, assemble_stiffness, DirichletData};
use crate::error::{Error, Result};
use crate::fespace::{Family, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::mesh::{Marker, Mesh2D};
use crate::system::Factorization;

/// Solves `−Δd̂ = 0` in `Ω_S` componentwise with P1 elements, `d̂ = d` on Σ,
/// `d̂ = 0` on edges marked `fixed` and homogeneous Neumann data elsewhere.
///
/// `trace[k]` is the displacement of vertex `mesh.interface().trace_vertices[k]`.
/// Interface data wins where Σ meets a fixed edge. Returns one displacement
/// per mesh vertex, zero outside the Stokes region.
pub fn harmonic_extension(mesh: &Arc<Mesh2D>, trace: &[[f64; 2]], fixed: &[Marker]) -> Result<Vec<[f64; 2]>> {
    let imap = mesh.interface();
    if imap.is_empty() {
        return Err(Error::Argument("mesh has no interface".into()));
    }
    if trace.len() != imap.trace_vertices.len() {
        return Err(Error::Argument(format!(
            "trace has {} values for {} interface vertices",
            trace.len(),
            imap.trace_vertices.len()
        )));
    }
    if let Some(k) = trace.iter().position(|d| !(d[0].is_finite() && d[1].is_finite())) {
        return Err(Error::Numeric(format!("trace value {k} is not finite")));
    }
    let space = FunctionSpace::new(mesh.clone(), Region::Stokes, Family::P1, 1)?;
    let k = assemble_stiffness(&space, &ScalarField::Constant(1.0))?;

    let mut values = std::collections::BTreeMap::new();
    for n in space.boundary_nodes(fixed)? {
        values.insert(n, [0.0; 2]);
    }
    for (&v, d) in imap.trace_vertices.iter().zip(trace) {
        let n = space.vertex_node(v).expect("interface vertex lies in the Stokes region");
        values.insert(n, *d);
    }
    let dofs: Vec<usize> = values.keys().copied().collect();
    let constrained = apply_dirichlet(&k, &dofs)?;
    let lu = Factorization::new(&constrained.matrix)?;

    let mut out = vec![[0.0; 2]; mesh.num_vertices()];
    for comp in 0..2 {
        let bc = DirichletData {
            entries: values.iter().map(|(&n, d)| (n, d[comp])).collect(),
        };
        let mut rhs = vec![0.0; space.dim()];
        constrained.constrain_rhs(&mut rhs, &bc)?;
        let mut x = lu.solve(&rhs)?;
        let r = constrained.matrix.mul_vec(&x);
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let res = r.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if res > 1e-10 * scale {
            return Err(Error::Numeric(format!("harmonic extension residual {res:e}")));
        }
        for &(n, g) in &bc.entries {
            x[n] = g;
        }
        for (v, o) in out.iter_mut().enumerate() {
            if let Some(n) = space.vertex_node(v) {
                o[comp] = x[n];
            }
        }
    }
    Ok(out)
}
