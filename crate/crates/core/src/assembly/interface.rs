//! Integrals over the interface Σ and over marked boundary edges.

use crate::error::{Error, Result};
use crate::fespace::{shape_values, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::mesh::{InterfaceMap, Marker, Mesh2D};
use crate::quadrature::edge_rule;
use crate::sparse::CsrMatrix;

/// Default edge rule order.
pub const EDGE_ORDER: usize = 5;

/// Quadrature point on an interface edge with the barycentric coordinates of
/// the point in both neighbouring triangles.
#[derive(Clone, Debug)]
pub struct TraceQp {
    /// Index into [`InterfaceMap::edges`], equal to the multiplier cell.
    pub edge: usize,
    pub x: [f64; 2],
    /// Physical weight.
    pub w: f64,
    /// Position along the edge in `[0, 1]`, following the tangent.
    pub s: f64,
    pub normal_porous: [f64; 2],
    pub tangent: [f64; 2],
    pub stokes_triangle: usize,
    pub porous_triangle: usize,
    pub l_stokes: [f64; 3],
    pub l_porous: [f64; 3],
}

fn bary_on_edge(tri: [usize; 3], a: usize, b: usize, s: f64) -> [f64; 3] {
    let mut l = [0.0; 3];
    for k in 0..3 {
        if tri[k] == a {
            l[k] = 1.0 - s;
        } else if tri[k] == b {
            l[k] = s;
        }
    }
    l
}

pub fn interface_quadrature(mesh: &Mesh2D, imap: &InterfaceMap, order: usize) -> Result<Vec<TraceQp>> {
    let rule = edge_rule(order)?;
    let mut out = Vec::with_capacity(imap.edges.len() * rule.len());
    for (i, e) in imap.edges.iter().enumerate() {
        let [a, b] = e.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        for q in 0..rule.len() {
            let s = rule.s(q);
            out.push(TraceQp {
                edge: i,
                x: [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])],
                w: rule.weights[q] * e.length,
                s,
                normal_porous: e.normal_porous,
                tangent: e.tangent,
                stokes_triangle: e.stokes_triangle,
                porous_triangle: e.porous_triangle,
                l_stokes: bary_on_edge(mesh.triangles()[e.stokes_triangle], a, b, s),
                l_porous: bary_on_edge(mesh.triangles()[e.porous_triangle], a, b, s),
            });
        }
    }
    Ok(out)
}

/// Cell index and shape values of `space` at a trace point.
pub(crate) fn trace_shape(space: &FunctionSpace, qp: &TraceQp, phi: &mut [f64; 6]) -> Result<usize> {
    match space.region() {
        Region::Interface => {
            phi[0] = 1.0 - qp.s;
            phi[1] = qp.s;
            Ok(qp.edge)
        }
        r => {
            let (t, l) = if r == Region::Stokes {
                (qp.stokes_triangle, qp.l_stokes)
            } else {
                (qp.porous_triangle, qp.l_porous)
            };
            shape_values(space.family(), l, phi);
            space
                .cell_of_triangle(t)
                .ok_or_else(|| Error::Argument("space does not touch the interface".into()))
        }
    }
}

/// `∫_Σ c (v_a·d_a)(v_b·d_b)` where `kernel` returns `(c, d_a, d_b)`; scalar
/// spaces ignore their direction.
pub(crate) fn assemble_trace_pair(
    va: &FunctionSpace,
    vb: &FunctionSpace,
    qps: &[TraceQp],
    kernel: &dyn Fn(&TraceQp) -> Result<(f64, [f64; 2], [f64; 2])>,
) -> Result<CsrMatrix> {
    let mut trip = Vec::new();
    let (mut pa, mut pb) = ([0.0; 6], [0.0; 6]);
    for qp in qps {
        let ca = trace_shape(va, qp, &mut pa)?;
        let cb = trace_shape(vb, qp, &mut pb)?;
        let (c, da, db) = kernel(qp)?;
        let da = if va.components() == 1 { [1.0, 0.0] } else { da };
        let db = if vb.components() == 1 { [1.0, 0.0] } else { db };
        for (ka, &na) in va.cell_nodes(ca).iter().enumerate() {
            for i in 0..va.components() {
                let fa = qp.w * c * pa[ka] * da[i];
                if fa == 0.0 {
                    continue;
                }
                for (kb, &nb) in vb.cell_nodes(cb).iter().enumerate() {
                    for j in 0..vb.components() {
                        trip.push((va.dof(na, i), vb.dof(nb, j), fa * pb[kb] * db[j]));
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(va.dim(), vb.dim(), &trip))
}

/// Blocks of the Beavers–Joseph–Saffman form with `β = μ_f α / √κ`:
/// `|u_f − w_s|²_BJS = zᵀ [ff, −fs; −sf, ss] z`. `fs` has rows in the Stokes
/// velocity space and columns in the displacement space; `sf = fsᵀ`.
#[derive(Clone, Debug)]
pub struct BjsBlocks {
    pub ff: CsrMatrix,
    pub fs: CsrMatrix,
    pub sf: CsrMatrix,
    pub ss: CsrMatrix,
}

pub fn assemble_bjs(
    vf: &FunctionSpace,
    vs: &FunctionSpace,
    mu_f: f64,
    alpha_bjs: f64,
    kappa: &ScalarField,
    qps: &[TraceQp],
) -> Result<BjsBlocks> {
    let mesh = vs.mesh().clone();
    let beta = |qp: &TraceQp| -> Result<(f64, [f64; 2], [f64; 2])> {
        let k = kappa.at(mesh.triangles()[qp.porous_triangle], qp.l_porous);
        if !(k > 0.0) {
            return Err(Error::Numeric(format!("permeability {k} at interface point {:?}", qp.x)));
        }
        Ok((mu_f * alpha_bjs / k.sqrt(), qp.tangent, qp.tangent))
    };
    let ff = assemble_trace_pair(vf, vf, qps, &beta)?;
    let fs = assemble_trace_pair(vf, vs, qps, &beta)?;
    let ss = assemble_trace_pair(vs, vs, qps, &beta)?;
    let sf = fs.transpose();
    Ok(BjsBlocks { ff, fs, sf, ss })
}

/// Multiplier couplings `⟨v·n, μ⟩_Σ` with rows in the multiplier space:
/// `(B_fΓ, B_pΓ, B_sΓ)` for the Stokes velocity (normal `n_S`), the relative
/// velocity and the displacement (normal `n_P`).
pub fn assemble_interface_coupling(
    vf: &FunctionSpace,
    vr: &FunctionSpace,
    vs: &FunctionSpace,
    lambda: &FunctionSpace,
    qps: &[TraceQp],
) -> Result<(CsrMatrix, CsrMatrix, CsrMatrix)> {
    if lambda.region() != Region::Interface {
        return Err(Error::Argument("multiplier space must live on the interface".into()));
    }
    let ns = |qp: &TraceQp| Ok((1.0, [0.0; 2], [-qp.normal_porous[0], -qp.normal_porous[1]]));
    let np = |qp: &TraceQp| Ok((1.0, [0.0; 2], qp.normal_porous));
    Ok((
        assemble_trace_pair(lambda, vf, qps, &ns)?,
        assemble_trace_pair(lambda, vr, qps, &np)?,
        assemble_trace_pair(lambda, vs, qps, &np)?,
    ))
}

/// `∫_Σ g·v` (vector spaces) or `∫_Σ g[0] v` (scalar spaces), added into `out`.
pub fn add_trace_load(space: &FunctionSpace, qps: &[TraceQp], g: &dyn Fn(&TraceQp) -> [f64; 2], out: &mut [f64]) -> Result<()> {
    let mut phi = [0.0; 6];
    for qp in qps {
        let c = trace_shape(space, qp, &mut phi)?;
        let v = g(qp);
        for (k, &n) in space.cell_nodes(c).iter().enumerate() {
            for i in 0..space.components() {
                out[space.dof(n, i)] += qp.w * phi[k] * v[i];
            }
        }
    }
    Ok(())
}

/// Quadrature point on an outer boundary edge.
#[derive(Clone, Debug)]
pub struct BoundaryQp {
    pub x: [f64; 2],
    pub w: f64,
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub cell: usize,
    pub l: [f64; 3],
}

/// Points on the edges marked with `markers` that bound a cell of `space`.
pub fn boundary_quadrature(space: &FunctionSpace, markers: &[Marker], order: usize) -> Result<Vec<BoundaryQp>> {
    let mesh = space.mesh();
    let rule = edge_rule(order)?;
    let mut out = Vec::new();
    for m in markers {
        if !mesh.has_marker(*m) {
            return Err(Error::Argument(format!("marker {m} not found in mesh")));
        }
        for e in mesh.marked_edges(*m) {
            for &t in mesh.edge_triangles(e) {
                let Some(cell) = space.cell_of_triangle(t) else { continue };
                let tri = mesh.triangles()[t];
                let k = (0..3).find(|&k| mesh.triangle_edges(t)[k] == e).unwrap();
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
                let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                for q in 0..rule.len() {
                    let s = rule.s(q);
                    out.push(BoundaryQp {
                        x: [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])],
                        w: rule.weights[q] * len,
                        normal,
                        cell,
                        l: bary_on_edge(tri, a, b, s),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `∫ g·v` over boundary points, added into `out`.
pub fn add_boundary_load(space: &FunctionSpace, qps: &[BoundaryQp], g: &dyn Fn(&BoundaryQp) -> [f64; 2], out: &mut [f64]) {
    let mut phi = [0.0; 6];
    for qp in qps {
        shape_values(space.family(), qp.l, &mut phi);
        let v = g(qp);
        for (k, &n) in space.cell_nodes(qp.cell).iter().enumerate() {
            for i in 0..space.components() {
                out[space.dof(n, i)] += qp.w * phi[k] * v[i];
            }
        }
    }
}
