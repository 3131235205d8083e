//! The load vector `L(t)`.

use crate::error::Result;
use crate::fespace::{barycentric_gradients, shape_values, FunctionSpace};
use crate::mesh::Marker;
use crate::parallel::map_chunks;
use crate::quadrature::triangle_rule;

use super::interface::{add_boundary_load, add_trace_load, boundary_quadrature, TraceQp, EDGE_ORDER};
use super::{CoupledSystem, Unknown};

pub type VectorSource<'a> = dyn Fn([f64; 2], f64) -> [f64; 2] + Sync + 'a;
pub type ScalarSource<'a> = dyn Fn([f64; 2], f64) -> f64 + Sync + 'a;

/// Volume sources, one per equation row. Absent entries are zero.
///
/// `relative_force` and `solid_force` enter the rows tested with `v_r` and
/// `w_s` as given, so a body force `f_P` contributes `ρ_f φ f_P` and `ρ_p f_P`
/// respectively. `pore_mass` is the right-hand side of the mass balance.
#[derive(Default, Clone, Copy)]
pub struct Sources<'a> {
    pub stokes_force: Option<&'a VectorSource<'a>>,
    pub relative_force: Option<&'a VectorSource<'a>>,
    pub solid_force: Option<&'a VectorSource<'a>>,
    pub stokes_mass: Option<&'a ScalarSource<'a>>,
    pub pore_mass: Option<&'a ScalarSource<'a>>,
}

/// Residuals of the interface conditions for data that does not satisfy
/// them exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InterfaceCorrection {
    /// Normal flux mismatch.
    pub m1: f64,
    /// Normal fluid stress mismatch.
    pub m2: f64,
    /// Total traction mismatch.
    pub m3: [f64; 2],
    /// Tangential slip-law mismatch.
    pub m4: f64,
    /// Tangential porous fluid stress.
    pub m5: f64,
}

/// Interface corrections as a function of `(x, t, n_P, τ)`.
pub type CorrectionFn<'a> = dyn Fn([f64; 2], f64, [f64; 2], [f64; 2]) -> InterfaceCorrection + Sync + 'a;

/// Natural boundary data `∫ g·v` on marked edges for the equation tested by
/// `unknown`. `g` receives `(x, t, outward normal)`.
pub struct Traction<'a> {
    pub unknown: Unknown,
    pub markers: Vec<Marker>,
    pub g: &'a (dyn Fn([f64; 2], f64, [f64; 2]) -> [f64; 2] + Sync),
}

const LOAD_ORDER: usize = 5;

fn volume_load(space: &FunctionSpace, t: f64, f: &(dyn Fn([f64; 2], f64) -> [f64; 2] + Sync), out: &mut [f64]) -> Result<()> {
    let rule = triangle_rule(LOAD_ORDER)?;
    let mesh = space.mesh();
    let nl = space.local_nodes();
    let nc = space.components();
    let parts = map_chunks(space.cells().len(), 512, |range| {
        let mut acc = Vec::with_capacity(range.len() * nl * nc);
        let mut phi = [0.0; 6];
        for c in range {
            let tcell = space.cells()[c];
            let x = mesh.triangle_coords(tcell);
            let (_, area) = barycentric_gradients(&x);
            let mut local = [0.0; 12];
            for q in 0..rule.len() {
                let l = rule.points[q];
                let p = [
                    l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0],
                    l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1],
                ];
                let v = f(p, t);
                let w = 2.0 * area * rule.weights[q];
                shape_values(space.family(), l, &mut phi);
                for k in 0..nl {
                    for i in 0..nc {
                        local[k * nc + i] += w * phi[k] * v[i];
                    }
                }
            }
            for (k, &n) in space.cell_nodes(c).iter().enumerate() {
                for i in 0..nc {
                    acc.push((space.dof(n, i), local[k * nc + i]));
                }
            }
        }
        acc
    });
    for (d, v) in parts {
        out[d] += v;
    }
    Ok(())
}

/// Assembles `L(t)`: volume sources, optional interface corrections and
/// natural boundary data.
pub fn assemble_load(
    system: &CoupledSystem,
    sources: &Sources,
    corrections: Option<&CorrectionFn>,
    tractions: &[Traction],
    t: f64,
) -> Result<Vec<f64>> {
    use Unknown::*;
    let sp = &system.spaces;
    let mut l = vec![0.0; sp.dim()];
    let block = |u: Unknown, l: &mut Vec<f64>, f: &dyn Fn(&mut [f64]) -> Result<()>| -> Result<()> {
        let r = sp.range(u);
        f(&mut l[r])
    };
    if let Some(f) = sources.stokes_force {
        block(StokesVelocity, &mut l, &|o| volume_load(&sp.uf, t, f, o))?;
    }
    if let Some(f) = sources.relative_force {
        block(RelativeVelocity, &mut l, &|o| volume_load(&sp.ur, t, f, o))?;
    }
    if let Some(f) = sources.solid_force {
        block(Displacement, &mut l, &|o| volume_load(&sp.ys, t, f, o))?;
    }
    if let Some(f) = sources.stokes_mass {
        let g = |x: [f64; 2], t: f64| [f(x, t), 0.0];
        block(StokesPressure, &mut l, &|o| volume_load(&sp.ps, t, &g, o))?;
    }
    if let Some(f) = sources.pore_mass {
        let g = |x: [f64; 2], t: f64| [f(x, t), 0.0];
        block(PorePressure, &mut l, &|o| volume_load(&sp.pp, t, &g, o))?;
    }
    if let Some(m) = corrections {
        let qps = &system.interface_qps;
        let at = |q: &TraceQp| m(q.x, t, q.normal_porous, q.tangent);
        let sc = |v: f64, d: [f64; 2]| [v * d[0], v * d[1]];
        // F(v_f) -= <m4, v_f·τ>
        block(StokesVelocity, &mut l, &|o| {
            add_trace_load(&sp.uf, qps, &|q| sc(-at(q).m4, q.tangent), o)
        })?;
        // F(v_r) += <m2, v_r·n_P> + <m5, v_r·τ>
        block(RelativeVelocity, &mut l, &|o| {
            add_trace_load(
                &sp.ur,
                qps,
                &|q| {
                    let c = at(q);
                    let (a, b) = (sc(c.m2, q.normal_porous), sc(c.m5, q.tangent));
                    [a[0] + b[0], a[1] + b[1]]
                },
                o,
            )
        })?;
        // F(w_s) += <m3, w> + <m4, w·τ>
        block(Displacement, &mut l, &|o| {
            add_trace_load(
                &sp.ys,
                qps,
                &|q| {
                    let c = at(q);
                    let b = sc(c.m4, q.tangent);
                    [c.m3[0] + b[0], c.m3[1] + b[1]]
                },
                o,
            )
        })?;
        // F(μ) = -<m1, μ>
        block(Multiplier, &mut l, &|o| add_trace_load(&sp.lambda, qps, &|q| [-at(q).m1, 0.0], o))?;
    }
    for tr in tractions {
        let space = sp.get(tr.unknown);
        let qps = boundary_quadrature(space, &tr.markers, EDGE_ORDER)?;
        let g = |q: &super::BoundaryQp| (tr.g)(q.x, t, q.normal);
        block(tr.unknown, &mut l, &|o| {
            add_boundary_load(space, &qps, &g, o);
            Ok(())
        })?;
    }
    Ok(l)
}
