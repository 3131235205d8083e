//! Assembly of the coupled block system `E ∂ₜX + H X = L`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fespace::{Family, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::mesh::{Mesh2D, Subdomain};
use crate::sparse::CsrMatrix;

mod dirichlet;
mod interface;
mod kernels;
mod load;

pub use dirichlet::{apply_dirichlet, ConstrainedMatrix, DirichletData};
pub use interface::{
    add_boundary_load, add_trace_load, assemble_bjs, assemble_interface_coupling, boundary_quadrature,
    interface_quadrature, BjsBlocks, BoundaryQp, TraceQp, EDGE_ORDER,
};
pub use kernels::{
    assemble_brinkman_viscous, assemble_divergence_coupling, assemble_elasticity, assemble_grad_div,
    assemble_stiffness, assemble_stokes_viscous, assemble_strain, assemble_weighted_mass, VOLUME_ORDER,
};
pub use load::{assemble_load, InterfaceCorrection, Sources, Traction};

/// The seven unknowns in block order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unknown {
    #[serde(rename = "u_f")]
    StokesVelocity,
    #[serde(rename = "u_r")]
    RelativeVelocity,
    #[serde(rename = "y_s")]
    Displacement,
    #[serde(rename = "u_s")]
    SolidVelocity,
    #[serde(rename = "p_S")]
    StokesPressure,
    #[serde(rename = "p_P")]
    PorePressure,
    #[serde(rename = "lambda")]
    Multiplier,
}

impl Unknown {
    pub const ALL: [Unknown; 7] = [
        Unknown::StokesVelocity,
        Unknown::RelativeVelocity,
        Unknown::Displacement,
        Unknown::SolidVelocity,
        Unknown::StokesPressure,
        Unknown::PorePressure,
        Unknown::Multiplier,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Unknown::StokesVelocity => "u_f",
            Unknown::RelativeVelocity => "u_r",
            Unknown::Displacement => "y_s",
            Unknown::SolidVelocity => "u_s",
            Unknown::StokesPressure => "p_S",
            Unknown::PorePressure => "p_P",
            Unknown::Multiplier => "lambda",
        }
    }

    pub fn parse(s: &str) -> Result<Unknown> {
        Unknown::ALL
            .into_iter()
            .find(|u| u.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown field '{s}'")))
    }
}

/// Material parameters. Spatially varying quantities are scalar fields; the
/// solid density is derived from `ρ_p = ρ_s(1−φ) + ρ_f φ`.
#[derive(Clone, Debug)]
pub struct MaterialFields {
    pub mu_f: f64,
    pub mu_p: ScalarField,
    pub lambda_p: ScalarField,
    pub rho_f: f64,
    pub rho_p: ScalarField,
    pub phi: ScalarField,
    pub kappa: ScalarField,
    pub k_bulk: ScalarField,
    pub theta: f64,
    pub alpha_bjs: f64,
    /// Use `μ_f φ²/κ` instead of `φ²/κ` in the drag term.
    pub viscosity_scaled_permeability: bool,
}

impl MaterialFields {
    pub fn rho_s(&self) -> ScalarField {
        let rf = self.rho_f;
        self.rho_p.zip(&self.phi, move |rp, p| (rp - rf * p) / (1.0 - p))
    }

    /// `ρ_f φ`
    pub fn rho_f_phi(&self) -> ScalarField {
        self.phi.scale(self.rho_f)
    }

    /// `(1−φ)²/K`
    pub fn storage(&self) -> ScalarField {
        self.phi.zip(&self.k_bulk, |p, k| (1.0 - p) * (1.0 - p) / k)
    }

    /// `φ²/κ`, times `μ_f` when the viscosity-scaled variant is on.
    pub fn drag(&self) -> ScalarField {
        let s = if self.viscosity_scaled_permeability { self.mu_f } else { 1.0 };
        self.phi.zip(&self.kappa, move |p, k| s * p * p / k)
    }

    /// Checks the admissibility bounds at every porous vertex.
    pub fn validate(&self, mesh: &Mesh2D) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("material check failed: {what}")));
        if !(self.mu_f > 0.0) || !(self.rho_f > 0.0) {
            return bad("μ_f and ρ_f must be positive");
        }
        if !(self.theta <= 0.0) {
            return bad("θ must be nonpositive");
        }
        if !(self.alpha_bjs >= 0.0) {
            return bad("α_BJS must be nonnegative");
        }
        let rho_s = self.rho_s();
        let porous = mesh.vertex_in(Subdomain::Porous);
        for v in (0..mesh.num_vertices()).filter(|&v| porous[v]) {
            let p = self.phi.at_vertex(v);
            if !(p > 0.0 && p < 1.0) {
                return bad(&format!("porosity {p} at vertex {v} outside (0,1)"));
            }
            let k = self.kappa.at_vertex(v);
            if !(k > 0.0) {
                return bad(&format!("permeability {k} at vertex {v}"));
            }
            if !(self.k_bulk.at_vertex(v) > 0.0) {
                return bad(&format!("bulk modulus at vertex {v}"));
            }
            if !(self.mu_p.at_vertex(v) > 0.0) || !(self.lambda_p.at_vertex(v) >= 0.0) {
                return bad(&format!("Lamé parameters at vertex {v}"));
            }
            if !(self.rho_p.at_vertex(v) > 0.0) || !(rho_s.at_vertex(v) > 0.0) {
                return bad(&format!("densities at vertex {v}"));
            }
        }
        Ok(())
    }
}

/// The seven discrete spaces: P2² velocities and displacement, P1² solid
/// velocity, P1 pressures and the P1 interface multiplier.
#[derive(Clone, Debug)]
pub struct Spaces {
    pub uf: FunctionSpace,
    pub ur: FunctionSpace,
    pub ys: FunctionSpace,
    pub us: FunctionSpace,
    pub ps: FunctionSpace,
    pub pp: FunctionSpace,
    pub lambda: FunctionSpace,
}

impl Spaces {
    pub fn taylor_hood(mesh: Arc<Mesh2D>) -> Result<Spaces> {
        let sp = |r, f, c| FunctionSpace::new(mesh.clone(), r, f, c);
        Ok(Spaces {
            uf: sp(Region::Stokes, Family::P2, 2)?,
            ur: sp(Region::Porous, Family::P2, 2)?,
            ys: sp(Region::Porous, Family::P2, 2)?,
            us: sp(Region::Porous, Family::P1, 2)?,
            ps: sp(Region::Stokes, Family::P1, 1)?,
            pp: sp(Region::Porous, Family::P1, 1)?,
            lambda: sp(Region::Interface, Family::P1, 1)?,
        })
    }

    /// Rebuilds the Stokes-side spaces and the multiplier on a moved mesh.
    pub fn with_stokes_mesh(&self, moved: Arc<Mesh2D>) -> Result<Spaces> {
        Ok(Spaces {
            uf: self.uf.with_mesh(moved.clone())?,
            ps: self.ps.with_mesh(moved.clone())?,
            lambda: self.lambda.with_mesh(moved)?,
            ..self.clone()
        })
    }

    pub fn get(&self, u: Unknown) -> &FunctionSpace {
        match u {
            Unknown::StokesVelocity => &self.uf,
            Unknown::RelativeVelocity => &self.ur,
            Unknown::Displacement => &self.ys,
            Unknown::SolidVelocity => &self.us,
            Unknown::StokesPressure => &self.ps,
            Unknown::PorePressure => &self.pp,
            Unknown::Multiplier => &self.lambda,
        }
    }

    pub fn sizes(&self) -> [usize; 7] {
        Unknown::ALL.map(|u| self.get(u).dim())
    }

    pub fn offsets(&self) -> [usize; 8] {
        let s = self.sizes();
        let mut o = [0; 8];
        for i in 0..7 {
            o[i + 1] = o[i] + s[i];
        }
        o
    }

    pub fn dim(&self) -> usize {
        self.offsets()[7]
    }

    pub fn range(&self, u: Unknown) -> std::ops::Range<usize> {
        let o = self.offsets();
        o[u.index()]..o[u.index() + 1]
    }

    fn check_topology(&self) -> Result<()> {
        let m = self.uf.mesh();
        for u in Unknown::ALL {
            let s = self.get(u).mesh();
            if !Arc::ptr_eq(m, s) && !m.same_topology(s) {
                return Err(Error::Argument(format!("space {} is built on a different mesh", u.name())));
            }
        }
        Ok(())
    }
}

/// 7×7 grid of sparse blocks; absent blocks are structurally zero.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    sizes: [usize; 7],
    blocks: Vec<Option<CsrMatrix>>,
}

impl BlockMatrix {
    pub fn new(sizes: [usize; 7]) -> Self {
        BlockMatrix {
            sizes,
            blocks: vec![None; 49],
        }
    }

    pub fn sizes(&self) -> [usize; 7] {
        self.sizes
    }

    pub fn set(&mut self, r: Unknown, c: Unknown, m: CsrMatrix) {
        assert_eq!(
            (m.nrows(), m.ncols()),
            (self.sizes[r.index()], self.sizes[c.index()]),
            "block ({}, {}) has wrong shape",
            r.name(),
            c.name()
        );
        self.blocks[7 * r.index() + c.index()] = Some(m);
    }

    pub fn get(&self, r: Unknown, c: Unknown) -> Option<&CsrMatrix> {
        self.blocks[7 * r.index() + c.index()].as_ref()
    }

    /// Block or an explicit zero matrix of the right shape.
    pub fn block(&self, r: Unknown, c: Unknown) -> CsrMatrix {
        self.get(r, c)
            .cloned()
            .unwrap_or_else(|| CsrMatrix::zeros(self.sizes[r.index()], self.sizes[c.index()]))
    }

    fn offsets(&self) -> [usize; 8] {
        let mut o = [0; 8];
        for i in 0..7 {
            o[i + 1] = o[i] + self.sizes[i];
        }
        o
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let o = self.offsets();
        let mut y = vec![0.0; self.dim()];
        for r in Unknown::ALL {
            for c in Unknown::ALL {
                if let Some(m) = self.get(r, c) {
                    let (ri, ci) = (r.index(), c.index());
                    m.mul_vec_add(1.0, &x[o[ci]..o[ci + 1]], &mut y[o[ri]..o[ri + 1]]);
                }
            }
        }
        y
    }

    /// `alpha * self + beta * other` as one global matrix.
    pub fn combine(&self, alpha: f64, other: &BlockMatrix, beta: f64) -> CsrMatrix {
        assert_eq!(self.sizes, other.sizes);
        let o = self.offsets();
        let mut trip = Vec::new();
        for (m, s) in [(self, alpha), (other, beta)] {
            for r in Unknown::ALL {
                for c in Unknown::ALL {
                    if let Some(b) = m.get(r, c) {
                        let (ro, co) = (o[r.index()], o[c.index()]);
                        trip.extend(b.triplets().map(|(i, j, v)| (ro + i, co + j, s * v)));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.dim(), self.dim(), &trip)
    }

    pub fn to_csr(&self) -> CsrMatrix {
        self.combine(1.0, &BlockMatrix::new(self.sizes), 0.0)
    }
}

/// Assembled `E` and `H` together with the data needed for loads.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    pub spaces: Spaces,
    pub materials: MaterialFields,
    pub e: BlockMatrix,
    pub h: BlockMatrix,
    pub interface_qps: Vec<TraceQp>,
}

/// Fills every nonzero block of `E` and `H`.
pub fn assemble_system(spaces: &Spaces, materials: &MaterialFields) -> Result<CoupledSystem> {
    use Unknown::*;
    spaces.check_topology()?;
    let sp = spaces;
    let m = materials;
    let lam_mesh = sp.lambda.mesh();
    let qps = interface_quadrature(lam_mesh, &lam_mesh.interface(), EDGE_ORDER)?;

    let a_fs = assemble_stokes_viscous(&sp.uf, m.mu_f)?;
    let bjs = assemble_bjs(&sp.uf, &sp.ys, m.mu_f, m.alpha_bjs, &m.kappa, &qps)?;
    let b_s = assemble_divergence_coupling(&sp.uf, &sp.ps, &ScalarField::Constant(1.0))?;
    let (b_fg, b_pg, b_sg) = assemble_interface_coupling(&sp.uf, &sp.ur, &sp.ys, &sp.lambda, &qps)?;

    // u_r and y_s share one discrete structure, so the P2 porous blocks are
    // assembled once
    let a_fp = assemble_brinkman_viscous(&sp.ur, &sp.ys, m.mu_f, &m.phi)?;
    let m_theta = assemble_weighted_mass(&sp.ur, &sp.ys, &ScalarField::Constant(m.theta))?;
    let a_fp_theta = a_fp.add(-1.0, &m_theta);
    let rho_f_phi = m.rho_f_phi();
    let m_rfp = assemble_weighted_mass(&sp.ur, &sp.ur, &rho_f_phi)?;
    let m_rfp_rs = assemble_weighted_mass(&sp.ur, &sp.us, &rho_f_phi)?;
    let m_rp_ys = assemble_weighted_mass(&sp.ys, &sp.us, &m.rho_p)?;
    let m_rp_sy = m_rp_ys.transpose();
    let m_rp = assemble_weighted_mass(&sp.us, &sp.us, &m.rho_p)?;
    let m_drag = assemble_weighted_mass(&sp.ur, &sp.ur, &m.drag())?;
    let m_store = assemble_weighted_mass(&sp.pp, &sp.pp, &m.storage())?;
    let b_sp = assemble_divergence_coupling(&sp.ys, &sp.pp, &ScalarField::Constant(1.0))?;
    let b_fp = assemble_divergence_coupling(&sp.ur, &sp.pp, &m.phi)?;
    let a_sp = assemble_elasticity(&sp.ys, &m.mu_p, &m.lambda_p)?;

    let mut e = BlockMatrix::new(sp.sizes());
    e.set(StokesVelocity, Displacement, bjs.fs.scaled(-1.0));
    e.set(RelativeVelocity, RelativeVelocity, m_rfp.clone());
    e.set(RelativeVelocity, Displacement, a_fp_theta.clone());
    e.set(RelativeVelocity, SolidVelocity, m_rfp_rs);
    e.set(Displacement, RelativeVelocity, m_rfp);
    e.set(Displacement, Displacement, bjs.ss.add(1.0, &a_fp_theta));
    e.set(Displacement, SolidVelocity, m_rp_ys);
    e.set(SolidVelocity, Displacement, m_rp_sy.scaled(-1.0));
    e.set(PorePressure, Displacement, b_sp.scaled(-1.0));
    e.set(PorePressure, PorePressure, m_store);
    e.set(Multiplier, Displacement, b_sg.scaled(-1.0));

    let mut h = BlockMatrix::new(sp.sizes());
    h.set(StokesVelocity, StokesVelocity, a_fs.add(1.0, &bjs.ff));
    h.set(StokesVelocity, StokesPressure, b_s.transpose());
    h.set(StokesVelocity, Multiplier, b_fg.transpose());
    h.set(RelativeVelocity, RelativeVelocity, a_fp_theta.add(1.0, &m_drag));
    h.set(RelativeVelocity, PorePressure, b_fp.transpose());
    h.set(RelativeVelocity, Multiplier, b_pg.transpose());
    h.set(Displacement, StokesVelocity, bjs.sf.scaled(-1.0));
    h.set(Displacement, RelativeVelocity, a_fp_theta);
    h.set(Displacement, Displacement, a_sp);
    h.set(Displacement, PorePressure, b_sp.transpose());
    h.set(Displacement, Multiplier, b_sg.transpose());
    h.set(SolidVelocity, SolidVelocity, m_rp);
    h.set(StokesPressure, StokesVelocity, b_s.scaled(-1.0));
    h.set(PorePressure, RelativeVelocity, b_fp.scaled(-1.0));
    h.set(Multiplier, StokesVelocity, b_fg.scaled(-1.0));
    h.set(Multiplier, RelativeVelocity, b_pg.scaled(-1.0));

    Ok(CoupledSystem {
        spaces: spaces.clone(),
        materials: materials.clone(),
        e,
        h,
        interface_qps: qps,
    })
}
