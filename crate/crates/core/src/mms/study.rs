//! Convergence studies in space and time.

use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::assembly::{assemble_load, assemble_system, CoupledSystem, DirichletData, Sources, Spaces, Unknown};
use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::mesh::{build_two_block_mesh, Marker, Mesh2D, Rect};
use crate::system::{run_transient, Stepper, TransientState};

use super::exact::ManufacturedCase;
use super::norms::{error_norms, MultiplierNorm, REPORT_ORDER};

/// Coarsest mesh: `8 × 4` cells per unit square, `h = √5/8`.
pub fn mms_mesh(level: usize) -> Result<Mesh2D> {
    if level > 6 {
        return Err(Error::Argument(format!("refinement level {level} is too large")));
    }
    let k = 1usize << level;
    build_two_block_mesh(Rect::new(0.0, 0.0, 1.0, 1.0), Rect::new(0.0, 1.0, 1.0, 2.0), 8 * k, 4 * k)
}

const OUTER: [Marker; 4] = [Marker::WallLeft, Marker::WallRight, Marker::WallBottom, Marker::WallTop];

/// Exact values of the essential data for `u_f`, `u_r` and `y_s` at time `t`.
pub fn boundary_data(case: &ManufacturedCase, spaces: &Spaces, t: f64) -> Result<DirichletData> {
    let mut sets = Vec::new();
    for u in [Unknown::StokesVelocity, Unknown::RelativeVelocity, Unknown::Displacement] {
        let g = |x: [f64; 2], t: f64| case.value(u, x, t);
        sets.push((u, spaces.get(u).dirichlet_bcs(&OUTER, None, &g, t)?));
    }
    DirichletData::from_sets(spaces, &sets)
}

/// Nodal interpolant of the exact state at time `t`.
pub fn exact_state(case: &ManufacturedCase, spaces: &Spaces, t: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; spaces.dim()];
    for u in Unknown::ALL {
        let v = spaces.get(u).interpolate(&|p, t| case.value(u, p, t), t)?;
        x[spaces.range(u)].copy_from_slice(&v);
    }
    Ok(x)
}

/// Load vector with manufactured sources and interface corrections.
pub fn manufactured_load(case: &ManufacturedCase, system: &CoupledSystem, t: f64) -> Result<Vec<f64>> {
    let fs = |x: [f64; 2], t: f64| case.sources(x, t).stokes_force;
    let fr = |x: [f64; 2], t: f64| case.sources(x, t).relative_force;
    let fw = |x: [f64; 2], t: f64| case.sources(x, t).solid_force;
    let gs = |x: [f64; 2], t: f64| case.sources(x, t).stokes_mass;
    let gp = |x: [f64; 2], t: f64| case.sources(x, t).pore_mass;
    let m = |x: [f64; 2], t: f64, n: [f64; 2], tau: [f64; 2]| case.corrections_with(x, t, n, tau);
    let sources = Sources {
        stokes_force: Some(&fs),
        relative_force: Some(&fr),
        solid_force: Some(&fw),
        stokes_mass: Some(&gs),
        pore_mass: Some(&gp),
    };
    assemble_load(system, &sources, Some(&m), &[], t)
}

/// Outcome of one manufactured transient.
#[derive(Clone, Debug)]
pub struct ManufacturedRun {
    pub spaces: Spaces,
    pub final_state: TransientState,
    pub steps: usize,
    pub tau: f64,
    /// Largest `max_μ |interface row residual| / ‖Xⁿ‖` over the steps.
    pub max_interface_ratio: f64,
    pub max_kinematic_residual: f64,
    pub max_solve_residual: f64,
}

/// Runs `steps` steps of size `tau` from the interpolated initial data.
/// `on_step` sees every new state.
pub fn run_manufactured(
    case: &ManufacturedCase,
    mesh: Arc<Mesh2D>,
    tau: f64,
    steps: usize,
    on_step: &mut dyn FnMut(&CoupledSystem, &TransientState) -> Result<()>,
) -> Result<ManufacturedRun> {
    let spaces = Spaces::taylor_hood(mesh)?;
    let system = assemble_system(&spaces, &case.materials())?;
    let bc0 = boundary_data(case, &spaces, 0.0)?;
    let stepper = Stepper::new(system, tau, &bc0.dofs())?;
    let initial = TransientState {
        t: 0.0,
        x: exact_state(case, &spaces, 0.0)?,
        step: 0,
    };
    let (mut iface, mut kin, mut res) = (0.0f64, 0.0f64, 0.0f64);
    let sys = &stepper.system;
    let final_state = run_transient(
        &stepper,
        initial,
        steps,
        &mut |t| manufactured_load(case, sys, t),
        &mut |t| boundary_data(case, &spaces, t),
        &mut |_, next, d| {
            iface = iface.max(d.interface_residual / d.norm_x.max(f64::MIN_POSITIVE));
            kin = kin.max(d.kinematic_residual);
            res = res.max(d.residual);
            on_step(sys, next)
        },
    )?;
    Ok(ManufacturedRun {
        spaces,
        final_state,
        steps,
        tau,
        max_interface_ratio: iface,
        max_kinematic_residual: kin,
        max_solve_residual: res,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StudyKind {
    Space,
    Time,
}

/// One level of a study.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRow {
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    pub dofs: usize,
    pub steps: usize,
    /// Errors in [`REPORT_ORDER`].
    pub errors: [f64; 7],
    pub max_interface_ratio: f64,
    pub max_kinematic_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub kind: StudyKind,
    pub rows: Vec<ErrorRow>,
}

/// `log(e_c/e_f) / log(p_c/p_f)`, which is `log₂(e_c/e_f)` when the
/// parameter halves.
pub fn observed_rate(e_coarse: f64, e_fine: f64, p_coarse: f64, p_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (p_coarse / p_fine).ln()
}

const COLUMN_TAGS: [&str; 7] = ["uf_h1", "ps_l2", "ur_l2", "pp_l2", "ys_h1", "us_l2", "lambda"];

impl ErrorReport {
    fn parameter(&self, r: &ErrorRow) -> f64 {
        match self.kind {
            StudyKind::Space => r.h,
            StudyKind::Time => r.tau,
        }
    }

    /// Rates between consecutive rows.
    pub fn rates(&self) -> Vec<[f64; 7]> {
        self.rows
            .windows(2)
            .map(|w| {
                let (pc, pf) = (self.parameter(&w[0]), self.parameter(&w[1]));
                std::array::from_fn(|k| observed_rate(w[0].errors[k], w[1].errors[k], pc, pf))
            })
            .collect()
    }

    /// Rates of the two finest rows.
    pub fn final_rates(&self) -> Option<[f64; 7]> {
        self.rates().last().copied()
    }

    /// Error of `u` on row `row`.
    pub fn error(&self, row: usize, u: Unknown) -> f64 {
        let k = REPORT_ORDER.iter().position(|&v| v == u).unwrap();
        self.rows[row].errors[k]
    }

    /// Columns `level,h,tau,dofs,e_uf_h1,rate_uf_h1,…`; the first row has NaN rates.
    pub fn to_table(&self) -> CsvTable {
        let mut header: Vec<String> = ["level", "h", "tau", "dofs"].map(String::from).to_vec();
        for tag in COLUMN_TAGS {
            header.push(format!("e_{tag}"));
            header.push(format!("rate_{tag}"));
        }
        let rates = self.rates();
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = vec![r.level as f64, r.h, r.tau, r.dofs as f64];
                for k in 0..7 {
                    v.push(r.errors[k]);
                    v.push(if i == 0 { f64::NAN } else { rates[i - 1][k] });
                }
                v
            })
            .collect();
        CsvTable { header, rows }
    }

    /// Fixed-width text table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:>3} {:>8} {:>10} {:>8}", "lvl", "h", "tau", "dofs");
        for tag in COLUMN_TAGS {
            let _ = write!(s, " {:>11} {:>6}", format!("e_{tag}"), "rate");
        }
        s.push('\n');
        let rates = self.rates();
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "{:>3} {:>8.4} {:>10.6} {:>8}", r.level, r.h, r.tau, r.dofs);
            for k in 0..7 {
                let rate = if i == 0 { "-".to_string() } else { format!("{:.3}", rates[i - 1][k]) };
                let _ = write!(s, " {:>11.4e} {:>6}", r.errors[k], rate);
            }
            s.push('\n');
        }
        s
    }
}

/// Steps to reach `T = 1` with `τ ≤ h²`.
pub fn steps_for(h: f64) -> usize {
    (1.0 / (h * h) - 1e-9).ceil().max(1.0) as usize
}

/// Final-time errors on `levels` uniformly refined meshes with `τ ≈ h²`.
pub fn spatial_convergence_study(case: &ManufacturedCase, levels: usize) -> Result<ErrorReport> {
    if levels == 0 || levels > 5 {
        return Err(Error::Argument(format!("levels must be in 1..=5, got {levels}")));
    }
    let mut rows = Vec::new();
    for level in 0..levels {
        let mesh = Arc::new(mms_mesh(level)?);
        let h = mesh.h();
        let steps = steps_for(h);
        let tau = 1.0 / steps as f64;
        let run = run_manufactured(case, mesh.clone(), tau, steps, &mut |_, _| Ok(()))?;
        let qps = crate::assembly::interface_quadrature(&mesh, &mesh.interface(), 8)?;
        let lam = MultiplierNorm::new(mesh.clone())?;
        let errors = error_norms(case, &run.spaces, &qps, &lam, &run.final_state.x, run.final_state.t)?;
        rows.push(ErrorRow {
            level,
            h,
            tau,
            dofs: run.spaces.dim(),
            steps,
            errors,
            max_interface_ratio: run.max_interface_ratio,
            max_kinematic_residual: run.max_kinematic_residual,
        });
    }
    Ok(ErrorReport { kind: StudyKind::Space, rows })
}

/// Cumulative errors `ê = (Σ τ‖e(tⁿ)‖²)^{1/2}` on a fixed mesh for
/// `τ_k = tau0 / 2^k`, `k = 0..=halvings`, up to `T = 1`.
pub fn temporal_convergence_study(
    case: &ManufacturedCase,
    mesh_level: usize,
    tau0: f64,
    halvings: usize,
) -> Result<ErrorReport> {
    if !(tau0 > 0.0 && tau0 <= 1.0) {
        return Err(Error::Argument(format!("tau0 must be in (0, 1], got {tau0}")));
    }
    if halvings > 12 {
        return Err(Error::Argument(format!("{halvings} halvings is too many")));
    }
    let mesh = Arc::new(mms_mesh(mesh_level)?);
    let qps = crate::assembly::interface_quadrature(&mesh, &mesh.interface(), 8)?;
    let lam = MultiplierNorm::new(mesh.clone())?;
    let mut rows = Vec::new();
    for k in 0..=halvings {
        let tau = tau0 / (1u64 << k) as f64;
        let steps = (1.0 / tau).round() as usize;
        if steps == 0 || (steps as f64 * tau - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("τ = {tau} does not divide the interval (0, 1)")));
        }
        let mut acc = [0.0; 7];
        let run = run_manufactured(case, mesh.clone(), tau, steps, &mut |sys, st| {
            let e = error_norms(case, &sys.spaces, &qps, &lam, &st.x, st.t)?;
            for i in 0..7 {
                acc[i] += tau * e[i] * e[i];
            }
            Ok(())
        })?;
        rows.push(ErrorRow {
            level: k,
            h: mesh.h(),
            tau,
            dofs: run.spaces.dim(),
            steps,
            errors: acc.map(f64::sqrt),
            max_interface_ratio: run.max_interface_ratio,
            max_kinematic_residual: run.max_kinematic_residual,
        });
    }
    Ok(ErrorReport { kind: StudyKind::Time, rows })
}
