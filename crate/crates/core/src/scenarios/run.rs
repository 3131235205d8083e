//! Time loop for a configured scenario.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::assembly::{
    assemble_load, assemble_system, CoupledSystem, DirichletData, MaterialFields, Sources, Spaces, Traction, Unknown,
};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::io::{write_csv, write_vtk, CsvTable, VtkField};
use crate::mesh::{Mesh2D, Subdomain};
use crate::system::{StepDiagnostics, Stepper, TransientState};

use super::config::{BcKind, OutputKind, PorousMaterial, ScenarioConfig, StorageLaw};
use super::extension::harmonic_extension;
use super::spe10::{fields_from_slab, load_spe10_layer, synthetic_spe10, HeterogeneousFields, SPE10_NX, SPE10_NY};

/// Result of [`run_scenario`].
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub name: String,
    pub steps: usize,
    pub final_state: TransientState,
    pub spaces: Spaces,
    /// Stokes mesh at the final time (the reference mesh without motion).
    pub final_mesh: Arc<Mesh2D>,
    /// One row per step, columns as in [`TIMESERIES_HEADER`].
    pub timeseries: CsvTable,
    pub files: Vec<PathBuf>,
    pub max_interface_ratio: f64,
    pub max_kinematic_residual: f64,
    pub max_solve_residual: f64,
}

pub const TIMESERIES_HEADER: [&str; 13] = [
    "step",
    "t",
    "norm_x",
    "interface_ratio",
    "kinematic",
    "residual",
    "max_u_f",
    "max_u_r",
    "max_y_s",
    "max_u_s",
    "max_p_S",
    "max_p_P",
    "max_lambda",
];

/// Material fields described by `cfg` on `mesh`.
pub fn build_materials(cfg: &ScenarioConfig, mesh: &Arc<Mesh2D>) -> Result<MaterialFields> {
    let m = &cfg.materials;
    let (phi, kappa, lambda_p, mu_p) = match &m.porous {
        PorousMaterial::Constant {
            phi,
            kappa,
            lambda_p,
            mu_p,
        } => (
            ScalarField::Constant(*phi),
            ScalarField::Constant(*kappa),
            ScalarField::Constant(*lambda_p),
            ScalarField::Constant(*mu_p),
        ),
        PorousMaterial::Spe10 {
            phi_file,
            perm_file,
            options,
        } => fields(&load_spe10_layer(cfg.input_path(phi_file), cfg.input_path(perm_file), options, mesh)?),
        PorousMaterial::Spe10Synthetic { seed, options } => {
            let (phi, perm) = synthetic_spe10(*seed);
            if options.layer == 0 || options.layer > super::spe10::SPE10_NZ {
                return Err(Error::Argument(format!("layer {} outside 1..=85", options.layer)));
            }
            let slab = SPE10_NX * SPE10_NY;
            let r = (options.layer - 1) * slab..options.layer * slab;
            fields(&fields_from_slab(mesh, phi[r.clone()].to_vec(), perm[r].to_vec(), options)?)
        }
    };
    let k_bulk = match m.storage {
        StorageLaw::BulkModulus(k) => ScalarField::Constant(k),
        StorageLaw::C0(c0) => {
            if !(c0 > 0.0) {
                return Err(Error::Argument(format!("storage coefficient c0 = {c0} must be positive")));
            }
            phi.map(move |p| (1.0 - p) * (1.0 - p) / c0)
        }
    };
    let mat = MaterialFields {
        mu_f: m.mu_f,
        mu_p,
        lambda_p,
        rho_f: m.rho_f,
        rho_p: ScalarField::Constant(m.rho_p),
        phi,
        kappa,
        k_bulk,
        theta: m.theta,
        alpha_bjs: m.alpha_bjs,
        viscosity_scaled_permeability: m.viscosity_scaled_permeability,
    };
    mat.validate(mesh)?;
    Ok(mat)
}

fn fields(h: &HeterogeneousFields) -> (ScalarField, ScalarField, ScalarField, ScalarField) {
    (
        ScalarField::nodal(h.phi.clone()),
        ScalarField::nodal(h.kappa.clone()),
        ScalarField::nodal(h.lambda_p.clone()),
        ScalarField::nodal(h.mu_p.clone()),
    )
}

/// Essential data of `cfg` at time `t`.
pub fn dirichlet_data(cfg: &ScenarioConfig, spaces: &Spaces, t: f64) -> Result<DirichletData> {
    let mut sets = Vec::new();
    for bc in &cfg.boundary_conditions {
        if let BcKind::Dirichlet {
            value,
            components,
            profile,
        } = &bc.kind
        {
            let s = profile.eval(t);
            let g = |_: [f64; 2], _: f64| [value[0] * s, value[1] * s];
            let set = spaces
                .get(bc.field)
                .dirichlet_bcs(&[bc.marker], components.as_deref(), &g, t)?;
            sets.push((bc.field, set));
        }
    }
    DirichletData::from_sets(spaces, &sets)
}

type BoundaryFn = dyn Fn([f64; 2], f64, [f64; 2]) -> [f64; 2] + Sync;

/// Load vector of `cfg` at time `t`: natural boundary data only.
pub fn scenario_load(cfg: &ScenarioConfig, system: &CoupledSystem, t: f64) -> Result<Vec<f64>> {
    let mut gs: Vec<(Unknown, crate::mesh::Marker, Box<BoundaryFn>)> = Vec::new();
    for bc in &cfg.boundary_conditions {
        match bc.kind {
            BcKind::Traction { value, profile } => gs.push((
                bc.field,
                bc.marker,
                Box::new(move |_, t, _| {
                    let s = profile.eval(t);
                    [value[0] * s, value[1] * s]
                }),
            )),
            BcKind::Pressure { value, profile } => gs.push((
                bc.field,
                bc.marker,
                Box::new(move |_, t, n| {
                    let p = value * profile.eval(t);
                    [-p * n[0], -p * n[1]]
                }),
            )),
            BcKind::Dirichlet { .. } => {}
        }
    }
    let tractions: Vec<Traction> = gs
        .iter()
        .map(|(u, m, g)| Traction {
            unknown: *u,
            markers: vec![*m],
            g: g.as_ref(),
        })
        .collect();
    assemble_load(system, &Sources::default(), None, &tractions, t)
}

fn output_path(out_dir: &Path, prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    let p = prefix.with_file_name(name);
    if p.is_absolute() {
        p
    } else {
        out_dir.join(p)
    }
}

/// Displacement of every reference vertex: `y_s` in the porous region and the
/// mesh motion in the Stokes region.
fn global_displacement(spaces: &Spaces, x: &[f64], motion: Option<&[[f64; 2]]>, mesh: &Mesh2D) -> Vec<[f64; 2]> {
    let mut d = spaces.ys.vertex_values(&x[spaces.range(Unknown::Displacement)]);
    if let Some(m) = motion {
        let porous = mesh.vertex_in(Subdomain::Porous);
        for (v, dv) in d.iter_mut().enumerate() {
            if !porous[v] {
                *dv = m[v];
            }
        }
    }
    d
}

fn vtk_fields(spaces: &Spaces, x: &[f64], disp: Vec<[f64; 2]>) -> Vec<VtkField> {
    let mut out = Vec::new();
    for u in Unknown::ALL {
        let vals = spaces.get(u).vertex_values(&x[spaces.range(u)]);
        if spaces.get(u).components() == 2 {
            out.push(VtkField::Vector(u.name().into(), vals));
        } else {
            out.push(VtkField::Scalar(u.name().into(), vals.iter().map(|v| v[0]).collect()));
        }
    }
    out.push(VtkField::Vector("global_displacement".into(), disp));
    out
}

fn material_fields_vtk(mat: &MaterialFields, mesh: &Mesh2D) -> Vec<VtkField> {
    let porous = mesh.vertex_in(Subdomain::Porous);
    let sample = |f: &ScalarField| -> Vec<f64> {
        (0..mesh.num_vertices())
            .map(|v| if porous[v] { f.at_vertex(v) } else { 0.0 })
            .collect()
    };
    vec![
        VtkField::Scalar("phi".into(), sample(&mat.phi)),
        VtkField::Scalar("kappa".into(), sample(&mat.kappa)),
        VtkField::Scalar("lambda_p".into(), sample(&mat.lambda_p)),
        VtkField::Scalar("mu_p".into(), sample(&mat.mu_p)),
    ]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn timeseries_row(spaces: &Spaces, s: &TransientState, d: &StepDiagnostics) -> Vec<f64> {
    let mut row = vec![
        s.step as f64,
        s.t,
        d.norm_x,
        d.interface_residual / d.norm_x.max(f64::MIN_POSITIVE),
        d.kinematic_residual,
        d.residual,
    ];
    for u in Unknown::ALL {
        row.push(max_abs(&s.x[spaces.range(u)]));
    }
    row
}

fn due(every: Option<usize>, step: usize, last: usize) -> bool {
    step == last || every.is_some_and(|k| step % k == 0)
}

/// Runs `cfg` from a zero initial state. Relative output prefixes are
/// resolved against `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutcome> {
    let reference = Arc::new(cfg.build_mesh()?);
    cfg.validate(&reference)?;
    let steps = cfg.time.steps()?;
    let tau = cfg.time.tau;
    let materials = build_materials(cfg, &reference)?;

    let mut spaces = Spaces::taylor_hood(reference.clone())?;
    let bc0 = dirichlet_data(cfg, &spaces, 0.0)?;
    let constrained = bc0.dofs();
    let mut stepper = Stepper::new(assemble_system(&spaces, &materials)?, tau, &constrained)?;
    let mut state = TransientState {
        t: 0.0,
        x: vec![0.0; spaces.dim()],
        step: 0,
    };
    let mut moved = reference.clone();
    let mut motion: Option<Vec<[f64; 2]>> = cfg.mesh_motion.as_ref().map(|_| vec![[0.0; 2]; reference.num_vertices()]);

    let mut files = Vec::new();
    for o in &cfg.outputs {
        if o.kind == OutputKind::VtkFields {
            let p = output_path(out_dir, &o.prefix, "_materials.vtk");
            write_vtk(&reference, &material_fields_vtk(&materials, &reference), &p)?;
            files.push(p);
        }
    }

    let mut table = CsvTable {
        header: TIMESERIES_HEADER.iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
    };
    let (mut iface, mut kin, mut res) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..steps {
        let t = state.t + tau;
        let load = scenario_load(cfg, &stepper.system, t)?;
        let bc = dirichlet_data(cfg, &spaces, t)?;
        if bc.dofs() != constrained {
            return Err(Error::Argument("constrained dofs changed between steps".into()));
        }
        let (next, diag) = stepper.step(&state, &load, &bc)?;
        if next.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite solution at step {}", next.step)));
        }
        iface = iface.max(diag.interface_residual / diag.norm_x.max(f64::MIN_POSITIVE));
        kin = kin.max(diag.kinematic_residual);
        res = res.max(diag.residual);
        table.rows.push(timeseries_row(&spaces, &next, &diag));
        state = next;

        if let (Some(mc), Some(m)) = (&cfg.mesh_motion, motion.as_mut()) {
            let ys = spaces.ys.vertex_values(&state.x[spaces.range(Unknown::Displacement)]);
            let trace: Vec<[f64; 2]> = reference.interface().trace_vertices.iter().map(|&v| ys[v]).collect();
            *m = harmonic_extension(&reference, &trace, &mc.fixed_markers)?;
            moved = Arc::new(reference.move_nodes(m).map_err(|e| match e {
                Error::MeshTangled(s) => Error::MeshTangled(format!("step {}: {s}", state.step)),
                other => other,
            })?);
            spaces = spaces.with_stokes_mesh(moved.clone())?;
            stepper = Stepper::new(assemble_system(&spaces, &materials)?, tau, &constrained)?;
        }

        for o in &cfg.outputs {
            if o.kind == OutputKind::VtkFields && due(o.every, state.step, steps) {
                let p = output_path(out_dir, &o.prefix, &format!("_{:05}.vtk", state.step));
                let disp = global_displacement(&spaces, &state.x, motion.as_deref(), &reference);
                write_vtk(&reference, &vtk_fields(&spaces, &state.x, disp), &p)?;
                files.push(p);
            }
        }
    }

    for o in &cfg.outputs {
        if o.kind == OutputKind::CsvTimeseries {
            let k = o.every.unwrap_or(1);
            let rows = table
                .rows
                .iter()
                .filter(|r| due(Some(k), r[0] as usize, steps))
                .cloned()
                .collect();
            let sub = CsvTable {
                header: table.header.clone(),
                rows,
            };
            let p = output_path(out_dir, &o.prefix, ".csv");
            write_csv(&sub, &p)?;
            files.push(p);
        }
    }

    Ok(ScenarioOutcome {
        name: cfg.name.clone(),
        steps,
        final_state: state,
        spaces,
        final_mesh: moved,
        timeseries: table,
        files,
        max_interface_ratio: iface,
        max_kinematic_residual: kin,
        max_solve_residual: res,
    })
}
