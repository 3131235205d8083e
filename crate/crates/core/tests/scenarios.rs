//! Configured scenarios, material ingestion and the mesh-motion extension.

use std::path::PathBuf;
use std::sync::Arc;

use porostokes::assembly::Unknown;
use porostokes::error::Error;
use porostokes::mesh::{build_two_block_mesh, BoundaryEdge, Marker, Mesh2D, Rect, Subdomain};
use porostokes::scenarios::{
    build_materials, channel_config, fields_from_slab, fracture_config, harmonic_extension, lame_from_youngs,
    load_config, read_spe10_layer, run_scenario, synthetic_fracture_material, synthetic_spe10, write_spe10_files,
    BcKind, OutputKind, OutputRequest, PorousMaterial, ScenarioConfig, Spe10Options, YoungsLaw, PHI_CLAMP, SPE10_NX,
    SPE10_NY, TIMESERIES_HEADER,
};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn short(mut cfg: ScenarioConfig, steps: usize) -> ScenarioConfig {
    cfg.time.max_steps = Some(steps);
    cfg.outputs.clear();
    cfg
}

#[test]
fn fracture_preset_conserves_interface_mass() {
    let cfg = short(fracture_config(synthetic_fracture_material(7)), 20);
    let out = run_scenario(&cfg, std::path::Path::new(".")).unwrap();
    assert_eq!(out.steps, 20);
    assert!((out.final_state.t - 600.0).abs() < 1e-9);
    assert!(out.max_interface_ratio <= 1e-8, "{}", out.max_interface_ratio);
    assert!(out.max_solve_residual <= 1e-8);
    assert_eq!(out.timeseries.rows.len(), 20);
    // injection drives flow into the fracture and pressurizes the rock
    let last = out.timeseries.rows.last().unwrap();
    let col = |n: &str| TIMESERIES_HEADER.iter().position(|h| *h == n).unwrap();
    assert!(last[col("max_u_f")] >= 10.0 - 1e-9);
    assert!(last[col("max_p_P")] > 0.0);
    assert!(out.timeseries.rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
}

#[test]
fn channel_with_motion_stays_untangled() {
    let cfg = short(channel_config(8), 20);
    let out = run_scenario(&cfg, std::path::Path::new(".")).unwrap();
    assert_eq!(out.steps, 20);
    assert!(out.max_interface_ratio <= 1e-8);
    let reference = cfg.build_mesh().unwrap();
    assert!(out.final_mesh.same_topology(&reference));
    let moved = out
        .final_mesh
        .vertices()
        .iter()
        .zip(reference.vertices())
        .any(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > 0.0);
    assert!(moved);
    for t in 0..out.final_mesh.num_triangles() {
        assert!(out.final_mesh.triangle_area(t) > 0.0);
    }
    // the fixed top wall does not move
    for e in out.final_mesh.marked_edges(Marker::WallTop) {
        for &v in &out.final_mesh.edges()[e] {
            assert_eq!(out.final_mesh.vertices()[v], reference.vertices()[v]);
        }
    }
}

#[test]
fn motion_lags_one_step() {
    let with = short(channel_config(6), 1);
    let mut without = with.clone();
    without.mesh_motion = None;
    let a = run_scenario(&with, std::path::Path::new(".")).unwrap();
    let b = run_scenario(&without, std::path::Path::new(".")).unwrap();
    for (x, y) in a.final_state.x.iter().zip(&b.final_state.x) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }
    let a2 = run_scenario(&short(with.clone(), 2), std::path::Path::new(".")).unwrap();
    let b2 = run_scenario(&short(without, 2), std::path::Path::new(".")).unwrap();
    assert_ne!(a2.final_state.x, b2.final_state.x);
}

#[test]
fn zero_data_scenario_stays_zero() {
    let mut cfg = short(channel_config(4), 3);
    for bc in &mut cfg.boundary_conditions {
        match &mut bc.kind {
            BcKind::Dirichlet { value, .. } | BcKind::Traction { value, .. } => *value = [0.0; 2],
            BcKind::Pressure { value, .. } => *value = 0.0,
        }
    }
    let out = run_scenario(&cfg, std::path::Path::new(".")).unwrap();
    assert!(out.final_state.x.iter().all(|&v| v == 0.0));
}

#[test]
fn scenario_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = channel_config(4);
    cfg.time.max_steps = Some(4);
    cfg.outputs = vec![
        OutputRequest {
            kind: OutputKind::VtkFields,
            every: Some(2),
            prefix: "sub/c".into(),
        },
        OutputRequest {
            kind: OutputKind::CsvTimeseries,
            every: None,
            prefix: "ts".into(),
        },
    ];
    let out = run_scenario(&cfg, dir.path()).unwrap();
    for f in ["sub/c_materials.vtk", "sub/c_00002.vtk", "sub/c_00004.vtk", "ts.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert!(!dir.path().join("sub/c_00001.vtk").exists());
    assert_eq!(out.files.len(), 4);
    let ts = porostokes::io::read_csv(dir.path().join("ts.csv")).unwrap();
    assert_eq!(ts.header, TIMESERIES_HEADER);
    assert_eq!(ts.rows.len(), 4);
    let v = porostokes::io::read_vtk_point_data(dir.path().join("sub/c_00004.vtk")).unwrap();
    for name in ["u_f", "p_P", "lambda", "global_displacement"] {
        assert!(v.point_data.contains_key(name), "{name}");
    }
}

#[test]
fn shipped_configs_parse_and_match_presets() {
    let f = load_config(configs_dir().join("fracture.json")).unwrap();
    let mut preset = fracture_config(synthetic_fracture_material(7));
    preset.outputs = f.outputs.clone();
    preset.base_dir = f.base_dir.clone();
    assert_eq!(f, preset);

    let c = load_config(configs_dir().join("channel.json")).unwrap();
    let mut preset = channel_config(16);
    preset.outputs = c.outputs.clone();
    preset.base_dir = c.base_dir.clone();
    assert_eq!(c, preset);

    let s = load_config(configs_dir().join("fracture_spe10.json")).unwrap();
    assert!(matches!(s.materials.porous, PorousMaterial::Spe10 { .. }));
    let b = load_config(configs_dir().join("brain_axial.json")).unwrap();
    assert_eq!(b.time.total_steps().unwrap(), 10);
    for cfg in [&f, &c, &s, &b] {
        let back = ScenarioConfig::from_json(&cfg.to_json(), cfg.base_dir.clone()).unwrap();
        assert_eq!(&back, cfg);
    }
    // unshipped inputs are reported as I/O failures
    assert!(matches!(s.build_mesh().map(|m| build_materials(&s, &Arc::new(m))), Ok(Err(Error::Io { .. }))));
    assert!(matches!(b.build_mesh(), Err(Error::Io { .. })));
}

/// Two-block mesh with the outer Stokes edges relabelled as the brain config
/// expects.
fn brain_like_mesh() -> Mesh2D {
    let m = build_two_block_mesh(Rect::new(0.0, 1.0, 2.0, 2.0), Rect::new(0.0, 0.0, 2.0, 1.0), 6, 3).unwrap();
    let stokes = m.vertex_in(Subdomain::Stokes);
    let porous = m.vertex_in(Subdomain::Porous);
    let edges = m
        .boundary_edges()
        .iter()
        .map(|b| {
            let [a, c] = b.vertices;
            let in_stokes = stokes[a] && stokes[c] && !(porous[a] && porous[c]);
            let marker = match (b.marker, in_stokes) {
                (Marker::WallLeft, true) => Marker::Custom(101),
                (Marker::WallRight, true) => Marker::Custom(102),
                (Marker::WallTop, true) => Marker::Outlet,
                (k, _) => k,
            };
            BoundaryEdge { vertices: b.vertices, marker }
        })
        .collect();
    Mesh2D::new(m.vertices().to_vec(), m.triangles().to_vec(), m.cell_tags().to_vec(), edges).unwrap()
}

#[test]
fn brain_config_runs_on_a_file_mesh() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("meshes")).unwrap();
    brain_like_mesh().save(dir.path().join("meshes/brain_axial.mesh")).unwrap();
    let cfg_path = dir.path().join("brain_axial.json");
    std::fs::copy(configs_dir().join("brain_axial.json"), &cfg_path).unwrap();
    let mut cfg = load_config(&cfg_path).unwrap();
    cfg.time.max_steps = Some(2);
    let out = run_scenario(&cfg, dir.path()).unwrap();
    assert_eq!(out.steps, 2);
    assert!(out.max_interface_ratio <= 1e-8);
    assert!(dir.path().join("out/brain_axial_00002.vtk").is_file());
    let x = &out.final_state.x[out.spaces.range(Unknown::StokesVelocity)];
    assert!(x.iter().any(|v| v.abs() > 0.0));
}

#[test]
fn config_validation_rejects_bad_input() {
    let base = channel_config(4);
    let mesh = base.build_mesh().unwrap();
    base.validate(&mesh).unwrap();

    let mut c = base.clone();
    c.boundary_conditions[0].marker = Marker::Inlet;
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    let mut c = base.clone();
    c.boundary_conditions[0].field = Unknown::PorePressure;
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    let mut c = base.clone();
    c.time.final_time = 2.05;
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    let mut c = base.clone();
    c.outputs = vec![OutputRequest {
        kind: OutputKind::CsvErrors,
        every: None,
        prefix: "e".into(),
    }];
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    let mut c = base.clone();
    c.outputs = vec![OutputRequest {
        kind: OutputKind::VtkFields,
        every: Some(0),
        prefix: "e".into(),
    }];
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    let mut c = base.clone();
    if let Some(m) = c.mesh_motion.as_mut() {
        m.fixed_markers.push(Marker::Custom(500));
    }
    assert!(matches!(c.validate(&mesh), Err(Error::Argument(_))));

    assert!(matches!(
        ScenarioConfig::from_json("{\"name\": 3}", "."),
        Err(Error::Format(_))
    ));
    assert!(matches!(load_config("/nonexistent/x.json"), Err(Error::Io { .. })));
}

fn small_porous_mesh() -> Arc<Mesh2D> {
    Arc::new(build_two_block_mesh(Rect::new(0.0, 1.0, 1.0, 2.0), Rect::new(0.0, 0.0, 1.0, 1.0), 6, 6).unwrap())
}

#[test]
fn uniform_porosity_gives_closed_form_moduli() {
    let mesh = small_porous_mesh();
    let n = SPE10_NX * SPE10_NY;
    let f = fields_from_slab(&mesh, vec![0.2; n], vec![100.0; n], &Spe10Options::new(1, 0.2)).unwrap();
    let e = 1e7 * 0.6f64.powf(2.1);
    let (l, m) = lame_from_youngs(e, 0.2);
    for v in 0..mesh.num_vertices() {
        assert!((f.phi[v] - 0.2).abs() < 1e-12);
        assert!((f.youngs[v] - e).abs() < 1e-9 * e);
        assert!((f.lambda_p[v] - l).abs() < 1e-9 * l);
        assert!((f.mu_p[v] - m).abs() < 1e-9 * m);
        assert!((f.kappa[v] - 100.0 * porostokes::scenarios::MILLIDARCY).abs() < 1e-25);
    }
}

#[test]
fn negative_porosity_is_clamped() {
    let mesh = small_porous_mesh();
    let n = SPE10_NX * SPE10_NY;
    let f = fields_from_slab(&mesh, vec![-0.3; n], vec![1.0; n], &Spe10Options::new(1, 0.2)).unwrap();
    assert!(f.phi.iter().all(|&p| p == PHI_CLAMP));
    assert!(f.youngs.iter().all(|&e| e > 0.0));
    // the floor keeps E positive at very high porosity
    assert!(YoungsLaw::default().eval(0.9) > 0.0);
}

#[test]
fn spe10_files_round_trip_and_reject_bad_layers() {
    let dir = tempfile::tempdir().unwrap();
    let (phi, perm) = synthetic_spe10(3);
    let (pf, kf) = (dir.path().join("phi.dat"), dir.path().join("perm.dat"));
    write_spe10_files(&phi, &perm, &pf, &kf).unwrap();
    let slab = SPE10_NX * SPE10_NY;
    let (p, k) = read_spe10_layer(&pf, &kf, 85).unwrap();
    assert_eq!(p.len(), slab);
    for i in 0..slab {
        assert!((p[i] - phi[84 * slab + i]).abs() <= 1e-6 * phi[84 * slab + i].abs().max(1e-3));
        assert!((k[i] - perm[84 * slab + i]).abs() <= 1e-6 * perm[84 * slab + i]);
    }
    assert!(matches!(read_spe10_layer(&pf, &kf, 86), Err(Error::Argument(_))));
    assert!(matches!(read_spe10_layer(&pf, &kf, 0), Err(Error::Argument(_))));
    std::fs::write(&pf, "0.1 0.2 abc").unwrap();
    assert!(matches!(read_spe10_layer(&pf, &kf, 1), Err(Error::Format(_))));
    std::fs::write(&pf, "0.1 0.2").unwrap();
    assert!(matches!(read_spe10_layer(&pf, &kf, 1), Err(Error::Format(_))));
}

#[test]
fn synthetic_fields_satisfy_material_invariants() {
    let mesh = small_porous_mesh();
    let (phi, perm) = synthetic_spe10(9);
    let slab = SPE10_NX * SPE10_NY;
    let r = 79 * slab..80 * slab;
    let mut opts = Spe10Options::new(80, 0.2);
    opts.phi_range = Some([0.05, 0.35]);
    let f = fields_from_slab(&mesh, phi[r.clone()].to_vec(), perm[r].to_vec(), &opts).unwrap();
    f.check().unwrap();
    let inside = mesh.vertex_in(Subdomain::Porous);
    // the L² projection may overshoot the rescaled range locally; only the
    // clamp is a hard bound
    let vals: Vec<f64> = (0..mesh.num_vertices()).filter(|&v| inside[v]).map(|v| f.phi[v]).collect();
    assert!(vals.iter().all(|&p| (PHI_CLAMP..=1.0 - PHI_CLAMP).contains(&p)));
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    assert!(mean > 0.05 && mean < 0.35, "{mean}");
    assert_eq!(synthetic_spe10(9), (phi, perm));
    // bad Poisson ratio
    let n = slab;
    assert!(fields_from_slab(&mesh, vec![0.2; n], vec![1.0; n], &Spe10Options::new(1, 0.5)).is_err());
    assert!(fields_from_slab(&mesh, vec![0.2; n], vec![0.0; n], &Spe10Options::new(1, 0.2)).is_err());
}

#[test]
fn harmonic_extension_properties() {
    let mesh = small_porous_mesh();
    let imap = mesh.interface();
    let nt = imap.trace_vertices.len();
    let fixed = [Marker::WallTop];

    let zero = harmonic_extension(&mesh, &vec![[0.0; 2]; nt], &fixed).unwrap();
    assert!(zero.iter().all(|d| *d == [0.0; 2]));

    // a constant trace under a fixed top decays linearly: d = c (2 − y)
    let c = [0.05, -0.02];
    let lin = |x: [f64; 2]| [c[0] * (2.0 - x[1]), c[1] * (2.0 - x[1])];
    let d = harmonic_extension(&mesh, &vec![c; nt], &fixed).unwrap();
    let stokes = mesh.vertex_in(Subdomain::Stokes);
    for v in (0..mesh.num_vertices()).filter(|&v| stokes[v]) {
        let e = lin(mesh.vertices()[v]);
        assert!((d[v][0] - e[0]).abs() < 1e-12 && (d[v][1] - e[1]).abs() < 1e-12);
    }

    // maximum principle per component
    let osc: Vec<_> = imap
        .trace_vertices
        .iter()
        .map(|&v| {
            let x = mesh.vertices()[v][0];
            [(6.0 * x).sin() * 0.01, (3.0 * x).cos() * 0.02]
        })
        .collect();
    let d = harmonic_extension(&mesh, &osc, &fixed).unwrap();
    for c in 0..2 {
        let hi = osc.iter().map(|t| t[c]).fold(0.0f64, f64::max);
        let lo = osc.iter().map(|t| t[c]).fold(0.0f64, f64::min);
        assert!(d.iter().all(|v| v[c] <= hi + 1e-12 && v[c] >= lo - 1e-12));
    }
    let porous_only = mesh.vertex_in(Subdomain::Porous);
    for v in (0..mesh.num_vertices()).filter(|&v| porous_only[v] && !stokes[v]) {
        assert_eq!(d[v], [0.0; 2]);
    }
    assert!(matches!(harmonic_extension(&mesh, &osc[1..], &fixed), Err(Error::Argument(_))));
}
