//! One PASS/FAIL line per acceptance criterion. Lines go straight to the
//! process stdout so they show even when the harness captures output.

use std::io::Write;
use std::panic::{catch_unwind, UnwindSafe};
use std::path::Path;
use std::sync::Arc;

use porostokes::assembly::{assemble_system, DirichletData, Spaces, Unknown};
use porostokes::mesh::{build_two_block_mesh, Marker, Rect, Subdomain};
use porostokes::mms::{
    mms_mesh, spatial_convergence_study, temporal_convergence_study, ManufacturedCase, MmsParameters, REPORT_ORDER,
};
use porostokes::scenarios::{
    build_materials, channel_config, fracture_config, harmonic_extension, run_scenario, synthetic_fracture_material,
    PorousMaterial,
};
use porostokes::system::{discrete_energy, Stepper, TransientState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "mms_fidelity.rs"]
mod mms_fidelity;

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

struct Ledger {
    failed: Vec<usize>,
    /// Largest interface ratio seen in any transient run.
    interface: f64,
}

impl Ledger {
    fn record(&mut self, id: usize, ok: bool, summary: &str) {
        say(&format!("criterion {id}: {} {summary}", if ok { "PASS" } else { "FAIL" }));
        if !ok {
            self.failed.push(id);
        }
    }
}

fn passes(f: impl FnOnce() + UnwindSafe) -> Result<(), String> {
    catch_unwind(f).map_err(|e| {
        e.downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())
    })
}

fn in_range(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo && v <= hi
}

/// Final-pair spatial rates on four levels, `τ = h²`, `T = 1`.
fn spatial(l: &mut Ledger) {
    let r = spatial_convergence_study(&ManufacturedCase::default(), 4).unwrap();
    for row in &r.rows {
        l.interface = l.interface.max(row.max_interface_ratio);
    }
    say(&r.render());
    let rates = r.final_rates().unwrap();
    let rate = |u: Unknown| rates[REPORT_ORDER.iter().position(|&v| v == u).unwrap()];
    use Unknown::*;
    let checks = [
        (StokesVelocity, 1.8, 2.2),
        (Displacement, 1.8, 2.1),
        (PorePressure, 1.8, 2.2),
        (SolidVelocity, 1.8, 2.2),
        (RelativeVelocity, 2.0, f64::INFINITY),
        (StokesPressure, 2.0, f64::INFINITY),
        (Multiplier, 1.8, f64::INFINITY),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (u, lo, hi) in checks {
        let v = rate(u);
        let good = in_range(v, lo, hi);
        ok &= good;
        parts.push(format!("{} {v:.3}{}", u.name(), if good { "" } else { "(out)" }));
    }
    l.record(1, ok, &format!("spatial final rates: {}", parts.join(", ")));
}

/// Cumulative errors for τ = 0.5·2^{−k}, k = 0..5 on the h = 0.0699 mesh.
const TABLE2_TAU: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

fn table2(u: Unknown) -> [f64; 6] {
    use Unknown::*;
    match u {
        StokesVelocity => [0.0293, 0.0146, 0.0073, 0.0036, 0.0018, 0.0009],
        StokesPressure => [0.5374, 0.2688, 0.1345, 0.0673, 0.0337, 0.0169],
        RelativeVelocity => [0.0514, 0.0231, 0.0109, 0.0053, 0.0027, 0.0014],
        PorePressure => [0.1013, 0.0504, 0.0251, 0.0126, 0.0063, 0.0031],
        Displacement => [1.3238, 0.5736, 0.2645, 0.1266, 0.0619, 0.0306],
        SolidVelocity => [0.1458, 0.0729, 0.0365, 0.0182, 0.0091, 0.0046],
        Multiplier => [0.1505, 0.0749, 0.0374, 0.0187, 0.0093, 0.0047],
    }
}

fn temporal(l: &mut Ledger) {
    let r = temporal_convergence_study(&ManufacturedCase::default(), 2, 0.5, 5).unwrap();
    for row in &r.rows {
        l.interface = l.interface.max(row.max_interface_ratio);
    }
    say(&r.render());
    let rates = r.final_rates().unwrap();
    use Unknown::*;
    let mut ok = true;
    let mut parts = Vec::new();
    for u in [SolidVelocity, PorePressure, Multiplier, StokesVelocity, StokesPressure] {
        let k = REPORT_ORDER.iter().position(|&v| v == u).unwrap();
        let good = in_range(rates[k], 0.9, 1.1);
        ok &= good;
        parts.push(format!("{} {:.3}{}", u.name(), rates[k], if good { "" } else { "(out)" }));
    }
    let mut misses = Vec::new();
    for u in REPORT_ORDER {
        for (i, &reference) in table2(u).iter().enumerate() {
            let got = r.error(i, u);
            if !in_range(got, 0.5 * reference, 1.5 * reference) {
                misses.push(format!("{}@{}: {got:.4} vs {reference}", u.name(), TABLE2_TAU[i]));
            }
        }
    }
    ok &= misses.is_empty();
    // informational: the table's p_P and y_s columns appear interchanged
    let swapped = table2(Displacement)
        .iter()
        .enumerate()
        .map(|(i, &v)| (r.error(i, PorePressure) / v - 1.0).abs())
        .fold(0.0f64, f64::max);
    say(&format!(
        "note: p_P against the table's y_s column deviates by at most {:.1}%; λ/table ratio {:.3} at τ = 0.5 and {:.3} at τ = 0.015625",
        100.0 * swapped,
        r.error(0, Multiplier) / table2(Multiplier)[0],
        r.error(5, Multiplier) / table2(Multiplier)[5]
    ));
    let magnitude = if misses.is_empty() {
        "all within ±50%".to_string()
    } else {
        format!("{} of 42 outside ±50% [{}]", misses.len(), misses.join("; "))
    };
    l.record(2, ok, &format!("temporal finest-pair rates: {}; magnitudes: {magnitude}", parts.join(", ")));
}

fn energy(l: &mut Ledger) {
    let case = ManufacturedCase::new(MmsParameters {
        theta: 0.0,
        ..MmsParameters::default()
    });
    let spaces = Spaces::taylor_hood(Arc::new(mms_mesh(1).unwrap())).unwrap();
    let walls = [Marker::WallLeft, Marker::WallRight, Marker::WallBottom, Marker::WallTop];
    let sets: Vec<_> = [Unknown::StokesVelocity, Unknown::RelativeVelocity, Unknown::Displacement]
        .into_iter()
        .map(|u| (u, spaces.get(u).dirichlet_bcs(&walls, None, &|_, _| [0.0; 2], 0.0).unwrap()))
        .collect();
    let bc = DirichletData::from_sets(&spaces, &sets).unwrap();
    let stepper = Stepper::new(assemble_system(&spaces, &case.materials()).unwrap(), 0.05, &bc.dofs()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut x: Vec<f64> = (0..spaces.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for d in bc.dofs() {
        x[d] = 0.0;
    }
    let mut state = TransientState { t: 0.0, x, step: 0 };
    let e0 = discrete_energy(&stepper.system, &state.x);
    let zero = vec![0.0; spaces.dim()];
    let (mut prev, mut worst) = (e0, f64::NEG_INFINITY);
    for _ in 0..50 {
        let (next, diag) = stepper.step(&state, &zero, &bc).unwrap();
        l.interface = l.interface.max(diag.interface_residual / diag.norm_x.max(f64::MIN_POSITIVE));
        let e = discrete_energy(&stepper.system, &next.x);
        worst = worst.max((e - prev) / e0);
        prev = e;
        state = next;
    }
    l.record(
        3,
        worst <= 1e-10,
        &format!("energy E0 {e0:.4e} -> E50 {prev:.4e}, largest relative increase {worst:.3e} (limit 1e-10)"),
    );
}

fn oracles(l: &mut Ledger) {
    let r = passes(|| {
        element_oracles::p1_stiffness_on_reference_triangle();
        element_oracles::p1_mass_on_reference_triangle();
        element_oracles::p2_mass_on_reference_triangle();
        element_oracles::weighted_blocks_on_reference_triangle();
        element_oracles::elasticity_energies_by_hand();
    });
    l.record(
        5,
        r.is_ok(),
        &format!("element matrices vs symbolic integration at 1e-12: {}", r.err().unwrap_or("all match".into())),
    );
}

fn fidelity(l: &mut Ledger) {
    let r = passes(|| {
        mms_fidelity::field_derivatives_match_finite_differences();
        mms_fidelity::solid_velocity_is_time_derivative_of_displacement();
    });
    l.record(
        6,
        r.is_ok(),
        &format!(
            "manufactured derivatives vs finite differences at 100 points, u_s = ∂t y_s: {}",
            r.err().unwrap_or("all match".into())
        ),
    );
}

fn scenarios(l: &mut Ledger) {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut fracture = fracture_config(synthetic_fracture_material(7));
    fracture.time.max_steps = Some(20);
    fracture.outputs.clear();
    match run_scenario(&fracture, Path::new(".")) {
        Ok(o) => {
            l.interface = l.interface.max(o.max_interface_ratio);
            let finite = o.final_state.x.iter().all(|v| v.is_finite());
            ok &= finite && o.steps == 20;
            notes.push(format!("fracture {} steps finite={finite}", o.steps));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("fracture failed: {e}"));
        }
    }

    let mut channel = channel_config(16);
    channel.outputs.clear();
    match run_scenario(&channel, Path::new(".")) {
        Ok(o) => {
            l.interface = l.interface.max(o.max_interface_ratio);
            let finite = o.final_state.x.iter().all(|v| v.is_finite());
            let positive = (0..o.final_mesh.num_triangles()).all(|t| o.final_mesh.triangle_area(t) > 0.0);
            ok &= finite && positive && o.steps == 20;
            notes.push(format!("channel {} steps with motion finite={finite} untangled={positive}", o.steps));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("channel failed: {e}"));
        }
    }

    // synthetic SPE10-layout ingestion through the config path
    let mesh = Arc::new(fracture.build_mesh().unwrap());
    let synthetic = matches!(fracture.materials.porous, PorousMaterial::Spe10Synthetic { .. });
    let ingest = build_materials(&fracture, &mesh).map(|m| m.validate(&mesh));
    let ingested = synthetic && matches!(ingest, Ok(Ok(())));
    ok &= ingested;
    notes.push(format!("synthetic ingestion invariants hold={ingested}"));

    // harmonic extension: exact boundary data, linear reproduction, max principle
    let m = Arc::new(build_two_block_mesh(Rect::new(0.0, 1.0, 1.0, 2.0), Rect::new(0.0, 0.0, 1.0, 1.0), 8, 8).unwrap());
    let trace_v = m.interface().trace_vertices;
    let trace: Vec<[f64; 2]> = trace_v
        .iter()
        .map(|&v| {
            let x = m.vertices()[v][0];
            [0.02 * (5.0 * x).sin(), 0.01 * (2.0 * x).cos()]
        })
        .collect();
    let ext = harmonic_extension(&m, &trace, &[Marker::WallTop]).unwrap();
    let mut exact = trace_v.iter().zip(&trace).all(|(&v, t)| ext[v] == *t);
    for e in m.marked_edges(Marker::WallTop) {
        exact &= m.edges()[e].iter().all(|&v| ext[v] == [0.0; 2]);
    }
    let c = [0.03, -0.01];
    let lin = harmonic_extension(&m, &vec![c; trace_v.len()], &[Marker::WallTop]).unwrap();
    let stokes = m.vertex_in(Subdomain::Stokes);
    let lin_err = (0..m.num_vertices())
        .filter(|&v| stokes[v])
        .map(|v| {
            let y = m.vertices()[v][1];
            ((lin[v][0] - c[0] * (2.0 - y)).abs()).max((lin[v][1] - c[1] * (2.0 - y)).abs())
        })
        .fold(0.0f64, f64::max);
    let mut maxp = true;
    for k in 0..2 {
        let hi = trace.iter().map(|t| t[k]).fold(0.0f64, f64::max);
        let lo = trace.iter().map(|t| t[k]).fold(0.0f64, f64::min);
        maxp &= ext.iter().all(|d| d[k] <= hi + 1e-14 && d[k] >= lo - 1e-14);
    }
    let ext_ok = exact && lin_err < 1e-12 && maxp;
    ok &= ext_ok;
    notes.push(format!(
        "extension boundary exact={exact} linear error {lin_err:.1e} max principle={maxp}"
    ));

    l.record(7, ok, &notes.join("; "));
}

#[test]
fn acceptance_criteria() {
    let mut l = Ledger {
        failed: Vec::new(),
        interface: 0.0,
    };
    oracles(&mut l);
    fidelity(&mut l);
    energy(&mut l);
    scenarios(&mut l);
    spatial(&mut l);
    temporal(&mut l);
    l.record(
        4,
        l.interface <= 1e-8,
        &format!(
            "largest interface mass residual over all transient runs {:.3e} x ‖X‖ (limit 1e-8)",
            l.interface
        ),
    );
    assert!(l.failed.is_empty(), "failed criteria: {:?}", l.failed);
}
