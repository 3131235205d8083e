use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use porostokes::io::write_csv;
use porostokes::mms::{spatial_convergence_study, temporal_convergence_study, ErrorReport, ManufacturedCase};
use porostokes::scenarios::{
    channel_config, fracture_config, load_config, run_scenario, synthetic_fracture_material, OutputKind,
    OutputRequest, ScenarioConfig,
};

/// Stokes flow coupled to a deformable porous medium.
#[derive(Parser, Debug)]
#[command(name = "porostokes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Manufactured-solution study under mesh refinement with τ = h².
    ConvergenceSpace {
        #[arg(long)]
        levels: usize,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Manufactured-solution study halving τ on a fixed mesh.
    ConvergenceTime {
        #[arg(long)]
        tau0: f64,
        #[arg(long)]
        halvings: usize,
        #[arg(long)]
        mesh_level: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Injection into a fracture in a heterogeneous medium; built-in setup
    /// without --config.
    Fracture(ScenarioArgs),
    /// Pressure-driven filtration with mesh motion; built-in setup without
    /// --config.
    Channel(ScenarioArgs),
    /// Any scenario described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct ScenarioArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stop after this many steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn emit_report(report: &ErrorReport, output: Option<&Path>) -> porostokes::Result<()> {
    let table = report.to_table();
    match output {
        Some(p) => write_csv(&table, p),
        None => {
            print!("{}", table.to_csv_string());
            Ok(())
        }
    }
}

fn default_outputs(cfg: &mut ScenarioConfig) {
    let every = Some((cfg.time.steps().unwrap_or(1) / 10).max(1));
    cfg.outputs = vec![
        OutputRequest {
            kind: OutputKind::VtkFields,
            every,
            prefix: PathBuf::from(&cfg.name),
        },
        OutputRequest {
            kind: OutputKind::CsvTimeseries,
            every: None,
            prefix: PathBuf::from(format!("{}_timeseries", cfg.name)),
        },
    ];
}

fn scenario(mut cfg: ScenarioConfig, steps: Option<usize>, out_dir: &Path) -> porostokes::Result<()> {
    if let Some(n) = steps {
        cfg.time.max_steps = Some(n);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| porostokes::Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let out = run_scenario(&cfg, out_dir)?;
    println!(
        "{}: {} steps to t = {}, max interface ratio {:.3e}, max kinematic residual {:.3e}",
        out.name, out.steps, out.final_state.t, out.max_interface_ratio, out.max_kinematic_residual
    );
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn preset_or(
    config: Option<&Path>,
    steps: Option<usize>,
    preset: impl FnOnce() -> ScenarioConfig,
) -> porostokes::Result<ScenarioConfig> {
    match config {
        Some(p) => load_config(p),
        None => {
            let mut c = preset();
            if steps.is_some() {
                c.time.max_steps = steps;
            }
            default_outputs(&mut c);
            Ok(c)
        }
    }
}

fn execute(cmd: Command) -> porostokes::Result<()> {
    let case = ManufacturedCase::default();
    match cmd {
        Command::ConvergenceSpace { levels, output } => {
            let r = spatial_convergence_study(&case, levels)?;
            emit_report(&r, output.as_deref())
        }
        Command::ConvergenceTime {
            tau0,
            halvings,
            mesh_level,
            output,
        } => {
            let r = temporal_convergence_study(&case, mesh_level, tau0, halvings)?;
            emit_report(&r, output.as_deref())
        }
        Command::Fracture(a) => {
            let cfg = preset_or(a.config.as_deref(), a.steps, || fracture_config(synthetic_fracture_material(7)))?;
            scenario(cfg, a.steps, &a.out_dir)
        }
        Command::Channel(a) => {
            let cfg = preset_or(a.config.as_deref(), a.steps, || channel_config(16))?;
            scenario(cfg, a.steps, &a.out_dir)
        }
        Command::Run { config, steps, out_dir } => scenario(load_config(&config)?, steps, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
