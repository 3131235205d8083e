//! JSON scenario description.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::Unknown;
use crate::error::{Error, Result};
use crate::mesh::{build_embedded_channel_mesh, build_two_block_mesh, load_mesh, Marker, Mesh2D, Rect};

use super::spe10::Spe10Options;

/// Scalar factor multiplying a boundary value in time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `sin²(ω t)`
    SinSquared { omega: f64 },
    /// `sin(ω t)`
    Sine { omega: f64 },
    /// `min(t / t_ramp, 1)`
    Ramp { t_ramp: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::SinSquared { omega } => (omega * t).sin().powi(2),
            TimeProfile::Sine { omega } => (omega * t).sin(),
            TimeProfile::Ramp { t_ramp } => (t / t_ramp).min(1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    /// Two boxes sharing one edge, `nx × ny` cells each.
    TwoBlock { stokes: Rect, porous: Rect, nx: usize, ny: usize },
    /// Grid-aligned Stokes channel inside a porous box.
    EmbeddedChannel { domain: Rect, channel: Rect, nx: usize, ny: usize },
    /// Mesh file, relative to the config file.
    File { path: PathBuf },
}

/// Storage coefficient: bulk modulus `K`, or `c₀` with `K = (1−φ)²/c₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageLaw {
    BulkModulus(f64),
    C0(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PorousMaterial {
    Constant {
        phi: f64,
        kappa: f64,
        lambda_p: f64,
        mu_p: f64,
    },
    /// SPE10-format files, relative to the config file.
    Spe10 {
        phi_file: PathBuf,
        perm_file: PathBuf,
        #[serde(flatten)]
        options: Spe10Options,
    },
    /// In-memory synthetic data with the SPE10 layout.
    Spe10Synthetic {
        seed: u64,
        #[serde(flatten)]
        options: Spe10Options,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialConfig {
    pub mu_f: f64,
    pub rho_f: f64,
    pub rho_p: f64,
    pub alpha_bjs: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub viscosity_scaled_permeability: bool,
    pub storage: StorageLaw,
    pub porous: PorousMaterial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BcKind {
    /// Essential data `value · profile(t)` on the selected components.
    Dirichlet {
        value: [f64; 2],
        #[serde(default)]
        components: Option<Vec<usize>>,
        #[serde(default)]
        profile: TimeProfile,
    },
    /// Natural data `∫ g·v` with `g = value · profile(t)`.
    Traction {
        value: [f64; 2],
        #[serde(default)]
        profile: TimeProfile,
    },
    /// Natural data `g = −value · profile(t) n`.
    Pressure {
        value: f64,
        #[serde(default)]
        profile: TimeProfile,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub marker: Marker,
    pub field: Unknown,
    #[serde(flatten)]
    pub kind: BcKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub tau: f64,
    pub final_time: f64,
    /// Stop after this many steps even if `final_time` is not reached.
    #[serde(default)]
    pub max_steps: Option<usize>,
}

impl TimeConfig {
    /// `N` with `T = N·τ`.
    pub fn total_steps(&self) -> Result<usize> {
        if !(self.tau > 0.0 && self.final_time > 0.0 && self.tau.is_finite() && self.final_time.is_finite()) {
            return Err(Error::Argument(format!(
                "time step {} and final time {} must be positive",
                self.tau, self.final_time
            )));
        }
        let n = (self.final_time / self.tau).round();
        if n < 1.0 || (n * self.tau - self.final_time).abs() > 1e-9 * self.final_time {
            return Err(Error::Argument(format!(
                "final time {} is not a whole number of steps of {}",
                self.final_time, self.tau
            )));
        }
        Ok(n as usize)
    }

    /// Steps actually run.
    pub fn steps(&self) -> Result<usize> {
        let n = self.total_steps()?;
        Ok(self.max_steps.map_or(n, |m| m.min(n)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    /// Stokes boundary where the mesh displacement is zero.
    pub fixed_markers: Vec<Marker>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutputKind {
    VtkFields,
    CsvErrors,
    CsvTimeseries,
}

/// One artifact stream. `every = k` writes every `k` steps and at the end;
/// `None` writes the final state only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRequest {
    pub kind: OutputKind,
    #[serde(default)]
    pub every: Option<usize>,
    pub prefix: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub mesh: MeshSource,
    pub materials: MaterialConfig,
    pub boundary_conditions: Vec<BoundaryCondition>,
    pub time: TimeConfig,
    #[serde(default)]
    pub mesh_motion: Option<MotionConfig>,
    #[serde(default)]
    pub outputs: Vec<OutputRequest>,
    /// Directory that relative input paths refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<ScenarioConfig> {
        let mut c: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("scenario config: {e}")))?;
        c.base_dir = base_dir.into();
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn input_path(&self, p: &Path) -> PathBuf {
        resolve(&self.base_dir, p)
    }

    pub fn build_mesh(&self) -> Result<Mesh2D> {
        match &self.mesh {
            MeshSource::TwoBlock { stokes, porous, nx, ny } => build_two_block_mesh(*stokes, *porous, *nx, *ny),
            MeshSource::EmbeddedChannel { domain, channel, nx, ny } => {
                build_embedded_channel_mesh(*domain, *channel, *nx, *ny)
            }
            MeshSource::File { path } => load_mesh(self.input_path(path)),
        }
    }

    /// Checks everything that does not need the solver: time grid, output
    /// cadences, boundary-condition targets and marker existence.
    pub fn validate(&self, mesh: &Mesh2D) -> Result<()> {
        self.time.steps()?;
        for o in &self.outputs {
            if o.every == Some(0) {
                return Err(Error::Argument("output cadence must be at least 1".into()));
            }
            if o.kind == OutputKind::CsvErrors {
                return Err(Error::Argument(
                    "CSV_ERRORS output is only produced by convergence studies".into(),
                ));
            }
        }
        for bc in &self.boundary_conditions {
            if !mesh.has_marker(bc.marker) || bc.marker == Marker::Interface {
                return Err(Error::Argument(format!("boundary marker {} not found in mesh", bc.marker)));
            }
            let allowed = matches!(
                bc.field,
                Unknown::StokesVelocity | Unknown::RelativeVelocity | Unknown::Displacement
            );
            if !allowed {
                return Err(Error::Argument(format!(
                    "boundary data on {} is not supported; use u_f, u_r or y_s",
                    bc.field.name()
                )));
            }
            if let BcKind::Dirichlet { components: Some(c), .. } = &bc.kind {
                if c.is_empty() || c.iter().any(|&k| k > 1) {
                    return Err(Error::Argument(format!("bad component list {c:?}")));
                }
            }
        }
        if let Some(m) = &self.mesh_motion {
            for mk in &m.fixed_markers {
                if !mesh.has_marker(*mk) {
                    return Err(Error::Argument(format!("motion marker {mk} not found in mesh")));
                }
            }
        }
        Ok(())
    }
}

/// Reads a config file; relative inputs resolve against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    ScenarioConfig::from_json(&text, base)
}

/// Fluid injection into a fracture in an SPE10-type medium: 30×60 grid on
/// `(0, 3.048) × (0, 6.096)` m, a horizontal channel open at `x = 0`, SI
/// units with pressure in kPa, `τ = 30 s` up to 10 h.
pub fn fracture_config(porous: PorousMaterial) -> ScenarioConfig {
    use BcKind::*;
    use Marker::*;
    use Unknown::*;
    let dir = |m, f, v: [f64; 2], c: Option<Vec<usize>>| BoundaryCondition {
        marker: m,
        field: f,
        kind: Dirichlet {
            value: v,
            components: c,
            profile: TimeProfile::Constant,
        },
    };
    let mut bcs = vec![dir(Inlet, StokesVelocity, [10.0, 0.0], None)];
    for (m, c) in [(WallBottom, 1), (WallTop, 1), (WallRight, 0)] {
        bcs.push(dir(m, RelativeVelocity, [0.0; 2], Some(vec![c])));
        bcs.push(dir(m, Displacement, [0.0; 2], Some(vec![c])));
    }
    ScenarioConfig {
        name: "fracture".into(),
        mesh: MeshSource::EmbeddedChannel {
            domain: Rect::new(0.0, 0.0, 3.048, 6.096),
            channel: Rect::new(0.0, 2.9464, 1.524, 3.1496),
            nx: 30,
            ny: 60,
        },
        materials: MaterialConfig {
            mu_f: 1e-6,
            rho_f: 1000.0,
            rho_p: 1016.0,
            alpha_bjs: 1.0,
            theta: 0.0,
            viscosity_scaled_permeability: true,
            storage: StorageLaw::C0(6.89e-2),
            porous,
        },
        boundary_conditions: bcs,
        time: TimeConfig {
            tau: 30.0,
            final_time: 36000.0,
            max_steps: None,
        },
        mesh_motion: None,
        outputs: Vec::new(),
        base_dir: PathBuf::new(),
    }
}

/// Layer-80 synthetic material for [`fracture_config`].
pub fn synthetic_fracture_material(seed: u64) -> PorousMaterial {
    let mut options = Spe10Options::new(80, 0.2);
    options.phi_range = Some([0.05, 0.35]);
    PorousMaterial::Spe10Synthetic { seed, options }
}

/// Pressure-driven filtration into a deformable medium:
/// `Ω_S = (−1,1)×(0,2)` over `Ω_P = (−1,1)×(−2,0)`, `p_in = 2 sin²(πt)` at
/// the top, free outflow at the bottom, harmonic mesh motion, `τ = 0.1`,
/// `T = 2`.
pub fn channel_config(n: usize) -> ScenarioConfig {
    use BcKind::*;
    use Marker::*;
    use Unknown::*;
    let zero = |m, f, c: Option<Vec<usize>>| BoundaryCondition {
        marker: m,
        field: f,
        kind: Dirichlet {
            value: [0.0; 2],
            components: c,
            profile: TimeProfile::Constant,
        },
    };
    let bcs = vec![
        BoundaryCondition {
            marker: WallTop,
            field: StokesVelocity,
            kind: Pressure {
                value: 2.0,
                profile: TimeProfile::SinSquared { omega: PI },
            },
        },
        zero(WallLeft, StokesVelocity, None),
        zero(WallRight, StokesVelocity, None),
        zero(WallLeft, RelativeVelocity, Some(vec![0])),
        zero(WallRight, RelativeVelocity, Some(vec![0])),
        zero(WallLeft, Displacement, Some(vec![0])),
        zero(WallRight, Displacement, Some(vec![0])),
        zero(WallBottom, Displacement, Some(vec![1])),
    ];
    ScenarioConfig {
        name: "channel".into(),
        mesh: MeshSource::TwoBlock {
            stokes: Rect::new(-1.0, 0.0, 1.0, 2.0),
            porous: Rect::new(-1.0, -2.0, 1.0, 0.0),
            nx: n,
            ny: n,
        },
        materials: MaterialConfig {
            mu_f: 0.8,
            rho_f: 1.0,
            rho_p: 1.07,
            alpha_bjs: 0.1,
            theta: 0.0,
            viscosity_scaled_permeability: false,
            storage: StorageLaw::C0(0.02),
            porous: PorousMaterial::Constant {
                phi: 0.3,
                kappa: 0.005,
                lambda_p: 10.0,
                mu_p: 5.0,
            },
        },
        boundary_conditions: bcs,
        time: TimeConfig {
            tau: 0.1,
            final_time: 2.0,
            max_steps: None,
        },
        mesh_motion: Some(MotionConfig {
            fixed_markers: vec![WallTop],
        }),
        outputs: Vec::new(),
        base_dir: PathBuf::new(),
    }
}
