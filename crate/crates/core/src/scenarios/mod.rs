//! Configured simulations: JSON scenarios, SPE10 material data, harmonic mesh
//! motion and the two preset problems.

mod config;
mod extension;
mod run;
mod spe10;

pub use config::{
    channel_config, fracture_config, load_config, synthetic_fracture_material, BcKind, BoundaryCondition,
    MaterialConfig, MeshSource, MotionConfig, OutputKind, OutputRequest, PorousMaterial, ScenarioConfig,
    StorageLaw, TimeConfig, TimeProfile,
};
pub use extension::harmonic_extension;
pub use run::{
    build_materials, dirichlet_data, run_scenario, scenario_load, ScenarioOutcome, TIMESERIES_HEADER,
};
pub use spe10::{
    fields_from_slab, lame_from_youngs, load_spe10_layer, read_spe10_layer, synthetic_spe10, write_spe10_files,
    HeterogeneousFields, Spe10Options, YoungsLaw, MILLIDARCY, PHI_CLAMP, SPE10_NX, SPE10_NY, SPE10_NZ,
};
