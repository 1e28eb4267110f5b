//! Run configuration, scenario presets, sweeps and the command-line front end.

mod cli;
mod config;
mod run;

pub use cli::{run_cli, Cli, Command, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VERDICT};
pub use config::{
    load_config, InitialConfig, KernelChoice, LoadingConfig, MeshConfig, ModelConfig, OutputConfig,
    RegularizationConfig, RunConfig, Scenario, SolverConfig, SolverMode, TimeConfig,
};
pub use run::{
    compare_modes, run_member, run_scenario, run_sweep, with_workers, write_json, CompareReport, MemberRun,
    MemberSetup, MemberSummary, RunReport, WORKERS_ENV,
};
