//! Simulation scenarios, replicated grid runs, and report output.

mod galaxy;
mod grid;
mod plot;
mod reference;
mod scenario;
mod tables;

pub use galaxy::{galaxy, galaxy_velocities, GALAXY_CSV, GALAXY_SHA256, GALAXY_UNITS};
pub use grid::{
    chain_seed, data_seed, default_priors, run_grid, run_replicate, AggregateSummary, CellSummary,
    GridConfig, ModelKind, ReplicateFailure, ReplicateRecord,
};
pub use plot::{posterior_svg, PmfSeries};
pub use reference::{reference_table, ReferenceCell, ReferenceTable, GALAXY_INTERVALS, GALAXY_REFERENCE};
pub use scenario::{generate_scenario, MixtureTerm, ScenarioSpec, BUILTIN_IDS};
pub use tables::{
    galaxy_comparison, galaxy_table, scenario_comparison, scenario_table, summary_from_csv,
    summary_to_csv, write_results, EMPTY_CELL,
};
