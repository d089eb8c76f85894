//! Velocities of 82 galaxies in the Corona Borealis region, in units of
//! 10³ km/s.

use crate::data::Dataset;

/// The bundled file, one `velocity` column with a header row.
pub const GALAXY_CSV: &str = include_str!("../../data/galaxy.csv");

/// SHA-256 of [`GALAXY_CSV`].
pub const GALAXY_SHA256: &str = "6cba1b899ca48dbb9643df31a00638d58512ce19151b94ff1be70a69cf576f7f";

pub const GALAXY_UNITS: &str = "1000 km/s";

pub fn galaxy_velocities() -> Vec<f64> {
    GALAXY_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().expect("bundled data is numeric"))
        .collect()
}

pub fn galaxy() -> Dataset {
    Dataset::from_column(&galaxy_velocities()).expect("bundled data is finite")
}
