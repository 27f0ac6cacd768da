//! Shared fixtures for the benchmarks.

use heom_core::{BathParams, CouplingMode, FieldParams, HeomGenerator, SimConfig};

/// Composite field + bath configuration with five channels.
pub fn composite(depth: usize, mode: CouplingMode) -> SimConfig {
    SimConfig::default()
        .with_field(FieldParams::uniform(0.4, 0.8))
        .with_bath(BathParams::new(0.4, 1.6, 0.1, mode))
        .with_depth(depth)
}

/// Bath-only configuration with two channels.
pub fn bath_only(depth: usize, mode: CouplingMode) -> SimConfig {
    SimConfig::default().with_bath(BathParams::new(0.2, 0.4, 0.32, mode)).with_depth(depth)
}

pub fn generator(sim: &SimConfig) -> HeomGenerator {
    HeomGenerator::build(sim).expect("benchmark configs are valid")
}
