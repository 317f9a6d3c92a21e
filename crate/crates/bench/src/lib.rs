//! Shared fixtures for the benchmarks.

use raremap_core::{Boundary, MapSpec, NoiseSpec, RandomMap};

pub fn doubling() -> RandomMap {
    RandomMap::new(
        MapSpec::doubling(2).unwrap(),
        NoiseSpec::uniform(0.25, Boundary::Wrap).unwrap(),
    )
    .unwrap()
}

pub fn quadratic() -> RandomMap {
    RandomMap::new(
        MapSpec::quadratic(2.0).unwrap(),
        NoiseSpec::uniform(0.1, Boundary::Reflect).unwrap(),
    )
    .unwrap()
}
