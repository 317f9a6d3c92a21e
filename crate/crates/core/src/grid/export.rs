//! Portable text export: kernel triplets with a JSON header, and the
//! stationary density as `(cell_midpoint, h)` rows.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::grid::{GridKernel, StationaryDensity};
use crate::noise::RandomMap;

/// JSON header accompanying an exported kernel. The kernel does not depend
/// on any random seed.
#[derive(Debug, Clone, Serialize)]
pub struct KernelHeader {
    pub m: usize,
    pub map: String,
    pub noise: String,
    pub seed_relevant: bool,
    pub nonzero_entries: usize,
    pub csv_columns: [&'static str; 3],
}

impl KernelHeader {
    pub fn new(system: &RandomMap, kernel: &GridKernel) -> Self {
        Self {
            m: kernel.m(),
            map: system.map.to_string(),
            noise: system.noise.to_string(),
            seed_relevant: false,
            nonzero_entries: kernel.matrix().iter().filter(|p| **p > 0.0).count(),
            csv_columns: ["i", "j", "value"],
        }
    }
}

/// Non-zero entries as `i,j,value` rows, row-major.
pub fn write_kernel_csv<W: Write>(kernel: &GridKernel, mut out: W) -> Result<()> {
    writeln!(out, "i,j,value")?;
    for ((i, j), p) in kernel.matrix().indexed_iter() {
        if *p > 0.0 {
            writeln!(out, "{i},{j},{p:e}")?;
        }
    }
    Ok(())
}

pub fn write_stationary_csv<W: Write>(kernel: &GridKernel, density: &StationaryDensity, mut out: W) -> Result<()> {
    writeln!(out, "cell_midpoint,h")?;
    for (i, h) in density.density().iter().enumerate() {
        writeln!(out, "{},{h:e}", kernel.midpoint(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapSpec;
    use crate::grid::{discretize, stationary, DEFAULT_TOL};
    use crate::noise::{Boundary, NoiseSpec};

    #[test]
    fn kernel_triplets_parse_back() {
        let sys = RandomMap::new(
            MapSpec::doubling(2).unwrap(),
            NoiseSpec::uniform(0.25, Boundary::Wrap).unwrap(),
        )
        .unwrap();
        let k = discretize(&sys, 32).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&k, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,value"));
        let mut rebuilt = ndarray::Array2::<f64>::zeros((32, 32));
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            rebuilt[[f[0].parse().unwrap(), f[1].parse().unwrap()]] = f[2].parse().unwrap();
        }
        assert_eq!(&rebuilt, k.matrix());

        let header = KernelHeader::new(&sys, &k);
        let json = serde_json::to_string(&header).unwrap();
        assert!(json.starts_with(r#"{"m":32,"map":"doubling:2","noise":"uniform:epsilon=0.25:boundary=wrap""#));

        let s = stationary(&k, DEFAULT_TOL).unwrap();
        let mut buf = Vec::new();
        write_stationary_csv(&k, &s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 33);
    }
}
