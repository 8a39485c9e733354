//! Compares where a TTD-free beam and a BALA beam put their energy across the
//! band, then exports the BALA pattern to `beampattern.csv`.
//!
//! Path loss makes the closest raster cells the brightest, so the comparison
//! scans angles on an arc at Bob's range instead.

use std::fs::File;
use std::io::BufWriter;

use beamfocus::beamforming::{beampattern, write_beampattern_csv, PolarRaster};
use beamfocus::experiments::{Method, Runner};
use beamfocus::scenario::{PolarPosition, ScenarioConfig};

fn main() -> beamfocus::Result<()> {
    let cfg = ScenarioConfig::desk();
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let dr = geometry.rayleigh_distance(cfg.carrier_hz);
    let arc = (0..=500)
        .map(|k| PolarPosition::from_degrees(cfg.bob.range, 40.0 + 0.1 * k as f64))
        .collect::<beamfocus::Result<Vec<_>>>()?;
    let mut runner = Runner::new(cfg.clone())?;

    for method in [Method::BaselineB, Method::AtpBala] {
        let run = runner.run(method)?;
        let pattern = beampattern(&geometry, &arc, grid.carriers(), &run.beams)?;
        println!("{method}: brightest angle at Bob's range ({:.1}°)", cfg.bob.angle_deg());
        for (f, layer) in pattern.freqs.iter().zip(&pattern.per_freq) {
            let (cell, _) = layer.iter().enumerate().fold((0, f64::MIN), |b, (i, &g)| if g > b.1 { (i, g) } else { b });
            println!("  {:>7.3} GHz  θ {:.1}°", f / 1e9, arc[cell].angle_deg());
        }
        if method == Method::AtpBala {
            let raster = PolarRaster::new(dr, (0.001, 0.05), (40.0, 90.0), (80, 80))?;
            let pattern = beampattern(&geometry, &raster.positions()?, grid.carriers(), &run.beams)?;
            let mut f = BufWriter::new(
                File::create("beampattern.csv")
                    .map_err(|source| beamfocus::Error::Io { path: "beampattern.csv".into(), source })?,
            );
            write_beampattern_csv(&mut f, &raster, &pattern).expect("write pattern");
            println!("wrote beampattern.csv");
        }
    }
    Ok(())
}
