//! Builds the default 64-antenna scenario and prints the near-field channel
//! gains of Bob and Eve on every carrier, plus the beam split of a TTD-free
//! beamformer matched to the lowest carrier.

use beamfocus::beamforming::{array_gain, AnalogBeamformer};
use beamfocus::experiments::matched_to_first_carrier;
use beamfocus::scenario::ScenarioConfig;

fn main() -> beamfocus::Result<()> {
    let cfg = ScenarioConfig::standard();
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let channels = cfg.channels()?;
    let dr = geometry.rayleigh_distance(cfg.carrier_hz);
    println!("aperture {:.4} m, Rayleigh distance {:.2} m", geometry.aperture(), dr);
    println!(
        "Bob at {:.3} m / {:.1}°, Eve at {:.3} m / {:.1}°",
        cfg.bob.range,
        cfg.bob.angle_deg(),
        cfg.eve.range,
        cfg.eve.angle_deg()
    );
    println!("noise per carrier {:.3e} W", cfg.noise_power_per_carrier());

    let matched = AnalogBeamformer::ttd_free(matched_to_first_carrier(&channels), cfg.ttds)?;
    println!("{:>8} {:>12} {:>12} {:>14}", "f (GHz)", "‖h_B‖²", "‖h_E‖²", "TTD-free gain");
    for (m, &f) in grid.carriers().iter().enumerate() {
        let u = matched.synthesize(f);
        let coherent = channels.bob[m].iter().map(|h| h.norm()).sum::<f64>().powi(2);
        let gain = array_gain(&channels.bob[m], &u)? / coherent;
        println!(
            "{:>8.3} {:>12.4e} {:>12.4e} {:>14.4}",
            f / 1e9,
            channels.bob[m].norm_squared(),
            channels.eve[m].norm_squared(),
            gain
        );
    }
    Ok(())
}
