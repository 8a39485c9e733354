//! Runs every method on the desk scenario and prints secrecy rate, SSE and SEE.

use std::time::Instant;

use beamfocus::experiments::{Method, Runner};
use beamfocus::scenario::ScenarioConfig;

fn main() -> beamfocus::Result<()> {
    let mut runner = Runner::new(ScenarioConfig::desk())?;
    println!("{:<14} {:>12} {:>12} {:>12} {:>9}", "method", "R_S", "SSE", "SEE", "time");
    for m in Method::ALL {
        let t = Instant::now();
        let run = runner.run(m)?;
        let r = &run.report;
        println!("{:<14} {:>12.6} {:>12.6} {:>12.3e} {:>9.2?}", m.name(), r.secrecy_rate, r.sse, r.see, t.elapsed());
        let active = r.powers.iter().filter(|&&p| p > 0.0).count();
        println!("{:<14} {active} carriers with power", "");
    }
    Ok(())
}
