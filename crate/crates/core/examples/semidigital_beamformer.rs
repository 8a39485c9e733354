//! Optimizes per-carrier unit-modulus beamformers and secure power for the
//! 16-antenna desk scenario, then compares against the fully-digital bound.

use std::time::Instant;

use beamfocus::scenario::ScenarioConfig;
use beamfocus::semidigital::{fully_digital_solve, semi_digital_solve};

fn main() -> beamfocus::Result<()> {
    let cfg = ScenarioConfig::desk();
    let channels = cfg.channels()?;

    let t = Instant::now();
    let semi = semi_digital_solve(&cfg, &channels)?;
    println!("semi-digital: R_S = {:.6} bit/s/Hz in {:.1?}", semi.secrecy_rate, t.elapsed());
    for row in &semi.trace {
        println!(
            "  iter {:2}  R_S {:.9}  dlambda {:.2e}  dV {:.2e}",
            row.iteration, row.secrecy_rate, row.max_dlambda, row.max_dv
        );
    }
    println!("  active carriers {:?}", semi.active);
    println!("  powers {:?}", semi.powers.iter().map(|p| format!("{p:.2e}")).collect::<Vec<_>>());
    println!("  eigenvalue ratios {:?}", semi.eig_ratios.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());
    for m in &semi.diagnostics.messages {
        println!("  note: {m}");
    }

    let t = Instant::now();
    let fd = fully_digital_solve(&cfg, &channels)?;
    println!("fully-digital: R_S = {:.6} bit/s/Hz in {:.1?}", fd.secrecy_rate, t.elapsed());
    Ok(())
}
