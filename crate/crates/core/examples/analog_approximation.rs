//! Fits the TTD/PS front end to the semi-digital beamformers of the desk
//! scenario and prints the approximation error per iteration.

use beamfocus::analogapprox::{approximate, refine_power};
use beamfocus::bala::bala_search;
use beamfocus::scenario::ScenarioConfig;
use beamfocus::semidigital::semi_digital_solve;

fn main() -> beamfocus::Result<()> {
    let cfg = ScenarioConfig::desk();
    let channels = cfg.channels()?;
    let grid = cfg.grid()?;
    let semi = semi_digital_solve(&cfg, &channels)?;
    let bala = bala_search(&cfg, &channels)?;
    println!("semi-digital R_S {:.6}, fitting {} carriers", semi.secrecy_rate, semi.active.len());

    let fit = approximate(
        &semi.beamformer.vectors,
        &semi.active,
        &grid,
        bala.beamformer.delays(),
        cfg.delay_budget_s,
        &cfg.tolerances,
    )?;
    for row in &fit.trace {
        println!("  iter {:2}  η {:.6e}  Δτ {:.3e} ns", row.iteration, row.eta, row.dtau_ns);
    }
    if fit.ao_cap_reached {
        println!("  stopped at the iteration cap");
    }
    let delays: Vec<String> = fit.beamformer.delays().iter().map(|t| format!("{:.4}", t * 1e9)).collect();
    println!("delays (ns) [{}]", delays.join(", "));
    let (_, rate) = refine_power(&cfg, &channels, &fit.beamformer)?;
    println!("analog R_S after power refinement {rate:.6}");
    Ok(())
}
