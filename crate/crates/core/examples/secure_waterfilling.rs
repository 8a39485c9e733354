//! Secure water-filling over a handful of carriers. Carriers where Eve's gain
//! is at least Bob's get no power; the rest share the budget.

use beamfocus::powalloc::{partition_carriers, secrecy_objective, waterfill_secure, GainPair};

fn main() -> beamfocus::Result<()> {
    let gains = [
        GainPair::new(4.0, 1.0),
        GainPair::new(2.0, 2.5),
        GainPair::new(9.0, 0.5),
        GainPair::new(1.5, 0.0),
        GainPair::new(0.8, 0.7),
    ];
    let (noise, antennas) = (0.1, 4);
    let (active, idle) = partition_carriers(&gains);
    println!("active {active:?}, idle {idle:?}");
    for budget in [0.1, 1.0, 10.0, 100.0] {
        let alloc = waterfill_secure(&gains, budget, noise, antennas)?;
        let rate = secrecy_objective(&gains, &alloc.powers, noise, antennas);
        let powers: Vec<String> = alloc.powers.iter().map(|p| format!("{p:.4}")).collect();
        println!("P = {budget:>6}: powers [{}]  μ = {:.4e}  R_S = {rate:.4}", powers.join(", "), alloc.mu);
    }
    Ok(())
}
