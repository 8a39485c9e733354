//! Secure water-filling over subcarriers.
//!
//! Carrier `m` contributes `log2((1 + P β_B/(Nσ²)) / (1 + P β_E/(Nσ²)))`, which is
//! concave in `P` whenever `β_B > β_E`. The KKT point for a common water level `μ`
//! has a closed form; `μ` itself is found by bisection.

use crate::error::{invalid, Result};

const MU_LO_START: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Effective gains `β_B = |h_Bᴴv|²`, `β_E = |h_Eᴴv|²` on one carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPair {
    pub bob: f64,
    pub eve: f64,
}

impl GainPair {
    pub fn new(bob: f64, eve: f64) -> Self {
        Self { bob, eve }
    }

    pub fn is_active(&self) -> bool {
        self.bob > self.eve
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Water level; infinite when no carrier is active.
    pub mu: f64,
    pub active: Vec<usize>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Indices with `β_B > β_E`, then the rest. Ties are inactive.
pub fn partition_carriers(gains: &[GainPair]) -> (Vec<usize>, Vec<usize>) {
    (0..gains.len()).partition(|&m| gains[m].is_active())
}

/// Optimal power on an active carrier for water level `μ`.
///
/// Writing `a = Nσ²/β_B`, `b = Nσ²/β_E`, the stationarity condition is the
/// quadratic `P² + (a+b)P + ab − (b−a)/μ = 0`; its positive root is used in the
/// cancellation-free form. `β_E = 0` takes the `b → ∞` limit `1/μ − a`.
pub fn power_closed_form(g: GainPair, noise_w: f64, antennas: usize, mu: f64) -> f64 {
    debug_assert!(g.is_active(), "closed form needs β_B > β_E");
    let nsig = antennas as f64 * noise_w;
    let a = nsig / g.bob;
    if mu.is_infinite() {
        return 0.0;
    }
    if g.eve <= 0.0 {
        return (1.0 / mu - a).max(0.0);
    }
    let b = nsig / g.eve;
    if b.is_infinite() {
        return (1.0 / mu - a).max(0.0);
    }
    let num = (b - a) / mu - a * b;
    if num <= 0.0 {
        return 0.0;
    }
    let disc = (b - a) * (b - a) + 4.0 * (b - a) / mu;
    2.0 * num / (disc.sqrt() + a + b)
}

fn total_at(gains: &[GainPair], active: &[usize], noise_w: f64, antennas: usize, mu: f64) -> f64 {
    active.iter().map(|&m| power_closed_form(gains[m], noise_w, antennas, mu)).sum()
}

/// Water-filling over the active carriers with `Σ P_m = P` to `1e-8·P`.
pub fn waterfill_secure(gains: &[GainPair], budget_w: f64, noise_w: f64, antennas: usize) -> Result<PowerAllocation> {
    if !(budget_w > 0.0) || !budget_w.is_finite() {
        return Err(invalid(format!("power budget must be positive, got {budget_w}")));
    }
    if !(noise_w > 0.0) || antennas == 0 {
        return Err(invalid("noise power and antenna count must be positive"));
    }
    if gains.iter().any(|g| !(g.bob >= 0.0 && g.eve >= 0.0)) {
        return Err(invalid("channel gains must be nonnegative"));
    }
    let (active, _) = partition_carriers(gains);
    let mut powers = vec![0.0; gains.len()];
    if active.is_empty() {
        return Ok(PowerAllocation { powers, mu: f64::INFINITY, active });
    }

    let total = |mu| total_at(gains, &active, noise_w, antennas, mu);
    let mut hi = 1.0;
    while total(hi) >= budget_w {
        hi *= 2.0;
    }
    let mut lo = MU_LO_START;
    while total(lo) < budget_w {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(invalid("water level bracket collapsed"));
        }
    }
    // geometric bisection: μ spans many decades
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo * hi).sqrt();
        let t = total(mid);
        if t >= budget_w {
            lo = mid;
        } else {
            hi = mid;
        }
        if (total(hi) - budget_w).abs() <= 1e-8 * budget_w {
            break;
        }
    }
    // hi side never overshoots the budget
    for &m in &active {
        powers[m] = power_closed_form(gains[m], noise_w, antennas, hi);
    }
    Ok(PowerAllocation { powers, mu: hi, active })
}

/// `Σ_m [log2(1 + P_m β_B/(Nσ²)) − log2(1 + P_m β_E/(Nσ²))]⁺`.
pub fn secrecy_objective(gains: &[GainPair], powers: &[f64], noise_w: f64, antennas: usize) -> f64 {
    let nsig = antennas as f64 * noise_w;
    gains
        .iter()
        .zip(powers)
        .map(|(g, &p)| {
            let r = ((p * g.bob / nsig).ln_1p() - (p * g.eve / nsig).ln_1p()) / std::f64::consts::LN_2;
            r.max(0.0)
        })
        .sum()
}
