//! Fitting the TTD/PS front end to per-carrier target beamformers.
//!
//! Minimizes `η = Σ_{m∈𝓜⁺} ‖v_m − diag(w)t_m‖²` by alternating the exact
//! phase-shifter update with BSUM sweeps over the delays. Each delay's
//! objective is a weighted sum of cosines; BSUM replaces every cosine with a
//! tangent quadratic upper bound and minimizes the sum in closed form.

use std::f64::consts::PI;
use std::io::Write;

use crate::beamforming::{ttd_response, AnalogBeamformer};
use crate::error::{invalid, Result};
use crate::powalloc::PowerAllocation;
use crate::scenario::{ChannelSet, FrequencyGrid, ScenarioConfig, Tolerances};
use crate::semidigital::{secrecy_rate_of, waterfill_for};
use crate::{fmt_sig, CMatrix, CVector, C64};

pub const MAX_BSUM_SWEEPS: usize = 100;
pub const MAX_AO_ITERATIONS: usize = 50;

/// Offsets of `u = 2fτ − ζ/π` from an integer below this count as stationary points.
const STATIONARY_TOL: f64 = 1e-12;

/// `γ(τ) = cos(2πfτ − ζ)`.
pub fn gamma(tau: f64, f: f64, zeta: f64) -> f64 {
    (2.0 * PI * f * tau - zeta).cos()
}

pub fn gamma_prime(tau: f64, f: f64, zeta: f64) -> f64 {
    -2.0 * PI * f * (2.0 * PI * f * tau - zeta).sin()
}

/// Quadratic upper bound `g(τ) = a(τ − b)² + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SurrogateCoeffs {
    pub fn eval(&self, tau: f64) -> f64 {
        self.a * (tau - self.b).powi(2) + self.c
    }

    pub fn deriv(&self, tau: f64) -> f64 {
        2.0 * self.a * (tau - self.b)
    }
}

/// Tangent majorizer of `γ` at `τ_prev`.
///
/// Away from stationary points the quadratic is centred on the adjacent
/// valley of the cosine (left of `τ_prev` on a rising slope, right of it on a
/// falling one). At a peak it is the constant 1; at a valley it matches the
/// curvature.
pub fn surrogate_coeffs(tau_prev: f64, f: f64, zeta: f64) -> SurrogateCoeffs {
    let u = 2.0 * f * tau_prev - zeta / PI;
    let k = u.round();
    let r = u - k;
    let odd = k.rem_euclid(2.0) == 1.0;
    if r.abs() <= STATIONARY_TOL {
        return if odd {
            SurrogateCoeffs { a: 2.0 * PI * PI * f * f, b: tau_prev, c: -1.0 }
        } else {
            SurrogateCoeffs { a: 0.0, b: tau_prev, c: 1.0 }
        };
    }
    // sin(πu) without the cancellation of evaluating it at a large argument
    let sin_u = if odd { -(PI * r).sin() } else { (PI * r).sin() };
    let valley = if sin_u < 0.0 { u.floor() } else { u.ceil() };
    let b = (valley + zeta / PI) / (2.0 * f);
    let offset = (u - valley) / (2.0 * f);
    let a = -PI * f * sin_u / offset;
    let c = gamma(tau_prev, f, zeta) - a * offset * offset;
    SurrogateCoeffs { a, b, c }
}

/// Exact phase-shifter update: `w_n = exp(−j∠q_n)` with `q = Σ_m v_mᴴ diag(t_m)`.
/// Entries with `q_n = 0` get `w_n = 1`.
pub fn ps_update(targets: &[CVector], active: &[usize], grid: &FrequencyGrid, delays: &[f64], group_size: usize) -> CVector {
    let n = delays.len() * group_size;
    let mut q = CVector::zeros(n);
    for &m in active {
        let t = ttd_response(delays, grid.carriers()[m], group_size);
        q += targets[m].conjugate().component_mul(&t);
    }
    q.map(|x| if x.norm() == 0.0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, -x.arg()) })
}

/// Rows `v_mᴴ diag(w)` for `m ∈ 𝓜⁺`.
pub fn psi_matrix(targets: &[CVector], active: &[usize], w: &CVector) -> CMatrix {
    CMatrix::from_fn(active.len(), w.len(), |r, n| targets[active[r]][n].conj() * w[n])
}

/// Per-delay BSUM objective `Σ_{m,j} |ψ_{m,n}|·γ(τ_i)` summed over all delays.
pub fn ttd_objective(psi: &CMatrix, freqs: &[f64], delays: &[f64]) -> f64 {
    let g = psi.ncols() / delays.len();
    let mut total = 0.0;
    for (i, &tau) in delays.iter().enumerate() {
        for (r, &f) in freqs.iter().enumerate() {
            for n in i * g..(i + 1) * g {
                let p = psi[(r, n)];
                total += p.norm() * gamma(tau, f, p.arg() - PI);
            }
        }
    }
    total
}

/// One BSUM sweep: every delay moves to the clipped minimizer of its weighted
/// quadratic bound. A delay whose bounds are all flat keeps its value.
pub fn ttd_update_step(psi: &CMatrix, freqs: &[f64], delays: &[f64], budget_s: f64) -> Vec<f64> {
    let g = psi.ncols() / delays.len();
    delays
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let (mut num, mut den) = (0.0, 0.0);
            for (r, &f) in freqs.iter().enumerate() {
                for n in i * g..(i + 1) * g {
                    let p = psi[(r, n)];
                    let wgt = p.norm();
                    if wgt == 0.0 {
                        continue;
                    }
                    let s = surrogate_coeffs(tau, f, p.arg() - PI);
                    num += wgt * s.a * s.b;
                    den += wgt * s.a;
                }
            }
            if den > 0.0 {
                (num / den).clamp(0.0, budget_s)
            } else {
                tau
            }
        })
        .collect()
}

fn norm_ns(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) * 1e9).powi(2)).sum::<f64>().sqrt()
}

/// Delay-only BSUM until the update is below `tol_ns` (in nanoseconds).
/// Returns the delays and the number of sweeps.
pub fn bsum_delays(psi: &CMatrix, freqs: &[f64], init: &[f64], budget_s: f64, tol_ns: f64) -> (Vec<f64>, usize, bool) {
    let mut tau = init.iter().map(|t| t.clamp(0.0, budget_s)).collect::<Vec<_>>();
    for sweep in 1..=MAX_BSUM_SWEEPS {
        let next = ttd_update_step(psi, freqs, &tau, budget_s);
        let step = norm_ns(&next, &tau);
        tau = next;
        if step <= tol_ns {
            return (tau, sweep, true);
        }
    }
    (tau, MAX_BSUM_SWEEPS, false)
}

/// `η = Σ_{m∈𝓜⁺} ‖v_m − diag(w)t_m‖²`.
pub fn approximation_error(targets: &[CVector], active: &[usize], grid: &FrequencyGrid, bf: &AnalogBeamformer) -> f64 {
    active.iter().map(|&m| (&targets[m] - bf.synthesize(grid.carriers()[m])).norm_squared()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaTraceRow {
    pub iteration: usize,
    pub eta: f64,
    /// Delay change of this iteration in nanoseconds.
    pub dtau_ns: f64,
}

pub fn write_eta_trace_csv<W: Write>(out: &mut W, rows: &[EtaTraceRow]) -> std::io::Result<()> {
    writeln!(out, "iteration,eta,dtau_ns")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.iteration, fmt_sig(r.eta), fmt_sig(r.dtau_ns))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Approximation {
    pub beamformer: AnalogBeamformer,
    pub eta: f64,
    pub trace: Vec<EtaTraceRow>,
    /// AO iterations whose BSUM loop hit its sweep cap.
    pub bsum_cap_hits: usize,
    pub ao_cap_reached: bool,
}

/// Alternates the phase-shifter update and delay BSUM from `tau_init`.
/// Returns the iterate with the smallest `η`.
pub fn approximate(
    targets: &[CVector],
    active: &[usize],
    grid: &FrequencyGrid,
    tau_init: &[f64],
    budget_s: f64,
    tol: &Tolerances,
) -> Result<Approximation> {
    if targets.len() != grid.len() {
        return Err(invalid(format!("{} targets for {} carriers", targets.len(), grid.len())));
    }
    if tau_init.is_empty() {
        return Err(invalid("need at least one delay"));
    }
    let n = targets.first().map_or(0, |v| v.len());
    if n == 0 || !n.is_multiple_of(tau_init.len()) || targets.iter().any(|v| v.len() != n) {
        return Err(invalid("target lengths must match and be divisible by the TTD count"));
    }
    if let Some(&m) = active.iter().find(|&&m| m >= grid.len()) {
        return Err(invalid(format!("carrier index {m} out of range")));
    }
    let g = n / tau_init.len();
    let freqs: Vec<f64> = active.iter().map(|&m| grid.carriers()[m]).collect();

    let mut tau: Vec<f64> = tau_init.iter().map(|t| t.clamp(0.0, budget_s)).collect();
    let w = ps_update(targets, active, grid, &tau, g);
    let mut best = AnalogBeamformer::new(w, tau.clone())?;
    let mut eta = approximation_error(targets, active, grid, &best);
    let mut best_eta = eta;
    let mut trace = vec![EtaTraceRow { iteration: 0, eta, dtau_ns: 0.0 }];
    let mut bsum_cap_hits = 0;
    let mut ao_cap_reached = true;

    for l in 1..=MAX_AO_ITERATIONS {
        let w = ps_update(targets, active, grid, &tau, g);
        let psi = psi_matrix(targets, active, &w);
        let (next, _, converged) = bsum_delays(&psi, &freqs, &tau, budget_s, tol.bsum);
        if !converged {
            bsum_cap_hits += 1;
        }
        let dtau = norm_ns(&next, &tau);
        tau = next;
        let bf = AnalogBeamformer::new(w, tau.clone())?;
        let new_eta = approximation_error(targets, active, grid, &bf);
        trace.push(EtaTraceRow { iteration: l, eta: new_eta, dtau_ns: dtau });
        if new_eta <= best_eta {
            best_eta = new_eta;
            best = bf;
        }
        let done = (new_eta - eta).abs() <= tol.analog_ao;
        eta = new_eta;
        if done {
            ao_cap_reached = false;
            break;
        }
    }
    Ok(Approximation { beamformer: best, eta: best_eta, trace, bsum_cap_hits, ao_cap_reached })
}

/// Re-partitions the carriers and re-runs secure water-filling for the beams
/// the analog front end actually radiates. Returns the allocation and `R_S`.
pub fn refine_power(cfg: &ScenarioConfig, channels: &ChannelSet, bf: &AnalogBeamformer) -> Result<(PowerAllocation, f64)> {
    let grid = cfg.grid()?;
    let noise = cfg.noise_power_per_carrier();
    let us = bf.effective(&grid).per_carrier;
    let alloc = waterfill_for(channels, &us, cfg.power_budget_w, noise)?;
    let rate = secrecy_rate_of(channels, &us, &alloc.powers, noise);
    Ok((alloc, rate))
}

#[cfg(test)]
mod tests;
