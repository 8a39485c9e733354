//! Beamsplit-aware low-complexity ATP configuration.
//!
//! With TTD-free beamforming matched to Bob at `f_1`, the focus of carrier `f`
//! drifts along a closed-form trace. Adding per-antenna delays pins the `f_1`
//! focus on Bob and moves the `f_M` focus to any chosen target; BALA searches
//! targets on the segment from the drifted end point back to Bob.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::analogapprox::refine_power;
use crate::beamforming::AnalogBeamformer;
use crate::error::{invalid, Error, Result};
use crate::powalloc::PowerAllocation;
use crate::scenario::{ArrayGeometry, ChannelSet, FrequencyGrid, PolarPosition, ScenarioConfig, SPEED_OF_LIGHT};
use crate::{fmt_sig, CVector, C64};

fn checked_acos(x: f64, what: &str) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{what}: arccos argument {x} outside [-1, 1]")));
    }
    Ok(x.acos())
}

/// Focus of carrier `f` when the phase shifters are matched to Bob at `f_1`.
pub fn ttdfree_focus(f: f64, bob: PolarPosition, f1: f64) -> Result<PolarPosition> {
    if !(f1 > 0.0) || !(f >= f1) {
        return Err(invalid(format!("need f ≥ f_1 > 0, got f = {f}, f_1 = {f1}")));
    }
    let r = f1 / f;
    let theta = checked_acos(r * bob.angle.cos(), "TTD-free focus angle")?;
    let s2 = bob.angle.sin().powi(2);
    let t2 = bob.angle.tan().powi(2);
    let range = (1.0 / (r * s2) - r / t2) * bob.range;
    PolarPosition::new(range, theta)
}

/// Focus of carrier `f` for the ATP configuration steering `f_1` to Bob and
/// `f_M` to `target`.
pub fn atp_focus(f: f64, bob: PolarPosition, target: PolarPosition, grid: &FrequencyGrid) -> Result<PolarPosition> {
    let (f1, fm) = (grid.first(), grid.last());
    let b = fm - f1;
    let cos = ((f - f1) * fm * target.angle.cos() - (f - fm) * f1 * bob.angle.cos()) / (b * f);
    let theta = checked_acos(cos, "ATP focus angle")?;
    let s2 = theta.sin().powi(2);
    let inv = (f - f1) * fm * target.angle.sin().powi(2) / (b * f * target.range * s2)
        - (f - fm) * f1 * bob.angle.sin().powi(2) / (b * f * bob.range * s2);
    if !(inv > 0.0) {
        return Err(Error::Domain(format!("ATP focus range is not positive at f = {f}")));
    }
    PolarPosition::new(1.0 / inv, theta)
}

/// Per-antenna delays and phases before grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct AtpConfig {
    pub delays: Vec<f64>,
    pub phases: Vec<f64>,
}

impl AtpConfig {
    /// `w_n = exp(+jφ_n)`.
    pub fn ps_weights(&self) -> CVector {
        CVector::from_iterator(self.phases.len(), self.phases.iter().map(|&p| C64::from_polar(1.0, p)))
    }

    /// Phase of `w_n·exp(−j2πfτ_n)` per antenna, wrapped to `(−π, π]`.
    pub fn combined_phase(&self, f: f64) -> Vec<f64> {
        self.delays.iter().zip(&self.phases).map(|(&t, &p)| wrap(p - 2.0 * PI * f * t)).collect()
    }

    /// Adds a common offset so the smallest delay is zero. Gain-neutral.
    pub fn shift_to_zero(&mut self) {
        let min = self.delays.iter().copied().fold(f64::INFINITY, f64::min);
        self.delays.iter_mut().for_each(|t| *t -= min);
    }

    /// Clamps delays into `[0, χ]`; returns how many changed.
    pub fn clamp(&mut self, budget_s: f64) -> usize {
        let mut changed = 0;
        for t in &mut self.delays {
            let c = t.clamp(0.0, budget_s);
            if c != *t {
                changed += 1;
                *t = c;
            }
        }
        changed
    }
}

pub(crate) fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Delays and phases that focus `f_1` on Bob and `f_M` on `target`. Unclamped.
pub fn atp_config(bob: PolarPosition, target: PolarPosition, grid: &FrequencyGrid, geometry: &ArrayGeometry) -> AtpConfig {
    let (f1, fm) = (grid.first(), grid.last());
    let b = fm - f1;
    let db = geometry.distances(bob);
    let dt = geometry.distances(target);
    let delays = db.iter().zip(&dt).map(|(&d_b, &d_t)| (fm * d_t - f1 * d_b) / (SPEED_OF_LIGHT * b)).collect();
    let phases = db.iter().zip(&dt).map(|(&d_b, &d_t)| 2.0 * PI * f1 * fm * (d_t - d_b) / (SPEED_OF_LIGHT * b)).collect();
    AtpConfig { delays, phases }
}

/// Mean delay of each block of `N/N_T` consecutive antennas.
pub fn group_delays(tau: &[f64], ttds: usize) -> Result<Vec<f64>> {
    if ttds == 0 || !tau.len().is_multiple_of(ttds) {
        return Err(invalid(format!("{} delays cannot be grouped into {ttds} TTDs", tau.len())));
    }
    let g = tau.len() / ttds;
    Ok(tau.chunks(g).map(|c| c.iter().sum::<f64>() / g as f64).collect())
}

/// One evaluated line-search point.
#[derive(Debug, Clone, PartialEq)]
pub struct BalaCandidate {
    pub l: usize,
    pub x: f64,
    pub y: f64,
    pub target: PolarPosition,
    pub secrecy_rate: f64,
    /// Per-antenna delays moved by the budget clamp.
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub struct BalaOutcome {
    pub beamformer: AnalogBeamformer,
    pub allocation: PowerAllocation,
    pub secrecy_rate: f64,
    /// Index into `candidates` of the selected point.
    pub best: usize,
    pub candidates: Vec<BalaCandidate>,
}

/// Phase shifters, grouped delays and score of one target.
fn evaluate_target(
    cfg: &ScenarioConfig,
    channels: &ChannelSet,
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
    target: PolarPosition,
) -> Result<(AnalogBeamformer, PowerAllocation, f64, usize)> {
    let mut atp = atp_config(cfg.bob, target, grid, geometry);
    if cfg.bala_delay_offset {
        atp.shift_to_zero();
    }
    let clamped = atp.clamp(cfg.delay_budget_s);
    let delays = group_delays(&atp.delays, cfg.ttds)?;
    let bf = AnalogBeamformer::new(atp.ps_weights(), delays)?;
    let (alloc, rate) = refine_power(cfg, channels, &bf)?;
    Ok((bf, alloc, rate, clamped))
}

/// Line search over `L` targets between the TTD-free end point and Bob.
/// Ties go to the lowest `l`.
pub fn bala_search(cfg: &ScenarioConfig, channels: &ChannelSet) -> Result<BalaOutcome> {
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let end = ttdfree_focus(grid.last(), cfg.bob, grid.first())?;
    let (xe, ye) = end.to_cartesian();
    let (xb, yb) = cfg.bob.to_cartesian();
    let segments = cfg.bala_segments;
    let scored: Vec<_> = (1..=segments)
        .into_par_iter()
        .map(|l| {
            let s = l as f64 / segments as f64;
            let (x, y) = if l == segments { (xb, yb) } else { (xe + s * (xb - xe), ye + s * (yb - ye)) };
            let target = if l == segments { cfg.bob } else { PolarPosition::from_cartesian(x, y)? };
            let (bf, alloc, rate, clamped) = evaluate_target(cfg, channels, &geometry, &grid, target)?;
            Ok((BalaCandidate { l, x, y, target, secrecy_rate: rate, clamped }, bf, alloc))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, (c, _, _)) in scored.iter().enumerate() {
        if c.secrecy_rate > scored[best].0.secrecy_rate {
            best = k;
        }
    }
    let mut candidates = Vec::with_capacity(scored.len());
    let mut chosen = None;
    for (k, (c, bf, alloc)) in scored.into_iter().enumerate() {
        if k == best {
            chosen = Some((bf, alloc));
        }
        candidates.push(c);
    }
    let (beamformer, allocation) = chosen.expect("at least one segment");
    Ok(BalaOutcome { beamformer, allocation, secrecy_rate: candidates[best].secrecy_rate, best, candidates })
}

pub fn write_candidates_csv<W: Write>(out: &mut W, candidates: &[BalaCandidate]) -> std::io::Result<()> {
    writeln!(out, "l,X,Y,R,theta_deg,R_S,clamped_count")?;
    for c in candidates {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.l,
            fmt_sig(c.x),
            fmt_sig(c.y),
            fmt_sig(c.target.range),
            fmt_sig(c.target.angle_deg()),
            fmt_sig(c.secrecy_rate),
            c.clamped
        )?;
    }
    Ok(())
}
