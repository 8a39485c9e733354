//! TTD/PS analog beamformers and the frequency-dependent beamformer they synthesize.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scenario::{ArrayGeometry, FrequencyGrid, PolarPosition};
use crate::{fmt_sig, CVector, C64};

const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Cascaded TTD-then-PS front end: `N_T` delays, each feeding `N_G` phase shifters.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer {
    ps_weights: CVector,
    delays: Vec<f64>,
    group_size: usize,
}

impl AnalogBeamformer {
    pub fn new(ps_weights: CVector, delays: Vec<f64>) -> Result<Self> {
        if delays.is_empty() || !ps_weights.len().is_multiple_of(delays.len()) || ps_weights.is_empty() {
            return Err(invalid(format!(
                "{} phase shifters cannot be split evenly over {} delays",
                ps_weights.len(),
                delays.len()
            )));
        }
        if let Some(w) = ps_weights.iter().find(|w| (w.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
            return Err(invalid(format!("phase-shifter weight {w} is not unit modulus")));
        }
        if delays.iter().any(|d| !d.is_finite()) {
            return Err(invalid("delays must be finite"));
        }
        let group_size = ps_weights.len() / delays.len();
        Ok(Self { ps_weights, delays, group_size })
    }

    /// Phase shifters only, all delays zero.
    pub fn ttd_free(ps_weights: CVector, ttds: usize) -> Result<Self> {
        Self::new(ps_weights, vec![0.0; ttds])
    }

    pub fn ps_weights(&self) -> &CVector {
        &self.ps_weights
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn antennas(&self) -> usize {
        self.ps_weights.len()
    }

    /// Checks `0 ≤ τ_i ≤ χ` for every delay.
    pub fn check_delay_budget(&self, budget_s: f64) -> Result<()> {
        match self.delays.iter().find(|&&d| !(0.0..=budget_s).contains(&d)) {
            Some(d) => Err(invalid(format!("delay {d:e} s outside [0, {budget_s:e}]"))),
            None => Ok(()),
        }
    }

    /// `diag(w)·t(f)`.
    pub fn synthesize(&self, f: f64) -> CVector {
        let t = ttd_response(&self.delays, f, self.group_size);
        self.ps_weights.component_mul(&t)
    }

    pub fn effective(&self, grid: &FrequencyGrid) -> EffectiveBeamformer {
        EffectiveBeamformer { per_carrier: grid.carriers().iter().map(|&f| self.synthesize(f)).collect() }
    }
}

/// Per-carrier unit-modulus beamformers used as the analog approximation target.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDigitalBeamformer {
    pub vectors: Vec<CVector>,
}

impl SemiDigitalBeamformer {
    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.vectors.iter().flat_map(|v| v.iter()).all(|x| (x.norm() - 1.0).abs() <= tol)
    }
}

/// Per-carrier beamformer actually radiated.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBeamformer {
    pub per_carrier: Vec<CVector>,
}

/// TTD stage response: `N_G` consecutive copies of `exp(−j2πfτ_i)` per delay.
pub fn ttd_response(delays: &[f64], f: f64, group_size: usize) -> CVector {
    CVector::from_iterator(
        delays.len() * group_size,
        delays.iter().flat_map(|&tau| std::iter::repeat_n(C64::from_polar(1.0, -2.0 * PI * f * tau), group_size)),
    )
}

/// `|hᴴu|²`.
pub fn array_gain(h: &CVector, u: &CVector) -> Result<f64> {
    if h.len() != u.len() {
        return Err(invalid(format!("length mismatch: {} vs {}", h.len(), u.len())));
    }
    Ok(h.dotc(u).norm_sqr())
}

/// Polar raster in `(R/D_r, θ)`.
#[derive(Debug, Clone)]
pub struct PolarRaster {
    pub rayleigh_distance: f64,
    /// `(R/D_r, θ in degrees)` per cell, row-major over range.
    pub cells: Vec<(f64, f64)>,
}

impl PolarRaster {
    pub fn new(
        rayleigh_distance: f64,
        range_over_dr: (f64, f64),
        theta_deg: (f64, f64),
        resolution: (usize, usize),
    ) -> Result<Self> {
        let (nr, nt) = resolution;
        if nr == 0 || nt == 0 {
            return Err(invalid("raster resolution must be positive"));
        }
        let lin = |lo: f64, hi: f64, k: usize, n: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut cells = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            for j in 0..nt {
                cells.push((lin(range_over_dr.0, range_over_dr.1, i, nr), lin(theta_deg.0, theta_deg.1, j, nt)));
            }
        }
        Ok(Self { rayleigh_distance, cells })
    }

    /// 200×200 over `R/D_r ∈ [0.001, 0.05]`, `θ ∈ [40°, 90°]`.
    pub fn default_for(rayleigh_distance: f64) -> Self {
        Self::new(rayleigh_distance, (0.001, 0.05), (40.0, 90.0), (200, 200)).expect("static raster")
    }

    pub fn positions(&self) -> Result<Vec<PolarPosition>> {
        self.cells.iter().map(|&(r, t)| PolarPosition::from_degrees(r * self.rayleigh_distance, t)).collect()
    }
}

/// Normalized gains per frequency plus their sum.
#[derive(Debug, Clone)]
pub struct Beampattern {
    pub freqs: Vec<f64>,
    /// `per_freq[k][cell]`, each layer normalized to a peak of one over the grid.
    pub per_freq: Vec<Vec<f64>>,
    pub synthesized: Vec<f64>,
}

/// Evaluates `|h(f,p)ᴴu(f)|²/N` on every position, normalizes each frequency
/// layer by its grid maximum, and sums the layers.
pub fn beampattern(
    geometry: &ArrayGeometry,
    positions: &[PolarPosition],
    freqs: &[f64],
    beamformers: &[CVector],
) -> Result<Beampattern> {
    if positions.is_empty() || freqs.is_empty() {
        return Err(invalid("beampattern needs at least one position and one frequency"));
    }
    if freqs.len() != beamformers.len() {
        return Err(invalid("one beamformer per frequency is required"));
    }
    let n = geometry.len() as f64;
    let per_freq: Vec<Vec<f64>> = freqs
        .iter()
        .zip(beamformers)
        .map(|(&f, u)| {
            let raw: Vec<f64> = positions.par_iter().map(|&p| geometry.channel_vector(f, p).dotc(u).norm_sqr() / n).collect();
            let peak = raw.iter().cloned().fold(0.0, f64::max);
            if peak > 0.0 {
                raw.into_iter().map(|g| g / peak).collect()
            } else {
                raw
            }
        })
        .collect();
    let synthesized = (0..positions.len()).map(|c| per_freq.iter().map(|layer| layer[c]).sum()).collect();
    Ok(Beampattern { freqs: freqs.to_vec(), per_freq, synthesized })
}

/// [`beampattern`] for an analog beamformer.
pub fn beampattern_grid(
    b: &AnalogBeamformer,
    geometry: &ArrayGeometry,
    positions: &[PolarPosition],
    freqs: &[f64],
) -> Result<Beampattern> {
    let us: Vec<CVector> = freqs.iter().map(|&f| b.synthesize(f)).collect();
    beampattern(geometry, positions, freqs, &us)
}

/// CSV with columns `R_over_Dr,theta_deg,freq_hz_or_SYNTH,normalized_gain`.
pub fn write_beampattern_csv<W: Write>(out: &mut W, raster: &PolarRaster, pattern: &Beampattern) -> std::io::Result<()> {
    writeln!(out, "R_over_Dr,theta_deg,freq_hz_or_SYNTH,normalized_gain")?;
    for (f, layer) in pattern.freqs.iter().zip(&pattern.per_freq) {
        for (&(r, t), g) in raster.cells.iter().zip(layer) {
            writeln!(out, "{},{},{},{}", fmt_sig(r), fmt_sig(t), fmt_sig(*f), fmt_sig(*g))?;
        }
    }
    for (&(r, t), g) in raster.cells.iter().zip(&pattern.synthesized) {
        writeln!(out, "{},{},SYNTH,{}", fmt_sig(r), fmt_sig(t), fmt_sig(*g))?;
    }
    Ok(())
}
