//! Array geometry, spherical-wave channel synthesis and the OFDM carrier grid.
//!
//! The array is a uniform linear array lying on the x-axis with its centre at
//! the origin. Nodes are addressed in polar coordinates `(R, θ)` measured from
//! the origin, with `θ` the angle to the positive x-axis, so broadside is
//! `θ = π/2`.

mod config;

pub use config::{NoiseSpec, ScenarioConfig, Tolerances};

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::{CVector, C64};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Element positions of a centred uniform linear array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    element_x: Vec<f64>,
    spacing: f64,
}

impl ArrayGeometry {
    /// Half-wavelength ULA at `carrier_hz`, centred on the origin.
    pub fn ula(antennas: usize, carrier_hz: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(invalid("array needs at least one antenna"));
        }
        if !(carrier_hz > 0.0) {
            return Err(invalid(format!("carrier frequency must be positive, got {carrier_hz}")));
        }
        let spacing = SPEED_OF_LIGHT / carrier_hz / 2.0;
        let centre = (antennas as f64 - 1.0) / 2.0;
        let element_x = (0..antennas).map(|n| (n as f64 - centre) * spacing).collect();
        Ok(Self { element_x, spacing })
    }

    /// Arbitrary sorted element positions (meters). Used by tests and custom layouts.
    pub fn from_positions(element_x: Vec<f64>) -> Result<Self> {
        if element_x.is_empty() {
            return Err(invalid("array needs at least one antenna"));
        }
        if element_x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("element positions must be strictly increasing"));
        }
        let spacing = if element_x.len() > 1 { element_x[1] - element_x[0] } else { 0.0 };
        Ok(Self { element_x, spacing })
    }

    pub fn len(&self) -> usize {
        self.element_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_x.is_empty()
    }

    pub fn element_x(&self) -> &[f64] {
        &self.element_x
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn aperture(&self) -> f64 {
        self.element_x[self.element_x.len() - 1] - self.element_x[0]
    }

    /// Distance from element `n` (0-based) to `p`.
    pub fn element_distance(&self, n: usize, p: PolarPosition) -> f64 {
        element_distance_at(self.element_x[n], p)
    }

    /// Distances from every element to `p`.
    pub fn distances(&self, p: PolarPosition) -> Vec<f64> {
        self.element_x.iter().map(|&a| element_distance_at(a, p)).collect()
    }

    /// `2A²/λ` at the given frequency.
    pub fn rayleigh_distance(&self, carrier_hz: f64) -> f64 {
        let lambda = SPEED_OF_LIGHT / carrier_hz;
        2.0 * self.aperture().powi(2) / lambda
    }

    /// Free-space channel from every element to `p` at frequency `f`.
    pub fn channel_vector(&self, f: f64, p: PolarPosition) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.element_x.iter().map(|&a| {
                let d = element_distance_at(a, p);
                C64::from_polar(SPEED_OF_LIGHT / (4.0 * PI * f * d), -2.0 * PI * f * d / SPEED_OF_LIGHT)
            }),
        )
    }
}

/// `√(a² + R² − 2aR cosθ)`.
pub fn element_distance_at(a: f64, p: PolarPosition) -> f64 {
    (a * a + p.range * p.range - 2.0 * a * p.range * p.angle.cos()).sqrt()
}

/// A node position in the array's polar frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPosition {
    /// Range from the array centre (meters).
    pub range: f64,
    /// Angle from the array axis (radians), in `(0, π)`.
    pub angle: f64,
}

impl PolarPosition {
    pub fn new(range: f64, angle: f64) -> Result<Self> {
        if !(range > 0.0) || !range.is_finite() {
            return Err(invalid(format!("range must be positive, got {range}")));
        }
        if !(angle > 0.0 && angle < PI) {
            return Err(invalid(format!("angle must lie in (0, π), got {angle}")));
        }
        Ok(Self { range, angle })
    }

    pub fn from_degrees(range: f64, angle_deg: f64) -> Result<Self> {
        Self::new(range, angle_deg.to_radians())
    }

    /// `(X, Y) = (R cosθ, R sinθ)`.
    pub fn to_cartesian(self) -> (f64, f64) {
        (self.range * self.angle.cos(), self.range * self.angle.sin())
    }

    pub fn from_cartesian(x: f64, y: f64) -> Result<Self> {
        Self::new(x.hypot(y), y.atan2(x))
    }

    pub fn angle_deg(self) -> f64 {
        self.angle.to_degrees()
    }
}

/// Uniformly spaced subcarriers spanning `[f_c − B/2, f_c + B/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    center_hz: f64,
    bandwidth_hz: f64,
    carriers: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(center_hz: f64, bandwidth_hz: f64, subcarriers: usize) -> Result<Self> {
        if subcarriers < 2 {
            return Err(invalid("need at least two subcarriers"));
        }
        if !(bandwidth_hz > 0.0) || !(center_hz > bandwidth_hz / 2.0) {
            return Err(invalid("bandwidth must be positive and below twice the centre frequency"));
        }
        let step = bandwidth_hz / (subcarriers as f64 - 1.0);
        let mut carriers: Vec<f64> = (0..subcarriers).map(|m| center_hz - bandwidth_hz / 2.0 + m as f64 * step).collect();
        // pin the band edges exactly
        carriers[0] = center_hz - bandwidth_hz / 2.0;
        carriers[subcarriers - 1] = center_hz + bandwidth_hz / 2.0;
        Ok(Self { center_hz, bandwidth_hz, carriers })
    }

    pub fn carriers(&self) -> &[f64] {
        &self.carriers
    }

    pub fn len(&self) -> usize {
        self.carriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carriers.is_empty()
    }

    pub fn center(&self) -> f64 {
        self.center_hz
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Lowest carrier `f_1`.
    pub fn first(&self) -> f64 {
        self.carriers[0]
    }

    /// Highest carrier `f_M`.
    pub fn last(&self) -> f64 {
        self.carriers[self.carriers.len() - 1]
    }
}

/// Per-carrier channel vectors towards the legitimate receiver and the eavesdropper.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub bob: Vec<CVector>,
    pub eve: Vec<CVector>,
}

impl ChannelSet {
    pub fn synthesize(geometry: &ArrayGeometry, grid: &FrequencyGrid, bob: PolarPosition, eve: PolarPosition) -> Self {
        Self {
            bob: grid.carriers().iter().map(|&f| geometry.channel_vector(f, bob)).collect(),
            eve: grid.carriers().iter().map(|&f| geometry.channel_vector(f, eve)).collect(),
        }
    }

    /// Build directly from vectors; every vector must have the same length.
    pub fn from_vectors(bob: Vec<CVector>, eve: Vec<CVector>) -> Result<Self> {
        if bob.len() != eve.len() || bob.is_empty() {
            return Err(invalid("bob and eve need the same non-zero number of carriers"));
        }
        let n = bob[0].len();
        if bob.iter().chain(eve.iter()).any(|h| h.len() != n) {
            return Err(invalid("channel vectors differ in length"));
        }
        Ok(Self { bob, eve })
    }

    pub fn carriers(&self) -> usize {
        self.bob.len()
    }

    pub fn antennas(&self) -> usize {
        self.bob[0].len()
    }
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ula_positions() {
        let g = ArrayGeometry::ula(1, 24e9).unwrap();
        assert_eq!(g.element_x(), &[0.0]);

        let g = ArrayGeometry::ula(2, 24e9).unwrap();
        let half = SPEED_OF_LIGHT / 24e9 / 4.0;
        assert!((g.element_x()[0] + half).abs() < 1e-15);
        assert!((g.element_x()[1] - half).abs() < 1e-15);
        // λ_c = c / 24 GHz ≈ 0.0125 m
        assert!((g.element_x()[1] - 0.003125).abs() < 3e-6);

        let g = ArrayGeometry::ula(64, 24e9).unwrap();
        let expected = 63.0 * SPEED_OF_LIGHT / 24e9 / 2.0;
        assert!((g.aperture() - expected).abs() < 1e-12);
        assert!((g.aperture() - 0.39375).abs() < 4e-4);
        let sum: f64 = g.element_x().iter().sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn ula_rejects_bad_input() {
        assert!(ArrayGeometry::ula(0, 24e9).is_err());
        assert!(ArrayGeometry::ula(4, 0.0).is_err());
        assert!(ArrayGeometry::ula(4, -1.0).is_err());
    }

    #[test]
    fn element_distance_cases() {
        let p = PolarPosition::new(1.0, PI / 2.0).unwrap();
        assert!((element_distance_at(0.0, p) - 1.0).abs() < 1e-15);
        assert!((element_distance_at(0.1, p) - 1.01f64.sqrt()).abs() < 1e-15);
        assert!((element_distance_at(0.1, p) - 1.004988).abs() < 1e-6);

        let p = PolarPosition::new(2.0, 1.1).unwrap();
        let foot = p.range * p.angle.cos();
        assert!((element_distance_at(foot, p) - p.range * p.angle.sin()).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_distances() {
        let g = ArrayGeometry::ula(64, 24e9).unwrap();
        let dr = g.rayleigh_distance(24e9);
        assert!((dr - 24.8).abs() < 0.05, "got {dr}");

        let g = ArrayGeometry::ula(2, 24e9).unwrap();
        let lambda = SPEED_OF_LIGHT / 24e9;
        assert!((g.rayleigh_distance(24e9) - lambda / 2.0).abs() < 1e-15);

        let small = ArrayGeometry::from_positions(vec![-0.5, 0.5]).unwrap();
        let big = ArrayGeometry::from_positions(vec![-1.0, 1.0]).unwrap();
        let ratio = big.rayleigh_distance(24e9) / small.rayleigh_distance(24e9);
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn channel_entries() {
        let g = ArrayGeometry::ula(8, 24e9).unwrap();
        let p = PolarPosition::from_degrees(0.5, 60.0).unwrap();
        let f = 21e9;
        let h = g.channel_vector(f, p);
        for (n, hn) in h.iter().enumerate() {
            let d = g.element_distance(n, p);
            let mag = SPEED_OF_LIGHT / (4.0 * PI * f * d);
            assert!((hn.norm() / mag - 1.0).abs() < 1e-12);
            let phase = -2.0 * PI * f * d / SPEED_OF_LIGHT;
            let diff = (hn.arg() - phase).rem_euclid(2.0 * PI);
            assert!(diff.min(2.0 * PI - diff) < 1e-9);
        }
        // broadside node: symmetric elements see the same channel
        let p = PolarPosition::from_degrees(0.5, 90.0).unwrap();
        let h = g.channel_vector(f, p);
        for n in 0..4 {
            assert!((h[n] - h[7 - n]).norm() < 1e-15 * h[n].norm().max(1.0));
        }
    }

    #[test]
    fn grid_endpoints() {
        let grid = FrequencyGrid::new(24e9, 8e9, 10).unwrap();
        assert_eq!(grid.first(), 20e9);
        assert_eq!(grid.last(), 28e9);
        assert_eq!(grid.len(), 10);
        assert!(FrequencyGrid::new(24e9, 8e9, 1).is_err());
    }

    #[test]
    fn cartesian_round_trip() {
        let p = PolarPosition::from_degrees(0.7, 65.0).unwrap();
        let (x, y) = p.to_cartesian();
        let q = PolarPosition::from_cartesian(x, y).unwrap();
        assert!((q.range - p.range).abs() < 1e-14);
        assert!((q.angle - p.angle).abs() < 1e-14);
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(0.1) - 20.0).abs() < 1e-12);
    }
}
