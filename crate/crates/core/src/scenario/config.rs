use std::path::Path;

use serde::Deserialize;

use super::{dbm_to_watts, ArrayGeometry, ChannelSet, FrequencyGrid, PolarPosition};
use crate::error::{invalid, Error, Result};
use crate::metrics::PowerModel;

/// How the receiver noise is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Power spectral density in dBm/Hz, spread over `B/M` per carrier.
    Psd { dbm_per_hz: f64 },
    /// Noise power per carrier in watts.
    PerCarrier { watts: f64 },
}

/// Stopping tolerances of the iterative stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Change of the fractional-programming auxiliary between outer iterations.
    pub lambda: f64,
    /// Frobenius change of the lifted beamformer between rank-one iterations.
    pub lifted: f64,
    /// Change of the semi-digital secrecy rate between AO iterations.
    pub ao: f64,
    /// Delay change between BSUM sweeps, measured in nanoseconds.
    pub bsum: f64,
    /// Change of the approximation error between analog AO iterations.
    pub analog_ao: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { lambda: 1e-3, lifted: 1e-3, ao: 1e-3, bsum: 1e-4, analog_ao: 1e-4 }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub antennas: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub ttds: usize,
    pub bob: PolarPosition,
    pub eve: PolarPosition,
    pub power_budget_w: f64,
    pub noise: NoiseSpec,
    pub delay_budget_s: f64,
    pub tolerances: Tolerances,
    pub bala_segments: usize,
    /// Shift all BALA delays by a common offset so the smallest is zero before clamping.
    pub bala_delay_offset: bool,
    pub power_model: PowerModel,
}

impl ScenarioConfig {
    /// 64-antenna, 32-TTD system at 24 GHz with 8 GHz bandwidth and 10 carriers.
    pub fn standard() -> Self {
        let geometry = ArrayGeometry::ula(64, 24e9).expect("static geometry");
        let dr = geometry.rayleigh_distance(24e9);
        Self {
            antennas: 64,
            carrier_hz: 24e9,
            bandwidth_hz: 8e9,
            subcarriers: 10,
            ttds: 32,
            bob: PolarPosition::from_degrees(0.02 * dr, 60.0).expect("static position"),
            eve: PolarPosition::from_degrees(0.015 * dr, 65.0).expect("static position"),
            power_budget_w: dbm_to_watts(20.0),
            noise: NoiseSpec::Psd { dbm_per_hz: -100.0 },
            delay_budget_s: 5e-9,
            tolerances: Tolerances::default(),
            bala_segments: 100,
            bala_delay_offset: false,
            power_model: PowerModel::standard(),
        }
    }

    /// 16 antennas and 8 TTDs; node positions are kept from [`Self::standard`].
    pub fn desk() -> Self {
        Self { antennas: 16, ttds: 8, ..Self::standard() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(invalid("antennas must be positive"));
        }
        if self.ttds == 0 || !self.antennas.is_multiple_of(self.ttds) {
            return Err(invalid(format!("antenna count {} is not divisible by TTD count {}", self.antennas, self.ttds)));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(invalid("carrier frequency must be positive"));
        }
        if self.subcarriers < 2 {
            return Err(invalid("need at least two subcarriers"));
        }
        if !(self.bandwidth_hz > 0.0) || self.bandwidth_hz >= 2.0 * self.carrier_hz {
            return Err(invalid("bandwidth must be positive and below twice the carrier"));
        }
        if !(self.power_budget_w > 0.0) {
            return Err(invalid("power budget must be positive"));
        }
        if !(self.delay_budget_s >= 0.0) {
            return Err(invalid("delay budget must be non-negative"));
        }
        if self.bala_segments == 0 {
            return Err(invalid("BALA needs at least one segment"));
        }
        let t = &self.tolerances;
        if [t.lambda, t.lifted, t.ao, t.bsum, t.analog_ao].iter().any(|&v| !(v > 0.0)) {
            return Err(invalid("all tolerances must be positive"));
        }
        match self.noise {
            NoiseSpec::PerCarrier { watts } if !(watts > 0.0) => return Err(invalid("noise power must be positive")),
            NoiseSpec::Psd { dbm_per_hz } if !dbm_per_hz.is_finite() => return Err(invalid("noise density must be finite")),
            _ => {}
        }
        self.power_model.validate()?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::ula(self.antennas, self.carrier_hz)
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.carrier_hz, self.bandwidth_hz, self.subcarriers)
    }

    pub fn channels(&self) -> Result<ChannelSet> {
        Ok(ChannelSet::synthesize(&self.geometry()?, &self.grid()?, self.bob, self.eve))
    }

    /// Antennas fed by each TTD.
    pub fn group_size(&self) -> usize {
        self.antennas / self.ttds
    }

    /// Noise power per carrier σ² (watts).
    pub fn noise_power_per_carrier(&self) -> f64 {
        match self.noise {
            NoiseSpec::Psd { dbm_per_hz } => dbm_to_watts(dbm_per_hz) * self.bandwidth_hz / self.subcarriers as f64,
            NoiseSpec::PerCarrier { watts } => watts,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    /// Parses the sectioned `key = value` scenario format.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_config()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    array: RawArray,
    band: RawBand,
    bob: RawNode,
    eve: RawNode,
    power: RawPower,
    #[serde(default)]
    tolerances: Option<RawTolerances>,
    #[serde(default)]
    bala: Option<RawBala>,
    #[serde(default)]
    power_model: Option<RawPowerModel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    antennas: usize,
    carrier_hz: f64,
    ttds: usize,
    /// Antenna count used to compute the Rayleigh distance for `range_over_dr`.
    rayleigh_reference_antennas: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    bandwidth_hz: f64,
    subcarriers: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    range_m: Option<f64>,
    range_over_dr: Option<f64>,
    angle_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    budget_w: Option<f64>,
    budget_dbm: Option<f64>,
    noise_psd_dbm_per_hz: Option<f64>,
    noise_per_carrier_w: Option<f64>,
    noise_per_carrier_dbm: Option<f64>,
    delay_budget_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    lambda: Option<f64>,
    lifted: Option<f64>,
    ao: Option<f64>,
    bsum: Option<f64>,
    analog_ao: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBala {
    segments: Option<usize>,
    delay_offset: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPowerModel {
    baseband_w: Option<f64>,
    baseband_dbm: Option<f64>,
    rf_chain_w: Option<f64>,
    rf_chain_dbm: Option<f64>,
    ttd_w: Option<f64>,
    ttd_dbm: Option<f64>,
    ps_w: Option<f64>,
    ps_dbm: Option<f64>,
    rf_chains: Option<usize>,
}

fn watts_or_dbm(name: &str, w: Option<f64>, dbm: Option<f64>) -> Result<Option<f64>> {
    match (w, dbm) {
        (Some(_), Some(_)) => Err(Error::Parse(format!("give either {name}_w or {name}_dbm, not both"))),
        (Some(w), None) => Ok(Some(w)),
        (None, Some(d)) => Ok(Some(dbm_to_watts(d))),
        (None, None) => Ok(None),
    }
}

impl RawScenario {
    fn into_config(self) -> Result<ScenarioConfig> {
        let reference = self.array.rayleigh_reference_antennas.unwrap_or(self.array.antennas);
        let dr = ArrayGeometry::ula(reference, self.array.carrier_hz)?.rayleigh_distance(self.array.carrier_hz);
        let node = |name: &str, raw: &RawNode| -> Result<PolarPosition> {
            let range = match (raw.range_m, raw.range_over_dr) {
                (Some(r), None) => r,
                (None, Some(frac)) => frac * dr,
                _ => return Err(Error::Parse(format!("[{name}] needs exactly one of range_m or range_over_dr"))),
            };
            PolarPosition::from_degrees(range, raw.angle_deg)
        };
        let bob = node("bob", &self.bob)?;
        let eve = node("eve", &self.eve)?;

        let p = &self.power;
        let power_budget_w = watts_or_dbm("budget", p.budget_w, p.budget_dbm)?
            .ok_or_else(|| Error::Parse("[power] needs budget_w or budget_dbm".into()))?;
        let noise = match (p.noise_psd_dbm_per_hz, p.noise_per_carrier_w, p.noise_per_carrier_dbm) {
            (Some(d), None, None) => NoiseSpec::Psd { dbm_per_hz: d },
            (None, Some(w), None) => NoiseSpec::PerCarrier { watts: w },
            (None, None, Some(d)) => NoiseSpec::PerCarrier { watts: dbm_to_watts(d) },
            _ => {
                return Err(Error::Parse(
                    "[power] needs exactly one of noise_psd_dbm_per_hz, noise_per_carrier_w, noise_per_carrier_dbm".into(),
                ))
            }
        };

        let mut tolerances = Tolerances::default();
        if let Some(t) = self.tolerances {
            tolerances.lambda = t.lambda.unwrap_or(tolerances.lambda);
            tolerances.lifted = t.lifted.unwrap_or(tolerances.lifted);
            tolerances.ao = t.ao.unwrap_or(tolerances.ao);
            tolerances.bsum = t.bsum.unwrap_or(tolerances.bsum);
            tolerances.analog_ao = t.analog_ao.unwrap_or(tolerances.analog_ao);
        }
        let (bala_segments, bala_delay_offset) = match self.bala {
            Some(b) => (b.segments.unwrap_or(100), b.delay_offset.unwrap_or(false)),
            None => (100, false),
        };
        let mut power_model = PowerModel::standard();
        if let Some(pm) = self.power_model {
            if let Some(w) = watts_or_dbm("baseband", pm.baseband_w, pm.baseband_dbm)? {
                power_model.baseband_w = w;
            }
            if let Some(w) = watts_or_dbm("rf_chain", pm.rf_chain_w, pm.rf_chain_dbm)? {
                power_model.rf_chain_w = w;
            }
            if let Some(w) = watts_or_dbm("ttd", pm.ttd_w, pm.ttd_dbm)? {
                power_model.ttd_w = w;
            }
            if let Some(w) = watts_or_dbm("ps", pm.ps_w, pm.ps_dbm)? {
                power_model.ps_w = w;
            }
            if let Some(n) = pm.rf_chains {
                power_model.rf_chains = n;
            }
        }

        let cfg = ScenarioConfig {
            antennas: self.array.antennas,
            carrier_hz: self.array.carrier_hz,
            bandwidth_hz: self.band.bandwidth_hz,
            subcarriers: self.band.subcarriers,
            ttds: self.array.ttds,
            bob,
            eve,
            power_budget_w,
            noise,
            delay_budget_s: p.delay_budget_s,
            tolerances,
            bala_segments,
            bala_delay_offset,
            power_model,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULT_FILE: &str = include_str!("../../scenarios/default.toml");
    const DESK_FILE: &str = include_str!("../../scenarios/desk.toml");

    #[test]
    fn shipped_files_match_builders() {
        let parsed = ScenarioConfig::from_toml_str(DEFAULT_FILE).unwrap();
        let built = ScenarioConfig::standard();
        assert_eq!(parsed.antennas, built.antennas);
        assert_eq!(parsed.ttds, built.ttds);
        assert!((parsed.bob.range - built.bob.range).abs() < 1e-12);
        assert!((parsed.eve.angle - built.eve.angle).abs() < 1e-12);
        assert!((parsed.power_budget_w - 0.1).abs() < 1e-15);
        assert_eq!(parsed.noise, built.noise);
        assert_eq!(parsed.tolerances, built.tolerances);
        assert_eq!(parsed.power_model, built.power_model);

        let desk = ScenarioConfig::from_toml_str(DESK_FILE).unwrap();
        assert_eq!(desk.antennas, 16);
        assert_eq!(desk.ttds, 8);
        assert!((desk.bob.range - built.bob.range).abs() < 1e-12);
    }

    #[test]
    fn noise_per_carrier() {
        let cfg = ScenarioConfig::standard();
        let s2 = cfg.noise_power_per_carrier();
        assert!((s2 - 8e-5).abs() < 1e-18, "got {s2}");

        let halved = ScenarioConfig { noise: NoiseSpec::Psd { dbm_per_hz: -103.0 }, ..cfg.clone() };
        assert!((halved.noise_power_per_carrier() / s2 - 0.5).abs() < 2e-3);

        let doubled_m = ScenarioConfig { subcarriers: 20, ..cfg };
        assert!((doubled_m.noise_power_per_carrier() / s2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = ScenarioConfig { ttds: 5, ..ScenarioConfig::desk() };
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig { delay_budget_s: -1.0, ..ScenarioConfig::desk() };
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig { power_budget_w: 0.0, ..ScenarioConfig::desk() };
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::desk();
        cfg.tolerances.bsum = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parse_errors() {
        let text = DESK_FILE.replace("budget_dbm = 20.0", "budget_dbm = 20.0\nbudget_w = 0.1");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Parse(_))));
        let text = DESK_FILE.replace("angle_deg = 60.0", "angle_deg = 60.0\nbogus = 1");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn absolute_range_and_direct_noise() {
        let text = r#"
[array]
antennas = 8
carrier_hz = 24e9
ttds = 4
[band]
bandwidth_hz = 4e9
subcarriers = 4
[bob]
range_m = 0.5
angle_deg = 80
[eve]
range_m = 0.4
angle_deg = 100
[power]
budget_w = 0.2
noise_per_carrier_dbm = -20
delay_budget_s = 2e-9
"#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.bob.range, 0.5);
        assert!((cfg.noise_power_per_carrier() - 1e-5).abs() < 1e-18);
        assert_eq!(cfg.group_size(), 2);
    }
}
