//! Method runners, baselines and parameter sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::analogapprox::{approximate, ps_update, refine_power, EtaTraceRow};
use crate::bala::{bala_search, BalaOutcome};
use crate::beamforming::AnalogBeamformer;
use crate::error::{invalid, Error, Result};
use crate::metrics::{Architecture, SecrecyReport};
use crate::powalloc::{partition_carriers, GainPair};
use crate::scenario::{dbm_to_watts, ChannelSet, ScenarioConfig};
use crate::semidigital::{fully_digital_solve, semi_digital_solve, AoTraceRow, FullyDigitalSolution, SemiDigitalSolution};
use crate::{fmt_sig, CVector, C64};

/// Environment variable that caps the worker threads of [`sweep`].
pub const THREADS_ENV: &str = "BEAMFOCUS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Semi-digital first stage, then the TTD/PS fit.
    AtpI,
    /// Fully-digital first stage, then the TTD/PS fit.
    AtpII,
    AtpBala,
    /// Phase shifters fitted to the semi-digital beams with all delays at zero.
    BaselineA,
    /// Phase shifters matched to Bob's channel at the lowest carrier.
    BaselineB,
    FullyDigital,
    /// The first-stage unit-modulus beamformers themselves.
    SemiDigital,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::AtpI,
        Method::AtpII,
        Method::AtpBala,
        Method::BaselineA,
        Method::BaselineB,
        Method::FullyDigital,
        Method::SemiDigital,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::AtpI => "ATP-I",
            Method::AtpII => "ATP-II",
            Method::AtpBala => "ATP-BALA",
            Method::BaselineA => "Baseline-A",
            Method::BaselineB => "Baseline-B",
            Method::FullyDigital => "Fully-Digital",
            Method::SemiDigital => "Semi-Digital",
        }
    }

    pub fn architecture(self, cfg: &ScenarioConfig) -> Architecture {
        match self {
            Method::FullyDigital => Architecture::FullyDigital { antennas: cfg.antennas },
            Method::BaselineA | Method::BaselineB => Architecture::Hybrid { antennas: cfg.antennas, ttds: 0 },
            _ => Architecture::Hybrid { antennas: cfg.antennas, ttds: cfg.ttds },
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name().chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Everything a method produced, beyond the score.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub report: SecrecyReport,
    /// Radiated beamformer per carrier.
    pub beams: Vec<CVector>,
    pub analog: Option<AnalogBeamformer>,
    pub ao_trace: Vec<AoTraceRow>,
    pub eta_trace: Vec<EtaTraceRow>,
    pub notes: Vec<String>,
}

/// Runs methods on one scenario, sharing first-stage solutions between them.
pub struct Runner {
    cfg: ScenarioConfig,
    channels: ChannelSet,
    semi: Option<SemiDigitalSolution>,
    fully: Option<FullyDigitalSolution>,
    bala: Option<BalaOutcome>,
}

impl Runner {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let channels = cfg.channels()?;
        Ok(Self { cfg, channels, semi: None, fully: None, bala: None })
    }

    pub fn with_channels(cfg: ScenarioConfig, channels: ChannelSet) -> Result<Self> {
        cfg.validate()?;
        if channels.antennas() != cfg.antennas || channels.carriers() != cfg.subcarriers {
            return Err(invalid("channel dimensions do not match the scenario"));
        }
        Ok(Self { cfg, channels, semi: None, fully: None, bala: None })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn semi_digital(&mut self) -> Result<&SemiDigitalSolution> {
        if self.semi.is_none() {
            self.semi = Some(semi_digital_solve(&self.cfg, &self.channels)?);
        }
        Ok(self.semi.as_ref().expect("just filled"))
    }

    pub fn fully_digital(&mut self) -> Result<&FullyDigitalSolution> {
        if self.fully.is_none() {
            self.fully = Some(fully_digital_solve(&self.cfg, &self.channels)?);
        }
        Ok(self.fully.as_ref().expect("just filled"))
    }

    pub fn bala(&mut self) -> Result<&BalaOutcome> {
        if self.bala.is_none() {
            self.bala = Some(bala_search(&self.cfg, &self.channels)?);
        }
        Ok(self.bala.as_ref().expect("just filled"))
    }

    fn report(&self, method: Method, beams: &[CVector], powers: &[f64]) -> Result<SecrecyReport> {
        SecrecyReport::evaluate(
            &self.channels,
            beams,
            powers,
            self.cfg.noise_power_per_carrier(),
            self.cfg.power_budget_w,
            &self.cfg.power_model,
            method.architecture(&self.cfg),
        )
    }

    fn analog_run(
        &self,
        method: Method,
        bf: AnalogBeamformer,
        eta_trace: Vec<EtaTraceRow>,
        notes: Vec<String>,
    ) -> Result<MethodRun> {
        let (alloc, _) = refine_power(&self.cfg, &self.channels, &bf)?;
        let beams = bf.effective(&self.cfg.grid()?).per_carrier;
        let report = self.report(method, &beams, &alloc.powers)?;
        Ok(MethodRun { method, report, beams, analog: Some(bf), ao_trace: Vec::new(), eta_trace, notes })
    }

    /// Fits the front end to `targets` starting from the BALA delays.
    fn fit(&mut self, method: Method, targets: Vec<CVector>, active: Vec<usize>, ao_trace: Vec<AoTraceRow>) -> Result<MethodRun> {
        let tau_init = self.bala()?.beamformer.delays().to_vec();
        let grid = self.cfg.grid()?;
        let fit = approximate(&targets, &active, &grid, &tau_init, self.cfg.delay_budget_s, &self.cfg.tolerances)?;
        let mut notes = Vec::new();
        if fit.ao_cap_reached {
            notes.push("analog AO stopped at its iteration cap".to_string());
        }
        if fit.bsum_cap_hits > 0 {
            notes.push(format!("BSUM hit its sweep cap in {} AO iterations", fit.bsum_cap_hits));
        }
        let mut run = self.analog_run(method, fit.beamformer, fit.trace, notes)?;
        run.ao_trace = ao_trace;
        Ok(run)
    }

    pub fn run(&mut self, method: Method) -> Result<MethodRun> {
        match method {
            Method::SemiDigital => {
                let s = self.semi_digital()?.clone();
                let report = self.report(method, &s.beamformer.vectors, &s.powers)?;
                Ok(MethodRun {
                    method,
                    report,
                    beams: s.beamformer.vectors,
                    analog: None,
                    ao_trace: s.trace,
                    eta_trace: Vec::new(),
                    notes: s.diagnostics.messages,
                })
            }
            Method::FullyDigital => {
                let s = self.fully_digital()?.clone();
                let report = self.report(method, &s.vectors, &s.powers)?;
                Ok(MethodRun {
                    method,
                    report,
                    beams: s.vectors,
                    analog: None,
                    ao_trace: s.trace,
                    eta_trace: Vec::new(),
                    notes: Vec::new(),
                })
            }
            Method::AtpBala => {
                let b = self.bala()?;
                let note = format!(
                    "selected segment {} of {} ({} delays clamped)",
                    b.candidates[b.best].l,
                    b.candidates.len(),
                    b.candidates[b.best].clamped
                );
                let bf = b.beamformer.clone();
                self.analog_run(method, bf, Vec::new(), vec![note])
            }
            Method::AtpI => {
                let s = self.semi_digital()?;
                let (targets, active, trace) = (s.beamformer.vectors.clone(), s.active.clone(), s.trace.clone());
                self.fit(method, targets, active, trace)
            }
            Method::AtpII => {
                let s = self.fully_digital()?;
                let (targets, trace) = (s.vectors.clone(), s.trace.clone());
                let active = active_carriers(&self.channels, &targets);
                self.fit(method, targets, active, trace)
            }
            Method::BaselineA => {
                let s = self.semi_digital()?;
                let (targets, active) = (s.beamformer.vectors.clone(), s.active.clone());
                let grid = self.cfg.grid()?;
                let ttds = self.cfg.ttds;
                let w = ps_update(&targets, &active, &grid, &vec![0.0; ttds], self.cfg.group_size());
                let bf = AnalogBeamformer::ttd_free(w, ttds)?;
                self.analog_run(method, bf, Vec::new(), Vec::new())
            }
            Method::BaselineB => {
                let w = matched_to_first_carrier(&self.channels);
                let bf = AnalogBeamformer::ttd_free(w, self.cfg.ttds)?;
                self.analog_run(method, bf, Vec::new(), Vec::new())
            }
        }
    }
}

/// `w_n = exp(j∠[h_B,1]_n)`.
pub fn matched_to_first_carrier(channels: &ChannelSet) -> CVector {
    channels.bob[0].map(|h| if h.norm() == 0.0 { C64::new(1.0, 0.0) } else { h / h.norm() })
}

/// Carriers where the beam favours Bob over Eve.
pub fn active_carriers(channels: &ChannelSet, beams: &[CVector]) -> Vec<usize> {
    let gains: Vec<GainPair> = channels
        .bob
        .iter()
        .zip(&channels.eve)
        .zip(beams)
        .map(|((hb, he), v)| GainPair::new(hb.dotc(v).norm_sqr(), he.dotc(v).norm_sqr()))
        .collect();
    partition_carriers(&gains).0
}

/// Runs one method on a fresh scenario.
pub fn run_method(method: Method, cfg: &ScenarioConfig, channels: &ChannelSet) -> Result<MethodRun> {
    Runner::with_channels(cfg.clone(), channels.clone())?.run(method)
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Number of TTDs.
    Ttds,
    /// Delay budget in seconds.
    DelayBudget,
    /// Bandwidth in hertz.
    Bandwidth,
    /// Transmit power budget in dBm.
    PowerDbm,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Ttds => "NT",
            SweepParam::DelayBudget => "chi",
            SweepParam::Bandwidth => "B",
            SweepParam::PowerDbm => "P",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        match self {
            SweepParam::Ttds => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(invalid(format!("TTD count must be a positive integer, got {value}")));
                }
                c.ttds = value as usize;
            }
            SweepParam::DelayBudget => c.delay_budget_s = value,
            SweepParam::Bandwidth => c.bandwidth_hz = value,
            SweepParam::PowerDbm => c.power_budget_w = dbm_to_watts(value),
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nt" | "ttds" => Ok(SweepParam::Ttds),
            "chi" | "delay" | "delay_budget" => Ok(SweepParam::DelayBudget),
            "b" | "bandwidth" => Ok(SweepParam::Bandwidth),
            "p" | "power" | "power_dbm" => Ok(SweepParam::PowerDbm),
            _ => Err(invalid(format!("unknown sweep parameter `{s}` (expected NT, chi, B or P)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    /// Recorded for reproducibility; the pipeline itself is deterministic.
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        if self.methods.is_empty() {
            return Err(invalid("sweep needs at least one method"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub method: Method,
    pub secrecy_rate: f64,
    pub sse: f64,
    pub see: f64,
    /// Shared first-stage work is charged to the first method that needs it.
    pub wall_s: f64,
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(invalid(format!("{THREADS_ENV} must be positive")));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

/// One row per `(value, method)`, ordered by value, then by the order methods were listed.
pub fn sweep(spec: &SweepSpec, cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let configs: Vec<ScenarioConfig> = spec.values.iter().map(|&v| spec.param.apply(cfg, v)).collect::<Result<_>>()?;
    let pool = thread_pool()?;
    let per_point: Vec<Vec<SweepRow>> = pool.install(|| {
        configs
            .into_par_iter()
            .zip(spec.values.par_iter())
            .map(|(c, &value)| {
                let mut runner = Runner::new(c)?;
                spec.methods
                    .iter()
                    .map(|&method| {
                        let t = Instant::now();
                        let run = runner.run(method)?;
                        Ok(SweepRow {
                            param: spec.param,
                            value,
                            method,
                            secrecy_rate: run.report.secrecy_rate,
                            sse: run.report.sse,
                            see: run.report.see,
                            wall_s: t.elapsed().as_secs_f64(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Sweep CSV; with `timing == false` the wall-clock column is written as 0 so
/// reruns are byte-identical.
pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[SweepRow], timing: bool) -> std::io::Result<()> {
    writeln!(out, "param,value,method,R_S_bpshz,SSE,SEE,wall_s")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.param.name(),
            fmt_sig(r.value),
            r.method,
            fmt_sig(r.secrecy_rate),
            fmt_sig(r.sse),
            fmt_sig(r.see),
            if timing { fmt_sig(r.wall_s) } else { "0".to_string() }
        )?;
    }
    Ok(())
}
