//! Rates, secrecy rate, SSE/SEE and the hardware power model.

use std::io::Write;

use crate::error::{invalid, Result};
use crate::scenario::{dbm_to_watts, ChannelSet};
use crate::{fmt_sig, CVector};

/// Static power draw of the transmitter hardware.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub baseband_w: f64,
    pub rf_chain_w: f64,
    pub ttd_w: f64,
    pub ps_w: f64,
    /// RF chains of the analog architecture.
    pub rf_chains: usize,
}

impl PowerModel {
    /// 25/23/20/15 dBm for baseband, RF chain, TTD and PS; one RF chain.
    pub fn standard() -> Self {
        Self {
            baseband_w: dbm_to_watts(25.0),
            rf_chain_w: dbm_to_watts(23.0),
            ttd_w: dbm_to_watts(20.0),
            ps_w: dbm_to_watts(15.0),
            rf_chains: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.baseband_w, self.rf_chain_w, self.ttd_w, self.ps_w];
        if all.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("power model entries must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Total consumption for transmit power `p`.
    pub fn consumed(&self, p: f64, arch: Architecture) -> f64 {
        match arch {
            Architecture::Hybrid { antennas, ttds } => {
                p + self.baseband_w
                    + self.rf_chains as f64 * self.rf_chain_w
                    + ttds as f64 * self.ttd_w
                    + antennas as f64 * self.ps_w
            }
            Architecture::FullyDigital { antennas } => p + self.baseband_w + antennas as f64 * self.rf_chain_w,
        }
    }
}

/// Hardware a method runs on; only matters for the SEE denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// TTD-then-PS front end; TTD-free baselines use `ttds: 0`.
    Hybrid { antennas: usize, ttds: usize },
    /// One RF chain per antenna, no TTDs or phase shifters.
    FullyDigital { antennas: usize },
}

/// Bob's and Eve's rates per carrier, `log2(1 + P_m|hᴴu|²/(Nσ²))`.
pub fn per_carrier_rates(channels: &ChannelSet, beams: &[CVector], powers: &[f64], noise_w: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(noise_w > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {noise_w}")));
    }
    let m = channels.carriers();
    if beams.len() != m || powers.len() != m {
        return Err(invalid(format!("{m} carriers but {} beamformers and {} powers", beams.len(), powers.len())));
    }
    if powers.iter().any(|&p| !(p >= 0.0)) {
        return Err(invalid("powers must be nonnegative"));
    }
    let nsig = channels.antennas() as f64 * noise_w;
    let mut rb = Vec::with_capacity(m);
    let mut re = Vec::with_capacity(m);
    for k in 0..m {
        let u = &beams[k];
        if u.len() != channels.antennas() {
            return Err(invalid("beamformer length differs from antenna count"));
        }
        rb.push((powers[k] * channels.bob[k].dotc(u).norm_sqr() / nsig).ln_1p() / std::f64::consts::LN_2);
        re.push((powers[k] * channels.eve[k].dotc(u).norm_sqr() / nsig).ln_1p() / std::f64::consts::LN_2);
    }
    Ok((rb, re))
}

pub fn secrecy_terms(rb: &[f64], re: &[f64]) -> Vec<f64> {
    rb.iter().zip(re).map(|(b, e)| (b - e).max(0.0)).collect()
}

/// `Σ_m [R_B,m − R_E,m]⁺`.
pub fn secrecy_rate(rb: &[f64], re: &[f64]) -> f64 {
    secrecy_terms(rb, re).iter().sum()
}

/// Secrecy rate averaged over the carriers.
pub fn sse(rs: f64, carriers: usize) -> f64 {
    rs / carriers as f64
}

pub fn see(sse: f64, transmit_power_w: f64, pm: &PowerModel, arch: Architecture) -> f64 {
    sse / pm.consumed(transmit_power_w, arch)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub powers: Vec<f64>,
    pub rate_bob: Vec<f64>,
    pub rate_eve: Vec<f64>,
    pub secrecy_terms: Vec<f64>,
    pub secrecy_rate: f64,
    pub sse: f64,
    pub see: f64,
    pub consumed_w: f64,
}

impl SecrecyReport {
    /// Scores beamformers and powers. `budget_w` is the configured transmit
    /// power `P`, which is what enters the SEE denominator.
    pub fn evaluate(
        channels: &ChannelSet,
        beams: &[CVector],
        powers: &[f64],
        noise_w: f64,
        budget_w: f64,
        pm: &PowerModel,
        arch: Architecture,
    ) -> Result<Self> {
        let total: f64 = powers.iter().sum();
        if total > budget_w * (1.0 + 1e-9) {
            return Err(invalid(format!("powers sum to {total} W, budget is {budget_w} W")));
        }
        let (rate_bob, rate_eve) = per_carrier_rates(channels, beams, powers, noise_w)?;
        let secrecy_terms = secrecy_terms(&rate_bob, &rate_eve);
        let secrecy_rate: f64 = secrecy_terms.iter().sum();
        let sse = sse(secrecy_rate, powers.len());
        let consumed_w = pm.consumed(budget_w, arch);
        Ok(Self {
            powers: powers.to_vec(),
            rate_bob,
            rate_eve,
            secrecy_terms,
            secrecy_rate,
            sse,
            see: sse / consumed_w,
            consumed_w,
        })
    }

    /// One row per carrier, then a summary row.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "carrier,P_m_W,R_B,R_E,secrecy")?;
        for m in 0..self.powers.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                m + 1,
                fmt_sig(self.powers[m]),
                fmt_sig(self.rate_bob[m]),
                fmt_sig(self.rate_eve[m]),
                fmt_sig(self.secrecy_terms[m])
            )?;
        }
        writeln!(out, "summary,R_S,SSE,SEE,consumed_W")?;
        writeln!(
            out,
            "summary,{},{},{},{}",
            fmt_sig(self.secrecy_rate),
            fmt_sig(self.sse),
            fmt_sig(self.see),
            fmt_sig(self.consumed_w)
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "R_S = {} bit/s/Hz  SSE = {} bit/s/Hz  SEE = {} bit/s/Hz/W  consumed = {} W  P_tx = {} W",
            fmt_sig(self.secrecy_rate),
            fmt_sig(self.sse),
            fmt_sig(self.see),
            fmt_sig(self.consumed_w),
            fmt_sig(self.powers.iter().sum())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use proptest::prelude::*;

    fn cv(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(a, b)| C64::new(a, b)))
    }

    fn toy() -> ChannelSet {
        ChannelSet::from_vectors(
            vec![cv(&[(1.0, 0.0), (0.0, 1.0)]), cv(&[(0.5, 0.5), (1.0, -1.0)])],
            vec![cv(&[(0.5, 0.0), (0.0, -0.5)]), cv(&[(0.2, 0.0), (0.1, 0.3)])],
        )
        .unwrap()
    }

    #[test]
    fn rates_zero_power() {
        let ch = toy();
        let u = vec![cv(&[(1.0, 0.0), (1.0, 0.0)]); 2];
        let (rb, re) = per_carrier_rates(&ch, &u, &[0.0, 0.0], 1.0).unwrap();
        assert!(rb.iter().chain(&re).all(|&r| r == 0.0));
    }

    #[test]
    fn unit_snr_gives_one_bit() {
        // |hᴴu|² = |1 − j|² = 2 on carrier 1, N = 2, σ² = 1 → P = 1 gives SNR 1
        let ch = toy();
        let u = vec![cv(&[(1.0, 0.0), (1.0, 0.0)]), cv(&[(1.0, 0.0), (1.0, 0.0)])];
        let (rb, _) = per_carrier_rates(&ch, &u, &[1.0, 0.0], 1.0).unwrap();
        assert!((rb[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn toy_rates_match_hand_values() {
        let ch = toy();
        let u = vec![cv(&[(1.0, 0.0), (1.0, 0.0)]), cv(&[(1.0, 0.0), (0.0, 1.0)])];
        let (rb, re) = per_carrier_rates(&ch, &u, &[0.4, 0.6], 0.25).unwrap();
        // carrier 1 Bob: conj(1)·1 + conj(j)·1 = 1 − j → |·|² = 2
        // carrier 1 Eve: 0.5 + conj(−0.5j) = 0.5 + 0.5j → 0.5
        // carrier 2 Bob: (0.5 − 0.5j) + (1 + j)·j = (0.5 − 0.5j) + (−1 + j) = −0.5 + 0.5j → 0.5
        // carrier 2 Eve: 0.2 + (0.1 − 0.3j)·j = 0.2 + 0.3 + 0.1j = 0.5 + 0.1j → 0.26
        let nsig: f64 = 2.0 * 0.25;
        let expect = [
            (1.0 + 0.4 * 2.0 / nsig).log2(),
            (1.0 + 0.4 * 0.5 / nsig).log2(),
            (1.0 + 0.6 * 0.5 / nsig).log2(),
            (1.0 + 0.6 * 0.26 / nsig).log2(),
        ];
        assert!((rb[0] - expect[0]).abs() < 1e-13);
        assert!((re[0] - expect[1]).abs() < 1e-13);
        assert!((rb[1] - expect[2]).abs() < 1e-13);
        assert!((re[1] - expect[3]).abs() < 1e-13);
    }

    #[test]
    fn rejects_nonpositive_noise() {
        let ch = toy();
        let u = vec![cv(&[(1.0, 0.0), (1.0, 0.0)]); 2];
        assert!(per_carrier_rates(&ch, &u, &[1.0, 1.0], 0.0).is_err());
        assert!(per_carrier_rates(&ch, &u, &[1.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn secrecy_rate_cases() {
        assert_eq!(secrecy_rate(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(secrecy_rate(&[1.5, 2.5], &[0.0, 0.0]), 4.0);
        assert!((secrecy_rate(&[3.0, 1.0], &[1.25, 2.0]) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn sse_cases() {
        assert_eq!(sse(10.0, 10), 1.0);
        assert!((sse(35.2, 10) - 3.52).abs() < 1e-12);
        assert_eq!(sse(2.0 * 7.3, 4), 2.0 * sse(7.3, 4));
    }

    #[test]
    fn see_denominator() {
        let pm = PowerModel::standard();
        assert!((pm.baseband_w - 0.316227766).abs() < 1e-9);
        assert!((pm.rf_chain_w - 0.199526231).abs() < 1e-9);
        assert!((pm.ttd_w - 0.1).abs() < 1e-12);
        assert!((pm.ps_w - 0.0316227766).abs() < 1e-9);
        let d = pm.consumed(0.1, Architecture::Hybrid { antennas: 64, ttds: 32 });
        let oracle = 0.1 + 0.316227766 + 0.199526231 + 32.0 * 0.1 + 64.0 * 0.0316227766;
        assert!((d - oracle).abs() < 1e-7);
        assert!((d - 5.84).abs() < 0.01);
        assert_eq!(see(0.0, 0.1, &pm, Architecture::Hybrid { antennas: 64, ttds: 32 }), 0.0);
        let fd = pm.consumed(0.1, Architecture::FullyDigital { antennas: 64 });
        assert!((fd - (0.1 + 0.316227766 + 64.0 * 0.199526231)).abs() < 1e-7);
    }

    #[test]
    fn report_csv_rows() {
        let ch = toy();
        let u = vec![cv(&[(1.0, 0.0), (1.0, 0.0)]); 2];
        let r = SecrecyReport::evaluate(
            &ch,
            &u,
            &[0.5, 0.5],
            0.1,
            1.0,
            &PowerModel::standard(),
            Architecture::Hybrid { antennas: 2, ttds: 1 },
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 + 2);
        assert!(SecrecyReport::evaluate(
            &ch,
            &u,
            &[0.8, 0.8],
            0.1,
            1.0,
            &PowerModel::standard(),
            Architecture::Hybrid { antennas: 2, ttds: 1 },
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn bob_rate_increases_with_power(p in 0.0f64..10.0, dp in 1e-3f64..1.0, g in 0.01f64..5.0) {
            let ch = ChannelSet::from_vectors(vec![cv(&[(g.sqrt(), 0.0)])], vec![cv(&[(0.0, 0.0)])]).unwrap();
            let u = vec![cv(&[(1.0, 0.0)])];
            let (a, _) = per_carrier_rates(&ch, &u, &[p], 0.3).unwrap();
            let (b, _) = per_carrier_rates(&ch, &u, &[p + dp], 0.3).unwrap();
            prop_assert!(b[0] > a[0]);
        }

        #[test]
        fn secrecy_clipped_when_eve_stronger(gb in 0.0f64..3.0, extra in 0.0f64..3.0, p in 0.0f64..5.0) {
            let ch = ChannelSet::from_vectors(
                vec![cv(&[(gb.sqrt(), 0.0)])],
                vec![cv(&[((gb + extra).sqrt(), 0.0)])],
            ).unwrap();
            let u = vec![cv(&[(1.0, 0.0)])];
            let (rb, re) = per_carrier_rates(&ch, &u, &[p], 0.7).unwrap();
            prop_assert_eq!(secrecy_rate(&rb, &re), 0.0);
        }

        #[test]
        fn report_invariants(
            gains in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.0f64..1.0), 1..6),
        ) {
            let m = gains.len();
            let bob = gains.iter().map(|g| cv(&[(g.0, 0.0)])).collect();
            let eve = gains.iter().map(|g| cv(&[(g.1, 0.0)])).collect();
            let ch = ChannelSet::from_vectors(bob, eve).unwrap();
            let u = vec![cv(&[(1.0, 0.0)]); m];
            let total: f64 = gains.iter().map(|g| g.2).sum::<f64>().max(1e-12);
            let powers: Vec<f64> = gains.iter().map(|g| g.2 / total).collect();
            let r = SecrecyReport::evaluate(&ch, &u, &powers, 0.05, 1.0, &PowerModel::standard(),
                Architecture::Hybrid { antennas: 1, ttds: 1 }).unwrap();
            let direct: f64 = r.rate_bob.iter().zip(&r.rate_eve).map(|(b, e)| (b - e).max(0.0)).sum();
            prop_assert!((r.secrecy_rate - direct).abs() < 1e-12);
            prop_assert!(r.rate_bob.iter().chain(&r.rate_eve).all(|&x| x >= 0.0));
            prop_assert!(r.secrecy_rate >= 0.0);
        }
    }
}
