//! Secure wideband near-field beamfocusing with TTD/PS hybrid arrays.
//!
//! The pipeline goes: build a [`scenario::ScenarioConfig`], synthesize channels,
//! pick a method from [`experiments::Method`] and score it with [`metrics`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

pub mod analogapprox;
pub mod bala;
pub mod beamforming;
pub mod cli;
pub mod conic;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod powalloc;
pub mod scenario;
pub mod semidigital;

pub use error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CVector = nalgebra::DVector<C64>;
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Formats with 9 significant digits; used for every CSV we emit.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let s = format!("{x:.8e}");
    // round-trip through parse drops trailing zeros and picks plain notation when short
    let v: f64 = s.parse().unwrap();
    let e = v.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        let t = format!("{v:.decimals$}");
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        let (mantissa, exp) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}
