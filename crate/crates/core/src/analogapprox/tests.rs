use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn unit_random(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| C64::from_polar(1.0, rng.random_range(-PI..PI)))
}

#[test]
fn peak_gives_flat_bound() {
    // u = 2fτ − ζ/π = 2 is a peak
    let s = surrogate_coeffs(1.0, 1.0, 0.0);
    assert_eq!(s, SurrogateCoeffs { a: 0.0, b: 1.0, c: 1.0 });
}

#[test]
fn valley_matches_curvature() {
    let s = surrogate_coeffs(0.5, 1.0, 0.0);
    assert!((s.a - 2.0 * PI * PI).abs() < 1e-12);
    assert_eq!(s.b, 0.5);
    assert_eq!(s.c, -1.0);
}

#[test]
fn falling_slope_uses_right_valley() {
    let s = surrogate_coeffs(0.3, 1.0, 0.0);
    assert!((s.b - 0.5).abs() < 1e-15);
    let a = -PI * (0.6 * PI).sin() / (0.3 - 0.5);
    assert!((s.a - a).abs() < 1e-12, "{}", s.a);
    assert!((s.a - 14.939).abs() < 1e-3);
    let c = (0.6 * PI).cos() - a * 0.04;
    assert!((s.c - c).abs() < 1e-12);
    assert!((s.c + 0.9066).abs() < 1e-4);
    for k in 0..=10_000 {
        let t = k as f64 / 10_000.0;
        assert!(s.eval(t) >= gamma(t, 1.0, 0.0) - 1e-12);
    }
}

#[test]
fn rising_slope_uses_left_valley() {
    let s = surrogate_coeffs(0.7, 1.0, 0.0);
    assert!((s.b - 0.5).abs() < 1e-15);
    assert!((s.deriv(0.7) - gamma_prime(0.7, 1.0, 0.0)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn majorizer_properties(f in 1e9f64..40e9, zeta in -PI..PI, frac in 0.0f64..1.0, chi in 1e-11f64..5e-9) {
        let tau = frac * chi;
        let s = surrogate_coeffs(tau, f, zeta);
        prop_assert!(s.a >= 0.0);
        prop_assert!((s.eval(tau) - gamma(tau, f, zeta)).abs() <= 1e-9);
        prop_assert!((s.deriv(tau) - gamma_prime(tau, f, zeta)).abs() <= 1e-7 * (1.0 + 2.0 * PI * f));
        if s.a > 0.0 && s.c != -1.0 {
            let k = 2.0 * f * s.b - zeta / PI;
            prop_assert!((k - k.round()).abs() < 1e-6 && k.round().rem_euclid(2.0) == 1.0);
        }
        for k in 0..=2_000 {
            let t = chi * k as f64 / 2_000.0;
            prop_assert!(s.eval(t) >= gamma(t, f, zeta) - 1e-9);
        }
    }
}

#[test]
fn ps_update_single_carrier_matches_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = FrequencyGrid::new(24e9, 8e9, 2).unwrap();
    let v = unit_random(&mut rng, 6);
    let targets = vec![v.clone(), v.clone()];
    let w = ps_update(&targets, &[0], &grid, &[0.0; 3], 2);
    for k in 0..6 {
        assert!((w[k] - v[k]).norm() < 1e-12);
    }
    assert!((v.dotc(&w).re - 6.0).abs() < 1e-12);
}

#[test]
fn ps_update_dominates_random_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = FrequencyGrid::new(24e9, 8e9, 4).unwrap();
    let targets: Vec<_> = (0..4).map(|_| unit_random(&mut rng, 8)).collect();
    let delays = [0.3e-9, 1.1e-9, 2.0e-9, 4.2e-9];
    let active = [0, 2, 3];
    let objective = |w: &CVector| -> f64 {
        active.iter().map(|&m| targets[m].dotc(&w.component_mul(&ttd_response(&delays, grid.carriers()[m], 2))).re).sum()
    };
    let w = ps_update(&targets, &active, &grid, &delays, 2);
    let best = objective(&w);
    for _ in 0..10_000 {
        assert!(objective(&unit_random(&mut rng, 8)) <= best + 1e-12);
    }
    // per entry, q_n w_n is real and equal to |q_n|
    let mut q = CVector::zeros(8);
    for &m in &active {
        q += targets[m].conjugate().component_mul(&ttd_response(&delays, grid.carriers()[m], 2));
    }
    for k in 0..8 {
        assert!(((q[k] * w[k]).re - q[k].norm()).abs() < 1e-12);
        assert!((q[k] * w[k]).im.abs() < 1e-12);
    }
}

#[test]
fn ps_update_zero_column_gives_unit_weight() {
    let grid = FrequencyGrid::new(24e9, 8e9, 2).unwrap();
    let mut v = CVector::from_element(2, C64::new(1.0, 0.0));
    v[1] = C64::new(0.0, 0.0);
    let w = ps_update(&[v.clone(), v], &[0], &grid, &[0.0, 0.0], 1);
    assert_eq!(w[1], C64::new(1.0, 0.0));
}

#[test]
fn flat_bounds_hold_the_delay() {
    // ψ = −1 ⇒ ζ = 0; τ = 0 is a peak of cos(2πfτ)
    let psi = CMatrix::from_element(1, 1, C64::new(-1.0, 0.0));
    let tau = ttd_update_step(&psi, &[1e9], &[1e-9], 5e-9);
    assert_eq!(tau, vec![1e-9]);
}

#[test]
fn single_term_goes_to_valley() {
    let f = 10e9;
    let psi = CMatrix::from_element(1, 1, C64::from_polar(2.0, 0.4));
    let zeta = 0.4 - PI;
    let tau = ttd_update_step(&psi, &[f], &[0.33e-9], 5e-9)[0];
    assert!((gamma(tau, f, zeta) + 1.0).abs() < 1e-12);
    // clipping at the upper budget
    let tau = ttd_update_step(&psi, &[f], &[0.33e-9], 0.3e-9)[0];
    assert_eq!(tau, 0.3e-9);
}

#[test]
fn bsum_descends_to_a_stationary_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let psi = CMatrix::from_fn(3, 4, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let freqs = [20e9, 23e9, 27e9];
        let chi = 5e-9;
        let mut tau = vec![rng.random_range(0.0..chi), rng.random_range(0.0..chi)];
        let mut obj = ttd_objective(&psi, &freqs, &tau);
        for _ in 0..MAX_BSUM_SWEEPS {
            tau = ttd_update_step(&psi, &freqs, &tau, chi);
            let next = ttd_objective(&psi, &freqs, &tau);
            assert!(next <= obj + 1e-9, "{next} > {obj}");
            obj = next;
        }
        assert!(tau.iter().all(|t| (0.0..=chi).contains(t)));
        // no small move along either delay improves by more than rounding
        for i in 0..2 {
            for d in [-1e-14, 1e-14] {
                let mut t = tau.clone();
                t[i] = (t[i] + d).clamp(0.0, chi);
                assert!(ttd_objective(&psi, &freqs, &t) >= obj - 1e-6);
            }
        }
    }
}

fn representable(rng: &mut ChaCha8Rng, grid: &FrequencyGrid, delays: &[f64], n: usize) -> (Vec<CVector>, AnalogBeamformer) {
    let bf = AnalogBeamformer::new(unit_random(rng, n), delays.to_vec()).unwrap();
    (bf.effective(grid).per_carrier, bf)
}

#[test]
fn zero_delay_targets_are_fit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = FrequencyGrid::new(24e9, 8e9, 5).unwrap();
    let (targets, _) = representable(&mut rng, &grid, &[0.0; 4], 8);
    let out = approximate(&targets, &[0, 1, 2, 3, 4], &grid, &[0.0; 4], 5e-9, &Tolerances::default()).unwrap();
    assert!(out.eta < 1e-12, "{}", out.eta);
}

#[test]
fn ao_descends_from_a_perturbed_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = FrequencyGrid::new(24e9, 8e9, 5).unwrap();
    let truth = [0.4e-9, 1.3e-9, 2.2e-9, 3.9e-9];
    let (targets, _) = representable(&mut rng, &grid, &truth, 8);
    let start: Vec<f64> = truth.iter().map(|t| t + 2e-12).collect();
    let active = [0, 1, 2, 3, 4];
    let out = approximate(&targets, &active, &grid, &start, 5e-9, &Tolerances::default()).unwrap();
    for r in out.trace.windows(2) {
        assert!(r[1].eta <= r[0].eta + 1e-6, "{:?}", out.trace);
    }
    assert!(out.eta < 0.5 * out.trace[0].eta);
    out.beamformer.check_delay_budget(5e-9).unwrap();
}

#[test]
fn ao_keeps_an_exact_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grid = FrequencyGrid::new(24e9, 8e9, 5).unwrap();
    let truth = [0.4e-9, 1.3e-9, 2.2e-9, 3.9e-9];
    let (targets, _) = representable(&mut rng, &grid, &truth, 8);
    let out = approximate(&targets, &[0, 1, 2, 3, 4], &grid, &truth, 5e-9, &Tolerances::default()).unwrap();
    assert!(out.eta <= 1e-6 * 5.0 * 8.0, "{}", out.eta);
}

#[test]
fn eta_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = FrequencyGrid::new(24e9, 8e9, 3).unwrap();
    let targets: Vec<_> = (0..3).map(|_| unit_random(&mut rng, 4)).collect();
    let bf = AnalogBeamformer::new(unit_random(&mut rng, 4), vec![1e-9, 2e-9]).unwrap();
    let eta = approximation_error(&targets, &[0, 2], &grid, &bf);
    let re: f64 = [0, 2].iter().map(|&m| targets[m].dotc(&bf.synthesize(grid.carriers()[m])).re).sum();
    assert!((eta - (2.0 * 2.0 * 4.0 - 2.0 * re)).abs() < 1e-12);
}

#[test]
fn bad_inputs_are_rejected() {
    let grid = FrequencyGrid::new(24e9, 8e9, 2).unwrap();
    let v = CVector::from_element(4, C64::new(1.0, 0.0));
    let tol = Tolerances::default();
    assert!(approximate(std::slice::from_ref(&v), &[0], &grid, &[0.0], 1e-9, &tol).is_err());
    assert!(approximate(&[v.clone(), v.clone()], &[0], &grid, &[0.0; 3], 1e-9, &tol).is_err());
    assert!(approximate(&[v.clone(), v], &[2], &grid, &[0.0], 1e-9, &tol).is_err());
}

#[test]
fn refinement_of_exact_semi_digital_is_a_noop() {
    let cfg = ScenarioConfig { antennas: 8, ttds: 4, subcarriers: 4, ..ScenarioConfig::desk() };
    let ch = cfg.channels().unwrap();
    let grid = cfg.grid().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (targets, bf) = representable(&mut rng, &grid, &[0.5e-9, 0.1e-9, 2e-9, 1e-9], 8);
    let direct = waterfill_for(&ch, &targets, cfg.power_budget_w, cfg.noise_power_per_carrier()).unwrap();
    let (alloc, _) = refine_power(&cfg, &ch, &bf).unwrap();
    assert_eq!(alloc.active, direct.active);
    assert_eq!(alloc.powers, direct.powers);
}

#[test]
fn refinement_beats_stale_powers() {
    let cfg = ScenarioConfig { antennas: 4, ttds: 2, subcarriers: 6, ..ScenarioConfig::desk() };
    let ch = cfg.channels().unwrap();
    let grid = cfg.grid().unwrap();
    let noise = cfg.noise_power_per_carrier();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let (targets, _) = representable(&mut rng, &grid, &[0.7e-9, 0.2e-9], 4);
        let stale = waterfill_for(&ch, &targets, cfg.power_budget_w, noise).unwrap();
        let (_, analog) = representable(&mut rng, &grid, &[1.0e-9, 0.4e-9], 4);
        let us = analog.effective(&grid).per_carrier;
        let stale_rate = secrecy_rate_of(&ch, &us, &stale.powers, noise);
        let (alloc, rate) = refine_power(&cfg, &ch, &analog).unwrap();
        assert!(rate >= stale_rate - 1e-12);
        // independent recomputation
        let gains: Vec<_> = us
            .iter()
            .zip(ch.bob.iter().zip(&ch.eve))
            .map(|(u, (hb, he))| crate::powalloc::GainPair::new(hb.dotc(u).norm_sqr(), he.dotc(u).norm_sqr()))
            .collect();
        let again = crate::powalloc::waterfill_secure(&gains, cfg.power_budget_w, noise, 4).unwrap();
        assert_eq!(alloc.powers, again.powers);
    }
}

#[test]
fn eta_trace_csv() {
    let mut buf = Vec::new();
    write_eta_trace_csv(&mut buf, &[EtaTraceRow { iteration: 1, eta: 0.25, dtau_ns: 1e-3 }]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "iteration,eta,dtau_ns\n1,0.25,0.001\n");
}
