//! Semi-digital beamformer design: alternating between secure water-filling
//! and a fractional-programming / SDP beamformer update, plus the fully-digital
//! baseline that drops the unit-modulus constraint.
//!
//! Inside the conic programs everything is expressed in SNR units: with
//! `κ = Nσ²` and `G = (P/κ)hhᴴ` the FP surrogate `2λ√x − λ²y` becomes
//! `2λ'√x' − λ'²y'` where `x' = 1 + tr(G_B V)`, `y' = 1 + tr(G_E V)`, `λ' = λ√κ`.

use std::io::Write;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::beamforming::SemiDigitalBeamformer;
use crate::conic::{solve_conic, AffineExpr, ConicProblem, PsdBlock, SolveStatus};
use crate::error::{Error, Result};
use crate::powalloc::{waterfill_secure, GainPair, PowerAllocation};
use crate::scenario::{ChannelSet, ScenarioConfig, Tolerances};
use crate::{fmt_sig, CMatrix, CVector, C64};

pub const MAX_FP_ITERATIONS: usize = 50;
pub const MAX_RANK_ONE_ITERATIONS: usize = 50;
pub const MAX_AO_ITERATIONS: usize = 30;

/// Data of one subcarrier's beamformer subproblem.
#[derive(Debug, Clone, Copy)]
pub struct CarrierProblem<'a> {
    pub h_bob: &'a CVector,
    pub h_eve: &'a CVector,
    pub power: f64,
    pub noise_w: f64,
}

impl CarrierProblem<'_> {
    pub fn antennas(&self) -> usize {
        self.h_bob.len()
    }

    fn kappa(&self) -> f64 {
        self.antennas() as f64 * self.noise_w
    }

    fn snr_scale(&self) -> f64 {
        self.power / self.kappa()
    }

    /// `(κ + P·hᴴVh)` for Bob and Eve.
    pub fn lifted_terms(&self, v: &CMatrix) -> (f64, f64) {
        (self.kappa() + self.power * lifted_gain(v, self.h_bob), self.kappa() + self.power * lifted_gain(v, self.h_eve))
    }

    /// `(κ + P|h_Bᴴv|²)/(κ + P|h_Eᴴv|²)`, the argument of the per-carrier secrecy log.
    pub fn ratio(&self, v: &CVector) -> f64 {
        let k = self.kappa();
        (k + self.power * self.h_bob.dotc(v).norm_sqr()) / (k + self.power * self.h_eve.dotc(v).norm_sqr())
    }

    pub fn lifted_ratio(&self, v: &CMatrix) -> f64 {
        let (x, y) = self.lifted_terms(v);
        x / y
    }

    /// FP surrogate `2λ√x − λ²y` in physical units.
    pub fn surrogate(&self, lambda: f64, v: &CMatrix) -> f64 {
        let (x, y) = self.lifted_terms(v);
        2.0 * lambda * x.max(0.0).sqrt() - lambda * lambda * y
    }
}

/// `hᴴVh`.
pub fn lifted_gain(v: &CMatrix, h: &CVector) -> f64 {
    h.dotc(&(v * h)).re
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Unit-modulus matched filter to Bob on every carrier.
pub fn init_semi_digital(channels: &ChannelSet) -> SemiDigitalBeamformer {
    SemiDigitalBeamformer { vectors: channels.bob.iter().map(phase_only).collect() }
}

fn phase_only(h: &CVector) -> CVector {
    h.map(|x| if x == C64::new(0.0, 0.0) { C64::new(1.0, 0.0) } else { x / x.norm() })
}

/// Optimal FP auxiliary `√x / y` for fixed `V`.
pub fn update_lambda(v: &CMatrix, cp: &CarrierProblem) -> f64 {
    let (x, y) = cp.lifted_terms(v);
    x.sqrt() / y
}

/// Variable layout of the lifted problems: `(p_kl, q_kl)` for `k < l`, then `s`.
struct Layout {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let pairs = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect();
        Self { n, pairs }
    }

    fn p(&self, i: usize) -> usize {
        2 * i
    }

    fn q(&self, i: usize) -> usize {
        2 * i + 1
    }

    fn s(&self) -> usize {
        2 * self.pairs.len()
    }

    fn base_vars(&self) -> usize {
        2 * self.pairs.len() + 1
    }

    /// `tr(GV)` with `diag V = 1` as an affine expression.
    fn trace_expr(&self, g: &CMatrix) -> AffineExpr {
        let mut e = AffineExpr::constant((0..self.n).map(|k| g[(k, k)].re).sum());
        for (i, &(k, l)) in self.pairs.iter().enumerate() {
            let glk = g[(l, k)];
            e = e.plus(self.p(i), 2.0 * glk.re).plus(self.q(i), -2.0 * glk.im);
        }
        e
    }

    fn v_block(&self) -> PsdBlock {
        let mut b = PsdBlock::new(2 * self.n);
        for k in 0..self.n {
            b.add_hermitian(k, k, None, C64::new(1.0, 0.0));
        }
        for (i, &(k, l)) in self.pairs.iter().enumerate() {
            b.add_hermitian(k, l, Some(self.p(i)), C64::new(1.0, 0.0));
            b.add_hermitian(k, l, Some(self.q(i)), C64::new(0.0, 1.0));
        }
        b
    }

    fn v_matrix(&self, x: &[f64]) -> CMatrix {
        let mut v = CMatrix::identity(self.n, self.n);
        for (i, &(k, l)) in self.pairs.iter().enumerate() {
            let z = C64::new(x[self.p(i)], x[self.q(i)]);
            v[(k, l)] = z;
            v[(l, k)] = z.conj();
        }
        v
    }

    /// Objective and SOC shared by the relaxed and rank-one programs.
    fn base_problem(&self, total_vars: usize, lambda_n: f64, cp: &CarrierProblem) -> ConicProblem {
        let c = cp.snr_scale();
        let gb = outer(cp.h_bob) * C64::new(c, 0.0);
        let ge = outer(cp.h_eve) * C64::new(c, 0.0);
        let mut prob = ConicProblem::new(total_vars);
        // minimize −2λ's + λ'²·tr(G_E V)
        prob.set_cost(self.s(), -2.0 * lambda_n);
        let te = self.trace_expr(&ge);
        for &(j, a) in &te.terms {
            prob.set_cost(j, lambda_n * lambda_n * a);
        }
        // s² ≤ 1 + tr(G_B V)  ⇔  (x' + 1, x' − 1, 2s) ∈ SOC
        let tb = self.trace_expr(&gb);
        prob.add_soc(vec![tb.clone().offset(2.0), tb, AffineExpr::constant(0.0).plus(self.s(), 2.0)]);
        if self.n > 1 {
            prob.add_psd(self.v_block());
        }
        prob
    }
}

fn solver_error(status: SolveStatus, what: &str) -> Error {
    Error::Solver { status, detail: what.to_string() }
}

#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub v: CMatrix,
    /// Surrogate value `2λ√x − λ²y` at `v`.
    pub objective: f64,
    pub status: SolveStatus,
}

/// Per-carrier SDR of the FP subproblem for fixed `λ` (no rank constraint).
pub fn solve_relaxed(lambda: f64, cp: &CarrierProblem) -> Result<RelaxedSolution> {
    let layout = Layout::new(cp.antennas());
    let lambda_n = lambda * cp.kappa().sqrt();
    let prob = layout.base_problem(layout.base_vars(), lambda_n, cp);
    let sol = solve_conic(&prob)?;
    if !sol.status.is_usable() {
        return Err(solver_error(sol.status, "relaxed beamformer program"));
    }
    let v = layout.v_matrix(&sol.x);
    Ok(RelaxedSolution { objective: cp.surrogate(lambda, &v), v, status: sol.status })
}

#[derive(Debug, Clone)]
pub struct RankOneStep {
    pub v: CMatrix,
    /// Top-eigenvector projector of the frozen `V`, the optimal `A`.
    pub a: CMatrix,
    pub b: CMatrix,
    pub varpi: f64,
    pub objective: f64,
    pub status: SolveStatus,
}

fn top_eigenpair(v: &CMatrix) -> (f64, CVector) {
    let eig = SymmetricEigen::new(v.clone());
    let (i, &lmax) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    (lmax, eig.eigenvectors.column(i).into_owned())
}

/// Eigenvalues in decreasing order.
pub fn eigenvalues_desc(v: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(v.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// `λ₂/λ₁`, zero for `1×1`.
pub fn rank_one_gap(v: &CMatrix) -> f64 {
    let e = eigenvalues_desc(v);
    if e.len() < 2 || e[0] <= 0.0 {
        0.0
    } else {
        e[1].max(0.0) / e[0]
    }
}

/// One convex step of the rank-one lifting with `V_prev` frozen in the bilinear
/// constraint `tr(V_prev·A) − 2ϖ − tr(B) ≥ 0`.
///
/// For fixed `V_prev` the best `A` (PSD, unit trace) is the projector on its top
/// eigenvector, so `tr(V_prev·A)` is replaced by `λ_max(V_prev)`.
pub fn rankone_iteration(v_prev: &CMatrix, lambda: f64, cp: &CarrierProblem) -> Result<RankOneStep> {
    let n = cp.antennas();
    let layout = Layout::new(n);
    let np = layout.pairs.len();
    let base = layout.base_vars();
    let varpi = base;
    let bd = |k: usize| base + 1 + k;
    let bp = |i: usize| base + 1 + n + 2 * i;
    let bq = |i: usize| base + 1 + n + 2 * i + 1;
    let total = base + 1 + n + 2 * np;

    let (lmax, u) = top_eigenpair(v_prev);
    let lambda_n = lambda * cp.kappa().sqrt();
    let mut prob = layout.base_problem(total, lambda_n, cp);

    let mut lp = AffineExpr::constant(lmax).plus(varpi, -2.0);
    for k in 0..n {
        lp = lp.plus(bd(k), -1.0);
    }
    prob.add_nonneg(lp);

    let one = C64::new(1.0, 0.0);
    let j = C64::new(0.0, 1.0);
    let mut b_blk = PsdBlock::new(2 * n);
    let mut slack = PsdBlock::new(2 * n);
    for k in 0..n {
        b_blk.add_hermitian(k, k, Some(bd(k)), one);
        slack.add_hermitian(k, k, Some(bd(k)), one);
        slack.add_hermitian(k, k, None, -one);
        slack.add_hermitian(k, k, Some(varpi), one);
    }
    for (i, &(k, l)) in layout.pairs.iter().enumerate() {
        b_blk.add_hermitian(k, l, Some(bp(i)), one);
        b_blk.add_hermitian(k, l, Some(bq(i)), j);
        slack.add_hermitian(k, l, Some(bp(i)), one);
        slack.add_hermitian(k, l, Some(bq(i)), j);
        slack.add_hermitian(k, l, Some(layout.p(i)), -one);
        slack.add_hermitian(k, l, Some(layout.q(i)), -j);
    }
    prob.add_psd(b_blk);
    prob.add_psd(slack);

    let sol = solve_conic(&prob)?;
    if !sol.status.is_usable() {
        return Err(solver_error(sol.status, "rank-one lifting step"));
    }
    let v = layout.v_matrix(&sol.x);
    let mut b = CMatrix::zeros(n, n);
    for k in 0..n {
        b[(k, k)] = C64::new(sol.x[bd(k)], 0.0);
    }
    for (i, &(k, l)) in layout.pairs.iter().enumerate() {
        let z = C64::new(sol.x[bp(i)], sol.x[bq(i)]);
        b[(k, l)] = z;
        b[(l, k)] = z.conj();
    }
    Ok(RankOneStep { objective: cp.surrogate(lambda, &v), v, a: outer(&u), b, varpi: sol.x[varpi], status: sol.status })
}

/// Principal eigenvector, scaled to norm `√N`, then projected to unit modulus.
pub fn extract_rank_one(v: &CMatrix) -> CVector {
    let n = v.nrows();
    let (_, u) = top_eigenpair(v);
    let u = u * C64::new((n as f64).sqrt(), 0.0);
    phase_only(&u)
}

/// Why a beamformer run stopped short of its nominal convergence test.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub fp_cap_reached: bool,
    pub rank_one_cap_reached: bool,
    /// Rank-one steps rejected for infeasibility, solver failure or an objective drop.
    pub rank_one_rejections: usize,
    pub solver_failures: usize,
    /// Final `λ₂/λ₁` above `1e-3`.
    pub not_rank_one: bool,
    pub messages: Vec<String>,
}

impl Diagnostics {
    fn merge(&mut self, o: &Diagnostics) {
        self.fp_cap_reached |= o.fp_cap_reached;
        self.rank_one_cap_reached |= o.rank_one_cap_reached;
        self.rank_one_rejections += o.rank_one_rejections;
        self.solver_failures += o.solver_failures;
        self.not_rank_one |= o.not_rank_one;
        self.messages.extend(o.messages.iter().cloned());
    }
}

#[derive(Debug, Clone)]
pub struct BeamformerOutcome {
    pub v: CVector,
    pub lifted: CMatrix,
    pub lambda: f64,
    /// `x/y` of the lifted iterate after every FP iteration.
    pub ratio_trace: Vec<f64>,
    pub max_dlambda: f64,
    pub max_dv: f64,
    pub eig_ratio: f64,
    pub diagnostics: Diagnostics,
}

pub const RANK_ONE_TOL: f64 = 1e-3;

/// Per-carrier beamformer: fractional-programming outer loop on `λ`, rank-one lifting inner loop.
pub fn optimize_beamformer(cp: &CarrierProblem, tol: &Tolerances, v_init: &CVector) -> BeamformerOutcome {
    let mut diag = Diagnostics::default();
    let mut v_cur = outer(v_init);
    let mut lambda = update_lambda(&v_cur, cp);
    let mut ratio_trace = vec![cp.lifted_ratio(&v_cur)];
    let mut last_dlambda = 0.0;
    let mut max_dv: f64 = 0.0;
    let mut converged = false;

    for _ in 0..MAX_FP_ITERATIONS {
        let relaxed = match solve_relaxed(lambda, cp) {
            Ok(r) => r,
            Err(e) => {
                diag.solver_failures += 1;
                diag.messages.push(format!("relaxed program failed: {e}"));
                converged = true;
                break;
            }
        };
        let mut v = relaxed.v;
        let mut obj = relaxed.objective;
        let mut inner_done = false;
        for _ in 0..MAX_RANK_ONE_ITERATIONS {
            match rankone_iteration(&v, lambda, cp) {
                Ok(step) if step.objective >= obj - 1e-6 * obj.abs().max(1.0) => {
                    let dv = (&step.v - &v).norm();
                    max_dv = max_dv.max(dv);
                    v = step.v;
                    obj = step.objective;
                    if dv <= tol.lifted {
                        inner_done = true;
                        break;
                    }
                }
                Ok(step) => {
                    diag.rank_one_rejections += 1;
                    diag.messages.push(format!("rank-one step lowered the objective from {obj:.6e} to {:.6e}", step.objective));
                    inner_done = true;
                    break;
                }
                Err(e) => {
                    diag.rank_one_rejections += 1;
                    diag.messages.push(format!("rank-one step rejected: {e}"));
                    inner_done = true;
                    break;
                }
            }
        }
        if !inner_done {
            diag.rank_one_cap_reached = true;
        }
        let new_lambda = update_lambda(&v, cp);
        last_dlambda = (new_lambda - lambda).abs();
        lambda = new_lambda;
        v_cur = v;
        ratio_trace.push(cp.lifted_ratio(&v_cur));
        if last_dlambda <= tol.lambda {
            converged = true;
            break;
        }
    }
    if !converged {
        diag.fp_cap_reached = true;
    }
    let eig_ratio = rank_one_gap(&v_cur);
    if eig_ratio > RANK_ONE_TOL {
        diag.not_rank_one = true;
    }
    BeamformerOutcome {
        v: extract_rank_one(&v_cur),
        lifted: v_cur,
        lambda,
        ratio_trace,
        max_dlambda: last_dlambda,
        max_dv,
        eig_ratio,
        diagnostics: diag,
    }
}

/// One row of an alternating-optimization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoTraceRow {
    pub iteration: usize,
    pub secrecy_rate: f64,
    pub max_dlambda: f64,
    pub max_dv: f64,
}

pub fn write_ao_trace_csv<W: Write>(out: &mut W, rows: &[AoTraceRow]) -> std::io::Result<()> {
    writeln!(out, "iteration,R_S_tilde,max_dlambda,max_dV_fro")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.iteration, fmt_sig(r.secrecy_rate), fmt_sig(r.max_dlambda), fmt_sig(r.max_dv))?;
    }
    Ok(())
}

fn gains_of(channels: &ChannelSet, vs: &[CVector]) -> Vec<GainPair> {
    channels
        .bob
        .iter()
        .zip(&channels.eve)
        .zip(vs)
        .map(|((hb, he), v)| GainPair::new(hb.dotc(v).norm_sqr(), he.dotc(v).norm_sqr()))
        .collect()
}

/// `Σ_m [log2 ratio]⁺` for given beamformers and powers.
pub fn secrecy_rate_of(channels: &ChannelSet, vs: &[CVector], powers: &[f64], noise_w: f64) -> f64 {
    crate::powalloc::secrecy_objective(&gains_of(channels, vs), powers, noise_w, channels.antennas())
}

/// Water-filling over the gains produced by `vs`.
pub fn waterfill_for(channels: &ChannelSet, vs: &[CVector], budget_w: f64, noise_w: f64) -> Result<PowerAllocation> {
    waterfill_secure(&gains_of(channels, vs), budget_w, noise_w, channels.antennas())
}

#[derive(Debug, Clone)]
pub struct SemiDigitalSolution {
    pub active: Vec<usize>,
    pub powers: Vec<f64>,
    pub beamformer: SemiDigitalBeamformer,
    /// `R̃_S` of the returned beamformers and powers.
    pub secrecy_rate: f64,
    pub trace: Vec<AoTraceRow>,
    pub eig_ratios: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Alternates secure water-filling with the per-carrier beamformer optimization.
///
/// A new `v_m` replaces the old one only when it does not lower the carrier's
/// secrecy ratio at the current power, so `R̃_S` never decreases. Carriers
/// left without power are re-aimed with a probe power `P/M`.
pub fn semi_digital_solve(cfg: &ScenarioConfig, channels: &ChannelSet) -> Result<SemiDigitalSolution> {
    let noise = cfg.noise_power_per_carrier();
    let budget = cfg.power_budget_w;
    let tol = cfg.tolerances;
    let mut vs = init_semi_digital(channels).vectors;
    let mut alloc = waterfill_for(channels, &vs, budget, noise)?;
    let mut rate = secrecy_rate_of(channels, &vs, &alloc.powers, noise);
    let mut trace = vec![AoTraceRow { iteration: 0, secrecy_rate: rate, max_dlambda: 0.0, max_dv: 0.0 }];
    let mut diag = Diagnostics::default();
    let mut eig_ratios = vec![0.0; channels.carriers()];
    let probe = budget / channels.carriers() as f64;

    for t in 1..=MAX_AO_ITERATIONS {
        alloc = waterfill_for(channels, &vs, budget, noise)?;
        let power_of = |m: usize| if alloc.powers[m] > 0.0 { alloc.powers[m] } else { probe };
        let outcomes: Vec<(usize, BeamformerOutcome)> = (0..channels.carriers())
            .into_par_iter()
            .map(|m| {
                let cp = CarrierProblem { h_bob: &channels.bob[m], h_eve: &channels.eve[m], power: power_of(m), noise_w: noise };
                (m, optimize_beamformer(&cp, &tol, &vs[m]))
            })
            .collect();
        let mut dl: f64 = 0.0;
        let mut dv: f64 = 0.0;
        for (m, out) in outcomes {
            let cp = CarrierProblem { h_bob: &channels.bob[m], h_eve: &channels.eve[m], power: power_of(m), noise_w: noise };
            dl = dl.max(out.max_dlambda);
            dv = dv.max(out.max_dv);
            eig_ratios[m] = out.eig_ratio;
            diag.merge(&out.diagnostics);
            if cp.ratio(&out.v) >= cp.ratio(&vs[m]) {
                vs[m] = out.v;
            }
        }
        let new_rate = secrecy_rate_of(channels, &vs, &alloc.powers, noise);
        trace.push(AoTraceRow { iteration: t, secrecy_rate: new_rate, max_dlambda: dl, max_dv: dv });
        let done = (new_rate - rate).abs() <= tol.ao;
        rate = new_rate;
        if done {
            break;
        }
    }
    let last = waterfill_for(channels, &vs, budget, noise)?;
    let last_rate = secrecy_rate_of(channels, &vs, &last.powers, noise);
    if last_rate >= rate {
        alloc = last;
        rate = last_rate;
    }
    Ok(SemiDigitalSolution {
        active: alloc.active.clone(),
        powers: alloc.powers,
        beamformer: SemiDigitalBeamformer { vectors: vs },
        secrecy_rate: rate,
        trace,
        eig_ratios,
        diagnostics: diag,
    })
}

/// Dominant generalized eigenvector of `(I + G_B, I + G_E)`, scaled to norm `√N`.
pub fn generalized_beamformer(cp: &CarrierProblem) -> CVector {
    let n = cp.antennas();
    let c = C64::new(cp.snr_scale(), 0.0);
    let eye = CMatrix::identity(n, n);
    let a = &eye + outer(cp.h_bob) * c;
    let b = &eye + outer(cp.h_eve) * c;
    let l = b.cholesky().expect("I + G_E is positive definite").l();
    let linv = l.clone().solve_lower_triangular(&eye).expect("triangular factor is invertible");
    let m = &linv * a * linv.adjoint();
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let (_, y) = top_eigenpair(&m);
    let v = linv.adjoint() * y;
    let norm = v.norm();
    v * C64::new((n as f64).sqrt() / norm, 0.0)
}

#[derive(Debug, Clone)]
pub struct FullyDigitalSolution {
    pub powers: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub secrecy_rate: f64,
    pub trace: Vec<AoTraceRow>,
}

/// Alternates water-filling with the exact per-carrier generalized eigenvector.
/// Carriers without power are re-aimed with a probe power `P/M`; their secrecy
/// term is zero either way, so the objective cannot drop.
pub fn fully_digital_solve(cfg: &ScenarioConfig, channels: &ChannelSet) -> Result<FullyDigitalSolution> {
    let noise = cfg.noise_power_per_carrier();
    let budget = cfg.power_budget_w;
    let m = channels.carriers();
    let probe = budget / m as f64;
    let mut vs = init_semi_digital(channels).vectors;
    let mut alloc = waterfill_for(channels, &vs, budget, noise)?;
    let mut rate = secrecy_rate_of(channels, &vs, &alloc.powers, noise);
    let mut trace = vec![AoTraceRow { iteration: 0, secrecy_rate: rate, max_dlambda: 0.0, max_dv: 0.0 }];
    for t in 1..=MAX_AO_ITERATIONS {
        let mut dv: f64 = 0.0;
        for k in 0..m {
            let power = if alloc.powers[k] > 0.0 { alloc.powers[k] } else { probe };
            let cp = CarrierProblem { h_bob: &channels.bob[k], h_eve: &channels.eve[k], power, noise_w: noise };
            let v = generalized_beamformer(&cp);
            if cp.ratio(&v) >= cp.ratio(&vs[k]) {
                dv = dv.max((outer(&v) - outer(&vs[k])).norm());
                vs[k] = v;
            }
        }
        alloc = waterfill_for(channels, &vs, budget, noise)?;
        let new_rate = secrecy_rate_of(channels, &vs, &alloc.powers, noise);
        trace.push(AoTraceRow { iteration: t, secrecy_rate: new_rate, max_dlambda: 0.0, max_dv: dv });
        let done = (new_rate - rate).abs() <= cfg.tolerances.ao;
        rate = new_rate;
        if done {
            break;
        }
    }
    Ok(FullyDigitalSolution { powers: alloc.powers, vectors: vs, secrecy_rate: rate, trace })
}
