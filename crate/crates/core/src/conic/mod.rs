//! A small primal-dual interior-point solver for linear programs over products
//! of nonnegative orthants, second-order cones and PSD cones.
//!
//! Problems are posed as
//!
//! ```text
//! minimize    cᵀx
//! subject to  Σ a_ij x_j = b_i
//!             h + Fx ∈ K
//! ```
//!
//! where each cone block of `h + Fx` is described by affine expressions. PSD
//! blocks are symmetric matrices `C + Σ_j x_j F_j`; Hermitian constraints go in
//! through [`PsdBlock::add_hermitian`], which realifies an `n×n` Hermitian
//! matrix into the `2n×2n` symmetric matrix `[[Re, −Im], [Im, Re]]`.

mod cones;
mod ipm;

use std::collections::BTreeMap;

use crate::error::{invalid, Result};
use crate::C64;

pub use ipm::SolverSettings;

/// `constant + Σ coef·x_var`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn var(j: usize) -> Self {
        Self { constant: 0.0, terms: vec![(j, 1.0)] }
    }

    pub fn plus(mut self, j: usize, coef: f64) -> Self {
        self.terms.push((j, coef));
        self
    }

    pub fn offset(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }
}

/// Symmetric matrix `C + Σ_j x_j F_j` constrained to be PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    dim: usize,
    /// `(row, col, variable, coefficient)`; `None` marks a constant. Stored with `row ≤ col`.
    entries: Vec<(usize, usize, Option<usize>, f64)>,
}

impl PsdBlock {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `coef` (times `x_var`, if given) to entries `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, var: Option<usize>, coef: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, var, coef));
    }

    pub fn add_constant(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, None, v);
    }

    pub fn add_term(&mut self, i: usize, j: usize, var: usize, coef: f64) {
        self.add(i, j, Some(var), coef);
    }

    /// Adds `coef·x_var` to entry `(k, l)` of the Hermitian matrix embedded in
    /// this block (and the conjugate to `(l, k)`). Diagonal coefficients must be real.
    pub fn add_hermitian(&mut self, k: usize, l: usize, var: Option<usize>, coef: C64) {
        let n = self.dim / 2;
        debug_assert!(k < n && l < n);
        let (k, l, coef) = if k <= l { (k, l, coef) } else { (l, k, coef.conj()) };
        if coef.re != 0.0 {
            self.add(k, l, var, coef.re);
            self.add(n + k, n + l, var, coef.re);
        }
        if k != l && coef.im != 0.0 {
            self.add(k, n + l, var, -coef.im);
            self.add(l, n + k, var, coef.im);
        }
    }

    /// Evaluates the block at `x` as a dense symmetric matrix.
    pub fn eval(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for &(i, j, var, c) in &self.entries {
            let v = c * var.map_or(1.0, |k| x[k]);
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    num_vars: usize,
    objective: Vec<f64>,
    equalities: Vec<(Vec<(usize, f64)>, f64)>,
    nonneg: Vec<AffineExpr>,
    socs: Vec<Vec<AffineExpr>>,
    psd: Vec<PsdBlock>,
}

impl ConicProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            equalities: Vec::new(),
            nonneg: Vec::new(),
            socs: Vec::new(),
            psd: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Minimization objective coefficient.
    pub fn set_cost(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push((terms, rhs));
    }

    /// `expr ≥ 0`.
    pub fn add_nonneg(&mut self, expr: AffineExpr) {
        self.nonneg.push(expr);
    }

    /// `exprs[0] ≥ ‖exprs[1..]‖`.
    pub fn add_soc(&mut self, exprs: Vec<AffineExpr>) {
        self.socs.push(exprs);
    }

    /// `2·u·v ≥ ‖w‖²`, `u, v ≥ 0`, written as `(u + v, u − v, √2·w) ∈ SOC`.
    pub fn add_rotated_soc(&mut self, u: AffineExpr, v: AffineExpr, w: Vec<AffineExpr>) {
        let mut sum = u.clone();
        sum.constant += v.constant;
        sum.terms.extend(v.terms.iter().copied());
        let mut diff = u;
        diff.constant -= v.constant;
        diff.terms.extend(v.terms.iter().map(|&(j, a)| (j, -a)));
        let mut exprs = vec![sum, diff];
        for mut e in w {
            e.constant *= std::f64::consts::SQRT_2;
            e.terms.iter_mut().for_each(|t| t.1 *= std::f64::consts::SQRT_2);
            exprs.push(e);
        }
        self.socs.push(exprs);
    }

    pub fn add_psd(&mut self, block: PsdBlock) {
        self.psd.push(block);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if n == 0 {
            return Err(invalid("conic problem has no variables"));
        }
        let check = |j: usize| if j < n { Ok(()) } else { Err(invalid(format!("variable {j} out of range"))) };
        for (terms, _) in &self.equalities {
            terms.iter().try_for_each(|&(j, _)| check(j))?;
        }
        for e in self.nonneg.iter().chain(self.socs.iter().flatten()) {
            e.terms.iter().try_for_each(|&(j, _)| check(j))?;
        }
        if self.socs.iter().any(|s| s.len() < 2) {
            return Err(invalid("second-order cones need at least two rows"));
        }
        for b in &self.psd {
            if b.dim == 0 {
                return Err(invalid("empty PSD block"));
            }
            for &(i, j, var, _) in &b.entries {
                if j >= b.dim {
                    return Err(invalid(format!("PSD entry ({i},{j}) outside a {0}×{0} block", b.dim)));
                }
                if let Some(k) = var {
                    check(k)?;
                }
            }
        }
        if self.nonneg.is_empty() && self.socs.is_empty() && self.psd.is_empty() {
            return Err(invalid("conic problem has no cone constraints"));
        }
        Ok(())
    }

    /// Per-variable coefficient lists of a PSD block, duplicates merged.
    fn psd_columns(b: &PsdBlock) -> (nalgebra::DMatrix<f64>, Vec<(usize, Vec<(usize, usize, f64)>)>) {
        let mut constant = nalgebra::DMatrix::zeros(b.dim, b.dim);
        let mut cols: BTreeMap<usize, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
        for &(i, j, var, c) in &b.entries {
            match var {
                None => {
                    constant[(i, j)] += c;
                    if i != j {
                        constant[(j, i)] += c;
                    }
                }
                Some(k) => *cols.entry(k).or_default().entry((i, j)).or_insert(0.0) += c,
            }
        }
        let cols = cols
            .into_iter()
            .map(|(k, m)| (k, m.into_iter().filter(|(_, v)| *v != 0.0).map(|((i, j), v)| (i, j, v)).collect::<Vec<_>>()))
            .filter(|(_, e)| !e.is_empty())
            .collect();
        (constant, cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped early, but residuals and gap are within a looser tolerance.
    AlmostOptimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, Self::Optimal | Self::AlmostOptimal)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality constraints.
    pub y: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

pub fn solve_conic(p: &ConicProblem) -> Result<Solution> {
    solve_conic_with(p, &SolverSettings::default())
}

pub fn solve_conic_with(p: &ConicProblem, settings: &SolverSettings) -> Result<Solution> {
    p.validate()?;
    Ok(ipm::solve(p, settings))
}

#[cfg(test)]
mod tests;
