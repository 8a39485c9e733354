//! Infeasible-start primal-dual path following with Nesterov–Todd scaling and
//! Mehrotra's predictor-corrector, in the style of CVXOPT's `coneqp` with `P = 0`.
//!
//! Internally the problem is `min cᵀx  s.t. Ax = b, Gx + s = h, s ∈ K`, with
//! `G = −F` relative to the public `h + Fx ∈ K` form.

use nalgebra::{DMatrix, DVector};

use super::cones::{ConeVec, Dims, Scaling};
use super::{ConicProblem, Solution, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    /// Looser bound used to salvage a stalled run as `AlmostOptimal`.
    pub salvage_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iterations: 100, feastol: 1e-8, abstol: 1e-8, reltol: 1e-8, salvage_tol: 1e-6 }
    }
}

const STEP: f64 = 0.99;

type Sparse = Vec<(usize, f64)>;

struct Compiled {
    n: usize,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    dims: Dims,
    h: ConeVec,
    lp_g: Vec<Sparse>,
    soc_g: Vec<Vec<Sparse>>,
    /// Per PSD block, per touched variable, upper-triangle entries of `G_j`.
    psd_g: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
}

fn negate(terms: &[(usize, f64)]) -> Sparse {
    terms.iter().map(|&(j, a)| (j, -a)).collect()
}

impl Compiled {
    fn new(p: &ConicProblem) -> Self {
        let n = p.num_vars;
        let c = DVector::from_vec(p.objective.clone());
        let mut a = DMatrix::zeros(p.equalities.len(), n);
        let mut b = DVector::zeros(p.equalities.len());
        for (i, (terms, rhs)) in p.equalities.iter().enumerate() {
            for &(j, v) in terms {
                a[(i, j)] += v;
            }
            b[i] = *rhs;
        }
        let dims =
            Dims { lp: p.nonneg.len(), soc: p.socs.iter().map(Vec::len).collect(), psd: p.psd.iter().map(|b| b.dim).collect() };
        let mut h = ConeVec::zeros(&dims);
        for (i, e) in p.nonneg.iter().enumerate() {
            h.lp[i] = e.constant;
        }
        for (k, s) in p.socs.iter().enumerate() {
            for (i, e) in s.iter().enumerate() {
                h.soc[k][i] = e.constant;
            }
        }
        let mut psd_g = Vec::new();
        for (k, blk) in p.psd.iter().enumerate() {
            let (constant, cols) = ConicProblem::psd_columns(blk);
            h.psd[k] = constant;
            psd_g.push(cols.into_iter().map(|(j, e)| (j, e.into_iter().map(|(r, c, v)| (r, c, -v)).collect())).collect());
        }
        Self {
            n,
            c,
            a,
            b,
            dims,
            h,
            lp_g: p.nonneg.iter().map(|e| negate(&e.terms)).collect(),
            soc_g: p.socs.iter().map(|s| s.iter().map(|e| negate(&e.terms)).collect()).collect(),
            psd_g,
        }
    }

    fn g_mul(&self, x: &DVector<f64>) -> ConeVec {
        let dot = |row: &Sparse| row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        let mut r = ConeVec::zeros(&self.dims);
        for (i, row) in self.lp_g.iter().enumerate() {
            r.lp[i] = dot(row);
        }
        for (k, rows) in self.soc_g.iter().enumerate() {
            for (i, row) in rows.iter().enumerate() {
                r.soc[k][i] = dot(row);
            }
        }
        for (k, cols) in self.psd_g.iter().enumerate() {
            let m = &mut r.psd[k];
            for (j, entries) in cols {
                let xj = x[*j];
                for &(r_, c_, v) in entries {
                    m[(r_, c_)] += v * xj;
                    if r_ != c_ {
                        m[(c_, r_)] += v * xj;
                    }
                }
            }
        }
        r
    }

    fn gt_mul(&self, z: &ConeVec) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (i, row) in self.lp_g.iter().enumerate() {
            for &(j, a) in row {
                out[j] += a * z.lp[i];
            }
        }
        for (k, rows) in self.soc_g.iter().enumerate() {
            for (i, row) in rows.iter().enumerate() {
                for &(j, a) in row {
                    out[j] += a * z.soc[k][i];
                }
            }
        }
        for (k, cols) in self.psd_g.iter().enumerate() {
            let m = &z.psd[k];
            for (j, entries) in cols {
                out[*j] += entries
                    .iter()
                    .map(|&(r, c, v)| if r == c { v * m[(r, c)] } else { v * (m[(r, c)] + m[(c, r)]) })
                    .sum::<f64>();
            }
        }
        out
    }

    /// `GᵀHG` for the current scaling.
    fn schur(&self, w: &Scaling) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.lp_g.iter().enumerate() {
            let d = 1.0 / (w.lp_w[i] * w.lp_w[i]);
            for &(j, a) in row {
                for &(k, b) in row {
                    m[(j, k)] += d * a * b;
                }
            }
        }
        for (k, rows) in self.soc_g.iter().enumerate() {
            let mut vars: Vec<usize> = rows.iter().flatten().map(|&(j, _)| j).collect();
            vars.sort_unstable();
            vars.dedup();
            let mut g = DMatrix::zeros(rows.len(), vars.len());
            for (i, row) in rows.iter().enumerate() {
                for &(j, a) in row {
                    let c = vars.binary_search(&j).unwrap();
                    g[(i, c)] += a;
                }
            }
            let y = w.soc[k].matrix_inv() * g;
            let gram = y.transpose() * &y;
            for (a, &ja) in vars.iter().enumerate() {
                for (b, &jb) in vars.iter().enumerate() {
                    m[(ja, jb)] += gram[(a, b)];
                }
            }
        }
        for (k, cols) in self.psd_g.iter().enumerate() {
            let sc = &w.psd[k];
            let q = sc.rinv.transpose() * &sc.rinv;
            let dim = q.nrows();
            let mut t = DMatrix::zeros(dim, dim);
            for (bi, (jb, eb)) in cols.iter().enumerate() {
                t.fill(0.0);
                for &(r, c, v) in eb {
                    let qr = q.column(r);
                    let qc = q.column(c);
                    t.ger(v, &qr, &qc, 1.0);
                    if r != c {
                        t.ger(v, &qc, &qr, 1.0);
                    }
                }
                for (ja, ea) in cols.iter().take(bi + 1) {
                    let val: f64 = ea.iter().map(|&(r, c, v)| if r == c { v * t[(r, c)] } else { 2.0 * v * t[(r, c)] }).sum();
                    m[(*ja, *jb)] += val;
                    if ja != jb {
                        m[(*jb, *ja)] += val;
                    }
                }
            }
        }
        m
    }
}

/// Factorization of `[M Aᵀ; A 0]`.
enum Kkt {
    Chol { m: nalgebra::Cholesky<f64, nalgebra::Dyn>, a: DMatrix<f64>, s: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> },
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, usize),
}

impl Kkt {
    fn new(m: DMatrix<f64>, a: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let p = a.nrows();
        if let Some(ch) = m.clone().cholesky() {
            if p == 0 {
                return Some(Kkt::Chol { m: ch, a: a.clone(), s: None });
            }
            let minv_at = ch.solve(&a.transpose());
            if let Some(sch) = (a * minv_at).cholesky() {
                return Some(Kkt::Chol { m: ch, a: a.clone(), s: Some(sch) });
            }
        }
        let mut k = DMatrix::zeros(n + p, n + p);
        k.view_mut((0, 0), (n, n)).copy_from(&m);
        k.view_mut((n, 0), (p, n)).copy_from(a);
        k.view_mut((0, n), (n, p)).copy_from(&a.transpose());
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Kkt::Lu(lu, n))
    }

    fn solve(&self, rx: &DVector<f64>, ry: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        match self {
            Kkt::Chol { m, a, s } => match s {
                None => Some((m.solve(rx), DVector::zeros(0))),
                Some(s) => {
                    let minv_rx = m.solve(rx);
                    let dy = s.solve(&(a * &minv_rx - ry));
                    let dx = m.solve(&(rx - a.transpose() * &dy));
                    Some((dx, dy))
                }
            },
            Kkt::Lu(lu, n) => {
                let mut rhs = DVector::zeros(rx.len() + ry.len());
                rhs.rows_mut(0, *n).copy_from(rx);
                rhs.rows_mut(*n, ry.len()).copy_from(ry);
                let sol = lu.solve(&rhs)?;
                Some((sol.rows(0, *n).into_owned(), sol.rows(*n, ry.len()).into_owned()))
            }
        }
    }
}

struct Newton<'a> {
    prob: &'a Compiled,
    w: &'a Scaling,
    kkt: Kkt,
}

impl Newton<'_> {
    /// Solves
    /// `AᵀΔy + GᵀΔz = bx`, `AΔx = by`, `GΔx + Δs = bz`, `λ∘(WΔz + W⁻ᵀΔs) = ds`.
    fn solve_once(&self, bx: &DVector<f64>, by: &DVector<f64>, bz: &ConeVec, ds: &ConeVec) -> Option<Step> {
        let p = self.prob;
        let u = self.w.lambda_inv_product(ds);
        let mut bz2 = bz.clone();
        bz2.axpy(-1.0, &self.w.apply_wt(&u));
        let rx = bx + p.gt_mul(&self.w.apply_h(&bz2));
        let (dx, dy) = self.kkt.solve(&rx, by)?;
        if !dx.iter().chain(dy.iter()).all(|v| v.is_finite()) {
            return None;
        }
        let mut gdx = p.g_mul(&dx);
        gdx.axpy(-1.0, &bz2);
        let dz = self.w.apply_h(&gdx);
        let wdz = self.w.apply_w(&dz);
        let dsv = self.w.apply_wt(&u.sub(&wdz));
        Some(Step { dx, dy, dz, ds: dsv })
    }

    /// [`Self::solve_once`] plus one round of iterative refinement on the full system.
    fn solve(&self, bx: &DVector<f64>, by: &DVector<f64>, bz: &ConeVec, ds: &ConeVec) -> Option<Step> {
        let p = self.prob;
        let mut st = self.solve_once(bx, by, bz, ds)?;
        let ex = bx - p.a.transpose() * &st.dy - p.gt_mul(&st.dz);
        let ey = by - &p.a * &st.dx;
        let mut ez = bz.sub(&p.g_mul(&st.dx));
        ez.axpy(-1.0, &st.ds);
        let mut scaled = self.w.apply_w(&st.dz);
        scaled.axpy(1.0, &self.w.apply_winv_t(&st.ds));
        let es = ds.sub(&self.w.lambda.jordan(&scaled));
        if let Some(c) = self.solve_once(&ex, &ey, &ez, &es) {
            st.dx += c.dx;
            st.dy += c.dy;
            st.dz.axpy(1.0, &c.dz);
            st.ds.axpy(1.0, &c.ds);
        }
        Some(st)
    }
}

struct Step {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: ConeVec,
    ds: ConeVec,
}

fn shift_into_cone(v: &mut ConeVec, dims: &Dims) {
    let m = v.min_eig();
    if m <= 0.0 || !m.is_finite() {
        let m = if m.is_finite() { m } else { 0.0 };
        v.axpy(1.0 - m, &ConeVec::identity(dims));
    }
}

pub(super) fn solve(p: &ConicProblem, st: &SolverSettings) -> Solution {
    let prob = Compiled::new(p);
    let dims = prob.dims.clone();
    let degree = dims.degree() as f64;
    let n = prob.n;
    let neq = prob.b.len();

    let fail = |status, iterations| Solution {
        status,
        x: vec![0.0; n],
        y: vec![0.0; neq],
        objective: f64::NAN,
        dual_objective: f64::NAN,
        iterations,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
    };

    // least-squares starting point with identity scaling
    let ident = Scaling::identity(&dims);
    let m0 = prob.schur(&ident);
    let Some(kkt0) = Kkt::new(m0, &prob.a) else {
        return fail(SolveStatus::NumericalFailure, 0);
    };
    let Some((mut x, _)) = kkt0.solve(&prob.gt_mul(&prob.h), &prob.b) else {
        return fail(SolveStatus::NumericalFailure, 0);
    };
    let mut s = prob.h.sub(&prob.g_mul(&x));
    let Some((xd, mut y)) = kkt0.solve(&(-&prob.c), &DVector::zeros(neq)) else {
        return fail(SolveStatus::NumericalFailure, 0);
    };
    let mut z = prob.g_mul(&xd);
    shift_into_cone(&mut s, &dims);
    shift_into_cone(&mut z, &dims);

    let hnorm = prob.h.norm();
    let bnorm = prob.b.norm();
    let cnorm = prob.c.norm();
    let resx0 = cnorm.max(1.0);
    let resz0 = (hnorm * hnorm + bnorm * bnorm).sqrt().max(1.0);

    let mut best: Option<(f64, Solution)> = None;
    let mut stalls = 0;
    let mut exhausted = false;

    for iter in 0..=st.max_iterations {
        let gx = prob.g_mul(&x);
        let gtz = prob.gt_mul(&z);
        let aty = prob.a.transpose() * &y;
        let rx = &prob.c + &aty + &gtz;
        let ry = &prob.a * &x - &prob.b;
        let mut rz = gx.clone();
        rz.axpy(1.0, &s);
        rz.axpy(-1.0, &prob.h);
        let gap = s.dot(&z);
        let pcost = prob.c.dot(&x);
        let dcost = -prob.b.dot(&y) - prob.h.dot(&z);
        let pres = (ry.norm_squared() + rz.norm().powi(2)).sqrt() / resz0;
        let dres = rx.norm() / resx0;
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::INFINITY
        };
        let snapshot = |status| Solution {
            status,
            x: x.iter().copied().collect(),
            y: y.iter().copied().collect(),
            objective: pcost,
            dual_objective: dcost,
            iterations: iter,
            primal_residual: pres,
            dual_residual: dres,
            gap,
        };

        if !(pres.is_finite() && dres.is_finite() && gap.is_finite()) {
            break;
        }
        if pres <= st.feastol && dres <= st.feastol && (gap <= st.abstol || relgap <= st.reltol) {
            return snapshot(SolveStatus::Optimal);
        }
        let merit = pres.max(dres).max(gap.min(relgap));
        if best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((merit, snapshot(SolveStatus::AlmostOptimal)));
        }

        // infeasibility certificates
        let t = -(prob.b.dot(&y) + prob.h.dot(&z));
        if t > 0.0 && (&aty + &gtz).norm() / t <= st.feastol * 10.0 {
            return snapshot(SolveStatus::PrimalInfeasible);
        }
        if pcost < 0.0 {
            let mut gs = gx.clone();
            gs.axpy(1.0, &s);
            let r = (prob.a.clone() * &x).norm().max(gs.norm()) / -pcost;
            if r <= st.feastol * 10.0 {
                return snapshot(SolveStatus::DualInfeasible);
            }
        }
        if iter == st.max_iterations {
            exhausted = true;
            break;
        }

        let Some(w) = Scaling::new(&s, &z) else { break };
        let m = prob.schur(&w);
        let Some(kkt) = Kkt::new(m, &prob.a) else { break };
        let newton = Newton { prob: &prob, w: &w, kkt };
        let mu = gap / degree;
        let lam = &w.lambda;
        let lsq = lam.jordan(lam);

        let bx = -&rx;
        let by = -&ry;
        let bz = rz.scaled(-1.0);
        let Some(Step { dz: dza, ds: dsa, .. }) = newton.solve(&bx, &by, &bz, &lsq.scaled(-1.0)) else { break };
        let dsa_t = w.apply_winv_t(&dsa);
        let dza_t = w.apply_w(&dza);
        let alpha_aff = 1f64.min(w.max_step(&dsa_t)).min(w.max_step(&dza_t));
        let sigma = (1.0 - alpha_aff).powi(3);

        let mut ds = lsq.scaled(-1.0);
        ds.axpy(-1.0, &dsa_t.jordan(&dza_t));
        ds.axpy(sigma * mu, &ConeVec::identity(&dims));
        let Some(Step { dx, dy, dz, ds: dsv }) = newton.solve(&bx, &by, &bz, &ds) else { break };
        let amax = w.max_step(&w.apply_winv_t(&dsv)).min(w.max_step(&w.apply_w(&dz)));
        let alpha = 1f64.min(STEP * amax);
        if !(alpha > 1e-12) {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        }
        x.axpy(alpha, &dx, 1.0);
        y.axpy(alpha, &dy, 1.0);
        s.axpy(alpha, &dsv);
        z.axpy(alpha, &dz);
    }

    match best {
        Some((merit, mut sol)) if merit <= st.salvage_tol => {
            sol.status = SolveStatus::AlmostOptimal;
            sol
        }
        Some((_, mut sol)) => {
            sol.status = if exhausted { SolveStatus::MaxIterations } else { SolveStatus::NumericalFailure };
            sol
        }
        None => fail(SolveStatus::NumericalFailure, 0),
    }
}
