//! Cone vectors, Jordan algebra and Nesterov–Todd scalings for the
//! nonnegative orthant, second-order cones and PSD cones.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Dims {
    pub lp: usize,
    pub soc: Vec<usize>,
    pub psd: Vec<usize>,
}

impl Dims {
    /// Degree of the cone: rank of its identity element.
    pub fn degree(&self) -> usize {
        self.lp + self.soc.len() + self.psd.iter().sum::<usize>()
    }
}

/// Element of the product cone's ambient space. PSD parts are full symmetric matrices.
#[derive(Debug, Clone)]
pub(crate) struct ConeVec {
    pub lp: DVector<f64>,
    pub soc: Vec<DVector<f64>>,
    pub psd: Vec<DMatrix<f64>>,
}

impl ConeVec {
    pub fn zeros(d: &Dims) -> Self {
        Self {
            lp: DVector::zeros(d.lp),
            soc: d.soc.iter().map(|&k| DVector::zeros(k)).collect(),
            psd: d.psd.iter().map(|&k| DMatrix::zeros(k, k)).collect(),
        }
    }

    pub fn identity(d: &Dims) -> Self {
        let mut e = Self::zeros(d);
        e.lp.fill(1.0);
        for s in &mut e.soc {
            s[0] = 1.0;
        }
        for m in &mut e.psd {
            m.fill_diagonal(1.0);
        }
        e
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.lp.dot(&o.lp)
            + self.soc.iter().zip(&o.soc).map(|(a, b)| a.dot(b)).sum::<f64>()
            + self.psd.iter().zip(&o.psd).map(|(a, b)| a.dot(b)).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn axpy(&mut self, a: f64, o: &Self) {
        self.lp.axpy(a, &o.lp, 1.0);
        for (x, y) in self.soc.iter_mut().zip(&o.soc) {
            x.axpy(a, y, 1.0);
        }
        for (x, y) in self.psd.iter_mut().zip(&o.psd) {
            *x += y * a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut r = self.clone();
        r.lp *= a;
        r.soc.iter_mut().for_each(|x| *x *= a);
        r.psd.iter_mut().for_each(|x| *x *= a);
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.axpy(-1.0, o);
        r
    }

    /// Jordan product `x∘y`.
    pub fn jordan(&self, o: &Self) -> Self {
        Self {
            lp: self.lp.component_mul(&o.lp),
            soc: self.soc.iter().zip(&o.soc).map(|(x, y)| soc_product(x, y)).collect(),
            psd: self
                .psd
                .iter()
                .zip(&o.psd)
                .map(|(x, y)| {
                    let xy = x * y;
                    (&xy + xy.transpose()) * 0.5
                })
                .collect(),
        }
    }

    /// Smallest "eigenvalue" across cones; positive iff strictly interior.
    pub fn min_eig(&self) -> f64 {
        let mut m = f64::INFINITY;
        if !self.lp.is_empty() {
            m = m.min(self.lp.min());
        }
        for s in &self.soc {
            m = m.min(s[0] - s.rows(1, s.len() - 1).norm());
        }
        for p in &self.psd {
            m = m.min(sym_min_eig(p));
        }
        m
    }
}

pub(crate) fn soc_product(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut r = DVector::zeros(x.len());
    r[0] = x.dot(y);
    for i in 1..x.len() {
        r[i] = x[0] * y[i] + y[0] * x[i];
    }
    r
}

pub(crate) fn sym_min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// NT scaling for one second-order cone: `W = β(2vvᵀ − J)`.
#[derive(Debug, Clone)]
pub(crate) struct SocScaling {
    pub beta: f64,
    pub v: DVector<f64>,
}

fn j_apply(x: &DVector<f64>) -> DVector<f64> {
    let mut r = -x.clone();
    r[0] = x[0];
    r
}

fn j_norm(x: &DVector<f64>) -> f64 {
    let t = x[0] * x[0] - x.rows(1, x.len() - 1).norm_squared();
    t.max(0.0).sqrt()
}

impl SocScaling {
    pub fn identity(k: usize) -> Self {
        let mut v = DVector::zeros(k);
        v[0] = 1.0;
        Self { beta: 1.0, v }
    }

    pub fn new(s: &DVector<f64>, z: &DVector<f64>) -> Option<Self> {
        let sn = j_norm(s);
        let zn = j_norm(z);
        if !(sn > 0.0 && zn > 0.0) {
            return None;
        }
        let sb = s / sn;
        let zb = z / zn;
        let gamma = ((1.0 + zb.dot(&sb)) / 2.0).sqrt();
        let wb = (&sb + j_apply(&zb)) / (2.0 * gamma);
        let mut v = wb.clone();
        v[0] += 1.0;
        v /= (2.0 * (wb[0] + 1.0)).sqrt();
        Some(Self { beta: (sn / zn).sqrt(), v })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.v * (2.0 * self.v.dot(x)) - j_apply(x)) * self.beta
    }

    pub fn apply_inv(&self, x: &DVector<f64>) -> DVector<f64> {
        let jv = j_apply(&self.v);
        (&jv * (2.0 * jv.dot(x)) - j_apply(x)) / self.beta
    }

    pub fn matrix_inv(&self) -> DMatrix<f64> {
        let k = self.v.len();
        let mut m = DMatrix::zeros(k, k);
        for c in 0..k {
            let mut e = DVector::zeros(k);
            e[c] = 1.0;
            m.set_column(c, &self.apply_inv(&e));
        }
        m
    }
}

/// NT scaling for one PSD block: `W(Z) = RᵀZR`, `W⁻ᵀ(S) = R⁻¹SR⁻ᵀ`.
#[derive(Debug, Clone)]
pub(crate) struct PsdScaling {
    pub r: DMatrix<f64>,
    pub rinv: DMatrix<f64>,
    /// Scaled point `RᵀZR = R⁻¹SR⁻ᵀ`, diagonal.
    pub lambda: DVector<f64>,
}

impl PsdScaling {
    pub fn identity(k: usize) -> Self {
        Self { r: DMatrix::identity(k, k), rinv: DMatrix::identity(k, k), lambda: DVector::from_element(k, 1.0) }
    }

    pub fn new(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Self> {
        let ls = s.clone().cholesky()?.l();
        let lz = z.clone().cholesky()?.l();
        let svd = (lz.transpose() * &ls).svd(false, true);
        let vt = svd.v_t?;
        let lam = svd.singular_values;
        if lam.iter().any(|&x| !(x > 0.0)) {
            return None;
        }
        let v = vt.transpose();
        let inv_sqrt = DMatrix::from_diagonal(&lam.map(|x| 1.0 / x.sqrt()));
        let sqrt = DMatrix::from_diagonal(&lam.map(|x| x.sqrt()));
        let r = &ls * &v * inv_sqrt;
        let ls_inv = ls.solve_lower_triangular(&DMatrix::identity(s.nrows(), s.nrows()))?;
        let rinv = sqrt * vt * ls_inv;
        Some(Self { r, rinv, lambda: lam })
    }
}

/// Scaling for the whole product cone.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub lp_w: DVector<f64>,
    pub soc: Vec<SocScaling>,
    pub psd: Vec<PsdScaling>,
    pub lambda: ConeVec,
}

impl Scaling {
    pub fn identity(d: &Dims) -> Self {
        Self {
            lp_w: DVector::from_element(d.lp, 1.0),
            soc: d.soc.iter().map(|&k| SocScaling::identity(k)).collect(),
            psd: d.psd.iter().map(|&k| PsdScaling::identity(k)).collect(),
            lambda: ConeVec::identity(d),
        }
    }

    pub fn new(s: &ConeVec, z: &ConeVec) -> Option<Self> {
        let lp_w = s.lp.zip_map(&z.lp, |a, b| (a / b).sqrt());
        let lp_lambda = s.lp.zip_map(&z.lp, |a, b| (a * b).sqrt());
        if lp_w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return None;
        }
        let soc = s.soc.iter().zip(&z.soc).map(|(a, b)| SocScaling::new(a, b)).collect::<Option<Vec<_>>>()?;
        let psd = s.psd.iter().zip(&z.psd).map(|(a, b)| PsdScaling::new(a, b)).collect::<Option<Vec<_>>>()?;
        let lambda = ConeVec {
            lp: lp_lambda,
            soc: soc.iter().zip(&z.soc).map(|(w, zz)| w.apply(zz)).collect(),
            psd: psd.iter().map(|p| DMatrix::from_diagonal(&p.lambda)).collect(),
        };
        Some(Self { lp_w, soc, psd, lambda })
    }

    /// `W z`.
    pub fn apply_w(&self, z: &ConeVec) -> ConeVec {
        ConeVec {
            lp: self.lp_w.component_mul(&z.lp),
            soc: self.soc.iter().zip(&z.soc).map(|(w, x)| w.apply(x)).collect(),
            psd: self.psd.iter().zip(&z.psd).map(|(w, x)| w.r.transpose() * x * &w.r).collect(),
        }
    }

    /// `Wᵀ u`.
    pub fn apply_wt(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lp: self.lp_w.component_mul(&u.lp),
            soc: self.soc.iter().zip(&u.soc).map(|(w, x)| w.apply(x)).collect(),
            psd: self.psd.iter().zip(&u.psd).map(|(w, x)| &w.r * x * w.r.transpose()).collect(),
        }
    }

    /// `W⁻ᵀ s`.
    pub fn apply_winv_t(&self, s: &ConeVec) -> ConeVec {
        ConeVec {
            lp: s.lp.component_div(&self.lp_w),
            soc: self.soc.iter().zip(&s.soc).map(|(w, x)| w.apply_inv(x)).collect(),
            psd: self.psd.iter().zip(&s.psd).map(|(w, x)| &w.rinv * x * w.rinv.transpose()).collect(),
        }
    }

    /// `W⁻¹ y`.
    pub fn apply_winv(&self, y: &ConeVec) -> ConeVec {
        ConeVec {
            lp: y.lp.component_div(&self.lp_w),
            soc: self.soc.iter().zip(&y.soc).map(|(w, x)| w.apply_inv(x)).collect(),
            psd: self.psd.iter().zip(&y.psd).map(|(w, x)| w.rinv.transpose() * x * &w.rinv).collect(),
        }
    }

    /// `H = (WᵀW)⁻¹`.
    pub fn apply_h(&self, x: &ConeVec) -> ConeVec {
        self.apply_winv(&self.apply_winv_t(x))
    }

    /// `u` with `λ∘u = d`.
    pub fn lambda_inv_product(&self, d: &ConeVec) -> ConeVec {
        let l = &self.lambda;
        ConeVec {
            lp: d.lp.component_div(&l.lp),
            soc: l
                .soc
                .iter()
                .zip(&d.soc)
                .map(|(lam, dd)| {
                    let k = lam.len();
                    let l1 = lam.rows(1, k - 1);
                    let d1 = dd.rows(1, k - 1);
                    let u0 = (lam[0] * dd[0] - l1.dot(&d1)) / (lam[0] * lam[0] - l1.norm_squared());
                    let mut u = DVector::zeros(k);
                    u[0] = u0;
                    for i in 1..k {
                        u[i] = (dd[i] - u0 * lam[i]) / lam[0];
                    }
                    u
                })
                .collect(),
            psd: self
                .psd
                .iter()
                .zip(&d.psd)
                .map(|(p, dd)| {
                    let k = p.lambda.len();
                    DMatrix::from_fn(k, k, |i, j| 2.0 * dd[(i, j)] / (p.lambda[i] + p.lambda[j]))
                })
                .collect(),
        }
    }

    /// Largest `α` keeping `λ + α·d` in the cone (infinite if unbounded).
    pub fn max_step(&self, d: &ConeVec) -> f64 {
        let l = &self.lambda;
        let mut a = f64::INFINITY;
        for i in 0..l.lp.len() {
            if d.lp[i] < 0.0 {
                a = a.min(-l.lp[i] / d.lp[i]);
            }
        }
        for (x, dx) in l.soc.iter().zip(&d.soc) {
            a = a.min(soc_max_step(x, dx));
        }
        for (p, dx) in self.psd.iter().zip(&d.psd) {
            let s = p.lambda.map(|x| 1.0 / x.sqrt());
            let k = s.len();
            let m = DMatrix::from_fn(k, k, |i, j| s[i] * dx[(i, j)] * s[j]);
            let e = sym_min_eig(&m);
            if e < 0.0 {
                a = a.min(-1.0 / e);
            }
        }
        a
    }
}

/// Largest `α` with `x + α d` in the second-order cone, for interior `x`.
pub(crate) fn soc_max_step(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let k = x.len();
    let x1 = x.rows(1, k - 1);
    let d1 = d.rows(1, k - 1);
    // q(α) = aα² + 2bα + c, c > 0; feasibility is q ≥ 0 together with x₀ + αd₀ ≥ 0
    let a = d[0] * d[0] - d1.norm_squared();
    let b = x[0] * d[0] - x1.dot(&d1);
    let c = x[0] * x[0] - x1.norm_squared();
    let disc = (b * b - a * c).max(0.0);
    if a < 0.0 {
        // exactly one positive root
        if b > 0.0 {
            (-b - disc.sqrt()) / a
        } else {
            c / (-b + disc.sqrt())
        }
    } else if a > 0.0 {
        // both roots share the sign of −b; the first one is the boundary
        if b < 0.0 && b * b >= a * c {
            c / (-b + disc.sqrt())
        } else {
            f64::INFINITY
        }
    } else if b < 0.0 {
        -c / (2.0 * b)
    } else {
        f64::INFINITY
    }
}
