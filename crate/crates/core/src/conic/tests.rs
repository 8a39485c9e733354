use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

#[test]
fn one_dimensional_psd_is_nonnegativity() {
    let mut p = ConicProblem::new(1);
    p.set_cost(0, 1.0);
    let mut b = PsdBlock::new(1);
    b.add_term(0, 0, 0, 1.0);
    p.add_psd(b);
    p.add_nonneg(AffineExpr::var(0).offset(-3.0));
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.x[0] - 3.0).abs() < 1e-7, "{}", s.x[0]);
}

#[test]
fn soc_toy() {
    let mut p = ConicProblem::new(1);
    p.set_cost(0, 1.0);
    p.add_soc(vec![AffineExpr::var(0), AffineExpr::constant(1.0), AffineExpr::constant(1.0)]);
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective - 2f64.sqrt()).abs() < 1e-7);
}

#[test]
fn rotated_soc() {
    // max w  s.t. w² ≤ 2·u·v, u = 2, v = 1  → w = 2
    let mut p = ConicProblem::new(1);
    p.set_cost(0, -1.0);
    p.add_rotated_soc(AffineExpr::constant(2.0), AffineExpr::constant(1.0), vec![AffineExpr::var(0)]);
    let s = solve_conic(&p).unwrap();
    assert!(s.status.is_usable());
    assert!((s.x[0] - 2.0).abs() < 1e-6);
}

#[test]
fn small_lp() {
    let mut p = ConicProblem::new(2);
    p.set_cost(0, 1.0);
    p.set_cost(1, 1.0);
    p.add_nonneg(AffineExpr::var(0).plus(1, 2.0).offset(-2.0));
    p.add_nonneg(AffineExpr::var(1).plus(0, 2.0).offset(-2.0));
    p.add_nonneg(AffineExpr::var(0));
    p.add_nonneg(AffineExpr::var(1));
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective - 4.0 / 3.0).abs() < 1e-7);
    assert!((s.x[0] - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn equality_constraints() {
    let mut p = ConicProblem::new(2);
    p.set_cost(0, 1.0);
    p.add_equality(vec![(0, 1.0), (1, 1.0)], 1.0);
    p.add_nonneg(AffineExpr::var(0));
    p.add_nonneg(AffineExpr::var(1));
    p.add_nonneg(AffineExpr::constant(0.25).plus(1, -1.0));
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.x[0] - 0.75).abs() < 1e-7);
    assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-8);
}

#[test]
fn hermitian_block() {
    // [[1, p + jq], [p − jq, 1]] ⪰ 0 ⇔ p² + q² ≤ 1; maximize p + q
    let mut p = ConicProblem::new(2);
    p.set_cost(0, -1.0);
    p.set_cost(1, -1.0);
    let mut b = PsdBlock::new(4);
    b.add_hermitian(0, 0, None, C64::new(1.0, 0.0));
    b.add_hermitian(1, 1, None, C64::new(1.0, 0.0));
    b.add_hermitian(0, 1, Some(0), C64::new(1.0, 0.0));
    b.add_hermitian(0, 1, Some(1), C64::new(0.0, 1.0));
    p.add_psd(b.clone());
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective + 2f64.sqrt()).abs() < 1e-7);
    assert!((s.x[0] - s.x[1]).abs() < 1e-6);

    // the realified block has the Hermitian spectrum twice
    let m = b.eval(&[0.3, -0.4]);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (got, want) in ev.iter().zip([0.5, 0.5, 1.5, 1.5]) {
        assert!((got - want).abs() < 1e-12);
    }
    // lower-triangle entries conjugate
    let mut b2 = PsdBlock::new(4);
    b2.add_hermitian(1, 0, None, C64::new(0.3, 0.4));
    let mut b3 = PsdBlock::new(4);
    b3.add_hermitian(0, 1, None, C64::new(0.3, -0.4));
    assert_eq!(b2.eval(&[]), b3.eval(&[]));
}

#[test]
fn infeasible_is_not_optimal() {
    let mut p = ConicProblem::new(1);
    p.set_cost(0, 1.0);
    p.add_nonneg(AffineExpr::var(0).offset(-1.0));
    p.add_nonneg(AffineExpr::constant(0.0).plus(0, -1.0));
    let s = solve_conic(&p).unwrap();
    assert!(!s.status.is_usable(), "{:?}", s.status);
}

#[test]
fn unbounded_is_not_optimal() {
    let mut p = ConicProblem::new(1);
    p.set_cost(0, 1.0);
    p.add_nonneg(AffineExpr::constant(0.0).plus(0, -1.0));
    let s = solve_conic(&p).unwrap();
    assert!(!s.status.is_usable(), "{:?}", s.status);
}

#[test]
fn rejects_malformed() {
    let mut p = ConicProblem::new(1);
    p.add_nonneg(AffineExpr::var(3));
    assert!(solve_conic(&p).is_err());
    let p = ConicProblem::new(2);
    assert!(solve_conic(&p).is_err());
}

/// Burer–Monteiro oracle for `min ⟨C, X⟩ s.t. diag X = 1, X ⪰ 0`: rows of `V` on
/// the unit sphere, projected gradient with several restarts.
fn elliptope_oracle(c: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let n = c.nrows();
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let mut v = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let normalize = |v: &mut DMatrix<f64>| {
            for mut r in v.row_iter_mut() {
                let nr = r.norm();
                r /= nr;
            }
        };
        normalize(&mut v);
        for _ in 0..20000 {
            let g = c * &v * 2.0;
            v -= g * 0.05;
            normalize(&mut v);
        }
        best = best.min((c * (&v * v.transpose())).trace());
    }
    best
}

#[test]
fn random_sdp_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let r = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let c = (&r + r.transpose()) * 0.5;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let mut p = ConicProblem::new(3);
        let mut b = PsdBlock::new(3);
        for i in 0..3 {
            b.add_constant(i, i, 1.0);
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            p.set_cost(k, 2.0 * c[(i, j)]);
            b.add_term(i, j, k, 1.0);
        }
        p.add_psd(b.clone());
        let s = solve_conic(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!(s.primal_residual <= 1e-7 && s.dual_residual <= 1e-7);
        let ours = s.objective + c.trace();
        let oracle = elliptope_oracle(&c, &mut rng);
        assert!((ours - oracle).abs() <= 1e-5, "{ours} vs {oracle}");
        assert!(b.eval(&s.x).symmetric_eigenvalues().min() >= -1e-7);
    }
}

#[test]
fn mixed_cones() {
    // min t  s.t. ‖x − (1, 2)‖ ≤ t, x₁ + x₂ ≤ 1, [[x₁, 0.5], [0.5, 1]] ⪰ 0
    let mut p = ConicProblem::new(3);
    p.set_cost(2, 1.0);
    p.add_soc(vec![AffineExpr::var(2), AffineExpr::var(0).offset(-1.0), AffineExpr::var(1).offset(-2.0)]);
    p.add_nonneg(AffineExpr::constant(1.0).plus(0, -1.0).plus(1, -1.0));
    let mut b = PsdBlock::new(2);
    b.add_term(0, 0, 0, 1.0);
    b.add_constant(0, 1, 0.5);
    b.add_constant(1, 1, 1.0);
    p.add_psd(b);
    let s = solve_conic(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    // projection of (1, 2) onto x₁ + x₂ ≤ 1 is (0, 1); x₁ ≥ 0.25 binds, giving (0.25, 0.75)
    let want = ((1.0f64 - 0.25).powi(2) + (2.0f64 - 0.75).powi(2)).sqrt();
    assert!((s.objective - want).abs() < 1e-6, "{} vs {want}", s.objective);
    let _ = DVector::<f64>::zeros(0);
}
