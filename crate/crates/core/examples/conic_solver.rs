//! Uses the bundled interior-point solver on two small problems: the smallest
//! eigenvalue of a symmetric matrix as an SDP, and a Euclidean projection onto
//! a half-space as an SOCP.

use beamfocus::conic::{solve_conic, AffineExpr, ConicProblem, PsdBlock};

fn main() -> beamfocus::Result<()> {
    // max t  s.t.  A − tI ⪰ 0
    let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
    let mut sdp = ConicProblem::new(1);
    sdp.set_cost(0, -1.0);
    let mut block = PsdBlock::new(3);
    for (i, row) in a.iter().enumerate() {
        // off-diagonal entries are mirrored by the block
        for (j, &v) in row.iter().enumerate().skip(i) {
            block.add_constant(i, j, v);
        }
        block.add_term(i, i, 0, -1.0);
    }
    sdp.add_psd(block);
    let sol = solve_conic(&sdp)?;
    println!("λ_min = {:.9} ({:?}, {} iterations)", sol.x[0], sol.status, sol.iterations);

    // min s  s.t.  ‖x − p‖ ≤ s,  x₁ + x₂ = 1
    let p = [2.0, 3.0];
    let mut socp = ConicProblem::new(3);
    socp.set_cost(2, 1.0);
    socp.add_equality(vec![(0, 1.0), (1, 1.0)], 1.0);
    socp.add_soc(vec![AffineExpr::var(2), AffineExpr::var(0).offset(-p[0]), AffineExpr::var(1).offset(-p[1])]);
    let sol = solve_conic(&socp)?;
    println!(
        "projection ({:.6}, {:.6}), distance {:.9} (exact {:.9})",
        sol.x[0],
        sol.x[1],
        sol.x[2],
        (p[0] + p[1] - 1.0) / 2f64.sqrt()
    );
    Ok(())
}
