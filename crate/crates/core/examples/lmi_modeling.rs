//! Model a small semidefinite program directly: the smallest Lyapunov
//! certificate for a stable matrix, compiled to conic standard form.

use datarobust::linalg::{eye, from_rows};
use datarobust::lmi::{AffineMatrix, Problem, SolverOptions};

fn main() -> datarobust::Result<()> {
    let a = from_rows(&[&[0.5, 1.0], &[0.0, 0.8]]);
    let mut prob = Problem::new();
    let x = prob.symmetric("X", 2);
    // Aᵀ X A − X ≺ 0, X ⪰ I, minimize trace X
    let lyap = x.expr().congruence(&a) - x.expr();
    prob.strictly_nsd("decrease", lyap);
    prob.psd("scale", x.expr() - AffineMatrix::constant(eye(2)));
    prob.minimize(x.expr().trace());

    let opts = SolverOptions::default();
    let sf = prob.compile(opts.strict_eps)?;
    println!("standard form: {} rows, {} columns", sf.m, sf.n);
    println!("{}", sf.to_triplet_text().lines().take(6).collect::<Vec<_>>().join("\n"));

    let sol = prob.solve(&opts)?;
    println!("status {:?}, trace X = {:?}", sol.status, sol.objective);
    println!("X = {}", sol.value(&x));
    Ok(())
}
