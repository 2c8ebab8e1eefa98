//! Prior multiplier classes for bounded uncertainty blocks and a membership
//! query for candidate uncertainties.

use datarobust::lft::{BlockSpec, UncertaintyStructure};
use datarobust::linalg::{eye, from_rows};
use datarobust::lmi::SolverOptions;
use datarobust::multiplier::{certify_membership, prior_from_bounds, PriorBound};

fn main() -> datarobust::Result<()> {
    // Δ = diag(δ I₂, Δ₂) with δ² ≤ 0.04 and Δ₂Δ₂ᵀ ⪯ 0.09
    let structure = UncertaintyStructure::new(vec![BlockSpec::repeated(2), BlockSpec::full(1, 2)]);
    let bounds = [PriorBound::RepeatedScalar(0.04), PriorBound::Norm(0.09)];
    let class = prior_from_bounds(&structure, &eye(3), &bounds)?;
    println!("class dimension {}, {} parameters", class.dim, class.num_params());

    let opts = SolverOptions::default();
    let inside = from_rows(&[&[0.1, 0.0, 0.0, 0.0], &[0.0, 0.1, 0.0, 0.0], &[0.0, 0.0, 0.2, 0.1]]);
    let outside = from_rows(&[&[0.3, 0.0, 0.0, 0.0], &[0.0, 0.3, 0.0, 0.0], &[0.0, 0.0, 0.2, 0.1]]);
    for (name, delta) in [("inside", &inside), ("outside", &outside)] {
        // with B_w = I the transformed uncertainty B_w Δ is Δ itself
        let m = certify_membership(delta, &class, 1e-7, &opts)?;
        println!("{name}: member = {}", m.is_member());
    }
    Ok(())
}
