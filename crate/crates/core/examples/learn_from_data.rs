//! Learn a multiplier class from one noisy trajectory, merge it with prior
//! bounds and check that the true uncertainty is covered.

use datarobust::experiments::{ExampleA, NoiseModel};
use datarobust::lmi::SolverOptions;
use datarobust::multiplier::{certify_membership, combine, learn_from_data};

fn main() -> datarobust::Result<()> {
    let ex = ExampleA::new();
    let d_bar = 0.05;
    let traj = ex.trajectory(200, d_bar, 1)?;
    let data = ex.data(&traj)?;
    println!("{} samples, Z is {}x{}", data.len(), data.z.nrows(), data.z.ncols());

    let noise = NoiseModel::Quadratic.class(d_bar, data.len(), ex.plant.n_d())?;
    let learnt = learn_from_data(&data, &ex.plant.b_d, &noise)?;
    let both = combine(&ex.prior_class()?, &learnt, &ex.plant.b_w, &[])?;

    let truth = &ex.plant.b_w * &ex.delta_true;
    let opts = SolverOptions::default();
    for (name, class) in [("learnt", &learnt), ("combined", &both)] {
        let m = certify_membership(&truth, class, 1e-7, &opts)?;
        println!("{name}: {} parameters, true uncertainty covered: {}", class.num_params(), m.is_member());
    }
    Ok(())
}
