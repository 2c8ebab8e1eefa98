use log::warn;

use crate::error::{Error, Result};
use crate::lft::{
    assemble_data_matrices, build_extended_state_plant, partition_gain, OutputFeedbackGains, Trajectory,
};
use crate::linalg::{rank, Mat};
use crate::multiplier::{learn_from_data, sum_classes, transform_prior, MultiplierClass};
use crate::synthesis::result::{SynthesisOptions, SynthesisResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    H2,
    Stabilize,
    Hinf,
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h2" => Ok(Objective::H2),
            "stabilize" | "stabilise" => Ok(Objective::Stabilize),
            "hinf" => Ok(Objective::Hinf),
            other => Err(Error::InvalidArgument(format!("unknown objective `{other}`"))),
        }
    }
}

/// Setup for a data-driven dynamic output-feedback design.
#[derive(Clone, Debug)]
pub struct OutputFeedbackConfig {
    pub order: usize,
    pub m: usize,
    pub p: usize,
    pub b_d0: Mat,
    /// Performance output on `(ξ, u)`; may have zero rows.
    pub c_e: Mat,
    pub d_eu: Mat,
    /// Class for the disturbance sequence, of dimension `N + n_d`.
    pub disturbance: MultiplierClass,
    /// Optional prior class on `Δ = [B_n … A₁ B₀]`, dimension `n_z + p`.
    pub prior: Option<MultiplierClass>,
    pub objective: Objective,
}

#[derive(Clone, Debug)]
pub struct OutputFeedbackResult {
    pub synthesis: SynthesisResult,
    pub gains: OutputFeedbackGains,
}

/// Extended-state samples `ξ_k` for `k = n, …, T` from input-output data of
/// length `T`; the inputs are `u_n, …, u_{T−1}`.
pub fn extended_trajectory(u: &Mat, y: &Mat, n: usize) -> Result<Trajectory> {
    let (m, t) = u.shape();
    let p = y.nrows();
    if y.ncols() != t || t <= n {
        return Err(Error::dims("input and output records must have equal length greater than the order"));
    }
    let dim = n * (m + p);
    let mut xi = Mat::zeros(dim, t - n + 1);
    for (c, k) in (n..=t).enumerate() {
        for i in 0..n {
            let lag = k - n + i;
            xi.view_mut((i * m, c), (m, 1)).copy_from(&u.column(lag));
            xi.view_mut((n * m + i * p, c), (p, 1)).copy_from(&y.column(lag));
        }
    }
    let mut traj = Trajectory::new(xi, u.columns(n, t - n).into_owned())?;
    traj.description = format!("extended state of order {n} from {t} input-output samples");
    Ok(traj)
}

/// Builds the extended-state plant, learns multipliers from the data and
/// runs the chosen state-feedback design on `ξ`.
pub fn synthesize_output_feedback(
    u: &Mat,
    y: &Mat,
    cfg: &OutputFeedbackConfig,
    opts: &SynthesisOptions,
) -> Result<OutputFeedbackResult> {
    let (plant, structure) = build_extended_state_plant(cfg.order, cfg.m, cfg.p, &cfg.b_d0)?;
    let plant = plant.with_performance(cfg.c_e.clone(), cfg.d_eu.clone());
    let traj = extended_trajectory(u, y, cfg.order)?;
    let data = assemble_data_matrices(&plant, &traj)?;

    let r = rank(&data.z, 1e-9);
    if r < data.z.nrows() {
        if cfg.prior.is_none() {
            return Err(Error::RankDeficient {
                what: "Z".into(),
                rank: r,
                expected: data.z.nrows(),
            });
        }
        warn!("Z has rank {r} < {}; the data alone cannot be informative", data.z.nrows());
    }

    let learnt = learn_from_data(&data, &plant.b_d, &cfg.disturbance)?;
    let class = match &cfg.prior {
        Some(p) => {
            let prior = transform_prior(&structure, &plant.b_w, std::slice::from_ref(p))?;
            sum_classes(&[&prior, &learnt])?
        }
        None => learnt,
    };
    let synthesis = crate::synthesis::synthesize(&plant, &class, cfg.objective, opts)?;
    let gains = partition_gain(&synthesis.k, cfg.order, cfg.m, cfg.p)?;
    Ok(OutputFeedbackResult { synthesis, gains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_rows, spectral_radius};
    use crate::multiplier::disturbance_energy;
    use rand::{Rng, SeedableRng};

    /// `y_k = 1.2 y_{k−1} + u_{k−1} + 0.3 u_k`, noise free.
    fn first_order_data(t: usize) -> (Mat, Mat) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u = Mat::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
        let mut y = Mat::zeros(1, t);
        for k in 0..t {
            let past = if k > 0 { 1.2 * y[(0, k - 1)] + u[(0, k - 1)] } else { 0.0 };
            y[(0, k)] = past + 0.3 * u[(0, k)];
        }
        (u, y)
    }

    fn config(order: usize, samples: usize, objective: Objective) -> OutputFeedbackConfig {
        let dim = 2 * order;
        let (c_e, d_eu) = match objective {
            Objective::Stabilize => (Mat::zeros(0, dim), Mat::zeros(0, 1)),
            _ => (
                crate::linalg::vstack(&[&Mat::identity(dim, dim), &Mat::zeros(1, dim)]),
                crate::linalg::vstack(&[&Mat::zeros(dim, 1), &from_rows(&[&[0.5]])]),
            ),
        };
        OutputFeedbackConfig {
            order,
            m: 1,
            p: 1,
            b_d0: from_rows(&[&[1.0]]),
            c_e,
            d_eu,
            disturbance: disturbance_energy(samples, 1, 0.0).unwrap(),
            prior: None,
            objective,
        }
    }

    fn true_closed_loop_radius(k: &Mat) -> f64 {
        let (plant, _) = build_extended_state_plant(1, 1, 1, &from_rows(&[&[1.0]])).unwrap();
        let delta = from_rows(&[&[1.0, 1.2, 0.3]]);
        let a = &plant.a + &plant.b * k + &plant.b_w * delta * (&plant.c_z + &plant.d_z * k);
        spectral_radius(&a)
    }

    #[test]
    fn extended_samples_line_up() {
        let u = from_rows(&[&[1.0, 2.0, 3.0, 4.0]]);
        let y = from_rows(&[&[10.0, 20.0, 30.0, 40.0]]);
        let t = extended_trajectory(&u, &y, 2).unwrap();
        // ξ_2 = (u_0, u_1, y_0, y_1)
        assert_eq!(t.x.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 10.0, 20.0]);
        assert_eq!(t.x.ncols(), 3);
        assert_eq!(t.u, from_rows(&[&[3.0, 4.0]]));
    }

    #[test]
    fn exact_order_stabilizes_the_true_system() {
        let (u, y) = first_order_data(20);
        let r = synthesize_output_feedback(&u, &y, &config(1, 19, Objective::Stabilize), &SynthesisOptions::default()).unwrap();
        assert!(true_closed_loop_radius(&r.synthesis.k) < 1.0);
        assert_eq!(r.gains.k_u.len(), 1);
        assert_eq!(r.gains.k_y[0][(0, 0)], r.synthesis.k[(0, 1)]);
    }

    #[test]
    fn overestimated_order_is_rank_deficient() {
        let (u, y) = first_order_data(20);
        let r = synthesize_output_feedback(&u, &y, &config(2, 18, Objective::Stabilize), &SynthesisOptions::default());
        assert!(matches!(r, Err(Error::RankDeficient { .. })), "{r:?}");
    }

    #[test]
    fn matches_the_model_based_design() {
        let (u, y) = first_order_data(20);
        let opts = SynthesisOptions::default();
        let data = synthesize_output_feedback(&u, &y, &config(1, 19, Objective::H2), &opts).unwrap();

        let cfg = config(1, 19, Objective::H2);
        let (plant, _) = build_extended_state_plant(1, 1, 1, &cfg.b_d0).unwrap();
        let (a, b) = plant.close_uncertainty(&from_rows(&[&[1.0, 1.2, 0.3]]));
        let exact = crate::lft::LftPlant::nominal(a, b)
            .with_disturbance(plant.b_d.clone())
            .with_performance(cfg.c_e.clone(), cfg.d_eu.clone());
        let model = crate::synthesis::synthesize_h2(&exact, &MultiplierClass::zero(2, 0), &opts).unwrap();
        let (gd, gm) = (data.synthesis.gamma.unwrap(), model.gamma.unwrap());
        assert!(gd >= gm * (1.0 - 1e-6) && gd <= gm * 1.01, "{gd} vs {gm}");
        assert!((&data.synthesis.k - &model.k).amax() < 1e-2 * model.k.amax(), "{} vs {}", data.synthesis.k, model.k);
    }
}
