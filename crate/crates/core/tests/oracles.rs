//! Nominal designs against textbook solutions computed another way.

mod common;

use common::lemmas::Check;
use common::oracles::*;
use datarobust::linalg::{eye, from_rows};
use datarobust::lft::LftPlant;
use datarobust::synthesis::{synthesize_h2, SynthesisOptions};

fn pass(c: Check) {
    if let Err(e) = c {
        panic!("{e}");
    }
}

#[test]
fn nominal_h2_matches_riccati() {
    pass(h2_against_riccati(20));
}

#[test]
fn nominal_hinf_matches_primal_bounded_real() {
    pass(hinf_against_primal(20));
}

#[test]
fn scalar_norms_match_closed_forms() {
    pass(scalar_closed_forms());
}

#[test]
fn scalar_riccati_design() {
    // x₊ = 0.5x + u + d, e = (x, u)
    let plant = LftPlant::nominal(from_rows(&[&[0.5]]), eye(1))
        .with_disturbance(eye(1))
        .with_performance(from_rows(&[&[1.0], &[0.0]]), from_rows(&[&[0.0], &[1.0]]));
    // p = 1 + 0.25 p / (1 + p)
    let mut p: f64 = 1.0;
    for _ in 0..200 {
        p = 1.0 + 0.25 * p / (1.0 + p);
    }
    let res = synthesize_h2(&plant, &no_uncertainty(&plant), &SynthesisOptions::default()).unwrap();
    assert!((res.gamma.unwrap() - p.sqrt()).abs() < 1e-4);
    assert!((res.k[(0, 0)] + 0.5 * p / (1.0 + p)).abs() < 1e-4);
}
