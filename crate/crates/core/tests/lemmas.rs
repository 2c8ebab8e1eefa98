//! Properties of the multiplier classes: prior structure, learnt classes and
//! their combination, plus the ordering of design values they induce.

mod common;

use common::gaussian;
use common::lemmas::*;
use datarobust::lft::BlockKind;
use datarobust::lmi::{smat, svec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pass(c: Check) {
    if let Err(e) = c {
        panic!("{e}");
    }
}

#[test]
fn prior_class_contains_every_admissible_uncertainty() {
    pass(prior_forward(200));
}

#[test]
fn members_of_the_prior_class_decompose_inside_the_bounds() {
    pass(prior_reverse(120));
}

#[test]
fn repeated_scalar_class_admits_only_scalar_multiples_of_identity() {
    pass(repeated_scalar_structure(40));
}

#[test]
fn true_uncertainty_is_in_every_learnt_class() {
    pass(truth_in_learnt(12));
}

#[test]
fn combined_members_are_prior_and_learnt_members() {
    pass(combined_ordering(6));
}

#[test]
fn adding_multipliers_never_hurts() {
    pass(sum_monotone());
}

#[test]
fn diagonal_bounds_improve_with_more_data() {
    pass(diag_length_monotone());
}

#[test]
fn looser_noise_bounds_never_help() {
    pass(noise_monotone());
}

#[test]
fn larger_strict_margin_never_helps() {
    pass(margin_monotone());
}

#[test]
fn svec_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..50 {
        let g = gaussian(5, 5, &mut rng);
        let s = &g + g.transpose();
        let back = smat(&svec(&s).unwrap()).unwrap();
        assert!((&back - &s).norm() < 1e-14);
    }
}

#[test]
fn structures_in_the_suite_cover_both_block_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kinds: Vec<BlockKind> = (0..50)
        .flat_map(|_| common::random_structure(&mut rng).0.blocks.into_iter().map(|b| b.kind))
        .collect();
    assert!(kinds.contains(&BlockKind::Full) && kinds.contains(&BlockKind::RepeatedScalar));
}
