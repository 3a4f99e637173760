mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankforge_core::dataset::{event_to_csv, load_event};
use rankforge_core::field::check_tie_averaged;
use rankforge_core::tiebreak::head_to_head;
use rankforge_core::{
    apply_chain, rank_field, score_field, verify_log_product_equivalence, EventField, Method, Rank, ScoreFunction,
    ScoringSystem, TieBreakChain, TieContext, WeightVector,
};

fn field_from(seed: u64, n: usize, stages: usize, tie_chance: f64) -> EventField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_field(n, stages, &mut rng, tie_chance)
}

fn base_function() -> impl Strategy<Value = ScoreFunction> {
    prop_oneof![
        Just(ScoreFunction::Linear),
        Just(ScoreFunction::Logarithmic),
        (0.05f64..=1.0).prop_map(|p| ScoreFunction::power(p).unwrap()),
    ]
}

proptest! {
    #[test]
    fn rank_display_round_trips(doubled in 2u32..100_000) {
        let rank = Rank::from_doubled(doubled).unwrap();
        let text = rank.to_string();
        prop_assert_eq!(text.parse::<Rank>().unwrap(), rank);
        prop_assert_eq!(text.contains('.'), !rank.is_integer());
    }

    #[test]
    fn generated_stages_pass_the_validator(seed: u64, n in 1usize..40, tie in 0.0f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stage = common::random_stage(n, &mut rng, tie);
        prop_assert!(check_tie_averaged("s", &stage).is_ok());
    }

    #[test]
    fn duplicated_placement_is_rejected(seed: u64, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stage = common::random_stage(n, &mut rng, 0.0);
        // an integer shared by two competitors is never a tie average
        stage[1] = stage[0];
        prop_assert!(check_tie_averaged("s", &stage).is_err());
    }

    #[test]
    fn product_and_log_agree(seed: u64, n in 1usize..=20, tie in 0.0f64..0.5) {
        let report = verify_log_product_equivalence(&field_from(seed, n, 3, tie)).unwrap();
        prop_assert!(report.matches);
    }

    #[test]
    fn affine_wrapper_keeps_the_ranking(
        seed: u64,
        n in 2usize..=20,
        base in base_function(),
        offset in -1000.0f64..1000.0,
        scale in 0.01f64..100.0,
    ) {
        let field = field_from(seed, n, 3, 0.2);
        let w = WeightVector::unit(3);
        let plain = score_field(&field, &Method::Additive(base.clone()), &w).unwrap();
        let wrapped = ScoreFunction::affine(base, offset, scale).unwrap();
        let shifted = score_field(&field, &Method::Additive(wrapped), &w).unwrap();
        prop_assert!(plain.same_ranking(&shifted));
    }

    #[test]
    fn input_order_does_not_matter(seed: u64, n in 1usize..=20, base in base_function()) {
        let field = field_from(seed, n, 3, 0.2);
        let mut shuffled: Vec<_> = field.competitors().to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let other = EventField::unnamed(3, shuffled).unwrap();
        let system = ScoringSystem::new(Method::Additive(base)).with_chain("head2head,shared".parse().unwrap());
        let a = rank_field(&field, &system).unwrap();
        let b = rank_field(&other, &system).unwrap();
        prop_assert!(a.same_ranking(&b));
    }

    #[test]
    fn chain_only_reorders_within_ties(seed: u64, n in 1usize..=20, weights in prop::collection::vec(1u8..4, 3)) {
        let field = field_from(seed, n, 3, 0.3);
        let w = WeightVector::new(weights.iter().map(|&x| x as f64).collect()).unwrap();
        let raw = score_field(&field, &Method::sum(), &w).unwrap();
        let chain: TieBreakChain = "head2head,stage,stage:2,shared".parse().unwrap();
        let ctx = TieContext::new(&field).with_weights(&w);
        let broken = apply_chain(raw.clone(), &chain, &ctx).unwrap();
        prop_assert!(common::numbering_holds(&broken));
        prop_assert_eq!(broken.len(), raw.len());
        for before in raw.entries() {
            let after = broken.entry(&before.name).unwrap();
            prop_assert_eq!(after.score, before.score);
            let size = raw.entries().iter().filter(|e| e.tie_group == before.tie_group).count() as u32;
            prop_assert!(after.rank >= before.rank && after.rank < before.rank + size);
        }
    }

    #[test]
    fn head_to_head_is_antisymmetric(seed: u64) {
        let field = field_from(seed, 2, 3, 0.0);
        let (a, b) = (&field.competitors()[0].ranks, &field.competitors()[1].ranks);
        prop_assert_eq!(head_to_head(a, b), head_to_head(b, a).reverse());
        // three stages and distinct ranks always give a majority
        prop_assert!(head_to_head(a, b).is_ne());
    }

    #[test]
    fn events_round_trip_through_csv(seed: u64, n in 1usize..=20, stages in 1usize..5) {
        let field = field_from(seed, n, stages, 0.3);
        let csv = event_to_csv(&field);
        let back = load_event(csv.as_bytes()).unwrap();
        prop_assert_eq!(event_to_csv(&back), csv);
        prop_assert_eq!(back.competitors(), field.competitors());
    }

    #[test]
    fn scores_are_monotone_in_each_stage(base in base_function(), lo in 2u32..200, step in 1u32..200) {
        let a = Rank::from_doubled(lo).unwrap();
        let b = Rank::from_doubled(lo + step).unwrap();
        prop_assert!(base.eval_f64(a).unwrap() < base.eval_f64(b).unwrap());
    }
}

#[test]
fn permuted_rank_vectors_tie_under_both_methods() {
    let csv = "name,a,b,c\nX,1,2,3\nY,3,1,2\nZ,2,3,1\n";
    let field = load_event(csv.as_bytes()).unwrap();
    let report = verify_log_product_equivalence(&field).unwrap();
    assert!(report.matches);
    assert_eq!(report.product.ties().len(), 1);
    assert_eq!(report.product.ties()[0].len(), 3);
}

#[test]
fn seeded_ten_competitor_field() {
    let report = verify_log_product_equivalence(&field_from(42, 10, 3, 0.0)).unwrap();
    assert!(report.matches);
}

#[test]
fn sailing_points_follow_the_published_scale() {
    let f = ScoreFunction::sailing_1968(10).unwrap();
    let points: BTreeMap<u32, f64> = (1..=8).map(|j| (j, f.eval_f64(Rank::new(j).unwrap()).unwrap())).collect();
    assert_eq!(points[&1], 0.0);
    assert_eq!(points[&6], 11.7);
    assert_eq!(points[&7], 13.0);
    assert_eq!(points[&8], 14.0);
}
