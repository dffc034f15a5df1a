mod common;

use common::{random_complex, random_divisor, random_point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdw_core::*;

fn setup(seed: u64, integral: bool) -> (ChaCha8Rng, MetrizedComplex) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cx = random_complex(&mut rng, 4, integral);
    (rng, cx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_grows_by_at_most_one(seed in any::<u64>()) {
        let (mut rng, cx) = setup(seed, false);
        let engine = RankEngine::new(&cx);
        let deg = rng.gen_range(-1..=cx.genus() as i64 + 1);
        let d = random_divisor(&mut rng, &cx, deg, 4);
        let mut e = d.clone();
        e.add_chips(random_point(&mut rng, &cx, 4), 1);
        let (rd, re) = (engine.rank_value(&d).unwrap(), engine.rank_value(&e).unwrap());
        prop_assert!(re == rd || re == rd + 1, "{} then {}", rd, re);
        prop_assert!(rd >= deg - cx.genus() as i64);
        prop_assert!(rd <= deg.max(-1));
    }

    #[test]
    fn reduction_is_nonnegative_away_from_base(seed in any::<u64>()) {
        let (mut rng, cx) = setup(seed, false);
        let d = random_divisor(&mut rng, &cx, 2, 4);
        let q = random_point(&mut rng, &cx, 4);
        let red = reduce_at(&cx, &d, &q).unwrap();
        prop_assert_eq!(red.degree(), d.degree());
        let anchor = q.vertex().filter(|v| cx.genus_of(*v) == 1);
        for (p, c) in red.iter() {
            let at_base = *p == q || (anchor.is_some() && p.vertex() == anchor);
            prop_assert!(at_base || c > 0, "{} at {}", c, cx.format_point(p));
        }
        prop_assert!(dhar_burn(&cx, &red, &q).unwrap().is_reduced());
    }

    #[test]
    fn refinement_preserves_rank_and_equivalence(seed in any::<u64>()) {
        let (mut rng, cx) = setup(seed, false);
        let cuts: Vec<Point> = cx
            .edge_ids()
            .filter(|_| rng.gen_bool(0.5))
            .map(|e| cx.midpoint(e))
            .collect();
        let fine = refine(&cx, &cuts).unwrap();
        let d = random_divisor(&mut rng, &cx, cx.genus() as i64, 4);
        let e = random_divisor(&mut rng, &cx, cx.genus() as i64, 4);
        let (fd, fe) = (fine.map_divisor(&d), fine.map_divisor(&e));
        prop_assert_eq!(fine.complex.genus(), cx.genus());
        prop_assert_eq!(rank(&cx, &d).unwrap().rank, rank(&fine.complex, &fd).unwrap().rank);
        prop_assert_eq!(is_equivalent(&cx, &d, &e).unwrap(), is_equivalent(&fine.complex, &fd, &fe).unwrap());
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let (_, cx) = setup(seed, false);
        let doc = dsl::ComplexDocument { complex: cx.clone(), points: Default::default(), divisors: Default::default() };
        let text = dsl::print(&doc);
        let back = dsl::parse(&text).unwrap();
        prop_assert_eq!(back.complex.to_spec(), cx.to_spec());
    }
}
