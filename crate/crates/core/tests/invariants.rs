use bienayme::foata::{compress, ff_decode, ff_encode, DegreeSequence, FFSequence};
use bienayme::paths::{classify, decode, encode, vervaat, width_upper, LatticePath, PathKind};
use bienayme::{OffspringDist, Order, PlaneTree};
use proptest::prelude::*;

/// Child counts of a plane tree in BFS order, built from a bridge by the
/// cycle lemma so every shape is reachable.
fn tree_strategy(max_n: usize) -> impl Strategy<Value = PlaneTree> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(0u32..4, n)))
        .prop_filter_map("no bridge", |(n, raw)| {
            // force the increments to sum to −1 by trimming degrees
            let mut deg = raw;
            let mut excess: i64 = deg.iter().map(|&d| d as i64 - 1).sum::<i64>() + 1;
            for d in deg.iter_mut() {
                while excess > 0 && *d > 0 {
                    *d -= 1;
                    excess -= 1;
                }
            }
            let mut i = 0;
            while excess < 0 {
                deg[i % n] += 1;
                excess += 1;
                i += 1;
            }
            let inc: Vec<i64> = deg.iter().map(|&d| d as i64 - 1).collect();
            let bridge = LatticePath::from_increments(&inc).ok()?;
            let (exc, _) = vervaat(&bridge).ok()?;
            decode(&exc, Order::Bfs).ok()
        })
}

proptest! {
    #[test]
    fn codecs_round_trip(t in tree_strategy(40)) {
        for order in [Order::Lex, Order::Bfs] {
            let p = encode(&t, order);
            prop_assert_eq!(p.kind(), PathKind::Excursion);
            let back = decode(&p, order).unwrap();
            prop_assert_eq!(back.child_counts(), t.child_counts());
        }
    }

    #[test]
    fn width_sandwich(t in tree_strategy(60)) {
        let w = t.width();
        let upper = width_upper(&encode(&t, Order::Bfs));
        prop_assert!(t.max_degree().0 <= w);
        prop_assert!(w as i64 <= upper + 1);
    }

    #[test]
    fn height_bounds_from_the_max_degree_vertex(t in tree_strategy(60)) {
        let dec = t.decompose_at_max();
        prop_assert!(dec.height_lower_bound() <= t.height());
        prop_assert!(t.height() <= dec.height_upper_bound());
    }

    #[test]
    fn vervaat_gives_an_excursion(inc in proptest::collection::vec(-1i64..3, 1..30)) {
        let total: i64 = inc.iter().sum();
        let mut inc = inc;
        // top up or trim the last steps so the walk ends at −1
        let mut need = -1 - total;
        for x in inc.iter_mut().rev() {
            if need == 0 { break; }
            let nx = (*x + need).max(-1);
            need -= nx - *x;
            *x = nx;
        }
        prop_assume!(need == 0);
        let b = LatticePath::from_increments(&inc).unwrap();
        let (e, m) = vervaat(&b).unwrap();
        prop_assert_eq!(classify(e.values()), PathKind::Excursion);
        prop_assert!(m <= inc.len());
    }

    #[test]
    fn foata_fuchs_round_trip(t in tree_strategy(12), seed in any::<u64>()) {
        // the BFS child counts of a plane tree are a degree sequence
        let d = DegreeSequence::new(t.child_counts().to_vec()).unwrap();
        let (c, _) = compress(&d);
        let mut rng = bienayme::rng::stream(seed, 0);
        let lt = bienayme::foata::sample_tree_with_degrees(&c, &mut rng);
        let w: FFSequence = ff_encode(&lt).unwrap();
        prop_assert!(w.contains_in(&c));
        prop_assert_eq!(ff_decode(&w, &c).unwrap().edges(), lt.edges());
    }

    #[test]
    fn tails_are_monotone(u in 0u64..100_000, family in 0usize..3) {
        let name = ["cauchy_A", "cauchy_B", "cauchy_C"][family];
        let d = bienayme::dist::load_spec(&format!(r#"{{"kind":"{name}"}}"#)).unwrap();
        prop_assert!(d.tail(u + 1) <= d.tail(u));
        prop_assert!(d.tail_moment(u + 1) <= d.tail_moment(u));
        prop_assert!(d.tail_moment(u) >= u as f64 * d.tail(u) * (1.0 - 1e-12));
    }
}

#[test]
fn geometric_is_critical_and_feasible_everywhere() {
    let d = OffspringDist::geometric();
    assert!(d.is_critical());
    assert!((1..50).all(|n| d.is_feasible(n)));
}
