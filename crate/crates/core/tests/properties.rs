//! Property tests over random words, boundary points and cylinder sets.

use lpfree_core::besov::bridge_identity;
use lpfree_core::group::image_of_cylinder;
use lpfree_core::measure::{
    cocycle_lp_norm_p, cocycle_lp_norm_p_naive, integrate_nu, mu_cylinder, mu_set, norm_brackets, poisson_kernel,
    radon_nikodym_check,
};
use lpfree_core::mobius::{check_chain_rule, check_mean_value, derivative_table, is_mobius, MobiusOptions};
use lpfree_core::sample::{action_map, boundary_space, extend_by_images, random_boundary_points, tree_derivative};
use lpfree_core::verify::random_pair_function;
use lpfree_core::{BoundaryPoint, CylinderSet, ExactScalar, GromovProduct, Letter, Rank, Word};

use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rank_strategy() -> impl Strategy<Value = Rank> {
    (2usize..=3).prop_map(|n| Rank::new(n).unwrap())
}

/// A reduced word of length at most `max` in the given rank.
fn word(rank: Rank, max: usize) -> impl Strategy<Value = Word> {
    let n = rank.n() as u16;
    prop::collection::vec((0..n, any::<bool>()), 0..=max * 2).prop_map(move |ls| {
        let w = Word::reduce(ls.into_iter().map(|(g, inv)| Letter::new(g, inv)));
        w.prefix(w.len().min(max))
    })
}

fn point(rank: Rank) -> impl Strategy<Value = BoundaryPoint> {
    any::<u64>().prop_map(move |s| rank.random_boundary(4, 3, &mut ChaCha8Rng::seed_from_u64(s)))
}

fn with_rank<S: Strategy>(f: impl Fn(Rank) -> S) -> impl Strategy<Value = (Rank, S::Value)> {
    rank_strategy().prop_flat_map(move |r| (Just(r), f(r)))
}

fn q_pow(q: u64, k: i64) -> ExactScalar {
    ExactScalar::power(q, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws((_r, (g, h, k)) in with_rank(|r| (word(r, 8), word(r, 8), word(r, 8)))) {
        prop_assert!(g.multiply(&g.inverse()).is_identity());
        prop_assert_eq!(g.multiply(&h).multiply(&k), g.multiply(&h.multiply(&k)));
        prop_assert_eq!(g.inverse().len(), g.len());
        prop_assert_eq!(g.multiply(&h).inverse(), h.inverse().multiply(&g.inverse()));
        prop_assert_eq!(g.to_string().parse::<Word>().unwrap(), g.clone());
        prop_assert_eq!(g.distance(&h), h.distance(&g));
        prop_assert!(g.distance(&k) <= g.distance(&h) + h.distance(&k));
    }

    #[test]
    fn boundary_points_round_trip_and_act((_r, (xi, g, h)) in with_rank(|r| (point(r), word(r, 6), word(r, 6)))) {
        prop_assert_eq!(xi.to_string().parse::<BoundaryPoint>().unwrap(), xi.clone());
        prop_assert_eq!(xi.act(&h).act(&g), xi.act(&g.multiply(&h)));
        prop_assert_eq!(xi.act(&g).act(&g.inverse()), xi.clone());
        // unrolling one period leaves the point unchanged
        let unrolled = BoundaryPoint::new(&xi.prefix(xi.preperiod().len() + xi.period().len()), xi.period()).unwrap();
        prop_assert_eq!(unrolled, xi.clone());
    }

    #[test]
    fn gromov_product_is_ultrametric((_r, (a, b, c)) in with_rank(|r| (point(r), point(r), point(r)))) {
        prop_assert_eq!(a.gromov_product(&b), b.gromov_product(&a));
        let m = a.gromov_product(&b).min(b.gromov_product(&c));
        prop_assert!(a.gromov_product(&c) >= m);
        prop_assert_eq!(a.gromov_product(&a), GromovProduct::Infinite);
    }

    #[test]
    fn key_relation((r, (xi, om, g)) in with_rank(|r| (point(r), point(r), word(r, 8)))) {
        prop_assume!(xi != om);
        let q = r.q();
        let gi = g.inverse();
        let before = xi.gromov_product(&om).finite().unwrap() as i64;
        let after = xi.act(&g).gromov_product(&om.act(&g)).finite().unwrap() as i64;
        let rhs = &(&poisson_kernel(r, &gi, &xi) * &poisson_kernel(r, &gi, &om)) * &q_pow(q, -2 * before);
        prop_assert_eq!(q_pow(q, -2 * after), rhs);
    }

    #[test]
    fn mu_is_additive_over_children((r, x) in with_rank(|r| word(r, 6))) {
        let total: ExactScalar = r.children(&x).iter().map(|c| mu_cylinder(r, c)).sum();
        prop_assert_eq!(total, mu_cylinder(r, &x));
    }

    #[test]
    fn cylinder_set_algebra((r, (xs, ys)) in with_rank(|r| (
        prop::collection::vec(word(r, 3), 0..5),
        prop::collection::vec(word(r, 3), 0..5),
    ))) {
        let a = CylinderSet::from_cylinders(r, xs);
        let b = CylinderSet::from_cylinders(r, ys);
        let union = a.union(&b);
        let inter = a.intersection(&b);
        prop_assert_eq!(&mu_set(&union) + &mu_set(&inter), &mu_set(&a) + &mu_set(&b));
        prop_assert_eq!(&mu_set(&a) + &mu_set(&a.complement()), ExactScalar::one());
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.difference(&b).union(&inter), a.clone());
        prop_assert_eq!(union.complement(), a.complement().intersection(&b.complement()));
    }

    #[test]
    fn image_of_a_cylinder_contains_the_images((r, (x, g, s)) in with_rank(|r| (word(r, 4), word(r, 4), any::<u64>()))) {
        let img = image_of_cylinder(r, &g, &x);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for _ in 0..10 {
            let xi = r.random_boundary(5, 2, &mut rng);
            prop_assert_eq!(img.contains(&xi.act(&g)), xi.starts_with(&x));
        }
    }

    #[test]
    fn radon_nikodym_small((r, (g, x)) in with_rank(|r| (word(r, 3), word(r, 3)))) {
        let (lhs, rhs) = radon_nikodym_check(r, &g, &x);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn norm_matches_double_sum((r, (g, p)) in with_rank(|r| (word(r, 14), 1u32..=4))) {
        let fast = cocycle_lp_norm_p(r, &g, p).unwrap();
        prop_assert_eq!(&fast, &cocycle_lp_norm_p_naive(r, &g, p).unwrap());
        prop_assert_eq!(&fast, &cocycle_lp_norm_p(r, &g.inverse(), p).unwrap());
        let b = norm_brackets(r, g.len(), p);
        prop_assert!(b.lower <= fast && fast <= b.upper);
    }

    #[test]
    fn nu_is_invariant((r, (g, s)) in with_rank(|r| (word(r, 6), any::<u64>()))) {
        let f = random_pair_function(r, 3, &mut ChaCha8Rng::seed_from_u64(s));
        prop_assert_eq!(integrate_nu(&f.pullback(&g)).unwrap(), integrate_nu(&f).unwrap());
    }

    #[test]
    fn besov_bridge((r, (g, p)) in with_rank(|r| (word(r, 12), 2u32..=3))) {
        let (besov, norm) = bridge_identity(r, &g, p).unwrap();
        prop_assert_eq!(besov, norm);
    }

    #[test]
    fn scalar_round_trip_and_field_laws(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
        let x = ExactScalar::ratio(a, b);
        let y = ExactScalar::ratio(c, d);
        prop_assert_eq!(x.to_string().parse::<ExactScalar>().unwrap(), x.clone());
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        prop_assert_eq!(&x * &y, &y * &x);
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sampled_actions_are_mobius((r, (g, h, s)) in with_rank(|r| (word(r, 4), word(r, 4), any::<u64>()))) {
        prop_assume!(!g.is_identity() && !h.is_identity());
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let base = random_boundary_points(r, 12, 3, 2, &mut rng);
        let pts = extend_by_images(&base, &[h.clone(), g.multiply(&h), g.clone()]);
        let space = boundary_space(r, &pts).unwrap();
        let mg = action_map(&pts, &g);
        let mh = action_map(&pts, &h);
        prop_assert!(is_mobius(&space, &mg, &MobiusOptions::default()).unwrap().holds);
        let table = derivative_table(&space, &mg).unwrap();
        for x in mg.domain() {
            prop_assert_eq!(table[x].as_ref().unwrap(), &tree_derivative(r, &g, &pts[x]));
        }
        prop_assert!(check_mean_value(&space, &mg, &table).unwrap().max.is_zero());
        prop_assert!(check_chain_rule(&space, &mg, &mh).unwrap().max.is_zero());
    }
}
