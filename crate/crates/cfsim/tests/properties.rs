use std::sync::OnceLock;

use cfsim::cf_engine::{cylinder_measure, derive_sequences, expand_cylinder, CfParams, Construction, CylinderSet, Schedule};
use cfsim::cocycles::{psi2, sigma, su2_flow_commutation, t_phi};
use cfsim::equidist::{dist_l1, star_discrepancy, EmpiricalDistribution, PointCloud};
use cfsim::groups::{conj_star, g_inv, g_mul, phi, GElement, LongG, LongTime, Su2, Z2};
use cfsim::joinings::{joining_metric, shulman_check, EmpiricalJoining};
use cfsim::rank_one::{tower_apply, tower_apply_inv, TowerPoint, MAX_STAGE};
use num_complex::Complex64;
use proptest::prelude::*;

fn cons() -> &'static Construction {
    static C: OnceLock<Construction> = OnceLock::new();
    C.get_or_init(|| Construction::build(&CfParams::default()).unwrap())
}

fn su2() -> impl Strategy<Value = Su2> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter("non-degenerate", |q| q.iter().map(|x| x * x).sum::<f64>() > 1e-3).prop_map(Su2::new)
}

fn g_elem() -> impl Strategy<Value = GElement> {
    (-4.0f64..4.0, su2()).prop_map(|(t, m)| GElement::new(t, m))
}

fn tower_point() -> impl Strategy<Value = TowerPoint> {
    (0usize..4, prop::collection::vec(0u8..3, MAX_STAGE)).prop_flat_map(|(stage, tail)| {
        let h = cfsim::rank_one::chacon_height(stage);
        (0..h).prop_map(move |rung| TowerPoint { stage, rung, tail: tail[..MAX_STAGE - stage].to_vec() })
    })
}

fn table(k: usize) -> impl Strategy<Value = EmpiricalJoining> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k * k).prop_map(move |v| {
        let mut e = EmpiricalJoining::zeros("t", k);
        for (idx, (re, im)) in v.into_iter().enumerate() {
            e.set(idx / k, idx % k, Complex64::new(re, im));
        }
        e
    })
}

/// `D*` of a 1-d cloud by the sorted-order formula.
fn star_1d(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n)).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn g_is_a_group(x in g_elem(), y in g_elem(), z in g_elem()) {
        prop_assert!(g_mul(&g_mul(&x, &y), &z).dist(&g_mul(&x, &g_mul(&y, &z))) < 1e-12);
        prop_assert!(g_mul(&x, &g_inv(&x)).dist(&GElement::IDENTITY) < 1e-12);
    }

    #[test]
    fn phi_is_a_flow_of_period_two(t in -4.0f64..4.0, s in -4.0f64..4.0, m in su2()) {
        prop_assert!(phi(t + s, &m).dist(&phi(t, &phi(s, &m))) < 1e-12);
        prop_assert!(phi(2.0, &m).dist(&m) < 1e-12);
    }

    #[test]
    fn star_is_an_involutive_automorphism(x in g_elem(), y in g_elem()) {
        prop_assert!(conj_star(&g_mul(&x, &y)).dist(&g_mul(&conj_star(&x), &conj_star(&y))) < 1e-12);
        prop_assert!(conj_star(&conj_star(&x)).dist(&x) < 1e-12);
    }

    #[test]
    fn long_group_agrees_with_float_group(x in g_elem(), y in g_elem()) {
        let p = LongG::from_g(&x).mul(&LongG::from_g(&y)).to_g();
        prop_assert!(p.dist(&g_mul(&x, &y)) < 1e-12);
        prop_assert!(LongG::from_g(&x).mul(&LongG::from_g(&x).inv()).to_g().dist(&GElement::IDENTITY) < 1e-12);
    }

    #[test]
    fn long_time_arithmetic_is_exact_in_the_whole_part(a in -10i128.pow(20)..10i128.pow(20), b in -10i128.pow(20)..10i128.pow(20), f in 0.0f64..1.0) {
        let x = LongTime::from_parts(a, f);
        let y = LongTime::int(b);
        prop_assert_eq!(x.add(&y).sub(&y), x);
        prop_assert_eq!(x.add(&x.neg()), LongTime::int(0));
    }

    #[test]
    fn level_recursion_holds_for_any_schedule(floor in 2u64..400, power in 1u32..6) {
        let params = CfParams { r_schedule: Schedule::MaxPow { floor, power }, ..CfParams::default() };
        let seq = derive_sequences(&params, 6).unwrap();
        for n in 0..6 {
            prop_assert_eq!(seq[n + 1].1 - seq[n + 1].0, (2 * n as i128 + 1) * seq[n].1);
            prop_assert_eq!(seq[n + 1].0, seq[n].1 * (2 * params.r(n) as i128 - 1));
        }
    }

    #[test]
    fn cylinders_split_into_next_level_cylinders(lo in -190.0f64..150.0, len in 1.0f64..40.0) {
        let c = CylinderSet::interval(1, lo, lo + len);
        let e = expand_cylinder(&c, cons(), 2, 1_000_000).unwrap();
        let (a, b) = (cylinder_measure(&c, cons()).0, cylinder_measure(&e, cons()).0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn tower_map_is_invertible(p in tower_point()) {
        let q = tower_apply(&p).unwrap();
        prop_assert_eq!(tower_apply_inv(&q).unwrap().canonical(), p.canonical());
    }

    #[test]
    fn fiber_translations_commute_with_the_skew_product(p in tower_point(), s in 0u8..2, g in 0u8..2) {
        let y = (p, Z2(s));
        let a = t_phi(&sigma(&Z2(g), &y)).unwrap();
        let b = sigma(&Z2(g), &t_phi(&y).unwrap());
        prop_assert_eq!(a.0.canonical(), b.0.canonical());
        prop_assert_eq!(a.1, b.1);
        // ψ^(2)(x, s+1) + ψ^(2)(x, s) = 0 in Z2.
        let flipped = (y.0.clone(), Z2(1 - s));
        prop_assert_eq!((psi2(&y).unwrap().0 + psi2(&flipped).unwrap().0) % 2, 0);
    }

    #[test]
    fn joining_distance_is_a_metric(x in table(4), y in table(4), z in table(4)) {
        let d = |a: &EmpiricalJoining, b: &EmpiricalJoining| joining_metric(a, b).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-15);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-15);
    }

    #[test]
    fn star_discrepancy_matches_sorted_formula(xs in prop::collection::vec(0.0f64..1.0, 1..60)) {
        let d = star_discrepancy(&PointCloud::one_dim(&xs)).unwrap();
        prop_assert!((d - star_1d(&xs)).abs() < 1e-12);
    }

    #[test]
    fn empirical_distributions_are_probabilities(v in prop::collection::vec(0u8..5, 1..200), w in prop::collection::vec(0u8..5, 1..200)) {
        let p = EmpiricalDistribution::from_samples(v);
        let q = EmpiricalDistribution::from_samples(w);
        prop_assert!((p.total() - 1.0).abs() < 1e-12);
        prop_assert!((p.product(&q).total() - 1.0).abs() < 1e-12);
        let d = dist_l1(&p, &q);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
    }

    #[test]
    fn flow_embeddings_commute_only_at_half_integers(k in -256i32..256) {
        let t = k as f64 / 64.0;
        prop_assert_eq!(su2_flow_commutation(t), k % 32 == 0);
    }
}

#[test]
fn shulman_condition_and_growth_on_default_schedule() {
    let params = CfParams::default();
    for n in 2..=6 {
        let c = shulman_check(&params, n).unwrap();
        assert!(c.holds && c.grows, "{c:?}");
    }
}
