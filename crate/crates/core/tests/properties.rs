use approx::assert_relative_eq;
use proptest::prelude::*;

use pego_lab::criteria::{Criterion, FamilyEvaluator, DEFAULT_SHIFTS};
use pego_lab::diagnosis::{greedy_net, weighted_distance};
use pego_lab::families::{random_family, FamilySpec, KindMix};
use pego_lab::transform::plancherel_check;
use pego_lab::{FrequencyGrid, HalfLineFunction, Order, PegoFamily, TimeGrid};

fn coarse() -> TimeGrid {
    TimeGrid::new(4e-3, 30.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plancherel_holds_for_exponentials(a in 0.5f64..4.0, x in 0.0f64..2.0) {
        let g = TimeGrid::default();
        let f = HalfLineFunction::exponential(a).unwrap();
        let c = plancherel_check(&f, Order::new(x).unwrap(), &g, &FrequencyGrid::for_time_grid(&g)).unwrap();
        let exact = 1.0 / (2.0 * (a + x));
        assert_relative_eq!(c.lhs, exact, max_relative = 1e-3);
        assert_relative_eq!(c.rhs, exact, max_relative = 1e-3);
    }

    #[test]
    fn suprema_ignore_member_order(seed in 0u64..1000, rot in 1usize..5) {
        let spec = random_family(seed, 5, KindMix::default()).unwrap();
        let g = coarse();
        let yg = FrequencyGrid::for_time_grid(&g);
        let fam = spec.instantiate(g).unwrap();
        let mut members = fam.members.clone();
        members.rotate_left(rot);
        let rotated = PegoFamily::new(members, fam.order, g).unwrap();
        let a = FamilyEvaluator::new(&fam, yg, DEFAULT_SHIFTS).unwrap();
        let b = FamilyEvaluator::new(&rotated, yg, DEFAULT_SHIFTS).unwrap();
        for (c, s) in [
            (Criterion::ExpEquivanish, 1.0),
            (Criterion::LaplaceEquicont, 0.1),
            (Criterion::ExpEquicont, 0.016),
            (Criterion::LaplaceEquivanish, 20.0),
        ] {
            prop_assert_eq!(a.evaluate(c, s, 1.0).unwrap().supremum, b.evaluate(c, s, 1.0).unwrap().supremum);
        }
    }

    #[test]
    fn tails_shrink_as_truncation_grows(seed in 0u64..1000) {
        let g = coarse();
        let fam = random_family(seed, 3, KindMix::default()).unwrap().instantiate(g).unwrap();
        let ev = FamilyEvaluator::new(&fam, FrequencyGrid::for_time_grid(&g), DEFAULT_SHIFTS).unwrap();
        let t = ev.sweep(Criterion::ExpEquivanish, &[0.5, 1.0, 2.0, 4.0], 1.0).unwrap();
        let y = ev.sweep(Criterion::LaplaceEquivanish, &[8.0, 16.0, 32.0, 64.0], 1.0).unwrap();
        for r in [t, y] {
            prop_assert!(r.windows(2).all(|w| w[1].supremum <= w[0].supremum + 1e-15));
        }
    }

    #[test]
    fn greedy_net_covers_every_member(seed in 0u64..1000, radius in 0.05f64..1.0) {
        let g = coarse();
        let fam = random_family(seed, 8, KindMix::default()).unwrap().instantiate(g).unwrap();
        let w = fam.weighted_members().unwrap();
        let refs: Vec<&[_]> = w.iter().map(|v| v.as_slice()).collect();
        let centers = greedy_net(&refs, radius, g.dt());
        prop_assert_eq!(centers[0], 0);
        for m in &refs {
            prop_assert!(centers.iter().any(|&c| weighted_distance(refs[c], m, g.dt()) <= radius));
        }
        for (i, &a) in centers.iter().enumerate() {
            for &b in &centers[..i] {
                prop_assert!(weighted_distance(refs[a], refs[b], g.dt()) > radius);
            }
        }
    }

    #[test]
    fn random_specs_roundtrip_and_are_pego(seed in any::<u64>(), size in 1usize..6) {
        let spec = random_family(seed, size, KindMix::default()).unwrap();
        prop_assert_eq!(&FamilySpec::from_json(&spec.to_json()).unwrap(), &spec);
        let g = coarse();
        for f in &spec.members {
            prop_assert!(pego_lab::halfline::verify_pego(f, Order::new(1.0).unwrap(), &g).is_ok());
        }
    }
}
