//! Structural invariants checked on random inputs.

use num_traits::ToPrimitive;
use proptest::prelude::*;

use perclab::analysis::fit_power;
use perclab::connectivity::{crossing_lr, crossing_tb_white, ArmEvent, Crossing, Event, Scratch};
use perclab::dynamics::correlation_integral;
use perclab::estimators::{AlphaTable, Ell, Estimate};
use perclab::lattice::{build_region, CellIndex, LatticeKind, Shape};
use perclab::oracle::{exact_qt, exact_qt_transform, rates, TruthTable};
use perclab::rng::RngStream;
use perclab::sampling::{noise, noise_hetero, sample, Configuration, NoiseSpec};
use perclab::Exact;

fn table(bits: usize, words: &[u64]) -> TruthTable {
    TruthTable::from_fn(bits, |x| words[(x % 64) as usize % words.len()] >> (x / 64 % 64) & 1 == 1).unwrap()
}

fn lattice() -> impl Strategy<Value = LatticeKind> {
    prop_oneof![Just(LatticeKind::TriangularSite), Just(LatticeKind::SquareBond)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_and_transform_routes_agree(bits in 1usize..8, words in prop::collection::vec(any::<u64>(), 1..4),
                                          ts in prop::collection::vec(0.0f64..=1.0, 8)) {
        let f = table(bits, &words);
        let r = &ts[..bits];
        let a: f64 = exact_qt(&f, r).unwrap();
        let b: f64 = exact_qt_transform(&f, r, 8).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rational_route_agrees_with_floats(bits in 1usize..6, words in prop::collection::vec(any::<u64>(), 1..3),
                                         num in 0i64..=16) {
        let f = table(bits, &words);
        let t = Exact::new(num.into(), 16.into());
        let exact: Exact = exact_qt(&f, &rates(bits, t, None).unwrap()).unwrap();
        let float: f64 = exact_qt(&f, &rates(bits, num as f64 / 16.0, None).unwrap()).unwrap();
        prop_assert!((exact.to_f64().unwrap() - float).abs() < 1e-12);
    }

    #[test]
    fn qt_runs_from_mean_down_to_squared_mean(bits in 1usize..8, words in prop::collection::vec(any::<u64>(), 1..4),
                                              t in 0.0f64..=1.0, u in 0.0f64..=1.0) {
        let f = table(bits, &words);
        let mean: f64 = f.mean();
        let q = |s: f64| -> f64 { exact_qt(&f, &rates(bits, s, None).unwrap()).unwrap() };
        prop_assert!((q(0.0) - mean).abs() < 1e-12);
        prop_assert!((q(1.0) - mean * mean).abs() < 1e-12);
        let (lo, hi) = if t <= u { (t, u) } else { (u, t) };
        prop_assert!(q(lo) >= q(hi) - 1e-12);
        prop_assert!(q(hi) >= mean * mean - 1e-12);
    }

    #[test]
    fn crossings_are_monotone(kind in lattice(), n in 2u32..8, seed in any::<u64>(), flips in 1usize..20) {
        let g = Crossing::new(kind, n).unwrap();
        let region = g.region();
        let rng = RngStream::new(seed, 0);
        let mut x = sample(region, 0.5, &rng).unwrap();
        let mut s = Scratch::new();
        let mut before = g.eval(&x, &mut s);
        for k in 0..flips as u64 {
            let i = (rng.word(1, k) % region.len() as u64) as u32;
            x.set(CellIndex(i), true).unwrap();
            let after = g.eval(&x, &mut s);
            prop_assert!(after || !before);
            before = after;
        }
    }

    #[test]
    fn exactly_one_of_black_lr_and_white_tb(n in 1u32..12, seed in any::<u64>(), p in 0.2f64..0.8) {
        let region = build_region(LatticeKind::TriangularSite, Shape::Box { n }).unwrap();
        let x = sample(&region, p, &RngStream::new(seed, 0)).unwrap();
        prop_assert_ne!(crossing_lr(&x, &region).unwrap(), crossing_tb_white(&x, &region).unwrap());
    }

    // The square box is not self-dual for bonds, so both crossings may occur.
    #[test]
    fn some_crossing_on_the_bond_box(n in 1u32..12, seed in any::<u64>(), p in 0.2f64..0.8) {
        let region = build_region(LatticeKind::SquareBond, Shape::Box { n }).unwrap();
        let x = sample(&region, p, &RngStream::new(seed, 0)).unwrap();
        prop_assert!(crossing_lr(&x, &region).unwrap() || crossing_tb_white(&x, &region).unwrap());
    }

    #[test]
    fn colour_swap_exchanges_arm_colours(n in 3u32..10, seed in any::<u64>()) {
        let kind = LatticeKind::TriangularSite;
        let shape = Shape::Annulus { m: 2, n };
        let black = ArmEvent::new(kind, shape, "1".parse().unwrap()).unwrap();
        let white = ArmEvent::new(kind, shape, "0".parse().unwrap()).unwrap();
        let x = sample(black.region(), 0.5, &RngStream::new(seed, 0)).unwrap();
        let mut s = Scratch::new();
        prop_assert_eq!(black.eval(&x, &mut s), white.eval(&x.complement(), &mut s));
    }

    #[test]
    fn noise_touches_only_noised_cells(n in 2u32..10, seed in any::<u64>(), t in 0.0f64..=1.0) {
        let region = build_region(LatticeKind::TriangularSite, Shape::Box { n }).unwrap();
        let rng = RngStream::new(seed, 0);
        let x = sample(&region, 0.5, &rng).unwrap();
        prop_assert_eq!(&noise(&region, &x, &NoiseSpec::uniform(0.0), &rng).unwrap(), &x);
        let r: Vec<f64> = (0..region.len()).map(|i| if i % 2 == 0 { 0.0 } else { t }).collect();
        let y = noise_hetero(&region, &x, &r, &rng).unwrap();
        for i in (0..region.len()).step_by(2) {
            prop_assert_eq!(y.bit(i), x.bit(i));
        }
    }

    #[test]
    fn power_law_is_recovered(slope in -4.0f64..0.5, scale in 0.01f64..10.0) {
        let pts: Vec<(f64, f64, f64)> = (0..6).map(|k| {
            let x = 2f64.powi(k + 2);
            (x, scale * x.powf(slope), 0.0)
        }).collect();
        let fit = fit_power(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_length_brackets_the_noise_level(decay in prop::collection::vec(0.3f64..0.95, 2..9),
                                                   ts in prop::collection::vec(1e-4f64..=1.0, 1..12)) {
        let mut a = 1.0;
        let entries: Vec<(u32, Estimate)> = decay.iter().enumerate().map(|(k, d)| {
            a *= d;
            (4u32 << k, Estimate::exact(a))
        }).collect();
        let table = AlphaTable::with_anchors(entries, 4).unwrap();
        let mut sorted = ts.clone();
        sorted.sort_by(f64::total_cmp);
        let mut last: Option<Ell> = None;
        for &t in &sorted {
            let ell = table.sensitivity_length(t).unwrap();
            if let Ell::At(l) = ell {
                prop_assert!(table.eps(l).unwrap() <= t * (1.0 + 1e-12));
                if let Some(Ell::At(prev)) = last {
                    prop_assert!(l <= prev);
                }
            }
            last = Some(ell);
        }
    }

    #[test]
    fn frostman_integral_of_the_independent_limit(gamma in 0.0f64..0.95, alpha in 0.01f64..1.0) {
        let grid: Vec<(f64, f64)> = (0..=32).map(|k| (k as f64 / 32.0, alpha * alpha)).collect();
        let v = correlation_integral(alpha, gamma, &grid).unwrap().value;
        prop_assert!((v - 1.0 / (1.0 - gamma)).abs() < 1e-9);
    }

    #[test]
    fn configuration_order_is_pointwise(bits in prop::collection::vec(any::<bool>(), 12)) {
        let region = build_region(LatticeKind::TriangularSite, Shape::Box { n: 3 }).unwrap();
        let x = Configuration::from_bits(&region, &bits).unwrap();
        prop_assert!(Configuration::zeros(&region).le(&x));
        prop_assert!(x.le(&Configuration::ones(&region)));
        prop_assert_eq!(x.count_ones() + x.complement().count_ones(), region.len());
    }
}
