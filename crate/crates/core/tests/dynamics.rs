//! Dynamical percolation against its static two-time law.

use perclab::connectivity::{ArmEvent, Crossing, Event};
use perclab::dynamics::{correlation, correlation_replicas, exceptional_probability, simulate, Trajectory};
use perclab::estimators::estimate_event;
use perclab::lattice::{build_region, LatticeKind, Shape};
use perclab::oracle::{exact_qt, rates, TruthTable};
use perclab::rng::RngStream;

#[test]
fn two_time_correlation_is_noise_at_one_minus_exp() {
    let g = Crossing::new(LatticeKind::TriangularSite, 3).unwrap();
    let f = TruthTable::from_event(&g).unwrap();
    let lags = [0.0, 0.1, 0.3, 0.7, 1.5, 3.0];
    let est = correlation_replicas(&g, &lags, 6.0, 4000, &RngStream::new(21, 0)).unwrap();
    for (&lag, e) in lags.iter().zip(&est) {
        let t = 1.0 - (-lag).exp();
        let exact: f64 = exact_qt(&f, &rates(f.n_bits(), t, None).unwrap()).unwrap();
        assert!((e.mean - exact).abs() <= 4.0 * e.stderr, "lag {lag}: {} ± {} vs {exact}", e.mean, e.stderr);
    }
}

#[test]
fn single_trajectory_correlation_is_consistent() {
    let g = Crossing::new(LatticeKind::TriangularSite, 3).unwrap();
    let traj = simulate(g.region(), 2000.0, &RngStream::new(22, 0)).unwrap();
    let f = TruthTable::from_event(&g).unwrap();
    let exact: f64 = exact_qt(&f, &rates(f.n_bits(), 1.0 - (-0.5f64).exp(), None).unwrap()).unwrap();
    let e = correlation(&traj, &g, 0.5).unwrap();
    assert!((e.mean - exact).abs() <= 4.0 * e.stderr, "{e:?} vs {exact}");
}

#[test]
fn cells_are_resampled_at_unit_rate_with_fair_bits() {
    let region = build_region(LatticeKind::SquareBond, Shape::Box { n: 10 }).unwrap();
    let horizon = 50.0;
    let traj = simulate(&region, horizon, &RngStream::new(23, 0)).unwrap();
    let expected = region.len() as f64 * horizon;
    let count = traj.events().len() as f64;
    assert!((count - expected).abs() < 4.0 * expected.sqrt(), "{count} events, expected {expected}");
    let ones = traj.events().iter().filter(|e| e.bit).count() as f64;
    assert!((ones / count - 0.5).abs() < 4.0 * 0.5 / count.sqrt());
    assert!(traj.events().windows(2).all(|w| w[0].time <= w[1].time));
}

#[test]
fn event_log_round_trips() {
    let ev =
        ArmEvent::new(LatticeKind::TriangularSite, Shape::Annulus { m: 2, n: 6 }, "0101".parse().unwrap()).unwrap();
    let traj = simulate(ev.region(), 1.5, &RngStream::new(24, 0)).unwrap();
    let mut buf = Vec::new();
    traj.write_log(&mut buf).unwrap();
    let back = Trajectory::read_log(ev.region(), buf.as_slice()).unwrap();
    assert_eq!(back.initial(), traj.initial());
    assert_eq!(back.events(), traj.events());
    assert_eq!(back.horizon(), traj.horizon());
    for t in [0.0, 0.4, 1.5] {
        assert_eq!(back.state_at(t).unwrap(), traj.state_at(t).unwrap());
    }
    let (a, b) = (traj.indicator(&ev).unwrap(), back.indicator(&ev).unwrap());
    assert_eq!(a.on_intervals(), b.on_intervals());
    assert!(Trajectory::read_log(ev.region(), &buf[..buf.len() - 3]).is_err());
}

#[test]
fn indicator_follows_replayed_states() {
    let ev = ArmEvent::new(LatticeKind::TriangularSite, Shape::Annulus { m: 1, n: 4 }, "1".parse().unwrap()).unwrap();
    let traj = simulate(ev.region(), 2.0, &RngStream::new(25, 0)).unwrap();
    let path = traj.indicator(&ev).unwrap();
    let mut s = perclab::connectivity::Scratch::new();
    for k in 0..=40 {
        let t = k as f64 * 0.05;
        assert_eq!(path.value_at(t), ev.eval(&traj.state_at(t).unwrap(), &mut s), "t = {t}");
    }
}

#[test]
fn exceptional_times_dominate_the_static_probability() {
    let ev =
        ArmEvent::new(LatticeKind::TriangularSite, Shape::Annulus { m: 2, n: 8 }, "0101".parse().unwrap()).unwrap();
    let rng = RngStream::new(26, 0);
    let stat = estimate_event(&ev, 0.5, 4000, &rng).unwrap();
    let short = exceptional_probability(&ev, 0.05, 4000, &rng).unwrap();
    let long = exceptional_probability(&ev, 1.0, 4000, &rng).unwrap();
    // Same substreams: the initial colourings coincide, so the orderings hold sample by sample.
    assert!(stat.mean <= short.mean && short.mean <= long.mean, "{stat:?} {short:?} {long:?}");
    assert!(long.mean > stat.mean + 5.0 * stat.stderr);
}
