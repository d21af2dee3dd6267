use perclab::connectivity::{arm_event_raw, ArmType, Scratch};
use perclab::lattice::{build_region, LatticeKind, Region, Shape};
use perclab::oracle::brute_arm_event;
use perclab::rng::RngStream;
use perclab::sampling::{sample, Configuration};

fn arms(words: &[&str]) -> Vec<ArmType> {
    words.iter().map(|w| w.parse().unwrap()).collect()
}

fn agree_on(region: &Region, x: &Configuration, types: &[ArmType], s: &mut Scratch) {
    for a in types {
        let fast = arm_event_raw(x, region, a, s).unwrap();
        let slow = brute_arm_event(x, region, a).unwrap();
        assert_eq!(fast, slow, "{:?} {} {a} config {:?}", region.kind(), region.shape(), x.words());
    }
}

#[test]
fn exhaustive_small_annulus() {
    let r = build_region(LatticeKind::TriangularSite, Shape::Annulus { m: 1, n: 2 }).unwrap();
    let types = arms(&["1", "0", "01", "11", "010", "0101", "0110", "111", "1101", "01010"]);
    let mut s = Scratch::new();
    for idx in 0..1u64 << r.len() {
        agree_on(&r, &Configuration::from_index(&r, idx).unwrap(), &types, &mut s);
    }
}

#[test]
fn exhaustive_small_half_annulus() {
    let r = build_region(LatticeKind::TriangularSite, Shape::HalfAnnulus { m: 1, n: 2 }).unwrap();
    let types = arms(&["1+", "0+", "01+", "10+", "11+", "010+", "0110+", "101+"]);
    let mut s = Scratch::new();
    for idx in 0..1u64 << r.len() {
        agree_on(&r, &Configuration::from_index(&r, idx).unwrap(), &types, &mut s);
    }
}

#[test]
fn random_larger_regions() {
    let plane = arms(&["1", "01", "11", "010", "0101", "0110", "0011"]);
    let half = arms(&["1+", "01+", "11+", "010+", "101+", "0110+"]);
    let mut s = Scratch::new();
    for kind in [LatticeKind::TriangularSite, LatticeKind::SquareBond] {
        for shape in [
            Shape::Annulus { m: 1, n: 3 },
            Shape::Annulus { m: 2, n: 3 },
            Shape::HalfAnnulus { m: 1, n: 3 },
            Shape::HalfAnnulus { m: 2, n: 4 },
            Shape::Annulus { m: 1, n: 2 },
            Shape::HalfAnnulus { m: 1, n: 2 },
            Shape::Annulus { m: 2, n: 4 },
            Shape::HalfAnnulus { m: 1, n: 4 },
        ] {
            let r = build_region(kind, shape).unwrap();
            // path enumeration on the bond lattice grows fast with the density of either colour
            let (limit, densities, count) = match kind {
                LatticeKind::TriangularSite => (128, [0.35, 0.5, 0.65], 2000),
                LatticeKind::SquareBond => (100, [0.42, 0.5, 0.6], 1000),
            };
            if r.len() > limit {
                continue;
            }
            let types = if shape.is_half() { &half } else { &plane };
            for (d, p) in densities.into_iter().enumerate() {
                for k in 0..count {
                    let x = sample(&r, p, &RngStream::new(77 + d as u64, k)).unwrap();
                    agree_on(&r, &x, types, &mut s);
                }
            }
        }
    }
}

#[test]
fn exhaustive_thin_bond_rings() {
    let plane = arms(&["1", "0", "01", "11", "0101", "0110"]);
    let half = arms(&["1+", "0+", "01+", "10+", "11+", "010+"]);
    let mut s = Scratch::new();
    for shape in [Shape::Annulus { m: 1, n: 1 }, Shape::Annulus { m: 1, n: 2 }, Shape::HalfAnnulus { m: 1, n: 2 }] {
        let r = build_region(LatticeKind::SquareBond, shape).unwrap();
        if r.len() > 24 {
            continue;
        }
        let types = if shape.is_half() { &half } else { &plane };
        for idx in 0..1u64 << r.len() {
            agree_on(&r, &Configuration::from_index(&r, idx).unwrap(), types, &mut s);
        }
    }
}
