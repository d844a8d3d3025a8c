use discrit_core::geometry::Point;
use discrit_core::localize::{estimate_position, pair_ratios, BeaconSet};

fn beacons(shift: Point) -> BeaconSet {
    let pts = [(10.0, 20.0), (980.0, 5.0), (995.0, 990.0), (15.0, 970.0)];
    let pos = pts
        .iter()
        .map(|&(x, y)| Point::new(x + shift.x, y + shift.y))
        .collect();
    BeaconSet::new(vec![0, 1, 2, 3], pos).unwrap()
}

#[test]
fn translation_equivariance() {
    let base = beacons(Point::new(0.0, 0.0));
    let shift = Point::new(-3217.5, 851.25);
    let moved = beacons(shift);
    for (hops, target) in [
        ([3.0, 7.0, 9.0, 5.0], None),
        ([4.0, 4.0, 6.0, 6.0], None),
        ([1.0, 8.0, 11.0, 7.0], None),
        ([0.0; 4], Some(Point::new(420.0, 610.0))),
    ] {
        let dist: Vec<f64> = match target {
            Some(t) => base.positions().iter().map(|b| b.dist(t)).collect(),
            None => hops.to_vec(),
        };
        let ratios = pair_ratios(&base, &dist).unwrap();
        let a = estimate_position(&base, &ratios).unwrap().position;
        let b = estimate_position(&moved, &ratios).unwrap().position;
        assert!(
            (b.x - shift.x - a.x).abs() < 1e-9 * 1000.0
                && (b.y - shift.y - a.y).abs() < 1e-9 * 1000.0,
            "{a:?} {b:?}"
        );
        if let Some(t) = target {
            assert!(a.dist(t) < 1e-6);
        }
    }
}
