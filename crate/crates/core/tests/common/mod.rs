#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use gauss_avoid::framing::{HarmonicTerm, OddHarmonicSeries};
use gauss_avoid::sphere::{angular_distance, UnitVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `e₃` and three points at latitude `asin(−1/3)`, longitudes π/3, π, 5π/3.
pub fn tetrahedron() -> Vec<UnitVector> {
    let tanlat = (-1.0f64 / 3.0).asin().tan();
    let mut pts = vec![UnitVector::basis(2, 3)];
    for lon in [PI / 3.0, PI, 5.0 * PI / 3.0] {
        pts.push(UnitVector::from_lonlat(lon, tanlat));
    }
    pts
}

pub fn cos3() -> OddHarmonicSeries {
    OddHarmonicSeries::new(vec![HarmonicTerm {
        k: 3,
        a: 1.0,
        b: 0.0,
    }])
    .unwrap()
}

pub const MAX_RANDOM_POINTS: usize = 8;
pub const MIN_ANTIPODAL_GAP: f64 = 0.2;

/// Up to eight uniform points, each at least 0.2 rad from the antipode of
/// every other.
pub fn random_obstacles(seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=MAX_RANDOM_POINTS);
    let mut pts: Vec<UnitVector> = Vec::with_capacity(n);
    while pts.len() < n {
        let z: f64 = rng.random_range(-1.0f64..1.0);
        let phi: f64 = rng.random_range(0.0..TAU);
        let r = (1.0 - z * z).sqrt();
        let x = UnitVector::from_slice(&[r * phi.cos(), r * phi.sin(), z]).unwrap();
        if pts
            .iter()
            .all(|p| angular_distance(p, &-&x) >= MIN_ANTIPODAL_GAP)
        {
            pts.push(x);
        }
    }
    pts
}

pub fn random_series(rng: &mut ChaCha8Rng, max_degree: u32, scale: f64) -> OddHarmonicSeries {
    let terms = (1..=max_degree)
        .step_by(2)
        .map(|k| HarmonicTerm {
            k,
            a: rng.random_range(-scale..scale),
            b: rng.random_range(-scale..scale),
        })
        .collect();
    OddHarmonicSeries::new(terms).unwrap()
}
