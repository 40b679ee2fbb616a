//! Spherical geometry primitives.
//!
//! Points of `S^n` are [`UnitVector`]s. On `S²` the vertical coordinate used
//! throughout is the tangent of latitude (`tanlat`), which turns the
//! "above/below the separating curve" test into a plain comparison with the
//! height function.

use std::f64::consts::{PI, TAU};
use std::ops::Neg;

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::framing::OddHarmonicSeries;

/// `x₁² + x₂²` below this is treated as a pole.
pub const POLE_TOLERANCE: f64 = 1e-14;

const MIN_NORM: f64 = 1e-12;

/// A point of `S^n`, stored as an `(n+1)`-vector of unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    /// Normalizes `coords`; rejects vectors shorter than `1e-12`.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !(norm >= MIN_NORM) || !norm.is_finite() {
            return Err(Error::ZeroVector(norm));
        }
        Ok(UnitVector(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn from_vec3(v: Vector3<f64>) -> Result<Self> {
        Self::from_slice(v.as_slice())
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn basis(i: usize, dim: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        UnitVector(v)
    }

    /// The point with longitude `lon` and tangent of latitude `tanlat`.
    pub fn from_lonlat(lon: f64, tanlat: f64) -> Self {
        let c = 1.0 / (1.0 + tanlat * tanlat).sqrt();
        UnitVector(DVector::from_column_slice(&[
            c * lon.cos(),
            c * lon.sin(),
            c * tanlat,
        ]))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    /// Dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }

    /// The point as a 3-vector.
    ///
    /// Panics if the point does not live on `S²`.
    pub fn vec3(&self) -> Vector3<f64> {
        assert_eq!(self.0.len(), 3, "point is not on S²");
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    fn check_s2(&self) -> Result<()> {
        if self.0.len() == 3 {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: 2,
                found: self.0.len(),
            })
        }
    }
}

impl Neg for &UnitVector {
    type Output = UnitVector;

    fn neg(self) -> UnitVector {
        UnitVector(-&self.0)
    }
}

impl Neg for UnitVector {
    type Output = UnitVector;

    fn neg(self) -> UnitVector {
        UnitVector(-self.0)
    }
}

/// Angle between two points of the sphere, in `[0, π]`.
pub fn angular_distance(a: &UnitVector, b: &UnitVector) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// [`angular_distance`] for raw unit 3-vectors; used on hot grid paths.
#[inline]
pub fn angle3(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Finds the first pair `i < j` with `xᵢ` within `tol` radians of `-xⱼ`.
pub fn has_antipodal_pair(points: &[UnitVector], tol: f64) -> Option<(usize, usize)> {
    for (i, x) in points.iter().enumerate() {
        let anti = -x;
        for (j, y) in points.iter().enumerate().skip(i + 1) {
            if angular_distance(&anti, y) < tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Longitude and tangent of latitude of a point of `S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LonLat {
    /// `lon ∈ [0, 2π)`, `tanlat = x₃ / √(x₁² + x₂²)`.
    Regular {
        lon: f64,
        tanlat: f64,
    },
    NorthPole,
    SouthPole,
}

impl LonLat {
    pub fn regular(self) -> Option<(f64, f64)> {
        match self {
            LonLat::Regular { lon, tanlat } => Some((lon, tanlat)),
            _ => None,
        }
    }
}

pub fn to_lonlat(x: &UnitVector) -> Result<LonLat> {
    x.check_s2()?;
    Ok(lonlat3(&x.vec3()))
}

pub(crate) fn lonlat3(x: &Vector3<f64>) -> LonLat {
    let rho2 = x.x * x.x + x.y * x.y;
    if rho2 < POLE_TOLERANCE {
        return if x.z >= 0.0 {
            LonLat::NorthPole
        } else {
            LonLat::SouthPole
        };
    }
    let mut lon = x.y.atan2(x.x);
    if lon < 0.0 {
        lon += TAU;
    }
    if lon >= TAU {
        lon = 0.0;
    }
    LonLat::Regular {
        lon,
        tanlat: x.z / rho2.sqrt(),
    }
}

/// Position of a point relative to the graph curve `tanlat = z(lon)`.
///
/// The payload is the signed margin `tanlat(x) − z(lon(x))`; poles carry
/// `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    Above(f64),
    Below(f64),
    On(f64),
}

impl Side {
    pub fn margin(self) -> f64 {
        match self {
            Side::Above(m) | Side::Below(m) | Side::On(m) => m,
        }
    }

    pub fn is_above(self) -> bool {
        matches!(self, Side::Above(_))
    }

    pub fn is_below(self) -> bool {
        matches!(self, Side::Below(_))
    }
}

/// Classifies `x` against the graph of `z`; `|margin| < tol` is [`Side::On`].
pub fn side_of_graph_curve(x: &UnitVector, z: &OddHarmonicSeries, tol: f64) -> Result<Side> {
    Ok(match to_lonlat(x)? {
        LonLat::NorthPole => Side::Above(f64::INFINITY),
        LonLat::SouthPole => Side::Below(f64::NEG_INFINITY),
        LonLat::Regular { lon, tanlat } => {
            let m = tanlat - z.eval(lon);
            if m.abs() < tol {
                Side::On(m)
            } else if m > 0.0 {
                Side::Above(m)
            } else {
                Side::Below(m)
            }
        }
    })
}

/// A great circle, parametrized as `φ ↦ cos φ·b₁ + sin φ·b₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreatCircle {
    b1: UnitVector,
    b2: UnitVector,
}

impl GreatCircle {
    pub fn basis(&self) -> (&UnitVector, &UnitVector) {
        (&self.b1, &self.b2)
    }

    pub fn point(&self, phi: f64) -> UnitVector {
        UnitVector(self.b1.coords() * phi.cos() + self.b2.coords() * phi.sin())
    }

    /// Angular distance from `x` to the nearest point of the circle.
    pub fn distance_to(&self, x: &UnitVector) -> f64 {
        let a = x.dot(&self.b1);
        let b = x.dot(&self.b2);
        let in_plane = (a * a + b * b).sqrt();
        let perp = (x.coords() - self.b1.coords() * a - self.b2.coords() * b).norm();
        perp.atan2(in_plane)
    }

    /// Circle parameter of the projection of `x` onto the circle, in `(-π, π]`.
    pub fn angle_of(&self, x: &UnitVector) -> f64 {
        x.dot(&self.b2).atan2(x.dot(&self.b1))
    }
}

/// The great circle through `p` and `u`, with basis `(p, normalize(u − (u·p)p))`.
pub fn great_circle_through(p: &UnitVector, u: &UnitVector) -> Result<GreatCircle> {
    if p.ambient_dim() != u.ambient_dim() {
        return Err(Error::Dimension {
            expected: p.ambient_dim() - 1,
            found: u.ambient_dim(),
        });
    }
    let perp = u.coords() - p.coords() * u.dot(p);
    if perp.norm() < 1e-10 {
        return Err(Error::DegenerateCircle);
    }
    Ok(GreatCircle {
        b1: p.clone(),
        b2: UnitVector::new(perp)?,
    })
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::HarmonicTerm;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn e(i: usize) -> UnitVector {
        UnitVector::basis(i, 3)
    }

    fn cos3() -> OddHarmonicSeries {
        OddHarmonicSeries::new(vec![HarmonicTerm {
            k: 3,
            a: 1.0,
            b: 0.0,
        }])
        .unwrap()
    }

    #[test]
    fn constructor_normalizes_and_rejects_zero() {
        let v = UnitVector::from_slice(&[3.0, 4.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v.coords().norm(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            UnitVector::from_slice(&[0.0, 1e-13, 0.0]),
            Err(Error::ZeroVector(_))
        ));
    }

    #[test]
    fn angular_distance_basic_cases() {
        assert_eq!(angular_distance(&e(0), &e(0)), 0.0);
        assert_abs_diff_eq!(angular_distance(&e(0), &-e(0)), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(angular_distance(&e(0), &e(1)), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn antipodal_pairs() {
        assert_eq!(has_antipodal_pair(&[e(0), e(1), e(2)], 1e-6), None);
        assert_eq!(has_antipodal_pair(&[e(0), -e(0)], 1e-6), Some((0, 1)));
        let a = PI - 1e-9;
        let near = UnitVector::from_slice(&[a.cos(), a.sin(), 0.0]).unwrap();
        assert_eq!(has_antipodal_pair(&[e(0), near], 1e-6), Some((0, 1)));
    }

    #[test]
    fn lonlat_cases() {
        assert_eq!(
            to_lonlat(&e(0)).unwrap(),
            LonLat::Regular {
                lon: 0.0,
                tanlat: 0.0
            }
        );
        assert_eq!(to_lonlat(&e(2)).unwrap(), LonLat::NorthPole);
        assert_eq!(to_lonlat(&-e(2)).unwrap(), LonLat::SouthPole);

        let x = UnitVector::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let (lon, tanlat) = to_lonlat(&x).unwrap().regular().unwrap();
        assert_abs_diff_eq!(lon, PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tanlat, 0.5f64.sqrt(), epsilon = 1e-15);
        // Brute-force reconstruction from latitude/longitude.
        let lat = tanlat.atan();
        let back = Vector3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin());
        assert_abs_diff_eq!((back - x.vec3()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lonlat_rejects_other_dimensions() {
        assert!(to_lonlat(&UnitVector::basis(0, 4)).is_err());
    }

    /// Dense sampling of the graph curve: the sign of `tanlat − z(lon)` at the
    /// sample nearest in longitude.
    fn sampled_margin(x: &UnitVector, z: &OddHarmonicSeries) -> f64 {
        let (lon, tanlat) = to_lonlat(x).unwrap().regular().unwrap();
        let n = 1 << 20;
        let i = (lon / TAU * n as f64).round() as usize % n;
        let theta = TAU * i as f64 / n as f64;
        tanlat - z.eval(theta)
    }

    #[test]
    fn side_of_curve_cases() {
        let z = cos3();
        assert!(side_of_graph_curve(&e(2), &z, 1e-9).unwrap().is_above());
        assert!(side_of_graph_curve(&-e(2), &z, 1e-9).unwrap().is_below());

        let x = UnitVector::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let side = side_of_graph_curve(&x, &z, 1e-9).unwrap();
        assert!(side.is_above());
        assert_abs_diff_eq!(side.margin(), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(sampled_margin(&x, &z), 2f64.sqrt(), epsilon = 1e-5);

        let on = UnitVector::from_lonlat(PI / 4.0, -(0.5f64.sqrt()));
        let side = side_of_graph_curve(&on, &z, 1e-9).unwrap();
        assert!(matches!(side, Side::On(_)));
        assert_abs_diff_eq!(sampled_margin(&on, &z), 0.0, epsilon = 1e-5);
    }

    #[test]
    fn great_circle_cases() {
        let c = great_circle_through(&e(2), &e(0)).unwrap();
        assert_eq!(c.basis(), (&e(2), &e(0)));

        let u = UnitVector::from_slice(&[1.0, 0.0, 1.0]).unwrap();
        let c = great_circle_through(&e(2), &u).unwrap();
        assert_abs_diff_eq!(
            (c.basis().1.coords() - e(0).coords()).norm(),
            0.0,
            epsilon = 1e-15
        );

        assert!(matches!(
            great_circle_through(&e(2), &e(2)),
            Err(Error::DegenerateCircle)
        ));
    }

    fn unit3() -> impl Strategy<Value = UnitVector> {
        (-1.0f64..1.0, 0.0..TAU).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            UnitVector::from_slice(&[r * phi.cos(), r * phi.sin(), z]).unwrap()
        })
    }

    fn odd_series() -> impl Strategy<Value = OddHarmonicSeries> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5).prop_map(|c| {
            OddHarmonicSeries::new(
                c.into_iter()
                    .enumerate()
                    .map(|(i, (a, b))| HarmonicTerm {
                        k: 2 * i as u32 + 1,
                        a,
                        b,
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in unit3(), b in unit3(), c in unit3()) {
            let ab = angular_distance(&a, &b);
            let bc = angular_distance(&b, &c);
            let ac = angular_distance(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(ab, angular_distance(&b, &a));
        }

        #[test]
        fn lonlat_round_trip(lon in 0.0..TAU, tanlat in -50.0f64..50.0) {
            let x = UnitVector::from_lonlat(lon, tanlat);
            let (l, t) = to_lonlat(&x).unwrap().regular().unwrap();
            prop_assert!((wrap_angle(l - lon)).abs() < 1e-12);
            prop_assert!((t - tanlat).abs() < 1e-12 * (1.0 + tanlat.abs()));
        }

        #[test]
        fn side_is_antipodally_equivariant(x in unit3(), z in odd_series()) {
            let s = side_of_graph_curve(&x, &z, 1e-9).unwrap();
            let t = side_of_graph_curve(&-&x, &z, 1e-9).unwrap();
            match s {
                Side::Above(_) => prop_assert!(t.is_below()),
                Side::Below(_) => prop_assert!(t.is_above()),
                Side::On(_) => prop_assert!(matches!(t, Side::On(_))),
            }
        }

        #[test]
        fn great_circle_contains_generators(p in unit3(), u in unit3()) {
            prop_assume!(angular_distance(&p, &u) > 1e-3 && angular_distance(&p, &-&u) > 1e-3);
            let c = great_circle_through(&p, &u).unwrap();
            let (b1, b2) = c.basis();
            prop_assert!(b1.dot(b2).abs() < 1e-12);
            prop_assert!(c.distance_to(&p) < 1e-12);
            prop_assert!(c.distance_to(&u) < 1e-12);
            let q = c.point(c.angle_of(&u));
            prop_assert!(angular_distance(&q, &u) < 1e-7);
        }
    }
}
