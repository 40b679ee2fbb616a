//! Pole selection, the separating height function, and the normal frame
//! along the unit circle.
//!
//! After alignment the axis is `±e₃` and the base immersion is the unit
//! circle `f(θ) = (cos θ, sin θ, 0)`, whose normal plane at `θ` is spanned
//! by `e₃` and the radial direction. The frame is
//!
//! ```text
//! N₂(θ) = (cos θ, sin θ, z(θ)) / √(1 + z²)      N₁(θ) = f′(θ) × N₂(θ)
//! ```
//!
//! and the closed half of the normal circle centred at `N₁(θ)` is exactly
//! the part lying on or below the graph `tanlat = z(lon)`. Every obstacle
//! therefore has to sit strictly above that graph; [`fit_separating_series`]
//! arranges this, applying a half-turn about `e₁` when the obstacles fit
//! more comfortably below.

use std::f64::consts::{PI, TAU};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT,
    SolverStatus, SupportedConeT,
};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::{FrameSample, Immersion, NormalFrame};
use crate::sphere::{angle3, angular_distance, has_antipodal_pair, lonlat3, LonLat, UnitVector};

/// Antipodal pairs closer than this are rejected.
pub const ANTIPODAL_TOLERANCE: f64 = 1e-6;
/// Pole candidates closer than this to an obstacle or a pair circle are rejected.
pub const POLE_CLEARANCE: f64 = 1e-3;
pub const MAX_POLE_CANDIDATES: usize = 100_000;
/// Ridge added to the fit objective.
pub const FIT_REGULARIZATION: f64 = 1e-8;
pub const DEFAULT_MARGIN: f64 = 0.1;
/// Accepted poles tried by [`separate`].
pub const POLE_SEARCH: usize = 16;

const SUP_SAMPLES: usize = 4096;
// Constraints are imposed slightly beyond the requested margin.
const TARGET_OVERSHOOT: f64 = 1.01;

/// One odd harmonic `a cos kθ + b sin kθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

/// `z(θ) = Σ a_k cos kθ + b_k sin kθ` over odd `k`, so `z(θ + π) = −z(θ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OddHarmonicSeries {
    terms: Vec<HarmonicTerm>,
    sup_bound: f64,
}

impl OddHarmonicSeries {
    /// Sorts by frequency and merges repeated frequencies; rejects even `k`.
    pub fn new(mut terms: Vec<HarmonicTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.k % 2 == 0) {
            return Err(Error::InvalidParameter(format!(
                "harmonic frequency {} is not odd",
                t.k
            )));
        }
        if terms.iter().any(|t| !t.a.is_finite() || !t.b.is_finite()) {
            return Err(Error::InvalidParameter(
                "harmonic coefficients must be finite".into(),
            ));
        }
        terms.sort_by_key(|t| t.k);
        let mut merged: Vec<HarmonicTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.k == t.k => {
                    last.a += t.a;
                    last.b += t.b;
                }
                _ => merged.push(t),
            }
        }
        let sup_bound = merged.iter().map(|t| t.a.abs() + t.b.abs()).sum();
        Ok(OddHarmonicSeries {
            terms: merged,
            sup_bound,
        })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    /// Highest frequency present, 0 for the zero series.
    pub fn max_degree(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.k)
    }

    /// `Σ |a_k| + |b_k|`, an upper bound for `‖z‖∞`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_with_derivative(theta).0
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.eval_with_derivative(theta).1
    }

    pub fn eval_with_derivative(&self, theta: f64) -> (f64, f64) {
        let mut z = 0.0;
        let mut dz = 0.0;
        for t in &self.terms {
            let k = f64::from(t.k);
            let (s, c) = (k * theta).sin_cos();
            z += t.a * c + t.b * s;
            dz += k * (t.b * c - t.a * s);
        }
        (z, dz)
    }

    /// `max |z|` over `n` equispaced samples.
    pub fn sampled_sup(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.eval(TAU * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `max |z′|` over `n` equispaced samples.
    pub fn sampled_derivative_sup(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.derivative(TAU * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// The height function of the image of this graph under the half-turn
    /// about `e₁`: `θ ↦ −z(−θ)`.
    pub fn half_turn(&self) -> Self {
        OddHarmonicSeries {
            terms: self
                .terms
                .iter()
                .map(|t| HarmonicTerm {
                    k: t.k,
                    a: -t.a,
                    b: t.b,
                })
                .collect(),
            sup_bound: self.sup_bound,
        }
    }
}

/// The obstacle set `X ⊂ S²` expressed in aligned coordinates, where the
/// chosen pole is `±e₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSet {
    points: Vec<UnitVector>,
    pole: UnitVector,
    rotation: Matrix3<f64>,
}

impl ObstacleSet {
    /// Wraps points that are already aligned with `pole ∈ {±e₃}`.
    pub fn aligned(points: Vec<UnitVector>, pole: UnitVector) -> Result<Self> {
        Self::aligned_with_rotation(points, pole, Matrix3::identity())
    }

    fn aligned_with_rotation(
        points: Vec<UnitVector>,
        pole: UnitVector,
        rotation: Matrix3<f64>,
    ) -> Result<Self> {
        for x in points.iter().chain(std::iter::once(&pole)) {
            if x.ambient_dim() != 3 {
                return Err(Error::Dimension {
                    expected: 2,
                    found: x.ambient_dim(),
                });
            }
        }
        let p = pole.vec3();
        if p.x.abs() > 1e-12 || p.y.abs() > 1e-12 {
            return Err(Error::InvalidParameter("aligned pole must be ±e₃".into()));
        }
        if let Some((i, j)) = has_antipodal_pair(&points, ANTIPODAL_TOLERANCE) {
            return Err(Error::AntipodalPair(i, j, ANTIPODAL_TOLERANCE));
        }
        if let Some(i) = points
            .iter()
            .position(|x| angular_distance(x, &pole) < ANTIPODAL_TOLERANCE)
        {
            return Err(Error::InvalidParameter(format!(
                "obstacle {i} coincides with the pole"
            )));
        }
        Ok(ObstacleSet {
            points,
            pole,
            rotation,
        })
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn vectors(&self) -> Vec<Vector3<f64>> {
        self.points.iter().map(UnitVector::vec3).collect()
    }

    pub fn pole(&self) -> &UnitVector {
        &self.pole
    }

    /// Orthogonal map taking input coordinates to aligned coordinates.
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    /// Maps an aligned vector back to input coordinates.
    pub fn to_input(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * v
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rotates everything by `π` about `e₁`, swapping the roles of the
    /// regions above and below any graph curve.
    pub fn half_turn(&self) -> ObstacleSet {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        let map = |x: &UnitVector| UnitVector::from_vec3(flip * x.vec3()).expect("unit");
        ObstacleSet {
            points: self.points.iter().map(map).collect(),
            pole: map(&self.pole),
            rotation: flip * self.rotation,
        }
    }
}

/// Rotation taking unit `a` to unit `b`, for `a·b > −1`.
fn rotation_between(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    let v = a.cross(b);
    let c = a.dot(b);
    let vx = v.cross_matrix();
    Matrix3::identity() + vx + vx * vx / (1.0 + c)
}

fn pole_rejection(candidate: &Vector3<f64>, points: &[Vector3<f64>]) -> Option<String> {
    let anti = -candidate;
    let mut others = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        if angle3(candidate, x) < POLE_CLEARANCE {
            return Some(format!("near obstacle {i}"));
        }
        // An obstacle sitting exactly at −p is allowed and excluded from X′.
        if angle3(&anti, x) < 1e-9 {
            continue;
        }
        if angle3(&anti, x) < POLE_CLEARANCE {
            return Some(format!("near the antipode of obstacle {i}"));
        }
        others.push((i, x));
    }
    for (a, &(i, xi)) in others.iter().enumerate() {
        for &(j, xj) in &others[a + 1..] {
            let n = xi.cross(xj);
            let len = n.norm();
            if len < 1e-12 {
                continue;
            }
            let d = (candidate.dot(&n) / len).abs().min(1.0).asin();
            if d < POLE_CLEARANCE {
                return Some(format!(
                    "near the great circle through obstacles {i} and {j}"
                ));
            }
        }
    }
    None
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0f64..1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Picks the pole `p` and rotates the obstacles so that `p = ±e₃`.
///
/// Candidates are `−e₃`, `+e₃`, then seeded uniform samples. A candidate is
/// rejected within [`POLE_CLEARANCE`] of an obstacle, of an antipode of an
/// obstacle (except an obstacle exactly at `−p`), or of a great circle
/// through two obstacles other than `−p`. The accepted pole is rotated to
/// the nearer of `±e₃`.
pub fn choose_pole(raw: &[UnitVector], seed: u64) -> Result<ObstacleSet> {
    Ok(accepted_poles(raw, seed, 1)?.remove(0))
}

/// The first `count` poles accepted by [`choose_pole`]'s candidate sequence,
/// each as an aligned obstacle set. Fails only if none is accepted.
pub fn accepted_poles(raw: &[UnitVector], seed: u64, count: usize) -> Result<Vec<ObstacleSet>> {
    for x in raw {
        if x.ambient_dim() != 3 {
            return Err(Error::Dimension {
                expected: 2,
                found: x.ambient_dim(),
            });
        }
    }
    if let Some((i, j)) = has_antipodal_pair(raw, ANTIPODAL_TOLERANCE) {
        return Err(Error::AntipodalPair(i, j, ANTIPODAL_TOLERANCE));
    }
    let mut points: Vec<Vector3<f64>> = Vec::with_capacity(raw.len());
    for x in raw {
        let v = x.vec3();
        if points.iter().all(|p| angle3(p, &v) >= 1e-9) {
            points.push(v);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_reason = String::from("none");
    let mut out = Vec::new();
    for n in 0..MAX_POLE_CANDIDATES {
        let candidate = match n {
            0 => -Vector3::z(),
            1 => Vector3::z(),
            _ => random_unit(&mut rng),
        };
        if let Some(reason) = pole_rejection(&candidate, &points) {
            last_reason = reason;
            continue;
        }
        let target = if candidate.z > 0.0 {
            Vector3::z()
        } else {
            -Vector3::z()
        };
        let rotation = rotation_between(&candidate, &target);
        let aligned = points
            .iter()
            .map(|x| UnitVector::from_vec3(rotation * x))
            .collect::<Result<Vec<_>>>()?;
        out.push(ObstacleSet::aligned_with_rotation(
            aligned,
            UnitVector::from_vec3(target)?,
            rotation,
        )?);
        if out.len() == count {
            break;
        }
    }
    if out.is_empty() {
        return Err(Error::NoPole {
            tried: MAX_POLE_CANDIDATES,
            reason: last_reason,
        });
    }
    Ok(out)
}

/// A height function whose graph separates the obstacles (all strictly
/// above) from their antipodes, and the obstacle set in the coordinates it
/// refers to.
#[derive(Debug, Clone)]
pub struct Separation {
    pub obstacles: ObstacleSet,
    pub series: OddHarmonicSeries,
}

struct Constraint {
    index: usize,
    lon: f64,
    tanlat: f64,
}

// Coefficients below this fraction of the largest are solver noise.
const COEFFICIENT_FLOOR: f64 = 1e-12;
// Spherical clearances tried by the fit, as fractions of the `tanlat` margin.
const CLEARANCE_FLOORS: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0];
const WINDOW_STEP: f64 = 0.02;
const MAX_WINDOW: f64 = 1.5;
const POLE_ROWS: usize = 64;

fn series_from(ks: &[u32], coef: &DVector<f64>) -> OddHarmonicSeries {
    let floor = COEFFICIENT_FLOOR * coef.amax();
    let coef = coef.map(|c| if c.abs() <= floor { 0.0 } else { c });
    let terms = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| HarmonicTerm {
            k,
            a: coef[2 * i],
            b: coef[2 * i + 1],
        })
        .filter(|t| t.a != 0.0 || t.b != 0.0)
        .collect();
    OddHarmonicSeries::new(terms).expect("odd frequencies")
}

/// Worst constraint as (position, margin).
fn worst(constraints: &[Constraint], z: &OddHarmonicSeries) -> (usize, f64) {
    constraints
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.tanlat - z.eval(c.lon)))
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        )
}

/// Graph point `(cos θ, sin θ, z)/√(1 + z²)`.
fn graph_point(z: &OddHarmonicSeries, theta: f64) -> Vector3<f64> {
    let v = z.eval(theta);
    Vector3::new(theta.cos(), theta.sin(), v) / v.hypot(1.0)
}

fn point_of(c: &Constraint) -> Vector3<f64> {
    let cl = 1.0 / c.tanlat.hypot(1.0);
    Vector3::new(cl * c.lon.cos(), cl * c.lon.sin(), cl * c.tanlat)
}

/// Sampled spherical distance from `points` to the graph curve of `z`.
fn sampled_clearance(points: &[Vector3<f64>], z: &OddHarmonicSeries) -> f64 {
    let mut out = PI;
    for i in 0..SUP_SAMPLES {
        let g = graph_point(z, TAU * i as f64 / SUP_SAMPLES as f64);
        for p in points {
            out = out.min(angle3(p, &g));
        }
    }
    out
}

/// Sampled spherical distance from the obstacles to the graph curve of `z`,
/// the curve `θ ↦ N₂(θ)`.
pub fn curve_clearance(obstacles: &ObstacleSet, z: &OddHarmonicSeries) -> f64 {
    sampled_clearance(&obstacles.vectors(), z)
}

/// Fit constraints in conic form `A c + s = b`.
#[derive(Default)]
struct Program {
    rows: Vec<(Vec<f64>, f64)>,
    cones: Vec<SupportedConeT<f64>>,
}

impl Program {
    fn push(&mut self, row: Vec<f64>, bound: f64) {
        self.rows.push((row, bound));
    }

    fn close(&mut self, cone: SupportedConeT<f64>) {
        self.cones.push(cone);
    }

    /// Least `½ cᵀ W c`, or `None` if the solver finds no solution.
    fn solve(&self, ks: &[u32]) -> Option<OddHarmonicSeries> {
        let n = 2 * ks.len();
        let mut p = vec![vec![0.0; n]; n];
        for (j, row) in p.iter_mut().enumerate() {
            row[j] = f64::from(ks[j / 2]).powi(2) + FIT_REGULARIZATION;
        }
        let a: Vec<Vec<f64>> = self.rows.iter().map(|r| r.0.clone()).collect();
        let b: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .build()
            .expect("valid settings");
        let mut solver = DefaultSolver::new(
            &CscMatrix::from(&p),
            &vec![0.0; n],
            &CscMatrix::from(&a),
            &b,
            &self.cones,
            settings,
        )
        .ok()?;
        solver.solve();
        matches!(
            solver.solution.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved
        )
        .then(|| series_from(ks, &DVector::from_column_slice(&solver.solution.x)))
    }
}

/// Coefficient row `e` with `z(θ) = e · c`.
fn basis_row(ks: &[u32], theta: f64, scale: f64) -> Vec<f64> {
    ks.iter()
        .flat_map(|&k| {
            let (s, c) = (f64::from(k) * theta).sin_cos();
            [scale * c, scale * s]
        })
        .collect()
}

/// Keeps each obstacle `margin` above the graph in `tanlat`, and
/// `x·N₁(θ) ≤ −sin(clearance)` wherever the normal plane at `θ` passes
/// within `clearance` of `x`. The antipodes give the same constraints by odd
/// symmetry.
fn fit_program(
    ks: &[u32],
    constraints: &[Constraint],
    pole: bool,
    margin: f64,
    clearance: f64,
) -> Program {
    let mut prog = Program::default();
    for c in constraints {
        prog.push(
            basis_row(ks, c.lon, 1.0),
            c.tanlat - TARGET_OVERSHOOT * margin,
        );
    }
    let sc = (TARGET_OVERSHOOT * clearance).sin();
    if pole && clearance > 0.0 {
        let cap = 1.0 / (TARGET_OVERSHOOT * clearance).tan();
        for i in 0..POLE_ROWS {
            prog.push(basis_row(ks, TAU * i as f64 / POLE_ROWS as f64, 1.0), cap);
        }
    }
    let linear = prog.rows.len();
    prog.close(NonnegativeConeT(linear));
    if clearance <= 0.0 {
        return prog;
    }
    // x·N₁(θ)·√(1 + z²) = cos(lat) cos(φ) z(θ) − sin(lat), φ = θ − lon.
    for c in constraints {
        let sec = c.tanlat.hypot(1.0);
        let (cl, sl) = (1.0 / sec, c.tanlat / sec);
        let half = (sc * sec).min(1.0).asin().min(MAX_WINDOW);
        let n = (half / WINDOW_STEP).ceil() as i64;
        for j in -n..=n {
            let phi = half * j as f64 / n.max(1) as f64;
            let theta = c.lon + phi;
            prog.push(basis_row(ks, theta, cl * phi.cos()), sl);
            prog.push(vec![0.0; 2 * ks.len()], sc);
            prog.push(basis_row(ks, theta, -sc), 0.0);
            prog.close(SecondOrderConeT(3));
        }
    }
    prog
}

/// Smoothest odd series (least `∫ z′²`) with every constraint at least
/// `margin` above its graph in `tanlat` and at least `clearance` from the
/// graph curve on the sphere, raising the degree until one exists.
fn fit_ladder(
    constraints: &[Constraint],
    pole: bool,
    margin: f64,
    clearance: f64,
    max_degree: u32,
) -> std::result::Result<OddHarmonicSeries, (usize, f64)> {
    let mut points: Vec<Vector3<f64>> = constraints.iter().map(point_of).collect();
    if pole {
        points.push(Vector3::z());
    }
    let mut worst_seen = (0, f64::NEG_INFINITY);
    let mut degree = 1;
    while degree <= max_degree {
        let ks: Vec<u32> = (1..=degree).step_by(2).collect();
        if let Some(z) = fit_program(&ks, constraints, pole, margin, clearance).solve(&ks) {
            let (at, m) = worst(constraints, &z);
            if m >= margin && (clearance <= 0.0 || sampled_clearance(&points, &z) >= clearance) {
                return Ok(z);
            }
            if m > worst_seen.1 {
                worst_seen = (at, m);
            }
        }
        degree += 2;
    }
    Err(worst_seen)
}

/// Like [`fit_ladder`], trying the clearances of [`CLEARANCE_FLOORS`] from
/// the largest down.
fn fit_above(
    constraints: &[Constraint],
    pole: bool,
    margin: f64,
    max_degree: u32,
) -> std::result::Result<OddHarmonicSeries, (usize, f64)> {
    if constraints.is_empty() {
        return Ok(OddHarmonicSeries::zero());
    }
    let mut last = Err((0, f64::NEG_INFINITY));
    for scale in CLEARANCE_FLOORS {
        last = fit_ladder(constraints, pole, margin, scale * margin, max_degree);
        if last.is_ok() {
            break;
        }
    }
    last
}

/// Fits an odd height function whose graph has every non-polar obstacle at
/// least `margin_target` (in `tanlat`) above it.
///
/// Each fit is the smoothest series meeting the margins that also keeps the
/// obstacles a spherical distance of `margin_target` from the graph curve,
/// halving that distance (down to zero) when infeasible.
/// Both sides are tried when no polar obstacle forces one; the fit with the
/// smaller sampled `‖z‖∞` wins, and a "below" fit is returned as an "above"
/// fit of the half-turned obstacle set.
pub fn fit_separating_series(
    obstacles: &ObstacleSet,
    margin_target: f64,
    max_degree: u32,
) -> Result<Separation> {
    if !(margin_target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "margin target must be positive, got {margin_target}"
        )));
    }
    let mut above = Vec::new();
    let mut north = false;
    let mut south = false;
    for (index, x) in obstacles.points().iter().enumerate() {
        match lonlat3(&x.vec3()) {
            LonLat::NorthPole => north = true,
            LonLat::SouthPole => south = true,
            LonLat::Regular { lon, tanlat } => above.push(Constraint { index, lon, tanlat }),
        }
    }
    // The half-turn maps (lon, tanlat) to (−lon, −tanlat).
    let below: Vec<Constraint> = above
        .iter()
        .map(|c| Constraint {
            index: c.index,
            lon: (TAU - c.lon) % TAU,
            tanlat: -c.tanlat,
        })
        .collect();

    let try_above = !south;
    let try_below = !north;
    let up = try_above.then(|| fit_above(&above, north, margin_target, max_degree));
    let down = try_below.then(|| fit_above(&below, south, margin_target, max_degree));

    let pick_down = match (&up, &down) {
        (Some(Ok(u)), Some(Ok(d))) => d.sampled_sup(SUP_SAMPLES) < u.sampled_sup(SUP_SAMPLES),
        (Some(Ok(_)), _) => false,
        (_, Some(Ok(_))) => true,
        _ => {
            let fail = [up, down]
                .into_iter()
                .flatten()
                .filter_map(|r| r.err())
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, f64::NEG_INFINITY));
            let c = &above[fail.0.min(above.len().saturating_sub(1))];
            return Err(Error::SeparationFailed {
                max_degree,
                point: c.index,
                lon: c.lon,
                tanlat: c.tanlat,
                margin: fail.1,
            });
        }
    };
    Ok(if pick_down {
        Separation {
            obstacles: obstacles.half_turn(),
            series: down.unwrap().unwrap(),
        }
    } else {
        Separation {
            obstacles: obstacles.clone(),
            series: up.unwrap().unwrap(),
        }
    })
}

/// `max |N₂′|` over sampled `θ`: how fast the frame turns.
pub fn frame_speed(z: &OddHarmonicSeries) -> f64 {
    let frame = build_frame(z.clone());
    (0..SUP_SAMPLES)
        .map(|i| frame.at(TAU * i as f64 / SUP_SAMPLES as f64).dn2.norm())
        .fold(0.0, f64::max)
}

/// [`choose_pole`] followed by [`fit_separating_series`], searching the
/// first [`POLE_SEARCH`] accepted poles.
///
/// The first pole whose fit keeps every obstacle `margin_target` (in
/// radians) from the graph curve wins. Failing that, the fit with the
/// largest [`curve_clearance`] per unit of [`frame_speed`] is returned.
pub fn separate(
    raw: &[UnitVector],
    seed: u64,
    margin_target: f64,
    max_degree: u32,
) -> Result<Separation> {
    let mut best: Option<(f64, Separation)> = None;
    let mut first_err = None;
    for set in accepted_poles(raw, seed, POLE_SEARCH)? {
        match fit_separating_series(&set, margin_target, max_degree) {
            Ok(sep) => {
                let clearance = curve_clearance(&sep.obstacles, &sep.series);
                if clearance >= margin_target {
                    return Ok(sep);
                }
                let score = clearance / frame_speed(&sep.series);
                if best.as_ref().is_none_or(|b| score > b.0) {
                    best = Some((score, sep));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some((_, sep)), _) => Ok(sep),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one pole is accepted"),
    }
}

/// Checks that every obstacle lies strictly above the graph of `series`
/// (for user-supplied height functions).
pub fn check_separation(obstacles: &ObstacleSet, series: &OddHarmonicSeries) -> Result<()> {
    for (i, x) in obstacles.points().iter().enumerate() {
        let m = match lonlat3(&x.vec3()) {
            LonLat::NorthPole => continue,
            LonLat::SouthPole => f64::NEG_INFINITY,
            LonLat::Regular { lon, tanlat } => tanlat - series.eval(lon),
        };
        if !(m > 0.0) {
            return Err(Error::NotSeparated {
                point: i,
                margin: m,
            });
        }
    }
    Ok(())
}

/// Orthonormal normal frame along the unit circle built from a height function.
#[derive(Debug, Clone)]
pub struct Frame {
    series: OddHarmonicSeries,
}

/// `N₁`, `N₂` and their `θ`-derivatives at one angle.
#[derive(Debug, Clone, Copy)]
pub struct CircleFrame {
    pub n1: Vector3<f64>,
    pub n2: Vector3<f64>,
    pub dn1: Vector3<f64>,
    pub dn2: Vector3<f64>,
}

pub fn build_frame(z: OddHarmonicSeries) -> Frame {
    Frame { series: z }
}

impl Frame {
    pub fn series(&self) -> &OddHarmonicSeries {
        &self.series
    }

    pub fn at(&self, theta: f64) -> CircleFrame {
        let (z, dz) = self.series.eval_with_derivative(theta);
        let (s, c) = theta.sin_cos();
        let w = 1.0 / (1.0 + z * z).sqrt();
        let dw = -z * dz * w * w * w;
        // N₂ = w (c, s, z);  N₁ = f′ × N₂ = w (z c, z s, −1).
        let n2 = Vector3::new(c, s, z) * w;
        let n1 = Vector3::new(z * c, z * s, -1.0) * w;
        let dn2 = Vector3::new(c, s, z) * dw + Vector3::new(-s, c, dz) * w;
        let dn1 = Vector3::new(z * c, z * s, -1.0) * dw
            + Vector3::new(dz * c - z * s, dz * s + z * c, 0.0) * w;
        CircleFrame { n1, n2, dn1, dn2 }
    }

    pub fn n1(&self, theta: f64) -> Vector3<f64> {
        self.at(theta).n1
    }

    pub fn n2(&self, theta: f64) -> Vector3<f64> {
        self.at(theta).n2
    }
}

impl NormalFrame for Frame {
    fn domain_dim(&self) -> usize {
        1
    }

    fn ambient_dim(&self) -> usize {
        3
    }

    fn sample(&self, u: &[f64]) -> FrameSample {
        let f = self.at(u[0]);
        FrameSample {
            n1: DVector::from_column_slice(f.n1.as_slice()),
            n2: DVector::from_column_slice(f.n2.as_slice()),
            dn1: DMatrix::from_column_slice(3, 1, f.dn1.as_slice()),
            dn2: DMatrix::from_column_slice(3, 1, f.dn2.as_slice()),
        }
    }
}

/// Worst residuals of the frame conditions over a sample set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameResiduals {
    /// `max |‖Nᵢ‖ − 1|`.
    pub unit: f64,
    /// `max |N₁·N₂|`.
    pub orthogonal: f64,
    /// `max |Nᵢ·∂ⱼf|`, tangent columns normalized.
    pub tangency: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        self.unit.max(self.orthogonal).max(self.tangency)
    }
}

/// Checks a (possibly user-supplied) frame along `base` at the given
/// parameter samples.
pub fn frame_residuals<'a>(
    base: &dyn Immersion,
    frame: &dyn NormalFrame,
    samples: impl IntoIterator<Item = &'a [f64]>,
) -> FrameResiduals {
    let mut r = FrameResiduals::default();
    for u in samples {
        let s = frame.sample(u);
        let j = base.jacobian(u);
        r.unit = r
            .unit
            .max((s.n1.norm() - 1.0).abs())
            .max((s.n2.norm() - 1.0).abs());
        r.orthogonal = r.orthogonal.max(s.n1.dot(&s.n2).abs());
        for col in j.column_iter() {
            let t = col.normalize();
            r.tangency = r.tangency.max(s.n1.dot(&t).abs()).max(s.n2.dot(&t).abs());
        }
    }
    r
}
