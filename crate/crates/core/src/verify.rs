//! Sampled certification of the construction.
//!
//! Everything here is "verified at resolution": values are sampled on a
//! tensor grid, and the avoidance margin is reduced by a finite-difference
//! Lipschitz correction covering the gaps between samples. Grid passes run
//! on row blocks in parallel; per-block results are merged in block order,
//! so reports do not depend on the thread count.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::figure_eight::max_delta_for_arc;
use crate::framing::{Frame, ObstacleSet};
use crate::immersion::{
    base_circle, extend, projected_gauss, surface_normal, Extension, ExtensionParams, Immersion,
    RANK_TOLERANCE,
};
use crate::sphere::{angle3, lonlat3, LonLat};

pub const MIN_GRID: usize = 16;
pub const DEFAULT_GRID: usize = 1024;
pub const QUICK_GRID: usize = 256;
pub const DEGREE_TOLERANCE: f64 = 1e-2;
/// Fraction of `α` spent on the figure-eight arc when tuning `δ`.
pub const ALPHA_SAFETY: f64 = 0.9;
pub const MAX_TUNED_PARAM: f64 = 0.125;
pub const MIN_EPSILON: f64 = 1e-6;
/// `θ` samples used for `α` when an obstacle sits on the axis.
pub const ALPHA_SAMPLES: usize = 4096;

const BLOCK_ROWS: usize = 8;
/// Subdivisions per axis when a cell's Lipschitz correction exceeds half its
/// margin, and how many times that may nest.
const REFINE: usize = 4;
const REFINE_DEPTH: u32 = 3;

/// One axis of a tensor grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    start: f64,
    span: f64,
    count: usize,
    periodic: bool,
}

impl Axis {
    /// `count` nodes on `[0, 2π)`, wrapping around.
    pub fn periodic(count: usize) -> Self {
        Axis {
            start: 0.0,
            span: TAU,
            count,
            periodic: true,
        }
    }

    /// `count` nodes on `[start, end]`, endpoints included.
    pub fn interval(start: f64, end: f64, count: usize) -> Self {
        Axis {
            start,
            span: end - start,
            count,
            periodic: false,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn step(&self) -> f64 {
        if self.periodic {
            self.span / self.count as f64
        } else {
            self.span / (self.count - 1) as f64
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.step() * i as f64
    }

    /// Number of cells, i.e. node pairs `(i, i + 1)` with wrap-around.
    pub fn cells(&self) -> usize {
        if self.periodic {
            self.count
        } else {
            self.count - 1
        }
    }

    fn next(&self, i: usize) -> usize {
        if i + 1 == self.count && self.periodic {
            0
        } else {
            i + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        for a in &axes {
            if a.count < 2 || !(a.span.is_finite() && a.span != 0.0) {
                return Err(Error::InvalidParameter(format!("bad grid axis {a:?}")));
            }
        }
        Ok(Grid { axes })
    }

    /// Periodic grid on the torus with the given resolutions.
    pub fn torus(counts: &[usize]) -> Self {
        Grid {
            axes: counts.iter().map(|&n| Axis::periodic(n.max(2))).collect(),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Parameter values of the node with flat index `idx` (first axis fastest).
    pub fn node(&self, mut idx: usize) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| {
                let i = idx % a.count;
                idx /= a.count;
                a.node(i)
            })
            .collect()
    }

    /// Length of a cell diagonal.
    pub fn diagonal(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.step() * a.step())
            .sum::<f64>()
            .sqrt()
    }

    fn require(&self, dims: usize, min: usize) -> Result<()> {
        if self.axes.len() != dims {
            return Err(Error::InvalidParameter(format!(
                "grid has {} axes, immersion has {dims} parameters",
                self.axes.len()
            )));
        }
        if let Some(a) = self.axes.iter().find(|a| a.count < min) {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {} is below the minimum {min}",
                a.count
            )));
        }
        Ok(())
    }
}

/// Smallest singular value of a jacobian.
pub fn sigma_min(j: &DMatrix<f64>) -> f64 {
    match j.ncols() {
        0 => f64::INFINITY,
        1 => j.column(0).norm(),
        2 => {
            let a = j.column(0).norm_squared();
            let c = j.column(1).norm_squared();
            let b = j.column(0).dot(&j.column(1));
            let half = 0.5 * (a - c);
            let lambda = 0.5 * (a + c) - half.hypot(b);
            // The closed form loses accuracy near rank deficiency; fall back
            // to det(JᵀJ)/λ_max there.
            let lambda_max = 0.5 * (a + c) + half.hypot(b);
            let det = a * c - b * b;
            let refined = if lambda_max > 0.0 {
                det / lambda_max
            } else {
                0.0
            };
            lambda.max(refined).max(0.0).sqrt()
        }
        _ => j.singular_values().min(),
    }
}

/// Minimum over the grid of the smallest singular value of the jacobian.
pub fn immersion_check(f: &dyn Immersion, grid: &Grid) -> Result<f64> {
    grid.require(f.domain_dim(), MIN_GRID)?;
    Ok((0..grid.node_count())
        .into_par_iter()
        .map(|i| sigma_min(&f.jacobian(&grid.node(i))))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Signed area of the geodesic triangle `abc` (Van Oosterom–Strackee).
fn signed_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Raw statistics of one pass over a surface grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSurvey {
    pub sigma_min: f64,
    /// Nodes where the Gauss map is undefined.
    pub rank_failures: usize,
    /// Minimum angular distance from sampled normals to the obstacles
    /// (`π` when there are none).
    pub avoidance_margin: f64,
    /// Largest finite-difference rate of the normal along the first axis.
    pub lipschitz_u: f64,
    /// Same along the second axis.
    pub lipschitz_v: f64,
    /// Minimum over cells of the smallest corner margin minus the local
    /// rate times half the cell diagonal, with loose cells resampled.
    pub certified_radius: f64,
    /// `(1/4π) Σ` signed spherical areas of the normal images of the cells.
    pub degree_estimate: f64,
}

impl SurfaceSurvey {
    /// `√(L_u² + L_v²)`, a bound on the gradient norm of the normal.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz_u.hypot(self.lipschitz_v)
    }

    /// Margin minus the global rate times half the cell diagonal. Never
    /// larger than `certified_radius`.
    pub fn global_certified_radius(&self, grid: &Grid) -> f64 {
        self.avoidance_margin - self.lipschitz() * grid.diagonal() / 2.0
    }
}

struct BlockStats {
    sigma_min: f64,
    rank_failures: usize,
    margin: f64,
    lip_u: f64,
    lip_v: f64,
    certified: f64,
    area: f64,
}

#[derive(Clone, Copy)]
struct Node {
    g: Vector3<f64>,
    margin: f64,
    // Largest rate over the incident edges along each axis.
    rate_u: f64,
    rate_v: f64,
}

/// Samples a surface `T² → R³` (or a chart of one): singular values, Gauss
/// map distances to `obstacles`, its finite-difference rates, the
/// cell-wise certified clearance, and the oriented area swept by the
/// Gauss map.
///
/// The certified clearance of a cell uses the largest rate among edges
/// touching its corners, so every point of the cell is within half a
/// diagonal of a corner whose margin is known.
pub fn survey(f: &dyn Immersion, grid: &Grid, obstacles: &[Vector3<f64>]) -> Result<SurfaceSurvey> {
    if f.domain_dim() != 2 || f.ambient_dim() != 3 {
        return Err(Error::InvalidParameter(format!(
            "surface survey needs T² → R³, got T^{} → R^{}",
            f.domain_dim(),
            f.ambient_dim()
        )));
    }
    grid.require(2, 2)?;
    let (ax, ay) = (grid.axes[0], grid.axes[1]);
    let (hu, hv) = (ax.step(), ay.step());
    let half_diag = grid.diagonal() / 2.0;
    let cells = ax.cells();
    let blocks: Vec<(usize, usize)> = (0..cells)
        .step_by(BLOCK_ROWS)
        .map(|r0| (r0, (r0 + BLOCK_ROWS).min(cells)))
        .collect();
    let row_index = |r: isize| -> Option<usize> {
        let n = ax.count as isize;
        if ax.periodic {
            Some(r.rem_euclid(n) as usize)
        } else if (0..n).contains(&r) {
            Some(r as usize)
        } else {
            None
        }
    };

    let stats: Vec<BlockStats> = blocks
        .par_iter()
        .map(|&(r0, r1)| {
            let mut s = BlockStats {
                sigma_min: f64::INFINITY,
                rank_failures: 0,
                margin: PI,
                lip_u: 0.0,
                lip_v: 0.0,
                certified: PI,
                area: 0.0,
            };
            // Node rows r0 - 1 ..= r1 + 1; local index i is row r0 + i - 1.
            let owned_end = if !ax.periodic && r1 == cells {
                r1 + 1
            } else {
                r1
            };
            let mut rows: Vec<Option<Vec<Option<Node>>>> = (r0 as isize - 1..=r1 as isize + 1)
                .map(|r| {
                    let ri = row_index(r)?;
                    let owned = (r0..owned_end).contains(&(r as usize)) && r >= 0;
                    let u = ax.node(ri);
                    Some(
                        (0..ay.count)
                            .map(|c| {
                                let j = f.jacobian(&[u, ay.node(c)]);
                                let n = surface_normal(&j);
                                let len = n.norm();
                                let ok = len >= RANK_TOLERANCE;
                                if owned {
                                    s.sigma_min = s.sigma_min.min(sigma_min(&j));
                                    s.rank_failures += usize::from(!ok);
                                }
                                ok.then(|| {
                                    let g = n / len;
                                    let margin =
                                        obstacles.iter().map(|x| angle3(&g, x)).fold(PI, f64::min);
                                    if owned {
                                        s.margin = s.margin.min(margin);
                                    }
                                    Node {
                                        g,
                                        margin,
                                        rate_u: 0.0,
                                        rate_v: 0.0,
                                    }
                                })
                            })
                            .collect(),
                    )
                })
                .collect();

            // Edge rates, recorded on both endpoints.
            let last = rows.len() - 1;
            for (i, row) in rows.iter_mut().enumerate() {
                let Some(row) = row.as_mut() else { continue };
                for c in 0..ay.cells() {
                    let c1 = ay.next(c);
                    if let (Some(a), Some(b)) = (row[c], row[c1]) {
                        let rate = angle3(&a.g, &b.g) / hv;
                        if (1..last).contains(&i) && r0 + i - 1 < owned_end {
                            s.lip_v = s.lip_v.max(rate);
                        }
                        for k in [c, c1] {
                            let n = row[k].as_mut().unwrap();
                            n.rate_v = n.rate_v.max(rate);
                        }
                    }
                }
            }
            for i in 0..last {
                let (head, tail) = rows.split_at_mut(i + 1);
                let (Some(row), Some(next)) = (head[i].as_mut(), tail[0].as_mut()) else {
                    continue;
                };
                for c in 0..ay.count {
                    if let (Some(a), Some(b)) = (row[c].as_mut(), next[c].as_mut()) {
                        let rate = angle3(&a.g, &b.g) / hu;
                        if (1..=r1 - r0).contains(&i) {
                            s.lip_u = s.lip_u.max(rate);
                        }
                        a.rate_u = a.rate_u.max(rate);
                        b.rate_u = b.rate_u.max(rate);
                    }
                }
            }

            for i in 1..=r1 - r0 {
                let (Some(row), Some(next)) = (&rows[i], &rows[i + 1]) else {
                    continue;
                };
                for c in 0..ay.cells() {
                    let c1 = ay.next(c);
                    let (Some(n00), Some(n10), Some(n11), Some(n01)) =
                        (row[c], next[c], next[c1], row[c1])
                    else {
                        continue;
                    };
                    s.area += signed_triangle_area(&n00.g, &n10.g, &n11.g)
                        + signed_triangle_area(&n00.g, &n11.g, &n01.g);
                    let corners = [n00, n10, n11, n01];
                    let margin = corners.iter().map(|n| n.margin).fold(PI, f64::min);
                    let lu = corners.iter().map(|n| n.rate_u).fold(0.0, f64::max);
                    let lv = corners.iter().map(|n| n.rate_v).fold(0.0, f64::max);
                    let correction = lu.hypot(lv) * half_diag;
                    let mut bound = margin - correction;
                    if correction > 0.5 * margin && !obstacles.is_empty() {
                        let corner = (ax.node(r0 + i - 1), ay.node(c));
                        if let Some(b) = refine_cell(f, obstacles, corner, (hu, hv), REFINE_DEPTH) {
                            bound = b;
                        }
                    }
                    s.certified = s.certified.min(bound);
                }
            }
            s
        })
        .collect();

    let mut out = SurfaceSurvey {
        sigma_min: f64::INFINITY,
        rank_failures: 0,
        avoidance_margin: PI,
        lipschitz_u: 0.0,
        lipschitz_v: 0.0,
        certified_radius: PI,
        degree_estimate: 0.0,
    };
    let mut area = 0.0;
    for s in &stats {
        out.sigma_min = out.sigma_min.min(s.sigma_min);
        out.rank_failures += s.rank_failures;
        out.avoidance_margin = out.avoidance_margin.min(s.margin);
        out.lipschitz_u = out.lipschitz_u.max(s.lip_u);
        out.lipschitz_v = out.lipschitz_v.max(s.lip_v);
        out.certified_radius = out.certified_radius.min(s.certified);
        area += s.area;
    }
    out.degree_estimate = area / (4.0 * PI);
    Ok(out)
}

/// Certified clearance of one cell from a `REFINE × REFINE` resampling,
/// recursing into sub-cells whose correction still dominates their margin.
/// `None` when the Gauss map is undefined at a sub-node.
fn refine_cell(
    f: &dyn Immersion,
    obstacles: &[Vector3<f64>],
    corner: (f64, f64),
    step: (f64, f64),
    depth: u32,
) -> Option<f64> {
    let n = REFINE + 1;
    let (hu, hv) = (step.0 / REFINE as f64, step.1 / REFINE as f64);
    let half_diag = hu.hypot(hv) / 2.0;
    let mut nodes = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = [corner.0 + hu * i as f64, corner.1 + hv * j as f64];
            let normal = surface_normal(&f.jacobian(&u));
            let len = normal.norm();
            if len < RANK_TOLERANCE {
                return None;
            }
            let g = normal / len;
            let margin = obstacles.iter().map(|x| angle3(&g, x)).fold(PI, f64::min);
            nodes.push(Node {
                g,
                margin,
                rate_u: 0.0,
                rate_v: 0.0,
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            if j + 1 < n {
                let rate = angle3(&nodes[k].g, &nodes[k + 1].g) / hv;
                nodes[k].rate_v = nodes[k].rate_v.max(rate);
                nodes[k + 1].rate_v = nodes[k + 1].rate_v.max(rate);
            }
            if i + 1 < n {
                let rate = angle3(&nodes[k].g, &nodes[k + n].g) / hu;
                nodes[k].rate_u = nodes[k].rate_u.max(rate);
                nodes[k + n].rate_u = nodes[k + n].rate_u.max(rate);
            }
        }
    }
    let mut out = PI;
    for i in 0..REFINE {
        for j in 0..REFINE {
            let corners = [
                i * n + j,
                (i + 1) * n + j,
                (i + 1) * n + j + 1,
                i * n + j + 1,
            ]
            .map(|k| nodes[k]);
            let margin = corners.iter().map(|n| n.margin).fold(PI, f64::min);
            let lu = corners.iter().map(|n| n.rate_u).fold(0.0, f64::max);
            let lv = corners.iter().map(|n| n.rate_v).fold(0.0, f64::max);
            let correction = lu.hypot(lv) * half_diag;
            let mut bound = margin - correction;
            if depth > 1 && correction > 0.5 * margin {
                let sub = (corner.0 + hu * i as f64, corner.1 + hv * j as f64);
                bound = refine_cell(f, obstacles, sub, (hu, hv), depth - 1)?;
            }
            out = out.min(bound);
        }
    }
    Some(out)
}

/// `(avoidance_margin, certified_radius)` of the Gauss map of `f`.
pub fn avoidance_check(
    f: &dyn Immersion,
    obstacles: &[Vector3<f64>],
    grid: &Grid,
) -> Result<(f64, f64)> {
    let s = survey(f, grid, obstacles)?;
    Ok((s.avoidance_margin, s.certified_radius))
}

/// `(1/4π)∫ det(dG)` estimated from the oriented areas of the cells' images.
pub fn degree_check(f: &dyn Immersion, grid: &Grid) -> Result<f64> {
    Ok(survey(f, grid, &[])?.degree_estimate)
}

/// Uniform excess `α` by which the obstacle-free arc of every normal circle,
/// centred at `N₁(θ)`, exceeds a semicircle.
///
/// The normal circle at `θ` passes through the axis and the meridians at
/// `θ` and `θ + π`, and `N₁(θ + π) = N₁(θ)`. An obstacle off the axis lies
/// on exactly one such circle, so it contributes `2·∠(N₁(lon x), x) − π`
/// exactly. An obstacle on the axis lies on all of them; its contribution is
/// sampled at `n_theta` angles and lowered by the sampling allowance
/// `2·max|N₁′|·π/n_theta`. With no obstacles `α = π`.
pub fn alpha_margin(obstacles: &ObstacleSet, frame: &Frame, n_theta: usize) -> f64 {
    let mut alpha = PI;
    let mut axis_points = Vec::new();
    for x in obstacles.points() {
        let v = x.vec3();
        match lonlat3(&v) {
            LonLat::Regular { lon, .. } => {
                alpha = alpha.min(2.0 * angle3(&frame.n1(lon), &v) - PI);
            }
            _ => axis_points.push(v),
        }
    }
    if !axis_points.is_empty() {
        let n = n_theta.max(MIN_GRID);
        let mut g_min = f64::INFINITY;
        let mut speed: f64 = 0.0;
        for i in 0..n {
            let f = frame.at(TAU * i as f64 / n as f64);
            speed = speed.max(f.dn1.norm());
            for v in &axis_points {
                g_min = g_min.min(2.0 * angle3(&f.n1, v));
            }
        }
        alpha = alpha.min(g_min - PI - 2.0 * speed * PI / n as f64);
    }
    alpha
}

/// Everything certified for one choice of `(ε, δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub epsilon: f64,
    pub delta: f64,
    pub grid: (usize, usize),
    pub sigma_min: f64,
    pub rank_failures: usize,
    pub avoidance_margin: f64,
    pub alpha: f64,
    pub ell_delta: f64,
    pub degree_estimate: f64,
    pub lipschitz_estimate: f64,
    pub certified_radius: f64,
    pub pass: bool,
}

impl VerificationReport {
    fn from_survey(params: &ExtensionParams, grid: &Grid, s: &SurfaceSurvey, alpha: f64) -> Self {
        let certified = s.certified_radius;
        let finite = [
            s.sigma_min,
            s.avoidance_margin,
            alpha,
            s.degree_estimate,
            s.lipschitz(),
            certified,
        ]
        .iter()
        .all(|v| v.is_finite());
        let pass = finite
            && s.rank_failures == 0
            && s.sigma_min > 0.0
            && certified > 0.0
            && s.degree_estimate.abs() < DEGREE_TOLERANCE;
        VerificationReport {
            epsilon: params.epsilon(),
            delta: params.delta(),
            grid: (grid.axes[0].count, grid.axes[1].count),
            sigma_min: s.sigma_min,
            rank_failures: s.rank_failures,
            avoidance_margin: s.avoidance_margin,
            alpha,
            ell_delta: params.figure8().spherical_image_length(),
            degree_estimate: s.degree_estimate,
            lipschitz_estimate: s.lipschitz(),
            certified_radius: certified,
            pass,
        }
    }
}

/// The torus over the unit circle for a frame and parameters.
pub fn circle_torus(frame: Arc<Frame>, params: ExtensionParams) -> Extension {
    extend(Arc::new(base_circle()), frame, params).expect("circle frame matches circle base")
}

/// Builds the torus for `(ε, δ)` and runs the full certification.
pub fn verify_extension(
    obstacles: &ObstacleSet,
    frame: &Arc<Frame>,
    params: ExtensionParams,
    grid: &Grid,
) -> Result<VerificationReport> {
    grid.require(2, MIN_GRID)?;
    let f = circle_torus(frame.clone(), params);
    let s = survey(&f, grid, &obstacles.vectors())?;
    let alpha = alpha_margin(obstacles, frame, ALPHA_SAMPLES);
    Ok(VerificationReport::from_survey(&params, grid, &s, alpha))
}

/// Chooses `δ` from `α`, then halves `ε` from `1/8` until the report passes
/// with at least `target_radius` of certified clearance.
pub fn auto_tune(
    obstacles: &ObstacleSet,
    frame: &Arc<Frame>,
    target_radius: f64,
    grid: &Grid,
) -> Result<(ExtensionParams, VerificationReport)> {
    let alpha = alpha_margin(obstacles, frame, ALPHA_SAMPLES);
    if !(alpha > 0.0) {
        return Err(Error::AlphaNonPositive(alpha));
    }
    let delta = max_delta_for_arc(ALPHA_SAFETY * alpha)?.min(MAX_TUNED_PARAM);
    let mut epsilon = MAX_TUNED_PARAM;
    loop {
        let params = ExtensionParams::new(epsilon, delta)?;
        let report = verify_extension(obstacles, frame, params, grid)?;
        if report.pass && report.certified_radius >= target_radius {
            return Ok((params, report));
        }
        epsilon /= 2.0;
        if epsilon < MIN_EPSILON {
            return Err(Error::CannotCertify {
                epsilon,
                report: Box::new(report),
            });
        }
    }
}

/// `sup ‖∂_q F_t − df‖` (spectral norm) over the grid: the `C¹` distance of
/// the slices from the base.
pub fn c1_defect(ext: &Extension, grid: &Grid) -> Result<f64> {
    grid.require(ext.domain_dim(), 2)?;
    let k = ext.base().domain_dim();
    Ok((0..grid.node_count())
        .into_par_iter()
        .map(|i| {
            let u = grid.node(i);
            let d = ext.jacobian(&u).columns(0, k).into_owned() - ext.base().jacobian(&u[..k]);
            if k == 1 {
                d.norm()
            } else {
                d.singular_values().max()
            }
        })
        .reduce(|| 0.0, f64::max))
}

/// `sup ∠(G_F, G̃_F)` over the grid.
pub fn gauss_defect(ext: &Extension, grid: &Grid) -> Result<f64> {
    if ext.ambient_dim() != 3 || ext.domain_dim() != 2 {
        return Err(Error::InvalidParameter(
            "gauss defect needs a surface in R³".into(),
        ));
    }
    grid.require(2, 2)?;
    let proj = projected_gauss(ext.frame().clone(), ext.params());
    Ok((0..grid.node_count())
        .into_par_iter()
        .map(|i| {
            let u = grid.node(i);
            let n = surface_normal(&ext.jacobian(&u));
            let p = proj.at(&u).vec3();
            angle3(&(n / n.norm()), &p)
        })
        .reduce(|| 0.0, f64::max))
}

/// Angular distance from `x` to the closed half of the normal circle at
/// `θ` centred at `N₁(θ)`; negative when `x` is on that circle inside it.
pub fn semicircle_clearance(frame: &Frame, theta: f64, x: &Vector3<f64>) -> f64 {
    angle3(&frame.n1(theta), x) - FRAC_PI_2
}
