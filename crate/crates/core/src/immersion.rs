//! Parametric immersions of tori `T^k → R^m` with analytic jacobians.
//!
//! Every parameter is `2π`-periodic. The constructions here are the unit
//! circle, rotation of a profile about a codimension-two axis ([`spin`]),
//! and the figure-eight sweep through a normal frame ([`extend`]).

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::figure_eight::FigureEightParams;
use crate::sphere::UnitVector;

/// Below this length the generalized cross product counts as degenerate.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Minimum distance of a spin profile from the rotation axis.
pub const AXIS_CLEARANCE: f64 = 1e-6;

pub trait Immersion: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> DVector<f64>;
    /// `ambient_dim × domain_dim` matrix of partial derivatives.
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64>;
}

pub type ParametricImmersion = Arc<dyn Immersion>;

/// Orthonormal pair of normal fields along an immersion, with derivatives.
pub trait NormalFrame: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn sample(&self, u: &[f64]) -> FrameSample;
}

#[derive(Debug, Clone)]
pub struct FrameSample {
    pub n1: DVector<f64>,
    pub n2: DVector<f64>,
    /// `ambient_dim × domain_dim`.
    pub dn1: DMatrix<f64>,
    pub dn2: DMatrix<f64>,
}

/// `f(θ) = (cos θ, sin θ, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaseCircle;

pub fn base_circle() -> BaseCircle {
    BaseCircle
}

impl Immersion for BaseCircle {
    fn domain_dim(&self) -> usize {
        1
    }

    fn ambient_dim(&self) -> usize {
        3
    }

    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (s, c) = u[0].sin_cos();
        DVector::from_column_slice(&[c, s, 0.0])
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (s, c) = u[0].sin_cos();
        DMatrix::from_column_slice(3, 1, &[-s, c, 0.0])
    }
}

type EvalFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// An immersion given by closures, for fixtures and user-defined profiles.
pub struct FnImmersion {
    domain_dim: usize,
    ambient_dim: usize,
    eval: Box<EvalFn>,
    jacobian: Box<JacobianFn>,
}

impl FnImmersion {
    pub fn new(
        domain_dim: usize,
        ambient_dim: usize,
        eval: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        FnImmersion {
            domain_dim,
            ambient_dim,
            eval: Box::new(eval),
            jacobian: Box::new(jacobian),
        }
    }

    /// The constant map to `point` from the 0-torus.
    pub fn point(point: &[f64]) -> Self {
        let p = DVector::from_column_slice(point);
        let m = point.len();
        FnImmersion::new(0, m, move |_| p.clone(), move |_| DMatrix::zeros(m, 0))
    }

    /// `s ↦ center + radius·(cos s, sin s)` in the last two coordinates.
    pub fn circle(radius: f64, center: &[f64]) -> Result<Self> {
        let m = center.len();
        if m < 2 {
            return Err(Error::InvalidParameter(
                "a circle needs at least two coordinates".into(),
            ));
        }
        let c = DVector::from_column_slice(center);
        Ok(FnImmersion::new(
            1,
            m,
            move |u| {
                let mut p = c.clone();
                p[m - 2] += radius * u[0].cos();
                p[m - 1] += radius * u[0].sin();
                p
            },
            move |u| {
                let mut j = DMatrix::zeros(m, 1);
                j[(m - 2, 0)] = -radius * u[0].sin();
                j[(m - 1, 0)] = radius * u[0].cos();
                j
            },
        ))
    }
}

impl Immersion for FnImmersion {
    fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn eval(&self, u: &[f64]) -> DVector<f64> {
        (self.eval)(u)
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(u)
    }
}

/// `f + offset`.
pub struct Translated {
    inner: ParametricImmersion,
    offset: DVector<f64>,
}

pub fn translate(inner: ParametricImmersion, offset: &[f64]) -> Result<Translated> {
    if offset.len() != inner.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "offset has {} coordinates, immersion lives in R^{}",
            offset.len(),
            inner.ambient_dim()
        )));
    }
    Ok(Translated {
        inner,
        offset: DVector::from_column_slice(offset),
    })
}

impl Immersion for Translated {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn eval(&self, u: &[f64]) -> DVector<f64> {
        self.inner.eval(u) + &self.offset
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        self.inner.jacobian(u)
    }
}

/// Equispaced samples of the `k`-torus, `per_axis` per axis (at least one
/// sample for `k = 0`).
pub fn torus_samples(k: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    TAU * i as f64 / per_axis as f64
                })
                .collect()
        })
        .collect()
}

/// Rotation of a profile `f₀: T^k → R^d` about `R^{d−1} × {(0, 0)}` inside
/// `R^{d+1}`:
///
/// ```text
/// f₁(q, t) = (f₀¹, …, f₀^{d−1}, f₀^d cos t, −f₀^d sin t)
/// ```
///
/// which is the block matrix `diag(I, R(t))` with `R(t) = [[cos, sin], [−sin, cos]]`
/// applied to `(f₀, 0)`.
pub struct Spun {
    inner: ParametricImmersion,
}

const SPIN_CHECK_NODES: usize = 1 << 18;

/// Spins `f0`; its last component must stay at least [`AXIS_CLEARANCE`]
/// away from zero on a verification grid.
pub fn spin(f0: ParametricImmersion) -> Result<Spun> {
    let k = f0.domain_dim();
    let d = f0.ambient_dim();
    if d == 0 {
        return Err(Error::InvalidParameter("cannot spin a map into R^0".into()));
    }
    let per_axis = if k == 0 {
        1
    } else {
        let cap = (SPIN_CHECK_NODES as f64).powf(1.0 / k as f64).floor() as usize;
        cap.clamp(2, 64)
    };
    for u in torus_samples(k, per_axis) {
        let value = f0.eval(&u)[d - 1];
        if !(value.abs() > AXIS_CLEARANCE) {
            return Err(Error::AxisProximity { sample: u, value });
        }
    }
    Ok(Spun { inner: f0 })
}

impl Immersion for Spun {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim() + 1
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim() + 1
    }

    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (q, t) = u.split_at(u.len() - 1);
        let p = self.inner.eval(q);
        let d = p.len();
        let (s, c) = t[0].sin_cos();
        let mut out = DVector::zeros(d + 1);
        out.rows_mut(0, d - 1).copy_from(&p.rows(0, d - 1));
        out[d - 1] = p[d - 1] * c;
        out[d] = -p[d - 1] * s;
        out
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (q, t) = u.split_at(u.len() - 1);
        let p = self.inner.eval(q);
        let j0 = self.inner.jacobian(q);
        let d = p.len();
        let k = q.len();
        let (s, c) = t[0].sin_cos();
        let mut j = DMatrix::zeros(d + 1, k + 1);
        j.view_mut((0, 0), (d - 1, k))
            .copy_from(&j0.view((0, 0), (d - 1, k)));
        for col in 0..k {
            j[(d - 1, col)] = j0[(d - 1, col)] * c;
            j[(d, col)] = -j0[(d - 1, col)] * s;
        }
        j[(d - 1, k)] = -p[d - 1] * s;
        j[(d, k)] = -p[d - 1] * c;
        j
    }
}

/// Tube scale `ε` and figure-eight amplitude `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParams {
    epsilon: f64,
    figure8: FigureEightParams,
}

impl ExtensionParams {
    /// Requires `0 < epsilon ≤ 1` and `0 < delta ≤ 1`.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(ExtensionParams {
            epsilon,
            figure8: FigureEightParams::new(delta)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.figure8.delta()
    }

    pub fn figure8(&self) -> &FigureEightParams {
        &self.figure8
    }
}

/// `F(q, t) = f(q) + ε (E¹_δ(t) N₁(q) + E²_δ(t) N₂(q))`.
#[derive(Clone)]
pub struct Extension {
    base: ParametricImmersion,
    frame: Arc<dyn NormalFrame>,
    params: ExtensionParams,
}

pub fn extend(
    base: ParametricImmersion,
    frame: Arc<dyn NormalFrame>,
    params: ExtensionParams,
) -> Result<Extension> {
    if frame.domain_dim() != base.domain_dim() || frame.ambient_dim() != base.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "frame on T^{} in R^{} does not match immersion of T^{} in R^{}",
            frame.domain_dim(),
            frame.ambient_dim(),
            base.domain_dim(),
            base.ambient_dim()
        )));
    }
    Ok(Extension {
        base,
        frame,
        params,
    })
}

impl Extension {
    pub fn params(&self) -> &ExtensionParams {
        &self.params
    }

    pub fn base(&self) -> &ParametricImmersion {
        &self.base
    }

    pub fn frame(&self) -> &Arc<dyn NormalFrame> {
        &self.frame
    }

    /// The slice `F_t = F(·, t)` as an immersion of the base torus.
    pub fn slice(&self, t: f64) -> Slice<'_> {
        Slice { ext: self, t }
    }
}

impl Immersion for Extension {
    fn domain_dim(&self) -> usize {
        self.base.domain_dim() + 1
    }

    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let (q, t) = u.split_at(u.len() - 1);
        let (e1, e2) = self.params.figure8.eval(t[0]);
        let fr = self.frame.sample(q);
        let eps = self.params.epsilon;
        self.base.eval(q) + fr.n1 * (eps * e1) + fr.n2 * (eps * e2)
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (q, t) = u.split_at(u.len() - 1);
        let k = q.len();
        let m = self.base.ambient_dim();
        let eps = self.params.epsilon;
        let (e1, e2) = self.params.figure8.eval(t[0]);
        let (d1, d2) = self.params.figure8.derivative(t[0]);
        let fr = self.frame.sample(q);
        let mut j = DMatrix::zeros(m, k + 1);
        let jq = self.base.jacobian(q) + fr.dn1 * (eps * e1) + fr.dn2 * (eps * e2);
        j.view_mut((0, 0), (m, k)).copy_from(&jq);
        j.set_column(k, &(fr.n1 * (eps * d1) + fr.n2 * (eps * d2)));
        j
    }
}

/// `F_t` for fixed `t`.
pub struct Slice<'a> {
    ext: &'a Extension,
    t: f64,
}

impl Slice<'_> {
    pub fn eval(&self, q: &[f64]) -> DVector<f64> {
        let mut u = q.to_vec();
        u.push(self.t);
        self.ext.eval(&u)
    }

    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let mut u = q.to_vec();
        u.push(self.t);
        let j = self.ext.jacobian(&u);
        j.columns(0, q.len()).into_owned()
    }
}

/// Generalized cross product of the `m − 1` columns of an `m × (m − 1)`
/// matrix: the vector whose `i`-th entry is `det[J | eᵢ]`, so that for
/// `m = 3` it is `J₁ × J₂`.
pub fn generalized_cross(j: &DMatrix<f64>) -> DVector<f64> {
    let m = j.nrows();
    assert_eq!(j.ncols() + 1, m, "need m − 1 columns in R^m");
    if m == 3 {
        let a = Vector3::new(j[(0, 0)], j[(1, 0)], j[(2, 0)]);
        let b = Vector3::new(j[(0, 1)], j[(1, 1)], j[(2, 1)]);
        return DVector::from_column_slice(a.cross(&b).as_slice());
    }
    DVector::from_fn(m, |i, _| {
        let minor = j.clone().remove_row(i);
        let sign = if (i + m - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// `∂₁F × ∂₂F` of a surface in `R³` (unnormalized).
#[inline]
pub(crate) fn surface_normal(j: &DMatrix<f64>) -> Vector3<f64> {
    let a = Vector3::new(j[(0, 0)], j[(1, 0)], j[(2, 0)]);
    let b = Vector3::new(j[(0, 1)], j[(1, 1)], j[(2, 1)]);
    a.cross(&b)
}

/// Gauss map of a hypersurface (`domain_dim = ambient_dim − 1`), oriented
/// by the column order of the jacobian and an optional global flip.
pub struct GaussMap<'a> {
    immersion: &'a dyn Immersion,
    sign: f64,
}

impl<'a> GaussMap<'a> {
    pub fn new(immersion: &'a dyn Immersion) -> Result<Self> {
        if immersion.domain_dim() + 1 != immersion.ambient_dim() {
            return Err(Error::InvalidParameter(format!(
                "Gauss map needs a hypersurface, got T^{} in R^{}",
                immersion.domain_dim(),
                immersion.ambient_dim()
            )));
        }
        Ok(GaussMap {
            immersion,
            sign: 1.0,
        })
    }

    pub fn flipped(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn at(&self, u: &[f64]) -> Result<UnitVector> {
        let n = generalized_cross(&self.immersion.jacobian(u)) * self.sign;
        let norm = n.norm();
        if !(norm >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient {
                at: u.to_vec(),
                norm,
            });
        }
        UnitVector::new(n)
    }
}

pub fn gauss_map(immersion: &dyn Immersion, u: &[f64]) -> Result<UnitVector> {
    GaussMap::new(immersion)?.at(u)
}

/// `G̃(q, t) = cos ν(t) N₁(q) + sin ν(t) N₂(q)`: the normalized projection of
/// the Gauss map of the extension into the normal plane of the base.
pub struct ProjectedGauss {
    frame: Arc<dyn NormalFrame>,
    figure8: FigureEightParams,
}

pub fn projected_gauss(frame: Arc<dyn NormalFrame>, params: &ExtensionParams) -> ProjectedGauss {
    ProjectedGauss {
        frame,
        figure8: *params.figure8(),
    }
}

impl ProjectedGauss {
    pub fn at(&self, u: &[f64]) -> UnitVector {
        let (q, t) = u.split_at(u.len() - 1);
        let (c, s) = self.figure8.unit_normal(t[0]);
        let fr = self.frame.sample(q);
        UnitVector::new(fr.n1 * c + fr.n2 * s).expect("orthonormal frame")
    }
}
