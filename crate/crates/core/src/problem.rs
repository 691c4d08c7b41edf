//! Composite problems `Ψ = f + r` over a feasible set, plus their diagnostics.

use std::fmt;
use std::sync::Arc;

use crate::conditional_gradient::GeneralizedLinearOracle;
use crate::error::check_dim;
use crate::geometry::{project_simplex, soft_threshold};
use crate::linalg;
use crate::rng::SeededRng;
use crate::{Error, Matrix, Result, Vector};

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type MapFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
/// `(x, γ) ↦ argmin_u γ·φ(u) + ½‖u − x‖²`.
pub type ProxFn = Arc<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;

/// Membership tolerance used by [`FeasibleSet::contains`].
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// The smooth (or merely subdifferentiable) part `f`.
///
/// `gradient` doubles as a subgradient selection for nonsmooth `f`.
#[derive(Clone)]
pub struct SmoothPart {
    value: ValueFn,
    gradient: Option<MapFn>,
    pub lipschitz_grad: Option<f64>,
    /// Hölder exponent and constant `(ν, L_ν)`.
    pub holder: Option<(f64, f64)>,
    pub subgrad_bound: Option<f64>,
}

impl fmt::Debug for SmoothPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothPart")
            .field("has_gradient", &self.gradient.is_some())
            .field("lipschitz_grad", &self.lipschitz_grad)
            .field("holder", &self.holder)
            .field("subgrad_bound", &self.subgrad_bound)
            .finish()
    }
}

impl SmoothPart {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
            lipschitz_grad: None,
            holder: None,
            subgrad_bound: None,
        }
    }

    /// A part with no first-order oracle; solvers needing one report `Unsupported`.
    pub fn value_only(value: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            gradient: None,
            lipschitz_grad: None,
            holder: None,
            subgrad_bound: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz_grad = Some(l);
        self
    }

    pub fn with_holder(mut self, nu: f64, l_nu: f64) -> Self {
        self.holder = Some((nu, l_nu));
        self
    }

    pub fn with_subgrad_bound(mut self, m: f64) -> Self {
        self.subgrad_bound = Some(m);
        self
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let g = self
            .gradient
            .as_ref()
            .ok_or_else(|| Error::Unsupported("smooth part has no gradient oracle".into()))?;
        let out = g(x);
        check_dim(x.len(), out.len())?;
        if !linalg::all_finite(&out) {
            return Err(Error::Oracle("gradient".into()));
        }
        Ok(out)
    }

    pub fn zero() -> Self {
        Self::constant(0.0).with_lipschitz(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |x| Vector::zeros(x.len()))
            .with_lipschitz(0.0)
            .with_subgrad_bound(0.0)
    }

    /// `⟨c, x⟩`.
    pub fn linear(c: Vector) -> Self {
        let c2 = c.clone();
        let m = c.amax();
        Self::new(move |x| c.dot(x), move |_| c2.clone())
            .with_lipschitz(0.0)
            .with_subgrad_bound(m)
    }

    /// `½‖x − b‖²`.
    pub fn half_sq_dist(b: Vector) -> Self {
        let b2 = b.clone();
        Self::new(move |x| 0.5 * (x - &b).norm_squared(), move |x| x - &b2).with_lipschitz(1.0)
    }

    /// `½‖Ax − b‖²` with `L = ‖A‖²`.
    pub fn least_squares(a: Matrix, b: Vector) -> Self {
        let l = linalg::spectral_radius_gram(&a);
        let (a2, b2) = (a.clone(), b.clone());
        Self::new(
            move |x| 0.5 * (&a * x - &b).norm_squared(),
            move |x| a2.tr_mul(&(&a2 * x - &b2)),
        )
        .with_lipschitz(l)
    }

    /// `½xᵀQx − ⟨c, x⟩` for symmetric PSD `Q`.
    pub fn quadratic(q: Matrix, c: Vector) -> Self {
        let l = linalg::symmetric_max_eigenvalue(&q).max(0.0);
        let (q2, c2) = (q.clone(), c.clone());
        Self::new(
            move |x| 0.5 * x.dot(&(&q * x)) - c.dot(x),
            move |x| &q2 * x - &c2,
        )
        .with_lipschitz(l)
    }

    /// `max_i x_i`, subgradient `e_{argmax}`.
    pub fn max_coordinate() -> Self {
        Self::new(|x| x.max(), |x| linalg::basis(x.len(), linalg::argmax(x)))
            .with_subgrad_bound(1.0)
    }

    /// `‖x − c‖₁`, subgradient `sign(x − c)` with `sign(0) = 0`.
    pub fn l1_distance(c: Vector) -> Self {
        let n = c.len() as f64;
        let c2 = c.clone();
        Self::new(move |x| (x - &c).lp_norm(1), move |x| (x - &c2).map(sign0))
            .with_holder(0.0, 2.0 * n.sqrt())
            .with_subgrad_bound(n.sqrt())
    }

    /// `¼‖x‖⁴`.
    pub fn quartic_norm() -> Self {
        Self::new(
            |x| 0.25 * x.norm_squared().powi(2),
            |x| x * x.norm_squared(),
        )
    }

    /// Pointwise sum; constants are added when both are known.
    pub fn plus(self, other: SmoothPart) -> Self {
        let (v1, v2) = (self.value.clone(), other.value.clone());
        let gradient = match (self.gradient.clone(), other.gradient.clone()) {
            (Some(g1), Some(g2)) => Some(Arc::new(move |x: &Vector| g1(x) + g2(x)) as MapFn),
            _ => None,
        };
        let add = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a + b);
        Self {
            value: Arc::new(move |x| v1(x) + v2(x)),
            gradient,
            lipschitz_grad: add(self.lipschitz_grad, other.lipschitz_grad),
            holder: None,
            subgrad_bound: add(self.subgrad_bound, other.subgrad_bound),
        }
    }
}

pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonsmoothKind {
    Zero,
    L1 { weight: f64 },
    Indicator(FeasibleSet),
    Separable,
    General,
}

/// The prox-friendly part `r` (or `g` in split problems).
#[derive(Clone)]
pub struct NonsmoothPart {
    value: ValueFn,
    prox: Option<ProxFn>,
    subgradient: Option<MapFn>,
    conjugate_prox: Option<ProxFn>,
    conjugate_value: Option<ValueFn>,
    pub strong_convexity: f64,
    /// Lipschitz constant of the function itself.
    pub lipschitz: Option<f64>,
    pub kind: NonsmoothKind,
}

impl fmt::Debug for NonsmoothPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonsmoothPart")
            .field("kind", &self.kind)
            .field("has_prox", &self.prox.is_some())
            .field("has_conjugate_prox", &self.conjugate_prox.is_some())
            .field("strong_convexity", &self.strong_convexity)
            .finish()
    }
}

impl NonsmoothPart {
    pub fn custom(value: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            prox: None,
            subgradient: None,
            conjugate_prox: None,
            conjugate_value: None,
            strong_convexity: 0.0,
            lipschitz: None,
            kind: NonsmoothKind::General,
        }
    }

    pub fn with_prox(
        mut self,
        prox: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.prox = Some(Arc::new(prox));
        self
    }

    pub fn with_subgradient(
        mut self,
        s: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.subgradient = Some(Arc::new(s));
        self
    }

    /// Conjugate pieces: `(u, γ) ↦ prox_{γφ*}(u)` and `φ*`.
    pub fn with_conjugate(
        mut self,
        prox: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.conjugate_prox = Some(Arc::new(prox));
        self.conjugate_value = Some(Arc::new(value));
        self
    }

    pub fn with_kind(mut self, kind: NonsmoothKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn zero() -> Self {
        Self::custom(|_| 0.0)
            .with_prox(|x, _| x.clone())
            .with_subgradient(|x| Vector::zeros(x.len()))
            .with_lipschitz(0.0)
            .with_kind(NonsmoothKind::Zero)
    }

    /// `w‖x‖₁`; its conjugate is the indicator of the ℓ∞-ball of radius `w`.
    pub fn l1(weight: f64) -> Self {
        Self::custom(move |x| weight * x.lp_norm(1))
            .with_prox(move |x, g| soft_threshold_unchecked(x, g * weight))
            .with_subgradient(move |x| x.map(|v| weight * sign0(v)))
            .with_conjugate(
                move |u, _| u.map(|v| v.clamp(-weight, weight)),
                move |y| {
                    if y.amax() <= weight * (1.0 + 1e-12) + 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                },
            )
            .with_kind(NonsmoothKind::L1 { weight })
    }

    pub fn indicator(set: FeasibleSet) -> Self {
        let (s1, s2) = (set.clone(), set.clone());
        Self::custom(move |x| if s1.contains(x) { 0.0 } else { f64::INFINITY })
            .with_prox(move |x, _| s2.project(x).unwrap_or_else(|_| x.clone()))
            .with_subgradient(|x| Vector::zeros(x.len()))
            .with_kind(NonsmoothKind::Indicator(set))
    }

    /// `‖z − b‖₁` with conjugate `⟨b, y⟩ + δ(‖y‖∞ ≤ 1)`.
    pub fn l1_fit(b: Vector) -> Self {
        let m = b.len() as f64;
        let (b1, b2, b3, b4) = (b.clone(), b.clone(), b.clone(), b.clone());
        Self::custom(move |z| (z - &b1).lp_norm(1))
            .with_prox(move |v, g| &b2 + soft_threshold_unchecked(&(v - &b2), g))
            .with_subgradient(move |z| (z - &b3).map(sign0))
            .with_conjugate(
                move |u, g| (u - &b4 * g).map(|v| v.clamp(-1.0, 1.0)),
                move |y| {
                    if y.amax() <= 1.0 + 1e-12 {
                        b.dot(y)
                    } else {
                        f64::INFINITY
                    }
                },
            )
            .with_lipschitz(m.sqrt())
            .with_kind(NonsmoothKind::Separable)
    }

    /// `½‖z − b‖²` with conjugate `½‖y‖² + ⟨b, y⟩`.
    pub fn half_sq_dist(b: Vector) -> Self {
        let (b1, b2, b3, b4) = (b.clone(), b.clone(), b.clone(), b.clone());
        Self::custom(move |z| 0.5 * (z - &b1).norm_squared())
            .with_prox(move |v, g| (v + &b2 * g) / (1.0 + g))
            .with_subgradient(move |z| z - &b3)
            .with_conjugate(
                move |u, g| (u - &b4 * g) / (1.0 + g),
                move |y| 0.5 * y.norm_squared() + b.dot(y),
            )
            .with_kind(NonsmoothKind::Separable)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn has_prox(&self) -> bool {
        self.prox.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonsmoothKind::Zero
    }

    pub fn prox(&self, x: &Vector, gamma: f64) -> Result<Vector> {
        let p = self
            .prox
            .as_ref()
            .ok_or_else(|| Error::Unsupported("nonsmooth part has no prox oracle".into()))?;
        Ok(p(x, gamma))
    }

    pub fn subgradient(&self, x: &Vector) -> Result<Vector> {
        let s = self
            .subgradient
            .as_ref()
            .ok_or_else(|| Error::Unsupported("nonsmooth part has no subgradient oracle".into()))?;
        Ok(s(x))
    }

    pub fn has_conjugate_prox(&self) -> bool {
        self.conjugate_prox.is_some()
    }

    pub fn conjugate_prox(&self, u: &Vector, gamma: f64) -> Result<Vector> {
        let p = self
            .conjugate_prox
            .as_ref()
            .ok_or_else(|| Error::Unsupported("no conjugate prox available".into()))?;
        Ok(p(u, gamma))
    }

    pub fn conjugate_value(&self, y: &Vector) -> Result<f64> {
        let c = self
            .conjugate_value
            .as_ref()
            .ok_or_else(|| Error::Unsupported("no conjugate value available".into()))?;
        Ok(c(y))
    }
}

fn soft_threshold_unchecked(x: &Vector, gamma: f64) -> Vector {
    soft_threshold(x, gamma.max(0.0)).expect("nonnegative threshold")
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetKind {
    WholeSpace,
    Simplex,
    Box {
        lower: Vector,
        upper: Vector,
    },
    L1Ball {
        radius: f64,
    },
    L2Ball {
        radius: f64,
    },
    /// Symmetric PSD matrices with trace at most one, stored column-major.
    Spectrahedron {
        order: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    dim: usize,
    pub kind: SetKind,
}

impl FeasibleSet {
    pub fn whole_space(n: usize) -> Self {
        Self {
            dim: n,
            kind: SetKind::WholeSpace,
        }
    }

    pub fn simplex(n: usize) -> Self {
        Self {
            dim: n,
            kind: SetKind::Simplex,
        }
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(upper.iter()).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument(
                "box needs lower < upper in every coordinate".into(),
            ));
        }
        Ok(Self {
            dim: lower.len(),
            kind: SetKind::Box { lower, upper },
        })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Vector::from_element(n, lo), Vector::from_element(n, hi))
    }

    pub fn l1_ball(n: usize, radius: f64) -> Self {
        Self {
            dim: n,
            kind: SetKind::L1Ball { radius },
        }
    }

    pub fn l2_ball(n: usize, radius: f64) -> Self {
        Self {
            dim: n,
            kind: SetKind::L2Ball { radius },
        }
    }

    pub fn spectrahedron(order: usize) -> Self {
        Self {
            dim: order * order,
            kind: SetKind::Spectrahedron { order },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, SetKind::WholeSpace)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.len() != self.dim || !linalg::all_finite(x) {
            return false;
        }
        let tol = FEASIBILITY_TOL;
        match &self.kind {
            SetKind::WholeSpace => true,
            SetKind::Simplex => x.iter().all(|&v| v >= -tol) && (x.sum() - 1.0).abs() <= tol,
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (a, b))| *v >= a - tol && *v <= b + tol),
            SetKind::L1Ball { radius } => x.lp_norm(1) <= radius + tol,
            SetKind::L2Ball { radius } => x.norm() <= radius + tol,
            SetKind::Spectrahedron { order } => {
                let m = Matrix::from_column_slice(*order, *order, x.as_slice());
                linalg::is_symmetric(&m, 1e-9)
                    && m.trace() <= 1.0 + tol
                    && linalg::symmetric_min_eigenvalue(&m) >= -tol
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.kind {
            SetKind::WholeSpace => x.clone(),
            SetKind::Simplex => project_simplex(x),
            SetKind::Box { lower, upper } => Vector::from_iterator(
                x.len(),
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (a, b))| v.clamp(*a, *b)),
            ),
            SetKind::L1Ball { radius } => {
                if x.lp_norm(1) <= *radius {
                    x.clone()
                } else {
                    let mags = project_simplex(&(x.abs() / *radius)) * *radius;
                    x.zip_map(&mags, |v, m| sign0(v) * m)
                }
            }
            SetKind::L2Ball { radius } => {
                let n = x.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    x * (*radius / n)
                }
            }
            SetKind::Spectrahedron { order } => {
                let m = Matrix::from_column_slice(*order, *order, x.as_slice());
                let sym = (&m + m.transpose()) * 0.5;
                let eig = nalgebra::SymmetricEigen::new(sym);
                let clipped = eig.eigenvalues.map(|l| l.max(0.0));
                let lam = if clipped.sum() <= 1.0 {
                    clipped
                } else {
                    project_simplex(&eig.eigenvalues)
                };
                let q = &eig.eigenvectors;
                let p = q * Matrix::from_diagonal(&lam) * q.transpose();
                Vector::from_column_slice(p.as_slice())
            }
        })
    }

    /// `sup ‖x − u‖²` over the set.
    pub fn diameter_sq(&self) -> Option<f64> {
        match &self.kind {
            SetKind::WholeSpace => None,
            SetKind::Simplex => Some(if self.dim > 1 { 2.0 } else { 0.0 }),
            SetKind::Box { lower, upper } => Some((upper - lower).norm_squared()),
            SetKind::L1Ball { radius } | SetKind::L2Ball { radius } => Some(4.0 * radius * radius),
            SetKind::Spectrahedron { .. } => Some(2.0),
        }
    }

    /// A canonical feasible point: origin, barycenter, or box midpoint.
    pub fn default_point(&self) -> Vector {
        match &self.kind {
            SetKind::Simplex => Vector::from_element(self.dim, 1.0 / self.dim as f64),
            SetKind::Box { lower, upper } => (lower + upper) * 0.5,
            SetKind::Spectrahedron { order } => {
                let m = Matrix::identity(*order, *order) / *order as f64;
                Vector::from_column_slice(m.as_slice())
            }
            _ => Vector::zeros(self.dim),
        }
    }

    /// Random point of the set; Gaussian for the whole space.
    pub fn sample(&self, rng: &mut SeededRng) -> Vector {
        let n = self.dim;
        match &self.kind {
            SetKind::WholeSpace => rng.normal_vector(n),
            SetKind::Simplex => rng.simplex_point(n),
            SetKind::Box { lower, upper } => Vector::from_iterator(
                n,
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(a, b)| rng.uniform_in(*a, *b)),
            ),
            SetKind::L1Ball { radius } => {
                let w = rng.simplex_point(n);
                let scale = radius * rng.uniform();
                Vector::from_iterator(
                    n,
                    w.iter().map(|v| {
                        let s = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                        s * v * scale
                    }),
                )
            }
            SetKind::L2Ball { radius } => {
                let d = rng.normal_vector(n).normalize();
                d * (radius * rng.uniform().powf(1.0 / n as f64))
            }
            SetKind::Spectrahedron { order } => {
                let v = rng.normal_matrix(*order, *order);
                let m = &v * v.transpose();
                let tr = m.trace();
                let m = m * (rng.uniform().max(1e-3) / tr);
                Vector::from_column_slice(m.as_slice())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptimum {
    pub x: Vector,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct CompositeProblem {
    pub f: SmoothPart,
    pub r: NonsmoothPart,
    pub set: FeasibleSet,
    start: Vector,
    pub reference: Option<ReferenceOptimum>,
}

impl CompositeProblem {
    /// Uses the set's canonical point as the designated start.
    pub fn new(f: SmoothPart, r: NonsmoothPart, set: FeasibleSet) -> Result<Self> {
        let start = set.default_point();
        Self {
            f,
            r,
            set,
            start: start.clone(),
            reference: None,
        }
        .with_start(start)
    }

    pub fn with_start(mut self, x0: Vector) -> Result<Self> {
        check_dim(self.set.dim(), x0.len())?;
        if !self.set.contains(&x0) || !self.r.value(&x0).is_finite() {
            return Err(Error::InvalidArgument(
                "start point is not in dom r ∩ X".into(),
            ));
        }
        self.start = x0;
        Ok(self)
    }

    pub fn with_reference(mut self, x: Vector, value: f64) -> Self {
        self.reference = Some(ReferenceOptimum { x, value });
        self
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn psi_min(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| r.value)
    }

    pub fn objective(&self, x: &Vector) -> Result<f64> {
        evaluate_objective(self, x)
    }
}

/// `f(x) + r(x)`, or `+∞` outside `X ∩ dom r`.
pub fn evaluate_objective(problem: &CompositeProblem, x: &Vector) -> Result<f64> {
    check_dim(problem.dim(), x.len())?;
    if !problem.set.contains(x) {
        return Ok(f64::INFINITY);
    }
    let r = problem.r.value(x);
    if r == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let v = problem.f.value(x) + r;
    if v.is_nan() {
        return Err(Error::Oracle("objective value is NaN".into()));
    }
    Ok(v)
}

/// Max over coordinates of `|∇f_i − fd_i| / (1 + |∇f_i|)` with central differences.
pub fn check_gradient(problem: &CompositeProblem, x: &Vector, h_fd: f64) -> Result<f64> {
    if !(h_fd > 1e-8 && h_fd < 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {h_fd} outside (1e-8, 1e-2)"
        )));
    }
    check_dim(problem.dim(), x.len())?;
    let g = problem.f.gradient(x)?;
    let mut worst: f64 = 0.0;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h_fd;
        let up = problem.f.value(&probe);
        probe[i] = x[i] - h_fd;
        let down = problem.f.value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h_fd);
        if !fd.is_finite() {
            return Err(Error::Oracle("value not finite near x".into()));
        }
        worst = worst.max((g[i] - fd).abs() / (1.0 + g[i].abs()));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub e: f64,
    pub witness: Vector,
    pub gamma_term: f64,
}

/// `e(x) = r(x) − r(u*) + ⟨∇f(x), x − u*⟩` with `u*` from the oracle.
pub fn merit_gap(
    problem: &CompositeProblem,
    oracle: &GeneralizedLinearOracle,
    x: &Vector,
) -> Result<GapReport> {
    if !problem.set.is_bounded() {
        return Err(Error::UnsupportedDomain(
            "merit gap needs a bounded set".into(),
        ));
    }
    let g = problem.f.gradient(x)?;
    let u = oracle.answer(&g)?;
    let gamma_term = problem.r.value(x) - problem.r.value(&u) + g.dot(&(x - &u));
    Ok(GapReport {
        e: gamma_term.max(0.0),
        witness: u,
        gamma_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn objective_examples() {
        let p = CompositeProblem::new(
            SmoothPart::half_sq_dist(Vector::zeros(2)),
            NonsmoothPart::zero(),
            FeasibleSet::whole_space(2),
        )
        .unwrap();
        assert_eq!(evaluate_objective(&p, &v(&[1.0, 1.0])).unwrap(), 1.0);

        let s = FeasibleSet::simplex(2);
        let p = CompositeProblem::new(SmoothPart::zero(), NonsmoothPart::indicator(s.clone()), s)
            .unwrap();
        assert_eq!(
            evaluate_objective(&p, &v(&[2.0, 0.0])).unwrap(),
            f64::INFINITY
        );

        let p = CompositeProblem::new(
            SmoothPart::half_sq_dist(v(&[2.0, 0.0])),
            NonsmoothPart::l1(1.0),
            FeasibleSet::whole_space(2),
        )
        .unwrap();
        assert_eq!(evaluate_objective(&p, &v(&[1.0, 0.0])).unwrap(), 1.5);
        assert!(matches!(
            evaluate_objective(&p, &v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_check_flags_planted_fault() {
        let good = CompositeProblem::new(
            SmoothPart::half_sq_dist(Vector::zeros(3)),
            NonsmoothPart::zero(),
            FeasibleSet::whole_space(3),
        )
        .unwrap();
        let x = v(&[0.3, -1.2, 2.0]);
        assert!(check_gradient(&good, &x, 1e-5).unwrap() <= 1e-7);

        let bad = CompositeProblem::new(
            SmoothPart::new(|x| 0.5 * x.norm_squared(), |x| x * 2.0),
            NonsmoothPart::zero(),
            FeasibleSet::whole_space(3),
        )
        .unwrap();
        assert!(check_gradient(&bad, &x, 1e-5).unwrap() >= 0.3);
        assert!(check_gradient(&bad, &x, 0.5).is_err());
    }

    #[test]
    fn projections_are_feasible_and_nearest() {
        let mut rng = SeededRng::new(5);
        let sets = vec![
            FeasibleSet::simplex(4),
            FeasibleSet::cube(4, -1.0, 2.0).unwrap(),
            FeasibleSet::l1_ball(4, 1.5),
            FeasibleSet::l2_ball(4, 0.7),
            FeasibleSet::spectrahedron(2),
        ];
        for set in sets {
            for _ in 0..50 {
                let x = rng.normal_vector(set.dim()) * 2.0;
                let p = set.project(&x).unwrap();
                assert!(set.contains(&p), "{:?}", set.kind);
                for _ in 0..20 {
                    let u = set.sample(&mut rng);
                    assert!(set.contains(&u));
                    assert!((&p - &x).norm() <= (&u - &x).norm() + 1e-9);
                    let d = set.diameter_sq().unwrap();
                    let w = set.sample(&mut rng);
                    assert!((&u - &w).norm_squared() <= d + 1e-12);
                }
            }
        }
    }

    #[test]
    fn start_must_be_feasible() {
        let s = FeasibleSet::simplex(2);
        let p = CompositeProblem::new(SmoothPart::zero(), NonsmoothPart::zero(), s).unwrap();
        assert!(p.with_start(v(&[0.0, 0.5])).is_err());
    }

    #[test]
    fn prox_minimizes_on_grid() {
        let parts = [
            NonsmoothPart::l1(0.7),
            NonsmoothPart::half_sq_dist(v(&[0.4])),
            NonsmoothPart::l1_fit(v(&[-0.3])),
        ];
        for r in parts {
            for &x in &[-2.0, -0.2, 0.5, 1.7] {
                let gamma = 0.8;
                let p = r.prox(&v(&[x]), gamma).unwrap()[0];
                let obj = |u: f64| gamma * r.value(&v(&[u])) + 0.5 * (u - x) * (u - x);
                let mut best = f64::INFINITY;
                let mut arg = 0.0;
                for i in 0..=80_000 {
                    let u = -4.0 + i as f64 * 1e-4;
                    if obj(u) < best {
                        best = obj(u);
                        arg = u;
                    }
                }
                assert!((p - arg).abs() <= 1e-3, "{r:?} x={x}: {p} vs {arg}");
            }
        }
    }

    #[test]
    fn nonsmooth_parts_are_midpoint_convex() {
        let mut rng = SeededRng::new(11);
        let b = rng.normal_vector(3);
        let parts = [
            NonsmoothPart::l1(2.0),
            NonsmoothPart::l1_fit(b.clone()),
            NonsmoothPart::half_sq_dist(b),
        ];
        for r in parts {
            for _ in 0..200 {
                let x = rng.normal_vector(3);
                let y = rng.normal_vector(3);
                let mid = (&x + &y) * 0.5;
                assert!(r.value(&mid) <= 0.5 * r.value(&x) + 0.5 * r.value(&y) + 1e-12);
            }
        }
    }
}
