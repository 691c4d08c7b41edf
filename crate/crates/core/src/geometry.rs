//! Distance-generating functions, Bregman divergences and prox-mappings.

use std::fmt;
use std::sync::Arc;

use crate::error::check_dim;
use crate::linalg;
use crate::problem::{FeasibleSet, MapFn, NonsmoothKind, NonsmoothPart, SetKind, ValueFn};
use crate::rng::SeededRng;
use crate::{Error, Result, Vector};

/// Floor applied to entropy coordinates before logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum DgfKind {
    Euclidean,
    /// Negative entropy on the simplex, shifted by `ln n` so its minimum is zero.
    EntropySimplex,
    FermiDirac {
        lower: Vector,
        upper: Vector,
    },
    Custom,
}

/// A distance-generating function `h` with its constants.
#[derive(Clone)]
pub struct DistanceGenerator {
    pub kind: DgfKind,
    value: ValueFn,
    gradient: MapFn,
    gradient_conjugate: Option<MapFn>,
    pub modulus: f64,
    /// `max_X h − min_X h`.
    pub diameter: Option<f64>,
    pub symmetry: Option<f64>,
    pub symmetry_is_estimate: bool,
    pub rel_smooth_const: Option<f64>,
}

impl fmt::Debug for DistanceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceGenerator")
            .field("kind", &self.kind)
            .field("modulus", &self.modulus)
            .field("diameter", &self.diameter)
            .field("symmetry", &self.symmetry)
            .field("rel_smooth_const", &self.rel_smooth_const)
            .finish()
    }
}

fn xlogx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

impl DistanceGenerator {
    pub fn euclidean() -> Self {
        Self {
            kind: DgfKind::Euclidean,
            value: Arc::new(|x| 0.5 * x.norm_squared()),
            gradient: Arc::new(|x| x.clone()),
            gradient_conjugate: Some(Arc::new(|v| v.clone())),
            modulus: 1.0,
            diameter: None,
            symmetry: Some(1.0),
            symmetry_is_estimate: false,
            rel_smooth_const: None,
        }
    }

    /// Euclidean `h` carrying `max_X h − min_X h` for `set`.
    pub fn euclidean_on(set: &FeasibleSet) -> Self {
        let mut h = Self::euclidean();
        let n = set.dim() as f64;
        h.diameter = match &set.kind {
            SetKind::WholeSpace => None,
            SetKind::Simplex => Some(0.5 * (1.0 - 1.0 / n)),
            SetKind::Box { lower, upper } => Some(
                0.5 * lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(a, b)| {
                        let far = a.abs().max(b.abs());
                        let near = if *a > 0.0 {
                            *a
                        } else if *b < 0.0 {
                            -*b
                        } else {
                            0.0
                        };
                        far * far - near * near
                    })
                    .sum::<f64>(),
            ),
            SetKind::L1Ball { radius } | SetKind::L2Ball { radius } => Some(0.5 * radius * radius),
            SetKind::Spectrahedron { .. } => Some(0.5),
        };
        h
    }

    pub fn entropy_simplex(n: usize) -> Self {
        let shift = (n as f64).ln();
        Self {
            kind: DgfKind::EntropySimplex,
            value: Arc::new(move |x| x.iter().map(|&v| xlogx(v)).sum::<f64>() + shift),
            gradient: Arc::new(|x| x.map(|v| v.max(ENTROPY_FLOOR).ln() + 1.0)),
            gradient_conjugate: None,
            modulus: 1.0,
            diameter: Some(shift),
            symmetry: None,
            symmetry_is_estimate: false,
            rel_smooth_const: None,
        }
    }

    pub fn fermi_dirac(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        let width = &upper - &lower;
        if width.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidArgument(
                "fermi-dirac box needs lower < upper".into(),
            ));
        }
        let (a1, b1, a2, b2) = (lower.clone(), upper.clone(), lower.clone(), upper.clone());
        let modulus = 4.0 / width.max();
        let diameter = width.sum() * std::f64::consts::LN_2;
        Ok(Self {
            kind: DgfKind::FermiDirac { lower, upper },
            value: Arc::new(move |x| {
                (0..x.len())
                    .map(|i| xlogx(x[i] - a1[i]) + xlogx(b1[i] - x[i]))
                    .sum()
            }),
            gradient: Arc::new(move |x| {
                Vector::from_iterator(
                    x.len(),
                    (0..x.len()).map(|i| ((x[i] - a2[i]) / (b2[i] - x[i])).ln()),
                )
            }),
            gradient_conjugate: None,
            modulus,
            diameter: Some(diameter),
            symmetry: None,
            symmetry_is_estimate: false,
            rel_smooth_const: None,
        })
    }

    /// A Legendre function given by value, gradient and optionally the inverse of its gradient.
    pub fn custom(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        modulus: f64,
    ) -> Self {
        Self {
            kind: DgfKind::Custom,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            gradient_conjugate: None,
            modulus,
            diameter: None,
            symmetry: None,
            symmetry_is_estimate: false,
            rel_smooth_const: None,
        }
    }

    pub fn with_gradient_conjugate(
        mut self,
        inv: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.gradient_conjugate = Some(Arc::new(inv));
        self
    }

    /// `h(x) = ¼‖x‖⁴ + ½‖x‖²` on the whole space.
    pub fn quartic() -> Self {
        Self::custom(
            |x| {
                let s = x.norm_squared();
                0.25 * s * s + 0.5 * s
            },
            |x| x * (x.norm_squared() + 1.0),
            1.0,
        )
        .with_gradient_conjugate(|v| {
            let s = v.norm();
            if s == 0.0 {
                return v.clone();
            }
            let t = cubic_root_t3_plus_t(s);
            v * (t / s)
        })
    }

    pub fn with_relative_smoothness(mut self, l: f64) -> Self {
        self.rel_smooth_const = Some(l);
        self
    }

    pub fn with_symmetry(mut self, nu: f64) -> Self {
        self.symmetry = Some(nu);
        self.symmetry_is_estimate = false;
        self
    }

    pub fn with_diameter(mut self, d: f64) -> Self {
        self.diameter = Some(d);
        self
    }

    /// Attaches the sampled symmetry coefficient (exact `1` for the euclidean kind).
    pub fn with_estimated_symmetry(mut self, set: &FeasibleSet, seed: u64) -> Result<Self> {
        if self.kind == DgfKind::Euclidean {
            return Ok(self.with_symmetry(1.0));
        }
        self.symmetry = Some(estimate_symmetry(&self, set, 10_000, seed)?);
        self.symmetry_is_estimate = true;
        Ok(self)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    pub fn gradient_conjugate(&self, v: &Vector) -> Option<Vector> {
        self.gradient_conjugate.as_ref().map(|g| g(v))
    }

    /// Primal norm the modulus refers to.
    pub fn norm(&self, v: &Vector) -> f64 {
        match self.kind {
            DgfKind::EntropySimplex => v.lp_norm(1),
            _ => v.norm(),
        }
    }

    pub fn dual_norm(&self, v: &Vector) -> f64 {
        match self.kind {
            DgfKind::EntropySimplex => v.amax(),
            _ => v.norm(),
        }
    }

    /// `h_p(x) = R² h((x − center)/R)`; euclidean divergences are unchanged by the recentering.
    pub fn recentered(&self, center: &Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(
                "recentering radius must be positive".into(),
            ));
        }
        match self.kind {
            DgfKind::Euclidean => Ok(self.clone()),
            DgfKind::Custom => {
                let inv = self.gradient_conjugate.clone().ok_or_else(|| {
                    Error::Unsupported("recentering needs the inverse gradient of h".into())
                })?;
                let (v, g) = (self.value.clone(), self.gradient.clone());
                let (c1, c2, c3) = (center.clone(), center.clone(), center.clone());
                let r = radius;
                let mut out = Self::custom(
                    move |x| r * r * v(&((x - &c1) / r)),
                    move |x| g(&((x - &c2) / r)) * r,
                    self.modulus,
                )
                .with_gradient_conjugate(move |y| &c3 + inv(&(y / r)) * r);
                out.symmetry = self.symmetry;
                out.symmetry_is_estimate = self.symmetry_is_estimate;
                Ok(out)
            }
            _ => Err(Error::Unsupported(format!(
                "recentering a {:?} generator",
                self.kind
            ))),
        }
    }
}

/// Positive real root of `t³ + t = s`.
fn cubic_root_t3_plus_t(s: f64) -> f64 {
    let q = (s * s / 4.0 + 1.0 / 27.0).sqrt();
    let mut t = (s / 2.0 + q).cbrt() + (s / 2.0 - q).cbrt();
    for _ in 0..3 {
        let f = t * t * t + t - s;
        t -= f / (3.0 * t * t + 1.0);
    }
    t.max(0.0)
}

/// `D_h(u, x) = h(u) − h(x) − ⟨∇h(x), u − x⟩`.
pub fn bregman_divergence(h: &DistanceGenerator, u: &Vector, x: &Vector) -> Result<f64> {
    check_dim(u.len(), x.len())?;
    match &h.kind {
        DgfKind::Euclidean => Ok(0.5 * (u - x).norm_squared()),
        DgfKind::EntropySimplex => {
            if x.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Domain(
                    "entropy divergence needs x in the open orthant".into(),
                ));
            }
            if u.iter().any(|&v| v < 0.0) {
                return Err(Error::Domain("entropy divergence needs u ≥ 0".into()));
            }
            Ok(u.iter()
                .zip(x.iter())
                .map(|(&ui, &xi)| if ui > 0.0 { ui * (ui / xi).ln() } else { 0.0 } - ui + xi)
                .sum::<f64>()
                .max(0.0))
        }
        DgfKind::FermiDirac { lower, upper } => {
            check_dim(lower.len(), x.len())?;
            let mut total = 0.0;
            for i in 0..x.len() {
                let (a, b) = (lower[i], upper[i]);
                if !(x[i] > a && x[i] < b) {
                    return Err(Error::Domain(
                        "fermi-dirac divergence needs x in the open box".into(),
                    ));
                }
                if u[i] < a || u[i] > b {
                    return Err(Error::Domain(
                        "fermi-dirac divergence needs u in the box".into(),
                    ));
                }
                let lo = if u[i] > a {
                    (u[i] - a) * ((u[i] - a) / (x[i] - a)).ln()
                } else {
                    0.0
                };
                let hi = if u[i] < b {
                    (b - u[i]) * ((b - u[i]) / (b - x[i])).ln()
                } else {
                    0.0
                };
                total += lo + hi;
            }
            Ok(total.max(0.0))
        }
        DgfKind::Custom => {
            let d = h.value(u) - h.value(x) - h.gradient(x).dot(&(u - x));
            if !d.is_finite() {
                return Err(Error::Domain("divergence is not finite".into()));
            }
            Ok(d.max(0.0))
        }
    }
}

/// `D(z,x) − D(z,y) − D(y,x) − ⟨∇h(x) − ∇h(y), y − z⟩`, zero for every Bregman divergence.
pub fn three_point_residual(
    h: &DistanceGenerator,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<f64> {
    let lhs =
        bregman_divergence(h, z, x)? - bregman_divergence(h, z, y)? - bregman_divergence(h, y, x)?;
    let rhs = (h.gradient(x) - h.gradient(y)).dot(&(y - z));
    Ok(lhs - rhs)
}

pub type ProxSolver = Arc<dyn Fn(&Vector, &Vector, f64) -> Vector + Send + Sync>;

/// `u ↦ argmin_X { w·r(u) + ⟨y, u − x⟩ + D_h(u, x) }`.
#[derive(Clone)]
pub struct ProxMapping {
    pub h: DistanceGenerator,
    pub r: NonsmoothPart,
    pub set: FeasibleSet,
    pub inexactness: f64,
    solver: Option<ProxSolver>,
}

impl fmt::Debug for ProxMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProxMapping")
            .field("h", &self.h)
            .field("r", &self.r)
            .field("set", &self.set)
            .field("inexactness", &self.inexactness)
            .field("custom_solver", &self.solver.is_some())
            .finish()
    }
}

enum Route {
    EuclideanProx,
    EuclideanProject,
    ClipSoft { weight: f64 },
    Entropic,
    FermiDirac,
    Mirror,
    Solver,
}

impl ProxMapping {
    pub fn new(h: DistanceGenerator, r: NonsmoothPart, set: FeasibleSet) -> Self {
        Self {
            h,
            r,
            set,
            inexactness: 0.0,
            solver: None,
        }
    }

    /// Fallback `(x, y, weight) ↦ u` for combinations without a closed form.
    pub fn with_solver(
        mut self,
        solver: impl Fn(&Vector, &Vector, f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.solver = Some(Arc::new(solver));
        self
    }

    pub fn with_inexactness(mut self, delta: f64) -> Self {
        self.inexactness = delta;
        self
    }

    fn r_is_trivial_on_set(&self) -> bool {
        match &self.r.kind {
            NonsmoothKind::Zero => true,
            NonsmoothKind::Indicator(s) => *s == self.set,
            _ => false,
        }
    }

    fn route(&self) -> Result<Route> {
        let trivial = self.r_is_trivial_on_set();
        let route = match (&self.h.kind, &self.set.kind) {
            (DgfKind::Euclidean, SetKind::WholeSpace) if self.r.has_prox() => {
                Some(Route::EuclideanProx)
            }
            (DgfKind::Euclidean, _) if trivial => Some(Route::EuclideanProject),
            (DgfKind::Euclidean, SetKind::Box { .. }) => match self.r.kind {
                NonsmoothKind::L1 { weight } => Some(Route::ClipSoft { weight }),
                _ => None,
            },
            (DgfKind::Euclidean, SetKind::Simplex)
                if matches!(self.r.kind, NonsmoothKind::L1 { .. }) =>
            {
                Some(Route::EuclideanProject)
            }
            (DgfKind::EntropySimplex, SetKind::Simplex)
                if trivial || matches!(self.r.kind, NonsmoothKind::L1 { .. }) =>
            {
                Some(Route::Entropic)
            }
            (DgfKind::FermiDirac { lower, upper }, SetKind::Box { lower: a, upper: b })
                if trivial && lower == a && upper == b =>
            {
                Some(Route::FermiDirac)
            }
            (DgfKind::Custom, SetKind::WholeSpace)
                if self.r.is_zero() && self.h.gradient_conjugate.is_some() =>
            {
                Some(Route::Mirror)
            }
            _ => None,
        };
        match route {
            Some(r) => Ok(r),
            None if self.solver.is_some() => Ok(Route::Solver),
            None => Err(Error::Unsupported(format!(
                "no closed-form prox-mapping for {:?} geometry, {:?} regularizer, {:?} set",
                self.h.kind, self.r.kind, self.set.kind
            ))),
        }
    }

    /// Reports whether `apply` can be evaluated for this combination.
    pub fn check_supported(&self) -> Result<()> {
        self.route().map(|_| ())
    }

    pub fn apply(&self, x: &Vector, y: &Vector, weight: f64) -> Result<Vector> {
        check_dim(self.set.dim(), x.len())?;
        check_dim(x.len(), y.len())?;
        let u = match self.route()? {
            Route::EuclideanProx => self.r.prox(&(x - y), weight)?,
            Route::EuclideanProject => self.set.project(&(x - y))?,
            Route::ClipSoft { weight: lam } => {
                let v = soft_threshold(&(x - y), weight * lam)?;
                self.set.project(&v)?
            }
            Route::Entropic => entropic_step(x, y),
            Route::FermiDirac => {
                let DgfKind::FermiDirac { lower, upper } = &self.h.kind else {
                    unreachable!()
                };
                Vector::from_iterator(
                    x.len(),
                    (0..x.len()).map(|i| {
                        let (a, b) = (lower[i], upper[i]);
                        let t = ((x[i] - a) / (b - x[i])).ln() - y[i];
                        a + (b - a) * sigmoid(t)
                    }),
                )
            }
            Route::Mirror => {
                let v = self.h.gradient(x) - y;
                self.h.gradient_conjugate(&v).expect("checked in route")
            }
            Route::Solver => (self.solver.as_ref().expect("checked in route"))(x, y, weight),
        };
        if !linalg::all_finite(&u) {
            return Err(Error::Oracle(
                "prox-mapping produced a non-finite point".into(),
            ));
        }
        Ok(u)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `u_i ∝ x_i e^{−y_i}`, computed in the log domain.
pub fn entropic_step(x: &Vector, y: &Vector) -> Vector {
    let logs = Vector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| x[i].max(ENTROPY_FLOOR).ln() - y[i]),
    );
    linalg::softmax(&logs).map(|v| v.max(ENTROPY_FLOOR))
}

pub fn prox_map(pm: &ProxMapping, x: &Vector, y: &Vector) -> Result<Vector> {
    pm.apply(x, y, 1.0)
}

pub fn soft_threshold(x: &Vector, gamma: f64) -> Result<Vector> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {gamma} must be nonnegative"
        )));
    }
    Ok(x.map(|v| v.signum() * (v.abs() - gamma).max(0.0)))
}

/// Euclidean projection onto the unit simplex by sorting.
pub fn project_simplex(v: &Vector) -> Vector {
    let n = v.len();
    if n == 0 {
        return v.clone();
    }
    let mut sorted: Vec<f64> = v.iter().cloned().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (j as f64 + 1.0);
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Value and gradient of `r_γ(x) = min_u r(u) + ‖u − x‖²/(2γ)`.
pub fn moreau_envelope(r: &NonsmoothPart, gamma: f64, x: &Vector) -> Result<(f64, Vector)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(
            "envelope parameter must be positive".into(),
        ));
    }
    let p = r.prox(x, gamma)?;
    let value = r.value(&p) + (&p - x).norm_squared() / (2.0 * gamma);
    Ok((value, (x - p) / gamma))
}

/// `‖c·prox_{g/c}(u/c) + prox_{c g*}(u) − u‖`.
pub fn moreau_identity_check(g: &NonsmoothPart, c: f64, u: &Vector) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    let primal = g.prox(&(u / c), 1.0 / c)? * c;
    let dual = g.conjugate_prox(u, c)?;
    Ok((primal + dual - u).norm())
}

pub(crate) fn interior_sample(
    h: &DistanceGenerator,
    set: &FeasibleSet,
    rng: &mut SeededRng,
) -> Vector {
    let mut x = set.sample(rng);
    match (&h.kind, &set.kind) {
        (DgfKind::EntropySimplex, _) => {
            let n = x.len();
            x = x * 0.999 + Vector::from_element(n, 0.001 / n as f64);
        }
        (DgfKind::FermiDirac { lower, upper }, _) => {
            let mid = (lower + upper) * 0.5;
            x = &mid + (x - &mid) * 0.999;
        }
        _ => {}
    }
    x
}

/// Sampled `min D_h(x,u)/D_h(u,x)` over random pairs of `set`.
pub fn estimate_symmetry(
    h: &DistanceGenerator,
    set: &FeasibleSet,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = SeededRng::new(seed);
    let mut nu: f64 = 1.0;
    for _ in 0..samples {
        let x = interior_sample(h, set, &mut rng);
        let u = interior_sample(h, set, &mut rng);
        let forward = bregman_divergence(h, &u, &x)?;
        let backward = bregman_divergence(h, &x, &u)?;
        if forward > 1e-14 {
            nu = nu.min(backward / forward);
        }
    }
    Ok(nu.clamp(0.0, 1.0))
}

/// Sampled `sup 2D_h(x + t(u − x), x)/t²` over `x, u ∈ set`, `t ∈ (0, 1]`.
pub fn estimate_curvature(
    h: &DistanceGenerator,
    set: &FeasibleSet,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = SeededRng::new(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let x = interior_sample(h, set, &mut rng);
        let u = interior_sample(h, set, &mut rng);
        let t = 1.0 - rng.uniform();
        let p = &x + (&u - &x) * t;
        best = best.max(2.0 * bregman_divergence(h, &p, &x)? / (t * t));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn generic_divergence(h: &DistanceGenerator, u: &Vector, x: &Vector) -> f64 {
        h.value(u) - h.value(x) - h.gradient(x).dot(&(u - x))
    }

    #[test]
    fn divergence_examples() {
        let e = DistanceGenerator::euclidean();
        assert_eq!(
            bregman_divergence(&e, &v(&[1.0, 1.0]), &v(&[0.0, 0.0])).unwrap(),
            1.0
        );
        let kl = DistanceGenerator::entropy_simplex(2);
        let (u, x) = (v(&[0.5, 0.5]), v(&[0.25, 0.75]));
        let d = bregman_divergence(&kl, &u, &x).unwrap();
        assert!((d - generic_divergence(&kl, &u, &x)).abs() < 1e-12);
        assert!((d - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
        for h in [e, kl] {
            assert_eq!(bregman_divergence(&h, &x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn boundary_points_are_rejected() {
        let kl = DistanceGenerator::entropy_simplex(2);
        assert!(matches!(
            bregman_divergence(&kl, &v(&[0.5, 0.5]), &v(&[1.0, 0.0])),
            Err(Error::Domain(_))
        ));
        let fd = DistanceGenerator::fermi_dirac(v(&[0.0]), v(&[1.0])).unwrap();
        assert!(bregman_divergence(&fd, &v(&[0.5]), &v(&[1.0])).is_err());
    }

    #[test]
    fn entropic_prox_example_and_zero_signal() {
        let pm = ProxMapping::new(
            DistanceGenerator::entropy_simplex(2),
            NonsmoothPart::zero(),
            FeasibleSet::simplex(2),
        );
        let u = prox_map(&pm, &v(&[0.5, 0.5]), &v(&[2f64.ln(), 0.0])).unwrap();
        assert!((u[0] - 1.0 / 3.0).abs() < 1e-12 && (u[1] - 2.0 / 3.0).abs() < 1e-12);
        let x = v(&[0.2, 0.8]);
        let same = prox_map(&pm, &x, &Vector::zeros(2)).unwrap();
        assert!((same - &x).amax() < 1e-15);
    }

    #[test]
    fn entropic_prox_matches_constrained_minimization() {
        // minimize ⟨y,u⟩ + KL(u,x) along the segment u = (t, 1−t)
        let (x, y) = (v(&[0.5, 0.5]), v(&[2f64.ln(), 0.0]));
        let kl = DistanceGenerator::entropy_simplex(2);
        let obj = |t: f64| {
            let u = v(&[t, 1.0 - t]);
            y.dot(&u) + bregman_divergence(&kl, &u, &x).unwrap()
        };
        let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if obj(m1) < obj(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        assert!((t - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn entropic_prox_sign_erratum() {
        // Reading the exponent as +y moves mass toward the coordinate with the larger
        // cost, which raises the linearized objective instead of lowering it.
        let (x, y) = (v(&[0.5, 0.5]), v(&[2f64.ln(), 0.0]));
        let wrong = linalg::softmax(&(x.map(f64::ln) + &y));
        let pm = ProxMapping::new(
            DistanceGenerator::entropy_simplex(2),
            NonsmoothPart::zero(),
            FeasibleSet::simplex(2),
        );
        let right = prox_map(&pm, &x, &y).unwrap();
        assert!((wrong[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(y.dot(&right) < y.dot(&x));
        assert!(y.dot(&wrong) > y.dot(&x));
    }

    #[test]
    fn entropic_prox_shift_invariant() {
        let pm = ProxMapping::new(
            DistanceGenerator::entropy_simplex(3),
            NonsmoothPart::zero(),
            FeasibleSet::simplex(3),
        );
        let x = v(&[0.2, 0.3, 0.5]);
        let y = v(&[0.4, -1.0, 2.0]);
        let a = prox_map(&pm, &x, &y).unwrap();
        let b = prox_map(&pm, &x, &y.add_scalar(17.0)).unwrap();
        assert!((a - b).amax() < 1e-14);
    }

    #[test]
    fn fermi_dirac_prox_example() {
        let h = DistanceGenerator::fermi_dirac(v(&[0.0]), v(&[1.0])).unwrap();
        let set = FeasibleSet::boxed(v(&[0.0]), v(&[1.0])).unwrap();
        let pm = ProxMapping::new(h.clone(), NonsmoothPart::zero(), set);
        let y = -(3f64.ln());
        let u = prox_map(&pm, &v(&[0.5]), &v(&[y])).unwrap()[0];
        assert!((u - 0.75).abs() < 1e-12);
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..100_000 {
            let t = i as f64 * 1e-5;
            let val = y * t + bregman_divergence(&h, &v(&[t]), &v(&[0.5])).unwrap();
            if val < best.0 {
                best = (val, t);
            }
        }
        assert!((best.1 - u).abs() < 1e-3);
    }

    #[test]
    fn quartic_mirror_step_inverts_gradient() {
        let h = DistanceGenerator::quartic();
        let x = v(&[0.3, -2.0]);
        let back = h.gradient_conjugate(&h.gradient(&x)).unwrap();
        assert!((back - &x).amax() < 1e-12);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(
            soft_threshold(&v(&[3.0, -0.5]), 1.0).unwrap(),
            v(&[2.0, 0.0])
        );
        assert_eq!(
            soft_threshold(&Vector::zeros(2), 1.0).unwrap(),
            Vector::zeros(2)
        );
        let x = v(&[0.3, -7.0]);
        assert_eq!(soft_threshold(&x, 0.0).unwrap(), x);
        assert!(soft_threshold(&x, -1.0).is_err());
    }

    #[test]
    fn simplex_projection_examples() {
        assert!((project_simplex(&v(&[0.3, 0.7])) - v(&[0.3, 0.7])).amax() < 1e-15);
        assert_eq!(project_simplex(&v(&[2.0, 0.0])), v(&[1.0, 0.0]));
        let third = project_simplex(&v(&[0.5, 0.5, 0.5]));
        assert!((third - Vector::from_element(3, 1.0 / 3.0)).amax() < 1e-15);
    }

    #[test]
    fn moreau_envelope_examples() {
        let r = NonsmoothPart::l1(1.0);
        assert_eq!(
            moreau_envelope(&r, 1.0, &v(&[0.0])).unwrap(),
            (0.0, v(&[0.0]))
        );
        let (val, g) = moreau_envelope(&r, 1.0, &v(&[3.0])).unwrap();
        assert!((val - 2.5).abs() < 1e-12 && (g[0] - 1.0).abs() < 1e-12);
        let (val, g) = moreau_envelope(&r, 2.0, &v(&[1.0])).unwrap();
        assert!((val - 0.25).abs() < 1e-12 && (g[0] - 0.5).abs() < 1e-12);
        assert!(moreau_envelope(&NonsmoothPart::custom(|_| 0.0), 1.0, &v(&[1.0])).is_err());
    }

    #[test]
    fn moreau_identity_examples() {
        let g = NonsmoothPart::l1(1.0);
        assert!(moreau_identity_check(&g, 1.0, &v(&[3.0, -0.5])).unwrap() <= 1e-12);
        assert_eq!(
            moreau_identity_check(&g, 2.0, &Vector::zeros(2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn unsupported_combination_is_reported() {
        let pm = ProxMapping::new(
            DistanceGenerator::entropy_simplex(3),
            NonsmoothPart::custom(|x| x.norm()),
            FeasibleSet::simplex(3),
        );
        assert!(matches!(pm.check_supported(), Err(Error::Unsupported(_))));
        let pm = pm.with_solver(|x, _, _| x.clone());
        assert!(pm.check_supported().is_ok());
    }

    #[test]
    fn euclidean_symmetry_is_exact() {
        let h = DistanceGenerator::euclidean()
            .with_estimated_symmetry(&FeasibleSet::whole_space(2), 1)
            .unwrap();
        assert_eq!(h.symmetry, Some(1.0));
        assert!(!h.symmetry_is_estimate);
        let kl = DistanceGenerator::entropy_simplex(3)
            .with_estimated_symmetry(&FeasibleSet::simplex(3), 1)
            .unwrap();
        let nu = kl.symmetry.unwrap();
        assert!(nu > 0.0 && nu < 1.0);
    }
}
