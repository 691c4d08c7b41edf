use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::geometry::{soft_threshold, DistanceGenerator};
use crate::linalg;
use crate::problem::{CompositeProblem, FeasibleSet, NonsmoothPart, SmoothPart};
use crate::rng::{SeededRng, GENERATOR_NAME};
use crate::splitting::SplitProblem;
use crate::{Error, Matrix, Result, Vector};

const REFERENCE_TOL: f64 = 1e-12;
const REFERENCE_MAX_ITER: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemTag {
    Lasso,
    UniformFit,
    L1Fit,
    SimplexQp,
    StronglyConvexQp,
    NonsmoothL1,
}

impl ProblemTag {
    pub const ALL: [ProblemTag; 6] = [
        Self::Lasso,
        Self::UniformFit,
        Self::L1Fit,
        Self::SimplexQp,
        Self::StronglyConvexQp,
        Self::NonsmoothL1,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::UniformFit => "uniform-fit",
            Self::L1Fit => "l1-fit",
            Self::SimplexQp => "simplex-qp",
            Self::StronglyConvexQp => "strongly-convex-qp",
            Self::NonsmoothL1 => "nonsmooth-l1",
        }
    }
}

impl fmt::Display for ProblemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProblemTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.tag() == s).ok_or_else(|| {
            let valid: Vec<_> = Self::ALL.iter().map(|t| t.tag()).collect();
            Error::InvalidArgument(format!(
                "unknown problem '{s}'; valid problems: {}",
                valid.join(", ")
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub problem: ProblemTag,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub seed: u64,
    pub mu: f64,
}

impl InstanceSpec {
    pub fn new(problem: ProblemTag, n: usize, m: usize, seed: u64) -> Self {
        Self {
            problem,
            n,
            m,
            lambda: 0.1,
            seed,
            mu: 1.0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

/// Constants recorded alongside a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceMeta {
    pub generator: &'static str,
    /// Gradient Lipschitz constant in the ℓ₂ norm.
    pub lipschitz: Option<f64>,
    /// Gradient Lipschitz constant in the ℓ₁ norm (`max |Q_ij|`), for entropy geometry.
    pub lipschitz_l1: Option<f64>,
    pub mu: Option<f64>,
    pub psi_min: f64,
    /// Squared ℓ₂ diameter of the feasible set.
    pub omega_sq: Option<f64>,
    /// Lipschitz constant of `g` in the split view.
    pub lipschitz_g: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub problem: CompositeProblem,
    pub split: Option<SplitProblem>,
    pub a: Option<Matrix>,
    pub b: Option<Vector>,
    /// Dual solution of the split view, when planted.
    pub y_star: Option<Vector>,
    pub meta: InstanceMeta,
}

impl Instance {
    pub fn x_star(&self) -> &Vector {
        &self
            .problem
            .reference
            .as_ref()
            .expect("generated instances carry a reference")
            .x
    }

    pub fn psi_min(&self) -> f64 {
        self.meta.psi_min
    }

    /// Default geometry: entropy on the simplex, euclidean elsewhere.
    pub fn default_geometry(&self) -> DistanceGenerator {
        match self.problem.set.kind {
            crate::problem::SetKind::Simplex => {
                DistanceGenerator::entropy_simplex(self.problem.dim())
            }
            _ => DistanceGenerator::euclidean_on(&self.problem.set),
        }
    }

    /// The problem with `f`'s Lipschitz constant measured for `h`.
    pub fn problem_for(&self, h: &DistanceGenerator) -> CompositeProblem {
        let mut p = self.problem.clone();
        if h.kind == crate::geometry::DgfKind::EntropySimplex {
            if let Some(l) = self.meta.lipschitz_l1 {
                p.f.lipschitz_grad = Some(l);
            }
        }
        p
    }
}

pub fn generate_problem(spec: &InstanceSpec) -> Result<Instance> {
    if spec.n == 0 || spec.m == 0 {
        return Err(Error::InvalidArgument(
            "instance dimensions must be at least 1".into(),
        ));
    }
    if !(spec.lambda >= 0.0) || !(spec.mu > 0.0) {
        return Err(Error::InvalidArgument(
            "λ must be nonnegative and μ positive".into(),
        ));
    }
    let mut rng = SeededRng::new(spec.seed);
    let (n, m) = (spec.n, spec.m);
    match spec.problem {
        ProblemTag::Lasso => lasso(spec, &mut rng),
        ProblemTag::UniformFit => {
            let a = rng.normal_matrix(m, n);
            let xp = rng.simplex_point(n);
            let b = &a * &xp;
            let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
            let f = SmoothPart::new(
                move |x| (&a1 * x - &b1).amax(),
                move |x| {
                    let t = &a2 * x - &b2;
                    let i = linalg::argmax(&t.abs());
                    a2.row(i).transpose() * crate::problem::sign0(t[i])
                },
            )
            .with_subgrad_bound(a.row_iter().map(|r| r.norm()).fold(0.0, f64::max));
            let problem = CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::simplex(n))?
                .with_reference(xp, 0.0);
            let meta = meta_with(&problem, None, None, None, 0.0);
            Ok(Instance {
                spec: spec.clone(),
                problem,
                split: None,
                a: Some(a),
                b: Some(b),
                y_star: None,
                meta,
            })
        }
        ProblemTag::L1Fit => l1_fit(spec, &mut rng),
        ProblemTag::SimplexQp => {
            let a = rng.normal_matrix(m, n);
            let q = a.transpose() * &a / m as f64;
            let c = rng.normal_vector(n);
            let f = SmoothPart::quadratic(q.clone(), c.clone());
            let lip = f.lipschitz_grad;
            let set = FeasibleSet::simplex(n);
            let (x, value) = projected_fista(&f, &set, lip.unwrap_or(1.0))?;
            let problem =
                CompositeProblem::new(f, NonsmoothPart::zero(), set)?.with_reference(x, value);
            let meta = meta_with(&problem, lip, Some(q.amax()), None, value);
            Ok(Instance {
                spec: spec.clone(),
                problem,
                split: None,
                a: Some(a),
                b: None,
                y_star: None,
                meta,
            })
        }
        ProblemTag::StronglyConvexQp => {
            let a = rng.normal_matrix(m, n);
            let q = a.transpose() * &a / m as f64 + Matrix::identity(n, n) * spec.mu;
            let c = rng.normal_vector(n);
            let x = q
                .clone()
                .cholesky()
                .ok_or_else(|| {
                    Error::InternalFault("strongly convex Hessian failed Cholesky".into())
                })?
                .solve(&c);
            let value = -0.5 * c.dot(&x);
            let f = SmoothPart::quadratic(q.clone(), c);
            let lip = f.lipschitz_grad;
            let problem =
                CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::whole_space(n))?
                    .with_reference(x, value);
            let meta = meta_with(&problem, lip, Some(q.amax()), Some(spec.mu), value);
            Ok(Instance {
                spec: spec.clone(),
                problem,
                split: None,
                a: Some(a),
                b: None,
                y_star: None,
                meta,
            })
        }
        ProblemTag::NonsmoothL1 => {
            let c = rng.uniform_vector(n, -1.0, 1.0);
            let f = SmoothPart::l1_distance(c.clone());
            let problem =
                CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::cube(n, -1.0, 1.0)?)?
                    .with_reference(c, 0.0);
            let meta = meta_with(&problem, None, None, None, 0.0);
            Ok(Instance {
                spec: spec.clone(),
                problem,
                split: None,
                a: None,
                b: None,
                y_star: None,
                meta,
            })
        }
    }
}

/// Simplex QP whose Hessian spectrum is log-uniform over `decades` orders of magnitude.
///
/// The Hessian acts on the simplex's affine hull only and the minimizer sits
/// in the relative interior, so the constraint never binds near the optimum
/// and the objective gap decays at the worst-case polynomial rates.
pub fn spread_spectrum_simplex_qp(n: usize, decades: f64, seed: u64) -> Result<Instance> {
    if n < 3 || !(decades > 0.0) {
        return Err(Error::InvalidArgument(
            "spread spectrum QP needs n ≥ 3 and decades > 0".into(),
        ));
    }
    let mut rng = SeededRng::new(seed);
    let mut basis = rng.normal_matrix(n, n - 1);
    for mut col in basis.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let u = basis.qr().q();
    let eig = Vector::from_iterator(
        n - 1,
        (0..n - 1).map(|i| 10f64.powf(-decades * i as f64 / (n - 2) as f64)),
    );
    let q = &u * Matrix::from_diagonal(&eig) * u.transpose();
    let q = (&q + q.transpose()) * 0.5;
    let w = Vector::from_iterator(
        n - 1,
        (0..n - 1).map(|_| if rng.uniform() < 0.5 { -1.0 } else { 1.0 }),
    );
    let offset = &u * &w;
    let x = Vector::from_element(n, 1.0 / n as f64) + offset * (0.2 / (n as f64 * w.norm()));
    let c = &q * &x;
    let value = -0.5 * c.dot(&x);
    let f = SmoothPart::quadratic(q.clone(), c);
    let lip = f.lipschitz_grad;
    let problem = CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::simplex(n))?
        .with_reference(x, value);
    let meta = meta_with(&problem, lip, Some(q.amax()), None, value);
    let spec = InstanceSpec::new(ProblemTag::SimplexQp, n, n - 1, seed);
    Ok(Instance {
        spec,
        problem,
        split: None,
        a: None,
        b: None,
        y_star: None,
        meta,
    })
}

fn meta_with(
    problem: &CompositeProblem,
    lipschitz: Option<f64>,
    lipschitz_l1: Option<f64>,
    mu: Option<f64>,
    psi_min: f64,
) -> InstanceMeta {
    InstanceMeta {
        generator: GENERATOR_NAME,
        lipschitz,
        lipschitz_l1,
        mu,
        psi_min,
        omega_sq: problem.set.diameter_sq(),
        lipschitz_g: None,
    }
}

fn lasso(spec: &InstanceSpec, rng: &mut SeededRng) -> Result<Instance> {
    let a = rng.normal_matrix(spec.m, spec.n);
    let b = rng.normal_vector(spec.m);
    let f = SmoothPart::least_squares(a.clone(), b.clone());
    let lip = f.lipschitz_grad.unwrap_or(0.0);
    let r = NonsmoothPart::l1(spec.lambda);
    let (x, value) = lasso_reference(&a, &b, spec.lambda, lip)?;
    let problem = CompositeProblem::new(f, r.clone(), FeasibleSet::whole_space(spec.n))?
        .with_reference(x, value);
    let split = SplitProblem::new(NonsmoothPart::half_sq_dist(b.clone()), r, a.clone())?;
    let ata = a.transpose() * &a;
    let meta = meta_with(&problem, Some(lip), Some(ata.amax()), None, value);
    Ok(Instance {
        spec: spec.clone(),
        problem,
        split: Some(split),
        a: Some(a),
        b: Some(b),
        y_star: None,
        meta,
    })
}

/// Planted saddle point for `‖Ãx − b‖₁ + λ‖x‖₁` built by a rank-one correction of `A`.
fn l1_fit(spec: &InstanceSpec, rng: &mut SeededRng) -> Result<Instance> {
    let (n, m, lam) = (spec.n, spec.m, spec.lambda);
    let a0 = rng.normal_matrix(m, n);
    let x_star = Vector::from_iterator(
        n,
        (0..n).map(|_| {
            if rng.uniform() < 0.5 {
                rng.normal()
            } else {
                0.0
            }
        }),
    );
    let s = Vector::from_iterator(
        m,
        (0..m).map(|_| if rng.uniform() < 0.5 { -1.0 } else { 1.0 }),
    );
    let e = rng.normal_vector(m).abs();
    let w = -x_star.map(crate::problem::sign0) * lam - a0.transpose() * &s;
    let a = &a0 + &s * w.transpose() / m as f64;
    let b = &a * &x_star - s.component_mul(&e);
    let value = e.sum() + lam * x_star.lp_norm(1);
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
    let f = SmoothPart::new(
        move |x| (&a1 * x - &b1).lp_norm(1),
        move |x| a2.transpose() * (&a2 * x - &b2).map(crate::problem::sign0),
    );
    let r = NonsmoothPart::l1(lam);
    let problem = CompositeProblem::new(f, r.clone(), FeasibleSet::whole_space(n))?
        .with_reference(x_star, value);
    let g = NonsmoothPart::l1_fit(b.clone());
    let lipschitz_g = g.lipschitz;
    let split = SplitProblem::new(g, r, a.clone())?;
    let mut meta = meta_with(&problem, None, None, None, value);
    meta.lipschitz_g = lipschitz_g;
    Ok(Instance {
        spec: spec.clone(),
        problem,
        split: Some(split),
        a: Some(a),
        b: Some(b),
        y_star: Some(s),
        meta,
    })
}

/// FISTA with function-value restart for `½‖Ax − b‖² + λ‖x‖₁`.
pub fn lasso_reference(
    a: &Matrix,
    b: &Vector,
    lambda: f64,
    lipschitz: f64,
) -> Result<(Vector, f64)> {
    let n = a.ncols();
    let obj = |x: &Vector| 0.5 * (a * x - b).norm_squared() + lambda * x.lp_norm(1);
    if lipschitz == 0.0 {
        return Ok((Vector::zeros(n), obj(&Vector::zeros(n))));
    }
    let step = 1.0 / lipschitz;
    let prox_grad =
        |y: &Vector| soft_threshold(&(y - a.transpose() * (a * y - b) * step), lambda * step);
    fista_loop(Vector::zeros(n), &obj, &prox_grad)
}

fn projected_fista(f: &SmoothPart, set: &FeasibleSet, lipschitz: f64) -> Result<(Vector, f64)> {
    let step = 1.0 / lipschitz.max(1e-300);
    let obj = |x: &Vector| f.value(x);
    let prox_grad = |y: &Vector| set.project(&(y - f.gradient(y)? * step));
    fista_loop(set.default_point(), &obj, &prox_grad)
}

fn fista_loop(
    x0: Vector,
    obj: &dyn Fn(&Vector) -> f64,
    prox_grad: &dyn Fn(&Vector) -> Result<Vector>,
) -> Result<(Vector, f64)> {
    let mut x = x0.clone();
    let mut y = x0;
    let mut t = 1.0f64;
    let mut fx = obj(&x);
    for _ in 0..REFERENCE_MAX_ITER {
        let next = prox_grad(&y)?;
        let f_next = obj(&next);
        if f_next > fx {
            if t == 1.0 {
                break;
            }
            // restart momentum from the last accepted point
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = (&next - &x).norm();
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        fx = f_next;
        t = t_next;
        if moved <= REFERENCE_TOL * x.norm().max(1.0) {
            break;
        }
    }
    // polish with plain proximal gradient steps
    for _ in 0..1000 {
        let next = prox_grad(&x)?;
        let f_next = obj(&next);
        if f_next > fx || (&next - &x).norm() <= 1e-15 * x.norm().max(1.0) {
            break;
        }
        x = next;
        fx = f_next;
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_spectrum_minimizer_is_interior_stationary() {
        let inst = spread_spectrum_simplex_qp(20, 6.0, 3).unwrap();
        let x = inst.x_star();
        assert!((x.sum() - 1.0).abs() < 1e-12 && x.min() > 0.0);
        let g = inst.problem.f.gradient(x).unwrap();
        assert!(g.amax() < 1e-12);
        assert!((inst.problem.f.value(x) - inst.psi_min()).abs() < 1e-15);
        assert!((inst.meta.lipschitz.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn same_spec_same_instance() {
        let spec = InstanceSpec::new(ProblemTag::Lasso, 12, 6, 9);
        let (i1, i2) = (
            generate_problem(&spec).unwrap(),
            generate_problem(&spec).unwrap(),
        );
        assert_eq!(i1.a, i2.a);
        assert_eq!(i1.b, i2.b);
        assert_eq!(i1.x_star(), i2.x_star());
    }

    #[test]
    fn large_lambda_gives_zero_solution() {
        let spec = InstanceSpec::new(ProblemTag::Lasso, 10, 5, 1);
        let probe = generate_problem(&spec).unwrap();
        let lam = (probe.a.as_ref().unwrap().transpose() * probe.b.as_ref().unwrap()).amax();
        let inst = generate_problem(&spec.with_lambda(lam * 1.01)).unwrap();
        assert_eq!(inst.x_star().amax(), 0.0);
    }

    #[test]
    fn strongly_convex_minimum_matches_linear_solve() {
        let spec = InstanceSpec::new(ProblemTag::StronglyConvexQp, 5, 3, 4).with_mu(1.0);
        let inst = generate_problem(&spec).unwrap();
        let g = inst.problem.f.gradient(inst.x_star()).unwrap();
        assert!(g.amax() < 1e-10);
        let lu_value = inst.problem.f.value(inst.x_star());
        assert!((lu_value - inst.psi_min()).abs() < 1e-10);
    }

    #[test]
    fn planted_l1_fit_is_optimal() {
        let spec = InstanceSpec::new(ProblemTag::L1Fit, 8, 12, 5).with_lambda(0.3);
        let inst = generate_problem(&spec).unwrap();
        let x = inst.x_star().clone();
        let psi = |x: &Vector| inst.problem.objective(x).unwrap();
        let mut rng = SeededRng::new(77);
        for _ in 0..200 {
            let d = rng.normal_vector(8) * 0.1;
            assert!(psi(&(&x + d)) >= inst.psi_min() - 1e-12);
        }
        assert!((psi(&x) - inst.psi_min()).abs() < 1e-12);
    }

    #[test]
    fn unknown_tag_lists_valid_ones() {
        let err = "nosuch".parse::<ProblemTag>().unwrap_err().to_string();
        assert!(err.contains("lasso") && err.contains("nonsmooth-l1"));
    }
}
