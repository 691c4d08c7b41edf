//! Composite dual averaging with ergodic averaging.

use std::fmt;
use std::sync::Arc;

use crate::error::check_dim;
use crate::geometry::{DgfKind, DistanceGenerator, ProxMapping};
use crate::problem::{evaluate_objective, CompositeProblem, FeasibleSet, NonsmoothPart};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

type Schedule = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

const MONOTONE_TOL: f64 = 1e-12;

/// Weights `β_k` (non-decreasing) and `λ_k` (non-increasing); `γ_k` accumulates the `λ`s.
#[derive(Clone)]
pub struct DASchedule {
    beta: Schedule,
    lambda: Schedule,
    pub tag: &'static str,
}

impl fmt::Debug for DASchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DASchedule")
            .field("tag", &self.tag)
            .finish()
    }
}

impl DASchedule {
    /// `β_k = β`, `λ_k = 1/√(k+1)`.
    pub fn constant_beta_sqrt(beta: f64) -> Self {
        Self {
            beta: Arc::new(move |_| beta),
            lambda: Arc::new(|k| 1.0 / (k as f64 + 1.0).sqrt()),
            tag: "constant-beta-sqrt",
        }
    }

    /// `β_k = β`, `λ_k = √(2αβΩ_h)/(√(N+1)·M_f)`.
    pub fn fixed_horizon(
        beta: f64,
        alpha: f64,
        omega: f64,
        subgrad_bound: f64,
        horizon: u64,
    ) -> Result<Self> {
        if !(beta > 0.0 && alpha > 0.0 && omega > 0.0 && subgrad_bound > 0.0) {
            return Err(Error::Configuration(
                "fixed-horizon schedule needs positive β, α, Ω_h and M_f".into(),
            ));
        }
        let lam =
            (2.0 * alpha * beta * omega).sqrt() / ((horizon as f64 + 1.0).sqrt() * subgrad_bound);
        Ok(Self {
            beta: Arc::new(move |_| beta),
            lambda: Arc::new(move |_| lam),
            tag: "fixed-horizon",
        })
    }

    pub fn custom(
        beta: impl Fn(u64) -> f64 + Send + Sync + 'static,
        lambda: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            beta: Arc::new(beta),
            lambda: Arc::new(lambda),
            tag: "custom",
        }
    }

    pub fn beta(&self, k: u64) -> f64 {
        (self.beta)(k)
    }

    pub fn lambda(&self, k: u64) -> f64 {
        (self.lambda)(k)
    }

    /// `γ_k = Σ_{i<k} λ_i`.
    pub fn gamma(&self, k: u64) -> f64 {
        (0..k).map(|i| self.lambda(i)).sum()
    }
}

/// Iterate state after a dual averaging run.
#[derive(Clone, Debug, PartialEq)]
pub struct DAState {
    pub y: Vector,
    pub x: Vector,
    pub xbar: Vector,
    pub lambda_sum: f64,
}

fn anchor(h: &DistanceGenerator, set: &FeasibleSet) -> Result<Vector> {
    let n = set.dim();
    match &h.kind {
        DgfKind::Euclidean => Ok(Vector::zeros(n)),
        DgfKind::EntropySimplex => Ok(Vector::from_element(n, 1.0 / n as f64)),
        DgfKind::FermiDirac { lower, upper } => Ok((lower + upper) * 0.5),
        DgfKind::Custom => h
            .gradient_conjugate(&Vector::zeros(n))
            .ok_or_else(|| Error::Unsupported("mirror map needs the inverse gradient of h".into())),
    }
}

/// `argmax_X ⟨y, x⟩ − βh(x) − γr(x)`.
pub fn mirror_map(
    h: &DistanceGenerator,
    r: &NonsmoothPart,
    set: &FeasibleSet,
    beta: f64,
    gamma: f64,
    y: &Vector,
) -> Result<Vector> {
    check_dim(set.dim(), y.len())?;
    if !(beta > 0.0) || gamma < 0.0 {
        return Err(Error::InvalidArgument(
            "mirror map needs β > 0 and γ ≥ 0".into(),
        ));
    }
    let pm = ProxMapping::new(h.clone(), r.clone(), set.clone());
    pm.apply(&anchor(h, set)?, &(-y / beta), gamma / beta)
}

fn check_schedule(schedule: &DASchedule, k: u64) -> Result<()> {
    let (b, l) = (schedule.beta(k), schedule.lambda(k));
    if !(b > 0.0 && l > 0.0) {
        return Err(Error::Configuration(format!(
            "β_{k} and λ_{k} must be positive"
        )));
    }
    if k > 0 {
        if b < schedule.beta(k - 1) * (1.0 - MONOTONE_TOL) {
            return Err(Error::Configuration(format!("β decreases at k = {k}")));
        }
        if l > schedule.lambda(k - 1) * (1.0 + MONOTONE_TOL) {
            return Err(Error::Configuration(format!("λ increases at k = {k}")));
        }
    }
    Ok(())
}

/// Runs `steps` dual updates; trace row `k` holds `Ψ(x̄_k)`.
pub fn da_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    schedule: &DASchedule,
    steps: usize,
) -> Result<(Vector, SolverTrace)> {
    da_run_state(problem, h, schedule, steps).map(|(s, t)| (s.xbar, t))
}

pub fn da_run_state(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    schedule: &DASchedule,
    steps: usize,
) -> Result<(DAState, SolverTrace)> {
    if !problem.set.is_bounded() {
        return Err(Error::UnsupportedDomain(
            "dual averaging needs a bounded set".into(),
        ));
    }
    let n = problem.dim();
    let q =
        |beta: f64, gamma: f64, y: &Vector| mirror_map(h, &problem.r, &problem.set, beta, gamma, y);
    let mut rec = TraceRecorder::new("da", problem.psi_min());
    rec.meta("schedule", schedule.tag);
    let mut y = Vector::zeros(n);
    let mut gamma = 0.0;
    check_schedule(schedule, 0)?;
    let mut x = q(schedule.beta(0), gamma, &y)?;
    rec.counts.prox += 1;
    let mut weighted = Vector::zeros(n);
    let mut lambda_sum = 0.0;
    let mut xbar = x.clone();
    for k in 0..=steps as u64 {
        let lam = schedule.lambda(k);
        weighted.axpy(lam, &x, 1.0);
        lambda_sum += lam;
        xbar = &weighted / lambda_sum;
        rec.record(k, evaluate_objective(problem, &xbar)?, None, lam);
        if k == steps as u64 {
            break;
        }
        let g = problem.f.gradient(&x)?;
        rec.counts.grad += 1;
        y.axpy(-lam, &g, 1.0);
        gamma += lam;
        check_schedule(schedule, k + 1)?;
        x = q(schedule.beta(k + 1), gamma, &y)?;
        rec.counts.prox += 1;
    }
    Ok((
        DAState {
            y,
            x,
            xbar,
            lambda_sum,
        },
        rec.finish(),
    ))
}

/// `[βΩ_h + r(x⁰) + (M_f²/2α)(1 + ln(N+1))]/√(N+1)`.
pub fn da_bound(
    beta: f64,
    omega: f64,
    r_start: f64,
    subgrad_bound: f64,
    alpha: f64,
    horizon: u64,
) -> f64 {
    let np1 = horizon as f64 + 1.0;
    (beta * omega + r_start + subgrad_bound.powi(2) / (2.0 * alpha) * (1.0 + np1.ln())) / np1.sqrt()
}

/// Runs dual averaging (`β ≡ 1`) and mirror descent with the same `λ_k`; returns `max_k ‖x_DA − x_MD‖`.
pub fn da_md_equivalence_check(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    steps: usize,
) -> Result<f64> {
    if !problem.r.is_zero() {
        return Err(Error::Unsupported(
            "the equivalence check takes r = 0".into(),
        ));
    }
    if h.kind == DgfKind::Euclidean
        && !matches!(problem.set.kind, crate::problem::SetKind::WholeSpace)
    {
        return Err(Error::Unsupported(
            "the equivalence needs an essentially smooth h".into(),
        ));
    }
    let schedule = DASchedule::constant_beta_sqrt(1.0);
    let pm = ProxMapping::new(h.clone(), NonsmoothPart::zero(), problem.set.clone());
    let mut y = Vector::zeros(problem.dim());
    let mut x_da = mirror_map(h, &problem.r, &problem.set, 1.0, 0.0, &y)?;
    let mut x_md = x_da.clone();
    let mut worst: f64 = 0.0;
    for k in 0..steps as u64 {
        let lam = schedule.lambda(k);
        y.axpy(-lam, &problem.f.gradient(&x_da)?, 1.0);
        x_da = mirror_map(h, &problem.r, &problem.set, 1.0, 0.0, &y)?;
        let g = problem.f.gradient(&x_md)?;
        x_md = pm.apply(&x_md, &(g * lam), lam)?;
        worst = worst.max((&x_da - &x_md).norm());
    }
    Ok(worst)
}

/// Bound constants of the entropy and euclidean setups on the simplex for a linear `f = ⟨c, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetupConstants {
    /// `√(ln n)·‖c‖_∞`.
    pub entropy: f64,
    /// `√((n−1)/2n)·‖c‖₂`.
    pub euclidean: f64,
}

pub fn simplex_setup_constants(c: &Vector) -> SetupConstants {
    let n = c.len() as f64;
    SetupConstants {
        entropy: n.ln().sqrt() * c.amax(),
        euclidean: ((n - 1.0) / (2.0 * n)).sqrt() * c.norm(),
    }
}
