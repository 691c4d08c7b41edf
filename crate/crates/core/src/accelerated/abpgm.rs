use crate::error::check_dim;
use crate::geometry::{bregman_divergence, DistanceGenerator, ProxMapping};
use crate::problem::{evaluate_objective, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

/// Positive root of `Lα² = A + α`.
pub fn next_alpha(lipschitz: f64, a: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * lipschitz * a).sqrt()) / (2.0 * lipschitz)
}

/// The three sequences of an accelerated method with `A_k` and the working constant.
#[derive(Clone, Debug, PartialEq)]
pub struct AccelState {
    pub a: f64,
    pub alpha: f64,
    pub x: Vector,
    pub u: Vector,
    pub y: Vector,
    pub l_work: f64,
}

impl AccelState {
    pub fn start(x0: &Vector, l_work: f64) -> Self {
        Self {
            a: 0.0,
            alpha: 0.0,
            x: x0.clone(),
            u: x0.clone(),
            y: x0.clone(),
            l_work,
        }
    }

    /// `y = (αu + Ax)/(A + α)`.
    pub(crate) fn extrapolate(&self, alpha: f64) -> Vector {
        (&self.u * alpha + &self.x * self.a) / (self.a + alpha)
    }

    pub(crate) fn combine(&self, alpha: f64, u_next: &Vector) -> Vector {
        (u_next * alpha + &self.x * self.a) / (self.a + alpha)
    }
}

#[derive(Clone, Debug)]
pub struct AbpgmRun {
    pub x: Vector,
    pub trace: SolverTrace,
    /// `A_k` for `k = 0..=N`.
    pub a_hist: Vec<f64>,
    /// `α_k` for `k = 1..=N`.
    pub alpha_hist: Vec<f64>,
    /// `D_h(x*, u^k)` when the reference point is known.
    pub dist_to_opt: Option<Vec<f64>>,
}

pub fn abpgm_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    lipschitz: f64,
    x0: &Vector,
    steps: usize,
) -> Result<(Vector, SolverTrace)> {
    abpgm_run_detailed(problem, h, lipschitz, x0, steps).map(|r| (r.x, r.trace))
}

pub fn abpgm_run_detailed(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    lipschitz: f64,
    x0: &Vector,
    steps: usize,
) -> Result<AbpgmRun> {
    abpgm_core(problem, h, lipschitz, x0, steps, "abpgm", &|x| {
        evaluate_objective(problem, x)
    })
}

/// Shared loop; `report` supplies the traced objective.
pub(crate) fn abpgm_core(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    lipschitz: f64,
    x0: &Vector,
    steps: usize,
    name: &str,
    report: &dyn Fn(&Vector) -> Result<f64>,
) -> Result<AbpgmRun> {
    check_dim(problem.dim(), x0.len())?;
    if !(lipschitz > 0.0) {
        return Err(Error::Configuration(
            "accelerated method needs L_f > 0".into(),
        ));
    }
    if !problem.set.contains(x0) || !problem.r.value(x0).is_finite() {
        return Err(Error::InvalidArgument(
            "start point is not in dom r ∩ X".into(),
        ));
    }
    let pm = ProxMapping::new(h.clone(), problem.r.clone(), problem.set.clone());
    pm.check_supported()?;
    let opt = problem.reference.as_ref().map(|r| r.x.clone());
    let dist = |u: &Vector| opt.as_ref().and_then(|o| bregman_divergence(h, o, u).ok());
    let mut dist_to_opt = opt.as_ref().map(|_| vec![dist(x0).unwrap_or(f64::NAN)]);

    let mut rec = TraceRecorder::new(name, problem.psi_min());
    let mut s = AccelState::start(x0, lipschitz);
    let (mut a_hist, mut alpha_hist) = (vec![0.0], Vec::with_capacity(steps));
    rec.record(0, report(x0)?, None, 0.0);
    for k in 1..=steps as u64 {
        let alpha = next_alpha(lipschitz, s.a);
        s.y = s.extrapolate(alpha);
        let g = problem.f.gradient(&s.y)?;
        rec.counts.grad += 1;
        let u = pm.apply(&s.u, &(g * alpha), alpha)?;
        rec.counts.prox += 1;
        s.x = s.combine(alpha, &u);
        s.u = u;
        s.a += alpha;
        s.alpha = alpha;
        if !evaluate_objective(problem, &s.x)?.is_finite() {
            return Err(Error::Oracle(format!(
                "objective is not finite at iteration {k}"
            )));
        }
        let psi = report(&s.x)?;
        rec.record(k, psi, None, alpha);
        a_hist.push(s.a);
        alpha_hist.push(alpha);
        if let Some(d) = dist_to_opt.as_mut() {
            d.push(dist(&s.u).unwrap_or(f64::NAN));
        }
    }
    Ok(AbpgmRun {
        x: s.x,
        trace: rec.finish(),
        a_hist,
        alpha_hist,
        dist_to_opt,
    })
}
