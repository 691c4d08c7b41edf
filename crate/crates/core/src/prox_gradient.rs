//! Bregman proximal gradient, mirror descent and NoLips.

use crate::conditional_gradient::GeneralizedLinearOracle;
use crate::error::check_dim;
use crate::geometry::{DistanceGenerator, ProxMapping};
use crate::problem::{evaluate_objective, merit_gap, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

/// Objective increase tolerated before a run is declared faulty.
pub const DESCENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum StepPolicy {
    /// `γ = scale·α/L_f` with `scale ∈ (0, 1]`.
    ConstantSmooth { scale: f64 },
    /// `γ = (1+ν)/(2L_f^h)`, or `1/(2L_f^h)` when conservative.
    NoLips { conservative: bool },
    /// `γ_k = γ₀/√(k+1)`.
    MdDecreasing { gamma0: f64 },
}

impl StepPolicy {
    pub fn constant() -> Self {
        Self::ConstantSmooth { scale: 1.0 }
    }

    /// Step at iteration `k` (zero-based).
    pub fn step(&self, problem: &CompositeProblem, h: &DistanceGenerator, k: u64) -> Result<f64> {
        match self {
            Self::ConstantSmooth { scale } => {
                if !(*scale > 0.0 && *scale <= 1.0) {
                    return Err(Error::Configuration("step scale must lie in (0, 1]".into()));
                }
                let l = problem
                    .f
                    .lipschitz_grad
                    .filter(|l| *l > 0.0)
                    .ok_or_else(|| {
                        Error::Configuration("constant step needs a positive L_f".into())
                    })?;
                Ok(scale * h.modulus / l)
            }
            Self::NoLips { conservative } => {
                let l = h.rel_smooth_const.filter(|l| *l > 0.0).ok_or_else(|| {
                    Error::Configuration("NoLips needs the relative smoothness constant".into())
                })?;
                let nu = if *conservative {
                    0.0
                } else {
                    h.symmetry.ok_or_else(|| {
                        Error::Configuration("NoLips needs the symmetry coefficient".into())
                    })?
                };
                Ok((1.0 + nu) / (2.0 * l))
            }
            Self::MdDecreasing { gamma0 } => {
                if !(*gamma0 > 0.0) {
                    return Err(Error::Configuration("γ₀ must be positive".into()));
                }
                Ok(gamma0 / ((k as f64) + 1.0).sqrt())
            }
        }
    }
}

/// Early stop for [`bpgm_run_with`] once the merit gap falls below `eps`.
#[derive(Clone, Debug)]
pub struct MeritStop {
    pub glo: GeneralizedLinearOracle,
    pub eps: f64,
}

pub fn bpgm_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    policy: StepPolicy,
    x0: &Vector,
    steps: usize,
) -> Result<(Vector, SolverTrace)> {
    bpgm_run_with(problem, h, policy, x0, steps, None)
}

/// `x^{k+1} = argmin γr(u) + ⟨γ∇f(x^k), u − x^k⟩ + D_h(u, x^k)`, with a descent check.
pub fn bpgm_run_with(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    policy: StepPolicy,
    x0: &Vector,
    steps: usize,
    stop: Option<&MeritStop>,
) -> Result<(Vector, SolverTrace)> {
    if let StepPolicy::MdDecreasing { gamma0 } = policy {
        return mirror_descent_run(problem, h, x0, steps, gamma0);
    }
    let name = match policy {
        StepPolicy::NoLips { .. } => "nolips",
        _ => "bpgm",
    };
    let pm = start_checks(problem, h, x0)?;
    let gamma = policy.step(problem, h, 0)?;
    let mut rec = TraceRecorder::new(name, problem.psi_min());
    let mut x = x0.clone();
    let mut psi = evaluate_objective(problem, &x)?;
    let gap_at = |x: &Vector, rec: &mut TraceRecorder| -> Result<Option<f64>> {
        match stop {
            Some(s) => {
                rec.counts.grad += 1;
                rec.counts.lo += 1;
                Ok(Some(merit_gap(problem, &s.glo, x)?.e))
            }
            None => Ok(None),
        }
    };
    let gap = gap_at(&x, &mut rec)?;
    rec.record(0, psi, gap, 0.0);
    if stop.zip(gap).is_some_and(|(s, g)| g < s.eps) {
        return Ok((x, rec.finish()));
    }
    for k in 1..=steps as u64 {
        let g = problem.f.gradient(&x)?;
        rec.counts.grad += 1;
        let next = pm.apply(&x, &(g * gamma), gamma)?;
        rec.counts.prox += 1;
        let next_psi = evaluate_objective(problem, &next)?;
        if !next_psi.is_finite() {
            return Err(Error::Oracle(format!(
                "objective left the domain at iteration {k}"
            )));
        }
        if next_psi > psi + DESCENT_TOL * psi.abs().max(1.0) {
            return Err(Error::InternalFault(format!(
                "objective increased from {psi} to {next_psi} at iteration {k}"
            )));
        }
        x = next;
        psi = next_psi;
        let gap = gap_at(&x, &mut rec)?;
        rec.record(k, psi, gap, gamma);
        if stop.zip(gap).is_some_and(|(s, g)| g < s.eps) {
            break;
        }
    }
    Ok((x, rec.finish()))
}

fn start_checks(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    x0: &Vector,
) -> Result<ProxMapping> {
    check_dim(problem.dim(), x0.len())?;
    if !problem.set.contains(x0) || !problem.r.value(x0).is_finite() {
        return Err(Error::InvalidArgument(
            "start point is not in dom r ∩ X".into(),
        ));
    }
    let pm = ProxMapping::new(h.clone(), problem.r.clone(), problem.set.clone());
    pm.check_supported()?;
    Ok(pm)
}

/// Mirror descent with `γ_k = γ₀/√(k+1)`; returns the best iterate and traces the best value so far.
pub fn mirror_descent_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    x0: &Vector,
    steps: usize,
    gamma0: f64,
) -> Result<(Vector, SolverTrace)> {
    if !problem.set.is_bounded() {
        return Err(Error::UnsupportedDomain(
            "mirror descent needs a bounded set".into(),
        ));
    }
    if !problem.f.has_gradient() {
        return Err(Error::Unsupported(
            "mirror descent needs a subgradient oracle".into(),
        ));
    }
    let pm = start_checks(problem, h, x0)?;
    let policy = StepPolicy::MdDecreasing { gamma0 };
    let mut rec = TraceRecorder::new("md", problem.psi_min());
    let mut x = x0.clone();
    let mut best = (evaluate_objective(problem, &x)?, x.clone());
    rec.record(0, best.0, None, 0.0);
    for k in 0..steps as u64 {
        let gamma = policy.step(problem, h, k)?;
        let g = problem.f.gradient(&x)?;
        rec.counts.grad += 1;
        x = pm.apply(&x, &(g * gamma), gamma)?;
        rec.counts.prox += 1;
        let psi = evaluate_objective(problem, &x)?;
        if psi < best.0 {
            best = (psi, x.clone());
        }
        rec.record(k + 1, best.0, None, gamma);
    }
    Ok((best.1, rec.finish()))
}

/// Bregman gradient steps under relative smoothness.
pub fn nolips_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    x0: &Vector,
    steps: usize,
    conservative: bool,
) -> Result<(Vector, SolverTrace)> {
    bpgm_run(problem, h, StepPolicy::NoLips { conservative }, x0, steps)
}
