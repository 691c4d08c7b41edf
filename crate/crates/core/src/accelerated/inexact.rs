use super::abpgm::{next_alpha, AccelState};
use crate::conditional_gradient::GeneralizedLinearOracle;
use crate::error::check_dim;
use crate::problem::{evaluate_objective, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

/// `4L·D_X/(N+1)² + 8L·D_X/(N+1)`.
pub fn cg_inexact_bound(lipschitz: f64, dx: f64, horizon: u64) -> f64 {
    let np1 = horizon as f64 + 1.0;
    4.0 * lipschitz * dx / (np1 * np1) + 8.0 * lipschitz * dx / np1
}

/// Accelerated scheme whose Bregman step is replaced by one generalized linear oracle call.
pub fn cg_inexact_abpgm_run(
    problem: &CompositeProblem,
    glo: &GeneralizedLinearOracle,
    dx: f64,
    x0: &Vector,
    steps: usize,
) -> Result<(Vector, SolverTrace)> {
    check_dim(problem.dim(), x0.len())?;
    if !problem.set.is_bounded() {
        return Err(Error::Unsupported(
            "the linear-oracle step needs a bounded set".into(),
        ));
    }
    let lipschitz = problem
        .f
        .lipschitz_grad
        .filter(|l| *l > 0.0)
        .ok_or_else(|| Error::Configuration("linear-oracle accelerated method needs L_f".into()))?;
    if !problem.set.contains(x0) {
        return Err(Error::InvalidArgument("start point is not in X".into()));
    }
    let mut rec = TraceRecorder::new("cg-abpgm", problem.psi_min());
    rec.meta("inexactness", 2.0 * dx);
    let mut s = AccelState::start(x0, lipschitz);
    rec.record(0, evaluate_objective(problem, x0)?, None, 0.0);
    for k in 1..=steps as u64 {
        let alpha = next_alpha(lipschitz, s.a);
        s.y = s.extrapolate(alpha);
        let g = problem.f.gradient(&s.y)?;
        rec.counts.grad += 1;
        let u = glo.answer(&g)?;
        rec.counts.lo += 1;
        s.x = s.combine(alpha, &u);
        s.u = u;
        s.a += alpha;
        s.alpha = alpha;
        rec.record(k, evaluate_objective(problem, &s.x)?, None, alpha);
    }
    Ok((s.x, rec.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FeasibleSet, NonsmoothPart, SmoothPart};

    #[test]
    fn linear_objective_keeps_iterates_feasible() {
        let set = FeasibleSet::simplex(4);
        let f = SmoothPart::linear(Vector::from_vec(vec![0.3, -1.0, 2.0, 0.1])).with_lipschitz(1.0);
        let p = CompositeProblem::new(f, NonsmoothPart::zero(), set.clone()).unwrap();
        let glo = GeneralizedLinearOracle::plain(set.clone()).unwrap();
        let (x, trace) = cg_inexact_abpgm_run(&p, &glo, 1.0, p.start(), 40).unwrap();
        assert!(set.contains(&x));
        let last = trace.last().unwrap();
        assert_eq!(
            (last.grad_calls, last.prox_calls, last.lo_calls),
            (40, 0, 40)
        );
    }
}
