use super::abpgm::{next_alpha, AccelState};
use crate::error::check_dim;
use crate::geometry::{DistanceGenerator, ProxMapping};
use crate::problem::{evaluate_objective, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

pub const MAX_DOUBLINGS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniversalConfig {
    pub eps: f64,
    pub l0: f64,
}

impl UniversalConfig {
    pub fn new(eps: f64, l0: f64) -> Result<Self> {
        if !(eps > 0.0 && l0 > 0.0) {
            return Err(Error::Configuration(
                "universal method needs ε > 0 and L₀ > 0".into(),
            ));
        }
        Ok(Self { eps, l0 })
    }
}

#[derive(Clone, Debug)]
pub struct UniversalRun {
    pub x: Vector,
    pub trace: SolverTrace,
    /// `L_k` for `k = 0..=N`.
    pub l_hist: Vec<f64>,
    /// Accepted `i_k` per step.
    pub doublings: Vec<u32>,
    pub a: f64,
    /// Whether the reference gap fell below `ε`.
    pub reached: bool,
}

impl UniversalRun {
    /// Value plus gradient oracle calls.
    pub fn oracle_calls(&self) -> u64 {
        self.trace.last().map_or(0, |r| r.grad_calls) * 2
    }
}

/// Universal accelerated method; the local constant is found by doubling from `L_k/2`.
///
/// Stops after `steps` iterations, or earlier once `Ψ(x^k) − Ψ_min ≤ ε` when `Ψ_min` is known.
pub fn universal_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    cfg: &UniversalConfig,
    x0: &Vector,
    steps: usize,
) -> Result<UniversalRun> {
    check_dim(problem.dim(), x0.len())?;
    if !problem.set.contains(x0) || !problem.r.value(x0).is_finite() {
        return Err(Error::InvalidArgument(
            "start point is not in dom r ∩ X".into(),
        ));
    }
    let pm = ProxMapping::new(h.clone(), problem.r.clone(), problem.set.clone());
    pm.check_supported()?;
    let psi_min = problem.psi_min();
    let mut rec = TraceRecorder::new("universal", psi_min);
    let mut s = AccelState::start(x0, cfg.l0);
    let mut l_hist = vec![cfg.l0];
    let mut doublings = Vec::new();
    let psi0 = evaluate_objective(problem, x0)?;
    rec.record(0, psi0, None, 0.0);
    let done = |psi: f64| psi_min.is_some_and(|m| psi - m <= cfg.eps);
    let mut reached = done(psi0);
    let mut k = 0u64;
    while !reached && (k as usize) < steps {
        k += 1;
        let mut i = 0u32;
        let (alpha, l_trial, u, x) = loop {
            let l_trial = 2f64.powi(i as i32 - 1) * s.l_work;
            let alpha = next_alpha(l_trial, s.a);
            let a_next = s.a + alpha;
            let y = s.extrapolate(alpha);
            let fy = problem.f.value(&y);
            let g = problem.f.gradient(&y)?;
            rec.counts.grad += 1;
            let u = pm.apply(&s.u, &(&g * alpha), alpha)?;
            rec.counts.prox += 1;
            let x = s.combine(alpha, &u);
            let fx = problem.f.value(&x);
            rec.counts.value += 1;
            let d = &x - &y;
            let model = fy
                + g.dot(&d)
                + 0.5 * l_trial * h.norm(&d).powi(2)
                + cfg.eps * alpha / (2.0 * a_next);
            if fx <= model {
                s.y = y;
                break (alpha, l_trial, u, x);
            }
            if !fx.is_finite() || i >= MAX_DOUBLINGS {
                return Err(Error::Oracle(format!(
                    "no local constant found after {MAX_DOUBLINGS} doublings at step {k}; f may be nonconvex"
                )));
            }
            i += 1;
        };
        s.a += alpha;
        s.alpha = alpha;
        s.u = u;
        s.x = x;
        s.l_work = l_trial;
        l_hist.push(l_trial);
        doublings.push(i);
        let psi = evaluate_objective(problem, &s.x)?;
        rec.record(k, psi, None, alpha);
        reached = done(psi);
    }
    rec.meta("final_l", s.l_work);
    Ok(UniversalRun {
        x: s.x,
        trace: rec.finish(),
        l_hist,
        doublings,
        a: s.a,
        reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FeasibleSet, NonsmoothPart, SmoothPart};

    #[test]
    fn oracle_count_matches_doubling_identity() {
        let b = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let f = SmoothPart::half_sq_dist(b.clone());
        let p = CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::whole_space(3))
            .unwrap()
            .with_reference(b, 0.0);
        let cfg = UniversalConfig::new(1e-8, 0.1).unwrap();
        let run =
            universal_run(&p, &DistanceGenerator::euclidean(), &cfg, p.start(), 1000).unwrap();
        assert!(run.reached);
        let n = run.doublings.len() as f64;
        let l_n = *run.l_hist.last().unwrap();
        let bound = 4.0 * n + 2.0 * (l_n / 0.1).log2() + 4.0;
        assert!(run.oracle_calls() as f64 <= bound);
        assert!(l_n <= 2.0);
    }

    #[test]
    fn huge_tolerance_halves_the_constant() {
        let p = CompositeProblem::new(
            SmoothPart::half_sq_dist(Vector::zeros(2)),
            NonsmoothPart::zero(),
            FeasibleSet::cube(2, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let cfg = UniversalConfig::new(1e12, 1.0).unwrap();
        let run = universal_run(
            &p,
            &DistanceGenerator::euclidean(),
            &cfg,
            &Vector::from_element(2, 0.5),
            5,
        )
        .unwrap();
        assert!(run.doublings.iter().all(|&i| i == 0));
        assert_eq!(run.l_hist[5], 1.0 / 32.0);
    }
}
