//! Conditional gradient (Frank-Wolfe) methods and their oracles.

mod away;
mod oracle;
mod sliding;

pub use away::{awcg_run, AtomState, AwVariant};
pub use oracle::{
    generalized_linear_oracle, linear_oracle, min_eigenpair, GeneralizedLinearOracle, LinearOracle,
};
pub use sliding::{cndg_inner, scg_run, CndgOutcome, SCGParams, ScgRun};

use crate::error::check_dim;
use crate::problem::{evaluate_objective, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

const GOLDEN_TOL: f64 = 1e-12;
const BACKTRACK_GROWTH: f64 = 2.0;
const BACKTRACK_SHRINK: f64 = 0.9;
const BACKTRACK_M0: f64 = 1.0;
const MAX_DOUBLINGS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub enum CGStepRule {
    /// Open-loop `γ_k = 2/(k+1)` for `k ≥ 1`.
    Standard,
    /// Golden-section minimization of `Ψ` along the segment.
    ExactLineSearch,
    /// `min{e/(L_f‖p − x‖²), 1}`.
    Adaptive,
    /// Adaptive rule with a backtracked local constant.
    Backtracking,
    /// `min{e/(L·C), 1}` with a relative-smoothness constant and curvature.
    RelativeAdaptive { lipschitz: f64, curvature: f64 },
}

impl CGStepRule {
    pub fn standard_step(k: u64) -> f64 {
        2.0 / (k as f64 + 1.0)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::ExactLineSearch => "line-search",
            Self::Adaptive => "adaptive",
            Self::Backtracking => "backtracking",
            Self::RelativeAdaptive { .. } => "relative-adaptive",
        }
    }
}

/// Golden-section minimization of `phi` on `[lo, hi]` down to width `tol`.
///
/// Returns `None` when `phi` produces a non-finite value inside the bracket.
pub fn golden_section(
    mut phi: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Option<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > tol {
        if !fc.is_finite() || !fd.is_finite() {
            return None;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = phi(d);
        }
    }
    let (t, ft) = if fc <= fd { (c, fc) } else { (d, fd) };
    // endpoints are candidates too
    let (f_lo, f_hi) = (phi(lo), phi(hi));
    let mut best = (t, ft);
    if f_hi.is_finite() && f_hi <= best.1 {
        best = (hi, f_hi);
    }
    if f_lo.is_finite() && f_lo < best.1 {
        best = (lo, f_lo);
    }
    best.1.is_finite().then_some(best)
}

fn adaptive_step(e: f64, l: f64, dist_sq: f64) -> f64 {
    if e <= 0.0 || dist_sq == 0.0 {
        0.0
    } else if l <= 0.0 {
        1.0
    } else {
        (e / (l * dist_sq)).min(1.0)
    }
}

/// Generalized conditional gradient; the trace's `gap` column holds the merit `e(x^k)`.
pub fn gcg_run(
    problem: &CompositeProblem,
    glo: &GeneralizedLinearOracle,
    rule: CGStepRule,
    x0: &Vector,
    steps: usize,
) -> Result<(Vector, SolverTrace)> {
    check_dim(problem.dim(), x0.len())?;
    if !problem.set.is_bounded() {
        return Err(Error::UnsupportedDomain(
            "conditional gradient needs a bounded set".into(),
        ));
    }
    let lipschitz = problem.f.lipschitz_grad;
    if rule == CGStepRule::Adaptive && lipschitz.is_none() {
        return Err(Error::Configuration("adaptive step needs L_f".into()));
    }
    let mut rec = TraceRecorder::new(&format!("gcg-{}", rule.tag()), problem.psi_min());
    let mut x = x0.clone();
    let mut psi = evaluate_objective(problem, &x)?;
    let mut m_est = BACKTRACK_M0 / BACKTRACK_SHRINK;

    let probe = |x: &Vector, rec: &mut TraceRecorder| -> Result<(Vector, f64)> {
        let g = problem.f.gradient(x)?;
        rec.counts.grad += 1;
        let p = glo.answer(&g)?;
        rec.counts.lo += 1;
        let e = problem.r.value(x) - problem.r.value(&p) + g.dot(&(x - &p));
        Ok((p, e.max(0.0)))
    };

    let (mut p, mut e) = probe(&x, &mut rec)?;
    rec.record(0, psi, Some(e), 0.0);
    for k in 1..=steps as u64 {
        let d = &p - &x;
        let dist_sq = d.norm_squared();
        let along = |t: f64| evaluate_objective(problem, &(&x + &d * t)).unwrap_or(f64::INFINITY);
        let gamma = match &rule {
            CGStepRule::Standard => CGStepRule::standard_step(k),
            CGStepRule::Adaptive => adaptive_step(e, lipschitz.unwrap_or(0.0), dist_sq),
            CGStepRule::RelativeAdaptive {
                lipschitz,
                curvature,
            } => {
                if e <= 0.0 {
                    0.0
                } else {
                    (e / (lipschitz * curvature)).min(1.0)
                }
            }
            CGStepRule::ExactLineSearch => {
                let mut evals = 0u64;
                let found = golden_section(
                    |t| {
                        evals += 1;
                        along(t)
                    },
                    0.0,
                    1.0,
                    GOLDEN_TOL,
                );
                rec.counts.value += evals;
                match found {
                    Some((t, _)) => t,
                    None => {
                        rec.warn("line search failed; adaptive step used");
                        adaptive_step(e, lipschitz.unwrap_or(1.0), dist_sq)
                    }
                }
            }
            CGStepRule::Backtracking => {
                if e <= 0.0 || dist_sq == 0.0 {
                    0.0
                } else {
                    let mut m = m_est * BACKTRACK_SHRINK;
                    let mut accepted = None;
                    for _ in 0..=MAX_DOUBLINGS {
                        let t = (e / (m * dist_sq)).min(1.0);
                        rec.counts.value += 1;
                        if along(t) <= psi - t * e + 0.5 * t * t * m * dist_sq {
                            accepted = Some(t);
                            break;
                        }
                        m *= BACKTRACK_GROWTH;
                    }
                    m_est = m;
                    accepted.ok_or_else(|| {
                        Error::InternalFault("backtracking did not terminate".into())
                    })?
                }
            }
        };
        x += &d * gamma;
        psi = evaluate_objective(problem, &x)?;
        (p, e) = probe(&x, &mut rec)?;
        rec.record(k, psi, Some(e), gamma);
    }
    Ok((x, rec.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_simplex;
    use crate::problem::{FeasibleSet, NonsmoothPart, SmoothPart};
    use crate::rng::SeededRng;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (t, v) = golden_section(|t| (t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-12).unwrap();
        assert!((t - 0.3).abs() < 1e-6 && v < 1e-12);
        let (t, _) = golden_section(|t| -t, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn linear_objective_solved_in_one_adaptive_step() {
        let c = Vector::from_vec(vec![0.5, -1.0, 2.0]);
        let set = FeasibleSet::simplex(3);
        let p = CompositeProblem::new(SmoothPart::linear(c), NonsmoothPart::zero(), set.clone())
            .unwrap();
        let glo = GeneralizedLinearOracle::plain(set).unwrap();
        let (x, trace) = gcg_run(&p, &glo, CGStepRule::Adaptive, p.start(), 3).unwrap();
        assert_eq!(trace.rows[1].step, 1.0);
        assert_eq!(x, Vector::from_vec(vec![0.0, 1.0, 0.0]));
        assert_eq!(trace.rows[1].gap, Some(0.0));
    }

    #[test]
    fn projection_qp_descends_under_closed_loop_rules() {
        let mut rng = SeededRng::new(4);
        let b = rng.normal_vector(10) * 2.0;
        let set = FeasibleSet::simplex(10);
        let star = project_simplex(&b);
        let f = SmoothPart::half_sq_dist(b);
        let psi_min = f.value(&star);
        let p = CompositeProblem::new(f, NonsmoothPart::zero(), set.clone())
            .unwrap()
            .with_reference(star, psi_min);
        let glo = GeneralizedLinearOracle::plain(set).unwrap();
        for rule in [
            CGStepRule::Adaptive,
            CGStepRule::ExactLineSearch,
            CGStepRule::Backtracking,
        ] {
            let (_, trace) = gcg_run(&p, &glo, rule.clone(), p.start(), 300).unwrap();
            for w in trace.rows.windows(2) {
                assert!(w[1].objective <= w[0].objective + 1e-12, "{rule:?}");
            }
            assert!(trace
                .rows
                .iter()
                .all(|r| r.gap.unwrap() >= r.objective - psi_min - 1e-12));
        }
    }
}
