use std::fmt;
use std::str::FromStr;

use super::instances::Instance;
use crate::accelerated::{
    abpgm_run, cg_inexact_abpgm_run, choose_tau, restart_run, smoothed_run, universal_run,
    RestartConfig, SmoothedProblem, SmoothingKind, UniversalConfig,
};
use crate::conditional_gradient::{
    awcg_run, gcg_run, scg_run, AtomState, AwVariant, CGStepRule, GeneralizedLinearOracle,
    LinearOracle, SCGParams,
};
use crate::dual_averaging::{da_run, DASchedule};
use crate::geometry::DistanceGenerator;
use crate::problem::SetKind;
use crate::prox_gradient::{bpgm_run, mirror_descent_run, StepPolicy};
use crate::splitting::{
    adpmm_run, cp_run, ADMMConfig, CPConfig, InnerSolver, SplitInit, SplitProblem,
};
use crate::trace::SolverTrace;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverTag {
    Bpgm,
    Md,
    Da,
    Gcg,
    GcgLineSearch,
    GcgAdaptive,
    Awcg,
    Pcg,
    Scg,
    Abpgm,
    Restart,
    Universal,
    Smoothing,
    CgAbpgm,
    Admm,
    Adpmm,
    Cp,
}

impl SolverTag {
    pub const ALL: [SolverTag; 17] = [
        Self::Bpgm,
        Self::Md,
        Self::Da,
        Self::Gcg,
        Self::GcgLineSearch,
        Self::GcgAdaptive,
        Self::Awcg,
        Self::Pcg,
        Self::Scg,
        Self::Abpgm,
        Self::Restart,
        Self::Universal,
        Self::Smoothing,
        Self::CgAbpgm,
        Self::Admm,
        Self::Adpmm,
        Self::Cp,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Bpgm => "bpgm",
            Self::Md => "md",
            Self::Da => "da",
            Self::Gcg => "gcg",
            Self::GcgLineSearch => "gcg-ls",
            Self::GcgAdaptive => "gcg-adaptive",
            Self::Awcg => "awcg",
            Self::Pcg => "pcg",
            Self::Scg => "scg",
            Self::Abpgm => "abpgm",
            Self::Restart => "restart",
            Self::Universal => "universal",
            Self::Smoothing => "smoothing",
            Self::CgAbpgm => "cg-abpgm",
            Self::Admm => "admm",
            Self::Adpmm => "adpmm",
            Self::Cp => "cp",
        }
    }
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SolverTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.tag() == s).ok_or_else(|| {
            let valid: Vec<_> = Self::ALL.iter().map(|t| t.tag()).collect();
            Error::InvalidArgument(format!(
                "unknown solver '{s}'; valid solvers: {}",
                valid.join(", ")
            ))
        })
    }
}

fn need<T>(v: Option<T>, what: &str, inst: &Instance) -> Result<T> {
    v.ok_or_else(|| {
        Error::Unsupported(format!("{what} is not available for {}", inst.spec.problem))
    })
}

fn split_of(inst: &Instance) -> Result<&SplitProblem> {
    need(inst.split.as_ref(), "a split view", inst)
}

/// Runs `solver` on `inst` for `steps` iterations with the harness defaults.
pub fn run_solver(inst: &Instance, solver: SolverTag, steps: usize) -> Result<SolverTrace> {
    let h = inst.default_geometry();
    let problem = inst.problem_for(&h);
    let x0 = problem.start().clone();
    let mut trace = match solver {
        SolverTag::Bpgm => bpgm_run(&problem, &h, StepPolicy::constant(), &x0, steps)?.1,
        SolverTag::Md => {
            let m = problem.f.subgrad_bound.unwrap_or(1.0);
            let omega = h.diameter.unwrap_or(1.0);
            mirror_descent_run(
                &problem,
                &h,
                &x0,
                steps,
                (2.0 * h.modulus * omega).sqrt() / m,
            )?
            .1
        }
        SolverTag::Da => da_run(&problem, &h, &DASchedule::constant_beta_sqrt(1.0), steps)?.1,
        SolverTag::Gcg | SolverTag::GcgLineSearch | SolverTag::GcgAdaptive => {
            let rule = match solver {
                SolverTag::Gcg => CGStepRule::Standard,
                SolverTag::GcgLineSearch => CGStepRule::ExactLineSearch,
                _ => CGStepRule::Adaptive,
            };
            let glo =
                GeneralizedLinearOracle::new(inst.problem.set.clone(), inst.problem.r.clone())?;
            gcg_run(&inst.problem, &glo, rule, &x0, steps)?.1
        }
        SolverTag::Awcg | SolverTag::Pcg => {
            if !matches!(problem.set.kind, SetKind::Simplex) {
                return Err(Error::Unsupported(
                    "away-step methods run on the simplex instances".into(),
                ));
            }
            let lo = LinearOracle::new(problem.set.clone())?;
            let start = AtomState::vertex(lo.answer(&problem.f.gradient(&x0)?)?);
            let variant = if solver == SolverTag::Awcg {
                AwVariant::Away
            } else {
                AwVariant::Pairwise
            };
            awcg_run(&inst.problem, &lo, start, steps, variant)?.2
        }
        SolverTag::Scg => {
            let lo = LinearOracle::new(problem.set.clone())?;
            let l = need(inst.meta.lipschitz, "L_f", inst)?;
            let omega = need(inst.meta.omega_sq, "a bounded set", inst)?;
            scg_run(&inst.problem, &lo, SCGParams::new(l, omega)?, &x0, steps)?.trace
        }
        SolverTag::Abpgm => {
            let l = need(problem.f.lipschitz_grad, "L_f", inst)?;
            abpgm_run(&problem, &h, l, &x0, steps)?.1
        }
        SolverTag::Restart => {
            let mu = need(inst.meta.mu, "a strong convexity constant", inst)?;
            let l = need(inst.meta.lipschitz, "L_f", inst)?;
            let euclid = DistanceGenerator::euclidean();
            let r0 = (&x0 - inst.x_star()).norm().max(f64::MIN_POSITIVE);
            let cfg = RestartConfig::new(mu, r0, 1.0, l)?;
            let p = (steps / cfg.inner_steps()).max(1) as u32;
            let eps = cfg.guarantee(p).max(f64::MIN_POSITIVE);
            restart_run(&inst.problem, &euclid, &cfg, &x0, eps)?.trace
        }
        SolverTag::Universal => {
            let cfg = UniversalConfig::new(1e-6, 1.0)?;
            universal_run(&problem, &h, &cfg, &x0, steps)?.trace
        }
        SolverTag::Smoothing => {
            let (a, b) = (
                need(inst.a.clone(), "a data matrix", inst)?,
                need(inst.b.clone(), "data", inst)?,
            );
            let kind = match inst.spec.problem {
                super::ProblemTag::UniformFit => SmoothingKind::SoftmaxUniformFit,
                _ => {
                    return Err(Error::Unsupported(
                        "smoothing runs on the uniform-fit instances".into(),
                    ))
                }
            };
            let dx = h.diameter.unwrap_or(1.0);
            let probe = SmoothedProblem::new(kind, a.clone(), b.clone(), 1.0)?.with_l1_primal(true);
            let tau = choose_tau(probe.norm_a(), steps as u64, dx, probe.dual_diameter());
            let sp = SmoothedProblem::new(kind, a, b, tau)?.with_l1_primal(true);
            smoothed_run(
                &sp,
                &problem.set,
                &h,
                &x0,
                steps,
                problem.reference.as_ref(),
            )?
            .1
        }
        SolverTag::CgAbpgm => {
            let glo =
                GeneralizedLinearOracle::new(inst.problem.set.clone(), inst.problem.r.clone())?;
            let dx = 0.5 * need(inst.meta.omega_sq, "a bounded set", inst)?;
            cg_inexact_abpgm_run(&inst.problem, &glo, dx, &x0, steps)?.1
        }
        SolverTag::Admm | SolverTag::Adpmm | SolverTag::Cp => {
            let sp = split_of(inst)?;
            let c = 1.0;
            let tau = 0.9 / (c * sp.operator_norm.powi(2));
            let init = SplitInit::zeros(sp);
            let mut t = match solver {
                SolverTag::Admm => {
                    adpmm_run(
                        sp,
                        &ADMMConfig::classical(c).with_inner_solver(InnerSolver::default()),
                        &init,
                        steps,
                    )?
                    .trace
                }
                SolverTag::Adpmm => {
                    adpmm_run(sp, &ADMMConfig::linearized(c, tau), &init, steps)?.trace
                }
                _ => {
                    cp_run(
                        sp,
                        &CPConfig::new(tau, c, 1.0, sp)?,
                        &init.x,
                        &init.y,
                        None,
                        steps,
                    )?
                    .trace
                }
            };
            t.reference_value = Some(inst.psi_min());
            t
        }
    };
    trace.push_meta("problem", inst.spec.problem);
    trace.push_meta("n", inst.spec.n);
    trace.push_meta("m", inst.spec.m);
    trace.push_meta("lambda", inst.spec.lambda);
    trace.push_meta("mu", inst.spec.mu);
    trace.push_meta("seed", inst.spec.seed);
    trace.push_meta("generator", inst.meta.generator);
    Ok(trace)
}
