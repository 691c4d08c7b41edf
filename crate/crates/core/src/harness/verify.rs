use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::instances::{
    generate_problem, spread_spectrum_simplex_qp, Instance, InstanceSpec, ProblemTag,
};
use super::rates::{count_violations, fit_rate};
use crate::accelerated::{
    abpgm_run_detailed, cg_inexact_abpgm_run, cg_inexact_bound, choose_tau, next_alpha,
    restart_run, smoothed_run, smoothing_bound, universal_run, RestartConfig, SmoothedProblem,
    SmoothingKind, UniversalConfig,
};
use crate::conditional_gradient::{
    gcg_run, scg_run, CGStepRule, GeneralizedLinearOracle, LinearOracle, SCGParams,
};
use crate::dual_averaging::{da_bound, da_md_equivalence_check, da_run, DASchedule};
use crate::geometry::{
    bregman_divergence, interior_sample, moreau_envelope, moreau_identity_check, project_simplex,
    three_point_residual, DistanceGenerator, ProxMapping,
};
use crate::problem::{CompositeProblem, FeasibleSet, NonsmoothPart, SmoothPart};
use crate::prox_gradient::{bpgm_run, StepPolicy};
use crate::rng::SeededRng;
use crate::splitting::{adpmm_run, cp_adpmm_equivalence, ergodic_means, ADMMConfig, SplitInit};
use crate::{Error, Result, Vector};

/// Absolute slack for comparing gaps measured against a numerically solved reference.
const REFERENCE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTag {
    BpgmRate,
    AbpgmRate,
    RateSeparation,
    DaRate,
    CpEquivalence,
    ErgodicCertificate,
    GcgRate,
    ScgRate,
    RestartLinear,
    Universal,
    Smoothing,
    CgAbpgmRate,
    GeometryProperties,
}

impl BoundTag {
    pub const ALL: [BoundTag; 13] = [
        Self::BpgmRate,
        Self::AbpgmRate,
        Self::RateSeparation,
        Self::DaRate,
        Self::CpEquivalence,
        Self::ErgodicCertificate,
        Self::GcgRate,
        Self::ScgRate,
        Self::RestartLinear,
        Self::Universal,
        Self::Smoothing,
        Self::CgAbpgmRate,
        Self::GeometryProperties,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::BpgmRate => "bpgm-rate",
            Self::AbpgmRate => "abpgm-rate",
            Self::RateSeparation => "rate-separation",
            Self::DaRate => "da-rate",
            Self::CpEquivalence => "cp-equivalence",
            Self::ErgodicCertificate => "ergodic-certificate",
            Self::GcgRate => "gcg-rate",
            Self::ScgRate => "scg-rate",
            Self::RestartLinear => "restart-linear",
            Self::Universal => "universal",
            Self::Smoothing => "smoothing",
            Self::CgAbpgmRate => "cg-abpgm-rate",
            Self::GeometryProperties => "geometry-properties",
        }
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.tag() == s).ok_or_else(|| {
            let valid: Vec<_> = Self::ALL.iter().map(|t| t.tag()).collect();
            Error::InvalidArgument(format!(
                "unknown bound '{s}'; valid bounds: {}",
                valid.join(", ")
            ))
        })
    }
}

/// Outcome of one bound check.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub bound: BoundTag,
    pub spec: String,
    pub solver: String,
    pub violations: u64,
    pub checks: u64,
    pub slope: Option<f64>,
    pub details: Vec<String>,
    pub elapsed_ms: u128,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} violations in {} checks", self.violations, self.checks);
        if let Some(slope) = self.slope {
            s.push_str(&format!(", slope {slope:.3}"));
        }
        s.push_str(&format!(", {:.2} s", self.elapsed_ms as f64 / 1000.0));
        s
    }
}

struct Tally {
    violations: u64,
    checks: u64,
    details: Vec<String>,
    slope: Option<f64>,
}

impl Tally {
    fn new() -> Self {
        Self {
            violations: 0,
            checks: 0,
            details: Vec::new(),
            slope: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.details.len() < 20 {
                self.details.push(what());
            }
        }
    }

    fn add(&mut self, violations: u64, checks: u64, what: impl FnOnce() -> String) {
        self.checks += checks;
        self.violations += violations;
        if violations > 0 && self.details.len() < 20 {
            self.details.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.details.push(s);
    }
}

/// Runs the check for `bound`; `seed` offsets every generated instance.
pub fn verify(bound: BoundTag, seed: u64) -> Result<VerifyReport> {
    let started = Instant::now();
    let mut t = Tally::new();
    let (spec, solver) = match bound {
        BoundTag::BpgmRate => bpgm_rate(seed, &mut t)?,
        BoundTag::AbpgmRate => abpgm_rate(seed, &mut t)?,
        BoundTag::RateSeparation => rate_separation(seed, &mut t)?,
        BoundTag::DaRate => da_rate(seed, &mut t)?,
        BoundTag::CpEquivalence => cp_equivalence(seed, &mut t)?,
        BoundTag::ErgodicCertificate => ergodic_certificate(seed, &mut t)?,
        BoundTag::GcgRate => gcg_rate(seed, &mut t)?,
        BoundTag::ScgRate => scg_rate(seed, &mut t)?,
        BoundTag::RestartLinear => restart_linear(seed, &mut t)?,
        BoundTag::Universal => universal(seed, &mut t)?,
        BoundTag::Smoothing => smoothing(seed, &mut t)?,
        BoundTag::CgAbpgmRate => cg_abpgm_rate(seed, &mut t)?,
        BoundTag::GeometryProperties => geometry_properties(seed, &mut t)?,
    };
    let elapsed = started.elapsed();
    let limit = match bound {
        BoundTag::BpgmRate => Some(10.0),
        BoundTag::Universal => Some(30.0),
        _ => None,
    };
    if let Some(limit) = limit {
        let secs = elapsed.as_secs_f64();
        t.check(secs < limit, || {
            format!("runtime {secs:.2} s exceeds {limit} s")
        });
    }
    Ok(VerifyReport {
        bound,
        spec,
        solver: solver.into(),
        violations: t.violations,
        checks: t.checks,
        slope: t.slope,
        details: t.details,
        elapsed_ms: elapsed.as_millis(),
    })
}

/// Ten LASSO instances with euclidean geometry and ten simplex QPs with entropy geometry.
fn smooth_family(seed: u64) -> Result<Vec<(Instance, DistanceGenerator)>> {
    let mut out = Vec::new();
    for i in 0..10 {
        let inst = generate_problem(
            &InstanceSpec::new(ProblemTag::Lasso, 60, 30, seed + i).with_lambda(0.1),
        )?;
        out.push((inst, DistanceGenerator::euclidean()));
    }
    for i in 0..10 {
        let inst = generate_problem(&InstanceSpec::new(
            ProblemTag::SimplexQp,
            50,
            25,
            seed + 100 + i,
        ))?;
        let h = DistanceGenerator::entropy_simplex(50);
        out.push((inst, h));
    }
    Ok(out)
}

fn slack(inst: &Instance) -> f64 {
    REFERENCE_SLACK * (1.0 + inst.psi_min().abs())
}

fn bpgm_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    for (inst, h) in smooth_family(seed)? {
        let p = inst.problem_for(&h);
        let l = p.f.lipschitz_grad.expect("quadratic instances carry L_f");
        let d0 = bregman_divergence(&h, inst.x_star(), p.start())?;
        let (_, trace) = bpgm_run(&p, &h, StepPolicy::constant(), p.start(), 1000)?;
        let s = slack(&inst);
        let v = count_violations(&trace, |k| l * d0 / (h.modulus * k as f64) + s);
        t.add(v, 1000, || {
            format!(
                "{} seed {}: {v} violations",
                inst.spec.problem, inst.spec.seed
            )
        });
    }
    Ok((
        "10 lasso (n=60, m=30) + 10 simplex-qp (n=50, m=25), k ≤ 1000".into(),
        "bpgm",
    ))
}

fn abpgm_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let mut first = None;
    for (inst, h) in smooth_family(seed)? {
        let p = inst.problem_for(&h);
        let l = p.f.lipschitz_grad.expect("quadratic instances carry L_f");
        let d0 = bregman_divergence(&h, inst.x_star(), p.start())?;
        let run = abpgm_run_detailed(&p, &h, l, p.start(), 2000)?;
        let s = slack(&inst);
        let v = count_violations(&run.trace, |k| 4.0 * l * d0 / ((k + 1) as f64).powi(2) + s);
        t.add(v, 2000, || {
            format!(
                "{} seed {}: {v} violations",
                inst.spec.problem, inst.spec.seed
            )
        });
        first.get_or_insert((p, h, l));
    }
    let (p, h, l) = first.expect("family is nonempty");
    let run = abpgm_run_detailed(&p, &h, l, p.start(), 10_000)?;
    for (k, (&a, &alpha)) in run.a_hist.iter().skip(1).zip(&run.alpha_hist).enumerate() {
        let k = k + 1;
        let prev = run.a_hist[k - 1];
        t.check(a >= ((k + 1) as f64).powi(2) / (4.0 * l) - 1e-10, || {
            format!("A_{k} = {a} below (k+1)²/4L")
        });
        t.check(
            (prev + alpha - l * alpha * alpha).abs() <= 1e-10 * (1.0 + l * alpha * alpha),
            || format!("quadratic identity fails at k = {k}"),
        );
    }
    let mut a = 0.0;
    for k in 1..=10_000u64 {
        a += next_alpha(l, a);
        t.check(a >= ((k + 1) as f64).powi(2) / (4.0 * l) - 1e-10, || {
            format!("recurrence A_{k} too small")
        });
    }
    Ok((
        "same 20 instances, N ≤ 2000; coefficient growth for k ≤ 10⁴".into(),
        "abpgm",
    ))
}

fn rate_separation(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let inst = spread_spectrum_simplex_qp(100, 6.0, seed + 300)?;
    let h = DistanceGenerator::euclidean_on(&inst.problem.set);
    let p = inst.problem_for(&h);
    let l = p.f.lipschitz_grad.expect("quadratic");
    let (_, bp) = bpgm_run(&p, &h, StepPolicy::constant(), p.start(), 2000)?;
    let (_, ab) = crate::accelerated::abpgm_run(&p, &h, l, p.start(), 2000)?;
    let r1 = fit_rate(&bp, (50, 2000))?;
    let r2 = fit_rate(&ab, (50, 2000))?;
    t.check(r1.slope <= -0.9, || {
        format!("bpgm slope {:.3} above -0.9 on {:?}", r1.slope, r1.window)
    });
    t.check(r2.slope <= -1.8, || {
        format!("abpgm slope {:.3} above -1.8 on {:?}", r2.slope, r2.window)
    });
    t.note(format!(
        "bpgm slope {:.3} on {:?}, abpgm slope {:.3} on {:?}",
        r1.slope, r1.window, r2.slope, r2.window
    ));
    t.slope = Some(r2.slope);
    Ok((
        format!(
            "spread-spectrum simplex QP n=100 (6 decades) seed {}",
            seed + 300
        ),
        "bpgm,abpgm",
    ))
}

fn da_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let n = 10;
    let f = SmoothPart::max_coordinate().with_subgrad_bound(1.0);
    let p = CompositeProblem::new(f, NonsmoothPart::zero(), FeasibleSet::simplex(n))?;
    let h = DistanceGenerator::entropy_simplex(n);
    let (_, trace) = da_run(&p, &h, &DASchedule::constant_beta_sqrt(1.0), 10_000)?;
    let psi_min = 1.0 / n as f64;
    let omega = h.diameter.expect("entropy carries its diameter");
    for big_n in [100u64, 1000, 10_000] {
        let gap = trace.rows[big_n as usize].objective - psi_min;
        let bound = da_bound(1.0, omega, 0.0, 1.0, h.modulus, big_n);
        t.check(gap <= bound, || {
            format!("N = {big_n}: gap {gap:e} above {bound:e}")
        });
    }
    let mut rng = SeededRng::new(seed + 400);
    let lin = CompositeProblem::new(
        SmoothPart::linear(rng.normal_vector(n)),
        NonsmoothPart::zero(),
        FeasibleSet::simplex(n),
    )?;
    let quad = CompositeProblem::new(
        SmoothPart::half_sq_dist(rng.normal_vector(n)),
        NonsmoothPart::zero(),
        FeasibleSet::simplex(n),
    )?;
    for (name, q) in [("linear", lin), ("quadratic", quad)] {
        let dev = da_md_equivalence_check(&q, &h, 100)?;
        t.check(dev <= 1e-10, || {
            format!("{name}: DA and MD deviate by {dev:e}")
        });
    }
    Ok(("max_i x_i on the 10-simplex, entropy geometry".into(), "da"))
}

fn cp_equivalence(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let inst = generate_problem(&InstanceSpec::new(ProblemTag::Lasso, 20, 10, seed + 500))?;
    let sp = inst.split.as_ref().expect("lasso has a split view");
    let c = 1.0;
    let tau = 0.5 / (c * sp.operator_norm.powi(2));
    let mut rng = SeededRng::new(seed + 501);
    let init = SplitInit {
        x: rng.normal_vector(20),
        z: rng.normal_vector(10),
        y: rng.normal_vector(10),
    };
    let dev = cp_adpmm_equivalence(sp, tau, c, &init, 200)?;
    t.check(dev <= 1e-9, || format!("deviation {dev:e}"));
    t.note(format!("max deviation {dev:e}"));
    Ok((format!("lasso n=20 m=10 seed {}", seed + 500), "cp,adpmm"))
}

fn ergodic_certificate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    for i in 0..3 {
        let inst = generate_problem(
            &InstanceSpec::new(ProblemTag::L1Fit, 20, 30, seed + 600 + i).with_lambda(0.2),
        )?;
        let sp = inst.split.as_ref().expect("l1-fit has a split view");
        let c = 1.0;
        let tau = 0.9 / (c * sp.operator_norm.powi(2));
        let run = adpmm_run(
            sp,
            &ADMMConfig::linearized(c, tau),
            &SplitInit::zeros(sp),
            1000,
        )?;
        let x_star = inst.x_star();
        let z_star = &sp.a * x_star;
        let lg = inst.meta.lipschitz_g.expect("l1-fit carries L_g");
        let means = ergodic_means(&run.xs);
        for (k, xbar) in means.iter().enumerate().skip(1) {
            let gap = sp.objective(xbar) - inst.psi_min();
            let bound = run
                .certificate
                .objective_bound(&sp.a, x_star, &z_star, lg, k);
            t.check(gap <= bound + slack(&inst), || {
                format!(
                    "seed {}: k = {k} gap {gap:e} above {bound:e}",
                    inst.spec.seed
                )
            });
        }
    }
    Ok((
        "3 planted l1-fit instances (n=20, m=30, λ=0.2), k ≤ 1000".into(),
        "adpmm",
    ))
}

fn gcg_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    for rule in [
        CGStepRule::Standard,
        CGStepRule::ExactLineSearch,
        CGStepRule::Adaptive,
    ] {
        for i in 0..10 {
            let inst = generate_problem(&InstanceSpec::new(
                ProblemTag::SimplexQp,
                30,
                15,
                seed + 700 + i,
            ))?;
            let p = &inst.problem;
            let glo = GeneralizedLinearOracle::new(p.set.clone(), p.r.clone())?;
            let l = inst.meta.lipschitz.expect("quadratic");
            let omega_sq = inst.meta.omega_sq.expect("simplex is bounded");
            let s0 = p.objective(p.start())? - inst.psi_min();
            let c = 2.0 * s0.max(l * omega_sq);
            let (_, trace) = gcg_run(p, &glo, rule.clone(), p.start(), 10_000)?;
            let v = count_violations(&trace, |k| c / k as f64 + slack(&inst));
            t.add(v, 10_000, || {
                format!("{} seed {}: {v} violations", rule.tag(), inst.spec.seed)
            });
        }
    }
    Ok(("10 simplex-qp (n=30, m=15) per rule, k ≤ 10⁴".into(), "gcg"))
}

fn scg_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    for i in 0..5 {
        let inst = generate_problem(&InstanceSpec::new(
            ProblemTag::SimplexQp,
            30,
            15,
            seed + 800 + i,
        ))?;
        let p = &inst.problem;
        let l = inst.meta.lipschitz.expect("quadratic");
        let omega_sq = inst.meta.omega_sq.expect("simplex is bounded");
        let lo = LinearOracle::new(p.set.clone())?;
        let run = scg_run(p, &lo, SCGParams::new(l, omega_sq)?, p.start(), 300)?;
        let v = count_violations(&run.trace, |k| {
            15.0 * l * omega_sq / (2.0 * (k + 1) as f64 * (k + 2) as f64) + slack(&inst)
        });
        t.add(v, 300, || {
            format!("seed {}: {v} bound violations", inst.spec.seed)
        });
        for row in run.trace.rows.iter() {
            t.check(row.grad_calls == row.k, || {
                format!(
                    "seed {}: {} gradient calls at k = {}",
                    inst.spec.seed, row.grad_calls, row.k
                )
            });
        }
        for (k, (calls, cap)) in run.lo_per_step.iter().zip(&run.lo_caps).enumerate() {
            t.check(calls <= cap, || {
                format!(
                    "seed {}: step {} used {calls} > {cap} oracle calls",
                    inst.spec.seed,
                    k + 1
                )
            });
        }
    }
    Ok(("5 simplex-qp (n=30, m=15), k ≤ 300".into(), "scg"))
}

fn restart_linear(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let mu = 0.1;
    let inst = generate_problem(
        &InstanceSpec::new(ProblemTag::StronglyConvexQp, 40, 20, seed + 900).with_mu(mu),
    )?;
    let p = &inst.problem;
    let l = inst.meta.lipschitz.expect("quadratic");
    let z0 = p.start().clone();
    let r0 = (&z0 - inst.x_star()).norm();
    let cfg = RestartConfig::new(mu, r0, 1.0, l)?;
    let eps = cfg.guarantee(8);
    let run = restart_run(p, &DistanceGenerator::euclidean(), &cfg, &z0, eps)?;
    t.check(run.epochs == 8, || {
        format!("{} epochs planned instead of 8", run.epochs)
    });
    for (p_idx, w) in run.epoch_gaps.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        t.check(ratio <= 0.25, || {
            format!("epoch {}: gap ratio {ratio:.4}", p_idx + 1)
        });
    }
    t.check(run.violations.is_empty(), || {
        format!("epochs over their guarantee: {:?}", run.violations)
    });
    let ratios: Vec<String> = run
        .epoch_gaps
        .windows(2)
        .map(|w| format!("{:.4}", w[1] / w[0]))
        .collect();
    t.note(format!(
        "inner steps {}, ratios [{}]",
        cfg.inner_steps(),
        ratios.join(", ")
    ));
    Ok((
        format!("strongly-convex-qp n=40 m=20 μ={mu} seed {}", seed + 900),
        "restart",
    ))
}

fn universal(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let inst = generate_problem(&InstanceSpec::new(
        ProblemTag::NonsmoothL1,
        10,
        1,
        seed + 1000,
    ))?;
    let h = DistanceGenerator::euclidean();
    let cfg = UniversalConfig::new(1e-2, 1.0)?;
    let run = universal_run(&inst.problem, &h, &cfg, inst.problem.start(), 1_000_000)?;
    t.check(run.reached, || {
        "nonsmooth instance did not reach ε = 1e-2".into()
    });
    t.note(format!(
        "nonsmooth: {} steps, {} oracle calls",
        run.doublings.len(),
        run.oracle_calls()
    ));

    let qp = generate_problem(
        &InstanceSpec::new(ProblemTag::StronglyConvexQp, 30, 15, seed + 1001).with_mu(0.01),
    )?;
    let l0 = 1.0;
    let cfg = UniversalConfig::new(1e-8, l0)?;
    let run = universal_run(&qp.problem, &h, &cfg, qp.problem.start(), 100_000)?;
    let n = run.doublings.len() as f64;
    let l_n = *run.l_hist.last().expect("nonempty");
    let allowed = 4.0 * n + 2.0 * (l_n / l0).log2() + 4.0;
    let calls = run.oracle_calls() as f64;
    t.check(run.reached, || "smooth instance did not reach ε".into());
    t.check(calls <= allowed, || {
        format!("{calls} oracle calls above {allowed}")
    });
    t.note(format!(
        "smooth: N = {n}, {calls} oracle calls, allowance {allowed:.1}"
    ));
    Ok((
        "nonsmooth-l1 n=10 and strongly-convex-qp n=30".into(),
        "universal",
    ))
}

fn smoothing(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let (n, m) = (20, 10);
    let inst = generate_problem(&InstanceSpec::new(
        ProblemTag::UniformFit,
        n,
        m,
        seed + 1100,
    ))?;
    let (a, b) = (
        inst.a.clone().expect("fit data"),
        inst.b.clone().expect("fit data"),
    );
    let h = DistanceGenerator::entropy_simplex(n);
    let dx = h.diameter.expect("entropy diameter");
    let mut rng = SeededRng::new(seed + 1101);
    for kind in [SmoothingKind::SoftmaxUniformFit, SmoothingKind::HuberL1Fit] {
        let probe = SmoothedProblem::new(kind, a.clone(), b.clone(), 1.0)?.with_l1_primal(true);
        let tau = choose_tau(probe.norm_a(), 100, dx, probe.dual_diameter());
        let sp = SmoothedProblem::new(kind, a.clone(), b.clone(), tau)?.with_l1_primal(true);
        let dw = sp.dual_diameter();
        for i in 0..1000 {
            let x = if i % 2 == 0 {
                inst.problem.set.sample(&mut rng)
            } else {
                rng.normal_vector(n)
            };
            let diff = sp.nonsmooth_value(&x) - sp.value(&x);
            let tol = 1e-12 * (1.0 + sp.nonsmooth_value(&x).abs());
            t.check(diff >= -tol && diff <= tau * dw + tol, || {
                format!("{kind:?}: sandwich fails, Ψ − Ψ_τ = {diff:e}")
            });
        }
    }
    let probe = SmoothedProblem::new(SmoothingKind::SoftmaxUniformFit, a.clone(), b.clone(), 1.0)?
        .with_l1_primal(true);
    let (norm_a, dw) = (probe.norm_a(), probe.dual_diameter());
    for big_n in [100u64, 1000] {
        let tau = choose_tau(norm_a, big_n, dx, dw);
        let sp = SmoothedProblem::new(SmoothingKind::SoftmaxUniformFit, a.clone(), b.clone(), tau)?
            .with_l1_primal(true);
        let (x, _) = smoothed_run(
            &sp,
            &inst.problem.set,
            &h,
            inst.problem.start(),
            big_n as usize,
            None,
        )?;
        let gap = sp.nonsmooth_value(&x) - inst.psi_min();
        let bound = smoothing_bound(norm_a, big_n, dx, dw, 0.0);
        t.check(gap <= bound, || {
            format!("N = {big_n}: gap {gap:e} above {bound:e}")
        });
        t.note(format!("N = {big_n}: gap {gap:.3e}, bound {bound:.3e}"));
    }
    Ok((
        format!("uniform-fit n={n} m={m} seed {}", seed + 1100),
        "smoothing",
    ))
}

fn cg_abpgm_rate(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let n = 10;
    let mut rng = SeededRng::new(seed + 1200);
    for _ in 0..5 {
        let b = rng.normal_vector(n);
        let x_star = project_simplex(&b);
        let psi_min = 0.5 * (&x_star - &b).norm_squared();
        let set = FeasibleSet::simplex(n);
        let p = CompositeProblem::new(
            SmoothPart::half_sq_dist(b),
            NonsmoothPart::zero(),
            set.clone(),
        )?
        .with_reference(x_star, psi_min);
        let glo = GeneralizedLinearOracle::plain(set)?;
        let (_, trace) = cg_inexact_abpgm_run(&p, &glo, 1.0, p.start(), 1000)?;
        let v = count_violations(&trace, |k| cg_inexact_bound(1.0, 1.0, k) + REFERENCE_SLACK);
        t.add(v, 1000, || format!("{v} bound violations"));
        let prox = trace.last().map_or(0, |r| r.prox_calls);
        t.check(prox == 0, || format!("{prox} prox calls recorded"));
    }
    Ok((
        "5 seeded ½‖x − b‖² over the 10-simplex, N ≤ 1000".into(),
        "cg-abpgm",
    ))
}

fn geometry_properties(seed: u64, t: &mut Tally) -> Result<(String, &'static str)> {
    let mut rng = SeededRng::new(seed + 1300);
    let lower = Vector::from_vec(vec![-1.0, 0.0, 2.0]);
    let upper = Vector::from_vec(vec![1.0, 0.5, 5.0]);
    let dgfs = [
        (DistanceGenerator::euclidean(), FeasibleSet::whole_space(3)),
        (
            DistanceGenerator::entropy_simplex(4),
            FeasibleSet::simplex(4),
        ),
        (
            DistanceGenerator::fermi_dirac(lower.clone(), upper.clone())?,
            FeasibleSet::boxed(lower, upper)?,
        ),
        (DistanceGenerator::quartic(), FeasibleSet::whole_space(3)),
    ];
    for (h, set) in &dgfs {
        for _ in 0..1000 {
            let x = interior_sample(h, set, &mut rng);
            let y = interior_sample(h, set, &mut rng);
            let z = interior_sample(h, set, &mut rng);
            let res = three_point_residual(h, &x, &y, &z)?;
            t.check(res.abs() <= 1e-10, || {
                format!("{:?}: three-point residual {res:e}", h.kind)
            });
        }
    }

    let b = rng.normal_vector(3);
    let parts = [
        NonsmoothPart::l1(0.7),
        NonsmoothPart::half_sq_dist(b.clone()),
        NonsmoothPart::l1_fit(b),
    ];
    for g in &parts {
        for c in [0.3, 1.0, 2.5] {
            for _ in 0..50 {
                let u = rng.normal_vector(3) * 2.0;
                let res = moreau_identity_check(g, c, &u)?;
                t.check(res <= 1e-12, || {
                    format!("{:?}: Moreau residual {res:e}", g.kind)
                });
            }
        }
    }

    let env_parts = [
        NonsmoothPart::l1(0.7),
        NonsmoothPart::half_sq_dist(rng.normal_vector(3)),
        NonsmoothPart::indicator(FeasibleSet::cube(3, -0.5, 0.5)?),
    ];
    for r in &env_parts {
        for gamma in [0.2, 1.0] {
            for _ in 0..50 {
                let x = rng.normal_vector(3);
                let (_, grad) = moreau_envelope(r, gamma, &x)?;
                let step = 1e-6;
                let mut worst: f64 = 0.0;
                for i in 0..3 {
                    let mut up = x.clone();
                    up[i] += step;
                    let mut down = x.clone();
                    down[i] -= step;
                    let fd = (moreau_envelope(r, gamma, &up)?.0
                        - moreau_envelope(r, gamma, &down)?.0)
                        / (2.0 * step);
                    worst = worst.max((fd - grad[i]).abs());
                }
                t.check(worst <= 1e-5, || {
                    format!("{:?}: envelope gradient off by {worst:e}", r.kind)
                });
            }
        }
    }

    prox_grid_checks(&mut rng, t)?;
    Ok((
        "four generators, three conjugate pairs, grid checks in 1-2D".into(),
        "geometry",
    ))
}

fn grid_argmin_1d(lo: f64, hi: f64, steps: usize, phi: impl Fn(f64) -> f64) -> f64 {
    (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .map(|t| (phi(t), t))
        .fold((f64::INFINITY, lo), |a, b| if b.0 < a.0 { b } else { a })
        .1
}

fn prox_grid_checks(rng: &mut SeededRng, t: &mut Tally) -> Result<()> {
    let v1 = |x: f64| Vector::from_vec(vec![x]);
    // ℓ₁ prox on the line
    for _ in 0..20 {
        let x = rng.uniform_in(-3.0, 3.0);
        let gamma = rng.uniform_in(0.1, 1.5);
        let p = NonsmoothPart::l1(1.0).prox(&v1(x), gamma)?[0];
        let g = grid_argmin_1d(-4.0, 4.0, 80_000, |u| {
            gamma * u.abs() + 0.5 * (u - x).powi(2)
        });
        t.check((p - g).abs() <= 1e-3, || format!("ℓ₁ prox {p} vs grid {g}"));
    }
    // entropic prox on the 2-simplex, parametrized by its first coordinate
    let h = DistanceGenerator::entropy_simplex(2);
    let pm = ProxMapping::new(h.clone(), NonsmoothPart::zero(), FeasibleSet::simplex(2));
    for _ in 0..20 {
        let s = rng.uniform_in(0.05, 0.95);
        let x = Vector::from_vec(vec![s, 1.0 - s]);
        let y = rng.normal_vector(2);
        let p = pm.apply(&x, &y, 1.0)?[0];
        let g = grid_argmin_1d(1e-9, 1.0 - 1e-9, 100_000, |u| {
            let w = Vector::from_vec(vec![u, 1.0 - u]);
            y.dot(&w) + bregman_divergence(&h, &w, &x).unwrap_or(f64::INFINITY)
        });
        t.check((p - g).abs() <= 1e-3, || {
            format!("entropic prox {p} vs grid {g}")
        });
    }
    // Fermi-Dirac prox on an interval
    let (a, b) = (Vector::from_vec(vec![-1.0]), Vector::from_vec(vec![2.0]));
    let fd = DistanceGenerator::fermi_dirac(a.clone(), b.clone())?;
    let pm = ProxMapping::new(fd.clone(), NonsmoothPart::zero(), FeasibleSet::boxed(a, b)?);
    for _ in 0..20 {
        let x = v1(rng.uniform_in(-0.9, 1.9));
        let y = v1(rng.normal());
        let p = pm.apply(&x, &y, 1.0)?[0];
        let g = grid_argmin_1d(-1.0, 2.0, 300_000, |u| {
            y[0] * u + bregman_divergence(&fd, &v1(u), &x).unwrap_or(f64::INFINITY)
        });
        t.check((p - g).abs() <= 1e-3, || {
            format!("fermi-dirac prox {p} vs grid {g}")
        });
    }
    // euclidean prox of ℓ₁ on a 2D box
    let set = FeasibleSet::cube(2, -1.0, 1.0)?;
    let pm = ProxMapping::new(DistanceGenerator::euclidean(), NonsmoothPart::l1(0.5), set);
    for _ in 0..5 {
        let x = rng.uniform_vector(2, -1.0, 1.0);
        let y = rng.normal_vector(2);
        let p = pm.apply(&x, &y, 1.0)?;
        let steps = 800;
        let mut best = (f64::INFINITY, Vector::zeros(2));
        for i in 0..=steps {
            for j in 0..=steps {
                let u = Vector::from_vec(vec![
                    -1.0 + 2.0 * i as f64 / steps as f64,
                    -1.0 + 2.0 * j as f64 / steps as f64,
                ]);
                let v = 0.5 * u.lp_norm(1) + y.dot(&(&u - &x)) + 0.5 * (&u - &x).norm_squared();
                if v < best.0 {
                    best = (v, u);
                }
            }
        }
        let err = (&p - &best.1).amax();
        t.check(err <= 1e-3 + 2.0 / steps as f64, || {
            format!("box ℓ₁ prox off grid by {err:e}")
        });
    }
    Ok(())
}
