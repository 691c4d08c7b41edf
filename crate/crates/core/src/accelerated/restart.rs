use super::abpgm::abpgm_run;
use crate::error::check_dim;
use crate::geometry::DistanceGenerator;
use crate::problem::{evaluate_objective, CompositeProblem};
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

/// Slack before an epoch is reported as violating its guarantee.
const GUARANTEE_SLACK: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestartConfig {
    /// Quadratic error bound constant.
    pub mu: f64,
    /// `‖z⁰ − x*‖ ≤ R₀`.
    pub r0: f64,
    /// Bound of `h` on the unit ball.
    pub omega: f64,
    pub lipschitz: f64,
}

impl RestartConfig {
    pub fn new(mu: f64, r0: f64, omega: f64, lipschitz: f64) -> Result<Self> {
        if !(mu > 0.0 && r0 > 0.0 && omega > 0.0 && lipschitz > 0.0) {
            return Err(Error::Configuration(
                "restart needs positive μ, R₀, Ω and L_f".into(),
            ));
        }
        Ok(Self {
            mu,
            r0,
            omega,
            lipschitz,
        })
    }

    /// `⌈2√(ΩL/μ)⌉ − 1`, at least 1.
    pub fn inner_steps(&self) -> usize {
        (((2.0 * (self.omega * self.lipschitz / self.mu).sqrt()).ceil() as usize).saturating_sub(1))
            .max(1)
    }

    pub fn radius(&self, p: u32) -> f64 {
        self.r0 * 0.5f64.powi(p as i32)
    }

    /// `max(0, ⌈½ log₂(μR₀²/(2ε))⌉)`.
    pub fn epochs_for(&self, eps: f64) -> u32 {
        (0.5 * (self.mu * self.r0 * self.r0 / (2.0 * eps)).log2())
            .ceil()
            .max(0.0) as u32
    }

    /// `μR₀²·2^{−2p}/2`.
    pub fn guarantee(&self, p: u32) -> f64 {
        0.5 * self.mu * self.radius(p).powi(2)
    }
}

#[derive(Clone, Debug)]
pub struct RestartRun {
    pub z: Vector,
    pub trace: SolverTrace,
    /// `Ψ(z^p) − Ψ_min` for `p = 0..=epochs` when `Ψ_min` is known.
    pub epoch_gaps: Vec<f64>,
    /// Epochs whose gap exceeded the guarantee by more than 10%.
    pub violations: Vec<u32>,
    pub epochs: u32,
}

/// Restarted accelerated method; each epoch runs the inner method from `z^p` with `h` recentered at `z^p`.
pub fn restart_run(
    problem: &CompositeProblem,
    h: &DistanceGenerator,
    cfg: &RestartConfig,
    z0: &Vector,
    eps: f64,
) -> Result<RestartRun> {
    check_dim(problem.dim(), z0.len())?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(
            "target accuracy must be positive".into(),
        ));
    }
    let n_inner = cfg.inner_steps();
    let psi_min = problem.psi_min();
    let mut rec = TraceRecorder::new("restart", psi_min);
    rec.meta("inner_steps", n_inner);
    let mut z = z0.clone();
    let psi0 = evaluate_objective(problem, &z)?;
    rec.epoch = Some(0);
    rec.record(0, psi0, None, 0.0);
    let mut epoch_gaps = Vec::new();
    if let Some(m) = psi_min {
        epoch_gaps.push(psi0 - m);
    }
    let planned = cfg.epochs_for(eps);
    let epochs = match psi_min {
        Some(m) if psi0 - m <= eps => 0,
        _ => planned,
    };
    let mut violations = Vec::new();
    let mut k = 0u64;
    for p in 0..epochs {
        let hp = h.recentered(&z, cfg.radius(p))?;
        let (x, inner) = abpgm_run(problem, &hp, cfg.lipschitz, &z, n_inner)?;
        rec.epoch = Some(p + 1);
        for row in inner.rows.iter().skip(1) {
            k += 1;
            rec.counts.grad += 1;
            rec.counts.prox += 1;
            rec.record(k, row.objective, None, row.step);
        }
        z = x;
        if let Some(m) = psi_min {
            let gap = evaluate_objective(problem, &z)? - m;
            epoch_gaps.push(gap);
            if gap > GUARANTEE_SLACK * cfg.guarantee(p + 1) {
                violations.push(p + 1);
                rec.warn(format!(
                    "epoch {} gap {gap:e} exceeds its guarantee; μ or R₀ may be wrong",
                    p + 1
                ));
            }
        }
    }
    Ok(RestartRun {
        z,
        trace: rec.finish(),
        epoch_gaps,
        violations,
        epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FeasibleSet, NonsmoothPart, SmoothPart};
    use crate::Matrix;

    fn scaled_norm(mu: f64, n: usize) -> CompositeProblem {
        let q = Matrix::identity(n, n) * mu;
        CompositeProblem::new(
            SmoothPart::quadratic(q, Vector::zeros(n)),
            NonsmoothPart::zero(),
            FeasibleSet::whole_space(n),
        )
        .unwrap()
        .with_reference(Vector::zeros(n), 0.0)
    }

    #[test]
    fn schedule_constants() {
        let cfg = RestartConfig::new(1.0, 4.0, 1.0, 4.0).unwrap();
        assert_eq!(cfg.inner_steps(), 3);
        assert_eq!(cfg.radius(2), 1.0);
        assert_eq!(cfg.epochs_for(8.0), 0);
        assert_eq!(cfg.epochs_for(0.5), 2);
    }

    #[test]
    fn gap_quarters_on_isotropic_quadratic() {
        let p = scaled_norm(0.5, 4);
        let z0 = Vector::from_element(4, 1.0);
        let cfg = RestartConfig::new(0.5, z0.norm(), 1.0, 0.5).unwrap();
        let run = restart_run(&p, &DistanceGenerator::euclidean(), &cfg, &z0, 1e-8).unwrap();
        assert!(run.violations.is_empty());
        for w in run.epoch_gaps.windows(2) {
            assert!(w[1] <= 0.25 * w[0] + 1e-300);
        }
    }

    #[test]
    fn loose_target_needs_no_epochs() {
        let p = scaled_norm(1.0, 2);
        let z0 = Vector::from_element(2, 1.0);
        let cfg = RestartConfig::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let run = restart_run(&p, &DistanceGenerator::euclidean(), &cfg, &z0, 10.0).unwrap();
        assert_eq!(run.epochs, 0);
        assert_eq!(run.z, z0);
        assert_eq!(run.trace.rows.len(), 1);
    }
}
