use super::LinearOracle;
use crate::error::check_dim;
use crate::problem::CompositeProblem;
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

/// The concrete sliding schedule `β_k = 3L/(k+1)`, `γ_k = 3/(k+2)`, `η_k = LΩ²/(k(k+1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SCGParams {
    pub lipschitz: f64,
    pub omega_sq: f64,
}

impl SCGParams {
    pub fn new(lipschitz: f64, omega_sq: f64) -> Result<Self> {
        if !(lipschitz > 0.0 && omega_sq > 0.0) {
            return Err(Error::InvalidArgument(
                "sliding needs L_f > 0 and Ω² > 0".into(),
            ));
        }
        Ok(Self {
            lipschitz,
            omega_sq,
        })
    }

    pub fn beta(&self, k: u64) -> f64 {
        3.0 * self.lipschitz / (k as f64 + 1.0)
    }

    pub fn gamma(&self, k: u64) -> f64 {
        3.0 / (k as f64 + 2.0)
    }

    pub fn eta(&self, k: u64) -> f64 {
        self.lipschitz * self.omega_sq / (k as f64 * (k as f64 + 1.0))
    }

    /// `Γ_1 = 1`, `Γ_k = Γ_{k−1}(1 − γ_k)`.
    pub fn big_gamma(&self, k: u64) -> f64 {
        (2..=k).fold(1.0, |acc, j| acc * (1.0 - self.gamma(j)))
    }

    /// Oracle budget `⌈6β_kΩ²/η_k⌉` of the inner procedure at step `k`.
    pub fn lo_cap(&self, k: u64) -> u64 {
        inner_cap(self.beta(k), self.eta(k), self.omega_sq)
    }

    /// Checks `γ_1 = 1`, `Lγ_k ≤ β_k` and that `β_kγ_k/Γ_k` does not decrease up to `k_max`.
    pub fn validate(&self, k_max: u64) -> Result<()> {
        if (self.gamma(1) - 1.0).abs() > 1e-15 {
            return Err(Error::Configuration("γ_1 must equal 1".into()));
        }
        let mut prev = 0.0;
        let mut big = 1.0;
        for k in 1..=k_max {
            if k > 1 {
                big *= 1.0 - self.gamma(k);
            }
            if self.lipschitz * self.gamma(k) > self.beta(k) * (1.0 + 1e-12) {
                return Err(Error::Configuration(format!("Lγ_k > β_k at k = {k}")));
            }
            let ratio = self.beta(k) * self.gamma(k) / big;
            if ratio < prev * (1.0 - 1e-12) {
                return Err(Error::Configuration(format!(
                    "β_kγ_k/Γ_k decreases at k = {k}"
                )));
            }
            prev = ratio;
        }
        Ok(())
    }
}

fn inner_cap(beta: f64, eta: f64, omega_sq: f64) -> u64 {
    ((6.0 * beta * omega_sq / eta).ceil() as u64).max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CndgOutcome {
    pub point: Vector,
    /// `V_{g,u,β}` at the returned point.
    pub certificate: f64,
    pub lo_calls: u64,
    pub cap: u64,
}

/// Approximately minimizes `⟨g, x⟩ + (β/2)‖x − u‖²` over the oracle's domain by conditional gradient.
pub fn cndg_inner(
    g: &Vector,
    u: &Vector,
    beta: f64,
    eta: f64,
    lo: &LinearOracle,
) -> Result<CndgOutcome> {
    check_dim(g.len(), u.len())?;
    if !(beta > 0.0 && eta > 0.0) {
        return Err(Error::InvalidArgument(
            "inner procedure needs β > 0 and η > 0".into(),
        ));
    }
    let omega_sq = lo
        .domain
        .diameter_sq()
        .ok_or_else(|| Error::UnsupportedDomain("sliding needs a bounded set".into()))?;
    let cap = inner_cap(beta, eta, omega_sq);
    let mut ut = u.clone();
    let mut calls = 0;
    loop {
        let grad = g + (&ut - u) * beta;
        let v = lo.answer(&grad)?;
        calls += 1;
        let certificate = grad.dot(&(&ut - &v));
        if certificate <= eta {
            return Ok(CndgOutcome {
                point: ut,
                certificate,
                lo_calls: calls,
                cap,
            });
        }
        if calls >= cap {
            return Err(Error::InternalFault(format!(
                "inner conditional gradient exceeded its budget of {cap} oracle calls"
            )));
        }
        let d = &v - &ut;
        let alpha = ((-&grad).dot(&d) / (beta * d.norm_squared())).min(1.0);
        ut += d * alpha;
    }
}

#[derive(Clone, Debug)]
pub struct ScgRun {
    pub y: Vector,
    pub trace: SolverTrace,
    /// Oracle calls of the inner procedure at each outer step.
    pub lo_per_step: Vec<u64>,
    pub lo_caps: Vec<u64>,
}

/// Conditional gradient sliding for smooth `f` (`r = 0`).
pub fn scg_run(
    problem: &CompositeProblem,
    lo: &LinearOracle,
    params: SCGParams,
    x0: &Vector,
    steps: usize,
) -> Result<ScgRun> {
    check_dim(problem.dim(), x0.len())?;
    if !problem.r.is_zero() {
        return Err(Error::Unsupported("sliding takes r = 0".into()));
    }
    params.validate(steps as u64)?;
    let mut rec = TraceRecorder::new("scg", problem.psi_min());
    let mut x = x0.clone();
    let mut y = x0.clone();
    let (mut lo_per_step, mut lo_caps) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
    rec.record(0, problem.f.value(&y), None, 0.0);
    for k in 1..=steps as u64 {
        let gamma = params.gamma(k);
        let z = &y * (1.0 - gamma) + &x * gamma;
        let g = problem.f.gradient(&z)?;
        rec.counts.grad += 1;
        let out = cndg_inner(&g, &x, params.beta(k), params.eta(k), lo)?;
        rec.counts.lo += out.lo_calls;
        lo_per_step.push(out.lo_calls);
        lo_caps.push(out.cap);
        x = out.point;
        y = &y * (1.0 - gamma) + &x * gamma;
        rec.record(k, problem.f.value(&y), Some(out.certificate), gamma);
    }
    Ok(ScgRun {
        y,
        trace: rec.finish(),
        lo_per_step,
        lo_caps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FeasibleSet;
    use crate::rng::SeededRng;

    #[test]
    fn optimal_center_returns_after_one_call() {
        let lo = LinearOracle::new(FeasibleSet::simplex(3)).unwrap();
        let u = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let g = Vector::from_vec(vec![-1.0, 0.0, 0.0]);
        let out = cndg_inner(&g, &u, 1.0, 1e-6, &lo).unwrap();
        assert_eq!(out.lo_calls, 1);
        assert_eq!(out.point, u);
        let out = cndg_inner(&Vector::from_vec(vec![3.0, -1.0, 2.0]), &u, 1.0, 1e6, &lo).unwrap();
        assert_eq!(out.lo_calls, 1);
    }

    #[test]
    fn quadratic_subproblem_meets_certificate_within_cap() {
        let mut rng = SeededRng::new(8);
        let lo = LinearOracle::new(FeasibleSet::simplex(5)).unwrap();
        let u = rng.simplex_point(5);
        let g = rng.normal_vector(5);
        let out = cndg_inner(&g, &u, 1.0, 1e-3, &lo).unwrap();
        assert!(out.certificate <= 1e-3);
        assert!(out.lo_calls <= (6.0 * 2.0 / 1e-3f64).ceil() as u64);
    }

    #[test]
    fn schedule_satisfies_its_conditions() {
        let p = SCGParams::new(2.0, 2.0).unwrap();
        assert_eq!(p.gamma(1), 1.0);
        p.validate(10_000).unwrap();
        assert!((p.big_gamma(3) - (1.0 - 0.75) * (1.0 - 0.6)).abs() < 1e-15);
    }
}
