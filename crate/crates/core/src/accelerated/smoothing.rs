use super::abpgm::abpgm_core;
use crate::error::check_dim;
use crate::geometry::DistanceGenerator;
use crate::linalg;
use crate::problem::{CompositeProblem, FeasibleSet, NonsmoothPart, ReferenceOptimum, SmoothPart};
use crate::trace::SolverTrace;
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingKind {
    /// `max_i |⟨a_i,x⟩ − b_i|` smoothed by entropy over the `2m`-simplex.
    SoftmaxUniformFit,
    /// `Σ|⟨a_i,x⟩ − b_i|` smoothed into Huber terms.
    HuberL1Fit,
}

/// `Ψ_τ = f + max_w {⟨Ax − b, w⟩ − τ h_W(w)}` for the two shipped dual domains.
#[derive(Clone, Debug)]
pub struct SmoothedProblem {
    pub kind: SmoothingKind,
    pub a: Matrix,
    pub b: Vector,
    pub tau: f64,
    pub f: SmoothPart,
    /// Measure `‖A‖` against the ℓ₁ norm on x (entropy geometry) instead of ℓ₂.
    pub l1_primal: bool,
    row_norms: Vector,
}

impl SmoothedProblem {
    pub fn new(kind: SmoothingKind, a: Matrix, b: Vector, tau: f64) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(
                "smoothing parameter τ must be positive".into(),
            ));
        }
        let row_norms = Vector::from_iterator(a.nrows(), a.row_iter().map(|r| r.norm()));
        if kind == SmoothingKind::HuberL1Fit && row_norms.iter().any(|&v| v == 0.0) {
            return Err(Error::InvalidArgument(
                "huber smoothing needs nonzero rows".into(),
            ));
        }
        Ok(Self {
            kind,
            a,
            b,
            tau,
            f: SmoothPart::zero(),
            l1_primal: false,
            row_norms,
        })
    }

    pub fn with_smooth_part(mut self, f: SmoothPart) -> Self {
        self.f = f;
        self
    }

    pub fn with_l1_primal(mut self, on: bool) -> Self {
        self.l1_primal = on;
        self
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// `max h_W` over the dual domain.
    pub fn dual_diameter(&self) -> f64 {
        match self.kind {
            SmoothingKind::SoftmaxUniformFit => (2.0 * self.rows() as f64).ln(),
            SmoothingKind::HuberL1Fit => 0.5 * self.row_norms.sum(),
        }
    }

    /// `‖A‖` between the primal norm and the dual-domain norm.
    pub fn norm_a(&self) -> f64 {
        if self.l1_primal {
            self.a.amax()
        } else {
            self.row_norms.max()
        }
    }

    /// Gradient Lipschitz constant of `Ψ_τ`.
    pub fn lipschitz(&self) -> f64 {
        let lf = self.f.lipschitz_grad.unwrap_or(0.0);
        match self.kind {
            SmoothingKind::SoftmaxUniformFit => lf + self.norm_a().powi(2) / self.tau,
            SmoothingKind::HuberL1Fit => {
                let mut w = self.a.clone();
                for (mut row, nrm) in w.row_iter_mut().zip(self.row_norms.iter()) {
                    row /= nrm.sqrt();
                }
                lf + linalg::spectral_radius_gram(&w) / self.tau
            }
        }
    }

    /// The unsmoothed term `max_i |t_i|` or `Σ|t_i|`.
    pub fn nonsmooth_value(&self, x: &Vector) -> f64 {
        let t = &self.a * x - &self.b;
        self.f.value(x)
            + match self.kind {
                SmoothingKind::SoftmaxUniformFit => t.amax(),
                SmoothingKind::HuberL1Fit => t.lp_norm(1),
            }
    }

    /// The maximizer `ŵ_τ(x)`, folded to `ℝ^m` for the softmax variant.
    pub fn dual_point(&self, x: &Vector) -> Vector {
        let t = &self.a * x - &self.b;
        match self.kind {
            SmoothingKind::SoftmaxUniformFit => {
                let m = t.len();
                let scaled = Vector::from_iterator(
                    2 * m,
                    t.iter()
                        .map(|v| v / self.tau)
                        .chain(t.iter().map(|v| -v / self.tau)),
                );
                let w = linalg::softmax(&scaled);
                Vector::from_iterator(m, (0..m).map(|i| w[i] - w[m + i]))
            }
            SmoothingKind::HuberL1Fit => Vector::from_iterator(
                t.len(),
                t.iter()
                    .zip(self.row_norms.iter())
                    .map(|(v, n)| (v / (self.tau * n)).clamp(-1.0, 1.0)),
            ),
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let t = &self.a * x - &self.b;
        let tau = self.tau;
        self.f.value(x)
            + match self.kind {
                SmoothingKind::SoftmaxUniformFit => {
                    let scaled: Vec<f64> = t
                        .iter()
                        .map(|v| v / tau)
                        .chain(t.iter().map(|v| -v / tau))
                        .collect();
                    tau * linalg::log_sum_exp(&scaled) - tau * (2.0 * t.len() as f64).ln()
                }
                SmoothingKind::HuberL1Fit => t
                    .iter()
                    .zip(self.row_norms.iter())
                    .map(|(v, n)| n * huber(v.abs() / n, tau))
                    .sum(),
            }
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        Ok(self.f.gradient(x)? + self.a.transpose() * self.dual_point(x))
    }

    /// `Ψ_τ` packaged as a smooth part with its Lipschitz constant.
    pub fn to_smooth_part(&self) -> SmoothPart {
        let (s1, s2) = (self.clone(), self.clone());
        SmoothPart::new(
            move |x| s1.value(x),
            move |x| s2.gradient(x).expect("smooth part has a gradient"),
        )
        .with_lipschitz(self.lipschitz())
    }
}

/// Runs the accelerated method on `Ψ_τ` over `set`; the trace records the unsmoothed objective.
pub fn smoothed_run(
    sp: &SmoothedProblem,
    set: &FeasibleSet,
    h: &DistanceGenerator,
    x0: &Vector,
    steps: usize,
    reference: Option<&ReferenceOptimum>,
) -> Result<(Vector, SolverTrace)> {
    let mut problem =
        CompositeProblem::new(sp.to_smooth_part(), NonsmoothPart::zero(), set.clone())?;
    if let Some(r) = reference {
        problem = problem.with_reference(r.x.clone(), r.value);
    }
    let run = abpgm_core(&problem, h, sp.lipschitz(), x0, steps, "smoothing", &|x| {
        Ok(sp.nonsmooth_value(x))
    })?;
    let mut trace = run.trace;
    trace.push_meta("tau", sp.tau);
    Ok((run.x, trace))
}

fn huber(s: f64, tau: f64) -> f64 {
    if s <= tau {
        s * s / (2.0 * tau)
    } else {
        s - tau / 2.0
    }
}

/// `τ = (2‖A‖/(N+1))·√(D_X/D_W)`.
pub fn choose_tau(norm_a: f64, horizon: u64, dx: f64, dw: f64) -> f64 {
    2.0 * norm_a / (horizon as f64 + 1.0) * (dx / dw).sqrt()
}

/// `4‖A‖√(D_X·D_W)/(N+1) + 4L_f·D_X/(N+1)²`.
pub fn smoothing_bound(norm_a: f64, horizon: u64, dx: f64, dw: f64, lipschitz_f: f64) -> f64 {
    let np1 = horizon as f64 + 1.0;
    4.0 * norm_a * (dx * dw).sqrt() / np1 + 4.0 * lipschitz_f * dx / (np1 * np1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(kind: SmoothingKind, tau: f64) -> SmoothedProblem {
        SmoothedProblem::new(kind, Matrix::identity(1, 1), Vector::zeros(1), tau).unwrap()
    }

    #[test]
    fn softmax_examples() {
        let sp = scalar(SmoothingKind::SoftmaxUniformFit, 1.0);
        assert_eq!(sp.value(&Vector::zeros(1)), 0.0);
        let x = Vector::from_element(1, 1.0);
        let expected = ((1f64.exp() + (-1f64).exp()) / 2.0).ln();
        assert!((sp.value(&x) - expected).abs() < 1e-15);
        assert!((expected - 0.43378).abs() < 1e-5);
        // max over the 2-simplex of w₁ − w₂ − Σ w ln(2w), brute force
        let best = (0..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .map(|w: f64| {
                let ent = |v: f64| if v > 0.0 { v * (2.0 * v).ln() } else { 0.0 };
                w - (1.0 - w) - ent(w) - ent(1.0 - w)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - expected).abs() < 1e-8);
    }

    #[test]
    fn huber_quadratic_branch() {
        let tau = 0.4;
        let sp = scalar(SmoothingKind::HuberL1Fit, tau);
        assert!((sp.value(&Vector::from_element(1, tau / 2.0)) - tau / 8.0).abs() < 1e-15);
    }

    #[test]
    fn small_tau_does_not_overflow() {
        let sp = scalar(SmoothingKind::SoftmaxUniformFit, 1e-4);
        let v = sp.value(&Vector::from_element(1, 50.0));
        assert!((v - (50.0 - 1e-4 * 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn tau_choice() {
        assert_eq!(choose_tau(1.0, 1, 1.0, 1.0), 1.0);
        assert_eq!(choose_tau(2.0, 3, 4.0, 1.0), 2.0);
        assert_eq!(choose_tau(1.5, 9, 3.0, 3.0), choose_tau(1.5, 9, 7.0, 7.0));
    }
}
