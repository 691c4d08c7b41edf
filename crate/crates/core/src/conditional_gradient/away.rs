use super::{golden_section, LinearOracle, GOLDEN_TOL};
use crate::problem::CompositeProblem;
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Result, Vector};

const WEIGHT_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AwVariant {
    Away,
    Pairwise,
}

/// Convex-combination representation of an iterate over polytope vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomState {
    pub atoms: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl AtomState {
    pub fn vertex(a: Vector) -> Self {
        Self {
            atoms: vec![a],
            weights: vec![1.0],
        }
    }

    pub fn new(atoms: Vec<Vector>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidArgument(
                "atoms and weights must be nonempty and aligned".into(),
            ));
        }
        let s = Self { atoms, weights };
        s.check()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iterate(&self) -> Vector {
        let mut x = Vector::zeros(self.atoms[0].len());
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            x.axpy(*w, a, 1.0);
        }
        x
    }

    pub fn check(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_DRIFT_TOL || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InternalFault(format!(
                "atom weights drifted: sum = {sum}"
            )));
        }
        Ok(())
    }

    fn position(&self, a: &Vector) -> Option<usize> {
        self.atoms.iter().position(|b| b == a)
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.atoms.len() {
            if self.weights[i] <= 0.0 {
                self.atoms.remove(i);
                self.weights.remove(i);
            } else {
                i += 1;
            }
        }
    }
}

/// Away-step or pairwise conditional gradient for smooth `f` over a polytope.
///
/// Stops early once the Frank-Wolfe gap vanishes; the `gap` column is that gap.
pub fn awcg_run(
    problem: &CompositeProblem,
    lo: &LinearOracle,
    atoms0: AtomState,
    steps: usize,
    variant: AwVariant,
) -> Result<(Vector, AtomState, SolverTrace)> {
    if !problem.r.is_zero() {
        return Err(Error::Unsupported("away-step methods take r = 0".into()));
    }
    atoms0.check()?;
    let name = match variant {
        AwVariant::Away => "awcg",
        AwVariant::Pairwise => "pcg",
    };
    let mut rec = TraceRecorder::new(name, problem.psi_min());
    let mut state = atoms0;
    let mut x = state.iterate();
    let f = |x: &Vector| problem.f.value(x);
    let mut last_step = 0.0;
    for k in 0..=steps as u64 {
        let g = problem.f.gradient(&x)?;
        rec.counts.grad += 1;
        let p = lo.answer(&g)?;
        rec.counts.lo += 1;
        let fw_gap = g.dot(&(&x - &p));
        let fx = f(&x);
        rec.record(k, fx, Some(fw_gap.max(0.0)), last_step);
        if k == steps as u64 || fw_gap <= 1e-15 * fx.abs().max(1.0) {
            break;
        }
        let mut away_idx = 0;
        for (i, a) in state.atoms.iter().enumerate() {
            if g.dot(a) > g.dot(&state.atoms[away_idx]) {
                away_idx = i;
            }
        }
        let u = state.atoms[away_idx].clone();
        let lam_u = state.weights[away_idx];

        enum Move {
            Forward,
            Away,
            Pair,
        }
        let (mv, d, gamma_max) = match variant {
            AwVariant::Pairwise => (Move::Pair, &p - &u, lam_u),
            AwVariant::Away => {
                let away_gap = g.dot(&(&u - &x));
                if fw_gap >= away_gap || lam_u >= 1.0 {
                    (Move::Forward, &p - &x, 1.0)
                } else {
                    (Move::Away, &x - &u, lam_u / (1.0 - lam_u))
                }
            }
        };
        let mut evals = 0u64;
        let phi = |t: f64| f(&(&x + &d * t));
        let (mut gamma, f_gamma) = golden_section(
            |t| {
                evals += 1;
                phi(t)
            },
            0.0,
            gamma_max,
            GOLDEN_TOL,
        )
        .ok_or_else(|| Error::Oracle("non-finite objective in line search".into()))?;
        rec.counts.value += evals + 1;
        if gamma < gamma_max && phi(gamma_max) <= f_gamma {
            gamma = gamma_max;
        }
        let drop = gamma == gamma_max;

        match mv {
            Move::Forward => {
                for w in state.weights.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                match state.position(&p) {
                    Some(i) => state.weights[i] += gamma,
                    None => {
                        state.atoms.push(p.clone());
                        state.weights.push(gamma);
                    }
                }
                if drop {
                    state = AtomState::vertex(p.clone());
                }
            }
            Move::Away => {
                for w in state.weights.iter_mut() {
                    *w *= 1.0 + gamma;
                }
                state.weights[away_idx] = if drop {
                    0.0
                } else {
                    state.weights[away_idx] - gamma
                };
            }
            Move::Pair => {
                state.weights[away_idx] = if drop { 0.0 } else { lam_u - gamma };
                match state.position(&p) {
                    Some(i) => state.weights[i] += gamma,
                    None => {
                        state.atoms.push(p.clone());
                        state.weights.push(gamma);
                    }
                }
            }
        }
        state.prune();
        state.check()?;
        x = state.iterate();
        last_step = gamma;
    }
    Ok((x, state, rec.finish()))
}
