use crate::error::check_dim;
use crate::linalg;
use crate::problem::{sign0, FeasibleSet, NonsmoothKind, NonsmoothPart, SetKind};
use crate::{Error, Matrix, Result, Vector};

const POWER_MAX_ITER: usize = 10_000;
const POWER_TOL: f64 = 1e-10;

/// `y ↦ argmin_{s ∈ X} ⟨y, s⟩`, lowest index on ties.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOracle {
    pub domain: FeasibleSet,
}

impl LinearOracle {
    pub fn new(domain: FeasibleSet) -> Result<Self> {
        if !domain.is_bounded() {
            return Err(Error::UnsupportedDomain(
                "linear oracle needs a bounded set".into(),
            ));
        }
        Ok(Self { domain })
    }

    pub fn answer(&self, y: &Vector) -> Result<Vector> {
        linear_oracle(&self.domain, y)
    }
}

pub fn linear_oracle(domain: &FeasibleSet, y: &Vector) -> Result<Vector> {
    check_dim(domain.dim(), y.len())?;
    let n = y.len();
    Ok(match &domain.kind {
        SetKind::WholeSpace => {
            return Err(Error::UnsupportedDomain(
                "linear oracle over an unbounded set".into(),
            ))
        }
        SetKind::Simplex => linalg::basis(n, linalg::argmin(y)),
        SetKind::Box { lower, upper } => Vector::from_iterator(
            n,
            (0..n).map(|i| {
                if y[i] > 0.0 {
                    lower[i]
                } else if y[i] < 0.0 {
                    upper[i]
                } else {
                    lower[i]
                }
            }),
        ),
        SetKind::L1Ball { radius } => {
            let i = linalg::argmax(&y.abs());
            let s = if y[i] < 0.0 { -1.0 } else { 1.0 };
            linalg::basis(n, i) * (-radius * s)
        }
        SetKind::L2Ball { radius } => {
            let norm = y.norm();
            if norm == 0.0 {
                linalg::basis(n, 0) * -*radius
            } else {
                y * (-radius / norm)
            }
        }
        SetKind::Spectrahedron { order } => {
            let m = Matrix::from_column_slice(*order, *order, y.as_slice());
            let sym = (&m + m.transpose()) * 0.5;
            let (lambda, u) = min_eigenpair(&sym);
            if lambda < 0.0 {
                let p = &u * u.transpose();
                Vector::from_column_slice(p.as_slice())
            } else {
                Vector::zeros(n)
            }
        }
    })
}

/// Smallest eigenpair of a symmetric matrix via power iteration on `σI − Y`.
pub fn min_eigenpair(y: &Matrix) -> (f64, Vector) {
    let n = y.nrows();
    let sigma = y.norm();
    let shifted = Matrix::identity(n, n) * sigma - y;
    let mut u = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..POWER_MAX_ITER {
        let w = &shifted * &u;
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = w / norm;
        let moved = (&next - &u).amax();
        u = next;
        if moved <= POWER_TOL {
            break;
        }
    }
    (u.dot(&(y * &u)), u)
}

/// `y ↦ argmin_{x ∈ X} ⟨y, x⟩ + r(x)` for the shipped `(X, r)` pairs.
#[derive(Clone, Debug)]
pub struct GeneralizedLinearOracle {
    pub domain: FeasibleSet,
    pub r: NonsmoothPart,
}

impl GeneralizedLinearOracle {
    pub fn new(domain: FeasibleSet, r: NonsmoothPart) -> Result<Self> {
        if !domain.is_bounded() {
            return Err(Error::UnsupportedDomain(
                "generalized linear oracle needs a bounded set".into(),
            ));
        }
        let supported = match (&r.kind, &domain.kind) {
            (NonsmoothKind::Zero, _) => true,
            (NonsmoothKind::Indicator(s), _) => *s == domain,
            (
                NonsmoothKind::L1 { .. },
                SetKind::Box { .. } | SetKind::Simplex | SetKind::L1Ball { .. },
            ) => true,
            _ => false,
        };
        if !supported {
            return Err(Error::Unsupported(format!(
                "no generalized linear oracle for {:?} over {:?}",
                r.kind, domain.kind
            )));
        }
        Ok(Self { domain, r })
    }

    /// The oracle for `r = 0`.
    pub fn plain(domain: FeasibleSet) -> Result<Self> {
        Self::new(domain, NonsmoothPart::zero())
    }

    pub fn answer(&self, y: &Vector) -> Result<Vector> {
        check_dim(self.domain.dim(), y.len())?;
        let NonsmoothKind::L1 { weight } = self.r.kind else {
            return linear_oracle(&self.domain, y);
        };
        Ok(match &self.domain.kind {
            SetKind::Box { lower, upper } => Vector::from_iterator(
                y.len(),
                (0..y.len()).map(|i| {
                    let cost = |t: f64| y[i] * t + weight * t.abs();
                    let mut candidates = Vec::with_capacity(3);
                    if lower[i] <= 0.0 && upper[i] >= 0.0 {
                        candidates.push(0.0);
                    }
                    candidates.push(lower[i]);
                    candidates.push(upper[i]);
                    let mut best = candidates[0];
                    for &c in &candidates[1..] {
                        if cost(c) < cost(best) {
                            best = c;
                        }
                    }
                    best
                }),
            ),
            SetKind::L1Ball { radius } => {
                let i = linalg::argmax(&y.abs());
                if y[i].abs() > weight {
                    linalg::basis(y.len(), i) * (-radius * sign0(y[i]))
                } else {
                    Vector::zeros(y.len())
                }
            }
            _ => linear_oracle(&self.domain, y)?,
        })
    }
}

pub fn generalized_linear_oracle(
    domain: &FeasibleSet,
    r: &NonsmoothPart,
    y: &Vector,
) -> Result<Vector> {
    GeneralizedLinearOracle::new(domain.clone(), r.clone())?.answer(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn linear_oracle_examples() {
        assert_eq!(
            linear_oracle(&FeasibleSet::simplex(3), &v(&[1.0, 0.0, -2.0])).unwrap(),
            v(&[0.0, 0.0, 1.0])
        );
        let ball = FeasibleSet::l1_ball(2, 2.0);
        let s = linear_oracle(&ball, &v(&[1.0, -3.0])).unwrap();
        assert_eq!(s, v(&[0.0, 2.0]));
        let verts = [
            v(&[2.0, 0.0]),
            v(&[-2.0, 0.0]),
            v(&[0.0, 2.0]),
            v(&[0.0, -2.0]),
        ];
        let best = verts
            .iter()
            .map(|p| p.dot(&v(&[1.0, -3.0])))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(s.dot(&v(&[1.0, -3.0])), best);

        let spec = FeasibleSet::spectrahedron(2);
        let y = Vector::from_column_slice(Matrix::from_diagonal(&v(&[1.0, -1.0])).as_slice());
        let p = linear_oracle(&spec, &y).unwrap();
        let expected = Vector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]);
        assert!((p - expected).amax() < 1e-9);
        assert!(matches!(
            linear_oracle(&FeasibleSet::whole_space(2), &v(&[1.0, 1.0])),
            Err(Error::UnsupportedDomain(_))
        ));
    }

    #[test]
    fn lowest_index_on_ties() {
        assert_eq!(
            linear_oracle(&FeasibleSet::simplex(3), &v(&[0.0, 0.0, 0.0])).unwrap(),
            v(&[1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn glo_examples() {
        let bx = FeasibleSet::cube(3, -1.0, 1.0).unwrap();
        let glo = GeneralizedLinearOracle::new(bx.clone(), NonsmoothPart::l1(1.0)).unwrap();
        assert_eq!(
            glo.answer(&v(&[2.0, 0.5, -3.0])).unwrap(),
            v(&[-1.0, 0.0, 1.0])
        );
        assert_eq!(glo.answer(&Vector::zeros(3)).unwrap(), Vector::zeros(3));
        let plain = GeneralizedLinearOracle::plain(bx.clone()).unwrap();
        let y = v(&[0.3, -0.2, 0.0]);
        assert_eq!(plain.answer(&y).unwrap(), linear_oracle(&bx, &y).unwrap());
        assert!(
            GeneralizedLinearOracle::new(FeasibleSet::l2_ball(3, 1.0), NonsmoothPart::l1(1.0))
                .is_err()
        );
    }

    #[test]
    fn oracles_beat_sampled_points() {
        let mut rng = SeededRng::new(21);
        let sets = [
            FeasibleSet::simplex(4),
            FeasibleSet::cube(4, -0.5, 2.0).unwrap(),
            FeasibleSet::l1_ball(4, 1.3),
            FeasibleSet::l2_ball(4, 0.8),
            FeasibleSet::spectrahedron(3),
        ];
        for set in sets {
            for _ in 0..20 {
                let y = rng.normal_vector(set.dim());
                let s = linear_oracle(&set, &y).unwrap();
                assert!(set.contains(&s));
                for _ in 0..1000 {
                    let u = set.sample(&mut rng);
                    assert!(y.dot(&s) <= y.dot(&u) + 1e-10, "{:?}", set.kind);
                }
            }
        }
        let r = NonsmoothPart::l1(0.4);
        for set in [
            FeasibleSet::cube(3, -1.0, 2.0).unwrap(),
            FeasibleSet::l1_ball(3, 2.0),
        ] {
            let glo = GeneralizedLinearOracle::new(set.clone(), r.clone()).unwrap();
            for _ in 0..20 {
                let y = rng.normal_vector(3);
                let s = glo.answer(&y).unwrap();
                for _ in 0..500 {
                    let u = set.sample(&mut rng);
                    assert!(y.dot(&s) + r.value(&s) <= y.dot(&u) + r.value(&u) + 1e-10);
                }
            }
        }
    }
}
