//! ADMM, proximal ADMM and Chambolle-Pock for `Ψ(x) = g(Ax) + r(x)`.

use crate::error::check_dim;
use crate::linalg;
use crate::problem::NonsmoothPart;
use crate::trace::{SolverTrace, TraceRecorder};
use crate::{Error, Matrix, Result, Vector};

const PSD_TOL: f64 = 1e-10;
const STEP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SplitProblem {
    pub g: NonsmoothPart,
    pub r: NonsmoothPart,
    pub a: Matrix,
    pub operator_norm: f64,
}

impl SplitProblem {
    pub fn new(g: NonsmoothPart, r: NonsmoothPart, a: Matrix) -> Result<Self> {
        if !g.has_prox() || !r.has_prox() {
            return Err(Error::Unsupported("both g and r need prox oracles".into()));
        }
        let operator_norm = linalg::operator_norm(&a);
        Ok(Self {
            g,
            r,
            a,
            operator_norm,
        })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        self.g.value(&(&self.a * x)) + self.r.value(x)
    }

    fn is_identity(&self) -> bool {
        self.a.is_square() && self.a == Matrix::identity(self.rows(), self.cols())
    }
}

/// `g(z) + g*(y) − ⟨y, z⟩`, nonnegative by the Fenchel inequality.
pub fn fenchel_gap(g: &NonsmoothPart, z: &Vector, y: &Vector) -> Result<f64> {
    Ok(g.value(z) + g.conjugate_value(y)? - y.dot(z))
}

/// Proximal term `½‖· − ·ᵏ‖²_M` in an AD-PMM update.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxTerm {
    Zero,
    /// `M = (1/τ)I − cAᵀA`, which turns the x-update into a prox step of `r`.
    Linearized {
        tau: f64,
    },
    Matrix(Matrix),
}

impl ProxTerm {
    fn materialize(&self, dim: usize, c: f64, a: &Matrix) -> Matrix {
        match self {
            Self::Zero => Matrix::zeros(dim, dim),
            Self::Linearized { tau } => Matrix::identity(dim, dim) / *tau - a.transpose() * a * c,
            Self::Matrix(m) => m.clone(),
        }
    }
}

/// Proximal gradient used for x-updates without a closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerSolver {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerSolver {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ADMMConfig {
    pub c: f64,
    pub m1: ProxTerm,
    pub m2: ProxTerm,
    pub inner: Option<InnerSolver>,
}

impl ADMMConfig {
    pub fn classical(c: f64) -> Self {
        Self {
            c,
            m1: ProxTerm::Zero,
            m2: ProxTerm::Zero,
            inner: None,
        }
    }

    pub fn linearized(c: f64, tau: f64) -> Self {
        Self {
            c,
            m1: ProxTerm::Linearized { tau },
            m2: ProxTerm::Zero,
            inner: None,
        }
    }

    pub fn with_m1(mut self, m1: ProxTerm) -> Self {
        self.m1 = m1;
        self
    }

    pub fn with_m2(mut self, m2: ProxTerm) -> Self {
        self.m2 = m2;
        self
    }

    pub fn with_inner_solver(mut self, inner: InnerSolver) -> Self {
        self.inner = Some(inner);
        self
    }

    pub fn validate(&self, sp: &SplitProblem) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Configuration("penalty c must be positive".into()));
        }
        for (name, term, dim) in [("M1", &self.m1, sp.cols()), ("M2", &self.m2, sp.rows())] {
            match term {
                ProxTerm::Zero => {}
                ProxTerm::Linearized { tau } => {
                    if name == "M2" {
                        return Err(Error::Configuration("M2 cannot be linearized".into()));
                    }
                    if !(*tau > 0.0) || tau * self.c * sp.operator_norm.powi(2) > 1.0 + STEP_SLACK {
                        return Err(Error::Configuration(format!(
                            "linearized M1 needs τc‖A‖² ≤ 1, got {}",
                            tau * self.c * sp.operator_norm.powi(2)
                        )));
                    }
                }
                ProxTerm::Matrix(m) => {
                    if m.nrows() != dim || m.ncols() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: m.nrows(),
                        });
                    }
                    if !linalg::is_symmetric(m, 1e-12) {
                        return Err(Error::Configuration(format!("{name} is not symmetric")));
                    }
                    if linalg::symmetric_min_eigenvalue(m) < -PSD_TOL * m.amax().max(1.0) {
                        return Err(Error::Configuration(format!(
                            "{name} is not positive semidefinite"
                        )));
                    }
                }
            }
        }
        if let ProxTerm::Matrix(m) = &self.m2 {
            if scalar_identity(m).is_none() {
                return Err(Error::Configuration(
                    "M2 must be a multiple of the identity".into(),
                ));
            }
        }
        Ok(())
    }
}

fn scalar_identity(m: &Matrix) -> Option<f64> {
    let s = m[(0, 0)];
    (*m == Matrix::identity(m.nrows(), m.ncols()) * s).then_some(s)
}

/// Starting triple `(x⁰, z⁰, y⁰)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitInit {
    pub x: Vector,
    pub z: Vector,
    pub y: Vector,
}

impl SplitInit {
    pub fn zeros(sp: &SplitProblem) -> Self {
        Self {
            x: Vector::zeros(sp.cols()),
            z: Vector::zeros(sp.rows()),
            y: Vector::zeros(sp.rows()),
        }
    }
}

/// Ergodic averages over `x¹..x^N` with the constants of the rate certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicCertificate {
    pub xbar: Vector,
    pub zbar: Vector,
    pub ybar: Vector,
    pub steps: usize,
    pub c: f64,
    pub init: SplitInit,
    pub m1: Matrix,
    pub m2: Matrix,
}

impl ErgodicCertificate {
    /// `C(x, z) = c‖Ax − z⁰‖² + ‖x − x⁰‖²_{M1} + ‖z − z⁰‖²_{M2}`.
    pub fn constant(&self, a: &Matrix, x: &Vector, z: &Vector) -> f64 {
        let dx = x - &self.init.x;
        let dz = z - &self.init.z;
        self.c * (a * x - &self.init.z).norm_squared()
            + dx.dot(&(&self.m1 * &dx))
            + dz.dot(&(&self.m2 * &dz))
    }

    /// `C₁ = C(x, z) + (2/c)(L_g² + ‖y⁰‖²)`.
    pub fn c1(&self, a: &Matrix, x: &Vector, z: &Vector, lipschitz_g: f64) -> f64 {
        self.constant(a, x, z) + 2.0 / self.c * (lipschitz_g.powi(2) + self.init.y.norm_squared())
    }

    /// Bound on `Ψ(x̄_k) − Ψ(x*)` after `k` steps.
    pub fn objective_bound(
        &self,
        a: &Matrix,
        x: &Vector,
        z: &Vector,
        lipschitz_g: f64,
        k: usize,
    ) -> f64 {
        self.c1(a, x, z, lipschitz_g) / (2.0 * k as f64)
    }
}

#[derive(Clone, Debug)]
pub struct AdpmmRun {
    pub xs: Vec<Vector>,
    pub zs: Vec<Vector>,
    pub ys: Vec<Vector>,
    pub certificate: ErgodicCertificate,
    pub trace: SolverTrace,
}

/// Entry `k` is the mean of `v¹..v^k`; entry 0 is `v⁰`.
pub fn ergodic_means(history: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(history.len());
    let Some(first) = history.first() else {
        return out;
    };
    out.push(first.clone());
    let mut sum = Vector::zeros(first.len());
    for (k, v) in history.iter().enumerate().skip(1) {
        sum += v;
        out.push(&sum / k as f64);
    }
    out
}

struct XUpdate {
    m1: Matrix,
    inner_lipschitz: f64,
}

fn x_update(
    sp: &SplitProblem,
    cfg: &ADMMConfig,
    xu: &XUpdate,
    x: &Vector,
    z: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let c = cfg.c;
    match &cfg.m1 {
        ProxTerm::Linearized { tau } => {
            let grad = sp.a.transpose() * (y + (&sp.a * x - z) * c);
            sp.r.prox(&(x - grad * *tau), *tau)
        }
        ProxTerm::Zero if sp.is_identity() => sp.r.prox(&(z - y / c), 1.0 / c),
        _ => {
            let inner = cfg.inner.ok_or_else(|| {
                Error::Configuration(
                    "x-update has no closed form; linearize M1 or enable the inner solver".into(),
                )
            })?;
            let step = 1.0 / xu.inner_lipschitz;
            let mut u = x.clone();
            for _ in 0..inner.max_iter {
                let grad = sp.a.transpose() * (y + (&sp.a * &u - z) * c) + &xu.m1 * (&u - x);
                let next = sp.r.prox(&(&u - grad * step), step)?;
                let moved = (&next - &u).norm();
                u = next;
                if moved <= inner.tol * u.norm().max(1.0) {
                    break;
                }
            }
            Ok(u)
        }
    }
}

fn z_update(
    sp: &SplitProblem,
    cfg: &ADMMConfig,
    ax: &Vector,
    z: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let c = cfg.c;
    match &cfg.m2 {
        ProxTerm::Matrix(m) => {
            let mu = scalar_identity(m).expect("validated");
            let w = c + mu;
            sp.g.prox(&((ax * c + y + z * mu) / w), 1.0 / w)
        }
        _ => sp.g.prox(&(ax + y / c), 1.0 / c),
    }
}

/// AD-PMM; `M1 = M2 = 0` gives classical ADMM.
pub fn adpmm_run(
    sp: &SplitProblem,
    cfg: &ADMMConfig,
    init: &SplitInit,
    steps: usize,
) -> Result<AdpmmRun> {
    check_dim(sp.cols(), init.x.len())?;
    check_dim(sp.rows(), init.z.len())?;
    check_dim(sp.rows(), init.y.len())?;
    cfg.validate(sp)?;
    let c = cfg.c;
    let m1 = cfg.m1.materialize(sp.cols(), c, &sp.a);
    let m2 = cfg.m2.materialize(sp.rows(), c, &sp.a);
    let xu = XUpdate {
        inner_lipschitz: (c * sp.operator_norm.powi(2)
            + linalg::symmetric_max_eigenvalue(&m1).max(0.0))
        .max(1e-12),
        m1: m1.clone(),
    };
    let name = if cfg.m1 == ProxTerm::Zero && cfg.m2 == ProxTerm::Zero {
        "admm"
    } else {
        "adpmm"
    };
    let mut rec = TraceRecorder::new(name, None);
    let (mut x, mut z, mut y) = (init.x.clone(), init.z.clone(), init.y.clone());
    let (mut xs, mut zs, mut ys) = (vec![x.clone()], vec![z.clone()], vec![y.clone()]);
    rec.record(0, sp.objective(&x), Some((&sp.a * &x - &z).norm()), 0.0);
    for k in 1..=steps as u64 {
        x = x_update(sp, cfg, &xu, &x, &z, &y)?;
        rec.counts.prox += 1;
        let ax = &sp.a * &x;
        z = z_update(sp, cfg, &ax, &z, &y)?;
        rec.counts.prox += 1;
        let residual = &ax - &z;
        y += &residual * c;
        if !linalg::all_finite(&x) || !linalg::all_finite(&y) {
            return Err(Error::Oracle(format!("non-finite iterate at step {k}")));
        }
        rec.record(k, sp.objective(&x), Some(residual.norm()), c);
        xs.push(x.clone());
        zs.push(z.clone());
        ys.push(y.clone());
    }
    let mean = |h: &[Vector]| ergodic_means(h).pop().expect("nonempty history");
    let certificate = ErgodicCertificate {
        xbar: mean(&xs),
        zbar: mean(&zs),
        ybar: mean(&ys),
        steps,
        c,
        init: init.clone(),
        m1,
        m2,
    };
    Ok(AdpmmRun {
        xs,
        zs,
        ys,
        certificate,
        trace: rec.finish(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CPConfig {
    pub tau: f64,
    pub c: f64,
    pub theta: f64,
}

impl CPConfig {
    /// Rejects `τc‖A‖² > 1` when `θ = 1`.
    pub fn new(tau: f64, c: f64, theta: f64, sp: &SplitProblem) -> Result<Self> {
        if !(tau > 0.0 && c > 0.0) || !(0.0..=1.0).contains(&theta) {
            return Err(Error::Configuration(
                "Chambolle-Pock needs τ, c > 0 and θ ∈ [0, 1]".into(),
            ));
        }
        let product = tau * c * sp.operator_norm.powi(2);
        if theta == 1.0 && product > 1.0 + STEP_SLACK {
            return Err(Error::Configuration(format!(
                "τc‖A‖² = {product} exceeds 1"
            )));
        }
        Ok(Self { tau, c, theta })
    }
}

#[derive(Clone, Debug)]
pub struct CpRun {
    pub xs: Vec<Vector>,
    pub ys: Vec<Vector>,
    pub trace: SolverTrace,
}

/// Chambolle-Pock from `(x⁰, y⁰)` with extrapolated dual point `p⁰` (defaults to `y⁰`).
pub fn cp_run(
    sp: &SplitProblem,
    cfg: &CPConfig,
    x0: &Vector,
    y0: &Vector,
    p0: Option<&Vector>,
    steps: usize,
) -> Result<CpRun> {
    check_dim(sp.cols(), x0.len())?;
    check_dim(sp.rows(), y0.len())?;
    if !sp.g.has_conjugate_prox() {
        return Err(Error::Unsupported(
            "Chambolle-Pock needs the prox of g*".into(),
        ));
    }
    let (tau, c, theta) = (cfg.tau, cfg.c, cfg.theta);
    let mut rec = TraceRecorder::new("cp", None);
    let (mut x, mut y) = (x0.clone(), y0.clone());
    let mut p = p0.cloned().unwrap_or_else(|| y0.clone());
    check_dim(sp.rows(), p.len())?;
    let (mut xs, mut ys) = (vec![x.clone()], vec![y.clone()]);
    rec.record(0, sp.objective(&x), None, tau);
    for k in 1..=steps as u64 {
        x = sp.r.prox(&(&x - sp.a.transpose() * &p * tau), tau)?;
        let next = sp.g.conjugate_prox(&(&y + &sp.a * &x * c), c)?;
        rec.counts.prox += 2;
        p = &next + (&next - &y) * theta;
        y = next;
        if !linalg::all_finite(&x) || !linalg::all_finite(&y) {
            return Err(Error::Oracle(format!("non-finite iterate at step {k}")));
        }
        rec.record(k, sp.objective(&x), None, tau);
        xs.push(x.clone());
        ys.push(y.clone());
    }
    Ok(CpRun {
        xs,
        ys,
        trace: rec.finish(),
    })
}

/// Runs Chambolle-Pock (`θ = 1`) and AD-PMM with `M1 = (1/τ)I − cAᵀA`, `M2 = 0`;
/// returns `max_k ‖x_CP − x_AD‖ + ‖y_CP − y_AD‖`.
pub fn cp_adpmm_equivalence(
    sp: &SplitProblem,
    tau: f64,
    c: f64,
    init: &SplitInit,
    steps: usize,
) -> Result<f64> {
    let cp_cfg = CPConfig::new(tau, c, 1.0, sp)?;
    let ad = adpmm_run(sp, &ADMMConfig::linearized(c, tau), init, steps)?;
    let p0 = &init.y + (&sp.a * &init.x - &init.z) * c;
    let cp = cp_run(sp, &cp_cfg, &init.x, &init.y, Some(&p0), steps)?;
    Ok(deviation(&cp.xs, &cp.ys, &ad.xs, &ad.ys))
}

pub fn deviation(xs1: &[Vector], ys1: &[Vector], xs2: &[Vector], ys2: &[Vector]) -> f64 {
    xs1.iter()
        .zip(xs2)
        .zip(ys1.iter().zip(ys2))
        .map(|((a, b), (c, d))| (a - b).norm() + (c - d).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::soft_threshold;
    use crate::rng::SeededRng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn lasso(a: Matrix, b: Vector, lam: f64) -> SplitProblem {
        SplitProblem::new(NonsmoothPart::half_sq_dist(b), NonsmoothPart::l1(lam), a).unwrap()
    }

    #[test]
    fn identity_lasso_reaches_soft_threshold() {
        let b = v(&[2.0, -0.3, 0.8, -1.5]);
        let sp = lasso(Matrix::identity(4, 4), b.clone(), 0.5);
        let run = adpmm_run(
            &sp,
            &ADMMConfig::classical(1.0),
            &SplitInit::zeros(&sp),
            200,
        )
        .unwrap();
        let expected = soft_threshold(&b, 0.5).unwrap();
        assert!((run.xs.last().unwrap() - expected).amax() < 1e-8);
    }

    #[test]
    fn scalar_admm_matches_hand_recursion() {
        let (b, lam, c) = (3.0, 1.0, 2.0);
        let sp = lasso(Matrix::identity(1, 1), v(&[b]), lam);
        let run = adpmm_run(&sp, &ADMMConfig::classical(c), &SplitInit::zeros(&sp), 20).unwrap();
        let (mut z, mut y) = (0.0f64, 0.0f64);
        for k in 1..=20 {
            let t = z - y / c;
            let x = t.signum() * (t.abs() - lam / c).max(0.0);
            z = (c * x + y + b) / (1.0 + c);
            y += c * (x - z);
            assert!((run.xs[k][0] - x).abs() < 1e-14);
            assert!((run.zs[k][0] - z).abs() < 1e-14);
            assert!((run.ys[k][0] - y).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_steps_return_init() {
        let sp = lasso(Matrix::identity(2, 2), v(&[1.0, 1.0]), 0.1);
        let init = SplitInit {
            x: v(&[0.3, 0.1]),
            z: v(&[0.0, 0.2]),
            y: v(&[1.0, -1.0]),
        };
        let run = adpmm_run(&sp, &ADMMConfig::classical(1.0), &init, 0).unwrap();
        assert_eq!(run.xs, vec![init.x.clone()]);
        assert_eq!(run.certificate.xbar, init.x);
    }

    #[test]
    fn multiplier_update_is_exact() {
        let mut rng = SeededRng::new(2);
        let a = rng.normal_matrix(6, 8);
        let sp = lasso(a.clone(), rng.normal_vector(6), 0.1);
        let tau = 0.9 / sp.operator_norm.powi(2);
        let run = adpmm_run(
            &sp,
            &ADMMConfig::linearized(1.0, tau),
            &SplitInit::zeros(&sp),
            30,
        )
        .unwrap();
        for k in 0..30 {
            let expected = &run.ys[k] + (&a * &run.xs[k + 1] - &run.zs[k + 1]) * 1.0;
            assert_eq!(run.ys[k + 1], expected);
            assert!(fenchel_gap(&sp.g, &run.zs[k + 1], &run.ys[k + 1]).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn general_design_needs_linearization_or_inner_solver() {
        let mut rng = SeededRng::new(3);
        let sp = lasso(rng.normal_matrix(4, 5), rng.normal_vector(4), 0.2);
        let init = SplitInit::zeros(&sp);
        assert!(matches!(
            adpmm_run(&sp, &ADMMConfig::classical(1.0), &init, 3),
            Err(Error::Configuration(_))
        ));
        let tau = 2.0 / sp.operator_norm.powi(2);
        assert!(matches!(
            adpmm_run(&sp, &ADMMConfig::linearized(1.0, tau), &init, 3),
            Err(Error::Configuration(_))
        ));
        let inner = adpmm_run(
            &sp,
            &ADMMConfig::classical(1.0).with_inner_solver(InnerSolver::default()),
            &init,
            300,
        )
        .unwrap();
        let lin = adpmm_run(
            &sp,
            &ADMMConfig::linearized(1.0, 0.9 / sp.operator_norm.powi(2)),
            &init,
            3000,
        )
        .unwrap();
        let (fi, fl) = (
            sp.objective(inner.xs.last().unwrap()),
            sp.objective(lin.xs.last().unwrap()),
        );
        assert!((fi - fl).abs() < 1e-6);
    }

    #[test]
    fn non_psd_prox_term_is_rejected() {
        let sp = lasso(Matrix::identity(2, 2), v(&[1.0, 1.0]), 0.1);
        let cfg = ADMMConfig::classical(1.0)
            .with_m1(ProxTerm::Matrix(Matrix::from_diagonal(&v(&[1.0, -1.0]))));
        assert!(matches!(cfg.validate(&sp), Err(Error::Configuration(_))));
    }

    #[test]
    fn decoupled_limit_of_chambolle_pock() {
        let sp = lasso(Matrix::zeros(2, 3), v(&[1.0, -2.0]), 0.5);
        let cfg = CPConfig::new(0.7, 1.3, 1.0, &sp).unwrap();
        let (x0, y0) = (v(&[1.0, -0.2, 0.6]), v(&[0.5, 0.5]));
        let run = cp_run(&sp, &cfg, &x0, &y0, None, 1).unwrap();
        assert_eq!(run.xs[1], sp.r.prox(&x0, 0.7).unwrap());
        assert_eq!(run.ys[1], sp.g.conjugate_prox(&y0, 1.3).unwrap());
    }

    #[test]
    fn scalar_equivalence_is_exact() {
        let sp = lasso(Matrix::identity(1, 1), v(&[2.0]), 0.3);
        let init = SplitInit {
            x: v(&[0.5]),
            z: v(&[-0.1]),
            y: v(&[0.2]),
        };
        assert!(cp_adpmm_equivalence(&sp, 0.4, 1.5, &init, 50).unwrap() <= 1e-12);
        assert_eq!(cp_adpmm_equivalence(&sp, 0.4, 1.5, &init, 0).unwrap(), 0.0);
        assert!(matches!(
            cp_adpmm_equivalence(&sp, 1.0, 1.5, &init, 5),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn chambolle_pock_step_condition() {
        let sp = lasso(Matrix::identity(2, 2) * 2.0, v(&[1.0, 1.0]), 0.1);
        assert!(CPConfig::new(0.5, 1.0, 1.0, &sp).is_err());
        assert!(CPConfig::new(0.5, 1.0, 0.0, &sp).is_ok());
        assert!(CPConfig::new(0.25, 1.0, 1.0, &sp).is_ok());
    }

    #[test]
    fn missing_conjugate_prox_is_unsupported() {
        let g = NonsmoothPart::custom(|z| z.norm()).with_prox(|z, _| z.clone());
        let sp = SplitProblem::new(g, NonsmoothPart::zero(), Matrix::identity(2, 2)).unwrap();
        let cfg = CPConfig::new(0.5, 0.5, 1.0, &sp).unwrap();
        assert!(matches!(
            cp_run(&sp, &cfg, &Vector::zeros(2), &Vector::zeros(2), None, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ergodic_means_skip_the_start() {
        let h = vec![v(&[10.0]), v(&[1.0]), v(&[3.0])];
        let m = ergodic_means(&h);
        assert_eq!(m, vec![v(&[10.0]), v(&[1.0]), v(&[2.0])]);
    }
}
