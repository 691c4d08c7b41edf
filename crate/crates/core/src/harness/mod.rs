//! Seeded instances, solver dispatch, rate fitting and bound verification.

mod dispatch;
mod instances;
mod rates;
mod verify;

pub use dispatch::{run_solver, SolverTag};
pub use instances::{
    generate_problem, lasso_reference, spread_spectrum_simplex_qp, Instance, InstanceMeta,
    InstanceSpec, ProblemTag,
};
pub use rates::{count_violations, fit_rate, least_squares_slope, RateReport};
pub use verify::{verify, BoundTag, VerifyReport};

/// Exponent of the guaranteed rate for a solver's objective gap, if it has one.
pub fn theory_slope(solver: &str) -> Option<f64> {
    match solver {
        "bpgm" | "nolips" | "gcg-standard" | "gcg-line-search" | "gcg-adaptive" | "cg-abpgm"
        | "admm" | "adpmm" | "cp" => Some(-1.0),
        "abpgm" | "scg" | "smoothing" => Some(-2.0),
        "md" | "da" => Some(-0.5),
        _ => None,
    }
}

/// Parallelism cap from `FOMS_THREADS`, defaulting to the available cores.
pub fn thread_cap() -> usize {
    std::env::var("FOMS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
