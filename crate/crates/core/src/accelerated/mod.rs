//! Accelerated Bregman methods: plain, restarted, universal, smoothed and linear-oracle driven.

mod abpgm;
mod inexact;
mod restart;
mod smoothing;
mod universal;

pub use abpgm::{abpgm_run, abpgm_run_detailed, next_alpha, AbpgmRun, AccelState};
pub use inexact::{cg_inexact_abpgm_run, cg_inexact_bound};
pub use restart::{restart_run, RestartConfig, RestartRun};
pub use smoothing::{choose_tau, smoothed_run, smoothing_bound, SmoothedProblem, SmoothingKind};
pub use universal::{universal_run, UniversalConfig, UniversalRun};
