use foms_core::harness::{generate_problem, run_solver, InstanceSpec, ProblemTag, SolverTag};
use foms_core::Error;

fn home(solver: SolverTag) -> InstanceSpec {
    use SolverTag::*;
    let (tag, n, m) = match solver {
        Restart => (ProblemTag::StronglyConvexQp, 20, 10),
        Universal => (ProblemTag::NonsmoothL1, 8, 1),
        Smoothing => (ProblemTag::UniformFit, 12, 8),
        Admm | Adpmm | Cp => (ProblemTag::Lasso, 20, 10),
        Md | Da => (ProblemTag::UniformFit, 12, 8),
        _ => (ProblemTag::SimplexQp, 20, 10),
    };
    InstanceSpec::new(tag, n, m, 11)
}

#[test]
fn every_solver_runs_on_its_home_instance() {
    for solver in SolverTag::ALL {
        let inst = generate_problem(&home(solver)).unwrap();
        let trace = run_solver(&inst, solver, 200).unwrap_or_else(|e| panic!("{solver}: {e}"));
        trace.check_invariants().unwrap();
        assert!(!trace.rows.is_empty(), "{solver}");
        assert_eq!(
            trace.meta("problem"),
            Some(inst.spec.problem.tag()),
            "{solver}"
        );
        let first = trace.rows[0].objective;
        let last = trace.rows.last().unwrap().objective;
        assert!(
            last.is_finite() && last <= first + 1e-9,
            "{solver}: {first} -> {last}"
        );
        assert!(
            last >= inst.psi_min() - 1e-6,
            "{solver}: {last} below Ψ_min {}",
            inst.psi_min()
        );
    }
}

#[test]
fn mismatched_pairs_are_rejected() {
    let lasso = generate_problem(&InstanceSpec::new(ProblemTag::Lasso, 10, 5, 1)).unwrap();
    for solver in [
        SolverTag::Restart,
        SolverTag::Smoothing,
        SolverTag::Awcg,
        SolverTag::Gcg,
    ] {
        let err = run_solver(&lasso, solver, 10).unwrap_err();
        assert!(
            matches!(err, Error::Unsupported(_) | Error::UnsupportedDomain(_)),
            "{solver}: {err}"
        );
    }
    let qp = generate_problem(&InstanceSpec::new(ProblemTag::SimplexQp, 10, 5, 1)).unwrap();
    assert!(run_solver(&qp, SolverTag::Cp, 10).is_err());
}

#[test]
fn accelerated_beats_plain_on_lasso() {
    let inst = generate_problem(&InstanceSpec::new(ProblemTag::Lasso, 60, 30, 5)).unwrap();
    let gap = |s| run_solver(&inst, s, 300).unwrap().last().unwrap().objective - inst.psi_min();
    assert!(gap(SolverTag::Abpgm) < gap(SolverTag::Bpgm));
}

#[test]
fn solver_tags_round_trip() {
    for s in SolverTag::ALL {
        assert_eq!(s.tag().parse::<SolverTag>().unwrap(), s);
    }
    let err = "newton".parse::<SolverTag>().unwrap_err().to_string();
    assert!(err.contains("bpgm") && err.contains("cp"));
}
