use foms_core::conditional_gradient::{
    awcg_run, gcg_run, AtomState, AwVariant, CGStepRule, GeneralizedLinearOracle, LinearOracle,
};
use foms_core::harness::{generate_problem, InstanceSpec, ProblemTag};
use foms_core::problem::FeasibleSet;
use foms_core::Vector;

#[test]
fn away_and_pairwise_outpace_standard_rule() {
    let inst = generate_problem(&InstanceSpec::new(ProblemTag::SimplexQp, 30, 60, 8)).unwrap();
    let p = &inst.problem;
    let lo = LinearOracle::new(p.set.clone()).unwrap();
    let glo = GeneralizedLinearOracle::plain(p.set.clone()).unwrap();
    let steps = 500;
    let (_, std_trace) = gcg_run(p, &glo, CGStepRule::Standard, p.start(), steps).unwrap();
    let std_gap = std_trace.last().unwrap().objective - inst.psi_min();
    for variant in [AwVariant::Away, AwVariant::Pairwise] {
        let start = AtomState::vertex(lo.answer(&p.f.gradient(p.start()).unwrap()).unwrap());
        let (x, state, trace) = awcg_run(p, &lo, start, steps, variant).unwrap();
        state.check().unwrap();
        assert!((state.iterate() - &x).amax() < 1e-9);
        let gap = trace.last().unwrap().objective - inst.psi_min();
        assert!(gap < std_gap, "{variant:?}: {gap} vs {std_gap}");
        assert!(gap < 1e-8, "{variant:?}: {gap}");
    }
}

#[test]
fn spectrahedron_oracle_returns_rank_one_vertex() {
    let set = FeasibleSet::spectrahedron(3);
    let lo = LinearOracle::new(set.clone()).unwrap();
    // symmetric matrix with a single negative eigenvalue along (1, 1, 0)/√2
    let g = Vector::from_vec(vec![0.0, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let v = lo.answer(&g).unwrap();
    assert!(set.contains(&v));
    let expected = Vector::from_vec(vec![0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
    assert!((v - expected).amax() < 1e-8);
}
