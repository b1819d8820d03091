use sawp_core::benchmark::{
    case_by_id, load_cases, mutant_suite, mutate_case, BenchmarkError, MutantSpec, Mutation, Pattern,
};
use sawp_core::fem::solve;
use sawp_core::grader::ErrorType;
use sawp_core::model::{diff_models, validate, ElementKind};

#[test]
fn twenty_cases_in_order() {
    let cases = load_cases().unwrap();
    assert_eq!(cases.len(), 20);
    for (k, c) in cases.iter().enumerate() {
        assert_eq!(c.id, k as u32 + 1);
        assert!(!c.description.is_empty());
    }
    let portal = &cases[0];
    assert_eq!(portal.truth_model.nodes().len(), 4);
    assert_eq!(portal.truth_model.elements().len(), 3);
}

#[test]
fn member_tallies() {
    let nine = case_by_id(9).unwrap();
    assert_eq!(nine.truth_model.count_kind(ElementKind::Column), 8);
    assert_eq!(nine.truth_model.count_kind(ElementKind::Girder), 6);
    let twelve = case_by_id(12).unwrap();
    assert_eq!(twelve.truth_model.count_kind(ElementKind::Column), 5);
    assert_eq!(twelve.truth_model.count_kind(ElementKind::Girder), 3);
    assert_eq!(twelve.pattern, Pattern::Asymmetry);
    let twenty = case_by_id(20).unwrap();
    assert_eq!(twenty.truth_model.count_kind(ElementKind::Cantilever), 2);
}

#[test]
fn pattern_partition() {
    let cases = load_cases().unwrap();
    let ids = |p: Pattern| cases.iter().filter(|c| c.pattern == p).map(|c| c.id).collect::<Vec<_>>();
    assert_eq!(ids(Pattern::Scaling), vec![1, 3, 4, 5, 6, 7, 8, 9, 10]);
    assert_eq!(ids(Pattern::Asymmetry), vec![11, 12, 13, 14]);
    assert_eq!(ids(Pattern::Features), vec![2, 15, 16, 17, 18, 19, 20]);
}

#[test]
fn case_lookup() {
    assert_eq!(case_by_id(0).unwrap_err(), BenchmarkError::UnknownCase(0));
    assert_eq!(case_by_id(21).unwrap_err(), BenchmarkError::UnknownCase(21));
    let gable = case_by_id(16).unwrap();
    assert!(!gable.truth_model.distributed_loads().is_empty());
    assert!(gable.truth_model.distributed_loads().iter().all(|d| d.inward));
}

#[test]
fn truths_are_lint_clean_and_pinned() {
    for c in load_cases().unwrap() {
        assert!(validate(&c.truth_model).is_clean(), "case {}", c.id);
        let fresh = solve(&c.truth_model).unwrap();
        assert_eq!(fresh.rounded(), c.truth_solution, "case {}", c.id);
    }
}

#[test]
fn pinned_portal_matches_reference_table() {
    let s = &case_by_id(1).unwrap().truth_solution;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-3 * b.abs();
    assert!(close(s.displacements[&2][0], 0.00203106));
    assert!(close(s.displacements[&4][2], 0.0042402));
    assert!(close(s.end_forces[&3][0][0], 6288.01));
    assert!(close(s.end_forces[&2][1][2], 15968.2));
    let girder = s.end_forces[&3];
    assert!(((girder[0][1] + girder[1][1]) - 60000.0).abs() <= 1e-8 * 60000.0);
}

#[test]
fn reshaped_three_bay_frame_has_two_bays() {
    let base = case_by_id(9).unwrap();
    let spec = MutantSpec::new(9, Mutation::ReshapeBays);
    assert_eq!(spec.expected, ErrorType::Type1Layout);
    let m = mutate_case(base, &spec).unwrap();
    assert_eq!(m.count_kind(ElementKind::Column), 6);
    assert_eq!(m.count_kind(ElementKind::Girder), 4);
    assert!(!diff_models(&m, &base.truth_model).layout_matches());
}

#[test]
fn dropped_node_is_top_right() {
    let base = case_by_id(11).unwrap();
    let m = mutate_case(base, &MutantSpec::new(11, Mutation::DropNode)).unwrap();
    assert!(m.nodes().iter().all(|n| !(n.x == 6.0 && n.y == 8.0)));
    let d = diff_models(&m, &base.truth_model);
    assert_eq!(d.missing_nodes.len(), 1);
    assert_eq!(d.missing_elements.len(), 2);
}

#[test]
fn loads_spread_over_first_floor() {
    let base = case_by_id(5).unwrap();
    let spec = MutantSpec::new(5, Mutation::MoveLoadsAllFloor);
    assert_eq!(spec.expected, ErrorType::Type2Boundary);
    let m = mutate_case(base, &spec).unwrap();
    assert_eq!(m.point_loads().len(), 2);
    for l in m.point_loads() {
        assert_eq!(m.node(l.node).unwrap().y, 4.0);
    }
    let d = diff_models(&m, &base.truth_model);
    assert!(d.layout_matches() && d.supports_match() && !d.loads_match());
}

#[test]
fn inapplicable_mutations() {
    let five = case_by_id(5).unwrap();
    assert!(matches!(
        mutate_case(five, &MutantSpec::new(5, Mutation::ReshapeBays)),
        Err(BenchmarkError::InapplicableMutation { case: 5, .. })
    ));
    assert!(matches!(
        mutate_case(five, &MutantSpec::new(5, Mutation::FlipDistributedSign)),
        Err(BenchmarkError::InapplicableMutation { .. })
    ));
    assert!(matches!(
        mutate_case(five, &MutantSpec::new(6, Mutation::DropNode)),
        Err(BenchmarkError::InapplicableMutation { .. })
    ));
    let four = case_by_id(4).unwrap();
    assert!(mutate_case(four, &MutantSpec::new(4, Mutation::MoveLoadsAllFloor)).is_err());
}

#[test]
fn suite_mutants_are_distinct_from_every_truth() {
    let cases = load_cases().unwrap();
    let suite = mutant_suite();
    for kind in Mutation::ALL {
        assert!(suite.iter().filter(|s| s.mutation == kind).count() >= 2, "{kind}");
    }
    for spec in &suite {
        let base = case_by_id(spec.base).unwrap();
        let m = mutate_case(base, spec).unwrap();
        assert!(!diff_models(&m, &base.truth_model).is_empty());
        for other in cases {
            assert!(!diff_models(&m, &other.truth_model).is_empty(), "{spec:?} equals case {}", other.id);
        }
        solve(&m).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
    }
}

#[test]
fn mutations_are_deterministic() {
    for spec in mutant_suite() {
        let base = case_by_id(spec.base).unwrap();
        assert_eq!(mutate_case(base, &spec).unwrap(), mutate_case(base, &spec).unwrap());
    }
}
