use num_complex::Complex64;
use pba_core::fixtures::{cabello_projections, chsh_projections, singlet, CHSH_ANGLES};
use pba_core::polytope::classical_representable;
use pba_core::ppt::{validate_ppt, Pba};
use pba_core::quantum::{build_projection_pba, CMatrix, ProjectionMatrix, QuantumState};
use pba_core::quotient::{
    build_free_ht, check_embeddable, check_property_g, enumerate_homomorphisms, relation_from_images,
    verify_empirical_quotient, QuotientRelation,
};
use pba_core::Error;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ray(label: &str, v: [f64; 3]) -> ProjectionMatrix {
    ProjectionMatrix::rank_one(label, &v.map(c)).unwrap()
}

/// Two orthogonal pairs spanning the same plane share only the
/// complementary ray, which is not among the chosen generators.
fn g_violation() -> Vec<ProjectionMatrix> {
    let t = 0.3f64;
    vec![
        ray("E1", [1.0, 0.0, 0.0]),
        ray("E2", [0.0, 1.0, 0.0]),
        ray("Q1", [t.cos(), t.sin(), 0.0]),
        ray("Q2", [-t.sin(), t.cos(), 0.0]),
        ray("G", [1.0, 1.0, 1.0]),
    ]
}

#[test]
fn bell_generators_satisfy_property_g() {
    let projs = chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1);
    let target = build_projection_pba(projs.clone()).unwrap();
    let report = check_property_g(&target, &projs).unwrap();
    assert!(report.holds && report.exhaustive);
}

#[test]
fn shared_derived_element_violates_property_g() {
    let projs = g_violation();
    let target = build_projection_pba(projs.clone()).unwrap();
    assert_eq!(target.contexts().len(), 3);
    let report = check_property_g(&target, &projs).unwrap();
    assert!(!report.holds);
    assert_eq!(report.witness, Some(vec![0, 1]));
    let states = vec![QuantumState::maximally_mixed(3)];
    assert!(matches!(build_free_ht(&target, &states, projs), Err(Error::PropertyGViolated(_))));
}

#[test]
fn all_target_elements_as_generators_satisfy_property_g() {
    let projs = g_violation();
    let target = build_projection_pba(projs).unwrap();
    let gens: Vec<ProjectionMatrix> = target
        .closure()
        .iter()
        .enumerate()
        .map(|(i, m)| ProjectionMatrix::new(format!("X{i}"), m.clone()).unwrap())
        .collect();
    assert!(check_property_g(&target, &gens).unwrap().holds);
}

#[test]
fn missing_generator_is_reported() {
    let projs = chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1);
    let target = build_projection_pba(projs.clone()).unwrap();
    assert!(matches!(check_property_g(&target, &projs[..3]), Err(Error::NotAGeneratingSet(_))));
}

#[test]
fn chsh_free_construction_is_an_empirical_quotient() {
    let projs = chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1);
    let target = build_projection_pba(projs.clone()).unwrap();
    let free = build_free_ht(&target, &[singlet()], projs).unwrap();
    assert_eq!(free.relation.pba.contexts().len(), 4);
    assert!(free.relation.zero_atoms.iter().all(|z| z.is_empty()));
    assert!(validate_ppt(&free.ppts[0]).is_valid());
    let report = verify_empirical_quotient(&free.ppts, &free.relation, Some(&free.target)).unwrap();
    assert!(report.all_passed(), "{report:?}");
    let emb = check_embeddable(&free.relation).unwrap();
    assert!(emb.embeddable);
    assert_eq!(emb.homomorphisms.len(), 16);
}

#[test]
fn orthogonal_pair_free_construction_flags_zero_atom() {
    let projs = vec![ray("P", [1.0, 0.0, 0.0]), ray("Q", [0.0, 1.0, 0.0])];
    let target = build_projection_pba(projs.clone()).unwrap();
    let states = vec![QuantumState::maximally_mixed(3)];
    let free = build_free_ht(&target, &states, projs).unwrap();
    assert_eq!(free.relation.zero_atoms, vec![vec![0b11]]);
    assert_eq!(free.ppts[0].measure(0).weight(0b11), &0.0);
    let report = verify_empirical_quotient(&free.ppts, &free.relation, Some(&free.target)).unwrap();
    assert!(report.all_passed(), "{report:?}");
    assert_eq!(enumerate_homomorphisms(&free.relation).unwrap().len(), 3);
}

#[test]
fn incomplete_states_are_rejected() {
    let projs = vec![ray("P", [1.0, 0.0, 0.0])];
    let target = build_projection_pba(projs.clone()).unwrap();
    let eig = QuantumState::vector(vec![c(1.0), c(0.0), c(0.0)]).unwrap();
    assert!(matches!(build_free_ht(&target, &[eig], projs), Err(Error::IncompleteStates(_))));
}

#[test]
fn cabello_set_admits_no_homomorphism() {
    let rel = relation_from_images(&cabello_projections()).unwrap();
    assert!(enumerate_homomorphisms(&rel).unwrap().is_empty());
    assert!(!check_embeddable(&rel).unwrap().embeddable);
}

#[test]
fn identity_relation_needs_no_witnesses() {
    let pba = Pba::new(2, vec![vec![0, 1]]).unwrap();
    let rel = QuotientRelation::identity(pba);
    assert_eq!(enumerate_homomorphisms(&rel).unwrap().len(), 4);
}

/// Classical representability of a target state transfers to the free
/// construction, and its quotient structure then carries a homomorphism.
#[test]
fn representable_targets_have_homomorphisms() {
    let product = QuantumState::vector(vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
    let fixtures: Vec<(Vec<ProjectionMatrix>, QuantumState)> = vec![
        (chsh_projections([0.0, 90.0], [0.0, 90.0]), singlet()),
        (chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1), QuantumState::maximally_mixed(4)),
        (chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1), product),
        (chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1), singlet()),
    ];
    let mut representable = 0;
    for (projs, state) in fixtures {
        let target = build_projection_pba(projs.clone()).unwrap();
        let free = build_free_ht(&target, &[state, QuantumState::maximally_mixed(4)], projs).unwrap();
        let repr = classical_representable(&free.ppts[0]).unwrap();
        if repr.is_representable() {
            representable += 1;
            assert!(!enumerate_homomorphisms(&free.relation).unwrap().is_empty());
        }
    }
    assert_eq!(representable, 3);
}

#[test]
fn images_of_identified_elements_coincide() {
    // E1 + E2 and Q1 + Q2 project onto the same plane
    let projs = g_violation()[..4].to_vec();
    let rel = relation_from_images(&projs).unwrap();
    assert!(!rel.identifications.is_empty());
    let id = CMatrix::identity(3, 3);
    let images: Vec<CMatrix> = projs.iter().map(|p| p.matrix().clone()).collect();
    let target = pba_core::quotient::QuantumTarget { images, states: vec![] };
    for (x, y) in &rel.identifications {
        let (a, b) = (target.image(x), target.image(y));
        assert!(pba_core::quantum::matrices_equal(&a, &b));
        assert!(!pba_core::quantum::matrices_equal(&a, &(&id * c(2.0))));
    }
}
