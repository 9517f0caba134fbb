use pba_core::extension::classify_per_s_facets;
use pba_core::polytope::{enumerate_facets, membership, vertices, CorrelationSpec, Facet};
use pba_core::scalar::{rat, Rational};
use proptest::prelude::*;

fn per_s_spec() -> CorrelationSpec {
    pba_core::extension::per_s_spec().unwrap()
}

#[test]
fn per_s_polytope_has_sixteen_vertices_and_48_facets() {
    let spec = per_s_spec();
    assert_eq!(vertices::<Rational>(&spec).unwrap().len(), 16);
    assert_eq!(spec.dimension(), 11);
    let facets = enumerate_facets(&spec).unwrap();
    assert_eq!(facets.len(), 48);
    let verts = vertices::<Rational>(&spec).unwrap();
    for f in &facets {
        assert!(verts.iter().all(|v| f.satisfied_by(v)));
        let tight: Vec<&Vec<Rational>> = verts.iter().filter(|v| {
            let lhs: Rational = f.coefficients.iter().zip(v.iter()).map(|(c, x)| Rational::from_integer(c.clone()) * x).sum();
            lhs == Rational::from_integer(f.bound.clone())
        }).collect();
        assert!(tight.len() >= spec.dimension());
    }
}

#[test]
fn per_s_facets_split_into_data_typed_and_relevant() {
    let facets = enumerate_facets(&per_s_spec()).unwrap();
    let split = classify_per_s_facets(&facets);
    assert_eq!(split.data_only.len(), 12);
    assert!(split.untyped.is_empty());
    assert_eq!(split.data_free.len(), 4);
    assert_eq!(split.relevant.len(), 32);
    let mut used: Vec<usize> = split.relevant.iter().map(|(i, _)| *i).collect();
    used.sort_unstable();
    used.dedup();
    assert!(used.len() > 1);
}

fn bell_wigner_spec() -> CorrelationSpec {
    CorrelationSpec::new(3, vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap()
}

fn satisfies_all(facets: &[Facet], p: &[Rational]) -> bool {
    facets.iter().all(|f| f.satisfied_by(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn membership_matches_facets(raw in prop::collection::vec(0i64..=8, 6)) {
        let spec = bell_wigner_spec();
        let facets = enumerate_facets(&spec).unwrap();
        let p: Vec<Rational> = raw.iter().map(|&x| rat(x, 8)).collect();
        let cert = membership(&p, &spec).unwrap();
        prop_assert!(cert.verify(&spec, &p));
        prop_assert_eq!(cert.is_feasible(), satisfies_all(&facets, &p));
    }
}
