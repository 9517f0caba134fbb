//! One PASS/FAIL line per acceptance criterion, with wall-clock timings
//! against each criterion's budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pba_core::boolean_core::{intersection_element, restrict, Element, Measure};
use pba_core::extension::{
    chi_eta_intervals, chsh_condition, classify_per_s_facets, extend_three, extend_tree, glue_four, per_s_spec,
    singleton_nodes, ThreeSpec,
};
use pba_core::fixtures::{
    bell_pba, chsh_projections, ppt_from_global, random_bell_ppt, random_measure, random_three_spec, seeded,
    singlet, singlet_bell_ppt, Rng64, CHSH_ANGLES,
};
use pba_core::horn_tarski::{extend_full, is_partial_measure, PartialFunction};
use pba_core::polytope::{
    classical_representable, correlation_vector, enumerate_facets, membership, vertices, CorrelationSpec,
    FeasibilityCertificate,
};
use pba_core::ppt::{Pba, Ppt, State};
use pba_core::quantum::{build_projection_pba, QuantumState};
use pba_core::quotient::{
    build_free_ht, check_embeddable, enumerate_homomorphisms, verify_empirical_quotient, QuotientRelation,
    QuotientWitness,
};
use pba_core::scalar::{rat, Rational};
use pba_core::Error;
use rand::Rng;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn value(m: &Measure<Rational>, mask: usize) -> Rational {
    m.evaluate(&intersection_element(mask, m.arity()).unwrap()).unwrap()
}

fn three_spec_of(ppt: &Ppt<Rational>, s: usize) -> ThreeSpec<Rational> {
    let v = |g: &[usize]| ppt.intersection_value(g).expect("bell value");
    ThreeSpec { p1: v(&[0]), p2: v(&[1]), p3: v(&[s]), p13: v(&[0, s]), p23: v(&[1, s]) }
}

fn restricts_to_contexts(m: &Measure<Rational>, ppt: &Ppt<Rational>) -> bool {
    ppt.pba
        .contexts()
        .iter()
        .enumerate()
        .all(|(i, c)| restrict(m, c.generators()).map(|r| &r == ppt.measure(i)).unwrap_or(false))
}

fn three_spec_suite() -> Outcome {
    let mut rng = seeded(1);
    for k in 0..10_000 {
        let s = random_three_spec(&mut rng, 24);
        let bx = chi_eta_intervals(&s).map_err(err)?;
        ensure!(bx.chi_lo <= bx.chi_hi && bx.eta_lo <= bx.eta_hi, "case {k}: empty box for {s:?}");
        let corner = (
            if rng.gen_bool(0.5) { bx.chi_lo.clone() } else { bx.chi_hi.clone() },
            if rng.gen_bool(0.5) { bx.eta_lo.clone() } else { bx.eta_hi.clone() },
        );
        for (chi, eta) in [(None, None), (Some(corner.0), Some(corner.1))] {
            let m = extend_three(&s, chi, eta).map_err(err)?;
            ensure!(m.weights().iter().all(|w| *w >= rat(0, 1)), "case {k}: negative weight");
            ensure!(m.weights().iter().cloned().sum::<Rational>() == rat(1, 1), "case {k}: total weight");
            let got = [value(&m, 0b001), value(&m, 0b010), value(&m, 0b100), value(&m, 0b101), value(&m, 0b110)];
            let want = [&s.p1, &s.p2, &s.p3, &s.p13, &s.p23];
            ensure!(got.iter().zip(want).all(|(a, b)| a == b), "case {k}: inputs not reproduced for {s:?}");
        }
    }
    Ok("10000 specs".into())
}

/// Extensibility through a common `p12` and gluing, without any LP.
fn glue_extension(ppt: &Ppt<Rational>) -> Option<Measure<Rational>> {
    let specs = [three_spec_of(ppt, 2), three_spec_of(ppt, 3)];
    let boxes: Vec<_> = specs.iter().map(|s| chi_eta_intervals(s).expect("valid spec")).collect();
    let ranges: Vec<_> = boxes.iter().map(|b| b.p12_range()).collect();
    let lo = ranges.iter().map(|r| r.0.clone()).max().unwrap();
    let hi = ranges.iter().map(|r| r.1.clone()).min().unwrap();
    if lo > hi {
        return None;
    }
    let parts: Vec<Measure<Rational>> = specs
        .iter()
        .zip(&boxes)
        .map(|(s, b)| {
            let eta = b.eta_lo.clone().max(lo.clone() - b.chi_hi.clone());
            let chi = lo.clone() - eta.clone();
            extend_three(s, Some(chi), Some(eta)).expect("p12 inside the range")
        })
        .collect();
    Some(glue_four(&parts[0], &parts[1]).expect("shared pair marginal"))
}

fn bell_biconditional() -> Outcome {
    let mut rng = seeded(2);
    let (mut yes, mut no) = (0, 0);
    for k in 0..1000 {
        let ppt = if k % 4 != 0 {
            random_bell_ppt(&mut rng, 12).map_err(err)?
        } else {
            ppt_from_global(bell_pba(), &random_measure(&mut rng, 4, 12)).map_err(err)?
        };
        let (spec, p) = correlation_vector(&ppt).map_err(err)?;
        let lp = membership(&p, &spec).map_err(err)?.is_feasible();
        let glued = glue_extension(&ppt);
        if let Some(m) = &glued {
            ensure!(restricts_to_contexts(m, &ppt), "case {k}: glued measure misses a context");
        }
        ensure!(glued.is_some() == lp, "case {k}: gluing says {}, LP says {lp}", glued.is_some());
        if lp {
            yes += 1;
        } else {
            no += 1;
        }
    }
    ensure!(yes > 0 && no > 0, "degenerate sample: {yes} extensible, {no} not");
    Ok(format!("{yes} extensible, {no} not"))
}

fn chsh_violation() -> Outcome {
    let (a, b) = CHSH_ANGLES;
    let ppt = singlet_bell_ppt(a, b).map_err(err)?;
    let report = chsh_condition(&ppt).map_err(err)?;
    let expected = (2f64.sqrt() - 1.0) / 2.0;
    let v = report.max_violation();
    ensure!((v - expected).abs() < 1e-9, "CH value {v}, expected {expected}");
    ensure!(!report.holds, "condition reported as holding");
    let repr = classical_representable(&ppt).map_err(err)?;
    let FeasibilityCertificate::Infeasible { c, c0 } = &repr.certificate else {
        return Err("LP found a classical representation".into());
    };
    let dot = |u: &[f64]| c.iter().zip(u).map(|(x, y)| x * y).sum::<f64>();
    let verts = vertices::<f64>(&repr.spec).map_err(err)?;
    ensure!(verts.len() == 16, "{} vertices", verts.len());
    ensure!(verts.iter().all(|u| dot(u) <= c0 + 1e-9), "separator cuts a vertex");
    ensure!(dot(&repr.p) > c0 + 1e-9, "separator does not cut the state");
    Ok(format!("CH value {v:.10}, separator margin {:.4}", dot(&repr.p) - c0))
}

fn facet_count() -> Outcome {
    let spec = per_s_spec().map_err(err)?;
    ensure!(vertices::<Rational>(&spec).map_err(err)?.len() == 16 && spec.dimension() == 11, "wrong polytope");
    let facets = enumerate_facets(&spec).map_err(err)?;
    ensure!(facets.len() == 48, "{} facets", facets.len());
    let split = classify_per_s_facets(&facets);
    ensure!(split.relevant.len() == 32, "{} typed facets with data-dependent bounds", split.relevant.len());
    Ok(format!(
        "48 facets: {} data only, {} untyped, {} data-free, 32 relevant",
        split.data_only.len(),
        split.untyped.len(),
        split.data_free.len()
    ))
}

/// Pair contexts along a random forest, plus singleton contexts for
/// isolated generators, with locally consistent random pair measures.
fn random_forest_ppt(rng: &mut Rng64, n: usize, den: i64) -> Ppt<Rational> {
    let mut edges = Vec::new();
    for g in 1..n {
        if rng.gen_bool(0.75) {
            edges.push(vec![rng.gen_range(0..g), g]);
        }
    }
    let p: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=den)).collect();
    let mut contexts = edges.clone();
    let mut measures = Vec::new();
    for e in &edges {
        let (x, y) = (e[0], e[1]);
        let q = rng.gen_range((p[x] + p[y] - den).max(0)..=p[x].min(p[y]));
        let w = [den - p[x] - p[y] + q, p[x] - q, p[y] - q, q];
        measures.push(Measure::new(2, w.iter().map(|&k| rat(k, den)).collect()).unwrap());
    }
    for g in 0..n {
        if !edges.iter().any(|e| e.contains(&g)) {
            contexts.push(vec![g]);
            measures.push(Measure::new(1, vec![rat(den - p[g], den), rat(p[g], den)]).unwrap());
        }
    }
    Ppt::new(Pba::new(n, contexts).unwrap(), State::new(measures)).unwrap()
}

fn tree_suite() -> Outcome {
    let mut rng = seeded(5);
    for k in 0..500 {
        let n = rng.gen_range(1..=8);
        let ppt = random_forest_ppt(&mut rng, n, 10);
        let m = extend_tree(&ppt, &singleton_nodes(n)).map_err(|e| format!("case {k}: {e}"))?;
        ensure!(restricts_to_contexts(&m, &ppt), "case {k}: extension misses a context");
        let repr = classical_representable(&ppt).map_err(err)?;
        ensure!(repr.is_representable(), "case {k}: LP rejects a forest state");
    }
    Ok("500 forests".into())
}

fn monomial_function(spec: &CorrelationSpec, p: &[Rational]) -> PartialFunction<Rational> {
    let n = spec.n();
    let mut entries = vec![(Element::one(n).unwrap(), rat(1, 1))];
    for (mono, v) in spec.monomials().iter().zip(p) {
        let mask = mono.iter().fold(0usize, |acc, &g| acc | 1 << g);
        entries.push((intersection_element(mask, n).unwrap(), v.clone()));
    }
    PartialFunction::new(n, entries).unwrap()
}

/// Locally consistent pair states on the Bell square, the triangle and a
/// path, or marginals of a global measure.
fn random_ht_fixture(rng: &mut Rng64, k: usize) -> Ppt<Rational> {
    let den = 8;
    match k % 4 {
        0 => random_bell_ppt(rng, den).unwrap(),
        3 => {
            let n = rng.gen_range(2..=4);
            let pba = Pba::new(n, (1..n).map(|g| vec![g - 1, g]).collect()).unwrap();
            ppt_from_global(pba, &random_measure(rng, n, den)).unwrap()
        }
        _ => {
            let p: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=den)).collect();
            let contexts = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
            let measures = contexts
                .iter()
                .map(|c| {
                    let (x, y) = (c[0], c[1]);
                    let q = rng.gen_range((p[x] + p[y] - den).max(0)..=p[x].min(p[y]));
                    let w = [den - p[x] - p[y] + q, p[x] - q, p[y] - q, q];
                    Measure::new(2, w.iter().map(|&v| rat(v, den)).collect()).unwrap()
                })
                .collect();
            Ppt::new(Pba::new(3, contexts).unwrap(), State::new(measures)).unwrap()
        }
    }
}

fn horn_tarski_suite() -> Outcome {
    let mut rng = seeded(6);
    let (mut yes, mut no) = (0, 0);
    for k in 0..200 {
        let ppt = random_ht_fixture(&mut rng, k);
        let (spec, p) = correlation_vector(&ppt).map_err(err)?;
        let f = monomial_function(&spec, &p);
        let lp = membership(&p, &spec).map_err(err)?;
        match extend_full(&f) {
            Ok(m) => {
                ensure!(lp.is_feasible(), "case {k}: extension found but LP infeasible");
                ensure!(f.entries().iter().all(|(e, v)| &m.evaluate(e).unwrap() == v), "case {k}: extension disagrees");
                yes += 1;
            }
            Err(Error::NotExtensible) => {
                ensure!(!lp.is_feasible(), "case {k}: LP feasible but no extension");
                no += 1;
            }
            Err(e) => return Err(format!("case {k}: {e}")),
        }
        if let Some(global) = lp.extension(spec.n()) {
            let n = spec.n();
            let atoms = 1usize << n;
            let dom: Vec<Element> = (0..rng.gen_range(1..=4))
                .map(|_| Element::from_mask(n, rng.gen_range(1..(1u64 << atoms))).unwrap())
                .collect();
            let g = PartialFunction::from_measure(&global, &dom).map_err(err)?;
            ensure!(is_partial_measure(&g, 4).passed(), "case {k}: restriction of a measure fails");
        }
    }
    ensure!(yes > 0 && no > 0, "degenerate sample: {yes} extensible, {no} not");
    Ok(format!("{yes} extensible, {no} not"))
}

fn quotient_pipeline() -> Outcome {
    let projs = chsh_projections(CHSH_ANGLES.0, CHSH_ANGLES.1);
    let target = build_projection_pba(projs.clone()).map_err(err)?;
    let free = build_free_ht(&target, &[singlet()], projs).map_err(err)?;
    let report = verify_empirical_quotient(&free.ppts, &free.relation, Some(&free.target)).map_err(err)?;
    ensure!(report.all_passed(), "CHSH quotient: {report:?}");

    // A1 ∼ A2 ∼ A3 ∼ A1^c across three pair contexts
    let pba = Pba::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
    let (h, z) = (rat(1, 2), rat(0, 1));
    let same = Measure::new(2, vec![h.clone(), z.clone(), z.clone(), h.clone()]).unwrap();
    let opposite = Measure::new(2, vec![z.clone(), h.clone(), h, z]).unwrap();
    let state = State::new(vec![same.clone(), same, opposite]);
    let ppt = Ppt::new(pba.clone(), state.clone()).map_err(err)?;
    let rel = QuotientRelation::from_states(pba, &[state]).map_err(err)?;
    let report = verify_empirical_quotient(&[ppt], &rel, None).map_err(err)?;
    match report.ideal.witness {
        Some(QuotientWitness::Transitivity { path, .. }) if !report.ideal.passed => {
            Ok(format!("triangle rejected via {}", path.join(" ~ ")))
        }
        other => Err(format!("triangle not rejected by transitivity: {other:?}")),
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn homomorphism_direction() -> Outcome {
    let mixed = QuantumState::maximally_mixed(4);
    let up = QuantumState::vector(vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
    let aligned = ([0.0, 90.0], [0.0, 90.0]);
    let fixtures = [
        (aligned, singlet()),
        (CHSH_ANGLES, mixed.clone()),
        (CHSH_ANGLES, up.clone()),
        (([30.0, 60.0], [10.0, 100.0]), up),
        (CHSH_ANGLES, singlet()),
    ];
    let mut representable = 0;
    for (i, ((a, b), state)) in fixtures.into_iter().enumerate() {
        let projs = chsh_projections(a, b);
        let target = build_projection_pba(projs.clone()).map_err(err)?;
        let free = build_free_ht(&target, &[state, mixed.clone()], projs).map_err(err)?;
        if classical_representable(&free.ppts[0]).map_err(err)?.is_representable() {
            representable += 1;
            ensure!(!enumerate_homomorphisms(&free.relation).map_err(err)?.is_empty(), "fixture {i}: no homomorphism");
        }
    }
    ensure!(representable >= 3, "only {representable} representable fixtures");
    let free_bell = check_embeddable(&QuotientRelation::identity(bell_pba())).map_err(err)?;
    ensure!(free_bell.homomorphisms.len() == 16, "{} homomorphisms", free_bell.homomorphisms.len());
    ensure!(free_bell.embeddable, "free Bell PBA not embeddable");
    Ok(format!("{representable} representable fixtures, 16 homomorphisms"))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("three-observable extension", 10, three_spec_suite),
        ("Bell gluing vs LP", 60, bell_biconditional),
        ("CHSH violation", 1, chsh_violation),
        ("per-s facets", 300, facet_count),
        ("tree extension", 60, tree_suite),
        ("Horn-Tarski vs LP", 120, horn_tarski_suite),
        ("quotient pipeline", 5, quotient_pipeline),
        ("homomorphisms", 5, homomorphism_direction),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let slow = elapsed > Duration::from_secs(budget);
        let (tag, detail) = match (&outcome, slow) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {} {name} ({:.2} s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
