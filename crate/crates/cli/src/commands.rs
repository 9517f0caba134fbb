use serde_json::{json, Map, Value};

use pba_core::boolean_core::{measure_from_intersections, Element, Measure};
use pba_core::extension::{
    chi_eta_intervals, chsh_condition, extend_three, extend_tree, singleton_nodes, three_by_three_condition, ChshReport,
    Side, ThreeByThreeReport, ThreeSpec,
};
use pba_core::horn_tarski::{extend_full, interior_exterior, is_partial_measure, PartialFunction, Verdict};
use pba_core::polytope::{
    classical_representable, correlation_vector, enumerate_facets, CorrelationSpec, FeasibilityCertificate,
};
use pba_core::ppt::{compatibility_graph, export_dot, merge_cliques, validate_ppt, Pba, Ppt, State, ValidationIssue};
use pba_core::quantum::{build_projection_pba, free_state_from_projections, ProjectionMatrix};
use pba_core::quotient::{build_free_ht, check_embeddable, verify_empirical_quotient, ConditionCheck, QuotientWitness};
use pba_core::scalar::{snap_to_rational, Rational};
use pba_core::{Error as CoreError, Scalar};

use crate::document::{
    atom_key, measure_json, parse_state_document, Arithmetic, FunctionDocument, Number, PptDocument,
    QuantumDocument, SpecDocument, ThreeSpecDocument,
};
use crate::error::{CliError, CliResult};
use crate::expr::{element_atoms, parse_element};

/// Result body plus exit code.
pub struct Report {
    pub code: u8,
    pub body: Value,
}

impl Report {
    fn new(code: u8, body: Value) -> Self {
        Report { code, body }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Tree,
    Three,
    Glue,
    Lp,
    Ht,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Nodes {
    Singletons,
    Contexts,
}

fn node_sets(pba: &Pba, nodes: Nodes) -> Vec<Vec<usize>> {
    match nodes {
        Nodes::Singletons => singleton_nodes(pba.n()),
        Nodes::Contexts => pba.contexts().iter().map(|c| c.generators().to_vec()).collect(),
    }
}

fn ensure_consistent<S: Scalar>(ppt: &Ppt<S>) -> CliResult<()> {
    let report = validate_ppt(ppt);
    if report.is_valid() {
        return Ok(());
    }
    let label = |i: usize| format!("{{{}}}", ppt.pba.label(ppt.pba.contexts()[i].generators()));
    let issues: Vec<String> = report
        .issues
        .iter()
        .map(|issue| match issue {
            ValidationIssue::MarginalMismatch { left, right, shared } => {
                format!("contexts {} and {} disagree on {}", label(*left), label(*right), ppt.pba.label(shared))
            }
            ValidationIssue::NotNormalized { context } | ValidationIssue::NegativeWeight { context, .. } => {
                format!("{issue} {}", label(*context))
            }
        })
        .collect();
    Err(CliError::Input(issues.join("; ")))
}

fn certificate_json<S: Number>(cert: &FeasibilityCertificate<S>, spec: &CorrelationSpec) -> Value {
    match cert {
        FeasibilityCertificate::Feasible { weights } => {
            let w: Map<String, Value> = weights
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_negligible())
                .map(|(eps, w)| (atom_key(eps, spec.n()), w.to_json()))
                .collect();
            json!({ "kind": "weights", "weights": w })
        }
        FeasibilityCertificate::Infeasible { c, c0 } => {
            let coeffs: Map<String, Value> = spec
                .labels()
                .into_iter()
                .zip(c)
                .filter(|(_, v)| !v.is_negligible())
                .map(|(l, v)| (l, v.to_json()))
                .collect();
            json!({ "kind": "separator", "coefficients": coeffs, "bound": c0.to_json() })
        }
    }
}

fn weights_certificate<S: Number>(m: &Measure<S>, spec: &CorrelationSpec, p: &[S]) -> CliResult<Value> {
    let cert = FeasibilityCertificate::Feasible { weights: m.weights().to_vec() };
    if !cert.verify(spec, p) {
        return Err(CliError::Internal("extension does not reproduce the correlation vector".into()));
    }
    Ok(certificate_json(&cert, spec))
}

fn diagnostics<S: Scalar>(ppt: &Ppt<S>, spec: &CorrelationSpec) -> Value {
    json!({
        "generators": ppt.pba.n(),
        "contexts": ppt.pba.contexts().len(),
        "dimension": spec.dimension(),
        "arithmetic": if S::EXACT { "exact" } else { "float" },
    })
}

pub fn check<S: Number>(doc: &PptDocument) -> CliResult<Report> {
    let ppt = doc.to_ppt::<S>()?;
    ensure_consistent(&ppt)?;
    let names = ppt.pba.names().to_vec();
    let (spec, p) = correlation_vector(&ppt)?;
    // forests extend by gluing alone
    if let Ok(m) = extend_tree(&ppt, &singleton_nodes(ppt.pba.n())) {
        let certificate = weights_certificate(&m, &spec, &p)?;
        return Ok(Report::new(
            0,
            json!({
                "verdict": "representable",
                "method": "tree",
                "certificate": certificate,
                "extension": measure_json(&m, &names),
                "diagnostics": diagnostics(&ppt, &spec),
            }),
        ));
    }
    let repr = classical_representable(&ppt)?;
    let ok = repr.is_representable();
    let mut body = json!({
        "verdict": if ok { "representable" } else { "not representable" },
        "method": "lp",
        "certificate": certificate_json(&repr.certificate, &spec),
    });
    if let Some(m) = repr.extension() {
        body["extension"] = measure_json(&m, &names);
    }
    body["diagnostics"] = diagnostics(&ppt, &spec);
    Ok(Report::new(if ok { 0 } else { 1 }, body))
}

fn extended<S: Number>(method: &str, m: &Measure<S>, names: &[String], extra: Value) -> Report {
    let mut body = json!({ "method": method, "verdict": "extended", "extension": measure_json(m, names) });
    merge(&mut body, extra);
    Report::new(0, body)
}

fn not_extensible(method: &str, extra: Value) -> Report {
    let mut body = json!({ "method": method, "verdict": "not extensible" });
    merge(&mut body, extra);
    Report::new(1, body)
}

fn merge(body: &mut Value, extra: Value) {
    if let (Value::Object(b), Value::Object(e)) = (body, extra) {
        b.extend(e);
    }
}

/// Relabels a measure over local generators `order[j]` to global ids.
fn to_global<S: Scalar>(m: &Measure<S>, order: &[usize]) -> CliResult<Measure<S>> {
    let mut w = vec![S::zero(); m.weights().len()];
    for (local, v) in m.weights().iter().enumerate() {
        let global = order.iter().enumerate().filter(|(j, _)| local >> j & 1 == 1).fold(0, |a, (_, &g)| a | 1 << g);
        w[global] = v.clone();
    }
    Ok(Measure::new(m.arity(), w)?)
}

fn three_json<S: Number>(s: &ThreeSpec<S>) -> CliResult<Value> {
    let bx = chi_eta_intervals(s)?;
    let (lo, hi) = bx.p12_range();
    Ok(json!({
        "chi": [bx.chi_lo.to_json(), bx.chi_hi.to_json()],
        "eta": [bx.eta_lo.to_json(), bx.eta_hi.to_json()],
        "p12": [lo.to_json(), hi.to_json()],
    }))
}

fn lambda_table<S: Number>(m: &Measure<S>) -> Value {
    let t: Map<String, Value> = m.weights().iter().enumerate().map(|(a, w)| (atom_key(a, 3), w.to_json())).collect();
    Value::Object(t)
}

pub fn extend_three_document<S: Number>(doc: &ThreeSpecDocument) -> CliResult<Report> {
    let field = |k: &str| {
        doc.three.get(k).ok_or_else(|| CliError::Input(format!("three: missing {k:?}"))).and_then(S::parse_json)
    };
    let spec = ThreeSpec { p1: field("p1")?, p2: field("p2")?, p3: field("p3")?, p13: field("p13")?, p23: field("p23")? };
    let chi = doc.chi.as_ref().map(S::parse_json).transpose()?;
    let eta = doc.eta.as_ref().map(S::parse_json).transpose()?;
    let m = extend_three(&spec, chi, eta)?;
    let names: Vec<String> = ["A1", "A2", "A3"].map(String::from).to_vec();
    Ok(extended("three", &m, &names, json!({ "box": three_json(&spec)?, "lambda": lambda_table(&m) })))
}

fn extend_three_ppt<S: Number>(ppt: &Ppt<S>) -> CliResult<Report> {
    let ctxs = ppt.pba.contexts();
    let shape = || CliError::Inapplicable("three needs three generators in two pair contexts sharing one".into());
    if ppt.pba.n() != 3 || ctxs.len() != 2 || ctxs.iter().any(|c| c.arity() != 2) {
        return Err(shape());
    }
    let (c0, c1) = (ctxs[0].generators(), ctxs[1].generators());
    let s = *c0.iter().find(|g| c1.contains(g)).ok_or_else(shape)?;
    let a = *c0.iter().find(|&&g| g != s).unwrap();
    let b = *c1.iter().find(|&&g| g != s).unwrap();
    let v = |g: &[usize]| {
        let mut g = g.to_vec();
        g.sort_unstable();
        ppt.intersection_value(&g).expect("value inside a context")
    };
    let spec = ThreeSpec { p1: v(&[a]), p2: v(&[b]), p3: v(&[s]), p13: v(&[a, s]), p23: v(&[b, s]) };
    let local = extend_three(&spec, None, None)?;
    let m = to_global(&local, &[a, b, s])?;
    Ok(extended("three", &m, ppt.pba.names(), json!({ "box": three_json(&spec)?, "lambda": lambda_table(&local) })))
}

fn chsh_json<S: Number>(r: &ChshReport<S>, names: &[String]) -> Value {
    let label = |g: usize| names[g].clone();
    let ch: Vec<Value> = r
        .ch
        .iter()
        .map(|c| {
            json!({
                "odd_pair": [label(c.odd_pair.0), label(c.odd_pair.1)],
                "value": c.value.to_json(),
                "violation": c.violation().to_json(),
            })
        })
        .collect();
    json!({
        "condition": "chsh",
        "unmeasured": [label(r.x[0]), label(r.x[1])],
        "alpha": r.alphas.iter().map(Number::to_json).collect::<Vec<_>>(),
        "beta": r.betas.iter().map(Number::to_json).collect::<Vec<_>>(),
        "holds": r.holds,
        "max_violation": r.max_violation().to_json(),
        "ch": ch,
    })
}

fn three_by_three_json<S: Number>(r: &ThreeByThreeReport<S>, names: &[String]) -> Value {
    let exprs: Vec<Value> = r
        .expressions
        .iter()
        .map(|e| json!({ "label": e.label, "alpha": e.alpha.to_json(), "beta": e.beta.to_json() }))
        .collect();
    json!({
        "condition": "three_by_three",
        "unmeasured": r.triple.iter().map(|&g| names[g].clone()).collect::<Vec<_>>(),
        "holds": r.feasible,
        "expressions": exprs,
        "solution": r.solution.as_ref().map(|s| s.iter().map(Number::to_json).collect::<Vec<_>>()),
    })
}

pub fn extend<S: Number>(doc: &PptDocument, method: Method, nodes: Nodes) -> CliResult<Report> {
    let ppt = doc.to_ppt::<S>()?;
    ensure_consistent(&ppt)?;
    let names = ppt.pba.names().to_vec();
    match method {
        Method::Tree => {
            let m = extend_tree(&ppt, &node_sets(&ppt.pba, nodes))?;
            Ok(extended("tree", &m, &names, json!({})))
        }
        Method::Glue => match chsh_condition(&ppt) {
            Ok(r) => match &r.extension {
                Some(m) => Ok(extended("glue", m, &names, json!({ "bell": chsh_json(&r, &names) }))),
                None => Ok(not_extensible("glue", json!({ "bell": chsh_json(&r, &names) }))),
            },
            Err(CoreError::WrongTopology(_)) => {
                let m = extend_tree(&ppt, &node_sets(&ppt.pba, Nodes::Contexts))?;
                Ok(extended("glue", &m, &names, json!({})))
            }
            Err(e) => Err(e.into()),
        },
        Method::Three => extend_three_ppt(&ppt),
        Method::Lp => {
            let repr = classical_representable(&ppt)?;
            let cert = json!({ "certificate": certificate_json(&repr.certificate, &repr.spec) });
            match repr.extension() {
                Some(m) => Ok(extended("lp", &m, &names, cert)),
                None => Ok(not_extensible("lp", cert)),
            }
        }
        Method::Ht => {
            let (spec, p) = correlation_vector(&ppt)?;
            let f = monomial_function(&spec, &p)?;
            match extend_full(&f) {
                Ok(m) => Ok(extended("ht", &m, &names, json!({}))),
                Err(CoreError::NotExtensible) => Ok(not_extensible("ht", json!({}))),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn monomial_function<S: Scalar>(spec: &CorrelationSpec, p: &[S]) -> CliResult<PartialFunction<S>> {
    let n = spec.n();
    let mut entries = vec![(Element::one(n)?, S::one())];
    for (mono, v) in spec.monomials().iter().zip(p) {
        let mask = mono.iter().fold(0usize, |acc, &g| acc | 1 << g);
        entries.push((pba_core::boolean_core::intersection_element(mask, n)?, v.clone()));
    }
    Ok(PartialFunction::new(n, entries)?)
}

pub fn bell<S: Number>(doc: &PptDocument) -> CliResult<Report> {
    let ppt = doc.to_ppt::<S>()?;
    ensure_consistent(&ppt)?;
    let names = ppt.pba.names().to_vec();
    let (mut body, extension) = match chsh_condition(&ppt) {
        Ok(r) => (chsh_json(&r, &names), r.extension),
        Err(CoreError::WrongTopology(_)) => {
            let r = three_by_three_condition(&ppt, Side::First)?;
            (three_by_three_json(&r, &names), r.extension)
        }
        Err(e) => return Err(e.into()),
    };
    let holds = body["holds"].as_bool().unwrap_or(false);
    if let Some(m) = extension {
        body["extension"] = measure_json(&m, &names);
    }
    Ok(Report::new(if holds { 0 } else { 1 }, body))
}

pub fn facets(v: &Value) -> CliResult<Report> {
    let spec = if v.get("contexts").is_some() {
        let pba = PptDocument::parse(v)?.to_pba()?;
        let ctxs: Vec<Vec<usize>> = pba.contexts().iter().map(|c| c.generators().to_vec()).collect();
        CorrelationSpec::from_contexts(pba.n(), &ctxs)?
    } else {
        let doc: SpecDocument = crate::document::parse_as(v)?;
        CorrelationSpec::new(doc.generators.len(), doc.monomials()?)?
    };
    let labels = spec.labels();
    let facets = enumerate_facets(&spec)?;
    let list: Vec<Value> = facets
        .iter()
        .map(|f| {
            json!({
                "coefficients": f.coefficients.iter().map(|c| c.to_string().parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(c.to_string()))).collect::<Vec<_>>(),
                "bound": f.bound.to_string().parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(f.bound.to_string())),
                "text": f.render(&labels),
            })
        })
        .collect();
    Ok(Report::new(0, json!({ "coordinates": labels, "count": list.len(), "facets": list })))
}

pub fn ht<S: Number>(doc: &FunctionDocument, max_len: usize) -> CliResult<Report> {
    let names = &doc.generators;
    let n = names.len();
    let entries = doc
        .entries
        .iter()
        .map(|e| Ok((parse_element(&e.element, names)?, S::parse_json(&e.value)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let f = PartialFunction::new(n, entries)?;
    let mut body = json!({ "max_len": max_len, "subalgebra": f.is_subalgebra() });
    let mut code = 0;
    match is_partial_measure(&f, max_len) {
        Verdict::PassBounded { .. } => {
            body["verdict"] = json!("partial measure");
            match extend_full(&f) {
                Ok(m) => body["extension"] = measure_json(&m, names),
                Err(CoreError::NotExtensible) => {
                    body["verdict"] = json!("not extensible");
                    code = 1;
                }
                Err(CoreError::LimitExceeded(msg)) => body["extension_skipped"] = json!(msg),
                Err(e) => return Err(e.into()),
            }
        }
        Verdict::Fail(w) => {
            code = 1;
            body["verdict"] = json!("not a partial measure");
            let seq = |s: &[Element]| s.iter().map(element_atoms).collect::<Vec<_>>();
            body["witness"] = json!({
                "left": seq(&w.left),
                "right": seq(&w.right),
                "left_sum": w.left_sum.to_json(),
                "right_sum": w.right_sum.to_json(),
            });
        }
    }
    if !doc.queries.is_empty() {
        let mut bands = Vec::new();
        for q in &doc.queries {
            let x = parse_element(q, names)?;
            let band = interior_exterior(&f, &x, max_len)?;
            bands.push(json!({
                "element": q,
                "interior": band.interior.to_json(),
                "exterior": band.exterior.to_json(),
                "exact": band.exact,
            }));
        }
        body["bands"] = Value::Array(bands);
    }
    Ok(Report::new(code, body))
}

fn condition_json(c: &ConditionCheck) -> Value {
    json!({
        "passed": c.passed,
        "exhaustive": c.exhaustive,
        "witness": c.witness.as_ref().map(witness_json),
    })
}

fn witness_json(w: &QuotientWitness) -> Value {
    match w {
        QuotientWitness::Transitivity { context, path } => json!({ "kind": "transitivity", "context": context, "path": path }),
        QuotientWitness::MissingIdentification { context, element, reduced } => {
            json!({ "kind": "missing_identification", "context": context, "element": element, "reduced": reduced })
        }
        QuotientWitness::NoCommonElement { contexts, left, right } => {
            json!({ "kind": "no_common_element", "contexts": [contexts.0, contexts.1], "left": left, "right": right })
        }
        QuotientWitness::OperationMismatch { context, operation, left, right } => {
            json!({ "kind": "operation_mismatch", "context": context, "operation": operation, "left": left, "right": right })
        }
        QuotientWitness::StateMismatch { element, state, left, right } => {
            json!({ "kind": "state_mismatch", "element": element, "state": state, "left": left, "right": right })
        }
    }
}

/// Snaps every intersection value to a fraction with denominator at most
/// `den` and rebuilds the atoms.
fn snap_ppt(ppt: &Ppt<f64>, den: u64) -> CliResult<Ppt<Rational>> {
    let mut measures = Vec::new();
    for i in 0..ppt.pba.contexts().len() {
        let values: std::collections::BTreeMap<usize, Rational> = ppt
            .measure(i)
            .intersection_values()
            .iter()
            .enumerate()
            .map(|(mask, &v)| (mask, snap_to_rational(v, den)))
            .collect();
        let m = measure_from_intersections(&values, ppt.measure(i).arity())
            .map_err(|e| CliError::Input(format!("snapping to denominator {den}: {e}")))?;
        measures.push(m);
    }
    Ok(Ppt::new(ppt.pba.clone(), State::new(measures))?)
}

fn ppt_value(ppt: &Ppt<f64>, snap: Option<u64>) -> CliResult<Value> {
    let doc = match snap {
        Some(den) => PptDocument::from_ppt(&snap_ppt(ppt, den)?),
        None => PptDocument::from_ppt(ppt),
    };
    Ok(serde_json::to_value(doc)?)
}

fn pick_generators(all: &[ProjectionMatrix], labels: Option<&[String]>) -> CliResult<Vec<ProjectionMatrix>> {
    match labels {
        None => Ok(all.to_vec()),
        Some(ls) => ls
            .iter()
            .map(|l| {
                all.iter()
                    .find(|p| p.label() == l.trim())
                    .cloned()
                    .ok_or_else(|| CliError::Input(format!("no projection labelled {l:?}")))
            })
            .collect(),
    }
}

pub fn quotient(doc: &QuantumDocument, generators: Option<&[String]>, snap: Option<u64>) -> CliResult<Report> {
    let projs = doc.projections()?;
    let states = doc.states()?;
    if states.is_empty() {
        return Err(CliError::Input("quotient needs at least one state".into()));
    }
    let target = build_projection_pba(projs.clone())?;
    let gens = pick_generators(&projs, generators)?;
    let free = build_free_ht(&target, &states, gens)?;
    let names = free.relation.pba.names().to_vec();
    let report = verify_empirical_quotient(&free.ppts, &free.relation, Some(&free.target))?;
    let embedding = check_embeddable(&free.relation)?;
    let relation = json!({
        "contexts": free.relation.pba.contexts().iter().map(|c| c.generators().iter().map(|&g| names[g].clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "zero_atoms": free.relation.zero_atoms.iter().zip(free.relation.pba.contexts()).map(|(z, c)| z.iter().map(|&a| atom_key(a, c.arity())).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "identifications": free.relation.identifications.iter().map(|(x, y)| [x.render(&names), y.render(&names)]).collect::<Vec<_>>(),
    });
    let ok = report.all_passed();
    let body = json!({
        "verdict": if ok { "empirical quotient" } else { "not an empirical quotient" },
        "property_g": { "holds": free.property_g.holds, "exhaustive": free.property_g.exhaustive },
        "relation": relation,
        "conditions": {
            "ideal": condition_json(&report.ideal),
            "intersection": condition_json(&report.intersection),
            "operations": condition_json(&report.operations),
            "states": condition_json(&report.states),
        },
        "embedding": {
            "embeddable": embedding.embeddable,
            "homomorphisms": embedding.homomorphisms.len(),
            "unseparated": embedding.unseparated.map(|(c, a)| json!({ "context": c, "atom": a })),
        },
        "ppts": free.ppts.iter().map(|p| ppt_value(p, snap)).collect::<CliResult<Vec<_>>>()?,
    });
    Ok(Report::new(if ok { 0 } else { 1 }, body))
}

pub struct GraphOutput {
    pub report: Report,
    pub dot: String,
}

pub fn graph(doc: &PptDocument, nodes: Nodes, merge_nodes: bool) -> CliResult<GraphOutput> {
    let pba = doc.to_pba()?;
    let mut g = compatibility_graph(&pba, &node_sets(&pba, nodes))?;
    if merge_nodes {
        g = merge_cliques(&g, &pba)?;
    }
    let cycle = g.find_cycle();
    let body = json!({
        "nodes": g.labels,
        "edges": g.edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        "forest": cycle.is_none(),
        "cycle": cycle.map(|c| c.iter().map(|&v| g.labels[v].clone()).collect::<Vec<_>>()),
    });
    Ok(GraphOutput { dot: export_dot(&g), report: Report::new(0, body) })
}

/// The PPT of a state on the projection algebra, as a document.
pub fn quantum(doc: &QuantumDocument, state: Option<&Value>, arithmetic: Arithmetic, snap: Option<u64>) -> CliResult<Value> {
    let projs = doc.projections()?;
    let state = match state {
        Some(v) => parse_state_document(v)?,
        None => doc
            .states()?
            .into_iter()
            .next()
            .ok_or_else(|| CliError::Input("no state given".into()))?,
    };
    let ppt = free_state_from_projections(projs, &state)?;
    match arithmetic {
        Arithmetic::Float => ppt_value(&ppt, None),
        Arithmetic::Exact => {
            let den = snap.ok_or_else(|| CliError::Input("exact output of quantum values needs --snap <den>".into()))?;
            ppt_value(&ppt, Some(den))
        }
    }
}
