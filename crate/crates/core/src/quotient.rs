//! Empirical quotients of free partial probability theories: property (G),
//! the free construction over a projection algebra, the four quotient
//! conditions, and {0,1} homomorphisms.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::boolean_core::{embed, Element};
use crate::error::{Error, Result};
use crate::ppt::{Pba, Ppt, State};
use crate::quantum::{
    atom_projection, commuting_closure, context_measure, is_zero_matrix, matrices_equal, maximal_commuting_subsets,
    CMatrix, ProjectionMatrix, ProjectionPba, QuantumState, DEDUP_TOLERANCE,
};
use crate::scalar::Scalar;

/// Largest context (in generators) whose algebra is enumerated element by
/// element.
pub const QUOTIENT_CONTEXT_LIMIT: usize = 4;
/// Contexts with at most this many generators get exhaustive pair checks
/// for operation preservation; larger ones are sampled.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 3;
/// Family size up to which property (G) is checked.
pub const PROPERTY_G_FAMILY_LIMIT: usize = 4;
/// Largest generator count for homomorphism enumeration.
pub const HOMOMORPHISM_LIMIT: usize = 24;

const PAIR_SAMPLES: usize = 20_000;

/// An element of the free PBA in canonical form: the smallest generator
/// set it depends on, and the element of the free algebra on that set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XElement {
    gens: Vec<usize>,
    element: Element,
}

fn depends_on(e: &Element, j: usize) -> bool {
    let bit = 1usize << j;
    (0..1usize << e.arity()).any(|a| e.contains_atom(a) != e.contains_atom(a ^ bit))
}

fn drop_position(e: &Element, j: usize) -> Result<Element> {
    let low = (1usize << j) - 1;
    let atoms = (0..1usize << (e.arity() - 1)).filter(|&a| {
        let full = (a & low) | ((a & !low) << 1);
        e.contains_atom(full)
    });
    Element::from_atoms(e.arity() - 1, atoms)
}

impl XElement {
    /// `element` lives on the sorted generator list `gens`.
    pub fn new(gens: &[usize], element: Element) -> Result<Self> {
        if element.arity() != gens.len() {
            return Err(Error::ArityMismatch { left: gens.len(), right: element.arity() });
        }
        let mut gens = gens.to_vec();
        let mut element = element;
        let mut j = 0;
        while j < gens.len() {
            if depends_on(&element, j) {
                j += 1;
            } else {
                element = drop_position(&element, j)?;
                gens.remove(j);
            }
        }
        Ok(XElement { gens, element })
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    /// Value under the {0,1} assignment `delta` of all generators.
    pub fn evaluate(&self, delta: &[bool]) -> bool {
        let eps = self.gens.iter().enumerate().fold(0usize, |acc, (i, &g)| acc | (delta[g] as usize) << i);
        self.element.contains_atom(eps)
    }

    /// Union of atoms, each written as an intersection of generators and
    /// complements.
    pub fn render(&self, names: &[String]) -> String {
        if self.element.is_zero() {
            return "0".into();
        }
        if self.gens.is_empty() {
            return "1".into();
        }
        self.element
            .atoms()
            .map(|a| {
                self.gens
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| if a >> i & 1 == 1 { names[g].clone() } else { format!("{}^c", names[g]) })
                    .collect::<Vec<_>>()
                    .join("∩")
            })
            .collect::<Vec<_>>()
            .join(" ∪ ")
    }

    fn in_context(&self, ctx: &[usize]) -> bool {
        self.gens.iter().all(|g| ctx.binary_search(g).is_ok())
    }

    /// The same element written over the sorted generator list `ctx`.
    fn lift(&self, ctx: &[usize]) -> Result<Element> {
        let kept: Vec<usize> = self.gens.iter().map(|g| ctx.binary_search(g).expect("support inside context")).collect();
        embed(&self.element, &kept, ctx.len())
    }
}

/// Value of `x` under a state, read from any context containing it.
pub fn evaluate_state<S: Scalar>(ppt: &Ppt<S>, x: &XElement) -> Result<S> {
    let ci = ppt.pba.context_containing(&x.gens).ok_or_else(|| Error::NodeNotInPba(x.gens.clone()))?;
    let ctx = ppt.pba.contexts()[ci].generators();
    ppt.measure(ci).evaluate(&x.lift(ctx)?)
}

/// An equivalence on the free PBA: per context, the ideal spanned by
/// `zero_atoms` (local atom indices); across contexts, explicit
/// identifications.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientRelation {
    pub pba: Pba,
    pub zero_atoms: Vec<Vec<usize>>,
    pub identifications: Vec<(XElement, XElement)>,
}

impl QuotientRelation {
    pub fn identity(pba: Pba) -> Self {
        let zero_atoms = vec![Vec::new(); pba.contexts().len()];
        QuotientRelation { pba, zero_atoms, identifications: Vec::new() }
    }

    /// Ideal relation of a state collection: atoms that every state
    /// assigns zero.
    pub fn from_states<S: Scalar>(pba: Pba, states: &[State<S>]) -> Result<Self> {
        let zero_atoms = state_ideals(&pba, states)?;
        Ok(QuotientRelation { pba, zero_atoms, identifications: Vec::new() })
    }

    pub fn with_identifications(mut self, pairs: Vec<(XElement, XElement)>) -> Self {
        self.identifications.extend(pairs);
        self
    }
}

fn state_ideals<S: Scalar>(pba: &Pba, states: &[State<S>]) -> Result<Vec<Vec<usize>>> {
    pba.contexts()
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let atoms = 1usize << c.arity();
            let mut zero = Vec::new();
            for a in 0..atoms {
                let all_zero = states.iter().all(|s| s.measures().get(ci).is_none_or(|m| m.weight(a).is_negligible()));
                if all_zero {
                    zero.push(a);
                }
            }
            Ok(zero)
        })
        .collect()
}

fn context_elements(arity: usize) -> Result<Vec<Element>> {
    if arity > QUOTIENT_CONTEXT_LIMIT {
        return Err(Error::LimitExceeded(format!("context of {arity} generators (limit {QUOTIENT_CONTEXT_LIMIT})")));
    }
    let count = 1u64 << (1u64 << arity);
    (0..count).map(|m| Element::from_mask(arity, m)).collect()
}

fn mask_of(atoms: &[usize], arity: usize) -> Result<Element> {
    Element::from_atoms(arity, atoms.iter().copied())
}

/// Union-find over every element of every context, with the generating
/// edges kept for witness paths.
struct Equivalence {
    elements: Vec<XElement>,
    index: HashMap<XElement, usize>,
    root: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Equivalence {
    fn build(rel: &QuotientRelation) -> Result<Self> {
        let mut elements = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |x: XElement, elements: &mut Vec<XElement>| -> usize {
            *index.entry(x.clone()).or_insert_with(|| {
                elements.push(x);
                elements.len() - 1
            })
        };
        let mut edges = Vec::new();
        for (ci, ctx) in rel.pba.contexts().iter().enumerate() {
            let gens = ctx.generators();
            let zero = mask_of(&rel.zero_atoms[ci], gens.len())?;
            let keep = zero.complement();
            for e in context_elements(gens.len())? {
                let reduced = e.meet(&keep)?;
                let a = intern(XElement::new(gens, e.clone())?, &mut elements);
                if reduced != e {
                    let b = intern(XElement::new(gens, reduced)?, &mut elements);
                    edges.push((a, b));
                }
            }
        }
        for (x, y) in &rel.identifications {
            let a = intern(x.clone(), &mut elements);
            let b = intern(y.clone(), &mut elements);
            edges.push((a, b));
        }
        let n = elements.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let root = (0..n).map(|x| find(&mut parent, x)).collect();
        let index = elements.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        Ok(Equivalence { elements, index, root, adjacency })
    }

    fn class(&self, x: &XElement) -> Option<usize> {
        self.index.get(x).map(|&i| self.root[i])
    }

    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.elements.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &v in &self.adjacency[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from && prev[cur] != usize::MAX {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Target of a quotient: images of the free generators and the states
/// evaluated on those images.
#[derive(Debug, Clone)]
pub struct QuantumTarget {
    pub images: Vec<CMatrix>,
    pub states: Vec<QuantumState>,
}

impl QuantumTarget {
    pub fn image(&self, x: &XElement) -> CMatrix {
        let d = self.images[0].nrows();
        let ms: Vec<&CMatrix> = x.gens.iter().map(|&g| &self.images[g]).collect();
        x.element.atoms().fold(CMatrix::zeros(d, d), |acc, a| acc + atom_projection(&ms, a, d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuotientWitness {
    /// Two elements of one context that the relation identifies although
    /// their difference is outside the context's ideal; `path` is the chain
    /// of identifications joining them.
    Transitivity { context: usize, path: Vec<String> },
    /// An element not identified with its reduction modulo the ideal.
    MissingIdentification { context: usize, element: String, reduced: String },
    /// Identified elements of two contexts with no identified element in
    /// the intersection.
    NoCommonElement { contexts: (usize, usize), left: String, right: String },
    OperationMismatch { context: usize, operation: &'static str, left: String, right: String },
    StateMismatch { element: String, state: usize, left: f64, right: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub passed: bool,
    pub exhaustive: bool,
    pub witness: Option<QuotientWitness>,
}

impl ConditionCheck {
    fn pass(exhaustive: bool) -> Self {
        ConditionCheck { passed: true, exhaustive, witness: None }
    }

    fn fail(w: QuotientWitness) -> Self {
        ConditionCheck { passed: false, exhaustive: true, witness: Some(w) }
    }
}

/// Conditions (i)–(iv): ideal coincidence, intersection witnesses,
/// operation preservation, state agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    pub ideal: ConditionCheck,
    pub intersection: ConditionCheck,
    pub operations: ConditionCheck,
    pub states: ConditionCheck,
}

impl QuotientReport {
    pub fn all_passed(&self) -> bool {
        self.ideal.passed && self.intersection.passed && self.operations.passed && self.states.passed
    }
}

pub fn verify_empirical_quotient<S: Scalar>(
    free: &[Ppt<S>],
    relation: &QuotientRelation,
    target: Option<&QuantumTarget>,
) -> Result<QuotientReport> {
    let pba = &relation.pba;
    let names = pba.names();
    for p in free {
        if p.pba != *pba {
            return Err(Error::StateShape("free PPTs must share the relation's PBA".into()));
        }
    }
    let states: Vec<State<S>> = free.iter().map(|p| p.state.clone()).collect();
    let ideals = state_ideals(pba, &states)?;
    let eq = Equivalence::build(relation)?;
    let render = |i: usize| eq.elements[i].render(names);

    let ideal = check_ideal(pba, &ideals, &eq, &render)?;
    let intersection = check_intersections(pba, &eq, &render);
    let operations = check_operations(pba, &eq, target)?;
    let states_check = check_states(free, &eq, target)?;
    Ok(QuotientReport { ideal, intersection, operations, states: states_check })
}

fn check_ideal(
    pba: &Pba,
    ideals: &[Vec<usize>],
    eq: &Equivalence,
    render: &dyn Fn(usize) -> String,
) -> Result<ConditionCheck> {
    for (ci, ctx) in pba.contexts().iter().enumerate() {
        let gens = ctx.generators();
        let keep = mask_of(&ideals[ci], gens.len())?.complement();
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for e in context_elements(gens.len())? {
            let reduced = e.meet(&keep)?;
            let xe = XElement::new(gens, e.clone())?;
            let xr = XElement::new(gens, reduced.clone())?;
            let (ce, cr) = (eq.class(&xe).expect("interned"), eq.class(&xr).expect("interned"));
            if ce != cr {
                return Ok(ConditionCheck::fail(QuotientWitness::MissingIdentification {
                    context: ci,
                    element: xe.render(pba.names()),
                    reduced: xr.render(pba.names()),
                }));
            }
            if reduced == e {
                let i = eq.index[&xr];
                if let Some(&j) = seen.get(&cr) {
                    let path = eq.path(j, i).into_iter().map(render).collect();
                    return Ok(ConditionCheck::fail(QuotientWitness::Transitivity { context: ci, path }));
                }
                seen.insert(cr, i);
            }
        }
    }
    Ok(ConditionCheck::pass(true))
}

fn check_intersections(pba: &Pba, eq: &Equivalence, render: &dyn Fn(usize) -> String) -> ConditionCheck {
    let contexts: Vec<&[usize]> = pba.contexts().iter().map(|c| c.generators()).collect();
    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &r) in eq.root.iter().enumerate() {
        classes.entry(r).or_default().push(i);
    }
    let mut roots: Vec<&usize> = classes.keys().collect();
    roots.sort();
    for r in roots {
        let members = &classes[r];
        if members.len() < 2 {
            continue;
        }
        for (l1, c1) in contexts.iter().enumerate() {
            for (l2, c2) in contexts.iter().enumerate().skip(l1 + 1) {
                let a = members.iter().find(|&&m| eq.elements[m].in_context(c1));
                let b = members.iter().find(|&&m| eq.elements[m].in_context(c2));
                let (Some(&a), Some(&b)) = (a, b) else { continue };
                let shared = members.iter().any(|&m| eq.elements[m].in_context(c1) && eq.elements[m].in_context(c2));
                if !shared {
                    return ConditionCheck::fail(QuotientWitness::NoCommonElement {
                        contexts: (l1, l2),
                        left: render(a),
                        right: render(b),
                    });
                }
            }
        }
    }
    ConditionCheck::pass(true)
}

fn context_pairs(n: usize, arity: usize, seed: u64) -> (Vec<(usize, usize)>, bool) {
    if arity <= EXHAUSTIVE_PAIR_LIMIT {
        return ((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(), true);
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ((0..PAIR_SAMPLES).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect(), false)
}

fn check_operations(pba: &Pba, eq: &Equivalence, target: Option<&QuantumTarget>) -> Result<ConditionCheck> {
    let names = pba.names();
    let mut meet_table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut complement_table: HashMap<usize, usize> = HashMap::new();
    let mut exhaustive = true;
    for (ci, ctx) in pba.contexts().iter().enumerate() {
        let gens = ctx.generators();
        let elems = context_elements(gens.len())?;
        let xs: Vec<XElement> = elems.iter().map(|e| XElement::new(gens, e.clone())).collect::<Result<_>>()?;
        let cls: Vec<usize> = xs.iter().map(|x| eq.class(x).expect("interned")).collect();
        let images: Option<Vec<CMatrix>> = target.map(|t| xs.iter().map(|x| t.image(x)).collect());
        let mismatch = |op: &'static str, i: usize, j: usize| {
            Ok(ConditionCheck::fail(QuotientWitness::OperationMismatch {
                context: ci,
                operation: op,
                left: xs[i].render(names),
                right: xs[j].render(names),
            }))
        };
        for i in 0..elems.len() {
            let ci_c = eq.class(&XElement::new(gens, elems[i].complement())?).expect("interned");
            if *complement_table.entry(cls[i]).or_insert(ci_c) != ci_c {
                return mismatch("complement", i, i);
            }
            if let Some(im) = &images {
                let d = im[i].nrows();
                let comp = eq.elements[eq.index[&XElement::new(gens, elems[i].complement())?]].clone();
                let expect = CMatrix::identity(d, d) - &im[i];
                if !matrices_equal(&target.expect("images imply target").image(&comp), &expect) {
                    return mismatch("complement image", i, i);
                }
            }
        }
        let (pairs, full) = context_pairs(elems.len(), gens.len(), ci as u64);
        exhaustive &= full;
        for (i, j) in pairs {
            let m = elems[i].meet(&elems[j])?;
            let xm = XElement::new(gens, m)?;
            let cm = eq.class(&xm).expect("interned");
            if *meet_table.entry((cls[i], cls[j])).or_insert(cm) != cm {
                return mismatch("meet", i, j);
            }
            if let (Some(im), Some(t)) = (&images, target) {
                if !matrices_equal(&t.image(&xm), &(&im[i] * &im[j])) {
                    return mismatch("meet image", i, j);
                }
            }
        }
        if let Some(im) = &images {
            // the induced map on classes is injective within the context
            for i in 0..elems.len() {
                for j in i + 1..elems.len() {
                    if (cls[i] == cls[j]) != matrices_equal(&im[i], &im[j]) {
                        return mismatch("class/image correspondence", i, j);
                    }
                }
            }
        }
    }
    Ok(ConditionCheck::pass(exhaustive))
}

fn check_states<S: Scalar>(free: &[Ppt<S>], eq: &Equivalence, target: Option<&QuantumTarget>) -> Result<ConditionCheck> {
    let names = free.first().map(|p| p.pba.names().to_vec()).unwrap_or_default();
    for (k, ppt) in free.iter().enumerate() {
        let mut by_class: HashMap<usize, (usize, S)> = HashMap::new();
        for (i, x) in eq.elements.iter().enumerate() {
            let v = evaluate_state(ppt, x)?;
            let r = eq.root[i];
            match by_class.get(&r) {
                Some((_, w)) if !v.approx_eq(w) && (v.clone() - w.clone()).abs_val().to_f64() > DEDUP_TOLERANCE => {
                    return Ok(ConditionCheck::fail(QuotientWitness::StateMismatch {
                        element: x.render(&names),
                        state: k,
                        left: v.to_f64(),
                        right: w.to_f64(),
                    }));
                }
                Some(_) => {}
                None => {
                    by_class.insert(r, (i, v.clone()));
                }
            }
            if let Some(t) = target {
                if let Some(s) = t.states.get(k) {
                    let expected = s.expectation(&t.image(x))?;
                    if (expected - v.to_f64()).abs() > DEDUP_TOLERANCE {
                        return Ok(ConditionCheck::fail(QuotientWitness::StateMismatch {
                            element: x.render(&names),
                            state: k,
                            left: v.to_f64(),
                            right: expected,
                        }));
                    }
                }
            }
        }
    }
    Ok(ConditionCheck::pass(true))
}

/// Outcome of the property (G) check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyGReport {
    pub holds: bool,
    /// Target contexts of the first violating family.
    pub witness: Option<Vec<usize>>,
    /// False when families larger than the checked size exist.
    pub exhaustive: bool,
    /// Chosen generators lying in each target context.
    pub generator_sets: Vec<Vec<usize>>,
}

fn same_set(a: &[CMatrix], b: &[CMatrix]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| matrices_equal(x, y)))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Property (G) for `gens` against the maximal algebras of `target`.
pub fn check_property_g(target: &ProjectionPba, gens: &[ProjectionMatrix]) -> Result<PropertyGReport> {
    let d = target.dim();
    for g in gens {
        if g.dim() != d {
            return Err(Error::DimMismatch(d, g.dim()));
        }
    }
    let algebras: Vec<Vec<CMatrix>> = (0..target.contexts().len())
        .map(|c| target.context_closure(c).iter().map(|&i| target.closure()[i].clone()).collect())
        .collect();
    let mut generator_sets = Vec::new();
    for (c, alg) in algebras.iter().enumerate() {
        let set: Vec<usize> = (0..gens.len()).filter(|&g| alg.iter().any(|m| matrices_equal(m, gens[g].matrix()))).collect();
        let ms: Vec<&CMatrix> = set.iter().map(|&g| gens[g].matrix()).collect();
        if !same_set(&commuting_closure(&ms, d)?, alg) {
            return Err(Error::NotAGeneratingSet(c));
        }
        generator_sets.push(set);
    }
    let n = algebras.len();
    let max_k = n.min(PROPERTY_G_FAMILY_LIMIT);
    for k in 2..=max_k {
        for family in combinations(n, k) {
            let common: Vec<CMatrix> = algebras[family[0]]
                .iter()
                .filter(|m| family[1..].iter().all(|&c| algebras[c].iter().any(|x| matrices_equal(x, m))))
                .cloned()
                .collect();
            if common.len() <= 2 {
                continue;
            }
            let shared: Vec<usize> = generator_sets[family[0]]
                .iter()
                .copied()
                .filter(|g| family[1..].iter().all(|&c| generator_sets[c].contains(g)))
                .collect();
            let ms: Vec<&CMatrix> = shared.iter().map(|&g| gens[g].matrix()).collect();
            if shared.is_empty() || !same_set(&commuting_closure(&ms, d)?, &common) {
                return Ok(PropertyGReport { holds: false, witness: Some(family), exhaustive: true, generator_sets });
            }
        }
    }
    Ok(PropertyGReport { holds: true, witness: None, exhaustive: n <= PROPERTY_G_FAMILY_LIMIT, generator_sets })
}

/// Free PBA over `gens` with zero atoms and cross-context identifications
/// read off the projection images.
pub fn relation_from_images(gens: &[ProjectionMatrix]) -> Result<QuotientRelation> {
    let mats: Vec<&CMatrix> = gens.iter().map(|g| g.matrix()).collect();
    let d = mats.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidGenerators("no generators".into()))?;
    let contexts = maximal_commuting_subsets(&mats)?;
    let pba = Pba::with_names(gens.iter().map(|g| g.label().to_string()).collect(), contexts)?;
    let mut zero_atoms = Vec::new();
    // image key -> first (element, matrix) seen with that key
    let mut seen: HashMap<Vec<i64>, Vec<(XElement, CMatrix)>> = HashMap::new();
    let mut identifications = Vec::new();
    for ctx in pba.contexts() {
        let g = ctx.generators();
        if g.len() > QUOTIENT_CONTEXT_LIMIT {
            return Err(Error::LimitExceeded(format!("context of {} generators", g.len())));
        }
        let ms: Vec<&CMatrix> = g.iter().map(|&i| mats[i]).collect();
        let atoms: Vec<(usize, CMatrix)> = (0..1usize << g.len()).map(|a| (a, atom_projection(&ms, a, d))).collect();
        zero_atoms.push(atoms.iter().filter(|(_, m)| is_zero_matrix(m)).map(|(a, _)| *a).collect::<Vec<_>>());
        let live: Vec<&(usize, CMatrix)> = atoms.iter().filter(|(_, m)| !is_zero_matrix(m)).collect();
        for s in 0..1usize << live.len() {
            let picked: Vec<usize> = (0..live.len()).filter(|i| s >> i & 1 == 1).map(|i| live[i].0).collect();
            let x = XElement::new(g, Element::from_atoms(g.len(), picked.iter().copied())?)?;
            let image = (0..live.len())
                .filter(|i| s >> i & 1 == 1)
                .fold(CMatrix::zeros(d, d), |acc, i| acc + &live[i].1);
            let key: Vec<i64> = image.iter().flat_map(|z| [grid(z.re), grid(z.im)]).collect();
            let bucket = seen.entry(key).or_default();
            match bucket.iter().find(|(_, m)| matrices_equal(m, &image)) {
                Some((first, _)) if *first != x => identifications.push((first.clone(), x)),
                Some(_) => {}
                None => bucket.push((x, image)),
            }
        }
    }
    Ok(QuotientRelation { pba, zero_atoms, identifications })
}

fn grid(x: f64) -> i64 {
    (x / (DEDUP_TOLERANCE * 10.0)).round() as i64
}

/// The free H-T construction over a projection algebra.
#[derive(Debug, Clone)]
pub struct FreeHt {
    pub ppts: Vec<Ppt<f64>>,
    pub relation: QuotientRelation,
    pub target: QuantumTarget,
    pub property_g: PropertyGReport,
}

pub fn build_free_ht(target: &ProjectionPba, states: &[QuantumState], gens: Vec<ProjectionMatrix>) -> Result<FreeHt> {
    let property_g = check_property_g(target, &gens)?;
    if let Some(w) = &property_g.witness {
        return Err(Error::PropertyGViolated(w.clone()));
    }
    for s in states {
        if s.dim() != target.dim() {
            return Err(Error::DimMismatch(target.dim(), s.dim()));
        }
    }
    // every nonzero element dominates a nonzero atom of its context
    for c in 0..target.contexts().len() {
        for (eps, atom) in target.nonzero_atoms(c) {
            let hit = states.iter().map(|s| s.expectation(&atom)).collect::<Result<Vec<_>>>()?;
            if !hit.iter().any(|&v| v > DEDUP_TOLERANCE) {
                return Err(Error::IncompleteStates(format!("atom {eps:b} of context {c} has value 0 in every state")));
            }
        }
    }
    let relation = relation_from_images(&gens)?;
    let images: Vec<CMatrix> = gens.iter().map(|g| g.matrix().clone()).collect();
    let ppts = states
        .iter()
        .map(|s| {
            let measures = relation
                .pba
                .contexts()
                .iter()
                .map(|c| context_measure(s, &c.generators().iter().map(|&g| &images[g]).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            Ppt::new(relation.pba.clone(), State::new(measures))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeHt { ppts, relation, target: QuantumTarget { images, states: states.to_vec() }, property_g })
}

/// All {0,1} generator assignments that avoid every zero atom and respect
/// every identification.
pub fn enumerate_homomorphisms(rel: &QuotientRelation) -> Result<Vec<Vec<bool>>> {
    let n = rel.pba.n();
    if n > HOMOMORPHISM_LIMIT {
        return Err(Error::LimitExceeded(format!("{n} generators (limit {HOMOMORPHISM_LIMIT})")));
    }
    let forbidden: Vec<(Vec<usize>, BTreeSet<usize>)> = rel
        .pba
        .contexts()
        .iter()
        .zip(&rel.zero_atoms)
        .map(|(c, z)| (c.generators().to_vec(), z.iter().copied().collect()))
        .collect();
    let mut out = Vec::new();
    'outer: for bits in 0u64..1 << n {
        let delta: Vec<bool> = (0..n).map(|g| bits >> g & 1 == 1).collect();
        for (gens, zero) in &forbidden {
            let eps = gens.iter().enumerate().fold(0usize, |acc, (i, &g)| acc | (delta[g] as usize) << i);
            if zero.contains(&eps) {
                continue 'outer;
            }
        }
        if rel.identifications.iter().all(|(x, y)| x.evaluate(&delta) == y.evaluate(&delta)) {
            out.push(delta);
        }
    }
    Ok(out)
}

/// Embedding into `2^N` through the homomorphisms, when they separate.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub embeddable: bool,
    pub homomorphisms: Vec<Vec<bool>>,
    /// A nonzero atom `(context, local atom)` that no homomorphism selects.
    pub unseparated: Option<(usize, usize)>,
}

impl Embedding {
    /// Indicator vector of `x` over the homomorphisms.
    pub fn image(&self, x: &XElement) -> Vec<bool> {
        self.homomorphisms.iter().map(|d| x.evaluate(d)).collect()
    }
}

/// Distinct elements of a context differ on some nonzero atom, so the
/// homomorphisms separate iff every nonzero atom is selected by one.
pub fn check_embeddable(rel: &QuotientRelation) -> Result<Embedding> {
    let homs = enumerate_homomorphisms(rel)?;
    if homs.is_empty() {
        return Ok(Embedding { embeddable: false, homomorphisms: homs, unseparated: None });
    }
    for (ci, ctx) in rel.pba.contexts().iter().enumerate() {
        let gens = ctx.generators();
        for a in 0..1usize << gens.len() {
            if rel.zero_atoms[ci].contains(&a) {
                continue;
            }
            let hit = homs.iter().any(|d| {
                gens.iter().enumerate().fold(0usize, |acc, (i, &g)| acc | (d[g] as usize) << i) == a
            });
            if !hit {
                return Ok(Embedding { embeddable: false, homomorphisms: homs, unseparated: Some((ci, a)) });
            }
        }
    }
    Ok(Embedding { embeddable: true, homomorphisms: homs, unseparated: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_core::Measure;
    use crate::scalar::{rat, Rational};

    fn el(arity: usize, atoms: &[usize]) -> Element {
        Element::from_atoms(arity, atoms.iter().copied()).unwrap()
    }

    #[test]
    fn xelement_minimal_support() {
        // A1 written over {A1, A2}
        let x = XElement::new(&[0, 1], el(2, &[0b01, 0b11])).unwrap();
        assert_eq!(x.generators(), &[0]);
        assert_eq!(x.element(), &el(1, &[1]));
        let y = XElement::new(&[0, 2], el(2, &[0b01, 0b11])).unwrap();
        assert_eq!(x, y);
        let one = XElement::new(&[3, 5], Element::one(2).unwrap()).unwrap();
        assert!(one.generators().is_empty());
        let names: Vec<String> = (1..=6).map(|i| format!("A{i}")).collect();
        assert_eq!(XElement::new(&[1, 2], el(2, &[0b10])).unwrap().render(&names), "A2^c∩A3");
        assert!(x.evaluate(&[true, false, false]));
    }

    #[test]
    fn homomorphism_examples() {
        let free = QuotientRelation::identity(Pba::new(3, vec![vec![0, 1, 2]]).unwrap());
        assert_eq!(enumerate_homomorphisms(&free).unwrap().len(), 8);
        // P ∪ Q = 1 and P ∩ Q = 0
        let mut rel = QuotientRelation::identity(Pba::new(2, vec![vec![0, 1]]).unwrap());
        rel.zero_atoms[0] = vec![0b00, 0b11];
        let homs = enumerate_homomorphisms(&rel).unwrap();
        assert_eq!(homs, vec![vec![true, false], vec![false, true]]);
        assert!(check_embeddable(&rel).unwrap().embeddable);
        let triangle = QuotientRelation::identity(Pba::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap());
        let emb = check_embeddable(&triangle).unwrap();
        assert!(emb.embeddable);
        assert_eq!(emb.homomorphisms.len(), 8);
    }

    #[test]
    fn empty_homomorphism_set_is_not_embeddable() {
        let mut rel = QuotientRelation::identity(Pba::new(1, vec![vec![0]]).unwrap());
        rel.zero_atoms[0] = vec![0, 1];
        assert!(enumerate_homomorphisms(&rel).unwrap().is_empty());
        assert!(!check_embeddable(&rel).unwrap().embeddable);
    }

    #[test]
    fn identity_relation_on_one_context_passes() {
        let pba = Pba::new(2, vec![vec![0, 1]]).unwrap();
        let m = Measure::new(2, vec![rat(1, 10), rat(2, 10), rat(3, 10), rat(4, 10)]).unwrap();
        let ppt: Ppt<Rational> = Ppt::new(pba.clone(), State::new(vec![m])).unwrap();
        let report = verify_empirical_quotient(&[ppt], &QuotientRelation::identity(pba), None).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn triangle_identification_is_rejected() {
        let pba = Pba::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let half = rat(1, 2);
        let z = rat(0, 1);
        let same = Measure::new(2, vec![half.clone(), z.clone(), z.clone(), half.clone()]).unwrap();
        let opposite = Measure::new(2, vec![z.clone(), half.clone(), half.clone(), z]).unwrap();
        let state = State::new(vec![same.clone(), same, opposite]);
        let ppt: Ppt<Rational> = Ppt::new(pba.clone(), state.clone()).unwrap();
        let rel = QuotientRelation::from_states(pba, &[state]).unwrap();
        let report = verify_empirical_quotient(&[ppt], &rel, None).unwrap();
        assert!(!report.ideal.passed);
        match report.ideal.witness {
            Some(QuotientWitness::Transitivity { path, .. }) => {
                assert!(path.len() >= 4, "{path:?}");
                assert!(path.iter().any(|p| p == "A1") && path.iter().any(|p| p.ends_with("^c")), "{path:?}");
            }
            other => panic!("{other:?}"),
        }
    }
}
