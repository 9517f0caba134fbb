//! Constructive extensions: the three-observable λ table, conditional
//! gluing of overlapping blocks, products of disjoint blocks, tree plans,
//! and the Bell and 3×3 bipartite conditions.

use crate::boolean_core::{project_atom, restrict, Measure};
use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::polytope::{self, monomial_label, CorrelationSpec, Facet, FeasibilityCertificate, Monomial};
use crate::ppt::{compatibility_graph, Ppt};
use crate::scalar::Scalar;

/// Data of two overlapping two-observable contexts `{1,3}` and `{2,3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSpec<S> {
    pub p1: S,
    pub p2: S,
    pub p3: S,
    pub p13: S,
    pub p23: S,
}

impl<S: Scalar> ThreeSpec<S> {
    pub fn validate(&self) -> Result<()> {
        let fields = [("p1", &self.p1), ("p2", &self.p2), ("p3", &self.p3), ("p13", &self.p13), ("p23", &self.p23)];
        for (name, v) in fields {
            if v.is_negative() || !v.approx_le(&S::one()) {
                return Err(Error::InvalidThreeSpec(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let le = |a: &S, b: &S| a.approx_le(b);
        if !le(&self.p13, &self.p1) || !le(&self.p13, &self.p3) {
            return Err(Error::InvalidThreeSpec(format!("p13 = {} exceeds min(p1, p3)", self.p13)));
        }
        if !le(&self.p23, &self.p2) || !le(&self.p23, &self.p3) {
            return Err(Error::InvalidThreeSpec(format!("p23 = {} exceeds min(p2, p3)", self.p23)));
        }
        if !le(&(self.p1.clone() + self.p3.clone() - self.p13.clone()), &S::one()) {
            return Err(Error::InvalidThreeSpec("p1 + p3 - p13 > 1".into()));
        }
        if !le(&(self.p2.clone() + self.p3.clone() - self.p23.clone()), &S::one()) {
            return Err(Error::InvalidThreeSpec("p2 + p3 - p23 > 1".into()));
        }
        Ok(())
    }
}

/// Admissible values of `η = μ(A1∩A2∩A3)` and `χ = μ(A1∩A2∩A3^c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiEtaBox<S> {
    pub eta_lo: S,
    pub eta_hi: S,
    pub chi_lo: S,
    pub chi_hi: S,
}

impl<S: Scalar> ChiEtaBox<S> {
    pub fn contains(&self, chi: &S, eta: &S) -> bool {
        self.chi_lo.approx_le(chi) && chi.approx_le(&self.chi_hi) && self.eta_lo.approx_le(eta) && eta.approx_le(&self.eta_hi)
    }

    /// Range of `p12 = χ + η`.
    pub fn p12_range(&self) -> (S, S) {
        (self.chi_lo.clone() + self.eta_lo.clone(), self.chi_hi.clone() + self.eta_hi.clone())
    }
}

pub fn chi_eta_intervals<S: Scalar>(s: &ThreeSpec<S>) -> Result<ChiEtaBox<S>> {
    s.validate()?;
    let ThreeSpec { p1, p2, p3, p13, p23 } = s.clone();
    let eta_hi = S::min_of(p13.clone(), p23.clone());
    let eta_lo = S::max_of(S::zero(), p13.clone() + p23.clone() - p3.clone());
    let chi_hi = S::min_of(p1.clone() - p13.clone(), p2.clone() - p23.clone());
    let chi_lo = S::max_of(S::zero(), p1 + p2 + p3 - p13 - p23 - S::one());
    Ok(ChiEtaBox { eta_lo, eta_hi, chi_lo, chi_hi })
}

/// The eight weights of the λ table; `(χ, η)` default to the box midpoint.
pub fn extend_three<S: Scalar>(s: &ThreeSpec<S>, chi: Option<S>, eta: Option<S>) -> Result<Measure<S>> {
    let bx = chi_eta_intervals(s)?;
    let chi = chi.unwrap_or_else(|| (bx.chi_lo.clone() + bx.chi_hi.clone()) * S::half());
    let eta = eta.unwrap_or_else(|| (bx.eta_lo.clone() + bx.eta_hi.clone()) * S::half());
    if !bx.contains(&chi, &eta) {
        return Err(Error::ChiEtaOutOfBox { chi: chi.to_string(), eta: eta.to_string() });
    }
    let ThreeSpec { p1, p2, p3, p13, p23 } = s.clone();
    let mut w = vec![S::zero(); 8];
    w[0b000] = S::one() - (p1.clone() + p2.clone() + p3.clone() - p13.clone() - p23.clone()) + chi.clone();
    w[0b001] = p1 - p13.clone() - chi.clone();
    w[0b010] = p2 - p23.clone() - chi.clone();
    w[0b100] = eta.clone() + p3 - p13.clone() - p23.clone();
    w[0b011] = chi;
    w[0b101] = p13 - eta.clone();
    w[0b110] = p23 - eta.clone();
    w[0b111] = eta;
    if !S::EXACT {
        for v in w.iter_mut() {
            if v.is_negligible() {
                *v = S::zero();
            }
        }
    }
    Measure::new(3, w).map_err(|e| Error::InternalInconsistency(format!("λ table: {e}")))
}

/// A measure on the free algebra over a set of global generators. Local
/// generator `j` is `generators[j]`, which are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMeasure<S: Scalar> {
    generators: Vec<usize>,
    measure: Measure<S>,
}

impl<S: Scalar> BlockMeasure<S> {
    /// `generators[j]` names local generator `j` of `measure`; any order.
    pub fn new(generators: Vec<usize>, measure: Measure<S>) -> Result<Self> {
        if generators.len() != measure.arity() {
            return Err(Error::ArityMismatch { left: generators.len(), right: measure.arity() });
        }
        let mut sorted = generators.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGenerators(format!("repeated generator in {generators:?}")));
        }
        if sorted == generators {
            return Ok(BlockMeasure { generators, measure });
        }
        if generators.is_empty() {
            return Ok(BlockMeasure { generators, measure });
        }
        let kept: Vec<usize> = sorted.iter().map(|g| generators.iter().position(|x| x == g).expect("present")).collect();
        let measure = restrict(&measure, &kept)?;
        Ok(BlockMeasure { generators: sorted, measure })
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn measure(&self) -> &Measure<S> {
        &self.measure
    }

    pub fn into_measure(self) -> Measure<S> {
        self.measure
    }

    /// Marginal on a subset of this block's generators (sorted output).
    pub fn marginal(&self, gens: &[usize]) -> Result<BlockMeasure<S>> {
        let mut gens = gens.to_vec();
        gens.sort_unstable();
        let local: Option<Vec<usize>> = gens.iter().map(|g| self.generators.binary_search(g).ok()).collect();
        let local = local.ok_or_else(|| Error::InvalidGenerators(format!("{gens:?} not inside {:?}", self.generators)))?;
        Ok(BlockMeasure { generators: gens, measure: restrict(&self.measure, &local)? })
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.contains(x)).copied().collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Conditional gluing: `f(ε) = f1·f2 / f1(overlap)`, zero where the overlap
/// marginal vanishes. Restricts to both inputs exactly.
pub fn glue_pair<S: Scalar>(m1: &BlockMeasure<S>, m2: &BlockMeasure<S>) -> Result<BlockMeasure<S>> {
    let overlap = intersect(&m1.generators, &m2.generators);
    let marg = if overlap.is_empty() {
        None
    } else {
        let a = m1.marginal(&overlap)?;
        let b = m2.marginal(&overlap)?;
        if !a.measure.approx_eq(&b.measure) {
            return Err(Error::OverlapMismatch(overlap));
        }
        Some(a)
    };
    let gens = union(&m1.generators, &m2.generators);
    let pos = |sub: &[usize]| -> Vec<usize> { sub.iter().map(|g| gens.binary_search(g).expect("in union")).collect() };
    let (k1, k2, ko) = (pos(&m1.generators), pos(&m2.generators), pos(&overlap));
    let mut weights = Vec::with_capacity(1 << gens.len());
    for eps in 0..1usize << gens.len() {
        let f1 = m1.measure.weight(project_atom(eps, &k1));
        let f2 = m2.measure.weight(project_atom(eps, &k2));
        let w = match &marg {
            None => f1.clone() * f2.clone(),
            Some(mo) => {
                let den = mo.measure.weight(project_atom(eps, &ko));
                if den.is_zero() || (!S::EXACT && den.is_negligible()) {
                    S::zero()
                } else {
                    f1.clone() * f2.clone() / den.clone()
                }
            }
        };
        weights.push(w);
    }
    let measure = Measure::new(gens.len(), weights).map_err(|e| Error::InternalInconsistency(format!("gluing: {e}")))?;
    Ok(BlockMeasure { generators: gens, measure })
}

/// Gluing of measures on `{A1,A2,A3}` and `{A1,A2,A4}` along `{A1,A2}`;
/// the result has arity 4 in the order `A1..A4`.
pub fn glue_four<S: Scalar>(f123: &Measure<S>, f124: &Measure<S>) -> Result<Measure<S>> {
    if f123.arity() != 3 || f124.arity() != 3 {
        return Err(Error::ArityMismatch { left: f123.arity(), right: f124.arity() });
    }
    let a = BlockMeasure::new(vec![0, 1, 2], f123.clone())?;
    let b = BlockMeasure::new(vec![0, 1, 3], f124.clone())?;
    Ok(glue_pair(&a, &b)?.into_measure())
}

/// Product measure of two blocks with disjoint generators.
pub fn product_disjoint<S: Scalar>(m1: &BlockMeasure<S>, m2: &BlockMeasure<S>) -> Result<BlockMeasure<S>> {
    let overlap = intersect(&m1.generators, &m2.generators);
    if !overlap.is_empty() {
        return Err(Error::BlocksOverlap(overlap));
    }
    glue_pair(m1, m2)
}

/// Gluing order: each step's overlap with the already glued block lies
/// inside one earlier piece.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePlan {
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub piece: Vec<usize>,
    pub overlap: Vec<usize>,
}

/// Builds a [`TreePlan`] from the compatibility graph on `nodes`: the
/// pieces are the unions of adjacent nodes plus isolated nodes.
pub fn plan_tree<S: Scalar>(ppt: &Ppt<S>, nodes: &[Vec<usize>]) -> Result<TreePlan> {
    let graph = compatibility_graph(&ppt.pba, nodes)?;
    if let Some(cycle) = graph.find_cycle() {
        let gens = cycle.iter().fold(Vec::new(), |acc, &v| union(&acc, &graph.nodes[v]));
        return Err(Error::NotAForest(gens));
    }
    let covered = graph.nodes.iter().fold(Vec::new(), |acc, n| union(&acc, n));
    if let Some(g) = (0..ppt.pba.n()).find(|g| !covered.contains(g)) {
        return Err(Error::InvalidGenerators(format!("nodes do not cover generator {}", ppt.pba.names()[g])));
    }
    let mut pieces: Vec<Vec<usize>> = graph.edges.iter().map(|&(a, b)| union(&graph.nodes[a], &graph.nodes[b])).collect();
    for v in 0..graph.nodes.len() {
        if graph.neighbors(v).is_empty() {
            pieces.push(graph.nodes[v].clone());
        }
    }
    // drop pieces contained in others
    pieces.sort();
    pieces.dedup();
    let all = pieces.clone();
    pieces.retain(|p| !all.iter().any(|q| q != p && p.iter().all(|g| q.contains(g))));

    let mut steps: Vec<PlanStep> = Vec::new();
    let mut glued: Vec<usize> = Vec::new();
    let mut remaining = pieces;
    while !remaining.is_empty() {
        let idx = remaining.iter().position(|p| !intersect(p, &glued).is_empty()).unwrap_or(0);
        let piece = remaining.remove(idx);
        let overlap = intersect(&piece, &glued);
        if !overlap.is_empty() && !steps.iter().any(|s| overlap.iter().all(|g| s.piece.contains(g))) {
            return Err(Error::NoRunningIntersectionOrder(format!(
                "overlap {} of piece {} is not inside a single earlier piece",
                ppt.pba.label(&overlap),
                ppt.pba.label(&piece)
            )));
        }
        glued = union(&glued, &piece);
        steps.push(PlanStep { piece, overlap });
    }
    Ok(TreePlan { steps })
}

/// Extension over all generators by gluing along a [`TreePlan`].
pub fn extend_tree<S: Scalar>(ppt: &Ppt<S>, nodes: &[Vec<usize>]) -> Result<Measure<S>> {
    let plan = plan_tree(ppt, nodes)?;
    let mut acc: Option<BlockMeasure<S>> = None;
    for step in &plan.steps {
        let block = BlockMeasure::new(step.piece.clone(), ppt.marginal(&step.piece)?)?;
        acc = Some(match acc {
            None => block,
            Some(prev) => glue_pair(&prev, &block)?,
        });
    }
    let acc = acc.ok_or_else(|| Error::InvalidGenerators("no nodes".into()))?;
    Ok(acc.into_measure())
}

/// Singleton nodes `{A_g}` for every generator.
pub fn singleton_nodes(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|g| vec![g]).collect()
}

/// Complete bipartite topology `X × Y` on the contexts, with `X` holding
/// generator 0. Every context must be a pair.
fn bipartition<S: Scalar>(ppt: &Ppt<S>, x_size: usize, y_size: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = ppt.pba.n();
    let ctxs = ppt.pba.contexts();
    let wrong = |why: &str| Error::WrongTopology(why.to_string());
    if n != x_size + y_size || ctxs.len() != x_size * y_size || ctxs.iter().any(|c| c.arity() != 2) {
        return Err(wrong(&format!("expected {} pair contexts over {} generators", x_size * y_size, x_size + y_size)));
    }
    let mut side = vec![None; n];
    side[0] = Some(false);
    let mut changed = true;
    while changed {
        changed = false;
        for c in ctxs {
            let (a, b) = (c.generators()[0], c.generators()[1]);
            match (side[a], side[b]) {
                (Some(sa), None) => {
                    side[b] = Some(!sa);
                    changed = true;
                }
                (None, Some(sb)) => {
                    side[a] = Some(!sb);
                    changed = true;
                }
                (Some(sa), Some(sb)) if sa == sb => return Err(wrong("contexts are not bipartite")),
                _ => {}
            }
        }
    }
    let x: Vec<usize> = (0..n).filter(|&g| side[g] == Some(false)).collect();
    let y: Vec<usize> = (0..n).filter(|&g| side[g] == Some(true)).collect();
    if x.len() != x_size || y.len() != y_size {
        return Err(wrong("sides have the wrong sizes"));
    }
    for &a in &x {
        for &b in &y {
            if ppt.pba.context_containing(&[a, b]).is_none() {
                return Err(wrong("a cross pair is missing"));
            }
        }
    }
    Ok((x, y))
}

/// One Clauser–Horne expression `Σ q − q_odd − p_x − p_y` with the allowed
/// range `[-1, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChExpression<S> {
    /// The pair carrying the minus sign.
    pub odd_pair: (usize, usize),
    pub value: S,
}

impl<S: Scalar> ChExpression<S> {
    /// `max(value, −1 − value)`; positive means violated.
    pub fn violation(&self) -> S {
        S::max_of(self.value.clone(), -S::one() - self.value.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshReport<S: Scalar> {
    /// `[x1, x2]` and `[y1, y2]` in global ids; the unmeasured pair is `x1 x2`.
    pub x: [usize; 2],
    pub y: [usize; 2],
    pub alphas: [S; 2],
    pub betas: [S; 2],
    pub holds: bool,
    pub ch: Vec<ChExpression<S>>,
    /// Glued extension over all four generators when the condition holds.
    pub extension: Option<Measure<S>>,
}

impl<S: Scalar> ChshReport<S> {
    pub fn max_violation(&self) -> S {
        self.ch.iter().map(|c| c.violation()).fold(-S::one(), S::max_of)
    }
}

fn three_spec_for<S: Scalar>(ppt: &Ppt<S>, x: [usize; 2], s: usize) -> ThreeSpec<S> {
    let v = |g: &[usize]| {
        let mut g = g.to_vec();
        g.sort_unstable();
        ppt.intersection_value(&g).expect("Bell topology value")
    };
    ThreeSpec { p1: v(&[x[0]]), p2: v(&[x[1]]), p3: v(&[s]), p13: v(&[x[0], s]), p23: v(&[x[1], s]) }
}

/// The Bell condition `max_s α(s) ≤ min_s β(s)` on the unmeasured `p12`,
/// with α/β from exact LP bounds over each Bell–Wigner polytope.
pub fn chsh_condition<S: Scalar>(ppt: &Ppt<S>) -> Result<ChshReport<S>> {
    let (xs, ys) = bipartition(ppt, 2, 2)?;
    let x = [xs[0], xs[1]];
    let y = [ys[0], ys[1]];
    let spec = CorrelationSpec::new(3, vec![vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]])?;
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut threes = Vec::new();
    for &s in &y {
        let t = three_spec_for(ppt, x, s);
        let p = vec![t.p1.clone(), t.p2.clone(), t.p3.clone(), t.p13.clone(), t.p23.clone()];
        let (a, b) = polytope::bounds_missing_term(&p, &spec, &[0, 1])?;
        alphas.push(a);
        betas.push(b);
        threes.push(t);
    }
    let lo = S::max_of(alphas[0].clone(), alphas[1].clone());
    let hi = S::min_of(betas[0].clone(), betas[1].clone());
    let holds = lo.approx_le(&hi);

    let q = |a: usize, b: usize| {
        let mut g = vec![a, b];
        g.sort_unstable();
        ppt.intersection_value(&g).expect("Bell topology value")
    };
    let p = |a: usize| ppt.intersection_value(&[a]).expect("Bell topology value");
    let mut ch = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            let mut value = S::zero();
            for &xa in &x {
                for &yb in &y {
                    let v = q(xa, yb);
                    value = if xa == xi && yb == yj { value - v } else { value + v };
                }
            }
            value = value - p(x[1 - i]) - p(y[1 - j]);
            ch.push(ChExpression { odd_pair: (xi, yj), value });
        }
    }

    let extension = if holds {
        let p12 = if lo.approx_eq(&hi) { lo.clone() } else { (lo.clone() + hi.clone()) * S::half() };
        let mut parts = Vec::new();
        for t in &threes {
            let bx = chi_eta_intervals(t)?;
            let eta = S::max_of(bx.eta_lo.clone(), p12.clone() - bx.chi_hi.clone());
            let eta = S::min_of(eta, bx.eta_hi.clone());
            let chi = p12.clone() - eta.clone();
            let chi = if S::EXACT { chi } else { S::min_of(S::max_of(chi, bx.chi_lo.clone()), bx.chi_hi.clone()) };
            parts.push(extend_three(t, Some(chi), Some(eta))?);
        }
        let glued = glue_four(&parts[0], &parts[1])?;
        // local order (x1, x2, y1, y2) back to global generator ids
        Some(BlockMeasure::new(vec![x[0], x[1], y[0], y[1]], glued)?.into_measure())
    } else {
        None
    };

    Ok(ChshReport {
        x,
        y,
        alphas: [alphas[0].clone(), alphas[1].clone()],
        betas: [betas[0].clone(), betas[1].clone()],
        holds,
        ch,
        extension,
    })
}

/// Which triple plays the role of `{1,2,3}` in [`three_by_three_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The triple containing generator 0.
    First,
    Second,
}

/// One of the eleven expressions in `p12, p13, p23, p123` with its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedExpression<S> {
    pub label: String,
    /// Coefficients on `(p12, p13, p23, p123)`.
    pub coefficients: [i64; 4],
    pub alpha: S,
    pub beta: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeByThreeReport<S: Scalar> {
    /// The unmeasured triple, in global ids.
    pub triple: [usize; 3],
    pub others: [usize; 3],
    pub expressions: Vec<BoundedExpression<S>>,
    pub feasible: bool,
    /// `(p12, p13, p23, p123)` when feasible.
    pub solution: Option<[S; 4]>,
    pub extension: Option<Measure<S>>,
}

/// The eleven type 1–4 expressions as coefficient vectors on
/// `(p12, p13, p23, p123)`.
pub fn three_by_three_expressions() -> Vec<(String, [i64; 4])> {
    vec![
        ("p12".into(), [1, 0, 0, 0]),
        ("p13".into(), [0, 1, 0, 0]),
        ("p23".into(), [0, 0, 1, 0]),
        ("p123".into(), [0, 0, 0, 1]),
        ("p12 - p123".into(), [1, 0, 0, -1]),
        ("p13 - p123".into(), [0, 1, 0, -1]),
        ("p23 - p123".into(), [0, 0, 1, -1]),
        ("p12 + p13 - p123".into(), [1, 1, 0, -1]),
        ("p12 + p23 - p123".into(), [1, 0, 1, -1]),
        ("p13 + p23 - p123".into(), [0, 1, 1, -1]),
        ("p12 + p13 + p23 - p123".into(), [1, 1, 1, -1]),
    ]
}

const UNKNOWNS: [&[usize]; 4] = [&[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];

/// Per-`s` correlation spec of the 3×3 condition: the triple is `0,1,2`,
/// the partner `3`; seven data coordinates, then `p12, p13, p23, p123`.
pub fn per_s_spec() -> Result<CorrelationSpec> {
    let mut monomials: Vec<Monomial> = vec![vec![0], vec![1], vec![2], vec![3], vec![0, 3], vec![1, 3], vec![2, 3]];
    monomials.extend(UNKNOWNS.iter().map(|m| m.to_vec()));
    CorrelationSpec::new(4, monomials)
}

/// Facets of the per-`s` polytope sorted by their role in the 3×3
/// condition.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetClassification {
    /// No unknown coordinate appears.
    pub data_only: Vec<Facet>,
    /// Unknowns appear in a pattern other than the eleven expressions.
    pub untyped: Vec<Facet>,
    /// Typed, but the bound involves no data coordinate.
    pub data_free: Vec<(usize, Facet)>,
    /// Typed with a data-dependent bound; the index is into
    /// [`three_by_three_expressions`].
    pub relevant: Vec<(usize, Facet)>,
}

pub fn classify_per_s_facets(facets: &[Facet]) -> FacetClassification {
    let exprs = three_by_three_expressions();
    let mut out = FacetClassification { data_only: vec![], untyped: vec![], data_free: vec![], relevant: vec![] };
    for f in facets {
        let unknown: Vec<&BigInt> = f.coefficients[7..].iter().collect();
        if unknown.iter().all(|c| c.is_zero()) {
            out.data_only.push(f.clone());
            continue;
        }
        let scale = unknown.iter().find(|c| !c.is_zero()).map(|c| (*c).clone()).expect("nonzero");
        let typed = exprs.iter().position(|(_, e)| {
            let lead = BigInt::from(e[e.iter().position(|&x| x != 0).expect("nonzero")]);
            unknown.iter().zip(e).all(|(c, &x)| (*c).clone() * &lead == &scale * BigInt::from(x))
        });
        match typed {
            None => out.untyped.push(f.clone()),
            Some(i) if f.coefficients[..7].iter().all(|c| c.is_zero()) => out.data_free.push((i, f.clone())),
            Some(i) => out.relevant.push((i, f.clone())),
        }
    }
    out
}

/// The 3×3 bipartite condition: per-`s` LP bounds on the eleven
/// expressions, intersected over `s`, then a four-variable feasibility LP.
pub fn three_by_three_condition<S: Scalar>(ppt: &Ppt<S>, side: Side) -> Result<ThreeByThreeReport<S>> {
    let (a, b) = bipartition(ppt, 3, 3)?;
    let (t, o) = match side {
        Side::First => (a, b),
        Side::Second => (b, a),
    };
    let triple = [t[0], t[1], t[2]];
    let others = [o[0], o[1], o[2]];
    // local ids: triple → 0,1,2 and s → 3
    let data_spec = CorrelationSpec::new(4, vec![vec![0], vec![1], vec![2], vec![3], vec![0, 3], vec![1, 3], vec![2, 3]])?;
    let exprs = three_by_three_expressions();
    let mut alpha: Vec<Option<S>> = vec![None; exprs.len()];
    let mut beta: Vec<Option<S>> = vec![None; exprs.len()];
    let mut data = Vec::new();
    for &s in &others {
        let v = |g: &[usize]| {
            let mut g = g.to_vec();
            g.sort_unstable();
            ppt.intersection_value(&g).expect("bipartite topology value")
        };
        let p: Vec<S> = vec![
            v(&[triple[0]]),
            v(&[triple[1]]),
            v(&[triple[2]]),
            v(&[s]),
            v(&[triple[0], s]),
            v(&[triple[1], s]),
            v(&[triple[2], s]),
        ];
        for (k, (_, coeffs)) in exprs.iter().enumerate() {
            let expr: Vec<(Monomial, S)> = coeffs
                .iter()
                .zip(UNKNOWNS)
                .filter(|(c, _)| **c != 0)
                .map(|(c, m)| (m.to_vec(), S::from_i64(*c)))
                .collect();
            let (lo, hi) = polytope::bounds_expression(&p, &data_spec, &expr)?;
            alpha[k] = Some(match alpha[k].take() {
                None => lo,
                Some(prev) => S::max_of(prev, lo),
            });
            beta[k] = Some(match beta[k].take() {
                None => hi,
                Some(prev) => S::min_of(prev, hi),
            });
        }
        data.push(p);
    }
    let expressions: Vec<BoundedExpression<S>> = exprs
        .iter()
        .enumerate()
        .map(|(k, (label, coeffs))| BoundedExpression {
            label: label.clone(),
            coefficients: *coeffs,
            alpha: alpha[k].clone().expect("three values of s"),
            beta: beta[k].clone().expect("three values of s"),
        })
        .collect();

    // e·x ≤ β and −e·x ≤ −α, x ≥ 0
    let mut g = Vec::new();
    let mut h = Vec::new();
    for e in &expressions {
        g.push(e.coefficients.iter().map(|&c| S::from_i64(c)).collect::<Vec<S>>());
        h.push(e.beta.clone());
        g.push(e.coefficients.iter().map(|&c| S::from_i64(-c)).collect::<Vec<S>>());
        h.push(-e.alpha.clone());
    }
    let (feasible, solution) = match lp::feasible_inequalities(&g, &h)? {
        LpOutcome::Optimal { x, .. } => (true, Some([x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()])),
        _ => (false, None),
    };

    let extension = match &solution {
        None => None,
        Some(x) => {
            let full_spec = CorrelationSpec::new(
                4,
                data_spec.monomials().iter().cloned().chain(UNKNOWNS.iter().map(|m| m.to_vec())).collect(),
            )?;
            let mut acc: Option<BlockMeasure<S>> = None;
            for (p, &s) in data.iter().zip(&others) {
                let mut full = p.clone();
                full.extend(x.iter().cloned());
                let block = match polytope::membership(&full, &full_spec)? {
                    FeasibilityCertificate::Feasible { weights } => BlockMeasure::new(
                        vec![triple[0], triple[1], triple[2], s],
                        Measure::new(4, weights)?,
                    )?,
                    FeasibilityCertificate::Infeasible { .. } => {
                        return Err(Error::InternalInconsistency(format!(
                            "bounds admit {} but the per-s polytope for {} does not",
                            x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
                            monomial_label(&[s])
                        )))
                    }
                };
                acc = Some(match acc {
                    None => block,
                    Some(prev) => glue_pair(&prev, &block)?,
                });
            }
            acc.map(|b| b.into_measure())
        }
    };

    Ok(ThreeByThreeReport { triple, others, expressions, feasible, solution, extension })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppt::{validate_ppt, Pba, State};
    use crate::scalar::{rat, Rational};

    fn ts(v: [(i64, i64); 5]) -> ThreeSpec<Rational> {
        ThreeSpec { p1: rat(v[0].0, v[0].1), p2: rat(v[1].0, v[1].1), p3: rat(v[2].0, v[2].1), p13: rat(v[3].0, v[3].1), p23: rat(v[4].0, v[4].1) }
    }

    #[test]
    fn chi_eta_examples() {
        let b = chi_eta_intervals(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)])).unwrap();
        assert_eq!((b.eta_lo, b.eta_hi, b.chi_lo, b.chi_hi), (rat(0, 1), rat(1, 4), rat(0, 1), rat(1, 4)));
        let b = chi_eta_intervals(&ts([(1, 2); 5])).unwrap();
        assert_eq!((b.eta_lo, b.eta_hi, b.chi_lo, b.chi_hi), (rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)));
        let bad = ts([(3, 10), (3, 10), (1, 2), (6, 10), (1, 10)]);
        assert!(matches!(chi_eta_intervals(&bad), Err(Error::InvalidThreeSpec(_))));
    }

    #[test]
    fn extend_three_examples() {
        // independence puts p12 = 1/4 and p123 = 1/8, so χ = η = 1/8
        let e = rat(1, 8);
        let m = extend_three(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)]), Some(e.clone()), Some(e)).unwrap();
        assert_eq!(m, Measure::uniform(3).unwrap());
        let corner = extend_three(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)]), Some(rat(1, 4)), Some(rat(1, 4))).unwrap();
        assert_eq!(corner.weights()[0b011], rat(1, 4));
        let m = extend_three(&ts([(1, 2); 5]), None, None).unwrap();
        let mut w = vec![rat(0, 1); 8];
        w[0] = rat(1, 2);
        w[7] = rat(1, 2);
        assert_eq!(m.weights(), &w[..]);
        let err = extend_three(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)]), Some(rat(1, 2)), None);
        assert!(matches!(err, Err(Error::ChiEtaOutOfBox { .. })));
    }

    #[test]
    fn glue_examples() {
        let u2 = || BlockMeasure::new(vec![0, 1], Measure::<Rational>::uniform(2).unwrap()).unwrap();
        let b = BlockMeasure::new(vec![1, 2], Measure::uniform(2).unwrap()).unwrap();
        let g = glue_pair(&u2(), &b).unwrap();
        assert_eq!(g.generators(), &[0, 1, 2]);
        assert_eq!(g.measure(), &Measure::uniform(3).unwrap());

        // A2 never occurs: the overlap marginal has a zero block
        let m1 = BlockMeasure::new(vec![0, 1], Measure::new(2, vec![rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)]).unwrap()).unwrap();
        let m2 = BlockMeasure::new(vec![1, 2], Measure::new(2, vec![rat(1, 3), rat(0, 1), rat(2, 3), rat(0, 1)]).unwrap()).unwrap();
        let g = glue_pair(&m1, &m2).unwrap();
        let total: Rational = g.measure().weights().iter().sum();
        assert_eq!(total, rat(1, 1));
        assert_eq!(g.marginal(&[0, 1]).unwrap(), m1);
        assert_eq!(g.marginal(&[1, 2]).unwrap(), m2);

        let skew = BlockMeasure::new(vec![1, 2], Measure::new(2, vec![rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]).unwrap()).unwrap();
        assert_eq!(glue_pair(&m1, &skew), Err(Error::OverlapMismatch(vec![1])));
    }

    #[test]
    fn glue_four_examples() {
        let u: Measure<Rational> = Measure::uniform(3).unwrap();
        assert_eq!(glue_four(&u, &u).unwrap(), Measure::uniform(4).unwrap());
        // (1,1,0) is index 0b011, (1,1,1) is 0b111; result (1,1,0,1) is 0b1011
        let a: Measure<Rational> = Measure::point(3, 0b011).unwrap();
        let b = Measure::point(3, 0b111).unwrap();
        assert_eq!(glue_four(&a, &b).unwrap(), Measure::point(4, 0b1011).unwrap());
        let quarter = extend_three(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)]), Some(rat(1, 8)), Some(rat(1, 8))).unwrap();
        let third = extend_three(&ts([(1, 2), (1, 2), (1, 2), (1, 4), (1, 4)]), Some(rat(1, 6)), Some(rat(1, 6))).unwrap();
        assert_eq!(glue_four(&quarter, &third), Err(Error::OverlapMismatch(vec![0, 1])));
    }

    #[test]
    fn product_examples() {
        let a = BlockMeasure::new(vec![0], Measure::<Rational>::point(1, 1).unwrap()).unwrap();
        let b = BlockMeasure::new(vec![1, 2], Measure::point(2, 0b10).unwrap()).unwrap();
        let p = product_disjoint(&a, &b).unwrap();
        assert_eq!(p.measure(), &Measure::point(3, 0b101).unwrap());
        assert_eq!(product_disjoint(&a, &a), Err(Error::BlocksOverlap(vec![0])));
    }

    #[test]
    fn block_measure_reorders() {
        // local order (A3, A1): weight on ε = (1, 0) means A3 true, A1 false
        let m = Measure::new(2, vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)]).unwrap();
        let b = BlockMeasure::new(vec![2, 0], m).unwrap();
        assert_eq!(b.generators(), &[0, 2]);
        assert_eq!(b.measure(), &Measure::point(2, 0b10).unwrap());
    }

    fn chain() -> Ppt<Rational> {
        let pba = Pba::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let m = |w: [i64; 4]| Measure::new(2, w.iter().map(|&x| rat(x, 10)).collect()).unwrap();
        // marginals: A1 = .5, A2 = .4, A3 = .4, A4 = .4
        Ppt::new_consistent(pba, State::new(vec![m([3, 3, 2, 2]), m([4, 2, 2, 2]), m([4, 2, 2, 2])])).unwrap()
    }

    #[test]
    fn tree_chain_restricts_to_every_context() {
        let ppt = chain();
        let ext = extend_tree(&ppt, &singleton_nodes(4)).unwrap();
        for (c, m) in ppt.pba.contexts().iter().zip(ppt.state.measures()) {
            assert_eq!(&restrict(&ext, c.generators()).unwrap(), m);
        }
    }

    #[test]
    fn tree_disjoint_is_product_and_cycle_refused() {
        let pba = Pba::new(2, vec![vec![0], vec![1]]).unwrap();
        let ppt = Ppt::new(pba, State::new(vec![Measure::new(1, vec![rat(1, 3), rat(2, 3)]).unwrap(), Measure::uniform(1).unwrap()])).unwrap();
        let ext = extend_tree(&ppt, &singleton_nodes(2)).unwrap();
        assert_eq!(ext.weights(), &[rat(1, 6), rat(2, 6), rat(1, 6), rat(2, 6)]);

        let bell = Pba::new(4, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).unwrap();
        let ppt: Ppt<Rational> = Ppt::new(bell, State::new(vec![Measure::uniform(2).unwrap(); 4])).unwrap();
        assert!(matches!(extend_tree(&ppt, &singleton_nodes(4)), Err(Error::NotAForest(_))));
        let contexts: Vec<Vec<usize>> = ppt.pba.contexts().iter().map(|c| c.generators().to_vec()).collect();
        assert!(matches!(extend_tree(&ppt, &contexts), Err(Error::NoRunningIntersectionOrder(_))));
    }

    fn bell_ppt(p: [Rational; 4], q: [Rational; 4]) -> Ppt<Rational> {
        // contexts 13, 14, 23, 24 with q in that order
        let pba = Pba::new(4, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).unwrap();
        let pairs = [(0, 2), (0, 3), (1, 2), (1, 3)];
        let ms = pairs
            .iter()
            .zip(&q)
            .map(|(&(a, b), qab)| {
                let one = rat(1, 1);
                Measure::new(
                    2,
                    vec![one - &p[a] - &p[b] + qab, &p[a] - qab, &p[b] - qab, qab.clone()],
                )
                .unwrap()
            })
            .collect();
        Ppt::new_consistent(pba, State::new(ms)).unwrap()
    }

    #[test]
    fn chsh_examples() {
        let h = rat(1, 2);
        let q = rat(1, 4);
        let indep = bell_ppt([h.clone(), h.clone(), h.clone(), h.clone()], [q.clone(), q.clone(), q.clone(), q.clone()]);
        let r = chsh_condition(&indep).unwrap();
        assert!(r.holds);
        let ext = r.extension.unwrap();
        for (c, m) in indep.pba.contexts().iter().zip(indep.state.measures()) {
            assert_eq!(&restrict(&ext, c.generators()).unwrap(), m);
        }
        let one = rat(1, 1);
        let det = bell_ppt([one.clone(), one.clone(), one.clone(), one.clone()], [one.clone(), one.clone(), one.clone(), one.clone()]);
        assert!(chsh_condition(&det).unwrap().holds);
        // PR-box-like correlations: q13 = q14 = q23 = 1/2, q24 = 0
        let pr = bell_ppt([h.clone(), h.clone(), h.clone(), h.clone()], [h.clone(), h.clone(), h.clone(), rat(0, 1)]);
        let r = chsh_condition(&pr).unwrap();
        assert!(!r.holds);
        assert!(Scalar::is_positive(&r.max_violation()));
        assert!(r.extension.is_none());
    }

    #[test]
    fn chsh_rejects_wrong_topology() {
        let ppt = chain();
        assert!(matches!(chsh_condition(&ppt), Err(Error::WrongTopology(_))));
    }

    #[test]
    fn lp_bounds_match_chi_eta_box() {
        let t = ts([(1, 2), (2, 5), (3, 5), (1, 5), (3, 10)]);
        let spec = CorrelationSpec::new(3, vec![vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]]).unwrap();
        let p = vec![t.p1.clone(), t.p2.clone(), t.p3.clone(), t.p13.clone(), t.p23.clone()];
        let lp = polytope::bounds_missing_term(&p, &spec, &[0, 1]).unwrap();
        assert_eq!(lp, chi_eta_intervals(&t).unwrap().p12_range());
    }

    #[test]
    fn three_by_three_product_state_is_feasible() {
        let contexts: Vec<Vec<usize>> = (0..3).flat_map(|i| (3..6).map(move |j| vec![i, j])).collect();
        let pba = Pba::new(6, contexts.clone()).unwrap();
        let marg = [rat(1, 2), rat(1, 3), rat(1, 4), rat(2, 3), rat(3, 5), rat(1, 5)];
        let ms = contexts
            .iter()
            .map(|c| {
                let (a, b) = (&marg[c[0]], &marg[c[1]]);
                let one = rat(1, 1);
                Measure::new(2, vec![(&one - a) * (&one - b), a * (&one - b), (&one - a) * b, a * b]).unwrap()
            })
            .collect();
        let ppt = Ppt::new_consistent(pba, State::new(ms)).unwrap();
        let r = three_by_three_condition(&ppt, Side::First).unwrap();
        assert!(r.feasible);
        assert_eq!(r.expressions.len(), 11);
        let ext = r.extension.unwrap();
        let full = Pba::new(6, vec![(0..6).collect()]).unwrap();
        let lifted = Ppt::new(full, State::new(vec![ext.clone()])).unwrap();
        assert!(validate_ppt(&lifted).is_valid());
        for (c, m) in ppt.pba.contexts().iter().zip(ppt.state.measures()) {
            assert_eq!(&restrict(&ext, c.generators()).unwrap(), m);
        }
        assert!(three_by_three_condition(&ppt, Side::Second).unwrap().feasible);
    }
}
