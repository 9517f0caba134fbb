//! Partial Boolean algebras over a global generator list, states on them,
//! and compatibility graphs.
//!
//! Only maximal contexts are stored. A context is the free Boolean algebra
//! over its (sorted) generators; local generator `j` of a context is global
//! generator `context.generators()[j]`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::boolean_core::{restrict, Measure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest context arity for which separation is checked exhaustively.
pub const SEPARATING_ARITY_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    generators: Vec<usize>,
}

impl Context {
    pub fn new(mut generators: Vec<usize>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidGenerators("empty context".into()));
        }
        generators.sort_unstable();
        if generators.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGenerators(format!("repeated generator in {generators:?}")));
        }
        Ok(Context { generators })
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn arity(&self) -> usize {
        self.generators.len()
    }

    pub fn contains_all(&self, gens: &[usize]) -> bool {
        gens.iter().all(|g| self.generators.binary_search(g).is_ok())
    }

    /// Local positions of `gens` inside this context (None if absent).
    pub fn local_indices(&self, gens: &[usize]) -> Option<Vec<usize>> {
        gens.iter().map(|g| self.generators.binary_search(g).ok()).collect()
    }
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.binary_search(x).is_ok()).copied().collect()
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pba {
    names: Vec<String>,
    contexts: Vec<Context>,
}

impl Pba {
    /// Generators are named `A1..An`.
    pub fn new(n: usize, contexts: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_names((1..=n).map(|i| format!("A{i}")).collect(), contexts)
    }

    pub fn with_names(names: Vec<String>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        let mut ctxs = Vec::with_capacity(contexts.len());
        for c in contexts {
            let c = Context::new(c)?;
            if let Some(&bad) = c.generators.iter().find(|&&g| g >= n) {
                return Err(Error::IndexOutOfRange { index: bad, arity: n });
            }
            ctxs.push(c);
        }
        for (i, c) in ctxs.iter().enumerate() {
            for (j, d) in ctxs.iter().enumerate() {
                if i != j && d.contains_all(&c.generators) && (c != d || i > j) {
                    return Err(Error::NonMaximalContext(c.generators.clone()));
                }
            }
        }
        for g in 0..n {
            if !ctxs.iter().any(|c| c.generators.contains(&g)) {
                return Err(Error::UncoveredGenerator(g));
            }
        }
        Ok(Pba { names, contexts: ctxs })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    /// First context containing all of `gens`.
    pub fn context_containing(&self, gens: &[usize]) -> Option<usize> {
        self.contexts.iter().position(|c| c.contains_all(gens))
    }

    pub fn compatible(&self, a: usize, b: usize) -> bool {
        self.context_containing(&[a, b]).is_some()
    }

    pub fn label(&self, gens: &[usize]) -> String {
        gens.iter().map(|&g| self.names[g].as_str()).collect::<Vec<_>>().join(", ")
    }
}

/// One measure per context of a [`Pba`], in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct State<S: Scalar> {
    measures: Vec<Measure<S>>,
}

impl<S: Scalar> State<S> {
    pub fn new(measures: Vec<Measure<S>>) -> Self {
        State { measures }
    }

    pub fn measures(&self) -> &[Measure<S>] {
        &self.measures
    }

    fn check_shape(&self, pba: &Pba) -> Result<()> {
        if self.measures.len() != pba.contexts.len() {
            return Err(Error::StateShape(format!(
                "{} measures for {} contexts",
                self.measures.len(),
                pba.contexts.len()
            )));
        }
        for (i, (m, c)) in self.measures.iter().zip(&pba.contexts).enumerate() {
            if m.arity() != c.arity() {
                return Err(Error::StateShape(format!(
                    "context {i} has {} generators but its measure has arity {}",
                    c.arity(),
                    m.arity()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ppt<S: Scalar> {
    pub pba: Pba,
    pub state: State<S>,
}

impl<S: Scalar> Ppt<S> {
    /// Checks that the state matches the contexts; consistency is left to
    /// [`validate_ppt`].
    pub fn new(pba: Pba, state: State<S>) -> Result<Self> {
        state.check_shape(&pba)?;
        Ok(Ppt { pba, state })
    }

    /// Like [`Ppt::new`] but also rejects inconsistent states.
    pub fn new_consistent(pba: Pba, state: State<S>) -> Result<Self> {
        let ppt = Self::new(pba, state)?;
        let report = validate_ppt(&ppt);
        if let Some(first) = report.issues.first() {
            return Err(Error::Inconsistent(first.to_string()));
        }
        Ok(ppt)
    }

    pub fn measure(&self, context: usize) -> &Measure<S> {
        &self.state.measures[context]
    }

    /// Marginal on `gens` (sorted global ids), read from any context
    /// containing them.
    pub fn marginal(&self, gens: &[usize]) -> Result<Measure<S>> {
        let ci = self.pba.context_containing(gens).ok_or_else(|| Error::NodeNotInPba(gens.to_vec()))?;
        let local = self.pba.contexts[ci].local_indices(gens).expect("context contains gens");
        restrict(&self.state.measures[ci], &local)
    }

    /// `f(⋂_{g ∈ gens} A_g)`, or None if no context contains `gens`.
    pub fn intersection_value(&self, gens: &[usize]) -> Option<S> {
        let ci = self.pba.context_containing(gens)?;
        let local = self.pba.contexts[ci].local_indices(gens)?;
        let mask = local.iter().fold(0usize, |acc, j| acc | 1 << j);
        Some(self.state.measures[ci].intersection_value(mask))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NotNormalized { context: usize },
    NegativeWeight { context: usize, atom: usize },
    MarginalMismatch { left: usize, right: usize, shared: Vec<usize> },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::NotNormalized { context } => write!(f, "measure of context {context} does not sum to 1"),
            ValidationIssue::NegativeWeight { context, atom } => {
                write!(f, "measure of context {context} is negative on atom {atom}")
            }
            ValidationIssue::MarginalMismatch { left, right, shared } => {
                write!(f, "contexts {left} and {right} disagree on generators {shared:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Normalization and pairwise marginal consistency. Maximality is enforced
/// when the [`Pba`] is built.
pub fn validate_ppt<S: Scalar>(ppt: &Ppt<S>) -> ValidationReport {
    let mut issues = Vec::new();
    let ctxs = &ppt.pba.contexts;
    for (ci, m) in ppt.state.measures.iter().enumerate() {
        if let Some(atom) = m.weights().iter().position(|w| w.is_negative()) {
            issues.push(ValidationIssue::NegativeWeight { context: ci, atom });
        }
        let total: S = m.weights().iter().cloned().sum();
        if !total.approx_eq(&S::one()) {
            issues.push(ValidationIssue::NotNormalized { context: ci });
        }
    }
    for i in 0..ctxs.len() {
        for j in i + 1..ctxs.len() {
            let shared = sorted_intersection(&ctxs[i].generators, &ctxs[j].generators);
            if shared.is_empty() {
                continue;
            }
            let li = ctxs[i].local_indices(&shared).expect("shared generators");
            let lj = ctxs[j].local_indices(&shared).expect("shared generators");
            let mi = restrict(&ppt.state.measures[i], &li).expect("valid restriction");
            let mj = restrict(&ppt.state.measures[j], &lj).expect("valid restriction");
            if !mi.approx_eq(&mj) {
                issues.push(ValidationIssue::MarginalMismatch { left: i, right: j, shared });
            }
        }
    }
    ValidationReport { issues }
}

/// Bron–Kerbosch with pivoting over an adjacency matrix.
pub(crate) fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn bk(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let pivot = p.iter().chain(&x).copied().max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count());
        let pivot = pivot.expect("p or x nonempty");
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
        let (mut p, mut x) = (p, x);
        for v in candidates {
            r.push(v);
            let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
            bk(adj, r, np, nx, out);
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(adj, &mut Vec::new(), (0..adj.len()).collect(), Vec::new(), &mut out);
    out.sort();
    out
}

/// Property (K-S): every set of pairwise compatible generators lies inside
/// one context. Returns the first violating maximal clique of generators.
pub fn check_ks_property(pba: &Pba) -> (bool, Option<Vec<usize>>) {
    let n = pba.n();
    let adj: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| a != b && pba.compatible(a, b)).collect()).collect();
    for clique in maximal_cliques(&adj) {
        if pba.context_containing(&clique).is_none() {
            return (false, Some(clique));
        }
    }
    (true, None)
}

/// A nonzero element that every state sends to zero: `(context, atom)`.
pub fn check_complete<S: Scalar>(pba: &Pba, states: &[State<S>]) -> Result<(bool, Option<(usize, usize)>)> {
    for s in states {
        s.check_shape(pba)?;
    }
    for (ci, c) in pba.contexts.iter().enumerate() {
        for atom in 0..1usize << c.arity() {
            if !states.iter().any(|s| s.measures[ci].weight(atom).is_positive()) {
                return Ok((false, Some((ci, atom))));
            }
        }
    }
    Ok((true, None))
}

/// Two distinct elements of one context that no state tells apart:
/// `(context, mask_a, mask_b)` as atom bitmasks.
pub type SeparationWitness = (usize, u64, u64);

/// Whether the states separate the elements of every context. Exhaustive
/// over the `2^(2^k)` elements of each context, for `k ≤ 4`.
pub fn check_separating<S: Scalar>(pba: &Pba, states: &[State<S>]) -> Result<(bool, Option<SeparationWitness>)> {
    for s in states {
        s.check_shape(pba)?;
    }
    for (ci, c) in pba.contexts.iter().enumerate() {
        let k = c.arity();
        if k > SEPARATING_ARITY_LIMIT {
            return Err(Error::LimitExceeded(format!(
                "separation check on a context with {k} generators (limit {SEPARATING_ARITY_LIMIT})"
            )));
        }
        let atoms = 1usize << k;
        let count = 1u64 << atoms;
        // value[mask][state], built incrementally from the lowest atom
        let mut values: Vec<Vec<S>> = Vec::with_capacity(count as usize);
        values.push(vec![S::zero(); states.len()]);
        let mut seen: std::collections::HashMap<Vec<String>, u64> = std::collections::HashMap::new();
        seen.insert(values[0].iter().map(|v| v.grid_key()).collect(), 0);
        for mask in 1..count {
            let low = mask.trailing_zeros() as usize;
            let prev = &values[(mask & (mask - 1)) as usize];
            let row: Vec<S> = prev
                .iter()
                .zip(states)
                .map(|(v, s)| v.clone() + s.measures[ci].weight(low).clone())
                .collect();
            let key: Vec<String> = row.iter().map(|v| v.grid_key()).collect();
            if let Some(&other) = seen.get(&key) {
                return Ok((false, Some((ci, other, mask))));
            }
            seen.insert(key, mask);
            values.push(row);
        }
    }
    Ok((true, None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityGraph {
    pub nodes: Vec<Vec<usize>>,
    /// Pairs `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<String>,
}

impl CompatibilityGraph {
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }

    fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.nodes.len()]; self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        adj
    }

    /// A cycle as a node list, if the graph is not a forest.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut parent = vec![usize::MAX; n];
        let mut visited = vec![false; n];
        for root in 0..n {
            if visited[root] {
                continue;
            }
            let mut stack = vec![root];
            visited[root] = true;
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if w == parent[v] {
                        continue;
                    }
                    if visited[w] {
                        // close the cycle through the lowest common ancestor
                        let path_to_root = |mut x: usize| {
                            let mut p = vec![x];
                            while parent[x] != usize::MAX {
                                x = parent[x];
                                p.push(x);
                            }
                            p
                        };
                        let pv = path_to_root(v);
                        let pw = path_to_root(w);
                        let common = pv.iter().find(|x| pw.contains(x)).copied().expect("same tree");
                        let mut cycle: Vec<usize> = pv.iter().take_while(|&&x| x != common).copied().collect();
                        cycle.push(common);
                        let back: Vec<usize> = pw.iter().take_while(|&&x| x != common).copied().collect();
                        cycle.extend(back.into_iter().rev());
                        return Some(cycle);
                    }
                    visited[w] = true;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
        None
    }
}

fn graph_from_nodes(pba: &Pba, nodes: Vec<Vec<usize>>, share_edges: bool) -> CompatibilityGraph {
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let union = sorted_union(&nodes[i], &nodes[j]);
            let shares = share_edges && !sorted_intersection(&nodes[i], &nodes[j]).is_empty();
            if shares || pba.context_containing(&union).is_some() {
                edges.push((i, j));
            }
        }
    }
    let labels = nodes.iter().map(|n| pba.label(n)).collect();
    CompatibilityGraph { nodes, edges, labels }
}

/// Nodes are sorted and deduplicated; an edge joins two nodes whose
/// generator union lies inside a context.
pub fn compatibility_graph(pba: &Pba, nodes: &[Vec<usize>]) -> Result<CompatibilityGraph> {
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let mut node = node.clone();
        node.sort_unstable();
        node.dedup();
        if node.is_empty() || pba.context_containing(&node).is_none() {
            return Err(Error::NodeNotInPba(node));
        }
        sorted.push(node);
    }
    sorted.sort();
    sorted.dedup();
    Ok(graph_from_nodes(pba, sorted, false))
}

/// Collapses every maximal clique (size ≥ 2) into one node. Merged nodes
/// are adjacent when they share a generator or their union lies in a
/// context.
pub fn merge_cliques(g: &CompatibilityGraph, pba: &Pba) -> Result<CompatibilityGraph> {
    let (ks, witness) = check_ks_property(pba);
    if !ks {
        return Err(Error::KsPropertyRequired(witness.unwrap_or_default()));
    }
    let mut merged: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut absorbed: HashSet<usize> = HashSet::new();
    for clique in maximal_cliques(&g.adjacency()) {
        if clique.len() < 2 {
            continue;
        }
        let union = clique.iter().fold(Vec::new(), |acc, &v| sorted_union(&acc, &g.nodes[v]));
        if pba.context_containing(&union).is_some() {
            absorbed.extend(clique.iter().copied());
            merged.insert(union);
        }
    }
    if merged.is_empty() {
        return Ok(g.clone());
    }
    for (v, node) in g.nodes.iter().enumerate() {
        if !absorbed.contains(&v) {
            merged.insert(node.clone());
        }
    }
    Ok(graph_from_nodes(pba, merged.into_iter().collect(), true))
}

/// Undirected DOT rendering; node `i` is labeled with its generator names.
pub fn export_dot(g: &CompatibilityGraph) -> String {
    let mut out = String::from("graph {\n");
    for (i, label) in g.labels.iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", label.replace('"', "\\\""));
    }
    for &(a, b) in &g.edges {
        let _ = writeln!(out, "  n{a} -- n{b};");
    }
    out.push_str("}\n");
    out
}
