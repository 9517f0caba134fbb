//! Projection algebras of finite-dimensional quantum mechanics and the
//! states they induce on generator-indexed partial Boolean algebras.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::boolean_core::{measure_from_intersections, Measure};
use crate::error::{Error, Result};
use crate::ppt::{maximal_cliques, Pba, Ppt, State};

/// Tolerance for hermiticity, idempotency and commutation checks.
pub const MATRIX_TOLERANCE: f64 = 1e-9;
/// Tolerance for deciding that two projections are the same element.
pub const DEDUP_TOLERANCE: f64 = 1e-7;
/// Maximum number of generators for the commuting-subset search.
pub const GENERATOR_LIMIT: usize = 24;
/// Maximum number of nonzero atoms per context whose closure is listed.
pub const CLOSURE_ATOM_LIMIT: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn matrices_equal(a: &CMatrix, b: &CMatrix) -> bool {
    a.shape() == b.shape() && max_abs(&(a - b)) < DEDUP_TOLERANCE
}

pub fn is_zero_matrix(a: &CMatrix) -> bool {
    max_abs(a) < DEDUP_TOLERANCE
}

/// A labeled orthogonal projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    label: String,
    matrix: CMatrix,
}

impl ProjectionMatrix {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let label = label.into();
        if !matrix.is_square() || !check_projection(&matrix) {
            return Err(Error::NotAProjection(label));
        }
        Ok(ProjectionMatrix { label, matrix })
    }

    /// From separate real and imaginary parts (row-major rows).
    pub fn from_parts(label: impl Into<String>, re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let label = label.into();
        let d = re.len();
        if re.iter().any(|r| r.len() != d) {
            return Err(Error::NotAProjection(label));
        }
        if let Some(im) = im {
            if im.len() != d || im.iter().any(|r| r.len() != d) {
                return Err(Error::NotAProjection(label));
            }
        }
        let m = CMatrix::from_fn(d, d, |i, j| Complex64::new(re[i][j], im.map_or(0.0, |im| im[i][j])));
        Self::new(label, m)
    }

    /// `|v⟩⟨v|/⟨v|v⟩` for a nonzero vector.
    pub fn rank_one(label: impl Into<String>, v: &[Complex64]) -> Result<Self> {
        let label = label.into();
        let v = DVector::from_column_slice(v);
        let norm2 = v.norm_squared();
        if norm2 < MATRIX_TOLERANCE {
            return Err(Error::NotAProjection(label));
        }
        let m = &v * v.adjoint() / Complex64::new(norm2, 0.0);
        Self::new(label, m)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn check_projection(p: &CMatrix) -> bool {
    p.is_square() && max_abs(&(p - p.adjoint())) < MATRIX_TOLERANCE && max_abs(&(p * p - p)) < MATRIX_TOLERANCE
}

pub fn commutes(p: &CMatrix, q: &CMatrix) -> Result<bool> {
    if p.shape() != q.shape() {
        return Err(Error::DimMismatch(p.nrows(), q.nrows()));
    }
    Ok(max_abs(&(p * q - q * p)) < MATRIX_TOLERANCE)
}

/// A unit vector or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Vector(DVector<Complex64>),
    Density(CMatrix),
}

impl QuantumState {
    pub fn vector(entries: Vec<Complex64>) -> Result<Self> {
        let v = DVector::from_vec(entries);
        if (v.norm() - 1.0).abs() > MATRIX_TOLERANCE.sqrt() {
            return Err(Error::InvalidState(format!("vector norm {}", v.norm())));
        }
        Ok(QuantumState::Vector(v))
    }

    pub fn density(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        if max_abs(&(&rho - rho.adjoint())) > MATRIX_TOLERANCE {
            return Err(Error::InvalidState("density matrix is not hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > MATRIX_TOLERANCE.sqrt() || tr.im.abs() > MATRIX_TOLERANCE.sqrt() {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_eig = rho.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -MATRIX_TOLERANCE.sqrt() {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig}")));
        }
        Ok(QuantumState::Density(rho))
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        QuantumState::Density(CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Vector(v) => v.len(),
            QuantumState::Density(r) => r.nrows(),
        }
    }

    /// `(ψ, P ψ)` or `tr(ρ P)`.
    pub fn expectation(&self, p: &CMatrix) -> Result<f64> {
        if p.nrows() != self.dim() {
            return Err(Error::DimMismatch(self.dim(), p.nrows()));
        }
        Ok(match self {
            QuantumState::Vector(v) => v.dotc(&(p * v)).re,
            QuantumState::Density(r) => (r * p).trace().re,
        })
    }
}

/// Product of the given commuting projections (identity when empty).
pub fn product(projs: &[&CMatrix], d: usize) -> CMatrix {
    projs.iter().fold(CMatrix::identity(d, d), |acc, p| acc * *p)
}

/// Atom projection `∏ (ε_j ? P_j : 1 − P_j)` of commuting projections,
/// with `ε` read as a bitmask (bit `j` for `P_j`).
pub fn atom_projection(projs: &[&CMatrix], eps: usize, d: usize) -> CMatrix {
    let id = CMatrix::identity(d, d);
    projs.iter().enumerate().fold(id.clone(), |acc, (j, p)| {
        if eps >> j & 1 == 1 {
            acc * *p
        } else {
            acc * (&id - *p)
        }
    })
}

fn push_distinct(list: &mut Vec<CMatrix>, m: CMatrix) -> usize {
    if let Some(i) = list.iter().position(|x| matrices_equal(x, &m)) {
        return i;
    }
    list.push(m);
    list.len() - 1
}

/// Generators, their maximal commuting subsets, and the finite set of
/// projections generated within those subsets.
#[derive(Debug, Clone)]
pub struct ProjectionPba {
    generators: Vec<ProjectionMatrix>,
    contexts: Vec<Vec<usize>>,
    closure: Vec<CMatrix>,
    context_closures: Vec<Vec<usize>>,
}

impl ProjectionPba {
    pub fn generators(&self) -> &[ProjectionMatrix] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }

    /// Maximal commuting generator subsets, sorted.
    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    /// All distinct projections reachable inside some context.
    pub fn closure(&self) -> &[CMatrix] {
        &self.closure
    }

    /// Indices into [`closure`](Self::closure) of context `c`'s algebra.
    pub fn context_closure(&self, c: usize) -> &[usize] {
        &self.context_closures[c]
    }

    /// The abstract generator-indexed PBA with the same contexts.
    pub fn to_pba(&self) -> Result<Pba> {
        Pba::with_names(self.labels(), self.contexts.clone())
    }

    pub fn context_matrices(&self, c: usize) -> Vec<&CMatrix> {
        self.contexts[c].iter().map(|&g| &self.generators[g].matrix).collect()
    }

    /// Nonzero atom projections of context `c`, with their atom indices.
    pub fn nonzero_atoms(&self, c: usize) -> Vec<(usize, CMatrix)> {
        let ms = self.context_matrices(c);
        let d = self.dim();
        (0..1usize << ms.len())
            .map(|eps| (eps, atom_projection(&ms, eps, d)))
            .filter(|(_, a)| !is_zero_matrix(a))
            .collect()
    }

    /// Whether `m` lies in the algebra of context `c`.
    pub fn in_context(&self, c: usize, m: &CMatrix) -> bool {
        self.context_closures[c].iter().any(|&i| matrices_equal(&self.closure[i], m))
    }
}

/// Maximal subsets of pairwise commuting projections.
pub fn maximal_commuting_subsets(projs: &[&CMatrix]) -> Result<Vec<Vec<usize>>> {
    let n = projs.len();
    if n > GENERATOR_LIMIT {
        return Err(Error::LimitExceeded(format!("{n} generators (limit {GENERATOR_LIMIT})")));
    }
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = commutes(projs[i], projs[j])?;
            adj[i][j] = c;
            adj[j][i] = c;
        }
    }
    let mut cliques = maximal_cliques(&adj);
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort();
    Ok(cliques)
}

/// Algebra generated by commuting projections: sums of subsets of the
/// nonzero atom projections.
pub fn commuting_closure(projs: &[&CMatrix], d: usize) -> Result<Vec<CMatrix>> {
    let atoms: Vec<CMatrix> = (0..1usize << projs.len())
        .map(|eps| atom_projection(projs, eps, d))
        .filter(|a| !is_zero_matrix(a))
        .collect();
    if atoms.len() > CLOSURE_ATOM_LIMIT {
        return Err(Error::LimitExceeded(format!("{} atoms (limit {CLOSURE_ATOM_LIMIT})", atoms.len())));
    }
    Ok((0..1usize << atoms.len())
        .map(|s| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .fold(CMatrix::zeros(d, d), |acc, (_, a)| acc + a)
        })
        .collect())
}

/// Closure under `P∩Q = PQ`, `P∪Q = P+Q−PQ`, `P^c = 1−P`, iterated to a
/// fixpoint. Quadratic per round; used to cross-check
/// [`commuting_closure`].
pub fn boolean_fixpoint(projs: &[&CMatrix], d: usize) -> Vec<CMatrix> {
    let id = CMatrix::identity(d, d);
    let mut set: Vec<CMatrix> = Vec::new();
    push_distinct(&mut set, CMatrix::zeros(d, d));
    push_distinct(&mut set, id.clone());
    for p in projs {
        push_distinct(&mut set, (*p).clone());
    }
    loop {
        let before = set.len();
        let snapshot = set.clone();
        for a in &snapshot {
            push_distinct(&mut set, &id - a);
            for b in &snapshot {
                let ab = a * b;
                push_distinct(&mut set, a + b - &ab);
                push_distinct(&mut set, ab);
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

pub fn build_projection_pba(projs: Vec<ProjectionMatrix>) -> Result<ProjectionPba> {
    let Some(first) = projs.first() else {
        return Err(Error::InvalidGenerators("no projections".into()));
    };
    let d = first.dim();
    for p in &projs {
        if p.dim() != d {
            return Err(Error::DimMismatch(d, p.dim()));
        }
        if !check_projection(&p.matrix) {
            return Err(Error::NotAProjection(p.label.clone()));
        }
    }
    let mats: Vec<&CMatrix> = projs.iter().map(|p| &p.matrix).collect();
    let contexts = maximal_commuting_subsets(&mats)?;
    let mut closure = Vec::new();
    let mut context_closures = Vec::new();
    for c in &contexts {
        let ms: Vec<&CMatrix> = c.iter().map(|&g| mats[g]).collect();
        let mut idx: Vec<usize> = commuting_closure(&ms, d)?.into_iter().map(|m| push_distinct(&mut closure, m)).collect();
        idx.sort_unstable();
        idx.dedup();
        context_closures.push(idx);
    }
    Ok(ProjectionPba { generators: projs, contexts, closure, context_closures })
}

/// Measure of one context: intersection values `(ψ, P_S ψ)` expanded to
/// atom weights.
pub fn context_measure(s: &QuantumState, projs: &[&CMatrix]) -> Result<Measure<f64>> {
    let d = s.dim();
    let mut values = BTreeMap::new();
    for mask in 1..1usize << projs.len() {
        let sel: Vec<&CMatrix> = projs.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, p)| *p).collect();
        values.insert(mask, s.expectation(&product(&sel, d))?);
    }
    let m = measure_from_intersections(&values, projs.len())
        .map_err(|e| Error::InternalInconsistency(format!("quantum values do not form a measure: {e}")))?;
    // clear rounding noise below the tolerance
    let w = m.into_weights().into_iter().map(|x| if x.abs() < MATRIX_TOLERANCE { 0.0 } else { x }).collect();
    Measure::new(projs.len(), w).map_err(|e| Error::InternalInconsistency(e.to_string()))
}

pub fn quantum_state_on_pba(s: &QuantumState, pba: &ProjectionPba) -> Result<State<f64>> {
    if s.dim() != pba.dim() {
        return Err(Error::DimMismatch(pba.dim(), s.dim()));
    }
    let measures = (0..pba.contexts.len())
        .map(|c| context_measure(s, &pba.context_matrices(c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(State::new(measures))
}

/// The free PPT: one free context per maximal commuting subset, with no
/// identifications among generators.
pub fn free_state_from_projections(projs: Vec<ProjectionMatrix>, s: &QuantumState) -> Result<Ppt<f64>> {
    let pba = build_projection_pba(projs)?;
    let state = quantum_state_on_pba(s, &pba)?;
    Ppt::new(pba.to_pba()?, state)
}
