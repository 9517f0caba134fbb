//! Correlation polytopes: vertices, LP membership with certificates, bounds
//! on unmeasured correlations, and exact double-description facets.
//!
//! A monomial is a sorted set of global generator ids standing for the
//! intersection of those generators. The vertex `u_ε` has coordinate
//! `∏_{i∈S} ε_i` on monomial `S`, and vertices are indexed like atoms.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::boolean_core::Measure;
use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::ppt::Ppt;
use crate::scalar::{Rational, Scalar};

/// Largest generator count accepted by [`membership`].
pub const MEMBERSHIP_LIMIT: usize = 20;
/// Largest dimension accepted by [`enumerate_facets`].
pub const FACET_DIMENSION_LIMIT: usize = 12;
/// Largest vertex count accepted by [`enumerate_facets`].
pub const FACET_VERTEX_LIMIT: usize = 64;

pub type Monomial = Vec<usize>;

/// `p1`, `p13`, `p123`; indices above 9 are comma separated.
pub fn monomial_label(m: &[usize]) -> String {
    let sep = if m.iter().any(|&g| g >= 9) { "," } else { "" };
    let body: Vec<String> = m.iter().map(|g| (g + 1).to_string()).collect();
    format!("p{}", body.join(sep))
}

fn monomial_mask(m: &[usize]) -> usize {
    m.iter().fold(0, |acc, g| acc | 1 << g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSpec {
    n: usize,
    monomials: Vec<Monomial>,
}

impl CorrelationSpec {
    pub fn new(n: usize, monomials: Vec<Monomial>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(monomials.len());
        for mut m in monomials {
            m.sort_unstable();
            if m.is_empty() || m.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidSpec(format!("bad monomial {m:?}")));
            }
            if let Some(&g) = m.iter().find(|&&g| g >= n) {
                return Err(Error::IndexOutOfRange { index: g, arity: n });
            }
            if !seen.insert(m.clone()) {
                return Err(Error::InvalidSpec(format!("repeated monomial {}", monomial_label(&m))));
            }
            out.push(m);
        }
        for g in 0..n {
            if !seen.contains(&vec![g]) {
                return Err(Error::InvalidSpec(format!("missing singleton {}", monomial_label(&[g]))));
            }
        }
        Ok(CorrelationSpec { n, monomials: out })
    }

    /// All nonempty generator subsets of the given contexts, ordered by size
    /// and then lexicographically.
    pub fn from_contexts(n: usize, contexts: &[Vec<usize>]) -> Result<Self> {
        let mut set = std::collections::BTreeSet::new();
        for c in contexts {
            let mut c = c.clone();
            c.sort_unstable();
            for mask in 1usize..1 << c.len() {
                let m: Monomial = (0..c.len()).filter(|j| mask >> j & 1 == 1).map(|j| c[j]).collect();
                set.insert(m);
            }
        }
        let mut monomials: Vec<Monomial> = set.into_iter().collect();
        monomials.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Self::new(n, monomials)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn dimension(&self) -> usize {
        self.monomials.len()
    }

    pub fn index_of(&self, m: &[usize]) -> Option<usize> {
        let mut m = m.to_vec();
        m.sort_unstable();
        self.monomials.iter().position(|x| *x == m)
    }

    pub fn labels(&self) -> Vec<String> {
        self.monomials.iter().map(|m| monomial_label(m)).collect()
    }

    fn vertex_bits(&self, eps: usize) -> Vec<bool> {
        self.monomials
            .iter()
            .map(|m| {
                let mask = monomial_mask(m);
                eps & mask == mask
            })
            .collect()
    }
}

/// All `2^n` vertices, indexed by `ε`, duplicates retained.
pub fn vertices<S: Scalar>(spec: &CorrelationSpec) -> Result<Vec<Vec<S>>> {
    if spec.n > MEMBERSHIP_LIMIT {
        return Err(Error::LimitExceeded(format!("{} generators (limit {MEMBERSHIP_LIMIT})", spec.n)));
    }
    Ok((0..1usize << spec.n)
        .map(|eps| spec.vertex_bits(eps).into_iter().map(|b| if b { S::one() } else { S::zero() }).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityCertificate<S> {
    /// `λ(ε)` per vertex.
    Feasible { weights: Vec<S> },
    /// `c·u_ε ≤ c0` for every vertex and `c·p > c0`.
    Infeasible { c: Vec<S>, c0: S },
}

impl<S: Scalar> FeasibilityCertificate<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityCertificate::Feasible { .. })
    }

    /// Re-checks the certificate by substitution.
    pub fn verify(&self, spec: &CorrelationSpec, p: &[S]) -> bool {
        if p.len() != spec.dimension() {
            return false;
        }
        match self {
            FeasibilityCertificate::Feasible { weights } => {
                if weights.len() != 1 << spec.n || weights.iter().any(|w| w.is_negative()) {
                    return false;
                }
                let total: S = weights.iter().cloned().sum();
                if !total.approx_eq(&S::one()) {
                    return false;
                }
                spec.monomials.iter().zip(p).all(|(m, pm)| {
                    let mask = monomial_mask(m);
                    let v: S = weights
                        .iter()
                        .enumerate()
                        .filter(|(eps, _)| eps & mask == mask)
                        .map(|(_, w)| w.clone())
                        .sum();
                    v.approx_eq(pm)
                })
            }
            FeasibilityCertificate::Infeasible { c, c0 } => {
                if c.len() != spec.dimension() {
                    return false;
                }
                let cp: S = c.iter().zip(p).map(|(a, b)| a.clone() * b.clone()).sum();
                if !(cp - c0.clone()).is_positive() {
                    return false;
                }
                (0..1usize << spec.n).all(|eps| {
                    let bits = spec.vertex_bits(eps);
                    let cu: S = c.iter().zip(&bits).filter(|(_, &b)| b).map(|(a, _)| a.clone()).sum();
                    cu.approx_le(c0)
                })
            }
        }
    }

    /// The extension measure over all generators, when feasible.
    pub fn extension(&self, n: usize) -> Option<Measure<S>> {
        match self {
            FeasibilityCertificate::Feasible { weights } => Measure::new(n, weights.clone()).ok(),
            FeasibilityCertificate::Infeasible { .. } => None,
        }
    }
}

fn constraint_system<S: Scalar>(spec: &CorrelationSpec, p: &[S]) -> Result<(Vec<Vec<S>>, Vec<S>)> {
    if spec.n > MEMBERSHIP_LIMIT {
        return Err(Error::LimitExceeded(format!("{} generators (limit {MEMBERSHIP_LIMIT})", spec.n)));
    }
    if p.len() != spec.dimension() {
        return Err(Error::DimMismatch(p.len(), spec.dimension()));
    }
    let cols = 1usize << spec.n;
    let mut a = vec![vec![S::one(); cols]];
    for m in &spec.monomials {
        let mask = monomial_mask(m);
        a.push((0..cols).map(|eps| if eps & mask == mask { S::one() } else { S::zero() }).collect());
    }
    let mut b = vec![S::one()];
    b.extend(p.iter().cloned());
    Ok((a, b))
}

/// Exact LP test of `p ∈ conv{u_ε}` with a verified certificate.
pub fn membership<S: Scalar>(p: &[S], spec: &CorrelationSpec) -> Result<FeasibilityCertificate<S>> {
    let (a, b) = constraint_system(spec, p)?;
    let cert = match lp::feasible(&a, &b)? {
        LpOutcome::Optimal { x, .. } => FeasibilityCertificate::Feasible { weights: x },
        LpOutcome::Infeasible { farkas } => {
            let c0 = -farkas[0].clone();
            FeasibilityCertificate::Infeasible { c: farkas[1..].to_vec(), c0 }
        }
        LpOutcome::Unbounded => return Err(Error::InternalInconsistency("feasibility LP unbounded".into())),
    };
    if !cert.verify(spec, p) {
        return Err(Error::InternalInconsistency("membership certificate failed verification".into()));
    }
    Ok(cert)
}

/// Membership of a PPT's correlation vector, with the spec and vector used.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation<S> {
    pub spec: CorrelationSpec,
    pub p: Vec<S>,
    pub certificate: FeasibilityCertificate<S>,
}

impl<S: Scalar> Representation<S> {
    pub fn is_representable(&self) -> bool {
        self.certificate.is_feasible()
    }

    pub fn extension(&self) -> Option<Measure<S>> {
        self.certificate.extension(self.spec.n)
    }
}

/// The correlation vector of a PPT over every intersection monomial that
/// lies inside some context.
pub fn correlation_vector<S: Scalar>(ppt: &Ppt<S>) -> Result<(CorrelationSpec, Vec<S>)> {
    let contexts: Vec<Vec<usize>> = ppt.pba.contexts().iter().map(|c| c.generators().to_vec()).collect();
    let spec = CorrelationSpec::from_contexts(ppt.pba.n(), &contexts)?;
    let p = spec
        .monomials
        .iter()
        .map(|m| ppt.intersection_value(m).expect("monomial lies in a context"))
        .collect();
    Ok((spec, p))
}

pub fn classical_representable<S: Scalar>(ppt: &Ppt<S>) -> Result<Representation<S>> {
    let (spec, p) = correlation_vector(ppt)?;
    let certificate = membership(&p, &spec)?;
    Ok(Representation { spec, p, certificate })
}

/// Exact min and max of `Σ coeff·p_S` over every extension of `p`, where
/// each `S` may be any monomial over the spec's generators.
pub fn bounds_expression<S: Scalar>(p: &[S], spec: &CorrelationSpec, expr: &[(Monomial, S)]) -> Result<(S, S)> {
    let (a, b) = constraint_system(spec, p)?;
    for (m, _) in expr {
        if let Some(&g) = m.iter().find(|&&g| g >= spec.n) {
            return Err(Error::IndexOutOfRange { index: g, arity: spec.n });
        }
    }
    let cols = 1usize << spec.n;
    let objective: Vec<S> = (0..cols)
        .map(|eps| {
            expr.iter()
                .filter(|(m, _)| {
                    let mask = monomial_mask(m);
                    eps & mask == mask
                })
                .map(|(_, c)| c.clone())
                .sum()
        })
        .collect();
    let lo = match lp::minimize(&a, &b, &objective)? {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible { .. } => return Err(Error::InfeasibleBase),
        LpOutcome::Unbounded => return Err(Error::InternalInconsistency("bounded LP reported unbounded".into())),
    };
    let hi = match lp::maximize(&a, &b, &objective)? {
        LpOutcome::Optimal { value, .. } => value,
        _ => return Err(Error::InternalInconsistency("max LP disagrees with min LP".into())),
    };
    Ok((lo, hi))
}

/// `[α, β]`: the values of the unmeasured monomial `target` compatible with
/// some extension of `p`.
pub fn bounds_missing_term<S: Scalar>(p: &[S], spec: &CorrelationSpec, target: &[usize]) -> Result<(S, S)> {
    if spec.index_of(target).is_some() {
        return Err(Error::InvalidSpec(format!("{} is already measured", monomial_label(target))));
    }
    let mut t = target.to_vec();
    t.sort_unstable();
    bounds_expression(p, spec, &[(t, S::one())])
}

/// `coefficients · p ≤ bound`, integer, with gcd 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Facet {
    pub coefficients: Vec<BigInt>,
    pub bound: BigInt,
}

impl PartialOrd for Facet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Facet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coefficients.cmp(&other.coefficients).then_with(|| self.bound.cmp(&other.bound))
    }
}

impl Facet {
    pub fn satisfied_by<S: Scalar>(&self, p: &[S]) -> bool {
        let lhs: S = self
            .coefficients
            .iter()
            .zip(p)
            .map(|(c, v)| S::from_i64(i64::try_from(c).expect("small facet coefficient")) * v.clone())
            .sum();
        lhs.approx_le(&S::from_i64(i64::try_from(&self.bound).expect("small facet bound")))
    }

    /// Human-readable form over the given monomial labels.
    pub fn render(&self, labels: &[String]) -> String {
        let mut out = String::new();
        for (c, l) in self.coefficients.iter().zip(labels) {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if c.abs() != BigInt::one() {
                out.push_str(&format!("{}*", c.abs()));
            }
            out.push_str(l);
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} <= {}", self.bound)
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..self.coefficients.len()).map(|i| format!("x{}", i + 1)).collect();
        f.write_str(&self.render(&labels))
    }
}

/// Rank of a small integer matrix by fraction-free elimination.
fn integer_rank(rows: &[&[i64]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            for c in col + 1..cols {
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

fn dot(row: &[i64], h: &[BigInt]) -> BigInt {
    row.iter().zip(h).filter(|(r, _)| **r != 0).map(|(&r, x)| x * BigInt::from(r)).sum()
}

/// Inverse of a square integer matrix, columns scaled to primitive integer
/// vectors.
fn inverse_columns(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let d = rows.len();
    let mut aug: Vec<Vec<Rational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v: Vec<Rational> = r.iter().map(|&x| Rational::from_i64(x)).collect();
            v.extend((0..d).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            v
        })
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !aug[r][col].is_zero()).expect("invertible basis");
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..d {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in 0..2 * d {
                    let t = &f * &aug[col][c];
                    aug[r][c] -= t;
                }
            }
        }
    }
    (0..d)
        .map(|j| {
            let col: Vec<Rational> = (0..d).map(|i| aug[i][d + j].clone()).collect();
            let lcm = col.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            primitive(col.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect())
        })
        .collect()
}

struct Ray {
    h: Vec<BigInt>,
    tight: u64,
}

/// Complete irredundant facet list of `conv{u_ε}` by incremental double
/// description on the cone of valid inequalities `(b, a)`, processing
/// distinct vertices in lexicographic order. Sorted lexicographically.
pub fn enumerate_facets(spec: &CorrelationSpec) -> Result<Vec<Facet>> {
    let d = spec.dimension();
    if d > FACET_DIMENSION_LIMIT {
        return Err(Error::LimitExceeded(format!("dimension {d} (limit {FACET_DIMENSION_LIMIT})")));
    }
    if spec.n >= usize::BITS as usize || 1usize << spec.n > FACET_VERTEX_LIMIT {
        return Err(Error::LimitExceeded(format!("2^{} vertices (limit {FACET_VERTEX_LIMIT})", spec.n)));
    }
    let mut verts: Vec<Vec<i64>> = (0..1usize << spec.n)
        .map(|eps| spec.vertex_bits(eps).into_iter().map(i64::from).collect())
        .collect();
    verts.sort();
    verts.dedup();
    // constraint row for vertex v: h·(1, −v) ≥ 0
    let rows: Vec<Vec<i64>> = verts
        .iter()
        .map(|v| std::iter::once(1).chain(v.iter().map(|x| -x)).collect())
        .collect();
    let dim = d + 1;

    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    for i in 0..rows.len() {
        let mut trial: Vec<&[i64]> = basis.iter().map(|&b| rows[b].as_slice()).collect();
        trial.push(&rows[i]);
        if integer_rank(&trial) == trial.len() {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        }
    }
    if basis.len() < dim {
        return Err(Error::NotFullDimensional { rank: basis.len().saturating_sub(1), dim: d });
    }

    let basis_rows: Vec<Vec<i64>> = basis.iter().map(|&b| rows[b].clone()).collect();
    let all_basis: u64 = basis.iter().fold(0, |acc, &b| acc | 1 << b);
    let mut rays: Vec<Ray> = inverse_columns(&basis_rows)
        .into_iter()
        .enumerate()
        .map(|(j, h)| Ray { h, tight: all_basis & !(1 << basis[j]) })
        .collect();
    let mut processed = all_basis;

    for (ri, row) in rows.iter().enumerate() {
        if processed >> ri & 1 == 1 {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.h)).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (ray, v) in rays.iter().zip(&values) {
            if v.is_zero() {
                next.push(Ray { h: ray.h.clone(), tight: ray.tight | 1 << ri });
            } else if v.is_positive() {
                next.push(Ray { h: ray.h.clone(), tight: ray.tight });
            }
        }
        for (pi, pos) in rays.iter().enumerate() {
            if !values[pi].is_positive() {
                continue;
            }
            for (ni, neg) in rays.iter().enumerate() {
                if !values[ni].is_negative() {
                    continue;
                }
                let common = pos.tight & neg.tight;
                if (common.count_ones() as usize) < dim - 2 {
                    continue;
                }
                let tight_rows: Vec<&[i64]> = (0..rows.len())
                    .filter(|&k| common >> k & 1 == 1)
                    .map(|k| rows[k].as_slice())
                    .collect();
                if integer_rank(&tight_rows) != dim - 2 {
                    continue;
                }
                let h: Vec<BigInt> = pos
                    .h
                    .iter()
                    .zip(&neg.h)
                    .map(|(a, b)| &values[pi] * b - &values[ni] * a)
                    .collect();
                next.push(Ray { h: primitive(h), tight: common | 1 << ri });
            }
        }
        rays = next;
        processed |= 1 << ri;
    }

    let mut facets: Vec<Facet> = rays
        .into_iter()
        .map(|r| Facet { bound: r.h[0].clone(), coefficients: r.h[1..].to_vec() })
        .collect();
    facets.sort();
    facets.dedup();
    Ok(facets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn spec2() -> CorrelationSpec {
        CorrelationSpec::new(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap()
    }

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn vertex_examples() {
        let one = CorrelationSpec::new(1, vec![vec![0]]).unwrap();
        assert_eq!(vertices::<Rational>(&one).unwrap(), vec![vec![rat(0, 1)], vec![rat(1, 1)]]);
        let v: Vec<Vec<i64>> = vertices::<f64>(&spec2())
            .unwrap()
            .iter()
            .map(|u| u.iter().map(|&x| x as i64).collect())
            .collect();
        assert_eq!(v, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 1]]);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(CorrelationSpec::new(2, vec![vec![0]]), Err(Error::InvalidSpec(_))));
        assert!(matches!(CorrelationSpec::new(1, vec![vec![0], vec![0]]), Err(Error::InvalidSpec(_))));
        assert_eq!(monomial_label(&[0, 2]), "p13");
        assert_eq!(monomial_label(&[0, 10]), "p1,11");
    }

    #[test]
    fn membership_examples() {
        let spec = spec2();
        let vert = vec![rat(1, 1), rat(0, 1), rat(0, 1)];
        match membership(&vert, &spec).unwrap() {
            FeasibilityCertificate::Feasible { weights } => {
                assert_eq!(weights, vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)])
            }
            other => panic!("{other:?}"),
        }
        let mid = vec![rat(1, 2), rat(1, 2), rat(1, 2)];
        match membership(&mid, &spec).unwrap() {
            FeasibilityCertificate::Feasible { weights } => {
                assert_eq!(weights, vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(1, 2)])
            }
            other => panic!("{other:?}"),
        }
        let bad = vec![rat(1, 4), rat(1, 4), rat(1, 2)];
        let cert = membership(&bad, &spec).unwrap();
        assert!(!cert.is_feasible());
        assert!(cert.verify(&spec, &bad));
    }

    #[test]
    fn bounds_examples() {
        let spec = CorrelationSpec::new(3, vec![vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]]).unwrap();
        let h = rat(1, 2);
        let q = rat(1, 4);
        let p = vec![h.clone(), h.clone(), h.clone(), q.clone(), q.clone()];
        assert_eq!(bounds_missing_term(&p, &spec, &[0, 1]).unwrap(), (rat(0, 1), rat(1, 2)));
        let p = vec![h.clone(), h.clone(), h.clone(), h.clone(), h.clone()];
        assert_eq!(bounds_missing_term(&p, &spec, &[1, 0]).unwrap(), (h.clone(), h.clone()));
        let p = vec![q.clone(), q.clone(), q.clone(), h.clone(), h];
        assert_eq!(bounds_missing_term(&p, &spec, &[0, 1]), Err(Error::InfeasibleBase));
        assert!(matches!(bounds_missing_term(&p, &spec, &[0, 2]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn square_facets() {
        let facets = enumerate_facets(&spec2()).unwrap();
        let expected = vec![
            Facet { coefficients: bi(&[-1, 0, 1]), bound: BigInt::zero() },
            Facet { coefficients: bi(&[0, -1, 1]), bound: BigInt::zero() },
            Facet { coefficients: bi(&[0, 0, -1]), bound: BigInt::zero() },
            Facet { coefficients: bi(&[1, 1, -1]), bound: BigInt::one() },
        ];
        assert_eq!(facets, expected);
        assert_eq!(facets[3].render(&spec2().labels()), "p1 + p2 - p12 <= 1");
    }

    #[test]
    fn interval_facets() {
        let spec = CorrelationSpec::new(1, vec![vec![0]]).unwrap();
        let facets = enumerate_facets(&spec).unwrap();
        assert_eq!(facets.iter().map(|f| f.render(&spec.labels())).collect::<Vec<_>>(), vec!["-p1 <= 0", "p1 <= 1"]);
    }

    #[test]
    fn not_full_dimensional_rejected() {
        assert_eq!(integer_rank(&[&[1, 0], &[2, 0]]), 1);
        assert_eq!(integer_rank(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]), 3);
    }

    #[test]
    fn limits() {
        let big = CorrelationSpec::new(7, (0..7).map(|g| vec![g]).collect()).unwrap();
        assert!(matches!(enumerate_facets(&big), Err(Error::LimitExceeded(_))));
    }
}
