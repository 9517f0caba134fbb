//! Horn–Tarski partial measures: the sequence preorder, the partial-measure
//! test, interior and exterior measures, and extension to full measures.
//!
//! `⟨A_0..A_{m-1}⟩ ≤ ⟨B_0..B_{n-1}⟩` holds exactly when every atom lies in
//! at least as many `B`s as `A`s: the level-`k` union of `k+1`-fold
//! intersections contains an atom iff the atom's multiplicity exceeds `k`.
//! Searches below compare multiplicity vectors; [`seq_leq`] keeps the
//! literal union-of-intersections form.

use std::collections::HashMap;

use crate::boolean_core::{Element, Measure};
use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::scalar::Scalar;

/// Default sequence-length bound for the partial-measure search.
pub const DEFAULT_MAX_LEN: usize = 4;

/// Largest arity accepted by the LP-based operations.
pub const LP_ARITY_LIMIT: usize = 12;

fn common_arity(items: &[Element]) -> Option<usize> {
    items.first().map(|e| e.arity())
}

/// `k+1`-fold union of intersections over strictly increasing index tuples.
fn level_union(items: &[Element], k: usize, arity: usize) -> Result<Element> {
    let mut acc = Element::zero(arity)?;
    if k >= items.len() {
        return Ok(acc);
    }
    let mut idx: Vec<usize> = (0..=k).collect();
    loop {
        let mut meet = items[idx[0]].clone();
        for &i in &idx[1..] {
            meet = meet.meet(&items[i])?;
        }
        acc = acc.join(&meet)?;
        // next combination
        let mut pos = k as isize;
        while pos >= 0 && idx[pos as usize] == items.len() - (k + 1) + pos as usize {
            pos -= 1;
        }
        if pos < 0 {
            return Ok(acc);
        }
        idx[pos as usize] += 1;
        for j in pos as usize + 1..=k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The sequence preorder, evaluated level by level from its definition.
pub fn seq_leq(a: &[Element], b: &[Element]) -> Result<bool> {
    let arity = match (common_arity(a), common_arity(b)) {
        (Some(x), _) => x,
        (None, _) => return Ok(true),
    };
    for e in a.iter().chain(b) {
        if e.arity() != arity {
            return Err(Error::ArityMismatch { left: arity, right: e.arity() });
        }
    }
    for k in 0..a.len() {
        let lhs = level_union(a, k, arity)?;
        let rhs = level_union(b, k, arity)?;
        if !lhs.is_subset(&rhs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Atom multiplicities of a sequence.
pub fn multiplicities(items: &[Element], arity: usize) -> Vec<u32> {
    let mut c = vec![0u32; 1 << arity];
    for e in items {
        for a in e.atoms() {
            c[a] += 1;
        }
    }
    c
}

/// Multiplicity form of [`seq_leq`].
pub fn seq_leq_counting(a: &[Element], b: &[Element]) -> Result<bool> {
    let Some(arity) = common_arity(a).or_else(|| common_arity(b)) else { return Ok(true) };
    for e in a.iter().chain(b) {
        if e.arity() != arity {
            return Err(Error::ArityMismatch { left: arity, right: e.arity() });
        }
    }
    let ca = multiplicities(a, arity);
    let cb = multiplicities(b, arity);
    Ok(ca.iter().zip(&cb).all(|(x, y)| x <= y))
}

/// A nonnegative function on a finite set of elements containing `1`, with
/// `f(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFunction<S: Scalar> {
    arity: usize,
    entries: Vec<(Element, S)>,
}

impl<S: Scalar> PartialFunction<S> {
    pub fn new(arity: usize, entries: Vec<(Element, S)>) -> Result<Self> {
        let mut seen: HashMap<Element, S> = HashMap::new();
        let mut out = Vec::with_capacity(entries.len());
        for (e, v) in entries {
            if e.arity() != arity {
                return Err(Error::ArityMismatch { left: arity, right: e.arity() });
            }
            if v.is_negative() {
                return Err(Error::InvalidPartialFunction(format!("negative value {v} on {e:?}")));
            }
            match seen.get(&e) {
                Some(prev) if !prev.approx_eq(&v) => {
                    return Err(Error::InvalidPartialFunction(format!("two values for {e:?}")));
                }
                Some(_) => continue,
                None => {
                    seen.insert(e.clone(), v.clone());
                    out.push((e, v));
                }
            }
        }
        let one = Element::one(arity)?;
        match seen.get(&one) {
            Some(v) if v.approx_eq(&S::one()) => {}
            Some(v) => return Err(Error::InvalidPartialFunction(format!("f(1) = {v}"))),
            None => return Err(Error::InvalidPartialFunction("1 is not in the domain".into())),
        }
        Ok(PartialFunction { arity, entries: out })
    }

    /// Restriction of a measure to `domain` (1 is added if missing).
    pub fn from_measure(m: &Measure<S>, domain: &[Element]) -> Result<Self> {
        let mut entries: Vec<(Element, S)> = domain.iter().map(|e| Ok((e.clone(), m.evaluate(e)?))).collect::<Result<_>>()?;
        entries.push((Element::one(m.arity())?, S::one()));
        Self::new(m.arity(), entries)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[(Element, S)] {
        &self.entries
    }

    pub fn value(&self, e: &Element) -> Option<&S> {
        self.entries.iter().find(|(x, _)| x == e).map(|(_, v)| v)
    }

    pub fn with(&self, x: Element, v: S) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.push((x, v));
        Self::new(self.arity, entries)
    }

    /// Whether the domain is closed under meet and complement.
    pub fn is_subalgebra(&self) -> bool {
        let set: std::collections::HashSet<&Element> = self.entries.iter().map(|(e, _)| e).collect();
        let Ok(zero) = Element::zero(self.arity) else { return false };
        if !set.contains(&zero) {
            return false;
        }
        self.entries.iter().all(|(a, _)| {
            set.contains(&a.complement())
                && self.entries.iter().all(|(b, _)| a.meet(b).map(|m| set.contains(&m)).unwrap_or(false))
        })
    }
}

/// Witness of a violated sequence inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceWitness<S> {
    pub left: Vec<Element>,
    pub right: Vec<Element>,
    pub left_sum: S,
    pub right_sum: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<S> {
    /// No violation among sequence pairs of length at most `max_len`.
    PassBounded { max_len: usize },
    Fail(SequenceWitness<S>),
}

impl<S> Verdict<S> {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::PassBounded { .. })
    }
}

/// Multisets of indices `< n` with sizes in `lo..=hi`, as nondecreasing
/// index lists.
fn multisets(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(n: usize, start: usize, hi: usize, cur: &mut Vec<usize>, lo: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() >= lo {
            out.push(cur.clone());
        }
        if cur.len() == hi {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, i, hi, cur, lo, out);
            cur.pop();
        }
    }
    rec(n, 0, hi, &mut Vec::new(), lo, &mut out);
    out
}

/// Packed multiplicity vector: one byte lane per atom when there are at
/// most 16 atoms, a plain vector otherwise.
#[derive(Clone)]
enum Counts {
    Packed(u128),
    Wide(Vec<u32>),
}

const GUARD: u128 = 0x8080_8080_8080_8080_8080_8080_8080_8080;

impl Counts {
    fn build(atoms_of: &[Vec<usize>], picks: &[usize], extra: Option<(&[usize], u32)>, atom_count: usize) -> Self {
        let mut c = vec![0u32; atom_count];
        for &i in picks {
            for &a in &atoms_of[i] {
                c[a] += 1;
            }
        }
        if let Some((atoms, m)) = extra {
            for &a in atoms {
                c[a] += m;
            }
        }
        if atom_count <= 16 && c.iter().all(|&v| v < 128) {
            Counts::Packed(c.iter().enumerate().fold(0u128, |acc, (i, &v)| acc | (v as u128) << (8 * i)))
        } else {
            Counts::Wide(c)
        }
    }

    /// Lanewise `self ≤ other`.
    fn le(&self, other: &Counts) -> bool {
        match (self, other) {
            (Counts::Packed(a), Counts::Packed(b)) => ((b | GUARD).wrapping_sub(*a)) & GUARD == GUARD,
            _ => {
                let (a, b) = (self.to_vec(), other.to_vec());
                a.iter().zip(&b).all(|(x, y)| x <= y)
            }
        }
    }

    fn to_vec(&self) -> Vec<u32> {
        match self {
            Counts::Packed(p) => (0..16).map(|i| ((p >> (8 * i)) & 0xff) as u32).collect(),
            Counts::Wide(v) => {
                let mut v = v.clone();
                v.resize(v.len().max(16), 0);
                v
            }
        }
    }
}

struct Candidate<S> {
    picks: Vec<usize>,
    counts: Counts,
    sum: S,
    approx: f64,
}

fn candidates<S: Scalar>(f: &PartialFunction<S>, atoms_of: &[Vec<usize>], lo: usize, hi: usize) -> Vec<Candidate<S>> {
    let atom_count = 1usize << f.arity;
    multisets(f.entries.len(), lo, hi)
        .into_iter()
        .map(|picks| {
            let sum: S = picks.iter().map(|&i| f.entries[i].1.clone()).sum();
            let approx = sum.to_f64();
            let counts = Counts::build(atoms_of, &picks, None, atom_count);
            Candidate { picks, counts, sum, approx }
        })
        .collect()
}

/// Condition (ii) over all multiset pairs with lengths at most `max_len`
/// (left side nonempty, right side possibly empty).
pub fn is_partial_measure<S: Scalar>(f: &PartialFunction<S>, max_len: usize) -> Verdict<S> {
    let max_len = max_len.max(1);
    let atoms_of: Vec<Vec<usize>> = f.entries.iter().map(|(e, _)| e.atoms().collect()).collect();
    let mut lefts = candidates(f, &atoms_of, 1, max_len);
    // shortest witnesses first
    lefts.sort_by_key(|c| c.picks.len());
    let mut rights = candidates(f, &atoms_of, 0, max_len);
    rights.sort_by(|a, b| a.approx.partial_cmp(&b.approx).unwrap_or(std::cmp::Ordering::Equal));
    let slack = 1e-9_f64.max(S::tolerance() * 4.0);
    for l in &lefts {
        // only right sides with a smaller sum can violate
        let end = rights.partition_point(|r| r.approx < l.approx + slack);
        for r in &rights[..end] {
            if !l.counts.le(&r.counts) {
                continue;
            }
            if (l.sum.clone() - r.sum.clone()).is_positive() {
                let pick = |p: &[usize]| p.iter().map(|&i| f.entries[i].0.clone()).collect::<Vec<_>>();
                return Verdict::Fail(SequenceWitness {
                    left: pick(&l.picks),
                    right: pick(&r.picks),
                    left_sum: l.sum.clone(),
                    right_sum: r.sum.clone(),
                });
            }
        }
    }
    Verdict::PassBounded { max_len }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorExterior<S> {
    pub interior: S,
    pub exterior: S,
    /// True when computed by the subalgebra formulas or the LP; false for
    /// the bounded sequence search, where `interior` can only grow and
    /// `exterior` only shrink as the bound increases.
    pub exact: bool,
}

/// `f_i(x)` and `f_e(x)`: the subalgebra sup/inf formulas when the domain
/// is a subalgebra, otherwise a bounded search over `ξ`-forms with total
/// sequence length at most `max_len`.
pub fn interior_exterior<S: Scalar>(f: &PartialFunction<S>, x: &Element, max_len: usize) -> Result<InteriorExterior<S>> {
    if x.arity() != f.arity {
        return Err(Error::ArityMismatch { left: f.arity, right: x.arity() });
    }
    if let Some(v) = f.value(x) {
        return Ok(InteriorExterior { interior: v.clone(), exterior: v.clone(), exact: true });
    }
    if f.is_subalgebra() {
        let mut lo = S::zero();
        let mut hi = S::one();
        for (y, v) in &f.entries {
            if y.is_subset(x)? && *v > lo {
                lo = v.clone();
            }
            if x.is_subset(y)? && *v < hi {
                hi = v.clone();
            }
        }
        return Ok(InteriorExterior { interior: lo, exterior: hi, exact: true });
    }
    Ok(bounded_search(f, x, max_len.max(1)))
}

fn bounded_search<S: Scalar>(f: &PartialFunction<S>, x: &Element, max_len: usize) -> InteriorExterior<S> {
    let atom_count = 1usize << f.arity;
    let atoms_of: Vec<Vec<usize>> = f.entries.iter().map(|(e, _)| e.atoms().collect()).collect();
    let x_atoms: Vec<usize> = x.atoms().collect();
    let seqs = multisets(f.entries.len(), 0, max_len.saturating_sub(1));
    let info: Vec<(Counts, S, usize)> = seqs
        .iter()
        .map(|p| {
            let sum: S = p.iter().map(|&i| f.entries[i].1.clone()).sum();
            (Counts::build(&atoms_of, p, None, atom_count), sum, p.len())
        })
        .collect();
    // ⟨x⟩ ≤ ⟨1⟩ gives ξ = 1 and the empty pair gives ξ = 0
    let mut exterior = S::one();
    let mut interior = S::zero();
    for (bi, b) in seqs.iter().enumerate() {
        for m in 1..=max_len.saturating_sub(b.len()) {
            let bx = Counts::build(&atoms_of, b, Some((&x_atoms, m as u32)), atom_count);
            let mf = S::from_i64(m as i64);
            for (ca, sa, la) in &info {
                if la + b.len() + m > max_len {
                    continue;
                }
                let xi = (sa.clone() - info[bi].1.clone()) / mf.clone();
                // exterior: ⟨B, x^m⟩ ≤ ⟨A⟩
                if xi < exterior && bx.le(ca) {
                    exterior = xi.clone();
                }
                // interior: ⟨A⟩ ≤ ⟨B, x^m⟩
                if xi > interior && ca.le(&bx) {
                    interior = xi;
                }
            }
        }
    }
    InteriorExterior { interior, exterior, exact: false }
}

fn atom_lp<S: Scalar>(f: &PartialFunction<S>, fixed: &[(usize, S)]) -> Result<(Vec<Vec<S>>, Vec<S>)> {
    if f.arity > LP_ARITY_LIMIT {
        return Err(Error::LimitExceeded(format!("arity {} (limit {LP_ARITY_LIMIT})", f.arity)));
    }
    let cols = 1usize << f.arity;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (e, v) in &f.entries {
        a.push((0..cols).map(|c| if e.contains_atom(c) { S::one() } else { S::zero() }).collect());
        b.push(v.clone());
    }
    for (atom, v) in fixed {
        a.push((0..cols).map(|c| if c == *atom { S::one() } else { S::zero() }).collect());
        b.push(v.clone());
    }
    Ok((a, b))
}

/// Exact `f_i(x)`, `f_e(x)`: min and max of `μ(x)` over measures extending
/// `f`. Fails with [`Error::NotExtensible`] when there are none.
pub fn interior_exterior_exact<S: Scalar>(f: &PartialFunction<S>, x: &Element) -> Result<InteriorExterior<S>> {
    let (a, b) = atom_lp(f, &[])?;
    let obj: Vec<S> = (0..1usize << f.arity).map(|c| if x.contains_atom(c) { S::one() } else { S::zero() }).collect();
    let lo = match lp::minimize(&a, &b, &obj)? {
        LpOutcome::Optimal { value, .. } => value,
        _ => return Err(Error::NotExtensible),
    };
    let hi = match lp::maximize(&a, &b, &obj)? {
        LpOutcome::Optimal { value, .. } => value,
        _ => return Err(Error::NotExtensible),
    };
    Ok(InteriorExterior { interior: lo, exterior: hi, exact: true })
}

/// `g = f ∪ {x ↦ v}` for `v` in `[f_i(x), f_e(x)]`, re-verified.
pub fn extend_one<S: Scalar>(f: &PartialFunction<S>, x: &Element, v: S, max_len: usize) -> Result<PartialFunction<S>> {
    if let Verdict::Fail(w) = is_partial_measure(f, max_len) {
        return Err(Error::NotPartialMeasure(format!("{} > {}", w.left_sum, w.right_sum)));
    }
    let band = interior_exterior(f, x, max_len)?;
    if !band.interior.approx_le(&v) || !v.approx_le(&band.exterior) {
        return Err(Error::ValueOutOfBand {
            value: v.to_string(),
            lower: band.interior.to_string(),
            upper: band.exterior.to_string(),
        });
    }
    let g = f.with(x.clone(), v)?;
    if let Verdict::Fail(w) = is_partial_measure(&g, max_len) {
        return Err(Error::NotPartialMeasure(format!("after extension {} > {}", w.left_sum, w.right_sum)));
    }
    Ok(g)
}

/// A full measure agreeing with `f`, fixing atoms in index order at the
/// midpoint of their admissible band. Subalgebra domains use the sup/inf
/// formulas on the current block partition; other domains use the exact LP.
pub fn extend_full<S: Scalar>(f: &PartialFunction<S>) -> Result<Measure<S>> {
    if f.is_subalgebra() {
        extend_subalgebra(f)
    } else {
        extend_by_lp(f)
    }
}

fn extend_subalgebra<S: Scalar>(f: &PartialFunction<S>) -> Result<Measure<S>> {
    // atoms of the subalgebra: minimal nonzero domain elements
    let mut blocks: Vec<(Vec<usize>, S)> = Vec::new();
    for (e, v) in &f.entries {
        if e.is_zero() {
            if !v.is_negligible() {
                return Err(Error::NotExtensible);
            }
            continue;
        }
        let minimal = f
            .entries
            .iter()
            .all(|(y, _)| y.is_zero() || y == e || !y.is_subset(e).unwrap_or(false));
        if minimal {
            blocks.push((e.atoms().collect(), v.clone()));
        }
    }
    // additivity on the subalgebra
    for (e, v) in &f.entries {
        let total: S = blocks
            .iter()
            .filter(|(atoms, _)| atoms.iter().all(|&a| e.contains_atom(a)))
            .map(|(_, w)| w.clone())
            .sum();
        if !total.approx_eq(v) {
            return Err(Error::NotExtensible);
        }
    }
    let mut weights = vec![S::zero(); 1 << f.arity];
    for (atoms, w) in blocks {
        // f_i(a) = 0 and f_e(a) = f(block) until the block is a single atom
        let mut rest = w;
        for (i, &a) in atoms.iter().enumerate() {
            if i + 1 == atoms.len() {
                weights[a] = rest.clone();
            } else {
                let v = rest.clone() * S::half();
                weights[a] = v.clone();
                rest = rest - v;
            }
        }
    }
    Measure::new(f.arity, weights)
}

fn extend_by_lp<S: Scalar>(f: &PartialFunction<S>) -> Result<Measure<S>> {
    let atom_count = 1usize << f.arity;
    let mut fixed: Vec<(usize, S)> = Vec::new();
    for atom in 0..atom_count {
        let (a, b) = atom_lp(f, &fixed)?;
        let mut obj = vec![S::zero(); atom_count];
        obj[atom] = S::one();
        let lo = match lp::minimize(&a, &b, &obj)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => return Err(Error::NotExtensible),
        };
        let hi = match lp::maximize(&a, &b, &obj)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => return Err(Error::NotExtensible),
        };
        let mid = (lo + hi) * S::half();
        fixed.push((atom, if !S::EXACT && mid.is_negligible() { S::zero() } else { mid }));
    }
    Measure::new(f.arity, fixed.into_iter().map(|(_, v)| v).collect())
}
