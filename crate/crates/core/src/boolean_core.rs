//! Finite free Boolean algebras.
//!
//! The free algebra on `k` generators has `2^k` atoms `a_ε`, one per
//! `ε ∈ {0,1}^k`. Atom index `i` encodes `ε` with `ε_1` as the least
//! significant bit, so generator `j` is "on" in atom `i` iff bit `j` of `i`
//! is set. An [`Element`] is the set of atoms below it, stored as a bitmask
//! over atom indices; a [`Measure`] is a weight per atom.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest arity accepted by default (2^20 atoms).
pub const MAX_ARITY: usize = 20;

/// Index of a generator in the global generator list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorId(pub usize);

fn check_arity(arity: usize) -> Result<()> {
    if arity > MAX_ARITY {
        return Err(Error::ArityTooLarge { arity, limit: MAX_ARITY });
    }
    Ok(())
}

fn word_count(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

fn tail_mask(arity: usize) -> u64 {
    let atoms = 1usize << arity;
    if atoms.is_multiple_of(64) {
        u64::MAX
    } else {
        (1u64 << (atoms % 64)) - 1
    }
}

/// An element of the free Boolean algebra on `arity` generators.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    arity: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element[{}]{{", self.arity)?;
        for (n, atom) in self.atoms().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            for j in 0..self.arity {
                write!(f, "{}", (atom >> j) & 1)?;
            }
        }
        write!(f, "}}")
    }
}

impl Element {
    pub fn zero(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Element { arity, bits: vec![0; word_count(arity)] })
    }

    pub fn one(arity: usize) -> Result<Self> {
        let mut e = Self::zero(arity)?;
        for w in e.bits.iter_mut() {
            *w = u64::MAX;
        }
        e.clear_tail();
        Ok(e)
    }

    /// The single atom `a_ε`.
    pub fn atom(arity: usize, index: usize) -> Result<Self> {
        let mut e = Self::zero(arity)?;
        if index >= e.atom_count() {
            return Err(Error::IndexOutOfRange { index, arity });
        }
        e.insert(index);
        Ok(e)
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(arity: usize, atoms: I) -> Result<Self> {
        let mut e = Self::zero(arity)?;
        for a in atoms {
            if a >= e.atom_count() {
                return Err(Error::IndexOutOfRange { index: a, arity });
            }
            e.insert(a);
        }
        Ok(e)
    }

    /// Element from the low `2^arity` bits of `mask` (arity ≤ 6).
    pub fn from_mask(arity: usize, mask: u64) -> Result<Self> {
        if arity > 6 {
            return Err(Error::ArityTooLarge { arity, limit: 6 });
        }
        let mut e = Self::zero(arity)?;
        e.bits[0] = mask;
        e.clear_tail();
        Ok(e)
    }

    /// Low word of the bitmask; the whole element when arity ≤ 6.
    pub fn mask(&self) -> u64 {
        self.bits[0]
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn atom_count(&self) -> usize {
        1 << self.arity
    }

    fn clear_tail(&mut self) {
        let last = self.bits.len() - 1;
        self.bits[last] &= tail_mask(self.arity);
    }

    fn insert(&mut self, atom: usize) {
        self.bits[atom / 64] |= 1 << (atom % 64);
    }

    pub fn contains_atom(&self, atom: usize) -> bool {
        atom < self.atom_count() && self.bits[atom / 64] >> (atom % 64) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn is_one(&self) -> bool {
        let last = self.bits.len() - 1;
        self.bits[..last].iter().all(|w| *w == u64::MAX) && self.bits[last] == tail_mask(self.arity)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Atom indices below this element, ascending.
    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    fn check_same(&self, other: &Element) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch { left: self.arity, right: other.arity });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, op: impl Fn(u64, u64) -> u64) -> Result<Element> {
        self.check_same(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| op(*a, *b)).collect();
        Ok(Element { arity: self.arity, bits })
    }

    pub fn meet(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn join(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn complement(&self) -> Element {
        let mut e = Element { arity: self.arity, bits: self.bits.iter().map(|w| !w).collect() };
        e.clear_tail();
        e
    }

    pub fn symmetric_difference(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn is_subset(&self, other: &Element) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    /// Generators the element actually depends on (local indices).
    pub fn support(&self) -> Vec<usize> {
        (0..self.arity)
            .filter(|&j| self.atoms().any(|a| !self.contains_atom(a ^ (1 << j))))
            .collect()
    }
}

/// Free meet of two elements.
pub fn meet(a: &Element, b: &Element) -> Result<Element> {
    a.meet(b)
}

pub fn join(a: &Element, b: &Element) -> Result<Element> {
    a.join(b)
}

pub fn complement(a: &Element) -> Element {
    a.complement()
}

/// The element of generator `index`: all atoms with `ε_index = 1`.
pub fn generator_element(index: usize, arity: usize) -> Result<Element> {
    if index >= arity {
        return Err(Error::IndexOutOfRange { index, arity });
    }
    Element::from_atoms(arity, (0..1usize << arity).filter(|a| a >> index & 1 == 1))
}

/// Meet of the generators in `subset` (bitmask of local indices); `1` for
/// the empty subset.
pub fn intersection_element(subset: usize, arity: usize) -> Result<Element> {
    if arity < usize::BITS as usize && subset >> arity != 0 {
        return Err(Error::IndexOutOfRange { index: subset, arity });
    }
    Element::from_atoms(arity, (0..1usize << arity).filter(|a| a & subset == subset))
}

/// The unique decomposition into atoms, as singleton elements, ascending.
pub fn atom_decomposition(a: &Element) -> Vec<Element> {
    a.atoms()
        .map(|i| Element::atom(a.arity(), i).expect("atom index within range"))
        .collect()
}

/// Image of a sub-algebra element under the embedding that sends local
/// generator `j` to generator `kept[j]` of the arity-`arity` algebra.
pub fn embed(e: &Element, kept: &[usize], arity: usize) -> Result<Element> {
    if e.arity() != kept.len() {
        return Err(Error::ArityMismatch { left: e.arity(), right: kept.len() });
    }
    for &k in kept {
        if k >= arity {
            return Err(Error::IndexOutOfRange { index: k, arity });
        }
    }
    Element::from_atoms(arity, (0..1usize << arity).filter(|&a| e.contains_atom(project_atom(a, kept))))
}

/// Local atom index of `atom` seen through the generators `kept`.
pub fn project_atom(atom: usize, kept: &[usize]) -> usize {
    kept.iter()
        .enumerate()
        .fold(0, |acc, (j, &g)| acc | ((atom >> g) & 1) << j)
}

/// A normalized measure: one nonnegative weight per atom, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<S: Scalar> {
    arity: usize,
    weights: Vec<S>,
}

impl<S: Scalar> Measure<S> {
    /// Validates nonnegativity and normalization.
    pub fn new(arity: usize, weights: Vec<S>) -> Result<Self> {
        check_arity(arity)?;
        if weights.len() != 1 << arity {
            return Err(Error::ArityMismatch { left: arity, right: weights.len() });
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
            return Err(Error::NotAMeasure(format!("atom {i} has negative weight {w}")));
        }
        let total: S = weights.iter().cloned().sum();
        if !total.approx_eq(&S::one()) {
            return Err(Error::NotAMeasure(format!("weights sum to {total}")));
        }
        Ok(Measure { arity, weights })
    }

    pub fn uniform(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        let n = 1i64 << arity;
        Ok(Measure { arity, weights: vec![S::ratio(1, n); 1 << arity] })
    }

    /// Point (multiplicative) measure concentrated on one atom.
    pub fn point(arity: usize, atom: usize) -> Result<Self> {
        check_arity(arity)?;
        if atom >= 1 << arity {
            return Err(Error::IndexOutOfRange { index: atom, arity });
        }
        let mut weights = vec![S::zero(); 1 << arity];
        weights[atom] = S::one();
        Ok(Measure { arity, weights })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &S {
        &self.weights[atom]
    }

    pub fn into_weights(self) -> Vec<S> {
        self.weights
    }

    pub fn evaluate(&self, a: &Element) -> Result<S> {
        evaluate(self, a)
    }

    /// `μ(⋂_{j ∈ subset} A_j)` for a bitmask of local generators.
    pub fn intersection_value(&self, subset: usize) -> S {
        self.weights
            .iter()
            .enumerate()
            .filter(|(a, _)| a & subset == subset)
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// Values on every generator intersection, indexed by subset bitmask
    /// (index 0 holds `μ(1) = 1`). Inverse of [`measure_from_intersections`].
    pub fn intersection_values(&self) -> Vec<S> {
        let mut g = self.weights.clone();
        for j in 0..self.arity {
            let bit = 1 << j;
            for mask in 0..g.len() {
                if mask & bit == 0 {
                    let hi = g[mask | bit].clone();
                    g[mask] = g[mask].clone() + hi;
                }
            }
        }
        g
    }

    /// Convex decomposition into multiplicative states (nonzero weights only).
    pub fn convex_decomposition(&self) -> Vec<(S, MultiplicativeState)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_negligible())
            .map(|(a, w)| (w.clone(), MultiplicativeState { arity: self.arity, assignment: a }))
            .collect()
    }

    /// Whether two measures agree atom by atom (within tolerance in float mode).
    pub fn approx_eq(&self, other: &Measure<S>) -> bool {
        self.arity == other.arity
            && self.weights.iter().zip(&other.weights).all(|(a, b)| a.approx_eq(b))
    }
}

pub fn evaluate<S: Scalar>(m: &Measure<S>, a: &Element) -> Result<S> {
    if m.arity != a.arity() {
        return Err(Error::ArityMismatch { left: m.arity, right: a.arity() });
    }
    Ok(a.atoms().map(|i| m.weights[i].clone()).sum())
}

/// Rebuilds a measure from its values on all generator intersections by
/// Möbius inversion over the subset lattice.
///
/// `values` maps a nonempty subset bitmask `S` to `f(⋂_{j∈S} A_j)`; the
/// empty subset is `f(1) = 1` and may be omitted.
pub fn measure_from_intersections<S: Scalar>(
    values: &BTreeMap<usize, S>,
    arity: usize,
) -> Result<Measure<S>> {
    check_arity(arity)?;
    let size = 1usize << arity;
    let mut g = Vec::with_capacity(size);
    for mask in 0..size {
        match values.get(&mask) {
            Some(v) => g.push(v.clone()),
            None if mask == 0 => g.push(S::one()),
            None => {
                return Err(Error::MissingValue((0..arity).filter(|j| mask >> j & 1 == 1).collect()))
            }
        }
    }
    if !g[0].approx_eq(&S::one()) {
        return Err(Error::NotAMeasure(format!("f(1) = {} instead of 1", g[0])));
    }
    for j in 0..arity {
        let bit = 1 << j;
        for mask in 0..size {
            if mask & bit == 0 {
                let hi = g[mask | bit].clone();
                g[mask] = g[mask].clone() - hi;
            }
        }
    }
    if let Some((i, w)) = g.iter().enumerate().find(|(_, w)| w.is_negative()) {
        return Err(Error::NotAMeasure(format!("atom {i} would get weight {w}")));
    }
    Ok(Measure { arity, weights: g })
}

/// Marginal of `m` on the generators `kept` (local indices, in the order the
/// marginal should use).
pub fn restrict<S: Scalar>(m: &Measure<S>, kept: &[usize]) -> Result<Measure<S>> {
    if kept.is_empty() {
        return Err(Error::EmptyKeptSet);
    }
    for (i, &k) in kept.iter().enumerate() {
        if k >= m.arity {
            return Err(Error::IndexOutOfRange { index: k, arity: m.arity });
        }
        if kept[..i].contains(&k) {
            return Err(Error::InvalidGenerators(format!("generator {k} kept twice")));
        }
    }
    let mut weights = vec![S::zero(); 1 << kept.len()];
    for (atom, w) in m.weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let local = project_atom(atom, kept);
        weights[local] = weights[local].clone() + w.clone();
    }
    Ok(Measure { arity: kept.len(), weights })
}

/// A {0,1}-valued measure, identified with the atom it is concentrated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiplicativeState {
    pub arity: usize,
    pub assignment: usize,
}

impl MultiplicativeState {
    pub fn value(&self, e: &Element) -> bool {
        e.contains_atom(self.assignment)
    }

    /// Truth value of local generator `j`.
    pub fn generator_value(&self, j: usize) -> bool {
        self.assignment >> j & 1 == 1
    }

    pub fn to_measure<S: Scalar>(&self) -> Measure<S> {
        Measure::point(self.arity, self.assignment).expect("assignment indexes an atom")
    }
}

/// All `2^k` multiplicative states of the free algebra on `k` generators.
pub fn enumerate_multiplicative_measures(arity: usize) -> Result<Vec<MultiplicativeState>> {
    check_arity(arity)?;
    Ok((0..1usize << arity).map(|assignment| MultiplicativeState { arity, assignment }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn all_elements(arity: usize) -> Vec<Element> {
        (0..1u64 << (1 << arity)).map(|m| Element::from_mask(arity, m).unwrap()).collect()
    }

    #[test]
    fn meet_examples() {
        let x = generator_element(1, 2).unwrap();
        let one = Element::one(2).unwrap();
        assert_eq!(meet(&one, &x).unwrap(), x);
        assert!(meet(&x, &complement(&x)).unwrap().is_zero());
        let a1 = generator_element(0, 2).unwrap();
        let a2 = generator_element(1, 2).unwrap();
        // only ε = (1,1), atom index 0b11
        assert_eq!(meet(&a1, &a2).unwrap(), Element::from_atoms(2, [3]).unwrap());
        let other = generator_element(0, 3).unwrap();
        assert_eq!(meet(&a1, &other), Err(Error::ArityMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn join_and_complement_examples() {
        let x = generator_element(0, 3).unwrap();
        assert!(join(&x, &complement(&x)).unwrap().is_one());
        assert!(complement(&Element::zero(2).unwrap()).is_one());
        let a1 = generator_element(0, 2).unwrap();
        let a2 = generator_element(1, 2).unwrap();
        // (1,0), (0,1), (1,1) → indices 1, 2, 3
        assert_eq!(join(&a1, &a2).unwrap(), Element::from_atoms(2, [1, 2, 3]).unwrap());
    }

    #[test]
    fn generator_element_examples() {
        assert_eq!(generator_element(0, 1).unwrap(), Element::from_atoms(1, [1]).unwrap());
        // (1,0) and (1,1)
        assert_eq!(generator_element(0, 2).unwrap(), Element::from_atoms(2, [1, 3]).unwrap());
        assert_eq!(generator_element(2, 2), Err(Error::IndexOutOfRange { index: 2, arity: 2 }));
        for k in 1..=7 {
            for i in 0..k {
                assert_eq!(generator_element(i, k).unwrap().count(), 1 << (k - 1));
            }
        }
    }

    #[test]
    fn atom_decomposition_examples() {
        assert_eq!(atom_decomposition(&Element::one(2).unwrap()).len(), 4);
        assert!(atom_decomposition(&Element::zero(2).unwrap()).is_empty());
        let j = join(&generator_element(0, 2).unwrap(), &generator_element(1, 2).unwrap()).unwrap();
        let atoms = atom_decomposition(&j);
        assert_eq!(atoms.len(), 3);
        let rebuilt = atoms.iter().fold(Element::zero(2).unwrap(), |acc, a| join(&acc, a).unwrap());
        assert_eq!(rebuilt, j);
    }

    #[test]
    fn atoms_of_one_are_pairwise_disjoint() {
        for k in 0..=8 {
            let atoms = atom_decomposition(&Element::one(k).unwrap());
            assert_eq!(atoms.len(), 1 << k);
            for (i, a) in atoms.iter().enumerate() {
                for b in &atoms[i + 1..] {
                    assert!(meet(a, b).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn large_arity_elements_span_words() {
        let g = generator_element(7, 8).unwrap();
        assert_eq!(g.count(), 128);
        assert!(join(&g, &g.complement()).unwrap().is_one());
        assert_eq!(Element::zero(MAX_ARITY + 1).unwrap_err(), Error::ArityTooLarge { arity: 21, limit: 20 });
    }

    #[test]
    fn boolean_laws_exhaustive_arity_two() {
        let els = all_elements(2);
        for a in &els {
            assert_eq!(complement(&complement(a)), *a);
            for b in &els {
                assert_eq!(meet(a, b).unwrap(), meet(b, a).unwrap());
                assert_eq!(complement(&meet(a, b).unwrap()), join(&complement(a), &complement(b)).unwrap());
                for c in &els {
                    let lhs = meet(a, &join(b, c).unwrap()).unwrap();
                    let rhs = join(&meet(a, b).unwrap(), &meet(a, c).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                    assert_eq!(
                        meet(&meet(a, b).unwrap(), c).unwrap(),
                        meet(a, &meet(b, c).unwrap()).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn boolean_laws_exhaustive_arity_three_pairs() {
        let els = all_elements(3);
        for a in &els {
            assert!(meet(a, &complement(a)).unwrap().is_zero());
            assert!(join(a, &complement(a)).unwrap().is_one());
            for b in els.iter().step_by(3) {
                assert_eq!(complement(&join(a, b).unwrap()), meet(&complement(a), &complement(b)).unwrap());
                assert_eq!(join(a, &meet(a, b).unwrap()).unwrap(), *a);
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let u: Measure<Rational> = Measure::uniform(2).unwrap();
        assert_eq!(u.evaluate(&generator_element(0, 2).unwrap()).unwrap(), rat(1, 2));
        assert_eq!(u.evaluate(&Element::zero(2).unwrap()).unwrap(), rat(0, 1));
        assert_eq!(u.evaluate(&Element::one(2).unwrap()).unwrap(), rat(1, 1));
        let p: Measure<Rational> = Measure::point(2, 3).unwrap();
        let m12 = meet(&generator_element(0, 2).unwrap(), &generator_element(1, 2).unwrap()).unwrap();
        assert_eq!(p.evaluate(&m12).unwrap(), rat(1, 1));
        assert!(u.evaluate(&Element::one(3).unwrap()).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(Measure::new(1, vec![rat(1, 2), rat(1, 2)]).is_ok());
        assert!(matches!(Measure::new(1, vec![rat(3, 2), rat(-1, 2)]), Err(Error::NotAMeasure(_))));
        assert!(matches!(Measure::new(1, vec![rat(1, 2), rat(1, 4)]), Err(Error::NotAMeasure(_))));
        assert!(Measure::new(1, vec![0.5 + 1e-12, 0.5]).is_ok());
    }

    fn ints(entries: &[(usize, Rational)]) -> BTreeMap<usize, Rational> {
        entries.iter().cloned().collect()
    }

    #[test]
    fn measure_from_intersections_examples() {
        let m = measure_from_intersections(&ints(&[(1, rat(1, 1)), (2, rat(1, 1)), (3, rat(1, 1))]), 2).unwrap();
        assert_eq!(m, Measure::point(2, 3).unwrap());
        let m = measure_from_intersections(&ints(&[(1, rat(1, 2)), (2, rat(1, 2)), (3, rat(1, 4))]), 2).unwrap();
        assert_eq!(m, Measure::uniform(2).unwrap());
        let err = measure_from_intersections(&ints(&[(1, rat(3, 10)), (2, rat(3, 10)), (3, rat(4, 10))]), 2);
        assert!(matches!(err, Err(Error::NotAMeasure(_))));
        let err = measure_from_intersections(&ints(&[(1, rat(1, 2)), (2, rat(1, 2))]), 2);
        assert_eq!(err, Err(Error::MissingValue(vec![0, 1])));
    }

    #[test]
    fn restrict_examples() {
        let u3: Measure<Rational> = Measure::uniform(3).unwrap();
        assert_eq!(restrict(&u3, &[0, 1]).unwrap(), Measure::uniform(2).unwrap());
        // ε = (1,0,1) has index 0b101
        let p: Measure<Rational> = Measure::point(3, 0b101).unwrap();
        assert_eq!(restrict(&p, &[2]).unwrap(), Measure::point(1, 1).unwrap());
        let m = Measure::new(2, vec![rat(1, 10), rat(2, 10), rat(3, 10), rat(4, 10)]).unwrap();
        assert_eq!(restrict(&m, &[0, 1]).unwrap(), m);
        assert_eq!(restrict(&m, &[]), Err(Error::EmptyKeptSet));
        // reordering swaps the atom labels
        let swapped = restrict(&m, &[1, 0]).unwrap();
        assert_eq!(swapped.weights(), &[rat(1, 10), rat(3, 10), rat(2, 10), rat(4, 10)]);
    }

    #[test]
    fn multiplicative_measures_are_additive() {
        assert_eq!(enumerate_multiplicative_measures(1).unwrap().len(), 2);
        assert_eq!(enumerate_multiplicative_measures(2).unwrap().len(), 4);
        let states = enumerate_multiplicative_measures(3).unwrap();
        assert_eq!(states.len(), 8);
        let els = all_elements(3);
        for s in &states {
            let m: Measure<Rational> = s.to_measure();
            for a in &els {
                for b in &els {
                    if meet(a, b).unwrap().is_zero() {
                        let lhs = m.evaluate(&join(a, b).unwrap()).unwrap();
                        let rhs = m.evaluate(a).unwrap() + m.evaluate(b).unwrap();
                        assert_eq!(lhs, rhs);
                        assert_eq!(s.value(&join(a, b).unwrap()), s.value(a) || s.value(b));
                    }
                }
            }
        }
    }

    #[test]
    fn embed_matches_support() {
        let local = generator_element(0, 1).unwrap();
        let e = embed(&local, &[2], 3).unwrap();
        assert_eq!(e, generator_element(2, 3).unwrap());
        assert_eq!(e.support(), vec![2]);
        assert!(Element::one(3).unwrap().support().is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rational_measure(arity: usize) -> impl Strategy<Value = Measure<Rational>> {
            prop::collection::vec(0u32..20, 1 << arity).prop_filter_map("all zero", move |raw| {
                let total: u32 = raw.iter().sum();
                if total == 0 {
                    return None;
                }
                Some(Measure::new(arity, raw.iter().map(|&w| rat(w as i64, total as i64)).collect()).unwrap())
            })
        }

        proptest! {
            #[test]
            fn boolean_laws_random_arity_six(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
                let (a, b, c) = (
                    Element::from_mask(6, a).unwrap(),
                    Element::from_mask(6, b).unwrap(),
                    Element::from_mask(6, c).unwrap(),
                );
                prop_assert_eq!(
                    join(&a, &meet(&b, &c).unwrap()).unwrap(),
                    meet(&join(&a, &b).unwrap(), &join(&a, &c).unwrap()).unwrap()
                );
                prop_assert_eq!(complement(&meet(&a, &b).unwrap()), join(&complement(&a), &complement(&b)).unwrap());
                prop_assert_eq!(join(&join(&a, &b).unwrap(), &c).unwrap(), join(&a, &join(&b, &c).unwrap()).unwrap());
            }

            #[test]
            fn intersection_round_trip(m in rational_measure(3)) {
                let g = m.intersection_values();
                let values: BTreeMap<usize, Rational> = g.into_iter().enumerate().collect();
                prop_assert_eq!(measure_from_intersections(&values, 3).unwrap(), m);
            }

            #[test]
            fn restrict_commutes_with_evaluate(m in rational_measure(3), mask in 0u64..16) {
                let kept = [2usize, 0];
                let local = Element::from_mask(2, mask).unwrap();
                let lhs = restrict(&m, &kept).unwrap().evaluate(&local).unwrap();
                let rhs = m.evaluate(&embed(&local, &kept, 3).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn evaluate_additive_and_decomposable(m in rational_measure(2), a in 0u64..16, b in 0u64..16) {
                let a = Element::from_mask(2, a).unwrap();
                let b = Element::from_mask(2, b & !a.mask()).unwrap();
                prop_assert_eq!(
                    m.evaluate(&join(&a, &b).unwrap()).unwrap(),
                    m.evaluate(&a).unwrap() + m.evaluate(&b).unwrap()
                );
                let rebuilt: Rational = m
                    .convex_decomposition()
                    .into_iter()
                    .map(|(w, s)| if s.value(&a) { w } else { rat(0, 1) })
                    .sum();
                prop_assert_eq!(rebuilt, m.evaluate(&a).unwrap());
            }
        }
    }
}
