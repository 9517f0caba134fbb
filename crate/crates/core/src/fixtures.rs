//! Standard inputs: spin projectors, the singlet Bell setup, the 18-vector
//! Kochen–Specker set, and seeded random PPT generators.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::boolean_core::Measure;
use crate::error::Result;
use crate::extension::ThreeSpec;
use crate::ppt::{Pba, Ppt, State};
use crate::quantum::{CMatrix, ProjectionMatrix, QuantumState};
use crate::scalar::{rat, Rational};

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Spin "up" along the direction at `degrees` in the x–z plane:
/// `(1 + cos θ σ_z + sin θ σ_x)/2`.
pub fn spin_projector(degrees: f64) -> CMatrix {
    let t = degrees.to_radians();
    CMatrix::from_row_slice(
        2,
        2,
        &[c((1.0 + t.cos()) / 2.0), c(t.sin() / 2.0), c(t.sin() / 2.0), c((1.0 - t.cos()) / 2.0)],
    )
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> QuantumState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::vector(vec![c(0.0), c(h), c(-h), c(0.0)]).expect("unit vector")
}

/// `A1, A2` act on the first particle at angles `a`, `A3, A4` on the second
/// at angles `b`.
pub fn chsh_projections(a: [f64; 2], b: [f64; 2]) -> Vec<ProjectionMatrix> {
    let id = CMatrix::identity(2, 2);
    let mut out = Vec::new();
    for (i, &t) in a.iter().enumerate() {
        out.push(ProjectionMatrix::new(format!("A{}", i + 1), spin_projector(t).kronecker(&id)).expect("projection"));
    }
    for (i, &t) in b.iter().enumerate() {
        out.push(ProjectionMatrix::new(format!("A{}", i + 3), id.kronecker(&spin_projector(t))).expect("projection"));
    }
    out
}

/// Angles at which the singlet maximally violates the CH inequality.
pub const CHSH_ANGLES: ([f64; 2], [f64; 2]) = ([0.0, 90.0], [45.0, 135.0]);

/// Singlet state on the four CHSH projectors: contexts `{13},{14},{23},{24}`.
pub fn singlet_bell_ppt(a: [f64; 2], b: [f64; 2]) -> Result<Ppt<f64>> {
    crate::quantum::free_state_from_projections(chsh_projections(a, b), &singlet())
}

/// The 18 rays in four dimensions forming nine orthogonal bases, each ray
/// in exactly two bases.
pub fn cabello_vectors() -> Vec<[i32; 4]> {
    vec![
        [0, 0, 0, 1],
        [0, 0, 1, 0],
        [1, 1, 0, 0],
        [1, -1, 0, 0],
        [0, 1, 0, 0],
        [1, 0, 1, 0],
        [1, 0, -1, 0],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
        [0, 0, 1, 1],
        [1, 1, 1, 1],
        [0, 1, 0, -1],
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, -1, 0],
        [1, 1, -1, 1],
        [1, 1, 1, -1],
        [-1, 1, 1, 1],
    ]
}

/// The nine bases as indices into [`cabello_vectors`].
pub fn cabello_bases() -> Vec<[usize; 4]> {
    vec![
        [0, 1, 2, 3],
        [0, 4, 5, 6],
        [7, 8, 2, 9],
        [7, 10, 6, 11],
        [1, 4, 12, 13],
        [8, 10, 13, 14],
        [15, 16, 3, 9],
        [15, 17, 5, 11],
        [16, 17, 12, 14],
    ]
}

pub fn cabello_projections() -> Vec<ProjectionMatrix> {
    cabello_vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let v: Vec<Complex64> = v.iter().map(|&x| c(x as f64)).collect();
            ProjectionMatrix::rank_one(format!("v{}", i + 1), &v).expect("nonzero ray")
        })
        .collect()
}

/// Random measure with weights `k/den` drawn by splitting `den` units.
pub fn random_measure(rng: &mut Rng64, arity: usize, den: i64) -> Measure<Rational> {
    let atoms = 1usize << arity;
    let mut counts = vec![0i64; atoms];
    for _ in 0..den {
        counts[rng.gen_range(0..atoms)] += 1;
    }
    Measure::new(arity, counts.into_iter().map(|k| rat(k, den)).collect()).expect("weights sum to one")
}

/// Random measure with a sparse support: a few atoms carry all weight.
pub fn random_sparse_measure(rng: &mut Rng64, arity: usize, den: i64) -> Measure<Rational> {
    let atoms = 1usize << arity;
    let support: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..atoms)).collect();
    let mut counts = vec![0i64; atoms];
    for _ in 0..den {
        counts[support[rng.gen_range(0..support.len())]] += 1;
    }
    Measure::new(arity, counts.into_iter().map(|k| rat(k, den)).collect()).expect("weights sum to one")
}

/// Marginals of one global measure on every context.
pub fn ppt_from_global(pba: Pba, global: &Measure<Rational>) -> Result<Ppt<Rational>> {
    let measures = pba
        .contexts()
        .iter()
        .map(|c| crate::boolean_core::restrict(global, c.generators()))
        .collect::<Result<Vec<_>>>()?;
    Ppt::new(pba, State::new(measures))
}

pub fn bell_pba() -> Pba {
    Pba::new(4, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).expect("bell topology")
}

/// Bell-topology state with independent random pair measures constrained
/// to share random singleton marginals: `p_i = a_i/den`, pair values drawn
/// from the admissible range.
pub fn random_bell_ppt(rng: &mut Rng64, den: i64) -> Result<Ppt<Rational>> {
    let p: Vec<i64> = (0..4).map(|_| rng.gen_range(0..=den)).collect();
    let mut measures = Vec::new();
    for (x, y) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        let lo = (p[x] + p[y] - den).max(0);
        let hi = p[x].min(p[y]);
        let q = rng.gen_range(lo..=hi);
        // atoms: bit 0 for x, bit 1 for y
        let w = [den - p[x] - p[y] + q, p[x] - q, p[y] - q, q];
        measures.push(Measure::new(2, w.iter().map(|&k| rat(k, den)).collect())?);
    }
    Ppt::new(bell_pba(), State::new(measures))
}

/// Random admissible three-observable data with denominator `den`.
pub fn random_three_spec(rng: &mut Rng64, den: i64) -> ThreeSpec<Rational> {
    let p3 = rng.gen_range(0..=den);
    let pair = |rng: &mut Rng64| {
        let p = rng.gen_range(0..=den);
        let lo = (p + p3 - den).max(0);
        let hi = p.min(p3);
        (p, rng.gen_range(lo..=hi))
    };
    let (p1, p13) = pair(rng);
    let (p2, p23) = pair(rng);
    ThreeSpec { p1: rat(p1, den), p2: rat(p2, den), p3: rat(p3, den), p13: rat(p13, den), p23: rat(p23, den) }
}
