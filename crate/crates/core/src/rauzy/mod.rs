//! Rauzy-Veech induction, periodic loops, their cocycle matrices and tower words,
//! and the self-similar exchange of a loop together with its affine deformations.

pub mod first_return;
pub mod towers;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::iet::{Aiet, Iet, Permutation};
use crate::{dimension, pf, spectral};
pub use towers::TowerTable;

/// Lengths closer than this make a Rauzy step undefined.
pub const TIE_TOL: f64 = 1e-14;

/// Residual tolerance of the self-similarity relations.
pub const SELF_SIMILAR_TOL: f64 = 1e-10;

/// Tolerance on `⟨ω, λ⟩ = 0`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Type of a Rauzy-Veech step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveType {
    /// The top-row interval is longer and wins.
    Top,
    /// The bottom-row interval is longer and wins.
    Bottom,
}

impl MoveType {
    /// Parses a loop string over `{t, b}`.
    pub fn parse_word(s: &str) -> Result<Vec<MoveType>> {
        if s.is_empty() {
            return Err(Error::InvalidLoop(s.to_string()));
        }
        s.chars()
            .map(|c| match c {
                't' => Ok(MoveType::Top),
                'b' => Ok(MoveType::Bottom),
                _ => Err(Error::InvalidLoop(s.to_string())),
            })
            .collect()
    }

    /// The character `t` or `b`.
    pub fn symbol(self) -> char {
        match self {
            MoveType::Top => 't',
            MoveType::Bottom => 'b',
        }
    }
}

/// Winner and loser of a step of the given type.
pub fn winner_loser(perm: &Permutation, kind: MoveType) -> (usize, usize) {
    let (t, b) = (perm.top_last(), perm.bottom_last());
    match kind {
        MoveType::Top => (t, b),
        MoveType::Bottom => (b, t),
    }
}

/// Combinatorial Rauzy move: the loser's row is rearranged so the loser sits right after the winner.
pub fn combinatorial_move(perm: &Permutation, kind: MoveType) -> Permutation {
    let (winner, loser) = winner_loser(perm, kind);
    let reinsert = |row: &[usize]| -> Vec<usize> {
        let mut out: Vec<usize> = row[..row.len() - 1].to_vec();
        let at = out.iter().position(|&a| a == winner).expect("winner in row") + 1;
        out.insert(at, loser);
        out
    };
    let (top, bottom) = match kind {
        MoveType::Top => (perm.top_row().to_vec(), reinsert(perm.bottom_row())),
        MoveType::Bottom => (reinsert(perm.top_row()), perm.bottom_row().to_vec()),
    };
    Permutation::from_valid_rows(perm.alphabet().to_vec(), top, bottom)
}

/// Result of one Rauzy-Veech step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Permutation of the induced exchange.
    pub perm: Permutation,
    /// Unnormalized lengths of the induced exchange.
    pub lengths: Vec<f64>,
    /// Type of the step.
    pub kind: MoveType,
    /// Letter whose interval was longer.
    pub winner: usize,
    /// Letter whose interval was shorter.
    pub loser: usize,
}

/// One Rauzy-Veech step on an exchange with (not necessarily normalized) lengths.
pub fn rauzy_step(perm: &Permutation, lengths: &[f64]) -> Result<Step> {
    let (t, b) = (perm.top_last(), perm.bottom_last());
    let (lt, lb) = (lengths[t], lengths[b]);
    if (lt - lb).abs() <= TIE_TOL {
        return Err(Error::Tie(lt, lb));
    }
    let kind = if lb < lt { MoveType::Top } else { MoveType::Bottom };
    let (winner, loser) = winner_loser(perm, kind);
    let mut new_lengths = lengths.to_vec();
    new_lengths[winner] -= lengths[loser];
    Ok(Step { perm: combinatorial_move(perm, kind), lengths: new_lengths, kind, winner, loser })
}

/// A closed path in the Rauzy graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RauzyLoop {
    perm: Permutation,
    moves: Vec<MoveType>,
}

impl RauzyLoop {
    /// Validates that the moves return to the starting permutation.
    pub fn new(perm: Permutation, moves: Vec<MoveType>) -> Result<Self> {
        if moves.is_empty() {
            return Err(Error::InvalidLoop(String::new()));
        }
        let end = moves.iter().fold(perm.clone(), |p, &k| combinatorial_move(&p, k));
        if end != perm {
            return Err(Error::LoopNotClosed);
        }
        Ok(RauzyLoop { perm, moves })
    }

    /// Parses a loop string such as `"tb"`.
    pub fn parse(perm: Permutation, word: &str) -> Result<Self> {
        Self::new(perm, MoveType::parse_word(word)?)
    }

    /// Starting (and ending) permutation.
    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Declared move types.
    pub fn moves(&self) -> &[MoveType] {
        &self.moves
    }

    /// Number of moves.
    pub fn period(&self) -> usize {
        self.moves.len()
    }

    /// The loop traversed `k` times.
    pub fn repeated(&self, k: usize) -> RauzyLoop {
        let moves = (0..k).flat_map(|_| self.moves.iter().copied()).collect();
        RauzyLoop { perm: self.perm.clone(), moves }
    }

    /// Loop string over `{t, b}`.
    pub fn word(&self) -> String {
        self.moves.iter().map(|m| m.symbol()).collect()
    }
}

/// Integer cocycle matrix of a loop and its weighted version for one slope vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleMatrix {
    /// `M[α][β]`: number of visits of the tower over `α` to the original interval `β`.
    pub integer: Vec<Vec<BigUint>>,
    /// `M(v)[α][β] = Σ_{i : w_α[i] = β} e^{S_i(v)}`.
    pub weighted: Vec<Vec<f64>>,
}

/// Product of elementary matrices along the loop, later steps multiplied on the left.
pub fn cocycle_integer(lp: &RauzyLoop) -> Vec<Vec<BigUint>> {
    let d = lp.perm().dim();
    let mut m: Vec<Vec<BigUint>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
        .collect();
    let mut perm = lp.perm().clone();
    for &k in lp.moves() {
        let (winner, loser) = winner_loser(&perm, k);
        // Left multiplication by the identity plus a unit at (loser, winner).
        let add = m[winner].clone();
        for (x, y) in m[loser].iter_mut().zip(add) {
            *x += y;
        }
        perm = combinatorial_move(&perm, k);
    }
    m
}

/// Tower words of a loop built by the substitution rule of each move.
pub fn loop_towers(lp: &RauzyLoop) -> TowerTable {
    let mut towers = TowerTable::identity(lp.perm().dim());
    let mut perm = lp.perm().clone();
    for &k in lp.moves() {
        let (winner, loser) = winner_loser(&perm, k);
        towers.push_move(k, winner, loser);
        perm = combinatorial_move(&perm, k);
    }
    towers.materialize();
    towers
}

/// Tower words and cocycle matrices of a loop for the slope vector `omega`.
pub fn unroll_loop(lp: &RauzyLoop, omega: &[f64]) -> Result<(TowerTable, CocycleMatrix)> {
    let d = lp.perm().dim();
    if omega.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: omega.len() });
    }
    let towers = loop_towers(lp);
    let weighted = towers.weighted(omega);
    Ok((towers, CocycleMatrix { integer: cocycle_integer(lp), weighted }))
}

fn is_positive(m: &[Vec<bool>]) -> bool {
    m.iter().flatten().all(|&x| x)
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// Smallest `k ≤ d²` with `M^k` entrywise positive, or `None` if `M` is not primitive.
pub fn positivity_exponent(m: &[Vec<BigUint>]) -> Option<usize> {
    let d = m.len();
    let base: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|x| !x.is_zero()).collect()).collect();
    let mut power = base.clone();
    for k in 1..=d * d {
        if is_positive(&power) {
            return Some(k);
        }
        power = bool_mul(&power, &base);
    }
    None
}

/// Converts a big-integer matrix to doubles.
pub fn to_f64_matrix(m: &[Vec<BigUint>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect())
        .collect()
}

/// A self-similar exchange: the periodic loop, its positive matrix and Perron-Frobenius data.
#[derive(Debug, Clone)]
pub struct SelfSimilarSystem {
    declared: RauzyLoop,
    lp: RauzyLoop,
    multiplier: usize,
    integer: Vec<Vec<BigUint>>,
    matrix: Vec<Vec<f64>>,
    rho_t: f64,
    lambda: Vec<f64>,
    theta: Vec<f64>,
    towers: TowerTable,
}

impl SelfSimilarSystem {
    /// The loop as declared by the caller.
    pub fn declared_loop(&self) -> &RauzyLoop {
        &self.declared
    }

    /// The loop actually used: the declared loop repeated [`Self::multiplier`] times.
    pub fn period_loop(&self) -> &RauzyLoop {
        &self.lp
    }

    /// Number of repetitions needed for a positive matrix.
    pub fn multiplier(&self) -> usize {
        self.multiplier
    }

    /// Starting permutation.
    pub fn perm(&self) -> &Permutation {
        self.lp.perm()
    }

    /// Alphabet size.
    pub fn dim(&self) -> usize {
        self.lp.perm().dim()
    }

    /// Exact positive self-similarity matrix.
    pub fn integer_matrix(&self) -> &[Vec<BigUint>] {
        &self.integer
    }

    /// Self-similarity matrix as doubles.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Logarithm of the Perron-Frobenius eigenvalue.
    pub fn rho_t(&self) -> f64 {
        self.rho_t
    }

    /// Left Perron-Frobenius eigenvector with unit sum: the lengths of the exchange.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Right Perron-Frobenius eigenvector with `⟨λ, θ⟩ = 1`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Tower words over one period.
    pub fn towers(&self) -> &TowerTable {
        &self.towers
    }

    /// The self-similar exchange.
    pub fn iet(&self) -> Result<Iet> {
        Iet::new(self.perm().clone(), self.lambda.clone())
    }

    /// `M v` for a column vector `v`.
    pub fn apply_matrix(&self, v: &[f64]) -> Vec<f64> {
        pf::mat_vec(&self.matrix, v)
    }
}

/// Validates primitivity, upgrades to a positive matrix, computes Perron-Frobenius data
/// and checks that the lengths realize the declared move types.
pub fn build_self_similar(declared: &RauzyLoop) -> Result<SelfSimilarSystem> {
    let base = cocycle_integer(declared);
    let multiplier = positivity_exponent(&base).ok_or(Error::NotPrimitive)?;
    let lp = declared.repeated(multiplier);
    let integer = cocycle_integer(&lp);
    let matrix = to_f64_matrix(&integer);
    let pair = pf::pf_pair(&matrix)?;
    let rho_t = pair.value.ln();
    let towers = loop_towers(&lp);
    replay(&lp, &pair.left, rho_t)?;
    Ok(SelfSimilarSystem {
        declared: declared.clone(),
        lp,
        multiplier,
        integer,
        matrix,
        rho_t,
        lambda: pair.left,
        theta: pair.right,
        towers,
    })
}

/// Replays the loop from `lambda`, checking each step's type and the final rescaling.
fn replay(lp: &RauzyLoop, lambda: &[f64], rho_t: f64) -> Result<()> {
    let mut perm = lp.perm().clone();
    let mut lengths = lambda.to_vec();
    for (k, &declared) in lp.moves().iter().enumerate() {
        let step = rauzy_step(&perm, &lengths).map_err(|_| Error::NotRealizable(k))?;
        if step.kind != declared {
            return Err(Error::NotRealizable(k));
        }
        perm = step.perm;
        lengths = step.lengths;
    }
    let scale = (-rho_t).exp();
    let err = lengths
        .iter()
        .zip(lambda)
        .fold(0.0f64, |m, (x, l)| m.max((x - scale * l).abs() / (scale * l)));
    if err > SELF_SIMILAR_TOL {
        return Err(Error::NotRealizable(lp.period()));
    }
    Ok(())
}

/// Affine exchange with log-slopes `omega` that follows the same Rauzy loop.
///
/// The lengths are the conformal weights of `omega`: the left Perron-Frobenius
/// vector of `M(ω)` when `Mω = ω`, and the cone limit along the slope orbit
/// `M^k ω` otherwise. Slope vectors with an expanding component are rejected.
pub fn construct_aiet(sys: &SelfSimilarSystem, omega: &[f64]) -> Result<Aiet> {
    let d = sys.dim();
    if omega.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: omega.len() });
    }
    let ip = pf::dot(omega, sys.lambda());
    if ip.abs() > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal(ip));
    }
    let lengths = if dimension::invariance_defect(sys, omega) <= dimension::INVARIANCE_TOL {
        let (m, _) = sys.towers().weighted_scaled(omega, 1.0);
        pf::left_pf(&m)?.1
    } else {
        let spectrum = spectral::analyze_spectrum(sys);
        let cert = spectral::certify_hyperbolic(sys, &spectrum)?;
        let decomp = spectral::classify_slope(sys, &spectrum, &cert, omega, spectral::CLASS_EPS)?;
        dimension::conformal_weights(sys, &spectrum, &decomp)?.nu
    };
    Aiet::new(sys.perm().clone(), lengths, omega.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> Permutation {
        Permutation::from_rows("AB", "BA").unwrap()
    }

    #[test]
    fn golden_steps() {
        let s = rauzy_step(&swap(), &[0.382, 0.618]).unwrap();
        assert_eq!((s.kind, s.winner, s.loser), (MoveType::Top, 1, 0));
        assert!((s.lengths[1] - 0.236).abs() < 1e-12);
        let s = rauzy_step(&swap(), &[0.618, 0.382]).unwrap();
        assert_eq!((s.kind, s.winner), (MoveType::Bottom, 0));
        assert!(matches!(rauzy_step(&swap(), &[0.5, 0.5]), Err(Error::Tie(..))));
    }

    #[test]
    fn golden_loop_matrix() {
        let lp = RauzyLoop::parse(swap(), "tb").unwrap();
        let (towers, m) = unroll_loop(&lp, &[0.0, 0.0]).unwrap();
        let as_u: Vec<Vec<u64>> =
            m.integer.iter().map(|r| r.iter().map(|x| x.to_u64().unwrap()).collect()).collect();
        assert_eq!(as_u, vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(towers.counts(), as_u);
        assert_eq!(m.weighted, vec![vec![1.0, 1.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn golden_system() {
        let lp = RauzyLoop::parse(swap(), "tb").unwrap();
        let sys = build_self_similar(&lp).unwrap();
        assert_eq!(sys.multiplier(), 1);
        assert!((sys.rho_t() - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-13);
        assert!((sys.lambda()[0] - 0.381966011250105).abs() < 1e-12);
        assert!((pf::dot(sys.lambda(), sys.theta()) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn repeated_tops_are_rejected() {
        let lp = RauzyLoop::parse(swap(), "tt").unwrap();
        assert!(matches!(
            build_self_similar(&lp),
            Err(Error::NotPrimitive) | Err(Error::NotRealizable(_))
        ));
    }

    #[test]
    fn open_paths_are_rejected() {
        let p = Permutation::from_rows("ABC", "CBA").unwrap();
        assert_eq!(RauzyLoop::parse(p, "t"), Err(Error::LoopNotClosed));
    }

    #[test]
    fn zero_slope_aiet_has_self_similar_lengths() {
        let lp = RauzyLoop::parse(swap(), "tb").unwrap();
        let sys = build_self_similar(&lp).unwrap();
        let f = construct_aiet(&sys, &[0.0, 0.0]).unwrap();
        for (a, b) in f.lengths().iter().zip(sys.lambda()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(matches!(construct_aiet(&sys, &[0.1, 0.1]), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn stable_golden_aiet_tiles() {
        let lp = RauzyLoop::parse(swap(), "tb").unwrap();
        let sys = build_self_similar(&lp).unwrap();
        let l = sys.lambda().to_vec();
        let f = construct_aiet(&sys, &[0.5 * l[1], -0.5 * l[0]]).unwrap();
        assert!((f.image_total() - 1.0).abs() < 1e-9);
        assert!(f.lengths().iter().all(|&x| x > 0.0));
    }
}
