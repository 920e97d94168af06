//! Fixture loading and the substitution-versus-simulation oracle shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use aiet::iet::Permutation;
use aiet::rauzy::first_return::{brute_force_first_return, RationalIet};
use aiet::rauzy::{build_self_similar, combinatorial_move, unroll_loop, MoveType, RauzyLoop};
use aiet::report::{self, Prepared};
use aiet::spectral::SlopeDecomposition;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Every fixture file.
pub const FIXTURES: &[&str] = &[
    "golden",
    "golden_stable",
    "d3_central",
    "d4_central",
    "d4_central_stable",
    "d4_unstable",
    "nonhyperbolic",
];

/// Fixtures with a nonzero central part and no expanding part.
pub const CENTRAL: &[&str] = &["d3_central", "d4_central", "d4_central_stable"];

/// Hyperbolic fixtures whose slope vector has no central part.
pub const NO_CENTRAL: &[&str] = &["golden", "golden_stable"];

/// Hyperbolic fixtures whose slope vector has no expanding part.
pub const NOT_UNSTABLE: &[&str] = &["golden", "golden_stable", "d3_central", "d4_central", "d4_central_stable"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn load(name: &str) -> Prepared {
    let bytes = std::fs::read(fixture_path(name)).expect("fixture file");
    report::prepare(report::parse_spec(&bytes).expect("fixture parses"), &[]).expect("fixture builds")
}

pub fn load_decomposed(name: &str) -> (Prepared, SlopeDecomposition) {
    let p = load(name);
    let decomp = p.decompose().expect("hyperbolic fixture");
    (p, decomp)
}

/// Irreducible permutations with top row in alphabetical order.
pub fn irreducible_permutations(d: usize) -> Vec<Permutation> {
    let letters: Vec<char> = (0..d).map(|i| (b'A' + i as u8) as char).collect();
    let top: String = letters.iter().collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    permutations(&mut idx, 0, &mut |bottom| {
        let bottom: String = bottom.iter().map(|&i| letters[i]).collect();
        if let Ok(p) = Permutation::from_rows(&top, &bottom) {
            out.push(p);
        }
    });
    out
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Closed loops of length at most `max_len` whose system is primitive.
pub fn primitive_loops(d: usize, max_len: usize) -> Vec<RauzyLoop> {
    let mut out = Vec::new();
    for perm in irreducible_permutations(d) {
        for len in 1..=max_len {
            for bits in 0..(1u32 << len) {
                let moves: Vec<MoveType> =
                    (0..len).map(|i| if bits >> i & 1 == 0 { MoveType::Top } else { MoveType::Bottom }).collect();
                let mut q = perm.clone();
                for &k in &moves {
                    q = combinatorial_move(&q, k);
                }
                if q != perm {
                    continue;
                }
                if let Ok(lp) = RauzyLoop::new(perm.clone(), moves) {
                    if build_self_similar(&lp).is_ok() {
                        out.push(lp);
                    }
                }
            }
        }
    }
    out
}

/// Outcome of comparing the substitution towers of one loop with exact induction.
pub struct OracleCheck {
    pub words_match: bool,
    pub kinds_match: bool,
    pub counts_match: bool,
    pub returns_to_start: bool,
}

impl OracleCheck {
    pub fn ok(&self) -> bool {
        self.words_match && self.kinds_match && self.counts_match && self.returns_to_start
    }
}

/// Runs exact induction on rational lengths `λ = xM` that follow the loop for one
/// period, and compares itineraries, move types and letter counts with the towers.
pub fn substitution_oracle(lp: &RauzyLoop) -> OracleCheck {
    let d = lp.perm().dim();
    let (towers, cocycle) = unroll_loop(lp, &vec![0.0; d]).expect("loop unrolls");
    // Scaled square roots of primes: no short integer relation, so no saddle connection within one period.
    const ROOTS: [u64; 6] = [1_414_213_562, 1_732_050_808, 2_236_067_977, 2_645_751_311, 3_316_624_790, 3_605_551_275];
    let x: Vec<BigInt> = ROOTS[..d].iter().map(|&r| BigInt::from(r)).collect();
    let lengths: Vec<BigRational> = (0..d)
        .map(|b| {
            let s: BigInt = (0..d).map(|a| &x[a] * BigInt::from(cocycle.integer[a][b].clone())).sum();
            BigRational::from_integer(s)
        })
        .collect();
    let iet = RationalIet { perm: lp.perm().clone(), lengths };
    let fr = brute_force_first_return(&iet, lp.period()).expect("exact induction");
    let words_match = (0..d).all(|a| towers.letters(a).collect::<Vec<_>>() == fr.words[a]);
    let counts = towers.counts();
    let counts_match = (0..d).all(|a| {
        (0..d).all(|b| {
            let brute = fr.words[a].iter().filter(|&&c| c == b).count() as u64;
            brute == counts[a][b] && BigInt::from(brute) == BigInt::from(cocycle.integer[a][b].clone())
        })
    });
    OracleCheck {
        words_match,
        kinds_match: fr.kinds == lp.moves(),
        counts_match,
        returns_to_start: &fr.perm == lp.perm(),
    }
}

/// Loops checked by the oracle: every primitive loop with `d ≤ 3` and period at most 6,
/// plus the period loops of the four-letter fixtures.
pub fn oracle_loops() -> Vec<RauzyLoop> {
    let mut loops = primitive_loops(2, 6);
    loops.extend(primitive_loops(3, 6));
    for name in FIXTURES {
        let p = load(name);
        if p.sys.dim() == 4 {
            loops.push(p.sys.period_loop().clone());
        }
    }
    loops
}
