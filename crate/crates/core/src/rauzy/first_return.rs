//! Exact first-return computation of Rauzy-Veech induction on rational exchanges.
//!
//! Each elementary induction is computed geometrically: the current induced map
//! is restricted to the longer of the two candidate subintervals by following
//! points until they come back, with no use of the combinatorial move rule. The
//! itineraries of the final induced intervals are then recorded by iterating the
//! original exchange on an interior point of each interval.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::iet::Permutation;
use crate::rauzy::MoveType;

/// An exchange with exact rational lengths (not necessarily summing to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalIet {
    /// Combinatorial datum.
    pub perm: Permutation,
    /// Positive rational lengths indexed by letter.
    pub lengths: Vec<BigRational>,
}

/// Outcome of `n` exact inductions.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstReturn {
    /// Level-0 itinerary of each induced interval until its first return.
    pub words: Vec<Vec<usize>>,
    /// Type of each elementary step, decided geometrically.
    pub kinds: Vec<MoveType>,
    /// Permutation of the induced exchange, read off from interval and image positions.
    pub perm: Permutation,
    /// Lengths of the induced intervals.
    pub lengths: Vec<BigRational>,
}

#[derive(Debug, Clone)]
struct Piece {
    label: usize,
    lo: BigRational,
    hi: BigRational,
    shift: BigRational,
}

struct Pending {
    lo: BigRational,
    hi: BigRational,
    shift: BigRational,
    hops: usize,
    first: usize,
}

fn cumulative(row: &[usize], lengths: &[BigRational]) -> Vec<BigRational> {
    let mut left = vec![BigRational::zero(); lengths.len()];
    let mut acc = BigRational::zero();
    for &a in row {
        left[a] = acc.clone();
        acc += &lengths[a];
    }
    left
}

fn containing<'a>(pieces: &'a [Piece], x: &BigRational) -> &'a Piece {
    pieces
        .iter()
        .find(|p| &p.lo <= x && x < &p.hi)
        .expect("point lies in the domain of the induced map")
}

/// First return of the map given by `pieces` to `[0, cut)`, split into maximal continuity pieces.
fn first_return(pieces: &[Piece], cut: &BigRational, step: usize) -> Result<Vec<Pending>> {
    let mut queue: Vec<Pending> = pieces
        .iter()
        .filter(|p| &p.lo < cut)
        .map(|p| Pending {
            lo: p.lo.clone(),
            hi: if &p.hi < cut { p.hi.clone() } else { cut.clone() },
            shift: p.shift.clone(),
            hops: 1,
            first: p.label,
        })
        .collect();
    let mut done = Vec::new();
    let cap = 64 * pieces.len();
    let mut work = 0;
    while let Some(mut item) = queue.pop() {
        work += 1;
        if work > cap {
            return Err(Error::KeaneViolation(step));
        }
        let pos_lo = &item.lo + &item.shift;
        let pos_hi = &item.hi + &item.shift;
        if &pos_hi <= cut {
            done.push(item);
        } else if &pos_lo >= cut {
            let q = containing(pieces, &pos_lo);
            if pos_hi > q.hi {
                let split = &q.hi - &item.shift;
                queue.push(Pending {
                    lo: split.clone(),
                    hi: item.hi.clone(),
                    shift: item.shift.clone(),
                    hops: item.hops,
                    first: item.first,
                });
                item.hi = split;
            }
            item.shift += &q.shift;
            item.hops += 1;
            queue.push(item);
        } else {
            let split = cut - &item.shift;
            queue.push(Pending {
                lo: split.clone(),
                hi: item.hi.clone(),
                shift: item.shift.clone(),
                hops: item.hops,
                first: item.first,
            });
            item.hi = split;
            queue.push(item);
        }
    }
    done.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut merged: Vec<Pending> = Vec::new();
    for item in done {
        if let Some(last) = merged.last_mut() {
            if last.hi == item.lo && last.first == item.first && last.shift == item.shift && last.hops == item.hops {
                last.hi = item.hi;
                continue;
            }
        }
        merged.push(item);
    }
    Ok(merged)
}

/// Performs `steps` exact inductions and records the level-0 itineraries of the induced intervals.
pub fn brute_force_first_return(iet: &RationalIet, steps: usize) -> Result<FirstReturn> {
    let d = iet.perm.dim();
    if iet.lengths.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: iet.lengths.len() });
    }
    if iet.lengths.iter().any(|l| l <= &BigRational::zero()) {
        return Err(Error::InvalidLengths("rational lengths must be positive".into()));
    }
    let left = cumulative(iet.perm.top_row(), &iet.lengths);
    let image_left = cumulative(iet.perm.bottom_row(), &iet.lengths);
    let level0: Vec<Piece> = (0..d)
        .map(|a| Piece {
            label: a,
            lo: left[a].clone(),
            hi: &left[a] + &iet.lengths[a],
            shift: &image_left[a] - &left[a],
        })
        .collect();
    let mut pieces = level0.clone();
    let mut total: BigRational = iet.lengths.iter().sum();
    let mut kinds = Vec::with_capacity(steps);

    for step in 0..steps {
        let top = pieces.iter().max_by(|a, b| a.lo.cmp(&b.lo)).unwrap();
        let bottom = pieces
            .iter()
            .max_by(|a, b| (&a.lo + &a.shift).cmp(&(&b.lo + &b.shift)))
            .unwrap();
        let len_top = &top.hi - &top.lo;
        let len_bottom = &bottom.hi - &bottom.lo;
        if len_top == len_bottom {
            return Err(Error::KeaneViolation(step));
        }
        let kind = if len_bottom < len_top { MoveType::Top } else { MoveType::Bottom };
        let cut = &total - if len_bottom < len_top { &len_bottom } else { &len_top };
        let returned = first_return(&pieces, &cut, step)?;
        if returned.len() != d || returned.iter().filter(|p| p.hops == 2).count() != 1 {
            return Err(Error::KeaneViolation(step));
        }
        let mut used = vec![false; d];
        for p in returned.iter().filter(|p| p.hops == 1) {
            used[p.first] = true;
        }
        let missing = used.iter().position(|u| !u).ok_or(Error::KeaneViolation(step))?;
        pieces = returned
            .into_iter()
            .map(|p| Piece {
                label: if p.hops == 1 { p.first } else { missing },
                lo: p.lo,
                hi: p.hi,
                shift: p.shift,
            })
            .collect();
        total = cut;
        kinds.push(kind);
    }

    let mut words = vec![Vec::new(); d];
    for p in &pieces {
        let mut x: BigRational = (&p.lo + &p.hi) / BigRational::from_integer(2.into());
        loop {
            let q = containing(&level0, &x);
            words[p.label].push(q.label);
            x += &q.shift;
            if x < total {
                break;
            }
        }
    }
    let mut by_domain: Vec<&Piece> = pieces.iter().collect();
    by_domain.sort_by(|a, b| a.lo.cmp(&b.lo));
    let top: Vec<usize> = by_domain.iter().map(|p| p.label).collect();
    by_domain.sort_by_key(|p| &p.lo + &p.shift);
    let bottom: Vec<usize> = by_domain.iter().map(|p| p.label).collect();
    let mut lengths = vec![BigRational::zero(); d];
    for p in &pieces {
        lengths[p.label] = &p.hi - &p.lo;
    }
    Ok(FirstReturn {
        words,
        kinds,
        perm: Permutation::new(iet.perm.alphabet().to_vec(), top, bottom)?,
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zero_steps_gives_single_letters() {
        let perm = Permutation::from_rows("ABC", "CBA").unwrap();
        let iet = RationalIet { perm, lengths: vec![q(1, 5), q(2, 5), q(2, 5)] };
        let out = brute_force_first_return(&iet, 0).unwrap();
        assert_eq!(out.words, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn one_top_step_on_the_swap() {
        let perm = Permutation::from_rows("AB", "BA").unwrap();
        let iet = RationalIet { perm: perm.clone(), lengths: vec![q(2, 5), q(3, 5)] };
        let out = brute_force_first_return(&iet, 1).unwrap();
        assert_eq!(out.kinds, vec![MoveType::Top]);
        assert_eq!(out.words, vec![vec![0, 1], vec![1]]);
        assert_eq!(out.perm, perm);
        assert_eq!(out.lengths, vec![q(2, 5), q(1, 5)]);
    }

    #[test]
    fn equal_competitors_are_a_keane_violation() {
        let perm = Permutation::from_rows("AB", "BA").unwrap();
        let iet = RationalIet { perm, lengths: vec![q(1, 2), q(1, 2)] };
        assert_eq!(brute_force_first_return(&iet, 1), Err(Error::KeaneViolation(0)));
    }

    #[test]
    fn adjacent_letters_translated_together_stay_separate() {
        // B and C are consecutive in both rows, so they share a translation.
        let perm = Permutation::from_rows("ABC", "BCA").unwrap();
        let iet = RationalIet { perm, lengths: vec![q(1, 2), q(1, 5), q(3, 10)] };
        let out = brute_force_first_return(&iet, 1).unwrap();
        assert_eq!(out.kinds, vec![MoveType::Bottom]);
        assert_eq!(out.words, vec![vec![0], vec![1], vec![0, 2]]);
    }
}
