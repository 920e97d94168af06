//! Alphabets, permutations, the translation matrix, genus and singularity counts,
//! and pointwise evaluation of interval exchanges and their affine deformations.
//!
//! Letters are referred to by their index in the alphabet. Intervals are
//! left-closed and right-open.

use crate::error::{Error, Result};
use crate::exact;

/// Tolerance on `Σ λ = 1` for length vectors.
pub const LENGTH_SUM_TOL: f64 = 1e-12;

/// Tolerance on the tiling identity `Σ e^{ω_α} λ_α = 1` of an affine exchange.
pub const TILING_TOL: f64 = 1e-10;

/// An irreducible permutation given by two orderings of a common alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    alphabet: Vec<String>,
    top: Vec<usize>,
    bottom: Vec<usize>,
}

impl Permutation {
    /// Validates two rows of letter names over `alphabet`.
    pub fn from_names(alphabet: &[String], top: &[String], bottom: &[String]) -> Result<Self> {
        let d = alphabet.len();
        if d < 2 {
            return Err(Error::NotBijection(format!(
                "alphabet must have at least 2 letters, found {d}"
            )));
        }
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::NotBijection(format!("letter {a:?} repeated in alphabet")));
            }
        }
        let lookup = |row: &[String], name: &str| -> Result<Vec<usize>> {
            if row.len() != d {
                return Err(Error::NotBijection(format!(
                    "{name} row has {} letters, alphabet has {d}",
                    row.len()
                )));
            }
            row.iter()
                .map(|s| {
                    alphabet.iter().position(|a| a == s).ok_or_else(|| {
                        Error::NotBijection(format!("{name} row letter {s:?} not in alphabet"))
                    })
                })
                .collect()
        };
        let top = lookup(top, "top")?;
        let bottom = lookup(bottom, "bottom")?;
        Self::new(alphabet.to_vec(), top, bottom)
    }

    /// Validates two rows given as letter indices, in left-to-right order.
    pub fn new(alphabet: Vec<String>, top: Vec<usize>, bottom: Vec<usize>) -> Result<Self> {
        let d = alphabet.len();
        for (row, name) in [(&top, "top"), (&bottom, "bottom")] {
            let mut seen = vec![false; d];
            if row.len() != d {
                return Err(Error::NotBijection(format!("{name} row has wrong length")));
            }
            for &a in row.iter() {
                if a >= d || seen[a] {
                    return Err(Error::NotBijection(format!("{name} row is not a bijection")));
                }
                seen[a] = true;
            }
        }
        let perm = Permutation { alphabet, top, bottom };
        if let Some(k) = perm.splitting_index() {
            return Err(Error::Reducible(k));
        }
        Ok(perm)
    }

    /// Permutation on letters `A, B, C, ...` from two rows of single-character names.
    pub fn from_rows(top: &str, bottom: &str) -> Result<Self> {
        let alphabet: Vec<String> = top.chars().map(|c| c.to_string()).collect();
        let bottom: Vec<String> = bottom.chars().map(|c| c.to_string()).collect();
        Self::from_names(&alphabet, &alphabet, &bottom)
    }

    fn splitting_index(&self) -> Option<usize> {
        let d = self.dim();
        let mut in_top = vec![false; d];
        let mut in_bottom = vec![false; d];
        let mut diff = 0i64;
        for k in 0..d - 1 {
            let (a, b) = (self.top[k], self.bottom[k]);
            in_top[a] = true;
            diff += if in_bottom[a] { -1 } else { 1 };
            in_bottom[b] = true;
            diff += if in_top[b] { -1 } else { 1 };
            if diff == 0 {
                return Some(k + 1);
            }
        }
        None
    }

    /// Number of letters.
    pub fn dim(&self) -> usize {
        self.alphabet.len()
    }

    /// Letter names.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Letters of the top row, left to right.
    pub fn top_row(&self) -> &[usize] {
        &self.top
    }

    /// Letters of the bottom row, left to right.
    pub fn bottom_row(&self) -> &[usize] {
        &self.bottom
    }

    /// Zero-based position of each letter in the top row.
    pub fn top_positions(&self) -> Vec<usize> {
        positions(&self.top)
    }

    /// Zero-based position of each letter in the bottom row.
    pub fn bottom_positions(&self) -> Vec<usize> {
        positions(&self.bottom)
    }

    /// Rightmost letter of the top row.
    pub fn top_last(&self) -> usize {
        self.top[self.dim() - 1]
    }

    /// Rightmost letter of the bottom row.
    pub fn bottom_last(&self) -> usize {
        self.bottom[self.dim() - 1]
    }

    /// Builds from rows already known to be valid bijections, skipping the irreducibility check.
    pub(crate) fn from_valid_rows(alphabet: Vec<String>, top: Vec<usize>, bottom: Vec<usize>) -> Self {
        Permutation { alphabet, top, bottom }
    }

    /// Human-readable rows, for example `ABCD/DCBA`.
    pub fn display_rows(&self) -> String {
        let row = |r: &[usize]| r.iter().map(|&a| self.alphabet[a].as_str()).collect::<Vec<_>>().join("");
        format!("{}/{}", row(&self.top), row(&self.bottom))
    }
}

fn positions(row: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; row.len()];
    for (i, &a) in row.iter().enumerate() {
        pos[a] = i;
    }
    pos
}

/// The antisymmetric translation matrix of a permutation.
pub fn omega_matrix(perm: &Permutation) -> Vec<Vec<i64>> {
    let d = perm.dim();
    let t = perm.top_positions();
    let b = perm.bottom_positions();
    let mut m = vec![vec![0i64; d]; d];
    for a in 0..d {
        for c in 0..d {
            if b[a] > b[c] && t[a] < t[c] {
                m[a][c] = 1;
            } else if b[a] < b[c] && t[a] > t[c] {
                m[a][c] = -1;
            }
        }
    }
    m
}

/// Genus `g` and number of singularities `κ` of the suspension surface.
pub fn genus_kappa(perm: &Permutation) -> Result<(usize, usize)> {
    let d = perm.dim();
    let rank = exact::rank(&exact::to_big(&omega_matrix(perm)));
    let kernel = d - rank;
    if !rank.is_multiple_of(2) {
        return Err(Error::ParityError { d, kernel });
    }
    Ok((rank / 2, kernel + 1))
}

fn check_lengths(d: usize, lengths: &[f64]) -> Result<()> {
    if lengths.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: lengths.len() });
    }
    if let Some(x) = lengths.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidLengths(format!("length {x} is not positive")));
    }
    let s: f64 = lengths.iter().sum();
    if (s - 1.0).abs() > LENGTH_SUM_TOL {
        return Err(Error::InvalidLengths(format!("lengths sum to {s}, expected 1")));
    }
    Ok(())
}

/// Left endpoints of the intervals listed in `row` order, indexed by letter.
fn left_endpoints(row: &[usize], widths: &[f64]) -> Vec<f64> {
    let mut left = vec![0.0; widths.len()];
    let mut acc = 0.0;
    for &a in row {
        left[a] = acc;
        acc += widths[a];
    }
    left
}

/// Letter of the interval (in `row` order) containing `x`.
fn locate(row: &[usize], left: &[f64], x: f64) -> usize {
    let mut found = row[0];
    for &a in row {
        if left[a] <= x {
            found = a;
        } else {
            break;
        }
    }
    found
}

/// A standard interval exchange transformation on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Iet {
    perm: Permutation,
    lengths: Vec<f64>,
}

impl Iet {
    /// Validates positivity and unit total length.
    pub fn new(perm: Permutation, lengths: Vec<f64>) -> Result<Self> {
        check_lengths(perm.dim(), &lengths)?;
        Ok(Iet { perm, lengths })
    }

    /// The combinatorial datum.
    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Interval lengths indexed by letter.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Translation applied on each interval: `δ = Ω λ`.
    pub fn displacement(&self) -> Vec<f64> {
        omega_matrix(&self.perm)
            .iter()
            .map(|row| row.iter().zip(&self.lengths).map(|(&o, l)| o as f64 * l).sum())
            .collect()
    }

    /// Image of a point of `[0, 1)`.
    pub fn apply(&self, x: f64) -> f64 {
        let left = left_endpoints(self.perm.top_row(), &self.lengths);
        let a = locate(self.perm.top_row(), &left, x);
        x + self.displacement()[a]
    }
}

/// An affine interval exchange with log-slope vector `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aiet {
    perm: Permutation,
    lengths: Vec<f64>,
    logslopes: Vec<f64>,
}

impl Aiet {
    /// Validates lengths and the tiling identity `Σ e^{ω_α} λ_α = 1`.
    pub fn new(perm: Permutation, lengths: Vec<f64>, logslopes: Vec<f64>) -> Result<Self> {
        check_lengths(perm.dim(), &lengths)?;
        if logslopes.len() != perm.dim() {
            return Err(Error::DimensionMismatch { expected: perm.dim(), found: logslopes.len() });
        }
        let image = image_total(&lengths, &logslopes);
        if (image - 1.0).abs() > TILING_TOL {
            return Err(Error::InvalidLengths(format!(
                "image intervals have total length {image}, expected 1"
            )));
        }
        Ok(Aiet { perm, lengths, logslopes })
    }

    /// The combinatorial datum.
    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Interval lengths indexed by letter.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Log-slopes indexed by letter.
    pub fn logslopes(&self) -> &[f64] {
        &self.logslopes
    }

    /// Total length of the image intervals; equals 1 for a valid exchange.
    pub fn image_total(&self) -> f64 {
        image_total(&self.lengths, &self.logslopes)
    }

    /// Image of a point of `[0, 1)`.
    pub fn apply(&self, x: f64) -> f64 {
        let left = left_endpoints(self.perm.top_row(), &self.lengths);
        let a = locate(self.perm.top_row(), &left, x);
        let widths: Vec<f64> = self
            .lengths
            .iter()
            .zip(&self.logslopes)
            .map(|(l, w)| l * w.exp())
            .collect();
        let image_left = left_endpoints(self.perm.bottom_row(), &widths);
        image_left[a] + self.logslopes[a].exp() * (x - left[a])
    }
}

fn image_total(lengths: &[f64], logslopes: &[f64]) -> f64 {
    lengths.iter().zip(logslopes).map(|(l, w)| l * w.exp()).sum()
}
