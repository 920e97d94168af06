//! Tower itineraries of a Rauzy loop, stored as a concatenation graph.
//!
//! Each word is a node of a directed acyclic graph whose leaves are single
//! letters, so words of any length are represented in space linear in the
//! number of moves. Words up to [`EXPLICIT_LIMIT`] letters in total are also
//! kept as flat vectors for fast random access.

use crate::rauzy::MoveType;

/// Total word length up to which flat copies of the words are stored.
pub const EXPLICIT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Leaf(usize),
    Cat(usize, usize),
}

/// Tower words `w_α` of a loop: `w_α[i]` is the letter of the `i`-th floor of the tower over `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerTable {
    nodes: Vec<Node>,
    node_len: Vec<u64>,
    roots: Vec<usize>,
    explicit: Option<Vec<Vec<usize>>>,
}

impl TowerTable {
    /// Words of the empty loop: `w_α = (α)`.
    pub fn identity(d: usize) -> Self {
        TowerTable {
            nodes: (0..d).map(Node::Leaf).collect(),
            node_len: vec![1; d],
            roots: (0..d).collect(),
            explicit: None,
        }
    }

    /// Applies the substitution of one move with the given winner and loser.
    pub fn push_move(&mut self, kind: MoveType, winner: usize, loser: usize) {
        let (w, l) = (self.roots[winner], self.roots[loser]);
        let (first, second) = match kind {
            MoveType::Top => (l, w),
            MoveType::Bottom => (w, l),
        };
        self.nodes.push(Node::Cat(first, second));
        self.node_len.push(self.node_len[first] + self.node_len[second]);
        self.roots[loser] = self.nodes.len() - 1;
        self.explicit = None;
    }

    /// Stores flat copies of the words when their total length is within [`EXPLICIT_LIMIT`].
    pub fn materialize(&mut self) {
        if self.total_len() <= EXPLICIT_LIMIT {
            let words = (0..self.dim()).map(|a| self.walk(a).collect()).collect();
            self.explicit = Some(words);
        }
    }

    /// Alphabet size.
    pub fn dim(&self) -> usize {
        self.roots.len()
    }

    /// Tower height `q_α = |w_α|`.
    pub fn len(&self, a: usize) -> u64 {
        self.node_len[self.roots[a]]
    }

    /// Sum of all tower heights, the number of floors.
    pub fn total_len(&self) -> u64 {
        (0..self.dim()).map(|a| self.len(a)).sum()
    }

    /// Whether flat copies of the words are available.
    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    /// Flat word `w_α`, if materialized.
    pub fn word(&self, a: usize) -> Option<&[usize]> {
        self.explicit.as_ref().map(|w| w[a].as_slice())
    }

    /// Letters of `w_α` in order.
    pub fn letters(&self, a: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.explicit {
            Some(words) => Box::new(words[a].iter().copied()),
            None => Box::new(self.walk(a)),
        }
    }

    /// Prefix Birkhoff sums `S_i(v) = Σ_{k<i} v[w_α[k]]` for `0 ≤ i < q_α`, paired with `w_α[i]`.
    pub fn prefix_sums<'a>(&'a self, a: usize, v: &'a [f64]) -> impl Iterator<Item = (usize, f64)> + 'a {
        let mut acc = 0.0;
        self.letters(a).map(move |b| {
            let s = acc;
            acc += v[b];
            (b, s)
        })
    }

    /// Occurrence counts `#{i : w_α[i] = β}` as a matrix indexed `[α][β]`.
    pub fn counts(&self) -> Vec<Vec<u64>> {
        let d = self.dim();
        let mut memo: Vec<Option<Vec<u64>>> = vec![None; self.nodes.len()];
        for idx in 0..self.nodes.len() {
            let row = match self.nodes[idx] {
                Node::Leaf(a) => {
                    let mut r = vec![0; d];
                    r[a] = 1;
                    r
                }
                Node::Cat(x, y) => {
                    let (rx, ry) = (memo[x].as_ref().unwrap(), memo[y].as_ref().unwrap());
                    rx.iter().zip(ry).map(|(p, q)| p + q).collect()
                }
            };
            memo[idx] = Some(row);
        }
        self.roots.iter().map(|&r| memo[r].clone().unwrap()).collect()
    }

    /// Weighted matrix `M(v)[α][β] = Σ_{i : w_α[i] = β} e^{S_i(v)}`.
    pub fn weighted(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let (mut m, shift) = self.weighted_scaled(v, 1.0);
        let scale = shift.exp();
        m.iter_mut().flatten().for_each(|x| *x *= scale);
        m
    }

    /// Weighted matrix for `t·v` divided by `e^{shift}`, where `shift` is the largest exponent.
    ///
    /// Returns the scaled matrix and `shift`; the unscaled matrix is `e^{shift}` times the result.
    pub fn weighted_scaled(&self, v: &[f64], t: f64) -> (Vec<Vec<f64>>, f64) {
        let d = self.dim();
        let mut shift = f64::NEG_INFINITY;
        for a in 0..d {
            for (_, s) in self.prefix_sums(a, v) {
                shift = shift.max(t * s);
            }
        }
        let mut m = vec![vec![0.0; d]; d];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, s) in self.prefix_sums(a, v) {
                row[b] += (t * s - shift).exp();
            }
        }
        (m, shift)
    }

    /// Derivative in `t` of the scaled weighted matrix: entries `Σ S_i e^{t S_i − shift}`.
    pub fn weighted_derivative_scaled(&self, v: &[f64], t: f64, shift: f64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, s) in self.prefix_sums(a, v) {
                row[b] += s * (t * s - shift).exp();
            }
        }
        m
    }

    fn walk(&self, a: usize) -> Walk<'_> {
        Walk { table: self, stack: vec![self.roots[a]] }
    }
}

struct Walk<'a> {
    table: &'a TowerTable,
    stack: Vec<usize>,
}

impl Iterator for Walk<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while let Some(n) = self.stack.pop() {
            match self.table.nodes[n] {
                Node::Leaf(a) => return Some(a),
                Node::Cat(x, y) => {
                    self.stack.push(y);
                    self.stack.push(x);
                }
            }
        }
        None
    }
}
