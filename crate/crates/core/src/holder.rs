//! The renormalization graph on tower floors, maximum and minimum cycle means of
//! its edge weights, and the supremal Hölder exponents of the conjugacy between
//! the exchange and its affine deformation and of its inverse.
//!
//! A vertex `(α, i)` is the `i`-th floor of the tower over `α`; it lies in the
//! interval of the letter `w_α[i]`. There is an edge `(α₀, i₀) → (α₁, i₁)` when
//! the floor `(α₁, i₁)` lies in the interval of `α₀`.

use serde::Serialize;

use crate::dimension::{self, ConformalWeights, WeightMode};
use crate::error::{Error, Result};
use crate::rauzy::SelfSimilarSystem;
use crate::spectral::{SlopeClass, SlopeDecomposition};
use crate::value::Value;

/// Default cap on the number of elementary cycles listed by enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Relative tolerance for `α(ω) = ρ_T`.
pub const FULL_ALPHA_TOL: f64 = 1e-9;

/// Depth of the path maxima used to bracket the maximum cycle mean.
pub const PATH_DEPTH: usize = 20;

/// Directed graph of tower floors with the edge weight `ϑ_−`; the weight `ϑ_+` is its negative.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormGraph {
    states: Vec<(usize, usize)>,
    succ: Vec<Vec<(usize, f64)>>,
}

/// Which weight a cycle mean refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `ϑ_−`.
    Minus,
    /// `ϑ_+ = −ϑ_−`.
    Plus,
}

impl RenormGraph {
    /// Graph from explicit adjacency lists `(target, ϑ_−)`, with placeholder state labels.
    pub fn from_edges(succ: Vec<Vec<(usize, f64)>>) -> Self {
        let states = (0..succ.len()).map(|v| (v, 0)).collect();
        RenormGraph { states, succ }
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Whether the graph has no vertex.
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Tower letter and floor of each vertex.
    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    /// Outgoing edges `(target, ϑ_−)` of a vertex.
    pub fn successors(&self, v: usize) -> &[(usize, f64)] {
        &self.succ[v]
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Weight of the edge `u → v`, if present.
    pub fn weight(&self, u: usize, v: usize, which: Weight) -> Option<f64> {
        self.succ[u].iter().find(|e| e.0 == v).map(|e| match which {
            Weight::Minus => e.1,
            Weight::Plus => -e.1,
        })
    }

    fn signed(&self, which: Weight) -> Vec<Vec<(usize, f64)>> {
        match which {
            Weight::Minus => self.succ.clone(),
            Weight::Plus => self.succ.iter().map(|r| r.iter().map(|&(v, w)| (v, -w)).collect()).collect(),
        }
    }

    /// Whether every vertex reaches and is reached from vertex 0.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut pred = vec![Vec::new(); n];
        for (u, row) in self.succ.iter().enumerate() {
            for &(v, _) in row {
                pred[v].push(u);
            }
        }
        let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in adj(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(&|u| self.succ[u].iter().map(|e| e.0).collect()) && reach(&|u| pred[u].clone())
    }

    /// Sum of `ϑ` along a closed vertex sequence.
    pub fn cycle_mean(&self, cycle: &[usize], which: Weight) -> Option<f64> {
        if cycle.is_empty() {
            return None;
        }
        let mut total = 0.0;
        for (k, &u) in cycle.iter().enumerate() {
            total += self.weight(u, cycle[(k + 1) % cycle.len()], which)?;
        }
        Some(total / cycle.len() as f64)
    }
}

/// Conformal weights of an invariant slope vector in exact Perron-Frobenius mode.
pub fn central_weights(sys: &SelfSimilarSystem, omega_c: &[f64]) -> Result<ConformalWeights> {
    let defect = dimension::invariance_defect(sys, omega_c);
    if defect > dimension::INVARIANCE_TOL {
        return Err(Error::NonInvariantOmega(defect));
    }
    let c = dimension::central_pf(sys, omega_c)?;
    let tiling_residual = (c.left.iter().zip(omega_c).map(|(n, w)| n * w.exp()).sum::<f64>() - 1.0).abs();
    Ok(ConformalWeights { nu: c.left, rho_nu: c.rho, mode: WeightMode::ExactPf, iterations: 0, tiling_residual })
}

/// Builds the graph with `ϑ_−((α₀,i₀)→(α₁,i₁)) = ρ_c − S_{i₁}(ω_c) − log ℓ^c_{α₁} + log ℓ^c_{α₀}`.
pub fn build_graph(sys: &SelfSimilarSystem, omega_c: &[f64], weights: &ConformalWeights) -> Result<RenormGraph> {
    let defect = dimension::invariance_defect(sys, omega_c);
    if defect > dimension::INVARIANCE_TOL || weights.mode != WeightMode::ExactPf {
        return Err(Error::NonInvariantOmega(defect));
    }
    let towers = sys.towers();
    let d = sys.dim();
    let log_ell: Vec<f64> = weights.nu.iter().map(|x| x.ln()).collect();
    let mut states = Vec::new();
    let mut letter = Vec::new();
    let mut prefix = Vec::new();
    for a in 0..d {
        for (i, (b, s)) in towers.prefix_sums(a, omega_c).enumerate() {
            states.push((a, i));
            letter.push(b);
            prefix.push(s);
        }
    }
    let mut inside: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (v, &b) in letter.iter().enumerate() {
        inside[b].push(v);
    }
    let succ = states
        .iter()
        .map(|&(a0, _)| {
            inside[a0]
                .iter()
                .map(|&v| {
                    let a1 = states[v].0;
                    (v, weights.rho_nu - prefix[v] - log_ell[a1] + log_ell[a0])
                })
                .collect()
        })
        .collect();
    Ok(RenormGraph { states, succ })
}

/// How a cycle mean was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMethod {
    /// Karp's dynamic program with an extracted witness.
    Karp,
    /// Listing of all elementary cycles.
    Enumeration,
}

/// Extremal cycle mean with an elementary witness cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleMeanResult {
    /// Mean weight of the witness cycle.
    pub value: f64,
    /// Vertices of the witness, starting at its smallest index.
    pub witness_cycle: Vec<usize>,
    /// Algorithm used.
    pub method: CycleMethod,
}

fn canonical(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some(k) = cycle.iter().enumerate().min_by_key(|e| e.1).map(|e| e.0) {
        cycle.rotate_left(k);
    }
    cycle
}

fn mean_of(adj: &[Vec<(usize, f64)>], cycle: &[usize]) -> f64 {
    let n = cycle.len();
    let total: f64 = (0..n)
        .map(|k| {
            let (u, v) = (cycle[k], cycle[(k + 1) % n]);
            adj[u].iter().find(|e| e.0 == v).expect("cycle edge").1
        })
        .sum();
    total / n as f64
}

/// Maximum over walks of `n` edges of the weight total ending at each vertex, with predecessors.
fn walk_table(adj: &[Vec<(usize, f64)>], n: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let v = adj.len();
    let mut best = vec![vec![f64::NEG_INFINITY; v]; n + 1];
    let mut pred = vec![vec![usize::MAX; v]; n + 1];
    best[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        for u in 0..v {
            let base = best[k - 1][u];
            if base == f64::NEG_INFINITY {
                continue;
            }
            for &(w, wt) in &adj[u] {
                let cand = base + wt;
                if cand > best[k][w] {
                    best[k][w] = cand;
                    pred[k][w] = u;
                }
            }
        }
    }
    (best, pred)
}

/// Splits a walk into elementary cycles and returns the one of largest mean.
fn best_cycle_in_walk(adj: &[Vec<(usize, f64)>], walk: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut stack: Vec<usize> = Vec::new();
    let mut position = vec![usize::MAX; adj.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &x in walk {
        if position[x] != usize::MAX {
            let start = position[x];
            let cycle: Vec<usize> = stack[start..].to_vec();
            for &y in &cycle {
                position[y] = usize::MAX;
            }
            stack.truncate(start);
            let cycle = canonical(cycle);
            let m = mean_of(adj, &cycle);
            if best.as_ref().is_none_or(|b| m > b.0) {
                best = Some((m, cycle));
            }
        }
        position[x] = stack.len();
        stack.push(x);
    }
    best
}

/// Cycle in the subgraph of edges that are tight for the potentials of `w − value`.
fn critical_cycle(adj: &[Vec<(usize, f64)>], value: f64) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut p = vec![0.0f64; n];
    for _ in 0..n {
        for u in 0..n {
            for &(v, w) in &adj[u] {
                p[v] = p[v].max(p[u] + w - value);
            }
        }
    }
    let scale = 1e-9 * (1.0 + value.abs()) * n as f64;
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|u| adj[u].iter().filter(|&&(v, w)| p[u] + w - value >= p[v] - scale).map(|e| e.0).collect())
        .collect();
    let mut color = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for s in 0..n {
        if color[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        color[s] = 1;
        while let Some(&mut (u, ref mut k)) = stack.last_mut() {
            if *k < tight[u].len() {
                let v = tight[u][*k];
                *k += 1;
                if color[v] == 1 {
                    let mut cycle = vec![u];
                    let mut x = u;
                    while x != v {
                        x = parent[x];
                        cycle.push(x);
                    }
                    cycle.reverse();
                    return Some(canonical(cycle));
                } else if color[v] == 0 {
                    color[v] = 1;
                    parent[v] = u;
                    stack.push((v, 0));
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn karp(adj: &[Vec<(usize, f64)>]) -> Result<(f64, Vec<usize>)> {
    let n = adj.len();
    let (best, pred) = walk_table(adj, n);
    let mut value = f64::NEG_INFINITY;
    let mut end = usize::MAX;
    for v in 0..n {
        if best[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| best[k][v] != f64::NEG_INFINITY)
            .map(|k| (best[n][v] - best[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        if worst > value {
            value = worst;
            end = v;
        }
    }
    if end == usize::MAX {
        return Err(Error::NotStronglyConnected);
    }
    let mut walk = vec![end];
    let mut x = end;
    for k in (1..=n).rev() {
        x = pred[k][x];
        walk.push(x);
    }
    walk.reverse();
    let tol = 1e-9 * (1.0 + value.abs());
    match best_cycle_in_walk(adj, &walk) {
        Some((m, cycle)) if m >= value - tol => Ok((m, cycle)),
        _ => {
            let cycle = critical_cycle(adj, value)
                .ok_or_else(|| Error::NoConvergence("no critical cycle for the maximum mean".into()))?;
            Ok((mean_of(adj, &cycle), cycle))
        }
    }
}

/// Maximum mean of the chosen weight over cycles, by Karp's algorithm.
pub fn max_mean_cycle(g: &RenormGraph, which: Weight) -> Result<CycleMeanResult> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let (value, witness_cycle) = karp(&g.signed(which))?;
    Ok(CycleMeanResult { value, witness_cycle, method: CycleMethod::Karp })
}

/// Maximum over walks with `n` edges of the mean of the chosen weight.
pub fn path_max_mean(g: &RenormGraph, which: Weight, n: usize) -> f64 {
    let (best, _) = walk_table(&g.signed(which), n);
    best[n].iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) / n as f64
}

/// Extremal cycle means of `ϑ_−` from a listing of elementary cycles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationResult {
    /// Largest mean and its cycle.
    pub max: CycleMeanResult,
    /// Smallest mean and its cycle.
    pub min: CycleMeanResult,
    /// Number of cycles listed.
    pub cycles: u64,
    /// False when the listing stopped at the cap.
    pub complete: bool,
}

struct Johnson<'a> {
    adj: &'a [Vec<(usize, f64)>],
    start: usize,
    blocked: Vec<bool>,
    blockers: Vec<Vec<usize>>,
    stack: Vec<usize>,
    sums: Vec<f64>,
    cycles: u64,
    cap: u64,
    max: (f64, Vec<usize>),
    min: (f64, Vec<usize>),
}

impl Johnson<'_> {
    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(x) = work.pop() {
            if self.blocked[x] {
                self.blocked[x] = false;
                work.append(&mut self.blockers[x]);
            }
        }
    }

    fn record(&mut self, closing: f64) {
        self.cycles += 1;
        let len = self.stack.len();
        let mean = (self.sums[len - 1] + closing) / len as f64;
        if mean > self.max.0 {
            self.max = (mean, self.stack.clone());
        }
        if mean < self.min.0 {
            self.min = (mean, self.stack.clone());
        }
    }

    fn circuit(&mut self, v: usize) -> bool {
        let mut found = false;
        let base = self.sums.last().copied().unwrap_or(0.0);
        self.stack.push(v);
        self.blocked[v] = true;
        for k in 0..self.adj[v].len() {
            if self.cycles >= self.cap {
                break;
            }
            let (w, wt) = self.adj[v][k];
            if w < self.start {
                continue;
            }
            if w == self.start {
                self.record(wt);
                found = true;
            } else if !self.blocked[w] {
                self.sums.push(base + wt);
                let sub = self.circuit(w);
                self.sums.pop();
                found |= sub;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &(w, _) in &self.adj[v] {
                if w >= self.start && !self.blockers[w].contains(&v) {
                    self.blockers[w].push(v);
                }
            }
        }
        self.stack.pop();
        found
    }
}

/// Lists elementary cycles (Johnson's algorithm) up to `cap`, tracking the extremal means of `ϑ_−`.
pub fn enumerate_cycles(g: &RenormGraph, cap: u64) -> Result<EnumerationResult> {
    let n = g.len();
    let mut j = Johnson {
        adj: &g.succ,
        start: 0,
        blocked: vec![false; n],
        blockers: vec![Vec::new(); n],
        stack: Vec::new(),
        sums: Vec::new(),
        cycles: 0,
        cap,
        max: (f64::NEG_INFINITY, Vec::new()),
        min: (f64::INFINITY, Vec::new()),
    };
    for s in 0..n {
        if j.cycles >= cap {
            break;
        }
        j.start = s;
        j.blocked.iter_mut().for_each(|b| *b = false);
        j.blockers.iter_mut().for_each(Vec::clear);
        j.sums.clear();
        j.sums.push(0.0);
        j.circuit(s);
    }
    if j.max.1.is_empty() {
        return Err(Error::NotStronglyConnected);
    }
    let complete = j.cycles < cap;
    let cycles = j.cycles;
    let wrap = |(_, cycle): (f64, Vec<usize>)| {
        let cycle = canonical(cycle);
        CycleMeanResult { value: mean_of(&g.succ, &cycle), witness_cycle: cycle, method: CycleMethod::Enumeration }
    };
    Ok(EnumerationResult { max: wrap(j.max), min: wrap(j.min), cycles, complete })
}

/// `ζ` and `ξ`: the largest and smallest mean of `ϑ_−` over elementary cycles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaXi {
    /// `ζ` with its witness cycle.
    pub zeta: CycleMeanResult,
    /// `ξ` with its witness cycle.
    pub xi: CycleMeanResult,
}

/// `ζ` and `ξ` of the graph, both by Karp's algorithm.
pub fn zeta_xi(g: &RenormGraph) -> Result<ZetaXi> {
    let zeta = max_mean_cycle(g, Weight::Minus)?;
    let plus = max_mean_cycle(g, Weight::Plus)?;
    let xi = CycleMeanResult { value: -plus.value, witness_cycle: plus.witness_cycle, method: plus.method };
    Ok(ZetaXi { zeta, xi })
}

/// Graph and cycle means for the central part of a decomposed slope vector.
pub fn zeta_xi_for(sys: &SelfSimilarSystem, decomp: &SlopeDecomposition) -> Result<(RenormGraph, ZetaXi)> {
    if decomp.class == SlopeClass::Unstable {
        return Err(Error::UnstableInput);
    }
    let omega_c = dimension::effective_central(decomp);
    let weights = central_weights(sys, &omega_c)?;
    let g = build_graph(sys, &omega_c, &weights)?;
    let zx = zeta_xi(&g)?;
    Ok((g, zx))
}

/// Supremal Hölder exponents of the conjugacy `h` and of its inverse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderExponents {
    /// Exponent of `h`.
    pub h_exp: Value,
    /// Exponent of `h⁻¹`.
    pub hinv_exp: Value,
}

/// Case split by slope class; `zx` is required for the zero and central-stable classes.
pub fn holder_exponents(
    sys: &SelfSimilarSystem,
    decomp: &SlopeDecomposition,
    zx: Option<&ZetaXi>,
) -> Result<HolderExponents> {
    let rho_t = sys.rho_t();
    let from_cycles = || -> Result<HolderExponents> {
        let zx = zx.ok_or_else(|| Error::InvalidInput("cycle means are required for this slope class".into()))?;
        Ok(HolderExponents {
            h_exp: Value::Finite(rho_t / zx.zeta.value),
            hinv_exp: Value::Finite(zx.xi.value / rho_t),
        })
    };
    match decomp.class {
        SlopeClass::Zero | SlopeClass::CentralStable => from_cycles(),
        SlopeClass::Stable => {
            let alpha = decomp
                .alpha_omega
                .ok_or_else(|| Error::InvalidInput("stable slope vector without contracting exponent".into()))?;
            if (alpha - rho_t).abs() <= FULL_ALPHA_TOL * rho_t {
                Ok(HolderExponents { h_exp: Value::Infinity, hinv_exp: Value::Infinity })
            } else {
                let e = Value::Finite(1.0 + alpha / rho_t);
                Ok(HolderExponents { h_exp: e, hinv_exp: e })
            }
        }
        SlopeClass::Unstable => Ok(HolderExponents { h_exp: Value::Finite(0.0), hinv_exp: Value::Undefined }),
    }
}
