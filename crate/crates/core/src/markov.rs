//! The renormalization Markov chain on tower floors, its stationary law, and
//! seeded Monte-Carlo estimators of `𝒢`, `ℋ` and of local dimensions.
//!
//! Random numbers come from `ChaCha8Rng::seed_from_u64`, one stream per chain,
//! with chain seeds derived from the user seed by SplitMix64. Batch means are
//! aggregated in a fixed order, so results are identical for every thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimension::{self, CentralPf};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rauzy::SelfSimilarSystem;
use crate::spectral::{pushed_forward, SlopeClass, SlopeDecomposition, SpectralData};

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 100;

/// Default number of independent chains.
pub const DEFAULT_CHAINS: usize = 4;

/// Largest depth of the unstable local-dimension recursion.
pub const UNSTABLE_MAX_DEPTH: usize = 300;

/// Base measure of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Lebesgue measure of the exchange.
    Invariant,
    /// Conformal measure of the central slope vector.
    Conformal,
}

impl Side {
    /// Name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Side::Invariant => "invariant",
            Side::Conformal => "conformal",
        }
    }
}

/// Transition law on tower floors. Rows depend only on the tower letter of the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    side: Side,
    states: Vec<(usize, usize)>,
    letter: Vec<usize>,
    prefix: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    cdf: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    stationary_cdf: Vec<f64>,
    base: CentralPf,
}

fn cumulative(p: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.map(|x| {
        acc += x;
        acc
    })
    .collect()
}

fn sample(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

/// Chain with base lengths `λ` (invariant side) or `ℓ^c` of `M(ω_c)` (conformal side).
pub fn transition_matrix(sys: &SelfSimilarSystem, omega_c: &[f64], side: Side) -> Result<TransitionMatrix> {
    let defect = dimension::invariance_defect(sys, omega_c);
    if defect > dimension::INVARIANCE_TOL {
        return Err(Error::NonInvariantOmega(defect));
    }
    let towers = sys.towers();
    let d = sys.dim();
    let base = match side {
        Side::Invariant => dimension::central_pf(sys, &vec![0.0; d])?,
        Side::Conformal => dimension::central_pf(sys, omega_c)?,
    };
    let potential: Vec<f64> = match side {
        Side::Invariant => vec![0.0; d],
        Side::Conformal => omega_c.to_vec(),
    };
    let mut states = Vec::new();
    let mut letter = Vec::new();
    let mut prefix = Vec::new();
    let mut floor_log_mass = Vec::new();
    for a in 0..d {
        for (i, ((b, s), (_, sc))) in towers.prefix_sums(a, &potential).zip(towers.prefix_sums(a, omega_c)).enumerate() {
            states.push((a, i));
            letter.push(b);
            prefix.push(sc);
            floor_log_mass.push(-base.rho + s + base.left[a].ln());
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for (v, &b) in letter.iter().enumerate() {
        rows[b].push((v, (floor_log_mass[v] - base.left[b].ln()).exp()));
    }
    let cdf = rows.iter().map(|r| cumulative(r.iter().map(|e| e.1))).collect();
    let raw: Vec<f64> = (0..states.len()).map(|v| floor_log_mass[v].exp() * base.right[letter[v]]).collect();
    let total: f64 = raw.iter().sum();
    let stationary: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let stationary_cdf = cumulative(stationary.iter().copied());
    Ok(TransitionMatrix { side, states, letter, prefix, rows, cdf, stationary, stationary_cdf, base })
}

impl TransitionMatrix {
    /// Base measure of the chain.
    pub fn side(&self) -> Side {
        self.side
    }

    /// Tower letter and floor of each state.
    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Whether there are no states.
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Closed-form stationary law `π(α,i) ∝ m(floor (α,i)) θ_{w_α[i]}`.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Outgoing transitions `(target, probability)` of a state.
    pub fn transitions(&self, state: usize) -> &[(usize, f64)] {
        &self.rows[self.states[state].0]
    }

    /// Dense transition matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|u| {
                let mut row = vec![0.0; n];
                for &(v, p) in self.transitions(u) {
                    row[v] = p;
                }
                row
            })
            .collect()
    }

    /// `ϑ_−` of the central slope vector on an edge into `v`: `ρ_c − S_v − log ℓ^c_{α(v)} + log ℓ^c_{w(v)}`.
    fn theta_minus(&self, central: &CentralPf) -> Vec<f64> {
        (0..self.len())
            .map(|v| {
                central.rho - self.prefix[v] - central.left[self.states[v].0].ln()
                    + central.left[self.letter[v]].ln()
            })
            .collect()
    }

    fn start(&self, rng: &mut ChaCha8Rng) -> usize {
        sample(&self.stationary_cdf, rng.gen::<f64>())
    }

    fn step(&self, u: usize, rng: &mut ChaCha8Rng) -> usize {
        let a = self.states[u].0;
        self.rows[a][sample(&self.cdf[a], rng.gen::<f64>())].0
    }
}

/// A sampled path with running Birkhoff sums of an edge functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSample {
    /// Seed of the generator.
    pub seed: u64,
    /// States visited, starting from a stationary draw; one more entry than `birkhoff_sums`.
    pub path: Vec<usize>,
    /// `Σ_{j<n} f(path[j], path[j+1])` for `n = 1, …, length`.
    pub birkhoff_sums: Vec<f64>,
}

/// Samples `length` transitions and accumulates `functional(u, v)` over them.
pub fn simulate_chain(
    p: &TransitionMatrix,
    seed: u64,
    length: usize,
    functional: &dyn Fn(usize, usize) -> f64,
) -> ChainSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = p.start(&mut rng);
    let mut path = Vec::with_capacity(length + 1);
    let mut birkhoff_sums = Vec::with_capacity(length);
    let mut sum = Kahan::default();
    path.push(u);
    for _ in 0..length {
        let v = p.step(u, &mut rng);
        sum.add(functional(u, v));
        birkhoff_sums.push(sum.value());
        path.push(v);
        u = v;
    }
    ChainSample { seed, path, birkhoff_sums }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    /// Adds one term.
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    /// Current total.
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// SplitMix64 output for `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of chain `index` derived from the user seed.
pub fn chain_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Monte-Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    /// Mean of the batch means.
    pub estimate: f64,
    /// Sample standard deviation of the batch means over `√batches`.
    pub stderr: f64,
    /// Transitions actually used: `batches · ⌊length / batches⌋`.
    pub steps: usize,
    /// Number of batches.
    pub batches: usize,
    /// Number of independent chains.
    pub chains: usize,
}

/// Sampling plan of [`birkhoff_information`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plan {
    /// Total number of transitions requested.
    pub length: usize,
    /// Number of batches; must be a multiple of `chains`.
    pub batches: usize,
    /// Number of independent chains.
    pub chains: usize,
}

impl Plan {
    /// Plan with the default batch and chain counts.
    pub fn new(length: usize) -> Self {
        Plan { length, batches: DEFAULT_BATCHES, chains: DEFAULT_CHAINS }
    }
}

/// Average of `ϑ_−(ω_c)` along the chain: estimates `𝒢` on the invariant side and `ℋ` on the conformal side.
pub fn birkhoff_information(
    sys: &SelfSimilarSystem,
    decomp: &SlopeDecomposition,
    side: Side,
    seed: u64,
    plan: Plan,
    exec: Execution,
) -> Result<Estimate> {
    if decomp.class == SlopeClass::Unstable {
        return Err(Error::UnstableInput);
    }
    let Plan { length, batches, chains } = plan;
    if chains == 0 || batches < 2 || batches % chains != 0 {
        return Err(Error::InvalidInput(format!(
            "batches ({batches}) must be at least 2 and a multiple of chains ({chains})"
        )));
    }
    let per_batch = length / batches;
    if per_batch == 0 {
        return Err(Error::InvalidInput(format!("length {length} is shorter than the {batches} batches")));
    }
    let omega_c = dimension::effective_central(decomp);
    let p = transition_matrix(sys, &omega_c, side)?;
    let central = dimension::central_pf(sys, &omega_c)?;
    let theta = p.theta_minus(&central);
    let per_chain = batches / chains;
    let indices: Vec<usize> = (0..chains).collect();
    let means: Vec<Vec<f64>> = exec.map(&indices, |&c| {
        let mut rng = ChaCha8Rng::seed_from_u64(chain_seed(seed, c));
        let mut u = p.start(&mut rng);
        (0..per_chain)
            .map(|_| {
                let mut sum = Kahan::default();
                for _ in 0..per_batch {
                    u = p.step(u, &mut rng);
                    sum.add(theta[u]);
                }
                sum.value() / per_batch as f64
            })
            .collect()
    });
    let all: Vec<f64> = means.into_iter().flatten().collect();
    let mut total = Kahan::default();
    all.iter().for_each(|&m| total.add(m));
    let estimate = total.value() / batches as f64;
    let mut spread = Kahan::default();
    all.iter().for_each(|&m| spread.add((m - estimate) * (m - estimate)));
    let variance = spread.value() / (batches - 1) as f64;
    let stderr = (variance / batches as f64).sqrt();
    Ok(Estimate { estimate, stderr, steps: per_batch * batches, batches, chains })
}

/// Coding-level local-dimension estimates along one sampled path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalDimensionTrace {
    /// Seed of the sampled path.
    pub seed: u64,
    /// `ratio[n−1] = nρ_T / information[n−1]` for `n = 1, …, depth`.
    pub ratio: Vec<f64>,
    /// `−log` of the Lebesgue measure of the affine level-`n` atom, up to bounded terms.
    pub information: Vec<f64>,
}

impl LocalDimensionTrace {
    /// Mean increment `information[n] − information[n−1]` over depths `from < n ≤ to`.
    pub fn mean_increment(&self, from: usize, to: usize) -> f64 {
        (self.information[to - 1] - self.information[from - 1]) / (to - from) as f64
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Local-dimension ratios along a path of the Lebesgue chain.
///
/// For slope vectors without expanding part, the information is the Birkhoff sum
/// of `ϑ_−(ω_c)`. For unstable ones it is rebuilt level by level from the weighted
/// matrices of the pushed-forward slopes `M^j ω`, in the log domain.
pub fn empirical_local_dimension(
    sys: &SelfSimilarSystem,
    spectrum: &SpectralData,
    decomp: &SlopeDecomposition,
    seed: u64,
    depth: usize,
) -> Result<LocalDimensionTrace> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be positive".into()));
    }
    let d = sys.dim();
    let p = transition_matrix(sys, &vec![0.0; d], Side::Invariant)?;
    let sample = simulate_chain(&p, seed, depth - 1, &|_, _| 0.0);
    let path = sample.path;
    let rho_t = sys.rho_t();
    let mut information = Vec::with_capacity(depth);
    if decomp.class != SlopeClass::Unstable {
        let omega_c = dimension::effective_central(decomp);
        let central = dimension::central_pf(sys, &omega_c)?;
        let theta = transition_matrix(sys, &omega_c, Side::Invariant)?.theta_minus(&central);
        let mut sum = Kahan::default();
        for &v in &path {
            sum.add(theta[v]);
            information.push(sum.value());
        }
    } else {
        if depth > UNSTABLE_MAX_DEPTH {
            return Err(Error::InvalidInput(format!(
                "unstable local dimension depth is limited to {UNSTABLE_MAX_DEPTH}"
            )));
        }
        let towers = sys.towers();
        let mut log_x = vec![0.0; d];
        let mut floor_sum = Kahan::default();
        for (j, &v) in path.iter().enumerate() {
            let omega_j = pushed_forward(spectrum, decomp, j);
            let (a, i) = p.states()[v];
            let s_v = towers.prefix_sums(a, &omega_j).nth(i).expect("floor index").1;
            floor_sum.add(-s_v);
            log_x = (0..d)
                .map(|alpha| log_sum_exp(towers.prefix_sums(alpha, &omega_j).map(|(b, s)| s + log_x[b])))
                .collect();
            information.push(floor_sum.value() + log_sum_exp(log_x.iter().copied()));
        }
    }
    if information.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("local-dimension information".into()));
    }
    let ratio = information.iter().enumerate().map(|(k, &info)| (k + 1) as f64 * rho_t / info).collect();
    Ok(LocalDimensionTrace { seed, ratio, information })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Permutation;
    use crate::pf::vec_mat;
    use crate::rauzy::{build_self_similar, RauzyLoop};

    fn golden() -> SelfSimilarSystem {
        let lp = RauzyLoop::parse(Permutation::from_rows("AB", "BA").unwrap(), "tb").unwrap();
        build_self_similar(&lp).unwrap()
    }

    #[test]
    fn golden_lebesgue_chain() {
        let sys = golden();
        let p = transition_matrix(&sys, &[0.0, 0.0], Side::Invariant).unwrap();
        assert_eq!(p.len(), 5);
        let dense = p.dense();
        for row in &dense {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let image = vec_mat(p.stationary(), &dense);
        for (a, b) in image.iter().zip(p.stationary()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_functional_and_reproducibility() {
        let sys = golden();
        let p = transition_matrix(&sys, &[0.0, 0.0], Side::Invariant).unwrap();
        let a = simulate_chain(&p, 7, 1000, &|_, _| 1.0);
        let b = simulate_chain(&p, 7, 1000, &|_, _| 1.0);
        assert_eq!(a, b);
        assert_eq!(a.birkhoff_sums[999], 1000.0);
    }

    #[test]
    fn splitmix_reference_value() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
