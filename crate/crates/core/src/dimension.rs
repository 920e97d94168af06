//! Hausdorff dimensions of the invariant and conformal measures, the pressure
//! curve `ρ(t)` with its derivative, the differential relation between the two
//! dimension curves, Kullback-Leibler cross-checks, and conformal weights.
//!
//! Every weighted matrix is evaluated through [`TowerTable::weighted_scaled`],
//! so large exponents never overflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pf::{self, PfPair};
use crate::rauzy::{SelfSimilarSystem, TowerTable};
use crate::spectral::{pushed_forward, SlopeClass, SlopeDecomposition, SpectralData};
use crate::value::Value;

/// Hilbert projective diameter below which cone iteration stops.
pub const CONE_TOL: f64 = 1e-12;

/// Maximum number of matrix products in cone iteration.
pub const CONE_CAP: usize = 10_000;

/// Smallest `|t|` at which the differential relation is evaluated.
pub const RELATION_MIN_T: f64 = 0.25;

/// Step of the central differences in the differential relation.
pub const RELATION_STEP: f64 = 1e-4;

/// Relative tolerance on `‖Mω − ω‖∞` for a slope vector to count as invariant.
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Relative defect `‖Mω − ω‖∞ / max(1, ‖ω‖∞)`.
pub fn invariance_defect(sys: &SelfSimilarSystem, omega: &[f64]) -> f64 {
    let image = sys.apply_matrix(omega);
    let scale = omega.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    image.iter().zip(omega).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// Central part actually used by the closed forms: `ω_c` for central-stable vectors, zero otherwise.
pub fn effective_central(decomp: &SlopeDecomposition) -> Vec<f64> {
    match decomp.class {
        SlopeClass::CentralStable => decomp.omega_c.clone(),
        _ => vec![0.0; decomp.omega.len()],
    }
}

/// Perron-Frobenius data of the weighted matrix `M(ω)` for an invariant `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralPf {
    /// `log` of the Perron-Frobenius eigenvalue of `M(ω)`.
    pub rho: f64,
    /// Left eigenvector with unit sum.
    pub left: Vec<f64>,
    /// Right eigenvector with `⟨left, right⟩ = 1`.
    pub right: Vec<f64>,
}

fn scaled_pair(towers: &TowerTable, omega: &[f64], t: f64) -> Result<(PfPair, f64)> {
    let (m, shift) = towers.weighted_scaled(omega, t);
    Ok((pf::pf_pair(&m)?, shift))
}

/// Perron-Frobenius data of `M(ω)`; for `ω = 0` this is exactly `(ρ_T, λ, θ)`.
pub fn central_pf(sys: &SelfSimilarSystem, omega: &[f64]) -> Result<CentralPf> {
    if omega.iter().all(|&x| x == 0.0) {
        return Ok(CentralPf { rho: sys.rho_t(), left: sys.lambda().to_vec(), right: sys.theta().to_vec() });
    }
    let (pair, shift) = scaled_pair(sys.towers(), omega, 1.0)?;
    Ok(CentralPf { rho: pair.value.ln() + shift, left: pair.left, right: pair.right })
}

/// `ρ(t)`: logarithm of the Perron-Frobenius eigenvalue of `M(tω)`.
pub fn rho_of(sys: &SelfSimilarSystem, omega: &[f64], t: f64) -> Result<f64> {
    let (m, shift) = sys.towers().weighted_scaled(omega, t);
    let (r, _) = pf::left_pf(&m)?;
    Ok(r.ln() + shift)
}

/// `ρ'(t) = e^{−ρ(t)} ℓ(t) (dM/dt) θ(t)` from the normalized Perron-Frobenius pair of `M(tω)`.
pub fn rho_prime(sys: &SelfSimilarSystem, omega: &[f64], t: f64) -> Result<f64> {
    Ok(pressure(sys, omega, t)?.1)
}

/// `(ρ(t), ρ'(t))` from a single eigenpair computation.
pub fn pressure(sys: &SelfSimilarSystem, omega: &[f64], t: f64) -> Result<(f64, f64)> {
    let towers = sys.towers();
    let (pair, shift) = scaled_pair(towers, omega, t)?;
    let dm = towers.weighted_derivative_scaled(omega, t, shift);
    let derivative = pf::dot(&pf::vec_mat(&pair.left, &dm), &pair.right) / pair.value;
    Ok((pair.value.ln() + shift, derivative))
}

/// `Σ_α λ_α Σ_i θ_{w_α[i]} S_i(ω)` weighted by `e^{−ρ_T}`: the Lebesgue average of the prefix sums.
fn lebesgue_prefix_mean(sys: &SelfSimilarSystem, omega: &[f64]) -> f64 {
    let (lambda, theta) = (sys.lambda(), sys.theta());
    let towers = sys.towers();
    let scale = (-sys.rho_t()).exp();
    (0..sys.dim())
        .map(|a| {
            let inner: f64 = towers.prefix_sums(a, omega).map(|(b, s)| theta[b] * s).sum();
            scale * lambda[a] * inner
        })
        .sum()
}

/// `Σ_α ℓ_α Σ_i θ_{w_α[i]} e^{S_i(ω) − ρ} S_i(ω)`: the conformal average of the prefix sums.
fn conformal_prefix_mean(sys: &SelfSimilarSystem, omega: &[f64], c: &CentralPf) -> f64 {
    let towers = sys.towers();
    (0..sys.dim())
        .map(|a| {
            let inner: f64 =
                towers.prefix_sums(a, omega).map(|(b, s)| c.right[b] * (s - c.rho).exp() * s).sum();
            c.left[a] * inner
        })
        .sum()
}

/// `𝒢` for an invariant slope vector.
pub fn big_g_invariant(sys: &SelfSimilarSystem, omega: &[f64]) -> Result<f64> {
    let c = central_pf(sys, omega)?;
    Ok(c.rho - lebesgue_prefix_mean(sys, omega))
}

/// `ℋ` for an invariant slope vector.
pub fn big_h_invariant(sys: &SelfSimilarSystem, omega: &[f64]) -> Result<f64> {
    let c = central_pf(sys, omega)?;
    Ok(c.rho - conformal_prefix_mean(sys, omega, &c))
}

fn reject_unstable(decomp: &SlopeDecomposition) -> Result<()> {
    if decomp.class == SlopeClass::Unstable {
        Err(Error::UnstableInput)
    } else {
        Ok(())
    }
}

/// `𝒢(T, ω)`, which depends on `ω` through its central part only.
pub fn big_g(sys: &SelfSimilarSystem, decomp: &SlopeDecomposition) -> Result<f64> {
    reject_unstable(decomp)?;
    big_g_invariant(sys, &effective_central(decomp))
}

/// `ℋ(T, ω)`, which depends on `ω` through its central part only.
pub fn big_h(sys: &SelfSimilarSystem, decomp: &SlopeDecomposition) -> Result<f64> {
    reject_unstable(decomp)?;
    big_h_invariant(sys, &effective_central(decomp))
}

/// `𝒢` and `ℋ` rebuilt from Kullback-Leibler divergences between the Lebesgue and
/// conformal distributions of the floors above each letter.
pub fn kl_forms(sys: &SelfSimilarSystem, omega: &[f64], c: &CentralPf) -> (f64, f64) {
    let d = sys.dim();
    let (lambda, theta, rho_t) = (sys.lambda(), sys.theta(), sys.rho_t());
    let towers = sys.towers();
    let mut d_leb_nu = vec![0.0; d];
    let mut d_nu_leb = vec![0.0; d];
    for a in 0..d {
        for (b, s) in towers.prefix_sums(a, omega) {
            let leb = (-rho_t).exp() * lambda[a] / lambda[b];
            let log_leb = -rho_t + lambda[a].ln() - lambda[b].ln();
            let log_nu = -c.rho + s + c.left[a].ln() - c.left[b].ln();
            let nu = log_nu.exp();
            d_leb_nu[b] += leb * (log_leb - log_nu);
            d_nu_leb[b] += nu * (log_nu - log_leb);
        }
    }
    let g = rho_t + (0..d).map(|b| lambda[b] * theta[b] * d_leb_nu[b]).sum::<f64>();
    let h = rho_t - (0..d).map(|b| c.left[b] * c.right[b] * d_nu_leb[b]).sum::<f64>();
    (g, h)
}

/// Dimensions of the invariant measure of the affine exchange and of the conformal measure of the exchange.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    /// Slope class of `ω`.
    pub class: SlopeClass,
    /// `log` of the Perron-Frobenius eigenvalue of `M`.
    pub rho_t: f64,
    /// `log` of the Perron-Frobenius eigenvalue of `M(ω_c)`.
    pub rho_c: Option<f64>,
    /// `𝒢(T, ω)`.
    pub g: Option<f64>,
    /// `ℋ(T, ω)`.
    pub h: Option<f64>,
    /// Hausdorff dimension of the invariant measure.
    pub dim_invariant: Value,
    /// Hausdorff dimension of the conformal measure.
    pub dim_conformal: Value,
    /// `|𝒢 − 𝒢_KL|`.
    pub kl_g_residual: Option<f64>,
    /// `|ℋ − ℋ_KL|`.
    pub kl_h_residual: Option<f64>,
    /// Left Perron-Frobenius vector of `M(ω_c)` with unit sum.
    pub ell_c: Option<Vec<f64>>,
    /// Right Perron-Frobenius vector of `M(ω_c)` with `⟨ℓ^c, θ^c⟩ = 1`.
    pub theta_c: Option<Vec<f64>>,
}

/// Dimension report with the case split by slope class.
pub fn dimension_report(sys: &SelfSimilarSystem, decomp: &SlopeDecomposition) -> Result<DimensionReport> {
    let rho_t = sys.rho_t();
    if decomp.class == SlopeClass::Unstable {
        return Ok(DimensionReport {
            class: decomp.class,
            rho_t,
            rho_c: None,
            g: None,
            h: None,
            dim_invariant: Value::Finite(0.0),
            dim_conformal: Value::Unknown,
            kl_g_residual: None,
            kl_h_residual: None,
            ell_c: None,
            theta_c: None,
        });
    }
    let omega_c = effective_central(decomp);
    let c = central_pf(sys, &omega_c)?;
    let g = c.rho - lebesgue_prefix_mean(sys, &omega_c);
    let h = c.rho - conformal_prefix_mean(sys, &omega_c, &c);
    let (g_kl, h_kl) = kl_forms(sys, &omega_c, &c);
    let (dim_invariant, dim_conformal) = match decomp.class {
        SlopeClass::CentralStable => (rho_t / g, h / rho_t),
        _ => (1.0, 1.0),
    };
    for (x, what) in [(g, "G"), (h, "H"), (g_kl, "G from divergences"), (h_kl, "H from divergences")] {
        if !x.is_finite() {
            return Err(Error::NonFinite(what.into()));
        }
    }
    Ok(DimensionReport {
        class: decomp.class,
        rho_t,
        rho_c: Some(c.rho),
        g: Some(g),
        h: Some(h),
        dim_invariant: Value::Finite(dim_invariant),
        dim_conformal: Value::Finite(dim_conformal),
        kl_g_residual: Some((g - g_kl).abs()),
        kl_h_residual: Some((h - h_kl).abs()),
        ell_c: Some(c.left),
        theta_c: Some(c.right),
    })
}

/// How conformal weights were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Left Perron-Frobenius vector of `M(ω)` for invariant `ω`.
    ExactPf,
    /// Limit direction of products of weighted matrices along the slope orbit.
    ConeIterated,
}

/// Weights `ν_α` of the conformal measure on the intervals of the exchange.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalWeights {
    /// Weights with unit sum.
    pub nu: Vec<f64>,
    /// `log |ν^{(1)} M(ω)|₁` for the weights `ν^{(1)}` after one period.
    pub rho_nu: f64,
    /// Construction used.
    pub mode: WeightMode,
    /// Number of matrix products taken (zero in exact mode).
    pub iterations: usize,
    /// `|Σ_α e^{ω_α} ν_α − 1|`.
    pub tiling_residual: f64,
}

/// Largest Hilbert projective distance between two rows of a positive matrix.
pub fn hilbert_diameter(rows: &[Vec<f64>]) -> f64 {
    let mut diam = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[..i] {
            let (mut up, mut down) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (x, y) in a.iter().zip(b) {
                let r = x.ln() - y.ln();
                up = up.max(r);
                down = down.max(-r);
            }
            diam = diam.max(up + down);
        }
    }
    if diam.is_nan() {
        f64::INFINITY
    } else {
        diam
    }
}

fn normalize_total(m: &mut [Vec<f64>]) {
    let s: f64 = m.iter().flatten().sum();
    m.iter_mut().flatten().for_each(|x| *x /= s);
}

/// Limit direction of `M(ω^{(k+n−1)}) ⋯ M(ω^{(k)})` as `n` grows, where `ω^{(j)} = M^j ω`.
fn cone_direction(
    sys: &SelfSimilarSystem,
    spectrum: &SpectralData,
    decomp: &SlopeDecomposition,
    start: usize,
) -> Result<(Vec<f64>, usize)> {
    let towers = sys.towers();
    let d = sys.dim();
    let mut product: Option<Vec<Vec<f64>>> = None;
    for n in 0..CONE_CAP {
        let (w, _) = towers.weighted_scaled(&pushed_forward(spectrum, decomp, start + n), 1.0);
        let mut next = match product {
            None => w,
            Some(prev) => (0..d)
                .map(|a| (0..d).map(|j| (0..d).map(|b| w[a][b] * prev[b][j]).sum()).collect())
                .collect(),
        };
        normalize_total(&mut next);
        if hilbert_diameter(&next) < CONE_TOL {
            let mut dir: Vec<f64> = (0..d).map(|j| next.iter().map(|r| r[j]).sum::<f64>()).collect();
            let s: f64 = dir.iter().sum();
            dir.iter_mut().for_each(|x| *x /= s);
            return Ok((dir, n + 1));
        }
        product = Some(next);
    }
    Err(Error::NoConvergence(format!("cone iteration did not contract within {CONE_CAP} products")))
}

/// Conformal weights of `ω`: exact Perron-Frobenius vector when `ω` is invariant, cone limit otherwise.
pub fn conformal_weights(
    sys: &SelfSimilarSystem,
    spectrum: &SpectralData,
    decomp: &SlopeDecomposition,
) -> Result<ConformalWeights> {
    reject_unstable(decomp)?;
    let omega = &decomp.omega;
    let tiling = |nu: &[f64]| (nu.iter().zip(omega).map(|(n, w)| n * w.exp()).sum::<f64>() - 1.0).abs();
    let invariant = pf::dot(&decomp.omega_s, &decomp.omega_s).sqrt() <= decomp.threshold;
    if invariant {
        let c = central_pf(sys, &effective_central(decomp))?;
        let tiling_residual = tiling(&c.left);
        return Ok(ConformalWeights {
            nu: c.left,
            rho_nu: c.rho,
            mode: WeightMode::ExactPf,
            iterations: 0,
            tiling_residual,
        });
    }
    let (u1, iterations) = cone_direction(sys, spectrum, decomp, 1)?;
    let (w0, shift) = sys.towers().weighted_scaled(omega, 1.0);
    let image = pf::vec_mat(&u1, &w0);
    let mass: f64 = image.iter().sum();
    let nu: Vec<f64> = image.iter().map(|x| x / mass).collect();
    let tiling_residual = tiling(&nu);
    Ok(ConformalWeights { nu, rho_nu: mass.ln() + shift, mode: WeightMode::ConeIterated, iterations, tiling_residual })
}

/// Grid of `steps + 1` equally spaced points from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    /// First point.
    pub min: f64,
    /// Last point.
    pub max: f64,
    /// Number of intervals.
    pub steps: usize,
}

impl Grid {
    /// Grid points in increasing order. A grid with zero steps is the single point `min`.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 0 {
            return vec![self.min];
        }
        (0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / self.steps as f64
                }
            })
            .collect()
    }
}

/// Two-sided bound on `dim_μ(t)` for `t ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `dim_μ(1)/t`.
    pub lower: f64,
    /// `1/((1/dim_μ(1) − 1)t + 1)`.
    pub upper: f64,
    /// Whether `lower ≤ dim_μ(t) ≤ upper` up to rounding.
    pub holds: bool,
}

/// One point of the pressure sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Parameter `t`.
    pub t: f64,
    /// `ρ(t)`.
    pub rho: f64,
    /// `ρ'(t)`.
    pub rho_prime: f64,
    /// `𝒢(T, tω) = ρ(t) − tρ'(0)`.
    pub g: f64,
    /// `ℋ(T, tω) = ρ(t) − tρ'(t)`.
    pub h: f64,
    /// `ρ(0)/𝒢(T, tω)`.
    pub dim_mu: f64,
    /// `ℋ(T, tω)/ρ(0)`.
    pub dim_nu: f64,
    /// `|d/dt(1/(t dim_μ)) + dim_ν/t²|` by central differences, for `|t| ≥` [`RELATION_MIN_T`].
    pub relation_residual: Option<f64>,
    /// Bound check, for `t ≥ 1`.
    pub bounds: Option<BoundCheck>,
}

/// Slack allowed in the monotonicity flags.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Pressure sweep over a grid of `t` with monotonicity summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TSweep {
    /// Rows in grid order.
    pub rows: Vec<SweepRow>,
    /// `dim_μ(1)`, the reference value of the bounds.
    pub dim_mu_at_one: f64,
    /// `dim_μ` non-decreasing on the grid points with `t ≤ 0`.
    pub mu_increasing_on_negative: bool,
    /// `dim_μ` non-increasing on the grid points with `t ≥ 0`.
    pub mu_decreasing_on_positive: bool,
    /// `dim_ν` non-decreasing on the grid points with `t ≤ 0`.
    pub nu_increasing_on_negative: bool,
    /// `dim_ν` non-increasing on the grid points with `t ≥ 0`.
    pub nu_decreasing_on_positive: bool,
    /// Every bound check holds.
    pub bounds_hold: bool,
}

fn monotone(values: &[(f64, f64)], increasing: bool) -> bool {
    values.windows(2).all(|w| {
        let diff = w[1].1 - w[0].1;
        if increasing {
            diff >= -MONOTONE_SLACK
        } else {
            diff <= MONOTONE_SLACK
        }
    })
}

/// Evaluates the pressure curve and both dimension curves over `grid` for an invariant `ω`.
pub fn t_sweep(
    sys: &SelfSimilarSystem,
    omega: &[f64],
    grid: &Grid,
    invariance_tol: f64,
    exec: Execution,
) -> Result<TSweep> {
    let defect = invariance_defect(sys, omega);
    if defect > invariance_tol {
        return Err(Error::NonInvariantOmega(defect));
    }
    let (rho0, slope0) = pressure(sys, omega, 0.0)?;
    let dim_mu_of = |t: f64| -> Result<f64> { Ok(rho0 / (rho_of(sys, omega, t)? - t * slope0)) };
    let dim_mu_at_one = dim_mu_of(1.0)?;
    let points = grid.points();
    let rows = exec.map(&points, |&t| -> Result<SweepRow> {
        let (rho, rho_prime) = pressure(sys, omega, t)?;
        let g = rho - t * slope0;
        let h = rho - t * rho_prime;
        let (dim_mu, dim_nu) = (rho0 / g, h / rho0);
        let relation_residual = if t.abs() >= RELATION_MIN_T {
            let step = RELATION_STEP;
            let inv = |s: f64| -> Result<f64> { Ok(1.0 / (s * dim_mu_of(s)?)) };
            let derivative = (inv(t + step)? - inv(t - step)?) / (2.0 * step);
            Some((derivative + dim_nu / (t * t)).abs())
        } else {
            None
        };
        let bounds = (t >= 1.0).then(|| {
            let lower = dim_mu_at_one / t;
            let upper = 1.0 / ((1.0 / dim_mu_at_one - 1.0) * t + 1.0);
            let slack = 1e-12 * dim_mu.abs().max(1.0);
            BoundCheck { lower, upper, holds: lower <= dim_mu + slack && dim_mu <= upper + slack }
        });
        for x in [rho, rho_prime, g, h, dim_mu, dim_nu] {
            if !x.is_finite() {
                return Err(Error::NonFinite(format!("pressure sweep at t = {t}")));
            }
        }
        Ok(SweepRow { t, rho, rho_prime, g, h, dim_mu, dim_nu, relation_residual, bounds })
    });
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_>>()?;
    let series = |f: fn(&SweepRow) -> f64, negative: bool| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| if negative { r.t <= 0.0 } else { r.t >= 0.0 }).map(|r| (r.t, f(r))).collect()
    };
    let bounds_hold = rows.iter().filter_map(|r| r.bounds.as_ref()).all(|b| b.holds);
    Ok(TSweep {
        mu_increasing_on_negative: monotone(&series(|r| r.dim_mu, true), true),
        mu_decreasing_on_positive: monotone(&series(|r| r.dim_mu, false), false),
        nu_increasing_on_negative: monotone(&series(|r| r.dim_nu, true), true),
        nu_decreasing_on_positive: monotone(&series(|r| r.dim_nu, false), false),
        bounds_hold,
        rows,
        dim_mu_at_one,
    })
}
