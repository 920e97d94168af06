//! Spectral analysis of the self-similarity matrix: exact characteristic polynomial,
//! unit eigenspace over the rationals, hyperbolicity certificate, and the
//! decomposition of slope vectors into unstable, central and stable parts.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact;
use crate::iet::genus_kappa;
use crate::pf::dot;
use crate::rauzy::{SelfSimilarSystem, ORTHOGONALITY_TOL};

/// Smallest gap between log-moduli considered distinct.
pub const MODULI_GAP: f64 = 1e-7;

/// Tolerance of the reciprocal pairing `ν ↔ 1/ν`.
pub const RECIPROCAL_TOL: f64 = 1e-9;

/// Default relative threshold below which a component counts as absent.
pub const CLASS_EPS: f64 = 1e-9;

/// Imaginary parts below this (relative to the modulus) are treated as zero.
const REAL_TOL: f64 = 1e-9;

/// Exact and numeric spectral data of the self-similarity matrix.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Coefficients of `det(xI − M)` from the constant term upward.
    pub char_poly: Vec<BigInt>,
    /// Multiplicity of the factor `(x − 1)` in the characteristic polynomial.
    pub unit_dim: usize,
    /// Real eigenvalues other than 1, sorted by decreasing modulus.
    pub eigenvalues: Vec<f64>,
    /// Non-real eigenvalues as `(re, im)` pairs.
    pub nonreal: Vec<(f64, f64)>,
    /// Right eigenvectors paired with `eigenvalues`.
    pub right_eigenvectors: Vec<Vec<f64>>,
    /// Left eigenvectors paired with `eigenvalues`.
    pub left_eigenvectors: Vec<Vec<f64>>,
    /// Exact basis of `Ker(M − I)`.
    pub central_basis: Vec<Vec<BigRational>>,
    /// Exact basis of `Im(M − I)`, the invariant complement of the kernel in the hyperbolic case.
    pub complement_basis: Vec<Vec<BigRational>>,
}

/// Whether the system is of hyperbolic periodic type, with the reason if not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityCertificate {
    /// True when every condition holds.
    pub is_hyperbolic: bool,
    /// Genus of the suspension surface.
    pub g: usize,
    /// Number of singularities.
    pub kappa: usize,
    /// First failed condition.
    pub failure_reason: Option<String>,
}

/// Slope class of a log-slope vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeClass {
    /// The zero vector.
    Zero,
    /// Only contracting components.
    Stable,
    /// A nonzero central component and no expanding one.
    CentralStable,
    /// Some expanding component other than the Perron-Frobenius direction.
    Unstable,
}

impl SlopeClass {
    /// Snake-case name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            SlopeClass::Zero => "zero",
            SlopeClass::Stable => "stable",
            SlopeClass::CentralStable => "central_stable",
            SlopeClass::Unstable => "unstable",
        }
    }
}

/// Coefficient of a slope vector along one eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenComponent {
    /// Eigenvalue.
    pub eigenvalue: f64,
    /// Coefficient along the right eigenvector.
    pub coefficient: f64,
    /// Euclidean norm of the component.
    pub norm: f64,
}

/// Splitting `ω = ω_u + ω_c + ω_s` with the slope class.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeDecomposition {
    /// The input vector.
    pub omega: Vec<f64>,
    /// Expanding part (without the Perron-Frobenius direction).
    pub omega_u: Vec<f64>,
    /// Part in `Ker(M − I)`.
    pub omega_c: Vec<f64>,
    /// Contracting part.
    pub omega_s: Vec<f64>,
    /// Slope class.
    pub class: SlopeClass,
    /// For stable vectors, `|log ν|` of the largest contracting eigenvalue present.
    pub alpha_omega: Option<f64>,
    /// Norms of the components along each eigenvector other than the Perron-Frobenius one.
    pub components: Vec<EigenComponent>,
    /// `‖ω − (ω_u + ω_c + ω_s)‖`.
    pub recomposition_residual: f64,
    /// Absolute threshold used for "component present".
    pub threshold: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rational_matrix(sys: &SelfSimilarSystem) -> Vec<Vec<BigRational>> {
    sys.integer_matrix()
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(BigInt::from(x.clone()))).collect())
        .collect()
}

fn null_vector(a: DMatrix<f64>) -> Vec<f64> {
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bv), (i, &s)| if s < bv { (i, s) } else { (bk, bv) });
    let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
    let norm = norm2(&v);
    let pivot = v.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m });
    let s = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
    v.iter_mut().for_each(|x| *x *= s);
    v
}

fn polish_root(p: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (mut f, mut df) = (0.0, 0.0);
        for &c in p.iter().rev() {
            df = df * x + f;
            f = f * x + c;
        }
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if !next.is_finite() || (next - x).abs() > 1e-6 * x.abs().max(1.0) {
            break;
        }
        x = next;
    }
    x
}

/// Exact characteristic polynomial, unit multiplicity and numeric spectrum.
pub fn analyze_spectrum(sys: &SelfSimilarSystem) -> SpectralData {
    let d = sys.dim();
    let int: exact::IntMatrix =
        sys.integer_matrix().iter().map(|r| r.iter().map(|x| BigInt::from(x.clone())).collect()).collect();
    let char_poly = exact::char_poly(&int);
    let (unit_dim, reduced) = exact::unit_multiplicity(&char_poly);

    let deg = reduced.len() - 1;
    let coeffs: Vec<f64> = reduced.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let mut roots: Vec<(f64, f64)> = Vec::new();
    if deg > 0 {
        let lead = coeffs[deg];
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -coeffs[i] / lead;
        }
        roots = comp.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    }
    let mut eigenvalues = Vec::new();
    let mut nonreal = Vec::new();
    for (re, im) in roots {
        let modulus = (re * re + im * im).sqrt();
        if im.abs() <= REAL_TOL * modulus.max(1.0) {
            eigenvalues.push(polish_root(&coeffs, re));
        } else {
            nonreal.push((re, im));
        }
    }
    eigenvalues.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));

    let m = DMatrix::from_fn(d, d, |i, j| sys.matrix()[i][j]);
    let identity = DMatrix::<f64>::identity(d, d);
    let mut right = Vec::new();
    let mut left = Vec::new();
    for (k, &nu) in eigenvalues.iter().enumerate() {
        if k == 0 {
            right.push(sys.theta().to_vec());
            left.push(sys.lambda().to_vec());
            continue;
        }
        let shifted = &m - &identity * nu;
        right.push(null_vector(shifted.clone()));
        left.push(null_vector(shifted.transpose()));
    }

    let mut m_minus_i = rational_matrix(sys);
    for (i, row) in m_minus_i.iter_mut().enumerate() {
        row[i] -= BigRational::from_integer(1.into());
    }
    let central_basis = exact::kernel(&m_minus_i);
    let mut red = m_minus_i.clone();
    let pivots = exact::rref(&mut red);
    let complement_basis = pivots
        .iter()
        .map(|&c| (0..d).map(|i| m_minus_i[i][c].clone()).collect())
        .collect();

    SpectralData {
        char_poly,
        unit_dim,
        eigenvalues,
        nonreal,
        right_eigenvectors: right,
        left_eigenvectors: left,
        central_basis,
        complement_basis,
    }
}

/// Checks the hyperbolic periodic type conditions.
pub fn certify_hyperbolic(sys: &SelfSimilarSystem, spectrum: &SpectralData) -> Result<HyperbolicityCertificate> {
    let (g, kappa) = genus_kappa(sys.perm())?;
    let fail = |reason: String| HyperbolicityCertificate {
        is_hyperbolic: false,
        g,
        kappa,
        failure_reason: Some(reason),
    };
    if !spectrum.nonreal.is_empty() {
        return Ok(fail("non-real spectrum off the unit circle".into()));
    }
    if spectrum.unit_dim != kappa - 1 {
        return Ok(fail(format!(
            "unit eigenvalue multiplicity {} differs from kappa - 1 = {}",
            spectrum.unit_dim,
            kappa - 1
        )));
    }
    if spectrum.central_basis.len() != spectrum.unit_dim {
        return Ok(fail("unit eigenvalue is not semisimple".into()));
    }
    let logs: Vec<f64> = spectrum.eigenvalues.iter().map(|v| v.abs().ln()).collect();
    if logs.iter().any(|l| l.abs() <= MODULI_GAP) {
        return Ok(fail("eigenvalue of unit modulus other than 1".into()));
    }
    let expanding = logs.iter().filter(|&&l| l > 0.0).count();
    let contracting = logs.iter().filter(|&&l| l < 0.0).count();
    if expanding != g || contracting != g {
        return Ok(fail(format!(
            "{expanding} expanding and {contracting} contracting eigenvalues, expected {g} of each"
        )));
    }
    for i in 0..logs.len() {
        for j in 0..i {
            if (logs[i] - logs[j]).abs() <= MODULI_GAP {
                return Ok(fail("eigenvalues with equal moduli".into()));
            }
        }
    }
    for &nu in &spectrum.eigenvalues {
        let inv = 1.0 / nu;
        if !spectrum.eigenvalues.iter().any(|&mu| (mu - inv).abs() <= RECIPROCAL_TOL * inv.abs().max(1.0)) {
            return Ok(fail("spectrum is not closed under inversion".into()));
        }
    }
    Ok(HyperbolicityCertificate { is_hyperbolic: true, g, kappa, failure_reason: None })
}

/// Removes the Perron-Frobenius component: `ω − ⟨ω, λ⟩ θ`.
pub fn project_orthogonal(sys: &SelfSimilarSystem, omega_raw: &[f64]) -> Vec<f64> {
    let c = dot(omega_raw, sys.lambda());
    omega_raw.iter().zip(sys.theta()).map(|(w, t)| w - c * t).collect()
}

/// Exact projection onto `Ker(M − I)` along `Im(M − I)`.
pub fn central_part_exact(spectrum: &SpectralData, omega: &[BigRational]) -> Result<Vec<BigRational>> {
    let d = omega.len();
    let k = spectrum.central_basis.len();
    if k == 0 {
        return Ok(vec![BigRational::zero(); d]);
    }
    let columns: Vec<&Vec<BigRational>> =
        spectrum.central_basis.iter().chain(spectrum.complement_basis.iter()).collect();
    if columns.len() != d {
        return Err(Error::NotHyperbolic("unit eigenspace has no invariant complement".into()));
    }
    let a: Vec<Vec<BigRational>> = (0..d).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    let coef = exact::solve(&a, omega)
        .ok_or_else(|| Error::NotHyperbolic("unit eigenspace has no invariant complement".into()))?;
    let mut out = vec![BigRational::zero(); d];
    for (c, basis) in coef.iter().zip(&spectrum.central_basis) {
        for (o, b) in out.iter_mut().zip(basis) {
            *o += c * b;
        }
    }
    Ok(out)
}

/// Slope vector after `k` periods, `M^k ω`, evaluated from the eigen-decomposition
/// so that rounding errors are not amplified along the expanding directions.
pub fn pushed_forward(spectrum: &SpectralData, decomp: &SlopeDecomposition, k: usize) -> Vec<f64> {
    let mut out = decomp.omega_c.clone();
    for (idx, comp) in decomp.components.iter().enumerate() {
        let scale = comp.coefficient * comp.eigenvalue.powi(k as i32);
        if scale != 0.0 {
            for (o, r) in out.iter_mut().zip(&spectrum.right_eigenvectors[idx + 1]) {
                *o += scale * r;
            }
        }
    }
    out
}

/// Splits `ω` into unstable, central and stable parts and assigns its class.
///
/// `class_eps` is the relative threshold: a component is present when its norm
/// exceeds `class_eps · ‖ω‖`.
pub fn classify_slope(
    sys: &SelfSimilarSystem,
    spectrum: &SpectralData,
    cert: &HyperbolicityCertificate,
    omega: &[f64],
    class_eps: f64,
) -> Result<SlopeDecomposition> {
    let d = sys.dim();
    if omega.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: omega.len() });
    }
    if !cert.is_hyperbolic {
        return Err(Error::NotHyperbolic(cert.failure_reason.clone().unwrap_or_default()));
    }
    let scale = norm2(omega);
    let ip = dot(omega, sys.lambda());
    if ip.abs() > ORTHOGONALITY_TOL * scale.max(1.0) {
        return Err(Error::NotOrthogonal(ip));
    }
    let threshold = class_eps * scale;
    let rational: Vec<BigRational> = omega.iter().map(|&x| exact::rational_from_f64(x)).collect();
    let omega_c: Vec<f64> = central_part_exact(spectrum, &rational)?.iter().map(exact::rational_to_f64).collect();
    let rest: Vec<f64> = omega.iter().zip(&omega_c).map(|(w, c)| w - c).collect();

    let mut omega_u = vec![0.0; d];
    let mut omega_s = vec![0.0; d];
    let mut components = Vec::new();
    let mut alpha_candidate: Option<f64> = None;
    for (k, &nu) in spectrum.eigenvalues.iter().enumerate().skip(1) {
        let (l, r) = (&spectrum.left_eigenvectors[k], &spectrum.right_eigenvectors[k]);
        let coef = dot(l, &rest) / dot(l, r);
        let part: Vec<f64> = r.iter().map(|x| coef * x).collect();
        let n = norm2(&part);
        components.push(EigenComponent { eigenvalue: nu, coefficient: coef, norm: n });
        let target = if nu.abs() > 1.0 { &mut omega_u } else { &mut omega_s };
        target.iter_mut().zip(&part).for_each(|(t, p)| *t += p);
        if nu.abs() < 1.0 && n > threshold {
            // Eigenvalues are sorted by decreasing modulus, so the first hit is the largest.
            alpha_candidate.get_or_insert(nu.abs().ln().abs());
        }
    }
    let recomposition_residual = norm2(
        &(0..d).map(|i| omega[i] - omega_u[i] - omega_c[i] - omega_s[i]).collect::<Vec<_>>(),
    );
    let class = if scale == 0.0 {
        SlopeClass::Zero
    } else if norm2(&omega_u) > threshold {
        SlopeClass::Unstable
    } else if norm2(&omega_c) > threshold {
        SlopeClass::CentralStable
    } else if norm2(&omega_s) > threshold {
        SlopeClass::Stable
    } else {
        SlopeClass::Zero
    };
    let alpha_omega = if class == SlopeClass::Stable { alpha_candidate } else { None };
    Ok(SlopeDecomposition {
        omega: omega.to_vec(),
        omega_u,
        omega_c,
        omega_s,
        class,
        alpha_omega,
        components,
        recomposition_residual,
        threshold,
    })
}
