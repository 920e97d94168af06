//! Input files, command dispatch and machine-readable reports of the `aiet` binary.
//!
//! Every command is a pure function of the input bytes and options: JSON keys
//! appear in a fixed order, floats are printed in shortest round-trip form, and
//! non-finite quantities are replaced by the strings `"infinity"`, `"unknown"`
//! or `"undefined"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dimension::{self, Grid, TSweep};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::holder::{self, CycleMeanResult, RenormGraph};
use crate::iet::Permutation;
use crate::markov::{self, Plan, Side};
use crate::pf;
use crate::rauzy::{build_self_similar, RauzyLoop, SelfSimilarSystem};
use crate::spectral::{
    analyze_spectrum, certify_hyperbolic, classify_slope, project_orthogonal, EigenComponent,
    HyperbolicityCertificate, SlopeClass, SlopeDecomposition, SpectralData, CLASS_EPS,
};
use crate::value::Value;

/// Default number of transitions of `simulate`.
pub const DEFAULT_LENGTH: usize = 1_000_000;

/// Largest graph on which `holder` also runs the enumeration cross-check.
pub const ENUMERATION_MAX_VERTICES: usize = 60;

/// Default sweep grid when the file has none.
pub const DEFAULT_GRID: Grid = Grid { min: 0.0, max: 10.0, steps: 100 };

/// A permutation row, written either as a word of one-character letters or as a list of names.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Letters {
    /// `"ABCD"`.
    Word(String),
    /// `["A", "B", "C", "D"]`.
    List(Vec<String>),
}

impl Letters {
    fn names(&self) -> Vec<String> {
        match self {
            Letters::Word(w) => w.chars().map(String::from).collect(),
            Letters::List(l) => l.clone(),
        }
    }
}

/// Sweep grid as written in an input file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// First point.
    pub min: f64,
    /// Last point.
    pub max: f64,
    /// Number of intervals.
    pub steps: usize,
}

/// One system per input file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    /// Letter names.
    pub alphabet: Letters,
    /// Top row.
    pub top: Letters,
    /// Bottom row.
    pub bottom: Letters,
    /// Loop string over `{t, b}`.
    #[serde(rename = "loop")]
    pub loop_word: String,
    /// Raw log-slope vector; its component along `θ` is removed before use.
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    /// Sweep grid.
    #[serde(default)]
    pub t_grid: Option<GridSpec>,
    /// Default seed of Monte-Carlo commands.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Tolerance overrides by key.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

/// Parses an input file, reporting the line and column of syntax errors.
pub fn parse_spec(bytes: &[u8]) -> Result<SystemSpecFile> {
    serde_json::from_slice(bytes).map_err(|e| Error::InvalidInput(format!("input file: {e}")))
}

/// Numerical settings that can be overridden from the file or the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative threshold for a slope component to count as present.
    pub class_eps: f64,
    /// Relative tolerance on `‖Mω − ω‖∞` for invariant slopes.
    pub invariance_tol: f64,
    /// Cap on the number of elementary cycles listed by enumeration.
    pub enumeration_cap: u64,
    /// Batch count of batch-means standard errors.
    pub batches: usize,
    /// Number of independent Monte-Carlo chains.
    pub chains: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            class_eps: CLASS_EPS,
            invariance_tol: dimension::INVARIANCE_TOL,
            enumeration_cap: holder::ENUMERATION_CAP,
            batches: markov::DEFAULT_BATCHES,
            chains: markov::DEFAULT_CHAINS,
        }
    }
}

fn positive_integer(key: &str, value: f64) -> Result<u64> {
    if value >= 1.0 && value.fract() == 0.0 && value <= 1e15 {
        Ok(value as u64)
    } else {
        Err(Error::InvalidInput(format!("tolerance {key}: expected a positive integer, found {value}")))
    }
}

impl Tolerances {
    /// Applies one override.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "class_eps" | "invariance_tol" => {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::InvalidInput(format!("tolerance {key}: expected a positive number")));
                }
                if key == "class_eps" {
                    self.class_eps = value;
                } else {
                    self.invariance_tol = value;
                }
            }
            "enumeration_cap" => self.enumeration_cap = positive_integer(key, value)?,
            "batches" => self.batches = positive_integer(key, value)? as usize,
            "chains" => self.chains = positive_integer(key, value)? as usize,
            _ => return Err(Error::InvalidInput(format!("unknown tolerance key {key:?}"))),
        }
        Ok(())
    }

    /// Parses and applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("tolerance override {pair:?}: expected key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("tolerance override {pair:?}: value is not a number")))?;
        self.set(key.trim(), value)
    }
}

/// Subcommand of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Genus, spectrum, hyperbolicity and slope class.
    Classify,
    /// Hausdorff dimensions.
    Dims,
    /// Hölder exponents.
    Holder,
    /// Pressure sweep as CSV.
    Sweep,
    /// Monte-Carlo estimate of `𝒢` or `ℋ`.
    Simulate,
}

/// Command-line options shared by all commands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Options {
    /// Seed overriding the file's seed.
    pub seed: Option<u64>,
    /// Number of Monte-Carlo transitions.
    pub length: Option<usize>,
    /// Base measure of `simulate`.
    pub side: Option<Side>,
    /// `key=value` tolerance overrides, applied after the file's.
    pub overrides: Vec<String>,
    /// Execution mode of data-parallel loops.
    pub execution: Execution,
}

/// Text produced by a command: the main document and an optional JSON sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    /// JSON document, or CSV for `sweep`.
    pub primary: String,
    /// Monotonicity and bound summary of `sweep`.
    pub sidecar: Option<String>,
}

/// A validated system with its spectrum and slope vector.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The parsed file.
    pub file: SystemSpecFile,
    /// Effective tolerances.
    pub tolerances: Tolerances,
    /// The self-similar system.
    pub sys: SelfSimilarSystem,
    /// Spectral data of its matrix.
    pub spectrum: SpectralData,
    /// Hyperbolicity certificate.
    pub cert: HyperbolicityCertificate,
    /// Slope vector after removing its `θ` component.
    pub omega: Vec<f64>,
    /// `⟨ω_raw, λ⟩`, the removed coefficient.
    pub orthogonality_shift: f64,
}

/// Validates a parsed file and builds the system.
pub fn prepare(file: SystemSpecFile, overrides: &[String]) -> Result<Prepared> {
    let mut tolerances = Tolerances::default();
    for (key, &value) in &file.tolerances {
        tolerances.set(key, value)?;
    }
    for pair in overrides {
        tolerances.set_pair(pair)?;
    }
    let perm = Permutation::from_names(&file.alphabet.names(), &file.top.names(), &file.bottom.names())?;
    let lp = RauzyLoop::parse(perm, &file.loop_word)?;
    let sys = build_self_similar(&lp)?;
    let d = sys.dim();
    let raw = file.omega.clone().unwrap_or_else(|| vec![0.0; d]);
    if raw.len() != d {
        return Err(Error::InvalidInput(format!("field omega: expected {d} entries, found {}", raw.len())));
    }
    if let Some(k) = raw.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("field omega: entry {k} is not finite")));
    }
    if let Some(g) = &file.t_grid {
        if !(g.min.is_finite() && g.max.is_finite() && g.min <= g.max) {
            return Err(Error::InvalidInput("field t_grid: expected finite min <= max".into()));
        }
    }
    let orthogonality_shift = pf::dot(&raw, sys.lambda());
    let omega = project_orthogonal(&sys, &raw);
    let spectrum = analyze_spectrum(&sys);
    let cert = certify_hyperbolic(&sys, &spectrum)?;
    Ok(Prepared { file, tolerances, sys, spectrum, cert, omega, orthogonality_shift })
}

impl Prepared {
    /// Slope decomposition; fails with `NotHyperbolic` for non-hyperbolic systems.
    pub fn decompose(&self) -> Result<SlopeDecomposition> {
        classify_slope(&self.sys, &self.spectrum, &self.cert, &self.omega, self.tolerances.class_eps)
    }

    fn state_label(&self, state: (usize, usize)) -> String {
        format!("{}{}", self.sys.perm().alphabet()[state.0], state.1)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::NonFinite(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// A structured report entry, or the `"undefined"` flag when it does not apply.
#[derive(Serialize)]
#[serde(untagged)]
enum Entry<T> {
    Present(T),
    Flag(&'static str),
}

impl<T> From<Option<T>> for Entry<T> {
    fn from(x: Option<T>) -> Self {
        x.map_or(Entry::Flag("undefined"), Entry::Present)
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Undefined, Value::from_f64)
}

#[derive(Serialize)]
struct Components {
    omega_u: Vec<f64>,
    omega_c: Vec<f64>,
    omega_s: Vec<f64>,
    eigen: Vec<EigenComponent>,
    recomposition_residual: f64,
}

#[derive(Serialize)]
struct ClassifyOutput {
    genus: usize,
    kappa: usize,
    #[serde(rename = "rho_T")]
    rho_t: f64,
    multiplier: usize,
    period: usize,
    hyperbolic: bool,
    failure_reason: Option<String>,
    eigenvalues: Vec<f64>,
    class: &'static str,
    omega: Vec<f64>,
    orthogonality_shift: f64,
    omega_components: Entry<Components>,
    alpha_omega: Value,
}

fn cmd_classify(p: &Prepared) -> Result<String> {
    let decomp = if p.cert.is_hyperbolic { Some(p.decompose()?) } else { None };
    let out = ClassifyOutput {
        genus: p.cert.g,
        kappa: p.cert.kappa,
        rho_t: p.sys.rho_t(),
        multiplier: p.sys.multiplier(),
        period: p.sys.period_loop().period(),
        hyperbolic: p.cert.is_hyperbolic,
        failure_reason: p.cert.failure_reason.clone(),
        eigenvalues: p.spectrum.eigenvalues.clone(),
        class: decomp.as_ref().map_or("undefined", |d| d.class.name()),
        omega: p.omega.clone(),
        orthogonality_shift: p.orthogonality_shift,
        alpha_omega: opt(decomp.as_ref().and_then(|d| d.alpha_omega)),
        omega_components: decomp.map(|d| Components {
            omega_u: d.omega_u,
            omega_c: d.omega_c,
            omega_s: d.omega_s,
            eigen: d.components,
            recomposition_residual: d.recomposition_residual,
        })
        .into(),
    };
    to_json(&out)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct Inequalities {
    xi_lt_H: bool,
    H_lt_rho_T: bool,
    rho_T_lt_G: bool,
    G_lt_zeta: bool,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct DimsOutput {
    class: &'static str,
    rho_T: f64,
    rho_c: Value,
    G: Value,
    H: Value,
    dim_invariant: Value,
    dim_conformal: Value,
    kl_G_residual: Value,
    kl_H_residual: Value,
    zeta: Value,
    xi: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    inequalities: Option<Inequalities>,
}

fn cmd_dims(p: &Prepared) -> Result<String> {
    let decomp = p.decompose()?;
    let r = dimension::dimension_report(&p.sys, &decomp)?;
    let zx = match decomp.class {
        SlopeClass::Unstable => None,
        _ => Some(holder::zeta_xi_for(&p.sys, &decomp)?.1),
    };
    let zeta = zx.as_ref().map(|z| z.zeta.value);
    let xi = zx.as_ref().map(|z| z.xi.value);
    let inequalities = match (decomp.class, r.g, r.h, zeta, xi) {
        (SlopeClass::CentralStable, Some(g), Some(h), Some(z), Some(x)) => Some(Inequalities {
            xi_lt_H: x < h,
            H_lt_rho_T: h < r.rho_t,
            rho_T_lt_G: r.rho_t < g,
            G_lt_zeta: g < z,
        }),
        _ => None,
    };
    let out = DimsOutput {
        class: r.class.name(),
        rho_T: r.rho_t,
        rho_c: opt(r.rho_c),
        G: opt(r.g),
        H: opt(r.h),
        dim_invariant: r.dim_invariant,
        dim_conformal: r.dim_conformal,
        kl_G_residual: opt(r.kl_g_residual),
        kl_H_residual: opt(r.kl_h_residual),
        zeta: opt(zeta),
        xi: opt(xi),
        inequalities,
    };
    to_json(&out)
}

#[derive(Serialize)]
struct CycleReport {
    value: f64,
    cycle: Vec<String>,
    method: holder::CycleMethod,
}

#[derive(Serialize)]
struct EnumerationReport {
    cycles: u64,
    complete: bool,
    max: f64,
    min: f64,
    karp_agrees: bool,
}

#[derive(Serialize)]
struct HolderOutput {
    class: &'static str,
    #[serde(rename = "rho_T")]
    rho_t: f64,
    vertices: Entry<usize>,
    edges: Entry<usize>,
    zeta: Entry<CycleReport>,
    xi: Entry<CycleReport>,
    enumeration: Entry<EnumerationReport>,
    h_exp: Value,
    hinv_exp: Value,
}

fn cycle_report(p: &Prepared, g: &RenormGraph, c: &CycleMeanResult) -> CycleReport {
    CycleReport {
        value: c.value,
        cycle: c.witness_cycle.iter().map(|&v| p.state_label(g.states()[v])).collect(),
        method: c.method,
    }
}

fn cmd_holder(p: &Prepared) -> Result<String> {
    let decomp = p.decompose()?;
    let graph = match decomp.class {
        SlopeClass::Unstable => None,
        _ => Some(holder::zeta_xi_for(&p.sys, &decomp)?),
    };
    let exps = holder::holder_exponents(&p.sys, &decomp, graph.as_ref().map(|g| &g.1))?;
    let enumeration = match &graph {
        Some((g, zx)) if g.len() <= ENUMERATION_MAX_VERTICES => {
            let e = holder::enumerate_cycles(g, p.tolerances.enumeration_cap)?;
            let karp_agrees = e.complete
                && (e.max.value - zx.zeta.value).abs() <= 1e-12
                && (e.min.value - zx.xi.value).abs() <= 1e-12;
            Some(EnumerationReport { cycles: e.cycles, complete: e.complete, max: e.max.value, min: e.min.value, karp_agrees })
        }
        _ => None,
    };
    let out = HolderOutput {
        class: decomp.class.name(),
        rho_t: p.sys.rho_t(),
        vertices: graph.as_ref().map(|g| g.0.len()).into(),
        edges: graph.as_ref().map(|g| g.0.edge_count()).into(),
        zeta: graph.as_ref().map(|(g, zx)| cycle_report(p, g, &zx.zeta)).into(),
        xi: graph.as_ref().map(|(g, zx)| cycle_report(p, g, &zx.xi)).into(),
        enumeration: enumeration.into(),
        h_exp: exps.h_exp,
        hinv_exp: exps.hinv_exp,
    };
    to_json(&out)
}

/// Formats `x` with `digits` significant digits, in fixed notation for moderate
/// exponents and scientific notation otherwise, without trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return Value::from_f64(x).flag().unwrap_or("undefined").to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "t,rho,rho_prime,G,H,dim_mu,dim_nu,relation_residual";

/// Renders a sweep as CSV with LF line endings and 12 significant digits.
pub fn sweep_csv(sweep: &TSweep) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &sweep.rows {
        let cells = [
            format_significant(r.t, 12),
            format_significant(r.rho, 12),
            format_significant(r.rho_prime, 12),
            format_significant(r.g, 12),
            format_significant(r.h, 12),
            format_significant(r.dim_mu, 12),
            format_significant(r.dim_nu, 12),
            r.relation_residual.map_or_else(|| "undefined".to_string(), |x| format_significant(x, 12)),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct BoundReport {
    t: f64,
    dim_mu: f64,
    lower: f64,
    upper: f64,
    holds: bool,
}

#[derive(Serialize)]
struct SweepSidecar {
    rows: usize,
    dim_mu_at_one: f64,
    mu_increasing_on_negative: bool,
    mu_decreasing_on_positive: bool,
    nu_increasing_on_negative: bool,
    nu_decreasing_on_positive: bool,
    bounds_hold: bool,
    bounds: Vec<BoundReport>,
}

fn cmd_sweep(p: &Prepared, exec: Execution) -> Result<Output> {
    if !p.cert.is_hyperbolic {
        return Err(Error::NotHyperbolic(p.cert.failure_reason.clone().unwrap_or_default()));
    }
    let grid = p.file.t_grid.map_or(DEFAULT_GRID, |g| Grid { min: g.min, max: g.max, steps: g.steps });
    let sweep = dimension::t_sweep(&p.sys, &p.omega, &grid, p.tolerances.invariance_tol, exec)?;
    let sidecar = SweepSidecar {
        rows: sweep.rows.len(),
        dim_mu_at_one: sweep.dim_mu_at_one,
        mu_increasing_on_negative: sweep.mu_increasing_on_negative,
        mu_decreasing_on_positive: sweep.mu_decreasing_on_positive,
        nu_increasing_on_negative: sweep.nu_increasing_on_negative,
        nu_decreasing_on_positive: sweep.nu_decreasing_on_positive,
        bounds_hold: sweep.bounds_hold,
        bounds: sweep
            .rows
            .iter()
            .filter_map(|r| {
                r.bounds.as_ref().map(|b| BoundReport { t: r.t, dim_mu: r.dim_mu, lower: b.lower, upper: b.upper, holds: b.holds })
            })
            .collect(),
    };
    Ok(Output { primary: sweep_csv(&sweep), sidecar: Some(to_json(&sidecar)?) })
}

#[derive(Serialize)]
struct SimulateOutput {
    side: &'static str,
    seed: u64,
    length: usize,
    batches: usize,
    chains: usize,
    estimate: f64,
    stderr: f64,
    closed_form: f64,
    z_score: Value,
}

fn cmd_simulate(p: &Prepared, opts: &Options) -> Result<String> {
    let decomp = p.decompose()?;
    let side = opts.side.unwrap_or(Side::Invariant);
    if decomp.class == SlopeClass::Unstable {
        return Err(Error::UnstableInput);
    }
    let seed = opts.seed.or(p.file.seed).unwrap_or(0);
    let plan = Plan {
        length: opts.length.unwrap_or(DEFAULT_LENGTH),
        batches: p.tolerances.batches,
        chains: p.tolerances.chains,
    };
    let e = markov::birkhoff_information(&p.sys, &decomp, side, seed, plan, opts.execution)?;
    let closed_form = match side {
        Side::Invariant => dimension::big_g(&p.sys, &decomp)?,
        Side::Conformal => dimension::big_h(&p.sys, &decomp)?,
    };
    let z_score = if e.stderr > 0.0 {
        Value::from_f64((e.estimate - closed_form) / e.stderr)
    } else {
        Value::Undefined
    };
    to_json(&SimulateOutput {
        side: side.name(),
        seed,
        length: e.steps,
        batches: e.batches,
        chains: e.chains,
        estimate: e.estimate,
        stderr: e.stderr,
        closed_form,
        z_score,
    })
}

/// Runs a command on the bytes of an input file.
pub fn run(command: Command, input: &[u8], opts: &Options) -> Result<Output> {
    let prepared = prepare(parse_spec(input)?, &opts.overrides)?;
    let json = |s: String| Output { primary: s, sidecar: None };
    match command {
        Command::Classify => cmd_classify(&prepared).map(json),
        Command::Dims => cmd_dims(&prepared).map(json),
        Command::Holder => cmd_holder(&prepared).map(json),
        Command::Sweep => cmd_sweep(&prepared, opts.execution),
        Command::Simulate => cmd_simulate(&prepared, opts).map(json),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(-2.0, 12), "-2");
        assert_eq!(format_significant(123456.7890123456, 12), "123456.789012");
        assert_eq!(format_significant(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_significant(9.9999999999999e11, 12), "1e12");
    }

    #[test]
    fn golden_classify() {
        let input = br#"{"alphabet": "AB", "top": "AB", "bottom": "BA", "loop": "tb"}"#;
        let out = run(Command::Classify, input, &Options::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.primary).unwrap();
        assert_eq!(v["hyperbolic"], true);
        assert_eq!((v["genus"].as_u64(), v["kappa"].as_u64()), (Some(1), Some(1)));
        assert_eq!(v["class"], "zero");
    }

    #[test]
    fn unknown_fields_and_tolerances_are_rejected() {
        let input = br#"{"alphabet": "AB", "top": "AB", "bottom": "BA", "loop": "tb", "omegas": [0, 0]}"#;
        assert!(matches!(run(Command::Classify, input, &Options::default()), Err(Error::InvalidInput(_))));
        let mut t = Tolerances::default();
        assert!(t.set_pair("class_eps=1e-6").is_ok());
        assert_eq!(t.class_eps, 1e-6);
        assert!(t.set_pair("nonsense=1").is_err());
        assert!(t.set_pair("batches=2.5").is_err());
    }
}
