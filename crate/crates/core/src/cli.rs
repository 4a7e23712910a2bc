//! Command-line front end: parameter input, figure data, sweeps, CSV output.
//!
//! Parameters come from an optional `key = value` file (`#` starts a comment)
//! and are overridden by flags of the same name. Rates accept a `G3` suffix
//! meaning "times Γ₃"; phases are in radians.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::{IsTerminal, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::asymptotic::{strong_solution, weak_solution};
use crate::cubic::{self, match_to};
use crate::error::Error;
use crate::exec::Execution;
use crate::model::{
    classify_regime, Amplitudes, DecayRates, MediumConstants, RabiFields, Regime, DEFAULT_R_WEAK,
};
use crate::oracle::{max_stable_dt, sample_reduced};
use crate::response::{chi_from_a3, weak_steady_chi, ChiUnit};
use crate::transient::{initial_amplitudes, steady_state, time_grid, ModeDecomposition};

pub const EVOLVE_HEADER: &str = "t_s,re_a2,im_a2,re_a3,im_a3,re_a4,im_a4,re_chi,im_chi";
pub const STEADY_HEADER: &str = "re_a2,im_a2,re_a3,im_a3,re_a4,im_a4,re_chi,im_chi";
pub const EIGEN_HEADER: &str = "method,index,re_lambda,im_lambda,rel_dev";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Fallback RK4 step when none is configured.
const DEFAULT_RK4_DT: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "eit4",
    version,
    about = "Transient probe susceptibility of a four-level N-type EIT medium"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues from the exact cubic and the applicable closed forms
    Eigen(Flags),
    /// Amplitude and susceptibility trace after signal switch-on
    Evolve(Flags),
    /// Steady amplitudes and susceptibility
    Steady(Flags),
    /// Im chi traces for a set of coupling strengths (weak signal)
    Fig2(Flags),
    /// Im chi traces for a set of signal strengths (strong signal)
    Fig3(Flags),
    /// Steady Im chi over a log grid of (|Ω_c|, |Ω₂₄|)
    Sweep(Flags),
}

macro_rules! flags {
    ($($field:ident => $help:literal),* $(,)?) => {
        #[derive(Args, Debug, Default)]
        struct Flags {
            /// key = value parameter file
            #[arg(long)]
            config: Option<PathBuf>,
            /// Write CSV here instead of stdout
            #[arg(long)]
            out: Option<PathBuf>,
            /// Run closed forms outside their regime
            #[arg(long)]
            force: bool,
            $(
                #[doc = $help]
                #[arg(long)]
                $field: Option<String>,
            )*
        }

        const KEYS: &[&str] = &["force", $(stringify!($field)),*];

        impl Flags {
            fn overrides(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                if self.force {
                    out.push(("force", "true".to_string()));
                }
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field), v.clone()));
                    }
                )*
                out
            }
        }
    };
}

flags! {
    gamma21 => "Ground-state dephasing γ₂₁ (s⁻¹ or xG3)",
    gamma3 => "Decay rate Γ₃ of |3⟩ (s⁻¹)",
    gamma4 => "Decay rate Γ₄ of |4⟩ (s⁻¹ or xG3)",
    omega_c => "Coupling Rabi frequency |Ω_c|",
    omega_p => "Probe Rabi frequency |Ω_p|",
    omega_24 => "Signal Rabi frequency |Ω₂₄|",
    phase_c => "Phase of Ω_c (rad)",
    phase_p => "Phase of Ω_p (rad)",
    phase_24 => "Phase of Ω₂₄ (rad)",
    t_end => "End of the time grid (s)",
    n_points => "Number of grid points",
    method => "exact | weak | strong | rk4",
    dt => "RK4 step (s)",
    unit => "dimensionless | normalized | absolute",
    r_weak => "Regime smallness threshold",
    atom_density => "Atom number density N (m⁻³)",
    dipole_31 => "Dipole moment |μ₃₁| (C·m)",
    exec => "parallel | sequential",
    omega_c_values => "fig2: comma-separated Ω_c values",
    omega_24_factors => "fig3: comma-separated Ω₂₄/Ω_c factors",
    signal_ratio => "fig2: Ω₂₄/Ω_c",
    probe_ratio => "fig2/fig3: Ω_p/Ω_c",
    omega_c_min => "sweep: smallest |Ω_c|",
    omega_c_max => "sweep: largest |Ω_c|",
    omega_24_min => "sweep: smallest |Ω₂₄|",
    omega_24_max => "sweep: largest |Ω₂₄|",
    n_c => "sweep: points along Ω_c",
    n_24 => "sweep: points along Ω₂₄",
}

/// Failure with the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::RegimeViolation { .. } => EXIT_REGIME,
            Error::SingularSteadyState => EXIT_NUMERICAL,
            ref e if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Integration method for `evolve`, `fig2` and `fig3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Weak,
    Strong,
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "weak" => Ok(Method::Weak),
            "strong" => Ok(Method::Strong),
            "rk4" => Ok(Method::Rk4),
            other => Err(CliError::config(format!(
                "unknown method '{other}' (expected exact, weak, strong or rk4)"
            ))),
        }
    }
}

/// Fully resolved parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub decay: DecayRates,
    /// Magnitude and phase of Ω_c, Ω_p, Ω₂₄; magnitudes may be absent.
    pub omega_c: Option<f64>,
    pub omega_p: Option<f64>,
    pub omega_24: Option<f64>,
    pub phases: (f64, f64, f64),
    pub t_end: Option<f64>,
    pub n_points: Option<usize>,
    pub method: Method,
    pub dt: Option<f64>,
    pub unit: ChiUnit,
    pub r_weak: f64,
    pub medium: Option<MediumConstants>,
    pub force: bool,
    pub exec: Execution,
    raw: BTreeMap<String, String>,
}

/// Parse a rate: a plain number in s⁻¹ or `<x>G3` meaning x·Γ₃.
pub fn parse_rate(text: &str, gamma3: f64) -> CliResult<f64> {
    let t = text.trim();
    let value = match t.strip_suffix("G3") {
        Some(prefix) => {
            let k = if prefix.trim().is_empty() {
                1.0
            } else {
                parse_number(prefix)?
            };
            k * gamma3
        }
        None => parse_number(t)?,
    };
    if !value.is_finite() || value < 0.0 {
        return Err(CliError::config(format!(
            "rate '{text}' must be finite and non-negative"
        )));
    }
    Ok(value)
}

fn parse_number(text: &str) -> CliResult<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(format!("'{text}' is not a finite number")))
}

fn parse_bool(text: &str) -> CliResult<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::config(format!("'{other}' is not a boolean"))),
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key = value", no + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "line {}: unknown key '{key}'",
                no + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::config(format!(
                "line {}: duplicate key '{key}'",
                no + 1
            )));
        }
    }
    Ok(map)
}

impl RunConfig {
    /// Resolve from a key/value map (file values already overridden by flags).
    pub fn from_map(raw: BTreeMap<String, String>) -> CliResult<Self> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let sodium = DecayRates::SODIUM;
        let gamma3 = get("gamma3")
            .map(parse_number)
            .transpose()?
            .unwrap_or(sodium.gamma3);
        let rate = |k: &str| get(k).map(|v| parse_rate(v, gamma3)).transpose();
        let decay = DecayRates::new(
            rate("gamma21")?.unwrap_or(sodium.gamma21),
            gamma3,
            rate("gamma4")?.unwrap_or(sodium.gamma4),
        )?;
        let phase = |k: &str| {
            get(k)
                .map(parse_number)
                .transpose()
                .map(|v| v.unwrap_or(0.0))
        };
        let positive = |k: &str| -> CliResult<Option<f64>> {
            match get(k).map(parse_number).transpose()? {
                Some(v) if v <= 0.0 => Err(CliError::config(format!("{k} must be positive"))),
                v => Ok(v),
            }
        };
        let n_points = get("n_points")
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::config(format!("n_points '{v}' is not a count")))
            })
            .transpose()?;
        let medium = match (positive("atom_density")?, positive("dipole_31")?) {
            (Some(n), Some(mu)) => Some(MediumConstants::new(n, mu)?),
            (None, None) => None,
            _ => {
                return Err(CliError::config(
                    "atom_density and dipole_31 must be given together",
                ))
            }
        };
        let unit = get("unit")
            .map(str::parse::<ChiUnit>)
            .transpose()?
            .unwrap_or_default();
        if unit == ChiUnit::Absolute && medium.is_none() {
            return Err(CliError::config(
                "unit = absolute needs atom_density and dipole_31",
            ));
        }
        let r_weak = get("r_weak")
            .map(parse_number)
            .transpose()?
            .unwrap_or(DEFAULT_R_WEAK);
        if !(r_weak > 0.0 && r_weak < 1.0) {
            return Err(CliError::config("r_weak must lie in (0, 1)"));
        }
        let exec = match get("exec") {
            None | Some("parallel") => Execution::Parallel,
            Some("sequential") => Execution::Sequential,
            Some(other) => {
                return Err(CliError::config(format!(
                    "unknown exec '{other}' (expected parallel or sequential)"
                )))
            }
        };
        Ok(RunConfig {
            decay,
            omega_c: rate("omega_c")?,
            omega_p: rate("omega_p")?,
            omega_24: rate("omega_24")?,
            phases: (phase("phase_c")?, phase("phase_p")?, phase("phase_24")?),
            t_end: positive("t_end")?,
            n_points,
            method: get("method")
                .map(str::parse)
                .transpose()?
                .unwrap_or(Method::Exact),
            dt: positive("dt")?,
            unit,
            r_weak,
            medium,
            force: get("force").map(parse_bool).transpose()?.unwrap_or(false),
            exec,
            raw,
        })
    }

    fn value(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn rate_or(&self, key: &str, default: f64) -> CliResult<f64> {
        self.value(key)
            .map(|v| parse_rate(v, self.decay.gamma3))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn number_or(&self, key: &str, default: f64) -> CliResult<f64> {
        self.value(key)
            .map(parse_number)
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn count_or(&self, key: &str, default: usize) -> CliResult<usize> {
        self.value(key)
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::config(format!("{key} '{v}' is not a count")))
            })
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn rate_list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.value(key) {
            None => Ok(default.to_vec()),
            Some(text) => text
                .split(',')
                .map(|v| parse_rate(v, self.decay.gamma3))
                .collect(),
        }
    }

    /// Rabi fields; every magnitude must be present.
    pub fn fields(&self) -> CliResult<RabiFields> {
        let need = |v: Option<f64>, k: &str| {
            v.ok_or_else(|| {
                CliError::config(format!(
                    "missing required parameter --{}",
                    k.replace('_', "-")
                ))
            })
        };
        let (pc, pp, ps) = self.phases;
        Ok(RabiFields::from_polar(
            (need(self.omega_c, "omega_c")?, pc),
            (need(self.omega_p, "omega_p")?, pp),
            (need(self.omega_24, "omega_24")?, ps),
        )?)
    }

    fn grid(&self, t_end: f64, n_points: usize) -> CliResult<Vec<f64>> {
        let t_end = self.t_end.unwrap_or(t_end);
        let n = self.n_points.unwrap_or(n_points);
        if n < 2 {
            return Err(CliError::config("n_points must be at least 2"));
        }
        Ok(time_grid(t_end, n)?)
    }

    fn rk4_dt(&self, fields: &RabiFields) -> f64 {
        self.dt
            .unwrap_or_else(|| DEFAULT_RK4_DT.min(max_stable_dt(&self.decay, fields)))
    }

    fn require_regime(&self, fields: &RabiFields, required: Regime) -> CliResult<()> {
        let actual = classify_regime(&self.decay, fields, self.r_weak);
        if self.force || actual == required {
            Ok(())
        } else {
            Err(Error::RegimeViolation { required, actual }.into())
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_complex(line: &mut String, z: Complex64) {
    let _ = write!(line, ",{},{}", sci(z.re), sci(z.im));
}

fn chi_in_unit(cfg: &RunConfig, fields: &RabiFields, a3: Complex64) -> CliResult<Complex64> {
    if fields.omega_p.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = chi_from_a3(0.0, a3, &cfg.decay, fields, cfg.medium.as_ref())?;
    Ok(s.value(cfg.unit)
        .expect("absolute unit checked at parse time"))
}

/// Amplitudes at every grid point by the configured method.
fn trace(cfg: &RunConfig, fields: &RabiFields, grid: &[f64]) -> CliResult<Vec<Amplitudes>> {
    match cfg.method {
        Method::Exact => {
            let modes = ModeDecomposition::new(&cfg.decay, fields)?;
            Ok(cfg.exec.map(grid, |&t| modes.evolve(t)))
        }
        Method::Weak => {
            cfg.require_regime(fields, Regime::WeakSignal)?;
            let sol = weak_solution(&cfg.decay, fields, true)?;
            Ok(cfg.exec.map(grid, |&t| sol.amplitudes(t)))
        }
        Method::Strong => {
            cfg.require_regime(fields, Regime::StrongSignal)?;
            let sol = strong_solution(&cfg.decay, fields, true)?;
            Ok(cfg.exec.map(grid, |&t| sol.amplitudes(t)))
        }
        Method::Rk4 => {
            let init = initial_amplitudes(fields)?;
            Ok(sample_reduced(
                &cfg.decay,
                fields,
                init,
                grid,
                cfg.rk4_dt(fields),
            )?)
        }
    }
}

fn warn_zero_probe(fields: &RabiFields, warn: &mut Vec<String>) {
    if fields.omega_p.norm() == 0.0 {
        warn.push("Ω_p = 0: susceptibility undefined, chi columns set to zero".into());
    }
}

fn cmd_eigen(cfg: &RunConfig, _warn: &mut Vec<String>) -> CliResult<String> {
    let fields = cfg.fields()?;
    let exact = cubic::spectrum(&cfg.decay, &fields)?;
    let scale = exact.max_abs().max(f64::MIN_POSITIVE);
    let mut rows: Vec<(&str, [Complex64; 3])> = vec![("exact", exact.lambdas)];
    if cfg.require_regime(&fields, Regime::WeakSignal).is_ok() {
        let weak = weak_solution(&cfg.decay, &fields, true)?;
        rows.push(("weak", match_to(&exact.lambdas, &weak.lambdas)));
    }
    if cfg.require_regime(&fields, Regime::StrongSignal).is_ok() {
        if let Ok(strong) = strong_solution(&cfg.decay, &fields, true) {
            rows.push(("strong", match_to(&exact.lambdas, &strong.lambdas)));
        }
    }
    let mut out = format!("{EIGEN_HEADER}\n");
    for (name, lambdas) in rows {
        for (k, (l, e)) in lambdas.iter().zip(exact.lambdas.iter()).enumerate() {
            let dev = (l - e).norm() / scale;
            let _ = writeln!(out, "{name},{k},{},{},{}", sci(l.re), sci(l.im), sci(dev));
        }
    }
    Ok(out)
}

fn cmd_evolve(cfg: &RunConfig, warn: &mut Vec<String>) -> CliResult<String> {
    let fields = cfg.fields()?;
    warn_zero_probe(&fields, warn);
    let grid = cfg.grid(100e-9, 1001)?;
    let amps = trace(cfg, &fields, &grid)?;
    let mut out = String::with_capacity(grid.len() * 180);
    out.push_str(EVOLVE_HEADER);
    out.push('\n');
    for (t, a) in grid.iter().zip(&amps) {
        let mut line = sci(*t);
        push_complex(&mut line, a.a2);
        push_complex(&mut line, a.a3);
        push_complex(&mut line, a.a4);
        push_complex(&mut line, chi_in_unit(cfg, &fields, a.a3)?);
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn cmd_steady(cfg: &RunConfig, warn: &mut Vec<String>) -> CliResult<String> {
    let fields = cfg.fields()?;
    warn_zero_probe(&fields, warn);
    let s = steady_state(&cfg.decay, &fields)?.amps;
    let mut line = String::new();
    for z in [s.a2, s.a3, s.a4, chi_in_unit(cfg, &fields, s.a3)?] {
        push_complex(&mut line, z);
    }
    Ok(format!("{STEADY_HEADER}\n{}\n", &line[1..]))
}

/// Shortest decimal form of a multiple, for column labels.
fn label(x: f64) -> String {
    format!("{}", (x * 1e12).round() / 1e12)
}

fn series_csv(
    cfg: &RunConfig,
    grid: &[f64],
    columns: &[(String, RabiFields)],
) -> CliResult<String> {
    let traces: Vec<Vec<Complex64>> = columns
        .iter()
        .map(|(_, fields)| {
            let amps = trace(cfg, fields, grid)?;
            amps.iter()
                .map(|a| chi_in_unit(cfg, fields, a.a3))
                .collect()
        })
        .collect::<CliResult<_>>()?;
    let mut out = String::from("t_s");
    for (name, _) in columns {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (k, t) in grid.iter().enumerate() {
        out.push_str(&sci(*t));
        for tr in &traces {
            let _ = write!(out, ",{}", sci(tr[k].im));
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_fig2(cfg: &RunConfig, _warn: &mut Vec<String>) -> CliResult<String> {
    let g3 = cfg.decay.gamma3;
    let values = cfg.rate_list("omega_c_values", &[0.5 * g3, g3, 2.0 * g3, 4.0 * g3])?;
    let signal = cfg.number_or("signal_ratio", 0.1)?;
    let probe = cfg.number_or("probe_ratio", 0.01)?;
    let (pc, pp, ps) = cfg.phases;
    let columns = values
        .iter()
        .map(|&oc| {
            let fields = RabiFields::from_polar((oc, pc), (probe * oc, pp), (signal * oc, ps))?;
            Ok((format!("im_chi_omega_c_{}G3", label(oc / g3)), fields))
        })
        .collect::<CliResult<Vec<_>>>()?;
    series_csv(cfg, &cfg.grid(400e-9, 8001)?, &columns)
}

fn cmd_fig3(cfg: &RunConfig, _warn: &mut Vec<String>) -> CliResult<String> {
    let g3 = cfg.decay.gamma3;
    let oc = cfg.omega_c.unwrap_or(g3);
    let factors = match cfg.value("omega_24_factors") {
        None => vec![2.0, 5.0, 20.0, 100.0],
        Some(text) => text
            .split(',')
            .map(parse_number)
            .collect::<CliResult<_>>()?,
    };
    let probe = cfg.number_or("probe_ratio", 0.1)?;
    let (pc, pp, ps) = cfg.phases;
    let columns = factors
        .iter()
        .map(|&k| {
            let fields = RabiFields::from_polar((oc, pc), (probe * oc, pp), (k * oc, ps))?;
            Ok((format!("im_chi_omega_24_{}x", label(k)), fields))
        })
        .collect::<CliResult<Vec<_>>>()?;
    series_csv(cfg, &cfg.grid(200e-9, 20001)?, &columns)
}

fn log_space(lo: f64, hi: f64, n: usize) -> CliResult<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(CliError::config(
            "sweep bounds need 0 < min ≤ max and at least one point",
        ));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

fn cmd_sweep(cfg: &RunConfig, _warn: &mut Vec<String>) -> CliResult<String> {
    let g3 = cfg.decay.gamma3;
    let cs = log_space(
        cfg.rate_or("omega_c_min", 0.1 * g3)?,
        cfg.rate_or("omega_c_max", 10.0 * g3)?,
        cfg.count_or("n_c", 21)?,
    )?;
    let ss = log_space(
        cfg.rate_or("omega_24_min", 0.01 * g3)?,
        cfg.rate_or("omega_24_max", 100.0 * g3)?,
        cfg.count_or("n_24", 21)?,
    )?;
    let points: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| ss.iter().map(move |&s| (c, s)))
        .collect();
    let (pc, _, ps) = cfg.phases;
    let rows = cfg.exec.try_map(&points, |&(c, s)| -> CliResult<String> {
        // the susceptibility is probe-independent; a nominal weak probe sets the regime label
        let fields = RabiFields::from_polar((c, pc), (0.01 * c, 0.0), (s, ps))?;
        let chi = weak_steady_chi(&cfg.decay, &fields)?;
        let value = match cfg.unit {
            ChiUnit::Normalized => chi,
            ChiUnit::Dimensionless => chi * g3,
            ChiUnit::Absolute => chi * cfg.medium.as_ref().map_or(1.0, MediumConstants::chi_unit),
        };
        let regime = match classify_regime(&cfg.decay, &fields, cfg.r_weak) {
            Regime::WeakSignal => "weak",
            Regime::StrongSignal => "strong",
            Regime::General => "general",
        };
        Ok(format!(
            "{},{},{regime},{}\n",
            sci(c),
            sci(s),
            sci(value.im)
        ))
    })?;
    let mut out = String::from("omega_c,omega_24,regime,im_chi\n");
    for r in rows {
        out.push_str(&r);
    }
    Ok(out)
}

fn use_color() -> bool {
    std::env::var_os("EIT4_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn diagnostic(kind: &str, ansi: &str, message: &str) {
    if use_color() {
        eprintln!("\x1b[{ansi}m{kind}\x1b[0m: {message}");
    } else {
        eprintln!("{kind}: {message}");
    }
}

fn load(flags: &Flags) -> CliResult<RunConfig> {
    let mut map = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError {
                code: EXIT_CONFIG,
                message: format!("{}: {e}", path.display()),
            })?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in flags.overrides() {
        map.insert(k.to_string(), v);
    }
    RunConfig::from_map(map)
}

type Runner = fn(&RunConfig, &mut Vec<String>) -> CliResult<String>;

fn execute(command: &Command, warn: &mut Vec<String>) -> CliResult<(String, Option<PathBuf>)> {
    let (flags, run): (&Flags, Runner) = match command {
        Command::Eigen(f) => (f, cmd_eigen),
        Command::Evolve(f) => (f, cmd_evolve),
        Command::Steady(f) => (f, cmd_steady),
        Command::Fig2(f) => (f, cmd_fig2),
        Command::Fig3(f) => (f, cmd_fig3),
        Command::Sweep(f) => (f, cmd_sweep),
    };
    let cfg = load(flags)?;
    Ok((run(&cfg, warn)?, flags.out.clone()))
}

/// Run the tool on `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut warnings = Vec::new();
    let result = execute(&cli.command, &mut warnings);
    for w in &warnings {
        diagnostic("warning", "33", w);
    }
    let (csv, out) = match result {
        Ok(v) => v,
        Err(e) => {
            diagnostic("error", "31", &e.message);
            return e.code;
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, csv.as_bytes()).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            diagnostic("error", "31", &e.message);
            e.code
        }
    }
}
