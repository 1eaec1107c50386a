//! `gbt` command-line front end.
//!
//! Every command writes newline-delimited JSON to stdout under `--json`
//! and a human-readable log otherwise. Diagnostics go to stderr.
//! Exit codes: [`EXIT_OK`], [`EXIT_FAILURE`] (a check or fidelity failed),
//! [`EXIT_USAGE`] (bad flags or an invalid configuration).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bell::BellIndex;
use crate::eigen::eig_hermitian;
use crate::error::{GbtError, Result};
use crate::measurement::seeded_rng;
use crate::teleport::{
    run_degenerate_demo, run_teleport, DegenerateDemoReport, ProtocolConfig, TeleportReport,
};
use crate::tensor::{random_state, split_index, CNum, StateVec};
use crate::verify::{run_suite, Check, Suite};
use crate::weyl::{build_observable, ObservableSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Mixed into the seed for the generator that draws `--input random`, so
/// input draws and measurement draws use unrelated streams.
const INPUT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Parser)]
#[command(
    name = "gbt",
    version,
    about = "Qudit teleportation through generalized Bell states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the protocol for one or more seeded trials.
    Teleport(Flags),
    /// Check the algebraic identities behind the protocol.
    Verify(Flags),
    /// Eigenvalues and multiplicities of an observable.
    Spectrum(Flags),
    /// Compare a degenerate qubit observable against a good one.
    DemoDegenerate(Flags),
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Local dimension d.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Input amplitudes `re` or `re+imj`, comma separated, or `random`.
    #[arg(long, allow_hyphen_values = true)]
    pub input: Option<String>,
    /// Rescale a non-normalized input instead of rejecting it.
    #[arg(long)]
    pub normalize: bool,
    /// Resource Bell state as `m,n`.
    #[arg(long)]
    pub resource: Option<String>,
    /// paper-d2, paper-d3 (teleport); op12, op13, good-d2, good-d3 (spectrum);
    /// op12, op13 (demo-degenerate).
    #[arg(long)]
    pub preset: Option<String>,
    /// Eigenvalues on the Bell states in flat order, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub observable: Option<String>,
    #[arg(long, env = "GBT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// all, or one of orthonormality, inversion, formula, projectors,
    /// coefficients, corrections.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Teleport,
    Verify,
    Spectrum,
    DemoDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSpec {
    Random,
    Amplitudes(Vec<CNum>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PaperD2,
    PaperD3,
    Op12,
    Op13,
    GoodD2,
    GoodD3,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper-d2" => Ok(Self::PaperD2),
            "paper-d3" => Ok(Self::PaperD3),
            "op12" => Ok(Self::Op12),
            "op13" => Ok(Self::Op13),
            "good-d2" => Ok(Self::GoodD2),
            "good-d3" => Ok(Self::GoodD3),
            _ => Err(GbtError::InvalidConfig(format!("unknown preset `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PaperD2 => "paper-d2",
            Self::PaperD3 => "paper-d3",
            Self::Op12 => "op12",
            Self::Op13 => "op13",
            Self::GoodD2 => "good-d2",
            Self::GoodD3 => "good-d3",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::PaperD3 | Self::GoodD3 => 3,
            _ => 2,
        }
    }

    pub fn observable(&self) -> ObservableSpec {
        match self {
            Self::PaperD2 | Self::GoodD2 => ObservableSpec::good_qubit(),
            Self::PaperD3 | Self::GoodD3 => {
                ObservableSpec::descending(3).expect("3 is a valid dimension")
            }
            Self::Op12 => ObservableSpec::op12(),
            Self::Op13 => ObservableSpec::op13(),
        }
    }
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub command: CommandKind,
    pub dim: Option<usize>,
    pub input: Option<InputSpec>,
    pub normalize: bool,
    pub resource: Option<(usize, usize)>,
    pub preset: Option<Preset>,
    pub observable_eigenvalues: Option<Vec<f64>>,
    pub suite: Option<Suite>,
    pub seed: u64,
    pub trials: usize,
    pub output_format: OutputFormat,
}

/// Parses one amplitude: `re`, `re+imj`, `re-imj` or `imj`.
pub fn parse_complex(s: &str) -> Result<CNum> {
    let bad = || GbtError::InvalidConfig(format!("malformed amplitude `{s}`"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('j') else {
        let re = t.parse::<f64>().map_err(|_| bad())?;
        return if re.is_finite() {
            Ok(CNum::new(re, 0.0))
        } else {
            Err(bad())
        };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().map_err(|_| bad())?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let z = CNum::new(re, im);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    Ok(z)
}

pub fn parse_amplitudes(s: &str) -> Result<InputSpec> {
    if s.trim() == "random" {
        return Ok(InputSpec::Random);
    }
    s.split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()
        .map(InputSpec::Amplitudes)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| GbtError::InvalidConfig(format!("malformed {what} `{s}`")))
        })
        .collect()
}

impl RunRequest {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, f) = match cli.command {
            Command::Teleport(f) => (CommandKind::Teleport, f),
            Command::Verify(f) => (CommandKind::Verify, f),
            Command::Spectrum(f) => (CommandKind::Spectrum, f),
            Command::DemoDegenerate(f) => (CommandKind::DemoDegenerate, f),
        };
        let resource = match &f.resource {
            Some(r) => match parse_list::<usize>(r, "resource")?[..] {
                [m, n] => Some((m, n)),
                _ => {
                    return Err(GbtError::InvalidConfig(format!(
                        "resource must be `m,n`, got `{r}`"
                    )))
                }
            },
            None => None,
        };
        let observable_eigenvalues = match &f.observable {
            Some(o) => {
                let values = parse_list::<f64>(o, "observable")?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(GbtError::NonFinite("observable eigenvalue"));
                }
                Some(values)
            }
            None => None,
        };
        let req = RunRequest {
            command,
            dim: f.dim,
            input: f.input.as_deref().map(parse_amplitudes).transpose()?,
            normalize: f.normalize,
            resource,
            preset: f.preset.as_deref().map(Preset::parse).transpose()?,
            observable_eigenvalues,
            suite: match f.suite.as_deref() {
                None | Some("all") => None,
                Some(s) => Some(s.parse()?),
            },
            seed: f.seed,
            trials: f.trials,
            output_format: if f.json {
                OutputFormat::Json
            } else {
                OutputFormat::Text
            },
        };
        req.check_consistency(&f)?;
        Ok(req)
    }

    fn check_consistency(&self, f: &Flags) -> Result<()> {
        let reject = |set: bool, flag: &str| -> Result<()> {
            if set {
                Err(GbtError::InvalidConfig(format!(
                    "{flag} does not apply to `{}`",
                    self.command_name()
                )))
            } else {
                Ok(())
            }
        };
        if let Some(d) = self.dim {
            crate::bell::check_dim(d)?;
        }
        if self.trials == 0 {
            return Err(GbtError::InvalidConfig("--trials must be positive".into()));
        }
        let preset_ok = |allowed: &[Preset]| -> Result<()> {
            match self.preset {
                Some(p) if !allowed.contains(&p) => Err(GbtError::InvalidConfig(format!(
                    "preset `{}` does not apply to `{}`",
                    p.name(),
                    self.command_name()
                ))),
                _ => Ok(()),
            }
        };
        match self.command {
            CommandKind::Teleport => {
                reject(f.suite.is_some(), "--suite")?;
                preset_ok(&[Preset::PaperD2, Preset::PaperD3])?;
            }
            CommandKind::Verify => {
                reject(f.input.is_some(), "--input")?;
                reject(f.normalize, "--normalize")?;
                reject(f.resource.is_some(), "--resource")?;
                reject(f.preset.is_some(), "--preset")?;
                reject(f.observable.is_some(), "--observable")?;
                reject(f.trials != 1, "--trials")?;
            }
            CommandKind::Spectrum => {
                reject(f.input.is_some(), "--input")?;
                reject(f.normalize, "--normalize")?;
                reject(f.resource.is_some(), "--resource")?;
                reject(f.suite.is_some(), "--suite")?;
                reject(f.trials != 1, "--trials")?;
                if self.preset.is_some() == self.observable_eigenvalues.is_some() {
                    return Err(GbtError::InvalidConfig(
                        "spectrum needs exactly one of --preset and --observable".into(),
                    ));
                }
            }
            CommandKind::DemoDegenerate => {
                reject(f.suite.is_some(), "--suite")?;
                reject(f.trials != 1, "--trials")?;
                preset_ok(&[Preset::Op12, Preset::Op13])?;
                if self.dim.is_some_and(|d| d != 2) {
                    return Err(GbtError::InvalidConfig(
                        "demo-degenerate runs on qubits (--dim 2)".into(),
                    ));
                }
                if matches!(self.input, Some(InputSpec::Random)) {
                    return Err(GbtError::InvalidConfig(
                        "demo-degenerate needs explicit amplitudes".into(),
                    ));
                }
            }
        }
        if let (Some(p), Some(d)) = (self.preset, self.dim) {
            if p.dim() != d {
                return Err(GbtError::InvalidConfig(format!(
                    "preset `{}` is for d = {}, got --dim {d}",
                    p.name(),
                    p.dim()
                )));
            }
        }
        Ok(())
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            CommandKind::Teleport => "teleport",
            CommandKind::Verify => "verify",
            CommandKind::Spectrum => "spectrum",
            CommandKind::DemoDegenerate => "demo-degenerate",
        }
    }

    fn resolved_dim(&self) -> usize {
        let from_observable = self.observable_eigenvalues.as_ref().and_then(|v| {
            let d = (v.len() as f64).sqrt().round() as usize;
            (d * d == v.len()).then_some(d)
        });
        let from_input = match &self.input {
            Some(InputSpec::Amplitudes(a)) => Some(a.len()),
            _ => None,
        };
        self.dim
            .or(self.preset.map(|p| p.dim()))
            .or(from_observable)
            .or(from_input)
            .unwrap_or(2)
    }

    fn observable_for(&self, d: usize) -> Result<Option<ObservableSpec>> {
        match &self.observable_eigenvalues {
            Some(v) => ObservableSpec::new(d, v.clone()).map(Some),
            None => Ok(self.preset.map(|p| p.observable())),
        }
    }

    fn resource_for(&self, d: usize) -> Result<Option<BellIndex>> {
        self.resource
            .map(|(m, n)| BellIndex::new(d, m, n))
            .transpose()
    }

    fn fixed_amplitudes(&self, amps: &[CNum]) -> Result<Vec<CNum>> {
        let state = if self.normalize {
            StateVec::normalized(vec![amps.len()], amps.to_vec())?
        } else {
            StateVec::new(vec![amps.len()], amps.to_vec())?
        };
        Ok(state.amps().to_vec())
    }
}

/// Builds one protocol configuration per trial. Trial `i` measures with
/// seed `seed + i`; `--input random` draws a fresh input per trial.
pub fn teleport_configs(req: &RunRequest) -> Result<Vec<ProtocolConfig>> {
    let d = req.resolved_dim();
    let (default_resource, default_observable) = match req.preset {
        Some(Preset::PaperD2) | Some(Preset::PaperD3) => {
            let cfg = match d {
                2 => {
                    ProtocolConfig::standard_d2(vec![CNum::new(1.0, 0.0), CNum::new(0.0, 0.0)], 0)?
                }
                _ => ProtocolConfig::standard_d3(
                    vec![
                        CNum::new(1.0, 0.0),
                        CNum::new(0.0, 0.0),
                        CNum::new(0.0, 0.0),
                    ],
                    0,
                )?,
            };
            (cfg.resource, cfg.observable)
        }
        _ => (BellIndex::new(d, 0, 0)?, ObservableSpec::descending(d)?),
    };
    let resource = req.resource_for(d)?.unwrap_or(default_resource);
    let observable = match &req.observable_eigenvalues {
        Some(v) => ObservableSpec::new(d, v.clone())?,
        None => default_observable,
    };
    let mut input_rng = seeded_rng(req.seed ^ INPUT_STREAM);
    let fixed = match req.input.as_ref().unwrap_or(&InputSpec::Random) {
        InputSpec::Random => None,
        InputSpec::Amplitudes(a) => Some(req.fixed_amplitudes(a)?),
    };
    (0..req.trials)
        .map(|i| {
            let amps = match &fixed {
                Some(a) => a.clone(),
                None => random_state(d, &mut input_rng).amps().to_vec(),
            };
            ProtocolConfig::new(
                d,
                amps,
                resource,
                observable.clone(),
                req.seed.wrapping_add(i as u64),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub value: f64,
    pub multiplicity: usize,
    /// Bell flat indices carrying this eigenvalue.
    pub bell_states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub source: String,
    pub eigenvalues: Vec<SpectrumLine>,
    pub degenerate: bool,
}

pub fn spectrum_report(req: &RunRequest) -> Result<SpectrumReport> {
    let d = req.resolved_dim();
    let spec = req
        .observable_for(d)?
        .ok_or_else(|| GbtError::InvalidConfig("no observable given".into()))?;
    let form = eig_hermitian(&build_observable(&spec))?;
    let eigenvalues = form
        .eigenvalues()
        .iter()
        .zip(form.multiplicities())
        .map(|(&value, &multiplicity)| SpectrumLine {
            value,
            multiplicity,
            bell_states: (1..=d * d)
                .filter(|&k| (spec.eigenvalues()[k - 1] - value).abs() < crate::tol::GROUP_TOL)
                .collect(),
        })
        .collect();
    Ok(SpectrumReport {
        dim: d,
        source: match req.preset {
            Some(p) => p.name().to_string(),
            None => "eigenvalues".to_string(),
        },
        eigenvalues,
        degenerate: form.is_degenerate(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoLine {
    pub label: String,
    pub report: DegenerateDemoReport,
}

/// The degenerate observable and the good qubit observable run on the
/// same input and resource.
pub fn demo_lines(req: &RunRequest) -> Result<Vec<DemoLine>> {
    let amps = match &req.input {
        Some(InputSpec::Amplitudes(a)) => req.fixed_amplitudes(a)?,
        _ => vec![CNum::new(0.6, 0.0), CNum::new(0.8, 0.0)],
    };
    let resource = req.resource_for(2)?.unwrap_or(BellIndex::new(2, 1, 1)?);
    let (label, hazard) = match &req.observable_eigenvalues {
        Some(v) => (
            "eigenvalues".to_string(),
            ObservableSpec::new(2, v.clone())?,
        ),
        None => {
            let p = req.preset.unwrap_or(Preset::Op13);
            (p.name().to_string(), p.observable())
        }
    };
    [
        (label, hazard),
        ("good-d2".to_string(), ObservableSpec::good_qubit()),
    ]
    .into_iter()
    .map(|(label, obs)| {
        let cfg = ProtocolConfig::new(2, amps.clone(), resource, obs, req.seed)?;
        Ok(DemoLine {
            label,
            report: run_degenerate_demo(&cfg)?,
        })
    })
    .collect()
}

fn format_amp(a: CNum) -> String {
    const CUT: f64 = 5e-7;
    match (a.re.abs() < CUT, a.im.abs() < CUT) {
        (_, true) => format!("{:.6}", a.re),
        (true, false) => format!("{:.6}i", a.im),
        (false, false) => format!("({:.6}{:+.6}i)", a.re, a.im),
    }
}

/// Ket notation with amplitudes rounded to 6 digits; negligible terms are
/// dropped.
pub fn format_ket(state: &StateVec) -> String {
    let wide = state.dims().iter().any(|&d| d > 10);
    let mut out = String::new();
    for (j, &a) in state.amps().iter().enumerate() {
        if a.norm() < 5e-7 {
            continue;
        }
        let digits = split_index(j, state.dims());
        let label = if wide {
            digits
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        } else {
            digits.iter().map(|x| x.to_string()).collect()
        };
        let amp = format_amp(a);
        match (out.is_empty(), amp.strip_prefix('-')) {
            (true, _) => out.push_str(&amp),
            (false, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (false, None) => {
                out.push_str(" + ");
                out.push_str(&amp);
            }
        }
        let _ = write!(out, "|{label}>");
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

fn teleport_text(r: &TeleportReport, trial: usize) -> String {
    let bell = r.config.observable.nearest_bell(r.outcome.eigenvalue);
    format!(
        "trial {trial}: eigenvalue {:.6} (p = {:.6}) -> message {} {bell}, correction {}, fidelity {:.6}{}\n  bob: {}",
        r.outcome.eigenvalue,
        r.outcome.probability,
        r.message.bell_flat_index,
        r.correction,
        r.fidelity,
        if r.success { "" } else { "  FAILED" },
        format_ket(&r.bob_state),
    )
}

fn cmd_teleport(req: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let configs = match teleport_configs(req) {
        Ok(c) => c,
        Err(e) => return usage(err, &e),
    };
    let mut passed = 0;
    for (i, cfg) in configs.iter().enumerate() {
        let report = match run_teleport(cfg) {
            Ok(r) => r,
            Err(e @ GbtError::DegenerateObservable { .. }) => return usage(err, &e),
            Err(e) => {
                writeln!(err, "gbt: trial {i}: {e}")?;
                return Ok(EXIT_FAILURE);
            }
        };
        passed += usize::from(report.success);
        match req.output_format {
            OutputFormat::Json => emit_json(out, &report)?,
            OutputFormat::Text => {
                if i == 0 {
                    writeln!(out, "input: {}", format_ket(&cfg.input_state()))?;
                }
                writeln!(out, "{}", teleport_text(&report, i))?;
            }
        }
    }
    writeln!(err, "gbt: {passed}/{} trials succeeded", configs.len())?;
    Ok(if passed == configs.len() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_verify(req: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let dims = match req.dim {
        Some(d) => vec![d],
        None => vec![2, 3],
    };
    let suites: Vec<Suite> = match req.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut checks: Vec<Check> = Vec::new();
    for &d in &dims {
        for &s in &suites {
            match run_suite(s, d, req.seed) {
                Ok(c) => checks.extend(c),
                Err(e) => {
                    writeln!(err, "gbt: suite {s} at d = {d}: {e}")?;
                    return Ok(EXIT_FAILURE);
                }
            }
        }
    }
    for c in &checks {
        match req.output_format {
            OutputFormat::Json => emit_json(out, c)?,
            OutputFormat::Text => writeln!(
                out,
                "{} {:<15} d={} {:<40} max_error={:.3e} tol={:.0e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.dim,
                c.name,
                c.max_error,
                c.tolerance
            )?,
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(err, "gbt: {} checks, {failed} failed", checks.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_spectrum(req: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let report = match spectrum_report(req) {
        Ok(r) => r,
        Err(e) => return usage(err, &e),
    };
    match req.output_format {
        OutputFormat::Json => emit_json(out, &report)?,
        OutputFormat::Text => {
            writeln!(out, "{} (d = {})", report.source, report.dim)?;
            for l in &report.eigenvalues {
                writeln!(
                    out,
                    "  {:>10.6}  multiplicity {}  bell {:?}",
                    l.value, l.multiplicity, l.bell_states
                )?;
            }
        }
    }
    if report.degenerate {
        writeln!(
            err,
            "gbt: warning: degenerate spectrum, a measurement cannot identify the Bell state"
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_demo(req: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let lines = match demo_lines(req) {
        Ok(l) => l,
        Err(e) => return usage(err, &e),
    };
    for line in &lines {
        let r = &line.report;
        match req.output_format {
            OutputFormat::Json => emit_json(out, line)?,
            OutputFormat::Text => {
                writeln!(
                    out,
                    "{} ({}degenerate), average fidelity {:.6}, best achievable {:.6}",
                    line.label,
                    if r.degenerate { "" } else { "non-" },
                    r.average_fidelity,
                    r.best_average_fidelity
                )?;
                for o in &r.outcomes {
                    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
                    writeln!(
                        out,
                        "  eigenvalue {:>9.6} x{}  p = {:.6}  bell {:?}  correction {}  purity {}  fidelity {}",
                        o.eigenvalue,
                        o.multiplicity,
                        o.probability,
                        o.bell_states,
                        o.correction,
                        opt(o.bob_purity),
                        opt(o.fidelity)
                    )?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn usage(err: &mut dyn Write, e: &GbtError) -> io::Result<i32> {
    writeln!(err, "gbt: {e}")?;
    Ok(EXIT_USAGE)
}

pub fn execute(req: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match req.command {
        CommandKind::Teleport => cmd_teleport(req, out, err),
        CommandKind::Verify => cmd_verify(req, out, err),
        CommandKind::Spectrum => cmd_spectrum(req, out, err),
        CommandKind::DemoDegenerate => cmd_demo(req, out, err),
    };
    let code = result.unwrap_or_else(|e| {
        let _ = writeln!(err, "gbt: output error: {e}");
        EXIT_FAILURE
    });
    let _ = out.flush();
    code
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match RunRequest::from_cli(cli) {
        Ok(req) => execute(&req, out, err),
        Err(e) => usage(err, &e).unwrap_or(EXIT_USAGE),
    }
}

pub fn main_entry() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("gbt").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("0.6").unwrap(), CNum::new(0.6, 0.0));
        assert_eq!(parse_complex("0.3+0.4j").unwrap(), CNum::new(0.3, 0.4));
        assert_eq!(parse_complex("-0.3-0.4j").unwrap(), CNum::new(-0.3, -0.4));
        assert_eq!(parse_complex("-0.5j").unwrap(), CNum::new(0.0, -0.5));
        assert_eq!(parse_complex("1e-3+2E-1j").unwrap(), CNum::new(1e-3, 0.2));
        assert_eq!(parse_complex("j").unwrap(), CNum::new(0.0, 1.0));
        for bad in ["", "x", "0.3+0.4", "0.3+xj", "nan", "1..2"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        assert!(matches!(parse_amplitudes("random"), Ok(InputSpec::Random)));
        assert!(parse_amplitudes("0.6,,0.8").is_err());
    }

    #[test]
    fn ket_text() {
        let s = StateVec::new(vec![2], vec![CNum::new(0.6, 0.0), CNum::new(-0.8, 0.0)]).unwrap();
        assert_eq!(format_ket(&s), "0.600000|0> - 0.800000|1>");
        let s = StateVec::new(vec![2], vec![CNum::new(0.0, 0.0), CNum::new(0.6, 0.8)]).unwrap();
        assert_eq!(format_ket(&s), "(0.600000+0.800000i)|1>");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            call(&["teleport", "--input", "0.6,0.8", "--preset", "paper-d2", "--seed", "1"]).0,
            0
        );
        assert_eq!(
            call(&["teleport", "--input", "1,1", "--dim", "2"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            call(&["teleport", "--input", "1,1", "--dim", "2", "--normalize"]).0,
            0
        );
        assert_eq!(call(&["teleport", "--input", "0.6,zz"]).0, EXIT_USAGE);
        assert_eq!(
            call(&["teleport", "--dim", "3", "--preset", "paper-d2"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            call(&["teleport", "--dim", "2", "--observable", "2,0,0,-2"]).0,
            EXIT_USAGE
        );
        assert_eq!(call(&["teleport", "--trials", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["spectrum"]).0, EXIT_USAGE);
        assert_eq!(call(&["spectrum", "--preset", "nope"]).0, EXIT_USAGE);
        assert_eq!(call(&["verify", "--suite", "nope"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn teleport_reports_per_trial() {
        let (code, out, _) = call(&[
            "teleport", "--dim", "3", "--input", "1,0,0", "--preset", "paper-d3", "--seed", "7",
            "--trials", "50", "--json",
        ]);
        assert_eq!(code, 0);
        let reports: Vec<TeleportReport> = out
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(reports.len(), 50);
        for (i, r) in reports.iter().enumerate() {
            assert!(r.success);
            assert_eq!(r.config.seed, 7 + i as u64);
            assert!((1..=9).contains(&r.message.bell_flat_index));
        }
    }

    #[test]
    fn random_inputs_general_dimension() {
        let (code, out, _) = call(&[
            "teleport", "--dim", "4", "--input", "random", "--seed", "3", "--trials", "100",
            "--json",
        ]);
        assert_eq!(code, 0);
        let reports: Vec<TeleportReport> = out
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(reports.len(), 100);
        assert!(reports.iter().all(|r| r.success));
        assert_ne!(reports[0].config.input_amps, reports[1].config.input_amps);
    }

    #[test]
    fn spectrum_presets() {
        let (code, out, err) = call(&["spectrum", "--preset", "op13", "--json"]);
        assert_eq!(code, 0);
        let r: SpectrumReport = serde_json::from_str(out.trim()).unwrap();
        assert!(r.degenerate);
        assert_eq!(
            r.eigenvalues
                .iter()
                .map(|l| l.multiplicity)
                .collect::<Vec<_>>(),
            [1, 2, 1]
        );
        assert!(err.contains("degenerate"));

        let (_, out, _) = call(&["spectrum", "--preset", "good-d2", "--json"]);
        let r: SpectrumReport = serde_json::from_str(out.trim()).unwrap();
        assert!(!r.degenerate);
        let values: Vec<f64> = r.eigenvalues.iter().map(|l| l.value).collect();
        for (v, w) in values.iter().zip([3.0, 1.0, -1.0, -3.0]) {
            assert!((v - w).abs() < 1e-10);
        }

        let (_, out, _) = call(&["spectrum", "--preset", "op12", "--json"]);
        let r: SpectrumReport = serde_json::from_str(out.trim()).unwrap();
        assert!(r.degenerate && r.eigenvalues.iter().any(|l| l.multiplicity >= 2));

        let (code, out, _) = call(&["spectrum", "--observable", "1,2,3,4,5,6,7,8,9", "--json"]);
        assert_eq!(code, 0);
        let r: SpectrumReport = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(r.dim, 3);
        assert_eq!(r.eigenvalues[0].bell_states, vec![9]);
    }

    #[test]
    fn demo_side_by_side() {
        let (code, out, _) = call(&["demo-degenerate", "--json"]);
        assert_eq!(code, 0);
        let lines: Vec<DemoLine> = out
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].label, "op13");
        assert!(lines[0].report.average_fidelity < 1.0 - 1e-3);
        assert!((lines[1].report.average_fidelity - 1.0).abs() < 1e-9);

        let h = format!("{}", 1.0 / 2f64.sqrt());
        let input = format!("{h},{h}");
        let (_, out, _) = call(&["demo-degenerate", "--input", &input, "--json"]);
        let first: DemoLine = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        let probs: Vec<f64> = first
            .report
            .outcomes
            .iter()
            .map(|o| o.probability)
            .collect();
        for (p, w) in probs.iter().zip([0.25, 0.5, 0.25]) {
            assert!((p - w).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_selected_suite() {
        let (code, out, _) = call(&["verify", "--suite", "corrections", "--dim", "3", "--json"]);
        assert_eq!(code, 0);
        let checks: Vec<Check> = out
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert!(!checks.is_empty());
        assert!(checks
            .iter()
            .all(|c| c.passed && c.suite == Suite::Corrections));
    }

    #[test]
    fn text_mode_is_readable() {
        let (code, out, _) = call(&[
            "teleport", "--input", "0.6,0.8", "--preset", "paper-d2", "--seed", "1",
        ]);
        assert_eq!(code, 0);
        assert!(out.starts_with("input: 0.600000|0> + 0.800000|1>"));
        assert!(out.contains("fidelity 1.000000"));
    }
}
