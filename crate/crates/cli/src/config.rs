//! Run configuration: flags over config file over defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use weakmeas_core::analytics::{lambda_grid, CURVE_NAMES};
use weakmeas_core::ed::MAX_ED_SPINS;
use weakmeas_core::MeasurementScheme;

/// Invalid or conflicting run parameters (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Ground,
    Uniform,
    Ensemble,
    Sweep,
    Analytic,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ground => "ground",
            Command::Uniform => "uniform",
            Command::Ensemble => "ensemble",
            Command::Sweep => "sweep",
            Command::Analytic => "analytic",
            Command::Oracle => "oracle",
        }
    }
}

/// Parameters that may come from flags or from a config file. Unset values
/// fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Number of spins.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Measurement strength in [0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// λ grid as start:stop:count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// born, forced, biased, uniform-plus or uniform-minus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Fixed P(+) of the biased scheme.
    #[arg(long = "p-plus")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_plus: Option<f64>,
    /// P(+) offset from the optimal bias (biased scheme and c_eff_biased curve).
    #[arg(long = "delta-p", allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_p: Option<f64>,
    /// Trajectories per ensemble.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// auto, every:N, or a comma-separated list of interval lengths.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cuts: Option<String>,
    /// Format of tabular outputs.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Curve name for `analytic`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    /// Measurement axis for `oracle`.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisArg>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Settings { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl Settings {
    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        overlay!(
            self,
            lower,
            length,
            lambda,
            grid,
            scheme,
            p_plus,
            delta_p,
            trajectories,
            seed,
            cuts,
            format,
            threads,
            curve,
            axis,
            out
        )
    }

    /// Reads a config file. A run manifest is accepted too; its command
    /// must match.
    pub fn load(path: &Path, command: Command) -> anyhow::Result<Settings> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("config {} is not JSON: {e}", path.display())))?;
        let body = match value.get("config") {
            Some(inner) => {
                if let Some(cmd) = value.get("command").and_then(|c| c.as_str()) {
                    if cmd != command.name() {
                        return Err(config_error(format!(
                            "manifest {} belongs to `{cmd}`, not `{}`",
                            path.display(),
                            command.name()
                        )));
                    }
                }
                inner.clone()
            }
            None => value,
        };
        serde_json::from_value(body)
            .map_err(|e| config_error(format!("config {}: {e}", path.display())))
    }
}

/// How the biased scheme picks `P(+)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bias {
    Fixed(f64),
    Offset(f64),
}

/// Cut selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Cuts {
    Auto,
    Every(usize),
    List(Vec<usize>),
}

impl Cuts {
    fn parse(spec: &str) -> Result<Self, String> {
        let spec = spec.trim();
        if spec == "auto" {
            return Ok(Cuts::Auto);
        }
        if let Some(n) = spec.strip_prefix("every:") {
            let n: usize = n.parse().map_err(|_| format!("bad cut stride '{n}'"))?;
            if n == 0 {
                return Err("cut stride must be positive".into());
            }
            return Ok(Cuts::Every(n));
        }
        let mut list = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad cut '{s}'"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        list.sort_unstable();
        list.dedup();
        Ok(Cuts::List(list))
    }

    /// Concrete cuts for a chain of `l` spins; `auto` and `every:N` stay
    /// inside `window`.
    pub fn resolve(
        &self,
        l: usize,
        auto_stride: usize,
        window: (usize, usize),
    ) -> anyhow::Result<Vec<usize>> {
        let cuts: Vec<usize> = match self {
            Cuts::Auto => stride_cuts(window, auto_stride),
            Cuts::Every(n) => stride_cuts(window, *n),
            Cuts::List(list) => list.clone(),
        };
        if cuts.is_empty() {
            return Err(config_error("no cuts selected"));
        }
        if let Some(bad) = cuts.iter().find(|&&c| c == 0 || c >= l) {
            return Err(config_error(format!("cut {bad} outside 1..{l}")));
        }
        Ok(cuts)
    }
}

fn stride_cuts((lo, hi): (usize, usize), stride: usize) -> Vec<usize> {
    let first = lo.div_ceil(stride).max(1) * stride;
    (first..=hi).step_by(stride).collect()
}

/// Fully resolved parameters of one run, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip)]
    pub command: Command,
    #[serde(flatten)]
    pub settings: Settings,
}

impl RunConfig {
    pub fn length(&self) -> usize {
        self.settings.length.expect("resolved")
    }

    pub fn lambda(&self) -> f64 {
        self.settings.lambda.expect("resolved")
    }

    pub fn seed(&self) -> u64 {
        self.settings.seed.unwrap_or(0)
    }

    pub fn trajectories(&self) -> usize {
        self.settings.trajectories.expect("resolved")
    }

    pub fn format(&self) -> Format {
        self.settings.format.expect("resolved")
    }

    pub fn threads(&self) -> usize {
        self.settings.threads.expect("resolved")
    }

    pub fn out(&self) -> &Path {
        self.settings.out.as_deref().expect("resolved")
    }

    pub fn axis(&self) -> AxisArg {
        self.settings.axis.expect("resolved")
    }

    pub fn curve(&self) -> &str {
        self.settings.curve.as_deref().expect("resolved")
    }

    pub fn cuts(&self) -> Cuts {
        self.settings
            .cuts
            .as_deref()
            .map(|c| Cuts::parse(c).expect("validated"))
            .unwrap_or(Cuts::Auto)
    }

    pub fn grid(&self) -> Vec<f64> {
        parse_grid(self.settings.grid.as_deref().expect("resolved")).expect("validated")
    }

    /// Scheme with its bias rule; `None` bias for unbiased schemes.
    pub fn scheme(&self) -> (String, Option<Bias>) {
        let name = self.settings.scheme.clone().expect("resolved");
        let bias = match (self.settings.p_plus, self.settings.delta_p) {
            _ if name != "biased" => None,
            (Some(p), _) => Some(Bias::Fixed(p)),
            (None, Some(d)) => Some(Bias::Offset(d)),
            (None, None) => None,
        };
        (name, bias)
    }
}

/// Parses `start:stop:count`.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(config_error(format!(
            "grid '{spec}' is not start:stop:count"
        )));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| config_error(format!("bad grid start '{start}'")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| config_error(format!("bad grid stop '{stop}'")))?;
    let count: usize = count
        .parse()
        .map_err(|_| config_error(format!("bad grid count '{count}'")))?;
    lambda_grid(start, stop, count).map_err(|e| config_error(e.to_string()))
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Keeps the fields `command` uses, fills defaults and validates.
pub fn resolve(
    command: Command,
    flags: Settings,
    file: Option<Settings>,
) -> anyhow::Result<RunConfig> {
    let merged = match file {
        Some(f) => flags.over(f),
        None => flags,
    };
    let uses = |field: &str| -> bool {
        use Command::*;
        match field {
            "length" => command != Analytic,
            "lambda" => matches!(command, Uniform | Ensemble | Oracle),
            "grid" => matches!(command, Sweep | Analytic),
            "scheme" => matches!(command, Uniform | Ensemble | Sweep),
            "trajectories" => matches!(command, Ensemble | Sweep),
            "seed" => matches!(command, Ensemble | Sweep | Oracle),
            "cuts" => matches!(command, Ground | Uniform | Ensemble | Sweep),
            "curve" => command == Analytic,
            "axis" => command == Oracle,
            _ => true,
        }
    };
    let keep = |name: &str, present: bool| {
        if present && !uses(name) {
            log::warn!("`{}` does not use `{name}`; ignoring it", command.name());
        }
        present && uses(name)
    };
    let mut s = Settings {
        length: merged.length.filter(|_| keep("length", true)),
        lambda: merged.lambda.filter(|_| keep("lambda", true)),
        grid: merged.grid.filter(|_| keep("grid", true)),
        scheme: merged.scheme.filter(|_| keep("scheme", true)),
        p_plus: merged.p_plus,
        delta_p: merged.delta_p,
        trajectories: merged.trajectories.filter(|_| keep("trajectories", true)),
        seed: merged.seed.filter(|_| keep("seed", true)),
        cuts: merged.cuts.filter(|_| keep("cuts", true)),
        format: Some(merged.format.unwrap_or(Format::Csv)),
        threads: Some(merged.threads.unwrap_or_else(default_threads)),
        curve: merged.curve.filter(|_| keep("curve", true)),
        axis: merged.axis.filter(|_| keep("axis", true)),
        out: Some(
            merged
                .out
                .unwrap_or_else(|| PathBuf::from(format!("weakmeas-{}", command.name()))),
        ),
    };

    let default_length = match command {
        Command::Oracle => 10,
        Command::Sweep => 128,
        _ => 256,
    };
    if uses("length") {
        s.length.get_or_insert(default_length);
    }
    if uses("lambda") {
        s.lambda.get_or_insert(0.5);
    }
    if uses("grid") {
        s.grid.get_or_insert_with(|| "0:0.9:10".into());
    }
    if uses("scheme") {
        let default = if command == Command::Uniform {
            "uniform-plus"
        } else {
            "born"
        };
        s.scheme.get_or_insert_with(|| default.into());
    }
    if uses("trajectories") {
        s.trajectories.get_or_insert(100);
    }
    if uses("seed") {
        s.seed.get_or_insert(0);
    }
    if uses("cuts") {
        s.cuts.get_or_insert_with(|| "auto".into());
    }
    if uses("curve") {
        s.curve.get_or_insert_with(|| "c_eff_uniform".into());
    }
    if uses("axis") {
        s.axis.get_or_insert(AxisArg::X);
    }

    let biased = s.scheme.as_deref() == Some("biased");
    let biased_curve = s.curve.as_deref() == Some("c_eff_biased");
    if !biased {
        if s.p_plus.take().is_some() {
            log::warn!("--p-plus only applies to the biased scheme; ignoring it");
        }
        if !biased_curve && s.delta_p.take().is_some() {
            log::warn!("--delta-p only applies to the biased scheme; ignoring it");
        }
    }
    if biased_curve {
        s.delta_p.get_or_insert(0.0);
    }

    let cfg = RunConfig {
        command,
        settings: s,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> anyhow::Result<()> {
    let s = &cfg.settings;
    if let Some(l) = s.length {
        let min = match cfg.command {
            Command::Ground | Command::Uniform => 16,
            _ => 4,
        };
        if l < min {
            return Err(config_error(format!(
                "--length must be at least {min}, got {l}"
            )));
        }
        if cfg.command == Command::Oracle && l > MAX_ED_SPINS {
            return Err(config_error(format!(
                "the oracle handles at most {MAX_ED_SPINS} spins, got {l}"
            )));
        }
    }
    if let Some(lam) = s.lambda {
        if !(0.0..=1.0).contains(&lam) {
            return Err(config_error(format!(
                "--lambda must lie in [0, 1], got {lam}"
            )));
        }
    }
    if let Some(g) = &s.grid {
        parse_grid(g)?;
    }
    if let Some(c) = &s.cuts {
        Cuts::parse(c).map_err(config_error)?;
    }
    if s.trajectories == Some(0) {
        return Err(config_error("--trajectories must be positive"));
    }
    if s.threads == Some(0) {
        return Err(config_error("--threads must be positive"));
    }
    if let Some(curve) = &s.curve {
        if !CURVE_NAMES.contains(&curve.as_str()) {
            return Err(config_error(format!(
                "unknown curve '{curve}'; expected one of {}",
                CURVE_NAMES.join(", ")
            )));
        }
    }
    if let Some(name) = &s.scheme {
        let uniform = name.starts_with("uniform-");
        match cfg.command {
            Command::Uniform if !uniform => {
                return Err(config_error(format!(
                    "`uniform` needs uniform-plus or uniform-minus, got '{name}'"
                )))
            }
            Command::Ensemble if uniform => {
                return Err(config_error(
                    "uniform schemes are deterministic; use the `uniform` command",
                ))
            }
            _ => {}
        }
        if name == "biased" {
            match (s.p_plus, s.delta_p) {
                (Some(_), Some(_)) => {
                    return Err(config_error("give either --p-plus or --delta-p, not both"))
                }
                (None, None) => {
                    return Err(config_error(
                        "the biased scheme needs --p-plus or --delta-p",
                    ))
                }
                (Some(p), None) => {
                    MeasurementScheme::biased(p).map_err(|e| config_error(e.to_string()))?;
                }
                (None, Some(_)) => {}
            }
        } else {
            MeasurementScheme::from_name(name, None).map_err(|e| config_error(e.to_string()))?;
        }
    }
    Ok(())
}
