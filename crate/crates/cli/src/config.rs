//! Run configuration: a flat JSON file, command-line flags on top of it,
//! and validation into a resolved [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use oligofix_core::large_market::ModelFamily;

pub const DEFAULT_SEED: u64 = 20_240_617;
pub const SEED_ENV: &str = "OLIGOFIX_SEED";

/// Invalid or missing configuration; `field` names the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at '{}': {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

type CfgResult<T> = Result<T, ConfigError>;

#[derive(Parser, Debug, Default)]
#[command(name = "oligofix", version, about = "Cournot and hierarchical Stackelberg equilibria")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum CommandArgs {
    /// Solve a three-firm market by Picard iteration.
    Triopoly {
        /// stackelberg | cournot
        #[arg(long)]
        model: Option<String>,
    },
    /// Run the Picard iteration and report the trace.
    Iterate {
        #[arg(long)]
        model: Option<String>,
        /// market | example-affine | divergent
        #[arg(long)]
        system: Option<String>,
    },
    /// Sampled contraction estimate and error bounds.
    Contraction {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        system: Option<String>,
    },
    /// n-firm closed forms and recursions.
    LargeMarket {
        /// `all` or a comma-separated list of CL, CQ, SL, SQ
        #[arg(long)]
        families: Option<String>,
        /// `lo..hi` (inclusive) or a single n
        #[arg(long)]
        n: Option<String>,
    },
    /// Consumer and total surplus of both triopoly models.
    Welfare,
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// JSON configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// demand intercept (decimal or p/q)
    #[arg(long = "A", global = true)]
    pub a: Option<String>,
    /// demand slope (decimal or p/q)
    #[arg(long = "B", global = true)]
    pub b: Option<String>,
    /// cost coefficient (decimal or p/q)
    #[arg(long = "c", global = true)]
    pub c: Option<String>,
    /// linear-demand | arctan-demand
    #[arg(long, global = true)]
    pub demand: Option<String>,
    /// linear-cost | quadratic-cost | exp-cost
    #[arg(long, global = true)]
    pub cost: Option<String>,
    /// start triple `x,y,z`
    #[arg(long, global = true)]
    pub start: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// response gain
    #[arg(long, global = true)]
    pub gain: Option<String>,
    /// lower corner of the sampling box: one value or `x,y,z`
    #[arg(long = "box-lo", global = true)]
    pub box_lo: Option<String>,
    #[arg(long = "box-hi", global = true)]
    pub box_hi: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// A number in a config file: JSON number or a decimal / `p/q` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumValue {
    Number(f64),
    Text(String),
}

/// A triple or a scalar broadcast to all three coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TripleValue {
    Triple([NumValue; 3]),
    Scalar(NumValue),
}

/// Contents of a `--config` file. All keys are optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<NumValue>,
    #[serde(rename = "B")]
    pub b: Option<NumValue>,
    pub c: Option<NumValue>,
    pub demand: Option<String>,
    pub cost: Option<String>,
    pub model: Option<String>,
    pub system: Option<String>,
    pub start: Option<TripleValue>,
    pub tol: Option<NumValue>,
    pub max_iter: Option<usize>,
    pub gain: Option<NumValue>,
    pub box_lo: Option<TripleValue>,
    pub box_hi: Option<TripleValue>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub families: Option<String>,
    pub n: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn from_json(text: &str) -> CfgResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, msg)
        })
    }

    pub fn load(path: &Path) -> CfgResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Triopoly,
    Iterate,
    Contraction,
    LargeMarket,
    Welfare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandKind {
    LinearDemand,
    ArctanDemand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostSel {
    LinearCost,
    QuadraticCost,
    ExpCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Stackelberg,
    Cournot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Market,
    ExampleAffine,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved and validated run configuration, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub demand: DemandKind,
    pub cost: CostSel,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub c: f64,
    pub model: Model,
    pub system: SystemKind,
    pub start: Option<[f64; 3]>,
    pub tol: f64,
    pub max_iter: usize,
    pub gain: Option<f64>,
    pub box_lo: Option<[f64; 3]>,
    pub box_hi: Option<[f64; 3]>,
    pub samples: usize,
    pub seed: u64,
    pub families: Vec<String>,
    pub n_min: usize,
    pub n_max: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn families(&self) -> Vec<ModelFamily> {
        self.families
            .iter()
            .map(|f| f.parse().expect("validated family code"))
            .collect()
    }
}

/// Parses a decimal (`0.05`, `-1.5e3`) or rational (`1/20`) string exactly
/// and rounds once to `f64`.
pub fn parse_number(text: &str, field: &str) -> CfgResult<f64> {
    let bad = |why: &str| ConfigError::new(field, format!("'{text}' {why}"));
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((num, den)) => {
            let den = parse_decimal(den).ok_or_else(|| bad("is not a number"))?;
            if den == BigRational::from_integer(0.into()) {
                return Err(bad("has a zero denominator"));
            }
            parse_decimal(num).ok_or_else(|| bad("is not a number"))? / den
        }
        None => parse_decimal(t).ok_or_else(|| bad("is not a number"))?,
    };
    let v = value.to_f64().ok_or_else(|| bad("is out of range"))?;
    if !v.is_finite() {
        return Err(bad("is out of range"));
    }
    Ok(v)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if exp.unsigned_abs() > 400 {
        return None;
    }
    let all = format!("{int}{frac}");
    let int_value: BigInt = if all.is_empty() { 0.into() } else { all.parse().ok()? };
    let mut value = BigRational::from_integer(int_value);
    let shift = exp - frac.len() as i32;
    let ten = BigRational::from_integer(10.into());
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if neg { -value } else { value })
}

fn num_value(v: &NumValue, field: &str) -> CfgResult<f64> {
    match v {
        NumValue::Number(x) if x.is_finite() => Ok(*x),
        NumValue::Number(x) => Err(ConfigError::new(field, format!("{x} is not finite"))),
        NumValue::Text(s) => parse_number(s, field),
    }
}

fn triple_text(text: &str, field: &str) -> CfgResult<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [one] => Ok([parse_number(one, field)?; 3]),
        [x, y, z] => Ok([
            parse_number(x, field)?,
            parse_number(y, field)?,
            parse_number(z, field)?,
        ]),
        _ => Err(ConfigError::new(field, format!("'{text}' is neither a number nor x,y,z"))),
    }
}

fn triple_value(v: &TripleValue, field: &str) -> CfgResult<[f64; 3]> {
    match v {
        TripleValue::Scalar(NumValue::Text(s)) => triple_text(s, field),
        TripleValue::Scalar(x) => Ok([num_value(x, field)?; 3]),
        TripleValue::Triple([x, y, z]) => Ok([
            num_value(x, field)?,
            num_value(y, field)?,
            num_value(z, field)?,
        ]),
    }
}

fn keyword<T: for<'de> Deserialize<'de>>(text: &str, field: &str, allowed: &str) -> CfgResult<T> {
    serde_json::from_value(serde_json::Value::String(text.trim().to_ascii_lowercase()))
        .map_err(|_| ConfigError::new(field, format!("'{text}' is not one of {allowed}")))
}

/// Parses `lo..hi`, `lo..=hi` (both inclusive) or a single `n`.
pub fn parse_n_range(text: &str) -> CfgResult<(usize, usize)> {
    let bad = || ConfigError::new("n", format!("'{text}' is not a range like 1..10"));
    let t = text.trim();
    let (lo, hi) = match t.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
        }
        None => {
            let n = t.parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(ConfigError::new("n", format!("range '{text}' must satisfy 1 <= lo <= hi")));
    }
    Ok((lo, hi))
}

fn parse_families(text: &str) -> CfgResult<Vec<String>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelFamily::ALL.iter().map(|f| f.code().to_string()).collect());
    }
    let mut out: Vec<String> = Vec::new();
    for part in text.split(',') {
        let fam: ModelFamily = part
            .parse()
            .map_err(|_| ConfigError::new("families", format!("unknown family '{}'", part.trim())))?;
        let code = fam.code().to_string();
        if !out.contains(&code) {
            out.push(code);
        }
    }
    Ok(out)
}

/// Merges the file (if any), flags and environment into a validated config.
///
/// Precedence is flag, then file, then default; the seed additionally takes
/// `OLIGOFIX_SEED` between the flag and the file.
pub fn parse_config(cli: &Cli, env_seed: Option<&str>) -> CfgResult<RunConfig> {
    let file = match &cli.flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    resolve(cli, &file, env_seed)
}

pub fn resolve(cli: &Cli, file: &FileConfig, env_seed: Option<&str>) -> CfgResult<RunConfig> {
    let flags = &cli.flags;
    let (sub_model, sub_system, sub_families, sub_n) = match &cli.command {
        Some(CommandArgs::Triopoly { model }) => (model.clone(), None, None, None),
        Some(CommandArgs::Iterate { model, system })
        | Some(CommandArgs::Contraction { model, system }) => (model.clone(), system.clone(), None, None),
        Some(CommandArgs::LargeMarket { families, n }) => (None, None, families.clone(), n.clone()),
        Some(CommandArgs::Welfare) | None => (None, None, None, None),
    };
    let command = match &cli.command {
        Some(CommandArgs::Triopoly { .. }) => CommandKind::Triopoly,
        Some(CommandArgs::Iterate { .. }) => CommandKind::Iterate,
        Some(CommandArgs::Contraction { .. }) => CommandKind::Contraction,
        Some(CommandArgs::LargeMarket { .. }) => CommandKind::LargeMarket,
        Some(CommandArgs::Welfare) => CommandKind::Welfare,
        None => match &file.command {
            Some(c) => keyword(c, "command", "triopoly, iterate, contraction, large-market, welfare")?,
            None => return Err(ConfigError::new("command", "no subcommand given")),
        },
    };

    let demand: DemandKind = match flags.demand.as_ref().or(file.demand.as_ref()) {
        Some(d) => keyword(d, "demand", "linear-demand, arctan-demand")?,
        None => DemandKind::LinearDemand,
    };
    let cost: CostSel = match flags.cost.as_ref().or(file.cost.as_ref()) {
        Some(c) => keyword(c, "cost", "linear-cost, quadratic-cost, exp-cost")?,
        None => CostSel::QuadraticCost,
    };

    let pick = |flag: &Option<String>, from_file: &Option<NumValue>, field: &str| -> CfgResult<Option<f64>> {
        match (flag, from_file) {
            (Some(s), _) => parse_number(s, field).map(Some),
            (None, Some(v)) => num_value(v, field).map(Some),
            (None, None) => Ok(None),
        }
    };
    let a = pick(&flags.a, &file.a, "A")?;
    let b = pick(&flags.b, &file.b, "B")?;
    let c = pick(&flags.c, &file.c, "c")?;
    let (a, b, c) = resolve_market(demand, cost, a, b, c)?;

    let model = match sub_model.as_ref().or(file.model.as_ref()) {
        Some(m) => keyword(m, "model", "stackelberg, cournot")?,
        None => Model::Stackelberg,
    };
    let system = match sub_system.as_ref().or(file.system.as_ref()) {
        Some(s) => keyword(s, "system", "market, example-affine, divergent")?,
        None => SystemKind::Market,
    };

    let start = match (&flags.start, &file.start) {
        (Some(s), _) => Some(triple_text(s, "start")?),
        (None, Some(v)) => Some(triple_value(v, "start")?),
        (None, None) => None,
    };
    let tol = pick(&flags.tol, &file.tol, "tol")?.unwrap_or(1e-8);
    if !(tol > 0.0) {
        return Err(ConfigError::new("tol", format!("must be > 0, got {tol}")));
    }
    let max_iter = flags.max_iter.or(file.max_iter).unwrap_or(1_000_000);
    if max_iter == 0 {
        return Err(ConfigError::new("max_iter", "must be >= 1"));
    }
    let gain = pick(&flags.gain, &file.gain, "gain")?;
    if let Some(g) = gain {
        if !(g > 0.0) {
            return Err(ConfigError::new("gain", format!("must be > 0, got {g}")));
        }
    }
    let box_lo = match (&flags.box_lo, &file.box_lo) {
        (Some(s), _) => Some(triple_text(s, "box_lo")?),
        (None, Some(v)) => Some(triple_value(v, "box_lo")?),
        (None, None) => None,
    };
    let box_hi = match (&flags.box_hi, &file.box_hi) {
        (Some(s), _) => Some(triple_text(s, "box_hi")?),
        (None, Some(v)) => Some(triple_value(v, "box_hi")?),
        (None, None) => None,
    };
    if let (Some(lo), Some(hi)) = (box_lo, box_hi) {
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(ConfigError::new("box_hi", "every coordinate must be >= box_lo"));
        }
    }
    let samples = flags.samples.or(file.samples).unwrap_or(64);
    if samples < 2 {
        return Err(ConfigError::new("samples", "must be >= 2"));
    }
    let seed = match (flags.seed, env_seed, file.seed) {
        (Some(s), _, _) => s,
        (None, Some(env), _) => env
            .trim()
            .parse()
            .map_err(|_| ConfigError::new(SEED_ENV, format!("'{env}' is not an unsigned integer")))?,
        (None, None, Some(s)) => s,
        (None, None, None) => DEFAULT_SEED,
    };
    let families = parse_families(sub_families.as_deref().or(file.families.as_deref()).unwrap_or("all"))?;
    let (n_min, n_max) = parse_n_range(sub_n.as_deref().or(file.n.as_deref()).unwrap_or("1..10"))?;

    let format = match flags.format.as_ref().or(file.format.as_ref()) {
        Some(f) => keyword(f, "format", "csv, json")?,
        None if command == CommandKind::LargeMarket => Format::Csv,
        None => Format::Json,
    };
    if format == Format::Csv && !matches!(command, CommandKind::LargeMarket | CommandKind::Iterate) {
        return Err(ConfigError::new("format", "csv output is available for large-market and iterate"));
    }
    if command == CommandKind::LargeMarket && demand != DemandKind::LinearDemand {
        return Err(ConfigError::new("demand", "large-market needs linear-demand"));
    }

    Ok(RunConfig {
        command,
        demand,
        cost,
        a,
        b,
        c,
        model,
        system,
        start,
        tol,
        max_iter,
        gain,
        box_lo,
        box_hi,
        samples,
        seed,
        families,
        n_min,
        n_max,
        format,
        out: flags.out.clone().or_else(|| file.out.clone()),
    })
}

/// With no market parameters at all the worked example is used. Otherwise
/// every parameter the chosen demand and cost need must be present.
fn resolve_market(
    demand: DemandKind,
    cost: CostSel,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
) -> CfgResult<(f64, f64, f64)> {
    use oligofix_core::presets::{EXAMPLE_A, EXAMPLE_B, EXAMPLE_C, NONLINEAR_LEVEL};
    let needs_b = demand == DemandKind::LinearDemand;
    let needs_c = cost != CostSel::ExpCost;
    let (a, b, c) = if a.is_none() && b.is_none() && c.is_none() {
        match demand {
            DemandKind::LinearDemand => (EXAMPLE_A, EXAMPLE_B, EXAMPLE_C),
            DemandKind::ArctanDemand => (NONLINEAR_LEVEL, 0.0, 0.0),
        }
    } else {
        let a = a.ok_or_else(|| ConfigError::new("A", "missing (B and c were given)"))?;
        let b = match b {
            Some(b) => b,
            None if needs_b => return Err(ConfigError::new("B", "missing demand slope")),
            None => 0.0,
        };
        let c = match c {
            Some(c) => c,
            None if needs_c => return Err(ConfigError::new("c", "missing cost coefficient")),
            None => 0.0,
        };
        (a, b, c)
    };
    if needs_b && !(b > 0.0) {
        return Err(ConfigError::new("B", format!("must be > 0, got {b}")));
    }
    if needs_b && !(a > 0.0) {
        return Err(ConfigError::new("A", format!("must be > 0, got {a}")));
    }
    if c < 0.0 {
        return Err(ConfigError::new("c", format!("must be >= 0, got {c}")));
    }
    Ok((a, b, c))
}
