//! Command dispatch and exit-code policy.

use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use oligofix_core::large_market::{self, FamilyParams, LargeMarketRow};
use oligofix_core::market::{consumer_surplus, price};
use oligofix_core::presets::{self, NONLINEAR_BRACKET};
use oligofix_core::solver::{
    a_posteriori_bound, a_priori_bound, estimate_contraction, picard_iterate, verify_second_order,
    SampleBox,
};
use oligofix_core::{
    CostSpec, DemandSpec, Error, InnerSolveConfig, IterationStatus, IterationTrace, MarketSpec,
    OutputTriple, PicardOptions, ResponseSystem,
};

use crate::config::{
    CommandKind, ConfigError, CostSel, DemandKind, Format, Model, RunConfig, SystemKind,
};
use crate::report::{large_market_csv, trace_csv, ReportEnvelope, SURPLUS_TERMINOLOGY_WARNING};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

/// Gain used for arctan demand when none is configured; the unit-gain maps
/// are expansive there.
pub const ARCTAN_DEFAULT_GAIN: f64 = 0.05;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(m) | Error::Argument(m) => {
                CliError::Config(ConfigError::new("parameters", m))
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

/// Result of a run: the report, the rendered artifact and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub rendered: String,
    pub exit_code: i32,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let (results, csv, exit_code) = match cfg.command {
        CommandKind::Triopoly => triopoly(cfg, &mut warnings)?,
        CommandKind::Iterate => iterate(cfg, &mut warnings)?,
        CommandKind::Contraction => contraction(cfg, &mut warnings)?,
        CommandKind::LargeMarket => large(cfg, &mut warnings)?,
        CommandKind::Welfare => welfare(cfg, &mut warnings)?,
    };
    let envelope = ReportEnvelope::new(cfg.clone(), results, warnings);
    let rendered = match cfg.format {
        Format::Json => envelope.to_json(),
        Format::Csv => csv.ok_or_else(|| {
            CliError::Config(ConfigError::new("format", "this command has no CSV form"))
        })?,
    };
    Ok(Outcome {
        envelope,
        rendered,
        exit_code,
    })
}

type Step = (Value, Option<String>, i32);

pub fn build_market(cfg: &RunConfig) -> Result<MarketSpec, CliError> {
    let demand = match cfg.demand {
        DemandKind::LinearDemand => DemandSpec::linear(cfg.a, cfg.b)?,
        DemandKind::ArctanDemand => DemandSpec::arctan(cfg.a),
    };
    let cost = match cfg.cost {
        CostSel::LinearCost => CostSpec::Linear(cfg.c),
        CostSel::QuadraticCost => CostSpec::Quadratic(cfg.c),
        CostSel::ExpCost => CostSpec::t_exp_t(),
    };
    Ok(MarketSpec::symmetric(3, demand, cost)?)
}

fn market_system(cfg: &RunConfig, model: Model) -> Result<ResponseSystem, CliError> {
    let market = build_market(cfg)?;
    let mut sys = match model {
        Model::Stackelberg => ResponseSystem::reduced(market)?,
        Model::Cournot => ResponseSystem::cournot(market)?,
    };
    let mut gain = 1.0;
    if cfg.demand == DemandKind::ArctanDemand {
        sys = sys.with_inner(InnerSolveConfig {
            bracket: Some(NONLINEAR_BRACKET),
            ..InnerSolveConfig::default()
        })?;
        gain = ARCTAN_DEFAULT_GAIN;
    }
    Ok(sys.with_gain(cfg.gain.unwrap_or(gain))?)
}

pub fn build_system(cfg: &RunConfig) -> Result<ResponseSystem, CliError> {
    match cfg.system {
        SystemKind::Market => market_system(cfg, cfg.model),
        SystemKind::ExampleAffine => Ok(presets::example_affine()),
        SystemKind::Divergent => Ok(presets::divergent_system()),
    }
}

fn default_start(cfg: &RunConfig) -> OutputTriple {
    if let Some(s) = cfg.start {
        return OutputTriple::from_array(s);
    }
    match (cfg.system, cfg.demand) {
        (SystemKind::Market, DemandKind::LinearDemand) => OutputTriple::ZERO,
        _ => OutputTriple::splat(1.0),
    }
}

fn default_box(cfg: &RunConfig) -> Result<SampleBox, CliError> {
    let (lo, hi) = match (cfg.system, cfg.demand) {
        (SystemKind::Market, DemandKind::LinearDemand) => (0.0, 0.5 * cfg.a / cfg.b),
        (SystemKind::Market, DemandKind::ArctanDemand) => (0.5, 2.5),
        _ => (0.0, 3e5),
    };
    let lo = cfg.box_lo.map_or(OutputTriple::splat(lo), OutputTriple::from_array);
    let hi = cfg.box_hi.map_or(OutputTriple::splat(hi), OutputTriple::from_array);
    SampleBox::new(lo, hi).map_err(|e| CliError::Config(ConfigError::new("box_hi", e.to_string())))
}

fn picard_options(cfg: &RunConfig) -> PicardOptions {
    PicardOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..PicardOptions::default()
    }
}

fn status_name(s: IterationStatus) -> &'static str {
    match s {
        IterationStatus::Converged => "converged",
        IterationStatus::Diverged => "diverged",
        IterationStatus::MaxIter => "max-iter",
    }
}

fn triple(p: OutputTriple) -> Value {
    json!([p.x, p.y, p.z])
}

fn trace_summary(trace: &IterationTrace) -> Value {
    json!({
        "status": status_name(trace.status),
        "iterations": trace.iterations,
        "start": triple(trace.points[0]),
        "final": triple(trace.last()),
        "last_step_m1": trace.step_m1.last().copied(),
    })
}

/// Closed-form benchmark for linear demand, where the n = 3 formulas apply.
fn closed_form(cfg: &RunConfig, model: Model) -> Result<Option<LargeMarketRow>, CliError> {
    if cfg.demand != DemandKind::LinearDemand || cfg.cost == CostSel::ExpCost {
        return Ok(None);
    }
    let p = FamilyParams::new(cfg.a, cfg.b, cfg.c)?;
    let row = match (model, cfg.cost) {
        (Model::Cournot, CostSel::LinearCost) => large_market::cournot_linear(3, &p)?,
        (Model::Cournot, _) => large_market::cournot_quadratic(3, &p)?,
        (Model::Stackelberg, CostSel::LinearCost) => large_market::stackelberg_linear(3, &p)?,
        (Model::Stackelberg, _) => {
            if p.delta() <= 0.0 {
                return Ok(None);
            }
            large_market::stackelberg_quadratic(3, &p)?.0
        }
    };
    Ok(Some(row))
}

/// Solves one model by Picard iteration and collects the equilibrium record.
fn solve_model(cfg: &RunConfig, model: Model, warnings: &mut Vec<String>) -> Result<(Value, bool), CliError> {
    let sys = market_system(cfg, model)?;
    let start = default_start(cfg);
    let trace = picard_iterate(&sys, start, &picard_options(cfg))?;
    let name = match model {
        Model::Stackelberg => "stackelberg",
        Model::Cournot => "cournot",
    };
    if !trace.converged() {
        return Ok((json!({ "model": name, "iteration": trace_summary(&trace) }), false));
    }
    let p = trace.last();
    let market = sys.market().expect("market system");
    let a = p.to_array();
    let q = p.total();
    let profits = [market.profit(0, &a)?, market.profit(1, &a)?, market.profit(2, &a)?];
    let cs = consumer_surplus(&market.demand, q)?;
    let ts = cs + profits.iter().sum::<f64>();
    let soc = verify_second_order(&sys, p)?;
    if !soc.all_negative {
        warnings.push(format!(
            "second-order conditions fail for the {name} fixed point: curvatures (leader, middle, follower) = ({}, {}, {})",
            soc.d2_leader, soc.d2_middle, soc.d2_follower
        ));
    }
    let closed = closed_form(cfg, model)?;
    if let Some(row) = &closed {
        let mismatch = row
            .outputs
            .iter()
            .zip(a)
            .map(|(c, x)| (c - x).abs() / c.abs().max(1.0))
            .fold(0.0, f64::max);
        if mismatch > 1e-6 {
            warnings.push(format!(
                "{name}: fixed point differs from the closed form by {mismatch:e} (relative)"
            ));
        }
    }
    Ok((
        json!({
            "model": name,
            "iteration": trace_summary(&trace),
            "outputs": triple(p),
            "price": price(&market.demand, q)?,
            "profits": profits,
            "producer_surplus": profits.iter().sum::<f64>(),
            "cs": cs,
            "ts": ts,
            "foc_residuals": sys.foc_residuals(p)?,
            "soc": soc,
            "closed_form": closed.map(|r| json!({ "outputs": r.outputs, "price": r.price, "profits": r.profits })),
        }),
        true,
    ))
}

fn triopoly(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Step, CliError> {
    let (value, ok) = solve_model(cfg, cfg.model, warnings)?;
    if ok {
        warnings.push(SURPLUS_TERMINOLOGY_WARNING.to_string());
    }
    Ok((value, None, if ok { EXIT_OK } else { EXIT_DIVERGED }))
}

fn iterate(cfg: &RunConfig, _warnings: &mut Vec<String>) -> Result<Step, CliError> {
    let sys = build_system(cfg)?;
    let trace = picard_iterate(&sys, default_start(cfg), &picard_options(cfg))?;
    let code = if trace.converged() { EXIT_OK } else { EXIT_DIVERGED };
    let mut summary = trace_summary(&trace);
    summary["step_m1"] = json!(trace.step_m1);
    Ok((summary, Some(trace_csv(&trace)), code))
}

fn contraction(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Step, CliError> {
    let sys = build_system(cfg)?;
    let region = default_box(cfg)?;
    let report = estimate_contraction(&sys, &region, cfg.samples, cfg.seed)?;
    if !report.certified {
        warnings.push(format!(
            "contraction not certified on the sampling box: alpha_hat = {}, max Jacobian l1 norm = {}",
            report.alpha_hat,
            report.jac_l1_norms.iter().copied().fold(0.0, f64::max)
        ));
    }
    let trace = picard_iterate(&sys, default_start(cfg), &picard_options(cfg))?;
    let mut bounds = Value::Null;
    if report.certified && report.rate_bound < 1.0 && trace.iterations > 0 {
        let k = report.rate_bound;
        let n = trace.iterations;
        bounds = json!({
            "k": k,
            "iterations": n,
            "a_priori": a_priori_bound(k, n, trace.step_m1[0]),
            "a_posteriori": a_posteriori_bound(k, trace.step_m1[n - 1]),
        });
    }
    let code = if !report.certified && !trace.converged() { EXIT_DIVERGED } else { EXIT_OK };
    Ok((
        json!({
            "alpha_hat": report.alpha_hat,
            "max_jac_l1": report.jac_l1_norms.iter().copied().fold(0.0, f64::max),
            "jac_l1_norms": report.jac_l1_norms,
            "reference_point": triple(report.reference_point),
            "spectral_radius": report.spectral_radius,
            "certified": report.certified,
            "rate_bound": report.rate_bound,
            "iteration": trace_summary(&trace),
            "bounds": bounds,
        }),
        None,
        code,
    ))
}

fn large(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Step, CliError> {
    let params = FamilyParams::new(cfg.a, cfg.b, cfg.c)?;
    let families = cfg.families();
    let per_n: Vec<Vec<LargeMarketRow>> = (cfg.n_min..=cfg.n_max)
        .into_par_iter()
        .map(|n| {
            families
                .iter()
                .map(|&f| large_market::family_row(f, n, &params))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<LargeMarketRow> = per_n.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(CliError::Io("no rows to emit".into()));
    }
    warnings.push(SURPLUS_TERMINOLOGY_WARNING.to_string());
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "family": r.family.code(),
                "Q_total": r.q_total,
                "price": r.price,
                "x_first": r.x_first(),
                "x_last": r.x_last(),
                "profit_total": r.profit_total,
                "residual": r.residual,
                "gap_Q": r.gap_q,
                "gap_P": r.gap_p,
                "cs": r.cs,
                "ts": r.ts,
            })
        })
        .collect();
    Ok((json!({ "rows": table }), Some(large_market_csv(&rows)), EXIT_OK))
}

fn welfare(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Step, CliError> {
    let (stackelberg, ok_s) = solve_model(cfg, Model::Stackelberg, warnings)?;
    let (cournot, ok_c) = solve_model(cfg, Model::Cournot, warnings)?;
    warnings.push(SURPLUS_TERMINOLOGY_WARNING.to_string());
    let limit = match cfg.demand {
        DemandKind::LinearDemand => json!(cfg.a * cfg.a / (2.0 * cfg.b)),
        DemandKind::ArctanDemand => Value::Null,
    };
    let code = if ok_s && ok_c { EXIT_OK } else { EXIT_DIVERGED };
    Ok((
        json!({ "stackelberg": stackelberg, "cournot": cournot, "cs_limit": limit }),
        None,
        code,
    ))
}
