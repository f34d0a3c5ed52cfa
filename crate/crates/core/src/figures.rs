//! Experiment configuration and the CSV tables behind each subcommand.
//!
//! Every table starts with a `# meta:` line echoing the tool version, the
//! parameters that shaped it, and the seed. Rows come out in grid order
//! regardless of how the work was scheduled.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{capacity_point, cq_lower, CapacityPoint};
use crate::channel::{guard_diagnostic, read_token_csv, simulate_channel_use, LaunchSchedule};
use crate::error::{Error, Result};
use crate::first_passage::{
    make_first_passage, make_first_passage_allow_infinite_mean, DistSpec, OptimalInputDensity,
};
use crate::numeric::{fmt_g, log_grid};
use crate::ordering::{
    asymptotic_ordering_entropy_direct, asymptotic_ordering_entropy_per_token, count_admissible,
    exact_conditional_entropy, mc_ordering_entropy_per_token, upper_bound_ht,
    DEFAULT_SERIES_TOLERANCE, ENUMERATION_LIMIT, HT_EXACT_LIMIT,
};
use crate::variants::{
    channel_capacities, number_channel_point, power_payload, sequencing_overhead_per_token,
    CqBound, EnergyModel,
};

pub const TOOL: &str = "token-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 0x5EED_70CE;
/// Power axis unit of the capacities figure, in ATP per passage time.
pub const POWER_UNIT_ATP: f64 = 2.0;

/// Subcommands that produce a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Capacities,
    NumberVsTiming,
    OrderingExact,
    OrderingAsymptote,
    McConvergence,
    GuardDiagnostic,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Capacities => "figures-capacities",
            Command::NumberVsTiming => "figures-number-vs-timing",
            Command::OrderingExact => "ordering-exact",
            Command::OrderingAsymptote => "ordering-asymptote",
            Command::McConvergence => "mc-convergence",
            Command::GuardDiagnostic => "guard-diagnostic",
            Command::Simulate => "simulate",
        }
    }

    /// Configuration keys that influence this command's output.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Bounds => &["rho-min", "rho-max", "points"],
            Command::Capacities => &[
                "power-min",
                "power-max",
                "power-points",
                "k",
                "n",
                "c0",
                "c1",
                "dc1",
                "ce",
                "b",
                "bound",
            ],
            Command::NumberVsTiming => &["eps", "m-max"],
            Command::OrderingExact => &["schedule", "arrivals", "dist"],
            Command::OrderingAsymptote => &["rho"],
            Command::McConvergence => &["m-grid", "rho", "trials"],
            Command::GuardDiagnostic => {
                &["dist", "epsilon", "intensity", "guard-grid", "tolerance"]
            }
            Command::Simulate => &["dist", "tokens", "intensity"],
        }
    }
}

/// All experiment parameters. Keys of [`ExperimentConfig::set`] match the
/// command-line flag names.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dist: String,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
    pub power_min: f64,
    pub power_max: f64,
    pub power_points: usize,
    pub k_list: Vec<u32>,
    pub n_list: Vec<u32>,
    /// Costs in ATP; `payload_len` is taken from `k_list`.
    pub energy: EnergyModel,
    pub bound: CqBound,
    pub eps_list: Vec<f64>,
    pub m_max: u32,
    pub m_grid: Vec<usize>,
    pub load: f64,
    pub trials: usize,
    pub tokens: usize,
    pub epsilon: f64,
    pub intensity: f64,
    pub guard_grid: Vec<usize>,
    pub tolerance: f64,
    pub schedule: Option<PathBuf>,
    pub arrivals: Option<PathBuf>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dist: "exponential:rate=1".into(),
            rho_min: 1e-3,
            rho_max: 1e3,
            points: 200,
            power_min: 1e-3,
            power_max: 1e3,
            power_points: 121,
            k_list: vec![1, 2, 4],
            n_list: vec![1, 2, 4],
            energy: EnergyModel::dna(0),
            bound: CqBound::Lower,
            eps_list: vec![0.1, 0.2, 0.3],
            m_max: 1000,
            m_grid: vec![125, 250, 500, 1000, 2000],
            load: 1.0,
            trials: 200,
            tokens: 6,
            epsilon: 0.1,
            intensity: 1.0,
            guard_grid: vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000],
            tolerance: crate::channel::GUARD_TOLERANCE,
            schedule: None,
            arrivals: None,
            seed: DEFAULT_SEED,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::param(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// Accepts decimal or `0x` hexadecimal, with optional `_` separators.
pub fn parse_seed(value: &str) -> Result<u64> {
    let v = value.trim().replace('_', "");
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse(),
    };
    parsed.map_err(|_| Error::param(format!("`seed`: cannot parse `{value}`")))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Sets one parameter by key. Underscores and dashes are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "dist" => self.dist = v.to_string(),
            "rho-min" => self.rho_min = parse_num(&key, v)?,
            "rho-max" => self.rho_max = parse_num(&key, v)?,
            "points" => self.points = parse_num(&key, v)?,
            "power-min" => self.power_min = parse_num(&key, v)?,
            "power-max" => self.power_max = parse_num(&key, v)?,
            "power-points" => self.power_points = parse_num(&key, v)?,
            "k" => self.k_list = parse_list(&key, v)?,
            "n" => self.n_list = parse_list(&key, v)?,
            "c0" => self.energy.c0 = parse_num(&key, v)?,
            "c1" => self.energy.c1 = parse_num(&key, v)?,
            "dc1" => self.energy.dc1 = parse_num(&key, v)?,
            "ce" => self.energy.ce = parse_num(&key, v)?,
            "b" => self.energy.alphabet = parse_num(&key, v)?,
            "bound" => self.bound = CqBound::parse(v)?,
            "eps" => self.eps_list = parse_list(&key, v)?,
            "m-max" => self.m_max = parse_num(&key, v)?,
            "m-grid" => self.m_grid = parse_list(&key, v)?,
            "rho" => self.load = parse_num(&key, v)?,
            "trials" => self.trials = parse_num(&key, v)?,
            "tokens" => self.tokens = parse_num(&key, v)?,
            "epsilon" => self.epsilon = parse_num(&key, v)?,
            "intensity" => self.intensity = parse_num(&key, v)?,
            "guard-grid" => self.guard_grid = parse_list(&key, v)?,
            "tolerance" => self.tolerance = parse_num(&key, v)?,
            "schedule" => self.schedule = Some(PathBuf::from(v)),
            "arrivals" => self.arrivals = Some(PathBuf::from(v)),
            "seed" => self.seed = parse_seed(v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            other => return Err(Error::param(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::param(format!("config line {}: expected key=value", lineno + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&fs::read_to_string(path)?)
    }

    fn value_of(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        match key {
            "dist" => self.dist.clone(),
            "rho-min" => self.rho_min.to_string(),
            "rho-max" => self.rho_max.to_string(),
            "points" => self.points.to_string(),
            "power-min" => self.power_min.to_string(),
            "power-max" => self.power_max.to_string(),
            "power-points" => self.power_points.to_string(),
            "k" => join(&self.k_list),
            "n" => join(&self.n_list),
            "c0" => self.energy.c0.to_string(),
            "c1" => self.energy.c1.to_string(),
            "dc1" => self.energy.dc1.to_string(),
            "ce" => self.energy.ce.to_string(),
            "b" => self.energy.alphabet.to_string(),
            "bound" => self.bound.name().to_string(),
            "eps" => join(&self.eps_list),
            "m-max" => self.m_max.to_string(),
            "m-grid" => join(&self.m_grid),
            "rho" => self.load.to_string(),
            "trials" => self.trials.to_string(),
            "tokens" => self.tokens.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "intensity" => self.intensity.to_string(),
            "guard-grid" => join(&self.guard_grid),
            "tolerance" => self.tolerance.to_string(),
            "schedule" => path(&self.schedule),
            "arrivals" => path(&self.arrivals),
            _ => unreachable!("no such key {key}"),
        }
    }

    /// `# meta: tool=... version=... command=... <params> seed=...`
    pub fn meta_line(&self, command: Command) -> String {
        let mut line = format!(
            "# meta: tool={TOOL} version={VERSION} command={}",
            command.name()
        );
        for key in command.keys() {
            let _ = write!(line, " {key}={}", self.value_of(key));
        }
        let _ = write!(line, " seed={}", self.seed);
        line
    }

    fn dist_spec(&self) -> Result<DistSpec> {
        DistSpec::parse(&self.dist)
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

/// A table plus summary lines meant for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    pub summary: Vec<String>,
    /// Significant digits for `Num` cells.
    pub digits: usize,
}

impl Report {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
            digits: 12,
        }
    }

    pub fn render(&self, meta: &str) -> String {
        let mut out = String::new();
        out.push_str(meta);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|f| match f {
                    Field::Num(x) => fmt_g(*x, self.digits),
                    Field::Int(n) => n.to_string(),
                    Field::Text(s) => s.clone(),
                    Field::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Numeric values of column `name`, skipping empty cells.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(idx) = self.columns.iter().position(|c| *c == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match &r[idx] {
                Field::Num(x) => Some(*x),
                Field::Int(n) => Some(*n as f64),
                _ => None,
            })
            .collect()
    }
}

/// Checks that every numeric cell below the header is finite and
/// nonnegative.
pub fn scan_csv(text: &str) -> Result<()> {
    let mut body = text.lines().filter(|l| !l.starts_with('#'));
    body.next();
    for (i, line) in body.enumerate() {
        for cell in line.split(',') {
            if let Ok(x) = cell.trim().parse::<f64>() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::Numeric(format!(
                        "row {}: value `{cell}` is not finite and nonnegative",
                        i + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Writes `text` to `path` and scans the file as written.
pub fn write_checked(path: &Path, text: &str) -> Result<()> {
    scan_csv(text)?;
    fs::write(path, text)?;
    let back = fs::read_to_string(path)?;
    if back != text {
        return Err(Error::Numeric(format!(
            "{} did not read back intact",
            path.display()
        )));
    }
    scan_csv(&back)
}

fn grid(lo: f64, hi: f64, points: usize, what: &str) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::param(format!(
            "{what} range must satisfy 0 < min ≤ max"
        )));
    }
    if points == 0 {
        return Err(Error::param(format!("{what} grid is empty")));
    }
    Ok(log_grid(lo, hi, points))
}

fn nonempty<T>(xs: &[T], what: &str) -> Result<()> {
    if xs.is_empty() {
        Err(Error::param(format!("{what} list is empty")))
    } else {
        Ok(())
    }
}

pub fn run_bounds(cfg: &ExperimentConfig) -> Result<Report> {
    let loads = grid(cfg.rho_min, cfg.rho_max, cfg.points, "ρ")?;
    let points: Vec<CapacityPoint> = loads
        .par_iter()
        .map(|&rho| {
            let p = capacity_point(rho, 1.0)?;
            p.check_ordering()
                .map_err(|e| Error::Numeric(e.to_string()))?;
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let mut report = Report::new(vec![
        "rho",
        "cq_lower_simple",
        "cq_lower",
        "cq_upper",
        "ct_lower",
        "ct_upper",
    ]);
    report.rows = points
        .iter()
        .map(|p| {
            [
                p.load,
                p.cq_lower_simple,
                p.cq_lower,
                p.cq_upper,
                p.ct_lower,
                p.ct_upper,
            ]
            .map(Field::Num)
            .to_vec()
        })
        .collect();
    Ok(report)
}

/// Launch rate `λ` (per passage time) at which a payload channel spends
/// `power_atp` ATP per passage time, found by bisection.
pub fn payload_rate_for_power(power_atp: f64, model: &EnergyModel) -> Result<f64> {
    let base = model.c1 + model.ce + model.payload_len as f64 * model.dc1;
    if !(base > 0.0) {
        return Err(Error::param("payload token costs sum to zero"));
    }
    let spend = |lambda: f64| -> Result<f64> {
        power_payload(lambda, model, sequencing_overhead_per_token(lambda)?)
    };
    let (mut lo, mut hi) = (0.0, power_atp / base);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid)? > power_atp {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

pub fn run_capacities(cfg: &ExperimentConfig) -> Result<Report> {
    nonempty(&cfg.k_list, "K")?;
    nonempty(&cfg.n_list, "n")?;
    cfg.energy.validate()?;
    if cfg.n_list.contains(&0) {
        return Err(Error::param("parallel channel count n must be ≥ 1"));
    }
    let timing_cost = cfg.energy.c0 + cfg.energy.ce;
    if !(timing_cost > 0.0) {
        return Err(Error::param("c0 + ce must be positive"));
    }
    let powers = grid(cfg.power_min, cfg.power_max, cfg.power_points, "power")?;

    enum Curve {
        Timing(u32),
        Payload(u32),
    }
    let curves: Vec<Curve> = cfg
        .n_list
        .iter()
        .map(|&n| Curve::Timing(n))
        .chain(cfg.k_list.iter().map(|&k| Curve::Payload(k)))
        .collect();
    let jobs: Vec<(&Curve, f64)> = curves
        .iter()
        .flat_map(|c| powers.iter().map(move |&p| (c, p)))
        .collect();
    let rows: Vec<Vec<Field>> = jobs
        .par_iter()
        .map(|&(curve, power)| {
            let power_atp = power * POWER_UNIT_ATP;
            let (id, rho, timing, payload, total) = match *curve {
                Curve::Timing(n) => {
                    let rho = power_atp / (n as f64 * timing_cost);
                    let c = channel_capacities(rho, rho, 0, cfg.energy.alphabet, cfg.bound)?;
                    let total = n as f64 * c.timing;
                    (format!("timing_n{n}"), rho, total, 0.0, total)
                }
                Curve::Payload(k) => {
                    let model = cfg.energy.with_payload_len(k);
                    let rho = payload_rate_for_power(power_atp, &model)?;
                    let c = channel_capacities(rho, rho, k, model.alphabet, cfg.bound)?;
                    (
                        format!("payload_k{k}"),
                        rho,
                        c.timing,
                        c.payload,
                        c.timing_payload,
                    )
                }
            };
            let (total_bits, timing_bits) = (total / LN_2, timing / LN_2);
            let payload_bits = if payload == 0.0 {
                0.0
            } else {
                total_bits - timing_bits
            };
            Ok(vec![
                Field::Num(power),
                Field::Text(id),
                Field::Num(total_bits),
                Field::Num(rho),
                Field::Num(timing_bits),
                Field::Num(payload_bits),
            ])
        })
        .collect::<Result<_>>()?;
    let mut report = Report::new(vec![
        "power_atp_per_passage",
        "curve_id",
        "rate_bits_per_passage",
        "rho",
        "timing_bits_per_passage",
        "payload_bits_per_passage",
    ]);
    report.rows = rows;
    Ok(report)
}

pub fn run_number_vs_timing(cfg: &ExperimentConfig) -> Result<Report> {
    nonempty(&cfg.eps_list, "ε")?;
    if cfg.m_max == 0 {
        return Err(Error::param("m-max must be ≥ 1"));
    }
    let mut rows = Vec::new();
    let mut powers = Vec::new();
    for &eps in &cfg.eps_list {
        let points = (1..=cfg.m_max)
            .into_par_iter()
            .map(|m| number_channel_point(m, eps, 1.0))
            .collect::<Result<Vec<_>>>()?;
        let id = format!("number_eps{}", fmt_g(eps, 12));
        for p in points {
            powers.push(p.power);
            rows.push(vec![
                Field::Num(p.power),
                Field::Text(id.clone()),
                Field::Num(p.capacity),
            ]);
        }
    }
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    let timing = powers
        .par_iter()
        .map(|&rho| Ok(rho * cq_lower(rho)?))
        .collect::<Result<Vec<f64>>>()?;
    for (rho, rate) in powers.into_iter().zip(timing) {
        rows.push(vec![
            Field::Num(rho),
            Field::Text("timing_lower".into()),
            Field::Num(rate),
        ]);
    }
    let mut report = Report::new(vec![
        "tokens_per_passage",
        "curve_id",
        "rate_nats_per_passage",
    ]);
    report.rows = rows;
    Ok(report)
}

pub fn run_mc_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    nonempty(&cfg.m_grid, "M")?;
    let asymptote = asymptotic_ordering_entropy_per_token(cfg.load, DEFAULT_SERIES_TOLERANCE)?;
    let mut report = Report::new(vec!["M", "estimate", "stderr", "asymptote", "abs_error"]);
    let mut errors = Vec::new();
    for &m in &cfg.m_grid {
        let est = mc_ordering_entropy_per_token(m, cfg.load, cfg.trials, cfg.seed)?;
        let err = (est.mean - asymptote).abs();
        errors.push(err);
        report.rows.push(vec![
            Field::Int(m as u64),
            Field::Num(est.mean),
            Field::Num(est.stderr),
            Field::Num(asymptote),
            Field::Num(err),
        ]);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    report.summary.push(format!(
        "abs_error decreasing over M grid: {} (asymptote {}, final abs_error {})",
        if decreasing { "yes" } else { "no" },
        fmt_g(asymptote, 12),
        fmt_g(errors[errors.len() - 1], 6)
    ));
    Ok(report)
}

pub fn run_guard_diagnostic(cfg: &ExperimentConfig) -> Result<Report> {
    // infinite-mean laws are the point of this diagnostic
    let dist = make_first_passage_allow_infinite_mean(&cfg.dist_spec()?)?;
    let diag = guard_diagnostic(
        &dist,
        cfg.intensity,
        cfg.epsilon,
        &cfg.guard_grid,
        cfg.tolerance,
    )?;
    let mut report = Report::new(vec!["M", "guard", "m_tail_mass"]);
    report.rows = diag
        .rows
        .iter()
        .map(|r| {
            vec![
                Field::Int(r.tokens as u64),
                Field::Num(r.guard),
                Field::Num(r.tail_mass),
            ]
        })
        .collect();
    report.summary.push(format!("verdict: {}", diag.verdict));
    Ok(report)
}

fn read_column(path: &Path, prefer_arrivals: bool) -> Result<Vec<f64>> {
    let table = read_token_csv(BufReader::new(fs::File::open(path)?))?;
    let (first, second) = if prefer_arrivals {
        (table.arrivals, table.launches)
    } else {
        (table.launches, table.arrivals)
    };
    first
        .or(second)
        .ok_or_else(|| Error::param(format!("{}: no token times found", path.display())))
}

pub fn run_ordering_exact(cfg: &ExperimentConfig) -> Result<Report> {
    let schedule_path = cfg
        .schedule
        .as_deref()
        .ok_or_else(|| Error::param("ordering exact needs --schedule"))?;
    let schedule = read_column(schedule_path, false)?;
    let arrivals = match cfg.arrivals.as_deref() {
        Some(p) => read_column(p, true)?,
        None => read_token_csv(BufReader::new(fs::File::open(schedule_path)?))?
            .arrivals
            .ok_or_else(|| Error::param("no arrivals given (use --arrivals)"))?,
    };
    let dist = make_first_passage(&cfg.dist_spec()?)?;
    let as_param = |e: Error| match e {
        Error::Inconsistent(msg) => Error::Parameter(msg),
        other => other,
    };
    let count = count_admissible(&schedule, &arrivals).map_err(as_param)?;
    let m = schedule.len();
    let mut report = Report::new(vec![
        "M",
        "admissible_count",
        "log_admissible_count",
        "exact_entropy",
        "ht_upper",
    ]);
    let exact = if m <= ENUMERATION_LIMIT && dist.has_density() {
        Field::Num(exact_conditional_entropy(&schedule, &arrivals, &dist).map_err(as_param)?)
    } else {
        report.summary.push(format!(
            "exact_entropy omitted: needs M ≤ {ENUMERATION_LIMIT} and a transit density"
        ));
        Field::Empty
    };
    let ht = if m <= HT_EXACT_LIMIT {
        Field::Num(upper_bound_ht(&schedule, &dist)?)
    } else {
        report.summary.push(format!(
            "ht_upper omitted: M > {HT_EXACT_LIMIT}; use mc-convergence for large M"
        ));
        Field::Empty
    };
    report.rows.push(vec![
        Field::Int(m as u64),
        count.count.map_or(Field::Empty, Field::Int),
        Field::Num(count.log_count),
        exact,
        ht,
    ]);
    Ok(report)
}

pub fn run_ordering_asymptote(cfg: &ExperimentConfig) -> Result<Report> {
    let compact = asymptotic_ordering_entropy_per_token(cfg.load, DEFAULT_SERIES_TOLERANCE)?;
    let direct = asymptotic_ordering_entropy_direct(cfg.load, DEFAULT_SERIES_TOLERANCE)?;
    if (compact - direct).abs() > 1e-9 * compact.max(1.0) {
        return Err(Error::Numeric(format!(
            "series forms disagree at ρ={}: {compact} vs {direct}",
            cfg.load
        )));
    }
    let mut report = Report::new(vec!["rho", "ordering_entropy_per_token"]);
    report
        .rows
        .push(vec![Field::Num(cfg.load), Field::Num(compact)]);
    Ok(report)
}

/// One channel use with launches drawn from the optimal input density on
/// `[0, M/λ]`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.tokens == 0 {
        return Err(Error::param("tokens must be ≥ 1"));
    }
    if !(cfg.intensity.is_finite() && cfg.intensity > 0.0) {
        return Err(Error::param("intensity must be positive"));
    }
    let dist = make_first_passage(&cfg.dist_spec()?)?;
    let deadline = cfg.tokens as f64 / cfg.intensity;
    let input = OptimalInputDensity::new(deadline, dist.rate())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let times = (0..cfg.tokens).map(|_| input.sample(&mut rng)).collect();
    let schedule = LaunchSchedule::new(times, deadline)?;
    let record = simulate_channel_use(&schedule, &dist, &mut rng)?;
    let mut report = Report::new(vec!["index", "launch_time", "arrival_time", "sorted_rank"]);
    report.digits = 17;
    report.rows = record
        .ranks()
        .into_iter()
        .enumerate()
        .map(|(i, rank)| {
            vec![
                Field::Int(i as u64),
                Field::Num(record.launches[i]),
                Field::Num(record.arrivals[i]),
                Field::Int(rank as u64),
            ]
        })
        .collect();
    Ok(report)
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Report> {
    match command {
        Command::Bounds => run_bounds(cfg),
        Command::Capacities => run_capacities(cfg),
        Command::NumberVsTiming => run_number_vs_timing(cfg),
        Command::OrderingExact => run_ordering_exact(cfg),
        Command::OrderingAsymptote => run_ordering_asymptote(cfg),
        Command::McConvergence => run_mc_convergence(cfg),
        Command::GuardDiagnostic => run_guard_diagnostic(cfg),
        Command::Simulate => run_simulate(cfg),
    }
}
