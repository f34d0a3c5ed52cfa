//! One use of the identical-token timing channel: launch, transit, sorting,
//! and the guard-interval discipline between successive uses.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::first_passage::FirstPassageDist;
use crate::numeric::fmt_g;

/// Upper bound on resampling attempts when arrivals tie numerically.
const MAX_TIE_RESAMPLES: u32 = 64;

/// `M` launch times on `[0, τ]`. The intensity is `λ = M/τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaunchSchedule {
    times: Vec<f64>,
    deadline: f64,
}

impl LaunchSchedule {
    pub fn new(times: Vec<f64>, deadline: f64) -> Result<Self> {
        if !(deadline.is_finite() && deadline >= 0.0) {
            return Err(Error::param(format!(
                "deadline must be ≥ 0, got {deadline}"
            )));
        }
        if let Some(t) = times
            .iter()
            .find(|&&t| !(t.is_finite() && (0.0..=deadline).contains(&t)))
        {
            return Err(Error::param(format!(
                "launch time {t} outside [0, {deadline}]"
            )));
        }
        Ok(Self { times, deadline })
    }

    /// Schedule whose deadline is its latest launch.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let deadline = times.iter().copied().fold(0.0, f64::max);
        Self::new(times, deadline)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `λ = M/τ` (infinite for a zero-length window).
    pub fn intensity(&self) -> f64 {
        self.times.len() as f64 / self.deadline
    }

    pub fn sorted_times(&self) -> Vec<f64> {
        let mut t = self.times.clone();
        t.sort_by(f64::total_cmp);
        t
    }
}

/// Outcome of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRecord {
    /// `t_m`, in launch order.
    pub launches: Vec<f64>,
    /// `s_m = t_m + d_m`, in launch order.
    pub arrivals: Vec<f64>,
    /// `s⃗`, ascending.
    pub sorted: Vec<f64>,
    /// `order[k]` is the launch index of the `k`-th arrival.
    pub order: Vec<usize>,
    /// `η_m = #{s < t⃗_{m+1}}` for `m = 1..M` with `t⃗_{M+1} = ∞`.
    pub occupancy: Vec<usize>,
    /// Number of times the use was redrawn because two arrivals tied.
    pub tie_resamples: u32,
}

impl ArrivalRecord {
    pub fn len(&self) -> usize {
        self.launches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.launches.is_empty()
    }

    /// Applies the recorded permutation to the unordered arrivals.
    pub fn apply_order(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.arrivals[i]).collect()
    }

    /// `rank[m]`: position of token `m` in the sorted arrivals.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (k, &i) in self.order.iter().enumerate() {
            rank[i] = k;
        }
        rank
    }

    /// Writes `index,launch_time,arrival_time,sorted_rank`, one row per token.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "index,launch_time,arrival_time,sorted_rank")?;
        for (i, rank) in self.ranks().into_iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                i,
                fmt_g(self.launches[i], 17),
                fmt_g(self.arrivals[i], 17),
                rank
            )?;
        }
        Ok(())
    }
}

/// Launch and arrival columns read back from a token CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenTable {
    pub launches: Option<Vec<f64>>,
    pub arrivals: Option<Vec<f64>>,
}

/// Reads a token CSV. Recognised columns are `launch_time` and
/// `arrival_time`; a headerless single-column file is returned as both.
pub fn read_token_csv<R: BufRead>(input: R) -> Result<TokenTable> {
    let mut lines = input.lines().filter(|l| {
        l.as_ref()
            .map_or(true, |s| !s.trim().is_empty() && !s.starts_with('#'))
    });
    let Some(first) = lines.next().transpose()? else {
        return Ok(TokenTable::default());
    };
    let header: Vec<String> = first.split(',').map(|s| s.trim().to_string()).collect();
    let has_header = header.iter().any(|h| h.parse::<f64>().is_err());
    let parse_row = |line: &str| -> Result<Vec<f64>> {
        line.split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::param(format!("non-numeric CSV field `{c}`")))
            })
            .collect()
    };
    let mut rows = Vec::new();
    if !has_header {
        rows.push(parse_row(&first)?);
    }
    for line in lines {
        rows.push(parse_row(&line?)?);
    }
    let column = |idx: usize| -> Result<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.get(idx)
                    .copied()
                    .ok_or_else(|| Error::param("short CSV row"))
            })
            .collect()
    };
    if has_header {
        let find = |name: &str| header.iter().position(|h| h == name);
        Ok(TokenTable {
            launches: find("launch_time").map(column).transpose()?,
            arrivals: find("arrival_time").map(column).transpose()?,
        })
    } else {
        let col = column(0)?;
        Ok(TokenTable {
            launches: Some(col.clone()),
            arrivals: Some(col),
        })
    }
}

/// `η_m` for `m = 1..M`: number of `sorted_arrivals` strictly below
/// `sorted_launches[m]` (with `t⃗_{M+1} = ∞`). Both inputs ascending.
pub fn occupancies(sorted_launches: &[f64], sorted_arrivals: &[f64]) -> Vec<usize> {
    let m_total = sorted_launches.len();
    let mut eta = Vec::with_capacity(m_total);
    let mut k = 0;
    for m in 1..=m_total {
        if m == m_total {
            eta.push(sorted_arrivals.len());
        } else {
            let boundary = sorted_launches[m];
            while k < sorted_arrivals.len() && sorted_arrivals[k] < boundary {
                k += 1;
            }
            eta.push(k);
        }
    }
    eta
}

/// Simulates one channel use: `s_m = t_m + d_m` with i.i.d. transit times,
/// then sorts. A numerical tie between arrivals redraws the whole use.
pub fn simulate_channel_use<R: Rng + ?Sized>(
    schedule: &LaunchSchedule,
    dist: &FirstPassageDist,
    rng: &mut R,
) -> Result<ArrivalRecord> {
    let launches = schedule.times().to_vec();
    let m = launches.len();
    let mut tie_resamples = 0;
    loop {
        let transit = dist.sample_n(m, rng);
        let arrivals: Vec<f64> = launches.iter().zip(&transit).map(|(t, d)| t + d).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| arrivals[a].total_cmp(&arrivals[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| arrivals[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            tie_resamples += 1;
            if tie_resamples > MAX_TIE_RESAMPLES {
                return Err(Error::Numeric(format!(
                    "arrivals tied in {MAX_TIE_RESAMPLES} consecutive draws; transit law is not continuous"
                )));
            }
            continue;
        }
        let occupancy = occupancies(&schedule.sorted_times(), &sorted);
        return Ok(ArrivalRecord {
            launches,
            arrivals,
            sorted,
            order,
            occupancy,
            tie_resamples,
        });
    }
}

/// Emission window and guard interval of one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardPlan {
    pub tokens: usize,
    pub epsilon: f64,
    /// `γ = εM/λ`.
    pub guard: f64,
    /// `τ = M/λ`.
    pub window: f64,
}

impl GuardPlan {
    /// `M/(τ + γ) = λ/(1 + ε)`.
    pub fn effective_rate(&self) -> f64 {
        self.tokens as f64 / (self.window + self.guard)
    }
}

/// Guard interval `γ = ε·M/λ` and window `τ = M/λ`.
pub fn plan_guard(tokens: usize, epsilon: f64, intensity: f64) -> Result<GuardPlan> {
    if tokens == 0 {
        return Err(Error::param("a channel use needs M ≥ 1 tokens"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::param(format!("λ must be positive, got {intensity}")));
    }
    let m = tokens as f64;
    Ok(GuardPlan {
        tokens,
        epsilon,
        guard: epsilon * m / intensity,
        window: m / intensity,
    })
}

/// `G(γ)^M`, a lower bound on the probability that every token of a use
/// arrives before the next use starts.
pub fn overrun_bound(tokens: usize, guard: f64, dist: &FirstPassageDist) -> f64 {
    if tokens == 0 {
        return 1.0;
    }
    let tail = dist.ccdf(guard.max(0.0));
    if tail >= 1.0 {
        return 0.0;
    }
    (tokens as f64 * (-tail).ln_1p()).exp()
}

/// Verdict of [`guard_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    NonConvergent,
}

impl std::fmt::Display for Convergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convergence::Convergent => "CONVERGENT",
            Convergence::NonConvergent => "NON-CONVERGENT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardRow {
    pub tokens: usize,
    pub guard: f64,
    /// `M·Ḡ(γ(M, ε))`.
    pub tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardDiagnostic {
    pub rows: Vec<GuardRow>,
    pub verdict: Convergence,
}

/// Default threshold the last `M·Ḡ(γ)` entry must fall under.
pub const GUARD_TOLERANCE: f64 = 1e-6;

/// Tabulates `M·Ḡ(γ(M, ε))` over `grid`. The table is judged convergent
/// when its second half is nonincreasing and its last entry is below
/// `tolerance`.
pub fn guard_diagnostic(
    dist: &FirstPassageDist,
    intensity: f64,
    epsilon: f64,
    grid: &[usize],
    tolerance: f64,
) -> Result<GuardDiagnostic> {
    if grid.is_empty() {
        return Err(Error::param("empty M grid"));
    }
    let rows = grid
        .iter()
        .map(|&m| {
            let plan = plan_guard(m, epsilon, intensity)?;
            Ok(GuardRow {
                tokens: m,
                guard: plan.guard,
                tail_mass: m as f64 * dist.ccdf(plan.guard),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &rows[rows.len() / 2..];
    let decreasing = tail.windows(2).all(|w| w[1].tail_mass <= w[0].tail_mass);
    let last = rows[rows.len() - 1].tail_mass;
    let verdict = if decreasing && last < tolerance {
        Convergence::Convergent
    } else {
        Convergence::NonConvergent
    };
    Ok(GuardDiagnostic { rows, verdict })
}
