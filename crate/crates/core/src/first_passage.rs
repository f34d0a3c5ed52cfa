//! First-passage (transit) time laws and the capacity-achieving launch density
//! for the deadline-constrained exponential channel.
//!
//! Every law is causal (`g(d) = 0` for `d < 0`) and exposes its density `g`,
//! CDF `G` and CCDF `Ḡ`. The exponential law is the primary one; gamma,
//! deterministic-shift and table-defined laws exist to exercise the
//! non-exponential branches of the ordering-entropy bounds and the guard
//! interval diagnostics.
//!
//! Note on [`OptimalInputDensity`]: the atom at the deadline carries mass
//! `(e - 1)/(e + μτ)`. The closed form is sometimes printed with `(1 - e)` in
//! the numerator, which is negative and does not normalise; `(e - 1)` is the
//! only choice making the three components sum to one.

use std::f64::consts::E;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric;

/// Tail model of a table-defined law beyond its last knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableTail {
    /// `Ḡ` decays exponentially at the rate fitted to the last two knots.
    Exponential,
    /// `Ḡ(x) = Ḡ(x_n)·x_n/x`. Infinite mean; only accepted with the
    /// validity override.
    Hyperbolic,
}

/// Description of a first-passage law, as accepted by [`make_first_passage`].
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    Shift {
        offset: f64,
    },
    /// Knots `(x, G(x))`; `G` is linearly interpolated between knots.
    Table {
        knots: Vec<(f64, f64)>,
        tail: TableTail,
    },
}

impl DistSpec {
    /// Parses `kind[:key=value[,key=value...]]`.
    ///
    /// Kinds: `exponential` (`rate`), `gamma` (`shape`, `rate`), `shift`
    /// (`offset`), `table` (`file`, optional `tail=exponential|hyperbolic`).
    /// Table files are CSV with an `x,cdf` header.
    pub fn parse(text: &str) -> Result<DistSpec> {
        let text = text.trim();
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params: Vec<(&str, &str)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got `{item}`")))?;
            params.push((k.trim(), v.trim()));
        }
        let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str, default: Option<f64>| -> Result<f64> {
            match get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| Error::param(format!("`{key}` is not a number: `{v}`"))),
                None => default.ok_or_else(|| Error::param(format!("missing `{key}` for {kind}"))),
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(DistSpec::Exponential {
                rate: num("rate", Some(1.0))?,
            }),
            "gamma" => Ok(DistSpec::Gamma {
                shape: num("shape", None)?,
                rate: num("rate", Some(1.0))?,
            }),
            "shift" | "deterministic" | "deterministic-shift" => Ok(DistSpec::Shift {
                offset: num("offset", None)?,
            }),
            "table" => {
                let file = get("file").ok_or_else(|| Error::param("table law needs `file=`"))?;
                let tail = match get("tail").unwrap_or("exponential") {
                    "exponential" | "exp" => TableTail::Exponential,
                    "hyperbolic" | "pareto" => TableTail::Hyperbolic,
                    other => return Err(Error::param(format!("unknown table tail `{other}`"))),
                };
                Ok(DistSpec::Table {
                    knots: read_knots(Path::new(file))?,
                    tail,
                })
            }
            other => Err(Error::param(format!(
                "unknown first-passage kind `{other}`"
            ))),
        }
    }
}

fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut knots = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(Error::param(format!(
                "{}:{}: expected `x,cdf`",
                path.display(),
                lineno + 1
            )));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(g)) => knots.push((x, g)),
            // header row
            _ if knots.is_empty() => continue,
            _ => {
                return Err(Error::param(format!(
                    "{}:{}: non-numeric knot",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(knots)
}

#[derive(Debug, Clone)]
struct TableLaw {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    tail: TableTail,
    /// Exponential tail decay rate (unused for hyperbolic tails).
    tail_rate: f64,
}

impl TableLaw {
    fn new(knots: &[(f64, f64)], tail: TableTail) -> Result<TableLaw> {
        if knots.len() < 2 {
            return Err(Error::param("table law needs at least two knots"));
        }
        let mut xs: Vec<f64> = Vec::with_capacity(knots.len());
        let mut cdf: Vec<f64> = Vec::with_capacity(knots.len());
        for &(x, g) in knots {
            if !x.is_finite() || !g.is_finite() || x < 0.0 || !(0.0..=1.0).contains(&g) {
                return Err(Error::param(format!("invalid knot ({x}, {g})")));
            }
            if let (Some(&px), Some(&pg)) = (xs.last(), cdf.last()) {
                if x < px || g < pg {
                    return Err(Error::param("table knots must be nondecreasing in x and G"));
                }
                if x == px {
                    if g != pg {
                        return Err(Error::Singularity(format!("CDF jumps at x = {x}")));
                    }
                    continue;
                }
            }
            xs.push(x);
            cdf.push(g);
        }
        if cdf[0] != 0.0 {
            return Err(Error::Singularity(format!(
                "CDF jumps to {} at x = {}",
                cdf[0], xs[0]
            )));
        }
        let n = xs.len();
        if n < 2 {
            return Err(Error::param("table law needs at least two distinct knots"));
        }
        let last_ccdf = 1.0 - cdf[n - 1];
        let mut tail_rate = 0.0;
        if last_ccdf > 0.0 {
            match tail {
                TableTail::Exponential => {
                    let prev_ccdf = 1.0 - cdf[n - 2];
                    if prev_ccdf <= last_ccdf {
                        return Err(Error::param(
                            "cannot fit an exponential tail: last two knots have equal CDF",
                        ));
                    }
                    tail_rate = (prev_ccdf / last_ccdf).ln() / (xs[n - 1] - xs[n - 2]);
                }
                TableTail::Hyperbolic => {
                    if xs[n - 1] <= 0.0 {
                        return Err(Error::param("hyperbolic tail needs a last knot at x > 0"));
                    }
                }
            }
        }
        Ok(TableLaw {
            xs,
            cdf,
            tail,
            tail_rate,
        })
    }

    fn last(&self) -> (f64, f64) {
        let n = self.xs.len();
        (self.xs[n - 1], 1.0 - self.cdf[n - 1])
    }

    fn ccdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 1.0;
        }
        let (xn, tail_mass) = self.last();
        if x >= xn {
            if tail_mass == 0.0 {
                return 0.0;
            }
            return match self.tail {
                TableTail::Exponential => tail_mass * (-self.tail_rate * (x - xn)).exp(),
                TableTail::Hyperbolic => tail_mass * xn / x,
            };
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        1.0 - (self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i]))
    }

    fn density(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        let (xn, _) = self.last();
        if x >= xn {
            let c = self.ccdf(x);
            return match self.tail {
                TableTail::Exponential => self.tail_rate * c,
                TableTail::Hyperbolic => c / x,
            };
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        (self.cdf[i + 1] - self.cdf[i]) / (self.xs[i + 1] - self.xs[i])
    }

    fn mean(&self) -> f64 {
        let (_, tail_mass) = self.last();
        let mut acc = numeric::NeumaierSum::new();
        acc += self.xs[0];
        for i in 0..self.xs.len() - 1 {
            let width = self.xs[i + 1] - self.xs[i];
            acc += 0.5 * width * ((1.0 - self.cdf[i]) + (1.0 - self.cdf[i + 1]));
        }
        if tail_mass > 0.0 {
            match self.tail {
                TableTail::Exponential => acc += tail_mass / self.tail_rate,
                TableTail::Hyperbolic => return f64::INFINITY,
            }
        }
        acc.value()
    }

    fn quantile(&self, u: f64) -> f64 {
        let (xn, tail_mass) = self.last();
        let n = self.xs.len();
        if u >= self.cdf[n - 1] {
            if tail_mass == 0.0 {
                return xn;
            }
            let survival = (1.0 - u).max(f64::MIN_POSITIVE);
            return match self.tail {
                TableTail::Exponential => xn + (tail_mass / survival).ln() / self.tail_rate,
                TableTail::Hyperbolic => xn * tail_mass / survival,
            };
        }
        // first knot with cdf > u; the segment below it has positive slope
        let j = self.cdf.partition_point(|&g| g <= u);
        let i = j - 1;
        let w = (u - self.cdf[i]) / (self.cdf[j] - self.cdf[i]);
        self.xs[i] + w * (self.xs[j] - self.xs[i])
    }
}

#[derive(Debug, Clone)]
enum Law {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64, ln_norm: f64 },
    Shift { offset: f64 },
    Table(TableLaw),
}

/// A causal first-passage time law with finite, positive mean (unless built
/// through the validity override).
///
/// Values are immutable after construction; sampling takes the caller's RNG.
#[derive(Debug, Clone)]
pub struct FirstPassageDist {
    law: Law,
    mean: f64,
}

/// Builds a first-passage law, enforcing finite positive mean and the
/// absence of point masses in table laws.
pub fn make_first_passage(spec: &DistSpec) -> Result<FirstPassageDist> {
    let dist = make_first_passage_allow_infinite_mean(spec)?;
    if !dist.mean.is_finite() {
        return Err(Error::InfiniteMean);
    }
    Ok(dist)
}

/// Same as [`make_first_passage`] but accepts laws with infinite mean. Only
/// the guard-interval diagnostic is meaningful for such laws.
pub fn make_first_passage_allow_infinite_mean(spec: &DistSpec) -> Result<FirstPassageDist> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::param(format!(
                "{name} must be positive and finite, got {v}"
            )))
        }
    };
    let (law, mean) = match *spec {
        DistSpec::Exponential { rate } => {
            let rate = positive("rate", rate)?;
            (Law::Exponential { rate }, 1.0 / rate)
        }
        DistSpec::Gamma { shape, rate } => {
            let shape = positive("shape", shape)?;
            let rate = positive("rate", rate)?;
            let ln_norm = shape * rate.ln() - ln_gamma(shape);
            (
                Law::Gamma {
                    shape,
                    rate,
                    ln_norm,
                },
                shape / rate,
            )
        }
        DistSpec::Shift { offset } => {
            let offset = positive("offset", offset)?;
            (Law::Shift { offset }, offset)
        }
        DistSpec::Table { ref knots, tail } => {
            let table = TableLaw::new(knots, tail)?;
            let mean = table.mean();
            if mean <= 0.0 {
                return Err(Error::param("table law has zero mean"));
            }
            (Law::Table(table), mean)
        }
    };
    Ok(FirstPassageDist { law, mean })
}

impl FirstPassageDist {
    pub fn exponential(rate: f64) -> Result<Self> {
        make_first_passage(&DistSpec::Exponential { rate })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        make_first_passage(&DistSpec::Gamma { shape, rate })
    }

    pub fn shift(offset: f64) -> Result<Self> {
        make_first_passage(&DistSpec::Shift { offset })
    }

    /// Mean transit time `1/μ` (may be infinite only via the override).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `μ`, the reciprocal of the mean.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.law, Law::Exponential { .. })
    }

    /// `false` for the deterministic shift, whose law is a point mass.
    pub fn has_density(&self) -> bool {
        !matches!(self.law, Law::Shift { .. })
    }

    /// `G(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.law {
            Law::Gamma { shape, rate, .. } if x > 0.0 && rate * x < *shape => {
                gamma_lr(*shape, rate * x)
            }
            _ => 1.0 - self.ccdf(x),
        }
    }

    /// `Ḡ(x) = 1 - G(x)`.
    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match &self.law {
                Law::Table(t) if x >= t.xs[0] => t.ccdf(x),
                _ => 1.0,
            };
        }
        match &self.law {
            Law::Exponential { rate } => (-rate * x).exp(),
            Law::Gamma { shape, rate, .. } => {
                let z = rate * x;
                if z < *shape {
                    1.0 - gamma_lr(*shape, z)
                } else {
                    gamma_ur(*shape, z)
                }
            }
            Law::Shift { offset } => {
                if x < *offset {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Table(t) => t.ccdf(x),
        }
    }

    /// Density `g(d)`; zero for `d < 0`. The deterministic shift has no
    /// density and reports `0` (use [`Self::has_density`]).
    pub fn density(&self, d: f64) -> f64 {
        if d < 0.0 {
            return 0.0;
        }
        match &self.law {
            Law::Exponential { rate } => rate * (-rate * d).exp(),
            Law::Table(t) => t.density(d),
            _ => self.ln_density(d).exp(),
        }
    }

    /// `log g(d)`, `-inf` outside the support.
    pub fn ln_density(&self, d: f64) -> f64 {
        if d < 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.law {
            Law::Exponential { rate } => rate.ln() - rate * d,
            Law::Gamma {
                shape,
                rate,
                ln_norm,
            } => {
                if d == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => rate.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                ln_norm + (shape - 1.0) * d.ln() - rate * d
            }
            Law::Shift { .. } => f64::NEG_INFINITY,
            Law::Table(t) => t.density(d).ln(),
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Law::Gamma { shape, rate, .. } => Gamma::new(*shape, 1.0 / rate)
                .expect("validated shape")
                .sample(rng),
            Law::Shift { offset } => *offset,
            Law::Table(t) => t.quantile(rng.random::<f64>()),
        }
    }

    /// `count` i.i.d. draws.
    pub fn sample_n<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        match &self.law {
            Law::Exponential { rate } => {
                let exp = Exp::new(*rate).expect("validated rate");
                (0..count).map(|_| exp.sample(rng)).collect()
            }
            Law::Gamma { shape, rate, .. } => {
                let gamma = Gamma::new(*shape, 1.0 / rate).expect("validated shape");
                (0..count).map(|_| gamma.sample(rng)).collect()
            }
            _ => (0..count).map(|_| self.sample(rng)).collect(),
        }
    }

    /// Mean computed as `∫₀^∞ Ḡ(x) dx` by adaptive quadrature, independent of
    /// the closed form in [`Self::mean`].
    pub fn mean_by_quadrature(&self) -> f64 {
        if !self.mean.is_finite() {
            return f64::INFINITY;
        }
        // integrate on doubling windows until the remaining tail is negligible
        let f = |x: f64| self.ccdf(x);
        let mut acc = numeric::NeumaierSum::new();
        let mut lo = 0.0;
        let mut hi = self.mean;
        loop {
            acc += numeric::integrate(&f, lo, hi, 1e-14 * self.mean);
            if self.ccdf(hi) < 1e-18 || hi > 1e6 * self.mean {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        acc.value()
    }
}

/// `sample_first_passage`: `count` i.i.d. transit times.
pub fn sample_first_passage<R: Rng + ?Sized>(
    dist: &FirstPassageDist,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    dist.sample_n(count, rng)
}

/// Launch-time density maximising `h(T + D)` for exponential transit under a
/// deadline: an atom at 0, an atom at the deadline and a uniform part on
/// `(0, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalInputDensity {
    deadline: f64,
    rate: f64,
}

impl OptimalInputDensity {
    pub fn new(deadline: f64, rate: f64) -> Result<Self> {
        if !(deadline.is_finite() && deadline >= 0.0) {
            return Err(Error::param(format!(
                "deadline must be ≥ 0, got {deadline}"
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::param(format!("rate must be positive, got {rate}")));
        }
        Ok(Self { deadline, rate })
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    fn denom(&self) -> f64 {
        E + self.rate * self.deadline
    }

    /// Mass of the atom at `t = 0`: `1/(e + μτ)`.
    pub fn mass_at_zero(&self) -> f64 {
        1.0 / self.denom()
    }

    /// Mass of the atom at `t = τ`: `(e − 1)/(e + μτ)`.
    pub fn mass_at_deadline(&self) -> f64 {
        (E - 1.0) / self.denom()
    }

    /// Total mass of the uniform part: `μτ/(e + μτ)`.
    pub fn uniform_mass(&self) -> f64 {
        self.rate * self.deadline / self.denom()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let w0 = self.mass_at_zero();
        let w1 = w0 + self.mass_at_deadline();
        if u < w0 {
            0.0
        } else if u < w1 {
            self.deadline
        } else {
            rng.random::<f64>() * self.deadline
        }
    }
}

/// `count` i.i.d. launch times from [`OptimalInputDensity`].
pub fn sample_optimal_input<R: Rng + ?Sized>(
    deadline: f64,
    rate: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let density = OptimalInputDensity::new(deadline, rate)?;
    Ok((0..count).map(|_| density.sample(rng)).collect())
}
