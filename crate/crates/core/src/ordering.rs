//! Ordering entropy `H(Ω|S⃗,T)`: the residual uncertainty about which sorted
//! arrival belongs to which launch.
//!
//! Four routes are provided, from exact to asymptotic:
//!
//! - [`exact_conditional_entropy`] enumerates all `M!` assignments (small `M`);
//! - [`count_admissible`] gives `log |Ω|`, the maximum-entropy value reached
//!   exactly when transit is exponential;
//! - [`upper_bound_ht`] averages `log |Ω|` over arrivals for a fixed schedule
//!   (`H↑(t)`), via a Poisson-binomial recurrence;
//! - [`mc_ordering_entropy_per_token`] and
//!   [`asymptotic_ordering_entropy_per_token`] give the per-token value under
//!   the capacity-achieving launch density, by simulation and by series.
//!
//! The `brute_force_*` functions are literal enumerations kept as oracles.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::channel::occupancies;
use crate::error::{Error, Result};
use crate::first_passage::{FirstPassageDist, OptimalInputDensity};
use crate::numeric::{log_sum_exp, stable_sum, NeumaierSum};

/// Largest `M` for which exact integer counts are kept (`20! < 2^64`).
pub const EXACT_COUNT_LIMIT: usize = 20;
/// Largest `M` accepted by the permutation enumerations.
pub const ENUMERATION_LIMIT: usize = 8;
/// Largest `M` accepted by [`brute_force_ht`].
pub const BRUTE_HT_LIMIT: usize = 10;
/// Largest `M` accepted by [`upper_bound_ht`].
pub const HT_EXACT_LIMIT: usize = 512;
/// Default relative truncation tolerance of the asymptotic series.
pub const DEFAULT_SERIES_TOLERANCE: f64 = 1e-12;

const FLUSH_TO_ZERO: f64 = 1e-300;

/// Number of causal assignments of sorted arrivals to launches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleCount {
    /// `log |Ω|` in nats.
    pub log_count: f64,
    /// `|Ω|` when `M ≤ 20`.
    pub count: Option<u64>,
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_lengths(schedule: &[f64], arrivals: &[f64]) -> Result<()> {
    if schedule.len() != arrivals.len() {
        return Err(Error::Inconsistent(format!(
            "{} launches but {} arrivals",
            schedule.len(),
            arrivals.len()
        )));
    }
    if schedule.is_empty() {
        return Err(Error::param("empty schedule"));
    }
    Ok(())
}

/// `|Ω| = ∏_{m=1}^{M-1} (m + 1 − η_m)` where `η_m` counts arrivals before
/// the `(m+1)`-th launch. Both arguments may be in any order.
pub fn count_admissible(schedule: &[f64], arrivals: &[f64]) -> Result<AdmissibleCount> {
    check_lengths(schedule, arrivals)?;
    let (t, s) = (sorted_copy(schedule), sorted_copy(arrivals));
    if s[0] < t[0] {
        return Err(Error::Inconsistent(format!(
            "arrival {} precedes every launch",
            s[0]
        )));
    }
    let eta = occupancies(&t, &s);
    let m_total = t.len();
    let mut log_count = NeumaierSum::new();
    let mut count: Option<u64> = (m_total <= EXACT_COUNT_LIMIT).then_some(1);
    for (m, &eta_m) in (1..m_total).zip(&eta) {
        if eta_m > m {
            return Err(Error::Inconsistent(format!(
                "{eta_m} arrivals precede launch {} of {m_total}",
                m + 1
            )));
        }
        let factor = (m + 1 - eta_m) as u64;
        log_count += (factor as f64).ln();
        count = count.map(|c| c * factor);
    }
    Ok(AdmissibleCount {
        log_count: log_count.value(),
        count,
    })
}

fn log_admissible_sorted(t: &[f64], s: &[f64]) -> f64 {
    let eta = occupancies(t, s);
    stable_sum(
        (1..t.len())
            .zip(&eta)
            .map(|(m, &e)| ((m + 1 - e) as f64).ln()),
    )
}

/// Counts permutations `n` with `P_n(s) ≥ t` componentwise by enumeration.
pub fn brute_force_admissible(schedule: &[f64], arrivals: &[f64]) -> Result<AdmissibleCount> {
    check_lengths(schedule, arrivals)?;
    let m = schedule.len();
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            tokens: m,
            limit: ENUMERATION_LIMIT,
            what: "permutation enumeration",
        });
    }
    let count = (0..m)
        .permutations(m)
        .filter(|perm| perm.iter().zip(schedule).all(|(&i, &t)| arrivals[i] >= t))
        .count() as u64;
    if count == 0 {
        return Err(Error::Inconsistent("no causal assignment exists".into()));
    }
    Ok(AdmissibleCount {
        log_count: (count as f64).ln(),
        count: Some(count),
    })
}

/// `H(Ω|s⃗,t)` from the posterior over assignments,
/// `p_n ∝ ∏_m g([P_n(s⃗)]_m − t_m)`.
pub fn exact_conditional_entropy(
    schedule: &[f64],
    arrivals: &[f64],
    dist: &FirstPassageDist,
) -> Result<f64> {
    check_lengths(schedule, arrivals)?;
    let m = schedule.len();
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            tokens: m,
            limit: ENUMERATION_LIMIT,
            what: "exact ordering entropy",
        });
    }
    if !dist.has_density() {
        return Err(Error::Singularity(
            "exact ordering entropy needs a transit density".into(),
        ));
    }
    let sorted = sorted_copy(arrivals);
    let log_weights: Vec<f64> = (0..m)
        .permutations(m)
        .map(|perm| {
            if perm.iter().zip(schedule).any(|(&i, &t)| sorted[i] < t) {
                return f64::NEG_INFINITY;
            }
            stable_sum(
                perm.iter()
                    .zip(schedule)
                    .map(|(&i, &t)| dist.ln_density(sorted[i] - t)),
            )
        })
        .filter(|w| *w > f64::NEG_INFINITY)
        .collect();
    if log_weights.is_empty() {
        return Err(Error::Inconsistent("no causal assignment exists".into()));
    }
    let norm = log_sum_exp(&log_weights);
    let entropy = -stable_sum(log_weights.iter().map(|&w| {
        let lp = w - norm;
        lp.exp() * lp
    }));
    Ok(entropy.max(0.0))
}

/// Distribution of a sum of independent Bernoulli variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonBinomial {
    pmf: Vec<f64>,
}

impl PoissonBinomial {
    /// Add-one-Bernoulli convolution; entries below `1e-300` are flushed.
    pub fn from_probabilities(probs: &[f64]) -> Self {
        let mut pmf = Vec::with_capacity(probs.len() + 1);
        pmf.push(1.0);
        for &p in probs {
            if p <= 0.0 {
                continue;
            }
            let q = 1.0 - p;
            pmf.push(0.0);
            for k in (1..pmf.len()).rev() {
                let v = pmf[k] * q + pmf[k - 1] * p;
                pmf[k] = if v < FLUSH_TO_ZERO { 0.0 } else { v };
            }
            pmf[0] *= q;
            if pmf[0] < FLUSH_TO_ZERO {
                pmf[0] = 0.0;
            }
        }
        Self { pmf }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn expectation<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        stable_sum(
            self.pmf
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| p * f(k)),
        )
    }
}

/// `H↑(t) = Σ_{m=1}^{M-1} E[log(1 + η̄_m)]` where `η̄_m` counts the first `m`
/// tokens still in transit at the `(m+1)`-th launch.
pub fn upper_bound_ht(schedule: &[f64], dist: &FirstPassageDist) -> Result<f64> {
    let m_total = schedule.len();
    if m_total > HT_EXACT_LIMIT {
        return Err(Error::TooLarge {
            tokens: m_total,
            limit: HT_EXACT_LIMIT,
            what: "exact H↑ (use mc_ordering_entropy_per_token)",
        });
    }
    let t = sorted_copy(schedule);
    let ln_table: Vec<f64> = (0..=m_total).map(|k| ((1 + k) as f64).ln()).collect();
    let mut total = NeumaierSum::new();
    let mut probs = Vec::with_capacity(m_total);
    for m in 1..m_total {
        probs.clear();
        probs.extend(t[..m].iter().map(|&tj| dist.ccdf(t[m] - tj)));
        total += PoissonBinomial::from_probabilities(&probs).expectation(|k| ln_table[k]);
    }
    Ok(total.value())
}

/// Literal `2^m`-term evaluation of `H↑(t)`; oracle for [`upper_bound_ht`].
pub fn brute_force_ht(schedule: &[f64], dist: &FirstPassageDist) -> Result<f64> {
    let m_total = schedule.len();
    if m_total > BRUTE_HT_LIMIT {
        return Err(Error::TooLarge {
            tokens: m_total,
            limit: BRUTE_HT_LIMIT,
            what: "brute-force H↑",
        });
    }
    let t = sorted_copy(schedule);
    let mut total = 0.0;
    for m in 1..m_total {
        let gbar: Vec<f64> = (0..m).map(|j| dist.ccdf(t[m] - t[j])).collect();
        for mask in 0u32..(1 << m) {
            let mut weight = 1.0;
            for (j, &gb) in gbar.iter().enumerate() {
                weight *= if mask >> j & 1 == 1 { gb } else { 1.0 - gb };
            }
            total += weight * (1.0 + mask.count_ones() as f64).ln();
        }
    }
    Ok(total)
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Mean of `(1/M) log |Ω|` over `trials` channel uses with `M` launches
/// i.i.d. from [`OptimalInputDensity`] on `[0, M/ρ]` and unit-mean
/// exponential transit. With exponential transit `log |Ω|` is the exact
/// conditional ordering entropy, so this estimates `H(Ω|S⃗,T)/M`.
///
/// Trial `i` draws from ChaCha8 stream `i` of `seed`; the result does not
/// depend on the number of worker threads.
pub fn mc_ordering_entropy_per_token(
    tokens: usize,
    load: f64,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(load.is_finite() && load > 0.0) {
        return Err(Error::param(format!("load ρ must be positive, got {load}")));
    }
    if trials == 0 {
        return Err(Error::param("trials must be ≥ 1"));
    }
    if tokens <= 1 {
        return Ok(Estimate {
            mean: 0.0,
            stderr: 0.0,
            trials,
        });
    }
    let input = OptimalInputDensity::new(tokens as f64 / load, 1.0)?;
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut launches: Vec<f64> = (0..tokens).map(|_| input.sample(&mut rng)).collect();
            let mut arrivals: Vec<f64> = launches
                .iter()
                .map(|&t| {
                    let d: f64 = Exp1.sample(&mut rng);
                    t + d
                })
                .collect();
            launches.sort_by(f64::total_cmp);
            arrivals.sort_by(f64::total_cmp);
            log_admissible_sorted(&launches, &arrivals) / tokens as f64
        })
        .collect();
    let n = per_trial.len() as f64;
    let mean = stable_sum(per_trial.iter().copied()) / n;
    let stderr = if per_trial.len() > 1 {
        let var = stable_sum(per_trial.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        stderr,
        trials,
    })
}

fn check_load(load: f64) -> Result<()> {
    if load.is_finite() && load > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("load ρ must be positive, got {load}")))
    }
}

fn series_done(term: f64, acc: f64, ell: f64, load: f64, tolerance: f64) -> bool {
    ell >= load + 10.0 * load.sqrt() + 20.0 && term.abs() < tolerance * acc.abs()
}

/// Asymptotic ordering entropy per token,
/// `(1/ρ) Σ_{ℓ≥2} e^{-ρ} ρ^ℓ/ℓ! · ℓ log ℓ = (1/ρ) E[ℓ log ℓ]` for
/// `ℓ ~ Poisson(ρ)`.
pub fn asymptotic_ordering_entropy_per_token(load: f64, tolerance: f64) -> Result<f64> {
    check_load(load)?;
    let ln_load = load.ln();
    let mut ln_p = -load + ln_load; // log p_1
    let mut acc = NeumaierSum::new();
    let mut ell = 1u64;
    loop {
        ell += 1;
        let l = ell as f64;
        ln_p += ln_load - l.ln();
        let term = (ln_p + (l * l.ln()).ln()).exp();
        acc += term;
        if series_done(term, acc.value(), l, load, tolerance) {
            break;
        }
    }
    Ok(acc.value() / load)
}

/// The same limit evaluated in its uncompacted form
/// `Σ_{k≥2} e^{-ρ} ρ^k/k! · (k/ρ − 1) · log k!`.
pub fn asymptotic_ordering_entropy_direct(load: f64, tolerance: f64) -> Result<f64> {
    check_load(load)?;
    let ln_load = load.ln();
    let mut ln_p = -load + ln_load;
    let mut ln_fact = 0.0;
    let mut acc = NeumaierSum::new();
    let mut k = 1u64;
    loop {
        k += 1;
        let kf = k as f64;
        ln_p += ln_load - kf.ln();
        ln_fact += kf.ln();
        let term = (ln_p + ln_fact.ln()).exp() * (kf / load - 1.0);
        acc += term;
        if series_done(term, acc.value(), kf, load, tolerance) {
            break;
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn exp1() -> FirstPassageDist {
        FirstPassageDist::exponential(1.0).unwrap()
    }

    #[test]
    fn admissible_count_examples() {
        let c = count_admissible(&[0.0, 1.0], &[0.5, 1.5]).unwrap();
        assert_eq!(c.count, Some(1));
        let c = count_admissible(&[0.0, 1.0], &[1.2, 1.5]).unwrap();
        assert_eq!(c.count, Some(2));
        let c = count_admissible(&[0.0, 0.0, 0.0], &[0.3, 0.1, 2.0]).unwrap();
        assert_eq!(c.count, Some(6));
        assert!((c.log_count - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn admissible_count_rejects_acausal_arrivals() {
        assert!(matches!(
            count_admissible(&[1.0, 2.0], &[0.5, 3.0]),
            Err(Error::Inconsistent(_))
        ));
        assert!(matches!(
            count_admissible(&[0.0, 5.0, 6.0], &[1.0, 2.0, 3.0]),
            Err(Error::Inconsistent(_))
        ));
        assert!(matches!(
            count_admissible(&[0.0], &[1.0, 2.0]),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_admissible(&[3.0], &[4.0]).unwrap().count,
            Some(1)
        );
        assert_eq!(
            brute_force_admissible(&[0.0, 1.0], &[1.2, 1.5])
                .unwrap()
                .count,
            Some(2)
        );
        assert!(matches!(
            brute_force_admissible(&[0.0; 9], &[1.0; 9]),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn exact_entropy_examples() {
        let h = exact_conditional_entropy(&[0.0, 1.0], &[1.2, 1.5], &exp1()).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-12);

        // weights ∝ g(1.2)g(0.5) : g(1.5)g(0.2) with g(d) = d e^{-d}
        let gamma = FirstPassageDist::gamma(2.0, 1.0).unwrap();
        let h = exact_conditional_entropy(&[0.0, 1.0], &[1.2, 1.5], &gamma).unwrap();
        let expected = 3f64.ln() - 2.0 / 3.0 * 2f64.ln();
        assert!((h - expected).abs() < 1e-12, "{h} vs {expected}");
        assert!((h - 0.63651).abs() < 1e-5);

        let h = exact_conditional_entropy(&[0.0, 1.0], &[0.5, 1.5], &gamma).unwrap();
        assert_eq!(h, 0.0);

        let shift = FirstPassageDist::shift(1.0).unwrap();
        assert!(matches!(
            exact_conditional_entropy(&[0.0, 1.0], &[1.0, 2.0], &shift),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn ht_examples() {
        assert_eq!(upper_bound_ht(&[2.0], &exp1()).unwrap(), 0.0);
        assert!((upper_bound_ht(&[0.0, 0.0], &exp1()).unwrap() - 2f64.ln()).abs() < 1e-15);
        let expected = (-1.0f64).exp() * 2f64.ln();
        assert!((upper_bound_ht(&[1.0, 0.0], &exp1()).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.25500).abs() < 1e-5);
        assert!((brute_force_ht(&[0.0, 0.0], &exp1()).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(brute_force_ht(&[1.0], &exp1()).unwrap(), 0.0);
        assert!(matches!(
            upper_bound_ht(&vec![0.0; HT_EXACT_LIMIT + 1], &exp1()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn poisson_binomial_is_normalised() {
        let pb = PoissonBinomial::from_probabilities(&[0.1, 0.5, 0.9, 0.0, 1.0]);
        let total: f64 = pb.pmf().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pb.pmf().iter().all(|&p| p >= 0.0));
        let mean = pb.expectation(|k| k as f64);
        assert!((mean - 2.5).abs() < 1e-12);
    }

    /// Term-by-term summation of the compact series with plain factorials.
    fn naive_series(load: f64, terms: u32) -> f64 {
        let mut fact = 1.0;
        let mut sum = 0.0;
        for l in 1..=terms {
            fact *= l as f64;
            if l >= 2 {
                let lf = l as f64;
                sum += (-load).exp() * load.powi(l as i32) / fact * lf * lf.ln();
            }
        }
        sum / load
    }

    #[test]
    fn series_values() {
        let v1 = asymptotic_ordering_entropy_per_token(1.0, DEFAULT_SERIES_TOLERANCE).unwrap();
        assert!((v1 - naive_series(1.0, 50)).abs() < 1e-12);
        assert!((v1 - 0.5734).abs() < 5e-4);
        let v10 = asymptotic_ordering_entropy_per_token(10.0, DEFAULT_SERIES_TOLERANCE).unwrap();
        assert!((v10 - 2.3526).abs() < 1e-3, "{v10}");
        assert!((v10 - naive_series(10.0, 150)).abs() < 1e-10);
        let small = asymptotic_ordering_entropy_per_token(0.01, DEFAULT_SERIES_TOLERANCE).unwrap();
        assert!((small - 0.0070).abs() < 2e-4, "{small}");
        let tiny = asymptotic_ordering_entropy_per_token(1e-9, DEFAULT_SERIES_TOLERANCE).unwrap();
        assert!(tiny < 1e-8);
        assert!(asymptotic_ordering_entropy_per_token(0.0, 1e-12).is_err());
        assert!(asymptotic_ordering_entropy_direct(-1.0, 1e-12).is_err());
    }

    #[test]
    fn series_forms_agree() {
        for load in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let a = asymptotic_ordering_entropy_per_token(load, DEFAULT_SERIES_TOLERANCE).unwrap();
            let b = asymptotic_ordering_entropy_direct(load, DEFAULT_SERIES_TOLERANCE).unwrap();
            assert!((a - b).abs() < 1e-9, "ρ={load}: {a} vs {b}");
        }
    }

    #[test]
    fn series_increases_with_load() {
        let grid = crate::numeric::log_grid(0.01, 100.0, 120);
        let vals: Vec<f64> = grid
            .iter()
            .map(|&r| asymptotic_ordering_entropy_per_token(r, DEFAULT_SERIES_TOLERANCE).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn mc_edge_cases_and_determinism() {
        let e = mc_ordering_entropy_per_token(1, 1.0, 10, 3).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        let a = mc_ordering_entropy_per_token(300, 1.0, 16, 9).unwrap();
        let b = mc_ordering_entropy_per_token(300, 1.0, 16, 9).unwrap();
        assert_eq!(a, b);
        assert!(mc_ordering_entropy_per_token(10, 1.0, 0, 0).is_err());
    }

    #[test]
    fn mc_light_load_rarely_reorders() {
        let e = mc_ordering_entropy_per_token(2000, 0.01, 50, 17).unwrap();
        assert!(e.mean < 0.02, "{}", e.mean);
    }

    #[test]
    fn gamma_entropy_strictly_below_log_count() {
        // Near-exchangeable pairs (close launches, late arrivals) have a true
        // deficit far below 1e-6, so only the bulk is held to that margin.
        let gamma = FirstPassageDist::gamma(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (mut checked, mut wide) = (0, 0);
        while checked < 400 {
            let m = rng.random_range(2..=5);
            let t: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * m as f64).collect();
            let s: Vec<f64> = t.iter().map(|&x| x + gamma.sample(&mut rng)).collect();
            let count = count_admissible(&t, &s).unwrap();
            if count.count.unwrap() < 2 {
                continue;
            }
            let h = exact_conditional_entropy(&t, &s, &gamma).unwrap();
            assert!(h < count.log_count, "{t:?} {s:?}");
            wide += usize::from(h < count.log_count - 1e-6);
            checked += 1;
        }
        assert!(wide >= 392, "{wide}/400");
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, u64)> {
        (2usize..=7, any::<u64>()).prop_map(|(m, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 3.0).collect();
            let s: Vec<f64> = t.iter().map(|&x| x + rng.sample::<f64, _>(Exp1)).collect();
            (t, s, seed)
        })
    }

    proptest! {
        #[test]
        fn count_matches_enumeration((t, s, _) in instance()) {
            let fast = count_admissible(&t, &s).unwrap();
            let slow = brute_force_admissible(&t, &s).unwrap();
            prop_assert_eq!(fast.count, slow.count);
        }

        #[test]
        fn count_is_permutation_invariant((t, s, seed) in instance()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let (mut tp, mut sp) = (t.clone(), s.clone());
            tp.shuffle(&mut rng);
            sp.shuffle(&mut rng);
            prop_assert_eq!(count_admissible(&t, &s).unwrap(), count_admissible(&tp, &sp).unwrap());
        }

        #[test]
        fn entropy_sandwich((t, s, _) in instance()) {
            let gamma = FirstPassageDist::gamma(2.0, 1.0).unwrap();
            let log_count = count_admissible(&t, &s).unwrap().log_count;
            let log_fact = crate::numeric::ln_factorial(t.len() as u64);
            for d in [exp1(), gamma] {
                let h = exact_conditional_entropy(&t, &s, &d).unwrap();
                prop_assert!(h >= 0.0);
                prop_assert!(h <= log_count + 1e-9);
                prop_assert!(log_count <= log_fact + 1e-12);
            }
            let h = exact_conditional_entropy(&t, &s, &exp1()).unwrap();
            prop_assert!((h - log_count).abs() < 1e-9);
        }

        #[test]
        fn ht_dp_matches_literal_sum(t in prop::collection::vec(0.0f64..4.0, 1..=10), shape in 0.5f64..4.0) {
            for d in [exp1(), FirstPassageDist::gamma(shape, 1.0).unwrap()] {
                let dp = upper_bound_ht(&t, &d).unwrap();
                let lit = brute_force_ht(&t, &d).unwrap();
                prop_assert!((dp - lit).abs() < 1e-10);
            }
        }
    }
}
