//! Energy accounting and capacity expressions for the payload, identifiable
//! token and number (concentration) channels.
//!
//! Rates are in nats per passage time `1/μ` unless stated otherwise.

use crate::bounds::{cq_lower, cq_lower_simple, cq_upper};
use crate::error::{Error, Result};
use crate::numeric::{ln_1p_exp, NeumaierSum};
use crate::ordering::{asymptotic_ordering_entropy_per_token, DEFAULT_SERIES_TOLERANCE};

/// Per-token energy costs, in any consistent energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Fabrication cost of a token without payload.
    pub c0: f64,
    /// Fabrication cost of a payload-bearing token, excluding characters.
    pub c1: f64,
    /// Cost per payload character.
    pub dc1: f64,
    /// Release and transport cost.
    pub ce: f64,
    /// Payload length in characters.
    pub payload_len: u32,
    /// Alphabet size.
    pub alphabet: u32,
}

impl EnergyModel {
    pub fn new(
        c0: f64,
        c1: f64,
        dc1: f64,
        ce: f64,
        payload_len: u32,
        alphabet: u32,
    ) -> Result<Self> {
        let model = Self {
            c0,
            c1,
            dc1,
            ce,
            payload_len,
            alphabet,
        };
        model.validate()?;
        Ok(model)
    }

    /// DNA tokens: every cost 2 ATP, four-letter alphabet.
    pub fn dna(payload_len: u32) -> Self {
        Self {
            c0: 2.0,
            c1: 2.0,
            dc1: 2.0,
            ce: 2.0,
            payload_len,
            alphabet: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c0", self.c0),
            ("c1", self.c1),
            ("dc1", self.dc1),
            ("ce", self.ce),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("cost {name} must be ≥ 0, got {v}")));
            }
        }
        if self.alphabet < 2 {
            return Err(Error::param(format!(
                "alphabet size must be ≥ 2, got {}",
                self.alphabet
            )));
        }
        Ok(())
    }

    pub fn with_payload_len(self, payload_len: u32) -> Self {
        Self {
            payload_len,
            ..self
        }
    }

    fn ln_alphabet(&self) -> f64 {
        (self.alphabet as f64).ln()
    }
}

/// `λ (c0 + ce)`.
pub fn power_timing(lambda: f64, model: &EnergyModel) -> f64 {
    lambda * (model.c0 + model.ce)
}

/// `λ (c1 + ce + (H↑/log b + K) Δc1)`: an upper bound on the power of the
/// timing-plus-payload channel, with `h_per_token` the sequencing overhead in
/// nats per token.
pub fn power_payload(lambda: f64, model: &EnergyModel, h_per_token: f64) -> Result<f64> {
    model.validate()?;
    let chars = h_per_token / model.ln_alphabet() + model.payload_len as f64;
    Ok(lambda * (model.c1 + model.ce + chars * model.dc1))
}

/// Which bound stands in for `C_q` in the comparative capacities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CqBound {
    #[default]
    Lower,
    LowerSimple,
    Upper,
}

impl CqBound {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "lower" => Ok(Self::Lower),
            "lower-simple" => Ok(Self::LowerSimple),
            "upper" => Ok(Self::Upper),
            other => Err(Error::param(format!(
                "unknown bound `{other}` (expected lower, lower-simple or upper)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lower => "lower",
            Self::LowerSimple => "lower-simple",
            Self::Upper => "upper",
        }
    }

    pub fn eval(self, load: f64) -> Result<f64> {
        match self {
            Self::Lower => cq_lower(load),
            Self::LowerSimple => Ok(cq_lower_simple(load)),
            Self::Upper => Ok(cq_upper(load)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCapacities {
    /// `𝒞_T = λ C_q(ρ)`.
    pub timing: f64,
    /// `𝒞_{T+P} = λ (C_q(ρ) + K log b)`.
    pub timing_payload: f64,
    /// `𝒞_P = 𝒞_{T+P} − 𝒞_T`.
    pub payload: f64,
}

pub fn channel_capacities(
    lambda: f64,
    load: f64,
    payload_len: u32,
    alphabet: u32,
    bound: CqBound,
) -> Result<ChannelCapacities> {
    if !(lambda > 0.0 && load > 0.0) {
        return Err(Error::param(format!(
            "λ and ρ must be positive, got {lambda} and {load}"
        )));
    }
    if alphabet < 2 {
        return Err(Error::param(format!(
            "alphabet size must be ≥ 2, got {alphabet}"
        )));
    }
    let cq = bound.eval(load)?;
    let timing = lambda * cq;
    let timing_payload = lambda * (cq + payload_len as f64 * (alphabet as f64).ln());
    Ok(ChannelCapacities {
        timing,
        timing_payload,
        payload: timing_payload - timing,
    })
}

/// Per-token sequencing side information for payload reassembly under
/// exponential transit, in nats.
pub fn sequencing_overhead_per_token(load: f64) -> Result<f64> {
    asymptotic_ordering_entropy_per_token(load, DEFAULT_SERIES_TOLERANCE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifiableCapacity {
    /// `ρ log(1 + e^{𝒫/ρ}/(ρe))`.
    pub capacity: f64,
    /// The `ρ → 0` limit, `𝒫`.
    pub low_load_limit: f64,
}

/// Power-constrained capacity of `M` parallel single-token timing channels
/// using distinguishable tokens.
pub fn identifiable_capacity(load: f64, power: f64) -> Result<IdentifiableCapacity> {
    if !(load > 0.0 && power > 0.0) {
        return Err(Error::param(format!(
            "ρ and 𝒫 must be positive, got {load} and {power}"
        )));
    }
    let capacity = load * ln_1p_exp(power / load - load.ln() - 1.0);
    Ok(IdentifiableCapacity {
        capacity,
        low_load_limit: power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberChannelPoint {
    pub tokens: u32,
    pub epsilon: f64,
    /// Signaling interval `τ(M)`.
    pub interval: f64,
    /// Launch rate `λ(M)`.
    pub rate: f64,
    /// Expected number of intervals spanned by a burst.
    pub zbar: f64,
    /// `C̃_N` in nats per passage time.
    pub capacity: f64,
    /// Normalized power `λ/μ`.
    pub power: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("ε must lie in (0, 1), got {epsilon}")))
    }
}

/// `z̄(M) = Σ_{z≥0} (1 − (1 − ε^z)^M)`, summed until a term drops below
/// `1e-15`.
pub fn zbar_series(tokens: u32, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let m = tokens as f64;
    let mut acc = NeumaierSum::new();
    acc += 1.0;
    let mut eps_z = 1.0;
    loop {
        eps_z *= epsilon;
        let term = -(m * (-eps_z).ln_1p()).exp_m1();
        acc += term;
        if term < 1e-15 {
            break;
        }
    }
    Ok(acc.value())
}

/// Alternating binomial form `−Σ_{n=1}^{M} C(M,n) (−1)^n / (1 − ε^n)`.
/// Cancels catastrophically for large `M`; kept as a small-`M` cross-check.
pub fn zbar_alternating(tokens: u32, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if tokens > 30 {
        return Err(Error::TooLarge {
            tokens: tokens as usize,
            limit: 30,
            what: "alternating z̄ sum",
        });
    }
    let mut binom = 1.0;
    let mut sum = 0.0;
    for n in 1..=tokens {
        binom *= (tokens - n + 1) as f64 / n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum -= binom * sign / (1.0 - epsilon.powi(n as i32));
    }
    Ok(sum)
}

/// Number channel with at most `M` tokens per interval, interval chosen so
/// that all `M` tokens arrive within it with probability `1 − ε`.
pub fn number_channel_point(tokens: u32, epsilon: f64, mu: f64) -> Result<NumberChannelPoint> {
    check_epsilon(epsilon)?;
    if tokens == 0 {
        return Err(Error::param("token count M must be ≥ 1"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::param(format!("rate μ must be positive, got {mu}")));
    }
    let m = tokens as f64;
    // 1 − (1−ε)^{1/M}, without cancellation
    let miss = -((-epsilon).ln_1p() / m).exp_m1();
    let mu_tau = -miss.ln();
    let zbar = zbar_series(tokens, epsilon)?;
    let rate = mu * m / (2.0 * mu_tau);
    Ok(NumberChannelPoint {
        tokens,
        epsilon,
        interval: mu_tau / mu,
        rate,
        zbar,
        capacity: (m + 1.0).ln() / (zbar * mu_tau),
        power: rate / mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn unit_costs() -> EnergyModel {
        EnergyModel::new(1.0, 1.0, 1.0, 1.0, 0, 2).unwrap()
    }

    #[test]
    fn power_examples() {
        assert_eq!(power_timing(1.0, &unit_costs()), 2.0);
        assert_eq!(power_timing(1.0, &EnergyModel::dna(0)), 4.0);
        assert_eq!(power_timing(0.5, &unit_costs()), 1.0);

        let m = EnergyModel::dna(0);
        assert_eq!(power_payload(1.0, &m, 0.0).unwrap(), 4.0);
        let h = sequencing_overhead_per_token(1.0).unwrap();
        let p = power_payload(1.0, &EnergyModel::dna(1), h).unwrap();
        assert!((p - 6.8272).abs() < 1e-3, "{p}");
        assert_eq!(
            power_payload(2.0, &EnergyModel::dna(1), h).unwrap(),
            2.0 * p
        );

        let bad = EnergyModel {
            alphabet: 1,
            ..EnergyModel::dna(1)
        };
        assert!(power_payload(1.0, &bad, 0.1).is_err());
        assert!(EnergyModel::new(-1.0, 0.0, 0.0, 0.0, 0, 2).is_err());
    }

    #[test]
    fn capacity_examples() {
        let c = channel_capacities(1.0, 1.0, 0, 4, CqBound::Lower).unwrap();
        assert_eq!(c.timing, c.timing_payload);
        assert_eq!(c.payload, 0.0);
        let c = channel_capacities(1.0, 1.0, 1, 4, CqBound::Lower).unwrap();
        assert!((c.payload - 4f64.ln()).abs() < 1e-12);
        assert!((c.timing_payload - 1.9597).abs() < 1e-3);
        let c = channel_capacities(0.7, 0.7, 3, 2, CqBound::Upper).unwrap();
        assert!((c.payload - 3.0 * 0.7 * LN_2).abs() < 1e-12);
        assert_eq!(
            CqBound::parse("lower-simple").unwrap(),
            CqBound::LowerSimple
        );
        assert!(CqBound::parse("middle").is_err());
    }

    #[test]
    fn sequencing_overhead_examples() {
        assert!(sequencing_overhead_per_token(1e-8).unwrap() < 1e-7);
        assert!((sequencing_overhead_per_token(1.0).unwrap() - 0.5734).abs() < 5e-4);
    }

    #[test]
    fn identifiable_examples() {
        let c = identifiable_capacity(1.0, 1.0).unwrap();
        assert!((c.capacity - LN_2).abs() < 1e-15);
        assert_eq!(c.low_load_limit, 1.0);
        let c = identifiable_capacity(0.1, 2.0).unwrap();
        let direct = 0.1 * (1.0 + 20f64.exp() / (0.1 * std::f64::consts::E)).ln();
        assert!((c.capacity - direct).abs() < 1e-12);
        assert!((c.capacity - 2.1304).abs() < 5e-4);
        for power in [0.1, 1.0, 5.0] {
            let c = identifiable_capacity(1e-6, power).unwrap();
            assert!((c.capacity - power).abs() / power < 1e-3);
        }
    }

    #[test]
    fn number_channel_example() {
        let p = number_channel_point(1, 0.1, 1.0).unwrap();
        assert!((p.interval - 10f64.ln()).abs() < 1e-12);
        assert!((p.zbar - 1.0 / 0.9).abs() < 1e-12);
        assert!((p.capacity - 0.27090).abs() < 1e-4);
        assert!((p.power - 0.21715).abs() < 1e-5);
        let p = number_channel_point(1, 0.1, 4.0).unwrap();
        assert!((p.interval - 10f64.ln() / 4.0).abs() < 1e-12);
        assert!(number_channel_point(1, 1e-12, 1.0).unwrap().capacity < 0.03);
        assert!(number_channel_point(0, 0.1, 1.0).is_err());
        assert!(number_channel_point(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn zbar_forms_agree_for_small_m() {
        for m in 1..=20 {
            for eps in [0.05, 0.1, 0.2, 0.3, 0.5] {
                let a = zbar_series(m, eps).unwrap();
                let b = zbar_alternating(m, eps).unwrap();
                assert!((a - b).abs() < 1e-9, "M={m} ε={eps}: {a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn payload_identity(lambda in 1e-3f64..1e3, load in 1e-3f64..1e3, k in 0u32..8, b in 2u32..30) {
            let c = channel_capacities(lambda, load, k, b, CqBound::Lower).unwrap();
            prop_assert_eq!(c.payload, c.timing_payload - c.timing);
        }

        #[test]
        fn payload_power_monotone(lambda in 0.01f64..10.0, k in 0u32..6, dc1 in 0.0f64..5.0, h in 0.0f64..5.0) {
            let m = EnergyModel { dc1, ..EnergyModel::dna(k) };
            let p = power_payload(lambda, &m, h).unwrap();
            prop_assert!(power_payload(lambda, &m.with_payload_len(k + 1), h).unwrap() >= p);
            let costlier = EnergyModel { dc1: dc1 + 0.5, ..m };
            prop_assert!(power_payload(lambda, &costlier, h).unwrap() >= p);
            prop_assert!(power_payload(lambda, &m, h + 0.5).unwrap() >= p);
            prop_assert!(power_payload(lambda * 1.5, &m, h).unwrap() >= p);
        }

        #[test]
        fn zbar_at_least_one_and_increasing_in_eps(m in 1u32..5000, e1 in 0.01f64..0.9, de in 0.001f64..0.09) {
            let lo = zbar_series(m, e1).unwrap();
            let hi = zbar_series(m, e1 + de).unwrap();
            prop_assert!(lo >= 1.0);
            prop_assert!(hi > lo);
            let p = number_channel_point(m, e1, 1.0).unwrap();
            prop_assert!(p.interval > 0.0 && p.capacity.is_finite() && p.power.is_finite());
        }
    }
}
