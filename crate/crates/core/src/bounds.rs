//! Capacity bounds for the deadline-constrained exponential timing channel.
//!
//! All values are in nats. `cq_*` are per token, `ct_*` per unit time
//! (`C_t = λ C_q`).

use crate::error::{Error, Result};
use crate::ordering::{asymptotic_ordering_entropy_per_token, DEFAULT_SERIES_TOLERANCE};

fn check_rate(mu: f64, deadline: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::param(format!("rate μ must be positive, got {mu}")));
    }
    if !(deadline.is_finite() && deadline >= 0.0) {
        return Err(Error::param(format!(
            "deadline τ must be ≥ 0, got {deadline}"
        )));
    }
    Ok(())
}

/// Largest differential entropy of `S = T + D` with `T ∈ [0, τ]` and
/// `D ~ Exp(μ)`: `log((e + μτ)/μ)`.
pub fn max_entropy_s(mu: f64, deadline: f64) -> Result<f64> {
    check_rate(mu, deadline)?;
    Ok((std::f64::consts::E + mu * deadline).ln() - mu.ln())
}

/// Single-token capacity under a deadline: `log(1 + μτ/e)`.
pub fn max_mi_single(mu: f64, deadline: f64) -> Result<f64> {
    check_rate(mu, deadline)?;
    Ok((mu * deadline / std::f64::consts::E).ln_1p())
}

/// `max(−log ρ, 0)`.
pub fn cq_lower_simple(load: f64) -> f64 {
    (-load.ln()).max(0.0)
}

/// `log(1/ρ) + (1/ρ) E[ℓ log ℓ]`, `ℓ ~ Poisson(ρ)`.
pub fn cq_lower(load: f64) -> Result<f64> {
    let v = -load.ln() + asymptotic_ordering_entropy_per_token(load, DEFAULT_SERIES_TOLERANCE)?;
    Ok(if v < 0.0 && v > -1e-12 { 0.0 } else { v })
}

/// `log(1/ρ + 4)`.
pub fn cq_upper(load: f64) -> f64 {
    (1.0 / load + 4.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub load: f64,
    pub cq_lower_simple: f64,
    pub cq_lower: f64,
    pub cq_upper: f64,
    pub ct_lower: f64,
    pub ct_upper: f64,
}

/// All bounds at `ρ = λ/μ`.
pub fn capacity_point(lambda: f64, mu: f64) -> Result<CapacityPoint> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param(format!(
            "rate λ must be positive, got {lambda}"
        )));
    }
    check_rate(mu, 0.0)?;
    let load = lambda / mu;
    let lower = cq_lower(load)?;
    let upper = cq_upper(load);
    Ok(CapacityPoint {
        load,
        cq_lower_simple: cq_lower_simple(load),
        cq_lower: lower,
        cq_upper: upper,
        ct_lower: lambda * lower,
        ct_upper: lambda * upper,
    })
}

impl CapacityPoint {
    /// Checks `simple ≤ lower ≤ upper` and `lower ≥ 0`.
    pub fn check_ordering(&self) -> Result<()> {
        let ok = self.cq_lower_simple <= self.cq_lower + 1e-12
            && self.cq_lower <= self.cq_upper
            && self.cq_lower >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Inconsistent(format!(
                "bound ordering violated at ρ={}: {} / {} / {}",
                self.load, self.cq_lower_simple, self.cq_lower, self.cq_upper
            )))
        }
    }
}
