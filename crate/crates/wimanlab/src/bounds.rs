//! Right-hand sides of the Wiman-type inequalities, and the integral growth
//! condition that gates the several-variable results.
//!
//! Everything here evaluates to a single log-domain number so that checking
//! an inequality anywhere in the laboratory is a comparison of two floats.
//! Iterated logarithms are guarded, never clamped: a silent clamp would bend
//! exponent fits, which is exactly the quantity under study.

use crate::series::{MultiPowerSeries, SeriesError, DOMAIN_SLACK};

#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("ln mu = {mu_log} too small; need > {needs} for iterated logs")]
    MuLogDomain { mu_log: f64, needs: f64 },
    #[error("radius {value} on axis {axis} at or below the floor {floor}")]
    RadiusFloor { axis: usize, value: f64, floor: f64 },
    #[error("ln of modulus sum = {sum_log}: out of domain (need > {needs})")]
    SumDomain { sum_log: f64, needs: f64 },
    #[error("parameter {name} = {value} out of domain")]
    BadParameter { name: &'static str, value: f64 },
}

/// Slack parameters for the inequality family.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct BoundParams {
    /// Exponent slack in the several-variable bounds.
    pub delta: f64,
    /// Slack in the directional-derivative bound.
    pub delta1: f64,
    /// Slack in the tail-cut degree.
    pub delta2: f64,
    /// Slack in the single-variable classical bound.
    pub eps: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { delta: 0.05, delta1: 0.05, delta2: 0.1, eps: 0.05 }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), BoundsError> {
        for (name, v) in [
            ("delta", self.delta),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("eps", self.eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BoundsError::BadParameter { name, value: v });
            }
        }
        Ok(())
    }
}

/// Exponent on the multivariate bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketKind {
    /// Exponent 1/2 + delta: the bound on the full modulus sum.
    Half,
    /// Exponent 1/4 + delta: the sharpened bound on the torus maximum.
    Quarter,
}

/// Exponent on ln ln mu in the radius-free reduced bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedKind {
    /// Exponent p/2 + delta.
    PHalf,
    /// Exponent p/4 + delta.
    PQuarter,
}

/// Classical single-variable bound: mu * (ln mu)^(1/2 + eps), in logs.
pub fn rhs_classical(mu_log: f64, eps: f64) -> Result<f64, BoundsError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(BoundsError::BadParameter { name: "eps", value: eps });
    }
    rhs_power(mu_log, 0.5 + eps)
}

/// mu * (ln mu)^exponent with a caller-chosen exponent, in logs. This is the
/// knob the scan predicates turn to probe either side of the 1/2 vs 1/4
/// divide.
pub fn rhs_power(mu_log: f64, exponent: f64) -> Result<f64, BoundsError> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(BoundsError::BadParameter { name: "exponent", value: exponent });
    }
    if !(mu_log > 1.0) {
        return Err(BoundsError::MuLogDomain { mu_log, needs: 1.0 });
    }
    Ok(mu_log + exponent * mu_log.ln())
}

/// Multivariate bracket exponentiation, given ln mu directly. The bracket is
/// assembled from iterated logs, never in linear scale:
///   ln rhs = ln mu + (x + delta) * [(p-1) Σ ln ln r_i + p ln ln mu].
pub fn rhs_multivariate_from(
    mu_log: f64,
    r: &[f64],
    delta: f64,
    kind: BracketKind,
) -> Result<f64, BoundsError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(BoundsError::BadParameter { name: "delta", value: delta });
    }
    let e = std::f64::consts::E;
    for (axis, &v) in r.iter().enumerate() {
        if !(v > e) {
            return Err(BoundsError::RadiusFloor { axis: axis + 1, value: v, floor: e });
        }
    }
    if !(mu_log > 1.0) {
        return Err(BoundsError::MuLogDomain { mu_log, needs: 1.0 });
    }
    let p = r.len() as f64;
    let bracket_log: f64 =
        (p - 1.0) * r.iter().map(|&v| v.ln().ln()).sum::<f64>() + p * mu_log.ln();
    let x = match kind {
        BracketKind::Half => 0.5,
        BracketKind::Quarter => 0.25,
    };
    Ok(mu_log + (x + delta) * bracket_log)
}

/// Convenience wrapper computing mu from the series.
pub fn rhs_multivariate(
    f: &MultiPowerSeries,
    r: &[f64],
    delta: f64,
    kind: BracketKind,
) -> Result<f64, BoundsError> {
    let (mu_log, _) = f.maximal_term_log(r)?;
    rhs_multivariate_from(mu_log, r, delta, kind)
}

/// ln of the bracket alone; the regression abscissa for exponent fits.
pub fn bracket_log(mu_log: f64, r: &[f64]) -> Result<f64, BoundsError> {
    let e = std::f64::consts::E;
    for (axis, &v) in r.iter().enumerate() {
        if !(v > e) {
            return Err(BoundsError::RadiusFloor { axis: axis + 1, value: v, floor: e });
        }
    }
    if !(mu_log > 1.0) {
        return Err(BoundsError::MuLogDomain { mu_log, needs: 1.0 });
    }
    let p = r.len() as f64;
    Ok((p - 1.0) * r.iter().map(|&v| v.ln().ln()).sum::<f64>() + p * mu_log.ln())
}

/// Radius-free reduced bound: mu * (ln mu)^(p/x + delta), in logs.
pub fn rhs_reduced_from(
    mu_log: f64,
    p: usize,
    delta: f64,
    kind: ReducedKind,
) -> Result<f64, BoundsError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(BoundsError::BadParameter { name: "delta", value: delta });
    }
    if !(mu_log > 1.0) {
        return Err(BoundsError::MuLogDomain { mu_log, needs: 1.0 });
    }
    let x = match kind {
        ReducedKind::PHalf => 2.0,
        ReducedKind::PQuarter => 4.0,
    };
    Ok(mu_log + (p as f64 / x + delta) * mu_log.ln())
}

pub fn rhs_reduced(
    f: &MultiPowerSeries,
    r: &[f64],
    delta: f64,
    kind: ReducedKind,
) -> Result<f64, BoundsError> {
    let (mu_log, _) = f.maximal_term_log(r)?;
    rhs_reduced_from(mu_log, f.variables(), delta, kind)
}

#[derive(Clone, Copy, Debug)]
pub struct IntegralProbe {
    /// Midpoint-rule value of the truncated integral over [e, R]^p.
    pub value: f64,
    /// value(2R) - value(R): the mass added by one radius doubling.
    /// Shrinking deltas across doublings suggest convergence; this is
    /// evidence, not proof.
    pub tail_delta: f64,
}

/// Truncated growth-condition integral
///   ∫_{[e,R]^p} dr_1...dr_p / (r_1...r_p (ln M-sum)^beta),
/// computed by the midpoint rule in log coordinates with `steps` points per
/// axis, plus the next doubling's increment.
pub fn condition4_integral(
    f: &MultiPowerSeries,
    beta: f64,
    r_cut: f64,
    steps: usize,
) -> Result<IntegralProbe, BoundsError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(BoundsError::BadParameter { name: "beta", value: beta });
    }
    if steps == 0 {
        return Err(BoundsError::BadParameter { name: "steps", value: 0.0 });
    }
    if !(r_cut > std::f64::consts::E) {
        return Err(BoundsError::BadParameter { name: "r_cut", value: r_cut });
    }
    let value = integral_pass(f, beta, r_cut.ln(), steps)?;
    let doubled = integral_pass(f, beta, (2.0 * r_cut).ln(), steps)?;
    Ok(IntegralProbe { value, tail_delta: doubled - value })
}

/// Midpoint quadrature of 1/(ln M-sum)^beta over u in [1, u_hi]^p.
fn integral_pass(
    f: &MultiPowerSeries,
    beta: f64,
    u_hi: f64,
    steps: usize,
) -> Result<f64, BoundsError> {
    let p = f.variables();
    let h = (u_hi - 1.0) / steps as f64;
    let mut counter = vec![0usize; p];
    let mut r = vec![0.0f64; p];
    let mut acc = crate::mathutil::Kahan::default();
    loop {
        for (j, &k) in counter.iter().enumerate() {
            r[j] = (1.0 + (k as f64 + 0.5) * h).exp();
        }
        let sum_log = f.sum_modulus_log(&r)?;
        if sum_log <= 0.0 {
            return Err(BoundsError::SumDomain { sum_log, needs: 0.0 });
        }
        acc.add(sum_log.powf(-beta));
        // Row-major odometer; a carry past axis 0 means the box is done.
        let mut axis = p;
        loop {
            if axis == 0 {
                return Ok(acc.value() * h.powi(p as i32));
            }
            axis -= 1;
            counter[axis] += 1;
            if counter[axis] < steps {
                break;
            }
            counter[axis] = 0;
        }
    }
}

/// Directional-derivative bound: the comparison function
///   h(x) = Π x_i (ln x_i)^(1+delta1)
/// evaluated at x = (ln r_1, ..., ln M-sum at slot s, ..., ln r_p).
pub fn lemma23_rhs(
    f: &MultiPowerSeries,
    r: &[f64],
    s: usize,
    delta1: f64,
) -> Result<f64, BoundsError> {
    if !(delta1 > 0.0 && delta1.is_finite()) {
        return Err(BoundsError::BadParameter { name: "delta1", value: delta1 });
    }
    let p = f.variables();
    if s < 1 || s > p {
        return Err(BoundsError::Series(SeriesError::AxisOutOfRange { axis: s, p }));
    }
    let floor = (1.1f64).exp() - DOMAIN_SLACK;
    for (axis, &v) in r.iter().enumerate() {
        if !(v >= floor) {
            return Err(BoundsError::RadiusFloor { axis: axis + 1, value: v, floor });
        }
    }
    let sum_log = f.sum_modulus_log(r)?;
    if !(sum_log > 1.0) {
        return Err(BoundsError::SumDomain { sum_log, needs: 1.0 });
    }
    let mut value = sum_log * sum_log.ln().powf(1.0 + delta1);
    for (axis, &v) in r.iter().enumerate() {
        if axis + 1 == s {
            continue;
        }
        let lr = v.ln();
        value *= lr * lr.ln().powf(1.0 + delta1);
    }
    Ok(value)
}
