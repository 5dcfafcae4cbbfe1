//! Lower-bound experiments around the slice regions A_t and the
//! Erdős–Rényi divergence of randomized maximum modulus.
//!
//! Everything here is built on psi(r) = ln mu(r) for the reference series
//! e^z. The slice region A_t pins r_1 = t and lets every other radius roam
//! the interval (psi^{-1}(psi(t)/2), psi^{-1}(2 psi(t))); a union of slices
//! over growing t carries logarithmic measure growing like
//! width^{p-1} * d ln t, and the experiments below measure both that growth
//! and the fraction of sampled points where the randomized modulus clears
//! mu * ln^{p/4-eps} mu.

use crate::mathutil::{ln_factorial, median, ols_fit, stream64, unit_f64, Kahan};
use crate::random::{CoefficientSystem, SystemKind};
use crate::series::{MultiPowerSeries, SeriesError};
use crate::torus::{max_modulus, TorusBudget, TorusError};

/// Log-thickness of each slice: r_1 runs over [t, t(1+eta)] when the slice
/// measure is accounted, matching the continuum integral d r_1 / r_1.
pub const SLICE_ETA: f64 = 0.05;

/// Points drawn per region when p >= 2 (p = 1 regions are single points).
const SAMPLES_PER_REGION: usize = 8;

/// Key for the deterministic region sampler; region geometry never depends
/// on the coefficient seed.
const REGION_SAMPLE_SEED: u64 = 0x7265_6769_6f6e_4173;

/// Comparison slack absorbing last-bit roundoff in hold checks.
const HOLD_SLACK: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum LevyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("psi inverse needs a finite t >= 0, got {t}")]
    NonBracketable { t: f64 },
    #[error("region needs psi(t) >= 2, got psi({t}) = {psi}")]
    PsiTooSmall { t: f64, psi: f64 },
    #[error("the theorem covers {expected} systems, got {got}")]
    TheoremScope { expected: &'static str, got: &'static str },
    #[error(
        "truncation inadequate: argmax coverage needs degrees kept through \
         N >= {required} but the series keeps {actual}"
    )]
    TruncationInadequate { required: u64, actual: u32 },
    #[error("eps must be positive and finite, got {eps}")]
    BadEpsilon { eps: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("radius list must be nonempty, finite, and strictly increasing")]
    BadRadiusList,
    #[error("ln mu must exceed 1 for the bound, got {mu_log} at r = {r}")]
    MuTooSmall { r: f64, mu_log: f64 },
}

/// psi(r) = ln mu(r) for e^z: the max of n ln r - ln n! over n, which peaks
/// at n = floor(r). Zero for r <= 1 and strictly increasing past it.
pub fn psi(r: f64) -> f64 {
    assert!(r > 0.0 && r.is_finite(), "psi needs finite r > 0, got {r}");
    let k = r.floor() as i64;
    let lr = r.ln();
    let mut best = 0.0f64; // the n = 0 term
    for n in (k - 1).max(1)..=(k + 1).max(1) {
        best = best.max(n as f64 * lr - ln_factorial(n as u64));
    }
    best
}

/// Inverse of psi on r >= 1 by bisection to 1e-9 relative width. psi is
/// flat at 0 on (0, 1], so psi_inverse(0) = 1 by the upper-end convention.
pub fn psi_inverse(t: f64) -> Result<f64, LevyError> {
    if !t.is_finite() || t < 0.0 {
        return Err(LevyError::NonBracketable { t });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let mut lo = 1.0f64;
    let mut hi = 1.5 * t + 3.0;
    while psi(hi) < t {
        hi *= 2.0;
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if psi(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Log-spaced table of (r, psi(r)), for diagnostics and CSV export.
#[derive(Clone, Debug)]
pub struct PsiTable {
    pub entries: Vec<(f64, f64)>,
}

impl PsiTable {
    pub fn build(r_lo: f64, r_hi: f64, count: usize) -> Self {
        assert!(r_lo > 0.0 && r_hi > r_lo && count >= 2);
        let (la, lb) = (r_lo.ln(), r_hi.ln());
        let entries = (0..count)
            .map(|i| {
                let r = (la + (lb - la) * i as f64 / (count - 1) as f64).exp();
                (r, psi(r))
            })
            .collect();
        Self { entries }
    }

    /// True when psi values strictly increase along the table.
    pub fn is_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

/// The slice region A_t: axis 1 pinned at t, every other axis free in
/// (t1, t2) with psi(t1) = psi(t)/2 and psi(t2) = 2 psi(t).
#[derive(Clone, Debug)]
pub struct RegionA {
    pub t: f64,
    pub p: usize,
    /// (t1, t2) for axes 2..p; None when p = 1 (the region is one point).
    pub bounds: Option<(f64, f64)>,
}

pub fn region_a(t: f64, p: usize) -> Result<RegionA, LevyError> {
    assert!(p >= 1, "dimension must be at least 1");
    let pt = psi(t);
    if pt < 2.0 {
        return Err(LevyError::PsiTooSmall { t, psi: pt });
    }
    let bounds = if p == 1 {
        None
    } else {
        Some((psi_inverse(pt / 2.0)?, psi_inverse(2.0 * pt)?))
    };
    Ok(RegionA { t, p, bounds })
}

impl RegionA {
    /// Per-axis log width of the free interval (0 when p = 1).
    pub fn log_width(&self) -> f64 {
        match self.bounds {
            Some((t1, t2)) => t2.ln() - t1.ln(),
            None => 0.0,
        }
    }

    /// Deterministic sample of points: axis 1 at t, the rest log-uniform in
    /// (t1, t2). The same seed always yields the same points.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        if self.p == 1 {
            return vec![vec![self.t]];
        }
        let (t1, t2) = self.bounds.expect("p >= 2 regions carry bounds");
        let (l1, l2) = (t1.ln(), t2.ln());
        (0..count)
            .map(|s| {
                let mut pt = Vec::with_capacity(self.p);
                pt.push(self.t);
                for axis in 1..self.p {
                    let u = unit_f64(stream64(seed, s as u64, axis as u64));
                    pt.push((l1 + u * (l2 - l1)).exp());
                }
                pt
            })
            .collect()
    }
}

/// Both sides of the product-vs-sum comparison at a tuple of psi values:
/// (prod psi_i, (sum psi_i)^p / (2^{p-1} (2p-1))).
///
/// The constant holds throughout A_t at p = 2 (the infimum of the ratio
/// over the region is 2/9 > 1/6) but genuinely fails for p >= 3, where
/// admissible tuples like (a, a/2, a/2) undershoot it.
pub fn product_sum_sides(psis: &[f64]) -> (f64, f64) {
    let p = psis.len();
    assert!(p >= 1);
    let c = 1.0 / (2f64.powi(p as i32 - 1) * (2.0 * p as f64 - 1.0));
    let prod: f64 = psis.iter().product();
    let sum: f64 = psis.iter().sum();
    (prod, c * sum.powi(p as i32))
}

/// One lower-bound check at one sampled point of one trial.
#[derive(Clone, Debug)]
pub struct HoldCheck {
    pub t: f64,
    pub radii: Vec<f64>,
    pub trial: usize,
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub holds: bool,
    /// Whether the doubled-budget retry was needed.
    pub retried: bool,
}

/// Accounted measure of one slice and the accumulated union up to it.
#[derive(Clone, Copy, Debug)]
pub struct RegionMeasure {
    pub t: f64,
    /// ln(1+eta) * width^{p-1}: the thickened slice alone.
    pub slice_log_measure: f64,
    /// Quadrature of width^{p-1} d ln tau from the first t to this one.
    pub accumulated: f64,
}

#[derive(Clone, Debug)]
pub struct LowerBoundResult {
    pub hold_fraction: f64,
    /// Slope of accumulated measure against ln t; NaN when only one t.
    pub region_log_measure_slope: f64,
    pub checks: Vec<HoldCheck>,
    pub measures: Vec<RegionMeasure>,
    /// Sampled points violating the product-vs-sum constant (expect 0 at p=2).
    pub product_sum_violations: usize,
    pub retries: usize,
}

/// Randomized lower-bound experiment over the union of slice regions.
///
/// For each trial and each sampled point r of each A_t, checks
/// ln M >= ln mu + (p/4 - eps) ln ln mu with the certified-lower-bound
/// estimator. A pass is sound as-is; a fail may be a budget artifact, so it
/// is retried once at the doubled budget before being counted.
///
/// Truncation gate: the maximal term argmax for exp_sum at radius r sits
/// near total degree sum r_i, so coverage demands degrees kept through
/// twice that plus a fixed cushion for the active window around it.
pub fn lower_bound_experiment(
    p: usize,
    eps: f64,
    t_values: &[f64],
    trials: usize,
    sys: CoefficientSystem,
    truncation: u32,
    budget: &TorusBudget,
) -> Result<LowerBoundResult, LevyError> {
    if sys.kind != SystemKind::Steinhaus {
        return Err(LevyError::TheoremScope {
            expected: "steinhaus",
            got: sys.kind.name(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LevyError::BadEpsilon { eps });
    }
    if trials == 0 {
        return Err(LevyError::NoTrials);
    }
    if t_values.is_empty()
        || t_values.iter().any(|t| !t.is_finite())
        || t_values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(LevyError::BadRadiusList);
    }

    let mut regions = Vec::with_capacity(t_values.len());
    let mut points: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
    for (ti, &t) in t_values.iter().enumerate() {
        let region = region_a(t, p)?;
        let sample_seed = stream64(REGION_SAMPLE_SEED, ti as u64, 0);
        points.push((ti, region.sample(SAMPLES_PER_REGION, sample_seed)));
        regions.push(region);
    }

    let max_degree_sum = points
        .iter()
        .flat_map(|(_, pts)| pts.iter())
        .map(|pt| pt.iter().sum::<f64>())
        .fold(0.0f64, f64::max);
    let required = (2.0 * max_degree_sum).ceil() as u64 + 64;
    if (truncation as u64) < required {
        return Err(LevyError::TruncationInadequate { required, actual: truncation });
    }

    let base = MultiPowerSeries::make_exp_sum(p, truncation);

    // mu and the bound are deterministic: the randomization leaves every
    // modulus untouched. Compute them once per point.
    let mut rhs_at: Vec<Vec<(f64, f64)>> = Vec::with_capacity(points.len());
    let mut product_sum_violations = 0usize;
    for (_, pts) in &points {
        let mut row = Vec::with_capacity(pts.len());
        for pt in pts {
            let (mu_log, _) = base.maximal_term_log(pt)?;
            if !(mu_log > 1.0) {
                return Err(LevyError::MuTooSmall { r: pt[0], mu_log });
            }
            row.push((mu_log, mu_log + (p as f64 / 4.0 - eps) * mu_log.ln()));
            let psis: Vec<f64> = pt.iter().map(|&r| psi(r)).collect();
            let (prod, floor) = product_sum_sides(&psis);
            if prod < floor * (1.0 - 1e-12) {
                product_sum_violations += 1;
            }
        }
        rhs_at.push(row);
    }

    let mut checks = Vec::with_capacity(trials * points.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut held = 0usize;
    let mut retries = 0usize;
    for trial in 0..trials {
        let g = sys.trial_system(trial as u64).randomize(&base);
        for (ti, pts) in &points {
            for (pi, pt) in pts.iter().enumerate() {
                let (_, rhs_log) = rhs_at[*ti][pi];
                let mut lhs_log = max_modulus(&g, pt, budget)?.log_value;
                let mut retried = false;
                if lhs_log < rhs_log - HOLD_SLACK {
                    retried = true;
                    retries += 1;
                    let doubled = budget.doubled();
                    lhs_log = lhs_log.max(max_modulus(&g, pt, &doubled)?.log_value);
                }
                let holds = lhs_log >= rhs_log - HOLD_SLACK;
                held += holds as usize;
                checks.push(HoldCheck {
                    t: t_values[*ti],
                    radii: pt.clone(),
                    trial,
                    lhs_log,
                    rhs_log,
                    holds,
                    retried,
                });
            }
        }
    }

    let measures = accumulate_measures(&regions, p)?;
    let slope = if t_values.len() >= 2 {
        let xs: Vec<f64> = t_values.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = measures.iter().map(|m| m.accumulated).collect();
        ols_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
    } else {
        f64::NAN
    };

    Ok(LowerBoundResult {
        hold_fraction: held as f64 / checks.len() as f64,
        region_log_measure_slope: slope,
        checks,
        measures,
        product_sum_violations,
        retries,
    })
}

/// Midpoint quadrature of width(tau)^{p-1} d ln tau between consecutive
/// t values, accumulated from the first.
fn accumulate_measures(regions: &[RegionA], p: usize) -> Result<Vec<RegionMeasure>, LevyError> {
    let mut out = Vec::with_capacity(regions.len());
    let mut acc = Kahan::default();
    for (i, region) in regions.iter().enumerate() {
        if i > 0 {
            let (a, b) = (regions[i - 1].t.ln(), region.t.ln());
            let steps = ((b - a) * 16.0).ceil().max(8.0) as usize;
            let h = (b - a) / steps as f64;
            for s in 0..steps {
                let tau = (a + (s as f64 + 0.5) * h).exp();
                let w = if p == 1 { 1.0 } else { region_a(tau, p)?.log_width() };
                acc.add(h * w.powi(p as i32 - 1));
            }
        }
        out.push(RegionMeasure {
            t: region.t,
            slice_log_measure: SLICE_ETA.ln_1p() * region.log_width().powi(p as i32 - 1),
            accumulated: acc.value(),
        });
    }
    Ok(out)
}

/// Ensemble medians of M / (mu ln^{1/4-eps} mu) for the single-variable
/// reference series, per radius. The divergence direction shows as the
/// medians increasing along growing radii.
pub fn erdos_renyi_ratio(
    r_values: &[f64],
    trials: usize,
    eps: f64,
    sys: CoefficientSystem,
    truncation: u32,
    budget: &TorusBudget,
) -> Result<Vec<(f64, f64)>, LevyError> {
    if !matches!(sys.kind, SystemKind::Steinhaus | SystemKind::AllPlusOne) {
        return Err(LevyError::TheoremScope {
            expected: "steinhaus (or the all-plus-one control)",
            got: sys.kind.name(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LevyError::BadEpsilon { eps });
    }
    if trials == 0 {
        return Err(LevyError::NoTrials);
    }
    if r_values.is_empty()
        || r_values.iter().any(|r| !r.is_finite())
        || r_values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(LevyError::BadRadiusList);
    }
    let max_r = *r_values.last().expect("nonempty");
    let required = (2.0 * max_r).ceil() as u64 + 64;
    if (truncation as u64) < required {
        return Err(LevyError::TruncationInadequate { required, actual: truncation });
    }

    let base = MultiPowerSeries::make_exp_sum(1, truncation);
    let mut denom = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let (mu_log, _) = base.maximal_term_log(&[r])?;
        if !(mu_log > 1.0) {
            return Err(LevyError::MuTooSmall { r, mu_log });
        }
        denom.push(mu_log + (0.25 - eps) * mu_log.ln());
    }

    let mut ratios: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); r_values.len()];
    for trial in 0..trials {
        let g = sys.trial_system(trial as u64).randomize(&base);
        for (ri, &r) in r_values.iter().enumerate() {
            let lhs = max_modulus(&g, &[r], budget)?.log_value;
            ratios[ri].push((lhs - denom[ri]).exp());
        }
    }
    Ok(r_values
        .iter()
        .zip(ratios.iter_mut())
        .map(|(&r, vals)| (r, median(vals)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn psi_matches_hand_values_and_stirling() {
        assert_eq!(psi(1.0), 0.0);
        assert!((psi(2.0) - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(psi(0.5), 0.0); // flat below 1
        // Stirling band on [50, 500].
        for i in 0..=40 {
            let r = (50f64.ln() + (500f64.ln() - 50f64.ln()) * i as f64 / 40.0).exp();
            let stirling = r - 0.5 * (2.0 * PI * r).ln();
            assert!(
                ((psi(r) - stirling) / psi(r)).abs() < 0.01,
                "r = {r}: psi = {}, stirling = {stirling}",
                psi(r)
            );
        }
    }

    #[test]
    fn psi_is_strictly_increasing_past_one() {
        let table = PsiTable::build(1.001, 1000.0, 400);
        assert!(table.is_strictly_increasing());
        assert_eq!(table.entries.len(), 400);
    }

    #[test]
    fn psi_inverse_round_trips_and_lands_in_the_band() {
        assert!((psi_inverse(psi(2.0)).unwrap() - 2.0).abs() < 1e-8);
        assert!((psi_inverse(0.0).unwrap() - 1.0).abs() < 1e-8);
        let v = psi_inverse(100.0).unwrap();
        assert!(v > 100.0 && v < 150.0, "psi_inverse(100) = {v}");
        for &t in &[20.0, 57.0, 333.0, 1000.0] {
            let v = psi_inverse(t).unwrap();
            assert!(v > t && v < 1.5 * t, "band broken at t = {t}: {v}");
        }
        // Identity on [1, 1000].
        for i in 0..=30 {
            let r = (1000f64.ln() * i as f64 / 30.0).exp().max(1.0);
            let back = psi_inverse(psi(r)).unwrap();
            assert!(
                ((back - r) / r).abs() < 1e-8 || psi(r) == 0.0,
                "round trip failed at r = {r}: {back}"
            );
        }
        assert!(matches!(psi_inverse(-1.0), Err(LevyError::NonBracketable { .. })));
        assert!(matches!(psi_inverse(f64::NAN), Err(LevyError::NonBracketable { .. })));
    }

    #[test]
    fn region_bounds_invert_psi_at_half_and_double() {
        let t = E.powi(4);
        let region = region_a(t, 2).unwrap();
        let (t1, t2) = region.bounds.unwrap();
        assert!(t1 < t && t < t2);
        let pt = psi(t);
        assert!(((psi(t1) - pt / 2.0) / pt).abs() < 1e-7);
        assert!(((psi(t2) - 2.0 * pt) / pt).abs() < 1e-7);

        let single = region_a(t, 1).unwrap();
        assert!(single.bounds.is_none());
        assert_eq!(single.sample(10, 99), vec![vec![t]]);
        assert_eq!(single.log_width(), 0.0);

        assert!(matches!(region_a(2.0, 2), Err(LevyError::PsiTooSmall { .. })));
    }

    #[test]
    fn region_sampling_is_deterministic_and_in_bounds() {
        let region = region_a(40.0, 3).unwrap();
        let a = region.sample(16, 7);
        let b = region.sample(16, 7);
        assert_eq!(a, b);
        let c = region.sample(16, 8);
        assert_ne!(a, c);
        let (t1, t2) = region.bounds.unwrap();
        for pt in &a {
            assert_eq!(pt.len(), 3);
            assert_eq!(pt[0], 40.0);
            for &r in &pt[1..] {
                assert!(r > t1 && r < t2);
            }
        }
    }

    #[test]
    fn product_sum_constant_holds_at_p2_and_fails_at_p3() {
        // p = 2: every sampled point of a real region clears 1/6.
        let t = psi_inverse(4.0).unwrap();
        let region = region_a(t, 2).unwrap();
        for pt in region.sample(100, 3) {
            let psis: Vec<f64> = pt.iter().map(|&r| psi(r)).collect();
            let (prod, floor) = product_sum_sides(&psis);
            assert!(prod >= floor, "violated at {pt:?}: {prod} < {floor}");
        }
        // p = 3: the admissible tuple (a, a/2, a/2) undershoots 1/20.
        let (prod, floor) = product_sum_sides(&[4.0, 2.0, 2.0]);
        assert!(prod < floor, "expected the p=3 gap: {prod} vs {floor}");
        assert!((prod - 16.0).abs() < 1e-12);
        assert!((floor - 512.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn experiment_rejects_out_of_scope_inputs() {
        let budget = TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 };
        let rad = CoefficientSystem::new(SystemKind::Rademacher, 1);
        assert!(matches!(
            lower_bound_experiment(1, 0.1, &[30.0], 2, rad, 128, &budget),
            Err(LevyError::TheoremScope { .. })
        ));
        let st = CoefficientSystem::new(SystemKind::Steinhaus, 1);
        assert!(matches!(
            lower_bound_experiment(1, -0.1, &[30.0], 2, st, 128, &budget),
            Err(LevyError::BadEpsilon { .. })
        ));
        assert!(matches!(
            lower_bound_experiment(1, 0.1, &[30.0], 0, st, 128, &budget),
            Err(LevyError::NoTrials)
        ));
        assert!(matches!(
            lower_bound_experiment(1, 0.1, &[30.0, 20.0], 2, st, 128, &budget),
            Err(LevyError::BadRadiusList)
        ));
        match lower_bound_experiment(1, 0.1, &[30.0], 2, st, 100, &budget) {
            Err(LevyError::TruncationInadequate { required: 124, actual: 100 }) => {}
            other => panic!("expected the coverage gate, got {other:?}"),
        }
    }

    #[test]
    fn trivialized_bound_holds_everywhere_at_p1() {
        // eps = 0.3 > p/4 makes the exponent negative: rhs < mu <= typical
        // grid maxima, so every check holds and no retry fires. At p = 1 the
        // accumulated measure is exactly ln t - ln t0, slope 1.
        let st = CoefficientSystem::new(SystemKind::Steinhaus, 0x5eed);
        let budget = TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 };
        let t_values = [E.powi(2), E.powi(3)];
        let res =
            lower_bound_experiment(1, 0.3, &t_values, 5, st, 128, &budget).unwrap();
        assert_eq!(res.hold_fraction, 1.0);
        assert_eq!(res.retries, 0);
        assert_eq!(res.checks.len(), 2 * 5);
        assert_eq!(res.product_sum_violations, 0);
        assert!((res.region_log_measure_slope - 1.0).abs() < 1e-6);
        assert!((res.measures.last().unwrap().accumulated - 1.0).abs() < 1e-9);
        assert_eq!(res.measures[0].accumulated, 0.0);
        // p = 1 slices have width^0 = 1: thickness alone.
        assert!((res.measures[0].slice_log_measure - SLICE_ETA.ln_1p()).abs() < 1e-15);
    }

    #[test]
    fn two_variable_experiment_holds_and_measures_grow() {
        let st = CoefficientSystem::new(SystemKind::Steinhaus, 0xabcd);
        let budget = TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 };
        let t_values = [E.powf(2.5), E.powf(2.75), E.powi(3)];
        let res =
            lower_bound_experiment(2, 0.15, &t_values, 3, st, 200, &budget).unwrap();
        assert!(res.hold_fraction >= 0.9, "hold_fraction = {}", res.hold_fraction);
        assert_eq!(res.product_sum_violations, 0);
        // Accumulated measure grows and its slope clears the ln(8/3)
        // floor comfortably at these widths.
        let acc: Vec<f64> = res.measures.iter().map(|m| m.accumulated).collect();
        assert!(acc[0] == 0.0 && acc[1] > 0.0 && acc[2] > acc[1]);
        assert!(
            res.region_log_measure_slope > (8.0f64 / 3.0).ln(),
            "slope = {}",
            res.region_log_measure_slope
        );
        // Reruns reproduce the identical check list.
        let again =
            lower_bound_experiment(2, 0.15, &t_values, 3, st, 200, &budget).unwrap();
        assert_eq!(res.hold_fraction, again.hold_fraction);
        for (x, y) in res.checks.iter().zip(&again.checks) {
            assert_eq!(x.lhs_log.to_bits(), y.lhs_log.to_bits());
            assert_eq!(x.holds, y.holds);
        }
    }

    #[test]
    fn ensemble_medians_increase_along_radii() {
        let st = CoefficientSystem::new(SystemKind::Steinhaus, 0x00e5);
        let budget = TorusBudget { grid_per_axis: 256, refine_steps: 1, sample_count: 0 };
        let radii = [E.powi(2), E.powi(3), E.powi(4), E.powi(5)];
        let meds = erdos_renyi_ratio(&radii, 51, 0.1, st, 400, &budget).unwrap();
        assert_eq!(meds.len(), 4);
        // Divergence shows over the last three radii.
        assert!(meds[2].1 > meds[1].1 && meds[3].1 > meds[2].1, "{meds:?}");
    }

    #[test]
    fn all_ones_control_matches_the_closed_form() {
        let ones = CoefficientSystem::new(SystemKind::AllPlusOne, 9);
        let budget = TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 };
        let radii = [E.powi(4), E.powi(5)];
        let meds = erdos_renyi_ratio(&radii, 3, 0.1, ones, 400, &budget).unwrap();
        for (r, ratio) in &meds {
            let mu_log = psi(*r);
            let closed = (2.0 * PI * r).sqrt().ln() - 0.15 * mu_log.ln();
            let rel = (ratio.ln() - closed) / closed;
            assert!(rel.abs() < 0.02, "r = {r}: ratio {ratio} vs closed form");
        }
        assert!(meds[1].1 > meds[0].1);

        let single = erdos_renyi_ratio(&[E.powi(3)], 3, 0.1, ones, 400, &budget).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn erdos_renyi_rejects_out_of_scope_systems() {
        let budget = TorusBudget::default();
        let ms = CoefficientSystem::new(SystemKind::ComplexMs, 1);
        assert!(matches!(
            erdos_renyi_ratio(&[50.0], 3, 0.1, ms, 400, &budget),
            Err(LevyError::TheoremScope { .. })
        ));
        let st = CoefficientSystem::new(SystemKind::Steinhaus, 1);
        assert!(matches!(
            erdos_renyi_ratio(&[500.0], 3, 0.1, st, 400, &budget),
            Err(LevyError::TruncationInadequate { .. })
        ));
        assert!(matches!(
            erdos_renyi_ratio(&[], 3, 0.1, st, 400, &budget),
            Err(LevyError::BadRadiusList)
        ));
    }
}
