//! Certified lower bounds for the maximum modulus on the distinguished torus
//! |z_i| = r_i.
//!
//! Every estimate is the max of exact evaluations of |f| at explicit angle
//! tuples, so it never exceeds the true supremum (and never exceeds the
//! modulus sum, up to last-bit roundoff). For p <= 2 the grid values come
//! from an FFT over coefficients folded modulo the grid size: folding is an
//! algebraic identity at grid angles, so even a sub-Nyquist grid yields true
//! point values, merely fewer of them. Refinement is golden-section
//! coordinate ascent around the best grid candidates and only ever adds
//! evaluated points.
//!
//! Budget monotonicity is structural, not statistical. Grid sizes snap to
//! powers of two and a run at grid m replays, bit for bit, the grid-and-
//! refine pass of every coarser power-of-two level down to 1 (a geometric
//! cost tail, under twice the top level alone). A larger grid therefore
//! reproduces every evaluation a smaller one made before adding its own,
//! and extra refine sweeps extend each candidate's best-ever sequence, so
//! growing either budget knob can never lose a value already found.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::mathutil::{next_pow2, stream64, unit_f64, Kahan};
use crate::random::CoefficientSystem;
use crate::series::{MultiPowerSeries, SeriesError};

/// Terms more than this far (in log weight) below the maximal term are
/// dropped from torus evaluation. The neglected mass is below
/// term_count * e^-60 ~ 1e-20 of the maximal term for any realistic table.
pub const ACTIVE_LOG_CUTOFF: f64 = -60.0;

/// Hard cap on total grid points, m^p. Past this the fold buffer stops
/// fitting in memory; callers should move to sampled mode instead.
const MAX_GRID_POINTS: usize = 1 << 22;

const GOLDEN_ITERS: usize = 28;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Internal key for the deterministic angle sampler used when p >= 3.
/// Fixed so that sampled estimates are reproducible and extending
/// sample_count only appends tuples, never reshuffles existing ones.
const SAMPLE_STREAM_SEED: u64 = 0x746f_7275_7361_6e67;

#[derive(Debug, thiserror::Error)]
pub enum TorusError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("grid of {points} points exceeds the {cap}-point cap; lower grid_per_axis")]
    GridTooLarge { points: u128, cap: usize },
    #[error("grid_per_axis must be at least 1")]
    EmptyBudget,
    #[error("at least {min} trials required for a meaningful quantile, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("degree {degree} below the admissible floor max(p, 4*pi) = {floor:.3}")]
    DegreeTooSmall { degree: u32, floor: f64 },
    #[error("beta must be positive and finite, got {beta}")]
    BadBeta { beta: f64 },
}

/// Work limits for torus maximization. `grid_per_axis` snaps up to a power
/// of two; `refine_steps` counts coordinate-ascent sweeps over all axes;
/// `sample_count` many pseudo-random start tuples are used when p >= 3
/// (where an m^p grid is out of the question).
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TorusBudget {
    pub grid_per_axis: usize,
    pub refine_steps: usize,
    pub sample_count: usize,
}

impl Default for TorusBudget {
    fn default() -> Self {
        Self { grid_per_axis: 256, refine_steps: 3, sample_count: 64 }
    }
}

impl TorusBudget {
    /// A budget whose grid is dense for `f`: at least 2*deg+1 points per
    /// axis, enough that the squared modulus is Nyquist-covered.
    pub fn dense_for(f: &MultiPowerSeries) -> Self {
        Self {
            grid_per_axis: 2 * f.max_total_degree() as usize + 1,
            ..Self::default()
        }
    }

    pub fn doubled(self) -> Self {
        Self {
            grid_per_axis: self.grid_per_axis.saturating_mul(2),
            refine_steps: self.refine_steps.saturating_mul(2).max(1),
            sample_count: self.sample_count.saturating_mul(2).max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Grid resolved the full coefficient spectrum (m >= 2 deg + 1).
    Dense,
    /// Sub-Nyquist grid or p >= 3 sampling; still a sound lower bound.
    Sampled,
}

#[derive(Clone, Debug)]
pub struct SupEstimate {
    /// ln of the best |f| value found: a certified lower bound of ln M_f(r).
    pub log_value: f64,
    /// Angles (radians) where the best value was attained.
    pub argmax_angles: Vec<f64>,
    pub mode: GridMode,
    /// Snapped grid size per axis (0 when p >= 3: no grid, samples only).
    pub grid_used: usize,
}

struct ActiveTerm {
    term: usize,
    /// |a_n| r^n / mu, in (0, 1].
    amp: f64,
    phase: f64,
}

/// |f(r e^{i theta})| / mu over the active terms.
fn eval_active(f: &MultiPowerSeries, active: &[ActiveTerm], theta: &[f64]) -> f64 {
    let p = theta.len();
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for a in active {
        let idx = f.index(a.term);
        let mut ang = a.phase;
        for j in 0..p {
            ang += idx[j] as f64 * theta[j];
        }
        let (s, c) = ang.sin_cos();
        re += a.amp * c;
        im += a.amp * s;
    }
    re.hypot(im)
}

/// Golden-section maximization of `g` on [lo, hi], returning the best point
/// ever evaluated (soundness does not rest on unimodality).
fn golden_max(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let (mut bx, mut bf) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2);
        }
        if f1 > bf {
            bx = x1;
            bf = f1;
        }
        if f2 > bf {
            bx = x2;
            bf = f2;
        }
    }
    (bx, bf)
}

/// One coordinate-ascent pass over all axes; mutates `theta` toward better
/// points, never past one. Returns the best value seen.
fn ascend(
    f: &MultiPowerSeries,
    active: &[ActiveTerm],
    theta: &mut [f64],
    best: f64,
    half_width: f64,
) -> f64 {
    let mut best = best;
    let p = theta.len();
    let mut probe = theta.to_vec();
    for axis in 0..p {
        let center = theta[axis];
        let (x, v) = golden_max(
            |x| {
                probe.copy_from_slice(theta);
                probe[axis] = x;
                eval_active(f, active, &probe)
            },
            center - half_width,
            center + half_width,
        );
        if v > best {
            best = v;
            theta[axis] = x;
        }
    }
    best
}

fn collect_active(
    f: &MultiPowerSeries,
    u: &[f64],
) -> (f64, Vec<ActiveTerm>) {
    let mut mu_log = f64::NEG_INFINITY;
    f.for_each_log_weight(u, |_, w| mu_log = mu_log.max(w));
    let mut active = Vec::new();
    f.for_each_log_weight(u, |i, w| {
        let rel = w - mu_log;
        if rel >= ACTIVE_LOG_CUTOFF {
            active.push(ActiveTerm { term: i, amp: rel.exp(), phase: f.phase(i) });
        }
    });
    (mu_log, active)
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> =
        std::cell::RefCell::new(FftPlanner::new());
}

fn inverse_fft(buf: &mut [Complex64], m: usize) {
    PLANNER.with(|pl| {
        let fft = pl.borrow_mut().plan_fft_inverse(m);
        for chunk in buf.chunks_exact_mut(m) {
            fft.process(chunk);
        }
    });
}

fn transpose_square(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Grid pass for p <= 2: fold active coefficients modulo m per axis, inverse
/// FFT, return the best grid tuple. Values are exact evaluations of the
/// active part of f at the grid angles.
fn grid_best(
    f: &MultiPowerSeries,
    active: &[ActiveTerm],
    m: usize,
    keep: usize,
) -> Vec<(Vec<usize>, f64)> {
    let p = f.variables();
    match p {
        1 => {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for a in active {
                let n = f.index(a.term)[0] as usize % m;
                buf[n] += Complex64::from_polar(a.amp, a.phase);
            }
            inverse_fft(&mut buf, m);
            top_candidates(&buf, m, 1, keep)
        }
        2 => {
            let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
            for a in active {
                let idx = f.index(a.term);
                let j1 = idx[0] as usize % m;
                let j2 = idx[1] as usize % m;
                buf[j1 * m + j2] += Complex64::from_polar(a.amp, a.phase);
            }
            // Rows transform the second axis; transpose, rows again for the
            // first axis. Entry (k2, k1) then holds F(theta_1(k1), theta_2(k2)).
            inverse_fft(&mut buf, m);
            transpose_square(&mut buf, m);
            inverse_fft(&mut buf, m);
            let mut cands = top_candidates(&buf, m, 2, keep);
            for (pos, _) in &mut cands {
                pos.swap(0, 1); // stored as (k2, k1); report (k1, k2)
            }
            cands
        }
        _ => unreachable!("grid path is only taken for p <= 2"),
    }
}

/// Pick up to `keep` locally distinct top grid points (pairwise separated by
/// more than one cell in some axis), best first.
fn top_candidates(
    buf: &[Complex64],
    m: usize,
    p: usize,
    keep: usize,
) -> Vec<(Vec<usize>, f64)> {
    let mut order: Vec<usize> = (0..buf.len()).collect();
    // Full sort would be wasteful; select the top slice only.
    let take = (keep * 16).min(buf.len());
    order.select_nth_unstable_by(take.saturating_sub(1), |&a, &b| {
        buf[b].norm_sqr().total_cmp(&buf[a].norm_sqr())
    });
    order.truncate(take);
    order.sort_by(|&a, &b| buf[b].norm_sqr().total_cmp(&buf[a].norm_sqr()));
    let decode = |pos: usize| -> Vec<usize> {
        match p {
            1 => vec![pos],
            _ => vec![pos / m, pos % m],
        }
    };
    let mut picked: Vec<(Vec<usize>, f64)> = Vec::with_capacity(keep);
    'outer: for &pos in &order {
        let cell = decode(pos);
        for (other, _) in &picked {
            let near = cell.iter().zip(other).all(|(&a, &b)| {
                let d = a.abs_diff(b);
                d.min(m - d) <= 1
            });
            if near {
                continue 'outer;
            }
        }
        picked.push((cell, buf[pos].norm()));
        if picked.len() == keep {
            break;
        }
    }
    picked
}

/// Certified lower bound for ln max |f| on the torus of polyradius r.
pub fn max_modulus(
    f: &MultiPowerSeries,
    r: &[f64],
    budget: &TorusBudget,
) -> Result<SupEstimate, TorusError> {
    if budget.grid_per_axis == 0 {
        return Err(TorusError::EmptyBudget);
    }
    let u = f.log_radii(r)?;
    if f.term_count() == 0 {
        return Err(TorusError::Series(SeriesError::ZeroSeries));
    }
    let (mu_log, active) = collect_active(f, &u);
    let p = f.variables();
    let deg = f.max_total_degree() as usize;

    if p <= 2 {
        let m = next_pow2(budget.grid_per_axis);
        let points = (m as u128).pow(p as u32);
        if points > MAX_GRID_POINTS as u128 {
            return Err(TorusError::GridTooLarge { points, cap: MAX_GRID_POINTS });
        }
        let mode = if m >= 2 * deg + 1 { GridMode::Dense } else { GridMode::Sampled };
        let mut best_val = f64::NEG_INFINITY;
        let mut best_theta = vec![0.0; p];
        // Cascade over every power-of-two level from m down to 1. Each
        // level's pass depends only on (f, r, level, refine_steps), so a run
        // at 2m replays this run's levels identically before its own top
        // level: the estimate is monotone in the budget by construction.
        // The finest level runs first, so on exact ties the reported argmax
        // comes from the requested grid.
        let mut level = m;
        loop {
            let step = 2.0 * PI / level as f64;
            let cands = grid_best(f, &active, level, 3);
            for (cell, grid_val) in cands {
                let mut theta: Vec<f64> =
                    cell.iter().map(|&k| k as f64 * step).collect();
                let mut val = grid_val;
                for _ in 0..budget.refine_steps {
                    val = ascend(f, &active, &mut theta, val, step);
                }
                if val > best_val {
                    best_val = val;
                    best_theta = theta;
                }
            }
            if level == 1 {
                break;
            }
            level /= 2;
        }
        Ok(SupEstimate {
            log_value: mu_log + best_val.ln(),
            argmax_angles: best_theta,
            mode,
            grid_used: m,
        })
    } else {
        // No grid: the all-zero tuple, pseudo-random tuples, then ascent on
        // the best two starts with per-sweep shrinking brackets.
        let zero = vec![0.0; p];
        let mut starts: Vec<(Vec<f64>, f64)> =
            vec![(zero.clone(), eval_active(f, &active, &zero))];
        for t in 0..budget.sample_count {
            let theta: Vec<f64> = (0..p)
                .map(|j| {
                    2.0 * PI
                        * unit_f64(stream64(SAMPLE_STREAM_SEED, t as u64, j as u64))
                })
                .collect();
            let v = eval_active(f, &active, &theta);
            starts.push((theta, v));
        }
        starts.sort_by(|a, b| b.1.total_cmp(&a.1));
        starts.truncate(2);
        let mut best_val = starts[0].1;
        let mut best_theta = starts[0].0.clone();
        for (mut theta, v0) in starts {
            let mut val = v0;
            for sweep in 0..budget.refine_steps {
                let hw = PI / 2f64.powi(sweep as i32 + 1);
                val = ascend(f, &active, &mut theta, val, hw);
            }
            if val > best_val {
                best_val = val;
                best_theta = theta;
            }
        }
        Ok(SupEstimate {
            log_value: mu_log + best_val.ln(),
            argmax_angles: best_theta,
            mode: GridMode::Sampled,
            grid_used: 0,
        })
    }
}

/// ln S(r) where S^2 = Σ |a_n|^2 r^{2n}: the Parseval 2-norm of f on the
/// torus. Zero series gives -inf (the norm of the zero function).
pub fn s_norm_log(f: &MultiPowerSeries, r: &[f64]) -> Result<f64, SeriesError> {
    let u = f.log_radii(r)?;
    let mut m = f64::NEG_INFINITY;
    f.for_each_log_weight(&u, |_, w| m = m.max(w));
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let mut acc = Kahan::default();
    f.for_each_log_weight(&u, |_, w| acc.add((2.0 * (w - m)).exp()));
    Ok(m + 0.5 * acc.value().ln())
}

#[derive(Clone, Copy, Debug)]
pub struct McTrial {
    pub w_log: f64,
    pub s_log: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct McTailResult {
    pub trials: Vec<McTrial>,
    /// Empirical (1 - 1/N^beta)-quantile of W/(S sqrt(ln N)).
    pub quantile_ratio: f64,
    /// Fraction of trials with ratio strictly above the threshold.
    pub exceed_fraction: f64,
    /// The threshold used: caller-supplied, or the fitted quantile.
    pub threshold: f64,
}

/// Monte Carlo for the randomized sup/2-norm ratio on unit-coefficient
/// polynomials of total degree <= N at r = 1. Each trial randomizes with a
/// fresh sub-seed and measures W = max_modulus on a dense grid, normalized
/// by S * sqrt(ln N).
pub fn tail_probability_mc(
    degree: u32,
    p: usize,
    beta: f64,
    trials: usize,
    sys: CoefficientSystem,
    threshold: Option<f64>,
    budget: &TorusBudget,
) -> Result<McTailResult, TorusError> {
    let floor = (p as f64).max(4.0 * PI);
    if (degree as f64) < floor {
        return Err(TorusError::DegreeTooSmall { degree, floor });
    }
    if trials < 50 {
        return Err(TorusError::TooFewTrials { min: 50, got: trials });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(TorusError::BadBeta { beta });
    }
    let base = unit_polynomial(p, degree);
    let r = vec![1.0; p];
    let s_log = s_norm_log(&base, &r).map_err(TorusError::Series)?;
    let dense = TorusBudget {
        grid_per_axis: budget.grid_per_axis.max(2 * degree as usize + 1),
        ..*budget
    };
    let norm = (degree as f64).ln().sqrt();
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let g = sys.trial_system(t as u64).randomize(&base);
        let est = max_modulus(&g, &r, &dense)?;
        let ratio = (est.log_value - s_log).exp() / norm;
        rows.push(McTrial { w_log: est.log_value, s_log, ratio });
    }
    let mut sorted: Vec<f64> = rows.iter().map(|t| t.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let q = 1.0 - (degree as f64).powf(-beta);
    let quantile_ratio = crate::mathutil::quantile_nearest_rank(&sorted, q);
    let a = threshold.unwrap_or(quantile_ratio);
    let exceed = rows.iter().filter(|t| t.ratio > a).count() as f64 / trials as f64;
    Ok(McTailResult {
        trials: rows,
        quantile_ratio,
        exceed_fraction: exceed,
        threshold: a,
    })
}

/// All coefficients 1 on every multi-index of total degree <= N.
pub fn unit_polynomial(p: usize, degree: u32) -> MultiPowerSeries {
    let count = crate::mathutil::binomial(degree as u64 + p as u64, p as u64);
    assert!(count <= 50_000_000, "unit polynomial would hold {count} terms");
    let mut terms = Vec::with_capacity(count as usize);
    let mut buf = vec![0u32; p];
    for order in 0..=degree {
        compositions_of(&mut buf, 0, order, &mut |c: &[u32]| {
            terms.push((c.to_vec(), 0.0, 0.0));
        });
    }
    MultiPowerSeries::from_terms(p, degree, terms).expect("unit polynomial is valid")
}

fn compositions_of(buf: &mut [u32], axis: usize, rem: u32, f: &mut impl FnMut(&[u32])) {
    if axis == buf.len() - 1 {
        buf[axis] = rem;
        f(buf);
        return;
    }
    for v in 0..=rem {
        buf[axis] = v;
        compositions_of(buf, axis + 1, rem - v, f);
    }
}

/// Degenerate-system sanity value: with all multipliers +1 the polynomial is
/// nonnegative, W = term count exactly, so the ratio is known in closed form.
pub fn all_ones_ratio(degree: u32, p: usize) -> f64 {
    let count = crate::mathutil::binomial(degree as u64 + p as u64, p as u64) as f64;
    count / count.sqrt() / (degree as f64).ln().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::SystemKind;
    use proptest::prelude::*;

    fn series(p: usize, n: u32, terms: Vec<(Vec<u32>, f64, f64)>) -> MultiPowerSeries {
        MultiPowerSeries::from_terms(p, n, terms).unwrap()
    }

    #[test]
    fn monomial_is_exact_at_any_budget() {
        let f = series(1, 7, vec![(vec![5], 2.0, 1.1)]);
        for grid in [4usize, 64, 1024] {
            let budget = TorusBudget { grid_per_axis: grid, refine_steps: 2, sample_count: 4 };
            let est = max_modulus(&f, &[3.0], &budget).unwrap();
            let expect = 2.0 + 5.0 * 3f64.ln();
            assert!((est.log_value - expect).abs() < 1e-12, "grid {grid}");
        }
    }

    #[test]
    fn nonnegative_series_attains_modulus_sum_at_zero_angle() {
        let f = MultiPowerSeries::make_exp_sum(2, 20);
        let r = [1.5, 2.0];
        let est = max_modulus(&f, &r, &TorusBudget::default()).unwrap();
        let sum = f.sum_modulus_log(&r).unwrap();
        assert!((est.log_value - sum).abs() < 1e-12);
        // Refinement may wander within float noise of the flat summit.
        for a in est.argmax_angles {
            assert!(a.abs() < 1e-6, "angle {a}");
        }
    }

    #[test]
    fn one_minus_z_peaks_at_pi() {
        let f = series(1, 1, vec![(vec![0], 0.0, 0.0), (vec![1], 0.0, PI)]);
        // f = 1 - z as 1 + e^{i pi} z; at r=1 the max is 2 at angle pi.
        let est = max_modulus(&f, &[1.0], &TorusBudget::default()).unwrap();
        assert!((est.log_value - 2f64.ln()).abs() < 1e-6);
        assert!((est.argmax_angles[0] - PI).abs() < 1e-6);
        assert_eq!(est.mode, GridMode::Dense);
    }

    #[test]
    fn two_variable_phase_alignment_is_found() {
        // 1 - z1 z2^2: |f| = 2 exactly when theta_1 + 2 theta_2 = pi (mod 2pi).
        let f = series(
            2,
            3,
            vec![(vec![0, 0], 0.0, 0.0), (vec![1, 2], 0.0, PI)],
        );
        let est = max_modulus(&f, &[1.0, 1.0], &TorusBudget::default()).unwrap();
        assert!((est.log_value - 2f64.ln()).abs() < 1e-9);
        let [t1, t2] = [est.argmax_angles[0], est.argmax_angles[1]];
        let phase = (t1 + 2.0 * t2 - PI).rem_euclid(2.0 * PI);
        let dist = phase.min(2.0 * PI - phase);
        assert!(dist < 1e-4, "phase alignment off by {dist}");
    }

    #[test]
    fn sampled_mode_is_reported_below_nyquist() {
        let f = series(1, 40, vec![(vec![0], 0.0, 0.0), (vec![40], 0.0, 0.3)]);
        let budget = TorusBudget { grid_per_axis: 16, refine_steps: 0, sample_count: 0 };
        let est = max_modulus(&f, &[1.0], &budget).unwrap();
        assert_eq!(est.mode, GridMode::Sampled);
        // Still a sound bound.
        assert!(est.log_value <= f.sum_modulus_log(&[1.0]).unwrap() + 1e-12);
    }

    #[test]
    fn grid_snapping_gives_identical_results() {
        let f = series(
            1,
            9,
            vec![
                (vec![0], 0.0, 0.1),
                (vec![3], -0.2, 2.0),
                (vec![9], -0.4, -1.3),
            ],
        );
        let a = max_modulus(
            &f,
            &[1.1],
            &TorusBudget { grid_per_axis: 100, refine_steps: 2, sample_count: 0 },
        )
        .unwrap();
        let b = max_modulus(
            &f,
            &[1.1],
            &TorusBudget { grid_per_axis: 128, refine_steps: 2, sample_count: 0 },
        )
        .unwrap();
        assert_eq!(a.log_value, b.log_value);
        assert_eq!(a.grid_used, 128);
    }

    #[test]
    fn three_variable_sampling_includes_zero_tuple() {
        let f = MultiPowerSeries::make_exp_sum(3, 10);
        let r = [1.0, 1.2, 0.8];
        let est = max_modulus(&f, &r, &TorusBudget::default()).unwrap();
        let sum = f.sum_modulus_log(&r).unwrap();
        // Nonnegative series: zero tuple attains the modulus sum.
        assert!((est.log_value - sum).abs() < 1e-12);
        assert_eq!(est.mode, GridMode::Sampled);
        assert_eq!(est.grid_used, 0);
    }

    #[test]
    fn zero_series_and_budget_errors() {
        let zero = MultiPowerSeries::from_terms(1, 3, vec![]).unwrap();
        assert!(matches!(
            max_modulus(&zero, &[1.0], &TorusBudget::default()),
            Err(TorusError::Series(SeriesError::ZeroSeries))
        ));
        let f = series(1, 1, vec![(vec![0], 0.0, 0.0)]);
        assert!(matches!(
            max_modulus(
                &f,
                &[1.0],
                &TorusBudget { grid_per_axis: 0, refine_steps: 0, sample_count: 0 }
            ),
            Err(TorusError::EmptyBudget)
        ));
        let g = MultiPowerSeries::make_exp_sum(2, 4);
        assert!(matches!(
            max_modulus(
                &g,
                &[1.0, 1.0],
                &TorusBudget { grid_per_axis: 1 << 13, refine_steps: 0, sample_count: 0 }
            ),
            Err(TorusError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn s_norm_examples() {
        // Unit coefficients 0..=24 at r=1: S = sqrt(25) = 5.
        let f = unit_polynomial(1, 24);
        assert!((s_norm_log(&f, &[1.0]).unwrap() - 5f64.ln()).abs() < 1e-12);

        // Single term: S = mu exactly.
        let m = series(2, 4, vec![(vec![1, 2], 0.7, 0.3)]);
        let r = [1.4, 0.9];
        assert_eq!(
            s_norm_log(&m, &r).unwrap(),
            m.maximal_term_log(&r).unwrap().0
        );

        // exp_sum(1,50) at 2.5 against mpmath (50 digits): 1.6523408879112667.
        let g = MultiPowerSeries::make_exp_sum(1, 50);
        assert!((s_norm_log(&g, &[2.5]).unwrap() - 1.6523408879112667).abs() < 1e-10);

        let zero = MultiPowerSeries::from_terms(1, 3, vec![]).unwrap();
        assert_eq!(s_norm_log(&zero, &[1.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn mc_tail_control_system_is_deterministic() {
        let sys = CoefficientSystem::new(SystemKind::AllPlusOne, 9);
        let res = tail_probability_mc(64, 1, 1.0, 60, sys, None, &TorusBudget::default())
            .unwrap();
        // All multipliers +1: W = 65 every trial, S = sqrt(65).
        // mpmath: sqrt(65)/sqrt(ln 64) = 3.9533778312092943.
        let expect = 3.9533778312092943;
        assert!((res.quantile_ratio - expect).abs() < 1e-10);
        assert_eq!(res.exceed_fraction, 0.0);
        for t in &res.trials {
            assert!((t.ratio - expect).abs() < 1e-10);
        }
        assert_eq!(all_ones_ratio(64, 1), 65f64 / 65f64.sqrt() / 64f64.ln().sqrt());
    }

    #[test]
    fn mc_tail_parameter_errors() {
        let sys = CoefficientSystem::new(SystemKind::Steinhaus, 9);
        assert!(matches!(
            tail_probability_mc(12, 1, 1.0, 60, sys, None, &TorusBudget::default()),
            Err(TorusError::DegreeTooSmall { .. })
        ));
        assert!(matches!(
            tail_probability_mc(64, 1, 1.0, 49, sys, None, &TorusBudget::default()),
            Err(TorusError::TooFewTrials { .. })
        ));
        assert!(matches!(
            tail_probability_mc(64, 1, 0.0, 60, sys, None, &TorusBudget::default()),
            Err(TorusError::BadBeta { .. })
        ));
    }

    #[test]
    fn mc_tail_threshold_override() {
        let sys = CoefficientSystem::new(SystemKind::AllPlusOne, 9);
        let res =
            tail_probability_mc(64, 1, 1.0, 60, sys, Some(1.0), &TorusBudget::default())
                .unwrap();
        assert_eq!(res.exceed_fraction, 1.0);
        assert_eq!(res.threshold, 1.0);
    }

    prop_compose! {
        fn trinomial()(
            degrees in proptest::collection::btree_set(0u32..=40, 3),
            mods in proptest::collection::vec(-1.0f64..1.0, 3),
            phases in proptest::collection::vec(-3.1f64..3.1, 3),
            r in 0.5f64..2.0,
        ) -> (MultiPowerSeries, f64) {
            let terms: Vec<_> = degrees
                .into_iter()
                .zip(mods)
                .zip(phases)
                .map(|((d, m), ph)| (vec![d], m, ph))
                .collect();
            (MultiPowerSeries::from_terms(1, 40, terms).unwrap(), r)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_estimate_is_sound_and_budget_monotone((f, r) in trinomial()) {
            let sum = f.sum_modulus_log(&[r]).unwrap();
            // The level cascade makes monotonicity exact: raising either
            // knob must never lose a single bit, with no noise allowance.
            let grids = [128usize, 256, 512]; // dense: Nyquist for deg 40 is 81
            let refines = [0usize, 1, 3];
            let mut est = [[0.0f64; 3]; 3];
            for (gi, &grid) in grids.iter().enumerate() {
                for (ri, &refine) in refines.iter().enumerate() {
                    let e = max_modulus(
                        &f,
                        &[r],
                        &TorusBudget { grid_per_axis: grid, refine_steps: refine, sample_count: 0 },
                    ).unwrap().log_value;
                    prop_assert!(e <= sum + 1e-12);
                    est[gi][ri] = e;
                }
            }
            for gi in 0..3 {
                for ri in 0..3 {
                    if gi > 0 {
                        prop_assert!(
                            est[gi][ri] >= est[gi - 1][ri],
                            "grid step lost value: {} -> {} at grid {}, refine {}",
                            est[gi - 1][ri], est[gi][ri], grids[gi], refines[ri]
                        );
                    }
                    if ri > 0 {
                        prop_assert!(
                            est[gi][ri] >= est[gi][ri - 1],
                            "refine step lost value: {} -> {} at grid {}, refine {}",
                            est[gi][ri - 1], est[gi][ri], grids[gi], refines[ri]
                        );
                    }
                }
            }
            // Converged refinement should match a brute-force fine grid.
            // The brute run's cascade replays the refined run's levels, so
            // one direction is exact; the other says a dense grid plus
            // ascent already found the same summit.
            let brute = max_modulus(
                &f,
                &[r],
                &TorusBudget { grid_per_axis: 1 << 14, refine_steps: 3, sample_count: 0 },
            ).unwrap();
            let refined = max_modulus(
                &f,
                &[r],
                &TorusBudget { grid_per_axis: 512, refine_steps: 3, sample_count: 0 },
            ).unwrap();
            prop_assert!(brute.log_value >= refined.log_value);
            prop_assert!(refined.log_value >= brute.log_value - 1e-6);
        }

        #[test]
        fn prop_maximal_term_below_estimate((f, r) in trinomial()) {
            let mu = f.maximal_term_log(&[r]).unwrap().0;
            let est = max_modulus(
                &f,
                &[r],
                &TorusBudget { grid_per_axis: 512, refine_steps: 3, sample_count: 0 },
            ).unwrap();
            // Cauchy: mu <= M; the converged dense estimate approximates M
            // from below, so allow refinement slack only.
            prop_assert!(mu <= est.log_value + 1e-6);
        }

        #[test]
        fn prop_phase_rotation_keeps_converged_value((f, r) in trinomial(), rot in 0.1f64..3.0) {
            // Coherent rotation a_n -> e^{i n rot} a_n is f(z e^{i rot}):
            // a torus change of variable, so the converged maximum is
            // unchanged while argmax angles shift. (Rotating a single
            // coefficient alone genuinely changes the maximum: 1 + z + z^2
            // has M=3 but 1 + iz + z^2 has M=sqrt(5).)
            let rotated = {
                let terms: Vec<_> = (0..f.term_count())
                    .map(|i| {
                        let n = f.index(i)[0];
                        (vec![n], f.log_modulus(i), f.phase(i) + n as f64 * rot)
                    })
                    .collect();
                MultiPowerSeries::from_terms(1, 40, terms).unwrap()
            };
            let budget = TorusBudget { grid_per_axis: 1024, refine_steps: 3, sample_count: 0 };
            let a = max_modulus(&f, &[r], &budget).unwrap();
            let b = max_modulus(&rotated, &[r], &budget).unwrap();
            prop_assert!((a.log_value - b.log_value).abs() < 1e-7);
        }
    }

    #[test]
    fn s_norm_squared_between_mu_and_mu_times_sum() {
        let f = MultiPowerSeries::make_exp_sum(2, 30);
        for r in [[0.5, 0.5], [1.0, 2.0], [3.0, 1.5]] {
            let mu = f.maximal_term_log(&r).unwrap().0;
            let sum = f.sum_modulus_log(&r).unwrap();
            let s = s_norm_log(&f, &r).unwrap();
            assert!(mu <= s + 1e-12);
            assert!(2.0 * s <= mu + sum + 1e-12);
        }
    }
}
