//! Shared numeric kernels: compensated summation, log-sum-exp, factorial
//! tables, least squares, order statistics, graded-lexicographic ranks, and
//! the counter-based bit streams every randomized experiment draws from.

use std::sync::OnceLock;

/// Kahan–Neumaier compensated accumulator. Long cumulative sums (factorial
/// tables with ~1e6 entries) drift by ~1e-1 absolute in plain f64; this keeps
/// every prefix near machine precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// ln(Σ exp(x_i)) without overflow. Empty input is an empty sum: -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = Kahan::default();
    for &v in values {
        acc.add((v - m).exp());
    }
    m + acc.value().ln()
}

/// Cumulative table of ln(n!) for n in 0..=n_max, compensated.
pub fn ln_factorial_table(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = Kahan::default();
    out.push(0.0);
    for n in 1..=n_max {
        acc.add((n as f64).ln());
        out.push(acc.value());
    }
    out
}

const LN_FACT_TABLE_N: usize = 4096;

static LN_FACT: OnceLock<Vec<f64>> = OnceLock::new();

/// ln(n!) for arbitrary n: exact cumulative table below 4096, Stirling with
/// three correction terms above (relative error < 1e-25 there).
pub fn ln_factorial(n: u64) -> f64 {
    let table = LN_FACT.get_or_init(|| ln_factorial_table(LN_FACT_TABLE_N));
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x * x)
        + 1.0 / (1260.0 * x.powi(5))
}

#[derive(Clone, Copy, Debug)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares y = slope*x + intercept. None when the x variance
/// is degenerate (no line is identified). A constant y gives r2 = 1: the fit
/// is exact.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Option<OlsFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    // Degeneracy scaled to the data's own magnitude.
    let scale = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    if sxx <= nf * (1e-12 * scale) * (1e-12 * scale) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut sst = 0.0;
    let mut ssr = 0.0;
    for i in 0..n {
        sst += (ys[i] - ybar) * (ys[i] - ybar);
        let resid = ys[i] - (intercept + slope * xs[i]);
        ssr += resid * resid;
    }
    let r2 = if sst == 0.0 { 1.0 } else { 1.0 - ssr / sst };
    Some(OlsFit { slope, intercept, r2 })
}

/// Median; sorts its input.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `count` points spaced evenly in log scale over [lo, hi], endpoints
/// included. A single point lands on lo.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1, "log_spaced({lo}, {hi}, {count})");
    if count == 1 {
        return vec![lo];
    }
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Nearest-rank quantile on a sorted slice: the ceil(q*n)-th order statistic,
/// clamped to [1, n].
pub fn quantile_nearest_rank(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// 64-bit finalizer (splitmix64's avalanche). Full-period bijection on u64.
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Counter-based stream: one u64 word addressed by (seed, a, b). Two mixing
/// rounds decorrelate the linear key structure; identical keys always yield
/// identical words, on any platform, in any evaluation order.
pub fn stream64(seed: u64, a: u64, b: u64) -> u64 {
    let x = mix64(seed ^ a.wrapping_mul(0x9e3779b97f4a7c15));
    mix64(x ^ b.wrapping_mul(0xd1b54a32d192ed03))
}

/// Uniform in [0, 1) from the top 53 bits.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exact binomial coefficient in u128 (multiplicative form; every
/// intermediate division is exact).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc
}

/// Rank of a multi-index in the graded-lexicographic enumeration (ascending
/// total order, ascending lex within a shell). This is the canonical index
/// encoding random multipliers are keyed on, so draws are reproducible
/// independently of storage or evaluation order.
pub fn graded_lex_rank(idx: &[u32]) -> u64 {
    let p = idx.len() as u64;
    debug_assert!(p >= 1);
    if p == 1 {
        return idx[0] as u64;
    }
    let order: u64 = idx.iter().map(|&v| v as u64).sum();
    // Count of all indices with strictly smaller total order.
    let mut rank: u128 = if order == 0 { 0 } else { binomial(order - 1 + p, p) };
    // Lex position within the shell of this total order.
    let mut rem = order;
    for (j, &nj) in idx.iter().enumerate() {
        let parts_after = p - 1 - j as u64; // free positions right of j
        for v in 0..nj as u64 {
            let m = rem - v;
            rank += if parts_after == 0 {
                u128::from(m == 0)
            } else {
                binomial(m + parts_after - 1, parts_after - 1)
            };
        }
        rem -= nj as u64;
    }
    u64::try_from(rank).expect("graded-lex rank exceeds u64")
}

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
