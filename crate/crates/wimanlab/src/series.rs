//! Power series in several variables with coefficients held in log-modulus /
//! phase form.
//!
//! A series is a finite table of terms `a_n z^n` over multi-indices
//! `n = (n_1, ..., n_p)` with `|n| = n_1 + ... + n_p <= truncation`. Zero
//! coefficients are never stored; absence means zero. Moduli live in the log
//! domain so quantities like `exp(900)` stay representable, and every radial
//! evaluation works on `ln|a_n| + <n, ln r>` directly.
//!
//! Storage is struct-of-arrays sorted in graded-lexicographic order (total
//! degree ascending, lexicographic within a degree), the same enumeration the
//! random multiplier streams are keyed on.

use std::io::{self, BufRead, Write};

use crate::mathutil::{graded_lex_rank, ln_factorial_table, Kahan};

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("dimension mismatch: series has {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {idx:?} has total degree {order}, above the truncation {truncation}")]
    TruncationExceeded { idx: Vec<u32>, order: u32, truncation: u32 },
    #[error("duplicate multi-index {idx:?}")]
    DuplicateIndex { idx: Vec<u32> },
    #[error("non-finite coefficient data at index {idx:?}")]
    NonfiniteCoefficient { idx: Vec<u32> },
    #[error("radius must be finite and positive, got {value} on axis {axis}")]
    RadiusDomain { axis: usize, value: f64 },
    #[error("zero series: no stored terms")]
    ZeroSeries,
    #[error("axis {axis} out of range 1..={p}")]
    AxisOutOfRange { axis: usize, p: usize },
    #[error("axis {axis} radius {value} below exp(1.1): iterated logarithm undefined")]
    IteratedLogDomain { axis: usize, value: f64 },
    #[error("maximal term {mu_log} below e: tail cut undefined this close to the origin")]
    MaximalTermTooSmall { mu_log: f64 },
    #[error("negative tail parameter delta2 = {delta2}")]
    NegativeDelta { delta2: f64 },
    #[error("series text parse failure at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Domain slack for boundary preconditions expressed on real-valued data.
pub const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPowerSeries {
    p: usize,
    truncation: u32,
    /// Largest stored total degree; 0 for the zero series.
    max_order: u32,
    /// Flat multi-indices, `terms * p` entries, graded-lex sorted.
    idx: Vec<u32>,
    /// ln|a_n| per term, always finite.
    log_mod: Vec<f64>,
    /// arg a_n per term, always finite.
    phase: Vec<f64>,
}

impl MultiPowerSeries {
    /// Build from an unsorted term list. Validates dimensions, truncation,
    /// finiteness, and uniqueness, then sorts into graded-lex order. An empty
    /// list is the zero series (legal to hold, most evaluations reject it).
    pub fn from_terms(
        p: usize,
        truncation: u32,
        terms: Vec<(Vec<u32>, f64, f64)>,
    ) -> Result<Self, SeriesError> {
        assert!(p >= 1, "series needs at least one variable");
        let mut terms = terms;
        let mut max_order = 0u32;
        for (idx, log_mod, phase) in &terms {
            if idx.len() != p {
                return Err(SeriesError::DimensionMismatch { expected: p, got: idx.len() });
            }
            let order: u32 = idx.iter().sum();
            if order > truncation {
                return Err(SeriesError::TruncationExceeded {
                    idx: idx.clone(),
                    order,
                    truncation,
                });
            }
            max_order = max_order.max(order);
            if !log_mod.is_finite() || !phase.is_finite() {
                return Err(SeriesError::NonfiniteCoefficient { idx: idx.clone() });
            }
        }
        terms.sort_by(|a, b| {
            let sa: u32 = a.0.iter().sum();
            let sb: u32 = b.0.iter().sum();
            sa.cmp(&sb).then_with(|| a.0.cmp(&b.0))
        });
        for w in terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SeriesError::DuplicateIndex { idx: w[0].0.clone() });
            }
        }
        let mut idx = Vec::with_capacity(terms.len() * p);
        let mut log_mod = Vec::with_capacity(terms.len());
        let mut phase = Vec::with_capacity(terms.len());
        for (i, lm, ph) in terms {
            idx.extend_from_slice(&i);
            log_mod.push(lm);
            phase.push(ph);
        }
        Ok(Self { p, truncation, max_order, idx, log_mod, phase })
    }

    /// The truncated exponential-of-a-sum family: coefficients 1/n! of
    /// exp(z_1 + ... + z_p), every multi-index with |n| <= truncation.
    /// log-spectrum is exactly -ln(n_1!) - ... - ln(n_p!), phases zero.
    pub fn make_exp_sum(p: usize, truncation: u32) -> Self {
        assert!(p >= 1, "series needs at least one variable");
        let count = crate::mathutil::binomial(truncation as u64 + p as u64, p as u64);
        assert!(
            count <= 500_000_000,
            "exp_sum(p={p}, N={truncation}) would store {count} terms; \
             that exceeds any sensible memory budget"
        );
        let count = count as usize;
        let table = ln_factorial_table(truncation as usize);
        let mut idx = Vec::with_capacity(count * p);
        let mut log_mod = Vec::with_capacity(count);
        let mut buf = vec![0u32; p];
        for order in 0..=truncation {
            push_compositions(&mut buf, 0, order, &mut |comp: &[u32]| {
                idx.extend_from_slice(comp);
                let mut lm = Kahan::default();
                for &nj in comp {
                    lm.add(-table[nj as usize]);
                }
                log_mod.push(lm.value());
            });
        }
        let phase = vec![0.0; log_mod.len()];
        Self { p, truncation, max_order: truncation, idx, log_mod, phase }
    }

    pub fn variables(&self) -> usize {
        self.p
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn term_count(&self) -> usize {
        self.log_mod.len()
    }

    /// Largest total degree among stored terms (0 for the zero series).
    pub fn max_total_degree(&self) -> u32 {
        self.max_order
    }

    pub fn index(&self, term: usize) -> &[u32] {
        &self.idx[term * self.p..(term + 1) * self.p]
    }

    pub fn log_modulus(&self, term: usize) -> f64 {
        self.log_mod[term]
    }

    pub fn phase(&self, term: usize) -> f64 {
        self.phase[term]
    }

    /// Graded-lex rank of each stored term, ascending by construction.
    pub fn ranks(&self) -> Vec<u64> {
        self.idx.chunks_exact(self.p).map(graded_lex_rank).collect()
    }

    /// Replace coefficient data in place; lengths must match the term count.
    /// The index table (and so the sort order) is shared with `self`.
    pub(crate) fn with_coefficients(&self, log_mod: Vec<f64>, phase: Vec<f64>) -> Self {
        assert_eq!(log_mod.len(), self.term_count());
        assert_eq!(phase.len(), self.term_count());
        Self {
            p: self.p,
            truncation: self.truncation,
            max_order: self.max_order,
            idx: self.idx.clone(),
            log_mod,
            phase,
        }
    }

    fn check_radius(&self, r: &[f64]) -> Result<(), SeriesError> {
        if r.len() != self.p {
            return Err(SeriesError::DimensionMismatch { expected: self.p, got: r.len() });
        }
        for (axis, &v) in r.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(SeriesError::RadiusDomain { axis: axis + 1, value: v });
            }
        }
        Ok(())
    }

    /// Per-term log weight ln|a_n| + <n, ln r> streamed into `f`.
    #[inline]
    pub(crate) fn for_each_log_weight(&self, u: &[f64], mut f: impl FnMut(usize, f64)) {
        match self.p {
            1 => {
                for (i, (&lm, n)) in
                    self.log_mod.iter().zip(self.idx.iter()).enumerate()
                {
                    f(i, lm + *n as f64 * u[0]);
                }
            }
            2 => {
                let (u0, u1) = (u[0], u[1]);
                for (i, (&lm, n)) in self
                    .log_mod
                    .iter()
                    .zip(self.idx.chunks_exact(2))
                    .enumerate()
                {
                    f(i, lm + n[0] as f64 * u0 + n[1] as f64 * u1);
                }
            }
            _ => {
                for (i, (&lm, n)) in self
                    .log_mod
                    .iter()
                    .zip(self.idx.chunks_exact(self.p))
                    .enumerate()
                {
                    let mut w = lm;
                    for (v, &ui) in n.iter().zip(u) {
                        w += *v as f64 * ui;
                    }
                    f(i, w);
                }
            }
        }
    }

    pub(crate) fn log_radii(&self, r: &[f64]) -> Result<Vec<f64>, SeriesError> {
        self.check_radius(r)?;
        Ok(r.iter().map(|&v| v.ln()).collect())
    }

    /// ln of the full modulus sum Σ|a_n| r^n: the crude upper envelope for
    /// the torus maximum. Log-sum-exp in two passes, no scratch allocation.
    pub fn sum_modulus_log(&self, r: &[f64]) -> Result<f64, SeriesError> {
        let u = self.log_radii(r)?;
        if self.term_count() == 0 {
            return Err(SeriesError::ZeroSeries);
        }
        let mut m = f64::NEG_INFINITY;
        self.for_each_log_weight(&u, |_, w| m = m.max(w));
        let mut acc = Kahan::default();
        self.for_each_log_weight(&u, |_, w| acc.add((w - m).exp()));
        Ok(m + acc.value().ln())
    }

    /// ln of the maximal term max_n |a_n| r^n together with its index. Ties
    /// resolve to the lexicographically smallest index, so the reported
    /// argmax is a pure function of the coefficient table and radius.
    pub fn maximal_term_log(&self, r: &[f64]) -> Result<(f64, Vec<u32>), SeriesError> {
        let u = self.log_radii(r)?;
        if self.term_count() == 0 {
            return Err(SeriesError::ZeroSeries);
        }
        let mut best_w = f64::NEG_INFINITY;
        let mut best_i = usize::MAX;
        let p = self.p;
        let idx = &self.idx;
        self.for_each_log_weight(&u, |i, w| {
            if w > best_w {
                best_w = w;
                best_i = i;
            } else if w == best_w && best_i != usize::MAX {
                // Exact float tie: prefer the lex-smaller index. Storage is
                // graded-lex, so earlier position does not imply lex-smaller
                // across degrees ((2,0) precedes (0,3) but is lex-larger).
                if idx[i * p..(i + 1) * p] < idx[best_i * p..(best_i + 1) * p] {
                    best_i = i;
                }
            }
        });
        Ok((best_w, self.index(best_i).to_vec()))
    }

    /// Logarithmic derivative of the modulus sum along axis `s` (1-based):
    /// Σ n_s |a_n| r^n / Σ |a_n| r^n, the expected degree along that axis
    /// under the weight distribution. Lies in [0, truncation].
    pub fn partial_log_derivative(&self, r: &[f64], s: usize) -> Result<f64, SeriesError> {
        if s < 1 || s > self.p {
            return Err(SeriesError::AxisOutOfRange { axis: s, p: self.p });
        }
        let u = self.log_radii(r)?;
        if self.term_count() == 0 {
            return Err(SeriesError::ZeroSeries);
        }
        let (p, k) = (self.p, s - 1);
        let idx = &self.idx;
        let mut m = f64::NEG_INFINITY;
        self.for_each_log_weight(&u, |_, w| m = m.max(w));
        let mut den = Kahan::default();
        let mut num = Kahan::default();
        self.for_each_log_weight(&u, |i, w| {
            let e = (w - m).exp();
            den.add(e);
            num.add(idx[i * p + k] as f64 * e);
        });
        Ok(num.value() / den.value())
    }

    /// Tail-cut threshold d(r): the total degree beyond which the weight mass
    /// is provably negligible,
    ///   d = (ln mu)^(p/2 + 1 + delta2) * prod_i ((ln r_i)^p (ln ln r_i)^2)^(1 + delta2).
    /// Needs every radius at or above exp(1.1) and the maximal term at or
    /// above e (both with `DOMAIN_SLACK` tolerance) so iterated logs behave.
    pub fn tail_cut_index(&self, r: &[f64], delta2: f64) -> Result<f64, SeriesError> {
        if delta2 < 0.0 {
            return Err(SeriesError::NegativeDelta { delta2 });
        }
        self.check_radius(r)?;
        let floor = (1.1f64).exp() - DOMAIN_SLACK;
        for (axis, &v) in r.iter().enumerate() {
            if v < floor {
                return Err(SeriesError::IteratedLogDomain { axis: axis + 1, value: v });
            }
        }
        let (mu_log, _) = self.maximal_term_log(r)?;
        if mu_log < 1.0 - DOMAIN_SLACK {
            return Err(SeriesError::MaximalTermTooSmall { mu_log });
        }
        let p = self.p as f64;
        let mut d = mu_log.max(1.0).powf(p / 2.0 + 1.0 + delta2);
        for &v in r {
            let lr = v.ln();
            let llr = lr.ln().max(f64::MIN_POSITIVE);
            d *= (lr.powf(p) * llr * llr).powf(1.0 + delta2);
        }
        Ok(d)
    }

    /// ln of the partial sum over stored terms with |n| >= d. Returns -inf
    /// when no stored term reaches the threshold (the tail is empty).
    pub fn tail_sum_log(&self, r: &[f64], d: f64) -> Result<f64, SeriesError> {
        assert!(d >= 0.0, "tail threshold must be nonnegative, got {d}");
        let u = self.log_radii(r)?;
        let p = self.p;
        let idx = &self.idx;
        let in_tail = |i: usize| {
            let order: u32 = idx[i * p..(i + 1) * p].iter().sum();
            order as f64 >= d
        };
        let mut m = f64::NEG_INFINITY;
        self.for_each_log_weight(&u, |i, w| {
            if in_tail(i) {
                m = m.max(w);
            }
        });
        if m == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let mut acc = Kahan::default();
        self.for_each_log_weight(&u, |i, w| {
            if in_tail(i) {
                acc.add((w - m).exp());
            }
        });
        Ok(m + acc.value().ln())
    }

    /// Membership in the admissible class: finitely many terms all within the
    /// declared truncation (structural invariants of this representation).
    pub fn in_admissible_class(&self) -> bool {
        self.idx
            .chunks_exact(self.p)
            .all(|n| n.iter().sum::<u32>() <= self.truncation)
    }

    /// Text form: header `p truncation`, then one term per line as
    /// `n_1 ... n_p log_modulus phase`. Floats print in shortest round-trip
    /// form, so write-then-read reproduces every bit.
    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{} {}", self.p, self.truncation)?;
        for i in 0..self.term_count() {
            for &n in self.index(i) {
                write!(w, "{n} ")?;
            }
            writeln!(w, "{} {}", self.log_mod[i], self.phase[i])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, SeriesError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| SeriesError::Parse { line: 1, reason: "empty input".into() })??;
        let mut it = header.split_whitespace();
        let p: usize = parse_tok(&mut it, 1, "variable count")?;
        let truncation: u32 = parse_tok(&mut it, 1, "truncation")?;
        if p == 0 {
            return Err(SeriesError::Parse { line: 1, reason: "p must be at least 1".into() });
        }
        if it.next().is_some() {
            return Err(SeriesError::Parse {
                line: 1,
                reason: "header must be exactly `p truncation`".into(),
            });
        }
        let mut terms = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let lineno = lineno + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut idx = Vec::with_capacity(p);
            for _ in 0..p {
                idx.push(parse_tok(&mut it, lineno, "multi-index entry")?);
            }
            let log_mod: f64 = parse_tok(&mut it, lineno, "log modulus")?;
            let phase: f64 = parse_tok(&mut it, lineno, "phase")?;
            if it.next().is_some() {
                return Err(SeriesError::Parse {
                    line: lineno,
                    reason: format!("expected {} fields", p + 2),
                });
            }
            terms.push((idx, log_mod, phase));
        }
        Self::from_terms(p, truncation, terms)
    }
}

fn parse_tok<T: std::str::FromStr>(
    it: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    what: &str,
) -> Result<T, SeriesError> {
    let tok = it
        .next()
        .ok_or_else(|| SeriesError::Parse { line, reason: format!("missing {what}") })?;
    tok.parse().map_err(|_| SeriesError::Parse {
        line,
        reason: format!("bad {what}: {tok:?}"),
    })
}

/// Visit compositions of `order` into `buf.len() - axis` remaining slots, in
/// ascending lexicographic order over the full buffer.
fn push_compositions(buf: &mut [u32], axis: usize, rem: u32, f: &mut impl FnMut(&[u32])) {
    if axis == buf.len() - 1 {
        buf[axis] = rem;
        f(buf);
        return;
    }
    for v in 0..=rem {
        buf[axis] = v;
        push_compositions(buf, axis + 1, rem - v, f);
    }
}
