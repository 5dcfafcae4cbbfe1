//! Radial-grid scans: where does an inequality fail, and how much
//! logarithmic measure do the failures carry?
//!
//! A grid covers a box [lo_1, hi_1] x ... x [lo_p, hi_p] with k^p cells,
//! equal-sized in log coordinates. Each cell is judged by the evidence of
//! its center point alone, and a flagged cell contributes its full
//! log-volume to the exceptional measure. Cells are independent, so the
//! scan parallelizes freely; the report is a deterministic reduction and
//! does not depend on worker count or evaluation order.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::bounds::{self, BoundParams, BoundsError, BracketKind, ReducedKind};
use crate::mathutil::{log_spaced, ols_fit, Kahan};
use crate::series::{MultiPowerSeries, SeriesError};
use crate::torus::{max_modulus, TorusBudget, TorusError};

/// Comparison slack, in the predicate's own scale, absorbing last-bit
/// roundoff so an exact equality case is never flagged.
pub const FLAG_SLACK: f64 = 1e-12;

/// Cap on k^p. A scan evaluates a full inequality per cell; past this the
/// run would not finish in sane time anyway.
const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("lo and hi must list the same positive number of axes, got {lo} and {hi}")]
    GridShape { lo: usize, hi: usize },
    #[error("grid lo must exceed 1 on every axis (log spacing), got {value} on axis {axis}")]
    GridLo { axis: usize, value: f64 },
    #[error("grid needs lo < hi on axis {axis}, got [{lo}, {hi}]")]
    GridOrder { axis: usize, lo: f64, hi: f64 },
    #[error("grid needs at least one cell per axis")]
    EmptyGrid,
    #[error("{cells} cells exceed the {cap}-cell cap; coarsen the grid")]
    TooManyCells { cells: u128, cap: usize },
    #[error("grid spans {grid} variables but the series has {series}")]
    DimensionMismatch { grid: usize, series: usize },
    #[error("cell id {id} is not in a grid of {cells} cells")]
    ForeignCell { id: usize, cells: usize },
    #[error(
        "truncation inadequate: the scan needs degrees kept through N >= {required} \
         (twice the largest tail cut over the grid) but the series keeps {actual}"
    )]
    TruncationInadequate { required: u64, actual: u32 },
    #[error("sweep needs 1 < lo < hi, got [{lo}, {hi}]")]
    SweepRange { lo: f64, hi: f64 },
    #[error("exponent fit needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("exponent fit needs the x values to span at least {min}, got {span}")]
    NarrowSpan { min: f64, span: f64 },
    #[error("exponent fit x values are degenerate")]
    DegenerateFit,
}

/// A box of radii split into equal log-volume cells. Cell ids run row-major
/// with axis 1 slowest, so the last id is the all-top corner cell.
/// Deserialization funnels through `new`, so a parsed grid is always valid.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct RadialGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells_per_axis: usize,
}

#[derive(serde::Deserialize)]
struct RawGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells_per_axis: usize,
}

impl TryFrom<RawGrid> for RadialGrid {
    type Error = ScanError;

    fn try_from(g: RawGrid) -> Result<Self, ScanError> {
        Self::new(g.lo, g.hi, g.cells_per_axis)
    }
}

impl RadialGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells_per_axis: usize) -> Result<Self, ScanError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(ScanError::GridShape { lo: lo.len(), hi: hi.len() });
        }
        for (axis, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(a > 1.0 && a.is_finite()) {
                return Err(ScanError::GridLo { axis: axis + 1, value: a });
            }
            if !(b > a && b.is_finite()) {
                return Err(ScanError::GridOrder { axis: axis + 1, lo: a, hi: b });
            }
        }
        if cells_per_axis == 0 {
            return Err(ScanError::EmptyGrid);
        }
        let cells = (cells_per_axis as u128).pow(lo.len() as u32);
        if cells > MAX_CELLS as u128 {
            return Err(ScanError::TooManyCells { cells, cap: MAX_CELLS });
        }
        Ok(Self { lo, hi, cells_per_axis })
    }

    /// Square (cube, ...) grid with the same bounds on every axis.
    pub fn isotropic(p: usize, lo: f64, hi: f64, cells_per_axis: usize) -> Result<Self, ScanError> {
        Self::new(vec![lo; p], vec![hi; p], cells_per_axis)
    }

    pub fn variables(&self) -> usize {
        self.lo.len()
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.variables() as u32)
    }

    /// Log-volume of one cell: prod (ln hi_i - ln lo_i) / k.
    pub fn cell_log_volume(&self) -> f64 {
        let k = self.cells_per_axis as f64;
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| (b.ln() - a.ln()) / k)
            .product()
    }

    fn axis_indices(&self, id: usize) -> Vec<usize> {
        let k = self.cells_per_axis;
        let p = self.variables();
        let mut rest = id;
        let mut idx = vec![0usize; p];
        for axis in (0..p).rev() {
            idx[axis] = rest % k;
            rest /= k;
        }
        idx
    }

    /// Center of the cell in radius coordinates (midpoint in logs).
    pub fn cell_center(&self, id: usize) -> Result<Vec<f64>, ScanError> {
        if id >= self.cell_count() {
            return Err(ScanError::ForeignCell { id, cells: self.cell_count() });
        }
        let k = self.cells_per_axis as f64;
        Ok(self
            .axis_indices(id)
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&j, (&a, &b))| {
                let la = a.ln();
                (la + (j as f64 + 0.5) * (b.ln() - la) / k).exp()
            })
            .collect())
    }
}

/// Sum of cell log-volumes over a set of cell ids. Additive over disjoint
/// unions and invariant under scaling the whole grid r -> c r, since
/// log-volumes depend only on hi/lo ratios.
pub fn log_measure(cells: &BTreeSet<usize>, grid: &RadialGrid) -> Result<f64, ScanError> {
    let count = grid.cell_count();
    let vol = grid.cell_log_volume();
    let mut acc = Kahan::default();
    for &id in cells {
        if id >= count {
            return Err(ScanError::ForeignCell { id, cells: count });
        }
        acc.add(vol);
    }
    Ok(acc.value())
}

/// Named inequality to test at each cell center. LHS and RHS are both in
/// the predicate's natural scale (log scale except for `Lemma23`, whose
/// sides are plain derivative values).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// Deterministic multivariate bound: ln MM <= mu-bracket at power 1/2+delta.
    Eq3,
    /// Randomized multivariate bound: ln M <= mu-bracket at power 1/4+delta.
    Eq5,
    /// Radius-free randomized bound: ln M <= ln mu + (p/4+delta) ln ln mu.
    StarQuarter,
    /// Radius-free deterministic bound: ln MM <= ln mu + (p/2+delta) ln ln mu.
    Thm11bHalf,
    /// Tail mass beyond the cut index stays below the maximal term.
    Eq9Tail,
    /// Per-axis log-derivative bound; the worst axis decides the flag.
    Lemma23,
    /// Single-bracket bound ln M <= ln mu + exponent * ln ln mu with a free
    /// exponent, for probing either side of the 1/2 vs 1/4 divide.
    Classical { exponent: f64 },
}

impl Predicate {
    /// Stable text form, also accepted by `parse`.
    pub fn name(&self) -> String {
        match self {
            Predicate::Eq3 => "eq3".into(),
            Predicate::Eq5 => "eq5".into(),
            Predicate::StarQuarter => "star_quarter".into(),
            Predicate::Thm11bHalf => "thm11b_half".into(),
            Predicate::Eq9Tail => "eq9_tail".into(),
            Predicate::Lemma23 => "lemma23".into(),
            Predicate::Classical { exponent } => format!("classical:{exponent}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eq3" => Some(Predicate::Eq3),
            "eq5" => Some(Predicate::Eq5),
            "star_quarter" => Some(Predicate::StarQuarter),
            "thm11b_half" => Some(Predicate::Thm11bHalf),
            "eq9_tail" => Some(Predicate::Eq9Tail),
            "lemma23" => Some(Predicate::Lemma23),
            _ => {
                let exponent = s.strip_prefix("classical:")?.parse().ok()?;
                Some(Predicate::Classical { exponent })
            }
        }
    }
}

/// One scanned cell. `lhs_log` may be -inf (an empty tail sum); the CSV
/// layer writes that as an empty field.
#[derive(Clone, Debug)]
pub struct CellRecord {
    pub cell_id: usize,
    pub radii: Vec<f64>,
    pub lhs_log: f64,
    pub rhs_log: f64,
    /// ln of the maximal term at the center; carried for exponent fits.
    pub mu_log: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug)]
pub struct ExceptionalReport {
    pub predicate_name: String,
    pub flagged: BTreeSet<usize>,
    pub flagged_log_measure: f64,
    pub scanned_log_measure: f64,
    pub cells: Vec<CellRecord>,
}

/// Scan every cell center for a violation of the predicate and account the
/// flagged logarithmic measure.
///
/// The truncation gate asks for degrees kept through twice the largest tail
/// cut index over the grid; the largest sits at the all-top corner center,
/// because both ln mu and the radius factors of the cut grow monotonically
/// in every radius.
pub fn scan(
    f: &MultiPowerSeries,
    grid: &RadialGrid,
    predicate: Predicate,
    params: &BoundParams,
    budget: &TorusBudget,
) -> Result<ExceptionalReport, ScanError> {
    if grid.variables() != f.variables() {
        return Err(ScanError::DimensionMismatch {
            grid: grid.variables(),
            series: f.variables(),
        });
    }
    params.validate()?;
    let top_center = grid.cell_center(grid.cell_count() - 1)?;
    let d_max = f.tail_cut_index(&top_center, params.delta2)?;
    let required = (2.0 * d_max).ceil() as u64;
    if (f.truncation() as u64) < required {
        return Err(ScanError::TruncationInadequate { required, actual: f.truncation() });
    }

    let cells: Vec<CellRecord> = (0..grid.cell_count())
        .into_par_iter()
        .map(|id| {
            let radii = grid.cell_center(id)?;
            let (mu_log, _) = f.maximal_term_log(&radii)?;
            let (lhs_log, rhs_log) = match predicate {
                Predicate::Eq3 => (
                    f.sum_modulus_log(&radii)?,
                    bounds::rhs_multivariate_from(mu_log, &radii, params.delta, BracketKind::Half)?,
                ),
                Predicate::Eq5 => (
                    max_modulus(f, &radii, budget)?.log_value,
                    bounds::rhs_multivariate_from(
                        mu_log,
                        &radii,
                        params.delta,
                        BracketKind::Quarter,
                    )?,
                ),
                Predicate::StarQuarter => (
                    max_modulus(f, &radii, budget)?.log_value,
                    bounds::rhs_reduced_from(
                        mu_log,
                        f.variables(),
                        params.delta,
                        ReducedKind::PQuarter,
                    )?,
                ),
                Predicate::Thm11bHalf => (
                    f.sum_modulus_log(&radii)?,
                    bounds::rhs_reduced_from(
                        mu_log,
                        f.variables(),
                        params.delta,
                        ReducedKind::PHalf,
                    )?,
                ),
                Predicate::Eq9Tail => {
                    let d = f.tail_cut_index(&radii, params.delta2)?;
                    (f.tail_sum_log(&radii, d)?, mu_log)
                }
                Predicate::Lemma23 => {
                    // The flag belongs to the worst axis: the one with the
                    // largest lhs - rhs margin.
                    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
                    for s in 1..=f.variables() {
                        let lhs = f.partial_log_derivative(&radii, s)?;
                        let rhs = bounds::lemma23_rhs(f, &radii, s, params.delta1)?;
                        if lhs - rhs > worst.0 {
                            worst = (lhs - rhs, lhs, rhs);
                        }
                    }
                    (worst.1, worst.2)
                }
                Predicate::Classical { exponent } => (
                    max_modulus(f, &radii, budget)?.log_value,
                    bounds::rhs_power(mu_log, exponent)?,
                ),
            };
            Ok(CellRecord {
                cell_id: id,
                radii,
                lhs_log,
                rhs_log,
                mu_log,
                flagged: lhs_log > rhs_log + FLAG_SLACK,
            })
        })
        .collect::<Result<_, ScanError>>()?;

    let flagged: BTreeSet<usize> =
        cells.iter().filter(|c| c.flagged).map(|c| c.cell_id).collect();
    let flagged_log_measure = log_measure(&flagged, grid)?;
    let all: BTreeSet<usize> = (0..grid.cell_count()).collect();
    let scanned_log_measure = log_measure(&all, grid)?;
    Ok(ExceptionalReport {
        predicate_name: predicate.name(),
        flagged,
        flagged_log_measure,
        scanned_log_measure,
        cells,
    })
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub sample_count: usize,
}

/// Least-squares slope of y against x, for empirical Wiman exponents.
/// Callers feed x = ln of the bound's bracket (or ln ln mu) and
/// y = ln M - ln mu; the slope then estimates the exponent.
pub fn exponent_fit(samples: &[(f64, f64)]) -> Result<ExponentFit, ScanError> {
    const MIN_SAMPLES: usize = 10;
    const MIN_SPAN: f64 = 1.5;
    if samples.len() < MIN_SAMPLES {
        return Err(ScanError::TooFewSamples { min: MIN_SAMPLES, got: samples.len() });
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    for &(x, _) in samples {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
    }
    let span = x_max - x_min;
    if !(span >= MIN_SPAN) {
        return Err(ScanError::NarrowSpan { min: MIN_SPAN, span });
    }
    let xs: Vec<f64> = samples.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();
    let fit = ols_fit(&xs, &ys).ok_or(ScanError::DegenerateFit)?;
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        sample_count: samples.len(),
    })
}

/// Samples (x = ln ln mu, y = ln M - ln mu) along the isotropic diagonal
/// r = (rho, ..., rho) for log-spaced rho in [lo, hi], ready for
/// `exponent_fit`. Every rho must push ln mu past 1 so x stays positive;
/// for the exponential families that means roughly rho > e.
pub fn diagonal_exponent_samples(
    f: &MultiPowerSeries,
    lo: f64,
    hi: f64,
    points: usize,
    budget: &TorusBudget,
) -> Result<Vec<(f64, f64)>, ScanError> {
    if !(lo > 1.0 && hi > lo && hi.is_finite()) {
        return Err(ScanError::SweepRange { lo, hi });
    }
    log_spaced(lo, hi, points)
        .into_iter()
        .map(|rho| {
            let r = vec![rho; f.variables()];
            let (mu_log, _) = f.maximal_term_log(&r)?;
            if !(mu_log > 1.0) {
                return Err(BoundsError::MuLogDomain { mu_log, needs: 1.0 }.into());
            }
            let sup = max_modulus(f, &r, budget)?;
            Ok((mu_log.ln(), sup.log_value - mu_log))
        })
        .collect()
}
