//! Random multiplicative coefficient systems.
//!
//! A system attaches one unimodular random multiplier X_n to every
//! multi-index n: Rademacher signs, Steinhaus phases e^{i u}, or the discrete
//! complex fourth roots on the diagonals. Multipliers are pure functions of
//! (kind, seed, graded-lex rank), drawn from counter-based streams: the draw
//! for an index never depends on which other indices are requested, in what
//! order, or on how work is split across threads.

use std::f64::consts::PI;

use crate::mathutil::{graded_lex_rank, stream64, unit_f64};
use crate::series::MultiPowerSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// X_n uniform on {-1, +1}.
    Rademacher,
    /// X_n = e^{i u_n}, u_n uniform on [0, 2 pi).
    Steinhaus,
    /// X_n uniform on {(±1 ± i)/sqrt(2)}: unimodular with exactly
    /// orthogonal square, the discrete witness for moment cancellation.
    ComplexMs,
    /// Degenerate X_n = +1: the deterministic control system.
    AllPlusOne,
}

impl SystemKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rademacher" => Some(Self::Rademacher),
            "steinhaus" => Some(Self::Steinhaus),
            "complex_ms" => Some(Self::ComplexMs),
            "all_plus_one" => Some(Self::AllPlusOne),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rademacher => "rademacher",
            Self::Steinhaus => "steinhaus",
            Self::ComplexMs => "complex_ms",
            Self::AllPlusOne => "all_plus_one",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RandomError {
    #[error("multi-index list contains a duplicate at position {position}")]
    DuplicateIndex { position: usize },
    #[error("tuple of stream keys must be non-empty, strictly increasing")]
    BadTuple,
    #[error("at least {min} trials required, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("series term {idx:?} has no drawn multiplier")]
    MissingMultiplier { idx: Vec<u32> },
}

/// Which part of the multiplier enters a product moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsPart {
    Complex,
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct CoefficientSystem {
    pub kind: SystemKind,
    pub seed: u64,
}

/// Lane tags keep the phase stream and any future moduli stream disjoint.
const LANE_PHASE: u64 = 1;

impl CoefficientSystem {
    pub fn new(kind: SystemKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// Independent copy of this system for Monte Carlo trial `trial`.
    /// Trial sub-seeds are themselves stream words, so trials never collide
    /// with each other or with the parent seed's own draws.
    pub fn trial_system(&self, trial: u64) -> Self {
        Self { kind: self.kind, seed: stream64(self.seed, trial.wrapping_add(1), 0) }
    }

    /// The multiplier for graded-lex rank `rank`, as (log-modulus, phase).
    /// Every supported system is unimodular: log-modulus is exactly 0.
    pub fn multiplier(&self, rank: u64) -> (f64, f64) {
        let phase = match self.kind {
            SystemKind::AllPlusOne => 0.0,
            SystemKind::Rademacher => {
                let bits = stream64(self.seed, rank, LANE_PHASE);
                if bits >> 63 == 0 {
                    0.0
                } else {
                    PI
                }
            }
            SystemKind::Steinhaus => {
                2.0 * PI * unit_f64(stream64(self.seed, rank, LANE_PHASE))
            }
            SystemKind::ComplexMs => {
                // Two high bits pick one of the four diagonal roots, each
                // with modulus exactly 1.
                let bits = stream64(self.seed, rank, LANE_PHASE) >> 62;
                match bits {
                    0 => PI / 4.0,
                    1 => 3.0 * PI / 4.0,
                    2 => -3.0 * PI / 4.0,
                    _ => -PI / 4.0,
                }
            }
        };
        (0.0, phase)
    }

    /// Draw multipliers for an explicit list of multi-indices. The list must
    /// be duplicate-free; order is irrelevant to the values drawn.
    pub fn draw(&self, indices: &[Vec<u32>]) -> Result<SystemDraw, RandomError> {
        let mut keyed: Vec<(u64, usize)> = indices
            .iter()
            .enumerate()
            .map(|(i, idx)| (graded_lex_rank(idx), i))
            .collect();
        keyed.sort_unstable();
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(RandomError::DuplicateIndex { position: w[1].1 });
            }
        }
        let mut ranks = Vec::with_capacity(indices.len());
        let mut log_mods = Vec::with_capacity(indices.len());
        let mut phases = Vec::with_capacity(indices.len());
        for (rank, _) in keyed {
            let (lm, ph) = self.multiplier(rank);
            ranks.push(rank);
            log_mods.push(lm);
            phases.push(ph);
        }
        Ok(SystemDraw { ranks, log_mods, phases })
    }

    /// Apply this system to a series: a_n becomes X_n a_n. Unimodular
    /// multipliers leave every modulus bit-identical; only phases move.
    pub fn randomize(&self, f: &MultiPowerSeries) -> MultiPowerSeries {
        let n = f.term_count();
        let mut log_mods = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for i in 0..n {
            let rank = graded_lex_rank(f.index(i));
            let (lm, ph) = self.multiplier(rank);
            log_mods.push(f.log_modulus(i) + lm);
            let mut combined = f.phase(i) + ph;
            // Keep phases in (-pi, pi] so text output stays tidy.
            while combined > PI {
                combined -= 2.0 * PI;
            }
            while combined <= -PI {
                combined += 2.0 * PI;
            }
            phases.push(combined);
        }
        f.with_coefficients(log_mods, phases)
    }

    /// Apply a previously drawn multiplier table to a series. Every stored
    /// term must be covered by the draw.
    pub fn randomize_with(
        &self,
        f: &MultiPowerSeries,
        draw: &SystemDraw,
    ) -> Result<MultiPowerSeries, RandomError> {
        let n = f.term_count();
        let mut log_mods = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for i in 0..n {
            let rank = graded_lex_rank(f.index(i));
            let pos = draw
                .ranks
                .binary_search(&rank)
                .map_err(|_| RandomError::MissingMultiplier { idx: f.index(i).to_vec() })?;
            log_mods.push(f.log_modulus(i) + draw.log_mods[pos]);
            let mut combined = f.phase(i) + draw.phases[pos];
            while combined > PI {
                combined -= 2.0 * PI;
            }
            while combined <= -PI {
                combined += 2.0 * PI;
            }
            phases.push(combined);
        }
        Ok(f.with_coefficients(log_mods, phases))
    }
}

/// A realized draw: ranks ascending, one (log-modulus, phase) per rank.
#[derive(Clone, Debug)]
pub struct SystemDraw {
    pub ranks: Vec<u64>,
    pub log_mods: Vec<f64>,
    pub phases: Vec<f64>,
}

/// Monte Carlo estimate of |E prod_{k} part(X_{n_k})| over fresh trial
/// systems. For genuinely multiplicative orthogonal systems this vanishes at
/// the 1/sqrt(trials) scale; the all-ones control returns exactly 1.
pub fn ms_orthogonality_stat(
    kind: SystemKind,
    seed: u64,
    tuple: &[u64],
    part: MsPart,
    trials: usize,
) -> Result<f64, RandomError> {
    if tuple.is_empty() || tuple.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RandomError::BadTuple);
    }
    if trials < 100 {
        return Err(RandomError::TooFewTrials { min: 100, got: trials });
    }
    let base = CoefficientSystem::new(kind, seed);
    let mut sum_re = 0.0;
    let mut sum_im = 0.0;
    for t in 0..trials {
        let sys = base.trial_system(t as u64);
        let mut prod_re = 1.0;
        let mut prod_im = 0.0;
        for &rank in tuple {
            let (_, ph) = sys.multiplier(rank);
            let (fre, fim) = match part {
                MsPart::Complex => (ph.cos(), ph.sin()),
                MsPart::Re => (ph.cos(), 0.0),
                MsPart::Im => (ph.sin(), 0.0),
            };
            let re = prod_re * fre - prod_im * fim;
            let im = prod_re * fim + prod_im * fre;
            prod_re = re;
            prod_im = im;
        }
        sum_re += prod_re;
        sum_im += prod_im;
    }
    let n = trials as f64;
    Ok((sum_re / n).hypot(sum_im / n))
}
