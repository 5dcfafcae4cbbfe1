//! Numerical laboratory for Wiman-type maximal-term inequalities of entire
//! functions in several complex variables.
//!
//! The objects of study are truncated power series f(z) = sum a_n z^n over
//! multi-indices n, compared along three growth scales at a radius tuple r:
//! the maximal term mu(r) = max |a_n| r^n, the modulus-sum majorant
//! MM(r) = sum |a_n| r^n, and the true maximum M(r) = max |f| on the torus
//! |z_i| = r_i. Classically M stays below mu times a power of ln mu with
//! exponent 1/2 (p/2 in p variables) outside a set of finite logarithmic
//! measure; under random multiplicative coefficient systems the exponent
//! drops to 1/4 (p/4). The crate measures both effects rather than taking
//! them on faith.
//!
//! Module map:
//!
//! * [`series`]: the term-list representation and the exact log-scale
//!   quantities (mu, MM, directional log-derivatives, tail cuts).
//! * [`random`]: multiplicative coefficient systems (Rademacher, Steinhaus,
//!   unimodular fourth-root, and a deterministic control), counter-seeded
//!   so any trial replays from (kind, seed, trial).
//! * [`torus`]: certified lower estimates of M by FFT folding plus
//!   coordinate ascent, budget-monotone by construction, and the
//!   Salem-Zygmund tail Monte Carlo.
//! * [`bounds`]: right-hand sides of the inequality family, each guarding
//!   its own iterated-log domain.
//! * [`scan`]: radial-grid scans flagging cells where an inequality fails,
//!   with logarithmic-measure accounting and exponent fits.
//! * [`levy`]: slice regions A_t, their accumulated measure, and the
//!   lower-bound and divergence experiments for the randomized exponent.
//! * [`manifest`]: the JSON run schema and CSV/summary renderers behind the
//!   command-line binary; a manifest pins every output byte.
//!
//! Numerical conventions, everywhere: moduli and growth quantities live in
//! natural logs; angles are radians; torus maxima are certified lower
//! bounds (an estimate never exceeds the truth and never regresses when a
//! work budget grows); randomness comes only from named, seeded systems.

pub mod bounds;
pub mod levy;
pub mod manifest;
pub mod mathutil;
pub mod random;
pub mod scan;
pub mod series;
pub mod torus;

pub use bounds::{BoundParams, BoundsError};
pub use levy::{lower_bound_experiment, psi, psi_inverse, region_a, LevyError, RegionA};
pub use manifest::{RunArtifacts, RunError, RunManifest};
pub use random::{CoefficientSystem, SystemKind};
pub use scan::{exponent_fit, scan, ExceptionalReport, Predicate, RadialGrid, ScanError};
pub use series::{MultiPowerSeries, SeriesError};
pub use torus::{max_modulus, tail_probability_mc, SupEstimate, TorusBudget, TorusError};
