//! Exceptional sets of the classical bound M <= mu ln^{1/2+eps} mu have
//! finite logarithmic measure: widening the scanned box should not keep
//! adding flagged measure. This sweep grows the upper radius e^3 -> e^5 and
//! prints the flagged log measure of a randomized trial at each stage.
//!
//! Each stage rebuilds the series with the truncation its own box needs
//! (the scan refuses truncations that cannot certify the top corner).

use std::collections::BTreeSet;

use wimanlab::bounds::BoundParams;
use wimanlab::random::{CoefficientSystem, SystemKind};
use wimanlab::scan::{log_measure, scan, Predicate, RadialGrid};
use wimanlab::series::MultiPowerSeries;
use wimanlab::torus::TorusBudget;

fn main() {
    let params = BoundParams::default();
    let budget = TorusBudget { grid_per_axis: 2048, refine_steps: 0, sample_count: 0 };
    let sys = CoefficientSystem::new(SystemKind::Steinhaus, 7).trial_system(0);
    let probe = MultiPowerSeries::make_exp_sum(1, 1200);

    println!(
        "{:>6} {:>10} {:>8} {:>16} {:>14}",
        "hi", "N", "cells", "flagged measure", "box measure"
    );
    for h in [3.0f64, 4.0, 5.0] {
        let hi = h.exp();
        // Required truncation, probed on the cheap series: the cut depends
        // on the series only through mu, and mu is saturated well below e^5.
        let d = probe.tail_cut_index(&[hi], params.delta2).unwrap();
        let n = (2.0 * d).ceil() as u32;
        let f = sys.randomize(&MultiPowerSeries::make_exp_sum(1, n));

        let cells = (4.0 * (h - 2.0)).round() as usize;
        let grid = RadialGrid::new(vec![(2f64).exp()], vec![hi], cells).unwrap();
        let report = scan(
            &f,
            &grid,
            Predicate::Classical { exponent: 0.55 },
            &params,
            &budget,
        )
        .unwrap();

        let all: BTreeSet<usize> = (0..grid.cell_count()).collect();
        println!(
            "{:>6} {:>10} {:>8} {:>16.4} {:>14.4}",
            format!("e^{h}"),
            n,
            cells,
            log_measure(&report.flagged, &grid).unwrap(),
            log_measure(&all, &grid).unwrap()
        );
    }
    println!(
        "\nflagged measure stays pinned to the low-radius end while the box \
         measure grows:\nthe exceptional set is exhausted, which is the finite \
         log-measure statement in practice."
    );
}
