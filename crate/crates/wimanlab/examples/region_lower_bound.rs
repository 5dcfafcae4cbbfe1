//! Lower-bound experiment on the region A(t): radii whose per-axis maximal
//! terms stay within a factor-two bracket of psi(t). Checks the pointwise
//! bound M >= mu ln^{p/4 - eps} mu at sampled region points across random
//! trials, and that the accumulated region measure grows with the predicted
//! ln(8/3) rate per unit ln t.

use wimanlab::levy::{lower_bound_experiment, psi, region_a};
use wimanlab::random::{CoefficientSystem, SystemKind};
use wimanlab::torus::TorusBudget;

fn main() {
    // Geometry first: the bracket endpoints are psi-inverses, so each axis
    // interval is roughly [t/2, 2t] up to log corrections.
    for k in [3.0f64, 4.0] {
        let t = k.exp();
        let region = region_a(t, 2).unwrap();
        let (t1, t2) = region.bounds.unwrap();
        println!(
            "t = e^{k}: psi(t) = {:.2}, axis interval [{t1:.2}, {t2:.2}], log width {:.3}",
            psi(t),
            region.log_width()
        );
    }

    let sys = CoefficientSystem::new(SystemKind::Steinhaus, 11);
    let budget = TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 };
    let t_values = [(3f64).exp(), (4f64).exp()];
    let res = lower_bound_experiment(2, 0.15, &t_values, 10, sys, 600, &budget).unwrap();

    println!("\nhold fraction {:.3} ({} retried at doubled budget)", res.hold_fraction, res.retries);
    for m in &res.measures {
        println!(
            "t = {:>8.2}: slice measure {:.4}, accumulated {:.4}",
            m.t, m.slice_log_measure, m.accumulated
        );
    }
    println!(
        "accumulated-measure slope {:.3} vs ln(8/3) = {:.3}",
        res.region_log_measure_slope,
        (8f64 / 3.0).ln()
    );
}
