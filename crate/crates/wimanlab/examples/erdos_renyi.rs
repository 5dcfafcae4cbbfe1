//! Sharpness of the 1/4 exponent: ensemble medians of M / (mu ln^{1/4-eps} mu)
//! drift upward along the radius, so no exponent strictly below 1/4 can
//! bound the random sup for good. The all-(+1) control keeps the full
//! deterministic growth and diverges much faster.

use wimanlab::levy::erdos_renyi_ratio;
use wimanlab::random::{CoefficientSystem, SystemKind};
use wimanlab::torus::TorusBudget;

fn main() {
    let r_values: Vec<f64> = (4..=9).map(|k| (0.5 * k as f64).exp()).collect();
    let budget = TorusBudget { grid_per_axis: 1024, refine_steps: 0, sample_count: 0 };

    let sys = CoefficientSystem::new(SystemKind::Steinhaus, 77);
    let random = erdos_renyi_ratio(&r_values, 51, 0.05, sys, 400, &budget).unwrap();

    let ones = CoefficientSystem::new(SystemKind::AllPlusOne, 0);
    let control = erdos_renyi_ratio(&r_values, 51, 0.05, ones, 400, &budget).unwrap();

    println!(
        "{:>10} {:>18} {:>18}",
        "r", "steinhaus median", "all-(+1) control"
    );
    for ((r, med), (_, ctl)) in random.iter().zip(&control) {
        println!("{r:>10.2} {med:>18.4} {ctl:>18.4}");
    }
}
