//! The classical Wiman picture for e^z: along r the gap ln M - ln mu grows
//! like (1/2) ln ln mu, i.e. M ~ mu sqrt(2 pi r). The fitted exponent lands
//! a little under 0.5 because the Stirling correction is not yet negligible
//! at these radii.

use wimanlab::scan::{diagonal_exponent_samples, exponent_fit};
use wimanlab::series::MultiPowerSeries;
use wimanlab::torus::TorusBudget;

fn main() {
    let f = MultiPowerSeries::make_exp_sum(1, 1200);
    let budget = TorusBudget { grid_per_axis: 256, refine_steps: 1, sample_count: 0 };
    let lo = (2f64).exp();
    let hi = (6f64).exp();

    let samples = diagonal_exponent_samples(&f, lo, hi, 24, &budget).unwrap();
    println!("{:>12} {:>12}", "ln ln mu", "ln M - ln mu");
    for (x, y) in &samples {
        println!("{x:>12.5} {y:>12.5}");
    }

    let fit = exponent_fit(&samples).unwrap();
    println!(
        "\nfit over [e^2, e^6]: slope {:.4} (classical value 0.5), r^2 {:.5}",
        fit.slope, fit.r2
    );
}
