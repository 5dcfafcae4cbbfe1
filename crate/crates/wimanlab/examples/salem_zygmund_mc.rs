//! Salem-Zygmund scaling: the sup of a random unit polynomial of degree N
//! concentrates near sqrt(ln N) times its Parseval norm. The normalized
//! quantile ratio should therefore be flat in N; the all-(+1) control has a
//! closed form and pins the normalization.

use wimanlab::random::{CoefficientSystem, SystemKind};
use wimanlab::torus::{all_ones_ratio, tail_probability_mc, TorusBudget};

fn main() {
    let sys = CoefficientSystem::new(SystemKind::Steinhaus, 2024);
    let budget = TorusBudget { grid_per_axis: 256, refine_steps: 1, sample_count: 0 };

    println!("{:>6} {:>16} {:>16}", "N", "quantile ratio", "exceed fraction");
    for degree in [64u32, 256, 1024] {
        let res = tail_probability_mc(degree, 1, 1.0, 300, sys, None, &budget).unwrap();
        println!(
            "{degree:>6} {:>16.4} {:>16.4}",
            res.quantile_ratio, res.exceed_fraction
        );
    }

    let ones = CoefficientSystem::new(SystemKind::AllPlusOne, 0);
    let res = tail_probability_mc(256, 1, 1.0, 50, ones, None, &budget).unwrap();
    println!(
        "\nall-(+1) control at N = 256: ratio {:.6}, closed form {:.6}",
        res.quantile_ratio,
        all_ones_ratio(256, 1)
    );
}
