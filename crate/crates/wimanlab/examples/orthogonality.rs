//! What makes a coefficient system "multiplicative": products over distinct
//! indices average to zero. The Monte Carlo statistic below estimates
//! |E prod X_{n_k}| for a fixed index tuple; orthogonal systems sit at the
//! 1/sqrt(trials) noise floor, the all-(+1) control sits at exactly 1.
//!
//! Rademacher signs show the sharp boundary: the full complex product over
//! an even tuple of repeated signs would not vanish, but over distinct
//! indices it does.

use wimanlab::random::{ms_orthogonality_stat, MsPart, SystemKind};

fn main() {
    let tuple = [3u64, 17, 40, 41];
    let trials = 20_000;
    let floor = 1.0 / (trials as f64).sqrt();

    println!("tuple {tuple:?}, {trials} trials, noise floor ~{floor:.4}\n");
    for kind in [
        SystemKind::Steinhaus,
        SystemKind::Rademacher,
        SystemKind::ComplexMs,
        SystemKind::AllPlusOne,
    ] {
        let full =
            ms_orthogonality_stat(kind, 99, &tuple, MsPart::Complex, trials).unwrap();
        let re = ms_orthogonality_stat(kind, 99, &tuple, MsPart::Re, trials).unwrap();
        println!(
            "{:>12}: |E prod X| = {full:<9.5} |E prod Re X| = {re:<9.5}",
            format!("{kind:?}")
        );
    }

    println!(
        "\nonly the all-(+1) control escapes the floor. This zero-mean product \
         property is\nexactly what the randomized Wiman bounds consume; nothing \
         else about the law enters."
    );
}
