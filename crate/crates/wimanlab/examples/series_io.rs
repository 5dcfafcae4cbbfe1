//! Round-trip a small two-variable series through the text format and query
//! its basic quantities. Coefficients are stored as (index, ln|a|, phase), so
//! the file survives moduli far outside f64 linear range.

use wimanlab::series::MultiPowerSeries;

fn main() {
    // 1 + 3 z1 z2^2 + e^{-40} z1^4 (the tiny term would underflow as |a|^2).
    let f = MultiPowerSeries::from_terms(
        2,
        8,
        vec![
            (vec![0, 0], 0.0, 0.0),
            (vec![1, 2], 3f64.ln(), 0.5),
            (vec![4, 0], -40.0, 0.0),
        ],
    )
    .expect("valid term list");

    let mut buf = Vec::new();
    f.write_text(&mut buf).expect("write");
    println!("--- text form ---\n{}", String::from_utf8_lossy(&buf));

    let g = MultiPowerSeries::read_text(&buf[..]).expect("read");
    assert_eq!(f.term_count(), g.term_count());

    for r in [[0.5, 0.5], [2.0, 2.0], [10.0, 3.0]] {
        let (mu_log, argmax) = g.maximal_term_log(&r).unwrap();
        let sum_log = g.sum_modulus_log(&r).unwrap();
        println!(
            "r = {r:?}: ln mu = {mu_log:.4} at n = {argmax:?}, ln 'M' = {sum_log:.4}"
        );
    }
}
