//! Partitions a dataset by quantiles of one feature: the lowest and highest
//! deciles become out-of-distribution tails, the middle band is split into
//! train and IID test.

use lindec::dataset::{generate_synthetic, quantile_shift_split};

fn main() -> lindec::Result<()> {
    let data = generate_synthetic(1000, 0.2, -4.0, 4.0, 5)?;
    let s = quantile_shift_split(&data, "x", 0.1, 0.9, 0.2, 5)?;
    for (name, part) in [
        ("train", &s.train),
        ("IID", &s.iid_test),
        ("Tail-L", &s.tail_low),
        ("Tail-R", &s.tail_high),
    ] {
        let xs = part.features().column(0);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("{name:<7} {:>4} rows  x ∈ [{lo:>6.3}, {hi:>6.3}]", part.len());
    }
    Ok(())
}
