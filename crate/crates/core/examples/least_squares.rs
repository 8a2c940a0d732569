//! Ordinary least squares on a noisy plane, including a duplicated column,
//! which the solver handles by returning the minimum-norm coefficients.

use lindec::linalg::{solve_least_squares, Matrix, Vector};
use lindec::ols_fit;

fn main() -> lindec::Result<()> {
    let rows: Vec<Vec<f64>> = (0..50)
        .map(|i| {
            let a = i as f64 / 10.0;
            let b = ((i * 7) % 11) as f64;
            vec![a, b]
        })
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| 3.0 * r[0] - 0.5 * r[1] + 2.0 + 0.01 * ((i % 5) as f64 - 2.0))
        .collect();
    let x = Matrix::from_rows(&rows)?;
    let y = Vector::from_vec(y)?;

    let m = ols_fit(&x, &y)?;
    println!("weights {:?}  intercept {:.4}", m.weights.as_slice(), m.intercept);

    let dup: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[0], 1.0]).collect();
    let target: Vec<f64> = rows.iter().map(|r| 4.0 * r[0] + 1.0).collect();
    let beta = solve_least_squares(&Matrix::from_rows(&dup)?, &Vector::from_vec(target)?)?;
    println!(
        "duplicated column split evenly: [{:.6}, {:.6}], constant {:.6}",
        beta[0], beta[1], beta[2]
    );
    Ok(())
}
