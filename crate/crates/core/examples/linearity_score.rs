//! Trains a small network on y = x·sin(x) over [-3, 3], fits its affine
//! surrogate, and prints the three R² values next to λ(f).

use lindec::dataset::{generate_synthetic, train_test_split};
use lindec::{evaluate_triplet, fit_surrogate, ols_fit, train, MlpArchitecture, TrainConfig};

fn main() -> lindec::Result<()> {
    let data = generate_synthetic(1500, 0.1, -3.0, 3.0, 11)?;
    let (train_set, test_set) = train_test_split(&data, 0.2, 11)?;

    let arch = MlpArchitecture::new(1, vec![32, 32])?;
    let cfg = TrainConfig {
        epochs: 100,
        ..TrainConfig::default()
    };
    let net = train(&arch, &train_set, &cfg)?;
    let baseline = ols_fit(train_set.features(), train_set.target())?;
    let surrogate = fit_surrogate(&net.model, &train_set)?;

    let r = evaluate_triplet(&baseline, &net.model, &surrogate, &test_set)?;
    println!("baseline  R² {:>7.3}", r.r2_baseline);
    println!("network   R² {:>7.3}", r.r2_network);
    println!("surrogate R² {:>7.3}", r.r2_surrogate);
    println!("λ(f)         {:>7.3}", r.lambda);
    println!("ΔRMSE        {:>+7.3}", r.delta_rmse);
    Ok(())
}
