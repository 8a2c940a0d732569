//! Saves a trained network to JSON and reloads it; predictions match exactly.

use lindec::dataset::generate_synthetic;
use lindec::{train, MlpArchitecture, MlpModel, TrainConfig};

fn main() -> lindec::Result<()> {
    let data = generate_synthetic(400, 0.2, -4.0, 4.0, 3)?;
    let arch = MlpArchitecture::new(1, vec![16])?;
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let trained = train(&arch, &data, &cfg)?;

    let path = std::env::temp_dir().join("lindec_model_roundtrip.json");
    trained.model.save_json(&path)?;
    let loaded = MlpModel::load_json(&path)?;
    let same = trained.model.forward(data.features())? == loaded.forward(data.features())?;
    println!("wrote {}; predictions identical: {same}", path.display());
    println!("final training loss {:.4}", trained.final_loss());
    Ok(())
}
