//! Train DeepBalance on synthetic data, score the held-out split, and round
//! trip the model through JSON.

use deepbalance::data::{generate_synthetic, stratified_split, SyntheticParams};
use deepbalance::ensemble::{predict, train_deepbalance, EnsembleModel, TrainConfig};
use deepbalance::metrics::evaluate;
use deepbalance::numerics::RngStream;

fn main() -> deepbalance::Result<()> {
    let ds = generate_synthetic(&SyntheticParams {
        class_separation: 0.8,
        ..SyntheticParams::standard(1)
    })?;
    let split = stratified_split(&ds, 0.7, &mut RngStream::new(1, deepbalance::SPLIT_STREAM))?;

    let config = TrainConfig::deepbalance(5, 25, 50, 1);
    let model = train_deepbalance(&split.train, &config, 4)?;
    for (m, member) in model.members.iter().enumerate().take(5) {
        println!("member {m}: features {:?}", member.feature_indices);
    }

    let scores = predict(&model, split.test.features())?;
    let e = evaluate(&scores, split.test.labels(), 0.5)?;
    println!(
        "AUC {:.4}  acc+ {:.4}  acc- {:.4}  balanced {:.4}",
        e.auc, e.acc_plus, e.acc_minus, e.balanced_accuracy
    );

    let path = std::env::temp_dir().join("deepbalance-example-model.json");
    model.save(&path)?;
    let loaded = EnsembleModel::load(&path)?;
    assert_eq!(predict(&loaded, split.test.features())?, scores);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
