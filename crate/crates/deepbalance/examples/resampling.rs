//! The balanced bootstrap and the baseline resamplers on one imbalanced
//! training set.

use deepbalance::data::{generate_synthetic, SyntheticParams};
use deepbalance::numerics::RngStream;
use deepbalance::resampling::{resample, smote_with_origins, ResampleMethod};

fn main() -> deepbalance::Result<()> {
    let train = generate_synthetic(&SyntheticParams {
        n_majority: 5000,
        n_minority: 50,
        n_features: 3,
        class_separation: 2.0,
        seed: 3,
    })?;
    let mut rng = RngStream::new(3, 0);
    for method in [
        ResampleMethod::BalancedBootstrap,
        ResampleMethod::Undersample,
        ResampleMethod::Oversample { target_count: 1000 },
        ResampleMethod::DEFAULT_SMOTE,
        ResampleMethod::None,
    ] {
        let out = resample(&train, &method, &mut rng)?;
        println!(
            "{:<18} {:>5} rows, {:>4} positive",
            method.name(),
            out.n_rows(),
            out.n_positive()
        );
    }

    let smote = smote_with_origins(&train, 5, 2, &mut rng)?;
    let o = smote.origins[0];
    println!(
        "first synthetic row = row {} + {:.3} x (row {} - row {})",
        o.seed, o.gap, o.neighbor, o.seed
    );
    Ok(())
}
