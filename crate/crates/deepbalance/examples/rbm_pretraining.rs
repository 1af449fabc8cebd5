//! Contrastive-divergence training of one RBM on a two-pattern binary toy
//! set, then greedy pretraining of a two-layer stack.

use deepbalance::dbn::{pretrain_traced, rbm_cd_update, DbnHyperparams, RbmLayer};
use deepbalance::numerics::{Matrix, RngStream};

fn main() -> deepbalance::Result<()> {
    let patterns = [
        [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
    ];
    let data = Matrix::from_fn(64, 6, |i, j| patterns[i % 2][j]);
    let mut rng = RngStream::new(11, 0);

    let mut layer = RbmLayer::random(6, 4, &mut rng);
    for epoch in 0..=50 {
        if epoch % 10 == 0 {
            println!(
                "epoch {epoch:>2}  reconstruction error {:.4}",
                layer.reconstruction_error(&data)?
            );
        }
        for start in (0..64).step_by(16) {
            let rows: Vec<usize> = (start..start + 16).collect();
            layer = rbm_cd_update(&layer, &data.select_rows(&rows), 0.1, 1, &mut rng)?;
        }
    }

    let hyper = DbnHyperparams {
        hidden_sizes: vec![4, 2],
        ..DbnHyperparams::default()
    };
    let (model, inputs) = pretrain_traced(&hyper, &data, &mut rng)?;
    println!("layer sizes {:?}", model.layer_sizes());
    println!(
        "second layer trained on a {}x{} matrix",
        inputs[1].rows(),
        inputs[1].cols()
    );
    Ok(())
}
