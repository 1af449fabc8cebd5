//! Backpropagation gradients of a small random network against central
//! finite differences.

use deepbalance::dbn::{DbnHyperparams, DbnModel, RbmLayer};
use deepbalance::numerics::{Matrix, RngStream};

fn main() -> deepbalance::Result<()> {
    let mut rng = RngStream::new(5, 0);
    let hyper = DbnHyperparams {
        hidden_sizes: vec![4, 3],
        ..DbnHyperparams::default()
    };
    let mut model = DbnModel::zeros(3, hyper);
    model.layers = vec![RbmLayer::zeros(3, 4), RbmLayer::zeros(4, 3)];
    let mut params = model.parameters();
    for p in params.iter_mut() {
        *p = 0.5 * rng.normal();
    }
    model.set_parameters(&params)?;

    let x = Matrix::from_fn(6, 3, |_, _| rng.uniform());
    let y = [1, 0, 1, 1, 0, 0];
    let analytic = model.gradients(&x, &y)?.flatten();

    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for k in 0..params.len() {
        let mut t = params.clone();
        t[k] += eps;
        probe.set_parameters(&t)?;
        let up = probe.loss(&x, &y)?;
        t[k] -= 2.0 * eps;
        probe.set_parameters(&t)?;
        let down = probe.loss(&x, &y)?;
        let numeric = (up - down) / (2.0 * eps);
        worst = worst
            .max((analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(1e-8));
    }
    println!(
        "{} parameters, max relative error {worst:.2e}",
        params.len()
    );
    Ok(())
}
