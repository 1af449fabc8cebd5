//! Synthetic data, a stratified 70/30 split and z-scoring with training
//! statistics.

use deepbalance::data::{
    apply_standardizer, fit_standardizer, generate_synthetic, stratified_split, SyntheticParams,
};
use deepbalance::numerics::RngStream;

fn main() -> deepbalance::Result<()> {
    let ds = generate_synthetic(&SyntheticParams::standard(7))?;
    println!(
        "{} rows, {} positive, features {:?}",
        ds.n_rows(),
        ds.n_positive(),
        ds.feature_names()
    );

    let split = stratified_split(&ds, 0.7, &mut RngStream::new(7, deepbalance::SPLIT_STREAM))?;
    for (name, part) in [("train", &split.train), ("test", &split.test)] {
        println!(
            "{name}: {} rows, {} positive",
            part.n_rows(),
            part.n_positive()
        );
    }

    let params = fit_standardizer(split.train.features());
    let test = apply_standardizer(&split.test, &params)?;
    println!("x1 mean {:.3} sd {:.3}", params.mean[0], params.stddev[0]);
    println!("first standardized test row {:?}", test.features().row(0));
    Ok(())
}
