//! The trained ensemble does not depend on the number of worker threads.

use std::time::Instant;

use deepbalance::data::{generate_synthetic, SyntheticParams};
use deepbalance::ensemble::{train_deepbalance, TrainConfig};

fn main() -> deepbalance::Result<()> {
    let train = generate_synthetic(&SyntheticParams::standard(42))?;
    let config = TrainConfig::deepbalance(5, 25, 50, 42);
    let mut reference = None;
    for workers in [1, 2, 4] {
        let start = Instant::now();
        let json = train_deepbalance(&train, &config, workers)?.to_json()?;
        let same = reference.get_or_insert_with(|| json.clone()) == &json;
        println!(
            "{workers} workers: {:.2}s, identical to 1 worker: {same}",
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
