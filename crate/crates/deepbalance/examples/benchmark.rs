//! DeepBalance against the resampling baselines over three seeds, as the
//! `benchmark` command runs it.

use deepbalance::data::SyntheticParams;
use deepbalance::experiment::{benchmark_dataset, DataSource, ExperimentSpec};

fn main() -> deepbalance::Result<()> {
    let spec = ExperimentSpec {
        data: DataSource::synthetic(SyntheticParams {
            class_separation: 0.8,
            ..SyntheticParams::standard(1)
        }),
        seeds: vec![1, 2, 3],
        ..ExperimentSpec::default()
    };
    let ds = spec.data.load()?;
    let report = benchmark_dataset(&ds, &spec);
    println!(
        "{:<14} {:>8} {:>8} {:>8} {:>8}",
        "method", "acc+", "acc-", "bal_acc", "auc"
    );
    for s in &report.summary {
        let f = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.4}"));
        println!(
            "{:<14} {:>8} {:>8} {:>8} {:>8}",
            s.method,
            f(s.mean_acc_plus),
            f(s.mean_acc_minus),
            f(s.mean_balanced_accuracy),
            f(s.mean_auc)
        );
    }
    Ok(())
}
