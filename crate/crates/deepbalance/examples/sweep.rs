//! Ensemble size against AUC and training time.

use deepbalance::data::SyntheticParams;
use deepbalance::experiment::{
    sweep_dataset, DataSource, ExperimentSpec, MethodSpec, SweepParameter, SweepSpec,
};

fn main() -> deepbalance::Result<()> {
    let spec = ExperimentSpec {
        data: DataSource::synthetic(SyntheticParams {
            class_separation: 0.8,
            ..SyntheticParams::standard(1)
        }),
        seeds: vec![1, 2, 3],
        methods: vec![MethodSpec::deepbalance()],
        ..ExperimentSpec::default()
    };
    let ds = spec.data.load()?;
    let sweep = SweepSpec {
        parameter: SweepParameter::TotalNets,
        values: vec![1, 2, 4, 8, 16],
    };
    let report = sweep_dataset(&ds, &spec, &sweep)?;
    println!("total_nets  mean_auc  sd_auc  train_s");
    for r in &report.rows {
        println!(
            "{:>10}  {:.4}    {:.4}  {:.3}",
            r.value,
            r.mean_auc.unwrap_or(f64::NAN),
            r.sd_auc.unwrap_or(f64::NAN),
            r.mean_train_seconds.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
