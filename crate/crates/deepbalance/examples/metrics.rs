//! Threshold metrics, ROC points and AUC for a small scored set.

use deepbalance::ensemble::classify;
use deepbalance::metrics::{
    acc_minus, acc_plus, balanced_accuracy, confusion, evaluate, roc_curve,
};

fn main() -> deepbalance::Result<()> {
    let labels = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0];
    let scores = [0.92, 0.71, 0.71, 0.40, 0.38, 0.22, 0.20, 0.15, 0.15, 0.05];

    let c = confusion(&labels, &classify(&scores, 0.5))?;
    println!("{c:?}");
    println!(
        "acc+ {:.3}  acc- {:.3}  balanced {:.3}",
        acc_plus(&c)?,
        acc_minus(&c)?,
        balanced_accuracy(&c)?
    );

    let roc = roc_curve(&scores, &labels)?;
    for ((fpr, tpr), t) in roc.points.iter().zip(&roc.thresholds) {
        println!("threshold {t:>5}  fpr {fpr:.3}  tpr {tpr:.3}");
    }
    println!("AUC {:.4}", evaluate(&scores, &labels, 0.5)?.auc);

    // a set without positives has no true positive rate
    match acc_plus(&confusion(&[0, 0], &[0, 1])?) {
        Err(e) => println!("{e}"),
        Ok(v) => println!("unexpected {v}"),
    }
    Ok(())
}
