//! Loading transaction files. Pass a path to the public credit-card CSV to
//! read it; without one a three-row file in the same layout is used.

use std::path::PathBuf;

use deepbalance::data::{load_csv, CsvSchema};

fn main() -> deepbalance::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("deepbalance-creditcard-sample.csv");
            std::fs::write(
                &p,
                "\"Time\",\"V1\",\"V2\",\"Amount\",\"Class\"\n0,-1.36,-0.07,149.62,\"0\"\n0,1.19,0.27,2.69,\"0\"\n1,-1.36,-1.34,378.66,\"1\"\n",
            )
            .map_err(|e| deepbalance::Error::Config(e.to_string()))?;
            p
        }
    };
    let ds = load_csv(&path, &CsvSchema::credit_card())?;
    println!(
        "{}: {} rows, {} fraud, {} features",
        path.display(),
        ds.n_rows(),
        ds.n_positive(),
        ds.n_features()
    );
    println!("features: {}", ds.feature_names().join(", "));

    // a custom layout: label column `fraud`, positive value `yes`
    let mut schema = CsvSchema::new("fraud", "yes");
    schema.categorical_columns = vec!["channel".into()];
    let p = std::env::temp_dir().join("deepbalance-custom.csv");
    std::fs::write(
        &p,
        "amount,channel,fraud\n10.5,web,no\n99,pos,yes\n3,web,no\n",
    )
    .map_err(|e| deepbalance::Error::Config(e.to_string()))?;
    let custom = load_csv(&p, &schema)?;
    println!(
        "custom features: {:?}, labels {:?}",
        custom.feature_names(),
        custom.labels()
    );
    Ok(())
}
