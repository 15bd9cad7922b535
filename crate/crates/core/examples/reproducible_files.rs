//! Writes an ensemble to CSV and JSON, reads the CSV back, and checks that
//! a second run with the same seed gives identical bytes.

use swapsim::engine::{self, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig { n_trials: 1_000, seed: 42, ..ExperimentConfig::default() };
    let mut first = Vec::new();
    engine::write_csv(&engine::run_trials(&config)?, &mut first)?;
    let mut second = Vec::new();
    engine::write_csv(&engine::run_trials(&config)?, &mut second)?;
    assert_eq!(first, second);
    let back = engine::read_csv(first.as_slice())?;
    println!("{} records round-tripped; first lines:", back.len());
    for line in String::from_utf8(first)?.lines().take(4) {
        println!("  {line}");
    }
    let mut json = Vec::new();
    engine::write_json(&engine::run_trials(&config)?, &config.meta(), &mut json)?;
    let doc: serde_json::Value = serde_json::from_slice(&json)?;
    println!("meta: {}", doc["meta"]);
    Ok(())
}
