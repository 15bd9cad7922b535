//! Sampled Delft-style run: heralded fraction, CHSH on the heralded
//! subensemble, and no-signaling / local-causality tests.
//!
//! Usage: cargo run --release --example monte_carlo_delft [trials] [seed]

use swapsim::analysis::{self, Hypothesis};
use swapsim::engine::{self, ExperimentConfig};
use swapsim::geometry::PresetName;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    for geometry in [PresetName::EarlyDelft, PresetName::DelayedDelft, PresetName::SpacelikeDelft] {
        let config = ExperimentConfig { geometry, n_trials, seed, ..ExperimentConfig::default() };
        let ensemble = engine::run_trials(&config)?;
        let ec = engine::post_select(&ensemble, &config.herald);
        let (p, se) = analysis::heralded_fraction(&ensemble.records);
        let chsh = analysis::chsh(&analysis::correlators(&ec.records))?;
        println!("[{}] heralded {p:.4} ± {se:.4}, S = {:.4} ± {:.4}", geometry.token(), chsh.s, chsh.stderr);
        for (records, ps) in [(&ensemble.records, false), (&ec.records, true)] {
            for h in [Hypothesis::NoSignalingA, Hypothesis::LocalCausalityA] {
                let r = analysis::run_hypothesis(records, h, ps)?;
                println!("  {:<10} G = {:>9.2}  threshold {:>6.2}  {:?}", r.hypothesis, r.divergence, r.threshold, r.verdict);
            }
        }
    }
    Ok(())
}
