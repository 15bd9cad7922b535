//! Removing C leaves the wing statistics unchanged, yet the herald
//! probability depends on the settings.

use swapsim::analysis;
use swapsim::engine::ExperimentConfig;
use swapsim::geometry::PresetName;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for geometry in [PresetName::EarlyDelft, PresetName::DelayedDelft, PresetName::SpacelikeDelft] {
        let config = ExperimentConfig { geometry, ..ExperimentConfig::default() };
        let nda = analysis::no_difference_check(&config)?;
        println!("[{}] C on vs off: max diff {:.1e}, {:?}", geometry.token(), nda.max_abs_diff, nda.verdict);
    }
    let config = ExperimentConfig::default();
    if let Some(shift) = analysis::post_selection_shift(&config)? {
        println!("heralded vs full wing distribution: max diff {shift:.4}");
    }
    let report = analysis::fragility(&config)?;
    println!(" a b  A  B  P(herald | a,b,A,B)");
    for c in &report.cells {
        println!(" {} {} {:+} {:+}  {:.6}", c.a, c.b, c.outcome_a, c.outcome_b, c.p_herald.unwrap_or(f64::NAN));
    }
    println!("max spread under one setting flip: {:.6}", report.max_spread);
    Ok(())
}
