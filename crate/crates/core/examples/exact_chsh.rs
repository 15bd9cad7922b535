//! Exact correlators and CHSH value of the heralded subensemble.

use swapsim::analysis::{self, ChshCombination, CorrelatorTable};
use swapsim::engine::{self, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::default();
    let table = engine::exact_experiment_distribution(&config)?;
    let heralded = table.conditional_on(&config.herald).ok_or("herald has zero probability")?;
    let e = CorrelatorTable::from_distribution(&heralded);
    for a in 0..2 {
        for b in 0..2 {
            println!("E(a{a}, b{b}) = {:+.6}", e.get(a, b).unwrap_or(f64::NAN));
        }
    }
    for combination in ChshCombination::all() {
        let r = analysis::chsh_with(&e, combination)?;
        println!("pattern {}  S = {:+.6}", combination.pattern(), r.s);
    }
    println!("default: S = {:.12} (2√2 = {:.12})", analysis::exact_chsh(&config)?.s, analysis::TSIRELSON);
    Ok(())
}
