//! Rock-paper-scissors: choices are independent until one conditions on
//! the referee's verdict.

use swapsim::analysis::{self, Hypothesis};
use swapsim::toys::{self, RpsVerdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = toys::run_rps(10_000, 3)?;
    let r = analysis::run_hypothesis(&trials, Hypothesis::ChoiceIndependence, false)?;
    println!("all games         G = {:>8.2}  {:?}", r.divergence, r.verdict);
    for v in RpsVerdict::ALL {
        let sel: Vec<_> = trials.iter().filter(|t| t.verdict == v).copied().collect();
        let r = analysis::run_hypothesis(&sel, Hypothesis::ChoiceIndependence, true)?;
        println!("given {:<11} G = {:>8.2}  {:?} ({} games)", v.token(), r.divergence, r.verdict, sel.len());
    }
    Ok(())
}
