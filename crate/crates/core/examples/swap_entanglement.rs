//! Two singlets, a Bell measurement on the middle pair, and the state left
//! on the outer pair for each outcome.

use swapsim::qcore::{self, BellOutcome, BsmMode, StateVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let state = qcore::make_two_singlets();
    let m = qcore::BellMeasurement::new(1, 2, BsmMode::Full);
    println!("outcome  P       F(outer, psi-)  F(outer, same outcome)");
    let mut cumulative = 0.0;
    for (outcome, p) in qcore::bell_outcome_probabilities(&state, m)? {
        // A draw in the middle of this outcome's interval selects it.
        let draw = cumulative + p / 2.0;
        cumulative += p;
        let (got, post) = qcore::bell_state_measurement(&state, 1, 2, draw, BsmMode::Full)?;
        assert_eq!(got, outcome);
        let singlet = post.reduced_fidelity(&[0, 3], &StateVector::singlet()).unwrap_or(f64::NAN);
        let same = StateVector::bell(outcome)
            .and_then(|target| post.reduced_fidelity(&[0, 3], &target))
            .unwrap_or(f64::NAN);
        println!("{:<8} {p:.4}  {singlet:<14.6}  {same:.6}", outcome.token());
    }
    println!("(the {} outcome swaps the singlet onto qubits 0 and 3)", BellOutcome::PsiMinus);
    Ok(())
}
