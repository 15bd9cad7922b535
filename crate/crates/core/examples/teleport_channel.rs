//! Uncorrected teleportation carries no information unless the Bell
//! outcome is fixed, after which the output copies the input.

use swapsim::analysis;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for controlled in [false, true] {
        let r = analysis::teleport_channel_demo(controlled, 100_000, 5)?;
        println!(
            "controlled = {controlled:<5}  kept {:>6}  P(match) = {:.4}  I = {:.4} bits  counts {:?}",
            r.kept, r.p_match, r.mutual_information_bits, r.counts
        );
    }
    Ok(())
}
