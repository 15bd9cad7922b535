//! Light-cone relations of the three layouts and how the time order of
//! the measurements changes under boosts.

use swapsim::geometry::{self, GeometryPreset, PresetName};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in [PresetName::EarlyDelft, PresetName::DelayedDelft, PresetName::SpacelikeDelft] {
        let preset = GeometryPreset::named(name).ok_or("unknown preset")?;
        println!("{name}: {}", geometry::classify_geometry(&preset)?);
        for (l1, l2, rel) in preset.pair_relations() {
            println!("  {} -> {}: {rel}", l1.token(), l2.token());
        }
        for v in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            let order: Vec<_> = geometry::boosted_time_order(&preset, v)?.iter().map(|l| l.token()).collect();
            println!("  v = {v:+.1}: {}", order.join(" < "));
        }
    }
    Ok(())
}
