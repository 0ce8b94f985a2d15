//! Rewrite the bundled stand-in datasets under `crates/core/data/`.

use std::path::Path;

use uqmol::data::synth::{StandIn, BUNDLED_SEED};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for kind in StandIn::ALL {
        let d = kind.generate(BUNDLED_SEED);
        let path = dir.join(format!("{}.csv", kind.name()));
        d.write_csv(&path).expect("write dataset");
        println!("{}: {} records -> {}", kind.name(), d.len(), path.display());
    }
}
