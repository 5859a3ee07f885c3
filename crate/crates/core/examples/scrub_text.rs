//! Token-level scrubbing of free text with patterns and harvested
//! identifiers.

use midib_deid::deid::{scrub_text, ScrubberConfig};

fn main() {
    let cfg = ScrubberConfig::default().with_identifiers(["DOE^JANE", "DOE", "JANE", "MRN100001"]);
    for text in [
        "BREAST^ROUTINE for MASS for 311-25-3722",
        "seen by doe^jane on 2019-03-02, call 555-867-5309",
        "AXIAL CONTRAST acquired",
        "history under MRN100001/ACC7712093",
    ] {
        let (clean, removed) = scrub_text(text, &cfg);
        println!("{text:?}\n  kept    {clean:?}\n  removed {removed:?}");
    }
    for token in ["311-25-3722", "A1B2C3", "ROUTINE", "20230415"] {
        println!("{token:<12} -> {:?}", cfg.classify(token));
    }
}
