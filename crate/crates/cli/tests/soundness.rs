mod support;

use support::{load, mc_soundness};
use versekit::reach::verify;

/// Sampled executions stay inside the reachtubes of the scenarios the
/// acceptance run does not already sample.
#[test]
fn remaining_scenarios_contain_sampled_executions() {
    let names = ["toy.json", "lotka.json", "fig8_verify.json", "car8_m2.json", "car8_m2_ctlr.json", "car8_m2_init.json"];
    for (i, name) in names.iter().enumerate() {
        let (aut, settings) = load(name);
        let ver = verify(&aut, &settings);
        if let Err(e) = mc_soundness(&aut, &settings, &ver, 40, 700 + i as u64, 1e-6) {
            panic!("{name}: {e}");
        }
    }
}
