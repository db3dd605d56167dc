//! Persistent-excitation verdicts for the bundled scenarios.

use ltvobs::range::{default_grid, pe_check, Scenario};

const SCENARIOS: [(&str, &str); 5] = [
    ("three_beacons", include_str!("../scenarios/three_beacons.json")),
    ("two_beacons_collinear", include_str!("../scenarios/two_beacons_collinear.json")),
    ("single_beacon_circular_u", include_str!("../scenarios/single_beacon_circular_u.json")),
    ("single_beacon_constant_u", include_str!("../scenarios/single_beacon_constant_u.json")),
    ("lemma41_no_bias", include_str!("../scenarios/lemma41_no_bias.json")),
];

fn main() -> ltvobs::Result<()> {
    for (name, text) in SCENARIOS {
        let sc = Scenario::from_json(text)?;
        let report = pe_check(&sc, &default_grid(&sc, 10))?;
        println!("{name:<26} mu = {:.6e}  pass = {}", report.mu, report.pass);
    }
    Ok(())
}
