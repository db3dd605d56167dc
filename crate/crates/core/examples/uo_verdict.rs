//! Excitation alongside the Gramian and extended-Gramian window scans.

use ltvobs::range::{default_grid, uo_verdict, Scenario};

fn main() -> ltvobs::Result<()> {
    let scenarios = [
        ("three_beacons", include_str!("../scenarios/three_beacons.json")),
        ("single_beacon_constant_u", include_str!("../scenarios/single_beacon_constant_u.json")),
    ];
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (name, text) in scenarios {
        let sc = Scenario::from_json(text)?;
        let v = uo_verdict(&sc, &default_grid(&sc, 10), jobs)?;
        println!(
            "{name}: pe mu {:.3e}, gramian min {:.3e}, extended min {:.3e}, observable {}",
            v.pe.mu, v.gramian_min, v.extended_min, v.observable_on_grid
        );
        for w in &v.windows {
            println!(
                "  t = {:5.1}  pe {:.3e}  W {:.3e}  W_M {:.3e}",
                w.t, w.pe_min_eig, w.gramian_min_eig, w.extended_min_eig
            );
        }
    }
    Ok(())
}
