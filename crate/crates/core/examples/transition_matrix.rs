//! Closed-form transition matrix of the lifted range system against RK4.

use ltvobs::ltv::{transition_matrix, DEFAULT_DT};
use ltvobs::range::{build_lifted_system, closed_form_phi, Scenario};

fn main() -> ltvobs::Result<()> {
    let sc = Scenario::from_json(include_str!("../scenarios/three_beacons.json"))?;
    let sys = build_lifted_system(&sc);
    for (t, s) in [(0.0, 1.0), (2.5, 4.0), (7.0, 9.5)] {
        let closed = closed_form_phi(&sc, t, s);
        let numeric = transition_matrix(&sys, t, s, DEFAULT_DT)?;
        let err = (&closed.phi - &numeric.phi).amax();
        println!("Phi({}, {t}): max entry error {err:.3e}", t + s);
    }
    let phi = closed_form_phi(&sc, 0.0, 3.0);
    println!("Phi(3, 0) ={:.4}", phi.phi);
    Ok(())
}
