#![allow(dead_code)]

use std::path::PathBuf;

use ltvobs::range::{Scenario, ScenarioFile, Trajectory};

pub const BUNDLED: [&str; 5] = [
    "three_beacons",
    "two_beacons_collinear",
    "single_beacon_circular_u",
    "single_beacon_constant_u",
    "lemma41_no_bias",
];

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

pub fn bundled(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).expect("bundled scenario exists");
    Scenario::from_json(&text).expect("bundled scenario is valid")
}

/// Three planar beacons with the given velocity profile and bias.
pub fn planar(trajectory: Trajectory, bias: Option<Vec<f64>>) -> Scenario {
    Scenario::try_from(ScenarioFile {
        dim: 2,
        beacons: vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]],
        alpha: None,
        trajectory,
        bias,
        x0: vec![1.0, 2.0],
        horizon: 30.0,
        dt: 0.01,
        delta: std::f64::consts::TAU,
    })
    .expect("fixture is valid")
}

pub fn polynomial_u() -> Trajectory {
    Trajectory::Polynomial {
        coefficients: vec![vec![0.3, -0.1, 0.02], vec![-0.2, 0.05, 0.0, -0.001]],
    }
}

pub fn constant_u() -> Trajectory {
    Trajectory::Constant {
        velocity: vec![0.5, -0.25],
    }
}

/// Small deterministic generator for fixed draw sequences.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
