//! Acceptance suite: one PASS/FAIL line per criterion at the stated
//! tolerances. Runs without the libtest harness so the lines always print.
//!
//! A criterion listed in `KNOWN_UNATTAINABLE` is still evaluated and printed
//! as FAIL; the process only exits non-zero for unexpected failures, or if a
//! listed criterion starts passing (the list is then stale).

mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use common::{bundled, constant_u, planar, polynomial_u, rng, BUNDLED};
use ltvobs::ltv::{output_gramian, transition_matrix, MatrixFn, DEFAULT_DT, DEFAULT_NODES};
use ltvobs::observability::{
    build_chain, build_counterexample, check_c1, check_c2, counterexample_report, nodes_for_window,
    ChainRow,
};
use ltvobs::observer::{convergence_metrics, run_observer, write_trace_csv, ObserverConfigFile};
use ltvobs::range::{
    build_lifted_system, build_m, closed_form_phi, default_grid, m_phi_expansion, measure,
    pe_check, uo_verdict, BeaconConfig, Scenario, ScenarioFile, Trajectory,
};
use nalgebra::DVector;
use rand::Rng;

/// `(1/δ)∫_0^δ C` has smallest eigenvalue `1/2 - |sin δ|/(2δ)`, about
/// 0.0793 at δ = 1, so the 0.1 floor cannot hold there.
const KNOWN_UNATTAINABLE: &[&str] = &["1b"];

struct Suite {
    unexpected: Vec<String>,
}

impl Suite {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] criterion {id}: {detail}");
        if pass == known {
            self.unexpected.push(id.to_string());
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion_1(s: &mut Suite) {
    let (entries, elapsed) = timed(|| counterexample_report(&[1.0, TAU, 10.0]).unwrap());
    let worst_w = entries.iter().map(|e| e.gramian_min_eig).fold(f64::MIN, f64::max);
    s.check("1a", worst_w <= 1e-8, format!("max over δ of min eig W(0,δ) = {worst_w:.3e} (≤ 1e-8)"));
    let energies: Vec<String> = entries
        .iter()
        .map(|e| format!("δ={:.4}: {:.6}", e.delta, e.m_integral_min_eig))
        .collect();
    let min_energy = entries.iter().map(|e| e.m_integral_min_eig).fold(f64::MAX, f64::min);
    s.check(
        "1b",
        min_energy >= 0.1,
        format!("min eig (1/δ)∫C ≥ 0.1 for every δ [{}]", energies.join(", ")),
    );
    let at_tau = entries[1].m_integral_min_eig;
    s.check("1c", (at_tau - 0.5).abs() <= 1e-6, format!("value at δ = 2π is {at_tau:.9} (0.5)"));
    let worst_angle = entries
        .iter()
        .map(|e| e.witness[1].atan2(e.witness[0].abs()).abs())
        .fold(0.0, f64::max);
    s.check(
        "1d",
        worst_angle <= 1e-3,
        format!("witness within {worst_angle:.3e} rad of ±(1, 0) (≤ 1e-3)"),
    );
    s.check("1e", elapsed.as_secs_f64() <= 5.0, format!("runtime {:.2} s (≤ 5 s)", elapsed.as_secs_f64()));
}

fn criterion_2(s: &mut Suite) {
    let (worst, elapsed) = timed(|| {
        let mut r = rng(2);
        let mut worst: f64 = 0.0;
        for traj in [constant_u(), Trajectory::circular_unit(), polynomial_u()] {
            let sc = planar(traj, Some(vec![0.1, -0.05]));
            let sys = build_lifted_system(&sc);
            for _ in 0..50 {
                let t = r.random_range(0.0..20.0);
                let off = r.random_range(0.0..10.0);
                let closed = closed_form_phi(&sc, t, off).phi;
                let numeric = transition_matrix(&sys, t, off, DEFAULT_DT).unwrap().phi;
                worst = worst.max((closed - numeric).amax());
            }
        }
        worst
    });
    s.check("2a", worst <= 1e-6, format!("max |Φ_closed - Φ_numeric| = {worst:.3e} over 150 draws (≤ 1e-6)"));
    s.check("2b", elapsed.as_secs_f64() <= 30.0, format!("runtime {:.2} s (≤ 30 s)", elapsed.as_secs_f64()));
}

fn criterion_3(s: &mut Suite) {
    let sc = bundled("three_beacons");
    let sys = build_lifted_system(&sc);
    let chain = build_chain(&sys, 2, false).unwrap();
    let l = sc.beacons.count();
    let mut rows: Vec<ChainRow> = (0..=l).map(|r| ChainRow::new(0, r)).collect();
    rows.extend((0..=l).map(|r| ChainRow::new(1, r)));
    rows.push(ChainRow::new(2, 0));
    let stacked = chain.stack(&rows).unwrap();
    let m = build_m(&sc);
    let mut r = rng(3);
    let worst = (0..20)
        .map(|_| {
            let t = r.random_range(0.0..30.0);
            (stacked.eval(t).unwrap() - m.eval(t).unwrap()).amax()
        })
        .fold(0.0, f64::max);
    let analytic = chain.provenance().iter().all(|p| format!("{p:?}") == "Analytic");
    s.check(
        "3",
        worst <= 1e-8 && analytic,
        format!("closed-form M vs chain (K = 2, analytic = {analytic}): {worst:.3e} (≤ 1e-8)"),
    );
}

fn criterion_4(s: &mut Suite) {
    let sc = bundled("three_beacons");
    let m = build_m(&sc);
    let mut r = rng(4);
    let worst = (0..100)
        .map(|_| {
            let t = r.random_range(0.0..30.0);
            let off = r.random_range(0.0..10.0);
            let x = DVector::from_fn(7, |_, _| r.random_range(-3.0..3.0));
            let direct = m.eval(t + off).unwrap() * closed_form_phi(&sc, t, off).phi * &x;
            (direct - m_phi_expansion(&sc, t, off, &x)).amax()
        })
        .fold(0.0, f64::max);
    s.check("4", worst <= 1e-8, format!("M Φ x vs expansion over 100 draws: {worst:.3e} (≤ 1e-8)"));
}

fn criterion_5(s: &mut Suite) {
    let mut r = rng(5);
    let base = planar(constant_u(), None);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let l = r.random_range(1..6);
        let pts: Vec<Vec<f64>> =
            (0..l).map(|_| vec![r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)]).collect();
        let beacons = BeaconConfig::new(2, &pts, None).unwrap();
        let x = DVector::from_vec(vec![r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)]);
        let sc = Scenario { beacons: beacons.clone(), ..base.clone() };
        let y = measure(&sc, 0.0, &x);
        worst = worst.max((y.rows(1, l) - beacons.dzt() * &x).amax());
    }
    s.check("5a", worst <= 1e-12, format!("Y[1:] vs D(α)Zᵀx over 100 draws: {worst:.3e} (≤ 1e-12)"));

    let worked = Scenario::try_from(ScenarioFile {
        dim: 2,
        beacons: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        alpha: None,
        trajectory: constant_u(),
        bias: None,
        x0: vec![1.0, 1.0],
        horizon: 1.0,
        dt: 0.01,
        delta: 1.0,
    })
    .unwrap();
    let y = measure(&worked, 0.0, &DVector::from_vec(vec![1.0, 1.0]));
    let expected = DVector::from_vec(vec![1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]);
    let err = (&y - expected).amax();
    s.check("5b", err <= 1e-12, format!("worked case Y = {:?}, error {err:.1e} (≤ 1e-12)", y.as_slice()));
}

fn criterion_6(s: &mut Suite) {
    let mu = |name: &str| {
        let sc = bundled(name);
        pe_check(&sc, &default_grid(&sc, 10)).unwrap()
    };
    let three = mu("three_beacons");
    s.check("6a", three.pass && three.mu >= 1e-3, format!("three_beacons μ = {:.6e} (≥ 1e-3)", three.mu));
    let single = mu("single_beacon_circular_u");
    s.check(
        "6b",
        single.pass && (single.mu - 0.5).abs() <= 1e-3,
        format!("single_beacon_circular_u μ = {:.9} (0.5 ± 1e-3)", single.mu),
    );
    for (id, name) in [("6c", "two_beacons_collinear"), ("6d", "single_beacon_constant_u")] {
        let r = mu(name);
        s.check(id, !r.pass && r.mu <= 1e-10, format!("{name} fails with μ = {:.3e} (≤ 1e-10)", r.mu));
    }
}

fn criterion_7(s: &mut Suite) {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (k, name) in BUNDLED.iter().enumerate() {
        let sc = bundled(name);
        let v = uo_verdict(&sc, &default_grid(&sc, 10), jobs).unwrap();
        let (pass, floor) = if v.pe.pass {
            (v.gramian_min >= 1e-4, "≥ 1e-4")
        } else {
            (v.gramian_min <= 1e-6, "≤ 1e-6")
        };
        s.check(
            &format!("7{}", (b'a' + k as u8) as char),
            pass,
            format!(
                "{name}: PE {}, Gramian min over 10 windows {:.3e} ({floor}), extended {:.3e}",
                if v.pe.pass { "passes" } else { "fails" },
                v.gramian_min,
                v.extended_min
            ),
        );
    }
}

/// The floors above are only meaningful if the scan is resolved: halve the
/// Simpson spacing and the RK4 step and compare.
fn criterion_7_resolution(s: &mut Suite) {
    let sc = bundled("three_beacons");
    let sys = build_lifted_system(&sc);
    let nodes = nodes_for_window(sc.delta);
    let mut worst: f64 = 0.0;
    for t in default_grid(&sc, 10) {
        let base = output_gramian(&sys, sys.c(), t, sc.delta, nodes, DEFAULT_DT).unwrap();
        let fine =
            output_gramian(&sys, sys.c(), t, sc.delta, 2 * nodes - 1, DEFAULT_DT / 2.0).unwrap();
        worst = worst.max((base.min_eigenvalue() - fine.min_eigenvalue()).abs() / fine.min_eigenvalue());
    }
    s.check(
        "7f",
        worst <= 1e-6,
        format!("three_beacons Gramian min eig stable under doubled resolution: rel. change {worst:.3e} (≤ 1e-6)"),
    );
}

fn observer_config(sc: &Scenario, name: &str) -> ltvobs::observer::ObserverConfig {
    let text = std::fs::read_to_string(common::scenario_path(name)).unwrap();
    serde_json::from_str::<ObserverConfigFile>(&text).unwrap().resolve(sc).unwrap()
}

fn criterion_8(s: &mut Suite) {
    let start = Instant::now();
    let sc = bundled("three_beacons");
    let cfg = observer_config(&sc, "reference_observer");
    let trace = run_observer(&sc, &cfg, 0).unwrap();
    let m = convergence_metrics(&trace).unwrap();
    let p0 = &trace.points[0];
    s.check(
        "8a",
        m.final_pos_err <= 1e-3 && m.final_bias_err <= 1e-3 && m.decay_rate > 0.05,
        format!(
            "reference run (offsets {:.2} m, {:.2} m/s): final position {:.3e} m, bias {:.3e} m/s (≤ 1e-3), rate {:.3} 1/s (> 0.05)",
            p0.pos_err, p0.bias_err, m.final_pos_err, m.final_bias_err, m.decay_rate
        ),
    );

    let degenerate = bundled("single_beacon_constant_u");
    let cfg_d = observer_config(&degenerate, "degenerate_observer");
    let trace_d = run_observer(&degenerate, &cfg_d, 0).unwrap();
    // Motion and the only beacon lie on the x axis; y is never excited.
    let perp = |p: &ltvobs::observer::TracePoint| (p.x_hat[1] - p.x[1]).abs();
    let (e0, e_end) = (perp(&trace_d.points[0]), perp(trace_d.points.last().unwrap()));
    s.check(
        "8b",
        e_end >= 0.1 * e0,
        format!("degenerate run keeps {:.1}% of the unexcited error ({e0:.3} -> {e_end:.3}; ≥ 10%)", 100.0 * e_end / e0),
    );

    let csv = |seed| {
        let mut c = cfg.clone();
        c.noise_std = vec![0.01; 3];
        let mut out = Vec::new();
        write_trace_csv(&run_observer(&sc, &c, seed).unwrap(), &mut out).unwrap();
        out
    };
    s.check("8c", csv(3) == csv(3), "seeded noisy runs are byte-identical".into());
    let secs = start.elapsed().as_secs_f64();
    s.check("8d", secs <= 60.0, format!("runtime {secs:.2} s (≤ 60 s)"));
}

fn criterion_9(s: &mut Suite) {
    let c1 = check_c1(&MatrixFn::identity(2), 0.0, 1.0, DEFAULT_NODES).unwrap();
    s.check("9a", c1.pass, format!("C1 on M ≡ I: attained {:.6}", c1.attained));
    let sys = build_counterexample();
    let c1 = check_c1(sys.c(), 0.0, TAU, DEFAULT_NODES).unwrap();
    s.check(
        "9b",
        !c1.pass && c1.attained.abs() <= 1e-12,
        format!("C1 on the projector fails, attained {:.3e}", c1.attained),
    );
    let c2 = check_c2(&sys, sys.c(), 0.0, TAU, 629).unwrap();
    let d = &c2.diagnostics;
    s.check(
        "9c",
        !c2.pass && d.real_spectrum == Some(false) && d.a_constant == Some(true),
        format!("C2 rejects the counterexample on spectrum (eig A = {:?})", d.a_eigenvalues),
    );
    s.check(
        "9d",
        d.integral_clause_pass && (c2.attained - 0.5).abs() <= 1e-6,
        format!("C2 integral clause alone passes with min eig {:.9} (0.5)", c2.attained),
    );
}

fn main() {
    let mut suite = Suite { unexpected: Vec::new() };
    let start = Instant::now();
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_7_resolution(&mut suite);
    criterion_8(&mut suite);
    criterion_9(&mut suite);
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if !suite.unexpected.is_empty() {
        eprintln!("unexpected outcome for: {}", suite.unexpected.join(", "));
        std::process::exit(1);
    }
}
