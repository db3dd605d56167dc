//! A rotating projector output whose averaged `CᵀC` is positive definite
//! while the observability Gramian stays singular on every window.

use std::f64::consts::TAU;

use ltvobs::observability::{analytic_m_integral_min_eig, counterexample_report, witness};

fn main() -> ltvobs::Result<()> {
    let x = witness();
    println!("witness x = ({}, {})", x[0], x[1]);
    println!("{:>10} {:>14} {:>14} {:>14}", "delta", "min eig W", "min eig avg", "analytic");
    for e in counterexample_report(&[0.5, 1.0, TAU, 10.0, 25.0])? {
        println!(
            "{:>10.4} {:>14.3e} {:>14.6} {:>14.6}   weakest = ({:+.6}, {:+.6})",
            e.delta,
            e.gramian_min_eig,
            e.m_integral_min_eig,
            analytic_m_integral_min_eig(e.delta),
            e.witness[0],
            e.witness[1],
        );
    }
    Ok(())
}
