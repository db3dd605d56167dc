//! The C1 and C2 sufficient conditions on a benign system and on the
//! rotation/projector counterexample.

use std::f64::consts::TAU;

use ltvobs::ltv::{LtvSystem, MatrixFn, DEFAULT_NODES};
use ltvobs::observability::{build_chain, build_counterexample, check_c1, check_c2};
use nalgebra::DMatrix;

fn main() -> ltvobs::Result<()> {
    let identity = MatrixFn::identity(2);
    let c1 = check_c1(&identity, 0.0, 1.0, DEFAULT_NODES)?;
    println!("C1 with M = I: attained {:.3}, pass {}", c1.attained, c1.pass);

    let sys = build_counterexample();
    let c1 = check_c1(sys.c(), 0.0, TAU, DEFAULT_NODES)?;
    println!("C1 on the projector: attained {:.3e}, pass {}", c1.attained, c1.pass);

    let c2 = check_c2(&sys, sys.c(), 0.0, TAU, 629)?;
    println!(
        "C2 on the counterexample: pass {} (real spectrum {:?}, integral clause {} at {:.6})",
        c2.pass, c2.diagnostics.real_spectrum, c2.diagnostics.integral_clause_pass, c2.attained
    );
    for [re, im] in &c2.diagnostics.a_eigenvalues {
        println!("  eig(A) = {re:+.3} {im:+.3}i");
    }

    // A damped system with real spectrum and a constant output passes C2
    // once the chain rows N_0 = C and N_1 = CA are stacked.
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
    let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let damped = LtvSystem::unforced(MatrixFn::constant(a), MatrixFn::constant(c))?;
    let m = build_chain(&damped, 1, false)?.stack_all()?;
    let c2 = check_c2(&damped, &m, 0.0, 1.0, DEFAULT_NODES)?;
    println!("C2 on a damped pair with M = [C; CA]: attained {:.3}, pass {}", c2.attained, c2.pass);
    Ok(())
}
