//! g²(0) across the probe detuning: master equation against the weak-drive
//! resolvent formula.

use wqed::correlations::{emission_operator, g2_regression, g2_zero_analytic, polariton_detunings};
use wqed::lindblad::{build_liouvillian, steady_state};
use wqed::model::{canonical_three_atom, DriveSpec};
use wqed::subspace::Basis;
use wqed::Error;

fn main() -> wqed::Result<()> {
    let gamma = 0.01;
    let sys = canonical_three_atom(gamma, 1.0, 0.25)?.validate()?;
    let basis = Basis::enumerate(3, None)?;
    let sig = emission_operator(&sys, &basis)?;
    let w = polariton_detunings(&sys)?[0].abs();
    println!("polaritons at +-{w:.5}");
    println!("{:>10} {:>14} {:>14}", "delta", "regression", "analytic");
    for k in -6..=6 {
        let delta = w * k as f64 / 2.0;
        let l = build_liouvillian(&sys, &DriveSpec::new(1e-3 * gamma, delta)?, &basis)?;
        let rho = steady_state(&l)?;
        let reg = g2_regression(&l, &rho, &sig, &[0.0])?.values[0];
        let an = match g2_zero_analytic(&sys, delta) {
            Ok(v) => format!("{v:14.6e}"),
            Err(Error::DivisionUnderflow { .. }) => format!("{:>14}", "pole"),
            Err(e) => return Err(e),
        };
        println!("{delta:>10.5} {reg:>14.6e} {an}");
    }
    Ok(())
}
