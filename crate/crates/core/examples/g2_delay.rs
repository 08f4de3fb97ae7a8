//! g²(τ) at the lower polariton for two mirror offsets and two medium decay
//! rates, with the delay at which g² first climbs back to 0.8.

use wqed::correlations::{emission_operator, g2_regression, polariton_detunings};
use wqed::lindblad::{build_liouvillian, steady_state};
use wqed::model::{canonical_three_atom, DriveSpec};
use wqed::subspace::Basis;

fn main() -> wqed::Result<()> {
    let taus: Vec<f64> = (0..=6000).map(|k| k as f64 * 0.5).collect();
    let basis = Basis::enumerate(3, None)?;
    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>10} {:>10}",
        "gamma", "d", "delta", "g2(0)", "min", "recovery"
    );
    for (gamma, d) in [(0.01, 0.25), (0.01, 0.1), (0.02, 0.25), (0.02, 0.1)] {
        let sys = canonical_three_atom(gamma, 1.0, d)?.validate()?;
        let delta = polariton_detunings(&sys)?[0];
        let l = build_liouvillian(&sys, &DriveSpec::new(1e-3 * gamma, delta)?, &basis)?;
        let rho = steady_state(&l)?;
        let curve = g2_regression(&l, &rho, &emission_operator(&sys, &basis)?, &taus)?;
        let recovery = curve.first_crossing(0.8).map_or("-".to_string(), |t| format!("{t:.1}"));
        println!(
            "{gamma:>6} {d:>6} {delta:>10.5} {:>10.4} {:>10.3e} {recovery:>10}",
            curve.values[0],
            curve.min()
        );
    }
    Ok(())
}
