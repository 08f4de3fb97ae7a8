//! Independent cross-checks: long-time integration, the mode-basis
//! reduction and the resolvent g²(0).

use wqed::model::{canonical_three_atom, DriveSpec};
use wqed::oracle::{eq4_reduction_check, g2_cross_validation, steady_state_check};

fn main() -> wqed::Result<()> {
    let gamma = 0.05;
    let sys = canonical_three_atom(gamma, 1.0, 0.25)?.validate()?;
    let w = (2.0 * gamma).sqrt();
    let mut reports = vec![eq4_reduction_check(gamma, 1.0, 0.25)?];
    for delta in [-w, 0.0, w] {
        reports.push(steady_state_check(
            "steady",
            &sys,
            &DriveSpec::new(1e-3 * gamma, delta)?,
        )?);
    }
    reports.extend(g2_cross_validation(
        "g2",
        &sys,
        &[-1.5 * w, -w, 0.0, 0.5 * w],
        1e-3 * gamma,
    )?);
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{failed} of {} checks failed", reports.len());
    Ok(())
}
