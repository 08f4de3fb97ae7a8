//! How strongly the weak drive feeds each two-excitation eigenstate, against
//! that state's decay rate.

use wqed::correlations::zeno_diagnostics;
use wqed::model::canonical_three_atom;
use wqed::spectral::closed_form_single;

fn main() -> wqed::Result<()> {
    for gamma in [0.001, 0.01, 0.1] {
        let sys = canonical_three_atom(gamma, 1.0, 0.25)?.validate()?;
        let delta = closed_form_single(gamma, 1.0).1.re;
        let z = zeno_diagnostics(&sys, delta)?;
        println!(
            "gamma = {gamma}, delta = {delta:.5}, |e_p,B> amplitude {:.1e}",
            z.ep_bright_amplitude
        );
        for (name, s) in ["beta+", "beta-", "beta3"].iter().zip(&z.states) {
            println!(
                "  {name:<6} {:>10.5}{:+.5}i  feed {:.4e}  feed/|Im| {:.4e}",
                s.eigenvalue.0, s.eigenvalue.1, s.drive_in, s.ratio
            );
        }
        println!(
            "  with eps = 1e-3 gamma: eps^2 feed/|Im beta+| = {:.2e}",
            z.drive_scaled_ratio(1e-3 * gamma)
        );
    }
    Ok(())
}
