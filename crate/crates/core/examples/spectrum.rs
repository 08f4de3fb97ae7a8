//! Single- and two-excitation eigenvalues of the three-atom geometry across
//! the medium decay rate, against the closed forms.

use wqed::model::canonical_three_atom;
use wqed::spectral::spectrum_report;

fn main() -> wqed::Result<()> {
    let sys = canonical_three_atom(0.01, 1.0, 0.25)?.validate()?;
    let grid = [0.01, 0.1, 0.3, 0.4, 1.0, 4.0, 7.9, 8.0];
    println!("{:>6} {:>24} {:>24} {:>10}", "gamma", "lambda-", "beta+", "max dev");
    for row in spectrum_report(&sys, &grid)? {
        if let Some(e) = &row.error {
            println!("{:>6} {e}", row.gamma);
            continue;
        }
        let (l, b) = (row.lambda[1], row.beta[0]);
        println!(
            "{:>6} {:>11.6}{:>+12.6}i {:>11.6}{:>+12.6}i {:>10.1e}{}",
            row.gamma,
            l.re,
            l.im,
            b.re,
            b.im,
            row.max_dev,
            if row.beta_sign_change {
                "  <- beta discriminant changes sign"
            } else {
                ""
            }
        );
    }
    Ok(())
}
