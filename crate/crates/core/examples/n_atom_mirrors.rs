//! Mirrors made of N atoms each: collective modes, two-excitation census and
//! the deepest weak-drive g²(0).

use wqed::collective::{collective_modes, polariton_census, two_excitation_census, ModeLabel};
use wqed::correlations::{min_g2_zero, polariton_detunings};
use wqed::model::n_atom_mirror_config;

fn main() -> wqed::Result<()> {
    let gamma = 0.01;
    for n in 1..=3 {
        let sys = n_atom_mirror_config(n, gamma, 1.0)?.validate()?;
        let modes = collective_modes(&sys)?;
        let coupling = modes.coupled_dark().map_or(f64::NAN, |m| m.coupling);
        println!(
            "N={n}: {} bright, {} coupled dark, {} decoupled dark; coupling {coupling:.6} (sqrt(2N gamma) = {:.6})",
            modes.count(ModeLabel::Bright),
            modes.count(ModeLabel::DarkCoupled),
            modes.count(ModeLabel::DarkDecoupled),
            (2.0 * n as f64 * gamma).sqrt()
        );
        if n > 1 {
            let c = two_excitation_census(&sys)?;
            println!("  mirror-only pairs: {} bright, {} dark", c.bright, c.dark);
        }
        let p = polariton_census(&sys)?;
        let pair = p.delta_numeric.map_or("none".to_string(), |d| format!("+-{d:.5}"));
        println!("  full two-excitation states: {}, narrow pair {pair}", p.n_states);
        let w = polariton_detunings(&sys)?[0].abs();
        let (delta, g2) = min_g2_zero(&sys, -3.0 * w, 3.0 * w, 601)?;
        println!("  min g2(0) = {g2:.5} at delta = {delta:.5}");
    }
    Ok(())
}
