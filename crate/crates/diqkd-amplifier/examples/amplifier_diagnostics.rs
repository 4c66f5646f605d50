//! Full diagnostic dump of one amplifier operating point: herald
//! probability, photon-number weights P_ij, conclusive probabilities,
//! QBER, CHSH values, and both security decompositions.
//!
//! Run with: cargo run --release --example amplifier_diagnostics

use diqkd_amplifier::amplifier::{run_amplifier, AmplifierParams};
use diqkd_amplifier::measurement::{
    closed_form_mu, closed_form_qs, sector_stats, trusted_statistics,
};
use diqkd_amplifier::security::{eve_info_trusted, eve_info_untrusted, fiber_transmission};
use diqkd_amplifier::sources::{PairSourceParams, SingleSourceParams};

fn main() -> diqkd_amplifier::Result<()> {
    let eta_d = 0.8;
    let l_km = 10.0;
    let params = AmplifierParams {
        t: 0.97,
        eta_t: fiber_transmission(l_km, 0.2),
        eta_c: 0.9,
        eta_d,
        pair: PairSourceParams::new(7e-3)?,
        single: SingleSourceParams::heralded(4e-3, eta_d)?,
    };
    let h = run_amplifier(&params)?;

    println!("P_H = {:.6e}", h.p_h);
    println!("P_ij (rows: Alice photons 0..2, cols: Bob photons 0..2):");
    for i in 0..3 {
        println!(
            "  {:.6e}  {:.6e}  {:.6e}",
            h.p(i, 0),
            h.p(i, 1),
            h.p(i, 2)
        );
    }

    let (mu_cc, mu_ci, mu_ic) = closed_form_mu(&h.p_ij, eta_d);
    let mu = (mu_ci + mu_ic) / mu_cc;
    let (q, s) = closed_form_qs(&h, eta_d);
    println!("mu_cc = {mu_cc:.6e}  mu_ci = {mu_ci:.6e}  mu_ic = {mu_ic:.6e}");
    println!("mu = {mu:.6e}  Q = {q:.6e}  S = {s:.6e}");
    println!(
        "untrusted I_E = {:.6e}",
        eve_info_untrusted(s, mu)?
    );

    let ts = trusted_statistics(&h, eta_d);
    println!(
        "trusted: mu~_cc = {:.6e}  mu~ = {:.6e}  S~ = {:.6e}",
        ts.mu_tilde_cc, ts.mu_tilde, ts.s_tilde
    );
    println!(
        "fraction eta_d^2 mu~_cc / mu_cc = {:.6e}",
        eta_d * eta_d * ts.mu_tilde_cc / mu_cc
    );
    println!(
        "trusted I_E = {:.6e}",
        eve_info_trusted(ts.s_tilde, ts.mu_tilde, mu_cc, ts.mu_tilde_cc, eta_d)?
    );
    if let Some(rho11) = h.rho(1, 1) {
        let st = sector_stats(rho11);
        println!("rho_11 sector: Q|cc = {:.6e}  S|cc = {:.6e}", st.q_cond, st.s_cond);
    }
    Ok(())
}
