//! Side-by-side comparison of the untrusted- and trusted-detector
//! security analyses on the same heralded state.

use diqkd_amplifier::amplifier::{run_amplifier, AmplifierParams};
use diqkd_amplifier::measurement::{closed_form_mu, closed_form_qs, trusted_statistics};
use diqkd_amplifier::security::{eve_info_trusted, eve_info_untrusted, fiber_transmission};
use diqkd_amplifier::sources::{PairSourceParams, SingleSourceParams};

fn main() -> diqkd_amplifier::Result<()> {
    let eta_d = 0.8;
    println!("eta_d = {eta_d}, eta_c = 0.9, p = 7e-3, p' = 4e-3, t = 0.97");
    println!(
        "{:>6} {:>8} {:>8} {:>10} {:>8} {:>8} {:>10}",
        "L_km", "S", "mu", "I_E(untr)", "S~", "mu~", "I_E(trust)"
    );
    for l_km in [5.0, 20.0, 50.0] {
        let params = AmplifierParams {
            t: 0.97,
            eta_t: fiber_transmission(l_km, 0.2),
            eta_c: 0.9,
            eta_d,
            pair: PairSourceParams::new(7e-3)?,
            single: SingleSourceParams::heralded(4e-3, eta_d)?,
        };
        let h = run_amplifier(&params)?;
        let (mu_cc, mu_ci, mu_ic) = closed_form_mu(&h.p_ij, eta_d);
        let mu = (mu_ci + mu_ic) / mu_cc;
        let (_, s) = closed_form_qs(&h, eta_d);
        let i_u = eve_info_untrusted(s, mu)?;
        let ts = trusted_statistics(&h, eta_d);
        let i_t = eve_info_trusted(ts.s_tilde, ts.mu_tilde, mu_cc, ts.mu_tilde_cc, eta_d)?;
        println!(
            "{l_km:>6.1} {s:>8.4} {mu:>8.4} {i_u:>10.4} {:>8.4} {:>8.4} {i_t:>10.4}",
            ts.s_tilde, ts.mu_tilde
        );
    }
    println!();
    println!("with eta_d = 0.8 the untrusted bound concedes everything");
    println!("(I_E = 1): the raw CHSH value never exceeds the local bound");
    println!("once detection losses enter the boxes. The trusted analysis");
    println!("conditions on the detectors' known thinning and recovers a");
    println!("violation on the single-photon sector.");
    Ok(())
}
