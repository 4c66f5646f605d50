//! Critical efficiencies for closing the detection loophole with
//! perfect singlet correlations, for both detector-trust modes.

use diqkd_amplifier::security::{
    eve_info_untrusted, singlet_threshold_trusted, singlet_threshold_untrusted, CHSH_MAX,
};

fn main() -> diqkd_amplifier::Result<()> {
    let analytic = 2.0 / (1.0 + 2f64.sqrt());
    println!("analytic threshold 2/(1+sqrt(2)) = {analytic:.9}");
    println!(
        "untrusted detectors:  eta   > {:.9}",
        singlet_threshold_untrusted()
    );
    for eta_d in [0.5, 0.8, 1.0] {
        println!(
            "trusted (eta_d = {eta_d}): eta_c > {:.9}",
            singlet_threshold_trusted(eta_d)
        );
    }
    println!();
    println!("with trusted detectors only the coupling must clear the");
    println!("threshold: the detector efficiency drops out of the bound.");
    println!();
    println!("key-rate margin 1 - I_E near the untrusted threshold:");
    println!("{:>8} {:>12}", "eta", "margin");
    for d in [-0.02, -0.01, 0.0, 0.01, 0.02] {
        let eta: f64 = analytic + d;
        let mu = 2.0 * (1.0 - eta) / eta;
        let margin = 1.0 - eve_info_untrusted(CHSH_MAX, mu)?;
        println!("{eta:>8.4} {margin:>12.5e}");
    }
    Ok(())
}
