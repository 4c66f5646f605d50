//! Herald probability of the full amplifier circuit against its
//! second-order closed form P_H = (1-t)^2 + p(1-t)^2(1-eta_t) +
//! t(1-t)p eta_t, across transmission and distance.

use diqkd_amplifier::amplifier::{closed_form_ph, run_amplifier, AmplifierParams};
use diqkd_amplifier::security::fiber_transmission;
use diqkd_amplifier::sources::{PairSourceParams, SingleSourceParams};

fn main() -> diqkd_amplifier::Result<()> {
    let p = 2e-3;
    println!("pair probability p = {p}, ideal coupling and detectors");
    println!(
        "{:>6} {:>8} {:>14} {:>14} {:>10}",
        "t", "L_km", "P_H (circuit)", "P_H (closed)", "rel err"
    );
    for t in [0.6, 0.9, 0.98] {
        for l_km in [0.0, 20.0, 60.0] {
            let eta_t = fiber_transmission(l_km, 0.2);
            let params = AmplifierParams {
                t,
                eta_t,
                eta_c: 1.0,
                eta_d: 1.0,
                pair: PairSourceParams::new(p)?,
                single: SingleSourceParams::on_demand(),
            };
            let h = run_amplifier(&params)?;
            let closed = closed_form_ph(t, p, eta_t);
            println!(
                "{t:>6.2} {l_km:>8.1} {:>14.6e} {closed:>14.6e} {:>10.2e}",
                h.p_h,
                (h.p_h - closed).abs() / closed
            );
        }
    }
    println!();
    println!("the closed form drops O(p^2) terms; the circuit keeps them.");
    Ok(())
}
