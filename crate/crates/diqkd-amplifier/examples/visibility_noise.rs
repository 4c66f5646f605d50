//! Photon-distinguishability noise: Hong-Ou-Mandel visibility V maps to
//! heralded-state fidelity F = (1 + V^3)/2, and the CHSH value of the
//! entangled sector scales accordingly.

use diqkd_amplifier::measurement::VisibilityModel;
use diqkd_amplifier::optimizer::{evaluate_keyrate, Scenario};
use diqkd_amplifier::security::TrustMode;
use diqkd_amplifier::sources::SingleSourceKind;

fn main() -> diqkd_amplifier::Result<()> {
    let scenario = |v: f64| Scenario {
        trust: TrustMode::Untrusted,
        source: SingleSourceKind::Heralded,
        eta_c: 0.9,
        eta_d: 0.95,
        visibility: v,
        rep_rate_hz: 1e10,
        attenuation_db_per_km: 0.2,
        amplifier_enabled: true,
    };
    let l_km = 10.0;
    let (p, p_prime, t) = (3e-3, 4.3e-3, 0.984);
    println!("fixed operating point at {l_km} km: p = {p}, p' = {p_prime}, t = {t}");
    println!("{:>8} {:>8} {:>8} {:>8} {:>14}", "V", "F", "S", "Q", "K (bit/s)");
    for v in [1.0, 0.998, 0.994, 0.99, 0.98, 0.95] {
        let f = VisibilityModel::new(v)?.f;
        let r = evaluate_keyrate(&scenario(v), l_km, p, p_prime, t)?;
        println!(
            "{v:>8.3} {f:>8.5} {:>8.4} {:>8.5} {:>14.4e}",
            r.s, r.q, r.k_bits_per_s
        );
    }
    println!();
    println!("the untrusted bound pays twice: the Bell violation shrinks");
    println!("and the error correction cost h(Q) grows. At this fixed");
    println!("operating point the key dies below V = 0.998; re-optimizing");
    println!("(p, p', t) per visibility recovers a positive rate at 0.994.");
    Ok(())
}
