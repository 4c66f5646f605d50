//! Ideal single-shot amplification: how the beamsplitter transmission t
//! trades success probability against vacuum suppression.
//!
//! The input is alpha|0> + beta|1> with perfect auxiliary photons and
//! detectors. Conditioned on the herald the qubit amplitude gains
//! sqrt(t/(1-t)) relative to vacuum.

use diqkd_amplifier::amplifier::ideal_amplify;
use diqkd_amplifier::fock::{Occupation, OUT_H};

fn main() -> diqkd_amplifier::Result<()> {
    let (alpha, beta) = (0.8, 0.6);
    println!("input: alpha = {alpha}, beta = {beta} (|beta|^2 = {:.2})", beta * beta);
    println!("{:>6} {:>12} {:>14} {:>10}", "t", "P_success", "P(1)|herald", "gain");
    for t in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99] {
        let (p_succ, out) = ideal_amplify(alpha, beta, 0.0, t)?;
        let norm = out.norm_sq();
        let p1 = out.amplitude(&Occupation::single(OUT_H)).norm_sqr() / norm;
        let gain = (p1 / (1.0 - p1)) / (beta * beta / (alpha * alpha));
        println!("{t:>6.2} {p_succ:>12.6} {p1:>14.6} {gain:>10.3}");
    }
    println!();
    println!("t = 1/2 is the teleportation identity: the output qubit");
    println!("equals the input and the success probability is 1/4.");
    Ok(())
}
