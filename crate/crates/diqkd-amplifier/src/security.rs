//! Key-rate mathematics: entropies, CHSH-based bounds on the
//! eavesdropper's information for untrusted and trusted detectors, and
//! the per-second key-rate composition.

use crate::error::{Error, Result};

pub const CHSH_MAX: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Tolerated numerical overshoot above the quantum bound.
pub const CHSH_OVERSHOOT: f64 = 1e-9;

/// Binary entropy h(x) = -x log2 x - (1-x) log2 (1-x), with
/// h(0) = h(1) = 0 by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::EntropyDomain(x));
    }
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// χ(S) = h((1 + sqrt((S/2)² - 1))/2), monotone decreasing on
/// [2, 2√2]. Values below 2 clamp to χ = 1 (the bound is vacuous
/// there); values above 2√2 beyond a 1e-9 overshoot are rejected.
pub fn chsh_chi(s: f64) -> Result<f64> {
    if s > CHSH_MAX + CHSH_OVERSHOOT {
        return Err(Error::ChshOutOfRange(s));
    }
    let s = s.min(CHSH_MAX);
    if s <= 2.0 {
        return Ok(1.0);
    }
    let arg = (1.0 + ((s / 2.0).powi(2) - 1.0).sqrt()) / 2.0;
    binary_entropy(arg.min(1.0))
}

/// Collective-attack bound on Eve's information with untrusted
/// detectors: I_E(S, μ) ≤ (1-μ)·χ((S-4μ)/(1-μ)) + μ, where
/// μ = (μ_ci + μ_ic)/μ_cc. Saturates at 1 when the bound is vacuous.
pub fn eve_info_untrusted(s: f64, mu: f64) -> Result<f64> {
    if mu < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inconclusive ratio mu = {mu} negative"
        )));
    }
    if mu >= 1.0 {
        return Ok(1.0);
    }
    let arg = (s - 4.0 * mu) / (1.0 - mu);
    if arg > CHSH_MAX + CHSH_OVERSHOOT {
        return Err(Error::ChshOutOfRange(arg));
    }
    let i = (1.0 - mu) * chsh_chi(arg)? + mu;
    Ok(i.clamp(0.0, 1.0))
}

/// Eve's information with trusted detectors:
/// I_E(δ) ≤ (η_d²·μ~_cc/μ_cc)·I_E(S~, μ~) + (1 - η_d²·μ~_cc/μ_cc).
pub fn eve_info_trusted(
    s_tilde: f64,
    mu_tilde: f64,
    mu_cc: f64,
    mu_tilde_cc: f64,
    eta_d: f64,
) -> Result<f64> {
    let scaled = eta_d * eta_d * mu_tilde_cc;
    if scaled > mu_cc + 1e-12 {
        return Err(Error::InconsistentStatistics { scaled, mu_cc });
    }
    if mu_cc <= 0.0 {
        return Ok(1.0);
    }
    let frac = (scaled / mu_cc).min(1.0);
    let inner = eve_info_untrusted(s_tilde, mu_tilde)?;
    Ok((frac * inner + (1.0 - frac)).clamp(0.0, 1.0))
}

/// Detector-trust analysis mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrustMode {
    Untrusted,
    Trusted,
}

/// Observed statistics entering the key-rate formula.
#[derive(Debug, Clone, Copy)]
pub struct KeyRateInput {
    pub mode: TrustMode,
    pub q: f64,
    /// S for untrusted mode; S~ (on ρ_11) for trusted mode.
    pub s: f64,
    /// μ for untrusted mode; μ~ for trusted mode.
    pub mu: f64,
    pub mu_cc: f64,
    /// μ~_cc (trusted mode only; ignored otherwise).
    pub mu_tilde_cc: f64,
    pub eta_d: f64,
}

/// Composed key-rate result.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KeyRateResult {
    /// Secret bits per second.
    pub k_bits_per_s: f64,
    /// Secret bits per source pulse: P_S²·P_H·μ_cc·(1-h(Q)-I_E), not
    /// clamped (negative values mark infeasibility).
    pub k_per_pulse: f64,
    pub q: f64,
    pub s: f64,
    pub mu: f64,
    pub mu_cc: f64,
    pub i_e: f64,
    pub p_s: f64,
    pub p_h: f64,
    pub feasible: bool,
}

/// Key rate per second: K = r · P_S² · P_H · μ_cc · (1 - h(Q) - I_E).
pub fn key_rate(input: KeyRateInput, r: f64, p_s: f64, p_h: f64) -> Result<KeyRateResult> {
    let i_e = match input.mode {
        TrustMode::Untrusted => eve_info_untrusted(input.s, input.mu)?,
        TrustMode::Trusted => eve_info_trusted(
            input.s,
            input.mu,
            input.mu_cc,
            input.mu_tilde_cc,
            input.eta_d,
        )?,
    };
    let per_conclusive = 1.0 - binary_entropy(input.q.clamp(0.0, 1.0))? - i_e;
    let k_per_pulse = p_s * p_s * p_h * input.mu_cc * per_conclusive;
    let feasible = per_conclusive > 0.0 && input.mu_cc > 0.0 && p_h > 0.0 && p_s > 0.0;
    Ok(KeyRateResult {
        k_bits_per_s: if feasible { r * k_per_pulse } else { 0.0 },
        k_per_pulse,
        q: input.q,
        s: input.s,
        mu: input.mu,
        mu_cc: input.mu_cc,
        i_e,
        p_s,
        p_h,
        feasible,
    })
}

/// Fiber transmission over `l_km` kilometers:
/// η_t = 10^(-attenuation·L/10).
pub fn fiber_transmission(l_km: f64, attenuation_db_per_km: f64) -> f64 {
    10f64.powf(-attenuation_db_per_km * l_km / 10.0)
}

/// Critical detection efficiency for perfect singlet correlations with
/// untrusted detectors: the root of 1 - I_E(2√2, 2(1-η)/η) in η,
/// analytically 2/(1+√2).
pub fn singlet_threshold_untrusted() -> f64 {
    bisect_threshold(|eta| {
        let mu = 2.0 * (1.0 - eta) / eta;
        1.0 - eve_info_untrusted(CHSH_MAX, mu).unwrap_or(1.0)
    })
}

/// Critical coupling efficiency for perfect singlet correlations with
/// trusted detectors of efficiency `eta_d`: the root of
/// 1 - I_E(δ) with S~ = 2√2, μ~ = 2(1-η_c)/η_c, μ~_cc = η_c²,
/// μ_cc = η_d²·η_c². Independent of η_d.
pub fn singlet_threshold_trusted(eta_d: f64) -> f64 {
    bisect_threshold(|eta_c| {
        let mu_tilde = 2.0 * (1.0 - eta_c) / eta_c;
        let mu_tilde_cc = eta_c * eta_c;
        let mu_cc = eta_d * eta_d * mu_tilde_cc;
        1.0 - eve_info_trusted(CHSH_MAX, mu_tilde, mu_cc, mu_tilde_cc, eta_d).unwrap_or(1.0)
    })
}

/// Bisection for the efficiency where a margin function crosses zero;
/// the margin must be increasing in its argument on (0, 1].
fn bisect_threshold<F: Fn(f64) -> f64>(margin: F) -> f64 {
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
