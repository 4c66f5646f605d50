//! CHSH and QBER statistics.
//!
//! The "2+3 bases" protocol: Alice measures one of x0 = σ_z,
//! x1 = (σ_z+σ_x)/√2, x2 = (σ_z-σ_x)/√2; Bob measures y1 = σ_z or
//! y2 = σ_x. Each setting is realized as a polarization rotation by
//! half the Bloch angle followed by h/v detection (h clicks map to
//! outcome +1, v clicks to -1). A side's round is conclusive when
//! exactly one photon is detected on that side.

use std::collections::BTreeMap;

use crate::amplifier::{HeraldedState, ALICE_SPATIAL, BOB_SPATIAL};
use crate::error::Result;
use crate::fock::{Ensemble, A_H, A_V, OUT_H, OUT_V};

/// Alice's measurement settings and their rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliceSetting {
    X0,
    X1,
    X2,
}

/// Bob's measurement settings and their rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobSetting {
    Y1,
    Y2,
}

impl AliceSetting {
    pub fn angle(self) -> f64 {
        use std::f64::consts::FRAC_PI_8;
        match self {
            AliceSetting::X0 => 0.0,
            AliceSetting::X1 => FRAC_PI_8,
            AliceSetting::X2 => -FRAC_PI_8,
        }
    }

    pub const ALL: [AliceSetting; 3] = [AliceSetting::X0, AliceSetting::X1, AliceSetting::X2];
}

impl BobSetting {
    pub fn angle(self) -> f64 {
        use std::f64::consts::FRAC_PI_4;
        match self {
            BobSetting::Y1 => 0.0,
            BobSetting::Y2 => FRAC_PI_4,
        }
    }

    pub const ALL: [BobSetting; 2] = [BobSetting::Y1, BobSetting::Y2];
}

/// The settings pair the raw key is extracted from.
pub const RAW_KEY_SETTINGS: (AliceSetting, BobSetting) = (AliceSetting::X0, BobSetting::Y1);

/// The four settings pairs entering the CHSH sum, with their signs.
pub const CHSH_TERMS: [(AliceSetting, BobSetting, f64); 4] = [
    (AliceSetting::X1, BobSetting::Y1, 1.0),
    (AliceSetting::X1, BobSetting::Y2, 1.0),
    (AliceSetting::X2, BobSetting::Y1, 1.0),
    (AliceSetting::X2, BobSetting::Y2, -1.0),
];

/// Outcome index: 0 = +1, 1 = -1, 2 = inconclusive.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const INCONCLUSIVE: usize = 2;

/// Joint outcome distribution for one settings pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct JointDist {
    /// p[a][b] with outcome indices +1, -1, inconclusive.
    pub p: [[f64; 3]; 3],
}

impl JointDist {
    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    /// Probability of a conclusive result on both sides.
    pub fn mu_cc(&self) -> f64 {
        self.p[PLUS][PLUS] + self.p[PLUS][MINUS] + self.p[MINUS][PLUS] + self.p[MINUS][MINUS]
    }

    /// Conclusive on Alice's side only.
    pub fn mu_ci(&self) -> f64 {
        self.p[PLUS][INCONCLUSIVE] + self.p[MINUS][INCONCLUSIVE]
    }

    /// Conclusive on Bob's side only.
    pub fn mu_ic(&self) -> f64 {
        self.p[INCONCLUSIVE][PLUS] + self.p[INCONCLUSIVE][MINUS]
    }

    /// Unnormalized correlator P(a=b, cc) - P(a≠b, cc).
    pub fn raw_correlator(&self) -> f64 {
        self.p[PLUS][PLUS] + self.p[MINUS][MINUS] - self.p[PLUS][MINUS] - self.p[MINUS][PLUS]
    }

    /// Unnormalized disagreement probability P(a≠b, cc).
    pub fn raw_error(&self) -> f64 {
        self.p[PLUS][MINUS] + self.p[MINUS][PLUS]
    }
}

/// Per-side detection outcome probabilities for number-resolving
/// detectors of efficiency `eta` given `n_plus` photons in the +1
/// channel and `n_minus` in the -1 channel. Conclusive means exactly
/// one photon detected on the side.
fn thin_side(n_plus: u32, n_minus: u32, eta: f64) -> [f64; 3] {
    let n = n_plus + n_minus;
    if n == 0 {
        return [0.0, 0.0, 1.0];
    }
    // exactly one detected overall, landing in a given channel:
    // n_ch * eta * (1-eta)^(n-1)
    let one = eta * (1.0 - eta).powi(n as i32 - 1);
    let p_plus = n_plus as f64 * one;
    let p_minus = n_minus as f64 * one;
    [p_plus, p_minus, 1.0 - p_plus - p_minus]
}

/// Occupancy distribution over the four measured channels
/// (alice +, alice -, bob +, bob -) after rotating each side into its
/// measurement basis. Weights are unnormalized (they sum to the
/// ensemble mass).
fn channel_occupancy(
    state: &Ensemble,
    alice_angle: f64,
    bob_angle: f64,
) -> BTreeMap<[u32; 4], f64> {
    let mut dist: BTreeMap<[u32; 4], f64> = BTreeMap::new();
    for b in state.branches() {
        let ket = b
            .ket
            .rotate_polarization(ALICE_SPATIAL, alice_angle)
            .rotate_polarization(BOB_SPATIAL, bob_angle);
        for (occ, amp) in ket.terms() {
            let key = [
                occ.get(A_H) as u32,
                occ.get(A_V) as u32,
                occ.get(OUT_H) as u32,
                occ.get(OUT_V) as u32,
            ];
            *dist.entry(key).or_insert(0.0) += b.weight * amp.norm_sqr();
        }
    }
    dist
}

/// Brute-force joint outcome distribution for one settings pair:
/// rotate, enumerate detector click patterns with η_d-efficient
/// number-resolving detectors, classify conclusive = exactly one click
/// per side. Normalized over the state's mass.
pub fn joint_outcomes(
    state: &Ensemble,
    alice: AliceSetting,
    bob: BobSetting,
    eta_d: f64,
) -> JointDist {
    let mass = state.total_mass();
    let mut out = JointDist::default();
    if mass <= 0.0 {
        return out;
    }
    for (occ, w) in channel_occupancy(state, alice.angle(), bob.angle()) {
        let pa = thin_side(occ[0], occ[1], eta_d);
        let pb = thin_side(occ[2], occ[3], eta_d);
        for a in 0..3 {
            for b in 0..3 {
                out.p[a][b] += w / mass * pa[a] * pb[b];
            }
        }
    }
    out
}

/// Full click statistics of a heralded state: joint distributions for
/// every settings pair, the conclusive probabilities, Q and S.
#[derive(Debug, Clone)]
pub struct ClickStats {
    pub dists: Vec<(AliceSetting, BobSetting, JointDist)>,
    pub mu_cc: f64,
    pub mu_ci: f64,
    pub mu_ic: f64,
    /// Largest spread of mu_cc across settings pairs; the physical
    /// model makes the conclusive probabilities setting-independent and
    /// this is checked rather than assumed.
    pub mu_spread: f64,
    pub q: f64,
    pub s: f64,
}

/// Brute-force detection oracle over all settings pairs.
pub fn click_statistics(heralded: &HeraldedState, eta_d: f64) -> ClickStats {
    let mut dists = Vec::new();
    for a in AliceSetting::ALL {
        for b in BobSetting::ALL {
            dists.push((a, b, joint_outcomes(&heralded.state, a, b, eta_d)));
        }
    }
    let find = |a: AliceSetting, b: BobSetting| -> &JointDist {
        &dists.iter().find(|(x, y, _)| *x == a && *y == b).unwrap().2
    };

    let mu_cc_all: Vec<f64> = dists.iter().map(|(_, _, d)| d.mu_cc()).collect();
    let mu_cc = mu_cc_all.iter().sum::<f64>() / mu_cc_all.len() as f64;
    let mu_spread = mu_cc_all
        .iter()
        .map(|m| (m - mu_cc).abs())
        .fold(0.0, f64::max);
    let mu_ci = dists.iter().map(|(_, _, d)| d.mu_ci()).sum::<f64>() / dists.len() as f64;
    let mu_ic = dists.iter().map(|(_, _, d)| d.mu_ic()).sum::<f64>() / dists.len() as f64;

    let raw = find(RAW_KEY_SETTINGS.0, RAW_KEY_SETTINGS.1);
    let q = if mu_cc > 0.0 {
        raw.raw_error() / mu_cc
    } else {
        0.0
    };
    let s = if mu_cc > 0.0 {
        CHSH_TERMS
            .iter()
            .map(|&(a, b, sign)| sign * find(a, b).raw_correlator() / mu_cc)
            .sum()
    } else {
        0.0
    };

    ClickStats {
        dists,
        mu_cc,
        mu_ci,
        mu_ic,
        mu_spread,
        q,
        s,
    }
}

/// Closed-form conclusive probabilities from the photon-number weights
/// P_ij and the detector efficiency.
pub fn closed_form_mu(p_ij: &[[f64; 3]; 3], eta_d: f64) -> (f64, f64, f64) {
    let e = eta_d;
    let r = 1.0 - eta_d;
    let mu_cc = e * e * p_ij[1][1]
        + 2.0 * r * e * e * (p_ij[2][1] + p_ij[1][2])
        + 4.0 * e * e * r * r * p_ij[2][2];
    let mu_ci = e * p_ij[1][0]
        + e * r * p_ij[1][1]
        + 2.0 * e * r * r * p_ij[2][1]
        + (e * e * e + e * r * r) * p_ij[1][2]
        + 2.0 * e * r * p_ij[2][0]
        + (2.0 * e * e * e * r + 2.0 * e * r * r * r) * p_ij[2][2];
    let mu_ic = e * p_ij[0][1]
        + e * r * p_ij[1][1]
        + 2.0 * e * r * r * p_ij[1][2]
        + (e * e * e + e * r * r) * p_ij[2][1]
        + 2.0 * e * r * p_ij[0][2]
        + (2.0 * e * e * e * r + 2.0 * e * r * r * r) * p_ij[2][2];
    (mu_cc, mu_ci, mu_ic)
}

/// Conclusive-conditioned outcome distribution of one (i, j) sector for
/// one settings pair: P(a, b | both sides conclusive). For
/// number-resolving detectors the conditional outcome is detector-
/// efficiency independent: given exactly one detected photon out of
/// (n+, n-) on a side, it came from the + channel with probability
/// n+/(n+ + n-).
fn sector_conditional(
    rho: &Ensemble,
    alice: AliceSetting,
    bob: BobSetting,
) -> [[f64; 2]; 2] {
    let mass = rho.total_mass();
    let mut p = [[0.0; 2]; 2];
    if mass <= 0.0 {
        return p;
    }
    for (occ, w) in channel_occupancy(rho, alice.angle(), bob.angle()) {
        let na = occ[0] + occ[1];
        let nb = occ[2] + occ[3];
        if na == 0 || nb == 0 {
            continue;
        }
        let pa = [occ[0] as f64 / na as f64, occ[1] as f64 / na as f64];
        let pb = [occ[2] as f64 / nb as f64, occ[3] as f64 / nb as f64];
        for a in 0..2 {
            for b in 0..2 {
                p[a][b] += w / mass * pa[a] * pb[b];
            }
        }
    }
    p
}

/// Per-sector QBER and CHSH contributions extracted operationally.
#[derive(Debug, Clone, Copy, Default)]
pub struct SectorStats {
    /// P(a≠b | conclusive-conclusive) at the raw-key settings.
    pub q_cond: f64,
    /// CHSH value of the conclusive-conditioned correlators.
    pub s_cond: f64,
}

/// Extracts the conclusive-conditioned QBER and CHSH of one sector.
pub fn sector_stats(rho: &Ensemble) -> SectorStats {
    let raw = sector_conditional(rho, RAW_KEY_SETTINGS.0, RAW_KEY_SETTINGS.1);
    let q_cond = raw[0][1] + raw[1][0];
    let s_cond = CHSH_TERMS
        .iter()
        .map(|&(a, b, sign)| {
            let p = sector_conditional(rho, a, b);
            sign * (p[0][0] + p[1][1] - p[0][1] - p[1][0])
        })
        .sum();
    SectorStats { q_cond, s_cond }
}

/// Closed-form Q and S: per-sector conditional values combined with the
/// η_d-weighted coefficients of the detection combinatorics.
pub fn closed_form_qs(heralded: &HeraldedState, eta_d: f64) -> (f64, f64) {
    let (mu_cc, _, _) = closed_form_mu(&heralded.p_ij, eta_d);
    if mu_cc <= 0.0 {
        return (0.0, 0.0);
    }
    let e = eta_d;
    let r = 1.0 - eta_d;
    let coeff = |i: u32, j: u32| -> f64 {
        match (i, j) {
            (1, 1) => e * e,
            (1, 2) | (2, 1) => 2.0 * e * e * r,
            (2, 2) => 4.0 * e * e * r * r,
            _ => 0.0,
        }
    };
    let mut q = 0.0;
    let mut s = 0.0;
    for i in 1..=2u32 {
        for j in 1..=2u32 {
            let c = coeff(i, j);
            let p = heralded.p(i as usize, j as usize);
            if c == 0.0 || p <= 0.0 {
                continue;
            }
            if let Some(rho) = heralded.rho(i, j) {
                let st = sector_stats(rho);
                q += c * p * st.q_cond;
                s += c * p * st.s_cond;
            }
        }
    }
    (q / mu_cc, s / mu_cc)
}

/// Trusted-detector statistics: emitted-photon channel-count
/// probabilities γ, detected-click probabilities δ derived from γ by
/// binomial thinning, the single-photon conclusive probabilities μ~,
/// and the CHSH value S~ computed on ρ_11 with perfect detection.
#[derive(Debug, Clone)]
pub struct TrustedStats {
    /// γ_{jk,lm}: probability that j photons are emitted in Alice's +1
    /// channel, k in her -1 channel, l in Bob's +1, m in Bob's -1
    /// (at the raw-key settings).
    pub gamma: BTreeMap<[u32; 4], f64>,
    /// δ_{jk,lm}: probability of observing (jk, lm) clicks.
    pub delta: BTreeMap<[u32; 4], f64>,
    pub mu_tilde_cc: f64,
    pub mu_tilde_ci: f64,
    pub mu_tilde_ic: f64,
    /// (μ~_ci + μ~_ic)/μ~_cc.
    pub mu_tilde: f64,
    /// CHSH on the normalized single-photon sector.
    pub s_tilde: f64,
}

/// Probability to detect n photons when n' were produced in a channel.
fn p_detect(n: u32, n_prime: u32, eta_d: f64) -> f64 {
    if n > n_prime {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..n {
        c *= (n_prime - i) as f64 / (i + 1) as f64;
    }
    c * eta_d.powi(n as i32) * (1.0 - eta_d).powi((n_prime - n) as i32)
}

pub fn trusted_statistics(heralded: &HeraldedState, eta_d: f64) -> TrustedStats {
    let state = heralded.state.normalized();
    let (alice, bob) = RAW_KEY_SETTINGS;
    let gamma_raw = channel_occupancy(&state, alice.angle(), bob.angle());
    let mut gamma: BTreeMap<[u32; 4], f64> = BTreeMap::new();
    for (occ, w) in gamma_raw {
        *gamma.entry(occ).or_insert(0.0) += w;
    }

    let mut delta: BTreeMap<[u32; 4], f64> = BTreeMap::new();
    for (&emitted, &g) in &gamma {
        for j in 0..=emitted[0] {
            for k in 0..=emitted[1] {
                for l in 0..=emitted[2] {
                    for m in 0..=emitted[3] {
                        let p = p_detect(j, emitted[0], eta_d)
                            * p_detect(k, emitted[1], eta_d)
                            * p_detect(l, emitted[2], eta_d)
                            * p_detect(m, emitted[3], eta_d);
                        if p > 0.0 {
                            *delta.entry([j, k, l, m]).or_insert(0.0) += g * p;
                        }
                    }
                }
            }
        }
    }

    let p = &heralded.p_ij;
    let mu_tilde_cc = p[1][1];
    let mu_tilde_ci = p[1][0] + p[1][2];
    let mu_tilde_ic = p[0][1] + p[2][1];
    let mu_tilde = if mu_tilde_cc > 0.0 {
        (mu_tilde_ci + mu_tilde_ic) / mu_tilde_cc
    } else {
        f64::INFINITY
    };
    let s_tilde = heralded
        .rho(1, 1)
        .map(|rho| sector_stats(rho).s_cond)
        .unwrap_or(0.0);

    TrustedStats {
        gamma,
        delta,
        mu_tilde_cc,
        mu_tilde_ci,
        mu_tilde_ic,
        mu_tilde,
        s_tilde,
    }
}

/// Photon-distinguishability noise model: Hong-Ou-Mandel visibility V
/// maps to fidelity F = (1 + V³)/2 and the heralded entangled
/// components acquire a phase-noise admixture, realized as a π phase on
/// Bob's vertical mode with probability 1 - F. The sector weights P_ij
/// are unchanged.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityModel {
    pub v: f64,
    pub f: f64,
}

impl VisibilityModel {
    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "visibility V = {v} outside [0, 1]"
            )));
        }
        Ok(VisibilityModel {
            v,
            f: (1.0 + v.powi(3)) / 2.0,
        })
    }
}

pub fn apply_visibility(heralded: &HeraldedState, model: VisibilityModel) -> Result<HeraldedState> {
    if model.f >= 1.0 {
        return Ok(heralded.clone());
    }
    let f = model.f;
    heralded.map_branches(|w, ket| {
        vec![
            (w * f, ket.clone()),
            (w * (1.0 - f), ket.phase_flip(OUT_V)),
        ]
    })
}
