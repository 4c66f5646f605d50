//! Key-rate maximization over the source and beamsplitter parameters
//! (p, p', t), distance sweeps, and maximum-distance finders.
//!
//! The search is a coarse log/linear grid followed by Nelder-Mead
//! refinement started from the best grid cell; both stages are
//! deterministic, and grid evaluations run in parallel with an ordered
//! reduction so results do not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplifier::{run_amplifier, AmplifierParams, HeraldedState};
use crate::error::{Error, Result};
use crate::fock::{Spatial, A_H, A_V, B_H, B_V, OUT_H, OUT_V};
use crate::measurement::{
    apply_visibility, closed_form_mu, closed_form_qs, sector_stats, VisibilityModel,
};
use crate::security::{
    fiber_transmission, key_rate, KeyRateInput, KeyRateResult, TrustMode,
};
use crate::sources::{pdc_entangled_state, PairSourceParams, SingleSourceKind, SingleSourceParams};

/// Search bounds for the pair probabilities (log-spaced).
pub const P_MIN: f64 = 1e-5;
pub const P_MAX: f64 = 5e-2;
/// Search bounds for the beamsplitter transmission.
pub const T_MIN: f64 = 0.5;
pub const T_MAX: f64 = 0.9999;

const GRID_P: usize = 12;
const GRID_T: usize = 24;

/// Full physical configuration of one deployment scenario.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scenario {
    #[serde(serialize_with = "ser_trust")]
    pub trust: TrustMode,
    #[serde(serialize_with = "ser_source")]
    pub source: SingleSourceKind,
    pub eta_c: f64,
    pub eta_d: f64,
    pub visibility: f64,
    pub rep_rate_hz: f64,
    pub attenuation_db_per_km: f64,
    pub amplifier_enabled: bool,
}

fn ser_trust<S: serde::Serializer>(t: &TrustMode, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match t {
        TrustMode::Untrusted => "untrusted",
        TrustMode::Trusted => "trusted",
    })
}

fn ser_source<S: serde::Serializer>(
    k: &SingleSourceKind,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match k {
        SingleSourceKind::Heralded => "heralded",
        SingleSourceKind::OnDemand => "ondemand",
    })
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_c", self.eta_c),
            ("eta_d", self.eta_d),
            ("visibility", self.visibility),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.rep_rate_hz <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "repetition rate {} must be positive",
                self.rep_rate_hz
            )));
        }
        if self.attenuation_db_per_km < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "attenuation {} must be non-negative",
                self.attenuation_db_per_km
            )));
        }
        Ok(())
    }
}

/// One optimized operating point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizationResult {
    pub l_km: f64,
    pub p: f64,
    pub p_prime: Option<f64>,
    pub t: Option<f64>,
    pub result: KeyRateResult,
    /// True when the optimum sits on the edge of the p/p' search range.
    pub boundary_hit: bool,
}

/// Direct transmission without the amplifier: the pair source sits at
/// Alice's location and mode b travels the fiber. The channel loss is
/// split symmetrically, √η_t per side, so the detection-loophole
/// threshold appears at √η_t·η_d·η_c exactly.
fn direct_state(p: f64, eta_c: f64, eta_t: f64) -> Result<HeraldedState> {
    let pdc = pdc_entangled_state(PairSourceParams::new(p)?, 4)?;
    let eta_eff = eta_c * eta_t.sqrt();
    let mut state = pdc;
    for m in [A_H, A_V, B_H, B_V] {
        state = state.apply_loss(m, eta_eff);
    }
    let state = state.map_kets(|ket| {
        ket.relabel(B_H, OUT_H)?.relabel(B_V, OUT_V)
    })?;
    let mass = state.total_mass();
    Ok(HeraldedState::from_state(mass, state))
}

fn stats_to_keyrate(
    scenario: &Scenario,
    heralded: &HeraldedState,
    p_s: f64,
    p_h: f64,
) -> Result<KeyRateResult> {
    let (mu_cc, mu_ci, mu_ic) = closed_form_mu(&heralded.p_ij, scenario.eta_d);
    let (q, s) = closed_form_qs(heralded, scenario.eta_d);
    let input = match scenario.trust {
        TrustMode::Untrusted => {
            let mu = if mu_cc > 0.0 {
                (mu_ci + mu_ic) / mu_cc
            } else {
                f64::INFINITY
            };
            KeyRateInput {
                mode: TrustMode::Untrusted,
                q,
                s,
                mu,
                mu_cc,
                mu_tilde_cc: 0.0,
                eta_d: scenario.eta_d,
            }
        }
        TrustMode::Trusted => {
            let p = &heralded.p_ij;
            let mu_tilde_cc = p[1][1];
            let mu_tilde = if mu_tilde_cc > 0.0 {
                (p[1][0] + p[1][2] + p[0][1] + p[2][1]) / mu_tilde_cc
            } else {
                f64::INFINITY
            };
            let s_tilde = heralded
                .rho(1, 1)
                .map(|rho| sector_stats(rho).s_cond)
                .unwrap_or(0.0);
            KeyRateInput {
                mode: TrustMode::Trusted,
                q,
                s: s_tilde,
                mu: mu_tilde,
                mu_cc,
                mu_tilde_cc,
                eta_d: scenario.eta_d,
            }
        }
    };
    key_rate(input, scenario.rep_rate_hz, p_s, p_h)
}

/// Deterministic end-to-end evaluation of one operating point:
/// sources → amplifier (or direct transmission) → visibility noise →
/// statistics → key rate.
pub fn evaluate_keyrate(
    scenario: &Scenario,
    l_km: f64,
    p: f64,
    p_prime: f64,
    t: f64,
) -> Result<KeyRateResult> {
    scenario.validate()?;
    let eta_t = fiber_transmission(l_km, scenario.attenuation_db_per_km);
    let vis = VisibilityModel::new(scenario.visibility)?;
    if scenario.amplifier_enabled {
        let single = match scenario.source {
            SingleSourceKind::Heralded => SingleSourceParams::heralded(p_prime, scenario.eta_d)?,
            SingleSourceKind::OnDemand => SingleSourceParams::on_demand(),
        };
        let params = AmplifierParams {
            t,
            eta_t,
            eta_c: scenario.eta_c,
            eta_d: scenario.eta_d,
            pair: PairSourceParams::new(p)?,
            single,
        };
        let heralded = run_amplifier(&params)?;
        let heralded = apply_visibility(&heralded, vis)?;
        let p_s = match scenario.source {
            SingleSourceKind::Heralded => p_prime * scenario.eta_d,
            SingleSourceKind::OnDemand => 1.0,
        };
        stats_to_keyrate(scenario, &heralded, p_s, heralded.p_h)
    } else {
        let heralded = direct_state(p, scenario.eta_c, eta_t)?;
        let heralded = apply_visibility(&heralded, vis)?;
        stats_to_keyrate(scenario, &heralded, 1.0, 1.0)
    }
}

/// Which of (ln p, ln p', t) are free in a given scenario.
fn free_dims(scenario: &Scenario) -> Vec<usize> {
    if !scenario.amplifier_enabled {
        vec![0]
    } else if scenario.source == SingleSourceKind::Heralded {
        vec![0, 1, 2]
    } else {
        vec![0, 2]
    }
}

fn decode(x: &[f64; 3]) -> (f64, f64, f64) {
    (
        x[0].exp().clamp(P_MIN, P_MAX),
        x[1].exp().clamp(P_MIN, P_MAX),
        x[2].clamp(T_MIN, T_MAX),
    )
}

/// Maximizes the key rate over the free parameters at one distance.
pub fn optimize(scenario: &Scenario, l_km: f64) -> Result<OptimizationResult> {
    scenario.validate()?;
    let dims = free_dims(scenario);
    let log_p = |i: usize, n: usize| -> f64 {
        let f = i as f64 / (n - 1) as f64;
        P_MIN.ln() + f * (P_MAX.ln() - P_MIN.ln())
    };
    let t_at = |i: usize| -> f64 {
        T_MIN + (T_MAX - T_MIN) * i as f64 / (GRID_T - 1) as f64
    };

    // Coarse grid over the free dimensions.
    let mut points: Vec<[f64; 3]> = Vec::new();
    let default = [(P_MIN * P_MAX).sqrt().ln(), (P_MIN * P_MAX).sqrt().ln(), 0.95];
    let p_idx: Vec<usize> = (0..GRID_P).collect();
    let t_idx: Vec<usize> = (0..GRID_T).collect();
    match dims.as_slice() {
        [0] => {
            for &i in &p_idx {
                let mut x = default;
                x[0] = log_p(i, GRID_P);
                points.push(x);
            }
        }
        [0, 2] => {
            for &i in &p_idx {
                for &k in &t_idx {
                    let mut x = default;
                    x[0] = log_p(i, GRID_P);
                    x[2] = t_at(k);
                    points.push(x);
                }
            }
        }
        _ => {
            for &i in &p_idx {
                for &j in &p_idx {
                    for &k in &t_idx {
                        points.push([log_p(i, GRID_P), log_p(j, GRID_P), t_at(k)]);
                    }
                }
            }
        }
    }

    let objective = |x: &[f64; 3]| -> f64 {
        let (p, pp, t) = decode(x);
        evaluate_keyrate(scenario, l_km, p, pp, t)
            .map(|r| if r.feasible { r.k_bits_per_s } else { 0.0 })
            .unwrap_or(0.0)
    };

    let scores: Vec<f64> = points.par_iter().map(objective).collect();
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let mut x_best = points[best];

    // Local refinement (only worthwhile once a feasible cell exists).
    if scores[best] > 0.0 {
        let steps = [0.35, 0.35, 0.01];
        x_best = nelder_mead(&objective, x_best, &dims, &steps, 160);
    }

    let (p, p_prime, t) = decode(&x_best);
    let result = evaluate_keyrate(scenario, l_km, p, p_prime, t)?;

    let near = |v: f64, b: f64| (v.ln() - b.ln()).abs() < 1e-2;
    let boundary_hit = result.feasible
        && (near(p, P_MIN)
            || near(p, P_MAX)
            || (dims.contains(&1) && (near(p_prime, P_MIN) || near(p_prime, P_MAX))));

    Ok(OptimizationResult {
        l_km,
        p,
        p_prime: dims.contains(&1).then_some(p_prime),
        t: dims.contains(&2).then_some(t),
        result,
        boundary_hit,
    })
}

/// Nelder-Mead over the `dims` subset of the parameter vector,
/// maximizing `f`. Deterministic; tie-breaks favor earlier vertices.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64 + Sync>(
    f: &F,
    x0: [f64; 3],
    dims: &[usize],
    steps: &[f64; 3],
    max_iter: usize,
) -> [f64; 3] {
    let n = dims.len();
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0, f(&x0)));
    for &d in dims {
        let mut x = x0;
        x[d] += steps[d];
        simplex.push((x, f(&x)));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        // descending by score: best first
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1 - simplex[n].1;
        if spread.abs() < 1e-16 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let mut centroid = [0.0; 3];
        for v in &simplex[..n] {
            for &d in dims {
                centroid[d] += v.0[d] / n as f64;
            }
        }
        for d in 0..3 {
            if !dims.contains(&d) {
                centroid[d] = x0[d];
            }
        }
        let worst = simplex[n];
        let mut reflected = centroid;
        for &d in dims {
            reflected[d] = centroid[d] + alpha * (centroid[d] - worst.0[d]);
        }
        let fr = f(&reflected);
        if fr > simplex[0].1 {
            let mut expanded = centroid;
            for &d in dims {
                expanded[d] = centroid[d] + gamma * (centroid[d] - worst.0[d]);
            }
            let fe = f(&expanded);
            simplex[n] = if fe > fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let mut contracted = centroid;
            for &d in dims {
                contracted[d] = centroid[d] + rho * (worst.0[d] - centroid[d]);
            }
            let fc = f(&contracted);
            if fc > worst.1 {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    for &d in dims {
                        v.0[d] = best[d] + sigma * (v.0[d] - best[d]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex[0].0
}

/// One optimized result per distance, in input order.
pub fn sweep_distance(scenario: &Scenario, distances: &[f64]) -> Result<Vec<OptimizationResult>> {
    distances.iter().map(|&l| optimize(scenario, l)).collect()
}

/// Probe ceiling for the maximum-distance search.
pub const MAX_DISTANCE_CEILING_KM: f64 = 1e4;

/// Largest distance at which the optimized key rate stays positive,
/// found by bisection to 0.01 km. Errors with `UnboundedDistance` if
/// the rate is still positive at the probe ceiling.
pub fn max_distance(scenario: &Scenario) -> Result<f64> {
    let feasible = |l: f64| -> Result<bool> { Ok(optimize(scenario, l)?.result.feasible) };
    if !feasible(0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_DISTANCE_CEILING_KM {
            if feasible(MAX_DISTANCE_CEILING_KM)? {
                return Err(Error::UnboundedDistance(MAX_DISTANCE_CEILING_KM));
            }
            hi = MAX_DISTANCE_CEILING_KM;
            break;
        }
    }
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Spatial label carrying Bob's photons in the direct model (for
/// diagnostics; the statistics layer always measures `Out`).
pub const DIRECT_BOB_SPATIAL: Spatial = Spatial::Out;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn direct_untrusted() -> Scenario {
        Scenario {
            trust: TrustMode::Untrusted,
            source: SingleSourceKind::Heralded,
            eta_c: 0.9,
            eta_d: 0.95,
            visibility: 1.0,
            rep_rate_hz: 1e10,
            attenuation_db_per_km: 0.2,
            amplifier_enabled: false,
        }
    }

    #[test]
    fn scenario_guards() {
        let mut s = direct_untrusted();
        s.eta_c = 1.2;
        assert!(s.validate().is_err());
        s = direct_untrusted();
        s.rep_rate_hz = 0.0;
        assert!(s.validate().is_err());
        s = direct_untrusted();
        s.attenuation_db_per_km = -0.1;
        assert!(s.validate().is_err());
    }

    #[test]
    fn lossless_direct_transmission_is_nearly_ideal() {
        let mut s = direct_untrusted();
        s.eta_c = 1.0;
        s.eta_d = 1.0;
        let r = evaluate_keyrate(&s, 0.0, 1e-4, 0.0, 0.9).unwrap();
        assert!(r.feasible);
        assert!(r.q < 1e-3, "Q = {}", r.q);
        assert!(r.s > 2.82, "S = {}", r.s);
        // single pairs dominate: mu_cc tracks p up to the double-pair tail
        assert_abs_diff_eq!(r.mu_cc, 1e-4, epsilon = 3e-8);
    }

    #[test]
    fn zero_visibility_kills_the_key() {
        let mut s = direct_untrusted();
        s.visibility = 0.0;
        let r = evaluate_keyrate(&s, 0.0, 1e-3, 0.0, 0.9).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.k_bits_per_s, 0.0);
    }

    #[test]
    fn direct_optimum_decays_with_distance() {
        let s = direct_untrusted();
        let res = sweep_distance(&s, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(res.len(), 3);
        assert!(res[0].result.k_bits_per_s > res[1].result.k_bits_per_s);
        assert!(res[1].result.k_bits_per_s > res[2].result.k_bits_per_s);
        for r in &res {
            assert!(r.p_prime.is_none());
            assert!(r.t.is_none());
            assert!(r.result.feasible);
        }
    }

    #[test]
    fn direct_untrusted_limit_matches_threshold() {
        // without the amplifier the key dies where sqrt(eta_t) eta_c
        // eta_d crosses the singlet threshold, eta_t here includes the
        // loss of both fiber halves
        let s = direct_untrusted();
        let l = max_distance(&s).unwrap();
        let threshold = crate::security::singlet_threshold_untrusted();
        let eta_t = crate::security::fiber_transmission(l, 0.2);
        let reach = eta_t.sqrt() * s.eta_c * s.eta_d;
        assert!(l > 0.5 && l < 3.0, "limit {l} km");
        assert!(
            (reach - threshold).abs() < 5e-3,
            "effective efficiency {reach} vs threshold {threshold}"
        );
    }

    #[test]
    fn infeasible_scenario_reaches_zero_distance() {
        let mut s = direct_untrusted();
        s.eta_c = 0.5;
        assert_eq!(max_distance(&s).unwrap(), 0.0);
    }

    #[test]
    fn ondemand_optimizer_beats_fixed_point() {
        let s = Scenario {
            source: SingleSourceKind::OnDemand,
            amplifier_enabled: true,
            ..direct_untrusted()
        };
        let best = optimize(&s, 5.0).unwrap();
        assert!(best.result.feasible);
        let t = best.t.expect("amplified scenario optimizes t");
        assert!((T_MIN..=T_MAX).contains(&t));
        assert!(best.p_prime.is_none());
        let fixed = evaluate_keyrate(&s, 5.0, 2e-3, 0.0, 0.97).unwrap();
        assert!(best.result.k_bits_per_s >= fixed.k_bits_per_s);
    }
}
