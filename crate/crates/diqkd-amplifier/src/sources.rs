//! Photon-source models.
//!
//! A stochastic parametric-down-conversion (PDC) entangled-pair source
//! kept to second order in the pair probability `p`, a heralded
//! single-photon source built from a PDC pair source, and an ideal
//! on-demand source. Source ensembles are kept unnormalized with the
//! leading (vacuum or single-photon) branch at weight 1; normalization
//! happens only when probabilities are reported.

use crate::error::{Error, Result};
use crate::fock::{Ensemble, FockKet, ModeId, A_H, A_V, B_H, B_V};

/// Perturbative validity guard on pair-emission probabilities.
pub const MAX_PAIR_PROBABILITY: f64 = 0.1;

/// Entangled-pair source parameters.
#[derive(Debug, Clone, Copy)]
pub struct PairSourceParams {
    /// Pair-emission probability per pulse.
    pub p: f64,
}

impl PairSourceParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=MAX_PAIR_PROBABILITY).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "pair probability p = {p} outside [0, {MAX_PAIR_PROBABILITY}]"
            )));
        }
        Ok(PairSourceParams { p })
    }
}

/// Kind of single-photon source feeding the amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingleSourceKind {
    /// PDC pair source heralded by the detection of the twin photon.
    Heralded,
    /// Ideal deterministic source: Fock state |1> with P_S = 1.
    OnDemand,
}

/// Single-photon source parameters.
#[derive(Debug, Clone, Copy)]
pub struct SingleSourceParams {
    pub kind: SingleSourceKind,
    /// Pair probability of the heralding PDC source (heralded only).
    pub p_prime: f64,
    /// Herald-detector efficiency.
    pub eta_d: f64,
}

impl SingleSourceParams {
    pub fn heralded(p_prime: f64, eta_d: f64) -> Result<Self> {
        if !(0.0..=MAX_PAIR_PROBABILITY).contains(&p_prime) {
            return Err(Error::InvalidParameter(format!(
                "pair probability p' = {p_prime} outside [0, {MAX_PAIR_PROBABILITY}]"
            )));
        }
        if !(0.0..=1.0).contains(&eta_d) {
            return Err(Error::InvalidParameter(format!(
                "herald-detector efficiency eta_d = {eta_d} outside [0, 1]"
            )));
        }
        Ok(SingleSourceParams {
            kind: SingleSourceKind::Heralded,
            p_prime,
            eta_d,
        })
    }

    pub fn on_demand() -> Self {
        SingleSourceParams {
            kind: SingleSourceKind::OnDemand,
            p_prime: 0.0,
            eta_d: 1.0,
        }
    }
}

/// Stochastic entangled-pair state on modes (a, b), second order in `p`:
/// vacuum at weight 1, one pair at weight p, two pairs at weight 3p²/4.
///
/// The single-pair ket is (a_h† b_h† + a_v† b_v†)/√2 |0⟩ and the
/// double-pair ket is (a_h† b_h† + a_v† b_v†)²/(2√3) |0⟩, each
/// normalized to 1.
pub fn pdc_entangled_state(params: PairSourceParams, n_max: u32) -> Result<Ensemble> {
    let p = params.p;
    let vacuum = FockKet::vacuum(n_max);

    // (a_h† b_h† + a_v† b_v†)/sqrt(2) |0>
    let hh = vacuum.create(A_H)?.create(B_H)?;
    let vv = vacuum.create(A_V)?.create(B_V)?;
    let mut pair = FockKet::zero(n_max);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for (occ, amp) in hh.terms() {
        pair.add_term(*occ, amp * half);
    }
    for (occ, amp) in vv.terms() {
        pair.add_term(*occ, amp * half);
    }

    // (a_h† b_h† + a_v† b_v†)^2 / (2 sqrt(3)) |0>
    let mut double = FockKet::zero(n_max);
    let norm = 1.0 / (2.0 * 3.0f64.sqrt());
    for source in [
        hh.create(A_H)?.create(B_H)?,
        hh.create(A_V)?.create(B_V)?.scaled(2.0f64.into()),
        vv.create(A_V)?.create(B_V)?,
    ] {
        for (occ, amp) in source.terms() {
            double.add_term(*occ, amp * norm);
        }
    }
    // cross term counted once above with multiplicity 2; the hh.create(A_V)
    // route equals the vv.create(A_H) route term-by-term.

    let mut out = Ensemble::new();
    out.push(1.0, vacuum);
    if p > 0.0 {
        out.push(p, pair);
        out.push(0.75 * p * p, double);
    }
    Ok(out)
}

/// Heralded single-photon source in `mode`, conditioned on a single
/// herald click: returns the herald success probability P_S = p'·η_d
/// and the conditional ensemble |1⟩⟨1| + 2p'(1-η_d)|2⟩⟨2|.
pub fn heralded_single_photon(
    params: SingleSourceParams,
    mode: ModeId,
    n_max: u32,
) -> Result<(f64, Ensemble)> {
    let one = FockKet::vacuum(n_max).create(mode)?;
    let mut out = Ensemble::new();
    match params.kind {
        SingleSourceKind::OnDemand => {
            out.push(1.0, one);
            Ok((1.0, out))
        }
        SingleSourceKind::Heralded => {
            let two = one.create(mode)?.scaled((1.0 / 2.0f64.sqrt()).into());
            out.push(1.0, one);
            let w2 = 2.0 * params.p_prime * (1.0 - params.eta_d);
            if w2 > 0.0 {
                out.push(w2, two);
            }
            Ok((params.p_prime * params.eta_d, out))
        }
    }
}

/// Ideal on-demand source: success probability 1 and a pure |1⟩ in `mode`.
pub fn on_demand_photon(mode: ModeId, n_max: u32) -> Result<(f64, Ensemble)> {
    heralded_single_photon(SingleSourceParams::on_demand(), mode, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Occupation;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pair_probability_guarded() {
        assert!(PairSourceParams::new(0.2).is_err());
        assert!(PairSourceParams::new(-1e-3).is_err());
        assert!(PairSourceParams::new(0.05).is_ok());
    }

    #[test]
    fn pdc_branch_weights_and_normalization() {
        let p = 0.01;
        let pdc = pdc_entangled_state(PairSourceParams::new(p).unwrap(), 4).unwrap();
        let weights: Vec<f64> = pdc
            .branches()
            .iter()
            .map(|b| b.weight * b.ket.norm_sq())
            .collect();
        assert_eq!(weights.len(), 3);
        assert_abs_diff_eq!(weights[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(weights[1], p, epsilon = 1e-14);
        assert_abs_diff_eq!(weights[2], 0.75 * p * p, epsilon = 1e-16);
        for b in pdc.branches() {
            assert_abs_diff_eq!(b.ket.norm_sq(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_pair_ket_structure() {
        // (a_h b_h + a_v b_v)^2 / (2 sqrt(3)) |0> has components
        // |2h 2h>, |2v 2v> and |1111> each with probability 1/3.
        let pdc = pdc_entangled_state(PairSourceParams::new(0.01).unwrap(), 4).unwrap();
        let double = &pdc.branches()[2].ket;
        let mut hh2 = Occupation::vacuum();
        hh2.set(A_H, 2);
        hh2.set(B_H, 2);
        let mut vv2 = Occupation::vacuum();
        vv2.set(A_V, 2);
        vv2.set(B_V, 2);
        let mut cross = Occupation::vacuum();
        for m in [A_H, B_H, A_V, B_V] {
            cross.set(m, 1);
        }
        let third = (1.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(double.amplitude(&hh2).re, third, epsilon = 1e-12);
        assert_abs_diff_eq!(double.amplitude(&vv2).re, third, epsilon = 1e-12);
        assert_abs_diff_eq!(double.amplitude(&cross).re, third, epsilon = 1e-12);
    }

    #[test]
    fn heralded_source_conditional_state() {
        let params = SingleSourceParams::heralded(4e-3, 0.8).unwrap();
        let (p_s, state) = heralded_single_photon(params, B_H, 4).unwrap();
        assert_abs_diff_eq!(p_s, 4e-3 * 0.8, epsilon = 1e-15);
        let weights: Vec<f64> = state
            .branches()
            .iter()
            .map(|b| b.weight * b.ket.norm_sq())
            .collect();
        assert_eq!(weights.len(), 2);
        assert_abs_diff_eq!(weights[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(weights[1], 2.0 * 4e-3 * 0.2, epsilon = 1e-14);
    }

    #[test]
    fn on_demand_source_is_pure_single_photon() {
        let (p_s, state) = on_demand_photon(B_H, 4).unwrap();
        assert_abs_diff_eq!(p_s, 1.0, epsilon = 0.0);
        assert_eq!(state.branches().len(), 1);
        let ket = &state.branches()[0].ket;
        assert_abs_diff_eq!(
            ket.amplitude(&Occupation::single(B_H)).re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn perfect_herald_detector_removes_two_photon_term() {
        let params = SingleSourceParams::heralded(4e-3, 1.0).unwrap();
        let (_, state) = heralded_single_photon(params, B_H, 4).unwrap();
        assert_eq!(state.branches().len(), 1);
    }
}
