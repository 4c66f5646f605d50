//! The heralded polarization-qubit amplifier.
//!
//! Auxiliary photons |1_h⟩|1_v⟩ pass a partial beamsplitter of
//! transmission `t`, entangling the reflected modes `c` with Bob's
//! output modes. The reflected modes interfere with the incoming
//! channel mode `b` on a 50/50 beamsplitter and a partial Bell
//! measurement is made on the four output modes d_h, d~_h, d_v, d~_v
//! with photon-number resolving detectors. A herald is exactly one
//! click in one h-labeled mode and one click in one v-labeled mode,
//! with zero clicks on the other two; each of the four click patterns
//! carries a deterministic one-qubit correction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{
    Ensemble, FockKet, ModeId, Spatial, A_H, A_V, B_H, B_V, C_H, C_V, DT_H, DT_V, D_H, D_V,
    OUT_H, OUT_V,
};
use crate::sources::{
    heralded_single_photon, pdc_entangled_state, PairSourceParams, SingleSourceParams,
};

/// Truncation bound used inside the amplifier circuit. The largest
/// branch kept by the second-order bookkeeping is a double pair (4
/// photons) together with the two auxiliary photons, i.e. 6 photons.
pub const AMPLIFIER_N_MAX: u32 = 6;

/// Full configuration of one amplifier run.
#[derive(Debug, Clone, Copy)]
pub struct AmplifierParams {
    /// Partial-beamsplitter transmission, in [0.5, 1).
    pub t: f64,
    /// Channel (fiber) transmission.
    pub eta_t: f64,
    /// Fiber-coupling efficiency, applied to every sourced mode.
    pub eta_c: f64,
    /// Bell-detector efficiency.
    pub eta_d: f64,
    /// Entangled-pair source.
    pub pair: PairSourceParams,
    /// Single-photon sources feeding the amplifier.
    pub single: SingleSourceParams,
}

impl AmplifierParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.t) {
            return Err(Error::InvalidParameter(format!(
                "beamsplitter transmission t = {} outside [0.5, 1)",
                self.t
            )));
        }
        for (name, v) in [
            ("eta_t", self.eta_t),
            ("eta_c", self.eta_c),
            ("eta_d", self.eta_d),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub const ALICE_MODES: [ModeId; 2] = [A_H, A_V];
pub const BOB_MODES: [ModeId; 2] = [OUT_H, OUT_V];

/// The state shared by Alice and Bob conditioned on a successful
/// herald, with its probability and photon-number decomposition.
#[derive(Debug, Clone)]
pub struct HeraldedState {
    /// Herald probability per pulse (given the single-photon sources fired).
    pub p_h: f64,
    /// Conditioned ensemble over Alice's modes (a_h, a_v) and Bob's
    /// output modes (out_h, out_v); unnormalized, total mass = p_h.
    pub state: Ensemble,
    /// P_ij: probability that Alice holds i and Bob holds j photons
    /// (i, j in 0..=2), conditioned on the herald. Sums to 1.
    pub p_ij: [[f64; 3]; 3],
    /// Unnormalized sector ensembles keyed by (i, j); the mass of each
    /// equals p_h · P_ij.
    sectors: BTreeMap<(u32, u32), Ensemble>,
}

impl HeraldedState {
    /// Builds the decomposition from the conditioned ensemble and its
    /// herald probability.
    pub fn from_state(p_h: f64, state: Ensemble) -> Self {
        let sectors = state.split_photon_sectors(&ALICE_MODES, &BOB_MODES);
        let mut p_ij = [[0.0; 3]; 3];
        if p_h > 0.0 {
            for (&(i, j), e) in &sectors {
                debug_assert!(i <= 2 && j <= 2, "photon sector ({i},{j}) out of range");
                if i <= 2 && j <= 2 {
                    p_ij[i as usize][j as usize] = e.total_mass() / p_h;
                }
            }
        }
        HeraldedState {
            p_h,
            state,
            p_ij,
            sectors,
        }
    }

    /// Builds a heralded state directly from per-sector ensembles
    /// (weights carry the sector masses). Used for synthetic states in
    /// validation; `p_h` is taken as the total mass.
    pub fn from_sectors(sectors: Vec<Ensemble>) -> Self {
        let mut state = Ensemble::new();
        for e in sectors {
            state.extend(e);
        }
        let p_h = state.total_mass();
        HeraldedState::from_state(p_h, state)
    }

    /// The unnormalized sub-ensemble with i photons on Alice's side and
    /// j on Bob's, if it has any mass.
    pub fn rho(&self, i: u32, j: u32) -> Option<&Ensemble> {
        self.sectors.get(&(i, j))
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p_ij[i][j]
    }

    /// Applies a pure-state map to every branch of the state and every
    /// sector, keeping weights (used for measurement-side rotations and
    /// noise channels that preserve photon number per side).
    pub fn map_branches<F>(&self, f: F) -> Result<HeraldedState>
    where
        F: Fn(f64, &FockKet) -> Vec<(f64, FockKet)>,
    {
        let mut state = Ensemble::new();
        for b in self.state.branches() {
            for (w, ket) in f(b.weight, &b.ket) {
                state.push(w, ket);
            }
        }
        Ok(HeraldedState::from_state(self.p_h, state))
    }
}

/// Ideal single-shot amplification of the coherent superposition
/// α|0⟩ + (β_h in_h† + β_v in_v†)|0⟩ with perfect auxiliary photons and
/// perfect detectors, conditioned on the (d_h, d_v) herald pattern.
///
/// Returns the overall success probability over the four herald
/// patterns, 4·|ψ_out|², and the conditional ket
/// ψ_out = (√(1-t)/2)·(√(1-t)·α|0⟩ + √t·(β_h out_h† + β_v out_v†)|0⟩).
pub fn ideal_amplify(
    alpha: f64,
    beta_h: f64,
    beta_v: f64,
    t: f64,
) -> Result<(f64, FockKet)> {
    let n_max = 4;
    let vacuum = FockKet::vacuum(n_max);
    let mut input = vacuum.scaled(alpha.into());
    for (occ, amp) in vacuum.create(B_H)?.scaled(beta_h.into()).terms() {
        input.add_term(*occ, *amp);
    }
    for (occ, amp) in vacuum.create(B_V)?.scaled(beta_v.into()).terms() {
        input.add_term(*occ, *amp);
    }
    let aux = vacuum.create(OUT_H)?.create(OUT_V)?;
    let full = input.tensor(&aux)?;

    let circuit = bell_measurement_circuit(&Ensemble::pure(full), t)?;
    let (prob, conditioned) = circuit.detect_clicks(&[D_H, D_V], &[DT_H, DT_V], 1.0);

    // Single branch by construction (perfect detectors, pure input).
    let ket = conditioned
        .branches()
        .first()
        .map(|b| b.ket.scaled(b.weight.sqrt().into()))
        .unwrap_or_else(|| FockKet::zero(n_max));
    Ok((4.0 * prob, ket))
}

/// Partial beamsplitter on the auxiliary modes followed by the 50/50
/// interference of `b` and `c`, relabeling the 50/50 outputs onto the
/// detector modes d and d~.
fn bell_measurement_circuit(state: &Ensemble, t: f64) -> Result<Ensemble> {
    state.map_kets(|ket| {
        let ket = ket.beamsplitter(OUT_H, C_H, t).beamsplitter(OUT_V, C_V, t);
        // d = (c + b)/sqrt(2), d~ = (c - b)/sqrt(2)
        let ket = ket.beamsplitter(C_H, B_H, 0.5).beamsplitter(C_V, B_V, 0.5);
        ket.relabel(C_H, D_H)?
            .relabel(B_H, DT_H)?
            .relabel(C_V, D_V)?
            .relabel(B_V, DT_V)
    })
}

/// Runs the full amplifier circuit: three-source product state,
/// coupling and channel losses, partial and 50/50 beamsplitters, and
/// the four-pattern herald with η_d-efficient number-resolving
/// detectors. Terms are kept exactly to second order in (p, p').
pub fn run_amplifier(params: &AmplifierParams) -> Result<HeraldedState> {
    params.validate()?;
    let n_max = AMPLIFIER_N_MAX;

    let pdc = pdc_entangled_state(params.pair, n_max)?;
    let single = SingleSourceParams {
        eta_d: params.eta_d,
        ..params.single
    };
    let (_, aux_h) = heralded_single_photon(single, OUT_H, n_max)?;
    let (_, aux_v) = heralded_single_photon(single, OUT_V, n_max)?;

    // Product of the three sources, dropping branch combinations beyond
    // second order in (p, p'): the pdc branches carry orders 0, 1, 2
    // and each auxiliary |2> branch carries order 1.
    let mut product = Ensemble::new();
    for (pdc_order, pb) in pdc.branches().iter().enumerate() {
        for (h_order, hb) in aux_h.branches().iter().enumerate() {
            for (v_order, vb) in aux_v.branches().iter().enumerate() {
                if pdc_order + h_order + v_order > 2 {
                    continue;
                }
                let ket = pb.ket.tensor(&hb.ket)?.tensor(&vb.ket)?;
                product.push(pb.weight * hb.weight * vb.weight, ket);
            }
        }
    }

    // Coupling losses on every sourced mode, then the channel on b.
    let mut state = product;
    for m in [A_H, A_V, B_H, B_V, OUT_H, OUT_V] {
        state = state.apply_loss(m, params.eta_c);
    }
    state = state
        .apply_loss(B_H, params.eta_t)
        .apply_loss(B_V, params.eta_t);

    let state = bell_measurement_circuit(&state, params.t)?;

    // Herald: one click in one h-labeled detector mode and one click in
    // one v-labeled detector mode, nothing elsewhere. A d~ click flips
    // the sign of the corresponding output polarization; the correction
    // undoes it before the patterns are summed.
    let mut p_h = 0.0;
    let mut heralded = Ensemble::new();
    for (h_click, h_flip) in [(D_H, false), (DT_H, true)] {
        for (v_click, v_flip) in [(D_V, false), (DT_V, true)] {
            let quiet: Vec<ModeId> = [D_H, DT_H, D_V, DT_V]
                .into_iter()
                .filter(|&m| m != h_click && m != v_click)
                .collect();
            let (prob, cond) = state.detect_clicks(&[h_click, v_click], &quiet, params.eta_d);
            p_h += prob;
            let corrected = cond.map_kets(|ket| {
                let mut k = ket.clone();
                if h_flip {
                    k = k.phase_flip(OUT_H);
                }
                if v_flip {
                    k = k.phase_flip(OUT_V);
                }
                Ok(k)
            })?;
            heralded.extend(corrected);
        }
    }

    Ok(HeraldedState::from_state(p_h, heralded))
}

/// Closed-form herald probability in the ideal-resource limit:
/// P_H = (1-t)² + p(1-t)²(1-η_t) + t(1-t)pη_t.
pub fn closed_form_ph(t: f64, p: f64, eta_t: f64) -> f64 {
    let r = 1.0 - t;
    r * r + p * r * r * (1.0 - eta_t) + t * r * p * eta_t
}

/// Spatial labels of the two measured sides.
pub const ALICE_SPATIAL: Spatial = Spatial::A;
pub const BOB_SPATIAL: Spatial = Spatial::Out;
