//! Truncated-Fock-space linear optics.
//!
//! States are sparse maps from mode occupations to complex amplitudes
//! ([`FockKet`]); mixed states are weighted lists of kets ([`Ensemble`]).
//! All operations are pure: they take a state by reference and return a
//! new one. Loss and detection split kets into incoherent branches, one
//! per environment/detector photon-number record, so the ensemble
//! representation stays exact.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polarization component of a bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

/// Spatial label of a bosonic mode.
///
/// `A`/`B` are the entangled-pair source outputs, `Out` carries the
/// amplifier's auxiliary photons and becomes Bob's output, `C` is the
/// reflected port of the partial beamsplitter, and `D`/`DTilde` are the
/// Bell-measurement detector modes behind the 50/50 beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    A,
    B,
    C,
    Out,
    D,
    DTilde,
}

pub const SPATIAL_COUNT: usize = 6;
pub const MODE_COUNT: usize = SPATIAL_COUNT * 2;

/// A single bosonic mode: spatial label plus polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub spatial: Spatial,
    pub pol: Pol,
}

impl ModeId {
    pub const fn new(spatial: Spatial, pol: Pol) -> Self {
        ModeId { spatial, pol }
    }

    /// Position of this mode in the canonical total order.
    pub fn index(self) -> usize {
        self.spatial as usize * 2 + self.pol as usize
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.spatial {
            Spatial::A => "a",
            Spatial::B => "b",
            Spatial::C => "c",
            Spatial::Out => "out",
            Spatial::D => "d",
            Spatial::DTilde => "d~",
        };
        let p = match self.pol {
            Pol::H => "h",
            Pol::V => "v",
        };
        write!(f, "{s}_{p}")
    }
}

pub const A_H: ModeId = ModeId::new(Spatial::A, Pol::H);
pub const A_V: ModeId = ModeId::new(Spatial::A, Pol::V);
pub const B_H: ModeId = ModeId::new(Spatial::B, Pol::H);
pub const B_V: ModeId = ModeId::new(Spatial::B, Pol::V);
pub const C_H: ModeId = ModeId::new(Spatial::C, Pol::H);
pub const C_V: ModeId = ModeId::new(Spatial::C, Pol::V);
pub const OUT_H: ModeId = ModeId::new(Spatial::Out, Pol::H);
pub const OUT_V: ModeId = ModeId::new(Spatial::Out, Pol::V);
pub const D_H: ModeId = ModeId::new(Spatial::D, Pol::H);
pub const D_V: ModeId = ModeId::new(Spatial::D, Pol::V);
pub const DT_H: ModeId = ModeId::new(Spatial::DTilde, Pol::H);
pub const DT_V: ModeId = ModeId::new(Spatial::DTilde, Pol::V);

/// Photon counts per mode, in canonical mode order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Occupation([u8; MODE_COUNT]);

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation::default()
    }

    pub fn get(&self, mode: ModeId) -> u8 {
        self.0[mode.index()]
    }

    pub fn set(&mut self, mode: ModeId, n: u8) {
        self.0[mode.index()] = n;
    }

    /// Total photon number across all modes.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    /// Total photon number across the listed modes.
    pub fn total_in(&self, modes: &[ModeId]) -> u32 {
        modes.iter().map(|&m| self.get(m) as u32).sum()
    }

    /// Single photon in `mode`, vacuum elsewhere.
    pub fn single(mode: ModeId) -> Self {
        let mut o = Occupation::vacuum();
        o.set(mode, 1);
        o
    }
}

/// Amplitudes with modulus below this are dropped.
pub const AMPLITUDE_EPS: f64 = 1e-15;

/// Ensemble branches with total mass below this are dropped.
pub const BRANCH_MASS_EPS: f64 = 1e-15;

/// Default truncation bound on the total photon number of a ket.
pub const DEFAULT_N_MAX: u32 = 4;

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

fn binom(n: u8, k: u8) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Sparse superposition of occupation-number states, truncated at
/// `n_max` total photons.
#[derive(Debug, Clone)]
pub struct FockKet {
    terms: BTreeMap<Occupation, Complex64>,
    n_max: u32,
}

impl FockKet {
    /// Empty ket (the zero vector, not vacuum).
    pub fn zero(n_max: u32) -> Self {
        FockKet {
            terms: BTreeMap::new(),
            n_max,
        }
    }

    /// The vacuum state with amplitude 1.
    pub fn vacuum(n_max: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        FockKet { terms, n_max }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    /// Adds `amp` to the coefficient of `occ`, pruning near-zero results.
    pub fn add_term(&mut self, occ: Occupation, amp: Complex64) {
        let entry = self.terms.entry(occ).or_default();
        *entry += amp;
        if entry.norm() < AMPLITUDE_EPS {
            self.terms.remove(&occ);
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> FockKet {
        let mut out = FockKet::zero(self.n_max);
        for (occ, amp) in &self.terms {
            out.add_term(*occ, amp * c);
        }
        out
    }

    /// Bosonic creation operator on `mode`: |n> -> sqrt(n+1) |n+1>.
    pub fn create(&self, mode: ModeId) -> Result<FockKet> {
        let mut out = FockKet::zero(self.n_max);
        for (occ, amp) in &self.terms {
            let total = occ.total() + 1;
            if total > self.n_max {
                return Err(Error::TruncationOverflow {
                    photons: total,
                    n_max: self.n_max,
                });
            }
            let n = occ.get(mode);
            let mut o = *occ;
            o.set(mode, n + 1);
            out.add_term(o, amp * ((n as f64) + 1.0).sqrt());
        }
        Ok(out)
    }

    /// Heisenberg-picture two-mode mixing:
    /// `m1† -> u[0][0] m1† + u[0][1] m2†`, `m2† -> u[1][0] m1† + u[1][1] m2†`.
    ///
    /// Norm-preserving when `u` is orthogonal. Total photon number is
    /// unchanged, so no truncation can occur.
    pub fn mix_modes(&self, m1: ModeId, m2: ModeId, u: [[f64; 2]; 2]) -> FockKet {
        let mut out = FockKet::zero(self.n_max);
        for (occ, amp) in &self.terms {
            let n1 = occ.get(m1);
            let n2 = occ.get(m2);
            let mut stripped = *occ;
            stripped.set(m1, 0);
            stripped.set(m2, 0);
            let base = amp / (factorial(n1) * factorial(n2)).sqrt();
            for j in 0..=n1 {
                for k in 0..=n2 {
                    let c = binom(n1, j)
                        * u[0][0].powi(j as i32)
                        * u[0][1].powi((n1 - j) as i32)
                        * binom(n2, k)
                        * u[1][0].powi(k as i32)
                        * u[1][1].powi((n2 - k) as i32);
                    if c == 0.0 {
                        continue;
                    }
                    let p1 = j + k;
                    let p2 = n1 + n2 - p1;
                    let mut o = stripped;
                    o.set(m1, p1);
                    o.set(m2, p2);
                    out.add_term(o, base * c * (factorial(p1) * factorial(p2)).sqrt());
                }
            }
        }
        out
    }

    /// Beamsplitter with transmission `t` mixing `trans` (the transmitted
    /// mode) with `refl` (the reflected mode):
    ///
    /// `trans† -> sqrt(t) trans† + sqrt(1-t) refl†`
    /// `refl†  -> sqrt(1-t) trans† - sqrt(t) refl†`
    ///
    /// At t = 1/2 this is exactly the 50/50 convention
    /// d = (c + in)/sqrt(2), d~ = (c - in)/sqrt(2) with (trans, refl) = (c, in);
    /// the transform is an involution, so applying it twice with the same
    /// `t` restores the input.
    pub fn beamsplitter(&self, trans: ModeId, refl: ModeId, t: f64) -> FockKet {
        let ct = t.sqrt();
        let cr = (1.0 - t).sqrt();
        self.mix_modes(trans, refl, [[ct, cr], [cr, -ct]])
    }

    /// Polarization rotation on both modes of a spatial label:
    /// h† -> cos(θ) h† + sin(θ) v†, v† -> -sin(θ) h† + cos(θ) v†.
    pub fn rotate_polarization(&self, spatial: Spatial, angle: f64) -> FockKet {
        let h = ModeId::new(spatial, Pol::H);
        let v = ModeId::new(spatial, Pol::V);
        let (s, c) = angle.sin_cos();
        self.mix_modes(h, v, [[c, s], [-s, c]])
    }

    /// Moves all photons from `from` into `to`; `to` must be unoccupied.
    pub fn relabel(&self, from: ModeId, to: ModeId) -> Result<FockKet> {
        let mut out = FockKet::zero(self.n_max);
        for (occ, amp) in &self.terms {
            if occ.get(to) != 0 {
                return Err(Error::RelabelOccupied(to.to_string()));
            }
            let n = occ.get(from);
            let mut o = *occ;
            o.set(from, 0);
            o.set(to, n);
            out.add_term(o, *amp);
        }
        Ok(out)
    }

    /// Multiplies each term by (-1)^n where n is the occupation of `mode`.
    pub fn phase_flip(&self, mode: ModeId) -> FockKet {
        let mut out = FockKet::zero(self.n_max);
        for (occ, amp) in &self.terms {
            let sign = if occ.get(mode) % 2 == 1 { -1.0 } else { 1.0 };
            out.add_term(*occ, amp * sign);
        }
        out
    }

    /// Tensor product: occupations add mode-wise.
    pub fn tensor(&self, other: &FockKet) -> Result<FockKet> {
        let n_max = self.n_max.max(other.n_max);
        let mut out = FockKet::zero(n_max);
        for (oa, aa) in &self.terms {
            for (ob, ab) in &other.terms {
                let total = oa.total() + ob.total();
                if total > n_max {
                    return Err(Error::TruncationOverflow {
                        photons: total,
                        n_max,
                    });
                }
                let mut o = *oa;
                for idx in 0..MODE_COUNT {
                    o.0[idx] += ob.0[idx];
                }
                out.add_term(o, aa * ab);
            }
        }
        Ok(out)
    }

    /// Raises the truncation bound (never lowers it below current content).
    pub fn with_n_max(mut self, n_max: u32) -> FockKet {
        self.n_max = self.n_max.max(n_max);
        self
    }
}

/// One weighted branch of a mixture.
#[derive(Debug, Clone)]
pub struct Branch {
    pub weight: f64,
    pub ket: FockKet,
}

/// Weighted mixture of kets representing an (often unnormalized)
/// density operator. Branch weights times ket norms carry the
/// probability mass; conditioning leaves the mass equal to the
/// conditioning probability.
#[derive(Debug, Clone, Default)]
pub struct Ensemble {
    branches: Vec<Branch>,
}

impl Ensemble {
    pub fn new() -> Self {
        Ensemble::default()
    }

    pub fn pure(ket: FockKet) -> Self {
        Ensemble {
            branches: vec![Branch { weight: 1.0, ket }],
        }
    }

    pub fn from_branches(branches: Vec<Branch>) -> Self {
        let mut e = Ensemble { branches };
        e.prune();
        e
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn push(&mut self, weight: f64, ket: FockKet) {
        if weight * ket.norm_sq() >= BRANCH_MASS_EPS {
            self.branches.push(Branch { weight, ket });
        }
    }

    pub fn extend(&mut self, other: Ensemble) {
        self.branches.extend(other.branches);
    }

    fn prune(&mut self) {
        self.branches
            .retain(|b| b.weight * b.ket.norm_sq() >= BRANCH_MASS_EPS);
    }

    /// Total probability mass: sum of weight times squared norm.
    pub fn total_mass(&self) -> f64 {
        self.branches.iter().map(|b| b.weight * b.ket.norm_sq()).sum()
    }

    /// Rescales weights so the total mass is 1.
    pub fn normalized(&self) -> Ensemble {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return self.clone();
        }
        Ensemble {
            branches: self
                .branches
                .iter()
                .map(|b| Branch {
                    weight: b.weight / mass,
                    ket: b.ket.clone(),
                })
                .collect(),
        }
    }

    /// Applies a pure-state map to every branch.
    pub fn map_kets<F>(&self, mut f: F) -> Result<Ensemble>
    where
        F: FnMut(&FockKet) -> Result<FockKet>,
    {
        let mut out = Ensemble::new();
        for b in &self.branches {
            out.push(b.weight, f(&b.ket)?);
        }
        Ok(out)
    }

    /// Tensor product of two mixtures.
    pub fn tensor(&self, other: &Ensemble) -> Result<Ensemble> {
        let mut out = Ensemble::new();
        for a in &self.branches {
            for b in &other.branches {
                out.push(a.weight * b.weight, a.ket.tensor(&b.ket)?);
            }
        }
        Ok(out)
    }

    /// Photon loss on `mode` with transmission `eta`, realized as a
    /// beamsplitter to a fresh environment mode followed by tracing the
    /// environment. Each environment photon-count outcome `k` becomes
    /// its own branch, so total probability mass is conserved.
    pub fn apply_loss(&self, mode: ModeId, eta: f64) -> Ensemble {
        let mut out = Ensemble::new();
        for b in &self.branches {
            let max_n = b
                .ket
                .terms()
                .map(|(occ, _)| occ.get(mode))
                .max()
                .unwrap_or(0);
            for k in 0..=max_n {
                let mut ket = FockKet::zero(b.ket.n_max());
                for (occ, amp) in b.ket.terms() {
                    let n = occ.get(mode);
                    if n < k {
                        continue;
                    }
                    let c = binom(n, k).sqrt()
                        * eta.sqrt().powi((n - k) as i32)
                        * (1.0 - eta).sqrt().powi(k as i32);
                    if c == 0.0 {
                        continue;
                    }
                    let mut o = *occ;
                    o.set(mode, n - k);
                    ket.add_term(o, amp * c);
                }
                out.push(b.weight, ket);
            }
        }
        out
    }

    /// Conditions on a detector record: exactly one click on each of
    /// `click_modes` and zero clicks on each of `quiet_modes`, all with
    /// number-resolving detectors of efficiency `eta_d`. A detector
    /// seeing `n` photons reports exactly one click with probability
    /// n·η(1-η)^(n-1) and zero clicks with probability (1-η)^n.
    ///
    /// Returns the outcome probability and the post-measurement
    /// ensemble with the detected modes reset to vacuum; the ensemble is
    /// left unnormalized with total mass equal to the probability.
    pub fn detect_clicks(
        &self,
        click_modes: &[ModeId],
        quiet_modes: &[ModeId],
        eta_d: f64,
    ) -> (f64, Ensemble) {
        let mut out = Ensemble::new();
        let mut prob = 0.0;
        for b in &self.branches {
            // Terms with different detector-mode occupations decohere:
            // group them by the detector photon-number pattern.
            let mut groups: BTreeMap<Vec<u8>, FockKet> = BTreeMap::new();
            for (occ, amp) in b.ket.terms() {
                let pattern: Vec<u8> = click_modes
                    .iter()
                    .chain(quiet_modes.iter())
                    .map(|&m| occ.get(m))
                    .collect();
                let mut o = *occ;
                for &m in click_modes.iter().chain(quiet_modes.iter()) {
                    o.set(m, 0);
                }
                groups
                    .entry(pattern)
                    .or_insert_with(|| FockKet::zero(b.ket.n_max()))
                    .add_term(o, *amp);
            }
            for (pattern, ket) in groups {
                let mut f = 1.0;
                for (i, _) in click_modes.iter().enumerate() {
                    let n = pattern[i];
                    if n == 0 {
                        f = 0.0;
                        break;
                    }
                    f *= n as f64 * eta_d * (1.0 - eta_d).powi(n as i32 - 1);
                }
                if f > 0.0 {
                    for (i, _) in quiet_modes.iter().enumerate() {
                        let m = pattern[click_modes.len() + i];
                        f *= (1.0 - eta_d).powi(m as i32);
                    }
                }
                if f <= 0.0 {
                    continue;
                }
                let w = b.weight * f;
                prob += w * ket.norm_sq();
                out.push(w, ket);
            }
        }
        (prob, out)
    }

    /// Exactly one click on `click_mode`, zero clicks on `quiet_modes`.
    pub fn detect_single_click(
        &self,
        click_mode: ModeId,
        quiet_modes: &[ModeId],
        eta_d: f64,
    ) -> (f64, Ensemble) {
        self.detect_clicks(&[click_mode], quiet_modes, eta_d)
    }

    /// Probability distribution of the total photon number across
    /// `modes`, normalized to 1.
    pub fn photon_number_marginal(&self, modes: &[ModeId]) -> BTreeMap<u32, f64> {
        let mass = self.total_mass();
        let mut dist = BTreeMap::new();
        if mass <= 0.0 {
            return dist;
        }
        for b in &self.branches {
            for (occ, amp) in b.ket.terms() {
                *dist.entry(occ.total_in(modes)).or_insert(0.0) +=
                    b.weight * amp.norm_sqr() / mass;
            }
        }
        dist
    }

    /// Projects onto definite photon numbers (i, j) on the two mode
    /// groups, returning one unnormalized sub-ensemble per sector.
    /// Cross-sector coherences vanish under the projection; coherence
    /// within a sector is kept.
    pub fn split_photon_sectors(
        &self,
        side_a: &[ModeId],
        side_b: &[ModeId],
    ) -> BTreeMap<(u32, u32), Ensemble> {
        let mut sectors: BTreeMap<(u32, u32), Ensemble> = BTreeMap::new();
        for b in &self.branches {
            let mut parts: BTreeMap<(u32, u32), FockKet> = BTreeMap::new();
            for (occ, amp) in b.ket.terms() {
                let key = (occ.total_in(side_a), occ.total_in(side_b));
                parts
                    .entry(key)
                    .or_insert_with(|| FockKet::zero(b.ket.n_max()))
                    .add_term(*occ, *amp);
            }
            for (key, ket) in parts {
                sectors.entry(key).or_default().push(b.weight, ket);
            }
        }
        sectors.retain(|_, e| !e.branches.is_empty());
        sectors
    }
}
