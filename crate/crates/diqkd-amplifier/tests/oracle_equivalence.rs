//! Randomized cross-checks of the closed-form detection statistics
//! against brute-force click enumeration, and of the binomial-thinning
//! map behind the trusted-detector analysis.

use diqkd_amplifier::amplifier::HeraldedState;
use diqkd_amplifier::fock::{Ensemble, FockKet, Occupation, A_H, A_V, OUT_H, OUT_V};
use diqkd_amplifier::measurement::{
    click_statistics, closed_form_mu, closed_form_qs, trusted_statistics,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

/// A random mixed state over the photon-number sectors (i, j) with
/// i, j <= 2 photons per side, as the amplifier produces.
fn random_heralded(rng: &mut ChaCha8Rng) -> HeraldedState {
    let mut sectors = Vec::new();
    for i in 0..=2u8 {
        for j in 0..=2u8 {
            if rng.gen::<f64>() < 0.35 {
                continue;
            }
            let n_branches = rng.gen_range(1..=2);
            let mut e = Ensemble::new();
            for _ in 0..n_branches {
                let mut ket = FockKet::zero(6);
                for ah in 0..=i {
                    for oh in 0..=j {
                        let mut occ = Occupation::vacuum();
                        occ.set(A_H, ah);
                        occ.set(A_V, i - ah);
                        occ.set(OUT_H, oh);
                        occ.set(OUT_V, j - oh);
                        let amp = Complex64::new(
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        );
                        ket.add_term(occ, amp);
                    }
                }
                let norm = ket.norm_sq().sqrt();
                e.push(rng.gen_range(0.01..1.0), ket.scaled((1.0 / norm).into()));
            }
            sectors.push(e);
        }
    }
    if sectors.is_empty() {
        let mut e = Ensemble::new();
        e.push(1.0, FockKet::vacuum(6));
        sectors.push(e);
    }
    HeraldedState::from_sectors(sectors)
}

#[test]
fn closed_forms_match_enumeration_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..120 {
        let h = random_heralded(&mut rng);
        let eta_d = rng.gen_range(0.4..=1.0);
        let brute = click_statistics(&h, eta_d);

        for (a, b, d) in &brute.dists {
            assert!(
                (d.total() - 1.0).abs() < TOL,
                "case {case}: joint distribution at ({a:?}, {b:?}) sums to {}",
                d.total()
            );
        }
        assert!(
            brute.mu_spread < TOL,
            "case {case}: mu_cc varies across settings by {}",
            brute.mu_spread
        );

        let (mu_cc, mu_ci, mu_ic) = closed_form_mu(&h.p_ij, eta_d);
        assert!((mu_cc - brute.mu_cc).abs() < TOL, "case {case}: mu_cc");
        assert!((mu_ci - brute.mu_ci).abs() < TOL, "case {case}: mu_ci");
        assert!((mu_ic - brute.mu_ic).abs() < TOL, "case {case}: mu_ic");

        let (q, s) = closed_form_qs(&h, eta_d);
        assert!((q - brute.q).abs() < TOL, "case {case}: Q {q} vs {}", brute.q);
        assert!((s - brute.s).abs() < TOL, "case {case}: S {s} vs {}", brute.s);
    }
}

fn binomial_pmf(k: u32, n: u32, p: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

#[test]
fn click_distribution_is_the_binomial_thinning_of_emissions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xde17a);
    for case in 0..40 {
        let h = random_heralded(&mut rng);
        let eta_d = rng.gen_range(0.4..0.99);
        let ts = trusted_statistics(&h, eta_d);

        // independent recomputation of delta from gamma
        let mut delta: std::collections::BTreeMap<[u32; 4], f64> = Default::default();
        for (&em, &g) in &ts.gamma {
            for j in 0..=em[0] {
                for k in 0..=em[1] {
                    for l in 0..=em[2] {
                        for m in 0..=em[3] {
                            let p = binomial_pmf(j, em[0], eta_d)
                                * binomial_pmf(k, em[1], eta_d)
                                * binomial_pmf(l, em[2], eta_d)
                                * binomial_pmf(m, em[3], eta_d);
                            *delta.entry([j, k, l, m]).or_insert(0.0) += g * p;
                        }
                    }
                }
            }
        }
        for (occ, p) in &delta {
            let got = ts.delta.get(occ).copied().unwrap_or(0.0);
            assert!(
                (got - p).abs() < TOL,
                "case {case}: delta[{occ:?}] = {got} vs thinned {p}"
            );
        }
        let total: f64 = ts.delta.values().sum();
        assert!((total - 1.0).abs() < TOL, "case {case}: delta sums to {total}");
    }
}
