//! End-to-end acceptance suite. Each test prints one pass/fail line for
//! its criterion; run with `--nocapture` to see the lines for passing
//! tests too.

use std::sync::OnceLock;

use diqkd_amplifier::amplifier::{
    closed_form_ph, ideal_amplify, run_amplifier, AmplifierParams, HeraldedState,
};
use diqkd_amplifier::fock::{Ensemble, FockKet, Occupation, A_H, A_V, OUT_H, OUT_V};
use diqkd_amplifier::measurement::sector_stats;
use diqkd_amplifier::optimizer::{max_distance, optimize, OptimizationResult, Scenario};
use diqkd_amplifier::security::{
    chsh_chi, fiber_transmission, singlet_threshold_trusted, singlet_threshold_untrusted,
    TrustMode, CHSH_MAX,
};
use diqkd_amplifier::sources::{PairSourceParams, SingleSourceKind, SingleSourceParams};
use num_complex::Complex64;

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "{name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn scenario(
    trust: TrustMode,
    source: SingleSourceKind,
    eta_d: f64,
    visibility: f64,
    amplifier: bool,
) -> Scenario {
    Scenario {
        trust,
        source,
        eta_c: 0.9,
        eta_d,
        visibility,
        rep_rate_hz: 1e10,
        attenuation_db_per_km: 0.2,
        amplifier_enabled: amplifier,
    }
}

fn untrusted_heralded_10km() -> &'static OptimizationResult {
    static CELL: OnceLock<OptimizationResult> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = scenario(
            TrustMode::Untrusted,
            SingleSourceKind::Heralded,
            0.95,
            1.0,
            true,
        );
        optimize(&s, 10.0).expect("optimization failed")
    })
}

#[test]
fn criterion_1_singlet_thresholds() {
    let expect = 2.0 / (1.0 + 2f64.sqrt());
    let untrusted = singlet_threshold_untrusted();
    let base = singlet_threshold_trusted(1.0);
    let shift = [0.5, 0.8]
        .iter()
        .map(|&e| (singlet_threshold_trusted(e) - base).abs())
        .fold(0.0f64, f64::max);
    let pass = (untrusted - expect).abs() < 1e-6
        && (base - expect).abs() < 1e-6
        && shift < 1e-6;
    report(
        "criterion 1 (critical efficiencies)",
        pass,
        &format!("untrusted {untrusted:.8}, trusted {base:.8}, eta_d shift {shift:.2e}"),
    );
}

#[test]
fn criterion_2_no_amplifier_distance_limits() {
    let mut s = scenario(
        TrustMode::Untrusted,
        SingleSourceKind::Heralded,
        0.95,
        1.0,
        false,
    );
    let l_untrusted = max_distance(&s).unwrap();
    s.trust = TrustMode::Trusted;
    s.eta_d = 0.8;
    let l_trusted = max_distance(&s).unwrap();
    let pass = (l_untrusted - 1.4).abs() <= 0.1 && (l_trusted - 3.6).abs() <= 0.1;
    report(
        "criterion 2 (direct-transmission limits)",
        pass,
        &format!("untrusted {l_untrusted:.3} km (want 1.4±0.1), trusted {l_trusted:.3} km (want 3.6±0.1)"),
    );
}

#[test]
fn criterion_3_optimum_at_10km() {
    let u = untrusted_heralded_10km();
    let u_k_min = u.result.k_bits_per_s * 60.0;
    let u_ok = (1e-3..=4e-3).contains(&u.p)
        && (1.5e-3..=6e-3).contains(&u.p_prime.unwrap())
        && (0.96..=0.995).contains(&u.t.unwrap())
        && (0.5..=2.0).contains(&u_k_min);

    let s = scenario(
        TrustMode::Trusted,
        SingleSourceKind::Heralded,
        0.8,
        1.0,
        true,
    );
    let t = optimize(&s, 10.0).unwrap();
    let t_k_min = t.result.k_bits_per_s * 60.0;
    let t_ok = (3.5e-3..=1.4e-2).contains(&t.p)
        && (2e-3..=8e-3).contains(&t.p_prime.unwrap())
        && (0.94..=0.99).contains(&t.t.unwrap())
        && (3.5..=14.0).contains(&t_k_min);

    report(
        "criterion 3 (optimal point at 10 km)",
        u_ok && t_ok,
        &format!(
            "untrusted p={:.3e} p'={:.3e} t={:.4} K={:.3} bit/min (want [0.5,2]); \
             trusted p={:.3e} p'={:.3e} t={:.4} K={:.3} bit/min (want [3.5,14])",
            u.p,
            u.p_prime.unwrap(),
            u.t.unwrap(),
            u_k_min,
            t.p,
            t.p_prime.unwrap(),
            t.t.unwrap(),
            t_k_min
        ),
    );
}

#[test]
fn criterion_4_on_demand_long_distance() {
    let s = scenario(
        TrustMode::Untrusted,
        SingleSourceKind::OnDemand,
        0.95,
        1.0,
        true,
    );
    let u = optimize(&s, 90.0).unwrap();
    let s = scenario(
        TrustMode::Trusted,
        SingleSourceKind::OnDemand,
        0.8,
        1.0,
        true,
    );
    let t = optimize(&s, 90.0).unwrap();
    let u_k = u.result.k_bits_per_s;
    let t_k = t.result.k_bits_per_s;
    let pass = (0.05..=0.2).contains(&u_k) && (1.0..=4.0).contains(&t_k);
    report(
        "criterion 4 (on-demand at 90 km)",
        pass,
        &format!("untrusted K={u_k:.4} bit/s (want [0.05,0.2]), trusted K={t_k:.4} bit/s (want [1,4])"),
    );
}

#[test]
fn criterion_5_visibility_degradation() {
    let ideal = untrusted_heralded_10km().result.k_bits_per_s;
    let s = scenario(
        TrustMode::Untrusted,
        SingleSourceKind::Heralded,
        0.95,
        0.994,
        true,
    );
    let noisy = optimize(&s, 10.0).unwrap().result.k_bits_per_s;
    let ratio = ideal / noisy;
    let u_ok = (2.8..=4.2).contains(&ratio);

    let s1 = scenario(
        TrustMode::Trusted,
        SingleSourceKind::OnDemand,
        0.8,
        1.0,
        true,
    );
    let s2 = Scenario {
        visibility: 0.994,
        ..s1
    };
    let k1 = optimize(&s1, 10.0).unwrap().result.k_bits_per_s;
    let k2 = optimize(&s2, 10.0).unwrap().result.k_bits_per_s;
    let change = (k1 - k2).abs() / k1;
    let t_ok = change < 0.10;

    report(
        "criterion 5 (V = 0.994 sensitivity)",
        u_ok && t_ok,
        &format!(
            "untrusted/heralded ratio {ratio:.3} (want 3.5±20%); \
             trusted/on-demand change {:.1}% (want <10%)",
            100.0 * change
        ),
    );
}

#[test]
fn criterion_6_closed_form_regression() {
    // t = 1/2 teleportation identity
    let (alpha, beta) = (0.6, 0.8);
    let (_, out) = ideal_amplify(alpha, beta, 0.0, 0.5).unwrap();
    let a_out = out.amplitude(&Occupation::vacuum()).re;
    let b_out = out.amplitude(&Occupation::single(OUT_H)).re;
    let identity_err = (a_out / alpha - b_out / beta).abs();

    // ideal-limit herald weights against the closed forms, O(p²) tight
    let mut max_rel = 0.0f64;
    for p in [1e-4, 1e-3, 1e-2] {
        let (t, eta_t) = (0.9, 0.5);
        let params = AmplifierParams {
            t,
            eta_t,
            eta_c: 1.0,
            eta_d: 1.0,
            pair: PairSourceParams::new(p).unwrap(),
            single: SingleSourceParams::on_demand(),
        };
        let h = run_amplifier(&params).unwrap();
        let tol = 10.0 * p * p;
        let r = 1.0 - t;
        let errs = [
            h.p_h - closed_form_ph(t, p, eta_t),
            h.p(0, 0) * h.p_h - r * r,
            h.p(1, 0) * h.p_h - p * r * r * (1.0 - eta_t),
            h.p(1, 1) * h.p_h - t * r * p * eta_t,
        ];
        for e in errs {
            max_rel = max_rel.max(e.abs() / tol);
        }
    }
    let pass = identity_err < 1e-10 && max_rel < 1.0;
    report(
        "criterion 6 (amplifier closed forms)",
        pass,
        &format!("teleportation identity err {identity_err:.2e}, worst weight err {max_rel:.3}·(10p²)"),
    );
}

#[test]
fn criterion_7_oracle_equivalence() {
    // the full randomized suite lives in oracle_equivalence.rs; here a
    // spot check on a real amplifier output stands in for the criterion
    let params = AmplifierParams {
        t: 0.95,
        eta_t: 0.25,
        eta_c: 0.9,
        eta_d: 0.8,
        pair: PairSourceParams::new(6e-3).unwrap(),
        single: SingleSourceParams::heralded(4e-3, 0.8).unwrap(),
    };
    let h = run_amplifier(&params).unwrap();
    let brute = diqkd_amplifier::click_statistics(&h, 0.8);
    let (mu_cc, mu_ci, mu_ic) = diqkd_amplifier::closed_form_mu(&h.p_ij, 0.8);
    let (q, s) = diqkd_amplifier::closed_form_qs(&h, 0.8);
    let err = (mu_cc - brute.mu_cc)
        .abs()
        .max((mu_ci - brute.mu_ci).abs())
        .max((mu_ic - brute.mu_ic).abs())
        .max((q - brute.q).abs())
        .max((s - brute.s).abs());
    let norm_err = brute
        .dists
        .iter()
        .map(|(_, _, d)| (d.total() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let pass = err < 1e-10 && norm_err < 1e-10;
    report(
        "criterion 7 (closed forms vs enumeration)",
        pass,
        &format!("max statistic err {err:.2e}, max normalization err {norm_err:.2e}"),
    );
}

/// Entangled single-photon pair (hh + sign·vv)/√2 on (A, OUT).
fn bell_pair(sign: f64) -> FockKet {
    let mut ket = FockKet::zero(6);
    let mut hh = Occupation::vacuum();
    hh.set(A_H, 1);
    hh.set(OUT_H, 1);
    let mut vv = Occupation::vacuum();
    vv.set(A_V, 1);
    vv.set(OUT_V, 1);
    ket.add_term(hh, Complex64::new(1.0 / 2f64.sqrt(), 0.0));
    ket.add_term(vv, Complex64::new(sign / 2f64.sqrt(), 0.0));
    ket
}

#[test]
fn criterion_8_analytic_checkpoints() {
    let chi_err = (chsh_chi(2.0).unwrap() - 1.0)
        .abs()
        .max(chsh_chi(CHSH_MAX).unwrap().abs());

    let s_pure = sector_stats(&Ensemble::pure(bell_pair(1.0))).s_cond;
    let s_pure_err = (s_pure - CHSH_MAX).abs();

    // phase-noise mixture F·(hh+vv) + (1-F)·(hh-vv)
    let mut mix_err = 0.0f64;
    let mut mix_detail = String::new();
    for f in [0.9, 0.95, 0.991054] {
        let mut e = Ensemble::new();
        e.push(f, bell_pair(1.0));
        e.push(1.0 - f, bell_pair(-1.0));
        let h = HeraldedState::from_sectors(vec![e]);
        let s = sector_stats(h.rho(1, 1).unwrap()).s_cond;
        let expect = CHSH_MAX * (2.0 * f - 1.0);
        mix_err = mix_err.max((s - expect).abs());
        mix_detail.push_str(&format!(" S(F={f})={s:.5} vs {expect:.5};"));
    }

    let eta5 = fiber_transmission(5.0, 0.2);
    let pass = chi_err < 1e-12
        && s_pure_err < 1e-10
        && mix_err < 1e-9
        && (0.79..=0.80).contains(&eta5);
    report(
        "criterion 8 (analytic checkpoints)",
        pass,
        &format!(
            "chi err {chi_err:.2e}; S(pure) err {s_pure_err:.2e}; mixture err {mix_err:.3e}:{mix_detail} eta_t(5 km)={eta5:.4}"
        ),
    );
}
