//! Command-line front end.
//!
//! Subcommands: `keyrate` (evaluate one operating point), `optimize`
//! (best operating point at one distance), `sweep` (optimized curve
//! over a distance range), `max-distance` (feasibility limit), and
//! `validate` (self-check suite). Scenario parameters come from
//! defaults, then a preset, then a flat key=value config file, then
//! explicit flags, each layer overriding the previous one.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::amplifier::{closed_form_ph, ideal_amplify, run_amplifier, AmplifierParams};
use crate::fock::{Ensemble, FockKet, B_H, D_H, DT_H, OUT_H};
use crate::measurement::{click_statistics, closed_form_mu, closed_form_qs, trusted_statistics};
use crate::optimizer::{evaluate_keyrate, max_distance, optimize, sweep_distance, Scenario};
use crate::security::{
    chsh_chi, fiber_transmission, singlet_threshold_trusted, singlet_threshold_untrusted,
    KeyRateResult, TrustMode, CHSH_MAX,
};
use crate::sources::{pdc_entangled_state, PairSourceParams, SingleSourceKind, SingleSourceParams};

#[derive(Parser, Debug)]
#[command(
    name = "diqkd",
    version,
    about = "Key rates for device-independent QKD with a heralded qubit amplifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the key rate at one distance and operating point.
    Keyrate(KeyrateArgs),
    /// Find the best operating point (p, p', t) at one distance.
    Optimize(OptimizeArgs),
    /// Optimized key rate over a range of distances.
    Sweep(SweepArgs),
    /// Largest distance with a positive optimized key rate.
    MaxDistance(MaxDistanceArgs),
    /// Run the oracle cross-check suite.
    Validate(OutputArgs),
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Named scenario preset (fig4-a-heralded, fig4-a-ondemand,
    /// fig4-b-heralded, fig4-b-ondemand, fig6-<same suffixes>).
    #[arg(long)]
    preset: Option<String>,
    /// Flat key=value config file; explicit flags override it.
    #[arg(long)]
    config: Option<String>,
    /// Detector-trust mode: untrusted or trusted.
    #[arg(long)]
    trust: Option<String>,
    /// Single-photon sources: heralded or ondemand.
    #[arg(long)]
    source: Option<String>,
    /// Fiber-coupling efficiency.
    #[arg(long)]
    eta_c: Option<f64>,
    /// Detector efficiency.
    #[arg(long)]
    eta_d: Option<f64>,
    /// Hong-Ou-Mandel visibility of the interfering photons.
    #[arg(long)]
    visibility: Option<f64>,
    /// Source repetition rate in Hz.
    #[arg(long)]
    rep_rate_hz: Option<f64>,
    /// Fiber attenuation in dB/km.
    #[arg(long)]
    attenuation_db_km: Option<f64>,
    /// Direct transmission without the qubit amplifier.
    #[arg(long, action = ArgAction::SetTrue)]
    no_amplifier: bool,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the artifact to this path instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct KeyrateArgs {
    /// Distance in km.
    #[arg(long)]
    distance: f64,
    /// Pair-emission probability of the entangled source.
    #[arg(long, default_value_t = 2e-3)]
    p: f64,
    /// Pair-emission probability of the heralded single-photon sources.
    #[arg(long, default_value_t = 3e-3)]
    p_prime: f64,
    /// Amplifier beamsplitter transmission.
    #[arg(long, default_value_t = 0.98)]
    t: f64,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Distance in km.
    #[arg(long)]
    distance: f64,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Distances as start:end:step in km.
    #[arg(long)]
    distance_range: String,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct MaxDistanceArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
}

const DEFAULT_SCENARIO: Scenario = Scenario {
    trust: TrustMode::Untrusted,
    source: SingleSourceKind::Heralded,
    eta_c: 0.9,
    eta_d: 0.95,
    visibility: 1.0,
    rep_rate_hz: 1e10,
    attenuation_db_per_km: 0.2,
    amplifier_enabled: true,
};

fn apply_curve_label(s: &mut Scenario, label: &str) -> Option<()> {
    let (band, source) = label.split_once('-')?;
    match band {
        "a" => {
            s.trust = TrustMode::Untrusted;
            s.eta_d = 0.95;
        }
        "b" => {
            s.trust = TrustMode::Trusted;
            s.eta_d = 0.8;
        }
        _ => return None,
    }
    match source {
        "heralded" => s.source = SingleSourceKind::Heralded,
        "ondemand" => s.source = SingleSourceKind::OnDemand,
        _ => return None,
    }
    Some(())
}

/// fig4-* presets are the ideal-visibility scenarios; fig6-* are the
/// same four curves at V = 0.994.
fn lookup_preset(name: &str) -> Result<Scenario, String> {
    let mut s = DEFAULT_SCENARIO;
    let rest = if let Some(rest) = name.strip_prefix("fig4-") {
        Some(rest)
    } else if let Some(rest) = name.strip_prefix("fig6-") {
        s.visibility = 0.994;
        Some(rest)
    } else {
        None
    };
    rest.and_then(|r| apply_curve_label(&mut s, r))
        .map(|_| s)
        .ok_or_else(|| {
            format!(
                "unknown preset '{name}' (expected fig4-/fig6- + a-heralded, a-ondemand, b-heralded, b-ondemand)"
            )
        })
}

fn apply_kv(s: &mut Scenario, key: &str, value: &str) -> Result<(), String> {
    let parse_f = |v: &str| -> Result<f64, String> {
        v.parse::<f64>()
            .map_err(|_| format!("invalid number '{v}' for key '{key}'"))
    };
    match key {
        "trust" => s.trust = parse_trust(value)?,
        "source" => s.source = parse_source(value)?,
        "eta_c" => s.eta_c = parse_f(value)?,
        "eta_d" => s.eta_d = parse_f(value)?,
        "visibility" => s.visibility = parse_f(value)?,
        "rep_rate_hz" => s.rep_rate_hz = parse_f(value)?,
        "attenuation_db_km" => s.attenuation_db_per_km = parse_f(value)?,
        "amplifier" => {
            s.amplifier_enabled = value
                .parse::<bool>()
                .map_err(|_| format!("invalid boolean '{value}' for key 'amplifier'"))?
        }
        _ => return Err(format!("unknown config key '{key}'")),
    }
    Ok(())
}

fn parse_trust(v: &str) -> Result<TrustMode, String> {
    match v {
        "untrusted" => Ok(TrustMode::Untrusted),
        "trusted" => Ok(TrustMode::Trusted),
        _ => Err(format!("invalid trust mode '{v}'")),
    }
}

fn parse_source(v: &str) -> Result<SingleSourceKind, String> {
    match v {
        "heralded" => Ok(SingleSourceKind::Heralded),
        "ondemand" => Ok(SingleSourceKind::OnDemand),
        _ => Err(format!("invalid source kind '{v}'")),
    }
}

fn build_scenario(args: &ScenarioArgs) -> Result<Scenario, String> {
    let mut s = match &args.preset {
        Some(name) => lookup_preset(name)?,
        None => DEFAULT_SCENARIO,
    };
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read config '{path}': {e}"))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
            apply_kv(&mut s, key.trim(), value.trim())?;
        }
    }
    if let Some(v) = &args.trust {
        s.trust = parse_trust(v)?;
    }
    if let Some(v) = &args.source {
        s.source = parse_source(v)?;
    }
    if let Some(v) = args.eta_c {
        s.eta_c = v;
    }
    if let Some(v) = args.eta_d {
        s.eta_d = v;
    }
    if let Some(v) = args.visibility {
        s.visibility = v;
    }
    if let Some(v) = args.rep_rate_hz {
        s.rep_rate_hz = v;
    }
    if let Some(v) = args.attenuation_db_km {
        s.attenuation_db_per_km = v;
    }
    if args.no_amplifier {
        s.amplifier_enabled = false;
    }
    s.validate().map_err(|e| e.to_string())?;
    Ok(s)
}

fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("invalid distance range '{spec}', expected start:end:step"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("invalid number '{p}' in distance range"))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if start < 0.0 || end < start || step <= 0.0 {
        return Err(format!(
            "invalid distance range '{spec}': need 0 <= start <= end and step > 0"
        ));
    }
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let l = start + step * i as f64;
        if l > end + 1e-9 {
            break;
        }
        out.push(l);
        i += 1;
    }
    Ok(out)
}

/// Fixed-precision float rendering so identical configs emit
/// byte-identical artifacts.
fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10e}")
    } else {
        format!("{v}")
    }
}

fn scenario_metadata(s: &Scenario) -> Vec<(String, String)> {
    vec![
        (
            "trust".into(),
            match s.trust {
                TrustMode::Untrusted => "untrusted".into(),
                TrustMode::Trusted => "trusted".into(),
            },
        ),
        (
            "source".into(),
            match s.source {
                SingleSourceKind::Heralded => "heralded".into(),
                SingleSourceKind::OnDemand => "ondemand".into(),
            },
        ),
        ("eta_c".into(), fmt_f(s.eta_c)),
        ("eta_d".into(), fmt_f(s.eta_d)),
        ("visibility".into(), fmt_f(s.visibility)),
        ("rep_rate_hz".into(), fmt_f(s.rep_rate_hz)),
        ("attenuation_db_km".into(), fmt_f(s.attenuation_db_per_km)),
        ("amplifier".into(), s.amplifier_enabled.to_string()),
    ]
}

struct Table {
    metadata: Vec<(String, String)>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: &str) -> Result<String, String> {
        match format {
            "csv" => {
                let mut out = String::new();
                for (k, v) in &self.metadata {
                    out.push_str(&format!("# {k} = {v}\n"));
                }
                out.push_str(&self.header.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                Ok(out)
            }
            "json" => {
                let meta: serde_json::Map<String, serde_json::Value> = self
                    .metadata
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                    .collect();
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        self.header
                            .iter()
                            .zip(row)
                            .map(|(h, v)| (h.to_string(), serde_json::Value::String(v.clone())))
                            .collect::<serde_json::Map<_, _>>()
                            .into()
                    })
                    .collect();
                let doc = serde_json::json!({ "metadata": meta, "rows": rows });
                serde_json::to_string_pretty(&doc)
                    .map(|mut s| {
                        s.push('\n');
                        s
                    })
                    .map_err(|e| e.to_string())
            }
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

const SWEEP_HEADER: [&str; 9] = [
    "L_km",
    "K_bits_per_s",
    "p",
    "p_prime",
    "t",
    "Q",
    "S",
    "P_H",
    "mu_cc",
];

fn result_row(l_km: f64, p: f64, p_prime: Option<f64>, t: Option<f64>, r: &KeyRateResult) -> Vec<String> {
    vec![
        fmt_f(l_km),
        fmt_f(r.k_bits_per_s),
        fmt_f(p),
        p_prime.map(fmt_f).unwrap_or_default(),
        t.map(fmt_f).unwrap_or_default(),
        fmt_f(r.q),
        fmt_f(r.s),
        fmt_f(r.p_h),
        fmt_f(r.mu_cc),
    ]
}

fn emit(output: &OutputArgs, table: &Table, stdout: &mut dyn Write) -> Result<(), String> {
    let text = table.render(&output.format)?;
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write '{path}': {e}")),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

/// Parses `args` (including the program name) and runs one command,
/// writing the artifact to `stdout` unless `--out` is given.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here with a zero exit code.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(stdout, "{e}");
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, String> {
    match cli.command {
        Command::Keyrate(a) => {
            let scenario = build_scenario(&a.scenario)?;
            let result = evaluate_keyrate(&scenario, a.distance, a.p, a.p_prime, a.t)
                .map_err(|e| e.to_string())?;
            let mut metadata = scenario_metadata(&scenario);
            metadata.push(("command".into(), "keyrate".into()));
            let table = Table {
                metadata,
                header: SWEEP_HEADER.to_vec(),
                rows: vec![result_row(
                    a.distance,
                    a.p,
                    Some(a.p_prime),
                    Some(a.t),
                    &result,
                )],
            };
            emit(&a.output, &table, stdout)?;
            Ok(0)
        }
        Command::Optimize(a) => {
            let scenario = build_scenario(&a.scenario)?;
            let best = optimize(&scenario, a.distance).map_err(|e| e.to_string())?;
            let mut metadata = scenario_metadata(&scenario);
            metadata.push(("command".into(), "optimize".into()));
            metadata.push(("boundary_hit".into(), best.boundary_hit.to_string()));
            let table = Table {
                metadata,
                header: SWEEP_HEADER.to_vec(),
                rows: vec![result_row(best.l_km, best.p, best.p_prime, best.t, &best.result)],
            };
            emit(&a.output, &table, stdout)?;
            Ok(0)
        }
        Command::Sweep(a) => {
            let scenario = build_scenario(&a.scenario)?;
            let distances = parse_range(&a.distance_range)?;
            let results = sweep_distance(&scenario, &distances).map_err(|e| e.to_string())?;
            let mut metadata = scenario_metadata(&scenario);
            metadata.push(("command".into(), "sweep".into()));
            metadata.push(("distance_range".into(), a.distance_range.clone()));
            if results.iter().any(|r| r.boundary_hit) {
                metadata.push(("boundary_hit".into(), "true".into()));
                eprintln!("warning: optimum on the p/p' search boundary at one or more distances");
            }
            let table = Table {
                metadata,
                header: SWEEP_HEADER.to_vec(),
                rows: results
                    .iter()
                    .map(|r| result_row(r.l_km, r.p, r.p_prime, r.t, &r.result))
                    .collect(),
            };
            emit(&a.output, &table, stdout)?;
            Ok(0)
        }
        Command::MaxDistance(a) => {
            let scenario = build_scenario(&a.scenario)?;
            let l = max_distance(&scenario).map_err(|e| e.to_string())?;
            let mut metadata = scenario_metadata(&scenario);
            metadata.push(("command".into(), "max-distance".into()));
            let table = Table {
                metadata,
                header: vec!["max_distance_km"],
                rows: vec![vec![fmt_f(l)]],
            };
            emit(&a.output, &table, stdout)?;
            Ok(0)
        }
        Command::Validate(a) => {
            let checks = run_validation();
            let mut rows = Vec::new();
            let mut failures = 0usize;
            for (name, ok, detail) in &checks {
                if !ok {
                    failures += 1;
                }
                rows.push(vec![
                    name.to_string(),
                    if *ok { "pass".into() } else { "fail".into() },
                    detail.clone(),
                ]);
            }
            let table = Table {
                metadata: vec![("command".into(), "validate".into())],
                header: vec!["check", "status", "detail"],
                rows,
            };
            emit(&a, &table, stdout)?;
            Ok(if failures == 0 { 0 } else { 2 })
        }
    }
}

type Check = (&'static str, bool, String);

fn check(name: &'static str, err: f64, tol: f64) -> Check {
    (name, err.abs() <= tol, format!("|err| = {:.3e}", err.abs()))
}

/// The oracle cross-check suite behind `validate`: closed forms against
/// brute-force enumeration plus the analytic anchors.
fn run_validation() -> Vec<Check> {
    let mut checks = Vec::new();

    // Beamsplitter round trip is the identity.
    let ket = FockKet::vacuum(4)
        .create(B_H)
        .and_then(|k| k.create(B_H))
        .and_then(|k| k.create(OUT_H))
        .unwrap();
    let twice = ket.beamsplitter(OUT_H, B_H, 0.73).beamsplitter(OUT_H, B_H, 0.73);
    let mut diff: f64 = 0.0;
    for (occ, amp) in ket.terms() {
        diff = diff.max((twice.amplitude(occ) - amp).norm());
    }
    checks.push(check("beamsplitter-involution", diff, 1e-12));

    // Hong-Ou-Mandel: |1,1> on a 50/50 splitter has no coincidences.
    let hom = FockKet::vacuum(2)
        .create(D_H)
        .and_then(|k| k.create(DT_H))
        .unwrap()
        .beamsplitter(D_H, DT_H, 0.5);
    let coincidence = hom
        .terms()
        .filter(|(occ, _)| occ.get(D_H) == 1 && occ.get(DT_H) == 1)
        .map(|(_, a)| a.norm())
        .sum::<f64>();
    checks.push(check("hong-ou-mandel-dip", coincidence, 1e-12));

    // Loss conserves probability mass.
    let lossy = Ensemble::pure(ket.clone()).apply_loss(B_H, 0.37);
    checks.push(check(
        "loss-mass-conservation",
        lossy.total_mass() - ket.norm_sq(),
        1e-12,
    ));

    // Ideal amplifier closed forms.
    match ideal_amplify(0.6, 0.8 / 2f64.sqrt(), 0.8 / 2f64.sqrt(), 0.5) {
        Ok((_, out)) => {
            let alpha_out = out.amplitude(&crate::fock::Occupation::vacuum()).re;
            let beta_out = out.amplitude(&crate::fock::Occupation::single(OUT_H)).re;
            let scale = 0.5f64.sqrt() / 2.0;
            let err = (alpha_out - scale * 0.5f64.sqrt() * 0.6)
                .abs()
                .max((beta_out - scale * 0.5f64.sqrt() * 0.8 / 2f64.sqrt()).abs());
            checks.push(check("ideal-amplifier-t-half", err, 1e-10));
        }
        Err(e) => checks.push(("ideal-amplifier-t-half", false, e.to_string())),
    }

    // Herald probability of the full circuit against the closed form.
    let ideal = AmplifierParams {
        t: 0.9,
        eta_t: 0.5,
        eta_c: 1.0,
        eta_d: 1.0,
        pair: PairSourceParams::new(1e-3).unwrap(),
        single: SingleSourceParams::on_demand(),
    };
    match run_amplifier(&ideal) {
        Ok(h) => checks.push(check(
            "herald-probability-closed-form",
            h.p_h - closed_form_ph(0.9, 1e-3, 0.5),
            10.0 * 1e-6,
        )),
        Err(e) => checks.push(("herald-probability-closed-form", false, e.to_string())),
    }

    // Closed-form statistics against brute-force click enumeration.
    let lossy_params = AmplifierParams {
        t: 0.8,
        eta_t: 0.3,
        eta_c: 0.9,
        eta_d: 0.85,
        pair: PairSourceParams::new(5e-3).unwrap(),
        single: SingleSourceParams::heralded(4e-3, 0.85).unwrap(),
    };
    match run_amplifier(&lossy_params) {
        Ok(h) => {
            let brute = click_statistics(&h, 0.85);
            let (mu_cc, mu_ci, mu_ic) = closed_form_mu(&h.p_ij, 0.85);
            let err = (mu_cc - brute.mu_cc)
                .abs()
                .max((mu_ci - brute.mu_ci).abs())
                .max((mu_ic - brute.mu_ic).abs());
            checks.push(check("closed-form-mu-vs-enumeration", err, 1e-10));
            let (q, s) = closed_form_qs(&h, 0.85);
            let err = (q - brute.q).abs().max((s - brute.s).abs());
            checks.push(check("closed-form-qs-vs-enumeration", err, 1e-10));
            let trusted = trusted_statistics(&h, 0.85);
            let gamma_sum: f64 = trusted.gamma.values().sum();
            let delta_sum: f64 = trusted.delta.values().sum();
            let err = (gamma_sum - 1.0).abs().max((delta_sum - 1.0).abs());
            checks.push(check("thinning-normalization", err, 1e-10));
        }
        Err(e) => checks.push(("closed-form-mu-vs-enumeration", false, e.to_string())),
    }

    // Source branch weights.
    match pdc_entangled_state(PairSourceParams::new(0.01).unwrap(), 4) {
        Ok(pdc) => {
            let weights: Vec<f64> = pdc
                .branches()
                .iter()
                .map(|b| b.weight * b.ket.norm_sq())
                .collect();
            let expect = [1.0, 0.01, 0.75 * 1e-4];
            let err = weights
                .iter()
                .zip(expect)
                .map(|(w, e)| (w - e).abs())
                .fold(0.0f64, f64::max);
            checks.push(check("pdc-branch-weights", err, 1e-12));
        }
        Err(e) => checks.push(("pdc-branch-weights", false, e.to_string())),
    }

    // Analytic anchors.
    checks.push(check(
        "chi-classical-bound",
        chsh_chi(2.0).map(|v| v - 1.0).unwrap_or(f64::NAN),
        1e-12,
    ));
    checks.push(check(
        "chi-tsirelson-bound",
        chsh_chi(CHSH_MAX).unwrap_or(f64::NAN),
        1e-12,
    ));
    checks.push(check(
        "untrusted-threshold",
        singlet_threshold_untrusted() - 2.0 / (1.0 + 2f64.sqrt()),
        1e-6,
    ));
    checks.push(check(
        "trusted-threshold",
        singlet_threshold_trusted(0.8) - 2.0 / (1.0 + 2f64.sqrt()),
        1e-6,
    ));
    let eta5 = fiber_transmission(5.0, 0.2);
    checks.push((
        "fiber-transmission-5km",
        (0.79..=0.80).contains(&eta5),
        format!("eta_t = {eta5:.6}"),
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_range_parsing() {
        assert_eq!(parse_range("0:10:5").unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(parse_range("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_range("0:10").is_err());
        assert!(parse_range("5:1:1").is_err());
        assert!(parse_range("0:10:0").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn presets_resolve() {
        let s = lookup_preset("fig4-a-heralded").unwrap();
        assert_eq!(s.trust, TrustMode::Untrusted);
        assert_eq!(s.eta_d, 0.95);
        assert_eq!(s.visibility, 1.0);
        let s = lookup_preset("fig6-b-ondemand").unwrap();
        assert_eq!(s.trust, TrustMode::Trusted);
        assert_eq!(s.eta_d, 0.8);
        assert_eq!(s.source, SingleSourceKind::OnDemand);
        assert_eq!(s.visibility, 0.994);
        assert!(lookup_preset("fig5-a-heralded").is_err());
        assert!(lookup_preset("fig4-c-heralded").is_err());
    }

    #[test]
    fn flags_override_config_which_overrides_preset() {
        let dir = std::env::temp_dir();
        let path = dir.join("diqkd-test-config.cfg");
        fs::write(&path, "# comment\neta_c = 0.8\nvisibility = 0.9\n").unwrap();
        let args = ScenarioArgs {
            preset: Some("fig4-b-heralded".into()),
            config: Some(path.to_str().unwrap().into()),
            trust: None,
            source: None,
            eta_c: None,
            eta_d: None,
            visibility: Some(0.95),
            rep_rate_hz: None,
            attenuation_db_km: None,
            no_amplifier: true,
        };
        let s = build_scenario(&args).unwrap();
        assert_eq!(s.trust, TrustMode::Trusted); // preset layer
        assert_eq!(s.eta_c, 0.8); // config layer
        assert_eq!(s.visibility, 0.95); // flag layer
        assert!(!s.amplifier_enabled);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let mut s = DEFAULT_SCENARIO;
        assert!(apply_kv(&mut s, "eta_x", "0.5").is_err());
        assert!(apply_kv(&mut s, "eta_c", "abc").is_err());
        assert!(apply_kv(&mut s, "amplifier", "maybe").is_err());
        assert!(apply_kv(&mut s, "trust", "semi").is_err());
    }

    #[test]
    fn float_rendering_is_fixed_width() {
        assert_eq!(fmt_f(1.0), "1.0000000000e0");
        assert_eq!(fmt_f(0.123456789012345), "1.2345678901e-1");
        assert_eq!(fmt_f(f64::INFINITY), "inf");
    }

    #[test]
    fn keyrate_command_is_deterministic() {
        let args = [
            "diqkd", "keyrate", "--distance", "5", "--p", "2e-3", "--p-prime", "3e-3",
            "--t", "0.97",
        ];
        let mut out1 = Vec::new();
        let mut out2 = Vec::new();
        assert_eq!(run(args, &mut out1), 0);
        assert_eq!(run(args, &mut out2), 0);
        assert!(!out1.is_empty());
        assert_eq!(out1, out2);
        let text = String::from_utf8(out1).unwrap();
        assert!(text.contains("L_km,K_bits_per_s,p,p_prime,t,Q,S,P_H,mu_cc"));
        assert!(text.contains("# trust = untrusted"));
    }

    #[test]
    fn json_format_mirrors_csv_rows() {
        let args = [
            "diqkd", "keyrate", "--distance", "5", "--format", "json",
        ];
        let mut out = Vec::new();
        assert_eq!(run(args, &mut out), 0);
        let doc: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(doc["metadata"]["command"], "keyrate");
        assert!(doc["rows"][0]["K_bits_per_s"].is_string());
    }

    #[test]
    fn bad_arguments_exit_nonzero() {
        let mut out = Vec::new();
        assert_eq!(run(["diqkd", "keyrate"], &mut out), 1); // missing --distance
        assert_eq!(
            run(
                ["diqkd", "keyrate", "--distance", "5", "--preset", "bogus"],
                &mut out
            ),
            1
        );
        assert_eq!(
            run(
                ["diqkd", "keyrate", "--distance", "5", "--eta-c", "1.5"],
                &mut out
            ),
            1
        );
        assert_eq!(run(["diqkd", "--help"], &mut out), 0);
    }

    #[test]
    fn validation_suite_passes() {
        for (name, ok, detail) in run_validation() {
            assert!(ok, "validation check '{name}' failed: {detail}");
        }
    }
}
