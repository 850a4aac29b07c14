//! One function per subcommand. Each reads a resolved [`RunConfig`], writes
//! its report files and says whether every self-check passed.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use metric_entropy::matcore::MatrixJson;
use metric_entropy::metrics::{extrinsic_dist, intrinsic_dist, quotient_dist, QuotientDistance, QuotientOptions};
use metric_entropy::nets::{
    ball_volume_mc, build_net, entropy_profile, greedy_pack, NetOptions, NetReport, PackOptions, PackReport,
    ProfileReport, VolumeReport,
};
use metric_entropy::spaces::{classify_regime, invariants, InvariantOptions, InvariantReport, RegimeReport};
use metric_entropy::verify::{
    bch_scaling, check_bch_defect, check_exp_lipschitz, check_geodesic_minimality, check_log_ball,
    check_phi_lower_bound, check_quotient_lower_lipschitz, check_spectral_variation, check_su_circle, BchScaling,
    CheckReport,
};
use metric_entropy::{DenseMatrix, Error as CoreError, Family, GroupElement, Stream};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{emit, float, opt_float, Csv};
use crate::workers::parallel_map;

/// Result of a command that ran to completion.
#[derive(Debug)]
pub struct Outcome {
    /// False when an audit or check failed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn collect<R>(results: Vec<metric_entropy::Result<R>>) -> CliResult<Vec<R>> {
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

// ---------------------------------------------------------------- dist

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairLine {
    u: MatrixJson,
    v: MatrixJson,
}

#[derive(Serialize)]
struct DistRow {
    line: usize,
    extrinsic: f64,
    intrinsic: f64,
    quotient: QuotientDistance,
}

#[derive(Serialize)]
struct DistReport {
    space: String,
    rows: Vec<DistRow>,
}

/// Reads a JSON-lines file of `{"u": matrix, "v": matrix}` objects; blank
/// lines and lines starting with `#` are skipped.
fn read_pairs(config: &RunConfig) -> CliResult<Vec<(usize, GroupElement, GroupElement)>> {
    let path = config
        .pairs
        .as_ref()
        .ok_or_else(|| CliError::Input("no pair file given (--pairs)".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let group = config.space.group();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let at = |msg: String| CliError::Input(format!("{}:{line}: {msg}", path.display()));
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let pair: PairLine = serde_json::from_str(trimmed).map_err(|e| at(e.to_string()))?;
        let element = |m: &MatrixJson| -> CliResult<GroupElement> {
            let dense = DenseMatrix::try_from(m).map_err(|e| at(e.to_string()))?;
            GroupElement::new(group, dense).map_err(|e| at(e.to_string()))
        };
        pairs.push((line, element(&pair.u)?, element(&pair.v)?));
    }
    if pairs.is_empty() {
        return Err(CliError::Input(format!("{}: no pairs", path.display())));
    }
    Ok(pairs)
}

pub fn cmd_dist(config: &RunConfig) -> CliResult<Outcome> {
    let pairs = read_pairs(config)?;
    let root = Stream::new(config.seed).child("dist");
    let rows = collect(parallel_map(&pairs, |(line, u, v)| {
        let opts = QuotientOptions::with_seed(root.index(*line as u64).key());
        Ok(DistRow {
            line: *line,
            extrinsic: extrinsic_dist(u, v, config.p)?,
            intrinsic: intrinsic_dist(u, v, config.p)?,
            quotient: quotient_dist(&config.space, u, v, config.p, &opts)?,
        })
    }))?;
    let mut csv = Csv::new(&["line", "extrinsic", "intrinsic", "quotient", "method"]);
    for r in &rows {
        csv.row([
            r.line.to_string(),
            float(r.extrinsic),
            float(r.intrinsic),
            float(r.quotient.value),
            r.quotient.flags(),
        ]);
    }
    let report = DistReport {
        space: config.space.id(),
        rows,
    };
    Ok(Outcome {
        passed: true,
        files: emit("dist", config, &report, Some(csv))?,
    })
}

// ---------------------------------------------------------------- invariants

#[derive(Serialize)]
struct InvariantsOutput {
    invariants: InvariantReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    regime: Option<RegimeReport>,
}

fn invariant_options(config: &RunConfig) -> InvariantOptions {
    let mut opts = InvariantOptions::with_seed(config.seed);
    opts.kappa_restarts = config.budgets.kappa_restarts;
    opts.diameter_samples = config.budgets.diameter_samples;
    opts
}

pub fn cmd_invariants(config: &RunConfig) -> CliResult<Outcome> {
    let opts = invariant_options(config);
    let report = invariants(&config.space, &opts)?;
    let regime = config.alpha.map(|a| classify_regime(&config.space, a, &opts)).transpose()?;
    let mut csv = Csv::new(&[
        "space", "dim", "kappa", "kappa_method", "kappa_upper", "theta", "theta_method", "diameter", "diameter_method",
        "regime",
    ]);
    csv.row([
        report.space.clone(),
        report.dim.to_string(),
        float(report.kappa.value),
        label(&report.kappa.method),
        float(report.kappa.upper),
        float(report.theta.value),
        label(&report.theta.method),
        float(report.diameter.value),
        label(&report.diameter.method),
        regime.as_ref().map(|r| label(&r.regime)).unwrap_or_default(),
    ]);
    let out = InvariantsOutput {
        invariants: report,
        regime,
    };
    Ok(Outcome {
        passed: true,
        files: emit("invariants", config, &out, Some(csv))?,
    })
}

/// Serialized name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

// ---------------------------------------------------------------- net

#[derive(Serialize)]
struct NetOutput {
    nets: Vec<NetReport>,
}

pub fn cmd_net(config: &RunConfig) -> CliResult<Outcome> {
    let eps = config.require_eps()?;
    let opts = NetOptions {
        probes: config.budgets.probes,
        seed: config.seed,
        quotient: QuotientOptions::with_seed(config.seed),
        ..NetOptions::default()
    };
    let nets = collect(parallel_map(eps, |&e| build_net(&config.space, e, config.p, &opts)))?;
    let mut csv = Csv::new(&[
        "epsilon", "cardinality", "radius", "grid_step", "audit_probes", "audit_max_distance", "audit_pass", "achieved_c",
    ]);
    for n in &nets {
        csv.row([
            float(n.epsilon),
            n.cardinality.to_string(),
            float(n.radius),
            float(n.grid_step),
            n.audit.probes.to_string(),
            float(n.audit.max_distance),
            n.audit.pass.to_string(),
            float(n.achieved_c),
        ]);
    }
    let passed = nets.iter().all(|n| n.audit.pass);
    Ok(Outcome {
        passed,
        files: emit("net", config, &NetOutput { nets }, Some(csv))?,
    })
}

// ---------------------------------------------------------------- pack

#[derive(Serialize)]
struct PackOutput {
    packings: Vec<PackReport>,
}

fn pack_options(config: &RunConfig) -> PackOptions {
    PackOptions {
        budget: config.budgets.greedy,
        quotient: QuotientOptions::with_seed(config.seed),
        ..PackOptions::with_seed(config.seed)
    }
}

pub fn cmd_pack(config: &RunConfig) -> CliResult<Outcome> {
    let eps = config.require_eps()?;
    let opts = pack_options(config);
    let packings = collect(parallel_map(eps, |&e| greedy_pack(&config.space, e, config.p, &opts)))?;
    let mut csv = Csv::new(&["epsilon", "cardinality", "min_pairwise", "separated", "candidates", "achieved_c"]);
    for r in &packings {
        csv.row([
            float(r.epsilon),
            r.cardinality.to_string(),
            opt_float(r.min_pairwise),
            r.separated.to_string(),
            r.candidates.to_string(),
            opt_float(r.achieved_c),
        ]);
    }
    let passed = packings.iter().all(|r| r.separated);
    Ok(Outcome {
        passed,
        files: emit("pack", config, &PackOutput { packings }, Some(csv))?,
    })
}

// ---------------------------------------------------------------- profile

pub fn cmd_profile(config: &RunConfig) -> CliResult<Outcome> {
    let eps = config.require_eps()?;
    let report: ProfileReport = entropy_profile(&config.space, eps, config.p, &pack_options(config))?;
    let mut csv = Csv::new(&["epsilon", "log_inv_epsilon", "cardinality", "log_cardinality", "achieved_c"]);
    for r in &report.rows {
        csv.row([
            float(r.epsilon),
            float((1.0 / r.epsilon).ln()),
            r.cardinality.to_string(),
            float((r.cardinality as f64).ln()),
            float(r.achieved_c),
        ]);
    }
    Ok(Outcome {
        passed: true,
        files: emit("profile", config, &report, Some(csv))?,
    })
}

// ---------------------------------------------------------------- volume

#[derive(Serialize)]
struct VolumeOutput {
    volumes: Vec<VolumeReport>,
}

pub fn cmd_volume(config: &RunConfig) -> CliResult<Outcome> {
    let eps = config.require_eps()?;
    let samples = config.budgets.volume_samples;
    let volumes = collect(parallel_map(eps, |&e| {
        ball_volume_mc(&config.space, e, config.p, samples, config.seed)
    }))?;
    let mut csv = Csv::new(&["epsilon", "samples", "hits", "fraction", "wilson_low", "wilson_high", "achieved_constant"]);
    for v in &volumes {
        csv.row([
            float(v.epsilon),
            v.samples.to_string(),
            v.hits.to_string(),
            float(v.fraction),
            float(v.wilson_low),
            float(v.wilson_high),
            float(v.achieved_constant),
        ]);
    }
    Ok(Outcome {
        passed: true,
        files: emit("volume", config, &VolumeOutput { volumes }, Some(csv))?,
    })
}

// ---------------------------------------------------------------- verify

pub const SUITES: [&str; 8] = [
    "exp_lipschitz",
    "phi_lower_bound",
    "bch_defect",
    "geodesic_minimality",
    "log_ball",
    "quotient_lower_lipschitz",
    "su_circle",
    "spectral_variation",
];

/// Radius of the lower-bound check when none is configured.
const DEFAULT_PHI_THETA: f64 = PI / 4.0;
/// Base points of the geodesic check; competitors per base point scale with
/// the trial budget.
const GEODESIC_BASE_POINTS: usize = 20;

#[derive(Serialize)]
struct SkippedSuite {
    suite: String,
    reason: String,
}

#[derive(Serialize)]
struct VerifyOutput {
    pass: bool,
    checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bch_scaling: Option<BchScaling>,
    skipped: Vec<SkippedSuite>,
}

fn run_suite(config: &RunConfig, suite: &str) -> metric_entropy::Result<CheckReport> {
    let group = config.space.group();
    let (p, trials, seed) = (config.p, config.budgets.trials, config.seed);
    match suite {
        "exp_lipschitz" => check_exp_lipschitz(group, p, trials, seed),
        "phi_lower_bound" => check_phi_lower_bound(group, p, config.theta.unwrap_or(DEFAULT_PHI_THETA), trials, seed),
        "bch_defect" => check_bch_defect(group, p, trials, seed),
        "geodesic_minimality" => {
            let base = GEODESIC_BASE_POINTS.min(trials);
            check_geodesic_minimality(group, p, base, (trials / 5).max(1), seed)
        }
        "log_ball" => check_log_ball(group, trials, seed),
        "quotient_lower_lipschitz" => check_quotient_lower_lipschitz(&config.space, trials, seed),
        "su_circle" => {
            if group.family() != Family::U || group.n() < 2 {
                return Err(CoreError::UnsupportedCheck(format!("the circle check needs U(n) with n >= 2, got {group}")));
            }
            check_su_circle(group.n(), trials, seed)
        }
        "spectral_variation" => check_spectral_variation(group, p, trials, seed),
        other => Err(CoreError::Input(format!("unknown suite '{other}'"))),
    }
}

/// Runs the requested suites, or every suite applicable to the space when
/// none (or `all`) is requested.
pub fn cmd_verify(config: &RunConfig) -> CliResult<Outcome> {
    let requested: Vec<String> = config.suite.clone().unwrap_or_default();
    let all = requested.is_empty() || requested.iter().any(|s| s == "all");
    let suites: Vec<String> = if all {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        for s in &requested {
            if !SUITES.contains(&s.as_str()) {
                return Err(CliError::Input(format!("unknown suite '{s}'; known: all, {}", SUITES.join(", "))));
            }
        }
        requested
    };
    let results = parallel_map(&suites, |s| run_suite(config, s));
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for (suite, result) in suites.iter().zip(results) {
        match result {
            Ok(r) => checks.push(r),
            Err(e @ (CoreError::UnsupportedCheck(_) | CoreError::TooLarge { .. }))
                if all =>
            {
                skipped.push(SkippedSuite {
                    suite: suite.clone(),
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e.into()),
        }
    }
    let scaling = if suites.iter().any(|s| s == "bch_defect") {
        Some(bch_scaling(config.space.group(), config.p, config.seed)?)
    } else {
        None
    };
    let pass = checks.iter().all(|c| c.pass);
    let mut csv = Csv::new(&["name", "pass", "trials", "skipped", "worst_margin", "worst_ratio", "tolerance"]);
    for c in &checks {
        csv.row([
            c.name.clone(),
            c.pass.to_string(),
            c.trials.to_string(),
            c.skipped.to_string(),
            float(c.worst_margin),
            opt_float(c.worst_ratio),
            float(c.tolerance),
        ]);
    }
    let out = VerifyOutput {
        pass,
        checks,
        bch_scaling: scaling,
        skipped,
    };
    Ok(Outcome {
        passed: pass,
        files: emit("verify", config, &out, Some(csv))?,
    })
}
