//! Implementations behind the `bellwork` binary.
//!
//! Every command is a pure function from a validated configuration to an
//! output string, so the binary, the FFI layer, and the test suites share
//! one code path. Game and behaviour specs accept frozen built-in names or
//! a path to a JSON file; records travel as NDJSON. All commands are
//! deterministic given their full flag set including the seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    chained_rows_to_csv, monogamy_check, noise_rows_to_csv, sweep_chained, sweep_noise,
};
use crate::behaviors::{
    chained_quantum_behavior, local_zeros, noisy_pr, pr_box, tsirelson_behavior, Behavior,
    TripartiteBehavior,
};
use crate::certifier::{certify, Method, ReadoutModel};
use crate::error::{Error, Result};
use crate::games::{
    local_value, make_chained, make_chsh, ns_value, quantum_value_closed, quantum_value_lower,
    GameValues, XorGame, DEFAULT_ASCENT_TOL, DEFAULT_RESTARTS,
};
use crate::ledger::{cycle_report, MemoryVariant};
use crate::transducer::{simulate, Variant, WorkRecord};

/// Output encodings; each command supports the subset its format contract
/// defines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Ndjson,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "ndjson" => Ok(Self::Ndjson),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (expected json, csv, or ndjson)"
            ))),
        }
    }
}

fn read_input(path: &str, what: &str) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {what} '{path}': {e}")))
}

/// Resolve a game spec: `chsh`, `chained:N`, or a JSON file path.
pub fn load_game(spec: &str) -> Result<XorGame> {
    if spec == "chsh" {
        return Ok(make_chsh());
    }
    if let Some(n) = spec.strip_prefix("chained:") {
        let n: u32 = n
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad chained size '{n}'")))?;
        return make_chained(n);
    }
    XorGame::from_json(&read_input(spec, "game spec")?)
}

/// Resolve a behaviour spec against a game: `pr`, `tsirelson`,
/// `local-zeros`, `noisy-pr:EPS`, `chained-q:N`, or a JSON file path.
pub fn load_behavior(spec: &str, game: &XorGame) -> Result<Behavior> {
    match spec {
        "pr" => return Ok(pr_box()),
        "tsirelson" => return Ok(tsirelson_behavior()),
        "local-zeros" => return Ok(local_zeros(game)),
        _ => {}
    }
    if let Some(eps) = spec.strip_prefix("noisy-pr:") {
        let eps: f64 = eps
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad noise level '{eps}'")))?;
        return noisy_pr(eps);
    }
    if let Some(n) = spec.strip_prefix("chained-q:") {
        let n: u32 = n
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad chained size '{n}'")))?;
        return chained_quantum_behavior(n);
    }
    Behavior::from_json(&read_input(spec, "behaviour spec")?)
}

/// Resolve a tripartite spec: `pr-uniform`, `tsirelson-uniform`,
/// `uniform`, or a JSON file path.
pub fn load_tripartite(spec: &str) -> Result<TripartiteBehavior> {
    let uniform_c: BTreeMap<u8, [f64; 2]> = [(0, [0.5, 0.5]), (1, [0.5, 0.5])].into();
    match spec {
        "pr-uniform" => TripartiteBehavior::product(&pr_box(), &uniform_c),
        "tsirelson-uniform" => TripartiteBehavior::product(&tsirelson_behavior(), &uniform_c),
        "uniform" => Ok(TripartiteBehavior::uniform()),
        path => TripartiteBehavior::from_json(&read_input(path, "tripartite spec")?),
    }
}

#[derive(Debug, Clone, Serialize)]
struct ValuesReport {
    game: String,
    delta: f64,
    omega_local: f64,
    omega_quantum: f64,
    quantum_is_exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_ascent_converged: Option<bool>,
    omega_nonsignalling: f64,
    /// "delta" for normalized ceilings, "absolute" after --absolute.
    work_ceiling_units: String,
    work_ceiling_local: f64,
    work_ceiling_quantum: f64,
    work_ceiling_nonsignalling: f64,
}

/// `values`: game values and the battery ceilings they induce.
pub fn cmd_values(
    game_spec: &str,
    delta: f64,
    absolute: bool,
    format: OutputFormat,
) -> Result<String> {
    if format != OutputFormat::Json {
        return Err(Error::InvalidParameter(
            "values reports are json only".into(),
        ));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let game = load_game(game_spec)?;
    let omega_local = local_value(&game)?;
    let (omega_quantum, quantum_is_exact, converged) = match quantum_value_closed(&game) {
        Some(q) => (q, true, None),
        None => {
            let bound = quantum_value_lower(&game, DEFAULT_RESTARTS, DEFAULT_ASCENT_TOL)?;
            (bound.value, false, Some(bound.converged))
        }
    };
    let omega_ns = ns_value(&game);
    let scale = if absolute { delta } else { 1.0 };
    let report = ValuesReport {
        game: game.name().to_string(),
        delta,
        omega_local,
        omega_quantum,
        quantum_is_exact,
        quantum_ascent_converged: converged,
        omega_nonsignalling: omega_ns,
        work_ceiling_units: if absolute { "absolute" } else { "delta" }.to_string(),
        work_ceiling_local: scale * omega_local,
        work_ceiling_quantum: scale * omega_quantum,
        work_ceiling_nonsignalling: scale * omega_ns,
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

/// `simulate`: run rounds and emit the work record (NDJSON or CSV).
pub fn cmd_simulate(
    game_spec: &str,
    behavior_spec: &str,
    rounds: usize,
    seed: u64,
    delta: f64,
    format: OutputFormat,
) -> Result<String> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let game = load_game(game_spec)?;
    let behavior = load_behavior(behavior_spec, &game)?;
    let record = simulate(&game, &behavior, rounds, seed, Variant::Feedforward, delta)?;
    match format {
        OutputFormat::Ndjson => Ok(record.to_ndjson()),
        OutputFormat::Csv => Ok(record.to_csv()),
        OutputFormat::Json => Err(Error::InvalidParameter(
            "work records are ndjson or csv; json is not a record format".into(),
        )),
    }
}

/// `certify`: parse an NDJSON record and issue a certificate against the
/// named game's thresholds.
pub fn cmd_certify(
    record_path: &Path,
    game_spec: &str,
    method: Method,
    alpha: f64,
    eta0_upper: Option<f64>,
    eta1_upper: Option<f64>,
    format: OutputFormat,
) -> Result<String> {
    if format != OutputFormat::Json {
        return Err(Error::InvalidParameter("certificates are json only".into()));
    }
    let text = fs::read_to_string(record_path).map_err(|e| {
        Error::InvalidParameter(format!(
            "cannot read record '{}': {e}",
            record_path.display()
        ))
    })?;
    let record = WorkRecord::from_ndjson(&text)?;
    let game = load_game(game_spec)?;
    if record.game_name() != game.name() {
        return Err(Error::InvalidParameter(format!(
            "record was produced for game '{}' but thresholds were requested for '{}'",
            record.game_name(),
            game.name()
        )));
    }
    let values = GameValues::compute(&game)?;
    let model = match (eta0_upper, eta1_upper) {
        (None, None) => None,
        (Some(e0), e1) => Some(ReadoutModel::conservative(e0, e1)?),
        (None, Some(_)) => {
            return Err(Error::InvalidParameter(
                "an eta1 upper bound without an eta0 upper bound does not define a \
                 conservative readout model"
                    .into(),
            ))
        }
    };
    let report = certify(&record, &values, method, alpha, model.as_ref())?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

/// `sweep noise`: the noisy-PR grid as plot-ready CSV.
pub fn cmd_sweep_noise(start: f64, stop: f64, step: f64, format: OutputFormat) -> Result<String> {
    if format != OutputFormat::Csv {
        return Err(Error::InvalidParameter("sweep tables are csv only".into()));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
        return Err(Error::InvalidParameter(format!(
            "noise grid [{start}, {stop}] must lie inside [0, 1]"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let eps = start + i as f64 * step;
        if eps > stop + 1e-12 {
            break;
        }
        grid.push(eps.min(1.0));
        i += 1;
    }
    Ok(noise_rows_to_csv(&sweep_noise(&grid)?))
}

/// `sweep chained`: the chained-family table as plot-ready CSV.
pub fn cmd_sweep_chained(n_from: u32, n_to: u32, format: OutputFormat) -> Result<String> {
    if format != OutputFormat::Csv {
        return Err(Error::InvalidParameter("sweep tables are csv only".into()));
    }
    if n_from < 2 || n_to < n_from {
        return Err(Error::InvalidParameter(format!(
            "chained grid needs 2 <= from <= to, got {n_from}..{n_to}"
        )));
    }
    let grid: Vec<u32> = (n_from..=n_to).collect();
    Ok(chained_rows_to_csv(&sweep_chained(&grid)?))
}

/// `ledger`: one cycle's bookkeeping at a given success rate.
pub fn cmd_ledger(
    p: f64,
    delta: f64,
    kt_ln2: f64,
    variant: MemoryVariant,
    transcript_entropy: Option<f64>,
    format: OutputFormat,
) -> Result<String> {
    if format != OutputFormat::Json {
        return Err(Error::InvalidParameter(
            "ledger reports are json only".into(),
        ));
    }
    let report = cycle_report(p, delta, kt_ln2, variant, transcript_entropy)?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

/// `monogamy`: CHSH battery monogamy across the AB and AC marginals.
pub fn cmd_monogamy(tripartite_spec: &str, delta: f64, format: OutputFormat) -> Result<String> {
    if format != OutputFormat::Json {
        return Err(Error::InvalidParameter(
            "monogamy reports are json only".into(),
        ));
    }
    let tripartite = load_tripartite(tripartite_spec)?;
    let report = monogamy_check(&tripartite, delta)?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}
