//! Config-driven experiment runner: parameter sweeps over the capacity
//! evaluator with deterministic seeding and CSV output.
//!
//! Experiments are described by a flat `key = value` config format (see
//! [`parse_config`]) or by one of the canned presets that reproduce the
//! canonical result curves of this simulator. Output is a plain CSV table:
//! header row, comma separated, `.` decimal, 12 significant digits, one file
//! per experiment, written atomically (temp file + rename).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::capacity::{
    evaluate, gap_estimate, perfect_csi_delayed_clb, CapacityEstimate, MonteCarlo, Scheme,
    SchemeConfig,
};
use crate::channel::CovarianceSpec;
use crate::error::{Error, Result};
use crate::optimize::{
    alpha_star, closed_form_alpha, gamma_ccf, grid_optimal_phi, numeric_alpha, phi_star_perfect_csi,
};

/// Experiment family. Every preset expands into a fixed grid; `CustomSweep`
/// takes its grid from the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Optimal data power division vs. data SNR, perfect estimation.
    PhiSweep,
    /// Delayless gain feedback vs. SNR: optimal and equal power allocation.
    SnrSweepDelayless,
    /// Delayed gain feedback vs. SNR at `phi = beta` and grid-optimal `phi`.
    SnrSweepDelayed,
    /// Numeric power factor vs. correlation for covariance feedback.
    AlphaVsRho,
    /// 2x2 covariance feedback vs. correlation, equal and optimized spatial
    /// data allocation.
    CapVsRho2x2,
    /// 4x4 covariance feedback vs. correlation for every training length.
    CapVsRho4x4,
    /// Grid defined by the config lists.
    CustomSweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PhiSweep => "phi-sweep",
            ExperimentKind::SnrSweepDelayless => "snr-sweep-delayless",
            ExperimentKind::SnrSweepDelayed => "snr-sweep-delayed",
            ExperimentKind::AlphaVsRho => "alpha-vs-rho",
            ExperimentKind::CapVsRho2x2 => "cap-vs-rho-2x2",
            ExperimentKind::CapVsRho4x4 => "cap-vs-rho-4x4",
            ExperimentKind::CustomSweep => "custom-sweep",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "phi-sweep" => ExperimentKind::PhiSweep,
            "snr-sweep-delayless" => ExperimentKind::SnrSweepDelayless,
            "snr-sweep-delayed" => ExperimentKind::SnrSweepDelayed,
            "alpha-vs-rho" => ExperimentKind::AlphaVsRho,
            "cap-vs-rho-2x2" => ExperimentKind::CapVsRho2x2,
            "cap-vs-rho-4x4" => ExperimentKind::CapVsRho4x4,
            "custom-sweep" => ExperimentKind::CustomSweep,
            _ => return None,
        })
    }

    pub fn all_presets() -> &'static [&'static str] {
        &[
            "phi-sweep",
            "snr-sweep-delayless",
            "snr-sweep-delayed",
            "alpha-vs-rho",
            "cap-vs-rho-2x2",
            "cap-vs-rho-4x4",
        ]
    }
}

/// Scheme selector as it appears in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    NonFeedback,
    Cgf,
    Ccf,
    Beamforming,
}

impl SchemeKind {
    fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "nonfeedback" | "non-feedback" => SchemeKind::NonFeedback,
            "cgf" => SchemeKind::Cgf,
            "ccf" => SchemeKind::Ccf,
            "beamforming" => SchemeKind::Beamforming,
            _ => return None,
        })
    }

    fn needs_correlation(&self) -> bool {
        matches!(self, SchemeKind::Ccf | SchemeKind::Beamforming)
    }
}

/// Power factor selection.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    /// Closed form for the scheme.
    Auto,
    Fixed(f64),
    List(Vec<f64>),
}

/// Data power division selection for the delayed scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSpec {
    /// Equal power per data transmission (`phi = beta`).
    Beta,
    /// Grid-optimized per point (step 0.01).
    Auto,
    Fixed(f64),
}

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub scheme: SchemeKind,
    pub num_tx: usize,
    pub num_rx: usize,
    pub block_len: usize,
    pub train_len: usize,
    pub delay: usize,
    pub snr_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: AlphaSpec,
    pub phi: PhiSpec,
    pub trials: usize,
    pub seed: u64,
    pub with_gap: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    fn mc(&self) -> MonteCarlo {
        MonteCarlo::new(self.trials, self.seed)
    }
}

/// Result table: fixed column set per experiment kind, one row per grid
/// point, all cells numeric and finite.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    fn new(columns: Vec<&'static str>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|&c| c == name)
    }

    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite value {} in row {i}, column `{}`",
                        v, self.columns[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Render as CSV. A `# generated` comment carrying the wall-clock time
    /// is prepended unless `deterministic` is set.
    pub fn to_csv(&self, deterministic: bool) -> String {
        let mut out = String::new();
        if !deterministic {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# generated unix:{now}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_cell(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Atomic CSV write: temp file in the target directory, then rename.
    pub fn write_csv(&self, path: &Path, deterministic: bool) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        std::fs::write(&tmp, self.to_csv(deterministic))?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// 12 significant digits, integer-valued cells rendered as integers.
fn format_cell(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:.11e}", v)
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

const KNOWN_KEYS: &[&str] = &[
    "scheme",
    "nt",
    "nr",
    "block_len",
    "pilot_len",
    "delay",
    "snr_db",
    "rho",
    "alpha",
    "phi",
    "trials",
    "seed",
    "out",
];

fn config_err(field: &str, message: impl Into<String>, line: Option<usize>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
        line,
    }
}

/// Key/value pairs with the line each came from (`None` for CLI overrides).
pub type ConfigEntries = Vec<(String, String, Option<usize>)>;

/// Split config text into key/value entries; syntax errors carry line
/// numbers. `#` starts a comment, blank lines are skipped.
pub fn config_entries(text: &str) -> Result<ConfigEntries> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(config_err(
                "syntax",
                format!("expected `key = value`, got `{line}`"),
                Some(line_no),
            ));
        };
        let key = line[..eq].trim().to_ascii_lowercase();
        let value = line[eq + 1..].trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(config_err(&key, "unknown key", Some(line_no)));
        }
        if value.is_empty() {
            return Err(config_err(&key, "empty value", Some(line_no)));
        }
        entries.push((key, value, Some(line_no)));
    }
    Ok(entries)
}

fn parse_usize(key: &str, value: &str, line: Option<usize>) -> Result<usize> {
    value.parse::<usize>().map_err(|_| {
        config_err(
            key,
            format!("expected a non-negative integer, got `{value}`"),
            line,
        )
    })
}

fn parse_f64(key: &str, value: &str, line: Option<usize>) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(key, format!("expected a number, got `{value}`"), line))
}

fn parse_f64_list(key: &str, value: &str, line: Option<usize>) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_f64(key, s.trim(), line))
        .collect()
}

/// Build a validated spec from config entries; later entries override
/// earlier ones, so CLI flags can simply be appended after file contents.
pub fn spec_from_entries(entries: &ConfigEntries) -> Result<ExperimentSpec> {
    let mut scheme: Option<(SchemeKind, Option<usize>)> = None;
    let mut num_tx = None;
    let mut num_rx = None;
    let mut block_len = None;
    let mut train_len: Option<usize> = None;
    let mut delay = 0usize;
    let mut snr_db: Option<Vec<f64>> = None;
    let mut rho: Vec<f64> = Vec::new();
    let mut alpha = AlphaSpec::Auto;
    let mut phi = PhiSpec::Beta;
    let mut trials = 10_000usize;
    let mut seed = 42u64;
    let mut out = None;

    for (key, value, line) in entries {
        let line = *line;
        match key.as_str() {
            "scheme" => {
                let kind = SchemeKind::from_str(&value.to_ascii_lowercase()).ok_or_else(|| {
                    config_err(
                        "scheme",
                        format!(
                            "unknown scheme `{value}` (expected nonfeedback, cgf, ccf, or beamforming)"
                        ),
                        line,
                    )
                })?;
                scheme = Some((kind, line));
            }
            "nt" => num_tx = Some(parse_usize("nt", value, line)?),
            "nr" => num_rx = Some(parse_usize("nr", value, line)?),
            "block_len" => block_len = Some(parse_usize("block_len", value, line)?),
            "pilot_len" => train_len = Some(parse_usize("pilot_len", value, line)?),
            "delay" => delay = parse_usize("delay", value, line)?,
            "snr_db" => snr_db = Some(parse_f64_list("snr_db", value, line)?),
            "rho" => {
                rho = parse_f64_list("rho", value, line)?;
                for &r in &rho {
                    if !(0.0..1.0).contains(&r) {
                        return Err(config_err(
                            "rho",
                            format!("correlation factor must lie in [0, 1), got {r}"),
                            line,
                        ));
                    }
                }
            }
            "alpha" => {
                alpha = if value.eq_ignore_ascii_case("auto") {
                    AlphaSpec::Auto
                } else {
                    let list = parse_f64_list("alpha", value, line)?;
                    for &a in &list {
                        if !(a > 0.0 && a < 1.0) {
                            return Err(config_err(
                                "alpha",
                                format!("power factor must lie strictly inside (0, 1), got {a}"),
                                line,
                            ));
                        }
                    }
                    if list.len() == 1 {
                        AlphaSpec::Fixed(list[0])
                    } else {
                        AlphaSpec::List(list)
                    }
                };
            }
            "phi" => {
                phi = if value.eq_ignore_ascii_case("beta") {
                    PhiSpec::Beta
                } else if value.eq_ignore_ascii_case("auto") {
                    PhiSpec::Auto
                } else {
                    let v = parse_f64("phi", value, line)?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(config_err(
                            "phi",
                            format!("data power division must lie in [0, 1], got {v}"),
                            line,
                        ));
                    }
                    PhiSpec::Fixed(v)
                };
            }
            "trials" => {
                trials = parse_usize("trials", value, line)?;
                if trials == 0 {
                    return Err(config_err("trials", "trial count must be positive", line));
                }
            }
            "seed" => {
                seed = value.parse::<u64>().map_err(|_| {
                    config_err(
                        "seed",
                        format!("expected a 64-bit seed, got `{value}`"),
                        line,
                    )
                })?;
            }
            "out" => out = Some(PathBuf::from(value)),
            _ => unreachable!("unknown keys rejected during tokenization"),
        }
    }

    let (scheme, scheme_line) =
        scheme.ok_or_else(|| config_err("scheme", "missing required key", None))?;
    let num_tx = num_tx.ok_or_else(|| config_err("nt", "missing required key", None))?;
    let num_rx = num_rx.ok_or_else(|| config_err("nr", "missing required key", None))?;
    let block_len =
        block_len.ok_or_else(|| config_err("block_len", "missing required key", None))?;
    let snr_db = snr_db.ok_or_else(|| config_err("snr_db", "missing required key", None))?;

    if num_tx == 0 || num_rx == 0 {
        return Err(config_err("nt", "antenna counts must be positive", None));
    }
    let train_len = match (train_len, scheme) {
        (Some(lp), _) => lp,
        (None, SchemeKind::Beamforming) => 1,
        (None, _) => num_tx,
    };
    if train_len == 0 || train_len >= block_len {
        return Err(config_err(
            "pilot_len",
            format!("training length {train_len} must be in 1..{block_len}"),
            None,
        ));
    }
    if scheme.needs_correlation() && rho.is_empty() {
        return Err(config_err(
            "rho",
            "covariance-feedback schemes need a correlation factor",
            scheme_line,
        ));
    }
    if !scheme.needs_correlation() && !rho.is_empty() {
        return Err(config_err(
            "rho",
            "correlation applies to covariance-feedback schemes only",
            None,
        ));
    }
    if delay > block_len - train_len {
        return Err(config_err(
            "delay",
            format!(
                "delay {delay} exceeds the data sub-block {}",
                block_len - train_len
            ),
            None,
        ));
    }
    if delay > 0 && scheme != SchemeKind::Cgf {
        return Err(config_err(
            "delay",
            "feedback delay applies to the gain-feedback scheme only",
            None,
        ));
    }
    if phi != PhiSpec::Beta && delay == 0 {
        return Err(config_err(
            "phi",
            "data power division applies to gain feedback with delay > 0",
            None,
        ));
    }
    if snr_db.is_empty() {
        return Err(config_err("snr_db", "empty grid", None));
    }

    Ok(ExperimentSpec {
        kind: ExperimentKind::CustomSweep,
        scheme,
        num_tx,
        num_rx,
        block_len,
        train_len,
        delay,
        snr_db,
        rho,
        alpha,
        phi,
        trials,
        seed,
        with_gap: false,
        out,
    })
}

/// Parse a flat `key = value` config into a validated custom-sweep spec.
/// Defaults: `trials = 10000`, `seed = 42`, `alpha = auto`, `phi = beta`,
/// `pilot_len = nt` (1 for beamforming), `delay = 0`.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    spec_from_entries(&config_entries(text)?)
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

fn build_scheme(spec: &ExperimentSpec, rho: f64) -> Result<Scheme> {
    Ok(match spec.scheme {
        SchemeKind::NonFeedback => Scheme::NonFeedback,
        SchemeKind::Cgf => {
            if spec.delay == 0 {
                Scheme::CgfDelayless
            } else {
                Scheme::CgfDelayed {
                    delay: spec.delay,
                    phi: 0.5, // placeholder; resolved per grid point
                }
            }
        }
        SchemeKind::Ccf => Scheme::Ccf(CovarianceSpec::exponential(spec.num_tx, rho)?),
        SchemeKind::Beamforming => {
            Scheme::Beamforming(CovarianceSpec::exponential(spec.num_tx, rho)?)
        }
    })
}

fn resolve_phi(spec: &ExperimentSpec, base: &SchemeConfig, mc: &MonteCarlo) -> Result<f64> {
    let data_len = base.block_len() - base.train_len();
    let beta = spec.delay as f64 / data_len as f64;
    match spec.phi {
        PhiSpec::Beta => Ok(beta),
        PhiSpec::Fixed(v) => Ok(v),
        PhiSpec::Auto => {
            let seeded = SchemeConfig::new(
                base.num_tx(),
                base.num_rx(),
                base.block_len(),
                base.train_len(),
                base.avg_power(),
                base.alpha(),
                Scheme::CgfDelayed {
                    delay: spec.delay,
                    phi: beta,
                },
            )?;
            Ok(grid_optimal_phi(&seeded, 0.01, mc)?.0)
        }
    }
}

/// Run an experiment. Returns the result table and, when the spec names an
/// output path, writes the CSV as a side effect.
pub fn run(spec: &ExperimentSpec, deterministic: bool) -> Result<ResultTable> {
    let table = match spec.kind {
        ExperimentKind::CustomSweep => run_custom(spec)?,
        ExperimentKind::PhiSweep => run_phi_sweep(spec)?,
        ExperimentKind::SnrSweepDelayless => run_snr_delayless(spec)?,
        ExperimentKind::SnrSweepDelayed => run_snr_delayed(spec)?,
        ExperimentKind::AlphaVsRho => run_alpha_vs_rho(spec)?,
        ExperimentKind::CapVsRho2x2 => run_cap_vs_rho_2x2(spec)?,
        ExperimentKind::CapVsRho4x4 => run_cap_vs_rho_4x4(spec)?,
    };
    table.check_finite()?;
    if let Some(path) = &spec.out {
        table.write_csv(path, deterministic)?;
    }
    Ok(table)
}

fn run_custom(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut columns = vec![
        "snr_db", "rho", "lp", "delay", "alpha", "phi", "mean", "stderr",
    ];
    if spec.with_gap {
        columns.push("gap_ratio");
    }
    let mut table = ResultTable::new(columns);

    let rho_grid: Vec<f64> = if spec.rho.is_empty() {
        vec![0.0]
    } else {
        spec.rho.clone()
    };
    let alpha_grid: Vec<Option<f64>> = match &spec.alpha {
        AlphaSpec::Auto => vec![None],
        AlphaSpec::Fixed(a) => vec![Some(*a)],
        AlphaSpec::List(list) => list.iter().copied().map(Some).collect(),
    };
    if spec.snr_db.is_empty() || rho_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::config("grid", "empty sweep grid"));
    }

    for &snr in &spec.snr_db {
        let power = db_to_linear(snr);
        for &rho in &rho_grid {
            for alpha_choice in &alpha_grid {
                let scheme = build_scheme(spec, rho)?;
                // Seed configuration used only to resolve alpha and phi.
                let probe = SchemeConfig::new(
                    spec.num_tx,
                    spec.num_rx,
                    spec.block_len,
                    spec.train_len,
                    power,
                    0.5,
                    normalize_delayed(scheme.clone(), spec, 0.5)?,
                )?;
                let alpha = match alpha_choice {
                    Some(a) => *a,
                    None => closed_form_alpha(&probe)?,
                };
                let with_alpha = probe.with_alpha(alpha)?;
                let phi = if matches!(scheme, Scheme::CgfDelayed { .. }) {
                    resolve_phi(spec, &with_alpha, &mc)?
                } else {
                    0.0
                };
                let cfg = SchemeConfig::new(
                    spec.num_tx,
                    spec.num_rx,
                    spec.block_len,
                    spec.train_len,
                    power,
                    alpha,
                    normalize_delayed(scheme, spec, phi)?,
                )?;
                let mut row = vec![
                    snr,
                    rho,
                    spec.train_len as f64,
                    spec.delay as f64,
                    alpha,
                    phi,
                ];
                if spec.with_gap {
                    let g = gap_estimate(&cfg, &mc)?;
                    row.push(g.lower.mean);
                    row.push(g.lower.stderr);
                    row.push(g.gap_ratio);
                } else {
                    let est = evaluate(&cfg, &mc)?;
                    row.push(est.mean);
                    row.push(est.stderr);
                }
                table.push(row);
            }
        }
    }
    Ok(table)
}

/// Rewrite the placeholder `phi` of a delayed scheme.
fn normalize_delayed(scheme: Scheme, spec: &ExperimentSpec, phi: f64) -> Result<Scheme> {
    Ok(match scheme {
        Scheme::CgfDelayed { delay, .. } => Scheme::CgfDelayed {
            delay,
            phi: if delay == 0 {
                0.0
            } else if delay == spec.block_len - spec.train_len {
                1.0
            } else {
                phi
            },
        },
        other => other,
    })
}

fn run_phi_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec![
        "pd_db", "nt", "nr", "beta", "phi_star", "mean", "stderr",
    ]);
    let configs: &[(usize, usize, f64)] = &[(2, 2, 0.1), (2, 2, 0.2), (4, 4, 0.2)];
    let grid: Vec<f64> = (-5..=15).map(|k| 2.0 * k as f64).collect(); // -10..30 dB
    for &(nt, nr, beta) in configs {
        for &pd_db in &grid {
            let pd = db_to_linear(pd_db);
            let sol = phi_star_perfect_csi(nt, nr, beta, pd, &mc)?;
            let est = perfect_csi_delayed_clb(nt, nr, beta, sol.phi_star, pd, &mc)?;
            table.push(vec![
                pd_db,
                nt as f64,
                nr as f64,
                beta,
                sol.phi_star,
                est.mean,
                est.stderr,
            ]);
        }
    }
    Ok(table)
}

fn run_snr_delayless(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec![
        "snr_db",
        "equal_power",
        "lp",
        "alpha",
        "mean",
        "stderr",
    ]);
    let (nt, nr, block) = (4, 4, 100);
    for k in 0..=10 {
        let snr = 2.0 * k as f64;
        let power = db_to_linear(snr);

        // Optimal temporal allocation at the minimal training length.
        let cfg = SchemeConfig::new(nt, nr, block, nt, power, 0.5, Scheme::CgfDelayless)?;
        let alpha = closed_form_alpha(&cfg)?;
        let est = evaluate(&cfg.with_alpha(alpha)?, &mc)?;
        table.push(vec![snr, 0.0, nt as f64, alpha, est.mean, est.stderr]);

        // Equal power per transmission; training length found numerically.
        let (lp, est) = best_equal_power_length(nt, nr, block, power, &mc)?;
        let alpha_eq = (block - lp) as f64 / block as f64;
        table.push(vec![snr, 1.0, lp as f64, alpha_eq, est.mean, est.stderr]);
    }
    Ok(table)
}

/// Best training length under equal pilot/data power (`Pp = Pd = P`), which
/// pins `alpha = Ld / L`.
pub fn best_equal_power_length(
    num_tx: usize,
    num_rx: usize,
    block_len: usize,
    power: f64,
    mc: &MonteCarlo,
) -> Result<(usize, CapacityEstimate)> {
    let mut best: Option<(usize, CapacityEstimate)> = None;
    for lp in num_tx..=(block_len / 2).max(num_tx + 1) {
        let alpha = (block_len - lp) as f64 / block_len as f64;
        let cfg = SchemeConfig::new(
            num_tx,
            num_rx,
            block_len,
            lp,
            power,
            alpha,
            Scheme::CgfDelayless,
        )?;
        let est = evaluate(&cfg, mc)?;
        match &best {
            Some((_, b)) if est.mean <= b.mean => {
                // Capacity is unimodal in the training length; stop once it
                // starts falling to keep the scan cheap.
                break;
            }
            _ => best = Some((lp, est)),
        }
    }
    Ok(best.expect("scan covers at least one length"))
}

fn run_snr_delayed(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec!["snr_db", "beta", "phi", "optimized", "mean", "stderr"]);
    let (nt, nr, block, lp, d) = (4, 4, 100, 4, 20);
    let beta = d as f64 / (block - lp) as f64;
    for k in 0..=10 {
        let snr = 2.0 * k as f64;
        let power = db_to_linear(snr);
        let base = SchemeConfig::new(
            nt,
            nr,
            block,
            lp,
            power,
            0.5,
            Scheme::CgfDelayed {
                delay: d,
                phi: beta,
            },
        )?;
        let alpha = closed_form_alpha(&base)?;
        let est = evaluate(&base.with_alpha(alpha)?, &mc)?;
        table.push(vec![snr, beta, beta, 0.0, est.mean, est.stderr]);
    }
    for &snr in &[4.0, 10.0, 16.0] {
        let power = db_to_linear(snr);
        let base = SchemeConfig::new(
            nt,
            nr,
            block,
            lp,
            power,
            0.5,
            Scheme::CgfDelayed {
                delay: d,
                phi: beta,
            },
        )?;
        let alpha = closed_form_alpha(&base)?;
        let seeded = base.with_alpha(alpha)?;
        let (phi, est) = grid_optimal_phi(&seeded, 0.01, &mc)?;
        table.push(vec![snr, beta, phi, 1.0, est.mean, est.stderr]);
    }
    Ok(table)
}

fn run_alpha_vs_rho(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec![
        "rho",
        "lp",
        "alpha_numeric",
        "alpha_closed",
        "mean",
        "stderr",
    ]);
    let (nt, nr, block) = (4, 4, 20);
    let power = db_to_linear(10.0);
    for lp in 1..=nt {
        for k in 0..=9 {
            let rho = 0.1 * k as f64;
            let cov = CovarianceSpec::exponential(nt, rho)?;
            let cfg = SchemeConfig::new(nt, nr, block, lp, power, 0.5, Scheme::Ccf(cov))?;
            let search = numeric_alpha(&cfg, &mc, 0.01)?;
            let closed = alpha_star(&gamma_ccf(block - lp, lp)?)?;
            let est = evaluate(&cfg.with_alpha(search.alpha)?, &mc)?;
            table.push(vec![
                rho,
                lp as f64,
                search.alpha,
                closed,
                est.mean,
                est.stderr,
            ]);
        }
    }
    Ok(table)
}

fn run_cap_vs_rho_2x2(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec!["rho", "lp", "spatial_opt", "alpha", "mean", "stderr"]);
    let (nt, nr, block) = (2, 2, 20);
    let power = db_to_linear(10.0);
    for k in 0..=18 {
        let rho = 0.05 * k as f64;
        let cov = CovarianceSpec::exponential(nt, rho)?;

        let a1 = alpha_star(&gamma_ccf(block - 1, 1)?)?;
        let bf = SchemeConfig::new(nt, nr, block, 1, power, a1, Scheme::Ccf(cov.clone()))?;
        let est = evaluate(&bf, &mc)?;
        table.push(vec![rho, 1.0, 0.0, a1, est.mean, est.stderr]);

        let a2 = alpha_star(&gamma_ccf(block - 2, 2)?)?;
        let eq = SchemeConfig::new(nt, nr, block, 2, power, a2, Scheme::Ccf(cov.clone()))?;
        let est = evaluate(&eq, &mc)?;
        table.push(vec![rho, 2.0, 0.0, a2, est.mean, est.stderr]);

        let (_, best) = best_spatial_split(&eq, 200, &mc)?;
        table.push(vec![rho, 2.0, 1.0, a2, best.mean, best.stderr]);
    }
    Ok(table)
}

/// Best two-channel data power split found by seeded random search over the
/// one-parameter family `q = (t Pd, (1-t) Pd)`.
pub fn best_spatial_split(
    cfg: &SchemeConfig,
    points: usize,
    mc: &MonteCarlo,
) -> Result<(f64, CapacityEstimate)> {
    let pd = cfg.data_power();
    let mut search_stream = crate::rng::RandomStream::new(mc.seed ^ 0x5EED_5EED);
    let mut best: Option<(f64, CapacityEstimate)> = None;
    for k in 0..=points {
        // Include the endpoints of interest deterministically, then sample.
        let t = match k {
            0 => 0.5,
            1 => 1.0,
            _ => 0.5 + 0.5 * search_stream.next_uniform(),
        };
        let est =
            crate::capacity::evaluate_ccf_with_data_powers(cfg, &[t * pd, (1.0 - t) * pd], mc)?;
        if best.as_ref().is_none_or(|(_, b)| est.mean > b.mean) {
            best = Some((t, est));
        }
    }
    Ok(best.expect("search grid is non-empty"))
}

fn run_cap_vs_rho_4x4(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mc = spec.mc();
    let mut table = ResultTable::new(vec!["rho", "lp", "alpha", "mean", "stderr"]);
    let (nt, nr, block) = (4, 4, 20);
    let power = db_to_linear(10.0);
    for lp in 1..=nt {
        let alpha = alpha_star(&gamma_ccf(block - lp, lp)?)?;
        for k in 0..=9 {
            let rho = 0.1 * k as f64;
            let cov = CovarianceSpec::exponential(nt, rho)?;
            let cfg = SchemeConfig::new(nt, nr, block, lp, power, alpha, Scheme::Ccf(cov))?;
            let est = evaluate(&cfg, &mc)?;
            table.push(vec![rho, lp as f64, alpha, est.mean, est.stderr]);
        }
    }
    Ok(table)
}

/// A preset spec for `figure <name>` runs; grid contents are fixed by the
/// preset, only sampling parameters and the output path vary.
pub fn preset(
    kind: ExperimentKind,
    trials: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        scheme: SchemeKind::NonFeedback,
        num_tx: 4,
        num_rx: 4,
        block_len: 100,
        train_len: 4,
        delay: 0,
        snr_db: vec![10.0],
        rho: Vec::new(),
        alpha: AlphaSpec::Auto,
        phi: PhiSpec::Beta,
        trials,
        seed,
        with_gap: false,
        out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str =
        "scheme=ccf\nnt=4\nnr=4\nblock_len=20\nsnr_db=10\nrho=0.5\npilot_len=2\nalpha=auto\n";

    #[test]
    fn parses_reference_config() {
        let spec = parse_config(BASE).unwrap();
        assert_eq!(spec.scheme, SchemeKind::Ccf);
        assert_eq!(spec.num_tx, 4);
        assert_eq!(spec.train_len, 2);
        assert_eq!(spec.alpha, AlphaSpec::Auto);
        assert_eq!(spec.trials, 10_000);
        assert_eq!(spec.seed, 42);
    }

    #[test]
    fn rejects_out_of_range_alpha() {
        let text = BASE.replace("alpha=auto", "alpha=1.5");
        match parse_config(&text) {
            Err(Error::Config { field, line, .. }) => {
                assert_eq!(field, "alpha");
                assert_eq!(line, Some(8));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_required_key() {
        let text = BASE.replace("nt=4\n", "");
        match parse_config(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "nt"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let text = format!("{BASE}bogus=1\n");
        match parse_config(&text) {
            Err(Error::Config { field, line, .. }) => {
                assert_eq!(field, "bogus");
                assert_eq!(line, Some(9));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_keys_foreign_to_the_scheme() {
        // Correlation on an i.i.d. scheme.
        let text = "scheme=cgf\nnt=2\nnr=2\nblock_len=20\nsnr_db=10\nrho=0.5\n";
        match parse_config(text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "rho"),
            other => panic!("expected config error, got {other:?}"),
        }
        // Data power division without a feedback delay.
        let text = format!("{BASE}phi=0.3\n");
        match parse_config(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "phi"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# capacity sweep\n\n{BASE}trials = 500 # fast\n");
        let spec = parse_config(&text).unwrap();
        assert_eq!(spec.trials, 500);
    }

    #[test]
    fn custom_sweep_produces_one_row_per_point() {
        let text =
            "scheme=nonfeedback\nnt=2\nnr=2\nblock_len=20\nsnr_db=0,10\ntrials=200\nseed=1\n";
        let spec = parse_config(text).unwrap();
        let table = run(&spec, true).unwrap();
        assert_eq!(table.rows.len(), 2);
        let mean_col = table.column("mean").unwrap();
        assert!(table.rows[1][mean_col] > table.rows[0][mean_col]);
    }

    #[test]
    fn csv_is_deterministic_and_atomic() {
        let dir = std::env::temp_dir().join(format!("psam-exp-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("sweep.csv");
        let text = format!(
            "scheme=nonfeedback\nnt=2\nnr=2\nblock_len=20\nsnr_db=10\ntrials=200\nseed=9\nout={}\n",
            out.display()
        );
        let spec = parse_config(&text).unwrap();
        run(&spec, true).unwrap();
        let first = std::fs::read_to_string(&out).unwrap();
        run(&spec, true).unwrap();
        let second = std::fs::read_to_string(&out).unwrap();
        assert_eq!(first, second, "deterministic CSV must be byte-identical");
        assert!(first.starts_with("snr_db,"), "header row expected");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn alpha_auto_resolves_to_closed_form() {
        let spec = parse_config(&BASE.replace("trials", "x").replace("x=", "trials="))
            .unwrap_or_else(|_| parse_config(BASE).unwrap());
        let mut spec = spec;
        spec.trials = 200;
        let table = run(&spec, true).unwrap();
        let alpha_col = table.column("alpha").unwrap();
        // gamma = 18/16 = 1.125 -> alpha* = 0.75 for Lp = 2, L = 20.
        assert!((table.rows[0][alpha_col] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cell_format_significant_digits() {
        assert_eq!(format_cell(0.0), "0");
        assert_eq!(format_cell(10.0), "10");
        assert_eq!(format_cell(0.20833333333333334), "2.08333333333e-1");
    }
}
