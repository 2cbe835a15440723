// Copyright 2026 TFGKP Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every command reads an optional JSON config file (one section per
//! command), lets flags override it, and echoes the effective config into
//! its artifacts. Frequencies cross this boundary as ordinary GHz (THz for
//! the carrier); times are ps.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};

use crate::detection::{self, DetectorSpec, LineModel};
use crate::elements::InterleaverSpec;
use crate::error_budget::{self, BroadeningSpec, ErfConvention, SweepParam};
use crate::fock::{self, Circuit};
use crate::func::{AnalyticShape, AxisKind, GridFunction};
use crate::states::{lorentzian_peak, temporal_gaussian_envelope, TfgkpState, TimeConstruction};
use crate::{Error, Result, VERSION};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TFGKP_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// `2 pi f` in rad/ps for `f` in GHz.
pub fn ghz_to_rad_ps(f: f64) -> f64 {
    2.0 * PI * f * 1e-3
}

pub fn rad_ps_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI) * 1e3
}

pub fn thz_to_rad_ps(f: f64) -> f64 {
    2.0 * PI * f
}

#[derive(Debug, Parser)]
#[command(
    name = "tfgkp",
    version,
    about = "Error budgets, detection and gate simulation for time-frequency GKP qubits"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for artifacts (default: $TFGKP_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Escalate width and overlap warnings to errors.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold constants for an error rate, against the published values.
    Thresholds(ThresholdsArgs),
    /// Hardware requirements from detector jitter.
    Requirements(RequirementsArgs),
    /// Closed-form and quadrature error probabilities over one width.
    Sweep(SweepArgs),
    /// Heralded circuit run with the exact or float simulator.
    Simulate(SimulateArgs),
    /// Spectral and temporal amplitude CSVs of a state.
    State(StateArgs),
    /// Monte-Carlo detection records for a state.
    Detect(DetectArgs),
}

/// Overlays the non-null fields of `flags` on the command's config section.
fn merge<T: Serialize + DeserializeOwned>(file: Option<&Value>, section: &str, flags: &T) -> Result<T> {
    let mut base = file.and_then(|v| v.get(section)).cloned().unwrap_or_else(|| json!({}));
    if !base.is_object() {
        return Err(crate::invalid(format!("config section '{section}' must be an object")));
    }
    if let Value::Object(over) = serde_json::to_value(flags)? {
        let obj = base.as_object_mut().expect("checked above");
        for (k, v) in over {
            if !v.is_null() {
                obj.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(base)?)
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_rate: Option<f64>,
    /// Print JSON instead of a table.
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Convention {
    Standard,
    NormalCdf,
}

impl From<Convention> for ErfConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Standard => ErfConvention::Standard,
            Convention::NormalCdf => ErfConvention::NormalCdf,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct RequirementsArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_fwhm_ps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_rate: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Reading of the printed erf in the middle constant.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepWidth {
    /// Detector jitter FWHM, ps.
    DtI,
    /// Coherent temporal FWHM, ps.
    DtC,
    /// Coherent linewidth FWHM, GHz.
    DfC,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<SweepWidth>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_i_ps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_c_ps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_c_ghz: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Line spacing `omega_r / 2 pi`, GHz.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r_ghz: Option<f64>,
    /// Output file name inside the output directory.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Circuit JSON file, or the name of a built-in circuit.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<String>,
    /// Complex-float arithmetic instead of exact proof mode.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub float: Option<bool>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<f64>,
    /// Outcome samples drawn from the branch table (0 = none).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StateBasis {
    Frequency,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PeakKind {
    Gaussian,
    Lorentzian,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<StateBasis>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r_ghz: Option<f64>,
    /// Carrier `omega_0 / 2 pi`, THz.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_0_thz: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak: Option<PeakKind>,
    /// Intensity FWHM of one comb line, GHz.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_fwhm_ghz: Option<f64>,
    /// Intensity FWHM of the temporal envelope, ps.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_fwhm_ps: Option<f64>,
    /// Build time-basis states directly instead of by DFT.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateConfig {
    pub basis: StateBasis,
    pub index: usize,
    pub dim: usize,
    pub omega_r_ghz: f64,
    pub omega_0_thz: f64,
    pub peak: PeakKind,
    pub peak_fwhm_ghz: f64,
    pub envelope_fwhm_ps: f64,
    pub direct: bool,
}

impl StateParams {
    fn resolve(&self) -> StateConfig {
        StateConfig {
            basis: self.basis.unwrap_or(StateBasis::Frequency),
            index: self.index.unwrap_or(0),
            dim: self.dim.unwrap_or(2),
            omega_r_ghz: self.omega_r_ghz.unwrap_or(21.0),
            omega_0_thz: self.omega_0_thz.unwrap_or(193.4),
            peak: self.peak.unwrap_or(PeakKind::Lorentzian),
            peak_fwhm_ghz: self.peak_fwhm_ghz.unwrap_or(0.1),
            envelope_fwhm_ps: self.envelope_fwhm_ps.unwrap_or(10.0),
            direct: self.direct.unwrap_or(false),
        }
    }
}

impl StateConfig {
    pub fn build(&self) -> Result<TfgkpState> {
        let omega_r = ghz_to_rad_ps(self.omega_r_ghz);
        let omega_0 = thz_to_rad_ps(self.omega_0_thz);
        let width = ghz_to_rad_ps(self.peak_fwhm_ghz);
        if !(width >= 0.0) || !(self.envelope_fwhm_ps > 0.0) {
            return Err(crate::invalid("peak width must be >= 0 and envelope width > 0"));
        }
        let peak = match (self.peak, width) {
            (_, w) if w == 0.0 => AnalyticShape::dirac(),
            (PeakKind::Gaussian, w) => AnalyticShape::gaussian_amplitude(error_budget::fwhm_to_sigma(w)),
            (PeakKind::Lorentzian, w) => lorentzian_peak(w / 2.0),
        };
        let envelope = temporal_gaussian_envelope(error_budget::fwhm_to_sigma(self.envelope_fwhm_ps));
        match self.basis {
            StateBasis::Frequency => {
                TfgkpState::frequency_basis(self.index, self.dim, omega_r, omega_0, peak, envelope)
            }
            StateBasis::Time => {
                let c = if self.direct { TimeConstruction::Direct } else { TimeConstruction::Dft };
                TfgkpState::time_basis(self.index, self.dim, omega_r, omega_0, peak, envelope, c)
            }
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct StateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateParams,
    /// Write spectral and temporal CSVs into the output directory.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DetectorChoice {
    Time,
    Frequency,
    OiBank,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct DetectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateParams,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorChoice>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_fwhm_ps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_fwhm_ghz: Option<f64>,
    /// Sample the full interfering density instead of isolated lines.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherent: Option<bool>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    out_dir: PathBuf,
    strict: bool,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(self.out_dir.join(name))
    }

    fn warn(&mut self, msg: &str) -> Result<()> {
        if self.strict {
            return Err(Error::Strict(msg.to_string()));
        }
        writeln!(self.out, "warning: {msg}")?;
        Ok(())
    }
}

/// `# tfgkp <version>` and `# config <json>` comment lines.
fn csv_header(w: &mut dyn Write, config: &Value) -> Result<()> {
    writeln!(w, "# tfgkp {VERSION}")?;
    writeln!(w, "# config {}", serde_json::to_string(config)?)?;
    Ok(())
}

fn effective(section: &str, cfg: &impl Serialize) -> Result<Value> {
    Ok(json!({ section: serde_json::to_value(cfg)? }))
}

/// `sc` flattened with `extra`, in the shape the config section accepts.
fn with_state(sc: &StateConfig, extra: Value) -> Result<Value> {
    let mut v = serde_json::to_value(sc)?;
    if let (Some(o), Value::Object(e)) = (v.as_object_mut(), extra) {
        o.extend(e);
    }
    Ok(v)
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "\u{2014}".to_string(), |v| format!("{v:.prec$}"))
}

fn pct(x: f64) -> String {
    format!("{:+.1}%", 100.0 * x)
}

fn cmd_thresholds(ctx: &mut Ctx, args: ThresholdsArgs, cfg: ThresholdsArgs) -> Result<()> {
    let e = cfg.error_rate.unwrap_or(0.01);
    let r = error_budget::thresholds(e)?;
    let conf = effective("thresholds", &ThresholdsArgs { error_rate: Some(e), json: false })?;
    if args.json {
        let mut v = conf;
        v["tool"] = json!(format!("tfgkp {VERSION}"));
        v["report"] = serde_json::to_value(r)?;
        v["published_deviations"] = json!(r
            .published_deviations()
            .iter()
            .map(|(n, val, dev)| json!({"constant": n, "value": val, "relative_deviation": dev}))
            .collect::<Vec<_>>());
        writeln!(ctx.out, "{}", serde_json::to_string_pretty(&v)?)?;
        return Ok(());
    }
    let o = &mut ctx.out;
    writeln!(o, "# tfgkp {VERSION}")?;
    writeln!(o, "error rate e = {e}   A = {:.6}", r.a)?;
    writeln!(o, "{:<34} {:>10} {:>8} {:>9}", "constant", "value", "published", "deviation")?;
    let dev = r.published_deviations();
    let rows = [
        ("dt_i / dt_c  (sqrt A)", dev[0], error_budget::PUBLISHED_TI_TC),
        ("dt_c / bin   (standard erf)", dev[1], error_budget::PUBLISHED_TC_BIN),
        ("dt_c / bin   (normal-CDF erf)", dev[2], error_budget::PUBLISHED_TC_BIN),
        ("df_c / bin   (tan)", dev[3], error_budget::PUBLISHED_FC_BIN),
    ];
    for (name, (_, v, d), published) in rows {
        writeln!(o, "{name:<34} {v:>10.5} {published:>8} {:>9}", pct(d))?;
    }
    writeln!(o, "finesse (omega_r/d)/df_c = {:.1}", r.finesse)?;
    writeln!(
        o,
        "note: the middle constant depends on how the printed erf is read; neither reading gives {}. \
         Pass/fail checks use the normal-CDF reading, which the quadrature oracle confirms.",
        error_budget::PUBLISHED_TC_BIN
    )?;
    Ok(())
}

fn cmd_requirements(ctx: &mut Ctx, args: RequirementsArgs, cfg: RequirementsArgs) -> Result<()> {
    let resolved = RequirementsArgs {
        jitter_fwhm_ps: Some(cfg.jitter_fwhm_ps.unwrap_or(4.3)),
        error_rate: Some(cfg.error_rate.unwrap_or(0.01)),
        dim: Some(cfg.dim.unwrap_or(2)),
        convention: Some(cfg.convention.unwrap_or(Convention::NormalCdf)),
        json: false,
    };
    let (dt_i, e, d) = (resolved.jitter_fwhm_ps.unwrap(), resolved.error_rate.unwrap(), resolved.dim.unwrap());
    if dt_i < 0.0 || d == 0 {
        return Err(crate::invalid("jitter must be >= 0 and the dimension >= 1"));
    }
    let r = error_budget::hardware_requirements(dt_i, e, d, resolved.convention.unwrap().into())?;
    let conf = effective("requirements", &resolved)?;
    if args.json {
        let mut v = conf;
        v["tool"] = json!(format!("tfgkp {VERSION}"));
        v["report"] = json!({
            "dt_c_min_ps": r.dt_c_min,
            "time_bin_min_ps": r.time_bin_min,
            "omega_r_max_ghz": r.omega_r_max_ghz(),
            "df_c_max_ghz": r.df_c_max_ghz(),
            "finesse": r.finesse,
            "comb_lines": r.comb_lines,
        });
        writeln!(ctx.out, "{}", serde_json::to_string_pretty(&v)?)?;
        return Ok(());
    }
    let o = &mut ctx.out;
    writeln!(o, "# tfgkp {VERSION}")?;
    writeln!(o, "# config {}", serde_json::to_string(&conf)?)?;
    writeln!(o, "{:<36} {:>12}", "quantity", "value")?;
    writeln!(o, "{:<36} {:>12.3}", "dt_c,min (ps)", r.dt_c_min)?;
    writeln!(o, "{:<36} {:>12.3}", "time bin tau_r/d, min (ps)", r.time_bin_min)?;
    writeln!(o, "{:<36} {:>12}", "omega_r/2pi, max (GHz)", fmt_opt(r.omega_r_max_ghz(), 3))?;
    writeln!(o, "{:<36} {:>12}", "df_c/2pi, max (GHz)", fmt_opt(r.df_c_max_ghz(), 4))?;
    writeln!(o, "{:<36} {:>12.1}", "finesse (omega_r/d)/df_c", r.finesse)?;
    writeln!(o, "{:<36} {:>12}", "comb lines in the envelope", fmt_opt(r.comb_lines, 2))?;
    Ok(())
}

fn cmd_sweep(ctx: &mut Ctx, cfg: SweepArgs) -> Result<()> {
    let param = cfg.param.unwrap_or(SweepWidth::DfC);
    let (lo, hi) = match param {
        SweepWidth::DtI => (0.5, 5.0),
        SweepWidth::DtC => (5.0, 25.0),
        SweepWidth::DfC => (0.02, 0.4),
    };
    let resolved = SweepArgs {
        param: Some(param),
        from: Some(cfg.from.unwrap_or(lo)),
        to: Some(cfg.to.unwrap_or(hi)),
        steps: Some(cfg.steps.unwrap_or(10)),
        dt_i_ps: Some(cfg.dt_i_ps.unwrap_or(2.0)),
        dt_c_ps: Some(cfg.dt_c_ps.unwrap_or(10.0)),
        df_c_ghz: Some(cfg.df_c_ghz.unwrap_or(0.1)),
        dim: Some(cfg.dim.unwrap_or(2)),
        omega_r_ghz: Some(cfg.omega_r_ghz.unwrap_or(21.0)),
        out: Some(cfg.out.clone().unwrap_or_else(|| "sweep.csv".into())),
    };
    let steps = resolved.steps.unwrap();
    if steps == 0 {
        return Err(crate::invalid("steps must be positive"));
    }
    let base = BroadeningSpec::new(
        resolved.dt_i_ps.unwrap(),
        resolved.dt_c_ps.unwrap(),
        ghz_to_rad_ps(resolved.df_c_ghz.unwrap()),
        resolved.dim.unwrap(),
        ghz_to_rad_ps(resolved.omega_r_ghz.unwrap()),
    )?;
    let shown = error_budget::linspace(resolved.from.unwrap(), resolved.to.unwrap(), steps);
    let (sp, internal): (SweepParam, Vec<f64>) = match param {
        SweepWidth::DtI => (SweepParam::DtI, shown.clone()),
        SweepWidth::DtC => (SweepParam::DtC, shown.clone()),
        SweepWidth::DfC => (SweepParam::DfC, shown.iter().map(|&f| ghz_to_rad_ps(f)).collect()),
    };
    let mut rows = error_budget::sweep(&base, sp, &internal)?;
    for (r, v) in rows.iter_mut().zip(&shown) {
        r.value = *v;
    }
    let mut body = Vec::new();
    error_budget::write_sweep_csv(&mut body, sp, &rows)?;
    let mut text = String::from_utf8(body).map_err(|e| crate::invalid(e.to_string()))?;
    if param == SweepWidth::DfC {
        text = text.replacen(sp.column(), "df_c_ghz", 1);
    }
    let path = ctx.path(resolved.out.as_deref().unwrap())?;
    let mut f = fs::File::create(&path)?;
    csv_header(&mut f, &effective("sweep", &resolved)?)?;
    f.write_all(text.as_bytes())?;
    writeln!(ctx.out, "wrote {} rows to {}", rows.len(), path.display())?;
    Ok(())
}

fn load_circuit(spec: &str) -> Result<Circuit> {
    let p = Path::new(spec);
    if p.exists() {
        Circuit::load(p)
    } else {
        fock::builtin(spec)
    }
}

fn cmd_simulate(ctx: &mut Ctx, args: SimulateArgs, cfg: SimulateArgs) -> Result<()> {
    let resolved = SimulateArgs {
        circuit: Some(cfg.circuit.clone().ok_or_else(|| crate::invalid("--circuit is required"))?),
        float: Some(cfg.float.unwrap_or(false)),
        visibility: Some(cfg.visibility.unwrap_or(1.0)),
        shots: Some(cfg.shots.unwrap_or(0)),
        seed: Some(cfg.seed.unwrap_or(1)),
        json: false,
    };
    let circuit = load_circuit(resolved.circuit.as_deref().unwrap())?;
    let report = fock::run_circuit(&circuit, resolved.visibility.unwrap(), !resolved.float.unwrap())?;
    let conf = effective("simulate", &resolved)?;
    let mut doc = conf.clone();
    doc["tool"] = json!(format!("tfgkp {VERSION}"));
    doc["report"] = serde_json::to_value(&report)?;
    let path = ctx.path(&format!("{}_report.json", circuit.name))?;
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    if args.json {
        writeln!(ctx.out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        write!(ctx.out, "{}", report.table())?;
        writeln!(ctx.out, "report: {}", path.display())?;
    }

    let shots = resolved.shots.unwrap();
    if shots > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(resolved.seed.unwrap());
        let cdf: Vec<f64> = report
            .branches
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b.probability.value;
                Some(*acc)
            })
            .collect();
        let total = cdf.last().copied().unwrap_or(1.0);
        let spath = ctx.path(&format!("{}_shots.csv", circuit.name))?;
        let mut f = fs::File::create(&spath)?;
        csv_header(&mut f, &conf)?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["shot", "outcome", "heralded", "feed_forward"])?;
        let mut hits = 0usize;
        for shot in 0..shots {
            let u = rng.random::<f64>() * total;
            let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            let b = &report.branches[i];
            hits += b.heralded as usize;
            w.write_record([
                shot.to_string(),
                serde_json::to_string(&b.outcome)?,
                b.heralded.to_string(),
                b.feed_forward.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        let p = hits as f64 / shots as f64;
        let want = report.success_prob.value;
        let se = (want * (1.0 - want) / shots as f64).sqrt();
        writeln!(ctx.out, "sampled success = {p:.6} over {shots} shots (expected {want:.6} +- {se:.6})")?;
        writeln!(ctx.out, "shots: {}", spath.display())?;
    }
    if !report.passed() {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        return Err(Error::Assertion(format!("circuit '{}' failed checks: {}", circuit.name, failed.join(", "))));
    }
    Ok(())
}

fn write_grid_csv(w: &mut dyn Write, g: &GridFunction, x_name: &str, x_scale: f64, amp_scale: f64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([x_name, "re", "im", "density"])?;
    for (i, s) in g.samples().iter().enumerate() {
        let a = s * amp_scale;
        out.write_record([
            format!("{:.12e}", g.x(i) * x_scale),
            format!("{:.12e}", a.re),
            format!("{:.12e}", a.im),
            format!("{:.12e}", a.norm_sqr()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_state(ctx: &mut Ctx, cfg: StateArgs) -> Result<()> {
    let sc = cfg.state.resolve();
    let state = sc.build()?;
    if let Some(w) = state.width_warning() {
        ctx.warn(&w)?;
    }
    let conf = effective("state", &with_state(&sc, json!({ "dump": cfg.dump.unwrap_or(false) }))?)?;
    writeln!(ctx.out, "# tfgkp {VERSION}")?;
    writeln!(ctx.out, "state: {}", serde_json::to_string(&sc)?)?;
    writeln!(ctx.out, "tau_r = {:.4} ps, time bin = {:.4} ps", state.tau_r(), state.tau_r() / sc.dim as f64)?;
    if cfg.dump.unwrap_or(false) {
        // detuning from the carrier; amplitudes per sqrt(GHz) so that sum density * df = 1
        let spec = state.spectral_amplitude_grid(state.spectral_grid())?;
        let scale = (ghz_to_rad_ps(1.0)).sqrt();
        for (name, g, x, xs, amp) in [
            ("state_spectral.csv", spec, "detuning_ghz", rad_ps_to_ghz(1.0), scale),
            ("state_temporal.csv", state.temporal_amplitude_grid(state.temporal_grid())?, "t_ps", 1.0, 1.0),
        ] {
            debug_assert!(matches!(g.axis(), AxisKind::AngularFrequency | AxisKind::TimePs));
            let path = ctx.path(name)?;
            let mut f = fs::File::create(&path)?;
            csv_header(&mut f, &conf)?;
            write_grid_csv(&mut f, &g, x, xs, amp)?;
            writeln!(ctx.out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn cmd_detect(ctx: &mut Ctx, cfg: DetectArgs) -> Result<()> {
    let sc = cfg.state.resolve();
    let state = sc.build()?;
    let choice = cfg.detector.unwrap_or(DetectorChoice::Time);
    let shots = cfg.shots.unwrap_or(100_000);
    let seed = cfg.seed.unwrap_or(1);
    let jitter = cfg.jitter_fwhm_ps.unwrap_or(0.0);
    let resolution = cfg.resolution_fwhm_ghz.unwrap_or(0.0);
    let coherent = cfg.coherent.unwrap_or(false);
    let out = cfg.out.clone().unwrap_or_else(|| "detect.csv".into());
    let mut spec = match choice {
        DetectorChoice::Time => DetectorSpec::time(jitter),
        DetectorChoice::Frequency => DetectorSpec::frequency(ghz_to_rad_ps(resolution)),
        DetectorChoice::OiBank => {
            DetectorSpec::oi_bank(InterleaverSpec::ideal(sc.dim, state.omega_r(), state.omega_0())?)
        }
    };
    if coherent {
        spec = spec.with_line_model(LineModel::Coherent);
    }
    let det = detection::Detector::new(&state, &spec)?;
    if let Some(w) = det.warning() {
        ctx.warn(w)?;
    }
    let (records, lost) = det.sample(shots, seed)?;
    let conf = effective(
        "detect",
        &with_state(
            &sc,
            json!({
            "detector": choice, "jitter_fwhm_ps": jitter, "resolution_fwhm_ghz": resolution,
            "coherent": coherent, "shots": shots, "seed": seed, "out": out,
            }),
        )?,
    )?;
    let path = ctx.path(&out)?;
    let mut f = fs::File::create(&path)?;
    csv_header(&mut f, &conf)?;
    let mut w = csv::Writer::from_writer(f);
    let raw = if spec.is_time() { "arrival_ps" } else { "frequency_ghz" };
    w.write_record(["shot", "port", raw, "fold_index", "decoded_bin"])?;
    let mut counts = vec![0u64; sc.dim];
    for (i, r) in records.iter().enumerate() {
        counts[r.decoded_bin] += 1;
        let x = if spec.is_time() { r.raw_value } else { rad_ps_to_ghz(r.raw_value) };
        w.write_record([
            i.to_string(),
            r.port.to_string(),
            format!("{x:.12e}"),
            r.fold_index.to_string(),
            r.decoded_bin.to_string(),
        ])?;
    }
    w.flush()?;
    let n = records.len().max(1) as f64;
    let probs: Vec<String> = counts.iter().map(|&c| format!("{:.6}", c as f64 / n)).collect();
    writeln!(ctx.out, "decoded bin frequencies: [{}] ({} detected, {lost} lost)", probs.join(", "), records.len())?;
    writeln!(ctx.out, "wrote {}", path.display())?;
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => Some(serde_json::from_str::<Value>(&fs::read_to_string(p)?)?),
        None => None,
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Ctx { out, out_dir, strict: cli.strict };
    let f = file.as_ref();
    match cli.command {
        Command::Thresholds(a) => {
            let cfg = merge(f, "thresholds", &a)?;
            cmd_thresholds(&mut ctx, a, cfg)
        }
        Command::Requirements(a) => {
            let cfg = merge(f, "requirements", &a)?;
            cmd_requirements(&mut ctx, a, cfg)
        }
        Command::Sweep(a) => {
            let cfg = merge(f, "sweep", &a)?;
            cmd_sweep(&mut ctx, cfg)
        }
        Command::Simulate(a) => {
            let cfg = merge(f, "simulate", &a)?;
            cmd_simulate(&mut ctx, a, cfg)
        }
        Command::State(a) => {
            let cfg = merge(f, "state", &a)?;
            cmd_state(&mut ctx, cfg)
        }
        Command::Detect(a) => {
            let cfg = merge(f, "detect", &a)?;
            cmd_detect(&mut ctx, cfg)
        }
    }
}

/// Exit code for an error: assertion and strict failures are 1, the rest
/// (bad input, missing files, malformed config) are usage errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Assertion(_) | Error::Strict(_) => EXIT_ASSERTION,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Reports go to `out`, errors to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
