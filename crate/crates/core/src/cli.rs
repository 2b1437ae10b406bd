//! Command-line front end.
//!
//! Every subcommand writes one data file named `<command>_<hash>_s<seed>`
//! plus a `.meta.json` sidecar echoing the resolved parameters. The hash
//! covers the command and every model parameter, so identical inputs
//! produce identically named, byte-identical data files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    estimate_rdc_bound, moving_average, normalize_peak, synthesize_scan, to_detuning_axis,
    BoundOptions, Etalon, ScanGrid, ScanNoise,
};
use crate::constants::*;
use crate::dispersion::{qpm_period, ProcessSpec, SellmeierModel, SellmeierRegistry};
use crate::error::{Error, Result};
use crate::grating::{
    detuning_grid, efficiency_spectrum, ensemble_mean_on_workers, ensemble_mean_with,
    ideal_structure, sample_rdc_structure, GratingSpec, SpectrumModel,
};
use crate::noise::{
    builtin_records, load_records, noise_budget, nsd_prefactor, p_max, table_csv, table_text,
    ConverterParams,
};
use crate::plot::{log_y_svg, Series};
use crate::spectrum::{fmt_f64, load_spectrum, AxisKind};

pub const OUT_DIR_ENV: &str = "QPM_RDC_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "qpm-rdc",
    version,
    about = "RDC poling-error simulation and estimation for QPM crystals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub params: Params,

    /// JSON file with parameters (same names as the flags); flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "qpm-rdc-out")]
    pub out: PathBuf,

    /// Worker threads for Monte Carlo ensembles (does not change results).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Also write an SVG plot next to the data.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// QPM period and domain count for a pump/target pair.
    Design,
    /// Efficiency spectrum of one grating realization.
    Simulate,
    /// Monte Carlo ensemble mean next to the analytic pedestal formula.
    Ensemble,
    /// Bound σ̄ from a measured or synthetic scan.
    Analyze,
    /// Synthetic SFG scan with measurement noise.
    Synth,
    /// Noise spectral density budget.
    Nsd,
    /// Measured and generated NSD of published converters.
    Table,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::Simulate => "simulate",
            Command::Ensemble => "ensemble",
            Command::Analyze => "analyze",
            Command::Synth => "synth",
            Command::Nsd => "nsd",
            Command::Table => "table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Model parameters. All optional; defaults describe the reference
/// 20 mm KTP converter.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    /// Domain length; designed from dispersion when omitted.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_um: Option<f64>,
    /// Overrides N_D = floor(L/l).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_domains: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_bar: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_nm: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_nm: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_start_nm: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_stop_nm: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_step_nm: Option<f64>,
    /// Moving-average width in detuning units.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Far-detuning window `lo,hi`.
    #[arg(long, global = true, value_parser = parse_pair)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_window: Option<(f64, f64)>,
    /// Log-log fit window `lo,hi`.
    #[arg(long, global = true, value_parser = parse_pair)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
    /// Named Sellmeier coefficient set.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sellmeier: Option<String>,
    /// Extra Sellmeier data file replacing the built-in sets.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sellmeier_file: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// `first-order` or `exact`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_start: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_stop: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_step: Option<f64>,
    /// Explicit detunings, comma separated; replaces the x grid.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    /// Spectrum file for `analyze`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Axis of the `analyze` input: wavelength_nm or detuning_x.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_std: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additive_floor: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etalon_amplitude: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etalon_period_nm: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etalon_phase: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_c: Option<f64>,
    /// Effective nonlinearity, pm/V.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_eff: Option<f64>,
    /// Focusing reduction factor in (0, 1].
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_m: Option<f64>,
    /// Records CSV for `table`; bundled records otherwise.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(b > a) {
        return Err(format!("window `{s}` must satisfy lo < hi"));
    }
    Ok((a, b))
}

/// A command with its merged parameter map.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub svg: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let params = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let file: Params = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                merge(file, cli.params)?
            }
            None => cli.params,
        };
        Ok(RunConfig {
            command: cli.command,
            params,
            out: cli.out,
            workers: cli.workers,
            svg: cli.svg,
        })
    }
}

fn merge(base: Params, overrides: Params) -> Result<Params> {
    let mut map = match serde_json::to_value(base)? {
        Value::Object(m) => m,
        _ => unreachable!("Params serializes to an object"),
    };
    if let Value::Object(o) = serde_json::to_value(overrides)? {
        map.extend(o);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))
}

/// Parameters with defaults applied.
struct Resolved {
    registry: SellmeierRegistry,
    model: SellmeierModel,
    pump_nm: f64,
    target_nm: f64,
    grating: GratingSpec,
    seed: u64,
    map: BTreeMap<String, Value>,
}

impl Resolved {
    fn new(p: &Params) -> Result<Self> {
        let registry = match &p.sellmeier_file {
            Some(path) => SellmeierRegistry::load(path)?,
            None => SellmeierRegistry::builtin(),
        };
        let model = match &p.sellmeier {
            Some(name) => registry.get(name)?.clone(),
            None => registry.default_model().clone(),
        };
        let pump_nm = p.pump_nm.unwrap_or(DEFAULT_PUMP_NM);
        let target_nm = p.target_nm.unwrap_or(DEFAULT_TARGET_NM);
        let length_mm = p.length_mm.unwrap_or(DEFAULT_LENGTH_MM);
        let sigma_bar = p.sigma_bar.unwrap_or(0.0);
        let domain_um = match p.domain_um {
            Some(l) => l,
            None => {
                let process = ProcessSpec::from_pump_and_target(&model, pump_nm, target_nm)?;
                qpm_period(&process, length_mm)?.domain_um
            }
        };
        let grating = match p.num_domains {
            Some(n) => GratingSpec::new(domain_um, n, sigma_bar)?,
            None => GratingSpec::from_length(domain_um, length_mm, sigma_bar)?,
        };
        let seed = p.seed.unwrap_or(42);
        let mut map = BTreeMap::new();
        map.insert("sellmeier".into(), json!(model.name));
        map.insert("pump_nm".into(), json!(pump_nm));
        map.insert("target_nm".into(), json!(target_nm));
        map.insert("length_mm".into(), json!(length_mm));
        map.insert("domain_um".into(), json!(grating.domain_um));
        map.insert("num_domains".into(), json!(grating.num_domains));
        map.insert("sigma_bar".into(), json!(sigma_bar));
        map.insert("seed".into(), json!(seed));
        Ok(Resolved {
            registry,
            model,
            pump_nm,
            target_nm,
            grating,
            seed,
            map,
        })
    }

    fn set(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.map
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn process(&self) -> Result<ProcessSpec> {
        ProcessSpec::from_pump_and_target(&self.model, self.pump_nm, self.target_nm)
    }
}

fn spectrum_model(p: &Params) -> Result<SpectrumModel> {
    p.model
        .as_deref()
        .unwrap_or("first-order")
        .parse()
        .map_err(Error::Config)
}

/// What a subcommand produced.
struct Output {
    data: String,
    extension: &'static str,
    results: Value,
    svg: Option<String>,
    stdout: Option<String>,
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub data_path: PathBuf,
    pub meta_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub config_hash: String,
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let p = &config.params;
    let format = p.format.unwrap_or(Format::Csv);
    let mut r = Resolved::new(p)?;
    let output = match config.command {
        Command::Design => design(&mut r, format)?,
        Command::Simulate => simulate(&mut r, p, format)?,
        Command::Ensemble => ensemble(&mut r, p, format, config.workers)?,
        Command::Analyze => analyze(&mut r, p, format)?,
        Command::Synth => synth(&mut r, p, format)?,
        Command::Nsd => nsd(&mut r, p, format)?,
        Command::Table => table(&mut r, p, format)?,
    };

    let canonical = serde_json::to_string(&json!({
        "command": config.command.name(),
        "params": r.map,
    }))?;
    let digest = Sha256::digest(canonical.as_bytes());
    let config_hash = hex::encode(&digest[..8]);
    let stem = format!("{}_{}_s{}", config.command.name(), config_hash, r.seed);

    std::fs::create_dir_all(&config.out)?;
    let data_path = config.out.join(format!("{stem}.{}", output.extension));
    std::fs::write(&data_path, output.data.as_bytes())?;
    let svg_path = match (&output.svg, config.svg) {
        (Some(svg), true) => {
            let path = config.out.join(format!("{stem}.svg"));
            std::fs::write(&path, svg)?;
            Some(path)
        }
        _ => None,
    };
    let meta_path = config.out.join(format!("{stem}.meta.json"));
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": config.command.name(),
        "config_hash": config_hash,
        "seed": r.seed,
        "params": r.map,
        "data_file": file_name(&data_path),
        "results": output.results,
        "available_sellmeier": r.registry.names(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "created_unix": created,
    });
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
    if let Some(text) = output.stdout {
        print!("{text}");
    }
    Ok(RunOutcome {
        data_path,
        meta_path,
        svg_path,
        config_hash,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn kv_csv(rows: &[(&str, f64)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{}\n", fmt_f64(*v)));
    }
    s
}

fn json_data(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn design(r: &mut Resolved, format: Format) -> Result<Output> {
    let process = r.process()?;
    let length_mm = r.map["length_mm"].as_f64().unwrap_or(DEFAULT_LENGTH_MM);
    let d = qpm_period(&process, length_mm)?;
    let results = json!({
        "period_um": d.period_um,
        "domain_um": d.domain_um,
        "num_domains": d.num_domains,
        "delta_k_per_m": d.delta_k_per_m,
        "length_mm": d.length_mm,
        "process": process,
    });
    let data = match format {
        Format::Json => json_data(&results)?,
        Format::Csv => kv_csv(&[
            ("period_um", d.period_um),
            ("domain_um", d.domain_um),
            ("num_domains", d.num_domains as f64),
            ("delta_k_per_m", d.delta_k_per_m),
            ("lambda_r_nm", process.lambda_r),
            ("lambda_m_nm", process.lambda_m),
            ("n_p", process.n_p),
            ("n_r", process.n_r),
            ("n_t", process.n_t),
            ("n_m", process.n_m),
        ]),
    };
    Ok(Output {
        data,
        extension: ext(format),
        stdout: Some(format!(
            "period {:.4} um, domain {:.4} um, N_D {}\n",
            d.period_um, d.domain_um, d.num_domains
        )),
        results,
        svg: None,
    })
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn detunings(p: &Params, default: (f64, f64, f64)) -> Result<Vec<f64>> {
    if let Some(d) = &p.detunings {
        return Ok(d.clone());
    }
    let grid = detuning_grid(
        p.x_start.unwrap_or(default.0),
        p.x_stop.unwrap_or(default.1),
        p.x_step.unwrap_or(default.2),
    );
    if grid.is_empty() {
        return Err(Error::Config("empty detuning grid".into()));
    }
    Ok(grid)
}

fn simulate(r: &mut Resolved, p: &Params, format: Format) -> Result<Output> {
    let model = spectrum_model(p)?;
    let xs = detunings(p, (0.0, 450.0, 0.25))?;
    r.set("model", model)?;
    r.set("detunings", &xs)?;
    let structure = if r.grating.sigma_bar == 0.0 {
        ideal_structure(&r.grating)
    } else {
        sample_rdc_structure(&r.grating, r.seed)?
    };
    let spectrum = efficiency_spectrum(&structure, &xs, &r.grating, model)?;
    let data = match format {
        Format::Csv => spectrum.to_csv_string(),
        Format::Json => json_data(&serde_json::to_value(&spectrum)?)?,
    };
    let svg = log_y_svg(
        "Simulated SFG efficiency",
        "detuning x = ΔkL/π",
        &[Series {
            label: "efficiency",
            x: spectrum.axis(),
            y: spectrum.efficiency(),
        }],
    );
    Ok(Output {
        data,
        extension: ext(format),
        results: json!({ "points": spectrum.len(), "grating": r.grating }),
        svg: Some(svg),
        stdout: None,
    })
}

fn ensemble(
    r: &mut Resolved,
    p: &Params,
    format: Format,
    workers: Option<usize>,
) -> Result<Output> {
    let model = spectrum_model(p)?;
    let xs = detunings(p, (0.5, 450.5, 10.0))?;
    let trials = p.trials.unwrap_or(2000);
    r.set("model", model)?;
    r.set("detunings", &xs)?;
    r.set("trials", trials)?;
    let result = match workers {
        Some(w) => ensemble_mean_on_workers(&r.grating, &xs, trials, r.seed, model, w)?,
        None => ensemble_mean_with(&r.grating, &xs, trials, r.seed, model)?,
    };
    let data = match format {
        Format::Csv => result.to_csv_string(),
        Format::Json => json_data(&serde_json::to_value(&result)?)?,
    };
    let analytic: Vec<f64> = xs
        .iter()
        .map(|&x| {
            crate::noise::expected_noise_efficiency(x, r.grating.sigma_bar, r.grating.num_domains)
        })
        .collect();
    let svg = log_y_svg(
        "Ensemble mean vs analytic pedestal model",
        "detuning x = ΔkL/π",
        &[
            Series {
                label: "Monte Carlo",
                x: &xs,
                y: &result.mean_efficiency,
            },
            Series {
                label: "analytic",
                x: &xs,
                y: &analytic,
            },
        ],
    );
    Ok(Output {
        data,
        extension: ext(format),
        results: json!({ "trials": trials, "points": xs.len() }),
        svg: Some(svg),
        stdout: None,
    })
}

fn bound_options(p: &Params) -> BoundOptions {
    let d = BoundOptions::default();
    BoundOptions {
        far_window: p.far_window.unwrap_or(d.far_window),
        averaging_window: p.window.unwrap_or(d.averaging_window),
        fit_window: p.fit_window.unwrap_or(d.fit_window),
    }
}

fn analyze(r: &mut Resolved, p: &Params, format: Format) -> Result<Output> {
    let input = p
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("`analyze` needs --input <spectrum.csv>".into()))?;
    let axis: AxisKind = p
        .axis
        .as_deref()
        .unwrap_or("wavelength_nm")
        .parse()
        .map_err(Error::Config)?;
    let options = bound_options(p);
    r.set("input", input.display().to_string())?;
    r.set("axis", axis)?;
    r.set("bound_options", options)?;

    let raw = load_spectrum(input, axis)?;
    let detuned = match axis {
        AxisKind::WavelengthNm => to_detuning_axis(&raw, r.pump_nm, &r.grating, &r.model)?,
        AxisKind::DetuningX => raw,
    };
    let normalized = normalize_peak(&detuned)?;
    let process = r.process()?;
    let report = estimate_rdc_bound(&normalized, &r.grating, &process, &options)?;
    let averaged = moving_average(&normalized, options.averaging_window);

    let predictions: Vec<(f64, Vec<f64>)> = COMPARED_SIGMAS
        .iter()
        .map(|&s| {
            let pred = normalized.with_values(
                normalized
                    .axis()
                    .iter()
                    .map(|&x| crate::noise::expected_noise_efficiency(x, s, r.grating.num_domains))
                    .collect(),
            );
            (
                s,
                moving_average(&pred, options.averaging_window)
                    .efficiency()
                    .to_vec(),
            )
        })
        .collect();

    let data = match format {
        Format::Json => json_data(&serde_json::to_value(&report)?)?,
        Format::Csv => {
            let mut s = String::from("detuning_x,efficiency,moving_average");
            for (sigma, _) in &predictions {
                s.push_str(&format!(",predicted_sigma_{sigma}"));
            }
            s.push('\n');
            for i in 0..normalized.len() {
                s.push_str(&format!(
                    "{},{},{}",
                    fmt_f64(normalized.axis()[i]),
                    fmt_f64(normalized.efficiency()[i]),
                    fmt_f64(averaged.efficiency()[i])
                ));
                for (_, pred) in &predictions {
                    s.push_str(&format!(",{}", fmt_f64(pred[i])));
                }
                s.push('\n');
            }
            s
        }
    };
    let labels: Vec<String> = predictions
        .iter()
        .map(|(s, _)| format!("σ̄ = {s}"))
        .collect();
    let mut series = vec![Series {
        label: "moving average",
        x: averaged.axis(),
        y: averaged.efficiency(),
    }];
    for ((_, pred), label) in predictions.iter().zip(&labels) {
        series.push(Series {
            label,
            x: normalized.axis(),
            y: pred,
        });
    }
    let svg = log_y_svg(
        "Moving average vs RDC predictions",
        "detuning x = ΔkL/π",
        &series,
    );
    let stdout = match report.sigma_bound {
        Some(s) => format!(
            "noise floor {:.3e}, sigma_bar <= {:.4}, fit slope {:.3}\n",
            report.noise_floor, s, report.fit.slope
        ),
        None => format!(
            "noise floor {:.3e} does not bound sigma_bar\n",
            report.noise_floor
        ),
    };
    Ok(Output {
        data,
        extension: ext(format),
        results: serde_json::to_value(&report)?,
        svg: Some(svg),
        stdout: Some(stdout),
    })
}

fn synth(r: &mut Resolved, p: &Params, format: Format) -> Result<Output> {
    let d = ScanNoise::default();
    let noise = ScanNoise {
        relative_std: p.relative_std.unwrap_or(d.relative_std),
        additive_floor: p.additive_floor.unwrap_or(d.additive_floor),
        etalon: Etalon {
            amplitude: p.etalon_amplitude.unwrap_or(d.etalon.amplitude),
            period_nm: p.etalon_period_nm.unwrap_or(d.etalon.period_nm),
            phase: p.etalon_phase.unwrap_or(d.etalon.phase),
        },
    };
    let scan = ScanGrid {
        start_nm: p.scan_start_nm.unwrap_or(DEFAULT_SCAN_START_NM),
        stop_nm: p.scan_stop_nm.unwrap_or(DEFAULT_SCAN_STOP_NM),
        step_nm: p.scan_step_nm.unwrap_or(DEFAULT_SCAN_STEP_NM),
    };
    let model = spectrum_model(p)?;
    r.set("noise", noise)?;
    r.set("scan", scan)?;
    r.set("model", model)?;
    let spectrum = synthesize_scan(
        &r.grating, &r.model, r.pump_nm, &scan, &noise, r.seed, model,
    )?;
    let data = match format {
        Format::Csv => spectrum.to_csv_string(),
        Format::Json => json_data(&serde_json::to_value(&spectrum)?)?,
    };
    let svg = log_y_svg(
        "Synthetic SFG scan",
        "input wavelength (nm)",
        &[Series {
            label: "efficiency",
            x: spectrum.axis(),
            y: spectrum.efficiency(),
        }],
    );
    Ok(Output {
        data,
        extension: ext(format),
        results: json!({ "points": spectrum.len() }),
        svg: Some(svg),
        stdout: None,
    })
}

fn nsd(r: &mut Resolved, p: &Params, format: Format) -> Result<Output> {
    let process = r.process()?;
    let sigma = p.sigma_bar.unwrap_or(0.02);
    let eta_c = p.eta_c.unwrap_or(1.0);
    let d_eff = p.d_eff.unwrap_or(DEFAULT_D_EFF_PM_V);
    let h_m = p.h_m.unwrap_or(1.0);
    r.set("sigma_bar", sigma)?;
    r.set("eta_c", eta_c)?;
    r.set("d_eff_pm_v", d_eff)?;
    r.set("h_m", h_m)?;
    let n = r.grating.num_domains;
    let budget = noise_budget(sigma, n, &process, eta_c)?;
    let unit = nsd_prefactor(sigma, n, &process);
    let params = ConverterParams::new(process, d_eff, r.grating.length_mm(), h_m)?;
    let pmax = p_max(&params);
    let pump_needed = pmax * (2.0 / std::f64::consts::PI * eta_c.sqrt().asin()).powi(2);
    let results = json!({
        "budget": budget,
        "nsd_hz_nm": budget.nsd,
        "nsd_unit_arcsin_hz_nm": unit,
        "p_max_w": pmax,
        "pump_for_eta_c_w": pump_needed,
        "process": process,
    });
    let data = match format {
        Format::Json => json_data(&results)?,
        Format::Csv => kv_csv(&[
            ("sigma_bar", sigma),
            ("num_domains", n as f64),
            ("eta_c", eta_c),
            ("lambda_m_nm", process.lambda_m),
            ("n_r", process.n_r),
            ("n_m", process.n_m),
            ("nsd_hz_nm", budget.nsd),
            ("nsd_unit_arcsin_hz_nm", unit),
            ("p_max_w", pmax),
            ("pump_for_eta_c_w", pump_needed),
        ]),
    };
    Ok(Output {
        data,
        extension: ext(format),
        stdout: Some(format!(
            "NSD {:.1} kHz/nm at eta_c = {eta_c} ({:.1} kHz/nm with unit arcsin factor)\n",
            budget.nsd * 1e-3,
            unit * 1e-3
        )),
        results,
        svg: None,
    })
}

fn table(r: &mut Resolved, p: &Params, format: Format) -> Result<Output> {
    let records = match &p.records {
        Some(path) => {
            r.set("records", path.display().to_string())?;
            load_records(path)?
        }
        None => builtin_records(),
    };
    let rows: Vec<Value> = records
        .iter()
        .map(|rec| {
            let nsd = crate::noise::generated_nsd(rec)?;
            Ok(json!({ "record": rec, "nsd": nsd }))
        })
        .collect::<Result<_>>()?;
    let data = match format {
        Format::Csv => table_csv(&records)?,
        Format::Json => json_data(&Value::Array(rows.clone()))?,
    };
    Ok(Output {
        data,
        extension: ext(format),
        results: Value::Array(rows),
        svg: None,
        stdout: Some(table_text(&records)?),
    })
}

/// Parses a full argument list (program name first) into a run
/// configuration.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)
        .map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    RunConfig::from_cli(cli)
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli).and_then(|c| run(&c)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("qpm-rdc: {e}");
            e.exit_code()
        }
    }
}
