//! Command-line front end: `verify`, `spectrum`, `evolve`, `zitter` and
//! `uncertainty`.
//!
//! Every subcommand reads the flat config file (if given), applies flag
//! overrides, validates the result and writes CSV/JSON into the output
//! directory. Exit codes: 0 success, 1 failed check or runtime error, 2 usage
//! or configuration error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{self, UncertaintyReport};
use crate::config::{self, RunConfig};
use crate::dynamics::{branch_weights, prepare_packet, run_trace, upper_spinor, Generator, ObservableTrace, Parameter};
use crate::error::{Error, Result};
use crate::grid::{gaussian_packet, SpinorField};
use crate::operators::{self, DiracSystem, OperatorTag, SpectrumReport};
use crate::params::PhysParams;
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "diractime", version, about = "Dirac Hamiltonian and time operator on spectral lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity suite and write verify.json.
    Verify(RunArgs),
    /// Tabulate the spectra of H_D and T on the lattice.
    Spectrum(RunArgs),
    /// Trace expectation values under time (H) or energy (T) evolution.
    Evolve(RunArgs),
    /// Measure the Zitterbewegung frequency of <x>.
    Zitter(RunArgs),
    /// Uncertainty products and width comparisons.
    Uncertainty(RunArgs),
}

/// Flags mirror config keys and override values from `--config`.
#[derive(Debug, Args, Default)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dim: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m0: Option<String>,
    /// Comma-separated packet center.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    width: Option<String>,
    /// Comma-separated mean momentum.
    #[arg(long, allow_hyphen_values = true)]
    pbar: Option<String>,
    /// pos, neg or mixed.
    #[arg(long)]
    branch: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_plus: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_minus: Option<String>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    span: Option<String>,
    /// H (time evolution) or T (energy evolution).
    #[arg(long)]
    generator: Option<String>,
    /// Comma-separated observable names, e.g. `x_0,p_0,beta`.
    #[arg(long)]
    observables: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    random_states: Option<String>,
    #[arg(long, hide = true)]
    corrupt_beta: bool,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let fields: [(&'static str, &Option<String>); 18] = [
            ("out", &self.out),
            ("seed", &self.seed),
            ("dim", &self.dim),
            ("n", &self.n),
            ("extent", &self.extent),
            ("m0", &self.m0),
            ("center", &self.center),
            ("width", &self.width),
            ("pbar", &self.pbar),
            ("branch", &self.branch),
            ("w_plus", &self.w_plus),
            ("w_minus", &self.w_minus),
            ("experiment", &self.experiment),
            ("samples", &self.samples),
            ("span", &self.span),
            ("generator", &self.generator),
            ("observables", &self.observables),
            ("random_states", &self.random_states),
        ];
        let mut out: Vec<_> = fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.corrupt_beta {
            out.push(("corrupt_beta", "true".into()));
        }
        out
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut map: BTreeMap<String, String> = match &self.config {
            Some(p) => config::load_file(p)?,
            None => BTreeMap::new(),
        };
        for (k, v) in self.overrides() {
            map.insert(k.to_string(), v);
        }
        RunConfig::from_pairs(&map)
    }
}

/// Parses arguments, runs one subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (args, cmd): (&RunArgs, fn(&RunConfig) -> Result<i32>) = match &cli.command {
        Command::Verify(a) => (a, cmd_verify),
        Command::Spectrum(a) => (a, cmd_spectrum),
        Command::Evolve(a) => (a, cmd_evolve),
        Command::Zitter(a) => (a, cmd_zitter),
        Command::Uncertainty(a) => (a, cmd_uncertainty),
    };
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return EXIT_USAGE;
        }
    };
    match cmd(&cfg) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            if is_setup_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILED
            }
        }
    }
}

fn report_error(e: &Error) {
    match e {
        Error::Config(list) | Error::InvalidPacket(list) => {
            eprintln!("error: invalid configuration");
            for item in list {
                eprintln!("  - {item}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

/// Errors that reject the requested setup rather than a computation.
fn is_setup_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidPacket(_)
            | Error::InvalidGrid(_)
            | Error::InvalidDimension(_)
            | Error::InvalidParameter(_)
            | Error::UnknownObservable(_)
            | Error::BoundaryUnsafe { .. }
    )
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// Unit of a named quantity in powers of the mass unit (`hbar = c = 1`).
fn unit(name: &str) -> &'static str {
    match name.split('_').next().unwrap_or(name) {
        "t" | "x" | "r" | "T" | "tau" => "[1/m]",
        "eps" | "p" | "H" | "E" => "[m]",
        _ => "[1]",
    }
}

fn header(names: &[String]) -> String {
    names.iter().map(|n| format!("{n}{}", unit(n))).collect::<Vec<_>>().join(",")
}

fn traces_csv(traces: &[ObservableTrace]) -> String {
    let pname = match traces.first().map(|t| t.parameter) {
        Some(Parameter::Energy) => "eps",
        _ => "t",
    };
    let mut names = vec![pname.to_string()];
    names.extend(traces.iter().map(|t| t.name.clone()));
    let mut out = header(&names);
    out.push('\n');
    let rows = traces.first().map_or(0, |t| t.samples.len());
    for i in 0..rows {
        let _ = write!(out, "{:?}", traces[0].samples[i].0);
        for t in traces {
            let _ = write!(out, ",{:?}", t.samples[i].1);
        }
        out.push('\n');
    }
    out
}

fn spectrum_csv(report: &SpectrumReport, dim: usize) -> String {
    let (coord, value) = match report.operator {
        OperatorTag::Hamiltonian => ("p", "E"),
        OperatorTag::Time => ("x", "tau"),
    };
    let mut names: Vec<String> = (0..dim).map(|a| format!("{coord}_{a}")).collect();
    names.push("branch".into());
    names.push(value.into());
    names.push("multiplicity".into());
    let mut out = header(&names);
    out.push('\n');
    for level in &report.levels {
        for (branch, v) in [("+", level.value), ("-", -level.value)] {
            for q in &level.coordinate[..dim] {
                let _ = write!(out, "{q:?},");
            }
            let _ = writeln!(out, "{branch},{v:?},{}", report.multiplicity);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn prepare(cfg: &RunConfig) -> Result<(DiracSystem, SpinorField)> {
    let sys = DiracSystem::new(cfg.dim, cfg.m0)?;
    let f = prepare_packet(&sys, &cfg.grid()?, &cfg.packet())?;
    Ok((sys, f))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let opts = VerifyOptions {
        m0: cfg.m0,
        seed: cfg.seed,
        random_states: cfg.random_states,
        corrupt_beta: cfg.corrupt_beta,
    };
    let report = verify::run_all(&opts)?;
    let path = write_json(&cfg.out, "verify.json", &report)?;
    for c in report.failures() {
        println!(
            "FAIL {} [{}]: {} {} {}",
            c.check,
            c.anchor,
            c.value,
            match c.relation {
                verify::Relation::Below => "not <",
                verify::Relation::Above => "not >",
                verify::Relation::Exact => "!=",
            },
            c.threshold
        );
    }
    println!("{}/{} checks passed; report at {}", report.passed, report.checks.len(), path.display());
    Ok(if report.all_pass { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct SpectrumSummary<'a> {
    anchor: &'static str,
    experiment: &'a str,
    dim: usize,
    n: usize,
    extent: f64,
    m0: f64,
    tau0: f64,
    de_broglie_period: f64,
    multiplicity: usize,
    energy_gap: f64,
    energy_gap_expected: f64,
    time_gap: f64,
    time_gap_expected: f64,
    gap_product: f64,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let grid = cfg.grid()?;
    let params = PhysParams::new(cfg.m0)?;
    let h = operators::spectrum(OperatorTag::Hamiltonian, &grid, &params);
    let t = operators::spectrum(OperatorTag::Time, &grid, &params);
    write_atomic(&cfg.out, "spectrum_hamiltonian.csv", spectrum_csv(&h, cfg.dim).as_bytes())?;
    write_atomic(&cfg.out, "spectrum_time.csv", spectrum_csv(&t, cfg.dim).as_bytes())?;
    let summary = SpectrumSummary {
        anchor: "spectrum.gap",
        experiment: &cfg.experiment,
        dim: cfg.dim,
        n: cfg.n,
        extent: cfg.extent,
        m0: cfg.m0,
        tau0: params.tau0,
        de_broglie_period: params.de_broglie_period(),
        multiplicity: h.multiplicity,
        energy_gap: h.gap,
        energy_gap_expected: params.energy_gap,
        time_gap: t.gap,
        time_gap_expected: params.time_gap,
        gap_product: h.gap * t.gap,
    };
    let path = write_json(&cfg.out, "spectrum.json", &summary)?;
    println!("energy gap {} (2 m0 c^2 = {}), time gap {} (2 tau0 = {})", h.gap, params.energy_gap, t.gap, params.time_gap);
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EvolveSummary<'a> {
    anchor: &'static str,
    experiment: &'a str,
    generator: Generator,
    span: f64,
    samples: usize,
    config: &'a RunConfig,
    positive_branch_weight: f64,
    negative_branch_weight: f64,
    /// Largest deviation of the norm trace from its first sample.
    norm_drift: f64,
}

fn default_span(cfg: &RunConfig, params: &PhysParams) -> f64 {
    cfg.span.unwrap_or(match cfg.generator {
        Generator::Hamiltonian => 5.0 * params.de_broglie_period(),
        Generator::Time => 2.0 * params.rest_energy(),
    })
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<i32> {
    let (sys, f) = prepare(cfg)?;
    let span = default_span(cfg, &sys.params);
    let mut names: Vec<&str> = cfg.observables.iter().map(String::as_str).collect();
    if !names.contains(&"norm") {
        names.insert(0, "norm");
    }
    let traces = run_trace(&sys, &f, cfg.generator, span, cfg.samples, &names)?;
    let norms = traces.iter().find(|t| t.name == "norm").map(|t| t.values()).unwrap_or_default();
    let norm_drift = norms.iter().map(|v| (v - norms[0]).abs()).fold(0.0, f64::max);
    let (wp, wm) = branch_weights(&sys, &f);
    write_atomic(&cfg.out, "evolve.csv", traces_csv(&traces).as_bytes())?;
    let summary = EvolveSummary {
        anchor: match cfg.generator {
            Generator::Hamiltonian => "evolution.time",
            Generator::Time => "evolution.energy",
        },
        experiment: &cfg.experiment,
        generator: cfg.generator,
        span,
        samples: cfg.samples,
        config: cfg,
        positive_branch_weight: wp,
        negative_branch_weight: wm,
        norm_drift,
    };
    let path = write_json(&cfg.out, "evolve.json", &summary)?;
    println!("{} samples over {span}; wrote {}", cfg.samples, path.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ZitterSummary<'a> {
    anchor: &'static str,
    experiment: &'a str,
    observable: String,
    span: f64,
    samples: usize,
    frequency: f64,
    angular_frequency: f64,
    amplitude: f64,
    resolution: f64,
    noise_floor: f64,
    periods_spanned: f64,
    /// `2 E(pbar) / hbar`
    analytic_angular_frequency: f64,
    relative_deviation: f64,
    measured_period: f64,
    de_broglie_period: f64,
    /// Period stated in the literature being reproduced: twice `T_B`.
    claimed_period: f64,
    claimed_period_over_measured: f64,
    positive_branch_weight: f64,
    negative_branch_weight: f64,
}

pub fn cmd_zitter(cfg: &RunConfig) -> Result<i32> {
    let (sys, f) = prepare(cfg)?;
    let params = sys.params;
    let span = cfg.span.unwrap_or(5.0 * params.de_broglie_period());
    let traces = run_trace(&sys, &f, Generator::Hamiltonian, span, cfg.samples, &["x_0"])?;
    let est = analysis::extract_frequency(&traces[0])?;
    let p2: f64 = cfg.pbar.iter().map(|p| p * p).sum();
    let analytic = 2.0 * params.energy(p2) / params.hbar;
    let measured_period = 2.0 * std::f64::consts::PI / est.angular_frequency;
    let tb = params.de_broglie_period();
    let (wp, wm) = branch_weights(&sys, &f);
    write_atomic(&cfg.out, "zitter.csv", traces_csv(&traces).as_bytes())?;
    let summary = ZitterSummary {
        anchor: "zitterbewegung.frequency",
        experiment: &cfg.experiment,
        observable: traces[0].name.clone(),
        span,
        samples: cfg.samples,
        frequency: est.frequency,
        angular_frequency: est.angular_frequency,
        amplitude: est.amplitude,
        resolution: est.resolution,
        noise_floor: est.noise_floor,
        periods_spanned: est.periods_spanned,
        analytic_angular_frequency: analytic,
        relative_deviation: est.angular_frequency / analytic - 1.0,
        measured_period,
        de_broglie_period: tb,
        claimed_period: 2.0 * tb,
        claimed_period_over_measured: 2.0 * tb / measured_period,
        positive_branch_weight: wp,
        negative_branch_weight: wm,
    };
    let path = write_json(&cfg.out, "zitter.json", &summary)?;
    println!(
        "omega = {} (2E/hbar = {}, deviation {:.3e}); wrote {}",
        est.angular_frequency,
        analytic,
        summary.relative_deviation,
        path.display()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct UncertaintySummary<'a> {
    anchors: [&'static str; 3],
    experiment: &'a str,
    reports: Vec<UncertaintyReport>,
    all_pass: bool,
}

pub fn cmd_uncertainty(cfg: &RunConfig) -> Result<i32> {
    let (sys, f) = prepare(cfg)?;
    let mut reports = vec![UncertaintyReport::build("configured_packet", &sys, &f)?];
    // Reference states with <beta> = 1: centered, and boosted by m0 c.
    let m0 = cfg.m0;
    let (grid, width) = if cfg.dim == 3 {
        (verify::coarse_3d_grid(m0)?, verify::COARSE_3D_WIDTH / m0)
    } else {
        (verify::default_1d_grid(m0)?, 10.0 / m0)
    };
    let s = operators::spinor_size(cfg.dim);
    let zero = vec![0.0; cfg.dim];
    let mut boost = zero.clone();
    boost[cfg.dim - 1] = m0;
    for (label, pbar) in [("centered_gaussian", &zero), ("boosted_gaussian", &boost)] {
        let g = gaussian_packet(grid, &zero, width, pbar, &upper_spinor(s));
        reports.push(UncertaintyReport::build(label, &sys, &g)?);
    }
    let all_pass = reports.iter().all(|r| {
        r.position_momentum.iter().all(|a| a.pass) && r.time_energy.map_or(true, |t| t.pass)
    });
    let summary = UncertaintySummary {
        anchors: [
            "uncertainty.position_momentum",
            "uncertainty.time_energy",
            "uncertainty.packet_width",
        ],
        experiment: &cfg.experiment,
        reports,
        all_pass,
    };
    let path = write_json(&cfg.out, "uncertainty.json", &summary)?;
    for r in &summary.reports {
        let xp: Vec<String> = r.position_momentum.iter().map(|a| format!("{:.6}", a.product)).collect();
        print!("{}: dx dp = [{}]", r.label, xp.join(", "));
        if let Some(t) = r.time_energy {
            print!(", dT dH = {:.6} >= {:.6}", t.product, t.commutator_bound);
        }
        println!();
    }
    println!("wrote {}", path.display());
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILED })
}
