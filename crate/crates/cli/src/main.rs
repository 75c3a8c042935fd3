use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use portq::momwire::WireArrayGeometry;
use portq::scenario::{
    self, Analysis, ArrayKind, DipoleDesign, Feeding, MomModel, NetworkModel, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "portq",
    version,
    about = "Multiport antenna Q-factors, TARC and bandwidth"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two parallel half-wave dipoles
    Dipoles2(ArrayArgs),
    /// Five equidistant parallel half-wave dipoles
    Dipoles5(ArrayArgs),
    /// Sampled port data (Touchstone) or a wire geometry (JSON)
    Analyze(AnalyzeArgs),
    /// Q-factors against dipole spacing
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON scenario file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named feeding or comma separated complex vector, e.g. "1,0.5-0.2j"
    #[arg(long, allow_hyphen_values = true)]
    feeding: Option<String>,
    /// TARC limit that defines the band
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Half-width of the frequency sweep relative to f0
    #[arg(long)]
    span: Option<f64>,
    /// Number of sweep points (odd, at least 21)
    #[arg(long)]
    points: Option<usize>,
    /// Design frequency in Hz
    #[arg(long)]
    f0: Option<f64>,
    /// Plot data (CSV)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report (JSON)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ArrayArgs {
    #[command(flatten)]
    common: Common,
    /// Spacing between neighbouring dipoles in wavelengths
    #[arg(long)]
    d_over_lambda: Option<f64>,
    /// Segments per dipole
    #[arg(long)]
    segments: Option<usize>,
    /// Predicted vs swept bandwidth over TARC limits 0.05..0.5 (CSV)
    #[arg(long)]
    fbw_table: Option<PathBuf>,
    /// Port S parameters over the sweep (Touchstone)
    #[arg(long)]
    export_touchstone: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Touchstone file with the port data
    #[arg(long, conflicts_with = "geometry")]
    touchstone: Option<PathBuf>,
    /// Wire geometry (JSON) solved with the method of moments
    #[arg(long)]
    geometry: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// dipoles2 or dipoles5
    #[arg(long, default_value = "dipoles2")]
    array: String,
    /// First spacing in wavelengths
    #[arg(long, default_value_t = 0.05)]
    from: f64,
    /// Last spacing in wavelengths
    #[arg(long, default_value_t = 2.0)]
    to: f64,
    /// Number of spacings
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long)]
    segments: Option<usize>,
}

/// Scenario file; every field is optional.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    d_over_lambda: Option<f64>,
    feeding: Option<FeedingSpec>,
    gamma_max: Option<f64>,
    span: Option<f64>,
    points: Option<usize>,
    f0: Option<f64>,
    segments: Option<usize>,
    touchstone: Option<PathBuf>,
    geometry: Option<PathBuf>,
}

/// A feeding name, a real vector, or `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FeedingSpec {
    Name(String),
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl FeedingSpec {
    fn to_feeding(&self) -> Result<Feeding> {
        Ok(match self {
            FeedingSpec::Name(s) => s.parse()?,
            FeedingSpec::Real(v) => {
                Feeding::Custom(v.iter().map(|x| Complex64::new(*x, 0.0)).collect())
            }
            FeedingSpec::Complex(v) => {
                Feeding::Custom(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            }
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let summary = serde_json::json!({
                "status": "error",
                "error": format!("{e:#}"),
            });
            eprintln!("{summary}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Dipoles2(args) => run_array(ArrayKind::Dipoles2, args),
        Command::Dipoles5(args) => run_array(ArrayKind::Dipoles5, args),
        Command::Analyze(args) => run_analyze(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioFile> {
    match path {
        None => Ok(ScenarioFile::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

struct Resolved {
    file: ScenarioFile,
    feeding: Option<Feeding>,
    gamma_max: f64,
    sweep: SweepSpec,
    f0: Option<f64>,
}

fn resolve(common: &Common) -> Result<Resolved> {
    let file = load_config(common.config.as_deref())?;
    let feeding = match (&common.feeding, &file.feeding) {
        (Some(s), _) => Some(s.parse::<Feeding>()?),
        (None, Some(spec)) => Some(spec.to_feeding()?),
        (None, None) => None,
    };
    let gamma_max = common
        .gamma_max
        .or(file.gamma_max)
        .unwrap_or(scenario::DEFAULT_GAMMA_MAX);
    let defaults = SweepSpec::default();
    let sweep = SweepSpec::new(
        common.span.or(file.span).unwrap_or(defaults.span),
        common.points.or(file.points).unwrap_or(defaults.points),
    )?;
    let f0 = common.f0.or(file.f0);
    Ok(Resolved {
        file,
        feeding,
        gamma_max,
        sweep,
        f0,
    })
}

fn design(f0: Option<f64>, segments: Option<usize>) -> Result<DipoleDesign> {
    let mut d = DipoleDesign::default();
    if let Some(f) = f0 {
        if !(f > 0.0 && f.is_finite()) {
            bail!("f0 must be a positive frequency in Hz");
        }
        d.f0 = f;
    }
    if let Some(s) = segments {
        d.segments = s;
    }
    Ok(d)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(analysis: &Analysis, common: &Common) -> Result<()> {
    let json = serde_json::to_string_pretty(analysis)?;
    if let Some(p) = &common.out {
        write(p, &analysis.curve_csv())?;
    }
    match &common.report {
        Some(p) => write(p, &json)?,
        None => println!("{json}"),
    }
    let r = &analysis.report;
    eprintln!(
        "{}: Q_tarc = {:.4}, Q_zm = {:.4}, Q_rad = {}, F = {:.5} predicted / {} swept",
        analysis.name,
        r.q_tarc,
        r.q_zm,
        r.q_rad
            .map(|q| format!("{q:.4}"))
            .unwrap_or_else(|| "n/a".into()),
        r.f_predicted,
        r.f_swept
            .map(|f| format!("{f:.5}"))
            .unwrap_or_else(|| "n/a".into()),
    );
    Ok(())
}

fn run_array(kind: ArrayKind, args: ArrayArgs) -> Result<ExitCode> {
    let r = resolve(&args.common)?;
    let d = args
        .d_over_lambda
        .or(r.file.d_over_lambda)
        .ok_or_else(|| anyhow!("--d-over-lambda is required"))?;
    let design = design(r.f0, args.segments.or(r.file.segments))?;
    let feeding = r.feeding.clone().unwrap_or(match kind {
        ArrayKind::Dipoles2 => Feeding::InPhase,
        ArrayKind::Dipoles5 => Feeding::Triangle,
    });
    let mut analysis = match kind {
        ArrayKind::Dipoles2 => scenario::cmd_dipoles2(d, &feeding, r.gamma_max, &r.sweep, &design),
        ArrayKind::Dipoles5 => scenario::cmd_dipoles5(d, &feeding, r.gamma_max, &r.sweep, &design),
    }?;
    if let Some(name) = &r.file.name {
        analysis.name = name.clone();
    }
    emit(&analysis, &args.common)?;
    if let Some(p) = &args.fbw_table {
        let gammas = scenario::linspace(0.05, 0.5, 10);
        let rows = scenario::fbw_table(&analysis, &gammas)?;
        write(p, &scenario::fbw_csv(&rows))?;
    }
    if let Some(p) = &args.export_touchstone {
        let count = if kind == ArrayKind::Dipoles2 { 2 } else { 5 };
        let model = MomModel::new(design.row(count, d)?);
        write(
            p,
            &scenario::export_touchstone(&model, design.omega0(), &r.sweep)?,
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let r = resolve(&args.common)?;
    let f0 = r.f0.ok_or_else(|| anyhow!("--f0 is required"))?;
    let touchstone = args.touchstone.clone().or(r.file.touchstone.clone());
    let geometry = args.geometry.clone().or(r.file.geometry.clone());
    let mut analysis = match (touchstone, geometry) {
        (Some(path), None) => {
            let bytes =
                std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let text = String::from_utf8(bytes)
                .with_context(|| format!("{} is not UTF-8 text", path.display()))?;
            let ports = portq::netparam::ports_from_extension(&path);
            let model = NetworkModel::from_touchstone(&text, ports)
                .with_context(|| format!("reading {}", path.display()))?;
            let feeding = r.feeding.clone().unwrap_or_else(|| {
                Feeding::Custom(vec![Complex64::new(1.0, 0.0); model.network().ports()])
            });
            scenario::cmd_analyze(&model, &feeding, f0, r.gamma_max, &r.sweep)?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let geometry = WireArrayGeometry::from_json(&text)?;
            let model = MomModel::new(geometry);
            let feeding = r.feeding.clone().unwrap_or_else(|| {
                Feeding::Custom(vec![
                    Complex64::new(1.0, 0.0);
                    model.geometry().port_count()
                ])
            });
            let v = feeding.excitation()?;
            let omega0 = 2.0 * std::f64::consts::PI * f0;
            scenario::analyze_point("analyze", &model, &v, omega0, r.gamma_max, &r.sweep)?
        }
        (Some(_), Some(_)) => bail!("give either --touchstone or --geometry, not both"),
        (None, None) => bail!("--touchstone or --geometry is required"),
    };
    if let Some(name) = &r.file.name {
        analysis.name = name.clone();
    }
    emit(&analysis, &args.common)?;
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> Result<ExitCode> {
    let r = resolve(&args.common)?;
    let kind: ArrayKind = args.array.parse()?;
    let design = design(r.f0, args.segments.or(r.file.segments))?;
    let feeding = r.feeding.clone().unwrap_or(match kind {
        ArrayKind::Dipoles2 => Feeding::InPhase,
        ArrayKind::Dipoles5 => Feeding::Triangle,
    });
    let spacings = scenario::linspace(args.from, args.to, args.count);
    let rows = scenario::cmd_sweep(kind, &spacings, &feeding, r.gamma_max, &r.sweep, &design);
    let csv = scenario::sweep_csv(&rows);
    match &args.common.out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &args.common.report {
        write(p, &serde_json::to_string_pretty(&rows)?)?;
    }
    let failed: Vec<_> = rows
        .iter()
        .filter_map(|row| {
            row.error
                .as_ref()
                .map(|e| serde_json::json!({ "d_over_lambda": row.d_over_lambda, "error": e }))
        })
        .collect();
    if failed.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    let summary = serde_json::json!({
        "status": "row errors",
        "failed": failed.len(),
        "rows": failed,
    });
    eprintln!("{summary}");
    Ok(ExitCode::from(2))
}
