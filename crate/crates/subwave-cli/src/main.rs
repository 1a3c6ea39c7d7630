//! Command-line driver for the resonator-chain library: capacitance
//! matrices, weighted spectra, defect scattering series, radius sweeps,
//! misfit landscapes, and noisy-descent localization. Every run drops a
//! manifest.json beside its data files recording the tool version, the
//! full scene, and the resolved options; `--from-manifest` replays a
//! recorded run bit for bit.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::CliError;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use subwave_core::geometry::Scene;

#[derive(Parser)]
#[command(
    name = "subwave",
    version,
    about = "Capacitance-matrix models of subwavelength resonator chains",
    arg_required_else_help = true
)]
struct Cli {
    /// Re-execute a recorded run from its manifest.json.
    #[arg(long, value_name = "PATH")]
    from_manifest: Option<PathBuf>,

    /// Output directory when replaying a manifest (defaults to the
    /// manifest's own directory).
    #[arg(long, value_name = "DIR", requires = "from_manifest")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scene description file (JSON).
    #[arg(long, value_name = "PATH")]
    scene: PathBuf,

    /// Output directory, created if missing.
    #[arg(long, default_value = ".", value_name = "DIR")]
    out: PathBuf,

    /// Maximum spherical-harmonic degree of the discretization.
    #[arg(long, default_value_t = 4, value_name = "L")]
    degree: usize,

    /// Seed for the stochastic subcommands.
    #[arg(long, default_value_t = 12345, value_name = "S")]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Capacitance matrix of the scene, plus its defect-perturbed form.
    Capmat(CapmatArgs),
    /// Weighted spectrum with eigenvector conditioning; optionally tune
    /// the gain/loss coalescence point.
    Spectrum(SpectrumArgs),
    /// Defect scattering series: per-order term sizes, the leading
    /// correction block, and truncation quality.
    Expand(ExpandArgs),
    /// Resonance shifts over a grid of defect radii against their
    /// perturbation-theory predictions, with fitted scaling slopes.
    Sweep(SweepArgs),
    /// Misfit landscape over a grid of candidate defect positions.
    LossMap(LossMapArgs),
    /// Steepest-descent defect localization under measurement noise.
    Sense(SenseArgs),
}

#[derive(Args)]
struct CapmatArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Also write the raw single-layer Galerkin matrix to this file
    /// (relative paths land in the output directory).
    #[arg(long, value_name = "PATH")]
    dump_operator: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Scan the gain/loss detuning of the three-chain for the point
    /// where two resonances coalesce, and write the tuned scene.
    #[arg(long)]
    find_ep: bool,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Highest series order to tabulate.
    #[arg(long, default_value_t = 12, value_name = "N")]
    order: usize,

    /// Compare truncated inverses up to this level against the dense
    /// inverse and write the error report.
    #[arg(long, value_name = "K")]
    report_truncation: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated defect radii (default: seven log-spaced points
    /// from 1e-4 to 1e-2).
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "R,...")]
    radii: Option<Vec<f64>>,

    /// Tune the chain to its gain/loss coalescence point first.
    #[arg(long)]
    ep: bool,
}

#[derive(Args)]
struct LossMapArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Sampling grid x0:x1:n,y0:y1:m in the z = 0 plane.
    #[arg(long, default_value = "2.5:3.5:21,0:1:11", value_name = "SPEC")]
    grid: String,

    /// Tune the chain to its gain/loss coalescence point first.
    #[arg(long)]
    ep: bool,
}

#[derive(Args)]
struct SenseArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Grid of descent starts x0:x1:n,y0:y1:m.
    #[arg(long, default_value = "2.5:3.5:5,0:1:3", value_name = "SPEC")]
    grid: String,

    /// Relative measurement noise level.
    #[arg(long, default_value_t = 0.0, value_name = "EPS")]
    noise: f64,

    /// Number of independent noise draws.
    #[arg(long, default_value_t = 100, value_name = "N")]
    draws: usize,

    /// Tune the chain to its gain/loss coalescence point first.
    #[arg(long)]
    ep: bool,
}

/// Everything needed to replay a run: tool identity, resolution, seed,
/// the full scene inline, and the resolved subcommand options.
#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    command: String,
    degree: usize,
    seed: u64,
    options: serde_json::Value,
    outputs: Vec<String>,
    scene: serde_json::Value,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match (cli.from_manifest, cli.command) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either a subcommand or --from-manifest, not both".to_string(),
        )),
        (Some(path), None) => replay(&path, cli.out),
        (None, Some(cmd)) => run_command(cmd),
        (None, None) => unreachable!("clap prints help"),
    }
}

fn run_command(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Capmat(a) => {
            let opts = commands::CapmatOptions {
                dump_operator: a.dump_operator.map(|p| p.display().to_string()),
            };
            run_one(&a.common, "capmat", &opts, |scene, degree, _seed, out| {
                commands::capmat(scene, degree, &opts, out)
            })
        }
        Command::Spectrum(a) => {
            let opts = commands::SpectrumOptions { find_ep: a.find_ep };
            run_one(&a.common, "spectrum", &opts, |scene, degree, _seed, out| {
                commands::spectrum(scene, degree, &opts, out)
            })
        }
        Command::Expand(a) => {
            let opts = commands::ExpandOptions {
                order: a.order,
                report_truncation: a.report_truncation,
            };
            run_one(&a.common, "expand", &opts, |scene, degree, _seed, out| {
                commands::expand(scene, degree, &opts, out)
            })
        }
        Command::Sweep(a) => {
            let opts = commands::SweepOptions {
                radii: a.radii.unwrap_or_else(default_radii),
                ep: a.ep,
            };
            run_one(&a.common, "sweep", &opts, |scene, degree, _seed, out| {
                commands::sweep(scene, degree, &opts, out)
            })
        }
        Command::LossMap(a) => {
            let opts = commands::LossMapOptions {
                grid: a.grid,
                ep: a.ep,
            };
            run_one(&a.common, "loss-map", &opts, |scene, degree, _seed, out| {
                commands::loss_map(scene, degree, &opts, out)
            })
        }
        Command::Sense(a) => {
            let opts = commands::SenseOptions {
                grid: a.grid,
                noise: a.noise,
                draws: a.draws,
                ep: a.ep,
            };
            run_one(&a.common, "sense", &opts, |scene, degree, seed, out| {
                commands::sense(scene, degree, seed, &opts, out)
            })
        }
    }
}

fn default_radii() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-4.0 + i as f64 / 3.0)).collect()
}

fn run_one<O: Serialize>(
    common: &CommonArgs,
    name: &str,
    opts: &O,
    run: impl FnOnce(&Scene, usize, u64, &Path) -> Result<Vec<String>, CliError>,
) -> Result<(), CliError> {
    let scene = commands::load_scene(&common.scene)?;
    fs::create_dir_all(&common.out).map_err(|e| {
        CliError::Usage(format!(
            "cannot create output directory {}: {e}",
            common.out.display()
        ))
    })?;
    let outputs = run(&scene, common.degree, common.seed, &common.out)?;
    let manifest = Manifest {
        tool: "subwave".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: name.to_string(),
        degree: common.degree,
        seed: common.seed,
        options: serde_json::to_value(opts)?,
        outputs,
        scene: serde_json::to_value(&scene)?,
    };
    finish(&common.out, &manifest)
}

/// Execute the command recorded in a manifest against its inline scene.
/// The same options, seed, and resolution produce the same bytes.
fn replay(path: &Path, out_override: Option<PathBuf>) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read manifest {}: {e}", path.display()))
    })?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))?;
    let scene = Scene::from_json(&serde_json::to_string(&manifest.scene)?)
        .map_err(|e| CliError::Usage(format!("manifest scene: {e}")))?;
    let out = out_override.unwrap_or_else(|| {
        let parent = path.parent().unwrap_or(Path::new("."));
        if parent.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            parent.to_path_buf()
        }
    });
    fs::create_dir_all(&out).map_err(|e| {
        CliError::Usage(format!("cannot create output directory {}: {e}", out.display()))
    })?;

    let degree = manifest.degree;
    let seed = manifest.seed;
    let opts = manifest.options.clone();
    let outputs = match manifest.command.as_str() {
        "capmat" => commands::capmat(&scene, degree, &serde_json::from_value(opts)?, &out)?,
        "spectrum" => {
            commands::spectrum(&scene, degree, &serde_json::from_value(opts)?, &out)?
        }
        "expand" => commands::expand(&scene, degree, &serde_json::from_value(opts)?, &out)?,
        "sweep" => commands::sweep(&scene, degree, &serde_json::from_value(opts)?, &out)?,
        "loss-map" => {
            commands::loss_map(&scene, degree, &serde_json::from_value(opts)?, &out)?
        }
        "sense" => {
            commands::sense(&scene, degree, seed, &serde_json::from_value(opts)?, &out)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "manifest names unknown command '{other}'"
            )))
        }
    };

    // Keep the recorded option/scene values verbatim so a replayed
    // manifest is byte-identical to its source.
    let replayed = Manifest { outputs, ..manifest };
    finish(&out, &replayed)
}

fn finish(out: &Path, manifest: &Manifest) -> Result<(), CliError> {
    output::write_json(&out.join("manifest.json"), manifest)?;
    for f in &manifest.outputs {
        println!("wrote {}", out.join(f).display());
    }
    println!("wrote {}", out.join("manifest.json").display());
    Ok(())
}
