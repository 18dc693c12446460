//! `fatigue`: single binary over all four stages.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stage failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fatigue_core::paris::{fit_paris, growth_points, CycleSample, DeltaKWindow, UnitSystem};
use fatigue_core::pipeline::{
    compare_models, run_pipeline, stage_extract, stage_macro, stage_md, standard_variants,
    ConstantsSection, MacroSection, PipelineConfig, PipelineError,
};
use fatigue_core::vision::{
    binarize_median, crack_length, skeletonize, ContourRaster, MouthEdge, SkeletonParams,
};

#[derive(Parser)]
#[command(name = "fatigue", version, about = "Multi-scale fatigue-crack toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration TOML; mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: `ci` or `paper`.
    #[arg(long)]
    preset: Option<String>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => PipelineConfig::load(path)?,
            (None, Some(name)) => PipelineConfig::preset(name, self.seed.unwrap_or(1))?,
            (None, None) => {
                return Err(PipelineError::Config(
                    "pass either --config or --preset".into(),
                ))
            }
            _ => unreachable!("clap enforces exclusivity"),
        };
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the cyclic micro model and emit stress/raster artifacts.
    MdRun(ConfigArgs),
    /// Measure crack length on a single raster image.
    ExtractCrack {
        /// Input grayscale PNG or PGM.
        #[arg(long = "in")]
        input: PathBuf,
        /// Physical units per pixel.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Mouth edge: left, right, top or bottom.
        #[arg(long, default_value = "left")]
        mouth: String,
        #[arg(long, default_value_t = 128)]
        threshold: u8,
        /// Median filter window (odd).
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Overlay PNG path; defaults to `<input>.overlay.png`.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Fit growth-law constants from a cycle/length CSV.
    FitParis {
        /// Input CSV with columns N, a, sigma_max, sigma_min.
        #[arg(long = "in")]
        input: PathBuf,
        /// Unit tag: mpa_sqrt_m or mpa_sqrt_mm.
        #[arg(long, default_value = "mpa_sqrt_m")]
        units: String,
        #[arg(long, default_value = "paris.json")]
        out: PathBuf,
        /// Inclusive ΔK regression window.
        #[arg(long)]
        window_min: Option<f64>,
        #[arg(long)]
        window_max: Option<f64>,
    },
    /// Run the macro crack-growth solver on a plate model.
    XfemRun {
        /// Plate model TOML (geometry, material, loading).
        #[arg(long)]
        model: PathBuf,
        /// Growth constants JSON; overrides any constants in the model.
        #[arg(long)]
        paris: Option<PathBuf>,
        /// Crack increment override, mm.
        #[arg(long)]
        da: Option<f64>,
        /// Cycle counts for field snapshots.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run all four stages with caching and a manifest.
    Pipeline(ConfigArgs),
    /// Fit constants for the four standard micro variants.
    Compare(ConfigArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<(), PipelineError> {
    match cmd {
        Command::MdRun(args) => {
            let cfg = args.resolve()?;
            let outputs = stage_md(&cfg, &args.out)?;
            let extracted = stage_extract(&cfg, &args.out)?;
            for o in outputs.iter().chain(&extracted) {
                println!("{}", args.out.join(o).display());
            }
            Ok(())
        }
        Command::ExtractCrack {
            input,
            scale,
            mouth,
            threshold,
            window,
            overlay,
        } => extract_one(&input, scale, &mouth, threshold, window, overlay.as_deref()),
        Command::FitParis {
            input,
            units,
            out,
            window_min,
            window_max,
        } => fit_from_csv(&input, &units, &out, window_min, window_max),
        Command::XfemRun {
            model,
            paris,
            da,
            snapshots,
            out,
        } => xfem_run(&model, paris.as_deref(), da, snapshots, &out),
        Command::Pipeline(args) => {
            let cfg = args.resolve()?;
            let manifest = run_pipeline(&cfg, &args.out)?;
            for s in &manifest.stages {
                println!("{:<14} {:?} ({} ms)", s.name, s.status, s.wall_ms);
            }
            Ok(())
        }
        Command::Compare(args) => {
            let cfg = args.resolve()?;
            let rows = compare_models(&standard_variants(&cfg), &args.out)?;
            println!(
                "{:<10} {:<10} {:<7} {:>8} {:>12} {:>7}  status",
                "model", "material", "crack", "m", "C", "R2"
            );
            for r in &rows {
                let num = |v: Option<f64>, p: usize| {
                    v.map(|x| format!("{x:.*e}", p)).unwrap_or_else(|| "-".into())
                };
                println!(
                    "{:<10} {:<10} {:<7} {:>8} {:>12} {:>7}  {}",
                    r.model,
                    r.material,
                    r.crack_kind,
                    num(r.m, 3),
                    num(r.c, 3),
                    num(r.r_squared, 2),
                    r.error.as_deref().unwrap_or("ok")
                );
            }
            Ok(())
        }
    }
}

fn extract_one(
    input: &Path,
    scale: f64,
    mouth: &str,
    threshold: u8,
    window: usize,
    overlay: Option<&Path>,
) -> Result<(), PipelineError> {
    let stage = "crack_vision";
    let mouth = MouthEdge::parse(mouth)
        .ok_or_else(|| PipelineError::Config(format!("unknown mouth edge {mouth:?}")))?;
    if window % 2 == 0 || window < 3 {
        return Err(PipelineError::Config("window must be odd and >= 3".into()));
    }
    let raster = ContourRaster::load(input, scale, (0.0, 0.0))
        .map_err(|e| PipelineError::stage(stage, e))?;
    let binary = binarize_median(&raster, threshold, window);
    let skel =
        skeletonize(&binary, SkeletonParams::default()).map_err(|e| PipelineError::stage(stage, e))?;
    let (len, tip) = crack_length(&skel, mouth).map_err(|e| PipelineError::stage(stage, e))?;
    let overlay_path = overlay
        .map(PathBuf::from)
        .unwrap_or_else(|| input.with_extension("overlay.png"));
    skel.save_overlay(&raster, &overlay_path)
        .map_err(|e| PipelineError::stage(stage, e))?;
    let frame = input
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.rsplit(|c: char| !c.is_ascii_digit()).next())
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(0);
    println!("{frame},{len:.6e},{:.6e},{:.6e}", tip.0, tip.1);
    Ok(())
}

fn fit_from_csv(
    input: &Path,
    units: &str,
    out: &Path,
    window_min: Option<f64>,
    window_max: Option<f64>,
) -> Result<(), PipelineError> {
    let stage = "paris_fit";
    let units = UnitSystem::parse(units)
        .ok_or_else(|| PipelineError::Config(format!("unknown unit tag {units:?}")))?;
    let text = std::fs::read_to_string(input)?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_ascii_alphabetic())) {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|e| PipelineError::stage(stage, format!("line {}: {e}", i + 1)))?;
        if f.len() < 4 {
            return Err(PipelineError::stage(stage, format!("line {}: need 4 columns", i + 1)));
        }
        samples.push(CycleSample {
            cycle: f[0],
            crack_length: f[1],
            sigma_max: f[2],
            sigma_min: f[3],
        });
    }
    let window = DeltaKWindow {
        min: window_min.unwrap_or(0.0),
        max: window_max.unwrap_or(f64::INFINITY),
    };
    let points = growth_points(&samples, window)
        .map_err(|e| PipelineError::stage(stage, format!("no growth points: {e}")))?;
    let constants =
        fit_paris(&points, units).map_err(|e| PipelineError::stage(stage, e))?;
    std::fs::write(
        out,
        serde_json::to_string_pretty(&constants).expect("constants serialize"),
    )?;
    println!(
        "m = {:.4}, C = {:.4e} ({}), {} points",
        constants.m,
        constants.c,
        constants.units.tag(),
        points.len()
    );
    Ok(())
}

fn xfem_run(
    model: &Path,
    paris: Option<&Path>,
    da: Option<f64>,
    snapshots: Vec<f64>,
    out: &Path,
) -> Result<(), PipelineError> {
    let text = std::fs::read_to_string(model)?;
    let mut section: MacroSection =
        toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?;
    if let Some(path) = paris {
        let p = fatigue_core::pipeline::load_paris(path)?;
        section.constants = Some(ConstantsSection {
            c: p.c,
            m: p.m,
            units: p.units.tag().to_string(),
        });
    }
    if section.constants.is_none() {
        return Err(PipelineError::Config(
            "no growth constants: pass --paris or add [constants] to the model".into(),
        ));
    }
    if let Some(da) = da {
        section.da = da;
    }
    if !snapshots.is_empty() {
        section.snapshots = snapshots;
    }
    std::fs::create_dir_all(out)?;
    for o in stage_macro(&section, out)? {
        println!("{}", out.join(o).display());
    }
    Ok(())
}
