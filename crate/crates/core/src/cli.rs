//! The `mtsplat` command-line tool.
//!
//! Every subcommand reads one [`RunConfig`] (defaults, then `--config`, then
//! each `--set key=value`, then dedicated flags) and writes its reports
//! into the output directory, each with a `.meta.json` sidecar carrying
//! the tool version and the configuration hash.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Serialize, Serializer};

use crate::config::{parse_strategy, RunConfig, SceneSource};
use crate::pipesim::sweep_fifo_depth;
use crate::rasterizer::{psnr, render_frame, RenderConfig, Strategy};
use crate::scene_io::{read_image, write_csv, write_image, write_metadata, write_ply, write_table, ReportMetadata};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mtsplat", version, about = "Gaussian splatting renderer with mini-tile culling and a pipeline simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration value by dotted path (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one frame and its workload statistics.
    Render(Common),
    /// Render with several strategies and tabulate workload and quality.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated strategies (overrides `compare`).
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
    },
    /// Sweep the mini-tile FIFO depth in the pipeline simulator.
    SweepFifo {
        #[command(flatten)]
        common: Common,
        /// Comma-separated depths, strictly increasing (overrides `depths`).
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
        /// Also save the per-tile work trace as JSON.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Write the configured synthetic scene as a PLY checkpoint.
    GenScene(Common),
    /// PSNR in dB between two images.
    Psnr { a: PathBuf, b: PathBuf },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Render(c) => cmd_render(&load(&c, &[])?),
        Command::Compare { common, strategies } => {
            let extra = list_override("compare", &strategies, |s| format!("{s:?}"));
            cmd_compare(&load(&common, &extra)?)
        }
        Command::SweepFifo {
            common,
            depths,
            trace_out,
        } => {
            let extra = list_override("depths", &depths, |d| d.to_string());
            cmd_sweep_fifo(&load(&common, &extra)?, trace_out.as_deref())
        }
        Command::GenScene(c) => cmd_gen_scene(&load(&c, &[])?),
        Command::Psnr { a, b } => {
            let db = psnr(&read_image(&a)?, &read_image(&b)?)?;
            println!("{}", format_db(db));
            Ok(())
        }
    }
}

fn list_override<T>(key: &str, items: &[T], fmt: impl Fn(&T) -> String) -> Vec<String> {
    if items.is_empty() {
        return Vec::new();
    }
    let body: Vec<String> = items.iter().map(fmt).collect();
    vec![format!("{key}=[{}]", body.join(","))]
}

fn load(c: &Common, extra: &[String]) -> Result<RunConfig> {
    let mut overrides = c.set.clone();
    overrides.extend_from_slice(extra);
    if let Some(out) = &c.out {
        let json = serde_json::to_string(out).map_err(Error::from)?;
        overrides.push(format!("output_dir={json}"));
    }
    RunConfig::load(c.config.as_deref(), &overrides)
}

fn prepare_out(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    Ok(dir)
}

fn report<T: Serialize>(rows: &[T], dir: &Path, stem: &str, command: &str, cfg: &RunConfig) -> Result<()> {
    write_table(rows, dir.join(stem))?;
    write_metadata(
        &ReportMetadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: cfg.hash(),
        },
        dir.join(format!("{stem}.meta.json")),
    )
}

/// `inf` for identical images, otherwise the value with four decimals.
pub fn format_db(db: f64) -> String {
    if db.is_infinite() {
        "inf".into()
    } else {
        format!("{db:.4}")
    }
}

fn serialize_db<S: Serializer>(db: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if db.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*db)
    }
}

#[derive(Debug, Serialize)]
struct RenderRow {
    strategy: String,
    width: u32,
    height: u32,
    mean_per_pixel: f64,
    max_per_pixel: u32,
    duplicates_16: u64,
    duplicates_8: u64,
    duplicates_4: u64,
    skipped_early_term: u64,
    visible: u64,
    culled: u64,
    degenerate: u64,
}

#[derive(Debug, Serialize)]
struct PixelRow {
    x: u32,
    y: u32,
    gaussians: u32,
}

pub fn cmd_render(cfg: &RunConfig) -> Result<()> {
    let scene = cfg.scene.load()?;
    let strategy = cfg.strategy();
    let frame = render_frame(&scene, &cfg.camera, strategy, &cfg.render_config())?;
    let dir = prepare_out(cfg)?;
    write_image(&frame.image, dir.join(format!("render.{}", cfg.image_format.extension())))?;
    let s = &frame.stats;
    let row = RenderRow {
        strategy: strategy.label(),
        width: s.width,
        height: s.height,
        mean_per_pixel: s.mean_per_pixel(),
        max_per_pixel: s.max_per_pixel(),
        duplicates_16: s.duplicates.tile16,
        duplicates_8: s.duplicates.subtile8,
        duplicates_4: s.duplicates.minitile4,
        skipped_early_term: s.skipped_early_term,
        visible: s.visible,
        culled: s.culled,
        degenerate: s.degenerate,
    };
    report(&[&row], dir, "render_stats", "render", cfg)?;
    let pixels: Vec<PixelRow> = s
        .per_pixel_gaussians
        .iter()
        .enumerate()
        .map(|(i, &g)| PixelRow {
            x: i as u32 % s.width,
            y: i as u32 / s.width,
            gaussians: g,
        })
        .collect();
    write_csv(&pixels, dir.join("per_pixel.csv"))?;
    println!(
        "{}: {} splats visible, {:.3} per pixel on average -> {}",
        row.strategy,
        row.visible,
        row.mean_per_pixel,
        dir.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareRow {
    strategy: String,
    mean_per_pixel: f64,
    max_per_pixel: u32,
    duplicates_16: u64,
    duplicates_8: u64,
    duplicates_4: u64,
    #[serde(serialize_with = "serialize_db")]
    psnr_vs_exhaustive: f64,
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let strategies = cfg
        .compare
        .iter()
        .map(|s| parse_strategy(s, cfg))
        .collect::<Result<Vec<_>>>()?;
    if strategies.len() < 2 {
        return Err(Error::Parameter("compare needs at least two strategies".into()));
    }
    let scene = cfg.scene.load()?;
    let rc = cfg.render_config();
    let reference = render_frame(&scene, &cfg.camera, Strategy::Exhaustive, &rc)?;
    let mut rows = Vec::with_capacity(strategies.len());
    for strategy in strategies {
        let frame = render_frame(&scene, &cfg.camera, strategy, &rc)?;
        let s = &frame.stats;
        rows.push(CompareRow {
            strategy: strategy.label(),
            mean_per_pixel: s.mean_per_pixel(),
            max_per_pixel: s.max_per_pixel(),
            duplicates_16: s.duplicates.tile16,
            duplicates_8: s.duplicates.subtile8,
            duplicates_4: s.duplicates.minitile4,
            psnr_vs_exhaustive: psnr(&frame.image, &reference.image)?,
        });
    }
    let dir = prepare_out(cfg)?;
    report(&rows, dir, "compare", "compare", cfg)?;
    for r in &rows {
        println!(
            "{:40} {:9.3} px-avg  {:>8} dB",
            r.strategy,
            r.mean_per_pixel,
            format_db(r.psnr_vs_exhaustive)
        );
    }
    Ok(())
}

pub fn cmd_sweep_fifo(cfg: &RunConfig, trace_out: Option<&Path>) -> Result<()> {
    let scene = cfg.scene.load()?;
    let rc = RenderConfig {
        record_trace: true,
        ..cfg.render_config()
    };
    let frame = render_frame(&scene, &cfg.camera, cfg.strategy(), &rc)?;
    let trace = frame.trace.expect("trace was requested");
    let rows = sweep_fifo_depth(&trace, &cfg.pipe, &cfg.depths)?;
    let dir = prepare_out(cfg)?;
    report(&rows, dir, "sweep_fifo", "sweep-fifo", cfg)?;
    if let Some(path) = trace_out {
        trace.save(path)?;
    }
    for r in &rows {
        println!(
            "depth {:4}  cycles {:10}  stall {:.4}  speedup {:.4}",
            r.depth, r.cycles, r.stall_rate, r.speedup
        );
    }
    Ok(())
}

pub fn cmd_gen_scene(cfg: &RunConfig) -> Result<()> {
    let SceneSource::Synthetic(spec) = &cfg.scene else {
        return Err(Error::Config("gen-scene needs a synthetic scene source".into()));
    };
    let scene = crate::scene_io::generate_scene(spec)?;
    let dir = prepare_out(cfg)?;
    let path = dir.join("scene.ply");
    write_ply(&path, &scene)?;
    println!("{} Gaussians -> {}", scene.len(), path.display());
    Ok(())
}
