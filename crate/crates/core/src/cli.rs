//! Command-line surface: `plan`, `gen-scene`, `build-reachmap` and `bench`.
//!
//! Exit codes: 0 when a feasible grasp was planned (or a non-planning
//! command succeeded), 2 when no candidate survived, 1 on any input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, generate_scene, SceneRecipe};
use crate::io::{
    load_model_library, load_reachability_map, load_recipe, load_scene, write_debug_export, write_reachability_map,
    write_scene, ArmConfig, ConfigFile, GraspReport, SceneSummary,
};
use crate::planner::{PlanOutcome, Planner};
use crate::reachability::{build_reachability_map, ReachabilityMap};
use crate::registration::ModelLibrary;
use crate::supervisor::run_episode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_NO_GRASP: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "graspkit", version, about = "Grasp proposal planning from point clouds")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a grasp for a scene and write a JSON report.
    Plan(PlanArgs),
    /// Generate a synthetic scene from a recipe or a built-in fixture.
    GenScene(GenSceneArgs),
    /// Sample an arm model into a reachability map file.
    BuildReachmap(ReachmapArgs),
    /// Time repeated planning runs per pipeline stage.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct PlanInputs {
    /// Scene TOML (clouds inline, as files, or generated from a recipe).
    #[arg(long)]
    pub scene: PathBuf,
    /// Planner/supervisor TOML; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of `<label>.ply` models for registration.
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Map from `build-reachmap`; unreachable pre-grasp poses are rejected.
    #[arg(long)]
    pub reachmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub inputs: PlanInputs,
    /// JSON report, written atomically.
    #[arg(long)]
    pub out: PathBuf,
    /// Colored PLY of environment, object and the selected grasp frame.
    #[arg(long)]
    pub debug_export: Option<PathBuf>,
    /// Add per-stage wall-clock times to the report (makes it non-deterministic).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    /// Recipe TOML.
    #[arg(long, alias = "recipe", required_unless_present = "fixture", conflicts_with = "fixture")]
    pub config: Option<PathBuf>,
    /// Built-in scene: cube-on-table, cube-in-tight-box or oversized-object.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Overrides the recipe seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scene TOML; point clouds are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReachmapArgs {
    /// Arm TOML; the default arm is used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Binary map file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub inputs: PlanInputs,
    /// Planning runs per measurement.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Optional JSON summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Plan(a) => cmd_plan(a),
        Command::GenScene(a) => cmd_gen_scene(a),
        Command::BuildReachmap(a) => cmd_build_reachmap(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

struct Inputs {
    scene: crate::io::LoadedScene,
    config: ConfigFile,
    models: Option<ModelLibrary>,
    map: Option<ReachabilityMap>,
}

impl PlanInputs {
    fn load(&self) -> Result<Inputs> {
        let scene = load_scene(&self.scene)?;
        let config = self.config.as_ref().map(ConfigFile::load).transpose()?.unwrap_or_default();
        config.supervisor.validate(scene.scene.gripper.max_opening)?;
        Ok(Inputs {
            scene,
            config,
            models: self.model_dir.as_ref().map(load_model_library).transpose()?,
            map: self.reachmap.as_ref().map(load_reachability_map).transpose()?,
        })
    }
}

impl Inputs {
    fn planner(&self) -> Planner<'_> {
        Planner {
            reachability: self.map.as_ref(),
            models: self.models.as_ref(),
        }
    }

    fn summary(&self) -> SceneSummary {
        let s = &self.scene.scene;
        SceneSummary {
            object_label: s.object_label.clone(),
            object_points: s.object_cloud.len(),
            environment_points: s.environment_cloud.len(),
            dropped_points: self.scene.dropped_points,
            reachability_map: self.map.is_some(),
        }
    }
}

fn cmd_plan(args: &PlanArgs) -> Result<i32> {
    let inputs = args.inputs.load()?;
    let scene = &inputs.scene.scene;
    let cfg = &inputs.config;
    let episode = run_episode(&inputs.planner(), scene, &cfg.planner, &cfg.supervisor, &inputs.scene.encoder_readings)?;
    let outcome = &episode.outcome;

    let mut report = GraspReport::new(outcome, &cfg.planner, &cfg.supervisor, inputs.summary());
    report.supervision = episode.log.clone();
    if args.timings {
        report = report.with_timings(outcome);
    }
    write_atomic(&args.out, report.to_json()?.as_bytes())?;
    if let Some(path) = &args.debug_export {
        write_debug_export(path, scene, outcome)?;
    }

    match outcome.selected_candidate() {
        Some(c) => {
            println!(
                "selected candidate {} (cost {:.4}); {} of {} feasible",
                c.index,
                c.total_cost.unwrap_or(f64::NAN),
                outcome.feasible_count(),
                outcome.candidates.len()
            );
            Ok(EXIT_OK)
        }
        None => {
            eprintln!("{}", Error::NoFeasibleGrasp(outcome.candidates.len()));
            Ok(EXIT_NO_GRASP)
        }
    }
}

/// Writes via a temporary sibling so a failed run never leaves a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Built-in recipes by name.
pub fn fixture(name: &str, seed: u64) -> Option<SceneRecipe> {
    Some(match name.replace('_', "-").as_str() {
        "cube-on-table" => harness::cube_on_table(seed),
        "cube-in-tight-box" => harness::cube_in_tight_box(seed),
        "oversized-object" => harness::oversized_object(seed),
        _ => return None,
    })
}

fn cmd_gen_scene(args: &GenSceneArgs) -> Result<i32> {
    let mut recipe = match (&args.config, &args.fixture) {
        (Some(path), _) => load_recipe(path)?,
        (None, Some(name)) => fixture(name, 0).ok_or_else(|| Error::InvalidConfig(format!("unknown fixture {name:?}")))?,
        (None, None) => return Err(Error::InvalidConfig("a recipe or fixture is required".into())),
    };
    if let Some(seed) = args.seed {
        recipe.seed = seed;
    }
    let scene = generate_scene(&recipe)?;
    write_scene(&args.out, &scene, Some(&recipe))?;
    println!(
        "wrote {} ({} object points, {} environment points)",
        args.out.display(),
        scene.object_cloud.len(),
        scene.environment_cloud.len()
    );
    Ok(EXIT_OK)
}

fn cmd_build_reachmap(args: &ReachmapArgs) -> Result<i32> {
    let mut cfg = args.config.as_ref().map(ArmConfig::load).transpose()?.unwrap_or_default();
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let map = build_reachability_map(&cfg.arm, cfg.resolution, cfg.direction_bins, cfg.samples, cfg.seed)?;
    write_reachability_map(&args.out, &map)?;
    let d = map.dims();
    println!(
        "wrote {} ({}x{}x{} voxels, {:.1}% reachable)",
        args.out.display(),
        d[0],
        d[1],
        d[2],
        100.0 * map.reachable_fraction()
    );
    Ok(EXIT_OK)
}

/// Min/median/max wall-clock time per stage over repeated runs (milliseconds).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StageStats {
    pub stage: String,
    pub min_ms: f64,
    pub median_ms: f64,
    pub max_ms: f64,
}

pub fn stage_stats(runs: &[PlanOutcome]) -> Vec<StageStats> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    first
        .timings
        .stages()
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let mut ms: Vec<f64> = runs.iter().map(|r| ms(r.timings.stages()[i].1)).collect();
            ms.sort_by(f64::total_cmp);
            StageStats {
                stage: name.to_string(),
                min_ms: ms[0],
                median_ms: median(&ms),
                max_ms: ms[ms.len() - 1],
            }
        })
        .collect()
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Median of sorted values.
fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    if args.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let inputs = args.inputs.load()?;
    let planner = inputs.planner();
    let runs = (0..args.repeats)
        .map(|_| planner.evaluate(&inputs.scene.scene, &inputs.config.planner))
        .collect::<Result<Vec<_>>>()?;
    let stats = stage_stats(&runs);
    println!("{:<14}{:>12}{:>12}{:>12}", "stage", "min ms", "median ms", "max ms");
    for s in &stats {
        println!("{:<14}{:>12.3}{:>12.3}{:>12.3}", s.stage, s.min_ms, s.median_ms, s.max_ms);
    }
    println!("{} feasible of {} candidates, {} repeats", runs[0].feasible_count(), runs[0].candidates.len(), args.repeats);
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&stats).map_err(std::io::Error::from)?;
        write_atomic(out, json.as_bytes())?;
    }
    Ok(EXIT_OK)
}
