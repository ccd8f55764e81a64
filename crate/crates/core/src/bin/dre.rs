//! Command-line entry point: clusters, boundary fields, barrier checks,
//! Monte-Carlo harnesses, renders, and the pinned-loop fixture test.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime or resource
//! error, 3 property-check failure (a counterexample was found).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dre::barrier::{
    barrier_bound_check, side_function_from_lfield, side_function_from_rfield, verify_barrier,
};
use dre::cluster::{backward_cluster, forward_cluster, mutual_cluster};
use dre::config::{
    append_index, load_loop_fixture, parse_loop_fixture, sha256_hex, unix_now, ExperimentConfig,
    ModelConfig, RunManifest,
};
use dre::env::EnvironmentField;
use dre::error::{DreError, Result};
use dre::experiments::{
    backward_transition_compare, inclusion_suite, pc_scan, theorem1_test, zeta_estimate,
};
use dre::fields::{l_field, r_field, sweep_box};
use dre::grid::GridFile;
use dre::lattice::{LatticeBox, TransverseWindow};
use dre::model::ModelSpec;
use dre::render::{render_2d, render_3d_section, ImageFormat, Palette, RenderJob};

const SHIPPED_FIXTURE: &str = include_str!("../../fixtures/backward_loop_d3.toml");

#[derive(Parser)]
#[command(name = "dre", version = dre::VERSION, about = "Degenerate random environment toolkit")]
struct Cli {
    /// Worker threads for experiments (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (TOML).
    #[arg(long)]
    model: PathBuf,
    /// Base seed; all randomness derives from it.
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment parameter file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides the config's base_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one cluster and export its membership grid.
    Cluster {
        #[command(flatten)]
        model: ModelArgs,
        /// Box half-width; the search box is the centered cube.
        #[arg(long)]
        radius: i64,
        /// Cluster kind: forward, backward, or mutual.
        #[arg(long, default_value = "forward")]
        kind: String,
        /// Cluster root, comma-separated (default: the origin).
        #[arg(long)]
        origin: Option<String>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Sweep the per-line minimum of the forward cluster.
    Lfield {
        #[command(flatten)]
        model: ModelArgs,
        /// Transverse window half-width.
        #[arg(long)]
        radius: i64,
        /// Increasing depth schedule, comma-separated.
        #[arg(long)]
        depths: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Sweep the per-line maximum of the backward cluster.
    Rfield {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        radius: i64,
        #[arg(long)]
        depths: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Extract a side function from a field sweep and verify it.
    Barrier {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        radius: i64,
        #[arg(long)]
        depths: String,
        /// Extract from the forward (l) or backward (r) field.
        #[arg(long, default_value = "l")]
        from: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Coupled equality test against the relaxed model.
    Theorem1 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Per-sample cluster sandwich inclusions.
    Inclusions {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Critical-point scan over a probability grid.
    Pcscan {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Forward/backward transition comparison.
    Backcompare {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Directional slope table of field values.
    Zeta {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Render a grid file to an image.
    Render {
        /// Cluster grid file.
        #[arg(long)]
        grid: PathBuf,
        /// Second grid drawn translucent over the first (2D only).
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// plane (2D) or section (3D).
        #[arg(long, default_value = "plane")]
        mode: String,
        /// Axis-1 coordinate of the highlighted cross-section.
        #[arg(long)]
        plane: Option<i64>,
        /// Axis assignment preset for the 3D projection (0..=2).
        #[arg(long, default_value_t = 0)]
        preset: u8,
        #[arg(long, default_value = "classic")]
        palette: String,
        #[arg(long, default_value_t = 4)]
        scale: u32,
        #[arg(long, default_value = "ppm")]
        format: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Golden test: the pinned 22-vertex backward loop.
    #[command(name = "fixture-funnyb")]
    FixtureFunnyb {
        /// Number of distinct completion seeds to try.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Alternate fixture file (default: the shipped one).
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                DreError::Io(_) | DreError::Resource(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Cluster { model, radius, kind, origin, out } => {
            cmd_cluster(&model, radius, &kind, origin.as_deref(), &out.out)
        }
        Command::Lfield { model, radius, depths, out } => {
            cmd_field(&model, radius, &depths, false, &out.out)
        }
        Command::Rfield { model, radius, depths, out } => {
            cmd_field(&model, radius, &depths, true, &out.out)
        }
        Command::Barrier { model, radius, depths, from, out } => {
            cmd_barrier(&model, radius, &depths, &from, &out.out)
        }
        Command::Theorem1 { exp, out } => cmd_theorem1(&exp, &out.out),
        Command::Inclusions { exp, out } => cmd_inclusions(&exp, &out.out),
        Command::Pcscan { exp, out } => cmd_pcscan(&exp, &out.out),
        Command::Backcompare { exp, out } => cmd_backcompare(&exp, &out.out),
        Command::Zeta { exp, out } => cmd_zeta(&exp, &out.out),
        Command::Render { grid, overlay, mode, plane, preset, palette, scale, format, out } => {
            cmd_render(&grid, overlay.as_deref(), &mode, plane, preset, &palette, scale, format.as_str(), &out.out)
        }
        Command::FixtureFunnyb { seeds, fixture } => cmd_fixture(seeds, fixture.as_deref()),
    }
}

// ---------------------------------------------------------------------
// shared plumbing

fn parse_i64_list(s: &str, what: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| DreError::Parse(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn load_model(path: &Path) -> Result<ModelSpec> {
    ModelConfig::load(path)?.build()
}

struct Manifest {
    subcommand: &'static str,
    digest: String,
    base_seed: Option<u64>,
    started: u64,
    outputs: Vec<String>,
}

impl Manifest {
    fn start(subcommand: &'static str, digest: String, base_seed: Option<u64>) -> Manifest {
        Manifest { subcommand, digest, base_seed, started: unix_now(), outputs: Vec::new() }
    }

    fn write_file(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    fn finish(self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let manifest = RunManifest {
            tool_version: dre::VERSION.to_string(),
            subcommand: self.subcommand.to_string(),
            config_digest: self.digest,
            base_seed: self.base_seed,
            started_unix: self.started,
            finished_unix: unix_now(),
            outputs: self.outputs,
        };
        manifest.write_to(&dir.join("manifest.toml"))
    }
}

fn flag_digest(model: &ModelSpec, flags: &str, seed: u64) -> String {
    sha256_hex(format!("model={{{}}}\n{flags}\nseed={seed}\n", model.canonical_string()).as_bytes())
}

/// Load an experiment config, its model, and the effective seed.
fn load_experiment(exp: &ExperimentArgs) -> Result<(ExperimentConfig, ModelSpec, u64)> {
    let cfg = ExperimentConfig::load(&exp.config)?;
    let model = load_model(&cfg.model_path(&exp.config))?;
    let seed = exp
        .seed
        .or(cfg.base_seed)
        .ok_or_else(|| DreError::InvalidInput("no seed: pass --seed or set base_seed".into()))?;
    Ok((cfg, model, seed))
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| DreError::Parse(format!("experiment config needs {name}")))
}

fn centered_window(dim: usize, radius: i64) -> Result<TransverseWindow> {
    TransverseWindow::centered(dim, 1, radius)
}

// ---------------------------------------------------------------------
// subcommands

fn cmd_cluster(
    margs: &ModelArgs,
    radius: i64,
    kind: &str,
    origin: Option<&str>,
    out: &Path,
) -> Result<i32> {
    let spec = load_model(&margs.model)?;
    let dim = spec.dim();
    let origin = match origin {
        Some(s) => {
            let o = parse_i64_list(s, "origin")?;
            if o.len() != dim {
                return Err(DreError::InvalidInput(format!(
                    "origin has {} coordinates, model is {dim}-dimensional",
                    o.len()
                )));
            }
            o
        }
        None => vec![0; dim],
    };
    let bbox = LatticeBox::cube(dim, -radius, radius)?;
    let field = EnvironmentField::new(spec.clone(), margs.seed);
    let cluster = match kind {
        "forward" => forward_cluster(&field, &origin, &bbox)?,
        "backward" => backward_cluster(&field, &origin, &bbox)?,
        "mutual" => mutual_cluster(&field, &origin, &bbox)?,
        other => {
            return Err(DreError::InvalidInput(format!(
                "unknown cluster kind {other:?}; expected forward, backward, or mutual"
            )))
        }
    };
    let digest = flag_digest(&spec, &format!("cluster radius={radius} kind={kind} origin={origin:?}"), margs.seed);
    let mut manifest = Manifest::start("cluster", digest, Some(margs.seed));
    let grid = GridFile::from_cluster(&cluster);
    manifest.write_file(out, "cluster.dreg", &grid.to_bytes())?;
    manifest.finish(out)?;
    println!(
        "{} cluster at {:?}: {} members in [{},{}]^{}, boundary touched: {}",
        cluster.kind().as_str(),
        origin,
        cluster.member_count(),
        -radius,
        radius,
        dim,
        if cluster.touched_boundary() { "yes" } else { "no" }
    );
    println!("wrote {}", out.join("cluster.dreg").display());
    Ok(0)
}

fn cmd_field(
    margs: &ModelArgs,
    radius: i64,
    depths: &str,
    backward: bool,
    out: &Path,
) -> Result<i32> {
    let spec = load_model(&margs.model)?;
    let depths = parse_i64_list(depths, "depths")?;
    let window = centered_window(spec.dim(), radius)?;
    let origin = vec![0i64; spec.dim()];
    let field = EnvironmentField::new(spec.clone(), margs.seed);
    let (name, csv, stable, len, escape) = if backward {
        let rf = r_field(&field, &origin, &window, &depths)?;
        ("rfield", rf.to_csv(), rf.stable_count(), rf.len(), rf.escape_rate())
    } else {
        let lf = l_field(&field, &origin, &window, &depths)?;
        ("lfield", lf.to_csv(), lf.stable_count(), lf.len(), lf.escape_rate())
    };
    let digest = flag_digest(&spec, &format!("{name} radius={radius} depths={depths:?}"), margs.seed);
    let mut manifest = Manifest::start(if backward { "rfield" } else { "lfield" }, digest, Some(margs.seed));
    let file = format!("{name}.csv");
    manifest.write_file(out, &file, csv.as_bytes())?;
    manifest.finish(out)?;
    match escape {
        Some(r) => println!("{name}: {stable}/{len} lines stable, escape rate {r:.3}"),
        None => println!("{name}: {stable}/{len} lines stable"),
    }
    println!("wrote {}", out.join(&file).display());
    Ok(0)
}

fn cmd_barrier(
    margs: &ModelArgs,
    radius: i64,
    depths: &str,
    from: &str,
    out: &Path,
) -> Result<i32> {
    let spec = load_model(&margs.model)?;
    let depths = parse_i64_list(depths, "depths")?;
    let window = centered_window(spec.dim(), radius)?;
    let origin = vec![0i64; spec.dim()];
    let field = EnvironmentField::new(spec.clone(), margs.seed);
    let w = match from {
        "l" => side_function_from_lfield(&l_field(&field, &origin, &window, &depths)?)?,
        "r" => side_function_from_rfield(&r_field(&field, &origin, &window, &depths)?)?,
        other => {
            return Err(DreError::InvalidInput(format!(
                "unknown field side {other:?}; expected l or r"
            )))
        }
    };
    let report = verify_barrier(&w, &field);
    let digest = flag_digest(&spec, &format!("barrier radius={radius} depths={depths:?} from={from}"), margs.seed);
    let mut manifest = Manifest::start("barrier", digest, Some(margs.seed));
    let mut text = report.to_text();
    let deepest = *depths.last().expect("validated nonempty");
    if report.pass() {
        let bbox = sweep_box(&origin, &window, deepest)?;
        match barrier_bound_check(&w, &field, &origin, &bbox) {
            Ok(bound) => {
                text.push_str(&format!(
                    "bound check: {} cluster members checked, {} skipped off-window, {} violations\n",
                    bound.checked, bound.skipped_off_window, bound.violations.len()
                ));
            }
            Err(e) => text.push_str(&format!("bound check skipped: {e}\n")),
        }
    }
    manifest.write_file(out, "barrier_report.txt", text.as_bytes())?;
    let violations = report.violations_csv();
    manifest.write_file(out, "barrier_violations.csv", violations.as_bytes())?;
    manifest.finish(out)?;
    print!("{text}");
    println!("wrote {}", out.join("barrier_report.txt").display());
    let has_violations = !report.s2_violations.is_empty() || !report.s3_violations.is_empty();
    Ok(if has_violations { 3 } else { 0 })
}

fn cmd_theorem1(exp: &ExperimentArgs, out: &Path) -> Result<i32> {
    let (cfg, model, seed) = load_experiment(exp)?;
    let radius = need(&cfg.window_radius, "window_radius")?;
    let depths = need(&cfg.depths, "depths")?;
    let window = centered_window(model.dim(), radius)?;
    let report = theorem1_test(&model, &window, &depths, cfg.samples, seed)?;
    let mut manifest = Manifest::start("theorem1", cfg.digest(&model, seed), Some(seed));
    manifest.write_file(out, "theorem1.csv", report.to_csv().as_bytes())?;
    append_index(&out.join("index.tsv"), &cfg.digest(&model, seed), "theorem1.csv")?;
    manifest.finish(out)?;
    let passes = report.verdicts.iter().filter(|v| v.l_equal && v.ray_equal).count();
    println!("coupled equality: {passes}/{} samples agree", report.verdicts.len());
    println!("wrote {}", out.join("theorem1.csv").display());
    Ok(if report.all_pass() { 0 } else { 3 })
}

fn cmd_inclusions(exp: &ExperimentArgs, out: &Path) -> Result<i32> {
    let (cfg, model, seed) = load_experiment(exp)?;
    let radius = need(&cfg.box_radius, "box_radius")?;
    let bbox = LatticeBox::cube(model.dim(), -radius, radius)?;
    let report = inclusion_suite(&model, &bbox, cfg.samples, seed)?;
    let mut manifest = Manifest::start("inclusions", cfg.digest(&model, seed), Some(seed));
    manifest.write_file(out, "inclusions.csv", report.to_csv().as_bytes())?;
    append_index(&out.join("index.tsv"), &cfg.digest(&model, seed), "inclusions.csv")?;
    manifest.finish(out)?;
    println!(
        "inclusions: {} violations in {} samples",
        report.violations.len(),
        report.samples
    );
    println!("wrote {}", out.join("inclusions.csv").display());
    Ok(if report.pass() { 0 } else { 3 })
}

fn cmd_pcscan(exp: &ExperimentArgs, out: &Path) -> Result<i32> {
    let (cfg, model, seed) = load_experiment(exp)?;
    let grid = cfg
        .grid_probs()?
        .ok_or_else(|| DreError::Parse("experiment config needs grid".into()))?;
    let radius = need(&cfg.window_radius, "window_radius")?;
    let depths = need(&cfg.depths, "depths")?;
    let window = centered_window(model.dim(), radius)?;
    let result = pc_scan(&model, &grid, &window, &depths, cfg.samples, seed)?;
    let mut manifest = Manifest::start("pcscan", cfg.digest(&model, seed), Some(seed));
    manifest.write_file(out, "pcscan.csv", result.to_csv().as_bytes())?;
    append_index(&out.join("index.tsv"), &cfg.digest(&model, seed), "pcscan.csv")?;
    manifest.finish(out)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match &result.crossing {
        Some(ci) => match ci.point {
            Some(p) => println!(
                "transition estimate: {p:.4} (95% bootstrap CI {:.4}..{:.4})",
                ci.lo, ci.hi
            ),
            None => println!(
                "transition estimate: curve did not cross 50% (CI {:.4}..{:.4})",
                ci.lo, ci.hi
            ),
        },
        None => println!("transition estimate: none (curve stays on one side)"),
    }
    println!("wrote {}", out.join("pcscan.csv").display());
    Ok(0)
}

fn cmd_backcompare(exp: &ExperimentArgs, out: &Path) -> Result<i32> {
    let (cfg, model, seed) = load_experiment(exp)?;
    let grid = cfg
        .grid_probs()?
        .ok_or_else(|| DreError::Parse("experiment config needs grid".into()))?;
    let radius = need(&cfg.window_radius, "window_radius")?;
    let depths = need(&cfg.depths, "depths")?;
    let window = centered_window(model.dim(), radius)?;
    let report = backward_transition_compare(&model, &grid, &window, &depths, cfg.samples, seed)?;
    let mut manifest = Manifest::start("backcompare", cfg.digest(&model, seed), Some(seed));
    manifest.write_file(out, "backcompare.csv", report.to_csv().as_bytes())?;
    manifest.write_file(out, "backcompare_forward.csv", report.forward.to_csv().as_bytes())?;
    append_index(&out.join("index.tsv"), &cfg.digest(&model, seed), "backcompare.csv")?;
    manifest.finish(out)?;
    let fwd = report.forward.crossing.as_ref().and_then(|c| c.point);
    let bwd = report.backward_crossing.as_ref().and_then(|c| c.point);
    println!(
        "forward crossing: {}, backward crossing: {}, gap: {}, CIs overlap: {}",
        fwd.map(|v| format!("{v:.4}")).unwrap_or_else(|| "none".into()),
        bwd.map(|v| format!("{v:.4}")).unwrap_or_else(|| "none".into()),
        report.crossing_gap.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
        report.ci_overlap.map(|v| if v { "yes".into() } else { "no".to_string() }).unwrap_or_else(|| "n/a".into()),
    );
    println!("wrote {}", out.join("backcompare.csv").display());
    Ok(0)
}

fn cmd_zeta(exp: &ExperimentArgs, out: &Path) -> Result<i32> {
    let (cfg, model, seed) = load_experiment(exp)?;
    let direction = need(&cfg.direction, "direction")?;
    let n_list = need(&cfg.n_list, "n_list")?;
    let depths = need(&cfg.depths, "depths")?;
    let table = zeta_estimate(&model, &direction, &n_list, &depths, cfg.samples, seed)?;
    let mut manifest = Manifest::start("zeta", cfg.digest(&model, seed), Some(seed));
    manifest.write_file(out, "zeta.csv", table.to_csv().as_bytes())?;
    append_index(&out.join("index.tsv"), &cfg.digest(&model, seed), "zeta.csv")?;
    manifest.finish(out)?;
    for row in &table.rows {
        println!(
            "n={}: {}/{} stable, mean slope {}",
            row.n,
            row.stable_samples,
            row.total_samples,
            row.mean_slope.map(|m| format!("{m:.4}")).unwrap_or_else(|| "n/a".into())
        );
    }
    println!("wrote {}", out.join("zeta.csv").display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_render(
    grid: &Path,
    overlay: Option<&Path>,
    mode: &str,
    plane: Option<i64>,
    preset: u8,
    palette: &str,
    scale: u32,
    format: &str,
    out: &Path,
) -> Result<i32> {
    let base = GridFile::read_from(grid)?;
    let overlay_grid = overlay.map(GridFile::read_from).transpose()?;
    let palette = Palette::parse(palette)?;
    let format = ImageFormat::parse(format)?;
    let job = RenderJob { base, overlay: overlay_grid, palette, scale };
    let raster = match mode {
        "plane" => render_2d(&job)?,
        "section" => {
            let plane = plane.ok_or_else(|| {
                DreError::InvalidInput("section mode needs --plane".into())
            })?;
            render_3d_section(&job, plane, preset)?
        }
        other => {
            return Err(DreError::InvalidInput(format!(
                "unknown mode {other:?}; expected plane or section"
            )))
        }
    };
    let digest = sha256_hex(
        format!(
            "render mode={mode} plane={plane:?} preset={preset} palette={} scale={scale} format={}",
            palette.as_str(),
            format.extension()
        )
        .as_bytes(),
    );
    let mut manifest = Manifest::start("render", digest, None);
    let name = format!("render.{}", format.extension());
    manifest.write_file(out, &name, &raster.encode(format))?;
    manifest.finish(out)?;
    println!(
        "wrote {} ({}x{})",
        out.join(&name).display(),
        raster.width(),
        raster.height()
    );
    Ok(0)
}

fn cmd_fixture(seeds: u64, fixture: Option<&Path>) -> Result<i32> {
    if seeds == 0 {
        return Err(DreError::InvalidInput("need at least one completion seed".into()));
    }
    let fx = match fixture {
        Some(path) => load_loop_fixture(path)?,
        None => parse_loop_fixture(SHIPPED_FIXTURE)?,
    };
    let dim = fx.explicit.spec().dim();
    let bbox = LatticeBox::cube(dim, -6, 6)?;
    let origin = vec![0i64; dim];
    let n = fx.loop_order.len();
    let mut all_pass = true;
    for seed in 0..seeds {
        let field = EnvironmentField::from_explicit(&fx.explicit, seed)?;
        let cluster = backward_cluster(&field, &origin, &bbox)?;
        let mut missing = 0usize;
        for site in &fx.loop_order {
            if !cluster.contains(site) {
                missing += 1;
            }
        }
        let extras = cluster.member_count() - (n - missing);
        let ok = missing == 0 && extras == 0 && !cluster.touched_boundary();
        if seed == 0 {
            for site in &fx.loop_order {
                let coords: Vec<String> = site.iter().map(|c| c.to_string()).collect();
                println!(
                    "({})  expected=yes computed={}",
                    coords.join(","),
                    if cluster.contains(site) { "yes" } else { "NO" }
                );
            }
            println!("extra members beyond the loop: {extras}");
        }
        if !ok {
            all_pass = false;
            println!("seed {seed}: MISMATCH ({missing} missing, {extras} extra)");
        }
    }
    if all_pass {
        println!("PASS: B_o = {n}-vertex loop ({seeds}/{seeds} seeds)");
        Ok(0)
    } else {
        println!("FAIL: backward cluster does not match the {n}-vertex loop");
        Ok(3)
    }
}
