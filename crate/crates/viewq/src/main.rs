use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use viewq::dataset::{self, ModelRecord, Projection};
use viewq::mesh_io::{load_mesh, write_off, MeshFormat};
use viewq::{parallel, points, Error};
use viewq_core::descent::{
    bimodal_map, compare_strategies, descend, DescentConfig, SingleLabels, Strategy, StrategyReport,
};
use viewq_core::labels::{build_label_set, gl_target, DistanceKernel, GaussianParams};
use viewq_core::measures::{view_distribution, Measure, VQMap};
use viewq_core::raster::{CameraConfig, Rasterizer};
use viewq_core::sampling::{
    farthest_point_sample, fibonacci_sphere, random_rotation, sample_surface_uniform, ViewSphere,
};
use viewq_core::Mesh;

/// Viewpoint-quality sampling, best-view selection, label-generation
/// simulation and hidden-face removal for triangle meshes.
#[derive(Parser, Debug)]
#[command(name = "viewq", version)]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "VIEWQ_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate VE, VR, VKL and VMI over a view sphere and write a record
    /// (JSON plus a sibling CSV).
    SampleVq {
        #[command(flatten)]
        input: MeshInput,
        #[command(flatten)]
        protocol: Protocol,
        /// Output record path; the CSV goes next to it.
        #[arg(long, short)]
        out: PathBuf,
        /// Model id stored in the record (default: file stem).
        #[arg(long)]
        model_id: Option<String>,
    },
    /// Print the best viewpoint per measure as JSON.
    BestView {
        #[command(flatten)]
        input: MeshInput,
        #[command(flatten)]
        protocol: Protocol,
        /// Measures to report.
        #[arg(long, value_delimiter = ',', default_values = ["VE", "VR", "VKL", "VMI"])]
        measures: Vec<String>,
        /// Dump the item buffer of the first measure's best view as PGM.
        #[arg(long)]
        item_buffer: Option<PathBuf>,
    },
    /// Compare label strategies (SL, ML, GL, ML+GL) by simulated descent.
    SimulateLabels(SimulateArgs),
    /// Remove faces that are not visible from any sampled view.
    CleanFaces {
        #[command(flatten)]
        input: MeshInput,
        #[command(flatten)]
        protocol: Protocol,
        /// Cleaned OFF output.
        #[arg(long, short)]
        out: PathBuf,
        /// JSON removal report (default: stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time evaluation over views and resolutions (mean of several runs).
    Bench {
        /// Mesh files.
        #[arg(required = true)]
        meshes: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [250usize, 500, 1000])]
        views: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1024u32])]
        resolutions: Vec<u32>,
        #[arg(long, default_value_t = 90.0)]
        fov: f64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
    /// Render a record's map onto a sphere projection (PGM).
    ExportMap {
        /// Record written by sample-vq.
        record: PathBuf,
        #[arg(long, default_value = "VE")]
        measure: String,
        #[arg(long, value_enum, default_value_t = ProjectionArg::Mercator)]
        projection: ProjectionArg,
        /// Image width in pixels.
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Sample points on the surface, optionally thinned by farthest point
    /// sampling and randomly rotated.
    SamplePoints {
        #[command(flatten)]
        input: MeshInput,
        #[arg(long, default_value_t = 20_000)]
        points: usize,
        /// Keep this many points chosen by farthest point sampling.
        #[arg(long)]
        fps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Apply a seeded random Euler rotation.
        #[arg(long)]
        rotate: bool,
        /// Write the little-endian binary form instead of XYZ text.
        #[arg(long)]
        binary: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct MeshInput {
    /// Mesh file (OFF or OBJ).
    mesh: PathBuf,
    /// Overrides the format guessed from the extension.
    #[arg(long)]
    format: Option<MeshFormat>,
    /// Warn when the mesh has more triangles than this.
    #[arg(long, default_value_t = 10_000)]
    max_faces: usize,
}

#[derive(Args, Debug, Clone)]
struct Protocol {
    /// Number of Fibonacci viewpoints.
    #[arg(long, default_value_t = 1000)]
    views: usize,
    /// Square render resolution in pixels.
    #[arg(long, default_value_t = 1024)]
    resolution: u32,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = 90.0)]
    fov: f64,
}

impl Protocol {
    fn camera(&self) -> CameraConfig {
        CameraConfig::square(self.resolution).with_fov_degrees(self.fov)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Record to take the map from; without it a bimodal synthetic map with
    /// conflicting single labels is used.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value = "VE")]
    measure: String,
    /// Views of the synthetic map.
    #[arg(long, default_value_t = 1000)]
    views: usize,
    #[arg(long, default_value_t = viewq_core::labels::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    /// Step at which ML+GL switches from ML to GL.
    #[arg(long, default_value_t = 200)]
    switch_step: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    /// Number of seeded initial predictions.
    #[arg(long, default_value_t = 100)]
    inits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed single labels (view indices); default: the map's best view,
    /// or both peaks of the synthetic map.
    #[arg(long, value_delimiter = ',')]
    single_labels: Option<Vec<usize>>,
    /// Strategy report output (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// CSV of every strategy's trajectory from the first initialization.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// JSON dump of the label set and the GL targets at the initial
    /// predictions.
    #[arg(long)]
    label_set: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelArg {
    Linear,
    Squared,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProjectionArg {
    Mercator,
    Equirectangular,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match &error {
            Error::InvalidArgument(_) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<viewq_core::Error> for Failure {
    fn from(e: viewq_core::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        error: Error::InvalidArgument(message.into()),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = json!({ "error": { "kind": f.error.kind(), "message": f.error.to_string() } });
            eprintln!("{line}");
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let pool = parallel::thread_pool(cli.threads)?;
    match cli.command {
        Command::SampleVq {
            input,
            protocol,
            out,
            model_id,
        } => {
            let mesh = read_mesh(&input)?;
            let id = model_id.unwrap_or_else(|| stem(&input.mesh));
            let record = sample_vq(&mesh, &id, &protocol, &pool)?;
            dataset::write_record(&record, &out)?;
            log::info!("wrote {} and {}", out.display(), dataset::csv_sibling(&out).display());
            Ok(())
        }
        Command::BestView {
            input,
            protocol,
            measures,
            item_buffer,
        } => best_view(&input, &protocol, &measures, item_buffer.as_deref(), &pool),
        Command::SimulateLabels(args) => simulate_labels(&args),
        Command::CleanFaces {
            input,
            protocol,
            out,
            report,
        } => clean_faces(&input, &protocol, &out, report.as_deref(), &pool),
        Command::Bench {
            meshes,
            views,
            resolutions,
            fov,
            runs,
        } => bench(&meshes, &views, &resolutions, fov, runs, &pool),
        Command::ExportMap {
            record,
            measure,
            projection,
            size,
            out,
        } => {
            let record = read_input_record(&record)?;
            let map = record_map(&record, &measure)?;
            let projection = match projection {
                ProjectionArg::Mercator => Projection::Mercator,
                ProjectionArg::Equirectangular => Projection::Equirectangular,
            };
            if size == 0 {
                return Err(usage("--size must be positive"));
            }
            dataset::export_sphere_map(&map, &record.view_sphere()?, &out, projection, size)?;
            Ok(())
        }
        Command::SamplePoints {
            input,
            points: k,
            fps,
            seed,
            rotate,
            binary,
            out,
        } => {
            let mesh = read_mesh(&input)?;
            let mut cloud = sample_surface_uniform(&mesh, k, seed)?;
            if let Some(m) = fps {
                cloud = cloud.select(&farthest_point_sample(&cloud, m, seed)?);
            }
            if rotate {
                cloud = cloud.transformed(&random_rotation(seed));
            }
            if binary {
                points::write_binary(&cloud.points, &out)?;
            } else {
                points::write_xyz(&cloud.points, &out)?;
            }
            Ok(())
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn check_input(path: &Path) -> CmdResult {
    if !path.is_file() {
        return Err(usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

fn read_mesh(input: &MeshInput) -> Result<Mesh, Failure> {
    check_input(&input.mesh)?;
    let format = match input.format.or_else(|| MeshFormat::from_path(&input.mesh)) {
        Some(f) => f,
        None => return Err(usage("cannot tell the mesh format from the extension; pass --format")),
    };
    let mesh = load_mesh(&input.mesh, format)?;
    let summary = mesh.summary();
    if summary.face_count > input.max_faces {
        log::warn!(
            "{} has {} triangles (more than {}); sampling will be slow",
            input.mesh.display(),
            summary.face_count,
            input.max_faces
        );
    }
    if summary.degenerate_count > 0 {
        log::warn!("{} has {} zero-area triangles", input.mesh.display(), summary.degenerate_count);
    }
    Ok(mesh)
}

fn read_input_record(path: &Path) -> Result<ModelRecord, Failure> {
    check_input(path)?;
    Ok(dataset::read_record(path)?)
}

fn parse_measure(name: &str) -> Result<Measure, Failure> {
    Measure::from_name(name).ok_or_else(|| usage(format!("unknown measure `{name}` (VE, VR, VKL or VMI)")))
}

fn record_map(record: &ModelRecord, name: &str) -> Result<VQMap, Failure> {
    let m = parse_measure(name)?;
    Ok(record.measure(m).expect("validated records hold every measure").to_map())
}

fn sphere_for(protocol: &Protocol) -> Result<ViewSphere, Failure> {
    fibonacci_sphere(protocol.views).map_err(|e| usage(e.to_string()))
}

fn sample_vq(mesh: &Mesh, id: &str, protocol: &Protocol, pool: &rayon::ThreadPool) -> Result<ModelRecord, Failure> {
    let sphere = sphere_for(protocol)?;
    let camera = protocol.camera();
    let start = Instant::now();
    let eval = parallel::evaluate_model(mesh, &sphere, &camera, pool)?;
    log::info!(
        "{id}: {} views at {}x{} in {:.2}s",
        sphere.len(),
        camera.width,
        camera.height,
        start.elapsed().as_secs_f64()
    );
    for (view, measure, err) in &eval.excluded {
        log::warn!("view {view} excluded from {}: {err}", measure.name());
    }
    Ok(ModelRecord::from_evaluation(id, sphere.len(), &camera, &eval))
}

fn print_json(value: &serde_json::Value, path: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not worth an error line
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn best_view(
    input: &MeshInput,
    protocol: &Protocol,
    measures: &[String],
    item_buffer: Option<&Path>,
    pool: &rayon::ThreadPool,
) -> CmdResult {
    let measures = measures
        .iter()
        .map(|m| parse_measure(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mesh = read_mesh(input)?;
    let sphere = sphere_for(protocol)?;
    let camera = protocol.camera();
    let eval = parallel::evaluate_model(&mesh, &sphere, &camera, pool)?;
    let best: Vec<_> = measures
        .iter()
        .map(|&m| {
            let map = eval.map(m);
            let i = map.best_index;
            json!({
                "measure": m.name(),
                "index": i,
                "direction": sphere.get(i).to_array(),
                "raw": map.raw[i],
                "normalized": map.normalized[i],
                "excluded_views": map.excluded().count(),
            })
        })
        .collect();
    if let (Some(path), Some(&m)) = (item_buffer, measures.first()) {
        let mut r = Rasterizer::new(camera.width, camera.height)?;
        view_distribution(&mut r, &mesh, sphere.get(eval.map(m).best_index), &camera)?;
        dataset::write_item_buffer(&r, path)?;
    }
    print_json(
        &json!({
            "model": stem(&input.mesh),
            "views": sphere.len(),
            "resolution": protocol.resolution,
            "best": best,
        }),
        None,
    )
}

fn simulate_labels(args: &SimulateArgs) -> CmdResult {
    let (map, sphere, default_labels) = match &args.record {
        Some(path) => {
            let record = read_input_record(path)?;
            let map = record_map(&record, &args.measure)?;
            (map, record.view_sphere()?, SingleLabels::Argbest)
        }
        None => {
            let sphere = fibonacci_sphere(args.views).map_err(|e| usage(e.to_string()))?;
            let (map, a, b) = bimodal_map(&sphere, 120f64.to_radians(), 0.3)?;
            (map, sphere, SingleLabels::Fixed(vec![a, b]))
        }
    };
    let config = DescentConfig {
        total_steps: args.steps,
        switch_step: args.switch_step,
        learning_rate: args.learning_rate,
        alpha: args.alpha,
        gaussian: GaussianParams {
            sigma: args.sigma,
            s: args.s,
            kernel: match args.kernel {
                KernelArg::Linear => DistanceKernel::Linear,
                KernelArg::Squared => DistanceKernel::Squared,
            },
        },
        seed: args.seed,
        strategy: Strategy::TwoStage,
        single_labels: args.single_labels.clone().map_or(default_labels, SingleLabels::Fixed),
    };
    let report = compare_strategies(&map, &sphere, &config, args.inits).map_err(|e| match e {
        viewq_core::Error::InvalidArgument(m) => usage(m),
        other => other.into(),
    })?;

    if let Some(path) = &args.label_set {
        let labels = build_label_set(&map, &sphere, config.alpha)?;
        let inits = viewq_core::descent::random_directions(args.inits, config.seed);
        let targets = inits
            .iter()
            .map(|&v| gl_target(v, &map, &sphere, &config.gaussian).map(|(t, _)| t))
            .collect::<Result<Vec<_>, _>>()?;
        print_json(
            &json!({
                "alpha": labels.alpha,
                "indices": labels.indices,
                "vectors": labels.vectors.iter().map(|v| v.to_array()).collect::<Vec<_>>(),
                "gl_targets_at_inits": targets,
            }),
            Some(path),
        )?;
    }
    if let Some(path) = &args.trajectory {
        write_trajectories(path, &map, &sphere, &config, args.seed)?;
    }
    print_json(&report_json(&report), args.out.as_deref())
}

fn report_json(report: &StrategyReport) -> serde_json::Value {
    json!({
        "n_inits": report.n_inits,
        "strategies": report.results.iter().map(|r| json!({
            "strategy": r.strategy.name(),
            "mean_final_quality": r.mean_final_quality,
            "mean_convergence_step": r.mean_convergence_step,
            "mean_peak_distance": r.mean_peak_distance,
        })).collect::<Vec<_>>(),
    })
}

fn write_trajectories(path: &Path, map: &VQMap, sphere: &ViewSphere, config: &DescentConfig, seed: u64) -> CmdResult {
    let init = viewq_core::descent::random_directions(1, seed)[0];
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["strategy", "step", "stage", "x", "y", "z", "loss", "label", "quality"])
        .map_err(io_err)?;
    for strategy in Strategy::ALL {
        let cfg = DescentConfig {
            strategy,
            ..config.clone()
        };
        for s in descend(map, sphere, &cfg, init)? {
            let q = viewq_core::descent::nearest_quality(map, sphere, s.v_hat);
            w.write_record([
                strategy.name().to_string(),
                s.step.to_string(),
                s.stage.name().to_string(),
                s.v_hat.x.to_string(),
                s.v_hat.y.to_string(),
                s.v_hat.z.to_string(),
                s.loss.to_string(),
                s.label.to_string(),
                q.to_string(),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn clean_faces(
    input: &MeshInput,
    protocol: &Protocol,
    out: &Path,
    report: Option<&Path>,
    pool: &rayon::ThreadPool,
) -> CmdResult {
    let mesh = read_mesh(input)?;
    if protocol.resolution < 512 {
        log::warn!("resolution below 512 may drop small visible faces");
    }
    sphere_for(protocol)?;
    let cleaned = parallel::remove_hidden_faces(&mesh, protocol.views, &protocol.camera(), pool)?;
    write_off(&cleaned.mesh, out)?;
    log::info!(
        "removed {} of {} triangles",
        cleaned.removed.len(),
        mesh.faces().len()
    );
    print_json(
        &json!({
            "model": stem(&input.mesh),
            "views": protocol.views,
            "resolution": protocol.resolution,
            "faces_before": mesh.faces().len(),
            "faces_after": cleaned.mesh.faces().len(),
            "removed": cleaned.removed,
        }),
        report,
    )
}

fn bench(
    meshes: &[PathBuf],
    views: &[usize],
    resolutions: &[u32],
    fov: f64,
    runs: usize,
    pool: &rayon::ThreadPool,
) -> CmdResult {
    if runs == 0 {
        return Err(usage("--runs must be positive"));
    }
    let mut rows = Vec::new();
    for path in meshes {
        let input = MeshInput {
            mesh: path.clone(),
            format: None,
            max_faces: usize::MAX,
        };
        let mesh = read_mesh(&input)?;
        for &res in resolutions {
            for &n in views {
                let protocol = Protocol {
                    views: n,
                    resolution: res,
                    fov,
                };
                let sphere = sphere_for(&protocol)?;
                let mut total = 0.0;
                for _ in 0..runs {
                    let start = Instant::now();
                    parallel::evaluate_model(&mesh, &sphere, &protocol.camera(), pool)?;
                    total += start.elapsed().as_secs_f64();
                }
                let mean = total / runs as f64;
                log::info!("{}: {} faces, {n} views, {res}px: {mean:.3}s", stem(path), mesh.faces().len());
                rows.push(json!({
                    "model": stem(path),
                    "faces": mesh.faces().len(),
                    "views": n,
                    "resolution": res,
                    "runs": runs,
                    "mean_seconds": mean,
                }));
            }
        }
    }
    print_json(&json!({ "threads": pool.current_num_threads(), "timings": rows }), None)
}
