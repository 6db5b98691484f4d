//! Command-line surface: lifting graphs and meshes to complexes,
//! exporting neighborhood matrices, mapper pooling, training, and
//! Hasse-graph reductions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topocc::cochain::{Aggregation, Cochain};
use topocc::complex::CombinatorialComplex;
use topocc::hasse::{augment_hasse, reduce_and_run};
use topocc::io;
use topocc::lifting::{coface_cc, lattice_cc, loop_cc, n_hop_cc, path_cc};
use topocc::mesh::{load_off, mesh_features, mesh_to_cc};
use topocc::mog::{agd, mog_pool, normalize_scalar, MogCover};
use topocc::neighborhoods::Selector;
use topocc::nn::train::{
    cycle_clique_complexes, degree_features, evaluate_accuracy, DatasetItem, Target,
};
use topocc::nn::{compile_diagram, train, Dataset, DiagramSpec, Mode, TrainConfig};

#[derive(Parser)]
#[command(name = "topocc", about = "Combinatorial complexes and networks on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift a graph, mesh, or grid to a combinatorial complex file.
    Lift(LiftArgs),
    /// Export a neighborhood matrix as sparse triplets.
    Matrices(MatricesArgs),
    /// Mapper-on-graphs pooling of a vertex cochain.
    Pool(PoolArgs),
    /// Train a diagram from a run configuration.
    Train(TrainArgs),
    /// Export the augmented Hasse graph of a diagram and verify the
    /// reduction against the diagram forward pass.
    ReduceHasse(ReduceHasseArgs),
    /// Extract vertex, edge, and face cochains from a mesh.
    Features(FeaturesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftMethod {
    Nhop,
    Paths,
    Loops,
    Coface,
    Lattice,
    Mesh,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long, value_enum)]
    method: LiftMethod,
    /// Edge list (nhop/paths/loops), complex file (coface), or OFF
    /// mesh (mesh). Unused for lattice.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Hop radius for nhop.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Vertex sequences, one walk per line (paths).
    #[arg(long)]
    paths: Option<PathBuf>,
    /// Vertex cycles, one per line (loops).
    #[arg(long)]
    loops: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    height: usize,
    #[arg(long, default_value_t = 3)]
    width: usize,
    #[arg(long, default_value_t = 2)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args)]
struct MatricesArgs {
    #[arg(long)]
    cc: PathBuf,
    /// Selector such as `B0,1`, `B0,1^T`, `A1,1`, `coA2,1`, `sB0`,
    /// `Id1`.
    #[arg(long)]
    which: String,
    /// Apply symmetric degree normalization.
    #[arg(long)]
    normalized: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarSource {
    Agd,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Sum,
    Mean,
    Max,
}

impl From<AggArg> for Aggregation {
    fn from(a: AggArg) -> Self {
        match a {
            AggArg::Sum => Aggregation::Sum,
            AggArg::Mean => Aggregation::Mean,
            AggArg::Max => Aggregation::Max,
        }
    }
}

#[derive(Args)]
struct PoolArgs {
    /// Mapper-on-graphs pooling (the only shipped strategy).
    #[arg(long)]
    mog: bool,
    #[arg(long)]
    graph: PathBuf,
    /// Vertex cochain to pool.
    #[arg(long)]
    cochain: PathBuf,
    #[arg(long, default_value_t = 2)]
    intervals: usize,
    #[arg(long, default_value_t = 0.3)]
    overlap: f64,
    #[arg(long, value_enum, default_value_t = ScalarSource::Agd)]
    scalar: ScalarSource,
    /// One scalar per vertex, used with `--scalar file`.
    #[arg(long)]
    scalar_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AggArg::Sum)]
    agg: AggArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct ReduceHasseArgs {
    #[arg(long)]
    cc: PathBuf,
    #[arg(long)]
    diagram: PathBuf,
    /// DOT export of the augmented Hasse graph.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    off: PathBuf,
    #[arg(long)]
    out_prefix: String,
}

/// Validation failures exit 2; internal failures exit 1.
enum CliError {
    Validation(anyhow::Error),
    Internal(anyhow::Error),
}

fn validation(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Validation(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

/// Reads an input file; relative paths that do not exist are retried
/// under the directory named by `TOPOCC_FIXTURES`.
fn read_to_string(path: &Path) -> Result<String, CliError> {
    let resolved = if !path.exists() && path.is_relative() {
        match std::env::var_os("TOPOCC_FIXTURES") {
            Some(dir) => PathBuf::from(dir).join(path),
            None => path.to_path_buf(),
        }
    } else {
        path.to_path_buf()
    };
    std::fs::read_to_string(&resolved)
        .with_context(|| format!("reading {}", resolved.display()))
        .map_err(CliError::Validation)
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Internal)
}

fn parse_sequences(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| validation(anyhow!("bad vertex `{t}`: {e}")))
                })
                .collect()
        })
        .collect()
}

fn run_lift(args: LiftArgs) -> Result<(), CliError> {
    let need_input = || {
        args.input
            .as_deref()
            .ok_or_else(|| validation(anyhow!("--input is required for this method")))
    };
    let cc: CombinatorialComplex = match args.method {
        LiftMethod::Nhop => {
            let g = io::parse_edge_list(&read_to_string(need_input()?)?).map_err(validation)?;
            if args.n < 2 {
                return Err(validation(anyhow!("--n must be at least 2")));
            }
            n_hop_cc(&g, args.n).map_err(validation)?
        }
        LiftMethod::Paths => {
            let g = io::parse_edge_list(&read_to_string(need_input()?)?).map_err(validation)?;
            let file = args
                .paths
                .as_deref()
                .ok_or_else(|| validation(anyhow!("--paths is required")))?;
            let walks = parse_sequences(&read_to_string(file)?)?;
            path_cc(&g, &walks).map_err(validation)?
        }
        LiftMethod::Loops => {
            let g = io::parse_edge_list(&read_to_string(need_input()?)?).map_err(validation)?;
            let file = args
                .loops
                .as_deref()
                .ok_or_else(|| validation(anyhow!("--loops is required")))?;
            let cycles = parse_sequences(&read_to_string(file)?)?;
            loop_cc(&g, &cycles).map_err(validation)?
        }
        LiftMethod::Coface => {
            let cc = io::parse_cc(&read_to_string(need_input()?)?).map_err(validation)?;
            coface_cc(&cc).map_err(validation)?
        }
        LiftMethod::Lattice => {
            lattice_cc(args.height, args.width, args.window, args.stride).map_err(validation)?
        }
        LiftMethod::Mesh => {
            let mesh = load_off(need_input()?).map_err(validation)?;
            mesh_to_cc(&mesh)
        }
    };
    write_output(&args.out, &io::format_cc(&cc))?;
    println!("cells {}", cc.cell_count());
    Ok(())
}

fn run_matrices(args: MatricesArgs) -> Result<(), CliError> {
    let cc = io::parse_cc(&read_to_string(&args.cc)?).map_err(validation)?;
    let selector: Selector = args.which.parse().map_err(validation)?;
    let mut matrix = selector.resolve(&cc).map_err(validation)?;
    if args.normalized {
        matrix = matrix.sym_normalized();
    }
    let text = io::format_triplets(matrix.matrix());
    match &args.out {
        Some(path) => write_output(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_pool(args: PoolArgs) -> Result<(), CliError> {
    if !args.mog {
        return Err(validation(anyhow!("only --mog pooling is available")));
    }
    let g = io::parse_edge_list(&read_to_string(&args.graph)?).map_err(validation)?;
    let h0 = io::parse_cochain(&read_to_string(&args.cochain)?).map_err(validation)?;
    let f = match args.scalar {
        ScalarSource::Agd => normalize_scalar(&agd(&g)),
        ScalarSource::File => {
            let path = args
                .scalar_file
                .as_deref()
                .ok_or_else(|| validation(anyhow!("--scalar-file is required")))?;
            let values: Vec<f64> = read_to_string(path)?
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|e| validation(anyhow!("bad scalar: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if values.len() != g.vertex_count() {
                return Err(validation(anyhow!(
                    "expected {} scalars, found {}",
                    g.vertex_count(),
                    values.len()
                )));
            }
            values
        }
    };
    let cover = MogCover::uniform(args.intervals, args.overlap).map_err(validation)?;
    let (result, pooled) = mog_pool(&g, &h0, &f, &cover, args.agg.into()).map_err(validation)?;
    println!("components {}", result.components.len());
    println!("mog-edges {}", result.mog_edges.len());
    for (interval, verts) in &result.components {
        let mut line = format!("component {interval}");
        for v in verts {
            let _ = write!(line, " {v}");
        }
        println!("{line}");
    }
    write_output(&args.out, &io::format_cochain(&pooled))?;
    Ok(())
}

/// Run configuration: `diagram <path>` and `dataset cycles-cliques
/// <per_class> <n_min> <n_max> <noise> <seed>` lines; hyperparameters
/// come from the diagram file's `train` line.
struct RunConfig {
    diagram: PathBuf,
    per_class: usize,
    n_min: usize,
    n_max: usize,
    noise: f64,
    data_seed: u64,
}

fn parse_run_config(text: &str, base: &Path) -> Result<RunConfig, CliError> {
    let mut diagram = None;
    let mut dataset = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("diagram ") {
            diagram = Some(base.join(rest.trim()));
        } else if let Some(rest) = line.strip_prefix("dataset ") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let ["cycles-cliques", per_class, n_min, n_max, noise, seed] = tokens[..] else {
                return Err(validation(anyhow!(
                    "expected `dataset cycles-cliques <per_class> <n_min> <n_max> <noise> <seed>`"
                )));
            };
            dataset = Some((
                per_class
                    .parse()
                    .map_err(|e| validation(anyhow!("bad per_class: {e}")))?,
                n_min
                    .parse()
                    .map_err(|e| validation(anyhow!("bad n_min: {e}")))?,
                n_max
                    .parse()
                    .map_err(|e| validation(anyhow!("bad n_max: {e}")))?,
                noise
                    .parse()
                    .map_err(|e| validation(anyhow!("bad noise: {e}")))?,
                seed.parse()
                    .map_err(|e| validation(anyhow!("bad seed: {e}")))?,
            ));
        } else {
            return Err(validation(anyhow!("unknown config line `{line}`")));
        }
    }
    let diagram = diagram.ok_or_else(|| validation(anyhow!("config needs `diagram <path>`")))?;
    if !diagram.exists() {
        return Err(validation(anyhow!(
            "diagram file {} does not exist",
            diagram.display()
        )));
    }
    let (per_class, n_min, n_max, noise, data_seed) =
        dataset.ok_or_else(|| validation(anyhow!("config needs a `dataset` line")))?;
    Ok(RunConfig {
        diagram,
        per_class,
        n_min,
        n_max,
        noise,
        data_seed,
    })
}

fn run_train(args: TrainArgs) -> Result<(), CliError> {
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let config = parse_run_config(&read_to_string(&args.config)?, &base)?;
    let diagram_text = read_to_string(&config.diagram)?;
    let spec = DiagramSpec::parse(&diagram_text).map_err(validation)?;
    let train_cfg: TrainConfig = TrainConfig::parse(&diagram_text)
        .map_err(validation)?
        .ok_or_else(|| validation(anyhow!("diagram file needs a `train` line")))?;

    // The synthetic features bind to the diagram's rank-0 input node.
    let feature_node = spec
        .nodes
        .iter()
        .find(|n| n.rank == 0 && spec.edges.iter().all(|e| e.dst != n.id))
        .map(|n| n.id.clone())
        .ok_or_else(|| validation(anyhow!("diagram needs a rank-0 input node")))?;
    if config.per_class == 0 {
        return Err(validation(anyhow!("dataset needs at least one item per class")));
    }
    let complexes =
        cycle_clique_complexes(config.per_class, config.n_min, config.n_max, config.data_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.data_seed ^ 0x9e37_79b9);
    let mut items = Vec::new();
    for (cc, label) in complexes {
        let diagram = compile_diagram(&spec, &cc, train_cfg.seed).map_err(validation)?;
        let inputs: HashMap<String, Cochain> = [(
            feature_node.clone(),
            degree_features(&cc, config.noise, &mut rng),
        )]
        .into();
        items.push(DatasetItem {
            diagram,
            inputs,
            target: Target::Class(label),
        });
    }
    let mut test_items = Vec::new();
    let mut train_items = Vec::new();
    for (i, item) in items.drain(..).enumerate() {
        if i % 5 == 4 {
            test_items.push(item);
        } else {
            train_items.push(item);
        }
    }
    let train_set = Dataset::new(train_items);
    let test_set = Dataset::new(test_items);
    let mut params = train_set.items[0].diagram.params().clone();
    let history = train(&mut params, &train_set, &train_cfg).map_err(internal)?;
    for (epoch, stats) in history.iter().enumerate() {
        if epoch % 25 == 0 || epoch + 1 == history.len() {
            match stats.accuracy {
                Some(acc) => println!("epoch {epoch} loss {:.6} accuracy {:.4}", stats.loss, acc),
                None => println!("epoch {epoch} loss {:.6}", stats.loss),
            }
        }
    }
    if !test_set.is_empty() {
        let test_accuracy =
            evaluate_accuracy(&params, &test_set, &train_cfg.output).map_err(internal)?;
        println!("held-out accuracy {test_accuracy:.4}");
    }
    Ok(())
}

fn run_reduce_hasse(args: ReduceHasseArgs) -> Result<(), CliError> {
    let cc = io::parse_cc(&read_to_string(&args.cc)?).map_err(validation)?;
    let text = read_to_string(&args.diagram)?;
    let spec = DiagramSpec::parse(&text).map_err(validation)?;
    let compiled = compile_diagram(&spec, &cc, args.seed).map_err(validation)?;

    if let Some(dot_path) = &args.dot {
        let selectors: Vec<Selector> = spec.edges.iter().map(|e| e.selector).collect();
        let graph = augment_hasse(&cc, &selectors).map_err(validation)?;
        write_output(dot_path, &graph.to_dot())?;
    }

    // Seeded inputs for the equivalence check.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x00ab_cdef);
    let mut inputs = HashMap::new();
    for node in spec
        .nodes
        .iter()
        .filter(|n| spec.edges.iter().all(|e| e.dst != n.id))
    {
        let data = ndarray::Array2::from_shape_fn((cc.rank_size(node.rank), node.dim), |_| {
            rng.random_range(-1.0..1.0)
        });
        inputs.insert(node.id.clone(), Cochain::new(node.rank, data));
    }
    let forward = compiled.forward(&inputs, Mode::Infer).map_err(validation)?;
    let reduced = reduce_and_run(&compiled, &cc, &inputs).map_err(internal)?;
    let mut max_dev = 0.0f64;
    for (id, want) in forward.outputs() {
        let got = &reduced[id];
        for (a, b) in want.data().iter().zip(got.data().iter()) {
            max_dev = max_dev.max((a - b).abs());
        }
    }
    println!("max deviation {max_dev:e}");
    if max_dev > 1e-12 {
        return Err(CliError::Internal(anyhow!(
            "Hasse reduction deviates from the diagram forward pass by {max_dev:e}"
        )));
    }
    println!("reduction verified");
    Ok(())
}

fn run_features(args: FeaturesArgs) -> Result<(), CliError> {
    let mesh = load_off(&args.off).map_err(validation)?;
    let (v, e, f) = mesh_features(&mesh).map_err(validation)?;
    write_output(
        Path::new(&format!("{}.vertex.txt", args.out_prefix)),
        &io::format_cochain(&v),
    )?;
    write_output(
        Path::new(&format!("{}.edge.txt", args.out_prefix)),
        &io::format_cochain(&e),
    )?;
    write_output(
        Path::new(&format!("{}.face.txt", args.out_prefix)),
        &io::format_cochain(&f),
    )?;
    println!(
        "vertices {} edges {} faces {}",
        v.rows(),
        e.rows(),
        f.rows()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Lift(args) => run_lift(args),
        Command::Matrices(args) => run_matrices(args),
        Command::Pool(args) => run_pool(args),
        Command::Train(args) => run_train(args),
        Command::ReduceHasse(args) => run_reduce_hasse(args),
        Command::Features(args) => run_features(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
