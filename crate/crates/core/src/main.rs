use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use sassur::decompose::{self, AssurDecomposition, Block, Sampling};
use sassur::extend::{self, ExtensionSpec};
use sassur::graphs::{self, GainGraph, EXHAUSTIVE_BOUND};
use sassur::io::{self, Framework};
use sassur::orbit::{self, Configuration};
use sassur::{drivers, orient, Error};

#[derive(Parser)]
#[command(name = "sassur", version, about = "Symmetry-adapted Assur decompositions of pinned frameworks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = orbit::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, default_value_t = orbit::DEFAULT_TRIALS)]
    trials: usize,
    /// Write a DOT rendering here.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Counting conditions and the pinned S-isostatic rank test.
    Check { file: PathBuf },
    /// An S-directed orientation.
    Orient { file: PathBuf },
    /// The S-Assur decomposition and its block graph.
    Decompose { file: PathBuf },
    /// Remove one edge orbit and report which vertices move.
    Drive {
        file: PathBuf,
        #[arg(long)]
        edge: String,
    },
    /// Lift the decomposition to the covering graph.
    Lift { file: PathBuf },
    /// Decomposition under the subgroup with the given elements.
    Subgroup {
        file: PathBuf,
        /// Comma-separated element names; the subgroup they generate is used.
        #[arg(long, value_delimiter = ',')]
        elements: Vec<String>,
    },
    /// Apply an extension given as a JSON file and print the new framework.
    Extend {
        file: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// The pinned orbit matrix as CSV.
    Matrix { file: PathBuf },
}

struct Outcome {
    report: Value,
    /// Printed instead of the JSON report when set.
    text: Option<String>,
    dot: Option<String>,
    negative: bool,
}

impl Outcome {
    fn json(report: Value) -> Outcome {
        Outcome { report, text: None, dot: None, negative: false }
    }
}

fn sampling(o: &Opts) -> Sampling {
    Sampling { trials: o.trials, seed: o.seed, tol: o.tol }
}

fn configuration(f: &Framework, o: &Opts) -> sassur::Result<Configuration> {
    match &f.positions {
        Some(c) => Ok(c.clone()),
        None => orbit::sample_regular_configuration(&f.graph, &f.sym, o.seed),
    }
}

fn positions_json(gg: &GainGraph, cfg: &Configuration) -> Value {
    gg.vertices
        .iter()
        .zip(&cfg.positions)
        .map(|(v, p)| (v.name.clone(), json!(p.iter().collect::<Vec<_>>())))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn decomposition_json(gg: &GainGraph, dec: &AssurDecomposition) -> Value {
    let name = |b: &Block| match b {
        Block::Ground => "Z".to_string(),
        Block::Component(i) => dec.components[*i].name.clone(),
    };
    json!({
        "components": dec.components.iter().map(|c| {
            let mut vs: Vec<&str> = c.vertices.iter().map(|&v| gg.vertices[v].name.as_str()).collect();
            vs.sort_unstable();
            json!({"name": c.name, "vertices": vs})
        }).collect::<Vec<_>>(),
        "block_edges": dec.block_edges.iter().map(|(a, b)| [name(a), name(b)]).collect::<Vec<_>>(),
        "linear_extension": dec.linear_extension.iter().map(|&i| dec.components[i].name.clone()).collect::<Vec<_>>(),
    })
}

fn orientation_json(gg: &GainGraph, o: &orient::Orientation) -> Value {
    (0..gg.edges.len())
        .map(|e| (gg.edges[e].name.clone(), json!(gg.vertices[o.tail(gg, e)].name)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn check(f: &Framework, o: &Opts) -> sassur::Result<Outcome> {
    let iso = orbit::is_pinned_s_isostatic(&f.graph, &f.sym, o.trials, o.seed, o.tol)?;
    let counts = match graphs::pinned_isostatic_counts(&f.graph, &f.sym, EXHAUSTIVE_BOUND) {
        Ok(v) => json!({"mode": "exhaustive", "satisfied": v.satisfied, "reason": v.reason, "witness": v.witness}),
        Err(Error::TooLarge { .. }) => json!({"mode": "numeric", "satisfied": iso.isostatic}),
        Err(e) => return Err(e),
    };
    let cg = graphs::cover(&f.graph, &f.sym.grp)?;
    let plain = cg.graph.as_gain_graph(&sassur::group::Symmetry::trivial(f.sym.dim()).grp)?;
    let plain_iso = if f.sym.order() == 1 {
        iso.isostatic
    } else {
        let trivial = sassur::group::Symmetry::trivial(f.sym.dim());
        orbit::is_pinned_s_isostatic(&plain, &trivial, o.trials, o.seed, o.tol)?.isostatic
    };
    let mut out = Outcome::json(json!({
        "group": f.sym.grp.label(),
        "edges": iso.rows,
        "columns": iso.cols,
        "ranks": iso.ranks,
        "pinned_s_isostatic": iso.isostatic,
        "counts": counts,
        "covering": {"vertices": cg.graph.inner_count(), "edges": cg.graph.edges.len(), "pinned_isostatic": plain_iso},
    }));
    out.negative = !iso.isostatic;
    Ok(out)
}

fn run(cli: &Cli) -> sassur::Result<Outcome> {
    let o = &cli.opts;
    match &cli.command {
        Command::Check { file } => check(&io::parse(file)?, o),
        Command::Orient { file } => {
            let f = io::parse(file)?;
            let caps = f.graph.columns(&f.sym)?;
            let or = orient::s_directed_orientation(&f.graph, &caps)?;
            let mut out = Outcome::json(json!({"orientation": orientation_json(&f.graph, &or)}));
            out.dot = Some(io::gain_graph_dot(&f.graph, &f.sym, Some(&or)));
            Ok(out)
        }
        Command::Decompose { file } => {
            let f = io::parse(file)?;
            let cfg = configuration(&f, o)?;
            let (or, dec) = decompose::decompose(&f.graph, &f.sym)?;
            let m = orbit::build_orbit_matrix(&f.graph, &f.sym, &cfg)?;
            let bt = decompose::block_triangular_form(&m, &dec)?;
            let mut report = decomposition_json(&f.graph, &dec);
            report["orientation"] = orientation_json(&f.graph, &or);
            report["block_sizes"] = json!(bt.block_sizes);
            report["max_upper"] = json!(bt.max_upper);
            report["s_assur"] = json!(dec.len() == 1);
            report["positions"] = positions_json(&f.graph, &cfg);
            let mut out = Outcome::json(report);
            out.dot = Some(io::block_graph_dot(&f.graph, &dec));
            Ok(out)
        }
        Command::Drive { file, edge } => {
            let f = io::parse(file)?;
            let e = f.graph.edge(edge).ok_or_else(|| Error::Parse(format!("unknown edge `{edge}`")))?;
            let cfg = configuration(&f, o)?;
            let r = drivers::drive(&f.graph, &f.sym, &cfg, e, o.tol)?;
            let majority = drivers::moving_by_majority(&f.graph, &f.sym, e, sampling(o))?;
            let nullity = drivers::covering_driver_nullity(&f.graph, &f.sym, &cfg, e, o.tol)?;
            let mut report = serde_json::to_value(&r).expect("reports serialize");
            report["moving_by_majority"] = json!(f
                .graph
                .inner()
                .into_iter()
                .filter(|&v| majority[v])
                .map(|v| f.graph.vertices[v].name.clone())
                .collect::<Vec<_>>());
            report["covering_nullity"] = json!(nullity);
            report["positions"] = positions_json(&f.graph, &cfg);
            Ok(Outcome::json(report))
        }
        Command::Lift { file } => {
            let f = io::parse(file)?;
            let (or, dec) = decompose::decompose(&f.graph, &f.sym)?;
            let lifted = decompose::lift_decomposition(&f.graph, &f.sym, &or, &dec)?;
            let projected = decompose::project_decomposition(&f.graph, &lifted)?;
            let names = &lifted.cover.graph.names;
            Ok(Outcome::json(json!({
                "cover_components": lifted.cover_components.iter().zip(&lifted.parent).map(|(c, &p)| json!({
                    "vertices": c.iter().map(|&v| names[v].clone()).collect::<Vec<_>>(),
                    "over": dec.components[p].name,
                })).collect::<Vec<_>>(),
                "predicted_lifts": dec.components.iter().zip(&lifted.predicted)
                    .map(|(c, &k)| (c.name.clone(), json!(k))).collect::<serde_json::Map<_, _>>(),
                "round_trip": projected == dec,
            })))
        }
        Command::Subgroup { file, elements } => {
            let f = io::parse(file)?;
            let mut set = vec![sassur::group::IDENTITY];
            for n in elements {
                set.push(f.sym.grp.element(n)?);
            }
            let set = f.sym.grp.generated(&set);
            let sd = decompose::subgroup_decomposition(&f.graph, &f.sym, &set)?;
            let mut report = decomposition_json(&sd.gain_graph, &sd.decomposition);
            report["group"] = json!(sd.sym.grp.label());
            report["projection"] = sd
                .decomposition
                .components
                .iter()
                .zip(&sd.projection)
                .map(|(c, &p)| (c.name.clone(), json!(sd.parent_decomposition.components[p].name)))
                .collect::<serde_json::Map<_, _>>()
                .into();
            let mut out = Outcome::json(report);
            out.dot = Some(io::block_graph_dot(&sd.gain_graph, &sd.decomposition));
            Ok(out)
        }
        Command::Extend { file, spec } => {
            let f = io::parse(file)?;
            let text = std::fs::read_to_string(spec)?;
            let spec: ExtensionSpec = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let (graph, classification) = match &spec {
                ExtensionSpec::One { .. } => {
                    let (or, dec) = decompose::decompose(&f.graph, &f.sym)?;
                    let (c, g) = extend::classify_one_extension(&f.graph, &f.sym, &or, &dec, &spec)?;
                    (g, Some(c))
                }
                _ => (extend::apply_extension(&f.graph, &f.sym, &spec)?.0, None),
            };
            let new = Framework { graph, positions: None, orientation: None, ..f };
            let mut out = Outcome::json(json!({
                "framework": serde_json::to_value(new.to_file()).expect("framework files serialize"),
                "classification": classification,
            }));
            out.text = Some(new.to_json() + "\n");
            Ok(out)
        }
        Command::Matrix { file } => {
            let f = io::parse(file)?;
            let cfg = configuration(&f, o)?;
            let m = orbit::build_orbit_matrix(&f.graph, &f.sym, &cfg)?;
            let mut out = Outcome::json(json!({
                "rank": orbit::rank(&m, o.tol),
                "rows": m.matrix.nrows(),
                "cols": m.matrix.ncols(),
                "positions": positions_json(&f.graph, &cfg),
            }));
            out.text = Some(io::matrix_csv(&f.graph, &m));
            Ok(out)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotIsostatic | Error::NotAssur | Error::NoOrientation { .. } => 1,
        Error::SingularMatrix | Error::VerificationFailed { .. } | Error::NonSquareBlock { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let pretty = serde_json::to_string_pretty(&out.report).expect("reports serialize");
    let body = match &out.text {
        Some(t) => t.clone(),
        None => format!("{pretty}\n"),
    };
    // a closed pipe on stdout is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
    let written = [(cli.opts.json.as_ref(), Some(pretty + "\n")), (cli.opts.dot.as_ref(), out.dot)];
    for (path, body) in written {
        if let (Some(path), Some(body)) = (path, body) {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(if out.negative { 1 } else { 0 })
}
