//! The `equipart` command line: reads JSON inputs, runs one of the solvers
//! or verifiers, and writes versioned JSON outputs (plus an optional SVG)
//! into an output directory.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 when a solver stopped at a
//! best-effort answer or a verification failed.

pub mod input;
pub mod output;
pub mod render;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use equipart::envelope::{search_superlinear, upper_envelope};
use equipart::fuks::{check_lemma_divisibility, DEFAULT_CHAIN_CAP};
use equipart::measures::{AreaMeasure, IntervalMeasure};
use equipart::necklace::{split_necklace, verify_split};
use equipart::residuals::{Constraint, ConstraintSet};
use equipart::solver::{
    ham_sandwich_2d, solve_equipartition, solve_iterated, SolveStatus, SolverConfig,
};
use equipart::{ConvexPolygon, Point2};

use input::{InputError, MeasureInput};
use output::*;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BEST_EFFORT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "equipart",
    version,
    about = "Convex equipartitions, necklace splits and their checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Opts {
    /// Residual tolerance (max-norm).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of solver starts.
    #[arg(long, global = true)]
    pub multistart: Option<usize>,
    /// Iterations per start.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Directory for the output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write an SVG picture.
    #[arg(long, global = true)]
    pub render: bool,
    /// Leave the timestamp out of the SVG.
    #[arg(long, global = true)]
    pub reproducible: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Split a convex body into q parts equalizing every constraint.
    Equipart {
        #[arg(long)]
        body: PathBuf,
        /// Measure files, referenced by position from the constraints file.
        #[arg(long = "measure")]
        measures: Vec<PathBuf>,
        /// Ordered constraint list; defaults to one constraint per measure.
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Number of parts.
        #[arg(long)]
        q: Option<usize>,
        /// Split iteratively by these factors, e.g. `2,3`.
        #[arg(long, value_delimiter = ',')]
        factors: Vec<usize>,
    },
    /// Cut [0, 1] so that r parts share every measure equally.
    Necklace {
        #[arg(long = "measure", required = true)]
        measures: Vec<PathBuf>,
        #[arg(long)]
        r: usize,
    },
    /// Upper envelope of a polynomial family.
    Envelope {
        #[arg(long)]
        family: PathBuf,
    },
    /// Search for polynomial families whose envelope switches often.
    EnvelopeSearch {
        /// Degree.
        #[arg(long)]
        n: usize,
        /// Family size.
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Check the equivariant boundary coefficients for q = 2..=qmax.
    FuksVerify {
        #[arg(long)]
        qmax: usize,
        /// Largest q expanded at chain level.
        #[arg(long, default_value_t = DEFAULT_CHAIN_CAP)]
        chain_cap: usize,
    },
    /// A line bisecting two measures on a body.
    HamSandwich {
        #[arg(long)]
        body: PathBuf,
        /// Exactly two area measures.
        #[arg(long = "measure", num_args = 1, required = true)]
        measures: Vec<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] equipart::Error),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let opts = &cli.opts;
    let mut cfg = SolverConfig {
        seed: opts.seed,
        ..SolverConfig::default()
    };
    if let Some(t) = opts.tol {
        cfg.tol = t;
    }
    if let Some(m) = opts.multistart {
        cfg.multistart = m;
    }
    if let Some(m) = opts.max_iter {
        cfg.max_iter = m;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&opts.out).map_err(|source| CliError::Write {
        path: opts.out.clone(),
        source,
    })?;
    match &cli.command {
        Command::Equipart {
            body,
            measures,
            constraints,
            q,
            factors,
        } => cmd_equipart(
            opts,
            &cfg,
            body,
            measures,
            constraints.as_deref(),
            *q,
            factors,
        ),
        Command::Necklace { measures, r } => cmd_necklace(opts, &cfg, measures, *r),
        Command::Envelope { family } => cmd_envelope(opts, family),
        Command::EnvelopeSearch { n, q, trials } => cmd_envelope_search(opts, *n, *q, *trials),
        Command::FuksVerify { qmax, chain_cap } => cmd_fuks_verify(opts, *qmax, *chain_cap),
        Command::HamSandwich { body, measures } => cmd_ham_sandwich(opts, &cfg, body, measures),
    }
}

fn write(opts: &Opts, name: &str, doc: &impl serde::Serialize) -> Result<(), CliError> {
    write_json(&opts.out, name, doc).map_err(|source| CliError::Write {
        path: opts.out.join(name),
        source,
    })
}

fn write_svg(opts: &Opts, name: &str, svg: String) -> Result<(), CliError> {
    let path = opts.out.join(name);
    std::fs::write(&path, svg).map_err(|source| CliError::Write { path, source })
}

fn timestamp(opts: &Opts) -> Option<u64> {
    if opts.reproducible {
        return None;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

fn exit_for(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::BestEffort => EXIT_BEST_EFFORT,
    }
}

fn cmd_equipart(
    opts: &Opts,
    cfg: &SolverConfig,
    body_path: &Path,
    measure_paths: &[PathBuf],
    constraints_path: Option<&Path>,
    q: Option<usize>,
    factors: &[usize],
) -> Result<i32, CliError> {
    let body = input::load_polygon(body_path)?;
    let measures = measure_paths
        .iter()
        .map(|p| input::load_measure(p, Some(&body)))
        .collect::<Result<Vec<_>, _>>()?;
    let set = match constraints_path {
        Some(path) => input::load_constraints(path, &measures)?,
        None => {
            let mut list = Vec::new();
            for (m, path) in measures.iter().zip(measure_paths) {
                list.push(match m {
                    MeasureInput::Area(a) => Constraint::Measure(a.clone()),
                    MeasureInput::Boundary(b) => Constraint::Boundary(b.clone()),
                    MeasureInput::Interval(_) => {
                        return Err(InputError::new(
                            path,
                            "/type",
                            "interval measures only apply to necklaces",
                        )
                        .into())
                    }
                });
            }
            if list.is_empty() {
                return Err(CliError::Usage(
                    "give at least one --measure or a --constraints file".into(),
                ));
            }
            ConstraintSet::new(list)?
        }
    };
    let q = match (q, factors.is_empty()) {
        (Some(q), true) => q,
        (None, false) => factors.iter().product(),
        (Some(q), false) if q == factors.iter().product::<usize>() => q,
        (Some(q), false) => {
            return Err(CliError::Usage(format!(
                "--q {q} does not match the product of --factors {factors:?}"
            )))
        }
        (None, true) => return Err(CliError::Usage("give --q or --factors".into())),
    };

    let (partition, report) = if factors.is_empty() {
        let sol = solve_equipartition(&body, &set, q, cfg)?;
        let partition = PartitionDoc {
            schema_version: SCHEMA_VERSION,
            q,
            body: (&body).into(),
            family: Some((&sol.family).into()),
            nodes: Vec::new(),
            cells: sol.cells.iter().map(PolygonOut::from).collect(),
        };
        let report = ReportDoc {
            schema_version: SCHEMA_VERSION,
            command: "equipart",
            status: sol.report.status,
            settings: cfg.into(),
            solves: vec![SolveEntry {
                level: 0,
                parent: 0,
                seed: cfg.seed,
                report: sol.report,
            }],
            necklace: None,
        };
        (partition, report)
    } else {
        let it = solve_iterated(&body, &set, factors, cfg)?;
        let partition = PartitionDoc {
            schema_version: SCHEMA_VERSION,
            q,
            body: (&body).into(),
            family: None,
            nodes: it
                .nodes
                .iter()
                .map(|n| NodeOut {
                    level: n.level,
                    parent: n.parent,
                    seed: n.seed,
                    family: (&n.family).into(),
                })
                .collect(),
            cells: it.cells.iter().map(PolygonOut::from).collect(),
        };
        let report = ReportDoc {
            schema_version: SCHEMA_VERSION,
            command: "equipart",
            status: it.status,
            settings: cfg.into(),
            solves: it
                .nodes
                .into_iter()
                .map(|n| SolveEntry {
                    level: n.level,
                    parent: n.parent,
                    seed: n.seed,
                    report: n.report,
                })
                .collect(),
            necklace: None,
        };
        (partition, report)
    };
    write(opts, "partition.json", &partition)?;
    write(opts, "report.json", &report)?;
    if opts.render {
        let cells: Vec<ConvexPolygon> = partition
            .cells
            .iter()
            .map(|c| polygon_back(&c.vertices))
            .collect();
        write_svg(
            opts,
            "partition.svg",
            render::partition_svg(&body, &cells, None, timestamp(opts)),
        )?;
    }
    Ok(exit_for(report.status))
}

fn polygon_back(v: &[[f64; 2]]) -> ConvexPolygon {
    ConvexPolygon::new(v.iter().map(|p| Point2::new(p[0], p[1])).collect())
        .unwrap_or(ConvexPolygon::EMPTY)
}

fn cmd_necklace(
    opts: &Opts,
    cfg: &SolverConfig,
    measure_paths: &[PathBuf],
    r: usize,
) -> Result<i32, CliError> {
    let mut measures: Vec<IntervalMeasure> = Vec::new();
    for path in measure_paths {
        match input::load_measure(path, None)? {
            MeasureInput::Interval(m) => measures.push(m),
            _ => {
                return Err(
                    InputError::new(path, "/type", "necklaces need interval measures").into(),
                )
            }
        }
    }
    let out = split_necklace(&measures, r, cfg)?;
    let (verified, masses) = verify_split(&out.split, &measures, r, cfg.tol);
    write(
        opts,
        "split.json",
        &SplitDoc {
            schema_version: SCHEMA_VERSION,
            cuts: out.split.cuts.clone(),
            owners: out.split.owners.clone(),
        },
    )?;
    let status = if verified {
        out.report.status
    } else {
        SolveStatus::BestEffort
    };
    write(
        opts,
        "report.json",
        &ReportDoc {
            schema_version: SCHEMA_VERSION,
            command: "necklace",
            status,
            settings: cfg.into(),
            solves: vec![SolveEntry {
                level: 0,
                parent: 0,
                seed: cfg.seed,
                report: out.report.clone(),
            }],
            necklace: Some(NecklaceExtras {
                r,
                measures: measures.len(),
                segment_bound: out.segment_bound,
                segment_count: out.split.segment_count(),
                verified,
                masses,
            }),
        },
    )?;
    Ok(exit_for(status))
}

fn cmd_envelope(opts: &Opts, family: &Path) -> Result<i32, CliError> {
    let (polys, lo, hi) = input::load_poly_family(family)?;
    let profile =
        upper_envelope(&polys, lo, hi).map_err(|e| InputError::new(family, "/polys", e))?;
    write(opts, "profile.json", &ProfileDoc::from(&profile))?;
    Ok(EXIT_OK)
}

fn cmd_envelope_search(opts: &Opts, n: usize, q: usize, trials: usize) -> Result<i32, CliError> {
    let outcome = search_superlinear(n, q, trials, opts.seed)?;
    let doc = SearchDoc::new(&outcome, opts.seed);
    write(opts, "search.json", &doc)?;
    write(opts, "witness.json", &doc.witness)?;
    Ok(EXIT_OK)
}

fn cmd_fuks_verify(opts: &Opts, qmax: usize, chain_cap: usize) -> Result<i32, CliError> {
    let rows = (2..=qmax)
        .map(|q| check_lemma_divisibility(q, chain_cap))
        .collect::<Result<Vec<_>, _>>()?;
    let all_pass = rows.iter().all(|r| r.passes);
    write(
        opts,
        "report.json",
        &FuksDoc {
            schema_version: SCHEMA_VERSION,
            command: "fuks-verify",
            qmax,
            chain_cap,
            all_pass,
            rows,
        },
    )?;
    Ok(if all_pass { EXIT_OK } else { EXIT_BEST_EFFORT })
}

fn cmd_ham_sandwich(
    opts: &Opts,
    cfg: &SolverConfig,
    body_path: &Path,
    measure_paths: &[PathBuf],
) -> Result<i32, CliError> {
    if measure_paths.len() != 2 {
        return Err(CliError::Usage(format!(
            "ham-sandwich needs exactly two --measure files, got {}",
            measure_paths.len()
        )));
    }
    let body = input::load_polygon(body_path)?;
    let mut area: Vec<AreaMeasure> = Vec::new();
    for path in measure_paths {
        match input::load_measure(path, Some(&body))? {
            MeasureInput::Area(m) => area.push(m),
            _ => return Err(InputError::new(path, "/type", "expected an area measure").into()),
        }
    }
    let cut = ham_sandwich_2d(&body, &area[0], &area[1], cfg)?;
    write(
        opts,
        "cut.json",
        &CutDoc {
            schema_version: SCHEMA_VERSION,
            normal: [cut.normal.x, cut.normal.y],
            offset: cut.offset,
            masses: cut.masses,
        },
    )?;
    write(
        opts,
        "report.json",
        &ReportDoc {
            schema_version: SCHEMA_VERSION,
            command: "ham-sandwich",
            status: cut.report.status,
            settings: cfg.into(),
            solves: vec![SolveEntry {
                level: 0,
                parent: 0,
                seed: cfg.seed,
                report: cut.report.clone(),
            }],
            necklace: None,
        },
    )?;
    if opts.render {
        let side = |n: Point2, c: f64| equipart::geometry::halfplane_clip(&body, n, c);
        let cells = [
            side(cut.normal, -cut.offset),
            side(cut.normal * -1.0, cut.offset),
        ];
        let chord = chord(&cells[0], cut.normal, cut.offset);
        write_svg(
            opts,
            "partition.svg",
            render::partition_svg(&body, &cells, chord, timestamp(opts)),
        )?;
    }
    Ok(exit_for(cut.report.status))
}

/// The two vertices of `cell` farthest apart on the line `n . x = c`.
fn chord(cell: &ConvexPolygon, n: Point2, c: f64) -> Option<(Point2, Point2)> {
    let on: Vec<Point2> = cell
        .vertices()
        .iter()
        .copied()
        .filter(|v| (n.dot(*v) - c).abs() < 1e-9)
        .collect();
    let t = Point2::new(-n.y, n.x);
    let lo = on
        .iter()
        .copied()
        .min_by(|a, b| t.dot(*a).total_cmp(&t.dot(*b)))?;
    let hi = on
        .iter()
        .copied()
        .max_by(|a, b| t.dot(*a).total_cmp(&t.dot(*b)))?;
    Some((lo, hi))
}
