//! `foxcolor`: command-line access to the coloring solvers, the link family
//! generators, the color-raising moves and the experiment suites.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a checked
//! statement fails (a suite failure, an invalid coloring, an obstruction).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use foxcolor::coloring::{
    determinant, enumerate_nontrivial, kh_property, min_palette_coloring, mincol_on_diagram, palette_report,
    solve_colorings, Coloring, ColoringError, DEFAULT_CAP,
};
use foxcolor::diagram::{braid_closure, parse_braid, parse_diagram, Diagram};
use foxcolor::experiments::{run_suite, SuiteBounds};
use foxcolor::families::{
    parse_rational, rational_snf, search_full_palette, snf_bridge_coloring, torus_diagram, torus_theorem5_coloring,
    SnfDescriptor, TorusFamily, TorusParams,
};
use foxcolor::moves::{realize_spectrum, MoveError};

#[derive(Debug, Error)]
enum CliError {
    /// Bad arguments or unreadable input.
    #[error("{0}")]
    Usage(String),
    /// A checked statement turned out false.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = Result<Outcome, CliError>;

/// What a command prints, what it writes with `--json`, and whether the
/// result counts as a failure.
struct Outcome {
    text: String,
    json: Value,
    failed: bool,
}

impl Outcome {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Outcome { text: text.into(), json, failed: false }
    }
}

#[derive(Parser, Debug)]
#[command(name = "foxcolor", version, about = "Fox colorings of link diagrams")]
struct Cli {
    /// Write a JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Largest number of colorings any enumeration may walk.
    #[arg(long, global = true, env = "FOXCOLOR_CAP", value_name = "COUNT")]
    cap: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

/// Exactly one way of naming a diagram.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct Input {
    /// Braid word, e.g. "1 1 1" or "strands=4 3 2 1".
    #[arg(long)]
    braid: Option<String>,
    /// Diagram file in the crossing-triple format.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Schubert normal form, e.g. "5/2".
    #[arg(long)]
    snf: Option<String>,
    /// Torus family closure, e.g. "1 2 3" (family, k, l).
    #[arg(long)]
    torus: Option<String>,
}

/// A coloring given on the command line.
#[derive(Args, Debug, Clone)]
struct GivenColoring {
    /// Colors of arcs 0, 1, ... separated by spaces.
    #[arg(long)]
    colors: Option<String>,
    /// Coloring JSON file, {"modulus": n, "colors": {"0": c0, ...}}.
    #[arg(long, conflicts_with = "colors")]
    coloring: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a diagram and print it in normalized form.
    Parse(Input),
    /// Determinant of a non-split diagram.
    Det(Input),
    /// Number of colorings modulo n.
    ColorCount {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
    },
    /// List colorings modulo n (nontrivial ones unless --all).
    Enumerate {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long)]
        all: bool,
    },
    /// Fewest colors of a nontrivial coloring of this diagram.
    Mincol {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
    },
    /// Palette and color multiplicities of a coloring.
    Palette {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
        #[command(flatten)]
        given: GivenColoring,
    },
    /// Whether a coloring gives distinct arcs distinct colors; without a
    /// coloring, searches for one that does.
    Kh {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
        #[command(flatten)]
        given: GivenColoring,
    },
    /// Schubert normal form b(p, q), optionally colored from its bridges.
    Snf {
        /// "p/q"
        descriptor: String,
        /// Colors of the left and right bridge.
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        color: Option<Vec<u64>>,
        /// Modulus of the bridge coloring (default p).
        #[arg(long = "mod")]
        modulus: Option<u64>,
    },
    /// Torus family closure with its prescribed coloring.
    Torus {
        /// 1: (σ_{2l-1}⋯σ_1)^{2k+1}, 2: (σ_{2k}⋯σ_1)^{2l}, 3: (σ_{2k-1}⋯σ_1)^{2l}
        family: TorusFamily,
        k: u64,
        l: u64,
    },
    /// Raise a coloring to the full palette by type-II moves.
    Spectrum {
        #[command(flatten)]
        input: Input,
        /// Modulus (default: the normal form's p).
        #[arg(long = "mod")]
        modulus: Option<u64>,
        #[command(flatten)]
        given: GivenColoring,
    },
    /// Look for a coloring that uses every residue.
    SearchFull {
        #[command(flatten)]
        input: Input,
        #[arg(long = "mod")]
        modulus: u64,
    },
    /// Run a named experiment suite.
    Suite {
        name: String,
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long)]
        lmax: Option<u64>,
        #[arg(long)]
        nmax: Option<u64>,
        #[arg(long)]
        max_arcs: Option<usize>,
        #[arg(long)]
        moves: Option<usize>,
    },
}

/// A loaded diagram and what it was generated from.
struct Loaded {
    diagram: Diagram,
    snf: Option<SnfDescriptor>,
}

fn load(input: &Input) -> Result<Loaded, CliError> {
    if let Some(text) = &input.braid {
        let w = parse_braid(text).map_err(CliError::usage)?;
        return Ok(Loaded { diagram: braid_closure(&w).map_err(CliError::usage)?, snf: None });
    }
    if let Some(path) = &input.file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let d = parse_diagram(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok(Loaded { diagram: d, snf: None });
    }
    if let Some(text) = &input.snf {
        let (p, q) = parse_rational(text).map_err(CliError::usage)?;
        let (d, s) = rational_snf(p, q).map_err(CliError::usage)?;
        return Ok(Loaded { diagram: d, snf: Some(s) });
    }
    if let Some(text) = &input.torus {
        let t: TorusParams = text.parse().map_err(CliError::usage)?;
        return Ok(Loaded { diagram: torus_diagram(&t), snf: None });
    }
    Err(CliError::Usage("one of --braid, --file, --snf, --torus is required".into()))
}

fn given_coloring(d: &Diagram, n: u64, given: &GivenColoring) -> Result<Option<Coloring>, CliError> {
    let c = if let Some(text) = &given.colors {
        let colors = text
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| CliError::Usage(format!("bad color {t:?}"))))
            .collect::<Result<Vec<u64>, _>>()?;
        Coloring::new(n, colors).map_err(CliError::usage)?
    } else if let Some(path) = &given.coloring {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let c = Coloring::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if c.modulus() != n {
            return Err(CliError::Usage(format!("coloring is mod {}, --mod is {n}", c.modulus())));
        }
        c
    } else {
        return Ok(None);
    };
    match c.check(d) {
        Ok(()) => Ok(Some(c)),
        Err(e @ ColoringError::WrongLength { .. }) => Err(CliError::usage(e)),
        Err(e) => Err(CliError::Failure(format!("not a valid coloring: {e}"))),
    }
}

fn colors_line(c: &Coloring) -> String {
    c.colors().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn run(cli: &Cli) -> CliResult {
    let cap = cli.cap.unwrap_or(DEFAULT_CAP);
    match &cli.command {
        Command::Parse(input) => {
            let d = load(input)?.diagram;
            let faces = if d.rotation().is_some() && d.num_crossings() > 0 {
                Some(d.validate_embedding().map_err(CliError::usage)?)
            } else {
                None
            };
            let mut text = d.to_text();
            text.push_str(&format!(
                "# {} arcs, {} crossings, {} components{}",
                d.num_arcs(),
                d.num_crossings(),
                d.num_components(),
                faces.map(|f| format!(", {f} faces")).unwrap_or_default()
            ));
            let json = json!({
                "arcs": d.num_arcs(),
                "crossings": d.num_crossings(),
                "components": d.num_components(),
                "faces": faces,
                "diagram": d.to_text(),
            });
            Ok(Outcome::ok(text, json))
        }
        Command::Det(input) => {
            let d = load(input)?.diagram;
            let det = determinant(&d).map_err(CliError::usage)?;
            Ok(Outcome::ok(det.to_string(), json!({ "determinant": det.to_string() })))
        }
        Command::ColorCount { input, modulus } => {
            let d = load(input)?.diagram;
            let space = solve_colorings(&d, *modulus).map_err(CliError::usage)?;
            let json = json!({
                "modulus": modulus,
                "count": space.total_count.to_string(),
                "rank": space.rank,
                "nontrivial": space.has_nontrivial(),
            });
            Ok(Outcome::ok(space.total_count.to_string(), json))
        }
        Command::Enumerate { input, modulus, all } => {
            let d = load(input)?.diagram;
            let colorings: Vec<Coloring> = if *all {
                let space = solve_colorings(&d, *modulus).map_err(CliError::usage)?;
                space.colorings(cap).map_err(CliError::usage)?.collect()
            } else {
                enumerate_nontrivial(&d, *modulus, cap).map_err(CliError::usage)?.collect()
            };
            let text = colorings.iter().map(colors_line).collect::<Vec<_>>().join("\n");
            Ok(Outcome::ok(text, to_value(&colorings)))
        }
        Command::Mincol { input, modulus } => {
            let d = load(input)?.diagram;
            match mincol_on_diagram(&d, *modulus, cap) {
                Ok(m) => Ok(Outcome::ok(m.to_string(), json!({ "modulus": modulus, "mincol": m }))),
                Err(e @ ColoringError::TriviallyColorableOnly { .. }) => Ok(Outcome {
                    text: e.to_string(),
                    json: json!({ "modulus": modulus, "mincol": null }),
                    failed: true,
                }),
                Err(e) => Err(CliError::usage(e)),
            }
        }
        Command::Palette { input, modulus, given } => {
            let d = load(input)?.diagram;
            let c = given_coloring(&d, *modulus, given)?
                .ok_or_else(|| CliError::Usage("palette needs --colors or --coloring".into()))?;
            let r = palette_report(&c);
            let hist = r.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ");
            let text = format!("palette {:?}\nsize {}\nhistogram {hist}", r.palette, r.size);
            Ok(Outcome::ok(text, to_value(&r)))
        }
        Command::Kh { input, modulus, given } => {
            let d = load(input)?.diagram;
            if let Some(c) = given_coloring(&d, *modulus, given)? {
                let kh = kh_property(&d, &c);
                return Ok(Outcome::ok(kh.to_string(), json!({ "kh": kh })));
            }
            let found = enumerate_nontrivial(&d, *modulus, cap).map_err(CliError::usage)?.find(|c| kh_property(&d, c));
            let text = match &found {
                Some(c) => format!("true\n{}", colors_line(c)),
                None => "false".into(),
            };
            Ok(Outcome::ok(text, json!({ "kh": found.is_some(), "coloring": found })))
        }
        Command::Snf { descriptor, color, modulus } => {
            let (p, q) = parse_rational(descriptor).map_err(CliError::usage)?;
            let (d, s) = rational_snf(p, q).map_err(CliError::usage)?;
            let mut text = d.to_text();
            text.push_str(&format!("# bridges: left arc {}, right arc {}", s.bridge_left, s.bridge_right));
            let mut json = json!({ "descriptor": to_value(&s), "diagram": d.to_text() });
            if let Some(pair) = color {
                let n = modulus.unwrap_or(p);
                let c = snf_bridge_coloring(&s, &d, pair[0], pair[1], n).map_err(CliError::usage)?;
                text.push_str(&format!("\ncoloring {}\npalette size {}", colors_line(&c), c.palette_size()));
                json["coloring"] = to_value(&c);
                json["palette"] = to_value(&palette_report(&c));
            }
            Ok(Outcome::ok(text, json))
        }
        Command::Torus { family, k, l } => {
            let t = TorusParams::new(*family, *k, *l).map_err(CliError::usage)?;
            let d = torus_diagram(&t);
            let det = determinant(&d).map_err(CliError::usage)?;
            let (strands, power) = t.shape();
            let mut text = format!("braid {}\n{} strands, power {power}, determinant {det}", t.word(), strands);
            let mut json = json!({ "braid": t.word().to_string(), "determinant": det.to_string() });
            match torus_theorem5_coloring(&t) {
                Ok(c) => {
                    let r = palette_report(&c);
                    let hist = r.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ");
                    text.push_str(&format!("\ncoloring mod {}: {}\nhistogram {hist}", t.modulus(), colors_line(&c)));
                    json["coloring"] = to_value(&c);
                    json["palette"] = to_value(&r);
                }
                Err(_) => text.push_str(&format!("\nno prescribed coloring; try search-full --mod {}", t.modulus())),
            }
            Ok(Outcome::ok(text, json))
        }
        Command::Spectrum { input, modulus, given } => {
            let loaded = load(input)?;
            let d = &loaded.diagram;
            let n = modulus
                .or(loaded.snf.map(|s| s.p))
                .ok_or_else(|| CliError::Usage("spectrum needs --mod unless the diagram is --snf".into()))?;
            let start = match (given_coloring(d, n, given)?, &loaded.snf) {
                (Some(c), _) => c,
                (None, Some(s)) => snf_bridge_coloring(s, d, 0, 1, n).map_err(CliError::usage)?,
                (None, None) => min_palette_coloring(d, n, cap)
                    .map_err(CliError::usage)?
                    .ok_or_else(|| CliError::Failure(format!("only trivial colorings mod {n}")))?,
            };
            match realize_spectrum(d, &start, n) {
                Ok(trace) => {
                    let sizes = trace.sizes().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
                    let mut text = format!("sizes {sizes}");
                    for r in &trace.records {
                        text.push_str(&format!(
                            "\n{} colors, {} crossings: {}",
                            r.palette_size,
                            r.diagram.num_crossings(),
                            colors_line(&r.coloring)
                        ));
                    }
                    let json: Value = serde_json::from_str(&trace.to_json()).expect("trace JSON");
                    Ok(Outcome::ok(text, json))
                }
                Err(e @ (MoveError::Obstructed { .. } | MoveError::NotInvertible { .. })) => Ok(Outcome {
                    text: format!("obstructed: {e}"),
                    json: json!({ "obstruction": e.to_string() }),
                    failed: true,
                }),
                Err(e) => Err(CliError::usage(e)),
            }
        }
        Command::SearchFull { input, modulus } => {
            let d = load(input)?.diagram;
            let found = search_full_palette(&d, *modulus, cap).map_err(CliError::usage)?;
            let text = match &found {
                Some(c) => format!("found\n{}", colors_line(c)),
                None => format!("not found: no coloring mod {modulus} uses every color"),
            };
            Ok(Outcome::ok(text, json!({ "modulus": modulus, "coloring": found })))
        }
        Command::Suite { name, pmax, kmax, lmax, nmax, max_arcs, moves } => {
            let d = SuiteBounds::default();
            let bounds = SuiteBounds {
                pmax: pmax.unwrap_or(d.pmax),
                kmax: kmax.unwrap_or(d.kmax),
                lmax: lmax.unwrap_or(d.lmax),
                nmax: nmax.unwrap_or(d.nmax),
                max_arcs: max_arcs.unwrap_or(d.max_arcs),
                moves: moves.unwrap_or(d.moves),
                cap,
            };
            let report = run_suite(name, &bounds).map_err(CliError::usage)?;
            let json: Value = serde_json::from_str(&report.to_json()).expect("report JSON");
            Ok(Outcome { text: report.to_string(), json, failed: !report.passed() })
        }
    }
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON value");
    fs::write(path, text + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = run(&cli).and_then(|o| {
        if let Some(path) = &cli.json {
            write_json(path, &o.json)?;
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            if !o.text.is_empty() {
                // a closed pipe (e.g. `| head`) is not an error worth reporting
                let _ = writeln!(io::stdout().lock(), "{}", o.text);
            }
            if o.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(2)
        }
    }
}
