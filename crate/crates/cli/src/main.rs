use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use schreier_core::corpus::{self, CorpusError, CoverPair};
use schreier_core::cover::{ends_estimate, qi_certificate, x_cover_find, CoverError, CoveringMap};
use schreier_core::factorize::{circulant, schreierize, FactorError};
use schreier_core::isoauto::{
    is_length_transitive, is_transitive, is_x_transitive, orbit_partition, rooted_iso, rooted_x_iso, x_orbits, IsoError,
    IsoVerdict, XIsoVerdict,
};
use schreier_core::lengthiso::{alpha_from_beta, gamma_extend, lemma_properties_check, LengthIsoError};
use schreier_core::schreier::{reconstruct_subgroup, SchreierError};
use schreier_core::{GraphError, LabeledGraph, PlainGraph};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown instance {0:?}")]
    UnknownInstance(String),
    #[error("graph has {0} vertices, above --max-vertices {1}")]
    TooLarge(usize, usize),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Schreier(#[from] SchreierError),
    #[error(transparent)]
    LengthIso(#[from] LengthIsoError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

type Result<T> = std::result::Result<T, CliError>;

/// Build, analyze and compare Schreier graphs over free products of Z and Z/2Z.
#[derive(Parser)]
#[command(name = "schreier", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Window width for built-in windowed instances.
    #[arg(long, global = true, default_value_t = 16)]
    window: usize,
    /// Radius for ball-limited computations.
    #[arg(long, global = true, default_value_t = 4)]
    radius: usize,
    /// Reject input graphs with more vertices than this.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_vertices: usize,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print a built-in instance as graph JSON.
    Build { instance: String },
    /// Transitivity and orbit report for a graph.
    Analyze { input: String },
    /// Rooted isomorphism tests between two graphs, with the induced length-isomorphism.
    Iso { first: String, second: String },
    /// Find an X-covering and its quasi-isometry constants.
    Cover {
        /// Covering graph, or a built-in pair name (fig3, fig4, fig5) when TARGET is omitted.
        source: String,
        target: Option<String>,
    },
    /// Estimate the number of ends of a built-in windowed instance.
    Ends { instance: String },
    /// Label a regular plain graph as a Schreier graph.
    Schreierize { input: String },
    /// Convert a graph to DOT or JSON.
    Export {
        input: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

const INSTANCES: &str = "petersen, fig2, fig3, fig3-base, fig4, fig4-base, fig5, fig5-base, line, an:N, circulant:N:S1,S2,...";

fn read_input(src: &str) -> Result<String> {
    let mut s = String::new();
    if src == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io("<stdin>".into(), e))?;
    } else {
        s = std::fs::read_to_string(Path::new(src)).map_err(|e| CliError::Io(src.into(), e))?;
    }
    Ok(s)
}

fn pair(name: &str, w: usize) -> Result<Option<CoverPair>> {
    Ok(Some(match name {
        "fig3" => corpus::fig3_pair(w)?,
        "fig4" => corpus::fig4_pair(w)?,
        "fig5" => corpus::fig5_pair(w)?,
        _ => return Ok(None),
    }))
}

fn instance(name: &str, w: usize) -> Result<LabeledGraph> {
    if let Some(p) = pair(name, w)? {
        return Ok(p.cover.graph);
    }
    if let Some(base) = name.strip_suffix("-base") {
        if let Some(p) = pair(base, w)? {
            return Ok(p.base.graph);
        }
    }
    if let Some(n) = name.strip_prefix("an:") {
        let n: usize = n.parse().map_err(|_| CliError::UnknownInstance(name.into()))?;
        let (_, g) = if n % 2 == 1 { corpus::an_hn(n)? } else { corpus::an_hn_even(n)? };
        return Ok(g);
    }
    if let Some(rest) = name.strip_prefix("circulant:") {
        let bad = || CliError::UnknownInstance(name.into());
        let (n, steps) = rest.split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        let steps: Vec<usize> = steps.split(',').map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if n == 0 || steps.iter().any(|&s| s == 0 || s >= n) {
            return Err(bad());
        }
        return Ok(circulant(n, &steps).to_graph().with_root(0));
    }
    Ok(match name {
        "petersen" => corpus::petersen_schreier().graph,
        "fig2" => corpus::fig2_window(w)?.graph,
        "line" => corpus::line_window(w)?.graph,
        _ => return Err(CliError::UnknownInstance(name.into())),
    })
}

impl Cli {
    /// A graph from a JSON file, `-` for stdin, or `@instance` for a built-in.
    fn graph(&self, src: &str) -> Result<LabeledGraph> {
        let g = match src.strip_prefix('@') {
            Some(name) => instance(name, self.window)?,
            None => LabeledGraph::from_json_str(&read_input(src)?)?,
        };
        if g.num_vertices() > self.max_vertices {
            return Err(CliError::TooLarge(g.num_vertices(), self.max_vertices));
        }
        Ok(g)
    }

    fn run(&self) -> Result<Vec<Value>> {
        match &self.command {
            Command::Build { instance: name } => Ok(vec![json!(instance(name, self.window)?.to_json())]),
            Command::Analyze { input } => self.analyze(input),
            Command::Iso { first, second } => self.iso(first, second),
            Command::Cover { source, target } => self.cover(source, target.as_deref()),
            Command::Ends { instance: name } => self.ends(name),
            Command::Schreierize { input } => {
                let p: PlainGraph = serde_json::from_str(&read_input(input)?)?;
                let p = PlainGraph::new(p.vertices, p.edges)?;
                if p.vertices > self.max_vertices {
                    return Err(CliError::TooLarge(p.vertices, self.max_vertices));
                }
                match schreierize(&p) {
                    Ok(g) => Ok(vec![json!({ "schreier": true, "graph": g.to_json() })]),
                    Err(e @ (FactorError::NotSchreier | FactorError::NotRegular | FactorError::DegreeZero)) => {
                        Ok(vec![json!({ "schreier": false, "reason": e.to_string() })])
                    }
                    Err(e) => Err(e.into()),
                }
            }
            Command::Export { input, format } => {
                let g = self.graph(input)?;
                Ok(vec![match format {
                    Format::Json => json!(g.to_json()),
                    Format::Dot => Value::String(g.to_dot()),
                }])
            }
        }
    }

    fn analyze(&self, input: &str) -> Result<Vec<Value>> {
        let g = self.graph(input)?;
        let op = orbit_partition(&g);
        let mut report = json!({
            "vertices": g.num_vertices(),
            "transitive": is_transitive(&g).as_json(),
            "orbit_blocks": op.blocks,
            "radius_limited": op.radius_limited || g.has_boundary(),
        });
        if g.alphabet().is_some() && g.is_deterministic()? {
            report["x_transitive"] = is_x_transitive(&g)?.as_json();
            report["x_orbit_blocks"] = if g.is_complete()? { json!(x_orbits(&g)?) } else { Value::Null };
            if g.root().is_some() {
                let lt = is_length_transitive(&g)?;
                report["length_transitive"] = lt.verdict.as_json();
                report["failing_letters"] = json!(lt.failing());
            }
        }
        Ok(vec![report])
    }

    fn iso(&self, first: &str, second: &str) -> Result<Vec<Value>> {
        let (g1, g2) = (self.graph(first)?, self.graph(second)?);
        let r1 = g1.root().ok_or(GraphError::NoRoot)?;
        let r2 = g2.root().ok_or(GraphError::NoRoot)?;
        let unlabeled = rooted_iso(&g1, r1, &g2, r2);
        let mut report = json!({ "iso": unlabeled.verdict().as_json() });
        if let Some(beta) = unlabeled.iso() {
            report["vertex_map"] = json!(beta.vertex_map);
        }
        let (Some(a1), Some(a2)) = (g1.alphabet(), g2.alphabet()) else { return Ok(vec![report]) };
        if a1 == a2 {
            let x = rooted_x_iso(&g1, r1, &g2, r2)?;
            report["x_iso"] = x.verdict().as_json();
            if let XIsoVerdict::Iso(m) = &x {
                report["x_vertex_map"] = json!(m);
            }
        }
        if let IsoVerdict::Yes(beta) = &unlabeled {
            if !g1.has_boundary() && a1.degree() == a2.degree() {
                let hgens = reconstruct_subgroup(&g1)?;
                let alpha = alpha_from_beta(beta, &g1, &g2, &hgens)?;
                let gamma = gamma_extend(&alpha, a1, a2, self.radius)?;
                let check = lemma_properties_check(&gamma, 2000, self.seed);
                report["alpha"] =
                    json!(alpha.iter().map(|(h, g)| [a1.format_word(h), a2.format_word(g)]).collect::<Vec<_>>());
                report["gamma"] = json!({
                    "radius": gamma.radius(),
                    "words": gamma.pairs().len(),
                    "properties_hold": check.is_ok(),
                    "violations": check.violations,
                });
            }
        }
        Ok(vec![report])
    }

    fn cover(&self, source: &str, target: Option<&str>) -> Result<Vec<Value>> {
        let (src, tgt, phi): (LabeledGraph, LabeledGraph, Option<CoveringMap>) = match target {
            Some(t) => {
                let (src, tgt) = (self.graph(source)?, self.graph(t)?);
                let phi = x_cover_find(&src, &tgt)?;
                (src, tgt, phi)
            }
            None => {
                let p = pair(source, self.window)?.ok_or_else(|| CliError::UnknownInstance(source.into()))?;
                (p.cover.graph, p.base.graph, Some(p.phi))
            }
        };
        let Some(phi) = phi else {
            return Ok(vec![json!({ "found": false, "radius_limited": src.has_boundary() || tgt.has_boundary() })]);
        };
        let mut report = json!({
            "found": true,
            "degree": phi.degree,
            "max_fiber_diameter": phi.max_fiber_diameter(&src, &tgt),
            "radius_limited": src.has_boundary() || tgt.has_boundary(),
        });
        if let Some(q) = qi_certificate(&src, &tgt, &phi) {
            report["qi"] = json!({ "A": q.a, "B": q.b, "C": q.c });
            report["pairs_checked"] = json!(q.pairs_checked);
            report["qi_holds"] = json!(q.holds());
            report["radius_limited"] = json!(q.radius_limited);
        }
        Ok(vec![report])
    }

    fn ends(&self, name: &str) -> Result<Vec<Value>> {
        // fail early on a bad name
        instance(name, 8)?;
        if self.radius < 1 {
            return Err(CliError::Usage("--radius must be at least 1".into()));
        }
        let radii: Vec<usize> = (self.radius.saturating_sub(2).max(1)..=self.radius).collect();
        let est = ends_estimate(
            |w| {
                let g = instance(name, w).expect("checked above");
                let r = g.root().unwrap_or(0);
                (g, r)
            },
            &radii,
            self.window,
        );
        Ok(vec![json!({ "instance": name, "ends": est.ends, "samples": est.samples })])
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(reports) => {
            for r in reports {
                match r {
                    Value::String(s) => print!("{s}"),
                    r => println!("{r}"),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::UnknownInstance(_)) {
                eprintln!("known instances: {INSTANCES}");
            }
            ExitCode::from(2)
        }
    }
}
