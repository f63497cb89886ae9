//! Command-line front end. Exit codes: 0 ok, 1 validation failure,
//! 2 guard or usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::decomp::{self, Certificate, LayeredRSDecomposition, PathDecomposition, TreeDecomposition, TreePartition};
use crate::families;
use crate::oracle::{self, Coloring, Q};
use crate::witness::{self, WitnessedBound};
use crate::{Error, Graph, SubgraphFamily};

#[derive(Parser, Debug)]
#[command(name = "sparsity", version, about = "Sparsity parameters: compute, witness, generate, verify")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact value of a parameter, or evaluation of a given witness.
    Compute {
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long)]
        input: PathBuf,
        /// JSON array of focus vertices (default: all).
        #[arg(long)]
        focus: Option<PathBuf>,
        /// JSON array (ordering) for wcol in check mode.
        #[arg(long)]
        ordering: Option<PathBuf>,
        /// JSON array (colour per vertex) for cen.
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// JSON array of vertex weights for wtd.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run one of the constructive procedures and emit its witness.
    Witness {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long)]
        input: PathBuf,
        /// Certificate envelope (tree/path decomposition, tree partition, LRS).
        #[arg(long)]
        cert: Option<PathBuf>,
        /// JSON array of arrays: per-part orders, colourings or path parts.
        #[arg(long)]
        parts: Option<PathBuf>,
        #[arg(long)]
        focus: Option<PathBuf>,
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// JSON array of arrays: the family F.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 0)]
        u: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a member of a named family.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated integer arguments.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        args: Vec<usize>,
        /// Base graph for apex, frategh and cep.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Certificate of the base graph (cep).
        #[arg(long)]
        input_cert: Option<PathBuf>,
        /// JSON array of rational strings (frategh).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Validate a certificate against a graph.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Sweep q over a family and print CSV.
    Table {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long, default_value_t = 1)]
        q_min: usize,
        #[arg(long, default_value_t = 8)]
        q_max: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Family size argument(s); for grohe the first is t.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        args: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Param {
    Wcol,
    Cen,
    Td,
    Ftd,
    Wtd,
    Td2,
    Rtd2,
    Srtd2,
    Frate,
    Tw,
    Pw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Check,
    Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Lemma {
    Tree,
    DyadicPath,
    TpWcol,
    TpCen,
    Pathwidth,
    Goodcol,
    Star,
    Forest,
    FrateLayer,
    FrateResidue,
    FtdPp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Path,
    Complete,
    Kst,
    Ladder,
    Ternary,
    Dary,
    Apex,
    Grohe,
    Cenlb,
    Frategh,
    Hkl,
    Cep,
}

/// Failure with an exit code and a JSON body for stdout.
struct Fail {
    code: i32,
    body: Value,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let code = match e {
            Error::Guard { .. } | Error::Parse(_) => 2,
            Error::Invalid(_) | Error::Precondition(_) | Error::ModelFound(_) => 1,
        };
        Fail {
            code,
            body: json!({ "error": e.to_string() }),
        }
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail {
        code: 2,
        body: json!({ "error": msg.into() }),
    }
}

type Out = std::result::Result<String, Fail>;

pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(s) => {
            print!("{s}");
            0
        }
        Err(f) => {
            println!("{}", f.body);
            f.code
        }
    }
}

fn run(cli: Cli) -> Out {
    match cli.cmd {
        Cmd::Compute {
            param,
            q,
            mode,
            input,
            focus,
            ordering,
            coloring,
            weights,
        } => run_compute(param, q, mode, &input, focus.as_deref(), ordering.as_deref(), coloring.as_deref(), weights.as_deref()),
        Cmd::Witness {
            lemma,
            q,
            input,
            cert,
            parts,
            focus,
            coloring,
            family,
            d,
            h,
            u,
            seed,
        } => {
            let g = read_graph(&input)?;
            let opts = WitnessOpts {
                cert,
                parts,
                focus,
                coloring,
                family,
                d,
                h,
                u,
                seed,
            };
            run_witness(lemma, q, &g, &opts)
        }
        Cmd::Generate {
            family,
            args,
            input,
            input_cert,
            weights,
            out,
            cert,
        } => run_generate(family, &args, input.as_deref(), input_cert.as_deref(), weights.as_deref(), &out, cert.as_deref()),
        Cmd::Verify { certificate, graph } => run_verify(&certificate, &graph),
        Cmd::Table {
            family,
            param,
            q_min,
            q_max,
            mode,
            args,
            out,
        } => {
            let csv = run_table(family, param, q_min, q_max, mode, &args)?;
            if let Some(p) = out {
                fs::write(&p, &csv).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            }
            Ok(csv)
        }
    }
}

fn read_text(p: &Path) -> std::result::Result<String, Fail> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn read_graph(p: &Path) -> std::result::Result<Graph, Fail> {
    Ok(Graph::parse(&read_text(p)?)?)
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> std::result::Result<T, Fail> {
    serde_json::from_str(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn write_file(p: &Path, s: &str) -> std::result::Result<(), Fail> {
    fs::write(p, s).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn all(g: &Graph) -> Vec<usize> {
    g.vertices().collect()
}

#[allow(clippy::too_many_arguments)]
fn run_compute(
    param: Param,
    q: usize,
    mode: Mode,
    input: &Path,
    focus: Option<&Path>,
    ordering: Option<&Path>,
    coloring: Option<&Path>,
    weights: Option<&Path>,
) -> Out {
    let g = read_graph(input)?;
    let s: Vec<usize> = match focus {
        Some(p) => read_json(p)?,
        None => all(&g),
    };
    let start = Instant::now();
    let (value, witness): (usize, Value) = match (mode, param) {
        (Mode::Exact, Param::Wcol) => {
            let (v, o) = oracle::wcol_focused_exact(&g, &s, q)?;
            (v, json!(o))
        }
        (Mode::Exact, Param::Cen) => match coloring {
            Some(p) => {
                let phi = Coloring::new(read_json(p)?);
                let (v, c) = oracle::cen_focused_exact(&g, &phi, &s, q)?;
                (v, json!(c))
            }
            None => {
                let (v, c) = oracle::cen_exact(&g, q)?;
                (v, json!(c))
            }
        },
        (Mode::Exact, Param::Td) => {
            let (v, parent) = oracle::td_exact(&g)?;
            (v, json!({ "parent": parent }))
        }
        (Mode::Exact, Param::Ftd) => (oracle::ftd_exact(&g, &s)?, Value::Null),
        (Mode::Exact, Param::Wtd) => {
            let t: Vec<usize> = match weights {
                Some(p) => read_json(p)?,
                None => return Err(usage("wtd needs --weights")),
            };
            (oracle::wtd_exact(&g, &t)?, Value::Null)
        }
        (Mode::Exact, Param::Td2) => (oracle::td2_exact(&g)?, Value::Null),
        (Mode::Exact, Param::Rtd2) => (oracle::rtd2_exact(&g)?, Value::Null),
        (Mode::Exact, Param::Srtd2) => (oracle::srtd2_exact(&g)?, Value::Null),
        (Mode::Exact, Param::Frate) => {
            let (v, w) = oracle::frate_exact(&g, &s, q)?;
            (v, json!(w))
        }
        (Mode::Exact, Param::Tw) => {
            let (v, td) = oracle::tw_exact(&g)?;
            (v, json!(td))
        }
        (Mode::Exact, Param::Pw) => {
            let (v, pd) = oracle::pw_exact(&g)?;
            (v, json!(pd))
        }
        (Mode::Check, Param::Wcol) => {
            let sigma: Vec<usize> = match ordering {
                Some(p) => read_json(p)?,
                None => return Err(usage("check mode for wcol needs --ordering")),
            };
            let mut sorted = sigma.clone();
            sorted.sort_unstable();
            let mut fs = s.clone();
            fs.sort_unstable();
            if sorted != fs {
                return Err(Fail::from(Error::Invalid("ordering is not a permutation of the focus set".into())));
            }
            (oracle::wcol_eval(&g, &sigma, q), json!({ "sequence": sigma }))
        }
        (Mode::Check, Param::Cen) => {
            let c: Vec<usize> = match coloring {
                Some(p) => read_json(p)?,
                None => return Err(usage("check mode for cen needs --coloring")),
            };
            if c.len() != g.n() {
                return Err(Fail::from(Error::Invalid("one colour per vertex".into())));
            }
            let phi = Coloring::new(c);
            if !oracle::cen_check(&g, &phi, q) {
                return Err(Fail {
                    code: 1,
                    body: json!({ "param": param, "q": q, "valid": false, "error": "colouring is not q-centered" }),
                });
            }
            (phi.palette, json!(phi))
        }
        (Mode::Check, _) => return Err(usage("check mode supports wcol and cen")),
        (Mode::Witness, _) => return Err(usage("use the witness subcommand")),
    };
    Ok(pretty(&json!({
        "param": param,
        "q": q,
        "value": value,
        "witness": witness,
        "elapsed_ms": start.elapsed().as_millis() as u64,
    })))
}

struct WitnessOpts {
    cert: Option<PathBuf>,
    parts: Option<PathBuf>,
    focus: Option<PathBuf>,
    coloring: Option<PathBuf>,
    family: Option<PathBuf>,
    d: usize,
    h: usize,
    u: usize,
    seed: Option<u64>,
}

fn read_cert(p: Option<&PathBuf>) -> std::result::Result<Option<Certificate>, Fail> {
    p.map(|p| read_json::<Certificate>(p)).transpose()
}

fn tree_dec(g: &Graph, o: &WitnessOpts) -> std::result::Result<TreeDecomposition, Fail> {
    match read_cert(o.cert.as_ref())? {
        Some(Certificate::TreeDecomposition(td)) => Ok(td),
        Some(_) => Err(usage("expected a tree_decomposition certificate")),
        None => Ok(oracle::tw_exact(g)?.1),
    }
}

fn tree_part(o: &WitnessOpts) -> std::result::Result<TreePartition, Fail> {
    match read_cert(o.cert.as_ref())? {
        Some(Certificate::TreePartition(tp)) => Ok(tp),
        _ => Err(usage("expected a tree_partition certificate via --cert")),
    }
}

fn family_of(o: &WitnessOpts) -> std::result::Result<SubgraphFamily, Fail> {
    Ok(match &o.family {
        Some(p) => SubgraphFamily::new(read_json(p)?),
        None => SubgraphFamily::default(),
    })
}

fn need_seed(o: &WitnessOpts) -> std::result::Result<u64, Fail> {
    o.seed.ok_or_else(|| usage("--seed is required for randomized witnesses"))
}

/// The bound plus an independent re-evaluation where one is cheap.
#[derive(Serialize)]
struct Emitted {
    #[serde(flatten)]
    bound: WitnessedBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<usize>,
    verified: bool,
}

fn emit(g: &Graph, w: WitnessedBound, focus: Option<&[usize]>) -> Out {
    let mut eval = None;
    let verified = match &w.witness {
        witness::Witness::Ordering(o) => {
            let e = oracle::wcol_eval(g, &o.sequence, w.q);
            eval = Some(e);
            e <= w.bound
        }
        witness::Witness::Fragility(f) => {
            let s = focus.map(|s| s.to_vec()).unwrap_or_else(|| all(g));
            oracle::qthin_check(g, &s, f)?
        }
        witness::Witness::Elimination { order } => {
            let s = focus.map(|s| s.to_vec()).unwrap_or_else(|| all(g));
            let e = witness::ftd_replay(g, &s, order);
            eval = Some(e);
            e <= w.bound
        }
        witness::Witness::Coloring(_) => true,
    };
    let body = pretty(&Emitted { bound: w, eval, verified });
    if verified {
        Ok(body)
    } else {
        Err(Fail {
            code: 1,
            body: serde_json::from_str(&body).expect("json"),
        })
    }
}

fn run_witness(lemma: Lemma, q: usize, g: &Graph, o: &WitnessOpts) -> Out {
    match lemma {
        Lemma::Tree => emit(g, witness::tree_ordering(g, q)?, None),
        Lemma::DyadicPath => {
            if g.edges() != witness::path_graph(g.n()).edges() {
                return Err(Fail::from(Error::Precondition("input must be the path 0-1-…-(n−1)".into())));
            }
            emit(g, witness::dyadic_path_ordering(g.n(), q)?, None)
        }
        Lemma::TpWcol => {
            let tp = tree_part(o)?;
            let orders: Vec<Vec<usize>> = match &o.parts {
                Some(p) => read_json(p)?,
                None => tp.parts.clone(),
            };
            let w = witness::tree_partition_wcol_combiner(g, &tp, &orders, q)?;
            emit(g, w, Some(&tp.focus))
        }
        Lemma::TpCen => {
            let tp = tree_part(o)?;
            let phi = match &o.coloring {
                Some(p) => Coloring::new(read_json(p)?),
                None => Coloring::new(vec![0; g.n()]),
            };
            let psis: Vec<Vec<usize>> = match &o.parts {
                Some(p) => read_json(p)?,
                None => tp.parts.iter().map(|p| (0..p.len()).collect()).collect(),
            };
            let w = witness::tree_partition_cen_combiner(g, &phi, &tp, &psis, q)?;
            let ok = match &w.witness {
                witness::Witness::Coloring(c) => oracle::cen_focused_check(g, &phi, &tp.focus, &c.assignment, q),
                _ => false,
            };
            let body = pretty(&json!({ "bound": w, "verified": ok }));
            if ok {
                Ok(body)
            } else {
                Err(Fail { code: 1, body: serde_json::from_str(&body).expect("json") })
            }
        }
        Lemma::Pathwidth => {
            let pd: PathDecomposition = match read_cert(o.cert.as_ref())? {
                Some(Certificate::PathDecomposition(pd)) => pd,
                Some(_) => return Err(usage("expected a path_decomposition certificate")),
                None => oracle::pw_exact(g)?.1,
            };
            emit(g, witness::pathwidth_ordering(g, &pd, q)?, None)
        }
        Lemma::Goodcol => {
            let td = tree_dec(g, o)?;
            let c = witness::goodcol_bounded_tw(g, &td)?;
            Ok(pretty(&json!({
                "parameter": "goodcol",
                "bound": td.width() + 1,
                "witness": c,
                "provenance": "p1_good_colorings_when_bounded_tw",
            })))
        }
        Lemma::Star => {
            let td = tree_dec(g, o)?;
            let f = family_of(o)?;
            match witness::star_exclusion_partition(g, &td, &f, o.d, o.u) {
                Ok(sp) => Ok(pretty(&json!({ "outcome": "partition", "partition": sp }))),
                Err(Error::ModelFound(m)) => Ok(pretty(&json!({ "outcome": "model", "model": m }))),
                Err(e) => Err(e.into()),
            }
        }
        Lemma::Forest => {
            let td = tree_dec(g, o)?;
            let f = family_of(o)?;
            match witness::forest_exclusion_partition(g, &td, &f, o.h, o.d) {
                Ok(lp) => Ok(pretty(&json!({ "outcome": "partition", "partition": lp }))),
                Err(Error::ModelFound(m)) => Ok(pretty(&json!({ "outcome": "model", "model": m }))),
                Err(e) => Err(e.into()),
            }
        }
        Lemma::FrateLayer => {
            let seed = need_seed(o)?;
            let lrs: LayeredRSDecomposition = match read_cert(o.cert.as_ref())? {
                Some(Certificate::LayeredRsDecomposition(l)) => l,
                _ => return Err(usage("expected a layered_rs_decomposition certificate via --cert")),
            };
            emit(g, witness::frate_layer_witness(g, &lrs, q, seed)?, None)
        }
        Lemma::FrateResidue => {
            let seed = need_seed(o)?;
            let td = tree_dec(g, o)?;
            let f = family_of(o)?;
            match witness::forest_exclusion_base(g, &td, &f, o.h, o.d) {
                Ok(lp) => {
                    let s = lp.union();
                    emit(g, witness::frate_residue_witness(g, &lp, q, seed)?, Some(&s))
                }
                Err(Error::ModelFound(m)) => Ok(pretty(&json!({ "outcome": "model", "model": m }))),
                Err(e) => Err(e.into()),
            }
        }
        Lemma::FtdPp => {
            let parts: Vec<Vec<usize>> = match &o.parts {
                Some(p) => read_json(p)?,
                None => return Err(usage("ftd-pp needs --parts")),
            };
            let s: Vec<usize> = match &o.focus {
                Some(p) => read_json(p)?,
                None => parts.iter().flatten().copied().collect(),
            };
            emit(g, witness::ftd_path_partition_bound(g, &s, &parts)?, Some(&s))
        }
    }
}

fn arg(args: &[usize], i: usize, name: &str) -> std::result::Result<usize, Fail> {
    args.get(i).copied().ok_or_else(|| usage(format!("missing argument {name}")))
}

fn run_generate(
    family: Family,
    args: &[usize],
    input: Option<&Path>,
    input_cert: Option<&Path>,
    weights: Option<&Path>,
    out: &Path,
    cert_out: Option<&Path>,
) -> Out {
    let base = || -> std::result::Result<Graph, Fail> {
        match input {
            Some(p) => read_graph(p),
            None => Err(usage("this family needs --input")),
        }
    };
    let mut extra = Value::Null;
    let (g, cert): (Graph, Option<Certificate>) = match family {
        Family::Path => (families::path(arg(args, 0, "n")?), None),
        Family::Complete => (families::complete(arg(args, 0, "n")?), None),
        Family::Kst => (families::complete_bipartite(arg(args, 0, "s")?, arg(args, 1, "t")?), None),
        Family::Ladder => (families::ladder(arg(args, 0, "k")?), None),
        Family::Ternary => (families::ternary_tree(arg(args, 0, "k")?), None),
        Family::Dary => (families::dary_tree(arg(args, 0, "h")?, arg(args, 1, "d")?).0, None),
        Family::Apex => (families::apex(&base()?), None),
        Family::Grohe => {
            let (t, q) = (arg(args, 0, "t")?, arg(args, 1, "q")?);
            let (g, c) = families::grohe_family(t, q)?;
            extra = json!({ "wcol_lower_bound": families::grohe_bound(t, q) });
            (g, Some(Certificate::RootedForestDecomposition(c)))
        }
        Family::Cenlb => {
            let (g, c) = families::cen_lowerbound_family(arg(args, 0, "t")?, arg(args, 1, "q")?, arg(args, 2, "k")?)?;
            (g, Some(Certificate::RootedForestDecomposition(c)))
        }
        Family::Frategh => {
            let gp = base()?;
            let w: Vec<String> = match weights {
                Some(p) => read_json(p)?,
                None => return Err(usage("frategh needs --weights")),
            };
            let w: Vec<Q> = w
                .iter()
                .map(|s| s.parse::<Q>().map_err(|e| usage(format!("weight {s:?}: {e}"))))
                .collect::<std::result::Result<_, _>>()?;
            let t = families::frate_gh(&gp, &w, arg(args, 0, "h")?)?;
            extra = json!({ "weights": t.weights.iter().map(|x| x.to_string()).collect::<Vec<_>>() });
            (t.graph, Some(Certificate::TreeDecomposition(t.decomposition)))
        }
        Family::Hkl => {
            let (g, u, v) = families::hkl_family(arg(args, 0, "k")?, arg(args, 1, "l")?)?;
            extra = json!({ "u": u, "v": v });
            (g, None)
        }
        Family::Cep => {
            let x = base()?;
            let c: Certificate = match input_cert {
                Some(p) => read_json(p)?,
                None => return Err(usage("cep needs --input-cert")),
            };
            let Certificate::RootedForestDecomposition(c) = c else {
                return Err(usage("cep needs a rooted_forest_decomposition certificate"));
            };
            let (y, cy) = families::cep_witness(&x, &c, arg(args, 0, "k")?)?;
            (y, Some(Certificate::RootedForestDecomposition(cy)))
        }
    };
    write_file(out, &g.to_text())?;
    if let Some(p) = cert_out {
        match &cert {
            Some(c) => write_file(p, &pretty(c))?,
            None => {
                let td = Certificate::TreeDecomposition(TreeDecomposition::trivial(&g));
                write_file(p, &pretty(&td))?
            }
        }
    }
    Ok(pretty(&json!({ "n": g.n(), "m": g.m(), "out": out, "extra": extra })))
}

fn run_verify(cert: &Path, graph: &Path) -> Out {
    let g = read_graph(graph)?;
    let c: Certificate = read_json(cert)?;
    let report = decomp::validate(&c, &g);
    let body = pretty(&report);
    if report.valid {
        Ok(body)
    } else {
        Err(Fail {
            code: 1,
            body: serde_json::to_value(&report).expect("json"),
        })
    }
}

#[derive(Serialize)]
struct Row {
    family: String,
    param: String,
    q: usize,
    value: usize,
    bound: usize,
    witness_ok: bool,
}

fn table_graph(family: Family, args: &[usize]) -> std::result::Result<Graph, Fail> {
    let a = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    Ok(match family {
        Family::Path => families::path(a(0, 64)),
        Family::Complete => families::complete(a(0, 5)),
        Family::Kst => families::complete_bipartite(a(0, 2), a(1, 3)),
        Family::Ladder => families::ladder(a(0, 4)),
        Family::Ternary => families::ternary_tree(a(0, 3)),
        Family::Dary => families::dary_tree(a(0, 3), a(1, 2)).0,
        Family::Hkl => families::hkl_family(a(0, 3), a(1, 3))?.0,
        _ => return Err(usage("family not available in tables")),
    })
}

fn family_name(f: Family) -> String {
    format!("{f:?}").to_lowercase()
}

/// Each cell is independent; rows come out in q order.
fn run_table(family: Family, param: Param, q_min: usize, q_max: usize, mode: Mode, args: &[usize]) -> Out {
    if q_min == 0 || q_min > q_max {
        return Err(usage("need 1 <= q_min <= q_max"));
    }
    let mut rows = Vec::new();
    for q in q_min..=q_max {
        let (value, bound, ok) = match (family, param, mode) {
            (Family::Grohe, Param::Wcol, Mode::Exact) => {
                let t = args.first().copied().unwrap_or(2);
                let (g, _) = families::grohe_family(t, q)?;
                let all = all(&g);
                let (v, _) = oracle::wcol_focused_exact_with_limit(&g, &all, q, crate::scaled(64))?;
                let b = families::grohe_bound(t, q);
                (v, b, v >= b)
            }
            (_, Param::Wcol, Mode::Witness) => {
                let g = table_graph(family, args)?;
                let w = if family == Family::Path {
                    witness::dyadic_path_ordering(g.n(), q)?
                } else {
                    witness::tree_ordering(&g, q)?
                };
                let v = oracle::wcol_eval(&g, w.ordering().expect("ordering"), q);
                (v, w.bound, v <= w.bound)
            }
            (_, Param::Wcol, Mode::Exact) => {
                let g = table_graph(family, args)?;
                let (v, o) = oracle::wcol_exact(&g, q)?;
                (v, g.n(), oracle::wcol_eval(&g, &o.sequence, q) == v)
            }
            (_, Param::Cen, Mode::Exact) => {
                let g = table_graph(family, args)?;
                let (v, c) = oracle::cen_exact(&g, q)?;
                let (td, _) = oracle::td_exact(&g)?;
                let lower = td.min(q + 1);
                (v, lower, oracle::cen_check(&g, &c, q) && lower <= v && v <= td)
            }
            (_, Param::Frate, Mode::Exact) => {
                let g = table_graph(family, args)?;
                let all = all(&g);
                let (v, w) = oracle::frate_exact(&g, &all, q)?;
                let (td, _) = oracle::td_exact(&g)?;
                (v, td, oracle::qthin_check(&g, &all, &w)? && v <= td)
            }
            _ => return Err(usage("unsupported family/param/mode combination")),
        };
        rows.push(Row {
            family: family_name(family),
            param: format!("{param:?}").to_lowercase(),
            q,
            value,
            bound,
            witness_ok: ok,
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| usage(e.to_string()))?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?).expect("utf8");
    let monotone = rows.windows(2).all(|p| p[0].value <= p[1].value);
    if !monotone || rows.iter().any(|r| !r.witness_ok) {
        return Err(Fail {
            code: 1,
            body: json!({ "error": "table check failed", "monotone": monotone, "csv": csv }),
        });
    }
    Ok(csv)
}
