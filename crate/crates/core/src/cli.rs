//! The `afkit` command line.
//!
//! Transformations (`gen`, `telescope`, the conversions, `k0`,
//! `supernatural`, `moduli`) print their result as a bare document so they
//! compose in pipelines. Decisions (`validate`, `equiv`, `simple`, `shen`,
//! `zigzag`, `verify-zigzag`, `perturb-demo`) print an object carrying
//! `"status"` and, where one applies, the `"depth"` they looked at.

use std::fs;
use std::io::Read;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::bratteli::{
    af_sequence_of_diagram, certificate_of_diagram, diagram_of_af_sequence, equivalence_search, gen_car,
    gen_trace_diagram, gen_uhf, path_count, path_matrix, simplicity_window, supernatural_prefix, telescope,
    EquivalenceOutcome, HaltingTable, LabeledBratteliDiagram, SimplicityVerdict, TelescopeSpec, Vertex,
};
use crate::dimgroup::{af_of_certificate, certificate_of_af, shen_factor, unitalize, DimCertificate, DimGroupError};
use crate::elliott::{build_zigzag, verify_zigzag, ElliottError, ZigzagOptions, DEFAULT_BUDGET};
use crate::findim::{k0, k0_hom, validate_af_sequence};
use crate::io::{self, DocumentKind, InputError};
use crate::ordgrp::IntVector;
use crate::perturb::{moduli, numeric};

pub const DEFAULT_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Refuted,
    Unknown,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Refuted => 1,
            Status::Unknown => 2,
            Status::InputError => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Refuted => "refuted",
            Status::Unknown => "unknown",
            Status::InputError => "input-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub payload: Value,
    pub depth: Option<usize>,
}

impl Verdict {
    fn ok(payload: Value) -> Self {
        Verdict { status: Status::Ok, payload, depth: None }
    }

    /// A status object: `{"status", "depth"?}` merged with `extra`.
    fn decision(status: Status, depth: Option<usize>, extra: Value) -> Self {
        let mut m = match extra {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => Map::from_iter([("result".to_string(), other)]),
        };
        m.insert("status".into(), status.name().into());
        if let Some(d) = depth {
            m.insert("depth".into(), io::usize_json(d));
        }
        Verdict { status, payload: Value::Object(m), depth }
    }

    fn input_error(message: impl ToString) -> Self {
        Self::decision(Status::InputError, None, serde_json::json!({ "error": message.to_string() }))
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// What goes to standard output.
    pub fn render(&self) -> String {
        match &self.payload {
            Value::String(s) => {
                let mut s = s.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
            v => io::render(v),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "afkit", version, about = "Exact tools for Bratteli diagrams, dimension groups and AF algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a document and check its internal consistency.
    Validate { file: String },
    /// K_0 of an algebra, hom, AF sequence or diagram.
    K0 { file: String },
    /// Paths between two vertices (`--from l,i --to l,i`), or the full path matrix.
    PathCount {
        file: String,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Telescope a diagram or certificate onto the given levels.
    Telescope {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        stages: String,
    },
    /// Search for an equivalence between two diagrams truncated to `--depth`.
    Equiv {
        a: String,
        b: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Look for a full level below every vertex.
    Simple {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Prime exponents of a single-vertex-per-level diagram.
    Supernatural {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Bratteli diagram of a unital AF sequence
    AfToDiagram {
        #[arg(default_value = "-")]
        file: String,
    },
    /// AF sequence of a unital diagram
    DiagramToAf {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Standard AF sequence realizing a unital certificate
    CertToAf {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Dimension-group certificate of an AF sequence
    AfToCert {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Restrict every stage of a certificate to its unit's convex subgroup.
    Unitalize {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Factor `{"certificate", "theta": {"stage", "matrix"}, "alpha"}`.
    Shen {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Build a zigzag between two unital towers (diagrams or certificates).
    Zigzag {
        a: String,
        b: String,
        /// Stop after this many rounds instead of exhausting both towers.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Check a zigzag witness against two towers
    VerifyZigzag { witness: String, a: String, b: String },
    /// Generate a diagram.
    Gen {
        #[command(subcommand)]
        which: Generator,
    },
    /// The exact moduli at `eps`, `n` and `k`.
    Moduli {
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        k: u64,
    },
    /// Run one seeded exchange instance, or a Glimm instance with `--algebra`.
    PerturbDemo {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matrix size for the exchange instance; defaults to `2n`.
        #[arg(long)]
        dim: Option<usize>,
        /// Summand sizes, e.g. `1,2`.
        #[arg(long)]
        algebra: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum Generator {
    /// The CAR algebra: one vertex per level, double edges.
    Car {
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// The UHF algebra with multiplicity `--n` at every level.
    Uhf {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// The diagram of a halting table, `_` marking inputs that never halt.
    Trace {
        #[arg(long)]
        halting: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
}

/// Run one command line (`args[0]` is the program name). `stdin` backs the
/// file name `-`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Verdict
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Verdict::ok(Value::String(e.render().to_string()))
                }
                _ => Verdict::input_error(e.render().to_string().trim_end()),
            };
        }
    };
    let mut ctx = Context { stdin, stdin_used: false };
    match dispatch(cli.command, &mut ctx) {
        Ok(v) => v,
        Err(e) => Verdict::input_error(e),
    }
}

struct Context<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Context<'_> {
    fn read(&mut self, file: &str) -> Result<Value, String> {
        let text = if file == "-" {
            if std::mem::replace(&mut self.stdin_used, true) {
                return Err("standard input can only be read once".into());
            }
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| format!("<stdin>: {e}"))?;
            s
        } else {
            fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?
        };
        io::parse_document(&text).map_err(|e| format!("{}: {e}", display_name(file)))
    }
}

fn display_name(file: &str) -> &str {
    if file == "-" {
        "<stdin>"
    } else {
        file
    }
}

fn located<T>(file: &str, r: Result<T, InputError>) -> Result<T, String> {
    r.map_err(|e| format!("{}: {e}", display_name(file)))
}

fn diagram(ctx: &mut Context, file: &str) -> Result<LabeledBratteliDiagram, String> {
    let v = ctx.read(file)?;
    located(file, io::diagram_from_json(&v))
}

fn certificate(ctx: &mut Context, file: &str) -> Result<DimCertificate, String> {
    let v = ctx.read(file)?;
    located(file, io::certificate_from_json(&v))
}

/// A unital tower given either as a diagram or as a certificate.
fn tower(ctx: &mut Context, file: &str) -> Result<(DimCertificate, Option<LabeledBratteliDiagram>), String> {
    let v = ctx.read(file)?;
    match located(file, io::document_kind(&v))? {
        DocumentKind::Diagram => {
            let d = located(file, io::diagram_from_json(&v))?;
            let c = certificate_of_diagram(&d).map_err(|e| format!("{}: {e}", display_name(file)))?;
            Ok((c, Some(d)))
        }
        DocumentKind::Certificate => Ok((located(file, io::certificate_from_json(&v))?, None)),
        k => Err(format!("{}: expected a diagram or certificate, found {}", display_name(file), k.name())),
    }
}

fn truncate_cert(c: &DimCertificate, depth: usize) -> Result<DimCertificate, String> {
    let sel: Vec<usize> = (0..=depth.min(c.depth())).collect();
    c.telescope(&sel).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("{what}: cannot parse \"{}\"", x.trim())))
        .collect()
}

fn parse_vertex(s: &str) -> Result<Vertex, String> {
    match parse_list::<usize>(s, "vertex")?.as_slice() {
        [l, i] => Ok(Vertex::new(*l, *i)),
        _ => Err(format!("vertex \"{s}\" must be level,index")),
    }
}

fn parse_halting(s: &str) -> Result<HaltingTable, String> {
    let steps = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| match x.trim() {
            "_" => Ok(None),
            t => t.parse::<u64>().map(Some).map_err(|_| format!("halting: cannot parse \"{t}\"")),
        })
        .collect::<Result<_, _>>()?;
    Ok(HaltingTable::new(steps))
}

fn dispatch(cmd: Command, ctx: &mut Context) -> Result<Verdict, String> {
    match cmd {
        Command::Validate { file } => validate(ctx, &file),
        Command::K0 { file } => k0_command(ctx, &file),
        Command::PathCount { file, from, to } => {
            let d = diagram(ctx, &file)?;
            match (from, to) {
                (Some(f), Some(t)) => {
                    let n = path_count(&d, parse_vertex(&f)?, parse_vertex(&t)?).map_err(|e| e.to_string())?;
                    Ok(Verdict::ok(serde_json::json!({ "count": io::integer_json(&n) })))
                }
                (None, None) => {
                    let m = path_matrix(&d, 0, d.depth()).map_err(|e| e.to_string())?;
                    Ok(Verdict::ok(serde_json::json!({ "matrix": io::matrix_json(&m) })))
                }
                _ => Err("--from and --to go together".into()),
            }
        }
        Command::Telescope { file, stages } => {
            let stages = parse_list::<usize>(&stages, "stages")?;
            let v = ctx.read(&file)?;
            match located(&file, io::document_kind(&v))? {
                DocumentKind::Certificate => {
                    let c = located(&file, io::certificate_from_json(&v))?;
                    let t = c.telescope(&stages).map_err(|e| e.to_string())?;
                    Ok(Verdict::ok(io::certificate_to_json(&t)))
                }
                _ => {
                    let d = located(&file, io::diagram_from_json(&v))?;
                    let spec = TelescopeSpec::new(stages).map_err(|e| e.to_string())?;
                    let t = telescope(&d, &spec).map_err(|e| e.to_string())?;
                    Ok(Verdict::ok(io::diagram_to_json(&t)))
                }
            }
        }
        Command::Equiv { a, b, depth, budget } => {
            let d1 = diagram(ctx, &a)?.truncate(depth);
            let d2 = diagram(ctx, &b)?.truncate(depth);
            Ok(match equivalence_search(&d1, &d2, budget) {
                EquivalenceOutcome::Witnessed(w) => {
                    Verdict::decision(Status::Ok, Some(depth), io::equivalence_to_json(&w))
                }
                EquivalenceOutcome::Unknown { budget_exhausted } => Verdict::decision(
                    Status::Unknown,
                    Some(depth),
                    serde_json::json!({ "budgetExhausted": budget_exhausted }),
                ),
            })
        }
        Command::Simple { file, depth } => {
            let d = diagram(ctx, &file)?.truncate(depth);
            Ok(match simplicity_window(&d) {
                SimplicityVerdict::WitnessedSimpleUpToDepth { depth } => {
                    Verdict::decision(Status::Ok, Some(depth), serde_json::json!({ "simpleUpToDepth": true }))
                }
                SimplicityVerdict::NotFullyConnectedAtDepth { vertex, depth } => Verdict::decision(
                    Status::Unknown,
                    Some(depth),
                    serde_json::json!({ "blockedVertex": [vertex.level, vertex.index] }),
                ),
            })
        }
        Command::Supernatural { file, depth } => {
            let d = diagram(ctx, &file)?.truncate(depth);
            let p = supernatural_prefix(&d).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(supernatural_json(&p)))
        }
        Command::AfToDiagram { file } => {
            let v = ctx.read(&file)?;
            let seq = located(&file, io::af_sequence_from_json(&v))?;
            let d = diagram_of_af_sequence(&seq).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(io::diagram_to_json(&d)))
        }
        Command::DiagramToAf { file } => {
            let d = diagram(ctx, &file)?;
            let seq = af_sequence_of_diagram(&d).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(io::af_sequence_to_json(&seq)))
        }
        Command::CertToAf { file } => {
            let c = certificate(ctx, &file)?;
            let seq = af_of_certificate(&c).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(io::af_sequence_to_json(&seq)))
        }
        Command::AfToCert { file } => {
            let v = ctx.read(&file)?;
            let seq = located(&file, io::af_sequence_from_json(&v))?;
            let c = certificate_of_af(&seq).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(io::certificate_to_json(&c)))
        }
        Command::Unitalize { file } => {
            let c = certificate(ctx, &file)?;
            let u = unitalize(&c).map_err(|e| e.to_string())?;
            Ok(Verdict::ok(io::certificate_to_json(&u)))
        }
        Command::Shen { file } => shen(ctx, &file),
        Command::Zigzag { a, b, rounds, depth, budget } => zigzag(ctx, &a, &b, rounds, depth, budget),
        Command::VerifyZigzag { witness, a, b } => {
            let wv = ctx.read(&witness)?;
            let w = located(&witness, io::witness_from_json(&wv))?;
            let (ca, _) = tower(ctx, &a)?;
            let (cb, _) = tower(ctx, &b)?;
            Ok(match verify_zigzag(&w, &ca, &cb) {
                Ok(()) => Verdict::decision(Status::Ok, None, serde_json::json!({ "rounds": w.rounds() })),
                Err(f) => Verdict::decision(Status::Refuted, None, serde_json::json!({ "reason": f.to_string() })),
            })
        }
        Command::Gen { which } => {
            let d = match which {
                Generator::Car { depth } => gen_car(depth),
                Generator::Uhf { n, depth } => {
                    if n == 0 {
                        return Err("--n must be positive".into());
                    }
                    gen_uhf(n, depth)
                }
                Generator::Trace { halting, depth } => gen_trace_diagram(&parse_halting(&halting)?, depth),
            };
            Ok(Verdict::ok(io::diagram_to_json(&d)))
        }
        Command::Moduli { eps, n, k } => moduli_command(&eps, n, k),
        Command::PerturbDemo { n, k, seed, dim, algebra } => perturb_demo(n, k, seed, dim, algebra),
    }
}

fn validate(ctx: &mut Context, file: &str) -> Result<Verdict, String> {
    let v = ctx.read(file)?;
    let kind = located(file, io::document_kind(&v))?;
    let ok = |depth: Option<usize>| Verdict::decision(Status::Ok, depth, serde_json::json!({ "kind": kind.name() }));
    let refuted = |reason: String| {
        Verdict::decision(Status::Refuted, None, serde_json::json!({ "kind": kind.name(), "reason": reason }))
    };
    Ok(match kind {
        DocumentKind::Diagram => {
            let d = located(file, io::diagram_from_json(&v))?;
            match d.check_consistency() {
                Ok(()) => ok(Some(d.depth())),
                Err(e) => refuted(e.to_string()),
            }
        }
        DocumentKind::Certificate => ok(Some(located(file, io::certificate_from_json(&v))?.depth())),
        DocumentKind::Algebra => {
            located(file, io::algebra_from_json(&v, "$"))?;
            ok(None)
        }
        DocumentKind::Hom => {
            located(file, io::hom_from_json(&v, "$"))?;
            ok(None)
        }
        DocumentKind::AfSequence => {
            let seq = located(file, io::af_sequence_from_json(&v))?;
            match validate_af_sequence(&seq) {
                Ok(()) => ok(Some(seq.depth())),
                Err(e) => refuted(e.to_string()),
            }
        }
        DocumentKind::Zigzag => {
            located(file, io::witness_from_json(&v))?;
            ok(None)
        }
        DocumentKind::Equivalence => {
            located(file, io::equivalence_from_json(&v))?;
            ok(None)
        }
    })
}

fn k0_command(ctx: &mut Context, file: &str) -> Result<Verdict, String> {
    let v = ctx.read(file)?;
    let payload = match located(file, io::document_kind(&v))? {
        DocumentKind::Algebra => {
            let g = k0(&located(file, io::algebra_from_json(&v, "$"))?);
            let unit = g.unit().expect("K_0 of an algebra carries its unit");
            serde_json::json!({ "rank": g.rank(), "unit": io::vector_json(unit.entries()) })
        }
        DocumentKind::Hom => {
            let h = located(file, io::hom_from_json(&v, "$"))?;
            serde_json::json!({ "matrix": io::matrix_json(&k0_hom(&h)) })
        }
        DocumentKind::AfSequence => {
            let seq = located(file, io::af_sequence_from_json(&v))?;
            io::certificate_to_json(&certificate_of_af(&seq).map_err(|e| e.to_string())?)
        }
        DocumentKind::Diagram => {
            let d = located(file, io::diagram_from_json(&v))?;
            io::certificate_to_json(&certificate_of_diagram(&d).map_err(|e| e.to_string())?)
        }
        k => return Err(format!("k0 does not apply to a {}", k.name())),
    };
    Ok(Verdict::ok(payload))
}

fn supernatural_json(p: &std::collections::BTreeMap<BigInt, u64>) -> Value {
    Value::Object(p.iter().map(|(q, e)| (q.to_string(), Value::from(*e))).collect())
}

fn nested<T>(file: &str, key: &str, r: Result<T, InputError>) -> Result<T, String> {
    located(
        file,
        r.map_err(|e| match e {
            InputError::Invalid { path, message } => {
                InputError::Invalid { path: path.replacen('$', &format!("$.{key}"), 1), message }
            }
            other => other,
        }),
    )
}

fn shen(ctx: &mut Context, file: &str) -> Result<Verdict, String> {
    let v = ctx.read(file)?;
    let field = |key: &str| v.get(key).ok_or_else(|| format!("{}: at $: missing field \"{key}\"", display_name(file)));
    let cert = nested(file, "certificate", io::certificate_from_json(field("certificate")?))?;
    let theta = located(file, io::limit_hom_from_json(field("theta")?, "$.theta"))?;
    let alpha = IntVector::new(located(file, io::integers(field("alpha")?, "$.alpha"))?);
    let depth = Some(cert.depth());
    Ok(match shen_factor(&cert, &theta, &alpha) {
        Ok(f) => Verdict::decision(Status::Ok, depth, io::shen_to_json(&f)),
        Err(DimGroupError::KernelWitnessNotFound { .. }) => Verdict::decision(
            Status::Unknown,
            depth,
            serde_json::json!({ "reason": "no positive push kills alpha within the certificate" }),
        ),
        Err(e) => return Err(e.to_string()),
    })
}

fn zigzag(
    ctx: &mut Context,
    a: &str,
    b: &str,
    rounds: Option<usize>,
    depth: usize,
    budget: usize,
) -> Result<Verdict, String> {
    let (ca, da) = tower(ctx, a)?;
    let (cb, db) = tower(ctx, b)?;
    let (ca, cb) = (truncate_cert(&ca, depth)?, truncate_cert(&cb, depth)?);
    let mut opts = match rounds {
        Some(r) => ZigzagOptions::rounds(r),
        None => ZigzagOptions::default(),
    };
    opts.budget = budget;
    let used = Some(ca.depth().max(cb.depth()));
    let prefixes = || -> Value {
        match (da.as_ref(), db.as_ref()) {
            (Some(x), Some(y)) => match (supernatural_prefix(&x.truncate(depth)), supernatural_prefix(&y.truncate(depth))) {
                (Ok(p), Ok(q)) => serde_json::json!({ "a": supernatural_json(&p), "b": supernatural_json(&q) }),
                _ => Value::Null,
            },
            _ => Value::Null,
        }
    };
    let unknown = |reason: String, extra: Vec<(&str, Value)>| {
        let mut m = Map::new();
        m.insert("reason".into(), reason.into());
        let p = prefixes();
        if !p.is_null() {
            m.insert("supernatural".into(), p);
        }
        for (k, v) in extra {
            m.insert(k.into(), v);
        }
        Verdict::decision(Status::Unknown, used, Value::Object(m))
    };
    Ok(match build_zigzag(&ca, &cb, &opts) {
        Ok(w) => Verdict::decision(Status::Ok, used, io::witness_to_json(&w)),
        Err(e @ ElliottError::SeedNotFound { budget_exhausted }) => {
            unknown(e.to_string(), vec![("budgetExhausted", budget_exhausted.into())])
        }
        Err(ElliottError::StageSearchExhausted { partial, achieved, budget_exhausted }) => unknown(
            format!("search stopped after {achieved} complete rounds"),
            vec![
                ("partial", io::witness_to_json(&partial)),
                ("achieved", io::usize_json(achieved)),
                ("budgetExhausted", budget_exhausted.into()),
            ],
        ),
        Err(e) => return Err(e.to_string()),
    })
}

fn moduli_command(eps: &str, n: u64, k: u64) -> Result<Verdict, String> {
    let e = moduli::parse_rat(eps).ok_or_else(|| format!("--eps: cannot parse \"{eps}\""))?;
    let text = |r: Result<moduli::Rat, moduli::ModuliError>| r.map(|x| Value::String(moduli::format_rat(&x)));
    let d0 = text(moduli::delta0(&e, n)).map_err(|e| e.to_string())?;
    let d1 = text(moduli::delta1(&e, n)).map_err(|e| e.to_string())?;
    let d2 = text(moduli::delta2(&e, n)).map_err(|e| e.to_string())?;
    Ok(Verdict::ok(serde_json::json!({
        "eps": moduli::format_rat(&e),
        "n": n,
        "k": k,
        "delta0": d0,
        "delta1": d1,
        "delta2": d2,
        "Delta1": moduli::big_delta1(n, k),
        "Delta2": moduli::big_delta2(n, k),
        "Delta3": moduli::big_delta3(n, k),
        "Delta4": moduli::big_delta4(n, k),
        "DeltaGlimm": moduli::delta_glimm(n, k),
    })))
}

fn check_json(c: &numeric::Check) -> Value {
    serde_json::json!({ "bound": c.bound, "measured": c.measured, "pass": c.pass() })
}

fn perturb_demo(n: usize, k: u64, seed: u64, dim: Option<usize>, algebra: Option<String>) -> Result<Verdict, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pass, report) = match algebra {
        Some(sizes) => {
            let sizes = parse_list::<usize>(&sizes, "algebra")?;
            if sizes.is_empty() || sizes.contains(&0) {
                return Err("--algebra needs positive summand sizes".into());
            }
            let r = numeric::glimm_trial(&mut rng, &sizes, k).map_err(|e| e.to_string())?;
            (
                r.pass(),
                serde_json::json!({
                    "kind": "glimm",
                    "algebra": sizes,
                    "k": k,
                    "k0": r.k0,
                    "seed": seed,
                    "unitarity": check_json(&r.unitarity),
                    "conjugation": check_json(&r.conjugation),
                    "chainBound": check_json(&r.chain_bound),
                    "targetBound": check_json(&r.target_bound),
                }),
            )
        }
        None => {
            let d = dim.unwrap_or(2 * n);
            if n == 0 || d < n {
                return Err(format!("need 1 <= n <= dim, got n = {n}, dim = {d}"));
            }
            let r = numeric::exchange_trial(&mut rng, n, d, k).map_err(|e| e.to_string())?;
            (
                r.pass(),
                serde_json::json!({
                    "kind": "exchange",
                    "n": n,
                    "k": k,
                    "dim": d,
                    "seed": seed,
                    "unitarity": check_json(&r.unitarity),
                    "intertwining": check_json(&r.intertwining),
                    "nearIdentity": check_json(&r.near_identity),
                }),
            )
        }
    };
    let status = if pass { Status::Ok } else { Status::Refuted };
    Ok(Verdict::decision(status, None, report))
}
