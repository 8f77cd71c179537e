//! JSON encodings of diagrams, certificates, algebras, sequences and witnesses.
//!
//! Integers are written as exact JSON numbers of any size. Objects are
//! emitted with sorted keys, so equal values serialize to equal bytes.

use num_bigint::BigInt;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::bratteli::{EquivalenceWitness, LabeledBratteliDiagram, Step, TelescopeSpec};
use crate::dimgroup::{DimCertificate, LimitHom, ShenFactoring, Verdict3};
use crate::elliott::ZigzagWitness;
use crate::findim::{hom_from_matrix, AFSequence, AlgebraHom, FinDimAlgebra};
use crate::ordgrp::{IntMatrix, IntVector, PosMatrix, SimplicialGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("at {path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl ToString) -> InputError {
    InputError::Invalid { path: path.to_string(), message: message.to_string() }
}

pub fn parse_document(text: &str) -> Result<Value, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Compact canonical text with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("values always serialize");
    s.push('\n');
    s
}

fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, InputError> {
    match v {
        Value::Object(m) => m.get(key).ok_or_else(|| invalid(path, format!("missing field \"{key}\""))),
        _ => Err(invalid(path, "expected an object")),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a [Value], InputError> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| invalid(path, "expected an array"))
}

pub fn integer(v: &Value, path: &str) -> Result<BigInt, InputError> {
    let n = v.as_number().ok_or_else(|| invalid(path, "expected an integer"))?;
    n.to_string().parse::<BigInt>().map_err(|_| invalid(path, format!("{n} is not an integer")))
}

fn index(v: &Value, path: &str) -> Result<usize, InputError> {
    let n = integer(v, path)?;
    usize::try_from(n).map_err(|_| invalid(path, "expected a nonnegative index"))
}

fn boolean(v: &Value, path: &str) -> Result<bool, InputError> {
    v.as_bool().ok_or_else(|| invalid(path, "expected true or false"))
}

pub fn integers(v: &Value, path: &str) -> Result<Vec<BigInt>, InputError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| integer(x, &format!("{path}[{i}]")))
        .collect()
}

fn indices(v: &Value, path: &str) -> Result<Vec<usize>, InputError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| index(x, &format!("{path}[{i}]")))
        .collect()
}

/// Rows of integers. An empty row list has `cols` columns (0 if unknown).
pub fn int_matrix(v: &Value, path: &str, cols: Option<usize>) -> Result<IntMatrix, InputError> {
    let rows = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| integers(r, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let width = rows.first().map_or(cols.unwrap_or(0), Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(invalid(&format!("{path}[{i}]"), format!("row has {} entries, expected {width}", rows[i].len())));
    }
    IntMatrix::from_rows(rows, width).map_err(|e| invalid(path, e))
}

pub fn pos_matrix(v: &Value, path: &str, cols: Option<usize>) -> Result<PosMatrix, InputError> {
    PosMatrix::new(int_matrix(v, path, cols)?).map_err(|e| invalid(path, e))
}

fn matrices(v: &Value, path: &str) -> Result<Vec<PosMatrix>, InputError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, m)| pos_matrix(m, &format!("{path}[{i}]"), None))
        .collect()
}

pub fn integer_json(n: &BigInt) -> Value {
    Value::Number(n.to_string().parse::<Number>().expect("integers are valid JSON numbers"))
}

pub fn usize_json(n: usize) -> Value {
    Value::from(n as u64)
}

fn usizes_json(ns: &[usize]) -> Value {
    Value::Array(ns.iter().map(|&n| usize_json(n)).collect())
}

pub fn vector_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(integer_json).collect())
}

pub fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array((0..m.rows()).map(|r| vector_json(m.row(r))).collect())
}

fn matrices_json(ms: &[PosMatrix]) -> Value {
    Value::Array(ms.iter().map(|m| matrix_json(m)).collect())
}

pub fn diagram_to_json(d: &LabeledBratteliDiagram) -> Value {
    object(vec![
        ("levels", Value::Array(d.levels().iter().map(|l| vector_json(l)).collect())),
        ("edges", matrices_json(d.edges())),
        ("unital", Value::Bool(d.is_unital())),
    ])
}

pub fn diagram_from_json(v: &Value) -> Result<LabeledBratteliDiagram, InputError> {
    let levels_v = array(field(v, "levels", "$")?, "$.levels")?;
    let levels = levels_v
        .iter()
        .enumerate()
        .map(|(i, l)| integers(l, &format!("$.levels[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = array(field(v, "edges", "$")?, "$.edges")?
        .iter()
        .enumerate()
        .map(|(k, e)| pos_matrix(e, &format!("$.edges[{k}]"), levels.get(k).map(Vec::len)))
        .collect::<Result<Vec<_>, _>>()?;
    let unital = boolean(field(v, "unital", "$")?, "$.unital")?;
    LabeledBratteliDiagram::new(levels, edges, unital).map_err(|e| invalid("$", e))
}

pub fn certificate_to_json(c: &DimCertificate) -> Value {
    let stages = c
        .stages()
        .iter()
        .map(|g| {
            let mut pairs = vec![("rank", usize_json(g.rank()))];
            if let Some(u) = g.unit() {
                pairs.push(("unit", vector_json(u.entries())));
            }
            object(pairs)
        })
        .collect();
    object(vec![
        ("stages", Value::Array(stages)),
        ("bonds", matrices_json(c.bonds())),
        ("unital", Value::Bool(c.is_unital())),
    ])
}

pub fn certificate_from_json(v: &Value) -> Result<DimCertificate, InputError> {
    let stages_v = array(field(v, "stages", "$")?, "$.stages")?;
    let mut stages = Vec::with_capacity(stages_v.len());
    for (s, g) in stages_v.iter().enumerate() {
        let path = format!("$.stages[{s}]");
        let rank = index(field(g, "rank", &path)?, &format!("{path}.rank"))?;
        let stage = match g.get("unit") {
            None | Some(Value::Null) => SimplicialGroup::new(rank),
            Some(u) => {
                let upath = format!("{path}.unit");
                let unit = integers(u, &upath)?;
                if unit.len() != rank {
                    return Err(invalid(&upath, format!("unit has {} entries, rank is {rank}", unit.len())));
                }
                SimplicialGroup::with_unit(IntVector::new(unit)).map_err(|e| invalid(&upath, e))?
            }
        };
        stages.push(stage);
    }
    let bonds = array(field(v, "bonds", "$")?, "$.bonds")?
        .iter()
        .enumerate()
        .map(|(k, b)| pos_matrix(b, &format!("$.bonds[{k}]"), stages.get(k).map(SimplicialGroup::rank)))
        .collect::<Result<Vec<_>, _>>()?;
    let unital = boolean(field(v, "unital", "$")?, "$.unital")?;
    DimCertificate::new(stages, bonds, unital).map_err(|e| invalid("$", e))
}

pub fn algebra_to_json(f: &FinDimAlgebra) -> Value {
    object(vec![("summands", vector_json(f.summands()))])
}

pub fn algebra_from_json(v: &Value, path: &str) -> Result<FinDimAlgebra, InputError> {
    let spath = format!("{path}.summands");
    FinDimAlgebra::new(integers(field(v, "summands", path)?, &spath)?).map_err(|e| invalid(&spath, e))
}

pub fn hom_to_json(h: &AlgebraHom) -> Value {
    object(vec![
        ("mult", matrix_json(h.mult())),
        ("source", algebra_to_json(h.source())),
        ("target", algebra_to_json(h.target())),
    ])
}

pub fn hom_from_json(v: &Value, path: &str) -> Result<AlgebraHom, InputError> {
    let source = algebra_from_json(field(v, "source", path)?, &format!("{path}.source"))?;
    let target = algebra_from_json(field(v, "target", path)?, &format!("{path}.target"))?;
    let mpath = format!("{path}.mult");
    let mult = pos_matrix(field(v, "mult", path)?, &mpath, Some(source.num_summands()))?;
    hom_from_matrix(&source, &target, mult).map_err(|e| invalid(&mpath, e))
}

pub fn af_sequence_to_json(seq: &AFSequence) -> Value {
    object(vec![
        ("algebras", Value::Array(seq.algebras().iter().map(algebra_to_json).collect())),
        ("homs", Value::Array(seq.homs().iter().map(hom_to_json).collect())),
    ])
}

pub fn af_sequence_from_json(v: &Value) -> Result<AFSequence, InputError> {
    let algebras = array(field(v, "algebras", "$")?, "$.algebras")?
        .iter()
        .enumerate()
        .map(|(i, a)| algebra_from_json(a, &format!("$.algebras[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let homs = array(field(v, "homs", "$")?, "$.homs")?
        .iter()
        .enumerate()
        .map(|(i, h)| hom_from_json(h, &format!("$.homs[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    AFSequence::new(algebras, homs).map_err(|e| invalid("$", e))
}

pub fn witness_to_json(w: &ZigzagWitness) -> Value {
    object(vec![
        ("nStages", usizes_json(&w.n_stages)),
        ("mStages", usizes_json(&w.m_stages)),
        ("alpha", matrices_json(&w.alpha)),
        ("beta", matrices_json(&w.beta)),
    ])
}

pub fn witness_from_json(v: &Value) -> Result<ZigzagWitness, InputError> {
    Ok(ZigzagWitness {
        n_stages: indices(field(v, "nStages", "$")?, "$.nStages")?,
        m_stages: indices(field(v, "mStages", "$")?, "$.mStages")?,
        alpha: matrices(field(v, "alpha", "$")?, "$.alpha")?,
        beta: matrices(field(v, "beta", "$")?, "$.beta")?,
    })
}

fn step_to_json(step: &Step) -> Value {
    match step {
        Step::Isomorphism { perms } => {
            object(vec![("isomorphism", Value::Array(perms.iter().map(|p| usizes_json(p)).collect()))])
        }
        Step::Telescope { spec } => object(vec![("telescope", usizes_json(spec.stages()))]),
        Step::Expand { spec, diagram } => object(vec![(
            "expand",
            object(vec![("stages", usizes_json(spec.stages())), ("diagram", diagram_to_json(diagram))]),
        )]),
        Step::Root => Value::String("root".into()),
        Step::Unroot => Value::String("unroot".into()),
    }
}

fn spec_from_json(v: &Value, path: &str) -> Result<TelescopeSpec, InputError> {
    TelescopeSpec::new(indices(v, path)?).map_err(|e| invalid(path, e))
}

fn step_from_json(v: &Value, path: &str) -> Result<Step, InputError> {
    match v {
        Value::String(s) if s == "root" => Ok(Step::Root),
        Value::String(s) if s == "unroot" => Ok(Step::Unroot),
        Value::Object(m) if m.len() == 1 => {
            let (key, body) = m.iter().next().expect("one entry");
            let bpath = format!("{path}.{key}");
            match key.as_str() {
                "isomorphism" => Ok(Step::Isomorphism {
                    perms: array(body, &bpath)?
                        .iter()
                        .enumerate()
                        .map(|(k, p)| indices(p, &format!("{bpath}[{k}]")))
                        .collect::<Result<_, _>>()?,
                }),
                "telescope" => Ok(Step::Telescope { spec: spec_from_json(body, &bpath)? }),
                "expand" => Ok(Step::Expand {
                    spec: spec_from_json(field(body, "stages", &bpath)?, &format!("{bpath}.stages"))?,
                    diagram: diagram_from_json(field(body, "diagram", &bpath)?)
                        .map_err(|e| invalid(&format!("{bpath}.diagram"), e))?,
                }),
                other => Err(invalid(path, format!("unknown step \"{other}\""))),
            }
        }
        _ => Err(invalid(path, "expected a step")),
    }
}

pub fn equivalence_to_json(w: &EquivalenceWitness) -> Value {
    object(vec![("steps", Value::Array(w.steps.iter().map(step_to_json).collect()))])
}

pub fn equivalence_from_json(v: &Value) -> Result<EquivalenceWitness, InputError> {
    let steps = array(field(v, "steps", "$")?, "$.steps")?
        .iter()
        .enumerate()
        .map(|(i, s)| step_from_json(s, &format!("$.steps[{i}]")))
        .collect::<Result<_, _>>()?;
    Ok(EquivalenceWitness { steps })
}

pub fn limit_hom_to_json(h: &LimitHom) -> Value {
    object(vec![("stage", usize_json(h.stage)), ("matrix", matrix_json(&h.matrix))])
}

/// `{"stage": s, "matrix": [[...]]}`, always flagged positive.
pub fn limit_hom_from_json(v: &Value, path: &str) -> Result<LimitHom, InputError> {
    let stage = index(field(v, "stage", path)?, &format!("{path}.stage"))?;
    let matrix = pos_matrix(field(v, "matrix", path)?, &format!("{path}.matrix"), None)?;
    Ok(LimitHom::positive(stage, matrix))
}

pub fn shen_to_json(s: &ShenFactoring) -> Value {
    object(vec![("phi", matrix_json(&s.phi)), ("thetaPrime", limit_hom_to_json(&s.theta_prime))])
}

pub fn verdict3_to_json(v: &Verdict3) -> Value {
    match v {
        Verdict3::Yes { stage } => object(vec![("verdict", "yes".into()), ("stage", usize_json(*stage))]),
        Verdict3::No { stage } => object(vec![("verdict", "no".into()), ("stage", usize_json(*stage))]),
        Verdict3::UnknownAtDepth { depth } => {
            object(vec![("verdict", "unknown".into()), ("depth", usize_json(*depth))])
        }
    }
}

/// Which encoding a document uses, judged by its keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Diagram,
    Certificate,
    Algebra,
    Hom,
    AfSequence,
    Zigzag,
    Equivalence,
}

impl DocumentKind {
    pub fn name(self) -> &'static str {
        match self {
            DocumentKind::Diagram => "diagram",
            DocumentKind::Certificate => "certificate",
            DocumentKind::Algebra => "algebra",
            DocumentKind::Hom => "hom",
            DocumentKind::AfSequence => "af-sequence",
            DocumentKind::Zigzag => "zigzag-witness",
            DocumentKind::Equivalence => "equivalence-witness",
        }
    }
}

pub fn document_kind(v: &Value) -> Result<DocumentKind, InputError> {
    let m = v.as_object().ok_or_else(|| invalid("$", "expected an object"))?;
    let kinds = [
        ("levels", DocumentKind::Diagram),
        ("stages", DocumentKind::Certificate),
        ("summands", DocumentKind::Algebra),
        ("mult", DocumentKind::Hom),
        ("algebras", DocumentKind::AfSequence),
        ("nStages", DocumentKind::Zigzag),
        ("steps", DocumentKind::Equivalence),
    ];
    kinds
        .iter()
        .find(|(key, _)| m.contains_key(*key))
        .map(|&(_, k)| k)
        .ok_or_else(|| invalid("$", "not a recognised document"))
}
