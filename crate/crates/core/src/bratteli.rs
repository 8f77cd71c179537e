//! Labeled Bratteli diagrams truncated at a finite depth.
//!
//! Edge matrices are oriented with rows indexed by the deeper level, so
//! `edges[k]` maps level `k` to level `k + 1` and the path matrix between
//! levels `k < k'` is the product `edges[k'-1] ... edges[k]`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::dimgroup::{self, DimCertificate, DimGroupError};
use crate::elliott::{self, ElliottError, ZigzagGoal, ZigzagOptions, ZigzagWitness};
use crate::findim::{AFSequence, FinDimError};
use crate::ordgrp::{self, IntMatrix, IntVector, OrdError, PosMatrix, SimplicialGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BratteliError {
    #[error("a diagram needs at least one level")]
    NoLevels,
    #[error("{levels} levels need {} edge matrices, got {edges}", levels.saturating_sub(1))]
    EdgeCount { levels: usize, edges: usize },
    #[error("level {level} is empty")]
    EmptyLevel { level: usize },
    #[error("edge matrix {gap} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    EdgeShape { gap: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("vertex {0} has a negative label")]
    NegativeLabel(Vertex),
    #[error("vertex {0} does not exist")]
    VertexOutOfRange(Vertex),
    #[error("level {level} is beyond depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("telescoping stages must start at 0")]
    SpecStart,
    #[error("telescoping stages are not strictly increasing at position {position}")]
    SpecNotIncreasing { position: usize },
    #[error("vertex {vertex} has label {label} but receives {inflow} from the level above")]
    Inconsistent { vertex: Vertex, label: BigInt, inflow: BigInt },
    #[error("vertex {vertex} has label {label}, not the unital value {inflow}")]
    NotUnital { vertex: Vertex, label: BigInt, inflow: BigInt },
    #[error("vertex {0} has label 0")]
    ZeroLabel(Vertex),
    #[error("level {level} has {count} vertices; telescope to one vertex per level first")]
    MultiVertexLevel { level: usize, count: usize },
    #[error("gap {gap} has no edges")]
    ZeroMultiplicity { gap: usize },
    #[error(transparent)]
    Ord(#[from] OrdError),
    #[error(transparent)]
    FinDim(#[from] FinDimError),
    #[error(transparent)]
    DimGroup(#[from] DimGroupError),
}

/// A vertex addressed as `(level, index)`, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub level: usize,
    pub index: usize,
}

impl Vertex {
    pub fn new(level: usize, index: usize) -> Self {
        Vertex { level, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledBratteliDiagram {
    levels: Vec<Vec<BigInt>>,
    edges: Vec<PosMatrix>,
    unital: bool,
}

impl LabeledBratteliDiagram {
    /// Checks shapes and, when `unital` is set, that every vertex below the top
    /// level carries exactly the label its in-edges deliver.
    pub fn new(levels: Vec<Vec<BigInt>>, edges: Vec<PosMatrix>, unital: bool) -> Result<Self, BratteliError> {
        if levels.is_empty() {
            return Err(BratteliError::NoLevels);
        }
        if edges.len() + 1 != levels.len() {
            return Err(BratteliError::EdgeCount { levels: levels.len(), edges: edges.len() });
        }
        for (level, labels) in levels.iter().enumerate() {
            if labels.is_empty() {
                return Err(BratteliError::EmptyLevel { level });
            }
            if let Some(index) = labels.iter().position(Signed::is_negative) {
                return Err(BratteliError::NegativeLabel(Vertex::new(level, index)));
            }
        }
        for (gap, e) in edges.iter().enumerate() {
            let (er, ec) = (levels[gap + 1].len(), levels[gap].len());
            if e.rows() != er || e.cols() != ec {
                return Err(BratteliError::EdgeShape {
                    gap,
                    rows: e.rows(),
                    cols: e.cols(),
                    expected_rows: er,
                    expected_cols: ec,
                });
            }
        }
        let d = LabeledBratteliDiagram { levels, edges, unital };
        if unital {
            if let Some((vertex, label, inflow)) = d.flow_violation(|l, i| l != i) {
                return Err(BratteliError::NotUnital { vertex, label, inflow });
            }
        }
        Ok(d)
    }

    pub fn from_i64s(levels: &[&[i64]], edges: Vec<PosMatrix>, unital: bool) -> Result<Self, BratteliError> {
        let levels = levels.iter().map(|l| l.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::new(levels, edges, unital)
    }

    pub fn levels(&self) -> &[Vec<BigInt>] {
        &self.levels
    }

    pub fn edges(&self) -> &[PosMatrix] {
        &self.edges
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.levels[level].len()
    }

    pub fn label(&self, v: Vertex) -> Result<&BigInt, BratteliError> {
        self.levels
            .get(v.level)
            .and_then(|l| l.get(v.index))
            .ok_or(BratteliError::VertexOutOfRange(v))
    }

    /// First vertex where `violates(label, inflow)` holds, top level excluded.
    fn flow_violation(&self, violates: impl Fn(&BigInt, &BigInt) -> bool) -> Option<(Vertex, BigInt, BigInt)> {
        for (gap, e) in self.edges.iter().enumerate() {
            let inflow = e.apply(&IntVector::new(self.levels[gap].clone())).expect("shapes checked");
            for (index, (label, got)) in self.levels[gap + 1].iter().zip(inflow.entries()).enumerate() {
                if violates(label, got) {
                    return Some((Vertex::new(gap + 1, index), label.clone(), got.clone()));
                }
            }
        }
        None
    }

    /// `Λ(v) >= Σ_u E(u,v) Λ(u)` at every vertex below the top level.
    pub fn check_consistency(&self) -> Result<(), BratteliError> {
        match self.flow_violation(|l, i| l < i) {
            Some((vertex, label, inflow)) => Err(BratteliError::Inconsistent { vertex, label, inflow }),
            None => Ok(()),
        }
    }

    /// Keep levels `0..=depth`.
    pub fn truncate(&self, depth: usize) -> LabeledBratteliDiagram {
        let d = depth.min(self.depth());
        LabeledBratteliDiagram {
            levels: self.levels[..=d].to_vec(),
            edges: self.edges[..d].to_vec(),
            unital: self.unital,
        }
    }

    /// Whether the top level is a single vertex labelled 1.
    pub fn is_pointed(&self) -> bool {
        self.levels[0].len() == 1 && self.levels[0][0].is_one()
    }

    /// Prepend a level `[1]` joined to each top vertex by as many edges as its label.
    pub fn rooted(&self) -> LabeledBratteliDiagram {
        let mut levels = vec![vec![BigInt::one()]];
        levels.extend(self.levels.iter().cloned());
        let root_edges = PosMatrix::new(IntMatrix::column(&IntVector::new(self.levels[0].clone())))
            .expect("labels are nonnegative");
        let mut edges = vec![root_edges];
        edges.extend(self.edges.iter().cloned());
        LabeledBratteliDiagram { levels, edges, unital: self.unital }
    }

    /// Inverse of [`rooted`](Self::rooted), when the diagram has that form.
    pub fn unrooted(&self) -> Option<LabeledBratteliDiagram> {
        if !self.is_pointed() || self.depth() == 0 {
            return None;
        }
        let expected = IntMatrix::column(&IntVector::new(self.levels[1].clone()));
        if self.edges[0].as_int() != &expected {
            return None;
        }
        Some(LabeledBratteliDiagram {
            levels: self.levels[1..].to_vec(),
            edges: self.edges[1..].to_vec(),
            unital: self.unital,
        })
    }
}

/// Selected levels `0 = n_0 < n_1 < ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TelescopeSpec(Vec<usize>);

impl TelescopeSpec {
    pub fn new(stages: Vec<usize>) -> Result<Self, BratteliError> {
        if stages.first() != Some(&0) {
            return Err(BratteliError::SpecStart);
        }
        if let Some(i) = stages.windows(2).position(|w| w[0] >= w[1]) {
            return Err(BratteliError::SpecNotIncreasing { position: i + 1 });
        }
        Ok(TelescopeSpec(stages))
    }

    pub fn identity(depth: usize) -> Self {
        TelescopeSpec((0..=depth).collect())
    }

    pub fn stages(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("nonempty")
    }

    /// The spec `s` with `telescope(telescope(D, self), inner) = telescope(D, s)`.
    pub fn then(&self, inner: &TelescopeSpec) -> Result<TelescopeSpec, BratteliError> {
        let stages = inner
            .0
            .iter()
            .map(|&i| {
                self.0
                    .get(i)
                    .copied()
                    .ok_or(BratteliError::LevelOutOfRange { level: i, depth: self.0.len() - 1 })
            })
            .collect::<Result<_, _>>()?;
        Ok(TelescopeSpec(stages))
    }
}

fn check_vertex(d: &LabeledBratteliDiagram, v: Vertex) -> Result<(), BratteliError> {
    d.label(v).map(|_| ())
}

/// Number of downward paths from `u` to `v`; zero unless `u` is strictly above `v`.
pub fn path_count(d: &LabeledBratteliDiagram, u: Vertex, v: Vertex) -> Result<BigInt, BratteliError> {
    check_vertex(d, u)?;
    check_vertex(d, v)?;
    if u.level >= v.level {
        return Ok(BigInt::zero());
    }
    let mut reach = IntVector::basis(d.level_size(u.level), u.index);
    for e in &d.edges[u.level..v.level] {
        reach = e.apply(&reach)?;
    }
    Ok(reach[v.index].clone())
}

/// `edges[k'-1] ... edges[k]`; the identity when `k = k'`.
pub fn path_matrix(d: &LabeledBratteliDiagram, k: usize, k2: usize) -> Result<PosMatrix, BratteliError> {
    if k2 > d.depth() {
        return Err(BratteliError::LevelOutOfRange { level: k2, depth: d.depth() });
    }
    if k > k2 {
        return Err(BratteliError::LevelOutOfRange { level: k, depth: k2 });
    }
    let mut acc = PosMatrix::identity(d.level_size(k));
    for e in &d.edges[k..k2] {
        acc = ordgrp::compose(e, &acc)?;
    }
    Ok(acc)
}

pub fn telescope(d: &LabeledBratteliDiagram, spec: &TelescopeSpec) -> Result<LabeledBratteliDiagram, BratteliError> {
    if spec.last() > d.depth() {
        return Err(BratteliError::LevelOutOfRange { level: spec.last(), depth: d.depth() });
    }
    let levels = spec.stages().iter().map(|&s| d.levels[s].clone()).collect();
    let edges = spec
        .stages()
        .windows(2)
        .map(|w| path_matrix(d, w[0], w[1]))
        .collect::<Result<_, _>>()?;
    Ok(LabeledBratteliDiagram { levels, edges, unital: d.unital })
}

/// Levels carry the (sorted) summand sizes, edges the multiplicity matrices.
pub fn diagram_of_af_sequence(seq: &AFSequence) -> Result<LabeledBratteliDiagram, BratteliError> {
    diagram_of_simplicial_tower(&dimgroup::certificate_of_af(seq)?)
}

/// Inverse of [`diagram_of_af_sequence`] on consistent diagrams with positive labels.
pub fn af_sequence_of_diagram(d: &LabeledBratteliDiagram) -> Result<AFSequence, BratteliError> {
    d.check_consistency()?;
    for (level, labels) in d.levels.iter().enumerate() {
        if let Some(index) = labels.iter().position(Zero::is_zero) {
            return Err(BratteliError::ZeroLabel(Vertex::new(level, index)));
        }
    }
    Ok(dimgroup::af_of_certificate(&certificate_of_diagram(d)?)?)
}

/// Standard diagram of a tower: labels are the unit entries, edges the bonds.
pub fn diagram_of_simplicial_tower(cert: &DimCertificate) -> Result<LabeledBratteliDiagram, BratteliError> {
    let levels = (0..=cert.depth())
        .map(|s| {
            cert.unit(s)
                .map(|u| u.entries().to_vec())
                .ok_or(DimGroupError::MissingUnit { stage: s })
        })
        .collect::<Result<_, _>>()?;
    LabeledBratteliDiagram::new(levels, cert.bonds().to_vec(), cert.is_unital())
}

/// Tower whose units are the labels; inverse of [`diagram_of_simplicial_tower`].
pub fn certificate_of_diagram(d: &LabeledBratteliDiagram) -> Result<DimCertificate, BratteliError> {
    let stages = d
        .levels
        .iter()
        .map(|l| SimplicialGroup::with_unit(IntVector::new(l.clone())))
        .collect::<Result<_, _>>()?;
    Ok(DimCertificate::new(stages, d.edges.clone(), d.unital)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplicityVerdict {
    /// Every vertex above the last level reaches a whole deeper level.
    WitnessedSimpleUpToDepth { depth: usize },
    /// `vertex` reaches no full level down to `depth`.
    NotFullyConnectedAtDepth { vertex: Vertex, depth: usize },
}

/// For each vertex above the bottom level, search for a level `m <= depth`
/// that it reaches entirely. Says nothing about the infinite diagram.
pub fn simplicity_window(d: &LabeledBratteliDiagram) -> SimplicityVerdict {
    let depth = d.depth();
    for level in 0..depth {
        for index in 0..d.level_size(level) {
            let mut reach = vec![false; d.level_size(level)];
            reach[index] = true;
            let mut full = false;
            for e in &d.edges[level..] {
                reach = (0..e.rows())
                    .map(|r| (0..e.cols()).any(|c| reach[c] && !e.get(r, c).is_zero()))
                    .collect();
                if reach.iter().all(|&b| b) {
                    full = true;
                    break;
                }
            }
            if !full {
                return SimplicityVerdict::NotFullyConnectedAtDepth { vertex: Vertex::new(level, index), depth };
            }
        }
    }
    SimplicityVerdict::WitnessedSimpleUpToDepth { depth }
}

/// Prime factorization of the product of all edge multiplicities of a
/// one-vertex-per-level diagram. This bounds the supernatural number from below.
pub fn supernatural_prefix(d: &LabeledBratteliDiagram) -> Result<BTreeMap<BigInt, u64>, BratteliError> {
    if let Some(level) = d.levels.iter().position(|l| l.len() != 1) {
        return Err(BratteliError::MultiVertexLevel { level, count: d.levels[level].len() });
    }
    let mut out = BTreeMap::new();
    for (gap, e) in d.edges.iter().enumerate() {
        let m = e.get(0, 0);
        if m.is_zero() {
            return Err(BratteliError::ZeroMultiplicity { gap });
        }
        for (p, k) in factorize(m) {
            *out.entry(p).or_insert(0) += k;
        }
    }
    Ok(out)
}

/// Trial division; fine for the multiplicities that occur in practice.
fn factorize(n: &BigInt) -> Vec<(BigInt, u64)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// Single vertex per level, each gap with `multiplicity` edges.
pub fn gen_uhf(multiplicity: u64, depth: usize) -> LabeledBratteliDiagram {
    let m = BigInt::from(multiplicity);
    let mut label = BigInt::one();
    let mut levels = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        levels.push(vec![label.clone()]);
        label *= &m;
    }
    let edge = PosMatrix::new(IntMatrix::column(&IntVector::new(vec![m]))).expect("nonnegative");
    LabeledBratteliDiagram { levels, edges: vec![edge; depth], unital: true }
}

/// Standard diagram of the CAR algebra: labels `2^s`, edges `[[2]]`.
pub fn gen_car(depth: usize) -> LabeledBratteliDiagram {
    gen_uhf(2, depth)
}

/// Halting behaviour of a partial function on inputs `0, 1, ...`: the number
/// of steps after which input `x` converges, or `None` for divergence. Inputs
/// past the end of the table diverge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HaltingTable {
    pub steps: Vec<Option<u64>>,
}

impl HaltingTable {
    pub fn new(steps: Vec<Option<u64>>) -> Self {
        HaltingTable { steps }
    }

    /// `x` lies in the domain at stage `s` iff `x < s` and it halts within `s` steps.
    pub fn in_domain(&self, x: usize, s: usize) -> bool {
        x < s && matches!(self.steps.get(x), Some(Some(t)) if *t <= s as u64)
    }

    /// Length of the initial segment of inputs that have converged by stage `s`.
    pub fn m(&self, s: usize) -> usize {
        (0..).take_while(|&x| self.in_domain(x, s)).count()
    }
}

/// The diagram whose simplicity tracks totality of the table.
///
/// Level `s + 1` has the vertices `{0}` when `m` grows from `s` to `s + 1` and
/// `{0, 1}` otherwise. A level without vertex 1 sends one edge from its vertex
/// 0 to every vertex below; otherwise `(s,0)` feeds `(s+1,0)` and `(s,1)` feeds
/// the last vertex of level `s + 1`. Labels count incoming paths from `(0,0)`.
pub fn gen_trace_diagram(halting: &HaltingTable, depth: usize) -> LabeledBratteliDiagram {
    let m: Vec<usize> = (0..=depth).map(|s| halting.m(s)).collect();
    let sizes: Vec<usize> = (0..=depth)
        .map(|s| if s == 0 || m[s - 1] < m[s] { 1 } else { 2 })
        .collect();
    let mut edges = Vec::with_capacity(depth);
    for s in 0..depth {
        let (above, below) = (sizes[s], sizes[s + 1]);
        let mut e = IntMatrix::zeros(below, above);
        if above == 1 {
            for j in 0..below {
                e.set(j, 0, BigInt::one());
            }
        } else {
            e.set(0, 0, BigInt::one());
            e.set(below - 1, 1, BigInt::one());
        }
        edges.push(PosMatrix::new(e).expect("nonnegative"));
    }
    let mut levels = vec![vec![BigInt::one()]];
    for e in &edges {
        let prev = IntVector::new(levels.last().expect("nonempty").clone());
        levels.push(e.apply(&prev).expect("shapes agree").into_entries());
    }
    LabeledBratteliDiagram { levels, edges, unital: true }
}

/// One move between diagrams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Relabel vertices: vertex `i` of level `k` becomes vertex `perms[k][i]`.
    Isomorphism { perms: Vec<Vec<usize>> },
    /// Replace the current diagram by its telescoping.
    Telescope { spec: TelescopeSpec },
    /// Replace the current diagram by `diagram`, of which it is the telescoping by `spec`.
    Expand { spec: TelescopeSpec, diagram: LabeledBratteliDiagram },
    /// Pass to [`LabeledBratteliDiagram::rooted`]; the AF algebra is unchanged.
    Root,
    /// Undo [`Step::Root`].
    Unroot,
}

/// A chain of steps turning one diagram into another.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquivalenceWitness {
    pub steps: Vec<Step>,
}

impl EquivalenceWitness {
    /// Apply every step to `start`, failing at the first step that does not apply.
    pub fn replay(&self, start: &LabeledBratteliDiagram) -> Result<LabeledBratteliDiagram, StepFailure> {
        let mut cur = start.clone();
        for (i, step) in self.steps.iter().enumerate() {
            cur = apply_step(&cur, step).ok_or(StepFailure { step: i })?;
        }
        Ok(cur)
    }

    pub fn verifies(&self, d1: &LabeledBratteliDiagram, d2: &LabeledBratteliDiagram) -> bool {
        self.replay(d1).is_ok_and(|d| &d == d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("step {step} does not apply")]
pub struct StepFailure {
    pub step: usize,
}

fn apply_step(cur: &LabeledBratteliDiagram, step: &Step) -> Option<LabeledBratteliDiagram> {
    match step {
        Step::Isomorphism { perms } => apply_isomorphism(cur, perms),
        Step::Telescope { spec } => telescope(cur, spec).ok(),
        Step::Expand { spec, diagram } => {
            (telescope(diagram, spec).ok().as_ref() == Some(cur)).then(|| diagram.clone())
        }
        Step::Root => Some(cur.rooted()),
        Step::Unroot => cur.unrooted(),
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

pub fn apply_isomorphism(d: &LabeledBratteliDiagram, perms: &[Vec<usize>]) -> Option<LabeledBratteliDiagram> {
    if perms.len() != d.levels.len() {
        return None;
    }
    for (k, p) in perms.iter().enumerate() {
        if p.len() != d.levels[k].len() || !is_permutation(p) {
            return None;
        }
    }
    let levels = d
        .levels
        .iter()
        .zip(perms)
        .map(|(labels, p)| {
            let mut out = labels.clone();
            for (i, &j) in p.iter().enumerate() {
                out[j] = labels[i].clone();
            }
            out
        })
        .collect();
    let edges = d
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut out = IntMatrix::zeros(e.rows(), e.cols());
            for r in 0..e.rows() {
                for c in 0..e.cols() {
                    out.set(perms[k + 1][r], perms[k][c], e.get(r, c).clone());
                }
            }
            PosMatrix::new(out).expect("nonnegative")
        })
        .collect();
    Some(LabeledBratteliDiagram { levels, edges, unital: d.unital })
}

/// Result of [`equivalence_search`]. Failing to find a witness is never a
/// proof of inequivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceOutcome {
    Witnessed(EquivalenceWitness),
    Unknown { budget_exhausted: bool },
}

/// Look for a chain of isomorphisms and telescopings from `d1` to `d2` that
/// uses every level of both diagrams.
///
/// Tries, in order: an isomorphism, `d2` as a telescoping of `d1`, `d1` as a
/// telescoping of `d2`, and finally a zigzag between the standard towers of
/// the two (rooted if needed), which yields the chain
/// `d1 -> tel(d1) <- Z -> tel(d2) <- d2` through the interleaved diagram `Z`.
pub fn equivalence_search(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    budget: usize,
) -> EquivalenceOutcome {
    let mut nodes = 0usize;
    if let Some(perms) = find_isomorphism(d1, d2, budget, &mut nodes) {
        return EquivalenceOutcome::Witnessed(EquivalenceWitness { steps: vec![Step::Isomorphism { perms }] });
    }
    if let Some(spec) = find_telescoping(d1, d2, budget, &mut nodes) {
        return EquivalenceOutcome::Witnessed(EquivalenceWitness { steps: vec![Step::Telescope { spec }] });
    }
    if let Some(spec) = find_telescoping(d2, d1, budget, &mut nodes) {
        return EquivalenceOutcome::Witnessed(EquivalenceWitness {
            steps: vec![Step::Expand { spec, diagram: d2.clone() }],
        });
    }
    let mut budget_exhausted = nodes > budget;
    if !budget_exhausted && d1.unital && d2.unital {
        match zigzag_chain(d1, d2, budget - nodes) {
            Ok(w) => return EquivalenceOutcome::Witnessed(w),
            Err(e) => {
                budget_exhausted = matches!(
                    e,
                    ElliottError::SeedNotFound { budget_exhausted: true }
                        | ElliottError::StageSearchExhausted { budget_exhausted: true, .. }
                );
            }
        }
    }
    EquivalenceOutcome::Unknown { budget_exhausted }
}

fn pointed(d: &LabeledBratteliDiagram) -> (LabeledBratteliDiagram, bool) {
    if d.is_pointed() {
        (d.clone(), false)
    } else {
        (d.rooted(), true)
    }
}

fn zigzag_chain(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    budget: usize,
) -> Result<EquivalenceWitness, ElliottError> {
    let (p1, root1) = pointed(d1);
    let (p2, root2) = pointed(d2);
    let to_cert = |d: &LabeledBratteliDiagram| certificate_of_diagram(d).map_err(|_| ElliottError::NotUnital { which: 'A' });
    let (a, b) = (to_cert(&p1)?, to_cert(&p2)?);
    let opts = ZigzagOptions { goal: ZigzagGoal::ExhaustBoth, budget, seed: None };
    let w = elliott::build_zigzag(&a, &b, &opts)?;
    let (z, a_pos, b_pos) = interleave(&w, &p1, &p2);
    let spec = |v: Vec<usize>| TelescopeSpec::new(v).expect("selections start at 0 and increase");
    let mut steps = Vec::new();
    if root1 {
        steps.push(Step::Root);
    }
    steps.push(Step::Telescope { spec: spec(w.n_stages.clone()) });
    steps.push(Step::Expand { spec: spec(a_pos), diagram: z });
    steps.push(Step::Telescope { spec: spec(b_pos) });
    steps.push(Step::Expand { spec: spec(w.m_stages.clone()), diagram: p2 });
    if root2 {
        steps.push(Step::Unroot);
    }
    Ok(EquivalenceWitness { steps })
}

/// The diagram `A_{n_0}=B_{m_0}, A_{n_1}, B_{m_1}, ...` of a zigzag between
/// pointed towers, with the positions of its `A` and `B` levels.
fn interleave(
    w: &ZigzagWitness,
    a: &LabeledBratteliDiagram,
    b: &LabeledBratteliDiagram,
) -> (LabeledBratteliDiagram, Vec<usize>, Vec<usize>) {
    let mut levels = vec![vec![BigInt::one()]];
    let mut edges = Vec::new();
    let (mut a_pos, mut b_pos) = (vec![0], vec![0]);
    for s in 0..w.beta.len() {
        levels.push(a.levels[w.n_stages[s + 1]].clone());
        edges.push(w.beta[s].clone());
        a_pos.push(levels.len() - 1);
        if let Some(al) = w.alpha.get(s + 1) {
            levels.push(b.levels[w.m_stages[s + 1]].clone());
            edges.push(al.clone());
            b_pos.push(levels.len() - 1);
        }
    }
    (LabeledBratteliDiagram { levels, edges, unital: true }, a_pos, b_pos)
}

fn find_isomorphism(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    budget: usize,
    nodes: &mut usize,
) -> Option<Vec<Vec<usize>>> {
    if d1.depth() != d2.depth() || d1.unital != d2.unital {
        return None;
    }
    if d1.levels.iter().zip(&d2.levels).any(|(x, y)| x.len() != y.len()) {
        return None;
    }
    let mut perms: Vec<Vec<usize>> = d1.levels.iter().map(|l| vec![usize::MAX; l.len()]).collect();
    let mut used: Vec<Vec<bool>> = d2.levels.iter().map(|l| vec![false; l.len()]).collect();
    iso_dfs(d1, d2, 0, 0, &mut perms, &mut used, budget, nodes).then_some(perms)
}

#[allow(clippy::too_many_arguments)]
fn iso_dfs(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    level: usize,
    index: usize,
    perms: &mut [Vec<usize>],
    used: &mut [Vec<bool>],
    budget: usize,
    nodes: &mut usize,
) -> bool {
    if level == d1.levels.len() {
        return true;
    }
    if index == d1.levels[level].len() {
        return iso_dfs(d1, d2, level + 1, 0, perms, used, budget, nodes);
    }
    for j in 0..d2.levels[level].len() {
        *nodes += 1;
        if *nodes > budget {
            return false;
        }
        if used[level][j] || d1.levels[level][index] != d2.levels[level][j] {
            continue;
        }
        if level > 0 {
            let (e1, e2) = (&d1.edges[level - 1], &d2.edges[level - 1]);
            if (0..e1.cols()).any(|c| e1.get(index, c) != e2.get(j, perms[level - 1][c])) {
                continue;
            }
        }
        perms[level][index] = j;
        used[level][j] = true;
        if iso_dfs(d1, d2, level, index + 1, perms, used, budget, nodes) {
            return true;
        }
        used[level][j] = false;
        perms[level][index] = usize::MAX;
    }
    false
}

/// A spec ending at the last level of `d1` with `telescope(d1, spec) = d2`.
fn find_telescoping(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    budget: usize,
    nodes: &mut usize,
) -> Option<TelescopeSpec> {
    if d1.unital != d2.unital || d2.depth() > d1.depth() || d1.levels[0] != d2.levels[0] {
        return None;
    }
    let mut stages = vec![0];
    tele_dfs(d1, d2, &mut stages, budget, nodes).then(|| TelescopeSpec(stages))
}

fn tele_dfs(
    d1: &LabeledBratteliDiagram,
    d2: &LabeledBratteliDiagram,
    stages: &mut Vec<usize>,
    budget: usize,
    nodes: &mut usize,
) -> bool {
    let k = stages.len();
    let prev = *stages.last().expect("nonempty");
    if k == d2.levels.len() {
        return prev == d1.depth();
    }
    let remaining = d2.levels.len() - k;
    let mut pm = path_matrix(d1, prev, prev).expect("in range");
    for next in prev + 1..=d1.depth() + 1 - remaining {
        *nodes += 1;
        if *nodes > budget {
            return false;
        }
        pm = ordgrp::compose(&d1.edges[next - 1], &pm).expect("shapes chain");
        if d1.levels[next] != d2.levels[k] || pm != d2.edges[k - 1] {
            continue;
        }
        stages.push(next);
        if tele_dfs(d1, d2, stages, budget, nodes) {
            return true;
        }
        stages.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::findim::{self, FinDimAlgebra};

    fn pm(rows: &[&[i64]]) -> PosMatrix {
        PosMatrix::from_i64s(rows)
    }

    fn small() -> LabeledBratteliDiagram {
        LabeledBratteliDiagram::from_i64s(
            &[&[1], &[1, 2], &[5]],
            vec![pm(&[&[1], &[2]]), pm(&[&[3, 1]])],
            true,
        )
        .unwrap()
    }

    fn spec(v: &[usize]) -> TelescopeSpec {
        TelescopeSpec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn path_counts() {
        let d = small();
        assert_eq!(path_count(&d, Vertex::new(1, 0), Vertex::new(1, 1)).unwrap(), BigInt::zero());
        assert_eq!(path_count(&d, Vertex::new(0, 0), Vertex::new(1, 1)).unwrap(), BigInt::from(2));
        assert_eq!(path_count(&d, Vertex::new(0, 0), Vertex::new(2, 0)).unwrap(), BigInt::from(5));
        assert_eq!(path_count(&d, Vertex::new(2, 0), Vertex::new(0, 0)).unwrap(), BigInt::zero());
        assert!(path_count(&d, Vertex::new(1, 2), Vertex::new(2, 0)).is_err());
    }

    #[test]
    fn path_matrices() {
        let d = small();
        assert_eq!(path_matrix(&d, 0, 1).unwrap(), d.edges()[0]);
        assert_eq!(path_matrix(&d, 0, 2).unwrap(), pm(&[&[5]]));
        assert_eq!(path_matrix(&gen_car(3), 0, 3).unwrap(), pm(&[&[8]]));
    }

    #[test]
    fn telescoping() {
        let car = gen_car(6);
        assert_eq!(telescope(&car, &TelescopeSpec::identity(6)).unwrap(), car);
        let t = telescope(&car, &spec(&[0, 2, 4, 6])).unwrap();
        assert!(t.edges().iter().all(|e| e == &pm(&[&[4]])));
        assert_eq!(t.levels()[3], vec![BigInt::from(64)]);
        let (s1, s2) = (spec(&[0, 1, 3, 4, 6]), spec(&[0, 2, 4]));
        assert_eq!(
            telescope(&telescope(&car, &s1).unwrap(), &s2).unwrap(),
            telescope(&car, &s1.then(&s2).unwrap()).unwrap()
        );
        assert_eq!(TelescopeSpec::new(vec![1, 2]), Err(BratteliError::SpecStart));
        assert_eq!(TelescopeSpec::new(vec![0, 2, 2]), Err(BratteliError::SpecNotIncreasing { position: 2 }));
        assert!(telescope(&car, &spec(&[0, 7])).is_err());
    }

    #[test]
    fn af_round_trips() {
        let car = gen_car(4);
        let seq = af_sequence_of_diagram(&car).unwrap();
        assert_eq!(diagram_of_af_sequence(&seq).unwrap(), car);

        let one = AFSequence::constant(FinDimAlgebra::matrix(3), 0);
        let d = diagram_of_af_sequence(&one).unwrap();
        assert_eq!(d.depth(), 0);
        assert_eq!(af_sequence_of_diagram(&d).unwrap(), one);

        let f = FinDimAlgebra::from_sizes(&[1]).unwrap();
        let g = FinDimAlgebra::from_sizes(&[1, 1]).unwrap();
        let h = findim::hom_from_matrix(&f, &g, pm(&[&[1], &[1]])).unwrap();
        let seq = AFSequence::new(vec![f, g], vec![h]).unwrap();
        let d = diagram_of_af_sequence(&seq).unwrap();
        assert_eq!(d.levels()[1], vec![BigInt::one(), BigInt::one()]);
        assert_eq!(af_sequence_of_diagram(&d).unwrap(), seq);

        let bad = LabeledBratteliDiagram::from_i64s(&[&[2], &[3]], vec![pm(&[&[2]])], false).unwrap();
        assert!(matches!(af_sequence_of_diagram(&bad), Err(BratteliError::Inconsistent { .. })));
    }

    #[test]
    fn towers_to_diagrams() {
        let car = DimCertificate::from_bonds_with_unit(IntVector::from_i64s(&[1]), vec![pm(&[&[2]])]).unwrap();
        assert_eq!(diagram_of_simplicial_tower(&car).unwrap(), gen_car(1));
        let t = DimCertificate::from_bonds_with_unit(IntVector::from_i64s(&[1, 1]), vec![pm(&[&[1, 1], &[0, 1]])])
            .unwrap();
        let d = diagram_of_simplicial_tower(&t).unwrap();
        assert_eq!(d.levels()[1], vec![BigInt::from(2), BigInt::one()]);
        let bare = DimCertificate::unitless(&[1], vec![]).unwrap();
        assert!(diagram_of_simplicial_tower(&bare).is_err());
    }

    #[test]
    fn unital_flag_is_checked() {
        let err = LabeledBratteliDiagram::from_i64s(&[&[1], &[3]], vec![pm(&[&[2]])], true);
        assert!(matches!(err, Err(BratteliError::NotUnital { .. })));
    }

    #[test]
    fn simplicity() {
        assert_eq!(simplicity_window(&gen_car(5)), SimplicityVerdict::WitnessedSimpleUpToDepth { depth: 5 });
        assert_eq!(simplicity_window(&gen_car(0)), SimplicityVerdict::WitnessedSimpleUpToDepth { depth: 0 });
    }

    #[test]
    fn supernatural() {
        let p = supernatural_prefix(&gen_car(5)).unwrap();
        assert_eq!(p, BTreeMap::from([(BigInt::from(2), 5)]));
        let d = LabeledBratteliDiagram::from_i64s(&[&[1], &[6], &[60]], vec![pm(&[&[6]]), pm(&[&[10]])], true)
            .unwrap();
        let p = supernatural_prefix(&d).unwrap();
        assert_eq!(p, BTreeMap::from([(BigInt::from(2), 2), (BigInt::from(3), 1), (BigInt::from(5), 1)]));
        assert!(supernatural_prefix(&gen_car(0)).unwrap().is_empty());
        assert!(matches!(supernatural_prefix(&small()), Err(BratteliError::MultiVertexLevel { level: 1, .. })));
    }

    #[test]
    fn generators() {
        assert_eq!(gen_car(0).levels(), &[vec![BigInt::one()]]);
        let labels: Vec<_> = gen_car(2).levels().iter().map(|l| l[0].clone()).collect();
        assert_eq!(labels, [1, 2, 4].map(BigInt::from));
        assert_eq!(telescope(&gen_car(2), &spec(&[0, 2])).unwrap().edges()[0], pm(&[&[4]]));
    }

    fn sizes(d: &LabeledBratteliDiagram) -> Vec<usize> {
        d.levels().iter().map(Vec::len).collect()
    }

    #[test]
    fn trace_diagram_rules() {
        // Instant halting: m_s = s grows at every step, so every level is {0}.
        let instant = HaltingTable::new(vec![Some(0); 10]);
        assert_eq!((0..6).map(|s| instant.m(s)).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
        let d = gen_trace_diagram(&instant, 5);
        assert_eq!(sizes(&d), vec![1; 6]);
        assert!(d.levels().iter().all(|l| l[0].is_one()));

        let never = HaltingTable::new(vec![None; 10]);
        let d = gen_trace_diagram(&never, 4);
        assert_eq!(sizes(&d), vec![1, 2, 2, 2, 2]);
        assert_eq!(d.edges()[1], pm(&[&[1, 0], &[0, 1]]));

        let d = gen_trace_diagram(&never, 0);
        assert_eq!(d.levels(), &[vec![BigInt::one()]]);
    }

    fn slow_table(len: usize, missing: Option<usize>) -> HaltingTable {
        HaltingTable::new((0..len).map(|x| (Some(x) != missing).then_some(2 * x as u64 + 2)).collect())
    }

    #[test]
    fn slow_total_table_telescopes_to_car() {
        let d = gen_trace_diagram(&slow_table(20, None), 8);
        assert_eq!(sizes(&d), vec![1, 2, 1, 2, 1, 2, 1, 2, 1]);
        assert_eq!(telescope(&d, &spec(&[0, 2, 4, 6, 8])).unwrap(), gen_car(4));
        assert_eq!(simplicity_window(&d), SimplicityVerdict::WitnessedSimpleUpToDepth { depth: 8 });
    }

    #[test]
    fn stalled_trace_blocks_simplicity() {
        let table = slow_table(20, Some(2));
        let s0 = 4;
        assert!((s0..12).all(|s| table.m(s) == table.m(s0)) && table.m(s0 - 1) < table.m(s0));
        let d = gen_trace_diagram(&table, 10);
        let blocked = Vertex::new(s0 + 1, 0);
        assert_eq!(
            simplicity_window(&d),
            SimplicityVerdict::NotFullyConnectedAtDepth { vertex: blocked, depth: 10 }
        );
        for s in s0 + 2..=10 {
            assert_eq!(path_count(&d, blocked, Vertex::new(s, 1)).unwrap(), BigInt::zero());
        }
    }

    #[test]
    fn rooting() {
        let d = small();
        let r = d.rooted();
        assert_eq!(r.depth(), 3);
        assert_eq!(r.unrooted().unwrap(), d);
        let split = LabeledBratteliDiagram::from_i64s(&[&[1, 1], &[4]], vec![pm(&[&[2, 2]])], true).unwrap();
        assert!(split.unrooted().is_none());
        let loose = LabeledBratteliDiagram::from_i64s(&[&[1], &[3]], vec![pm(&[&[2]])], false).unwrap();
        assert!(loose.unrooted().is_none());
    }

    #[test]
    fn isomorphism_search() {
        let d = LabeledBratteliDiagram::from_i64s(
            &[&[1], &[1, 2], &[3, 5]],
            vec![pm(&[&[1], &[2]]), pm(&[&[1, 1], &[1, 2]])],
            true,
        )
        .unwrap();
        let perms = vec![vec![0], vec![1, 0], vec![1, 0]];
        let e = apply_isomorphism(&d, &perms).unwrap();
        match equivalence_search(&d, &e, 1000) {
            EquivalenceOutcome::Witnessed(w) => {
                assert!(w.verifies(&d, &e));
                assert!(matches!(w.steps[..], [Step::Isomorphism { .. }]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equivalence_examples() {
        let car = gen_car(6);
        let t = telescope(&car, &spec(&[0, 2, 4, 6])).unwrap();
        let EquivalenceOutcome::Witnessed(w) = equivalence_search(&car, &t, 1000) else { panic!() };
        assert_eq!(w.steps, vec![Step::Telescope { spec: spec(&[0, 2, 4, 6]) }]);
        let EquivalenceOutcome::Witnessed(w) = equivalence_search(&t, &car, 1000) else { panic!() };
        assert!(w.verifies(&t, &car));

        let three = gen_uhf(3, 6);
        assert_eq!(equivalence_search(&car, &three, 100_000), EquivalenceOutcome::Unknown { budget_exhausted: false });
    }

    #[test]
    fn equivalence_through_zigzag() {
        // Neither is a telescoping of the other, but the towers interleave.
        let a = telescope(&gen_car(6), &spec(&[0, 1, 3, 6])).unwrap();
        let b = telescope(&gen_car(6), &spec(&[0, 2, 4, 6])).unwrap();
        let EquivalenceOutcome::Witnessed(w) = equivalence_search(&a, &b, 100_000) else { panic!() };
        assert!(w.steps.len() >= 4);
        assert!(w.verifies(&a, &b));

        // Top levels other than [1] go through rooting.
        let m2 = LabeledBratteliDiagram::from_i64s(&[&[2], &[4], &[8]], vec![pm(&[&[2]]); 2], true).unwrap();
        let m2t = LabeledBratteliDiagram::from_i64s(&[&[2], &[8]], vec![pm(&[&[4]])], true).unwrap();
        let EquivalenceOutcome::Witnessed(w) = equivalence_search(&m2, &m2t, 100_000) else { panic!() };
        assert!(w.verifies(&m2, &m2t));
        let split = LabeledBratteliDiagram::from_i64s(&[&[1, 1], &[4]], vec![pm(&[&[2, 2]])], true).unwrap();
        let whole = LabeledBratteliDiagram::from_i64s(&[&[2], &[4]], vec![pm(&[&[2]])], true).unwrap();
        let EquivalenceOutcome::Witnessed(w) = equivalence_search(&split, &whole, 100_000) else { panic!() };
        assert_eq!(w.steps.first(), Some(&Step::Root));
        assert_eq!(w.steps.last(), Some(&Step::Unroot));
        assert!(w.verifies(&split, &whole));
    }

    #[test]
    fn replay_rejects_bad_steps() {
        let car = gen_car(3);
        let w = EquivalenceWitness { steps: vec![Step::Unroot] };
        assert!(w.replay(&car).is_ok());
        let w = EquivalenceWitness { steps: vec![Step::Expand { spec: spec(&[0, 1]), diagram: gen_car(1) }] };
        assert_eq!(w.replay(&car), Err(StepFailure { step: 0 }));
    }
}
