//! Elliott intertwining between two unital towers at finite depth.
//!
//! A [`ZigzagWitness`] records stage selections `n_0 < n_1 < ...` into tower
//! `A` (bonds `f`) and `m_0 < m_1 < ...` into tower `B` (bonds `g`) together
//! with positive maps
//!
//! ```text
//! A_{n_0} --α_0--> B_{m_0} --β_0--> A_{n_1} --α_1--> B_{m_1} --β_1--> ...
//! ```
//!
//! satisfying `β_s α_s = f_{n_s,n_{s+1}}` and `α_{s+1} β_s = g_{m_s,m_{s+1}}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dimgroup::{self, DimCertificate, DimGroupError, LimitElement, LimitHom, Verdict3};
use crate::findim::{self, AFSequence, AlgebraHom, FinDimError};
use crate::ordgrp::{self, IntMatrix, IntVector, OrdError, PosMatrix};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElliottError {
    #[error("tower {which} is not unital")]
    NotUnital { which: char },
    #[error("tower {which} has a unit with a zero component at stage {stage}")]
    NotStrictUnit { which: char, stage: usize },
    #[error("seed does not map the unit of A_0 to the unit of B_0")]
    SeedNotUnitPreserving,
    #[error("no unit-preserving seed completes a first round{}", budget_note(*budget_exhausted))]
    SeedNotFound { budget_exhausted: bool },
    #[error("search stopped after {achieved} complete rounds{}", budget_note(*budget_exhausted))]
    StageSearchExhausted { partial: Box<ZigzagWitness>, achieved: usize, budget_exhausted: bool },
    #[error("no push of the anchor map is positive within depth {depth}")]
    LiftNotFound { depth: usize },
    #[error("the lifting defect survives to depth {depth}")]
    DefectNotKilled { depth: usize },
    #[error("the anchor map does not factor the canonical map on basis vector {basis} within depth")]
    PreconditionFailed { basis: usize },
    #[error(transparent)]
    DimGroup(#[from] DimGroupError),
    #[error(transparent)]
    FinDim(#[from] FinDimError),
    #[error(transparent)]
    Ord(#[from] OrdError),
}

fn budget_note(hit: bool) -> &'static str {
    if hit {
        " (node budget exhausted)"
    } else {
        ""
    }
}

/// Zigzag data; see the module docs for the identities it must satisfy.
///
/// A complete witness ends with an `α` (`alpha.len() == beta.len() + 1`);
/// one that ends with a `β` has equal lengths. `n_stages` and `m_stages` list
/// exactly the stages the maps touch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZigzagWitness {
    pub n_stages: Vec<usize>,
    pub m_stages: Vec<usize>,
    pub alpha: Vec<PosMatrix>,
    pub beta: Vec<PosMatrix>,
}

impl ZigzagWitness {
    /// Number of `β` maps, i.e. of full returns to tower `A`.
    pub fn rounds(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty() && self.beta.is_empty()
    }

    fn maps(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }

    /// The same zigzag read from `B` to `A`, dropping `α_0`:
    /// `α'_s = β_s`, `β'_s = α_{s+1}`, `n' = m`, `m'_s = n_{s+1}`.
    pub fn swap(&self) -> ZigzagWitness {
        if self.is_empty() {
            return ZigzagWitness::default();
        }
        ZigzagWitness {
            n_stages: self.m_stages.clone(),
            m_stages: self.n_stages[1..].to_vec(),
            alpha: self.beta.clone(),
            beta: self.alpha[1..].to_vec(),
        }
    }
}

/// Which identity of a witness failed, and where.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZigzagFailure {
    #[error("inconsistent lengths: {0}")]
    Lengths(String),
    #[error("{which} stages are not strictly increasing at position {index}")]
    StageOrder { which: char, index: usize },
    #[error("{which} stage {stage} exceeds the tower depth")]
    StageRange { which: char, stage: usize },
    #[error("{map}_{index} has the wrong shape")]
    Shape { map: &'static str, index: usize },
    #[error("beta_{index} alpha_{index} differs from the A bond product at entry ({row},{col})")]
    BetaAlpha { index: usize, row: usize, col: usize },
    #[error("alpha_{} beta_{index} differs from the B bond product at entry ({row},{col})", index + 1)]
    AlphaBeta { index: usize, row: usize, col: usize },
    #[error("{map}_{index} does not preserve units")]
    Unit { map: &'static str, index: usize },
}

/// Re-derive every identity of `w` by exact arithmetic.
pub fn verify_zigzag(
    w: &ZigzagWitness,
    a: &DimCertificate,
    b: &DimCertificate,
) -> Result<(), ZigzagFailure> {
    if w.is_empty() {
        return if w.n_stages.is_empty() && w.m_stages.is_empty() {
            Ok(())
        } else {
            Err(ZigzagFailure::Lengths("stages without maps".into()))
        };
    }
    let (na, nb) = (w.alpha.len(), w.beta.len());
    if !(nb == na || nb + 1 == na) {
        return Err(ZigzagFailure::Lengths(format!("{na} alpha maps and {nb} beta maps")));
    }
    let n_len = if nb == na { na + 1 } else { na };
    if w.n_stages.len() != n_len || w.m_stages.len() != na {
        return Err(ZigzagFailure::Lengths(format!(
            "{} A stages and {} B stages for {na} alpha and {nb} beta maps",
            w.n_stages.len(),
            w.m_stages.len()
        )));
    }
    check_stages('n', &w.n_stages, a.depth())?;
    check_stages('m', &w.m_stages, b.depth())?;
    let shape = |m: &PosMatrix, rows: usize, cols: usize| m.rows() == rows && m.cols() == cols;
    for (s, al) in w.alpha.iter().enumerate() {
        if !shape(al, b.rank(w.m_stages[s]), a.rank(w.n_stages[s])) {
            return Err(ZigzagFailure::Shape { map: "alpha", index: s });
        }
    }
    for (s, be) in w.beta.iter().enumerate() {
        if !shape(be, a.rank(w.n_stages[s + 1]), b.rank(w.m_stages[s])) {
            return Err(ZigzagFailure::Shape { map: "beta", index: s });
        }
    }
    for s in 0..nb {
        let lhs = ordgrp::compose(&w.beta[s], &w.alpha[s]).expect("shapes checked");
        let rhs = a.bond_product(w.n_stages[s], w.n_stages[s + 1]).expect("stages checked");
        if let Some((row, col)) = first_difference(&lhs, &rhs) {
            return Err(ZigzagFailure::BetaAlpha { index: s, row, col });
        }
        if s + 1 < na {
            let lhs = ordgrp::compose(&w.alpha[s + 1], &w.beta[s]).expect("shapes checked");
            let rhs = b.bond_product(w.m_stages[s], w.m_stages[s + 1]).expect("stages checked");
            if let Some((row, col)) = first_difference(&lhs, &rhs) {
                return Err(ZigzagFailure::AlphaBeta { index: s, row, col });
            }
        }
    }
    if a.unit(0).is_some() && b.unit(0).is_some() {
        for (s, al) in w.alpha.iter().enumerate() {
            let img = al.apply(a.unit(w.n_stages[s]).expect("unital")).expect("shapes checked");
            if Some(&img) != b.unit(w.m_stages[s]) {
                return Err(ZigzagFailure::Unit { map: "alpha", index: s });
            }
        }
        for (s, be) in w.beta.iter().enumerate() {
            let img = be.apply(b.unit(w.m_stages[s]).expect("unital")).expect("shapes checked");
            if Some(&img) != a.unit(w.n_stages[s + 1]) {
                return Err(ZigzagFailure::Unit { map: "beta", index: s });
            }
        }
    }
    Ok(())
}

fn check_stages(which: char, stages: &[usize], depth: usize) -> Result<(), ZigzagFailure> {
    for (i, pair) in stages.windows(2).enumerate() {
        if pair[0] >= pair[1] {
            return Err(ZigzagFailure::StageOrder { which, index: i + 1 });
        }
    }
    match stages.iter().find(|&&s| s > depth) {
        Some(&stage) => Err(ZigzagFailure::StageRange { which, stage }),
        None => Ok(()),
    }
}

fn first_difference(x: &IntMatrix, y: &IntMatrix) -> Option<(usize, usize)> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Some((0, 0));
    }
    (0..x.rows())
        .flat_map(|r| (0..x.cols()).map(move |c| (r, c)))
        .find(|&(r, c)| x.get(r, c) != y.get(r, c))
}

/// When the search may stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZigzagGoal {
    /// Exactly this many `β` maps, ending with an `α`.
    Rounds(usize),
    /// End with the last stage of both towers selected, so neither prefix
    /// has unused levels.
    ExhaustBoth,
}

#[derive(Debug, Clone)]
pub struct ZigzagOptions {
    pub goal: ZigzagGoal,
    pub budget: usize,
    pub seed: Option<PosMatrix>,
}

impl Default for ZigzagOptions {
    fn default() -> Self {
        ZigzagOptions { goal: ZigzagGoal::ExhaustBoth, budget: DEFAULT_BUDGET, seed: None }
    }
}

impl ZigzagOptions {
    pub fn rounds(rounds: usize) -> Self {
        ZigzagOptions { goal: ZigzagGoal::Rounds(rounds), ..Self::default() }
    }
}

/// Search for a zigzag between two unital towers with `n_0 = m_0 = 0`.
///
/// Candidates are ordered by target stage and then lexicographically by
/// matrix entries (row-major), and the search backtracks, so the result is the
/// least witness meeting the goal. Entries are bounded by the target unit,
/// which loses nothing because units are strictly positive.
pub fn build_zigzag(
    a: &DimCertificate,
    b: &DimCertificate,
    opts: &ZigzagOptions,
) -> Result<ZigzagWitness, ElliottError> {
    check_unital(a, 'A')?;
    check_unital(b, 'B')?;
    let mut engine = Engine {
        a,
        b,
        goal: opts.goal,
        budget: Budget::new(opts.budget),
        cur: ZigzagWitness::default(),
        best: ZigzagWitness::default(),
    };
    let found = match &opts.seed {
        Some(seed) => {
            if seed.rows() != b.rank(0) || seed.cols() != a.rank(0) {
                return Err(ElliottError::SeedNotUnitPreserving);
            }
            if &seed.apply(unit(a, 0))? != unit(b, 0) {
                return Err(ElliottError::SeedNotUnitPreserving);
            }
            engine.push(Map::Alpha, 0, seed.clone())
        }
        None => engine.seeds(),
    };
    if found {
        return Ok(engine.cur);
    }
    let budget_exhausted = engine.budget.hit;
    let best = engine.best;
    if best.alpha.len() >= 2 {
        let achieved = best.alpha.len() - 1;
        Err(ElliottError::StageSearchExhausted { partial: Box::new(best), achieved, budget_exhausted })
    } else {
        Err(ElliottError::SeedNotFound { budget_exhausted })
    }
}

fn check_unital(c: &DimCertificate, which: char) -> Result<(), ElliottError> {
    if !c.is_unital() {
        return Err(ElliottError::NotUnital { which });
    }
    for s in 0..=c.depth() {
        if !ordgrp::is_order_unit(c.unit(s).ok_or(ElliottError::NotUnital { which })?) {
            return Err(ElliottError::NotStrictUnit { which, stage: s });
        }
    }
    Ok(())
}

fn unit(c: &DimCertificate, s: usize) -> &IntVector {
    c.unit(s).expect("checked unital")
}

struct Budget {
    limit: usize,
    used: usize,
    hit: bool,
}

impl Budget {
    fn new(limit: usize) -> Self {
        Budget { limit, used: 0, hit: false }
    }

    fn tick(&mut self) -> bool {
        self.used += 1;
        if self.used > self.limit {
            self.hit = true;
        }
        !self.hit
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Map {
    Alpha,
    Beta,
}

struct Engine<'c> {
    a: &'c DimCertificate,
    b: &'c DimCertificate,
    goal: ZigzagGoal,
    budget: Budget,
    cur: ZigzagWitness,
    best: ZigzagWitness,
}

impl Engine<'_> {
    fn goal_met(&self) -> bool {
        let w = &self.cur;
        match self.goal {
            ZigzagGoal::Rounds(r) => w.beta.len() == r && w.alpha.len() == r + 1,
            ZigzagGoal::ExhaustBoth => {
                !w.alpha.is_empty()
                    && w.n_stages.last() == Some(&self.a.depth())
                    && w.m_stages.last() == Some(&self.b.depth())
            }
        }
    }

    fn seeds(&mut self) -> bool {
        let u0 = unit(self.a, 0).clone();
        let v0 = unit(self.b, 0).clone();
        let mut rows = Vec::with_capacity(v0.len());
        for i in 0..v0.len() {
            match solve_row(None, None, &u0, &v0[i], &mut self.budget) {
                Some(sols) if !sols.is_empty() => rows.push(sols),
                _ => return false,
            }
        }
        self.product(&rows, &mut Vec::new(), Map::Alpha, 0)
    }

    fn push(&mut self, map: Map, stage: usize, m: PosMatrix) -> bool {
        match map {
            Map::Alpha => {
                self.cur.alpha.push(m);
                if self.cur.n_stages.is_empty() {
                    self.cur.n_stages.push(0);
                }
                self.cur.m_stages.push(stage);
            }
            Map::Beta => {
                self.cur.beta.push(m);
                self.cur.n_stages.push(stage);
            }
        }
        if self.cur.maps() > self.best.maps() {
            self.best = self.cur.clone();
        }
        if self.extend() {
            return true;
        }
        match map {
            Map::Alpha => {
                self.cur.alpha.pop();
                self.cur.m_stages.pop();
                if self.cur.alpha.is_empty() {
                    self.cur.n_stages.clear();
                }
            }
            Map::Beta => {
                self.cur.beta.pop();
                self.cur.n_stages.pop();
            }
        }
        false
    }

    fn extend(&mut self) -> bool {
        if self.goal_met() {
            return true;
        }
        if self.budget.hit {
            return false;
        }
        if let ZigzagGoal::Rounds(r) = self.goal {
            if self.cur.beta.len() >= r && self.cur.alpha.len() > r {
                return false;
            }
        }
        let next_is_beta = self.cur.alpha.len() == self.cur.beta.len() + 1;
        // Source tower S receives the new map, T holds its domain stage.
        let (map, s_tower, from, gamma, w) = if next_is_beta {
            let s = self.cur.beta.len();
            (
                Map::Beta,
                self.a,
                self.cur.n_stages[s],
                self.cur.alpha[s].clone(),
                unit(self.b, self.cur.m_stages[s]).clone(),
            )
        } else {
            let s = self.cur.beta.len() - 1;
            (
                Map::Alpha,
                self.b,
                self.cur.m_stages[s],
                self.cur.beta[s].clone(),
                unit(self.a, self.cur.n_stages[s + 1]).clone(),
            )
        };
        for k in from + 1..=s_tower.depth() {
            if !self.budget.tick() {
                return false;
            }
            let target = s_tower.bond_product(from, k).expect("stages in range");
            let uk = unit(s_tower, k).clone();
            let mut rows = Vec::with_capacity(uk.len());
            for i in 0..uk.len() {
                match solve_row(Some(gamma.as_int()), Some(target.row(i)), &w, &uk[i], &mut self.budget) {
                    Some(sols) if !sols.is_empty() => rows.push(sols),
                    Some(_) => break,
                    None => return false,
                }
            }
            if rows.len() == uk.len() && self.product(&rows, &mut Vec::new(), map, k) {
                return true;
            }
        }
        false
    }

    fn product(&mut self, rows: &[Vec<Vec<BigInt>>], acc: &mut Vec<Vec<BigInt>>, map: Map, stage: usize) -> bool {
        if acc.len() == rows.len() {
            if !self.budget.tick() {
                return false;
            }
            let cols = rows.first().map_or(0, |r| r[0].len());
            let m = PosMatrix::from_rows(acc.clone(), cols).expect("solutions are nonnegative");
            return self.push(map, stage, m);
        }
        for sol in &rows[acc.len()] {
            acc.push(sol.clone());
            let done = self.product(rows, acc, map, stage);
            acc.pop();
            if done {
                return true;
            }
            if self.budget.hit {
                return false;
            }
        }
        false
    }
}

/// All `x >= 0` with `x·w = unit` and, when given, `x·gamma = target`, in
/// lexicographic order. `None` when the budget ran out.
fn solve_row(
    gamma: Option<&IntMatrix>,
    target: Option<&[BigInt]>,
    w: &IntVector,
    unit: &BigInt,
    budget: &mut Budget,
) -> Option<Vec<Vec<BigInt>>> {
    let p = w.len();
    let r = target.map_or(0, <[BigInt]>::len);
    let mut out = Vec::new();
    let mut x = Vec::with_capacity(p);
    let mut acc = vec![BigInt::zero(); r];
    row_dfs(gamma, target, w, unit.clone(), &mut x, &mut acc, &mut out, budget)?;
    Some(out)
}

#[allow(clippy::too_many_arguments)]
fn row_dfs(
    gamma: Option<&IntMatrix>,
    target: Option<&[BigInt]>,
    w: &IntVector,
    rem: BigInt,
    x: &mut Vec<BigInt>,
    acc: &mut [BigInt],
    out: &mut Vec<Vec<BigInt>>,
    budget: &mut Budget,
) -> Option<()> {
    if !budget.tick() {
        return None;
    }
    let l = x.len();
    let p = w.len();
    if p == 0 {
        return Some(());
    }
    let add = |acc: &mut [BigInt], coeff: &BigInt, sign: bool| {
        if let Some(g) = gamma {
            for (c, a) in acc.iter_mut().enumerate() {
                let d = coeff * g.get(l, c);
                if sign {
                    *a += d;
                } else {
                    *a -= d;
                }
            }
        }
    };
    let fits = |acc: &[BigInt]| target.is_none_or(|t| acc.iter().zip(t).all(|(a, b)| a <= b));
    if l + 1 == p {
        let (q, rest) = rem.div_rem(&w[l]);
        if !rest.is_zero() || q.is_negative() {
            return Some(());
        }
        add(acc, &q, true);
        if target.is_none_or(|t| acc == t) {
            x.push(q.clone());
            out.push(x.clone());
            x.pop();
        }
        add(acc, &q, false);
        return Some(());
    }
    let max = &rem / &w[l];
    let mut xl = BigInt::zero();
    while xl <= max {
        add(acc, &xl, true);
        let ok = fits(acc);
        if ok {
            x.push(xl.clone());
            let res = row_dfs(gamma, target, w, &rem - &xl * &w[l], x, acc, out, budget);
            x.pop();
            if res.is_none() {
                add(acc, &xl, false);
                return None;
            }
        }
        add(acc, &xl, false);
        if !ok {
            break;
        }
        xl += 1;
    }
    Some(())
}

/// Lift a positive map `μ = ν_{stage} ∘ M` through the bonds of `cert`.
///
/// Given `γ: G_r -> Z^p` with `ν_r = μ ∘ γ`, returns the least `t >= min_t`
/// reached by the construction together with a positive `δ: Z^p -> G_t` such
/// that `δ γ = φ_{r,t}` and `ν_t δ = μ`. The lift is `φ_{stage,t'} M` at the
/// first `t' >= max(stage, r, min_t)` where it is positive; the defect
/// `φ_{r,t'} - δ'γ` is then pushed until it vanishes.
pub fn intertwine_stage(
    cert: &DimCertificate,
    mu: &LimitHom,
    gamma: &PosMatrix,
    r: usize,
    min_t: usize,
) -> Result<(usize, PosMatrix), ElliottError> {
    if !mu.positive {
        return Err(DimGroupError::NotPositive.into());
    }
    let depth = cert.depth();
    if r > depth || mu.stage > depth {
        return Err(DimGroupError::StageOutOfRange { stage: r.max(mu.stage), depth }.into());
    }
    if gamma.rows() != mu.source_rank() || gamma.cols() != cert.rank(r) {
        return Err(OrdError::DimensionMismatch { expected: mu.source_rank(), found: gamma.rows() }.into());
    }
    for j in 0..cert.rank(r) {
        let e = IntVector::basis(cert.rank(r), j);
        let lhs = LimitElement::new(r, e.clone());
        let rhs = mu.image(&gamma.apply(&e)?)?;
        if !matches!(dimgroup::eq_at_depth(cert, &lhs, &rhs)?, Verdict3::Yes { .. }) {
            return Err(ElliottError::PreconditionFailed { basis: j });
        }
    }
    let start = mu.stage.max(r).max(min_t);
    if start > depth {
        return Err(ElliottError::LiftNotFound { depth });
    }
    let mut lift = cert.push_matrix(&mu.matrix, mu.stage, start)?;
    let mut t_lift = start;
    while !lift.is_nonnegative() {
        if t_lift == depth {
            return Err(ElliottError::LiftNotFound { depth });
        }
        lift = cert.bonds()[t_lift].as_int().mul(&lift)?;
        t_lift += 1;
    }
    let mut defect = cert.bond_product(r, t_lift)?.as_int().checked_sub(&lift.mul(gamma.as_int())?)?;
    let mut t = t_lift;
    while !defect.is_zero() {
        if t == depth {
            return Err(ElliottError::DefectNotKilled { depth });
        }
        defect = cert.bonds()[t].as_int().mul(&defect)?;
        lift = cert.bonds()[t].as_int().mul(&lift)?;
        t += 1;
    }
    Ok((t, PosMatrix::new(lift)?))
}

/// Algebra-level shadow of a zigzag: the AF sequences of both towers and the
/// connecting homomorphisms `σ_s: A_{n_s} -> B_{m_s}`, `τ_s: B_{m_s} -> A_{n_{s+1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagRealization {
    pub a: AFSequence,
    pub b: AFSequence,
    pub sigma: Vec<AlgebraHom>,
    pub tau: Vec<AlgebraHom>,
}

pub fn realize_zigzag(
    w: &ZigzagWitness,
    a: &DimCertificate,
    b: &DimCertificate,
) -> Result<ZigzagRealization, ElliottError> {
    let seq_a = dimgroup::af_of_certificate(a)?;
    let seq_b = dimgroup::af_of_certificate(b)?;
    let perm = |c: &DimCertificate, s: usize| findim::sorting_permutation(unit(c, s).entries());
    let sigma = w
        .alpha
        .iter()
        .enumerate()
        .map(|(s, al)| {
            let (n, m) = (w.n_stages[s], w.m_stages[s]);
            findim::hom_from_matrix(
                &seq_a.algebras()[n],
                &seq_b.algebras()[m],
                al.select(&perm(b, m), &perm(a, n)),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tau = w
        .beta
        .iter()
        .enumerate()
        .map(|(s, be)| {
            let (m, n) = (w.m_stages[s], w.n_stages[s + 1]);
            findim::hom_from_matrix(
                &seq_b.algebras()[m],
                &seq_a.algebras()[n],
                be.select(&perm(a, n), &perm(b, m)),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ZigzagRealization { a: seq_a, b: seq_b, sigma, tau })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uhf(m: i64, depth: usize) -> DimCertificate {
        DimCertificate::from_bonds_with_unit(IntVector::from_i64s(&[1]), vec![PosMatrix::from_i64s(&[&[m]]); depth])
            .unwrap()
    }

    fn pm(x: i64) -> PosMatrix {
        PosMatrix::from_i64s(&[&[x]])
    }

    #[test]
    fn self_intertwining_of_car() {
        let car = uhf(2, 6);
        let w = build_zigzag(&car, &car, &ZigzagOptions::rounds(4)).unwrap();
        assert_eq!(w.n_stages, vec![0, 1, 2, 3, 4]);
        assert_eq!(w.m_stages, vec![0, 1, 2, 3, 4]);
        assert!(w.alpha.iter().all(|m| m == &pm(1)));
        assert!(w.beta.iter().all(|m| m == &pm(2)));
        verify_zigzag(&w, &car, &car).unwrap();
    }

    #[test]
    fn car_against_its_square_telescope() {
        let car = uhf(2, 12);
        let car4 = car.telescope(&[0, 2, 4, 6, 8, 10, 12]).unwrap();
        assert_eq!(car4.bonds()[0], pm(4));
        let w = build_zigzag(&car, &car4, &ZigzagOptions::rounds(5)).unwrap();
        assert_eq!(w.rounds(), 5);
        assert_eq!(w.n_stages, vec![0, 1, 2, 4, 6, 8]);
        assert_eq!(w.m_stages, vec![0, 1, 2, 3, 4, 5]);
        verify_zigzag(&w, &car, &car4).unwrap();

        // Hand-picked selections n = (0,2,4,...), m = (0,1,2,...).
        let hand = ZigzagWitness {
            n_stages: vec![0, 2, 4, 6],
            m_stages: vec![0, 1, 2, 3],
            alpha: vec![pm(1); 4],
            beta: vec![pm(4); 3],
        };
        verify_zigzag(&hand, &car, &car4).unwrap();
        let wrong = ZigzagWitness { beta: vec![pm(2); 3], ..hand };
        assert!(verify_zigzag(&wrong, &car, &car4).is_err());
    }

    #[test]
    fn car_against_three_has_no_seed() {
        let err = build_zigzag(&uhf(2, 5), &uhf(3, 5), &ZigzagOptions::default()).unwrap_err();
        assert_eq!(err, ElliottError::SeedNotFound { budget_exhausted: false });
        let err = build_zigzag(&uhf(2, 5), &uhf(3, 5), &ZigzagOptions { budget: 3, ..Default::default() });
        assert_eq!(err, Err(ElliottError::SeedNotFound { budget_exhausted: true }));
    }

    #[test]
    fn partial_progress_is_reported() {
        let car = uhf(2, 4);
        let err = build_zigzag(&car, &car, &ZigzagOptions::rounds(10)).unwrap_err();
        match err {
            ElliottError::StageSearchExhausted { partial, achieved, budget_exhausted } => {
                assert_eq!(achieved, 4);
                assert!(!budget_exhausted);
                verify_zigzag(&partial, &car, &car).unwrap();
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corrupted_witness_is_located() {
        let car = uhf(2, 6);
        let mut w = build_zigzag(&car, &car, &ZigzagOptions::rounds(3)).unwrap();
        w.beta[1] = pm(3);
        assert_eq!(verify_zigzag(&w, &car, &car), Err(ZigzagFailure::BetaAlpha { index: 1, row: 0, col: 0 }));
        assert_eq!(verify_zigzag(&ZigzagWitness::default(), &car, &car), Ok(()));
    }

    #[test]
    fn swapped_witness_is_valid() {
        let car = uhf(2, 12);
        let car4 = car.telescope(&[0, 2, 4, 6, 8, 10, 12]).unwrap();
        let w = build_zigzag(&car, &car4, &ZigzagOptions::rounds(5)).unwrap();
        verify_zigzag(&w.swap(), &car4, &car).unwrap();
    }

    #[test]
    fn seed_is_checked() {
        let car = uhf(2, 3);
        let bad = ZigzagOptions { seed: Some(pm(2)), ..ZigzagOptions::rounds(1) };
        assert_eq!(build_zigzag(&car, &car, &bad), Err(ElliottError::SeedNotUnitPreserving));
        let good = ZigzagOptions { seed: Some(pm(1)), ..ZigzagOptions::rounds(1) };
        assert!(build_zigzag(&car, &car, &good).is_ok());
    }

    #[test]
    fn multi_summand_towers() {
        // C -> C^2 -> M_2 and its telescope by (0,2).
        let split = DimCertificate::from_bonds_with_unit(
            IntVector::from_i64s(&[1]),
            vec![PosMatrix::from_i64s(&[&[1], &[1]]), PosMatrix::from_i64s(&[&[1, 1]])],
        )
        .unwrap();
        let tele = split.telescope(&[0, 2]).unwrap();
        let w = build_zigzag(&split, &tele, &ZigzagOptions::default()).unwrap();
        verify_zigzag(&w, &split, &tele).unwrap();
    }

    #[test]
    fn intertwine_examples() {
        let car = uhf(2, 4);
        let mu = LimitHom::positive(0, pm(1));
        assert_eq!(intertwine_stage(&car, &mu, &pm(1), 0, 1).unwrap(), (1, pm(2)));

        let nu2 = LimitHom::positive(2, PosMatrix::identity(1));
        assert_eq!(intertwine_stage(&car, &nu2, &PosMatrix::identity(1), 2, 0).unwrap(), (2, PosMatrix::identity(1)));

        let collapse = DimCertificate::unitless(
            &[2, 1, 1],
            vec![PosMatrix::from_i64s(&[&[1, 1]]), PosMatrix::from_i64s(&[&[1]])],
        )
        .unwrap();
        let mu = LimitHom::positive(0, PosMatrix::from_i64s(&[&[1], &[0]]));
        let gamma = PosMatrix::from_i64s(&[&[1, 1]]);
        assert_eq!(intertwine_stage(&collapse, &mu, &gamma, 0, 0).unwrap(), (1, pm(1)));

        let not_factoring = LimitHom::positive(0, pm(3));
        assert_eq!(
            intertwine_stage(&car, &not_factoring, &pm(1), 0, 0),
            Err(ElliottError::PreconditionFailed { basis: 0 })
        );
    }

    #[test]
    fn realization_composes_to_bonds() {
        let car = uhf(2, 8);
        let car4 = car.telescope(&[0, 2, 4, 6, 8]).unwrap();
        let w = build_zigzag(&car, &car4, &ZigzagOptions::rounds(3)).unwrap();
        let real = realize_zigzag(&w, &car, &car4).unwrap();
        for s in 0..w.rounds() {
            let comp = findim::compose_hom(&real.tau[s], &real.sigma[s]).unwrap();
            let bond = car.bond_product(w.n_stages[s], w.n_stages[s + 1]).unwrap();
            assert_eq!(comp.mult(), &bond);
            assert!(real.sigma[s].is_unital() && real.tau[s].is_unital());
        }
    }
}
