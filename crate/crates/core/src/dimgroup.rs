//! Dimension groups presented as finite towers of simplicial groups.
//!
//! A [`DimCertificate`] is the prefix `Z^{n_0} -> Z^{n_1} -> ... -> Z^{n_T}` of
//! an inductive sequence with positive bonding maps. Elements of the limit are
//! represented by a stage and a vector at that stage. Two representatives are
//! equal in the limit iff they agree after pushing far enough, and an element
//! is positive iff some push lands in the positive cone. Both facts are only
//! semidecidable, so queries answer with a depth-qualified [`Verdict3`].

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::findim::{self, AFSequence, AlgebraHom, FinDimAlgebra, FinDimError};
use crate::ordgrp::{self, IntMatrix, IntVector, OrdError, PosMatrix, SimplicialGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimGroupError {
    #[error("a certificate needs at least one stage")]
    NoStages,
    #[error("{stages} stages need {} bonds, got {bonds}", stages.saturating_sub(1))]
    BondCount { stages: usize, bonds: usize },
    #[error("bond {stage} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    BondShape { stage: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("either every stage carries a unit or none does")]
    MixedUnits,
    #[error("stage {stage} has no unit")]
    MissingUnit { stage: usize },
    #[error("bond {stage} does not send the unit of stage {stage} to the unit of stage {}", stage + 1)]
    UnitNotPreserved { stage: usize },
    #[error("unit of stage {stage} has a zero component; unitalize the certificate first")]
    NotStrictUnit { stage: usize },
    #[error("stage {stage} is beyond depth {depth}")]
    StageOutOfRange { stage: usize, depth: usize },
    #[error("vector of length {found} does not live in stage {stage} of rank {rank}")]
    RankMismatch { stage: usize, rank: usize, found: usize },
    #[error("homomorphism is not flagged positive")]
    NotPositive,
    #[error("no positive push of the homomorphism kills the element within depth {depth}")]
    KernelWitnessNotFound { depth: usize },
    #[error("unit of stage {stage} generates the trivial subgroup")]
    EmptyBasis { stage: usize },
    #[error("bond {stage}: {source}")]
    Restriction { stage: usize, source: OrdError },
    #[error(transparent)]
    Ord(#[from] OrdError),
    #[error(transparent)]
    FinDim(#[from] FinDimError),
}

/// Finite tower `(n_s, u_s, φ_s)`; `bonds[s]` maps stage `s` to stage `s + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimCertificate {
    stages: Vec<SimplicialGroup>,
    bonds: Vec<PosMatrix>,
    unital: bool,
}

impl DimCertificate {
    pub fn new(
        stages: Vec<SimplicialGroup>,
        bonds: Vec<PosMatrix>,
        unital: bool,
    ) -> Result<Self, DimGroupError> {
        if stages.is_empty() {
            return Err(DimGroupError::NoStages);
        }
        if bonds.len() + 1 != stages.len() {
            return Err(DimGroupError::BondCount { stages: stages.len(), bonds: bonds.len() });
        }
        for (s, b) in bonds.iter().enumerate() {
            let (er, ec) = (stages[s + 1].rank(), stages[s].rank());
            if b.rows() != er || b.cols() != ec {
                return Err(DimGroupError::BondShape {
                    stage: s,
                    rows: b.rows(),
                    cols: b.cols(),
                    expected_rows: er,
                    expected_cols: ec,
                });
            }
        }
        let with_units = stages.iter().filter(|g| g.unit().is_some()).count();
        if with_units != 0 && with_units != stages.len() {
            return Err(DimGroupError::MixedUnits);
        }
        let cert = DimCertificate { stages, bonds, unital };
        if unital {
            for s in 0..cert.bonds.len() {
                let here = cert.unit(s).ok_or(DimGroupError::MissingUnit { stage: s })?;
                let next = cert.unit(s + 1).ok_or(DimGroupError::MissingUnit { stage: s + 1 })?;
                if &cert.bonds[s].apply(here)? != next {
                    return Err(DimGroupError::UnitNotPreserved { stage: s });
                }
            }
            if cert.unit(0).is_none() {
                return Err(DimGroupError::MissingUnit { stage: 0 });
            }
        }
        Ok(cert)
    }

    /// Unital tower generated from `u_0` by pushing it along the bonds.
    pub fn from_bonds_with_unit(u0: IntVector, bonds: Vec<PosMatrix>) -> Result<Self, DimGroupError> {
        let mut units = vec![u0];
        for b in &bonds {
            let next = b.apply(units.last().expect("nonempty"))?;
            units.push(next);
        }
        let stages = units
            .into_iter()
            .map(SimplicialGroup::with_unit)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(stages, bonds, true)
    }

    /// Tower without units, for the non-unital constructions.
    pub fn unitless(ranks: &[usize], bonds: Vec<PosMatrix>) -> Result<Self, DimGroupError> {
        Self::new(ranks.iter().map(|&n| SimplicialGroup::new(n)).collect(), bonds, false)
    }

    pub fn stages(&self) -> &[SimplicialGroup] {
        &self.stages
    }

    pub fn bonds(&self) -> &[PosMatrix] {
        &self.bonds
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Highest stage index `T`.
    pub fn depth(&self) -> usize {
        self.bonds.len()
    }

    pub fn rank(&self, s: usize) -> usize {
        self.stages[s].rank()
    }

    pub fn unit(&self, s: usize) -> Option<&IntVector> {
        self.stages[s].unit()
    }

    fn check_stage(&self, stage: usize) -> Result<(), DimGroupError> {
        if stage > self.depth() {
            Err(DimGroupError::StageOutOfRange { stage, depth: self.depth() })
        } else {
            Ok(())
        }
    }

    /// `φ_{s,t} = φ_{t-1} ∘ ... ∘ φ_s`, the identity when `s = t`.
    pub fn bond_product(&self, s: usize, t: usize) -> Result<PosMatrix, DimGroupError> {
        self.check_stage(t)?;
        if s > t {
            return Err(DimGroupError::StageOutOfRange { stage: s, depth: t });
        }
        let mut acc = PosMatrix::identity(self.rank(s));
        for b in &self.bonds[s..t] {
            acc = ordgrp::compose(b, &acc)?;
        }
        Ok(acc)
    }

    /// Push an arbitrary integer matrix with rows at stage `s` up to stage `t`.
    pub fn push_matrix(&self, m: &IntMatrix, s: usize, t: usize) -> Result<IntMatrix, DimGroupError> {
        if m.rows() != self.rank(s) {
            return Err(DimGroupError::RankMismatch { stage: s, rank: self.rank(s), found: m.rows() });
        }
        Ok(self.bond_product(s, t)?.as_int().mul(m)?)
    }

    /// Keep only the selected stages (strictly increasing), composing bonds.
    pub fn telescope(&self, selection: &[usize]) -> Result<Self, DimGroupError> {
        let mut stages = Vec::with_capacity(selection.len());
        let mut bonds = Vec::new();
        for (i, &s) in selection.iter().enumerate() {
            self.check_stage(s)?;
            stages.push(self.stages[s].clone());
            if i > 0 {
                let prev = selection[i - 1];
                if prev >= s {
                    return Err(DimGroupError::StageOutOfRange { stage: prev, depth: s });
                }
                bonds.push(self.bond_product(prev, s)?);
            }
        }
        Self::new(stages, bonds, self.unital)
    }

    /// Prepend a stage `(Z, 1)` mapping to `u_0`, so every unital tower starts at `C`.
    pub fn rooted(&self) -> Result<Self, DimGroupError> {
        let u0 = self.unit(0).ok_or(DimGroupError::MissingUnit { stage: 0 })?;
        let mut stages = vec![SimplicialGroup::with_unit(IntVector::ones(1))?];
        stages.extend(self.stages.iter().cloned());
        let mut bonds = vec![PosMatrix::new(IntMatrix::column(u0))?];
        bonds.extend(self.bonds.iter().cloned());
        Self::new(stages, bonds, self.unital)
    }
}

/// `ν_s(vector)`: an element of the limit given at stage `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitElement {
    pub stage: usize,
    pub vector: IntVector,
}

impl LimitElement {
    pub fn new(stage: usize, vector: IntVector) -> Self {
        LimitElement { stage, vector }
    }
}

/// A homomorphism `Z^m -> G` written as `ν_stage ∘ matrix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitHom {
    pub stage: usize,
    pub matrix: IntMatrix,
    pub positive: bool,
}

impl LimitHom {
    /// Positive by construction: the representative matrix is entrywise `>= 0`.
    pub fn positive(stage: usize, matrix: PosMatrix) -> Self {
        LimitHom { stage, matrix: matrix.into_int(), positive: true }
    }

    pub fn new(stage: usize, matrix: IntMatrix, positive: bool) -> Self {
        LimitHom { stage, matrix, positive }
    }

    pub fn source_rank(&self) -> usize {
        self.matrix.cols()
    }

    /// Image of a source vector as a limit element.
    pub fn image(&self, x: &IntVector) -> Result<LimitElement, DimGroupError> {
        Ok(LimitElement::new(self.stage, self.matrix.apply(x)?))
    }
}

/// Three-valued answer to a limit query checked up to the certificate depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict3 {
    Yes { stage: usize },
    No { stage: usize },
    UnknownAtDepth { depth: usize },
}

impl Verdict3 {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict3::Yes { .. })
    }
}

fn check_element(cert: &DimCertificate, el: &LimitElement) -> Result<(), DimGroupError> {
    cert.check_stage(el.stage)?;
    let rank = cert.rank(el.stage);
    if el.vector.len() != rank {
        return Err(DimGroupError::RankMismatch { stage: el.stage, rank, found: el.vector.len() });
    }
    Ok(())
}

/// `φ_{s,t}(vector)`.
pub fn push(cert: &DimCertificate, el: &LimitElement, t: usize) -> Result<IntVector, DimGroupError> {
    check_element(cert, el)?;
    cert.check_stage(t)?;
    if t < el.stage {
        return Err(DimGroupError::StageOutOfRange { stage: el.stage, depth: t });
    }
    let mut v = el.vector.clone();
    for b in &cert.bonds[el.stage..t] {
        v = b.apply(&v)?;
    }
    Ok(v)
}

/// `Yes` at the least common stage where the two pushes agree. Never `No`:
/// disagreement up to the depth says nothing about later stages.
pub fn eq_at_depth(
    cert: &DimCertificate,
    a: &LimitElement,
    b: &LimitElement,
) -> Result<Verdict3, DimGroupError> {
    check_element(cert, a)?;
    check_element(cert, b)?;
    let start = a.stage.max(b.stage);
    let mut x = push(cert, a, start)?;
    let mut y = push(cert, b, start)?;
    for t in start..=cert.depth() {
        if x == y {
            return Ok(Verdict3::Yes { stage: t });
        }
        if t < cert.depth() {
            x = cert.bonds[t].apply(&x)?;
            y = cert.bonds[t].apply(&y)?;
        }
    }
    Ok(Verdict3::UnknownAtDepth { depth: cert.depth() })
}

/// `Yes` at the least stage where the push of `a` is in the positive cone.
pub fn positive_at_depth(cert: &DimCertificate, a: &LimitElement) -> Result<Verdict3, DimGroupError> {
    check_element(cert, a)?;
    let mut x = a.vector.clone();
    for t in a.stage..=cert.depth() {
        if x.is_nonnegative() {
            return Ok(Verdict3::Yes { stage: t });
        }
        if t < cert.depth() {
            x = cert.bonds[t].apply(&x)?;
        }
    }
    Ok(Verdict3::UnknownAtDepth { depth: cert.depth() })
}

/// Result of [`shen_factor`]: `theta = theta_prime ∘ phi` and `phi(alpha) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShenFactoring {
    pub phi: PosMatrix,
    pub theta_prime: LimitHom,
}

/// Factor a positive `theta: Z^n -> G` through a simplicial group so that the
/// first factor kills `alpha`. Pushes the representative of `theta` forward
/// until it is entrywise positive and annihilates `alpha`; the second factor is
/// then the canonical map of that stage.
pub fn shen_factor(
    cert: &DimCertificate,
    theta: &LimitHom,
    alpha: &IntVector,
) -> Result<ShenFactoring, DimGroupError> {
    if !theta.positive {
        return Err(DimGroupError::NotPositive);
    }
    cert.check_stage(theta.stage)?;
    let rank = cert.rank(theta.stage);
    if theta.matrix.rows() != rank {
        return Err(DimGroupError::RankMismatch { stage: theta.stage, rank, found: theta.matrix.rows() });
    }
    if alpha.len() != theta.source_rank() {
        return Err(OrdError::DimensionMismatch { expected: theta.source_rank(), found: alpha.len() }.into());
    }
    let mut rep = theta.matrix.clone();
    for t in theta.stage..=cert.depth() {
        if rep.is_nonnegative() && rep.apply(alpha)?.is_zero() {
            return Ok(ShenFactoring {
                phi: PosMatrix::new(rep)?,
                theta_prime: LimitHom::positive(t, PosMatrix::identity(cert.rank(t))),
            });
        }
        if t < cert.depth() {
            rep = cert.bonds[t].as_int().mul(&rep)?;
        }
    }
    Err(DimGroupError::KernelWitnessNotFound { depth: cert.depth() })
}

/// Replace each stage by the convex subgroup its unit generates, making every
/// unit an order unit.
pub fn unitalize(cert: &DimCertificate) -> Result<DimCertificate, DimGroupError> {
    let units: Vec<&IntVector> = (0..=cert.depth())
        .map(|s| cert.unit(s).ok_or(DimGroupError::MissingUnit { stage: s }))
        .collect::<Result<_, _>>()?;
    for (s, b) in cert.bonds.iter().enumerate() {
        if &b.apply(units[s])? != units[s + 1] {
            return Err(DimGroupError::UnitNotPreserved { stage: s });
        }
    }
    let mut stages = Vec::with_capacity(units.len());
    for (s, u) in units.iter().enumerate() {
        let basis = ordgrp::convex_basis(u);
        if basis.is_empty() {
            return Err(DimGroupError::EmptyBasis { stage: s });
        }
        stages.push(SimplicialGroup::with_unit(u.select(&basis))?);
    }
    let bonds = cert
        .bonds
        .iter()
        .enumerate()
        .map(|(s, b)| {
            ordgrp::restrict_to_convex(b, units[s], units[s + 1])
                .map_err(|source| DimGroupError::Restriction { stage: s, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    DimCertificate::new(stages, bonds, true)
}

/// `K_0` of an AF sequence, stage by stage.
pub fn certificate_of_af(seq: &AFSequence) -> Result<DimCertificate, DimGroupError> {
    let stages = seq.algebras().iter().map(findim::k0).collect();
    let bonds = seq.homs().iter().map(findim::k0_hom).collect();
    let unital = seq.homs().iter().all(AlgebraHom::is_unital);
    DimCertificate::new(stages, bonds, unital)
}

/// Realize a tower as an AF sequence whose summand sizes are the unit entries.
///
/// Without units the tower is scaled as `u_0 = (1,...,1)` and
/// `u_{s+1} = max(φ_s(u_s), 1)` componentwise. Summands are sorted, so the
/// bonds are conjugated by the sorting permutations; a tower whose units are
/// already sorted comes back unchanged under [`certificate_of_af`].
pub fn af_of_certificate(cert: &DimCertificate) -> Result<AFSequence, DimGroupError> {
    let units: Vec<IntVector> = if cert.unit(0).is_some() {
        (0..=cert.depth())
            .map(|s| {
                let u = cert.unit(s).expect("units are all present");
                if ordgrp::is_order_unit(u) {
                    Ok(u.clone())
                } else {
                    Err(DimGroupError::NotStrictUnit { stage: s })
                }
            })
            .collect::<Result<_, _>>()?
    } else {
        synthesize_units(cert)?
    };
    let perms: Vec<Vec<usize>> = units.iter().map(|u| findim::sorting_permutation(u.entries())).collect();
    let algebras = units
        .iter()
        .map(|u| FinDimAlgebra::new(u.entries().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let homs = cert
        .bonds
        .iter()
        .enumerate()
        .map(|(s, b)| {
            let permuted = b.select(&perms[s + 1], &perms[s]);
            findim::hom_from_matrix(&algebras[s], &algebras[s + 1], permuted)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AFSequence::new(algebras, homs)?)
}

fn synthesize_units(cert: &DimCertificate) -> Result<Vec<IntVector>, DimGroupError> {
    let mut units = vec![IntVector::ones(cert.rank(0))];
    for b in &cert.bonds {
        let img = b.apply(units.last().expect("nonempty"))?;
        let next = img
            .into_entries()
            .into_iter()
            .map(|x| if x.is_positive() { x } else { BigInt::one() })
            .collect::<Vec<_>>();
        units.push(IntVector::new(next));
    }
    Ok(units)
}
