//! Finite-dimensional C*-algebras `⊕_{n ∈ F} M_n(C)` and their
//! *-homomorphisms, held up to unitary equivalence as multiplicity matrices.
//!
//! A *-homomorphism between such algebras is determined up to unitary
//! conjugation by how many times each source block repeats inside each target
//! block. That multiplicity matrix is also exactly the induced map on `K_0`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ordgrp::{self, IntVector, OrdError, PosMatrix, SimplicialGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinDimError {
    #[error("an algebra needs at least one summand")]
    Empty,
    #[error("summand size {0} is not a positive integer")]
    BadSize(BigInt),
    #[error("multiplicity matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("target summand {row} has size {available} but the embedded blocks need {used}")]
    SizeViolation { row: usize, used: BigInt, available: BigInt },
    #[error("source of the outer hom does not match the target of the inner hom")]
    NotComposable,
    #[error("stage {stage}: {reason}")]
    InvalidStage { stage: usize, reason: String },
    #[error(transparent)]
    Ord(#[from] OrdError),
}

/// A finite multiset `F` of positive integers, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinDimAlgebra {
    summands: Vec<BigInt>,
}

impl FinDimAlgebra {
    pub fn new(mut sizes: Vec<BigInt>) -> Result<Self, FinDimError> {
        if sizes.is_empty() {
            return Err(FinDimError::Empty);
        }
        if let Some(bad) = sizes.iter().find(|n| !n.is_positive()) {
            return Err(FinDimError::BadSize(bad.clone()));
        }
        sizes.sort();
        Ok(FinDimAlgebra { summands: sizes })
    }

    pub fn from_sizes(sizes: &[u64]) -> Result<Self, FinDimError> {
        Self::new(sizes.iter().map(|&n| BigInt::from(n)).collect())
    }

    /// The full matrix algebra `M_n(C)`.
    pub fn matrix(n: u64) -> Self {
        Self::from_sizes(&[n]).expect("matrix size must be positive")
    }

    pub fn summands(&self) -> &[BigInt] {
        &self.summands
    }

    pub fn num_summands(&self) -> usize {
        self.summands.len()
    }

    /// Size vector `v_F`, the image of the unit in `K_0`.
    pub fn size_vector(&self) -> IntVector {
        IntVector::new(self.summands.clone())
    }
}

impl fmt::Display for FinDimAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, n) in self.summands.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "}}")
    }
}

/// Linear dimension `Σ n²`.
pub fn dim(f: &FinDimAlgebra) -> BigInt {
    f.summands.iter().map(|n| n * n).sum()
}

/// `K_0(F)` with its canonical order unit, `(Z^|F|, v_F)`.
pub fn k0(f: &FinDimAlgebra) -> SimplicialGroup {
    SimplicialGroup::with_unit(f.size_vector()).expect("summand sizes are positive")
}

/// A *-homomorphism `⊕_j M_{n_j} -> ⊕_i M_{l_i}` given by its multiplicities:
/// `mult[i][j]` copies of block `j` sit inside block `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraHom {
    source: FinDimAlgebra,
    target: FinDimAlgebra,
    mult: PosMatrix,
}

impl AlgebraHom {
    pub fn source(&self) -> &FinDimAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FinDimAlgebra {
        &self.target
    }

    pub fn mult(&self) -> &PosMatrix {
        &self.mult
    }

    pub fn identity(f: &FinDimAlgebra) -> Self {
        AlgebraHom {
            source: f.clone(),
            target: f.clone(),
            mult: PosMatrix::identity(f.num_summands()),
        }
    }

    /// Every target block is filled exactly.
    pub fn is_unital(&self) -> bool {
        self.mult
            .apply(&self.source.size_vector())
            .is_ok_and(|img| img == self.target.size_vector())
    }

    /// No source block is sent to zero.
    pub fn is_injective(&self) -> bool {
        (0..self.mult.cols()).all(|c| (0..self.mult.rows()).any(|r| !self.mult.get(r, c).is_zero()))
    }
}

/// The hom with multiplicity matrix `gamma`, provided the blocks fit.
pub fn hom_from_matrix(
    source: &FinDimAlgebra,
    target: &FinDimAlgebra,
    gamma: PosMatrix,
) -> Result<AlgebraHom, FinDimError> {
    let (rows, cols) = (gamma.rows(), gamma.cols());
    if rows != target.num_summands() || cols != source.num_summands() {
        return Err(FinDimError::Shape {
            rows,
            cols,
            expected_rows: target.num_summands(),
            expected_cols: source.num_summands(),
        });
    }
    let used = gamma.apply(&source.size_vector())?;
    for (row, (u, avail)) in used.entries().iter().zip(target.summands()).enumerate() {
        if u > avail {
            return Err(FinDimError::SizeViolation {
                row,
                used: u.clone(),
                available: avail.clone(),
            });
        }
    }
    Ok(AlgebraHom { source: source.clone(), target: target.clone(), mult: gamma })
}

/// `K_0(h)` in the standard bases: the multiplicity matrix itself.
pub fn k0_hom(h: &AlgebraHom) -> PosMatrix {
    h.mult.clone()
}

/// `g ∘ f`.
pub fn compose_hom(g: &AlgebraHom, f: &AlgebraHom) -> Result<AlgebraHom, FinDimError> {
    if f.target != g.source {
        return Err(FinDimError::NotComposable);
    }
    Ok(AlgebraHom {
        source: f.source.clone(),
        target: g.target.clone(),
        mult: ordgrp::compose(&g.mult, &f.mult)?,
    })
}

pub fn is_unital(h: &AlgebraHom) -> bool {
    h.is_unital()
}

pub fn is_injective(h: &AlgebraHom) -> bool {
    h.is_injective()
}

/// Finite stage data `(F_0, ..., F_T)` with connecting homs `F_s -> F_{s+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AFSequence {
    algebras: Vec<FinDimAlgebra>,
    homs: Vec<AlgebraHom>,
}

impl AFSequence {
    /// Checks only that the shapes chain; see [`validate_af_sequence`] for the
    /// unital/injective requirements.
    pub fn new(algebras: Vec<FinDimAlgebra>, homs: Vec<AlgebraHom>) -> Result<Self, FinDimError> {
        if algebras.is_empty() {
            return Err(FinDimError::Empty);
        }
        if homs.len() + 1 != algebras.len() {
            return Err(FinDimError::InvalidStage {
                stage: homs.len().min(algebras.len()),
                reason: format!("{} algebras need {} homs, got {}", algebras.len(), algebras.len() - 1, homs.len()),
            });
        }
        for (s, h) in homs.iter().enumerate() {
            if h.source != algebras[s] || h.target != algebras[s + 1] {
                return Err(FinDimError::InvalidStage {
                    stage: s,
                    reason: "hom does not connect consecutive algebras".into(),
                });
            }
        }
        Ok(AFSequence { algebras, homs })
    }

    /// The sequence `F, F, F, ...` with identity connecting maps.
    pub fn constant(f: FinDimAlgebra, depth: usize) -> Self {
        let homs = (0..depth).map(|_| AlgebraHom::identity(&f)).collect();
        AFSequence { algebras: vec![f; depth + 1], homs }
    }

    pub fn algebras(&self) -> &[FinDimAlgebra] {
        &self.algebras
    }

    pub fn homs(&self) -> &[AlgebraHom] {
        &self.homs
    }

    /// Number of connecting maps.
    pub fn depth(&self) -> usize {
        self.homs.len()
    }
}

/// All connecting maps must be unital embeddings.
pub fn validate_af_sequence(seq: &AFSequence) -> Result<(), FinDimError> {
    for (stage, h) in seq.homs.iter().enumerate() {
        if !h.is_unital() {
            return Err(FinDimError::InvalidStage { stage, reason: "hom is not unital".into() });
        }
        if !h.is_injective() {
            return Err(FinDimError::InvalidStage { stage, reason: "hom is not injective".into() });
        }
    }
    Ok(())
}

/// Stable permutation that sorts `sizes` ascending: `perm[k]` is the original
/// index of the `k`-th smallest entry. Sorted input gives the identity.
pub(crate) fn sorting_permutation(sizes: &[BigInt]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..sizes.len()).collect();
    perm.sort_by(|&a, &b| sizes[a].cmp(&sizes[b]));
    perm
}
