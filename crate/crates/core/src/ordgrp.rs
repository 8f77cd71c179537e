//! Simplicial ordered groups `Z^n` and the positive homomorphisms between them.
//!
//! Everything here is exact: entries are [`BigInt`]s, so towers whose ranks or
//! units grow exponentially never overflow. A positive homomorphism
//! `Z^n -> Z^p` is a `p x n` matrix with nonnegative entries ([`PosMatrix`]);
//! the same matrix doubles as the multiplicity matrix of a *-homomorphism
//! between finite-dimensional algebras.

use std::fmt;
use std::ops::{Deref, Index, Neg};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("image of basis vector {col} has nonzero component {row} outside the target convex subgroup")]
    LeavesConvexSubgroup { row: usize, col: usize },
    #[error("unit component {index} is {value}; order units of Z^n are strictly positive")]
    NotOrderUnit { index: usize, value: BigInt },
}

/// An element of `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntVector(Vec<BigInt>);

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVector(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        IntVector(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        IntVector(vec![BigInt::zero(); len])
    }

    pub fn ones(len: usize) -> Self {
        IntVector(vec![BigInt::one(); len])
    }

    /// The standard basis vector `e_j` (0-based `j`).
    pub fn basis(len: usize, j: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[j] = BigInt::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Componentwise `>= 0`, i.e. membership in the cone `Z^n_{>=0}`.
    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    pub fn checked_add(&self, other: &IntVector) -> Result<IntVector, OrdError> {
        same_len(self.len(), other.len())?;
        Ok(IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn checked_sub(&self, other: &IntVector) -> Result<IntVector, OrdError> {
        same_len(self.len(), other.len())?;
        Ok(IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &IntVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Keep only the listed components, in the given order.
    pub fn select(&self, indices: &[usize]) -> IntVector {
        IntVector(indices.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl Index<usize> for IntVector {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|x| -x).collect())
    }
}

impl From<Vec<BigInt>> for IntVector {
    fn from(v: Vec<BigInt>) -> Self {
        IntVector(v)
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

fn same_len(expected: usize, found: usize) -> Result<(), OrdError> {
    if expected == found {
        Ok(())
    } else {
        Err(OrdError::DimensionMismatch { expected, found })
    }
}

/// A dense integer matrix, row-major. Represents a group homomorphism
/// `Z^cols -> Z^rows`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Build from rows; `cols` is needed to give shape to a matrix with no rows.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self, OrdError> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(OrdError::Ragged { row: r, expected: cols, found: row.len() });
            }
            data.extend(row);
        }
        Ok(IntMatrix { rows: nrows, cols, data })
    }

    /// Convenience constructor for literals; panics on ragged input.
    pub fn from_i64s(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(rows, cols).expect("ragged matrix literal")
    }

    /// A single column matrix `Z -> Z^n` sending 1 to `v`.
    pub fn column(v: &IntVector) -> Self {
        IntMatrix { rows: v.len(), cols: 1, data: v.entries().to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column_vector(&self, c: usize) -> IntVector {
        IntVector((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    /// `self * other`.
    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, OrdError> {
        same_len(self.cols, other.rows)?;
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &IntVector) -> Result<IntVector, OrdError> {
        same_len(self.cols, v.len())?;
        Ok(IntVector(
            (0..self.rows)
                .map(|r| self.row(r).iter().zip(v.entries()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &IntMatrix) -> Result<IntMatrix, OrdError> {
        same_len(self.rows, other.rows)?;
        same_len(self.cols, other.cols)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Submatrix on the given rows and columns (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c).clone());
            }
        }
        IntMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    /// Largest entry, or zero for an empty matrix.
    pub fn max_entry(&self) -> BigInt {
        self.data.iter().max().cloned().unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A matrix with every entry `>= 0`: an ordered-group homomorphism between
/// simplicial groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PosMatrix(IntMatrix);

impl PosMatrix {
    pub fn new(m: IntMatrix) -> Result<Self, OrdError> {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m.get(r, c).is_negative() {
                    return Err(OrdError::NegativeEntry { row: r, col: c });
                }
            }
        }
        Ok(PosMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        PosMatrix(IntMatrix::identity(n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PosMatrix(IntMatrix::zeros(rows, cols))
    }

    /// Panics if an entry is negative; meant for literals in tests and generators.
    pub fn from_i64s(rows: &[&[i64]]) -> Self {
        PosMatrix::new(IntMatrix::from_i64s(rows)).expect("negative entry in PosMatrix literal")
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self, OrdError> {
        PosMatrix::new(IntMatrix::from_rows(rows, cols)?)
    }

    pub fn as_int(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_int(self) -> IntMatrix {
        self.0
    }

    /// Kept rows/columns of a positive matrix stay positive.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PosMatrix {
        PosMatrix(self.0.select(rows, cols))
    }
}

impl Deref for PosMatrix {
    type Target = IntMatrix;
    fn deref(&self) -> &IntMatrix {
        &self.0
    }
}

impl fmt::Display for PosMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `a ∘ b`, i.e. the matrix product `a * b` (apply `b` first).
pub fn compose(a: &PosMatrix, b: &PosMatrix) -> Result<PosMatrix, OrdError> {
    Ok(PosMatrix(a.0.mul(&b.0)?))
}

pub fn apply(m: &PosMatrix, v: &IntVector) -> Result<IntVector, OrdError> {
    m.0.apply(v)
}

/// The pair `(Z^n, u)`; `unit` is absent for groups carried without a scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplicialGroup {
    rank: usize,
    unit: Option<IntVector>,
}

impl SimplicialGroup {
    pub fn new(rank: usize) -> Self {
        SimplicialGroup { rank, unit: None }
    }

    /// A scaled group. The unit may have zero components (a non-strict unit
    /// candidate, as produced before unitalization); use
    /// [`SimplicialGroup::has_order_unit`] to tell the cases apart.
    pub fn with_unit(unit: IntVector) -> Result<Self, OrdError> {
        if !unit.is_nonnegative() {
            let index = unit.entries().iter().position(|x| x.is_negative()).unwrap_or(0);
            return Err(OrdError::NotOrderUnit { index, value: unit[index].clone() });
        }
        Ok(SimplicialGroup { rank: unit.len(), unit: Some(unit) })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn unit(&self) -> Option<&IntVector> {
        self.unit.as_ref()
    }

    pub fn has_order_unit(&self) -> bool {
        self.unit.as_ref().is_some_and(is_order_unit)
    }
}

/// On `Z^n` an element is an order unit exactly when every component is `>= 1`.
pub fn is_order_unit(u: &IntVector) -> bool {
    !u.is_empty() && u.entries().iter().all(|x| x >= &BigInt::one())
}

/// Whether `g` lies in the convex subgroup generated by the positive element
/// `x`, i.e. `-n x <= g <= n x` for some `n >= 1`.
pub fn convex_member(x: &IntVector, g: &IntVector) -> Result<bool, OrdError> {
    same_len(x.len(), g.len())?;
    // Where x_j > 0 a large enough n always bounds g_j; where x_j = 0 only g_j = 0 fits.
    Ok(x.entries().iter().zip(g.entries()).all(|(xj, gj)| xj.is_positive() || gj.is_zero()))
}

/// Indices (0-based) of the standard basis vectors spanning the convex subgroup
/// generated by `u`.
pub fn convex_basis(u: &IntVector) -> Vec<usize> {
    u.entries()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_positive())
        .map(|(j, _)| j)
        .collect()
}

/// Matrix of `phi` restricted to the convex subgroups generated by `u_src` and
/// `u_tgt`, in their standard sub-bases.
pub fn restrict_to_convex(
    phi: &PosMatrix,
    u_src: &IntVector,
    u_tgt: &IntVector,
) -> Result<PosMatrix, OrdError> {
    same_len(phi.cols(), u_src.len())?;
    same_len(phi.rows(), u_tgt.len())?;
    let src = convex_basis(u_src);
    let tgt = convex_basis(u_tgt);
    for row in (0..phi.rows()).filter(|r| !tgt.contains(r)) {
        if let Some(&col) = src.iter().find(|&&c| !phi.get(row, c).is_zero()) {
            return Err(OrdError::LeavesConvexSubgroup { row, col });
        }
    }
    Ok(phi.select(&tgt, &src))
}
