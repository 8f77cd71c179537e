//! Double-precision realizations of matrix-unit systems and the unitaries
//! built from nearby projections.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use super::moduli;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Tolerance for structural identities of inputs.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("families have {0} and {1} members")]
    FamilySize(usize, usize),
    #[error("matrix {index} of family {family} is not {what} (residual {residual:.3e})")]
    NotProjection { family: char, index: usize, what: &'static str, residual: f64 },
    #[error("members {i} and {j} of family {family} are not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { family: char, i: usize, j: usize, residual: f64 },
    #[error("family {family} does not sum to the identity (residual {residual:.3e})")]
    NotUnital { family: char, residual: f64 },
    #[error("max ||p_j - q_j|| = {measured:.3e} is not below the threshold {threshold:.3e}")]
    TooFar { measured: f64, threshold: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("systems have types {0:?} and {1:?}")]
    TypeMismatch(Vec<usize>, Vec<usize>),
    #[error("v does not carry g^{summand}_{{{i},{i}}} onto h^{summand}_{{{i},{i}}} (residual {residual:.3e})")]
    NotIntertwining { summand: usize, i: usize, residual: f64 },
    #[error("summand {summand}: minimal projections have ranks {left} and {right}")]
    MultiplicityMismatch { summand: usize, left: usize, right: usize },
    #[error("the complements of the two realizations have ranks {left} and {right}")]
    ComplementMismatch { left: usize, right: usize },
}

/// Largest singular value. Exact zeros short-circuit.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() || m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// `e^s_{i,j}` for `s` over summands of sizes `sizes[s]`, realized in `M_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixUnitSystem {
    sizes: Vec<usize>,
    dim: usize,
    units: Vec<Vec<Vec<ComplexMatrix>>>,
    unital: bool,
}

impl MatrixUnitSystem {
    /// `units[s][i][j]` must be `d x d` with `i, j < sizes[s]`.
    pub fn new(sizes: Vec<usize>, dim: usize, units: Vec<Vec<Vec<ComplexMatrix>>>, unital: bool) -> Result<Self, PerturbError> {
        if units.len() != sizes.len() {
            return Err(PerturbError::FamilySize(units.len(), sizes.len()));
        }
        for (s, block) in units.iter().enumerate() {
            if block.len() != sizes[s] || block.iter().any(|row| row.len() != sizes[s]) {
                return Err(PerturbError::FamilySize(block.len(), sizes[s]));
            }
            for m in block.iter().flatten() {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(PerturbError::Dimension(m.nrows(), dim));
                }
            }
        }
        Ok(MatrixUnitSystem { sizes, dim, units, unital })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn unit(&self, s: usize, i: usize, j: usize) -> &ComplexMatrix {
        &self.units[s][i][j]
    }

    /// `W e W*` for every unit.
    pub fn conjugate(&self, w: &ComplexMatrix) -> MatrixUnitSystem {
        let wa = w.adjoint();
        let units = self
            .units
            .iter()
            .map(|b| b.iter().map(|r| r.iter().map(|e| w * e * &wa).collect()).collect())
            .collect();
        MatrixUnitSystem { units, ..self.clone() }
    }

    /// Diagonal units `e^s_{i,i}` in summand-major order.
    pub fn diagonal(&self) -> Vec<ComplexMatrix> {
        self.units
            .iter()
            .flat_map(|b| (0..b.len()).map(move |i| b[i][i].clone()))
            .collect()
    }

    /// Largest `||e - f||` over corresponding units.
    pub fn distance(&self, other: &MatrixUnitSystem) -> Result<f64, PerturbError> {
        same_type(self, other)?;
        Ok(self
            .units
            .iter()
            .flatten()
            .flatten()
            .zip(other.units.iter().flatten().flatten())
            .map(|(a, b)| operator_norm(&(a - b)))
            .fold(0.0, f64::max))
    }
}

fn same_type(a: &MatrixUnitSystem, b: &MatrixUnitSystem) -> Result<(), PerturbError> {
    if a.sizes != b.sizes {
        return Err(PerturbError::TypeMismatch(a.sizes.clone(), b.sizes.clone()));
    }
    if a.dim != b.dim {
        return Err(PerturbError::Dimension(a.dim, b.dim));
    }
    Ok(())
}

/// Standard block-diagonal units in `M_d`, `d = Σ sizes`.
pub fn canonical_matrix_units(sizes: &[usize]) -> MatrixUnitSystem {
    let dim: usize = sizes.iter().sum();
    let mut offset = 0;
    let mut units = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let block = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut e = ComplexMatrix::zeros(dim, dim);
                        e[(offset + i, offset + j)] = Complex64::new(1.0, 0.0);
                        e
                    })
                    .collect()
            })
            .collect();
        units.push(block);
        offset += n;
    }
    MatrixUnitSystem { sizes: sizes.to_vec(), dim, units, unital: true }
}

/// Largest residual among the matrix-unit relations: products within a
/// summand, adjoints, products across summands and, for unital systems, the
/// sum of the diagonal.
pub fn defect(sys: &MatrixUnitSystem) -> f64 {
    let mut worst = 0.0f64;
    let all: Vec<(usize, usize, usize)> = sys
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(s, &n)| (0..n).flat_map(move |i| (0..n).map(move |j| (s, i, j))))
        .collect();
    for &(s, i, j) in &all {
        let e = sys.unit(s, i, j);
        worst = worst.max(operator_norm(&(e.adjoint() - sys.unit(s, j, i))));
        for &(t, k, l) in &all {
            let prod = e * sys.unit(t, k, l);
            let residual = if s == t && j == k { prod - sys.unit(s, i, l) } else { prod };
            worst = worst.max(operator_norm(&residual));
        }
    }
    if sys.unital {
        let mut sum = -identity(sys.dim);
        for d in sys.diagonal() {
            sum += d;
        }
        worst = worst.max(operator_norm(&sum));
    }
    worst
}

fn check_projections(family: char, ps: &[ComplexMatrix], d: usize) -> Result<(), PerturbError> {
    for (index, p) in ps.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(PerturbError::Dimension(p.nrows(), d));
        }
        let residual = operator_norm(&(p.adjoint() - p));
        if residual > STRUCTURE_TOL {
            return Err(PerturbError::NotProjection { family, index, what: "self-adjoint", residual });
        }
        let residual = operator_norm(&(p * p - p));
        if residual > STRUCTURE_TOL {
            return Err(PerturbError::NotProjection { family, index, what: "idempotent", residual });
        }
    }
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let residual = operator_norm(&(&ps[i] * &ps[j]));
            if residual > STRUCTURE_TOL {
                return Err(PerturbError::NotOrthogonal { family, i, j, residual });
            }
        }
    }
    let mut sum = -identity(d);
    for p in ps {
        sum += p;
    }
    let residual = operator_norm(&sum);
    if residual > STRUCTURE_TOL {
        return Err(PerturbError::NotUnital { family, residual });
    }
    Ok(())
}

/// Which sign to use in `u_j = 1 - p_j - q_j ± 2 q_j p_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExchangeSign {
    Plus,
    Minus,
}

/// `u = 1 - p - q ± 2qp`.
pub fn exchange_symmetry(p: &ComplexMatrix, q: &ComplexMatrix, sign: ExchangeSign) -> ComplexMatrix {
    let two_qp = q * p * Complex64::new(2.0, 0.0);
    let base = identity(p.nrows()) - p - q;
    match sign {
        ExchangeSign::Plus => base + two_qp,
        ExchangeSign::Minus => base - two_qp,
    }
}

/// `Σ_j p_j u_j q_j` with the plus-sign symmetries, before any correction.
pub fn raw_exchange(p: &[ComplexMatrix], q: &[ComplexMatrix]) -> ComplexMatrix {
    let d = p.first().map_or(0, |m| m.nrows());
    let mut w = ComplexMatrix::zeros(d, d);
    for (pj, qj) in p.iter().zip(q) {
        w += pj * exchange_symmetry(pj, qj, ExchangeSign::Plus) * qj;
    }
    w
}

/// `w (w* w)^{-1/2}` through the eigendecomposition of the positive matrix `w* w`.
fn polar_unitary(w: &ComplexMatrix) -> ComplexMatrix {
    let h = w.adjoint() * w;
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let inv_sqrt = eig.eigenvalues.map(|l| Complex64::new(1.0 / l.max(f64::MIN_POSITIVE).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    w * v * ComplexMatrix::from_diagonal(&inv_sqrt) * v.adjoint()
}

/// Unitary `v` near the identity with `v* p_j v = q_j`.
///
/// Requires two partitions of unity into mutually orthogonal projections
/// with `max ||p_j - q_j|| < 2^{-Δ₂(n,k)}`. The sum `w = Σ p_j u_j q_j` maps
/// each `q_j` onto `p_j` but is unitary only up to second order, so it is
/// replaced by its polar part, which keeps both properties exactly and
/// moves `w` by `O(||p - q||²)`.
pub fn exchange_unitary(p: &[ComplexMatrix], q: &[ComplexMatrix], k: u64) -> Result<ComplexMatrix, PerturbError> {
    if p.len() != q.len() {
        return Err(PerturbError::FamilySize(p.len(), q.len()));
    }
    let d = p.first().map_or(0, |m| m.nrows());
    check_projections('p', p, d)?;
    check_projections('q', q, d)?;
    let threshold = exchange_threshold(p.len(), k);
    let measured = p.iter().zip(q).map(|(a, b)| operator_norm(&(a - b))).fold(0.0, f64::max);
    if measured >= threshold {
        return Err(PerturbError::TooFar { measured, threshold });
    }
    Ok(polar_unitary(&raw_exchange(p, q)))
}

/// `2^{-Δ₂(n,k)}`.
pub fn exchange_threshold(n: usize, k: u64) -> f64 {
    2f64.powi(-(moduli::big_delta2(n as u64, k) as i32))
}

/// `u = Σ_{s,i} g^s_{i,1} v h^s_{1,i}`, which satisfies `u* g^s_{i,j} u = h^s_{i,j}`.
pub fn glimm_unitary(g: &MatrixUnitSystem, h: &MatrixUnitSystem, v: &ComplexMatrix) -> Result<ComplexMatrix, PerturbError> {
    same_type(g, h)?;
    if v.nrows() != g.dim || v.ncols() != g.dim {
        return Err(PerturbError::Dimension(v.nrows(), g.dim));
    }
    if !g.unital || !h.unital {
        return Err(PerturbError::NotUnital { family: if g.unital { 'h' } else { 'g' }, residual: f64::NAN });
    }
    let va = v.adjoint();
    for (s, &n) in g.sizes.iter().enumerate() {
        for i in 0..n {
            let residual = operator_norm(&(&va * g.unit(s, i, i) * v - h.unit(s, i, i)));
            if residual > 1e-8 {
                return Err(PerturbError::NotIntertwining { summand: s, i, residual });
            }
        }
    }
    let mut u = ComplexMatrix::zeros(g.dim, g.dim);
    for (s, &n) in g.sizes.iter().enumerate() {
        for i in 0..n {
            u += g.unit(s, i, 0) * v * h.unit(s, 0, i);
        }
    }
    Ok(u)
}

/// Orthonormal basis (as columns) of the range of a projection.
fn range_basis(p: &ComplexMatrix) -> ComplexMatrix {
    let h = (p + p.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let cols: Vec<_> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        ComplexMatrix::zeros(p.nrows(), 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    }
}

/// Unitary `U` with `U e U* = f` for corresponding units `e` of `r1` and `f`
/// of `r2`, two representations of the same algebra in `M_d`.
///
/// Bases of the ranges of `e^s_{1,1}` and `f^s_{1,1}` are matched and carried
/// along the partial isometries `e^s_{i,1}`; the complements of the units
/// are matched directly.
pub fn unitary_intertwiner(r1: &MatrixUnitSystem, r2: &MatrixUnitSystem) -> Result<ComplexMatrix, PerturbError> {
    same_type(r1, r2)?;
    let d = r1.dim;
    let mut u = ComplexMatrix::zeros(d, d);
    let mut sum1 = ComplexMatrix::zeros(d, d);
    let mut sum2 = ComplexMatrix::zeros(d, d);
    for (s, &n) in r1.sizes.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let x = range_basis(r1.unit(s, 0, 0));
        let y = range_basis(r2.unit(s, 0, 0));
        if x.ncols() != y.ncols() {
            return Err(PerturbError::MultiplicityMismatch { summand: s, left: x.ncols(), right: y.ncols() });
        }
        let core = &y * x.adjoint();
        for i in 0..n {
            u += r2.unit(s, i, 0) * &core * r1.unit(s, 0, i);
            sum1 += r1.unit(s, i, i);
            sum2 += r2.unit(s, i, i);
        }
    }
    let x = range_basis(&(identity(d) - sum1));
    let y = range_basis(&(identity(d) - sum2));
    if x.ncols() != y.ncols() {
        return Err(PerturbError::ComplementMismatch { left: x.ncols(), right: y.ncols() });
    }
    if x.ncols() > 0 {
        u += &y * x.adjoint();
    }
    Ok(u)
}

/// Entries with independent standard normal real and imaginary parts.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Random Hermitian matrix of operator norm 1.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = random_gaussian(rng, d);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let n = operator_norm(&h);
    h / Complex64::new(n, 0.0)
}

/// `exp(i t H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, t * l));
    let v = &eig.eigenvectors;
    v * ComplexMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    SymmetricEigen::new(random_hermitian(rng, d)).eigenvectors
}

/// Unitary `exp(i ε H)` with `||exp(i ε H) - 1|| <= ε`.
pub fn near_identity_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize, eps: f64) -> ComplexMatrix {
    exp_i_hermitian(&random_hermitian(rng, d), eps)
}

/// Random partition of unity in `M_d` into `n` nonzero projections (`n <= d`).
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Vec<ComplexMatrix> {
    assert!(1 <= n && n <= d);
    let mut ranks = vec![1usize; n];
    for _ in n..d {
        ranks[rng.random_range(0..n)] += 1;
    }
    let w = random_unitary(rng, d);
    let mut out = Vec::with_capacity(n);
    let mut col = 0;
    for r in ranks {
        let block = w.columns(col, r).into_owned();
        out.push(&block * block.adjoint());
        col += r;
    }
    out
}

/// A seeded instance for [`exchange_unitary`]: `q_j = W p_j W*` with `W` a
/// random unitary whose distance from 1 is a random fraction of half the
/// admissible threshold.
pub fn random_exchange_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    k: u64,
) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let p = random_partition(rng, n, d);
    let eps = rng.random_range(0.1..0.9) * exchange_threshold(n, k) / 2.0;
    let w = near_identity_unitary(rng, d, eps);
    let wa = w.adjoint();
    let q = p.iter().map(|pj| &w * pj * &wa).collect();
    (p, q)
}

/// A measured quantity against its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub bound: f64,
    pub measured: f64,
    /// Whether the bound is strict.
    pub strict: bool,
}

impl Check {
    pub fn within(bound: f64, measured: f64) -> Self {
        Check { bound, measured, strict: false }
    }

    pub fn below(bound: f64, measured: f64) -> Self {
        Check { bound, measured, strict: true }
    }

    pub fn pass(&self) -> bool {
        if self.strict {
            self.measured < self.bound
        } else {
            self.measured <= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeReport {
    pub dim: usize,
    pub unitarity: Check,
    pub intertwining: Check,
    pub near_identity: Check,
}

impl ExchangeReport {
    pub fn pass(&self) -> bool {
        self.unitarity.pass() && self.intertwining.pass() && self.near_identity.pass()
    }
}

/// One random instance of [`exchange_unitary`] with `n` projections in `M_dim`.
pub fn exchange_trial<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, k: u64) -> Result<ExchangeReport, PerturbError> {
    let (p, q) = random_exchange_instance(rng, n, dim, k);
    let v = exchange_unitary(&p, &q, k)?;
    let va = v.adjoint();
    let intertwining = p
        .iter()
        .zip(&q)
        .map(|(pj, qj)| operator_norm(&(&va * pj * &v - qj)))
        .fold(0.0, f64::max);
    Ok(ExchangeReport {
        dim,
        unitarity: Check::within(1e-8, operator_norm(&(&va * &v - identity(dim)))),
        intertwining: Check::within(1e-8, intertwining),
        near_identity: Check::below(2f64.powi(-(k as i32)), operator_norm(&(v - identity(dim)))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlimmReport {
    pub k0: u64,
    pub unitarity: Check,
    pub conjugation: Check,
    /// `||u - 1||` against `dim F * 2^{-k0+1}`.
    pub chain_bound: Check,
    /// `||u - 1||` against `2^{-k}`.
    pub target_bound: Check,
}

impl GlimmReport {
    pub fn pass(&self) -> bool {
        self.unitarity.pass() && self.conjugation.pass() && self.chain_bound.pass() && self.target_bound.pass()
    }
}

/// Conjugate the canonical units of `F = ⊕ M_{sizes[s]}` by a random unitary
/// close enough to 1 for the exchange step at `k₀`, and measure the Glimm unitary.
pub fn glimm_trial<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize], k: u64) -> Result<GlimmReport, PerturbError> {
    let g = canonical_matrix_units(sizes);
    let dim_f: usize = sizes.iter().map(|n| n * n).sum();
    let k0 = moduli::glimm_k0(dim_f as u64, k);
    let projections: usize = sizes.iter().sum();
    let eps = rng.random_range(0.1..0.9) * exchange_threshold(projections, k0) / 2.0;
    let w = near_identity_unitary(rng, g.dim(), eps);
    let h = g.conjugate(&w);
    let v = exchange_unitary(&g.diagonal(), &h.diagonal(), k0)?;
    let u = glimm_unitary(&g, &h, &v)?;
    let ua = u.adjoint();
    let mut conjugation = 0.0f64;
    for (s, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                conjugation = conjugation.max(operator_norm(&(&ua * g.unit(s, i, j) * &u - h.unit(s, i, j))));
            }
        }
    }
    let distance = operator_norm(&(&u - identity(g.dim())));
    Ok(GlimmReport {
        k0,
        unitarity: Check::within(1e-7, operator_norm(&(&ua * &u - identity(g.dim())))),
        conjugation: Check::within(1e-7, conjugation),
        chain_bound: Check::below(dim_f as f64 * 2f64.powi(1 - k0 as i32), distance),
        target_bound: Check::below(2f64.powi(-(k as i32)), distance),
    })
}

/// `||u* u - 1||` for the symmetry `1 - 2p ± 2p` built from `p = q`.
pub fn sign_defect(p: &ComplexMatrix, sign: ExchangeSign) -> f64 {
    let u = exchange_symmetry(p, p, sign);
    operator_norm(&(u.adjoint() * &u - identity(p.nrows())))
}
