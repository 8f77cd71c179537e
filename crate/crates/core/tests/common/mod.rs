//! Seeded generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use afkit::bratteli::{LabeledBratteliDiagram, Vertex};
use afkit::dimgroup::DimCertificate;
use afkit::findim::{hom_from_matrix, AFSequence, AlgebraHom, FinDimAlgebra};
use afkit::ordgrp::{IntMatrix, PosMatrix};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn random_algebra<R: Rng>(rng: &mut R, max_summands: usize, max_size: u64) -> FinDimAlgebra {
    let k = rng.random_range(1..=max_summands);
    let sizes: Vec<u64> = (0..k).map(|_| rng.random_range(1..=max_size)).collect();
    FinDimAlgebra::from_sizes(&sizes).unwrap()
}

fn random_rows<R: Rng>(rng: &mut R, rows: usize, cols: usize, max_entry: i64) -> Vec<Vec<BigInt>> {
    (0..rows).map(|_| (0..cols).map(|_| big(rng.random_range(0..=max_entry))).collect()).collect()
}

/// A random hom `source -> target`: entries are drawn up to `max_entry` and
/// then lowered at random until the embedded blocks fit.
pub fn random_hom<R: Rng>(rng: &mut R, source: &FinDimAlgebra, target: &FinDimAlgebra, max_entry: i64) -> AlgebraHom {
    let (rows, cols) = (target.num_summands(), source.num_summands());
    let mut m = random_rows(rng, rows, cols, max_entry);
    loop {
        let over = (0..rows).find(|&r| {
            let used: BigInt = (0..cols).map(|c| &m[r][c] * &source.summands()[c]).sum();
            used > target.summands()[r]
        });
        match over {
            None => break,
            Some(r) => {
                let nonzero: Vec<usize> = (0..cols).filter(|&c| !m[r][c].is_zero()).collect();
                let c = nonzero[rng.random_range(0..nonzero.len())];
                m[r][c] -= 1;
            }
        }
    }
    hom_from_matrix(source, target, PosMatrix::from_rows(m, cols).unwrap()).unwrap()
}

/// A random unital embedding out of `source` into an algebra with `rows`
/// summands: every row and column of the multiplicity matrix is nonzero and
/// the target sizes are exactly the images of the source sizes.
pub fn random_unital_hom<R: Rng>(rng: &mut R, source: &FinDimAlgebra, rows: usize, max_entry: i64) -> AlgebraHom {
    let cols = source.num_summands();
    let mut m = random_rows(rng, rows, cols, max_entry);
    for r in 0..rows {
        if m[r].iter().all(Zero::is_zero) {
            m[r][rng.random_range(0..cols)] = big(rng.random_range(1..=max_entry));
        }
    }
    for c in 0..cols {
        if (0..rows).all(|r| m[r][c].is_zero()) {
            m[rng.random_range(0..rows)][c] = big(rng.random_range(1..=max_entry));
        }
    }
    let sizes: Vec<BigInt> = m
        .iter()
        .map(|row| row.iter().zip(source.summands()).map(|(a, b)| a * b).sum())
        .collect();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| sizes[a].cmp(&sizes[b]));
    let target = FinDimAlgebra::new(order.iter().map(|&r| sizes[r].clone()).collect()).unwrap();
    let sorted: Vec<Vec<BigInt>> = order.iter().map(|&r| m[r].clone()).collect();
    hom_from_matrix(source, &target, PosMatrix::from_rows(sorted, cols).unwrap()).unwrap()
}

pub fn random_unital_af<R: Rng>(rng: &mut R, depth: usize) -> AFSequence {
    let mut algebras = vec![random_algebra(rng, 3, 3)];
    let mut homs = Vec::new();
    for _ in 0..depth {
        let rows = rng.random_range(1..=3);
        let h = random_unital_hom(rng, algebras.last().unwrap(), rows, 2);
        algebras.push(h.target().clone());
        homs.push(h);
    }
    AFSequence::new(algebras, homs).unwrap()
}

/// Labels at the top are drawn at random; each lower label is its inflow plus a random slack.
pub fn random_diagram<R: Rng>(rng: &mut R, max_levels: usize, max_vertices: usize, max_entry: i64) -> LabeledBratteliDiagram {
    let nlevels = rng.random_range(1..=max_levels);
    let sizes: Vec<usize> = (0..nlevels).map(|_| rng.random_range(1..=max_vertices)).collect();
    let mut levels = vec![(0..sizes[0]).map(|_| big(rng.random_range(1..=3))).collect::<Vec<_>>()];
    let mut edges = Vec::new();
    for k in 1..nlevels {
        let rows = random_rows(rng, sizes[k], sizes[k - 1], max_entry);
        let prev = levels.last().unwrap();
        let labels = rows
            .iter()
            .map(|row| row.iter().zip(prev).map(|(a, b)| a * b).sum::<BigInt>() + rng.random_range(0..=1))
            .collect();
        edges.push(PosMatrix::from_rows(rows, sizes[k - 1]).unwrap());
        levels.push(labels);
    }
    LabeledBratteliDiagram::new(levels, edges, false).unwrap()
}

/// Count downward paths by walking every one of them, edge by edge.
pub fn enumerate_paths(d: &LabeledBratteliDiagram, u: Vertex, v: Vertex) -> BigInt {
    fn walk(d: &LabeledBratteliDiagram, at: Vertex, v: Vertex, count: &mut BigInt) {
        if at.level == v.level {
            if at.index == v.index {
                *count += 1;
            }
            return;
        }
        let e = &d.edges()[at.level];
        for next in 0..e.rows() {
            let mult = e.get(next, at.index);
            let mut k = BigInt::zero();
            while &k < mult {
                walk(d, Vertex::new(at.level + 1, next), v, count);
                k += 1;
            }
        }
    }
    let mut count = BigInt::zero();
    if u.level < v.level {
        walk(d, u, v, &mut count);
    }
    count
}

/// `bonds[t-1] ... bonds[s]` by schoolbook multiplication.
pub fn naive_product(bonds: &[PosMatrix], s: usize, t: usize, rank_s: usize) -> Vec<Vec<BigInt>> {
    let mut acc: Vec<Vec<BigInt>> =
        (0..rank_s).map(|i| (0..rank_s).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    for b in &bonds[s..t] {
        let mut next = vec![vec![BigInt::zero(); rank_s]; b.rows()];
        for (i, row) in next.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..b.cols() {
                    *cell += b.get(i, k) * &acc[k][j];
                }
            }
        }
        acc = next;
    }
    acc
}

pub fn rows_of(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn bond_oracle(c: &DimCertificate, s: usize, t: usize) -> Vec<Vec<BigInt>> {
    naive_product(c.bonds(), s, t, c.rank(s))
}
