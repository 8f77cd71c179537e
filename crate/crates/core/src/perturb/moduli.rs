//! The perturbation moduli as exact rationals and integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuliError {
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    Epsilon(Rat),
    #[error("n must be at least 1")]
    ZeroN,
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn check(eps: &Rat, n: u64) -> Result<(), ModuliError> {
    if !eps.is_positive() || eps >= &Rat::one() {
        return Err(ModuliError::Epsilon(eps.clone()));
    }
    if n == 0 {
        return Err(ModuliError::ZeroN);
    }
    Ok(())
}

fn min3(a: Rat, b: Rat, c: Rat) -> Rat {
    a.min(b).min(c)
}

/// `δ₀(ε,1) = min{ε/2, 1/2}`,
/// `δ₀(ε,n+1) = min{ε/(4(n+1)), δ₀(ε/(12(n+1)²), n), 1}`.
pub fn delta0(eps: &Rat, n: u64) -> Result<Rat, ModuliError> {
    check(eps, n)?;
    Ok(delta0_unchecked(eps.clone(), n))
}

fn delta0_unchecked(eps: Rat, n: u64) -> Rat {
    if n == 1 {
        return (&eps / BigInt::from(2)).min(rat(1, 2));
    }
    let m = BigInt::from(n);
    let direct = &eps / (BigInt::from(4) * &m);
    let inner = delta0_unchecked(&eps / (BigInt::from(12) * &m * &m), n - 1);
    min3(direct, inner, Rat::one())
}

/// `δ₁(ε,1) = 1/2`, `δ₁(ε,n+1) = min{1/3, ε/(48n), δ₁(ε/(48n), n)}`.
pub fn delta1(eps: &Rat, n: u64) -> Result<Rat, ModuliError> {
    check(eps, n)?;
    Ok(delta1_unchecked(eps.clone(), n))
}

fn delta1_unchecked(eps: Rat, n: u64) -> Rat {
    if n == 1 {
        return rat(1, 2);
    }
    let shrunk = &eps / BigInt::from(48 * (n - 1));
    min3(rat(1, 3), shrunk.clone(), delta1_unchecked(shrunk, n - 1))
}

/// `δ₂(ε,n) = min{1/5, ε(8 - 5ε), δ₁(ε,n)}`.
pub fn delta2(eps: &Rat, n: u64) -> Result<Rat, ModuliError> {
    check(eps, n)?;
    let poly = eps * (Rat::from_integer(8.into()) - eps * BigInt::from(5));
    Ok(min3(rat(1, 5), poly, delta1_unchecked(eps.clone(), n)))
}

/// `2^{-(k+1)}`.
pub fn half_pow(k: u64) -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << (k + 1))
}

/// Least `N` with `2^{-N} < bound`, for `0 < bound`.
fn least_exponent(bound: &Rat) -> u64 {
    assert!(bound.is_positive(), "moduli are positive rationals");
    // 2^{-N} < p/q  <=>  q < p 2^N
    let (p, q) = (bound.numer(), bound.denom());
    let mut n = 0u64;
    let mut lhs = p.clone();
    while &lhs <= q {
        lhs <<= 1;
        n += 1;
    }
    n
}

/// Least `N` with `2^{-N} < δ₀(2^{-(k+1)}, n)`; `Δ₁(0,k) = 0`.
pub fn big_delta1(n: u64, k: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    least_exponent(&delta0_unchecked(half_pow(k), n))
}

/// `Δ₂(n,k) = n + k + 2`.
pub fn big_delta2(n: u64, k: u64) -> u64 {
    n + k + 2
}

/// Least `N` with `2^{-N} < δ₂(2^{-(k+1)}, n)`; `Δ₃(0,k) = 0`.
pub fn big_delta3(n: u64, k: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    least_exponent(&delta2(&half_pow(k), n).expect("2^{-(k+1)} lies in (0,1)"))
}

/// `Δ₄(n,k) = max{max_{m<=k} Δ₁(m, K+2), 1 + K}` with `K = max_{n'<=n} Δ₃(n',k)`.
pub fn big_delta4(n: u64, k: u64) -> u64 {
    let k3 = (0..=n).map(|m| big_delta3(m, k)).max().unwrap_or(0);
    let d1 = (0..=k).map(|m| big_delta1(m, k3 + 2)).max().unwrap_or(0);
    d1.max(k3 + 1)
}

/// Nonincreasing sequences of positive integers whose squares sum to `n`.
pub fn square_partitions(n: u64) -> Vec<Vec<u64>> {
    fn go(rest: u64, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        let mut p = cap.min(isqrt(rest));
        while p >= 1 {
            cur.push(p);
            go(rest - p * p, p, cur, out);
            cur.pop();
            p -= 1;
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, isqrt(n), &mut Vec::new(), &mut out);
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `k₀ = ⌈log₂(n 2^{k+1})⌉` for `n >= 1`.
pub fn glimm_k0(n: u64, k: u64) -> u64 {
    assert!(n >= 1);
    let target = BigInt::from(n) << (k + 1);
    let mut e = 0u64;
    let mut pow = BigInt::one();
    while pow < target {
        pow <<= 1;
        e += 1;
    }
    e
}

/// Glimm modulus: the maximum of `Δ₄(n, Δ₂(Σ n_j, k₀))` over
/// square partitions of `n`. `Δ(0,k) = 0`.
pub fn delta_glimm(n: u64, k: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let k0 = glimm_k0(n, k);
    square_partitions(n)
        .iter()
        .map(|p| big_delta4(n, big_delta2(p.iter().sum(), k0)))
        .max()
        .expect("(1,...,1) is always a square partition")
}

/// Parse `p/q` or an integer.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse::<BigInt>().ok()?, q.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!q.is_zero()).then(|| Rat::new(p, q))
}

/// `num/den` in lowest terms, always with an explicit denominator.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(delta0(&rat(1, 2), 1).unwrap(), rat(1, 4));
        assert_eq!(delta0(&rat(1, 2), 2).unwrap(), rat(1, 192));
        for e in [rat(1, 2), rat(1, 3), rat(99, 100)] {
            assert_eq!(delta1(&e, 1).unwrap(), rat(1, 2));
        }
        assert_eq!(delta1(&rat(1, 2), 2).unwrap(), rat(1, 96));
        assert_eq!(delta2(&rat(1, 2), 1).unwrap(), rat(1, 5));
        assert_eq!(delta0(&rat(1, 1), 1), Err(ModuliError::Epsilon(rat(1, 1))));
        assert_eq!(delta0(&rat(1, 2), 0), Err(ModuliError::ZeroN));
    }

    #[test]
    fn integer_moduli() {
        assert_eq!(big_delta2(3, 4), 9);
        for k in 0..=20 {
            assert_eq!(big_delta1(1, k), k + 3);
        }
        assert_eq!(square_partitions(2), vec![vec![1, 1]]);
        assert_eq!(square_partitions(5), vec![vec![2, 1], vec![1; 5]]);
        assert!(square_partitions(0).is_empty());
        assert_eq!(glimm_k0(1, 0), 1);
        assert_eq!(glimm_k0(3, 1), 4);
    }

    #[test]
    fn glimm_modulus_dominates_its_parts() {
        for n in 1..=5 {
            for k in 0..=3 {
                let d = delta_glimm(n, k);
                let k0 = glimm_k0(n, k);
                assert!(d >= big_delta2(n, k0) + 1, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn rationals_round_trip_as_text() {
        assert_eq!(parse_rat("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rat("3"), Some(rat(3, 1)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(format_rat(&rat(6, 4)), "3/2");
        assert_eq!(format_rat(&rat(4, 1)), "4/1");
    }
}
