//! Elementary number theory on machine integers.
//!
//! Factorization is trial division backed by a deterministic Miller-Rabin
//! test, which is exact for every `u64`. Inputs are limited to `2^63 - 1`.

use std::collections::HashMap;

use num_integer::Integer;

use crate::error::{domain, Error, Result};

/// Largest integer accepted by [`factorize`] and the functions built on it.
pub const MAX_INPUT: u64 = i64::MAX as u64;

/// Prime factorization of a positive integer, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: u64,
    parts: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs in increasing prime order. Empty for 1.
    pub fn parts(&self) -> &[(u64, u32)] {
        &self.parts
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.parts.iter().map(|&(p, _)| p)
    }

    /// Exponent of `prime` in the factorization (0 if absent).
    pub fn valuation(&self, prime: u64) -> u32 {
        self.parts
            .iter()
            .find(|&&(p, _)| p == prime)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.parts.iter().all(|&(_, e)| e == 1)
    }

    pub fn euler_phi(&self) -> u64 {
        self.parts
            .iter()
            .map(|&(p, e)| p.pow(e - 1) * (p - 1))
            .product()
    }

    pub fn moebius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.parts.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All positive divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.parts {
            let current = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..current {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Combine two factorizations of coprime or overlapping values.
    pub fn multiply(&self, other: &Factorization) -> Result<Factorization> {
        let value = self
            .value
            .checked_mul(other.value)
            .filter(|&v| v <= MAX_INPUT)
            .ok_or(Error::Overflow("Factorization::multiply"))?;
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(self.parts.len() + other.parts.len());
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() || j < other.parts.len() {
            match (self.parts.get(i), other.parts.get(j)) {
                (Some(&(p, e)), Some(&(q, f))) if p == q => {
                    merged.push((p, e + f));
                    i += 1;
                    j += 1;
                }
                (Some(&(p, e)), Some(&(q, _))) if p < q => {
                    merged.push((p, e));
                    i += 1;
                }
                (Some(_), Some(&(q, f))) => {
                    merged.push((q, f));
                    j += 1;
                }
                (Some(&part), None) => {
                    merged.push(part);
                    i += 1;
                }
                (None, Some(&part)) => {
                    merged.push(part);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(Factorization { value, parts: merged })
    }
}

fn check_range(n: u64, what: &str) -> Result<()> {
    if n == 0 {
        return Err(domain(format!("{what}: argument must be positive")));
    }
    if n > MAX_INPUT {
        return Err(domain(format!("{what}: {n} exceeds 2^63 - 1")));
    }
    Ok(())
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn factorize(n: u64) -> Result<Factorization> {
    check_range(n, "factorize")?;
    let mut parts = Vec::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            parts.push((p, e));
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    let mut d = 5u64;
    let mut step = 2u64;
    let mut rest_is_prime = is_prime(rest);
    while !rest_is_prime && d.saturating_mul(d) <= rest {
        let before = rest;
        push(d, &mut rest);
        if rest != before {
            rest_is_prime = is_prime(rest);
        }
        d += step;
        step = 6 - step;
    }
    if rest > 1 {
        parts.push((rest, 1));
    }
    Ok(Factorization { value: n, parts })
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.euler_phi())
}

pub fn moebius(n: u64) -> Result<i8> {
    Ok(factorize(n)?.moebius())
}

pub fn divisors(n: u64) -> Result<Vec<u64>> {
    Ok(factorize(n)?.divisors())
}

/// Smallest `k >= 1` with `a^k = 1 (mod n)`.
pub fn multiplicative_order(a: u64, n: u64) -> Result<u64> {
    check_range(n, "multiplicative_order")?;
    if n == 1 {
        return Ok(1);
    }
    let a = a % n;
    if a.gcd(&n) != 1 {
        return Err(domain(format!("multiplicative_order: gcd({a}, {n}) > 1")));
    }
    let phi = euler_phi(n)?;
    let mut order = phi;
    for p in factorize(phi)?.primes() {
        while order % p == 0 && pow_mod(a, order / p, n) == 1 {
            order /= p;
        }
    }
    Ok(order)
}

/// All primes `<= bound` by the sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = extended_gcd(a as i128 % m as i128, m as i128);
    (g == 1).then(|| x.rem_euclid(m as i128) as u64)
}

fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = extended_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitGenerator {
    pub residue: u64,
    pub order: u64,
}

/// A basis of `(Z/n)^x`: every unit is uniquely `prod g_i^{e_i}` with
/// `0 <= e_i < order_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroupStructure {
    modulus: u64,
    generators: Vec<UnitGenerator>,
}

impl UnitGroupStructure {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[UnitGenerator] {
        &self.generators
    }

    pub fn orders(&self) -> Vec<u64> {
        self.generators.iter().map(|g| g.order).collect()
    }

    /// Group order, equal to `phi(modulus)`.
    pub fn order(&self) -> u64 {
        self.generators.iter().map(|g| g.order).product()
    }

    /// The unit with the given exponent vector.
    pub fn residue_of(&self, exponents: &[u64]) -> u64 {
        debug_assert_eq!(exponents.len(), self.generators.len());
        let n = self.modulus;
        self.generators
            .iter()
            .zip(exponents)
            .fold(1 % n, |acc, (g, &e)| mul_mod(acc, pow_mod(g.residue, e, n), n))
    }

    /// Exponent vectors in lexicographic order.
    pub fn exponent_vectors(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for g in &self.generators {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..g.order).map(move |e| {
                        let mut v = prefix.clone();
                        v.push(e);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Discrete-log table: unit residue to its exponent vector, built by
    /// walking every exponent vector.
    pub fn discrete_log_table(&self) -> HashMap<u64, Vec<u64>> {
        self.exponent_vectors()
            .into_iter()
            .map(|e| (self.residue_of(&e), e))
            .collect()
    }
}

fn primitive_root_prime(p: u64) -> Result<u64> {
    if p == 2 {
        return Ok(1);
    }
    let factors = factorize(p - 1)?;
    (2..p)
        .find(|&g| factors.primes().all(|q| pow_mod(g, (p - 1) / q, p) != 1))
        .ok_or_else(|| domain(format!("no primitive root modulo {p}")))
}

/// Unit group via CRT over prime powers; `(Z/2^k)^x = <-1> x <5>` for `k >= 3`.
pub fn unit_group(n: u64) -> Result<UnitGroupStructure> {
    let fact = factorize(n)?;
    let mut generators = Vec::new();
    for &(p, k) in fact.parts() {
        let pk = p.pow(k);
        let cofactor = n / pk;
        let local: Vec<(u64, u64)> = if p == 2 {
            match k {
                1 => vec![],
                2 => vec![(3, 2)],
                _ => vec![(pk - 1, 2), (5, pk / 4)],
            }
        } else {
            let mut g = primitive_root_prime(p)?;
            if k > 1 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            vec![(g, pk / p * (p - 1))]
        };
        for (g, order) in local {
            // r = g mod p^k and r = 1 mod cofactor
            let lift = if cofactor == 1 {
                g % pk
            } else {
                let inv = inverse_mod(cofactor % pk, pk)
                    .ok_or_else(|| domain("unit_group: CRT inverse missing"))?;
                let t = mul_mod((g + pk - 1) % pk, inv, pk);
                (1 + cofactor as u128 * t as u128) as u64 % n
            };
            generators.push(UnitGenerator { residue: lift, order });
        }
    }
    Ok(UnitGroupStructure { modulus: n, generators })
}

/// Number of elements of exact order `n` in `Z/d1 x Z/d2` (requires `d1 | d2`).
pub fn count_exact_order(d1: u64, d2: u64, n: u64) -> Result<u128> {
    if d1 == 0 || d2 == 0 || d2 % d1 != 0 {
        return Err(domain(format!("count_exact_order: need d1 | d2, got ({d1}, {d2})")));
    }
    let fact = factorize(n)?;
    let mut total: i128 = 0;
    for m in fact.divisors() {
        let mu = factorize(n / m)?.moebius();
        if mu == 0 {
            continue;
        }
        let term = (m.gcd(&d1) as i128)
            .checked_mul(m.gcd(&d2) as i128)
            .ok_or(Error::Overflow("count_exact_order"))?;
        total = total
            .checked_add(mu as i128 * term)
            .ok_or(Error::Overflow("count_exact_order"))?;
    }
    Ok(total as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while n > 1 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().parts().is_empty());
        assert_eq!(factorize(12).unwrap().parts(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(63).unwrap().parts(), trial_division(63).as_slice());
        assert_eq!(factorize(63).unwrap().parts(), &[(3, 2), (7, 1)]);
    }

    #[test]
    fn factorize_rejects_out_of_range() {
        assert!(matches!(factorize(0), Err(Error::Domain(_))));
        assert!(matches!(factorize(u64::MAX), Err(Error::Domain(_))));
        let big = factorize(MAX_INPUT).unwrap();
        assert_eq!(big.parts(), &[(7, 2), (73, 1), (127, 1), (337, 1), (92737, 1), (649657, 1)]);
    }

    #[test]
    fn factorize_matches_trial_division() {
        for n in 1..5000u64 {
            assert_eq!(factorize(n).unwrap().parts(), trial_division(n).as_slice(), "n = {n}");
        }
        // product of two primes near 2^31
        let n = 2147483647u64 * 2147483629;
        assert_eq!(factorize(n).unwrap().parts(), &[(2147483629, 1), (2147483647, 1)]);
    }

    #[test]
    fn primality_against_sieve() {
        let primes = primes_up_to(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), primes.binary_search(&n).is_ok(), "n = {n}");
        }
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn phi_and_moebius_examples() {
        assert_eq!(euler_phi(1).unwrap(), 1);
        assert_eq!(moebius(1).unwrap(), 1);
        assert_eq!(euler_phi(12).unwrap(), 4);
        assert_eq!(moebius(30).unwrap(), -1);
        assert_eq!(moebius(12).unwrap(), 0);
    }

    #[test]
    fn divisor_sums() {
        for n in 1..=10_000u64 {
            let divs = divisors(n).unwrap();
            let phi_sum: u64 = divs.iter().map(|&d| euler_phi(d).unwrap()).sum();
            assert_eq!(phi_sum, n);
            let mu_sum: i64 = divs.iter().map(|&d| moebius(d).unwrap() as i64).sum();
            assert_eq!(mu_sum, (n == 1) as i64);
        }
    }

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order(1, 5).unwrap(), 1);
        assert_eq!(multiplicative_order(2, 7).unwrap(), 3);
        assert_eq!(multiplicative_order(5, 12).unwrap(), 2);
        assert!(matches!(multiplicative_order(2, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn order_divides_phi() {
        for n in 1..=2000u64 {
            let phi = euler_phi(n).unwrap();
            for a in 1..n.max(2) {
                if a.gcd(&n) != 1 {
                    continue;
                }
                let k = multiplicative_order(a, n).unwrap();
                assert_eq!(phi % k, 0);
                assert_eq!(pow_mod(a, k, n), 1 % n);
            }
        }
    }

    #[test]
    fn unit_group_examples() {
        assert!(unit_group(1).unwrap().generators().is_empty());
        let g8 = unit_group(8).unwrap();
        assert_eq!(g8.orders(), vec![2, 2]);
        let mut elems: Vec<u64> = g8.exponent_vectors().iter().map(|e| g8.residue_of(e)).collect();
        elems.sort();
        assert_eq!(elems, vec![1, 3, 5, 7]);
        let g5 = unit_group(5).unwrap();
        assert_eq!(g5.orders(), vec![4]);
        assert_eq!(g5.generators()[0].residue, 2);
    }

    #[test]
    fn unit_group_is_a_basis() {
        for n in 1..=500u64 {
            let g = unit_group(n).unwrap();
            assert_eq!(g.order(), euler_phi(n).unwrap());
            let table = g.discrete_log_table();
            assert_eq!(table.len() as u64, g.order(), "n = {n}");
            for &r in table.keys() {
                assert_eq!(r.gcd(&n), 1);
            }
            for gen in g.generators() {
                assert_eq!(multiplicative_order(gen.residue, n).unwrap(), gen.order);
            }
        }
    }

    #[test]
    fn exact_order_examples() {
        for d in 1..30 {
            for n in 1..40 {
                let expected = if d % n == 0 { euler_phi(n).unwrap() as u128 } else { 0 };
                assert_eq!(count_exact_order(1, d, n).unwrap(), expected);
            }
        }
        assert_eq!(count_exact_order(2, 6, 2).unwrap(), 3);
        assert_eq!(count_exact_order(3, 3, 3).unwrap(), 8);
        assert!(count_exact_order(2, 3, 1).is_err());
    }

    fn brute_force_orders(d1: u64, d2: u64) -> HashMap<u64, u128> {
        let mut hist = HashMap::new();
        for x in 0..d1 {
            for y in 0..d2 {
                let ox = d1 / x.gcd(&d1);
                let oy = d2 / y.gcd(&d2);
                *hist.entry(ox.lcm(&oy)).or_insert(0) += 1;
            }
        }
        hist
    }

    #[test]
    fn exact_order_matches_enumeration() {
        for d1 in 1..=100u64 {
            let mut d2 = d1;
            while d1 * d2 <= 10_000 {
                let hist = brute_force_orders(d1, d2);
                let mut total = 0u128;
                for n in divisors(d2).unwrap() {
                    let c = count_exact_order(d1, d2, n).unwrap();
                    assert_eq!(c, hist.get(&n).copied().unwrap_or(0), "({d1},{d2},{n})");
                    total += c;
                }
                assert_eq!(total, (d1 * d2) as u128);
                d2 += d1;
            }
        }
    }
}
