//! Finite fields `F_{p^k}` and polynomials over `F_p`.
//!
//! `F_{p^k}` is modeled as `F_p[T]/(m)` where `m` is the smallest monic
//! irreducible polynomial of degree `k` in lexicographic order (coefficients
//! read from `T^{k-1}` down to `T^0`). Elements are stored as discrete logs
//! to a fixed primitive element; addition goes through a Zech-logarithm
//! table, so every field operation is a table lookup.

use std::fmt;

use crate::arith::{self, is_prime};
use crate::error::{domain, resource, Result};
use crate::poly::IntPoly;

/// Largest field order [`FiniteField::new`] will tabulate.
pub const MAX_FIELD_ORDER: u64 = 1_000_000;

/// Polynomial over `F_p`, coefficients constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % p).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn from_int_poly(poly: &IntPoly, p: u64) -> Self {
        let pb = num_bigint::BigInt::from(p);
        let coeffs = poly
            .coeffs()
            .iter()
            .map(|c| {
                let r = ((c % &pb) + &pb) % &pb;
                u64::try_from(r).expect("residue fits in u64")
            })
            .collect();
        Self::new(p, coeffs)
    }

    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, vec![1])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0) + other.coeffs.get(i).unwrap_or(&0))
            .collect();
        FpPoly::new(self.p, c)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let p = self.p;
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0) + p - other.coeffs.get(i).unwrap_or(&0))
            .collect();
        FpPoly::new(p, c)
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::new(self.p, vec![]);
        }
        let p = self.p as u128;
        let mut out = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a as u128 * b as u128) % p;
            }
        }
        FpPoly::new(self.p, out.into_iter().map(|c| c as u64).collect())
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let p = self.p;
        let lead_inv = arith::inverse_mod(divisor.coeffs[dd], p).expect("p is prime");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (FpPoly::new(p, vec![]), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = arith::mul_mod(rem[k + dd], lead_inv, p);
            if q != 0 {
                for (i, &c) in divisor.coeffs.iter().enumerate() {
                    rem[k + i] = (rem[k + i] + p - arith::mul_mod(q, c, p)) % p;
                }
            }
            quot[k] = q;
        }
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn rem(&self, divisor: &FpPoly) -> FpPoly {
        self.div_rem(divisor).1
    }

    pub fn monic(&self) -> FpPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = arith::inverse_mod(lead, self.p).expect("p is prime");
                FpPoly::new(self.p, self.coeffs.iter().map(|&c| arith::mul_mod(c, inv, self.p)).collect())
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn mul_mod(&self, other: &FpPoly, modulus: &FpPoly) -> FpPoly {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut e: u64, modulus: &FpPoly) -> FpPoly {
        let mut base = self.rem(modulus);
        let mut acc = FpPoly::one(self.p).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(&base, modulus);
            }
        }
        acc
    }

    /// Rabin's test: `f | T^{p^k} - T` and `gcd(T^{p^{k/r}} - T, f) = 1`
    /// for each prime `r | k`.
    pub fn is_irreducible(&self) -> bool {
        let k = match self.degree() {
            None | Some(0) => return false,
            Some(k) => k as u64,
        };
        let x = FpPoly::x(self.p);
        // frob[i] = T^{p^i} mod f
        let mut frob = vec![x.rem(self)];
        for i in 1..=k as usize {
            frob.push(frob[i - 1].pow_mod(self.p, self));
        }
        if frob[k as usize] != x.rem(self) {
            return false;
        }
        let fact = arith::factorize(k).expect("degree is positive");
        let coprime = fact.primes().all(|r| {
            let h = frob[(k / r) as usize].sub(&x);
            self.gcd(&h).degree() == Some(0)
        });
        coprime
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// `(d, product of all irreducible factors of degree d)`.
    pub fn distinct_degree_factorization(&self) -> Vec<(usize, FpPoly)> {
        let mut out = Vec::new();
        let mut f = self.monic();
        let x = FpPoly::x(self.p);
        let mut h = x.rem(&f);
        let mut d = 0usize;
        while f.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = h.pow_mod(self.p, &f);
            let g = f.gcd(&h.sub(&x));
            if g.degree().unwrap_or(0) > 0 {
                f = f.div_rem(&g).0;
                h = h.rem(&f);
                out.push((d, g));
            }
        }
        if let Some(deg) = f.degree().filter(|&k| k > 0) {
            out.push((deg, f));
        }
        out
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ints: Vec<i64> = self.coeffs.iter().map(|&c| c as i64).collect();
        write!(f, "{} (mod {})", IntPoly::from_i64(&ints), self.p)
    }
}

const ZERO_LOG: u32 = u32::MAX;

/// An element of a [`FiniteField`], stored as its discrete log.
///
/// Only meaningful together with the field that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(u32);

impl Fq {
    pub fn is_zero(self) -> bool {
        self.0 == ZERO_LOG
    }

    /// Discrete log to the field's primitive element, `None` for zero.
    pub fn log(self) -> Option<u32> {
        (!self.is_zero()).then_some(self.0)
    }
}

/// Table-driven `F_{p^k}`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u64,
    degree: u32,
    order: u64,
    modulus: FpPoly,
    /// exp[k] = coefficient index of g^k
    exp: Vec<u32>,
    /// log[index] = k with g^k = element, ZERO_LOG at index 0
    log: Vec<u32>,
    /// zech[k] = log(1 + g^k)
    zech: Vec<u32>,
    /// log(-1), 0 in characteristic 2
    neg_one: u32,
}

fn index_to_poly(p: u64, degree: u32, mut index: u64) -> FpPoly {
    let mut coeffs = Vec::with_capacity(degree as usize);
    for _ in 0..degree {
        coeffs.push(index % p);
        index /= p;
    }
    FpPoly::new(p, coeffs)
}

/// Smallest monic irreducible polynomial of the given degree over `F_p`.
pub fn smallest_irreducible(p: u64, degree: u32) -> Result<FpPoly> {
    if !is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    if degree == 0 {
        return Err(domain("field extension degree must be positive"));
    }
    let count = p
        .checked_pow(degree)
        .ok_or_else(|| resource(format!("{p}^{degree} overflows")))?;
    (0..count)
        .map(|low| {
            let mut c = index_to_poly(p, degree, low).coeffs;
            c.resize(degree as usize, 0);
            c.push(1);
            FpPoly::new(p, c)
        })
        .find(FpPoly::is_irreducible)
        .ok_or_else(|| domain(format!("no irreducible polynomial of degree {degree} over F_{p}")))
}

impl FiniteField {
    pub fn new(p: u64, degree: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(domain(format!("{p} is not prime")));
        }
        let order = p
            .checked_pow(degree)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or_else(|| resource(format!("F_{{{p}^{degree}}} exceeds the field budget {MAX_FIELD_ORDER}")))?;
        let modulus = smallest_irreducible(p, degree)?;
        let units = order - 1;
        let unit_factors = arith::factorize(units.max(1))?;
        let is_primitive = |poly: &FpPoly| {
            unit_factors
                .primes()
                .all(|r| poly.pow_mod(units / r, &modulus) != FpPoly::one(p))
        };
        let generator = (1..order)
            .map(|i| index_to_poly(p, degree, i))
            .find(|g| is_primitive(g))
            .ok_or_else(|| domain(format!("F_{order} has no primitive element")))?;

        let mut exp = Vec::with_capacity(units as usize);
        let mut log = vec![ZERO_LOG; order as usize];
        let k = degree as usize;
        let m = modulus.coeffs();
        let mut g = generator.coeffs.clone();
        g.resize(k, 0);
        let mut current = vec![0u64; k];
        current[0] = 1;
        let mut prod = vec![0u128; 2 * k - 1];
        for step in 0..units {
            let idx = current.iter().rev().fold(0u64, |acc, &c| acc * p + c);
            exp.push(idx as u32);
            log[idx as usize] = step as u32;
            // current <- current * g mod m
            prod.iter_mut().for_each(|c| *c = 0);
            for (i, &a) in current.iter().enumerate().filter(|(_, &a)| a != 0) {
                for (j, &b) in g.iter().enumerate() {
                    prod[i + j] += a as u128 * b as u128;
                }
            }
            for i in (k..2 * k - 1).rev() {
                let c = (prod[i] % p as u128) as u64;
                if c != 0 {
                    for j in 0..k {
                        prod[i - k + j] += (p - c) as u128 * m[j] as u128;
                    }
                }
            }
            for (dst, &src) in current.iter_mut().zip(&prod) {
                *dst = (src % p as u128) as u64;
            }
        }
        let zech = exp
            .iter()
            .map(|&idx| {
                let c0 = idx as u64 % p;
                let shifted = idx as u64 - c0 + (c0 + 1) % p;
                log[shifted as usize]
            })
            .collect();
        let neg_one = if p == 2 { 0 } else { (units / 2) as u32 };
        Ok(FiniteField { p, degree, order, modulus, exp, log, zech, neg_one })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &FpPoly {
        &self.modulus
    }

    fn units(&self) -> u64 {
        self.order - 1
    }

    pub fn zero(&self) -> Fq {
        Fq(ZERO_LOG)
    }

    pub fn one(&self) -> Fq {
        Fq(0)
    }

    pub fn primitive_element(&self) -> Fq {
        Fq(1 % self.units() as u32)
    }

    /// `g^k` for the field's primitive element `g`.
    pub fn from_log(&self, k: u64) -> Fq {
        Fq((k % self.units()) as u32)
    }

    /// Element with coefficient vector given by the base-`p` digits of `index`.
    pub fn from_index(&self, index: u64) -> Fq {
        Fq(self.log[index as usize])
    }

    pub fn index(&self, x: Fq) -> u64 {
        if x.is_zero() {
            0
        } else {
            self.exp[x.0 as usize] as u64
        }
    }

    /// Coordinates in the basis `1, T, ..., T^{k-1}`.
    pub fn coordinates(&self, x: Fq) -> Vec<u64> {
        let mut c = index_to_poly(self.p, self.degree, self.index(x)).coeffs;
        c.resize(self.degree as usize, 0);
        c
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fq {
        self.from_index(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let units = self.units() as u32;
        let k = if b.0 >= a.0 { b.0 - a.0 } else { b.0 + units - a.0 };
        let z = self.zech[k as usize];
        if z == ZERO_LOG {
            Fq(ZERO_LOG)
        } else {
            Fq(((a.0 as u64 + z as u64) % units as u64) as u32)
        }
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if a.is_zero() {
            a
        } else {
            Fq(((a.0 as u64 + self.neg_one as u64) % self.units()) as u32)
        }
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.is_zero() || b.is_zero() {
            Fq(ZERO_LOG)
        } else {
            Fq(((a.0 as u64 + b.0 as u64) % self.units()) as u32)
        }
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        (!a.is_zero()).then(|| Fq(((self.units() - a.0 as u64) % self.units()) as u32))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if a.is_zero() {
            return if e == 0 { self.one() } else { a };
        }
        Fq(((a.0 as u128 * e as u128) % self.units() as u128) as u32)
    }

    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.p)
    }

    pub fn is_square(&self, a: Fq) -> bool {
        a.is_zero() || self.p == 2 || a.0 % 2 == 0
    }

    /// One square root, if any.
    pub fn sqrt(&self, a: Fq) -> Option<Fq> {
        if a.is_zero() {
            return Some(a);
        }
        if a.0 % 2 == 0 {
            Some(Fq(a.0 / 2))
        } else if self.p == 2 {
            // units is odd, so a + units is even
            Some(Fq(((a.0 as u64 + self.units()) / 2) as u32))
        } else {
            None
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: Fq) -> Option<u64> {
        use num_integer::Integer;
        a.log().map(|k| self.units() / (k as u64).gcd(&self.units()))
    }

    /// All elements: zero first, then `g^0, g^1, ...`.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        std::iter::once(self.zero()).chain((0..self.units() as u32).map(Fq))
    }

    pub fn units_iter(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.units() as u32).map(Fq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_irreducibles() {
        assert_eq!(smallest_irreducible(5, 1).unwrap().coeffs(), &[0, 1]);
        // T^2 + 2 is irreducible over F_5 (2 is not a square), T^2 + 0, T^2 + 1 are not
        assert_eq!(smallest_irreducible(5, 2).unwrap().coeffs(), &[2, 0, 1]);
        assert_eq!(smallest_irreducible(2, 2).unwrap().coeffs(), &[1, 1, 1]);
        assert_eq!(smallest_irreducible(2, 3).unwrap().coeffs(), &[1, 1, 0, 1]);
    }

    fn count_irreducible_brute(p: u64, k: u32) -> u64 {
        (0..p.pow(k))
            .filter(|&low| {
                let mut c = index_to_poly(p, k, low).coeffs;
                c.resize(k as usize, 0);
                c.push(1);
                FpPoly::new(p, c).is_irreducible()
            })
            .count() as u64
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        for (p, k) in [(2u64, 1u32), (2, 4), (2, 6), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)] {
            let mut total: i64 = 0;
            for d in arith::divisors(k as u64).unwrap() {
                total += arith::moebius(k as u64 / d).unwrap() as i64 * p.pow(d as u32) as i64;
            }
            assert_eq!(count_irreducible_brute(p, k) as i64, total / k as i64, "p={p} k={k}");
        }
    }

    #[test]
    fn field_axioms_small() {
        for (p, k) in [(2u64, 3u32), (3, 2), (5, 1), (5, 2), (7, 1)] {
            let f = FiniteField::new(p, k).unwrap();
            let elems: Vec<Fq> = f.elements().collect();
            assert_eq!(elems.len() as u64, f.order());
            for &a in &elems {
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                for &b in &elems {
                    // addition agrees with coordinate-wise addition
                    let ca = f.coordinates(a);
                    let cb = f.coordinates(b);
                    let sum: Vec<u64> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                    assert_eq!(f.coordinates(f.add(a, b)), sum);
                    // multiplication agrees with polynomial multiplication mod m
                    let pa = FpPoly::new(p, ca.clone());
                    let pb = FpPoly::new(p, cb.clone());
                    let mut prod = pa.mul_mod(&pb, f.modulus()).coeffs().to_vec();
                    prod.resize(k as usize, 0);
                    assert_eq!(f.coordinates(f.mul(a, b)), prod);
                }
            }
        }
    }

    #[test]
    fn squares_and_roots() {
        let f = FiniteField::new(7, 2).unwrap();
        let squares = f.elements().filter(|&a| f.is_square(a)).count();
        assert_eq!(squares, 1 + 48 / 2);
        for a in f.elements() {
            if let Some(r) = f.sqrt(a) {
                assert_eq!(f.mul(r, r), a);
            }
        }
        let f2 = FiniteField::new(2, 4).unwrap();
        for a in f2.elements() {
            let r = f2.sqrt(a).unwrap();
            assert_eq!(f2.mul(r, r), a);
        }
    }

    #[test]
    fn frobenius_fixes_prime_field() {
        let f = FiniteField::new(5, 3).unwrap();
        let fixed = f.elements().filter(|&a| f.frobenius(a) == a).count();
        assert_eq!(fixed, 5);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(FiniteField::new(7, 8).is_err());
        assert!(FiniteField::new(4, 1).is_err());
    }

    #[test]
    fn ddf_splits_cyclotomic() {
        // T^4 + 1 = Phi_8 over F_3 splits into two quadratics
        let f = FpPoly::new(3, vec![1, 0, 0, 0, 1]);
        let ddf = f.distinct_degree_factorization();
        assert_eq!(ddf.len(), 1);
        assert_eq!(ddf[0].0, 2);
        assert_eq!(ddf[0].1.degree(), Some(4));
        // (T - 1)(T^2 + T + 1) over F_2 = T^3 + 1
        let g = FpPoly::new(2, vec![1, 0, 0, 1]);
        let ddf = g.distinct_degree_factorization();
        assert_eq!(ddf.iter().map(|(d, p)| (*d, p.degree().unwrap())).collect::<Vec<_>>(), vec![(1, 1), (2, 2)]);
    }
}
