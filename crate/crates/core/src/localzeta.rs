//! Euler factors as exact rational functions in `T = p^{-s}`.
//!
//! A [`LocalFactor`] keeps its numerator and denominator as products of
//! powers of integer polynomials. Factors such as `(1 - T^f)^{-g}` with large
//! `g` are therefore stored in a few words, and expansion to a truncated
//! [`PowerSeries`] never materializes the full product.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, euler_phi, multiplicative_order};
use crate::error::{domain, inconsistency, Error, Result};
use crate::poly::IntPoly;

/// Truncated power series `c_0 + c_1 T + ... + c_D T^D` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PowerSeries {
    #[serde(serialize_with = "serialize_bigints")]
    coeffs: Vec<BigInt>,
}

fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

impl PowerSeries {
    /// Series with the given coefficients; the truncation degree is `len - 1`.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a power series keeps at least c_0");
        PowerSeries { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one(degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[0] = BigInt::one();
        PowerSeries { coeffs }
    }

    pub fn from_poly(poly: &IntPoly, degree: usize) -> Self {
        PowerSeries {
            coeffs: (0..=degree).map(|k| poly.coeff(k)).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, BigInt::zero());
        PowerSeries { coeffs }
    }

    /// Product truncated to the smaller of the two degrees.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let d = self.degree().min(other.degree());
        let mut out = vec![BigInt::zero(); d + 1];
        for (i, a) in self.coeffs.iter().take(d + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(d + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Multiplicative inverse; requires `c_0 = +-1`.
    pub fn inverse(&self) -> Result<PowerSeries> {
        let c0 = &self.coeffs[0];
        if !c0.abs().is_one() {
            return Err(domain(format!("series with constant term {c0} is not invertible over Z")));
        }
        let d = self.degree();
        let mut inv: Vec<BigInt> = Vec::with_capacity(d + 1);
        inv.push(c0.clone());
        for n in 1..=d {
            let mut acc = BigInt::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &inv[n - k];
                }
            }
            inv.push(-acc * c0);
        }
        Ok(PowerSeries { coeffs: inv })
    }

    pub fn pow(&self, mut e: u64) -> PowerSeries {
        let mut base = self.clone();
        let mut acc = PowerSeries::one(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Recover `N_1..N_D` from `Z = exp(sum N_v T^v / v)` via
    /// `T Z'/Z = sum N_v T^v`. Requires `c_0 = 1`.
    pub fn point_counts(&self) -> Result<Vec<BigInt>> {
        if !self.coeffs[0].is_one() {
            return Err(domain("point_counts: constant term must be 1"));
        }
        let d = self.degree();
        let mut counts: Vec<BigInt> = Vec::with_capacity(d);
        for n in 1..=d {
            let mut acc = BigInt::from(n) * &self.coeffs[n];
            for k in 1..n {
                acc -= &counts[k - 1] * &self.coeffs[n - k];
            }
            counts.push(acc);
        }
        Ok(counts)
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// `(base polynomial, exponent)`; every base has constant term 1.
pub type FactorPower = (IntPoly, u64);

/// An Euler factor `numerator(T) / denominator(T)` at one prime.
///
/// Both sides are kept as canonical products of powers (sorted, merged,
/// common bases cancelled), so `==` is equality of rational functions
/// whenever the bases are pairwise coprime, which holds for every factor
/// this crate builds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalFactor {
    prime: u64,
    numerator: Vec<FactorPower>,
    denominator: Vec<FactorPower>,
}

fn check_base(base: &IntPoly) -> Result<()> {
    if base.coeff(0) != BigInt::one() {
        return Err(domain(format!("local factor base {base} must have constant term 1")));
    }
    Ok(())
}

fn canonical(mut num: BTreeMap<Vec<BigInt>, i128>) -> (Vec<FactorPower>, Vec<FactorPower>) {
    num.retain(|k, e| *e != 0 && !(k.len() == 1 && k[0].is_one()));
    let mut n = Vec::new();
    let mut d = Vec::new();
    for (k, e) in num {
        let base = IntPoly::new(k);
        if e > 0 {
            n.push((base, e as u64));
        } else {
            d.push((base, (-e) as u64));
        }
    }
    (n, d)
}

impl LocalFactor {
    /// The removed factor: constant 1.
    pub fn one(prime: u64) -> Self {
        LocalFactor { prime, numerator: Vec::new(), denominator: Vec::new() }
    }

    pub fn new(prime: u64, numerator: IntPoly, denominator: IntPoly) -> Result<Self> {
        if denominator.is_zero() {
            return Err(domain("local factor denominator is the zero polynomial"));
        }
        Self::from_factors(prime, vec![(numerator, 1)], vec![(denominator, 1)])
    }

    pub fn from_factors(prime: u64, numerator: Vec<FactorPower>, denominator: Vec<FactorPower>) -> Result<Self> {
        let mut exps: BTreeMap<Vec<BigInt>, i128> = BTreeMap::new();
        for (base, e) in &numerator {
            check_base(base)?;
            *exps.entry(base.coeffs().to_vec()).or_default() += *e as i128;
        }
        for (base, e) in &denominator {
            check_base(base)?;
            *exps.entry(base.coeffs().to_vec()).or_default() -= *e as i128;
        }
        let (numerator, denominator) = canonical(exps);
        Ok(LocalFactor { prime, numerator, denominator })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn numerator_factors(&self) -> &[FactorPower] {
        &self.numerator
    }

    pub fn denominator_factors(&self) -> &[FactorPower] {
        &self.denominator
    }

    pub fn is_one(&self) -> bool {
        self.numerator.is_empty() && self.denominator.is_empty()
    }

    /// Fully multiplied-out numerator.
    pub fn numerator(&self) -> IntPoly {
        self.numerator.iter().fold(IntPoly::one(), |acc, (b, e)| &acc * &b.pow(*e))
    }

    pub fn denominator(&self) -> IntPoly {
        self.denominator.iter().fold(IntPoly::one(), |acc, (b, e)| &acc * &b.pow(*e))
    }

    /// Product of two factors at the same prime.
    pub fn mul(&self, other: &LocalFactor) -> Result<LocalFactor> {
        if self.prime != other.prime {
            return Err(domain(format!(
                "cannot multiply local factors at different primes {} and {}",
                self.prime, other.prime
            )));
        }
        let mut num = self.numerator.clone();
        num.extend(other.numerator.iter().cloned());
        let mut den = self.denominator.clone();
        den.extend(other.denominator.iter().cloned());
        Self::from_factors(self.prime, num, den)
    }

    pub fn product<'a>(prime: u64, factors: impl IntoIterator<Item = &'a LocalFactor>) -> Result<LocalFactor> {
        let mut num = Vec::new();
        let mut den = Vec::new();
        for f in factors {
            if f.prime != prime {
                return Err(domain(format!("local factor at {} in a product at {prime}", f.prime)));
            }
            num.extend(f.numerator.iter().cloned());
            den.extend(f.denominator.iter().cloned());
        }
        Self::from_factors(prime, num, den)
    }

    /// Power-series expansion through degree `degree`.
    pub fn expand(&self, degree: usize) -> PowerSeries {
        let mut acc = PowerSeries::one(degree);
        for (base, e) in &self.numerator {
            acc = acc.mul(&PowerSeries::from_poly(base, degree).pow(*e));
        }
        for (base, e) in &self.denominator {
            let inv = PowerSeries::from_poly(base, degree)
                .inverse()
                .expect("bases have constant term 1");
            acc = acc.mul(&inv.pow(*e));
        }
        acc
    }

    /// Value at the real point `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let mut value = 1.0f64;
        for (base, e) in &self.numerator {
            value *= base.eval_f64(t).powf(*e as f64);
        }
        for (base, e) in &self.denominator {
            let d = base.eval_f64(t);
            if d == 0.0 {
                return Err(Error::Pole(format!("factor {base} vanishes at T = {t}")));
            }
            value /= d.powf(*e as f64);
        }
        Ok(value)
    }

    /// `N_1..N_D` whose exponential generating series is this factor.
    pub fn point_counts(&self, degree: usize) -> Result<Vec<BigInt>> {
        self.expand(degree).point_counts()
    }
}

impl fmt::Display for LocalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(parts: &[FactorPower]) -> String {
            if parts.is_empty() {
                return "1".to_string();
            }
            parts
                .iter()
                .map(|(b, e)| if *e == 1 { format!("({b})") } else { format!("({b})^{e}") })
                .collect::<Vec<_>>()
                .join("*")
        }
        write!(f, "{} / {}", side(&self.numerator), side(&self.denominator))
    }
}

/// Degree-`D` series of `exp(sum_{v<=D} N_v T^v / v)`.
///
/// The coefficients are produced by `n c_n = sum_k N_k c_{n-k}`; a
/// non-integral `c_n` means the counts cannot come from a variety and is
/// reported as an inconsistency.
pub fn from_point_counts(prime: u64, counts: &[u128]) -> Result<PowerSeries> {
    let mut coeffs: Vec<BigInt> = vec![BigInt::one()];
    for n in 1..=counts.len() {
        let mut acc = BigInt::zero();
        for k in 1..=n {
            acc += BigInt::from(counts[k - 1]) * &coeffs[n - k];
        }
        let (q, r) = acc.div_rem(&BigInt::from(n));
        if !r.is_zero() {
            return Err(inconsistency(format!(
                "point counts {counts:?} at p = {prime} give a non-integral coefficient at degree {n}"
            )));
        }
        coeffs.push(q);
    }
    Ok(PowerSeries { coeffs })
}

/// Number of closed points of each degree: `b_d = (1/d) sum_{e|d} mu(d/e) N_e`.
pub fn closed_point_counts(prime: u64, counts: &[u128]) -> Result<Vec<u128>> {
    let mut out = Vec::with_capacity(counts.len());
    for d in 1..=counts.len() as u64 {
        let fact = arith::factorize(d)?;
        let mut acc: i128 = 0;
        for e in fact.divisors() {
            let mu = arith::moebius(d / e)? as i128;
            let n = i128::try_from(counts[e as usize - 1]).map_err(|_| Error::Overflow("closed_point_counts"))?;
            acc = acc
                .checked_add(mu * n)
                .ok_or(Error::Overflow("closed_point_counts"))?;
        }
        if acc < 0 || acc % d as i128 != 0 {
            return Err(inconsistency(format!(
                "point counts at p = {prime} give b_{d} = {acc}/{d}, not a nonnegative integer"
            )));
        }
        out.push((acc / d as i128) as u128);
    }
    Ok(out)
}

/// Euler factor of `zeta_{Q(zeta_n)}` at an unramified prime:
/// `(1 - T^f)^{-phi(n)/f}` with `f = ord_n(p)`.
pub fn cyclotomic_local_factor(n: u64, p: u64) -> Result<LocalFactor> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    if n % p == 0 {
        return Err(domain(format!("prime {p} divides {n}; the factor there is removed")));
    }
    let f = multiplicative_order(p, n)?;
    let g = euler_phi(n)? / f;
    LocalFactor::from_factors(p, vec![], vec![(IntPoly::one_minus(1, f as usize), g)])
}

/// A finite Euler product `prod_p F_p(p^{-s})` with the abscissa to the
/// right of which the full product converges.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct {
    label: String,
    factors: BTreeMap<u64, LocalFactor>,
    abscissa: Rational64,
}

impl EulerProduct {
    pub fn new(label: impl Into<String>, abscissa: Rational64) -> Self {
        EulerProduct { label: label.into(), factors: BTreeMap::new(), abscissa }
    }

    /// Build factors for each prime in parallel; the map is ordered by prime
    /// regardless of scheduling.
    pub fn from_primes<F>(label: impl Into<String>, abscissa: Rational64, primes: &[u64], factor: F) -> Result<Self>
    where
        F: Fn(u64) -> Result<LocalFactor> + Sync,
    {
        let built: Vec<LocalFactor> = primes.par_iter().map(|&p| factor(p)).collect::<Result<_>>()?;
        let mut product = Self::new(label, abscissa);
        for f in built {
            product.insert(f)?;
        }
        Ok(product)
    }

    pub fn insert(&mut self, factor: LocalFactor) -> Result<()> {
        if !arith::is_prime(factor.prime()) {
            return Err(domain(format!("Euler factor keyed by non-prime {}", factor.prime())));
        }
        self.factors.insert(factor.prime(), factor);
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn abscissa(&self) -> Rational64 {
        self.abscissa
    }

    pub fn factors(&self) -> &BTreeMap<u64, LocalFactor> {
        &self.factors
    }

    pub fn factor(&self, p: u64) -> Option<&LocalFactor> {
        self.factors.get(&p)
    }

    /// `prod_{p <= prime_bound} F_p(p^{-s})` in double precision; primes
    /// without a stored factor contribute 1.
    pub fn evaluate(&self, s: f64, prime_bound: u64) -> Result<f64> {
        let abscissa = *self.abscissa.numer() as f64 / *self.abscissa.denom() as f64;
        if !(s > abscissa) {
            return Err(domain(format!(
                "{}: s = {s} is not to the right of the abscissa {}",
                self.label, self.abscissa
            )));
        }
        let mut value = 1.0;
        for (&p, f) in self.factors.range(..=prime_bound) {
            value *= f.eval((p as f64).powf(-s))?;
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[i64]) -> PowerSeries {
        PowerSeries::from_i64(c)
    }

    /// Long division of polynomials as power series, independent of `inverse`.
    fn long_division(num: &[i64], den: &[i64], degree: usize) -> Vec<i64> {
        let mut rem: Vec<i64> = (0..=degree).map(|k| num.get(k).copied().unwrap_or(0)).collect();
        let mut out = vec![0; degree + 1];
        for k in 0..=degree {
            let q = rem[k] / den[0];
            out[k] = q;
            for (i, &d) in den.iter().enumerate() {
                if k + i <= degree {
                    rem[k + i] -= q * d;
                }
            }
        }
        out
    }

    #[test]
    fn expand_examples() {
        let geo = LocalFactor::new(2, IntPoly::one(), IntPoly::from_i64(&[1, -1])).unwrap();
        assert_eq!(geo.expand(3), series(&[1, 1, 1, 1]));
        let f = LocalFactor::new(2, IntPoly::from_i64(&[1, -1]), IntPoly::from_i64(&[1, -2])).unwrap();
        assert_eq!(f.expand(2), series(&long_division(&[1, -1], &[1, -2], 2)));
        assert_eq!(f.expand(2), series(&[1, 1, 2]));
        let g = LocalFactor::new(3, IntPoly::one(), IntPoly::from_i64(&[1, 0, -1])).unwrap();
        assert_eq!(g.expand(4), series(&[1, 0, 1, 0, 1]));
    }

    #[test]
    fn expand_matches_long_division() {
        let cases: &[(&[i64], &[i64])] = &[
            (&[1, 3, 5], &[1, -1, -1]),
            (&[1, -4, 7, 0, 2], &[1, 2]),
            (&[1], &[1, -5, 6]),
        ];
        for (num, den) in cases {
            let f = LocalFactor::new(5, IntPoly::from_i64(num), IntPoly::from_i64(den)).unwrap();
            assert_eq!(f.expand(9), series(&long_division(num, den, 9)));
        }
    }

    #[test]
    fn local_factor_invariants() {
        assert!(LocalFactor::new(2, IntPoly::from_i64(&[2, 1]), IntPoly::one()).is_err());
        assert!(LocalFactor::new(2, IntPoly::one(), IntPoly::zero()).is_err());
        let a = LocalFactor::new(2, IntPoly::from_i64(&[1, -1]), IntPoly::from_i64(&[1, -2])).unwrap();
        let b = LocalFactor::new(2, IntPoly::from_i64(&[1, -2]), IntPoly::from_i64(&[1, -1])).unwrap();
        assert!(a.mul(&b).unwrap().is_one());
        assert!(a.mul(&LocalFactor::one(3)).is_err());
    }

    #[test]
    fn point_count_examples() {
        assert_eq!(from_point_counts(7, &[0, 0, 0]).unwrap(), series(&[1, 0, 0, 0]));
        let gm3 = from_point_counts(3, &[2, 8]).unwrap();
        // (1 - T)(1 + 3T + 9T^2) = 1 + 2T + 6T^2
        assert_eq!(gm3, series(&[1, 2, 6]));
        let oracle = LocalFactor::new(3, IntPoly::from_i64(&[1, -1]), IntPoly::from_i64(&[1, -3])).unwrap();
        assert_eq!(gm3, oracle.expand(2));

        // y^2 = x^3 + x + 1 over F_5: a_5 = -3
        let ell = from_point_counts(5, &[9, 27]).unwrap();
        let oracle = LocalFactor::from_factors(
            5,
            vec![(IntPoly::from_i64(&[1, 3, 5]), 1)],
            vec![(IntPoly::from_i64(&[1, -1]), 1), (IntPoly::from_i64(&[1, -5]), 1)],
        )
        .unwrap();
        assert_eq!(ell, oracle.expand(2));
        assert!(from_point_counts(5, &[1, 2]).is_err());
    }

    #[test]
    fn closed_point_examples() {
        assert_eq!(closed_point_counts(2, &[1, 1, 1, 1, 1, 1]).unwrap(), vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(closed_point_counts(3, &[2, 8]).unwrap(), vec![2, 3]);
        assert_eq!(closed_point_counts(5, &[9, 27]).unwrap(), vec![9, 9]);
        assert!(closed_point_counts(5, &[2, 3]).is_err());
        assert!(closed_point_counts(5, &[3, 2]).is_err());
    }

    #[test]
    fn cyclotomic_factor_examples() {
        let z = cyclotomic_local_factor(1, 7).unwrap();
        assert_eq!(z, LocalFactor::new(7, IntPoly::one(), IntPoly::from_i64(&[1, -1])).unwrap());
        let f = cyclotomic_local_factor(12, 5).unwrap();
        assert_eq!(f.denominator_factors(), &[(IntPoly::from_i64(&[1, 0, -1]), 2)]);
        assert_eq!(f.denominator(), IntPoly::from_i64(&[1, 0, -2, 0, 1]));
        let f = cyclotomic_local_factor(4, 3).unwrap();
        assert_eq!(f.denominator(), IntPoly::from_i64(&[1, 0, -1]));
        assert!(cyclotomic_local_factor(6, 3).is_err());
        assert!(cyclotomic_local_factor(5, 4).is_err());
    }

    fn zeta_series(s: f64, terms: u64) -> f64 {
        (1..=terms).rev().map(|m| (m as f64).powf(-s)).sum()
    }

    #[test]
    fn evaluate_examples() {
        let empty = EulerProduct::new("empty", Rational64::from_integer(1));
        assert_eq!(empty.evaluate(2.0, 1000).unwrap(), 1.0);

        let primes = arith::primes_up_to(10_000);
        let zeta = EulerProduct::from_primes("zeta", Rational64::from_integer(1), &primes, |p| {
            LocalFactor::new(p, IntPoly::one(), IntPoly::from_i64(&[1, -1]))
        })
        .unwrap();
        let v = zeta.evaluate(2.0, 10_000).unwrap();
        assert!((v - zeta_series(2.0, 1_000_000)).abs() < 2e-4);
        assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < 2e-4);

        let gm = EulerProduct::from_primes("gm", Rational64::from_integer(2), &primes, |p| {
            LocalFactor::new(p, IntPoly::from_i64(&[1, -1]), IntPoly::from_i64(&[1, -(p as i64)]))
        })
        .unwrap();
        let target = zeta_series(2.0, 1_000_000) / zeta_series(3.0, 1_000_000);
        assert!((target - 1.368432).abs() < 1e-5);
        assert!((gm.evaluate(3.0, 10_000).unwrap() - target).abs() < 1e-3);
        assert!(matches!(gm.evaluate(2.0, 100), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluate_reports_poles() {
        let mut e = EulerProduct::new("pole", Rational64::new(-1, 1));
        e.insert(LocalFactor::new(2, IntPoly::one(), IntPoly::from_i64(&[1, -2])).unwrap())
            .unwrap();
        assert!(matches!(e.evaluate(1.0, 10), Err(Error::Pole(_))));
    }

    #[test]
    fn evaluate_is_monotone_in_primes() {
        let primes = arith::primes_up_to(2000);
        let zeta = EulerProduct::from_primes("zeta", Rational64::from_integer(1), &primes, |p| {
            LocalFactor::new(p, IntPoly::one(), IntPoly::from_i64(&[1, -1]))
        })
        .unwrap();
        let mut last = 1.0;
        for &p in &primes {
            let v = zeta.evaluate(1.5, p).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn closed_points_round_trip() {
        for p in [2u128, 3, 7, 13] {
            let counts: Vec<u128> = (1..=8).map(|v| p.pow(v) - 1).collect();
            let b = closed_point_counts(p as u64, &counts).unwrap();
            for nu in 1..=8usize {
                let total: u128 = (1..=nu).filter(|d| nu % d == 0).map(|d| d as u128 * b[d - 1]).sum();
                assert_eq!(total, counts[nu - 1]);
            }
        }
    }
}
