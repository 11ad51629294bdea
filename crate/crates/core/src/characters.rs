//! Dirichlet characters modulo `n` and the character-side regrouping of
//! cyclotomic Euler factors.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde_json::json;

use crate::arith::{self, UnitGroupStructure};
use crate::error::{domain, Result};
use crate::report::{CaseRecord, Certificate};

/// `(Z/n)^x` together with its discrete-log table, shared by all characters
/// of one modulus.
#[derive(Debug)]
pub struct CharacterGroup {
    units: UnitGroupStructure,
    dlog: HashMap<u64, Vec<u64>>,
    /// lcm of generator orders; every character value is an `exponent`-th root of unity
    exponent: u64,
}

impl CharacterGroup {
    pub fn new(n: u64) -> Result<Arc<Self>> {
        let units = arith::unit_group(n)?;
        let dlog = units.discrete_log_table();
        let exponent = units.orders().into_iter().fold(1, |acc: u64, o| acc.lcm(&o));
        Ok(Arc::new(CharacterGroup { units, dlog, exponent }))
    }

    pub fn modulus(&self) -> u64 {
        self.units.modulus()
    }

    pub fn units(&self) -> &UnitGroupStructure {
        &self.units
    }

    /// Exponent vector of a unit, `None` for non-units.
    pub fn discrete_log(&self, a: i64) -> Option<&[u64]> {
        let r = a.rem_euclid(self.modulus() as i64) as u64;
        self.dlog.get(&r).map(Vec::as_slice)
    }
}

/// A character `chi` with `chi(g_i) = exp(2 pi i e_i / order_i)` on the
/// generators `g_i` of [`arith::unit_group`].
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<CharacterGroup>,
    exponents: Vec<u64>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.modulus())
            .field("exponents", &self.exponents)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn new(group: Arc<CharacterGroup>, exponents: Vec<u64>) -> Result<Self> {
        let orders = group.units.orders();
        if exponents.len() != orders.len() || exponents.iter().zip(&orders).any(|(e, o)| e >= o) {
            return Err(domain(format!(
                "exponent vector {exponents:?} does not fit generator orders {orders:?}"
            )));
        }
        Ok(DirichletCharacter { group, exponents })
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.group
            .units
            .orders()
            .iter()
            .zip(&self.exponents)
            .fold(1, |acc, (&o, &e)| acc.lcm(&(o / o.gcd(&e))))
    }

    /// `chi(a) = exp(2 pi i k / L)`: returns `(k, L)` with `L` the exponent
    /// of the unit group, or `None` when `a` is not a unit.
    pub fn root_index(&self, a: i64) -> Option<(u64, u64)> {
        let logs = self.group.discrete_log(a)?;
        let l = self.group.exponent;
        let k = self
            .group
            .units
            .orders()
            .iter()
            .zip(&self.exponents)
            .zip(logs)
            .fold(0u128, |acc, ((&o, &e), &d)| acc + (e as u128 * d as u128 % o as u128) * (l / o) as u128);
        Some(((k % l as u128) as u64, l))
    }

    pub fn value(&self, a: i64) -> Complex64 {
        match self.root_index(a) {
            None => Complex64::new(0.0, 0.0),
            Some((0, _)) => Complex64::new(1.0, 0.0),
            Some((k, l)) => {
                // reduce to lowest terms so that e.g. k/L = 1/2 gives exactly -1
                let g = k.gcd(&l);
                let (k, l) = (k / g, l / g);
                match (k, l) {
                    (1, 2) => Complex64::new(-1.0, 0.0),
                    (1, 4) => Complex64::new(0.0, 1.0),
                    (3, 4) => Complex64::new(0.0, -1.0),
                    _ => Complex64::from_polar(1.0, TAU * k as f64 / l as f64),
                }
            }
        }
    }
}

/// All `phi(n)` characters mod `n`, lexicographic in the exponent vector.
pub fn characters(n: u64) -> Result<Vec<DirichletCharacter>> {
    let group = CharacterGroup::new(n)?;
    Ok(group
        .units
        .exponent_vectors()
        .into_iter()
        .map(|e| DirichletCharacter { group: Arc::clone(&group), exponents: e })
        .collect())
}

pub fn chi_value(chi: &DirichletCharacter, a: i64) -> Complex64 {
    chi.value(a)
}

/// `sum_chi chi(a)` over all characters mod `n`.
pub fn character_sum(n: u64, a: i64) -> Result<Complex64> {
    Ok(characters(n)?.iter().map(|c| c.value(a)).sum())
}

/// Euler factor `(1 - chi(p) T)^{-1}` of `L(chi, s)` at `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterLocalFactor {
    pub prime: u64,
    pub chi_p: Complex64,
}

impl CharacterLocalFactor {
    pub fn eval(&self, t: f64) -> Complex64 {
        (Complex64::new(1.0, 0.0) - self.chi_p * t).inv()
    }
}

pub fn dirichlet_local_factor(chi: &DirichletCharacter, p: u64) -> Result<CharacterLocalFactor> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    Ok(CharacterLocalFactor { prime: p, chi_p: chi.value(p as i64) })
}

/// Truncated Euler product `prod_{p <= prime_bound} (1 - chi(p) p^{-s})^{-1}`.
pub fn dirichlet_l(chi: &DirichletCharacter, s: f64, prime_bound: u64) -> Result<Complex64> {
    dirichlet_l_over(chi, s, &arith::primes_up_to(prime_bound))
}

/// As [`dirichlet_l`] over an explicit prime list.
pub fn dirichlet_l_over(chi: &DirichletCharacter, s: f64, primes: &[u64]) -> Result<Complex64> {
    if !(s > 1.0) {
        return Err(domain(format!("L(chi, s) needs s > 1, got {s}")));
    }
    Ok(primes
        .iter()
        .filter(|&&p| chi.modulus() % p != 0)
        .map(|&p| CharacterLocalFactor { prime: p, chi_p: chi.value(p as i64) }.eval((p as f64).powf(-s)))
        .product())
}

/// Coefficients of `prod_chi (1 - chi(p) T)` in complex arithmetic.
///
/// Multiplying the linear factors into a coefficient vector one at a time
/// passes through partial products with huge coefficients and loses
/// everything to cancellation. Instead the product is evaluated at the
/// `M`-th roots of unity (`M` > degree), where every factor has modulus at
/// most 2, and the coefficients are recovered by an inverse DFT.
pub fn character_product_coefficients(n: u64, p: u64) -> Result<Vec<Complex64>> {
    let values: Vec<Complex64> = characters(n)?.iter().map(|chi| chi.value(p as i64)).collect();
    let degree = values.len();
    let m = (degree + 1).next_power_of_two();
    let roots: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / m as f64)).collect();
    let one = Complex64::new(1.0, 0.0);
    let samples: Vec<Complex64> = roots
        .iter()
        .map(|&w| values.iter().map(|&c| one - c * w).product())
        .collect();
    Ok((0..=degree)
        .map(|k| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * roots[(j * k) % m].conj())
                .sum();
            sum / m as f64
        })
        .collect())
}

/// Coefficients of `(1 - T^f)^g` as exact integers.
fn regrouped_coefficients(f: u64, g: u64) -> Vec<i128> {
    let mut out = vec![0i128; (f * g) as usize + 1];
    let mut binom: i128 = 1;
    for k in 0..=g {
        out[(k * f) as usize] = if k % 2 == 0 { binom } else { -binom };
        binom = binom * (g - k) as i128 / (k + 1) as i128;
    }
    out
}

/// Coefficient tolerance for a regrouping whose exact side has largest
/// coefficient `scale`: `1e-9` absolute for scale up to 1, `1e-9 * scale`
/// beyond. Coefficients of `(1 - T^f)^g` reach `C(g, g/2)` (about `1.4e11`
/// for `n = 41`, `p = 83`), so no double-precision expansion can meet a
/// fixed absolute bound there.
pub fn regrouping_tolerance(scale: i128) -> f64 {
    1e-9 * (scale.unsigned_abs() as f64).max(1.0)
}

/// Checks `prod_{chi mod n} (1 - chi(p) T) = (1 - T^f)^{phi(n)/f}` with
/// `f = ord_n(p)`, coefficient by coefficient.
pub fn verify_character_regrouping(n: u64, p: u64) -> Result<Certificate> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    if n % p == 0 {
        return Err(domain(format!("prime {p} divides the modulus {n}")));
    }
    let f = arith::multiplicative_order(p, n)?;
    let g = arith::euler_phi(n)? / f;
    let lhs = character_product_coefficients(n, p)?;
    let rhs = regrouped_coefficients(f, g);
    let scale = rhs.iter().map(|c| c.abs()).max().unwrap_or(1);
    let tol = regrouping_tolerance(scale);
    let mut cert = Certificate::new("chars.regrouping");
    cert.push(CaseRecord::exact(
        "degree",
        json!({ "n": n, "p": p, "f": f, "g": g }),
        rhs.len() - 1,
        lhs.len() - 1,
    ));
    for (k, (a, &b)) in lhs.iter().zip(&rhs).enumerate() {
        let mut rec = CaseRecord::tolerance("coefficient", json!({ "n": n, "p": p, "k": k }), b as f64, a.re, tol);
        rec.passed = (a - Complex64::new(b as f64, 0.0)).norm() <= tol;
        rec.actual = format!("{:.12e}{:+.3e}i", a.re, a.im);
        cert.push(rec);
    }
    Ok(cert)
}
