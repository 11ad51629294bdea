//! Elliptic curves `y^2 = x^3 + ax + b` over `Q`: point counts over finite
//! fields, Frobenius data, group structure, torsion counts and the per-prime
//! factorization of the Hasse–Weil zeta function by torsion orders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::arith::{self, count_exact_order, is_prime};
use crate::error::{domain, inconsistency, resource, Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::gm::checked_prime_power;
use crate::localzeta::{self, LocalFactor};
use crate::poly::IntPoly;
use crate::report::{CaseRecord, Certificate};

/// Largest field order enumerated for point counts.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;
/// Default cap on the extension degree searched by [`torsion_orbits`].
pub const DEFAULT_DEGREE_CAP: u32 = 24;

/// `y^2 = x^3 + ax + b` with nonzero discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Curve {
    a: i64,
    b: i64,
    discriminant: i128,
    bad_primes: Vec<u64>,
}

impl Curve {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        let overflow = || domain(format!("coefficients ({a}, {b}) too large"));
        let (a128, b128) = (a as i128, b as i128);
        let inner = a128
            .checked_pow(3)
            .and_then(|c| c.checked_mul(4))
            .and_then(|c| c.checked_add(b128.checked_mul(b128)?.checked_mul(27)?))
            .ok_or_else(overflow)?;
        let discriminant = inner.checked_mul(-16).ok_or_else(overflow)?;
        if discriminant == 0 {
            return Err(domain(format!("y^2 = x^3 + {a}x + {b} is singular")));
        }
        let magnitude = u64::try_from(inner.unsigned_abs())
            .ok()
            .filter(|&m| m <= arith::MAX_INPUT)
            .ok_or_else(overflow)?;
        let mut bad: BTreeSet<u64> = [2, 3].into_iter().collect();
        bad.extend(arith::factorize(magnitude)?.primes());
        Ok(Curve { a, b, discriminant, bad_primes: bad.into_iter().collect() })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    /// Primes dividing the discriminant together with 2 and 3.
    pub fn bad_primes(&self) -> &[u64] {
        &self.bad_primes
    }

    pub fn is_good(&self, p: u64) -> bool {
        is_prime(p) && self.bad_primes.binary_search(&p).is_err()
    }

    fn check_good(&self, p: u64) -> Result<()> {
        if !is_prime(p) {
            return Err(domain(format!("{p} is not prime")));
        }
        if !self.is_good(p) {
            return Err(domain(format!("{p} is a bad prime for {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3")?;
        match self.a {
            0 => {}
            1 => write!(f, " + x")?,
            -1 => write!(f, " - x")?,
            a if a < 0 => write!(f, " - {}x", a.unsigned_abs())?,
            a => write!(f, " + {a}x")?,
        }
        match self.b {
            0 => Ok(()),
            b if b < 0 => write!(f, " - {}", b.unsigned_abs()),
            b => write!(f, " + {b}"),
        }
    }
}

impl FromStr for Curve {
    type Err = Error;

    /// `"a b"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let mut next = |name: &str| -> Result<i64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing coefficient {name} in {s:?}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("coefficient {name} in {s:?}: {e}")))
        };
        let (a, b) = (next("a")?, next("b")?);
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        Curve::new(a, b)
    }
}

/// One curve per line as `a b`; `#` starts a comment.
pub fn parse_curve_corpus(text: &str) -> Result<Vec<Curve>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then(|| {
                body.parse::<Curve>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
            })
        })
        .collect()
}

/// Eleven curves with small coefficients and varied reduction behaviour.
pub fn standard_corpus() -> Vec<Curve> {
    [(1, 1), (-1, 0), (0, 1), (1, 0), (-1, 1), (2, 3), (0, -2), (-2, 5), (3, -1), (5, 7), (-4, 4)]
        .into_iter()
        .map(|(a, b)| Curve::new(a, b).expect("corpus curves are nonsingular"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(Fq, Fq),
}

/// A curve reduced into a concrete finite field.
#[derive(Debug, Clone, Copy)]
pub struct CurveModel<'f> {
    field: &'f FiniteField,
    a: Fq,
    b: Fq,
    two: Fq,
    three: Fq,
}

impl<'f> CurveModel<'f> {
    pub fn new(curve: &Curve, field: &'f FiniteField) -> Result<Self> {
        curve.check_good(field.characteristic())?;
        Ok(CurveModel {
            field,
            a: field.from_int(curve.a),
            b: field.from_int(curve.b),
            two: field.from_int(2),
            three: field.from_int(3),
        })
    }

    pub fn field(&self) -> &'f FiniteField {
        self.field
    }

    fn rhs(&self, x: Fq) -> Fq {
        let f = self.field;
        let x3 = f.pow(x, 3);
        f.add(f.add(x3, f.mul(self.a, x)), self.b)
    }

    pub fn contains(&self, p: Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => self.field.mul(y, y) == self.rhs(x),
        }
    }

    /// Number of points including the point at infinity.
    pub fn count_points(&self) -> u64 {
        let f = self.field;
        1 + f
            .elements()
            .map(|x| {
                let r = self.rhs(x);
                if r.is_zero() {
                    1
                } else if f.is_square(r) {
                    2
                } else {
                    0
                }
            })
            .sum::<u64>()
    }

    pub fn points(&self) -> Vec<Point> {
        let f = self.field;
        let mut out = vec![Point::Infinity];
        for x in f.elements() {
            if let Some(y) = f.sqrt(self.rhs(x)) {
                out.push(Point::Affine(x, y));
                if !y.is_zero() {
                    out.push(Point::Affine(x, f.neg(y)));
                }
            }
        }
        out
    }

    pub fn neg(&self, p: Point) -> Point {
        match p {
            Point::Infinity => p,
            Point::Affine(x, y) => Point::Affine(x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p: Point, q: Point) -> Point {
        let f = self.field;
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q,
            (_, Point::Infinity) => return p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if f.add(y1, y2).is_zero() {
                return Point::Infinity;
            }
            let num = f.add(f.mul(self.three, f.mul(x1, x1)), self.a);
            f.div(num, f.mul(self.two, y1)).expect("2y is nonzero")
        } else {
            f.div(f.sub(y2, y1), f.sub(x2, x1)).expect("x2 - x1 is nonzero")
        };
        let x3 = f.sub(f.sub(f.mul(slope, slope), x1), x2);
        let y3 = f.sub(f.mul(slope, f.sub(x1, x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn mul(&self, p: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add(base, base);
            }
        }
        acc
    }

    /// Order of `p` given a multiple of it.
    pub fn order_of(&self, p: Point, multiple: u64) -> Result<u64> {
        let mut order = multiple;
        for l in arith::factorize(multiple)?.primes() {
            while order % l == 0 && self.mul(p, order / l) == Point::Infinity {
                order /= l;
            }
        }
        Ok(order)
    }
}

/// `E(F_q) = Z/d1 x Z/d2` with `d1 | d2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupStructure {
    pub q: u64,
    pub d1: u64,
    pub d2: u64,
}

impl GroupStructure {
    pub fn new(q: u64, d1: u64, d2: u64) -> Result<Self> {
        if d1 == 0 || d2 % d1 != 0 || (q - 1) % d1 != 0 {
            return Err(inconsistency(format!("invalid group structure Z/{d1} x Z/{d2} over F_{q}")));
        }
        Ok(GroupStructure { q, d1, d2 })
    }

    pub fn order(&self) -> u64 {
        self.d1 * self.d2
    }

    /// Points of exact order `n`.
    pub fn exact_order_count(&self, n: u64) -> Result<u128> {
        count_exact_order(self.d1, self.d2, n)
    }
}

impl fmt::Display for GroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{} x Z/{}", self.d1, self.d2)
    }
}

fn field_for(p: u64, nu: u32) -> Result<FiniteField> {
    let q = checked_prime_power(p, nu)?;
    if q > ENUMERATION_BUDGET as u128 {
        return Err(resource(format!("F_{{{p}^{nu}}} exceeds the enumeration budget {ENUMERATION_BUDGET}")));
    }
    FiniteField::new(p, nu)
}

/// `|E(F_{p^nu})|` by enumerating `x` in a concrete model of `F_{p^nu}`.
pub fn count_points_enum(curve: &Curve, p: u64, nu: u32) -> Result<u64> {
    curve.check_good(p)?;
    let field = field_for(p, nu)?;
    Ok(CurveModel::new(curve, &field)?.count_points())
}

/// Group structure from the size of a torsion subgroup.
///
/// With `N = d1 d2`, `d1 | d2` and `d1 | q - 1`, every prime power dividing
/// `d1` divides `M = prod l^min(v_l(q-1), floor(v_l(N)/2))`, and `M | d2`.
/// Hence `|E[M](F_q)| = d1 M`, and `d1` is read off by counting points
/// killed by `M`.
pub fn group_structure_in(model: &CurveModel<'_>, count: u64) -> Result<GroupStructure> {
    let q = model.field().order();
    let mut m = 1u64;
    for &(l, e) in arith::factorize(count)?.parts() {
        let mut v = 0;
        let mut t = q - 1;
        while t % l == 0 && v < e / 2 {
            t /= l;
            v += 1;
        }
        m *= l.pow(v);
    }
    if m == 1 {
        return GroupStructure::new(q, 1, count);
    }
    let killed = model
        .points()
        .into_iter()
        .filter(|&pt| model.mul(pt, m) == Point::Infinity)
        .count() as u64;
    if killed % m != 0 {
        return Err(inconsistency(format!("|E[{m}]| = {killed} is not a multiple of {m}")));
    }
    let d1 = killed / m;
    if count % (d1 * d1) != 0 {
        return Err(inconsistency(format!("d1 = {d1} incompatible with |E| = {count}")));
    }
    GroupStructure::new(q, d1, count / d1)
}

pub fn group_structure(curve: &Curve, p: u64, nu: u32) -> Result<GroupStructure> {
    curve.check_good(p)?;
    let field = field_for(p, nu)?;
    let model = CurveModel::new(curve, &field)?;
    group_structure_in(&model, model.count_points())
}

/// Trace of Frobenius at a good prime and everything it determines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrobeniusData {
    pub p: u64,
    pub a_p: i64,
}

impl FrobeniusData {
    pub fn new(p: u64, a_p: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(domain(format!("{p} is not prime")));
        }
        if (a_p as i128).pow(2) > 4 * p as i128 {
            return Err(inconsistency(format!("a_p = {a_p} violates |a_p| <= 2 sqrt({p})")));
        }
        Ok(FrobeniusData { p, a_p })
    }

    /// `s_0..s_D` with `s_nu = a s_{nu-1} - p s_{nu-2}`, the traces of Frobenius powers.
    pub fn trace_powers(&self, degree: u32) -> Result<Vec<i128>> {
        let mut s = vec![2i128, self.a_p as i128];
        for nu in 2..=degree as usize {
            let next = (self.a_p as i128)
                .checked_mul(s[nu - 1])
                .and_then(|x| x.checked_sub((self.p as i128).checked_mul(s[nu - 2])?))
                .ok_or(Error::Overflow("Frobenius trace recurrence"))?;
            s.push(next);
        }
        s.truncate(degree as usize + 1);
        Ok(s)
    }

    /// `N_1..N_D`, `N_nu = p^nu + 1 - s_nu`; each must be positive.
    pub fn point_counts(&self, degree: u32) -> Result<Vec<u128>> {
        let s = self.trace_powers(degree)?;
        (1..=degree)
            .map(|nu| {
                let q = checked_prime_power(self.p, nu)? as i128;
                let n = q + 1 - s[nu as usize];
                if n <= 0 {
                    return Err(inconsistency(format!("N_{nu} = {n} is not positive at p = {}", self.p)));
                }
                Ok(n as u128)
            })
            .collect()
    }

    /// `det(F^nu - 1)` for the companion matrix of `T^2 - a T + p`.
    pub fn fixed_point_determinant(&self, nu: u32) -> Result<i128> {
        type M = [[i128; 2]; 2];
        let mul = |x: &M, y: &M| -> Option<M> {
            let mut z = [[0i128; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    z[i][j] = x[i][0].checked_mul(y[0][j])?.checked_add(x[i][1].checked_mul(y[1][j])?)?;
                }
            }
            Some(z)
        };
        let frob: M = [[0, -(self.p as i128)], [1, self.a_p as i128]];
        let mut acc: M = [[1, 0], [0, 1]];
        for _ in 0..nu {
            acc = mul(&acc, &frob).ok_or(Error::Overflow("Frobenius matrix power"))?;
        }
        let (a, b, c, d) = (acc[0][0] - 1, acc[0][1], acc[1][0], acc[1][1] - 1);
        a.checked_mul(d)
            .and_then(|x| x.checked_sub(b.checked_mul(c)?))
            .ok_or(Error::Overflow("Frobenius determinant"))
    }

    /// `a_p` prime to `p`: the `p`-torsion over the closure is `Z/p`.
    pub fn is_ordinary(&self) -> bool {
        self.a_p.rem_euclid(self.p as i64) != 0
    }

    /// `1 - a T + p T^2`.
    pub fn characteristic_polynomial(&self) -> IntPoly {
        IntPoly::from_i64(&[1, -self.a_p, self.p as i64])
    }

    /// `(1 - a T + p T^2) / ((1 - T)(1 - p T))`.
    pub fn local_factor(&self) -> Result<LocalFactor> {
        LocalFactor::from_factors(
            self.p,
            vec![(self.characteristic_polynomial(), 1)],
            vec![(IntPoly::one_minus(1, 1), 1), (IntPoly::one_minus(self.p, 1), 1)],
        )
    }

    /// Points of exact order `n` over the algebraic closure of `F_p`:
    /// the prime-to-`p` part is `(Z/n')^2`; the `p`-part is `Z/p^k` if
    /// ordinary and trivial if supersingular.
    pub fn closure_exact_order_count(&self, n: u64) -> Result<u128> {
        let mut n_prime = n;
        let mut pk = 1u64;
        while n_prime % self.p == 0 {
            n_prime /= self.p;
            pk *= self.p;
        }
        let d2 = if self.is_ordinary() { n_prime * pk } else { n_prime };
        count_exact_order(n_prime, d2, n)
    }
}

pub fn frobenius_data(curve: &Curve, p: u64) -> Result<FrobeniusData> {
    let count = count_points_enum(curve, p, 1)?;
    FrobeniusData::new(p, p as i64 + 1 - count as i64)
}

/// Rational points of exact order `n` over `F_{p^nu}`.
pub fn psi_e(curve: &Curve, n: u64, p: u64, nu: u32) -> Result<u128> {
    group_structure(curve, p, nu)?.exact_order_count(n)
}

/// Group structures of `E(F_{p^nu})` for increasing `nu`, built on demand.
struct Levels<'c> {
    curve: &'c Curve,
    p: u64,
    structures: Vec<GroupStructure>,
}

impl<'c> Levels<'c> {
    fn new(curve: &'c Curve, p: u64) -> Self {
        Levels { curve, p, structures: Vec::new() }
    }

    fn get(&mut self, nu: u32) -> Result<GroupStructure> {
        while self.structures.len() < nu as usize {
            let next = self.structures.len() as u32 + 1;
            self.structures.push(group_structure(self.curve, self.p, next)?);
        }
        Ok(self.structures[nu as usize - 1])
    }
}

/// Orbits of Frobenius on the points of exact order `n` over the closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorsionOrbitSet {
    pub n: u64,
    pub p: u64,
    /// degree `d` to number of orbits of size `d`
    pub orbit_counts: BTreeMap<u32, u128>,
    pub closure_total: u128,
    /// highest extension degree examined
    pub levels: u32,
    pub complete: bool,
}

impl TorsionOrbitSet {
    /// `sum_d d c_d`.
    pub fn points_found(&self) -> u128 {
        self.orbit_counts.iter().map(|(&d, &c)| d as u128 * c).sum()
    }

    pub fn count(&self, d: u32) -> u128 {
        self.orbit_counts.get(&d).copied().unwrap_or(0)
    }
}

/// `c_d = (1/d) sum_{e | d} mu(d/e) m_e` for the given `m_1..m_D`.
fn orbit_count_at(d: u32, m: &[u128], n: u64) -> Result<u128> {
    let mut acc: i128 = 0;
    for e in arith::divisors(d as u64)? {
        let mu = arith::moebius(d as u64 / e)? as i128;
        acc += mu * m[e as usize - 1] as i128;
    }
    if acc < 0 || acc % d as i128 != 0 {
        return Err(inconsistency(format!(
            "orbit count of degree {d} for order {n} is {acc}/{d}, not a nonnegative integer"
        )));
    }
    Ok((acc / d as i128) as u128)
}

/// Frobenius orbit counts on exact-order-`n` points, extending the field
/// degree until every point over the closure is accounted for.
pub fn torsion_orbits(curve: &Curve, n: u64, p: u64, degree_cap: u32) -> Result<TorsionOrbitSet> {
    curve.check_good(p)?;
    if n == 0 {
        return Err(domain("torsion order must be positive"));
    }
    let frob = frobenius_data(curve, p)?;
    let mut set = TorsionOrbitSet {
        n,
        p,
        orbit_counts: BTreeMap::new(),
        closure_total: frob.closure_exact_order_count(n)?,
        levels: 0,
        complete: false,
    };
    let mut levels = Levels::new(curve, p);
    let mut m = Vec::new();
    let mut found = 0u128;
    for nu in 1..=degree_cap {
        if found == set.closure_total {
            break;
        }
        let structure = match levels.get(nu) {
            Ok(s) => s,
            Err(e) if e.is_resource_limit() => {
                return Err(Error::IncompleteOrbits { reason: e.to_string(), partial: Box::new(set) })
            }
            Err(e) => return Err(e),
        };
        m.push(structure.exact_order_count(n)?);
        let c = orbit_count_at(nu, &m, n)?;
        if c > 0 {
            set.orbit_counts.insert(nu, c);
        }
        set.levels = nu;
        found += nu as u128 * c;
        if found > set.closure_total {
            return Err(inconsistency(format!(
                "found {found} points of order {n} at p = {p}, more than the {} over the closure",
                set.closure_total
            )));
        }
    }
    if found == set.closure_total {
        set.complete = true;
        Ok(set)
    } else {
        Err(Error::IncompleteOrbits {
            reason: format!("degree cap {degree_cap} reached before all points of order {n} appeared"),
            partial: Box::new(set),
        })
    }
}

/// Point counts, Frobenius determinant and torsion counts of `E(F_{p^nu})`:
/// `det(F^nu - 1) = N_nu = sum_n psi_n`, and for each prime `l`, the
/// `l`-power torsion counts add up to the `l`-part of `N_nu` (for `l = p`
/// these are the etale points).
pub fn verify_torsion_partition(curve: &Curve, p: u64, nu: u32) -> Result<Certificate> {
    curve.check_good(p)?;
    if nu == 0 {
        return Err(domain("extension degree must be positive"));
    }
    let frob = frobenius_data(curve, p)?;
    let field = field_for(p, nu)?;
    let model = CurveModel::new(curve, &field)?;
    let enumerated = model.count_points();
    let recurrence = frob.point_counts(nu)?[nu as usize - 1];
    let determinant = frob.fixed_point_determinant(nu)?;
    let structure = group_structure_in(&model, enumerated)?;
    let base = json!({ "a": curve.a, "b": curve.b, "p": p, "nu": nu });

    let mut cert = Certificate::new("elliptic.torsion-partition");
    cert.push(CaseRecord::check(
        "Hasse bound",
        json!({ "p": p, "a_p": frob.a_p }),
        "a_p^2 <= 4p",
        (frob.a_p as i128).pow(2) <= 4 * p as i128,
    ));
    cert.push(CaseRecord::exact("enumeration vs recurrence", base.clone(), recurrence, enumerated as u128));
    cert.push(CaseRecord::exact("det(F^nu - 1) vs recurrence", base.clone(), recurrence as i128, determinant));
    cert.push(CaseRecord::check("N_nu positive", base.clone(), "N_nu >= 1", enumerated >= 1));

    let divisors = arith::divisors(structure.d2)?;
    let terms: Vec<u128> = divisors.iter().map(|&n| structure.exact_order_count(n)).collect::<Result<_>>()?;
    cert.push(CaseRecord::exact(
        "sum of psi_n",
        json!({ "a": curve.a, "b": curve.b, "p": p, "nu": nu, "group": structure.to_string(),
                "orders": divisors, "terms": terms }),
        enumerated as u128,
        terms.iter().sum(),
    ));
    for &(l, e) in arith::factorize(enumerated)?.parts() {
        let mut sum = 0u128;
        let mut lk = 1u64;
        while structure.d2 % lk == 0 {
            sum += structure.exact_order_count(lk)?;
            lk *= l;
        }
        cert.push(CaseRecord::exact(
            "l-part",
            json!({ "p": p, "nu": nu, "l": l, "etale": l == p }),
            (l as u128).pow(e),
            sum,
        ));
    }
    Ok(cert)
}

/// Checks, through degree `max_degree`, that the Euler factor of `E` at `p`
/// equals `prod_n prod_d (1 - T^d)^{-c_d(n)}`, where `c_d(n)` counts
/// Frobenius orbits of size `d` on points of exact order `n` (including
/// `p | n`, where the points are the etale ones).
pub fn verify_torsion_factorization(curve: &Curve, p: u64, max_degree: u32) -> Result<Certificate> {
    curve.check_good(p)?;
    let mut cert = Certificate::new("elliptic.torsion-factorization");
    if max_degree == 0 {
        cert.push(CaseRecord::exact("constant term", json!({ "p": p }), 1, 1));
        return Ok(cert);
    }
    let frob = frobenius_data(curve, p)?;
    let degree = max_degree as usize;
    let lhs = frob.local_factor()?.expand(degree);

    let mut levels = Levels::new(curve, p);
    let mut orders = BTreeSet::new();
    for nu in 1..=max_degree {
        orders.extend(arith::divisors(levels.get(nu)?.d2)?);
    }
    let mut per_order: BTreeMap<u64, Vec<u128>> = BTreeMap::new();
    let mut factors = Vec::new();
    for &n in &orders {
        let m: Vec<u128> = (1..=max_degree)
            .map(|nu| levels.get(nu)?.exact_order_count(n))
            .collect::<Result<_>>()?;
        let c: Vec<u128> = (1..=max_degree).map(|d| orbit_count_at(d, &m, n)).collect::<Result<_>>()?;
        let den = c
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (IntPoly::one_minus(1, i + 1), k as u64))
            .collect();
        factors.push(LocalFactor::from_factors(p, vec![], den)?);
        per_order.insert(n, c);
    }
    let rhs = LocalFactor::product(p, &factors)?.expand(degree);

    let closed = localzeta::closed_point_counts(p, &frob.point_counts(max_degree)?)?;
    for d in 1..=degree {
        let contributions: BTreeMap<String, u128> = per_order
            .iter()
            .filter(|(_, c)| c[d - 1] > 0)
            .map(|(n, c)| (n.to_string(), c[d - 1]))
            .collect();
        cert.push(CaseRecord::exact(
            "closed points by torsion order",
            json!({ "a": curve.a, "b": curve.b, "p": p, "d": d, "orbits_by_order": contributions }),
            closed[d - 1],
            contributions.values().sum(),
        ));
    }
    for k in 0..=degree {
        cert.push(CaseRecord::exact(
            "coefficient",
            json!({ "p": p, "k": k }),
            lhs.coeffs()[k].clone(),
            rhs.coeffs()[k].clone(),
        ));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn curve(a: i64, b: i64) -> Curve {
        Curve::new(a, b).unwrap()
    }

    /// Points by brute force over F_p with integer arithmetic.
    fn count_prime_field(a: i64, b: i64, p: i64) -> u64 {
        let mut n = 1;
        for x in 0..p {
            for y in 0..p {
                if (y * y - x * x * x - a * x - b).rem_euclid(p) == 0 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn curve_validation() {
        assert!(Curve::new(-3, 2).is_err());
        assert!(Curve::new(0, 0).is_err());
        let c = curve(1, 1);
        assert_eq!(c.discriminant(), -496);
        assert_eq!(c.bad_primes(), &[2, 3, 31]);
        assert_eq!("1 1".parse::<Curve>().unwrap(), c);
        assert!("1".parse::<Curve>().is_err());
        let corpus = parse_curve_corpus("# comment\n1 1\n\n-1 0  # trailing\n").unwrap();
        assert_eq!(corpus, vec![curve(1, 1), curve(-1, 0)]);
        assert!(parse_curve_corpus("1 1\n0 0\n").unwrap_err().to_string().contains("line 2"));
        assert!(standard_corpus().len() >= 10);
    }

    #[test]
    fn point_count_examples() {
        assert_eq!(count_points_enum(&curve(1, 1), 5, 1).unwrap(), 9);
        assert_eq!(count_points_enum(&curve(1, 1), 5, 2).unwrap(), 27);
        assert_eq!(frobenius_data(&curve(1, 1), 5).unwrap().a_p, -3);
        assert_eq!(frobenius_data(&curve(-1, 0), 5).unwrap().a_p, -2);
        assert_eq!(frobenius_data(&curve(-1, 0), 7).unwrap().a_p, 0);
        assert!(count_points_enum(&curve(1, 1), 31, 1).is_err());
        assert!(count_points_enum(&curve(1, 1), 5, 9).unwrap_err().is_resource_limit());
    }

    #[test]
    fn prime_field_counts_match_brute_force() {
        for c in standard_corpus() {
            for p in arith::primes_up_to(60).into_iter().filter(|&p| c.is_good(p)) {
                assert_eq!(count_points_enum(&c, p, 1).unwrap(), count_prime_field(c.a(), c.b(), p as i64));
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(curve(-1, 0).to_string(), "y^2 = x^3 - x");
        assert_eq!(curve(2, -3).to_string(), "y^2 = x^3 + 2x - 3");
        assert_eq!(curve(0, 1).to_string(), "y^2 = x^3 + 1");
    }

    #[test]
    fn group_structure_examples() {
        assert_eq!(group_structure(&curve(1, 1), 5, 1).unwrap(), GroupStructure { q: 5, d1: 1, d2: 9 });
        assert_eq!(group_structure(&curve(-1, 0), 5, 1).unwrap(), GroupStructure { q: 5, d1: 2, d2: 4 });
        assert_eq!(psi_e(&curve(1, 1), 3, 5, 1).unwrap(), 2);
        assert_eq!(psi_e(&curve(1, 1), 9, 5, 1).unwrap(), 6);
        assert_eq!(psi_e(&curve(1, 1), 1, 5, 1).unwrap(), 1);
    }

    /// Exponent as the lcm of all point orders, and d1 from it.
    #[test]
    fn group_structure_matches_exhaustive_orders() {
        for c in standard_corpus() {
            for (p, nu) in [(5u64, 1u32), (5, 2), (7, 1), (7, 2), (11, 1), (11, 2), (13, 2), (17, 1), (29, 1), (37, 1)] {
                if !c.is_good(p) {
                    continue;
                }
                let field = FiniteField::new(p, nu).unwrap();
                let model = CurveModel::new(&c, &field).unwrap();
                let points = model.points();
                let n = points.len() as u64;
                assert!(points.iter().all(|&pt| model.contains(pt)));
                let exponent = points
                    .iter()
                    .map(|&pt| model.order_of(pt, n).unwrap())
                    .fold(1u64, |acc, o| acc.lcm(&o));
                let s = group_structure_in(&model, n).unwrap();
                assert_eq!((s.d1, s.d2), (n / exponent, exponent), "{c} over F_{p}^{nu}");
            }
        }
    }

    #[test]
    fn frobenius_recurrence_and_determinant() {
        let f = FrobeniusData::new(5, -3).unwrap();
        assert_eq!(f.point_counts(2).unwrap(), vec![9, 27]);
        for nu in 1..=6 {
            assert_eq!(f.fixed_point_determinant(nu).unwrap(), f.point_counts(nu).unwrap()[nu as usize - 1] as i128);
        }
        assert!(FrobeniusData::new(5, 5).is_err());
        assert!(!FrobeniusData::new(7, 0).unwrap().is_ordinary());
    }

    #[test]
    fn torsion_partition_examples() {
        let c = verify_torsion_partition(&curve(1, 1), 5, 1).unwrap();
        assert!(c.passed());
        let sum = c.records.iter().find(|r| r.name == "sum of psi_n").unwrap();
        assert_eq!(sum.inputs["terms"], json!([1, 2, 6]));
        assert!(verify_torsion_partition(&curve(1, 1), 5, 2).unwrap().passed());
    }

    /// Exact-order-n points counted point by point over the field where
    /// the orbit search ended.
    fn brute_exact_order(c: &Curve, p: u64, nu: u32, n: u64) -> u128 {
        let field = FiniteField::new(p, nu).unwrap();
        let model = CurveModel::new(c, &field).unwrap();
        let points = model.points();
        let total = points.len() as u64;
        points.iter().filter(|&&pt| model.order_of(pt, total).unwrap() == n).count() as u128
    }

    #[test]
    fn torsion_orbit_examples() {
        let c = curve(1, 1);
        let one = torsion_orbits(&c, 1, 5, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(one.orbit_counts, BTreeMap::from([(1, 1)]));
        let three = torsion_orbits(&c, 3, 5, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(three.count(1), 2);
        assert_eq!(three.closure_total, 8);
        assert!(three.complete);
        assert_eq!(brute_exact_order(&c, 5, three.levels, 3), 8);
        let nine = torsion_orbits(&c, 9, 5, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(nine.count(1), 6);
        assert_eq!(nine.closure_total, 72);
        assert_eq!(nine.points_found(), 72);
        assert_eq!(brute_exact_order(&c, 5, nine.levels, 9), 72);
    }

    #[test]
    fn p_torsion_follows_reduction_type() {
        // supersingular: no points of order p at all
        let ss = torsion_orbits(&curve(-1, 0), 7, 7, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(ss.closure_total, 0);
        assert!(ss.complete && ss.orbit_counts.is_empty());
        // ordinary at p = 5: p - 1 points of order p, Frobenius acting by a_p mod p
        let c = curve(1, 1);
        let f = frobenius_data(&c, 5).unwrap();
        assert!(f.is_ordinary());
        let ord = torsion_orbits(&c, 5, 5, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(ord.closure_total, 4);
        let unit = f.a_p.rem_euclid(5) as u64;
        let degree = arith::multiplicative_order(unit, 5).unwrap() as u32;
        assert_eq!(ord.orbit_counts, BTreeMap::from([(degree, 4 / degree as u128)]));
    }

    #[test]
    fn torsion_orbits_report_partial_data() {
        match torsion_orbits(&curve(1, 1), 9, 5, 1) {
            Err(Error::IncompleteOrbits { partial, .. }) => {
                assert!(!partial.complete);
                assert_eq!(partial.count(1), 6);
            }
            other => panic!("expected partial data, got {other:?}"),
        }
    }

    #[test]
    fn torsion_factorization_examples() {
        let c = curve(1, 1);
        let one = verify_torsion_factorization(&c, 5, 1).unwrap();
        assert!(one.passed());
        assert_eq!(one.records[0].expected, "9");
        assert!(verify_torsion_factorization(&c, 5, 2).unwrap().passed());
        assert!(verify_torsion_factorization(&c, 5, 0).unwrap().passed());
    }
}
