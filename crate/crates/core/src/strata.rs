//! Open subschemes `U = P^N \ V(F_1, ..., F_k)` over `Z`, their torus cells
//! and torsion-order strata, and the local factorization of each stratum by
//! diagonal Galois orbits.
//!
//! Convention: a point lies in `U` iff some `F_i` is nonzero there, so an
//! empty list of polynomials is the empty scheme and `P^N` itself is
//! `forbidden = [1]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::Serialize;
use serde_json::json;

use crate::arith::{self, is_prime};
use crate::error::{domain, inconsistency, resource, Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::gm::checked_prime_power;
use crate::localzeta::LocalFactor;
use crate::poly::IntPoly;
use crate::report::{CaseRecord, Certificate};

/// Limit on `q^{N+1}` for exhaustive point counts.
pub const COUNT_BUDGET: u128 = 100_000_000;
/// Deepest parenthesis nesting accepted by the polynomial parser.
pub const MAX_PAREN_DEPTH: usize = 4;

/// Integer polynomial in `x0..x{nvars-1}`, as a map from exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl MultiPoly {
    pub fn constant(nvars: usize, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(vec![0; nvars], c);
        }
        MultiPoly { nvars, terms }
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiPoly { nvars, terms: BTreeMap::from([(e, 1)]) }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, i64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn combine(mut self, other: &MultiPoly, sign: i64) -> Result<Self> {
        for (e, &c) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert(0);
            *entry = c
                .checked_mul(sign)
                .and_then(|c| entry.checked_add(c))
                .ok_or(Error::Overflow("polynomial coefficient"))?;
        }
        self.terms.retain(|_, c| *c != 0);
        Ok(self)
    }

    pub fn checked_add(self, other: &MultiPoly) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn checked_sub(self, other: &MultiPoly) -> Result<Self> {
        self.combine(other, -1)
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<Self> {
        let mut terms: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let c = c1.checked_mul(c2).ok_or(Error::Overflow("polynomial coefficient"))?;
                let entry = terms.entry(e).or_insert(0);
                *entry = entry.checked_add(c).ok_or(Error::Overflow("polynomial coefficient"))?;
            }
        }
        terms.retain(|_, c| *c != 0);
        Ok(MultiPoly { nvars: self.nvars, terms })
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = MultiPoly::constant(self.nvars, 1);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Total degree if every term has the same degree; the zero polynomial
    /// has no degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0, nvars, depth: 0 };
        let poly = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Parse(format!("unexpected {:?} in {text:?}", parser.tokens[parser.pos])));
        }
        Ok(poly)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, &c)) in self.terms.iter().rev().enumerate() {
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("x{v}") } else { format!("x{v}^{k}") })
                .collect();
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.unsigned_abs();
            match (monomial.is_empty(), mag) {
                (true, _) => write!(f, "{mag}")?,
                (false, 1) => write!(f, "{}", monomial.join("*"))?,
                (false, _) => write!(f, "{mag}*{}", monomial.join("*"))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Num(i64),
    Var(usize),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().map_err(|e| Error::Parse(format!("number {s}: {e}")))?));
        } else if c == 'x' {
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(Error::Parse(format!("variable without index in {text:?}")));
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Var(s.parse().map_err(|e| Error::Parse(format!("variable x{s}: {e}")))?));
        } else if "+-*^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {text:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nvars: usize,
    depth: usize,
}

impl Parser {
    fn peek_op(&self, op: char) -> bool {
        self.tokens.get(self.pos) == Some(&Token::Op(op))
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                acc = acc.checked_add(&self.term()?)?;
            } else if self.peek_op('-') {
                self.pos += 1;
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        while self.peek_op('*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        if self.peek_op('-') {
            self.pos += 1;
            return MultiPoly::constant(self.nvars, 0).checked_sub(&self.unary()?);
        }
        if self.peek_op('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek_op('^') {
            self.pos += 1;
            match self.tokens.get(self.pos) {
                Some(&Token::Num(k)) => {
                    self.pos += 1;
                    let k = u32::try_from(k).map_err(|_| Error::Parse(format!("exponent {k} too large")))?;
                    return base.pow(k);
                }
                other => return Err(Error::Parse(format!("expected exponent after '^', found {other:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Token::Num(c)) => Ok(MultiPoly::constant(self.nvars, c)),
            Some(Token::Var(i)) if i < self.nvars => Ok(MultiPoly::variable(self.nvars, i)),
            Some(Token::Var(i)) => Err(Error::Parse(format!("variable x{i} outside x0..x{}", self.nvars - 1))),
            Some(Token::Op('(')) => {
                self.depth += 1;
                if self.depth > MAX_PAREN_DEPTH {
                    return Err(Error::Parse(format!("parentheses nested deeper than {MAX_PAREN_DEPTH}")));
                }
                let inner = self.expr()?;
                if !self.peek_op(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                self.depth -= 1;
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}

/// `U = P^N \ V(F_1, ..., F_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenSubschemeSpec {
    dimension: usize,
    forbidden: Vec<MultiPoly>,
}

impl OpenSubschemeSpec {
    pub fn new(dimension: usize, forbidden: Vec<MultiPoly>) -> Result<Self> {
        for f in &forbidden {
            if f.nvars() != dimension + 1 {
                return Err(domain(format!("{f} is not in the variables x0..x{dimension}")));
            }
            if f.homogeneous_degree().is_none() {
                return Err(domain(format!("{f} is not homogeneous")));
            }
        }
        Ok(OpenSubschemeSpec { dimension, forbidden })
    }

    /// From polynomial strings in `x0..xN`.
    pub fn from_polys(dimension: usize, polys: &[&str]) -> Result<Self> {
        let forbidden = polys
            .iter()
            .map(|s| MultiPoly::parse(s, dimension + 1))
            .collect::<Result<_>>()?;
        Self::new(dimension, forbidden)
    }

    pub fn projective_space(dimension: usize) -> Self {
        OpenSubschemeSpec { dimension, forbidden: vec![MultiPoly::constant(dimension + 1, 1)] }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn forbidden(&self) -> &[MultiPoly] {
        &self.forbidden
    }
}

impl FromStr for OpenSubschemeSpec {
    type Err = Error;

    /// First line `N`, then one polynomial per line; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines.next().ok_or_else(|| Error::Parse("empty subscheme spec".into()))?;
        let dimension: usize = first
            .parse()
            .map_err(|e| Error::Parse(format!("line 1: ambient dimension {first:?}: {e}")))?;
        let forbidden = lines
            .map(|(i, l)| MultiPoly::parse(l, dimension + 1).map_err(|e| Error::Parse(format!("line {i}: {e}"))))
            .collect::<Result<_>>()?;
        Self::new(dimension, forbidden).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for OpenSubschemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let polys: Vec<String> = self.forbidden.iter().map(|p| p.to_string()).collect();
        write!(f, "P^{} \\ V({})", self.dimension, polys.join(", "))
    }
}

/// A spec with coefficients reduced into one field.
struct Membership<'f> {
    field: &'f FiniteField,
    polys: Vec<Vec<(Fq, Vec<u32>)>>,
}

impl<'f> Membership<'f> {
    fn new(spec: &OpenSubschemeSpec, field: &'f FiniteField) -> Self {
        let polys = spec
            .forbidden
            .iter()
            .map(|poly| {
                poly.terms
                    .iter()
                    .map(|(e, &c)| (field.from_int(c), e.clone()))
                    .filter(|(c, _)| !c.is_zero())
                    .collect()
            })
            .collect();
        Membership { field, polys }
    }

    fn contains(&self, point: &[Fq]) -> bool {
        let f = self.field;
        self.polys.iter().any(|terms| {
            let value = terms.iter().fold(f.zero(), |acc, (c, e)| {
                let monomial = point.iter().zip(e).fold(*c, |m, (&x, &k)| f.mul(m, f.pow(x, k as u64)));
                f.add(acc, monomial)
            });
            !value.is_zero()
        })
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(domain(format!("{p} is not prime")))
    }
}

fn check_budget(spec: &OpenSubschemeSpec, p: u64, d: u32) -> Result<u64> {
    let q = checked_prime_power(p, d)?;
    let work = q.checked_pow(spec.dimension as u32 + 1).unwrap_or(u128::MAX);
    if work > COUNT_BUDGET {
        return Err(resource(format!(
            "counting P^{} over F_{{{p}^{d}}} needs {work} evaluations, over the budget {COUNT_BUDGET}",
            spec.dimension
        )));
    }
    Ok(q as u64)
}

/// `|U(F_{p^d})|` over projective representatives whose first nonzero
/// coordinate is 1.
pub fn count_points(spec: &OpenSubschemeSpec, p: u64, d: u32) -> Result<u64> {
    check_prime(p)?;
    let q = check_budget(spec, p, d)?;
    let field = FiniteField::new(p, d)?;
    let member = Membership::new(spec, &field);
    let n = spec.dimension;
    let mut count = 0;
    let mut point = vec![field.zero(); n + 1];
    for lead in 0..=n {
        let free = n - lead;
        for slot in point.iter_mut().take(lead) {
            *slot = field.zero();
        }
        point[lead] = field.one();
        for index in 0..q.pow(free as u32) {
            let mut rest = index;
            for slot in point.iter_mut().skip(lead + 1) {
                *slot = field.from_index(rest % q);
                rest /= q;
            }
            if member.contains(&point) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `(j_1, ..., j_M)` with `lcm = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrderTuple {
    pub entries: Vec<u64>,
    pub n: u64,
}

impl OrderTuple {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        if entries.contains(&0) {
            return Err(domain("orders must be positive"));
        }
        let n = entries.iter().fold(1u64, |acc, &j| acc.lcm(&j));
        Ok(OrderTuple { entries, n })
    }
}

impl fmt::Display for OrderTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|j| j.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `M`-tuples of divisors of `n` with lcm exactly `n`, lexicographic.
/// For `M = 0` this is the empty tuple when `n = 1` and nothing otherwise.
pub fn enumerate_jn(n: u64, m: usize) -> Result<Vec<OrderTuple>> {
    let divisors = arith::divisors(n)?;
    let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..m {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                divisors.iter().map(move |&d| {
                    let mut next = t.clone();
                    next.push(d);
                    next
                })
            })
            .collect();
    }
    tuples
        .into_iter()
        .map(OrderTuple::new)
        .filter(|t| t.as_ref().map_or(true, |t| t.n == n))
        .collect()
}

/// Residues of `(Z/j)^x`; for `j = 1` the single residue 0.
fn unit_residues(j: u64) -> Vec<u64> {
    if j == 1 {
        return vec![0];
    }
    (1..j).filter(|a| a.gcd(&j) == 1).collect()
}

fn unit_tuples(j: &OrderTuple) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &ji in &j.entries {
        let residues = unit_residues(ji);
        out = out
            .into_iter()
            .flat_map(|t| {
                residues.iter().map(move |&a| {
                    let mut next = t.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

fn scale_tuple(j: &OrderTuple, t: &[u64], u: u64) -> Vec<u64> {
    t.iter().zip(&j.entries).map(|(&a, &ji)| a * u % ji).collect()
}

/// Orbits of `(Z/n)^x` acting diagonally on `prod (Z/j_i)^x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalOrbitDecomposition {
    pub tuple: OrderTuple,
    /// each orbit as its sorted member tuples; orbits sorted by first member
    pub orbits: Vec<Vec<Vec<u64>>>,
}

impl DiagonalOrbitDecomposition {
    pub fn orbit_sizes(&self) -> Vec<u64> {
        self.orbits.iter().map(|o| o.len() as u64).collect()
    }
}

pub fn diagonal_orbits(j: &OrderTuple) -> Result<DiagonalOrbitDecomposition> {
    let units = unit_residues(j.n);
    let mut seen = HashSet::new();
    let mut orbits = Vec::new();
    for t in unit_tuples(j) {
        if seen.contains(&t) {
            continue;
        }
        let mut orbit: Vec<Vec<u64>> = units.iter().map(|&u| scale_tuple(j, &t, u.max(1))).collect();
        orbit.sort_unstable();
        orbit.dedup();
        seen.extend(orbit.iter().cloned());
        orbits.push(orbit);
    }
    orbits.sort_unstable();
    let phi_n = arith::euler_phi(j.n)?;
    let total: u64 = orbits.iter().map(|o| o.len() as u64).sum();
    let expected: u64 = j.entries.iter().map(|&ji| arith::euler_phi(ji)).product::<Result<u64>>()?;
    if total != expected || orbits.iter().any(|o| phi_n % o.len() as u64 != 0) {
        return Err(inconsistency(format!("diagonal orbits of {j} do not partition the unit tuples")));
    }
    Ok(DiagonalOrbitDecomposition { tuple: j.clone(), orbits })
}

/// Orbits of multiplication by `p` inside one set of unit tuples.
fn frobenius_orbits(j: &OrderTuple, tuples: &[Vec<u64>], p: u64) -> Vec<Vec<Vec<u64>>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in tuples {
        if seen.contains(t) {
            continue;
        }
        let mut orbit = vec![t.clone()];
        let mut next = scale_tuple(j, t, p);
        while &next != t {
            orbit.push(next.clone());
            next = scale_tuple(j, &next, p);
        }
        seen.extend(orbit.iter().cloned());
        out.push(orbit);
    }
    out
}

/// Largest unit-tuple set on which [`frobenius_orbit_degree`] checks orbit sizes.
const ORBIT_CHECK_LIMIT: u64 = 1_000_000;

/// `ord_n(p)` for `n = lcm(j)`, after confirming on small tuple sets that
/// every orbit of multiplication by `p` has exactly this size.
pub fn frobenius_orbit_degree(j: &OrderTuple, p: u64) -> Result<u64> {
    check_prime(p)?;
    if j.n % p == 0 {
        return Err(domain(format!("prime {p} divides lcm{j} = {}", j.n)));
    }
    let f = arith::multiplicative_order(p, j.n)?;
    let size: u64 = j.entries.iter().map(|&ji| arith::euler_phi(ji)).product::<Result<u64>>()?;
    if size <= ORBIT_CHECK_LIMIT {
        let tuples = unit_tuples(j);
        if let Some(bad) = frobenius_orbits(j, &tuples, p).iter().find(|o| o.len() as u64 != f) {
            return Err(inconsistency(format!("orbit of {:?} under {p} has size {} != {f}", bad[0], bad.len())));
        }
    }
    Ok(f)
}

/// A torus cell of `P^N`: `x_k = 0` for `k < lead`, `x_lead = 1`, `x_k != 0`
/// exactly for `k` in `support` among the later coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TorusCell {
    pub lead: usize,
    pub support: Vec<usize>,
}

impl TorusCell {
    pub fn new(dimension: usize, lead: usize, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if lead > dimension || support.iter().any(|&k| k <= lead || k > dimension) {
            return Err(domain(format!("cell lead {lead}, support {support:?} does not fit P^{dimension}")));
        }
        Ok(TorusCell { lead, support })
    }

    /// `{x_0 = 1, x_1, ..., x_N nonzero}`.
    pub fn main_torus(dimension: usize) -> Self {
        TorusCell { lead: 0, support: (1..=dimension).collect() }
    }

    /// All `2^M` torus cells of the affine cell `A^M`, `M = N - lead`, in
    /// lexicographic order of lead then support bitmask.
    pub fn all(dimension: usize) -> Vec<TorusCell> {
        let mut out = Vec::new();
        for lead in 0..=dimension {
            let free: Vec<usize> = (lead + 1..=dimension).collect();
            for mask in 0u32..(1 << free.len()) {
                let support = free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k).collect();
                out.push(TorusCell { lead, support });
            }
        }
        out
    }

    fn point(&self, field: &FiniteField, dimension: usize, values: &[Fq]) -> Vec<Fq> {
        let mut point = vec![field.zero(); dimension + 1];
        point[self.lead] = field.one();
        for (&k, &v) in self.support.iter().zip(values) {
            point[k] = v;
        }
        point
    }
}

impl fmt::Display for TorusCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}=1, support {:?}", self.lead, self.support)
    }
}

/// Per-cell counts by the order tuple of the nonzero coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellCensus {
    pub cell: TorusCell,
    /// points of the cell lying in `U`
    pub members: u64,
    /// `U`-points per order tuple
    pub by_tuple: BTreeMap<Vec<u64>, u64>,
}

/// Walk every torus cell over `field`, recording `U`-membership by order tuple.
pub fn stratum_census(spec: &OpenSubschemeSpec, field: &FiniteField) -> Vec<CellCensus> {
    let member = Membership::new(spec, field);
    let units: Vec<(Fq, u64)> = field
        .units_iter()
        .map(|x| (x, field.multiplicative_order(x).expect("unit")))
        .collect();
    TorusCell::all(spec.dimension)
        .into_iter()
        .map(|cell| {
            let m = cell.support.len();
            let mut census = CellCensus { cell: cell.clone(), members: 0, by_tuple: BTreeMap::new() };
            let total = (units.len() as u64).pow(m as u32);
            let mut values = vec![field.one(); m];
            let mut orders = vec![1u64; m];
            for index in 0..total {
                let mut rest = index;
                for i in 0..m {
                    let (x, o) = units[(rest % units.len() as u64) as usize];
                    values[i] = x;
                    orders[i] = o;
                    rest /= units.len() as u64;
                }
                if member.contains(&cell.point(field, spec.dimension, &values)) {
                    census.members += 1;
                    *census.by_tuple.entry(orders.clone()).or_default() += 1;
                }
            }
            census
        })
        .collect()
}

/// Direct count = sum over torus cells = sum over order tuples, over `F_{p^d}`.
pub fn verify_stratification(spec: &OpenSubschemeSpec, p: u64, d: u32) -> Result<Certificate> {
    let direct = count_points(spec, p, d)?;
    let field = FiniteField::new(p, d)?;
    let q = field.order();
    let census = stratum_census(spec, &field);
    let mut cert = Certificate::new("strata.stratification");
    let cell_sum: u64 = census.iter().map(|c| c.members).sum();
    cert.push(CaseRecord::exact(
        "direct count vs cell sum",
        json!({ "spec": spec.to_string(), "p": p, "d": d }),
        direct,
        cell_sum,
    ));
    let orders = arith::divisors(q - 1)?;
    let mut tuple_total = 0u64;
    for c in &census {
        let m = c.cell.support.len();
        let mut sum = 0u64;
        let mut terms = BTreeMap::new();
        let mut seen = 0usize;
        for &n in &orders {
            let mut by_n = 0u64;
            for j in enumerate_jn(n, m)? {
                if let Some(&k) = c.by_tuple.get(&j.entries) {
                    by_n += k;
                    seen += 1;
                }
            }
            if by_n > 0 {
                terms.insert(n.to_string(), by_n);
            }
            sum += by_n;
        }
        tuple_total += sum;
        let mut rec = CaseRecord::exact(
            "cell count vs order-tuple sum",
            json!({ "p": p, "d": d, "cell": c.cell.to_string(), "by_order": terms }),
            c.members,
            sum,
        );
        // every recorded tuple must be reached through some J_n
        rec.passed &= seen == c.by_tuple.len();
        cert.push(rec);
    }
    cert.push(CaseRecord::exact(
        "direct count vs order-tuple sum",
        json!({ "p": p, "d": d }),
        direct,
        tuple_total,
    ));
    Ok(cert)
}

/// The per-orbit local factors of one torsion stratum.
#[derive(Debug, Clone, Serialize)]
pub struct StratumFactorization {
    pub tuple: OrderTuple,
    pub cell: TorusCell,
    pub p: u64,
    pub degree: u64,
    /// `U`-members per diagonal orbit
    pub members: Vec<u64>,
    #[serde(skip)]
    pub factors: Vec<LocalFactor>,
    pub certificate: Certificate,
}

impl StratumFactorization {
    pub fn product(&self) -> Result<LocalFactor> {
        LocalFactor::product(self.p, &self.factors)
    }
}

/// Splits the stratum `U ∩ (mu*_{j_1} x ... x mu*_{j_M})` of a torus cell
/// (default: the main torus) into diagonal orbits and checks, over
/// `F_{p^f}` with `f = ord_n(p)`, that Frobenius orbits inside each have
/// size `f`, that membership in `U` is constant along them, and that the
/// members add up to an independent count of the stratum. Each orbit `α`
/// contributes `(1 - T^f)^{-members(α)/f}`.
pub fn verify_stratum_orbits(
    spec: &OpenSubschemeSpec,
    j: &OrderTuple,
    p: u64,
    cell: Option<&TorusCell>,
) -> Result<StratumFactorization> {
    check_prime(p)?;
    if j.n % p == 0 {
        return Err(domain(format!("prime {p} divides lcm{j} = {}", j.n)));
    }
    let f = arith::multiplicative_order(p, j.n)?;
    let q = checked_prime_power(p, f as u32)?;
    if q > crate::ffield::MAX_FIELD_ORDER as u128 {
        return Err(resource(format!("F_{{{p}^{f}}} exceeds the field budget")));
    }
    let field = FiniteField::new(p, f as u32)?;
    verify_stratum_orbits_in(spec, j, &field, cell)
}

/// As [`verify_stratum_orbits`] over a given field containing the `n`-th
/// roots of unity.
pub fn verify_stratum_orbits_in(
    spec: &OpenSubschemeSpec,
    j: &OrderTuple,
    field: &FiniteField,
    cell: Option<&TorusCell>,
) -> Result<StratumFactorization> {
    let p = field.characteristic();
    let cell = cell.cloned().unwrap_or_else(|| TorusCell::main_torus(spec.dimension));
    if cell.support.len() != j.entries.len() {
        return Err(domain(format!("cell {cell} has {} torus coordinates, tuple {j} has {}", cell.support.len(), j.entries.len())));
    }
    let f = frobenius_orbit_degree(j, p)?;
    let units = field.order() - 1;
    if units % j.n != 0 {
        return Err(domain(format!("F_{} has no primitive {}-th roots of unity", field.order(), j.n)));
    }
    let member = Membership::new(spec, field);
    // zeta_n = g^{(q-1)/n}; the coordinate for a_i in (Z/j_i)^x is zeta_n^{a_i n / j_i}
    let step = units / j.n;
    let to_point = |t: &[u64]| -> Vec<Fq> {
        let values: Vec<Fq> = t
            .iter()
            .zip(&j.entries)
            .map(|(&a, &ji)| field.from_log(step * (a * (j.n / ji))))
            .collect();
        cell.point(field, spec.dimension, &values)
    };

    let decomposition = diagonal_orbits(j)?;
    let inputs = json!({ "spec": spec.to_string(), "tuple": j.to_string(), "p": p, "cell": cell.to_string() });
    let mut cert = Certificate::new("strata.orbit-factorization");
    let mut members = Vec::new();
    let mut factors = Vec::new();
    for (index, alpha) in decomposition.orbits.iter().enumerate() {
        let mut count = 0u64;
        for orbit in frobenius_orbits(j, alpha, p) {
            if orbit.len() as u64 != f {
                return Err(inconsistency(format!(
                    "Frobenius orbit of {:?} in {j} has size {}, expected {f}",
                    orbit[0],
                    orbit.len()
                )));
            }
            let inside: Vec<bool> = orbit.iter().map(|t| member.contains(&to_point(t))).collect();
            if inside.iter().any(|&b| b != inside[0]) {
                return Err(inconsistency(format!("membership in U varies along the Frobenius orbit of {:?}", orbit[0])));
            }
            if inside[0] {
                count += f;
            }
        }
        let factor = if count == 0 {
            LocalFactor::one(p)
        } else {
            LocalFactor::from_factors(p, vec![], vec![(IntPoly::one_minus(1, f as usize), count / f)])?
        };
        cert.push(CaseRecord::informational(
            "orbit factor",
            json!({ "tuple": j.to_string(), "orbit": index, "size": alpha.len(), "members": count }),
            "",
            &factor,
        ));
        members.push(count);
        factors.push(factor);
    }
    cert.push(CaseRecord::check(
        "Frobenius orbits have size ord_n(p) and constant membership",
        inputs.clone(),
        format!("all orbits of size {f}"),
        true,
    ));

    // independent count: points of the cell whose coordinate orders are exactly j
    let mut by_order: HashMap<u64, Vec<Fq>> = HashMap::new();
    for &ji in &j.entries {
        by_order.entry(ji).or_insert_with(|| {
            field.units_iter().filter(|&x| field.multiplicative_order(x) == Some(ji)).collect()
        });
    }
    let choices: Vec<&Vec<Fq>> = j.entries.iter().map(|ji| &by_order[ji]).collect();
    let total: u64 = choices.iter().map(|c| c.len() as u64).product();
    let mut independent = 0u64;
    let mut values = vec![field.one(); choices.len()];
    for index in 0..total {
        let mut rest = index;
        for (slot, c) in values.iter_mut().zip(&choices) {
            *slot = c[(rest % c.len() as u64) as usize];
            rest /= c.len() as u64;
        }
        if member.contains(&cell.point(field, spec.dimension, &values)) {
            independent += 1;
        }
    }
    cert.push(CaseRecord::exact(
        "orbit members vs stratum count",
        inputs,
        independent,
        members.iter().sum(),
    ));
    Ok(StratumFactorization { tuple: j.clone(), cell, p, degree: f, members, factors, certificate: cert })
}

/// Runs [`verify_stratum_orbits_in`] over `F_{p^d}` on every torsion stratum
/// of every torus cell (all `j` with `lcm(j) | p^d - 1`) and checks that the
/// orbit members add up to `|U(F_{p^d})|`.
pub fn verify_all_stratum_orbits(spec: &OpenSubschemeSpec, p: u64, d: u32) -> Result<Certificate> {
    check_prime(p)?;
    check_budget(spec, p, d)?;
    let field = FiniteField::new(p, d)?;
    let orders = arith::divisors(field.order() - 1)?;
    let mut cert = Certificate::new("strata.orbit-factorization");
    let mut members = 0u64;
    for cell in TorusCell::all(spec.dimension) {
        for &n in &orders {
            for j in enumerate_jn(n, cell.support.len())? {
                let r = verify_stratum_orbits_in(spec, &j, &field, Some(&cell))?;
                members += r.members.iter().sum::<u64>();
                cert.extend(r.certificate);
            }
        }
    }
    cert.push(CaseRecord::exact(
        "orbit members over all strata vs point count",
        json!({ "spec": spec.to_string(), "p": p, "d": d }),
        count_points(spec, p, d)?,
        members,
    ));
    Ok(cert)
}
