//! Exact arithmetic in the rational function field Q(t₁,…,t_m) and in its
//! group of signed Laurent monomials.
//!
//! Every coefficient the rest of the crate touches lives here. `Scalar` is a
//! canonicalized quotient of sparse multivariate polynomials with exact
//! rational coefficients; `UnitScalar` is the subgroup ±t₁^{e₁}···t_m^{e_m},
//! which is where character values live. Restricting character values to
//! units keeps genericity ("not a root of unity"), discrete logarithms, and
//! dominance exactly decidable: the only roots of unity in Q(t₁,…,t_m) are
//! ±1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

/// Errors produced by scalar construction, parsing, and discrete logs.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("discrete log is ambiguous: base {base} is a root of unity and {value} is in its image")]
    AmbiguousLog { base: String, value: String },
    #[error("not a unit scalar (expected a signed monomial): {0}")]
    NotAUnit(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown parameter {name:?}; declared parameters are {declared:?}")]
    UnknownParameter { name: String, declared: Vec<String> },
    #[error("floating point literals are not supported; scalars are exact (got {0:?})")]
    FloatRejected(String),
}

/// The ordered list of transcendental parameters t₁,…,t_m generating the
/// ground field.
///
/// An empty list is allowed (purely rational scalars). Spaces are shared via
/// `Arc`; every scalar carries a handle to its space.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct ParameterSpace {
    names: Vec<String>,
}

impl ParameterSpace {
    /// Builds a space from distinct identifier names.
    ///
    /// # Panics
    ///
    /// Panics if names repeat or are not identifiers (alphabetic start,
    /// alphanumeric/underscore continuation).
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
        for (i, n) in names.iter().enumerate() {
            assert!(is_identifier(n), "parameter name {n:?} is not an identifier");
            assert!(
                !names[..i].contains(n),
                "duplicate parameter name {n:?}"
            );
        }
        Arc::new(ParameterSpace { names })
    }

    /// Number of parameters.
    pub fn arity(&self) -> usize {
        self.names.len()
    }

    /// Name of the i-th parameter.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// All parameter names in order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Index of a parameter by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn same_space(a: &Arc<ParameterSpace>, b: &Arc<ParameterSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

// ---------------------------------------------------------------------------
// Monomials and sparse polynomials (internal representation)
// ---------------------------------------------------------------------------

/// Monomial t₁^{e₁}···t_m^{e_m} with nonnegative exponents, ordered
/// graded-lexicographically (total degree first, then lex on exponents).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Monomial {
    degree: u64,
    exps: Vec<u32>,
}

impl Monomial {
    fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().map(|&e| e as u64).sum();
        Monomial { degree, exps }
    }

    fn one(arity: usize) -> Self {
        Monomial::new(vec![0; arity])
    }

    fn is_one(&self) -> bool {
        self.degree == 0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a.checked_add(*b).expect("monomial exponent overflow"))
            .collect();
        Monomial::new(exps)
    }

    fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            if a < b {
                return None;
            }
            exps.push(a - b);
        }
        Some(Monomial::new(exps))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over Q, keyed by graded-lex monomials.
#[derive(Clone, PartialEq, Eq, Debug)]
struct MultiPoly {
    arity: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    fn zero(arity: usize) -> Self {
        MultiPoly { arity, terms: BTreeMap::new() }
    }

    fn constant(arity: usize, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(arity), c);
        }
        p
    }

    fn one(arity: usize) -> Self {
        MultiPoly::constant(arity, BigRational::one())
    }

    fn var_pow(arity: usize, idx: usize, e: u32) -> Self {
        let mut exps = vec![0u32; arity];
        exps[idx] = e;
        let mut p = MultiPoly::zero(arity);
        p.terms.insert(Monomial::new(exps), BigRational::one());
        p
    }

    fn term(arity: usize, mono: Monomial, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    fn as_constant(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    fn leading(&self) -> (&Monomial, &BigRational) {
        self.terms.iter().next_back().expect("leading term of zero polynomial")
    }

    fn add_term(&mut self, mono: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    fn neg(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.arity);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.arity);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.arity);
        }
        let mut out = MultiPoly::zero(self.arity);
        for (m, a) in &self.terms {
            out.terms.insert(m.clone(), a * c);
        }
        out
    }

    /// Exact division; `None` when `d` does not divide `self`.
    fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if d.is_one() {
            return Some(self.clone());
        }
        let mut r = self.clone();
        let mut q = MultiPoly::zero(self.arity);
        let (dm, dc) = {
            let (m, c) = d.leading();
            (m.clone(), c.clone())
        };
        while !r.is_zero() {
            let (rm, rc) = {
                let (m, c) = r.leading();
                (m.clone(), c.clone())
            };
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            let t = MultiPoly::term(self.arity, qm.clone(), qc.clone());
            r = r.sub(&t.mul(d));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Componentwise minimum of the exponents over the support.
    fn monomial_min(&self) -> Monomial {
        let mut exps = vec![u32::MAX; self.arity];
        for m in self.terms.keys() {
            for (a, b) in exps.iter_mut().zip(&m.exps) {
                *a = (*a).min(*b);
            }
        }
        if self.is_zero() {
            exps = vec![0; self.arity];
        }
        Monomial::new(exps)
    }

    fn div_monomial(&self, m: &Monomial) -> MultiPoly {
        if m.is_one() {
            return self.clone();
        }
        let mut out = MultiPoly::zero(self.arity);
        for (mm, c) in &self.terms {
            out.terms
                .insert(mm.div(m).expect("monomial content divides"), c.clone());
        }
        out
    }

    /// Writes `self = scale · prim` with `prim` an integer-coefficient
    /// polynomial of content 1 and positive leading coefficient.
    fn primitive_integer(&self) -> (BigRational, MultiPoly) {
        if self.is_zero() {
            return (BigRational::one(), self.clone());
        }
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values() {
            denom_lcm = num_integer::lcm(denom_lcm, c.denom().clone());
        }
        let mut numer_gcd = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&denom_lcm / c.denom());
            numer_gcd = num_integer::gcd(numer_gcd, n);
        }
        // numer_gcd > 0 since self is nonzero
        let mut scale = BigRational::new(numer_gcd.clone(), denom_lcm);
        let mut prim = MultiPoly::zero(self.arity);
        for (m, c) in &self.terms {
            prim.terms.insert(m.clone(), c / &scale);
        }
        if prim.leading().1.is_negative() {
            prim = prim.neg();
            scale = -scale;
        }
        (scale, prim)
    }

    /// Largest variable index occurring in the support.
    fn max_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for m in self.terms.keys() {
            for (i, &e) in m.exps.iter().enumerate().rev() {
                if e > 0 {
                    best = Some(best.map_or(i, |b| b.max(i)));
                    break;
                }
            }
        }
        best
    }

    fn deg_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[k]).max().unwrap_or(0)
    }

    /// Coefficient of x_k^d, as a polynomial with x_k struck out.
    fn coeff_in(&self, k: usize, d: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.arity);
        for (m, c) in &self.terms {
            if m.exps[k] == d {
                let mut exps = m.exps.clone();
                exps[k] = 0;
                out.add_term(Monomial::new(exps), c.clone());
            }
        }
        out
    }

    fn mul_var_pow(&self, k: usize, e: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.arity);
        for (m, c) in &self.terms {
            let mut exps = m.exps.clone();
            exps[k] += e;
            out.terms.insert(Monomial::new(exps), c.clone());
        }
        out
    }

    /// Content with respect to x_k: gcd of the x_k-coefficients
    /// (an integer-primitive polynomial in the remaining variables).
    fn content_in(&self, k: usize) -> MultiPoly {
        let mut g = MultiPoly::zero(self.arity);
        for d in 0..=self.deg_in(k) {
            let c = self.coeff_in(k, d);
            if !c.is_zero() {
                g = poly_gcd(&g, &c);
                if g.is_one() {
                    break;
                }
            }
        }
        g
    }

    fn primitive_wrt(&self, k: usize) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content_in(k);
        self.div_exact(&c).expect("content must divide")
    }
}

/// Pseudo-remainder of `a` by `b` in the variable x_k.
fn prem(a: &MultiPoly, b: &MultiPoly, k: usize) -> MultiPoly {
    let db = b.deg_in(k);
    let lb = b.coeff_in(k, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.deg_in(k);
        if dr < db {
            break;
        }
        let lr = r.coeff_in(k, dr);
        r = lb.mul(&r).sub(&lr.mul(&b.mul_var_pow(k, dr - db)));
    }
    r
}

/// Polynomial gcd via monomial-content splitting and a primitive
/// pseudo-remainder sequence, recursing on the largest variable present.
/// The result is integer-primitive with positive leading coefficient.
fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.primitive_integer().1;
    }
    if b.is_zero() {
        return a.primitive_integer().1;
    }
    let pa = a.primitive_integer().1;
    let pb = b.primitive_integer().1;
    if pa.is_one() || pb.is_one() {
        return MultiPoly::one(a.arity);
    }
    // Split off the common monomial factor; cheap and covers the frequent
    // case where one side is a single term.
    let ma = pa.monomial_min();
    let mb = pb.monomial_min();
    let shared = Monomial::new(
        ma.exps
            .iter()
            .zip(&mb.exps)
            .map(|(x, y)| *x.min(y))
            .collect(),
    );
    let shared_poly = MultiPoly::term(a.arity, shared, BigRational::one());
    let pa = pa.div_monomial(&ma);
    let pb = pb.div_monomial(&mb);
    if pa.is_one() || pb.is_one() {
        return shared_poly;
    }
    let k = pa
        .max_var()
        .into_iter()
        .chain(pb.max_var())
        .max()
        .expect("non-constant polynomials have a variable");
    let ca = pa.content_in(k);
    let cb = pb.content_in(k);
    let cg = poly_gcd(&ca, &cb);
    let mut f = pa.div_exact(&ca).expect("content divides");
    let mut g = pb.div_exact(&cb).expect("content divides");
    if f.deg_in(k) < g.deg_in(k) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() {
        let r = prem(&f, &g, k);
        f = g;
        g = if r.is_zero() {
            r
        } else {
            // The full primitive part (polynomial and integer content both
            // stripped) keeps coefficient growth polynomial.
            r.primitive_wrt(k).primitive_integer().1
        };
    }
    let f = f.primitive_wrt(k);
    cg.mul(&f).mul(&shared_poly).primitive_integer().1
}

// ---------------------------------------------------------------------------
// Scalar: canonical rational function
// ---------------------------------------------------------------------------

/// An element of Q(t₁,…,t_m) in canonical form.
///
/// Invariants: the denominator is nonzero and monic in graded-lex order, the
/// fraction is reduced (polynomial gcd of numerator and denominator is 1),
/// and zero is represented as 0/1. Equality of canonical forms is structural.
#[derive(Clone, Debug)]
pub struct Scalar {
    space: Arc<ParameterSpace>,
    num: MultiPoly,
    den: MultiPoly,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.num == other.num && self.den == other.den
    }
}

impl Eq for Scalar {}

impl Scalar {
    fn make(space: Arc<ParameterSpace>, num: MultiPoly, den: MultiPoly) -> Scalar {
        assert!(!den.is_zero(), "scalar with zero denominator");
        let mut s = Scalar { space, num, den };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = MultiPoly::one(self.space.arity());
            return;
        }
        if !self.den.is_one() {
            let g = poly_gcd(&self.num, &self.den);
            if !g.is_one() {
                self.num = self.num.div_exact(&g).expect("gcd divides numerator");
                self.den = self.den.div_exact(&g).expect("gcd divides denominator");
            }
        }
        let lc = self.den.leading().1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    /// The space this scalar lives in.
    pub fn space(&self) -> &Arc<ParameterSpace> {
        &self.space
    }

    pub fn zero(space: &Arc<ParameterSpace>) -> Scalar {
        let arity = space.arity();
        Scalar {
            space: Arc::clone(space),
            num: MultiPoly::zero(arity),
            den: MultiPoly::one(arity),
        }
    }

    pub fn one(space: &Arc<ParameterSpace>) -> Scalar {
        Scalar::from_rational(space, BigRational::one())
    }

    pub fn from_int(space: &Arc<ParameterSpace>, n: i64) -> Scalar {
        Scalar::from_rational(space, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(space: &Arc<ParameterSpace>, r: BigRational) -> Scalar {
        let arity = space.arity();
        Scalar {
            space: Arc::clone(space),
            num: MultiPoly::constant(arity, r),
            den: MultiPoly::one(arity),
        }
    }

    /// The i-th parameter as a scalar.
    pub fn parameter(space: &Arc<ParameterSpace>, idx: usize) -> Scalar {
        assert!(idx < space.arity(), "parameter index out of range");
        Scalar {
            space: Arc::clone(space),
            num: MultiPoly::var_pow(space.arity(), idx, 1),
            den: MultiPoly::one(space.arity()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Exact rational value when the scalar is constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// Term count of numerator and denominator combined; a cheap size proxy
    /// used when choosing elimination pivots.
    pub fn complexity(&self) -> usize {
        self.num.terms.len() + self.den.terms.len()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.check_space(other);
        if self.den.is_one() && other.den.is_one() {
            return Scalar::make(
                Arc::clone(&self.space),
                self.num.add(&other.num),
                MultiPoly::one(self.space.arity()),
            );
        }
        // Knuth's fraction addition: keep intermediate gcds small.
        let g0 = poly_gcd(&self.den, &other.den);
        let db = self.den.div_exact(&g0).unwrap();
        let dd = other.den.div_exact(&g0).unwrap();
        let t = self.num.mul(&dd).add(&other.num.mul(&db));
        let den = self.den.mul(&dd);
        Scalar::make(Arc::clone(&self.space), t, den)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            space: Arc::clone(&self.space),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.check_space(other);
        if self.is_zero() || other.is_zero() {
            return Scalar::zero(&self.space);
        }
        if self.den.is_one() && other.den.is_one() {
            return Scalar::make(
                Arc::clone(&self.space),
                self.num.mul(&other.num),
                MultiPoly::one(self.space.arity()),
            );
        }
        // Cross-cancel before multiplying.
        let g1 = poly_gcd(&self.num, &other.den);
        let g2 = poly_gcd(&other.num, &self.den);
        let n = self
            .num
            .div_exact(&g1)
            .unwrap()
            .mul(&other.num.div_exact(&g2).unwrap());
        let d = self
            .den
            .div_exact(&g2)
            .unwrap()
            .mul(&other.den.div_exact(&g1).unwrap());
        Scalar::make(Arc::clone(&self.space), n, d)
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::make(
            Arc::clone(&self.space),
            self.den.clone(),
            self.num.clone(),
        ))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Scalar, ScalarError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = Scalar::one(&self.space);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Converts to a unit scalar when the value is ±(monomial).
    pub fn to_unit(&self) -> Result<UnitScalar, ScalarError> {
        let err = || ScalarError::NotAUnit(self.to_string());
        if self.num.terms.len() != 1 || self.den.terms.len() != 1 {
            return Err(err());
        }
        let (nm, nc) = self.num.leading();
        let (dm, dc) = self.den.leading();
        let coeff = nc / dc;
        let negative = if coeff.is_one() {
            false
        } else if (-&coeff).is_one() {
            true
        } else {
            return Err(err());
        };
        let exps: Vec<i64> = nm
            .exps
            .iter()
            .zip(&dm.exps)
            .map(|(a, b)| *a as i64 - *b as i64)
            .collect();
        Ok(UnitScalar {
            space: Arc::clone(&self.space),
            negative,
            exps,
        })
    }

    /// Parses a scalar expression; see the crate README for the grammar.
    pub fn parse(space: &Arc<ParameterSpace>, input: &str) -> Result<Scalar, ScalarError> {
        Parser::new(space, input).parse_all()
    }

    fn check_space(&self, other: &Scalar) {
        assert!(
            same_space(&self.space, &other.space),
            "scalars from different parameter spaces: {:?} vs {:?}",
            self.space.names,
            other.space.names
        );
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            return write!(f, "0");
        }
        if self.den.is_one() {
            write!(f, "{}", fmt_poly(&self.num, &self.space))
        } else {
            write!(
                f,
                "({})/({})",
                fmt_poly(&self.num, &self.space),
                fmt_poly(&self.den, &self.space)
            )
        }
    }
}

fn fmt_poly(p: &MultiPoly, space: &ParameterSpace) -> String {
    if p.is_zero() {
        return "0".to_owned();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut factors: Vec<String> = Vec::new();
        if !abs.is_one() || m.is_one() {
            factors.push(fmt_rational(&abs));
        }
        for (j, &e) in m.exps.iter().enumerate() {
            if e == 1 {
                factors.push(space.name(j).to_owned());
            } else if e > 1 {
                factors.push(format!("{}^{}", space.name(j), e));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// UnitScalar: signed Laurent monomials
// ---------------------------------------------------------------------------

/// A signed Laurent monomial ±t₁^{e₁}···t_m^{e_m}.
///
/// These form the unit group where all character values live. Products,
/// inverses, and integer powers stay in the group; conversion to a full
/// `Scalar` is lossless.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitScalar {
    space: Arc<ParameterSpace>,
    negative: bool,
    exps: Vec<i64>,
}

impl UnitScalar {
    pub fn new(space: &Arc<ParameterSpace>, negative: bool, exps: Vec<i64>) -> UnitScalar {
        assert_eq!(exps.len(), space.arity(), "exponent vector length mismatch");
        UnitScalar {
            space: Arc::clone(space),
            negative,
            exps,
        }
    }

    pub fn one(space: &Arc<ParameterSpace>) -> UnitScalar {
        UnitScalar::new(space, false, vec![0; space.arity()])
    }

    pub fn minus_one(space: &Arc<ParameterSpace>) -> UnitScalar {
        UnitScalar::new(space, true, vec![0; space.arity()])
    }

    /// The i-th parameter as a unit.
    pub fn parameter(space: &Arc<ParameterSpace>, idx: usize) -> UnitScalar {
        assert!(idx < space.arity(), "parameter index out of range");
        let mut exps = vec![0i64; space.arity()];
        exps[idx] = 1;
        UnitScalar::new(space, false, exps)
    }

    pub fn space(&self) -> &Arc<ParameterSpace> {
        &self.space
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &UnitScalar) -> UnitScalar {
        assert!(
            same_space(&self.space, &other.space),
            "unit scalars from different parameter spaces"
        );
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a.checked_add(*b).expect("unit exponent overflow"))
            .collect();
        UnitScalar {
            space: Arc::clone(&self.space),
            negative: self.negative ^ other.negative,
            exps,
        }
    }

    pub fn inv(&self) -> UnitScalar {
        UnitScalar {
            space: Arc::clone(&self.space),
            negative: self.negative,
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> UnitScalar {
        UnitScalar {
            space: Arc::clone(&self.space),
            negative: self.negative && k.rem_euclid(2) == 1,
            exps: self
                .exps
                .iter()
                .map(|e| e.checked_mul(k).expect("unit exponent overflow"))
                .collect(),
        }
    }

    pub fn to_scalar(&self) -> Scalar {
        let arity = self.space.arity();
        let mut npos = vec![0u32; arity];
        let mut nneg = vec![0u32; arity];
        for (i, &e) in self.exps.iter().enumerate() {
            if e >= 0 {
                npos[i] = e as u32;
            } else {
                nneg[i] = (-e) as u32;
            }
        }
        let mut c = BigRational::one();
        if self.negative {
            c = -c;
        }
        Scalar {
            space: Arc::clone(&self.space),
            num: MultiPoly::term(arity, Monomial::new(npos), c),
            den: MultiPoly::term(arity, Monomial::new(nneg), BigRational::one()),
        }
    }

    /// Parses a unit scalar (rejects anything that is not ±monomial).
    pub fn parse(space: &Arc<ParameterSpace>, input: &str) -> Result<UnitScalar, ScalarError> {
        Scalar::parse(space, input)?.to_unit()
    }
}

impl fmt::Display for UnitScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 1 {
                factors.push(self.space.name(i).to_owned());
            } else if e != 0 {
                factors.push(format!("{}^{}", self.space.name(i), e));
            }
        }
        if factors.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", factors.join("*"))
        }
    }
}

/// True iff `u` is a root of unity; in Q(t₁,…,t_m) that means u ∈ {1, −1}.
pub fn is_root_of_unity(u: &UnitScalar) -> bool {
    u.exps.iter().all(|&e| e == 0)
}

/// Solves base^k = value in the unit group.
///
/// Returns the unique exponent when `base` is not a root of unity and the
/// equation is solvable, `None` when no integer works, and an error when
/// `base` is ±1 and solutions exist but are not unique.
pub fn unit_discrete_log(base: &UnitScalar, value: &UnitScalar) -> Result<Option<i64>, ScalarError> {
    if is_root_of_unity(base) {
        if !is_root_of_unity(value) {
            return Ok(None);
        }
        if !base.negative && value.negative {
            // 1^k is never -1
            return Ok(None);
        }
        return Err(ScalarError::AmbiguousLog {
            base: base.to_string(),
            value: value.to_string(),
        });
    }
    let mut k: Option<i64> = None;
    for (&be, &ve) in base.exps.iter().zip(&value.exps) {
        if be == 0 {
            if ve != 0 {
                return Ok(None);
            }
            continue;
        }
        if ve % be != 0 {
            return Ok(None);
        }
        let cand = ve / be;
        match k {
            None => k = Some(cand),
            Some(prev) if prev != cand => return Ok(None),
            _ => {}
        }
    }
    let k = k.expect("base has a nonzero exponent");
    let sign_matches = if base.negative {
        (k.rem_euclid(2) == 1) == value.negative
    } else {
        !value.negative
    };
    if sign_matches {
        Ok(Some(k))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    space: &'a Arc<ParameterSpace>,
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(space: &'a Arc<ParameterSpace>, input: &'a str) -> Self {
        Parser { space, input: input.as_bytes(), pos: 0 }
    }

    fn parse_all(&mut self) -> Result<Scalar, ScalarError> {
        let s = self.expr()?;
        self.skip_ws();
        if self.pos != self.input.len() {
            return Err(self.err("trailing input"));
        }
        Ok(s)
    }

    fn err(&self, message: &str) -> ScalarError {
        ScalarError::Parse { offset: self.pos, message: message.to_owned() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let t = self.unary()?;
                    acc = acc.mul(&t);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let t = self.unary()?;
                    acc = acc.div(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar, ScalarError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Scalar, ScalarError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.exponent()?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ScalarError> {
        self.skip_ws();
        let mut negative = false;
        if self.input.get(self.pos) == Some(&b'-') {
            negative = true;
            self.pos += 1;
        }
        let digits = self.digits()?;
        let v: i64 = digits
            .parse()
            .map_err(|_| self.err("exponent out of range"))?;
        Ok(if negative { -v } else { v })
    }

    fn digits(&mut self) -> Result<String, ScalarError> {
        let start = self.pos;
        while self
            .input
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        if self.input.get(self.pos) == Some(&b'.') {
            let lit = String::from_utf8_lossy(&self.input[start..=self.pos]).into_owned();
            return Err(ScalarError::FloatRejected(lit));
        }
        Ok(String::from_utf8_lossy(&self.input[start..self.pos]).into_owned())
    }

    fn primary(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits()?;
                let n = BigInt::from_str(&digits).expect("digit string");
                Ok(Scalar::from_rational(
                    self.space,
                    BigRational::from_integer(n),
                ))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .input
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.input[start..self.pos]).into_owned();
                match self.space.index_of(&name) {
                    Some(idx) => Ok(Scalar::parameter(self.space, idx)),
                    None => Err(ScalarError::UnknownParameter {
                        name,
                        declared: self.space.names.clone(),
                    }),
                }
            }
            Some(b'.') => Err(ScalarError::FloatRejected(".".to_owned())),
            _ => Err(self.err("expected a number, parameter, or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qspace() -> Arc<ParameterSpace> {
        ParameterSpace::new(&["q"])
    }

    fn rs_space() -> Arc<ParameterSpace> {
        ParameterSpace::new(&["r", "s"])
    }

    fn s(space: &Arc<ParameterSpace>, text: &str) -> Scalar {
        Scalar::parse(space, text).unwrap()
    }

    #[test]
    fn cancellation_to_one() {
        let sp = qspace();
        let a = s(&sp, "q - q^-1");
        assert!(a.div(&a).unwrap().is_one());
    }

    #[test]
    fn polynomial_cancellation() {
        let sp = qspace();
        let lhs = s(&sp, "(q^2 - 1)/(q - 1)");
        assert_eq!(lhs, s(&sp, "q + 1"));
    }

    #[test]
    fn q_bracket_product() {
        // [2]_q [3]_q with [n] = (q^n - q^-n)/(q - q^-1)
        let sp = qspace();
        let bracket = |n: i64| {
            s(&sp, &format!("(q^{n} - q^-{n})/(q - q^-1)"))
        };
        let lhs = bracket(2).mul(&bracket(3));
        let rhs = s(&sp, "(q + q^-1)*(q^2 + 1 + q^-2)");
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn gcd_normalizes_multivariate() {
        let sp = rs_space();
        let a = s(&sp, "(r^2*s - s)/(r - 1)");
        assert_eq!(a, s(&sp, "s*(r + 1)"));
    }

    #[test]
    fn root_of_unity_detection() {
        let sp = qspace();
        assert!(!is_root_of_unity(&UnitScalar::parse(&sp, "q^2").unwrap()));
        assert!(is_root_of_unity(&UnitScalar::parse(&sp, "-1").unwrap()));
        assert!(is_root_of_unity(&UnitScalar::parse(&sp, "1").unwrap()));
    }

    #[test]
    fn discrete_log_examples() {
        let sp = qspace();
        let u = |t: &str| UnitScalar::parse(&sp, t).unwrap();
        assert_eq!(unit_discrete_log(&u("q^2"), &u("q^-6")), Ok(Some(-3)));
        assert_eq!(unit_discrete_log(&u("q^2"), &u("q^3")), Ok(None));
        assert_eq!(unit_discrete_log(&u("-q"), &u("q^2")), Ok(Some(2)));
        assert_eq!(unit_discrete_log(&u("-q"), &u("-q^3")), Ok(Some(3)));
        assert_eq!(unit_discrete_log(&u("1"), &u("-1")), Ok(None));
        assert!(matches!(
            unit_discrete_log(&u("-1"), &u("-1")),
            Err(ScalarError::AmbiguousLog { .. })
        ));
        assert_eq!(unit_discrete_log(&u("-1"), &u("q")), Ok(None));
    }

    #[test]
    fn discrete_log_two_parameters() {
        let sp = rs_space();
        let u = |t: &str| UnitScalar::parse(&sp, t).unwrap();
        assert_eq!(unit_discrete_log(&u("r*s^-1"), &u("r^3*s^-3")), Ok(Some(3)));
        assert_eq!(unit_discrete_log(&u("r*s^-1"), &u("r^3*s^-2")), Ok(None));
        assert_eq!(unit_discrete_log(&u("r*s"), &u("1")), Ok(Some(0)));
    }

    #[test]
    fn float_literals_rejected() {
        let sp = qspace();
        assert!(matches!(
            Scalar::parse(&sp, "1.5"),
            Err(ScalarError::FloatRejected(_))
        ));
        assert!(matches!(
            Scalar::parse(&sp, "q^1.5"),
            Err(ScalarError::FloatRejected(_))
        ));
    }

    #[test]
    fn unknown_parameter_rejected() {
        let sp = qspace();
        assert!(matches!(
            Scalar::parse(&sp, "q*z"),
            Err(ScalarError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn division_by_zero() {
        let sp = qspace();
        assert_eq!(
            s(&sp, "q").div(&Scalar::zero(&sp)),
            Err(ScalarError::DivisionByZero)
        );
        assert!(matches!(
            Scalar::parse(&sp, "1/(q - q)"),
            Err(ScalarError::DivisionByZero)
        ));
    }

    #[test]
    fn unit_round_trip_display() {
        let sp = rs_space();
        for text in ["1", "-1", "r", "-r*s^-1", "r^2*s^3", "-s^-4"] {
            let u = UnitScalar::parse(&sp, text).unwrap();
            assert_eq!(u.to_string(), text);
            assert_eq!(UnitScalar::parse(&sp, &u.to_string()).unwrap(), u);
        }
    }

    fn arb_poly(sp: Arc<ParameterSpace>) -> impl Strategy<Value = Scalar> {
        let arity = sp.arity();
        proptest::collection::vec(
            (
                proptest::collection::vec(0u32..4, arity),
                -4i64..5,
            ),
            0..4,
        )
        .prop_map(move |terms| {
            let mut p = MultiPoly::zero(arity);
            for (exps, c) in terms {
                p.add_term(
                    Monomial::new(exps),
                    BigRational::from_integer(BigInt::from(c)),
                );
            }
            Scalar {
                space: Arc::clone(&sp),
                num: p,
                den: MultiPoly::one(arity),
            }
        })
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        let sp = rs_space();
        (arb_poly(Arc::clone(&sp)), arb_poly(sp)).prop_filter_map(
            "nonzero denominator",
            |(n, d)| {
                if d.is_zero() {
                    None
                } else {
                    Some(n.div(&d).unwrap())
                }
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.sub(&a), Scalar::zero(a.space()));
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn display_parse_round_trip(a in arb_scalar()) {
            let text = a.to_string();
            let back = Scalar::parse(a.space(), &text).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn unit_discrete_log_round_trip(
            e1 in -3i64..4, e2 in -3i64..4, neg in proptest::bool::ANY, k in -20i64..21
        ) {
            prop_assume!(e1 != 0 || e2 != 0);
            let sp = rs_space();
            let base = UnitScalar::new(&sp, neg, vec![e1, e2]);
            let value = base.pow(k);
            prop_assert_eq!(unit_discrete_log(&base, &value), Ok(Some(k)));
        }
    }
}
