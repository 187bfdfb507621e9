//! The algebra built from a reduced datum: graded bases of the raising and
//! lowering halves as quotients of free algebras by braided Serre relations,
//! triangular normal forms, skew derivations, the bilinear pairing with its
//! Gram matrices and dual bases, the lowering-side antipode, and a battery of
//! executable identity checks.
//!
//! Words in the free halves are reduced degreewise: the slice of the Serre
//! ideal in each multidegree is spanned by all two-sided placements of the
//! Serre generators, row-reduced exactly over the scalar field, and the
//! lexicographically smallest complement of the pivot words is kept as the
//! canonical basis. A general element is a sum of triangular terms
//! (lowering word) · (group element) · (raising word) with scalar
//! coefficients, and multiplication rewrites into that shape.

use crate::datum::{check_dj2, CartanData, DatumError, ReducedDatum};
use crate::lattice::{DegreeVector, GroupElement};
use crate::linalg::Matrix;
use crate::scalars::{ParameterSpace, Scalar, ScalarError, UnitScalar};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

/// Default cap on the total degree of any graded slice the engine will
/// materialize. Override per handle with [`Engine::with_max_degree`] or
/// globally with the `HOPFKIT_MAX_DEGREE` environment variable.
pub const DEFAULT_MAX_DEGREE: usize = 10;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("total degree {requested} exceeds the handle cap {cap}; raise max_degree or set HOPFKIT_MAX_DEGREE")]
    DegreeCapExceeded { requested: usize, cap: usize },
    #[error("expected an element of the {expected} half, got the {got} half")]
    WrongSide { expected: Side, got: Side },
    #[error("Gram matrix in degree {degree} is singular; the pairing is degenerate on this datum")]
    SingularGram { degree: String },
}

/// Which triangular half a pure word lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Words in the lowering generators F_i.
    Lower,
    /// Words in the raising generators E_i.
    Upper,
}

impl Side {
    fn letter(self) -> char {
        match self {
            Side::Lower => 'F',
            Side::Upper => 'E',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Lower => write!(f, "lower"),
            Side::Upper => write!(f, "upper"),
        }
    }
}

/// The four skew derivations. `R` peels the last raising letter, `RPrime`
/// the first; `S` peels the first lowering letter, `SPrime` the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewMap {
    R,
    RPrime,
    S,
    SPrime,
}

impl SkewMap {
    pub fn side(self) -> Side {
        match self {
            SkewMap::R | SkewMap::RPrime => Side::Upper,
            SkewMap::S | SkewMap::SPrime => Side::Lower,
        }
    }
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

/// A finite scalar combination of words in one half, not necessarily reduced
/// or homogeneous.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfElement {
    side: Side,
    terms: BTreeMap<Vec<u8>, Scalar>,
}

impl HalfElement {
    pub fn zero(side: Side) -> HalfElement {
        HalfElement { side, terms: BTreeMap::new() }
    }

    pub fn word(side: Side, word: Vec<u8>, coeff: Scalar) -> HalfElement {
        let mut h = HalfElement::zero(side);
        h.insert_add(word, coeff);
        h
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &Scalar)> {
        self.terms.iter()
    }

    pub fn insert_add(&mut self, word: Vec<u8>, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &HalfElement) -> HalfElement {
        assert_eq!(self.side, other.side, "cannot add across halves");
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.insert_add(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HalfElement) -> HalfElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HalfElement {
        let mut out = HalfElement::zero(self.side);
        for (w, c) in self.terms() {
            out.insert_add(w.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> HalfElement {
        let mut out = HalfElement::zero(self.side);
        for (w, c) in self.terms() {
            out.insert_add(w.clone(), c.mul(s));
        }
        out
    }
}

/// A triangular term key: lowering word, group exponents, raising word.
pub type TriKey = (Vec<u8>, Vec<i64>, Vec<u8>);

/// An element of the full algebra in triangular coordinates. Zero iff the
/// term map is empty; uniqueness of the representation holds once the words
/// are canonical, which every [`Engine`] operation maintains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<TriKey, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> AlgebraElement {
        AlgebraElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TriKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn insert_add(&mut self, key: TriKey, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.insert_add(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (k, c) in self.terms() {
            out.insert_add(k.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (k, c) in self.terms() {
            out.insert_add(k.clone(), c.mul(s));
        }
        out
    }
}

/// A sum of simple tensors in the two-fold tensor square of the algebra,
/// with componentwise multiplication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorSquare {
    terms: BTreeMap<(TriKey, TriKey), Scalar>,
}

impl TensorSquare {
    pub fn zero() -> TensorSquare {
        TensorSquare::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert_add(&mut self, key: (TriKey, TriKey), coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &TensorSquare) -> TensorSquare {
        let mut out = self.clone();
        for (k, c) in other.terms.iter() {
            out.insert_add(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorSquare) -> TensorSquare {
        let mut out = self.clone();
        for (k, c) in other.terms.iter() {
            out.insert_add(k.clone(), c.neg());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Serre generators and graded bases
// ---------------------------------------------------------------------------

/// One braided Serre relation: the iterated braided commutator of generator
/// `i` applied 1 − a_ij times to generator `j`, as a free-word combination.
#[derive(Debug, Clone)]
pub struct SerreGenerator {
    pub i: usize,
    pub j: usize,
    pub degree: DegreeVector,
    pub element: HalfElement,
}

/// The canonical basis of one multidegree slice of a half, together with the
/// reduction expressing every free word of that degree over the basis.
#[derive(Debug)]
pub struct BasisData {
    degree: DegreeVector,
    words: Vec<Vec<u8>>,
    expand: BTreeMap<Vec<u8>, Vec<(usize, Scalar)>>,
}

impl BasisData {
    pub fn degree(&self) -> &DegreeVector {
        &self.degree
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Canonical words in ascending lexicographic order.
    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// The expansion of a free word of this degree over the canonical words,
    /// as (basis index, coefficient) pairs. None if the word has a different
    /// degree.
    pub fn express(&self, word: &[u8]) -> Option<&[(usize, Scalar)]> {
        self.expand.get(word).map(|v| v.as_slice())
    }
}

/// All words with the given letter multiplicities, in descending
/// lexicographic order (larger letters first). Empty when some coordinate is
/// negative.
fn words_of_degree(theta: usize, degree: &DegreeVector) -> Vec<Vec<u8>> {
    if !degree.is_nonnegative() {
        return Vec::new();
    }
    let total = degree.total() as usize;
    let mut counts: Vec<i64> = degree.coords().to_vec();
    counts.resize(theta, 0);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(total);
    fn rec(counts: &mut [i64], cur: &mut Vec<u8>, total: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for j in (0..counts.len()).rev() {
            if counts[j] > 0 {
                counts[j] -= 1;
                cur.push(j as u8);
                rec(counts, cur, total, out);
                cur.pop();
                counts[j] += 1;
            }
        }
    }
    rec(&mut counts, &mut cur, total, &mut out);
    out
}

pub(crate) fn word_degree(theta: usize, word: &[u8]) -> DegreeVector {
    let mut c = vec![0i64; theta];
    for &l in word {
        c[l as usize] += 1;
    }
    DegreeVector::new(c)
}

/// All degree vectors 0 ≤ δ ≤ limit componentwise, ascending.
fn degree_box(limit: &DegreeVector) -> Vec<DegreeVector> {
    let mut out = vec![Vec::new()];
    for &cap in limit.coords() {
        let mut next = Vec::with_capacity(out.len() * (cap as usize + 1));
        for prefix in &out {
            for v in 0..=cap {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(DegreeVector::new).collect()
}

#[derive(Default)]
struct Caches {
    basis: BTreeMap<(Side, DegreeVector), Arc<BasisData>>,
    pair: BTreeMap<(Vec<u8>, Vec<u8>), Scalar>,
}

/// One pass/fail line of the identity battery.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn ok(name: &str, detail: String) -> CheckReport {
        CheckReport { name: name.to_string(), passed: true, detail }
    }

    fn fail(name: &str, detail: String) -> CheckReport {
        CheckReport { name: name.to_string(), passed: false, detail }
    }
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

/// A handle on the algebra of one reduced datum. Construction detects the
/// Cartan matrix; queries lazily extend internal caches behind a lock, so a
/// warmed handle can serve concurrent readers.
pub struct Engine {
    datum: ReducedDatum,
    cartan: CartanData,
    max_degree: usize,
    presentation_assumed: bool,
    caches: RwLock<Caches>,
}

impl Engine {
    pub fn new(datum: ReducedDatum) -> Result<Engine, EngineError> {
        let cartan = datum.detect_cartan()?;
        let presentation_assumed = !(cartan.finite_type && check_dj2(&datum, &cartan).is_some());
        let max_degree = std::env::var("HOPFKIT_MAX_DEGREE")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(DEFAULT_MAX_DEGREE);
        Ok(Engine {
            datum,
            cartan,
            max_degree,
            presentation_assumed,
            caches: RwLock::new(Caches::default()),
        })
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Engine {
        self.max_degree = max_degree;
        self
    }

    pub fn datum(&self) -> &ReducedDatum {
        &self.datum
    }

    pub fn cartan(&self) -> &CartanData {
        &self.cartan
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// True when the datum is not verifiably of the twisted one-parameter
    /// shape in finite type, so the Serre presentation of the halves is an
    /// assumption rather than a theorem for this datum.
    pub fn presentation_assumed(&self) -> bool {
        self.presentation_assumed
    }

    pub fn theta(&self) -> usize {
        self.datum.theta()
    }

    pub fn space(&self) -> &Arc<ParameterSpace> {
        self.datum.space()
    }

    /// Materialize every graded slice of both halves up to the given total
    /// degree, so later queries only read.
    pub fn warm(&self, upto_total: usize) -> Result<(), EngineError> {
        let cap = upto_total.min(self.max_degree);
        let limit = DegreeVector::new(vec![cap as i64; self.theta()]);
        for deg in degree_box(&limit) {
            if deg.total() as usize > cap {
                continue;
            }
            self.graded_basis(Side::Lower, &deg)?;
            self.graded_basis(Side::Upper, &deg)?;
        }
        Ok(())
    }

    // -- scalar helpers ----------------------------------------------------

    fn one_scalar(&self) -> Scalar {
        Scalar::one(self.space())
    }

    /// The braiding character of a multidegree against generator i:
    /// ∏_t q_it^{deg_t}.
    pub(crate) fn braid_char(&self, i: usize, deg: &DegreeVector) -> UnitScalar {
        let mut u = UnitScalar::one(self.space());
        for (t, &e) in deg.coords().iter().enumerate() {
            if e != 0 {
                u = u.mul(&self.datum.q(i, t).pow(e));
            }
        }
        u
    }

    /// ∏ over the letters t of the word of χ_t(g).
    fn word_char_value(&self, word: &[u8], g: &GroupElement) -> UnitScalar {
        let mut u = UnitScalar::one(self.space());
        for &t in word {
            u = u.mul(&self.datum.character(t as usize).evaluate(g));
        }
        u
    }

    // -- Serre generators and bases -----------------------------------------

    /// The braided Serre generators of the given half, one per ordered pair
    /// i ≠ j, in degree (1 − a_ij)·α_i + α_j.
    pub fn serre_generators(&self, side: Side) -> Vec<SerreGenerator> {
        let theta = self.theta();
        let mut out = Vec::new();
        for i in 0..theta {
            for j in 0..theta {
                if i == j {
                    continue;
                }
                let n = (1 - self.cartan.a[i][j]) as usize;
                let mut y = HalfElement::word(side, vec![j as u8], self.one_scalar());
                let mut deg = DegreeVector::simple(theta, j);
                for _ in 0..n {
                    y = self.braided_commutator(side, i, &deg, &y);
                    deg = &deg + &DegreeVector::simple(theta, i);
                }
                out.push(SerreGenerator { i, j, degree: deg, element: y });
            }
        }
        out
    }

    /// One braided commutator step: generator i against a homogeneous
    /// element of the given degree. On the upper side the braiding scalar is
    /// ∏_t q_it^{deg_t}; on the lower side its inverse.
    fn braided_commutator(
        &self,
        side: Side,
        i: usize,
        deg: &DegreeVector,
        y: &HalfElement,
    ) -> HalfElement {
        let q = match side {
            Side::Upper => self.braid_char(i, deg),
            Side::Lower => self.braid_char(i, deg).inv(),
        };
        let qs = q.to_scalar();
        let mut out = HalfElement::zero(side);
        for (w, c) in y.terms() {
            let mut left = Vec::with_capacity(w.len() + 1);
            left.push(i as u8);
            left.extend_from_slice(w);
            out.insert_add(left, c.clone());
            let mut right = w.clone();
            right.push(i as u8);
            out.insert_add(right, c.mul(&qs).neg());
        }
        out
    }

    /// The canonical basis of one multidegree slice of a half.
    pub fn graded_basis(
        &self,
        side: Side,
        degree: &DegreeVector,
    ) -> Result<Arc<BasisData>, EngineError> {
        assert_eq!(degree.len(), self.theta(), "degree arity mismatch");
        if !degree.is_nonnegative() {
            return Ok(Arc::new(BasisData {
                degree: degree.clone(),
                words: Vec::new(),
                expand: BTreeMap::new(),
            }));
        }
        let total = degree.total() as usize;
        if total > self.max_degree {
            return Err(EngineError::DegreeCapExceeded { requested: total, cap: self.max_degree });
        }
        let key = (side, degree.clone());
        if let Some(hit) = self.caches.read().expect("cache lock").basis.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(self.build_basis(side, degree));
        let mut caches = self.caches.write().expect("cache lock");
        let entry = caches.basis.entry(key).or_insert_with(|| Arc::clone(&built));
        Ok(Arc::clone(entry))
    }

    fn build_basis(&self, side: Side, degree: &DegreeVector) -> BasisData {
        let theta = self.theta();
        let space = self.space();
        let all = words_of_degree(theta, degree);
        let col_of: BTreeMap<Vec<u8>, usize> =
            all.iter().enumerate().map(|(c, w)| (w.clone(), c)).collect();
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for gen in self.serre_generators(side) {
            let rest = degree - &gen.degree;
            if !rest.is_nonnegative() {
                continue;
            }
            for ldeg in degree_box(&rest) {
                let rdeg = &rest - &ldeg;
                for u in words_of_degree(theta, &ldeg) {
                    for v in words_of_degree(theta, &rdeg) {
                        let mut row = vec![Scalar::zero(space); all.len()];
                        for (w, c) in gen.element.terms() {
                            let mut full = Vec::with_capacity(u.len() + w.len() + v.len());
                            full.extend_from_slice(&u);
                            full.extend_from_slice(w);
                            full.extend_from_slice(&v);
                            let col = col_of[&full];
                            row[col] = row[col].add(c);
                        }
                        rows.push(row);
                    }
                }
            }
        }
        if rows.is_empty() {
            let words: Vec<Vec<u8>> = all.iter().rev().cloned().collect();
            let expand = words
                .iter()
                .enumerate()
                .map(|(bi, w)| (w.clone(), vec![(bi, Scalar::one(space))]))
                .collect();
            return BasisData { degree: degree.clone(), words, expand };
        }
        let mut m = Matrix::from_rows(rows);
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free_cols: Vec<usize> = (0..all.len()).filter(|c| !pivot_set.contains(c)).collect();
        // Columns run in descending lexicographic order, so the ascending
        // canonical list reverses the free columns.
        let words: Vec<Vec<u8>> = free_cols.iter().rev().map(|&c| all[c].clone()).collect();
        let basis_index: BTreeMap<usize, usize> =
            free_cols.iter().rev().enumerate().map(|(bi, &c)| (c, bi)).collect();
        let mut expand: BTreeMap<Vec<u8>, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (&c, &bi) in &basis_index {
            expand.insert(all[c].clone(), vec![(bi, Scalar::one(space))]);
        }
        for (r, &p) in pivots.iter().enumerate() {
            let mut combo: Vec<(usize, Scalar)> = Vec::new();
            for (&c, &bi) in &basis_index {
                let v = m.at(r, c);
                if !v.is_zero() {
                    combo.push((bi, v.neg()));
                }
            }
            combo.sort_by_key(|&(bi, _)| bi);
            expand.insert(all[p].clone(), combo);
        }
        BasisData { degree: degree.clone(), words, expand }
    }

    /// Dimension of one graded slice.
    pub fn dim(&self, side: Side, degree: &DegreeVector) -> Result<usize, EngineError> {
        Ok(self.graded_basis(side, degree)?.dim())
    }

    /// All (degree, dimension) pairs with positive total degree up to the
    /// given total, ordered by total then by degree vector.
    pub fn dimension_table(
        &self,
        side: Side,
        upto_total: usize,
    ) -> Result<Vec<(DegreeVector, usize)>, EngineError> {
        let cap = upto_total.min(self.max_degree);
        let limit = DegreeVector::new(vec![cap as i64; self.theta()]);
        let mut degs: Vec<DegreeVector> = degree_box(&limit)
            .into_iter()
            .filter(|d| d.total() > 0 && d.total() as usize <= cap)
            .collect();
        degs.sort_by_key(|d| (d.total(), d.clone()));
        let mut out = Vec::with_capacity(degs.len());
        for d in degs {
            let n = self.dim(side, &d)?;
            out.push((d, n));
        }
        Ok(out)
    }

    /// Rewrite a half element over the canonical words of its degrees.
    pub fn reduce(&self, h: &HalfElement) -> Result<HalfElement, EngineError> {
        let mut out = HalfElement::zero(h.side());
        for (w, c) in h.terms() {
            let deg = word_degree(self.theta(), w);
            let basis = self.graded_basis(h.side(), &deg)?;
            let combo = basis.express(w).expect("every word of the degree is indexed");
            for (bi, s) in combo {
                out.insert_add(basis.words()[*bi].clone(), c.mul(s));
            }
        }
        Ok(out)
    }

    // -- element constructors ------------------------------------------------

    pub fn one(&self) -> AlgebraElement {
        let mut a = AlgebraElement::zero();
        a.insert_add(self.unit_key(), self.one_scalar());
        a
    }

    fn unit_key(&self) -> TriKey {
        (Vec::new(), vec![0; self.datum.group().rank()], Vec::new())
    }

    pub fn group_element(&self, g: &GroupElement) -> AlgebraElement {
        let mut a = AlgebraElement::zero();
        a.insert_add((Vec::new(), g.exponents().to_vec(), Vec::new()), self.one_scalar());
        a
    }

    pub fn gen_e(&self, i: usize) -> AlgebraElement {
        let mut a = AlgebraElement::zero();
        a.insert_add(
            (Vec::new(), vec![0; self.datum.group().rank()], vec![i as u8]),
            self.one_scalar(),
        );
        a
    }

    pub fn gen_f(&self, i: usize) -> AlgebraElement {
        let mut a = AlgebraElement::zero();
        a.insert_add(
            (vec![i as u8], vec![0; self.datum.group().rank()], Vec::new()),
            self.one_scalar(),
        );
        a
    }

    /// Embed a (reduced or free) half element into the algebra.
    pub fn from_half(&self, h: &HalfElement) -> AlgebraElement {
        let zero_g = vec![0; self.datum.group().rank()];
        let mut a = AlgebraElement::zero();
        for (w, c) in h.terms() {
            let key = match h.side() {
                Side::Lower => (w.clone(), zero_g.clone(), Vec::new()),
                Side::Upper => (Vec::new(), zero_g.clone(), w.clone()),
            };
            a.insert_add(key, c.clone());
        }
        a
    }

    /// F-word times F-word inside the lower half, reduced.
    pub fn lower_product(
        &self,
        a: &HalfElement,
        b: &HalfElement,
    ) -> Result<HalfElement, EngineError> {
        self.half_product(Side::Lower, a, b)
    }

    /// E-word times E-word inside the upper half, reduced.
    pub fn upper_product(
        &self,
        a: &HalfElement,
        b: &HalfElement,
    ) -> Result<HalfElement, EngineError> {
        self.half_product(Side::Upper, a, b)
    }

    fn half_product(
        &self,
        side: Side,
        a: &HalfElement,
        b: &HalfElement,
    ) -> Result<HalfElement, EngineError> {
        for (got, h) in [(a.side(), a), (b.side(), b)] {
            let _ = h;
            if got != side {
                return Err(EngineError::WrongSide { expected: side, got });
            }
        }
        let mut raw = HalfElement::zero(side);
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                let mut w = Vec::with_capacity(wa.len() + wb.len());
                w.extend_from_slice(wa);
                w.extend_from_slice(wb);
                raw.insert_add(w, ca.mul(cb));
            }
        }
        self.reduce(&raw)
    }

    // -- multiplication ------------------------------------------------------

    /// Product in triangular normal form. The raising letters of the left
    /// factor are walked through the lowering word of the right factor with
    /// the cross relation, group elements collect character scalars, and the
    /// resulting pure words are reduced degreewise.
    pub fn multiply(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
    ) -> Result<AlgebraElement, EngineError> {
        let mut raw: Vec<(TriKey, Scalar)> = Vec::new();
        for ((f1, g1e, e1), c1) in a.terms() {
            let g1 = self.datum.group().element(g1e.clone());
            for ((f2, g2e, e2), c2) in b.terms() {
                let g2 = self.datum.group().element(g2e.clone());
                let crossed = self.cross(e1, f2);
                for (fw, gx, ew, c) in crossed {
                    let mut coeff = c1.mul(c2).mul(&c);
                    coeff = coeff.mul(&self.word_char_value(&fw, &g1).inv().to_scalar());
                    coeff = coeff.mul(&self.word_char_value(&ew, &g2).inv().to_scalar());
                    let mut f = Vec::with_capacity(f1.len() + fw.len());
                    f.extend_from_slice(f1);
                    f.extend_from_slice(&fw);
                    let mut e = Vec::with_capacity(ew.len() + e2.len());
                    e.extend_from_slice(&ew);
                    e.extend_from_slice(e2);
                    let g = g1.mul(&gx).mul(&g2);
                    raw.push(((f, g.exponents().to_vec(), e), coeff));
                }
            }
        }
        let mut out = AlgebraElement::zero();
        for ((f, ge, e), c) in raw {
            let flat = self.reduce(&HalfElement::word(Side::Lower, f, c))?;
            for (fw, cf) in flat.terms() {
                let elat = self.reduce(&HalfElement::word(Side::Upper, e.clone(), cf.clone()))?;
                for (ew, ce) in elat.terms() {
                    out.insert_add((fw.clone(), ge.clone(), ew.clone()), ce.clone());
                }
            }
        }
        Ok(out)
    }

    /// Rewrite (raising word) · (lowering word) as a sum of triangular
    /// terms, without final ideal reduction.
    fn cross(&self, eword: &[u8], fword: &[u8]) -> Vec<(Vec<u8>, GroupElement, Vec<u8>, Scalar)> {
        let identity = self.datum.group().identity();
        let mut acc: Vec<(Vec<u8>, GroupElement, Vec<u8>, Scalar)> =
            vec![(fword.to_vec(), identity, Vec::new(), self.one_scalar())];
        for &i in eword.iter().rev() {
            let mut next = Vec::new();
            for (fw, g, ew, c) in acc {
                for (fw2, gx, ew2, c2) in self.cross_one(i as usize, &fw) {
                    let pass = self.word_char_value(&ew2, &g).inv().to_scalar();
                    let mut ew_full = ew2.clone();
                    ew_full.extend_from_slice(&ew);
                    next.push((fw2, gx.mul(&g), ew_full, c.mul(&c2).mul(&pass)));
                }
            }
            acc = next;
        }
        acc
    }

    /// One raising generator through one free lowering word.
    fn cross_one(&self, i: usize, fword: &[u8]) -> Vec<(Vec<u8>, GroupElement, Vec<u8>, Scalar)> {
        if fword.is_empty() {
            return vec![(
                Vec::new(),
                self.datum.group().identity(),
                vec![i as u8],
                self.one_scalar(),
            )];
        }
        let j = fword[0] as usize;
        let rest = &fword[1..];
        let mut out = Vec::new();
        for (fw, g, ew, c) in self.cross_one(i, rest) {
            let mut f = Vec::with_capacity(fw.len() + 1);
            f.push(j as u8);
            f.extend_from_slice(&fw);
            out.push((f, g, ew, c));
        }
        if i == j {
            let ell = self.datum.ell(i).clone();
            let k_i = self.datum.k(i).clone();
            let l_inv = self.datum.l(i).inv();
            let k_pass = self.word_char_value(rest, &k_i).inv().to_scalar();
            out.push((rest.to_vec(), k_i, Vec::new(), ell.mul(&k_pass)));
            let l_pass = self.word_char_value(rest, &l_inv).inv().to_scalar();
            out.push((rest.to_vec(), l_inv, Vec::new(), ell.mul(&l_pass).neg()));
        }
        out
    }

    // -- skew derivations ------------------------------------------------------

    /// Apply one of the four skew derivations for generator index i. The
    /// result is a free-word combination of degree lowered by α_i; reduce it
    /// explicitly when canonical words are needed.
    pub fn skew_derivation(
        &self,
        map: SkewMap,
        i: usize,
        x: &HalfElement,
    ) -> Result<HalfElement, EngineError> {
        if x.side() != map.side() {
            return Err(EngineError::WrongSide { expected: map.side(), got: x.side() });
        }
        let mut out = HalfElement::zero(x.side());
        for (w, c) in x.terms() {
            let image = self.skew_word(map, i, w);
            for (v, s) in image.terms() {
                out.insert_add(v.clone(), c.mul(s));
            }
        }
        Ok(out)
    }

    fn skew_word(&self, map: SkewMap, i: usize, word: &[u8]) -> HalfElement {
        let side = map.side();
        if word.is_empty() {
            return HalfElement::zero(side);
        }
        match map {
            SkewMap::R => {
                let k = word[word.len() - 1] as usize;
                let head = &word[..word.len() - 1];
                let mut out = HalfElement::zero(side);
                if k == i {
                    out.insert_add(head.to_vec(), self.one_scalar());
                }
                let q = self.datum.q(i, k).to_scalar();
                for (w, c) in self.skew_word(map, i, head).terms() {
                    let mut v = w.clone();
                    v.push(k as u8);
                    out.insert_add(v, c.mul(&q));
                }
                out
            }
            SkewMap::RPrime => {
                let k = word[0] as usize;
                let tail = &word[1..];
                let mut out = HalfElement::zero(side);
                if k == i {
                    out.insert_add(tail.to_vec(), self.one_scalar());
                }
                let q = self.datum.q(k, i).to_scalar();
                for (w, c) in self.skew_word(map, i, tail).terms() {
                    let mut v = Vec::with_capacity(w.len() + 1);
                    v.push(k as u8);
                    v.extend_from_slice(w);
                    out.insert_add(v, c.mul(&q));
                }
                out
            }
            SkewMap::S => {
                let k = word[0] as usize;
                let tail = &word[1..];
                let mut out = HalfElement::zero(side);
                if k == i {
                    out.insert_add(tail.to_vec(), self.one_scalar());
                }
                let q = self.datum.q(i, k).to_scalar();
                for (w, c) in self.skew_word(map, i, tail).terms() {
                    let mut v = Vec::with_capacity(w.len() + 1);
                    v.push(k as u8);
                    v.extend_from_slice(w);
                    out.insert_add(v, c.mul(&q));
                }
                out
            }
            SkewMap::SPrime => {
                let k = word[word.len() - 1] as usize;
                let head = &word[..word.len() - 1];
                let mut out = HalfElement::zero(side);
                if k == i {
                    out.insert_add(head.to_vec(), self.one_scalar());
                }
                let q = self.datum.q(k, i).to_scalar();
                for (w, c) in self.skew_word(map, i, head).terms() {
                    let mut v = w.clone();
                    v.push(k as u8);
                    out.insert_add(v, c.mul(&q));
                }
                out
            }
        }
    }

    // -- pairing -----------------------------------------------------------------

    /// The bilinear pairing of a lowering element against a raising element,
    /// by peeling the last lowering letter. Mixed degrees pair to zero.
    pub fn pairing(&self, x: &HalfElement, y: &HalfElement) -> Result<Scalar, EngineError> {
        if x.side() != Side::Lower {
            return Err(EngineError::WrongSide { expected: Side::Lower, got: x.side() });
        }
        if y.side() != Side::Upper {
            return Err(EngineError::WrongSide { expected: Side::Upper, got: y.side() });
        }
        let mut total = Scalar::zero(self.space());
        for (xw, cx) in x.terms() {
            for (yw, cy) in y.terms() {
                let p = self.pair_words(xw, yw);
                if !p.is_zero() {
                    total = total.add(&cx.mul(cy).mul(&p));
                }
            }
        }
        Ok(total)
    }

    fn pair_words(&self, x: &[u8], y: &[u8]) -> Scalar {
        let theta = self.theta();
        if word_degree(theta, x) != word_degree(theta, y) {
            return Scalar::zero(self.space());
        }
        if x.is_empty() {
            return self.one_scalar();
        }
        let key = (x.to_vec(), y.to_vec());
        if let Some(hit) = self.caches.read().expect("cache lock").pair.get(&key) {
            return hit.clone();
        }
        let i = x[x.len() - 1] as usize;
        let head = &x[..x.len() - 1];
        let peeled = self.skew_word(SkewMap::R, i, y);
        let mut acc = Scalar::zero(self.space());
        for (w, c) in peeled.terms() {
            let p = self.pair_words(head, w);
            if !p.is_zero() {
                acc = acc.add(&c.mul(&p));
            }
        }
        let value = acc.mul(&self.datum.ell(i).neg());
        self.caches.write().expect("cache lock").pair.insert(key, value.clone());
        value
    }

    /// The same pairing computed by peeling the first raising letter; kept
    /// as an independent route for cross-checks.
    pub fn pairing_by_upper_peel(
        &self,
        x: &HalfElement,
        y: &HalfElement,
    ) -> Result<Scalar, EngineError> {
        if x.side() != Side::Lower {
            return Err(EngineError::WrongSide { expected: Side::Lower, got: x.side() });
        }
        if y.side() != Side::Upper {
            return Err(EngineError::WrongSide { expected: Side::Upper, got: y.side() });
        }
        let mut total = Scalar::zero(self.space());
        for (xw, cx) in x.terms() {
            for (yw, cy) in y.terms() {
                let p = self.pair_words_by_s(xw, yw);
                if !p.is_zero() {
                    total = total.add(&cx.mul(cy).mul(&p));
                }
            }
        }
        Ok(total)
    }

    fn pair_words_by_s(&self, x: &[u8], y: &[u8]) -> Scalar {
        let theta = self.theta();
        if word_degree(theta, x) != word_degree(theta, y) {
            return Scalar::zero(self.space());
        }
        if y.is_empty() {
            return self.one_scalar();
        }
        let i = y[0] as usize;
        let tail = &y[1..];
        let peeled = self.skew_word(SkewMap::S, i, x);
        let mut acc = Scalar::zero(self.space());
        for (w, c) in peeled.terms() {
            let p = self.pair_words_by_s(w, tail);
            if !p.is_zero() {
                acc = acc.add(&c.mul(&p));
            }
        }
        acc.mul(&self.datum.ell(i).neg())
    }

    /// Gram matrix of the pairing in one degree: rows over the canonical
    /// lowering words, columns over the canonical raising words.
    pub fn gram(&self, degree: &DegreeVector) -> Result<Matrix, EngineError> {
        let lower = self.graded_basis(Side::Lower, degree)?;
        let upper = self.graded_basis(Side::Upper, degree)?;
        let mut m = Matrix::zero(self.space(), lower.dim(), upper.dim());
        for (r, xw) in lower.words().iter().enumerate() {
            for (c, yw) in upper.words().iter().enumerate() {
                *m.at_mut(r, c) = self.pair_words(xw, yw);
            }
        }
        Ok(m)
    }

    /// Dual bases in one degree: the canonical lowering words x_k paired
    /// with raising combinations y_k so that (x_k, y_l) = δ_kl.
    pub fn dual_bases(
        &self,
        degree: &DegreeVector,
    ) -> Result<(Vec<HalfElement>, Vec<HalfElement>), EngineError> {
        let lower = self.graded_basis(Side::Lower, degree)?;
        let upper = self.graded_basis(Side::Upper, degree)?;
        let g = self.gram(degree)?;
        if lower.dim() != upper.dim() {
            return Err(EngineError::SingularGram { degree: format!("{:?}", degree.coords()) });
        }
        let inv = g.inverse().map_err(|_| EngineError::SingularGram {
            degree: format!("{:?}", degree.coords()),
        })?;
        let xs: Vec<HalfElement> = lower
            .words()
            .iter()
            .map(|w| HalfElement::word(Side::Lower, w.clone(), self.one_scalar()))
            .collect();
        let mut ys = Vec::with_capacity(upper.dim());
        for l in 0..upper.dim() {
            let mut y = HalfElement::zero(Side::Upper);
            for (b, w) in upper.words().iter().enumerate() {
                y.insert_add(w.clone(), inv.at(b, l).clone());
            }
            ys.push(y);
        }
        Ok((xs, ys))
    }

    /// The canonical tensor Σ_k x_k ⊗ y_k of one degree, as algebra-element
    /// pairs. Degrees outside the nonnegative cone give the empty sum.
    pub fn theta_tensor(
        &self,
        degree: &DegreeVector,
    ) -> Result<Vec<(AlgebraElement, AlgebraElement)>, EngineError> {
        if !degree.is_nonnegative() {
            return Ok(Vec::new());
        }
        let (xs, ys) = self.dual_bases(degree)?;
        Ok(xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (self.from_half(x), self.from_half(y)))
            .collect())
    }

    // -- antipode -----------------------------------------------------------------

    /// Antipode of a lowering element: the antihomomorphic extension of
    /// F_i ↦ −F_iL_i, returned in triangular normal form.
    pub fn antipode_lower(&self, x: &HalfElement) -> Result<AlgebraElement, EngineError> {
        if x.side() != Side::Lower {
            return Err(EngineError::WrongSide { expected: Side::Lower, got: x.side() });
        }
        let mut out = AlgebraElement::zero();
        for (w, c) in x.terms() {
            let mut coeff = c.clone();
            if w.len() % 2 == 1 {
                coeff = coeff.neg();
            }
            let mut g = self.datum.group().identity();
            let mut rev = Vec::with_capacity(w.len());
            for &j in w.iter().rev() {
                let pass = self.datum.character(j as usize).evaluate(&g).inv().to_scalar();
                coeff = coeff.mul(&pass);
                rev.push(j);
                g = g.mul(self.datum.l(j as usize));
            }
            let flat = self.reduce(&HalfElement::word(Side::Lower, rev, coeff))?;
            for (fw, cf) in flat.terms() {
                out.insert_add((fw.clone(), g.exponents().to_vec(), Vec::new()), cf.clone());
            }
        }
        Ok(out)
    }

    // -- tensor square helpers ------------------------------------------------------

    /// The simple tensor a ⊗ b expanded over triangular term pairs.
    pub fn tensor_of(&self, a: &AlgebraElement, b: &AlgebraElement) -> TensorSquare {
        let mut t = TensorSquare::zero();
        for (ka, ca) in a.terms() {
            for (kb, cb) in b.terms() {
                t.insert_add((ka.clone(), kb.clone()), ca.mul(cb));
            }
        }
        t
    }

    fn singleton(&self, key: &TriKey) -> AlgebraElement {
        let mut a = AlgebraElement::zero();
        a.insert_add(key.clone(), self.one_scalar());
        a
    }

    /// Componentwise product in the tensor square.
    pub fn tensor_mul(
        &self,
        a: &TensorSquare,
        b: &TensorSquare,
    ) -> Result<TensorSquare, EngineError> {
        let mut out = TensorSquare::zero();
        for ((a1, a2), ca) in a.terms.iter() {
            for ((b1, b2), cb) in b.terms.iter() {
                let left = self.multiply(&self.singleton(a1), &self.singleton(b1))?;
                let right = self.multiply(&self.singleton(a2), &self.singleton(b2))?;
                let c = ca.mul(cb);
                for (k1, c1) in left.terms() {
                    for (k2, c2) in right.terms() {
                        out.insert_add((k1.clone(), k2.clone()), c.mul(c1).mul(c2));
                    }
                }
            }
        }
        Ok(out)
    }

    fn theta_tensor_square(&self, degree: &DegreeVector) -> Result<TensorSquare, EngineError> {
        let mut t = TensorSquare::zero();
        for (x, y) in self.theta_tensor(degree)? {
            t = t.add(&self.tensor_of(&x, &y));
        }
        Ok(t)
    }

    // -- formatting -----------------------------------------------------------------

    pub fn format_half(&self, h: &HalfElement) -> String {
        if h.is_zero() {
            return "0".to_string();
        }
        let letter = h.side().letter();
        let mut parts = Vec::new();
        for (w, c) in h.terms() {
            let word = if w.is_empty() {
                "1".to_string()
            } else {
                w.iter().map(|&l| format!("{}{}", letter, l + 1)).collect::<Vec<_>>().join(" ")
            };
            parts.push(format!("({}) {}", c, word));
        }
        parts.join(" + ")
    }

    pub fn format_element(&self, a: &AlgebraElement) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for ((f, g, e), c) in a.terms() {
            let mut factors = Vec::new();
            if !f.is_empty() {
                factors
                    .push(f.iter().map(|&l| format!("F{}", l + 1)).collect::<Vec<_>>().join(" "));
            }
            if g.iter().any(|&x| x != 0) {
                factors.push(format!(
                    "g({})",
                    g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                ));
            }
            if !e.is_empty() {
                factors
                    .push(e.iter().map(|&l| format!("E{}", l + 1)).collect::<Vec<_>>().join(" "));
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            parts.push(format!("({}) {}", c, factors.join(" ")));
        }
        parts.join(" + ")
    }
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

impl Engine {
    /// (F_i, E_j) = −δ_ij ℓ_i.
    pub fn check_pairing_diagonal(&self) -> Result<CheckReport, EngineError> {
        let name = "pairing-diagonal";
        for i in 0..self.theta() {
            for j in 0..self.theta() {
                let x = HalfElement::word(Side::Lower, vec![i as u8], self.one_scalar());
                let y = HalfElement::word(Side::Upper, vec![j as u8], self.one_scalar());
                let got = self.pairing(&x, &y)?;
                let want = if i == j {
                    self.datum.ell(i).neg()
                } else {
                    Scalar::zero(self.space())
                };
                if got != want {
                    return Ok(CheckReport::fail(
                        name,
                        format!("(F{}, E{}) = {}, expected {}", i + 1, j + 1, got, want),
                    ));
                }
            }
        }
        Ok(CheckReport::ok(name, format!("{} generator pairs", self.theta() * self.theta())))
    }

    /// Serre generators reduce to zero in their own degree, and the lowering
    /// generators pair to zero against every free raising word.
    pub fn check_serre_reduction(&self) -> Result<CheckReport, EngineError> {
        let name = "serre-reduction";
        let mut pairs_checked = 0usize;
        for side in [Side::Lower, Side::Upper] {
            for gen in self.serre_generators(side) {
                let reduced = self.reduce(&gen.element)?;
                if !reduced.is_zero() {
                    return Ok(CheckReport::fail(
                        name,
                        format!(
                            "{} Serre generator ({}, {}) survives reduction: {}",
                            side,
                            gen.i + 1,
                            gen.j + 1,
                            self.format_half(&reduced)
                        ),
                    ));
                }
                if side == Side::Lower {
                    for yw in words_of_degree(self.theta(), &gen.degree) {
                        let y = HalfElement::word(Side::Upper, yw, self.one_scalar());
                        if !self.pairing(&gen.element, &y)?.is_zero() {
                            return Ok(CheckReport::fail(
                                name,
                                format!(
                                    "lowering Serre generator ({}, {}) does not pair to zero",
                                    gen.i + 1,
                                    gen.j + 1
                                ),
                            ));
                        }
                        pairs_checked += 1;
                    }
                }
            }
        }
        Ok(CheckReport::ok(name, format!("all generators, {} radical pairings", pairs_checked)))
    }

    /// Associativity of multiply on seeded random triples.
    pub fn check_associativity(&self, seed: u64, samples: usize) -> Result<CheckReport, EngineError> {
        let name = "associativity";
        let mut rng = StdRng::seed_from_u64(seed);
        for trial in 0..samples {
            let a = self.random_element(&mut rng);
            let b = self.random_element(&mut rng);
            let c = self.random_element(&mut rng);
            let left = self.multiply(&self.multiply(&a, &b)?, &c)?;
            let right = self.multiply(&a, &self.multiply(&b, &c)?)?;
            if left != right {
                return Ok(CheckReport::fail(name, format!("trial {} differs", trial)));
            }
        }
        Ok(CheckReport::ok(name, format!("{} random triples", samples)))
    }

    fn random_element(&self, rng: &mut StdRng) -> AlgebraElement {
        let theta = self.theta();
        let rank = self.datum.group().rank();
        let mut a = AlgebraElement::zero();
        let terms = rng.gen_range(1..=2);
        for _ in 0..terms {
            let flen = rng.gen_range(0..=1);
            let elen = rng.gen_range(0..=1);
            let f: Vec<u8> = (0..flen).map(|_| rng.gen_range(0..theta) as u8).collect();
            let e: Vec<u8> = (0..elen).map(|_| rng.gen_range(0..theta) as u8).collect();
            let g: Vec<i64> = (0..rank).map(|_| rng.gen_range(-1..=1)).collect();
            let c = Scalar::from_int(self.space(), rng.gen_range(1..=3));
            a.insert_add((f, g, e), c);
        }
        a
    }

    /// The two commutation rules between a canonical word of one half and a
    /// generator of the other, against the skew-derivation right sides, for
    /// every canonical word of total degree up to the cap.
    pub fn check_commutation_rules(&self, upto_total: usize) -> Result<CheckReport, EngineError> {
        let name = "commutation-rules";
        let mut checked = 0usize;
        for (deg, _) in self.dimension_table(Side::Upper, upto_total)? {
            let upper = self.graded_basis(Side::Upper, &deg)?;
            for yw in upper.words() {
                let y = HalfElement::word(Side::Upper, yw.clone(), self.one_scalar());
                let ye = self.from_half(&y);
                for i in 0..self.theta() {
                    let ell = self.datum.ell(i);
                    let fi = self.gen_f(i);
                    let lhs = self.multiply(&ye, &fi)?.sub(&self.multiply(&fi, &ye)?);
                    let r_y = self.skew_derivation(SkewMap::R, i, &y)?;
                    let rp_y = self.skew_derivation(SkewMap::RPrime, i, &y)?;
                    let ki = self.group_element(self.datum.k(i));
                    let li_inv = self.group_element(&self.datum.l(i).inv());
                    let rhs = self
                        .multiply(&self.from_half(&r_y), &ki)?
                        .sub(&self.multiply(&li_inv, &self.from_half(&rp_y))?)
                        .scale(ell);
                    if lhs != rhs {
                        return Ok(CheckReport::fail(
                            name,
                            format!(
                                "lowering rule fails for word {:?}, generator {}",
                                yw,
                                i + 1
                            ),
                        ));
                    }
                    checked += 1;
                }
            }
        }
        for (deg, _) in self.dimension_table(Side::Lower, upto_total)? {
            let lower = self.graded_basis(Side::Lower, &deg)?;
            for xw in lower.words() {
                let x = HalfElement::word(Side::Lower, xw.clone(), self.one_scalar());
                let xe = self.from_half(&x);
                for i in 0..self.theta() {
                    let ell = self.datum.ell(i);
                    let ei = self.gen_e(i);
                    let lhs = self.multiply(&ei, &xe)?.sub(&self.multiply(&xe, &ei)?);
                    let s_x = self.skew_derivation(SkewMap::S, i, &x)?;
                    let sp_x = self.skew_derivation(SkewMap::SPrime, i, &x)?;
                    let ki = self.group_element(self.datum.k(i));
                    let li_inv = self.group_element(&self.datum.l(i).inv());
                    let rhs = self
                        .multiply(&ki, &self.from_half(&s_x))?
                        .sub(&self.multiply(&self.from_half(&sp_x), &li_inv)?)
                        .scale(ell);
                    if lhs != rhs {
                        return Ok(CheckReport::fail(
                            name,
                            format!(
                                "raising rule fails for word {:?}, generator {}",
                                xw,
                                i + 1
                            ),
                        ));
                    }
                    checked += 1;
                }
            }
        }
        Ok(CheckReport::ok(name, format!("{} word/generator pairs", checked)))
    }

    /// Agreement of the two pairing recursions on seeded random homogeneous
    /// pairs up to the given total degree.
    pub fn check_pairing_routes(
        &self,
        seed: u64,
        samples: usize,
        upto_total: usize,
    ) -> Result<CheckReport, EngineError> {
        let name = "pairing-routes";
        let mut rng = StdRng::seed_from_u64(seed);
        let theta = self.theta();
        for trial in 0..samples {
            let total = rng.gen_range(1..=upto_total.max(1));
            let word: Vec<u8> = (0..total).map(|_| rng.gen_range(0..theta) as u8).collect();
            let deg = word_degree(theta, &word);
            let pool = words_of_degree(theta, &deg);
            let mut x = HalfElement::zero(Side::Lower);
            let mut y = HalfElement::zero(Side::Upper);
            for _ in 0..2 {
                let xw = pool[rng.gen_range(0..pool.len())].clone();
                let yw = pool[rng.gen_range(0..pool.len())].clone();
                x.insert_add(xw, Scalar::from_int(self.space(), rng.gen_range(1..=3)));
                y.insert_add(yw, Scalar::from_int(self.space(), rng.gen_range(1..=3)));
            }
            let by_r = self.pairing(&x, &y)?;
            let by_s = self.pairing_by_upper_peel(&x, &y)?;
            if by_r != by_s {
                return Ok(CheckReport::fail(
                    name,
                    format!("trial {} (degree {:?}) disagrees", trial, deg.coords()),
                ));
            }
        }
        Ok(CheckReport::ok(name, format!("{} random pairs", samples)))
    }

    /// The closed-form commutators of a raising generator with powers of the
    /// matching lowering generator, and the mirror identity, up to n.
    pub fn check_power_commutators(&self, nmax: usize) -> Result<CheckReport, EngineError> {
        let name = "power-commutators";
        for i in 0..self.theta() {
            let ell = self.datum.ell(i);
            let qii = self.datum.q(i, i).to_scalar();
            let ei = self.gen_e(i);
            let fi = self.gen_f(i);
            let ki = self.group_element(self.datum.k(i));
            let li_inv = self.group_element(&self.datum.l(i).inv());
            for n in 1..=nmax {
                // (q_ii^n − 1)/(q_ii − 1)
                let num = qii.pow(n as i64)?.sub(&self.one_scalar());
                let den = qii.sub(&self.one_scalar());
                let bracket = num.div(&den)?;
                let mut f_pow = self.one();
                for _ in 0..n {
                    f_pow = self.multiply(&f_pow, &fi)?;
                }
                let mut f_pow_1 = self.one();
                for _ in 0..n - 1 {
                    f_pow_1 = self.multiply(&f_pow_1, &fi)?;
                }
                let lhs = self.multiply(&ei, &f_pow)?;
                let shift = qii.pow(-(n as i64) + 1)?;
                let klpart = ki.sub(&li_inv.scale(&shift));
                let rhs = self
                    .multiply(&f_pow, &ei)?
                    .add(&self.multiply(&klpart, &f_pow_1)?.scale(&ell.mul(&bracket)));
                if lhs != rhs {
                    return Ok(CheckReport::fail(
                        name,
                        format!("lowering power rule fails at i={}, n={}", i + 1, n),
                    ));
                }
                let mut e_pow = self.one();
                for _ in 0..n {
                    e_pow = self.multiply(&e_pow, &ei)?;
                }
                let mut e_pow_1 = self.one();
                for _ in 0..n - 1 {
                    e_pow_1 = self.multiply(&e_pow_1, &ei)?;
                }
                let lhs2 = self.multiply(&fi, &e_pow)?;
                let klpart2 = li_inv.sub(&ki.scale(&shift));
                let rhs2 = self
                    .multiply(&e_pow, &fi)?
                    .add(&self.multiply(&klpart2, &e_pow_1)?.scale(&ell.mul(&bracket)));
                if lhs2 != rhs2 {
                    return Ok(CheckReport::fail(
                        name,
                        format!("raising power rule fails at i={}, n={}", i + 1, n),
                    ));
                }
            }
        }
        Ok(CheckReport::ok(name, format!("n up to {} for every generator", nmax)))
    }

    /// Powers of one generator against a neighbor collapse into the expected
    /// span: F_i^n F_j lies in the span of F_i^s F_j F_i^{n−s} for
    /// 0 ≤ s ≤ −a_ij once n ≥ 1 − a_ij, and mirrored for the raising side.
    pub fn check_power_span(&self, nmax: usize) -> Result<CheckReport, EngineError> {
        let name = "power-span";
        let theta = self.theta();
        let mut checked = 0usize;
        for side in [Side::Lower, Side::Upper] {
            for i in 0..theta {
                for j in 0..theta {
                    if i == j {
                        continue;
                    }
                    let amax = (-self.cartan.a[i][j]) as usize;
                    for n in (amax + 1)..=nmax {
                        if n + 1 > self.max_degree {
                            break;
                        }
                        let mut word = vec![i as u8; n];
                        word.push(j as u8);
                        let target =
                            self.reduce(&HalfElement::word(side, word, self.one_scalar()))?;
                        let deg = {
                            let mut c = vec![0i64; theta];
                            c[i] = n as i64;
                            c[j] = 1;
                            DegreeVector::new(c)
                        };
                        let basis = self.graded_basis(side, &deg)?;
                        let mut rows: Vec<Vec<Scalar>> = Vec::new();
                        for s in 0..=amax {
                            let mut w = vec![i as u8; s];
                            w.push(j as u8);
                            w.extend(std::iter::repeat(i as u8).take(n - s));
                            let red =
                                self.reduce(&HalfElement::word(side, w, self.one_scalar()))?;
                            rows.push(half_coords(&red, &basis));
                        }
                        let span_rank = Matrix::from_rows(rows.clone()).rank();
                        rows.push(half_coords(&target, &basis));
                        let full_rank = Matrix::from_rows(rows).rank();
                        if full_rank > span_rank {
                            return Ok(CheckReport::fail(
                                name,
                                format!(
                                    "{} power span fails at i={}, j={}, n={}",
                                    side,
                                    i + 1,
                                    j + 1,
                                    n
                                ),
                            ));
                        }
                        checked += 1;
                    }
                }
            }
        }
        Ok(CheckReport::ok(name, format!("{} membership instances", checked)))
    }

    /// Nondegeneracy of the pairing in every degree up to the given total.
    pub fn check_gram_nondegenerate(&self, upto_total: usize) -> Result<CheckReport, EngineError> {
        let name = "gram-nondegenerate";
        let mut checked = 0usize;
        for (deg, dim_lower) in self.dimension_table(Side::Lower, upto_total)? {
            let dim_upper = self.dim(Side::Upper, &deg)?;
            if dim_lower != dim_upper {
                return Ok(CheckReport::fail(
                    name,
                    format!(
                        "halves disagree in degree {:?}: {} vs {}",
                        deg.coords(),
                        dim_lower,
                        dim_upper
                    ),
                ));
            }
            let det = self.gram(&deg)?.determinant();
            if det.is_zero() {
                return Ok(CheckReport::fail(
                    name,
                    format!("Gram matrix singular in degree {:?}", deg.coords()),
                ));
            }
            checked += 1;
        }
        Ok(CheckReport::ok(name, format!("{} degrees", checked)))
    }

    /// The two tensor-square commutation identities of the canonical
    /// tensors, for every degree of total up to the cap and every generator.
    pub fn check_theta_commutation(&self, upto_total: usize) -> Result<CheckReport, EngineError> {
        let name = "theta-commutation";
        let theta = self.theta();
        let mut checked = 0usize;
        let limit = DegreeVector::new(vec![upto_total as i64; theta]);
        let mut degs: Vec<DegreeVector> = degree_box(&limit)
            .into_iter()
            .filter(|d| d.total() > 0 && d.total() as usize <= upto_total)
            .collect();
        degs.sort_by_key(|d| (d.total(), d.clone()));
        for deg in degs {
            let t_full = self.theta_tensor_square(&deg)?;
            for i in 0..theta {
                let shifted = &deg - &DegreeVector::simple(theta, i);
                let t_shift = if shifted.is_nonnegative() {
                    self.theta_tensor_square(&shifted)?
                } else {
                    TensorSquare::zero()
                };
                let ei = self.gen_e(i);
                let fi = self.gen_f(i);
                let one = self.one();
                let ki = self.group_element(self.datum.k(i));
                let li_inv = self.group_element(&self.datum.l(i).inv());

                let lhs1 = self
                    .tensor_mul(&self.tensor_of(&ei, &one), &t_full)?
                    .add(&self.tensor_mul(&self.tensor_of(&ki, &ei), &t_shift)?);
                let rhs1 = self
                    .tensor_mul(&t_full, &self.tensor_of(&ei, &one))?
                    .add(&self.tensor_mul(&t_shift, &self.tensor_of(&li_inv, &ei))?);
                if lhs1.sub(&rhs1) != TensorSquare::zero() {
                    return Ok(CheckReport::fail(
                        name,
                        format!(
                            "raising identity fails in degree {:?}, generator {}",
                            deg.coords(),
                            i + 1
                        ),
                    ));
                }

                let lhs2 = self
                    .tensor_mul(&self.tensor_of(&one, &fi), &t_full)?
                    .add(&self.tensor_mul(&self.tensor_of(&fi, &li_inv), &t_shift)?);
                let rhs2 = self
                    .tensor_mul(&t_full, &self.tensor_of(&one, &fi))?
                    .add(&self.tensor_mul(&t_shift, &self.tensor_of(&fi, &ki))?);
                if lhs2.sub(&rhs2) != TensorSquare::zero() {
                    return Ok(CheckReport::fail(
                        name,
                        format!(
                            "lowering identity fails in degree {:?}, generator {}",
                            deg.coords(),
                            i + 1
                        ),
                    ));
                }
                checked += 1;
            }
        }
        Ok(CheckReport::ok(name, format!("{} degree/generator pairs", checked)))
    }

    /// The full rank-one expansion E^r F^s = Σ_i F^{s−i} h_i(r,s) E^{r−i}
    /// with q-binomial coefficients, on data whose single braiding entry is
    /// a perfect square. Returns None when the datum has the wrong shape.
    pub fn check_rank_one_expansion(
        &self,
        rmax: usize,
        smax: usize,
    ) -> Result<Option<CheckReport>, EngineError> {
        let name = "rank-one-expansion";
        if self.theta() != 1 {
            return Ok(None);
        }
        let q2 = self.datum.q(0, 0);
        if q2.is_negative() || q2.exponents().iter().any(|e| e % 2 != 0) {
            return Ok(None);
        }
        let q = UnitScalar::new(
            self.space(),
            false,
            q2.exponents().iter().map(|e| e / 2).collect(),
        );
        let qs = q.to_scalar();
        let qinv = q.inv().to_scalar();
        let denom = qs.sub(&qinv);
        let sym_num = |a: i64| -> Result<Scalar, EngineError> {
            Ok(qs.pow(a)?.sub(&qs.pow(-a)?).div(&denom)?)
        };
        let sym_fact = |n: i64| -> Result<Scalar, EngineError> {
            let mut acc = self.one_scalar();
            for t in 1..=n {
                acc = acc.mul(&sym_num(t)?);
            }
            Ok(acc)
        };
        let sym_binom = |a: i64, t: i64| -> Result<Scalar, EngineError> {
            let mut num = self.one_scalar();
            for s in 0..t {
                num = num.mul(&sym_num(a - s)?);
            }
            num.div(&sym_fact(t)?).map_err(EngineError::from)
        };
        let ell = self.datum.ell(0).clone();
        let prefactor = ell.mul(&denom);
        let ki = self.group_element(self.datum.k(0));
        let li_inv = self.group_element(&self.datum.l(0).inv());
        let kl_bracket = |a: i64| -> Result<AlgebraElement, EngineError> {
            let t = ki.scale(&qs.pow(a)?).sub(&li_inv.scale(&qs.pow(-a)?));
            Ok(t.scale(&denom.inv()?))
        };
        let ei = self.gen_e(0);
        let fi = self.gen_f(0);
        let mut powers_e = vec![self.one()];
        for r in 1..=rmax {
            let prev = powers_e[r - 1].clone();
            powers_e.push(self.multiply(&prev, &ei)?);
        }
        let mut powers_f = vec![self.one()];
        for s in 1..=smax {
            let prev = powers_f[s - 1].clone();
            powers_f.push(self.multiply(&prev, &fi)?);
        }
        for r in 1..=rmax {
            for s in 1..=smax {
                let lhs = self.multiply(&powers_e[r], &powers_f[s])?;
                let mut rhs = AlgebraElement::zero();
                for i in 0..=r.min(s) {
                    let ii = i as i64;
                    let mut h = prefactor.pow(ii)?;
                    h = h.mul(&sym_binom(r as i64, ii)?);
                    h = h.mul(&sym_binom(s as i64, ii)?);
                    h = h.mul(&sym_fact(ii)?);
                    let mut middle = self.one().scale(&h);
                    for j in 1..=ii {
                        let arg = ii - (r as i64 + s as i64) + j;
                        middle = self.multiply(&middle, &kl_bracket(arg)?)?;
                    }
                    let term = self.multiply(&powers_f[s - i], &self.multiply(&middle, &powers_e[r - i])?)?;
                    rhs = rhs.add(&term);
                }
                if lhs != rhs {
                    return Ok(Some(CheckReport::fail(
                        name,
                        format!("expansion fails at r={}, s={}", r, s),
                    )));
                }
            }
        }
        Ok(Some(CheckReport::ok(name, format!("r ≤ {}, s ≤ {}", rmax, smax))))
    }

    /// The standard battery at CLI-friendly sizes.
    pub fn check_all(&self, seed: u64) -> Result<Vec<CheckReport>, EngineError> {
        let mut reports = vec![
            self.check_pairing_diagonal()?,
            self.check_serre_reduction()?,
            self.check_associativity(seed, 6)?,
            self.check_commutation_rules(3)?,
            self.check_pairing_routes(seed.wrapping_add(1), 40, 3)?,
            self.check_power_commutators(4)?,
            self.check_power_span(4)?,
            self.check_gram_nondegenerate(4)?,
            self.check_theta_commutation(2)?,
        ];
        if let Some(r) = self.check_rank_one_expansion(3, 3)? {
            reports.push(r);
        }
        Ok(reports)
    }
}

/// Coordinates of a reduced half element over the canonical words of one
/// degree slice.
fn half_coords(h: &HalfElement, basis: &BasisData) -> Vec<Scalar> {
    let space = basis
        .expand
        .values()
        .flat_map(|v| v.iter())
        .map(|(_, s)| s.space())
        .next()
        .expect("nonempty basis");
    let mut row = vec![Scalar::zero(space); basis.dim()];
    for (w, c) in h.terms() {
        let idx = basis.words().iter().position(|bw| bw == w).expect("canonical word");
        row[idx] = row[idx].add(c);
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{kostant_partition, RootSystem};
    use crate::presets;
    use num_traits::ToPrimitive;

    fn engine(preset: &str) -> Engine {
        Engine::new(presets::by_name(preset).expect("preset")).expect("engine")
    }

    fn unit_word(e: &Engine, side: Side, word: &[u8]) -> HalfElement {
        HalfElement::word(side, word.to_vec(), Scalar::one(e.space()))
    }

    #[test]
    fn rank_one_dimensions_are_all_one() {
        let e = engine("A1");
        for n in 1..=6 {
            let deg = DegreeVector::new(vec![n]);
            assert_eq!(e.dim(Side::Lower, &deg).unwrap(), 1);
            assert_eq!(e.dim(Side::Upper, &deg).unwrap(), 1);
        }
    }

    #[test]
    fn dimensions_match_partition_counts() {
        for preset in ["A2", "B2", "A2-two-parameter"] {
            let e = engine(preset);
            let rs = RootSystem::from_cartan(&e.cartan().a).expect("finite type");
            for (deg, dim) in e.dimension_table(Side::Lower, 4).unwrap() {
                let expected = kostant_partition(&rs, deg.coords()).to_usize().unwrap();
                assert_eq!(dim, expected, "{} lower degree {:?}", preset, deg.coords());
                assert_eq!(
                    e.dim(Side::Upper, &deg).unwrap(),
                    expected,
                    "{} upper degree {:?}",
                    preset,
                    deg.coords()
                );
            }
        }
    }

    #[test]
    fn serre_generator_matches_qbinomial_expansion() {
        let e = engine("A2");
        let gens = e.serre_generators(Side::Upper);
        let gen = gens.iter().find(|g| g.i == 0 && g.j == 1).unwrap();
        let q11 = e.datum().q(0, 0).to_scalar();
        let q12 = e.datum().q(0, 1).to_scalar();
        let one = Scalar::one(e.space());
        let mut expected = HalfElement::zero(Side::Upper);
        expected.insert_add(vec![0, 0, 1], one.clone());
        expected.insert_add(vec![0, 1, 0], q12.mul(&one.add(&q11)).neg());
        expected.insert_add(vec![1, 0, 0], q11.mul(&q12).mul(&q12));
        assert_eq!(gen.element, expected);
    }

    #[test]
    fn serre_coefficients_all_nonzero() {
        for preset in ["A2", "B2", "A2-two-parameter"] {
            let e = engine(preset);
            for side in [Side::Lower, Side::Upper] {
                for gen in e.serre_generators(side) {
                    let expected_terms = (1 - e.cartan().a[gen.i][gen.j]) as usize + 1;
                    assert_eq!(
                        gen.element.terms().count(),
                        expected_terms,
                        "{} {:?} generator ({}, {})",
                        preset,
                        side,
                        gen.i,
                        gen.j
                    );
                }
            }
        }
    }

    #[test]
    fn cross_relation_and_group_conjugation() {
        let e = engine("A2");
        let ef = e.multiply(&e.gen_e(0), &e.gen_f(0)).unwrap();
        let fe = e.multiply(&e.gen_f(0), &e.gen_e(0)).unwrap();
        let k = e.group_element(e.datum().k(0));
        let linv = e.group_element(&e.datum().l(0).inv());
        let expected = k.sub(&linv).scale(e.datum().ell(0));
        assert_eq!(ef.sub(&fe), expected);

        let mixed = e.multiply(&e.gen_e(0), &e.gen_f(1)).unwrap();
        assert_eq!(mixed, e.multiply(&e.gen_f(1), &e.gen_e(0)).unwrap());

        let g = e.datum().group().element(vec![1, -2]);
        let conj = e
            .multiply(
                &e.multiply(&e.group_element(&g), &e.gen_e(0)).unwrap(),
                &e.group_element(&g.inv()),
            )
            .unwrap();
        let chi = e.datum().character(0).evaluate(&g).to_scalar();
        assert_eq!(conj, e.gen_e(0).scale(&chi));
    }

    #[test]
    fn skew_derivation_examples() {
        let e = engine("A2");
        let one = Scalar::one(e.space());
        let r1_e1 = e
            .skew_derivation(SkewMap::R, 0, &unit_word(&e, Side::Upper, &[0]))
            .unwrap();
        assert_eq!(r1_e1, HalfElement::word(Side::Upper, vec![], one.clone()));
        let r1_e2 = e
            .skew_derivation(SkewMap::R, 0, &unit_word(&e, Side::Upper, &[1]))
            .unwrap();
        assert!(r1_e2.is_zero());
        let r1_e2e1 = e
            .skew_derivation(SkewMap::R, 0, &unit_word(&e, Side::Upper, &[1, 0]))
            .unwrap();
        assert_eq!(r1_e2e1, HalfElement::word(Side::Upper, vec![1], one.clone()));
        let rp1_e1e2 = e
            .skew_derivation(SkewMap::RPrime, 0, &unit_word(&e, Side::Upper, &[0, 1]))
            .unwrap();
        assert_eq!(rp1_e1e2, HalfElement::word(Side::Upper, vec![1], one));
    }

    #[test]
    fn wrong_side_is_rejected() {
        let e = engine("A2");
        let lower = unit_word(&e, Side::Lower, &[0]);
        let upper = unit_word(&e, Side::Upper, &[0]);
        assert!(matches!(
            e.skew_derivation(SkewMap::R, 0, &lower),
            Err(EngineError::WrongSide { .. })
        ));
        assert!(matches!(
            e.skew_derivation(SkewMap::S, 0, &upper),
            Err(EngineError::WrongSide { .. })
        ));
        assert!(matches!(e.pairing(&upper, &upper), Err(EngineError::WrongSide { .. })));
        assert!(matches!(
            e.antipode_lower(&upper),
            Err(EngineError::WrongSide { .. })
        ));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let e = engine("A2").with_max_degree(2);
        let deg = DegreeVector::new(vec![2, 1]);
        assert!(matches!(
            e.graded_basis(Side::Lower, &deg),
            Err(EngineError::DegreeCapExceeded { requested: 3, cap: 2 })
        ));
    }

    #[test]
    fn antipode_on_generators_and_two_letter_words() {
        let e = engine("A2");
        let s_f1 = e.antipode_lower(&unit_word(&e, Side::Lower, &[0])).unwrap();
        let l1 = e.datum().l(0).clone();
        let mut expected = AlgebraElement::zero();
        expected.insert_add(
            (vec![0], l1.exponents().to_vec(), vec![]),
            Scalar::one(e.space()).neg(),
        );
        assert_eq!(s_f1, expected);

        let s_f1f2 = e.antipode_lower(&unit_word(&e, Side::Lower, &[0, 1])).unwrap();
        let l2l1 = e.datum().l(1).mul(e.datum().l(0));
        let coeff = e.datum().character(0).evaluate(e.datum().l(1)).inv().to_scalar();
        let mut expected2 = AlgebraElement::zero();
        expected2.insert_add((vec![1, 0], l2l1.exponents().to_vec(), vec![]), coeff);
        assert_eq!(s_f1f2, expected2);
    }

    #[test]
    fn antipode_is_an_antihomomorphism() {
        let e = engine("B2");
        let x = unit_word(&e, Side::Lower, &[0, 1]);
        let y = unit_word(&e, Side::Lower, &[1, 0, 0]);
        let xy = e.lower_product(&x, &y).unwrap();
        let s_xy = e.antipode_lower(&xy).unwrap();
        let s_y_s_x = e
            .multiply(&e.antipode_lower(&y).unwrap(), &e.antipode_lower(&x).unwrap())
            .unwrap();
        assert_eq!(s_xy, s_y_s_x);
    }

    #[test]
    fn dual_bases_satisfy_kronecker_property() {
        for preset in ["A2", "A2-two-parameter"] {
            let e = engine(preset);
            for coords in [vec![1, 1], vec![2, 1]] {
                let deg = DegreeVector::new(coords);
                let (xs, ys) = e.dual_bases(&deg).unwrap();
                for (k, x) in xs.iter().enumerate() {
                    for (l, y) in ys.iter().enumerate() {
                        let p = e.pairing(x, y).unwrap();
                        if k == l {
                            assert!(p.is_one(), "{} ({}, {})", preset, k, l);
                        } else {
                            assert!(p.is_zero(), "{} ({}, {})", preset, k, l);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_battery_passes_on_a2() {
        let e = engine("A2");
        for report in e.check_all(7).unwrap() {
            assert!(report.passed, "{}: {}", report.name, report.detail);
        }
    }

    #[test]
    fn identity_battery_passes_on_two_parameter_datum() {
        let e = engine("A2-two-parameter");
        for report in e.check_all(11).unwrap() {
            assert!(report.passed, "{}: {}", report.name, report.detail);
        }
    }

    #[test]
    fn b2_commutation_and_gram_checks_pass() {
        let e = engine("B2");
        assert!(e.check_pairing_diagonal().unwrap().passed);
        assert!(e.check_serre_reduction().unwrap().passed);
        assert!(e.check_commutation_rules(3).unwrap().passed);
        assert!(e.check_gram_nondegenerate(4).unwrap().passed);
        assert!(e.check_power_span(4).unwrap().passed);
    }

    #[test]
    fn rank_one_expansion_under_both_normalizations() {
        let normalized = {
            let base = presets::by_name("A1").unwrap();
            let q = Scalar::parameter(base.space(), 0);
            let ell = q.sub(&q.pow(-1).unwrap()).inv().unwrap();
            Engine::new(base.with_ell(vec![ell]).unwrap()).unwrap()
        };
        let report = normalized.check_rank_one_expansion(3, 3).unwrap().expect("applicable");
        assert!(report.passed, "{}", report.detail);

        let default_ell = engine("A1");
        let report = default_ell.check_rank_one_expansion(3, 3).unwrap().expect("applicable");
        assert!(report.passed, "{}", report.detail);

        let e = engine("A2");
        assert!(e.check_rank_one_expansion(2, 2).unwrap().is_none());
    }

    #[test]
    fn presentation_flag_tracks_twist_verification() {
        assert!(!engine("A2").presentation_assumed());
        assert!(!engine("B2").presentation_assumed());
        assert!(engine("A2-two-parameter").presentation_assumed());
    }

    #[test]
    fn warm_fills_caches_for_concurrent_reads() {
        let e = Arc::new(engine("A2"));
        e.warm(3).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let e = Arc::clone(&e);
                std::thread::spawn(move || {
                    let deg = DegreeVector::new(vec![1 + (t % 2) as i64, 1]);
                    e.dim(Side::Lower, &deg).unwrap()
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }

    #[test]
    fn reduce_rewrites_over_lex_smallest_words() {
        let e = engine("A2");
        let deg = DegreeVector::new(vec![2, 1]);
        let basis = e.graded_basis(Side::Upper, &deg).unwrap();
        assert_eq!(basis.words(), &[vec![0, 0, 1], vec![0, 1, 0]]);
        let top = e.reduce(&unit_word(&e, Side::Upper, &[1, 0, 0])).unwrap();
        assert_eq!(top.terms().count(), 2);
        for (w, _) in top.terms() {
            assert!(w.as_slice() < [1, 0, 0].as_slice());
        }
    }
}
