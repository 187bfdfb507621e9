//! Free abelian groups Γ = Z^r, their elements and characters, subgroup
//! indices via Smith normal form, and the integer exponent-lattice solving
//! behind weight comparison.
//!
//! Only free groups are supported: torsion would force genuine roots of
//! unity as character values, which the scalar model deliberately excludes.

use crate::scalars::{ParameterSpace, UnitScalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("characters are not Z-linearly independent")]
    NotRegular,
    #[error("no integer solution: the characters lie in different cosets")]
    NoSolution,
}

/// A finitely generated free abelian group Z^r on generators g₁,…,g_r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbelianGroup {
    rank: usize,
}

impl AbelianGroup {
    pub fn new(rank: usize) -> Self {
        assert!(rank >= 1, "group rank must be at least 1");
        AbelianGroup { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { exps: vec![0; self.rank] }
    }

    /// The i-th generator.
    pub fn generator(&self, i: usize) -> GroupElement {
        assert!(i < self.rank, "generator index out of range");
        let mut exps = vec![0i64; self.rank];
        exps[i] = 1;
        GroupElement { exps }
    }

    pub fn element(&self, exps: Vec<i64>) -> GroupElement {
        assert_eq!(exps.len(), self.rank, "element exponent length mismatch");
        GroupElement { exps }
    }

    /// The trivial character into the given parameter space.
    pub fn trivial_character(&self, space: &Arc<ParameterSpace>) -> Character {
        Character {
            values: vec![UnitScalar::one(space); self.rank],
        }
    }
}

/// Element of Z^r, written multiplicatively.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    exps: Vec<i64>,
}

impl GroupElement {
    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.exps.len(), other.exps.len(), "group rank mismatch");
        GroupElement {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a.checked_add(*b).expect("group exponent overflow"))
                .collect(),
        }
    }

    pub fn inv(&self) -> GroupElement {
        GroupElement {
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> GroupElement {
        GroupElement {
            exps: self
                .exps
                .iter()
                .map(|e| e.checked_mul(k).expect("group exponent overflow"))
                .collect(),
        }
    }
}

/// A character Γ → units of the ground field, stored by its values on the
/// generators (a free group imposes no relations).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    values: Vec<UnitScalar>,
}

impl Character {
    pub fn new(values: Vec<UnitScalar>) -> Character {
        assert!(!values.is_empty(), "character needs at least one value");
        Character { values }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[UnitScalar] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &UnitScalar {
        &self.values[i]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| v.is_one())
    }

    /// χ(g) = ∏ values[k]^{g_k}.
    pub fn evaluate(&self, g: &GroupElement) -> UnitScalar {
        assert_eq!(
            self.values.len(),
            g.exps.len(),
            "character/group rank mismatch"
        );
        let mut acc = UnitScalar::one(self.values[0].space());
        for (v, &e) in self.values.iter().zip(&g.exps) {
            if e != 0 {
                acc = acc.mul(&v.pow(e));
            }
        }
        acc
    }

    pub fn mul(&self, other: &Character) -> Character {
        assert_eq!(self.values.len(), other.values.len(), "rank mismatch");
        Character {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn inv(&self) -> Character {
        Character {
            values: self.values.iter().map(|v| v.inv()).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Character {
        Character {
            values: self.values.iter().map(|v| v.pow(k)).collect(),
        }
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Integer degree vector over the index set {1,…,θ}; the N-span of the
/// simple degrees α_i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeVector {
    coords: Vec<i64>,
}

impl DegreeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        DegreeVector { coords }
    }

    pub fn zero(theta: usize) -> Self {
        DegreeVector { coords: vec![0; theta] }
    }

    /// The i-th simple degree α_i.
    pub fn simple(theta: usize, i: usize) -> Self {
        let mut coords = vec![0i64; theta];
        coords[i] = 1;
        DegreeVector { coords }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Membership in the N-cone (all coordinates nonnegative).
    pub fn is_nonnegative(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0)
    }

    /// Total degree |α| = Σ n_i.
    pub fn total(&self) -> i64 {
        self.coords.iter().sum()
    }
}

impl Add<&DegreeVector> for &DegreeVector {
    type Output = DegreeVector;
    fn add(self, rhs: &DegreeVector) -> DegreeVector {
        assert_eq!(self.coords.len(), rhs.coords.len());
        DegreeVector {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&DegreeVector> for &DegreeVector {
    type Output = DegreeVector;
    fn sub(self, rhs: &DegreeVector) -> DegreeVector {
        assert_eq!(self.coords.len(), rhs.coords.len());
        DegreeVector {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Index of a subgroup of Z^r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgroupIndex {
    Finite(BigInt),
    Infinite,
}

impl fmt::Display for SubgroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupIndex::Finite(n) => write!(f, "{n}"),
            SubgroupIndex::Infinite => write!(f, "infinite"),
        }
    }
}

/// Smith normal form of an integer matrix.
///
/// Returns the elementary divisors d₁ | d₂ | … (nonzero diagonal of the
/// normal form) together with unimodular column operations recorded on a
/// right transform, which is what kernel extraction needs.
pub struct SmithNormalForm {
    /// Nonzero diagonal entries, each dividing the next.
    pub divisors: Vec<BigInt>,
    /// Rank of the matrix.
    pub rank: usize,
    /// Unimodular V with A·V in column echelon form; columns rank.. span the
    /// kernel of A.
    pub right: Vec<Vec<BigInt>>,
    cols: usize,
}

impl SmithNormalForm {
    /// Basis of the integer kernel {x : A·x = 0}.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        (self.rank..self.cols)
            .map(|j| self.right.iter().map(|row| row[j].clone()).collect())
            .collect()
    }
}

/// Computes the Smith normal form of `a` (rows × cols) over Z.
pub fn smith_normal_form(a: &[Vec<i64>], cols: usize) -> SmithNormalForm {
    let rows = a.len();
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .map(|row| {
            assert_eq!(row.len(), cols, "ragged matrix");
            row.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    // Right transform records column operations so the kernel can be read off.
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();

    let mut t = 0usize;
    while t < rows.min(cols) {
        // Find a pivot with minimal absolute value in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() {
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => m[i][j].abs() < m[pi][pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        if pj != t {
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
        }
        // Clear row and column t; restart if a smaller remainder shows up.
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in t + 1..rows {
                if !m[i][t].is_zero() {
                    let q = &m[i][t] / &m[t][t];
                    if !q.is_zero() {
                        for j in t..cols {
                            let sub = &q * &m[t][j];
                            m[i][j] -= sub;
                        }
                    }
                    if !m[i][t].is_zero() {
                        m.swap(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !m[t][j].is_zero() {
                    let q = &m[t][j] / &m[t][t];
                    if !q.is_zero() {
                        for i in 0..rows {
                            let sub = &q * &m[i][t];
                            m[i][j] -= sub;
                        }
                        for i in 0..cols {
                            let sub = &q * &v[i][t];
                            v[i][j] -= sub;
                        }
                    }
                    if !m[t][j].is_zero() {
                        for row in m.iter_mut() {
                            row.swap(t, j);
                        }
                        for row in v.iter_mut() {
                            row.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
        }
        t += 1;
    }

    let rank = t;
    let mut divisors: Vec<BigInt> = (0..rank).map(|i| m[i][i].abs()).collect();
    // Enforce the divisibility chain d₁ | d₂ | …
    for i in 0..divisors.len() {
        for j in i + 1..divisors.len() {
            let a = divisors[i].clone();
            let b = divisors[j].clone();
            let g = num_integer::gcd(a.clone(), b.clone());
            if (&b % &a).is_zero() {
                continue;
            }
            let l = &a / &g * &b;
            divisors[i] = g;
            divisors[j] = l;
        }
    }

    SmithNormalForm { divisors, rank, right: v, cols }
}

/// Index [Γ : ⟨generators⟩] of the subgroup generated by the given elements,
/// finite exactly when the exponent matrix has full column rank r.
pub fn smith_index(generators: &[GroupElement], group: &AbelianGroup) -> SubgroupIndex {
    let rows: Vec<Vec<i64>> = generators
        .iter()
        .map(|g| {
            assert_eq!(g.rank(), group.rank(), "generator rank mismatch");
            g.exponents().to_vec()
        })
        .collect();
    let snf = smith_normal_form(&rows, group.rank());
    if snf.rank < group.rank() {
        return SubgroupIndex::Infinite;
    }
    let mut idx = BigInt::one();
    for d in &snf.divisors {
        idx *= d;
    }
    SubgroupIndex::Finite(idx)
}

/// Stacked exponent matrix of a list of characters: one column per character,
/// rows indexed by (group generator, parameter); an extra block of sign rows
/// is *not* included (see `z_linear_independent`).
fn character_exponent_matrix(chars: &[&Character]) -> (Vec<Vec<i64>>, usize) {
    let n = chars.len();
    assert!(n > 0);
    let rank = chars[0].rank();
    let arity = chars[0].value(0).space().arity();
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(rank * arity);
    for k in 0..rank {
        for p in 0..arity {
            let mut row = Vec::with_capacity(n);
            for c in chars {
                assert_eq!(c.rank(), rank, "character rank mismatch");
                row.push(c.value(k).exponents()[p]);
            }
            rows.push(row);
        }
    }
    (rows, n)
}

/// Z-linear independence of characters in the character group.
///
/// A nonzero integer kernel vector v of the exponent matrix always yields a
/// genuine relation: even if v hits sign obstructions, 2v cannot (all signs
/// square to 1), so independence is equivalent to the kernel being trivial.
pub fn z_linear_independent(chars: &[&Character]) -> bool {
    if chars.is_empty() {
        return true;
    }
    if chars[0].value(0).space().arity() == 0 {
        // All values are ±1; every character is 2-torsion, hence dependent.
        return false;
    }
    let (rows, n) = character_exponent_matrix(chars);
    let snf = smith_normal_form(&rows, n);
    snf.rank == n
}

/// Solves target = base · ∏ basisᵢ^{nᵢ} for the integer vector n.
///
/// The basis must be Z-linearly independent (so a solution, if any, is
/// unique). Callers check nonnegativity to decide the order relation.
pub fn solve_weight_difference(
    target: &Character,
    base: &Character,
    basis: &[&Character],
) -> Result<DegreeVector, LatticeError> {
    if !z_linear_independent(basis) {
        return Err(LatticeError::NotRegular);
    }
    let n = basis.len();
    let diff = target.mul(&base.inv());
    let rank = diff.rank();
    if basis.iter().any(|c| c.rank() != rank) {
        return Err(LatticeError::RankMismatch {
            expected: rank,
            got: basis.iter().map(|c| c.rank()).find(|&r| r != rank).unwrap(),
        });
    }
    let arity = diff.value(0).space().arity();
    // Solve the exponent system by integer Gaussian elimination over the
    // rationals, then verify integrality and the residual sign equations.
    let mut rows: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
    for k in 0..rank {
        for p in 0..arity {
            let coeffs: Vec<BigInt> = basis
                .iter()
                .map(|c| BigInt::from(c.value(k).exponents()[p]))
                .collect();
            let rhs = BigInt::from(diff.value(k).exponents()[p]);
            rows.push((coeffs, rhs));
        }
    }
    let solution = solve_integer_system(&mut rows, n).ok_or(LatticeError::NoSolution)?;
    // Check the sign component: ∏ sign(basisᵢ(g_k))^{nᵢ} must match.
    for k in 0..rank {
        let mut parity = false;
        for (c, sol) in basis.iter().zip(&solution) {
            if c.value(k).is_negative() && sol.rem_euclid(2) == 1 {
                parity = !parity;
            }
        }
        if parity != diff.value(k).is_negative() {
            return Err(LatticeError::NoSolution);
        }
    }
    Ok(DegreeVector::new(solution))
}

/// Solves a linear system with integer coefficients for a rational solution,
/// returning it only when it is integral. `None` when inconsistent or
/// non-integral. The caller guarantees full column rank.
fn solve_integer_system(rows: &mut Vec<(Vec<BigInt>, BigInt)>, n: usize) -> Option<Vec<i64>> {
    use num_rational::BigRational;
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|(coeffs, rhs)| {
            coeffs
                .iter()
                .chain(std::iter::once(rhs))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let m = mat.len();
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][c].recip();
        for x in mat[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != r && !mat[i][c].is_zero() {
                let f = mat[i][c].clone();
                for j in 0..=n {
                    let sub = &f * &mat[r][j];
                    mat[i][j] -= sub;
                }
            }
        }
        pivot_rows.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    // Inconsistent rows: 0 = nonzero.
    for i in r..m {
        if !mat[i][n].is_zero() {
            return None;
        }
    }
    if pivot_rows.len() < n {
        // Underdetermined; callers require independence, so treat as failure.
        return None;
    }
    let mut sol = vec![0i64; n];
    for (row, &col) in pivot_rows.iter().enumerate() {
        let v = &mat[row][n];
        if !v.denom().is_one() {
            return None;
        }
        sol[col] = i64::try_from(v.numer().clone()).ok()?;
    }
    Some(sol)
}
