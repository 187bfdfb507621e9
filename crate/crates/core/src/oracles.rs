//! Independent reference computations for finite-type Cartan matrices:
//! positive roots, Kostant partition counts, Weyl dimensions, Freudenthal
//! weight multiplicities, and rank-one tensor product decompositions.
//!
//! Nothing here touches the symbolic engine. All arithmetic is over the
//! integers, so these routines can serve as expectations in tests of the
//! algebra and its modules without sharing any code path with them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("invalid Cartan matrix: {0}")]
    InvalidCartan(String),
    #[error("reflection closure does not terminate: not of finite type")]
    NotFiniteType,
    #[error("invalid symmetrizer: {0}")]
    InvalidSymmetrizer(String),
}

const ROOT_LIMIT: usize = 4096;

/// Positive roots of a finite-type Cartan matrix, in simple-root coordinates,
/// sorted by height and then lexicographically.
#[derive(Debug, Clone)]
pub struct RootSystem {
    cartan: Vec<Vec<i64>>,
    positive_roots: Vec<Vec<i64>>,
}

impl RootSystem {
    /// Closes the simple roots under the reflections
    /// s_i(β) = β − ⟨β, α_i^∨⟩ α_i, keeping the positive results.
    ///
    /// Every positive root of a finite root system is reachable from a
    /// simple root through positive intermediate steps, so the closure is
    /// complete; an unbounded closure signals a non-finite matrix.
    pub fn from_cartan(cartan: &[Vec<i64>]) -> Result<RootSystem, OracleError> {
        let theta = cartan.len();
        if theta == 0 {
            return Err(OracleError::InvalidCartan("empty matrix".into()));
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != theta {
                return Err(OracleError::InvalidCartan("matrix is not square".into()));
            }
            if row[i] != 2 {
                return Err(OracleError::InvalidCartan(format!(
                    "diagonal entry a[{}][{}] = {} is not 2",
                    i + 1,
                    i + 1,
                    row[i]
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                if i != j {
                    if a > 0 {
                        return Err(OracleError::InvalidCartan(format!(
                            "off-diagonal entry a[{}][{}] = {a} is positive",
                            i + 1,
                            j + 1
                        )));
                    }
                    if (a == 0) != (cartan[j][i] == 0) {
                        return Err(OracleError::InvalidCartan(format!(
                            "a[{}][{}] and a[{}][{}] must vanish together",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }

        let mut roots: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        for i in 0..theta {
            let mut e = vec![0i64; theta];
            e[i] = 1;
            roots.insert(e.clone());
            queue.push_back(e);
        }
        while let Some(beta) = queue.pop_front() {
            for i in 0..theta {
                let pairing: i64 = (0..theta).map(|j| cartan[i][j] * beta[j]).sum();
                let mut refl = beta.clone();
                refl[i] -= pairing;
                if refl.iter().all(|&c| c >= 0) && roots.insert(refl.clone()) {
                    if roots.len() > ROOT_LIMIT {
                        return Err(OracleError::NotFiniteType);
                    }
                    queue.push_back(refl);
                }
            }
        }
        let mut positive_roots: Vec<Vec<i64>> = roots.into_iter().collect();
        positive_roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        Ok(RootSystem {
            cartan: cartan.to_vec(),
            positive_roots,
        })
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    fn check_symmetrizer(&self, d: &[i64]) -> Result<(), OracleError> {
        let theta = self.rank();
        if d.len() != theta {
            return Err(OracleError::InvalidSymmetrizer(format!(
                "expected {} entries, got {}",
                theta,
                d.len()
            )));
        }
        if d.iter().any(|&x| x <= 0) {
            return Err(OracleError::InvalidSymmetrizer(
                "entries must be positive".into(),
            ));
        }
        for i in 0..theta {
            for j in 0..theta {
                if d[i] * self.cartan[i][j] != d[j] * self.cartan[j][i] {
                    return Err(OracleError::InvalidSymmetrizer(format!(
                        "d[{}]·a[{}][{}] ≠ d[{}]·a[{}][{}]",
                        i + 1,
                        i + 1,
                        j + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// ⟨λ − ν, α_i^∨⟩ for λ with the given Dynkin labels.
    fn pairing(&self, labels: &[i64], nu: &[i64], i: usize) -> i64 {
        labels[i]
            - (0..self.rank())
                .map(|j| self.cartan[i][j] * nu[j])
                .sum::<i64>()
    }
}

/// Number of ways to write `alpha` as an N-combination of positive roots.
pub fn kostant_partition(rs: &RootSystem, alpha: &[i64]) -> BigInt {
    assert_eq!(alpha.len(), rs.rank(), "degree vector length mismatch");
    let mut memo: HashMap<(Vec<i64>, usize), BigInt> = HashMap::new();
    count_partitions(rs, alpha.to_vec(), 0, &mut memo)
}

fn count_partitions(
    rs: &RootSystem,
    alpha: Vec<i64>,
    k: usize,
    memo: &mut HashMap<(Vec<i64>, usize), BigInt>,
) -> BigInt {
    if alpha.iter().all(|&c| c == 0) {
        return BigInt::one();
    }
    if alpha.iter().any(|&c| c < 0) || k == rs.positive_roots.len() {
        return BigInt::zero();
    }
    if let Some(v) = memo.get(&(alpha.clone(), k)) {
        return v.clone();
    }
    let beta = rs.positive_roots[k].clone();
    let mut total = BigInt::zero();
    let mut rest = alpha.clone();
    loop {
        total += count_partitions(rs, rest.clone(), k + 1, memo);
        for (r, b) in rest.iter_mut().zip(&beta) {
            *r -= b;
        }
        if rest.iter().any(|&c| c < 0) {
            break;
        }
    }
    memo.insert((alpha, k), total.clone());
    total
}

/// Dimension of the simple module with the given dominant integral labels,
/// by the product formula ∏_{β>0} (λ+ρ, β)/(ρ, β).
pub fn weyl_dimension(
    rs: &RootSystem,
    d: &[i64],
    labels: &[i64],
) -> Result<BigInt, OracleError> {
    rs.check_symmetrizer(d)?;
    assert_eq!(labels.len(), rs.rank(), "label length mismatch");
    assert!(labels.iter().all(|&m| m >= 0), "labels must be nonnegative");
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for beta in &rs.positive_roots {
        let mut top = 0i128;
        let mut bot = 0i128;
        for ((&c, &dj), &mj) in beta.iter().zip(d).zip(labels) {
            top += c as i128 * dj as i128 * (mj as i128 + 1);
            bot += c as i128 * dj as i128;
        }
        num *= BigInt::from(top);
        den *= BigInt::from(bot);
    }
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "Weyl dimension must be an integer");
    Ok(q)
}

/// Weight multiplicities of the simple module with the given labels, keyed
/// by the drop ν from the highest weight (the weight is λ − Σ ν_i α_i).
///
/// Multiplicities of dominant weights come from the Freudenthal recursion;
/// the remaining weights inherit them along their Weyl orbits.
pub fn weight_multiplicities(
    rs: &RootSystem,
    d: &[i64],
    labels: &[i64],
) -> Result<BTreeMap<Vec<i64>, BigInt>, OracleError> {
    rs.check_symmetrizer(d)?;
    let theta = rs.rank();
    assert_eq!(labels.len(), theta, "label length mismatch");
    assert!(labels.iter().all(|&m| m >= 0), "labels must be nonnegative");

    // (α_i, α_j) in the normalization (α_i, α_i) = 2 d_i.
    let form = |i: usize, j: usize| -> i128 { d[i] as i128 * rs.cartan[i][j] as i128 };

    // λ − ν is dominant iff A·ν ≤ m componentwise; since A⁻¹ is entrywise
    // nonnegative for finite type, ν is boxed by A⁻¹·m.
    let bounds = dominant_box(rs, labels)?;
    let mut dominants: Vec<Vec<i64>> = Vec::new();
    let mut cursor = vec![0i64; theta];
    'enumerate: loop {
        if (0..theta).all(|i| rs.pairing(labels, &cursor, i) >= 0) {
            dominants.push(cursor.clone());
        }
        for i in (0..theta).rev() {
            if cursor[i] < bounds[i] {
                cursor[i] += 1;
                for c in cursor.iter_mut().skip(i + 1) {
                    *c = 0;
                }
                continue 'enumerate;
            }
        }
        break;
    }
    dominants.sort_by_key(|nu| (nu.iter().sum::<i64>(), nu.clone()));

    let mut mults: HashMap<Vec<i64>, BigInt> = HashMap::new();
    for nu in &dominants {
        if nu.iter().all(|&c| c == 0) {
            mults.insert(nu.clone(), BigInt::one());
            continue;
        }
        // 2 Σ_{β>0} Σ_{k≥1} (λ − ν + kβ, β) · mult(λ − ν + kβ)
        let mut rhs = BigInt::zero();
        for beta in &rs.positive_roots {
            let lam_beta: i128 = (0..theta)
                .map(|j| beta[j] as i128 * labels[j] as i128 * d[j] as i128)
                .sum();
            let nu_beta: i128 = (0..theta)
                .flat_map(|i| (0..theta).map(move |j| (i, j)))
                .map(|(i, j)| nu[i] as i128 * form(i, j) * beta[j] as i128)
                .sum();
            let beta_beta: i128 = (0..theta)
                .flat_map(|i| (0..theta).map(move |j| (i, j)))
                .map(|(i, j)| beta[i] as i128 * form(i, j) * beta[j] as i128)
                .sum();
            let mut k = 1i64;
            loop {
                let shifted: Vec<i64> = nu
                    .iter()
                    .zip(beta)
                    .map(|(&n, &b)| n - k * b)
                    .collect();
                if shifted.iter().any(|&c| c < 0) {
                    break;
                }
                let m = multiplicity_at(rs, labels, &mults, shifted);
                if !m.is_zero() {
                    let ip = lam_beta - nu_beta + k as i128 * beta_beta;
                    rhs += m * BigInt::from(ip);
                }
                k += 1;
            }
        }
        rhs *= BigInt::from(2);
        // (λ + μ + 2ρ, λ − μ) with μ = λ − ν and (ρ, α_j) = d_j.
        let mut den: i128 = (0..theta)
            .map(|j| 2 * nu[j] as i128 * (labels[j] as i128 + 1) * d[j] as i128)
            .sum();
        den -= (0..theta)
            .flat_map(|i| (0..theta).map(move |j| (i, j)))
            .map(|(i, j)| nu[i] as i128 * form(i, j) * nu[j] as i128)
            .sum::<i128>();
        assert!(den > 0, "Freudenthal denominator must be positive");
        let (q, r) = rhs.div_rem(&BigInt::from(den));
        assert!(r.is_zero(), "Freudenthal multiplicity must be an integer");
        if !q.is_zero() {
            mults.insert(nu.clone(), q);
        }
    }

    // Spread each dominant multiplicity across its Weyl orbit.
    let mut out: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
    for (nu, mult) in &mults {
        let mut orbit: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        orbit.insert(nu.clone());
        queue.push_back(nu.clone());
        while let Some(cur) = queue.pop_front() {
            for i in 0..theta {
                let c = rs.pairing(labels, &cur, i);
                let mut next = cur.clone();
                next[i] += c;
                if orbit.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        for point in orbit {
            out.insert(point, mult.clone());
        }
    }
    Ok(out)
}

/// Componentwise ceiling of A⁻¹·m, a box containing every ν with λ − ν
/// dominant.
fn dominant_box(rs: &RootSystem, labels: &[i64]) -> Result<Vec<i64>, OracleError> {
    let theta = rs.rank();
    let mut aug: Vec<Vec<BigRational>> = (0..theta)
        .map(|i| {
            (0..theta)
                .map(|j| BigRational::from_integer(BigInt::from(rs.cartan[i][j])))
                .chain(std::iter::once(BigRational::from_integer(BigInt::from(
                    labels[i],
                ))))
                .collect()
        })
        .collect();
    for c in 0..theta {
        let Some(p) = (c..theta).find(|&i| !aug[i][c].is_zero()) else {
            return Err(OracleError::NotFiniteType);
        };
        aug.swap(c, p);
        let inv = aug[c][c].recip();
        for x in aug[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..theta {
            if i != c && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in 0..=theta {
                    let sub = &f * &aug[c][j];
                    aug[i][j] -= sub;
                }
            }
        }
    }
    let mut bounds = Vec::with_capacity(theta);
    for row in &aug {
        let v = &row[theta];
        if v.is_negative() {
            bounds.push(0);
        } else {
            bounds.push(v.ceil().numer().to_i64().expect("bound fits in i64"));
        }
    }
    Ok(bounds)
}

/// Multiplicity of λ − ν, looked up through the dominant Weyl conjugate.
fn multiplicity_at(
    rs: &RootSystem,
    labels: &[i64],
    mults: &HashMap<Vec<i64>, BigInt>,
    mut nu: Vec<i64>,
) -> BigInt {
    if nu.iter().any(|&c| c < 0) {
        return BigInt::zero();
    }
    let theta = rs.rank();
    let mut steps = 0usize;
    loop {
        let Some(i) = (0..theta).find(|&i| rs.pairing(labels, &nu, i) < 0) else {
            return mults.get(&nu).cloned().unwrap_or_else(BigInt::zero);
        };
        let c = rs.pairing(labels, &nu, i);
        nu[i] += c;
        if nu[i] < 0 {
            return BigInt::zero();
        }
        steps += 1;
        assert!(steps < 100_000, "dominant conjugation did not terminate");
    }
}

/// Labels in the decomposition of the tensor product of two rank-one simple
/// modules with labels m and n: m+n, m+n−2, …, |m−n|.
pub fn clebsch_gordan_a1(m: i64, n: i64) -> Vec<i64> {
    assert!(m >= 0 && n >= 0, "labels must be nonnegative");
    let lo = (m - n).abs();
    let mut out: Vec<i64> = (0..=((m + n - lo) / 2)).map(|k| m + n - 2 * k).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> RootSystem {
        RootSystem::from_cartan(&[vec![2, -1], vec![-1, 2]]).unwrap()
    }

    fn b2() -> RootSystem {
        RootSystem::from_cartan(&[vec![2, -2], vec![-1, 2]]).unwrap()
    }

    #[test]
    fn positive_root_counts() {
        assert_eq!(a2().positive_roots().len(), 3);
        assert_eq!(b2().positive_roots().len(), 4);
        let g2 = RootSystem::from_cartan(&[vec![2, -3], vec![-1, 2]]).unwrap();
        assert_eq!(g2.positive_roots().len(), 6);
        let a3 = RootSystem::from_cartan(&[
            vec![2, -1, 0],
            vec![-1, 2, -1],
            vec![0, -1, 2],
        ])
        .unwrap();
        assert_eq!(a3.positive_roots().len(), 6);
    }

    #[test]
    fn affine_matrix_rejected() {
        assert!(matches!(
            RootSystem::from_cartan(&[vec![2, -2], vec![-2, 2]]),
            Err(OracleError::NotFiniteType)
        ));
    }

    #[test]
    fn malformed_matrices_rejected() {
        assert!(matches!(
            RootSystem::from_cartan(&[vec![1]]),
            Err(OracleError::InvalidCartan(_))
        ));
        assert!(matches!(
            RootSystem::from_cartan(&[vec![2, 1], vec![-1, 2]]),
            Err(OracleError::InvalidCartan(_))
        ));
        assert!(matches!(
            RootSystem::from_cartan(&[vec![2, 0], vec![-1, 2]]),
            Err(OracleError::InvalidCartan(_))
        ));
    }

    #[test]
    fn kostant_examples() {
        let rs = a2();
        assert_eq!(kostant_partition(&rs, &[1, 1]), BigInt::from(2));
        assert_eq!(kostant_partition(&rs, &[2, 1]), BigInt::from(2));
        assert_eq!(kostant_partition(&rs, &[2, 2]), BigInt::from(3));
        assert_eq!(kostant_partition(&rs, &[0, 0]), BigInt::from(1));
        let rs = b2();
        assert_eq!(kostant_partition(&rs, &[2, 1]), BigInt::from(3));
        assert_eq!(kostant_partition(&rs, &[1, 2]), BigInt::from(2));
    }

    #[test]
    fn weyl_dimensions() {
        let rs = a2();
        let d = vec![1, 1];
        assert_eq!(weyl_dimension(&rs, &d, &[1, 0]).unwrap(), BigInt::from(3));
        assert_eq!(weyl_dimension(&rs, &d, &[1, 1]).unwrap(), BigInt::from(8));
        assert_eq!(weyl_dimension(&rs, &d, &[2, 2]).unwrap(), BigInt::from(27));
        let rs = b2();
        let d = vec![1, 2];
        assert_eq!(weyl_dimension(&rs, &d, &[1, 0]).unwrap(), BigInt::from(4));
        assert_eq!(weyl_dimension(&rs, &d, &[0, 1]).unwrap(), BigInt::from(5));
    }

    #[test]
    fn freudenthal_adjoint_of_a2() {
        let rs = a2();
        let mults = weight_multiplicities(&rs, &[1, 1], &[1, 1]).unwrap();
        assert_eq!(mults.len(), 7);
        assert_eq!(mults[&vec![1, 1]], BigInt::from(2));
        assert_eq!(mults[&vec![0, 0]], BigInt::from(1));
        assert_eq!(mults[&vec![2, 2]], BigInt::from(1));
        let total: BigInt = mults.values().sum();
        assert_eq!(total, BigInt::from(8));
    }

    #[test]
    fn freudenthal_totals_match_weyl_dimension() {
        let cases = vec![
            (a2(), vec![1, 1], vec![vec![1, 0], vec![1, 1], vec![2, 2], vec![3, 1]]),
            (b2(), vec![1, 2], vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]]),
        ];
        for (rs, d, label_sets) in cases {
            for labels in label_sets {
                let dim = weyl_dimension(&rs, &d, &labels).unwrap();
                let mults = weight_multiplicities(&rs, &d, &labels).unwrap();
                let total: BigInt = mults.values().sum();
                assert_eq!(total, dim, "labels {labels:?}");
            }
        }
    }

    #[test]
    fn rank_one_tensor_labels() {
        assert_eq!(clebsch_gordan_a1(2, 2), vec![4, 2, 0]);
        assert_eq!(clebsch_gordan_a1(3, 1), vec![4, 2]);
        assert_eq!(clebsch_gordan_a1(0, 5), vec![5]);
        assert_eq!(clebsch_gordan_a1(0, 0), vec![0]);
    }
}
