//! Weight modules over the algebra: dominance of weights, simple and
//! depth-truncated highest-weight modules, tensor products through the
//! comultiplication, singular vectors and complete-reducibility
//! decompositions, the multiplicative G-function with the Casimir operator
//! it rescales, integrability, and factorization of simple modules over the
//! components of a disconnected diagram.
//!
//! Every constructed module carries its basis weights and exact sparse
//! action columns for each raising and lowering generator; the group acts
//! diagonally through the weights. Construction always ends with an audit
//! that replays the defining relations as matrix identities.

use crate::datum::{check_nli, DatumError};
use crate::engine::{AlgebraElement, Engine, EngineError, HalfElement, Side, SkewMap};
use crate::lattice::{solve_weight_difference, Character, DegreeVector, LatticeError};
use crate::linalg::Matrix;
use crate::scalars::{unit_discrete_log, Scalar, ScalarError, UnitScalar};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReprError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("weight is not dominant: {detail}")]
    NotDominant { detail: String },
    #[error("modules live on different algebra handles")]
    HandleMismatch,
    #[error("module weight {weight} lies outside the G-function coset")]
    CosetMismatch { weight: String },
    #[error("weight {weight} is not in the anchor coset")]
    NotInCoset { weight: String },
    #[error(
        "the diagonal braiding exponents are not N-linearly independent, so G-values \
         need not separate comparable weights; pass allow_degenerate to evaluate anyway"
    )]
    NliFails,
    #[error("decomposition audit failed: summands cover {covered} of {total} dimensions ({detail})")]
    AuditFailure { covered: usize, total: usize, detail: String },
    #[error("the Cartan diagram is connected; there are no components to factor")]
    ConnectedDiagram,
    #[error("a defining relation fails on the module: {0}")]
    RelationViolated(String),
    #[error("{0}")]
    Shape(String),
}

/// The exponent vector m with χ(K_iL_i) = q_ii^{m_i} for every vertex, when
/// all the logs exist and are nonnegative.
pub fn is_dominant(engine: &Engine, chi: &Character) -> Result<Option<Vec<i64>>, ReprError> {
    let datum = engine.datum();
    if chi.rank() != datum.group().rank() {
        return Err(ReprError::Shape(format!(
            "character rank {} does not match group rank {}",
            chi.rank(),
            datum.group().rank()
        )));
    }
    let mut m = Vec::with_capacity(engine.theta());
    for i in 0..engine.theta() {
        let value = chi.evaluate(&datum.kl(i));
        match unit_discrete_log(datum.q(i, i), &value)? {
            Some(e) if e >= 0 => m.push(e),
            _ => return Ok(None),
        }
    }
    Ok(Some(m))
}

/// How a highest-weight module was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    Simple,
    VermaTruncated { depth: usize },
}

/// Highest-weight bookkeeping attached to a cyclic module.
#[derive(Debug, Clone)]
pub struct HighestWeightData {
    pub weight: Character,
    pub cyclic_index: usize,
    pub exponents: Option<Vec<i64>>,
    pub construction: ConstructionKind,
}

type SparseColumns = Vec<Vec<(usize, Scalar)>>;

/// A finite-dimensional module with diagonal group action and exact
/// generator actions, stored columnwise.
pub struct WeightModule {
    engine: Arc<Engine>,
    weights: Vec<Character>,
    labels: Vec<String>,
    e_act: Vec<SparseColumns>,
    f_act: Vec<SparseColumns>,
    highest: Option<HighestWeightData>,
    /// Remaining lowering steps before a column reaches a truncation
    /// boundary; None means the actions are exact in every direction.
    headroom: Vec<Option<usize>>,
}

fn weight_key(chi: &Character) -> Vec<(bool, Vec<i64>)> {
    chi.values().iter().map(|u| (u.is_negative(), u.exponents().to_vec())).collect()
}

impl WeightModule {
    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, v: usize) -> &Character {
        &self.weights[v]
    }

    pub fn weights(&self) -> &[Character] {
        &self.weights
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn highest(&self) -> Option<&HighestWeightData> {
        self.highest.as_ref()
    }

    /// Basis indices grouped by weight, in a deterministic order.
    pub fn weight_blocks(&self) -> Vec<(Character, Vec<usize>)> {
        let mut map: BTreeMap<Vec<(bool, Vec<i64>)>, (Character, Vec<usize>)> = BTreeMap::new();
        for (v, w) in self.weights.iter().enumerate() {
            map.entry(weight_key(w)).or_insert_with(|| (w.clone(), Vec::new())).1.push(v);
        }
        map.into_values().collect()
    }

    /// (weight, multiplicity) pairs in the block order.
    pub fn weight_dimensions(&self) -> Vec<(Character, usize)> {
        self.weight_blocks().into_iter().map(|(w, idx)| (w, idx.len())).collect()
    }

    fn space(&self) -> &Arc<crate::scalars::ParameterSpace> {
        self.engine.space()
    }

    pub fn zero_vector(&self) -> Vec<Scalar> {
        vec![Scalar::zero(self.space()); self.dim()]
    }

    pub fn unit_vector(&self, v: usize) -> Vec<Scalar> {
        let mut u = self.zero_vector();
        u[v] = Scalar::one(self.space());
        u
    }

    fn apply_sparse(&self, act: &SparseColumns, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.zero_vector();
        for (c, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (r, entry) in &act[c] {
                out[*r] = out[*r].add(&coeff.mul(entry));
            }
        }
        out
    }

    pub fn apply_e(&self, i: usize, v: &[Scalar]) -> Vec<Scalar> {
        self.apply_sparse(&self.e_act[i], v)
    }

    pub fn apply_f(&self, i: usize, v: &[Scalar]) -> Vec<Scalar> {
        self.apply_sparse(&self.f_act[i], v)
    }

    pub fn apply_group(&self, g: &crate::lattice::GroupElement, v: &[Scalar]) -> Vec<Scalar> {
        v.iter()
            .enumerate()
            .map(|(j, c)| c.mul(&self.weights[j].evaluate(g).to_scalar()))
            .collect()
    }

    /// Action of a triangular-form algebra element.
    pub fn apply_element(&self, a: &AlgebraElement, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.zero_vector();
        for ((f, gexps, e), c) in a.terms() {
            let mut w = v.to_vec();
            for &l in e.iter().rev() {
                w = self.apply_e(l as usize, &w);
                if w.iter().all(|x| x.is_zero()) {
                    break;
                }
            }
            if w.iter().all(|x| x.is_zero()) {
                continue;
            }
            let g = self.engine.datum().group().element(gexps.clone());
            w = self.apply_group(&g, &w);
            for &l in f.iter().rev() {
                w = self.apply_f(l as usize, &w);
                if w.iter().all(|x| x.is_zero()) {
                    break;
                }
            }
            for (j, x) in w.into_iter().enumerate() {
                if !x.is_zero() {
                    out[j] = out[j].add(&x.mul(c));
                }
            }
        }
        out
    }

    pub fn e_matrix(&self, i: usize) -> Matrix {
        self.dense(&self.e_act[i])
    }

    pub fn f_matrix(&self, i: usize) -> Matrix {
        self.dense(&self.f_act[i])
    }

    fn dense(&self, act: &SparseColumns) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zero(self.space(), n, n);
        for (c, col) in act.iter().enumerate() {
            for (r, entry) in col {
                *m.at_mut(*r, c) = entry.clone();
            }
        }
        m
    }

    /// Replays the defining relations as exact matrix identities: weight
    /// block structure, the cross relations, and both sets of Serre
    /// relations.
    fn audit(&self) -> Result<(), ReprError> {
        let datum = self.engine.datum();
        let theta = self.engine.theta();
        for i in 0..theta {
            let chi_i = datum.character(i);
            for (c, col) in self.e_act[i].iter().enumerate() {
                for (r, _) in col {
                    if weight_key(&self.weights[*r]) != weight_key(&self.weights[c].mul(chi_i)) {
                        return Err(ReprError::RelationViolated(format!(
                            "raising generator {} does not shift weights by its character",
                            i + 1
                        )));
                    }
                }
            }
            for (c, col) in self.f_act[i].iter().enumerate() {
                for (r, _) in col {
                    if weight_key(&self.weights[*r])
                        != weight_key(&self.weights[c].mul(&chi_i.inv()))
                    {
                        return Err(ReprError::RelationViolated(format!(
                            "lowering generator {} does not shift weights by its inverse character",
                            i + 1
                        )));
                    }
                }
            }
        }
        for i in 0..theta {
            for j in 0..theta {
                for c in 0..self.dim() {
                    if matches!(self.headroom[c], Some(0)) {
                        continue;
                    }
                    let v = self.unit_vector(c);
                    let ef = self.apply_e(i, &self.apply_f(j, &v));
                    let fe = self.apply_f(j, &self.apply_e(i, &v));
                    let mut expect = self.zero_vector();
                    if i == j {
                        let w = &self.weights[c];
                        let scalar = w
                            .evaluate(datum.k(i))
                            .to_scalar()
                            .sub(&w.evaluate(datum.l(i)).inv().to_scalar())
                            .mul(datum.ell(i));
                        expect[c] = scalar;
                    }
                    for r in 0..self.dim() {
                        if ef[r].sub(&fe[r]) != expect[r] {
                            return Err(ReprError::RelationViolated(format!(
                                "cross relation (E{}, F{}) fails on basis vector {}",
                                i + 1,
                                j + 1,
                                c
                            )));
                        }
                    }
                }
            }
        }
        for side in [Side::Lower, Side::Upper] {
            for gen in self.engine.serre_generators(side) {
                let letters = gen.degree.total() as usize;
                for c in 0..self.dim() {
                    if side == Side::Lower {
                        if let Some(h) = self.headroom[c] {
                            if h < letters {
                                continue;
                            }
                        }
                    }
                    let mut acc = self.zero_vector();
                    for (word, coeff) in gen.element.terms() {
                        let mut w = self.unit_vector(c);
                        for &l in word.iter().rev() {
                            w = match side {
                                Side::Lower => self.apply_f(l as usize, &w),
                                Side::Upper => self.apply_e(l as usize, &w),
                            };
                        }
                        for (r, x) in w.into_iter().enumerate() {
                            if !x.is_zero() {
                                acc[r] = acc[r].add(&x.mul(coeff));
                            }
                        }
                    }
                    if acc.iter().any(|x| !x.is_zero()) {
                        return Err(ReprError::RelationViolated(format!(
                            "{} Serre relation ({}, {}) fails on basis vector {}",
                            side,
                            gen.i + 1,
                            gen.j + 1,
                            c
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Highest-weight construction
// ---------------------------------------------------------------------------

struct LayerQuotient {
    kept: Vec<Vec<u8>>,
    expand: BTreeMap<Vec<u8>, Vec<(usize, Scalar)>>,
}

fn weight_of_degree(engine: &Engine, chi: &Character, alpha: &DegreeVector) -> Character {
    let mut w = chi.clone();
    for (i, &n) in alpha.coords().iter().enumerate() {
        if n != 0 {
            w = w.mul(&engine.datum().character(i).pow(-n));
        }
    }
    w
}

fn compositions(total: usize, parts: usize) -> Vec<DegreeVector> {
    fn rec(total: i64, parts: usize, cur: &mut Vec<i64>, out: &mut Vec<DegreeVector>) {
        if parts == 1 {
            cur.push(total);
            out.push(DegreeVector::new(cur.clone()));
            cur.pop();
            return;
        }
        for v in 0..=total {
            cur.push(v);
            rec(total - v, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total as i64, parts, &mut Vec::new(), &mut out);
    out
}

fn layer_quotient(
    engine: &Engine,
    alpha: &DegreeVector,
    power_drop: Option<&[i64]>,
) -> Result<LayerQuotient, ReprError> {
    let basis = engine.graded_basis(Side::Lower, alpha)?;
    let space = engine.space();
    let words = basis.words().to_vec();
    let Some(m) = power_drop else {
        let expand = words
            .iter()
            .enumerate()
            .map(|(k, w)| (w.clone(), vec![(k, Scalar::one(space))]))
            .collect();
        return Ok(LayerQuotient { kept: words, expand });
    };
    let theta = engine.theta();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for i in 0..theta {
        let p = m[i] + 1;
        let mut gamma = alpha.coords().to_vec();
        gamma[i] -= p;
        let gamma = DegreeVector::new(gamma);
        if !gamma.is_nonnegative() {
            continue;
        }
        let prefixes = engine.graded_basis(Side::Lower, &gamma)?;
        for u in prefixes.words() {
            let mut word = u.clone();
            word.extend(std::iter::repeat(i as u8).take(p as usize));
            let reduced =
                engine.reduce(&HalfElement::word(Side::Lower, word, Scalar::one(space)))?;
            let mut row = vec![Scalar::zero(space); words.len()];
            for (w, c) in reduced.terms() {
                let idx = words.iter().position(|bw| bw == w).expect("canonical word");
                row[idx] = row[idx].add(c);
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        let expand = words
            .iter()
            .enumerate()
            .map(|(k, w)| (w.clone(), vec![(k, Scalar::one(space))]))
            .collect();
        return Ok(LayerQuotient { kept: words, expand });
    }
    let mut mat = Matrix::from_rows(rows);
    let pivots = mat.rref();
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let kept_cols: Vec<usize> = (0..words.len()).filter(|c| !pivot_set.contains(c)).collect();
    let local: BTreeMap<usize, usize> =
        kept_cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut expand: BTreeMap<Vec<u8>, Vec<(usize, Scalar)>> = BTreeMap::new();
    for (&c, &k) in &local {
        expand.insert(words[c].clone(), vec![(k, Scalar::one(space))]);
    }
    for (r, &p) in pivots.iter().enumerate() {
        let mut combo: Vec<(usize, Scalar)> = Vec::new();
        for (&c, &k) in &local {
            let v = mat.at(r, c);
            if !v.is_zero() {
                combo.push((k, v.neg()));
            }
        }
        combo.sort_by_key(|&(k, _)| k);
        expand.insert(words[p].clone(), combo);
    }
    let kept = kept_cols.into_iter().map(|c| words[c].clone()).collect();
    Ok(LayerQuotient { kept, expand })
}

fn highest_weight_module(
    engine: &Arc<Engine>,
    chi: &Character,
    kind: ConstructionKind,
    exponents: Option<Vec<i64>>,
) -> Result<WeightModule, ReprError> {
    let theta = engine.theta();
    let mut layers: BTreeMap<DegreeVector, LayerQuotient> = BTreeMap::new();
    let mut order: Vec<DegreeVector> = Vec::new();
    let power_drop = match kind {
        ConstructionKind::Simple => {
            Some(exponents.clone().expect("simple construction carries exponents"))
        }
        ConstructionKind::VermaTruncated { .. } => None,
    };
    let max_level = match kind {
        ConstructionKind::Simple => engine.max_degree(),
        ConstructionKind::VermaTruncated { depth } => depth,
    };
    let zero = DegreeVector::zero(theta);
    layers.insert(zero.clone(), layer_quotient(engine, &zero, power_drop.as_deref())?);
    order.push(zero);
    let mut level = 1usize;
    loop {
        if level > max_level {
            match kind {
                ConstructionKind::Simple => {
                    return Err(EngineError::DegreeCapExceeded {
                        requested: level,
                        cap: engine.max_degree(),
                    }
                    .into())
                }
                ConstructionKind::VermaTruncated { .. } => break,
            }
        }
        let mut any = false;
        let mut batch = Vec::new();
        for alpha in compositions(level, theta) {
            let layer = layer_quotient(engine, &alpha, power_drop.as_deref())?;
            any |= !layer.kept.is_empty();
            batch.push((alpha, layer));
        }
        if !any && matches!(kind, ConstructionKind::Simple) {
            break;
        }
        for (alpha, layer) in batch {
            order.push(alpha.clone());
            layers.insert(alpha, layer);
        }
        level += 1;
    }
    order.sort_by_key(|d| (d.total(), d.clone()));

    let mut offsets: BTreeMap<DegreeVector, usize> = BTreeMap::new();
    let mut weights = Vec::new();
    let mut labels = Vec::new();
    let mut headroom = Vec::new();
    for alpha in &order {
        let layer = &layers[alpha];
        offsets.insert(alpha.clone(), weights.len());
        let w = weight_of_degree(engine, chi, alpha);
        for word in &layer.kept {
            weights.push(w.clone());
            headroom.push(match kind {
                ConstructionKind::Simple => None,
                ConstructionKind::VermaTruncated { depth } => {
                    Some(depth - alpha.total() as usize)
                }
            });
            labels.push(if word.is_empty() {
                "v".to_string()
            } else {
                let mut s = word
                    .iter()
                    .map(|&l| format!("F{}", l + 1))
                    .collect::<Vec<_>>()
                    .join(" ");
                s.push_str("·v");
                s
            });
        }
    }
    let dim = weights.len();

    let mut e_act: Vec<SparseColumns> = vec![vec![Vec::new(); dim]; theta];
    let mut f_act: Vec<SparseColumns> = vec![vec![Vec::new(); dim]; theta];
    for alpha in &order {
        let layer = &layers[alpha];
        let base = offsets[alpha];
        for (k, word) in layer.kept.iter().enumerate() {
            let col = base + k;
            let x = HalfElement::word(Side::Lower, word.clone(), Scalar::one(engine.space()));
            for i in 0..theta {
                // Lowering: left multiplication by the generator.
                let up = {
                    let mut c = alpha.coords().to_vec();
                    c[i] += 1;
                    DegreeVector::new(c)
                };
                if let Some(target) = layers.get(&up) {
                    let mut word_up = Vec::with_capacity(word.len() + 1);
                    word_up.push(i as u8);
                    word_up.extend_from_slice(word);
                    let reduced = engine.reduce(&HalfElement::word(
                        Side::Lower,
                        word_up,
                        Scalar::one(engine.space()),
                    ))?;
                    let tbase = offsets[&up];
                    let mut entries: BTreeMap<usize, Scalar> = BTreeMap::new();
                    for (w, c) in reduced.terms() {
                        for (loc, s) in &target.expand[w] {
                            let e = entries
                                .entry(tbase + loc)
                                .or_insert_with(|| Scalar::zero(engine.space()));
                            *e = e.add(&c.mul(s));
                        }
                    }
                    f_act[i][col] =
                        entries.into_iter().filter(|(_, s)| !s.is_zero()).collect();
                }
                // Raising: the highest-weight action through the two skew
                // derivations of the word.
                let down = {
                    let mut c = alpha.coords().to_vec();
                    c[i] -= 1;
                    DegreeVector::new(c)
                };
                if !down.is_nonnegative() {
                    continue;
                }
                let target = layers.get(&down).expect("lower level present");
                let s_part = engine.skew_derivation(SkewMap::S, i, &x)?;
                let sp_part = engine.skew_derivation(SkewMap::SPrime, i, &x)?;
                let k_scalar = chi
                    .evaluate(engine.datum().k(i))
                    .mul(&engine.braid_char(i, &down).inv())
                    .to_scalar()
                    .mul(engine.datum().ell(i));
                let l_scalar =
                    chi.evaluate(engine.datum().l(i)).inv().to_scalar().mul(engine.datum().ell(i));
                let combined = engine
                    .reduce(&s_part)?
                    .scale(&k_scalar)
                    .sub(&engine.reduce(&sp_part)?.scale(&l_scalar));
                let tbase = offsets[&down];
                let mut entries: BTreeMap<usize, Scalar> = BTreeMap::new();
                for (w, c) in combined.terms() {
                    for (loc, s) in &target.expand[w] {
                        let e = entries
                            .entry(tbase + loc)
                            .or_insert_with(|| Scalar::zero(engine.space()));
                        *e = e.add(&c.mul(s));
                    }
                }
                e_act[i][col] = entries.into_iter().filter(|(_, s)| !s.is_zero()).collect();
            }
        }
    }

    let module = WeightModule {
        engine: Arc::clone(engine),
        weights,
        labels,
        e_act,
        f_act,
        highest: Some(HighestWeightData {
            weight: chi.clone(),
            cyclic_index: 0,
            exponents,
            construction: kind,
        }),
        headroom,
    };
    module.audit()?;
    Ok(module)
}

/// The simple module of a dominant weight, built degreewise as the quotient
/// of the lowering half by the left ideal generated by F_i^{m_i+1}, and
/// terminated at the first entirely empty level.
pub fn simple_module(engine: &Arc<Engine>, chi: &Character) -> Result<WeightModule, ReprError> {
    let Some(m) = is_dominant(engine, chi)? else {
        return Err(ReprError::NotDominant { detail: format!("weight {}", chi) });
    };
    highest_weight_module(engine, chi, ConstructionKind::Simple, Some(m))
}

/// The Verma module of any weight, truncated at the given total depth. The
/// lowering action out of the last stored level is truncated to zero.
pub fn verma_truncated(
    engine: &Arc<Engine>,
    chi: &Character,
    depth: usize,
) -> Result<WeightModule, ReprError> {
    if depth > engine.max_degree() {
        return Err(EngineError::DegreeCapExceeded { requested: depth, cap: engine.max_degree() }
            .into());
    }
    let m = is_dominant(engine, chi)?;
    highest_weight_module(engine, chi, ConstructionKind::VermaTruncated { depth }, m)
}

/// Tensor product through the comultiplication: the raising generators act
/// as E_i ⊗ 1 + K_i ⊗ E_i and the lowering ones as 1 ⊗ F_i + F_i ⊗ L_i⁻¹.
pub fn tensor(a: &WeightModule, b: &WeightModule) -> Result<WeightModule, ReprError> {
    if !Arc::ptr_eq(&a.engine, &b.engine) {
        return Err(ReprError::HandleMismatch);
    }
    let engine = Arc::clone(&a.engine);
    let theta = engine.theta();
    let datum = engine.datum();
    let dim = a.dim() * b.dim();
    let idx = |va: usize, vb: usize| va * b.dim() + vb;
    let mut weights = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    let mut headroom = Vec::with_capacity(dim);
    for va in 0..a.dim() {
        for vb in 0..b.dim() {
            weights.push(a.weight(va).mul(b.weight(vb)));
            labels.push(format!("{}⊗{}", a.label(va), b.label(vb)));
            headroom.push(match (a.headroom[va], b.headroom[vb]) {
                (None, None) => None,
                (Some(h), None) | (None, Some(h)) => Some(h),
                (Some(x), Some(y)) => Some(x.min(y)),
            });
        }
    }
    let mut e_act: Vec<SparseColumns> = vec![vec![Vec::new(); dim]; theta];
    let mut f_act: Vec<SparseColumns> = vec![vec![Vec::new(); dim]; theta];
    for i in 0..theta {
        for va in 0..a.dim() {
            let ka = a.weight(va).evaluate(datum.k(i)).to_scalar();
            for vb in 0..b.dim() {
                let col = idx(va, vb);
                let mut entries: Vec<(usize, Scalar)> = Vec::new();
                for (ra, c) in &a.e_act[i][va] {
                    entries.push((idx(*ra, vb), c.clone()));
                }
                for (rb, c) in &b.e_act[i][vb] {
                    entries.push((idx(va, *rb), c.mul(&ka)));
                }
                entries.sort_by_key(|&(r, _)| r);
                e_act[i][col] = entries;

                let lb = b.weight(vb).evaluate(datum.l(i)).inv().to_scalar();
                let mut entries: Vec<(usize, Scalar)> = Vec::new();
                for (rb, c) in &b.f_act[i][vb] {
                    entries.push((idx(va, *rb), c.clone()));
                }
                for (ra, c) in &a.f_act[i][va] {
                    entries.push((idx(*ra, vb), c.mul(&lb)));
                }
                entries.sort_by_key(|&(r, _)| r);
                f_act[i][col] = entries;
            }
        }
    }
    let module = WeightModule { engine, weights, labels, e_act, f_act, highest: None, headroom };
    module.audit()?;
    Ok(module)
}

// ---------------------------------------------------------------------------
// Singular vectors and decomposition
// ---------------------------------------------------------------------------

/// Per weight, a basis of the joint kernel of all raising generators.
pub fn singular_vectors(m: &WeightModule) -> Vec<(Character, Vec<Vec<Scalar>>)> {
    let space = m.space();
    let theta = m.engine.theta();
    let mut out = Vec::new();
    for (weight, block) in m.weight_blocks() {
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for i in 0..theta {
            for r in 0..m.dim() {
                let mut row = Vec::with_capacity(block.len());
                let mut nonzero = false;
                for &c in &block {
                    let entry = m.e_act[i][c]
                        .iter()
                        .find(|(rr, _)| *rr == r)
                        .map(|(_, s)| s.clone())
                        .unwrap_or_else(|| Scalar::zero(space));
                    nonzero |= !entry.is_zero();
                    row.push(entry);
                }
                if nonzero {
                    rows.push(row);
                }
            }
        }
        let kernel = if rows.is_empty() {
            (0..block.len())
                .map(|k| {
                    let mut v = vec![Scalar::zero(space); block.len()];
                    v[k] = Scalar::one(space);
                    v
                })
                .collect()
        } else {
            Matrix::from_rows(rows).nullspace()
        };
        if kernel.is_empty() {
            continue;
        }
        let lifted: Vec<Vec<Scalar>> = kernel
            .into_iter()
            .map(|v| {
                let mut full = vec![Scalar::zero(space); m.dim()];
                for (k, &c) in block.iter().enumerate() {
                    full[c] = v[k].clone();
                }
                full
            })
            .collect();
        out.push((weight, lifted));
    }
    out
}

/// The outcome of a complete-reducibility decomposition.
#[derive(Debug)]
pub struct DecompositionReport {
    /// (highest weight, multiplicity, simple dimension), in block order.
    pub summands: Vec<(Character, usize, usize)>,
    /// Singular vectors per weight, as coordinates in the module basis.
    pub singular: Vec<(Character, Vec<Vec<Scalar>>)>,
    /// Dimension of the decomposed module.
    pub total: usize,
}

impl DecompositionReport {
    /// Multiset of (dominant exponent vector, multiplicity), convenient for
    /// comparisons that should not depend on the linking scalars.
    pub fn exponent_multiset(&self, engine: &Engine) -> Result<Vec<(Vec<i64>, usize)>, ReprError> {
        let mut out = Vec::new();
        for (w, mult, _) in &self.summands {
            let m = is_dominant(engine, w)?.ok_or_else(|| ReprError::NotDominant {
                detail: format!("summand weight {}", w),
            })?;
            out.push((m, *mult));
        }
        out.sort();
        Ok(out)
    }
}

/// Decomposes a finite-dimensional module by singular vectors, auditing
/// that the simple dimensions cover the module exactly.
pub fn decompose(m: &WeightModule) -> Result<DecompositionReport, ReprError> {
    let singular = singular_vectors(m);
    let mut summands = Vec::new();
    let mut covered = 0usize;
    let mut dim_cache: BTreeMap<Vec<(bool, Vec<i64>)>, usize> = BTreeMap::new();
    for (w, vecs) in &singular {
        if is_dominant(&m.engine, w)?.is_none() {
            return Err(ReprError::AuditFailure {
                covered,
                total: m.dim(),
                detail: format!("singular weight {} is not dominant", w),
            });
        }
        let key = weight_key(w);
        let dim = match dim_cache.get(&key) {
            Some(d) => *d,
            None => {
                let d = simple_module(&m.engine, w)?.dim();
                dim_cache.insert(key, d);
                d
            }
        };
        covered += vecs.len() * dim;
        summands.push((w.clone(), vecs.len(), dim));
    }
    if covered != m.dim() {
        return Err(ReprError::AuditFailure {
            covered,
            total: m.dim(),
            detail: format!("{} singular weights found", summands.len()),
        });
    }
    Ok(DecompositionReport { summands, singular, total: m.dim() })
}

/// True when every raising and lowering generator acts nilpotently.
pub fn is_integrable(m: &WeightModule) -> bool {
    let theta = m.engine.theta();
    for i in 0..theta {
        for act in [&m.e_act[i], &m.f_act[i]] {
            let mut vectors: Vec<Vec<Scalar>> = (0..m.dim()).map(|v| m.unit_vector(v)).collect();
            let mut nilpotent = false;
            for _ in 0..=m.dim() {
                if vectors.iter().all(|v| v.iter().all(|x| x.is_zero())) {
                    nilpotent = true;
                    break;
                }
                vectors = vectors.iter().map(|v| m.apply_sparse(act, v)).collect();
            }
            if !nilpotent {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// G-function and Casimir operator
// ---------------------------------------------------------------------------

/// The multiplicative function on a weight coset determined by the
/// recursion G(χ) = G(χχ_i⁻¹)·χ(K_iL_i) and the normalization G(anchor) = 1.
pub struct GFunction {
    engine: Arc<Engine>,
    anchor: Character,
}

/// Builds the G-function anchored at a weight. Without N-linear
/// independence of the diagonal braiding exponents the function need not
/// separate comparable dominant weights; constructing it then requires
/// `allow_degenerate`.
pub fn g_function(
    engine: &Arc<Engine>,
    anchor: &Character,
    allow_degenerate: bool,
) -> Result<GFunction, ReprError> {
    if anchor.rank() != engine.datum().group().rank() {
        return Err(ReprError::Shape("anchor rank does not match the group".into()));
    }
    if !check_nli(engine.datum()) && !allow_degenerate {
        return Err(ReprError::NliFails);
    }
    Ok(GFunction { engine: Arc::clone(engine), anchor: anchor.clone() })
}

impl GFunction {
    pub fn anchor(&self) -> &Character {
        &self.anchor
    }

    /// G at a weight of the anchor coset: with χ = anchor·χ_α,
    /// G(χ) = anchor(K_αL_α)·q_α where q_α collects the braiding factors
    /// q_ii^{n_i(n_i+1)} and (q_ij q_ji)^{n_i n_j}.
    pub fn eval(&self, chi: &Character) -> Result<UnitScalar, ReprError> {
        let datum = self.engine.datum();
        let chars: Vec<&Character> = datum.characters().iter().collect();
        let alpha = match solve_weight_difference(chi, &self.anchor, &chars) {
            Ok(a) => a,
            Err(LatticeError::NoSolution) => {
                return Err(ReprError::NotInCoset { weight: chi.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
        let n = alpha.coords();
        let mut kl = datum.group().identity();
        for (i, &ni) in n.iter().enumerate() {
            if ni != 0 {
                kl = kl.mul(&datum.k(i).pow(ni)).mul(&datum.l(i).pow(ni));
            }
        }
        let mut value = self.anchor.evaluate(&kl);
        for (i, &ni) in n.iter().enumerate() {
            value = value.mul(&datum.q(i, i).pow(ni * (ni + 1)));
            for (j, &nj) in n.iter().enumerate().skip(i + 1) {
                if ni != 0 && nj != 0 {
                    value = value.mul(&datum.q(i, j).mul(datum.q(j, i)).pow(ni * nj));
                }
            }
        }
        Ok(value)
    }
}

/// All nonzero nonnegative degree differences between weights present in
/// the module, i.e. the degrees whose canonical tensors can act.
fn module_degree_set(m: &WeightModule) -> Result<Vec<DegreeVector>, ReprError> {
    let datum = m.engine.datum();
    let chars: Vec<&Character> = datum.characters().iter().collect();
    let blocks = m.weight_blocks();
    let mut set: BTreeSet<DegreeVector> = BTreeSet::new();
    for (from, _) in &blocks {
        for (to, _) in &blocks {
            match solve_weight_difference(to, from, &chars) {
                Ok(alpha) => {
                    if alpha.is_nonnegative() && !alpha.is_zero() {
                        set.insert(alpha);
                    }
                }
                Err(LatticeError::NoSolution) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// The bare Casimir operator on a finite-dimensional module: the sum over
/// the module's degree differences of (antipode of x_k)·y_k over the dual
/// bases, plus the identity from degree zero.
pub fn casimir_matrix(m: &WeightModule) -> Result<Matrix, ReprError> {
    let engine = &m.engine;
    let space = engine.space();
    let n = m.dim();
    let mut omega = Matrix::identity(space, n);
    for alpha in module_degree_set(m)? {
        let (xs, ys) = engine.dual_bases(&alpha)?;
        for (x, y) in xs.iter().zip(&ys) {
            let sx = engine.antipode_lower(x)?;
            let ye = engine.from_half(y);
            for c in 0..n {
                let mid = m.apply_element(&ye, &m.unit_vector(c));
                if mid.iter().all(|v| v.is_zero()) {
                    continue;
                }
                let out = m.apply_element(&sx, &mid);
                for (r, v) in out.into_iter().enumerate() {
                    if !v.is_zero() {
                        *omega.at_mut(r, c) = omega.at(r, c).add(&v);
                    }
                }
            }
        }
    }
    Ok(omega)
}

/// The rescaled Casimir operator: on the weight space of χ it acts as
/// G(χ) times the bare operator. The result commutes with every generator
/// action, which is asserted.
pub fn casimir_apply(m: &WeightModule, g: &GFunction) -> Result<Matrix, ReprError> {
    if !Arc::ptr_eq(&m.engine, &g.engine) {
        return Err(ReprError::HandleMismatch);
    }
    let omega = casimir_matrix(m)?;
    let mut gvals = Vec::with_capacity(m.dim());
    for w in m.weights() {
        let v = g.eval(w).map_err(|e| match e {
            ReprError::NotInCoset { weight } => ReprError::CosetMismatch { weight },
            other => other,
        })?;
        gvals.push(v.to_scalar());
    }
    let n = m.dim();
    let mut out = omega.clone();
    for c in 0..n {
        for r in 0..n {
            let v = out.at(r, c).mul(&gvals[c]);
            *out.at_mut(r, c) = v;
        }
    }
    let theta = m.engine.theta();
    for i in 0..theta {
        for gen in [m.e_matrix(i), m.f_matrix(i)] {
            assert_eq!(
                out.mul(&gen),
                gen.mul(&out),
                "rescaled Casimir fails to commute with a generator action"
            );
        }
    }
    Ok(out)
}

/// The two commutation identities of the bare Casimir operator against the
/// generators, checked per basis column.
pub fn casimir_commutation_ok(m: &WeightModule) -> Result<bool, ReprError> {
    let omega = casimir_matrix(m)?;
    let datum = m.engine.datum();
    let theta = m.engine.theta();
    let n = m.dim();
    let apply_omega = |v: &[Scalar]| -> Vec<Scalar> {
        (0..n)
            .map(|r| {
                let mut acc = Scalar::zero(m.space());
                for (c, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc = acc.add(&omega.at(r, c).mul(x));
                    }
                }
                acc
            })
            .collect()
    };
    for i in 0..theta {
        let kl = datum.kl(i);
        let chi_i = datum.character(i);
        for c in 0..n {
            let w = m.weight(c);
            let v = m.unit_vector(c);
            let left_e = apply_omega(&m.apply_e(i, &v));
            let scalar_e = w.mul(chi_i).evaluate(&kl).inv().to_scalar();
            let right_e: Vec<Scalar> =
                m.apply_e(i, &apply_omega(&v)).iter().map(|x| x.mul(&scalar_e)).collect();
            if left_e != right_e {
                return Ok(false);
            }
            let left_f = apply_omega(&m.apply_f(i, &v));
            let scalar_f = w.evaluate(&kl).to_scalar();
            let right_f: Vec<Scalar> =
                m.apply_f(i, &apply_omega(&v)).iter().map(|x| x.mul(&scalar_f)).collect();
            if left_f != right_f {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Eigenvalue report of the rescaled Casimir operator against the singular
/// weights of a module.
#[derive(Debug)]
pub struct CasimirReport {
    /// G-value per singular weight, in block order.
    pub eigenvalues: Vec<(Character, UnitScalar)>,
    /// Whether ∏ (Ω_G − G(χ_s)) vanishes over the distinct values.
    pub annihilated: bool,
    /// Whether the G-values are pairwise distinct.
    pub distinct: bool,
}

pub fn casimir_spectrum(m: &WeightModule, g: &GFunction) -> Result<CasimirReport, ReprError> {
    let omega_g = casimir_apply(m, g)?;
    let space = m.space();
    let n = m.dim();
    let mut eigenvalues = Vec::new();
    for (w, _) in singular_vectors(m) {
        let v = g.eval(&w).map_err(|e| match e {
            ReprError::NotInCoset { weight } => ReprError::CosetMismatch { weight },
            other => other,
        })?;
        eigenvalues.push((w, v));
    }
    let mut distinct_values: Vec<UnitScalar> = Vec::new();
    for (_, v) in &eigenvalues {
        if !distinct_values.contains(v) {
            distinct_values.push(v.clone());
        }
    }
    let distinct = distinct_values.len() == eigenvalues.len();
    let mut product = Matrix::identity(space, n);
    for v in &distinct_values {
        let mut factor = omega_g.clone();
        for d in 0..n {
            let x = factor.at(d, d).sub(&v.to_scalar());
            *factor.at_mut(d, d) = x;
        }
        product = product.mul(&factor);
    }
    let annihilated = (0..n).all(|r| (0..n).all(|c| product.at(r, c).is_zero()));
    Ok(CasimirReport { eigenvalues, annihilated, distinct })
}

// ---------------------------------------------------------------------------
// Component factorization
// ---------------------------------------------------------------------------

/// Comparison of a simple module against the product of the simple modules
/// of the diagram components.
#[derive(Debug)]
pub struct FactorizationReport {
    pub component_vertices: Vec<Vec<usize>>,
    pub component_dims: Vec<usize>,
    pub full_dim: usize,
    pub dims_match: bool,
    pub weights_match: bool,
}

pub fn component_factorization_check(
    engine: &Arc<Engine>,
    chi: &Character,
) -> Result<FactorizationReport, ReprError> {
    let components = engine.cartan().components.clone();
    if components.len() < 2 {
        return Err(ReprError::ConnectedDiagram);
    }
    let full = simple_module(engine, chi)?;
    let mut component_modules = Vec::new();
    for verts in &components {
        let sub = engine.datum().sub_datum(verts)?;
        let sub_engine = Arc::new(Engine::new(sub)?.with_max_degree(engine.max_degree()));
        component_modules.push(simple_module(&sub_engine, chi)?);
    }
    let component_dims: Vec<usize> = component_modules.iter().map(|m| m.dim()).collect();
    let product: usize = component_dims.iter().product();
    let dims_match = product == full.dim();
    // Convolve the component weight multisets. All characters live on the
    // same group, so the product of one weight per component is a weight of
    // the full module; the multisets must agree.
    let trivial = engine.datum().group().trivial_character(engine.space());
    let mut convolved: Vec<Character> = vec![trivial];
    for simple in &component_modules {
        let mut next = Vec::with_capacity(convolved.len() * simple.dim());
        for acc in &convolved {
            for w in simple.weights() {
                next.push(acc.mul(w));
            }
        }
        convolved = next;
    }
    // The full highest weight is counted once per component in the product;
    // divide the surplus anchors back out.
    let correction = chi.pow(components.len() as i64 - 1).inv();
    let mut product_keys: Vec<Vec<(bool, Vec<i64>)>> =
        convolved.iter().map(|w| weight_key(&w.mul(&correction))).collect();
    let mut full_keys: Vec<Vec<(bool, Vec<i64>)>> =
        full.weights().iter().map(weight_key).collect();
    product_keys.sort();
    full_keys.sort();
    let weights_match = product_keys == full_keys;
    Ok(FactorizationReport {
        component_vertices: components,
        component_dims,
        full_dim: full.dim(),
        dims_match,
        weights_match,
    })
}

// ---------------------------------------------------------------------------
// Weight construction helpers
// ---------------------------------------------------------------------------

/// Difference exponent vector from one weight to another along the datum
/// characters; nonnegative coordinates mean `from ≤ to`.
pub fn weight_difference(
    engine: &Engine,
    from: &Character,
    to: &Character,
) -> Result<DegreeVector, ReprError> {
    let chars: Vec<&Character> = engine.datum().characters().iter().collect();
    solve_weight_difference(to, from, &chars).map_err(ReprError::from)
}

/// A positive-valued character with χ(K_iL_i) = q_ii^{m_i}, solved on the
/// exponent lattice; None when no such character exists.
pub fn character_with_exponents(engine: &Engine, m: &[i64]) -> Option<Character> {
    let datum = engine.datum();
    let theta = engine.theta();
    if m.len() != theta {
        return None;
    }
    for i in 0..theta {
        if datum.q(i, i).is_negative() && m[i].rem_euclid(2) == 1 {
            return None;
        }
    }
    let rank = datum.group().rank();
    let arity = engine.space().arity();
    let mat: Vec<Vec<i64>> = (0..theta).map(|i| datum.kl(i).exponents().to_vec()).collect();
    let mut exps = vec![vec![0i64; arity]; rank];
    for p in 0..arity {
        let b: Vec<BigInt> = (0..theta)
            .map(|i| BigInt::from(m[i]) * BigInt::from(datum.q(i, i).exponents()[p]))
            .collect();
        let x = solve_integer_columns(&mat, &b)?;
        for (r, val) in x.iter().enumerate() {
            exps[r][p] = val.to_i64()?;
        }
    }
    let values: Vec<UnitScalar> =
        exps.into_iter().map(|e| UnitScalar::new(engine.space(), false, e)).collect();
    let chi = Character::new(values);
    for i in 0..theta {
        if chi.evaluate(&datum.kl(i)) != datum.q(i, i).pow(m[i]) {
            return None;
        }
    }
    Some(chi)
}

/// Solves A·x = b over the integers by column reduction to echelon form,
/// for small systems; None when no integral solution exists.
fn solve_integer_columns(a: &[Vec<i64>], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let rows = a.len();
    if rows == 0 {
        return Some(Vec::new());
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<BigInt>> =
        a.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() }).collect())
        .collect();
    let col_op = |m: &mut Vec<Vec<BigInt>>, v: &mut Vec<Vec<BigInt>>, src: usize, dst: usize, q: &BigInt| {
        for row in m.iter_mut() {
            let sub = q * &row[src];
            row[dst] -= sub;
        }
        for row in v.iter_mut() {
            let sub = q * &row[src];
            row[dst] -= sub;
        }
    };
    let mut fixed = 0usize;
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; rows];
    for r in 0..rows {
        if fixed == cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in fixed..cols {
                if !m[r][j].is_zero() {
                    let better = match best {
                        None => true,
                        Some(bj) => m[r][j].abs() < m[r][bj].abs(),
                    };
                    if better {
                        best = Some(j);
                    }
                }
            }
            let Some(p) = best else { break };
            let mut done = true;
            for j in fixed..cols {
                if j != p && !m[r][j].is_zero() {
                    let q = &m[r][j] / &m[r][p];
                    if !q.is_zero() {
                        col_op(&mut m, &mut v, p, j, &q);
                    }
                    if !m[r][j].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                for row in m.iter_mut() {
                    row.swap(fixed, p);
                }
                for row in v.iter_mut() {
                    row.swap(fixed, p);
                }
                pivot_of_row[r] = Some(fixed);
                fixed += 1;
                break;
            }
        }
    }
    let mut y = vec![BigInt::zero(); cols];
    for r in 0..rows {
        let mut acc = BigInt::zero();
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() {
                acc += &m[r][j] * yj;
            }
        }
        let need = &b[r] - &acc;
        match pivot_of_row[r] {
            Some(p) => {
                if (&need % &m[r][p]).is_zero() {
                    y[p] = &need / &m[r][p];
                } else {
                    return None;
                }
            }
            None => {
                if !need.is_zero() {
                    return None;
                }
            }
        }
    }
    let mut x = vec![BigInt::zero(); cols];
    for (r, row) in v.iter().enumerate() {
        let mut acc = BigInt::zero();
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() {
                acc += &row[j] * yj;
            }
        }
        x[r] = acc;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{
        clebsch_gordan_a1, kostant_partition, weight_multiplicities, weyl_dimension, RootSystem,
    };
    use crate::presets;
    use num_traits::ToPrimitive;

    fn engine_for(preset: &str) -> Arc<Engine> {
        let datum = presets::by_name(preset).expect("preset");
        Arc::new(Engine::new(datum).expect("engine"))
    }

    fn dominant_character(engine: &Arc<Engine>, m: &[i64]) -> Character {
        character_with_exponents(engine, m).expect("dominant character")
    }

    #[test]
    fn character_solver_round_trips_on_all_presets() {
        for (preset, m) in [
            ("a1", vec![3]),
            ("a2", vec![1, 2]),
            ("b2", vec![1, 1]),
            ("a2-two-parameter", vec![1, 1]),
            ("a1xa1-g-counterexample", vec![2, 2]),
        ] {
            let engine = engine_for(preset);
            let chi = dominant_character(&engine, &m);
            assert_eq!(
                is_dominant(&engine, &chi).unwrap(),
                Some(m.clone()),
                "round trip failed on {preset}"
            );
        }
    }

    #[test]
    fn dominance_rejects_negative_exponents() {
        let engine = engine_for("a1");
        let chi = dominant_character(&engine, &[2]);
        assert_eq!(is_dominant(&engine, &chi.inv()).unwrap(), None);
    }

    #[test]
    fn rank_one_simple_dimensions_climb_with_the_exponent() {
        let engine = engine_for("a1");
        for m in 0..=4 {
            let chi = dominant_character(&engine, &[m]);
            let module = simple_module(&engine, &chi).unwrap();
            assert_eq!(module.dim() as i64, m + 1);
            assert!(module.weight_dimensions().iter().all(|(_, d)| *d == 1));
            let data = module.highest().unwrap();
            assert_eq!(data.cyclic_index, 0);
            assert_eq!(data.exponents.as_deref(), Some(&[m][..]));
            assert_eq!(data.construction, ConstructionKind::Simple);
        }
    }

    #[test]
    fn simple_construction_requires_dominance() {
        let engine = engine_for("a1");
        let chi = dominant_character(&engine, &[1]).inv();
        assert!(matches!(simple_module(&engine, &chi), Err(ReprError::NotDominant { .. })));
    }

    #[test]
    fn degree_cap_stops_a_module_that_cannot_close() {
        let datum = presets::by_name("a1").unwrap();
        let engine = Arc::new(Engine::new(datum).unwrap().with_max_degree(5));
        let chi = dominant_character(&engine, &[7]);
        assert!(matches!(
            simple_module(&engine, &chi),
            Err(ReprError::Engine(EngineError::DegreeCapExceeded { .. }))
        ));
    }

    #[test]
    fn a2_simple_modules_match_the_classical_dimensions_and_multiplicities() {
        let engine = engine_for("a2");
        let rs = RootSystem::from_cartan(&engine.cartan().a).unwrap();
        let d = vec![1, 1];
        for m in [vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]] {
            let chi = dominant_character(&engine, &m);
            let module = simple_module(&engine, &chi).unwrap();
            let expected = weyl_dimension(&rs, &d, &m).unwrap();
            assert_eq!(BigInt::from(module.dim()), expected, "dimension at {:?}", m);
            let mults = weight_multiplicities(&rs, &d, &m).unwrap();
            for (weight, count) in module.weight_dimensions() {
                let nu = weight_difference(&engine, &weight, &chi).unwrap();
                assert_eq!(
                    mults.get(nu.coords()).cloned().unwrap_or_default(),
                    BigInt::from(count),
                    "multiplicity at drop {:?} of {:?}",
                    nu.coords(),
                    m
                );
            }
        }
        let chi = dominant_character(&engine, &[1, 1]);
        let adjoint = simple_module(&engine, &chi).unwrap();
        assert_eq!(adjoint.dim(), 8);
        let zero_block = adjoint
            .weight_dimensions()
            .into_iter()
            .find(|(w, _)| {
                weight_difference(&engine, w, &chi)
                    .map(|nu| nu.coords() == [1, 1])
                    .unwrap_or(false)
            })
            .expect("middle weight block");
        assert_eq!(zero_block.1, 2);
    }

    #[test]
    fn b2_fundamental_simple_modules_have_the_classical_dimensions() {
        let engine = engine_for("b2");
        let rs = RootSystem::from_cartan(&engine.cartan().a).unwrap();
        let d = vec![1, 2];
        for m in [vec![1, 0], vec![0, 1]] {
            let chi = dominant_character(&engine, &m);
            let module = simple_module(&engine, &chi).unwrap();
            let expected = weyl_dimension(&rs, &d, &m).unwrap();
            assert_eq!(BigInt::from(module.dim()), expected, "dimension at {:?}", m);
        }
    }

    #[test]
    fn truncated_verma_keeps_every_partition_layer() {
        let engine = engine_for("a2");
        let rs = RootSystem::from_cartan(&engine.cartan().a).unwrap();
        let chi = dominant_character(&engine, &[1, 0]);
        let depth = 3;
        let module = verma_truncated(&engine, &chi, depth).unwrap();
        let mut expected = BigInt::from(0);
        for level in 0..=depth {
            for alpha in compositions(level, 2) {
                expected += kostant_partition(&rs, alpha.coords());
            }
        }
        assert_eq!(BigInt::from(module.dim()), expected);
        let data = module.highest().unwrap();
        assert_eq!(data.construction, ConstructionKind::VermaTruncated { depth });
        assert_eq!(data.exponents.as_deref(), Some(&[1, 0][..]));
        // The lowering action out of the boundary level is truncated.
        let top = module.dim() - 1;
        assert!(module.f_act.iter().all(|cols| cols[top].is_empty()));
    }

    #[test]
    fn verma_truncation_accepts_non_dominant_weights() {
        let engine = engine_for("a1");
        let chi = dominant_character(&engine, &[1]).inv();
        let module = verma_truncated(&engine, &chi, 4).unwrap();
        assert_eq!(module.dim(), 5);
        assert_eq!(module.highest().unwrap().exponents, None);
        let singular = singular_vectors(&module);
        assert_eq!(singular.len(), 1);
        assert_eq!(singular[0].1.len(), 1);
    }

    #[test]
    fn tensor_requires_a_shared_engine() {
        let left = engine_for("a1");
        let right = engine_for("a1");
        let chi = dominant_character(&left, &[1]);
        let a = simple_module(&left, &chi).unwrap();
        let chi = dominant_character(&right, &[1]);
        let b = simple_module(&right, &chi).unwrap();
        assert!(matches!(tensor(&a, &b), Err(ReprError::HandleMismatch)));
    }

    #[test]
    fn rank_one_tensors_decompose_by_clebsch_gordan() {
        let engine = engine_for("a1");
        for (m, n) in [(1, 1), (1, 2), (2, 3)] {
            let a = simple_module(&engine, &dominant_character(&engine, &[m])).unwrap();
            let b = simple_module(&engine, &dominant_character(&engine, &[n])).unwrap();
            let product = tensor(&a, &b).unwrap();
            assert_eq!(product.dim(), a.dim() * b.dim());
            let report = decompose(&product).unwrap();
            let mut got: Vec<i64> = Vec::new();
            for (exps, mult) in report.exponent_multiset(&engine).unwrap() {
                for _ in 0..mult {
                    got.push(exps[0]);
                }
            }
            got.sort_unstable_by(|a, b| b.cmp(a));
            assert_eq!(got, clebsch_gordan_a1(m, n), "splitting of ({m}, {n})");
        }
    }

    #[test]
    fn a2_vector_times_covector_splits_into_adjoint_and_trivial() {
        let engine = engine_for("a2");
        let v = simple_module(&engine, &dominant_character(&engine, &[1, 0])).unwrap();
        let w = simple_module(&engine, &dominant_character(&engine, &[0, 1])).unwrap();
        let product = tensor(&v, &w).unwrap();
        let report = decompose(&product).unwrap();
        assert_eq!(report.total, 9);
        assert_eq!(
            report.exponent_multiset(&engine).unwrap(),
            vec![(vec![0, 0], 1), (vec![1, 1], 1)]
        );
        let dims: Vec<usize> = report.summands.iter().map(|(_, _, d)| *d).collect();
        assert_eq!(dims.iter().sum::<usize>(), 9);
    }

    #[test]
    fn two_parameter_tensors_split_like_the_symmetric_case() {
        let engine = engine_for("a2-two-parameter");
        let v = simple_module(&engine, &dominant_character(&engine, &[1, 0])).unwrap();
        let w = simple_module(&engine, &dominant_character(&engine, &[0, 1])).unwrap();
        assert_eq!(v.dim(), 3);
        assert_eq!(w.dim(), 3);
        let report = decompose(&tensor(&v, &w).unwrap()).unwrap();
        assert_eq!(
            report.exponent_multiset(&engine).unwrap(),
            vec![(vec![0, 0], 1), (vec![1, 1], 1)]
        );
    }

    #[test]
    fn singular_vectors_of_a_simple_module_span_only_the_highest_line() {
        let engine = engine_for("a2");
        let chi = dominant_character(&engine, &[1, 1]);
        let module = simple_module(&engine, &chi).unwrap();
        let singular = singular_vectors(&module);
        assert_eq!(singular.len(), 1);
        assert_eq!(singular[0].1.len(), 1);
        assert_eq!(weight_key(&singular[0].0), weight_key(&chi));
    }

    #[test]
    fn g_function_satisfies_the_coset_recursion() {
        let engine = engine_for("a2");
        let anchor = dominant_character(&engine, &[1, 1]);
        let g = g_function(&engine, &anchor, false).unwrap();
        assert!(g.eval(&anchor).unwrap().is_one());
        let datum = engine.datum();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                let chi =
                    anchor.mul(&datum.character(0).pow(a)).mul(&datum.character(1).pow(b));
                for i in 0..2 {
                    let below = chi.mul(&datum.character(i).inv());
                    let expected = g.eval(&below).unwrap().mul(&chi.evaluate(&datum.kl(i)));
                    assert_eq!(g.eval(&chi).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn g_function_rejects_weights_outside_the_coset() {
        let engine = engine_for("a2");
        let anchor = dominant_character(&engine, &[0, 0]);
        let g = g_function(&engine, &anchor, false).unwrap();
        let off_coset = dominant_character(&engine, &[1, 0]);
        assert!(matches!(g.eval(&off_coset), Err(ReprError::NotInCoset { .. })));
    }

    #[test]
    fn degenerate_braidings_gate_the_g_function() {
        let engine = engine_for("a1xa1-g-counterexample");
        let anchor = dominant_character(&engine, &[2, 2]);
        assert!(matches!(g_function(&engine, &anchor, false), Err(ReprError::NliFails)));
        let g = g_function(&engine, &anchor, true).unwrap();
        let datum = engine.datum();
        let higher = anchor.mul(datum.character(0)).mul(datum.character(1));
        assert_eq!(is_dominant(&engine, &higher).unwrap(), Some(vec![4, 4]));
        assert!(g.eval(&higher).unwrap().is_one());
        assert_eq!(g.eval(&higher).unwrap(), g.eval(&anchor).unwrap());
    }

    #[test]
    fn casimir_is_the_g_value_on_each_simple_module() {
        let engine = engine_for("a2");
        let chi = dominant_character(&engine, &[1, 1]);
        let module = simple_module(&engine, &chi).unwrap();
        let g = g_function(&engine, &chi, false).unwrap();
        let omega_g = casimir_apply(&module, &g).unwrap();
        assert_eq!(omega_g, Matrix::identity(engine.space(), module.dim()));
        let report = casimir_spectrum(&module, &g).unwrap();
        assert!(report.annihilated);
        assert!(report.distinct);
    }

    #[test]
    fn casimir_commutation_identities_hold() {
        for preset in ["a2", "a2-two-parameter", "b2"] {
            let engine = engine_for(preset);
            let chi = dominant_character(&engine, &[1, 0]);
            let module = simple_module(&engine, &chi).unwrap();
            assert!(casimir_commutation_ok(&module).unwrap(), "commutation on {preset}");
        }
    }

    #[test]
    fn casimir_separates_the_summands_of_a_tensor_product() {
        let engine = engine_for("a1");
        let a = simple_module(&engine, &dominant_character(&engine, &[1])).unwrap();
        let b = simple_module(&engine, &dominant_character(&engine, &[1])).unwrap();
        let product = tensor(&a, &b).unwrap();
        let anchor = dominant_character(&engine, &[2]);
        let g = g_function(&engine, &anchor, false).unwrap();
        let report = casimir_spectrum(&product, &g).unwrap();
        assert_eq!(report.eigenvalues.len(), 2);
        assert!(report.distinct);
        assert!(report.annihilated);
    }

    #[test]
    fn simple_and_tensor_modules_are_integrable() {
        let engine = engine_for("a2");
        let a = simple_module(&engine, &dominant_character(&engine, &[1, 0])).unwrap();
        let b = simple_module(&engine, &dominant_character(&engine, &[0, 1])).unwrap();
        assert!(is_integrable(&a));
        assert!(is_integrable(&tensor(&a, &b).unwrap()));
    }

    #[test]
    fn disconnected_diagrams_factor_through_their_components() {
        let engine = engine_for("a1xa1-g-counterexample");
        let chi = dominant_character(&engine, &[2, 2]);
        let report = component_factorization_check(&engine, &chi).unwrap();
        assert_eq!(report.component_vertices, vec![vec![0], vec![1]]);
        assert_eq!(report.component_dims, vec![3, 3]);
        assert_eq!(report.full_dim, 9);
        assert!(report.dims_match);
        assert!(report.weights_match);

        let connected = engine_for("a2");
        let chi = dominant_character(&connected, &[1, 0]);
        assert!(matches!(
            component_factorization_check(&connected, &chi),
            Err(ReprError::ConnectedDiagram)
        ));
    }

    #[test]
    fn relations_audit_rejects_corrupted_actions() {
        let engine = engine_for("a1");
        let chi = dominant_character(&engine, &[2]);
        let mut module = simple_module(&engine, &chi).unwrap();
        let (row, coeff) = module.f_act[0][0][0].clone();
        module.f_act[0][0][0] = (row, coeff.add(&coeff));
        assert!(matches!(module.audit(), Err(ReprError::RelationViolated(_))));
    }

    #[test]
    fn linking_rescaling_leaves_decompositions_unchanged() {
        let base = presets::by_name("a1").unwrap();
        let space = Arc::clone(base.space());
        let two = Scalar::from_int(&space, 2);
        let rescaled = base.with_ell(vec![two]).unwrap();
        for datum in [base, rescaled] {
            let engine = Arc::new(Engine::new(datum).unwrap());
            let a = simple_module(&engine, &dominant_character(&engine, &[1])).unwrap();
            let b = simple_module(&engine, &dominant_character(&engine, &[2])).unwrap();
            let report = decompose(&tensor(&a, &b).unwrap()).unwrap();
            assert_eq!(
                report.exponent_multiset(&engine).unwrap(),
                vec![(vec![1], 1), (vec![3], 1)]
            );
        }
    }

    #[test]
    fn integer_column_solver_finds_exact_solutions() {
        let a = vec![vec![2, 0], vec![0, 3]];
        let b = vec![BigInt::from(4), BigInt::from(9)];
        let x = solve_integer_columns(&a, &b).unwrap();
        assert_eq!(x, vec![BigInt::from(2), BigInt::from(3)]);
        let b = vec![BigInt::from(3), BigInt::from(9)];
        assert!(solve_integer_columns(&a, &b).is_none());
        let a = vec![vec![1, 1, 0], vec![0, 1, 1]];
        let b = vec![BigInt::from(5), BigInt::from(7)];
        let x = solve_integer_columns(&a, &b).unwrap();
        assert_eq!(&x[0] + &x[1], BigInt::from(5));
        assert_eq!(&x[1] + &x[2], BigInt::from(7));
        let _ = x[0].to_i64().unwrap();
    }
}
