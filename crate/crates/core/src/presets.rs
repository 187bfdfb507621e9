//! Ready-made reduced data: the standard one-parameter shapes of ranks one
//! and two, a two-parameter deformation, and small examples exercising the
//! reductivity and separation edge cases.

use crate::datum::ReducedDatum;
use crate::lattice::{AbelianGroup, Character};
use crate::scalars::{ParameterSpace, Scalar, UnitScalar};

/// Names of the data returned by [`by_name`].
pub const PRESET_NAMES: [&str; 5] = [
    "A1",
    "A2",
    "A2-two-parameter",
    "A1xA1-G-counterexample",
    "B2",
];

/// Looks a preset up by name, ignoring case.
pub fn by_name(name: &str) -> Option<ReducedDatum> {
    match name.to_ascii_lowercase().as_str() {
        "a1" => Some(a1()),
        "a2" => Some(a2()),
        "a2-two-parameter" => Some(a2_two_parameter()),
        "a1xa1-g-counterexample" => Some(a1xa1_counterexample()),
        "b2" => Some(b2()),
        _ => None,
    }
}

fn symmetric_one_parameter(q_powers: &[Vec<i64>]) -> ReducedDatum {
    let theta = q_powers.len();
    let space = ParameterSpace::new(&["q"]);
    let group = AbelianGroup::new(theta);
    let gens: Vec<_> = (0..theta).map(|i| group.generator(i)).collect();
    let chi: Vec<Character> = (0..theta)
        .map(|j| {
            Character::new(
                (0..theta)
                    .map(|i| UnitScalar::new(&space, false, vec![q_powers[i][j]]))
                    .collect(),
            )
        })
        .collect();
    let ell = vec![Scalar::one(&space); theta];
    ReducedDatum::new(space, group, gens.clone(), gens, chi, ell)
        .expect("preset datum is valid")
}

/// Rank one: Γ = Z, K = L = g, χ(g) = q².
pub fn a1() -> ReducedDatum {
    symmetric_one_parameter(&[vec![2]])
}

/// Rank two, symmetric braiding q_ij = q^{a_ij} with the simply laced
/// 2×2 matrix.
pub fn a2() -> ReducedDatum {
    symmetric_one_parameter(&[vec![2, -1], vec![-1, 2]])
}

/// Rank two with a double edge: q_ij = q^{d_i a_ij}, d = (1, 2).
pub fn b2() -> ReducedDatum {
    symmetric_one_parameter(&[vec![2, -2], vec![-2, 4]])
}

/// Two independent parameters r, s on the simply laced rank-two diagram:
/// q_11 = q_22 = rs, q_12 = r⁻¹, q_21 = s⁻¹, over Γ = Z⁴ free on
/// K₁, K₂, L₁, L₂.
pub fn a2_two_parameter() -> ReducedDatum {
    let space = ParameterSpace::new(&["r", "s"]);
    let group = AbelianGroup::new(4);
    let k = vec![group.generator(0), group.generator(1)];
    let l = vec![group.generator(2), group.generator(3)];
    let u = |r: i64, s: i64| UnitScalar::new(&space, false, vec![r, s]);
    // χ_j(K_i) = q_ij and χ_j(L_i) = q_ji.
    let chi = vec![
        Character::new(vec![u(1, 1), u(0, -1), u(1, 1), u(-1, 0)]),
        Character::new(vec![u(-1, 0), u(1, 1), u(0, -1), u(1, 1)]),
    ];
    let ell = vec![Scalar::one(&space), Scalar::one(&space)];
    ReducedDatum::new(space, group, l, k, chi, ell).expect("preset datum is valid")
}

/// Two disconnected vertices with q_11 = q, q_22 = q⁻¹: the diagonal
/// braiding entries satisfy q_11 q_22 = 1, so distinct highest weights can
/// share every Casimir eigenvalue.
pub fn a1xa1_counterexample() -> ReducedDatum {
    let space = ParameterSpace::new(&["q"]);
    let group = AbelianGroup::new(2);
    let k = vec![group.generator(0), group.generator(1)];
    let u = |e: i64| UnitScalar::new(&space, false, vec![e]);
    let chi = vec![
        Character::new(vec![u(1), u(0)]),
        Character::new(vec![u(0), u(-1)]),
    ];
    let ell = vec![Scalar::one(&space), Scalar::one(&space)];
    ReducedDatum::new(space, group, k.clone(), k, chi, ell).expect("preset datum is valid")
}

/// The rank-two symmetric braiding embedded in a rank-three group, leaving
/// the subgroup generated by the K_iL_i of infinite index.
pub fn rank3_nonreductive() -> ReducedDatum {
    let space = ParameterSpace::new(&["q"]);
    let group = AbelianGroup::new(3);
    let k = vec![group.generator(0), group.generator(1)];
    let u = |e: i64| UnitScalar::new(&space, false, vec![e]);
    let chi = vec![
        Character::new(vec![u(2), u(-1), u(0)]),
        Character::new(vec![u(-1), u(2), u(0)]),
    ];
    let ell = vec![Scalar::one(&space), Scalar::one(&space)];
    ReducedDatum::new(space, group, k.clone(), k, chi, ell).expect("preset datum is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn all_named_presets_build() {
        for name in PRESET_NAMES {
            let r = by_name(name).expect("known name");
            assert!(r.theta() >= 1);
            r.detect_cartan().expect("presets are of Cartan type");
        }
        assert!(by_name("Z9").is_none());
    }

    #[test]
    fn braiding_matrices_match_conventions() {
        let sp = |r: &ReducedDatum| Arc::clone(r.space());
        let a2 = a2();
        let q = |t: &str| UnitScalar::parse(&sp(&a2), t).unwrap();
        assert_eq!(*a2.q(0, 0), q("q^2"));
        assert_eq!(*a2.q(0, 1), q("q^-1"));
        let b2 = b2();
        assert_eq!(*b2.q(1, 1), q("q^4"));
        assert_eq!(*b2.q(0, 1), q("q^-2"));
        let two = a2_two_parameter();
        let u = |t: &str| UnitScalar::parse(&sp(&two), t).unwrap();
        assert_eq!(*two.q(0, 0), u("r*s"));
        assert_eq!(*two.q(0, 1), u("r^-1"));
        assert_eq!(*two.q(1, 0), u("s^-1"));
        let cx = a1xa1_counterexample();
        let v = |t: &str| UnitScalar::parse(&sp(&cx), t).unwrap();
        assert_eq!(*cx.q(0, 0), v("q"));
        assert_eq!(*cx.q(1, 1), v("q^-1"));
        assert!(cx.q(0, 1).is_one());
    }
}
