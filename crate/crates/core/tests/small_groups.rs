//! Every element of sp4 and so5 over GF(3): which Jordan types occur, and
//! whether the closed rules match the action of each actual element.

use std::collections::{BTreeMap, BTreeSet};

use jordanblocks::operator::{
    lift_to_gl, lift_to_sym2, lift_to_wedge2, restrict_to_sl, NilpotentOperator,
};
use jordanblocks::{
    enumerate_partitions, full_pipeline, jordan_type_of_nilpotent, validate_partition_for_group,
    Element, Error, Family, GFpMatrix, GroupContext, JordanType, ModuleSpec, Prime,
};

const P: u32 = 3;

/// `X = B⁻¹ M` with `M` symmetric (for alternating `B`) or skew (for
/// symmetric `B`) runs over the whole Lie algebra of `B`.
fn lie_algebra(b: &GFpMatrix, family: Family) -> Vec<GFpMatrix> {
    let n = b.rows();
    let p = b.p();
    let b_inv = b.inverse().unwrap();
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| family == Family::Sp || i < j)
        .collect();
    let total = (P as usize).pow(slots.len() as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut m = GFpMatrix::zeros(p, n, n);
        let mut c = code;
        for &(i, j) in &slots {
            let x = (c % P as usize) as i64;
            c /= P as usize;
            m.set(i, j, x);
            m.set(j, i, if family == Family::Sp { x } else { -x });
        }
        out.push(b_inv.mul(&m).unwrap());
    }
    out
}

fn preserves(x: &GFpMatrix, b: &GFpMatrix) -> bool {
    x.transpose()
        .mul(b)
        .unwrap()
        .add(&b.mul(x).unwrap())
        .unwrap()
        .is_zero()
}

fn oracle_module_type(x: &GFpMatrix, family: Family) -> JordanType {
    let op = NilpotentOperator::from_matrix_on_v(x.clone(), Element::Nilpotent).unwrap();
    // p does not divide n here, so psl = sl
    let psl = restrict_to_sl(&lift_to_gl(&op).unwrap())
        .unwrap()
        .jordan_type()
        .unwrap();
    let complement = match family {
        Family::Sp => lift_to_sym2(&op),
        _ => lift_to_wedge2(&op),
    };
    psl.diff(&complement.unwrap().jordan_type().unwrap())
        .unwrap()
}

fn check_algebra(b: GFpMatrix, family: Family, module: ModuleSpec) {
    let p = b.p();
    let n = b.rows();
    let ctx = GroupContext::new(family, n, p).unwrap();
    let elements = lie_algebra(&b, family);
    assert_eq!(elements.len(), 3usize.pow(10));
    let mut nilpotent = 0;
    let mut seen: BTreeMap<JordanType, JordanType> = BTreeMap::new();
    for x in &elements {
        assert!(preserves(x, &b));
        let v = match jordan_type_of_nilpotent(x) {
            Ok(v) => v,
            Err(Error::NotNilpotent) => continue,
            Err(e) => panic!("{e}"),
        };
        nilpotent += 1;
        let on_module = oracle_module_type(x, family);
        let first = seen.entry(v.clone()).or_insert_with(|| on_module.clone());
        assert_eq!(*first, on_module, "{v}: two elements of one orbit disagree");
    }
    // q^(2N) nilpotent elements, N = 4 positive roots in both cases
    assert_eq!(nilpotent, 3usize.pow(8));
    let realized: BTreeSet<JordanType> = seen.keys().cloned().collect();
    let admissible: BTreeSet<JordanType> = enumerate_partitions(n)
        .filter(|v| validate_partition_for_group(v, &ctx).unwrap())
        .collect();
    assert_eq!(realized, admissible);
    for (v, on_module) in &seen {
        assert_eq!(&full_pipeline(v, &ctx, module).unwrap(), on_module, "{v}");
    }
}

#[test]
fn sp4_over_gf3() {
    let p = Prime::new(P).unwrap();
    let b = GFpMatrix::from_fn(p, 4, 4, |i, j| match (i, j) {
        (0, 2) | (1, 3) => 1,
        (2, 0) | (3, 1) => -1,
        _ => 0,
    });
    check_algebra(b, Family::Sp, ModuleSpec::LOmega2Sp);
}

#[test]
fn so5_over_gf3() {
    let p = Prime::new(P).unwrap();
    let b = GFpMatrix::from_fn(p, 5, 5, |i, j| i64::from(i + j == 4));
    check_algebra(b, Family::SO, ModuleSpec::L2Omega1SO);
}

#[test]
fn so5_has_no_element_of_type_2_3() {
    let p = Prime::new(P).unwrap();
    let ctx = GroupContext::new(Family::SO, 5, p).unwrap();
    let jt: JordanType = "2,3".parse().unwrap();
    assert!(!validate_partition_for_group(&jt, &ctx).unwrap());
}
