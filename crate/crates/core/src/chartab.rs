//! Exact character tables and the class-function calculus: inner products,
//! restriction along fusions, induction with centralizer weights, twists by
//! linear characters, and the parabolic-invariants cuspidality test.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::classes::{ClassData, FusionMap};
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::grp::MatGroup;

pub use crate::dixon::{dixon_schneider, DEFAULT_DIXON_CLASSES, DEFAULT_DIXON_ORDER};

/// Exact cyclotomic values, one per conjugacy class of a named group.
#[derive(Clone, Debug)]
pub struct ClassFunction {
    pub group_tag: String,
    pub values: Vec<Cyclotomic>,
}

impl ClassFunction {
    pub fn constant(data: &ClassData, c: Cyclotomic) -> Self {
        ClassFunction { group_tag: data.group_tag.clone(), values: vec![c; data.num_classes()] }
    }

    pub fn trivial(data: &ClassData) -> Self {
        Self::constant(data, Cyclotomic::one(1))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.group_tag, other.group_tag);
        ClassFunction {
            group_tag: self.group_tag.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.group_tag, other.group_tag);
        ClassFunction {
            group_tag: self.group_tag.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    /// Pointwise product (the character of a tensor product).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.group_tag, other.group_tag);
        ClassFunction {
            group_tag: self.group_tag.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        ClassFunction {
            group_tag: self.group_tag.clone(),
            values: self.values.iter().map(|v| v.scale_int(n)).collect(),
        }
    }

    /// Complex conjugate values (the contragredient character).
    pub fn conj(&self) -> Self {
        ClassFunction {
            group_tag: self.group_tag.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.group_tag == other.group_tag
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.equals(b))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// (1/|G|) sum over classes of size * f * conj(g), as an exact cyclotomic.
pub fn inner_raw(data: &ClassData, f: &ClassFunction, g: &ClassFunction) -> Result<Cyclotomic> {
    if f.group_tag != data.group_tag || g.group_tag != data.group_tag {
        return Err(Error::GroupMismatch(format!(
            "inner product needs class functions on {}, got {} and {}",
            data.group_tag, f.group_tag, g.group_tag
        )));
    }
    let mut acc = Cyclotomic::zero(1);
    for (k, info) in data.classes.iter().enumerate() {
        let term = f.values[k].mul(&g.values[k].conj()).scale_int(info.size as i64);
        acc = acc.add(&term);
    }
    let inv_order = BigRational::new(BigInt::one(), BigInt::from(data.order));
    Ok(acc.scale(&inv_order))
}

/// Inner product as an exact rational; errors if the value is irrational.
pub fn inner(data: &ClassData, f: &ClassFunction, g: &ClassFunction) -> Result<BigRational> {
    inner_raw(data, f, g)?
        .as_rational()
        .ok_or_else(|| Error::Invariant("inner product not rational".into()))
}

/// Inner product known to be a non-negative integer (a Hom dimension).
pub fn inner_int(data: &ClassData, f: &ClassFunction, g: &ClassFunction) -> Result<u64> {
    let r = inner(data, f, g)?;
    if !r.denom().is_one() || r.numer().is_negative() {
        return Err(Error::Invariant(format!("expected a non-negative integer, got {}", r)));
    }
    u64::try_from(r.numer().clone())
        .map_err(|_| Error::Invariant("inner product too large".into()))
}

/// Restriction along a fusion map: the sub-class value is the value at the
/// fused ambient class.
pub fn restrict(chi: &ClassFunction, fusion: &FusionMap, sub: &ClassData) -> ClassFunction {
    assert_eq!(chi.group_tag, fusion.amb_tag);
    assert_eq!(sub.group_tag, fusion.sub_tag);
    ClassFunction {
        group_tag: sub.group_tag.clone(),
        values: fusion.map.iter().map(|&amb| chi.values[amb].clone()).collect(),
    }
}

/// Induction by the centralizer-weighted fusion formula:
/// (Ind chi)(g) = |C_G(g)| * sum over P-classes c fusing into [g] of
/// chi(c) / |C_P(c)|. Exact; every weight is an integer.
pub fn induce(
    chi: &ClassFunction,
    sub: &ClassData,
    fusion: &FusionMap,
    amb: &ClassData,
) -> Result<ClassFunction> {
    if chi.group_tag != sub.group_tag || fusion.sub_tag != sub.group_tag || fusion.amb_tag != amb.group_tag {
        return Err(Error::GroupMismatch("induction data mismatch".into()));
    }
    let mut values = vec![Cyclotomic::zero(1); amb.num_classes()];
    for (c, &target) in fusion.map.iter().enumerate() {
        let cg = amb.classes[target].centralizer;
        let cp = sub.classes[c].centralizer;
        if cg % cp != 0 {
            return Err(Error::Invariant(
                "subgroup centralizer does not divide ambient centralizer".into(),
            ));
        }
        let weight = (cg / cp) as i64;
        values[target] = values[target].add(&chi.values[c].scale_int(weight));
    }
    Ok(ClassFunction { group_tag: amb.group_tag.clone(), values })
}

/// Pointwise twist by per-class roots of unity.
pub fn twist_by(chi: &ClassFunction, roots: &[Cyclotomic]) -> ClassFunction {
    ClassFunction {
        group_tag: chi.group_tag.clone(),
        values: chi.values.iter().zip(roots).map(|(v, r)| v.mul(r)).collect(),
    }
}

/// Per-class values of alpha(det), for alpha the character of F_q^x with
/// the given index: zeta_(q-1)^(index * dlog det).
pub fn det_character_vector(data: &ClassData, alpha_index: u32) -> Vec<Cyclotomic> {
    let f = &data.field;
    let m = (f.q as u32 - 1).max(1);
    data.classes
        .iter()
        .map(|c| {
            let d = c.rep.det(f);
            Cyclotomic::root_of_unity(m, alpha_index as i64 * f.dlog(d) as i64)
        })
        .collect()
}

/// Full exact character table: class data plus one row per irreducible,
/// sorted by (degree, canonical value order).
pub struct CharacterTable {
    pub data: Arc<ClassData>,
    pub degrees: Vec<u64>,
    pub rows: Vec<ClassFunction>,
}

impl CharacterTable {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Exact orthogonality (rows and columns), degree consistency, and the
    /// sum-of-squares identity.
    pub fn validate(&self) -> Result<()> {
        let data = &self.data;
        let r = self.rows.len();
        if r != data.num_classes() {
            return Err(Error::Invariant("table is not square".into()));
        }
        let sum_sq: u64 = self.degrees.iter().map(|d| d * d).sum();
        if sum_sq != data.order {
            return Err(Error::Invariant(format!(
                "{}: sum of squared degrees {} != order {}",
                data.group_tag, sum_sq, data.order
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let deg = row.values[data.identity_class()]
                .as_integer()
                .ok_or_else(|| Error::Invariant("degree not an integer".into()))?;
            if deg != BigInt::from(self.degrees[i]) {
                return Err(Error::Invariant("identity value differs from degree".into()));
            }
            for j in i..r {
                let ip = inner(data, row, &self.rows[j])?;
                let expect = if i == j { BigRational::one() } else { BigRational::zero() };
                if ip != expect {
                    return Err(Error::Invariant(format!(
                        "{}: row orthogonality failed at ({}, {})",
                        data.group_tag, i, j
                    )));
                }
            }
        }
        // column orthogonality: sum over rows chi(k) conj(chi(l)) = delta_kl |C_G(g_k)|
        for k in 0..r {
            for lcol in k..r {
                let mut acc = Cyclotomic::zero(1);
                for row in &self.rows {
                    acc = acc.add(&row.values[k].mul(&row.values[lcol].conj()));
                }
                let expect = if k == lcol {
                    Cyclotomic::from_integer(1, data.classes[k].centralizer as i64)
                } else {
                    Cyclotomic::zero(1)
                };
                if !acc.equals(&expect) {
                    return Err(Error::Invariant(format!(
                        "{}: column orthogonality failed at ({}, {})",
                        data.group_tag, k, lcol
                    )));
                }
            }
        }
        Ok(())
    }

    /// Index of the row equal to the given class function, if any.
    pub fn find_row(&self, f: &ClassFunction) -> Option<usize> {
        self.rows.iter().position(|row| row.equals(f))
    }

    /// Row index of the contragredient (conjugate values) of the given row.
    pub fn contragredient_row(&self, row: usize) -> Option<usize> {
        self.find_row(&self.rows[row].conj())
    }

    /// Multiplicities of each irreducible in a (virtual) character; checks
    /// that the decomposition reassembles the input exactly.
    pub fn decompose(&self, f: &ClassFunction) -> Result<Vec<i64>> {
        let mut mults = Vec::with_capacity(self.rows.len());
        let mut rebuilt = ClassFunction::constant(&self.data, Cyclotomic::zero(1));
        for row in &self.rows {
            let m = inner(&self.data, f, row)?;
            if !m.denom().is_one() {
                return Err(Error::Invariant("non-integral multiplicity".into()));
            }
            let mi = i64::try_from(m.numer().clone())
                .map_err(|_| Error::Invariant("multiplicity too large".into()))?;
            mults.push(mi);
            if mi != 0 {
                rebuilt = rebuilt.add(&row.scale_int(mi));
            }
        }
        if !rebuilt.equals(f) {
            return Err(Error::Invariant(format!(
                "{}: decomposition leaves a nonzero residue",
                self.data.group_tag
            )));
        }
        Ok(mults)
    }

    /// The permutation character of G/P as a class function on G.
    pub fn regular_character(&self) -> ClassFunction {
        let mut values = vec![Cyclotomic::zero(1); self.data.num_classes()];
        values[self.data.identity_class()] = Cyclotomic::from_integer(1, self.data.order as i64);
        ClassFunction { group_tag: self.data.group_tag.clone(), values }
    }

    pub fn row(&self, i: usize) -> &ClassFunction {
        &self.rows[i]
    }

    /// JSON form: classes with sizes and centralizers, then one record per
    /// irreducible with its degree and integer coefficient vectors.
    pub fn to_json(&self) -> serde_json::Value {
        let classes: Vec<serde_json::Value> = self
            .data
            .classes
            .iter()
            .map(|c| {
                serde_json::json!({
                    "label": c.label,
                    "size": c.size,
                    "centralizer": c.centralizer,
                })
            })
            .collect();
        let irreducibles: Vec<serde_json::Value> = self
            .rows
            .iter()
            .zip(&self.degrees)
            .map(|(row, &deg)| {
                let values: Vec<serde_json::Value> = row
                    .values
                    .iter()
                    .map(|v| {
                        let coeffs = v
                            .integer_coeff_vector()
                            .map(|cv| cv.iter().map(|c| c.to_string()).collect::<Vec<_>>());
                        serde_json::json!({
                            "order": v.order(),
                            "coeffs": coeffs,
                        })
                    })
                    .collect();
                serde_json::json!({ "degree": deg, "values": values })
            })
            .collect();
        serde_json::json!({
            "group": self.data.group_tag,
            "order": self.data.order,
            "classes": classes,
            "irreducibles": irreducibles,
        })
    }

    /// Plain value matrix for eyeball comparison against published tables.
    pub fn gap_style(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} ({} classes)\n", self.data.group_tag, self.data.num_classes()));
        out.push_str("# class sizes: ");
        out.push_str(
            &self.data.classes.iter().map(|c| c.size.to_string()).collect::<Vec<_>>().join(" "),
        );
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.values.iter().map(|v| format!("{}", v)).collect();
            out.push_str(&line.join(" | "));
            out.push('\n');
        }
        out
    }
}

/// Summary of a cuspidality decision for one row.
#[derive(Debug, Clone, Serialize)]
pub struct CuspidalityReport {
    pub row: usize,
    pub cuspidal: bool,
    /// invariant dimensions per standard maximal parabolic shape
    pub u_fixed_dims: Vec<u64>,
}

/// dim of U-invariants: (1/|U|) sum over u of chi(u).
pub fn u_fixed_dim(
    chi: &ClassFunction,
    data: &ClassData,
    u: &Arc<MatGroup>,
) -> Result<u64> {
    let carrier = u.carrier()?;
    let mut acc = Cyclotomic::zero(1);
    for m in &carrier.elements {
        let k = data.class_of(m)?;
        acc = acc.add(&chi.values[k]);
    }
    let avg = acc.scale(&BigRational::new(BigInt::one(), BigInt::from(carrier.len() as u64)));
    let r = avg
        .as_rational()
        .ok_or_else(|| Error::Invariant("U-average not rational".into()))?;
    if !r.denom().is_one() || r.numer().is_negative() {
        return Err(Error::Invariant(format!("U-average not a dimension: {}", r)));
    }
    Ok(u64::try_from(r.numer().clone()).unwrap())
}

/// Cuspidality for a character of GL_m: no invariants under the unipotent
/// radical of any standard maximal parabolic.
pub fn is_cuspidal_gl(
    chi: &ClassFunction,
    data: &ClassData,
    budget: u64,
) -> Result<CuspidalityReport> {
    let m = data.classes[0].rep.n;
    let mut dims = Vec::new();
    for a in 1..m {
        let u = crate::grp::unipotent_radical(&data.field, m, a, budget);
        dims.push(u_fixed_dim(chi, data, &u)?);
    }
    Ok(CuspidalityReport { row: usize::MAX, cuspidal: dims.iter().all(|&d| d == 0), u_fixed_dims: dims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{fuse, ClassData};
    use crate::gf::{AlgebraKind, FiniteField, QuadraticAlgebra};
    use crate::grp::{build_g_family, gl_group, sl_group, DEFAULT_ORDER_BUDGET};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(q: u16) -> Arc<FiniteField> {
        match q {
            4 => FiniteField::extension(2, 2).unwrap(),
            9 => FiniteField::extension(3, 2).unwrap(),
            _ => FiniteField::prime(q).unwrap(),
        }
    }

    fn table_of(group: &Arc<crate::grp::MatGroup>) -> CharacterTable {
        let data = ClassData::enumerate(group).unwrap();
        dixon_schneider(&data, 0, DEFAULT_DIXON_ORDER, DEFAULT_DIXON_CLASSES).unwrap()
    }

    #[test]
    fn gl2_f3_degrees() {
        let t = table_of(&gl_group(&field(3), 2, DEFAULT_ORDER_BUDGET));
        assert_eq!(t.degrees, vec![1, 1, 2, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn sl2_f3_degrees() {
        let t = table_of(&sl_group(&field(3), 2, DEFAULT_ORDER_BUDGET));
        assert_eq!(t.degrees, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn gl1_table_is_linear_characters() {
        let t = table_of(&gl_group(&field(5), 1, DEFAULT_ORDER_BUDGET));
        assert_eq!(t.degrees, vec![1, 1, 1, 1]);
    }

    #[test]
    fn regular_character_decomposes_with_degrees() {
        let t = table_of(&gl_group(&field(3), 2, DEFAULT_ORDER_BUDGET));
        let reg = t.regular_character();
        let mults = t.decompose(&reg).unwrap();
        for (i, &m) in mults.iter().enumerate() {
            assert_eq!(m as u64, t.degrees[i]);
        }
    }

    #[test]
    fn restriction_to_determinant_one_subgroup_decomposes() {
        let f = field(3);
        let g = gl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let s = sl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let gt = table_of(&g);
        let st = table_of(&s);
        let fusion = fuse(&st.data, &gt.data).unwrap();
        for row in &gt.rows {
            let res = restrict(row, &fusion, &st.data);
            let mults = st.decompose(&res).unwrap();
            assert!(mults.iter().all(|&m| m >= 0));
            assert!(mults.iter().any(|&m| m > 0));
        }
    }

    #[test]
    fn frobenius_reciprocity_seeded_pairs() {
        let f = field(3);
        let g = gl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let s = sl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let gt = table_of(&g);
        let st = table_of(&s);
        let fusion = fuse(&st.data, &gt.data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let chi = &st.rows[rng.gen_range(0..st.rows.len())];
            let psi = &gt.rows[rng.gen_range(0..gt.rows.len())];
            let ind = induce(chi, &st.data, &fusion, &gt.data).unwrap();
            let lhs = inner(&gt.data, &ind, psi).unwrap();
            let res = restrict(psi, &fusion, &st.data);
            let rhs = inner(&st.data, chi, &res).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn induce_trivial_degree_is_index() {
        let f = field(3);
        let g = gl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let s = sl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let gd = ClassData::enumerate(&g).unwrap();
        let sd = ClassData::enumerate(&s).unwrap();
        let fusion = fuse(&sd, &gd).unwrap();
        let ind = induce(&ClassFunction::trivial(&sd), &sd, &fusion, &gd).unwrap();
        let deg = ind.values[0].as_integer().unwrap();
        assert_eq!(deg, num::BigInt::from(g.order / s.order));
    }

    #[test]
    fn twist_permutes_rows() {
        let t = table_of(&gl_group(&field(3), 2, DEFAULT_ORDER_BUDGET));
        // nontrivial character of F_3^x composed with det
        let roots = det_character_vector(&t.data, 1);
        for (i, row) in t.rows.iter().enumerate() {
            let twisted = twist_by(row, &roots);
            let j = t.find_row(&twisted).expect("twist of an irreducible is a row");
            assert_eq!(t.degrees[i], t.degrees[j]);
        }
        // trivial twist is the identity
        let triv = det_character_vector(&t.data, 0);
        for (i, row) in t.rows.iter().enumerate() {
            assert_eq!(t.find_row(&twist_by(row, &triv)), Some(i));
        }
    }

    #[test]
    fn cuspidal_count_gl2() {
        // q(q-1)/2 cuspidal irreducibles of degree q-1
        for q in [3u16, 5] {
            let t = table_of(&gl_group(&field(q), 2, DEFAULT_ORDER_BUDGET));
            let mut cuspidal = 0;
            for (i, row) in t.rows.iter().enumerate() {
                let rep = is_cuspidal_gl(row, &t.data, DEFAULT_ORDER_BUDGET).unwrap();
                if rep.cuspidal {
                    cuspidal += 1;
                    assert_eq!(t.degrees[i], (q - 1) as u64);
                }
            }
            assert_eq!(cuspidal, (q as usize) * (q as usize - 1) / 2);
        }
    }

    #[test]
    fn steinberg_has_two_split_torus_invariants() {
        // the degree-q constituent of the permutation character on the flag
        // space has a 2-dimensional space of diagonal-torus invariants;
        // independent oracle: count torus orbits on the projective line
        let f = field(3);
        let g = gl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let gt = table_of(&g);
        let alg = Arc::new(QuadraticAlgebra::new(Arc::clone(&f), AlgebraKind::Split).unwrap());
        let fam = build_g_family(&alg, 1, DEFAULT_ORDER_BUDGET).unwrap();
        let hd = ClassData::enumerate(&fam.h).unwrap();
        let fusion = fuse(&hd, &gt.data).unwrap();
        // Steinberg = the degree-3 row with trivial central character that
        // appears inside Ind_B(1); identify it as the degree-3 row whose
        // split-torus invariants are maximal
        let mut torus_dims = Vec::new();
        for (i, row) in gt.rows.iter().enumerate() {
            if gt.degrees[i] == 3 {
                let res = restrict(row, &fusion, &hd);
                torus_dims.push(inner_int(&hd, &res, &ClassFunction::trivial(&hd)).unwrap());
            }
        }
        torus_dims.sort();
        // orbit oracle: diag torus on P^1(F_3) has orbits {0}, {inf}, {1, 2},
        // so the permutation module has 3 invariants, 1 from the trivial
        // constituent and 2 from the q-dimensional one
        assert_eq!(torus_dims, vec![1, 2]);
    }

    #[test]
    fn e_units_restriction_of_degree3_rows() {
        // of the two 3-dimensional rows, the one inside Ind_B(1) has zero
        // invariants on the nonsplit torus, its det-twist has exactly one
        let f = field(3);
        let g = gl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let gt = table_of(&g);
        let alg = Arc::new(QuadraticAlgebra::new(Arc::clone(&f), AlgebraKind::NonSplit).unwrap());
        let fam = build_g_family(&alg, 1, DEFAULT_ORDER_BUDGET).unwrap();
        let hd = ClassData::enumerate(&fam.h).unwrap();
        let fusion = fuse(&hd, &gt.data).unwrap();
        let mut dims = Vec::new();
        for (i, row) in gt.rows.iter().enumerate() {
            if gt.degrees[i] == 3 {
                let res = restrict(row, &fusion, &hd);
                dims.push(inner_int(&hd, &res, &ClassFunction::trivial(&hd)).unwrap());
            }
        }
        dims.sort();
        assert_eq!(dims, vec![0, 1]);
    }

    #[test]
    fn dixon_budget_is_enforced() {
        let f = field(3);
        let p = crate::grp::build_parabolic(&f, (2, 2), DEFAULT_ORDER_BUDGET).unwrap();
        let data = ClassData::enumerate(&p.p).unwrap();
        match dixon_schneider(&data, 0, DEFAULT_DIXON_ORDER, DEFAULT_DIXON_CLASSES) {
            Err(crate::error::Error::DixonBudget(msg)) => assert!(msg.contains("186624")),
            other => panic!("expected a table budget refusal, got {:?}", other.map(|t| t.degrees)),
        }
    }

    #[test]
    fn dixon_is_deterministic_given_seed() {
        let f = field(5);
        let g = sl_group(&f, 2, DEFAULT_ORDER_BUDGET);
        let d = ClassData::enumerate(&g).unwrap();
        let t1 = dixon_schneider(&d, 0, DEFAULT_DIXON_ORDER, DEFAULT_DIXON_CLASSES).unwrap();
        let t2 = dixon_schneider(&d, 0, DEFAULT_DIXON_ORDER, DEFAULT_DIXON_CLASSES).unwrap();
        assert_eq!(t1.degrees, t2.degrees);
        for (a, b) in t1.rows.iter().zip(&t2.rows) {
            assert!(a.equals(b));
        }
        // a different seed can split differently but must produce the same table
        let t3 = dixon_schneider(&d, 12345, DEFAULT_DIXON_ORDER, DEFAULT_DIXON_CLASSES).unwrap();
        for (a, b) in t1.rows.iter().zip(&t3.rows) {
            assert!(a.equals(b));
        }
    }
}
