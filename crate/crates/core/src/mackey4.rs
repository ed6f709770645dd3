//! GL_4 restriction analysis: the two-sided Mackey computation for the
//! (2,2) parabolic, the single-coset computation for the (1,3) parabolic,
//! the multiplicity bound for irreducible (2,2) principal series, and the
//! vanishing statement for (1,3) series with cuspidal inducing data.

use std::sync::Arc;

use serde::Serialize;

use crate::chartab::{
    det_character_vector, dixon_schneider, inner, inner_int, is_cuspidal_gl, induce, restrict,
    CharacterTable, ClassFunction,
};
use crate::classes::{fuse, ClassData, FusionMap};
use crate::cyclo::Cyclotomic;
use crate::distinction::Budgets;
use crate::error::{Error, Result};
use crate::gf::{char_group, restrict_char_to_base, AlgebraKind, CharGroup, FiniteField, LinearCharacter, QuadraticAlgebra};
use crate::grp::{build_parabolic, det_alg_of, gl_group, h_group, MatGroup};
use crate::mat::Mat;

/// Inducing data for a principal series of GL_4.
#[derive(Debug, Clone, Serialize)]
pub enum PrincipalSeriesSpec {
    /// rows of the GL_2 table
    Shape22 { sigma1: usize, sigma2: usize },
    /// character index of F^x and a row of the GL_3 table
    Shape13 { mu: u32, tau: usize },
}

impl PrincipalSeriesSpec {
    /// deg Ind = [GL_4 : P] * (product of the inducing degrees)
    pub fn expected_degree(&self, q: u64, inducing_degrees: &[u64]) -> u64 {
        let index = match self {
            PrincipalSeriesSpec::Shape22 { .. } => {
                crate::grp::gl_order(4, q) / (crate::grp::gl_order(2, q).pow(2) * q.pow(4))
            }
            PrincipalSeriesSpec::Shape13 { .. } => {
                crate::grp::gl_order(4, q) / ((q - 1) * crate::grp::gl_order(3, q) * q.pow(3))
            }
        };
        index * inducing_degrees.iter().product::<u64>()
    }
}

/// Per-coset Hom dimensions on the Mackey side.
#[derive(Debug, Clone, Serialize)]
pub struct MackeySide {
    /// contribution through the subgroup fixing the standard plane (torus side)
    pub term_torus: u64,
    /// contribution through the embedded base-field group (diagonal side)
    pub term_diagonal: u64,
}

impl MackeySide {
    pub fn total(&self) -> u64 {
        self.term_torus + self.term_diagonal
    }
}

/// Shared data for the (2,2)-shape computations over one q.
pub struct MackeyContext {
    pub alg: Arc<QuadraticAlgebra>,
    pub gl2_table: CharacterTable,
    pub eunits_data: Arc<ClassData>,
    pub fus_eunits_gl2: FusionMap,
    /// algebra unit code of each E^x class representative
    pub eunit_codes: Vec<u32>,
    pub gl4_data: Arc<ClassData>,
    pub p22_data: Arc<ClassData>,
    pub fus_p22_gl4: FusionMap,
    /// per P-class: GL_2 classes of the two Levi blocks
    pub p22_levi: Vec<(usize, usize)>,
    pub h_data: Arc<ClassData>,
    pub fus_h_gl4: FusionMap,
    /// det over E of each H-class representative
    pub h_det: Vec<u32>,
    pub h_group: Arc<MatGroup>,
}

fn base_field(q: u16) -> Result<Arc<FiniteField>> {
    match q {
        4 => FiniteField::extension(2, 2),
        8 => FiniteField::extension(2, 3),
        9 => FiniteField::extension(3, 2),
        _ => FiniteField::prime(q),
    }
}

impl MackeyContext {
    pub fn build(q: u16, seed: u64, budgets: Budgets) -> Result<Self> {
        Self::build_with_cache(q, seed, budgets, &crate::cache::DiskCache::disabled())
    }

    pub fn build_with_cache(
        q: u16,
        seed: u64,
        budgets: Budgets,
        cache: &crate::cache::DiskCache,
    ) -> Result<Self> {
        if !matches!(q, 2 | 3) {
            return Err(Error::BadConfig(format!(
                "the GL_4 sweeps run at q in {{2, 3}}; got q = {}",
                q
            )));
        }
        let f = base_field(q)?;
        let alg = Arc::new(QuadraticAlgebra::new(Arc::clone(&f), AlgebraKind::NonSplit)?);
        let gl2 = gl_group(&f, 2, budgets.order);
        let gl2_data = ClassData::enumerate(&gl2)?;
        let gl2_table = cache.table(&gl2_data, &f.descriptor(), || {
            dixon_schneider(&gl2_data, seed, budgets.dixon_order, budgets.dixon_classes)
        })?;
        let eunits = h_group(&alg, 1, budgets.order);
        let eunits_data = ClassData::enumerate(&eunits)?;
        let fus_eunits_gl2 = fuse(&eunits_data, &gl2_data)?;
        let eunit_codes: Vec<u32> = eunits_data
            .classes
            .iter()
            .map(|c| det_alg_of(&alg, 1, &c.rep).expect("unit decodes"))
            .collect();
        let gl4_data = if q == 2 {
            let gl4 = gl_group(&f, 4, budgets.order);
            ClassData::enumerate(&gl4)?
        } else {
            ClassData::gl_parametrized(&f, 4)?
        };
        let parabolic = build_parabolic(&f, (2, 2), budgets.order)?;
        let p22_data = ClassData::enumerate(&parabolic.p)?;
        let fus_p22_gl4 = fuse(&p22_data, &gl4_data)?;
        let p22_levi: Vec<(usize, usize)> = p22_data
            .classes
            .iter()
            .map(|c| {
                let mut a = Mat::zero(2);
                let mut d = Mat::zero(2);
                for i in 0..2 {
                    for j in 0..2 {
                        a.set(i, j, c.rep.at(i, j));
                        d.set(i, j, c.rep.at(2 + i, 2 + j));
                    }
                }
                Ok((gl2_data.class_of(&a)?, gl2_data.class_of(&d)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let h = h_group(&alg, 2, budgets.order);
        let h_data = ClassData::enumerate(&h)?;
        let fus_h_gl4 = fuse(&h_data, &gl4_data)?;
        let h_det: Vec<u32> = h_data
            .classes
            .iter()
            .map(|c| det_alg_of(&alg, 2, &c.rep).expect("H element decodes"))
            .collect();
        Ok(MackeyContext {
            alg,
            gl2_table,
            eunits_data,
            fus_eunits_gl2,
            eunit_codes,
            gl4_data,
            p22_data,
            fus_p22_gl4,
            p22_levi,
            h_data,
            fus_h_gl4,
            h_det,
            h_group: h,
        })
    }

    pub fn q(&self) -> u16 {
        self.alg.base.q
    }

    /// All characters of E^x.
    pub fn ext_characters(&self) -> Vec<LinearCharacter> {
        char_group(&self.alg, CharGroup::ExtUnits)
    }

    /// chi evaluated at the unit codes of the E^x classes.
    fn chi_on_eunits(&self, chi: &LinearCharacter) -> Vec<Cyclotomic> {
        self.eunit_codes.iter().map(|&u| chi.eval(&self.alg, u)).collect()
    }

    /// chi(det_E .) on the H-classes.
    fn chi_det_on_h(&self, chi: &LinearCharacter) -> Vec<Cyclotomic> {
        self.h_det.iter().map(|&d| chi.eval(&self.alg, d)).collect()
    }

    /// The inflated character of sigma1 (x) sigma2 on the parabolic classes.
    pub fn p22_class_function(&self, sigma1: usize, sigma2: usize) -> ClassFunction {
        let values: Vec<Cyclotomic> = self
            .p22_levi
            .iter()
            .map(|&(ca, cd)| {
                self.gl2_table.rows[sigma1].values[ca]
                    .mul(&self.gl2_table.rows[sigma2].values[cd])
            })
            .collect();
        ClassFunction { group_tag: self.p22_data.group_tag.clone(), values }
    }

    /// Parabolically induced character on the GL_4 classes.
    pub fn induced_22(&self, sigma1: usize, sigma2: usize) -> Result<ClassFunction> {
        let chi_p = self.p22_class_function(sigma1, sigma2);
        induce(&chi_p, &self.p22_data, &self.fus_p22_gl4, &self.gl4_data)
    }

    /// Central character index of a GL_2 row: omega(g) for g the generator
    /// of F^x, as an exponent of zeta_(q-1).
    pub fn central_character_index(&self, sigma: usize) -> u32 {
        let f = &self.gl2_table.data.field;
        let q1 = (f.q as u32 - 1).max(1);
        if q1 == 1 {
            return 0;
        }
        let z = {
            let mut m = Mat::identity(2);
            m.set(0, 0, f.generator);
            m.set(1, 1, f.generator);
            m
        };
        let k = self.gl2_table.data.class_of(&z).expect("central element");
        let val = &self.gl2_table.rows[sigma].values[k];
        let deg = self.gl2_table.degrees[sigma] as i64;
        // omega(gen) is the root of unity val / deg
        for t in 0..q1 {
            let cand = Cyclotomic::root_of_unity(q1, t as i64).scale_int(deg);
            if cand.equals(val) {
                return t;
            }
        }
        panic!("central character not a root of unity");
    }
}

/// The two Mackey-side terms of the (2,2) restriction pairing.
pub fn mackey_rhs_22(
    ctx: &MackeyContext,
    sigma1: usize,
    sigma2: usize,
    chi: &LinearCharacter,
) -> Result<MackeySide> {
    // torus side: <Res_{E^x} sigma_i, chi>
    let chi_e = ClassFunction {
        group_tag: ctx.eunits_data.group_tag.clone(),
        values: ctx.chi_on_eunits(chi),
    };
    let r1 = restrict(&ctx.gl2_table.rows[sigma1], &ctx.fus_eunits_gl2, &ctx.eunits_data);
    let r2 = restrict(&ctx.gl2_table.rows[sigma2], &ctx.fus_eunits_gl2, &ctx.eunits_data);
    let t1 = inner_int(&ctx.eunits_data, &r1, &chi_e)?;
    let t2 = inner_int(&ctx.eunits_data, &r2, &chi_e)?;
    // diagonal side: <sigma1 . sigma2, (chi|_F) o det> on GL_2(F)
    let alpha = restrict_char_to_base(&ctx.alg, chi)?;
    let det_vec = det_character_vector(&ctx.gl2_table.data, alpha.index);
    let chi_det = ClassFunction {
        group_tag: ctx.gl2_table.data.group_tag.clone(),
        values: det_vec,
    };
    let prod = ctx.gl2_table.rows[sigma1].mul(&ctx.gl2_table.rows[sigma2]);
    let td = inner_int(&ctx.gl2_table.data, &prod, &chi_det)?;
    Ok(MackeySide { term_torus: t1 * t2, term_diagonal: td })
}

/// Restriction of the induced character to H, computed through the ambient
/// class data (no GL_4 character table involved).
pub fn restricted_induced_22(
    ctx: &MackeyContext,
    sigma1: usize,
    sigma2: usize,
) -> Result<ClassFunction> {
    let ind = ctx.induced_22(sigma1, sigma2)?;
    Ok(restrict(&ind, &ctx.fus_h_gl4, &ctx.h_data))
}

/// dim Hom_H(Ind, chi o det) computed directly on the H-classes.
pub fn direct_lhs_22(
    ctx: &MackeyContext,
    res_h: &ClassFunction,
    chi: &LinearCharacter,
) -> Result<u64> {
    let chi_h = ClassFunction {
        group_tag: ctx.h_data.group_tag.clone(),
        values: ctx.chi_det_on_h(chi),
    };
    inner_int(&ctx.h_data, res_h, &chi_h)
}

#[derive(Debug, Serialize)]
pub struct MackeyTriple {
    pub sigma1: usize,
    pub sigma2: usize,
    pub chi_index: u32,
    pub lhs: u64,
    pub term_torus: u64,
    pub term_diagonal: u64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MackeyReport {
    pub q: u16,
    pub triples: Vec<MackeyTriple>,
    pub degree_checks: usize,
    pub pass: bool,
}

/// Exhaustive oracle equivalence: the direct restriction pairing equals the
/// sum of the two Mackey terms for all (sigma1, sigma2, chi). The sweep is
/// parallel over (sigma1, sigma2); shared data is read-only.
pub fn verify_mackey_22(ctx: &MackeyContext) -> Result<MackeyReport> {
    use rayon::prelude::*;
    let chis = ctx.ext_characters();
    let r = ctx.gl2_table.num_rows();
    let pairs: Vec<(usize, usize)> =
        (0..r).flat_map(|s1| (0..r).map(move |s2| (s1, s2))).collect();
    let per_pair: Vec<Vec<MackeyTriple>> = pairs
        .par_iter()
        .map(|&(s1, s2)| -> Result<Vec<MackeyTriple>> {
            let ind = ctx.induced_22(s1, s2)?;
            // degree check: value at identity = [G : P] deg sigma1 deg sigma2
            let deg = ind.values[0].as_integer().expect("integer degree");
            let spec = PrincipalSeriesSpec::Shape22 { sigma1: s1, sigma2: s2 };
            let expect = num::BigInt::from(spec.expected_degree(
                ctx.q() as u64,
                &[ctx.gl2_table.degrees[s1], ctx.gl2_table.degrees[s2]],
            ));
            if deg != expect {
                return Err(Error::AssertionFailed(format!(
                    "induced degree {} != {} at ({}, {})",
                    deg, expect, s1, s2
                )));
            }
            let res_h = restrict(&ind, &ctx.fus_h_gl4, &ctx.h_data);
            let mut out = Vec::with_capacity(chis.len());
            for chi in &chis {
                let lhs = direct_lhs_22(ctx, &res_h, chi)?;
                let rhs = mackey_rhs_22(ctx, s1, s2, chi)?;
                out.push(MackeyTriple {
                    sigma1: s1,
                    sigma2: s2,
                    chi_index: chi.index,
                    lhs,
                    term_torus: rhs.term_torus,
                    term_diagonal: rhs.term_diagonal,
                    pass: lhs == rhs.total(),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let degree_checks = per_pair.len();
    let triples: Vec<MackeyTriple> = per_pair.into_iter().flatten().collect();
    let pass = triples.iter().all(|t| t.pass);
    Ok(MackeyReport { q: ctx.q(), triples, degree_checks, pass })
}

/// Class data for the two coset-side inducing subgroups of H, prebuilt so
/// the identity can be swept over many inducing pairs.
pub struct MackeySubgroups {
    pub b2e_data: Arc<ClassData>,
    pub fus_b2e_h: FusionMap,
    /// per class: GL_2(F) classes of the two embedded diagonal entries
    pub b2e_diag: Vec<(usize, usize)>,
    pub gl2f_data: Arc<ClassData>,
    pub fus_gl2f_h: FusionMap,
    /// per class: the GL_2(F) class of the underlying base-field matrix
    pub gl2f_class: Vec<usize>,
}

impl MackeySubgroups {
    pub fn build(ctx: &MackeyContext, budgets: Budgets) -> Result<Self> {
        let b2e = crate::grp::borel_2e(&ctx.alg, budgets.order);
        let b2e_data = ClassData::enumerate(&b2e)?;
        let fus_b2e_h = fuse(&b2e_data, &ctx.h_data)?;
        let b2e_diag: Vec<(usize, usize)> = b2e_data
            .classes
            .iter()
            .map(|c| {
                let native = c.rep.block_decode(&ctx.alg).expect("element of GL_2(E)");
                let a = ctx.alg.embed2x2(native.at(0, 0) as u32);
                let d = ctx.alg.embed2x2(native.at(1, 1) as u32);
                let mut am = Mat::zero(2);
                let mut dm = Mat::zero(2);
                am.e[..4].copy_from_slice(&a);
                dm.e[..4].copy_from_slice(&d);
                Ok((ctx.gl2_table.data.class_of(&am)?, ctx.gl2_table.data.class_of(&dm)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let gl2f = crate::grp::gl2_base_in_h(&ctx.alg, budgets.order);
        let gl2f_data = ClassData::enumerate(&gl2f)?;
        let fus_gl2f_h = fuse(&gl2f_data, &ctx.h_data)?;
        let gl2f_class: Vec<usize> = gl2f_data
            .classes
            .iter()
            .map(|c| {
                let native = c.rep.block_decode(&ctx.alg).expect("element of GL_2(E)");
                let mut g = Mat::zero(2);
                for i in 0..2 {
                    for j in 0..2 {
                        g.set(i, j, native.at(i, j));
                    }
                }
                ctx.gl2_table.data.class_of(&g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MackeySubgroups { b2e_data, fus_b2e_h, b2e_diag, gl2f_data, fus_gl2f_h, gl2f_class })
    }
}

/// Exact class-function form of the Mackey identity at one (sigma1, sigma2):
/// Res_H Ind_P = Ind from the plane stabilizer + Ind from the embedded
/// base-field group.
pub fn mackey_class_function_identity(
    ctx: &MackeyContext,
    subs: &MackeySubgroups,
    sigma1: usize,
    sigma2: usize,
) -> Result<bool> {
    let lhs = restricted_induced_22(ctx, sigma1, sigma2)?;
    let b2e_values: Vec<Cyclotomic> = subs
        .b2e_diag
        .iter()
        .map(|&(ca, cd)| {
            ctx.gl2_table.rows[sigma1].values[ca].mul(&ctx.gl2_table.rows[sigma2].values[cd])
        })
        .collect();
    let b2e_cf =
        ClassFunction { group_tag: subs.b2e_data.group_tag.clone(), values: b2e_values };
    let ind_torus = induce(&b2e_cf, &subs.b2e_data, &subs.fus_b2e_h, &ctx.h_data)?;
    let gl2f_values: Vec<Cyclotomic> = subs
        .gl2f_class
        .iter()
        .map(|&cg| {
            ctx.gl2_table.rows[sigma1].values[cg].mul(&ctx.gl2_table.rows[sigma2].values[cg])
        })
        .collect();
    let gl2f_cf =
        ClassFunction { group_tag: subs.gl2f_data.group_tag.clone(), values: gl2f_values };
    let ind_diag = induce(&gl2f_cf, &subs.gl2f_data, &subs.fus_gl2f_h, &ctx.h_data)?;
    Ok(lhs.equals(&ind_torus.add(&ind_diag)))
}

#[derive(Debug, Serialize)]
pub struct Prop42Entry {
    pub sigma1: usize,
    pub sigma2: usize,
    pub irreducible: bool,
    pub max_total: u64,
    pub total2_witnesses: Vec<u32>,
}

#[derive(Debug, Serialize)]
pub struct Prop42Report {
    pub q: u16,
    pub entries: Vec<Prop42Entry>,
    /// every multiplicity-2 instance had sigma1 = sigma2 (reducible induction)
    pub mechanism_confirmed: bool,
    pub reducible_witness_found: bool,
    pub pass: bool,
}

/// Multiplicity bound for irreducible (2,2) principal series, with the
/// proof mechanism checked on every multiplicity-2 instance.
pub fn check_prop_42(ctx: &MackeyContext) -> Result<Prop42Report> {
    let chis = ctx.ext_characters();
    let r = ctx.gl2_table.num_rows();
    let mut entries = Vec::new();
    let mut mechanism = true;
    let mut reducible_witness = false;
    let mut pass = true;
    for s1 in 0..r {
        for s2 in 0..r {
            let ind = ctx.induced_22(s1, s2)?;
            let norm = inner(&ctx.gl4_data, &ind, &ind)?;
            let irreducible = norm == num::BigRational::from_integer(1.into());
            let res_h = restrict(&ind, &ctx.fus_h_gl4, &ctx.h_data);
            let mut max_total = 0;
            let mut witnesses = Vec::new();
            for chi in &chis {
                let total = direct_lhs_22(ctx, &res_h, chi)?;
                max_total = max_total.max(total);
                if total >= 2 {
                    witnesses.push(chi.index);
                    if s1 != s2 {
                        mechanism = false;
                    }
                    if irreducible {
                        pass = false;
                    } else {
                        reducible_witness = true;
                    }
                }
            }
            if irreducible && max_total > 1 {
                pass = false;
            }
            entries.push(Prop42Entry {
                sigma1: s1,
                sigma2: s2,
                irreducible,
                max_total,
                total2_witnesses: witnesses,
            });
        }
    }
    Ok(Prop42Report {
        q: ctx.q(),
        entries,
        mechanism_confirmed: mechanism,
        reducible_witness_found: reducible_witness,
        pass: pass && mechanism,
    })
}

/// Strong multiplicity-one for the pair (GL_2(F_q), E^x):
/// <Res sigma, chi> <= 1 for every row and character.
pub fn strong_gelfand_e_units(q: u16, seed: u64, budgets: Budgets) -> Result<bool> {
    let f = base_field(q)?;
    let alg = Arc::new(QuadraticAlgebra::new(Arc::clone(&f), AlgebraKind::NonSplit)?);
    let gl2 = gl_group(&f, 2, budgets.order);
    let gl2_data = ClassData::enumerate(&gl2)?;
    let gl2_table = dixon_schneider(&gl2_data, seed, budgets.dixon_order, budgets.dixon_classes)?;
    let eunits = h_group(&alg, 1, budgets.order);
    let eunits_data = ClassData::enumerate(&eunits)?;
    let fusion = fuse(&eunits_data, &gl2_data)?;
    let codes: Vec<u32> = eunits_data
        .classes
        .iter()
        .map(|c| det_alg_of(&alg, 1, &c.rep).expect("unit decodes"))
        .collect();
    for chi in char_group(&alg, CharGroup::ExtUnits) {
        let chi_cf = ClassFunction {
            group_tag: eunits_data.group_tag.clone(),
            values: codes.iter().map(|&u| chi.eval(&alg, u)).collect(),
        };
        for row in &gl2_table.rows {
            let res = restrict(row, &fusion, &eunits_data);
            if inner_int(&eunits_data, &res, &chi_cf)? > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Shared data for the (1,3)-shape computations.
pub struct P13Context {
    pub alg: Arc<QuadraticAlgebra>,
    pub gl3_table: CharacterTable,
    pub cuspidal_rows: Vec<usize>,
    pub hp13_data: Arc<ClassData>,
    /// per class of H cap P13: the scalar a, the GL_3 class of the block D
    pub hp13_parts: Vec<(u16, usize)>,
    pub hp13_det: Vec<u32>,
    /// the E-block unipotent subgroup inside H cap P13
    pub n_block: Arc<MatGroup>,
}

impl P13Context {
    pub fn build(q: u16, seed: u64, budgets: Budgets) -> Result<Self> {
        Self::build_with_cache(q, seed, budgets, &crate::cache::DiskCache::disabled())
    }

    pub fn build_with_cache(
        q: u16,
        seed: u64,
        budgets: Budgets,
        cache: &crate::cache::DiskCache,
    ) -> Result<Self> {
        if !matches!(q, 2 | 3) {
            return Err(Error::BadConfig(format!(
                "the GL_4 sweeps run at q in {{2, 3}}; got q = {}",
                q
            )));
        }
        let f = base_field(q)?;
        let alg = Arc::new(QuadraticAlgebra::new(Arc::clone(&f), AlgebraKind::NonSplit)?);
        let gl3 = gl_group(&f, 3, budgets.order);
        let gl3_data = ClassData::enumerate(&gl3)?;
        let gl3_table = cache.table(&gl3_data, &f.descriptor(), || {
            dixon_schneider(&gl3_data, seed, budgets.dixon_order, budgets.dixon_classes)
        })?;
        let cuspidal_rows: Vec<usize> = (0..gl3_table.num_rows())
            .filter(|&i| {
                is_cuspidal_gl(&gl3_table.rows[i], &gl3_table.data, budgets.order)
                    .map(|r| r.cuspidal)
                    .unwrap_or(false)
            })
            .collect();
        let hp13 = hp13_group(&alg, budgets.order);
        let hp13_data = ClassData::enumerate(&hp13)?;
        let hp13_parts: Vec<(u16, usize)> = hp13_data
            .classes
            .iter()
            .map(|c| {
                let a = c.rep.at(0, 0);
                let mut d = Mat::zero(3);
                for i in 0..3 {
                    for j in 0..3 {
                        d.set(i, j, c.rep.at(1 + i, 1 + j));
                    }
                }
                Ok((a, gl3_data.class_of(&d)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let hp13_det: Vec<u32> = hp13_data
            .classes
            .iter()
            .map(|c| det_alg_of(&alg, 2, &c.rep).expect("element of GL_2(E)"))
            .collect();
        let n_block = n_block_group(&alg, budgets.order);
        Ok(P13Context { alg, gl3_table, cuspidal_rows, hp13_data, hp13_parts, hp13_det, n_block })
    }

    pub fn q(&self) -> u16 {
        self.alg.base.q
    }

    /// Inflated mu (x) tau on the classes of H cap P13.
    pub fn inflated(&self, mu: &LinearCharacter, tau: usize) -> ClassFunction {
        let values: Vec<Cyclotomic> = self
            .hp13_parts
            .iter()
            .map(|&(a, d_class)| {
                mu.eval(&self.alg, a as u32).mul(&self.gl3_table.rows[tau].values[d_class])
            })
            .collect();
        ClassFunction { group_tag: self.hp13_data.group_tag.clone(), values }
    }

    /// dim Hom over H cap P13 of (mu (x) tau, chi o det); the full Hom space
    /// dimension by the single-coset Mackey identity.
    pub fn hom_13(&self, mu: &LinearCharacter, tau: usize, chi: &LinearCharacter) -> Result<u64> {
        let inflated = self.inflated(mu, tau);
        let chi_cf = ClassFunction {
            group_tag: self.hp13_data.group_tag.clone(),
            values: self.hp13_det.iter().map(|&d| chi.eval(&self.alg, d)).collect(),
        };
        inner_int(&self.hp13_data, &inflated, &chi_cf)
    }

    /// The invariant average of tau over the E-block unipotent subgroup:
    /// zero exactly when tau has no invariants there.
    pub fn n_block_average(&self, tau: usize) -> Result<u64> {
        let carrier = self.n_block.carrier()?;
        let mut acc = Cyclotomic::zero(1);
        for m in &carrier.elements {
            // the 3x3 lower-right block inside GL_3
            let mut u3 = Mat::identity(3);
            u3.set(0, 1, m.at(1, 2));
            u3.set(0, 2, m.at(1, 3));
            let k = self.gl3_table.data.class_of(&u3)?;
            acc = acc.add(&self.gl3_table.rows[tau].values[k]);
        }
        let avg = acc.scale(&num::BigRational::new(
            num::BigInt::from(1),
            num::BigInt::from(carrier.len() as u64),
        ));
        let r = avg.as_rational().ok_or_else(|| Error::Invariant("average not rational".into()))?;
        if !num::Signed::is_negative(r.numer()) && r.denom() == &num::BigInt::from(1) {
            Ok(u64::try_from(r.numer().clone()).unwrap())
        } else {
            Err(Error::Invariant(format!("block average not a dimension: {}", r)))
        }
    }
}

/// H cap P13 = upper-triangular GL_2(E) elements with base-field scalar in
/// the corner, realized as embedded 4x4 matrices.
pub fn hp13_group(alg: &Arc<QuadraticAlgebra>, budget: u64) -> Arc<MatGroup> {
    assert_eq!(alg.kind, AlgebraKind::NonSplit);
    let ext = Arc::clone(alg.ext.as_ref().unwrap());
    let base = Arc::clone(&alg.base);
    let q = base.q as u64;
    let order = (q - 1) * (q * q - 1) * q * q;
    let alg1 = Arc::clone(alg);
    let alg2 = Arc::clone(alg);
    crate::grp::custom_group(
        format!("HcapP13({})", base.q),
        Arc::clone(&base),
        4,
        order,
        budget,
        move |m: &Mat| match m.block_decode(&alg1) {
            Some(native) => {
                let a = native.at(0, 0);
                native.at(1, 0) == 0
                    && a != 0
                    && (a as u32) < alg1.base.q as u32
                    && native.at(1, 1) != 0
            }
            None => false,
        },
        move || {
            let mut out = Vec::new();
            for a in 1..alg2.base.q {
                for d in 1..ext.q {
                    for b in 0..ext.q {
                        let native = Mat::from_rows(2, &[&[a, b], &[0, d]]);
                        out.push(native.block_embed(&alg2));
                    }
                }
            }
            Ok(out)
        },
        vec![],
    )
}

/// The displayed unipotent subgroup: identity plus an E-block in the upper
/// right corner.
pub fn n_block_group(alg: &Arc<QuadraticAlgebra>, budget: u64) -> Arc<MatGroup> {
    assert_eq!(alg.kind, AlgebraKind::NonSplit);
    let ext = Arc::clone(alg.ext.as_ref().unwrap());
    let base = Arc::clone(&alg.base);
    let order = ext.q as u64;
    let alg1 = Arc::clone(alg);
    let alg2 = Arc::clone(alg);
    crate::grp::custom_group(
        format!("NblockE({})", base.q),
        base,
        4,
        order,
        budget,
        move |m: &Mat| match m.block_decode(&alg1) {
            Some(native) => native.at(0, 0) == 1 && native.at(1, 1) == 1 && native.at(1, 0) == 0,
            None => false,
        },
        move || {
            let mut out = Vec::new();
            for b in 0..ext.q {
                let native = Mat::from_rows(2, &[&[1, b], &[0, 1]]);
                out.push(native.block_embed(&alg2));
            }
            Ok(out)
        },
        vec![],
    )
}

#[derive(Debug, Serialize)]
pub struct Prop44Entry {
    pub mu_index: u32,
    pub tau: usize,
    pub tau_cuspidal: bool,
    pub n_average: u64,
    pub max_hom: u64,
}

#[derive(Debug, Serialize)]
pub struct Prop44Report {
    pub q: u16,
    pub entries: Vec<Prop44Entry>,
    pub control_witness: Option<(u32, usize, u32, u64)>,
    pub pass: bool,
}

/// Vanishing for cuspidal inducing data on the (1,3) parabolic, plus a
/// non-cuspidal control with a nonzero Hom space.
pub fn check_prop_44(ctx: &P13Context) -> Result<Prop44Report> {
    let mus = char_group(&ctx.alg, CharGroup::BaseUnits);
    let chis = char_group(&ctx.alg, CharGroup::ExtUnits);
    let mut entries = Vec::new();
    let mut control = None;
    let mut pass = true;
    for tau in 0..ctx.gl3_table.num_rows() {
        let cuspidal = ctx.cuspidal_rows.contains(&tau);
        let n_avg = ctx.n_block_average(tau)?;
        if cuspidal && n_avg != 0 {
            pass = false;
        }
        for mu in &mus {
            let mut max_hom = 0;
            for chi in &chis {
                let h = ctx.hom_13(mu, tau, chi)?;
                max_hom = max_hom.max(h);
                if cuspidal && h != 0 {
                    pass = false;
                }
                if !cuspidal && h > 0 && control.is_none() {
                    control = Some((mu.index, tau, chi.index, h));
                }
            }
            entries.push(Prop44Entry {
                mu_index: mu.index,
                tau,
                tau_cuspidal: cuspidal,
                n_average: n_avg,
                max_hom,
            });
        }
    }
    if control.is_none() {
        pass = false;
    }
    Ok(Prop44Report { q: ctx.q(), entries, control_witness: control, pass })
}

/// Independent (1,3) cross-check at q = 2: the full induction to GL_4,
/// restricted to H and paired with chi o det, must agree with the
/// single-coset computation.
pub fn prop44_direct_crosscheck(q: u16, seed: u64, budgets: Budgets) -> Result<bool> {
    if q != 2 {
        return Err(Error::BadConfig("the direct (1,3) cross-check runs at q = 2".into()));
    }
    let ctx = P13Context::build(q, seed, budgets)?;
    let f = base_field(q)?;
    let gl4 = gl_group(&f, 4, budgets.order);
    let gl4_data = ClassData::enumerate(&gl4)?;
    let parabolic = build_parabolic(&f, (1, 3), budgets.order)?;
    let p13_data = ClassData::enumerate(&parabolic.p)?;
    let fus_p13_gl4 = fuse(&p13_data, &gl4_data)?;
    let gl3 = gl_group(&f, 3, budgets.order);
    let gl3_data = ClassData::enumerate(&gl3)?;
    let p13_parts: Vec<(u16, usize)> = p13_data
        .classes
        .iter()
        .map(|c| {
            let a = c.rep.at(0, 0);
            let mut d = Mat::zero(3);
            for i in 0..3 {
                for j in 0..3 {
                    d.set(i, j, c.rep.at(1 + i, 1 + j));
                }
            }
            Ok((a, gl3_data.class_of(&d)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let h = h_group(&ctx.alg, 2, budgets.order);
    let h_data = ClassData::enumerate(&h)?;
    let fus_h_gl4 = fuse(&h_data, &gl4_data)?;
    let h_det: Vec<u32> = h_data
        .classes
        .iter()
        .map(|c| det_alg_of(&ctx.alg, 2, &c.rep).expect("H element decodes"))
        .collect();
    // GL_3 table rows are indexed identically in ctx (same construction)
    let mus = char_group(&ctx.alg, CharGroup::BaseUnits);
    let chis = char_group(&ctx.alg, CharGroup::ExtUnits);
    for tau in 0..ctx.gl3_table.num_rows() {
        for mu in &mus {
            let values: Vec<Cyclotomic> = p13_parts
                .iter()
                .map(|&(a, dc)| {
                    mu.eval(&ctx.alg, a as u32).mul(&ctx.gl3_table.rows[tau].values[dc])
                })
                .collect();
            let chi_p = ClassFunction { group_tag: p13_data.group_tag.clone(), values };
            let ind = induce(&chi_p, &p13_data, &fus_p13_gl4, &gl4_data)?;
            let res_h = restrict(&ind, &fus_h_gl4, &h_data);
            for chi in &chis {
                let chi_cf = ClassFunction {
                    group_tag: h_data.group_tag.clone(),
                    values: h_det.iter().map(|&d| chi.eval(&ctx.alg, d)).collect(),
                };
                let direct = inner_int(&h_data, &res_h, &chi_cf)?;
                let via_coset = ctx.hom_13(mu, tau, chi)?;
                if direct != via_coset {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u16) -> MackeyContext {
        MackeyContext::build(q, 0, Budgets::default()).unwrap()
    }

    #[test]
    fn trivial_pair_gives_two() {
        let c = ctx(3);
        // identify the trivial row: degree 1 with all values 1
        let triv = (0..c.gl2_table.num_rows())
            .find(|&i| {
                c.gl2_table.rows[i]
                    .values
                    .iter()
                    .all(|v| v.as_integer() == Some(num::BigInt::from(1)))
            })
            .unwrap();
        let chi0 = LinearCharacter::new(&c.alg, CharGroup::ExtUnits, 0);
        let rhs = mackey_rhs_22(&c, triv, triv, &chi0).unwrap();
        assert_eq!(rhs.term_torus, 1);
        assert_eq!(rhs.term_diagonal, 1);
        let res_h = restricted_induced_22(&c, triv, triv).unwrap();
        assert_eq!(direct_lhs_22(&c, &res_h, &chi0).unwrap(), 2);
    }

    #[test]
    fn central_character_gate() {
        // term_torus != 0 forces chi|_F = central character of both sigmas
        let c = ctx(3);
        let chis = c.ext_characters();
        for s1 in 0..c.gl2_table.num_rows() {
            for chi in &chis {
                let rhs = mackey_rhs_22(&c, s1, s1, chi).unwrap();
                if rhs.term_torus != 0 {
                    let alpha = restrict_char_to_base(&c.alg, chi).unwrap();
                    assert_eq!(alpha.index, c.central_character_index(s1));
                }
            }
        }
    }

    #[test]
    fn diagonal_term_is_contragredient_detection() {
        let c = ctx(3);
        let chis = c.ext_characters();
        for s1 in 0..c.gl2_table.num_rows() {
            for s2 in 0..c.gl2_table.num_rows() {
                for chi in &chis {
                    let rhs = mackey_rhs_22(&c, s1, s2, chi).unwrap();
                    // sigma2 = dual(sigma1) (x) chi|_F o det  iff  term = 1
                    let alpha = restrict_char_to_base(&c.alg, chi).unwrap();
                    let roots = det_character_vector(&c.gl2_table.data, alpha.index);
                    let expected = c
                        .gl2_table
                        .find_row(&crate::chartab::twist_by(
                            &c.gl2_table.rows[s1].conj(),
                            &roots,
                        ))
                        .unwrap();
                    assert_eq!(rhs.term_diagonal == 1, expected == s2, "({}, {})", s1, s2);
                    assert!(rhs.term_diagonal <= 1);
                }
            }
        }
    }

    #[test]
    fn mackey_oracle_q2_exhaustive() {
        let c = ctx(2);
        let rep = verify_mackey_22(&c).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.triples.len(), 9 * 3); // 3 rows squared, 3 characters
    }

    #[test]
    fn class_function_identity_q2_and_q3() {
        // exact class-function equality of the two restriction routes, for
        // every inducing pair at both field sizes
        for q in [2u16, 3] {
            let c = ctx(q);
            let subs = MackeySubgroups::build(&c, Budgets::default()).unwrap();
            for s1 in 0..c.gl2_table.num_rows() {
                for s2 in 0..c.gl2_table.num_rows() {
                    assert!(
                        mackey_class_function_identity(&c, &subs, s1, s2).unwrap(),
                        "q = {}, pair ({}, {})",
                        q,
                        s1,
                        s2
                    );
                }
            }
        }
    }

    #[test]
    fn expected_degree_matches_parabolic_index() {
        let spec22 = PrincipalSeriesSpec::Shape22 { sigma1: 0, sigma2: 0 };
        assert_eq!(spec22.expected_degree(3, &[1, 1]), 130);
        assert_eq!(spec22.expected_degree(2, &[2, 1]), 35 * 2);
        let spec13 = PrincipalSeriesSpec::Shape13 { mu: 0, tau: 0 };
        assert_eq!(spec13.expected_degree(2, &[1]), 15);
        assert_eq!(spec13.expected_degree(3, &[16]), 40 * 16);
    }

    #[test]
    fn hp13_order_formula() {
        for q in [2u16, 3] {
            let f = base_field(q).unwrap();
            let alg = Arc::new(QuadraticAlgebra::new(f, AlgebraKind::NonSplit).unwrap());
            let g = hp13_group(&alg, 200_000);
            let q64 = q as u64;
            assert_eq!(g.order, (q64 - 1) * (q64 * q64 - 1) * q64 * q64);
            assert_eq!(g.carrier().unwrap().len() as u64, g.order);
            // sits inside the (1,3) parabolic
            let p13 = build_parabolic(&base_field(q).unwrap(), (1, 3), 1_000_000).unwrap();
            for m in &g.carrier().unwrap().elements {
                assert!(p13.p.contains(m));
            }
        }
    }

    #[test]
    fn gl3_cuspidal_counts() {
        let budgets = Budgets::default();
        let c2 = P13Context::build(2, 0, budgets).unwrap();
        assert_eq!(c2.cuspidal_rows.len(), 2); // (q^3 - q)/3 = 2
        for &t in &c2.cuspidal_rows {
            assert_eq!(c2.gl3_table.degrees[t], 3); // (q-1)(q^2-1)
        }
        let c3 = P13Context::build(3, 0, budgets).unwrap();
        assert_eq!(c3.cuspidal_rows.len(), 8);
        for &t in &c3.cuspidal_rows {
            assert_eq!(c3.gl3_table.degrees[t], 16);
        }
    }
}
