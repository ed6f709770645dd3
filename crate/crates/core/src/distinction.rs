//! The distinction pipeline: restriction reports (Clifford data), the
//! distinguished-twist profile of an irreducible (the multiplicity vector
//! m_alpha with its support X and twist stabilizer Z), lifting a
//! distinguished representation of the determinant-one group, and the
//! mechanical verification of the multiplicity formula
//!     dim Hom(pi_flat, 1) = (sum over X of m_alpha) / |Z|.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::chartab::{
    dixon_schneider, det_character_vector, inner_int, restrict, twist_by, u_fixed_dim,
    CharacterTable, ClassFunction,
};
use crate::classes::{fuse, ClassData, FusionMap};
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::gf::{char_group, AlgebraKind, CharGroup, LinearCharacter, QuadraticAlgebra};
use crate::grp::{build_g_family, det_alg_of, unipotent_radical, GFamily};

/// Enumeration/table ceilings threaded through every suite.
#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub order: u64,
    pub dixon_order: u64,
    pub dixon_classes: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            order: crate::grp::DEFAULT_ORDER_BUDGET,
            dixon_order: crate::chartab::DEFAULT_DIXON_ORDER,
            dixon_classes: crate::chartab::DEFAULT_DIXON_CLASSES,
        }
    }
}

/// Everything the distinction suites need for one (n, q, kind) case.
pub struct DistinctionContext {
    pub fam: GFamily,
    pub g_table: CharacterTable,
    pub gflat_table: CharacterTable,
    pub hplus_table: CharacterTable,
    pub h_data: Arc<ClassData>,
    pub hflat_data: Arc<ClassData>,
    pub fus_gflat_g: FusionMap,
    pub fus_h_g: FusionMap,
    pub fus_hflat_g: FusionMap,
    pub fus_hflat_gflat: FusionMap,
    pub fus_h_hplus: FusionMap,
    pub fus_gflat_hplus: FusionMap,
    pub seed: u64,
    pub budgets: Budgets,
}

impl DistinctionContext {
    pub fn build(alg: &Arc<QuadraticAlgebra>, n: u8, seed: u64, budgets: Budgets) -> Result<Self> {
        Self::build_with_cache(alg, n, seed, budgets, &crate::cache::DiskCache::disabled())
    }

    pub fn build_with_cache(
        alg: &Arc<QuadraticAlgebra>,
        n: u8,
        seed: u64,
        budgets: Budgets,
        cache: &crate::cache::DiskCache,
    ) -> Result<Self> {
        if n == 2 && alg.base.q > 2 {
            return Err(Error::DixonBudget(format!(
                "stretch: the determinant-one group of GL_4(F_{}) is outside the table budget",
                alg.base.q
            )));
        }
        let fam = build_g_family(alg, n, budgets.order)?;
        let g_data = ClassData::enumerate(&fam.g)?;
        let gflat_data = ClassData::enumerate(&fam.gflat)?;
        let hplus_data = ClassData::enumerate(&fam.hplus)?;
        let h_data = ClassData::enumerate(&fam.h)?;
        let hflat_data = ClassData::enumerate(&fam.hflat)?;
        let desc = alg.descriptor();
        let g_table = cache.table(&g_data, &desc, || {
            dixon_schneider(&g_data, seed, budgets.dixon_order, budgets.dixon_classes)
        })?;
        let gflat_table = cache.table(&gflat_data, &desc, || {
            dixon_schneider(&gflat_data, seed, budgets.dixon_order, budgets.dixon_classes)
        })?;
        let hplus_table = cache.table(&hplus_data, &desc, || {
            dixon_schneider(&hplus_data, seed, budgets.dixon_order, budgets.dixon_classes)
        })?;
        let fus_gflat_g = fuse(&gflat_data, &g_data)?;
        let fus_h_g = fuse(&h_data, &g_data)?;
        let fus_hflat_g = fuse(&hflat_data, &g_data)?;
        let fus_hflat_gflat = fuse(&hflat_data, &gflat_data)?;
        let fus_h_hplus = fuse(&h_data, &hplus_data)?;
        let fus_gflat_hplus = fuse(&gflat_data, &hplus_data)?;
        Ok(DistinctionContext {
            fam,
            g_table,
            gflat_table,
            hplus_table,
            h_data,
            hflat_data,
            fus_gflat_g,
            fus_h_g,
            fus_hflat_g,
            fus_hflat_gflat,
            fus_h_hplus,
            fus_gflat_hplus,
            seed,
            budgets,
        })
    }

    pub fn alg(&self) -> &Arc<QuadraticAlgebra> {
        &self.fam.alg
    }

    pub fn q(&self) -> u16 {
        self.fam.alg.base.q
    }

    /// Values of alpha(N(det_E .))) on the classes of an H-like group.
    pub fn alpha_norm_det_vector(
        &self,
        data: &ClassData,
        alpha: &LinearCharacter,
    ) -> Result<Vec<Cyclotomic>> {
        let alg = self.alg();
        data.classes
            .iter()
            .map(|c| {
                let de = det_alg_of(alg, self.fam.n, &c.rep).ok_or_else(|| {
                    Error::Invariant(format!("{}: element not in the embedded image", data.group_tag))
                })?;
                Ok(alpha.eval(alg, alg.norm(de) as u32))
            })
            .collect()
    }

    /// Values of chi(det_E .) on the classes of an H-like group, for chi a
    /// character of the algebra unit group.
    pub fn chi_det_vector(
        &self,
        data: &ClassData,
        chi: &LinearCharacter,
    ) -> Result<Vec<Cyclotomic>> {
        let alg = self.alg();
        data.classes
            .iter()
            .map(|c| {
                let de = det_alg_of(alg, self.fam.n, &c.rep).ok_or_else(|| {
                    Error::Invariant(format!("{}: element not in the embedded image", data.group_tag))
                })?;
                Ok(chi.eval(alg, de))
            })
            .collect()
    }
}

/// dim Hom_K(pi, chi) = <Res_K pi, chi> for a class function chi on K given
/// by per-class values.
pub fn hom_dim(
    pi: &ClassFunction,
    sub: &ClassData,
    fusion: &FusionMap,
    chi_values: &[Cyclotomic],
) -> Result<u64> {
    let res = restrict(pi, fusion, sub);
    let chi = ClassFunction { group_tag: sub.group_tag.clone(), values: chi_values.to_vec() };
    inner_int(sub, &res, &chi)
}

pub fn hom_dim_trivial(pi: &ClassFunction, sub: &ClassData, fusion: &FusionMap) -> Result<u64> {
    let chi = vec![Cyclotomic::one(1); sub.num_classes()];
    hom_dim(pi, sub, fusion, &chi)
}

/// Restriction data of one row of the ambient table to the normal
/// determinant-one subgroup: constituents, the common multiplicity, the
/// group of determinant twists fixing the row, and the stabilizer order.
#[derive(Debug, Clone, Serialize)]
pub struct RestrictionReport {
    pub pi: usize,
    pub constituents: Vec<(usize, u64)>,
    pub common_multiplicity: u64,
    /// indices of characters of F^x whose det-twist fixes pi
    pub twist_stabilizer: Vec<u32>,
    pub stabilizer_order: u64,
}

/// Clifford data for Res to the determinant-one subgroup; asserts the equal
/// multiplicity property and the index identity |I| = |Pi| * mult^2.
pub fn restriction_report(
    amb: &CharacterTable,
    sub: &CharacterTable,
    fus_sub_amb: &FusionMap,
    pi: usize,
) -> Result<RestrictionReport> {
    let res = restrict(amb.row(pi), fus_sub_amb, &sub.data);
    let mults = sub.decompose(&res)?;
    let mut constituents = Vec::new();
    for (i, &m) in mults.iter().enumerate() {
        if m < 0 {
            return Err(Error::Invariant("negative multiplicity in restriction".into()));
        }
        if m > 0 {
            constituents.push((i, m as u64));
        }
    }
    let common = constituents[0].1;
    if !constituents.iter().all(|&(_, m)| m == common) {
        return Err(Error::Invariant(format!(
            "restriction multiplicities not constant for row {}",
            pi
        )));
    }
    // I(pi): determinant twists fixing the row
    let q1 = (amb.data.field.q as u32 - 1).max(1);
    let mut twist_stabilizer = Vec::new();
    for t in 0..q1 {
        let roots = det_character_vector(&amb.data, t);
        let twisted = twist_by(amb.row(pi), &roots);
        match amb.find_row(&twisted) {
            Some(j) if j == pi => twist_stabilizer.push(t),
            Some(_) => {}
            None => return Err(Error::Invariant("twist left the table".into())),
        }
    }
    if twist_stabilizer.len() as u64 != constituents.len() as u64 * common * common {
        return Err(Error::Invariant(format!(
            "|I(pi)| = {} but |Pi| mult^2 = {} * {}^2",
            twist_stabilizer.len(),
            constituents.len(),
            common
        )));
    }
    let stabilizer_order = amb.data.order / constituents.len() as u64;
    Ok(RestrictionReport {
        pi,
        constituents,
        common_multiplicity: common,
        twist_stabilizer,
        stabilizer_order,
    })
}

/// The multiplicity vector m_alpha over the characters of F^x, its support
/// X, and the twist stabilizer Z of the row.
#[derive(Debug, Clone, Serialize)]
pub struct DistinctionProfile {
    pub pi: usize,
    pub m_alpha: Vec<u64>,
    pub x_set: Vec<u32>,
    pub z_group: Vec<u32>,
}

pub fn distinction_profile(ctx: &DistinctionContext, pi: usize) -> Result<DistinctionProfile> {
    let alg = ctx.alg();
    let alphas = char_group(alg, CharGroup::BaseUnits);
    let mut m_alpha = Vec::with_capacity(alphas.len());
    for alpha in &alphas {
        let chi = ctx.alpha_norm_det_vector(&ctx.h_data, alpha)?;
        m_alpha.push(hom_dim(ctx.g_table.row(pi), &ctx.h_data, &ctx.fus_h_g, &chi)?);
    }
    let x_set: Vec<u32> = (0..alphas.len() as u32).filter(|&t| m_alpha[t as usize] > 0).collect();
    let rr = restriction_report(&ctx.g_table, &ctx.gflat_table, &ctx.fus_gflat_g, pi)?;
    let z_group = rr.twist_stabilizer;
    // Z is a subgroup and X is a union of Z-cosets
    let q1 = (ctx.q() as u32 - 1).max(1);
    for &a in &z_group {
        for &b in &z_group {
            if !z_group.contains(&((a + b) % q1)) {
                return Err(Error::Invariant("twist stabilizer is not a subgroup".into()));
            }
        }
    }
    for &x in &x_set {
        for &z in &z_group {
            if !x_set.contains(&((x + z) % q1)) {
                return Err(Error::Invariant(
                    "distinguished twists are not a union of stabilizer cosets".into(),
                ));
            }
        }
    }
    Ok(DistinctionProfile { pi, m_alpha, x_set, z_group })
}

/// All rows of the ambient table lying over the given row of the
/// determinant-one subgroup's table.
pub fn lifts_of(ctx: &DistinctionContext, pi_flat: usize) -> Result<Vec<usize>> {
    let mut lifts = Vec::new();
    for pi in 0..ctx.g_table.num_rows() {
        let res = restrict(ctx.g_table.row(pi), &ctx.fus_gflat_g, &ctx.gflat_table.data);
        let m = inner_int(&ctx.gflat_table.data, &res, ctx.gflat_table.row(pi_flat))?;
        if m > 0 {
            lifts.push(pi);
        }
    }
    Ok(lifts)
}

/// Constructive lift: starting from any row over pi_flat, twist by the
/// inverse of a character with positive multiplicity to reach a row
/// distinguished by the full H. Returns (row, alpha index used).
pub fn lift_flat(ctx: &DistinctionContext, pi_flat: usize) -> Result<(usize, u32)> {
    let lhs = hom_dim_trivial(
        ctx.gflat_table.row(pi_flat),
        &ctx.hflat_data,
        &ctx.fus_hflat_gflat,
    )?;
    if lhs == 0 {
        return Err(Error::BadConfig(format!("row {} is not distinguished", pi_flat)));
    }
    let lifts = lifts_of(ctx, pi_flat)?;
    let pi = lifts[0];
    let prof = distinction_profile(ctx, pi)?;
    let alpha = *prof
        .x_set
        .first()
        .ok_or_else(|| Error::Invariant("no distinguishing character found for a lift".into()))?;
    // pi (x) (alpha^-1 o det)
    let q1 = (ctx.q() as u32 - 1).max(1);
    let inv_idx = (q1 - alpha) % q1;
    let roots = det_character_vector(&ctx.g_table.data, inv_idx);
    let twisted = twist_by(ctx.g_table.row(pi), &roots);
    let result = ctx
        .g_table
        .find_row(&twisted)
        .ok_or_else(|| Error::Invariant("twisted row not found".into()))?;
    let triv = vec![Cyclotomic::one(1); ctx.h_data.num_classes()];
    let check = hom_dim(ctx.g_table.row(result), &ctx.h_data, &ctx.fus_h_g, &triv)?;
    if check == 0 {
        return Err(Error::Invariant("constructed lift is not distinguished".into()));
    }
    Ok((result, alpha))
}

/// Decomposition over the intermediate group: all multiplicities must be 1
/// and exactly one constituent must be H-distinguished; returns its row.
pub fn hplus_unique(ctx: &DistinctionContext, pi: usize) -> Result<usize> {
    let fus_hplus_g = fuse(&ctx.hplus_table.data, &ctx.g_table.data)?;
    let res = restrict(ctx.g_table.row(pi), &fus_hplus_g, &ctx.hplus_table.data);
    let mults = ctx.hplus_table.decompose(&res)?;
    let mut distinguished = Vec::new();
    let triv = vec![Cyclotomic::one(1); ctx.h_data.num_classes()];
    for (j, &m) in mults.iter().enumerate() {
        if m == 0 {
            continue;
        }
        if m != 1 {
            return Err(Error::Invariant(format!(
                "multiplicity {} != 1 in the intermediate restriction",
                m
            )));
        }
        let d = hom_dim(ctx.hplus_table.row(j), &ctx.h_data, &ctx.fus_h_hplus, &triv)?;
        if d > 0 {
            distinguished.push(j);
        }
    }
    if distinguished.len() != 1 {
        return Err(Error::Invariant(format!(
            "expected exactly one distinguished constituent, found {}",
            distinguished.len()
        )));
    }
    Ok(distinguished[0])
}

/// Cuspidality of a row of the determinant-one table: no invariants under
/// the unipotent radical of any standard maximal parabolic.
pub fn is_cuspidal_flat(ctx: &DistinctionContext, pi_flat: usize) -> Result<bool> {
    let data = &ctx.gflat_table.data;
    let m = 2 * ctx.fam.n;
    for a in 1..m {
        let u = unipotent_radical(&data.field, m, a, ctx.budgets.order);
        if u_fixed_dim(ctx.gflat_table.row(pi_flat), data, &u)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One verified case of the multiplicity formula.
#[derive(Debug, Clone, Serialize)]
pub struct MainTheoremCase {
    pub pi_flat: usize,
    pub lhs: u64,
    pub cuspidal: bool,
    pub lifts: Vec<MainTheoremLift>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MainTheoremLift {
    pub pi: usize,
    pub m_alpha: Vec<u64>,
    pub x_set: Vec<u32>,
    pub z_order: u64,
    pub sum_m: u64,
    pub rhs: u64,
    pub hom_hflat_pi: u64,
    pub hplus_row: usize,
    pub constituent_count: u64,
}

#[derive(Debug, Serialize)]
pub struct MainTheoremReport {
    pub n: u8,
    pub q: u16,
    pub kind: AlgebraKind,
    pub distinguished_count: usize,
    pub cases: Vec<MainTheoremCase>,
    pub hplus_equals_g: bool,
    pub pass: bool,
}

/// Verifies the multiplicity formula for every distinguished row of the
/// determinant-one table, across every valid (H-distinguished) lift.
/// The per-row verification runs in parallel; all shared data is read-only.
pub fn verify_main_theorem(ctx: &DistinctionContext) -> Result<MainTheoremReport> {
    use rayon::prelude::*;
    let case_options: Vec<Option<MainTheoremCase>> = (0..ctx.gflat_table.num_rows())
        .into_par_iter()
        .map(|pi_flat| main_theorem_case(ctx, pi_flat))
        .collect::<Result<Vec<_>>>()?;
    let cases: Vec<MainTheoremCase> = case_options.into_iter().flatten().collect();
    Ok(MainTheoremReport {
        n: ctx.fam.n,
        q: ctx.q(),
        kind: ctx.alg().kind,
        distinguished_count: cases.len(),
        hplus_equals_g: ctx.fam.hplus.order == ctx.fam.g.order,
        pass: true,
        cases,
    })
}

/// Runs every assertion of the formula for one row of the determinant-one
/// table; None if the row is not distinguished.
fn main_theorem_case(ctx: &DistinctionContext, pi_flat: usize) -> Result<Option<MainTheoremCase>> {
    let triv_h = vec![Cyclotomic::one(1); ctx.h_data.num_classes()];
    {
        let lhs = hom_dim_trivial(
            ctx.gflat_table.row(pi_flat),
            &ctx.hflat_data,
            &ctx.fus_hflat_gflat,
        )?;
        if lhs == 0 {
            return Ok(None);
        }
        let cuspidal = is_cuspidal_flat(ctx, pi_flat)?;
        let lifts = lifts_of(ctx, pi_flat)?;
        let valid: Vec<usize> = lifts
            .iter()
            .copied()
            .filter_map(|pi| {
                hom_dim(ctx.g_table.row(pi), &ctx.h_data, &ctx.fus_h_g, &triv_h)
                    .map(|d| if d > 0 { Some(pi) } else { None })
                    .transpose()
            })
            .collect::<Result<Vec<usize>>>()?;
        if valid.is_empty() {
            return Err(Error::AssertionFailed(format!(
                "no distinguished lift exists for row {}",
                pi_flat
            )));
        }
        // the constructive lift must land among the valid lifts
        let (constructed, _) = lift_flat(ctx, pi_flat)?;
        if !valid.contains(&constructed) {
            return Err(Error::AssertionFailed("constructed lift is not valid".into()));
        }
        let mut lift_rows = Vec::new();
        for pi in valid {
            let prof = distinction_profile(ctx, pi)?;
            let sum_m: u64 = prof.m_alpha.iter().sum();
            let z = prof.z_group.len() as u64;
            if sum_m % z != 0 {
                return Err(Error::AssertionFailed(format!(
                    "sum of multiplicities {} not divisible by |Z| = {} at row {}",
                    sum_m, z, pi
                )));
            }
            let rhs = sum_m / z;
            if rhs != lhs {
                return Err(Error::AssertionFailed(format!(
                    "formula fails at pi_flat {} lift {}: lhs {} rhs {}",
                    pi_flat, pi, lhs, rhs
                )));
            }
            // dim Hom(pi|_(H_flat), 1) = sum_m = |Z| * lhs
            let hom_hflat_pi =
                hom_dim_trivial(ctx.g_table.row(pi), &ctx.hflat_data, &ctx.fus_hflat_g)?;
            if hom_hflat_pi != sum_m || hom_hflat_pi != z * lhs {
                return Err(Error::AssertionFailed(format!(
                    "intermediate identities fail at lift {}: {} vs {} vs {}",
                    pi,
                    hom_hflat_pi,
                    sum_m,
                    z * lhs
                )));
            }
            // intermediate group: unique distinguished constituent, and the
            // count of its determinant-one constituents equals |Z|
            let hplus_row = hplus_unique(ctx, pi)?;
            let res_plus = restrict(
                ctx.hplus_table.row(hplus_row),
                &ctx.fus_gflat_hplus,
                &ctx.gflat_table.data,
            );
            let mults = ctx.gflat_table.decompose(&res_plus)?;
            let count_plus = mults.iter().filter(|&&m| m > 0).count() as u64;
            let res_g =
                restrict(ctx.g_table.row(pi), &ctx.fus_gflat_g, &ctx.gflat_table.data);
            let mults_g = ctx.gflat_table.decompose(&res_g)?;
            let count_g = mults_g.iter().filter(|&&m| m > 0).count() as u64;
            if count_plus != count_g || count_g != z {
                return Err(Error::AssertionFailed(format!(
                    "constituent cardinalities disagree at lift {}: {} vs {} vs |Z| = {}",
                    pi, count_plus, count_g, z
                )));
            }
            // conjugation invariance: all constituents have the same invariants
            let dims: Vec<u64> = mults_g
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0)
                .map(|(theta, _)| {
                    hom_dim_trivial(
                        ctx.gflat_table.row(theta),
                        &ctx.hflat_data,
                        &ctx.fus_hflat_gflat,
                    )
                })
                .collect::<Result<Vec<u64>>>()?;
            if dims.iter().any(|&d| d != dims[0]) {
                return Err(Error::AssertionFailed(format!(
                    "constituents of the same lift have unequal invariants: {:?}",
                    dims
                )));
            }
            if cuspidal {
                // refinement: every multiplicity over X must be exactly 1
                for &x in &prof.x_set {
                    if prof.m_alpha[x as usize] != 1 {
                        return Err(Error::AssertionFailed(format!(
                            "cuspidal case has multiplicity {} > 1",
                            prof.m_alpha[x as usize]
                        )));
                    }
                }
                if lhs != prof.x_set.len() as u64 / z {
                    return Err(Error::AssertionFailed(
                        "cuspidal closed form |X|/|Z| fails".into(),
                    ));
                }
            }
            lift_rows.push(MainTheoremLift {
                pi,
                m_alpha: prof.m_alpha,
                x_set: prof.x_set,
                z_order: z,
                sum_m,
                rhs,
                hom_hflat_pi,
                hplus_row,
                constituent_count: count_g,
            });
        }
        // the right-hand side agrees across all valid lifts
        if lift_rows.iter().any(|l| l.rhs != lift_rows[0].rhs) {
            return Err(Error::AssertionFailed("rhs differs across lifts".into()));
        }
        Ok(Some(MainTheoremCase { pi_flat, lhs, cuspidal, lifts: lift_rows }))
    }
}

/// Clifford sweep over every row: equal multiplicities, the index identity,
/// multiplicity one, and the lifting bookkeeping.
#[derive(Debug, Serialize)]
pub struct CliffordReport {
    pub group: String,
    pub rows: Vec<RestrictionReport>,
    pub pass: bool,
}

pub fn verify_clifford(
    amb: &CharacterTable,
    sub: &CharacterTable,
    fus_sub_amb: &FusionMap,
) -> Result<CliffordReport> {
    let mut rows = Vec::new();
    let mut coverage = vec![0u64; sub.num_rows()];
    for pi in 0..amb.num_rows() {
        let rr = restriction_report(amb, sub, fus_sub_amb, pi)?;
        if rr.common_multiplicity != 1 {
            return Err(Error::AssertionFailed(format!(
                "restriction multiplicity {} != 1 at row {}",
                rr.common_multiplicity, pi
            )));
        }
        for &(theta, _) in &rr.constituents {
            coverage[theta] += 1;
        }
        rows.push(rr);
    }
    // each subgroup row is covered by exactly (q-1)/|Pi| ambient rows
    let q1 = (amb.data.field.q as u64 - 1).max(1);
    for theta in 0..sub.num_rows() {
        let lifts: Vec<&RestrictionReport> = rows
            .iter()
            .filter(|rr| rr.constituents.iter().any(|&(t, _)| t == theta))
            .collect();
        let expected = q1 / lifts[0].constituents.len() as u64;
        if coverage[theta] != expected {
            return Err(Error::AssertionFailed(format!(
                "row {} of {} covered {} times, expected {}",
                theta, sub.data.group_tag, coverage[theta], expected
            )));
        }
    }
    Ok(CliffordReport { group: amb.data.group_tag.clone(), rows, pass: true })
}

/// One entry of a multiplicity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub pi: usize,
    pub chi_index: u32,
    pub dim: u64,
}

#[derive(Debug, Serialize)]
pub struct GelfandReport {
    pub pair: String,
    pub max_dim: u64,
    pub violations: Vec<SweepEntry>,
    pub pass: bool,
}

/// Multiplicity-one sweep for the trivial character: dim Hom_H(pi, 1) <= 1.
pub fn verify_gelfand(ctx: &DistinctionContext) -> Result<GelfandReport> {
    let triv = vec![Cyclotomic::one(1); ctx.h_data.num_classes()];
    let mut max_dim = 0;
    let mut violations = Vec::new();
    for pi in 0..ctx.g_table.num_rows() {
        let d = hom_dim(ctx.g_table.row(pi), &ctx.h_data, &ctx.fus_h_g, &triv)?;
        max_dim = max_dim.max(d);
        if d > 1 {
            violations.push(SweepEntry { pi, chi_index: 0, dim: d });
        }
    }
    Ok(GelfandReport {
        pair: format!("({}, {})", ctx.g_table.data.group_tag, ctx.h_data.group_tag),
        max_dim,
        pass: violations.is_empty(),
        violations,
    })
}

/// Multiplicity-one sweep for cuspidal rows over every alpha in F^x-hat.
pub fn verify_prasad(ctx: &DistinctionContext) -> Result<GelfandReport> {
    let alg = ctx.alg();
    let alphas = char_group(alg, CharGroup::BaseUnits);
    let mut max_dim = 0;
    let mut violations = Vec::new();
    for pi in 0..ctx.g_table.num_rows() {
        let cusp = crate::chartab::is_cuspidal_gl(ctx.g_table.row(pi), &ctx.g_table.data, ctx.budgets.order)?;
        if !cusp.cuspidal {
            continue;
        }
        for (t, alpha) in alphas.iter().enumerate() {
            let chi = ctx.alpha_norm_det_vector(&ctx.h_data, alpha)?;
            let d = hom_dim(ctx.g_table.row(pi), &ctx.h_data, &ctx.fus_h_g, &chi)?;
            max_dim = max_dim.max(d);
            if d > 1 {
                violations.push(SweepEntry { pi, chi_index: t as u32, dim: d });
            }
        }
    }
    Ok(GelfandReport {
        pair: format!("({}, {}) cuspidal", ctx.g_table.data.group_tag, ctx.h_data.group_tag),
        max_dim,
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Serialize)]
pub struct ConjectureReport {
    pub case: String,
    pub kind: AlgebraKind,
    pub entries_checked: usize,
    pub max_dim: u64,
    pub witnesses: Vec<SweepEntry>,
    /// pass means "no multiplicity >= 2" and is only expected nonsplit
    pub pass: bool,
}

/// Full multiplicity sweep over every irreducible and every character of
/// the unit group of E; multiplicities >= 2 are recorded as witnesses.
/// Parallel over the table rows.
pub fn conjecture_sweep(ctx: &DistinctionContext) -> Result<ConjectureReport> {
    use rayon::prelude::*;
    let alg = ctx.alg();
    let group = match alg.kind {
        AlgebraKind::NonSplit => CharGroup::ExtUnits,
        AlgebraKind::Split => CharGroup::SplitUnits,
    };
    let chis = char_group(alg, group);
    let chi_vectors: Vec<Vec<Cyclotomic>> = chis
        .iter()
        .map(|chi| ctx.chi_det_vector(&ctx.h_data, chi))
        .collect::<Result<Vec<_>>>()?;
    let per_row: Vec<Vec<SweepEntry>> = (0..ctx.g_table.num_rows())
        .into_par_iter()
        .map(|pi| -> Result<Vec<SweepEntry>> {
            let mut entries = Vec::with_capacity(chi_vectors.len());
            for (t, vec) in chi_vectors.iter().enumerate() {
                let d = hom_dim(ctx.g_table.row(pi), &ctx.h_data, &ctx.fus_h_g, vec)?;
                entries.push(SweepEntry { pi, chi_index: t as u32, dim: d });
            }
            Ok(entries)
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<SweepEntry> = per_row.into_iter().flatten().collect();
    let checked = all.len();
    let max_dim = all.iter().map(|e| e.dim).max().unwrap_or(0);
    let witnesses: Vec<SweepEntry> = all.into_iter().filter(|e| e.dim > 1).collect();
    Ok(ConjectureReport {
        case: format!("({}, {})", ctx.g_table.data.group_tag, ctx.h_data.group_tag),
        kind: alg.kind,
        entries_checked: checked,
        max_dim,
        pass: witnesses.is_empty(),
        witnesses,
    })
}

/// JSON-lines records for audit output.
pub fn main_theorem_jsonl(report: &MainTheoremReport) -> Vec<serde_json::Value> {
    let mut lines = Vec::new();
    for case in &report.cases {
        for lift in &case.lifts {
            lines.push(json!({
                "assert": "main_formula",
                "n": report.n,
                "q": report.q,
                "kind": format!("{:?}", report.kind),
                "pi_flat": case.pi_flat,
                "lhs": case.lhs,
                "cuspidal": case.cuspidal,
                "pi": lift.pi,
                "m_alpha": lift.m_alpha,
                "X_pi": lift.x_set,
                "Z_pi_order": lift.z_order,
                "sum_m": lift.sum_m,
                "rhs": lift.rhs,
                "pass": case.lhs == lift.rhs,
            }));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FiniteField;

    fn ctx(q: u16, kind: AlgebraKind, n: u8) -> DistinctionContext {
        let base = match q {
            4 => FiniteField::extension(2, 2).unwrap(),
            9 => FiniteField::extension(3, 2).unwrap(),
            _ => FiniteField::prime(q).unwrap(),
        };
        let alg = Arc::new(QuadraticAlgebra::new(base, kind).unwrap());
        DistinctionContext::build(&alg, n, 0, Budgets::default()).unwrap()
    }

    #[test]
    fn gelfand_pair_nonsplit_q3() {
        let c = ctx(3, AlgebraKind::NonSplit, 1);
        let rep = verify_gelfand(&c).unwrap();
        assert!(rep.pass, "violations: {:?}", rep.violations);
        assert_eq!(rep.max_dim, 1);
    }

    #[test]
    fn split_torus_multiplicity_two_exists() {
        // the split Hom space is 2-dimensional for the degree-q constituent
        // of the flag permutation character
        let c = ctx(3, AlgebraKind::Split, 1);
        let rep = verify_gelfand(&c).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.max_dim, 2);
        // the witness is a degree-3 row
        assert!(rep.violations.iter().all(|v| c.g_table.degrees[v.pi] == 3));
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn clifford_gl2_sl2_q3() {
        let c = ctx(3, AlgebraKind::NonSplit, 1);
        let rep = verify_clifford(&c.g_table, &c.gflat_table, &c.fus_gflat_g).unwrap();
        assert!(rep.pass);
        // the degree-4 row is fixed by the sign twist: |I| = 2
        let sizes: Vec<usize> =
            rep.rows.iter().map(|r| r.twist_stabilizer.len()).collect();
        assert!(sizes.iter().any(|&s| s == 2));
        assert!(sizes.iter().any(|&s| s == 1));
        // the degree-2 cuspidal with |I| = 2 restricts to two linear rows
        for r in &rep.rows {
            if c.g_table.degrees[r.pi] == 2 && r.twist_stabilizer.len() == 2 {
                assert_eq!(r.constituents.len(), 2);
                for &(theta, _) in &r.constituents {
                    assert_eq!(c.gflat_table.degrees[theta], 1);
                }
            }
        }
    }

    #[test]
    fn main_theorem_q3_nonsplit() {
        let c = ctx(3, AlgebraKind::NonSplit, 1);
        let rep = verify_main_theorem(&c).unwrap();
        assert!(rep.pass);
        assert!(rep.hplus_equals_g);
        assert!(rep.distinguished_count > 0);
        // the hand-computed witness: the twisted degree-3 row over the
        // degree-3 determinant-one row gives lhs = 1 with X = {trivial}
        let st_case = rep
            .cases
            .iter()
            .find(|case| c.gflat_table.degrees[case.pi_flat] == 3)
            .expect("degree-3 case present");
        assert_eq!(st_case.lhs, 1);
        assert_eq!(st_case.lifts.len(), 1);
        assert_eq!(st_case.lifts[0].z_order, 1);
        assert_eq!(st_case.lifts[0].sum_m, 1);
    }

    #[test]
    fn main_theorem_q3_split() {
        let c = ctx(3, AlgebraKind::Split, 1);
        let rep = verify_main_theorem(&c).unwrap();
        assert!(rep.pass);
        // the degree-3 case has multiplicities exceeding one but the
        // formula still balances: lhs = 3 = (2 + 1)/1
        let st_case = rep
            .cases
            .iter()
            .find(|case| c.gflat_table.degrees[case.pi_flat] == 3)
            .expect("degree-3 case present");
        assert_eq!(st_case.lhs, 3);
        assert_eq!(st_case.lifts[0].sum_m, 3);
        assert_eq!(st_case.lifts[0].z_order, 1);
    }

    #[test]
    fn conjecture_sweep_q3_both_kinds() {
        let c = ctx(3, AlgebraKind::NonSplit, 1);
        let rep = conjecture_sweep(&c).unwrap();
        assert!(rep.pass, "witnesses: {:?}", rep.witnesses);
        assert_eq!(rep.entries_checked, 8 * 8);
        let cs = ctx(3, AlgebraKind::Split, 1);
        let rep_s = conjecture_sweep(&cs).unwrap();
        assert!(!rep_s.pass, "split control must find a witness");
    }

    #[test]
    fn prasad_cuspidal_q3() {
        for kind in [AlgebraKind::NonSplit, AlgebraKind::Split] {
            let c = ctx(3, kind, 1);
            let rep = verify_prasad(&c).unwrap();
            assert!(rep.pass);
            assert!(rep.max_dim <= 1);
        }
    }

    #[test]
    fn lift_construction_examples() {
        let c = ctx(3, AlgebraKind::NonSplit, 1);
        // trivial row lifts to the trivial row via the trivial character
        let triv_flat = (0..c.gflat_table.num_rows())
            .find(|&i| {
                c.gflat_table.degrees[i] == 1
                    && c.gflat_table.rows[i].values.iter().all(|v| {
                        v.as_integer() == Some(num::BigInt::from(1))
                    })
            })
            .unwrap();
        let (pi, _) = lift_flat(&c, triv_flat).unwrap();
        assert_eq!(c.g_table.degrees[pi], 1);
        // every distinguished flat row admits a lift
        let mut count = 0;
        for pi_flat in 0..c.gflat_table.num_rows() {
            let lhs = hom_dim_trivial(
                c.gflat_table.row(pi_flat),
                &c.hflat_data,
                &c.fus_hflat_gflat,
            )
            .unwrap();
            if lhs > 0 {
                lift_flat(&c, pi_flat).unwrap();
                count += 1;
            }
        }
        assert!(count >= 3);
    }

    #[test]
    fn stretch_case_refused() {
        let base = FiniteField::prime(3).unwrap();
        let alg = Arc::new(QuadraticAlgebra::new(base, AlgebraKind::NonSplit).unwrap());
        match DistinctionContext::build(&alg, 2, 0, Budgets::default()) {
            Err(Error::DixonBudget(msg)) => assert!(msg.contains("stretch")),
            _ => panic!("n=2, q=3 must be refused as a stretch case"),
        }
    }
}
