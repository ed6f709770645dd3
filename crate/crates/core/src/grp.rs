//! Concrete matrix groups and the subgroup configurations the verification
//! suites run over: G = GL_2n(F), its determinant-one subgroup, the unit
//! group of the quadratic algebra acting through 2x2 blocks, the block
//! parabolics of GL_4 with their Levis and unipotent radicals, and the
//! derived subgroups (norm-one part, determinant-coset closure).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{AlgebraKind, FiniteField, QuadraticAlgebra};
use crate::mat::Mat;

/// Default ceiling on materialized carrier size.
pub const DEFAULT_ORDER_BUDGET: u64 = 200_000;

/// Default number of random pairs in the closure spot-check.
pub const DEFAULT_CLOSURE_ROUNDS: usize = 1000;

/// |GL_n(q)| = prod_{i<n} (q^n - q^i)
pub fn gl_order(n: u32, q: u64) -> u64 {
    let qn = q.pow(n);
    (0..n).map(|i| qn - q.pow(i)).product()
}

type Membership = Box<dyn Fn(&Mat) -> bool + Send + Sync>;
type Enumerator = Box<dyn Fn() -> Result<Vec<Mat>> + Send + Sync>;

/// A finite matrix group over a small field, with a membership predicate,
/// an exact order, optional generators, and a lazily materialized carrier.
pub struct MatGroup {
    pub tag: String,
    pub field: Arc<FiniteField>,
    pub n: u8,
    pub order: u64,
    pub budget: u64,
    membership: Membership,
    enumerator: Enumerator,
    pub gens: Vec<Mat>,
    carrier: OnceLock<std::result::Result<Arc<Carrier>, String>>,
}

/// Materialized element list with constant-time index lookup.
pub struct Carrier {
    pub elements: Vec<Mat>,
    pub index: HashMap<u128, u32>,
}

impl Carrier {
    fn new(mut elements: Vec<Mat>) -> Self {
        elements.sort_by_key(|m| m.key());
        elements.dedup();
        let index = elements.iter().enumerate().map(|(i, m)| (m.key(), i as u32)).collect();
        Carrier { elements, index }
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.index.contains_key(&m.key())
    }

    pub fn index_of(&self, m: &Mat) -> Option<u32> {
        self.index.get(&m.key()).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl MatGroup {
    pub fn contains(&self, m: &Mat) -> bool {
        (self.membership)(m)
    }

    /// The materialized element list; errors beyond the order budget.
    /// First materialization is synchronized; afterwards reads are lock-free.
    pub fn carrier(&self) -> Result<Arc<Carrier>> {
        let slot = self.carrier.get_or_init(|| {
            if self.order > self.budget {
                return Err(format!("order {} over budget {}", self.order, self.budget));
            }
            match (self.enumerator)() {
                Ok(elems) => {
                    let c = Carrier::new(elems);
                    if c.len() as u64 != self.order {
                        return Err(format!(
                            "carrier size {} disagrees with order {} for {}",
                            c.len(),
                            self.order,
                            self.tag
                        ));
                    }
                    Ok(Arc::new(c))
                }
                Err(e) => Err(e.to_string()),
            }
        });
        match slot {
            Ok(c) => Ok(Arc::clone(c)),
            Err(msg) => {
                if msg.contains("over budget") {
                    Err(Error::BudgetExceeded { order: self.order, budget: self.budget })
                } else {
                    Err(Error::Invariant(msg.clone()))
                }
            }
        }
    }

    pub fn has_carrier_within_budget(&self) -> bool {
        self.order <= self.budget
    }

    /// Product/inverse closure on seeded random pairs from the carrier.
    pub fn closure_spot_check(&self, seed: u64, rounds: usize) -> Result<()> {
        let carrier = self.carrier()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = &self.field;
        for _ in 0..rounds {
            let a = carrier.elements[rng.gen_range(0..carrier.len())];
            let b = carrier.elements[rng.gen_range(0..carrier.len())];
            let prod = a.mul(&b, f);
            if !self.contains(&prod) || !carrier.contains(&prod) {
                return Err(Error::Invariant(format!("{}: product escapes the group", self.tag)));
            }
            let inv = a.inverse(f).ok_or_else(|| Error::Invariant("singular member".into()))?;
            if !self.contains(&inv) || !carrier.contains(&inv) {
                return Err(Error::Invariant(format!("{}: inverse escapes the group", self.tag)));
            }
        }
        Ok(())
    }
}

/// Builds a group from an explicit membership predicate and enumerator.
#[allow(clippy::too_many_arguments)]
pub fn custom_group(
    tag: String,
    field: Arc<FiniteField>,
    n: u8,
    order: u64,
    budget: u64,
    membership: impl Fn(&Mat) -> bool + Send + Sync + 'static,
    enumerator: impl Fn() -> Result<Vec<Mat>> + Send + Sync + 'static,
    gens: Vec<Mat>,
) -> Arc<MatGroup> {
    Arc::new(MatGroup {
        tag,
        field,
        n,
        order,
        budget,
        membership: Box::new(membership),
        enumerator: Box::new(enumerator),
        gens,
        carrier: OnceLock::new(),
    })
}

/// Enumerate GL_n(field) by building matrices column by column, keeping each
/// column outside the span of the previous ones.
fn enumerate_gl(field: &Arc<FiniteField>, n: u8) -> Vec<Mat> {
    let q = field.q as u32;
    let dim = n as usize;
    let count = q.pow(dim as u32);
    // all vectors as code -> coordinates
    let decode = |code: u32| -> Vec<u16> {
        let mut v = vec![0u16; dim];
        let mut c = code;
        for d in v.iter_mut() {
            *d = (c % q) as u16;
            c /= q;
        }
        v
    };
    let mut out = Vec::new();
    let mut partial: Vec<Vec<u16>> = Vec::new();
    fn rec(
        field: &FiniteField,
        n: usize,
        count: u32,
        decode: &dyn Fn(u32) -> Vec<u16>,
        partial: &mut Vec<Vec<u16>>,
        out: &mut Vec<Mat>,
    ) {
        if partial.len() == n {
            let mut m = Mat::zero(n as u8);
            for (j, col) in partial.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    m.set(i, j, v);
                }
            }
            out.push(m);
            return;
        }
        'cand: for code in 1..count {
            let v = decode(code);
            // v independent of partial: row reduce the candidate against them
            let mut rows: Vec<Vec<u16>> = partial.to_vec();
            rows.push(v.clone());
            let rank = crate::mat::rref(&mut rows, field);
            if rank != partial.len() + 1 {
                continue 'cand;
            }
            partial.push(v);
            rec(field, n, count, decode, partial, out);
            partial.pop();
        }
    }
    rec(field, dim, count, &decode, &mut partial, &mut out);
    out
}

/// Standard generators: all elementary transvections plus one diagonal
/// carrying the field generator.
fn gl_generators(field: &Arc<FiniteField>, n: u8) -> Vec<Mat> {
    let mut gens = Vec::new();
    for i in 0..n as usize {
        for j in 0..n as usize {
            if i != j {
                for c in field.units() {
                    let mut m = Mat::identity(n);
                    m.set(i, j, c);
                    gens.push(m);
                }
            }
        }
    }
    if field.q > 2 {
        let mut d = Mat::identity(n);
        d.set(0, 0, field.generator);
        gens.push(d);
    }
    gens
}

pub fn gl_group(field: &Arc<FiniteField>, n: u8, budget: u64) -> Arc<MatGroup> {
    let order = gl_order(n as u32, field.q as u64);
    let f = Arc::clone(field);
    let f2 = Arc::clone(field);
    Arc::new(MatGroup {
        tag: format!("GL({},{})", n, field.q),
        field: Arc::clone(field),
        n,
        order,
        budget,
        membership: Box::new(move |m| m.n == n && m.is_invertible(&f)),
        enumerator: Box::new(move || Ok(enumerate_gl(&f2, n))),
        gens: gl_generators(field, n),
        carrier: OnceLock::new(),
    })
}

pub fn sl_group(field: &Arc<FiniteField>, n: u8, budget: u64) -> Arc<MatGroup> {
    let order = gl_order(n as u32, field.q as u64) / (field.q as u64 - 1);
    let f = Arc::clone(field);
    let f2 = Arc::clone(field);
    let mut gens: Vec<Mat> = Vec::new();
    for i in 0..n as usize {
        for j in 0..n as usize {
            if i != j {
                for c in field.units() {
                    let mut m = Mat::identity(n);
                    m.set(i, j, c);
                    gens.push(m);
                }
            }
        }
    }
    Arc::new(MatGroup {
        tag: format!("SL({},{})", n, field.q),
        field: Arc::clone(field),
        n,
        order,
        budget,
        membership: Box::new(move |m| m.n == n && m.det(&f) == 1),
        enumerator: Box::new(move || Ok(enumerate_gl(&f2, n).into_iter().filter(|m| m.det(&f2) == 1).collect())),
        gens,
        carrier: OnceLock::new(),
    })
}

/// Everything build_G_family produces, plus the algebra for later decoding.
pub struct GFamily {
    pub alg: Arc<QuadraticAlgebra>,
    pub n: u8,
    pub g: Arc<MatGroup>,
    pub gflat: Arc<MatGroup>,
    pub h: Arc<MatGroup>,
    pub hflat: Arc<MatGroup>,
    pub hplus: Arc<MatGroup>,
}

impl GFamily {
    /// Determinant over the algebra of an embedded H-element, as an algebra
    /// unit code; None if the matrix is not in the embedded image.
    pub fn det_alg(&self, m: &Mat) -> Option<u32> {
        det_alg_of(&self.alg, self.n, m)
    }
}

/// det over E of a 2n x 2n matrix in the embedded image of GL_n(E).
pub fn det_alg_of(alg: &QuadraticAlgebra, n: u8, m: &Mat) -> Option<u32> {
    match alg.kind {
        AlgebraKind::NonSplit => {
            let native = m.block_decode(alg)?;
            let ext = alg.ext.as_ref().unwrap();
            Some(native_det(&native, ext) as u32)
        }
        AlgebraKind::Split => {
            // split embedding is block diagonal (A, B); check off blocks vanish
            let half = n as usize;
            for i in 0..half {
                for j in 0..half {
                    if m.at(i, half + j) != 0 || m.at(half + i, j) != 0 {
                        return None;
                    }
                }
            }
            let mut a = Mat::zero(n);
            let mut b = Mat::zero(n);
            for i in 0..half {
                for j in 0..half {
                    a.set(i, j, m.at(i, j));
                    b.set(i, j, m.at(half + i, half + j));
                }
            }
            Some(alg.split_code(a.det(&alg.base), b.det(&alg.base)))
        }
    }
}

fn native_det(m: &Mat, f: &FiniteField) -> u16 {
    m.det(f)
}

/// Split-kind H embedding: diag(A, B) with A, B n x n over the base field.
fn split_block_diag(a: &Mat, b: &Mat, n: u8) -> Mat {
    let mut m = Mat::zero(2 * n);
    for i in 0..n as usize {
        for j in 0..n as usize {
            m.set(i, j, a.at(i, j));
            m.set(n as usize + i, n as usize + j, b.at(i, j));
        }
    }
    m
}

/// The image of GL_n(E) in GL_2n(F): blockwise regular representation for
/// the field case, block-diagonal GL_n x GL_n for the split case.
pub fn h_group(alg: &Arc<QuadraticAlgebra>, n: u8, budget: u64) -> Arc<MatGroup> {
    let base = Arc::clone(&alg.base);
    let q = base.q as u64;
    let (order, tag) = match alg.kind {
        AlgebraKind::NonSplit => {
            (gl_order(n as u32, q * q), format!("H({},{},nonsplit)", n, base.q))
        }
        AlgebraKind::Split => {
            let o = gl_order(n as u32, q);
            (o * o, format!("H({},{},split)", n, base.q))
        }
    };
    let alg1 = Arc::clone(alg);
    let alg2 = Arc::clone(alg);
    let n_usize = n as usize;
    let membership: Membership = match alg.kind {
        AlgebraKind::NonSplit => Box::new(move |m: &Mat| {
            if m.n as usize != 2 * n_usize {
                return false;
            }
            match m.block_decode(&alg1) {
                Some(native) => {
                    let ext = alg1.ext.as_ref().unwrap();
                    native_det(&native, ext) != 0
                }
                None => false,
            }
        }),
        AlgebraKind::Split => Box::new(move |m: &Mat| {
            if m.n as usize != 2 * n_usize {
                return false;
            }
            det_alg_of(&alg1, n, m).map(|d| alg1.is_unit(d)).unwrap_or(false)
        }),
    };
    let enumerator: Enumerator = match alg.kind {
        AlgebraKind::NonSplit => Box::new(move || {
            let ext = alg2.ext.as_ref().unwrap();
            let native = enumerate_gl(ext, n);
            Ok(native.iter().map(|m| m.block_embed(&alg2)).collect())
        }),
        AlgebraKind::Split => Box::new(move || {
            let gln = enumerate_gl(&alg2.base, n);
            let mut out = Vec::with_capacity(gln.len() * gln.len());
            for a in &gln {
                for b in &gln {
                    out.push(split_block_diag(a, b, n));
                }
            }
            Ok(out)
        }),
    };
    // generators: images of GL_n(E) generators
    let gens: Vec<Mat> = match alg.kind {
        AlgebraKind::NonSplit => {
            let ext = alg.ext.as_ref().unwrap();
            gl_generators(ext, n).iter().map(|m| m.block_embed(alg)).collect()
        }
        AlgebraKind::Split => {
            let id = Mat::identity(n);
            let mut gens = Vec::new();
            for g in gl_generators(&base, n) {
                gens.push(split_block_diag(&g, &id, n));
                gens.push(split_block_diag(&id, &g, n));
            }
            gens
        }
    };
    Arc::new(MatGroup {
        tag,
        field: base,
        n: 2 * n,
        order,
        budget,
        membership,
        enumerator,
        gens,
        carrier: OnceLock::new(),
    })
}

/// H_flat = H intersect SL_2n = { g in GL_n(E) : N(det g) = 1 }.
pub fn hflat_group(alg: &Arc<QuadraticAlgebra>, n: u8, budget: u64) -> Arc<MatGroup> {
    let h = h_group(alg, n, u64::MAX); // predicate only; carrier built from our own enumerator
    let base = Arc::clone(&alg.base);
    let q = base.q as u64;
    let order = h.order / (q - 1).max(1);
    let tag = format!("Hflat({},{},{:?})", n, base.q, alg.kind);
    let base2 = Arc::clone(&base);
    let h2 = Arc::clone(&h);
    let h3 = Arc::clone(&h);
    let membership: Membership = Box::new(move |m: &Mat| h2.contains(m) && m.det(&base2) == 1);
    let base3 = Arc::clone(&base);
    let enumerator: Enumerator = Box::new(move || {
        let carrier = h3.carrier()?;
        Ok(carrier.elements.iter().copied().filter(|m| m.det(&base3) == 1).collect())
    });
    // generators: det-one subgroup of GL_n(E) is generated by SL_n(E)
    // transvections together with one diagonal of norm-one determinant.
    let gens: Vec<Mat> = match alg.kind {
        AlgebraKind::NonSplit => {
            let ext = alg.ext.as_ref().unwrap();
            let mut gens = Vec::new();
            for i in 0..n as usize {
                for j in 0..n as usize {
                    if i != j {
                        for c in ext.units() {
                            let mut m = Mat::identity(n);
                            m.set(i, j, c);
                            gens.push(m.block_embed(alg));
                        }
                    }
                }
            }
            // circle generator gamma^(q-1) placed in the first diagonal slot
            let circle = ext.pow(ext.generator, (base.q - 1) as u64);
            let mut d = Mat::identity(n);
            d.set(0, 0, circle);
            gens.push(d.block_embed(alg));
            gens
        }
        AlgebraKind::Split => {
            let id = Mat::identity(n);
            let mut gens = Vec::new();
            for i in 0..n as usize {
                for j in 0..n as usize {
                    if i != j {
                        for c in base.units() {
                            let mut m = Mat::identity(n);
                            m.set(i, j, c);
                            gens.push(split_block_diag(&m, &id, n));
                            gens.push(split_block_diag(&id, &m, n));
                        }
                    }
                }
            }
            // (x, x^-1) on the first diagonal slots of the two blocks
            let mut a = Mat::identity(n);
            a.set(0, 0, base.generator);
            let mut b = Mat::identity(n);
            b.set(0, 0, base.inv(base.generator));
            gens.push(split_block_diag(&a, &b, n));
            gens
        }
    };
    Arc::new(MatGroup {
        tag,
        field: base,
        n: 2 * n,
        order,
        budget,
        membership,
        enumerator,
        gens,
        carrier: OnceLock::new(),
    })
}

/// H+ = (det-one subgroup) . H, realized by the determinant-coset test:
/// g in H+ iff det(g) lies in the norm image of det(H). Over a finite field
/// the norm is onto, so H+ = G; the structure is still verified, not assumed.
pub fn hplus_group(
    alg: &Arc<QuadraticAlgebra>,
    n: u8,
    g: &Arc<MatGroup>,
    budget: u64,
) -> Arc<MatGroup> {
    let base = Arc::clone(&alg.base);
    // norm image of det(H) inside F^x: generated by N(det values)
    let norm_image = {
        let mut image = std::collections::BTreeSet::new();
        // det of GL_n(E) is all of E^x; its norm image is generated by N(gamma)
        let gen_unit = match alg.kind {
            AlgebraKind::NonSplit => alg.ext.as_ref().unwrap().generator as u32,
            AlgebraKind::Split => alg.split_code(base.generator, 1),
        };
        let mut x = alg.alg_one();
        loop {
            image.insert(alg.norm(x));
            x = alg.alg_mul(x, gen_unit);
            if x == alg.alg_one() {
                break;
            }
        }
        image
    };
    let index_in_fx = (base.q as u64 - 1) / norm_image.len() as u64;
    let order = g.order / index_in_fx;
    let tag = format!("Hplus({},{},{:?})", n, base.q, alg.kind);
    let base2 = Arc::clone(&base);
    let ni = norm_image.clone();
    let g2 = Arc::clone(g);
    let g3 = Arc::clone(g);
    let ni2 = norm_image.clone();
    let base3 = Arc::clone(&base);
    Arc::new(MatGroup {
        tag,
        field: Arc::clone(&base),
        n: 2 * n,
        order,
        budget,
        membership: Box::new(move |m: &Mat| g2.contains(m) && ni.contains(&m.det(&base2))),
        enumerator: Box::new(move || {
            let carrier = g3.carrier()?;
            Ok(carrier
                .elements
                .iter()
                .copied()
                .filter(|m| ni2.contains(&m.det(&base3)))
                .collect())
        }),
        gens: g.gens.clone(),
        carrier: OnceLock::new(),
    })
}

/// Builds the whole diagram for one (n, algebra) configuration.
pub fn build_g_family(alg: &Arc<QuadraticAlgebra>, n: u8, budget: u64) -> Result<GFamily> {
    if !matches!(n, 1 | 2) {
        return Err(Error::BadConfig(format!("n must be 1 or 2, got {}", n)));
    }
    if alg.base.q > 9 {
        return Err(Error::BadConfig(format!("q = {} out of the desk-scale range", alg.base.q)));
    }
    let field = Arc::clone(&alg.base);
    let g = gl_group(&field, 2 * n, budget);
    let gflat = sl_group(&field, 2 * n, budget);
    let h = h_group(alg, n, budget);
    let hflat = hflat_group(alg, n, budget);
    let hplus = hplus_group(alg, n, &g, budget);
    Ok(GFamily { alg: Arc::clone(alg), n, g, gflat, h, hflat, hplus })
}

/// Parabolic data for GL_4: the parabolic, its Levi, and its unipotent radical.
pub struct Parabolic {
    pub shape: (u8, u8),
    pub p: Arc<MatGroup>,
    pub levi: Arc<MatGroup>,
    pub radical: Arc<MatGroup>,
}

/// Block upper-triangular subgroup of GL_4 of shape (a, b), a + b = 4.
pub fn build_parabolic(field: &Arc<FiniteField>, shape: (u8, u8), budget: u64) -> Result<Parabolic> {
    let (a, b) = shape;
    if a + b != 4 {
        return Err(Error::BadConfig("parabolic shape must sum to 4".into()));
    }
    let q = field.q as u64;
    let p_order = gl_order(a as u32, q) * gl_order(b as u32, q) * q.pow((a * b) as u32);
    let levi_order = gl_order(a as u32, q) * gl_order(b as u32, q);
    let rad_order = q.pow((a * b) as u32);

    let au = a as usize;
    let is_block_upper = move |m: &Mat| -> bool {
        for i in au..4 {
            for j in 0..au {
                if m.at(i, j) != 0 {
                    return false;
                }
            }
        }
        true
    };
    let f1 = Arc::clone(field);
    let p_membership: Membership =
        Box::new(move |m: &Mat| m.n == 4 && is_block_upper(m) && m.is_invertible(&f1));
    let f2 = Arc::clone(field);
    let p_enumerator: Enumerator = Box::new(move || {
        let gla = enumerate_gl(&f2, a);
        let glb = enumerate_gl(&f2, b);
        let q = f2.q as u32;
        let cells = (a as usize) * (b as usize);
        let fill_count = q.pow(cells as u32);
        let mut out = Vec::new();
        for ma in &gla {
            for mb in &glb {
                for code in 0..fill_count {
                    let mut m = Mat::zero(4);
                    for i in 0..a as usize {
                        for j in 0..a as usize {
                            m.set(i, j, ma.at(i, j));
                        }
                    }
                    for i in 0..b as usize {
                        for j in 0..b as usize {
                            m.set(a as usize + i, a as usize + j, mb.at(i, j));
                        }
                    }
                    let mut c = code;
                    for i in 0..a as usize {
                        for j in 0..b as usize {
                            m.set(i, a as usize + j, (c % q) as u16);
                            c /= q;
                        }
                    }
                    out.push(m);
                }
            }
        }
        Ok(out)
    });
    // generators: Levi generators in each block plus one-parameter radical entries
    let mut gens = Vec::new();
    for g in gl_generators(field, a) {
        let mut m = Mat::identity(4);
        for i in 0..a as usize {
            for j in 0..a as usize {
                m.set(i, j, g.at(i, j));
            }
        }
        gens.push(m);
    }
    for g in gl_generators(field, b) {
        let mut m = Mat::identity(4);
        for i in 0..b as usize {
            for j in 0..b as usize {
                m.set(a as usize + i, a as usize + j, g.at(i, j));
            }
        }
        gens.push(m);
    }
    for i in 0..a as usize {
        for j in 0..b as usize {
            for c in field.units() {
                let mut m = Mat::identity(4);
                m.set(i, a as usize + j, c);
                gens.push(m);
            }
        }
    }
    let p = Arc::new(MatGroup {
        tag: format!("P{}{}({})", a, b, field.q),
        field: Arc::clone(field),
        n: 4,
        order: p_order,
        budget,
        membership: p_membership,
        enumerator: p_enumerator,
        gens,
        carrier: OnceLock::new(),
    });

    let f3 = Arc::clone(field);
    let is_levi = move |m: &Mat| -> bool {
        for i in 0..au {
            for j in au..4 {
                if m.at(i, j) != 0 {
                    return false;
                }
            }
        }
        for i in au..4 {
            for j in 0..au {
                if m.at(i, j) != 0 {
                    return false;
                }
            }
        }
        m.is_invertible(&f3)
    };
    let f4 = Arc::clone(field);
    let levi = Arc::new(MatGroup {
        tag: format!("L{}{}({})", a, b, field.q),
        field: Arc::clone(field),
        n: 4,
        order: levi_order,
        budget,
        membership: Box::new(move |m: &Mat| m.n == 4 && is_levi(m)),
        enumerator: Box::new(move || {
            let gla = enumerate_gl(&f4, a);
            let glb = enumerate_gl(&f4, b);
            let mut out = Vec::new();
            for ma in &gla {
                for mb in &glb {
                    let mut m = Mat::zero(4);
                    for i in 0..a as usize {
                        for j in 0..a as usize {
                            m.set(i, j, ma.at(i, j));
                        }
                    }
                    for i in 0..b as usize {
                        for j in 0..b as usize {
                            m.set(a as usize + i, a as usize + j, mb.at(i, j));
                        }
                    }
                    out.push(m);
                }
            }
            Ok(out)
        }),
        gens: vec![],
        carrier: OnceLock::new(),
    });

    let is_radical = move |m: &Mat| -> bool {
        for i in 0..4 {
            for j in 0..4 {
                let in_block = i < au && j >= au;
                if in_block {
                    continue;
                }
                let expected = u16::from(i == j);
                if m.at(i, j) != expected {
                    return false;
                }
            }
        }
        true
    };
    let f5 = Arc::clone(field);
    let radical = Arc::new(MatGroup {
        tag: format!("N{}{}({})", a, b, field.q),
        field: Arc::clone(field),
        n: 4,
        order: rad_order,
        budget,
        membership: Box::new(move |m: &Mat| m.n == 4 && is_radical(m)),
        enumerator: Box::new(move || {
            let q = f5.q as u32;
            let cells = (a as usize) * (b as usize);
            let fill_count = q.pow(cells as u32);
            let mut out = Vec::new();
            for code in 0..fill_count {
                let mut m = Mat::identity(4);
                let mut c = code;
                for i in 0..a as usize {
                    for j in 0..b as usize {
                        m.set(i, a as usize + j, (c % q) as u16);
                        c /= q;
                    }
                }
                out.push(m);
            }
            Ok(out)
        }),
        gens: vec![],
        carrier: OnceLock::new(),
    });

    Ok(Parabolic { shape, p, levi, radical })
}

/// Unipotent radical of the standard (a, m-a) parabolic of GL_m, m <= 4.
pub fn unipotent_radical(field: &Arc<FiniteField>, m: u8, a: u8, budget: u64) -> Arc<MatGroup> {
    let b = m - a;
    let q = field.q as u32;
    let cells = (a as usize) * (b as usize);
    let order = (q as u64).pow(cells as u32);
    let au = a as usize;
    let mu = m as usize;
    let f2 = Arc::clone(field);
    Arc::new(MatGroup {
        tag: format!("U{}|{}({},{})", a, b, m, field.q),
        field: Arc::clone(field),
        n: m,
        order,
        budget,
        membership: Box::new(move |mat: &Mat| {
            if mat.n != m {
                return false;
            }
            for i in 0..mu {
                for j in 0..mu {
                    let in_block = i < au && j >= au;
                    if i == j {
                        if mat.at(i, j) != 1 {
                            return false;
                        }
                    } else if !in_block && mat.at(i, j) != 0 {
                        return false;
                    }
                }
            }
            true
        }),
        enumerator: Box::new(move || {
            let qq = f2.q as u32;
            let fill_count = qq.pow(cells as u32);
            let mut out = Vec::new();
            for code in 0..fill_count {
                let mut mat = Mat::identity(m);
                let mut c = code;
                for i in 0..au {
                    for j in au..mu {
                        mat.set(i, j, (c % qq) as u16);
                        c /= qq;
                    }
                }
                out.push(mat);
            }
            Ok(out)
        }),
        gens: vec![],
        carrier: OnceLock::new(),
    })
}

/// Upper-triangular subgroup of GL_2(E), embedded 4x4 over the base field.
pub fn borel_2e(alg: &Arc<QuadraticAlgebra>, budget: u64) -> Arc<MatGroup> {
    assert_eq!(alg.kind, AlgebraKind::NonSplit);
    let ext = Arc::clone(alg.ext.as_ref().unwrap());
    let base = Arc::clone(&alg.base);
    let eq = ext.q as u64;
    let order = (eq - 1) * (eq - 1) * eq;
    let alg1 = Arc::clone(alg);
    let alg2 = Arc::clone(alg);
    let ext2 = Arc::clone(&ext);
    let gens = vec![
        Mat::from_rows(2, &[&[ext.generator, 0], &[0, 1]]).block_embed(alg),
        Mat::from_rows(2, &[&[1, 0], &[0, ext.generator]]).block_embed(alg),
        Mat::from_rows(2, &[&[1, 1], &[0, 1]]).block_embed(alg),
    ];
    Arc::new(MatGroup {
        tag: format!("B2E({})", base.q),
        field: base,
        n: 4,
        order,
        budget,
        membership: Box::new(move |m: &Mat| {
            match m.block_decode(&alg1) {
                Some(native) => native.at(1, 0) == 0 && native.at(0, 0) != 0 && native.at(1, 1) != 0,
                None => false,
            }
        }),
        enumerator: Box::new(move || {
            let mut out = Vec::new();
            for a in 1..ext2.q {
                for d in 1..ext2.q {
                    for b in 0..ext2.q {
                        let native = Mat::from_rows(2, &[&[a, b], &[0, d]]);
                        out.push(native.block_embed(&alg2));
                    }
                }
            }
            Ok(out)
        }),
        gens,
        carrier: OnceLock::new(),
    })
}

/// GL_2 of the base field inside GL_2(E), embedded 4x4 (entry-wise F in E).
pub fn gl2_base_in_h(alg: &Arc<QuadraticAlgebra>, budget: u64) -> Arc<MatGroup> {
    assert_eq!(alg.kind, AlgebraKind::NonSplit);
    let base = Arc::clone(&alg.base);
    let order = gl_order(2, base.q as u64);
    let alg1 = Arc::clone(alg);
    let alg2 = Arc::clone(alg);
    let base2 = Arc::clone(&base);
    let gens: Vec<Mat> = gl_generators(&base, 2).iter().map(|g| g.block_embed(alg)).collect();
    Arc::new(MatGroup {
        tag: format!("GL2F-in-H({})", base.q),
        field: Arc::clone(&base),
        n: 4,
        order,
        budget,
        membership: Box::new(move |m: &Mat| {
            match m.block_decode(&alg1) {
                // all entries must be base-field constants
                Some(native) => {
                    let e = alg1.ext.as_ref().unwrap();
                    let q = alg1.base.q as u16;
                    let _ = e;
                    (0..2).all(|i| (0..2).all(|j| native.at(i, j) < q))
                        && {
                            let mut two = Mat::zero(2);
                            for i in 0..2 {
                                for j in 0..2 {
                                    two.set(i, j, native.at(i, j));
                                }
                            }
                            two.is_invertible(&alg1.base)
                        }
                }
                None => false,
            }
        }),
        enumerator: Box::new(move || {
            let gl2 = enumerate_gl(&base2, 2);
            Ok(gl2
                .iter()
                .map(|m| {
                    // entries are already algebra codes (F sits in E as codes < q)
                    let mut native = Mat::zero(2);
                    for i in 0..2 {
                        for j in 0..2 {
                            native.set(i, j, m.at(i, j));
                        }
                    }
                    native.block_embed(&alg2)
                })
                .collect())
        }),
        gens,
        carrier: OnceLock::new(),
    })
}

/// Description of the two abelian quotients and the commutative square.
#[derive(Debug, serde::Serialize)]
pub struct QuotientStructure {
    pub g_over_gflat_order: u64,
    pub h_over_hflat_order: u64,
    pub det_surjective: bool,
    pub norm_det_surjective: bool,
    pub square_commutes: bool,
}

/// Verifies G/G_flat = F^x via det, H/H_flat = F^x via norm(det), and the
/// compatibility det(embed(h)) = N(det_E(h)).
pub fn quotient_structure(fam: &GFamily) -> Result<QuotientStructure> {
    let field = &fam.g.field;
    let q1 = field.q as u64 - 1;
    let g_quot = fam.g.order / fam.gflat.order;
    let h_quot = fam.h.order / fam.hflat.order;
    if g_quot != q1.max(1) || h_quot != q1.max(1) {
        return Err(Error::Invariant(format!(
            "quotient not cyclic of order q-1: got {} and {}",
            g_quot, h_quot
        )));
    }
    // surjectivity of the two maps, on carriers when available
    let mut det_vals = std::collections::BTreeSet::new();
    let mut norm_det_vals = std::collections::BTreeSet::new();
    let mut square = true;
    if fam.h.has_carrier_within_budget() {
        for m in &fam.h.carrier()?.elements {
            let d = m.det(field);
            det_vals.insert(d);
            let de = fam.det_alg(m).ok_or_else(|| Error::Invariant("H element failed to decode".into()))?;
            let nd = fam.alg.norm(de);
            norm_det_vals.insert(nd);
            if nd != d {
                square = false;
            }
        }
    }
    Ok(QuotientStructure {
        g_over_gflat_order: g_quot,
        h_over_hflat_order: h_quot,
        det_surjective: det_vals.len() as u64 == q1.max(1),
        norm_det_surjective: norm_det_vals.len() as u64 == q1.max(1),
        square_commutes: square,
    })
}

/// Checks every element of `sub` satisfies `amb`'s membership.
pub fn verify_embedding(sub: &MatGroup, amb: &MatGroup) -> Result<()> {
    let carrier = sub.carrier()?;
    for m in &carrier.elements {
        if !amb.contains(m) {
            return Err(Error::Invariant(format!(
                "{} element not inside {}",
                sub.tag, amb.tag
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(q: u16, kind: AlgebraKind) -> Arc<QuadraticAlgebra> {
        let base = match q {
            4 => FiniteField::extension(2, 2).unwrap(),
            8 => FiniteField::extension(2, 3).unwrap(),
            9 => FiniteField::extension(3, 2).unwrap(),
            _ => FiniteField::prime(q).unwrap(),
        };
        Arc::new(QuadraticAlgebra::new(base, kind).unwrap())
    }

    #[test]
    fn gl_orders_and_carriers() {
        let f3 = FiniteField::prime(3).unwrap();
        let g = gl_group(&f3, 2, DEFAULT_ORDER_BUDGET);
        assert_eq!(g.order, 48);
        assert_eq!(g.carrier().unwrap().len(), 48);
        let s = sl_group(&f3, 2, DEFAULT_ORDER_BUDGET);
        assert_eq!(s.order, 24);
        assert_eq!(s.carrier().unwrap().len(), 24);
        g.closure_spot_check(0, DEFAULT_CLOSURE_ROUNDS).unwrap();
        s.closure_spot_check(0, DEFAULT_CLOSURE_ROUNDS).unwrap();
    }

    #[test]
    fn family_orders_nonsplit_q3() {
        let a = alg(3, AlgebraKind::NonSplit);
        let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
        assert_eq!(fam.h.order, 8); // |E^x| = q^2 - 1
        assert_eq!(fam.hflat.order, 4); // norm-one circle, q + 1
        assert_eq!(fam.h.carrier().unwrap().len(), 8);
        assert_eq!(fam.hflat.carrier().unwrap().len(), 4);
        verify_embedding(&fam.hflat, &fam.h).unwrap();
        verify_embedding(&fam.h, &fam.g).unwrap();
        verify_embedding(&fam.gflat, &fam.hplus).unwrap();
        // over a finite field the norm is onto, so H+ = G
        assert_eq!(fam.hplus.order, fam.g.order);
    }

    #[test]
    fn family_orders_split() {
        let a = alg(3, AlgebraKind::Split);
        let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
        assert_eq!(fam.h.order, 4);
        assert_eq!(fam.hflat.order, 2); // pairs (x, x^-1)
        let carrier = fam.hflat.carrier().unwrap();
        for m in &carrier.elements {
            assert_eq!(m.det(&fam.g.field), 1);
        }
    }

    #[test]
    fn family_n2_q2_degenerate() {
        let a = alg(2, AlgebraKind::NonSplit);
        let fam = build_g_family(&a, 2, DEFAULT_ORDER_BUDGET).unwrap();
        assert_eq!(fam.g.order, 20160);
        assert_eq!(fam.gflat.order, fam.g.order); // q = 2 makes det trivial
        assert_eq!(fam.h.order, 180); // |GL_2(F_4)|
        assert_eq!(fam.hflat.order, fam.h.order);
        assert_eq!(fam.h.carrier().unwrap().len(), 180);
    }

    #[test]
    fn parabolic_orders_and_index() {
        let f3 = FiniteField::prime(3).unwrap();
        let p22 = build_parabolic(&f3, (2, 2), DEFAULT_ORDER_BUDGET).unwrap();
        assert_eq!(p22.p.order, 48 * 48 * 81); // 186624
        assert_eq!(gl_order(4, 3) / p22.p.order, 130); // index = |Gr(4,2)|_3
        let f2 = FiniteField::prime(2).unwrap();
        let p13 = build_parabolic(&f2, (1, 3), DEFAULT_ORDER_BUDGET).unwrap();
        assert_eq!(p13.p.order, 1344); // (q-1) |GL_3(q)| q^3 = 1*168*8
        assert_eq!(gl_order(4, 2) / p13.p.order, 15); // |Gr(4,1)|_2
        assert_eq!(p13.radical.carrier().unwrap().len(), 8);
        assert_eq!(p13.p.carrier().unwrap().len(), 1344);
    }

    #[test]
    fn p13_coset_count_by_line_orbit() {
        // index [G : P13] equals the number of lines, counted independently
        let f2 = FiniteField::prime(2).unwrap();
        let g = gl_group(&f2, 4, DEFAULT_ORDER_BUDGET);
        let p13 = build_parabolic(&f2, (1, 3), DEFAULT_ORDER_BUDGET).unwrap();
        let carrier = g.carrier().unwrap();
        let mut cosets = std::collections::BTreeSet::new();
        // gP determined by the line spanned by the first column of g
        for m in &carrier.elements {
            let col: Vec<u16> = (0..4).map(|i| m.at(i, 0)).collect();
            // canonical scaling over F_2 is the vector itself
            cosets.insert(col);
        }
        assert_eq!(cosets.len() as u64, g.order / p13.p.order);
    }

    #[test]
    fn quotient_structure_examples() {
        for q in [3u16, 5] {
            let a = alg(q, AlgebraKind::NonSplit);
            let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
            let qs = quotient_structure(&fam).unwrap();
            assert_eq!(qs.g_over_gflat_order, (q - 1) as u64);
            assert_eq!(qs.h_over_hflat_order, (q - 1) as u64);
            assert!(qs.det_surjective && qs.norm_det_surjective && qs.square_commutes);
        }
        // q = 2: trivial quotients
        let a = alg(2, AlgebraKind::NonSplit);
        let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
        let qs = quotient_structure(&fam).unwrap();
        assert_eq!(qs.g_over_gflat_order, 1);
        assert_eq!(qs.h_over_hflat_order, 1);
    }

    #[test]
    fn hplus_is_product_set_at_n1() {
        // H+ = Gflat . H as a set, by direct product enumeration
        for kind in [AlgebraKind::NonSplit, AlgebraKind::Split] {
            let a = alg(3, kind);
            let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
            let f = &fam.g.field;
            let mut products = std::collections::BTreeSet::new();
            for s in &fam.gflat.carrier().unwrap().elements {
                for h in &fam.h.carrier().unwrap().elements {
                    products.insert(s.mul(h, f).key());
                }
            }
            let hplus: std::collections::BTreeSet<u128> =
                fam.hplus.carrier().unwrap().elements.iter().map(|m| m.key()).collect();
            assert_eq!(products, hplus);
        }
    }

    #[test]
    fn double_coset_gflat_g_h_is_single() {
        // det of H covers every Gflat-coset of G, exhaustively at n = 1
        for q in [3u16, 5] {
            let a = alg(q, AlgebraKind::NonSplit);
            let fam = build_g_family(&a, 1, DEFAULT_ORDER_BUDGET).unwrap();
            let f = &fam.g.field;
            let dets: std::collections::BTreeSet<u16> =
                fam.h.carrier().unwrap().elements.iter().map(|m| m.det(f)).collect();
            assert_eq!(dets.len(), (q - 1) as usize);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f3 = FiniteField::prime(3).unwrap();
        let g = gl_group(&f3, 4, DEFAULT_ORDER_BUDGET);
        assert_eq!(g.order, 24261120);
        match g.carrier() {
            Err(Error::BudgetExceeded { order, .. }) => assert_eq!(order, 24261120),
            _ => panic!("expected budget error"),
        }
    }
}
