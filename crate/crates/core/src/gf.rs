//! Exact arithmetic in F_q, its quadratic etale algebras, the norm map, and
//! linear characters of the relevant abelian unit groups.
//!
//! Fields are built either as F_p[x]/(f) for the lexicographically smallest
//! monic irreducible f (so element encodings are reproducible across runs),
//! or as a one-hop quadratic tower E = F_q[x]/(x^2 + c1 x + c0) over an
//! existing field, again with the smallest admissible (c0, c1).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cyclo::Cyclotomic;
use crate::error::Error;

/// How a field was constructed; recorded in report headers.
#[derive(Clone, Debug, Serialize)]
pub enum FieldConstruction {
    Prime,
    /// modulus over F_p, low degree first, length k+1
    ExtensionOverPrime { modulus: Vec<u16> },
    /// x^2 + c1 x + c0 over the base field, coefficients as base codes
    QuadraticTower { c0: u16, c1: u16 },
}

/// A small finite field with full lookup tables.
///
/// Elements are integer codes in [0, q). For an extension over the prime
/// field the base-p digits of the code are the polynomial coefficients; for
/// a quadratic tower the code is a + b*q_base for the element a + b*x.
pub struct FiniteField {
    pub p: u16,
    /// absolute extension degree over F_p
    pub k: u16,
    pub q: u16,
    pub construction: FieldConstruction,
    base: Option<Arc<FiniteField>>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    /// generator of the cyclic group F_q^x
    pub generator: u16,
    /// discrete log base `generator`; log[0] is unused
    log: Vec<u16>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

fn is_prime_u16(n: u16) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n as u32 {
        if n as u32 % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteField {
    pub fn prime(p: u16) -> Result<Arc<Self>, Error> {
        if !is_prime_u16(p) {
            return Err(Error::BadField(format!("{} is not prime", p)));
        }
        let q = p;
        let add = (0..q as u32 * q as u32)
            .map(|i| ((i / q as u32 + i % q as u32) % q as u32) as u16)
            .collect();
        let mul = (0..q as u32 * q as u32)
            .map(|i| ((i / q as u32) * (i % q as u32) % q as u32) as u16)
            .collect();
        let neg = (0..q).map(|a| ((q - a) % q) as u16).collect();
        let mut inv = vec![0u16; q as usize];
        for a in 1..q {
            for b in 1..q {
                if (a as u32 * b as u32) % q as u32 == 1 {
                    inv[a as usize] = b;
                    break;
                }
            }
        }
        let mut f = FiniteField {
            p,
            k: 1,
            q,
            construction: FieldConstruction::Prime,
            base: None,
            add,
            mul,
            neg,
            inv,
            generator: 0,
            log: vec![],
        };
        f.finish_generator()?;
        Ok(Arc::new(f))
    }

    /// F_{p^k} over the prime field, with the lexicographically smallest
    /// monic irreducible modulus (ordered by code c0 + c1 p + ... + c_{k-1} p^{k-1}).
    pub fn extension(p: u16, k: u16) -> Result<Arc<Self>, Error> {
        let base = Self::prime(p)?;
        if k == 1 {
            return Ok(base);
        }
        let modulus = smallest_irreducible(&base, k)
            .ok_or_else(|| Error::BadField(format!("no irreducible of degree {} over F_{}", k, p)))?;
        Self::from_modulus(base, modulus)
    }

    /// Quadratic tower E = base[x]/(x^2 + c1 x + c0), smallest (c0, c1).
    pub fn quadratic_tower(base: &Arc<FiniteField>) -> Result<Arc<Self>, Error> {
        let modulus = smallest_irreducible(base, 2)
            .ok_or_else(|| Error::BadField(format!("no irreducible quadratic over F_{}", base.q)))?;
        Self::from_modulus(Arc::clone(base), modulus)
    }

    fn from_modulus(base: Arc<FiniteField>, modulus: Vec<u16>) -> Result<Arc<Self>, Error> {
        let k_rel = (modulus.len() - 1) as u16;
        let qb = base.q as u32;
        let q_big = qb.pow(k_rel as u32);
        if q_big > 8192 {
            return Err(Error::BadField(format!("field with {} elements too large", q_big)));
        }
        let q = q_big as u16;
        let decode = |code: u16| -> Vec<u16> {
            let mut digits = vec![0u16; k_rel as usize];
            let mut c = code as u32;
            for d in digits.iter_mut() {
                *d = (c % qb) as u16;
                c /= qb;
            }
            digits
        };
        let encode = |digits: &[u16]| -> u16 {
            let mut c = 0u32;
            for &d in digits.iter().rev() {
                c = c * qb + d as u32;
            }
            c as u16
        };
        let mut add = vec![0u16; q as usize * q as usize];
        let mut mul = vec![0u16; q as usize * q as usize];
        let mut neg = vec![0u16; q as usize];
        for a in 0..q {
            let da = decode(a);
            let nd: Vec<u16> = da.iter().map(|&x| base.neg(x)).collect();
            neg[a as usize] = encode(&nd);
            for b in 0..q {
                let db = decode(b);
                let sum: Vec<u16> = da.iter().zip(&db).map(|(&x, &y)| base.add(x, y)).collect();
                add[a as usize * q as usize + b as usize] = encode(&sum);
                // schoolbook product then reduction by the monic modulus
                let mut prod = vec![0u16; 2 * k_rel as usize - 1];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = base.add(prod[i + j], base.mul(x, y));
                    }
                }
                for i in (k_rel as usize..prod.len()).rev() {
                    let c = prod[i];
                    if c != 0 {
                        prod[i] = 0;
                        for (j, &mj) in modulus.iter().enumerate().take(k_rel as usize) {
                            let t = base.mul(c, mj);
                            prod[i - k_rel as usize + j] = base.sub(prod[i - k_rel as usize + j], t);
                        }
                    }
                }
                mul[a as usize * q as usize + b as usize] = encode(&prod[..k_rel as usize]);
            }
        }
        let mut inv = vec![0u16; q as usize];
        for a in 1..q {
            for b in 1..q {
                if mul[a as usize * q as usize + b as usize] == 1 {
                    inv[a as usize] = b;
                    break;
                }
            }
        }
        let construction = if base.k == 1 {
            FieldConstruction::ExtensionOverPrime { modulus: modulus.clone() }
        } else {
            FieldConstruction::QuadraticTower { c0: modulus[0], c1: modulus[1] }
        };
        let mut f = FiniteField {
            p: base.p,
            k: base.k * k_rel,
            q,
            construction,
            base: Some(base),
            add,
            mul,
            neg,
            inv,
            generator: 0,
            log: vec![],
        };
        f.finish_generator()?;
        Ok(Arc::new(f))
    }

    fn finish_generator(&mut self) -> Result<(), Error> {
        let order = self.q as u32 - 1;
        let mut gen = 0u16;
        'outer: for g in 2..self.q.max(2) {
            if g >= self.q {
                break;
            }
            let mut x = g;
            for i in 1..order {
                x = self.mul(x, g);
                let _ = i;
                if x == g {
                    continue 'outer;
                }
            }
            // g has order q-1 iff its powers pass through all units exactly once
            gen = g;
            break;
        }
        if self.q == 2 {
            gen = 1;
        }
        if gen == 0 {
            return Err(Error::BadField("no multiplicative generator found".into()));
        }
        // verify g^(q-1) = 1 and g^d != 1 for proper divisors d
        let mut x = 1u16;
        for _ in 0..order {
            x = self.mul(x, gen);
        }
        if x != 1 {
            return Err(Error::BadField("generator order check failed".into()));
        }
        for d in 1..order {
            if order % d == 0 && d < order {
                let mut y = 1u16;
                for _ in 0..d {
                    y = self.mul(y, gen);
                }
                if y == 1 {
                    return Err(Error::BadField("generator has smaller order".into()));
                }
            }
        }
        let mut log = vec![0u16; self.q as usize];
        let mut x = 1u16;
        for i in 0..order {
            log[x as usize] = i as u16;
            x = self.mul(x, gen);
        }
        self.generator = gen;
        self.log = log;
        Ok(())
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        let mut r = 1u16;
        let mut b = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// Discrete log base the stored generator; a must be a unit.
    pub fn dlog(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        self.log[a as usize]
    }

    pub fn units(&self) -> impl Iterator<Item = u16> {
        1..self.q
    }

    pub fn elements(&self) -> impl Iterator<Item = u16> {
        0..self.q
    }

    pub fn base(&self) -> Option<&Arc<FiniteField>> {
        self.base.as_ref()
    }

    /// Relative Frobenius x -> x^q0 of a quadratic tower over F_q0.
    pub fn frobenius_over_base(&self, a: u16) -> u16 {
        let qb = self.base.as_ref().expect("tower field required").q;
        self.pow(a, qb as u64)
    }

    /// JSON-able descriptor (p, k, modulus, ...) for report headers.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "k": self.k,
            "q": self.q,
            "construction": serde_json::to_value(&self.construction).unwrap(),
            "generator": self.generator,
        })
    }
}

/// The field with q elements for the prime powers this engine supports.
pub fn field_for_q(q: u16) -> Result<Arc<FiniteField>, Error> {
    match q {
        2 | 3 | 5 | 7 => FiniteField::prime(q),
        4 => FiniteField::extension(2, 2),
        8 => FiniteField::extension(2, 3),
        9 => FiniteField::extension(3, 2),
        _ => Err(Error::BadConfig(format!(
            "q = {} unsupported; this engine runs at prime powers q <= 9",
            q
        ))),
    }
}

/// Monic irreducible of degree k over `base` with the smallest coefficient
/// code; irreducibility by trial division against all lower-degree monics.
fn smallest_irreducible(base: &Arc<FiniteField>, k: u16) -> Option<Vec<u16>> {
    let q = base.q as u64;
    let count = q.pow(k as u32);
    'cand: for code in 0..count {
        let mut coeffs = vec![0u16; k as usize + 1];
        let mut c = code;
        for d in coeffs.iter_mut().take(k as usize) {
            *d = (c % q) as u16;
            c /= q;
        }
        coeffs[k as usize] = 1;
        // no roots
        for x in 0..base.q {
            let mut v = 0u16;
            for &cf in coeffs.iter().rev() {
                v = base.add(base.mul(v, x), cf);
            }
            if v == 0 {
                continue 'cand;
            }
        }
        if k >= 4 {
            // trial division by monic quadratics (degree <= k/2 factors)
            for c0 in 0..base.q {
                for c1 in 0..base.q {
                    if poly_divides(base, &[c0, c1, 1], &coeffs) {
                        continue 'cand;
                    }
                }
            }
        }
        return Some(coeffs);
    }
    None
}

fn poly_divides(f: &FiniteField, den: &[u16], num: &[u16]) -> bool {
    let mut rem: Vec<u16> = num.to_vec();
    let dd = den.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap();
        if lead != 0 {
            let shift = rem.len() - 1 - dd;
            for (j, &dj) in den.iter().enumerate() {
                rem[shift + j] = f.sub(rem[shift + j], f.mul(lead, dj));
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

/// Which quadratic etale algebra sits over F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AlgebraKind {
    NonSplit,
    Split,
}

impl AlgebraKind {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "nonsplit" => Ok(AlgebraKind::NonSplit),
            "split" => Ok(AlgebraKind::Split),
            _ => Err(Error::BadConfig(format!("unknown kind '{}', expected split|nonsplit", s))),
        }
    }
}

/// F_q together with E: either the quadratic field extension or F_q + F_q.
///
/// Algebra elements are u32 codes: the field code for NonSplit, and
/// a + b*q for the pair (a, b) in the Split case.
pub struct QuadraticAlgebra {
    pub kind: AlgebraKind,
    pub base: Arc<FiniteField>,
    /// the field F_{q^2}, present only for NonSplit
    pub ext: Option<Arc<FiniteField>>,
}

impl QuadraticAlgebra {
    pub fn new(base: Arc<FiniteField>, kind: AlgebraKind) -> Result<Self, Error> {
        let ext = match kind {
            AlgebraKind::NonSplit => Some(FiniteField::quadratic_tower(&base)?),
            AlgebraKind::Split => None,
        };
        Ok(QuadraticAlgebra { kind, base, ext })
    }

    pub fn q(&self) -> u16 {
        self.base.q
    }

    /// Number of algebra elements (q^2 in both cases).
    pub fn size(&self) -> u32 {
        (self.base.q as u32).pow(2)
    }

    pub fn unit_group_order(&self) -> u32 {
        match self.kind {
            AlgebraKind::NonSplit => self.size() - 1,
            AlgebraKind::Split => (self.base.q as u32 - 1).pow(2),
        }
    }

    pub fn split_pair(&self, code: u32) -> (u16, u16) {
        let q = self.base.q as u32;
        ((code % q) as u16, (code / q) as u16)
    }

    pub fn split_code(&self, a: u16, b: u16) -> u32 {
        a as u32 + b as u32 * self.base.q as u32
    }

    pub fn is_unit(&self, a: u32) -> bool {
        match self.kind {
            AlgebraKind::NonSplit => a != 0,
            AlgebraKind::Split => {
                let (x, y) = self.split_pair(a);
                x != 0 && y != 0
            }
        }
    }

    pub fn units(&self) -> Vec<u32> {
        match self.kind {
            AlgebraKind::NonSplit => (1..self.ext.as_ref().unwrap().q as u32).collect(),
            AlgebraKind::Split => {
                let q = self.base.q;
                let mut v = Vec::new();
                for b in 1..q {
                    for a in 1..q {
                        v.push(self.split_code(a, b));
                    }
                }
                v
            }
        }
    }

    pub fn alg_mul(&self, a: u32, b: u32) -> u32 {
        match self.kind {
            AlgebraKind::NonSplit => {
                let e = self.ext.as_ref().unwrap();
                e.mul(a as u16, b as u16) as u32
            }
            AlgebraKind::Split => {
                let (ax, ay) = self.split_pair(a);
                let (bx, by) = self.split_pair(b);
                self.split_code(self.base.mul(ax, bx), self.base.mul(ay, by))
            }
        }
    }

    pub fn alg_one(&self) -> u32 {
        match self.kind {
            AlgebraKind::NonSplit => 1,
            AlgebraKind::Split => self.split_code(1, 1),
        }
    }

    /// The norm map N_{E/F}: a^(1+q) for the field, coordinate product for
    /// the split algebra. Total on algebra elements.
    pub fn norm(&self, a: u32) -> u16 {
        match self.kind {
            AlgebraKind::NonSplit => {
                let e = self.ext.as_ref().unwrap();
                let n = e.pow(a as u16, 1 + self.base.q as u64);
                debug_assert!(n < self.base.q, "norm must land in the base field");
                n
            }
            AlgebraKind::Split => {
                let (x, y) = self.split_pair(a);
                self.base.mul(x, y)
            }
        }
    }

    /// Regular representation of a on the basis {1, x} (NonSplit), or
    /// diag(a, b) (Split), as entries of a 2x2 matrix row-major.
    pub fn embed2x2(&self, a: u32) -> [u16; 4] {
        match self.kind {
            AlgebraKind::NonSplit => {
                let e = self.ext.as_ref().unwrap();
                let base_q = self.base.q;
                let (c0, c1) = match e.construction {
                    FieldConstruction::QuadraticTower { c0, c1 } => (c0, c1),
                    FieldConstruction::ExtensionOverPrime { ref modulus } => (modulus[0], modulus[1]),
                    FieldConstruction::Prime => unreachable!(),
                };
                let lo = (a as u16) % base_q;
                let hi = (a as u16) / base_q;
                let f = &self.base;
                // columns are the images of 1 and x under multiplication by a = lo + hi*x
                [
                    lo,
                    f.neg(f.mul(hi, c0)),
                    hi,
                    f.sub(lo, f.mul(hi, c1)),
                ]
            }
            AlgebraKind::Split => {
                let (x, y) = self.split_pair(a);
                [x, 0, 0, y]
            }
        }
    }

    /// Inverse of embed2x2 on its image; None if the block is not in the image.
    pub fn decode2x2(&self, m: &[u16; 4]) -> Option<u32> {
        match self.kind {
            AlgebraKind::NonSplit => {
                let lo = m[0];
                let hi = m[2];
                let code = lo as u32 + hi as u32 * self.base.q as u32;
                if self.embed2x2(code) == *m {
                    Some(code)
                } else {
                    None
                }
            }
            AlgebraKind::Split => {
                if m[1] == 0 && m[2] == 0 {
                    Some(self.split_code(m[0], m[3]))
                } else {
                    None
                }
            }
        }
    }

    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "base": self.base.descriptor(),
            "ext": self.ext.as_ref().map(|e| e.descriptor()),
        })
    }
}

/// The abelian groups whose characters the pipeline needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CharGroup {
    /// F_q^x, cyclic of order q-1
    BaseUnits,
    /// E^x for the field case, cyclic of order q^2-1
    ExtUnits,
    /// (F_q^x)^2 for the split case
    SplitUnits,
}

/// A linear character of one of the unit groups, with exact cyclotomic values.
///
/// For the cyclic groups the index t means x -> zeta^(t * log_g(x)); for the
/// split product the index is t1 + t2*(q-1) acting coordinate-wise.
#[derive(Clone, Debug)]
pub struct LinearCharacter {
    pub group: CharGroup,
    pub index: u32,
    /// order of the value group of characters (q-1 or q^2-1)
    value_order: u32,
    group_order: u32,
}

impl LinearCharacter {
    pub fn group_order(alg: &QuadraticAlgebra, group: CharGroup) -> u32 {
        let q = alg.base.q as u32;
        match group {
            CharGroup::BaseUnits => q - 1,
            CharGroup::ExtUnits => q * q - 1,
            CharGroup::SplitUnits => (q - 1) * (q - 1),
        }
    }

    pub fn new(alg: &QuadraticAlgebra, group: CharGroup, index: u32) -> Self {
        let q = alg.base.q as u32;
        let group_order = Self::group_order(alg, group);
        let value_order = match group {
            CharGroup::BaseUnits => (q - 1).max(1),
            CharGroup::ExtUnits => (q * q - 1).max(1),
            CharGroup::SplitUnits => (q - 1).max(1),
        };
        LinearCharacter { group, index: index % group_order.max(1), value_order, group_order }
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }

    /// Pointwise product of characters; indices add in the character group.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group);
        let mut out = self.clone();
        match self.group {
            CharGroup::SplitUnits => {
                let m = (self.group_order as f64).sqrt() as u32;
                let (a1, a2) = (self.index % m, self.index / m);
                let (b1, b2) = (other.index % m, other.index / m);
                out.index = (a1 + b1) % m + ((a2 + b2) % m) * m;
            }
            _ => {
                out.index = (self.index + other.index) % self.group_order.max(1);
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let mut out = self.clone();
        match self.group {
            CharGroup::SplitUnits => {
                let m = (self.group_order as f64).sqrt() as u32;
                let (a1, a2) = (self.index % m, self.index / m);
                out.index = (m - a1) % m + ((m - a2) % m) * m;
            }
            _ => {
                let n = self.group_order.max(1);
                out.index = (n - self.index) % n;
            }
        }
        out
    }

    /// Exact value at a unit-group element (codes as in `QuadraticAlgebra`;
    /// `BaseUnits` takes a base-field unit code).
    pub fn eval(&self, alg: &QuadraticAlgebra, elem: u32) -> Cyclotomic {
        let m = self.value_order.max(1);
        match self.group {
            CharGroup::BaseUnits => {
                let l = alg.base.dlog(elem as u16) as i64;
                Cyclotomic::root_of_unity(m, self.index as i64 * l)
            }
            CharGroup::ExtUnits => {
                let e = alg.ext.as_ref().expect("ExtUnits requires the nonsplit algebra");
                let l = e.dlog(elem as u16) as i64;
                Cyclotomic::root_of_unity(m, self.index as i64 * l)
            }
            CharGroup::SplitUnits => {
                let q1 = alg.base.q as u32 - 1;
                let (t1, t2) = (self.index % q1, self.index / q1);
                let (x, y) = alg.split_pair(elem);
                let lx = alg.base.dlog(x) as i64;
                let ly = alg.base.dlog(y) as i64;
                Cyclotomic::root_of_unity(m, t1 as i64 * lx + t2 as i64 * ly)
            }
        }
    }

    /// Value exponent so that eval = zeta_value_order^exponent; cheap path
    /// used by inner products against linear characters.
    pub fn eval_exponent(&self, alg: &QuadraticAlgebra, elem: u32) -> i64 {
        let m = self.value_order.max(1) as i64;
        match self.group {
            CharGroup::BaseUnits => {
                let l = alg.base.dlog(elem as u16) as i64;
                (self.index as i64 * l).rem_euclid(m)
            }
            CharGroup::ExtUnits => {
                let e = alg.ext.as_ref().unwrap();
                let l = e.dlog(elem as u16) as i64;
                (self.index as i64 * l).rem_euclid(m)
            }
            CharGroup::SplitUnits => {
                let q1 = alg.base.q as u32 - 1;
                let (t1, t2) = (self.index % q1, self.index / q1);
                let (x, y) = alg.split_pair(elem);
                (t1 as i64 * alg.base.dlog(x) as i64 + t2 as i64 * alg.base.dlog(y) as i64)
                    .rem_euclid(m)
            }
        }
    }

    pub fn value_order(&self) -> u32 {
        self.value_order.max(1)
    }
}

/// All characters of the given unit group, trivial character first.
pub fn char_group(alg: &QuadraticAlgebra, group: CharGroup) -> Vec<LinearCharacter> {
    let n = LinearCharacter::group_order(alg, group);
    (0..n.max(1)).map(|i| LinearCharacter::new(alg, group, i)).collect()
}

/// Restriction of a character of E^x to F_q^x (nonsplit only): the unique
/// character of F_q^x agreeing with chi on every embedded base unit.
pub fn restrict_char_to_base(
    alg: &QuadraticAlgebra,
    chi: &LinearCharacter,
) -> Result<LinearCharacter, Error> {
    if alg.kind != AlgebraKind::NonSplit || chi.group != CharGroup::ExtUnits {
        return Err(Error::BadConfig(
            "restrict_char_to_base needs a character of E^x over a nonsplit algebra".into(),
        ));
    }
    let e = alg.ext.as_ref().unwrap();
    let q = alg.base.q as u32;
    // chi(g_F) determines the index: g_F = g_E^(dlog), and the value lives in
    // the (q-1)-torsion of the value group.
    let g_f = alg.base.generator;
    let l = e.dlog(g_f) as u64;
    let m_ext = (q * q - 1) as u64;
    let m_base = (q - 1).max(1) as u64;
    let exp_at_gf = (chi.index as u64 * l) % m_ext;
    // zeta_{q^2-1}^exp = zeta_{q-1}^t requires exp divisible by q+1
    debug_assert_eq!(exp_at_gf % (m_ext / m_base), 0);
    let t = (exp_at_gf / (m_ext / m_base)) % m_base;
    let out = LinearCharacter::new(alg, CharGroup::BaseUnits, t as u32);
    // cross-check on every embedded base unit
    for x in alg.base.units() {
        let lhs = chi.eval(alg, x as u32);
        let rhs = out.eval(alg, x as u32);
        if !lhs.equals(&rhs) {
            return Err(Error::Invariant("character restriction mismatch".into()));
        }
    }
    Ok(out)
}

/// alpha composed with the norm map, as a character of the unit group of E.
pub fn compose_norm(alg: &QuadraticAlgebra, alpha: &LinearCharacter) -> LinearCharacter {
    assert_eq!(alpha.group, CharGroup::BaseUnits);
    let q = alg.base.q as u32;
    match alg.kind {
        AlgebraKind::NonSplit => {
            // N(g_E^k) = g_E^(k(1+q)) = g_F'^k where g_F' = g_E^(1+q) generates F^x.
            // alpha(N(x)) = zeta_{q-1}^(t * dlog_F(N(x))); as a character of E^x
            // this has index t*(1+q)*s mod (q^2-1) where g_E^(1+q) = g_F^s... the
            // direct route: find the index by evaluating at the generator.
            let e = alg.ext.as_ref().unwrap();
            let n_gen = alg.norm(e.generator as u32);
            let s = alg.base.dlog(n_gen) as u64; // N(g_E) = g_F^s
            let m_ext = (q * q - 1) as u64;
            let m_base = (q - 1).max(1) as u64;
            // chi(g_E) = zeta_{q-1}^(t*s) = zeta_{q^2-1}^(t*s*(q+1))
            let idx = (alpha.index as u64 * s % m_base) * (m_ext / m_base) % m_ext;
            LinearCharacter::new(alg, CharGroup::ExtUnits, idx as u32)
        }
        AlgebraKind::Split => {
            // alpha(xy) = alpha(x) alpha(y): index (t, t)
            let q1 = q - 1;
            LinearCharacter::new(alg, CharGroup::SplitUnits, alpha.index % q1.max(1) + (alpha.index % q1.max(1)) * q1)
        }
    }
}
