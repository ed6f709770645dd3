//! Exact arithmetic in cyclotomic fields Q(zeta_m).
//!
//! A value is stored as a sparse rational polynomial in a fixed primitive
//! m-th root of unity, always reduced modulo the m-th cyclotomic polynomial,
//! so equality is structural. Binary operations on values of different order
//! first lift both operands to the lcm order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

/// Reduction data for a fixed order m: the cyclotomic polynomial and the
/// expansions of x^j mod Phi_m for phi(m) <= j < m.
struct CycloContext {
    phi: u32,
    /// Integer coefficients of x^j mod Phi_m, one row per j in [phi, m).
    red_rows: Vec<Vec<i64>>,
}

fn context_cache() -> &'static Mutex<HashMap<u32, Arc<CycloContext>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycloContext>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn context(order: u32) -> Arc<CycloContext> {
    let mut cache = context_cache().lock().unwrap();
    if let Some(ctx) = cache.get(&order) {
        return Arc::clone(ctx);
    }
    let ctx = Arc::new(CycloContext::new(order));
    cache.insert(order, Arc::clone(&ctx));
    ctx
}

/// Integer coefficients of the m-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<i64> {
    assert!(m >= 1);
    // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d, by exact division.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            num = poly_divide_exact(&num, &phi_d);
        }
    }
    num
}

/// Exact division of integer polynomials; panics on nonzero remainder.
fn poly_divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem: Vec<i64> = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let nd = rem.len() - 1;
    if nd < dd {
        assert!(rem.iter().all(|&c| c == 0));
        return vec![0];
    }
    let mut quot = vec![0i64; nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "non-exact poly division");
    while quot.len() > 1 && *quot.last().unwrap() == 0 {
        quot.pop();
    }
    quot
}

fn euler_phi(m: u32) -> u32 {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

impl CycloContext {
    fn new(order: u32) -> Self {
        let phi = euler_phi(order);
        let phi_poly = cyclotomic_polynomial(order);
        assert_eq!(phi_poly.len() as u32, phi + 1);
        // x^phi = -(lower terms of Phi); higher rows by shifting and re-reducing.
        let mut red_rows: Vec<Vec<i64>> = Vec::new();
        for j in phi..order {
            let row: Vec<i64> = if j == phi {
                phi_poly[..phi as usize].iter().map(|&c| -c).collect()
            } else {
                // x^j = x * x^(j-1)
                let prev = &red_rows[(j - phi - 1) as usize];
                let mut shifted = vec![0i64; phi as usize];
                let mut carry = 0i64;
                for i in (0..phi as usize).rev() {
                    if i + 1 < phi as usize {
                        shifted[i + 1] = prev[i];
                    } else {
                        carry = prev[i];
                    }
                }
                if carry != 0 {
                    let x_phi = &red_rows[0];
                    for i in 0..phi as usize {
                        shifted[i] += carry * x_phi[i];
                    }
                }
                shifted
            };
            red_rows.push(row);
        }
        CycloContext { phi, red_rows }
    }

    fn reduce_exponent(&self, exp: u32) -> Option<&[i64]> {
        if exp < self.phi {
            None
        } else {
            Some(&self.red_rows[(exp - self.phi) as usize])
        }
    }
}

/// An element of Q(zeta_m), reduced modulo the m-th cyclotomic polynomial.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cyclotomic {
    order: u32,
    /// exponent -> nonzero rational coefficient, exponents < phi(order)
    coeffs: BTreeMap<u32, BigRational>,
}

impl Cyclotomic {
    pub fn zero(order: u32) -> Self {
        Cyclotomic { order, coeffs: BTreeMap::new() }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, BigRational::one())
    }

    pub fn from_rational(order: u32, r: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0, r);
        }
        Cyclotomic { order, coeffs }
    }

    pub fn from_integer(order: u32, n: i64) -> Self {
        Self::from_rational(order, BigRational::from_integer(BigInt::from(n)))
    }

    /// zeta_m^e as a reduced value.
    pub fn root_of_unity(order: u32, exp: i64) -> Self {
        let e = exp.rem_euclid(order as i64) as u32;
        let mut v = Cyclotomic::zero(order);
        v.add_term(e, BigRational::one());
        v
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds c * zeta^exp (exp taken mod order) and re-reduces.
    pub fn add_term(&mut self, exp: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let exp = exp % self.order;
        let ctx = context(self.order);
        match ctx.reduce_exponent(exp) {
            None => {
                let entry = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    self.coeffs.remove(&exp);
                }
            }
            Some(row) => {
                for (i, &ri) in row.iter().enumerate() {
                    if ri != 0 {
                        let term = &c * BigRational::from_integer(BigInt::from(ri));
                        let entry = self.coeffs.entry(i as u32).or_insert_with(BigRational::zero);
                        *entry += term;
                        if entry.is_zero() {
                            self.coeffs.remove(&(i as u32));
                        }
                    }
                }
            }
        }
    }

    /// Rewrites the value in Q(zeta_M) for an order M divisible by self.order.
    pub fn lift_to(&self, new_order: u32) -> Self {
        assert_eq!(new_order % self.order, 0, "order must divide the new order");
        if new_order == self.order {
            return self.clone();
        }
        let k = new_order / self.order;
        let mut out = Cyclotomic::zero(new_order);
        for (&e, c) in &self.coeffs {
            out.add_term(e * k, c.clone());
        }
        out
    }

    fn common_order(a: &Self, b: &Self) -> u32 {
        num::integer::lcm(a.order, b.order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = Self::common_order(self, other);
        let mut out = self.lift_to(m);
        let rhs = other.lift_to(m);
        for (&e, c) in &rhs.coeffs {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for (_, c) in out.coeffs.iter_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = Self::common_order(self, other);
        let a = self.lift_to(m);
        let b = other.lift_to(m);
        let mut out = Cyclotomic::zero(m);
        for (&ea, ca) in &a.coeffs {
            for (&eb, cb) in &b.coeffs {
                out.add_term((ea + eb) % m, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Cyclotomic::zero(self.order);
        }
        let mut out = self.clone();
        for (_, c) in out.coeffs.iter_mut() {
            *c *= r;
        }
        out
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Complex conjugation: zeta -> zeta^{-1}.
    pub fn conj(&self) -> Self {
        let m = self.order;
        let mut out = Cyclotomic::zero(m);
        for (&e, c) in &self.coeffs {
            out.add_term((m - e) % m, c.clone());
        }
        out
    }

    /// Galois twist zeta -> zeta^k for k coprime to the order.
    pub fn galois(&self, k: u32) -> Self {
        let m = self.order;
        assert_eq!(num::integer::gcd(k, m), 1);
        let mut out = Cyclotomic::zero(m);
        for (&e, c) in &self.coeffs {
            out.add_term((e as u64 * k as u64 % m as u64) as u32, c.clone());
        }
        out
    }

    /// The value as a rational if it lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.is_empty() {
            return Some(BigRational::zero());
        }
        if self.coeffs.len() == 1 {
            if let Some(c) = self.coeffs.get(&0) {
                return Some(c.clone());
            }
        }
        None
    }

    /// The value as an integer if it is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        if r.denom().is_one() {
            Some(r.numer().clone())
        } else {
            None
        }
    }

    pub fn equals(&self, other: &Self) -> bool {
        let m = Self::common_order(self, other);
        self.lift_to(m).coeffs == other.lift_to(m).coeffs
    }

    /// Deterministic total order on values of equal cyclotomic order.
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        let m = Self::common_order(self, other);
        let a = self.lift_to(m);
        let b = other.lift_to(m);
        let av: Vec<_> = a.coeffs.iter().collect();
        let bv: Vec<_> = b.coeffs.iter().collect();
        for (x, y) in av.iter().zip(bv.iter()) {
            match x.0.cmp(y.0).then_with(|| x.1.cmp(y.1)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        av.len().cmp(&bv.len())
    }

    /// Dense coefficient vector of length phi(order); entries must be integers.
    pub fn integer_coeff_vector(&self) -> Option<Vec<BigInt>> {
        let phi = euler_phi(self.order);
        let mut out = vec![BigInt::zero(); phi as usize];
        for (&e, c) in &self.coeffs {
            if !c.denom().is_one() {
                return None;
            }
            out[e as usize] = c.numer().clone();
        }
        Some(out)
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, BigRational> {
        &self.coeffs
    }

    /// Rebuilds a value from a dense integer coefficient vector in the
    /// power basis (the inverse of `integer_coeff_vector`).
    pub fn from_integer_coeffs(order: u32, coeffs: &[BigInt]) -> Self {
        let mut v = Cyclotomic::zero(order);
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                v.add_term(e as u32, BigRational::from_integer(c.clone()));
            }
        }
        v
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e == 0 {
                write!(f, "{}", c)?;
            } else if c.is_one() {
                write!(f, "z{}^{}", self.order, e)?;
            } else {
                write!(f, "{}*z{}^{}", c, self.order, e)?;
            }
        }
        Ok(())
    }
}

/// Sum of zeta^(e) over the listed exponents, as one reduced value.
pub fn sum_of_roots(order: u32, exps: impl IntoIterator<Item = i64>) -> Cyclotomic {
    let mut v = Cyclotomic::zero(order);
    for e in exps {
        v.add_term(e.rem_euclid(order as i64) as u32, BigRational::one());
    }
    v
}
