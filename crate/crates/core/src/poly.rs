//! Dense univariate polynomials over a small finite field, plus the
//! interned tables of monic irreducibles of degree <= 4 that rational
//! canonical forms are built from.

use crate::gf::FiniteField;

/// Coefficients low-degree first; normalized so the leading coefficient is
/// nonzero (the zero polynomial is an empty vector).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    coeffs: Vec<u16>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<u16>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }

    pub fn x_minus(c: u16, f: &FiniteField) -> Self {
        Poly::new(vec![f.neg(c), 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        if self.coeffs.is_empty() {
            0
        } else {
            self.coeffs.len() - 1
        }
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn add(&self, other: &Poly, f: &FiniteField) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u16; n];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = f.add(a, b);
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly, f: &FiniteField) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u16; n];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = f.sub(a, b);
        }
        Poly::new(out)
    }

    pub fn mul(&self, other: &Poly, f: &FiniteField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0u16; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn divrem(&self, den: &Poly, f: &FiniteField) -> (Poly, Poly) {
        assert!(den.is_monic());
        let dd = den.degree();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![0u16; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd];
            quot[k] = c;
            if c != 0 {
                for (j, &dj) in den.coeffs.iter().enumerate() {
                    rem[k + j] = f.sub(rem[k + j], f.mul(c, dj));
                }
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn divides(&self, num: &Poly, f: &FiniteField) -> bool {
        num.divrem(self, f).1.is_zero()
    }

    pub fn eval(&self, x: u16, f: &FiniteField) -> u16 {
        let mut v = 0u16;
        for &c in self.coeffs.iter().rev() {
            v = f.add(f.mul(v, x), c);
        }
        v
    }

    pub fn pow(&self, e: usize, f: &FiniteField) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r.mul(self, f);
        }
        r
    }

    /// Companion matrix; degree must be between 1 and 4.
    pub fn companion(&self, f: &FiniteField) -> crate::mat::Mat {
        assert!(self.is_monic());
        let d = self.degree();
        assert!((1..=4).contains(&d));
        let mut m = crate::mat::Mat::zero(d as u8);
        for i in 1..d {
            m.set(i, i - 1, 1);
        }
        for i in 0..d {
            m.set(i, d - 1, f.neg(self.coeffs[i]));
        }
        m
    }
}

/// Monic irreducibles over f of each degree 1..=max_degree, in deterministic
/// order (by degree, then by coefficient code ascending). x itself (the
/// polynomial with zero constant term of degree 1) is included; callers that
/// need invertible matrices skip it.
pub struct IrreducibleTable {
    /// per degree (index 0 = degree 1)
    pub by_degree: Vec<Vec<Poly>>,
}

impl IrreducibleTable {
    pub fn build(f: &FiniteField, max_degree: usize) -> Self {
        let q = f.q as u64;
        let mut by_degree: Vec<Vec<Poly>> = Vec::new();
        for d in 1..=max_degree {
            let mut irr = Vec::new();
            let count = q.pow(d as u32);
            'cand: for code in 0..count {
                let mut coeffs = vec![0u16; d + 1];
                let mut c = code;
                for digit in coeffs.iter_mut().take(d) {
                    *digit = (c % q) as u16;
                    c /= q;
                }
                coeffs[d] = 1;
                let p = Poly::new(coeffs);
                // trial division by all lower-degree irreducibles
                for lower in by_degree.iter().take(d / 2).flatten() {
                    if lower.divides(&p, f) {
                        continue 'cand;
                    }
                }
                if d > 1 {
                    for x in 0..f.q {
                        if p.eval(x, f) == 0 {
                            continue 'cand;
                        }
                    }
                }
                irr.push(p);
            }
            by_degree.push(irr);
        }
        IrreducibleTable { by_degree }
    }

    pub fn of_degree(&self, d: usize) -> &[Poly] {
        &self.by_degree[d - 1]
    }

    /// Factor a monic polynomial of degree <= 4 into (irreducible, multiplicity)
    /// pairs, ordered by the table's intern order.
    pub fn factor(&self, p: &Poly, f: &FiniteField) -> Vec<(Poly, usize)> {
        assert!(p.is_monic());
        let mut rem = p.clone();
        let mut out = Vec::new();
        for degree_list in &self.by_degree {
            for irr in degree_list {
                let mut mult = 0;
                loop {
                    let (q, r) = rem.divrem(irr, f);
                    if r.is_zero() && !q.is_zero() {
                        rem = q;
                        mult += 1;
                    } else {
                        break;
                    }
                }
                if mult > 0 {
                    out.push((irr.clone(), mult));
                }
                if rem.degree() == 0 {
                    return out;
                }
            }
        }
        assert_eq!(rem.degree(), 0, "factorization incomplete");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FiniteField;

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // number of monic irreducibles of degree d over F_q:
        // (1/d) sum_{e | d} mu(d/e) q^e
        let cases = [(2u16, vec![2usize, 1, 2, 3]), (3, vec![3, 3, 8, 18]), (5, vec![5, 10, 40, 150])];
        for (p, expect) in cases {
            let f = FiniteField::prime(p).unwrap();
            let table = IrreducibleTable::build(&f, 4);
            let got: Vec<usize> = table.by_degree.iter().map(|v| v.len()).collect();
            assert_eq!(got, expect, "q = {}", p);
        }
    }

    #[test]
    fn factor_recovers_products() {
        let f = FiniteField::prime(3).unwrap();
        let table = IrreducibleTable::build(&f, 4);
        let a = Poly::new(vec![1, 0, 1]); // x^2 + 1, irreducible over F_3
        let b = Poly::x_minus(1, &f);
        let p = a.mul(&b, &f).mul(&b, &f);
        let factors = table.factor(&p, &f);
        assert_eq!(factors.len(), 2);
        let total: usize = factors.iter().map(|(q, m)| q.degree() * m).sum();
        assert_eq!(total, 4);
        assert!(factors.iter().any(|(q, m)| *q == b && *m == 2));
        assert!(factors.iter().any(|(q, m)| *q == a && *m == 1));
    }

    #[test]
    fn divrem_roundtrip() {
        let f = FiniteField::prime(5).unwrap();
        let a = Poly::new(vec![1, 2, 3, 4, 1]);
        let d = Poly::new(vec![2, 0, 1]);
        let (q, r) = a.divrem(&d, &f);
        let back = q.mul(&d, &f).add(&r, &f);
        assert_eq!(back, a);
    }

    #[test]
    fn irreducibles_over_tower_field() {
        // degree-2 irreducibles over F_9 built as a tower: there are q(q-1)/2 = 36
        let f9 = FiniteField::extension(3, 2).unwrap();
        let table = IrreducibleTable::build(&f9, 2);
        assert_eq!(table.of_degree(1).len(), 9);
        assert_eq!(table.of_degree(2).len(), 36);
    }
}
