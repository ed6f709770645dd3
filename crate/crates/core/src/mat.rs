//! Dense square matrices over a small finite field, with the linear algebra
//! the conjugacy machinery needs: products, inverses, determinants,
//! characteristic polynomials, ranks, and reduced row echelon forms.

use std::sync::Arc;

use crate::gf::FiniteField;
use crate::poly::Poly;

/// An n x n matrix with entries as field codes, row-major. n <= 4.
///
/// The canonical byte key is the row-major code vector packed 7 bits per
/// entry, which is injective for fixed (n, q) with q <= 128.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    pub n: u8,
    pub e: [u16; 16],
}

impl Mat {
    pub fn zero(n: u8) -> Self {
        Mat { n, e: [0; 16] }
    }

    pub fn identity(n: u8) -> Self {
        let mut m = Mat::zero(n);
        for i in 0..n as usize {
            m.e[i * n as usize + i] = 1;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u16 {
        self.e[i * self.n as usize + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u16) {
        self.e[i * self.n as usize + j] = v;
    }

    pub fn from_rows(n: u8, rows: &[&[u16]]) -> Self {
        let mut m = Mat::zero(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Canonical injective key; used for hashing, ordering and tie-breaking.
    pub fn key(&self) -> u128 {
        let n2 = (self.n as usize) * (self.n as usize);
        let mut k: u128 = 0;
        for i in (0..n2).rev() {
            k = (k << 7) | self.e[i] as u128;
        }
        k
    }

    pub fn mul(&self, other: &Mat, f: &FiniteField) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n as usize;
        let mut out = Mat::zero(self.n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u16;
                for k in 0..n {
                    acc = f.add(acc, f.mul(self.at(i, k), other.at(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn det(&self, f: &FiniteField) -> u16 {
        let n = self.n as usize;
        let mut a = *self;
        let mut det = 1u16;
        for col in 0..n {
            let mut pivot = None;
            for row in col..n {
                if a.at(row, col) != 0 {
                    pivot = Some(row);
                    break;
                }
            }
            let Some(p) = pivot else { return 0 };
            if p != col {
                for j in 0..n {
                    let t = a.at(p, j);
                    a.set(p, j, a.at(col, j));
                    a.set(col, j, t);
                }
                det = f.neg(det);
            }
            let pv = a.at(col, col);
            det = f.mul(det, pv);
            let pinv = f.inv(pv);
            for row in col + 1..n {
                let factor = f.mul(a.at(row, col), pinv);
                if factor != 0 {
                    for j in col..n {
                        let t = f.sub(a.at(row, j), f.mul(factor, a.at(col, j)));
                        a.set(row, j, t);
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self, f: &FiniteField) -> Option<Mat> {
        let n = self.n as usize;
        let mut a = *self;
        let mut inv = Mat::identity(self.n);
        for col in 0..n {
            let mut pivot = None;
            for row in col..n {
                if a.at(row, col) != 0 {
                    pivot = Some(row);
                    break;
                }
            }
            let p = pivot?;
            if p != col {
                for j in 0..n {
                    let t = a.at(p, j);
                    a.set(p, j, a.at(col, j));
                    a.set(col, j, t);
                    let t = inv.at(p, j);
                    inv.set(p, j, inv.at(col, j));
                    inv.set(col, j, t);
                }
            }
            let pinv = f.inv(a.at(col, col));
            for j in 0..n {
                a.set(col, j, f.mul(a.at(col, j), pinv));
                inv.set(col, j, f.mul(inv.at(col, j), pinv));
            }
            for row in 0..n {
                if row != col && a.at(row, col) != 0 {
                    let factor = a.at(row, col);
                    for j in 0..n {
                        let t = f.sub(a.at(row, j), f.mul(factor, a.at(col, j)));
                        a.set(row, j, t);
                        let t = f.sub(inv.at(row, j), f.mul(factor, inv.at(col, j)));
                        inv.set(row, j, t);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn is_invertible(&self, f: &FiniteField) -> bool {
        self.det(f) != 0
    }

    pub fn rank(&self, f: &FiniteField) -> usize {
        let n = self.n as usize;
        let mut a = *self;
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            let mut pivot = None;
            for r in row..n {
                if a.at(r, col) != 0 {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != row {
                for j in 0..n {
                    let t = a.at(p, j);
                    a.set(p, j, a.at(row, j));
                    a.set(row, j, t);
                }
            }
            let pinv = f.inv(a.at(row, col));
            for r in row + 1..n {
                let factor = f.mul(a.at(r, col), pinv);
                if factor != 0 {
                    for j in col..n {
                        let t = f.sub(a.at(r, j), f.mul(factor, a.at(row, j)));
                        a.set(r, j, t);
                    }
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }

    /// Characteristic polynomial det(xI - A), monic of degree n, by minor
    /// expansion over polynomial entries (n <= 4 keeps this trivial).
    pub fn char_poly(&self, f: &Arc<FiniteField>) -> Poly {
        let n = self.n as usize;
        // entries of xI - A as degree-<=1 polys
        let entry = |i: usize, j: usize| -> Poly {
            if i == j {
                Poly::new(vec![f.neg(self.at(i, j)), 1])
            } else {
                Poly::new(vec![f.neg(self.at(i, j))])
            }
        };
        fn minor_det(
            f: &Arc<FiniteField>,
            rows: &[usize],
            cols: &[usize],
            entry: &dyn Fn(usize, usize) -> Poly,
        ) -> Poly {
            if rows.len() == 1 {
                return entry(rows[0], cols[0]);
            }
            let mut acc = Poly::zero();
            for (idx, &c) in cols.iter().enumerate() {
                let sub_rows: Vec<usize> = rows[1..].to_vec();
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let cofactor = minor_det(f, &sub_rows, &sub_cols, entry);
                let term = entry(rows[0], c).mul(&cofactor, f);
                if idx % 2 == 0 {
                    acc = acc.add(&term, f);
                } else {
                    acc = acc.sub(&term, f);
                }
            }
            acc
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (0..n).collect();
        minor_det(f, &rows, &cols, &entry)
    }

    /// Evaluate a polynomial at this matrix.
    pub fn poly_eval(&self, p: &Poly, f: &FiniteField) -> Mat {
        let mut acc = Mat::zero(self.n);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(self, f);
            if c != 0 {
                for i in 0..self.n as usize {
                    let v = f.add(acc.at(i, i), c);
                    acc.set(i, i, v);
                }
            }
        }
        acc
    }

    pub fn pow(&self, mut e: u64, f: &FiniteField) -> Mat {
        let mut r = Mat::identity(self.n);
        let mut b = *self;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b, f);
            }
            b = b.mul(&b, f);
            e >>= 1;
        }
        r
    }

    /// Multiplicative order; elements come from finite groups so this halts.
    pub fn order(&self, f: &FiniteField) -> u32 {
        let id = Mat::identity(self.n);
        let mut x = *self;
        let mut k = 1u32;
        while x != id {
            x = x.mul(self, f);
            k += 1;
            assert!(k < 1_000_000, "order runaway");
        }
        k
    }

    /// Conjugate g^-1 * self * g.
    pub fn conjugate_by(&self, g: &Mat, ginv: &Mat, f: &FiniteField) -> Mat {
        ginv.mul(self, f).mul(g, f)
    }

    /// Block-embed a matrix over the quadratic algebra into 2n x 2n over the base.
    pub fn block_embed(&self, alg: &crate::gf::QuadraticAlgebra) -> Mat {
        let n = self.n as usize;
        let mut out = Mat::zero((2 * n) as u8);
        for i in 0..n {
            for j in 0..n {
                let block = alg.embed2x2(self.at(i, j) as u32);
                out.set(2 * i, 2 * j, block[0]);
                out.set(2 * i, 2 * j + 1, block[1]);
                out.set(2 * i + 1, 2 * j, block[2]);
                out.set(2 * i + 1, 2 * j + 1, block[3]);
            }
        }
        out
    }

    /// Decode a 2n x 2n matrix over the base field into n x n over the
    /// algebra; None if some block is not in the embedded image.
    pub fn block_decode(&self, alg: &crate::gf::QuadraticAlgebra) -> Option<Mat> {
        let n2 = self.n as usize;
        debug_assert_eq!(n2 % 2, 0);
        let n = n2 / 2;
        let mut out = Mat::zero(n as u8);
        for i in 0..n {
            for j in 0..n {
                let block = [
                    self.at(2 * i, 2 * j),
                    self.at(2 * i, 2 * j + 1),
                    self.at(2 * i + 1, 2 * j),
                    self.at(2 * i + 1, 2 * j + 1),
                ];
                let code = alg.decode2x2(&block)?;
                out.set(i, j, code as u16);
            }
        }
        Some(out)
    }
}

/// Reduced row echelon form of a k x m coefficient array; returns the RREF
/// rows and the rank. Used to canonicalize subspaces.
pub fn rref(rows: &mut Vec<Vec<u16>>, f: &FiniteField) -> usize {
    let k = rows.len();
    if k == 0 {
        return 0;
    }
    let m = rows[0].len();
    let mut rank = 0;
    for col in 0..m {
        let mut pivot = None;
        for r in rank..k {
            if rows[r][col] != 0 {
                pivot = Some(r);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let pinv = f.inv(rows[rank][col]);
        for j in 0..m {
            rows[rank][j] = f.mul(rows[rank][j], pinv);
        }
        for r in 0..k {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for j in 0..m {
                    rows[r][j] = f.sub(rows[r][j], f.mul(factor, rows[rank][j]));
                }
            }
        }
        rank += 1;
        if rank == k {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FiniteField;

    #[test]
    fn inverse_and_det() {
        let f = FiniteField::prime(3).unwrap();
        let m = Mat::from_rows(2, &[&[1, 2], &[1, 1]]);
        assert_eq!(m.det(&f), 2); // 1 - 2 = -1 = 2
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&inv, &f), Mat::identity(2));
    }

    #[test]
    fn char_poly_of_companion() {
        let f = FiniteField::prime(3).unwrap();
        // companion of x^2 + 1: [[0, -1], [1, 0]]
        let m = Mat::from_rows(2, &[&[0, 2], &[1, 0]]);
        let cp = m.char_poly(&f);
        assert_eq!(cp.coeffs(), &[1, 0, 1]);
        // Cayley-Hamilton
        assert_eq!(m.poly_eval(&cp, &f), Mat::zero(2));
    }

    #[test]
    fn order_of_generator_embedding() {
        let f = FiniteField::prime(3).unwrap();
        let alg = crate::gf::QuadraticAlgebra::new(f, crate::gf::AlgebraKind::NonSplit).unwrap();
        let e = alg.ext.as_ref().unwrap();
        let g = alg.embed2x2(e.generator as u32);
        let m = Mat { n: 2, e: [g[0], g[1], g[2], g[3], 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0] };
        assert_eq!(m.order(&alg.base), 8);
    }

    #[test]
    fn rref_canonicalizes() {
        let f = FiniteField::prime(2).unwrap();
        let mut rows = vec![vec![1, 1, 0, 1], vec![0, 1, 1, 0]];
        let rank = rref(&mut rows, &f);
        assert_eq!(rank, 2);
        assert_eq!(rows[0][0], 1);
        assert_eq!(rows[0][1], 0);
    }
}
