//! Character tables by Dixon's modular method: eigenvectors of the class
//! multiplication matrices over a prime field F_l with l = 1 (mod exponent),
//! lifted to exact cyclotomic values by discrete Fourier inversion against a
//! fixed root of unity of F_l^x.

use std::sync::Arc;

use num::integer::Roots;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chartab::{CharacterTable, ClassFunction};
use crate::classes::ClassData;
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};

/// Default ceilings for the modular table computation.
pub const DEFAULT_DIXON_ORDER: u64 = 25_000;
pub const DEFAULT_DIXON_CLASSES: usize = 100;

// ---- arithmetic mod l (l < 2^31 so products fit in u64) ----

#[derive(Clone, Copy)]
struct Modulus(u64);

impl Modulus {
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 { s - self.0 } else { s }
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b { a - b } else { a + self.0 - b }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.0
    }
    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.0 - 2)
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime l = t*m + 1 exceeding the given floor.
fn find_prime(m: u64, floor: u64) -> u64 {
    let mut t = floor / m + 1;
    loop {
        let p = t * m + 1;
        if p > floor && is_prime_u64(p) {
            return p;
        }
        t += 1;
    }
}

fn primitive_root(p: u64) -> u64 {
    let md = Modulus(p);
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut n = phi;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    'outer: for g in 2..p {
        for &f in &factors {
            if md.pow(g, phi / f) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("prime field has a primitive root")
}

// ---- dense polynomial helpers over F_l (low degree first, monic-normalized) ----

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], md: Modulus) -> Vec<u64> {
    let db = b.len() - 1;
    let lead_inv = md.inv(b[db]);
    while a.len() > db {
        let c = md.mul(*a.last().unwrap(), lead_inv);
        if c != 0 {
            let shift = a.len() - 1 - db;
            for (j, &bj) in b.iter().enumerate() {
                a[shift + j] = md.sub(a[shift + j], md.mul(c, bj));
            }
        }
        a.pop();
        poly_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, md: Modulus) -> Vec<u64> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(a, &b, md);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let li = md.inv(lead);
        for c in a.iter_mut() {
            *c = md.mul(*c, li);
        }
    }
    a
}

fn poly_div_exact(a: &[u64], b: &[u64], md: Modulus) -> Vec<u64> {
    let db = b.len() - 1;
    let mut rem: Vec<u64> = a.to_vec();
    let mut quot = vec![0u64; a.len() - db];
    let lead_inv = md.inv(b[db]);
    for k in (0..quot.len()).rev() {
        let c = md.mul(rem[k + db], lead_inv);
        quot[k] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                rem[k + j] = md.sub(rem[k + j], md.mul(c, bj));
            }
        }
    }
    quot
}

/// x^e mod f by repeated squaring.
fn poly_powmod_x_plus_a(a: u64, e: u64, f: &[u64], md: Modulus) -> Vec<u64> {
    let mut base = poly_rem(vec![a, 1], f, md);
    let mut result = vec![1u64];
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &base, f, md);
        }
        base = poly_mulmod(&base, &base, f, md);
        e >>= 1;
    }
    result
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], md: Modulus) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = md.add(prod[i + j], md.mul(ai, bj));
        }
    }
    poly_rem(prod, f, md)
}

/// Roots of a polynomial known to split into distinct linear factors,
/// by seeded equal-degree splitting.
fn split_roots(f: Vec<u64>, md: Modulus, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    let deg = f.len() - 1;
    if deg == 0 {
        return;
    }
    if deg == 1 {
        // monic x + c: root = -c
        let c = md.mul(f[0], md.inv(f[1]));
        out.push(md.sub(0, c));
        return;
    }
    loop {
        let a = rng.gen_range(0..md.0);
        // gcd((x+a)^((l-1)/2) - 1, f)
        let mut w = poly_powmod_x_plus_a(a, (md.0 - 1) / 2, &f, md);
        if w.is_empty() {
            w = vec![md.sub(0, 1)];
        } else {
            w[0] = md.sub(w[0], 1);
            poly_trim(&mut w);
        }
        let g = poly_gcd(f.clone(), w, md);
        if !g.is_empty() && g.len() - 1 > 0 && g.len() - 1 < deg {
            let h = poly_div_exact(&f, &g, md);
            split_roots(g, md, rng, out);
            split_roots(h, md, rng, out);
            return;
        }
    }
}

/// Characteristic polynomial of a dense matrix over F_l via Hessenberg form.
fn charpoly(mut a: Vec<Vec<u64>>, md: Modulus) -> Vec<u64> {
    let n = a.len();
    // reduce to upper Hessenberg
    for col in 0..n.saturating_sub(2) {
        let mut pivot = None;
        for row in col + 1..n {
            if a[row][col] != 0 {
                pivot = Some(row);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        if p != col + 1 {
            a.swap(p, col + 1);
            for row in a.iter_mut() {
                row.swap(p, col + 1);
            }
        }
        let pinv = md.inv(a[col + 1][col]);
        for row in col + 2..n {
            let factor = md.mul(a[row][col], pinv);
            if factor != 0 {
                for j in 0..n {
                    a[row][j] = md.sub(a[row][j], md.mul(factor, a[col + 1][j]));
                }
                for i in 0..n {
                    let t = md.mul(factor, a[i][row]);
                    a[i][col + 1] = md.add(a[i][col + 1], t);
                }
            }
        }
    }
    // charpoly recurrence for Hessenberg matrices
    // p_0 = 1; p_k = (x - a[k-1][k-1]) p_{k-1} - sum_{i<k-1} h-terms
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 1..=n {
        let mut pk = vec![0u64; k + 1];
        // (x - a_kk) * p_{k-1}
        let prev = polys[k - 1].clone();
        for (i, &c) in prev.iter().enumerate() {
            pk[i + 1] = md.add(pk[i + 1], c);
            pk[i] = md.sub(pk[i], md.mul(a[k - 1][k - 1], c));
        }
        let mut beta = 1u64;
        for i in (0..k - 1).rev() {
            beta = md.mul(beta, a[i + 1][i]);
            let coeff = md.mul(beta, a[i][k - 1]);
            if coeff != 0 {
                for (j, &c) in polys[i].iter().enumerate() {
                    pk[j] = md.sub(pk[j], md.mul(coeff, c));
                }
            }
        }
        polys.push(pk);
    }
    polys.pop().unwrap()
}

fn squarefree_part(f: &[u64], md: Modulus) -> Vec<u64> {
    // f / gcd(f, f')
    let mut deriv = vec![0u64; f.len() - 1];
    for (i, d) in deriv.iter_mut().enumerate() {
        *d = md.mul(f[i + 1], (i as u64 + 1) % md.0);
    }
    poly_trim(&mut deriv);
    if deriv.is_empty() {
        // f is a p-th power; cannot happen since l > deg f
        return f.to_vec();
    }
    let g = poly_gcd(f.to_vec(), deriv, md);
    if g.len() <= 1 {
        return f.to_vec();
    }
    poly_div_exact(f, &g, md)
}

/// Kernel basis of a (possibly non-square) matrix over F_l, row-major.
fn kernel_basis(mut a: Vec<Vec<u64>>, cols: usize, md: Modulus) -> Vec<Vec<u64>> {
    let rows = a.len();
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut pivot_row_of_col = vec![usize::MAX; cols];
    let mut rank = 0;
    for col in 0..cols {
        let mut pivot = None;
        for row in rank..rows {
            if a[row][col] != 0 {
                pivot = Some(row);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let pinv = md.inv(a[rank][col]);
        for j in 0..cols {
            a[rank][j] = md.mul(a[rank][j], pinv);
        }
        for row in 0..rows {
            if row != rank && a[row][col] != 0 {
                let factor = a[row][col];
                for j in 0..cols {
                    a[row][j] = md.sub(a[row][j], md.mul(factor, a[rank][j]));
                }
            }
        }
        pivot_col_of_row[rank] = col;
        pivot_row_of_col[col] = rank;
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_row_of_col[free] != usize::MAX {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for row in 0..rank {
            let pc = pivot_col_of_row[row];
            v[pc] = md.sub(0, a[row][free]);
        }
        basis.push(v);
    }
    basis
}

struct ClassMatrices {
    /// a[i][j*r + k] = #{(x, y) in C_i x C_j : x y = rep_k}
    mats: Vec<Vec<u64>>,
}

fn class_matrices(data: &ClassData) -> Result<ClassMatrices> {
    let (carrier, elem_class, members) = data.members().ok_or_else(|| {
        Error::DixonBudget(format!("{} has no materialized carrier", data.group_tag))
    })?;
    let r = data.num_classes();
    let f = &data.field;
    let reps: Vec<_> = data.classes.iter().map(|c| c.rep).collect();
    let mats: Vec<Vec<u64>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut a = vec![0u64; r * r];
            for &xi in &members[i] {
                let x = carrier.elements[xi as usize];
                let xinv = x.inverse(f).expect("group element");
                for (k, rep) in reps.iter().enumerate() {
                    let y = xinv.mul(rep, f);
                    let yi = carrier.index_of(&y).expect("closed under products");
                    let j = elem_class[yi as usize] as usize;
                    a[j * r + k] += 1;
                }
            }
            a
        })
        .collect();
    Ok(ClassMatrices { mats })
}

/// Restrict the linear map given by `mat` (r x r, acting on column vectors)
/// to the span of `basis`; returns the d x d matrix of the restriction.
fn restrict_to_subspace(
    mat: &[u64],
    r: usize,
    basis: &[Vec<u64>],
    md: Modulus,
) -> Vec<Vec<u64>> {
    let d = basis.len();
    // images: M b_t
    let images: Vec<Vec<u64>> = basis
        .iter()
        .map(|b| {
            (0..r)
                .map(|j| {
                    let mut acc = 0u64;
                    for (k, &bk) in b.iter().enumerate() {
                        acc = md.add(acc, md.mul(mat[j * r + k], bk));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // solve B A = images: pick pivot rows of B
    // build augmented system over the pivot rows
    let mut work: Vec<Vec<u64>> = (0..r)
        .map(|row| {
            let mut line = Vec::with_capacity(d + d);
            for b in basis {
                line.push(b[row]);
            }
            for img in &images {
                line.push(img[row]);
            }
            line
        })
        .collect();
    // gaussian elimination to reduced form on the first d columns
    let mut rank = 0;
    for col in 0..d {
        let mut pivot = None;
        for row in rank..r {
            if work[row][col] != 0 {
                pivot = Some(row);
                break;
            }
        }
        let p = pivot.expect("basis has full column rank");
        work.swap(rank, p);
        let pinv = md.inv(work[rank][col]);
        for j in 0..2 * d {
            work[rank][j] = md.mul(work[rank][j], pinv);
        }
        for row in 0..r {
            if row != rank && work[row][col] != 0 {
                let factor = work[row][col];
                for j in 0..2 * d {
                    work[row][j] = md.sub(work[row][j], md.mul(factor, work[rank][j]));
                }
            }
        }
        rank += 1;
    }
    assert_eq!(rank, d);
    // restriction matrix: A[t][s] = coefficient of b_t in image of b_s
    (0..d).map(|t| (0..d).map(|s| work[t][d + s]).collect()).collect()
}

/// Computes the full exact character table of an enumerated group.
///
/// Budgets bound the group order and class count; the seed drives the
/// deterministic random sequence used by eigenvalue splitting.
pub fn dixon_schneider(
    data: &Arc<ClassData>,
    seed: u64,
    max_order: u64,
    max_classes: usize,
) -> Result<CharacterTable> {
    if data.order > max_order {
        return Err(Error::DixonBudget(format!(
            "{}: order {} over table budget {}",
            data.group_tag, data.order, max_order
        )));
    }
    let r = data.num_classes();
    if r > max_classes {
        return Err(Error::DixonBudget(format!(
            "{}: {} classes over table budget {}",
            data.group_tag, r, max_classes
        )));
    }
    let m = data.exponent() as u64;
    let floor = (2 * (data.order.sqrt() + 1)).max(r as u64).max(1000);
    let l = find_prime(m, floor);
    let md = Modulus(l);
    let cm = class_matrices(data)?;

    // split the full space into common eigenspaces
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subspaces: Vec<Vec<Vec<u64>>> = vec![(0..r)
        .map(|i| {
            let mut v = vec![0u64; r];
            v[i] = 1;
            v
        })
        .collect()];
    for i in 1..r {
        if subspaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let mat = &cm.mats[i];
        let mut next: Vec<Vec<Vec<u64>>> = Vec::new();
        for sub in subspaces.into_iter() {
            if sub.len() == 1 {
                next.push(sub);
                continue;
            }
            let a = restrict_to_subspace(mat, r, &sub, md);
            let cp = charpoly(a.clone(), md);
            let sf = squarefree_part(&cp, md);
            let mut roots = Vec::new();
            split_roots(sf, md, &mut rng, &mut roots);
            roots.sort_unstable();
            if roots.len() == 1 {
                next.push(sub);
                continue;
            }
            let d = sub.len();
            for &lambda in &roots {
                let mut shifted = a.clone();
                for t in 0..d {
                    shifted[t][t] = md.sub(shifted[t][t], lambda);
                }
                let kern = kernel_basis(shifted, d, md);
                // lift kernel coordinates through the subspace basis
                let lifted: Vec<Vec<u64>> = kern
                    .iter()
                    .map(|kv| {
                        (0..r)
                            .map(|row| {
                                let mut acc = 0u64;
                                for (t, &c) in kv.iter().enumerate() {
                                    acc = md.add(acc, md.mul(c, sub[t][row]));
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect();
                if !lifted.is_empty() {
                    next.push(lifted);
                }
            }
        }
        subspaces = next;
    }
    if subspaces.len() != r || subspaces.iter().any(|s| s.len() != 1) {
        return Err(Error::Invariant(format!(
            "{}: eigenspace splitting incomplete ({} spaces for {} classes)",
            data.group_tag,
            subspaces.len(),
            r
        )));
    }

    // normalize eigenvectors at the identity class and lift to characters
    let sizes: Vec<u64> = data.classes.iter().map(|c| c.size % l).collect();
    let order_mod = data.order % l;
    let z = {
        let g = primitive_root(l);
        md.pow(g, (l - 1) / m)
    };
    // power-class tables per class
    let power_classes: Vec<Vec<usize>> = (0..r)
        .map(|k| {
            let o = data.element_orders[k] as usize;
            let mut row = Vec::with_capacity(o);
            let mut x = crate::mat::Mat::identity(data.classes[k].rep.n);
            for _ in 0..o {
                row.push(data.class_of(&x).expect("power stays in the group"));
                x = x.mul(&data.classes[k].rep, &data.field);
            }
            row
        })
        .collect();

    let mut rows_raw: Vec<(u64, Vec<u64>)> = Vec::with_capacity(r);
    for sub in &subspaces {
        let mut v = sub[0].clone();
        let v0 = v[0];
        if v0 == 0 {
            return Err(Error::Invariant("eigenvector vanishes at the identity".into()));
        }
        let inv0 = md.inv(v0);
        for c in v.iter_mut() {
            *c = md.mul(*c, inv0);
        }
        // S = sum v_k v_{k*} / |C_k| = |G| / d^2
        let mut s = 0u64;
        for k in 0..r {
            let term = md.mul(v[k], v[data.inverse_class[k]]);
            s = md.add(s, md.mul(term, md.inv(sizes[k])));
        }
        let target = md.mul(order_mod, md.inv(s));
        let mut degree = 0u64;
        for dcand in 1..=data.order.sqrt() + 1 {
            if md.mul(dcand % l, dcand % l) == target {
                degree = dcand;
                break;
            }
        }
        if degree == 0 {
            return Err(Error::Invariant("irrep degree not recovered".into()));
        }
        // modular character values
        let vals: Vec<u64> = (0..r)
            .map(|k| md.mul(md.mul(degree % l, v[k]), md.inv(sizes[k])))
            .collect();
        rows_raw.push((degree, vals));
    }

    // Fourier lift: char(g) = sum_s mu_s zeta_o^s with
    // mu_s = o^-1 sum_l char(g^l) z_o^(-s l), exact since mu_s < l.
    let lift_rows: Vec<(u64, Vec<Cyclotomic>)> = rows_raw
        .par_iter()
        .map(|(degree, vals)| {
            let values: Vec<Cyclotomic> = (0..r)
                .map(|k| {
                    let o = data.element_orders[k] as u64;
                    let zo = md.pow(z, m / o);
                    let zo_inv = md.inv(zo);
                    let o_inv = md.inv(o % l);
                    let mut value = Cyclotomic::zero(m as u32);
                    for s in 0..o {
                        let mut acc = 0u64;
                        for t in 0..o {
                            let c = vals[power_classes[k][t as usize]];
                            acc = md.add(acc, md.mul(c, md.pow(zo_inv, s * t % (l - 1))));
                        }
                        let mu = md.mul(acc, o_inv);
                        assert!(mu <= *degree, "unity-root multiplicity out of range");
                        if mu > 0 {
                            value = value.add(&Cyclotomic::root_of_unity(m as u32, (s * (m / o)) as i64).scale_int(mu as i64));
                        }
                    }
                    value
                })
                .collect();
            (*degree, values)
        })
        .collect();

    let mut rows: Vec<ClassFunction> = Vec::with_capacity(r);
    let mut degrees = Vec::with_capacity(r);
    let mut order_idx: Vec<usize> = (0..r).collect();
    order_idx.sort_by(|&a, &b| {
        lift_rows[a].0.cmp(&lift_rows[b].0).then_with(|| {
            for k in 0..r {
                let c = lift_rows[a].1[k].cmp_canonical(&lift_rows[b].1[k]);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    for idx in order_idx {
        degrees.push(lift_rows[idx].0);
        rows.push(ClassFunction {
            group_tag: data.group_tag.clone(),
            values: lift_rows[idx].1.clone(),
        });
    }
    let table = CharacterTable { data: Arc::clone(data), degrees, rows };
    table.validate()?;
    Ok(table)
}
