//! Exact linear algebra over the rationals.
//!
//! Rows are cleared of denominators and eliminated fraction-free over the
//! integers, dividing out the row content after every combination. Pivots are
//! chosen by smallest bit length of the leading entry, ties broken by row
//! length and then by input order, so results are deterministic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;

pub type Q = BigRational;

/// Sparse integer row: `(column, value)` pairs, sorted, no zeros.
pub type SparseRow = Vec<(usize, BigInt)>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Clears denominators of a rational row.
pub fn integer_row<'a, I>(entries: I) -> SparseRow
where
    I: IntoIterator<Item = (usize, &'a Q)>,
{
    let entries: Vec<(usize, &Q)> = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    let mut l = BigInt::one();
    for (_, v) in &entries {
        l = l.lcm(v.denom());
    }
    let mut row: SparseRow = entries
        .into_iter()
        .map(|(c, v)| (c, v.numer() * (&l / v.denom())))
        .collect();
    row.sort_by_key(|e| e.0);
    normalize(&mut row);
    row
}

pub fn dense_to_sparse(rows: &[Vec<Q>]) -> Vec<SparseRow> {
    rows.iter().map(|r| integer_row(r.iter().enumerate())).collect()
}

fn normalize(row: &mut SparseRow) {
    let Some(first) = row.first() else { return };
    let mut g = first.1.abs();
    for (_, v) in row.iter().skip(1) {
        if g.is_one() {
            break;
        }
        g = g.gcd(v);
    }
    let flip = first.1.is_negative();
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    if flip {
        for (_, v) in row.iter_mut() {
            *v = -&*v;
        }
    }
}

fn entry(row: &SparseRow, col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// Returns `alpha * s - beta * r`.
fn combine(alpha: &BigInt, s: &SparseRow, beta: &BigInt, r: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(s.len() + r.len());
    let (mut i, mut j) = (0, 0);
    while i < s.len() || j < r.len() {
        let take = match (s.get(i), r.get(j)) {
            (Some(a), Some(b)) => a.0.cmp(&b.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match take {
            std::cmp::Ordering::Less => {
                out.push((s[i].0, alpha * &s[i].1));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((r[j].0, -(beta * &r[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = alpha * &s[i].1 - beta * &r[j].1;
                if !v.is_zero() {
                    out.push((s[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Eliminates column `col` from `s` using `pivot` (whose entry there is `p`).
fn eliminate(s: &SparseRow, pivot: &SparseRow, p: &BigInt, col: usize) -> SparseRow {
    let Some(v) = entry(s, col) else { return s.clone() };
    let g = p.gcd(v);
    let mut out = combine(&(p / &g), s, &(v / &g), pivot);
    normalize(&mut out);
    out
}

/// Row echelon form of a sparse integer matrix.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Vec<SparseRow>,
    pub ncols: usize,
    reduced: bool,
}

impl Echelon {
    pub fn new(rows: Vec<SparseRow>, ncols: usize) -> Self {
        let mut buckets: BTreeMap<usize, Vec<SparseRow>> = BTreeMap::new();
        for mut r in rows {
            r.retain(|e| !e.1.is_zero());
            if let Some(&(c, _)) = r.first() {
                buckets.entry(c).or_default().push(r);
            }
        }
        let mut out = Vec::new();
        while let Some((col, mut group)) = buckets.pop_first() {
            let best = group
                .iter()
                .enumerate()
                .min_by_key(|(i, r)| (r[0].1.bits(), r.len(), *i))
                .map(|(i, _)| i)
                .unwrap();
            let pivot = group.swap_remove(best);
            let p = pivot[0].1.clone();
            for s in group {
                let reduced = eliminate(&s, &pivot, &p, col);
                if let Some(&(c, _)) = reduced.first() {
                    buckets.entry(c).or_default().push(reduced);
                }
            }
            out.push(pivot);
        }
        Echelon { rows: out, ncols, reduced: false }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0).collect()
    }

    /// Clears every pivot column above its pivot.
    pub fn reduce(&mut self) {
        if self.reduced {
            return;
        }
        for i in (0..self.rows.len()).rev() {
            let (col, p) = (self.rows[i][0].0, self.rows[i][0].1.clone());
            for j in 0..i {
                if entry(&self.rows[j], col).is_some() {
                    let pivot = &self.rows[i];
                    let updated = eliminate(&self.rows[j], pivot, &p, col);
                    self.rows[j] = updated;
                }
            }
        }
        self.reduced = true;
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn nullspace(&mut self) -> Vec<Vec<Q>> {
        self.reduce();
        let pivots = self.pivots();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![Q::zero(); self.ncols];
            x[f] = Q::one();
            for row in &self.rows {
                if let Some(v) = entry(row, f) {
                    x[row[0].0] = -Q::new(v.clone(), row[0].1.clone());
                }
            }
            basis.push(x);
        }
        basis
    }
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    Echelon::new(dense_to_sparse(rows), ncols).rank()
}

pub fn rank_sparse(rows: Vec<SparseRow>, ncols: usize) -> usize {
    Echelon::new(rows, ncols).rank()
}

pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    Echelon::new(dense_to_sparse(rows), ncols).nullspace()
}

/// Solves `rows · x = rhs`; free variables are set to zero.
pub fn solve(rows: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let augmented: Vec<SparseRow> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| integer_row(r.iter().enumerate().chain(std::iter::once((ncols, b)))))
        .collect();
    let mut ech = Echelon::new(augmented, ncols + 1);
    if ech.pivots().last() == Some(&ncols) {
        return None;
    }
    ech.reduce();
    let mut x = vec![Q::zero(); ncols];
    for row in &ech.rows {
        if let Some(b) = entry(row, ncols) {
            x[row[0].0] = Q::new(b.clone(), row[0].1.clone());
        }
    }
    Some(x)
}

/// Dimension of the span of the given vectors.
pub fn span_dim(vectors: &[Vec<Q>]) -> usize {
    rank(vectors)
}

/// True when the two lists of vectors span the same subspace.
pub fn same_span(a: &[Vec<Q>], b: &[Vec<Q>]) -> bool {
    let ra = span_dim(a);
    if ra != span_dim(b) {
        return false;
    }
    let both: Vec<Vec<Q>> = a.iter().chain(b).cloned().collect();
    span_dim(&both) == ra
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn transpose(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = m.first().map_or(0, |r| r.len());
    (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Characteristic polynomial `det(λI − m)` via reduction to upper
/// Hessenberg form followed by the standard recurrence.
pub fn char_poly(m: &[Vec<Q>]) -> Poly {
    let n = m.len();
    let mut h: Vec<Vec<Q>> = m.to_vec();
    for col in 0..n.saturating_sub(2) {
        let sub = col + 1;
        let Some(i) = (sub..n).find(|&i| !h[i][col].is_zero()) else { continue };
        if i != sub {
            h.swap(i, sub);
            for row in h.iter_mut() {
                row.swap(i, sub);
            }
        }
        let pivot = h[sub][col].clone();
        for i in sub + 1..n {
            if h[i][col].is_zero() {
                continue;
            }
            let u = &h[i][col] / &pivot;
            for j in 0..n {
                if !h[sub][j].is_zero() {
                    let t = &u * &h[sub][j];
                    h[i][j] -= t;
                }
            }
            for row in h.iter_mut() {
                if !row[i].is_zero() {
                    let t = &u * &row[i];
                    row[sub] += t;
                }
            }
        }
    }
    let mut polys: Vec<Poly> = vec![Poly::one()];
    for k in 0..n {
        let mut pk = polys[k].mul_linear(&h[k][k]);
        let mut t = Q::one();
        for i in 1..=k {
            t *= &h[k - i + 1][k - i];
            if t.is_zero() {
                break;
            }
            let coeff = &t * &h[k - i][k];
            if !coeff.is_zero() {
                pk = pk.sub(&polys[k - i].scale(&coeff));
            }
        }
        polys.push(pk);
    }
    polys.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(&m(&[&[0, -2], &[2, 0]])), 2);
        assert_eq!(rank(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), 2);
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let a = m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&a, &ns[0]).iter().all(Zero::is_zero));
        assert_eq!(ns[0], vec![q(1), q(-2), q(1)]);
    }

    #[test]
    fn solve_with_rational_entries() {
        let a = vec![vec![q_frac(1, 2), q(1)], vec![q(3), q_frac(-1, 3)]];
        let b = vec![q(1), q(2)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(mat_vec(&a, &x), b);
        assert!(solve(&m(&[&[1, 1], &[2, 2]]), &[q(1), q(3)]).is_none());
    }

    #[test]
    fn char_poly_matches_hand_values() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let p = char_poly(&m(&[&[2, 1], &[1, 2]]));
        assert_eq!(p.coeffs(), &[q(3), q(-4), q(1)]);
        // companion matrix of x^3 - 6x^2 + 11x - 6
        let c = m(&[&[0, 0, 6], &[1, 0, -11], &[0, 1, 6]]);
        assert_eq!(char_poly(&c).coeffs(), &[q(-6), q(11), q(-6), q(1)]);
        let z = char_poly(&m(&[&[0, 0], &[0, 0]]));
        assert_eq!(z.coeffs(), &[q(0), q(0), q(1)]);
    }

    #[test]
    fn char_poly_needing_row_swap() {
        let a = m(&[&[1, 2, 0], &[0, 3, 4], &[5, 0, 6]]);
        // det(λI - A) = λ^3 - 10λ^2 + 27λ - 58
        assert_eq!(char_poly(&a).coeffs(), &[q(-58), q(27), q(-10), q(1)]);
    }
}
