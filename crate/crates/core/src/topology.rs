//! Order complexes and their rational homology.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use serde::Serialize;

use crate::linalg::{self, SparseRow};
use crate::poset::Poset;

/// Simplicial complex with faces grouped by dimension; `faces[d]` holds the
/// sorted vertex lists of size `d + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub vertices: usize,
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Downward closure of the given facets.
    pub fn from_facets(vertices: usize, facets: &[Vec<usize>]) -> Self {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for v in 0..vertices {
            insert(&mut by_dim, vec![v]);
        }
        for facet in facets {
            let mut f = facet.clone();
            f.sort_unstable();
            f.dedup();
            let k = f.len();
            for mask in 1u64..(1u64 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                insert(&mut by_dim, sub);
            }
        }
        SimplicialComplex { vertices, faces: by_dim.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    pub fn dimension(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    pub fn face_counts(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.faces
            .iter()
            .enumerate()
            .map(|(d, f)| if d % 2 == 0 { f.len() as i64 } else { -(f.len() as i64) })
            .sum()
    }
}

fn insert(by_dim: &mut Vec<BTreeSet<Vec<usize>>>, face: Vec<usize>) {
    let d = face.len() - 1;
    while by_dim.len() <= d {
        by_dim.push(BTreeSet::new());
    }
    by_dim[d].insert(face);
}

/// Complex whose faces are the chains of `P`; vertices are element indices
/// and every face lists its elements from bottom to top.
pub fn order_complex(poset: &Poset) -> SimplicialComplex {
    let order = poset.linear_extension();
    let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut chain = Vec::new();
    fn extend(poset: &Poset, order: &[usize], from: usize, chain: &mut Vec<usize>, faces: &mut Vec<Vec<Vec<usize>>>) {
        for (k, &v) in order.iter().enumerate().skip(from) {
            if chain.last().is_some_and(|&top| !poset.less(top, v)) {
                continue;
            }
            chain.push(v);
            if faces.len() < chain.len() {
                faces.push(Vec::new());
            }
            faces[chain.len() - 1].push(chain.clone());
            extend(poset, order, k + 1, chain, faces);
            chain.pop();
        }
    }
    extend(poset, &order, 0, &mut chain, &mut faces);
    for level in &mut faces {
        for face in level.iter_mut() {
            face.sort_unstable();
        }
        level.sort();
    }
    SimplicialComplex { vertices: poset.len(), faces }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub betti: Vec<usize>,
    pub euler: i64,
    pub faces: Vec<usize>,
}

/// Rank of the boundary map from `d`-faces to `(d−1)`-faces.
fn boundary_rank(k: &SimplicialComplex, d: usize) -> usize {
    if d == 0 || d >= k.faces.len() {
        return 0;
    }
    let lower: HashMap<&[usize], usize> =
        k.faces[d - 1].iter().enumerate().map(|(i, f)| (f.as_slice(), i)).collect();
    let rows: Vec<SparseRow> = k.faces[d]
        .iter()
        .map(|face| {
            let mut row: SparseRow = (0..face.len())
                .map(|skip| {
                    let sub: Vec<usize> =
                        face.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                    let sign = if skip % 2 == 0 { 1 } else { -1 };
                    (lower[sub.as_slice()], BigInt::from(sign))
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    linalg::rank_sparse(rows, k.faces[d - 1].len())
}

/// Rational Betti numbers `b_0..b_max_dim`.
pub fn betti_numbers(k: &SimplicialComplex, max_dim: usize) -> HomologyReport {
    let ranks: Vec<usize> = (0..=max_dim + 1).map(|d| boundary_rank(k, d)).collect();
    let betti = (0..=max_dim)
        .map(|d| {
            let chains = k.faces.get(d).map_or(0, Vec::len);
            chains - ranks[d] - ranks[d + 1]
        })
        .collect();
    HomologyReport { betti, euler: k.euler_characteristic(), faces: k.face_counts() }
}

/// Homology of `Σ(P)` is that of a wedge of `expected` circles, checked up
/// to dimension `height(P)`. This is necessary for the homotopy type, not
/// sufficient.
pub fn verify_wedge(poset: &Poset, expected: usize) -> bool {
    let max_dim = poset.height().max(1);
    let report = betti_numbers(&order_complex(poset), max_dim);
    let mut want = vec![0; max_dim + 1];
    want[0] = 1;
    want[1] = expected;
    report.betti == want
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Poset {
        Poset::from_indices(4, &[(0, 1), (1, 2), (1, 3)]).unwrap()
    }

    #[test]
    fn example_complex() {
        let k = order_complex(&example());
        assert_eq!(k.faces[2], vec![vec![0, 1, 2], vec![0, 1, 3]]);
        assert_eq!(k.face_counts(), vec![4, 5, 2]);
        let h = betti_numbers(&k, 2);
        assert_eq!(h.betti, vec![1, 0, 0]);
        assert_eq!(h.euler, 1);
    }

    #[test]
    fn antichain_and_circle() {
        let k = order_complex(&Poset::antichain(3));
        assert_eq!(k.face_counts(), vec![3]);
        assert_eq!(betti_numbers(&k, 1).betti, vec![3, 0]);
        let circle = SimplicialComplex::from_facets(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(betti_numbers(&circle, 1).betti, vec![1, 1]);
    }

    #[test]
    fn wedge_check() {
        assert!(verify_wedge(&example(), 0));
        assert!(!verify_wedge(&example(), 1));
        // crown on four elements: Σ is a circle
        let crown = Poset::from_indices(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert!(verify_wedge(&crown, 1));
    }
}
