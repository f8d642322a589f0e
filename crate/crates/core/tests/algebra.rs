use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toral_core::algebra::{BasisVector, LiePosetAlgebra};
use toral_core::linalg::{q, same_span, Q};
use toral_core::{Element, Functional, Poset};

type Dense = Vec<Vec<Q>>;

fn dense(x: &Element, n: usize) -> Dense {
    let mut m = vec![vec![Q::zero(); n]; n];
    for (&(i, j), v) in x.terms() {
        m[i][j] = v.clone();
    }
    m
}

fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

fn commutator(a: &Dense, b: &Dense) -> Dense {
    let (ab, ba) = (mul(a, b), mul(b, a));
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

fn example() -> Poset {
    Poset::from_indices(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4)]).unwrap()
}

#[test]
fn structure_constants_match_matrix_commutators() {
    let p = example();
    let g = LiePosetAlgebra::build(&p).unwrap();
    let n = p.len();
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let coords = g.bracket_basis(i, j);
            let mut from_table = vec![vec![Q::zero(); n]; n];
            for (k, c) in coords {
                for (&(a, b), v) in g.basis_element(k).terms() {
                    from_table[a][b] += v * q(c);
                }
            }
            let direct = commutator(&dense(&g.basis_element(i), n), &dense(&g.basis_element(j), n));
            assert_eq!(from_table, direct, "{i} {j}");
        }
    }
}

#[test]
fn jacobi_identity() {
    let g = LiePosetAlgebra::build(&example()).unwrap();
    let d = g.dim();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let (x, y, z) = (g.basis_element(i), g.basis_element(j), g.basis_element(k));
                let sum = x.bracket(&y.bracket(&z)).add(&y.bracket(&z.bracket(&x))).add(&z.bracket(&x.bracket(&y)));
                assert!(sum.is_zero());
            }
        }
    }
}

#[test]
fn dimension_and_basis_shape() {
    let p = example();
    let g = LiePosetAlgebra::build(&p).unwrap();
    assert_eq!(g.dim(), p.relations().len() + p.len() - 1);
    let cartan = g.basis().iter().filter(|b| matches!(b, BasisVector::CartanStep(_))).count();
    assert_eq!(cartan, p.len() - 1);
    assert!(LiePosetAlgebra::build(&Poset::antichain(1)).is_err());
}

#[test]
fn index_of_borel_subalgebras() {
    // the chain gives the Borel subalgebra of sl(n), of index ⌊(n−1)/2⌋
    for n in 2..=7 {
        let g = LiePosetAlgebra::build(&Poset::chain(n)).unwrap();
        assert_eq!(g.index(3, 5), (n - 1) / 2, "n = {n}");
    }
    for n in 2..=5 {
        assert_eq!(LiePosetAlgebra::build(&Poset::antichain(n)).unwrap().index(3, 5), n - 1);
    }
}

#[test]
fn index_examples() {
    // P2: p1 ≺ p2 ≺ p3, p4
    let p2 = Poset::from_indices(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
    assert_eq!(LiePosetAlgebra::build(&p2).unwrap().index(3, 0), 0);
    // crown on four elements
    let crown = Poset::from_indices(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    assert_eq!(LiePosetAlgebra::build(&crown).unwrap().index(3, 0), 1);
}

#[test]
fn index_is_seed_independent_and_monotone() {
    let g = LiePosetAlgebra::build(&example()).unwrap();
    let base = g.index(1, 1);
    for trials in 1..=4 {
        assert!(g.index(trials, 1) <= base);
        assert_eq!(g.index(trials, 1), g.index(trials, 999));
    }
}

#[test]
fn kirillov_matrix_is_skew() {
    let g = LiePosetAlgebra::build(&example()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let f = g.random_functional(&mut rng);
        let k = g.kirillov_matrix(&f);
        assert!(k.is_skew());
        assert_eq!(k.rank() % 2, 0);
        assert_eq!(g.kernel(&f).len(), g.kernel_dim(&f));
    }
}

#[test]
fn reduced_kernel_systems_agree() {
    let p = example();
    let g = LiePosetAlgebra::build(&p).unwrap();
    let f = Functional::all_ones(&p, &[(0, 1), (0, 2), (2, 4)]).unwrap();
    let a = g.kernel_diagonal_units(&f);
    let b = g.kernel_cartan_differences(&f);
    assert!(same_span(&a, &b));
    assert_eq!(a.len(), g.kernel_dim(&f));
}
