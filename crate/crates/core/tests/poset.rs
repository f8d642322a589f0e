use std::collections::BTreeSet;

use toral_core::{CanonicalForm, Error, Poset};

/// Every strict partial order on `n` labeled elements, by brute force over
/// all sets of ordered pairs.
fn labeled_posets(n: usize) -> Vec<Poset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let rel: BTreeSet<(usize, usize)> =
            pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect();
        let antisymmetric = rel.iter().all(|&(i, j)| !rel.contains(&(j, i)));
        let transitive =
            rel.iter().all(|&(i, j)| rel.iter().filter(|&&(a, _)| a == j).all(|&(_, k)| rel.contains(&(i, k))));
        if antisymmetric && transitive {
            out.push(Poset::from_indices(n, &rel.into_iter().collect::<Vec<_>>()).unwrap());
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic(a: &Poset, b: &Poset) -> bool {
    let n = a.len();
    n == b.len()
        && a.relations().len() == b.relations().len()
        && permutations(n).iter().any(|perm| a.relations().iter().all(|&(i, j)| b.less(perm[i], perm[j])))
}

#[test]
fn labeled_counts_and_classes() {
    let three = labeled_posets(3);
    assert_eq!(three.len(), 19);
    let classes: BTreeSet<CanonicalForm> = three.iter().map(|p| p.canonical_form().unwrap()).collect();
    assert_eq!(classes.len(), 5);

    let four = labeled_posets(4);
    assert_eq!(four.len(), 219);
    let classes: BTreeSet<CanonicalForm> = four.iter().map(|p| p.canonical_form().unwrap()).collect();
    assert_eq!(classes.len(), 16);
}

#[test]
fn canonical_form_decides_isomorphism() {
    let four = labeled_posets(4);
    // pairs drawn with a fixed stride to keep the quadratic check small
    for (k, a) in four.iter().enumerate().step_by(3) {
        for b in four.iter().skip(k % 7).step_by(5) {
            let same = a.canonical_form().unwrap() == b.canonical_form().unwrap();
            assert_eq!(same, isomorphic(a, b), "{:?} {:?}", a.relations(), b.relations());
        }
    }
}

#[test]
fn canonical_form_round_trips_at_five() {
    let crown_plus = Poset::from_indices(5, &[(0, 2), (0, 3), (1, 2), (1, 3), (3, 4)]).unwrap();
    for perm in permutations(5) {
        let q = crown_plus.permuted(&perm);
        let cf = q.canonical_form().unwrap();
        assert_eq!(cf, crown_plus.canonical_form().unwrap());
        let back = cf.to_poset().unwrap();
        assert!(isomorphic(&back, &crown_plus));
        assert_eq!(cf.to_string().parse::<CanonicalForm>().unwrap(), cf);
    }
}

#[test]
fn canonical_form_size_limit() {
    assert!(matches!(Poset::antichain(9).canonical_form(), Err(Error::Size { size: 9, .. })));
    assert!(Poset::chain(8).canonical_form().is_ok());
}

#[test]
fn cycles_are_rejected() {
    assert!(matches!(Poset::from_indices(3, &[(0, 1), (1, 2), (2, 0)]), Err(Error::Cycle(_))));
    let err = Poset::from_json_str(r#"{"elements":["a","b"],"relations":[["a","c"]]}"#).unwrap_err();
    assert!(matches!(err, Error::UnknownElement(ref e) if e == "c"));
}

#[test]
fn heights_and_duals() {
    assert_eq!(Poset::chain(5).height(), 4);
    assert_eq!(Poset::antichain(5).height(), 0);
    let p = Poset::from_indices(4, &[(0, 1), (0, 2), (2, 3)]).unwrap();
    let d = p.dual();
    assert_eq!(d.height(), p.height());
    let ext = p.extremal_data();
    let dext = d.extremal_data();
    assert_eq!(ext.minimals, dext.maximals);
    assert_eq!(ext.maximals, dext.minimals);
    assert!(p.is_ideal(&[0, 2]) && d.is_filter(&[0, 2]));
}

#[test]
fn disjoint_union_is_disconnected() {
    let u = Poset::chain(2).disjoint_union(&Poset::chain(3)).unwrap();
    assert_eq!(u.len(), 5);
    assert_eq!(u.relations().len(), 1 + 3);
    assert!(!u.is_connected());
    let names: BTreeSet<&str> = u.names().iter().map(String::as_str).collect();
    assert_eq!(names.len(), 5);
}
