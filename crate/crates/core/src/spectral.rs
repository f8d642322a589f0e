//! Small functionals, principal elements and the spectrum of ad(F̂).

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::algebra::{Element, Functional, LiePosetAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, q, Q};
use crate::poly::Poly;
use crate::poset::Poset;

/// Directed support graph of a functional: one edge `p → q` per summand
/// `E*_{p,q}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl FunctionalGraph {
    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == v).count()
    }

    /// Underlying undirected graph is a spanning tree.
    pub fn is_spanning_tree(&self) -> bool {
        if self.vertices == 0 || self.edges.len() != self.vertices - 1 {
            return false;
        }
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(p, q) in &self.edges {
            let (a, b) = (find(&mut parent, p), find(&mut parent, q));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

pub fn functional_graph(poset: &Poset, f: &Functional) -> FunctionalGraph {
    FunctionalGraph { vertices: poset.len(), edges: f.support() }
}

pub fn is_small(poset: &Poset, f: &Functional) -> Result<bool> {
    if !f.is_all_ones() {
        return Err(Error::Form);
    }
    Ok(functional_graph(poset, f).is_spanning_tree())
}

/// Sinks `u`, sources `d` and the remaining vertices `b` of the support
/// graph, with the three structural checks used by the closed form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SinkSourcePartition {
    pub u: Vec<usize>,
    pub d: Vec<usize>,
    pub b: Vec<usize>,
    pub u_filter: bool,
    pub d_ideal: bool,
    pub b_empty: bool,
}

impl SinkSourcePartition {
    pub fn conditions_hold(&self) -> bool {
        self.u_filter && self.d_ideal && self.b_empty
    }
}

pub fn partition(poset: &Poset, f: &Functional) -> Result<SinkSourcePartition> {
    if !is_small(poset, f)? {
        return Err(Error::NotSmall);
    }
    let g = functional_graph(poset, f);
    let (mut u, mut d, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for v in 0..poset.len() {
        match (g.in_degree(v), g.out_degree(v)) {
            (_, 0) => u.push(v),
            (0, _) => d.push(v),
            _ => b.push(v),
        }
    }
    Ok(SinkSourcePartition {
        u_filter: poset.is_filter(&u),
        d_ideal: poset.is_ideal(&d),
        b_empty: b.is_empty(),
        u,
        d,
        b,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrincipalElement {
    /// `c_{p,p}` for every element, summing to zero.
    Diagonal(Vec<Q>),
    /// Coordinates in the algebra's basis.
    General(Vec<Q>),
}

impl PrincipalElement {
    pub fn to_element(&self, g: &LiePosetAlgebra) -> Element {
        match self {
            PrincipalElement::Diagonal(c) => Element::diagonal(c),
            PrincipalElement::General(coords) => g.element_from_coordinates(coords),
        }
    }

    /// Diagonal entries when the element has no root component.
    pub fn diagonal_values(&self, g: &LiePosetAlgebra) -> Option<Vec<Q>> {
        match self {
            PrincipalElement::Diagonal(c) => Some(c.clone()),
            PrincipalElement::General(_) => {
                let x = self.to_element(g);
                if x.terms().any(|((p, q), _)| p != q) {
                    return None;
                }
                Some((0..g.poset().len()).map(|p| x.get(p, p)).collect())
            }
        }
    }
}

fn require_frobenius(poset: &Poset, f: &Functional) -> Result<LiePosetAlgebra> {
    let g = LiePosetAlgebra::build(poset)?;
    match g.kernel_dim(f) {
        0 => Ok(g),
        k => Err(Error::NotFrobenius(k)),
    }
}

/// Solves `c_p − c_q = 1` on every support edge with `Σ c_p = 0` by walking
/// the support tree.
pub fn principal_small(poset: &Poset, f: &Functional) -> Result<PrincipalElement> {
    if !is_small(poset, f)? {
        return Err(Error::NotSmall);
    }
    require_frobenius(poset, f)?;
    let n = poset.len();
    let mut adj: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n];
    for (p, q) in f.support() {
        adj[p].push((q, -Q::one()));
        adj[q].push((p, Q::one()));
    }
    let mut c: Vec<Option<Q>> = vec![None; n];
    c[0] = Some(Q::zero());
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let cv = c[v].clone().unwrap();
        for (w, step) in &adj[v] {
            if c[*w].is_none() {
                c[*w] = Some(&cv + step);
                queue.push_back(*w);
            }
        }
    }
    let c: Vec<Q> = c.into_iter().map(Option::unwrap).collect();
    let mean = c.iter().sum::<Q>() / q(n as i64);
    Ok(PrincipalElement::Diagonal(c.into_iter().map(|x| x - &mean).collect()))
}

/// `c = |U|/|P|` on sources and `−|D|/|P|` on sinks.
pub fn principal_closed_form(poset: &Poset, f: &Functional) -> Result<PrincipalElement> {
    let part = match partition(poset, f) {
        Ok(p) => p,
        Err(Error::NotSmall) => return Err(Error::Condition("functional is not small".into())),
        Err(Error::Form) => return Err(Error::Condition("functional is not all-ones".into())),
        Err(e) => return Err(e),
    };
    if let Err(Error::NotFrobenius(k)) = require_frobenius(poset, f) {
        return Err(Error::Condition(format!("functional is not Frobenius (kernel dimension {k})")));
    }
    if !part.u_filter {
        return Err(Error::Condition("sinks do not form a filter".into()));
    }
    if !part.d_ideal {
        return Err(Error::Condition("sources do not form an ideal".into()));
    }
    if !part.b_empty {
        return Err(Error::Condition("some vertex is neither sink nor source".into()));
    }
    let n = q(poset.len() as i64);
    let on_d = q(part.u.len() as i64) / &n;
    let on_u = -q(part.d.len() as i64) / &n;
    let mut c = vec![Q::zero(); poset.len()];
    for &p in &part.d {
        c[p] = on_d.clone();
    }
    for &p in &part.u {
        c[p] = on_u.clone();
    }
    Ok(PrincipalElement::Diagonal(c))
}

/// Unique `F̂` with `B_F(F̂, x) = F(x)` for every basis vector `x`.
pub fn principal_general(g: &LiePosetAlgebra, f: &Functional) -> Result<PrincipalElement> {
    let m = g.kirillov_matrix(f).matrix;
    let rank = linalg::rank(&m);
    if rank < g.dim() {
        return Err(Error::NotFrobenius(g.dim() - rank));
    }
    let rhs = g.functional_values(f);
    let x = linalg::solve(&linalg::transpose(&m), &rhs).ok_or(Error::NotFrobenius(0))?;
    Ok(PrincipalElement::General(x))
}

/// `B_F(F̂, x_j) − F(x_j)` for every basis vector.
pub fn principal_residual(g: &LiePosetAlgebra, f: &Functional, fhat: &PrincipalElement) -> Vec<Q> {
    let x = fhat.to_element(g);
    (0..g.dim())
        .map(|j| {
            let xj = g.basis_element(j);
            f.evaluate(&x.bracket(&xj)) - f.evaluate(&xj)
        })
        .collect()
}

/// Matrix of `ad(x)` in the algebra's basis; column `j` holds `[x, x_j]`.
pub fn ad_matrix(g: &LiePosetAlgebra, x: &Element) -> Vec<Vec<Q>> {
    let coords = g.coordinates(x).expect("element lies in g_A(P)");
    let d = g.dim();
    let mut m = vec![vec![Q::zero(); d]; d];
    for (i, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for j in 0..d {
            for (k, s) in g.bracket_basis(i, j) {
                m[k][j] += c * Q::from_integer(s.into());
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumReport {
    pub dim: usize,
    pub char_poly: Poly,
    /// Rational eigenvalues with multiplicities, ascending.
    pub eigenvalues: Vec<(Q, usize)>,
    /// False when some roots of the characteristic polynomial are not
    /// rational (or were not found among the candidates).
    pub eigenvalues_complete: bool,
    pub zero_mult: usize,
    pub one_mult: usize,
    pub binary: bool,
}

impl SpectrumReport {
    fn from_parts(dim: usize, char_poly: Poly, eigenvalues: Vec<(Q, usize)>, complete: bool) -> Self {
        let mult = |v: &Q| eigenvalues.iter().find(|(e, _)| e == v).map_or(0, |e| e.1);
        let zero_mult = mult(&Q::zero());
        let one_mult = mult(&Q::one());
        let binary = is_binary(&char_poly, dim);
        SpectrumReport { dim, char_poly, eigenvalues, eigenvalues_complete: complete, zero_mult, one_mult, binary }
    }

    pub fn eigenvalue_sum(&self) -> Q {
        self.eigenvalues.iter().map(|(v, m)| v * q(*m as i64)).sum()
    }
}

impl Serialize for SpectrumReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Eig {
            value: String,
            mult: usize,
        }
        let poly: Vec<String> = self.char_poly.coeffs_high_to_low().iter().map(ToString::to_string).collect();
        let eig: Vec<Eig> =
            self.eigenvalues.iter().map(|(v, m)| Eig { value: v.to_string(), mult: *m }).collect();
        let mut st = s.serialize_struct("SpectrumReport", 7)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("char_poly", &poly)?;
        st.serialize_field("eigenvalues", &eig)?;
        st.serialize_field("eigenvalues_complete", &self.eigenvalues_complete)?;
        st.serialize_field("zero_mult", &self.zero_mult)?;
        st.serialize_field("one_mult", &self.one_mult)?;
        st.serialize_field("binary", &self.binary)?;
        st.end()
    }
}

/// `p = λ^m (λ − 1)^m` with `2m = dim`, by coefficient comparison.
pub fn is_binary(p: &Poly, dim: usize) -> bool {
    if dim % 2 != 0 {
        return false;
    }
    let m = dim / 2;
    let roots: Vec<Q> = std::iter::repeat_n(Q::zero(), m).chain(std::iter::repeat_n(Q::one(), m)).collect();
    *p == Poly::from_roots(roots.iter())
}

fn group(values: Vec<Q>) -> Vec<(Q, usize)> {
    let mut counts: BTreeMap<Q, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.into_iter().collect()
}

/// Spectrum from the exact characteristic polynomial of `ad(F̂)`.
pub fn spectrum_by_char_poly(g: &LiePosetAlgebra, fhat: &PrincipalElement) -> SpectrumReport {
    let m = ad_matrix(g, &fhat.to_element(g));
    let p = linalg::char_poly(&m);
    let mut candidates: Vec<Q> = m.iter().enumerate().map(|(i, r)| r[i].clone()).collect();
    candidates.extend([Q::zero(), Q::one()]);
    candidates.sort();
    candidates.dedup();
    let mut rest = p.clone();
    let mut roots = Vec::new();
    for c in candidates {
        while let Some(next) = rest.div_linear(&c).filter(|_| rest.degree().unwrap_or(0) > 0) {
            roots.push(c.clone());
            rest = next;
        }
    }
    let complete = rest.degree() == Some(0);
    SpectrumReport::from_parts(g.dim(), p, group(roots), complete)
}

/// Spectrum of a diagonal principal element: `c_p − c_q` on each root
/// `E_{p,q}` and zero on the Cartan part.
pub fn spectrum_diagonal(g: &LiePosetAlgebra, c: &[Q]) -> SpectrumReport {
    let mut values: Vec<Q> = g.poset().relations().iter().map(|&(p, q)| &c[p] - &c[q]).collect();
    values.extend(std::iter::repeat_n(Q::zero(), g.poset().len() - 1));
    let p = Poly::from_roots(values.iter());
    SpectrumReport::from_parts(g.dim(), p, group(values), true)
}

/// Spectrum of `ad(F̂)`, reading eigenvalues directly when `F̂` is diagonal.
pub fn spectrum(g: &LiePosetAlgebra, fhat: &PrincipalElement) -> SpectrumReport {
    match fhat.diagonal_values(g) {
        Some(c) => spectrum_diagonal(g, &c),
        None => spectrum_by_char_poly(g, fhat),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisDescriptor {
    /// `E_{p,q}`
    Root(usize, usize),
    /// `E_{p,p} − E_{q,q}`
    Difference(usize, usize),
}

impl BasisDescriptor {
    pub fn element(&self) -> Element {
        match *self {
            BasisDescriptor::Root(p, q) => Element::unit(p, q),
            BasisDescriptor::Difference(p, q) => Element::diagonal_difference(p, q),
        }
    }
}

/// Every root together with `E_{p,p} − E_{q,q}` for each summand
/// `E*_{p,q}` of `F`; on this basis `ad(F̂)` acts diagonally with
/// eigenvalues 0 and 1.
pub fn canonical_binary_basis(poset: &Poset, f: &Functional) -> Result<Vec<BasisDescriptor>> {
    principal_closed_form(poset, f)?;
    let mut out: Vec<BasisDescriptor> =
        poset.relations().iter().map(|&(p, q)| BasisDescriptor::Root(p, q)).collect();
    out.extend(f.support().into_iter().map(|(p, q)| BasisDescriptor::Difference(p, q)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q_frac;

    fn p2() -> (Poset, Functional) {
        let p = Poset::from_indices(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let f = Functional::all_ones(&p, &[(0, 2), (0, 3), (1, 3)]).unwrap();
        (p, f)
    }

    #[test]
    fn graph_and_smallness() {
        let (p, f) = p2();
        let g = functional_graph(&p, &f);
        assert_eq!(g.edges, vec![(0, 2), (0, 3), (1, 3)]);
        assert!(g.is_spanning_tree());
        assert!(is_small(&p, &f).unwrap());
        let partial = Functional::all_ones(&p, &[(0, 2)]).unwrap();
        assert!(!is_small(&p, &partial).unwrap());
        assert!(functional_graph(&p, &Functional::zero()).edges.is_empty());
        let two = Functional::new(&p, BTreeMap::from([((0, 2), q(2))])).unwrap();
        assert!(matches!(is_small(&p, &two), Err(Error::Form)));
    }

    #[test]
    fn partition_of_p2() {
        let (p, f) = p2();
        let part = partition(&p, &f).unwrap();
        assert_eq!(part.u, vec![2, 3]);
        assert_eq!(part.d, vec![0, 1]);
        assert!(part.conditions_hold());
        let partial = Functional::all_ones(&p, &[(0, 2)]).unwrap();
        assert!(matches!(partition(&p, &partial), Err(Error::NotSmall)));
    }

    #[test]
    fn principal_elements_of_p2_agree() {
        let (p, f) = p2();
        let half = q_frac(1, 2);
        let expected = PrincipalElement::Diagonal(vec![half.clone(), half.clone(), -half.clone(), -half]);
        assert_eq!(principal_small(&p, &f).unwrap(), expected);
        assert_eq!(principal_closed_form(&p, &f).unwrap(), expected);
        let g = LiePosetAlgebra::build(&p).unwrap();
        let general = principal_general(&g, &f).unwrap();
        assert_eq!(general.to_element(&g), expected.to_element(&g));
        assert!(principal_residual(&g, &f, &general).iter().all(Zero::is_zero));
    }

    #[test]
    fn spectrum_of_p2() {
        let (p, f) = p2();
        let g = LiePosetAlgebra::build(&p).unwrap();
        let fhat = principal_small(&p, &f).unwrap();
        let fast = spectrum(&g, &fhat);
        let slow = spectrum_by_char_poly(&g, &fhat);
        assert_eq!(fast, slow);
        assert!(fast.binary);
        assert_eq!((fast.zero_mult, fast.one_mult), (4, 4));
        let json = serde_json::to_value(&fast).unwrap();
        assert_eq!(json["char_poly"][0], "1");
        assert_eq!(json["char_poly"][1], "-4");
    }

    #[test]
    fn non_binary_polynomials() {
        let p = Poly::from_roots([q(0), q(1), q(1), q(2)].iter());
        assert!(!is_binary(&p, 4));
        assert!(is_binary(&Poly::from_roots([q(0), q(1)].iter()), 2));
        assert!(!is_binary(&Poly::from_roots([q(0)].iter()), 1));
    }

    #[test]
    fn binary_basis_requires_conditions() {
        let (p, f) = p2();
        let b = canonical_binary_basis(&p, &f).unwrap();
        assert_eq!(b.len(), 8);
        let partial = Functional::all_ones(&p, &[(0, 2)]).unwrap();
        assert!(matches!(canonical_binary_basis(&p, &partial), Err(Error::Condition(_))));
    }
}
