//! The Lie poset algebra g(P) and its trace-zero part g_A(P).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Q};
use crate::poset::Poset;

/// Upper end of the coefficient range used for generic functionals.
pub const COEFF_MAX: i64 = 1_000_000;

pub const DEFAULT_TRIALS: usize = 3;

/// Element of g(P) as coefficients on `E_{p,q}` with `p ⪯ q`, diagonal
/// included. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Element(BTreeMap<(usize, usize), Q>);

impl Element {
    pub fn zero() -> Self {
        Element(BTreeMap::new())
    }

    pub fn unit(p: usize, q: usize) -> Self {
        Element(BTreeMap::from([((p, q), Q::one())]))
    }

    /// `E_{p,p} − E_{q,q}`
    pub fn diagonal_difference(p: usize, q: usize) -> Self {
        let mut e = Element::unit(p, p);
        e.add_term((q, q), -Q::one());
        e
    }

    pub fn diagonal(values: &[Q]) -> Self {
        let mut e = Element::zero();
        for (p, v) in values.iter().enumerate() {
            e.add_term((p, p), v.clone());
        }
        e
    }

    pub fn add_term(&mut self, key: (usize, usize), v: Q) {
        if v.is_zero() {
            return;
        }
        let slot = self.0.entry(key).or_insert_with(Q::zero);
        *slot += v;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.add_term(*k, v.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Element {
        if s.is_zero() {
            return Element::zero();
        }
        Element(self.0.iter().map(|(k, v)| (*k, v * s)).collect())
    }

    pub fn get(&self, p: usize, q: usize) -> Q {
        self.0.get(&(p, q)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Q)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Commutator `xy − yx` using `E_{p,q} E_{r,s} = δ_{qr} E_{p,s}`.
    pub fn bracket(&self, other: &Element) -> Element {
        let mut out = Element::zero();
        for (&(p, q), u) in &self.0 {
            for (&(r, s), v) in &other.0 {
                if q == r {
                    out.add_term((p, s), u * v);
                }
                if s == p {
                    out.add_term((r, q), -(u * v));
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Q {
        self.0.iter().filter(|((p, q), _)| p == q).map(|(_, v)| v.clone()).sum()
    }
}

/// Exact-rational functional supported on strict relations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Functional {
    coeffs: BTreeMap<(usize, usize), Q>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FunctionalFile {
    Support { support: Vec<(String, String, String)> },
    Set { set: Vec<(String, String)> },
}

impl Functional {
    pub fn zero() -> Self {
        Functional::default()
    }

    pub fn new(poset: &Poset, coeffs: BTreeMap<(usize, usize), Q>) -> Result<Self> {
        for &(p, q) in coeffs.keys() {
            if p >= poset.len() || q >= poset.len() || !poset.less(p, q) {
                let name = |i: usize| poset.names().get(i).cloned().unwrap_or_else(|| format!("#{i}"));
                return Err(Error::NotARelation(name(p), name(q)));
            }
        }
        Ok(Functional { coeffs: coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect() })
    }

    /// The all-ones functional `F_S` on the given pairs.
    pub fn all_ones(poset: &Poset, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(poset, pairs.iter().map(|&k| (k, Q::one())).collect())
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), Q> {
        &self.coeffs
    }

    pub fn coeff(&self, p: usize, q: usize) -> Q {
        self.coeffs.get(&(p, q)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn support(&self) -> Vec<(usize, usize)> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_all_ones(&self) -> bool {
        self.coeffs.values().all(One::is_one)
    }

    pub fn evaluate(&self, x: &Element) -> Q {
        x.terms()
            .filter_map(|(k, v)| self.coeffs.get(k).map(|c| c * v))
            .sum()
    }

    pub fn to_json(&self, poset: &Poset) -> serde_json::Value {
        let name = |i: usize| poset.name(i).to_string();
        let file = if self.is_all_ones() {
            FunctionalFile::Set { set: self.coeffs.keys().map(|&(p, q)| (name(p), name(q))).collect() }
        } else {
            FunctionalFile::Support {
                support: self.coeffs.iter().map(|(&(p, q), v)| (name(p), name(q), v.to_string())).collect(),
            }
        };
        serde_json::to_value(file).unwrap()
    }

    pub fn from_json_str(text: &str, poset: &Poset) -> Result<Self> {
        let file: FunctionalFile = serde_json::from_str(text)?;
        let mut coeffs = BTreeMap::new();
        let entries: Vec<(String, String, Q)> = match file {
            FunctionalFile::Set { set } => set.into_iter().map(|(p, q)| (p, q, Q::one())).collect(),
            FunctionalFile::Support { support } => support
                .into_iter()
                .map(|(p, q, v)| {
                    let v: Q = v.trim().parse().map_err(|_| Error::InvalidRational(v.clone()))?;
                    Ok((p, q, v))
                })
                .collect::<Result<_>>()?,
        };
        for (p, q, v) in entries {
            let key = (poset.index_of(&p)?, poset.index_of(&q)?);
            if !poset.less(key.0, key.1) {
                return Err(Error::NotARelation(p, q));
            }
            *coeffs.entry(key).or_insert_with(Q::zero) += v;
        }
        Self::new(poset, coeffs)
    }

    pub fn load(path: impl AsRef<Path>, poset: &Poset) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, poset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisVector {
    /// `E_{p,q}` for `p ≺ q`.
    Root(usize, usize),
    /// `E_{v_i,v_i} − E_{v_{i+1},v_{i+1}}` along the fixed linear extension,
    /// `i` counted from 1.
    CartanStep(usize),
}

/// Matrix of the Kirillov form `B_F(x_i, x_j) = F([x_i, x_j])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KirillovMatrix {
    pub matrix: Vec<Vec<Q>>,
}

impl KirillovMatrix {
    pub fn rank(&self) -> usize {
        linalg::rank(&self.matrix)
    }

    pub fn is_skew(&self) -> bool {
        let n = self.matrix.len();
        (0..n).all(|i| (0..n).all(|j| self.matrix[i][j] == -self.matrix[j][i].clone()))
    }
}

/// Bracket of two basis vectors as integer combination of basis vectors.
pub type StructureRow = Vec<(usize, i64)>;

#[derive(Clone, Debug)]
pub struct LiePosetAlgebra {
    poset: Poset,
    linear_extension: Vec<usize>,
    basis: Vec<BasisVector>,
    root_index: HashMap<(usize, usize), usize>,
    brackets: BTreeMap<(usize, usize), StructureRow>,
}

impl LiePosetAlgebra {
    /// Roots come first, ordered by decreasing distance between their ends
    /// in the linear extension, followed by the Cartan steps. In this order
    /// `ad(x)` is upper triangular for every `x`.
    pub fn build(poset: &Poset) -> Result<Self> {
        let n = poset.len();
        if n < 2 {
            return Err(Error::Size { size: n, min: 2, max: usize::MAX });
        }
        let linear_extension = poset.linear_extension();
        let mut position = vec![0; n];
        for (i, &v) in linear_extension.iter().enumerate() {
            position[v] = i;
        }
        let mut roots: Vec<(usize, usize)> = poset.relations().to_vec();
        roots.sort_by_key(|&(p, q)| (std::cmp::Reverse(position[q] - position[p]), position[p]));
        let mut basis: Vec<BasisVector> = roots.iter().map(|&(p, q)| BasisVector::Root(p, q)).collect();
        basis.extend((1..n).map(BasisVector::CartanStep));
        let root_index = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut g = LiePosetAlgebra {
            poset: poset.clone(),
            linear_extension,
            basis,
            root_index,
            brackets: BTreeMap::new(),
        };
        let elements: Vec<Element> = (0..g.dim()).map(|i| g.basis_element(i)).collect();
        for i in 0..g.dim() {
            for j in i + 1..g.dim() {
                let b = elements[i].bracket(&elements[j]);
                if b.is_zero() {
                    continue;
                }
                let row: StructureRow = b
                    .terms()
                    .map(|(k, v)| {
                        let idx = g.root_index[k];
                        let c = v.to_integer().try_into().expect("structure constant fits in i64");
                        (idx, c)
                    })
                    .collect();
                g.brackets.insert((i, j), row);
            }
        }
        Ok(g)
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn linear_extension(&self) -> &[usize] {
        &self.linear_extension
    }

    pub fn root_index(&self, p: usize, q: usize) -> Option<usize> {
        self.root_index.get(&(p, q)).copied()
    }

    pub fn basis_element(&self, i: usize) -> Element {
        match self.basis[i] {
            BasisVector::Root(p, q) => Element::unit(p, q),
            BasisVector::CartanStep(k) => {
                Element::diagonal_difference(self.linear_extension[k - 1], self.linear_extension[k])
            }
        }
    }

    /// Nonzero structure constants `[x_i, x_j]` for `i < j`.
    pub fn structure_constants(&self) -> &BTreeMap<(usize, usize), StructureRow> {
        &self.brackets
    }

    /// `[x_i, x_j]` in basis coordinates.
    pub fn bracket_basis(&self, i: usize, j: usize) -> StructureRow {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Vec::new(),
            std::cmp::Ordering::Less => self.brackets.get(&(i, j)).cloned().unwrap_or_default(),
            std::cmp::Ordering::Greater => self
                .brackets
                .get(&(j, i))
                .map(|r| r.iter().map(|&(k, c)| (k, -c)).collect())
                .unwrap_or_default(),
        }
    }

    pub fn element_from_coordinates(&self, coords: &[Q]) -> Element {
        coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Element::zero(), |acc, (i, c)| acc.add(&self.basis_element(i).scale(c)))
    }

    /// Coordinates of a trace-zero element supported on `P`, or `None` if
    /// the element does not lie in g_A(P).
    pub fn coordinates(&self, x: &Element) -> Option<Vec<Q>> {
        let mut coords = vec![Q::zero(); self.dim()];
        for (&(p, q), v) in x.terms() {
            if p != q {
                coords[self.root_index(p, q)?] = v.clone();
            }
        }
        if !x.trace().is_zero() {
            return None;
        }
        let roots = self.poset.relations().len();
        let mut prefix = Q::zero();
        for (k, &v) in self.linear_extension.iter().enumerate().take(self.poset.len() - 1) {
            prefix += x.get(v, v);
            coords[roots + k] = prefix.clone();
        }
        Some(coords)
    }

    /// `F(x_i)` for every basis vector.
    pub fn functional_values(&self, f: &Functional) -> Vec<Q> {
        self.basis
            .iter()
            .map(|b| match *b {
                BasisVector::Root(p, q) => f.coeff(p, q),
                BasisVector::CartanStep(_) => Q::zero(),
            })
            .collect()
    }

    pub fn kirillov_matrix(&self, f: &Functional) -> KirillovMatrix {
        let values = self.functional_values(f);
        let d = self.dim();
        let mut m = vec![vec![Q::zero(); d]; d];
        for (&(i, j), row) in &self.brackets {
            let v: Q = row
                .iter()
                .filter(|(k, _)| !values[*k].is_zero())
                .map(|&(k, c)| &values[k] * Q::from_integer(c.into()))
                .sum();
            if !v.is_zero() {
                m[j][i] = -v.clone();
                m[i][j] = v;
            }
        }
        KirillovMatrix { matrix: m }
    }

    pub fn kernel_dim(&self, f: &Functional) -> usize {
        self.dim() - self.kirillov_matrix(f).rank()
    }

    pub fn is_frobenius_functional(&self, f: &Functional) -> bool {
        self.kernel_dim(f) == 0
    }

    /// Functional with independent uniform coefficients in `[1, COEFF_MAX]`
    /// on every strict relation.
    pub fn random_functional<R: Rng>(&self, rng: &mut R) -> Functional {
        let coeffs = self
            .poset
            .relations()
            .iter()
            .map(|&k| (k, Q::from_integer(rng.gen_range(1..=COEFF_MAX).into())))
            .collect();
        Functional { coeffs }
    }

    /// Index by generic rank: `dim − max rank` over `trials` random
    /// functionals. Deterministic in `seed`.
    pub fn index(&self, trials: usize, seed: u64) -> usize {
        let d = self.dim();
        let best_possible = d - d % 2;
        let mut best = 0;
        for t in 0..trials.max(1) {
            let mut rng = trial_rng(seed, t);
            let f = self.random_functional(&mut rng);
            best = best.max(self.kirillov_matrix(&f).rank());
            if best == best_possible {
                break;
            }
        }
        d - best
    }

    /// Basis of `{B ∈ g_A(P) : F([x, B]) = 0 for all x}`.
    pub fn kernel(&self, f: &Functional) -> Vec<Element> {
        let m = self.kirillov_matrix(f).matrix;
        linalg::nullspace(&m, self.dim())
            .iter()
            .map(|v| self.element_from_coordinates(v))
            .collect()
    }

    fn pairing_rows(&self, tests: &[Element], f: &Functional) -> Vec<Vec<Q>> {
        let unknowns: Vec<Element> = (0..self.dim()).map(|i| self.basis_element(i)).collect();
        tests
            .iter()
            .map(|x| unknowns.iter().map(|b| f.evaluate(&x.bracket(b))).collect())
            .collect()
    }

    fn root_elements(&self) -> Vec<Element> {
        self.poset.relations().iter().map(|&(p, q)| Element::unit(p, q)).collect()
    }

    /// Kernel of `B ↦ F([·, B])` on g_A(P), tested against every `E_{p,p}`
    /// and every root. Coordinates in this algebra's basis.
    pub fn kernel_diagonal_units(&self, f: &Functional) -> Vec<Vec<Q>> {
        let mut tests: Vec<Element> = (0..self.poset.len()).map(|p| Element::unit(p, p)).collect();
        tests.extend(self.root_elements());
        linalg::nullspace(&self.pairing_rows(&tests, f), self.dim())
    }

    /// Same kernel, tested against `E_{p_1,p_1} − E_{p_i,p_i}` and every root.
    pub fn kernel_cartan_differences(&self, f: &Functional) -> Vec<Vec<Q>> {
        let mut tests: Vec<Element> =
            (1..self.poset.len()).map(|i| Element::diagonal_difference(0, i)).collect();
        tests.extend(self.root_elements());
        linalg::nullspace(&self.pairing_rows(&tests, f), self.dim())
    }
}

/// Kernel of `B ↦ F([·, B])` on the full algebra g(P), diagonal included.
pub fn full_kernel(poset: &Poset, f: &Functional) -> Vec<Element> {
    let mut basis: Vec<Element> = poset.relations().iter().map(|&(p, q)| Element::unit(p, q)).collect();
    basis.extend((0..poset.len()).map(|p| Element::unit(p, p)));
    let rows: Vec<Vec<Q>> = basis
        .iter()
        .map(|x| basis.iter().map(|b| f.evaluate(&x.bracket(b))).collect())
        .collect();
    linalg::nullspace(&rows, basis.len())
        .iter()
        .map(|v| {
            v.iter()
                .zip(&basis)
                .fold(Element::zero(), |acc, (c, b)| acc.add(&b.scale(c)))
        })
        .collect()
}

pub fn evaluate(f: &Functional, x: &Element) -> Q {
    f.evaluate(x)
}

/// Per-trial generator derived from the user seed.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
