//! Finite posets stored with their transitively closed strict relation.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest poset accepted by [`Poset::canonical_form`].
pub const CANONICAL_LIMIT: usize = 8;

/// Transitive closure of a strict relation given by any generating set.
pub fn close_transitively<T>(pairs: &BTreeSet<(T, T)>) -> Result<BTreeSet<(T, T)>>
where
    T: Ord + Clone + fmt::Debug,
{
    let ids: Vec<T> = pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos = |t: &T| ids.binary_search(t).unwrap();
    let n = ids.len();
    let mut m = vec![vec![false; n]; n];
    for (a, b) in pairs {
        m[pos(a)][pos(b)] = true;
    }
    warshall(&mut m);
    if let Some(i) = (0..n).find(|&i| m[i][i]) {
        return Err(Error::Cycle(format!("{:?}", ids[i])));
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                out.insert((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    Ok(out)
}

fn warshall(m: &mut [Vec<bool>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalData {
    pub minimals: Vec<usize>,
    pub maximals: Vec<usize>,
    pub ext: Vec<usize>,
    pub rel_ext: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Poset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    less: Vec<Vec<bool>>,
    relations: Vec<(usize, usize)>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.less == other.less
    }
}

impl Eq for Poset {}

#[derive(Serialize, Deserialize)]
struct PosetFile {
    elements: Vec<String>,
    relations: Vec<(String, String)>,
}

impl Poset {
    /// Builds a poset on named elements from index pairs `(i, j)` meaning
    /// `names[i] ≺ names[j]`; the pairs may be any generating set.
    pub fn with_names(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateElement(name.clone()));
            }
        }
        let mut less = vec![vec![false; n]; n];
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::UnknownElement(format!("#{}", i.max(j))));
            }
            less[i][j] = true;
        }
        warshall(&mut less);
        if let Some(i) = (0..n).find(|&i| less[i][i]) {
            return Err(Error::Cycle(names[i].clone()));
        }
        let relations = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| less[i][j])
            .collect();
        Ok(Poset { names, index, less, relations })
    }

    /// Elements named `p1..pn`.
    pub fn from_indices(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::with_names((1..=n).map(|i| format!("p{i}")).collect(), pairs)
    }

    pub fn from_named_pairs<S: AsRef<str>>(elements: &[S], pairs: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let get = |s: &S| {
            lookup
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| Error::UnknownElement(s.as_ref().to_string()))
        };
        let idx = pairs
            .iter()
            .map(|(a, b)| Ok((get(a)?, get(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_names(names, &idx)
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_indices(n, &[]).unwrap()
    }

    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_indices(n, &pairs).unwrap()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.less[i][j]
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.less[i][j] || self.less[j][i]
    }

    /// All strict relations `(i, j)`, `i ≺ j`, sorted.
    pub fn relations(&self) -> &[(usize, usize)] {
        &self.relations
    }

    pub fn is_minimal(&self, i: usize) -> bool {
        (0..self.len()).all(|j| !self.less[j][i])
    }

    pub fn is_maximal(&self, i: usize) -> bool {
        (0..self.len()).all(|j| !self.less[i][j])
    }

    pub fn covering_relations(&self) -> Vec<(usize, usize)> {
        self.relations
            .iter()
            .copied()
            .filter(|&(i, j)| !(0..self.len()).any(|k| self.less[i][k] && self.less[k][j]))
            .collect()
    }

    pub fn extremal_data(&self) -> ExtremalData {
        let minimals: Vec<usize> = (0..self.len()).filter(|&i| self.is_minimal(i)).collect();
        let maximals: Vec<usize> = (0..self.len()).filter(|&i| self.is_maximal(i)).collect();
        let ext: Vec<usize> =
            (0..self.len()).filter(|&i| self.is_minimal(i) || self.is_maximal(i)).collect();
        let rel_ext = self
            .relations
            .iter()
            .copied()
            .filter(|(i, j)| ext.contains(i) && ext.contains(j))
            .collect();
        ExtremalData { minimals, maximals, ext, rel_ext }
    }

    /// Elements in a fixed linear extension (smallest available index first).
    pub fn linear_extension(&self) -> Vec<usize> {
        let n = self.len();
        let mut indeg: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| self.less[i][j]).count()).collect();
        let mut out = Vec::with_capacity(n);
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(v) = ready.pop_first() {
            out.push(v);
            for w in 0..n {
                if self.less[v][w] {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        ready.insert(w);
                    }
                }
            }
        }
        out
    }

    /// One less than the largest chain cardinality.
    pub fn height(&self) -> usize {
        let mut longest = vec![0usize; self.len()];
        for v in self.linear_extension() {
            for u in 0..self.len() {
                if self.less[u][v] {
                    longest[v] = longest[v].max(longest[u] + 1);
                }
            }
        }
        longest.into_iter().max().unwrap_or(0)
    }

    pub fn is_ideal(&self, set: &[usize]) -> bool {
        set.iter().all(|&q| (0..self.len()).all(|p| !self.less[p][q] || set.contains(&p)))
    }

    pub fn is_filter(&self, set: &[usize]) -> bool {
        set.iter().all(|&p| (0..self.len()).all(|q| !self.less[p][q] || set.contains(&q)))
    }

    /// Connectivity of the comparability graph.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if !seen[w] && self.comparable(v, w) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same elements with every relation reversed.
    pub fn dual(&self) -> Poset {
        let pairs: Vec<_> = self.relations.iter().map(|&(i, j)| (j, i)).collect();
        Poset::with_names(self.names.clone(), &pairs).unwrap()
    }

    /// Disjoint union; elements of `other` are appended after `self`'s and
    /// primed when their names clash.
    pub fn disjoint_union(&self, other: &Poset) -> Result<Poset> {
        let offset = self.len();
        let mut names = self.names.clone();
        for name in &other.names {
            let mut fresh = name.clone();
            while names.contains(&fresh) || (fresh != *name && other.index.contains_key(&fresh)) {
                fresh.push('\'');
            }
            names.push(fresh);
        }
        let pairs: Vec<_> = self
            .relations
            .iter()
            .copied()
            .chain(other.relations.iter().map(|&(i, j)| (i + offset, j + offset)))
            .collect();
        Poset::with_names(names, &pairs)
    }

    /// Isomorphism invariant: the smallest relation code over all linear
    /// extensions (see [`CanonicalForm`]).
    pub fn canonical_form(&self) -> Result<CanonicalForm> {
        let n = self.len();
        if n > CANONICAL_LIMIT {
            return Err(Error::Size { size: n, min: 0, max: CANONICAL_LIMIT });
        }
        let mut search = CanonSearch {
            poset: self,
            order: Vec::with_capacity(n),
            placed: vec![false; n],
            code: Vec::with_capacity(n * n.saturating_sub(1) / 2),
            best: None,
        };
        search.run();
        Ok(CanonicalForm { n, code: search.best.unwrap_or_default() })
    }

    /// Relabels elements so that `perm[i]` becomes position `i`.
    pub fn permuted(&self, perm: &[usize]) -> Poset {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let names = perm.iter().map(|&old| self.names[old].clone()).collect();
        let pairs: Vec<_> = self.relations.iter().map(|&(i, j)| (inverse[i], inverse[j])).collect();
        Poset::with_names(names, &pairs).unwrap()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = PosetFile {
            elements: self.names.clone(),
            relations: self
                .relations
                .iter()
                .map(|&(i, j)| (self.names[i].clone(), self.names[j].clone()))
                .collect(),
        };
        serde_json::to_value(file).unwrap()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PosetFile = serde_json::from_str(text)?;
        Self::from_named_pairs(&file.elements, &file.relations)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

struct CanonSearch<'a> {
    poset: &'a Poset,
    order: Vec<usize>,
    placed: Vec<bool>,
    code: Vec<bool>,
    best: Option<Vec<bool>>,
}

impl CanonSearch<'_> {
    fn run(&mut self) {
        let n = self.poset.len();
        if self.order.len() == n {
            if self.best.as_ref().is_none_or(|b| self.code < *b) {
                self.best = Some(self.code.clone());
            }
            return;
        }
        for v in 0..n {
            if self.placed[v] || (0..n).any(|u| !self.placed[u] && self.poset.less[u][v]) {
                continue;
            }
            let start = self.code.len();
            for &u in &self.order {
                self.code.push(self.poset.less[u][v]);
            }
            let worse = self
                .best
                .as_ref()
                .is_some_and(|b| self.code[..] > b[..self.code.len()]);
            if !worse {
                self.placed[v] = true;
                self.order.push(v);
                self.run();
                self.order.pop();
                self.placed[v] = false;
            }
            self.code.truncate(start);
        }
    }
}

/// Relation code of a poset under its lexicographically smallest linear
/// extension. Bit `(i, j)` for `i < j` records whether the `i`-th element
/// precedes the `j`-th; bits are ordered column by column.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub n: usize,
    pub code: Vec<bool>,
}

impl CanonicalForm {
    /// The poset encoded by this form, elements named `p1..pn`.
    pub fn to_poset(&self) -> Result<Poset> {
        let mut pairs = Vec::new();
        let mut bits = self.code.iter();
        for j in 1..self.n {
            for i in 0..j {
                match bits.next() {
                    Some(true) => pairs.push((i, j)),
                    Some(false) => {}
                    None => return Err(Error::Param(format!("canonical code too short: {self}"))),
                }
            }
        }
        Poset::from_indices(self.n, &pairs)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.n)?;
        for &b in &self.code {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for CanonicalForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Param(format!("malformed canonical form `{s}`"));
        let (n, bits) = s.split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        let code = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        if code.len() != n * n.saturating_sub(1) / 2 {
            return Err(bad());
        }
        Ok(CanonicalForm { n, code })
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
