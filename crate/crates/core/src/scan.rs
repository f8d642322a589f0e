//! Exhaustive enumeration of small posets and the binary-spectrum scan.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Functional, LiePosetAlgebra, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::poset::{CanonicalForm, Poset};
use crate::spectral::{principal_general, spectrum};

/// Largest element count a scan accepts.
pub const N_CAP: usize = 7;

/// Random dense functionals tried before falling back to spanning trees.
pub const DENSE_ATTEMPTS: usize = 20;
pub const TREE_ATTEMPTS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub height_max: Option<usize>,
    pub connected_only: bool,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { n_min: 2, n_max: 6, height_max: None, connected_only: true, seed: 0, trials: DEFAULT_TRIALS }
    }
}

impl ScanConfig {
    /// Sizes `2..=n_max`.
    pub fn up_to(n_max: usize) -> Self {
        ScanConfig { n_max, ..Default::default() }
    }

    /// Exactly `n` elements, connected or not.
    pub fn exact(n: usize) -> Self {
        ScanConfig { n_min: n, n_max: n, connected_only: false, ..Default::default() }
    }

    pub fn with_height(mut self, h: usize) -> Self {
        self.height_max = Some(h);
        self
    }

    pub fn connected(mut self, connected_only: bool) -> Self {
        self.connected_only = connected_only;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max > N_CAP {
            return Err(Error::Size { size: self.n_max, min: 1, max: N_CAP });
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Param(format!("empty size range {}..={}", self.n_min, self.n_max)));
        }
        if self.trials == 0 {
            return Err(Error::Param("trials must be at least 1".into()));
        }
        Ok(())
    }

    fn accepts(&self, p: &Poset) -> bool {
        (self.n_min..=self.n_max).contains(&p.len())
            && (!self.connected_only || p.is_connected())
            && self.height_max.is_none_or(|h| p.height() <= h)
    }
}

/// One poset per isomorphism class passing the filters, ordered by size and
/// then canonical form. Every poset arises from a smaller one by adding a
/// maximal element above a down-set, so classes are grown level by level.
pub fn enumerate_posets(config: &ScanConfig) -> Result<Vec<Poset>> {
    config.validate()?;
    let mut level: BTreeSet<CanonicalForm> = BTreeSet::from([Poset::antichain(1).canonical_form()?]);
    let mut out = Vec::new();
    for n in 1..=config.n_max {
        if n > 1 {
            let parents: Vec<Poset> = level.iter().map(|c| c.to_poset()).collect::<Result<_>>()?;
            let children: Vec<Vec<CanonicalForm>> = parents.par_iter().map(extensions).collect::<Result<_>>()?;
            level = children.into_iter().flatten().collect();
        }
        if n >= config.n_min {
            for c in &level {
                let p = c.to_poset()?;
                if config.accepts(&p) {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

fn extensions(p: &Poset) -> Result<Vec<CanonicalForm>> {
    let k = p.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << k) {
        let below: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        if !p.is_ideal(&below) {
            continue;
        }
        let mut pairs: Vec<(usize, usize)> = p.relations().to_vec();
        pairs.extend(below.iter().map(|&i| (i, k)));
        out.push(Poset::from_indices(k + 1, &pairs)?.canonical_form()?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub canonical_form: CanonicalForm,
    pub n: usize,
    pub height: usize,
    pub dim: usize,
    pub index: usize,
    /// A Frobenius functional was found.
    pub frobenius: bool,
    /// Binary verdict for the spectrum; present exactly when `frobenius`.
    pub binary: Option<bool>,
    /// Characteristic polynomial of ad(F̂), leading coefficient first.
    pub char_poly: Option<Vec<String>>,
    pub functional_used: Option<serde_json::Value>,
    pub note: Option<String>,
}

impl ScanRecord {
    pub fn is_counterexample(&self) -> bool {
        self.binary == Some(false)
    }
}

/// FNV-1a, used to derive a per-poset seed that does not depend on scan order.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn poset_seed(seed: u64, cf: &CanonicalForm) -> u64 {
    seed ^ fnv1a(cf.to_string().as_bytes())
}

/// All-ones functional on a random spanning tree of the comparability graph.
fn random_tree_functional(p: &Poset, rng: &mut ChaCha8Rng) -> Option<Functional> {
    let mut edges = p.relations().to_vec();
    edges.shuffle(rng);
    let mut parent: Vec<usize> = (0..p.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut chosen = Vec::new();
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen.push((a, b));
        }
    }
    (chosen.len() + 1 == p.len()).then(|| Functional::all_ones(p, &chosen).unwrap())
}

/// Random dense functionals first, then all-ones spanning-tree functionals.
pub fn find_frobenius_functional(g: &LiePosetAlgebra, seed: u64) -> Result<Functional> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..DENSE_ATTEMPTS {
        let f = g.random_functional(&mut rng);
        if g.is_frobenius_functional(&f) {
            return Ok(f);
        }
    }
    for _ in 0..TREE_ATTEMPTS {
        if let Some(f) = random_tree_functional(g.poset(), &mut rng) {
            if g.is_frobenius_functional(&f) {
                return Ok(f);
            }
        }
    }
    Err(Error::FunctionalSearchExhausted(DENSE_ATTEMPTS + TREE_ATTEMPTS))
}

/// Index, and for index zero the binary verdict, of one poset.
pub fn scan_poset(p: &Poset, seed: u64, trials: usize) -> Result<ScanRecord> {
    let cf = p.canonical_form()?;
    let g = LiePosetAlgebra::build(p)?;
    let s = poset_seed(seed, &cf);
    let index = g.index(trials, s);
    let mut record = ScanRecord {
        canonical_form: cf,
        n: p.len(),
        height: p.height(),
        dim: g.dim(),
        index,
        frobenius: false,
        binary: None,
        char_poly: None,
        functional_used: None,
        note: None,
    };
    if index == 0 {
        match find_frobenius_functional(&g, s.wrapping_add(1)) {
            Ok(f) => {
                let fhat = principal_general(&g, &f)?;
                let report = spectrum(&g, &fhat);
                record.frobenius = true;
                record.binary = Some(report.binary);
                record.char_poly =
                    Some(report.char_poly.coeffs_high_to_low().iter().map(ToString::to_string).collect());
                record.functional_used = Some(f.to_json(p));
            }
            Err(e) => record.note = Some(e.to_string()),
        }
    }
    Ok(record)
}

/// Scans every enumerated poset not in `skip`, handing records to `sink` in
/// enumeration order. Work is done in parallel chunks.
pub fn scan_streaming<F>(config: &ScanConfig, skip: &HashSet<CanonicalForm>, mut sink: F) -> Result<usize>
where
    F: FnMut(&ScanRecord) -> Result<()>,
{
    let todo: Vec<Poset> = enumerate_posets(config)?
        .into_iter()
        .filter(|p| !skip.contains(&p.canonical_form().unwrap()))
        .collect();
    let mut done = 0;
    for chunk in todo.chunks(64) {
        let records: Vec<ScanRecord> =
            chunk.par_iter().map(|p| scan_poset(p, config.seed, config.trials)).collect::<Result<_>>()?;
        for r in &records {
            sink(r)?;
        }
        done += records.len();
    }
    Ok(done)
}

pub fn scan_binary_spectrum(config: &ScanConfig) -> Result<Vec<ScanRecord>> {
    let mut out = Vec::new();
    scan_streaming(config, &HashSet::new(), |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Frobenius records whose spectrum is not binary.
pub fn counterexamples(records: &[ScanRecord]) -> Vec<&ScanRecord> {
    records.iter().filter(|r| r.is_counterexample()).collect()
}

/// Recomputes a record under another seed and compares index and verdict.
pub fn reverify(record: &ScanRecord, seed: u64, trials: usize) -> Result<bool> {
    let p = record.canonical_form.to_poset()?;
    let again = scan_poset(&p, seed, trials)?;
    Ok(again.index == record.index && again.binary == record.binary)
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ScanConfig,
}

pub fn write_header(out: &mut impl Write, config: &ScanConfig) -> Result<()> {
    serde_json::to_writer(&mut *out, &Header { config: config.clone() })?;
    writeln!(out)?;
    Ok(())
}

pub fn write_record(out: &mut impl Write, record: &ScanRecord) -> Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    writeln!(out)?;
    Ok(())
}

/// Reads a JSON-lines scan file: header config and the records so far. A
/// truncated last line (interrupted write) is dropped.
pub fn read_jsonl(path: impl AsRef<Path>) -> Result<(ScanConfig, Vec<ScanRecord>)> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = lines.next().ok_or_else(|| Error::Param("empty scan file".into()))??;
    let header: Header = serde_json::from_str(&header)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => records.push(r),
            Err(_) => break,
        }
    }
    Ok((header.config, records))
}
