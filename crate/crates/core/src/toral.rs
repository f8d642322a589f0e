//! Toral pairs, gluing rules, construction sequences and toral functionals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{full_kernel, trial_rng, Functional, LiePosetAlgebra, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::linalg::q;
use crate::poset::Poset;
use crate::spectral::{self, principal_general};
use crate::topology::{betti_numbers, order_complex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    P1,
    P2,
    P2Star,
    P3,
    P3Star,
    P4,
    P4Star,
    P5,
    P5Star,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::P1,
        Family::P2,
        Family::P2Star,
        Family::P3,
        Family::P3Star,
        Family::P4,
        Family::P4Star,
        Family::P5,
        Family::P5Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::P1 => "P1",
            Family::P2 => "P2",
            Family::P2Star => "P2*",
            Family::P3 => "P3",
            Family::P3Star => "P3*",
            Family::P4 => "P4",
            Family::P4Star => "P4*",
            Family::P5 => "P5",
            Family::P5Star => "P5*",
        }
    }

    /// Smallest admissible size parameter, for the parametrized families.
    pub fn min_n(self) -> Option<usize> {
        match self {
            Family::P4 | Family::P4Star => Some(4),
            Family::P5 | Family::P5Star => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|fam| fam.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToralPairId {
    pub family: Family,
    pub n: Option<usize>,
}

impl ToralPairId {
    pub fn new(family: Family, n: Option<usize>) -> Result<Self> {
        match (family.min_n(), n) {
            (None, None) => {}
            (None, Some(_)) => return Err(Error::Param(format!("{family} takes no size parameter"))),
            (Some(_), None) => return Err(Error::Param(format!("{family} needs a size parameter"))),
            (Some(lo), Some(n)) if n < lo => {
                return Err(Error::Param(format!("{family} needs n >= {lo}, got {n}")));
            }
            _ => {}
        }
        Ok(ToralPairId { family, n })
    }

    pub fn fixed(family: Family) -> Self {
        ToralPairId::new(family, None).expect("family without parameter")
    }

    pub fn sized(family: Family, n: usize) -> Self {
        ToralPairId::new(family, Some(n)).expect("parameter in range")
    }
}

impl fmt::Display for ToralPairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.n {
            Some(n) => write!(f, "{},{}", self.family, n),
            None => write!(f, "{}", self.family),
        }
    }
}

/// Accepts `P2`, `P4,7`, `P5*,3`.
impl FromStr for ToralPairId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(',') {
            Some((fam, n)) => {
                let n = n.trim().parse().map_err(|_| Error::Param(format!("bad size in `{s}`")))?;
                ToralPairId::new(fam.trim().parse()?, Some(n))
            }
            None => ToralPairId::new(s.trim().parse()?, None),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    A,
    B,
    C,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::A => "a",
            Role::B => "b",
            Role::C => "c",
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Role::A),
            "b" => Ok(Role::B),
            "c" => Ok(Role::C),
            _ => Err(Error::Param(format!("unknown role `{s}`"))),
        }
    }
}

/// A catalog poset with its functional and designated extremes. `a` is the
/// unique minimal element when `one_minimal`, otherwise the unique maximal
/// one; `b` and `c` are extremes of the opposite kind.
#[derive(Clone, Debug)]
pub struct CatalogPair {
    pub id: ToralPairId,
    pub poset: Poset,
    pub functional: Functional,
    pub a: usize,
    pub b: usize,
    pub c: Option<usize>,
    pub one_minimal: bool,
}

impl CatalogPair {
    pub fn role(&self, r: Role) -> Option<usize> {
        match r {
            Role::A => Some(self.a),
            Role::B => Some(self.b),
            Role::C => self.c,
        }
    }
}

struct PairShape {
    size: usize,
    relations: Vec<(usize, usize)>,
    functional: Vec<(usize, usize)>,
    roles: (usize, usize, Option<usize>),
    one_minimal: bool,
}

/// Builds a catalog pair from 1-based index lists.
fn assemble(id: ToralPairId, shape: PairShape) -> Result<CatalogPair> {
    let zero = |v: &[(usize, usize)]| v.iter().map(|&(i, j)| (i - 1, j - 1)).collect::<Vec<_>>();
    let poset = Poset::from_indices(shape.size, &zero(&shape.relations))?;
    let functional = Functional::all_ones(&poset, &zero(&shape.functional))?;
    let (a, b, c) = shape.roles;
    Ok(CatalogPair { id, poset, functional, a: a - 1, b: b - 1, c: c.map(|c| c - 1), one_minimal: shape.one_minimal })
}

pub fn catalog(id: ToralPairId) -> Result<CatalogPair> {
    let id = ToralPairId::new(id.family, id.n)?;
    let shape = match (id.family, id.n) {
        (Family::P1, _) => PairShape {
            size: 2,
            relations: vec![(1, 2)],
            functional: vec![(1, 2)],
            roles: (1, 2, None),
            one_minimal: true,
        },
        (Family::P2, _) => PairShape {
            size: 4,
            relations: vec![(1, 2), (2, 3), (2, 4)],
            functional: vec![(1, 3), (1, 4), (2, 4)],
            roles: (1, 3, Some(4)),
            one_minimal: true,
        },
        (Family::P2Star, _) => PairShape {
            size: 4,
            relations: vec![(1, 3), (2, 3), (3, 4)],
            functional: vec![(1, 4), (2, 4), (2, 3)],
            roles: (4, 1, Some(2)),
            one_minimal: false,
        },
        (Family::P3, _) => PairShape {
            size: 6,
            relations: vec![(1, 2), (2, 3), (2, 4), (3, 5), (4, 6)],
            functional: vec![(1, 5), (1, 6), (2, 3), (2, 4), (2, 6)],
            roles: (1, 5, Some(6)),
            one_minimal: true,
        },
        (Family::P3Star, _) => PairShape {
            size: 6,
            relations: vec![(1, 3), (2, 4), (3, 5), (4, 5), (5, 6)],
            functional: vec![(1, 6), (2, 6), (3, 5), (4, 5), (2, 5)],
            roles: (6, 1, Some(2)),
            one_minimal: false,
        },
        (Family::P4, Some(n)) => {
            let mut relations: Vec<_> = (1..n - 1).map(|i| (i, i + 1)).collect();
            relations.push((n / 2, n));
            let mut functional: Vec<_> = (1..=(n - 1) / 2).map(|i| (i, n - i)).collect();
            functional.extend((1..=n / 2).map(|i| (i, n)));
            PairShape { size: n, relations, functional, roles: (1, n - 1, Some(n)), one_minimal: true }
        }
        (Family::P4Star, Some(n)) => {
            let k = (n - 1) / 2;
            let c = n.div_ceil(2);
            let chain: Vec<usize> = (1..=k).chain(k + 2..=n).collect();
            let mut relations: Vec<_> = chain.windows(2).map(|w| (w[0], w[1])).collect();
            relations.push((k + 1, k + 2));
            let mut functional: Vec<_> = (1..=k).map(|i| (i, n + 1 - i)).collect();
            functional.extend((c + 1..=n).map(|i| (c, i)));
            PairShape { size: n, relations, functional, roles: (n, 1, Some(k + 1)), one_minimal: false }
        }
        (Family::P5, Some(n)) => {
            let size = 2 * n + 1;
            let mut relations = Vec::new();
            for i in 1..2 * n {
                let from = if i % 2 == 1 { i + 1 } else { i + 2 };
                relations.extend((from..=size).map(|j| (i, j)));
            }
            let up = (n - 1).div_ceil(2);
            let down = (n - 1) / 2;
            let mut functional = vec![(1, size)];
            functional.extend((1..=2 * up + 1).map(|i| (i, 2 * n)));
            functional.extend((1..=down).map(|k| (2 * k, 2 * n - 2 * k)));
            functional.extend((1..=down).map(|k| (2 * k + 1, 2 * n - 2 * k + 1)));
            PairShape { size, relations, functional, roles: (1, 2 * n, Some(size)), one_minimal: true }
        }
        (Family::P5Star, Some(n)) => {
            let size = 2 * n + 1;
            let mut relations = Vec::new();
            for i in 1..=2 * n {
                if i % 2 == 1 && i < 2 * n {
                    relations.extend((i + 2..=size).map(|j| (i, j)));
                } else if i % 2 == 0 {
                    relations.extend((i + 1..=size).map(|j| (i, j)));
                }
            }
            let up = (n - 1).div_ceil(2);
            let down = (n - 1) / 2;
            let mut functional = vec![(1, size)];
            functional.extend((size - 2 * up..=size).map(|i| (2, i)));
            functional.extend((2..=n.div_ceil(2)).map(|k| (2 * k, 2 * n - 2 * k + 4)));
            functional.extend((1..=down).map(|k| (2 * k + 1, 2 * n - 2 * k + 1)));
            PairShape { size, relations, functional, roles: (size, 1, Some(2)), one_minimal: false }
        }
        _ => unreachable!("parameter checked above"),
    };
    assemble(id, shape)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ToralPairReport {
    pub p1_ok: bool,
    pub p2_ok: bool,
    pub p3_ok: bool,
    pub f1_ok: bool,
    pub f2_ok: bool,
    pub f3_ok: bool,
    pub f4_ok: bool,
    pub frobenius_ok: bool,
}

impl ToralPairReport {
    pub fn all_ok(&self) -> bool {
        self.p1_ok && self.p2_ok && self.p3_ok && self.f1_ok && self.f2_ok && self.f3_ok && self.f4_ok && self.frobenius_ok
    }

    pub fn fields(&self) -> [(&'static str, bool); 8] {
        [
            ("p1_ok", self.p1_ok),
            ("p2_ok", self.p2_ok),
            ("p3_ok", self.p3_ok),
            ("f1_ok", self.f1_ok),
            ("f2_ok", self.f2_ok),
            ("f3_ok", self.f3_ok),
            ("f4_ok", self.f4_ok),
            ("frobenius_ok", self.frobenius_ok),
        ]
    }
}

/// Checks the toral-pair conditions on `(P, F)`. Nothing is assumed about
/// the input; every failed check is reported rather than raised.
pub fn verify_toral_pair(poset: &Poset, f: &Functional) -> ToralPairReport {
    verify_toral_pair_seeded(poset, f, 0)
}

/// As [`verify_toral_pair`]; `seed` drives the search for a Frobenius
/// witness when `F` itself is not Frobenius.
pub fn verify_toral_pair_seeded(poset: &Poset, f: &Functional, seed: u64) -> ToralPairReport {
    let mut report = ToralPairReport::default();
    let ext = poset.extremal_data();
    report.p1_ok = matches!(ext.ext.len(), 2 | 3);
    report.p3_ok = {
        let max_dim = poset.height().max(1);
        let betti = betti_numbers(&order_complex(poset), max_dim).betti;
        betti[0] == 1 && betti[1..].iter().all(|&b| b == 0)
    };
    report.f1_ok = spectral::is_small(poset, f).unwrap_or(false);
    report.f2_ok = report.f1_ok && spectral::partition(poset, f).is_ok_and(|p| p.conditions_hold());
    report.f3_ok = ext.rel_ext.iter().all(|&(p, q)| !f.coeff(p, q).is_zero());
    report.f4_ok = {
        let kernel = full_kernel(poset, f);
        kernel.len() == 1
            && kernel.iter().all(|b| {
                let d0 = b.get(0, 0);
                b.terms().all(|((p, q), _)| p == q) && (0..poset.len()).all(|p| b.get(p, p) == d0)
            })
    };
    let Ok(g) = LiePosetAlgebra::build(poset) else { return report };
    report.frobenius_ok = g.is_frobenius_functional(f);
    let witness = if report.frobenius_ok {
        Some(f.clone())
    } else {
        (0..DEFAULT_TRIALS)
            .map(|t| g.random_functional(&mut trial_rng(seed, t)))
            .find(|h| g.is_frobenius_functional(h))
    };
    report.p2_ok = witness.is_some_and(|h| {
        principal_general(&g, &h).is_ok_and(|fhat| spectral::spectrum(&g, &fhat).binary)
    });
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    A1,
    A2,
    B,
    C,
    D1,
    D2,
    E1,
    E2,
    F,
    G1,
    G2,
    H,
}

/// Comparability requirement between `x` and another target in `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Link {
    Related,
    Unrelated,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::A1,
        Rule::A2,
        Rule::B,
        Rule::C,
        Rule::D1,
        Rule::D2,
        Rule::E1,
        Rule::E2,
        Rule::F,
        Rule::G1,
        Rule::G2,
        Rule::H,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::A1 => "A1",
            Rule::A2 => "A2",
            Rule::B => "B",
            Rule::C => "C",
            Rule::D1 => "D1",
            Rule::D2 => "D2",
            Rule::E1 => "E1",
            Rule::E2 => "E2",
            Rule::F => "F",
            Rule::G1 => "G1",
            Rule::G2 => "G2",
            Rule::H => "H",
        }
    }

    /// Extremes of `S` identified with elements of `Q`.
    pub fn roles(self) -> &'static [Role] {
        match self {
            Rule::A1 => &[Role::B],
            Rule::A2 => &[Role::C],
            Rule::B => &[Role::B, Role::C],
            Rule::C => &[Role::A],
            Rule::D1 | Rule::E1 => &[Role::A, Role::B],
            Rule::D2 | Rule::E2 => &[Role::A, Role::C],
            Rule::F | Rule::G1 | Rule::G2 | Rule::H => &[Role::A, Role::B, Role::C],
        }
    }

    /// Required relation between the target of `a` and the targets of `b`, `c`.
    fn links(self) -> (Option<Link>, Option<Link>) {
        use Link::*;
        match self {
            Rule::D1 => (Some(Related), None),
            Rule::E1 => (Some(Unrelated), None),
            Rule::D2 => (None, Some(Related)),
            Rule::E2 => (None, Some(Unrelated)),
            Rule::F => (Some(Related), Some(Related)),
            Rule::G1 => (Some(Related), Some(Unrelated)),
            Rule::G2 => (Some(Unrelated), Some(Related)),
            Rule::H => (Some(Unrelated), Some(Unrelated)),
            _ => (None, None),
        }
    }

    pub fn needs_third_extreme(self) -> bool {
        !matches!(self, Rule::A1 | Rule::C | Rule::E1)
    }

    /// Change in index caused by one application.
    pub fn index_increment(self) -> usize {
        match self {
            Rule::A1 | Rule::A2 | Rule::C | Rule::D1 | Rule::D2 | Rule::F => 0,
            Rule::B | Rule::E1 | Rule::E2 | Rule::G1 | Rule::G2 => 1,
            Rule::H => 2,
        }
    }

    pub fn keeps_frobenius(self) -> bool {
        self.index_increment() == 0
    }

    /// Extremal edges counted twice when the functionals are added.
    fn duplicated_roles(self) -> &'static [Role] {
        match self {
            Rule::D1 => &[Role::B],
            Rule::D2 => &[Role::C],
            Rule::F => &[Role::B, Role::C],
            _ => &[],
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Param(format!("unknown rule `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionStep {
    pub pair: ToralPairId,
    pub rule: Rule,
    /// Designated extremes of `S` mapped to element names of the running poset.
    pub identify: BTreeMap<Role, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSequence {
    pub seed: ToralPairId,
    pub steps: Vec<ConstructionStep>,
}

impl fmt::Display for ConstructionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for step in &self.steps {
            write!(f, "attach {} rule {}", step.pair, step.rule)?;
            for (role, target) in &step.identify {
                write!(f, " {}->{}", role.name(), target)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Text format, one directive per line:
///
/// ```text
/// seed P2
/// attach P2 rule A1 b->q3
/// attach P4,5 rule C a->q5
/// ```
///
/// Elements of the running poset are named `q1, q2, …`: the seed's elements
/// in catalog order, then each step's new elements in catalog order.
/// Blank lines and text after `#` are ignored.
impl FromStr for ConstructionSequence {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut steps = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some(&head) = tokens.first() else { continue };
            let err = |token: &str, msg: &str| Error::Parse { line, token: token.to_string(), msg: msg.to_string() };
            let pair = |token: &str| token.parse::<ToralPairId>().map_err(|e| err(token, &e.to_string()));
            match head {
                "seed" => {
                    if seed.is_some() {
                        return Err(err(head, "seed given twice"));
                    }
                    if !steps.is_empty() {
                        return Err(err(head, "seed must come before attach lines"));
                    }
                    match tokens.as_slice() {
                        [_, id] => seed = Some(pair(id)?),
                        [_] => return Err(err(head, "missing toral pair")),
                        [_, _, extra, ..] => return Err(err(extra, "unexpected token")),
                        [] => unreachable!(),
                    }
                }
                "attach" => {
                    if seed.is_none() {
                        return Err(err(head, "attach before seed"));
                    }
                    let id = tokens.get(1).ok_or_else(|| err(head, "missing toral pair"))?;
                    let id = pair(id)?;
                    match tokens.get(2) {
                        Some(&"rule") => {}
                        Some(t) => return Err(err(t, "expected `rule`")),
                        None => return Err(err(head, "missing `rule`")),
                    }
                    let rule_tok = tokens.get(3).ok_or_else(|| err("rule", "missing rule name"))?;
                    let rule: Rule = rule_tok.parse().map_err(|e: Error| err(rule_tok, &e.to_string()))?;
                    let mut identify = BTreeMap::new();
                    for tok in &tokens[4..] {
                        let (role, target) = tok.split_once("->").ok_or_else(|| err(tok, "expected role->element"))?;
                        let role: Role = role.parse().map_err(|e: Error| err(tok, &e.to_string()))?;
                        if target.is_empty() {
                            return Err(err(tok, "missing target element"));
                        }
                        if identify.insert(role, target.to_string()).is_some() {
                            return Err(err(tok, "role given twice"));
                        }
                    }
                    steps.push(ConstructionStep { pair: id, rule, identify });
                }
                other => return Err(err(other, "expected `seed` or `attach`")),
            }
        }
        let seed = seed.ok_or_else(|| Error::Parse { line: 0, token: String::new(), msg: "missing seed line".into() })?;
        Ok(ConstructionSequence { seed, steps })
    }
}

/// Result of gluing: the new poset and where each element of `S` went.
#[derive(Clone, Debug)]
pub struct Glued {
    pub poset: Poset,
    pub s_map: Vec<usize>,
}

fn rule_error(rule: Rule, reason: impl Into<String>) -> Error {
    Error::Rule { rule: rule.name().to_string(), reason: reason.into() }
}

/// Identifies the designated extremes of `s` with elements of `q` as
/// prescribed by `step`, after checking every precondition of the rule.
pub fn glue(q: &Poset, s: &CatalogPair, step: &ConstructionStep) -> Result<Glued> {
    let rule = step.rule;
    if rule.needs_third_extreme() && s.c.is_none() {
        return Err(rule_error(rule, format!("{} has only two extremal elements", s.id)));
    }
    let roles = rule.roles();
    let given: Vec<Role> = step.identify.keys().copied().collect();
    if given != roles {
        let want: Vec<&str> = roles.iter().map(|r| r.name()).collect();
        return Err(rule_error(rule, format!("expects identifications for {}", want.join(","))));
    }
    let mut targets: BTreeMap<Role, usize> = BTreeMap::new();
    for (&role, name) in &step.identify {
        let x = q.index_of(name).map_err(|_| rule_error(rule, format!("unknown element `{name}`")))?;
        if targets.values().any(|&y| y == x) {
            return Err(rule_error(rule, format!("element `{name}` identified twice")));
        }
        let want_minimal = (role == Role::A) == s.one_minimal;
        let ok = if want_minimal { q.is_minimal(x) } else { q.is_maximal(x) };
        if !ok {
            let kind = if want_minimal { "minimal" } else { "maximal" };
            return Err(rule_error(rule, format!("{} must go to a {kind} element, `{name}` is not", role.name())));
        }
        targets.insert(role, x);
    }
    let (to_b, to_c) = rule.links();
    for (link, other) in [(to_b, Role::B), (to_c, Role::C)] {
        let Some(link) = link else { continue };
        let (x, y) = (targets[&Role::A], targets[&other]);
        let related = q.comparable(x, y);
        if related != (link == Link::Related) {
            let want = if link == Link::Related { "related" } else { "unrelated" };
            return Err(rule_error(
                rule,
                format!("targets of a and {} must be {want} (`{}`, `{}`)", other.name(), q.name(x), q.name(y)),
            ));
        }
    }
    let mut s_map = vec![usize::MAX; s.poset.len()];
    for (role, &x) in &targets {
        s_map[s.role(*role).unwrap()] = x;
    }
    let mut names: Vec<String> = q.names().to_vec();
    for slot in s_map.iter_mut().filter(|v| **v == usize::MAX) {
        *slot = names.len();
        names.push(format!("q{}", names.len() + 1));
    }
    let mut pairs: Vec<(usize, usize)> = q.relations().to_vec();
    pairs.extend(s.poset.relations().iter().map(|&(i, j)| (s_map[i], s_map[j])));
    let poset = Poset::with_names(names, &pairs)?;
    Ok(Glued { poset, s_map })
}

/// Applies one construction step to `q`, taking `S` from the catalog.
pub fn apply_rule(q: &Poset, step: &ConstructionStep) -> Result<Poset> {
    Ok(glue(q, &catalog(step.pair)?, step)?.poset)
}

/// Catalog pair with its elements renamed `q1..qk`.
fn seed_poset(pair: &CatalogPair) -> Poset {
    let names = (1..=pair.poset.len()).map(|i| format!("q{i}")).collect();
    Poset::with_names(names, pair.poset.relations()).unwrap()
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub poset: Poset,
    pub functional: Option<Functional>,
}

#[derive(Clone, Debug)]
pub struct BuiltSequence {
    /// `Q_1, …, Q_n`; the last entry is the constructed poset.
    pub stages: Vec<Stage>,
    /// First step whose rule leaves the toral functional undefined.
    pub undefined_at: Option<(usize, Rule)>,
}

impl BuiltSequence {
    pub fn poset(&self) -> &Poset {
        &self.stages.last().unwrap().poset
    }

    pub fn functional(&self) -> Result<&Functional> {
        match (&self.stages.last().unwrap().functional, self.undefined_at) {
            (Some(f), _) => Ok(f),
            (None, Some((step, rule))) => Err(Error::FunctionalUndefined { step, rule: rule.name().to_string() }),
            (None, None) => unreachable!(),
        }
    }
}

/// Runs a construction sequence and assembles the toral functional: the sum
/// of the step functionals minus each extremal edge that both sides carry
/// (rules D1, D2 and F).
pub fn build_sequence(seq: &ConstructionSequence) -> Result<BuiltSequence> {
    let seed = catalog(seq.seed)?;
    let mut poset = seed_poset(&seed);
    let mut counts: BTreeMap<(usize, usize), i64> = seed.functional.support().into_iter().map(|k| (k, 1)).collect();
    let to_functional = |p: &Poset, counts: &BTreeMap<(usize, usize), i64>| {
        let coeffs = counts.iter().filter(|(_, &v)| v != 0).map(|(&k, &v)| (k, q(v))).collect();
        Functional::new(p, coeffs)
    };
    let mut stages = vec![Stage { functional: Some(to_functional(&poset, &counts)?), poset: poset.clone() }];
    let mut undefined_at = None;
    for (i, step) in seq.steps.iter().enumerate() {
        let s = catalog(step.pair)?;
        let glued = glue(&poset, &s, step)
            .map_err(|e| match e {
                Error::Rule { rule, reason } => Error::Rule { rule, reason: format!("step {}: {reason}", i + 1) },
                other => other,
            })?;
        poset = glued.poset;
        if undefined_at.is_none() && !step.rule.keeps_frobenius() {
            undefined_at = Some((i + 1, step.rule));
        }
        let functional = if undefined_at.is_none() {
            for (p, q) in s.functional.support() {
                *counts.entry((glued.s_map[p], glued.s_map[q])).or_default() += 1;
            }
            let x = glued.s_map[s.a];
            for role in step.rule.duplicated_roles() {
                let y = glued.s_map[s.role(*role).unwrap()];
                let key = if s.one_minimal { (x, y) } else { (y, x) };
                *counts.entry(key).or_default() -= 1;
            }
            Some(to_functional(&poset, &counts)?)
        } else {
            None
        };
        stages.push(Stage { poset: poset.clone(), functional });
    }
    Ok(BuiltSequence { stages, undefined_at })
}

/// `|Rel_E(P)| − |Ext(P)| + 1`
pub fn index_by_formula(poset: &Poset) -> i64 {
    let ext = poset.extremal_data();
    ext.rel_ext.len() as i64 - ext.ext.len() as i64 + 1
}

pub fn predict_index_by_rules(seq: &ConstructionSequence) -> usize {
    seq.steps.iter().map(|s| s.rule.index_increment()).sum()
}

pub fn uses_only_frobenius_rules(seq: &ConstructionSequence) -> bool {
    seq.steps.iter().all(|s| s.rule.keeps_frobenius())
}

/// Families and sizes drawn by [`random_sequence`].
pub fn random_pair<R: Rng>(rng: &mut R) -> ToralPairId {
    let family = *Family::ALL.choose(rng).unwrap();
    let n = match family {
        Family::P4 | Family::P4Star => Some(rng.gen_range(4..=5)),
        Family::P5 | Family::P5Star => Some(rng.gen_range(1..=2)),
        _ => None,
    };
    ToralPairId::new(family, n).unwrap()
}

/// Every valid identification of `s`'s extremes into `q` under `rule`.
pub fn valid_identifications(q: &Poset, s: &CatalogPair, rule: Rule) -> Vec<BTreeMap<Role, String>> {
    if rule.needs_third_extreme() && s.c.is_none() {
        return Vec::new();
    }
    let ext = q.extremal_data();
    let pool = |role: Role| {
        if (role == Role::A) == s.one_minimal {
            ext.minimals.clone()
        } else {
            ext.maximals.clone()
        }
    };
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn rec(
        q: &Poset,
        rule: Rule,
        roles: &[Role],
        pools: &[Vec<usize>],
        current: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<Role, String>>,
    ) {
        if current.len() == roles.len() {
            let map: BTreeMap<Role, usize> = roles.iter().copied().zip(current.iter().copied()).collect();
            let (to_b, to_c) = rule.links();
            let ok = [(to_b, Role::B), (to_c, Role::C)].into_iter().all(|(link, other)| match link {
                None => true,
                Some(l) => q.comparable(map[&Role::A], map[&other]) == (l == Link::Related),
            });
            if ok {
                out.push(map.into_iter().map(|(r, x)| (r, q.name(x).to_string())).collect());
            }
            return;
        }
        for &x in &pools[current.len()] {
            if current.contains(&x) {
                continue;
            }
            current.push(x);
            rec(q, rule, roles, pools, current, out);
            current.pop();
        }
    }
    let roles = rule.roles();
    let pools: Vec<Vec<usize>> = roles.iter().map(|&r| pool(r)).collect();
    rec(q, rule, roles, &pools, &mut current, &mut out);
    out
}

/// Random valid construction sequence with between 1 and `max_steps`
/// attach steps: each step picks a pair, then a rule uniformly among those
/// with at least one valid identification, then one such identification.
pub fn random_sequence<R: Rng>(rng: &mut R, max_steps: usize) -> ConstructionSequence {
    let seed = random_pair(rng);
    let mut poset = seed_poset(&catalog(seed).unwrap());
    let depth = rng.gen_range(1..=max_steps.max(1));
    let mut steps = Vec::new();
    while steps.len() < depth {
        let pair = random_pair(rng);
        let s = catalog(pair).unwrap();
        let options: Vec<(Rule, Vec<BTreeMap<Role, String>>)> = Rule::ALL
            .into_iter()
            .map(|r| (r, valid_identifications(&poset, &s, r)))
            .filter(|(_, maps)| !maps.is_empty())
            .collect();
        let Some((rule, maps)) = options.choose(rng) else { continue };
        let identify = maps.choose(rng).unwrap().clone();
        let step = ConstructionStep { pair, rule: *rule, identify };
        poset = glue(&poset, &s, &step).expect("identification chosen among valid ones").poset;
        steps.push(step);
    }
    ConstructionSequence { seed, steps }
}

/// The sequence drawn in the worked example: four copies of `P2` attached to
/// a seed `P2` by rules A1, C, D1 and F.
pub const WORKED_EXAMPLE_SEQUENCE: &str = "\
seed P2
attach P2 rule A1 b->q3
attach P2 rule C a->q5
attach P2 rule D1 a->q5 b->q7
attach P2 rule F a->q1 b->q4 c->q3
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_ids_parse() {
        let id: ToralPairId = "P4*,7".parse().unwrap();
        assert_eq!(id, ToralPairId::sized(Family::P4Star, 7));
        assert_eq!(id.to_string(), "P4*,7");
        assert!("P4".parse::<ToralPairId>().is_err());
        assert!("P4,3".parse::<ToralPairId>().is_err());
        assert!("P2,3".parse::<ToralPairId>().is_err());
        assert!("P9".parse::<ToralPairId>().is_err());
    }

    #[test]
    fn p2_catalog_shape() {
        let c = catalog(ToralPairId::fixed(Family::P2)).unwrap();
        assert_eq!(c.poset.len(), 4);
        assert_eq!(c.poset.relations().len(), 5);
        assert_eq!(c.functional.support().len(), 3);
    }

    #[test]
    fn dsl_round_trip() {
        let seq: ConstructionSequence = WORKED_EXAMPLE_SEQUENCE.parse().unwrap();
        assert_eq!(seq.steps.len(), 4);
        assert_eq!(seq.to_string(), WORKED_EXAMPLE_SEQUENCE);
        let back: ConstructionSequence = seq.to_string().parse().unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn dsl_errors_carry_position() {
        let e = "seed P2\nattach P2 rule Z1 b->q3\n".parse::<ConstructionSequence>().unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, ref token, .. } if token == "Z1"));
        let e = "seed P2\nattach P2 rulez A1\n".parse::<ConstructionSequence>().unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, ref token, .. } if token == "rulez"));
        let e = "attach P2 rule A1 b->q3\n".parse::<ConstructionSequence>().unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = "# comment\nseed P2\nattach P2 rule A1 bq3\n".parse::<ConstructionSequence>().unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, ref token, .. } if token == "bq3"));
        assert!("".parse::<ConstructionSequence>().is_err());
    }

    #[test]
    fn rule_increments() {
        let zero: Vec<_> = Rule::ALL.into_iter().filter(|r| r.index_increment() == 0).collect();
        assert_eq!(zero, vec![Rule::A1, Rule::A2, Rule::C, Rule::D1, Rule::D2, Rule::F]);
        assert_eq!(Rule::H.index_increment(), 2);
    }
}
