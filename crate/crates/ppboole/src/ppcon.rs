//! Primitive positive formulas over a Boolean structure, pp-powers,
//! homomorphism search over small general domains, and verifiable
//! pp-construction certificates.
//!
//! A certificate packages a pp-power of a source structure together with
//! homomorphisms in both directions between the built power and a target
//! structure; verification re-evaluates every formula and re-checks both
//! maps, so a passing certificate establishes that the source pp-constructs
//! the target and hence that the target's CSP reduces to the source's.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::structures::{Relation, Structure, StructureError};

#[derive(Debug, Error)]
pub enum PpconError {
    #[error("unknown relation `{0}` in formula")]
    UnknownRelation(String),
    #[error("relation `{0}` used with arity {1}, declared {2}")]
    AtomArity(String, usize, usize),
    #[error("variable index {0} out of range (have {1} variables)")]
    BadVariable(usize, usize),
    #[error("formula for `{name}` has {got} free variables, need k*n = {want}")]
    FreeVarCount { name: String, got: usize, want: usize },
    #[error("source has no unary singleton relation for the constant {}", *.0 as u8)]
    NoSingleton(bool),
    #[error("pp-power dimension {0} out of range 1..=4")]
    BadDimension(usize),
    #[error("formula too large: {0} variable classes")]
    TooManyVars(usize),
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error("certificate format: {0}")]
    CertFormat(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// An atom of a pp-formula. Variables are global indices: the free
/// variables come first, existential ones after them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Rel { name: String, vars: Vec<usize> },
    Eq(usize, usize),
    /// Sugar for a singleton-relation atom; expansion requires the source
    /// to carry the corresponding unary singleton relation.
    Const(usize, bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpFormula {
    pub free_vars: usize,
    pub existential_vars: usize,
    pub atoms: Vec<Atom>,
}

impl PpFormula {
    pub fn new(free_vars: usize, existential_vars: usize, atoms: Vec<Atom>) -> Self {
        PpFormula {
            free_vars,
            existential_vars,
            atoms,
        }
    }

    fn total_vars(&self) -> usize {
        self.free_vars + self.existential_vars
    }

    fn validate(&self, a: &Structure) -> Result<(), PpconError> {
        let total = self.total_vars();
        for atom in &self.atoms {
            match atom {
                Atom::Rel { name, vars } => {
                    let rel = a
                        .relation(name)
                        .ok_or_else(|| PpconError::UnknownRelation(name.clone()))?;
                    if vars.len() != rel.arity() {
                        return Err(PpconError::AtomArity(
                            name.clone(),
                            vars.len(),
                            rel.arity(),
                        ));
                    }
                    for &v in vars {
                        if v >= total {
                            return Err(PpconError::BadVariable(v, total));
                        }
                    }
                }
                Atom::Eq(u, v) => {
                    for &w in [*u, *v].iter() {
                        if w >= total {
                            return Err(PpconError::BadVariable(w, total));
                        }
                    }
                }
                Atom::Const(v, _) => {
                    if *v >= total {
                        return Err(PpconError::BadVariable(*v, total));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Finds a unary singleton relation `{value}` in the structure.
pub fn singleton_relation(a: &Structure, value: bool) -> Option<&Relation> {
    let want = value as u32;
    a.relations()
        .iter()
        .find(|r| r.arity() == 1 && r.len() == 1 && r.contains(want))
}

/// The relation defined by a pp-formula: all free-variable tuples extendable
/// to a satisfying assignment. Equalities are eliminated by union-find over
/// variables first; constant atoms expand to singleton-relation atoms.
pub fn eval_pp(a: &Structure, phi: &PpFormula) -> Result<Relation, PpconError> {
    phi.validate(a)?;
    let total = phi.total_vars();

    let mut atoms: Vec<(String, Vec<usize>)> = Vec::new();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for atom in &phi.atoms {
        match atom {
            Atom::Rel { name, vars } => atoms.push((name.clone(), vars.clone())),
            Atom::Eq(u, v) => {
                let (ru, rv) = (find(&mut parent, *u), find(&mut parent, *v));
                parent[ru.max(rv)] = ru.min(rv);
            }
            Atom::Const(v, b) => {
                let rel = singleton_relation(a, *b).ok_or(PpconError::NoSingleton(*b))?;
                atoms.push((rel.name().to_string(), vec![*v]));
            }
        }
    }
    let root: Vec<usize> = (0..total).map(|v| find(&mut parent, v)).collect();
    let mut classes: Vec<usize> = root.clone();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() > 24 {
        return Err(PpconError::TooManyVars(classes.len()));
    }
    let class_of: Vec<usize> = root
        .iter()
        .map(|r| classes.iter().position(|c| c == r).unwrap())
        .collect();

    let mut tuples: BTreeSet<u32> = BTreeSet::new();
    'assignments: for code in 0u32..1u32 << classes.len() {
        let value = |v: usize| code >> class_of[v] & 1;
        for (name, vars) in &atoms {
            let rel = a.relation(name).expect("validated");
            let mut mask = 0u32;
            for (j, &v) in vars.iter().enumerate() {
                mask |= value(v) << (rel.arity() - 1 - j);
            }
            if !rel.contains(mask) {
                continue 'assignments;
            }
        }
        let mut free_mask = 0u32;
        for v in 0..phi.free_vars {
            free_mask |= value(v) << (phi.free_vars - 1 - v);
        }
        tuples.insert(free_mask);
    }
    Ok(Relation::new("phi", phi.free_vars.max(1), tuples)?)
}

/// A pp-power: a structure on `{0,1}^n` whose k-ary relations are read off
/// kn-ary pp-definable relations of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpPower {
    pub source: Structure,
    pub dimension: usize,
    pub targets: Vec<(String, usize, PpFormula)>,
}

/// A relational structure over an arbitrary small finite domain `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenStructure {
    pub name: String,
    pub domain_size: usize,
    pub relations: Vec<GenRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenRelation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl GenStructure {
    pub fn from_boolean(a: &Structure) -> GenStructure {
        GenStructure {
            name: a.name().to_string(),
            domain_size: 2,
            relations: a
                .relations()
                .iter()
                .map(|r| GenRelation {
                    name: r.name().to_string(),
                    arity: r.arity(),
                    tuples: r
                        .tuples()
                        .map(|t| {
                            (0..r.arity())
                                .map(|j| (t >> (r.arity() - 1 - j) & 1) as usize)
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    fn same_signature(&self, other: &GenStructure) -> bool {
        self.relations.len() == other.relations.len()
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|(a, b)| a.name == b.name && a.arity == b.arity)
    }
}

/// Evaluates every formula of the power and regroups kn-tuples over `{0,1}`
/// into k-tuples over the 2^n-element power domain; element `e` encodes the
/// block `(e >> (n-1) & 1, .., e & 1)`.
pub fn build_power(p: &PpPower) -> Result<GenStructure, PpconError> {
    let n = p.dimension;
    if !(1..=4).contains(&n) {
        return Err(PpconError::BadDimension(n));
    }
    let mut relations = Vec::new();
    for (name, k, phi) in &p.targets {
        if phi.free_vars != k * n {
            return Err(PpconError::FreeVarCount {
                name: name.clone(),
                got: phi.free_vars,
                want: k * n,
            });
        }
        let flat = eval_pp(&p.source, phi)?;
        let tuples = flat
            .tuples()
            .map(|t| {
                (0..*k)
                    .map(|block| {
                        let shift = (k - 1 - block) * n;
                        (t >> shift & ((1 << n) - 1)) as usize
                    })
                    .collect::<Vec<usize>>()
            })
            .collect();
        relations.push(GenRelation {
            name: name.clone(),
            arity: *k,
            tuples,
        });
    }
    Ok(GenStructure {
        name: format!("{}^{n}", p.source.name()),
        domain_size: 1 << n,
        relations,
    })
}

/// Backtracking search for a relation-preserving map from `a` to `b`.
pub fn find_homomorphism(a: &GenStructure, b: &GenStructure) -> Result<Option<Vec<usize>>, PpconError> {
    if !a.same_signature(b) {
        return Err(PpconError::SignatureMismatch);
    }
    let mut map: Vec<Option<usize>> = vec![None; a.domain_size];
    if dfs_hom(a, b, &mut map, 0) {
        Ok(Some(map.into_iter().map(|v| v.unwrap()).collect()))
    } else {
        Ok(None)
    }
}

fn consistent(a: &GenStructure, b: &GenStructure, map: &[Option<usize>]) -> bool {
    for (ra, rb) in a.relations.iter().zip(&b.relations) {
        for t in &ra.tuples {
            let image: Option<Vec<usize>> = t.iter().map(|&x| map[x]).collect();
            if let Some(img) = image {
                if !rb.tuples.contains(&img) {
                    return false;
                }
            }
        }
    }
    true
}

fn dfs_hom(a: &GenStructure, b: &GenStructure, map: &mut Vec<Option<usize>>, next: usize) -> bool {
    if next == a.domain_size {
        return true;
    }
    for v in 0..b.domain_size {
        map[next] = Some(v);
        if consistent(a, b, map) && dfs_hom(a, b, map, next + 1) {
            return true;
        }
    }
    map[next] = None;
    false
}

/// Homomorphisms exist in both directions.
pub fn hom_equivalent(a: &GenStructure, b: &GenStructure) -> Result<bool, PpconError> {
    Ok(find_homomorphism(a, b)?.is_some() && find_homomorphism(b, a)?.is_some())
}

/// A pp-construction witness: the target is homomorphically equivalent to
/// the given pp-power of the source, via the two explicit maps.
#[derive(Debug, Clone)]
pub struct PpCertificate {
    pub name: String,
    pub source: Structure,
    pub target: Structure,
    pub power: PpPower,
    /// power element (an n-bit code) -> target element
    pub hom_to_target: Vec<usize>,
    /// target element -> power element
    pub hom_from_target: Vec<usize>,
}

/// Re-builds the power and checks both maps tuple by tuple; an empty result
/// means the certificate is valid.
pub fn certificate_diagnostics(c: &PpCertificate) -> Vec<String> {
    let mut out = Vec::new();
    if c.power.source != c.source {
        out.push("power source differs from certificate source".to_string());
        return out;
    }
    let power = match build_power(&c.power) {
        Ok(p) => p,
        Err(e) => {
            out.push(format!("building the power failed: {e}"));
            return out;
        }
    };
    let target = GenStructure::from_boolean(&c.target);
    if !power.same_signature(&target) {
        out.push("power and target signatures differ".to_string());
        return out;
    }
    if c.hom_to_target.len() != power.domain_size
        || c.hom_from_target.len() != target.domain_size
    {
        out.push("homomorphism map has the wrong domain size".to_string());
        return out;
    }
    check_map(&power, &target, &c.hom_to_target, "power->target", &mut out);
    check_map(&target, &power, &c.hom_from_target, "target->power", &mut out);
    out
}

fn check_map(
    a: &GenStructure,
    b: &GenStructure,
    map: &[usize],
    dir: &str,
    out: &mut Vec<String>,
) {
    if let Some(&v) = map.iter().find(|&&v| v >= b.domain_size) {
        out.push(format!("{dir}: value {v} outside codomain"));
        return;
    }
    for (ra, rb) in a.relations.iter().zip(&b.relations) {
        for t in &ra.tuples {
            let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            if !rb.tuples.contains(&img) {
                let mut msg = String::new();
                let _ = write!(
                    msg,
                    "{dir}: atom {} over {:?} maps to {:?} which is not in the relation",
                    ra.name, t, img
                );
                out.push(msg);
            }
        }
    }
}

pub fn verify_certificate(c: &PpCertificate) -> bool {
    certificate_diagnostics(c).is_empty()
}

/// The identity certificate: dimension 1, each relation defined by its own
/// atom, identity maps.
pub fn identity_certificate(a: &Structure) -> PpCertificate {
    let targets = a
        .relations()
        .iter()
        .map(|r| {
            let atoms = vec![Atom::Rel {
                name: r.name().to_string(),
                vars: (0..r.arity()).collect(),
            }];
            (
                r.name().to_string(),
                r.arity(),
                PpFormula::new(r.arity(), 0, atoms),
            )
        })
        .collect();
    PpCertificate {
        name: format!("identity_{}", a.name()),
        source: a.clone(),
        target: a.clone(),
        power: PpPower {
            source: a.clone(),
            dimension: 1,
            targets,
        },
        hom_to_target: vec![0, 1],
        hom_from_target: vec![0, 1],
    }
}

// ---------------------------------------------------------------------------
// Textual certificate format.
//
//   source = dstcon
//   target = blocker_leq:2
//   dimension = 2
//   relation zero/1 = x1=0 & x2=1
//   relation B2/2 = leq(x2,y1)
//   to_target = 00:1 01:0 10:1 11:1
//   from_target = 0:01 1:10
//
// Free variables of a k-ary relation formula are written as blocks
// x1..xn, y1..yn, z.., w..; any other identifier is an existential variable.

const BLOCK_LETTERS: [char; 4] = ['x', 'y', 'z', 'w'];

fn parse_var(
    token: &str,
    k: usize,
    n: usize,
    existentials: &mut Vec<String>,
) -> Result<usize, PpconError> {
    let mut chars = token.chars();
    if let Some(first) = chars.next() {
        if let Some(block) = BLOCK_LETTERS.iter().position(|&c| c == first) {
            if let Ok(coord) = chars.as_str().parse::<usize>() {
                if block < k && (1..=n).contains(&coord) {
                    return Ok(block * n + coord - 1);
                }
                return Err(PpconError::CertFormat(format!(
                    "free variable `{token}` out of range for k={k}, n={n}"
                )));
            }
        }
    }
    if token.is_empty() || !token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(PpconError::CertFormat(format!("bad variable `{token}`")));
    }
    let idx = match existentials.iter().position(|e| e == token) {
        Some(i) => i,
        None => {
            existentials.push(token.to_string());
            existentials.len() - 1
        }
    };
    Ok(k * n + idx)
}

fn parse_formula(text: &str, k: usize, n: usize) -> Result<PpFormula, PpconError> {
    let mut existentials: Vec<String> = Vec::new();
    let mut atoms = Vec::new();
    for part in text.split('&') {
        let part = part.trim();
        if let Some(open) = part.find('(') {
            let name = part[..open].trim().to_string();
            let close = part
                .rfind(')')
                .ok_or_else(|| PpconError::CertFormat(format!("missing `)` in `{part}`")))?;
            let vars = part[open + 1..close]
                .split(',')
                .map(|t| parse_var(t.trim(), k, n, &mut existentials))
                .collect::<Result<Vec<_>, _>>()?;
            atoms.push(Atom::Rel { name, vars });
        } else if let Some((l, r)) = part.split_once('=') {
            let l = l.trim();
            let r = r.trim();
            let lv = parse_var(l, k, n, &mut existentials)?;
            match r {
                "0" => atoms.push(Atom::Const(lv, false)),
                "1" => atoms.push(Atom::Const(lv, true)),
                _ => {
                    let rv = parse_var(r, k, n, &mut existentials)?;
                    atoms.push(Atom::Eq(lv, rv));
                }
            }
        } else {
            return Err(PpconError::CertFormat(format!("cannot parse atom `{part}`")));
        }
    }
    Ok(PpFormula::new(k * n, existentials.len(), atoms))
}

fn parse_code(bits: &str, n: usize) -> Result<usize, PpconError> {
    if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(PpconError::CertFormat(format!("bad element code `{bits}`")));
    }
    Ok(usize::from_str_radix(bits, 2).unwrap())
}

/// Parses the textual certificate format; `source` and `target` refer to
/// canonical structure names.
pub fn parse_certificate(name: &str, text: &str) -> Result<PpCertificate, PpconError> {
    let mut source = None;
    let mut target = None;
    let mut dimension = None;
    let mut rel_specs: Vec<(String, usize, String)> = Vec::new();
    let mut to_target = None;
    let mut from_target = None;

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| PpconError::CertFormat(format!("expected `key = value`: `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key.split_whitespace().next().unwrap_or("") {
            "source" => source = Some(crate::structures::canonical(value)?),
            "target" => target = Some(crate::structures::canonical(value)?),
            "dimension" => {
                dimension = Some(value.parse::<usize>().map_err(|_| {
                    PpconError::CertFormat(format!("bad dimension `{value}`"))
                })?)
            }
            "relation" => {
                let spec = key
                    .strip_prefix("relation")
                    .unwrap()
                    .trim();
                let (rname, arity) = spec.split_once('/').ok_or_else(|| {
                    PpconError::CertFormat(format!("expected `relation NAME/ARITY`: `{key}`"))
                })?;
                let arity = arity.trim().parse::<usize>().map_err(|_| {
                    PpconError::CertFormat(format!("bad arity in `{key}`"))
                })?;
                rel_specs.push((rname.trim().to_string(), arity, value.to_string()));
            }
            "to_target" => to_target = Some(value.to_string()),
            "from_target" => from_target = Some(value.to_string()),
            other => {
                return Err(PpconError::CertFormat(format!("unknown key `{other}`")));
            }
        }
    }

    let source = source.ok_or_else(|| PpconError::CertFormat("missing source".into()))?;
    let target = target.ok_or_else(|| PpconError::CertFormat("missing target".into()))?;
    let n = dimension.ok_or_else(|| PpconError::CertFormat("missing dimension".into()))?;
    if !(1..=4).contains(&n) {
        return Err(PpconError::BadDimension(n));
    }

    let mut targets = Vec::new();
    for (rname, k, body) in &rel_specs {
        targets.push((rname.clone(), *k, parse_formula(body, *k, n)?));
    }

    let parse_map = |text: &str, code_side_left: bool| -> Result<Vec<(usize, usize)>, PpconError> {
        text.split_whitespace()
            .map(|pair| {
                let (l, r) = pair.split_once(':').ok_or_else(|| {
                    PpconError::CertFormat(format!("expected `elem:elem`, got `{pair}`"))
                })?;
                if code_side_left {
                    Ok((parse_code(l, n)?, parse_digit(r)?))
                } else {
                    Ok((parse_digit(l)?, parse_code(r, n)?))
                }
            })
            .collect()
    };
    let to_pairs = parse_map(
        &to_target.ok_or_else(|| PpconError::CertFormat("missing to_target".into()))?,
        true,
    )?;
    let from_pairs = parse_map(
        &from_target.ok_or_else(|| PpconError::CertFormat("missing from_target".into()))?,
        false,
    )?;

    let mut hom_to_target = vec![usize::MAX; 1 << n];
    for (e, v) in to_pairs {
        hom_to_target[e] = v;
    }
    if hom_to_target.contains(&usize::MAX) {
        return Err(PpconError::CertFormat("to_target is not total".into()));
    }
    let mut hom_from_target = vec![usize::MAX; 2];
    for (e, v) in from_pairs {
        if e >= 2 {
            return Err(PpconError::CertFormat(format!("bad target element {e}")));
        }
        hom_from_target[e] = v;
    }
    if hom_from_target.contains(&usize::MAX) {
        return Err(PpconError::CertFormat("from_target is not total".into()));
    }

    Ok(PpCertificate {
        name: name.to_string(),
        source: source.clone(),
        target,
        power: PpPower {
            source,
            dimension: n,
            targets,
        },
        hom_to_target,
        hom_from_target,
    })
}

fn parse_digit(s: &str) -> Result<usize, PpconError> {
    s.parse::<usize>()
        .map_err(|_| PpconError::CertFormat(format!("bad element `{s}`")))
}

/// The pp-power of the order structure that is homomorphically equivalent to
/// the blocker-with-order structure: the construction behind the collapse of
/// the monotone lattice clone with the majority/p clone.
pub fn stcon_to_b2() -> PpCertificate {
    parse_certificate("stcon_to_b2", include_str!("../certs/stcon_to_b2.cert"))
        .expect("shipped certificate parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::canonical;

    fn dstcon() -> Structure {
        canonical("dstcon").unwrap()
    }

    #[test]
    fn eval_pp_examples() {
        // x2 <= y1 over 4 free variables
        let phi = PpFormula::new(
            4,
            0,
            vec![Atom::Rel {
                name: "leq".into(),
                vars: vec![1, 2],
            }],
        );
        let rel = eval_pp(&dstcon(), &phi).unwrap();
        assert_eq!(rel.len(), 12);
        for t in rel.tuples() {
            assert!(t >> 2 & 1 <= t >> 1 & 1);
        }
        // (x1 = 0) & (x2 = 1)
        let phi0 = PpFormula::new(
            2,
            0,
            vec![Atom::Const(0, false), Atom::Const(1, true)],
        );
        let rel = eval_pp(&dstcon(), &phi0).unwrap();
        assert_eq!(rel.tuple_strings(), vec!["01"]);
        // no atoms: full relation
        let full = eval_pp(&dstcon(), &PpFormula::new(1, 0, vec![])).unwrap();
        assert_eq!(full.len(), 2);
        // equality and an existential: x1 = e & leq(e, x2)
        let phi = PpFormula::new(
            2,
            1,
            vec![
                Atom::Eq(0, 2),
                Atom::Rel {
                    name: "leq".into(),
                    vars: vec![2, 1],
                },
            ],
        );
        let rel = eval_pp(&dstcon(), &phi).unwrap();
        assert_eq!(rel.tuple_strings(), vec!["00", "01", "11"]);
        // constant sugar requires singleton relations
        let c2_like = canonical("d2sat").unwrap();
        assert!(matches!(
            eval_pp(&c2_like, &phi0),
            Err(PpconError::NoSingleton(_))
        ));
    }

    #[test]
    fn shipped_certificate_verifies() {
        let cert = stcon_to_b2();
        assert_eq!(certificate_diagnostics(&cert), Vec::<String>::new());
        assert!(verify_certificate(&cert));
        // the power and the target are homomorphically equivalent
        let power = build_power(&cert.power).unwrap();
        let target = GenStructure::from_boolean(&cert.target);
        assert!(hom_equivalent(&power, &target).unwrap());
        // the shipped maps are exactly the expected ones:
        // f((0,1)) = 0, f = 1 elsewhere; g(0) = (0,1), g(1) = (1,0)
        assert_eq!(cert.hom_to_target, vec![1, 0, 1, 1]);
        assert_eq!(cert.hom_from_target, vec![0b01, 0b10]);
    }

    #[test]
    fn power_relations_match_stated_shapes() {
        let cert = stcon_to_b2();
        let power = build_power(&cert.power).unwrap();
        let rel = |name: &str| {
            power
                .relations
                .iter()
                .find(|r| r.name == name)
                .unwrap_or_else(|| panic!("missing {name}"))
        };
        assert_eq!(power.domain_size, 4);
        assert_eq!(rel("zero").tuples, BTreeSet::from([vec![0b01]]));
        assert_eq!(rel("one").tuples, BTreeSet::from([vec![0b10]]));
        // the order formula relates (x1,x2),(y1,y2) iff x1 <= y1 and y2 <= x2
        for t in &rel("leq").tuples {
            let (a, b) = (t[0], t[1]);
            assert!(a >> 1 <= b >> 1 && b & 1 <= a & 1);
        }
    }

    #[test]
    fn corrupted_certificate_fails_at_the_blocker_atom() {
        let mut cert = stcon_to_b2();
        cert.hom_to_target[0b00] = 0;
        let diags = certificate_diagnostics(&cert);
        assert!(!diags.is_empty());
        assert!(
            diags.iter().any(|d| d.contains("B2")),
            "expected a B2 diagnostic, got {diags:?}"
        );
    }

    #[test]
    fn identity_certificate_verifies() {
        for name in ["dstcon", "d2sat", "c2"] {
            let a = canonical(name).unwrap();
            assert!(verify_certificate(&identity_certificate(&a)), "{name}");
        }
    }

    #[test]
    fn hom_search_basics() {
        let a = GenStructure::from_boolean(&dstcon());
        assert!(find_homomorphism(&a, &a).unwrap().is_some());
        // nonempty unary relation cannot map into an empty one
        let with = GenStructure {
            name: "with".into(),
            domain_size: 2,
            relations: vec![GenRelation {
                name: "r".into(),
                arity: 1,
                tuples: BTreeSet::from([vec![0]]),
            }],
        };
        let without = GenStructure {
            name: "without".into(),
            domain_size: 2,
            relations: vec![GenRelation {
                name: "r".into(),
                arity: 1,
                tuples: BTreeSet::new(),
            }],
        };
        assert!(find_homomorphism(&with, &without).unwrap().is_none());
        assert!(find_homomorphism(&without, &with).unwrap().is_some());
        assert!(!hom_equivalent(&with, &without).unwrap());
        // different signatures are rejected
        let other = GenStructure {
            name: "other".into(),
            domain_size: 2,
            relations: vec![],
        };
        assert!(matches!(
            find_homomorphism(&with, &other),
            Err(PpconError::SignatureMismatch)
        ));
    }

    #[test]
    fn certificate_parser_rejects_garbage() {
        assert!(parse_certificate("x", "nonsense").is_err());
        assert!(parse_certificate("x", "source = dstcon\ndimension = 9").is_err());
        let missing = "source = dstcon\ntarget = b2\ndimension = 2\nto_target = 00:0 01:0 10:0 11:0";
        assert!(parse_certificate("x", missing).is_err());
    }
}
