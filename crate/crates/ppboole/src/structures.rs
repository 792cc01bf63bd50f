//! Relational structures on `{0,1}`: relations as packed tuple sets,
//! preservation tests, polymorphism enumeration, the canonical structures
//! used throughout, and JSON (de)serialization.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfn::{BoolFn, MAX_ARITY};
use crate::clones::CloneSlice;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("relation arity {0} out of range 1..={MAX_ARITY}")]
    BadArity(usize),
    #[error("tuple `{0}` does not match relation arity {1}")]
    BadTuple(String, usize),
    #[error("duplicate relation name `{0}`")]
    DuplicateName(String),
    #[error("unknown canonical structure `{0}`")]
    UnknownCanonical(String),
    #[error("polymorphism enumeration is limited to arity <= {limit}, got {got}")]
    PolymorphismArity { got: usize, limit: usize },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A relation on `{0,1}` of arity `r <= 16`; each tuple is packed into a
/// `u32` with the first coordinate in the most significant used bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    name: String,
    arity: usize,
    tuples: BTreeSet<u32>,
}

impl Relation {
    pub fn new(
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = u32>,
    ) -> Result<Self, StructureError> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(StructureError::BadArity(arity));
        }
        let limit = 1u32 << arity;
        let tuples: BTreeSet<u32> = tuples.into_iter().collect();
        if let Some(&t) = tuples.iter().find(|&&t| t >= limit) {
            return Err(StructureError::BadTuple(format!("{t:b}"), arity));
        }
        Ok(Relation {
            name: name.to_string(),
            arity,
            tuples,
        })
    }

    pub fn from_strings(
        name: &str,
        arity: usize,
        tuples: &[&str],
    ) -> Result<Self, StructureError> {
        let mut masks = Vec::new();
        for s in tuples {
            if s.len() != arity || !s.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(StructureError::BadTuple(s.to_string(), arity));
            }
            masks.push(u32::from_str_radix(s, 2).unwrap());
        }
        Relation::new(name, arity, masks)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: u32) -> bool {
        self.tuples.contains(&tuple)
    }

    pub fn tuples(&self) -> impl Iterator<Item = u32> + '_ {
        self.tuples.iter().copied()
    }

    pub fn tuple_strings(&self) -> Vec<String> {
        self.tuples
            .iter()
            .map(|&t| {
                (0..self.arity)
                    .map(|j| {
                        if t >> (self.arity - 1 - j) & 1 == 1 {
                            '1'
                        } else {
                            '0'
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// The relation `{ (x_1,..,x_r) : (1-x_1,..,1-x_r) in R }`.
    pub fn dual(&self) -> Relation {
        let full = (1u32 << self.arity) - 1;
        Relation {
            name: format!("{}d", self.name),
            arity: self.arity,
            tuples: self.tuples.iter().map(|&t| t ^ full).collect(),
        }
    }

    /// If the relation misses exactly one tuple, returns that tuple.
    fn missing_singleton(&self) -> Option<u32> {
        if self.tuples.len() + 1 != 1usize << self.arity {
            return None;
        }
        (0..1u32 << self.arity).find(|t| !self.tuples.contains(t))
    }

    /// Whether `f` applied coordinatewise to any `k` tuples of the relation
    /// always lands back in the relation.
    pub fn preserved_by(&self, f: &BoolFn) -> bool {
        !self.violated_by(f.arity(), |cell| Some(f.bit(cell)))
    }

    /// Violation test against a partially decided table: `cell(i)` returns
    /// the value at table index `i` or `None` when undecided. Only
    /// selections whose every column is decided count, so a `false` answer
    /// for a partial table never rules out a violation by a completion.
    pub fn violated_by(&self, k: usize, cell: impl Fn(usize) -> Option<bool>) -> bool {
        if self.tuples.is_empty() {
            return false;
        }
        if let Some(missing) = self.missing_singleton() {
            if k <= 12 {
                return self.violated_complement(k, missing, &cell);
            }
        }
        self.violated_generic(k, &cell)
    }

    /// Reachability over "which of the k chosen rows already differ from the
    /// missing tuple" masks: coordinates are processed left to right, and a
    /// decided column mapping to the missing tuple's bit extends the mask by
    /// the rows where it disagrees with that bit. The missing tuple is
    /// producible while keeping every row inside the relation iff the full
    /// mask is reachable.
    fn violated_complement(
        &self,
        k: usize,
        missing: u32,
        cell: &impl Fn(usize) -> Option<bool>,
    ) -> bool {
        let states = 1usize << k;
        let full = states - 1;
        let mut reach = vec![false; states];
        reach[0] = true;
        for j in 0..self.arity {
            let target = missing >> (self.arity - 1 - j) & 1 == 1;
            let mut next = vec![false; states];
            for col in 0..states {
                if cell(col) != Some(target) {
                    continue;
                }
                // rows where this column differs from the missing bit
                let differs = if target { full ^ col } else { col };
                for (mask, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
                    next[mask | differs] = true;
                }
            }
            if !next.iter().any(|&b| b) {
                return false;
            }
            reach = next;
        }
        reach[full]
    }

    fn violated_generic(&self, k: usize, cell: &impl Fn(usize) -> Option<bool>) -> bool {
        let rows: Vec<u32> = self.tuples.iter().copied().collect();
        let mut sel = vec![0usize; k];
        loop {
            // columns of the selected rows, one per coordinate
            let mut result = 0u32;
            let mut decided = true;
            for j in 0..self.arity {
                let mut col = 0usize;
                for (i, &s) in sel.iter().enumerate() {
                    if rows[s] >> (self.arity - 1 - j) & 1 == 1 {
                        col |= 1 << (k - 1 - i);
                    }
                }
                match cell(col) {
                    Some(true) => result |= 1 << (self.arity - 1 - j),
                    Some(false) => {}
                    None => {
                        decided = false;
                        break;
                    }
                }
            }
            if decided && !self.tuples.contains(&result) {
                return true;
            }
            let mut pos = k;
            loop {
                if pos == 0 {
                    return false;
                }
                pos -= 1;
                sel[pos] += 1;
                if sel[pos] < rows.len() {
                    break;
                }
                sel[pos] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RelationJson {
    name: String,
    arity: usize,
    tuples: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StructureJson {
    name: String,
    relations: Vec<RelationJson>,
}

/// A finite relational structure on the domain `{0,1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    name: String,
    relations: Vec<Relation>,
}

impl Structure {
    pub fn new(name: &str, relations: Vec<Relation>) -> Result<Self, StructureError> {
        let mut seen = BTreeSet::new();
        for r in &relations {
            if !seen.insert(r.name.clone()) {
                return Err(StructureError::DuplicateName(r.name.clone()));
            }
        }
        Ok(Structure {
            name: name.to_string(),
            relations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(1)
    }

    pub fn dual(&self) -> Structure {
        Structure {
            name: format!("{}d", self.name),
            relations: self.relations.iter().map(|r| r.dual()).collect(),
        }
    }

    pub fn preserved_by(&self, f: &BoolFn) -> bool {
        self.relations.iter().all(|r| r.preserved_by(f))
    }

    /// All `k`-ary polymorphisms, by exhaustive enumeration of tables with a
    /// short-circuiting preservation check. Limited to `k <= 4`.
    pub fn polymorphisms_at_arity(&self, k: usize) -> Result<CloneSlice, StructureError> {
        if k == 0 || k > 4 {
            return Err(StructureError::PolymorphismArity { got: k, limit: 4 });
        }
        let cells = 1usize << k;
        let mut members = BTreeSet::new();
        for code in 0u64..1u64 << cells {
            let f = BoolFn::from_fn(k, |x| {
                let mut i = 0usize;
                for (pos, &b) in x.iter().enumerate() {
                    if b {
                        i |= 1 << (k - 1 - pos);
                    }
                }
                code >> i & 1 == 1
            })
            .expect("arity validated");
            if self.preserved_by(&f) {
                members.insert(f);
            }
        }
        Ok(CloneSlice::from_members(k, members))
    }

    pub fn to_json(&self) -> String {
        let j = StructureJson {
            name: self.name.clone(),
            relations: self
                .relations
                .iter()
                .map(|r| RelationJson {
                    name: r.name.clone(),
                    arity: r.arity,
                    tuples: r.tuple_strings(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let j: StructureJson = serde_json::from_str(text)?;
        let mut relations = Vec::new();
        for r in &j.relations {
            let tuples: Vec<&str> = r.tuples.iter().map(|s| s.as_str()).collect();
            relations.push(Relation::from_strings(&r.name, r.arity, &tuples)?);
        }
        Structure::new(&j.name, relations)
    }
}

fn rel(name: &str, arity: usize, tuples: &[&str]) -> Relation {
    Relation::from_strings(name, arity, tuples).expect("valid canonical relation")
}

fn zero() -> Relation {
    rel("zero", 1, &["0"])
}

fn one() -> Relation {
    rel("one", 1, &["1"])
}

fn leq() -> Relation {
    rel("leq", 2, &["00", "01", "11"])
}

/// The full binary relation minus `(a, b)`.
fn r_not(a: u32, b: u32) -> Relation {
    let skip = a << 1 | b;
    Relation::new(
        &format!("R{a}{b}"),
        2,
        (0..4).filter(|&t| t != skip),
    )
    .unwrap()
}

/// All arity-`k` tuples except the all-zero one.
fn blocker_relation(k: usize) -> Relation {
    Relation::new(&format!("B{k}"), k, 1..1u32 << k).unwrap()
}

/// Builds one of the named structures the test suite and the CLI refer to.
///
/// Names: `d2sat`, `dhornsat`, `d3lin2`, `dstcon`, `c2`, `idem`,
/// `blocker:K`, `blocker_leq:K` (2 <= K <= 8), and `b2` as an alias for
/// `blocker:2`.
pub fn canonical(name: &str) -> Result<Structure, StructureError> {
    let n = name.trim();
    if let Some(k) = n.strip_prefix("blocker_leq:") {
        if let Ok(k) = k.parse::<usize>() {
            if (2..=8).contains(&k) {
                return Structure::new(n, vec![zero(), one(), blocker_relation(k), leq()]);
            }
        }
        return Err(StructureError::UnknownCanonical(n.to_string()));
    }
    if let Some(k) = n.strip_prefix("blocker:") {
        if let Ok(k) = k.parse::<usize>() {
            if (2..=8).contains(&k) {
                return Structure::new(n, vec![zero(), one(), blocker_relation(k)]);
            }
        }
        return Err(StructureError::UnknownCanonical(n.to_string()));
    }
    match n {
        "d2sat" => Structure::new(
            n,
            vec![r_not(0, 0), r_not(0, 1), r_not(1, 0), r_not(1, 1)],
        ),
        "dhornsat" => {
            let r110 = Relation::new("R110", 3, (0..8).filter(|&t| t != 0b110)).unwrap();
            let r111 = Relation::new("R111", 3, (0..8).filter(|&t| t != 0b111)).unwrap();
            Structure::new(n, vec![r110, r111, zero(), one()])
        }
        "d3lin2" => {
            let mut relations = Vec::new();
            for abc in 1u32..8 {
                for d in 0u32..2 {
                    let tuples = (0..8u32).filter(|&t| (t & abc).count_ones() % 2 == d);
                    let name = format!("R{}{}{}{}", abc >> 2 & 1, abc >> 1 & 1, abc & 1, d);
                    relations.push(Relation::new(&name, 3, tuples).unwrap());
                }
            }
            Structure::new(n, relations)
        }
        "dstcon" => Structure::new(n, vec![zero(), one(), leq()]),
        "c2" => Structure::new(n, vec![zero(), one(), rel("neq", 2, &["01", "10"])]),
        "idem" => Structure::new(n, vec![zero(), one()]),
        "b2" => {
            let mut s = canonical("blocker:2")?;
            s.name = "b2".to_string();
            Ok(s)
        }
        _ => Err(StructureError::UnknownCanonical(n.to_string())),
    }
}

pub fn canonical_names() -> Vec<&'static str> {
    vec![
        "d2sat",
        "dhornsat",
        "d3lin2",
        "dstcon",
        "c2",
        "idem",
        "b2",
        "blocker:K",
        "blocker_leq:K",
    ]
}

/// Relations used as certified upper bounds on a generated clone: any
/// relation here that all generators preserve but a candidate operation
/// violates separates the candidate from the clone. Covers the singletons,
/// the order and disequality relations, and every complement of a single
/// tuple up to arity 8.
pub fn fallback_relations() -> Vec<Relation> {
    let mut out = vec![
        zero(),
        one(),
        leq(),
        rel("geq", 2, &["00", "10", "11"]),
        rel("neq", 2, &["01", "10"]),
    ];
    for arity in 2..=8usize {
        for missing in 0..1u32 << arity {
            let tuples = (0..1u32 << arity).filter(|&t| t != missing);
            let name = format!("co{arity}_{missing}");
            out.push(Relation::new(&name, arity, tuples).unwrap());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::named;
    use crate::clones::GeneratorSet;

    fn op(name: &str) -> BoolFn {
        named(name).unwrap()
    }

    #[test]
    fn preservation_basics() {
        let le = leq();
        assert!(le.preserved_by(&op("and")));
        assert!(le.preserved_by(&op("or")));
        assert!(!le.preserved_by(&op("c")));
        let ne = rel("neq", 2, &["01", "10"]);
        assert!(ne.preserved_by(&op("c")));
        assert!(ne.preserved_by(&op("m")));
        assert!(!ne.preserved_by(&op("and")));
    }

    #[test]
    fn blocker_preservation() {
        // d_{k+1} preserves the dual of B_k but d_k (for k >= 3) does not
        for k in 2..=5usize {
            let b = blocker_relation(k).dual();
            assert!(b.preserved_by(&op(&format!("d{}", k + 1))), "d{} on B{k}^d", k + 1);
            if k >= 3 {
                assert!(!b.preserved_by(&op(&format!("d{k}"))), "d{k} on B{k}^d");
            }
        }
        // the dual of q preserves every blocker; q itself violates B_2
        for k in 2..=6usize {
            assert!(blocker_relation(k).preserved_by(&op("qd")));
        }
        assert!(!blocker_relation(2).preserved_by(&op("q")));
        assert!(blocker_relation(2).dual().preserved_by(&op("q")));
    }

    #[test]
    fn complement_dp_agrees_with_generic() {
        // cross-check the mask-reachability path against brute force
        for arity in 2..=3usize {
            for missing in 0..1u32 << arity {
                let r = Relation::new("co", arity, (0..1u32 << arity).filter(|&t| t != missing))
                    .unwrap();
                for name in ["and", "or", "xor", "imp", "star", "d3", "m", "p", "q"] {
                    let f = op(name);
                    let generic = r.violated_generic(f.arity(), &|c| Some(f.bit(c)));
                    let dp = r.violated_complement(f.arity(), missing, &|c| Some(f.bit(c)));
                    assert_eq!(generic, dp, "{name} on co({arity},{missing})");
                }
            }
        }
    }

    #[test]
    fn partial_tables_never_claim_spurious_violations() {
        let r = blocker_relation(3);
        // undecided everywhere: no decided selection exists
        assert!(!r.violated_by(3, |_| None));
        // decided only on constant-0 column: cannot produce the missing tuple
        assert!(!r.violated_by(3, |c| if c == 0 { Some(false) } else { None }));
    }

    #[test]
    fn polymorphism_counts() {
        let idem = canonical("idem").unwrap();
        // idempotent k-ary operations: 2^(2^k - 2)
        assert_eq!(idem.polymorphisms_at_arity(2).unwrap().len(), 4);
        assert_eq!(idem.polymorphisms_at_arity(3).unwrap().len(), 64);
        let c2 = canonical("c2").unwrap();
        let polys = c2.polymorphisms_at_arity(3).unwrap();
        assert!(polys.contains(&op("m")));
        assert!(polys.contains(&op("d3")));
        let and3 = op("and").compose(&[op("pi1_3"), op("pi2_3")]).unwrap();
        assert!(!polys.contains(&and3));
        assert!(canonical("idem").unwrap().polymorphisms_at_arity(5).is_err());
    }

    #[test]
    fn d2sat_ternary_polymorphisms_are_the_majority_clone() {
        let s = canonical("d2sat").unwrap();
        let polys = s.polymorphisms_at_arity(3).unwrap();
        let clone = GeneratorSet::from_named(&["d3"]).unwrap().closure_at_arity(3);
        assert_eq!(polys, clone);
    }

    #[test]
    fn d3lin2_polymorphisms_contain_minority() {
        let s = canonical("d3lin2").unwrap();
        assert_eq!(s.relations().len(), 14);
        assert!(s.preserved_by(&op("m")));
        assert!(!s.preserved_by(&op("d3")));
    }

    #[test]
    fn dhornsat_likes_and() {
        let s = canonical("dhornsat").unwrap();
        assert!(s.preserved_by(&op("and")));
        assert!(!s.preserved_by(&op("or")));
    }

    #[test]
    fn json_round_trip() {
        let s = canonical("dstcon").unwrap();
        let text = s.to_json();
        let back = Structure::from_json(&text).unwrap();
        assert_eq!(s, back);
        assert!(Structure::from_json("{\"name\":\"x\",\"relations\":[{\"name\":\"r\",\"arity\":2,\"tuples\":[\"012\"]}]}").is_err());
    }

    #[test]
    fn canonical_aliases_and_errors() {
        let b2 = canonical("b2").unwrap();
        let blocker = canonical("blocker:2").unwrap();
        assert_eq!(b2.relations(), blocker.relations());
        assert!(canonical("blocker:9").is_err());
        assert!(canonical("whatever").is_err());
    }
}
