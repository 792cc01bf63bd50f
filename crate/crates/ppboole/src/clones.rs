//! Clones on `{0,1}` given by generators: fixed-arity closure, membership,
//! duals, idempotent reducts, minor-preserving map verification, and the
//! catalog of named clones the classifier works with.
//!
//! The `k`-ary part of `[G]` is the least set of `k`-ary tables containing
//! the projections and closed under superposing each generator over members.
//! Closure is a semi-naive worklist fixpoint over packed tables; symmetric
//! generators are composed over argument multisets instead of tuples. High
//! chain clones have astronomically large slices at higher arities, so the
//! fixpoint carries an explicit budget and reports whether it completed;
//! callers fall back to relational bounds (see `structures`) when it did not.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::boolfn::{self, compose_words, BoolFn, BoolFnError, IndexMap};
use crate::structures::fallback_relations;

#[derive(Debug, Error)]
pub enum CloneError {
    #[error(transparent)]
    BoolFn(#[from] BoolFnError),
    #[error("closure budget exhausted at arity {arity} ({members} members seen)")]
    BudgetExhausted { arity: usize, members: usize },
    #[error("minor map rule not applicable: {0}")]
    RuleInapplicable(String),
    #[error("cannot parse generator set `{0}`")]
    BadGeneratorSet(String),
}

/// A finite set of generators; the empty set denotes the projection clone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    name: Option<String>,
    generators: Vec<BoolFn>,
}

impl GeneratorSet {
    pub fn new(name: Option<String>, mut generators: Vec<BoolFn>) -> Self {
        generators.sort();
        generators.dedup();
        GeneratorSet { name, generators }
    }

    pub fn empty() -> Self {
        Self::new(None, Vec::new())
    }

    pub fn from_named(names: &[&str]) -> Result<Self, CloneError> {
        let gens = names
            .iter()
            .map(|n| boolfn::named(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(None, gens))
    }

    /// Parses `"d3, p"` or `"label = d3, p"`; raw `"arity:bits"` tables are
    /// accepted alongside names. The empty string is the projection clone.
    pub fn parse(text: &str) -> Result<Self, CloneError> {
        let (name, body) = match text.split_once('=') {
            Some((n, b)) => (Some(n.trim().to_string()), b),
            None => (None, text),
        };
        let body = body.trim();
        let mut gens = Vec::new();
        if !body.is_empty() {
            for part in body.split(',') {
                let part = part.trim();
                gens.push(
                    boolfn::named(part)
                        .map_err(|_| CloneError::BadGeneratorSet(text.to_string()))?,
                );
            }
        }
        Ok(Self::new(name, gens))
    }

    pub fn render(&self) -> String {
        let body = self
            .generators
            .iter()
            .map(|g| g.render())
            .collect::<Vec<_>>()
            .join(", ");
        match &self.name {
            Some(n) => format!("{n} = {body}"),
            None => body,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn generators(&self) -> &[BoolFn] {
        &self.generators
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// The generator set of the dual clone.
    pub fn dual_clone(&self) -> GeneratorSet {
        let name = self.name.as_ref().map(|n| format!("dual({n})"));
        Self::new(name, self.generators.iter().map(|g| g.dual()).collect())
    }

    /// Exact fixed-arity closure. Panics if the default budget is exhausted;
    /// use `bounded_closure` where completion is not guaranteed.
    pub fn closure_at_arity(&self, k: usize) -> CloneSlice {
        let out = self.bounded_closure(k, &ClosureBudget::default());
        assert!(
            out.complete,
            "closure of {:?} at arity {k} exceeds the default budget",
            self.render()
        );
        out.slice
    }

    /// Fixed-arity closure under an explicit budget. The returned slice is
    /// always a subset of the clone; `complete` tells whether it is all of it.
    pub fn bounded_closure(&self, k: usize, budget: &ClosureBudget) -> BoundedClosure {
        close_at_arity(&self.generators, k, budget)
    }

    /// Membership via closure, with a relational separation fallback when the
    /// slice is too large to complete: a relation preserved by every generator
    /// but not by `f` certifies non-membership. `None` means unresolved.
    pub fn try_contains(&self, f: &BoolFn, budget: &ClosureBudget) -> Option<bool> {
        let out = self.bounded_closure(f.arity(), budget);
        if out.slice.contains(f) {
            return Some(true);
        }
        if out.complete {
            return Some(false);
        }
        for rel in fallback_relations() {
            if self.generators.iter().all(|g| rel.preserved_by(g)) && !rel.preserved_by(f) {
                return Some(false);
            }
        }
        None
    }

    pub fn contains(&self, f: &BoolFn) -> bool {
        self.try_contains(f, &ClosureBudget::default())
            .unwrap_or_else(|| {
                panic!(
                    "membership of {f} in {:?} unresolved within budget",
                    self.render()
                )
            })
    }

    /// The idempotent members of the closure at arity `k`.
    pub fn idempotent_reduct_at_arity(&self, k: usize) -> CloneSlice {
        let slice = self.closure_at_arity(k);
        CloneSlice {
            arity: k,
            members: slice
                .members
                .into_iter()
                .filter(|f| f.is_idempotent())
                .collect(),
        }
    }
}

/// Limits on the closure fixpoint.
#[derive(Debug, Clone)]
pub struct ClosureBudget {
    pub max_members: usize,
    pub max_compositions: u64,
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget {
            max_members: 100_000,
            max_compositions: 50_000_000,
        }
    }
}

impl ClosureBudget {
    pub fn small() -> Self {
        ClosureBudget {
            max_members: 20_000,
            max_compositions: 4_000_000,
        }
    }
}

/// One arity level of a clone, sorted for deterministic iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneSlice {
    arity: usize,
    members: BTreeSet<BoolFn>,
}

impl CloneSlice {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &BoolFn) -> bool {
        self.members.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BoolFn> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &CloneSlice) -> bool {
        self.members.is_subset(&other.members)
    }

    pub(crate) fn from_members(arity: usize, members: BTreeSet<BoolFn>) -> Self {
        CloneSlice { arity, members }
    }
}

pub struct BoundedClosure {
    pub slice: CloneSlice,
    pub complete: bool,
    pub compositions: u64,
}

fn close_at_arity(gens: &[BoolFn], k: usize, budget: &ClosureBudget) -> BoundedClosure {
    let mut tables: Vec<Vec<u64>> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for i in 1..=k {
        let p = BoolFn::projection(i, k).expect("valid projection");
        seen.insert(p.words().to_vec(), tables.len());
        tables.push(p.words().to_vec());
    }
    let symmetric: Vec<bool> = gens.iter().map(|g| g.is_symmetric()).collect();
    let mut compositions = 0u64;
    let mut complete = true;
    let mut prev_start = 0usize;

    'outer: loop {
        let round_end = tables.len();
        for (g, &sym) in gens.iter().zip(&symmetric) {
            let n = g.arity();
            let mut idx = vec![0usize; n];
            // Enumerate argument tuples over members known at the start of
            // the round, requiring at least one index in the last frontier.
            // For symmetric generators only non-decreasing tuples are used,
            // in which case the frontier condition is on the last index.
            if round_end == 0 {
                break;
            }
            loop {
                let fresh = if sym {
                    idx[n - 1] >= prev_start
                } else {
                    idx.iter().any(|&i| i >= prev_start)
                };
                if fresh {
                    compositions += 1;
                    if compositions > budget.max_compositions {
                        complete = false;
                        break 'outer;
                    }
                    let args: Vec<&[u64]> = idx.iter().map(|&i| tables[i].as_slice()).collect();
                    let words = compose_words(g, &args, k);
                    if !seen.contains_key(&words) {
                        if tables.len() >= budget.max_members {
                            complete = false;
                            break 'outer;
                        }
                        seen.insert(words.clone(), tables.len());
                        tables.push(words);
                    }
                }
                // advance the odometer
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < round_end {
                        break;
                    }
                    if pos == 0 {
                        break;
                    }
                    idx[pos] = 0;
                }
                if idx[0] >= round_end {
                    break;
                }
                if sym {
                    // restore non-decreasing order after the carry
                    for j in 1..n {
                        if idx[j] < idx[j - 1] {
                            idx[j] = idx[j - 1];
                        }
                    }
                }
            }
        }
        if tables.len() == round_end {
            break;
        }
        prev_start = round_end;
    }

    let members: BTreeSet<BoolFn> = tables
        .into_iter()
        .map(|w| BoolFn::from_words(k, w))
        .collect();
    BoundedClosure {
        slice: CloneSlice { arity: k, members },
        complete,
        compositions,
    }
}

/// The minor-preserving map rules whose verification the library supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinorMapRule {
    /// `xi(f) = f^dual`.
    Dual,
    /// Sends every `n`-ary operation to the constant `value` of arity `n`.
    ConstantTo(bool),
    /// On the clone generated by negation: fixes projections and sends
    /// `c(pi_i)` to `pi_i`.
    NegationCollapse,
    /// `xi(f) = f` when `f` is idempotent, `c(f)` otherwise; applicable only
    /// when the source has no constant operations.
    Idempotentizer,
}

impl fmt::Display for MinorMapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinorMapRule::Dual => write!(f, "dual-map"),
            MinorMapRule::ConstantTo(b) => write!(f, "constant-map({})", *b as u8),
            MinorMapRule::NegationCollapse => write!(f, "negation-collapse"),
            MinorMapRule::Idempotentizer => write!(f, "idempotentizer"),
        }
    }
}

fn apply_rule(rule: MinorMapRule, f: &BoolFn) -> Result<BoolFn, CloneError> {
    let n = f.arity();
    match rule {
        MinorMapRule::Dual => Ok(f.dual()),
        MinorMapRule::ConstantTo(b) => {
            Ok(BoolFn::from_fn(n, |_| b).expect("arity already valid"))
        }
        MinorMapRule::NegationCollapse => {
            let c = boolfn::named("c").unwrap();
            for i in 1..=n {
                let proj = BoolFn::projection(i, n).unwrap();
                if *f == proj {
                    return Ok(proj);
                }
                if *f == c.compose(std::slice::from_ref(&proj)).unwrap() {
                    return Ok(proj);
                }
            }
            Err(CloneError::RuleInapplicable(format!(
                "{f} is neither a projection nor a negated projection"
            )))
        }
        MinorMapRule::Idempotentizer => {
            if f.is_idempotent() {
                Ok(f.clone())
            } else {
                let c = boolfn::named("c").unwrap();
                Ok(c.compose(std::slice::from_ref(f)).unwrap())
            }
        }
    }
}

fn all_index_maps(n: usize, r: usize) -> Vec<IndexMap> {
    let mut out = Vec::new();
    let count = r.pow(n as u32);
    for code in 0..count {
        let mut c = code;
        let mut image = Vec::with_capacity(n);
        for _ in 0..n {
            image.push(c % r + 1);
            c /= r;
        }
        out.push(IndexMap::new(image, r).unwrap());
    }
    out
}

/// Verifies that a rule is a minor-preserving map from `[source]` into
/// `[target]` over all arities up to `cap`: for every member `f` and index
/// map `pi`, `xi(f_pi) = xi(f)_pi`, and `xi(f)` lies in the target closure.
pub fn verify_minor_map(
    rule: MinorMapRule,
    source: &GeneratorSet,
    target: &GeneratorSet,
    cap: usize,
) -> Result<bool, CloneError> {
    let source_slices: Vec<CloneSlice> =
        (1..=cap).map(|n| source.closure_at_arity(n)).collect();
    let target_slices: Vec<CloneSlice> =
        (1..=cap).map(|n| target.closure_at_arity(n)).collect();

    if rule == MinorMapRule::Idempotentizer {
        for slice in &source_slices {
            if let Some(f) = slice.iter().find(|f| f.is_constant()) {
                return Err(CloneError::RuleInapplicable(format!(
                    "source contains the constant operation {f}"
                )));
            }
        }
    }

    for slice in &source_slices {
        for f in slice.iter() {
            let xf = apply_rule(rule, f)?;
            if !target_slices[f.arity() - 1].contains(&xf) {
                return Ok(false);
            }
            for r in 1..=cap {
                for pi in all_index_maps(f.arity(), r) {
                    let lhs = apply_rule(rule, &f.minor(&pi)?)?;
                    let rhs = xf.minor(&pi)?;
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// A named clone of the catalog together with the label of its dual.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub label: String,
    pub generators: GeneratorSet,
    pub dual_label: String,
}

fn entry(label: &str, names: &[&str], dual_label: &str) -> CatalogEntry {
    CatalogEntry {
        label: label.to_string(),
        generators: GeneratorSet::from_named(names)
            .expect("catalog names are valid")
            .with_name(label),
        dual_label: dual_label.to_string(),
    }
}

/// Chain entries `[d_i,...]` are shipped up to this index by default.
pub const DEFAULT_CHAIN_BOUND: usize = 8;

pub fn catalog() -> Vec<CatalogEntry> {
    catalog_with_bound(DEFAULT_CHAIN_BOUND)
}

/// Every clone the classifier and the lattice tests refer to by name. Chain
/// families are instantiated for `4 <= i <= bound`; duals of asymmetric
/// entries are shipped as entries of their own so that `dual_label` always
/// resolves within the catalog.
pub fn catalog_with_bound(bound: usize) -> Vec<CatalogEntry> {
    assert!((4..=boolfn::MAX_ARITY).contains(&bound));
    let mut out = vec![
        entry("[]", &[], "[]"),
        entry("[c]", &["c"], "[c]"),
        entry("[0]", &["0"], "[1]"),
        entry("[1]", &["1"], "[0]"),
        entry("[and]", &["and"], "[or]"),
        entry("[or]", &["or"], "[and]"),
        entry("[m]", &["m"], "[m]"),
        entry("[m,c]", &["m", "c"], "[m,c]"),
        entry("[d3]", &["d3"], "[d3]"),
        entry("[d3,m]", &["d3", "m"], "[d3,m]"),
        entry("[d3,c]", &["d3", "c"], "[d3,c]"),
        entry("[p]", &["p"], "[pd]"),
        entry("[pd]", &["pd"], "[p]"),
        entry("[q]", &["q"], "[qd]"),
        entry("[qd]", &["qd"], "[q]"),
        entry("[d3,p]", &["d3", "p"], "[d3,pd]"),
        entry("[d3,pd]", &["d3", "pd"], "[d3,p]"),
        entry("[d3,q]", &["d3", "q"], "[d3,qd]"),
        entry("[d3,qd]", &["d3", "qd"], "[d3,q]"),
        entry("[and,or]", &["and", "or"], "[and,or]"),
    ];
    for i in 4..=bound {
        let d = format!("d{i}");
        let dd = format!("d{i}d");
        out.push(entry(&format!("[d{i}]"), &[&d], &format!("[d{i}d]")));
        out.push(entry(&format!("[d{i}d]"), &[&dd], &format!("[d{i}]")));
        out.push(entry(
            &format!("[d{i},p]"),
            &[&d, "p"],
            &format!("[d{i}d,pd]"),
        ));
        out.push(entry(
            &format!("[d{i}d,pd]"),
            &[&dd, "pd"],
            &format!("[d{i},p]"),
        ));
        out.push(entry(
            &format!("[d{i},q]"),
            &[&d, "q"],
            &format!("[d{i}d,qd]"),
        ));
        out.push(entry(
            &format!("[d{i}d,qd]"),
            &[&dd, "qd"],
            &format!("[d{i},q]"),
        ));
    }
    out.push(entry("[or,q]", &["or", "q"], "[and,qd]"));
    out.push(entry("[and,qd]", &["and", "qd"], "[or,q]"));
    out.push(entry("[m,q]", &["m", "q"], "[m,q]"));
    out
}

pub fn catalog_entry(label: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.label == label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::named;

    fn gens(names: &[&str]) -> GeneratorSet {
        GeneratorSet::from_named(names).unwrap()
    }

    #[test]
    fn projection_clone_slices() {
        let empty = GeneratorSet::empty();
        let s = empty.closure_at_arity(2);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&named("pi1_2").unwrap()));
        assert!(s.contains(&named("pi2_2").unwrap()));
        assert!(empty.contains(&named("pi1_3").unwrap()));
    }

    #[test]
    fn negation_clone_unary() {
        let s = gens(&["c"]).closure_at_arity(1);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&named("id").unwrap()));
        assert!(s.contains(&named("c").unwrap()));
    }

    #[test]
    fn conjunction_clone_binary() {
        let s = gens(&["and"]).closure_at_arity(2);
        assert_eq!(s.len(), 3);
        assert!(s.contains(&named("and").unwrap()));
    }

    #[test]
    fn membership_examples() {
        // [d3,p] contains "and" via p(x,y,y)
        assert!(gens(&["d3", "p"]).contains(&named("and").unwrap()));
        // [m] does not contain the majority operation
        assert!(!gens(&["m"]).contains(&named("d3").unwrap()));
    }

    #[test]
    fn dual_clone_examples() {
        assert_eq!(gens(&["and"]).dual_clone(), gens(&["or"]));
        assert_eq!(gens(&["m"]).dual_clone(), gens(&["m"]));
        assert_eq!(gens(&["p"]).dual_clone(), gens(&["pd"]));
    }

    #[test]
    fn idempotent_reduct_examples() {
        // [m,c]^id = [m] at arity 3
        let lhs = gens(&["m", "c"]).idempotent_reduct_at_arity(3);
        let rhs = gens(&["m"]).closure_at_arity(3);
        assert_eq!(lhs, rhs);
        // [d3,c]^id = [d3,m] at arity 3
        let lhs = gens(&["d3", "c"]).idempotent_reduct_at_arity(3);
        let rhs = gens(&["d3", "m"]).closure_at_arity(3);
        assert_eq!(lhs, rhs);
        // projections are all idempotent
        let s = GeneratorSet::empty().idempotent_reduct_at_arity(2);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn minor_map_rules() {
        assert!(verify_minor_map(MinorMapRule::Dual, &gens(&["and"]), &gens(&["or"]), 3).unwrap());
        assert!(verify_minor_map(
            MinorMapRule::ConstantTo(false),
            &gens(&["or", "q"]),
            &gens(&["0"]),
            3
        )
        .unwrap());
        assert!(verify_minor_map(
            MinorMapRule::NegationCollapse,
            &gens(&["c"]),
            &GeneratorSet::empty(),
            3
        )
        .unwrap());
        assert!(verify_minor_map(
            MinorMapRule::Idempotentizer,
            &gens(&["m", "c"]),
            &gens(&["m"]),
            3
        )
        .unwrap());
        // idempotentizer refuses sources with constants
        assert!(matches!(
            verify_minor_map(MinorMapRule::Idempotentizer, &gens(&["0"]), &gens(&["0"]), 2),
            Err(CloneError::RuleInapplicable(_))
        ));
    }

    #[test]
    fn catalog_well_formed() {
        let cat = catalog();
        // compute each entry's ternary slice once; the dual clone's slice is
        // the elementwise dual of it
        let slices: HashMap<&str, CloneSlice> = cat
            .iter()
            .map(|e| (e.label.as_str(), e.generators.closure_at_arity(3)))
            .collect();
        for e in &cat {
            let dual = slices
                .get(e.dual_label.as_str())
                .unwrap_or_else(|| panic!("dual label {} missing", e.dual_label));
            let dualized = CloneSlice::from_members(
                3,
                slices[e.label.as_str()].iter().map(|f| f.dual()).collect(),
            );
            assert_eq!(&dualized, dual, "dual of {} vs {}", e.label, e.dual_label);
        }
        assert_eq!(
            catalog_entry("[]").unwrap().generators.generators().len(),
            0
        );
        assert_eq!(catalog_entry("[and]").unwrap().dual_label, "[or]");
        assert_eq!(catalog_entry("[d3,m]").unwrap().dual_label, "[d3,m]");
    }

    #[test]
    fn monotone_closure_and_projection_containment() {
        let extra = named("xor").unwrap();
        for e in catalog_with_bound(4) {
            let k = 3;
            let base = e.generators.closure_at_arity(k);
            for i in 1..=k {
                assert!(base.contains(&BoolFn::projection(i, k).unwrap()));
            }
            let mut gens = e.generators.generators().to_vec();
            gens.push(extra.clone());
            let bigger = GeneratorSet::new(None, gens).closure_at_arity(k);
            assert!(base.is_subset(&bigger), "monotonicity for {}", e.label);
        }
    }

    #[test]
    fn generator_set_text_format() {
        let g = GeneratorSet::parse("[d3,p] = d3, p").unwrap();
        assert_eq!(g.name(), Some("[d3,p]"));
        assert_eq!(g.generators().len(), 2);
        let raw = GeneratorSet::parse("3:00010111").unwrap();
        assert_eq!(raw.generators()[0], named("d3").unwrap());
        assert_eq!(GeneratorSet::parse("").unwrap().generators().len(), 0);
        assert!(GeneratorSet::parse("nonsense").is_err());
    }
}
