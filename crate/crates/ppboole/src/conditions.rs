//! Height-1 conditions: finite systems of identities of the form
//! `f(x_{pi(1)},..,x_{pi(n)}) = g(x_{sigma(1)},..,x_{sigma(m)})` over named
//! function symbols, a small text DSL for them, the built-in families, and
//! satisfaction tests against generated clones and polymorphism clones.
//!
//! Structure-side satisfaction compiles the identities into equivalence
//! classes of table cells and backtracks jointly over all symbols' tables,
//! pruning on relation preservation. Clone-side satisfaction searches the
//! (possibly budget-truncated) closure slices for a witness; refutations come
//! either from a complete closure or from a relational bound: identities
//! unsatisfiable over the polymorphisms of relations that every generator
//! preserves are unsatisfiable in the generated clone.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::boolfn::{BoolFn, IndexMap, MAX_ARITY};
use crate::clones::{BoundedClosure, ClosureBudget, GeneratorSet};
use crate::structures::{fallback_relations, Relation, Structure};

#[derive(Debug, Error)]
pub enum ConditionError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("nested term `{0}`: height-1 identities apply a symbol to variables only")]
    Nesting(String),
    #[error("bare variable side `{0}`: height-1 identities are forbidden to equate a term with a variable")]
    BareVariable(String),
    #[error("symbol `{0}` used with arities {1} and {2}")]
    InconsistentArity(String, usize, usize),
    #[error("symbol arity {0} out of range 1..={MAX_ARITY}")]
    BadArity(usize),
    #[error("invalid parameter for builtin `{0}`")]
    BadParameter(String),
    #[error("unknown builtin condition `{0}`")]
    UnknownBuiltin(String),
}

/// One side of an identity: a symbol applied to variables along an index map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub symbol: usize,
    pub map: IndexMap,
}

/// A single height-1 identity; both sides share the map's target arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

/// A finite set of height-1 identities over named symbols.
#[derive(Debug, Clone)]
pub struct H1Condition {
    name: Option<String>,
    symbols: Vec<(String, usize)>,
    identities: Vec<Identity>,
}

impl PartialEq for H1Condition {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.identities == other.identities
    }
}
impl Eq for H1Condition {}

const VAR_NAMES: [&str; 8] = ["x", "y", "z", "u", "v", "w", "s", "t"];

fn var_name(i: usize) -> String {
    VAR_NAMES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("v{}", i + 1))
}

/// Renumbers the identity's variables by first occurrence (left side first)
/// and drops unused ones, so that structurally equal identities compare equal
/// and rendering round-trips.
fn normalize_identity(lhs: Term, rhs: Term) -> Identity {
    let mut order: Vec<usize> = Vec::new();
    for &v in lhs.map.image().iter().chain(rhs.map.image()) {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let remap = |t: &Term| {
        let image = t
            .map
            .image()
            .iter()
            .map(|v| order.iter().position(|o| o == v).unwrap() + 1)
            .collect();
        Term {
            symbol: t.symbol,
            map: IndexMap::new(image, order.len()).expect("arity bounded by original"),
        }
    };
    Identity {
        lhs: remap(&lhs),
        rhs: remap(&rhs),
    }
}

impl H1Condition {
    pub fn new(
        name: Option<String>,
        symbols: Vec<(String, usize)>,
        identities: Vec<(Term, Term)>,
    ) -> Result<Self, ConditionError> {
        for &(_, arity) in &symbols {
            if arity == 0 || arity > MAX_ARITY {
                return Err(ConditionError::BadArity(arity));
            }
        }
        let identities = identities
            .into_iter()
            .map(|(l, r)| normalize_identity(l, r))
            .collect();
        Ok(H1Condition {
            name,
            symbols,
            identities,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn identities(&self) -> &[Identity] {
        &self.identities
    }

    fn term_text(&self, t: &Term) -> String {
        let args: Vec<String> = t
            .map
            .image()
            .iter()
            .map(|&v| var_name(v - 1))
            .collect();
        format!("{}({})", self.symbols[t.symbol].0, args.join(","))
    }

    pub fn render(&self) -> String {
        self.identities
            .iter()
            .map(|id| format!("{} = {}", self.term_text(&id.lhs), self.term_text(&id.rhs)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for H1Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}", self.render().replace('\n', "; ")),
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_ascii_alphabetic()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the identity DSL: one chain of equated terms per line, e.g.
/// `f(x,y,y) = f(y,x,y) = f(x,x,x)`. Symbol arities are inferred and must be
/// used consistently; nesting and bare-variable sides are rejected.
pub fn parse_condition(text: &str) -> Result<H1Condition, ConditionError> {
    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut identities: Vec<(Term, Term)> = Vec::new();
    for line in text.split(['\n', ';']) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('=').map(str::trim).collect();
        if parts.len() < 2 {
            return Err(ConditionError::Syntax(format!(
                "`{line}` is not an identity"
            )));
        }
        // variables are numbered by first occurrence across the whole line
        let mut vars: Vec<String> = Vec::new();
        let mut raw_terms: Vec<(usize, Vec<usize>)> = Vec::new();
        for part in &parts {
            let open = match part.find('(') {
                Some(i) => i,
                None => return Err(ConditionError::BareVariable(part.to_string())),
            };
            let name = part[..open].trim();
            if !is_ident(name) {
                return Err(ConditionError::Syntax(format!("bad symbol in `{part}`")));
            }
            let rest = &part[open + 1..];
            let close = rest
                .rfind(')')
                .ok_or_else(|| ConditionError::Syntax(format!("missing `)` in `{part}`")))?;
            if !rest[close + 1..].trim().is_empty() {
                return Err(ConditionError::Syntax(format!(
                    "trailing input in `{part}`"
                )));
            }
            let mut args = Vec::new();
            for arg in rest[..close].split(',') {
                let arg = arg.trim();
                if arg.contains('(') || arg.contains(')') {
                    return Err(ConditionError::Nesting(part.to_string()));
                }
                if !is_ident(arg) {
                    return Err(ConditionError::Syntax(format!(
                        "bad variable `{arg}` in `{part}`"
                    )));
                }
                let v = match vars.iter().position(|w| w == arg) {
                    Some(i) => i,
                    None => {
                        vars.push(arg.to_string());
                        vars.len() - 1
                    }
                };
                args.push(v + 1);
            }
            let arity = args.len();
            let sym = match symbols.iter().position(|(n, _)| n == name) {
                Some(i) => {
                    if symbols[i].1 != arity {
                        return Err(ConditionError::InconsistentArity(
                            name.to_string(),
                            symbols[i].1,
                            arity,
                        ));
                    }
                    i
                }
                None => {
                    if arity == 0 || arity > MAX_ARITY {
                        return Err(ConditionError::BadArity(arity));
                    }
                    symbols.push((name.to_string(), arity));
                    symbols.len() - 1
                }
            };
            raw_terms.push((sym, args));
        }
        let r = vars.len();
        if r > MAX_ARITY {
            return Err(ConditionError::BadArity(r));
        }
        let terms: Vec<Term> = raw_terms
            .into_iter()
            .map(|(symbol, image)| Term {
                symbol,
                map: IndexMap::new(image, r).expect("bounded by line variables"),
            })
            .collect();
        for pair in terms.windows(2) {
            identities.push((pair[0].clone(), pair[1].clone()));
        }
    }
    if identities.is_empty() {
        return Err(ConditionError::Syntax("no identities given".into()));
    }
    H1Condition::new(None, symbols, identities)
}

fn single_symbol(
    name: &str,
    symbol: &str,
    arity: usize,
    images: Vec<(Vec<usize>, Vec<usize>)>,
) -> H1Condition {
    let r_of = |img: &[usize]| img.iter().copied().max().unwrap();
    let identities = images
        .into_iter()
        .map(|(l, r)| {
            let tgt = r_of(&l).max(r_of(&r));
            (
                Term {
                    symbol: 0,
                    map: IndexMap::new(l, tgt).unwrap(),
                },
                Term {
                    symbol: 0,
                    map: IndexMap::new(r, tgt).unwrap(),
                },
            )
        })
        .collect();
    H1Condition::new(
        Some(name.to_string()),
        vec![(symbol.to_string(), arity)],
        identities,
    )
    .expect("builtin is well-formed")
}

/// QNU(k): `f(x,..,x,y) = f(x,..,y,x) = .. = f(y,x,..,x) = f(x,..,x)`.
pub fn qnu(k: usize) -> Result<H1Condition, ConditionError> {
    if !(3..=MAX_ARITY).contains(&k) {
        return Err(ConditionError::BadParameter(format!("qnu:{k}")));
    }
    let one_y = |pos: usize| -> Vec<usize> {
        (1..=k).map(|j| if j == pos { 2 } else { 1 }).collect()
    };
    let mut images = Vec::new();
    for pos in (2..=k).rev() {
        images.push((one_y(pos), one_y(pos - 1)));
    }
    images.push((one_y(1), vec![1; k]));
    Ok(single_symbol(&format!("qnu:{k}"), "f", k, images))
}

/// Quasi majority is QNU(3).
pub fn quasi_majority() -> H1Condition {
    qnu(3).unwrap()
}

/// `f(x,y,y) = f(y,x,y) = f(y,y,x) = f(x,x,x)`.
pub fn quasi_minority() -> H1Condition {
    single_symbol(
        "qminor",
        "f",
        3,
        vec![
            (vec![1, 2, 2], vec![2, 1, 2]),
            (vec![2, 1, 2], vec![2, 2, 1]),
            (vec![2, 2, 1], vec![1, 1, 1]),
        ],
    )
}

/// `f(x,y) = f(y,x)`.
pub fn comm() -> H1Condition {
    single_symbol("comm", "f", 2, vec![(vec![1, 2], vec![2, 1])])
}

/// `f(x) = f(y)`.
pub fn constancy() -> H1Condition {
    single_symbol("const", "f", 1, vec![(vec![1], vec![2])])
}

fn chain_condition(
    name: &str,
    prefix: &str,
    n: usize,
    identities: Vec<(usize, Vec<usize>, usize, Vec<usize>)>,
) -> H1Condition {
    let symbols: Vec<(String, usize)> = (0..=n).map(|i| (format!("{prefix}{i}"), 3)).collect();
    let ids = identities
        .into_iter()
        .map(|(ls, li, rs, ri)| {
            let tgt = li.iter().chain(&ri).copied().max().unwrap();
            (
                Term {
                    symbol: ls,
                    map: IndexMap::new(li, tgt).unwrap(),
                },
                Term {
                    symbol: rs,
                    map: IndexMap::new(ri, tgt).unwrap(),
                },
            )
        })
        .collect();
    H1Condition::new(Some(name.to_string()), symbols, ids).expect("builtin is well-formed")
}

/// QJ(n): ternary symbols `t0..tn` with
/// `t0(x,y,z) = t0(x,x,x)`, `tn(x,y,z) = tn(z,z,z)`, `ti(x,y,x) = ti(x,x,x)`
/// for all i, and `ti(x,x,z) = t_{i+1}(x,x,z)` for even i,
/// `ti(x,z,z) = t_{i+1}(x,z,z)` for odd i.
pub fn qj(n: usize) -> Result<H1Condition, ConditionError> {
    if n == 0 {
        return Err(ConditionError::BadParameter(format!("qj:{n}")));
    }
    let mut ids = vec![(0, vec![1, 2, 3], 0, vec![1, 1, 1])];
    for i in 0..=n {
        ids.push((i, vec![1, 2, 1], i, vec![1, 1, 1]));
    }
    ids.push((n, vec![1, 2, 3], n, vec![3, 3, 3]));
    for i in 0..n {
        if i % 2 == 0 {
            ids.push((i, vec![1, 1, 2], i + 1, vec![1, 1, 2]));
        } else {
            ids.push((i, vec![1, 2, 2], i + 1, vec![1, 2, 2]));
        }
    }
    Ok(chain_condition(&format!("qj:{n}"), "t", n, ids))
}

/// HM(n): ternary symbols `p0..pn` with `p0(x,y,z) = p0(x,x,x)`,
/// `pn(x,y,z) = pn(z,z,z)`, and `pi(x,x,y) = p_{i+1}(x,y,y)`.
pub fn hm(n: usize) -> Result<H1Condition, ConditionError> {
    if n == 0 {
        return Err(ConditionError::BadParameter(format!("hm:{n}")));
    }
    let mut ids = vec![
        (0, vec![1, 2, 3], 0, vec![1, 1, 1]),
        (n, vec![1, 2, 3], n, vec![3, 3, 3]),
    ];
    for i in 0..n {
        ids.push((i, vec![1, 1, 2], i + 1, vec![1, 2, 2]));
    }
    Ok(chain_condition(&format!("hm:{n}"), "p", n, ids))
}

/// Resolves a condition by its command-line name: `qnu:K`, `qj:N`, `hm:N`,
/// `comm`, `const`, `qminor`, `qmajor`.
pub fn builtin(name: &str) -> Result<H1Condition, ConditionError> {
    let n = name.trim();
    if let Some(k) = n.strip_prefix("qnu:") {
        let k = k
            .parse()
            .map_err(|_| ConditionError::BadParameter(n.to_string()))?;
        return qnu(k);
    }
    if let Some(k) = n.strip_prefix("qj:") {
        let k = k
            .parse()
            .map_err(|_| ConditionError::BadParameter(n.to_string()))?;
        return qj(k);
    }
    if let Some(k) = n.strip_prefix("hm:") {
        let k = k
            .parse()
            .map_err(|_| ConditionError::BadParameter(n.to_string()))?;
        return hm(k);
    }
    match n {
        "comm" => Ok(comm()),
        "const" => Ok(constancy()),
        "qminor" => Ok(quasi_minority()),
        "qmajor" => Ok(quasi_majority()),
        _ => Err(ConditionError::UnknownBuiltin(n.to_string())),
    }
}

/// An assignment of a concrete table to each symbol, in declaration order.
pub type Witness = Vec<(String, BoolFn)>;

/// Checks that an assignment makes every identity a true table equality.
pub fn verify_witness(cond: &H1Condition, tables: &[BoolFn]) -> bool {
    if tables.len() != cond.symbols.len() {
        return false;
    }
    for (i, (_, arity)) in cond.symbols.iter().enumerate() {
        if tables[i].arity() != *arity {
            return false;
        }
    }
    cond.identities.iter().all(|id| {
        tables[id.lhs.symbol].minor(&id.lhs.map).unwrap()
            == tables[id.rhs.symbol].minor(&id.rhs.map).unwrap()
    })
}

fn make_witness(cond: &H1Condition, tables: Vec<BoolFn>) -> Witness {
    cond.symbols
        .iter()
        .map(|(n, _)| n.clone())
        .zip(tables)
        .collect()
}

// ---------------------------------------------------------------------------
// Joint backtracking over table cells against a relation set.

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            // keep the smaller cell id as representative
            let (lo, hi) = (a.min(b), a.max(b));
            self.0[hi] = lo;
        }
    }
}

enum JointOutcome {
    Sat(Vec<BoolFn>, u64),
    Unsat(u64),
    Capped,
}

/// Searches for tables satisfying the identities while preserving all given
/// relations. Identities are compiled to cell equivalence classes; the search
/// assigns one class at a time, pruning via violation checks on the decided
/// cells. `largest_first` reorders classes by size (used for refutations,
/// where the glued classes carry the contradiction); otherwise classes are
/// taken in cell-index order, which makes the first witness deterministic.
fn joint_search(
    relations: &[Relation],
    cond: &H1Condition,
    largest_first: bool,
    node_cap: u64,
) -> JointOutcome {
    let arities: Vec<usize> = cond.symbols.iter().map(|&(_, a)| a).collect();
    let offsets: Vec<usize> = arities
        .iter()
        .scan(0usize, |acc, &a| {
            let o = *acc;
            *acc += 1 << a;
            Some(o)
        })
        .collect();
    let total: usize = arities.iter().map(|&a| 1usize << a).sum();

    let mut uf = UnionFind::new(total);
    for id in &cond.identities {
        let r = id.lhs.map.target_arity();
        for y in 0..1usize << r {
            let cell_of = |t: &Term| -> usize {
                let n = arities[t.symbol];
                let mut idx = 0usize;
                for (j, &v) in t.map.image().iter().enumerate() {
                    let bit = y >> (r - v) & 1;
                    idx |= bit << (n - 1 - j);
                }
                offsets[t.symbol] + idx
            };
            uf.union(cell_of(&id.lhs), cell_of(&id.rhs));
        }
    }

    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for cell in 0..total {
        classes.entry(uf.find(cell)).or_default().push(cell);
    }
    let mut order: Vec<Vec<usize>> = classes.into_values().collect();
    if largest_first {
        order.sort_by_key(|c| (usize::MAX - c.len(), c[0]));
    } else {
        order.sort_by_key(|c| c[0]);
    }
    // symbols touched by each class, for targeted violation checks
    let symbol_of = |cell: usize| offsets.iter().rposition(|&o| o <= cell).unwrap();
    let touched: Vec<Vec<usize>> = order
        .iter()
        .map(|cells| {
            let mut syms: Vec<usize> = cells.iter().map(|&c| symbol_of(c)).collect();
            syms.sort_unstable();
            syms.dedup();
            syms
        })
        .collect();

    let mut assign: Vec<Option<bool>> = vec![None; total];
    let mut nodes = 0u64;
    let mut depth = 0usize;
    let mut choice: Vec<u8> = vec![0; order.len()];

    loop {
        if depth == order.len() {
            let tables = arities
                .iter()
                .enumerate()
                .map(|(s, &a)| {
                    BoolFn::from_fn(a, |x| {
                        let mut idx = 0usize;
                        for (j, &b) in x.iter().enumerate() {
                            if b {
                                idx |= 1 << (a - 1 - j);
                            }
                        }
                        assign[offsets[s] + idx].unwrap()
                    })
                    .expect("valid arity")
                })
                .collect();
            return JointOutcome::Sat(tables, nodes);
        }
        let val = match choice[depth] {
            0 => false,
            1 => true,
            _ => {
                // both values exhausted at this depth: backtrack
                choice[depth] = 0;
                if depth == 0 {
                    return JointOutcome::Unsat(nodes);
                }
                depth -= 1;
                for &c in &order[depth] {
                    assign[c] = None;
                }
                continue;
            }
        };
        choice[depth] += 1;
        nodes += 1;
        if nodes > node_cap {
            return JointOutcome::Capped;
        }
        for &c in &order[depth] {
            assign[c] = Some(val);
        }
        let violated = touched[depth].iter().any(|&s| {
            relations.iter().any(|rel| {
                rel.violated_by(arities[s], |cell| assign[offsets[s] + cell])
            })
        });
        if violated {
            for &c in &order[depth] {
                assign[c] = None;
            }
            continue;
        }
        depth += 1;
    }
}

/// The outcome of a structure-side satisfaction test; refutations are
/// exhaustive and carry the number of search nodes explored.
#[derive(Debug, Clone)]
pub enum StructSat {
    Witness { assignment: Witness, nodes: u64 },
    Refuted { nodes: u64 },
}

impl StructSat {
    pub fn is_sat(&self) -> bool {
        matches!(self, StructSat::Witness { .. })
    }
}

/// Decides whether the polymorphism clone of `a` satisfies the condition.
pub fn satisfies_structure(a: &Structure, cond: &H1Condition) -> StructSat {
    satisfies_pol(a.relations(), cond)
}

/// As `satisfies_structure` over an explicit relation list.
pub fn satisfies_pol(relations: &[Relation], cond: &H1Condition) -> StructSat {
    match joint_search(relations, cond, false, u64::MAX) {
        JointOutcome::Sat(tables, nodes) => StructSat::Witness {
            assignment: make_witness(cond, tables),
            nodes,
        },
        JointOutcome::Unsat(nodes) => StructSat::Refuted { nodes },
        JointOutcome::Capped => unreachable!("search is uncapped"),
    }
}

/// The outcome of a clone-side satisfaction test. `Unresolved` can only
/// arise for inputs whose closure slices exceed the budget and which the
/// relational bound cannot decide either.
#[derive(Debug, Clone)]
pub enum CloneSat {
    Witness { assignment: Witness, nodes: u64 },
    Refuted { nodes: u64 },
    Unresolved,
}

impl CloneSat {
    pub fn is_sat(&self) -> bool {
        matches!(self, CloneSat::Witness { .. })
    }
    pub fn decided(&self) -> Option<bool> {
        match self {
            CloneSat::Witness { .. } => Some(true),
            CloneSat::Refuted { .. } => Some(false),
            CloneSat::Unresolved => None,
        }
    }
}

const FALLBACK_NODE_CAP: u64 = 200_000;

/// Clone-side satisfaction with closure caching across queries; use one
/// solver per generator set when evaluating several conditions.
pub struct CloneSolver {
    gens: GeneratorSet,
    small: HashMap<usize, BoundedClosure>,
    big: HashMap<usize, BoundedClosure>,
    preserved: Option<Vec<Relation>>,
}

impl CloneSolver {
    pub fn new(gens: GeneratorSet) -> Self {
        CloneSolver {
            gens,
            small: HashMap::new(),
            big: HashMap::new(),
            preserved: None,
        }
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    fn slice(&mut self, arity: usize, big: bool) -> &BoundedClosure {
        let budget = if big {
            ClosureBudget::default()
        } else {
            ClosureBudget::small()
        };
        let gens = &self.gens;
        let cache = if big { &mut self.big } else { &mut self.small };
        cache
            .entry(arity)
            .or_insert_with(|| gens.bounded_closure(arity, &budget))
    }

    fn preserved_relations(&mut self) -> &[Relation] {
        if self.preserved.is_none() {
            let gens = self.gens.generators();
            self.preserved = Some(
                fallback_relations()
                    .into_iter()
                    .filter(|r| gens.iter().all(|g| r.preserved_by(g)))
                    .collect(),
            );
        }
        self.preserved.as_ref().unwrap()
    }

    /// Searches the closure slices for a witness; a refutation is reported
    /// when either every slice is complete (exhaustive search) or the
    /// identities are already unsatisfiable over the polymorphisms of
    /// relations preserved by all generators, which bound the clone above.
    pub fn satisfies(&mut self, cond: &H1Condition) -> CloneSat {
        for big in [false, true] {
            let mut complete = true;
            for &(_, arity) in cond.symbols() {
                complete &= self.slice(arity, big).complete;
            }
            let slices: Vec<&BoundedClosure> = cond
                .symbols()
                .iter()
                .map(|&(_, arity)| if big { &self.big[&arity] } else { &self.small[&arity] })
                .collect();
            let (found, nodes) = witness_search(cond, &slices);
            if let Some(tables) = found {
                return CloneSat::Witness {
                    assignment: make_witness(cond, tables),
                    nodes,
                };
            }
            if complete {
                return CloneSat::Refuted { nodes };
            }
            if !big {
                let relations: Vec<Relation> = self.preserved_relations().to_vec();
                if let JointOutcome::Unsat(nodes) =
                    joint_search(&relations, cond, true, FALLBACK_NODE_CAP)
                {
                    return CloneSat::Refuted { nodes };
                }
            }
        }
        CloneSat::Unresolved
    }
}

/// One-shot clone-side satisfaction test.
pub fn satisfies_clone(gens: &GeneratorSet, cond: &H1Condition) -> CloneSat {
    CloneSolver::new(gens.clone()).satisfies(cond)
}

/// Backtracking over symbol assignments drawn from closure slices, in
/// declaration order, candidates in table order; identities are checked as
/// soon as both their symbols are assigned. Sound even on truncated slices:
/// a witness found is a witness; absence proves nothing by itself.
fn witness_search(
    cond: &H1Condition,
    slices: &[&BoundedClosure],
) -> (Option<Vec<BoolFn>>, u64) {
    let sym_count = cond.symbols().len();
    // candidate lists filtered by single-symbol identities
    let candidates: Vec<Vec<&BoolFn>> = (0..sym_count)
        .map(|s| {
            slices[s]
                .slice
                .iter()
                .filter(|f| {
                    cond.identities().iter().all(|id| {
                        if id.lhs.symbol != s || id.rhs.symbol != s {
                            return true;
                        }
                        f.minor(&id.lhs.map).unwrap() == f.minor(&id.rhs.map).unwrap()
                    })
                })
                .collect()
        })
        .collect();
    let mut chosen: Vec<&BoolFn> = Vec::with_capacity(sym_count);
    let mut nodes = 0u64;
    let found = dfs_witness(cond, &candidates, &mut chosen, &mut nodes);
    (found, nodes)
}

fn dfs_witness<'a>(
    cond: &H1Condition,
    candidates: &[Vec<&'a BoolFn>],
    chosen: &mut Vec<&'a BoolFn>,
    nodes: &mut u64,
) -> Option<Vec<BoolFn>> {
    let s = chosen.len();
    if s == candidates.len() {
        return Some(chosen.iter().map(|f| (*f).clone()).collect());
    }
    'next: for f in &candidates[s] {
        *nodes += 1;
        for id in cond.identities() {
            let (ls, rs) = (id.lhs.symbol, id.rhs.symbol);
            if ls == rs || ls.max(rs) != s || ls.min(rs) > s {
                continue;
            }
            let table_of = |sym: usize| if sym == s { *f } else { chosen[sym] };
            if table_of(ls).minor(&id.lhs.map).unwrap()
                != table_of(rs).minor(&id.rhs.map).unwrap()
            {
                continue 'next;
            }
        }
        chosen.push(f);
        if let Some(w) = dfs_witness(cond, candidates, chosen, nodes) {
            return Some(w);
        }
        chosen.pop();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::named;
    use crate::structures::canonical;

    fn gens(names: &[&str]) -> GeneratorSet {
        GeneratorSet::from_named(names).unwrap()
    }

    #[test]
    fn parse_and_render_round_trip() {
        for text in [
            "f(x,y) = f(y,x)",
            "f(x) = f(y)",
            "f(x,y,y) = f(y,x,y) = f(y,y,x) = f(x,x,x)",
            "f(x,x,y) = g(y,x)",
        ] {
            let c = parse_condition(text).unwrap();
            let again = parse_condition(&c.render()).unwrap();
            assert_eq!(c, again, "round trip of `{text}`");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_condition("f(x,y) = y"),
            Err(ConditionError::BareVariable(_))
        ));
        assert!(matches!(
            parse_condition("f(g(x),y) = f(x,y)"),
            Err(ConditionError::Nesting(_))
        ));
        assert!(matches!(
            parse_condition("f(x,y) = g(y)\ng(x,x) = f(x,x)"),
            Err(ConditionError::InconsistentArity(..))
        ));
        assert!(parse_condition("").is_err());
        assert!(parse_condition("f(x,y)").is_err());
    }

    #[test]
    fn parsed_comm_equals_builtin() {
        assert_eq!(parse_condition("f(x,y) = f(y,x)").unwrap(), comm());
        assert_eq!(parse_condition("f(x) = f(y)").unwrap(), constancy());
    }

    #[test]
    fn builtin_shapes() {
        let q3 = qnu(3).unwrap();
        assert_eq!(q3.symbols().len(), 1);
        assert_eq!(q3.identities().len(), 3);
        // variables are renamed by first occurrence within each identity
        assert_eq!(
            q3.render(),
            "f(x,x,y) = f(x,y,x)\nf(x,y,x) = f(y,x,x)\nf(x,y,y) = f(y,y,y)"
        );
        assert_eq!(hm(3).unwrap().symbols().len(), 4);
        assert_eq!(qj(4).unwrap().symbols().len(), 5);
        assert!(qnu(2).is_err());
        assert!(qj(0).is_err());
        assert_eq!(builtin("qnu:4").unwrap().symbols()[0].1, 4);
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn witness_verification() {
        let d3 = named("d3").unwrap();
        assert!(verify_witness(&quasi_majority(), &[d3.clone()]));
        assert!(!verify_witness(&quasi_majority(), &[named("m").unwrap()]));
        assert!(verify_witness(&quasi_minority(), &[named("m").unwrap()]));
    }

    #[test]
    fn paper_style_hm3_assignment_in_q() {
        // p0 = q(x,x,x), p1 = q(x,y,z), p2 = q(z,x,y), p3 = q(z,z,z)
        let q = named("q").unwrap();
        let minor = |img: Vec<usize>| q.minor(&IndexMap::new(img, 3).unwrap()).unwrap();
        let tables = [
            minor(vec![1, 1, 1]),
            minor(vec![1, 2, 3]),
            minor(vec![3, 1, 2]),
            minor(vec![3, 3, 3]),
        ];
        assert!(verify_witness(&hm(3).unwrap(), &tables));
        // and the solver finds some witness in [q]
        let sat = satisfies_clone(&gens(&["q"]), &hm(3).unwrap());
        assert!(sat.is_sat());
        if let CloneSat::Witness { assignment, .. } = sat {
            let tabs: Vec<BoolFn> = assignment.into_iter().map(|(_, f)| f).collect();
            assert!(verify_witness(&hm(3).unwrap(), &tabs));
        }
    }

    #[test]
    fn qj4_in_p_but_not_in_meet() {
        // t0 = p(x,x,x), t1 = p(x,y,z), t2 = p(x,z,z), t3 = p(z,x,y), t4 = p(z,z,z)
        let p = named("p").unwrap();
        let minor = |img: Vec<usize>| p.minor(&IndexMap::new(img, 3).unwrap()).unwrap();
        let tables = [
            minor(vec![1, 1, 1]),
            minor(vec![1, 2, 3]),
            minor(vec![1, 3, 3]),
            minor(vec![3, 1, 2]),
            minor(vec![3, 3, 3]),
        ];
        assert!(verify_witness(&qj(4).unwrap(), &tables));
        assert!(satisfies_clone(&gens(&["p"]), &qj(4).unwrap()).is_sat());
        let refuted = satisfies_clone(&gens(&["and"]), &qj(4).unwrap());
        assert!(matches!(refuted, CloneSat::Refuted { .. }));
    }

    #[test]
    fn structure_side_qnu_chain() {
        let sat = satisfies_structure(&canonical("blocker:2").unwrap(), &quasi_majority());
        match sat {
            StructSat::Witness { assignment, .. } => {
                let tabs: Vec<BoolFn> = assignment.into_iter().map(|(_, f)| f).collect();
                assert!(verify_witness(&quasi_majority(), &tabs));
            }
            _ => panic!("expected a witness"),
        }
        let unsat = satisfies_structure(&canonical("blocker:3").unwrap(), &quasi_majority());
        assert!(matches!(unsat, StructSat::Refuted { .. }));
        let hm_unsat = satisfies_structure(&canonical("blocker_leq:2").unwrap(), &hm(3).unwrap());
        assert!(matches!(hm_unsat, StructSat::Refuted { .. }));
    }

    #[test]
    fn clone_side_fallback_refutes_high_qnu() {
        let mut solver = CloneSolver::new(gens(&["q"]));
        for k in 4..=6 {
            let sat = solver.satisfies(&qnu(k).unwrap());
            assert!(matches!(sat, CloneSat::Refuted { .. }), "qnu:{k} in [q]");
        }
        // the chain clone regains QNU exactly at its index
        let mut solver = CloneSolver::new(gens(&["d5", "q"]));
        assert!(matches!(
            solver.satisfies(&qnu(4).unwrap()),
            CloneSat::Refuted { .. }
        ));
        assert!(solver.satisfies(&qnu(5).unwrap()).is_sat());
        assert!(solver.satisfies(&qnu(6).unwrap()).is_sat());
    }

    #[test]
    fn duality_invariance() {
        for names in [vec!["p"], vec!["d4", "q"], vec!["and"]] {
            let g = gens(&names);
            let d = g.dual_clone();
            for cond in [quasi_majority(), quasi_minority(), comm(), hm(3).unwrap()] {
                let a = satisfies_clone(&g, &cond).decided();
                let b = satisfies_clone(&d, &cond).decided();
                assert_eq!(a, b, "{names:?} vs dual on {:?}", cond.name());
            }
        }
    }

    #[test]
    fn structure_and_clone_agree_on_canonical_pairs() {
        let pairs = [
            ("d2sat", vec!["d3"]),
            ("d3lin2", vec!["m"]),
            ("c2", vec!["d3", "m"]),
            ("idem", vec!["m", "q"]),
        ];
        let conds = [
            quasi_majority(),
            quasi_minority(),
            comm(),
            constancy(),
            hm(3).unwrap(),
            qj(4).unwrap(),
        ];
        for (name, g) in pairs {
            let a = canonical(name).unwrap();
            let mut solver = CloneSolver::new(gens(&g));
            for cond in &conds {
                let s = satisfies_structure(&a, cond).is_sat();
                let c = solver.satisfies(cond).decided();
                assert_eq!(Some(s), c, "{name} vs {g:?} on {:?}", cond.name());
            }
        }
    }

    #[test]
    fn every_quasi_minority_table_breaks_blocker2() {
        let b2 = canonical("blocker:2").unwrap();
        let cond = quasi_minority();
        let mut count = 0;
        for code in 0u32..256 {
            let f = BoolFn::from_fn(3, |x| {
                let idx = (x[0] as u32) << 2 | (x[1] as u32) << 1 | x[2] as u32;
                code >> idx & 1 == 1
            })
            .unwrap();
            if verify_witness(&cond, std::slice::from_ref(&f)) {
                count += 1;
                assert!(
                    !b2.preserved_by(&f),
                    "{f} is a quasi minority preserving blocker(2)"
                );
            }
        }
        // the quasi minority tables are exactly 0, 1, minority, its negation
        assert_eq!(count, 4);
    }

    #[test]
    fn const_condition_outcomes() {
        assert!(satisfies_clone(&gens(&["0"]), &constancy()).is_sat());
        assert!(matches!(
            satisfies_clone(&gens(&["m", "q"]), &constancy()),
            CloneSat::Refuted { .. }
        ));
        assert!(matches!(
            satisfies_structure(&canonical("idem").unwrap(), &constancy()),
            StructSat::Refuted { .. }
        ));
    }
}
