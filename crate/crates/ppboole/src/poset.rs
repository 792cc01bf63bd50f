//! The pp-constructability classes of Boolean structures as data: the class
//! inventory, the order between classes, separating conditions for
//! incomparable pairs, a battery-driven classification procedure for
//! generator sets and structures, and complexity labels for the associated
//! CSPs.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::clones::{catalog, catalog_with_bound, GeneratorSet, DEFAULT_CHAIN_BOUND};
use crate::conditions::{
    builtin, satisfies_structure, CloneSat, CloneSolver, ConditionError, H1Condition, StructSat,
    Witness,
};
use crate::structures::Structure;

#[derive(Debug, Error)]
pub enum PosetError {
    #[error("{0} and {1} are comparable; no separating condition exists")]
    Comparable(PosetClass, PosetClass),
    #[error("no separating condition found for {0} vs {1}")]
    NoSeparation(PosetClass, PosetClass),
    #[error("satisfaction of `{condition}` is unresolved for {context}")]
    Unresolved { condition: String, context: String },
    #[error("chain bound {0} too small, need at least 4")]
    BadChainBound(usize),
    #[error("cannot parse `{0}` as a class")]
    BadClassName(String),
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

/// A class of the two-element pp-constructability lattice. The two chains
/// carry the index of their quasi-near-unanimity arity; `DiP(i)`/`DiQ(i)`
/// require `i >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosetClass {
    Bottom,
    Meet,
    D3,
    M,
    D3M,
    P,
    Q,
    DiP(usize),
    DiQ(usize),
    MQ,
    Top,
}

impl PosetClass {
    pub fn chain_index(&self) -> Option<usize> {
        match self {
            PosetClass::DiP(i) | PosetClass::DiQ(i) => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for PosetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosetClass::Bottom => write!(f, "Bottom"),
            PosetClass::Meet => write!(f, "Meet"),
            PosetClass::D3 => write!(f, "D3"),
            PosetClass::M => write!(f, "M"),
            PosetClass::D3M => write!(f, "D3M"),
            PosetClass::P => write!(f, "P"),
            PosetClass::Q => write!(f, "Q"),
            PosetClass::DiP(i) => write!(f, "DiP({i})"),
            PosetClass::DiQ(i) => write!(f, "DiQ({i})"),
            PosetClass::MQ => write!(f, "MQ"),
            PosetClass::Top => write!(f, "Top"),
        }
    }
}

impl FromStr for PosetClass {
    type Err = PosetError;

    fn from_str(s: &str) -> Result<Self, PosetError> {
        let fail = || PosetError::BadClassName(s.to_string());
        if let Some(rest) = s.strip_prefix("DiP(").or_else(|| s.strip_prefix("DiQ(")) {
            let i: usize = rest
                .strip_suffix(')')
                .and_then(|d| d.parse().ok())
                .ok_or_else(fail)?;
            if i < 3 {
                return Err(fail());
            }
            return Ok(if s.starts_with("DiP") {
                PosetClass::DiP(i)
            } else {
                PosetClass::DiQ(i)
            });
        }
        match s {
            "Bottom" => Ok(PosetClass::Bottom),
            "Meet" => Ok(PosetClass::Meet),
            "D3" => Ok(PosetClass::D3),
            "M" => Ok(PosetClass::M),
            "D3M" => Ok(PosetClass::D3M),
            "P" => Ok(PosetClass::P),
            "Q" => Ok(PosetClass::Q),
            "MQ" => Ok(PosetClass::MQ),
            "Top" => Ok(PosetClass::Top),
            _ => Err(fail()),
        }
    }
}

/// The order of the lattice: `a <= b` iff every height-1 condition
/// satisfied in (the clones of) `a` is satisfied in `b`.
pub fn leq(a: PosetClass, b: PosetClass) -> bool {
    use PosetClass::*;
    if a == b || a == Bottom || b == Top {
        return true;
    }
    if a == Top {
        return false;
    }
    if b == MQ {
        return true;
    }
    match (a, b) {
        (Meet, P | Q | DiP(_) | DiQ(_)) => true,
        (P, Q | DiP(_) | DiQ(_)) => true,
        (Q, DiQ(_)) => true,
        (DiP(j), DiP(i)) => j >= i,
        (DiP(j), DiQ(i)) => j >= i,
        (DiQ(j), DiQ(i)) => j >= i,
        (D3, DiP(3) | DiQ(3) | D3M) => true,
        (M, D3M) => true,
        _ => false,
    }
}

/// Complexity of `CSP(A)` for structures `A` whose polymorphism clone lies
/// in the class. `Top` is labeled `L` because it sits above `D3M`; such
/// CSPs are in fact trivially satisfiable via the constant polymorphism.
pub fn complexity_of(c: PosetClass) -> &'static str {
    use PosetClass::*;
    match c {
        Bottom => "NP-complete",
        Meet => "P-complete",
        M => "⊕L-complete",
        D3 | P | DiP(_) => "NL-complete",
        D3M | Q | DiQ(_) | MQ | Top => "L",
    }
}

/// A class with its member labels (clones of the catalog that fall into
/// it), the canonical structure whose polymorphism clone represents it, if
/// any, and its complexity label.
#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub class: PosetClass,
    pub members: Vec<String>,
    pub canonical_structure: Option<String>,
    pub complexity: &'static str,
}

fn strs(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

pub fn class_info(c: PosetClass) -> ClassInfo {
    use PosetClass::*;
    let (members, canonical_structure) = match c {
        Bottom => (strs(&["[]", "[c]"]), None),
        Meet => (strs(&["[and]", "[or]"]), Some("dhornsat".to_string())),
        D3 => (strs(&["[d3]"]), Some("d2sat".to_string())),
        M => (strs(&["[m]", "[m,c]"]), Some("d3lin2".to_string())),
        D3M => (strs(&["[d3,m]", "[d3,c]"]), Some("c2".to_string())),
        P => (strs(&["[p]", "[pd]"]), None),
        Q => (strs(&["[q]", "[qd]"]), None),
        DiP(3) => (
            strs(&["[d3,p]", "[d3,pd]", "[and,or]"]),
            Some("blocker_leq:2".to_string()),
        ),
        DiQ(3) => (strs(&["[d3,q]", "[d3,qd]"]), Some("blocker:2".to_string())),
        DiP(i) => (
            vec![
                format!("[d{i},p]"),
                format!("[d{i}d,pd]"),
                format!("[d{i}]"),
                format!("[d{i}d]"),
            ],
            Some(format!("blocker_leq:{}", i - 1)),
        ),
        DiQ(i) => (
            vec![format!("[d{i},q]"), format!("[d{i}d,qd]")],
            Some(format!("blocker:{}", i - 1)),
        ),
        MQ => (strs(&["[or,q]", "[and,qd]", "[m,q]"]), Some("idem".to_string())),
        Top => (strs(&["[0]", "[1]"]), None),
    };
    ClassInfo {
        class: c,
        members,
        canonical_structure,
        complexity: complexity_of(c),
    }
}

/// The catalog label of the clone used to represent the class in live
/// separation checks.
pub fn representative_label(c: PosetClass) -> String {
    use PosetClass::*;
    match c {
        Bottom => "[]".into(),
        Meet => "[and]".into(),
        D3 => "[d3]".into(),
        M => "[m]".into(),
        D3M => "[d3,m]".into(),
        P => "[p]".into(),
        Q => "[q]".into(),
        DiP(i) => format!("[d{i},p]"),
        DiQ(i) => format!("[d{i},q]"),
        MQ => "[or,q]".into(),
        Top => "[0]".into(),
    }
}

pub fn representative(c: PosetClass) -> GeneratorSet {
    let label = representative_label(c);
    let bound = DEFAULT_CHAIN_BOUND.max(c.chain_index().unwrap_or(3));
    catalog_with_bound(bound)
        .into_iter()
        .find(|e| e.label == label)
        .expect("every class has a catalog representative")
        .generators
}

/// A height-1 condition satisfied in `a`'s representative clone and
/// refuted in `b`'s, witnessing `a` not below `b`. Both sides are
/// re-verified by a live search at call time.
pub fn separating_condition(a: PosetClass, b: PosetClass) -> Result<H1Condition, PosetError> {
    if leq(a, b) {
        return Err(PosetError::Comparable(a, b));
    }
    let max_chain = DEFAULT_CHAIN_BOUND
        .max(a.chain_index().unwrap_or(3))
        .max(b.chain_index().unwrap_or(3));
    let mut names = vec!["qnu:3".to_string(), "comm".to_string(), "qminor".to_string()];
    names.extend((4..=max_chain).map(|k| format!("qnu:{k}")));
    names.extend(["hm:3".to_string(), "qj:4".to_string(), "const".to_string()]);

    let mut side_a = CloneSolver::new(representative(a));
    let mut side_b = CloneSolver::new(representative(b));
    for name in names {
        let cond = builtin(&name)?;
        let in_a = decide(side_a.satisfies(&cond), &name, a)?;
        if !in_a {
            continue;
        }
        if !decide(side_b.satisfies(&cond), &name, b)? {
            return Ok(cond);
        }
    }
    Err(PosetError::NoSeparation(a, b))
}

fn decide(sat: CloneSat, condition: &str, class: PosetClass) -> Result<bool, PosetError> {
    sat.decided().ok_or_else(|| PosetError::Unresolved {
        condition: condition.to_string(),
        context: format!("the representative of {class}"),
    })
}

// ---------------------------------------------------------------------------
// Classification.

/// One consulted battery cell, with the witness assignment when satisfied.
#[derive(Debug, Clone)]
pub struct BatteryCell {
    pub condition: String,
    pub satisfied: bool,
    pub witness: Option<String>,
}

/// Outcome of classifying a generator set or structure: the class, the
/// battery cells consulted in order, and whether the chain cutoff could
/// have affected the answer.
#[derive(Debug, Clone)]
pub struct Classification {
    pub class: PosetClass,
    pub chain_bound: usize,
    pub battery: Vec<BatteryCell>,
    /// Set when the chain search was exhausted without a decisive
    /// quasi-near-unanimity arity, so a larger bound could refine the class.
    pub cutoff_bound: bool,
}

impl Classification {
    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("class: {}\n", self.class));
        if let Some(i) = self.class.chain_index() {
            out.push_str(&format!("chain index: {i}\n"));
        }
        out.push_str(&format!("complexity: {}\n", complexity_of(self.class)));
        out.push_str("battery:\n");
        for cell in &self.battery {
            let verdict = if cell.satisfied { "yes" } else { "no" };
            out.push_str(&format!("  {}: {}", cell.condition, verdict));
            if let Some(w) = &cell.witness {
                out.push_str(&format!("  [{w}]"));
            }
            out.push('\n');
        }
        if self.cutoff_bound {
            out.push_str(&format!(
                "note: chain search cut off at {}; the class assumes no higher \
                 quasi-near-unanimity arity applies\n",
                self.chain_bound
            ));
        }
        out
    }
}

enum Prover<'a> {
    Clone(CloneSolver, String),
    Structure(&'a Structure),
}

impl Prover<'_> {
    fn check(&mut self, cond: &H1Condition, name: &str) -> Result<(bool, Option<String>), PosetError> {
        match self {
            Prover::Clone(solver, context) => match solver.satisfies(cond) {
                CloneSat::Witness { assignment, .. } => Ok((true, Some(render_witness(&assignment)))),
                CloneSat::Refuted { .. } => Ok((false, None)),
                CloneSat::Unresolved => Err(PosetError::Unresolved {
                    condition: name.to_string(),
                    context: context.clone(),
                }),
            },
            Prover::Structure(a) => match satisfies_structure(a, cond) {
                StructSat::Witness { assignment, .. } => Ok((true, Some(render_witness(&assignment)))),
                StructSat::Refuted { .. } => Ok((false, None)),
            },
        }
    }
}

fn render_witness(w: &Witness) -> String {
    w.iter()
        .map(|(name, f)| format!("{name} = {f}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn classify_core(prover: &mut Prover, chain_bound: usize) -> Result<Classification, PosetError> {
    use PosetClass::*;
    let mut battery: Vec<BatteryCell> = Vec::new();
    let mut cutoff_bound = false;
    macro_rules! chk {
        ($name:expr) => {{
            let name: String = $name.to_string();
            let cond = builtin(&name)?;
            let (sat, witness) = prover.check(&cond, &name)?;
            battery.push(BatteryCell {
                condition: name,
                satisfied: sat,
                witness,
            });
            sat
        }};
    }

    let class = if chk!("const") {
        Top
    } else {
        let qmin = chk!("qminor");
        let qnu3 = chk!("qnu:3");
        match (qmin, qnu3) {
            (true, true) => {
                if chk!("comm") {
                    MQ
                } else {
                    D3M
                }
            }
            (true, false) => M,
            (false, true) => {
                if !chk!("comm") {
                    D3
                } else if chk!("hm:3") {
                    DiQ(3)
                } else {
                    DiP(3)
                }
            }
            (false, false) => {
                if !chk!("comm") {
                    Bottom
                } else {
                    let mut found = None;
                    for k in 4..=chain_bound {
                        if chk!(format!("qnu:{k}")) {
                            found = Some(k);
                            break;
                        }
                    }
                    match found {
                        Some(k) => {
                            if chk!("hm:3") {
                                DiQ(k)
                            } else {
                                DiP(k)
                            }
                        }
                        None => {
                            cutoff_bound = true;
                            if chk!("qj:4") {
                                if chk!("hm:3") {
                                    Q
                                } else {
                                    P
                                }
                            } else {
                                Meet
                            }
                        }
                    }
                }
            }
        }
    };
    Ok(Classification {
        class,
        chain_bound,
        battery,
        cutoff_bound,
    })
}

/// Classifies the clone generated by `g` by evaluating the condition
/// battery up to quasi-near-unanimity arity `chain_bound` (at least 4).
pub fn classify_generators(g: &GeneratorSet, chain_bound: usize) -> Result<Classification, PosetError> {
    if chain_bound < 4 {
        return Err(PosetError::BadChainBound(chain_bound));
    }
    let context = g.render();
    let mut prover = Prover::Clone(CloneSolver::new(g.clone()), context);
    classify_core(&mut prover, chain_bound)
}

/// Classifies `Pol(A)` by exhaustive polymorphism searches. The chain is
/// cut off at max(4, max relation arity + 1): a relational structure of
/// bounded arity cannot distinguish higher quasi-near-unanimity arities,
/// so the cutoff flag only fires on the residual branch.
pub fn classify_structure(a: &Structure) -> Result<Classification, PosetError> {
    let bound = 4.max(a.max_arity() + 1);
    let mut prover = Prover::Structure(a);
    classify_core(&mut prover, bound)
}

// ---------------------------------------------------------------------------
// The shipped decision table.

/// One row of the decision table: a catalog clone, its class, and the
/// battery cells the classifier consulted, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub label: String,
    pub class: PosetClass,
    pub cells: Vec<(String, bool)>,
}

/// Recomputes the decision table by classifying every catalog clone at the
/// default chain bound; `decision_table` ships the frozen result.
pub fn regenerate_decision_table() -> Result<Vec<TableRow>, PosetError> {
    catalog()
        .iter()
        .map(|entry| {
            let c = classify_generators(&entry.generators, DEFAULT_CHAIN_BOUND)?;
            Ok(TableRow {
                label: entry.label.clone(),
                class: c.class,
                cells: c
                    .battery
                    .iter()
                    .map(|cell| (cell.condition.clone(), cell.satisfied))
                    .collect(),
            })
        })
        .collect()
}

pub fn decision_table() -> Vec<TableRow> {
    DECISION_TABLE_DATA
        .iter()
        .map(|(label, class, cells)| TableRow {
            label: label.to_string(),
            class: class.parse().expect("shipped class names parse"),
            cells: cells.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
        })
        .collect()
}

type RawRow = (&'static str, &'static str, &'static [(&'static str, bool)]);

const DECISION_TABLE_DATA: &[RawRow] = &[
    ("[]", "Bottom", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", false), ]),
    ("[c]", "Bottom", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", false), ]),
    ("[0]", "Top", &[("const", true), ]),
    ("[1]", "Top", &[("const", true), ]),
    ("[and]", "Meet", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", false), ]),
    ("[or]", "Meet", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", false), ]),
    ("[m]", "M", &[("const", false), ("qminor", true), ("qnu:3", false), ]),
    ("[m,c]", "M", &[("const", false), ("qminor", true), ("qnu:3", false), ]),
    ("[d3]", "D3", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", false), ]),
    ("[d3,m]", "D3M", &[("const", false), ("qminor", true), ("qnu:3", true), ("comm", false), ]),
    ("[d3,c]", "D3M", &[("const", false), ("qminor", true), ("qnu:3", true), ("comm", false), ]),
    ("[p]", "P", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", true), ("hm:3", false), ]),
    ("[pd]", "P", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", true), ("hm:3", false), ]),
    ("[q]", "Q", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", true), ("hm:3", true), ]),
    ("[qd]", "Q", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", false), ("qj:4", true), ("hm:3", true), ]),
    ("[d3,p]", "DiP(3)", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", true), ("hm:3", false), ]),
    ("[d3,pd]", "DiP(3)", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", true), ("hm:3", false), ]),
    ("[d3,q]", "DiQ(3)", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", true), ("hm:3", true), ]),
    ("[d3,qd]", "DiQ(3)", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", true), ("hm:3", true), ]),
    ("[and,or]", "DiP(3)", &[("const", false), ("qminor", false), ("qnu:3", true), ("comm", true), ("hm:3", false), ]),
    ("[d4]", "DiP(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", false), ]),
    ("[d4d]", "DiP(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", false), ]),
    ("[d4,p]", "DiP(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", false), ]),
    ("[d4d,pd]", "DiP(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", false), ]),
    ("[d4,q]", "DiQ(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", true), ]),
    ("[d4d,qd]", "DiQ(4)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", true), ("hm:3", true), ]),
    ("[d5]", "DiP(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", false), ]),
    ("[d5d]", "DiP(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", false), ]),
    ("[d5,p]", "DiP(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", false), ]),
    ("[d5d,pd]", "DiP(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", false), ]),
    ("[d5,q]", "DiQ(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", true), ]),
    ("[d5d,qd]", "DiQ(5)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", true), ("hm:3", true), ]),
    ("[d6]", "DiP(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", false), ]),
    ("[d6d]", "DiP(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", false), ]),
    ("[d6,p]", "DiP(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", false), ]),
    ("[d6d,pd]", "DiP(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", false), ]),
    ("[d6,q]", "DiQ(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", true), ]),
    ("[d6d,qd]", "DiQ(6)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", true), ("hm:3", true), ]),
    ("[d7]", "DiP(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", false), ]),
    ("[d7d]", "DiP(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", false), ]),
    ("[d7,p]", "DiP(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", false), ]),
    ("[d7d,pd]", "DiP(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", false), ]),
    ("[d7,q]", "DiQ(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", true), ]),
    ("[d7d,qd]", "DiQ(7)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", true), ("hm:3", true), ]),
    ("[d8]", "DiP(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", false), ]),
    ("[d8d]", "DiP(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", false), ]),
    ("[d8,p]", "DiP(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", false), ]),
    ("[d8d,pd]", "DiP(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", false), ]),
    ("[d8,q]", "DiQ(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", true), ]),
    ("[d8d,qd]", "DiQ(8)", &[("const", false), ("qminor", false), ("qnu:3", false), ("comm", true), ("qnu:4", false), ("qnu:5", false), ("qnu:6", false), ("qnu:7", false), ("qnu:8", true), ("hm:3", true), ]),
    ("[or,q]", "MQ", &[("const", false), ("qminor", true), ("qnu:3", true), ("comm", true), ]),
    ("[and,qd]", "MQ", &[("const", false), ("qminor", true), ("qnu:3", true), ("comm", true), ]),
    ("[m,q]", "MQ", &[("const", false), ("qminor", true), ("qnu:3", true), ("comm", true), ]),
];

// ---------------------------------------------------------------------------
// Lattice shape.

/// The classes present in the lattice truncated at chain index `depth`.
pub fn classes_at_depth(depth: usize) -> Vec<PosetClass> {
    use PosetClass::*;
    assert!(depth >= 3);
    let mut out = vec![Bottom, Meet, D3, M, D3M, P, Q, MQ, Top];
    for i in 3..=depth {
        out.push(DiP(i));
        out.push(DiQ(i));
    }
    out
}

/// Cover pairs (lower, upper) of the truncated lattice.
pub fn hasse_covers(depth: usize) -> Vec<(PosetClass, PosetClass)> {
    use PosetClass::*;
    assert!(depth >= 3);
    let mut covers = vec![
        (Bottom, Meet),
        (Bottom, D3),
        (Bottom, M),
        (Meet, P),
        (P, Q),
        (P, DiP(depth)),
        (Q, DiQ(depth)),
        (D3, DiP(3)),
        (D3, D3M),
        (M, D3M),
        (D3M, MQ),
        (DiQ(3), MQ),
        (MQ, Top),
    ];
    for i in 3..depth {
        covers.push((DiP(i + 1), DiP(i)));
        covers.push((DiQ(i + 1), DiQ(i)));
    }
    for i in 3..=depth {
        covers.push((DiP(i), DiQ(i)));
    }
    covers
}

/// DOT rendering of the Hasse diagram truncated at `chain_depth`, with the
/// two infinite chains elided by a marked node and complexity labels on
/// every class node.
pub fn export_dot(chain_depth: usize) -> String {
    assert!(chain_depth >= 3);
    let mut out = String::from("digraph pboole {\n  rankdir = BT;\n  node [shape=box];\n");
    for c in classes_at_depth(chain_depth) {
        out.push_str(&format!(
            "  \"{c}\" [label=\"{c}\\n{}\"];\n",
            complexity_of(c)
        ));
    }
    for elide in ["elideP", "elideQ"] {
        out.push_str(&format!(
            "  \"{elide}\" [label=\"...\" shape=none tooltip=\"chain continues\"];\n"
        ));
    }
    for (lo, hi) in hasse_covers(chain_depth) {
        // the edges into the deepest chain classes pass through the elision marks
        match (lo, hi) {
            (PosetClass::P, PosetClass::DiP(i)) if i == chain_depth => {
                out.push_str("  \"P\" -> \"elideP\";\n");
                out.push_str(&format!("  \"elideP\" -> \"{hi}\";\n"));
            }
            (PosetClass::Q, PosetClass::DiQ(i)) if i == chain_depth => {
                out.push_str("  \"Q\" -> \"elideQ\";\n");
                out.push_str(&format!("  \"elideQ\" -> \"{hi}\";\n"));
            }
            _ => out.push_str(&format!("  \"{lo}\" -> \"{hi}\";\n")),
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{hm, qnu, quasi_majority};
    use crate::structures::canonical;
    use PosetClass::*;

    #[test]
    fn leq_is_a_partial_order_and_matches_known_facts() {
        assert!(leq(Bottom, M));
        assert!(leq(DiQ(4), DiQ(3)));
        assert!(!leq(DiQ(3), DiQ(4)));
        assert!(!leq(M, Meet) && !leq(Meet, M));
        assert!(!leq(Q, DiP(3)));
        assert!(!leq(D3M, DiQ(3)) && !leq(DiQ(3), D3M));
        assert!(!leq(D3, DiP(4)));
        assert!(leq(DiP(5), DiQ(4)));
        assert!(!leq(DiP(4), DiQ(5)));

        let classes = classes_at_depth(8);
        for &a in &classes {
            assert!(leq(a, a));
            for &b in &classes {
                if leq(a, b) && leq(b, a) {
                    assert_eq!(a, b, "antisymmetry: {a} {b}");
                }
                for &c in &classes {
                    if leq(a, b) && leq(b, c) {
                        assert!(leq(a, c), "transitivity: {a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn covers_are_covers_and_shape_is_right() {
        for depth in [3usize, 4, 6, 8] {
            let classes = classes_at_depth(depth);
            let covers = hasse_covers(depth);
            for &(lo, hi) in &covers {
                assert!(leq(lo, hi) && lo != hi, "{lo} < {hi}");
                for &mid in &classes {
                    assert!(
                        mid == lo || mid == hi || !(leq(lo, mid) && leq(mid, hi)),
                        "{mid} sits between {lo} and {hi}"
                    );
                }
            }
            // exactly the covers: every non-cover comparable pair has a midpoint
            let atoms: Vec<_> = covers.iter().filter(|(lo, _)| *lo == Bottom).collect();
            assert_eq!(atoms.len(), 3);
            let coatoms: Vec<_> = covers.iter().filter(|(_, hi)| *hi == Top).collect();
            assert_eq!(coatoms.len(), 1);
            assert_eq!(coatoms[0].0, MQ);
        }
    }

    #[test]
    fn complexity_labels() {
        assert_eq!(complexity_of(M), "⊕L-complete");
        assert_eq!(complexity_of(DiP(5)), "NL-complete");
        assert_eq!(complexity_of(DiQ(4)), "L");
        assert_eq!(complexity_of(Bottom), "NP-complete");
        assert_eq!(complexity_of(Top), "L");
    }

    #[test]
    fn class_names_round_trip() {
        for c in classes_at_depth(8) {
            assert_eq!(c.to_string().parse::<PosetClass>().unwrap(), c);
        }
        assert!("DiP(2)".parse::<PosetClass>().is_err());
        assert!("Zap".parse::<PosetClass>().is_err());
    }

    #[test]
    fn members_partition_the_catalog() {
        let mut seen = std::collections::BTreeMap::new();
        for c in classes_at_depth(DEFAULT_CHAIN_BOUND) {
            for label in class_info(c).members {
                assert!(seen.insert(label.clone(), c).is_none(), "{label} twice");
            }
        }
        for entry in catalog() {
            assert!(seen.contains_key(&entry.label), "{} unplaced", entry.label);
        }
        assert_eq!(seen.len(), catalog().len());
    }

    #[test]
    fn separating_condition_examples() {
        assert_eq!(separating_condition(D3, Meet).unwrap(), quasi_majority());
        assert_eq!(separating_condition(Q, DiP(3)).unwrap(), hm(3).unwrap());
        assert_eq!(
            separating_condition(DiQ(3), DiQ(4)).unwrap(),
            qnu(3).unwrap()
        );
        assert!(matches!(
            separating_condition(Bottom, M),
            Err(PosetError::Comparable(..))
        ));
        assert!(matches!(
            separating_condition(DiQ(4), DiQ(4)),
            Err(PosetError::Comparable(..))
        ));
    }

    #[test]
    fn classify_generator_examples() {
        let classify = |label: &str| {
            let entry = crate::clones::catalog_entry(label).unwrap();
            classify_generators(&entry.generators, 6).unwrap().class
        };
        assert_eq!(classify("[and,or]"), DiP(3));
        assert_eq!(classify("[m,c]"), M);
        assert_eq!(classify("[d4,q]"), DiQ(4));
        assert_eq!(classify("[p]"), P);
        assert_eq!(classify("[q]"), Q);
        assert_eq!(classify("[]"), Bottom);
        assert_eq!(classify("[0]"), Top);
        assert!(matches!(
            classify_generators(&GeneratorSet::empty(), 3),
            Err(PosetError::BadChainBound(3))
        ));
    }

    #[test]
    fn classify_structure_examples() {
        let class_of = |name: &str| classify_structure(&canonical(name).unwrap()).unwrap();
        assert_eq!(class_of("dhornsat").class, Meet);
        assert_eq!(class_of("idem").class, MQ);
        assert_eq!(class_of("c2").class, D3M);
        assert_eq!(class_of("d2sat").class, D3);
        assert_eq!(class_of("d3lin2").class, M);
        assert_eq!(class_of("dstcon").class, DiP(3));
        assert_eq!(class_of("blocker:2").class, DiQ(3));
        assert_eq!(class_of("blocker_leq:2").class, DiP(3));
        // the arity+1 cutoff is exactly enough for the blockers
        let b3 = class_of("blocker:3");
        assert_eq!(b3.class, DiQ(4));
        assert!(!b3.cutoff_bound);
        // the cutoff flag fires only on the residual branch
        assert!(class_of("dhornsat").cutoff_bound);
        assert!(!class_of("d2sat").cutoff_bound);
    }

    #[test]
    fn shipped_table_matches_regeneration() {
        let fresh = regenerate_decision_table().unwrap();
        let shipped = decision_table();
        if shipped != fresh {
            let mut lit = String::new();
            for row in &fresh {
                lit.push_str(&format!("    (\"{}\", \"{}\", &[", row.label, row.class));
                for (name, sat) in &row.cells {
                    lit.push_str(&format!("(\"{name}\", {sat}), "));
                }
                lit.push_str("]),\n");
            }
            panic!("shipped table out of date; regenerated:\n{lit}");
        }
        // every catalog entry lands in the class whose member list carries it
        for row in &fresh {
            assert!(
                class_info(row.class).members.contains(&row.label),
                "{} classified {} but is not a member",
                row.label,
                row.class
            );
        }
    }

    #[test]
    fn classification_is_dual_invariant_and_monotone() {
        let table = decision_table();
        let class_of = |label: &str| {
            table
                .iter()
                .find(|r| r.label == label)
                .unwrap_or_else(|| panic!("{label} missing from table"))
                .class
        };
        for entry in catalog() {
            assert_eq!(
                class_of(&entry.label),
                class_of(&entry.dual_label),
                "{} vs {}",
                entry.label,
                entry.dual_label
            );
        }
        // generator-set inclusion implies order between classes
        let entries = catalog();
        for a in &entries {
            for b in &entries {
                let sub = a
                    .generators
                    .generators()
                    .iter()
                    .all(|f| b.generators.generators().contains(f));
                if sub {
                    assert!(
                        leq(class_of(&a.label), class_of(&b.label)),
                        "{} subset {} but classes disagree",
                        a.label,
                        b.label
                    );
                }
            }
        }
    }

    #[test]
    fn cover_separations_verify_live() {
        for (lo, hi) in hasse_covers(4) {
            let cond = separating_condition(hi, lo).unwrap();
            assert!(!leq(hi, lo), "{hi} vs {lo}");
            drop(cond);
        }
    }

    #[test]
    fn dot_export_shape() {
        let dot = export_dot(4);
        assert!(dot.contains("\"DiQ(4)\" -> \"DiQ(3)\""));
        assert!(dot.contains("\"MQ\" -> \"Top\""));
        assert!(dot.contains("elideP"));
        assert!(dot.contains("NL-complete"));
        assert_eq!(dot.matches("-> \"Top\"").count(), 1);
    }

    #[test]
    fn report_renders() {
        let entry = crate::clones::catalog_entry("[d3,q]").unwrap();
        let c = classify_generators(&entry.generators, 4).unwrap();
        let report = c.report();
        assert!(report.contains("class: DiQ(3)"));
        assert!(report.contains("chain index: 3"));
        assert!(report.contains("complexity: L"));
        assert!(report.contains("qnu:3: yes"));
    }
}
