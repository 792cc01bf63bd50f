//! Finitary Boolean operations as packed truth tables.
//!
//! An `n`-ary operation on `{0,1}` is stored as a bit string of length
//! `2^n`: the value on arguments `(x1,..,xn)` sits at index
//! `sum x_j * 2^(n-j)`, i.e. `x1` is the most significant bit of the index.

use std::fmt;

use thiserror::Error;

/// Largest arity the representation supports. All shipped checks stay at or
/// below arity 8; tables above arity 6 span several words.
pub const MAX_ARITY: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoolFnError {
    #[error("arity {0} out of range 1..={MAX_ARITY}")]
    BadArity(usize),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("index map entry {entry} out of range 1..={target}")]
    BadIndexEntry { entry: usize, target: usize },
    #[error("index map has {got} entries but source arity is {expected}")]
    IndexLenMismatch { expected: usize, got: usize },
    #[error("unknown operation name `{0}`")]
    UnknownName(String),
    #[error("invalid rendering `{0}`, expected \"arity:bits\"")]
    BadRendering(String),
}

/// A map `pi: {1,..,n} -> {1,..,r}` used to form the minor `f_pi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    target_arity: usize,
    image: Vec<usize>,
}

impl IndexMap {
    pub fn new(image: Vec<usize>, target_arity: usize) -> Result<Self, BoolFnError> {
        if target_arity == 0 || target_arity > MAX_ARITY {
            return Err(BoolFnError::BadArity(target_arity));
        }
        for &e in &image {
            if e == 0 || e > target_arity {
                return Err(BoolFnError::BadIndexEntry {
                    entry: e,
                    target: target_arity,
                });
            }
        }
        Ok(IndexMap {
            target_arity,
            image,
        })
    }

    pub fn identity(n: usize) -> Self {
        IndexMap {
            target_arity: n,
            image: (1..=n).collect(),
        }
    }

    pub fn source_arity(&self) -> usize {
        self.image.len()
    }

    pub fn target_arity(&self) -> usize {
        self.target_arity
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// The composite map sending `j` to `sigma(pi(j))`; applying it as a minor
    /// equals taking the `pi`-minor and then the `sigma`-minor.
    pub fn then(&self, sigma: &IndexMap) -> Result<IndexMap, BoolFnError> {
        if sigma.source_arity() != self.target_arity {
            return Err(BoolFnError::IndexLenMismatch {
                expected: self.target_arity,
                got: sigma.source_arity(),
            });
        }
        let image = self.image.iter().map(|&j| sigma.image[j - 1]).collect();
        IndexMap::new(image, sigma.target_arity())
    }
}

/// An `n`-ary Boolean operation, immutable once built.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolFn {
    arity: usize,
    /// Bit `i` of the table lives at `table[i / 64] >> (i % 64) & 1`.
    table: Vec<u64>,
}

fn words_for(arity: usize) -> usize {
    if arity < 6 {
        1
    } else {
        1 << (arity - 6)
    }
}

fn table_mask(arity: usize) -> u64 {
    if arity < 6 {
        (1u64 << (1 << arity)) - 1
    } else {
        u64::MAX
    }
}

impl BoolFn {
    /// Builds an operation from its bit table, `bits[i]` being the value at
    /// index `i` in the convention above.
    pub fn from_bits(arity: usize, bits: &[bool]) -> Result<Self, BoolFnError> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(BoolFnError::BadArity(arity));
        }
        if bits.len() != 1 << arity {
            return Err(BoolFnError::ArityMismatch {
                expected: 1 << arity,
                got: bits.len(),
            });
        }
        let mut table = vec![0u64; words_for(arity)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                table[i / 64] |= 1u64 << (i % 64);
            }
        }
        Ok(BoolFn { arity, table })
    }

    /// Builds an operation from a closure evaluated on every argument tuple.
    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self, BoolFnError> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(BoolFnError::BadArity(arity));
        }
        let mut args = vec![false; arity];
        let bits: Vec<bool> = (0..1usize << arity)
            .map(|i| {
                for (j, a) in args.iter_mut().enumerate() {
                    *a = (i >> (arity - 1 - j)) & 1 == 1;
                }
                f(&args)
            })
            .collect();
        Self::from_bits(arity, &bits)
    }

    pub(crate) fn from_words(arity: usize, mut table: Vec<u64>) -> Self {
        debug_assert_eq!(table.len(), words_for(arity));
        if arity < 6 {
            table[0] &= table_mask(arity);
        }
        BoolFn { arity, table }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.table
    }

    pub fn bit(&self, index: usize) -> bool {
        (self.table[index / 64] >> (index % 64)) & 1 == 1
    }

    /// The table index of an argument tuple, first argument most significant.
    pub fn index_of(args: &[bool]) -> usize {
        args.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn eval(&self, args: &[bool]) -> Result<bool, BoolFnError> {
        if args.len() != self.arity {
            return Err(BoolFnError::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        Ok(self.bit(Self::index_of(args)))
    }

    /// The minor `f_pi` with `f_pi(x1,..,xr) = f(x_{pi(1)},..,x_{pi(n)})`.
    pub fn minor(&self, pi: &IndexMap) -> Result<BoolFn, BoolFnError> {
        if pi.source_arity() != self.arity {
            return Err(BoolFnError::IndexLenMismatch {
                expected: self.arity,
                got: pi.source_arity(),
            });
        }
        let r = pi.target_arity();
        BoolFn::from_fn(r, |x| {
            let args: Vec<bool> = pi.image.iter().map(|&j| x[j - 1]).collect();
            self.bit(Self::index_of(&args))
        })
    }

    /// Superposition: `h(x) = f(g1(x),..,gn(x))` for `gs` of one common arity.
    pub fn compose(&self, gs: &[BoolFn]) -> Result<BoolFn, BoolFnError> {
        if gs.len() != self.arity {
            return Err(BoolFnError::ArityMismatch {
                expected: self.arity,
                got: gs.len(),
            });
        }
        let k = gs[0].arity;
        for g in gs {
            if g.arity != k {
                return Err(BoolFnError::ArityMismatch {
                    expected: k,
                    got: g.arity,
                });
            }
        }
        let words: Vec<&[u64]> = gs.iter().map(|g| g.words()).collect();
        Ok(Self::from_words(k, compose_words(self, &words, k)))
    }

    /// The dual `f^Delta(x) = c(f(c(x1),..,c(xn)))`.
    pub fn dual(&self) -> BoolFn {
        BoolFn::from_fn(self.arity, |x| {
            let flipped: Vec<bool> = x.iter().map(|&b| !b).collect();
            !self.bit(Self::index_of(&flipped))
        })
        .expect("arity already validated")
    }

    pub fn is_idempotent(&self) -> bool {
        !self.bit(0) && self.bit((1 << self.arity) - 1)
    }

    pub fn is_constant(&self) -> bool {
        let zero = self.table.iter().all(|&w| w == 0);
        let ones = {
            let mask = table_mask(self.arity);
            self.table[..self.table.len() - 1].iter().all(|&w| w == u64::MAX)
                && *self.table.last().unwrap() == mask
        };
        zero || ones
    }

    /// True when the table is invariant under every transposition of
    /// arguments. Symmetric generators let the closure engine enumerate
    /// argument multisets instead of tuples.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.arity.saturating_sub(1) {
            let mut image = (1..=self.arity).collect::<Vec<_>>();
            image.swap(i, i + 1);
            let pi = IndexMap::new(image, self.arity).unwrap();
            if self.minor(&pi).unwrap() != *self {
                return false;
            }
        }
        true
    }

    pub fn projection(i: usize, n: usize) -> Result<BoolFn, BoolFnError> {
        if n == 0 || n > MAX_ARITY {
            return Err(BoolFnError::BadArity(n));
        }
        if i == 0 || i > n {
            return Err(BoolFnError::BadIndexEntry { entry: i, target: n });
        }
        BoolFn::from_fn(n, |x| x[i - 1])
    }

    /// Renders as `"arity:bits"` with table bits in index order.
    pub fn render(&self) -> String {
        let bits: String = (0..1usize << self.arity)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        format!("{}:{}", self.arity, bits)
    }

    pub fn parse(text: &str) -> Result<BoolFn, BoolFnError> {
        let bad = || BoolFnError::BadRendering(text.to_string());
        let (a, bits) = text.split_once(':').ok_or_else(bad)?;
        let arity: usize = a.trim().parse().map_err(|_| bad())?;
        if arity == 0 || arity > MAX_ARITY || bits.len() != 1 << arity {
            return Err(bad());
        }
        let mut v = Vec::with_capacity(bits.len());
        for ch in bits.chars() {
            match ch {
                '0' => v.push(false),
                '1' => v.push(true),
                _ => return Err(bad()),
            }
        }
        BoolFn::from_bits(arity, &v)
    }
}

/// Applies `f` componentwise to argument tables given as word slices,
/// producing the words of the composed table. For each cell `c` of `f` with
/// value 1, the positions where the arguments spell `c` are collected with
/// bitwise ands.
pub(crate) fn compose_words(f: &BoolFn, args: &[&[u64]], k: usize) -> Vec<u64> {
    let nwords = words_for(k);
    let mut out = vec![0u64; nwords];
    for c in 0..1usize << f.arity {
        if !f.bit(c) {
            continue;
        }
        for w in 0..nwords {
            let mut m = u64::MAX;
            for (j, a) in args.iter().enumerate() {
                let bit_set = (c >> (f.arity - 1 - j)) & 1 == 1;
                m &= if bit_set { a[w] } else { !a[w] };
                if m == 0 {
                    break;
                }
            }
            out[w] |= m;
        }
    }
    if k < 6 {
        out[0] &= table_mask(k);
    }
    out
}

impl fmt::Debug for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoolFn({})", self.render())
    }
}

impl fmt::Display for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// The named operations used to describe Post's lattice.
pub fn named(name: &str) -> Result<BoolFn, BoolFnError> {
    let n = name.trim();
    match n {
        "0" => return BoolFn::from_bits(1, &[false, false]),
        "1" => return BoolFn::from_bits(1, &[true, true]),
        "c" | "not" => return BoolFn::from_bits(1, &[true, false]),
        "id" => return BoolFn::projection(1, 1),
        "and" | "∧" => return BoolFn::from_fn(2, |x| x[0] & x[1]),
        "or" | "∨" => return BoolFn::from_fn(2, |x| x[0] | x[1]),
        "xor" | "⊕" => return BoolFn::from_fn(2, |x| x[0] ^ x[1]),
        "xnor" | "⊕'" | "⊕′" => return BoolFn::from_fn(2, |x| !(x[0] ^ x[1])),
        "imp" | "->" | "→" => return BoolFn::from_fn(2, |x| !x[0] | x[1]),
        "star" | "*" | "∗" => return BoolFn::from_fn(2, |x| !x[0] & x[1]),
        "m" => return BoolFn::from_fn(3, |x| x[0] ^ x[1] ^ x[2]),
        "p" => return BoolFn::from_fn(3, |x| x[0] & (x[1] | x[2])),
        "q" => return BoolFn::from_fn(3, |x| x[0] & !(x[1] ^ x[2])),
        "pd" => return named("p").map(|f| f.dual()),
        "qd" => return named("q").map(|f| f.dual()),
        _ => {}
    }
    if let Some(rest) = n.strip_prefix('d') {
        // "dK" is 1 iff at most one argument is 0; "dKd" is its dual
        // (1 iff at least two arguments are 1).
        let (digits, dualize) = match rest.strip_suffix('d') {
            Some(digits) => (digits, true),
            None => (rest, false),
        };
        if let Ok(k) = digits.parse::<usize>() {
            if (3..=MAX_ARITY).contains(&k) {
                let f = BoolFn::from_fn(k, |x| x.iter().filter(|&&b| !b).count() <= 1)?;
                return Ok(if dualize { f.dual() } else { f });
            }
            return Err(BoolFnError::UnknownName(n.to_string()));
        }
    }
    if let Some(rest) = n.strip_prefix("pi") {
        if let Some((i, k)) = rest.split_once('_') {
            if let (Ok(i), Ok(k)) = (i.parse(), k.parse()) {
                return BoolFn::projection(i, k);
            }
        }
    }
    BoolFn::parse(n).map_err(|_| BoolFnError::UnknownName(n.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str) -> BoolFn {
        named(name).unwrap()
    }

    #[test]
    fn eval_named_operations() {
        assert!(f("and").eval(&[true, true]).unwrap());
        assert!(!f("and").eval(&[true, false]).unwrap());
        // majority of (1,0,1)
        assert!(f("d3").eval(&[true, false, true]).unwrap());
        // minority of (1,1,1)
        assert!(f("m").eval(&[true, true, true]).unwrap());
        assert_eq!(
            f("and").eval(&[true]),
            Err(BoolFnError::ArityMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn named_tables() {
        assert_eq!(f("d3").render(), "3:00010111");
        assert_eq!(f("star").render(), "2:0100");
        assert_eq!(f("pi2_2").render(), "2:0101");
        assert_eq!(f("q").render(), "3:00001001");
        assert!(named("d2").is_err());
        assert!(named("nonsense").is_err());
    }

    #[test]
    fn q_table_spot_check() {
        // q(x,y,z) = x and (y xnor z)
        let q = f("q");
        assert!(q.eval(&[true, true, true]).unwrap());
        assert!(q.eval(&[true, false, false]).unwrap());
        assert!(!q.eval(&[true, false, true]).unwrap());
        assert!(!q.eval(&[false, true, true]).unwrap());
    }

    #[test]
    fn minor_examples() {
        // d3(x,x,y) is the first projection
        let pi = IndexMap::new(vec![1, 1, 2], 2).unwrap();
        assert_eq!(f("d3").minor(&pi).unwrap(), f("pi1_2"));
        // m(x,x,y) = y
        assert_eq!(f("m").minor(&pi).unwrap(), f("pi2_2"));
        // identity minor
        let id = IndexMap::identity(3);
        assert_eq!(f("d3").minor(&id).unwrap(), f("d3"));
    }

    #[test]
    fn compose_examples() {
        let and = f("and");
        let or = f("or");
        // composing with projections is the identity
        let projs = [f("pi1_2"), f("pi2_2")];
        assert_eq!(and.compose(&projs).unwrap(), and);
        // c(and) is nand
        let nand = f("c").compose(std::slice::from_ref(&and)).unwrap();
        assert_eq!(nand.render(), "2:1110");
        // p(x,y,z) = x and (y or z), built by superposition at arity 3
        let p1 = f("pi1_3");
        let inner = or.compose(&[f("pi2_3"), f("pi3_3")]).unwrap();
        let p = and.compose(&[p1, inner]).unwrap();
        assert_eq!(p, f("p"));
        assert_eq!(p.render(), "3:00000111");
    }

    #[test]
    fn dual_examples() {
        assert_eq!(f("and").dual(), f("or"));
        assert_eq!(f("m").dual(), f("m"));
        assert_eq!(f("0").dual(), f("1"));
        // qd(x,y,z) = x or (y xor z)
        assert_eq!(f("qd"), BoolFn::from_fn(3, |x| x[0] | (x[1] ^ x[2])).unwrap());
    }

    #[test]
    fn idempotence() {
        assert!(f("d3").is_idempotent());
        assert!(!f("c").is_idempotent());
        // q(x,x,x) = x and (x xnor x) = x
        assert!(f("q").is_idempotent());
        assert!(f("0").is_constant() && f("1").is_constant());
        assert!(!f("q").is_constant());
    }

    #[test]
    fn render_round_trip() {
        for name in ["0", "1", "c", "and", "or", "xor", "m", "p", "q", "d3", "d5"] {
            let g = f(name);
            assert_eq!(BoolFn::parse(&g.render()).unwrap(), g);
        }
        assert!(BoolFn::parse("3:0101").is_err());
        assert!(BoolFn::parse("abc").is_err());
    }

    fn all_fns(arity: usize) -> Vec<BoolFn> {
        (0..1u64 << (1 << arity))
            .map(|t| {
                let bits: Vec<bool> = (0..1 << arity).map(|i| (t >> i) & 1 == 1).collect();
                BoolFn::from_bits(arity, &bits).unwrap()
            })
            .collect()
    }

    fn all_maps(n: usize, r: usize) -> Vec<IndexMap> {
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

    #[test]
    fn minor_composition_is_functorial() {
        // minor(minor(f,pi),sigma) = minor(f, pi;sigma), exhaustive at small
        // arities (arity 4 tables with arity-2 maps keep this fast).
        for n in 1..=2 {
            for g in all_fns(n) {
                for r in 1..=3 {
                    for pi in all_maps(n, r) {
                        for s in 1..=2 {
                            for sigma in all_maps(r, s) {
                                let lhs = g.minor(&pi).unwrap().minor(&sigma).unwrap();
                                let rhs = g.minor(&pi.then(&sigma).unwrap()).unwrap();
                                assert_eq!(lhs, rhs);
                            }
                        }
                    }
                }
            }
        }
        // spot checks at arity 4
        let d4 = f("d4");
        let pi = IndexMap::new(vec![1, 2, 2, 3], 3).unwrap();
        let sigma = IndexMap::new(vec![2, 1, 2], 2).unwrap();
        let lhs = d4.minor(&pi).unwrap().minor(&sigma).unwrap();
        let rhs = d4.minor(&pi.then(&sigma).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dual_is_involution_up_to_arity_4() {
        for n in 1..=2 {
            for g in all_fns(n) {
                assert_eq!(g.dual().dual(), g);
            }
        }
        for name in ["d3", "d4", "p", "q", "m"] {
            assert_eq!(f(name).dual().dual(), f(name));
        }
    }

    #[test]
    fn dual_commutes_with_minors() {
        // dual(minor(f,pi)) = minor(dual(f),pi), exhaustive at arity <= 3
        for n in 1..=3 {
            for g in all_fns(n) {
                for r in 1..=3 {
                    for pi in all_maps(n, r) {
                        assert_eq!(g.minor(&pi).unwrap().dual(), g.dual().minor(&pi).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn compose_with_projections_is_identity() {
        for n in 1..=4 {
            let projs: Vec<BoolFn> = (1..=n).map(|i| BoolFn::projection(i, n).unwrap()).collect();
            for name in ["d4", "m", "p", "q", "and"] {
                let g = f(name);
                if g.arity() == n {
                    assert_eq!(g.compose(&projs).unwrap(), g);
                }
            }
            // and every function of arity 2
            if n == 2 {
                for g in all_fns(2) {
                    assert_eq!(g.compose(&projs).unwrap(), g);
                }
            }
        }
    }

    #[test]
    fn symmetry_detection() {
        assert!(f("m").is_symmetric());
        assert!(f("d5").is_symmetric());
        assert!(f("and").is_symmetric());
        assert!(!f("p").is_symmetric());
        assert!(!f("star").is_symmetric());
    }
}
