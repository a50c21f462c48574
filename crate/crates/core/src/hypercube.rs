//! Subface combinatorics of the n-cube.
//!
//! A subface is written as a string over `{0, 1, *}`; the stars are its free
//! coordinates. Orientation of codimension-one subfaces follows the
//! alternating sequence [`zeta`]: replacing the `i`-th star by `zeta(i)`
//! gives an incoming subface, by the other bit an outgoing one.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest supported code.
pub const MAX_CODE_LEN: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypercubeError {
    #[error("invalid subface symbol {0:?}, expected one of 0, 1, *")]
    InvalidSymbol(char),
    #[error("subface code longer than {MAX_CODE_LEN} symbols")]
    TooLong,
    #[error("{child} is not a codimension-one subface of {parent}")]
    NotSubface { parent: SubfaceCode, child: SubfaceCode },
    #[error("{code} has dimension {actual}, expected {expected}")]
    WrongDimension { code: SubfaceCode, expected: usize, actual: usize },
    #[error("{0} must have length {1}")]
    WrongLength(SubfaceCode, usize),
    #[error("edge table invalid: {0}")]
    InvalidTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

impl Symbol {
    fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Star => '*',
        }
    }

    fn bit(b: u8) -> Self {
        if b == 0 {
            Symbol::Zero
        } else {
            Symbol::One
        }
    }
}

/// A subface of the n-cube, `n <= 6`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubfaceCode {
    len: u8,
    stars: u8,
    bits: u8,
}

impl SubfaceCode {
    pub fn from_symbols(symbols: &[Symbol]) -> Result<Self, HypercubeError> {
        if symbols.len() > MAX_CODE_LEN {
            return Err(HypercubeError::TooLong);
        }
        let mut code = SubfaceCode { len: symbols.len() as u8, stars: 0, bits: 0 };
        for (i, s) in symbols.iter().enumerate() {
            code.set(i, *s);
        }
        Ok(code)
    }

    /// The full n-cube `*…*`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_CODE_LEN);
        SubfaceCode { len: n as u8, stars: ((1u16 << n) - 1) as u8, bits: 0 }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        assert!(i < self.len());
        if self.stars >> i & 1 == 1 {
            Symbol::Star
        } else {
            Symbol::bit(self.bits >> i & 1)
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        (0..self.len()).map(|i| self.symbol(i)).collect()
    }

    fn set(&mut self, i: usize, s: Symbol) {
        let m = 1u8 << i;
        self.stars &= !m;
        self.bits &= !m;
        match s {
            Symbol::Star => self.stars |= m,
            Symbol::One => self.bits |= m,
            Symbol::Zero => {}
        }
    }

    /// Copy with position `i` replaced.
    pub fn with(&self, i: usize, s: Symbol) -> Self {
        let mut c = *self;
        c.set(i, s);
        c
    }

    /// Number of stars.
    pub fn dimension(&self) -> usize {
        self.stars.count_ones() as usize
    }

    /// Positions (0-based) of the stars, left to right.
    pub fn star_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.stars >> i & 1 == 1).collect()
    }

    /// True if `child` is a subface of `self` (same length, agrees on every
    /// fixed coordinate of `self`, stars of `child` only where `self` has stars).
    pub fn contains(&self, child: &SubfaceCode) -> bool {
        self.len == child.len && child.stars & !self.stars == 0 && (self.bits ^ child.bits) & !self.stars == 0
    }

    /// Drops the fixed coordinates of `cube`, expressing a subface of `cube`
    /// in the cube's own coordinates.
    pub fn localize(&self, cube: &SubfaceCode) -> Result<SubfaceCode, HypercubeError> {
        if !cube.contains(self) {
            return Err(HypercubeError::InvalidTable(format!("{self} is not a subface of {cube}")));
        }
        let syms: Vec<Symbol> = cube.star_positions().into_iter().map(|p| self.symbol(p)).collect();
        SubfaceCode::from_symbols(&syms)
    }

    /// Inverse of [`localize`](Self::localize): fills the stars of `cube` with `self`'s symbols.
    pub fn lift(&self, cube: &SubfaceCode) -> Result<SubfaceCode, HypercubeError> {
        let pos = cube.star_positions();
        if pos.len() != self.len() {
            return Err(HypercubeError::WrongLength(*self, pos.len()));
        }
        let mut out = *cube;
        for (k, p) in pos.into_iter().enumerate() {
            out.set(p, self.symbol(k));
        }
        Ok(out)
    }

    /// Vertex obtained by replacing the stars with the given bits, left to right.
    pub fn vertex(&self, fill: &[u8]) -> Vec<u8> {
        let mut it = fill.iter();
        (0..self.len())
            .map(|i| match self.symbol(i) {
                Symbol::Star => *it.next().expect("enough fill bits"),
                Symbol::Zero => 0,
                Symbol::One => 1,
            })
            .collect()
    }
}

impl Ord for SubfaceCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.symbols().cmp(&other.symbols())
    }
}

impl PartialOrd for SubfaceCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubfaceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for SubfaceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for SubfaceCode {
    type Err = HypercubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syms = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Symbol::Zero),
                '1' => Ok(Symbol::One),
                '*' => Ok(Symbol::Star),
                other => Err(HypercubeError::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SubfaceCode::from_symbols(&syms)
    }
}

impl Serialize for SubfaceCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubfaceCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a code known to be valid. Panics otherwise; meant for literals.
pub fn code(s: &str) -> SubfaceCode {
    s.parse().unwrap_or_else(|e| panic!("bad subface literal {s:?}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Incoming,
    Outgoing,
}

/// The orientation sequence `0, 1, 0, 1, …` indexed from 1.
pub fn zeta(i: usize) -> u8 {
    assert!(i >= 1, "zeta is indexed from 1");
    if i % 2 == 1 {
        0
    } else {
        1
    }
}

pub fn classify(parent: &SubfaceCode, child: &SubfaceCode) -> Result<Orientation, HypercubeError> {
    let not_sub = || HypercubeError::NotSubface { parent: *parent, child: *child };
    if !parent.contains(child) || child.dimension() + 1 != parent.dimension() {
        return Err(not_sub());
    }
    let (k, pos) = parent
        .star_positions()
        .into_iter()
        .enumerate()
        .find(|&(_, p)| child.symbol(p) != Symbol::Star)
        .ok_or_else(not_sub)?;
    let bit = match child.symbol(pos) {
        Symbol::Zero => 0,
        Symbol::One => 1,
        Symbol::Star => unreachable!(),
    };
    Ok(if bit == zeta(k + 1) { Orientation::Incoming } else { Orientation::Outgoing })
}

/// The four edges of a 2-face with their roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeRoles {
    pub i1: SubfaceCode,
    pub i2: SubfaceCode,
    pub o1: SubfaceCode,
    pub o2: SubfaceCode,
}

impl EdgeRoles {
    /// `[i1, i2, o1, o2]`.
    pub fn as_array(&self) -> [SubfaceCode; 4] {
        [self.i1, self.i2, self.o1, self.o2]
    }
}

/// Labels the edges of a 2-face: `i1` fixes the first star to 0, `i2` the
/// second to 1, `o1` the first to 1, `o2` the second to 0.
pub fn edge_roles(two_face: &SubfaceCode) -> Result<EdgeRoles, HypercubeError> {
    let stars = two_face.star_positions();
    if stars.len() != 2 {
        return Err(HypercubeError::WrongDimension { code: *two_face, expected: 2, actual: stars.len() });
    }
    let (a, b) = (stars[0], stars[1]);
    Ok(EdgeRoles {
        i1: two_face.with(a, Symbol::bit(zeta(1))),
        i2: two_face.with(b, Symbol::bit(zeta(2))),
        o1: two_face.with(a, Symbol::bit(1 - zeta(1))),
        o2: two_face.with(b, Symbol::bit(1 - zeta(2))),
    })
}

/// Reverses the coordinate order (for length 4: positions 1↔4, 2↔3).
pub fn reverse_transform(code: &SubfaceCode) -> SubfaceCode {
    let mut syms = code.symbols();
    syms.reverse();
    SubfaceCode::from_symbols(&syms).expect("same length")
}

/// All `k`-dimensional subfaces of `code`, sorted with `0 < 1 < *`.
pub fn subfaces(code: &SubfaceCode, k: usize) -> Vec<SubfaceCode> {
    let stars = code.star_positions();
    let d = stars.len();
    if k > d {
        return Vec::new();
    }
    let mut out = Vec::new();
    for keep in 0u32..(1 << d) {
        if keep.count_ones() as usize != k {
            continue;
        }
        let fixed: Vec<usize> = (0..d).filter(|j| keep >> j & 1 == 0).collect();
        for bits in 0u32..(1 << fixed.len()) {
            let mut c = *code;
            for (m, &j) in fixed.iter().enumerate() {
                c.set(stars[j], Symbol::bit((bits >> m & 1) as u8));
            }
            out.push(c);
        }
    }
    out.sort();
    out
}

/// Codimension-one subfaces of `face` with the given orientation, in the
/// order of the star they fix.
pub fn oriented_facets(face: &SubfaceCode, orientation: Orientation) -> Vec<SubfaceCode> {
    face.star_positions()
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let z = zeta(k + 1);
            let bit = if orientation == Orientation::Incoming { z } else { 1 - z };
            face.with(p, Symbol::bit(bit))
        })
        .collect()
}

/// Edge choices on the 3-cubes of the 4-cube for the two sides of the
/// tetrahedron equation. Columns keep their printed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeChoiceTables {
    pub lte: Vec<(SubfaceCode, [SubfaceCode; 3])>,
    pub rte: Vec<(SubfaceCode, [SubfaceCode; 3])>,
}

const LTE_TABLE: [(&str, [&str; 3]); 4] = [
    ("0***", ["01*0", "000*", "0*11"]),
    ("*1**", ["011*", "*100", "11*1"]),
    ("**0*", ["0*00", "110*", "*001"]),
    ("***1", ["00*1", "*111", "1*01"]),
];

const RTE_TABLE: [(&str, [&str; 3]); 4] = [
    ("***0", ["1*00", "00*0", "*110"]),
    ("**1*", ["0*10", "111*", "*011"]),
    ("*0**", ["001*", "*000", "10*1"]),
    ("1***", ["100*", "1*11", "11*0"]),
];

fn parse_table(t: &[(&str, [&str; 3]); 4]) -> Vec<(SubfaceCode, [SubfaceCode; 3])> {
    t.iter().map(|(k, es)| (code(k), es.map(code))).collect()
}

impl EdgeChoiceTables {
    /// The compiled-in left/right edge choices.
    pub fn standard() -> Self {
        Self { lte: parse_table(&LTE_TABLE), rte: parse_table(&RTE_TABLE) }
    }

    pub fn lte_edges(&self) -> Vec<SubfaceCode> {
        self.lte.iter().flat_map(|(_, es)| es.iter().copied()).collect()
    }

    pub fn rte_edges(&self) -> Vec<SubfaceCode> {
        self.rte.iter().flat_map(|(_, es)| es.iter().copied()).collect()
    }

    /// Checks key sets, edge membership, distinctness and disjointness.
    pub fn validate(&self) -> Result<(), HypercubeError> {
        let full = SubfaceCode::full(4);
        let incoming: Vec<_> = oriented_facets(&full, Orientation::Incoming);
        let outgoing: Vec<_> = oriented_facets(&full, Orientation::Outgoing);
        let mut lk: Vec<_> = self.lte.iter().map(|(k, _)| *k).collect();
        let mut rk: Vec<_> = self.rte.iter().map(|(k, _)| *k).collect();
        lk.sort();
        rk.sort();
        let (mut inc, mut out) = (incoming.clone(), outgoing.clone());
        inc.sort();
        out.sort();
        if lk != inc {
            return Err(HypercubeError::InvalidTable(format!("left keys {lk:?} != incoming 3-faces {inc:?}")));
        }
        if rk != out {
            return Err(HypercubeError::InvalidTable(format!("right keys {rk:?} != outgoing 3-faces {out:?}")));
        }
        for (key, edges) in self.lte.iter().chain(self.rte.iter()) {
            for e in edges {
                if e.dimension() != 1 || !key.contains(e) {
                    return Err(HypercubeError::InvalidTable(format!("{e} is not an edge of {key}")));
                }
            }
        }
        let distinct = |v: &[SubfaceCode]| {
            let mut s = v.to_vec();
            s.sort();
            s.dedup();
            s.len() == v.len()
        };
        let (l, r) = (self.lte_edges(), self.rte_edges());
        if !distinct(&l) || !distinct(&r) {
            return Err(HypercubeError::InvalidTable("repeated edge within one side".into()));
        }
        if let Some(e) = l.iter().find(|e| r.contains(e)) {
            return Err(HypercubeError::InvalidTable(format!("edge {e} appears on both sides")));
        }
        Ok(())
    }
}

/// Image of each left edge under [`reverse_transform`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExchangeReport {
    pub holds: bool,
    /// `(edge, image, image is a right-side edge)`
    pub images: Vec<(SubfaceCode, SubfaceCode, bool)>,
}

/// True iff the reversed `source` set equals the `target` set.
pub fn reversal_maps_onto(source: &[SubfaceCode], target: &[SubfaceCode]) -> bool {
    let mut a: Vec<_> = source.iter().map(reverse_transform).collect();
    let mut b = target.to_vec();
    a.sort();
    b.sort();
    a == b
}

pub fn exchange_invariant_check(tables: &EdgeChoiceTables) -> ExchangeReport {
    let rte = tables.rte_edges();
    let lte = tables.lte_edges();
    let images = lte
        .iter()
        .map(|e| {
            let img = reverse_transform(e);
            (*e, img, rte.contains(&img))
        })
        .collect();
    ExchangeReport { holds: reversal_maps_onto(&lte, &rte), images }
}

/// Both tables keyed by cube code, for JSON dumps.
pub fn tables_as_map(tables: &EdgeChoiceTables) -> BTreeMap<String, BTreeMap<String, Vec<String>>> {
    let side = |v: &[(SubfaceCode, [SubfaceCode; 3])]| {
        v.iter().map(|(k, es)| (k.to_string(), es.iter().map(|e| e.to_string()).collect())).collect::<BTreeMap<_, _>>()
    };
    let mut m = BTreeMap::new();
    m.insert("lte".to_string(), side(&tables.lte));
    m.insert("rte".to_string(), side(&tables.rte));
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeta_alternates() {
        assert_eq!(zeta(1), 0);
        assert_eq!(zeta(2), 1);
        assert_eq!(zeta(3), 0);
        assert_eq!(zeta(4), 1);
    }

    #[test]
    fn zeta_reproduces_left_header() {
        let mut inc = oriented_facets(&code("****"), Orientation::Incoming);
        inc.sort();
        let mut header: Vec<_> = ["0***", "*1**", "**0*", "***1"].map(code).to_vec();
        header.sort();
        assert_eq!(inc, header);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&code("****"), &code("0***")).unwrap(), Orientation::Incoming);
        assert_eq!(classify(&code("****"), &code("***0")).unwrap(), Orientation::Outgoing);
        assert_eq!(classify(&code("**"), &code("0*")).unwrap(), Orientation::Incoming);
        assert_eq!(classify(&code("0***"), &code("00**")).unwrap(), Orientation::Incoming);
    }

    #[test]
    fn classify_rejects_non_facets() {
        assert!(classify(&code("****"), &code("00**")).is_err());
        assert!(classify(&code("0***"), &code("1*1*")).is_err());
        assert!(classify(&code("***"), &code("***")).is_err());
    }

    #[test]
    fn edge_roles_examples() {
        let r = edge_roles(&code("**")).unwrap();
        assert_eq!(r.as_array(), ["0*", "*1", "1*", "*0"].map(code));
        let r = edge_roles(&code("0**")).unwrap();
        assert_eq!(r.as_array(), ["00*", "0*1", "01*", "0*0"].map(code));
        let r = edge_roles(&code("**1")).unwrap();
        assert_eq!(r.as_array(), ["0*1", "*11", "1*1", "*01"].map(code));
        assert!(edge_roles(&code("***")).is_err());
    }

    #[test]
    fn edge_roles_cover_each_edge_once() {
        for face in subfaces(&code("****"), 2) {
            let mut roles = edge_roles(&face).unwrap().as_array().to_vec();
            roles.sort();
            assert_eq!(roles, subfaces(&face, 1));
        }
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse_transform(&code("0***")), code("***0"));
        assert_eq!(reverse_transform(&code("01*0")), code("0*10"));
        assert_eq!(reverse_transform(&code("****")), code("****"));
    }

    #[test]
    fn reversal_maps_headers_in_order() {
        let t = EdgeChoiceTables::standard();
        for ((l, _), (r, _)) in t.lte.iter().zip(t.rte.iter()) {
            assert_eq!(reverse_transform(l), *r);
        }
    }

    #[test]
    fn subfaces_examples() {
        let two = subfaces(&code("***"), 2);
        let mut expected = ["0**", "1**", "*0*", "*1*", "**0", "**1"].map(code).to_vec();
        expected.sort();
        assert_eq!(two, expected);
        assert_eq!(subfaces(&code("**"), 0), ["00", "01", "10", "11"].map(code).to_vec());
        let e = subfaces(&code("0***"), 1);
        assert_eq!(e.len(), 12);
        assert!(e.iter().all(|x| x.symbol(0) == Symbol::Zero && x.dimension() == 1));
    }

    #[test]
    fn lexicographic_order_puts_star_last() {
        assert!(code("0*") < code("1*"));
        assert!(code("1*") < code("*0"));
        assert!(code("*0") < code("*1"));
    }

    #[test]
    fn facet_orientation_counts() {
        for n in 1..=4 {
            for k in 1..=n {
                for face in subfaces(&SubfaceCode::full(n), k) {
                    let facets = subfaces(&face, k - 1);
                    let inc = facets.iter().filter(|f| classify(&face, f).unwrap() == Orientation::Incoming).count();
                    assert_eq!(inc, k);
                    assert_eq!(facets.len() - inc, k);
                }
            }
        }
    }

    #[test]
    fn standard_tables_validate_and_exchange() {
        let t = EdgeChoiceTables::standard();
        t.validate().unwrap();
        let report = exchange_invariant_check(&t);
        assert!(report.holds);
        assert!(report.images.iter().all(|(_, _, ok)| *ok));
    }

    #[test]
    fn perturbed_table_breaks_exchange() {
        let mut t = EdgeChoiceTables::standard();
        t.rte[3].1[1] = code("1*10");
        assert!(!exchange_invariant_check(&t).holds);
        let mut t = EdgeChoiceTables::standard();
        t.rte[0].1[0] = code("11*1");
        assert!(!exchange_invariant_check(&t).holds);
    }

    #[test]
    fn left_table_is_not_reversal_closed() {
        let t = EdgeChoiceTables::standard();
        assert!(!reversal_maps_onto(&t.lte_edges(), &t.lte_edges()));
    }

    #[test]
    fn validation_catches_bad_tables() {
        let mut t = EdgeChoiceTables::standard();
        t.lte[0].1[0] = code("11*0");
        assert!(t.validate().is_err());
        let mut t = EdgeChoiceTables::standard();
        t.rte[0].1[0] = t.lte[3].1[2];
        assert!(t.validate().is_err());
    }

    #[test]
    fn localize_and_lift() {
        let cube = code("0***");
        let local = code("01*0").localize(&cube).unwrap();
        assert_eq!(local, code("1*0"));
        assert_eq!(local.lift(&cube).unwrap(), code("01*0"));
        assert!(code("11*0").localize(&cube).is_err());
    }

    #[test]
    fn parse_errors() {
        assert_eq!("0x".parse::<SubfaceCode>(), Err(HypercubeError::InvalidSymbol('x')));
        assert_eq!("*******".parse::<SubfaceCode>(), Err(HypercubeError::TooLong));
    }

    fn arb_code() -> impl Strategy<Value = SubfaceCode> {
        proptest::collection::vec(prop_oneof![Just(Symbol::Zero), Just(Symbol::One), Just(Symbol::Star)], 0..=6)
            .prop_map(|v| SubfaceCode::from_symbols(&v).unwrap())
    }

    proptest! {
        #[test]
        fn reverse_is_involution(c in arb_code()) {
            prop_assert_eq!(reverse_transform(&reverse_transform(&c)), c);
            prop_assert_eq!(reverse_transform(&c).dimension(), c.dimension());
        }

        #[test]
        fn display_parse_roundtrip(c in arb_code()) {
            prop_assert_eq!(c.to_string().parse::<SubfaceCode>().unwrap(), c);
        }

        #[test]
        fn subfaces_have_requested_dimension(c in arb_code(), k in 0usize..4) {
            let subs = subfaces(&c, k);
            for s in &subs {
                prop_assert_eq!(s.dimension(), k);
                prop_assert!(c.contains(s));
            }
        }
    }
}
