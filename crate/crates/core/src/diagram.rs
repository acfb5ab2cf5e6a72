//! Partition diagrams on two rows of r vertices and their multiplication.
//!
//! Vertices are numbered internally 0..2r: top vertex α is α−1 and bottom
//! vertex α′ is r+α−1. Text form uses 1-based labels with primes for the
//! bottom row, e.g. `{1,3,3',4'}|{2,1'}|{4}|{5,2',5'}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagram {
    r: usize,
    blocks: Vec<Vec<usize>>,
}

/// δ^k · d, with δ kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScaledDiagram {
    pub exponent: u32,
    pub diagram: Diagram,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

impl Diagram {
    /// Builds a diagram from arbitrary blocks, validating and canonicalising.
    pub fn from_blocks(r: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("diagram rank must be positive".into()));
        }
        let mut seen = vec![false; 2 * r];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            for &v in b {
                if v >= 2 * r || seen[v] {
                    return Err(Error::InvalidArgument(format!("vertex {v} repeated or out of range")));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("blocks do not cover all vertices".into()));
        }
        Ok(Self::canonical(r, blocks))
    }

    fn canonical(r: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Diagram { r, blocks }
    }

    /// Builds a diagram from a block label per vertex.
    pub fn from_labels(r: usize, labels: &[usize]) -> Self {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (v, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(v);
        }
        Self::canonical(r, groups.into_values().collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn top(alpha: usize) -> usize {
        alpha - 1
    }

    pub fn bottom(r: usize, alpha: usize) -> usize {
        r + alpha - 1
    }

    pub fn identity(r: usize) -> Self {
        Self::canonical(r, (0..r).map(|a| vec![a, r + a]).collect())
    }

    fn check_place(r: usize, alpha: usize) -> Result<()> {
        if r == 0 || alpha == 0 || alpha > r {
            return Err(Error::InvalidArgument(format!("place {alpha} out of range 1..={r}")));
        }
        Ok(())
    }

    fn check_pair(r: usize, alpha: usize, beta: usize) -> Result<()> {
        Self::check_place(r, alpha)?;
        Self::check_place(r, beta)?;
        if alpha >= beta {
            return Err(Error::InvalidArgument(format!("need alpha < beta, got {alpha}, {beta}")));
        }
        Ok(())
    }

    /// p_α: singletons {α}, {α′}; verticals elsewhere.
    pub fn generator_p(r: usize, alpha: usize) -> Result<Self> {
        Self::check_place(r, alpha)?;
        let a = alpha - 1;
        let mut blocks: Vec<Vec<usize>> = (0..r).filter(|&b| b != a).map(|b| vec![b, r + b]).collect();
        blocks.push(vec![a]);
        blocks.push(vec![r + a]);
        Ok(Self::canonical(r, blocks))
    }

    /// p_{α,β}: the block {α, β, α′, β′}; verticals elsewhere.
    pub fn generator_pp(r: usize, alpha: usize, beta: usize) -> Result<Self> {
        Self::check_pair(r, alpha, beta)?;
        let (a, b) = (alpha - 1, beta - 1);
        let mut blocks: Vec<Vec<usize>> = (0..r).filter(|&c| c != a && c != b).map(|c| vec![c, r + c]).collect();
        blocks.push(vec![a, b, r + a, r + b]);
        Ok(Self::canonical(r, blocks))
    }

    /// s_{α,β}: blocks {α, β′} and {β, α′}; verticals elsewhere.
    pub fn generator_s(r: usize, alpha: usize, beta: usize) -> Result<Self> {
        Self::check_pair(r, alpha, beta)?;
        let (a, b) = (alpha - 1, beta - 1);
        let mut blocks: Vec<Vec<usize>> = (0..r).filter(|&c| c != a && c != b).map(|c| vec![c, r + c]).collect();
        blocks.push(vec![a, r + b]);
        blocks.push(vec![b, r + a]);
        Ok(Self::canonical(r, blocks))
    }

    /// All p_α, then all p_{α,β}, then all s_{α,β}.
    pub fn generators(r: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (1..=r).map(|a| Self::generator_p(r, a).unwrap()).collect();
        for a in 1..=r {
            for b in a + 1..=r {
                out.push(Self::generator_pp(r, a, b).unwrap());
            }
        }
        for a in 1..=r {
            for b in a + 1..=r {
                out.push(Self::generator_s(r, a, b).unwrap());
            }
        }
        out
    }

    /// Stacks `self` above `other` and removes interior components.
    pub fn multiply(&self, other: &Diagram) -> Result<ScaledDiagram> {
        if self.r != other.r {
            return Err(Error::InvalidArgument(format!("rank mismatch: {} vs {}", self.r, other.r)));
        }
        let r = self.r;
        // 0..r top of self, r..2r middle, 2r..3r bottom of other.
        let mut uf = UnionFind::new(3 * r);
        for b in &self.blocks {
            for w in b.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        for b in &other.blocks {
            let shifted: Vec<usize> = b.iter().map(|&v| v + r).collect();
            for w in shifted.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut touches_outer = vec![false; 3 * r];
        for v in (0..r).chain(2 * r..3 * r) {
            let root = uf.find(v);
            touches_outer[root] = true;
        }
        let mut interior = std::collections::BTreeSet::new();
        for v in r..2 * r {
            let root = uf.find(v);
            if !touches_outer[root] {
                interior.insert(root);
            }
        }
        let labels: Vec<usize> = (0..r).chain(2 * r..3 * r).map(|v| uf.find(v)).collect();
        Ok(ScaledDiagram { exponent: interior.len() as u32, diagram: Self::from_labels(r, &labels) })
    }

    /// All set partitions of the 2r vertices in restricted-growth-string order.
    pub fn enumerate(r: usize) -> Vec<Self> {
        let m = 2 * r;
        let mut out = Vec::new();
        if r == 0 {
            return out;
        }
        let mut a = vec![0usize; m];
        loop {
            out.push(Self::from_labels(r, &a));
            // next restricted growth string
            let mut i = m - 1;
            loop {
                let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
                if i > 0 && a[i] <= max_prefix {
                    a[i] += 1;
                    for x in a[i + 1..].iter_mut() {
                        *x = 0;
                    }
                    break;
                }
                if i == 0 {
                    return out;
                }
                i -= 1;
            }
        }
    }

    /// True when top vertex r and bottom vertex r′ share a block.
    pub fn is_half_algebra_member(&self) -> bool {
        let r = self.r;
        self.blocks.iter().any(|b| b.contains(&(r - 1)) && b.contains(&(2 * r - 1)))
    }

    fn label(&self, v: usize) -> String {
        if v < self.r {
            format!("{}", v + 1)
        } else {
            format!("{}'", v - self.r + 1)
        }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|&v| self.label(v)).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl FromStr for Diagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("diagram {s:?}: {why}"));
        let mut raw: Vec<Vec<(usize, bool)>> = Vec::new();
        for part in s.trim().split('|') {
            let inner = part
                .trim()
                .strip_prefix('{')
                .and_then(|p| p.strip_suffix('}'))
                .ok_or_else(|| bad("blocks must be braced"))?;
            let mut block = Vec::new();
            for tok in inner.split(',') {
                let tok = tok.trim();
                let (num, bottom) = match tok.strip_suffix('\'') {
                    Some(t) => (t, true),
                    None => (tok, false),
                };
                let k: usize = num.parse().map_err(|_| bad("bad vertex label"))?;
                if k == 0 {
                    return Err(bad("labels start at 1"));
                }
                block.push((k, bottom));
            }
            raw.push(block);
        }
        let r = raw.iter().flatten().map(|(k, _)| *k).max().ok_or_else(|| bad("no vertices"))?;
        let blocks = raw
            .into_iter()
            .map(|b| b.into_iter().map(|(k, bottom)| if bottom { r + k - 1 } else { k - 1 }).collect())
            .collect();
        Diagram::from_blocks(r, blocks).map_err(|e| bad(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Diagram {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        let s = "{1,3,3',4'}|{2,1'}|{4}|{5,2',5'}";
        assert_eq!(d(s).to_string(), s);
        assert_eq!(d("{2,1'}|{3',3,1,4'}|{5',5,2'}|{4}").to_string(), s);
        assert!("{1,1'}|{1}".parse::<Diagram>().is_err());
        assert!("{1}".parse::<Diagram>().is_err());
    }

    #[test]
    fn generator_shapes() {
        assert_eq!(Diagram::generator_p(1, 1).unwrap(), d("{1}|{1'}"));
        assert_eq!(Diagram::generator_p(3, 2).unwrap(), d("{1,1'}|{2}|{2'}|{3,3'}"));
        assert_eq!(Diagram::generator_p(2, 1).unwrap(), d("{1}|{1'}|{2,2'}"));
        assert_eq!(Diagram::generator_pp(2, 1, 2).unwrap(), d("{1,2,1',2'}"));
        assert_eq!(Diagram::generator_s(2, 1, 2).unwrap(), d("{1,2'}|{2,1'}"));
        assert_eq!(Diagram::generator_s(3, 1, 3).unwrap(), d("{1,3'}|{3,1'}|{2,2'}"));
        assert!(Diagram::generator_p(2, 3).is_err());
        assert!(Diagram::generator_s(3, 2, 2).is_err());
        assert!(Diagram::generator_pp(3, 3, 1).is_err());
    }

    #[test]
    fn small_products() {
        let p1 = Diagram::generator_p(1, 1).unwrap();
        assert_eq!(p1.multiply(&p1).unwrap(), ScaledDiagram { exponent: 1, diagram: p1.clone() });
        let pp = Diagram::generator_pp(2, 1, 2).unwrap();
        assert_eq!(pp.multiply(&pp).unwrap(), ScaledDiagram { exponent: 0, diagram: pp.clone() });
        let s = Diagram::generator_s(2, 1, 2).unwrap();
        assert_eq!(s.multiply(&s).unwrap(), ScaledDiagram { exponent: 0, diagram: Diagram::identity(2) });
        assert!(s.multiply(&p1).is_err());
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(Diagram::enumerate(1).len(), 2);
        assert_eq!(Diagram::enumerate(2).len(), 15);
        assert_eq!(Diagram::enumerate(3).len(), 203);
        let all = Diagram::enumerate(3);
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 203);
    }

    /// Set partitions counted independently by the Bell triangle.
    #[test]
    fn enumeration_matches_bell_triangle() {
        let mut row = vec![1u64];
        let mut bell = vec![1u64];
        for _ in 0..8 {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            bell.push(next[0]);
            row = next;
        }
        for r in 1..=4 {
            assert_eq!(Diagram::enumerate(r).len() as u64, bell[2 * r]);
        }
    }

    #[test]
    fn half_membership() {
        assert!(Diagram::identity(3).is_half_algebra_member());
        assert!(!Diagram::generator_p(3, 3).unwrap().is_half_algebra_member());
        assert!(!Diagram::generator_s(3, 1, 3).unwrap().is_half_algebra_member());
    }

    #[test]
    fn associativity_exhaustive_r1() {
        let all = Diagram::enumerate(1);
        for a in &all {
            for b in &all {
                for c in &all {
                    let ab = a.multiply(b).unwrap();
                    let left = ab.diagram.multiply(c).unwrap();
                    let bc = b.multiply(c).unwrap();
                    let right = a.multiply(&bc.diagram).unwrap();
                    assert_eq!(left.diagram, right.diagram);
                    assert_eq!(ab.exponent + left.exponent, bc.exponent + right.exponent);
                }
            }
        }
    }

    #[test]
    fn identity_is_neutral() {
        for r in 1..=3 {
            let id = Diagram::identity(r);
            for x in Diagram::enumerate(r) {
                assert_eq!(id.multiply(&x).unwrap(), ScaledDiagram { exponent: 0, diagram: x.clone() });
                assert_eq!(x.multiply(&id).unwrap(), ScaledDiagram { exponent: 0, diagram: x.clone() });
            }
        }
    }

    #[test]
    fn generator_relations() {
        for r in 1..=4 {
            for a in 1..=r {
                let p = Diagram::generator_p(r, a).unwrap();
                assert_eq!(p.multiply(&p).unwrap(), ScaledDiagram { exponent: 1, diagram: p.clone() });
                for b in a + 1..=r {
                    let pp = Diagram::generator_pp(r, a, b).unwrap();
                    assert_eq!(pp.multiply(&pp).unwrap(), ScaledDiagram { exponent: 0, diagram: pp.clone() });
                    let s = Diagram::generator_s(r, a, b).unwrap();
                    assert_eq!(s.multiply(&s).unwrap().diagram, Diagram::identity(r));
                }
            }
        }
    }

    #[test]
    fn half_members_closed_under_product() {
        for r in 1..=3 {
            let members: Vec<Diagram> =
                Diagram::enumerate(r + 1).into_iter().filter(|x| x.is_half_algebra_member()).collect();
            for a in &members {
                for b in &members {
                    assert!(a.multiply(b).unwrap().diagram.is_half_algebra_member());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn associativity_r2(i in 0usize..15, j in 0usize..15, k in 0usize..15) {
            let all = Diagram::enumerate(2);
            let (a, b, c) = (&all[i], &all[j], &all[k]);
            let ab = a.multiply(b).unwrap();
            let left = ab.diagram.multiply(c).unwrap();
            let bc = b.multiply(c).unwrap();
            let right = a.multiply(&bc.diagram).unwrap();
            prop_assert_eq!(&left.diagram, &right.diagram);
            prop_assert_eq!(ab.exponent + left.exponent, bc.exponent + right.exponent);
        }
    }
}
