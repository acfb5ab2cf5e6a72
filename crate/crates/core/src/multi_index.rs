//! Multi-indices in I(n,r) = {1..n}^r, their statistics and the two commuting
//! actions: W_n on values (left) and the symmetric group on places (right).

use std::fmt;

use crate::error::{Error, Result};

/// An r-tuple of values in 1..=n, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: usize,
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self> {
        if let Some(v) = entries.iter().find(|&&v| v == 0 || v > n) {
            return Err(Error::InvalidArgument(format!("value {v} outside 1..={n}")));
        }
        Ok(MultiIndex { n, entries })
    }

    pub(crate) fn new_unchecked(n: usize, entries: Vec<usize>) -> Self {
        MultiIndex { n, entries }
    }

    /// Parses "432" (values ≤ 9) or "10,3,2".
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let entries: Option<Vec<usize>> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
        };
        let entries = entries.ok_or_else(|| Error::Parse(format!("bad multi-index {s:?}")))?;
        Self::new(n, entries)
    }

    /// The multi-index at flat position `idx` of the lexicographic order.
    pub fn from_flat(n: usize, r: usize, mut idx: usize) -> Self {
        let mut entries = vec![0; r];
        for slot in entries.iter_mut().rev() {
            *slot = idx % n + 1;
            idx /= n;
        }
        MultiIndex { n, entries }
    }

    pub fn flat(&self) -> usize {
        flat_of(self.n, &self.entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// #(i): number of distinct values.
    pub fn sharp(&self) -> usize {
        let mut seen = vec![false; self.n + 1];
        self.entries.iter().filter(|&&v| !std::mem::replace(&mut seen[v], true)).count()
    }

    pub fn is_injective(&self) -> bool {
        self.sharp() == self.r()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.entries.contains(&v)
    }

    /// Λ_v: the places (1-based) holding value v.
    pub fn lambda(&self, v: usize) -> Vec<usize> {
        self.entries.iter().enumerate().filter(|(_, &x)| x == v).map(|(a, _)| a + 1).collect()
    }

    pub fn value_type(&self) -> ValueType {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of_value = vec![usize::MAX; self.n + 1];
        for (a, &v) in self.entries.iter().enumerate() {
            if block_of_value[v] == usize::MAX {
                block_of_value[v] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of_value[v]].push(a + 1);
        }
        ValueType { blocks }
    }

    /// μ_v = number of places with value v, for v = 1..n.
    pub fn weight(&self) -> Vec<usize> {
        let mut w = vec![0; self.n];
        for &v in &self.entries {
            w[v - 1] += 1;
        }
        w
    }

    /// w·i = (w(i_1), …, w(i_r)).
    pub fn act_left(&self, w: &Permutation) -> Result<Self> {
        if w.n() != self.n {
            return Err(Error::Dimension(format!("permutation on {} symbols acting on values in 1..={}", w.n(), self.n)));
        }
        Ok(MultiIndex { n: self.n, entries: self.entries.iter().map(|&v| w.apply(v)).collect() })
    }

    /// i^σ: the value at place α moves to place σ(α).
    pub fn act_right(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.n() != self.r() {
            return Err(Error::Dimension(format!("permutation of {} places acting on {} places", sigma.n(), self.r())));
        }
        let mut out = vec![0; self.r()];
        for (a, &v) in self.entries.iter().enumerate() {
            out[sigma.apply(a + 1) - 1] = v;
        }
        Ok(MultiIndex { n: self.n, entries: out })
    }

    /// Removes place α (1-based).
    pub fn remove_place(&self, alpha: usize) -> Self {
        let mut e = self.entries.clone();
        e.remove(alpha - 1);
        MultiIndex { n: self.n, entries: e }
    }

    /// Inserts value v so that it occupies place α (1-based).
    pub fn insert_place(&self, alpha: usize, v: usize) -> Self {
        let mut e = self.entries.clone();
        e.insert(alpha - 1, v);
        MultiIndex { n: self.n, entries: e }
    }

    /// Applies a value map and reinterprets over `n` symbols.
    pub fn map_values(&self, n: usize, f: impl Fn(usize) -> usize) -> Self {
        MultiIndex { n, entries: self.entries.iter().map(|&v| f(v)).collect() }
    }
}

pub(crate) fn flat_of(n: usize, entries: &[usize]) -> usize {
    entries.iter().fold(0, |acc, &v| acc * n + (v - 1))
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 9 {
            for v in &self.entries {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.entries.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

/// The partition of places {1..r} by equal values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueType {
    blocks: Vec<Vec<usize>>,
}

impl ValueType {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// A bijection of {1..n}, stored as its one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    /// w₀(j) = n+1−j.
    pub fn longest(n: usize) -> Self {
        Permutation { images: (1..=n).rev().collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Permutation { images }
    }

    /// All permutations of 1..n in lexicographic order of one-line notation.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                return out;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    /// (self · other)(x) = self(other(x)).
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation { images: other.images.iter().map(|&x| self.apply(x)).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    pub fn fixes(&self, x: usize) -> bool {
        self.apply(x) == x
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|v| v.to_string()).collect();
        if self.n() <= 9 {
            write!(f, "{}", parts.concat())
        } else {
            write!(f, "{}", parts.join(","))
        }
    }
}

/// I(n,r) in lexicographic order.
pub fn enumerate_i(n: usize, r: usize) -> Vec<MultiIndex> {
    (0..n.pow(r as u32)).map(|k| MultiIndex::from_flat(n, r, k)).collect()
}

/// I′(n,r): injective multi-indices in lexicographic order.
pub fn enumerate_iprime(n: usize, r: usize) -> Vec<MultiIndex> {
    if r > n {
        return Vec::new();
    }
    enumerate_i(n, r).into_iter().filter(|i| i.is_injective()).collect()
}

/// One α-slice of I′(n,r): all injective indices agreeing off place α.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSlice {
    pub alpha: usize,
    pub context: MultiIndex,
    pub members: Vec<MultiIndex>,
}

/// All α-slices of I′(n,r), ordered by α then by context.
pub fn alpha_slices_of_iprime(n: usize, r: usize) -> Vec<IndexSlice> {
    let mut out = Vec::new();
    if r == 0 || r > n {
        return out;
    }
    for alpha in 1..=r {
        for context in enumerate_iprime(n, r - 1) {
            let members: Vec<MultiIndex> =
                (1..=n).filter(|v| !context.contains(*v)).map(|v| context.insert_place(alpha, v)).collect();
            out.push(IndexSlice { alpha, context, members });
        }
    }
    out
}

/// Lexicographically least pair in the orbit of (i, j) under simultaneous
/// place permutation.
pub fn orbit_canonical(i: &MultiIndex, j: &MultiIndex) -> (MultiIndex, MultiIndex) {
    let r = i.r();
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for sigma in Permutation::all(r) {
        let a = i.act_right(&sigma).unwrap().entries;
        let b = j.act_right(&sigma).unwrap().entries;
        if best.as_ref().map(|(x, y)| (&a, &b) < (x, y)).unwrap_or(true) {
            best = Some((a, b));
        }
    }
    let (a, b) = best.unwrap_or_default();
    (MultiIndex::new_unchecked(i.n(), a), MultiIndex::new_unchecked(j.n(), b))
}

/// Canonical representatives of Ω(n,r), the place-permutation orbits on I(n,r)².
pub fn enumerate_orbits_omega(n: usize, r: usize) -> Vec<(MultiIndex, MultiIndex)> {
    let all = enumerate_i(n, r);
    let mut reps = std::collections::BTreeSet::new();
    for i in &all {
        for j in &all {
            reps.insert(orbit_canonical(i, j));
        }
    }
    reps.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(n: usize, s: &str) -> MultiIndex {
        MultiIndex::parse(n, s).unwrap()
    }

    #[test]
    fn value_types() {
        // abbcabc with a=1, b=2, c=3
        assert_eq!(mi(3, "1223123").value_type().to_string(), "{1,5}|{2,3,6}|{4,7}");
        assert_eq!(mi(1, "111").value_type().to_string(), "{1,2,3}");
        assert_eq!(mi(3, "123").value_type().to_string(), "{1}|{2}|{3}");
    }

    #[test]
    fn weights() {
        assert_eq!(mi(3, "1213").weight(), vec![2, 1, 1]);
        assert_eq!(mi(2, "222").weight(), vec![0, 3]);
    }

    #[test]
    fn actions() {
        let w = Permutation::new(vec![2, 1]).unwrap();
        assert_eq!(mi(2, "1122").act_left(&w).unwrap(), mi(2, "2211"));
        let s = Permutation::transposition(3, 1, 2);
        assert_eq!(mi(3, "123").act_right(&s).unwrap(), mi(3, "213"));
        assert!(mi(3, "123").act_right(&Permutation::identity(2)).is_err());
        assert!(mi(3, "123").act_left(&Permutation::identity(2)).is_err());
    }

    #[test]
    fn right_action_places_value_at_image() {
        // σ = 3-cycle 1→2→3→1: value at place 1 moves to place 2
        let s = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(mi(3, "123").act_right(&s).unwrap(), mi(3, "312"));
    }

    #[test]
    fn sharp_and_iprime() {
        assert_eq!(mi(3, "1213").sharp(), 3);
        assert_eq!(enumerate_iprime(5, 2).len(), 20);
        assert!(enumerate_iprime(2, 3).is_empty());
        let ip = enumerate_iprime(3, 2);
        assert!(ip.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn slices() {
        let s = alpha_slices_of_iprime(2, 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].members, vec![mi(2, "1"), mi(2, "2")]);

        let s = alpha_slices_of_iprime(3, 2);
        let x = mi(3, "12");
        let containing: Vec<Vec<MultiIndex>> =
            s.iter().filter(|sl| sl.members.contains(&x)).map(|sl| sl.members.clone()).collect();
        assert_eq!(containing, vec![vec![mi(3, "12"), mi(3, "32")], vec![mi(3, "12"), mi(3, "13")]]);

        for (n, r) in [(3, 1), (4, 2), (5, 2), (5, 3)] {
            let slices = alpha_slices_of_iprime(n, r);
            assert!(slices.iter().all(|sl| sl.members.len() == n - r + 1));
            for x in enumerate_iprime(n, r) {
                assert_eq!(slices.iter().filter(|sl| sl.members.contains(&x)).count(), r);
            }
        }
    }

    #[test]
    fn omega_sizes() {
        assert_eq!(enumerate_orbits_omega(2, 1).len(), 4);
        assert_eq!(enumerate_orbits_omega(2, 2).len(), 10);
        assert_eq!(orbit_canonical(&mi(2, "12"), &mi(2, "21")), orbit_canonical(&mi(2, "21"), &mi(2, "12")));
    }

    /// Burnside count of simultaneous place-permutation orbits.
    #[test]
    fn omega_matches_burnside() {
        for (n, r) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let perms = Permutation::all(r);
            let mut fixed_total = 0usize;
            for s in &perms {
                let all = enumerate_i(n, r);
                let fixed = all.iter().filter(|i| i.act_right(s).unwrap() == **i).count();
                fixed_total += fixed * fixed;
            }
            assert_eq!(enumerate_orbits_omega(n, r).len(), fixed_total / perms.len());
        }
    }

    #[test]
    fn value_type_count_is_bounded_partition_count() {
        // set partitions of {1..r} into at most n blocks, by recursion S(r,k)
        fn stirling(r: usize, k: usize) -> usize {
            match (r, k) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 0,
                _ => k * stirling(r - 1, k) + stirling(r - 1, k - 1),
            }
        }
        for n in 1..=4 {
            for r in 1..=4 {
                let vts: std::collections::BTreeSet<_> = enumerate_i(n, r).iter().map(|i| i.value_type()).collect();
                let expected: usize = (1..=n).map(|k| stirling(r, k)).sum();
                assert_eq!(vts.len(), expected, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn permutations() {
        assert_eq!(Permutation::all(3).len(), 6);
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::all(1).len(), 1);
        let w = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(w.compose(&w.inverse()), Permutation::identity(3));
        assert_eq!(Permutation::longest(4).to_string(), "4321");
        assert!(Permutation::new(vec![1, 1]).is_err());
    }

    #[test]
    fn text_forms() {
        assert_eq!(mi(5, "432").to_string(), "432");
        let big = MultiIndex::new(12, vec![10, 3, 2]).unwrap();
        assert_eq!(big.to_string(), "10,3,2");
        assert_eq!(MultiIndex::parse(12, "10,3,2").unwrap(), big);
        assert!(MultiIndex::parse(3, "14").is_err());
        assert_eq!(mi(4, "3142").flat(), enumerate_i(4, 4).iter().position(|x| *x == mi(4, "3142")).unwrap());
    }

    fn perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn actions_commute(w in perm(4), s in perm(3), e in prop::collection::vec(1usize..=4, 3)) {
            let i = MultiIndex::new(4, e).unwrap();
            prop_assert_eq!(
                i.act_right(&s).unwrap().act_left(&w).unwrap(),
                i.act_left(&w).unwrap().act_right(&s).unwrap()
            );
            prop_assert_eq!(i.act_left(&w).unwrap().value_type(), i.value_type());
            prop_assert_eq!(i.act_right(&s).unwrap().weight(), i.weight());
        }
    }
}
