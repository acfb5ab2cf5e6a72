//! Division-free extension and decomposition of invariants.
//!
//! An invariant A ∈ E(n,r) is determined by ρ(A) together with its entries
//! on pairs of injective indices: entries with a repeated value copy the
//! restriction, and entries with differing value types vanish. The injective
//! entries are grouped into place-permutation orbits and solved for from the
//! slice equations, with a free pattern pinning the undetermined ones. The
//! solver only pivots on units, so everything runs over Z and Z/m.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariant::{block, check_membership, eta_unchecked, is_special, restrict, theta_unchecked};
use crate::multi_index::{enumerate_iprime, flat_of, MultiIndex, Permutation};
use crate::pattern::{build_f, Basis, Flavour, FreePattern, PatternEntry, Policy};
use crate::ring::{RingDescriptor, RingElement};
use crate::tensor::{Limits, TensorMatrix, SCHEMA};

type Key = Vec<u8>;

/// Canonical form of the pair (i, j) under simultaneous place permutation.
fn orbit_key(i: &[usize], j: &[usize]) -> Key {
    let mut pairs: Vec<(u8, u8)> = i.iter().zip(j).map(|(&a, &b)| (a as u8, b as u8)).collect();
    pairs.sort_unstable();
    pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()
}

fn same_value_type(i: &[usize], j: &[usize]) -> bool {
    (0..i.len()).all(|a| (a + 1..i.len()).all(|b| (i[a] == i[b]) == (j[a] == j[b])))
}

/// A place β holding a value already seen at an earlier place.
fn repeated_place(i: &[usize]) -> Option<usize> {
    (1..i.len()).find(|&b| i[..b].contains(&i[b]))
}

fn without(i: &[usize], place: usize) -> Vec<usize> {
    let mut v = i.to_vec();
    v.remove(place);
    v
}

fn is_injective(i: &[usize]) -> bool {
    repeated_place(i).is_none()
}

/// An invariant given by a materialised matrix in low degree and the orbit
/// values of its injective entries in each higher degree.
#[derive(Clone, Debug)]
pub struct LazyInvariant {
    base: TensorMatrix,
    levels: Vec<HashMap<Key, RingElement>>,
}

impl LazyInvariant {
    pub fn new(base: TensorMatrix) -> Self {
        LazyInvariant { base, levels: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn degree(&self) -> usize {
        self.base.r() + self.levels.len()
    }

    pub fn ring(&self) -> RingDescriptor {
        self.base.ring()
    }

    /// Entry at (i, j) for indices of any degree between the base and the top.
    pub fn entry(&self, i: &[usize], j: &[usize]) -> RingElement {
        let r0 = self.base.r();
        if i.len() == r0 {
            let n = self.n();
            return self.base.get(flat_of(n, i), flat_of(n, j)).clone();
        }
        if !same_value_type(i, j) {
            return self.ring().zero();
        }
        if let Some(b) = repeated_place(i) {
            return self.entry(&without(i, b), &without(j, b));
        }
        self.levels[i.len() - r0 - 1].get(&orbit_key(i, j)).cloned().unwrap_or_else(|| self.ring().zero())
    }

    pub fn to_matrix(&self, limits: &Limits) -> Result<TensorMatrix> {
        let (n, r) = (self.n(), self.degree());
        limits.check(n, r)?;
        let idx: Vec<Vec<usize>> =
            (0..n.pow(r as u32)).map(|k| MultiIndex::from_flat(n, r, k).entries().to_vec()).collect();
        Ok(TensorMatrix::from_fn(n, r, self.ring(), |x, y| self.entry(&idx[x], &idx[y])))
    }
}

enum SolveFailure {
    Conflict(String),
    Inconsistent(String),
    Undetermined(usize),
}

/// Sparse linear equations Σ c·x = rhs solved by unit-pivot elimination.
struct LinearSystem {
    ring: RingDescriptor,
    nvars: usize,
    rows: Vec<(BTreeMap<usize, RingElement>, RingElement, String)>,
}

impl LinearSystem {
    fn new(ring: RingDescriptor, nvars: usize) -> Self {
        LinearSystem { ring, nvars, rows: Vec::new() }
    }

    fn push(&mut self, vars: impl IntoIterator<Item = usize>, rhs: RingElement, label: impl FnOnce() -> String) {
        let mut terms: BTreeMap<usize, RingElement> = BTreeMap::new();
        for v in vars {
            let c = terms.remove(&v).unwrap_or_else(|| self.ring.zero()) + self.ring.one();
            if !c.is_zero() {
                terms.insert(v, c);
            }
        }
        self.rows.push((terms, rhs, label()));
    }

    fn solve(mut self, pins: &[(usize, RingElement, String)]) -> std::result::Result<Vec<RingElement>, SolveFailure> {
        let mut value: Vec<Option<RingElement>> = vec![None; self.nvars];
        for (v, x, label) in pins {
            match &value[*v] {
                Some(old) if old != x => return Err(SolveFailure::Conflict(label.clone())),
                _ => value[*v] = Some(x.clone()),
            }
        }
        let mut occ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nvars];
        for (ri, (terms, rhs, _)) in self.rows.iter_mut().enumerate() {
            let known: Vec<usize> = terms.keys().copied().filter(|v| value[*v].is_some()).collect();
            for v in known {
                let c = terms.remove(&v).unwrap();
                *rhs = &*rhs - &(&c * value[v].as_ref().unwrap());
            }
            for v in terms.keys() {
                occ[*v].insert(ri);
            }
        }
        let mut pivot_row = vec![false; self.rows.len()];
        let mut pivot_of: Vec<Option<usize>> = vec![None; self.nvars];
        loop {
            // the shortest row with a unit coefficient; single-unknown rows first
            let mut best: Option<(usize, usize, usize)> = None;
            for (ri, (terms, _, _)) in self.rows.iter().enumerate() {
                if pivot_row[ri] || terms.is_empty() || best.is_some_and(|b| b.0 <= terms.len()) {
                    continue;
                }
                let pick = terms
                    .iter()
                    .find(|(_, c)| c.is_one() || (-*c).is_one())
                    .or_else(|| terms.iter().find(|(_, c)| c.inverse().is_some()));
                if let Some((v, _)) = pick {
                    best = Some((terms.len(), ri, *v));
                    if terms.len() == 1 {
                        break;
                    }
                }
            }
            let Some((_, ri, v)) = best else { break };
            let (pterms, prhs, _) = self.rows[ri].clone();
            let inv = pterms[&v].inverse().unwrap();
            for other in occ[v].clone() {
                if other == ri {
                    continue;
                }
                let (terms, rhs, _) = &mut self.rows[other];
                let f = &terms[&v] * &inv;
                for (u, cu) in &pterms {
                    let nv = terms.get(u).cloned().unwrap_or_else(|| self.ring.zero()) - &(&f * cu);
                    if nv.is_zero() {
                        terms.remove(u);
                        occ[*u].remove(&other);
                    } else {
                        terms.insert(*u, nv);
                        occ[*u].insert(other);
                    }
                }
                *rhs = &*rhs - &(&f * &prhs);
            }
            pivot_row[ri] = true;
            pivot_of[v] = Some(ri);
        }
        for (ri, (terms, rhs, label)) in self.rows.iter().enumerate() {
            if !pivot_row[ri] && terms.is_empty() && !rhs.is_zero() {
                return Err(SolveFailure::Inconsistent(label.clone()));
            }
        }
        let mut out = Vec::with_capacity(self.nvars);
        for v in 0..self.nvars {
            if let Some(x) = &value[v] {
                out.push(x.clone());
                continue;
            }
            let ri = pivot_of[v].ok_or(SolveFailure::Undetermined(v))?;
            let (terms, rhs, _) = &self.rows[ri];
            if let Some(u) = terms.keys().find(|&&u| u != v) {
                return Err(SolveFailure::Undetermined(*u));
            }
            out.push(rhs * &terms[&v].inverse().unwrap());
        }
        Ok(out)
    }
}

/// Orbit variables for the injective entries of one level over `m` symbols.
struct LevelVars {
    m: usize,
    degree: usize,
    offset: usize,
    index: HashMap<Key, usize>,
    keys: Vec<Key>,
}

impl LevelVars {
    fn new(m: usize, degree: usize, offset: usize) -> Self {
        let iprime = enumerate_iprime(m, degree);
        let mut keys = Vec::new();
        for i in iprime.iter().filter(|i| i.entries().windows(2).all(|w| w[0] < w[1])) {
            for j in &iprime {
                keys.push(orbit_key(i.entries(), j.entries()));
            }
        }
        let index = keys.iter().enumerate().map(|(k, key)| (key.clone(), offset + k)).collect();
        LevelVars { m, degree, offset, index, keys }
    }

    fn len(&self) -> usize {
        self.keys.len()
    }

    fn var(&self, i: &[usize], j: &[usize]) -> usize {
        self.index[&orbit_key(i, j)]
    }

    /// Row and column slice equations at the last place, with `lower`
    /// supplying the restriction b^p_q.
    fn slice_equations(&self, sys: &mut LinearSystem, tag: &str, lower: impl Fn(&[usize], &[usize]) -> RingElement) {
        if self.degree == 0 {
            return;
        }
        let m = self.m;
        let contexts = enumerate_iprime(m, self.degree - 1);
        for p in &contexts {
            for q in &contexts {
                let (p, q) = (p.entries(), q.entries());
                let b = lower(p, q);
                let ext = |c: &[usize], v: usize| {
                    let mut e = c.to_vec();
                    e.push(v);
                    e
                };
                for y in (1..=m).filter(|y| !q.contains(y)) {
                    let vars: Vec<usize> =
                        (1..=m).filter(|x| !p.contains(x)).map(|x| self.var(&ext(p, x), &ext(q, y))).collect();
                    sys.push(vars, b.clone(), || format!("{tag}row-slice ({},{}) fixed {y}", fmt_idx(p), fmt_idx(q)));
                }
                for x in (1..=m).filter(|x| !p.contains(x)) {
                    let vars: Vec<usize> =
                        (1..=m).filter(|y| !q.contains(y)).map(|y| self.var(&ext(p, x), &ext(q, y))).collect();
                    sys.push(vars, b.clone(), || format!("{tag}column-slice ({},{}) fixed {x}", fmt_idx(p), fmt_idx(q)));
                }
            }
        }
    }

    fn values(&self, sol: &[RingElement]) -> HashMap<Key, RingElement> {
        self.keys.iter().enumerate().map(|(k, key)| (key.clone(), sol[self.offset + k].clone())).collect()
    }
}

fn fmt_idx(i: &[usize]) -> String {
    if i.is_empty() {
        return "∅".into();
    }
    i.iter().map(|v| v.to_string()).collect()
}

fn failure_to_error(f: SolveFailure, incompatible: bool) -> Error {
    let msg = match f {
        SolveFailure::Conflict(w) => format!("conflicting prescribed values at {w}"),
        SolveFailure::Inconsistent(w) => format!("slice closes with mismatched sum: {w}"),
        SolveFailure::Undetermined(v) => format!("pattern leaves unknown #{v} undetermined"),
    };
    if incompatible {
        Error::Incompatible(msg)
    } else {
        Error::Construction(msg)
    }
}

/// Free values on a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub pattern: FreePattern,
    pub ring: RingDescriptor,
    pub values: BTreeMap<PatternEntry, RingElement>,
}

impl Assignment {
    pub fn constant(pattern: &FreePattern, c: RingElement) -> Self {
        let ring = c.descriptor();
        let values = pattern.entries.iter().map(|e| (e.clone(), c.clone())).collect();
        Assignment { pattern: pattern.clone(), ring, values }
    }

    pub fn zeros(pattern: &FreePattern, ring: RingDescriptor) -> Self {
        Self::constant(pattern, ring.zero())
    }

    /// Uniform values in 0..m over Z/m, in −5..=5 otherwise.
    pub fn random(pattern: &FreePattern, ring: RingDescriptor, rng: &mut impl Rng) -> Self {
        let values = pattern.entries.iter().map(|e| (e.clone(), random_element(ring, rng))).collect();
        Assignment { pattern: pattern.clone(), ring, values }
    }

    /// Values read off a matrix at the pattern positions.
    pub fn from_matrix(pattern: &FreePattern, a: &TensorMatrix) -> Self {
        let values = pattern.entries.iter().map(|e| (e.clone(), a.at(&e.row, &e.col).clone())).collect();
        Assignment { pattern: pattern.clone(), ring: a.ring(), values }
    }

    /// Values read off summands indexed by block label (label k at position k−1).
    pub fn from_summands(pattern: &FreePattern, summands: &[TensorMatrix]) -> Result<Self> {
        let ring = summands.first().map(|s| s.ring()).ok_or_else(|| Error::InvalidArgument("no summands".into()))?;
        let mut values = BTreeMap::new();
        for e in &pattern.entries {
            let k = e.block.ok_or_else(|| Error::InvalidArgument("pattern has no block labels".into()))?;
            values.insert(e.clone(), summands[k - 1].at(&e.row, &e.col).clone());
        }
        Ok(Assignment { pattern: pattern.clone(), ring, values })
    }

    pub fn get(&self, e: &PatternEntry) -> Result<&RingElement> {
        self.values.get(e).ok_or_else(|| Error::InvalidArgument(format!("assignment misses ({}, {})", e.row, e.col)))
    }

    fn entry_key(e: &PatternEntry) -> String {
        match e.block {
            Some(j) => format!("({j},{},{})", e.row, e.col),
            None => format!("({},{})", e.row, e.col),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> =
            self.values.iter().map(|(e, v)| (Self::entry_key(e), serde_json::Value::String(v.to_string()))).collect();
        serde_json::json!({
            "schema": SCHEMA,
            "ring": self.ring.to_string(),
            "pattern": self.pattern.to_json(),
            "values": values,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let ring: RingDescriptor = v["ring"].as_str().ok_or_else(|| Error::Parse("assignment needs a ring".into()))?.parse()?;
        let pattern = FreePattern::from_json(&v["pattern"])?;
        let raw = v["values"].as_object().ok_or_else(|| Error::Parse("assignment needs values".into()))?;
        let mut values = BTreeMap::new();
        for e in &pattern.entries {
            let key = Self::entry_key(e);
            let x = match raw.get(&key) {
                Some(serde_json::Value::String(s)) => ring.parse_element(s)?,
                Some(serde_json::Value::Number(n)) => ring.parse_element(&n.to_string())?,
                _ => return Err(Error::Parse(format!("assignment misses {key}"))),
            };
            values.insert(e.clone(), x);
        }
        if raw.len() != values.len() {
            return Err(Error::Parse("assignment has values outside its pattern".into()));
        }
        Ok(Assignment { pattern, ring, values })
    }
}

pub(crate) fn random_element(ring: RingDescriptor, rng: &mut impl Rng) -> RingElement {
    match ring {
        RingDescriptor::Modular(m) => ring.from_int(rng.gen_range(0..m as i64)),
        _ => ring.from_int(rng.gen_range(-5..=5)),
    }
}

/// Entries of a degree-r extension of B that the restriction already fixes;
/// `None` marks entries with both indices injective.
#[derive(Clone, Debug)]
pub struct Initialised {
    pub n: usize,
    pub r: usize,
    pub known: Vec<Option<RingElement>>,
}

impl Initialised {
    pub fn get(&self, i: usize, j: usize) -> Option<&RingElement> {
        self.known[i * self.n.pow(self.r as u32) + j].as_ref()
    }
}

fn require_invariant(b: &TensorMatrix) -> Result<()> {
    if let Some(v) = check_membership(b).first_violation {
        return Err(Error::NotInvariant(format!("{} at {}", v.kind, v.witness.join(" "))));
    }
    Ok(())
}

pub fn initialise(b: &TensorMatrix, limits: &Limits) -> Result<Initialised> {
    require_invariant(b)?;
    let (n, r) = (b.n(), b.r() + 1);
    limits.check(n, r)?;
    let lazy = LazyInvariant::new(b.clone());
    let idx: Vec<Vec<usize>> = (0..n.pow(r as u32)).map(|k| MultiIndex::from_flat(n, r, k).entries().to_vec()).collect();
    let mut known = Vec::with_capacity(idx.len() * idx.len());
    for i in &idx {
        for j in &idx {
            known.push(if is_injective(i) && is_injective(j) { None } else { Some(lazy.entry(i, j)) });
        }
    }
    Ok(Initialised { n, r, known })
}

/// Solves one level above `lower` with the given pins; returns the extended
/// lazy invariant.
fn extend_lazy(
    lower: &LazyInvariant,
    pins: &[(Vec<usize>, Vec<usize>, RingElement)],
    incompatible: bool,
) -> Result<LazyInvariant> {
    let (n, r) = (lower.n(), lower.degree() + 1);
    let vars = LevelVars::new(n, r, 0);
    let mut sys = LinearSystem::new(lower.ring(), vars.len());
    vars.slice_equations(&mut sys, "", |p, q| lower.entry(p, q));
    let mut pinned = Vec::with_capacity(pins.len());
    for (i, j, x) in pins {
        if !is_injective(i) || !is_injective(j) {
            return Err(Error::InvalidArgument(format!("pattern entry ({},{}) is not injective", fmt_idx(i), fmt_idx(j))));
        }
        pinned.push((vars.var(i, j), x.clone(), format!("({},{})", fmt_idx(i), fmt_idx(j))));
    }
    let sol = sys.solve(&pinned).map_err(|f| failure_to_error(f, incompatible))?;
    let mut out = lower.clone();
    out.levels.push(vars.values(&sol));
    Ok(out)
}

fn check_extension(a: &TensorMatrix, b: &TensorMatrix) -> Result<()> {
    if let Some(v) = check_membership(a).first_violation {
        return Err(Error::Construction(format!("result fails membership: {} at {}", v.kind, v.witness.join(" "))));
    }
    if &restrict(a)? != b {
        return Err(Error::Construction("result does not restrict to the input".into()));
    }
    Ok(())
}

/// The unique A ∈ E(n,r) with ρ(A) = B agreeing with `f` on its pattern.
pub fn extend(b: &TensorMatrix, f: &Assignment, limits: &Limits) -> Result<TensorMatrix> {
    let p = &f.pattern;
    if p.n != b.n() || p.r != b.r() + 1 || p.flavour != Flavour::Extension {
        return Err(Error::InvalidArgument(format!(
            "need an extension pattern for n={}, r={}, got {} pattern for ({},{})",
            b.n(),
            b.r() + 1,
            p.flavour,
            p.n,
            p.r
        )));
    }
    if f.ring != b.ring() {
        return Err(Error::RingMismatch(f.ring, b.ring()));
    }
    require_invariant(b)?;
    limits.check(b.n(), b.r() + 1)?;
    let pins: Vec<_> =
        p.entries.iter().map(|e| Ok((e.row.entries().to_vec(), e.col.entries().to_vec(), f.get(e)?.clone()))).collect::<Result<_>>()?;
    let a = extend_lazy(&LazyInvariant::new(b.clone()), &pins, false)?.to_matrix(limits)?;
    check_extension(&a, b)?;
    Ok(a)
}

/// Full rows (block-row basis) or columns (block-column basis) of a
/// prospective extension, keyed by their index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialRowPrescription {
    pub basis: Basis,
    pub lines: BTreeMap<MultiIndex, Vec<RingElement>>,
}

/// Some extension of B agreeing with the prescribed lines; free entries of
/// the extension pattern not fixed by the prescription are set to 0.
pub fn extend_with_prescription(
    b: &TensorMatrix,
    prescription: &PartialRowPrescription,
    policy: Policy,
    limits: &Limits,
) -> Result<TensorMatrix> {
    require_invariant(b)?;
    let (n, r) = (b.n(), b.r() + 1);
    limits.check(n, r)?;
    let lower = LazyInvariant::new(b.clone());
    let d = n.pow(r as u32);
    let idx: Vec<Vec<usize>> = (0..d).map(|k| MultiIndex::from_flat(n, r, k).entries().to_vec()).collect();
    let (k0, by_row) = match prescription.basis {
        Basis::BlockRow(i) => (i, true),
        Basis::BlockColumn(j) => (j, false),
    };
    let mut pins = Vec::new();
    let mut fixed: BTreeSet<Key> = BTreeSet::new();
    for (line, values) in &prescription.lines {
        if line.n() != n || line.r() != r || line.entries()[0] != k0 || values.len() != d {
            return Err(Error::InvalidArgument(format!("prescribed line {line} does not fit the basis")));
        }
        for (other, v) in idx.iter().zip(values) {
            let (i, j) = if by_row { (line.entries(), other.as_slice()) } else { (other.as_slice(), line.entries()) };
            if is_injective(i) && is_injective(j) {
                fixed.insert(orbit_key(i, j));
                pins.push((i.to_vec(), j.to_vec(), v.clone()));
            } else if &lower.entry(i, j) != v {
                return Err(Error::Incompatible(format!("entry ({},{}) is forced by the restriction", fmt_idx(i), fmt_idx(j))));
            }
        }
    }
    for e in &build_f(n, r, prescription.basis, policy)?.entries {
        let (i, j) = (e.row.entries(), e.col.entries());
        if !fixed.contains(&orbit_key(i, j)) {
            pins.push((i.to_vec(), j.to_vec(), b.ring().zero()));
        }
    }
    let a = extend_lazy(&lower, &pins, true)?.to_matrix(limits)?;
    check_extension(&a, b)?;
    for (line, values) in &prescription.lines {
        for (k, v) in values.iter().enumerate() {
            let got = if by_row { a.get(line.flat(), k) } else { a.get(k, line.flat()) };
            if got != v {
                return Err(Error::Incompatible(format!("line {line} could not be matched")));
            }
        }
    }
    Ok(a)
}

/// One summand A(k) of a decomposition, special for (row_value, col_value).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summand {
    pub row_value: usize,
    pub col_value: usize,
    pub matrix: TensorMatrix,
}

/// The inverse of `skip_map(p)` on {1..n}∖{p}.
fn unskip(p: usize) -> impl Fn(usize) -> usize {
    move |x| if x < p { x } else { x - 1 }
}

/// Writes A as Σ_k A(k) with A(k) special along the pattern's basis line,
/// the summands agreeing with `f` on the decomposition pattern.
pub fn decompose(a: &TensorMatrix, f: &Assignment) -> Result<Vec<Summand>> {
    let p = &f.pattern;
    if p.n != a.n() || p.r != a.r() || p.flavour != Flavour::Decomposition {
        return Err(Error::InvalidArgument(format!(
            "need a decomposition pattern for n={}, r={}, got {} pattern for ({},{})",
            a.n(),
            a.r(),
            p.flavour,
            p.n,
            p.r
        )));
    }
    if f.ring != a.ring() {
        return Err(Error::RingMismatch(f.ring, a.ring()));
    }
    if a.n() < 2 || a.r() == 0 {
        return Err(Error::InvalidArgument("decomposition needs n ≥ 2 and r ≥ 1".into()));
    }
    require_invariant(a)?;
    match p.basis {
        Basis::BlockRow(i) => {
            let pins: Vec<_> = p
                .entries
                .iter()
                .map(|e| Ok((e.block.unwrap_or(0), e.row.entries().to_vec(), e.col.entries().to_vec(), f.get(e)?.clone())))
                .collect::<Result<_>>()?;
            decompose_row(a, i, &pins)
        }
        Basis::BlockColumn(j) => {
            let pins: Vec<_> = p
                .entries
                .iter()
                .map(|e| Ok((e.block.unwrap_or(0), e.col.entries().to_vec(), e.row.entries().to_vec(), f.get(e)?.clone())))
                .collect::<Result<_>>()?;
            let parts = decompose_row(&a.transpose(), j, &pins)?;
            Ok(parts
                .into_iter()
                .map(|s| Summand { row_value: s.col_value, col_value: s.row_value, matrix: s.matrix.transpose() })
                .collect())
        }
    }
}

type DecompPin = (usize, Vec<usize>, Vec<usize>, RingElement);

fn decompose_row(a: &TensorMatrix, i: usize, pins: &[DecompPin]) -> Result<Vec<Summand>> {
    let (n, r, ring) = (a.n(), a.r(), a.ring());
    let m = n - 1;
    // ρ(C_k) is read off block (i, k)
    let lowers: Vec<LazyInvariant> =
        (1..=n).map(|k| Ok(LazyInvariant::new(eta_unchecked(&block(a, i, k)?, i, k)))).collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(n);
    let mut offset = 0;
    for _ in 1..=n {
        let lv = LevelVars::new(m, r, offset);
        offset += lv.len();
        levels.push(lv);
    }
    let mut sys = LinearSystem::new(ring, offset);
    for (k, lv) in levels.iter().enumerate() {
        lv.slice_equations(&mut sys, &format!("summand {}: ", k + 1), |p, q| lowers[k].entry(p, q));
    }
    let ui = unskip(i);
    let iprime = enumerate_iprime(n, r);
    for x in iprime.iter().filter(|x| !x.contains(i)) {
        let xe: Vec<usize> = x.entries().iter().map(|&v| ui(v)).collect();
        for y in &iprime {
            let vars: Vec<usize> = (1..=n)
                .filter(|k| !y.contains(*k))
                .map(|k| {
                    let ye: Vec<usize> = y.entries().iter().map(|&v| unskip(k)(v)).collect();
                    levels[k - 1].var(&xe, &ye)
                })
                .collect();
            sys.push(vars, a.at(x, y).clone(), || format!("sum at ({x},{y})"));
        }
    }
    let mut pinned = Vec::with_capacity(pins.len());
    for (k, row, col, v) in pins {
        if *k == 0 || *k > n || row.contains(&i) || col.contains(k) || !is_injective(row) || !is_injective(col) {
            return Err(Error::InvalidArgument(format!("pattern entry ({k},{},{}) does not fit basis row {i}", fmt_idx(row), fmt_idx(col))));
        }
        let re: Vec<usize> = row.iter().map(|&v| ui(v)).collect();
        let ce: Vec<usize> = col.iter().map(|&v| unskip(*k)(v)).collect();
        pinned.push((levels[k - 1].var(&re, &ce), v.clone(), format!("({k},{},{})", fmt_idx(row), fmt_idx(col))));
    }
    let sol = sys.solve(&pinned).map_err(|f| failure_to_error(f, false))?;

    let unbounded = Limits::unbounded();
    let mut summands = Vec::with_capacity(n);
    let mut total = TensorMatrix::zeros(n, r, ring);
    for (k, lv) in levels.iter().enumerate() {
        let mut c = lowers[k].clone();
        c.levels.push(lv.values(&sol));
        let c = c.to_matrix(&unbounded)?;
        if let Some(v) = check_membership(&c).first_violation {
            return Err(Error::Construction(format!("summand {} is not invariant: {}", k + 1, v.kind)));
        }
        let s = theta_unchecked(&c, i, k + 1)?;
        if !is_special(&s, i, k + 1) {
            return Err(Error::Construction(format!("summand {} is not special", k + 1)));
        }
        total = total.add(&s)?;
        summands.push(Summand { row_value: i, col_value: k + 1, matrix: s });
    }
    if &total != a {
        return Err(Error::Construction("summands do not add up to the input".into()));
    }
    Ok(summands)
}

/// Coefficients x_w with A = Σ x_w Φ(w), for A ∈ E(n,r) with r ≥ n.
///
/// Only Φ(w) is nonzero at row w(c), column c = 1 2 ⋯ n n ⋯ n.
pub fn read_off_coefficients(a: &TensorMatrix) -> Result<Vec<(Permutation, RingElement)>> {
    let (n, r) = (a.n(), a.r());
    if r < n {
        return Err(Error::InvalidArgument(format!("read-off needs r ≥ n (n={n}, r={r})")));
    }
    let lazy = LazyInvariant::new(a.clone());
    let coeffs = read_off_lazy(&lazy);
    reconstruct_check(a, &coeffs)?;
    Ok(coeffs)
}

fn read_off_lazy(a: &LazyInvariant) -> Vec<(Permutation, RingElement)> {
    let (n, r) = (a.n(), a.degree());
    let c: Vec<usize> = (1..=r).map(|k| k.min(n)).collect();
    Permutation::all(n)
        .into_iter()
        .map(|w| {
            let row: Vec<usize> = c.iter().map(|&v| w.apply(v)).collect();
            let x = a.entry(&row, &c);
            (w, x)
        })
        .collect()
}

fn reconstruct_check(a: &TensorMatrix, coeffs: &[(Permutation, RingElement)]) -> Result<()> {
    let (n, r) = (a.n(), a.r());
    let mut acc = TensorMatrix::zeros(n, r, a.ring());
    for (w, x) in coeffs {
        if x.is_zero() {
            continue;
        }
        for j in 0..a.dim() {
            let row = MultiIndex::from_flat(n, r, j).act_left(w)?.flat();
            let v = acc.get(row, j) + x;
            acc.set(row, j, v);
        }
    }
    if &acc != a {
        return Err(Error::NotInSpan("reconstruction from permutation coefficients differs".into()));
    }
    Ok(())
}

/// Coefficients x_w with A = Σ x_w Φ(w); below degree n the invariant is
/// first extended with zero free values, without materialising the larger
/// matrices.
pub fn express_in_permutation_span(a: &TensorMatrix) -> Result<Vec<(Permutation, RingElement)>> {
    require_invariant(a)?;
    let (n, r) = (a.n(), a.r());
    if r == 0 {
        return Err(Error::InvalidArgument("degree 0 has no permutation action".into()));
    }
    let mut lazy = LazyInvariant::new(a.clone());
    for k in r + 1..=n {
        let pins: Vec<_> = build_f(n, k, Basis::last_row(n), Policy::LargestFirst)?
            .entries
            .iter()
            .map(|e| (e.row.entries().to_vec(), e.col.entries().to_vec(), a.ring().zero()))
            .collect();
        lazy = extend_lazy(&lazy, &pins, false)?;
    }
    let coeffs = read_off_lazy(&lazy);
    reconstruct_check(a, &coeffs)?;
    Ok(coeffs)
}

/// dim ker ρ over a field two ways: as dim E(n,r) − dim E(n,r−1) and as |F(n,r)|.
pub fn kernel_of_rho_dimension(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<usize> {
    if r == 0 {
        return Err(Error::InvalidArgument("ρ needs r ≥ 1".into()));
    }
    let upper = crate::verify::centraliser_dimension(n, r, ring, limits)?;
    let lower = crate::verify::centraliser_dimension(n, r - 1, ring, limits)?;
    let by_rank = upper - lower;
    let by_pattern = build_f(n, r, Basis::last_row(n), Policy::LargestFirst)?.len();
    if by_rank != by_pattern {
        return Err(Error::Construction(format!("dim ker ρ is {by_rank} by rank but |F({n},{r})| = {by_pattern}")));
    }
    Ok(by_rank)
}
