//! The colouring algorithm on I′(n,r) and the recursive free patterns
//! F(n,r), F(n,r)^i_j and D(n,r).
//!
//! Patterns are built for the last block row with terminal orientation and
//! moved to other block rows, block columns or the initial orientation by
//! relabelling (conjugation by a permutation and transposition).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::skip_map;
use crate::multi_index::{alpha_slices_of_iprime, enumerate_iprime, MultiIndex, Permutation};
use crate::tensor::SCHEMA;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Policy {
    #[default]
    LargestFirst,
    SmallestFirst,
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "largest" => Ok(Policy::LargestFirst),
            "smallest" => Ok(Policy::SmallestFirst),
            _ => Err(Error::Parse(format!("unknown policy {s:?} (expected largest or smallest)"))),
        }
    }
}

/// The block row or block column a pattern is based on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    BlockRow(usize),
    BlockColumn(usize),
}

impl Basis {
    pub fn last_row(n: usize) -> Self {
        Basis::BlockRow(n)
    }

    /// Parses "last-row", "row:<i>" or "col:<j>".
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad basis {s:?} (expected last-row, row:<i> or col:<j>)"));
        let b = if s == "last-row" {
            Basis::BlockRow(n)
        } else if let Some(i) = s.strip_prefix("row:") {
            Basis::BlockRow(i.parse().map_err(|_| bad())?)
        } else if let Some(j) = s.strip_prefix("col:") {
            Basis::BlockColumn(j.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        let k = match b {
            Basis::BlockRow(k) | Basis::BlockColumn(k) => k,
        };
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("basis index {k} outside 1..={n}")));
        }
        Ok(b)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::BlockRow(i) => write!(f, "row:{i}"),
            Basis::BlockColumn(j) => write!(f, "col:{j}"),
        }
    }
}

/// A 0/1 colouring of I′(n,r); `order` records elements in the order they
/// received their colour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colouring {
    pub n: usize,
    pub r: usize,
    pub policy: Policy,
    pub initial_zeros: BTreeSet<MultiIndex>,
    pub order: Vec<(MultiIndex, u8)>,
}

impl Colouring {
    pub fn colour_of(&self, i: &MultiIndex) -> Option<u8> {
        self.order.iter().find(|(x, _)| x == i).map(|(_, c)| *c)
    }

    pub fn ones(&self) -> BTreeSet<MultiIndex> {
        self.order.iter().filter(|(_, c)| *c == 1).map(|(x, _)| x.clone()).collect()
    }

    /// "0"/"1" per element of I′(n,r) in lexicographic order.
    pub fn row_string(&self) -> String {
        let els = enumerate_iprime(self.n, self.r);
        els.iter().map(|e| self.colour_of(e).map_or('?', |c| (b'0' + c) as char)).collect()
    }
}

/// Runs the colouring algorithm, with `initial_zeros` coloured 0 up front.
///
/// Pre-coloured zeros propagate like any other colouring: a slice left with a
/// single uncoloured element forces it to 0 before the main loop starts.
pub fn colour(n: usize, r: usize, policy: Policy, initial_zeros: &BTreeSet<MultiIndex>) -> Colouring {
    let els = enumerate_iprime(n, r);
    let pos: HashMap<&MultiIndex, usize> = els.iter().enumerate().map(|(k, e)| (e, k)).collect();
    let slices: Vec<Vec<usize>> =
        alpha_slices_of_iprime(n, r).into_iter().map(|s| s.members.iter().map(|m| pos[m]).collect()).collect();
    let mut slices_of = vec![Vec::new(); els.len()];
    for (s, members) in slices.iter().enumerate() {
        for &m in members {
            slices_of[m].push(s);
        }
    }
    let mut open: Vec<usize> = slices.iter().map(|s| s.len()).collect();
    let mut colour_at: Vec<Option<u8>> = vec![None; els.len()];
    let mut order = Vec::with_capacity(els.len());

    let mut set = |k: usize, c: u8, colour_at: &mut Vec<Option<u8>>, open: &mut Vec<usize>, queue: &mut VecDeque<usize>| {
        colour_at[k] = Some(c);
        order.push((els[k].clone(), c));
        for &s in &slices_of[k] {
            open[s] -= 1;
            if open[s] == 1 {
                queue.push_back(s);
            }
        }
    };
    let propagate = |queue: &mut VecDeque<usize>,
                     colour_at: &mut Vec<Option<u8>>,
                     open: &mut Vec<usize>,
                     set: &mut dyn FnMut(usize, u8, &mut Vec<Option<u8>>, &mut Vec<usize>, &mut VecDeque<usize>)| {
        while let Some(s) = queue.pop_front() {
            if open[s] != 1 {
                continue;
            }
            let k = *slices[s].iter().find(|&&m| colour_at[m].is_none()).unwrap();
            set(k, 0, colour_at, open, queue);
        }
    };

    let mut queue = VecDeque::new();
    for z in initial_zeros {
        if let Some(&k) = pos.get(z) {
            if colour_at[k].is_none() {
                set(k, 0, &mut colour_at, &mut open, &mut queue);
            }
        }
    }
    // slices of size one are forced from the start
    for (s, members) in slices.iter().enumerate() {
        if members.len() == 1 && open[s] == 1 {
            queue.push_back(s);
        }
    }
    propagate(&mut queue, &mut colour_at, &mut open, &mut set);

    let scan: Vec<usize> = match policy {
        Policy::LargestFirst => (0..els.len()).rev().collect(),
        Policy::SmallestFirst => (0..els.len()).collect(),
    };
    for k in scan {
        if colour_at[k].is_some() {
            continue;
        }
        let forced = slices_of[k].iter().any(|&s| open[s] == 1);
        set(k, if forced { 0 } else { 1 }, &mut colour_at, &mut open, &mut queue);
        propagate(&mut queue, &mut colour_at, &mut open, &mut set);
    }

    Colouring { n, r, policy, initial_zeros: initial_zeros.clone(), order }
}

/// ℒ_j = {j_1⋯j_r ∈ I′(n,r) : j_α = α for α ≤ j}.
pub fn script_l(n: usize, r: usize, j: usize) -> Vec<MultiIndex> {
    enumerate_iprime(n, r).into_iter().filter(|m| (1..=j.min(r)).all(|a| m.entries()[a - 1] == a)).collect()
}

/// The closure of ℒ_j under place permutations.
pub fn script_l_closure(n: usize, r: usize, j: usize) -> BTreeSet<MultiIndex> {
    let sigmas = Permutation::all(r);
    script_l(n, r, j).iter().flat_map(|m| sigmas.iter().map(move |s| m.act_right(s).unwrap())).collect()
}

/// The modified colouring defining I′_j(n,r): indices containing j and the
/// closure of ℒ_{j−1} start at 0. For j = 1 there is no ℒ_0 and this is
/// the plain colouring I′_1(n,r).
pub fn modified_colouring(n: usize, r: usize, j: usize, policy: Policy) -> Colouring {
    if j <= 1 {
        return colour(n, r, policy, &BTreeSet::new());
    }
    let mut zeros: BTreeSet<MultiIndex> = enumerate_iprime(n, r).into_iter().filter(|m| m.contains(j)).collect();
    zeros.extend(script_l_closure(n, r, j - 1));
    colour(n, r, policy, &zeros)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavour {
    Extension,
    Decomposition,
    PerBlock { i: usize, j: usize },
}

impl fmt::Display for Flavour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavour::Extension => write!(f, "extension"),
            Flavour::Decomposition => write!(f, "decomposition"),
            Flavour::PerBlock { i, j } => write!(f, "per-block:{i},{j}"),
        }
    }
}

/// One pattern position; `block` is set for decomposition patterns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternEntry {
    pub block: Option<usize>,
    pub row: MultiIndex,
    pub col: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreePattern {
    pub n: usize,
    pub r: usize,
    pub basis: Basis,
    pub flavour: Flavour,
    pub entries: BTreeSet<PatternEntry>,
}

type Pairs = BTreeSet<(MultiIndex, MultiIndex)>;
type Triples = BTreeSet<(usize, MultiIndex, MultiIndex)>;

impl FreePattern {
    fn from_pairs(n: usize, r: usize, basis: Basis, flavour: Flavour, pairs: &Pairs) -> Self {
        let entries = pairs.iter().map(|(a, b)| PatternEntry { block: None, row: a.clone(), col: b.clone() }).collect();
        FreePattern { n, r, basis, flavour, entries }
    }

    fn from_triples(n: usize, r: usize, basis: Basis, triples: &Triples) -> Self {
        let entries =
            triples.iter().map(|(j, a, b)| PatternEntry { block: Some(*j), row: a.clone(), col: b.clone() }).collect();
        FreePattern { n, r, basis, flavour: Flavour::Decomposition, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pairs(&self) -> Vec<(MultiIndex, MultiIndex)> {
        self.entries.iter().map(|e| (e.row.clone(), e.col.clone())).collect()
    }

    pub fn contains_pair(&self, row: &MultiIndex, col: &MultiIndex) -> bool {
        self.entries.iter().any(|e| e.block.is_none() && &e.row == row && &e.col == col)
    }

    /// Entries of the decomposition pattern belonging to block label j.
    pub fn block_entries(&self, j: usize) -> Vec<(MultiIndex, MultiIndex)> {
        self.entries.iter().filter(|e| e.block == Some(j)).map(|e| (e.row.clone(), e.col.clone())).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                let mut v = Vec::with_capacity(3);
                if let Some(j) = e.block {
                    v.push(j.to_string());
                }
                v.push(e.row.to_string());
                v.push(e.col.to_string());
                v
            })
            .collect();
        serde_json::json!({
            "schema": SCHEMA,
            "n": self.n,
            "r": self.r,
            "basis": self.basis.to_string(),
            "flavour": self.flavour.to_string(),
            "entries": entries,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            r: usize,
            basis: String,
            flavour: String,
            entries: Vec<Vec<String>>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let basis = Basis::parse(raw.n, &raw.basis)?;
        let flavour = match raw.flavour.as_str() {
            "extension" => Flavour::Extension,
            "decomposition" => Flavour::Decomposition,
            other => {
                let ij = other.strip_prefix("per-block:").ok_or_else(|| Error::Parse(format!("bad flavour {other:?}")))?;
                let (i, j) = ij.split_once(',').ok_or_else(|| Error::Parse(format!("bad flavour {other:?}")))?;
                let p = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad flavour {other:?}")));
                Flavour::PerBlock { i: p(i)?, j: p(j)? }
            }
        };
        let mut entries = BTreeSet::new();
        for e in &raw.entries {
            let entry = match (flavour, e.as_slice()) {
                (Flavour::Decomposition, [j, a, b]) => PatternEntry {
                    block: Some(j.parse().map_err(|_| Error::Parse(format!("bad block label {j:?}")))?),
                    row: MultiIndex::parse(raw.n, a)?,
                    col: MultiIndex::parse(raw.n, b)?,
                },
                (Flavour::Decomposition, _) => return Err(Error::Parse("decomposition entries need three fields".into())),
                (_, [a, b]) => PatternEntry { block: None, row: MultiIndex::parse(raw.n, a)?, col: MultiIndex::parse(raw.n, b)? },
                _ => return Err(Error::Parse("pattern entries need two fields".into())),
            };
            entries.insert(entry);
        }
        Ok(FreePattern { n: raw.n, r: raw.r, basis, flavour, entries })
    }

    /// Checkmark grid. With `all_columns` every index of I′(n,r) (and every
    /// block label for decompositions) gets a column and every index a row;
    /// otherwise only rows and columns that carry an entry are shown.
    pub fn render_table(&self, title: &str, all_columns: bool) -> String {
        let col_key = |e: &PatternEntry| match e.block {
            Some(j) => format!("{j}:{}", e.col),
            None => e.col.to_string(),
        };
        let (rows, cols): (Vec<String>, Vec<String>) = if all_columns {
            let iprime = enumerate_iprime(self.n, self.r);
            let rows = iprime.iter().map(|m| m.to_string()).collect();
            let cols = match self.flavour {
                Flavour::Decomposition => {
                    (1..=self.n).flat_map(|j| iprime.iter().map(move |m| format!("{j}:{m}"))).collect()
                }
                _ => iprime.iter().map(|m| m.to_string()).collect(),
            };
            (rows, cols)
        } else {
            let rows: BTreeSet<&MultiIndex> = self.entries.iter().map(|e| &e.row).collect();
            let cols: BTreeSet<(Option<usize>, &MultiIndex)> = self.entries.iter().map(|e| (e.block, &e.col)).collect();
            (
                rows.into_iter().map(|m| m.to_string()).collect(),
                cols.into_iter()
                    .map(|(b, m)| match b {
                        Some(j) => format!("{j}:{m}"),
                        None => m.to_string(),
                    })
                    .collect(),
            )
        };
        let marks: BTreeSet<(String, String)> = self.entries.iter().map(|e| (e.row.to_string(), col_key(e))).collect();
        let mut out = format!("# {title}\nrows: {}\ncols: {}\n", rows.join(" "), cols.join(" "));
        for row in &rows {
            let cells: Vec<&str> =
                cols.iter().map(|c| if marks.contains(&(row.clone(), c.clone())) { "x" } else { "." }).collect();
            out.push_str(&format!("{row} | {}\n", cells.join(" ")));
        }
        out
    }
}

/// Terminal and initial variants of the base pattern F(n,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseVariant {
    Terminal,
    Initial,
    MixedRowInitColTerm,
    MixedRowTermColInit,
}

pub fn base_pattern_f_n1(n: usize, variant: BaseVariant) -> Result<FreePattern> {
    if n < 2 {
        return Err(Error::InvalidArgument("F(n,1) needs n ≥ 2".into()));
    }
    let p = FreePattern::from_pairs(n, 1, Basis::last_row(n), Flavour::Extension, &f_core(n, 1));
    let w0 = Permutation::longest(n);
    let id = Permutation::identity(n);
    Ok(match variant {
        BaseVariant::Terminal => p,
        BaseVariant::Initial => transform_pattern(&p, &w0, &w0, false),
        BaseVariant::MixedRowInitColTerm => transform_pattern(&p, &w0, &id, false),
        BaseVariant::MixedRowTermColInit => transform_pattern(&p, &id, &w0, false),
    })
}

/// Relabels rows by `row_perm` and columns by `col_perm`, after swapping rows
/// and columns when `transpose` is set.
pub fn transform_pattern(p: &FreePattern, row_perm: &Permutation, col_perm: &Permutation, transpose: bool) -> FreePattern {
    let basis = match (p.basis, transpose) {
        (Basis::BlockRow(i), false) => Basis::BlockRow(row_perm.apply(i)),
        (Basis::BlockRow(i), true) => Basis::BlockColumn(col_perm.apply(i)),
        (Basis::BlockColumn(j), false) => Basis::BlockColumn(col_perm.apply(j)),
        (Basis::BlockColumn(j), true) => Basis::BlockRow(row_perm.apply(j)),
    };
    // decomposition labels index column blocks for a row basis and row blocks otherwise
    let label = |j: usize| match basis {
        Basis::BlockRow(_) => col_perm.apply(j),
        Basis::BlockColumn(_) => row_perm.apply(j),
    };
    let flavour = match p.flavour {
        Flavour::PerBlock { i, j } => {
            let (i, j) = if transpose { (j, i) } else { (i, j) };
            Flavour::PerBlock { i: row_perm.apply(i), j: col_perm.apply(j) }
        }
        f => f,
    };
    let entries = p
        .entries
        .iter()
        .map(|e| {
            let (a, b) = if transpose { (&e.col, &e.row) } else { (&e.row, &e.col) };
            PatternEntry {
                block: e.block.map(&label),
                row: a.act_left(row_perm).unwrap(),
                col: b.act_left(col_perm).unwrap(),
            }
        })
        .collect();
    FreePattern { n: p.n, r: p.r, basis, flavour, entries }
}

fn f_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<Pairs>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Pairs>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn d_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<Triples>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Triples>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// File for a core pattern in the directory named by SWD_CACHE_DIR, if set.
fn disk_path(kind: &str, n: usize, r: usize) -> Option<PathBuf> {
    std::env::var_os("SWD_CACHE_DIR").map(|d| PathBuf::from(d).join(format!("{kind}-{n}-{r}.json")))
}

// unreadable or malformed files count as a miss
fn disk_load(path: &Path, n: usize, r: usize) -> Option<Triples> {
    let text = std::fs::read_to_string(path).ok()?;
    let raw: Vec<(usize, String, String)> = serde_json::from_str(&text).ok()?;
    let parse = |s: &str| MultiIndex::parse(n, s).ok().filter(|m| m.r() == r && m.is_injective());
    raw.into_iter().map(|(j, a, b)| Some((Some(j).filter(|&j| j <= n)?, parse(&a)?, parse(&b)?))).collect()
}

// a failed write only loses the cache entry
fn disk_store(path: &Path, triples: &Triples) {
    let raw: Vec<(usize, String, String)> = triples.iter().map(|(j, a, b)| (*j, a.to_string(), b.to_string())).collect();
    if let Some(dir) = path.parent() {
        let _ = std::fs::create_dir_all(dir);
    }
    if let Ok(text) = serde_json::to_string(&raw) {
        let _ = std::fs::write(path, text);
    }
}

/// F(n,r) for the last block row, terminal orientation.
fn f_core(n: usize, r: usize) -> Arc<Pairs> {
    if let Some(hit) = f_cache().lock().unwrap().get(&(n, r)) {
        return hit.clone();
    }
    let path = disk_path("F", n, r);
    if let Some(t) = path.as_deref().and_then(|p| disk_load(p, n, r)) {
        let out: Arc<Pairs> = Arc::new(t.into_iter().map(|(_, a, b)| (a, b)).collect());
        f_cache().lock().unwrap().insert((n, r), out.clone());
        return out;
    }
    let mut out = Pairs::new();
    if r == 1 {
        for i in 2..=n {
            for j in 2..=n {
                out.insert((MultiIndex::new_unchecked(n, vec![i]), MultiIndex::new_unchecked(n, vec![j])));
            }
        }
    } else if n >= 2 && r >= 2 {
        for (j, p, q) in d_core(n, r - 1).iter() {
            out.insert((p.insert_place(1, n), q.insert_place(1, *j)));
        }
        for j in 1..=n {
            out.extend(per_block_pairs(n, r, n, j));
        }
    }
    if let Some(p) = &path {
        disk_store(p, &out.iter().map(|(a, b)| (0, a.clone(), b.clone())).collect());
    }
    let out = Arc::new(out);
    f_cache().lock().unwrap().insert((n, r), out.clone());
    out
}

/// θ^i_j F(n−1,r) as index pairs over n values.
fn per_block_pairs(n: usize, r: usize, i: usize, j: usize) -> Pairs {
    let (ui, uj) = (skip_map(i), skip_map(j));
    f_core(n - 1, r).iter().map(|(a, b)| (a.map_values(n, &ui), b.map_values(n, &uj))).collect()
}

/// D(n,r) for the last block row.
fn d_core(n: usize, r: usize) -> Arc<Triples> {
    if let Some(hit) = d_cache().lock().unwrap().get(&(n, r)) {
        return hit.clone();
    }
    let path = disk_path("D", n, r);
    if let Some(t) = path.as_deref().and_then(|p| disk_load(p, n, r)) {
        let out = Arc::new(t);
        d_cache().lock().unwrap().insert((n, r), out.clone());
        return out;
    }
    let mut out = Triples::new();
    if n > r + 1 {
        for j in r + 2..=n {
            for (a, b) in per_block_pairs(n, r, n, j) {
                out.insert((j, a, b));
            }
        }
        for j in 2..=r + 1 {
            let allowed = modified_colouring(n, r, j, Policy::LargestFirst).ones();
            for (a, b) in per_block_pairs(n, r, n, j) {
                if allowed.contains(&b) {
                    out.insert((j, a, b));
                }
            }
        }
    }
    if let Some(p) = &path {
        disk_store(p, &out);
    }
    let out = Arc::new(out);
    d_cache().lock().unwrap().insert((n, r), out.clone());
    out
}

/// The permutation carrying the last-row terminal pattern to the requested
/// basis and orientation, and whether to transpose first.
fn relabelling(n: usize, basis: Basis, policy: Policy) -> Result<(Permutation, bool)> {
    let (k, transpose) = match basis {
        Basis::BlockRow(i) => (i, false),
        Basis::BlockColumn(j) => (j, true),
    };
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("basis index {k} outside 1..={n}")));
    }
    let g = match policy {
        Policy::LargestFirst => Permutation::transposition(n, k, n),
        Policy::SmallestFirst => {
            let w0 = Permutation::longest(n);
            w0.compose(&Permutation::transposition(n, w0.apply(k), n))
        }
    };
    Ok((g, transpose))
}

/// The free extension pattern F(n,r).
pub fn build_f(n: usize, r: usize, basis: Basis, policy: Policy) -> Result<FreePattern> {
    if n < 1 || r < 1 {
        return Err(Error::InvalidArgument("F(n,r) needs n, r ≥ 1".into()));
    }
    let core = FreePattern::from_pairs(n, r, Basis::last_row(n), Flavour::Extension, &f_core(n, r));
    let (g, transpose) = relabelling(n, basis, policy)?;
    Ok(transform_pattern(&core, &g, &g, transpose))
}

/// The free decomposition pattern D(n,r).
pub fn build_d(n: usize, r: usize, basis: Basis, policy: Policy) -> Result<FreePattern> {
    if n < 1 || r < 1 {
        return Err(Error::InvalidArgument("D(n,r) needs n, r ≥ 1".into()));
    }
    let core = FreePattern::from_triples(n, r, Basis::last_row(n), &d_core(n, r));
    let (g, transpose) = relabelling(n, basis, policy)?;
    Ok(transform_pattern(&core, &g, &g, transpose))
}

/// F(n,r)^i_j = θ^i_j F(n−1,r).
pub fn per_block_pattern(n: usize, r: usize, i: usize, j: usize) -> Result<FreePattern> {
    if n < 2 || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!("per-block pattern needs n ≥ 2 and 1 ≤ i,j ≤ n (n={n})")));
    }
    Ok(FreePattern::from_pairs(n, r, Basis::BlockRow(i), Flavour::PerBlock { i, j }, &per_block_pairs(n, r, i, j)))
}

/// F̄(n,r)^n_j: the part of F(n,r)^n_j whose columns lie in I′_j(n,r).
pub fn truncated_per_block_pattern(n: usize, r: usize, j: usize) -> Result<FreePattern> {
    let mut p = per_block_pattern(n, r, n, j)?;
    let allowed = modified_colouring(n, r, j, Policy::LargestFirst).ones();
    p.entries.retain(|e| allowed.contains(&e.col));
    Ok(p)
}

/// F′(n,r): the entries of F(n,r) in the basis block row or column.
pub fn f_prime(p: &FreePattern) -> FreePattern {
    let mut out = p.clone();
    out.entries.retain(|e| match p.basis {
        Basis::BlockRow(i) => e.row.entries()[0] == i,
        Basis::BlockColumn(j) => e.col.entries()[0] == j,
    });
    out
}

/// π: maps a pattern pair of the basis line to its decomposition triple.
pub fn pi(basis: Basis, row: &MultiIndex, col: &MultiIndex) -> Option<(usize, MultiIndex, MultiIndex)> {
    match basis {
        Basis::BlockRow(i) if row.entries()[0] == i => {
            Some((col.entries()[0], row.remove_place(1), col.remove_place(1)))
        }
        Basis::BlockColumn(j) if col.entries()[0] == j => {
            Some((row.entries()[0], row.remove_place(1), col.remove_place(1)))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(n: usize, s: &str) -> MultiIndex {
        MultiIndex::parse(n, s).unwrap()
    }

    fn set(n: usize, items: &[&str]) -> BTreeSet<MultiIndex> {
        items.iter().map(|s| mi(n, s)).collect()
    }

    fn pairs(n: usize, items: &[(&str, &str)]) -> Vec<(MultiIndex, MultiIndex)> {
        items.iter().map(|(a, b)| (mi(n, a), mi(n, b))).collect()
    }

    fn last_row(n: usize, r: usize) -> FreePattern {
        build_f(n, r, Basis::last_row(n), Policy::LargestFirst).unwrap()
    }

    #[test]
    fn plain_colouring_of_5_2() {
        let c = colour(5, 2, Policy::LargestFirst, &BTreeSet::new());
        let expected = set(5, &["54", "53", "52", "45", "43", "42", "35", "34", "32", "25", "24"]);
        assert_eq!(c.ones(), expected);
        assert_eq!(c.row_string(), "00000011011101110111");
    }

    #[test]
    fn modified_colourings_of_5_2() {
        let plain = colour(5, 2, Policy::LargestFirst, &BTreeSet::new()).ones();
        assert_eq!(modified_colouring(5, 2, 1, Policy::LargestFirst).ones(), plain);
        assert_eq!(modified_colouring(5, 2, 2, Policy::LargestFirst).ones(), set(5, &["54"]));
        let c3 = modified_colouring(5, 2, 3, Policy::LargestFirst);
        assert_eq!(c3.ones(), set(5, &["25", "52", "54"]));
        // the first three decisions of the j = 3 run: 54 free, then 52 free, then 25 free
        let decided: Vec<(String, u8)> =
            c3.order.iter().skip(c3.initial_zeros.len()).map(|(m, c)| (m.to_string(), *c)).collect();
        assert_eq!(decided[0], ("54".to_string(), 1));
        assert_eq!(decided[1], ("52".to_string(), 1));
        assert!(decided[2..6].iter().all(|(_, c)| *c == 0));
        assert_eq!(decided[6], ("25".to_string(), 1));
    }

    #[test]
    fn initial_zero_sets() {
        assert_eq!(script_l(4, 2, 2), vec![mi(4, "12")]);
        assert_eq!(script_l(4, 2, 1), vec![mi(4, "12"), mi(4, "13"), mi(4, "14")]);
        assert_eq!(script_l_closure(4, 2, 1), set(4, &["12", "13", "14", "21", "31", "41"]));
        assert_eq!(script_l_closure(4, 2, 0).len(), 12);
    }

    #[test]
    fn colouring_is_total_and_slices_keep_a_zero() {
        for n in 1..=5 {
            for r in 1..=3.min(n) {
                for policy in [Policy::LargestFirst, Policy::SmallestFirst] {
                    let c = colour(n, r, policy, &BTreeSet::new());
                    assert_eq!(c.order.len(), enumerate_iprime(n, r).len());
                    let distinct: BTreeSet<&MultiIndex> = c.order.iter().map(|(m, _)| m).collect();
                    assert_eq!(distinct.len(), c.order.len());
                    for s in alpha_slices_of_iprime(n, r) {
                        assert!(s.members.iter().any(|m| c.colour_of(m) == Some(0)));
                    }
                }
            }
        }
    }

    #[test]
    fn smallest_first_mirrors_largest_first() {
        for (n, r) in [(4, 2), (5, 2), (5, 3)] {
            let w0 = Permutation::longest(n);
            let large = colour(n, r, Policy::LargestFirst, &BTreeSet::new()).ones();
            let small = colour(n, r, Policy::SmallestFirst, &BTreeSet::new()).ones();
            let mirrored: BTreeSet<MultiIndex> = large.iter().map(|m| m.act_left(&w0).unwrap()).collect();
            assert_eq!(small, mirrored);
        }
    }

    #[test]
    fn largest_first_ones_are_terminal_in_slices() {
        for (n, r) in [(3, 1), (4, 1), (4, 2), (5, 2), (6, 2)] {
            let c = colour(n, r, Policy::LargestFirst, &BTreeSet::new());
            for s in alpha_slices_of_iprime(n, r) {
                let colours: Vec<u8> = s.members.iter().map(|m| c.colour_of(m).unwrap()).collect();
                assert!(colours.windows(2).all(|w| w[0] <= w[1]), "({n},{r}) {:?} {colours:?}", s.members);
            }
        }
    }

    #[test]
    fn base_patterns() {
        let t = base_pattern_f_n1(3, BaseVariant::Terminal).unwrap();
        assert_eq!(t.pairs(), pairs(3, &[("2", "2"), ("2", "3"), ("3", "2"), ("3", "3")]));
        assert_eq!(base_pattern_f_n1(2, BaseVariant::Terminal).unwrap().pairs(), pairs(2, &[("2", "2")]));
        for n in 2..=6 {
            assert_eq!(base_pattern_f_n1(n, BaseVariant::Terminal).unwrap().len(), (n - 1) * (n - 1));
        }
        let init = base_pattern_f_n1(3, BaseVariant::Initial).unwrap();
        assert_eq!(init.pairs(), pairs(3, &[("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")]));
        let mixed = base_pattern_f_n1(3, BaseVariant::MixedRowInitColTerm).unwrap();
        assert_eq!(mixed.pairs(), pairs(3, &[("1", "2"), ("1", "3"), ("2", "2"), ("2", "3")]));
        assert!(base_pattern_f_n1(1, BaseVariant::Terminal).is_err());
    }

    #[test]
    fn small_extension_patterns() {
        assert_eq!(last_row(3, 2).pairs(), pairs(3, &[("32", "32")]));
        assert_eq!(last_row(4, 3).pairs(), pairs(4, &[("432", "432")]));
        assert_eq!(last_row(4, 2).len(), 13);
        for (n, r) in [(2, 2), (2, 3), (3, 3), (4, 4), (1, 1), (1, 3)] {
            assert!(last_row(n, r).is_empty(), "F({n},{r})");
        }
    }

    #[test]
    fn per_block_examples() {
        assert_eq!(per_block_pattern(4, 2, 4, 4).unwrap().pairs(), pairs(4, &[("32", "32")]));
        assert_eq!(per_block_pattern(4, 2, 4, 3).unwrap().pairs(), pairs(4, &[("32", "42")]));
        assert_eq!(per_block_pattern(4, 2, 4, 2).unwrap().pairs(), pairs(4, &[("32", "43")]));
        assert_eq!(per_block_pattern(4, 2, 4, 1).unwrap().pairs(), pairs(4, &[("32", "43")]));
        for (j, col) in [(5, "432"), (4, "532"), (3, "542"), (2, "543")] {
            assert_eq!(per_block_pattern(5, 3, 5, j).unwrap().pairs(), pairs(5, &[("432", col)]));
        }
    }

    #[test]
    fn decomposition_d_4_1() {
        let d = build_d(4, 1, Basis::last_row(4), Policy::LargestFirst).unwrap();
        let mut expected = BTreeSet::new();
        for (j, p, q) in [
            (2, 2, 4),
            (2, 3, 4),
            (3, 2, 2),
            (3, 2, 4),
            (3, 3, 2),
            (3, 3, 4),
            (4, 2, 2),
            (4, 2, 3),
            (4, 3, 2),
            (4, 3, 3),
        ] {
            expected.insert(PatternEntry {
                block: Some(j),
                row: MultiIndex::new(4, vec![p]).unwrap(),
                col: MultiIndex::new(4, vec![q]).unwrap(),
            });
        }
        assert_eq!(d.entries, expected);
    }

    #[test]
    fn d_is_empty_in_case_one() {
        for (n, r) in [(2, 1), (3, 2), (4, 3), (3, 3)] {
            assert!(build_d(n, r, Basis::last_row(n), Policy::LargestFirst).unwrap().is_empty());
        }
    }

    #[test]
    fn truncated_blocks_of_5_2() {
        let f3 = truncated_per_block_pattern(5, 2, 3).unwrap();
        assert_eq!(
            f3.pairs(),
            pairs(5, &[("32", "52"), ("32", "54"), ("42", "25"), ("42", "52"), ("42", "54"), ("43", "25"), ("43", "52"), ("43", "54")])
        );
        let f2 = truncated_per_block_pattern(5, 2, 2).unwrap();
        assert_eq!(f2.pairs(), pairs(5, &[("32", "54"), ("42", "54"), ("43", "54")]));
    }

    #[test]
    fn f_prime_corresponds_to_d() {
        for (n, r) in [(4, 2), (5, 2), (5, 3), (4, 3)] {
            let f = last_row(n, r);
            let fp = f_prime(&f);
            let d = build_d(n, r - 1, Basis::last_row(n), Policy::LargestFirst).unwrap();
            let image: BTreeSet<(usize, MultiIndex, MultiIndex)> =
                fp.entries.iter().map(|e| pi(f.basis, &e.row, &e.col).unwrap()).collect();
            let d_set: BTreeSet<(usize, MultiIndex, MultiIndex)> =
                d.entries.iter().map(|e| (e.block.unwrap(), e.row.clone(), e.col.clone())).collect();
            assert_eq!(image, d_set);
            assert_eq!(fp.len(), d.len());
            // F″ avoids the basis row value in first place
            assert!(f.entries.difference(&fp.entries).all(|e| e.row.entries()[0] != n));
        }
    }

    #[test]
    fn pattern_sizes() {
        assert_eq!(last_row(5, 3).len(), 41);
        assert_eq!(f_prime(&last_row(5, 3)).len(), 37);
        assert_eq!(build_d(5, 2, Basis::last_row(5), Policy::LargestFirst).unwrap().len(), 37);
    }

    #[test]
    fn entries_are_injective() {
        for (n, r) in [(4, 2), (5, 2), (5, 3), (6, 2)] {
            assert!(last_row(n, r).entries.iter().all(|e| e.row.is_injective() && e.col.is_injective()));
        }
    }

    #[test]
    fn transforms() {
        let f = last_row(3, 2);
        let id = Permutation::identity(3);
        assert_eq!(transform_pattern(&f, &id, &id, false), f);
        assert_eq!(transform_pattern(&f, &id, &id, true).pairs(), f.pairs());
        let w0 = Permutation::longest(4);
        let t = base_pattern_f_n1(4, BaseVariant::Terminal).unwrap();
        assert_eq!(transform_pattern(&t, &w0, &w0, false), base_pattern_f_n1(4, BaseVariant::Initial).unwrap());
    }

    #[test]
    fn other_bases_are_relabellings() {
        let f = build_f(4, 2, Basis::BlockRow(2), Policy::LargestFirst).unwrap();
        assert_eq!(f.basis, Basis::BlockRow(2));
        assert_eq!(f.len(), 13);
        assert_eq!(f_prime(&f).len(), 10);
        let g = build_f(4, 2, Basis::BlockColumn(1), Policy::LargestFirst).unwrap();
        assert_eq!(g.basis, Basis::BlockColumn(1));
        assert!(f_prime(&g).entries.iter().all(|e| e.col.entries()[0] == 1));
        let s = build_f(4, 2, Basis::BlockRow(1), Policy::SmallestFirst).unwrap();
        assert_eq!(s.basis, Basis::BlockRow(1));
        assert_eq!(f_prime(&s).len(), 10);
    }

    #[test]
    fn json_round_trip() {
        let f = last_row(4, 2);
        assert_eq!(FreePattern::from_json(&f.to_json()).unwrap(), f);
        let d = build_d(5, 2, Basis::BlockColumn(3), Policy::LargestFirst).unwrap();
        assert_eq!(FreePattern::from_json(&d.to_json()).unwrap(), d);
        let p = per_block_pattern(4, 2, 4, 3).unwrap();
        assert_eq!(FreePattern::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn basis_parsing() {
        assert_eq!(Basis::parse(4, "last-row").unwrap(), Basis::BlockRow(4));
        assert_eq!(Basis::parse(4, "row:2").unwrap(), Basis::BlockRow(2));
        assert_eq!(Basis::parse(4, "col:1").unwrap(), Basis::BlockColumn(1));
        assert!(Basis::parse(4, "col:5").is_err());
        assert!(Basis::parse(4, "diag").is_err());
    }
}
