//! Dimension oracles and the duality checks built on them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construct::{express_in_permutation_span, extend, random_element, Assignment};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::invariant::{check_membership, eta_unchecked, half_restrict, value_type_ids};
use crate::linalg::{Echelon, SparseRow};
use crate::multi_index::{MultiIndex, Permutation};
use crate::pattern::{build_f, Basis, Policy};
use crate::ring::{RingDescriptor, RingElement};
use crate::tensor::{phi, psi, Limits, TensorMatrix, SCHEMA};

fn require_field(ring: RingDescriptor) -> Result<()> {
    if ring.is_field() {
        Ok(())
    } else {
        Err(Error::NotAField(ring))
    }
}

fn sparse(terms: BTreeMap<usize, RingElement>) -> SparseRow {
    terms.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// Unknowns of the commutant system: place-permutation orbits of pairs with
/// equal value type. Returns the class of every (i, j) (or None) and the
/// number of classes.
fn commutant_classes(n: usize, r: usize) -> (Vec<Option<usize>>, usize) {
    let d = n.pow(r as u32);
    let vt = value_type_ids(n, r);
    let idx: Vec<Vec<usize>> = (0..d).map(|k| MultiIndex::from_flat(n, r, k).entries().to_vec()).collect();
    let mut ids: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut class = vec![None; d * d];
    for i in 0..d {
        for j in 0..d {
            if vt[i] != vt[j] {
                continue;
            }
            let mut key: Vec<(usize, usize)> = idx[i].iter().copied().zip(idx[j].iter().copied()).collect();
            key.sort_unstable();
            let next = ids.len();
            class[i * d + j] = Some(*ids.entry(key).or_insert(next));
        }
    }
    (class, ids.len())
}

/// Echelon form of the commutant equations for E(n,r) over the class unknowns.
fn commutant_echelon(n: usize, r: usize, ring: RingDescriptor) -> Result<(Echelon, Vec<Option<usize>>, usize)> {
    let (class, nclasses) = commutant_classes(n, r);
    let mut ech = Echelon::new(ring)?;
    if r == 0 {
        return Ok((ech, class, nclasses));
    }
    let d = n.pow(r as u32);
    let mut seen: HashSet<Vec<(usize, i64)>> = HashSet::new();
    // commuting with the generator joining only the last places: the last
    // place summed out of the column equals the last place summed out of the row
    for i in 0..d {
        let ib = i - i % n;
        for j in 0..d {
            let jb = j - j % n;
            let mut terms: BTreeMap<usize, i64> = BTreeMap::new();
            for x in 0..n {
                if let Some(c) = class[i * d + jb + x] {
                    *terms.entry(c).or_default() += 1;
                }
                if let Some(c) = class[(ib + x) * d + j] {
                    *terms.entry(c).or_default() -= 1;
                }
            }
            let key: Vec<(usize, i64)> = terms.into_iter().filter(|(_, v)| *v != 0).collect();
            if key.is_empty() || !seen.insert(key.clone()) {
                continue;
            }
            let row: BTreeMap<usize, RingElement> = key.iter().map(|&(c, v)| (c, ring.from_int(v))).collect();
            ech.insert(sparse(row))?;
        }
    }
    Ok((ech, class, nclasses))
}

/// dim E(n,r) over a field, from the commutant of the generator actions.
pub fn centraliser_dimension(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<usize> {
    require_field(ring)?;
    limits.check(n, r)?;
    let (ech, _, nclasses) = commutant_echelon(n, r, ring)?;
    Ok(nclasses - ech.rank())
}

/// A basis of E(n,r) over a field, one matrix per free class.
pub fn centraliser_basis(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<Vec<TensorMatrix>> {
    require_field(ring)?;
    limits.check(n, r)?;
    let (ech, class, nclasses) = commutant_echelon(n, r, ring)?;
    let d = n.pow(r as u32);
    Ok(ech
        .nullspace(nclasses)
        .into_iter()
        .map(|v| TensorMatrix::from_fn(n, r, ring, |i, j| class[i * d + j].map_or_else(|| ring.zero(), |c| v[c].clone())))
        .collect())
}

/// Rank over a field of vectorised matrices.
fn span_rank(ring: RingDescriptor, mats: impl IntoIterator<Item = TensorMatrix>) -> Result<usize> {
    let mut ech = Echelon::new(ring)?;
    for m in mats {
        let d = m.dim();
        let row: SparseRow =
            m.entries().iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k, v.clone())).collect();
        debug_assert!(row.iter().all(|(k, _)| *k < d * d));
        ech.insert(row)?;
    }
    Ok(ech.rank())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Subgroup {
    /// All of W_n.
    Full,
    /// The permutations fixing n.
    FixingLast,
}

/// Rank of {Φ(w)} for w in the chosen subgroup.
pub fn span_dimension_w(n: usize, r: usize, ring: RingDescriptor, subgroup: Subgroup, limits: &Limits) -> Result<usize> {
    require_field(ring)?;
    limits.check(n, r)?;
    let ws = Permutation::all(n).into_iter().filter(|w| subgroup == Subgroup::Full || w.fixes(n));
    span_rank(ring, ws.map(|w| phi(&w, n, r, ring)).collect::<Result<Vec<_>>>()?)
}

/// Rank of {Ψ(d)} over all diagrams d.
pub fn span_dimension_psi(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<usize> {
    require_field(ring)?;
    limits.check(n, r)?;
    span_rank(ring, Diagram::enumerate(r).iter().map(|d| psi(d, n, ring)))
}

/// dim of the W_n-commutant on V^{⊗r}: the number of W_n-orbits on pairs.
pub fn sn_commutant_dimension(n: usize, r: usize, limits: &Limits) -> Result<usize> {
    limits.check(n, r)?;
    let d = n.pow(r as u32);
    let mut orbits: HashSet<Vec<u8>> = HashSet::new();
    for i in 0..d {
        let ie = MultiIndex::from_flat(n, r, i);
        for j in 0..d {
            let je = MultiIndex::from_flat(n, r, j);
            let mut seen: Vec<usize> = Vec::new();
            let key: Vec<u8> = ie
                .entries()
                .iter()
                .chain(je.entries())
                .map(|v| match seen.iter().position(|x| x == v) {
                    Some(p) => p as u8,
                    None => {
                        seen.push(*v);
                        (seen.len() - 1) as u8
                    }
                })
                .collect();
            orbits.insert(key);
        }
    }
    Ok(orbits.len())
}

/// Dimension of the commutant of an arbitrary set of d×d matrices, over a
/// field, with every entry an unknown.
fn commutant_dimension_generic(ring: RingDescriptor, d: usize, mats: &[TensorMatrix]) -> Result<usize> {
    let mut ech = Echelon::new(ring)?;
    let mut seen: HashSet<Vec<(usize, String)>> = HashSet::new();
    for m in mats {
        let nz: Vec<(usize, usize, RingElement)> = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let v = m.get(a, b);
                (!v.is_zero()).then(|| (a, b, v.clone()))
            })
            .collect();
        let mut by_row: Vec<Vec<(usize, RingElement)>> = vec![Vec::new(); d];
        let mut by_col: Vec<Vec<(usize, RingElement)>> = vec![Vec::new(); d];
        for (a, b, v) in &nz {
            by_row[*a].push((*b, v.clone()));
            by_col[*b].push((*a, v.clone()));
        }
        // (XM − MX)[i][j] = Σ_k X[i][k] M[k][j] − Σ_k M[i][k] X[k][j]
        for i in 0..d {
            for j in 0..d {
                let mut terms: BTreeMap<usize, RingElement> = BTreeMap::new();
                for (k, v) in &by_col[j] {
                    let e = terms.entry(i * d + k).or_insert_with(|| ring.zero());
                    *e = &*e + v;
                }
                for (k, v) in &by_row[i] {
                    let e = terms.entry(k * d + j).or_insert_with(|| ring.zero());
                    *e = &*e - v;
                }
                let row = sparse(terms);
                if row.is_empty() {
                    continue;
                }
                let key: Vec<(usize, String)> = row.iter().map(|(c, v)| (*c, v.to_string())).collect();
                if seen.insert(key) {
                    ech.insert(row)?;
                }
            }
        }
    }
    Ok(d * d - ech.rank())
}

/// dim E(n,r+½): endomorphisms of V^{⊗r} ⊗ v_n commuting with every diagram
/// of the half partition algebra.
pub fn half_centraliser_dimension(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<usize> {
    require_field(ring)?;
    limits.check(n, r + 1)?;
    let mats: Vec<TensorMatrix> = Diagram::enumerate(r + 1)
        .iter()
        .filter(|d| d.is_half_algebra_member())
        .map(|d| half_restrict(&psi(d, n, ring)))
        .collect::<Result<_>>()?;
    commutant_dimension_generic(ring, n.pow(r as u32), &mats)
}

/// dim E(n,r) computed with every entry an unknown, for small cross-checks.
pub fn centraliser_dimension_unreduced(n: usize, r: usize, ring: RingDescriptor) -> Result<usize> {
    require_field(ring)?;
    Limits { cap: 64 }.check(n, r)?;
    let mats: Vec<TensorMatrix> = Diagram::generators(r).iter().map(|d| psi(d, n, ring)).collect();
    commutant_dimension_generic(ring, n.pow(r as u32), &mats)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub n: usize,
    pub r: usize,
    pub half: bool,
    pub ring: RingDescriptor,
    /// "rank" over fields, "membership" otherwise.
    pub mode: String,
    pub dim_span_w: Option<usize>,
    pub dim_centraliser: Option<usize>,
    pub surjective_phi: bool,
    pub dim_span_psi: Option<usize>,
    pub dim_sn_commutant: Option<usize>,
    pub surjective_psi_checked: bool,
    pub samples_checked: usize,
    pub timings_ms: BTreeMap<String, u128>,
    pub witness: Option<String>,
}

impl VerificationReport {
    fn new(n: usize, r: usize, half: bool, ring: RingDescriptor, mode: &str) -> Self {
        VerificationReport {
            schema: SCHEMA,
            n,
            r,
            half,
            ring,
            mode: mode.into(),
            dim_span_w: None,
            dim_centraliser: None,
            surjective_phi: false,
            dim_span_psi: None,
            dim_sn_commutant: None,
            surjective_psi_checked: false,
            samples_checked: 0,
            timings_ms: BTreeMap::new(),
            witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.surjective_phi && self.witness.is_none()
    }
}

fn timed<T>(report: &mut VerificationReport, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let out = f();
    report.timings_ms.insert(name.into(), t.elapsed().as_millis());
    out
}

/// A random invariant of E(n,r) built by extending a random scalar one
/// degree at a time with random free values.
pub fn random_invariant_by_extension(
    n: usize,
    r: usize,
    ring: RingDescriptor,
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<TensorMatrix> {
    let mut a = TensorMatrix::from_entries(n, 0, ring, vec![random_element(ring, rng)])?;
    for k in 1..=r {
        let f = build_f(n, k, Basis::last_row(n), Policy::LargestFirst)?;
        a = extend(&a, &Assignment::random(&f, ring, rng), limits)?;
    }
    Ok(a)
}

/// Checks that Φ_{n,r} (and Ψ_{n,r}) are onto their centralisers.
///
/// Over a field the dimensions are compared. Over other rings random
/// invariants are built by extension and written exactly as combinations of
/// the Φ(w).
pub fn verify_duality(n: usize, r: usize, ring: RingDescriptor, seed: u64, limits: &Limits) -> Result<VerificationReport> {
    limits.check(n, r)?;
    if ring.is_field() {
        let mut rep = VerificationReport::new(n, r, false, ring, "rank");
        let span = timed(&mut rep, "span_w", || span_dimension_w(n, r, ring, Subgroup::Full, limits))?;
        let cent = timed(&mut rep, "centraliser", || centraliser_dimension(n, r, ring, limits))?;
        rep.dim_span_w = Some(span);
        rep.dim_centraliser = Some(cent);
        rep.surjective_phi = span == cent;
        let psi_span = timed(&mut rep, "span_psi", || span_dimension_psi(n, r, ring, limits))?;
        let sn = timed(&mut rep, "sn_commutant", || sn_commutant_dimension(n, r, limits))?;
        rep.dim_span_psi = Some(psi_span);
        rep.dim_sn_commutant = Some(sn);
        rep.surjective_psi_checked = psi_span == sn;
        if !rep.surjective_phi {
            rep.witness = Some(format!("span of Φ(w) has dimension {span}, centraliser {cent}"));
        } else if !rep.surjective_psi_checked {
            rep.witness = Some(format!("span of Ψ(d) has dimension {psi_span}, W_n-commutant {sn}"));
        }
        return Ok(rep);
    }
    let mut rep = VerificationReport::new(n, r, false, ring, "membership");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = 5;
    let t = Instant::now();
    for s in 0..samples {
        let a = random_invariant_by_extension(n, r, ring, &mut rng, limits)?;
        if !check_membership(&a).in_e {
            rep.witness = Some(format!("sample {s} is not invariant"));
            break;
        }
        match express_in_permutation_span(&a) {
            Ok(_) => rep.samples_checked += 1,
            Err(e) => {
                rep.witness = Some(format!("sample {s}: {e}"));
                break;
            }
        }
    }
    rep.timings_ms.insert("samples".into(), t.elapsed().as_millis());
    rep.surjective_phi = rep.samples_checked == samples;
    Ok(rep)
}

/// Checks the half-integer case through E(n,r+½) ≅ E(n,r)^n_n ≅ E(n−1,r).
pub fn verify_half(n: usize, r: usize, ring: RingDescriptor, limits: &Limits) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("the half case needs n ≥ 2".into()));
    }
    require_field(ring)?;
    limits.check(n, r + 1)?;
    let mut rep = VerificationReport::new(n, r, true, ring, "rank");
    let half = timed(&mut rep, "half_centraliser", || half_centraliser_dimension(n, r, ring, limits))?;
    let lower = timed(&mut rep, "centraliser_n_minus_1", || centraliser_dimension(n - 1, r, ring, limits))?;
    let span = timed(&mut rep, "span_w_fixing_n", || span_dimension_w(n, r, ring, Subgroup::FixingLast, limits))?;
    // η^n_n of Φ(w) for w fixing n is Φ(w̄) one size down
    let excised = timed(&mut rep, "excised", || {
        let mut mats = Vec::new();
        for w in Permutation::all(n).into_iter().filter(|w| w.fixes(n)) {
            let e = eta_unchecked(&phi(&w, n, r, ring)?, n, n);
            let wbar = Permutation::new(w.images()[..n - 1].to_vec())?;
            if e != phi(&wbar, n - 1, r, ring)? {
                return Err(Error::Construction(format!("excision of Φ({w}) is not Φ of its restriction")));
            }
            mats.push(e);
        }
        span_rank(ring, mats)
    })?;
    rep.dim_span_w = Some(span);
    rep.dim_centraliser = Some(half);
    rep.surjective_phi = span == half && excised == lower && half == lower;
    if !rep.surjective_phi {
        rep.witness = Some(format!(
            "dim E(n,r+½) = {half}, span = {span}, excised span = {excised}, dim E(n−1,r) = {lower}"
        ));
    }
    Ok(rep)
}
