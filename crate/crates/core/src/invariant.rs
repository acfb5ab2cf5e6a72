//! Membership in the centraliser E(n,r) and its structure maps: slice sums,
//! restriction ρ, blocks, special invariants and the excision maps η/θ.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::ring::{RingDescriptor, RingElement};
use crate::tensor::{all_ones, TensorMatrix};

/// Flat index of the multi-index obtained by inserting value `v` (0-based)
/// at place `alpha` (1-based) into the (r−1)-index with flat index `ctx`.
pub(crate) fn insert_flat(n: usize, r: usize, alpha: usize, ctx: usize, v: usize) -> usize {
    let low = n.pow((r - alpha) as u32);
    (ctx / low) * low * n + v * low + ctx % low
}

/// Common row and column sum of a square matrix, if there is one.
pub fn is_gds(m: &TensorMatrix) -> Option<RingElement> {
    let d = m.dim();
    let mut sums = Vec::with_capacity(2 * d);
    for i in 0..d {
        sums.push((0..d).fold(m.ring().zero(), |acc, j| acc + m.get(i, j)));
        sums.push((0..d).fold(m.ring().zero(), |acc, j| acc + m.get(j, i)));
    }
    let s = sums.first().cloned().unwrap_or_else(|| m.ring().zero());
    sums.iter().all(|x| *x == s).then_some(s)
}

/// Returns (M is GDS, M commutes with J_n).
pub fn gds_iff_commutes_with_j(m: &TensorMatrix) -> Result<(bool, bool)> {
    let n = m.dim();
    if n <= 1 {
        return Err(Error::InvalidArgument("the criterion needs n > 1".into()));
    }
    let j = TensorMatrix::from_fn(n, 1, m.ring(), |_, _| m.ring().one());
    let m1 = TensorMatrix::from_entries(n, 1, m.ring(), m.entries().to_vec())?;
    let commutes = m1.matmul(&j)? == j.matmul(&m1)?;
    Ok((is_gds(m).is_some(), commutes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// a^{⋯*⋯}_{⋯j⋯}: the row value at place α varies.
    RowStar,
    /// a^{⋯i⋯}_{⋯*⋯}: the column value at place α varies.
    ColStar,
}

/// An α-slice of a matrix in Mat_{I(n,r)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub alpha: usize,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub orientation: Orientation,
    /// The value held fixed at place α on the non-starred side.
    pub fixed: usize,
}

pub fn slice_sum(a: &TensorMatrix, s: &Slice) -> Result<RingElement> {
    let (n, r) = (a.n(), a.r());
    if s.alpha == 0 || s.alpha > r || s.p.r() + 1 != r || s.q.r() + 1 != r || s.fixed == 0 || s.fixed > n {
        return Err(Error::InvalidArgument("slice does not fit the matrix".into()));
    }
    let (pf, qf) = (s.p.flat(), s.q.flat());
    let mut acc = a.ring().zero();
    for v in 0..n {
        let (row, col) = match s.orientation {
            Orientation::RowStar => (v, s.fixed - 1),
            Orientation::ColStar => (s.fixed - 1, v),
        };
        acc = acc + a.get(insert_flat(n, r, s.alpha, pf, row), insert_flat(n, r, s.alpha, qf, col));
    }
    Ok(acc)
}

/// All 2n slice sums at place α for contexts (p, q), row slices first.
fn slice_sums_flat(a: &TensorMatrix, alpha: usize, pf: usize, qf: usize) -> Vec<RingElement> {
    let (n, r) = (a.n(), a.r());
    let mut row_sums = vec![a.ring().zero(); n];
    let mut col_sums = vec![a.ring().zero(); n];
    for x in 0..n {
        let row = insert_flat(n, r, alpha, pf, x);
        for y in 0..n {
            let v = a.get(row, insert_flat(n, r, alpha, qf, y));
            if !v.is_zero() {
                row_sums[y] = &row_sums[y] + v;
                col_sums[x] = &col_sums[x] + v;
            }
        }
    }
    row_sums.extend(col_sums);
    row_sums
}

/// The shared slice-sum value b^p_q, checked over every place.
pub fn common_b(a: &TensorMatrix, p: &MultiIndex, q: &MultiIndex) -> Result<RingElement> {
    let r = a.r();
    if r == 0 || p.r() + 1 != r || q.r() + 1 != r {
        return Err(Error::InvalidArgument("contexts must have length r−1".into()));
    }
    let mut value: Option<RingElement> = None;
    for alpha in 1..=r {
        for s in slice_sums_flat(a, alpha, p.flat(), q.flat()) {
            match &value {
                None => value = Some(s),
                Some(v) if *v != s => {
                    return Err(Error::NotInvariant(format!("slice sums differ at place {alpha} for ({p},{q})")))
                }
                _ => {}
            }
        }
    }
    Ok(value.unwrap())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub in_g: bool,
    pub in_h: bool,
    pub in_s: bool,
    pub in_e: bool,
    pub first_violation: Option<Violation>,
}

/// Identifier of the value type of every flat index of I(n,r).
pub(crate) fn value_type_ids(n: usize, r: usize) -> Vec<usize> {
    let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
    (0..n.pow(r as u32))
        .map(|k| {
            let mi = MultiIndex::from_flat(n, r, k);
            let mut seen: Vec<usize> = Vec::new();
            let key: Vec<u8> = mi
                .entries()
                .iter()
                .map(|v| match seen.iter().position(|x| x == v) {
                    Some(p) => p as u8,
                    None => {
                        seen.push(*v);
                        (seen.len() - 1) as u8
                    }
                })
                .collect();
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

/// Flat index of i with places α and α+1 swapped, for every flat i.
fn adjacent_swap(n: usize, r: usize, alpha: usize) -> Vec<usize> {
    (0..n.pow(r as u32))
        .map(|k| {
            let mut e = MultiIndex::from_flat(n, r, k).entries().to_vec();
            e.swap(alpha - 1, alpha);
            crate::multi_index::flat_of(n, &e)
        })
        .collect()
}

/// Evaluates the three defining conditions of E(n,r).
pub fn check_membership(a: &TensorMatrix) -> MembershipReport {
    let (n, r, d) = (a.n(), a.r(), a.dim());
    let label = |k: usize| MultiIndex::from_flat(n, r, k).to_string();
    let mut first: Option<Violation> = None;
    let mut note = |kind: &str, witness: Vec<String>| {
        if first.is_none() {
            first = Some(Violation { kind: kind.into(), witness });
        }
    };

    let vt = value_type_ids(n, r);
    let in_h = match (0..d * d).find(|&k| vt[k / d] != vt[k % d] && !a.get(k / d, k % d).is_zero()) {
        Some(k) => {
            note("value-type", vec![label(k / d), label(k % d)]);
            false
        }
        None => true,
    };

    let mut in_s = true;
    'outer: for alpha in 1..r {
        let sw = adjacent_swap(n, r, alpha);
        for i in 0..d {
            for j in 0..d {
                if a.get(i, j) != a.get(sw[i], sw[j]) {
                    note("place-permutation", vec![label(i), label(j), format!("s{},{}", alpha, alpha + 1)]);
                    in_s = false;
                    break 'outer;
                }
            }
        }
    }

    let mut in_g = true;
    if r > 0 {
        let dc = n.pow(r as u32 - 1);
        'g: for alpha in 1..=r {
            for pf in 0..dc {
                for qf in 0..dc {
                    let sums = slice_sums_flat(a, alpha, pf, qf);
                    if sums.iter().any(|s| *s != sums[0]) {
                        let ctx = |f| MultiIndex::from_flat(n, r - 1, f).to_string();
                        note("slice-sum", vec![format!("alpha={alpha}"), ctx(pf), ctx(qf)]);
                        in_g = false;
                        break 'g;
                    }
                }
            }
        }
    }

    MembershipReport { in_g, in_h, in_s, in_e: in_g && in_h && in_s, first_violation: first }
}

/// A^i_j, the block with first row value i and first column value j.
pub fn block(a: &TensorMatrix, i: usize, j: usize) -> Result<TensorMatrix> {
    let (n, r) = (a.n(), a.r());
    if r == 0 || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!("no block ({i},{j}) for n={n}, r={r}")));
    }
    let db = n.pow(r as u32 - 1);
    Ok(TensorMatrix::from_fn(n, r - 1, a.ring(), |x, y| a.get((i - 1) * db + x, (j - 1) * db + y).clone()))
}

/// Writes `b` into block (i, j) of `a`.
pub(crate) fn set_block(a: &mut TensorMatrix, i: usize, j: usize, b: &TensorMatrix) {
    let db = b.dim();
    for x in 0..db {
        for y in 0..db {
            a.set((i - 1) * db + x, (j - 1) * db + y, b.get(x, y).clone());
        }
    }
}

fn block_sum(a: &TensorMatrix, fixed: usize, row: bool) -> Result<TensorMatrix> {
    let mut acc = TensorMatrix::zeros(a.n(), a.r() - 1, a.ring());
    for k in 1..=a.n() {
        let b = if row { block(a, fixed, k)? } else { block(a, k, fixed)? };
        acc = acc.add(&b)?;
    }
    Ok(acc)
}

/// ρ(A) as the common block row/column sum, cross-checked on two lines.
pub fn restrict(a: &TensorMatrix) -> Result<TensorMatrix> {
    if a.r() == 0 {
        return Err(Error::InvalidArgument("cannot restrict a degree-0 matrix".into()));
    }
    let by_col = block_sum(a, 1, false)?;
    let by_row = block_sum(a, a.n(), true)?;
    if by_col != by_row {
        return Err(Error::NotInvariant("input not invariant: block sums disagree".into()));
    }
    Ok(by_col)
}

/// Bitmask of the places holding value v.
fn lambda_mask(n: usize, r: usize, k: usize, v: usize) -> u64 {
    let mi = MultiIndex::from_flat(n, r, k);
    mi.entries().iter().enumerate().filter(|(_, &x)| x == v).fold(0, |m, (a, _)| m | 1 << a)
}

/// Whether every nonzero entry satisfies Λ_i(row) = Λ_j(column).
pub fn is_special(a: &TensorMatrix, i: usize, j: usize) -> bool {
    let (n, r, d) = (a.n(), a.r(), a.dim());
    let li: Vec<u64> = (0..d).map(|k| lambda_mask(n, r, k, i)).collect();
    let lj: Vec<u64> = (0..d).map(|k| lambda_mask(n, r, k, j)).collect();
    (0..d).all(|x| (0..d).all(|y| li[x] == lj[y] || a.get(x, y).is_zero()))
}

/// If block row i and block column j vanish off A^i_j, confirms that A is
/// special for (i, j). Returns whether the hypothesis held.
pub fn zero_rowcol_implies_special(a: &TensorMatrix, i: usize, j: usize) -> Result<bool> {
    let n = a.n();
    for k in 1..=n {
        if k != j && !block(a, i, k)?.is_zero() {
            return Ok(false);
        }
        if k != i && !block(a, k, j)?.is_zero() {
            return Ok(false);
        }
    }
    if !is_special(a, i, j) {
        return Err(Error::NotInvariant(format!("vanishing lines but not special for ({i},{j})")));
    }
    Ok(true)
}

/// The order-preserving bijection {1..n−1} → {1..n}∖{p}.
pub fn skip_map(p: usize) -> impl Fn(usize) -> usize {
    move |x| if x < p { x } else { x + 1 }
}

/// η: excise rows containing p and columns containing q, then renumber.
pub fn eta(a: &TensorMatrix, p: usize, q: usize) -> Result<TensorMatrix> {
    let n = a.n();
    if n < 2 || p == 0 || q == 0 || p > n || q > n {
        return Err(Error::InvalidArgument(format!("eta needs 1 ≤ p,q ≤ n with n ≥ 2 (p={p}, q={q}, n={n})")));
    }
    if !is_special(a, p, q) {
        return Err(Error::InvalidArgument(format!("matrix is not special for ({p},{q})")));
    }
    Ok(eta_unchecked(a, p, q))
}

pub(crate) fn eta_unchecked(a: &TensorMatrix, p: usize, q: usize) -> TensorMatrix {
    let (n, r) = (a.n(), a.r());
    let (up, uq) = (skip_map(p), skip_map(q));
    let rows: Vec<usize> =
        (0..(n - 1).pow(r as u32)).map(|k| MultiIndex::from_flat(n - 1, r, k).map_values(n, &up).flat()).collect();
    let cols: Vec<usize> =
        (0..(n - 1).pow(r as u32)).map(|k| MultiIndex::from_flat(n - 1, r, k).map_values(n, &uq).flat()).collect();
    TensorMatrix::from_fn(n - 1, r, a.ring(), |x, y| a.get(rows[x], cols[y]).clone())
}

/// θ^n_n on a matrix over I(n−1,r); the GDS sums of the bottom level must exist.
fn theta_nn(c: &TensorMatrix) -> Result<TensorMatrix> {
    let (m, r, ring) = (c.n(), c.r(), c.ring());
    let n = m + 1;
    if r == 0 {
        return TensorMatrix::from_entries(n, 0, ring, c.entries().to_vec());
    }
    let mut a = TensorMatrix::zeros(n, r, ring);
    if r == 1 {
        let s = is_gds(c).ok_or_else(|| Error::NotInvariant("bottom-level block is not GDS".into()))?;
        for x in 0..m {
            for y in 0..m {
                a.set(x, y, c.get(x, y).clone());
            }
        }
        a.set(m, m, s);
        return Ok(a);
    }
    for i in 1..=m {
        for j in 1..=m {
            set_block(&mut a, i, j, &theta_nn(&block(c, i, j)?)?);
        }
    }
    set_block(&mut a, n, n, &theta_nn(&restrict(c)?)?);
    Ok(a)
}

/// Replaces every value x at every place by u(x), on rows and columns separately.
fn relabel(a: &TensorMatrix, u_row: impl Fn(usize) -> usize, u_col: impl Fn(usize) -> usize) -> TensorMatrix {
    let (n, r) = (a.n(), a.r());
    let d = a.dim();
    let rows: Vec<usize> = (0..d).map(|k| MultiIndex::from_flat(n, r, k).map_values(n, &u_row).flat()).collect();
    let cols: Vec<usize> = (0..d).map(|k| MultiIndex::from_flat(n, r, k).map_values(n, &u_col).flat()).collect();
    let mut out = TensorMatrix::zeros(n, r, a.ring());
    for x in 0..d {
        for y in 0..d {
            let v = a.get(x, y);
            if !v.is_zero() {
                out.set(rows[x], cols[y], v.clone());
            }
        }
    }
    out
}

/// The bijection {1..n} → {1..n} sending n to p and {1..n−1} onto the rest in order.
pub fn theta_label(n: usize, p: usize) -> impl Fn(usize) -> usize {
    move |x| if x == n { p } else { skip_map(p)(x) }
}

/// θ^p_q: E(n−1,r) → E(n,r)^p_q, inverse to η.
pub fn theta(c: &TensorMatrix, p: usize, q: usize) -> Result<TensorMatrix> {
    let n = c.n() + 1;
    if p == 0 || q == 0 || p > n || q > n {
        return Err(Error::InvalidArgument(format!("theta needs 1 ≤ p,q ≤ {n}")));
    }
    if c.r() > 0 && !check_membership(c).in_e {
        return Err(Error::NotInvariant("theta needs an invariant".into()));
    }
    theta_unchecked(c, p, q)
}

pub(crate) fn theta_unchecked(c: &TensorMatrix, p: usize, q: usize) -> Result<TensorMatrix> {
    let n = c.n() + 1;
    let a = theta_nn(c)?;
    Ok(relabel(&a, theta_label(n, p), theta_label(n, q)))
}

/// Restriction of an operator on V^{⊗(r+1)} to V^{⊗r} ⊗ v_n (rows and
/// columns whose last value is n), re-indexed over I(n,r).
pub fn half_restrict(m: &TensorMatrix) -> Result<TensorMatrix> {
    let (n, r) = (m.n(), m.r());
    if r == 0 {
        return Err(Error::InvalidArgument("need degree at least 1".into()));
    }
    Ok(TensorMatrix::from_fn(n, r - 1, m.ring(), |x, y| m.get(x * n + n - 1, y * n + n - 1).clone()))
}

/// Whether A lies in E(n,r)^n_n, the image of E(n,r+½).
pub fn half_algebra_invariants_iso(a: &TensorMatrix) -> bool {
    check_membership(a).in_e && is_special(a, a.n(), a.n())
}

/// ρ∘θ^p_q = θ^p_q∘ρ on C.
pub fn theta_rho_commute_check(c: &TensorMatrix, p: usize, q: usize) -> Result<bool> {
    let lhs = restrict(&theta(c, p, q)?)?;
    let rhs = theta_unchecked(&restrict(c)?, p, q)?;
    Ok(lhs == rhs)
}

/// Positions allowed by the value-type condition alone.
pub fn value_type_shape(n: usize, r: usize) -> Vec<Vec<bool>> {
    let vt = value_type_ids(n, r);
    vt.iter().map(|a| vt.iter().map(|b| a == b).collect()).collect()
}

/// Positions allowed for a special invariant in E(n,r)^i_j.
pub fn special_shape(n: usize, r: usize, i: usize, j: usize) -> Vec<Vec<bool>> {
    let d = n.pow(r as u32);
    let vt = value_type_ids(n, r);
    let li: Vec<u64> = (0..d).map(|k| lambda_mask(n, r, k, i)).collect();
    let lj: Vec<u64> = (0..d).map(|k| lambda_mask(n, r, k, j)).collect();
    (0..d).map(|x| (0..d).map(|y| vt[x] == vt[y] && li[x] == lj[y]).collect()).collect()
}

/// Renders a shape as labelled rows of `*` and `.`.
pub fn render_shape(n: usize, r: usize, shape: &[Vec<bool>]) -> String {
    let labels: Vec<String> = (0..shape.len()).map(|k| MultiIndex::from_flat(n, r, k).to_string()).collect();
    let mut out = format!("cols: {}\n", labels.join(" "));
    for (l, row) in labels.iter().zip(shape) {
        let cells: Vec<&str> = row.iter().map(|&b| if b { "*" } else { "." }).collect();
        out.push_str(&format!("{l} | {}\n", cells.join(" ")));
    }
    out
}

/// The all-ones matrix of size n^r, used as a non-invariant probe.
pub fn all_ones_tensor(n: usize, r: usize, ring: RingDescriptor) -> TensorMatrix {
    if r == 1 {
        return all_ones(n, ring);
    }
    TensorMatrix::from_fn(n, r, ring, |_, _| ring.one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Diagram;
    use crate::multi_index::Permutation;
    use crate::tensor::{phi, psi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: RingDescriptor = RingDescriptor::Rationals;
    const Z: RingDescriptor = RingDescriptor::Integers;

    fn random_span(n: usize, r: usize, ring: RingDescriptor, rng: &mut ChaCha8Rng) -> TensorMatrix {
        let mut a = TensorMatrix::zeros(n, r, ring);
        for w in Permutation::all(n) {
            let c = ring.from_int(rng.gen_range(-3..=3));
            a = a.add_scaled(&c, &phi(&w, n, r, ring).unwrap()).unwrap();
        }
        a
    }

    #[test]
    fn gds_examples() {
        assert_eq!(is_gds(&all_ones(4, Z)), Some(Z.from_int(4)));
        let p = phi(&Permutation::new(vec![3, 1, 2]).unwrap(), 3, 1, Z).unwrap();
        assert_eq!(is_gds(&p), Some(Z.one()));
        assert_eq!(is_gds(&TensorMatrix::from_int_rows(Z, &[vec![1, 0], vec![0, 2]]).unwrap()), None);
    }

    #[test]
    fn gds_iff_commuting_with_all_ones() {
        assert_eq!(gds_iff_commutes_with_j(&all_ones(2, Z)).unwrap(), (true, true));
        let m = TensorMatrix::from_int_rows(Z, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(gds_iff_commutes_with_j(&m).unwrap(), (false, false));
        let z6 = RingDescriptor::Modular(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=4 {
            let m = all_ones(n, z6).scale(&z6.from_int(5)).unwrap().add(&random_span(n, 1, z6, &mut rng)).unwrap();
            assert_eq!(gds_iff_commutes_with_j(&m).unwrap(), (true, true));
        }
        assert!(gds_iff_commutes_with_j(&TensorMatrix::identity(1, 1, Z)).is_err());
    }

    #[test]
    fn membership_examples() {
        for n in 1..=3 {
            for r in 1..=2 {
                for w in Permutation::all(n) {
                    assert!(check_membership(&phi(&w, n, r, Z).unwrap()).in_e);
                }
            }
        }
        let rep = check_membership(&psi(&Diagram::generator_pp(2, 1, 2).unwrap(), 2, Q));
        assert!(!rep.in_g);
        assert_eq!(rep.first_violation.unwrap().kind, "slice-sum");
        for r in 2..=3 {
            assert!(!check_membership(&all_ones_tensor(2, r, Z)).in_h);
        }
    }

    #[test]
    fn slice_sums_of_permutations() {
        let w = Permutation::new(vec![2, 3, 1]).unwrap();
        let a = phi(&w, 3, 2, Z).unwrap();
        let b = phi(&w, 3, 1, Z).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let (pm, qm) = (MultiIndex::from_flat(3, 1, p), MultiIndex::from_flat(3, 1, q));
                assert_eq!(common_b(&a, &pm, &qm).unwrap(), *b.get(p, q));
                let id = TensorMatrix::identity(3, 2, Z);
                assert_eq!(common_b(&id, &pm, &qm).unwrap(), Z.from_int((p == q) as i64));
                assert!(common_b(&TensorMatrix::zeros(3, 2, Z), &pm, &qm).unwrap().is_zero());
                for alpha in 1..=2 {
                    for fixed in 1..=3 {
                        for orientation in [Orientation::RowStar, Orientation::ColStar] {
                            let s = Slice { alpha, p: pm.clone(), q: qm.clone(), orientation, fixed };
                            assert_eq!(slice_sum(&a, &s).unwrap(), *b.get(p, q));
                        }
                    }
                }
            }
        }
        let one = MultiIndex::parse(2, "1").unwrap();
        let nonuniform = TensorMatrix::from_fn(2, 2, Z, |i, j| Z.from_int((i == 0 && j == 0) as i64));
        assert!(matches!(common_b(&nonuniform, &one, &one), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn restriction() {
        for w in Permutation::all(3) {
            for r in 1..=3 {
                let a = phi(&w, 3, r, Z).unwrap();
                let expected = if r == 1 { TensorMatrix::identity(3, 0, Z) } else { phi(&w, 3, r - 1, Z).unwrap() };
                assert_eq!(restrict(&a).unwrap(), expected);
            }
        }
        let g = TensorMatrix::from_int_rows(Z, &[vec![2, 1], vec![1, 2]]).unwrap();
        assert_eq!(restrict(&g).unwrap().entries(), &[Z.from_int(3)]);
        assert!(restrict(&TensorMatrix::zeros(3, 2, Z)).unwrap().is_zero());
        assert!(restrict(&TensorMatrix::from_int_rows(Z, &[vec![1, 0], vec![0, 2]]).unwrap()).is_err());
    }

    #[test]
    fn restriction_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random_span(3, 2, Q, &mut rng);
            let b = random_span(3, 2, Q, &mut rng);
            let c = Q.from_int(rng.gen_range(-5..5));
            let lhs = restrict(&a.add_scaled(&c, &b).unwrap()).unwrap();
            let rhs = restrict(&a).unwrap().add_scaled(&c, &restrict(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn invariants_have_gds_last_place_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, r) in [(3, 2), (4, 2), (3, 3)] {
            let a = random_span(n, r, Q, &mut rng);
            let b = restrict(&a).unwrap();
            let dc = n.pow(r as u32 - 1);
            for p in 0..dc {
                for q in 0..dc {
                    let m = TensorMatrix::from_fn(n, 1, Q, |i, j| a.get(p * n + i, q * n + j).clone());
                    assert_eq!(is_gds(&m).as_ref(), Some(b.get(p, q)));
                }
            }
            // entries whose last value repeats in the context equal b
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    let (mi, mj) = (a.row_index(i), a.row_index(j));
                    let last = mi.entries()[r - 1];
                    if mi.value_type() == mj.value_type() && mi.entries()[..r - 1].contains(&last) {
                        assert_eq!(a.get(i, j), b.get(i / n, j / n));
                    }
                }
            }
        }
    }

    #[test]
    fn special_examples() {
        for w in Permutation::all(3) {
            let a = phi(&w, 3, 2, Z).unwrap();
            for j in 1..=3 {
                assert!(is_special(&a, w.apply(j), j));
                for i in (1..=3).filter(|&i| i != w.apply(j)) {
                    assert!(!is_special(&a, i, j));
                }
            }
        }
        let id = TensorMatrix::identity(3, 2, Z);
        assert!((1..=3).all(|i| is_special(&id, i, i)));
        assert!(!zero_rowcol_implies_special(&id, 1, 2).unwrap());
        let zero = TensorMatrix::zeros(3, 2, Z);
        assert!(zero_rowcol_implies_special(&zero, 2, 3).unwrap());
    }

    #[test]
    fn blocks_are_special_after_reindexing() {
        // A^i_j with rows i·p and columns j·q: Λ_i(i p) = Λ_j(j q) on nonzeros
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, r) = (3, 3);
        let a = random_span(n, r, Z, &mut rng);
        for i in 1..=n {
            for j in 1..=n {
                let b = block(&a, i, j).unwrap();
                for x in 0..b.dim() {
                    for y in 0..b.dim() {
                        if !b.get(x, y).is_zero() {
                            let px = MultiIndex::from_flat(n, r - 1, x);
                            let qy = MultiIndex::from_flat(n, r - 1, y);
                            assert_eq!(px.lambda(i), qy.lambda(j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn theta_base_cases() {
        for n in 2..=5 {
            let id = TensorMatrix::identity(n - 1, 1, Z);
            assert_eq!(theta(&id, n, n).unwrap(), TensorMatrix::identity(n, 1, Z));
        }
        // Q_{n−1} in the minor, 1 at (n,n)
        let n = 4;
        let q3 = TensorMatrix::from_fn(3, 1, Z, |i, j| Z.from_int((j == (i + 1) % 3) as i64));
        let t = theta(&q3, n, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expected = if i < 3 && j < 3 { q3.get(i, j).clone() } else { Z.from_int((i == 3 && j == 3) as i64) };
                assert_eq!(*t.get(i, j), expected);
            }
        }
    }

    #[test]
    fn theta_eta_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, r) in [(3, 1), (3, 2), (4, 2)] {
            for k in 0..100 {
                let c = random_span(n - 1, r, Q, &mut rng);
                let (p, q) = (1 + k % n, 1 + (k / n) % n);
                let a = theta(&c, p, q).unwrap();
                assert!(check_membership(&a).in_e);
                assert!(is_special(&a, p, q));
                assert!(zero_rowcol_implies_special(&a, p, q).unwrap());
                assert_eq!(eta(&a, p, q).unwrap(), c);
            }
        }
    }

    #[test]
    fn theta_of_permutations() {
        // θ^p_q(P(v)^{⊗r}) = P(w)^{⊗r} with w(q) = p
        for n in 2..=4 {
            for v in Permutation::all(n - 1) {
                for (p, q) in [(n, n), (1, n), (n, 1), (2, 1)] {
                    let (up, uq) = (theta_label(n, p), theta_label(n, q));
                    let mut images = vec![0; n];
                    for x in 1..=n {
                        let vx = if x == n { n } else { v.apply(x) };
                        images[uq(x) - 1] = up(vx);
                    }
                    let w = Permutation::new(images).unwrap();
                    for r in 1..=2 {
                        assert_eq!(theta(&phi(&v, n - 1, r, Z).unwrap(), p, q).unwrap(), phi(&w, n, r, Z).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn theta_commutes_with_restriction() {
        let z6 = RingDescriptor::Modular(6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for v in Permutation::all(3) {
            assert!(theta_rho_commute_check(&phi(&v, 3, 2, Z).unwrap(), 2, 4).unwrap());
        }
        assert!(theta_rho_commute_check(&TensorMatrix::zeros(3, 2, Z), 1, 1).unwrap());
        for _ in 0..10 {
            let c = random_span(3, 2, z6, &mut rng);
            assert!(theta_rho_commute_check(&c, rng.gen_range(1..=4), rng.gen_range(1..=4)).unwrap());
        }
    }

    #[test]
    fn special_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (n, r) = (4, 2);
        for (i, j) in [(4, 4), (2, 3)] {
            let a = theta(&random_span(n - 1, r, Z, &mut rng), i, j).unwrap();
            for k in (1..=n).filter(|&k| k != j) {
                assert!(block(&a, i, k).unwrap().is_zero());
            }
            for k in (1..=n).filter(|&k| k != i) {
                assert!(block(&a, k, j).unwrap().is_zero());
            }
            assert_eq!(restrict(&a).unwrap(), block(&a, i, j).unwrap());
        }
    }

    #[test]
    fn special_algebra_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let a = theta(&random_span(3, 2, Z, &mut rng), 2, 2).unwrap();
            let b = theta(&random_span(3, 2, Z, &mut rng), 2, 2).unwrap();
            let c = a.matmul(&b).unwrap();
            assert!(check_membership(&c).in_e && is_special(&c, 2, 2));
        }
    }

    #[test]
    fn half_algebra_examples() {
        let n = 3;
        for w in Permutation::all(n) {
            let a = phi(&w, n, 2, Z).unwrap();
            assert_eq!(half_algebra_invariants_iso(&a), w.fixes(n));
            if w.fixes(n) {
                assert_eq!(half_restrict(&phi(&w, n, 3, Z).unwrap()).unwrap(), a);
            }
        }
        assert!(half_algebra_invariants_iso(&TensorMatrix::identity(n, 2, Z)));
    }

    #[test]
    fn half_diagrams_preserve_last_factor() {
        // Ψ(d) maps V^{⊗r} ⊗ v_n into itself when d joins r+1 to (r+1)′
        let n = 3;
        for d in Diagram::enumerate(3).into_iter().filter(|d| d.is_half_algebra_member()) {
            let m = psi(&d, n, Z);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    if j % n == n - 1 && !m.get(i, j).is_zero() {
                        assert_eq!(i % n, n - 1);
                    }
                }
            }
        }
    }

    #[test]
    fn excision_of_special_shape_is_general_shape() {
        let (n, r) = (4, 2);
        let special = special_shape(n, r, n, n);
        let keep: Vec<usize> = (0..16).filter(|&k| !MultiIndex::from_flat(n, r, k).contains(n)).collect();
        let excised: Vec<Vec<bool>> = keep.iter().map(|&x| keep.iter().map(|&y| special[x][y]).collect()).collect();
        assert_eq!(excised, value_type_shape(3, 2));
    }
}
