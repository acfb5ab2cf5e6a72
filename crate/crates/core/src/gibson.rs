//! A permutation-matrix basis of the GDS matrices E(n,1), and exact
//! coordinates in it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariant::is_gds;
use crate::linalg::rank_over_field;
use crate::multi_index::Permutation;
use crate::ring::{RingDescriptor, RingElement};
use crate::tensor::{phi, TensorMatrix};

fn need_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n ≥ 2, got {n}")));
    }
    Ok(())
}

/// The permutation whose matrix has the one of column j in row rows[j−1].
fn from_rows_of_columns(rows: Vec<usize>) -> Permutation {
    Permutation::new(rows).expect("rows of a permutation matrix")
}

/// Q_n: ones at (i, i+1) and (n, 1).
pub fn circulant_q(n: usize) -> Result<Permutation> {
    need_n(n)?;
    // column j holds its one in row j−1 (column 1 in row n)
    Ok(from_rows_of_columns((1..=n).map(|j| if j == 1 { n } else { j - 1 }).collect()))
}

/// Support of Q_n + I_n.
fn in_support(n: usize, i: usize, j: usize) -> bool {
    i == j || j == i % n + 1
}

/// Zero positions of Q_n + I_n in row-major order.
pub fn gamma_set(n: usize) -> Result<Vec<(usize, usize)>> {
    need_n(n)?;
    let out: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).filter(|&(i, j)| !in_support(n, i, j)).collect();
    debug_assert_eq!(out.len(), n * (n - 2));
    Ok(out)
}

/// Every permutation matrix with a one at (r, c) and its other ones inside
/// the support of Q_n + I_n, as the column of each row.
fn constrained_permutations(n: usize, r: usize, c: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, r: usize, c: usize, row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if row > n {
            out.push(cur.clone());
            return;
        }
        let candidates: Vec<usize> = if row == r { vec![c] } else { (1..=n).filter(|&j| in_support(n, row, j)).collect() };
        for j in candidates {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(n, r, c, row + 1, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, r, c, 1, &mut vec![false; n + 1], &mut Vec::new(), &mut out);
    out
}

fn columns_to_permutation(cols_of_rows: &[usize]) -> Permutation {
    let mut rows_of_cols = vec![0; cols_of_rows.len()];
    for (i, &j) in cols_of_rows.iter().enumerate() {
        rows_of_cols[j - 1] = i + 1;
    }
    from_rows_of_columns(rows_of_cols)
}

/// The matrix obtained by deleting row r and column c, as a permutation of
/// n−1 symbols.
fn minor(w: &Permutation, r: usize, c: usize) -> Permutation {
    let n = w.n();
    let shrink = |x: usize, gap: usize| if x > gap { x - 1 } else { x };
    let rows: Vec<usize> = (1..=n).filter(|&j| j != c).map(|j| shrink(w.apply(j), r)).collect();
    from_rows_of_columns(rows)
}

/// G_{r,c}: the unique permutation matrix with a one at (r, c) and all other
/// ones inside the support of Q_n + I_n. Its minor at (r, c) is Q_{n−1} when
/// r < c and I_{n−1} when c < r; both descriptions are checked.
pub fn gibson_g(n: usize, r: usize, c: usize) -> Result<Permutation> {
    need_n(n)?;
    if r == 0 || c == 0 || r > n || c > n || in_support(n, r, c) {
        return Err(Error::InvalidArgument(format!("({r},{c}) is not a zero position of Q_{n} + I_{n}")));
    }
    let found = constrained_permutations(n, r, c);
    if found.len() != 1 {
        return Err(Error::Construction(format!("{} candidates for G({r},{c})", found.len())));
    }
    let g = columns_to_permutation(&found[0]);
    let expected = if r < c { circulant_q(n - 1)? } else { Permutation::identity(n - 1) };
    if minor(&g, r, c) != expected {
        return Err(Error::Construction(format!("minor of G({r},{c}) does not match")));
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub label: String,
    /// One-line notation of w, with the matrix P(w) = (δ_{i,w(j)}).
    pub permutation: String,
    #[serde(skip)]
    pub w: Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GibsonBasis {
    pub n: usize,
    pub elements: Vec<BasisElement>,
}

impl GibsonBasis {
    pub fn new(n: usize) -> Result<Self> {
        need_n(n)?;
        let mut elements = Vec::new();
        let mut push = |label: String, w: Permutation| elements.push(BasisElement { label, permutation: w.to_string(), w });
        for (r, c) in gamma_set(n)? {
            push(format!("G({r},{c})"), gibson_g(n, r, c)?);
        }
        push("Q".into(), circulant_q(n)?);
        push("I".into(), Permutation::identity(n));
        Ok(GibsonBasis { n, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn matrices(&self, ring: RingDescriptor) -> Vec<TensorMatrix> {
        self.elements.iter().map(|e| phi(&e.w, self.n, 1, ring).expect("basis permutations have n symbols")).collect()
    }
}

/// Coordinates of a GDS matrix in the basis, in basis order.
pub fn gibson_decompose(a: &TensorMatrix) -> Result<Vec<(String, RingElement)>> {
    let (n, ring) = (a.n(), a.ring());
    need_n(n)?;
    if a.r() != 1 {
        return Err(Error::InvalidArgument("expected an n×n matrix".into()));
    }
    if is_gds(a).is_none() {
        return Err(Error::NotInvariant("matrix is not GDS".into()));
    }
    let basis = GibsonBasis::new(n)?;
    let mats = basis.matrices(ring);
    let gamma = gamma_set(n)?;
    let mut coeffs = Vec::with_capacity(basis.len());
    let mut b = a.clone();
    for ((r, c), g) in gamma.iter().zip(&mats) {
        let x = a.get(r - 1, c - 1).clone();
        b = b.add_scaled(&-&x, g)?;
        coeffs.push((format!("G({r},{c})"), x));
    }
    let (xq, xi) = (b.get(n - 1, 0).clone(), b.get(n - 1, n - 1).clone());
    let residual = b.add_scaled(&-&xq, &mats[gamma.len()])?.add_scaled(&-&xi, &mats[gamma.len() + 1])?;
    if !residual.is_zero() {
        return Err(Error::Construction("Gibson residual is not zero".into()));
    }
    coeffs.push(("Q".into(), xq));
    coeffs.push(("I".into(), xi));
    let rebuilt = coeffs.iter().zip(&mats).try_fold(TensorMatrix::zeros(n, 1, ring), |acc, ((_, x), m)| acc.add_scaled(x, m))?;
    if &rebuilt != a {
        return Err(Error::Construction("Gibson reconstruction differs".into()));
    }
    Ok(coeffs)
}

/// Whether the (n−1)²+1 basis matrices are linearly independent over a field.
pub fn linear_independence_check(n: usize, ring: RingDescriptor) -> Result<bool> {
    let basis = GibsonBasis::new(n)?;
    let rows: Vec<Vec<RingElement>> = basis.matrices(ring).into_iter().map(|m| m.entries().to_vec()).collect();
    Ok(rank_over_field(&rows)? == (n - 1) * (n - 1) + 1)
}
