//! Field-only exact linear algebra: rank, reduced echelon form, solving.
//!
//! Rows are sparse: sorted `(column, value)` pairs with nonzero values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ring::{RingDescriptor, RingElement};

pub type SparseRow = Vec<(usize, RingElement)>;

pub fn to_sparse(row: &[RingElement]) -> SparseRow {
    row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (c, v.clone())).collect()
}

/// `row - factor * other`, both sorted by column.
fn axpy(row: &SparseRow, factor: &RingElement, other: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < other.len() {
        let ca = row.get(a).map(|e| e.0).unwrap_or(usize::MAX);
        let cb = other.get(b).map(|e| e.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(row[a].clone());
            a += 1;
        } else if cb < ca {
            let v = -(factor * &other[b].1);
            if !v.is_zero() {
                out.push((cb, v));
            }
            b += 1;
        } else {
            let v = &row[a].1 - &(factor * &other[b].1);
            if !v.is_zero() {
                out.push((ca, v));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

fn scale(row: &SparseRow, factor: &RingElement) -> SparseRow {
    row.iter().map(|(c, v)| (*c, v * factor)).collect()
}

/// Incrementally maintained echelon basis of a row space over a field.
///
/// Every stored row has pivot entry 1 at its leading column. Rows are
/// reduced against earlier pivots on insertion; `reduced_rows` finishes
/// back-substitution, giving the unique reduced row echelon form.
pub struct Echelon {
    ring: RingDescriptor,
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ring: RingDescriptor) -> Result<Self> {
        if !ring.is_field() {
            return Err(Error::NotAField(ring));
        }
        Ok(Echelon { ring, pivots: BTreeMap::new() })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the current pivots.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut pos = 0;
        while pos < row.len() {
            let c = row[pos].0;
            if let Some(p) = self.pivots.get(&c) {
                let f = row[pos].1.clone();
                row = axpy(&row, &f, p);
            } else {
                pos += 1;
            }
        }
        row
    }

    /// Inserts a row; returns true when it enlarged the span.
    pub fn insert(&mut self, row: SparseRow) -> Result<bool> {
        if let Some((_, v)) = row.first() {
            if v.descriptor() != self.ring {
                return Err(Error::RingMismatch(v.descriptor(), self.ring));
            }
        }
        let row = self.reduce(row);
        match row.first() {
            None => Ok(false),
            Some((c, v)) => {
                let inv = v.inverse().expect("nonzero element of a field");
                let c = *c;
                self.pivots.insert(c, scale(&row, &inv));
                Ok(true)
            }
        }
    }

    /// Reduced row echelon form as (pivot column, row) in pivot order.
    pub fn reduced_rows(&self) -> Vec<(usize, SparseRow)> {
        let mut done: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for (&c, row) in self.pivots.iter().rev() {
            let mut row = row.clone();
            let mut pos = 1;
            while pos < row.len() {
                let col = row[pos].0;
                if let Some(p) = done.get(&col) {
                    let f = row[pos].1.clone();
                    row = axpy(&row, &f, p);
                } else {
                    pos += 1;
                }
            }
            done.insert(c, row);
        }
        done.into_iter().collect()
    }

    /// Basis of {x : row·x = 0 for all rows} in `ncols` unknowns, one vector
    /// per free column in increasing order.
    pub fn nullspace(&self, ncols: usize) -> Vec<Vec<RingElement>> {
        let rref = self.reduced_rows();
        let pivot_cols: std::collections::BTreeSet<usize> = rref.iter().map(|(c, _)| *c).collect();
        let mut basis = Vec::new();
        for f in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
            let mut v = vec![self.ring.zero(); ncols];
            v[f] = self.ring.one();
            for (pc, row) in &rref {
                if let Ok(k) = row.binary_search_by_key(&f, |e| e.0) {
                    v[*pc] = -&row[k].1;
                }
            }
            basis.push(v);
        }
        basis
    }
}

fn ring_of_rows(rows: &[Vec<RingElement>], fallback: Option<RingDescriptor>) -> Result<RingDescriptor> {
    let ring = rows
        .iter()
        .flat_map(|r| r.first())
        .map(|v| v.descriptor())
        .next()
        .or(fallback)
        .ok_or_else(|| Error::InvalidArgument("cannot infer ring of an empty system".into()))?;
    for row in rows {
        for v in row {
            if v.descriptor() != ring {
                return Err(Error::RingMismatch(v.descriptor(), ring));
            }
        }
    }
    Ok(ring)
}

/// Rank of the row span over a field.
pub fn rank_over_field(rows: &[Vec<RingElement>]) -> Result<usize> {
    if rows.iter().all(|r| r.is_empty()) {
        return Ok(0);
    }
    let ring = ring_of_rows(rows, None)?;
    let mut e = Echelon::new(ring)?;
    for row in rows {
        e.insert(to_sparse(row))?;
    }
    Ok(e.rank())
}

/// Solution set of `A x = b`: a particular solution (free variables set to
/// zero) and a nullspace basis, or `None` when inconsistent.
pub fn solve_linear_system_over_field(
    a: &[Vec<RingElement>],
    b: &[RingElement],
) -> Result<Option<(Vec<RingElement>, Vec<Vec<RingElement>>)>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} rows but {} right-hand sides", a.len(), b.len())));
    }
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    if a.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged coefficient matrix".into()));
    }
    let ring = ring_of_rows(a, b.first().map(|v| v.descriptor()))?;
    if let Some(v) = b.iter().find(|v| v.descriptor() != ring) {
        return Err(Error::RingMismatch(v.descriptor(), ring));
    }
    let mut e = Echelon::new(ring)?;
    for (row, rhs) in a.iter().zip(b) {
        let mut s = to_sparse(row);
        if !rhs.is_zero() {
            s.push((ncols, rhs.clone()));
        }
        e.insert(s)?;
    }
    let rref = e.reduced_rows();
    if rref.iter().any(|(c, _)| *c == ncols) {
        return Ok(None);
    }
    let mut particular = vec![ring.zero(); ncols];
    for (pc, row) in &rref {
        if let Some((c, v)) = row.last() {
            if *c == ncols {
                particular[*pc] = v.clone();
            }
        }
    }
    let mut coeff = Echelon::new(ring)?;
    for row in a {
        coeff.insert(to_sparse(row))?;
    }
    Ok(Some((particular, coeff.nullspace(ncols))))
}
