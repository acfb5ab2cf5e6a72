//! Matrices on V^{⊗r}, the diagram representation Ψ and the permutation
//! representation Φ(w) = P(w)^{⊗r}.
//!
//! Rows and columns are indexed by I(n,r) in lexicographic order and the
//! entry at row i, column j is a^i_j. With `psi(d)` defined by placing the
//! top row of `d` on the row index, products compose in diagram order:
//! `psi(d1) * psi(d2) = n^k psi(d3)` whenever `d1 d2 = δ^k d3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::multi_index::{MultiIndex, Permutation};
use crate::ring::{RingDescriptor, RingElement};

pub const SCHEMA: &str = "swd/1";

/// Cap on the matrix dimension n^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { cap: 1024 }
    }
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits { cap: usize::MAX }
    }

    pub fn check(&self, n: usize, r: usize) -> Result<()> {
        let size = checked_dim(n, r).unwrap_or(usize::MAX);
        if size > self.cap {
            return Err(Error::SizeCap { size, cap: self.cap });
        }
        Ok(())
    }
}

fn checked_dim(n: usize, r: usize) -> Option<usize> {
    n.checked_pow(r as u32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorMatrix {
    n: usize,
    r: usize,
    ring: RingDescriptor,
    entries: Vec<RingElement>,
}

impl TensorMatrix {
    pub fn zeros(n: usize, r: usize, ring: RingDescriptor) -> Self {
        let d = n.pow(r as u32);
        TensorMatrix { n, r, ring, entries: vec![ring.zero(); d * d] }
    }

    pub fn identity(n: usize, r: usize, ring: RingDescriptor) -> Self {
        let mut m = Self::zeros(n, r, ring);
        for k in 0..m.dim() {
            m.set(k, k, ring.one());
        }
        m
    }

    pub fn from_fn(n: usize, r: usize, ring: RingDescriptor, f: impl Fn(usize, usize) -> RingElement) -> Self {
        let d = n.pow(r as u32);
        let entries = (0..d * d).map(|k| f(k / d, k % d)).collect();
        TensorMatrix { n, r, ring, entries }
    }

    /// An n×n matrix (r = 1) from integer rows.
    pub fn from_int_rows(ring: RingDescriptor, rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension("matrix must be square".into()));
        }
        Ok(Self::from_fn(n, 1, ring, |i, j| ring.from_int(rows[i][j])))
    }

    /// A matrix from explicit entries in row-major order.
    pub fn from_entries(n: usize, r: usize, ring: RingDescriptor, entries: Vec<RingElement>) -> Result<Self> {
        let d = n.pow(r as u32);
        if entries.len() != d * d {
            return Err(Error::Dimension(format!("expected {} entries, got {}", d * d, entries.len())));
        }
        if let Some(v) = entries.iter().find(|v| v.descriptor() != ring) {
            return Err(Error::RingMismatch(v.descriptor(), ring));
        }
        Ok(TensorMatrix { n, r, ring, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn ring(&self) -> RingDescriptor {
        self.ring
    }

    /// Number of rows, n^r.
    pub fn dim(&self) -> usize {
        self.n.pow(self.r as u32)
    }

    pub fn entries(&self) -> &[RingElement] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElement {
        &self.entries[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RingElement) {
        let d = self.dim();
        self.entries[i * d + j] = v;
    }

    /// a^i_j addressed by multi-indices.
    pub fn at(&self, i: &MultiIndex, j: &MultiIndex) -> &RingElement {
        self.get(i.flat(), j.flat())
    }

    pub fn set_at(&mut self, i: &MultiIndex, j: &MultiIndex, v: RingElement) {
        self.set(i.flat(), j.flat(), v)
    }

    pub fn row_index(&self, k: usize) -> MultiIndex {
        MultiIndex::from_flat(self.n, self.r, k)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring, other.ring));
        }
        if (self.n, self.r) != (other.n, other.r) {
            return Err(Error::Dimension(format!(
                "shape (n={}, r={}) vs (n={}, r={})",
                self.n, self.r, other.n, other.r
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn scale(&self, c: &RingElement) -> Result<Self> {
        if c.descriptor() != self.ring {
            return Err(Error::RingMismatch(c.descriptor(), self.ring));
        }
        Ok(self.with_entries(self.entries.iter().map(|a| a * c).collect()))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &RingElement, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        if c.descriptor() != self.ring {
            return Err(Error::RingMismatch(c.descriptor(), self.ring));
        }
        let entries =
            self.entries.iter().zip(&other.entries).map(|(a, b)| if b.is_zero() { a.clone() } else { a + &(c * b) }).collect();
        Ok(self.with_entries(entries))
    }

    fn with_entries(&self, entries: Vec<RingElement>) -> Self {
        TensorMatrix { n: self.n, r: self.r, ring: self.ring, entries }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        Self::from_fn(self.n, self.r, self.ring, |i, j| self.entries[j * d + i].clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let d = self.dim();
        let other_rows: Vec<Vec<(usize, &RingElement)>> = (0..d)
            .map(|k| (0..d).filter_map(|j| Some((j, other.get(k, j))).filter(|(_, v)| !v.is_zero())).collect())
            .collect();
        let rows: Vec<Vec<RingElement>> = (0..d)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![self.ring.zero(); d];
                for k in 0..d {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    for &(j, b) in &other_rows[k] {
                        acc[j] = &acc[j] + &(a * b);
                    }
                }
                acc
            })
            .collect();
        Ok(self.with_entries(rows.into_iter().flatten().collect()))
    }

    /// Kronecker product; the result acts on V^{⊗(r₁+r₂)}.
    pub fn kronecker(&self, other: &Self) -> Result<Self> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring, other.ring));
        }
        if self.n != other.n {
            return Err(Error::Dimension(format!("tensor factors of rank {} and {}", self.n, other.n)));
        }
        let db = other.dim();
        Ok(Self::from_fn(self.n, self.r + other.r, self.ring, |i, j| {
            self.get(i / db, j / db) * other.get(i % db, j % db)
        }))
    }

    /// phi(w)·A: row i of the result is row w⁻¹i of A.
    pub fn left_act(&self, w: &Permutation) -> Result<Self> {
        let winv = w.inverse();
        let perm = self.index_permutation(&winv)?;
        let d = self.dim();
        Ok(Self::from_fn(self.n, self.r, self.ring, |i, j| self.entries[perm[i] * d + j].clone()))
    }

    /// A·phi(w): column j of the result is column w·j of A.
    pub fn right_act(&self, w: &Permutation) -> Result<Self> {
        let perm = self.index_permutation(w)?;
        let d = self.dim();
        Ok(Self::from_fn(self.n, self.r, self.ring, |i, j| self.entries[i * d + perm[j]].clone()))
    }

    /// Flat index of w·i for every flat i.
    fn index_permutation(&self, w: &Permutation) -> Result<Vec<usize>> {
        if w.n() != self.n {
            return Err(Error::Dimension(format!("permutation on {} symbols, matrix over {}", w.n(), self.n)));
        }
        Ok((0..self.dim()).map(|k| self.row_index(k).act_left(w).unwrap().flat()).collect())
    }

    /// Casts integer-valued entries into another ring.
    pub fn change_ring(&self, ring: RingDescriptor) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|v| {
                v.to_bigint()
                    .map(|b| ring.from_bigint(&b))
                    .ok_or_else(|| Error::InvalidArgument(format!("entry {v} is not integral")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorMatrix { n: self.n, r: self.r, ring, entries })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let rows: Vec<Vec<String>> =
            (0..d).map(|i| (0..d).map(|j| self.get(i, j).to_string()).collect()).collect();
        serde_json::json!({"schema": SCHEMA, "n": self.n, "r": self.r, "ring": self.ring, "rows": rows})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            r: usize,
            ring: RingDescriptor,
            rows: Vec<Vec<serde_json::Value>>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let d = raw.n.pow(raw.r as u32);
        if raw.rows.len() != d || raw.rows.iter().any(|row| row.len() != d) {
            return Err(Error::Dimension(format!("expected {d}×{d} rows for n={}, r={}", raw.n, raw.r)));
        }
        let mut entries = Vec::with_capacity(d * d);
        for cell in raw.rows.iter().flatten() {
            let text = match cell {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(k) => k.to_string(),
                other => return Err(Error::Parse(format!("bad matrix entry {other}"))),
            };
            entries.push(raw.ring.parse_element(&text)?);
        }
        Ok(TensorMatrix { n: raw.n, r: raw.r, ring: raw.ring, entries })
    }

    /// Plain-text grid with multi-index labels.
    pub fn to_table(&self) -> String {
        let d = self.dim();
        let labels: Vec<String> = (0..d).map(|k| self.row_index(k).to_string()).collect();
        let cells: Vec<Vec<String>> = (0..d).map(|i| (0..d).map(|j| self.get(i, j).to_string()).collect()).collect();
        let w = cells.iter().flatten().chain(labels.iter()).map(|s| s.len()).max().unwrap_or(1);
        let mut out = format!("{:>w$} |", "");
        for l in &labels {
            out.push_str(&format!(" {l:>w$}"));
        }
        out.push('\n');
        for (l, row) in labels.iter().zip(&cells) {
            out.push_str(&format!("{l:>w$} |"));
            for c in row {
                out.push_str(&format!(" {c:>w$}"));
            }
            out.push('\n');
        }
        out
    }
}

impl Serialize for TensorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Ψ(d): entry (i, j) is 1 when top ↦ i, bottom ↦ j is constant on every block.
pub fn psi(d: &Diagram, n: usize, ring: RingDescriptor) -> TensorMatrix {
    let r = d.r();
    let mut m = TensorMatrix::zeros(n, r, ring);
    let blocks = d.blocks();
    let mut values = vec![1usize; blocks.len()];
    let mut verts = vec![0usize; 2 * r];
    loop {
        for (b, &v) in blocks.iter().zip(&values) {
            for &x in b {
                verts[x] = v;
            }
        }
        let i = crate::multi_index::flat_of(n, &verts[..r]);
        let j = crate::multi_index::flat_of(n, &verts[r..]);
        m.set(i, j, ring.one());
        // odometer over block values
        let mut k = 0;
        loop {
            if k == values.len() {
                return m;
            }
            if values[k] < n {
                values[k] += 1;
                break;
            }
            values[k] = 1;
            k += 1;
        }
    }
}

/// Φ(w) = P(w)^{⊗r} with P(w) = (δ_{i, w(j)}).
pub fn phi(w: &Permutation, n: usize, r: usize, ring: RingDescriptor) -> Result<TensorMatrix> {
    if w.n() != n {
        return Err(Error::Dimension(format!("permutation on {} symbols for n = {n}", w.n())));
    }
    let mut m = TensorMatrix::zeros(n, r, ring);
    for j in 0..m.dim() {
        let col = MultiIndex::from_flat(n, r, j);
        let row = col.act_left(w)?;
        m.set(row.flat(), j, ring.one());
    }
    Ok(m)
}

/// The all-ones n×n matrix J_n.
pub fn all_ones(n: usize, ring: RingDescriptor) -> TensorMatrix {
    TensorMatrix::from_fn(n, 1, ring, |_, _| ring.one())
}
