//! Triangular enumeration of pairs `(j, l)` with `1 <= j <= l <= k` and the
//! shift permutation `pi` acting on vectors of that length.
//!
//! Block `j` lists `(j, j)` followed by `(j, k), (j, k-1), ..., (j, j+1)`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriangularIndex {
    pub j: usize,
    pub l: usize,
}

impl TriangularIndex {
    pub fn new(j: usize, l: usize) -> Self {
        TriangularIndex { j, l }
    }

    pub fn is_diagonal(&self) -> bool {
        self.j == self.l
    }
}

impl fmt::Display for TriangularIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u_{{{},{}}}", self.j, self.l)
    }
}

pub fn triangle_len(k: usize) -> usize {
    k * (k + 1) / 2
}

fn block_start(k: usize, j: usize) -> usize {
    // 1 + sum_{m=0}^{j-2} (k - m)
    1 + (j - 1) * k - (j - 1) * (j.saturating_sub(2)) / 2
}

/// 1-based position of `(j, l)`.
pub fn linear_index(k: usize, j: usize, l: usize) -> Result<usize> {
    if k == 0 || j == 0 || j > l || l > k {
        return Err(Error::IndexOutOfRange { k, j, l });
    }
    let s = block_start(k, j);
    Ok(if j == l { s } else { s + (k - l + 1) })
}

/// Pair at the 1-based `position`.
pub fn inverse_index(k: usize, position: usize) -> Result<TriangularIndex> {
    if k == 0 || position == 0 || position > triangle_len(k) {
        return Err(Error::PositionOutOfRange { k, position });
    }
    let mut j = 1;
    while block_start(k, j + 1) <= position && j < k {
        j += 1;
    }
    let off = position - block_start(k, j);
    let l = if off == 0 { j } else { k + 1 - off };
    Ok(TriangularIndex { j, l })
}

/// All pairs in enumeration order.
pub fn canonical_order(k: usize) -> Vec<TriangularIndex> {
    let mut out = Vec::with_capacity(triangle_len(k));
    for j in 1..=k {
        out.push(TriangularIndex::new(j, j));
        for l in (j + 1..=k).rev() {
            out.push(TriangularIndex::new(j, l));
        }
    }
    out
}

/// Canonical vector of symbols `u_{j,l}`.
pub fn canonical_symbols(k: usize) -> Vec<String> {
    canonical_order(k).iter().map(|p| p.to_string()).collect()
}

fn check_k(k: usize, min: usize) -> Result<()> {
    if k < min {
        Err(Error::InvalidK { k, min })
    } else {
        Ok(())
    }
}

/// `pi` as a map on positions: `out[p] = input[source[p]]`, all 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePermutation {
    k: usize,
    source: Vec<usize>,
}

impl TrianglePermutation {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k, 2)?;
        let pos = |j: usize, l: usize| linear_index(k, j, l).map(|p| p - 1);
        let mut source = vec![usize::MAX; triangle_len(k)];
        for idx in canonical_order(k) {
            let (i, j) = (idx.j, idx.l);
            let from = if i == j {
                if i < k {
                    pos(i + 1, i + 1)?
                } else {
                    pos(1, 1)?
                }
            } else if j == k {
                pos(1, i + 1)?
            } else {
                pos(i + 1, j + 1)?
            };
            source[pos(i, j)?] = from;
        }
        Ok(TrianglePermutation { k, source })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.source.len()
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn apply<T: Clone>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        Ok(self.source.iter().map(|&s| v[s].clone()).collect())
    }

    pub fn apply_inverse<T: Clone>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        let mut out = v.to_vec();
        for (p, &s) in self.source.iter().enumerate() {
            out[s] = v[p].clone();
        }
        Ok(out)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }

    /// Cycles as lists of 1-based positions, each starting at its smallest member.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p + 1);
                p = self.source[p];
            }
            out.push(cycle);
        }
        out
    }

    /// Length of the orbit through each 1-based position, indexed from 0.
    pub fn element_orders(&self) -> Vec<usize> {
        let mut orders = vec![0; self.n()];
        for c in self.cycles() {
            for p in &c {
                orders[p - 1] = c.len();
            }
        }
        orders
    }

    pub fn order(&self) -> usize {
        self.cycles().iter().fold(1, |acc, c| acc.lcm(&c.len()))
    }

    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(p, &s)| p == s)
    }

    pub fn compose(&self, other: &TrianglePermutation) -> Result<TrianglePermutation> {
        // (self after other)
        let source = other.apply(&self.source)?;
        Ok(TrianglePermutation { k: self.k, source })
    }
}

pub fn apply_pi<T: Clone>(k: usize, v: &[T]) -> Result<Vec<T>> {
    TrianglePermutation::new(k)?.apply(v)
}

pub fn pi_order(k: usize) -> Result<usize> {
    Ok(TrianglePermutation::new(k)?.order())
}

pub fn cycle_decomposition(k: usize) -> Result<Vec<Vec<usize>>> {
    Ok(TrianglePermutation::new(k)?.cycles())
}

pub fn element_orders(k: usize) -> Result<Vec<usize>> {
    Ok(TrianglePermutation::new(k)?.element_orders())
}

/// Vector `w` with `pi(w)` equal to the canonical enumeration.
pub fn canonical_predecessor(k: usize) -> Result<Vec<TriangularIndex>> {
    check_k(k, 3)?;
    let mut w = Vec::with_capacity(triangle_len(k));
    w.push(TriangularIndex::new(k, k));
    for i in (1..k).rev() {
        w.push(TriangularIndex::new(i, k));
    }
    for j in 1..k {
        w.push(TriangularIndex::new(j, j));
        for l in (j + 1..k).rev() {
            w.push(TriangularIndex::new(j, l));
        }
    }
    Ok(w)
}

/// Column `j` shows block `j` top to bottom, so the first row is the diagonal.
pub fn render_diagram<T: fmt::Display>(k: usize, v: &[T]) -> Result<String> {
    let n = triangle_len(k);
    if v.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: v.len() });
    }
    let cells: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in 0..k {
        let mut line = String::new();
        for j in 1..=k {
            if row > k - j {
                break;
            }
            let p = block_start(k, j) - 1 + row;
            if j > 1 {
                line.push_str("  ");
            }
            line.push_str(&format!("{:<width$}", cells[p]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}
