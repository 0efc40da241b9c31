//! Exact sparse linear algebra over the rationals.
//!
//! This is the engine behind every quotient dimension, span membership and
//! affine solve in the crate. Two layers:
//!
//! - [`rref`] / [`solve_affine`]: textbook reduced row echelon form with a
//!   fixed pivot rule, used where the reduced form itself matters.
//! - [`Echelon`]: an incremental integer echelon basis used for the large
//!   rank computations (relation matrices grow into the tens of thousands
//!   of rows at degree 7). Rows are kept content-free to bound coefficient
//!   growth.
//!
//! Pivot rule everywhere: leftmost column first; among candidate rows the
//! one whose leading entry has minimal bit length, ties broken by smallest
//! row index. This makes all outputs deterministic and independent of the
//! number of worker threads.

use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Shorthand for a small rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

fn rat_bits(x: &Rat) -> u64 {
    x.numer().bits() + x.denom().bits()
}

/// Parse "a/b" or "a" into a rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: Int = n
        .parse()
        .map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
    let d: Int = d
        .parse()
        .map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Invalid(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

/// Format a rational as "a" or "a/b".
pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A sparse vector: entries sorted by column, no zeros stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SparseVec {
    pub entries: Vec<(usize, Rat)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects arbitrary (col, coeff) pairs, merging duplicates and
    /// dropping zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rat)>>(pairs: I) -> Self {
        let mut entries: Vec<(usize, Rat)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Rat)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        Self { entries: merged }
    }

    pub fn unit(col: usize) -> Self {
        Self {
            entries: vec![(col, Rat::one())],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leading(&self) -> Option<(usize, &Rat)> {
        self.entries.first().map(|(c, v)| (*c, v))
    }

    pub fn get(&self, col: usize) -> Option<&Rat> {
        self.entries
            .binary_search_by_key(&col, |e| e.0)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn max_col(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    /// self + c * other, merged.
    pub fn add_scaled(&self, c: &Rat, other: &Self) -> Self {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ca, va) = &self.entries[i];
            let (cb, vb) = &other.entries[j];
            match ca.cmp(cb) {
                std::cmp::Ordering::Less => {
                    out.push((*ca, va.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((*cb, vb * c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = va + vb * c;
                    if !v.is_zero() {
                        out.push((*ca, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.entries[i..].iter().cloned());
        out.extend(other.entries[j..].iter().map(|(cb, vb)| (*cb, vb * c)));
        Self { entries: out }
    }
}

/// A sparse matrix in row-major form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![SparseVec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i] = SparseVec::unit(i);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if let Some(c) = r.max_col() {
                if c >= cols {
                    return Err(Error::Invalid(format!(
                        "row {i} has entry in column {c}, but the matrix has {cols} columns"
                    )));
                }
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rat)>,
    {
        let mut per_row: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::Invalid(format!(
                    "entry ({r},{c}) out of bounds for a {rows}x{cols} matrix"
                )));
            }
            per_row[r].push((c, v));
        }
        Ok(Self {
            rows,
            cols,
            data: per_row.into_iter().map(SparseVec::from_pairs).collect(),
        })
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.data[i]
    }

    pub fn rows_vec(&self) -> &[SparseVec] {
        &self.data
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.entries.len()).sum()
    }

    /// Text interchange format: header "rows cols nnz", then one line
    /// "row col num/den" per nonzero entry, in (row, col) order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.rows, self.cols, self.nnz()).unwrap();
        for (i, row) in self.data.iter().enumerate() {
            for (c, v) in &row.entries {
                writeln!(s, "{} {} {}", i, c, fmt_rat(v)).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty matrix text".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Invalid(format!("bad matrix header {header:?}")));
        }
        let rows: usize = parts[0]
            .parse()
            .map_err(|_| Error::Invalid("bad row count".into()))?;
        let cols: usize = parts[1]
            .parse()
            .map_err(|_| Error::Invalid("bad col count".into()))?;
        let nnz: usize = parts[2]
            .parse()
            .map_err(|_| Error::Invalid("bad nnz".into()))?;
        let mut triplets = Vec::with_capacity(nnz);
        for line in lines {
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 3 {
                return Err(Error::Invalid(format!("bad matrix line {line:?}")));
            }
            let r: usize = p[0]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad row index in {line:?}")))?;
            let c: usize = p[1]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad col index in {line:?}")))?;
            triplets.push((r, c, parse_rat(p[2])?));
        }
        if triplets.len() != nnz {
            return Err(Error::Invalid(format!(
                "header promised {nnz} entries, found {}",
                triplets.len()
            )));
        }
        Self::from_triplets(rows, cols, triplets)
    }
}

/// Result of [`rref`].
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: SparseMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form over exact rationals.
///
/// Output rows are ordered by pivot column with zero rows at the bottom,
/// so the result is unique for a given input and `rref` is a projection.
pub fn rref(m: &SparseMatrix) -> Rref {
    let (reduced, pivots, _) = rref_core(m.data.clone(), m.cols, usize::MAX);
    let rank = pivots.len();
    Rref {
        matrix: SparseMatrix {
            rows: m.rows,
            cols: m.cols,
            data: reduced,
        },
        rank,
        pivots,
    }
}

/// Core elimination. Pivots are searched only among columns `< pivot_cols`;
/// trailing columns are carried along (used for augmented systems).
/// Returns (rows, pivot columns, for each pivot the original row index it
/// came from). Row updates within a pivot step run in parallel; the result
/// does not depend on the thread count.
fn rref_core(
    mut rows: Vec<SparseVec>,
    cols: usize,
    pivot_cols: usize,
) -> (Vec<SparseVec>, Vec<usize>, Vec<usize>) {
    let n = rows.len();
    // processed[i] = Some(pivot col) once row i has been chosen as a pivot row
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; n];
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (col, row idx)

    let bound = pivot_cols.min(cols);
    for col in 0..bound {
        // pivot candidates: unprocessed rows whose leading entry is in `col`
        let mut best: Option<(u64, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if pivot_of_row[i].is_some() {
                continue;
            }
            if let Some((lead, v)) = row.leading() {
                if lead == col {
                    let key = (rat_bits(v), i);
                    if best.map_or(true, |b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
        let Some((_, pi)) = best else { continue };

        // normalize pivot row to leading 1
        let inv = {
            let (_, v) = rows[pi].leading().unwrap();
            v.recip()
        };
        rows[pi] = rows[pi].scale(&inv);
        let pivot_row = rows[pi].clone();

        let eliminate = |row: &mut SparseVec| {
            if let Some(c) = row.get(col) {
                let c = -c.clone();
                *row = row.add_scaled(&c, &pivot_row);
            }
        };
        if n >= 64 {
            rows.par_iter_mut()
                .enumerate()
                .filter(|(i, _)| *i != pi)
                .for_each(|(_, row)| eliminate(row));
        } else {
            for (i, row) in rows.iter_mut().enumerate() {
                if i != pi {
                    eliminate(row);
                }
            }
        }
        pivot_of_row[pi] = Some(col);
        pivots.push((col, pi));
    }

    // order rows by pivot column, zero/non-pivot rows at the bottom
    let mut ordered = Vec::with_capacity(n);
    let mut pivot_cols_out = Vec::with_capacity(pivots.len());
    let mut pivot_rows_out = Vec::with_capacity(pivots.len());
    for &(c, i) in &pivots {
        ordered.push(rows[i].clone());
        pivot_cols_out.push(c);
        pivot_rows_out.push(i);
    }
    for (i, row) in rows.into_iter().enumerate() {
        if pivot_of_row[i].is_none() {
            ordered.push(row);
        }
    }
    (ordered, pivot_cols_out, pivot_rows_out)
}

/// `ambient - rank(relations)`. Every relation must fit in the ambient
/// dimension.
pub fn quotient_dim(ambient: usize, relations: &[SparseVec]) -> Result<usize> {
    let mut ech = Echelon::new(ambient);
    for (i, r) in relations.iter().enumerate() {
        if let Some(c) = r.max_col() {
            if c >= ambient {
                return Err(Error::Invalid(format!(
                    "relation {i} has length > ambient dimension {ambient} (column {c})"
                )));
            }
        }
        ech.push_rat(r);
    }
    Ok(ambient - ech.rank())
}

/// True iff `v` lies in the rational span of `relations`.
pub fn in_span(v: &SparseVec, relations: &[SparseVec], len: usize) -> Result<bool> {
    for r in relations.iter().chain(std::iter::once(v)) {
        if let Some(c) = r.max_col() {
            if c >= len {
                return Err(Error::Invalid(format!(
                    "vector has entry in column {c}, length is {len}"
                )));
            }
        }
    }
    let mut ech = Echelon::new(len);
    for r in relations {
        ech.push_rat(r);
    }
    Ok(ech.reduce_rat(v).is_empty())
}

/// Outcome of [`solve_affine`].
#[derive(Clone, Debug)]
pub enum SolveOutcome {
    /// A solution with all free variables set to zero.
    Solution(Vec<Rat>),
    /// Left-kernel certificate `y`: `y·A = 0` and `y·b != 0`.
    Inconsistent(Vec<Rat>),
}

/// Solve `A x = b` exactly. Free variables are zeroed, making the output
/// deterministic. On inconsistency returns the certificate row.
pub fn solve_affine(a: &SparseMatrix, b: &[Rat]) -> Result<SolveOutcome> {
    if a.rows != b.len() {
        return Err(Error::Invalid(format!(
            "matrix has {} rows but the right-hand side has {}",
            a.rows,
            b.len()
        )));
    }
    // augmented rows [A | b | I]
    let bcol = a.cols;
    let icol0 = a.cols + 1;
    let rows: Vec<SparseVec> = (0..a.rows)
        .map(|i| {
            let mut pairs: Vec<(usize, Rat)> = a.data[i].entries.clone();
            if !b[i].is_zero() {
                pairs.push((bcol, b[i].clone()));
            }
            pairs.push((icol0 + i, Rat::one()));
            SparseVec::from_pairs(pairs)
        })
        .collect();
    let (reduced, pivots, _) = rref_core(rows, icol0 + a.rows, a.cols);

    // any row with zero A-part but nonzero b-entry certifies inconsistency
    for row in &reduced {
        let a_zero = row.entries.iter().all(|(c, _)| *c >= bcol);
        if a_zero {
            if let Some(bv) = row.get(bcol) {
                if !bv.is_zero() {
                    let mut y = vec![Rat::zero(); a.rows];
                    for (c, v) in &row.entries {
                        if *c >= icol0 {
                            y[*c - icol0] = v.clone();
                        }
                    }
                    return Ok(SolveOutcome::Inconsistent(y));
                }
            }
        }
    }
    let mut x = vec![Rat::zero(); a.cols];
    for (k, &col) in pivots.iter().enumerate() {
        if let Some(v) = reduced[k].get(bcol) {
            x[col] = v.clone();
        }
    }
    Ok(SolveOutcome::Solution(x))
}

/// Incremental echelon basis over the integers; rank engine for the big
/// relation matrices. Rows are primitive (content 1, positive leading
/// coefficient).
pub struct Echelon {
    cols: usize,
    pivots: BTreeMap<usize, Vec<(usize, Int)>>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            pivots: BTreeMap::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn normalize(row: &mut Vec<(usize, Int)>) {
        if row.is_empty() {
            return;
        }
        let mut g = Int::zero();
        for (_, v) in row.iter() {
            g = num::Integer::gcd(&g, v);
        }
        if row[0].1.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for (_, v) in row.iter_mut() {
                *v /= &g;
            }
        }
    }

    fn eliminate_step(row: &mut Vec<(usize, Int)>, pivot: &[(usize, Int)]) {
        // row <- p_lead * row - r_lead * pivot  (cancels the leading term)
        let r_lead = row[0].1.clone();
        let p_lead = pivot[0].1.clone();
        let mut out: Vec<(usize, Int)> = Vec::with_capacity(row.len() + pivot.len());
        let (mut i, mut j) = (0, 0);
        while i < row.len() && j < pivot.len() {
            match row[i].0.cmp(&pivot[j].0) {
                std::cmp::Ordering::Less => {
                    out.push((row[i].0, &row[i].1 * &p_lead));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((pivot[j].0, -(&pivot[j].1 * &r_lead)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = &row[i].1 * &p_lead - &pivot[j].1 * &r_lead;
                    if !v.is_zero() {
                        out.push((row[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        for e in &row[i..] {
            out.push((e.0, &e.1 * &p_lead));
        }
        for e in &pivot[j..] {
            out.push((e.0, -(&e.1 * &r_lead)));
        }
        *row = out;
    }

    fn reduce_leading(&self, mut row: Vec<(usize, Int)>) -> Vec<(usize, Int)> {
        loop {
            let Some(&(lead, _)) = row.first() else {
                return row;
            };
            let Some(pivot) = self.pivots.get(&lead) else {
                return row;
            };
            Self::eliminate_step(&mut row, pivot);
            Self::normalize(&mut row);
        }
    }

    /// Insert an integer row; returns true if the rank grew.
    pub fn push_int(&mut self, row: Vec<(usize, Int)>) -> bool {
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        let mut row = self.reduce_leading(row);
        if row.is_empty() {
            return false;
        }
        Self::normalize(&mut row);
        let lead = row[0].0;
        assert!(lead < self.cols, "row exceeds column count");
        self.pivots.insert(lead, row);
        true
    }

    /// Insert a rational row (denominators cleared first).
    pub fn push_rat(&mut self, row: &SparseVec) -> bool {
        self.push_int(clear_denominators(row))
    }

    /// Fully reduce an integer row against the current basis; the result has
    /// no leading term matching any pivot.
    pub fn reduce_int(&self, row: Vec<(usize, Int)>) -> Vec<(usize, Int)> {
        self.reduce_leading(row)
    }

    pub fn reduce_rat(&self, row: &SparseVec) -> Vec<(usize, Int)> {
        self.reduce_leading(clear_denominators(row))
    }
}

/// Scale a rational vector to a primitive integer vector.
pub fn clear_denominators(v: &SparseVec) -> Vec<(usize, Int)> {
    let mut lcm = Int::one();
    for (_, x) in &v.entries {
        lcm = num::Integer::lcm(&lcm, x.denom());
    }
    let mut out: Vec<(usize, Int)> = v
        .entries
        .iter()
        .map(|(c, x)| (*c, x.numer() * (&lcm / x.denom())))
        .collect();
    Echelon::normalize(&mut out);
    out
}

/// A fully reduced relation basis (RREF rows indexed by pivot column),
/// supporting O(nnz) reduction of arbitrary vectors to their canonical
/// residue modulo the row space.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    cols: usize,
    rows: BTreeMap<usize, SparseVec>,
}

impl ReducedBasis {
    pub fn from_relations(cols: usize, relations: &[SparseVec]) -> Self {
        let (reduced, pivots, _) = rref_core(relations.to_vec(), cols, usize::MAX);
        let rows = pivots
            .iter()
            .enumerate()
            .map(|(k, &c)| (c, reduced[k].clone()))
            .collect();
        Self { cols, rows }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Canonical residue of `v` modulo the row space: the unique element of
    /// `v + rowspace` supported on non-pivot columns.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut acc = v.clone();
        // single pass suffices: RREF rows only have their pivot in pivot columns
        let mut corrections: Vec<(Rat, &SparseVec)> = Vec::new();
        for (c, x) in &acc.entries {
            if let Some(row) = self.rows.get(c) {
                corrections.push((-x.clone(), row));
            }
        }
        for (coef, row) in corrections {
            acc = acc.add_scaled(&coef, row);
        }
        debug_assert!(acc.entries.iter().all(|(c, _)| !self.rows.contains_key(c)));
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(usize, i64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().map(|&(c, v)| (c, rat(v, 1))))
    }

    // xorshift; good enough for matrix fuzzing and fully reproducible
    struct Rng(u64);
    impl Rng {
        fn next(&mut self) -> u64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            x
        }
        fn small(&mut self) -> i64 {
            (self.next() % 11) as i64 - 5
        }
    }

    fn random_matrix(rng: &mut Rng, n: usize, m: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(
            n,
            m,
            (0..n).flat_map(|r| (0..m).map(move |c| (r, c))).filter_map(|(r, c)| {
                let v = rng.small();
                (v != 0).then(|| (r, c, rat(v, 1)))
            }),
        )
        .unwrap()
    }

    /// Dense fraction-free (Bareiss) elimination; independent rank oracle.
    fn bareiss_rank(m: &SparseMatrix) -> usize {
        let mut a = vec![vec![Int::zero(); m.cols]; m.rows];
        for r in 0..m.rows {
            for (c, v) in &m.row(r).entries {
                assert!(v.denom().is_one());
                a[r][*c] = v.numer().clone();
            }
        }
        let (mut rank, mut prev) = (0, Int::one());
        for col in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in (rank + 1)..m.rows {
                for c in (col + 1)..m.cols {
                    let v = (&a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c]) / &prev;
                    a[r][c] = v;
                }
                a[r][col] = Int::zero();
            }
            prev = a[rank][col].clone();
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    #[test]
    fn rref_identity() {
        let r = rref(&SparseMatrix::identity(2));
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.matrix, SparseMatrix::identity(2));
    }

    #[test]
    fn rref_proportional_rows() {
        let m = SparseMatrix::from_rows(2, vec![sv(&[(0, 1), (1, 2)]), sv(&[(0, 2), (1, 4)])])
            .unwrap();
        assert_eq!(rref(&m).rank, 1);
    }

    #[test]
    fn rref_matches_dense_oracle() {
        let mut rng = Rng(0xdead_beef);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 8, 8);
            assert_eq!(rref(&m).rank, bareiss_rank(&m));
        }
    }

    #[test]
    fn rref_is_projection() {
        let mut rng = Rng(42);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 6, 9);
            let r1 = rref(&m);
            let r2 = rref(&r1.matrix);
            assert_eq!(r1.matrix, r2.matrix);
            assert_eq!(r1.pivots, r2.pivots);
        }
    }

    #[test]
    fn echelon_rank_matches_rref() {
        let mut rng = Rng(7);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 12, 12);
            let mut ech = Echelon::new(12);
            for row in m.rows_vec() {
                ech.push_rat(row);
            }
            assert_eq!(ech.rank(), rref(&m).rank);
        }
    }

    #[test]
    fn quotient_dims() {
        assert_eq!(quotient_dim(5, &[]).unwrap(), 5);
        let id_rows: Vec<SparseVec> = (0..3).map(SparseVec::unit).collect();
        assert_eq!(quotient_dim(3, &id_rows).unwrap(), 0);
        assert!(quotient_dim(2, &[sv(&[(5, 1)])]).is_err());
    }

    #[test]
    fn span_membership() {
        let r1 = sv(&[(0, 1), (2, 3)]);
        let r2 = sv(&[(1, 2)]);
        let v = r1.add_scaled(&rat(3, 1), &r2);
        assert!(in_span(&v, &[r1.clone(), r2.clone()], 4).unwrap());
        assert!(in_span(&SparseVec::new(), &[r1.clone()], 4).unwrap());
        assert!(!in_span(&SparseVec::unit(0), &[], 4).unwrap());
        assert!(!in_span(&sv(&[(3, 1)]), &[r1, r2], 4).unwrap());
    }

    #[test]
    fn solve_identity_and_tiebreak() {
        let b = vec![rat(3, 1), rat(-7, 2)];
        match solve_affine(&SparseMatrix::identity(2), &b).unwrap() {
            SolveOutcome::Solution(x) => assert_eq!(x, b),
            _ => panic!("expected solution"),
        }
        // one equation, two unknowns: free variable zeroed
        let a = SparseMatrix::from_rows(2, vec![sv(&[(0, 1), (1, 1)])]).unwrap();
        match solve_affine(&a, &[rat(2, 1)]).unwrap() {
            SolveOutcome::Solution(x) => assert_eq!(x, vec![rat(2, 1), rat(0, 1)]),
            _ => panic!("expected solution"),
        }
    }

    #[test]
    fn solve_inconsistent_certificate() {
        // x = 1, x = 2 has certificate y with yA = 0, yb != 0
        let a = SparseMatrix::from_rows(1, vec![sv(&[(0, 1)]), sv(&[(0, 1)])]).unwrap();
        let b = vec![rat(1, 1), rat(2, 1)];
        match solve_affine(&a, &b).unwrap() {
            SolveOutcome::Inconsistent(y) => {
                let ya: Rat = y[0].clone() + y[1].clone();
                assert!(ya.is_zero());
                let yb: Rat = &y[0] * &b[0] + &y[1] * &b[1];
                assert!(!yb.is_zero());
            }
            _ => panic!("expected inconsistency"),
        }
    }

    #[test]
    fn solutions_satisfy_system() {
        let mut rng = Rng(99);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 7, 5);
            let b: Vec<Rat> = (0..7).map(|_| rat(rng.small(), 1)).collect();
            if let SolveOutcome::Solution(x) = solve_affine(&a, &b).unwrap() {
                for r in 0..a.rows {
                    let lhs: Rat = a
                        .row(r)
                        .entries
                        .iter()
                        .map(|(c, v)| v * &x[*c])
                        .fold(Rat::zero(), |s, t| s + t);
                    assert_eq!(lhs, b[r]);
                }
            }
        }
    }

    #[test]
    fn reduced_basis_residue() {
        let rels = vec![sv(&[(0, 1), (1, 1)]), sv(&[(1, 1), (2, 1)])];
        let rb = ReducedBasis::from_relations(3, &rels);
        assert_eq!(rb.rank(), 2);
        let res = rb.reduce(&sv(&[(0, 1)]));
        // residue supported on the single non-pivot column
        assert!(res.entries.iter().all(|(c, _)| !rb.is_pivot(*c)));
        // reducing a relation itself gives zero
        assert!(rb.reduce(&rels[0]).is_zero());
    }

    #[test]
    fn results_thread_count_independent() {
        let mut rng = Rng(5);
        let m = random_matrix(&mut rng, 80, 60);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| rref(&m))
        };
        let r1 = run(1);
        for t in [2, 8] {
            let rt = run(t);
            assert_eq!(r1.matrix, rt.matrix);
            assert_eq!(r1.pivots, rt.pivots);
        }
    }

    #[test]
    fn matrix_text_roundtrip() {
        let mut rng = Rng(11);
        let m = random_matrix(&mut rng, 5, 7);
        let text = m.to_text();
        let m2 = SparseMatrix::from_text(&text).unwrap();
        assert_eq!(m, m2);
        assert!(SparseMatrix::from_text("1 1").is_err());
    }
}
