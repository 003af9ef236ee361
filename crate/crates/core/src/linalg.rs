//! Exact integer and modular matrix algebra.
//!
//! Entries are `i128` throughout. Coloring matrices have entries in
//! `{-2, ..., 2}`; Smith reduction with smallest-pivot selection keeps the
//! intermediates small for them, and the wide type leaves headroom.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{0} is not prime; use the Smith normal form path")]
    NotPrime(u64),
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("minor is not square: {rows}x{cols}")]
    NonSquareMinor { rows: usize, cols: usize },
    #[error("index out of range")]
    OutOfRange,
    #[error("{count} solutions exceed the enumeration cap of {cap}")]
    OverCap { count: u128, cap: u128 },
    #[error("solution count overflows 128 bits")]
    CountOverflow,
    #[error("determinant overflows 128-bit arithmetic")]
    DeterminantOverflow,
}

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged matrix");
            data.extend(r.as_ref().iter().map(|&x| x as i128));
        }
        IntMatrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i128) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: i128) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[i128] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    /// Matrix-vector product reduced into `[0, n)`.
    pub fn apply_mod(&self, v: &[u64], n: u64) -> Vec<u64> {
        let n = n as i128;
        (0..self.rows)
            .map(|i| {
                let s: i128 = self.row(i).iter().zip(v).map(|(&a, &x)| a * x as i128).sum();
                s.rem_euclid(n) as u64
            })
            .collect()
    }

    /// Deletes one row and one column.
    pub fn minor(&self, drop_row: usize, drop_col: usize) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows.saturating_sub(1), self.cols.saturating_sub(1));
        let mut oi = 0;
        for i in (0..self.rows).filter(|&i| i != drop_row) {
            let mut oj = 0;
            for j in (0..self.cols).filter(|&j| j != drop_col) {
                out.set(oi, oj, self.get(i, j));
                oj += 1;
            }
            oi += 1;
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: i128) {
        for j in 0..self.cols {
            let v = self.get(src, j);
            self.add_to(dst, j, k * v);
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: i128) {
        for i in 0..self.rows {
            let v = self.get(i, src);
            self.add_to(i, dst, k * v);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = self.get(r, j);
            self.set(r, j, -v);
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// `left * m * right = diag(invariant_factors, 0, ...)`, both transforms
/// unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub invariant_factors: Vec<i128>,
    pub rank: usize,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.left.rows(), self.right.cols());
        for (i, &f) in self.invariant_factors.iter().enumerate() {
            d.set(i, i, f);
        }
        d
    }

    /// Number of solutions of `m x = 0` over `Z/n`.
    pub fn solution_count(&self, n: u64) -> Result<u128, LinalgError> {
        if n == 0 {
            return Err(LinalgError::ZeroModulus);
        }
        let free = (self.right.cols() - self.rank) as u32;
        let mut count = (n as u128).checked_pow(free).ok_or(LinalgError::CountOverflow)?;
        for &d in &self.invariant_factors {
            count = count.checked_mul(gcd(d.unsigned_abs(), n as u128)).ok_or(LinalgError::CountOverflow)?;
        }
        Ok(count)
    }
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = ((a % n) as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(n as i128) as u64)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smith normal form by smallest-nonzero pivoting, rows then columns.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);
    let mut factors = Vec::new();

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = smallest_nonzero(&a, t) else { break };
        a.swap_rows(t, pi);
        left.swap_rows(t, pi);
        a.swap_cols(t, pj);
        right.swap_cols(t, pj);

        loop {
            let pivot = a.get(t, t);
            let mut clean = true;
            for i in t + 1..rows {
                let q = a.get(i, t).div_euclid(pivot);
                if q != 0 {
                    a.add_row(i, t, -q);
                    left.add_row(i, t, -q);
                }
                clean &= a.get(i, t) == 0;
            }
            for j in t + 1..cols {
                let q = a.get(t, j).div_euclid(pivot);
                if q != 0 {
                    a.add_col(j, t, -q);
                    right.add_col(j, t, -q);
                }
                clean &= a.get(t, j) == 0;
            }
            if !clean {
                // a remainder smaller than the pivot is left in row or column t
                let best_row = (t + 1..rows).filter(|&i| a.get(i, t) != 0).min_by_key(|&i| a.get(i, t).abs());
                let best_col = (t + 1..cols).filter(|&j| a.get(t, j) != 0).min_by_key(|&j| a.get(t, j).abs());
                let row_val = best_row.map(|i| a.get(i, t).abs());
                let col_val = best_col.map(|j| a.get(t, j).abs());
                match (row_val, col_val) {
                    (Some(rv), cv) if cv.is_none_or(|cv| rv <= cv) => {
                        let i = best_row.unwrap();
                        a.swap_rows(t, i);
                        left.swap_rows(t, i);
                    }
                    _ => {
                        let j = best_col.unwrap();
                        a.swap_cols(t, j);
                        right.swap_cols(t, j);
                    }
                }
                continue;
            }
            // Divisibility: pull in any row whose entries the pivot does not divide.
            let bad_row = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a.get(i, j) % pivot != 0));
            match bad_row {
                Some(i) => {
                    a.add_row(t, i, 1);
                    left.add_row(t, i, 1);
                }
                None => break,
            }
        }
        if a.get(t, t) < 0 {
            a.negate_row(t);
            left.negate_row(t);
        }
        factors.push(a.get(t, t));
    }
    SmithForm { rank: factors.len(), invariant_factors: factors, left, right }
}

fn smallest_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let v = a.get(i, j).abs();
            if v != 0 && best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Rank and a kernel basis of `m` over the field `Z/p`.
pub fn rref_mod_p(m: &IntMatrix, p: u64) -> Result<(usize, Vec<Vec<u64>>), LinalgError> {
    if !is_prime(p) {
        return Err(LinalgError::NotPrime(p));
    }
    let pi = p as i128;
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<u64>> = (0..rows).map(|i| m.row(i).iter().map(|&x| x.rem_euclid(pi) as u64).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(found) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, found);
        let inv = mod_inverse(a[r][c], p).expect("nonzero is invertible mod a prime");
        for x in a[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + (p - f) * a[r][j]) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let rank = pivots.len();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - a[row][free]) % p;
        }
        basis.push(v);
    }
    Ok((rank, basis))
}

/// `|det|` of `m` with one row and one column removed.
pub fn minor_abs_det(m: &IntMatrix, drop_row: usize, drop_col: usize) -> Result<u128, LinalgError> {
    if drop_row >= m.rows() || drop_col >= m.cols() {
        return Err(LinalgError::OutOfRange);
    }
    let minor = m.minor(drop_row, drop_col);
    abs_det(&minor)
}

/// Primes just below 2^31: products of residues fit in a `u64`.
const DET_PRIMES: [u64; 4] = [2_147_483_647, 2_147_483_629, 2_147_483_587, 2_147_483_579];

/// `det(m) mod p` by Gaussian elimination, skipping rows that already have a
/// zero in the pivot column (coloring matrices are very sparse).
fn det_mod_prime(m: &IntMatrix, p: u64) -> u64 {
    let n = m.rows();
    let mut a: Vec<Vec<u64>> =
        (0..n).map(|i| m.row(i).iter().map(|&v| v.rem_euclid(p as i128) as u64).collect()).collect();
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i][k] != 0) else { return 0 };
        if piv != k {
            a.swap(k, piv);
            det = (p - det) % p;
        }
        det = det * a[k][k] % p;
        let inv = mod_inverse(a[k][k], p).expect("nonzero residue mod a prime");
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            if row[k] == 0 {
                continue;
            }
            let f = row[k] * inv % p;
            for j in k..n {
                if pivot_row[j] != 0 {
                    row[j] = (row[j] + p - f * pivot_row[j] % p) % p;
                }
            }
        }
    }
    det
}

/// `|det(m)|`, exactly.
///
/// Determinants are computed modulo enough word-sized primes to exceed twice
/// the Hadamard bound and recombined by the Chinese remainder theorem; when
/// the bound is too large for 128 bits, overflow-checked fraction-free
/// elimination takes over.
pub fn abs_det(m: &IntMatrix) -> Result<u128, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::NonSquareMinor { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(1);
    }
    let mut log2_bound = 0f64;
    for i in 0..n {
        let norm2: f64 = m.row(i).iter().map(|&v| (v as f64) * (v as f64)).sum();
        if norm2 == 0.0 {
            return Ok(0);
        }
        log2_bound += 0.5 * norm2.log2();
    }
    // one bit for the sign, one of slack for rounding
    let needed = log2_bound + 2.0;
    let mut bits = 0f64;
    let mut used = 0;
    while bits < needed && used < DET_PRIMES.len() {
        bits += (DET_PRIMES[used] as f64).log2();
        used += 1;
    }
    if bits < needed {
        return bareiss_abs_det(m);
    }
    // Garner's mixed-radix recombination
    let mut value: u128 = 0;
    let mut modulus: u128 = 1;
    for &p in &DET_PRIMES[..used] {
        let r = det_mod_prime(m, p);
        let cur = (value % p as u128) as u64;
        let diff = (r + p - cur) % p;
        let inv = mod_inverse((modulus % p as u128) as u64, p).expect("distinct primes");
        let t = diff * inv % p;
        value += modulus * t as u128;
        modulus *= p as u128;
    }
    Ok(if value > modulus / 2 { modulus - value } else { value })
}

/// `|det(m)|` by fraction-free (Bareiss) elimination with checked arithmetic.
pub fn bareiss_abs_det(m: &IntMatrix) -> Result<u128, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::NonSquareMinor { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a.get(i, k) != 0) else { return Ok(0) };
        a.swap_rows(k, p);
        for i in k + 1..n {
            for j in k + 1..n {
                let lhs = a.get(i, j).checked_mul(a.get(k, k));
                let rhs = a.get(i, k).checked_mul(a.get(k, j));
                let v = match (lhs, rhs) {
                    (Some(l), Some(r)) => l.checked_sub(r).ok_or(LinalgError::DeterminantOverflow)? / prev,
                    _ => return Err(LinalgError::DeterminantOverflow),
                };
                a.set(i, j, v);
            }
            a.set(i, k, 0);
        }
        prev = a.get(k, k);
    }
    Ok(if n == 0 { 1 } else { a.get(n - 1, n - 1).unsigned_abs() })
}

/// All solutions of `m x = 0` over `Z/n`, each exactly once.
///
/// With `left * m * right = D`, solutions are `x = right * y` where
/// `d_i y_i = 0 (mod n)` for `i < rank` and the remaining `y_i` are free.
#[derive(Debug, Clone)]
pub struct Solutions {
    modulus: u64,
    right: IntMatrix,
    /// (step, count) per coordinate of `y`.
    radices: Vec<(u64, u64)>,
    counter: Vec<u64>,
    done: bool,
}

impl Solutions {
    fn new(snf: &SmithForm, n: u64) -> Self {
        let cols = snf.right.cols();
        let radices = (0..cols)
            .map(|i| match snf.invariant_factors.get(i) {
                Some(&d) => {
                    let g = gcd(d.unsigned_abs(), n as u128) as u64;
                    (n / g, g)
                }
                None => (1, n),
            })
            .collect();
        Solutions { modulus: n, right: snf.right.clone(), radices, counter: vec![0; cols], done: false }
    }
}

impl Iterator for Solutions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let y: Vec<u64> = self.counter.iter().zip(&self.radices).map(|(&c, &(step, _))| c * step).collect();
        let x = self.right.apply_mod(&y, self.modulus);
        // advance the mixed-radix counter, last coordinate fastest
        self.done = true;
        for i in (0..self.counter.len()).rev() {
            self.counter[i] += 1;
            if self.counter[i] < self.radices[i].1 {
                self.done = false;
                break;
            }
            self.counter[i] = 0;
        }
        Some(x)
    }
}

/// Counts the solutions of `m x = 0 (mod n)` and, when the count is within
/// `cap`, returns an enumerator over them.
pub fn solve_homogeneous_mod_n(m: &IntMatrix, n: u64, cap: u128) -> Result<(u128, Solutions), LinalgError> {
    let snf = smith_normal_form(m);
    let count = snf.solution_count(n)?;
    if count > cap {
        return Err(LinalgError::OverCap { count, cap });
    }
    Ok((count, Solutions::new(&snf, n)))
}

/// Enumerator over a precomputed Smith form.
pub fn solutions_from_smith(snf: &SmithForm, n: u64) -> Solutions {
    Solutions::new(snf, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> IntMatrix {
        IntMatrix::from_rows(&[[-1, 2, -1], [-1, -1, 2], [2, -1, -1]])
    }

    fn brute_count(m: &IntMatrix, n: u64) -> u128 {
        let cols = m.cols();
        let mut x = vec![0u64; cols];
        let mut count = 0;
        loop {
            if m.apply_mod(&x, n).iter().all(|&v| v == 0) {
                count += 1;
            }
            let mut i = 0;
            while i < cols {
                x[i] += 1;
                if x[i] < n {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
            if i == cols {
                return count;
            }
        }
    }

    fn check_snf(m: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(s.left.mul(m).mul(&s.right), s.diagonal(), "{m:?}");
        assert_eq!(abs_det(&s.left).unwrap(), 1);
        assert_eq!(abs_det(&s.right).unwrap(), 1);
        for w in s.invariant_factors.windows(2) {
            assert_eq!(w[1] % w[0], 0, "divisibility chain {:?}", s.invariant_factors);
        }
        assert!(s.invariant_factors.iter().all(|&d| d >= 1));
        s
    }

    #[test]
    fn smith_examples() {
        assert_eq!(check_snf(&IntMatrix::identity(2)).invariant_factors, vec![1, 1]);
        assert_eq!(check_snf(&IntMatrix::from_rows(&[[2, 4], [6, 8]])).invariant_factors, vec![2, 4]);
        let s = check_snf(&IntMatrix::from_rows(&[[2, 0], [0, 0]]));
        assert_eq!((s.invariant_factors.as_slice(), s.rank), (&[2][..], 1));
        assert_eq!(check_snf(&trefoil()).invariant_factors, vec![1, 3]);
        assert_eq!(check_snf(&IntMatrix::from_rows(&[[4, 6], [6, 9]])).invariant_factors, vec![1]);
        assert_eq!(check_snf(&IntMatrix::from_rows(&[[2, 0], [0, 3]])).invariant_factors, vec![1, 6]);
    }

    #[test]
    fn rref_examples() {
        let (rank, basis) = rref_mod_p(&trefoil(), 3).unwrap();
        assert_eq!((rank, basis.len()), (1, 2));
        for v in &basis {
            assert!(trefoil().apply_mod(v, 3).iter().all(|&x| x == 0));
        }
        let (rank, basis) = rref_mod_p(&IntMatrix::identity(3), 5).unwrap();
        assert_eq!((rank, basis.len()), (3, 0));
        let (rank, basis) = rref_mod_p(&IntMatrix::zeros(2, 4), 7).unwrap();
        assert_eq!((rank, basis.len()), (0, 4));
        assert_eq!(rref_mod_p(&trefoil(), 9), Err(LinalgError::NotPrime(9)));
    }

    #[test]
    fn counts_match_brute_force_on_trefoil() {
        // brute force: 9 of 27 assignments mod 3, 2 of 8 mod 2
        assert_eq!(brute_count(&trefoil(), 3), 9);
        assert_eq!(brute_count(&trefoil(), 2), 2);
        for n in 1..10 {
            let (count, sols) = solve_homogeneous_mod_n(&trefoil(), n, 1_000_000).unwrap();
            assert_eq!(count, brute_count(&trefoil(), n), "n={n}");
            let all: Vec<_> = sols.collect();
            assert_eq!(all.len() as u128, count);
        }
        assert_eq!(solve_homogeneous_mod_n(&trefoil(), 1, 10).unwrap().0, 1);
    }

    #[test]
    fn over_cap_reports_count() {
        let m = IntMatrix::zeros(1, 4);
        assert_eq!(solve_homogeneous_mod_n(&m, 10, 100).unwrap_err(), LinalgError::OverCap { count: 10_000, cap: 100 });
    }

    #[test]
    fn determinants() {
        // 2x2 minor of the trefoil matrix: (-1)(-1) - (2)(-1) = 3
        assert_eq!(minor_abs_det(&trefoil(), 0, 0).unwrap(), 3);
        let kinks = IntMatrix::from_rows(&[[-1, 1], [1, -1]]);
        assert_eq!(minor_abs_det(&kinks, 0, 0).unwrap(), 1);
        let hopf = IntMatrix::from_rows(&[[2, -2], [-2, 2]]);
        assert_eq!(minor_abs_det(&hopf, 1, 1).unwrap(), 2);
        assert_eq!(minor_abs_det(&IntMatrix::zeros(2, 3), 0, 0), Err(LinalgError::NonSquareMinor { rows: 1, cols: 2 }));
        assert_eq!(abs_det(&IntMatrix::from_rows(&[[0, 1], [1, 0]])).unwrap(), 1);
        assert_eq!(abs_det(&IntMatrix::from_rows(&[[2, 1, 1], [1, 3, 2], [1, 0, 0]])).unwrap(), 1);
        let big = IntMatrix::from_rows(&[[1_000_000_007, 3], [5, -1_000_000_009]]);
        assert_eq!(abs_det(&big).unwrap(), bareiss_abs_det(&big).unwrap());
        assert_eq!(abs_det(&big).unwrap(), 1_000_000_007u128 * 1_000_000_009 + 15);
        for p in DET_PRIMES {
            assert!(is_prime(p));
        }
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_inverse(2, 7), Some(4));
        assert_eq!(mod_inverse(3, 9), None);
        assert_eq!(mod_inverse(8, 9), Some(8));
        assert!(is_prime(13) && !is_prime(9) && !is_prime(1));
    }
}
