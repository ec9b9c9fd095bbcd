use rand::Rng;

use super::BitVec;
use crate::error::{ensure, Result};

/// Storage layout of a [`Gf2Matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Dense,
    Toeplitz,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Dense => "dense",
            MatrixKind::Toeplitz => "toeplitz",
        }
    }

    /// Seed bits needed to describe a `rows × cols` matrix of this kind.
    pub fn seed_len(self, rows: usize, cols: usize) -> usize {
        match self {
            MatrixKind::Dense => rows * cols,
            MatrixKind::Toeplitz if rows == 0 || cols == 0 => 0,
            MatrixKind::Toeplitz => rows + cols - 1,
        }
    }
}

/// A matrix over GF(2).
///
/// Toeplitz matrices keep only their `rows + cols - 1` diagonal bits: entry
/// `(i, j)` is diagonal bit `i - j + cols - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gf2Matrix {
    Dense { rows: usize, cols: usize, data: Vec<BitVec> },
    Toeplitz { rows: usize, cols: usize, diagonals: BitVec },
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix::Dense { rows, cols, data: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(k: usize) -> Self {
        let data = (0..k)
            .map(|i| {
                let mut r = BitVec::zeros(k);
                r.set(i, true);
                r
            })
            .collect();
        Gf2Matrix::Dense { rows: k, cols: k, data }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        ensure(rows.iter().all(|r| r.len() == cols), || {
            format!("every row must have {cols} bits")
        })?;
        Ok(Gf2Matrix::Dense { rows: rows.len(), cols, data: rows })
    }

    /// Row-major seed: bit `i * cols + j` is entry `(i, j)`.
    pub fn dense_from_seed(seed: &BitVec, rows: usize, cols: usize) -> Result<Self> {
        ensure(seed.len() == rows * cols, || {
            format!("dense {rows}x{cols} matrix needs {} seed bits, got {}", rows * cols, seed.len())
        })?;
        let data = (0..rows).map(|i| seed.slice(i * cols, cols)).collect();
        Ok(Gf2Matrix::Dense { rows, cols, data })
    }

    pub fn toeplitz_from_seed(seed: &BitVec, rows: usize, cols: usize) -> Result<Self> {
        let need = MatrixKind::Toeplitz.seed_len(rows, cols);
        ensure(seed.len() == need, || {
            format!("toeplitz {rows}x{cols} matrix needs {need} seed bits, got {}", seed.len())
        })?;
        Ok(Gf2Matrix::Toeplitz { rows, cols, diagonals: seed.clone() })
    }

    pub fn from_seed(kind: MatrixKind, seed: &BitVec, rows: usize, cols: usize) -> Result<Self> {
        match kind {
            MatrixKind::Dense => Self::dense_from_seed(seed, rows, cols),
            MatrixKind::Toeplitz => Self::toeplitz_from_seed(seed, rows, cols),
        }
    }

    pub fn random<R: Rng + ?Sized>(kind: MatrixKind, rows: usize, cols: usize, rng: &mut R) -> Self {
        let seed = BitVec::random(kind.seed_len(rows, cols), rng);
        Self::from_seed(kind, &seed, rows, cols).expect("seed length matches by construction")
    }

    pub fn kind(&self) -> MatrixKind {
        match self {
            Gf2Matrix::Dense { .. } => MatrixKind::Dense,
            Gf2Matrix::Toeplitz { .. } => MatrixKind::Toeplitz,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Gf2Matrix::Dense { rows, .. } | Gf2Matrix::Toeplitz { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Gf2Matrix::Dense { cols, .. } | Gf2Matrix::Toeplitz { cols, .. } => *cols,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows() && j < self.cols(), "entry ({i},{j}) out of range");
        match self {
            Gf2Matrix::Dense { data, .. } => data[i].get(j),
            Gf2Matrix::Toeplitz { cols, diagonals, .. } => diagonals.get(i + cols - 1 - j),
        }
    }

    pub fn row(&self, i: usize) -> BitVec {
        match self {
            Gf2Matrix::Dense { data, .. } => data[i].clone(),
            Gf2Matrix::Toeplitz { cols, diagonals, .. } => diagonals.slice(i, *cols).reversed(),
        }
    }

    pub fn to_dense(&self) -> Gf2Matrix {
        match self {
            Gf2Matrix::Dense { .. } => self.clone(),
            Gf2Matrix::Toeplitz { rows, cols, diagonals } => {
                // Row i is diagonals[i..i+cols] reversed, i.e. a window of the reversed seed.
                let rev = diagonals.reversed();
                let data = (0..*rows).map(|i| rev.slice(rows - 1 - i, *cols)).collect();
                Gf2Matrix::Dense { rows: *rows, cols: *cols, data }
            }
        }
    }

    pub fn dense_rows(&self) -> Vec<BitVec> {
        match self.to_dense() {
            Gf2Matrix::Dense { data, .. } => data,
            Gf2Matrix::Toeplitz { .. } => unreachable!(),
        }
    }

    /// Rows `start..start + count`; a Toeplitz band stays Toeplitz.
    pub fn row_band(&self, start: usize, count: usize) -> Gf2Matrix {
        assert!(start + count <= self.rows(), "row band out of range");
        match self {
            Gf2Matrix::Dense { cols, data, .. } => Gf2Matrix::Dense {
                rows: count,
                cols: *cols,
                data: data[start..start + count].to_vec(),
            },
            Gf2Matrix::Toeplitz { cols, diagonals, .. } => {
                let len = MatrixKind::Toeplitz.seed_len(count, *cols);
                let diagonals = if len == 0 { BitVec::zeros(0) } else { diagonals.slice(start, len) };
                Gf2Matrix::Toeplitz { rows: count, cols: *cols, diagonals }
            }
        }
    }

    pub fn matvec(&self, x: &BitVec) -> Result<BitVec> {
        ensure(x.len() == self.cols(), || {
            format!("matvec: {}x{} matrix with {}-bit vector", self.rows(), self.cols(), x.len())
        })?;
        Ok(BitVec::from_bits(self.dense_rows().iter().map(|r| r.dot(x))))
    }

    /// Column `j` packed into a word (bit `i` = entry `(i, j)`); `None` above 64 rows.
    pub fn column_words(&self) -> Option<Vec<u64>> {
        if self.rows() > 64 {
            return None;
        }
        let mut cols = vec![0u64; self.cols()];
        for (i, row) in self.dense_rows().iter().enumerate() {
            for j in row.ones_positions() {
                cols[j] |= 1 << i;
            }
        }
        Some(cols)
    }

    pub fn rank(&self) -> usize {
        let mut basis = RowBasis::default();
        for r in self.dense_rows() {
            basis.insert(r);
        }
        basis.len()
    }

    /// All solutions of `self · x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &BitVec) -> Result<Option<AffineSolution>> {
        ensure(b.len() == self.rows(), || {
            format!("solve: {}-row system with {}-bit right-hand side", self.rows(), b.len())
        })?;
        let cols = self.cols();
        // Gauss-Jordan on the augmented rows [A | b].
        let mut rows: Vec<BitVec> = self
            .dense_rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::from_bits([b.get(i)])))
            .collect();
        let mut pivot_cols = Vec::new();
        let mut next = 0;
        for c in 0..cols {
            let Some(p) = (next..rows.len()).find(|&i| rows[i].get(c)) else { continue };
            rows.swap(next, p);
            let pivot = rows[next].clone();
            for (i, r) in rows.iter_mut().enumerate() {
                if i != next && r.get(c) {
                    *r ^= &pivot;
                }
            }
            pivot_cols.push(c);
            next += 1;
        }
        if rows[next..].iter().any(|r| r.get(cols)) {
            return Ok(None);
        }
        let mut particular = BitVec::zeros(cols);
        for (k, &c) in pivot_cols.iter().enumerate() {
            particular.set(c, rows[k].get(cols));
        }
        let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
        let kernel = free
            .iter()
            .map(|&f| {
                let mut v = BitVec::zeros(cols);
                v.set(f, true);
                for (k, &c) in pivot_cols.iter().enumerate() {
                    if rows[k].get(f) {
                        v.set(c, true);
                    }
                }
                v
            })
            .collect();
        Ok(Some(AffineSolution { particular, kernel }))
    }
}

/// `particular + span(kernel)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: BitVec,
    pub kernel: Vec<BitVec>,
}

#[derive(Default)]
struct RowBasis {
    rows: Vec<(usize, BitVec)>,
}

impl RowBasis {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, mut v: BitVec) -> bool {
        for (lead, r) in &self.rows {
            if v.get(*lead) {
                v ^= r;
            }
        }
        match v.ones_positions().first() {
            Some(&lead) => {
                for (_, r) in self.rows.iter_mut() {
                    if r.get(lead) {
                        *r ^= &v;
                    }
                }
                self.rows.push((lead, v));
                true
            }
            None => false,
        }
    }
}

/// Incremental XOR basis over `u64` column words, tracking which inserted
/// columns combine into each basis vector. Used by hot decoding loops.
#[derive(Clone, Debug)]
pub struct XorBasis {
    // slot b holds a vector whose highest set bit is b
    slots: [(u64, u64); 64],
    filled: u64,
    kernel: Vec<u64>,
}

impl Default for XorBasis {
    fn default() -> Self {
        XorBasis { slots: [(0, 0); 64], filled: 0, kernel: Vec::new() }
    }
}

impl XorBasis {
    pub fn clear(&mut self) {
        self.filled = 0;
        self.kernel.clear();
    }

    fn reduce(&self, mut v: u64, mut combo: u64) -> (u64, u64) {
        while v != 0 {
            let b = 63 - v.leading_zeros();
            if self.filled >> b & 1 == 0 {
                break;
            }
            let (w, c) = self.slots[b as usize];
            v ^= w;
            combo ^= c;
        }
        (v, combo)
    }

    /// Inserts column `index` with value `v`; dependent columns feed the kernel.
    pub fn insert(&mut self, index: u32, v: u64) {
        let (v, combo) = self.reduce(v, 1u64 << index);
        if v == 0 {
            self.kernel.push(combo);
        } else {
            let b = 63 - v.leading_zeros();
            self.slots[b as usize] = (v, combo);
            self.filled |= 1 << b;
        }
    }

    /// Combination of inserted columns summing to `target`, if any.
    pub fn express(&self, target: u64) -> Option<u64> {
        let (rest, combo) = self.reduce(target, 0);
        (rest == 0).then_some(combo)
    }

    pub fn kernel(&self) -> &[u64] {
        &self.kernel
    }

    pub fn rank(&self) -> u32 {
        self.filled.count_ones()
    }
}
