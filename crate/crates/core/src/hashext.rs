//! Seeded universal linear hashing and the Toeplitz strong extractor.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::gf2::{BitVec, Gf2Matrix, MatrixKind};

/// An error bound `num/den` with `0 < num < den`, kept exact so every
/// `⌈log₂⌉` in the accounting is computed without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Eps {
    num: u64,
    den: u64,
}

impl Eps {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        ensure(num > 0 && num < den, || format!("error bound {num}/{den} must lie in (0,1)"))?;
        let g = num_integer::gcd(num, den);
        Ok(Eps { num: num / g, den: den / g })
    }

    /// `2^-e`.
    pub fn pow2(e: u32) -> Result<Self> {
        ensure((1..=62).contains(&e), || format!("2^-{e} is not a supported error bound"))?;
        Ok(Eps { num: 1, den: 1 << e })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌈log₂(1/ε)⌉`.
    pub fn log2_inv(&self) -> usize {
        self.log2_scaled(1)
    }

    /// `⌈log₂(n/ε)⌉`.
    pub fn log2_scaled(&self, n: u64) -> usize {
        let target = n as u128 * self.den as u128;
        let mut e = 0;
        while (self.num as u128) << e < target {
            e += 1;
        }
        e
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Accepts `p/q`, `2^-e` and finite decimals such as `0.125`.
impl FromStr for Eps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad error bound {s:?}"));
        if let Some(e) = s.strip_prefix("2^-") {
            return Eps::pow2(e.parse().map_err(|_| bad())?);
        }
        if let Some((p, q)) = s.split_once('/') {
            return Eps::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').ok_or_else(bad)?;
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) || !matches!(int, "" | "0") {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        Eps::new(frac.parse().map_err(|_| bad())?, den)
    }
}

/// A seeded hash matrix description, as sent on the channel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashSpec {
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: BitVec,
}

impl HashSpec {
    pub fn new(kind: MatrixKind, rows: usize, cols: usize, seed: BitVec) -> Result<Self> {
        let need = kind.seed_len(rows, cols);
        ensure(seed.len() == need, || {
            format!("{} {rows}x{cols} hash needs a {need}-bit seed, got {}", kind.as_str(), seed.len())
        })?;
        Ok(HashSpec { kind, rows, cols, seed })
    }

    pub fn random<R: Rng + ?Sized>(kind: MatrixKind, rows: usize, cols: usize, rng: &mut R) -> Self {
        let seed = BitVec::random(kind.seed_len(rows, cols), rng);
        HashSpec { kind, rows, cols, seed }
    }

    pub fn matrix(&self) -> Gf2Matrix {
        Gf2Matrix::from_seed(self.kind, &self.seed, self.rows, self.cols).expect("seed length checked on construction")
    }

    pub fn expand(&self) -> LinearHash {
        LinearHash::new(&self.matrix())
    }

    pub fn hash(&self, x: &BitVec) -> Result<BitVec> {
        self.matrix().matvec(x)
    }

    /// `kind:rows:cols:seedhex`.
    pub fn to_wire(&self) -> String {
        format!("{}:{}:{}:{}", self.kind.as_str(), self.rows, self.cols, self.seed.to_hex())
    }

    pub fn parse_wire(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |m: &str| Error::Parse(format!("hash spec {s:?}: {m}"));
        if parts.len() != 4 {
            return Err(bad("expected kind:rows:cols:seedhex"));
        }
        let kind = parse_kind(parts[0]).ok_or_else(|| bad("unknown kind"))?;
        let rows: usize = parts[1].parse().map_err(|_| bad("bad rows"))?;
        let cols: usize = parts[2].parse().map_err(|_| bad("bad cols"))?;
        let seed = BitVec::from_hex(parts[3], kind.seed_len(rows, cols))?;
        HashSpec::new(kind, rows, cols, seed)
    }
}

pub fn parse_kind(s: &str) -> Option<MatrixKind> {
    match s {
        "dense" => Some(MatrixKind::Dense),
        "toeplitz" => Some(MatrixKind::Toeplitz),
        _ => None,
    }
}

/// An expanded hash matrix ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct LinearHash {
    rows: usize,
    cols: usize,
    dense: Vec<BitVec>,
    columns: Option<Vec<u64>>,
}

impl LinearHash {
    pub fn new(m: &Gf2Matrix) -> Self {
        LinearHash { rows: m.rows(), cols: m.cols(), dense: m.dense_rows(), columns: m.column_words() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dense_rows(&self) -> &[BitVec] {
        &self.dense
    }

    /// Column words (bit `i` = row `i`), present when the hash has at most 64 rows.
    pub fn columns(&self) -> Option<&[u64]> {
        self.columns.as_deref()
    }

    pub fn matrix(&self) -> Gf2Matrix {
        Gf2Matrix::from_rows(self.cols, self.dense.clone()).expect("rows have the column width")
    }

    pub fn hash(&self, x: &BitVec) -> Result<BitVec> {
        ensure(x.len() == self.cols, || format!("hash: {}-bit input for {} columns", x.len(), self.cols))?;
        Ok(match self.columns.as_deref() {
            Some(cols) => BitVec::from_u64(xor_columns(cols, x), self.rows),
            None => BitVec::from_bits(self.dense.iter().map(|r| r.dot(x))),
        })
    }

    /// The hash packed in a word; requires at most 64 rows and a matching width.
    pub fn hash_word(&self, x: &BitVec) -> u64 {
        let cols = self.columns.as_deref().expect("hash_word needs at most 64 rows");
        debug_assert_eq!(x.len(), self.cols);
        xor_columns(cols, x)
    }
}

fn xor_columns(cols: &[u64], x: &BitVec) -> u64 {
    let mut acc = 0;
    for (w, &word) in x.words().iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            acc ^= cols[w * 64 + bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
    }
    acc
}

/// Parameters of the Toeplitz extractor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractorSpec {
    pub input_len: usize,
    pub seed_len: usize,
    pub output_len: usize,
    pub min_entropy: usize,
    pub eps: Eps,
}

impl ExtractorSpec {
    /// `m = k − 2⌈log₂(1/ε)⌉` output bits from an `input_len`-bit source of min-entropy `k`.
    pub fn new(input_len: usize, min_entropy: usize, eps: Eps) -> Result<Self> {
        ensure(min_entropy <= input_len, || {
            format!("min-entropy {min_entropy} exceeds the {input_len}-bit input")
        })?;
        let loss = 2 * eps.log2_inv();
        if min_entropy < loss + 1 {
            return Err(Error::Config(format!(
                "extractor with min-entropy {min_entropy} and eps {eps} would output {} bits",
                min_entropy as i64 - loss as i64
            )));
        }
        let output_len = min_entropy - loss;
        Ok(ExtractorSpec { input_len, seed_len: input_len + output_len - 1, output_len, min_entropy, eps })
    }

    pub fn random_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        BitVec::random(self.seed_len, rng)
    }
}

/// Toeplitz hash of `x` down to `spec.output_len` bits.
pub fn extract(x: &BitVec, spec: &ExtractorSpec, seed: &BitVec) -> Result<BitVec> {
    ensure(x.len() == spec.input_len, || format!("extract: {}-bit input, spec says {}", x.len(), spec.input_len))?;
    ensure(seed.len() == spec.seed_len, || format!("extract: {}-bit seed, spec says {}", seed.len(), spec.seed_len))?;
    Gf2Matrix::toeplitz_from_seed(seed, spec.output_len, spec.input_len)?.matvec(x)
}

/// Largest output width [`tv_distance`] will tabulate.
pub const MAX_TABULATED_BITS: usize = 24;

/// Total-variation distance between the empirical distribution of `samples` and uniform on `m` bits.
pub fn tv_distance(samples: &[BitVec], m: usize) -> Result<f64> {
    ensure(m <= MAX_TABULATED_BITS, || format!("cannot tabulate {m}-bit outputs"))?;
    ensure(!samples.is_empty(), || "tv_distance needs at least one sample".into())?;
    let mut counts = vec![0u32; 1 << m];
    for s in samples {
        ensure(s.len() == m, || format!("sample of {} bits, expected {m}", s.len()))?;
        counts[s.to_u64() as usize] += 1;
    }
    Ok(tv_from_counts(&counts, samples.len() as u64))
}

/// TV distance from uniform for a histogram over `counts.len()` outcomes.
pub fn tv_from_counts(counts: &[u32], total: u64) -> f64 {
    let u = 1.0 / counts.len() as f64;
    let n = total as f64;
    0.5 * counts.iter().map(|&c| (c as f64 / n - u).abs()).sum::<f64>()
}

/// Exact TV distance of `(seed, extract(U_source, seed))` from `(seed, uniform)`
/// for the listed seeds: the average over seeds of the per-seed output distance.
pub fn strong_extractor_tv(source: &[BitVec], spec: &ExtractorSpec, seeds: &[BitVec]) -> Result<f64> {
    ensure(spec.output_len <= MAX_TABULATED_BITS, || "extractor output too wide to tabulate".into())?;
    ensure(!seeds.is_empty() && !source.is_empty(), || "need at least one seed and one source string".into())?;
    let mut total = 0.0;
    let mut counts = vec![0u32; 1 << spec.output_len];
    for seed in seeds {
        counts.iter_mut().for_each(|c| *c = 0);
        let h = LinearHash::new(&Gf2Matrix::toeplitz_from_seed(seed, spec.output_len, spec.input_len)?);
        for x in source {
            counts[h.hash(x)?.to_u64() as usize] += 1;
        }
        total += tv_from_counts(&counts, source.len() as u64);
    }
    Ok(total / seeds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> BitVec {
        BitVec::from_bit_str(s).unwrap()
    }

    #[test]
    fn eps_logs() {
        let e = Eps::pow2(8).unwrap();
        assert_eq!(e.log2_inv(), 8);
        assert_eq!(e.log2_scaled(16), 12);
        assert_eq!(Eps::new(1, 3).unwrap().log2_inv(), 2);
        assert_eq!(Eps::new(1, 2).unwrap().log2_inv(), 1);
        assert_eq!(Eps::new(3, 4).unwrap().log2_inv(), 1);
        assert_eq!("2^-4".parse::<Eps>().unwrap(), Eps::new(1, 16).unwrap());
        assert_eq!("0.125".parse::<Eps>().unwrap(), Eps::new(1, 8).unwrap());
        assert_eq!("2/8".parse::<Eps>().unwrap().to_string(), "1/4");
        assert!(Eps::new(1, 1).is_err());
        assert!("1.5".parse::<Eps>().is_err());
    }

    #[test]
    fn hash_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let empty = HashSpec::random(MatrixKind::Toeplitz, 0, 10, &mut r);
        assert_eq!(empty.hash(&BitVec::ones(10)).unwrap().len(), 0);
        let spec = HashSpec::random(MatrixKind::Dense, 7, 10, &mut r);
        assert!(spec.hash(&BitVec::zeros(10)).unwrap().is_zero());
        assert!(spec.hash(&BitVec::zeros(9)).is_err());

        // diagonals 10110, 2x4: rows are 1101 and 0110 (entry (i,j) = seed[i-j+3])
        let t = HashSpec::new(MatrixKind::Toeplitz, 2, 4, bits("10110")).unwrap();
        assert_eq!(t.matrix().row(0), bits("1101"));
        assert_eq!(t.matrix().row(1), bits("0110"));
        assert_eq!(t.hash(&bits("1001")).unwrap(), bits("00"));
        assert_eq!(t.hash(&bits("1100")).unwrap(), bits("01"));
    }

    #[test]
    fn wire_roundtrip() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        for kind in [MatrixKind::Dense, MatrixKind::Toeplitz] {
            let spec = HashSpec::random(kind, 13, 29, &mut r);
            let wire = spec.to_wire();
            assert!(wire.starts_with(kind.as_str()));
            assert_eq!(HashSpec::parse_wire(&wire).unwrap(), spec);
        }
        assert!(HashSpec::parse_wire("toeplitz:2:4:ff").is_err());
        assert!(HashSpec::parse_wire("sparse:2:4:1f").is_err());
    }

    #[test]
    fn fast_and_slow_hash_agree() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        for rows in [0, 1, 40, 64, 65, 100] {
            let m = Gf2Matrix::random(MatrixKind::Toeplitz, rows, 130, &mut r);
            let h = LinearHash::new(&m);
            let x = BitVec::random(130, &mut r);
            assert_eq!(h.hash(&x).unwrap(), m.matvec(&x).unwrap());
        }
    }

    #[test]
    fn extractor_parameters() {
        let spec = ExtractorSpec::new(24, 16, Eps::pow2(4).unwrap()).unwrap();
        assert_eq!(spec.output_len, 8);
        assert_eq!(spec.seed_len, 31);
        assert!(matches!(ExtractorSpec::new(24, 8, Eps::pow2(4).unwrap()), Err(Error::Config(_))));
        let seed = spec.random_seed(&mut ChaCha8Rng::seed_from_u64(0));
        assert!(extract(&BitVec::zeros(24), &spec, &seed).unwrap().is_zero());
        assert!(extract(&BitVec::zeros(23), &spec, &seed).is_err());
    }

    #[test]
    fn tv_examples() {
        let same = vec![BitVec::zeros(1); 10];
        assert!((tv_distance(&same, 1).unwrap() - 0.5).abs() < 1e-12);
        let all: Vec<BitVec> = (0..256).map(|v| BitVec::from_u64(v, 8)).collect();
        assert!(tv_distance(&all, 8).unwrap().abs() < 1e-12);
        assert!(tv_distance(&all, 25).is_err());
    }

    #[test]
    fn collision_rate_matches_universality() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let (x, x2) = (BitVec::random(20, &mut r), BitVec::random(20, &mut r));
        let trials = 20_000;
        for kind in [MatrixKind::Dense, MatrixKind::Toeplitz] {
            let hits = (0..trials)
                .filter(|_| {
                    let h = HashSpec::random(kind, 4, 20, &mut r).expand();
                    h.hash_word(&x) == h.hash_word(&x2)
                })
                .count();
            let p = 1.0 / 16.0;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((hits as f64 / trials as f64 - p).abs() <= 3.0 * sigma, "{kind:?}: {hits}");
        }
    }

    proptest! {
        #[test]
        fn extraction_is_deterministic_and_linear(seed in any::<u64>()) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let spec = ExtractorSpec::new(40, 20, Eps::pow2(3).unwrap()).unwrap();
            let s = spec.random_seed(&mut r);
            let (a, b) = (BitVec::random(40, &mut r), BitVec::random(40, &mut r));
            let ea = extract(&a, &spec, &s).unwrap();
            prop_assert_eq!(&ea, &extract(&a, &spec, &s).unwrap());
            let eb = extract(&b, &spec, &s).unwrap();
            prop_assert_eq!(&ea ^ &eb, extract(&(&a ^ &b), &spec, &s).unwrap());
        }
    }
}
