//! One-way reconciliation: hash fingerprints decoded by candidate search,
//! syndrome coding, and joint decoding of several fingerprints.

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::gf2::{BitVec, Gf2Matrix, Gf2n, MatrixKind, XorBasis};
use crate::hashext::{parse_kind, Eps, HashSpec, LinearHash};
use crate::sources::{binomial, pack_pair, unpack_pair, CandidateSet, JointCandidateSet};

/// Scans above this many candidates are refused.
pub const MAX_SCAN: u128 = 1 << 32;

/// Syndrome decoding refuses balls above this many error patterns.
pub const MAX_BALL: u128 = 1 << 24;

/// A hash of `x` long enough to single it out among `2^k` candidates with
/// failure probability `eps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub spec: HashSpec,
    pub value: BitVec,
    pub declared_k: usize,
    pub eps: Eps,
}

impl Fingerprint {
    /// Rows required for `k` bits of candidate entropy at error `eps`.
    pub fn rows_for(k: usize, eps: Eps) -> usize {
        k + eps.log2_inv()
    }

    pub fn check(&self) -> Result<()> {
        ensure(self.value.len() == self.spec.rows, || "fingerprint value does not match its hash rows".into())?;
        ensure(self.spec.rows == Self::rows_for(self.declared_k, self.eps), || {
            format!(
                "fingerprint has {} rows, expected k + ⌈log₂(1/ε)⌉ = {}",
                self.spec.rows,
                Self::rows_for(self.declared_k, self.eps)
            )
        })
    }

    pub fn matches(&self, x: &BitVec) -> bool {
        x.len() == self.spec.cols && self.spec.hash(x).map(|h| h == self.value).unwrap_or(false)
    }

    pub fn payload_bits(&self) -> usize {
        self.value.len()
    }

    /// `k:eps_num/eps_den:kind:rows:cols:seedhex:valuehex`.
    pub fn to_wire(&self) -> String {
        format!("{}:{}:{}:{}", self.declared_k, self.eps, self.spec.to_wire(), self.value.to_hex())
    }

    pub fn parse_wire(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |m: &str| Error::Parse(format!("fingerprint {s:?}: {m}"));
        if parts.len() != 7 {
            return Err(bad("expected k:eps:kind:rows:cols:seedhex:valuehex"));
        }
        let declared_k = parts[0].parse().map_err(|_| bad("bad k"))?;
        let eps: Eps = parts[1].parse()?;
        parse_kind(parts[2]).ok_or_else(|| bad("unknown kind"))?;
        let spec = HashSpec::parse_wire(&parts[2..6].join(":"))?;
        let value = BitVec::from_hex(parts[6], spec.rows)?;
        let fp = Fingerprint { spec, value, declared_k, eps };
        fp.check()?;
        Ok(fp)
    }
}

/// Fingerprint of `x` under a fresh Toeplitz hash with `k + ⌈log₂(1/ε)⌉` rows.
pub fn encode<R: Rng + ?Sized>(x: &BitVec, k: usize, eps: Eps, rng: &mut R) -> Result<Fingerprint> {
    ensure(k <= x.len(), || format!("fingerprint size k={k} exceeds the {}-bit input", x.len()))?;
    let spec = HashSpec::random(MatrixKind::Toeplitz, Fingerprint::rows_for(k, eps), x.len(), rng);
    let value = spec.hash(x)?;
    Ok(Fingerprint { spec, value, declared_k: k, eps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    Unique,
    Ambiguous,
    NotFound,
}

impl DecodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeStatus::Unique => "unique",
            DecodeStatus::Ambiguous => "ambiguous",
            DecodeStatus::NotFound => "not_found",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult<T = BitVec> {
    pub status: DecodeStatus,
    pub value: Option<T>,
    pub candidates_checked: u128,
}

impl<T> DecodeResult<T> {
    fn from_matches(mut matches: Vec<T>, candidates_checked: u128) -> Self {
        let status = match matches.len() {
            0 => DecodeStatus::NotFound,
            1 => DecodeStatus::Unique,
            _ => DecodeStatus::Ambiguous,
        };
        let value = if status == DecodeStatus::Unique { matches.pop() } else { None };
        DecodeResult { status, value, candidates_checked }
    }

    pub fn is_unique(&self) -> bool {
        self.status == DecodeStatus::Unique
    }
}

/// Matching candidates found by a scan, capped at two (enough for the verdict).
struct Matches {
    found: Vec<BitVec>,
    checked: u128,
}

fn scan(hash: &LinearHash, target: &BitVec, candidates: &CandidateSet) -> Result<Matches> {
    let size = candidates.len();
    ensure(size <= MAX_SCAN, || format!("{size} candidates exceed the scan ceiling"))
        .map_err(|e| Error::SizeLimit(e.to_string()))?;
    if let Some(w) = candidates.width() {
        ensure(w == hash.cols(), || format!("candidates of {w} bits for a {}-column hash", hash.cols()))?;
    }
    ensure(target.len() == hash.rows(), || "fingerprint value does not match its hash rows".into())?;
    let mut found = Vec::new();
    match (candidates, hash.columns()) {
        (CandidateSet::Affine { offset, basis }, Some(_)) => {
            let t = target.to_u64();
            let diffs: Vec<u64> = basis.iter().map(|b| hash.hash_word(b)).collect();
            let mut acc = hash.hash_word(offset);
            for i in 0..size as u64 {
                if i > 0 {
                    acc ^= diffs[i.trailing_zeros() as usize];
                }
                if acc == t {
                    let gray = i ^ (i >> 1);
                    let mut x = offset.clone();
                    for (k, b) in basis.iter().enumerate() {
                        if gray >> k & 1 == 1 {
                            x ^= b;
                        }
                    }
                    found.push(x);
                    if found.len() == 2 {
                        return Ok(Matches { found, checked: i as u128 + 1 });
                    }
                }
            }
        }
        (CandidateSet::HammingBall { center, radius }, Some(cols)) => {
            let t = target.to_u64() ^ hash.hash_word(center);
            let mut checked = 0u128;
            for w in 0..=*radius {
                let done = ball_layer(cols, w, t, &mut checked, &mut |pos| {
                    let mut x = center.clone();
                    for &p in pos {
                        x.flip(p);
                    }
                    found.push(x);
                    found.len() < 2
                });
                if done {
                    return Ok(Matches { found, checked });
                }
            }
            return Ok(Matches { found, checked });
        }
        _ => {
            for (i, x) in candidates.iter().enumerate() {
                if hash.hash(&x)? == *target {
                    found.push(x);
                    if found.len() == 2 {
                        return Ok(Matches { found, checked: i as u128 + 1 });
                    }
                }
            }
        }
    }
    Ok(Matches { found, checked: size })
}

/// Visits weight-`w` patterns in lexicographic order whose column XOR equals
/// `target`; returns true when `hit` asked to stop.
fn ball_layer(
    cols: &[u64],
    w: usize,
    target: u64,
    checked: &mut u128,
    hit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        cols: &[u64],
        start: usize,
        left: usize,
        acc: u64,
        target: u64,
        pos: &mut Vec<usize>,
        checked: &mut u128,
        hit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if left == 0 {
            *checked += 1;
            return acc == target && !hit(pos);
        }
        for p in start..=cols.len() - left {
            pos.push(p);
            let stop = rec(cols, p + 1, left - 1, acc ^ cols[p], target, pos, checked, hit);
            pos.pop();
            if stop {
                return true;
            }
        }
        false
    }
    if w > cols.len() {
        return false;
    }
    rec(cols, 0, w, 0, target, &mut Vec::with_capacity(w), checked, hit)
}

/// Scans `candidates` in canonical order for strings whose hash equals the fingerprint.
pub fn decode(fp: &Fingerprint, candidates: &CandidateSet) -> Result<DecodeResult> {
    decode_with(&fp.spec.expand(), &fp.value, candidates)
}

/// [`decode`] against an already expanded hash and target value.
pub fn decode_with(hash: &LinearHash, target: &BitVec, candidates: &CandidateSet) -> Result<DecodeResult> {
    let m = scan(hash, target, candidates)?;
    Ok(DecodeResult::from_matches(m.found, m.checked))
}

/// Parity-check matrix of the binary Hamming code of length `2^r − 1`;
/// column `j` (zero-based) is the binary expansion of `j + 1`.
pub fn hamming_parity_check(r: usize) -> Result<Gf2Matrix> {
    ensure((2..=16).contains(&r), || format!("Hamming code with {r} parity bits not supported"))?;
    let n = (1usize << r) - 1;
    let rows = (0..r).map(|i| BitVec::from_bits((1..=n).map(|j| j >> i & 1 == 1))).collect();
    Gf2Matrix::from_rows(n, rows)
}

/// A uniformly random dense `rows × n` parity-check matrix.
pub fn random_parity_check<R: Rng + ?Sized>(rows: usize, n: usize, rng: &mut R) -> Gf2Matrix {
    Gf2Matrix::random(MatrixKind::Dense, rows, n, rng)
}

pub fn syndrome_encode(x: &BitVec, code: &Gf2Matrix) -> Result<BitVec> {
    code.matvec(x)
}

/// Finds `x = y ⊕ e` with `wt(e) ≤ t` and the given syndrome, scanning errors by
/// weight and then lexicographically.
pub fn syndrome_decode(y: &BitVec, syndrome: &BitVec, code: &Gf2Matrix, t: usize) -> Result<DecodeResult> {
    ensure(syndrome.len() == code.rows(), || "syndrome length does not match the code".into())?;
    let ball: u128 = (0..=t).map(|w| binomial(y.len(), w)).sum();
    if ball > MAX_BALL {
        return Err(Error::SizeLimit(format!("{ball} error patterns exceed the 2^24 ceiling")));
    }
    let hash = LinearHash::new(code);
    decode_with(&hash, syndrome, &CandidateSet::HammingBall { center: y.clone(), radius: t })
}

/// Binary entropy `h(δ)` in bits.
pub fn binary_entropy(delta: f64) -> f64 {
    if delta <= 0.0 || delta >= 1.0 {
        return 0.0;
    }
    -delta * delta.log2() - (1.0 - delta) * (1.0 - delta).log2()
}

/// Reconstructs the whole input tuple from one party's input and every
/// party's fingerprint (own included, checked too).
pub fn multi_decode(
    own: &BitVec,
    own_index: usize,
    fps: &[Fingerprint],
    joint: &JointCandidateSet,
) -> Result<DecodeResult<Vec<BitVec>>> {
    let arity = joint.arity();
    ensure(fps.len() == arity, || format!("{} fingerprints for {arity} parties", fps.len()))?;
    ensure(own_index < arity, || format!("party {own_index} out of range"))?;
    if !fps[own_index].matches(own) {
        return Ok(DecodeResult { status: DecodeStatus::NotFound, value: None, candidates_checked: 0 });
    }
    let (matches, checked) = match joint {
        JointCandidateSet::Product { own_index: oi, own: o, others } => {
            ensure(*oi == own_index && o == own, || "joint candidates were built for another party".into())?;
            let mut per_party = Vec::new();
            let mut checked = 0;
            for (slot, set) in (0..arity).filter(|&j| j != own_index).zip(others) {
                let m = scan(&fps[slot].spec.expand(), &fps[slot].value, set)?;
                checked += m.checked;
                per_party.push(m.found);
            }
            let mut tuples: Vec<Vec<BitVec>> = vec![vec![own.clone()]];
            for found in per_party {
                let mut next = Vec::new();
                for t in &tuples {
                    for f in &found {
                        let mut t = t.clone();
                        t.push(f.clone());
                        next.push(t);
                    }
                }
                tuples = next;
            }
            // own was placed first; move it to its slot
            for t in tuples.iter_mut() {
                let o = t.remove(0);
                t.insert(own_index, o);
            }
            tuples.truncate(2);
            (tuples, checked)
        }
        JointCandidateSet::CollinearTriple { field, own_index: oi, own: o } => {
            ensure(*oi == own_index && o == own, || "joint candidates were built for another party".into())?;
            triple_matches(field, own_index, own, fps)?
        }
        JointCandidateSet::Explicit { tuples, .. } => {
            let hashes: Vec<LinearHash> = fps.iter().map(|f| f.spec.expand()).collect();
            let mut found = Vec::new();
            for t in tuples {
                if t[own_index] == *own
                    && t.iter().zip(&hashes).zip(fps).all(|((x, h), f)| h.hash(x).map(|v| v == f.value).unwrap_or(false))
                {
                    found.push(t.clone());
                    if found.len() == 2 {
                        break;
                    }
                }
            }
            (found, tuples.len() as u128)
        }
    };
    for t in &matches {
        if !t.iter().zip(fps).all(|(x, f)| f.matches(x)) {
            return Err(Error::Internal("joint decoder returned a tuple that fails a fingerprint".into()));
        }
    }
    Ok(DecodeResult::from_matches(matches, checked))
}

/// Joint decoding over collinear triples by linear algebra: either walk the
/// solution space of one party's fingerprint (each point fixes the line), or
/// walk all slopes; in both cases the remaining point is solved for.
fn triple_matches(field: &Gf2n, own_index: usize, own: &BitVec, fps: &[Fingerprint]) -> Result<(Vec<Vec<BitVec>>, u128)> {
    let n = field.degree() as usize;
    ensure(own.len() == 2 * n, || "own point has the wrong width".into())?;
    let (co, dox) = unpack_pair(own, n);
    let others: Vec<usize> = (0..3).filter(|&i| i != own_index).collect();
    let hashes: Vec<LinearHash> = others.iter().map(|&j| fps[j].spec.expand()).collect();
    for (h, &j) in hashes.iter().zip(&others) {
        ensure(h.cols() == 2 * n, || format!("fingerprint of party {j} has the wrong width"))?;
    }
    let mut found: Vec<Vec<BitVec>> = Vec::new();
    let mut checked = 0u128;
    // `anchor_c` pins the first other party's point when it is already known
    let emit = |a: u64, b: u64, anchor_c: Option<u64>, found: &mut Vec<Vec<BitVec>>| -> Result<bool> {
        let first = match anchor_c {
            Some(c) => vec![c],
            None => line_solutions(field, &hashes[0], &fps[others[0]].value, a, b)?,
        };
        if first.is_empty() {
            return Ok(false);
        }
        let second = line_solutions(field, &hashes[1], &fps[others[1]].value, a, b)?;
        for &c1 in &first {
            for &c2 in &second {
                if c1 == co || c2 == co || c1 == c2 {
                    continue;
                }
                let mut t = vec![own.clone(); 3];
                t[others[0]] = pack_pair(c1, field.mul(a, c1) ^ b, n);
                t[others[1]] = pack_pair(c2, field.mul(a, c2) ^ b, n);
                found.push(t);
                if found.len() == 2 {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    };

    let anchor = hashes[0].matrix().solve(&fps[others[0]].value)?;
    let Some(anchor) = anchor else { return Ok((found, 0)) };
    if anchor.kernel.len() < n {
        // every point of the anchor's solution space determines the line
        let dim = anchor.kernel.len();
        for coeff in 0..1u64 << dim {
            let mut x = anchor.particular.clone();
            for (k, v) in anchor.kernel.iter().enumerate() {
                if coeff >> k & 1 == 1 {
                    x ^= v;
                }
            }
            checked += 1;
            let (c, d) = unpack_pair(&x, n);
            if c == co {
                continue;
            }
            let a = field.mul(d ^ dox, field.inv(c ^ co).expect("nonzero difference"));
            let b = field.mul(a, co) ^ dox;
            if emit(a, b, Some(c), &mut found)? {
                break;
            }
        }
    } else {
        for a in 0..field.order() as u64 {
            checked += 1;
            let b = field.mul(a, co) ^ dox;
            if emit(a, b, None, &mut found)? {
                break;
            }
        }
    }
    found.sort();
    Ok((found, checked))
}

/// All `c` with `H·(c, a·c + b) = target`.
fn line_solutions(field: &Gf2n, h: &LinearHash, target: &BitVec, a: u64, b: u64) -> Result<Vec<u64>> {
    let n = field.degree() as usize;
    let offset = pack_pair(0, b, n);
    let dirs: Vec<BitVec> = (0..n).map(|k| pack_pair(1 << k, field.mul(a, 1 << k), n)).collect();
    let (particular, kernel): (u64, Vec<u64>) = if h.columns().is_some() {
        let rhs = target.to_u64() ^ h.hash_word(&offset);
        let mut basis = XorBasis::default();
        for (k, d) in dirs.iter().enumerate() {
            basis.insert(k as u32, h.hash_word(d));
        }
        match basis.express(rhs) {
            Some(c) => (c, basis.kernel().to_vec()),
            None => return Ok(Vec::new()),
        }
    } else {
        let rhs = target.checked_xor(&h.hash(&offset)?)?;
        let cols: Vec<BitVec> = dirs.iter().map(|d| h.hash(d)).collect::<Result<_>>()?;
        let rows = (0..h.rows()).map(|i| BitVec::from_bits(cols.iter().map(|c| c.get(i)))).collect();
        match Gf2Matrix::from_rows(n, rows)?.solve(&rhs)? {
            Some(sol) => (sol.particular.to_u64(), sol.kernel.iter().map(BitVec::to_u64).collect()),
            None => return Ok(Vec::new()),
        }
    };
    if kernel.len() > 20 {
        return Err(Error::SizeLimit(format!("line fingerprint leaves 2^{} solutions", kernel.len())));
    }
    let mut out = Vec::with_capacity(1 << kernel.len());
    for coeff in 0..1u64 << kernel.len() {
        let mut c = particular;
        for (k, v) in kernel.iter().enumerate() {
            if coeff >> k & 1 == 1 {
                c ^= v;
            }
        }
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{enumerate_candidates, joint_candidates, sample, CorrelationModel};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn fingerprint_lengths() {
        let x = BitVec::random(16, &mut rng(0));
        assert_eq!(encode(&x, 0, Eps::new(1, 2).unwrap(), &mut rng(1)).unwrap().value.len(), 1);
        let fp = encode(&x, 8, Eps::pow2(7).unwrap(), &mut rng(1)).unwrap();
        assert_eq!(fp.value.len(), 15);
        fp.check().unwrap();
        assert_eq!(fp, encode(&x, 8, Eps::pow2(7).unwrap(), &mut rng(1)).unwrap());
        assert!(encode(&x, 17, Eps::pow2(7).unwrap(), &mut rng(1)).is_err());
    }

    #[test]
    fn fingerprint_wire_roundtrip() {
        let x = BitVec::random(40, &mut rng(5));
        let fp = encode(&x, 12, Eps::new(3, 100).unwrap(), &mut rng(6)).unwrap();
        let wire = fp.to_wire();
        assert!(wire.starts_with("12:3/100:toeplitz:18:40:"));
        assert_eq!(Fingerprint::parse_wire(&wire).unwrap(), fp);
        assert!(Fingerprint::parse_wire("12:3/100:toeplitz:17:40:00").is_err());
    }

    #[test]
    fn decode_trivial_cases() {
        let mut r = rng(2);
        let x = BitVec::random(16, &mut r);
        let fp = encode(&x, 4, Eps::pow2(4).unwrap(), &mut r).unwrap();
        let res = decode(&fp, &CandidateSet::Explicit(vec![x.clone()])).unwrap();
        assert_eq!(res.status, DecodeStatus::Unique);
        assert_eq!(res.value, Some(x.clone()));
        let mut other = x.clone();
        other.flip(0);
        let fp2 = encode(&other, 16, Eps::pow2(4).unwrap(), &mut r).unwrap();
        assert_eq!(decode(&fp2, &CandidateSet::Explicit(vec![x])).unwrap().status, DecodeStatus::NotFound);
    }

    #[test]
    fn fast_scans_agree_with_plain_scans() {
        let mut r = rng(7);
        for (model, k) in [
            (CorrelationModel::LinePoint { n: 6 }, 2),
            (CorrelationModel::LinePoint { n: 6 }, 6),
            (CorrelationModel::HammingPair { n: 12, t: 2 }, 3),
            (CorrelationModel::HammingPair { n: 12, t: 2 }, 7),
        ] {
            for _ in 0..30 {
                let inst = sample(&model, &mut r).unwrap();
                let cands = enumerate_candidates(&model, 1, &inst.inputs[1]).unwrap();
                let fp = encode(&inst.inputs[0], k, Eps::pow2(2).unwrap(), &mut r).unwrap();
                let fast = decode(&fp, &cands).unwrap();
                let plain: Vec<BitVec> = cands.iter().filter(|c| fp.matches(c)).collect();
                let slow = CandidateSet::Explicit(cands.iter().collect());
                assert_eq!(fast.status, decode(&fp, &slow).unwrap().status);
                match plain.len() {
                    0 => assert_eq!(fast.status, DecodeStatus::NotFound),
                    1 => assert_eq!(fast.value.as_ref(), Some(&plain[0])),
                    _ => assert_eq!(fast.status, DecodeStatus::Ambiguous),
                }
                assert!(plain.contains(&inst.inputs[0]));
            }
        }
    }

    #[test]
    fn line_point_decode_success_rate() {
        let model = CorrelationModel::LinePoint { n: 8 };
        let eps = Eps::pow2(7).unwrap();
        let mut r = rng(11);
        let trials = 10_000;
        let ok = (0..trials)
            .filter(|_| {
                let inst = sample(&model, &mut r).unwrap();
                let fp = encode(&inst.inputs[0], 8, eps, &mut r).unwrap();
                let res = decode(&fp, &enumerate_candidates(&model, 1, &inst.inputs[1]).unwrap()).unwrap();
                res.value.as_ref() == Some(&inst.inputs[0])
            })
            .count();
        let p = 1.0 - eps.value();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(ok as f64 / trials as f64 >= p - 3.0 * sigma, "{ok}");
    }

    #[test]
    fn syndrome_examples() {
        let h7 = hamming_parity_check(3).unwrap();
        assert!(syndrome_encode(&BitVec::zeros(7), &h7).unwrap().is_zero());
        let mut e3 = BitVec::zeros(7);
        e3.set(2, true);
        let col3: BitVec = BitVec::from_bits((0..3).map(|i| h7.get(i, 2)));
        assert_eq!(syndrome_encode(&e3, &h7).unwrap(), col3);
        assert_eq!(hamming_parity_check(5).unwrap().rows(), 5);
        assert!((binary_entropy(1.0 / 31.0) * 31.0 - 6.38).abs() < 0.01);
    }

    #[test]
    fn hamming_seven_four_is_perfect() {
        let h = hamming_parity_check(3).unwrap();
        for xv in 0..128u64 {
            let x = BitVec::from_u64(xv, 7);
            let s = syndrome_encode(&x, &h).unwrap();
            for e in 0..8 {
                let mut y = x.clone();
                if e > 0 {
                    y.flip(e - 1);
                }
                let res = syndrome_decode(&y, &s, &h, 1).unwrap();
                assert_eq!(res.value, Some(x.clone()));
            }
        }
    }

    #[test]
    fn syndrome_decode_radius_zero() {
        let h = hamming_parity_check(3).unwrap();
        let y = BitVec::from_u64(0b1010101, 7);
        let s = syndrome_encode(&y, &h).unwrap();
        assert_eq!(syndrome_decode(&y, &s, &h, 0).unwrap().value, Some(y.clone()));
        let mut s2 = s.clone();
        s2.flip(0);
        assert_eq!(syndrome_decode(&y, &s2, &h, 0).unwrap().status, DecodeStatus::NotFound);
    }

    fn triple_fps(inputs: &[BitVec], rows: &[usize], r: &mut ChaCha8Rng) -> Vec<Fingerprint> {
        let eps = Eps::new(1, 2).unwrap();
        inputs
            .iter()
            .zip(rows)
            .map(|(x, &k)| encode(x, k.saturating_sub(1).min(x.len()), eps, r).unwrap())
            .collect()
    }

    #[test]
    fn triple_decoder_matches_brute_force() {
        let mut r = rng(13);
        for n in [3usize, 4] {
            let model = CorrelationModel::CollinearTriple { n };
            for trial in 0..60 {
                let inst = sample(&model, &mut r).unwrap();
                let rows: Vec<usize> = (0..3).map(|_| rand::Rng::gen_range(&mut r, 1..=2 * n)).collect();
                let fps = triple_fps(&inst.inputs, &rows, &mut r);
                let own = trial % 3;
                let jc = joint_candidates(&model, own, &inst.inputs[own]).unwrap();
                let fast = multi_decode(&inst.inputs[own], own, &fps, &jc).unwrap();
                let mut brute = Vec::new();
                jc.for_each(&mut |t| {
                    if t.iter().zip(&fps).all(|(x, f)| f.matches(x)) {
                        brute.push(t.to_vec());
                    }
                    true
                });
                assert!(brute.contains(&inst.inputs));
                match brute.len() {
                    1 => assert_eq!(fast.value.as_ref(), Some(&brute[0])),
                    _ => assert_eq!(fast.status, DecodeStatus::Ambiguous, "n={n} rows={rows:?}"),
                }
            }
        }
    }

    #[test]
    fn multi_decode_trivial_and_tampered() {
        let mut r = rng(17);
        let model = CorrelationModel::IdenticalPair { n: 12 };
        let inst = sample(&model, &mut r).unwrap();
        let eps = Eps::pow2(3).unwrap();
        let fps: Vec<Fingerprint> = inst.inputs.iter().map(|x| encode(x, 0, eps, &mut r).unwrap()).collect();
        let jc = joint_candidates(&model, 0, &inst.inputs[0]).unwrap();
        let res = multi_decode(&inst.inputs[0], 0, &fps, &jc).unwrap();
        assert_eq!(res.value, Some(inst.inputs.clone()));

        let model = CorrelationModel::CollinearTriple { n: 8 };
        let inst = sample(&model, &mut r).unwrap();
        let mut fps: Vec<Fingerprint> =
            inst.inputs.iter().map(|x| encode(x, 12, Eps::pow2(6).unwrap(), &mut r).unwrap()).collect();
        let jc = joint_candidates(&model, 2, &inst.inputs[2]).unwrap();
        assert_eq!(multi_decode(&inst.inputs[2], 2, &fps, &jc).unwrap().value, Some(inst.inputs.clone()));
        fps[0].value.flip(3);
        assert_eq!(multi_decode(&inst.inputs[2], 2, &fps, &jc).unwrap().status, DecodeStatus::NotFound);
    }

    proptest! {
        #[test]
        fn decode_never_returns_a_wrong_unique_value(seed in any::<u64>(), k in 0usize..8) {
            let mut r = rng(seed);
            let model = CorrelationModel::LinePoint { n: 5 };
            let inst = sample(&model, &mut r).unwrap();
            let fp = encode(&inst.inputs[0], k, Eps::new(1, 2).unwrap(), &mut r).unwrap();
            let res = decode(&fp, &enumerate_candidates(&model, 1, &inst.inputs[1]).unwrap()).unwrap();
            if let Some(v) = res.value {
                prop_assert!(fp.matches(&v));
                prop_assert_eq!(v, inst.inputs[0].clone());
            }
        }
    }
}
