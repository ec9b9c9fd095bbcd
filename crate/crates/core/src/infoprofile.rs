//! Complexity profiles, entropy profiles of enumerable distributions, and the
//! information quantities derived from them.
//!
//! A profile assigns a bit count to every nonempty subset of the parties.
//! Analytic profiles hold exact rationals; entropy profiles computed from a
//! [`JointDistribution`] hold `f64` and compare with [`ENTROPY_TOLERANCE`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use num_traits::{ToPrimitive, Zero};

use crate::error::{ensure, Error, Result};
use crate::gf2::BitVec;

pub type Rational = num_rational::Ratio<i128>;

/// Absolute slack (scaled by magnitude) for comparisons between floating entropies.
pub const ENTROPY_TOLERANCE: f64 = 1e-12;

/// Largest party count a profile may carry.
pub const MAX_PARTIES: usize = 16;

/// A subset of parties `0..ell`, bit `i` standing for party `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartySet(pub u32);

impl PartySet {
    pub const EMPTY: PartySet = PartySet(0);

    pub fn full(ell: usize) -> Self {
        PartySet(((1u64 << ell) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        PartySet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(parties: I) -> Self {
        PartySet(parties.into_iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn union(self, o: PartySet) -> Self {
        PartySet(self.0 | o.0)
    }

    pub fn intersection(self, o: PartySet) -> Self {
        PartySet(self.0 & o.0)
    }

    pub fn difference(self, o: PartySet) -> Self {
        PartySet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: PartySet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: PartySet) -> bool {
        self.0 & o.0 == 0
    }

    pub fn parties(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Every nonempty subset of `0..ell`, in increasing mask order.
    pub fn nonempty_subsets(ell: usize) -> impl Iterator<Item = PartySet> {
        (1..(1u32 << ell)).map(PartySet)
    }
}

/// One-based, comma-separated: `{0, 2}` prints as `1,3`.
impl fmt::Display for PartySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parties().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Numeric type a profile can hold.
pub trait BitAmount:
    Copy + fmt::Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self>
{
    fn zero_bits() -> Self;
    fn from_int(v: i64) -> Self;
    fn div_int(self, d: i64) -> Self;
    fn mul_int(self, m: i64) -> Self;
    /// `self ≤ other`, exactly for rationals and within tolerance for floats.
    fn le_tol(self, other: Self) -> bool;
    fn to_f64(self) -> f64;

    fn eq_tol(self, other: Self) -> bool {
        self.le_tol(other) && other.le_tol(self)
    }
}

impl BitAmount for Rational {
    fn zero_bits() -> Self {
        Zero::zero()
    }
    fn from_int(v: i64) -> Self {
        Rational::from_integer(v as i128)
    }
    fn div_int(self, d: i64) -> Self {
        self / Rational::from_integer(d as i128)
    }
    fn mul_int(self, m: i64) -> Self {
        self * Rational::from_integer(m as i128)
    }
    fn le_tol(self, other: Self) -> bool {
        self <= other
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl BitAmount for f64 {
    fn zero_bits() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn div_int(self, d: i64) -> Self {
        self / d as f64
    }
    fn mul_int(self, m: i64) -> Self {
        self * m as f64
    }
    fn le_tol(self, other: Self) -> bool {
        self <= other + ENTROPY_TOLERANCE * (1.0 + self.abs().max(other.abs()))
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Bit counts `C(x_V)` for every nonempty `V ⊆ [ell]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityProfile<V = Rational> {
    ell: usize,
    // indexed by subset mask; slot 0 is the empty set and always zero
    values: Vec<V>,
}

impl<V: BitAmount> ComplexityProfile<V> {
    pub fn from_fn(ell: usize, mut f: impl FnMut(PartySet) -> V) -> Result<Self> {
        ensure((1..=MAX_PARTIES).contains(&ell), || {
            format!("party count {ell} outside 1..={MAX_PARTIES}")
        })?;
        let mut values = vec![V::zero_bits(); 1 << ell];
        for s in PartySet::nonempty_subsets(ell) {
            values[s.0 as usize] = f(s);
        }
        Ok(ComplexityProfile { ell, values })
    }

    /// Builds a profile from explicit `(subset, bits)` pairs; every nonempty
    /// subset must appear exactly once.
    pub fn from_entries(ell: usize, entries: impl IntoIterator<Item = (PartySet, V)>) -> Result<Self> {
        ensure((1..=MAX_PARTIES).contains(&ell), || {
            format!("party count {ell} outside 1..={MAX_PARTIES}")
        })?;
        let mut slots: Vec<Option<V>> = vec![None; 1 << ell];
        for (s, v) in entries {
            ensure(!s.is_empty() && s.is_subset(PartySet::full(ell)), || {
                format!("subset {{{s}}} is not a nonempty subset of {ell} parties")
            })?;
            ensure(slots[s.0 as usize].is_none(), || format!("subset {{{s}}} given twice"))?;
            slots[s.0 as usize] = Some(v);
        }
        if let Some(missing) = PartySet::nonempty_subsets(ell).find(|s| slots[s.0 as usize].is_none()) {
            return Err(Error::Contract(format!("profile is missing subset {{{missing}}}")));
        }
        let values = slots.into_iter().map(|v| v.unwrap_or_else(V::zero_bits)).collect();
        Ok(ComplexityProfile { ell, values })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn full(&self) -> PartySet {
        PartySet::full(self.ell)
    }

    fn check_subset(&self, s: PartySet) -> Result<()> {
        ensure(s.is_subset(self.full()), || {
            format!("subset {{{s}}} exceeds {} parties", self.ell)
        })
    }

    /// `C(x_V)`, with `C(x_∅) = 0`.
    pub fn get(&self, s: PartySet) -> V {
        self.values[s.0 as usize]
    }

    pub fn joint(&self) -> V {
        self.get(self.full())
    }

    /// `C(x_v | x_w) = C(x_{v∪w}) − C(x_w)`.
    pub fn cond(&self, v: PartySet, w: PartySet) -> Result<V> {
        ensure(!v.is_empty(), || "cond: conditioned-on subset v must be nonempty".into())?;
        self.check_subset(v)?;
        self.check_subset(w)?;
        Ok(self.get(v.union(w)) - self.get(w))
    }

    /// `I(x_v : x_w | x_given)`.
    pub fn mutual(&self, v: PartySet, w: PartySet, given: PartySet) -> Result<V> {
        ensure(!v.is_empty() && !w.is_empty(), || "mutual: both sides must be nonempty".into())?;
        ensure(v.is_disjoint(given) && w.is_disjoint(given), || {
            format!("mutual: {{{v}}} / {{{w}}} overlap the condition {{{given}}}")
        })?;
        Ok(self.cond(v, given)? + self.cond(w, given)? - self.cond(v.union(w), given)?)
    }

    /// `(Σ C(x_{J_i}) − C(x_[ell])) / (s − 1)` for a partition `J_1..J_s`, `s ≥ 2`.
    pub fn multi_j(&self, partition: &[PartySet]) -> Result<V> {
        check_partition(self.ell, partition)?;
        let sum = partition.iter().fold(V::zero_bits(), |acc, &p| acc + self.get(p));
        Ok((sum - self.joint()).div_int(partition.len() as i64 - 1))
    }

    /// Monotone and submodular, with `C(∅) = 0`.
    pub fn is_polymatroid(&self) -> bool {
        let n = 1u32 << self.ell;
        for a in 0..n {
            let va = self.values[a as usize];
            if !V::zero_bits().le_tol(va) {
                return false;
            }
            for b in 0..n {
                let vb = self.values[b as usize];
                if a & !b == 0 && !va.le_tol(vb) {
                    return false;
                }
                if b > a {
                    let u = self.values[(a | b) as usize];
                    let i = self.values[(a & b) as usize];
                    if !(u + i).le_tol(va + vb) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn map<W: BitAmount>(&self, f: impl Fn(V) -> W) -> ComplexityProfile<W> {
        ComplexityProfile { ell: self.ell, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn entries(&self) -> impl Iterator<Item = (PartySet, V)> + '_ {
        PartySet::nonempty_subsets(self.ell).map(move |s| (s, self.get(s)))
    }
}

impl ComplexityProfile<Rational> {
    pub fn from_integers(ell: usize, f: impl Fn(PartySet) -> i64) -> Result<Self> {
        Self::from_fn(ell, |s| Rational::from_integer(f(s) as i128))
    }

    pub fn scale(&self, lambda: Rational) -> Self {
        self.map(|v| v * lambda)
    }

    /// Parses the line format `1,2=48` (one-based parties, rationals as `p/q`).
    /// Blank lines and `#` comments are skipped; every nonempty subset must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut ell = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("profile line {}: {msg}", lineno + 1));
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| err(format!("expected `subset=bits`, got {line:?}")))?;
            let mut set = PartySet::EMPTY;
            for tok in lhs.split(',') {
                let i: usize = tok.trim().parse().map_err(|e| err(format!("bad party {tok:?}: {e}")))?;
                if i == 0 || i > MAX_PARTIES {
                    return Err(err(format!("party {i} out of range 1..={MAX_PARTIES}")));
                }
                ell = ell.max(i);
                set = set.union(PartySet::singleton(i - 1));
            }
            let value = parse_rational(rhs.trim()).map_err(|e| err(e.to_string()))?;
            entries.push((set, value));
        }
        if ell == 0 {
            return Err(Error::Parse("profile has no entries".into()));
        }
        Self::from_entries(ell, entries)
    }

    pub fn to_file_string(&self) -> String {
        self.entries().map(|(s, v)| format!("{s}={}\n", format_rational(v))).collect()
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |e: std::num::ParseIntError| Error::Parse(format!("bad rational {s:?}: {e}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i128 = q.trim().parse().map_err(bad)?;
            if q == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p.trim().parse().map_err(bad)?, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(bad)?)),
    }
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn check_partition(ell: usize, partition: &[PartySet]) -> Result<()> {
    ensure(partition.len() >= 2, || "partition needs at least two parts".into())?;
    let mut seen = PartySet::EMPTY;
    for &p in partition {
        ensure(!p.is_empty(), || "partition has an empty part".into())?;
        ensure(seen.is_disjoint(p), || format!("part {{{p}}} overlaps an earlier part"))?;
        seen = seen.union(p);
    }
    ensure(seen == PartySet::full(ell), || format!("partition does not cover all {ell} parties"))
}

/// All set partitions of `0..ell` into at least `min_parts` blocks, via restricted growth strings.
pub fn set_partitions(ell: usize, min_parts: usize) -> Vec<Vec<PartySet>> {
    fn rec(i: usize, ell: usize, blocks: &mut Vec<PartySet>, min_parts: usize, out: &mut Vec<Vec<PartySet>>) {
        if i == ell {
            if blocks.len() >= min_parts {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] = blocks[b].union(PartySet::singleton(i));
            rec(i + 1, ell, blocks, min_parts, out);
            blocks[b] = blocks[b].difference(PartySet::singleton(i));
        }
        blocks.push(PartySet::singleton(i));
        rec(i + 1, ell, blocks, min_parts, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, ell, &mut Vec::new(), min_parts, &mut out);
    out
}

/// A finitely supported distribution over `ell`-tuples of bit strings with
/// exact rational probabilities.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    ell: usize,
    support: Vec<(Vec<BitVec>, Rational)>,
}

impl JointDistribution {
    /// Validates distinct entries, positive probabilities and an exact total of 1.
    pub fn new(ell: usize, support: Vec<(Vec<BitVec>, Rational)>) -> Result<Self> {
        ensure((1..=MAX_PARTIES).contains(&ell), || format!("party count {ell} out of range"))?;
        let mut seen = HashSet::with_capacity(support.len());
        let mut total = Rational::zero();
        for (tuple, p) in &support {
            ensure(tuple.len() == ell, || format!("tuple of arity {} in a {ell}-party distribution", tuple.len()))?;
            ensure(*p > Rational::zero(), || "support probabilities must be positive".into())?;
            ensure(seen.insert(tuple), || "duplicate support entry".into())?;
            total += *p;
        }
        ensure(total == Rational::from_integer(1), || format!("probabilities sum to {total}, not 1"))?;
        Ok(JointDistribution { ell, support })
    }

    /// Distribution of the given outcomes weighted by integer counts; repeated tuples merge.
    pub fn from_weighted<I>(ell: usize, outcomes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<BitVec>, u64)>,
    {
        let mut merged: HashMap<Vec<BitVec>, u128> = HashMap::new();
        let mut order = Vec::new();
        let mut total: u128 = 0;
        for (tuple, w) in outcomes {
            if w == 0 {
                continue;
            }
            total += w as u128;
            let slot = merged.entry(tuple.clone()).or_insert_with(|| {
                order.push(tuple);
                0
            });
            *slot += w as u128;
        }
        ensure(total > 0, || "distribution has no mass".into())?;
        let support = order
            .into_iter()
            .map(|t| {
                let w = merged[&t];
                (t, Rational::new(w as i128, total as i128))
            })
            .collect();
        Self::new(ell, support)
    }

    /// Uniform over the listed outcomes (with multiplicity).
    pub fn uniform<I: IntoIterator<Item = Vec<BitVec>>>(ell: usize, outcomes: I) -> Result<Self> {
        Self::from_weighted(ell, outcomes.into_iter().map(|t| (t, 1)))
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn support(&self) -> &[(Vec<BitVec>, Rational)] {
        &self.support
    }

    /// Distribution of `f(tuple)`, an `out_ell`-tuple.
    pub fn pushforward(&self, out_ell: usize, f: impl Fn(&[BitVec]) -> Vec<BitVec>) -> Result<Self> {
        let mut merged: HashMap<Vec<BitVec>, Rational> = HashMap::new();
        let mut order = Vec::new();
        for (t, p) in &self.support {
            let image = f(t);
            let slot = merged.entry(image.clone()).or_insert_with(|| {
                order.push(image);
                Rational::zero()
            });
            *slot += *p;
        }
        let support = order.into_iter().map(|t| {
            let p = merged[&t];
            (t, p)
        });
        Self::new(out_ell, support.collect())
    }

    /// Appends `f(tuple)` as a new component.
    pub fn extend_with(&self, f: impl Fn(&[BitVec]) -> BitVec) -> Result<Self> {
        self.pushforward(self.ell + 1, |t| {
            let mut v = t.to_vec();
            v.push(f(t));
            v
        })
    }

    pub fn marginal(&self, s: PartySet) -> HashMap<Vec<BitVec>, Rational> {
        let mut out: HashMap<Vec<BitVec>, Rational> = HashMap::new();
        for (t, p) in &self.support {
            let key: Vec<BitVec> = s.parties().map(|i| t[i].clone()).collect();
            *out.entry(key).or_insert_with(Rational::zero) += *p;
        }
        out
    }

    /// Shannon entropy in bits of the marginal on `s` (0 for the empty set).
    pub fn entropy(&self, s: PartySet) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        entropy_of(self.marginal(s).values().copied())
    }
}

/// `−Σ p log₂ p` with compensated summation.
pub fn entropy_of(probs: impl IntoIterator<Item = Rational>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for p in probs {
        let pf = *p.numer() as f64 / *p.denom() as f64;
        if pf > 0.0 {
            let term = -pf * pf.log2() - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
    }
    sum
}

/// Entropy profile `V ↦ H(X_V)` of an enumerable distribution.
pub fn exact_profile(dist: &JointDistribution) -> ComplexityProfile<f64> {
    ComplexityProfile::from_fn(dist.ell(), |s| dist.entropy(s)).expect("distribution arity already validated")
}

/// Outcome of checking a transcript map against the transcript-like inequalities.
#[derive(Clone, Debug)]
pub struct TranscriptAudit {
    /// `I(x_1 : x_2) − I(x_1 : x_2 | T)`.
    pub mutual_residual: f64,
    /// `J(x_1..x_ell) − J(x_1..x_ell | T)`; equal to `mutual_residual` when `ell = 2`.
    pub j_residual: f64,
    /// Every preimage of `T` is a combinatorial rectangle (parallelepiped) on the support.
    pub rectangle_ok: bool,
}

/// Evaluates `f` on every support tuple and reports the conditional-information
/// residuals and whether `f` looks like a protocol transcript.
pub fn transcript_inequality_audit(
    dist: &JointDistribution,
    f: impl Fn(&[BitVec]) -> BitVec,
) -> Result<TranscriptAudit> {
    let ell = dist.ell();
    ensure(ell >= 2, || "transcript audit needs at least two parties".into())?;
    let with_t = dist.extend_with(&f)?;
    let t = PartySet::singleton(ell);
    let h = |s: PartySet| with_t.entropy(s);
    let cond_t = |s: PartySet| h(s.union(t)) - h(t);

    let (a, b) = (PartySet::singleton(0), PartySet::singleton(1));
    let mi = h(a) + h(b) - h(a.union(b));
    let mi_t = cond_t(a) + cond_t(b) - cond_t(a.union(b));

    let all = PartySet::full(ell);
    let singles: f64 = (0..ell).map(|i| h(PartySet::singleton(i))).sum();
    let singles_t: f64 = (0..ell).map(|i| cond_t(PartySet::singleton(i))).sum();
    let j = (singles - h(all)) / (ell as f64 - 1.0);
    let j_t = (singles_t - cond_t(all)) / (ell as f64 - 1.0);

    Ok(TranscriptAudit {
        mutual_residual: mi - mi_t,
        j_residual: j - j_t,
        rectangle_ok: preimages_are_rectangles(dist, &f),
    })
}

/// Checks that for every value `t` of `f`, each support tuple whose coordinates
/// all occur among the preimages of `t` is itself mapped to `t`.
pub fn preimages_are_rectangles(dist: &JointDistribution, f: impl Fn(&[BitVec]) -> BitVec) -> bool {
    let ell = dist.ell();
    let images: Vec<BitVec> = dist.support().iter().map(|(s, _)| f(s)).collect();
    let mut projections: HashMap<&BitVec, Vec<HashSet<&BitVec>>> = HashMap::new();
    for ((tuple, _), img) in dist.support().iter().zip(&images) {
        let proj = projections.entry(img).or_insert_with(|| vec![HashSet::new(); ell]);
        for (i, v) in tuple.iter().enumerate() {
            proj[i].insert(v);
        }
    }
    for (img, proj) in &projections {
        for ((tuple, _), other) in dist.support().iter().zip(&images) {
            if other != *img && tuple.iter().enumerate().all(|(i, v)| proj[i].contains(v)) {
                return false;
            }
        }
    }
    true
}

/// `H(Z|A) + H(Z|B) + I(A:B) − H(Z)`; nonnegative for every joint distribution.
pub fn key_bound_residual(p: &ComplexityProfile<f64>, a: PartySet, b: PartySet, z: PartySet) -> Result<f64> {
    Ok(p.cond(z, a)? + p.cond(z, b)? + p.mutual(a, b, PartySet::EMPTY)? - p.get(z))
}

/// `½(H(A) + H(B) + H(C) − H(A,B,C)) − H(Z)`; nonnegative when `Z` is a function of each of `A`, `B`, `C`.
pub fn common_key_residual(p: &ComplexityProfile<f64>, parts: [PartySet; 3], z: PartySet) -> f64 {
    let all = parts[0].union(parts[1]).union(parts[2]);
    0.5 * (parts.iter().map(|&s| p.get(s)).sum::<f64>() - p.get(all)) - p.get(z)
}

/// `H(W|X) + H(W|Y) + I(X:Y) − I(X:Y|W) − H(W|X,Y) − H(W)`, which is identically zero.
pub fn decomposition_gap(p: &ComplexityProfile<f64>, w: PartySet, x: PartySet, y: PartySet) -> Result<f64> {
    Ok(p.cond(w, x)? + p.cond(w, y)? + p.mutual(x, y, PartySet::EMPTY)?
        - p.mutual(x, y, w)?
        - p.cond(w, x.union(y))?
        - p.get(w))
}

/// `I(X:Y|Z,T) − (I(X:Y|T) − H(Z|T))`, zero whenever `H(Z|X,T) = H(Z|Y,T) = 0`.
pub fn common_part_gap(p: &ComplexityProfile<f64>, x: PartySet, y: PartySet, z: PartySet, t: PartySet) -> Result<f64> {
    Ok(p.mutual(x, y, z.union(t))? - (p.mutual(x, y, t)? - p.cond(z, t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn line_point(n: i64) -> ComplexityProfile {
        ComplexityProfile::from_integers(2, |s| if s.len() == 2 { 3 * n } else { 2 * n }).unwrap()
    }

    fn triple(n: i64) -> ComplexityProfile {
        ComplexityProfile::from_integers(3, |s| [0, 2 * n, 4 * n, 5 * n][s.len()]).unwrap()
    }

    fn additive(weights: &[i64]) -> ComplexityProfile {
        ComplexityProfile::from_integers(weights.len(), |s| s.parties().map(|i| weights[i]).sum()).unwrap()
    }

    const X: PartySet = PartySet(1);
    const Y: PartySet = PartySet(2);

    #[test]
    fn conditional_examples() {
        let lp = line_point(16);
        assert_eq!(lp.cond(X, Y).unwrap(), r(16));
        assert_eq!(lp.cond(X, X).unwrap(), r(0));
        let t = triple(16);
        assert_eq!(t.cond(PartySet(1), PartySet(6)).unwrap(), r(16));
        assert!(lp.cond(PartySet::EMPTY, Y).is_err());
    }

    #[test]
    fn mutual_examples() {
        assert_eq!(line_point(16).mutual(X, Y, PartySet::EMPTY).unwrap(), r(16));
        assert_eq!(additive(&[3, 5]).mutual(X, Y, PartySet::EMPTY).unwrap(), r(0));
        assert_eq!(triple(16).mutual(PartySet(1), PartySet(6), PartySet::EMPTY).unwrap(), r(16));
        assert!(triple(4).mutual(PartySet(1), PartySet(2), PartySet(3)).is_err());
    }

    #[test]
    fn multi_j_examples() {
        let t = triple(16);
        let singles = [PartySet(1), PartySet(2), PartySet(4)];
        assert_eq!(t.multi_j(&singles).unwrap(), r(8));
        assert_eq!(t.multi_j(&[PartySet(1), PartySet(6)]).unwrap(), r(16));
        let add = additive(&[1, 2, 7]);
        for p in set_partitions(3, 2) {
            assert_eq!(add.multi_j(&p).unwrap(), r(0));
        }
        assert!(t.multi_j(&[PartySet(1), PartySet(2)]).is_err());
        assert!(t.multi_j(&[PartySet(7)]).is_err());
        assert!(t.multi_j(&[PartySet(3), PartySet(6)]).is_err());
    }

    #[test]
    fn polymatroid_examples() {
        assert!(line_point(8).is_polymatroid());
        let bad = ComplexityProfile::from_integers(2, |s| if s.len() == 2 { 9 } else { 4 }).unwrap();
        assert!(!bad.is_polymatroid());
        assert!(ComplexityProfile::from_integers(3, |_| 0).unwrap().is_polymatroid());
    }

    #[test]
    fn profile_file_roundtrip_and_rejections() {
        let t = triple(16).scale(Rational::new(1, 2));
        let text = t.to_file_string();
        assert!(text.contains("1,2=32"));
        assert_eq!(ComplexityProfile::parse(&text).unwrap(), t);
        let half = ComplexityProfile::parse("1=3/2\n2=1\n1,2=5/2\n").unwrap();
        assert_eq!(half.get(X), Rational::new(3, 2));
        assert!(ComplexityProfile::parse("1=2\n2=2\n").is_err(), "missing subset");
        assert!(ComplexityProfile::parse("1=2\n1=2\n2=1\n1,2=3").is_err(), "duplicate");
        assert!(ComplexityProfile::parse("1=x").is_err());
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (ell, &b) in bell.iter().enumerate().skip(1) {
            assert_eq!(set_partitions(ell, 1).len(), b);
            assert_eq!(set_partitions(ell, 2).len(), b - 1);
        }
    }

    fn bits(v: u64, n: usize) -> BitVec {
        BitVec::from_u64(v, n)
    }

    #[test]
    fn entropy_examples() {
        let indep = JointDistribution::uniform(2, (0..4).map(|v| vec![bits(v & 1, 1), bits(v >> 1, 1)])).unwrap();
        let p = exact_profile(&indep);
        assert!((p.get(X) - 1.0).abs() < 1e-12 && (p.get(Y) - 1.0).abs() < 1e-12);
        assert!((p.joint() - 2.0).abs() < 1e-12);

        let copy = JointDistribution::uniform(2, (0..4).map(|v| vec![bits(v, 2), bits(v, 2)])).unwrap();
        let p = exact_profile(&copy);
        for (_, v) in p.entries() {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_validation() {
        let a = vec![bits(0, 1)];
        assert!(JointDistribution::new(1, vec![(a.clone(), Rational::new(1, 2))]).is_err());
        assert!(JointDistribution::new(1, vec![(a.clone(), Rational::new(1, 2)), (a.clone(), Rational::new(1, 2))]).is_err());
        assert!(JointDistribution::new(1, vec![(a, r(1))]).is_ok());
    }

    fn xor_dist() -> JointDistribution {
        JointDistribution::uniform(2, (0..4).map(|v| vec![bits(v & 1, 1), bits(v >> 1, 1)])).unwrap()
    }

    #[test]
    fn transcript_audit_examples() {
        let d = random_distribution(&mut ChaCha8Rng::seed_from_u64(4), 2, 3);
        let constant = transcript_inequality_audit(&d, |_| BitVec::zeros(1)).unwrap();
        assert!(constant.mutual_residual.abs() < 1e-12);
        assert!(constant.rectangle_ok);

        let first = transcript_inequality_audit(&d, |t| t[0].clone()).unwrap();
        assert!(first.mutual_residual >= -1e-12);
        assert!(first.rectangle_ok);

        let xor = transcript_inequality_audit(&xor_dist(), |t| &t[0] ^ &t[1]).unwrap();
        assert!(!xor.rectangle_ok);
        assert!((xor.mutual_residual + 1.0).abs() < 1e-12);
    }

    /// A random distribution over `ell` components of `width` bits with small integer weights.
    pub(crate) fn random_distribution(rng: &mut ChaCha8Rng, ell: usize, width: usize) -> JointDistribution {
        let size = rng.gen_range(2..=24);
        JointDistribution::from_weighted(
            ell,
            (0..size).map(|_| {
                let t = (0..ell).map(|_| BitVec::random(width, rng)).collect();
                (t, rng.gen_range(1..=9))
            }),
        )
        .unwrap()
    }

    #[test]
    fn two_message_protocols_never_increase_mutual_information() {
        // every deterministic protocol with one bit from each side over a 4x4 alphabet
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let support: Vec<(Vec<BitVec>, u64)> = (0..16u64)
                .map(|v| (vec![bits(v & 3, 2), bits(v >> 2, 2)], rng.gen_range(0..=6)))
                .collect();
            let d = JointDistribution::from_weighted(2, support).unwrap();
            for m1 in 0..16u32 {
                for m2 in 0..256u32 {
                    let f = |t: &[BitVec]| {
                        let a = t[0].to_u64() as u32;
                        let b = t[1].to_u64() as u32;
                        let first = m1 >> a & 1;
                        let second = m2 >> (b * 2 + first) & 1;
                        bits((first | second << 1) as u64, 2)
                    };
                    let audit = transcript_inequality_audit(&d, f).unwrap();
                    assert!(audit.rectangle_ok);
                    assert!(audit.mutual_residual >= -1e-12, "m1={m1} m2={m2}: {}", audit.mutual_residual);
                }
            }
        }
    }

    #[test]
    fn three_party_transcripts_do_not_increase_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d = random_distribution(&mut rng, 3, 2);
            let (ma, mb, mc): (u32, u32, u32) = (rng.gen(), rng.gen(), rng.gen());
            let f = |t: &[BitVec]| {
                let first = ma >> t[0].to_u64() & 1;
                let second = mb >> (t[1].to_u64() * 2 + first as u64) & 1;
                let third = mc >> (t[2].to_u64() * 4 + (first | second << 1) as u64) & 1;
                bits((first | second << 1 | third << 2) as u64, 3)
            };
            let audit = transcript_inequality_audit(&d, f).unwrap();
            assert!(audit.rectangle_ok);
            assert!(audit.j_residual >= -1e-12);
        }
    }

    proptest! {
        #[test]
        fn chain_rule_on_random_profiles(vals in proptest::collection::vec(0i64..50, 7), v in 1u32..8, w in 0u32..8) {
            let p = ComplexityProfile::from_integers(3, |s| vals[s.0 as usize - 1]).unwrap();
            let (v, w) = (PartySet(v), PartySet(w));
            prop_assert_eq!(p.cond(v, w).unwrap() + p.get(w), p.get(v.union(w)));
        }

        #[test]
        fn entropy_profiles_are_polymatroids(seed in any::<u64>(), ell in 2usize..5) {
            let d = random_distribution(&mut ChaCha8Rng::seed_from_u64(seed), ell, 2);
            let p = exact_profile(&d);
            prop_assert!(p.is_polymatroid());
            for g in 0..(1u32 << ell) {
                for v in 1..(1u32 << ell) {
                    for w in 1..(1u32 << ell) {
                        let (g, v, w) = (PartySet(g), PartySet(v), PartySet(w));
                        if v.is_disjoint(g) && w.is_disjoint(g) && v.is_disjoint(w) {
                            prop_assert!(p.mutual(v, w, g).unwrap() >= -1e-12);
                        }
                    }
                }
            }
        }
    }
}
