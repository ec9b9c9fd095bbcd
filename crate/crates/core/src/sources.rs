//! Correlated-input models, their analytic profiles, and exact candidate sets.
//!
//! Bit layouts: a line-point pair is `x = (a, b)` (slope in the low `n` bits,
//! intercept in the high `n`) and `y = (c, d)` with `d = a·c + b` in GF(2^n).
//! Triple points use the same `(c, d)` layout.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::gf2::{BitVec, Gf2n};
use crate::infoprofile::{ComplexityProfile, PartySet};

/// Largest `n` for a Hamming pair; keeps binomials exact in `u128`.
pub const MAX_HAMMING_LEN: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorrelationModel {
    LinePoint { n: usize },
    HammingPair { n: usize, t: usize },
    CollinearTriple { n: usize },
    IdenticalPair { n: usize },
}

impl CorrelationModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        ensure(n >= 2, || format!("{self}: n must be at least 2"))?;
        match *self {
            CorrelationModel::LinePoint { n } | CorrelationModel::CollinearTriple { n } => {
                Gf2n::new(n as u32).map(|_| ())
            }
            CorrelationModel::HammingPair { n, t } => {
                ensure(n <= MAX_HAMMING_LEN, || format!("{self}: n above {MAX_HAMMING_LEN}"))?;
                ensure(2 * t < n, || format!("{self}: need t < n/2"))
            }
            CorrelationModel::IdenticalPair { .. } => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            CorrelationModel::LinePoint { n }
            | CorrelationModel::HammingPair { n, .. }
            | CorrelationModel::CollinearTriple { n }
            | CorrelationModel::IdenticalPair { n } => n,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            CorrelationModel::CollinearTriple { .. } => 3,
            _ => 2,
        }
    }

    /// Bit length of party `i`'s input.
    pub fn input_len(&self, _party: usize) -> usize {
        match *self {
            CorrelationModel::LinePoint { n } | CorrelationModel::CollinearTriple { n } => 2 * n,
            CorrelationModel::HammingPair { n, .. } | CorrelationModel::IdenticalPair { n } => n,
        }
    }

    fn field(&self) -> Result<Gf2n> {
        Gf2n::new(self.n() as u32)
    }
}

/// Model grammar: `line-point:n=16`, `hamming:n=31,t=2`, `triple:n=16`, `identical:n=16`.
impl fmt::Display for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CorrelationModel::LinePoint { n } => write!(f, "line-point:n={n}"),
            CorrelationModel::HammingPair { n, t } => write!(f, "hamming:n={n},t={t}"),
            CorrelationModel::CollinearTriple { n } => write!(f, "triple:n={n}"),
            CorrelationModel::IdenticalPair { n } => write!(f, "identical:n={n}"),
        }
    }
}

impl FromStr for CorrelationModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("model {s:?}: {msg}"));
        let (kind, params) = s.trim().split_once(':').ok_or_else(|| bad("expected `kind:key=value,...`".into()))?;
        let mut n = None;
        let mut t = None;
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad parameter {kv:?}")))?;
            let v: usize = v.trim().parse().map_err(|e| bad(format!("bad value for {k}: {e}")))?;
            match k.trim() {
                "n" => n = Some(v),
                "t" => t = Some(v),
                other => return Err(bad(format!("unknown parameter {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n".into()))?;
        let kind = kind.trim().replace('_', "-");
        let model = match kind.as_str() {
            "line-point" => CorrelationModel::LinePoint { n },
            "hamming" | "hamming-pair" => {
                CorrelationModel::HammingPair { n, t: t.ok_or_else(|| bad("missing t".into()))? }
            }
            "triple" | "collinear-triple" => CorrelationModel::CollinearTriple { n },
            "identical" | "identical-pair" => CorrelationModel::IdenticalPair { n },
            other => return Err(bad(format!("unknown model kind {other:?}"))),
        };
        if t.is_some() && !matches!(model, CorrelationModel::HammingPair { .. }) {
            return Err(bad("t only applies to hamming".into()));
        }
        model.validate()?;
        Ok(model)
    }
}

#[derive(Clone, Debug)]
pub struct CorrelatedInstance {
    pub model: CorrelationModel,
    pub inputs: Vec<BitVec>,
    pub profile: ComplexityProfile,
}

/// Packs a point `(c, d)` (or a line `(a, b)`) into `2n` bits.
pub fn pack_pair(lo: u64, hi: u64, n: usize) -> BitVec {
    BitVec::from_u64(lo, n).concat(&BitVec::from_u64(hi, n))
}

pub fn unpack_pair(v: &BitVec, n: usize) -> (u64, u64) {
    (v.slice(0, n).to_u64(), v.slice(n, n).to_u64())
}

fn uniform<R: Rng + ?Sized>(field: &Gf2n, rng: &mut R) -> u64 {
    rng.gen::<u64>() & field.mask()
}

/// Draws one instance; consumes the stream in a fixed order so results replay.
pub fn sample<R: Rng + ?Sized>(model: &CorrelationModel, rng: &mut R) -> Result<CorrelatedInstance> {
    model.validate()?;
    let inputs = match *model {
        CorrelationModel::LinePoint { n } => {
            let f = model.field()?;
            let (a, b, c) = (uniform(&f, rng), uniform(&f, rng), uniform(&f, rng));
            let d = f.mul(a, c) ^ b;
            vec![pack_pair(a, b, n), pack_pair(c, d, n)]
        }
        CorrelationModel::HammingPair { n, t } => {
            let x = BitVec::random(n, rng);
            let mut y = x.clone();
            for i in index::sample(rng, n, t) {
                y.flip(i);
            }
            vec![x, y]
        }
        CorrelationModel::CollinearTriple { n } => {
            let f = model.field()?;
            let (a, b) = (uniform(&f, rng), uniform(&f, rng));
            let mut cs: Vec<u64> = Vec::with_capacity(3);
            while cs.len() < 3 {
                let c = uniform(&f, rng);
                if !cs.contains(&c) {
                    cs.push(c);
                }
            }
            cs.iter().map(|&c| pack_pair(c, f.mul(a, c) ^ b, n)).collect()
        }
        CorrelationModel::IdenticalPair { n } => {
            let x = BitVec::random(n, rng);
            vec![x.clone(), x]
        }
    };
    Ok(CorrelatedInstance { model: *model, inputs, profile: analytic_profile(model)? })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `⌈log₂ v⌉` for `v ≥ 1`.
pub fn ceil_log2(v: u128) -> usize {
    assert!(v >= 1, "ceil_log2 of zero");
    (128 - (v - 1).leading_zeros()) as usize
}

/// Exact model profile in bits.
pub fn analytic_profile(model: &CorrelationModel) -> Result<ComplexityProfile> {
    model.validate()?;
    let n = model.n() as i64;
    match *model {
        CorrelationModel::LinePoint { .. } => {
            ComplexityProfile::from_integers(2, |s| if s.len() == 2 { 3 * n } else { 2 * n })
        }
        CorrelationModel::CollinearTriple { .. } => {
            ComplexityProfile::from_integers(3, |s| [0, 2 * n, 4 * n, 5 * n][s.len()])
        }
        CorrelationModel::HammingPair { n: len, t } => {
            let extra = ceil_log2(binomial(len, t)) as i64;
            ComplexityProfile::from_integers(2, |s| if s.len() == 2 { n + extra } else { n })
        }
        CorrelationModel::IdenticalPair { .. } => ComplexityProfile::from_integers(2, |_| n),
    }
}

/// An enumerable set of candidate strings in a fixed canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateSet {
    Explicit(Vec<BitVec>),
    /// `offset ⊕ Σ aₖ·basisₖ` for every coefficient word `a`, in increasing `a`.
    Affine { offset: BitVec, basis: Vec<BitVec> },
    /// All strings within distance `radius` of `center`, by weight and then
    /// lexicographically by flipped positions.
    HammingBall { center: BitVec, radius: usize },
}

impl CandidateSet {
    pub fn len(&self) -> u128 {
        match self {
            CandidateSet::Explicit(v) => v.len() as u128,
            CandidateSet::Affine { basis, .. } => 1u128 << basis.len(),
            CandidateSet::HammingBall { center, radius } => {
                (0..=*radius).map(|w| binomial(center.len(), w)).sum()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bit length of the members.
    pub fn width(&self) -> Option<usize> {
        match self {
            CandidateSet::Explicit(v) => v.first().map(BitVec::len),
            CandidateSet::Affine { offset, .. } => Some(offset.len()),
            CandidateSet::HammingBall { center, .. } => Some(center.len()),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = BitVec> + '_> {
        match self {
            CandidateSet::Explicit(v) => Box::new(v.iter().cloned()),
            CandidateSet::Affine { offset, basis } => Box::new((0..1u64 << basis.len()).map(move |a| {
                let mut x = offset.clone();
                for (k, b) in basis.iter().enumerate() {
                    if a >> k & 1 == 1 {
                        x ^= b;
                    }
                }
                x
            })),
            CandidateSet::HammingBall { center, radius } => Box::new(
                (0..=*radius).flat_map(move |w| Combinations::new(center.len(), w)).map(move |pos| {
                    let mut x = center.clone();
                    for p in pos {
                        x.flip(p);
                    }
                    x
                }),
            ),
        }
    }

    pub fn contains(&self, x: &BitVec) -> bool {
        match self {
            CandidateSet::Explicit(v) => v.contains(x),
            CandidateSet::HammingBall { center, radius } => {
                x.len() == center.len() && (x ^ center).count_ones() <= *radius
            }
            CandidateSet::Affine { .. } => self.iter().any(|c| &c == x),
        }
    }
}

/// `k`-subsets of `0..n` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn check_observation(model: &CorrelationModel, observer: usize, observation: &BitVec) -> Result<()> {
    model.validate()?;
    ensure(observer < model.arity(), || format!("{model}: no party {observer}"))?;
    let want = model.input_len(observer);
    ensure(observation.len() == want, || {
        format!("{model}: observation has {} bits, expected {want}", observation.len())
    })
}

/// Exact set of values the other party's input can take given `observation`.
pub fn enumerate_candidates(
    model: &CorrelationModel,
    observer: usize,
    observation: &BitVec,
) -> Result<CandidateSet> {
    check_observation(model, observer, observation)?;
    match *model {
        CorrelationModel::LinePoint { n } => {
            let f = model.field()?;
            let (lo, hi) = unpack_pair(observation, n);
            // Bob sees (c, d): lines (a, d + a·c). Alice sees (a, b): points (c, a·c + b).
            let basis = (0..n)
                .map(|k| {
                    let e = 1u64 << k;
                    pack_pair(e, f.mul(e, lo), n)
                })
                .collect();
            Ok(CandidateSet::Affine { offset: pack_pair(0, hi, n), basis })
        }
        CorrelationModel::HammingPair { t, .. } => {
            Ok(CandidateSet::HammingBall { center: observation.clone(), radius: t })
        }
        CorrelationModel::IdenticalPair { .. } => Ok(CandidateSet::Explicit(vec![observation.clone()])),
        CorrelationModel::CollinearTriple { .. } => Err(Error::Contract(
            "collinear triples have joint candidates only; use joint_candidates".into(),
        )),
    }
}

/// Candidate tuples for the whole input vector, consistent with one party's input.
#[derive(Clone, Debug)]
pub enum JointCandidateSet {
    /// The own input fixed, every other party ranging independently over its set.
    Product { own_index: usize, own: BitVec, others: Vec<CandidateSet> },
    /// Three distinct points on a common non-vertical line through `own`.
    CollinearTriple { field: Gf2n, own_index: usize, own: BitVec },
    Explicit { arity: usize, tuples: Vec<Vec<BitVec>> },
}

impl JointCandidateSet {
    pub fn arity(&self) -> usize {
        match self {
            JointCandidateSet::Product { others, .. } => others.len() + 1,
            JointCandidateSet::CollinearTriple { .. } => 3,
            JointCandidateSet::Explicit { arity, .. } => *arity,
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            JointCandidateSet::Product { others, .. } => others.iter().map(CandidateSet::len).product(),
            JointCandidateSet::CollinearTriple { field, .. } => {
                let q = field.order();
                q * (q - 1) * (q - 2)
            }
            JointCandidateSet::Explicit { tuples, .. } => tuples.len() as u128,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Visits every tuple in canonical order; stops early when `f` returns false.
    pub fn for_each(&self, f: &mut dyn FnMut(&[BitVec]) -> bool) {
        match self {
            JointCandidateSet::Product { own_index, own, others } => {
                let mut tuple = vec![own.clone(); others.len() + 1];
                product_rec(0, *own_index, others, &mut tuple, f);
            }
            JointCandidateSet::CollinearTriple { field, own_index, own } => {
                let n = field.degree() as usize;
                let (co, dox) = unpack_pair(own, n);
                let q = field.order() as u64;
                let mut tuple = vec![own.clone(); 3];
                let others: Vec<usize> = (0..3).filter(|&i| i != *own_index).collect();
                for a in 0..q {
                    let b = field.mul(a, co) ^ dox;
                    for c1 in (0..q).filter(|&c| c != co) {
                        for c2 in (0..q).filter(|&c| c != co && c != c1) {
                            tuple[others[0]] = pack_pair(c1, field.mul(a, c1) ^ b, n);
                            tuple[others[1]] = pack_pair(c2, field.mul(a, c2) ^ b, n);
                            if !f(&tuple) {
                                return;
                            }
                        }
                    }
                }
            }
            JointCandidateSet::Explicit { tuples, .. } => {
                for t in tuples {
                    if !f(t) {
                        return;
                    }
                }
            }
        }
    }
}

fn product_rec(
    slot: usize,
    own_index: usize,
    others: &[CandidateSet],
    tuple: &mut Vec<BitVec>,
    f: &mut dyn FnMut(&[BitVec]) -> bool,
) -> bool {
    if slot == tuple.len() {
        return f(tuple);
    }
    if slot == own_index {
        return product_rec(slot + 1, own_index, others, tuple, f);
    }
    let set = &others[if slot < own_index { slot } else { slot - 1 }];
    for c in set.iter() {
        tuple[slot] = c;
        if !product_rec(slot + 1, own_index, others, tuple, f) {
            return false;
        }
    }
    true
}

/// Joint candidates for every model; two-party models become a product.
pub fn joint_candidates(model: &CorrelationModel, own_index: usize, own: &BitVec) -> Result<JointCandidateSet> {
    check_observation(model, own_index, own)?;
    match model {
        CorrelationModel::CollinearTriple { .. } => {
            Ok(JointCandidateSet::CollinearTriple { field: model.field()?, own_index, own: own.clone() })
        }
        _ => Ok(JointCandidateSet::Product {
            own_index,
            own: own.clone(),
            others: vec![enumerate_candidates(model, own_index, own)?],
        }),
    }
}

/// Every input tuple of the model with its multiplicity under `sample`, for
/// exact audits. Refuses spaces above 2¹⁸ tuples.
pub fn enumerate_instances(model: &CorrelationModel) -> Result<Vec<Vec<BitVec>>> {
    model.validate()?;
    let limit = 1u128 << 18;
    let n = model.n();
    let too_big = |count: u128| {
        Error::SizeLimit(format!("{model}: {count} instances exceed the 2^18 enumeration ceiling"))
    };
    match *model {
        CorrelationModel::LinePoint { .. } => {
            let f = model.field()?;
            let q = f.order();
            if q * q * q > limit {
                return Err(too_big(q * q * q));
            }
            let q = q as u64;
            let mut out = Vec::new();
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        out.push(vec![pack_pair(a, b, n), pack_pair(c, f.mul(a, c) ^ b, n)]);
                    }
                }
            }
            Ok(out)
        }
        CorrelationModel::IdenticalPair { .. } => {
            if 1u128 << n > limit {
                return Err(too_big(1 << n));
            }
            Ok((0..1u64 << n).map(|v| vec![BitVec::from_u64(v, n); 2]).collect())
        }
        CorrelationModel::HammingPair { t, .. } => {
            let count = (1u128 << n) * binomial(n, t);
            if count > limit {
                return Err(too_big(count));
            }
            let mut out = Vec::new();
            for v in 0..1u64 << n {
                let x = BitVec::from_u64(v, n);
                for pos in Combinations::new(n, t) {
                    let mut y = x.clone();
                    for p in pos {
                        y.flip(p);
                    }
                    out.push(vec![x.clone(), y]);
                }
            }
            Ok(out)
        }
        CorrelationModel::CollinearTriple { .. } => {
            let f = model.field()?;
            let q = f.order();
            let count = q * q * q * (q - 1) * (q - 2);
            if count > limit {
                return Err(too_big(count));
            }
            let q = q as u64;
            let mut out = Vec::new();
            for a in 0..q {
                for b in 0..q {
                    for c1 in 0..q {
                        for c2 in (0..q).filter(|&c| c != c1) {
                            for c3 in (0..q).filter(|&c| c != c1 && c != c2) {
                                out.push(
                                    [c1, c2, c3].iter().map(|&c| pack_pair(c, f.mul(a, c) ^ b, n)).collect(),
                                );
                            }
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// `true` if `inputs` satisfy the model's defining constraint.
pub fn satisfies_model(model: &CorrelationModel, inputs: &[BitVec]) -> bool {
    if inputs.len() != model.arity() || (0..inputs.len()).any(|i| inputs[i].len() != model.input_len(i)) {
        return false;
    }
    match *model {
        CorrelationModel::LinePoint { n } => {
            let Ok(f) = model.field() else { return false };
            let (a, b) = unpack_pair(&inputs[0], n);
            let (c, d) = unpack_pair(&inputs[1], n);
            f.mul(a, c) ^ b == d
        }
        CorrelationModel::HammingPair { t, .. } => (&inputs[0] ^ &inputs[1]).count_ones() == t,
        CorrelationModel::IdenticalPair { .. } => inputs[0] == inputs[1],
        CorrelationModel::CollinearTriple { n } => {
            let Ok(f) = model.field() else { return false };
            let pts: Vec<(u64, u64)> = inputs.iter().map(|v| unpack_pair(v, n)).collect();
            let (c0, d0) = pts[0];
            let (c1, d1) = pts[1];
            let (c2, d2) = pts[2];
            if c0 == c1 || c0 == c2 || c1 == c2 {
                return false;
            }
            // collinear: (d1-d0)(c2-c0) = (d2-d0)(c1-c0)
            f.mul(d1 ^ d0, c2 ^ c0) == f.mul(d2 ^ d0, c1 ^ c0)
        }
    }
}

/// Profile subsets as one-based strings, handy for reports.
pub fn profile_summary(profile: &ComplexityProfile) -> String {
    profile
        .entries()
        .map(|(s, v): (PartySet, _)| format!("{{{s}}}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}
