//! Slepian–Wolf rate regions, communication for omniscience and key capacity.

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::infoprofile::{format_rational, set_partitions, ComplexityProfile, PartySet, Rational};

/// Largest party count handled by vertex enumeration.
pub const MAX_LP_PARTIES: usize = 5;

/// Largest party count handled by the partition formula.
pub const MAX_PARTITION_PARTIES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RateTuple {
    pub rates: Vec<Rational>,
}

impl RateTuple {
    pub fn total(&self) -> Rational {
        self.rates.iter().fold(Rational::zero(), |a, &b| a + b)
    }

    /// Each rate rounded up to whole bits.
    pub fn ceil_bits(&self) -> Vec<usize> {
        self.rates.iter().map(|r| r.ceil().to_integer() as usize).collect()
    }

    pub fn sum_over(&self, s: PartySet) -> Rational {
        s.parties().fold(Rational::zero(), |a, i| a + self.rates[i])
    }
}

#[derive(Clone, Debug)]
pub struct RateRegion {
    pub profile: ComplexityProfile,
    /// `(I, C(x_I | x_{[ℓ]∖I}))` for every nonempty proper subset `I`.
    pub constraints: Vec<(PartySet, Rational)>,
}

impl RateRegion {
    pub fn ell(&self) -> usize {
        self.profile.ell()
    }

    pub fn contains(&self, t: &RateTuple) -> bool {
        t.rates.len() == self.ell()
            && t.rates.iter().all(|r| *r >= Rational::zero())
            && self.constraints.iter().all(|(s, b)| t.sum_over(*s) >= *b)
    }
}

/// One constraint `Σ_{i∈I} nᵢ ≥ C(x_I | x_J)` per splitting `I ∪ J` with both sides nonempty.
pub fn sw_constraints(profile: &ComplexityProfile) -> Result<RateRegion> {
    ensure(profile.is_polymatroid(), || "rate region needs a polymatroid profile".into())?;
    let full = profile.full();
    let constraints = PartySet::nonempty_subsets(profile.ell())
        .filter(|&s| s != full)
        .map(|s| Ok((s, profile.cond(s, full.difference(s))?)))
        .collect::<Result<_>>()?;
    Ok(RateRegion { profile: profile.clone(), constraints })
}

/// Solves the square 0/1 system `rows · n = rhs` exactly; `None` if singular.
fn solve_square(sets: &[PartySet], rhs: &[Rational], ell: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = sets
        .iter()
        .zip(rhs)
        .map(|(s, &b)| {
            let mut row: Vec<Rational> =
                (0..ell).map(|i| if s.contains(i) { Rational::one() } else { Rational::zero() }).collect();
            row.push(b);
            row
        })
        .collect();
    for col in 0..ell {
        let pivot = (col..ell).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..ell {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[ell]).collect())
}

/// Exact minimum total rate over the region with the lexicographically smallest
/// optimal tuple, by enumerating every basis of tight constraints.
pub fn co_lp(region: &RateRegion) -> Result<(Rational, RateTuple)> {
    let ell = region.ell();
    if ell > MAX_LP_PARTIES {
        return Err(Error::SizeLimit(format!("vertex enumeration supports at most {MAX_LP_PARTIES} parties")));
    }
    if ell == 1 {
        return Ok((Rational::zero(), RateTuple { rates: vec![Rational::zero()] }));
    }
    let cons = &region.constraints;
    let mut best: Option<(Rational, RateTuple)> = None;
    let mut idx: Vec<usize> = (0..ell).collect();
    loop {
        let sets: Vec<PartySet> = idx.iter().map(|&i| cons[i].0).collect();
        let rhs: Vec<Rational> = idx.iter().map(|&i| cons[i].1).collect();
        if let Some(rates) = solve_square(&sets, &rhs, ell) {
            let t = RateTuple { rates };
            if region.contains(&t) {
                let total = t.total();
                let better = match &best {
                    None => true,
                    Some((bt, bv)) => total < *bt || (total == *bt && t < *bv),
                };
                if better {
                    best = Some((total, t));
                }
            }
        }
        // next ell-combination of constraint indices
        let k = idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                return best.ok_or_else(|| Error::Internal("rate region has no vertex".into()));
            }
            i -= 1;
            if idx[i] < cons.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Closed form for three parties: the largest of the three "one versus two"
/// sums and half the sum of pair-given-third terms.
pub fn co_formula3(profile: &ComplexityProfile) -> Result<Rational> {
    ensure(profile.ell() == 3, || format!("three-party formula given {} parties", profile.ell()))?;
    let p = |i: usize| PartySet::singleton(i);
    let full = PartySet::full(3);
    let mut best = Rational::zero();
    for i in 0..3 {
        let rest = full.difference(p(i));
        best = best.max(profile.cond(p(i), rest)? + profile.cond(rest, p(i))?);
    }
    let half = (0..3).try_fold(Rational::zero(), |acc, i| -> Result<_> {
        Ok(acc + profile.cond(full.difference(p(i)), p(i))?)
    })? / Rational::from_integer(2);
    Ok(best.max(half))
}

/// `C([ℓ]) − CO` as the minimum of the normalized partition sums.
pub fn key_capacity(profile: &ComplexityProfile) -> Result<Rational> {
    let ell = profile.ell();
    if ell > MAX_PARTITION_PARTIES {
        return Err(Error::SizeLimit(format!("partition formula supports at most {MAX_PARTITION_PARTIES} parties")));
    }
    ensure(profile.is_polymatroid(), || "key capacity needs a polymatroid profile".into())?;
    if ell == 1 {
        return Ok(profile.joint());
    }
    let mut best: Option<Rational> = None;
    for p in set_partitions(ell, 2) {
        let v = profile.multi_j(&p)?;
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    Ok(best.expect("at least one partition with two parts"))
}

/// Human-readable summary used by the `rates` command.
pub fn describe(profile: &ComplexityProfile) -> Result<String> {
    let region = sw_constraints(profile)?;
    let mut out = String::new();
    let dec = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
    for (s, b) in &region.constraints {
        out.push_str(&format!("constraint {{{s}}} >= {} ({:.4} bits)\n", format_rational(*b), dec(*b)));
    }
    if profile.ell() <= MAX_LP_PARTIES {
        let (co, t) = co_lp(&region)?;
        let rates: Vec<String> = t.rates.iter().map(|r| format_rational(*r)).collect();
        out.push_str(&format!("co = {} ({:.4} bits)\n", format_rational(co), dec(co)));
        out.push_str(&format!("rates = ({})\n", rates.join(", ")));
    }
    if profile.ell() == 3 {
        let f = co_formula3(profile)?;
        out.push_str(&format!("co_formula3 = {} ({:.4} bits)\n", format_rational(f), dec(f)));
    }
    let kc = key_capacity(profile)?;
    out.push_str(&format!("key_capacity = {} ({:.4} bits)\n", format_rational(kc), dec(kc)));
    Ok(out)
}

/// A random polymatroid: a nonnegative mix of weighted coverage functions and
/// scaled uniform-matroid rank functions, with a random rational scale.
pub fn random_polymatroid<R: Rng + ?Sized>(ell: usize, rng: &mut R) -> Result<ComplexityProfile> {
    let ground = rng.gen_range(1..=6);
    let weights: Vec<i64> = (0..ground).map(|_| rng.gen_range(0..=5)).collect();
    let covers: Vec<u32> = (0..ell).map(|_| rng.gen_range(0..1u32 << ground)).collect();
    let rank_terms: Vec<(usize, i64)> =
        (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(1..=ell), rng.gen_range(1..=4))).collect();
    let scale = Rational::new(rng.gen_range(1..=6), rng.gen_range(1..=4));
    ComplexityProfile::from_fn(ell, |s| {
        let covered = s.parties().fold(0u32, |m, i| m | covers[i]);
        let coverage: i64 = (0..ground).filter(|&g| covered >> g & 1 == 1).map(|g| weights[g]).sum();
        let rank: i64 = rank_terms.iter().map(|&(r, w)| w * s.len().min(r) as i64).sum();
        Rational::from_integer((coverage + rank) as i128) * scale
    })
}
