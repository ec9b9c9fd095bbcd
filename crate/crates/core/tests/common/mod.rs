//! Random enumerable distributions with deterministic derived components.

#![allow(dead_code)]

use keyagree::gf2::BitVec;
use keyagree::infoprofile::JointDistribution;
use rand::Rng;

/// A random function table from `in_bits`-bit values to `out_bits`-bit values.
pub fn random_table<R: Rng>(rng: &mut R, in_bits: usize, out_bits: usize) -> Vec<u64> {
    (0..1u64 << in_bits).map(|_| rng.gen_range(0..1u64 << out_bits)).collect()
}

/// Random integer-weighted distribution over tuples of the given bit widths.
pub fn random_tuples<R: Rng>(rng: &mut R, widths: &[usize]) -> Vec<(Vec<u64>, u64)> {
    let size = rng.gen_range(2..=24);
    (0..size)
        .map(|_| (widths.iter().map(|&w| rng.gen_range(0..1u64 << w)).collect(), rng.gen_range(1..=9)))
        .collect()
}

fn bits(v: u64, w: usize) -> BitVec {
    BitVec::from_u64(v, w)
}

/// `(A, B, Z)` with `Z = g(A, B)`.
pub fn pair_with_function<R: Rng>(rng: &mut R) -> JointDistribution {
    let g = random_table(rng, 6, 2);
    let rows = random_tuples(rng, &[3, 3]);
    JointDistribution::from_weighted(
        3,
        rows.into_iter().map(|(v, w)| (vec![bits(v[0], 3), bits(v[1], 3), bits(g[(v[0] | v[1] << 3) as usize], 2)], w)),
    )
    .unwrap()
}

/// `(A, B, C, Z)` where each party holds a shared part `s` plus private bits and `Z = h(s)`.
pub fn triple_with_common_function<R: Rng>(rng: &mut R) -> JointDistribution {
    let h = random_table(rng, 2, 2);
    let rows = random_tuples(rng, &[2, 2, 2, 2]);
    JointDistribution::from_weighted(
        4,
        rows.into_iter().map(|(v, w)| {
            let s = v[0];
            (vec![bits(s | v[1] << 2, 4), bits(s | v[2] << 2, 4), bits(s | v[3] << 2, 4), bits(h[s as usize], 2)], w)
        }),
    )
    .unwrap()
}

/// `(X, Y, Z, T)` where `X`, `Y` share a part `u` and `Z = h(u, T)`.
pub fn common_part_given_t<R: Rng>(rng: &mut R) -> JointDistribution {
    let h = random_table(rng, 4, 2);
    let rows = random_tuples(rng, &[2, 2, 2, 2]);
    JointDistribution::from_weighted(
        4,
        rows.into_iter().map(|(v, w)| {
            let (u, t) = (v[0], v[3]);
            (vec![bits(u | v[1] << 2, 4), bits(u | v[2] << 2, 4), bits(h[(u | t << 2) as usize], 2), bits(t, 2)], w)
        }),
    )
    .unwrap()
}
