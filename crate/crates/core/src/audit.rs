//! Empirical and exact secrecy audits of protocol sessions.
//!
//! The adversary's view is the transcript. With coins fixed across trials every
//! seed payload is constant, so the view varies only through input-dependent
//! payloads (fingerprints, syndromes), and keys are tabulated per such stratum.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::channel::Transcript;
use crate::error::{ensure, Error, Result};
use crate::gf2::BitVec;
use crate::harness::{derive_seed, Exec};
use crate::hashext::{tv_from_counts, MAX_TABULATED_BITS};
use crate::infoprofile::{entropy_of, transcript_inequality_audit, JointDistribution, PartySet, Rational};
use crate::protocols::{plan, run_planned, Coins, SessionConfig};
use crate::sources::enumerate_instances;

/// Widest key the stratified audit tabulates.
pub const MAX_AUDIT_KEY_BITS: usize = 20;

/// The public-channel content, which is all an eavesdropper observes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryView {
    pub transcript: Transcript,
}

impl AdversaryView {
    /// Concatenation of every non-seed payload, tagged by sender and kind.
    pub fn stratum(&self) -> Vec<(usize, String, BitVec)> {
        self.transcript
            .records()
            .iter()
            .filter(|r| !is_seed_kind(&r.kind))
            .map(|r| (r.sender, r.kind.clone(), r.payload.clone()))
            .collect()
    }

    fn seeds(&self) -> Vec<&BitVec> {
        self.transcript.records().iter().filter(|r| is_seed_kind(&r.kind)).map(|r| &r.payload).collect()
    }
}

fn is_seed_kind(kind: &str) -> bool {
    kind.ends_with("seed")
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    pub exec: Exec,
    /// Pass threshold on the worst eligible stratum's TV distance.
    pub max_tv: f64,
    /// Strata with fewer samples are ignored.
    pub min_stratum: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { exec: Exec::default(), max_tv: 0.05, min_stratum: 30 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub trials: u64,
    pub agreement_rate: f64,
    /// Worst TV distance from uniform over strata with enough samples.
    pub est_tv: f64,
    /// Smallest per-stratum min-entropy estimate, in bits.
    pub est_min_entropy: f64,
    /// Mean reconciliation-message bits per session.
    pub leakage_bits: f64,
    pub key_len: usize,
    pub strata: usize,
    pub eligible_strata: usize,
    pub worst_stratum_samples: usize,
    /// Expected TV of a truly uniform sample the size of the worst stratum.
    pub uniform_tv_floor: f64,
    pub pass: bool,
    pub inconclusive: bool,
}

impl AuditReport {
    /// `name=value` lines.
    pub fn to_record_string(&self) -> String {
        let mut s = String::new();
        let b = |v: bool| u8::from(v);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "agreement_rate={:.6}", self.agreement_rate);
        let _ = writeln!(s, "est_tv={:.6}", self.est_tv);
        let _ = writeln!(s, "est_min_entropy={:.6}", self.est_min_entropy);
        let _ = writeln!(s, "leakage_bits={:.6}", self.leakage_bits);
        let _ = writeln!(s, "key_len={}", self.key_len);
        let _ = writeln!(s, "strata={}", self.strata);
        let _ = writeln!(s, "eligible_strata={}", self.eligible_strata);
        let _ = writeln!(s, "worst_stratum_samples={}", self.worst_stratum_samples);
        let _ = writeln!(s, "uniform_tv_floor={:.6}", self.uniform_tv_floor);
        let _ = writeln!(s, "pass={}", b(self.pass));
        let _ = writeln!(s, "inconclusive={}", b(self.inconclusive));
        s
    }
}

/// Parses `name=value` lines into numbers, for reading reports back.
pub fn parse_records(text: &str) -> Result<BTreeMap<String, f64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Parse(format!("bad record line {l:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("non-numeric value in {l:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// `−log₂` of the largest empirical frequency. Small samples overstate it.
pub fn min_entropy_estimate(samples: &[BitVec]) -> Result<f64> {
    ensure(!samples.is_empty(), || "min-entropy estimate needs a sample".into())?;
    let mut counts: HashMap<&BitVec, usize> = HashMap::new();
    for s in samples {
        *counts.entry(s).or_default() += 1;
    }
    let max = *counts.values().max().expect("nonempty");
    Ok(-(max as f64 / samples.len() as f64).log2())
}

/// Approximate expected TV distance of `samples` uniform draws over `2^m` cells.
pub fn uniform_tv_floor(m: usize, samples: usize) -> f64 {
    let k = (1u64 << m) as f64;
    let p = 1.0 / k;
    let s = samples as f64;
    (0.5 * k * (2.0 / std::f64::consts::PI).sqrt() * (p * (1.0 - p) / s).sqrt()).min(1.0 - p)
}

/// Runs `trials` sessions with fresh inputs and fixed coins, and audits Alice's
/// key conditioned on the input-dependent part of the transcript.
pub fn conditional_uniformity(base: &SessionConfig, trials: u64, opts: &AuditOptions) -> Result<AuditReport> {
    ensure(trials > 0, || "audit needs at least one trial".into())?;
    let mut config = base.clone();
    if config.coins == Coins::PerSession {
        config.coins = Coins::Fixed(derive_seed(config.seed, "audit-coins"));
    }
    let (plan, targets) = plan(&config)?;
    let outcomes = opts.exec.map(trials, |i| {
        let c = config.with_session(i);
        crate::protocols::run_session_inputs(&c)
            .and_then(|inputs| run_planned(&c, &plan, &targets, inputs))
            .map(|o| (o.agreed, o.keys[0].clone(), o.message_bits, AdversaryView { transcript: o.transcript }))
    });
    let mut strata: HashMap<Vec<(usize, String, BitVec)>, Vec<BitVec>> = HashMap::new();
    let mut agreed = 0u64;
    let mut leak = 0u64;
    let mut key_len = 0;
    let mut seeds: Option<Vec<BitVec>> = None;
    for o in outcomes {
        let (ok, key, msg, view) = o?;
        let s: Vec<BitVec> = view.seeds().into_iter().cloned().collect();
        match &seeds {
            None => seeds = Some(s),
            Some(prev) if *prev != s => return Err(Error::Internal("public seeds varied under fixed coins".into())),
            Some(_) => {}
        }
        agreed += u64::from(ok);
        leak += msg as u64;
        key_len = key.len();
        strata.entry(view.stratum()).or_default().push(key);
    }
    ensure(key_len <= MAX_AUDIT_KEY_BITS.min(MAX_TABULATED_BITS), || format!("{key_len}-bit keys are too wide to tabulate"))?;

    let mut est_tv: f64 = 0.0;
    let mut est_min_entropy = key_len as f64;
    let mut eligible = 0;
    let mut worst_samples = 0;
    let mut counts = vec![0u32; 1 << key_len];
    for keys in strata.values().filter(|k| k.len() >= opts.min_stratum) {
        eligible += 1;
        counts.iter_mut().for_each(|c| *c = 0);
        for k in keys {
            counts[k.to_u64() as usize] += 1;
        }
        let tv = tv_from_counts(&counts, keys.len() as u64);
        if tv > est_tv || worst_samples == 0 {
            est_tv = tv;
            worst_samples = keys.len();
        }
        est_min_entropy = est_min_entropy.min(min_entropy_estimate(keys)?);
    }
    let inconclusive = eligible == 0;
    Ok(AuditReport {
        trials,
        agreement_rate: agreed as f64 / trials as f64,
        est_tv,
        est_min_entropy,
        leakage_bits: leak as f64 / trials as f64,
        key_len,
        strata: strata.len(),
        eligible_strata: eligible,
        worst_stratum_samples: worst_samples,
        uniform_tv_floor: if inconclusive { 0.0 } else { uniform_tv_floor(key_len, worst_samples) },
        pass: !inconclusive && est_tv <= opts.max_tv,
        inconclusive,
    })
}

/// Exact quantities from enumerating every instance of a small model.
#[derive(Clone, Debug)]
pub struct ExactAudit {
    pub instances: usize,
    pub key_len: usize,
    /// `I(x:y) − I(x:y|T)`.
    pub mutual_residual: f64,
    pub j_residual: f64,
    pub rectangle_ok: bool,
    /// `H(Z|T)` for Alice's key.
    pub key_entropy_given_view: f64,
    /// `Σ_t P(t)·(m − log₂(1 + 2^{m − H₂(X|T=t)}))`, the leftover-hash lower bound.
    pub lhl_oracle: f64,
    /// Strata in which the key takes all `2^m` values.
    pub full_rank_strata: usize,
    /// Whether the key is exactly uniform in every such stratum.
    pub full_rank_uniform: bool,
    pub strata: usize,
}

/// Runs the protocol (coins fixed) on every instance of the model and
/// computes exact information quantities of `(inputs, T, Z)`.
pub fn exact_small_n_audit(config: &SessionConfig) -> Result<ExactAudit> {
    ensure(config.coins != Coins::PerSession, || "exact audit needs fixed coins".into())?;
    let instances = enumerate_instances(&config.model)?;
    let (plan, targets) = plan(config)?;
    let ell = config.model.arity();

    let mut view_of: HashMap<Vec<BitVec>, BitVec> = HashMap::with_capacity(instances.len());
    let mut by_view: HashMap<BitVec, Vec<(BitVec, BitVec)>> = HashMap::new();
    let mut key_len = 0;
    for inst in &instances {
        let out = run_planned(config, &plan, &targets, inst.clone())?;
        let t = out.transcript.concatenated();
        key_len = out.key_len;
        by_view.entry(t.clone()).or_default().push((inst[0].clone(), out.keys[0].clone()));
        view_of.insert(inst.clone(), t);
    }
    let dist = JointDistribution::uniform(ell, instances.iter().cloned())?;
    let residuals = transcript_inequality_audit(&dist, |tuple| view_of[tuple].clone())?;

    let total = instances.len() as f64;
    let m = key_len as f64;
    let mut h_z_given_t = 0.0;
    let mut oracle = 0.0;
    let mut full_rank = 0;
    let mut uniform = true;
    for members in by_view.values() {
        let weight = members.len() as f64 / total;
        let mut keys: HashMap<&BitVec, i128> = HashMap::new();
        let mut xs: HashMap<&BitVec, i128> = HashMap::new();
        for (x, z) in members {
            *keys.entry(z).or_default() += 1;
            *xs.entry(x).or_default() += 1;
        }
        let size = members.len() as i128;
        h_z_given_t += weight * entropy_of(keys.values().map(|&c| Rational::new(c, size)));
        let collision: f64 = xs.values().map(|&c| (c as f64 / size as f64).powi(2)).sum();
        let h2 = -collision.log2();
        oracle += weight * (m - (1.0 + (m - h2).exp2()).log2());
        if key_len < 64 && keys.len() as u64 == 1u64 << key_len {
            full_rank += 1;
            let first = *keys.values().next().expect("nonempty");
            uniform &= keys.values().all(|&c| c == first);
        }
    }
    Ok(ExactAudit {
        instances: instances.len(),
        key_len,
        mutual_residual: residuals.mutual_residual,
        j_residual: residuals.j_residual,
        rectangle_ok: residuals.rectangle_ok,
        key_entropy_given_view: h_z_given_t,
        lhl_oracle: oracle,
        full_rank_strata: full_rank,
        full_rank_uniform: uniform,
        strata: by_view.len(),
    })
}

/// `H(Z|T)` for a distribution whose last two components are `(T, Z)`.
pub fn conditional_entropy_last(dist: &JointDistribution) -> f64 {
    let ell = dist.ell();
    let t = PartySet::singleton(ell - 2);
    dist.entropy(t.union(PartySet::singleton(ell - 1))) - dist.entropy(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashext::Eps;
    use crate::protocols::{Margins, Protocol};

    fn cfg(model: &str, protocol: Protocol, e: u32) -> SessionConfig {
        SessionConfig::new(model.parse().unwrap(), protocol, Eps::pow2(e).unwrap(), 5)
    }

    #[test]
    fn min_entropy_edge_cases() {
        let same = vec![BitVec::from_u64(3, 4); 10];
        assert_eq!(min_entropy_estimate(&same).unwrap(), 0.0);
        let all: Vec<BitVec> = (0..32).map(|v| BitVec::from_u64(v, 5)).collect();
        assert!((min_entropy_estimate(&all).unwrap() - 5.0).abs() < 1e-12);
        assert!(min_entropy_estimate(&[]).is_err());
    }

    #[test]
    fn identical_pair_light_keys_look_uniform() {
        let c = cfg("identical:n=6", Protocol::Light, 3);
        let r = conditional_uniformity(&c, 20_000, &AuditOptions::default()).unwrap();
        assert_eq!(r.strata, 1);
        assert_eq!(r.key_len, 6);
        assert!(r.pass, "{r:?}");
        assert!(r.est_tv < 0.05);
        assert_eq!(r.agreement_rate, 1.0);
    }

    #[test]
    fn canary_fails_the_audit() {
        let mut c = cfg("identical:n=6", Protocol::Light, 3);
        c.leak_key_canary = true;
        let r = conditional_uniformity(&c, 20_000, &AuditOptions::default()).unwrap();
        assert!(!r.inconclusive);
        assert!(!r.pass);
        assert!(r.est_tv > 0.98);
        assert_eq!(r.est_min_entropy, 0.0);
    }

    #[test]
    fn sparse_strata_are_inconclusive() {
        let c = cfg("line-point:n=8", Protocol::Light, 8);
        let r = conditional_uniformity(&c, 200, &AuditOptions::default()).unwrap();
        assert!(r.inconclusive);
        assert!(!r.pass);
    }

    #[test]
    fn records_roundtrip() {
        let c = cfg("identical:n=4", Protocol::Light, 2);
        let r = conditional_uniformity(&c, 500, &AuditOptions::default()).unwrap();
        let parsed = parse_records(&r.to_record_string()).unwrap();
        assert_eq!(parsed["trials"], 500.0);
        assert_eq!(parsed["key_len"], 4.0);
        assert!(parse_records("x=abc").is_err());
    }

    #[test]
    fn exact_audit_line_point_two() {
        let mut c = cfg("line-point:n=2", Protocol::Light, 1);
        c.coins = Coins::Fixed(3);
        let a = exact_small_n_audit(&c).unwrap();
        assert_eq!(a.instances, 64);
        assert!(a.rectangle_ok);
        assert!(a.mutual_residual >= -1e-9);
        assert!(a.full_rank_uniform);
        assert!(a.key_entropy_given_view <= a.key_len as f64 + 1e-9);
    }

    #[test]
    fn exact_audit_two_phase_and_omniscience() {
        let mut c = cfg("line-point:n=3", Protocol::TwoPhase, 1);
        c.coins = Coins::Fixed(1);
        c.margins = Some(Margins { k: 0, phase1: 1, deficiency: 0 });
        let a = exact_small_n_audit(&c).unwrap();
        assert!(a.mutual_residual >= -1e-9 && a.rectangle_ok);
        let mut t = cfg("triple:n=2", Protocol::Omniscience, 1);
        t.coins = Coins::Fixed(2);
        t.margins = Some(Margins { k: 0, phase1: 3, deficiency: 0 });
        let a = exact_small_n_audit(&t).unwrap();
        assert!(a.mutual_residual >= -1e-9 && a.j_residual >= -1e-9);
        assert!(exact_small_n_audit(&cfg("line-point:n=3", Protocol::Light, 1)).is_err());
    }

    #[test]
    fn constant_transcript_keeps_mutual_information() {
        let inst = enumerate_instances(&"line-point:n=2".parse().unwrap()).unwrap();
        let d = JointDistribution::uniform(2, inst).unwrap();
        let a = transcript_inequality_audit(&d, |_| BitVec::zeros(0)).unwrap();
        assert!(a.mutual_residual.abs() < 1e-12);
        let tz = d.pushforward(2, |t| vec![BitVec::zeros(0), t[0].clone()]).unwrap();
        assert!((conditional_entropy_last(&tz) - 4.0).abs() < 1e-12);
    }
}
