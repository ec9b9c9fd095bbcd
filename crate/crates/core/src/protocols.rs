//! Executable key-agreement sessions over the public channel.
//!
//! Each protocol is split into a sending step, which draws the parties' coins
//! and broadcasts, and a per-party finishing step that reads only the party's
//! own input, the public parameters and the transcript. Replaying the finishing
//! step from a dumped transcript therefore reproduces the party's key.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::channel::{Channel, Transcript};
use crate::error::{ensure, Error, Result};
use crate::gf2::{BitVec, Gf2Matrix, MatrixKind};
use crate::harness::rng::{substream, StreamRng, NATURE};
use crate::hashext::{extract, Eps, ExtractorSpec, HashSpec, LinearHash};
use crate::infoprofile::{ComplexityProfile, PartySet, Rational};
use crate::rateregion::{co_lp, key_capacity, sw_constraints};
use crate::reconcile::{
    binary_entropy, decode_with, hamming_parity_check, multi_decode, syndrome_decode, DecodeStatus, Fingerprint,
};
use crate::sources::{analytic_profile, ceil_log2, enumerate_candidates, joint_candidates, sample, CorrelationModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    Light,
    TwoPhase,
    Omniscience,
    Syndrome,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Light => "light",
            Protocol::TwoPhase => "two-phase",
            Protocol::Omniscience => "omniscience",
            Protocol::Syndrome => "syndrome",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('_', "-").as_str() {
            "light" => Ok(Protocol::Light),
            "two-phase" => Ok(Protocol::TwoPhase),
            "omniscience" => Ok(Protocol::Omniscience),
            "syndrome" => Ok(Protocol::Syndrome),
            other => Err(Error::Parse(format!("unknown protocol {other:?}"))),
        }
    }
}

/// Explicit slack bits standing in for the logarithmic terms of the analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Margins {
    /// Added to `C(x|y)` for the fingerprint size.
    pub k: usize,
    /// Added to the shared key material beyond the target key length.
    pub phase1: usize,
    /// Min-entropy the extractor assumes lost from the key material.
    pub deficiency: usize,
}

impl Margins {
    /// `k = ⌈4·log₂ n⌉`, `phase1 = ⌈log₂(n/ε)⌉`, `deficiency = 2⌈log₂(1/ε)⌉`.
    pub fn standard(n: usize, eps: Eps) -> Self {
        let n4 = (n as u128).pow(4);
        Margins { k: ceil_log2(n4.max(1)), phase1: eps.log2_scaled(n as u64), deficiency: 2 * eps.log2_inv() }
    }
}

/// Where a session's coins come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Coins {
    /// Fresh coins per session.
    #[default]
    PerSession,
    /// The same coins for every session (inputs still vary), as used by audits.
    Fixed(u64),
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub model: CorrelationModel,
    pub protocol: Protocol,
    pub eps: Eps,
    pub seed: u64,
    /// Session index; selects the input and coin streams.
    pub session: u64,
    /// `None` uses [`Margins::standard`] for the model's `n`.
    pub margins: Option<Margins>,
    /// Profile uncertainty: sessions inflate `C(x|y)` and deflate `I(x:y)` by this much.
    pub sigma: Rational,
    pub coins: Coins,
    /// Syndrome length override for random codes.
    pub syndrome_rows: Option<usize>,
    /// Test-only: Alice also broadcasts her key, so audits can be shown to notice.
    pub leak_key_canary: bool,
}

impl SessionConfig {
    pub fn new(model: CorrelationModel, protocol: Protocol, eps: Eps, seed: u64) -> Self {
        SessionConfig {
            model,
            protocol,
            eps,
            seed,
            session: 0,
            margins: None,
            sigma: Rational::zero(),
            coins: Coins::PerSession,
            syndrome_rows: None,
            leak_key_canary: false,
        }
    }

    pub fn with_session(&self, session: u64) -> Self {
        SessionConfig { session, ..self.clone() }
    }

    pub fn margins(&self) -> Margins {
        self.margins.unwrap_or_else(|| Margins::standard(self.model.n(), self.eps))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        ensure(self.sigma >= Rational::zero(), || "sigma must be nonnegative".into())?;
        let arity = self.model.arity();
        match self.protocol {
            Protocol::Light | Protocol::TwoPhase => {
                ensure(arity == 2, || format!("{} needs a two-party model, got {}", self.protocol, self.model))
            }
            Protocol::Omniscience => {
                ensure(arity == 3, || format!("omniscience needs a three-party model, got {}", self.model))
            }
            Protocol::Syndrome => ensure(matches!(self.model, CorrelationModel::HammingPair { .. }), || {
                format!("syndrome reconciliation needs a hamming model, got {}", self.model)
            }),
        }
    }

    fn coin_stream(&self, party: usize, purpose: &str) -> StreamRng {
        let session = match self.coins {
            Coins::PerSession => self.session,
            Coins::Fixed(s) => s,
        };
        substream(self.seed, "coins", session, party as u32, purpose)
    }

    fn input_stream(&self) -> StreamRng {
        substream(self.seed, "inputs", self.session, NATURE, "sample")
    }
}

/// Syndrome code choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeChoice {
    /// The Hamming code with `r` parity bits (public, no seed).
    Hamming(usize),
    /// A random dense code whose seed Alice broadcasts.
    Random { rows: usize },
}

/// Public parameters every party derives from the configuration and profile.
#[derive(Clone, Debug)]
pub enum SessionPlan {
    Light { fp_rows: usize, key_rows: usize, cols: usize },
    TwoPhase { fp_k: usize, fp_rows: usize, cols: usize, material_len: usize, extractor: ExtractorSpec },
    Omniscience { rates: Vec<usize>, fp_rows: Vec<usize>, widths: Vec<usize>, material_len: usize, extractor: ExtractorSpec },
    Syndrome { code: CodeChoice, radius: usize, extractor: ExtractorSpec },
}

#[derive(Clone, Debug)]
pub struct Targets {
    pub key_len: Rational,
    pub comm: Rational,
}

fn ceil_bits(r: Rational) -> usize {
    r.ceil().to_integer().max(0) as usize
}

fn floor_bits(r: Rational) -> usize {
    r.floor().to_integer().max(0) as usize
}

const X: PartySet = PartySet(1);
const Y: PartySet = PartySet(2);

/// Derives the public parameters and theoretical targets of a session.
pub fn plan(config: &SessionConfig) -> Result<(SessionPlan, Targets)> {
    config.validate()?;
    let profile: ComplexityProfile = analytic_profile(&config.model)?;
    let eps = config.eps;
    let e = eps.log2_inv();
    let margins = config.margins();
    let sigma = config.sigma;
    match config.protocol {
        Protocol::Light => {
            let cols = config.model.input_len(0);
            let n1 = ceil_bits(profile.get(X)).min(cols);
            let k = ceil_bits(profile.cond(X, Y)? + sigma).min(n1);
            if n1 == k {
                return Err(Error::Config(format!("{}: no key bits left after reconciliation", config.model)));
            }
            // nothing to reconcile when k = 0, so the fingerprint is empty
            let fp_rows = if k == 0 { 0 } else { k + e };
            let targets = Targets { key_len: profile.mutual(X, Y, PartySet::EMPTY)?, comm: profile.cond(X, Y)? };
            Ok((SessionPlan::Light { fp_rows, key_rows: n1 - k, cols }, targets))
        }
        Protocol::TwoPhase => {
            let cols = config.model.input_len(0);
            let fp_k = (ceil_bits(profile.cond(X, Y)? + sigma) + margins.k).min(cols);
            let info = floor_bits(profile.mutual(X, Y, PartySet::EMPTY)? - sigma);
            let material_len = info + margins.phase1;
            let extractor = ExtractorSpec::new(material_len, material_len.saturating_sub(margins.deficiency), eps)?;
            let targets = Targets { key_len: profile.mutual(X, Y, PartySet::EMPTY)?, comm: profile.cond(X, Y)? };
            Ok((SessionPlan::TwoPhase { fp_k, fp_rows: fp_k + e, cols, material_len, extractor }, targets))
        }
        Protocol::Omniscience => {
            let region = sw_constraints(&profile)?;
            let (co, tuple) = co_lp(&region)?;
            let kc = key_capacity(&profile)?;
            let widths: Vec<usize> = (0..profile.ell()).map(|i| config.model.input_len(i)).collect();
            let rates: Vec<usize> = tuple.ceil_bits().iter().zip(&widths).map(|(&r, &w)| r.min(w)).collect();
            let fp_rows = rates.iter().map(|r| r + e).collect();
            let material_len = floor_bits(kc) + margins.phase1;
            let extractor = ExtractorSpec::new(material_len, material_len.saturating_sub(margins.deficiency), eps)?;
            let targets = Targets { key_len: kc, comm: co };
            Ok((SessionPlan::Omniscience { rates, fp_rows, widths, material_len, extractor }, targets))
        }
        Protocol::Syndrome => {
            let CorrelationModel::HammingPair { n, t } = config.model else { unreachable!("validated") };
            let code = match config.syndrome_rows {
                None if t == 1 && (n + 1).is_power_of_two() => CodeChoice::Hamming((n + 1).trailing_zeros() as usize),
                Some(rows) => CodeChoice::Random { rows: rows.min(n) },
                None => {
                    let rows = (binary_entropy(t as f64 / n as f64) * n as f64).ceil() as usize + 4;
                    CodeChoice::Random { rows: rows.min(n) }
                }
            };
            let rows = match code {
                CodeChoice::Hamming(r) => r,
                CodeChoice::Random { rows } => rows,
            };
            let extractor = ExtractorSpec::new(n, n - rows, eps)?;
            let targets = Targets { key_len: profile.mutual(X, Y, PartySet::EMPTY)?, comm: profile.cond(X, Y)? };
            Ok((SessionPlan::Syndrome { code, radius: t, extractor }, targets))
        }
    }
}

/// One party's result after the public discussion.
#[derive(Clone, Debug)]
pub struct PartyFinish {
    pub key: BitVec,
    pub status: DecodeStatus,
    /// Shared key material before extraction, when the protocol has any.
    pub material: Option<BitVec>,
}

impl PartyFinish {
    fn failed(status: DecodeStatus) -> Self {
        PartyFinish { key: BitVec::zeros(0), status, material: None }
    }
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub keys: Vec<BitVec>,
    pub transcript: Transcript,
    pub agreed: bool,
    pub key_len: usize,
    /// Total payload bits on the channel.
    pub comm_bits: usize,
    /// Payload bits of reconciliation messages (fingerprints or syndromes), seeds excluded.
    pub message_bits: usize,
    pub target_key_len: Rational,
    pub target_comm: Rational,
    /// The first non-unique decode among the parties, else `Unique`.
    pub decode_status: DecodeStatus,
    pub inputs: Vec<BitVec>,
    pub material: Vec<BitVec>,
}

impl SessionOutcome {
    /// True if no input, key material or key appears verbatim on the channel.
    pub fn transcript_excludes_secrets(&self) -> bool {
        self.inputs.iter().chain(&self.material).chain(&self.keys).all(|s| !self.transcript.carries_verbatim(s))
    }
}

/// Record kinds that count as reconciliation messages.
pub const MESSAGE_KINDS: [&str; 2] = ["fingerprint", "syndrome"];

fn toeplitz(seed: &BitVec, rows: usize, cols: usize) -> Result<LinearHash> {
    Ok(LinearHash::new(&Gf2Matrix::toeplitz_from_seed(seed, rows, cols)?))
}

fn code_matrix(code: &CodeChoice, n: usize, transcript: &Transcript) -> Result<Gf2Matrix> {
    match code {
        CodeChoice::Hamming(r) => hamming_parity_check(*r),
        CodeChoice::Random { rows } => Gf2Matrix::dense_from_seed(transcript.find(0, "code-seed")?, *rows, n),
    }
}

fn send(config: &SessionConfig, plan: &SessionPlan, inputs: &[BitVec], ch: &mut Channel) -> Result<()> {
    let x = &inputs[0];
    match plan {
        SessionPlan::Light { fp_rows, key_rows, cols } => {
            let seed = BitVec::random(MatrixKind::Toeplitz.seed_len(fp_rows + key_rows, *cols), &mut config.coin_stream(0, "hash"));
            let h = Gf2Matrix::toeplitz_from_seed(&seed, fp_rows + key_rows, *cols)?;
            let q = h.row_band(0, *fp_rows).matvec(x)?;
            ch.broadcast(0, "hash-seed", seed)?;
            ch.broadcast(0, "fingerprint", q)?;
        }
        SessionPlan::TwoPhase { fp_k, cols, material_len, extractor, .. } => {
            let fp = crate::reconcile::encode(x, *fp_k, config.eps, &mut config.coin_stream(0, "fingerprint"))?;
            fp.check()?;
            let r = BitVec::random(MatrixKind::Toeplitz.seed_len(*material_len, *cols), &mut config.coin_stream(0, "key-hash"));
            let s = extractor.random_seed(&mut config.coin_stream(0, "extractor"));
            ch.broadcast(0, "fingerprint-seed", fp.spec.seed)?;
            ch.broadcast(0, "fingerprint", fp.value)?;
            ch.broadcast(0, "key-hash-seed", r)?;
            ch.broadcast(0, "extractor-seed", s)?;
        }
        SessionPlan::Omniscience { rates, widths, material_len, extractor, .. } => {
            for (i, xi) in inputs.iter().enumerate() {
                let fp = crate::reconcile::encode(xi, rates[i], config.eps, &mut config.coin_stream(i, "fingerprint"))?;
                fp.check()?;
                ch.broadcast(i, "fingerprint-seed", fp.spec.seed)?;
                ch.broadcast(i, "fingerprint", fp.value)?;
            }
            let total: usize = widths.iter().sum();
            let r = BitVec::random(MatrixKind::Toeplitz.seed_len(*material_len, total), &mut config.coin_stream(0, "key-hash"));
            let s = extractor.random_seed(&mut config.coin_stream(0, "extractor"));
            ch.broadcast(0, "key-hash-seed", r)?;
            ch.broadcast(0, "extractor-seed", s)?;
        }
        SessionPlan::Syndrome { code, extractor, .. } => {
            let n = x.len();
            if let CodeChoice::Random { rows } = code {
                let seed = BitVec::random(rows * n, &mut config.coin_stream(0, "code"));
                ch.broadcast(0, "code-seed", seed)?;
            }
            let h = code_matrix(code, n, ch.transcript())?;
            let syn = crate::reconcile::syndrome_encode(x, &h)?;
            let s = extractor.random_seed(&mut config.coin_stream(0, "extractor"));
            ch.broadcast(0, "syndrome", syn)?;
            ch.broadcast(0, "extractor-seed", s)?;
        }
    }
    Ok(())
}

/// A party's post-discussion computation from its own input and the transcript alone.
pub fn finish(
    config: &SessionConfig,
    plan: &SessionPlan,
    party: usize,
    own: &BitVec,
    transcript: &Transcript,
) -> Result<PartyFinish> {
    ensure(own.len() == config.model.input_len(party), || format!("party {party} input has the wrong width"))?;
    match plan {
        SessionPlan::Light { fp_rows, key_rows, cols } => {
            let seed = transcript.find(0, "hash-seed")?;
            let h = Gf2Matrix::toeplitz_from_seed(seed, fp_rows + key_rows, *cols)?;
            let h2 = h.row_band(*fp_rows, *key_rows);
            let x = if party == 0 {
                own.clone()
            } else {
                let q = transcript.find(0, "fingerprint")?;
                let cands = enumerate_candidates(&config.model, party, own)?;
                let res = decode_with(&LinearHash::new(&h.row_band(0, *fp_rows)), q, &cands)?;
                match res.value {
                    Some(v) => v,
                    None => return Ok(PartyFinish::failed(res.status)),
                }
            };
            Ok(PartyFinish { key: h2.matvec(&x)?, status: DecodeStatus::Unique, material: None })
        }
        SessionPlan::TwoPhase { fp_k, fp_rows, cols, material_len, extractor } => {
            let x = if party == 0 {
                own.clone()
            } else {
                let spec = HashSpec::new(MatrixKind::Toeplitz, *fp_rows, *cols, transcript.find(0, "fingerprint-seed")?.clone())?;
                let fp = Fingerprint {
                    spec,
                    value: transcript.find(0, "fingerprint")?.clone(),
                    declared_k: *fp_k,
                    eps: config.eps,
                };
                fp.check()?;
                let res = crate::reconcile::decode(&fp, &enumerate_candidates(&config.model, party, own)?)?;
                match res.value {
                    Some(v) => v,
                    None => return Ok(PartyFinish::failed(res.status)),
                }
            };
            let material = toeplitz(transcript.find(0, "key-hash-seed")?, *material_len, *cols)?.hash(&x)?;
            let key = extract(&material, extractor, transcript.find(0, "extractor-seed")?)?;
            Ok(PartyFinish { key, status: DecodeStatus::Unique, material: Some(material) })
        }
        SessionPlan::Omniscience { rates, fp_rows, widths, material_len, extractor } => {
            let fps = (0..widths.len())
                .map(|j| {
                    let spec = HashSpec::new(MatrixKind::Toeplitz, fp_rows[j], widths[j], transcript.find(j, "fingerprint-seed")?.clone())?;
                    let fp = Fingerprint { spec, value: transcript.find(j, "fingerprint")?.clone(), declared_k: rates[j], eps: config.eps };
                    fp.check()?;
                    Ok(fp)
                })
                .collect::<Result<Vec<_>>>()?;
            let joint = joint_candidates(&config.model, party, own)?;
            let res = multi_decode(own, party, &fps, &joint)?;
            let Some(tuple) = res.value else { return Ok(PartyFinish::failed(res.status)) };
            let all = BitVec::concat_all(tuple.iter());
            let material = toeplitz(transcript.find(0, "key-hash-seed")?, *material_len, all.len())?.hash(&all)?;
            let key = extract(&material, extractor, transcript.find(0, "extractor-seed")?)?;
            Ok(PartyFinish { key, status: DecodeStatus::Unique, material: Some(material) })
        }
        SessionPlan::Syndrome { code, radius, extractor } => {
            let n = own.len();
            let x = if party == 0 {
                own.clone()
            } else {
                let h = code_matrix(code, n, transcript)?;
                let res = syndrome_decode(own, transcript.find(0, "syndrome")?, &h, *radius)?;
                match res.value {
                    Some(v) => v,
                    None => return Ok(PartyFinish::failed(res.status)),
                }
            };
            let key = extract(&x, extractor, transcript.find(0, "extractor-seed")?)?;
            Ok(PartyFinish { key, status: DecodeStatus::Unique, material: None })
        }
    }
}

/// Recomputes `party`'s key from its input and a transcript.
pub fn replay_party(config: &SessionConfig, party: usize, own: &BitVec, transcript: &Transcript) -> Result<BitVec> {
    let (plan, _) = plan(config)?;
    Ok(finish(config, &plan, party, own, transcript)?.key)
}

/// Samples inputs from the session's input stream and runs the protocol.
pub fn run_session(config: &SessionConfig) -> Result<SessionOutcome> {
    run_session_on(config, run_session_inputs(config)?)
}

/// The inputs [`run_session`] would draw for this configuration.
pub fn run_session_inputs(config: &SessionConfig) -> Result<Vec<BitVec>> {
    Ok(sample(&config.model, &mut config.input_stream())?.inputs)
}

/// Runs the configured protocol on explicit inputs.
pub fn run_session_on(config: &SessionConfig, inputs: Vec<BitVec>) -> Result<SessionOutcome> {
    let (plan, targets) = plan(config)?;
    run_planned(config, &plan, &targets, inputs)
}

/// [`run_session_on`] with a precomputed plan, for tight trial loops.
pub fn run_planned(config: &SessionConfig, plan: &SessionPlan, targets: &Targets, inputs: Vec<BitVec>) -> Result<SessionOutcome> {
    let arity = config.model.arity();
    ensure(inputs.len() == arity, || format!("{} inputs for {arity} parties", inputs.len()))?;
    let mut ch = Channel::new(arity);
    send(config, plan, &inputs, &mut ch)?;
    let alice = finish(config, plan, 0, &inputs[0], ch.transcript())?;
    if config.leak_key_canary {
        ch.broadcast(0, "canary", alice.key.clone())?;
    }
    let mut results = vec![alice];
    for (p, input) in inputs.iter().enumerate().skip(1) {
        let own_view = ch.transcript().clone();
        results.push(finish(config, plan, p, input, &own_view)?);
    }
    let transcript = ch.close();
    let decode_status = results.iter().map(|r| r.status).find(|s| *s != DecodeStatus::Unique).unwrap_or(DecodeStatus::Unique);
    let keys: Vec<BitVec> = results.iter().map(|r| r.key.clone()).collect();
    let agreed = decode_status == DecodeStatus::Unique && keys.iter().all(|k| *k == keys[0]);
    let key_len = check_accounting(plan, &results, &transcript)?;
    Ok(SessionOutcome {
        agreed,
        key_len,
        comm_bits: transcript.total_bits(),
        message_bits: MESSAGE_KINDS.iter().map(|k| transcript.bits_of_kind(k)).sum(),
        target_key_len: targets.key_len,
        target_comm: targets.comm,
        decode_status,
        material: results.iter().filter_map(|r| r.material.clone()).collect(),
        keys,
        transcript,
        inputs,
    })
}

/// The closed-form lengths every session must hit exactly; returns the key length.
fn check_accounting(plan: &SessionPlan, results: &[PartyFinish], t: &Transcript) -> Result<usize> {
    let (want_key, want_msg) = match plan {
        SessionPlan::Light { fp_rows, key_rows, .. } => (*key_rows, *fp_rows),
        SessionPlan::TwoPhase { fp_rows, extractor, .. } => (extractor.output_len, *fp_rows),
        SessionPlan::Omniscience { fp_rows, extractor, .. } => (extractor.output_len, fp_rows.iter().sum()),
        SessionPlan::Syndrome { extractor, .. } => (extractor.output_len, extractor.input_len - extractor.min_entropy),
    };
    let msg: usize = MESSAGE_KINDS.iter().map(|k| t.bits_of_kind(k)).sum();
    let bad_key = results.iter().find(|r| r.status == DecodeStatus::Unique && r.key.len() != want_key);
    if bad_key.is_some() || msg != want_msg {
        return Err(Error::Internal(format!("accounting mismatch: message {msg} bits (want {want_msg}), key length {want_key} not met")));
    }
    Ok(want_key)
}

fn expect_protocol(config: &SessionConfig, p: Protocol) -> Result<()> {
    ensure(config.protocol == p, || format!("configuration is for {}, not {p}", config.protocol))
}

pub fn run_light(config: &SessionConfig) -> Result<SessionOutcome> {
    expect_protocol(config, Protocol::Light)?;
    run_session(config)
}

pub fn run_two_phase(config: &SessionConfig) -> Result<SessionOutcome> {
    expect_protocol(config, Protocol::TwoPhase)?;
    run_session(config)
}

pub fn run_omniscience(config: &SessionConfig) -> Result<SessionOutcome> {
    expect_protocol(config, Protocol::Omniscience)?;
    run_session(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(model: &str, protocol: Protocol, eps: Eps) -> SessionConfig {
        SessionConfig::new(model.parse().unwrap(), protocol, eps, 42)
    }

    #[test]
    fn standard_margins() {
        let m = Margins::standard(16, Eps::pow2(4).unwrap());
        assert_eq!(m, Margins { k: 16, phase1: 8, deficiency: 8 });
        assert_eq!(Margins::standard(12, Eps::pow2(3).unwrap()).k, 15);
    }

    #[test]
    fn light_line_point_lengths() {
        let c = cfg("line-point:n=16", Protocol::Light, Eps::pow2(8).unwrap());
        let out = run_light(&c).unwrap();
        assert_eq!(out.key_len, 16);
        assert_eq!(out.message_bits, 24);
        assert_eq!(out.comm_bits, 24 + (40 + 32 - 1));
        assert!(out.agreed);
        assert_eq!(out.target_key_len, Rational::from_integer(16));
    }

    #[test]
    fn light_identical_has_empty_fingerprint() {
        let c = cfg("identical:n=16", Protocol::Light, Eps::pow2(8).unwrap());
        let out = run_session(&c).unwrap();
        assert_eq!(out.key_len, 16);
        assert_eq!(out.transcript.find(0, "fingerprint").unwrap().len(), 0);
        assert!(out.agreed);
    }

    #[test]
    fn two_phase_lengths() {
        let c = cfg("line-point:n=16", Protocol::TwoPhase, Eps::pow2(4).unwrap());
        let out = run_two_phase(&c).unwrap();
        assert_eq!(out.key_len, 16 + 8 - 8 - 8);
        assert!(out.agreed);
        let id = cfg("identical:n=16", Protocol::TwoPhase, Eps::pow2(4).unwrap());
        let (p, _) = plan(&id).unwrap();
        assert!(matches!(p, SessionPlan::TwoPhase { fp_k: 16, .. }));
    }

    #[test]
    fn omniscience_triple() {
        let mut c = cfg("triple:n=16", Protocol::Omniscience, Eps::pow2(6).unwrap());
        c.margins = Some(Margins { deficiency: 0, ..c.margins() });
        let (p, t) = plan(&c).unwrap();
        let SessionPlan::Omniscience { rates, extractor, .. } = &p else { panic!() };
        assert_eq!(rates, &vec![24, 24, 24]);
        assert_eq!(t.key_len, Rational::from_integer(8));
        assert_eq!(extractor.output_len, 8 + 10 - 12);
        let out = run_omniscience(&c).unwrap();
        assert!(out.agreed);
        assert_eq!(out.message_bits, 3 * 30);
        // standard margins leave no room for a key at this size
        assert!(matches!(plan(&cfg("triple:n=16", Protocol::Omniscience, Eps::pow2(6).unwrap())), Err(Error::Config(_))));
    }

    #[test]
    fn syndrome_hamming_code() {
        let c = cfg("hamming:n=31,t=1", Protocol::Syndrome, Eps::pow2(3).unwrap());
        let out = run_session(&c).unwrap();
        assert!(out.agreed);
        assert_eq!(out.message_bits, 5);
        assert_eq!(out.key_len, 31 - 5 - 6);
        let r = cfg("hamming:n=24,t=2", Protocol::Syndrome, Eps::pow2(3).unwrap());
        let (p, _) = plan(&r).unwrap();
        assert!(matches!(p, SessionPlan::Syndrome { code: CodeChoice::Random { rows: 14 }, .. }));
    }

    #[test]
    fn incompatible_models_are_rejected() {
        assert!(plan(&cfg("triple:n=8", Protocol::Light, Eps::pow2(3).unwrap())).is_err());
        assert!(plan(&cfg("line-point:n=8", Protocol::Omniscience, Eps::pow2(3).unwrap())).is_err());
        assert!(plan(&cfg("line-point:n=8", Protocol::Syndrome, Eps::pow2(3).unwrap())).is_err());
        assert!(run_light(&cfg("line-point:n=8", Protocol::TwoPhase, Eps::pow2(3).unwrap())).is_err());
    }

    #[test]
    fn transcripts_suffice_to_replay_every_party() {
        let mut cases = vec![
            cfg("line-point:n=10", Protocol::Light, Eps::pow2(6).unwrap()),
            cfg("line-point:n=10", Protocol::TwoPhase, Eps::pow2(3).unwrap()),
            cfg("hamming:n=24,t=2", Protocol::Syndrome, Eps::pow2(2).unwrap()),
        ];
        let mut omni = cfg("triple:n=10", Protocol::Omniscience, Eps::pow2(3).unwrap());
        omni.margins = Some(Margins { deficiency: 0, ..omni.margins() });
        cases.push(omni);
        for c in cases {
            for s in 0..5 {
                let c = c.with_session(s);
                let out = run_session(&c).unwrap();
                let dumped = Transcript::parse_dump(&out.transcript.dump()).unwrap();
                for (p, x) in out.inputs.iter().enumerate() {
                    assert_eq!(replay_party(&c, p, x, &dumped).unwrap(), out.keys[p], "{} party {p}", c.protocol);
                }
            }
        }
    }

    #[test]
    fn sessions_replay_under_fixed_seed() {
        let c = cfg("line-point:n=12", Protocol::TwoPhase, Eps::pow2(3).unwrap()).with_session(7);
        let a = run_session(&c).unwrap();
        let b = run_session(&c).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.keys, b.keys);
    }

    #[test]
    fn tampered_fingerprint_breaks_agreement() {
        let mut c = cfg("triple:n=8", Protocol::Omniscience, Eps::pow2(3).unwrap());
        c.margins = Some(Margins { deficiency: 0, ..c.margins() });
        let (p, _) = plan(&c).unwrap();
        let out = run_session(&c).unwrap();
        let mut records = out.transcript.dump();
        // flip one bit of party 1's fingerprint
        let line = records.lines().find(|l| l.starts_with("0,1,fingerprint,")).unwrap().to_string();
        let rec = Transcript::parse_dump(&line).unwrap().records()[0].clone();
        let mut flipped = rec.payload.clone();
        flipped.flip(0);
        records = records.replace(&line, &format!("0,1,fingerprint,{}", flipped.to_len_hex()));
        let tampered = Transcript::parse_dump(&records).unwrap();
        let res = finish(&c, &p, 0, &out.inputs[0], &tampered).unwrap();
        assert_ne!(res.status, DecodeStatus::Unique);
    }

    #[test]
    fn canary_puts_the_key_on_the_channel() {
        let mut c = cfg("line-point:n=8", Protocol::Light, Eps::pow2(3).unwrap());
        c.leak_key_canary = true;
        let out = run_session(&c).unwrap();
        assert_eq!(out.transcript.find(0, "canary").unwrap(), &out.keys[0]);
        assert!(!out.transcript_excludes_secrets());
    }
}
