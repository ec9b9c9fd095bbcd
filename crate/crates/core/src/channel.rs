//! The public broadcast channel and its transcript.

use std::fmt::Write as _;

use crate::error::{ensure, Error, Result};
use crate::gf2::BitVec;

/// One public message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub round: usize,
    pub sender: usize,
    pub kind: String,
    pub payload: BitVec,
}

/// Everything ever said on the channel, in send order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sum of payload lengths.
    pub fn total_bits(&self) -> usize {
        self.records.iter().map(|r| r.payload.len()).sum()
    }

    pub fn bits_of_kind(&self, kind: &str) -> usize {
        self.records.iter().filter(|r| r.kind == kind).map(|r| r.payload.len()).sum()
    }

    /// The first record of `kind` sent by `sender`.
    pub fn find(&self, sender: usize, kind: &str) -> Result<&BitVec> {
        self.records
            .iter()
            .find(|r| r.sender == sender && r.kind == kind)
            .map(|r| &r.payload)
            .ok_or_else(|| Error::Contract(format!("transcript has no `{kind}` record from party {sender}")))
    }

    /// Every payload concatenated in send order.
    pub fn concatenated(&self) -> BitVec {
        BitVec::concat_all(self.records.iter().map(|r| &r.payload))
    }

    /// True if some record carries `secret` verbatim: a payload equal to it, or,
    /// for secrets of at least 32 bits, a payload containing it as a contiguous run.
    /// Shorter secrets are only compared whole since a short run appears by chance
    /// in any long random payload.
    pub fn carries_verbatim(&self, secret: &BitVec) -> bool {
        if secret.is_empty() {
            return false;
        }
        self.records.iter().any(|r| {
            r.payload == *secret
                || (secret.len() >= 32
                    && r.payload.len() >= secret.len()
                    && (0..=r.payload.len() - secret.len()).any(|s| r.payload.slice(s, secret.len()) == *secret))
        })
    }

    /// Lines `round,sender,kind,len:hex`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.round, r.sender, r.kind, r.payload.to_len_hex());
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |m: &str| Error::Parse(format!("transcript line {}: {m}", i + 1));
            let parts: Vec<&str> = line.trim().splitn(4, ',').collect();
            if parts.len() != 4 {
                return Err(bad("expected round,sender,kind,len:hex"));
            }
            records.push(Record {
                round: parts[0].parse().map_err(|_| bad("bad round"))?,
                sender: parts[1].parse().map_err(|_| bad("bad sender"))?,
                kind: parts[2].to_string(),
                payload: BitVec::parse_len_hex(parts[3])?,
            });
        }
        Ok(Transcript { records })
    }
}

/// A session-local broadcast channel between `parties` parties and a passive tap.
#[derive(Debug)]
pub struct Channel {
    parties: usize,
    round: usize,
    open: bool,
    transcript: Transcript,
    // indices into the transcript, so delivered copies are the records themselves
    inboxes: Vec<Vec<usize>>,
    tap: Vec<usize>,
}

impl Channel {
    pub fn new(parties: usize) -> Self {
        Channel { parties, round: 0, open: true, transcript: Transcript::default(), inboxes: vec![Vec::new(); parties], tap: Vec::new() }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn next_round(&mut self) {
        self.round += 1;
    }

    /// Appends the message and delivers it to every other party and to the tap.
    pub fn broadcast(&mut self, sender: usize, kind: &str, payload: BitVec) -> Result<()> {
        ensure(self.open, || "broadcast on a closed session".into())?;
        ensure(sender < self.parties, || format!("unknown sender {sender}"))?;
        ensure(!kind.is_empty() && !kind.contains([',', '\n']), || format!("bad record kind {kind:?}"))?;
        let idx = self.transcript.records.len();
        self.transcript.records.push(Record { round: self.round, sender, kind: kind.to_string(), payload });
        for (p, inbox) in self.inboxes.iter_mut().enumerate() {
            if p != sender {
                inbox.push(idx);
            }
        }
        self.tap.push(idx);
        Ok(())
    }

    /// Messages delivered to `party`.
    pub fn inbox(&self, party: usize) -> impl Iterator<Item = &Record> {
        self.inboxes[party].iter().map(|&i| &self.transcript.records[i])
    }

    /// The eavesdropper's copy.
    pub fn tap(&self) -> impl Iterator<Item = &Record> {
        self.tap.iter().map(|&i| &self.transcript.records[i])
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn close(&mut self) -> Transcript {
        self.open = false;
        self.transcript.clone()
    }
}
