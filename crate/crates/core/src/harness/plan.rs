//! Experiment plans: groups of session configurations run as batches of trials,
//! written as per-trial CSV files plus one summary CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{derive_seed, Exec};
use crate::hashext::Eps;
use crate::infoprofile::Rational;
use crate::protocols::{plan, run_planned, run_session_inputs, SessionConfig, SessionOutcome};
use crate::sources::CorrelationModel;

#[derive(Clone, Debug)]
pub struct PlanGroup {
    /// Used as the CSV file stem and to derive the group's seed.
    pub name: String,
    pub config: SessionConfig,
    pub trials: u64,
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub master_seed: u64,
    pub groups: Vec<PlanGroup>,
    pub out_dir: PathBuf,
}

/// Values to sweep; an empty axis keeps the base configuration's value.
#[derive(Clone, Debug, Default)]
pub struct SweepAxes {
    pub n: Vec<usize>,
    pub t: Vec<usize>,
    pub eps: Vec<Eps>,
    pub trials: u64,
}

/// `model` with `n` and (for Hamming pairs) `t` replaced.
pub fn reparameterize(model: CorrelationModel, n: Option<usize>, t: Option<usize>) -> Result<CorrelationModel> {
    let n = n.unwrap_or(model.n());
    let m = match model {
        CorrelationModel::LinePoint { .. } => CorrelationModel::LinePoint { n },
        CorrelationModel::CollinearTriple { .. } => CorrelationModel::CollinearTriple { n },
        CorrelationModel::IdenticalPair { .. } => CorrelationModel::IdenticalPair { n },
        CorrelationModel::HammingPair { t: t0, .. } => CorrelationModel::HammingPair { n, t: t.unwrap_or(t0) },
    };
    if t.is_some() && !matches!(m, CorrelationModel::HammingPair { .. }) {
        return Err(Error::Config(format!("cannot sweep t for {m}")));
    }
    m.validate()?;
    Ok(m)
}

fn group_name(c: &SessionConfig) -> String {
    let model: String = c.model.to_string().chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
    format!("{}_{}_eps{}-{}", c.protocol.as_str().replace('-', "_"), model, c.eps.num(), c.eps.den())
}

impl ExperimentPlan {
    pub fn new(master_seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan { master_seed, groups: Vec::new(), out_dir: out_dir.into() }
    }

    /// Adds one group whose seed is derived from the master seed and the group name.
    pub fn push(&mut self, mut config: SessionConfig, trials: u64) {
        let name = group_name(&config);
        config.seed = derive_seed(self.master_seed, &name);
        self.groups.push(PlanGroup { name, config, trials });
    }

    /// The Cartesian product of the axes around `base`.
    pub fn sweep(master_seed: u64, out_dir: impl Into<PathBuf>, base: &SessionConfig, axes: &SweepAxes) -> Result<Self> {
        let mut plan = ExperimentPlan::new(master_seed, out_dir);
        let opt = |v: &[usize]| -> Vec<Option<usize>> {
            if v.is_empty() { vec![None] } else { v.iter().copied().map(Some).collect() }
        };
        let epss = if axes.eps.is_empty() { vec![base.eps] } else { axes.eps.clone() };
        for n in opt(&axes.n) {
            for t in opt(&axes.t) {
                for &eps in &epss {
                    let mut c = base.clone();
                    c.model = reparameterize(base.model, n, t)?;
                    c.eps = eps;
                    plan.push(c, axes.trials);
                }
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::HashSet::new();
        for g in &self.groups {
            plan(&g.config)?;
            if !names.insert(&g.name) {
                return Err(Error::Config(format!("duplicate group {}", g.name)));
            }
        }
        Ok(())
    }
}

/// One CSV row per session.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TrialRow {
    pub trial: u64,
    pub agreed: bool,
    pub key_len: usize,
    pub comm_bits: usize,
    pub target_key_len: String,
    pub target_comm: String,
    pub decode_status: &'static str,
}

/// Fixed four-decimal rendering, so files are byte-identical across runs.
pub fn decimal(r: Rational) -> String {
    format!("{:.4}", *r.numer() as f64 / *r.denom() as f64)
}

impl TrialRow {
    pub fn from_outcome(trial: u64, o: &SessionOutcome) -> Self {
        TrialRow {
            trial,
            agreed: o.agreed,
            key_len: o.key_len,
            comm_bits: o.comm_bits,
            target_key_len: decimal(o.target_key_len),
            target_comm: decimal(o.target_comm),
            decode_status: o.decode_status.as_str(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GroupSummary {
    pub group: String,
    pub model: String,
    pub protocol: String,
    pub eps: String,
    pub trials: u64,
    pub agreement_rate: f64,
    pub key_len: usize,
    pub mean_comm_bits: f64,
    pub mean_message_bits: f64,
    pub target_key_len: String,
    pub target_comm: String,
}

/// Runs sessions `0..trials` of `config`.
pub fn run_trials(config: &SessionConfig, trials: u64, exec: Exec) -> Result<Vec<SessionOutcome>> {
    let (p, targets) = plan(config)?;
    exec.map(trials, |i| {
        let c = config.with_session(i);
        run_planned(&c, &p, &targets, run_session_inputs(&c)?)
    })
    .into_iter()
    .collect()
}

pub fn summarize(name: &str, config: &SessionConfig, outcomes: &[SessionOutcome]) -> Result<GroupSummary> {
    let (_, targets) = plan(config)?;
    let n = outcomes.len().max(1) as f64;
    let key_len = outcomes.first().map_or(0, |o| o.key_len);
    Ok(GroupSummary {
        group: name.to_string(),
        model: config.model.to_string(),
        protocol: config.protocol.to_string(),
        eps: format!("{}/{}", config.eps.num(), config.eps.den()),
        trials: outcomes.len() as u64,
        agreement_rate: outcomes.iter().filter(|o| o.agreed).count() as f64 / n,
        key_len,
        mean_comm_bits: outcomes.iter().map(|o| o.comm_bits as f64).sum::<f64>() / n,
        mean_message_bits: outcomes.iter().map(|o| o.message_bits as f64).sum::<f64>() / n,
        target_key_len: decimal(targets.key_len),
        target_comm: decimal(targets.comm),
    })
}

/// Serializes rows to a CSV file, creating parent directories.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug, Default)]
pub struct PlanOutput {
    pub files: Vec<PathBuf>,
    pub summaries: Vec<GroupSummary>,
}

/// Writes `<out_dir>/<group>.csv` per group and `<out_dir>/summary.csv`.
/// An empty plan writes nothing.
pub fn run_plan(plan: &ExperimentPlan, exec: Exec) -> Result<PlanOutput> {
    plan.validate()?;
    let mut out = PlanOutput::default();
    if plan.groups.is_empty() {
        return Ok(out);
    }
    for g in &plan.groups {
        let outcomes = run_trials(&g.config, g.trials, exec)?;
        let rows: Vec<TrialRow> = outcomes.iter().enumerate().map(|(i, o)| TrialRow::from_outcome(i as u64, o)).collect();
        let path = plan.out_dir.join(format!("{}.csv", g.name));
        write_csv(&path, &rows)?;
        out.files.push(path);
        out.summaries.push(summarize(&g.name, &g.config, &outcomes)?);
    }
    let path = plan.out_dir.join("summary.csv");
    write_csv(&path, &out.summaries)?;
    out.files.push(path);
    Ok(out)
}
