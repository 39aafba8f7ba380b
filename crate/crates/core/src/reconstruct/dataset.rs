use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::clifford::{make_representation, GammaRep, RepKind};
use crate::error::{Error, Result};
use crate::linalg::CMat4;
use crate::lorentz::spinor_lift;
use crate::spinor::DiracSpinor;
use crate::tomography::{frame_set, marginals_with_lift, sample_shots_keyed, MarginalRecord, Protocol};

/// A marginal record tagged with the representation it was measured in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub rep_kind: RepKind,
    #[serde(flatten)]
    pub record: MarginalRecord,
}

/// All marginals collected by one run of a protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalDataset {
    pub protocol: Protocol,
    pub records: Vec<DatasetRecord>,
}

/// Exact probabilities, or multinomial estimates from `n` shots per frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotModel {
    Exact,
    Shots { n: u64, seed: u64, trial: u64 },
}

impl MarginalDataset {
    pub fn new(protocol: Protocol) -> Self {
        MarginalDataset { protocol, records: Vec::new() }
    }

    pub fn push(&mut self, rep_kind: RepKind, record: MarginalRecord) {
        self.records.push(DatasetRecord { rep_kind, record });
    }

    pub fn get(&self, rep_kind: RepKind, frame: &str) -> Result<&MarginalRecord> {
        self.records
            .iter()
            .find(|r| r.rep_kind == rep_kind && r.record.frame == frame)
            .map(|r| &r.record)
            .ok_or_else(|| Error::MissingFrame(format!("{rep_kind}:{frame}")))
    }

    pub fn get_mut(&mut self, rep_kind: RepKind, frame: &str) -> Result<&mut MarginalRecord> {
        self.records
            .iter_mut()
            .find(|r| r.rep_kind == rep_kind && r.record.frame == frame)
            .map(|r| &mut r.record)
            .ok_or_else(|| Error::MissingFrame(format!("{rep_kind}:{frame}")))
    }

    /// Drops every record for `frame` (all representations).
    pub fn without_frame(&self, frame: &str) -> Self {
        MarginalDataset {
            protocol: self.protocol,
            records: self.records.iter().filter(|r| r.record.frame != frame).cloned().collect(),
        }
    }

    /// Smallest shot count over the records, `None` if all are exact.
    pub fn shots(&self) -> Option<u64> {
        self.records.iter().filter_map(|r| r.record.shots).min()
    }

    pub fn is_exact(&self) -> bool {
        self.records.iter().all(|r| r.record.shots.is_none())
    }

    /// No duplicate `(rep, frame)` keys; discrete protocols carry exactly
    /// their frame set under each of their representations.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert((r.rep_kind, r.record.frame.as_str())) {
                return Err(Error::InconsistentInput(format!(
                    "duplicate record {}:{}",
                    r.rep_kind, r.record.frame
                )));
            }
        }
        if matches!(self.protocol, Protocol::DiscreteMajorana | Protocol::CombinedStChiral) {
            let frames = frame_set(self.protocol)?;
            for &kind in self.protocol.rep_kinds() {
                for f in &frames {
                    self.get(kind, &f.label)?;
                }
            }
            let expected = frames.len() * self.protocol.rep_kinds().len();
            if self.records.len() != expected {
                return Err(Error::InconsistentInput(format!(
                    "{} records, protocol expects {expected}",
                    self.records.len()
                )));
            }
        }
        Ok(())
    }

    /// CSV with columns `rep,frame,k,w,N`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["rep", "frame", "k", "w", "N"]).map_err(io)?;
        for r in &self.records {
            let n = r.record.shots.map(|n| n.to_string()).unwrap_or_default();
            for k in 0..4 {
                w.write_record([
                    r.rep_kind.as_str(),
                    r.record.frame.as_str(),
                    &(k + 1).to_string(),
                    &format!("{:.16e}", r.record.w[k]),
                    &n,
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Maps spinor components from representation `from` to `to`.
pub fn rep_transfer(from: &GammaRep, to: &GammaRep) -> CMat4 {
    to.change_of_basis() * from.change_of_basis().adjoint()
}

/// Simulates a protocol on `psi`, which is given in the protocol's primary
/// representation (Majorana, or standard for the combined protocol).
pub fn simulate_dataset(psi: &DiracSpinor, protocol: Protocol, shots: &ShotModel) -> Result<MarginalDataset> {
    if !psi.is_finite() {
        return Err(Error::InvalidInput("spinor has non-finite components".into()));
    }
    let primary = make_representation(protocol.primary_rep())?;
    let frames = frame_set(protocol)?;
    let mut data = MarginalDataset::new(protocol);
    for &kind in protocol.rep_kinds() {
        let rep = make_representation(kind)?;
        let local = psi.apply(&rep_transfer(&primary, &rep));
        for frame in &frames {
            let exact = marginals_with_lift(&local, &spinor_lift(frame, &rep)?);
            let record = match *shots {
                ShotModel::Exact => exact,
                ShotModel::Shots { n, seed, trial } => {
                    let key = format!("{kind}:{}", frame.label);
                    sample_shots_keyed(&exact, n, seed, &key, trial)?
                }
            };
            data.push(kind, record);
        }
    }
    Ok(data)
}
