//! JSON files for instances, ratio tables and allocations.
//!
//! Tables are stored per agent: `entries[i][p]` is agent `i`'s entry at the
//! profile with canonical index `p`. Rationals are `"p/q"` strings; plain
//! integers are accepted on input.

use crate::model::{values_from_ratios, AllocationRule, Dims, Instance, Mode, ModelError, Ratios};
use crate::payments::PaymentRule;
use crate::rational::{serde_q, Q};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected {expected} rows, got {got}")]
    Rows { expected: usize, got: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Good,
    Chore,
    Ratios,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub k: usize,
    pub mode: TableKind,
    #[serde(with = "serde_q::nested")]
    pub entries: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationFile {
    pub n: usize,
    pub k: usize,
    #[serde(with = "serde_q::nested")]
    pub allocation: Vec<Vec<Q>>,
}

fn flatten(dims: Dims, rows: &[Vec<Q>]) -> Result<Vec<Q>, IoError> {
    let (n, profiles) = (dims.n(), dims.profiles());
    if rows.len() != n {
        return Err(IoError::Rows {
            expected: n,
            got: rows.len(),
        });
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != profiles {
            return Err(IoError::RowLength {
                row,
                expected: profiles,
                got: r.len(),
            });
        }
    }
    Ok((0..profiles)
        .flat_map(|p| rows.iter().map(move |r| r[p].clone()))
        .collect())
}

fn per_agent(dims: Dims, flat: &[Q]) -> Vec<Vec<Q>> {
    let n = dims.n();
    (0..n)
        .map(|i| (0..dims.profiles()).map(|p| flat[p * n + i].clone()).collect())
        .collect()
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let dims = inst.dims();
        Self {
            n: dims.n(),
            k: dims.k(),
            mode: match inst.mode() {
                Mode::Good => TableKind::Good,
                Mode::Chore => TableKind::Chore,
            },
            entries: per_agent(dims, inst.table()),
        }
    }

    pub fn from_ratios(rho: &Ratios) -> Self {
        let dims = rho.dims();
        Self {
            n: dims.n(),
            k: dims.k(),
            mode: TableKind::Ratios,
            entries: per_agent(dims, rho.as_slice()),
        }
    }

    /// Ratio tables become strictly increasing good instances.
    pub fn to_instance(&self) -> Result<Instance, IoError> {
        let dims = Dims::new(self.n, self.k)?;
        let table = flatten(dims, &self.entries)?;
        Ok(match self.mode {
            TableKind::Good => Instance::new(dims, Mode::Good, table)?,
            TableKind::Chore => Instance::new(dims, Mode::Chore, table)?,
            TableKind::Ratios => values_from_ratios(&Ratios::new(dims, table)?, Mode::Good),
        })
    }
}

impl AllocationFile {
    pub fn from_rule(x: &AllocationRule) -> Self {
        let dims = x.dims();
        Self {
            n: dims.n(),
            k: dims.k(),
            allocation: per_agent(dims, x.as_slice()),
        }
    }

    pub fn to_rule(&self) -> Result<AllocationRule, IoError> {
        let dims = Dims::new(self.n, self.k)?;
        Ok(AllocationRule::new(dims, flatten(dims, &self.allocation)?)?)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    serde_json::from_str::<InstanceFile>(text)?.to_instance()
}

pub fn parse_allocation(text: &str) -> Result<AllocationRule, IoError> {
    serde_json::from_str::<AllocationFile>(text)?.to_rule()
}

pub fn instance_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("plain data serializes")
}

pub fn ratios_json(rho: &Ratios) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_ratios(rho)).expect("plain data serializes")
}

pub fn allocation_file_json(x: &AllocationRule) -> String {
    serde_json::to_string_pretty(&AllocationFile::from_rule(x)).expect("plain data serializes")
}

/// Per-agent payment rows in the same layout as instance entries.
pub fn payments_rows(pay: &PaymentRule) -> Vec<Vec<String>> {
    per_agent(pay.dims(), pay.as_slice())
        .iter()
        .map(|r| r.iter().map(crate::rational::fmt_q).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::fixtures::{fig5_pair, fig5_ratios, intro_chore};
    use crate::model::ratios_from_values;
    use crate::rational::q;

    #[test]
    fn instance_round_trip() {
        for inst in [fig5_pair(), intro_chore()] {
            let text = instance_json(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst);
        }
    }

    #[test]
    fn ratios_mode_rebuilds_values() {
        let rho = fig5_ratios();
        let inst = parse_instance(&ratios_json(&rho)).unwrap();
        assert_eq!(ratios_from_values(&inst), rho);
        assert_eq!(inst.mode(), Mode::Good);
    }

    #[test]
    fn integers_are_accepted() {
        let inst = parse_instance(r#"{"n":2,"k":2,"mode":"good","entries":[[1,2,"3/2",4],[5,6,7,"8"]]}"#).unwrap();
        assert_eq!(*inst.entry(0, 2), q(3, 2));
        assert_eq!(*inst.entry(1, 3), q(8, 1));
    }

    #[test]
    fn shape_errors() {
        let bad_rows = r#"{"n":2,"k":2,"mode":"good","entries":[[1,2,3,4]]}"#;
        assert!(matches!(parse_instance(bad_rows), Err(IoError::Rows { expected: 2, got: 1 })));
        let bad_len = r#"{"n":2,"k":2,"mode":"good","entries":[[1,2,3,4],[1,2]]}"#;
        assert!(matches!(parse_instance(bad_len), Err(IoError::RowLength { row: 1, .. })));
        let bad_q = r#"{"n":1,"k":1,"mode":"good","entries":[["x"]]}"#;
        assert!(matches!(parse_instance(bad_q), Err(IoError::Json(_))));
        let zero = r#"{"n":1,"k":1,"mode":"chore","entries":[[0]]}"#;
        assert!(matches!(parse_instance(zero), Err(IoError::Model(_))));
    }

    #[test]
    fn allocation_round_trip() {
        let x = AllocationRule::uniform(Dims::new(2, 3).unwrap());
        assert_eq!(parse_allocation(&allocation_file_json(&x)).unwrap(), x);
    }
}
