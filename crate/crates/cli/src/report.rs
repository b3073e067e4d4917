//! JSON run reports. Field order and map order are fixed so that equal runs
//! produce equal bytes.

use std::collections::BTreeMap;
use std::path::Path;

use catacode_core::meter::MeterReport;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize)]
pub struct LayoutParams {
    pub blocks: usize,
    pub k: u32,
    pub plain: usize,
    pub extra_len: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Params {
    pub c: Option<usize>,
    pub e: Option<usize>,
    pub r: Option<u32>,
    pub delta: Option<usize>,
    pub layout: Option<LayoutParams>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub params: Params,
    pub output: Option<bool>,
    pub steps: Option<u64>,
    pub hamming_distance: Option<usize>,
    /// `(symbol position, value in hex)`.
    pub support: Vec<(usize, String)>,
    pub meter: BTreeMap<String, u64>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.into(),
            params: Params::default(),
            output: None,
            steps: None,
            hamming_distance: None,
            support: Vec::new(),
            meter: BTreeMap::new(),
            seed: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn set_meter(&mut self, meter: &MeterReport) {
        self.meter.insert("peak".into(), meter.peak_bits);
        for (phase, peak) in &meter.phases {
            self.meter.insert(phase.clone(), *peak);
        }
    }

    pub fn set_support(&mut self, support: impl IntoIterator<Item = (usize, u32)>) {
        self.support = support.into_iter().map(|(pos, v)| (pos, format!("{v:#x}"))).collect();
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes to `path`, or prints when there is none.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => std::fs::write(p, self.to_json()).map_err(|e| CliError::io(p, e)),
            None => {
                print!("{}", self.to_json());
                Ok(())
            }
        }
    }
}
