use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// A rectangular, column-labelled numeric table stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::NonFinite {
                    table: self.name.clone(),
                    column: self.columns[j].clone(),
                    row: i,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub scalars: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
}

impl Results {
    pub fn scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn label(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.labels.insert(name.into(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// The tables as emitted in CSV form: every table, then the scalars as a
    /// one-row table named `scalars`.
    pub fn csv_tables(&self) -> Vec<Table> {
        let mut out = self.tables.clone();
        if !self.scalars.is_empty() {
            out.push(Table {
                name: "scalars".into(),
                columns: self.scalars.keys().cloned().collect(),
                rows: vec![self.scalars.values().copied().collect()],
            });
        }
        out
    }

    fn check_finite(&self) -> Result<()> {
        for (k, v) in &self.scalars {
            if !v.is_finite() {
                return Err(CliError::NonFinite {
                    table: "scalars".into(),
                    column: k.clone(),
                    row: 0,
                });
            }
        }
        for t in &self.tables {
            t.check_finite()?;
        }
        for p in &self.sweep {
            if let Some(r) = &p.report {
                r.results.check_finite()?;
            }
        }
        Ok(())
    }
}

/// Outcome of one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub status: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub results: Results,
    pub warnings: Vec<String>,
    pub status: u8,
}

impl RunReport {
    pub fn new(config: RunConfig, results: Results, warnings: Vec<String>) -> Result<Self> {
        results.check_finite()?;
        let status = results.sweep.iter().map(|p| p.status).max().unwrap_or(0);
        Ok(RunReport {
            config,
            results,
            warnings,
            status,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Serialize(e.to_string()))
    }
}
