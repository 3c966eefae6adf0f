//! The subject x risk-factor table: six categorical and six continuous
//! factors with missingness and dev/val split labels.

use crate::raster::Eye;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// The twelve risk factors, categorical first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    Sex,
    Sleeplessness,
    Smoking,
    Alcohol,
    Depression,
    Economic,
    Age,
    Education,
    Bmi,
    Dbp,
    Sbp,
    Hba1c,
}

impl Factor {
    pub const ALL: [Factor; 12] = [
        Factor::Sex,
        Factor::Sleeplessness,
        Factor::Smoking,
        Factor::Alcohol,
        Factor::Depression,
        Factor::Economic,
        Factor::Age,
        Factor::Education,
        Factor::Bmi,
        Factor::Dbp,
        Factor::Sbp,
        Factor::Hba1c,
    ];
    pub const CATEGORICAL: [Factor; 6] = [
        Factor::Sex,
        Factor::Sleeplessness,
        Factor::Smoking,
        Factor::Alcohol,
        Factor::Depression,
        Factor::Economic,
    ];
    pub const CONTINUOUS: [Factor; 6] = [
        Factor::Age,
        Factor::Education,
        Factor::Bmi,
        Factor::Dbp,
        Factor::Sbp,
        Factor::Hba1c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Sex => "sex",
            Factor::Sleeplessness => "sleeplessness",
            Factor::Smoking => "smoking",
            Factor::Alcohol => "alcohol",
            Factor::Depression => "depression",
            Factor::Economic => "economic",
            Factor::Age => "age",
            Factor::Education => "education",
            Factor::Bmi => "bmi",
            Factor::Dbp => "dbp",
            Factor::Sbp => "sbp",
            Factor::Hba1c => "hba1c",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Factor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown factor '{s}'")))
    }

    pub fn is_categorical(self) -> bool {
        (self as usize) < 6
    }

    /// Declared level set for categorical factors; empty for continuous.
    pub fn levels(self) -> &'static [&'static str] {
        match self {
            Factor::Sex => &["F", "M"],
            Factor::Sleeplessness => &["never_rarely", "sometimes", "usually"],
            Factor::Smoking => &["never", "smoked"],
            Factor::Alcohol => &["low", "moderate", "excessive"],
            Factor::Depression => &["negative", "positive"],
            Factor::Economic => &["low", "middle", "high"],
            _ => &[],
        }
    }

    /// Index within the categorical or continuous block.
    pub fn block_index(self) -> usize {
        (self as usize) % 6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Dev,
    Val,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Val => "val",
        }
    }
}

/// One (subject, eye) observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortRow {
    pub subject_id: String,
    pub eye: Eye,
    /// Level index per categorical factor, `None` = missing.
    pub categorical: [Option<u8>; 6],
    /// Value per continuous factor, `None` = missing.
    pub continuous: [Option<f64>; 6],
    pub split: Option<Split>,
}

impl CohortRow {
    pub fn categorical_value(&self, f: Factor) -> Option<u8> {
        debug_assert!(f.is_categorical());
        self.categorical[f.block_index()]
    }

    pub fn continuous_value(&self, f: Factor) -> Option<f64> {
        debug_assert!(!f.is_categorical());
        self.continuous[f.block_index()]
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CohortTable {
    pub rows: Vec<CohortRow>,
}

impl CohortTable {
    pub fn csv_header() -> Vec<&'static str> {
        let mut cols = vec!["subject_id", "eye"];
        cols.extend(Factor::ALL.iter().map(|f| f.name()));
        cols.push("split");
        cols
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(false)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expect = Self::csv_header();
        if headers.iter().ne(expect.iter().copied()) {
            return Err(Error::InvalidInput(format!(
                "cohort header mismatch: got [{}]",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let get = |i: usize| record.get(i).unwrap_or("").trim();
            let mut categorical = [None; 6];
            let mut continuous = [None; 6];
            for (fi, factor) in Factor::ALL.iter().enumerate() {
                let cell = get(2 + fi);
                if cell.is_empty() {
                    continue;
                }
                if factor.is_categorical() {
                    let idx = factor
                        .levels()
                        .iter()
                        .position(|&l| l == cell)
                        .ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "bad level '{cell}' for factor {}",
                                factor.name()
                            ))
                        })?;
                    categorical[factor.block_index()] = Some(idx as u8);
                } else {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::InvalidInput(format!(
                            "bad numeric '{cell}' for factor {}",
                            factor.name()
                        ))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "non-finite value for {}",
                            factor.name()
                        )));
                    }
                    continuous[factor.block_index()] = Some(v);
                }
            }
            let split = match get(14) {
                "" => None,
                "dev" => Some(Split::Dev),
                "val" => Some(Split::Val),
                other => {
                    return Err(Error::InvalidInput(format!("bad split label '{other}'")))
                }
            };
            rows.push(CohortRow {
                subject_id: get(0).to_string(),
                eye: Eye::parse(get(1))?,
                categorical,
                continuous,
                split,
            });
        }
        Ok(Self { rows })
    }

    /// Write rows; `preamble` lines are emitted as `#` comments first.
    pub fn write_csv<W: Write>(&self, mut writer: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(writer, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::csv_header())?;
        for row in &self.rows {
            let mut record = vec![row.subject_id.clone(), row.eye.name().to_string()];
            for factor in Factor::ALL {
                let cell = if factor.is_categorical() {
                    row.categorical[factor.block_index()]
                        .map(|i| factor.levels()[i as usize].to_string())
                        .unwrap_or_default()
                } else {
                    row.continuous[factor.block_index()]
                        .map(|v| format!("{v}"))
                        .unwrap_or_default()
                };
                record.push(cell);
            }
            record.push(row.split.map(|s| s.name().to_string()).unwrap_or_default());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Unique subject ids in first-appearance order.
    pub fn subjects(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for row in &self.rows {
            if seen.insert(row.subject_id.clone()) {
                out.push(row.subject_id.clone());
            }
        }
        out
    }
}
