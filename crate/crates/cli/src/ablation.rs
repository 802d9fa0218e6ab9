//! Collation of per-run ablation records into the length × (preset, frozen)
//! grid, rendered as markdown or CSV.
//!
//! A record file holds one JSON object, or an array of them:
//!
//! ```json
//! {"preset": "xsmall", "frozen_layers": 0, "input_length": 512, "test_f1": 98.33, "status": "ok"}
//! ```
//!
//! `status` defaults to `ok`; a `dash` record marks a run that did not reach a
//! usable result and renders as `-`, the same as a cell with no record.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use mgtd_core::scorer::INPUT_LENGTHS;
use mgtd_core::ModelPreset;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// A percentage held as an integer count of hundredths, so `97.32` is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(u32);

impl Percent {
    pub const MAX: Percent = Percent(10_000);

    pub fn from_hundredths(h: u32) -> Option<Self> {
        (h <= Self::MAX.0).then_some(Percent(h))
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn from_f64(value: f64) -> Result<Self, String> {
        if !value.is_finite() || !(0.0..=100.0).contains(&value) {
            return Err(format!("{value} is not a percentage in [0, 100]"));
        }
        let scaled = value * 100.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 {
            return Err(format!("{value} has more than two decimals"));
        }
        Ok(Percent(rounded as u32))
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Percent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("{s:?} is not a percentage with two decimals");
        let (whole, frac) = s.split_once('.').ok_or_else(bad)?;
        if whole.is_empty() || frac.len() != 2 || !(whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())) {
            return Err(bad());
        }
        let whole: u32 = whole.parse().map_err(|_| bad())?;
        let frac: u32 = frac.parse().map_err(|_| bad())?;
        whole.checked_mul(100).and_then(|w| Percent::from_hundredths(w + frac)).ok_or_else(bad)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Percent::from_f64(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    #[default]
    Ok,
    Dash,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRecord {
    #[serde(serialize_with = "ser_preset", deserialize_with = "de_preset")]
    pub preset: ModelPreset,
    pub frozen_layers: usize,
    pub input_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_f1: Option<Percent>,
    #[serde(default)]
    pub status: RunStatus,
}

fn ser_preset<S: Serializer>(p: &ModelPreset, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.name().to_ascii_lowercase())
}

fn de_preset<'de, D: Deserializer<'de>>(d: D) -> Result<ModelPreset, D::Error> {
    String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
}

impl AblationRecord {
    pub fn ok(preset: ModelPreset, frozen_layers: usize, input_length: usize, test_f1: Percent) -> Self {
        AblationRecord { preset, frozen_layers, input_length, test_f1: Some(test_f1), status: RunStatus::Ok }
    }

    pub fn dash(preset: ModelPreset, frozen_layers: usize, input_length: usize) -> Self {
        AblationRecord { preset, frozen_layers, input_length, test_f1: None, status: RunStatus::Dash }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.preset.frozen_options().any(|k| k == self.frozen_layers) {
            return Err(format!(
                "frozen_layers {} is not available for {} ({} layers)",
                self.frozen_layers,
                self.preset,
                self.preset.layers()
            ));
        }
        if !INPUT_LENGTHS.contains(&self.input_length) {
            return Err(format!("input_length {} is not one of {:?}", self.input_length, INPUT_LENGTHS));
        }
        if self.status == RunStatus::Ok && self.test_f1.is_none() {
            return Err("status ok requires test_f1".into());
        }
        Ok(())
    }

    fn cell(&self) -> Cell {
        match (self.status, self.test_f1) {
            (RunStatus::Ok, Some(v)) => Cell::Value(v),
            _ => Cell::Dash,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Missing,
    Dash,
    Value(Percent),
}

impl Cell {
    pub fn value(self) -> Option<Percent> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column {
    pub preset: ModelPreset,
    pub frozen_layers: usize,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.preset, self.frozen_layers)
    }
}

/// Every (preset, frozen) pair the grid has, in table order.
pub fn columns() -> Vec<Column> {
    ModelPreset::ALL
        .into_iter()
        .flat_map(|preset| preset.frozen_options().map(move |frozen_layers| Column { preset, frozen_layers }))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoldAxis {
    /// Best value of each (preset, frozen) column over input lengths.
    #[default]
    Column,
    /// Best value of each input-length row.
    Row,
    None,
}

impl FromStr for BoldAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "column" => Ok(BoldAxis::Column),
            "row" => Ok(BoldAxis::Row),
            "none" => Ok(BoldAxis::None),
            _ => Err(format!("unknown bold axis {s:?} (expected column, row or none)")),
        }
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("duplicate cell {input_length} input, {column}")]
    DuplicateCell { input_length: usize, column: Column },
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Cells keyed by (input length, column); absent keys are missing runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AblationGrid {
    cells: BTreeMap<(usize, Column), Cell>,
}

impl AblationGrid {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a AblationRecord>) -> Result<Self, GridError> {
        let mut grid = AblationGrid::default();
        for r in records {
            r.validate().map_err(GridError::InvalidRecord)?;
            let column = Column { preset: r.preset, frozen_layers: r.frozen_layers };
            if grid.cells.insert((r.input_length, column), r.cell()).is_some() {
                return Err(GridError::DuplicateCell { input_length: r.input_length, column });
            }
        }
        Ok(grid)
    }

    pub fn get(&self, input_length: usize, column: Column) -> Cell {
        self.cells.get(&(input_length, column)).copied().unwrap_or(Cell::Missing)
    }

    fn bold(&self, axis: BoldAxis) -> BTreeMap<(usize, Column), bool> {
        let cols = columns();
        let mut best: BTreeMap<(usize, Column), bool> = BTreeMap::new();
        let mut mark = |keys: Vec<(usize, Column)>| {
            let max = keys.iter().filter_map(|&(l, c)| self.get(l, c).value()).max();
            for (l, c) in keys {
                best.insert((l, c), max.is_some() && self.get(l, c).value() == max);
            }
        };
        match axis {
            BoldAxis::Column => {
                for &c in &cols {
                    mark(INPUT_LENGTHS.iter().map(|&l| (l, c)).collect());
                }
            }
            BoldAxis::Row => {
                for l in INPUT_LENGTHS {
                    mark(cols.iter().map(|&c| (l, c)).collect());
                }
            }
            BoldAxis::None => {}
        }
        best
    }

    /// Markdown table: a model-size header, a frozen-layers row, then one row
    /// per input length. Missing and dash cells both show `-`.
    pub fn to_markdown(&self, bold: BoldAxis) -> String {
        let cols = columns();
        let marks = self.bold(bold);
        let mut out = String::new();
        let header: Vec<&str> = cols.iter().map(|c| c.preset.name()).collect();
        out.push_str(&format!("| Model size | {} |\n", header.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---:|".repeat(cols.len())));
        let frozen: Vec<String> = cols.iter().map(|c| c.frozen_layers.to_string()).collect();
        out.push_str(&format!("| Frozen layers | {} |\n", frozen.join(" | ")));
        for l in INPUT_LENGTHS {
            let cells: Vec<String> = cols
                .iter()
                .map(|&c| match self.get(l, c) {
                    Cell::Value(v) if marks.get(&(l, c)).copied().unwrap_or(false) => format!("**{v}**"),
                    Cell::Value(v) => v.to_string(),
                    Cell::Missing | Cell::Dash => "-".to_string(),
                })
                .collect();
            out.push_str(&format!("| {l} input | {} |\n", cells.join(" | ")));
        }
        out
    }

    /// Wide CSV with one row per input length. Dash cells are written as `-`
    /// and missing cells as empty fields, so [`AblationGrid::from_csv`] recovers
    /// the grid exactly.
    pub fn to_csv(&self) -> String {
        let cols = columns();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["input_length".to_string()];
        header.extend(cols.iter().map(Column::to_string));
        w.write_record(&header).expect("write to Vec");
        for l in INPUT_LENGTHS {
            let mut row = vec![l.to_string()];
            row.extend(cols.iter().map(|&c| match self.get(l, c) {
                Cell::Missing => String::new(),
                Cell::Dash => "-".to_string(),
                Cell::Value(v) => v.to_string(),
            }));
            w.write_record(&row).expect("write to Vec");
        }
        String::from_utf8(w.into_inner().expect("flush Vec")).expect("CSV output is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let cols = columns();
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
        let mut records = r.records();
        let err = |line: usize, message: String| GridError::Csv { line, message };
        let header = records
            .next()
            .ok_or_else(|| err(1, "empty input".into()))?
            .map_err(|e| err(1, e.to_string()))?;
        let mut expected = vec!["input_length".to_string()];
        expected.extend(cols.iter().map(Column::to_string));
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(err(1, format!("header does not match {}", expected.join(","))));
        }
        let mut grid = AblationGrid::default();
        let mut seen = Vec::new();
        for (i, row) in records.enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| err(line, e.to_string()))?;
            let length: usize = row[0].parse().map_err(|_| err(line, format!("bad input length {:?}", &row[0])))?;
            if !INPUT_LENGTHS.contains(&length) || seen.contains(&length) {
                return Err(err(line, format!("unexpected input length {length}")));
            }
            seen.push(length);
            for (field, &c) in row.iter().skip(1).zip(&cols) {
                let cell = match field {
                    "" => continue,
                    "-" => Cell::Dash,
                    v => Cell::Value(v.parse().map_err(|m| err(line, m))?),
                };
                grid.cells.insert((length, c), cell);
            }
        }
        Ok(grid)
    }
}

/// Reads every `*.json` file under `dir` in name order.
pub fn read_records(dir: &Path) -> CliResult<Vec<AblationRecord>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir.display(), e))?.path();
        if path.extension().is_some_and(|e| e == "json") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.display(), e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        for item in items {
            let record: AblationRecord = serde_json::from_value(item)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            record.validate().map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            records.push(record);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pct(s: &str) -> Percent {
        s.parse().unwrap()
    }

    #[test]
    fn percent_is_exact() {
        assert_eq!(pct("97.32").hundredths(), 9732);
        assert_eq!(Percent::from_f64(97.32).unwrap(), pct("97.32"));
        assert_eq!(pct("0.05").to_string(), "0.05");
        assert_eq!(pct("100.00"), Percent::MAX);
        assert!("100.01".parse::<Percent>().is_err());
        assert!("97.3".parse::<Percent>().is_err());
        assert!(Percent::from_f64(97.325).is_err());
        assert!(Percent::from_f64(-1.0).is_err());
    }

    #[test]
    fn grid_has_twelve_columns() {
        let names: Vec<String> = columns().iter().map(Column::to_string).collect();
        assert_eq!(
            names,
            [
                "Xsmall/0", "Xsmall/6", "Xsmall/12", "Small/0", "Small/6", "Base/0", "Base/6", "Base/12", "Large/0",
                "Large/6", "Large/12", "Large/18"
            ]
        );
    }

    #[test]
    fn frozen_beyond_depth_is_invalid() {
        let r = AblationRecord::ok(ModelPreset::Small, 18, 512, pct("50.00"));
        assert!(matches!(AblationGrid::from_records([&r]), Err(GridError::InvalidRecord(_))));
    }

    #[test]
    fn duplicate_cell() {
        let a = AblationRecord::ok(ModelPreset::Base, 6, 512, pct("98.72"));
        let b = AblationRecord::dash(ModelPreset::Base, 6, 512);
        assert_eq!(
            AblationGrid::from_records([&a, &b]),
            Err(GridError::DuplicateCell { input_length: 512, column: Column { preset: ModelPreset::Base, frozen_layers: 6 } })
        );
    }

    #[test]
    fn empty_grid_keeps_headers() {
        let md = AblationGrid::default().to_markdown(BoldAxis::Column);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].starts_with("| Model size | Xsmall | Xsmall | Xsmall | Small |"));
        assert_eq!(lines[3], format!("| 256 input |{}", " - |".repeat(12)));
    }

    #[test]
    fn record_json_shape() {
        let r: AblationRecord =
            serde_json::from_str(r#"{"preset":"Large","frozen_layers":18,"input_length":1024,"test_f1":99.21}"#).unwrap();
        assert_eq!(r, AblationRecord::ok(ModelPreset::Large, 18, 1024, pct("99.21")));
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"preset":"large","frozen_layers":18,"input_length":1024,"test_f1":99.21,"status":"ok"}"#
        );
        assert!(serde_json::from_str::<AblationRecord>(r#"{"preset":"huge","frozen_layers":0,"input_length":512}"#).is_err());
    }

    #[test]
    fn bold_axes() {
        let x0 = Column { preset: ModelPreset::Xsmall, frozen_layers: 0 };
        let records = [
            AblationRecord::ok(ModelPreset::Xsmall, 0, 256, pct("97.32")),
            AblationRecord::ok(ModelPreset::Xsmall, 0, 512, pct("98.33")),
            AblationRecord::ok(ModelPreset::Small, 0, 256, pct("95.88")),
        ];
        let g = AblationGrid::from_records(&records).unwrap();
        let col = g.bold(BoldAxis::Column);
        assert!(col[&(512, x0)] && !col[&(256, x0)]);
        let row = g.bold(BoldAxis::Row);
        assert!(row[&(256, x0)] && row[&(512, x0)]);
        assert!(!g.to_markdown(BoldAxis::None).contains("**"));
    }
}
