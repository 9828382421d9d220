//! Tabular experiment reports and their CSV and JSON renderings.
//!
//! CSV output opens with `# schema=1`, then one `# key=value` comment per
//! metadata entry, a header row and one row per result. JSON output is a single
//! object carrying the same metadata and a `results` array of row objects.

use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }

    fn is_finite(&self) -> bool {
        !matches!(self, Cell::Num(v) if !v.is_finite())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    experiment: String,
    meta: Vec<(String, Cell)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Adds or replaces a metadata entry, keeping first-insertion order.
    pub fn set_meta(&mut self, key: &str, value: impl Into<Cell>) {
        let value = value.into();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&Cell> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Name of the first metadata key or column holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<String> {
        if let Some((k, _)) = self.meta.iter().find(|(_, v)| !v.is_finite()) {
            return Some(k.clone());
        }
        self.rows
            .iter()
            .find_map(|row| row.iter().position(|c| !c.is_finite()).map(|i| self.columns[i].clone()))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema={SCHEMA_VERSION}\n# experiment={}\n", self.experiment);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={}\n", v.render()));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::render))
                .expect("writing to memory");
        }
        let bytes = writer.into_inner().expect("flushing to memory");
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
        out
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("schema".into(), Value::from(SCHEMA_VERSION));
        obj.insert("experiment".into(), Value::from(self.experiment.as_str()));
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.to_json());
        }
        let results = self
            .rows
            .iter()
            .map(|row| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::to_json))
                    .collect();
                Value::Object(m)
            })
            .collect();
        obj.insert("results".into(), Value::Array(results));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", &["n", "value", "label"]);
        r.set_meta("grid", "8x8");
        r.set_meta("tolerance", 1e-8);
        r.push_row(vec![3usize.into(), 0.25.into(), "a,b".into()]);
        r.push_row(vec![4usize.into(), (-1.5).into(), "c".into()]);
        r
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema=1");
        assert_eq!(lines[1], "# experiment=demo");
        assert_eq!(lines[2], "# grid=8x8");
        assert_eq!(lines[4], "n,value,label");
        assert_eq!(lines[5], "3,2.5e-1,\"a,b\"");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn csv_rows_parse_back() {
        let text = sample().to_csv();
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), -1.5);
        assert_eq!(&rows[0][2], "a,b");
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["grid"], "8x8");
        assert_eq!(v["results"][1]["value"], -1.5);
        assert_eq!(v["results"].as_array().unwrap().len(), 2);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["schema", "experiment", "grid", "tolerance", "results"]);
    }

    #[test]
    fn non_finite_detection() {
        let mut r = sample();
        assert_eq!(r.first_non_finite(), None);
        r.push_row(vec![5usize.into(), f64::NAN.into(), "x".into()]);
        assert_eq!(r.first_non_finite().as_deref(), Some("value"));
        let mut r = sample();
        r.set_meta("slope", f64::INFINITY);
        assert_eq!(r.first_non_finite().as_deref(), Some("slope"));
    }

    #[test]
    fn meta_replacement_keeps_order() {
        let mut r = sample();
        r.set_meta("grid", "16x16");
        assert_eq!(r.meta("grid"), Some(&Cell::Text("16x16".into())));
        assert!(r.to_csv().lines().nth(2).unwrap().ends_with("16x16"));
    }
}
