use serde::Serialize;

use crate::error::Result;

/// Fixed float formatting used by every report, so identical runs give identical bytes.
pub fn fmt_f(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.10e}")
    }
}

/// One verdict: `value ≤ bound`, with the origin of the bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub case: String,
    pub value: f64,
    pub bound: f64,
    pub provenance: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(case: impl Into<String>, value: f64, bound: f64, provenance: impl Into<String>) -> Self {
        Check {
            case: case.into(),
            value,
            bound,
            provenance: provenance.into(),
            pass: value <= bound,
        }
    }

    fn severity(&self) -> f64 {
        if self.bound > 0.0 { self.value / self.bound } else { self.value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCase {
    pub case: String,
    pub value: f64,
    pub bound: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub pass: bool,
    pub n_cases: usize,
    pub worst_case: Option<WorstCase>,
}

/// A named CSV table; rows are sorted before writing.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut rows = self.rows.clone();
        rows.sort();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Format(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Format(e.to_string())
}

/// Everything a suite produced.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub kernels: Vec<(String, crate::GridFunction)>,
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.into(),
            checks: Vec::new(),
            tables: Vec::new(),
            kernels: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> Summary {
        // a failing check outranks any passing one
        let worst = self
            .checks
            .iter()
            .max_by(|a, b| {
                (!a.pass, a.severity())
                    .partial_cmp(&(!b.pass, b.severity()))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| b.case.cmp(&a.case))
            })
            .map(|c| WorstCase {
                case: c.case.clone(),
                value: c.value,
                bound: c.bound,
                provenance: c.provenance.clone(),
            });
        Summary {
            suite: self.suite.clone(),
            pass: self.pass(),
            n_cases: self.checks.len(),
            worst_case: worst,
        }
    }

    /// The verdict table: one row per check, FAIL rows with value, bound and provenance.
    pub fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["case", "status", "value", "bound", "provenance"]);
        for c in &self.checks {
            t.push(vec![
                c.case.clone(),
                if c.pass { "PASS" } else { "FAIL" }.into(),
                fmt_f(c.value),
                fmt_f(c.bound),
                c.provenance.clone(),
            ]);
        }
        t
    }

    /// Writes every table as `<suite>-<name>.csv`, the summary as `<suite>-summary.json`
    /// and kernels as grid function files.
    pub fn write(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in self.tables.iter().chain(std::iter::once(&self.checks_table())) {
            std::fs::write(dir.join(format!("{}-{}.csv", self.suite, t.name)), t.to_csv()?)?;
        }
        let json = serde_json::to_string_pretty(&self.summary())?;
        std::fs::write(dir.join(format!("{}-summary.json", self.suite)), json + "\n")?;
        for (name, k) in &self.kernels {
            crate::io::save(k, &dir.join(format!("{name}.json")))?;
        }
        Ok(())
    }
}
