//! Result rows, acceptance verdicts, plot series and their files.

use std::fs;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::config::ExperimentId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefSource {
    Quadrature,
    ClosedForm,
    McOracle,
    PaperFormula,
}

/// Parameter columns of a result row.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct At {
    pub rho: Option<f64>,
    pub n: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub x: Option<f64>,
}

impl At {
    pub fn rho(mut self, v: f64) -> Self {
        self.rho = Some(v);
        self
    }
    pub fn n(mut self, v: f64) -> Self {
        self.n = Some(v);
        self
    }
    pub fn alpha(mut self, v: f64) -> Self {
        self.alpha = Some(v);
        self
    }
    pub fn delta(mut self, v: f64) -> Self {
        self.delta = Some(v);
        self
    }
    pub fn x(mut self, v: f64) -> Self {
        self.x = Some(v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment_id: ExperimentId,
    pub check: String,
    pub rho: Option<f64>,
    pub n: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub x: Option<f64>,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub reference_value: f64,
    pub reference_source: RefSource,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub pass: bool,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub experiment_id: ExperimentId,
    pub rows: Vec<ResultRow>,
    pub criteria: Vec<Criterion>,
    pub plots: Vec<PlotSeries>,
    /// Set when a simulated window ran past the sampled bins.
    pub truncated: bool,
    /// Wall-clock time per section; never written to disk.
    pub timings: Vec<(String, Duration)>,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment_id: ExperimentId,
    criteria: &'a [Criterion],
}

impl Report {
    pub fn new(experiment_id: ExperimentId) -> Self {
        Self {
            experiment_id,
            rows: Vec::new(),
            criteria: Vec::new(),
            plots: Vec::new(),
            truncated: false,
            timings: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn row(
        &mut self,
        check: &str,
        at: At,
        estimate: f64,
        stderr: Option<f64>,
        reference_value: f64,
        reference_source: RefSource,
        pass: bool,
    ) {
        self.rows.push(ResultRow {
            experiment_id: self.experiment_id,
            check: check.to_string(),
            rho: at.rho,
            n: at.n,
            alpha: at.alpha,
            delta: at.delta,
            x: at.x,
            estimate,
            stderr,
            reference_value,
            reference_source,
            pass,
        });
    }

    pub fn criterion(&mut self, id: impl Into<String>, pass: bool, measured: f64, reference: f64, tolerance: f64) -> bool {
        self.criteria.push(Criterion {
            id: id.into(),
            pass,
            measured,
            reference,
            tolerance,
        });
        pass
    }

    pub fn plot(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.plots.push(PlotSeries {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }

    /// Acceptance verdict; rows are diagnostics and carry their own flags.
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn criterion_by_id(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    /// 3 for truncation, 1 for a failed check, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.truncated {
            3
        } else if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn write_results_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record([
                "experiment_id",
                "check",
                "rho",
                "n",
                "alpha",
                "delta",
                "x",
                "estimate",
                "stderr",
                "reference_value",
                "reference_source",
                "pass",
            ])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            experiment_id: self.experiment_id,
            criteria: &self.criteria,
        };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }

    pub fn write_all(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("plotdata"))?;
        let f = fs::File::create(dir.join("results.csv"))?;
        self.write_results_csv(io::BufWriter::new(f)).map_err(io::Error::other)?;
        fs::write(dir.join("summary.json"), self.summary_json() + "\n")?;
        for p in &self.plots {
            let f = fs::File::create(dir.join("plotdata").join(format!("{}.csv", p.name)))?;
            let mut w = csv::Writer::from_writer(io::BufWriter::new(f));
            w.write_record(&p.columns)?;
            for r in &p.rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}
