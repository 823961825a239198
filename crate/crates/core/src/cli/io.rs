//! JSON and CSV input/output for the command-line tool.

use std::fs;
use std::io;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::entropy::BoxDomain;
use crate::error::{Error, Result};
use crate::problem::{InverseProblem, SolverOptions};
use crate::solver::DualSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SolverOptions>,
}

impl ProblemFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let origin = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{origin}: {e}")))?;
        Self::parse(&text, &origin)
    }

    /// Checks dimensions, naming the offending JSON path, and builds the
    /// problem.
    pub fn into_problem(self, origin: &str) -> Result<InverseProblem> {
        let bad = |msg: String| Error::InvalidInput(format!("{origin}: {msg}"));
        let k = self.a.len();
        if k == 0 {
            return Err(bad("\"A\" has no rows".into()));
        }
        let n = self.a[0].len();
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!("\"A\"[{i}] has {} entries, expected {n}", row.len())));
            }
        }
        if self.y.len() != k {
            return Err(bad(format!("\"y\" has {} entries, \"A\" has {k} rows", self.y.len())));
        }
        for (key, v) in [("lower", &self.bounds.lower), ("upper", &self.bounds.upper)] {
            if v.len() != n {
                return Err(bad(format!("\"box\".\"{key}\" has {} entries, \"A\" has {n} columns", v.len())));
            }
        }
        let domain = BoxDomain::new(self.bounds.lower, self.bounds.upper).map_err(|e| bad(format!("\"box\": {e}")))?;
        let problem = InverseProblem::from_rows(&self.a, &self.y, domain).map_err(|e| bad(e.to_string()))?;
        match self.options {
            Some(options) => problem.with_options(options).map_err(|e| bad(format!("\"options\": {e}"))),
            None => Ok(problem),
        }
    }
}

pub fn load_problem(path: &Path) -> Result<InverseProblem> {
    ProblemFile::load(path)?.into_problem(&path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditResiduals {
    /// Largest deviation of the chart image from a straight line.
    pub affinity_deviation: f64,
    /// Range residual per sample (multiplier and surface paths only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_residuals: Option<Vec<f64>>,
}

/// Result document. Fields a command does not produce are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_inf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_samples: Option<Vec<PathSample>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_residuals: Option<AuditResiduals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_inverse: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dxi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ResultFile {
    pub fn from_solution(solution: &DualSolution) -> Self {
        Self {
            status: Some(solution.status.name().to_string()),
            xi: Some(solution.xi_star.coords().as_slice().to_vec()),
            lambda: Some(solution.lambda_star.as_slice().to_vec()),
            psi: Some(solution.psi_value),
            dual: Some(solution.dual_value),
            gap: Some(solution.gap),
            residual_inf: Some(solution.residual_inf),
            iterations: Some(solution.iterations),
            ..Self::default()
        }
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Pretty JSON with every float printed at 17 significant digits.
struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Reads a comma-separated list of reals, either from the file `arg` names or,
/// if there is no such file, from `arg` itself.
pub fn read_csv_values(arg: &str, what: &str) -> Result<DVector<f64>> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{what} ({arg}): {e}")))?
    } else {
        arg.to_string()
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("{what}: entry {i} ({s:?}) is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("{what}: no values")));
    }
    Ok(DVector::from_vec(values))
}

/// One CSV line per matrix row, 17 significant digits.
pub fn table_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"{"A": [[1, 1]], "y": [1], "box": {"lower": [0, 0], "upper": [1, 1]}}"#;

    #[test]
    fn parses_demo() {
        let p = ProblemFile::parse(DEMO, "demo").unwrap().into_problem("demo").unwrap();
        assert_eq!((p.rows(), p.cols()), (1, 2));
    }

    #[test]
    fn missing_box_is_named() {
        let err = ProblemFile::parse(r#"{"A": [[1]], "y": [0.5]}"#, "f.json").unwrap_err();
        assert!(err.to_string().contains("box"), "{err}");
        let err = ProblemFile::parse(
            r#"{"A": [[1, 1], [1]], "y": [1, 1], "box": {"lower": [0, 0], "upper": [1, 1]}}"#,
            "f.json",
        )
        .unwrap()
        .into_problem("f.json")
        .unwrap_err();
        assert!(err.to_string().contains("\"A\"[1]"), "{err}");
    }

    #[test]
    fn floats_round_trip() {
        let r = ResultFile {
            psi: Some(0.1 + 0.2),
            xi: Some(vec![1.0 / 3.0, -2.5e-300, 7.0]),
            ..ResultFile::default()
        };
        let text = to_json(&r);
        let back: ResultFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(text.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn csv_values() {
        let v = read_csv_values("0.5, 0.25,0.25", "rows").unwrap();
        assert_eq!(v.as_slice(), &[0.5, 0.25, 0.25]);
        assert!(read_csv_values("0.5,x", "rows").is_err());
    }
}
