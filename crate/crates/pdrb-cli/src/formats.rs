//! File formats: diagram CSV, grid text, matrix/label CSV, encoding
//! bundles, synthetic-ensemble specs, and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use pdrb_core::{ClusterShape, DiagramPoint, EnsembleSpec, PersistenceDiagram, ScalarGrid};
use serde::{Deserialize, Serialize};

/// A full square matrix in row-major order (the CLI-side counterpart of
/// the library's distance matrix, fillable from parallel workers).
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    pub size: usize,
    pub entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }
}

use crate::{Failure, Outcome};

/// Shortest decimal form that parses back to the same double.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

fn read_error(path: &Path, err: std::io::Error) -> Failure {
    Failure::io(format!("cannot read {}: {err}", path.display()))
}

fn line_error(path: &Path, line: usize, what: impl std::fmt::Display) -> Failure {
    Failure::io(format!("{}:{line}: {what}", path.display()))
}

/// Reads a diagram CSV: one `birth,death` pair per line, optional
/// `birth,death` header, `.` decimal separator.
pub fn read_diagram(path: &Path) -> Outcome<PersistenceDiagram> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 && line.eq_ignore_ascii_case("birth,death") {
            continue;
        }
        let mut fields = line.split(',');
        let (b, d) = match (fields.next(), fields.next(), fields.next()) {
            (Some(b), Some(d), None) => (b.trim(), d.trim()),
            _ => {
                return Err(line_error(
                    path,
                    idx + 1,
                    format!("expected a 'birth,death' pair, got '{line}'"),
                ))
            }
        };
        let birth: f64 = b
            .parse()
            .map_err(|_| line_error(path, idx + 1, format!("cannot parse birth value '{b}'")))?;
        let death: f64 = d
            .parse()
            .map_err(|_| line_error(path, idx + 1, format!("cannot parse death value '{d}'")))?;
        if !birth.is_finite() || !death.is_finite() {
            return Err(line_error(path, idx + 1, "non-finite value"));
        }
        let point = DiagramPoint::new(birth, death).map_err(|e| line_error(path, idx + 1, e))?;
        points.push(point);
    }
    PersistenceDiagram::new(points).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Serialises a diagram as CSV with a `birth,death` header.
pub fn render_diagram(diagram: &PersistenceDiagram) -> String {
    let mut out = String::from("birth,death\n");
    for p in diagram.points() {
        out.push_str(&format_f64(p.birth));
        out.push(',');
        out.push_str(&format_f64(p.death));
        out.push('\n');
    }
    out
}

/// Reads a grid file: first line `dims: d1 d2 [d3]`, then whitespace-
/// separated row-major samples.
pub fn read_grid(path: &Path) -> Outcome<ScalarGrid> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim();
    let dims_part = header
        .strip_prefix("dims:")
        .ok_or_else(|| line_error(path, 1, "first line must be 'dims: d1 d2 [d3]'"))?;
    let mut dims = Vec::new();
    for token in dims_part.split_whitespace() {
        let d: usize = token
            .parse()
            .map_err(|_| line_error(path, 1, format!("cannot parse dimension '{token}'")))?;
        dims.push(d);
    }
    let mut values = Vec::new();
    for (idx, raw) in lines.enumerate() {
        for token in raw.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| line_error(path, idx + 2, format!("cannot parse sample '{token}'")))?;
            values.push(v);
        }
    }
    ScalarGrid::new(dims, values).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Serialises a full square distance matrix as CSV.
pub fn render_matrix(matrix: &SquareMatrix) -> String {
    let n = matrix.size;
    let mut out = String::new();
    for row in 0..n {
        for col in 0..n {
            if col > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(matrix.at(row, col)));
        }
        out.push('\n');
    }
    out
}

/// Serialises cluster labels, one integer per line.
pub fn render_labels(labels: &[usize]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

/// An encoding result on disk: learned atoms by file reference, one
/// simplex coefficient vector per input, and the per-epoch energy trace.
#[derive(Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub q: f64,
    /// Atom diagram CSVs, relative to this bundle's directory.
    pub atoms: Vec<String>,
    /// One vector per input, in input order.
    pub coefficients: Vec<Vec<f64>>,
    pub energy_trace: Vec<f64>,
    /// Display labels of the encoded inputs, in input order.
    pub inputs: Vec<String>,
    pub epochs: usize,
    pub converged: bool,
}

pub fn read_bundle(path: &Path) -> Outcome<Bundle> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Synthetic-ensemble description: bump amplitudes per cluster, member
/// counts, outlier positions, and grid geometry.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecFile {
    /// Bump amplitudes of each cluster prototype.
    pub clusters: Vec<Vec<f64>>,
    pub members_per_cluster: usize,
    /// `[cluster, member]` positions that receive a spike.
    pub outliers: Vec<(usize, usize)>,
    pub grid_side: usize,
    pub sigma: f64,
    pub amplitude_jitter: f64,
    pub position_jitter: f64,
    pub spike_margin: f64,
}

impl Default for SpecFile {
    fn default() -> Self {
        SpecFile::from_spec(&EnsembleSpec::default())
    }
}

impl SpecFile {
    pub fn from_spec(spec: &EnsembleSpec) -> Self {
        SpecFile {
            clusters: spec.shapes.iter().map(|s| s.amplitudes.clone()).collect(),
            members_per_cluster: spec.members_per_cluster,
            outliers: spec.outlier_members.clone(),
            grid_side: spec.grid_side,
            sigma: spec.sigma,
            amplitude_jitter: spec.amplitude_jitter,
            position_jitter: spec.position_jitter,
            spike_margin: spec.spike_margin,
        }
    }

    pub fn into_spec(self) -> EnsembleSpec {
        EnsembleSpec {
            shapes: self
                .clusters
                .into_iter()
                .map(|amplitudes| ClusterShape { amplitudes })
                .collect(),
            members_per_cluster: self.members_per_cluster,
            outlier_members: self.outliers,
            grid_side: self.grid_side,
            sigma: self.sigma,
            amplitude_jitter: self.amplitude_jitter,
            position_jitter: self.position_jitter,
            spike_margin: self.spike_margin,
        }
    }
}

pub fn read_spec_file(path: &Path) -> Outcome<SpecFile> {
    let text = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::numerical(format!("cannot serialise output: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// JSON value for a list of paths, as given on the command line.
pub fn path_list(paths: &[PathBuf]) -> serde_json::Value {
    serde_json::Value::Array(
        paths
            .iter()
            .map(|p| serde_json::Value::String(p.display().to_string()))
            .collect(),
    )
}

/// `out.csv -> out.manifest.json` and friends.
pub fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

/// File stem used to label a diagram in plots and layouts; commas would
/// break CSV output, so they are replaced.
pub fn stem_label(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    stem.replace(',', ";")
}

/// Writes through a temporary sibling then renames, so a crash never
/// leaves a half-written output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome<()> {
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Failure::io(format!("invalid output path {}", path.display())))?;
    let tmp = path.with_file_name(format!("{name}.tmp"));
    fs::write(&tmp, bytes)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| Failure::io(format!("cannot move {} into place: {e}", tmp.display())))?;
    Ok(())
}

/// Writes the manifest next to `out`.
pub fn write_manifest(out: &Path, manifest: &RunManifest) -> Outcome<()> {
    write_atomic(
        &with_suffix(out, "manifest.json"),
        render_json(manifest)?.as_bytes(),
    )
}
