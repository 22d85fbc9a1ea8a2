//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use pdrb_core::{
    compute_barycenter, encode, kmeans, make_outlier_ensemble, planar_layout, prune,
    threshold_top_k, wasserstein_distance, BarycenterConfig, CoefficientVector, Connectivity,
    Dictionary, EncodeConfig, KmeansConfig, PersistenceDiagram,
};

use crate::formats::{
    self, format_f64, path_list, read_bundle, read_diagram, read_grid, read_spec_file,
    render_diagram, render_json, render_labels, render_matrix, stem_label, with_suffix,
    write_atomic, write_manifest, Bundle, RunManifest, SpecFile, SquareMatrix,
};
use crate::render::{heatmap_svg, layout_svg, plot_svg};
use crate::{Failure, Outcome};

fn require_q_at_least_1(q: f64) -> Outcome<()> {
    if !q.is_finite() || q < 1.0 {
        return Err(Failure::contract(format!(
            "exponent q must be a finite real with q >= 1, got {q}"
        )));
    }
    Ok(())
}

/// Barycenter-based commands reject q = 1 unless explicitly unlocked: the
/// point-location problem loses strict convexity there and the iteration
/// is prone to numerical instability.
fn gate_barycenter_q(q: f64, unsafe_q1: bool) -> Outcome<()> {
    require_q_at_least_1(q)?;
    if q == 1.0 {
        if !unsafe_q1 {
            return Err(Failure::contract(String::from(
                "q = 1 is disabled by default: the ground-point objective loses strict convexity \
                 at q = 1 and the iteration is prone to numerical instability; pass --unsafe-q1 \
                 to run anyway",
            )));
        }
        eprintln!(
            "warning: running with q = 1; expect numerical instability near coincident points"
        );
    }
    Ok(())
}

fn read_diagrams(paths: &[PathBuf]) -> Outcome<Vec<PersistenceDiagram>> {
    paths.iter().map(|p| read_diagram(p)).collect()
}

fn labels_of(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| stem_label(p)).collect()
}

/// Worker-thread cap: `PDRB_THREADS` (0 or unset means auto).
fn thread_cap() -> Outcome<usize> {
    match std::env::var("PDRB_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Failure::contract(format!("PDRB_THREADS: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(v) => Ok(v),
            Err(_) => Err(Failure::contract(format!(
                "PDRB_THREADS must be a non-negative integer, got '{s}'"
            ))),
        },
    }
}

pub fn cmd_extract(
    grid_path: &Path,
    connectivity: Connectivity,
    top_k: Option<usize>,
    epsilon: Option<f64>,
    out: &Path,
) -> Outcome<()> {
    let grid = read_grid(grid_path)?;
    let mut diagram = pdrb_core::extract_max_pairs(&grid, connectivity)?;
    if let Some(e) = epsilon {
        diagram = prune(&diagram, e)?;
    }
    if let Some(k) = top_k {
        diagram = threshold_top_k(&diagram, k);
    }
    write_atomic(out, render_diagram(&diagram).as_bytes())?;
    let mut manifest = RunManifest::new("extract");
    manifest
        .param("grid", grid_path.display().to_string())
        .param("connectivity", connectivity_name(connectivity))
        .param("out", out.display().to_string());
    if let Some(k) = top_k {
        manifest.param("top_k", k);
    }
    if let Some(e) = epsilon {
        manifest.param("epsilon", e);
    }
    manifest.result("points", diagram.len());
    write_manifest(out, &manifest)
}

fn connectivity_name(c: Connectivity) -> &'static str {
    match c {
        Connectivity::Full => "full",
        Connectivity::Axis => "axis",
    }
}

/// Computes all pairwise distances, splitting the pair list over worker
/// threads. Every entry is computed independently and placed by index, so
/// the result is identical for every thread count.
fn pairwise_matrix(diagrams: &[PersistenceDiagram], q: f64) -> Outcome<SquareMatrix> {
    let n = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let cap = thread_cap()?;
    let workers = if cap == 0 {
        std::thread::available_parallelism()
            .map(usize::from)
            .unwrap_or(1)
    } else {
        cap
    };
    let workers = workers.max(1).min(pairs.len().max(1));

    let mut computed: Vec<pdrb_core::Result<f64>> = Vec::with_capacity(pairs.len());
    if workers <= 1 {
        for &(i, j) in &pairs {
            computed.push(wasserstein_distance(&diagrams[i], &diagrams[j], q));
        }
    } else {
        computed.resize(pairs.len(), Ok(0.0));
        let chunk = pairs.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (pair_chunk, out_chunk) in pairs.chunks(chunk).zip(computed.chunks_mut(chunk)) {
                scope.spawn(move || {
                    for (&(i, j), slot) in pair_chunk.iter().zip(out_chunk.iter_mut()) {
                        *slot = wasserstein_distance(&diagrams[i], &diagrams[j], q);
                    }
                });
            }
        });
    }

    let mut entries = vec![0.0_f64; n * n];
    for (&(i, j), value) in pairs.iter().zip(computed) {
        let d = value?;
        entries[i * n + j] = d;
        entries[j * n + i] = d;
    }
    Ok(SquareMatrix { size: n, entries })
}

pub fn cmd_dist(diagram_paths: &[PathBuf], q: f64, svg: bool, out: &Path) -> Outcome<()> {
    require_q_at_least_1(q)?;
    let diagrams = read_diagrams(diagram_paths)?;
    let matrix = pairwise_matrix(&diagrams, q)?;
    write_atomic(out, render_matrix(&matrix).as_bytes())?;
    if svg {
        let svg_text = heatmap_svg(&matrix, &labels_of(diagram_paths));
        write_atomic(&with_suffix(out, "svg"), svg_text.as_bytes())?;
    }
    let mut manifest = RunManifest::new("dist");
    manifest
        .param("diagrams", path_list(diagram_paths))
        .param("q", q)
        .param("svg", svg)
        .param("out", out.display().to_string());
    write_manifest(out, &manifest)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bary(
    diagram_paths: &[PathBuf],
    q: f64,
    iterations: Option<usize>,
    epsilon: Option<f64>,
    weights: Option<Vec<f64>>,
    unsafe_q1: bool,
    out: &Path,
) -> Outcome<()> {
    gate_barycenter_q(q, unsafe_q1)?;
    let diagrams = read_diagrams(diagram_paths)?;
    let mut config = BarycenterConfig {
        q,
        weights: weights.clone(),
        ..BarycenterConfig::default()
    };
    if let Some(t) = iterations {
        config.max_outer_iters = t;
    }
    if let Some(e) = epsilon {
        config.prune_epsilon = e;
    }
    let result = compute_barycenter(&diagrams, &config)?;

    write_atomic(out, render_diagram(&result.diagram).as_bytes())?;
    let trace = serde_json::json!({
        "energy_trace": result.energy_trace,
        "iterations": result.iterations,
        "converged": result.converged,
    });
    write_atomic(
        &with_suffix(out, "trace.json"),
        render_json(&trace)?.as_bytes(),
    )?;

    let mut manifest = RunManifest::new("bary");
    manifest
        .param("diagrams", path_list(diagram_paths))
        .param("q", q)
        .param("T", config.max_outer_iters)
        .param("epsilon", config.prune_epsilon)
        .param("out", out.display().to_string());
    if let Some(w) = &weights {
        manifest.param("weights", w.clone());
    }
    manifest
        .result("energy", *result.energy_trace.last().unwrap_or(&f64::NAN))
        .result("iterations", result.iterations)
        .result("converged", result.converged);
    write_manifest(out, &manifest)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_cluster(
    diagram_paths: &[PathBuf],
    k: usize,
    q: f64,
    seed: u64,
    iterations: Option<usize>,
    unsafe_q1: bool,
    out: &Path,
) -> Outcome<()> {
    gate_barycenter_q(q, unsafe_q1)?;
    let diagrams = read_diagrams(diagram_paths)?;
    let mut config = KmeansConfig {
        k,
        q,
        seed,
        ..KmeansConfig::default()
    };
    if let Some(t) = iterations {
        config.max_iters = t;
    }
    let result = kmeans(&diagrams, &config)?;

    write_atomic(out, render_labels(&result.labels).as_bytes())?;
    for (i, centroid) in result.centroids.iter().enumerate() {
        write_atomic(
            &with_suffix(out, &format!("centroid-{i}.csv")),
            render_diagram(centroid).as_bytes(),
        )?;
    }
    let mut manifest = RunManifest::new("cluster");
    manifest
        .param("diagrams", path_list(diagram_paths))
        .param("k", k)
        .param("q", q)
        .param("seed", seed)
        .param("T", config.max_iters)
        .param("out", out.display().to_string());
    manifest
        .result("energy", result.total_energy)
        .result("iterations", result.iterations)
        .result("converged", result.converged);
    write_manifest(out, &manifest)
}

pub fn cmd_encode(
    diagram_paths: &[PathBuf],
    m: usize,
    q: f64,
    seed: u64,
    epochs: Option<usize>,
    out: &Path,
) -> Outcome<()> {
    if !q.is_finite() || q <= 1.0 {
        return Err(Failure::contract(format!(
            "encoding requires a finite exponent q > 1 (coefficient gradients degenerate at q = 1), got {q}"
        )));
    }
    if m < 2 {
        return Err(Failure::contract(format!(
            "at least two atoms are required, got m = {m}"
        )));
    }
    let diagrams = read_diagrams(diagram_paths)?;
    let mut config = EncodeConfig {
        q,
        m,
        seed,
        ..EncodeConfig::default()
    };
    if let Some(t) = epochs {
        config.epochs = t;
    }
    let result = encode(&diagrams, &config)?;

    let mut atom_refs = Vec::new();
    for (j, atom) in result.dictionary.atoms().iter().enumerate() {
        let atom_path = with_suffix(out, &format!("atom-{j}.csv"));
        write_atomic(&atom_path, render_diagram(atom).as_bytes())?;
        let name = atom_path
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Failure::io(format!("invalid output path {}", atom_path.display())))?;
        atom_refs.push(name.to_string());
    }
    let bundle = Bundle {
        q,
        atoms: atom_refs,
        coefficients: result
            .coefficients
            .iter()
            .map(|c| c.entries().to_vec())
            .collect(),
        energy_trace: result.energy_trace.clone(),
        inputs: labels_of(diagram_paths),
        epochs: result.epochs,
        converged: result.converged,
    };
    write_atomic(out, render_json(&bundle)?.as_bytes())?;

    let mut manifest = RunManifest::new("encode");
    manifest
        .param("diagrams", path_list(diagram_paths))
        .param("m", m)
        .param("q", q)
        .param("seed", seed)
        .param("T", config.epochs)
        .param("out", out.display().to_string());
    manifest
        .result(
            "initial_energy",
            *result.energy_trace.first().unwrap_or(&f64::NAN),
        )
        .result(
            "final_energy",
            *result.energy_trace.last().unwrap_or(&f64::NAN),
        )
        .result("epochs", result.epochs)
        .result("converged", result.converged);
    write_manifest(out, &manifest)
}

pub fn cmd_layout(bundle_path: &Path, svg: bool, out: &Path) -> Outcome<()> {
    let bundle = read_bundle(bundle_path)?;
    if bundle.atoms.len() != 3 {
        return Err(Failure::contract(format!(
            "planar layout requires a bundle of exactly 3 atoms, got {}",
            bundle.atoms.len()
        )));
    }
    let base = bundle_path.parent().unwrap_or_else(|| Path::new("."));
    let mut atoms = Vec::new();
    for name in &bundle.atoms {
        atoms.push(read_diagram(&base.join(name))?);
    }
    let dictionary = Dictionary::new(atoms)
        .map_err(|e| Failure::io(format!("{}: {e}", bundle_path.display())))?;
    let mut coefficients = Vec::new();
    for row in &bundle.coefficients {
        let c = CoefficientVector::new(row.clone())
            .map_err(|e| Failure::io(format!("{}: {e}", bundle_path.display())))?;
        coefficients.push(c);
    }
    let layout = planar_layout(&dictionary, &coefficients, bundle.q)?;

    let labels = if bundle.inputs.len() == layout.points.len() {
        bundle.inputs.clone()
    } else {
        (0..layout.points.len())
            .map(|i| format!("input-{i}"))
            .collect()
    };
    let mut csv = String::from("x,y,label\n");
    for (&(x, y), label) in layout.points.iter().zip(&labels) {
        csv.push_str(&format_f64(x));
        csv.push(',');
        csv.push_str(&format_f64(y));
        csv.push(',');
        csv.push_str(&label.replace(',', ";"));
        csv.push('\n');
    }
    write_atomic(out, csv.as_bytes())?;
    if svg {
        write_atomic(
            &with_suffix(out, "svg"),
            layout_svg(&layout, &labels).as_bytes(),
        )?;
    }

    let mut manifest = RunManifest::new("layout");
    manifest
        .param("bundle", bundle_path.display().to_string())
        .param("q", bundle.q)
        .param("svg", svg)
        .param("out", out.display().to_string());
    manifest.result("clamped", layout.clamped).result(
        "atom_positions",
        serde_json::json!(layout
            .atom_positions
            .iter()
            .map(|&(x, y)| vec![x, y])
            .collect::<Vec<_>>()),
    );
    write_manifest(out, &manifest)
}

pub fn cmd_plot(diagram_paths: &[PathBuf], out: &Path) -> Outcome<()> {
    let diagrams = read_diagrams(diagram_paths)?;
    let named: Vec<(String, PersistenceDiagram)> =
        labels_of(diagram_paths).into_iter().zip(diagrams).collect();
    write_atomic(out, plot_svg(&named).as_bytes())?;
    let mut manifest = RunManifest::new("plot");
    manifest
        .param("diagrams", path_list(diagram_paths))
        .param("out", out.display().to_string());
    write_manifest(out, &manifest)
}

pub fn cmd_synth(spec_path: Option<&Path>, seed: u64, out_dir: &Path) -> Outcome<()> {
    let spec_file = match spec_path {
        Some(p) => read_spec_file(p)?,
        None => SpecFile::default(),
    };
    let spec = spec_file.into_spec();
    let (diagrams, labels) = make_outlier_ensemble(&spec, seed)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", out_dir.display())))?;
    for (i, d) in diagrams.iter().enumerate() {
        let path = out_dir.join(format!("diagram-{i:03}.csv"));
        write_atomic(&path, render_diagram(d).as_bytes())?;
    }
    write_atomic(
        &out_dir.join("labels.csv"),
        render_labels(&labels).as_bytes(),
    )?;
    write_atomic(
        &out_dir.join("spec.json"),
        render_json(&formats::SpecFile::from_spec(&spec))?.as_bytes(),
    )?;

    let mut manifest = RunManifest::new("synth");
    manifest
        .param(
            "spec",
            spec_path
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "default".to_string()),
        )
        .param("seed", seed)
        .param("out_dir", out_dir.display().to_string());
    manifest
        .result("members", diagrams.len())
        .result("clusters", spec.shapes.len());
    write_atomic(
        &out_dir.join("manifest.json"),
        render_json(&manifest)?.as_bytes(),
    )?;
    Ok(())
}
