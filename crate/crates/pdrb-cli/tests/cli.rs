//! Behavioral tests of the `pdrb` subcommands: worked examples, file
//! formats, exit codes, and error messages, driven through the real
//! binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

use tempfile::TempDir;

fn pdrb(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_pdrb"))
        .args(args)
        .output()
        .expect("failed to spawn the pdrb binary")
}

/// Runs the binary and requires success, returning captured output.
fn ok(args: &[&str]) -> Output {
    let out = pdrb(args);
    assert!(
        out.status.success(),
        "pdrb {:?} failed with {:?}: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Runs the binary and requires the given exit code, returning stderr.
fn fails_with(args: &[&str], code: i32) -> String {
    let out = pdrb(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "pdrb {:?} exited with {:?}, stderr: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, content).expect("write test input");
    path
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn s(path: &Path) -> &str {
    path.to_str().expect("UTF-8 path")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path))
        .unwrap_or_else(|e| panic!("bad JSON in {}: {e}", path.display()))
}

// ---------------------------------------------------------------- extract

#[test]
fn extract_lists_the_merge_and_global_pairs() {
    let dir = TempDir::new().unwrap();
    let grid = write(&dir, "grid.txt", "dims: 5\n0 3 1 5 2\n");
    let out = dir.path().join("pairs.csv");
    ok(&[
        "extract",
        s(&grid),
        "--connectivity",
        "axis",
        "--out",
        s(&out),
    ]);

    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("birth,death"));
    let mut pairs: Vec<&str> = lines.collect();
    pairs.sort_unstable();
    assert_eq!(pairs, vec!["0,5", "1,3"]);

    let manifest = read_json(&dir.path().join("pairs.manifest.json"));
    assert_eq!(manifest["command"], "extract");
    assert_eq!(manifest["results"]["points"], 2);
}

#[test]
fn extract_prunes_a_constant_grid_to_the_header() {
    let dir = TempDir::new().unwrap();
    let grid = write(&dir, "flat.txt", "dims: 2 2\n7 7\n7 7\n");
    let out = dir.path().join("pairs.csv");
    ok(&["extract", s(&grid), "--epsilon", "1e-6", "--out", s(&out)]);
    assert_eq!(read(&out), "birth,death\n");
}

#[test]
fn extract_reports_a_missing_grid_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pairs.csv");
    let missing = dir.path().join("no-such-grid.txt");
    let stderr = fails_with(&["extract", s(&missing), "--out", s(&out)], 1);
    assert!(
        stderr.contains("no-such-grid.txt"),
        "stderr should name the file: {stderr}"
    );
    assert!(!out.exists(), "no output may be written on failure");
}

// ------------------------------------------------------------------- dist

#[test]
fn dist_of_a_single_diagram_is_the_zero_matrix() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.csv", "birth,death\n0,2\n");
    let out = dir.path().join("m.csv");
    ok(&["dist", s(&d), "--out", s(&out)]);
    assert_eq!(read(&out), "0\n");
}

#[test]
fn dist_writes_the_symmetric_two_diagram_matrix() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("m.csv");
    ok(&["dist", s(&a), s(&b), "--q", "2", "--svg", "--out", s(&out)]);
    assert_eq!(read(&out), "0,2\n2,0\n");

    let heatmap = read(&dir.path().join("m.svg"));
    assert!(
        heatmap.starts_with("<svg "),
        "heatmap must be an SVG document"
    );
    assert!(
        heatmap.contains("a vs b"),
        "cell tooltips carry the input labels"
    );
}

#[test]
fn dist_rejects_exponents_below_one() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.csv", "birth,death\n0,2\n");
    let out = dir.path().join("m.csv");
    let stderr = fails_with(&["dist", s(&d), "--q", "0.5", "--out", s(&out)], 2);
    assert!(
        stderr.contains("q"),
        "stderr should mention the exponent: {stderr}"
    );
}

#[test]
fn dist_reports_a_missing_diagram_file() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("gone.csv");
    let out = dir.path().join("m.csv");
    let stderr = fails_with(&["dist", s(&missing), "--out", s(&out)], 1);
    assert!(
        stderr.contains("gone.csv"),
        "stderr should name the file: {stderr}"
    );
}

// ------------------------------------------------------------------- bary

#[test]
fn bary_of_two_single_point_diagrams_is_their_midpoint() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("bary.csv");
    ok(&["bary", s(&a), s(&b), "--q", "2", "--out", s(&out)]);
    assert_eq!(read(&out), "birth,death\n0,3\n");

    let trace = read_json(&dir.path().join("bary.trace.json"));
    assert_eq!(trace["converged"], true);
    let energies = trace["energy_trace"].as_array().unwrap();
    assert!(!energies.is_empty());

    let manifest = read_json(&dir.path().join("bary.manifest.json"));
    assert_eq!(manifest["command"], "bary");
    assert_eq!(manifest["results"]["converged"], true);
}

#[test]
fn bary_echoes_a_single_input() {
    let dir = TempDir::new().unwrap();
    let input = "birth,death\n0.5,2.5\n";
    let a = write(&dir, "a.csv", input);
    let out = dir.path().join("bary.csv");
    ok(&["bary", s(&a), "--out", s(&out)]);
    assert_eq!(read(&out), input);
}

#[test]
fn bary_refuses_q1_without_the_unsafe_flag() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("bary.csv");
    let stderr = fails_with(&["bary", s(&a), s(&b), "--q", "1", "--out", s(&out)], 2);
    assert!(
        stderr.contains("instability"),
        "rejection must cite instability: {stderr}"
    );
    assert!(
        stderr.contains("--unsafe-q1"),
        "rejection must name the override: {stderr}"
    );

    // The documented override unlocks the same invocation.
    ok(&[
        "bary",
        s(&a),
        s(&b),
        "--q",
        "1",
        "--unsafe-q1",
        "--out",
        s(&out),
    ]);
    assert!(out.exists());
}

#[test]
fn bary_rejects_weights_off_the_simplex() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("bary.csv");
    let stderr = fails_with(
        &[
            "bary",
            s(&a),
            s(&b),
            "--weights",
            "0.5,0.4",
            "--out",
            s(&out),
        ],
        2,
    );
    assert!(
        stderr.contains("sum to 1"),
        "stderr should state the simplex rule: {stderr}"
    );
}

// ---------------------------------------------------------------- cluster

#[test]
fn cluster_k1_labels_everything_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let c = write(&dir, "c.csv", "birth,death\n1,5\n");
    let out = dir.path().join("labels.csv");
    ok(&["cluster", s(&a), s(&b), s(&c), "--k", "1", "--out", s(&out)]);
    assert_eq!(read(&out), "0\n0\n0\n");
    assert!(dir.path().join("labels.centroid-0.csv").exists());
}

#[test]
fn cluster_k_equals_n_isolates_each_diagram() {
    let dir = TempDir::new().unwrap();
    let names = ["a.csv", "b.csv", "c.csv", "d.csv"];
    let contents = [
        "birth,death\n0,2\n",
        "birth,death\n0,6\n",
        "birth,death\n4,9\n",
        "birth,death\n8,16\n",
    ];
    let paths: Vec<PathBuf> = names
        .iter()
        .zip(contents)
        .map(|(n, c)| write(&dir, n, c))
        .collect();
    let out = dir.path().join("labels.csv");
    let mut args = vec!["cluster"];
    args.extend(paths.iter().map(|p| s(p)));
    args.extend(["--k", "4", "--out", s(&out)]);
    ok(&args);

    let mut labels: Vec<usize> = read(&out).lines().map(|l| l.parse().unwrap()).collect();
    labels.sort_unstable();
    assert_eq!(
        labels,
        vec![0, 1, 2, 3],
        "every diagram gets its own cluster"
    );

    let manifest = read_json(&dir.path().join("labels.manifest.json"));
    assert_eq!(manifest["results"]["energy"].as_f64(), Some(0.0));
}

#[test]
fn cluster_separates_duplicate_groups() {
    let dir = TempDir::new().unwrap();
    let group_a = "birth,death\n0,2\n1,5\n";
    let group_b = "birth,death\n10,14\n";
    let a1 = write(&dir, "a1.csv", group_a);
    let a2 = write(&dir, "a2.csv", group_a);
    let b1 = write(&dir, "b1.csv", group_b);
    let b2 = write(&dir, "b2.csv", group_b);
    let out = dir.path().join("labels.csv");
    ok(&[
        "cluster",
        s(&a1),
        s(&a2),
        s(&b1),
        s(&b2),
        "--k",
        "2",
        "--out",
        s(&out),
    ]);

    let labels: Vec<usize> = read(&out).lines().map(|l| l.parse().unwrap()).collect();
    let ari = pdrb_core::adjusted_rand_index(&labels, &[0, 0, 1, 1]).unwrap();
    assert_eq!(
        ari, 1.0,
        "duplicate groups must be recovered exactly, got labels {labels:?}"
    );

    let manifest = read_json(&dir.path().join("labels.manifest.json"));
    assert_eq!(manifest["results"]["energy"].as_f64(), Some(0.0));
}

#[test]
fn cluster_rejects_k_out_of_range() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("labels.csv");
    fails_with(&["cluster", s(&a), s(&b), "--k", "0", "--out", s(&out)], 2);
    fails_with(&["cluster", s(&a), s(&b), "--k", "3", "--out", s(&out)], 2);
}

// ----------------------------------------------------------------- encode

#[test]
fn encode_self_sized_dictionary_reaches_numerical_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("enc.json");
    ok(&[
        "encode",
        s(&a),
        s(&b),
        "--m",
        "2",
        "--seed",
        "0",
        "--T",
        "2000",
        "--out",
        s(&out),
    ]);

    let bundle = read_json(&out);
    let trace = bundle["energy_trace"].as_array().unwrap();
    let initial = trace.first().unwrap().as_f64().unwrap();
    let final_energy = trace.last().unwrap().as_f64().unwrap();
    assert!(initial > 0.0, "the softmax initialisation cannot be exact");
    assert!(
        final_energy <= 1e-6 * initial,
        "one atom per input must reach numerical zero: final {final_energy} vs initial {initial}"
    );

    let atoms = bundle["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    for atom in atoms {
        let path = dir.path().join(atom.as_str().unwrap());
        assert!(
            path.exists(),
            "referenced atom file {} must exist",
            path.display()
        );
        assert!(read(&path).starts_with("birth,death\n"));
    }
    for row in bundle["coefficients"].as_array().unwrap() {
        let total: f64 = row
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .sum();
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "coefficients must stay on the simplex"
        );
    }
    assert_eq!(bundle["inputs"], serde_json::json!(["a", "b"]));
}

#[test]
fn encode_rejects_single_atom_dictionaries() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("enc.json");
    let stderr = fails_with(&["encode", s(&a), s(&b), "--m", "1", "--out", s(&out)], 2);
    assert!(
        stderr.contains("two atoms"),
        "stderr should state the atom minimum: {stderr}"
    );
}

#[test]
fn encode_rejects_q_at_most_one() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("enc.json");
    let stderr = fails_with(
        &[
            "encode",
            s(&a),
            s(&b),
            "--m",
            "2",
            "--q",
            "1",
            "--out",
            s(&out),
        ],
        2,
    );
    assert!(
        stderr.contains("q > 1"),
        "stderr should state the exponent rule: {stderr}"
    );
}

// ----------------------------------------------------------------- layout

/// Three single-point atoms whose pairwise distances form a 3-4-5
/// triangle: all inter-point matchings beat their diagonal alternatives,
/// so the distances are exactly 3, 4 and 5.
fn write_345_atoms(dir: &TempDir) -> [PathBuf; 3] {
    [
        write(dir, "atom-a.csv", "birth,death\n0,10\n"),
        write(dir, "atom-b.csv", "birth,death\n3,10\n"),
        write(dir, "atom-c.csv", "birth,death\n0,14\n"),
    ]
}

fn bundle_json(atoms: &[&str], coefficients: &str, inputs: &str) -> String {
    format!(
        concat!(
            "{{\n",
            "  \"q\": 2.0,\n",
            "  \"atoms\": {atoms},\n",
            "  \"coefficients\": {coefficients},\n",
            "  \"energy_trace\": [0.0],\n",
            "  \"inputs\": {inputs},\n",
            "  \"epochs\": 0,\n",
            "  \"converged\": true\n",
            "}}\n"
        ),
        atoms = serde_json::to_string(atoms).unwrap(),
        coefficients = coefficients,
        inputs = inputs,
    )
}

#[test]
fn layout_places_one_hot_inputs_at_the_triangle_vertices() {
    let dir = TempDir::new().unwrap();
    write_345_atoms(&dir);
    let bundle = write(
        &dir,
        "enc.json",
        &bundle_json(
            &["atom-a.csv", "atom-b.csv", "atom-c.csv"],
            "[[1,0,0],[0,1,0],[0,0,1],[0.3333333333333333,0.3333333333333333,0.3333333333333333]]",
            "[\"i0\",\"i1\",\"i2\",\"mix\"]",
        ),
    );
    let out = dir.path().join("layout.csv");
    ok(&["layout", s(&bundle), "--svg", "--out", s(&out)]);

    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,label"));
    let rows: Vec<(f64, f64, String)> = lines
        .map(|l| {
            let mut fields = l.split(',');
            (
                fields.next().unwrap().parse().unwrap(),
                fields.next().unwrap().parse().unwrap(),
                fields.next().unwrap().to_string(),
            )
        })
        .collect();
    let expected = [
        (0.0, 0.0, "i0"),
        (3.0, 0.0, "i1"),
        (0.0, 4.0, "i2"),
        (1.0, 4.0 / 3.0, "mix"),
    ];
    assert_eq!(rows.len(), expected.len());
    for ((x, y, label), (ex, ey, elabel)) in rows.iter().zip(expected) {
        assert!(
            (x - ex).abs() <= 1e-9 && (y - ey).abs() <= 1e-9,
            "{label} placed at ({x}, {y}), expected ({ex}, {ey})"
        );
        assert_eq!(label, elabel);
    }

    let manifest = read_json(&dir.path().join("layout.manifest.json"));
    assert_eq!(manifest["results"]["clamped"], false);
    let vertices = manifest["results"]["atom_positions"].as_array().unwrap();
    let expected_vertices = [(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)];
    for (vertex, (ex, ey)) in vertices.iter().zip(expected_vertices) {
        let x = vertex[0].as_f64().unwrap();
        let y = vertex[1].as_f64().unwrap();
        assert!(
            (x - ex).abs() <= 1e-9 && (y - ey).abs() <= 1e-9,
            "vertex ({x}, {y}) != ({ex}, {ey})"
        );
    }

    let svg = read(&dir.path().join("layout.svg"));
    assert!(
        svg.contains("atom-0") && svg.contains("atom-2"),
        "vertices must be labelled"
    );
}

#[test]
fn layout_rejects_bundles_without_three_atoms() {
    let dir = TempDir::new().unwrap();
    write(&dir, "atom-a.csv", "birth,death\n0,10\n");
    write(&dir, "atom-b.csv", "birth,death\n3,10\n");
    let bundle = write(
        &dir,
        "enc.json",
        &bundle_json(
            &["atom-a.csv", "atom-b.csv"],
            "[[1,0],[0,1]]",
            "[\"i0\",\"i1\"]",
        ),
    );
    let out = dir.path().join("layout.csv");
    let stderr = fails_with(&["layout", s(&bundle), "--out", s(&out)], 2);
    assert!(
        stderr.contains("3 atoms"),
        "stderr should state the atom-count rule: {stderr}"
    );
}

// ------------------------------------------------------------------- plot

#[test]
fn plot_draws_only_the_diagonal_for_an_empty_diagram() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "empty.csv", "birth,death\n");
    let out = dir.path().join("plot.svg");
    ok(&["plot", s(&d), "--out", s(&out)]);
    let svg = read(&out);
    assert!(
        svg.contains("stroke-dasharray"),
        "the diagonal line must be drawn"
    );
    assert!(!svg.contains("<circle"), "an empty diagram has no markers");
    assert!(
        svg.contains(">birth</text>") && svg.contains(">death</text>"),
        "axes must be labelled"
    );
}

#[test]
fn plot_marks_a_single_pair_above_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "one.csv", "birth,death\n0,5\n");
    let out = dir.path().join("plot.svg");
    ok(&["plot", s(&d), "--out", s(&out)]);
    let svg = read(&out);
    assert_eq!(
        svg.matches("<circle").count(),
        1,
        "exactly one marker for one pair"
    );
}

#[test]
fn plot_cycles_palette_colors_with_legend_in_input_order() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "birth,death\n0,2\n1,3\n");
    let b = write(&dir, "b.csv", "birth,death\n0,4\n");
    let out = dir.path().join("plot.svg");
    ok(&["plot", s(&a), s(&b), "--out", s(&out)]);
    let svg = read(&out);
    assert!(
        svg.contains("#1b9e77") && svg.contains("#d95f02"),
        "two palette colors expected"
    );
    let first = svg
        .find(">a</text>")
        .expect("legend entry for the first input");
    let second = svg
        .find(">b</text>")
        .expect("legend entry for the second input");
    assert!(first < second, "legend entries must keep the input order");
    assert_eq!(
        svg.matches("<circle").count(),
        3,
        "one marker per pair across both files"
    );
}

// ------------------------------------------------------------------ synth

#[test]
fn synth_default_ensemble_writes_twelve_members() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("ensemble");
    ok(&["synth", "--seed", "0", "--out-dir", s(&out_dir)]);

    for i in 0..12 {
        assert!(
            out_dir.join(format!("diagram-{i:03}.csv")).exists(),
            "diagram {i} missing"
        );
    }
    let labels = read(&out_dir.join("labels.csv"));
    assert_eq!(labels, "0\n0\n0\n0\n1\n1\n1\n1\n2\n2\n2\n2\n");
    assert!(out_dir.join("spec.json").exists());
    assert!(out_dir.join("manifest.json").exists());
}
