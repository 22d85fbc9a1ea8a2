//! Acceptance criterion for the command-line layer: every command,
//! re-run with identical inputs and seed, produces byte-identical output
//! files regardless of the `PDRB_THREADS` worker cap. Prints an
//! `ACCEPTANCE <n> <name>: PASS|FAIL` line (visible with
//! `cargo test -- --nocapture`) and then asserts that no part failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

/// Worker-cap settings every command is repeated under; `None` leaves
/// `PDRB_THREADS` unset (auto). The first two entries give a plain
/// re-run with an unchanged environment.
const THREAD_SETTINGS: [Option<&str>; 4] = [None, None, Some("1"), Some("4")];

fn run(args: &[&str], threads: Option<&str>) {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_pdrb"));
    cmd.args(args).env_remove("PDRB_THREADS");
    if let Some(t) = threads {
        cmd.env("PDRB_THREADS", t);
    }
    let out = cmd.output().expect("failed to spawn the pdrb binary");
    assert!(
        out.status.success(),
        "pdrb {:?} (PDRB_THREADS={:?}) failed: {}",
        args,
        threads,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Name -> content of every file directly inside `dir`.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).expect("read output directory") {
        let entry = entry.expect("directory entry");
        if entry.file_type().expect("file type").is_file() {
            let name = entry.file_name().into_string().expect("UTF-8 file name");
            files.insert(name, fs::read(entry.path()).expect("read output file"));
        }
    }
    files
}

fn diff_names(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for key in a.keys().chain(b.keys()) {
        if a.get(key) != b.get(key) && !names.contains(key) {
            names.push(key.clone());
        }
    }
    names
}

/// Runs one command once per thread setting, snapshotting its output
/// directory after every run, and records any byte difference.
fn check_command(label: &str, args: &[&str], out_dir: &Path, problems: &mut Vec<String>) {
    fs::create_dir_all(out_dir).expect("create output directory");
    let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
    for threads in THREAD_SETTINGS {
        run(args, threads);
        let current = snapshot(out_dir);
        if current.is_empty() {
            problems.push(format!("{label}: no output files found"));
            return;
        }
        match &reference {
            None => reference = Some(current),
            Some(first) => {
                let differing = diff_names(first, &current);
                if !differing.is_empty() {
                    problems.push(format!(
                        "{label}: run with PDRB_THREADS={threads:?} changed {}",
                        differing.join(", ")
                    ));
                }
            }
        }
    }
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).expect("write test input");
    path
}

fn s(path: &Path) -> &str {
    path.to_str().expect("UTF-8 path")
}

#[test]
fn acceptance_10_every_command_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let inputs = dir.path().join("inputs");
    fs::create_dir_all(&inputs).unwrap();

    let grid = write(&inputs, "grid.txt", "dims: 3 3\n0 2 1\n4 9 3\n1 5 2\n");
    let d0 = write(&inputs, "d0.csv", "birth,death\n0,2\n1,5\n");
    let d1 = write(&inputs, "d1.csv", "birth,death\n0,4\n");
    let d2 = write(&inputs, "d2.csv", "birth,death\n0.5,2.5\n2,3\n");
    let d3 = write(&inputs, "d3.csv", "birth,death\n3,8\n");
    write(&inputs, "atom-a.csv", "birth,death\n0,10\n");
    write(&inputs, "atom-b.csv", "birth,death\n3,10\n");
    write(&inputs, "atom-c.csv", "birth,death\n0,14\n");
    let bundle = write(
        &inputs,
        "bundle.json",
        concat!(
            "{\n",
            "  \"q\": 2.0,\n",
            "  \"atoms\": [\"atom-a.csv\", \"atom-b.csv\", \"atom-c.csv\"],\n",
            "  \"coefficients\": [[1,0,0],[0.2,0.5,0.3]],\n",
            "  \"energy_trace\": [0.0],\n",
            "  \"inputs\": [\"i0\",\"i1\"],\n",
            "  \"epochs\": 0,\n",
            "  \"converged\": true\n",
            "}\n"
        ),
    );

    let mut problems = Vec::new();
    let sub = |name: &str| dir.path().join(name);

    let ex = sub("extract");
    check_command(
        "extract",
        &[
            "extract",
            s(&grid),
            "--top-k",
            "2",
            "--epsilon",
            "1e-9",
            "--out",
            s(&ex.join("out.csv")),
        ],
        &ex,
        &mut problems,
    );

    let di = sub("dist");
    check_command(
        "dist",
        &[
            "dist",
            s(&d0),
            s(&d1),
            s(&d2),
            s(&d3),
            "--q",
            "1.5",
            "--svg",
            "--out",
            s(&di.join("out.csv")),
        ],
        &di,
        &mut problems,
    );

    let ba = sub("bary");
    check_command(
        "bary",
        &[
            "bary",
            s(&d0),
            s(&d1),
            s(&d2),
            "--q",
            "1.5",
            "--T",
            "10",
            "--epsilon",
            "1e-9",
            "--weights",
            "0.5,0.3,0.2",
            "--out",
            s(&ba.join("out.csv")),
        ],
        &ba,
        &mut problems,
    );

    let cl = sub("cluster");
    check_command(
        "cluster",
        &[
            "cluster",
            s(&d0),
            s(&d1),
            s(&d2),
            s(&d3),
            "--k",
            "2",
            "--seed",
            "3",
            "--T",
            "5",
            "--out",
            s(&cl.join("out.csv")),
        ],
        &cl,
        &mut problems,
    );

    let en = sub("encode");
    check_command(
        "encode",
        &[
            "encode",
            s(&d0),
            s(&d1),
            "--m",
            "2",
            "--q",
            "2",
            "--seed",
            "1",
            "--T",
            "40",
            "--out",
            s(&en.join("out.json")),
        ],
        &en,
        &mut problems,
    );

    let la = sub("layout");
    check_command(
        "layout",
        &[
            "layout",
            s(&bundle),
            "--svg",
            "--out",
            s(&la.join("out.csv")),
        ],
        &la,
        &mut problems,
    );

    let pl = sub("plot");
    check_command(
        "plot",
        &[
            "plot",
            s(&d0),
            s(&d1),
            s(&d2),
            "--out",
            s(&pl.join("out.svg")),
        ],
        &pl,
        &mut problems,
    );

    let sy = sub("synth");
    check_command(
        "synth",
        &["synth", "--seed", "0", "--out-dir", s(&sy)],
        &sy,
        &mut problems,
    );

    if problems.is_empty() {
        println!("ACCEPTANCE 10 end-to-end-determinism: PASS");
    } else {
        println!("ACCEPTANCE 10 end-to-end-determinism: FAIL");
    }
    assert!(
        problems.is_empty(),
        "criterion 10 (end-to-end-determinism) failed:\n{}",
        problems.join("\n")
    );
}
