use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use detpart::generate;
use detpart::io::{write_hmetis, RunRecord};
use tempfile::TempDir;

fn detpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detpart"))
        .args(args)
        .env_remove("DETPART_THREADS")
        .output()
        .expect("binary runs")
}

fn write_instance(dir: &Path, name: &str, hg: &detpart::Hypergraph) -> PathBuf {
    let path = dir.join(name);
    write_hmetis(BufWriter::new(File::create(&path).unwrap()), hg).unwrap();
    path
}

fn toy(dir: &Path) -> PathBuf {
    let path = dir.join("toy.hgr");
    std::fs::write(&path, "2 4\n1 2 3\n3 4\n").unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn toy_instance_is_partitioned_optimally() {
    let dir = TempDir::new().unwrap();
    let input = toy(dir.path());
    let out = dir.path().join("toy.part");
    let json = dir.path().join("runs.jsonl");
    let o = detpart(&[
        "run", "-i", input.to_str().unwrap(), "-k", "2", "-e", "0.03", "--seed", "1",
        "--preset", "detjet", "-o", out.to_str().unwrap(), "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let part: Vec<usize> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(part.len(), 4);
    // optimum: edge {1,2,3} cut once, edge {3,4} kept whole
    assert_eq!(part[0], part[1]);
    assert_eq!(part[2], part[3]);
    assert_ne!(part[0], part[2]);
    let record = RunRecord::from_json(std::fs::read_to_string(&json).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(record.metric, 1);
    assert!(record.balanced);
    assert_eq!(record.epsilon, "0.03");
    assert_eq!(record.preset, "detjet");
    let phases: Vec<&str> = record.phase_hashes.iter().map(|p| p.phase.as_str()).collect();
    assert_eq!(phases[..2], ["coarsening", "initial"]);
    assert!(phases[2..].iter().all(|p| p.starts_with("jet[")));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let input = toy(dir.path());
    let input = input.to_str().unwrap();
    assert_eq!(detpart(&["run", "-i", input, "-k", "0"]).status.code(), Some(1));
    assert_eq!(detpart(&["run", "-i", input, "-k", "2", "--bogus"]).status.code(), Some(1));
    assert_eq!(detpart(&["run", "-i", input, "-k", "2", "-e", "x"]).status.code(), Some(1));
    assert_eq!(detpart(&["run", "-i", input, "-k", "2", "--set", "jet.nope=1"]).status.code(), Some(1));
    assert_eq!(detpart(&["run", "-i", input, "-k", "2", "--preset", "fast"]).status.code(), Some(1));
    let missing = dir.path().join("missing.hgr");
    assert_eq!(detpart(&["run", "-i", missing.to_str().unwrap(), "-k", "2"]).status.code(), Some(1));
    let broken = dir.path().join("broken.hgr");
    std::fs::write(&broken, "2 4\n1 9\n").unwrap();
    assert_eq!(detpart(&["run", "-i", broken.to_str().unwrap(), "-k", "2"]).status.code(), Some(1));
    let unknown = dir.path().join("toy.txt");
    std::fs::copy(input, &unknown).unwrap();
    let u = unknown.to_str().unwrap();
    assert_eq!(detpart(&["run", "-i", u, "-k", "2"]).status.code(), Some(1));
    assert_eq!(detpart(&["run", "-i", u, "-k", "2", "--format", "hmetis"]).status.code(), Some(0));
}

#[test]
fn imbalanced_result_exits_with_two() {
    // a single heavy vertex cannot be balanced with zero tolerance
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("heavy.hgr");
    std::fs::write(&input, "1 3 10\n1 2 3\n5\n1\n1\n").unwrap();
    let o = detpart(&["run", "-i", input.to_str().unwrap(), "-k", "2", "-e", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn repeated_runs_give_identical_partition_files() {
    let dir = TempDir::new().unwrap();
    let input = write_instance(dir.path(), "net.hgr", &generate::netlist(2000, 2400, 3));
    let mut files = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("p{i}"));
        let o = detpart(&[
            "run", "-i", input.to_str().unwrap(), "-k", "8", "--seed", "2", "--threads", threads,
            "-o", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        files.push(std::fs::read(out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn verify_accepts_both_presets() {
    let dir = TempDir::new().unwrap();
    for i in 0..5 {
        let hg = generate::random_hypergraph(60, 80, 2..5, i);
        let input = write_instance(dir.path(), &format!("toy{i}.hgr"), &hg);
        let o = detpart(&["verify", "-i", input.to_str().unwrap(), "-k", "4", "--thread-set", "1,2,4", "--repeats", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let input = write_instance(dir.path(), "grid.hgr", &generate::grid(30, 30));
    let o = detpart(&[
        "verify", "-i", input.to_str().unwrap(), "-k", "4", "--preset", "detflows", "--thread-set", "1,4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("identical across 4 runs"));
}

#[test]
fn injected_float_reduction_is_caught_at_a_jet_phase() {
    let dir = TempDir::new().unwrap();
    let input = write_instance(dir.path(), "net.hgr", &generate::netlist(3000, 3500, 11));
    let json = dir.path().join("verify.jsonl");
    let o = detpart(&[
        "verify", "-i", input.to_str().unwrap(), "-k", "8", "--thread-set", "1,2,4,8", "--repeats", "1",
        "--set", "debug.inject_float_reduction=true", "--json", json.to_str().unwrap(),
    ]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(3), "{out}");
    assert!(out.contains("DIVERGED at phase jet["), "{out}");
    // records of the runs up to the divergence are kept
    assert!(std::fs::read_to_string(json).unwrap().lines().count() >= 2);
}

#[test]
fn thread_count_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = toy(dir.path());
    let json = dir.path().join("r.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_detpart"))
        .args(["run", "-i", input.to_str().unwrap(), "-k", "2", "--json", json.to_str().unwrap()])
        .env("DETPART_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let record = RunRecord::from_json(std::fs::read_to_string(&json).unwrap().trim()).unwrap();
    assert_eq!(record.threads, 3);
}
