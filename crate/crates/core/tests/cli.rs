use std::process::{Command, Output};

fn vir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vir")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn tau_prints_the_value() {
    let o = vir(&["tau", "--genus", "2", "--ks", "2,2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "7/240\n");
}

#[test]
fn libgober_on_p3() {
    let o = vir(&["verify", "libgober", "--model", "P3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS 5 = 5"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(vir(&["tau", "--genus", "0", "--ks", "0,0"]).status.code(), Some(2));
    assert_eq!(vir(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(vir(&["verify", "libgober", "--model", "P9"]).status.code(), Some(2));
    let o = vir(&["genus0", "--check", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.gw");
    let text = stdout(&vir(&["point-table", "--genus", "1", "--ksum", "6"]));
    let bad: String = text
        .lines()
        .map(|l| if l == "1; ; (1,0); 1/24" { "1; ; (1,0); 1/12".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    assert_ne!(bad, text.trim_end(), "fixture line not found:\n{text}");
    std::fs::write(&path, bad).unwrap();
    let o = vir(&["residual", "--table", path.to_str().unwrap(), "--kmax", "2", "--msum", "3"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn output_is_byte_stable() {
    let args = ["verify", "virasoro", "--model", "P2", "--kmax", "2", "--cutoff", "8"];
    let a = vir(&args);
    let b = vir(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = vir(&["--threads", "1", "verify", "virasoro", "--model", "P2", "--kmax", "2", "--cutoff", "8"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("memo.txt");
    let c = cache.to_str().unwrap();
    let first = vir(&["--cache", c, "tau", "--genus", "3", "--ks", "2,2,3,3"]);
    assert_eq!(first.status.code(), Some(0));
    let saved = std::fs::read_to_string(&cache).unwrap();
    assert!(saved.lines().any(|l| l.starts_with("3;")), "{saved}");
    let second = vir(&["--cache", c, "tau", "--genus", "3", "--ks", "2,2,3,3"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn tsv_format() {
    let o = vir(&["--format", "tsv", "verify", "libgober", "--model", "P2"]);
    assert_eq!(stdout(&o), "libgober\tPASS\t2 = 2\n");
    let o = vir(&["--format", "tsv", "tau-table", "--genus", "1", "--dim-max", "2"]);
    assert!(stdout(&o).lines().all(|l| l.split('\t').count() == 3), "{}", stdout(&o));
}

#[test]
fn genus0_on_point_and_table() {
    let o = vir(&["genus0", "--degree", "3", "--indices", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/p1_genus0.gw");
    let o = vir(&["genus0", "--table", fixture, "--check", "wdvv", "--degree", "3", "--indices", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn builtin_models_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in stdout(&vir(&["model", "list"])).lines() {
        let path = dir.path().join(format!("{name}.model"));
        std::fs::write(&path, stdout(&vir(&["model", "builtin", name, "--emit"]))).unwrap();
        let o = vir(&["model", "validate", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}
