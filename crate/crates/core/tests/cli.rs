use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adaptive-linf"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("adaptive-linf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn params_prints_key_values() {
    let text = stdout(bin().args(["params", "--p", "1", "--eps", "0.25", "--delta", "0.25", "--m", "2^40"]));
    for line in ["D=134283264", "R=61", "G=180", "k=45", "kstar=14", "n1=10980", "n2_max=1350", "n3_max=45"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
}

#[test]
fn gen_then_run() {
    let vector = scratch("spike.txt");
    let ledger = scratch("ledger.csv");
    stdout(bin().args(["gen", "--m", "2^20", "--gen", "spike", "--value", "0.75", "--seed", "4", "--out"]).arg(&vector));
    let file = std::fs::read_to_string(&vector).unwrap();
    assert!(file.starts_with("m 1048576 p 1\n"));

    let text = stdout(bin().args(["run", "--eps", "0.9", "--delta", "0.9", "--seed", "1", "--vector"]).arg(&vector).arg("--out").arg(&ledger));
    assert!(text.lines().any(|l| l == "linf_error=0"), "{text}");
    let index = file.lines().nth(1).unwrap().split_whitespace().next().unwrap();
    assert!(text.lines().any(|l| l == format!("K={index}")), "{text}");

    let csv = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n1,n2,n3,total");
    let fields: Vec<u64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0] + fields[1] + fields[2], fields[3]);
}

#[test]
fn trials_sweep_and_baseline_write_csv() {
    let trials = stdout(bin().args([
        "trials", "--eps", "0.9", "--delta", "0.9", "--m", "2^16", "--n-trials", "4", "--gen", "mixture", "--s", "10",
    ]));
    assert!(trials.starts_with("generator,p,eps,delta,m,trials,failures,failure_rate"));
    assert_eq!(trials.lines().count(), 2);

    let out = scratch("sweep.csv");
    stdout(bin().args(["sweep", "--ms", "2^16,2^64", "--out"]).arg(&out));
    let sweep = std::fs::read_to_string(&out).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.lines().nth(2).unwrap().starts_with("18446744073709551616,18,10980,1710,45"));

    let base = stdout(bin().args(["baseline", "--eps", "0.9", "--delta", "0.9", "--m", "2^12", "--n-trials", "2"]));
    assert!(base.starts_with("trial,adaptive_total,adaptive_error"));
    assert_eq!(base.lines().count(), 3);
}

#[test]
fn reports_errors() {
    let out = bin().args(["params", "--p", "3"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = bin().args(["params", "--m", "2^65"]).output().unwrap();
    assert!(!out.status.success());
}
