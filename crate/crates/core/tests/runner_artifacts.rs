use std::fs;

use qagents::dump::{parse_circuits, NamedCircuit};
use qagents::pqc::ParamCircuit;
use qagents::runner::{collect_report, evaluate, parse_record, render_report, run, write_artifacts, RunConfig, TaskName};

fn quick_chsh() -> RunConfig {
    let mut c = RunConfig::for_task(TaskName::Chsh);
    c.epochs = 20;
    c
}

#[test]
fn artifacts_round_trip_through_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&quick_chsh()).unwrap();
    let a = write_artifacts(&out, dir.path()).unwrap();
    for p in [&a.config, &a.log, &a.params, &a.dump, &a.record] {
        assert!(p.exists(), "{} missing", p.display());
    }
    let log = fs::read_to_string(&a.log).unwrap();
    assert_eq!(log.lines().count(), out.record.rewards.len());
    assert!(log.starts_with("epoch=0 reward="));

    let cfg = RunConfig::parse(&fs::read_to_string(&a.config).unwrap()).unwrap();
    assert_eq!(cfg, out.config);

    let circuits = parse_circuits(&fs::read_to_string(&a.params).unwrap()).unwrap();
    let r = evaluate(&cfg, &circuits).unwrap();
    assert!((r - out.row.learned).abs() < 1e-12, "{r} vs {}", out.row.learned);

    let row = parse_record(&fs::read_to_string(&a.record).unwrap()).unwrap();
    assert_eq!(row.learned, out.row.learned);
    let rows = collect_report(dir.path()).unwrap();
    assert_eq!(rows.len(), 1);
    let table = render_report(&rows);
    assert_eq!(table.lines().count(), 2);
    assert!(table.contains("CHSH"));
}

#[test]
fn rerun_writes_identical_files() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = write_artifacts(&run(&quick_chsh()).unwrap(), d1.path()).unwrap();
    let b = write_artifacts(&run(&quick_chsh()).unwrap(), d2.path()).unwrap();
    for (x, y) in [(&a.config, &b.config), (&a.log, &b.log), (&a.params, &b.params), (&a.dump, &b.dump)] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn empty_directory_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let rows = collect_report(dir.path()).unwrap();
    assert!(rows.is_empty());
    assert_eq!(render_report(&rows).lines().count(), 1);
}

#[test]
fn missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(collect_report(&dir.path().join("nope")).is_err());
}

#[test]
fn identity_grover_finds_one_item_in_four() {
    let cfg = RunConfig::for_task(TaskName::Grover);
    let (ep, _) = cfg.episode().unwrap();
    let circuits: Vec<NamedCircuit> = ep
        .interaction
        .policies()
        .iter()
        .map(|slot| NamedCircuit {
            name: None,
            circuit: ParamCircuit::from_gates(slot.n_qubits(), vec![])
                .and_then(|c| c.with_window(slot.window().to_vec()))
                .unwrap(),
            params: vec![],
        })
        .collect();
    let r = evaluate(&cfg, &circuits).unwrap();
    assert!((r - 0.25).abs() < 1e-12, "{r}");
}
