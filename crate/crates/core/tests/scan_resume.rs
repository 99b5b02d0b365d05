use std::fs;
use std::io::Write;

use qbound::scanner::{run_scan, run_scan_to_path, OrderPolicy, RecordFormat, ScanOptions, ScanTask};
use qbound::Error;

fn task() -> ScanTask {
    let mut task = ScanTask::new(10_000_000, 10_040_000, 2).with_reference(2, 1e7, 2.408);
    task.order_policy = OrderPolicy::AllDivisorsUpTo(6);
    task.shard_width = 1_000;
    task
}

fn uninterrupted(format: RecordFormat) -> (Vec<u8>, String) {
    let mut out = Vec::new();
    let summary = run_scan(&task(), &ScanOptions::default(), format, &mut out).unwrap();
    (out, summary.to_json())
}

#[test]
fn interrupted_scan_resumes_to_identical_output() {
    for format in [RecordFormat::Csv, RecordFormat::Jsonl] {
        let dir = tempfile::tempdir().unwrap();
        let output = dir.path().join("records");
        let checkpoint = dir.path().join("scan.checkpoint");
        let half = task().shard_count() / 2;

        let first = run_scan_to_path(
            &task(),
            &ScanOptions {
                threads: 2,
                checkpoint: Some(checkpoint.clone()),
                stop_after_shards: Some(half),
            },
            format,
            &output,
        )
        .unwrap();
        assert!(!first.complete);
        assert!(checkpoint.exists());

        // A crash after the last checkpoint leaves a partial line behind.
        fs::OpenOptions::new()
            .append(true)
            .open(&output)
            .unwrap()
            .write_all(b"10039999,2,partial")
            .unwrap();

        let resumed = run_scan_to_path(
            &task(),
            &ScanOptions {
                threads: 3,
                checkpoint: Some(checkpoint.clone()),
                stop_after_shards: None,
            },
            format,
            &output,
        )
        .unwrap();
        assert!(resumed.complete);

        let (expected, json) = uninterrupted(format);
        assert_eq!(fs::read(&output).unwrap(), expected);
        assert_eq!(resumed.to_json(), json);
    }
}

#[test]
fn checkpoint_for_another_task_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("records.csv");
    let checkpoint = dir.path().join("scan.checkpoint");
    let options = ScanOptions {
        threads: 1,
        checkpoint: Some(checkpoint.clone()),
        stop_after_shards: Some(3),
    };
    run_scan_to_path(&task(), &options, RecordFormat::Csv, &output).unwrap();
    let before = fs::read(&output).unwrap();

    let mut other = task();
    other.n_max = 1;
    other.reference = None;
    let err = run_scan_to_path(&other, &options, RecordFormat::Csv, &output).unwrap_err();
    assert!(matches!(err, Error::Checkpoint(_)), "{err}");
    assert_eq!(fs::read(&output).unwrap(), before);
}

#[test]
fn scan_without_checkpoint_matches_in_memory_scan() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("records.jsonl");
    fs::write(&output, "stale contents\n").unwrap();
    let summary = run_scan_to_path(&task(), &ScanOptions::default(), RecordFormat::Jsonl, &output)
        .unwrap();
    let (expected, json) = uninterrupted(RecordFormat::Jsonl);
    assert_eq!(fs::read(&output).unwrap(), expected);
    assert_eq!(summary.to_json(), json);
    assert!(summary.complete);
    assert_eq!(summary.aggregate.violations, 0);
}

#[test]
fn corrupt_checkpoint_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("records.csv");
    let checkpoint = dir.path().join("scan.checkpoint");
    fs::write(&output, "").unwrap();
    fs::write(&checkpoint, "{not json").unwrap();
    let options = ScanOptions {
        checkpoint: Some(checkpoint),
        ..ScanOptions::default()
    };
    let err = run_scan_to_path(&task(), &options, RecordFormat::Csv, &output).unwrap_err();
    assert!(matches!(err, Error::Checkpoint(_)));
}
