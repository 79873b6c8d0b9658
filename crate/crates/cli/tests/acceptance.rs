use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use bergman_cli::config::{DomainName, FunctionSpec, RunConfig};
use bergman_cli::report::Artifacts;
use bergman_cli::suite::{suite, SuiteReport};
use bergman_extremal::FunctionKind;

fn config() -> RunConfig {
    RunConfig {
        domain: DomainName::Halfplane,
        n: 1,
        function: FunctionSpec { kind: FunctionKind::Zero, scale: 1.0 },
        params: Default::default(),
        ladder: None,
        quad: None,
        payload: Default::default(),
        seed: 0,
    }
}

fn run_in_pool(threads: usize, dir: &Path) -> SuiteReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let mut art = Artifacts::new(dir, &config()).unwrap();
        suite(&config(), &mut art).unwrap()
    })
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn acceptance() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_in_pool(1, a.path());
    let second = run_in_pool(4, b.path());
    let (fa, fb) = (files(a.path()), files(b.path()));
    let identical = !fa.is_empty() && fa == fb;

    let mut stdout = std::io::stdout().lock();
    let mut failed = Vec::new();
    for c in &first.criteria {
        let pass = if c.id == 13 { c.pass && identical } else { c.pass };
        let detail = if c.id == 13 {
            format!("{} artifacts byte-identical across 1 and 4 threads: {identical}", fa.len())
        } else {
            c.detail.to_string()
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        writeln!(stdout, "criterion {:>2} {:<26} {verdict}  {detail}", c.id, c.name).unwrap();
        if !pass {
            failed.push(c.id);
        }
    }
    assert_eq!(first.criteria.len(), 13);
    assert_eq!(second.criteria.len(), 13);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
