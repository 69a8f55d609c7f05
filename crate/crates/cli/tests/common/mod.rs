#![allow(dead_code)]

use std::path::{Path, PathBuf};

use claimify_cli::{run, Cli, RunSummary};
use clap::Parser;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn claimify(global: &[&str], args: &[&str]) -> anyhow::Result<RunSummary> {
    let argv: Vec<&str> = std::iter::once("claimify").chain(global.iter().copied()).chain(args.iter().copied()).collect();
    run(&Cli::try_parse_from(argv)?)
}

/// extract, validate, the three evaluations and report over the e2e fixture.
pub fn run_chain(dir: &Path, cache: &Path, provider: &str) -> anyhow::Result<Vec<RunSummary>> {
    let (d, c, cfg) = (dir.to_str().unwrap(), cache.to_str().unwrap(), fixture("e2e/config.toml"));
    let global = ["--dir", d, "--cache", c, "--provider", provider, "--config", cfg.to_str().unwrap(), "--workers", "4"];
    let dataset = fixture("e2e/dataset.jsonl");
    let gold = fixture("e2e/gold.jsonl");
    let baseline = fixture("e2e/baseline_claims.jsonl");
    let own = dir.join("claims.jsonl");
    let (ds, gd, bl, ow) = (dataset.to_str().unwrap(), gold.to_str().unwrap(), baseline.to_str().unwrap(), own.to_str().unwrap());
    let claims = ["--dataset", ds, "--claims", ow, bl];
    let with_gold = |kind: &'static str| -> Vec<&str> { ["evaluate", kind].into_iter().chain(claims).chain(["--gold", gd]).collect() };
    Ok(vec![
        claimify(&global, &["extract", "--dataset", ds])?,
        claimify(&global, &[&["validate"][..], &claims].concat())?,
        claimify(&global, &[&["evaluate", "entailment"][..], &claims].concat())?,
        claimify(&global, &with_gold("coverage"))?,
        claimify(&global, &with_gold("decontext"))?,
        claimify(&global, &["report"])?,
    ])
}

/// Names of the JSON-Lines outputs in `dir`, sorted.
pub fn jsonl_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".jsonl"))
        .collect();
    v.sort();
    v
}

/// First differing file between two work directories, if any.
pub fn first_difference(a: &Path, b: &Path) -> Option<String> {
    let (fa, fb) = (jsonl_files(a), jsonl_files(b));
    if fa != fb {
        return Some(format!("file sets differ: {fa:?} vs {fb:?}"));
    }
    fa.into_iter().find(|n| std::fs::read(a.join(n)).unwrap() != std::fs::read(b.join(n)).unwrap())
}
