use kypher_core::harness::check_random_case;

fn seeds() -> std::ops::Range<u64> {
    let start = std::env::var("KYPHER_SEED_START").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let count = std::env::var("KYPHER_SEED_COUNT").ok().and_then(|s| s.parse().ok()).unwrap_or(150);
    start..start + count
}

#[test]
fn random_cases_match_the_oracle() {
    let mut failures = Vec::new();
    for seed in seeds() {
        let dir = tempfile::tempdir().unwrap();
        if std::env::var_os("KYPHER_TRACE").is_some() {
            eprintln!("seed {seed}");
        }
        if let Err(e) = check_random_case(seed, dir.path()) {
            failures.push(e);
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}
