fn main() {
    let n: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let (mut err, mut empty, mut nonempty, mut fail, mut skipped) = (0, 0, 0, 0, 0);
    let t = std::time::Instant::now();
    for seed in 0..n {
        let dir = tempfile::tempdir().unwrap();
        match kypher_core::harness::check_random_case(seed, dir.path()) {
            Ok(o) if o.skipped => skipped += 1,
            Ok(o) => match o.rows {
                None => err += 1,
                Some(0) => empty += 1,
                Some(_) => nonempty += 1,
            },
            Err(e) => {
                fail += 1;
                println!("{e}");
            }
        }
    }
    println!("skipped {skipped} errors {err} empty {empty} nonempty {nonempty} fail {fail} in {:?}", t.elapsed());
}
