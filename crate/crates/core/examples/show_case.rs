fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let case = kypher_core::harness::random_case(seed, dir.path()).unwrap();
    for i in &case.inputs {
        let n = std::fs::read_to_string(&i.path).unwrap().lines().count();
        println!("{} {} rows", i.path, n - 1);
    }
    println!("{}", case.query);
}
