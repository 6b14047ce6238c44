use moebius::verify::{run_all, SuiteConfig};

fn run(k: usize, seed: u64) {
    let cfg = SuiteConfig { k, seed, ..SuiteConfig::default() };
    let start = std::time::Instant::now();
    let (reports, summary) = run_all(&cfg).unwrap();
    for r in &reports {
        if !r.pass {
            println!("FAIL k={k} seed={seed} {} residual {:e} witness {:?}", r.tag, r.worst_residual, r.witness);
        }
    }
    println!("k={k} seed={seed}: {}/{} passed in {:?}", summary.passed, summary.total, start.elapsed());
    assert_eq!(summary.failed, 0);
}

#[test]
fn k2_default() { run(2, 17); }
#[test]
fn k3_default() { run(3, 17); }
#[test]
fn k2_seed7() { run(2, 7); }
#[test]
fn k3_seed99() { run(3, 99); }
#[test]
fn k4_default() { run(4, 17); }
