//! Runs the soundness and completeness checks over random graph families, then
//! shows that single-edge mutations of the unified graph are caught.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ucx::verify::{mutate, random_instance, verify, RandomInstanceConfig};
use ucx::{unify_graphs, Direction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RandomInstanceConfig::default();
    let mut checked = 0;
    for seed in 0..200 {
        let graphs = random_instance(seed, cfg);
        for direction in [Direction::Split, Direction::Join] {
            let u = unify_graphs(&graphs, direction)?.graph;
            let report = verify(&u, &graphs)?;
            assert!(report.passed(), "seed {seed}: {:?}", report.violations);
            checked += 1;
        }
    }
    println!("{checked} unified graphs are sound and complete");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..5 {
        let graphs = random_instance(seed, cfg);
        let u = unify_graphs(&graphs, Direction::Split)?.graph;
        if let Some((broken, mutation)) = mutate(&u, &mut rng) {
            let report = verify(&broken, &graphs)?;
            let first = report.violations.first().map(|v| v.to_string()).unwrap_or_default();
            println!("seed {seed}: {mutation:?} -> passed={} {first}", report.passed());
        }
    }
    Ok(())
}
