//! Times discovery on synthetic partitions of growing width and fits cubic and
//! linear curves to the timings.

use ucx::cli::bench::{bench_partitions, synthetic_partitions};
use ucx::discovery::DiscoveryConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sizes = [5, 10, 15, 20, 25, 30];
    let parts = synthetic_partitions(&sizes, 500, 1)?;
    let report = bench_partitions(&parts, &DiscoveryConfig::default(), 3)?;
    for row in &report.rows {
        println!("{:>3} activities  {:>9.4} s", row.activities, row.median_seconds);
    }
    if let (Some(cubic), Some(linear)) = (&report.cubic, &report.linear) {
        println!("cubic R^2 {:.4}, linear R^2 {:.4}", cubic.r_squared, linear.r_squared);
    }
    Ok(())
}
