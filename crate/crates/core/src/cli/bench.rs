//! Timing of per-partition discovery and polynomial fits of time against
//! activity count.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discovery::{backend_by_name, discover_cx_with, DiscoveryConfig, DiscoveryError};
use crate::event_log::{partition, Partition};
use crate::verify::{gen_synthetic_log, Noise, SyntheticSpec, VerifyError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub partition: String,
    pub activities: usize,
    pub traces: usize,
    pub repetitions: usize,
    pub median_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub degree: usize,
    /// Coefficients from the constant term upwards.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub cubic: Option<Fit>,
    pub linear: Option<Fit>,
    /// Set when the fits were skipped.
    pub notice: Option<String>,
}

/// Fits need at least this many distinct activity counts.
pub const MIN_DISTINCT_SIZES: usize = 4;

/// Least-squares polynomial fit of `y` on `x`.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Option<Fit> {
    if x.len() != y.len() || x.len() <= degree {
        return None;
    }
    // Scale x to [0, 1] to keep the Vandermonde matrix well conditioned.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(x.len(), degree + 1, |r, c| (x[r] / scale).powi(c as i32));
    let b = DVector::from_column_slice(y);
    let beta = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let predicted = &a * &beta;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(predicted.iter()).map(|(v, p)| (v - p).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let coefficients = beta
        .iter()
        .enumerate()
        .map(|(k, c)| c / scale.powi(k as i32))
        .collect();
    Some(Fit {
        degree,
        coefficients,
        r_squared,
    })
}

/// Times discovery on each partition `repetitions` times (sequentially) and
/// fits cubic and linear curves to the medians.
pub fn bench_partitions(
    partitions: &[Partition],
    config: &DiscoveryConfig,
    repetitions: usize,
) -> Result<BenchReport, DiscoveryError> {
    config.validate()?;
    let backend = backend_by_name(&config.backend)?;
    let repetitions = repetitions.max(1);
    let mut rows = Vec::with_capacity(partitions.len());
    for p in partitions {
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            match discover_cx_with(p, config, backend.as_ref()) {
                Ok(_) | Err(DiscoveryError::TooFewTraces { .. }) => {}
                Err(e) => return Err(e),
            }
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        let mid = times.len() / 2;
        let median = if times.len() % 2 == 1 {
            times[mid]
        } else {
            (times[mid - 1] + times[mid]) / 2.0
        };
        rows.push(BenchRow {
            partition: p.label(),
            activities: p.activity_set.len(),
            traces: p.len(),
            repetitions,
            median_seconds: median,
        });
    }
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.activities).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let (cubic, linear, notice) = if sizes.len() < MIN_DISTINCT_SIZES {
        (
            None,
            None,
            Some(format!(
                "only {} distinct activity counts; at least {MIN_DISTINCT_SIZES} are needed for a fit",
                sizes.len()
            )),
        )
    } else {
        let x: Vec<f64> = rows.iter().map(|r| r.activities as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.median_seconds).collect();
        (fit_polynomial(&x, &y, 3), fit_polynomial(&x, &y, 1), None)
    };
    Ok(BenchReport {
        rows,
        cubic,
        linear,
        notice,
    })
}

/// One synthetic partition per requested activity count: a random DAG with
/// about two parents per activity, uniform noise.
pub fn synthetic_partitions(sizes: &[usize], traces: usize, seed: u64) -> Result<Vec<Partition>, VerifyError> {
    let mut out = Vec::with_capacity(sizes.len());
    for (i, &k) in sizes.iter().enumerate() {
        let names: Vec<String> = (0..k).map(|j| format!("A{j:03}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let density = if k > 1 { (4.0 / (k as f64 - 1.0)).min(0.5) } else { 0.0 };
        let spec = SyntheticSpec::random_dag(&refs, density, traces, seed.wrapping_add(i as u64))
            .with_noise(Noise::Uniform { scale: 10.0 });
        let log = gen_synthetic_log(&spec)?;
        out.extend(partition(&log, None, false).expect("no variant selection"));
    }
    Ok(out)
}

pub fn write_csv<W: Write>(report: &BenchReport, sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
