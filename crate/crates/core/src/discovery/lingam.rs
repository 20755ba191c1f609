//! DirectLiNGAM-style causal ordering; edges from OLS after BIC backward elimination.

use nalgebra::{DMatrix, DVector};

use super::{BackendInput, DiscoveryBackend, DiscoveryError, EstimatedEdge};

const K1: f64 = 79.047;
const K2: f64 = 7.4129;
const GAMMA: f64 = 0.37457;

#[derive(Debug, Clone, Copy, Default)]
pub struct DirectLingam;

impl DiscoveryBackend for DirectLingam {
    fn name(&self) -> &str {
        "direct-lingam"
    }

    fn discover(&self, input: &BackendInput<'_>) -> Result<Vec<EstimatedEdge>, DiscoveryError> {
        let order = causal_order(input.columns, input.forbidden);
        estimate_edges(input, &order)
    }
}

/// Maximum-entropy approximation of differential entropy for a standardized sample.
pub fn entropy(u: &[f64]) -> f64 {
    let n = u.len() as f64;
    let (mut lc, mut ge) = (0.0, 0.0);
    for &x in u {
        lc += log_cosh(x);
        ge += x * (-x * x / 2.0).exp();
    }
    let lc = lc / n - GAMMA;
    let ge = ge / n;
    (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0 - K1 * lc * lc - K2 * ge * ge
}

/// Distance of a sample's distribution from the Gaussian, in nats; near zero
/// for Gaussian data, where causal direction is not identifiable.
pub fn negentropy(x: &[f64]) -> f64 {
    (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0 - entropy(&standardize(x))
}

fn log_cosh(x: f64) -> f64 {
    // Stable for large |x|: ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2.
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn standardize(x: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(x);
    if std > 0.0 {
        x.iter().map(|v| (v - mean) / std).collect()
    } else {
        vec![0.0; x.len()]
    }
}

/// Residual of `xi` after linear regression on `xj` (both centred).
fn residual(xi: &[f64], xj: &[f64]) -> Vec<f64> {
    let n = xi.len() as f64;
    let (mi, mj) = (xi.iter().sum::<f64>() / n, xj.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut var = 0.0;
    for (a, b) in xi.iter().zip(xj) {
        cov += (a - mi) * (b - mj);
        var += (b - mj) * (b - mj);
    }
    let beta = if var > 0.0 { cov / var } else { 0.0 };
    xi.iter().zip(xj).map(|(a, b)| (a - mi) - beta * (b - mj)).collect()
}

/// Entropy difference whose sign says whether `i` looks exogenous relative to `j`
/// (positive favours `i` as the cause).
fn pair_score(xi: &[f64], xj: &[f64]) -> f64 {
    let ri_j = standardize(&residual(xi, xj));
    let rj_i = standardize(&residual(xj, xi));
    (entropy(xj) + entropy(&ri_j)) - (entropy(xi) + entropy(&rj_i))
}

/// Causal order over `columns`. `forbidden[i][j]` marks a forbidden edge i → j;
/// a variable is not chosen ahead of another it may not cause while the reverse
/// edge is allowed, unless no variable qualifies.
pub fn causal_order(columns: &[Vec<f64>], forbidden: &[Vec<bool>]) -> Vec<usize> {
    let p = columns.len();
    let mut data: Vec<Vec<f64>> = columns.iter().map(|c| standardize(c)).collect();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut order = Vec::with_capacity(p);
    while !remaining.is_empty() {
        let mut candidates: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| {
                !remaining
                    .iter()
                    .any(|&j| j != i && forbidden[i][j] && !forbidden[j][i])
            })
            .collect();
        if candidates.is_empty() {
            candidates = remaining.clone();
        }
        let chosen = if candidates.len() == 1 {
            candidates[0]
        } else {
            let std: Vec<Option<Vec<f64>>> = (0..p)
                .map(|i| remaining.contains(&i).then(|| standardize(&data[i])))
                .collect();
            let mut best = candidates[0];
            let mut best_score = f64::NEG_INFINITY;
            for &i in &candidates {
                let xi = std[i].as_ref().expect("candidate is remaining");
                let mut m = 0.0;
                for &j in &remaining {
                    if j == i {
                        continue;
                    }
                    let xj = std[j].as_ref().expect("remaining");
                    let d = pair_score(xi, xj).min(0.0);
                    m += d * d;
                }
                if -m > best_score {
                    best_score = -m;
                    best = i;
                }
            }
            best
        };
        order.push(chosen);
        remaining.retain(|&i| i != chosen);
        let pivot = data[chosen].clone();
        for &i in &remaining {
            data[i] = residual(&data[i], &pivot);
        }
    }
    order
}

/// Regresses each variable on its permitted predecessors in `order` and keeps
/// coefficients at or above the pruning threshold.
/// Least-squares fits over a precomputed Gram matrix, so subset regressions
/// never touch the rows again.
struct Gram {
    g: DMatrix<f64>,
    n: usize,
}

/// Coefficients, residual sum of squares, and the RSS increase from dropping
/// each regressor in turn.
struct Fit {
    beta: DVector<f64>,
    rss: f64,
    drop_cost: Vec<f64>,
}

impl Gram {
    fn new(data: &[Vec<f64>]) -> Self {
        let n = data.first().map_or(0, Vec::len);
        let x = DMatrix::from_fn(n, data.len(), |r, c| data[c][r]);
        Gram { g: x.transpose() * x, n }
    }

    fn fit(&self, causes: &[usize], target: usize) -> Result<Fit, DiscoveryError> {
        let tt = self.g[(target, target)];
        if causes.is_empty() {
            return Ok(Fit {
                beta: DVector::zeros(0),
                rss: tt,
                drop_cost: Vec::new(),
            });
        }
        let k = causes.len();
        let gss = DMatrix::from_fn(k, k, |i, j| self.g[(causes[i], causes[j])]);
        let gst = DVector::from_fn(k, |i, _| self.g[(causes[i], target)]);
        let inv = gss
            .svd(true, true)
            .pseudo_inverse(1e-10)
            .map_err(|e| DiscoveryError::Numerical(e.to_string()))?;
        let beta = &inv * &gst;
        let rss = (tt - beta.dot(&gst)).max(0.0);
        let drop_cost = (0..k)
            .map(|i| {
                let d = inv[(i, i)];
                if d > 0.0 {
                    beta[i] * beta[i] / d
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Fit { beta, rss, drop_cost })
    }
}

fn bic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(f64::MIN_POSITIVE) / n).ln() + k as f64 * n.ln()
}

/// Backward elimination: drop the predecessor whose removal lowers BIC the
/// most, until no removal helps. Returns the kept predecessors and their fit.
fn select_by_bic(gram: &Gram, causes: &[usize], target: usize) -> Result<(Vec<usize>, Fit), DiscoveryError> {
    let mut kept = causes.to_vec();
    let mut fit = gram.fit(&kept, target)?;
    while !kept.is_empty() {
        let (k, cost) = fit
            .drop_cost
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if bic(fit.rss + cost, gram.n, kept.len() - 1) >= bic(fit.rss, gram.n, kept.len()) {
            break;
        }
        kept.remove(k);
        fit = gram.fit(&kept, target)?;
    }
    Ok((kept, fit))
}

fn estimate_edges(input: &BackendInput<'_>, order: &[usize]) -> Result<Vec<EstimatedEdge>, DiscoveryError> {
    let data: Vec<Vec<f64>> = input.columns.iter().map(|c| standardize(c)).collect();
    let gram = Gram::new(&data);
    let mut edges = Vec::new();
    for (pos, &target) in order.iter().enumerate() {
        let causes: Vec<usize> = order[..pos]
            .iter()
            .copied()
            .filter(|&c| !input.forbidden[c][target])
            .collect();
        if causes.is_empty() {
            continue;
        }
        let (causes, fit) = select_by_bic(&gram, &causes, target)?;
        for (k, &cause) in causes.iter().enumerate() {
            let b = fit.beta[k];
            if !b.is_finite() {
                return Err(DiscoveryError::Numerical(format!(
                    "non-finite coefficient for {} -> {}",
                    input.activities[cause], input.activities[target]
                )));
            }
            if b.abs() >= input.coeff_prune {
                edges.push(EstimatedEdge {
                    cause,
                    effect: target,
                    coefficient: b,
                });
            }
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
    }

    #[test]
    fn gaussian_entropy_is_near_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let g: Vec<f64> = (0..20_000).map(|_| rng.sample(normal)).collect();
        let u = standardize(&uniform(&mut rng, 20_000));
        let h_max = (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0;
        assert!((entropy(&standardize(&g)) - h_max).abs() < 0.01);
        assert!(entropy(&u) < entropy(&standardize(&g)));
        assert!(negentropy(&g) < 0.002);
        assert!(negentropy(&u) > 0.01);
    }

    #[test]
    fn log_cosh_matches_direct_formula() {
        for x in [-3.0, -0.5, 0.0, 0.1, 2.0, 10.0] {
            assert!((log_cosh(x) - f64::cosh(x).ln()).abs() < 1e-12);
        }
        assert!(log_cosh(1000.0).is_finite());
    }

    #[test]
    fn orders_two_variable_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = uniform(&mut rng, 3000);
        let e = uniform(&mut rng, 3000);
        let b: Vec<f64> = a.iter().zip(&e).map(|(a, e)| 0.8 * a + e).collect();
        let none = vec![vec![false; 2]; 2];
        assert_eq!(causal_order(&[b.clone(), a.clone()], &none), [1, 0]);
        assert_eq!(causal_order(&[a, b], &none), [0, 1]);
    }

    #[test]
    fn forbidden_edge_overrides_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = uniform(&mut rng, 2000);
        let e = uniform(&mut rng, 2000);
        let b: Vec<f64> = a.iter().zip(&e).map(|(a, e)| a + e).collect();
        let mut forbidden = vec![vec![false; 2]; 2];
        forbidden[0][1] = true;
        assert_eq!(causal_order(&[a, b], &forbidden), [1, 0]);
    }

    #[test]
    fn residual_is_uncorrelated_with_regressor() {
        let x = [1.0, 2.0, 3.0, 4.0, 6.0];
        let y = [2.0, 4.5, 5.5, 8.0, 13.0];
        let r = residual(&y, &x);
        let dot: f64 = r.iter().zip(&x).map(|(a, b)| a * (b - 3.2)).sum();
        assert!(dot.abs() < 1e-9);
    }

    fn regression_data(seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3000;
        let x0 = uniform(&mut rng, n);
        let x1 = uniform(&mut rng, n);
        let x2 = uniform(&mut rng, n);
        let y: Vec<f64> = (0..n)
            .map(|r| 2.0 * x0[r] - 1.0 * x1[r] + 0.5 * rng.gen_range(0.0..1.0))
            .collect();
        [x0, x1, x2, y].iter().map(|c| standardize(c)).collect()
    }

    #[test]
    fn gram_fit_matches_row_regression() {
        let data = regression_data(3);
        let n = data[0].len();
        let x = DMatrix::from_fn(n, 3, |r, c| data[c][r]);
        let y = DVector::from_column_slice(&data[3]);
        let direct = x.clone().svd(true, true).solve(&y, 1e-12).unwrap();
        let fit = Gram::new(&data).fit(&[0, 1, 2], 3).unwrap();
        for k in 0..3 {
            assert!((direct[k] - fit.beta[k]).abs() < 1e-9);
        }
        let rss = (y - x * direct).norm_squared();
        assert!((rss - fit.rss).abs() < 1e-6 * rss.max(1.0));
        // Dropping a regressor costs exactly the RSS difference of the refit.
        let without_x0 = Gram::new(&data).fit(&[1, 2], 3).unwrap();
        assert!((fit.rss + fit.drop_cost[0] - without_x0.rss).abs() < 1e-6 * without_x0.rss);
    }

    #[test]
    fn bic_drops_irrelevant_regressor() {
        let data = regression_data(4);
        let (kept, fit) = select_by_bic(&Gram::new(&data), &[0, 1, 2], 3).unwrap();
        assert_eq!(kept, [0, 1]);
        assert!(fit.beta[0] > 0.0 && fit.beta[1] < 0.0);
    }
}
