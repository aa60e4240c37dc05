//! Statistics for the Monte-Carlo harness: Kolmogorov-Smirnov tests,
//! correlations, and a permutation-calibrated distance correlation.
//!
//! Test statistics are computed in `f64` regardless of the algebra scalar;
//! p-values use the asymptotic Kolmogorov distribution with the Stephens
//! small-sample correction.

use rand::seq::SliceRandom;
use rand::Rng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn pearson_corr(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Two-sided p-value for a correlation coefficient under the independence
/// null, from the normal approximation `r sqrt(n) ~ N(0, 1)`.
pub fn corr_p_value(r: f64, n: usize) -> f64 {
    let z = r.abs() * (n as f64).sqrt();
    2.0 * (1.0 - normal_cdf(0.0, 1.0, z))
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..101 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    let mut xs: Vec<f64> = data.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - f).abs());
    }
    // Stephens' correction for finite n.
    let lambda = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n,
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n: n.min(m),
    }
}

/// Lower-regularized Gamma CDF with shape/rate parameterization.
pub fn gamma_cdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        statrs::function::gamma::gamma_lr(shape, rate * x)
    }
}

pub fn normal_cdf(mean: f64, sd: f64, x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf((x - mean) / (sd * std::f64::consts::SQRT_2)))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn double_centered_distances(feats: &[Vec<f64>]) -> Vec<f64> {
    let n = feats.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclidean(&feats[i], &feats[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let grand = d.iter().sum::<f64>() / (n * n) as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| d[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    d
}

/// Distance correlation between two feature samples of equal length.
pub fn distance_correlation(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    assert_eq!(x.len(), y.len());
    let a = double_centered_distances(x);
    let b = double_centered_distances(y);
    dcor_from_centered(&a, &b, x.len(), &(0..x.len()).collect::<Vec<_>>())
}

fn dcor_from_centered(a: &[f64], b: &[f64], n: usize, perm: &[usize]) -> f64 {
    let mut vxy = 0.0;
    let mut vxx = 0.0;
    let mut vyy = 0.0;
    for i in 0..n {
        for j in 0..n {
            let av = a[i * n + j];
            let bv = b[perm[i] * n + perm[j]];
            vxy += av * bv;
            vxx += av * av;
            vyy += bv * bv;
        }
    }
    if vxx <= 0.0 || vyy <= 0.0 {
        return 0.0;
    }
    (vxy.max(0.0) / (vxx * vyy).sqrt()).sqrt()
}

/// Distance correlation with a permutation p-value: the fraction of
/// permutations whose statistic reaches the observed one.
pub fn dcor_permutation<R: Rng + ?Sized>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    permutations: usize,
    rng: &mut R,
) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let a = double_centered_distances(x);
    let b = double_centered_distances(y);
    let identity: Vec<usize> = (0..n).collect();
    let observed = dcor_from_centered(&a, &b, n, &identity);
    let mut perm = identity;
    let mut at_least = 0usize;
    for _ in 0..permutations {
        perm.shuffle(rng);
        if dcor_from_centered(&a, &b, n, &perm) >= observed {
            at_least += 1;
        }
    }
    let p = (1 + at_least) as f64 / (permutations + 1) as f64;
    (observed, p)
}

fn standardize_columns(feats: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = feats.len();
    let p = feats[0].len();
    let mut cols = vec![vec![0.0; n]; p];
    for (i, row) in feats.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            cols[k][i] = v;
        }
    }
    for col in cols.iter_mut() {
        let m = mean(col);
        let mut ss = 0.0;
        for v in col.iter_mut() {
            *v -= m;
            ss += *v * *v;
        }
        let norm = ss.sqrt();
        if norm > 0.0 {
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
    }
    cols
}

/// Largest absolute pairwise correlation between the columns of `x` and the
/// columns of `y`, with a permutation p-value (rows of `y` shuffled).
pub fn max_corr_permutation<R: Rng + ?Sized>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    permutations: usize,
    rng: &mut R,
) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let xc = standardize_columns(x);
    let yc = standardize_columns(y);
    let stat = |perm: &[usize]| -> f64 {
        let mut best: f64 = 0.0;
        for cx in &xc {
            for cy in &yc {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += cx[i] * cy[perm[i]];
                }
                best = best.max(dot.abs());
            }
        }
        best
    };
    let identity: Vec<usize> = (0..n).collect();
    let observed = stat(&identity);
    let mut perm = identity;
    let mut at_least = 0usize;
    for _ in 0..permutations {
        perm.shuffle(rng);
        if stat(&perm) >= observed {
            at_least += 1;
        }
    }
    let p = (1 + at_least) as f64 / (permutations + 1) as f64;
    (observed, p)
}

/// Largest absolute pairwise correlation among a set of columns.
pub fn max_pairwise_corr(feats: &[Vec<f64>]) -> (f64, usize, usize) {
    let p = feats[0].len();
    let cols = standardize_columns(feats);
    let n = feats.len();
    let mut best = 0.0;
    let mut at = (0, 0);
    for a in 0..p {
        for b in a + 1..p {
            let dot: f64 = (0..n).map(|i| cols[a][i] * cols[b][i]).sum();
            if dot.abs() > best {
                best = dot.abs();
                at = (a, b);
            }
        }
    }
    (best, at.0, at.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn kolmogorov_sf_known_values() {
        // Classical table: Q(1.36) ~ 0.049, Q(1.63) ~ 0.010.
        assert!((kolmogorov_sf(1.36) - 0.049).abs() < 2e-3);
        assert!((kolmogorov_sf(1.63) - 0.010).abs() < 1e-3);
        assert!(kolmogorov_sf(0.0) == 1.0);
    }

    #[test]
    fn ks_accepts_its_own_distribution() {
        let mut rng = crate::rng::stream(101, 0);
        let data: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let r = ks_one_sample(&data, |x| x.clamp(0.0, 1.0));
        assert!(r.p_value > 0.01, "uniform sample rejected: {r:?}");
        let shifted: Vec<f64> = data.iter().map(|x| x.powf(1.4)).collect();
        let r = ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0));
        assert!(r.p_value < 1e-6, "biased sample accepted: {r:?}");
    }

    #[test]
    fn ks_two_sample_detects_shift() {
        let mut rng = crate::rng::stream(102, 0);
        let a: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let r = ks_two_sample(&a, &b);
        assert!(r.p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| x + 0.08).collect();
        let r = ks_two_sample(&a, &c);
        assert!(r.p_value < 1e-4);
    }

    #[test]
    fn gamma_and_normal_cdf_sanity() {
        // Exponential(1): CDF at 1 is 1 - e^{-1}.
        assert!((gamma_cdf(1.0, 1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((normal_cdf(0.0, 1.0, 0.0) - 0.5).abs() < 1e-14);
        assert!((normal_cdf(0.0, 1.0, 1.96) - 0.975).abs() < 1e-3);
    }

    #[test]
    fn dcor_flags_dependence_and_clears_independence() {
        let mut rng = crate::rng::stream(103, 0);
        let n = 400;
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>() - 0.5]).collect();
        let y_indep: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>() - 0.5]).collect();
        // Nonlinear dependence that plain correlation misses.
        let y_dep: Vec<Vec<f64>> = x.iter().map(|v| vec![v[0] * v[0]]).collect();
        let (_, p_indep) = dcor_permutation(&x, &y_indep, 199, &mut rng);
        let (_, p_dep) = dcor_permutation(&x, &y_dep, 199, &mut rng);
        assert!(p_indep > 0.01, "independent pair rejected: p = {p_indep}");
        assert!(p_dep <= 0.01, "dependent pair accepted: p = {p_dep}");
        let r = pearson_corr(
            &x.iter().map(|v| v[0]).collect::<Vec<_>>(),
            &y_dep.iter().map(|v| v[0]).collect::<Vec<_>>(),
        );
        assert!(
            r.abs() < 0.2,
            "the dependence should be mostly uncorrelated"
        );
    }

    #[test]
    fn max_corr_permutation_behaviour() {
        let mut rng = crate::rng::stream(104, 0);
        let n = 800;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let y: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let (_, p) = max_corr_permutation(&x, &y, 199, &mut rng);
        assert!(p > 0.01);
        let y_dep: Vec<Vec<f64>> = x.iter().map(|v| vec![v[1], v[0] + v[1]]).collect();
        let (_, p) = max_corr_permutation(&x, &y_dep, 199, &mut rng);
        assert!(p <= 0.01);
    }

    #[test]
    fn corr_p_value_scale() {
        assert!(corr_p_value(0.0, 100) > 0.99);
        assert!(corr_p_value(0.5, 100) < 1e-6);
    }
}
