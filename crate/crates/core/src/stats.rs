//! Small statistics toolkit for trend and difference tests.

use serde::{Deserialize, Serialize};

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn std_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Mean difference with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Difference {
    pub estimate: f64,
    pub std_error: f64,
}

impl Difference {
    /// Unpaired: `mean(a) - mean(b)`.
    pub fn welch(a: &[f64], b: &[f64]) -> Self {
        Self {
            estimate: mean(a) - mean(b),
            std_error: (std_error(a).powi(2) + std_error(b).powi(2)).sqrt(),
        }
    }

    /// Paired: mean of `a[k] - b[k]`.
    pub fn paired(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len(), "paired samples must have equal length");
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self::from_samples(&d)
    }

    pub fn from_samples(d: &[f64]) -> Self {
        Self {
            estimate: mean(d),
            std_error: std_error(d),
        }
    }

    pub fn z(&self) -> f64 {
        if self.std_error == 0.0 {
            return if self.estimate == 0.0 {
                0.0
            } else {
                self.estimate.signum() * f64::INFINITY
            };
        }
        self.estimate / self.std_error
    }

    /// Two-sided 95% interval.
    pub fn interval95(&self) -> (f64, f64) {
        (
            self.estimate - Z95 * self.std_error,
            self.estimate + Z95 * self.std_error,
        )
    }

    /// Lower bound of the 95% interval is above zero.
    pub fn positive_at_95(&self) -> bool {
        self.interval95().0 > 0.0
    }

    pub fn positive_at_sigmas(&self, sigmas: f64) -> bool {
        self.estimate > sigmas * self.std_error
    }
}

/// Average ranks (1-based), ties sharing the mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    pearson(&ranks(x), &ranks(y))
}

/// One-sided p-value for `rho >= observed` under independence. Exact by
/// enumerating all permutations for up to 9 points, normal approximation
/// beyond that.
pub fn spearman_p_upper(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let observed = spearman(x, y);
    if n > 9 {
        let z = observed * ((n - 1) as f64).sqrt();
        return normal_sf(z);
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        let permuted: Vec<f64> = perm.iter().map(|&i| ry[i]).collect();
        if pearson(&rx, &permuted) >= observed - 1e-12 {
            hits += 1;
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    hits as f64 / total as f64
}

/// One-sided p-value for `rho <= observed`.
pub fn spearman_p_lower(x: &[f64], y: &[f64]) -> f64 {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    spearman_p_upper(x, &neg)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Upper tail of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

// Numerical Recipes' erfc, fractional error below 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98
                                    + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((std_dev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - 2.138_089_935).abs() < 1e-6);
        assert_eq!(std_dev(&[3.0]), 0.0);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_extremes_and_exact_p() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let up = [0.1, 0.2, 0.25, 0.3, 0.5, 0.9];
        assert!((spearman(&x, &up) - 1.0).abs() < 1e-12);
        assert!((spearman_p_upper(&x, &up) - 1.0 / 720.0).abs() < 1e-12);
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert!((spearman(&x, &down) + 1.0).abs() < 1e-12);
        assert!((spearman_p_lower(&x, &down) - 1.0 / 720.0).abs() < 1e-12);
        // one adjacent swap: rho = 1 - 6*2/(6*35) = 0.942857
        let swapped = [0.1, 0.25, 0.2, 0.3, 0.5, 0.9];
        assert!((spearman(&x, &swapped) - 0.942_857_142_857).abs() < 1e-9);
        assert!(spearman_p_upper(&x, &swapped) < 0.05);
    }

    #[test]
    fn normal_tail() {
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_sf(1.959_964) - 0.025).abs() < 1e-6);
    }

    #[test]
    fn paired_difference() {
        let d = Difference::paired(&[1.0, 2.0, 3.0], &[0.5, 1.5, 2.0]);
        assert!((d.estimate - 2.0 / 3.0).abs() < 1e-12);
        assert!(d.positive_at_95());
    }
}
