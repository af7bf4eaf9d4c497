//! Reference implementations used only by tests. Deliberately naive and
//! independent of the library code paths they check.
#![allow(dead_code)]

/// Neumaier compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Max |F_x(t) - F_y(t)| over every observed value t, counting directly.
pub fn ecdf_gap(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    xs.iter()
        .chain(ys)
        .map(|&t| {
            let fx = xs.iter().filter(|&&x| x <= t).count() as f64 / n;
            let fy = ys.iter().filter(|&&y| y <= t).count() as f64 / m;
            (fx - fy).abs()
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov alternating series summed over a fixed, large number of terms.
pub fn kolmogorov_series(lambda: f64, terms: usize) -> f64 {
    2.0 * compensated_sum((1..=terms).map(|j| {
        let j = j as f64;
        let sign = if j as u64 % 2 == 1 { 1.0 } else { -1.0 };
        sign * (-2.0 * j * j * lambda * lambda).exp()
    }))
}

/// Cosine of f32 vectors: products are exact in f64, sums compensated.
pub fn cosine_exact(u: &[f32], v: &[f32]) -> f64 {
    let dot = compensated_sum(u.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64));
    let uu = compensated_sum(u.iter().map(|&a| a as f64 * a as f64));
    let vv = compensated_sum(v.iter().map(|&b| b as f64 * b as f64));
    dot / (uu * vv).sqrt()
}

/// Gaussian kernel density at `g`, written out term by term.
pub fn kernel_sum(xs: &[f64], h: f64, g: f64) -> f64 {
    let n = xs.len() as f64;
    let total: f64 =
        xs.iter().map(|&x| (-(g - x) * (g - x) / (2.0 * h * h)).exp() / (2.0 * std::f64::consts::PI).sqrt()).sum();
    total / (n * h)
}

/// Two-pass mean and sample standard deviation.
pub fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
