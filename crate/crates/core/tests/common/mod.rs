//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

/// Plotting-position quantile by direct scan over all ranks.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if q == 0.0 {
        return s[0];
    }
    if q == 100.0 {
        return s[n - 1];
    }
    let nf = n as f64;
    let mut k_star = 0;
    for k in 1..=n {
        if (k as f64 - 0.5) / nf < q / 100.0 {
            k_star = k;
        }
    }
    if k_star == 0 {
        return s[0];
    }
    if k_star == n {
        return s[n - 1];
    }
    let lo_pos = (k_star as f64 - 0.5) / nf;
    let hi_pos = (k_star as f64 + 1.0 - 0.5) / nf;
    s[k_star - 1] + (q / 100.0 - lo_pos) / (hi_pos - lo_pos) * (s[k_star] - s[k_star - 1])
}

pub fn mse_oracle(p: &[f64], t: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..p.len() {
        acc += (p[j] - t[j]).powi(2);
    }
    acc / p.len() as f64
}

pub fn mape_oracle(p: &[f64], t: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..p.len() {
        acc += ((p[j] - t[j]) / p[j]).abs();
    }
    acc / p.len() as f64
}

/// `columns[j]` holds the ensemble values at time `j`.
pub fn sqif_oracle(columns: &[Vec<f64>], t: &[f64]) -> f64 {
    let mut acc = 0.0;
    for qi in 0..=10 {
        let q = 10.0 * qi as f64;
        let mut inside = 0;
        for j in 0..t.len() {
            let lo = quantile_oracle(&columns[j], (100.0 - q) / 2.0);
            let hi = quantile_oracle(&columns[j], (100.0 + q) / 2.0);
            if lo <= t[j] && t[j] <= hi {
                inside += 1;
            }
        }
        let phi = inside as f64 / t.len() as f64;
        acc += (phi - q / 100.0).powi(2);
    }
    acc / 11.0
}

pub fn pof_oracle(n: usize, x: usize, p: f64) -> f64 {
    let (n, xf) = (n as f64, x as f64);
    if x == 0 {
        -2.0 * n * (1.0 - p).ln()
    } else if xf == n {
        -2.0 * n * p.ln()
    } else {
        -2.0 * ((n - xf) * (n * (1.0 - p) / (n - xf)).ln() + xf * (n * p / xf).ln())
    }
}

pub fn tuff_oracle(n: usize, first: Option<usize>, p: f64) -> f64 {
    let n = n as f64;
    match first {
        None => -2.0 * n * (1.0 - p).ln(),
        Some(1) => -2.0 * n * p.ln(),
        Some(x) => {
            let x = x as f64;
            -2.0 * (p.ln() + (x - 1.0) * (1.0 - p).ln() + x * x.ln() - (x - 1.0) * (x - 1.0).ln())
        }
    }
}

/// Root of `(1 - x)^n = x` by plain bisection in the untransformed form.
pub fn tuff_root_oracle(n: usize) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (1.0 - mid).powi(n as i32) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov-Smirnov distance of a sample to Uniform[0, 100].
pub fn ks_uniform_100(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in s.iter().enumerate() {
        let u = (v / 100.0).clamp(0.0, 1.0);
        d = d.max((i as f64 + 1.0) / n - u).max(u - i as f64 / n);
    }
    d
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
