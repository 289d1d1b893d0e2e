//! Frequency-domain evaluation of the quantile correlation function.
//!
//! The raw bit series are cross-correlated with an FFT. Because the inputs
//! are 0/1, every lagged product count is an integer and is recovered exactly
//! by rounding. Centering is then applied algebraically with prefix sums:
//!
//! ```text
//! sum_t (a_t - ma)(b_{t+l} - mb) = S_ab(l) - mb * S_a(l) - ma * S_b(l) + n_l * ma * mb
//! ```
//!
//! where `S_a(l)` sums `a` over the first `n_l = T - l` positions and `S_b(l)`
//! sums `b` over the last `n_l`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::quantile::BinarySeries;

/// Integer cross-correlation counts `r[k] = sum_t a_t b_{t+k}` for
/// `k in -max_lag..=max_lag`, indexed by `k + max_lag`.
fn lagged_counts(a: &[u8], b: &[u8], max_lag: usize) -> Vec<u64> {
    let n = a.len();
    let size = (n + max_lag).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let load = |bits: &[u8]| {
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for (slot, &bit) in buf.iter_mut().zip(bits) {
            slot.re = f64::from(bit);
        }
        buf
    };

    let mut fa = load(a);
    forward.process(&mut fa);
    let spectrum: Vec<Complex<f64>> = if a == b {
        fa.iter().map(|z| z.norm_sqr().into()).collect()
    } else {
        let mut fb = load(b);
        forward.process(&mut fb);
        fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect()
    };
    let mut corr = spectrum;
    inverse.process(&mut corr);

    let scale = size as f64;
    let lag = max_lag as i64;
    (-lag..=lag)
        .map(|k| {
            let idx = k.rem_euclid(size as i64) as usize;
            let v = corr[idx].re / scale;
            debug_assert!(
                (v - v.round()).abs() < 0.25,
                "FFT count not near an integer: {v}"
            );
            v.round().max(0.0) as u64
        })
        .collect()
}

fn prefix_sums(bits: &[u8]) -> Vec<u64> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    out.push(0);
    let mut acc = 0u64;
    for &b in bits {
        acc += u64::from(b);
        out.push(acc);
    }
    out
}

struct Side<'a> {
    prefix: &'a [u64],
    mean: f64,
}

/// Centered lagged sum for `lag >= 0` with `x` leading and `y` trailing.
fn centered_sum(count: u64, x: &Side<'_>, y: &Side<'_>, lag: usize) -> f64 {
    let n = x.prefix.len() - 1;
    let overlap = n - lag;
    let sum_x = x.prefix[overlap] as f64;
    let sum_y = (y.prefix[n] - y.prefix[lag]) as f64;
    count as f64 - y.mean * sum_x - x.mean * sum_y + overlap as f64 * x.mean * y.mean
}

pub(super) fn qcf_values(a: &BinarySeries, b: &BinarySeries, max_lag: usize) -> Vec<f64> {
    let n = a.len();
    let pa = prefix_sums(a.bits());
    let pb = prefix_sums(b.bits());
    let sa = Side {
        prefix: &pa,
        mean: pa[n] as f64 / n as f64,
    };
    let sb = Side {
        prefix: &pb,
        mean: pb[n] as f64 / n as f64,
    };
    let ones_a = pa[n];
    let ones_b = pb[n];
    let var_a = centered_sum(ones_a, &sa, &sa, 0) / n as f64;
    let var_b = centered_sum(ones_b, &sb, &sb, 0) / n as f64;
    let norm = (var_a * var_b).sqrt();

    let counts = lagged_counts(a.bits(), b.bits(), max_lag);
    let auto = a.bits() == b.bits();
    let mut values = vec![0.0; 2 * max_lag + 1];
    for l in 0..=max_lag {
        let pos = max_lag + l;
        let neg = max_lag - l;
        let forward = centered_sum(counts[pos], &sa, &sb, l);
        values[pos] = (forward / n as f64) / norm;
        // qcf_{-l}(a, b) = qcf_l(b, a)
        values[neg] = if auto {
            values[pos]
        } else {
            (centered_sum(counts[neg], &sb, &sa, l) / n as f64) / norm
        };
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_direct_products() {
        let a = [1u8, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1];
        let b = [0u8, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1];
        let counts = lagged_counts(&a, &b, 4);
        for (i, k) in (-4i64..=4).enumerate() {
            let mut direct = 0u64;
            for t in 0..a.len() as i64 {
                let u = t + k;
                if (0..b.len() as i64).contains(&u) {
                    direct += u64::from(a[t as usize] * b[u as usize]);
                }
            }
            assert_eq!(counts[i], direct, "lag {k}");
        }
    }
}
