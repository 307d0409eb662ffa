//! Minimal iterative radix-2 complex FFT, used for spectral convolutions.

/// Smallest power of two >= n.
pub(crate) fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// In-place FFT of length `re.len() == im.len()`, a power of two. The
/// inverse transform includes the 1/L normalization. Twiddles come from a
/// per-call table so no phase-recurrence error accumulates.
pub(crate) fn fft_inplace(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let l = re.len();
    assert_eq!(l, im.len());
    assert!(l.is_power_of_two());
    if l <= 1 {
        return;
    }

    // Bit reversal permutation.
    let mut j = 0usize;
    for i in 1..l {
        let mut bit = l >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    // Twiddle table for the full length: w[k] = exp(-+ 2 pi i k / L).
    let sign = if inverse { 1.0 } else { -1.0 };
    let half = l / 2;
    let mut tw_re = Vec::with_capacity(half);
    let mut tw_im = Vec::with_capacity(half);
    for k in 0..half {
        let angle = sign * 2.0 * std::f64::consts::PI * k as f64 / l as f64;
        tw_re.push(angle.cos());
        tw_im.push(angle.sin());
    }

    let mut len = 2;
    while len <= l {
        let stride = l / len;
        for start in (0..l).step_by(len) {
            for k in 0..len / 2 {
                let w_re = tw_re[k * stride];
                let w_im = tw_im[k * stride];
                let i0 = start + k;
                let i1 = start + k + len / 2;
                let vr = re[i1] * w_re - im[i1] * w_im;
                let vi = re[i1] * w_im + im[i1] * w_re;
                re[i1] = re[i0] - vr;
                im[i1] = im[i0] - vi;
                re[i0] += vr;
                im[i0] += vi;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / l as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(re: &[f64], im: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = re.len();
        let mut or = vec![0.0; n];
        let mut oi = vec![0.0; n];
        for k in 0..n {
            for j in 0..n {
                let ang = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
                let (s, c) = ang.sin_cos();
                or[k] += re[j] * c - im[j] * s;
                oi[k] += re[j] * s + im[j] * c;
            }
        }
        (or, oi)
    }

    #[test]
    fn matches_naive_dft() {
        let n = 64;
        let mut re: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 17) as f64 - 8.0).collect();
        let mut im: Vec<f64> = (0..n).map(|i| ((i * 53 + 7) % 13) as f64 - 6.0).collect();
        let (er, ei) = naive_dft(&re, &im);
        fft_inplace(&mut re, &mut im, false);
        for k in 0..n {
            assert!((re[k] - er[k]).abs() < 1e-10);
            assert!((im[k] - ei[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 256;
        let orig: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut re = orig.clone();
        let mut im = vec![0.0; n];
        fft_inplace(&mut re, &mut im, false);
        fft_inplace(&mut re, &mut im, true);
        for k in 0..n {
            assert!((re[k] - orig[k]).abs() < 1e-12);
            assert!(im[k].abs() < 1e-12);
        }
    }
}
