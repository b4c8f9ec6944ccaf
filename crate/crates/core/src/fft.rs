//! One-dimensional transforms along each axis of a product of cyclic groups.
//! All transforms here are unnormalised: `X[k] = Σ_j x[j] e^{sign·2πi jk/n}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fourier::Complex;

const NAIVE_MAX: usize = 32;

fn unit_root(t: u64, n: u64, sign: f64) -> Complex {
    let a = 2.0 * PI * (t % n) as f64 / n as f64;
    Complex::new(libm::cos(a), sign * libm::sin(a))
}

fn naive(x: &mut [Complex], sign: f64) {
    let n = x.len();
    let tw: Vec<Complex> = (0..n as u64).map(|t| unit_root(t, n as u64, sign)).collect();
    let out: Vec<Complex> = (0..n)
        .map(|k| {
            let mut s = Complex::ZERO;
            for (j, &v) in x.iter().enumerate() {
                s += v * tw[(j * k) % n];
            }
            s
        })
        .collect();
    x.copy_from_slice(&out);
}

fn radix2(x: &mut [Complex], sign: f64) {
    let n = x.len();
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            x.swap(i, j);
        }
    }
    let tw: Vec<Complex> = (0..n as u64 / 2)
        .map(|t| unit_root(t, n as u64, sign))
        .collect();
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for chunk in x.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for k in 0..len / 2 {
                let t = hi[k] * tw[k * step];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        }
        len <<= 1;
    }
}

fn bluestein(x: &mut [Complex], sign: f64) {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();
    let two_n = 2 * n as u64;
    // chirp[j] = e^{sign·πi j²/n}, with j² reduced mod 2n so the angle is exact
    let chirp: Vec<Complex> = (0..n as u64)
        .map(|j| unit_root((j * j) % two_n, two_n, sign))
        .collect();
    let mut a = vec![Complex::ZERO; m];
    for j in 0..n {
        a[j] = x[j] * chirp[j];
    }
    let mut b = vec![Complex::ZERO; m];
    b[0] = chirp[0].conj();
    for j in 1..n {
        b[j] = chirp[j].conj();
        b[m - j] = chirp[j].conj();
    }
    radix2(&mut a, -1.0);
    radix2(&mut b, -1.0);
    for (u, v) in a.iter_mut().zip(&b) {
        *u = *u * *v;
    }
    radix2(&mut a, 1.0);
    let inv = 1.0 / m as f64;
    for k in 0..n {
        x[k] = a[k] * chirp[k] * inv;
    }
}

pub(crate) fn transform_1d(x: &mut [Complex], sign: f64) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(x, sign);
    } else if n <= NAIVE_MAX {
        naive(x, sign);
    } else {
        bluestein(x, sign);
    }
}

/// Applies the 1-D transform along every axis of a row-major array whose
/// axis lengths are `orders` (first axis most significant).
pub(crate) fn transform_axes(data: &mut [Complex], orders: &[u32], sign: f64) {
    let total = data.len();
    let mut inner = total;
    let mut buf = Vec::new();
    for &m in orders {
        let m = m as usize;
        inner /= m;
        if m == 1 {
            continue;
        }
        let block = m * inner;
        buf.resize(m, Complex::ZERO);
        for outer in (0..total).step_by(block) {
            for off in 0..inner {
                let base = outer + off;
                for (t, slot) in buf.iter_mut().enumerate() {
                    *slot = data[base + t * inner];
                }
                transform_1d(&mut buf, sign);
                for (t, v) in buf.iter().enumerate() {
                    data[base + t * inner] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_paths_match_naive() {
        for n in [1usize, 2, 3, 5, 8, 12, 16, 31, 33, 64, 97, 100] {
            let x: Vec<Complex> = (0..n)
                .map(|j| Complex::new(libm::sin(j as f64 * 0.37), libm::cos(j as f64 * 1.3)))
                .collect();
            for sign in [-1.0, 1.0] {
                let mut want = x.clone();
                naive(&mut want, sign);
                let mut got = x.clone();
                transform_1d(&mut got, sign);
                for (a, b) in got.iter().zip(&want) {
                    assert!((*a - *b).norm() < 1e-9, "n={n}");
                }
            }
        }
    }
}
