//! Characters and the averaged Fourier transform
//! `f̂(γ) = E_x f(x) γ(-x)`, with `γ(x) = exp(2πi Σ_j γ_j x_j / m_j)`.
//!
//! The dual group is indexed by the same coordinate tuples as the group.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::fft::transform_axes;
use crate::func::FuncR;
use crate::group::{check_same, Group};
use crate::num::lcm;
use crate::{KmError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, c: f64) -> Self {
        Complex::new(self.re * c, self.im * c)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for Complex {
    fn add_assign(&mut self, o: Complex) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    fn mul(self, c: f64) -> Complex {
        self.scale(c)
    }
}

/// A complex function on the group or (by the shared indexing) its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncC {
    group: Group,
    values: Vec<Complex>,
}

impl FuncC {
    pub fn new(group: &Group, values: Vec<Complex>) -> Result<Self> {
        if values.len() != group.size() {
            return Err(KmError::InvalidArgument("length mismatch".into()));
        }
        Ok(FuncC {
            group: group.clone(),
            values,
        })
    }

    pub fn from_real(f: &FuncR) -> Self {
        FuncC {
            group: f.group().clone(),
            values: f.values().iter().map(|&v| Complex::new(v, 0.0)).collect(),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Complex {
        self.values[i]
    }

    /// Real parts as a [`FuncR`].
    pub fn real_part(&self) -> FuncR {
        FuncR::new(&self.group, self.values.iter().map(|c| c.re).collect())
            .expect("matching length")
    }

    pub fn max_abs_diff(&self, other: &FuncC) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn pointwise_mul(&self, other: &FuncC) -> Result<FuncC> {
        check_same(&self.group, &other.group)?;
        Ok(FuncC {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }
}

/// The phase `t / L` of `γ(x)` as an integer `t` over `L = lcm(orders)`.
pub fn phase(group: &Group, gamma: usize, x: usize) -> (u64, u64) {
    let l = group
        .orders()
        .iter()
        .fold(1u64, |acc, &m| lcm(acc, m as u64).expect("lcm bounded by size"));
    let mut t = 0u64;
    for (j, &m) in group.orders().iter().enumerate() {
        let m = m as u64;
        let prod = (group.coord(gamma, j) as u64 * group.coord(x, j) as u64) % m;
        t = (t + prod * (l / m)) % l;
    }
    (t, l)
}

/// `γ(x)`.
pub fn character(group: &Group, gamma: usize, x: usize) -> Complex {
    let (t, l) = phase(group, gamma, x);
    let a = 2.0 * PI * t as f64 / l as f64;
    Complex::new(libm::cos(a), libm::sin(a))
}

fn transformed(group: &Group, mut data: Vec<Complex>, sign: f64, scale: f64) -> FuncC {
    transform_axes(&mut data, group.orders(), sign);
    if scale != 1.0 {
        for v in data.iter_mut() {
            *v = v.scale(scale);
        }
    }
    FuncC {
        group: group.clone(),
        values: data,
    }
}

/// `f̂(γ) = E_x f(x) γ(-x)`.
pub fn dft(f: &FuncR) -> FuncC {
    dft_complex(&FuncC::from_real(f))
}

pub fn dft_complex(f: &FuncC) -> FuncC {
    let n = f.group.size() as f64;
    transformed(&f.group, f.values.clone(), -1.0, 1.0 / n)
}

/// `f(x) = Σ_γ F(γ) γ(x)`, the inverse of [`dft`].
pub fn inverse(spec: &FuncC) -> FuncC {
    transformed(&spec.group, spec.values.clone(), 1.0, 1.0)
}

pub(crate) fn conv_via_fft(f: &FuncR, g: &FuncR) -> FuncR {
    let prod = dft(f).pointwise_mul(&dft(g)).expect("same group");
    inverse(&prod).real_part()
}

/// Minimum real part of `f̂` together with the largest imaginary magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralMin {
    pub min_re: f64,
    pub max_im: f64,
}

pub fn spectral_min(f: &FuncR) -> SpectralMin {
    let spec = dft(f);
    let min_re = spec
        .values
        .iter()
        .map(|c| c.re)
        .fold(f64::INFINITY, f64::min);
    let max_im = spec.values.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    SpectralMin { min_re, max_im }
}

/// `E_x f(x)^k` computed as the `k`-fold convolution of `f̂` on the dual
/// group (a sum, not an average) evaluated at the trivial character.
pub fn moment_via_spectrum(f: &FuncR, k: u32, cap: u32) -> Result<f64> {
    if k == 0 || k > cap {
        return Err(KmError::MomentCap { k, cap });
    }
    let g = f.group();
    let spec = dft(f);
    let mut acc = spec.values.clone();
    for _ in 1..k {
        acc = (0..g.size())
            .map(|lam| {
                let mut s = Complex::ZERO;
                for (mu, &a) in acc.iter().enumerate() {
                    s += a * spec.values[g.sub(lam, mu)];
                }
                s
            })
            .collect();
    }
    Ok(acc[0].re)
}

/// `E_x f(x)^k` on the physical side.
pub fn moment_direct(f: &FuncR, k: u32) -> f64 {
    let n = f.group().size() as f64;
    crate::num::stable_sum(f.values().iter().map(|&v| libm::pow(v, k as f64))) / n
}

/// `Σ_γ |f̂(γ)|²`.
pub fn spectral_energy(spec: &FuncC) -> f64 {
    crate::num::stable_sum(spec.values.iter().map(|c| c.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{conv, diffconv, mu_of_set};
    use crate::set::GSet;

    fn z(n: u32) -> Group {
        Group::cyclic(n).unwrap()
    }

    #[test]
    fn dft_examples() {
        let g = z(6);
        let s = dft(&FuncR::constant(&g, 1.0));
        assert!((s.value(0) - Complex::ONE).norm() < 1e-12);
        assert!(s.values()[1..].iter().all(|c| c.norm() < 1e-12));
        let g4 = z(4);
        let d = dft(&FuncR::indicator(&GSet::from_indices(&g4, [0])));
        assert!(d.values().iter().all(|c| (*c - Complex::new(0.25, 0.0)).norm() < 1e-12));
        let g5 = z(5);
        let mu = mu_of_set(&GSet::from_indices(&g5, [0, 1])).unwrap();
        let v = dft(mu.func()).value(1);
        let a = -2.0 * PI / 5.0;
        let want = Complex::new((1.0 + libm::cos(a)) / 2.0, libm::sin(a) / 2.0);
        assert!((v - want).norm() < 1e-12);
        assert!((v.norm() - libm::cos(PI / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn round_trip_on_products() {
        for spec in ["Z6", "Z3^2xZ4", "Z37", "Z2xZ5xZ7"] {
            let g = Group::parse(spec).unwrap();
            let vals: Vec<f64> = (0..g.size()).map(|i| libm::sin(i as f64 * 0.7)).collect();
            let f = FuncR::new(&g, vals).unwrap();
            let back = inverse(&dft(&f));
            for (a, b) in back.values().iter().zip(f.values()) {
                assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matches_character_sum() {
        let g = Group::new(alloc::vec![3, 4]).unwrap();
        let vals: Vec<f64> = (0..12).map(|i| (i * i % 7) as f64).collect();
        let f = FuncR::new(&g, vals).unwrap();
        let s = dft(&f);
        for gamma in 0..12 {
            let mut want = Complex::ZERO;
            for x in 0..12 {
                want += character(&g, gamma, x).conj().scale(f.value(x) / 12.0);
            }
            assert!((s.value(gamma) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn conv_and_diffconv_theorems() {
        let g = z(9);
        let f = FuncR::new(&g, (0..9).map(|i| libm::cos(i as f64)).collect()).unwrap();
        let h = FuncR::new(&g, (0..9).map(|i| (i % 4) as f64).collect()).unwrap();
        let lhs = dft(&conv(&f, &h).unwrap());
        let rhs = dft(&f).pointwise_mul(&dft(&h)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let ff = dft(&diffconv(&f, &f).unwrap());
        for (a, b) in ff.values().iter().zip(dft(&f).values()) {
            assert!((a.re - b.norm_sqr()).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
        let fast = conv_via_fft(&f, &h);
        assert!(fast.max_abs_diff(&conv(&f, &h).unwrap()) < 1e-12);
    }

    #[test]
    fn spectral_min_examples() {
        let g2 = z(2);
        let f = FuncR::new(&g2, alloc::vec![-1.0, 1.0]).unwrap();
        assert!((spectral_min(&f).min_re + 1.0).abs() < 1e-12);
        assert_eq!(spectral_min(&FuncR::zero(&g2)).min_re, 0.0);
        let g5 = z(5);
        let mu = mu_of_set(&GSet::from_indices(&g5, [0, 1])).unwrap();
        let f = diffconv(mu.func(), mu.func()).unwrap().add_constant(-1.0);
        assert!(spectral_min(&f).min_re >= -1e-10);
    }

    #[test]
    fn moments_agree() {
        let g5 = z(5);
        let mu = mu_of_set(&GSet::from_indices(&g5, [0, 1])).unwrap();
        let f = diffconv(mu.func(), mu.func()).unwrap().add_constant(-1.0);
        for k in 1..=5 {
            let a = moment_via_spectrum(&f, k, 8).unwrap();
            assert!((a - moment_direct(&f, k)).abs() < 1e-8);
        }
        assert!(moment_via_spectrum(&f, 3, 8).unwrap() >= -1e-10);
        let one = FuncR::constant(&g5, 1.0);
        assert!((moment_via_spectrum(&one, 4, 8).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            moment_via_spectrum(&f, 9, 8),
            Err(KmError::MomentCap { k: 9, cap: 8 })
        );
    }
}
