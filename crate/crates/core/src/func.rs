//! Real-valued functions on a group under the normalised counting measure.
//!
//! A [`FuncR`] always carries `f64` values. Functions built from indicators
//! additionally carry an exact representation `num[x] / den` with integer
//! numerators; arithmetic keeps it as long as the integers fit in `i128`
//! and silently falls back to the float path otherwise.

use alloc::vec;
use alloc::vec::Vec;

use crate::group::{check_same, Group};
use crate::num::{self, gcd_i128, stable_sum};
use crate::set::GSet;
use crate::{fourier, KmError, Result};

/// Above this many multiply-adds a float convolution goes through the FFT.
const DIRECT_CONV_WORK: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Exact {
    num: Vec<i128>,
    den: i128,
}

impl Exact {
    fn new(mut num: Vec<i128>, mut den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        if den < 0 {
            den = den.checked_neg()?;
            for v in num.iter_mut() {
                *v = v.checked_neg()?;
            }
        }
        let mut g = den;
        for &v in &num {
            if g == 1 {
                break;
            }
            g = gcd_i128(g, v);
        }
        if g > 1 {
            for v in num.iter_mut() {
                *v /= g;
            }
            den /= g;
        }
        Some(Exact { num, den })
    }

    fn floats(&self) -> Vec<f64> {
        let d = self.den as f64;
        self.num.iter().map(|&n| n as f64 / d).collect()
    }

    pub fn numerators(&self) -> &[i128] {
        &self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncR {
    group: Group,
    values: Vec<f64>,
    exact: Option<Exact>,
}

impl FuncR {
    pub fn new(group: &Group, values: Vec<f64>) -> Result<Self> {
        if values.len() != group.size() {
            return Err(KmError::InvalidArgument(alloc::format!(
                "{} values for a group of size {}",
                values.len(),
                group.size()
            )));
        }
        Ok(FuncR {
            group: group.clone(),
            values,
            exact: None,
        })
    }

    /// `num[x] / den` on the exact path.
    pub fn from_rational(group: &Group, num: Vec<i128>, den: i128) -> Result<Self> {
        if num.len() != group.size() {
            return Err(KmError::InvalidArgument("length mismatch".into()));
        }
        let exact = Exact::new(num, den)
            .ok_or_else(|| KmError::InvalidArgument("zero denominator".into()))?;
        Ok(Self::with_exact(group, exact))
    }

    fn with_exact(group: &Group, exact: Exact) -> Self {
        FuncR {
            group: group.clone(),
            values: exact.floats(),
            exact: Some(exact),
        }
    }

    fn from_parts(group: &Group, values: Vec<f64>, exact: Option<Exact>) -> Self {
        match exact {
            Some(e) => Self::with_exact(group, e),
            None => FuncR {
                group: group.clone(),
                values,
                exact: None,
            },
        }
    }

    pub fn zero(group: &Group) -> Self {
        Self::with_exact(
            group,
            Exact {
                num: vec![0; group.size()],
                den: 1,
            },
        )
    }

    /// The constant function; exact when `c` is an integer.
    pub fn constant(group: &Group, c: f64) -> Self {
        if c == num::floor(c) && num::abs(c) < 1e15 {
            return Self::with_exact(
                group,
                Exact {
                    num: vec![c as i128; group.size()],
                    den: 1,
                },
            );
        }
        FuncR {
            group: group.clone(),
            values: vec![c; group.size()],
            exact: None,
        }
    }

    pub fn indicator(set: &GSet) -> Self {
        let g = set.group();
        let num = (0..g.size()).map(|i| set.contains(i) as i128).collect();
        Self::with_exact(g, Exact { num, den: 1 })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self) -> Option<&Exact> {
        self.exact.as_ref()
    }

    /// Drops the exact representation.
    pub fn to_float(&self) -> FuncR {
        FuncR {
            group: self.group.clone(),
            values: self.values.clone(),
            exact: None,
        }
    }

    pub fn mean(&self) -> f64 {
        if let Some(e) = &self.exact {
            if let Some(s) = e.num.iter().try_fold(0i128, |acc, &v| acc.checked_add(v)) {
                return s as f64 / (e.den as f64 * self.group.size() as f64);
            }
        }
        stable_sum(self.values.iter().copied()) / self.group.size() as f64
    }

    /// Indices where the function is nonzero.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
    }

    pub fn support_set(&self) -> GSet {
        GSet::from_fn(&self.group, |i| self.values[i] != 0.0)
    }

    fn combine(
        &self,
        other: &FuncR,
        float_op: impl Fn(f64, f64) -> f64,
        exact_op: impl Fn(&Exact, &Exact) -> Option<Exact>,
    ) -> Result<FuncR> {
        check_same(&self.group, &other.group)?;
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => exact_op(a, b),
            _ => None,
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| float_op(a, b))
            .collect();
        Ok(Self::from_parts(&self.group, values, exact))
    }

    pub fn add(&self, other: &FuncR) -> Result<FuncR> {
        self.combine(other, |a, b| a + b, |a, b| linear(a, b, 1))
    }

    pub fn sub(&self, other: &FuncR) -> Result<FuncR> {
        self.combine(other, |a, b| a - b, |a, b| linear(a, b, -1))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &FuncR) -> Result<FuncR> {
        self.combine(
            other,
            |a, b| a * b,
            |a, b| {
                let num = a
                    .num
                    .iter()
                    .zip(&b.num)
                    .map(|(&x, &y)| x.checked_mul(y))
                    .collect::<Option<Vec<_>>>()?;
                Exact::new(num, a.den.checked_mul(b.den)?)
            },
        )
    }

    /// `f + c`; exact when `f` is exact and `c` an integer.
    pub fn add_constant(&self, c: f64) -> FuncR {
        self.add(&FuncR::constant(&self.group, c))
            .expect("same group")
    }

    /// Multiplication by a float scalar (drops exactness).
    pub fn scale(&self, c: f64) -> FuncR {
        FuncR {
            group: self.group.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
            exact: None,
        }
    }

    /// Multiplication by the rational `n / d`.
    pub fn scale_rational(&self, n: i128, d: i128) -> FuncR {
        let exact = self.exact.as_ref().and_then(|e| {
            let num = e
                .num
                .iter()
                .map(|&v| v.checked_mul(n))
                .collect::<Option<Vec<_>>>()?;
            Exact::new(num, e.den.checked_mul(d)?)
        });
        let c = n as f64 / d as f64;
        Self::from_parts(
            &self.group,
            self.values.iter().map(|&v| v * c).collect(),
            exact,
        )
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> FuncR {
        let g = &self.group;
        let perm = |i: usize| g.neg(i);
        self.permute(perm)
    }

    /// `x -> f(x - t)`.
    pub fn translate(&self, t: usize) -> FuncR {
        let g = &self.group;
        self.permute(|x| g.sub(x, t))
    }

    fn permute(&self, src: impl Fn(usize) -> usize) -> FuncR {
        let n = self.group.size();
        let exact = self.exact.as_ref().map(|e| Exact {
            num: (0..n).map(|x| e.num[src(x)]).collect(),
            den: e.den,
        });
        let values = (0..n).map(|x| self.values[src(x)]).collect();
        Self::from_parts(&self.group, values, exact)
    }

    /// Pointwise map on the float path.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> FuncR {
        FuncR {
            group: self.group.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            exact: None,
        }
    }

    pub fn max_abs_diff(&self, other: &FuncR) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| num::abs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn linear(a: &Exact, b: &Exact, sign: i128) -> Option<Exact> {
    let num = a
        .num
        .iter()
        .zip(&b.num)
        .map(|(&x, &y)| x.checked_mul(b.den)?.checked_add(y.checked_mul(a.den)?.checked_mul(sign)?))
        .collect::<Option<Vec<_>>>()?;
    Exact::new(num, a.den.checked_mul(b.den)?)
}

/// Shared kernel for `f*g` and `f∘g`: `out[place(y, z)] += f(y) g(z)`.
fn pair_accumulate(
    f: &FuncR,
    g: &FuncR,
    place: impl Fn(&Group, usize, usize) -> usize,
) -> FuncR {
    let grp = &f.group;
    let n = grp.size();
    let fs: Vec<usize> = f.support().collect();
    let gs: Vec<usize> = g.support().collect();
    let exact = match (&f.exact, &g.exact) {
        (Some(ef), Some(eg)) => (|| {
            let mut out = vec![0i128; n];
            for &y in &fs {
                let a = ef.num[y];
                for &z in &gs {
                    let slot = &mut out[place(grp, y, z)];
                    *slot = slot.checked_add(a.checked_mul(eg.num[z])?)?;
                }
            }
            let den = ef.den.checked_mul(eg.den)?.checked_mul(n as i128)?;
            Exact::new(out, den)
        })(),
        _ => None,
    };
    if let Some(e) = exact {
        return FuncR::with_exact(grp, e);
    }
    let mut out = vec![0.0; n];
    for &y in &fs {
        let a = f.values[y];
        for &z in &gs {
            out[place(grp, y, z)] += a * g.values[z];
        }
    }
    let inv = 1.0 / n as f64;
    for v in out.iter_mut() {
        *v *= inv;
    }
    FuncR {
        group: grp.clone(),
        values: out,
        exact: None,
    }
}

fn use_fft(f: &FuncR, g: &FuncR) -> bool {
    if f.is_exact() && g.is_exact() {
        return false;
    }
    let work = f.support().count().saturating_mul(g.support().count());
    work > DIRECT_CONV_WORK && f.group.size() > 4096
}

/// `(f*g)(x) = E_y f(y) g(x - y)`.
pub fn conv(f: &FuncR, g: &FuncR) -> Result<FuncR> {
    check_same(&f.group, &g.group)?;
    if use_fft(f, g) {
        return Ok(fourier::conv_via_fft(f, g));
    }
    Ok(pair_accumulate(f, g, |grp, y, z| grp.add(y, z)))
}

/// `(f∘g)(x) = E_y f(y) g(x + y)`.
pub fn diffconv(f: &FuncR, g: &FuncR) -> Result<FuncR> {
    check_same(&f.group, &g.group)?;
    if use_fft(f, g) {
        return Ok(fourier::conv_via_fft(&f.reflect(), g));
    }
    Ok(pair_accumulate(f, g, |grp, y, z| grp.sub(z, y)))
}

/// The normalised indicator `μ_A = α⁻¹ 1_A`.
pub fn mu_of_set(a: &GSet) -> Result<ProbMeasure> {
    if a.is_empty() {
        return Err(KmError::EmptySet);
    }
    let g = a.group();
    let n = g.size() as i128;
    let num = (0..g.size())
        .map(|i| if a.contains(i) { n } else { 0 })
        .collect();
    let exact = Exact::new(num, a.card() as i128).expect("nonzero denominator");
    Ok(ProbMeasure(FuncR::with_exact(g, exact)))
}

/// A nonnegative function with mean 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMeasure(FuncR);

impl ProbMeasure {
    /// Validates nonnegativity and unit mean; values in `(-1e-12, 0)` are
    /// snapped to zero.
    pub fn new(f: FuncR) -> Result<Self> {
        let mut f = f;
        if f.values.iter().any(|&v| v < 0.0) {
            if f.values.iter().any(|&v| v <= -1e-12 || v.is_nan()) {
                return Err(KmError::NotAMeasure("negative value".into()));
            }
            f = f.map(|v| v.max(0.0));
        }
        let m = f.mean();
        if m.is_nan() || num::abs(m - 1.0) > 1e-12 {
            return Err(KmError::NotAMeasure(alloc::format!("mean {m}")));
        }
        Ok(ProbMeasure(f))
    }

    pub fn uniform(group: &Group) -> Self {
        ProbMeasure(FuncR::constant(group, 1.0))
    }

    pub fn of_set(a: &GSet) -> Result<Self> {
        mu_of_set(a)
    }

    pub fn func(&self) -> &FuncR {
        &self.0
    }

    pub fn into_func(self) -> FuncR {
        self.0
    }

    pub fn group(&self) -> &Group {
        &self.0.group
    }

    /// `μ * ν` is again a probability measure.
    pub fn conv(&self, other: &ProbMeasure) -> Result<ProbMeasure> {
        conv(&self.0, &other.0).map(|f| ProbMeasure(f.map_exact_clamp()))
    }

    /// `μ ∘ ν` is again a probability measure.
    pub fn diffconv(&self, other: &ProbMeasure) -> Result<ProbMeasure> {
        diffconv(&self.0, &other.0).map(|f| ProbMeasure(f.map_exact_clamp()))
    }

    /// `x -> μ(x - t)`.
    pub fn translate(&self, t: usize) -> ProbMeasure {
        ProbMeasure(self.0.translate(t))
    }

    pub fn support(&self) -> GSet {
        self.0.support_set()
    }
}

impl FuncR {
    fn map_exact_clamp(self) -> FuncR {
        if self.exact.is_some() || self.values.iter().all(|&v| v >= 0.0) {
            self
        } else {
            self.map(|v| v.max(0.0))
        }
    }
}

/// `⟨f, g⟩_μ = E_x μ(x) f(x) g(x)`; uniform `μ` when `None`.
pub fn inner_wrt(f: &FuncR, g: &FuncR, mu: Option<&ProbMeasure>) -> Result<f64> {
    check_same(&f.group, &g.group)?;
    if let Some(m) = mu {
        check_same(&f.group, m.group())?;
    }
    let n = f.group.size();
    let exact_mu = match mu {
        Some(m) => m.0.exact.as_ref().map(Some),
        None => Some(None),
    };
    if let (Some(ef), Some(eg), Some(em)) = (&f.exact, &g.exact, exact_mu) {
        let r = (|| {
            let mut s = 0i128;
            for i in 0..n {
                let mut t = ef.num[i].checked_mul(eg.num[i])?;
                if let Some(em) = em {
                    t = t.checked_mul(em.num[i])?;
                }
                s = s.checked_add(t)?;
            }
            let mut den = (ef.den as f64) * (eg.den as f64) * n as f64;
            if let Some(em) = em {
                den *= em.den as f64;
            }
            Some(s as f64 / den)
        })();
        if let Some(v) = r {
            return Ok(v);
        }
    }
    let terms = (0..n).map(|i| {
        let w = mu.map_or(1.0, |m| m.0.values[i]);
        w * f.values[i] * g.values[i]
    });
    Ok(stable_sum(terms) / n as f64)
}

/// `‖f‖_{p(μ)} = (E_x μ(x) |f(x)|^p)^{1/p}`; `p = ∞` gives the maximum of
/// `|f|` over the support of `μ`.
pub fn lp_norm_wrt(f: &FuncR, p: f64, mu: Option<&ProbMeasure>) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(KmError::InvalidExponent(p));
    }
    if let Some(m) = mu {
        check_same(&f.group, m.group())?;
    }
    let n = f.group.size();
    let weight = |i: usize| mu.map_or(1.0, |m| m.0.values[i]);
    let big = (0..n)
        .filter(|&i| weight(i) > 0.0)
        .map(|i| num::abs(f.values[i]))
        .fold(0.0, f64::max);
    if big == 0.0 || p.is_infinite() {
        return Ok(big);
    }
    let s = stable_sum((0..n).map(|i| {
        let w = weight(i);
        if w == 0.0 {
            0.0
        } else {
            w * num::powf(num::abs(f.values[i]) / big, p)
        }
    }));
    Ok(big * num::powf(s / n as f64, 1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32) -> Group {
        Group::cyclic(n).unwrap()
    }

    fn set(g: &Group, xs: &[usize]) -> GSet {
        GSet::from_indices(g, xs.iter().copied())
    }

    fn assert_vals(f: &FuncR, want: &[f64]) {
        for (a, b) in f.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{:?} vs {:?}", f.values(), want);
        }
    }

    #[test]
    fn mu_of_set_examples() {
        let g = z(5);
        let full = mu_of_set(&GSet::full(&g)).unwrap();
        assert_vals(full.func(), &[1.0; 5]);
        let mu = mu_of_set(&set(&g, &[0, 1])).unwrap();
        assert_vals(mu.func(), &[2.5, 2.5, 0.0, 0.0, 0.0]);
        assert!(mu.func().is_exact());
        assert_eq!(mu_of_set(&GSet::empty(&g)), Err(KmError::EmptySet));
    }

    #[test]
    fn conv_examples() {
        let g = z(5);
        let one = FuncR::constant(&g, 1.0);
        assert_vals(&conv(&one, &one).unwrap(), &[1.0; 5]);
        let mu = mu_of_set(&set(&g, &[0, 1])).unwrap().into_func();
        let c = conv(&mu, &mu).unwrap();
        assert!(c.is_exact());
        assert_vals(&c, &[1.25, 2.5, 1.25, 0.0, 0.0]);
        let g4 = z(4);
        let c = conv(
            &FuncR::indicator(&set(&g4, &[0])),
            &FuncR::indicator(&set(&g4, &[1])),
        )
        .unwrap();
        assert_vals(&c, &[0.0, 0.25, 0.0, 0.0]);
        assert!(conv(&one, &FuncR::zero(&g4)).is_err());
    }

    #[test]
    fn diffconv_examples() {
        let g = z(5);
        let mu = mu_of_set(&set(&g, &[0, 1])).unwrap().into_func();
        assert_vals(&diffconv(&mu, &mu).unwrap(), &[2.5, 1.25, 0.0, 0.0, 1.25]);
        let g4 = z(4);
        let f = FuncR::indicator(&set(&g4, &[0, 2]));
        assert_eq!(diffconv(&f, &f).unwrap().value(0), 0.5);
        let g7 = z(7);
        let d = diffconv(
            &FuncR::indicator(&set(&g7, &[1])),
            &FuncR::indicator(&set(&g7, &[3])),
        )
        .unwrap();
        let mut want = [0.0; 7];
        want[2] = 1.0 / 7.0;
        assert_vals(&d, &want);
    }

    #[test]
    fn inner_examples() {
        let g = z(5);
        let a = set(&g, &[0, 1]);
        let mu = mu_of_set(&a).unwrap().into_func();
        let aa = conv(&mu, &mu).unwrap();
        let c = mu_of_set(&a.dilate(2).unwrap()).unwrap().into_func();
        assert!((inner_wrt(&aa, &c, None).unwrap() - 1.25).abs() < 1e-15);
        let full = mu_of_set(&GSet::full(&g)).unwrap().into_func();
        let ff = conv(&full, &full).unwrap();
        assert_eq!(inner_wrt(&ff, &full, None).unwrap(), 1.0);
        let g7 = z(7);
        let x = inner_wrt(
            &FuncR::indicator(&set(&g7, &[1])),
            &FuncR::indicator(&set(&g7, &[2])),
            None,
        )
        .unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn norm_examples() {
        let g = z(5);
        let mu = mu_of_set(&set(&g, &[0, 1])).unwrap().into_func();
        assert_eq!(lp_norm_wrt(&mu, f64::INFINITY, None).unwrap(), 2.5);
        let one = FuncR::constant(&g, 1.0);
        for p in [1.0, 2.0, 3.5, 10.0, f64::INFINITY] {
            assert!((lp_norm_wrt(&one, p, None).unwrap() - 1.0).abs() < 1e-15);
        }
        let mu0 = mu_of_set(&set(&g, &[0])).unwrap().into_func();
        let f = conv(&mu0, &mu0).unwrap().add_constant(-1.0);
        assert_vals(&f, &[4.0, -1.0, -1.0, -1.0, -1.0]);
        assert!((lp_norm_wrt(&f, 2.0, None).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(lp_norm_wrt(&f, 0.5, None), Err(KmError::InvalidExponent(0.5)));
    }

    #[test]
    fn weighted_norm_restricts_to_support() {
        let g = z(4);
        let f = FuncR::new(&g, vec![3.0, -5.0, 1.0, 0.0]).unwrap();
        let mu = mu_of_set(&set(&g, &[0, 2])).unwrap();
        assert_eq!(lp_norm_wrt(&f, f64::INFINITY, Some(&mu)).unwrap(), 3.0);
        let v = lp_norm_wrt(&f, 2.0, Some(&mu)).unwrap();
        assert!((v - 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn measure_validation() {
        let g = z(3);
        assert!(ProbMeasure::new(FuncR::new(&g, vec![3.0, 0.0, 0.0]).unwrap()).is_ok());
        assert!(ProbMeasure::new(FuncR::new(&g, vec![2.0, 0.0, 0.0]).unwrap()).is_err());
        assert!(ProbMeasure::new(FuncR::new(&g, vec![4.0, -1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn exact_survives_arithmetic() {
        let g = z(7);
        let mu = mu_of_set(&set(&g, &[0, 1, 3])).unwrap().into_func();
        let f = diffconv(&mu, &mu).unwrap().add_constant(-1.0);
        assert!(f.is_exact());
        assert!((f.mean()).abs() < 1e-15);
        let h = f.mul(&f).unwrap().scale_rational(3, 2);
        assert!(h.is_exact());
        assert!(!f.scale(0.5).is_exact());
    }
}
