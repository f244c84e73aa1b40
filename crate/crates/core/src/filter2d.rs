//! Two-dimensional recursive filters `F = A / B` and their stability.
//!
//! Arrays are indexed from `(1, 1)`: entry `(j, k)` pairs with the monomial
//! `z1^{j-1} z2^{k-1}`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mpoly::{MPoly, MultiIndex};
use crate::opa::{opa, OpaResult};
use crate::scalar::ExactScalar;
use crate::spaces::SpaceSpec;
use crate::text::parse_scalar;
use crate::zero_scan::{polydisk_zero_free, ZeroScanReport, ZeroVerdict, DEFAULT_GRID, DEFAULT_MARGIN};

pub trait FilterScalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_coeff(c: &ExactScalar) -> Result<Self>;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn parse(s: &str) -> Result<Self>;
}

impl FilterScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_coeff(c: &ExactScalar) -> Result<Self> {
        let z = c.to_complex64()?;
        if z.im != 0.0 {
            return Err(Error::Mode(format!("coefficient {c} is not real")));
        }
        Ok(z.re)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self / o)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn parse(s: &str) -> Result<Self> {
        s.trim().parse::<f64>().map_err(|e| Error::Parse { position: 0, message: format!("{s:?}: {e}") })
    }
}

impl FilterScalar for ExactScalar {
    fn zero() -> Self {
        ExactScalar::zero()
    }
    fn one() -> Self {
        ExactScalar::one()
    }
    fn from_coeff(c: &ExactScalar) -> Result<Self> {
        Ok(c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.checked_div(o)
    }
    fn is_zero(&self) -> bool {
        ExactScalar::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.to_complex64().map(|z| z.norm()).unwrap_or(f64::NAN)
    }
    fn parse(s: &str) -> Result<Self> {
        parse_scalar(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataArray<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: FilterScalar> DataArray<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DataArray { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Unit impulse at `(1, 1)`.
    pub fn impulse(rows: usize, cols: usize) -> Self {
        let mut d = Self::zeros(rows, cols);
        if rows > 0 && cols > 0 {
            d.data[0] = T::one();
        }
        d
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        let n = rows.len();
        Ok(DataArray { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(j, k)`, 1-based; zero outside the array.
    pub fn get(&self, j: usize, k: usize) -> T {
        self.get_ref(j, k).cloned().unwrap_or_else(T::zero)
    }

    fn get_ref(&self, j: usize, k: usize) -> Option<&T> {
        if j == 0 || k == 0 || j > self.rows || k > self.cols {
            None
        } else {
            Some(&self.data[(j - 1) * self.cols + (k - 1)])
        }
    }

    pub fn set(&mut self, j: usize, k: usize, v: T) -> Result<()> {
        if j == 0 || k == 0 || j > self.rows || k > self.cols {
            return Err(Error::InvalidArgument(format!("index ({j},{k}) outside {}x{}", self.rows, self.cols)));
        }
        self.data[(j - 1) * self.cols + (k - 1)] = v;
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: o.rows * o.cols });
        }
        Ok(DataArray {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(T::magnitude).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.rows {
            let row: Vec<String> =
                self.data[j * self.cols..(j + 1) * self.cols].iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(src: &str) -> Result<Self> {
        let rows = src
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(T::parse).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl DataArray<ExactScalar> {
    pub fn to_f64(&self) -> Result<DataArray<f64>> {
        let data = self.data.iter().map(f64::from_coeff).collect::<Result<Vec<_>>>()?;
        Ok(DataArray { rows: self.rows, cols: self.cols, data })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    pub a: MPoly,
    pub b: MPoly,
}

impl FilterSpec {
    pub fn new(a: MPoly, b: MPoly) -> Result<Self> {
        for p in [&a, &b] {
            if p.nvars() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: p.nvars() });
            }
        }
        if b.constant_term().is_zero() {
            return Err(Error::InvalidArgument("denominator has zero constant term b_{1,1}".into()));
        }
        Ok(FilterSpec { a, b })
    }

    /// `1 / B`.
    pub fn recursive(b: MPoly) -> Result<Self> {
        Self::new(MPoly::one(2), b)
    }

    pub fn b11(&self) -> ExactScalar {
        self.b.constant_term()
    }

    /// `(M, N)` sizes of a polynomial viewed as a coefficient array.
    pub fn sizes(p: &MPoly) -> (usize, usize) {
        (p.degree_in(0).map_or(0, |d| d as usize + 1), p.degree_in(1).map_or(0, |d| d as usize + 1))
    }
}

fn normalized<T: FilterScalar>(p: &MPoly, b11: &ExactScalar, skip_origin: bool) -> Result<Vec<(usize, usize, T)>> {
    let mut out = Vec::new();
    for (m, c) in p.terms() {
        let e = m.exponents();
        if skip_origin && e[0] == 0 && e[1] == 0 {
            continue;
        }
        out.push((e[0] as usize, e[1] as usize, T::from_coeff(&c.checked_div(b11)?)?));
    }
    Ok(out)
}

/// `r_{m,n} = Σ (a_{jk}/b11) d_{m−j+1,n−k+1} − Σ_{(j,k)≠(1,1)} (b_{jk}/b11) r_{m−j+1,n−k+1}`,
/// computed row-major.
pub fn run_recursion<T: FilterScalar>(
    fs: &FilterSpec,
    d: &DataArray<T>,
    out_rows: usize,
    out_cols: usize,
) -> Result<DataArray<T>> {
    let b11 = fs.b11();
    if b11.is_zero() {
        return Err(Error::InvalidArgument("denominator has zero constant term b_{1,1}".into()));
    }
    let a_terms: Vec<(usize, usize, T)> = normalized(&fs.a, &b11, false)?;
    let b_terms: Vec<(usize, usize, T)> = normalized(&fs.b, &b11, true)?;
    let mut r = DataArray::<T>::zeros(out_rows, out_cols);
    for m in 1..=out_rows {
        for n in 1..=out_cols {
            let mut acc = T::zero();
            for (j, k, c) in &a_terms {
                if *j < m && *k < n {
                    if let Some(v) = d.get_ref(m - j, n - k) {
                        acc = acc.add(&c.mul(v));
                    }
                }
            }
            for (j, k, c) in &b_terms {
                if *j < m && *k < n {
                    let v = &r.data[(m - j - 1) * out_cols + (n - k - 1)];
                    if !v.is_zero() {
                        acc = acc.sub(&c.mul(v));
                    }
                }
            }
            r.data[(m - 1) * out_cols + (n - 1)] = acc;
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Unbounded,
    Undetermined,
}

impl Growth {
    pub fn as_str(self) -> &'static str {
        match self {
            Growth::Bounded => "bounded",
            Growth::Unbounded => "unbounded",
            Growth::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseReport {
    pub response: DataArray<f64>,
    pub max_abs: f64,
    /// Maximum of `|r_{m,n}|` over the frame `max(m, n) = k + 1`.
    pub frame_maxima: Vec<f64>,
    /// Fitted geometric ratio between consecutive outer frames.
    pub decay_ratio: Option<f64>,
    pub growth: Growth,
}

/// Ratio above which the fitted frame growth counts as unbounded.
pub const GROWTH_THRESHOLD: f64 = 1.01;

fn frame_maxima(r: &DataArray<f64>) -> Vec<f64> {
    let frames = r.rows.max(r.cols);
    let mut out = vec![0.0f64; frames];
    for m in 1..=r.rows {
        for n in 1..=r.cols {
            let f = m.max(n) - 1;
            out[f] = out[f].max(r.get(m, n).abs());
        }
    }
    out
}

/// Least-squares slope of `log` frame maxima over the last quarter of the window.
fn geometric_fit(frames: &[f64]) -> Option<f64> {
    let start = frames.len() - frames.len() / 4;
    let pts: Vec<(f64, f64)> = frames[start.min(frames.len().saturating_sub(2))..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(i, v)| (i as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}

/// Response to the unit impulse at `(1, 1)`, in floating point.
pub fn impulse_response(fs: &FilterSpec, rows: usize, cols: usize) -> Result<ImpulseReport> {
    let response = run_recursion(fs, &DataArray::<f64>::impulse(rows, cols), rows, cols)?;
    let max_abs = response.max_abs();
    let frames = frame_maxima(&response);
    let decay_ratio = geometric_fit(&frames);
    let growth = if !max_abs.is_finite() {
        Growth::Unbounded
    } else if max_abs == 0.0 {
        Growth::Bounded
    } else {
        match decay_ratio {
            Some(q) if q > GROWTH_THRESHOLD => Growth::Unbounded,
            Some(_) => Growth::Bounded,
            None => Growth::Undetermined,
        }
    };
    Ok(ImpulseReport { response, max_abs, frame_maxima: frames, decay_ratio, growth })
}

#[derive(Clone, Debug, PartialEq)]
pub enum StabilityVerdict {
    Stable,
    Unstable { witness: [Complex64; 2] },
    Inconclusive { nearest: [Complex64; 2], min_modulus: f64 },
}

impl StabilityVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Unstable { .. } => "unstable",
            StabilityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub verdict: StabilityVerdict,
    pub scan: ZeroScanReport,
}

pub fn stability_check_with(b: &MPoly, grid: usize, margin: f64) -> Result<StabilityReport> {
    let scan = polydisk_zero_free(b, grid, margin)?;
    let verdict = match &scan.verdict {
        ZeroVerdict::ZeroFreeClosed => StabilityVerdict::Stable,
        ZeroVerdict::ZeroFound { witness, .. } => StabilityVerdict::Unstable { witness: *witness },
        ZeroVerdict::Inconclusive { nearest, min_modulus } => {
            StabilityVerdict::Inconclusive { nearest: *nearest, min_modulus: *min_modulus }
        }
    };
    Ok(StabilityReport { verdict, scan })
}

pub fn stability_check(b: &MPoly) -> Result<StabilityReport> {
    stability_check_with(b, DEFAULT_GRID, DEFAULT_MARGIN)
}

/// Window used to compare impulse responses in [`stabilize`].
pub const COMPARISON_WINDOW: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizeReport {
    pub p_n_star: MPoly,
    pub opa: OpaResult,
    pub original: StabilityReport,
    pub substitute: StabilityReport,
    pub original_impulse: ImpulseReport,
    /// `None` when `p_n^*(0, 0) = 0`.
    pub substitute_impulse: Option<ImpulseReport>,
    pub stabilized: bool,
}

/// Hardy-bidisk OPA `p_n^*` to `1/B` and the zero scan of `1/p_n^*`.
pub fn stabilize_with(b: &MPoly, n: usize, grid: usize, margin: f64) -> Result<StabilizeReport> {
    if b.nvars() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: b.nvars() });
    }
    if b.constant_term().is_zero() {
        return Err(Error::InvalidArgument("B(0,0) must be nonzero".into()));
    }
    let res = opa(&SpaceSpec::hardy_bidisk(), b, n)?;
    let p = res.approximant.clone();
    let original = stability_check_with(b, grid, margin)?;
    let substitute = stability_check_with(&p, grid, margin)?;
    let original_impulse = impulse_response(&FilterSpec::recursive(b.clone())?, COMPARISON_WINDOW, COMPARISON_WINDOW)?;
    let substitute_impulse = if p.constant_term().is_zero() {
        None
    } else {
        Some(impulse_response(&FilterSpec::recursive(p.clone())?, COMPARISON_WINDOW, COMPARISON_WINDOW)?)
    };
    let stabilized = substitute.verdict == StabilityVerdict::Stable;
    Ok(StabilizeReport {
        p_n_star: p,
        opa: res,
        original,
        substitute,
        original_impulse,
        substitute_impulse,
        stabilized,
    })
}

pub fn stabilize(b: &MPoly, n: usize) -> Result<StabilizeReport> {
    stabilize_with(b, n, DEFAULT_GRID, DEFAULT_MARGIN)
}

/// Polynomial whose `z1^{j-1} z2^{k-1}` coefficient is entry `(j, k)`.
pub fn array_to_poly(d: &DataArray<ExactScalar>) -> Result<MPoly> {
    let mut terms = Vec::new();
    for j in 1..=d.rows() {
        for k in 1..=d.cols() {
            let v = d.get(j, k);
            if !v.is_zero() {
                terms.push((MultiIndex::new(vec![j as u32 - 1, k as u32 - 1]), v));
            }
        }
    }
    MPoly::from_terms(2, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::text::parse_poly;

    fn p(s: &str) -> MPoly {
        parse_poly(s, 2).unwrap()
    }

    #[test]
    fn geometric_one_variable() {
        let fs = FilterSpec::recursive(p("1-z1/2")).unwrap();
        let r = run_recursion(&fs, &DataArray::<ExactScalar>::impulse(6, 3), 6, 3).unwrap();
        for m in 1..=6 {
            assert_eq!(r.get(m, 1), ExactScalar::from_rational(Rational::frac(1, 1 << (m - 1))));
            assert!(r.get(m, 2).is_zero());
        }
    }

    #[test]
    fn pascal() {
        let fs = FilterSpec::recursive(p("1-z1/2-z2/2")).unwrap();
        let r = run_recursion(&fs, &DataArray::<ExactScalar>::impulse(5, 5), 5, 5).unwrap();
        assert_eq!(r.get(3, 3), ExactScalar::frac(6, 16));
        assert_eq!(r.get(2, 4), ExactScalar::frac(4, 16));
    }

    #[test]
    fn growth_flags() {
        let up = impulse_response(&FilterSpec::recursive(p("1-2*z1")).unwrap(), 16, 16).unwrap();
        assert_eq!(up.growth, Growth::Unbounded);
        assert!((up.decay_ratio.unwrap() - 2.0).abs() < 1e-9);
        let diag = impulse_response(&FilterSpec::recursive(p("1-z1*z2/4")).unwrap(), 16, 16).unwrap();
        assert_eq!(diag.growth, Growth::Bounded);
        assert_eq!(diag.response.get(3, 3), 1.0 / 16.0);
        assert_eq!(diag.response.get(3, 2), 0.0);
        let zero = impulse_response(&FilterSpec::new(MPoly::zero(2), p("1-z1")).unwrap(), 8, 8).unwrap();
        assert_eq!(zero.max_abs, 0.0);
        assert!(FilterSpec::recursive(p("z1")).is_err());
    }

    #[test]
    fn stability_examples() {
        assert_eq!(
            stability_check_with(&p("1-z1/2-z2/4"), 256, DEFAULT_MARGIN).unwrap().verdict,
            StabilityVerdict::Stable
        );
        let v = stability_check_with(&p("2-z1-z2"), 256, DEFAULT_MARGIN).unwrap().verdict;
        assert!(matches!(v, StabilityVerdict::Inconclusive { .. } | StabilityVerdict::Unstable { .. }));
        let s = stabilize_with(&MPoly::one(2), 3, 64, DEFAULT_MARGIN).unwrap();
        assert_eq!(s.p_n_star, MPoly::one(2));
        assert!(s.stabilized);
    }

    #[test]
    fn csv_round_trip() {
        let d = DataArray::from_rows(vec![
            vec![ExactScalar::frac(1, 2), ExactScalar::zero()],
            vec![ExactScalar::one(), ExactScalar::frac(-3, 7)],
        ])
        .unwrap();
        assert_eq!(DataArray::<ExactScalar>::from_csv(&d.to_csv()).unwrap(), d);
    }
}
