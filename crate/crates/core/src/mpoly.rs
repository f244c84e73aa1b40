//! Sparse multivariate polynomials over [`ExactScalar`] and the degree
//! lexicographic monomial order.
//!
//! Within a block of fixed total degree, monomials are ordered by decreasing
//! exponent of `z1`, then `z2`, and so on; so in two variables
//! `χ_0 = 1, χ_1 = z1, χ_2 = z2, χ_3 = z1², χ_4 = z1z2, χ_5 = z2²`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Rational};

/// Exponent vector of a monomial `z1^k1 ⋯ zd^kd`.
///
/// `Ord` is the degree lexicographic order, so ordered maps keyed by
/// `MultiIndex` iterate in `χ_j` order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The exponent vector of the single variable `z_{var+1}`.
    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    /// `(z1⋯zd)^k`.
    pub fn diagonal(nvars: usize, k: u32) -> Self {
        MultiIndex(vec![k; nvars])
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.nvars(), other.nvars());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other` when every entry stays non-negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(MultiIndex)
    }

    /// Position `j` of this monomial in the deglex sequence `χ_0, χ_1, …`.
    pub fn rank(&self) -> usize {
        deglex_rank(self)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "z{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Number of monomials in `nvars` variables of total degree `< degree`.
pub fn monomials_below_degree(degree: u32, nvars: usize) -> usize {
    if nvars == 0 {
        return usize::from(degree > 0);
    }
    binomial(degree as u64 + nvars as u64 - 1, nvars as u64) as usize
}

/// Number of monomials in `nvars` variables of total degree exactly `degree`.
pub fn monomials_of_degree(degree: u32, nvars: usize) -> usize {
    if nvars == 0 {
        return usize::from(degree == 0);
    }
    binomial(degree as u64 + nvars as u64 - 1, nvars as u64 - 1) as usize
}

/// Deglex rank: the `j` with `χ_j = z^m`; `χ_0 = 1`.
pub fn deglex_rank(m: &MultiIndex) -> usize {
    let d = m.nvars();
    let n = m.degree();
    let mut rank = monomials_below_degree(n, d);
    let mut remaining = n;
    for (i, &e) in m.0.iter().enumerate().take(d.saturating_sub(1)) {
        // monomials sharing the prefix but with a larger exponent in slot i
        let rest_vars = (d - i - 1) as u64;
        if remaining > e {
            let t = (remaining - e - 1) as u64;
            rank += binomial(t + rest_vars, rest_vars) as usize;
        }
        remaining -= e;
    }
    rank
}

/// Inverse of [`deglex_rank`].
pub fn deglex_unrank(mut j: usize, nvars: usize) -> MultiIndex {
    if nvars == 0 {
        return MultiIndex(vec![]);
    }
    let mut degree = 0u32;
    loop {
        let block = monomials_of_degree(degree, nvars);
        if j < block {
            break;
        }
        j -= block;
        degree += 1;
    }
    let mut exps = vec![0u32; nvars];
    let mut remaining = degree;
    for (i, slot) in exps.iter_mut().enumerate().take(nvars - 1) {
        let rest_vars = nvars - i - 1;
        // exponents are visited from largest to smallest
        let mut e = remaining;
        loop {
            let count = monomials_of_degree(remaining - e, rest_vars);
            if j < count {
                break;
            }
            j -= count;
            e -= 1;
        }
        *slot = e;
        remaining -= e;
    }
    exps[nvars - 1] = remaining;
    MultiIndex(exps)
}

/// `⊘n`: the deglex index of `(z1⋯zd)^n`, the least `m` with `(z1⋯zd)^n ∈ 𝒫_m`.
pub fn diag_threshold(n: u32, nvars: usize) -> usize {
    deglex_rank(&MultiIndex::diagonal(nvars, n))
}

/// The monomials `χ_0, …, χ_n`.
pub fn deglex_basis(n: usize, nvars: usize) -> Vec<MultiIndex> {
    (0..=n).map(|j| deglex_unrank(j, nvars)).collect()
}

/// Sparse polynomial in `nvars` variables; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, ExactScalar>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: ExactScalar) -> Self {
        MPoly::monomial(MultiIndex::zero(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, ExactScalar::one())
    }

    pub fn monomial(m: MultiIndex, c: ExactScalar) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { nvars, terms }
    }

    /// The variable `z_{var+1}`.
    pub fn var(nvars: usize, var: usize) -> Self {
        MPoly::monomial(MultiIndex::var(nvars, var), ExactScalar::one())
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeated monomials.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, ExactScalar)>,
    {
        let mut p = MPoly::zero(nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: m.nvars() });
            }
            p.add_term(m, &c);
        }
        Ok(p)
    }

    /// Polynomial `Σ c_j χ_j` from coefficients on a monomial basis.
    pub fn from_basis(nvars: usize, basis: &[MultiIndex], coeffs: &[ExactScalar]) -> Self {
        let mut p = MPoly::zero(nvars);
        for (m, c) in basis.iter().zip(coeffs) {
            p.add_term(m.clone(), c);
        }
        p
    }

    /// One-variable polynomial from dense coefficients `[c0, c1, …]`.
    pub fn univariate(coeffs: &[ExactScalar]) -> Self {
        let mut p = MPoly::zero(1);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::new(vec![k as u32]), c);
        }
        p
    }

    fn add_term(&mut self, m: MultiIndex, c: &ExactScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in deglex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> ExactScalar {
        self.terms.get(m).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn coeff_ref(&self, m: &MultiIndex) -> Option<&ExactScalar> {
        self.terms.get(m)
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.coeff(&MultiIndex::zero(self.nvars))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.exponents()[var]).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_zero)
    }

    /// Largest deglex rank among the support, `None` for the zero polynomial.
    pub fn leading_rank(&self) -> Option<usize> {
        self.terms.keys().next_back().map(deglex_rank)
    }

    fn check_dims(&self, other: &MPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, found: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &MPoly) -> Result<MPoly> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MPoly) -> Result<MPoly> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &MPoly) -> Result<MPoly> {
        self.check_dims(other)?;
        let mut out = MPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.add(m2), &(c1 * c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ExactScalar) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn neg(&self) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, x)| (m.clone(), -x)).collect() }
    }

    /// Multiplication by the monomial `z^m` (the shift `S^m`).
    pub fn shift(&self, m: &MultiIndex) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(k, x)| (k.add(m), x.clone())).collect() }
    }

    pub fn pow(&self, exp: u32) -> MPoly {
        let mut acc = MPoly::one(self.nvars);
        for _ in 0..exp {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    /// Coefficient-wise conjugate (so that `conj(p)(z̄) = conj(p(z))`).
    pub fn conj_coeffs(&self) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, x)| (m.clone(), x.conj())).collect() }
    }

    /// `p(ρ z1, …, ρ zd)`: the coefficient of `z^m` is multiplied by `ρ^{|m|}`.
    pub fn dilate(&self, rho: &Rational) -> Result<MPoly> {
        if rho.signum() <= 0 {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        Ok(MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x.scale(&rho.pow(m.degree() as i32).expect("ρ > 0"))))
                .collect(),
        })
    }

    /// Exact evaluation at a point with exact coordinates.
    pub fn eval_exact(&self, z: &[ExactScalar]) -> Result<ExactScalar> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, found: z.len() });
        }
        let mut total = ExactScalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (zi, &e) in z.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= &zi.pow(e);
                }
            }
            total += &t;
        }
        Ok(total)
    }

    /// Coefficients demoted to `f64`, in deglex order.
    pub fn to_float_terms(&self) -> Result<Vec<(MultiIndex, Complex64)>> {
        self.terms.iter().map(|(m, c)| Ok((m.clone(), c.to_complex64()?))).collect()
    }

    /// Floating-point evaluation after demoting the coefficients.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let terms = self.to_float_terms()?;
        eval_float_terms(&terms, self.nvars, z)
    }

    /// Rewrites `p` as a polynomial in the single variable `z_{var+1}`, with
    /// coefficients that are polynomials in the remaining variables (still
    /// stored with `nvars` slots, the chosen slot zeroed).
    pub fn coefficients_in(&self, var: usize) -> Vec<MPoly> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = vec![MPoly::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponents()[var] as usize;
            let mut rest = m.exponents().to_vec();
            rest[var] = 0;
            out[e].add_term(MultiIndex::new(rest), c);
        }
        out
    }
}

/// Evaluates demoted terms by a table of variable powers.
pub fn eval_float_terms(terms: &[(MultiIndex, Complex64)], nvars: usize, z: &[Complex64]) -> Result<Complex64> {
    if z.len() != nvars {
        return Err(Error::DimensionMismatch { expected: nvars, found: z.len() });
    }
    let max_deg = terms.iter().flat_map(|(m, _)| m.exponents().iter().copied()).max().unwrap_or(0) as usize;
    let powers: Vec<Vec<Complex64>> = z
        .iter()
        .map(|&zi| {
            let mut row = Vec::with_capacity(max_deg + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=max_deg {
                row.push(acc);
                acc *= zi;
            }
            row
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (m, c) in terms {
        let mut t = *c;
        for (i, &e) in m.exponents().iter().enumerate() {
            t *= powers[i][e as usize];
        }
        total += t;
    }
    Ok(total)
}

/// Operation selector for [`poly_arith`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    Scale(ExactScalar),
}

/// Ring arithmetic by selector; `Scale` ignores `q`.
pub fn poly_arith(p: &MPoly, q: &MPoly, op: &PolyOp) -> Result<MPoly> {
    match op {
        PolyOp::Add => p.add(q),
        PolyOp::Sub => p.sub(q),
        PolyOp::Mul => p.mul(q),
        PolyOp::Scale(c) => Ok(p.scale(c)),
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (negative, body) = term_text(m, c);
            match (i, negative) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, "+{body}")?,
            }
        }
        Ok(())
    }
}

/// Sign and unsigned text of one term.
fn term_text(m: &MultiIndex, c: &ExactScalar) -> (bool, String) {
    let constant = m.is_zero();
    if let Some(r) = c.as_rational() {
        let negative = r.signum() < 0;
        let r = r.abs();
        let body = match (constant, r.is_one()) {
            (true, _) => r.to_string(),
            (false, true) => m.to_string(),
            (false, false) => format!("{r}*{m}"),
        };
        return (negative, body);
    }
    let coeff = if c.is_real() { format!("({c})") } else { c.to_string() };
    if constant {
        (false, coeff)
    } else {
        (false, format!("{coeff}*{m}"))
    }
}

impl FromStr for MPoly {
    type Err = Error;

    /// Parses with the number of variables inferred from the highest `zk` present (at least 1).
    fn from_str(s: &str) -> Result<Self> {
        crate::text::parse_poly_auto(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MPoly {
        crate::text::parse_poly(s, 2).unwrap()
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn rank_matches_listed_order() {
        assert_eq!(deglex_rank(&mi(&[0, 0])), 0);
        assert_eq!(deglex_rank(&mi(&[1, 0])), 1);
        assert_eq!(deglex_rank(&mi(&[0, 1])), 2);
        assert_eq!(deglex_rank(&mi(&[2, 0])), 3);
        assert_eq!(deglex_rank(&mi(&[1, 1])), 4);
        assert_eq!(deglex_rank(&mi(&[0, 2])), 5);
        assert_eq!(deglex_rank(&mi(&[3, 0])), 6);
        assert_eq!(deglex_rank(&mi(&[2, 2])), 12);
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(deglex_unrank(4, 2), mi(&[1, 1]));
        assert_eq!(deglex_unrank(0, 2), mi(&[0, 0]));
        assert_eq!(deglex_unrank(1, 3), mi(&[1, 0, 0]));
        assert_eq!(deglex_unrank(3, 3), mi(&[0, 0, 1]));
    }

    #[test]
    fn diag_thresholds() {
        assert_eq!(diag_threshold(0, 2), 0);
        assert_eq!(diag_threshold(1, 2), 4);
        assert_eq!(diag_threshold(2, 2), 12);
        assert_eq!(diag_threshold(3, 2), 24);
    }

    #[test]
    fn ord_agrees_with_rank() {
        let mut all: Vec<MultiIndex> = (0..60).map(|j| deglex_unrank(j, 3)).collect();
        let sorted = {
            let mut s = all.clone();
            s.sort();
            s
        };
        assert_eq!(all, sorted);
        all.dedup();
        assert_eq!(all.len(), 60);
    }

    #[test]
    fn difference_of_squares() {
        let r = p("1-z1*z2").mul(&p("1+z1*z2")).unwrap();
        assert_eq!(r, p("1-z1^2*z2^2"));
    }

    #[test]
    fn shift_by_z1() {
        let f = p("2-z1-z2");
        assert_eq!(p("z1").mul(&f).unwrap(), p("2*z1-z1^2-z1*z2"));
        assert_eq!(f.shift(&mi(&[1, 0])), p("2*z1-z1^2-z1*z2"));
    }

    #[test]
    fn scale_by_eighth() {
        let r = poly_arith(&p("3+z1"), &MPoly::zero(2), &PolyOp::Scale(ExactScalar::frac(1, 8))).unwrap();
        assert_eq!(r.to_string(), "3/8+1/8*z1");
    }

    #[test]
    fn evaluation_at_boundary_zeros() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(p("1-z1*z2").eval(&[one, one]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(p("2-z1-z2").eval(&[one, one]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn genin_kamp_zero() {
        let q = p("(39+23*z1+23*z2)/1165");
        let w = Complex64::from_polar(0.9, 3.0);
        let z2 = -w - 39.0 / 23.0;
        assert!(q.eval(&[w, z2]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn dilation() {
        let rho = Rational::frac(99, 100);
        assert_eq!(p("1-z1*z2").dilate(&rho).unwrap(), p("1-9801/10000*z1*z2"));
        assert_eq!(p("7/3").dilate(&rho).unwrap(), p("7/3"));
        let b = p("-4+3*z1-z1^2+3*z2-2*z1*z2+z1^2*z2-z2^2+z1*z2^2");
        let bt = b.dilate(&rho).unwrap();
        assert_eq!(bt.coeff(&mi(&[1, 0])), ExactScalar::frac(297, 100));
        assert!(b.dilate(&Rational::zero()).is_err());
    }

    #[test]
    fn printing_is_deglex() {
        let q = p("z2^2+z1*z2+1+z1^2");
        assert_eq!(q.to_string(), "1+z1^2+z1*z2+z2^2");
        assert_eq!(p("1-(1/2*s2)*z1").to_string(), "1+(-1/2*s2)*z1");
        assert_eq!(p("(1/2,1/3)*z1").to_string(), "(1/2,1/3)*z1");
    }
}
