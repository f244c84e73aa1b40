//! Diagonal reproducing kernel Hilbert spaces: Dirichlet-type spaces on
//! polydisks, the Drury-Arveson space on the ball and one-variable spaces
//! given by a weight table.
//!
//! Monomials are orthogonal in all of them, so every inner product is the
//! finite sum `Σ ω(k) p_k conj(q_k)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::mpoly::{self, MPoly, MultiIndex};
use crate::scalar::{ExactScalar, QuadExt, Rational};

/// A diagonal space, identified by its monomial weights `ω(k) = ‖z^k‖²`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    /// `D_{α1} ⊗ ⋯ ⊗ D_{αd}` with `ω(k) = Π (k_i+1)^{α_i}`; one entry is
    /// the disk, two the bidisk.
    Dirichlet { alphas: Vec<f64> },
    /// Drury-Arveson `H²_d` with `ω(k) = k!/|k|!`.
    DruryArveson { d: usize },
    /// One-variable `H_ω` from a finite table of positive weights. The ratio
    /// condition `ω(k+1)/ω(k) → 1` is taken on trust.
    CustomOmega { weights: Vec<Rational> },
}

/// Closed-form kernel shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// `1/(1 − λ̄z)`
    Szego,
    /// `1/(1 − λ̄z)²`
    BergmanDisk,
    /// `log(1/(1 − λ̄z))/(λ̄z)`
    ClassicalDirichlet,
    /// Product of one-variable kernels, one per coordinate.
    ProductOfDirichlet(Vec<KernelFamily>),
    /// `1/(1 − ⟨z, λ⟩)`
    DruryArveson,
}

impl SpaceSpec {
    pub fn dirichlet_disk(alpha: f64) -> Self {
        SpaceSpec::Dirichlet { alphas: vec![alpha] }
    }

    pub fn dirichlet_bidisk(alpha1: f64, alpha2: f64) -> Self {
        SpaceSpec::Dirichlet { alphas: vec![alpha1, alpha2] }
    }

    pub fn hardy_bidisk() -> Self {
        SpaceSpec::dirichlet_bidisk(0.0, 0.0)
    }

    pub fn bergman_bidisk() -> Self {
        SpaceSpec::dirichlet_bidisk(-1.0, -1.0)
    }

    pub fn drury_arveson(d: usize) -> Self {
        SpaceSpec::DruryArveson { d }
    }

    pub fn custom_omega(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| w.signum() <= 0) {
            return Err(Error::InvalidArgument("omega weights must be non-empty and positive".into()));
        }
        Ok(SpaceSpec::CustomOmega { weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceSpec::Dirichlet { alphas } => alphas.len(),
            SpaceSpec::DruryArveson { d } => *d,
            SpaceSpec::CustomOmega { .. } => 1,
        }
    }

    /// Whether every weight is an exact rational (integer `α` for Dirichlet families).
    pub fn is_exact(&self) -> bool {
        match self {
            SpaceSpec::Dirichlet { alphas } => alphas.iter().all(|a| integral_alpha(*a).is_some()),
            _ => true,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, SpaceSpec::DruryArveson { .. })
    }

    fn check_index(&self, k: &MultiIndex) -> Result<()> {
        if k.nvars() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: k.nvars() });
        }
        Ok(())
    }

    /// `ω(k) = ‖z^k‖²`, exactly.
    pub fn monomial_weight(&self, k: &MultiIndex) -> Result<Rational> {
        self.check_index(k)?;
        match self {
            SpaceSpec::Dirichlet { alphas } => {
                let mut w = Rational::one();
                for (&e, &a) in k.exponents().iter().zip(alphas) {
                    let a = integral_alpha(a).ok_or_else(|| {
                        Error::Mode(format!("alpha = {a} is not an integer; exact weights unavailable"))
                    })?;
                    if a != 0 {
                        w = w * Rational::from_integer(e as i64 + 1).pow(a)?;
                    }
                }
                Ok(w)
            }
            SpaceSpec::DruryArveson { .. } => {
                let multinomial = multinomial(k.exponents());
                Rational::new(BigInt::one(), multinomial)
            }
            SpaceSpec::CustomOmega { weights } => {
                let e = k.exponents()[0] as usize;
                weights.get(e).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "omega table has {} entries; weight of z^{e} requested",
                        weights.len()
                    ))
                })
            }
        }
    }

    /// `ω(k)` as a double; available for every `α`.
    pub fn monomial_weight_f64(&self, k: &MultiIndex) -> Result<f64> {
        self.check_index(k)?;
        match self {
            SpaceSpec::Dirichlet { alphas } => {
                Ok(k.exponents().iter().zip(alphas).map(|(&e, &a)| (e as f64 + 1.0).powf(a)).product())
            }
            _ => self.monomial_weight(k)?.to_f64(),
        }
    }

    /// The closed-form kernel, if the space has one.
    pub fn kernel_family(&self) -> Option<KernelFamily> {
        fn one_var(a: f64) -> Option<KernelFamily> {
            match integral_alpha(a)? {
                0 => Some(KernelFamily::Szego),
                -1 => Some(KernelFamily::BergmanDisk),
                1 => Some(KernelFamily::ClassicalDirichlet),
                _ => None,
            }
        }
        match self {
            SpaceSpec::Dirichlet { alphas } if alphas.len() == 1 => one_var(alphas[0]),
            SpaceSpec::Dirichlet { alphas } => {
                alphas.iter().map(|&a| one_var(a)).collect::<Option<Vec<_>>>().map(KernelFamily::ProductOfDirichlet)
            }
            SpaceSpec::DruryArveson { .. } => Some(KernelFamily::DruryArveson),
            SpaceSpec::CustomOmega { .. } => None,
        }
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

fn integral_alpha(a: f64) -> Option<i32> {
    (a.fract() == 0.0 && a.abs() <= 64.0).then_some(a as i32)
}

/// `|k|!/(k1!⋯kd!)`.
fn multinomial(k: &[u32]) -> BigInt {
    let mut acc = BigInt::one();
    let mut total = 0u64;
    for &e in k {
        for j in 1..=e as u64 {
            total += 1;
            acc = acc * BigInt::from(total) / BigInt::from(j);
        }
    }
    acc
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Dirichlet { alphas } => {
                let parts: Vec<String> = alphas.iter().map(|a| a.to_string()).collect();
                write!(f, "dirichlet:{}", parts.join(","))
            }
            SpaceSpec::DruryArveson { d } => write!(f, "da:{d}"),
            SpaceSpec::CustomOmega { weights } => {
                let parts: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "omega:[{}]", parts.join(","))
            }
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// `dirichlet:a1,…,ad`, `da:d`, `omega:[w0,w1,…]`, or one of the
    /// aliases `hardy`, `bergman`, `hardy2`, `bergman2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: String| Error::Parse { position: 0, message: m };
        match s {
            "hardy" => return Ok(SpaceSpec::dirichlet_disk(0.0)),
            "bergman" => return Ok(SpaceSpec::dirichlet_disk(-1.0)),
            "hardy2" => return Ok(SpaceSpec::hardy_bidisk()),
            "bergman2" => return Ok(SpaceSpec::bergman_bidisk()),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad(format!("space descriptor without ':': {s:?}")))?;
        match kind.trim() {
            "dirichlet" => {
                let alphas = rest
                    .split(',')
                    .map(|a| {
                        let a = a.trim();
                        a.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .or_else(|| a.parse::<Rational>().ok().and_then(|r| r.to_f64().ok()))
                            .ok_or_else(|| bad(format!("bad alpha {a:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SpaceSpec::Dirichlet { alphas })
            }
            "da" => {
                let d: usize = rest.trim().parse().map_err(|_| bad(format!("bad dimension {rest:?}")))?;
                if d == 0 {
                    return Err(bad("dimension must be positive".into()));
                }
                Ok(SpaceSpec::drury_arveson(d))
            }
            "omega" => {
                let body = rest
                    .trim()
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| bad("omega table must be bracketed".into()))?;
                let weights = body.split(',').map(|w| w.parse::<Rational>()).collect::<Result<Vec<_>>>()?;
                SpaceSpec::custom_omega(weights)
            }
            other => Err(bad(format!("unknown space family {other:?}"))),
        }
    }
}

/// `⟨p, q⟩ = Σ_k ω(k) p_k conj(q_k)`.
pub fn inner_product(s: &SpaceSpec, p: &MPoly, q: &MPoly) -> Result<ExactScalar> {
    check_poly(s, p)?;
    check_poly(s, q)?;
    let (small, large, swapped) = if p.len() <= q.len() { (p, q, false) } else { (q, p, true) };
    let mut total = ExactScalar::zero();
    for (k, a) in small.terms() {
        if let Some(b) = large.coeff_ref(k) {
            let w = s.monomial_weight(k)?;
            let t = if swapped { b * &a.conj() } else { a * &b.conj() };
            total += &t.scale(&w);
        }
    }
    Ok(total)
}

/// `‖p‖²` as an element of ℚ(√2).
pub fn norm_sqr(s: &SpaceSpec, p: &MPoly) -> Result<QuadExt> {
    check_poly(s, p)?;
    let mut total = QuadExt::zero();
    for (k, a) in p.terms() {
        total = total + a.norm_sqr().scale(&s.monomial_weight(k)?);
    }
    Ok(total)
}

/// `⟨p, q⟩_f = ⟨p f, q f⟩`.
pub fn weighted_inner_product(s: &SpaceSpec, f: &MPoly, p: &MPoly, q: &MPoly) -> Result<ExactScalar> {
    if f.is_zero() {
        return Err(Error::InvalidArgument("weight polynomial f must be nonzero".into()));
    }
    inner_product(s, &p.mul(f)?, &q.mul(f)?)
}

/// Float inner product of demoted polynomials.
pub fn inner_product_f64(
    s: &SpaceSpec,
    p: &[(MultiIndex, Complex64)],
    q: &[(MultiIndex, Complex64)],
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let lookup: std::collections::HashMap<&MultiIndex, &Complex64> = q.iter().map(|(m, c)| (m, c)).collect();
    for (k, a) in p {
        if let Some(b) = lookup.get(k) {
            total += a * b.conj() * s.monomial_weight_f64(k)?;
        }
    }
    Ok(total)
}

fn check_poly(s: &SpaceSpec, p: &MPoly) -> Result<()> {
    if p.nvars() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.nvars() });
    }
    Ok(())
}

fn check_point_dim(s: &SpaceSpec, n: usize) -> Result<()> {
    if n != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: n });
    }
    Ok(())
}

fn check_domain_f64(s: &SpaceSpec, z: &[Complex64]) -> Result<()> {
    let inside =
        if s.is_ball() { z.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1.0 } else { z.iter().all(|c| c.norm() < 1.0) };
    if inside {
        Ok(())
    } else {
        Err(Error::Domain(format!("{z:?} is not in the open domain of {s}")))
    }
}

/// Exact membership in the open domain.
pub fn check_domain_exact(s: &SpaceSpec, z: &[ExactScalar]) -> Result<()> {
    check_point_dim(s, z.len())?;
    let one = QuadExt::one();
    let inside = if s.is_ball() {
        let total = z.iter().fold(QuadExt::zero(), |acc, c| acc + c.norm_sqr());
        (&one - &total).signum() > 0
    } else {
        z.iter().all(|c| (&one - &c.norm_sqr()).signum() > 0)
    };
    if inside {
        Ok(())
    } else {
        let text: Vec<String> = z.iter().map(|c| c.to_string()).collect();
        Err(Error::Domain(format!("({}) is not in the open domain of {s}", text.join(","))))
    }
}

fn one_var_kernel(family: &KernelFamily, x: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match family {
        KernelFamily::Szego => one / (one - x),
        KernelFamily::BergmanDisk => one / ((one - x) * (one - x)),
        KernelFamily::ClassicalDirichlet => {
            if x.norm() < 1e-8 {
                // log(1/(1−x))/x = 1 + x/2 + x²/3 + …
                one + x / 2.0 + x * x / 3.0
            } else {
                -(one - x).ln() / x
            }
        }
        _ => unreachable!("not a one-variable kernel"),
    }
}

/// `𝔎_λ(z)` from the closed form.
pub fn kernel_eval(s: &SpaceSpec, lambda: &[Complex64], z: &[Complex64]) -> Result<Complex64> {
    check_point_dim(s, lambda.len())?;
    check_point_dim(s, z.len())?;
    check_domain_f64(s, lambda)?;
    check_domain_f64(s, z)?;
    let family = s.kernel_family().ok_or_else(|| Error::NoClosedForm(s.to_string()))?;
    Ok(match &family {
        KernelFamily::DruryArveson => {
            let ip: Complex64 = z.iter().zip(lambda).map(|(zi, li)| zi * li.conj()).sum();
            Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - ip)
        }
        KernelFamily::ProductOfDirichlet(factors) => factors
            .iter()
            .zip(z.iter().zip(lambda))
            .map(|(fam, (zi, li))| one_var_kernel(fam, li.conj() * zi))
            .product(),
        one => one_var_kernel(one, lambda[0].conj() * z[0]),
    })
}

/// `𝔎_λ(z)` exactly, for kernels that are rational functions (Szegő,
/// Bergman, their products, and Drury-Arveson).
pub fn kernel_eval_exact(s: &SpaceSpec, lambda: &[ExactScalar], z: &[ExactScalar]) -> Result<ExactScalar> {
    check_domain_exact(s, lambda)?;
    check_domain_exact(s, z)?;
    let family = s.kernel_family().ok_or_else(|| Error::NoClosedForm(s.to_string()))?;
    let one = ExactScalar::one();
    let factor = |fam: &KernelFamily, x: ExactScalar| -> Result<ExactScalar> {
        match fam {
            KernelFamily::Szego => (&one - &x).checked_inv(),
            KernelFamily::BergmanDisk => {
                let d = &one - &x;
                (&d * &d).checked_inv()
            }
            _ => Err(Error::NoClosedForm(format!("{s} (kernel is not rational)"))),
        }
    };
    match &family {
        KernelFamily::DruryArveson => {
            let ip: ExactScalar = z.iter().zip(lambda).map(|(zi, li)| zi * &li.conj()).sum();
            (&one - &ip).checked_inv()
        }
        KernelFamily::ProductOfDirichlet(factors) => {
            let mut acc = ExactScalar::one();
            for (fam, (zi, li)) in factors.iter().zip(z.iter().zip(lambda)) {
                acc *= &factor(fam, &li.conj() * zi)?;
            }
            Ok(acc)
        }
        single => factor(single, &lambda[0].conj() * &z[0]),
    }
}

/// Degree-`N` Taylor truncation `Σ_{|k|≤N} conj(λ^k)/ω(k) z^k` of `𝔎_λ`.
pub fn kernel_taylor(s: &SpaceSpec, lambda: &[ExactScalar], degree: u32) -> Result<MPoly> {
    check_domain_exact(s, lambda)?;
    let d = s.dim();
    let conj_lambda: Vec<ExactScalar> = lambda.iter().map(ExactScalar::conj).collect();
    // powers[i][e] = conj(λ_i)^e
    let powers: Vec<Vec<ExactScalar>> = conj_lambda
        .iter()
        .map(|c| {
            let mut row = vec![ExactScalar::one()];
            for e in 1..=degree as usize {
                let next = &row[e - 1] * c;
                row.push(next);
            }
            row
        })
        .collect();
    let count = mpoly::monomials_below_degree(degree + 1, d);
    let mut terms = Vec::with_capacity(count);
    for j in 0..count {
        let k = mpoly::deglex_unrank(j, d);
        let mut c = ExactScalar::one();
        for (i, &e) in k.exponents().iter().enumerate() {
            if e > 0 {
                c *= &powers[i][e as usize];
            }
        }
        if c.is_zero() {
            continue;
        }
        let w = s.monomial_weight(&k)?;
        terms.push((k, c.scale(&w.checked_inv()?)));
    }
    MPoly::from_terms(d, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weights() {
        assert_eq!(SpaceSpec::drury_arveson(2).monomial_weight(&mi(&[1, 1])).unwrap(), Rational::frac(1, 2));
        assert_eq!(SpaceSpec::drury_arveson(2).monomial_weight(&mi(&[2, 2])).unwrap(), Rational::frac(1, 6));
        assert_eq!(
            SpaceSpec::dirichlet_bidisk(1.0, 1.0).monomial_weight(&mi(&[1, 1])).unwrap(),
            Rational::from_integer(4)
        );
        assert_eq!(SpaceSpec::bergman_bidisk().monomial_weight(&mi(&[2, 1])).unwrap(), Rational::frac(1, 6));
    }

    #[test]
    fn fractional_alpha_is_a_mode_error_in_exact_mode() {
        let s = SpaceSpec::dirichlet_bidisk(-0.85, -0.85);
        assert!(matches!(s.monomial_weight(&mi(&[1, 0])), Err(Error::Mode(_))));
        let w = s.monomial_weight_f64(&mi(&[1, 0])).unwrap();
        assert!((w - 2f64.powf(-0.85)).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let hardy = SpaceSpec::hardy_bidisk();
        let f = parse_poly("2-z1-z2", 2).unwrap();
        assert_eq!(inner_product(&hardy, &f, &f).unwrap(), ExactScalar::from_integer(6));
        let z1 = parse_poly("z1", 2).unwrap();
        let z2 = parse_poly("z2", 2).unwrap();
        assert!(inner_product(&SpaceSpec::drury_arveson(2), &z1, &z2).unwrap().is_zero());
        let z1f = z1.mul(&f).unwrap();
        assert_eq!(inner_product(&hardy, &f, &z1f).unwrap(), ExactScalar::from_integer(-2));
    }

    #[test]
    fn weighted_inner_products() {
        let hardy = SpaceSpec::hardy_bidisk();
        let f = parse_poly("1-z1*z2", 2).unwrap();
        let one = MPoly::one(2);
        let z1 = parse_poly("z1", 2).unwrap();
        let z2 = parse_poly("z2", 2).unwrap();
        let z1z2 = parse_poly("z1*z2", 2).unwrap();
        assert_eq!(weighted_inner_product(&hardy, &f, &one, &one).unwrap(), ExactScalar::from_integer(2));
        assert!(weighted_inner_product(&hardy, &f, &z1, &z2).unwrap().is_zero());
        assert_eq!(weighted_inner_product(&hardy, &f, &one, &z1z2).unwrap(), ExactScalar::from_integer(-1));
    }

    #[test]
    fn kernel_values() {
        let szego = SpaceSpec::dirichlet_disk(0.0);
        let v = kernel_eval(&szego, &[c(0.0, 0.0)], &[c(0.3, -0.2)]).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        let bergman = SpaceSpec::dirichlet_disk(-1.0);
        let v = kernel_eval(&bergman, &[c(0.5, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert!((v.re - 16.0 / 9.0).abs() < 1e-14);
        let da = SpaceSpec::drury_arveson(2);
        let v = kernel_eval(&da, &[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((v.re - 4.0 / 3.0).abs() < 1e-14);
        assert!(matches!(
            kernel_eval(&da, &[c(0.8, 0.0), c(0.7, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            kernel_eval(&SpaceSpec::dirichlet_disk(0.5), &[c(0.1, 0.0)], &[c(0.1, 0.0)]),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn taylor_truncations() {
        let szego = SpaceSpec::dirichlet_disk(0.0);
        let k = kernel_taylor(&szego, &[ExactScalar::frac(1, 2)], 2).unwrap();
        assert_eq!(k, parse_poly("1+z1/2+z1^2/4", 1).unwrap());
        let da = SpaceSpec::drury_arveson(2);
        let k = kernel_taylor(&da, &[ExactScalar::frac(1, 2), ExactScalar::frac(1, 2)], 1).unwrap();
        assert_eq!(k, parse_poly("1+z1/2+z2/2", 2).unwrap());
        let k = kernel_taylor(&da, &[ExactScalar::zero(), ExactScalar::zero()], 5).unwrap();
        assert_eq!(k, MPoly::one(2));
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["dirichlet:0,0", "dirichlet:-1", "da:3", "omega:[1,1/2,1/3]", "dirichlet:-0.85,0"] {
            let s: SpaceSpec = d.parse().unwrap();
            assert_eq!(s.to_string(), d);
        }
        assert_eq!("hardy2".parse::<SpaceSpec>().unwrap(), SpaceSpec::hardy_bidisk());
        assert!("omega:[1,0]".parse::<SpaceSpec>().is_err());
    }
}
