//! Explicit approximants and distances for `1 − z` style targets: the
//! one-variable weighted formula, its diagonal embeddings into the bidisk and
//! ball, cyclicity of the diagonal families, and the unitary rotation on the
//! two-ball.

use num_bigint::BigInt;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::mpoly::{diag_threshold, MPoly, MultiIndex};
use crate::scalar::{ExactScalar, QuadExt, Rational};

/// Where a weight sequence came from.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// `ω(k) = (k+1)^s` with `s = α1 + α2`.
    Dirichlet { alpha_sum: f64 },
    /// `ω_d(k) = d^{dk} (k!)^d / (dk)!`.
    DruryArvesonDiag { d: u32 },
    /// Finite user table.
    Custom(Vec<Rational>),
}

/// Positive weights `ω(0), ω(1), …` of a one-variable space `H_ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    pub kind: WeightKind,
}

impl WeightSequence {
    pub fn dirichlet(alpha_sum: f64) -> Self {
        WeightSequence { kind: WeightKind::Dirichlet { alpha_sum } }
    }

    pub fn hardy() -> Self {
        Self::dirichlet(0.0)
    }

    pub fn drury_arveson_diag(d: u32) -> Self {
        WeightSequence { kind: WeightKind::DruryArvesonDiag { d } }
    }

    pub fn custom(table: Vec<Rational>) -> Result<Self> {
        if table.is_empty() || table.iter().any(|w| w.signum() <= 0) {
            return Err(Error::InvalidArgument("weights must be non-empty and positive".into()));
        }
        Ok(WeightSequence { kind: WeightKind::Custom(table) })
    }

    pub fn omega(&self, k: u32) -> Result<Rational> {
        match &self.kind {
            WeightKind::Dirichlet { alpha_sum } => {
                if alpha_sum.fract() != 0.0 {
                    return Err(Error::Mode(format!("alpha sum {alpha_sum} is not an integer")));
                }
                Rational::from_integer(k as i64 + 1).pow(*alpha_sum as i32)
            }
            WeightKind::DruryArvesonDiag { d } => Ok(omega_d(*d, k)),
            WeightKind::Custom(table) => table.get(k as usize).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("weight table has {} entries; omega({k}) requested", table.len()))
            }),
        }
    }

    pub fn omega_f64(&self, k: u32) -> Result<f64> {
        match &self.kind {
            WeightKind::Dirichlet { alpha_sum } => Ok((k as f64 + 1.0).powf(*alpha_sum)),
            _ => self.omega(k)?.to_f64(),
        }
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// `ω_d(k) = d^{dk} (k!)^d / (dk)!`, the norm of `(d^{d/2} z1⋯zd)^k` in `H²_d`.
pub fn omega_d(d: u32, k: u32) -> Rational {
    let num = Pow::pow(BigInt::from(d), d * k) * Pow::pow(factorial(k), d);
    Rational::new(num, factorial(d * k)).expect("factorial is nonzero")
}

fn inverse_partial_sums(w: &WeightSequence, upto: u32) -> Result<Vec<Rational>> {
    let mut sums = Vec::with_capacity(upto as usize + 1);
    let mut acc = Rational::zero();
    for k in 0..=upto {
        acc = acc + w.omega(k)?.checked_inv()?;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Coefficients `1 − S_k/S_{n+1}`, `k = 0, …, n`, with `S_k = Σ_{j≤k} 1/ω(j)`.
pub fn fms_coefficients(w: &WeightSequence, n: u32) -> Result<Vec<Rational>> {
    let sums = inverse_partial_sums(w, n + 1)?;
    let total = &sums[n as usize + 1];
    (0..=n as usize).map(|k| Ok(Rational::one() - sums[k].checked_div(total)?)).collect()
}

/// Approximant of `1/(1 − z)` of degree `n` in `H_ω`.
pub fn fms_opa(w: &WeightSequence, n: u32) -> Result<MPoly> {
    let coeffs: Vec<ExactScalar> = fms_coefficients(w, n)?.into_iter().map(ExactScalar::from_rational).collect();
    Ok(MPoly::univariate(&coeffs))
}

/// `ν_n² = 1/Σ_{k≤n+1} 1/ω(k)`.
pub fn fms_distance(w: &WeightSequence, n: u32) -> Result<Rational> {
    let sums = inverse_partial_sums(w, n + 1)?;
    sums[n as usize + 1].checked_inv()
}

/// `lim ν_n²` with an estimate of the neglected tail.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitDistance {
    pub nu2: f64,
    pub nu: f64,
    /// Bound on the error in the series `Σ 1/ω(k)` after tail correction.
    pub tail_bound: f64,
    /// `Σ 1/ω(k)` diverges, so `ν_n → 0`.
    pub cyclic: bool,
    /// Number of terms summed explicitly.
    pub terms: u32,
}

/// `Σ_{m>K} m^{-s}` by Euler-Maclaurin, with the size of the first omitted correction.
fn zeta_tail(s: f64, k: f64) -> (f64, f64) {
    let t = k.powf(1.0 - s) / (s - 1.0) - 0.5 * k.powf(-s) + s / 12.0 * k.powf(-s - 1.0);
    let err = s * (s + 1.0) * (s + 2.0) / 720.0 * k.powf(-s - 3.0);
    (t, err)
}

/// `ν² = 1/Σ_k 1/ω(k)`, summing `terms` weights exactly in double precision
/// and correcting the tail from the weight asymptotics.
pub fn fms_distance_limit(w: &WeightSequence, terms: u32) -> Result<LimitDistance> {
    let terms = terms.max(10);
    let (convergent, tail, tail_bound) = match &w.kind {
        WeightKind::Dirichlet { alpha_sum } => {
            if *alpha_sum <= 1.0 {
                (false, 0.0, 0.0)
            } else {
                // weights are (k+1)^s for k ≤ terms−1, i.e. m^s for m ≤ terms
                let (t, e) = zeta_tail(*alpha_sum, terms as f64);
                (true, t, e)
            }
        }
        WeightKind::DruryArvesonDiag { d } => {
            if *d <= 3 {
                (false, 0.0, 0.0)
            } else {
                // 1/ω_d(k) ~ c k^{-s} with s = (d−1)/2 and c = √d (2π)^{-s}
                let s = (*d as f64 - 1.0) / 2.0;
                let c = (*d as f64).sqrt() * (2.0 * std::f64::consts::PI).powf(-s);
                let k = terms as f64 - 0.5;
                let t = c * k.powf(1.0 - s) / (s - 1.0);
                (true, t, t / terms as f64 + c * k.powf(-s))
            }
        }
        WeightKind::Custom(_) => {
            return Err(Error::InvalidArgument("limits need an infinite weight sequence".into()));
        }
    };
    if !convergent {
        return Ok(LimitDistance { nu2: 0.0, nu: 0.0, tail_bound: 0.0, cyclic: true, terms });
    }
    let mut sum = 0.0;
    for k in (0..terms).rev() {
        sum += 1.0 / w.omega_f64(k)?;
    }
    let total = sum + tail;
    let nu2 = 1.0 / total;
    Ok(LimitDistance { nu2, nu: nu2.sqrt(), tail_bound, cyclic: false, terms })
}

/// Ambient space of a diagonal family.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagTarget {
    /// `1 − z1 z2` in `𝔇_{α1,α2}`.
    Bidisk { alpha1: f64, alpha2: f64 },
    /// `1 − d^{d/2} z1⋯zd` in `H²_d`.
    Ball { d: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagEmbedResult {
    pub f: MPoly,
    pub approximant: MPoly,
    /// Orders `m` with `⊘n ≤ m < ⊘(n+1)`, for which `p_m^*` equals `approximant`.
    pub valid_from: usize,
    pub valid_to: usize,
}

/// `d^{d/2}` when it lies in `ℚ(√2)`.
fn ball_scale(d: u32) -> Result<QuadExt> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if d.is_multiple_of(2) {
        let v: BigInt = Pow::pow(BigInt::from(d), d / 2);
        return Ok(QuadExt::from_rational(Rational::from_integer(v)));
    }
    if d == 1 {
        return Ok(QuadExt::one());
    }
    Err(Error::InvalidArgument(format!("d^(d/2) for d = {d} is not in Q(sqrt 2)")))
}

/// Approximants of the diagonal families, obtained from the one-variable
/// formula through `z ↦ z1 z2` or `z ↦ d^{d/2} z1⋯zd`.
pub fn diag_embed_opa(target: &DiagTarget, n: u32) -> Result<DiagEmbedResult> {
    let (weights, nvars, scale) = match target {
        DiagTarget::Bidisk { alpha1, alpha2 } => (WeightSequence::dirichlet(alpha1 + alpha2), 2usize, QuadExt::one()),
        DiagTarget::Ball { d } => (WeightSequence::drury_arveson_diag(*d), *d as usize, ball_scale(*d)?),
    };
    let coeffs = fms_coefficients(&weights, n)?;
    let mut power = QuadExt::one();
    let mut terms = Vec::with_capacity(coeffs.len());
    for (k, c) in coeffs.into_iter().enumerate() {
        terms.push((MultiIndex::diagonal(nvars, k as u32), ExactScalar::from_quad(power.scale(&c))));
        power = &power * &scale;
    }
    let approximant = MPoly::from_terms(nvars, terms)?;
    let f = MPoly::one(nvars).sub(&MPoly::monomial(MultiIndex::diagonal(nvars, 1), ExactScalar::from_quad(scale)))?;
    Ok(DiagEmbedResult { f, approximant, valid_from: diag_threshold(n, nvars), valid_to: diag_threshold(n + 1, nvars) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiagFamily {
    Bidisk { alpha1: f64, alpha2: f64 },
    Ball { d: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cyclicity {
    pub cyclic: bool,
    pub nu_limit: f64,
}

/// `1 − z1 z2` is cyclic in `𝔇_{α1,α2}` iff `α1 + α2 ≤ 1`;
/// `1 − d^{d/2} z1⋯zd` is cyclic in `H²_d` iff `d ≤ 3`.
pub fn cyclicity_classify(family: DiagFamily) -> Result<Cyclicity> {
    let (cyclic, weights) = match family {
        DiagFamily::Bidisk { alpha1, alpha2 } => (alpha1 + alpha2 <= 1.0, WeightSequence::dirichlet(alpha1 + alpha2)),
        DiagFamily::Ball { d } => (d <= 3, WeightSequence::drury_arveson_diag(d)),
    };
    let nu_limit = if cyclic { 0.0 } else { fms_distance_limit(&weights, 400)?.nu };
    Ok(Cyclicity { cyclic, nu_limit })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticRow {
    pub k: u32,
    pub omega: f64,
    /// `ω_d(k)/k^{(d−1)/2}`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticTable {
    pub d: u32,
    pub rows: Vec<AsymptoticRow>,
    /// `(max − min)/min` of the ratio over `[kmax/2, kmax]`.
    pub drift: f64,
}

/// Exact `ω_d(k)` demoted to double and divided by `k^{(d−1)/2}` for `1 ≤ k ≤ kmax`.
pub fn da_weight_asymptotic(d: u32, kmax: u32) -> Result<AsymptoticTable> {
    if kmax < 10 {
        return Err(Error::InvalidArgument("kmax must be at least 10".into()));
    }
    let exponent = (d as f64 - 1.0) / 2.0;
    let rows = (1..=kmax)
        .map(|k| {
            let omega = omega_d(d, k).to_f64()?;
            Ok(AsymptoticRow { k, omega, ratio: omega / (k as f64).powf(exponent) })
        })
        .collect::<Result<Vec<_>>>()?;
    let window: Vec<f64> = rows.iter().filter(|r| r.k >= kmax / 2).map(|r| r.ratio).collect();
    let max = window.iter().cloned().fold(f64::MIN, f64::max);
    let min = window.iter().cloned().fold(f64::MAX, f64::min);
    Ok(AsymptoticTable { d, rows, drift: (max - min) / min })
}

/// Approximant of `1/(1 − z)` in `H²(𝔻)` of degree `n`: `Σ (1 − (k+1)/(n+2)) z^k`.
pub fn hardy_one_variable_opa(n: u32) -> MPoly {
    fms_opa(&WeightSequence::hardy(), n).expect("Hardy weights are exact")
}

/// `n` with `N = n(n+3)/2`, i.e. `𝒫_N` is exactly the polynomials of degree `≤ n` in two variables.
pub fn full_block_degree(order: usize) -> Option<u32> {
    (0..).take_while(|&n: &usize| n * (n + 3) / 2 <= order).find(|&n| n * (n + 3) / 2 == order).map(|n| n as u32)
}

/// `p_N^*` for `1 − (z1 + z2)/√2` in `H²_2` at full-degree orders `N`,
/// as `q_n((z1 + z2)/√2)` with `q_n` the one-variable Hardy approximant.
pub fn ball_rotation_opa(order: usize) -> Result<MPoly> {
    let n = full_block_degree(order)
        .ok_or_else(|| Error::InvalidArgument(format!("order {order} is not of the form n(n+3)/2")))?;
    let half_root2 = ExactScalar::from_quad(QuadExt::new(Rational::zero(), Rational::frac(1, 2)));
    let u = MPoly::var(2, 0).add(&MPoly::var(2, 1))?.scale(&half_root2);
    let q = hardy_one_variable_opa(n);
    // Horner in u
    let mut acc = MPoly::zero(2);
    for k in (0..=n).rev() {
        let c = q.coeff(&MultiIndex::new(vec![k]));
        acc = acc.mul(&u)?.add(&MPoly::constant(2, c))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn one_variable_formula() {
        assert_eq!(fms_opa(&WeightSequence::hardy(), 1).unwrap(), parse_poly("2/3+z1/3", 1).unwrap());
        let da = WeightSequence::drury_arveson_diag(2);
        assert_eq!(fms_coefficients(&da, 2).unwrap(), vec![r(19, 35), r(11, 35), r(1, 7)]);
        let w = WeightSequence::custom(vec![r(2, 1), r(3, 1)]).unwrap();
        // 1 − (1/2)/(1/2 + 1/3)
        assert_eq!(fms_coefficients(&w, 0).unwrap(), vec![r(2, 5)]);
    }

    #[test]
    fn distances() {
        let w = WeightSequence::dirichlet(2.0);
        assert_eq!(fms_distance(&w, 1).unwrap(), r(36, 49));
        let lim = fms_distance_limit(&w, 500).unwrap();
        assert!((lim.nu2 - 6.0 / std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert!(fms_distance_limit(&WeightSequence::hardy(), 500).unwrap().cyclic);
    }

    #[test]
    fn ball_embedding() {
        let b = DiagTarget::Ball { d: 2 };
        let e = diag_embed_opa(&b, 0).unwrap();
        assert_eq!(e.approximant, parse_poly("1/3", 2).unwrap());
        assert_eq!((e.valid_from, e.valid_to), (0, 4));
        let e = diag_embed_opa(&b, 1).unwrap();
        assert_eq!(e.approximant, parse_poly("7/15+2/5*z1*z2", 2).unwrap());
        assert_eq!((e.valid_from, e.valid_to), (4, 12));
        let e = diag_embed_opa(&b, 2).unwrap();
        assert_eq!(e.approximant, parse_poly("19/35+22/35*z1*z2+4/7*z1^2*z2^2", 2).unwrap());
        assert_eq!(e.f, parse_poly("1-2*z1*z2", 2).unwrap());
        assert!(diag_embed_opa(&DiagTarget::Ball { d: 3 }, 1).is_err());
    }

    #[test]
    fn cyclicity() {
        let c = cyclicity_classify(DiagFamily::Bidisk { alpha1: 1.0, alpha2: 1.0 }).unwrap();
        assert!(!c.cyclic);
        assert!((c.nu_limit - 6f64.sqrt() / std::f64::consts::PI).abs() < 1e-9);
        assert!(cyclicity_classify(DiagFamily::Bidisk { alpha1: 0.0, alpha2: 0.0 }).unwrap().cyclic);
        assert!(cyclicity_classify(DiagFamily::Ball { d: 3 }).unwrap().cyclic);
        let c = cyclicity_classify(DiagFamily::Ball { d: 4 }).unwrap();
        assert!(!c.cyclic && c.nu_limit > 0.0 && c.nu_limit < 1.0);
    }

    #[test]
    fn weight_asymptotics() {
        let t = da_weight_asymptotic(1, 20).unwrap();
        assert!(t.rows.iter().all(|row| (row.ratio - 1.0).abs() < 1e-15));
        let t = da_weight_asymptotic(2, 100).unwrap();
        let last = t.rows.last().unwrap();
        assert!((last.omega / (100.0 * std::f64::consts::PI).sqrt() - 1.0).abs() < 0.01);
        assert!(da_weight_asymptotic(3, 200).unwrap().drift <= 0.10);
    }

    #[test]
    fn rotation() {
        assert_eq!(ball_rotation_opa(0).unwrap(), parse_poly("1/2", 2).unwrap());
        assert_eq!(ball_rotation_opa(2).unwrap(), parse_poly("(4+s2*z1+s2*z2)/6", 2).unwrap());
        assert_eq!(ball_rotation_opa(5).unwrap(), parse_poly("(6+2*s2*z1+2*s2*z2+z1^2+2*z1*z2+z2^2)/8", 2).unwrap());
        assert!(ball_rotation_opa(3).is_err());
        assert_eq!(full_block_degree(9), Some(3));
    }
}
