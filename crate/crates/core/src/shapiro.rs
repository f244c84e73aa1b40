//! Shapiro-Shields functions: bordered kernel determinants that vanish on a
//! prescribed finite set and are weakly inner.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{determinant_exact, ExactMatrix, Matrix};
use crate::mpoly::{deglex_basis, MPoly};
use crate::scalar::ExactScalar;
use crate::spaces::{check_domain_exact, inner_product, kernel_eval, kernel_eval_exact, kernel_taylor, SpaceSpec};

/// `s_Λ = A_0 + Σ_m A_m 𝔎_{λ_m}` with `A_0 = det 𝔎_Λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SSFunction {
    pub space: SpaceSpec,
    pub points: Vec<Vec<ExactScalar>>,
    /// `(𝔎_Λ)_{ij} = 𝔎_{λ_i}(λ_j)`
    pub gram: ExactMatrix,
    /// `A_0, A_1, …, A_n` from the first-column expansion.
    pub cofactors: Vec<ExactScalar>,
    pub degree: u32,
    /// `A_0 + Σ_m A_m T_N[𝔎_{λ_m}]` with `T_N` the degree-`N` Taylor truncation.
    pub truncation: MPoly,
}

impl SSFunction {
    fn points_f64(&self) -> Result<Vec<Vec<Complex64>>> {
        self.points.iter().map(|p| p.iter().map(ExactScalar::to_complex64).collect()).collect()
    }

    /// `s_Λ(z)` from the closed-form kernels.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let mut acc = self.cofactors[0].to_complex64()?;
        for (a, lam) in self.cofactors[1..].iter().zip(self.points_f64()?) {
            acc += a.to_complex64()? * kernel_eval(&self.space, &lam, z)?;
        }
        Ok(acc)
    }

    pub fn eval_exact(&self, z: &[ExactScalar]) -> Result<ExactScalar> {
        let mut acc = self.cofactors[0].clone();
        for (a, lam) in self.cofactors[1..].iter().zip(&self.points) {
            acc += &(a * &kernel_eval_exact(&self.space, lam, z)?);
        }
        Ok(acc)
    }
}

/// Builds `s_Λ` for distinct nonzero points strictly inside the domain; the
/// space needs a kernel that is a rational function.
pub fn shapiro_shields(s: &SpaceSpec, points: &[Vec<ExactScalar>], degree: u32) -> Result<SSFunction> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("at least one point is required".into()));
    }
    for (i, p) in points.iter().enumerate() {
        check_domain_exact(s, p)?;
        if p.iter().all(ExactScalar::is_zero) {
            return Err(Error::InvalidArgument("points must be nonzero".into()));
        }
        if points[..i].contains(p) {
            return Err(Error::InvalidArgument(format!("point {i} repeats an earlier point")));
        }
    }
    let n = points.len();
    let mut entries = vec![vec![ExactScalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            entries[i][j] = kernel_eval_exact(s, &points[i], &points[j])?;
        }
    }
    let gram = Matrix::from_rows(entries)?;
    // rows of the bordered matrix without its first column: the ones row, then 𝔎_Λ
    let bordered = Matrix::from_fn(n + 1, n, |i, j| if i == 0 { ExactScalar::one() } else { gram[(i - 1, j)].clone() });
    let mut cofactors = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let minor = Matrix::from_fn(n, n, |i, j| bordered[(if i >= m { i + 1 } else { i }, j)].clone());
        let det = determinant_exact(&minor)?;
        cofactors.push(if m % 2 == 1 { -det } else { det });
    }
    if cofactors[0].is_zero() {
        return Err(Error::Degenerate("the kernel Gram matrix is singular".into()));
    }
    let mut truncation = MPoly::constant(s.dim(), cofactors[0].clone());
    for (a, lam) in cofactors[1..].iter().zip(points) {
        truncation = truncation.add(&kernel_taylor(s, lam, degree)?.scale(a))?;
    }
    Ok(SSFunction { space: s.clone(), points: points.to_vec(), gram, cofactors, degree, truncation })
}

/// Relative rounding allowance when comparing against an envelope; the
/// envelope is attained exactly for a single point with nonnegative coordinates.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SSResidual {
    pub j: usize,
    /// `|⟨χ_j s_N, s_N⟩|`
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SSReport {
    pub residuals: Vec<SSResidual>,
    /// `|s_N(λ_i)|`
    pub point_values: Vec<f64>,
    pub point_bound: f64,
    pub ok: bool,
}

fn ln_weight(s: &SpaceSpec, k: &[u32], ln_fact: &[f64]) -> Result<f64> {
    Ok(match s {
        SpaceSpec::Dirichlet { alphas } => k.iter().zip(alphas).map(|(&e, a)| a * (e as f64 + 1.0).ln()).sum(),
        SpaceSpec::DruryArveson { .. } => {
            let total: u32 = k.iter().sum();
            k.iter().map(|&e| ln_fact[e as usize]).sum::<f64>() - ln_fact[total as usize]
        }
        SpaceSpec::CustomOmega { .. } => return Err(Error::NoClosedForm(s.to_string())),
    })
}

/// Calls `visit` with every `k ∈ ℕ^d` of total degree `t`.
fn for_each_of_degree(d: usize, t: u32, visit: &mut dyn FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, d: usize, left: u32, visit: &mut dyn FnMut(&[u32])) {
        if buf.len() + 1 == d {
            buf.push(left);
            visit(buf);
            buf.pop();
            return;
        }
        for e in (0..=left).rev() {
            buf.push(e);
            rec(buf, d, left - e, visit);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(d), d, t, visit);
}

/// Sum over shells `t = start, start+1, …` of shell sums, explicitly up to
/// `start + extra` and then closed off by a geometric remainder from the last
/// two shell ratios.
fn shell_series(d: usize, start: u32, extra: u32, term: &mut dyn FnMut(&[u32]) -> f64) -> f64 {
    let mut total = 0.0;
    let mut prev = f64::NAN;
    let mut last = 0.0;
    for t in start..=start + extra {
        let mut shell = 0.0;
        for_each_of_degree(d, t, &mut |k| shell += term(k));
        total += shell;
        prev = last;
        last = shell;
    }
    if last == 0.0 {
        return total;
    }
    let ratio = last / prev;
    if !(ratio < 1.0) {
        return f64::INFINITY;
    }
    total + last * ratio / (1.0 - ratio)
}

/// Checks `|⟨χ_j s_N, s_N⟩|` for `1 ≤ j ≤ jmax` and `|s_N(λ_i)|` against
/// envelopes of the discarded tail `Σ_{|k|>N}`.
pub fn ss_verify(ssf: &SSFunction, jmax: usize) -> Result<SSReport> {
    let s = &ssf.space;
    let d = s.dim();
    let n = ssf.degree;
    let extra = if d <= 2 { 400 } else { 120 };
    let kmax = (n + extra + 2) as usize;
    let mut ln_fact = vec![0.0f64; kmax * d.max(1) + 2];
    for i in 1..ln_fact.len() {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let abs_cof: Vec<f64> = ssf.cofactors.iter().map(|c| c.to_complex64().map(|z| z.norm())).collect::<Result<_>>()?;
    let ln_abs_pts: Vec<Vec<f64>> = ssf
        .points
        .iter()
        .map(|p| p.iter().map(|c| c.to_complex64().map(|z| z.norm().ln())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    // a(k) = Σ_m |A_m| |λ_m^k|, bounding |coefficient of z^k| · ω(k)
    let a = |k: &[u32]| -> f64 {
        let mut acc = 0.0;
        for (c, lp) in abs_cof[1..].iter().zip(&ln_abs_pts) {
            let e: f64 = k.iter().zip(lp).filter(|(&e, _)| e > 0).map(|(&e, l)| e as f64 * l).sum();
            acc += c * e.exp();
        }
        if k.iter().all(|&e| e == 0) {
            acc += abs_cof[0];
        }
        acc
    };
    let basis = deglex_basis(jmax, d);
    let mut residuals = Vec::with_capacity(jmax);
    for chi in basis.iter().skip(1) {
        let value = inner_product(s, &ssf.truncation.shift(chi), &ssf.truncation)?.to_complex64()?.norm();
        let e = chi.exponents();
        let start = (n + 1).saturating_sub(chi.degree());
        let mut err = None;
        let bound = shell_series(d, start, extra, &mut |k| {
            let shifted: Vec<u32> = k.iter().zip(e).map(|(x, y)| x + y).collect();
            match ln_weight(s, k, &ln_fact) {
                Ok(lw) => a(k) * a(&shifted) * (-lw).exp(),
                Err(x) => {
                    err = Some(x);
                    0.0
                }
            }
        });
        if let Some(x) = err {
            return Err(x);
        }
        residuals.push(SSResidual { j: residuals.len() + 1, value, bound });
    }
    let mut point_values = Vec::with_capacity(ssf.points.len());
    let mut point_bound: f64 = 0.0;
    for (p, lp) in ssf.points.iter().zip(&ln_abs_pts) {
        point_values.push(ssf.truncation.eval_exact(p)?.to_complex64()?.norm());
        let b = shell_series(d, n + 1, extra, &mut |k| {
            let lk: f64 = k.iter().zip(lp).filter(|(&e, _)| e > 0).map(|(&e, l)| e as f64 * l).sum();
            a(k) * (lk - ln_weight(s, k, &ln_fact).unwrap_or(f64::NAN)).exp()
        });
        point_bound = point_bound.max(b);
    }
    let ok = residuals.iter().all(|r| r.value <= r.bound * (1.0 + ENVELOPE_SLACK))
        && point_values.iter().all(|&v| v <= point_bound * (1.0 + ENVELOPE_SLACK));
    Ok(SSReport { residuals, point_values, point_bound, ok })
}

/// Determinant-derived closed form in `H²(𝔻²)` at one point:
/// `[λ̄1(λ1 − z1) + σ λ̄2(λ2 − z2) − λ̄1λ̄2(λ1λ2 − z1z2)] / [(1−|λ1|²)(1−|λ2|²)(1−λ̄1z1)(1−λ̄2z2)]`
/// with `σ = 1`; `σ = −1` gives the variant with `λ̄2(z2 − λ2)`.
pub fn ss_closed_form_hardy_bidisk(lambda: [Complex64; 2], z: [Complex64; 2], sigma: f64) -> Complex64 {
    let [l1, l2] = lambda;
    let [z1, z2] = z;
    let (c1, c2) = (l1.conj(), l2.conj());
    let one = Complex64::new(1.0, 0.0);
    let num = c1 * (l1 - z1) + sigma * c2 * (l2 - z2) - c1 * c2 * (l1 * l2 - z1 * z2);
    let den = (1.0 - l1.norm_sqr()) * (1.0 - l2.norm_sqr()) * (one - c1 * z1) * (one - c2 * z2);
    num / den
}

/// Closed form in `A²(𝔻²)` at one point.
pub fn ss_closed_form_bergman_bidisk(lambda: [Complex64; 2], z: [Complex64; 2]) -> Complex64 {
    let [l1, l2] = lambda;
    let [z1, z2] = z;
    let (c1, c2) = (l1.conj(), l2.conj());
    let one = Complex64::new(1.0, 0.0);
    let num = (c1 * c2).powi(2) * (z1 * z1 * z2 * z2 - l1 * l1 * l2 * l2)
        + 2.0 * c1 * c1 * c2 * (l1 * l1 * l2 - z1 * z1 * z2)
        + 2.0 * c1 * c2 * c2 * (l1 * l2 * l2 - z1 * z2 * z2)
        + c1 * c1 * (z1 * z1 - l1 * l1)
        + 4.0 * c1 * c2 * (z1 * z2 - l1 * l2)
        + c2 * c2 * (z2 * z2 - l2 * l2)
        + 2.0 * c1 * (l1 - z1)
        + 2.0 * c2 * (l2 - z2);
    let den = (1.0 - l1.norm_sqr()).powi(2)
        * (1.0 - l2.norm_sqr()).powi(2)
        * (one - c1 * z1).powi(2)
        * (one - c2 * z2).powi(2);
    num / den
}

/// Closed form in `H²_d` at one point: `⟨λ − z, λ⟩ / [(1 − ‖λ‖²)(1 − ⟨z, λ⟩)]`.
pub fn ss_closed_form_drury_arveson(lambda: &[Complex64], z: &[Complex64]) -> Complex64 {
    let ip = |u: &mut dyn Iterator<Item = Complex64>| -> Complex64 { u.sum() };
    let num = ip(&mut lambda.iter().zip(z).map(|(l, zz)| (l - zz) * l.conj()));
    let zl = ip(&mut lambda.iter().zip(z).map(|(l, zz)| zz * l.conj()));
    let nl: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
    num / ((1.0 - nl) * (Complex64::new(1.0, 0.0) - zl))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: (i64, i64), b: (i64, i64)) -> Vec<ExactScalar> {
        vec![ExactScalar::frac(a.0, a.1), ExactScalar::frac(b.0, b.1)]
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_point_is_kernel_difference() {
        let s = SpaceSpec::hardy_bidisk();
        let lam = pt((1, 2), (1, 3));
        let ssf = shapiro_shields(&s, std::slice::from_ref(&lam), 4).unwrap();
        assert_eq!(ssf.cofactors[1], ExactScalar::from_integer(-1));
        assert!(ssf.eval_exact(&lam).unwrap().is_zero());
        let z = [c(0.2, -0.1), c(-0.3, 0.4)];
        let want = ss_closed_form_hardy_bidisk([c(0.5, 0.0), c(1.0 / 3.0, 0.0)], z, 1.0);
        assert!((ssf.eval(&z).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn two_points_vanish_on_both() {
        let s = SpaceSpec::drury_arveson(2);
        let pts = vec![pt((1, 2), (1, 3)), pt((-1, 4), (1, 5))];
        let ssf = shapiro_shields(&s, &pts, 3).unwrap();
        for p in &pts {
            assert!(ssf.eval_exact(p).unwrap().is_zero());
        }
        assert!(shapiro_shields(&s, &[pts[0].clone(), pts[0].clone()], 3).is_err());
        assert!(shapiro_shields(&s, &[pt((0, 1), (0, 1))], 3).is_err());
    }

    #[test]
    fn truncation_is_nearly_weakly_inner() {
        let s = SpaceSpec::bergman_bidisk();
        let ssf = shapiro_shields(&s, &[pt((1, 2), (1, 3))], 30).unwrap();
        let report = ss_verify(&ssf, 5).unwrap();
        assert!(report.ok, "{report:?}");
        assert!(report.residuals.iter().all(|r| r.bound < 1e-6));
    }

    #[test]
    fn ball_closed_form_matches() {
        let s = SpaceSpec::drury_arveson(2);
        let ssf = shapiro_shields(&s, &[pt((1, 2), (1, 3))], 2).unwrap();
        let z = [c(0.1, 0.3), c(-0.2, 0.2)];
        let want = ss_closed_form_drury_arveson(&[c(0.5, 0.0), c(1.0 / 3.0, 0.0)], &z);
        assert!((ssf.eval(&z).unwrap() - want).norm() < 1e-13);
    }
}
