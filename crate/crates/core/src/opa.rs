//! Optimal polynomial approximants through the Grammian normal equations.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ExactMatrix, FloatMatrix, Matrix};
use crate::mpoly::{deglex_basis, MPoly, MultiIndex};
use crate::scalar::{ExactScalar, QuadExt};
use crate::spaces::{inner_product, inner_product_f64, norm_sqr, SpaceSpec};

/// Approximant `p_n^*` of `1/f` together with the system that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct OpaResult {
    pub space: SpaceSpec,
    pub f: MPoly,
    pub n: usize,
    pub basis: Vec<MultiIndex>,
    pub grammian: ExactMatrix,
    pub rhs: Vec<ExactScalar>,
    pub coeffs: Vec<ExactScalar>,
    pub approximant: MPoly,
    /// `‖p_n^* f − 1‖²`
    pub nu2: QuadExt,
    pub nu: f64,
}

fn check_target(s: &SpaceSpec, f: &MPoly) -> Result<()> {
    if f.nvars() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.nvars() });
    }
    if f.is_zero() {
        return Err(Error::InvalidArgument("f must be a nonzero polynomial".into()));
    }
    if !s.is_exact() {
        return Err(Error::Mode(format!("{s} has irrational weights; use the float solver")));
    }
    Ok(())
}

/// `M_ij = ⟨χ_j f, χ_i f⟩` and `b_i = ⟨1, χ_i f⟩` over an arbitrary monomial basis.
pub fn grammian_on_basis(s: &SpaceSpec, f: &MPoly, basis: &[MultiIndex]) -> Result<(ExactMatrix, Vec<ExactScalar>)> {
    check_target(s, f)?;
    let shifted: Vec<MPoly> = basis.iter().map(|m| f.shift(m)).collect();
    let n = basis.len();
    let mut upper = vec![vec![ExactScalar::zero(); n]; n];
    for (i, row) in upper.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate().skip(i) {
            *slot = inner_product(s, &shifted[j], &shifted[i])?;
        }
    }
    let m = Matrix::from_fn(n, n, |i, j| if i <= j { upper[i][j].clone() } else { upper[j][i].conj() });
    let one = MPoly::one(s.dim());
    let b = shifted.iter().map(|g| inner_product(s, &one, g)).collect::<Result<Vec<_>>>()?;
    Ok((m, b))
}

/// The system for `χ_0, …, χ_n`.
pub fn grammian(s: &SpaceSpec, f: &MPoly, n: usize) -> Result<(ExactMatrix, Vec<ExactScalar>)> {
    grammian_on_basis(s, f, &deglex_basis(n, s.dim()))
}

/// Exact solve of a Hermitian system; the solution is substituted back before it is returned.
pub fn solve_hermitian_exact(m: &ExactMatrix, b: &[ExactScalar]) -> Result<Vec<ExactScalar>> {
    if !m.is_hermitian() {
        return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
    }
    linalg::solve_exact(m, b)
}

/// Least-squares approximant of `1/f` from the span of `basis`.
pub fn opa_on_basis(s: &SpaceSpec, f: &MPoly, basis: &[MultiIndex]) -> Result<OpaResult> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let (grammian, rhs) = grammian_on_basis(s, f, basis)?;
    let coeffs = solve_hermitian_exact(&grammian, &rhs)?;
    let approximant = MPoly::from_basis(s.dim(), basis, &coeffs);
    let residual = approximant.mul(f)?.sub(&MPoly::one(s.dim()))?;
    let nu2 = norm_sqr(s, &residual)?;
    let nu = nu2.to_f64()?.max(0.0).sqrt();
    let out = OpaResult {
        space: s.clone(),
        f: f.clone(),
        n: basis.len() - 1,
        basis: basis.to_vec(),
        grammian,
        rhs,
        coeffs,
        approximant,
        nu2,
        nu,
    };
    if !residual_orthogonal(&out)? {
        return Err(Error::Consistency("residual is not orthogonal to f times the basis".into()));
    }
    if nu2_pythagoras(&out)? != out.nu2 {
        return Err(Error::Consistency("the two expressions for nu^2 disagree".into()));
    }
    Ok(out)
}

/// `p_n^*`: the approximant of `1/f` of order `n` (degree-lexicographic span `χ_0, …, χ_n`).
pub fn opa(s: &SpaceSpec, f: &MPoly, n: usize) -> Result<OpaResult> {
    opa_on_basis(s, f, &deglex_basis(n, s.dim()))
}

/// `p_0^*, …, p_N^*` computed in parallel, with `ν` checked to be non-increasing.
pub fn opa_sequence(s: &SpaceSpec, f: &MPoly, max_n: usize) -> Result<Vec<OpaResult>> {
    let results = (0..=max_n).into_par_iter().map(|n| opa(s, f, n)).collect::<Result<Vec<_>>>()?;
    for w in results.windows(2) {
        if w[1].nu2.cmp_value(&w[0].nu2).is_gt() {
            return Err(Error::Consistency(format!("nu increases from order {} to {}", w[0].n, w[1].n)));
        }
    }
    Ok(results)
}

/// `⟨p f − 1, χ_j f⟩ = 0` for every basis monomial.
pub fn residual_orthogonal(r: &OpaResult) -> Result<bool> {
    let residual = r.approximant.mul(&r.f)?.sub(&MPoly::one(r.space.dim()))?;
    for m in &r.basis {
        if !inner_product(&r.space, &residual, &r.f.shift(m))?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ν² = ‖1‖² − 2 Re⟨1, p f⟩ + ‖p f‖²`.
pub fn nu2_pythagoras(r: &OpaResult) -> Result<QuadExt> {
    let one = MPoly::one(r.space.dim());
    let pf = r.approximant.mul(&r.f)?;
    let cross = inner_product(&r.space, &one, &pf)?;
    let two_re = &cross.re + &cross.re;
    Ok(norm_sqr(&r.space, &one)? - two_re + norm_sqr(&r.space, &pf)?)
}

/// Float-mode approximant for spaces without exact weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatOpaResult {
    pub n: usize,
    pub basis: Vec<MultiIndex>,
    pub coeffs: Vec<Complex64>,
    pub nu: f64,
    /// 1-norm condition number of the Grammian; large values mean the coefficients are unreliable.
    pub condition: f64,
}

/// Mirrors [`opa`] in double precision with partial pivoting; accepts any real `α`.
pub fn opa_float(s: &SpaceSpec, f: &MPoly, n: usize) -> Result<FloatOpaResult> {
    if f.nvars() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.nvars() });
    }
    if f.is_zero() {
        return Err(Error::InvalidArgument("f must be a nonzero polynomial".into()));
    }
    let basis = deglex_basis(n, s.dim());
    let shifted = basis.iter().map(|m| f.shift(m).to_float_terms()).collect::<Result<Vec<_>>>()?;
    let size = basis.len();
    let mut m = FloatMatrix::from_fn(size, size, |_, _| Complex64::new(0.0, 0.0));
    for i in 0..size {
        for j in i..size {
            let v = inner_product_f64(s, &shifted[j], &shifted[i])?;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    let one = vec![(MultiIndex::zero(s.dim()), Complex64::new(1.0, 0.0))];
    let b = shifted.iter().map(|g| inner_product_f64(s, &one, g)).collect::<Result<Vec<_>>>()?;
    let coeffs = linalg::solve_f64(&m, &b)?;
    let condition = linalg::condition_1norm(&m);
    let mut residual: std::collections::BTreeMap<MultiIndex, Complex64> = std::collections::BTreeMap::new();
    residual.insert(MultiIndex::zero(s.dim()), Complex64::new(-1.0, 0.0));
    for (c, terms) in coeffs.iter().zip(&shifted) {
        for (k, a) in terms {
            *residual.entry(k.clone()).or_default() += c * a;
        }
    }
    let mut nu2 = 0.0;
    for (k, v) in &residual {
        nu2 += s.monomial_weight_f64(k)? * v.norm_sqr();
    }
    Ok(FloatOpaResult { n, basis, coeffs, nu: nu2.max(0.0).sqrt(), condition })
}

/// Outcome of testing `⟨g, χ_j g⟩ = 0` for `1 ≤ j ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakInnerReport {
    pub weakly_inner: bool,
    /// First failing index and the offending inner product.
    pub offending: Option<(usize, ExactScalar)>,
}

pub fn weak_inner_residuals(s: &SpaceSpec, g: &MPoly, max_j: usize) -> Result<Vec<ExactScalar>> {
    if g.is_zero() {
        return Err(Error::InvalidArgument("g must be nonzero".into()));
    }
    deglex_basis(max_j, s.dim()).iter().skip(1).map(|m| inner_product(s, g, &g.shift(m))).collect()
}

pub fn weak_inner_test(s: &SpaceSpec, g: &MPoly, max_j: usize) -> Result<WeakInnerReport> {
    let residuals = weak_inner_residuals(s, g, max_j)?;
    let offending = residuals.into_iter().enumerate().find(|(_, v)| !v.is_zero()).map(|(j, v)| (j + 1, v));
    Ok(WeakInnerReport { weakly_inner: offending.is_none(), offending })
}

/// Result of comparing every `p_n^*` with `conj(g(0))/‖g‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantOpaCheck {
    pub holds: bool,
    pub constant: Option<ExactScalar>,
    pub diagnostic: Option<String>,
}

/// For weakly inner `g`, checks that `p_0^* = ⋯ = p_N^* = conj(g(0))/‖g‖²`.
pub fn constant_opa_check(s: &SpaceSpec, g: &MPoly, max_n: usize) -> Result<ConstantOpaCheck> {
    let report = weak_inner_test(s, g, max_n)?;
    if let Some((j, v)) = report.offending {
        return Ok(ConstantOpaCheck {
            holds: false,
            constant: None,
            diagnostic: Some(format!("not weakly inner: <g, chi_{j} g> = {v}")),
        });
    }
    let norm = ExactScalar::from_quad(norm_sqr(s, g)?);
    let constant = g.constant_term().conj().checked_div(&norm)?;
    let expected = MPoly::constant(s.dim(), constant.clone());
    for r in opa_sequence(s, g, max_n)? {
        if r.approximant != expected {
            return Ok(ConstantOpaCheck {
                holds: false,
                constant: Some(constant),
                diagnostic: Some(format!("p_{}^* = {} is not constant", r.n, r.approximant)),
            });
        }
    }
    Ok(ConstantOpaCheck { holds: true, constant: Some(constant), diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;

    fn p(s: &str) -> MPoly {
        parse_poly(s, 2).unwrap()
    }

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::frac(n, d)
    }

    #[test]
    fn grammian_examples() {
        let (m, b) = grammian(&SpaceSpec::hardy_bidisk(), &p("2-z1-z2"), 1).unwrap();
        assert_eq!(m.to_rows(), vec![vec![q(6, 1), q(-2, 1)], vec![q(-2, 1), q(6, 1)]]);
        assert_eq!(b, vec![q(2, 1), q(0, 1)]);

        let da = SpaceSpec::drury_arveson(2);
        let basis = [MultiIndex::zero(2), MultiIndex::diagonal(2, 1)];
        let (m, b) = grammian_on_basis(&da, &p("1-2*z1*z2"), &basis).unwrap();
        assert_eq!(m.to_rows(), vec![vec![q(3, 1), q(-1, 1)], vec![q(-1, 1), q(7, 6)]]);
        assert_eq!(b, vec![q(1, 1), q(0, 1)]);

        let (m, b) = grammian(&SpaceSpec::bergman_bidisk(), &MPoly::one(2), 2).unwrap();
        assert_eq!(
            m.to_rows(),
            vec![vec![q(1, 1), q(0, 1), q(0, 1)], vec![q(0, 1), q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1), q(1, 2)],]
        );
        assert_eq!(b, vec![q(1, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn approximant_examples() {
        let f = p("2-z1-z2");
        assert_eq!(opa(&SpaceSpec::hardy_bidisk(), &f, 2).unwrap().approximant, p("(7+2*z1+2*z2)/17"));
        assert_eq!(opa(&SpaceSpec::dirichlet_bidisk(1.0, 1.0), &f, 0).unwrap().approximant, p("1/4"));
        assert_eq!(opa(&SpaceSpec::bergman_bidisk(), &f, 1).unwrap().approximant, p("(62+24*z1)/143"));
        let c = opa(&SpaceSpec::hardy_bidisk(), &p("3"), 4).unwrap();
        assert_eq!(c.approximant, p("1/3"));
        assert!(c.nu2.is_zero());
    }

    #[test]
    fn vanishing_at_origin_gives_zero() {
        let r = opa(&SpaceSpec::hardy_bidisk(), &p("z1*z2"), 3).unwrap();
        assert!(r.approximant.is_zero());
        assert_eq!(r.nu2, QuadExt::one());
    }

    #[test]
    fn sequence_jumps_only_at_diagonal_thresholds() {
        let seq = opa_sequence(&SpaceSpec::dirichlet_bidisk(1.0, 1.0), &p("1-z1*z2"), 5).unwrap();
        for r in &seq[1..4] {
            assert_eq!(r.approximant, seq[0].approximant);
        }
        assert_ne!(seq[4].approximant, seq[3].approximant);
    }

    #[test]
    fn fractional_alpha_needs_float_mode() {
        let s = SpaceSpec::dirichlet_bidisk(-0.85, -0.85);
        assert!(matches!(opa(&s, &p("2-z1-z2"), 1), Err(Error::Mode(_))));
        let r = opa_float(&SpaceSpec::hardy_bidisk(), &p("2-z1-z2"), 2).unwrap();
        let expect = [7.0 / 17.0, 2.0 / 17.0, 2.0 / 17.0];
        for (c, e) in r.coeffs.iter().zip(expect) {
            assert!((c.re - e).abs() < 1e-12);
        }
        assert!(opa_float(&s, &p("2-z1-z2"), 4).unwrap().nu < 1.0);
    }

    #[test]
    fn weak_inner() {
        let hardy = SpaceSpec::hardy_bidisk();
        assert!(weak_inner_test(&hardy, &p("z1*z2"), 20).unwrap().weakly_inner);
        let r = weak_inner_test(&hardy, &p("1-z1*z2"), 20).unwrap();
        assert_eq!(r.offending, Some((4, q(-1, 1))));
        let c = constant_opa_check(&hardy, &p("3"), 5).unwrap();
        assert!(c.holds);
        assert_eq!(c.constant, Some(q(1, 3)));
        let c = constant_opa_check(&hardy, &p("z1*z2"), 5).unwrap();
        assert!(c.holds && c.constant == Some(q(0, 1)));
        let c = constant_opa_check(&SpaceSpec::dirichlet_disk(0.0), &parse_poly("1-z1/2", 1).unwrap(), 3).unwrap();
        assert!(!c.holds && c.diagnostic.is_some());
    }
}
