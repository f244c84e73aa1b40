//! Orthogonal polynomials for the weighted inner product `⟨g, h⟩_f = ⟨g f, h f⟩`.

use crate::error::{Error, Result};
use crate::mpoly::{deglex_basis, MPoly, MultiIndex};
use crate::opa::OpaResult;
use crate::scalar::{ExactScalar, Rational};
use crate::spaces::{inner_product, SpaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `φ_k` has coefficient 1 on `χ_k`.
    Monic,
    /// `φ_k = p_k^* − p_{k−1}^*`, with `φ_0 = p_0^*`.
    OpaDifference,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Monic => "monic",
            Convention::OpaDifference => "opa_difference",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthoFamily {
    pub space: SpaceSpec,
    pub f: MPoly,
    pub members: Vec<MPoly>,
    pub convention: Convention,
}

/// Classical Gram-Schmidt on `χ_0, …, χ_n` in `⟨·,·⟩_f`, keeping each member monic.
pub fn weighted_gram_schmidt(s: &SpaceSpec, f: &MPoly, n: usize) -> Result<OrthoFamily> {
    if f.is_zero() {
        return Err(Error::InvalidArgument("f must be nonzero".into()));
    }
    if f.nvars() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.nvars() });
    }
    let mut members: Vec<MPoly> = Vec::with_capacity(n + 1);
    let mut weighted: Vec<MPoly> = Vec::with_capacity(n + 1);
    let mut norms: Vec<ExactScalar> = Vec::with_capacity(n + 1);
    for chi in deglex_basis(n, s.dim()) {
        let chi_f = f.shift(&chi);
        let mut phi = MPoly::monomial(chi, ExactScalar::one());
        for ((p, pf), nrm) in members.iter().zip(&weighted).zip(&norms) {
            let ip = inner_product(s, &chi_f, pf)?;
            if !ip.is_zero() {
                phi = phi.sub(&p.scale(&ip.checked_div(nrm)?))?;
            }
        }
        let phi_f = phi.mul(f)?;
        let nrm = inner_product(s, &phi_f, &phi_f)?;
        if nrm.is_zero() {
            return Err(Error::Consistency(format!("phi_{} has zero weighted norm", members.len())));
        }
        members.push(phi);
        weighted.push(phi_f);
        norms.push(nrm);
    }
    Ok(OrthoFamily { space: s.clone(), f: f.clone(), members, convention: Convention::Monic })
}

/// `p_0^*, p_1^* − p_0^*, …` from consecutive orders of one sequence.
pub fn opa_differences(seq: &[OpaResult]) -> Result<Vec<MPoly>> {
    let mut out = Vec::with_capacity(seq.len());
    for (i, r) in seq.iter().enumerate() {
        if r.n != i {
            return Err(Error::InvalidArgument(format!("sequence entry {i} has order {}", r.n)));
        }
        if i == 0 {
            out.push(r.approximant.clone());
        } else {
            out.push(r.approximant.sub(&seq[i - 1].approximant)?);
        }
    }
    Ok(out)
}

/// Family in the difference convention.
pub fn difference_family(seq: &[OpaResult]) -> Result<OrthoFamily> {
    let first = seq.first().ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
    Ok(OrthoFamily {
        space: first.space.clone(),
        f: first.f.clone(),
        members: opa_differences(seq)?,
        convention: Convention::OpaDifference,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryEntry {
    pub n: usize,
    /// `⟨1, f φ_n⟩ / ⟨φ_n, φ_n⟩_f`
    pub scalar: ExactScalar,
    pub difference_is_zero: bool,
    /// `φ_n(0) = 0` for the monic member.
    pub vanishes_at_origin: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub entries: Vec<RecoveryEntry>,
    pub ok: bool,
}

/// Checks `p_n^* − p_{n−1}^* = (⟨1, f φ_n⟩/⟨φ_n, φ_n⟩_f) φ_n` and that a
/// vanishing difference comes with `φ_n(0) = 0` whenever `f(0) ≠ 0`.
pub fn verify_recovery(fam: &OrthoFamily, diffs: &[MPoly]) -> Result<RecoveryReport> {
    if fam.convention != Convention::Monic {
        return Err(Error::InvalidArgument("recovery is checked against the monic family".into()));
    }
    let s = &fam.space;
    let one = MPoly::one(s.dim());
    let f0_nonzero = !fam.f.constant_term().is_zero();
    let mut entries = Vec::with_capacity(diffs.len());
    for (n, (phi, diff)) in fam.members.iter().zip(diffs).enumerate() {
        let phi_f = phi.mul(&fam.f)?;
        let scalar = inner_product(s, &one, &phi_f)?.checked_div(&inner_product(s, &phi_f, &phi_f)?)?;
        let difference_is_zero = diff.is_zero();
        let vanishes_at_origin = phi.constant_term().is_zero();
        let mut ok = *diff == phi.scale(&scalar);
        if difference_is_zero && f0_nonzero {
            ok &= vanishes_at_origin;
        }
        entries.push(RecoveryEntry { n, scalar, difference_is_zero, vanishes_at_origin, ok });
    }
    let ok = entries.len() == diffs.len() && entries.iter().all(|e| e.ok);
    Ok(RecoveryReport { entries, ok })
}

/// Shape of `φ_N = z_axis^M r_N(z1 z2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalEntry {
    pub index: usize,
    /// 0 for `z1`, 1 for `z2`, `None` on the diagonal (`M = 0`).
    pub axis: Option<usize>,
    pub gap: u32,
    /// `r_N` as a polynomial in one variable `x = z1 z2`.
    pub r: MPoly,
}

fn is_diagonal_only(f: &MPoly) -> bool {
    f.nvars() == 2 && f.terms().all(|(m, _)| m.exponents()[0] == m.exponents()[1])
}

/// Splits each monic `φ_N`, `N ≤ max_index`, into `z_axis^M r_N(z1 z2)` and
/// fails on the first monomial outside that pattern.
pub fn diagonal_structure(s: &SpaceSpec, f: &MPoly, max_index: usize) -> Result<Vec<DiagonalEntry>> {
    if !is_diagonal_only(f) {
        return Err(Error::InvalidArgument("f must be a polynomial in z1*z2 on the bidisk".into()));
    }
    let fam = weighted_gram_schmidt(s, f, max_index)?;
    let mut out = Vec::with_capacity(fam.members.len());
    for (index, phi) in fam.members.iter().enumerate() {
        let lead = crate::mpoly::deglex_unrank(index, 2);
        let (a, b) = (lead.exponents()[0], lead.exponents()[1]);
        let shift = a as i64 - b as i64;
        let mut r_terms = Vec::new();
        for (m, c) in phi.terms() {
            let (e1, e2) = (m.exponents()[0], m.exponents()[1]);
            if e1 as i64 - e2 as i64 != shift {
                return Err(Error::Consistency(format!("phi_{index} contains {m}, off the pattern of {lead}")));
            }
            r_terms.push((MultiIndex::new(vec![e1.min(e2)]), c.clone()));
        }
        let axis = match shift.signum() {
            1 => Some(0),
            -1 => Some(1),
            _ => None,
        };
        out.push(DiagonalEntry { index, axis, gap: shift.unsigned_abs() as u32, r: MPoly::from_terms(1, r_terms)? });
    }
    Ok(out)
}

/// `r_m(x) = (1/(m+1)) Σ_{k≤m} (k+1) x^k`.
pub fn diag_factor_r(m: u32) -> MPoly {
    let coeffs: Vec<ExactScalar> = (0..=m as i64).map(|k| ExactScalar::frac(k + 1, m as i64 + 1)).collect();
    MPoly::univariate(&coeffs)
}

/// `z_axis^M r_m(z1 z2)`, orthogonal in `H²(𝔻²)` weighted by `1 − z1 z2`.
pub fn hardy_diag_basis(axis: usize, gap: u32, m: u32) -> Result<MPoly> {
    if axis > 1 {
        return Err(Error::InvalidArgument(format!("axis must be 0 or 1, got {axis}")));
    }
    let mut terms = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        let mut e = [k, k];
        e[axis] += gap;
        terms.push((
            MultiIndex::new(e.to_vec()),
            ExactScalar::from_rational(Rational::frac(k as i64 + 1, m as i64 + 1)),
        ));
    }
    MPoly::from_terms(2, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opa::opa_sequence;
    use crate::spaces::weighted_inner_product;
    use crate::text::parse_poly;

    fn p(s: &str) -> MPoly {
        parse_poly(s, 2).unwrap()
    }

    #[test]
    fn monomials_for_trivial_weight() {
        let fam = weighted_gram_schmidt(&SpaceSpec::hardy_bidisk(), &MPoly::one(2), 5).unwrap();
        for (k, phi) in fam.members.iter().enumerate() {
            assert_eq!(*phi, MPoly::monomial(crate::mpoly::deglex_unrank(k, 2), ExactScalar::one()));
        }
    }

    #[test]
    fn first_members_for_two_minus_sum() {
        let s = SpaceSpec::hardy_bidisk();
        let f = p("2-z1-z2");
        let fam = weighted_gram_schmidt(&s, &f, 5).unwrap();
        assert_eq!(fam.members[1], p("z1+1/3"));
        for i in 0..fam.members.len() {
            for j in 0..i {
                assert!(weighted_inner_product(&s, &f, &fam.members[i], &fam.members[j]).unwrap().is_zero());
            }
        }
        let seq = opa_sequence(&s, &f, 5).unwrap();
        let diffs = opa_differences(&seq).unwrap();
        assert_eq!(diffs[2], p("(5-z1+16*z2)/136"));
        let report = verify_recovery(&fam, &diffs).unwrap();
        assert!(report.ok);
        assert!(report.entries.iter().all(|e| !e.difference_is_zero));
    }

    #[test]
    fn diagonal_target_has_zero_differences_off_the_diagonal() {
        let s = SpaceSpec::hardy_bidisk();
        let f = p("1-z1*z2");
        let fam = weighted_gram_schmidt(&s, &f, 5).unwrap();
        let diffs = opa_differences(&opa_sequence(&s, &f, 5).unwrap()).unwrap();
        let report = verify_recovery(&fam, &diffs).unwrap();
        assert!(report.ok);
        for n in 1..=3 {
            assert!(report.entries[n].difference_is_zero && report.entries[n].vanishes_at_origin);
        }
        assert_eq!(fam.members[1], p("z1"));
        assert_eq!(fam.members[4].terms().count(), 2);
    }

    #[test]
    fn structure_and_diag_factor_basis() {
        let s = SpaceSpec::hardy_bidisk();
        let f = p("1-z1*z2");
        let entries = diagonal_structure(&s, &f, 12).unwrap();
        assert_eq!(entries[1].axis, Some(0));
        assert_eq!(entries[1].gap, 1);
        assert_eq!(entries[4].axis, None);
        assert_eq!(entries[4].r, diag_factor_r(1));
        assert_eq!(hardy_diag_basis(0, 0, 1).unwrap(), p("(1+2*z1*z2)/2"));
        assert_eq!(hardy_diag_basis(0, 2, 0).unwrap(), p("z1^2"));
        assert!(diagonal_structure(&s, &p("1-z1"), 3).is_err());
    }
}
