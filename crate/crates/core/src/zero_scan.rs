//! Zero sets on the bidisk: univariate roots, root-modulus profiles over the
//! torus faces, and a grid heuristic for zero-freeness of the closed bidisk.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mpoly::MPoly;

pub const MAX_ITERATIONS: usize = 200;
pub const MAX_RESTARTS: usize = 10;
/// Leading coefficients below this fraction of the largest are dropped.
pub const TRIM_THRESHOLD: f64 = 1e-14;
/// A witness must satisfy `|p(w)| ≤ WITNESS_TOLERANCE · max(1, max|coeff|)`.
pub const WITNESS_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `|q(r)| / max|coeff|` for each root.
    pub residuals: Vec<f64>,
    /// Number of leading coefficients dropped as negligible.
    pub trimmed: usize,
    pub threshold: f64,
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    let r = z.norm();
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        bound = bound * r + a.norm();
    }
    (p, dp, bound)
}

/// All roots of `Σ c_k z^k` (ascending coefficients) by Aberth-Ehrlich
/// iteration with seeded restarts.
pub fn univariate_roots(coeffs: &[Complex64]) -> Result<RootSet> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidArgument("polynomial is identically zero".into()));
    }
    let threshold = TRIM_THRESHOLD * scale;
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].norm() <= threshold {
        len -= 1;
    }
    let trimmed = coeffs.len() - len;
    let c = &coeffs[..len];
    let n = len.saturating_sub(1);
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial has degree 0 after trimming".into()));
    }
    let roots = if n == 1 { vec![-c[0] / c[1]] } else { aberth(c)? };
    let residuals = roots.iter().map(|&r| horner(c, r).0.norm() / scale).collect();
    Ok(RootSet { roots, residuals, trimmed, threshold })
}

fn aberth(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n].norm();
    let radius = if c[0].norm() > 0.0 { (c[0].norm() / lead).powf(1.0 / n as f64) } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_ab);
    let mut unconverged = Vec::new();
    for attempt in 0..=MAX_RESTARTS {
        let (r0, offset) =
            if attempt == 0 { (radius, 0.7) } else { (radius * rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI)) };
        let mut z: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(r0, 2.0 * PI * k as f64 / n as f64 + offset)).collect();
        let mut done = vec![false; n];
        for _ in 0..MAX_ITERATIONS {
            for k in 0..n {
                if done[k] {
                    continue;
                }
                let (p, dp, bound) = horner(c, z[k]);
                if p.norm() <= 8.0 * f64::EPSILON * bound {
                    done[k] = true;
                    continue;
                }
                let ratio = p / dp;
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    if j != k {
                        s += Complex64::new(1.0, 0.0) / (z[k] - z[j]);
                    }
                }
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
                if step.is_finite() {
                    z[k] -= step;
                } else {
                    z[k] += Complex64::from_polar(1e-3 * r0.max(1e-3), rng.gen_range(0.0..2.0 * PI));
                }
            }
            if done.iter().all(|&d| d) {
                return Ok(z);
            }
        }
        unconverged = (0..n).filter(|&k| !done[k]).collect();
    }
    Err(Error::NoConvergence(unconverged))
}

/// One torus sample: the free variable's roots with the swept variable at `e^{it}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceSample {
    pub t: f64,
    pub roots: Vec<Complex64>,
    /// `None` when the slice has no roots (constant) or is identically zero.
    pub min_modulus: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceProfile {
    /// Index of the variable put on the unit circle.
    pub face: usize,
    pub samples: Vec<FaceSample>,
    pub global_min: f64,
}

impl FaceProfile {
    /// Sample attaining the global minimum, with the root that attains it.
    pub fn argmin(&self) -> Option<(&FaceSample, Complex64)> {
        self.samples
            .iter()
            .filter_map(|s| s.roots.iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).map(|r| (s, *r)))
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    }
}

/// Float coefficients of `p` as a polynomial in `free`, with `other` fixed at `w`.
fn slice(terms: &[(Vec<u32>, Complex64)], free: usize, other: usize, w: Complex64) -> Vec<Complex64> {
    let deg = terms.iter().map(|(e, _)| e[free]).max().unwrap_or(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (e, c) in terms {
        out[e[free] as usize] += c * w.powu(e[other]);
    }
    out
}

fn float_terms(p: &MPoly) -> Result<Vec<(Vec<u32>, Complex64)>> {
    if p.nvars() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.nvars() });
    }
    Ok(p.to_float_terms()?.into_iter().map(|(m, c)| (m.exponents().to_vec(), c)).collect())
}

fn slice_roots(coeffs: &[Complex64]) -> Result<(Vec<Complex64>, bool)> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((Vec::new(), true));
    }
    match univariate_roots(coeffs) {
        Ok(r) => Ok((r.roots, false)),
        Err(Error::InvalidArgument(_)) => Ok((Vec::new(), false)),
        Err(e) => Err(e),
    }
}

/// Roots of `p(·, e^{it})` (face 1) or `p(e^{it}, ·)` (face 0) at the
/// midpoints `t = 2π(i + ½)/grid`.
pub fn face_profile(p: &MPoly, face: usize, grid: usize) -> Result<FaceProfile> {
    if face > 1 {
        return Err(Error::InvalidArgument(format!("face must be 0 or 1, got {face}")));
    }
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let terms = float_terms(p)?;
    let free = 1 - face;
    let samples = (0..grid)
        .into_par_iter()
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.5) / grid as f64;
            let coeffs = slice(&terms, free, face, Complex64::from_polar(1.0, t));
            let (roots, degenerate) = slice_roots(&coeffs)?;
            let min_modulus = roots.iter().map(|r| r.norm()).reduce(f64::min);
            Ok(FaceSample { t, roots, min_modulus, degenerate })
        })
        .collect::<Result<Vec<_>>>()?;
    let global_min = samples
        .iter()
        .map(|s| if s.degenerate { 0.0 } else { s.min_modulus.unwrap_or(f64::INFINITY) })
        .fold(f64::INFINITY, f64::min);
    Ok(FaceProfile { face, samples, global_min })
}

/// Rows `face,t,min_modulus` for plotting.
pub fn profile_csv(profiles: &[FaceProfile]) -> String {
    let mut out = String::from("face,t,min_modulus\n");
    for prof in profiles {
        for s in &prof.samples {
            let m = match (s.degenerate, s.min_modulus) {
                (true, _) => "0".to_string(),
                (false, Some(m)) => format!("{m:.12e}"),
                (false, None) => "inf".to_string(),
            };
            out.push_str(&format!("z{},{:.12e},{}\n", prof.face + 1, s.t, m));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    ZeroFreeClosed,
    ZeroFound { witness: [Complex64; 2], residual: f64, interior: bool },
    Inconclusive { nearest: [Complex64; 2], min_modulus: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroScanReport {
    pub verdict: ZeroVerdict,
    pub grid: usize,
    pub margin: f64,
    /// Global minimum root modulus on faces `z1` and `z2`.
    pub face_minima: [f64; 2],
    pub anchor_minima: [f64; 2],
}

fn point(free: usize, root: Complex64, fixed: Complex64) -> [Complex64; 2] {
    if free == 0 {
        [root, fixed]
    } else {
        [fixed, root]
    }
}

fn residual_ok(p: &MPoly, scale: f64, w: &[Complex64; 2]) -> Result<(bool, f64)> {
    let r = p.eval(w)?.norm();
    Ok((r <= WITNESS_TOLERANCE * scale.max(1.0), r))
}

/// Pulls a face zero with `|root| < 1` into the open bidisk by moving the
/// swept coordinate from `e^{it}` to `ρ e^{it}` and following the root.
fn pull_inside(
    terms: &[(Vec<u32>, Complex64)],
    free: usize,
    t: f64,
    root: Complex64,
) -> Result<Option<[Complex64; 2]>> {
    let mut current = root;
    for rho in [0.9999, 0.999, 0.995, 0.99, 0.98, 0.95, 0.9] {
        let w = Complex64::from_polar(rho, t);
        let (roots, degenerate) = slice_roots(&slice(terms, free, 1 - free, w))?;
        if degenerate {
            return Ok(Some(point(free, Complex64::new(0.0, 0.0), w)));
        }
        let Some(next) = roots.into_iter().min_by(|a, b| (a - current).norm().total_cmp(&(b - current).norm())) else {
            return Ok(None);
        };
        current = next;
        if current.norm() < 1.0 {
            return Ok(Some(point(free, current, w)));
        }
    }
    Ok(None)
}

/// Grid heuristic on the closed bidisk: anchor slices `p(·, 0)` / `p(0, ·)`
/// (falling back to `1/2` when degenerate), then both face profiles.
pub fn polydisk_zero_free(p: &MPoly, grid: usize, margin: f64) -> Result<ZeroScanReport> {
    let terms = float_terms(p)?;
    let scale = terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidArgument("polynomial is identically zero".into()));
    }
    let mut anchor_minima = [f64::INFINITY; 2];
    let mut boundary_zero: Option<([Complex64; 2], f64)> = None;
    for free in 0..2 {
        let mut fixed = Complex64::new(0.0, 0.0);
        let mut coeffs = slice(&terms, free, 1 - free, fixed);
        if coeffs.iter().all(|c| c.norm() <= TRIM_THRESHOLD * scale) {
            fixed = Complex64::new(0.5, 0.0);
            coeffs = slice(&terms, free, 1 - free, fixed);
        }
        let (roots, degenerate) = slice_roots(&coeffs)?;
        if degenerate {
            let w = point(free, Complex64::new(0.0, 0.0), fixed);
            let (_, r) = residual_ok(p, scale, &w)?;
            return Ok(report(
                ZeroVerdict::ZeroFound { witness: w, residual: r, interior: true },
                grid,
                margin,
                [0.0; 2],
                anchor_minima,
            ));
        }
        for r in roots {
            anchor_minima[free] = anchor_minima[free].min(r.norm());
            if r.norm() < 1.0 {
                let w = point(free, r, fixed);
                let (ok, res) = residual_ok(p, scale, &w)?;
                if ok {
                    return Ok(report(
                        ZeroVerdict::ZeroFound { witness: w, residual: res, interior: true },
                        grid,
                        margin,
                        [f64::NAN; 2],
                        anchor_minima,
                    ));
                }
            } else if r.norm() <= 1.0 + margin && boundary_zero.is_none() {
                boundary_zero = Some((point(free, r, fixed), r.norm()));
            }
        }
    }
    let profiles = [face_profile(p, 0, grid)?, face_profile(p, 1, grid)?];
    let face_minima = [profiles[0].global_min, profiles[1].global_min];
    for prof in &profiles {
        let free = 1 - prof.face;
        for s in &prof.samples {
            if s.degenerate {
                let w = point(free, Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, s.t));
                let (_, r) = residual_ok(p, scale, &w)?;
                return Ok(report(
                    ZeroVerdict::ZeroFound { witness: w, residual: r, interior: false },
                    grid,
                    margin,
                    face_minima,
                    anchor_minima,
                ));
            }
        }
        if let Some((s, root)) = prof.argmin() {
            if root.norm() < 1.0 {
                if let Some(w) = pull_inside(&terms, free, s.t, root)? {
                    let (ok, r) = residual_ok(p, scale, &w)?;
                    if ok {
                        return Ok(report(
                            ZeroVerdict::ZeroFound { witness: w, residual: r, interior: true },
                            grid,
                            margin,
                            face_minima,
                            anchor_minima,
                        ));
                    }
                }
                let w = point(free, root, Complex64::from_polar(1.0, s.t));
                let (ok, r) = residual_ok(p, scale, &w)?;
                if ok {
                    return Ok(report(
                        ZeroVerdict::ZeroFound { witness: w, residual: r, interior: false },
                        grid,
                        margin,
                        face_minima,
                        anchor_minima,
                    ));
                }
            }
        }
    }
    let anchors_clear = anchor_minima.iter().all(|&m| m > 1.0);
    let faces_clear = face_minima.iter().all(|&m| m > 1.0 + margin);
    if anchors_clear && faces_clear && boundary_zero.is_none() {
        return Ok(report(ZeroVerdict::ZeroFreeClosed, grid, margin, face_minima, anchor_minima));
    }
    let mut nearest: Option<([Complex64; 2], f64)> = boundary_zero;
    for prof in &profiles {
        if let Some((s, root)) = prof.argmin() {
            let cand = (point(1 - prof.face, root, Complex64::from_polar(1.0, s.t)), root.norm());
            if nearest.as_ref().is_none_or(|(_, m)| cand.1 < *m) {
                nearest = Some(cand);
            }
        }
    }
    let (nearest, min_modulus) = nearest.unwrap_or(([Complex64::new(f64::NAN, 0.0); 2], f64::INFINITY));
    Ok(report(ZeroVerdict::Inconclusive { nearest, min_modulus }, grid, margin, face_minima, anchor_minima))
}

fn report(
    verdict: ZeroVerdict,
    grid: usize,
    margin: f64,
    face_minima: [f64; 2],
    anchor_minima: [f64; 2],
) -> ZeroScanReport {
    ZeroScanReport { verdict, grid, margin, face_minima, anchor_minima }
}

/// Radius of a bidisk on which approximants of the form `(w0 − z1 z2) Q`,
/// `Q` zero-free on `𝔻²`, cannot vanish in `𝔇_{α1,α2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvisoryRadius {
    pub radius: f64,
    /// False for mixed signs of `α1, α2`, where the bound is only a guess.
    pub covered: bool,
}

pub fn advisory_diag_radius(alpha1: f64, alpha2: f64) -> AdvisoryRadius {
    let r = 2f64.powf((alpha1 + alpha2) / 2.0);
    if alpha1 >= 0.0 && alpha2 >= 0.0 {
        AdvisoryRadius { radius: 1.0, covered: true }
    } else if alpha1 < 0.0 && alpha2 < 0.0 {
        AdvisoryRadius { radius: r, covered: true }
    } else {
        AdvisoryRadius { radius: r.min(1.0), covered: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_poly;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn simple_roots() {
        let r = univariate_roots(&[c(-1.0), c(0.0), c(1.0)]).unwrap();
        let mut re: Vec<f64> = r.roots.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
        let r = univariate_roots(&[c(-1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(r.roots.len(), 5);
        for z in &r.roots {
            assert!(((z.powu(5)) - c(1.0)).norm() < 1e-12);
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-12));
        let r = univariate_roots(&[c(2.0), c(1.0), c(0.0)]).unwrap();
        assert_eq!(r.trimmed, 1);
        assert!(univariate_roots(&[c(3.0)]).is_err());
    }

    #[test]
    fn double_root() {
        let r = univariate_roots(&[c(1.0), c(-2.0), c(1.0)]).unwrap();
        assert!(r.roots.iter().all(|z| (z - c(1.0)).norm() < 1e-6));
    }

    #[test]
    fn torus_zeros() {
        let prof = face_profile(&parse_poly("1-z1*z2", 2).unwrap(), 1, 64).unwrap();
        for s in &prof.samples {
            assert!((s.min_modulus.unwrap() - 1.0).abs() < 1e-12);
        }
        let prof = face_profile(&parse_poly("2-z1-z2", 2).unwrap(), 1, 256).unwrap();
        assert!(prof.global_min >= 1.0 && prof.global_min < 1.001);
    }

    #[test]
    fn verdicts() {
        let v = polydisk_zero_free(&parse_poly("1-z1/2", 2).unwrap(), 256, DEFAULT_MARGIN).unwrap();
        assert_eq!(v.verdict, ZeroVerdict::ZeroFreeClosed);
        let gk = parse_poly("(39+23*z1+23*z2)/1165", 2).unwrap();
        let v = polydisk_zero_free(&gk, 256, DEFAULT_MARGIN).unwrap();
        match v.verdict {
            ZeroVerdict::ZeroFound { witness, interior, .. } => {
                assert!(interior && witness[0].norm() < 1.0 && witness[1].norm() < 1.0);
            }
            other => panic!("{other:?}"),
        }
        let v = polydisk_zero_free(&parse_poly("2-z1-z2", 2).unwrap(), 256, DEFAULT_MARGIN).unwrap();
        match v.verdict {
            ZeroVerdict::Inconclusive { nearest, .. } => {
                assert!((nearest[0] - c(1.0)).norm() < 0.05 && (nearest[1] - c(1.0)).norm() < 0.05);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn radius() {
        assert_eq!(advisory_diag_radius(-1.0, -1.0).radius, 0.5);
        assert_eq!(advisory_diag_radius(0.0, 0.0).radius, 1.0);
        let r = advisory_diag_radius(-1.0, 0.0);
        assert!((r.radius - 0.5f64.sqrt()).abs() < 1e-15 && !r.covered);
    }
}
