//! Deterministic JSON serialization of results, schema `opakit/1`.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::Result;
use crate::filter2d::{ImpulseReport, StabilityReport, StabilityVerdict, StabilizeReport};
use crate::mpoly::{MPoly, MultiIndex};
use crate::opa::{residual_orthogonal, FloatOpaResult, OpaResult};
use crate::ortho::OrthoFamily;
use crate::scalar::ExactScalar;
use crate::shapiro::{SSFunction, SSReport};
use crate::zero_scan::{ZeroScanReport, ZeroVerdict};

pub const SCHEMA: &str = "opakit/1";

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn point(z: &[Complex64]) -> Value {
    Value::Array(z.iter().map(|&w| complex(w)).collect())
}

fn coeff_entry(m: &MultiIndex, c: &ExactScalar) -> Result<Value> {
    let z = c.to_complex64()?;
    let float = if z.im == 0.0 { json!(z.re) } else { complex(z) };
    Ok(json!({ "monomial": m.to_string(), "exact": c.to_string(), "float": float }))
}

/// Coefficients of `p` in deglex order.
pub fn poly_coeffs(p: &MPoly) -> Result<Vec<Value>> {
    p.terms().map(|(m, c)| coeff_entry(m, c)).collect()
}

pub fn opa_json(r: &OpaResult) -> Result<Value> {
    let coeffs = r.basis.iter().zip(&r.coeffs).map(|(m, c)| coeff_entry(m, c)).collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "space": r.space.descriptor(),
        "f": r.f.to_string(),
        "n": r.n,
        "approximant": r.approximant.to_string(),
        "coeffs": coeffs,
        "nu2_exact": r.nu2.to_string(),
        "nu_float": r.nu,
        "residual_ok": residual_orthogonal(r)?,
    }))
}

pub fn opa_float_json(space: &str, f: &MPoly, r: &FloatOpaResult) -> Value {
    let coeffs: Vec<Value> = r
        .basis
        .iter()
        .zip(&r.coeffs)
        .map(|(m, c)| json!({ "monomial": m.to_string(), "float": complex(*c) }))
        .collect();
    json!({ "space": space, "f": f.to_string(), "n": r.n, "coeffs": coeffs, "nu_float": r.nu, "condition": r.condition })
}

pub fn ortho_json(fam: &OrthoFamily) -> Result<Value> {
    let members = fam
        .members
        .iter()
        .enumerate()
        .map(|(k, p)| Ok(json!({ "index": k, "poly": p.to_string(), "coeffs": poly_coeffs(p)? })))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "space": fam.space.descriptor(),
        "f": fam.f.to_string(),
        "convention": fam.convention.as_str(),
        "members": members,
    }))
}

pub fn zero_scan_json(r: &ZeroScanReport) -> Value {
    let verdict = match &r.verdict {
        ZeroVerdict::ZeroFreeClosed => json!({ "kind": "zero_free_closed" }),
        ZeroVerdict::ZeroFound { witness, residual, interior } => {
            json!({ "kind": "zero_found", "witness": point(witness), "residual": residual, "interior": interior })
        }
        ZeroVerdict::Inconclusive { nearest, min_modulus } => {
            json!({ "kind": "inconclusive", "nearest": point(nearest), "min_modulus": min_modulus })
        }
    };
    json!({
        "verdict": verdict,
        "grid": r.grid,
        "margin": r.margin,
        "face_minima": r.face_minima.to_vec(),
        "anchor_minima": r.anchor_minima.to_vec(),
    })
}

pub fn stability_json(r: &StabilityReport) -> Value {
    let witness = match &r.verdict {
        StabilityVerdict::Unstable { witness } => point(witness),
        StabilityVerdict::Inconclusive { nearest, .. } => point(nearest),
        StabilityVerdict::Stable => Value::Null,
    };
    json!({ "verdict": r.verdict.as_str(), "witness": witness, "scan": zero_scan_json(&r.scan) })
}

pub fn impulse_json(r: &ImpulseReport) -> Value {
    json!({
        "rows": r.response.rows(),
        "cols": r.response.cols(),
        "max_abs": r.max_abs,
        "decay_ratio": r.decay_ratio,
        "growth": r.growth.as_str(),
        "frame_maxima": r.frame_maxima,
    })
}

pub fn stabilize_json(r: &StabilizeReport) -> Result<Value> {
    Ok(json!({
        "p_n_star": r.p_n_star.to_string(),
        "opa": opa_json(&r.opa)?,
        "original": stability_json(&r.original),
        "substitute": stability_json(&r.substitute),
        "original_impulse": impulse_json(&r.original_impulse),
        "substitute_impulse": r.substitute_impulse.as_ref().map(impulse_json),
        "stabilized": r.stabilized,
    }))
}

pub fn shapiro_json(ssf: &SSFunction, report: &SSReport) -> Result<Value> {
    let cofactors = ssf
        .cofactors
        .iter()
        .map(|c| Ok(json!({ "exact": c.to_string(), "float": complex(c.to_complex64()?) })))
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<Value> =
        report.residuals.iter().map(|r| json!({ "j": r.j, "value": r.value, "bound": r.bound })).collect();
    Ok(json!({
        "space": ssf.space.descriptor(),
        "points": ssf.points.iter().map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "degree": ssf.degree,
        "cofactors": cofactors,
        "truncation_terms": ssf.truncation.len(),
        "residuals": residuals,
        "point_values": report.point_values,
        "point_bound": report.point_bound,
        "ok": report.ok,
    }))
}

/// `{schema, config, result}`.
pub fn envelope(config: Value, result: Value) -> Value {
    json!({ "schema": SCHEMA, "config": config, "result": result })
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opa::opa;
    use crate::spaces::SpaceSpec;
    use crate::text::parse_poly;

    #[test]
    fn opa_report_is_deterministic_and_round_trips() {
        let f = parse_poly("2-z1-z2", 2).unwrap();
        let r = opa(&SpaceSpec::hardy_bidisk(), &f, 2).unwrap();
        let a = to_json_string(&envelope(json!({"n": 2}), opa_json(&r).unwrap()));
        let b = to_json_string(&envelope(json!({"n": 2}), opa_json(&r).unwrap()));
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["result"]["residual_ok"], true);
        let back = parse_poly(v["result"]["approximant"].as_str().unwrap(), 2).unwrap();
        assert_eq!(back, r.approximant);
        assert_eq!(v["result"]["coeffs"][0]["exact"], "7/17");
    }
}
