//! Text grammar shared by scalars and polynomials.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*        division only by constants
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := number | 's2' | 'i' | 'z' digits | '(' expr (',' expr)? ')'
//! ```
//!
//! `s2` is √2, `(re,im)` is a complex constant, and `z` alone means `z1`.

use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::scalar::{ExactScalar, Rational};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next().map(|c| if c == '−' { '-' } else { c })
    }

    fn bump(&mut self) {
        if let Some(c) = self.src[self.pos..].chars().next() {
            self.pos += c.len_utf8();
        }
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?)?;
                }
                Some('/') => {
                    self.bump();
                    let at = self.pos;
                    let rhs = self.unary()?;
                    if !rhs.is_constant() {
                        return Err(Error::Parse {
                            position: at,
                            message: "division by a non-constant polynomial".into(),
                        });
                    }
                    let c = rhs.constant_term();
                    if c.is_zero() {
                        return Err(Error::Parse { position: at, message: "division by zero".into() });
                    }
                    acc = acc.scale(&c.checked_inv()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return self.err("expected a non-negative integer exponent");
            }
            let e: u32 =
                digits.parse().map_err(|_| Error::Parse { position: start, message: "exponent too large".into() })?;
            if e > 4096 {
                return Err(Error::Parse { position: start, message: "exponent too large".into() });
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<MPoly> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                self.digits();
                if self.src[self.pos..].starts_with('.') {
                    self.pos += 1;
                    self.digits();
                }
                let text = &self.src[start..self.pos];
                let r: Rational = text
                    .parse()
                    .map_err(|_| Error::Parse { position: start, message: format!("bad number {text:?}") })?;
                Ok(MPoly::constant(self.nvars, r.into()))
            }
            Some('s') => {
                if self.src[self.pos..].starts_with("s2") {
                    self.pos += 2;
                    Ok(MPoly::constant(self.nvars, ExactScalar::sqrt2()))
                } else {
                    self.err("unknown symbol (expected s2)")
                }
            }
            Some('i') => {
                self.bump();
                Ok(MPoly::constant(self.nvars, ExactScalar::i()))
            }
            Some('z') => {
                self.bump();
                let digits = self.digits();
                let k: usize = if digits.is_empty() {
                    1
                } else {
                    digits
                        .parse()
                        .map_err(|_| Error::Parse { position: start, message: "bad variable index".into() })?
                };
                if k == 0 || k > self.nvars {
                    return Err(Error::Parse {
                        position: start,
                        message: format!("variable z{k} outside 1..={}", self.nvars),
                    });
                }
                Ok(MPoly::var(self.nvars, k - 1))
            }
            Some('(') => {
                self.bump();
                let first = self.expr()?;
                match self.peek() {
                    Some(')') => {
                        self.bump();
                        Ok(first)
                    }
                    Some(',') => {
                        self.bump();
                        let second = self.expr()?;
                        if self.peek() != Some(')') {
                            return self.err("expected ')'");
                        }
                        self.bump();
                        if !first.is_constant() || !second.is_constant() {
                            return Err(Error::Parse {
                                position: start,
                                message: "complex pair must have constant parts".into(),
                            });
                        }
                        let re = first.constant_term();
                        let im = second.constant_term();
                        if !re.is_real() || !im.is_real() {
                            return Err(Error::Parse {
                                position: start,
                                message: "complex pair parts must be real".into(),
                            });
                        }
                        Ok(MPoly::constant(self.nvars, ExactScalar::new(re.re, im.re)))
                    }
                    _ => self.err("expected ')' or ','"),
                }
            }
            Some(c) => self.err(format!("unexpected character {c:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a polynomial in exactly `nvars` variables.
pub fn parse_poly(src: &str, nvars: usize) -> Result<MPoly> {
    let mut p = Parser { src, pos: 0, nvars };
    let out = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(out)
}

/// Parses a polynomial whose variable count is the highest `zk` mentioned (at least one).
pub fn parse_poly_auto(src: &str) -> Result<MPoly> {
    parse_poly(src, infer_nvars(src).max(1))
}

/// Highest variable index `k` among the `zk` tokens (0 when there are none).
pub fn infer_nvars(src: &str) -> usize {
    let bytes = src.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'z' {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let k = if j == i + 1 { 1 } else { src[i + 1..j].parse().unwrap_or(usize::MAX) };
            best = best.max(k);
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// Parses a constant in scalar text form (`p/q`, `p/q+r/s*s2`, `(re,im)`).
pub fn parse_scalar(src: &str) -> Result<ExactScalar> {
    let p = parse_poly(src, 0)?;
    Ok(p.constant_term())
}

/// Parses a point such as `(1/2,1/3)` or `(1/2)`, each coordinate a real scalar
/// or a bracketed complex pair `[re,im]`.
pub fn parse_point(src: &str) -> Result<Vec<ExactScalar>> {
    let s = src.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Parse { position: 0, message: format!("point must be parenthesized: {s:?}") })?;
    let mut coords = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = inner.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'[' | b'(' => depth += 1,
            b']' | b')' => depth -= 1,
            b',' if depth == 0 => {
                coords.push(parse_coordinate(&inner[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    coords.push(parse_coordinate(&inner[start..])?);
    Ok(coords)
}

fn parse_coordinate(s: &str) -> Result<ExactScalar> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        return parse_scalar(&format!("({body})"));
    }
    parse_scalar(s)
}

/// Parses a `;`-separated list of points.
pub fn parse_points(src: &str) -> Result<Vec<Vec<ExactScalar>>> {
    src.split(';').filter(|s| !s.trim().is_empty()).map(parse_point).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::MultiIndex;
    use crate::scalar::QuadExt;

    #[test]
    fn parses_the_target_grammar() {
        let f = parse_poly("1-(1/2*s2)*z1-(1/2*s2)*z2", 2).unwrap();
        let half_root2 = ExactScalar::from_quad(QuadExt::new(Rational::zero(), Rational::frac(1, 2)));
        assert_eq!(f.coeff(&MultiIndex::new(vec![1, 0])), -half_root2.clone());
        assert_eq!(f.coeff(&MultiIndex::new(vec![0, 1])), -half_root2);
        assert_eq!(f.constant_term(), ExactScalar::one());
    }

    #[test]
    fn reports_position() {
        match parse_poly("1+z3", 2) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_poly("1+*z1", 2) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_poly("z1/z2", 2).is_err());
        assert!(parse_poly("(1", 2).is_err());
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("1+s2").unwrap().to_string(), "1+s2");
        assert_eq!(parse_scalar("(1/2,-1/3)").unwrap().to_string(), "(1/2,-1/3)");
        assert_eq!(parse_scalar("7/14").unwrap(), ExactScalar::frac(1, 2));
    }

    #[test]
    fn points() {
        let pts = parse_points("(1/2,1/3);(0,[1/4,1/5])").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0][1], ExactScalar::frac(1, 3));
        assert_eq!(pts[1][1].to_string(), "(1/4,1/5)");
    }

    #[test]
    fn infers_variables() {
        assert_eq!(infer_nvars("1-z1*z3"), 3);
        assert_eq!(infer_nvars("1/3"), 0);
        assert_eq!(parse_poly_auto("1-z").unwrap().nvars(), 1);
    }
}
