//! Text grammar for kernels.
//!
//! ```text
//! expr    := atom | combinator
//! atom    := one | delta1 | id | twoomega | mobrad | phi
//!          | idpow(cplx) | cosa(real) | sina(real) | char(int, int)
//!          | ind(primes) | ppind({int, ...})
//! primes  := {int, ...} | ~{int, ...} | int, ...
//! combinator := box(expr, expr) | mul(expr, expr) | inv(expr)
//!          | pow(expr, int) | scal(cplx, expr) | re(expr) | im(expr)
//! cplx    := real | real i | real (+|-) real i | [+|-] i
//! ```
//!
//! Whitespace is ignored between tokens. Errors carry the byte offset of the
//! offending token. `Display` on a [`Kernel`] built from catalog entries
//! prints text this parser accepts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{
    box_add, box_inverse, catalog, decompose_real_imag, pointwise_mul, pow_pointwise, scalar_ext,
    Kernel, PrimeSet,
};

pub fn parse(src: &str) -> Result<Kernel> {
    let mut p = Parser { src, pos: 0 };
    let k = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(k)
}

/// A complex literal in the `cplx` form of the grammar, e.g. `2`, `-i`,
/// `1.5+0.3i`.
pub fn parse_complex(src: &str) -> Result<Complex64> {
    let mut p = Parser { src, pos: 0 };
    let z = p.complex()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(z)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse { offset, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map(|f| format!("`{f}`")).unwrap_or_else(|| "end of input".into());
            Err(self.error(format!("expected `{c}`, found {found}")))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 || !rest.as_bytes()[0].is_ascii_alphabetic() {
            return Err(self.error("expected a kernel name"));
        }
        self.pos += len;
        Ok((start, &rest[..len]))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = start;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return Err(self.error("expected a number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let value = text.parse::<f64>().map_err(|_| self.error(format!("invalid number `{text}`")))?;
        self.pos = i;
        Ok(value)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let x = self.number()?;
        if x < 0.0 || x.fract() != 0.0 || x > 9.0e15 {
            return Err(self.error_at(start, format!("expected a non-negative integer, found {x}")));
        }
        Ok(x as u64)
    }

    fn complex(&mut self) -> Result<Complex64> {
        self.skip_ws();
        // A bare `i`, `+i` or `-i`.
        let save = self.pos;
        let sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        if self.eat('i') {
            return Ok(Complex64::new(0.0, sign));
        }
        self.pos = save;
        let first = self.number()?;
        if self.eat('i') {
            return Ok(Complex64::new(0.0, first));
        }
        let save = self.pos;
        match self.peek() {
            Some(c @ ('+' | '-')) => {
                self.pos += 1;
                let sign = if c == '-' { -1.0 } else { 1.0 };
                let im = if self.peek() == Some('i') { 1.0 } else { self.number()? };
                if !self.eat('i') {
                    self.pos = save;
                    return Err(self.error("expected `i` after the imaginary part"));
                }
                Ok(Complex64::new(first, sign * im))
            }
            _ => Ok(Complex64::new(first, 0.0)),
        }
    }

    fn int_set(&mut self) -> Result<Vec<u64>> {
        self.expect('{')?;
        let mut out = Vec::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            out.push(self.integer()?);
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn wrap<T>(&self, offset: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Parse { .. } => e,
            other => self.error_at(offset, other.to_string()),
        })
    }

    fn expr(&mut self) -> Result<Kernel> {
        let (start, name) = self.ident()?;
        let k = match name {
            "one" | "delta1" | "id" | "twoomega" | "mobrad" | "phi" => catalog(name, &[]),
            "idpow" => {
                self.expect('(')?;
                let s = self.complex()?;
                self.expect(')')?;
                Ok(Kernel::id_pow(s))
            }
            "cosa" | "sina" => {
                self.expect('(')?;
                let y = self.number()?;
                self.expect(')')?;
                catalog(name, &[y])
            }
            "char" => {
                self.expect('(')?;
                let k = self.integer()?;
                self.expect(',')?;
                let index = self.integer()?;
                self.expect(')')?;
                catalog("char", &[k as f64, index as f64])
            }
            "ind" => {
                self.expect('(')?;
                let complement = self.eat('~');
                let primes = if self.peek() == Some('{') {
                    self.int_set()?
                } else if complement {
                    return Err(self.error("expected `{` after `~`"));
                } else {
                    let mut v = vec![self.integer()?];
                    while self.eat(',') {
                        v.push(self.integer()?);
                    }
                    v
                };
                self.expect(')')?;
                PrimeSet::new(primes).map(|s| {
                    Kernel::prime_indicator(if complement { s.complement() } else { s })
                })
            }
            "ppind" => {
                self.expect('(')?;
                let values = self.int_set()?;
                self.expect(')')?;
                let mut powers = Vec::new();
                for q in values {
                    let f = self.wrap(start, crate::integer::factorize(q))?;
                    match f.parts() {
                        [pp] => powers.push((pp.p, pp.e)),
                        _ => return Err(self.error_at(start, format!("{q} is not a prime power"))),
                    }
                }
                Kernel::prime_power_indicator(powers)
            }
            "box" | "mul" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                Ok(if name == "box" { box_add(&a, &b) } else { pointwise_mul(&a, &b) })
            }
            "inv" | "re" | "im" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(')')?;
                Ok(match name {
                    "inv" => box_inverse(&a),
                    "re" => decompose_real_imag(&a).0,
                    _ => decompose_real_imag(&a).1,
                })
            }
            "pow" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(',')?;
                self.skip_ws();
                let at = self.pos;
                let k = self.integer()?;
                self.expect(')')?;
                let k = u32::try_from(k).map_err(|_| self.error_at(at, "power too large"))?;
                self.wrap(at, pow_pointwise(&a, k))
            }
            "scal" => {
                self.expect('(')?;
                let lambda = self.complex()?;
                self.expect(',')?;
                let a = self.expr()?;
                self.expect(')')?;
                Ok(scalar_ext(lambda, &a))
            }
            _ => return Err(self.error_at(start, format!("unknown kernel `{name}`"))),
        };
        self.wrap(start, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_examples() {
        assert_eq!(parse("box(one,one)").unwrap().eval_int(12).unwrap(), 4);
        assert_eq!(parse("delta1").unwrap().eval_int(7).unwrap(), 0);
        assert_eq!(parse("mul(id, box(one, mobrad))").unwrap().eval_int(12).unwrap(), 4);
        assert_eq!(parse(" box ( one ,\n inv( one ) ) ").unwrap().eval_int(6).unwrap(), 0);
        let chi = parse("mul(id, char(5,2))").unwrap();
        assert_eq!(chi.eval_int(4).unwrap(), 4);
    }

    #[test]
    fn complex_literals() {
        let cases = [
            ("2", Complex64::new(2.0, 0.0)),
            ("-1.5", Complex64::new(-1.5, 0.0)),
            ("2i", Complex64::new(0.0, 2.0)),
            ("i", Complex64::new(0.0, 1.0)),
            ("-i", Complex64::new(0.0, -1.0)),
            ("0.5-2i", Complex64::new(0.5, -2.0)),
            ("1e-3+i", Complex64::new(1e-3, 1.0)),
        ];
        for (text, z) in cases {
            let mut p = Parser { src: text, pos: 0 };
            assert_eq!(p.complex().unwrap(), z, "{text}");
            assert_eq!(p.pos, text.len(), "{text}");
        }
    }

    #[test]
    fn standalone_complex() {
        assert_eq!(parse_complex(" 3-2i ").unwrap(), Complex64::new(3.0, -2.0));
        assert!(matches!(parse_complex("3-2"), Err(Error::Parse { offset: 1, .. })));
        assert!(parse_complex("2 x").is_err());
    }

    #[test]
    fn round_trips_display() {
        for text in [
            "scal(0.5-2i,pow(box(id,cosa(1.5)),3))",
            "ind(~{2,3})",
            "ppind({4,27})",
            "mul(idpow(0.5+1i),re(char(7,1)))",
            "im(idpow(2i))",
            "box(twoomega,inv(phi))",
        ] {
            assert_eq!(parse(text).unwrap().to_string(), text);
        }
        assert_eq!(parse("ind(2, 3)").unwrap().to_string(), "ind({2,3})");
    }

    #[test]
    fn errors_cite_offsets() {
        let offset = |s: &str| match parse(s) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(offset("box(one one)"), 8);
        assert_eq!(offset("frob"), 0);
        assert_eq!(offset("box(one, frob)"), 9);
        assert_eq!(offset("one)"), 3);
        assert_eq!(offset("ind({2,4})"), 0);
        assert_eq!(offset("pow(one, 0)"), 9);
        assert_eq!(offset("char(5, 9)"), 0);
        assert_eq!(offset(""), 0);
    }
}
