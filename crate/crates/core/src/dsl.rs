//! Superpotential expressions such as `"0.5*x^3 - x + 2"`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expression := term (('+' | '-') term)*
//! term       := factor (('*' | '/') factor)*
//! factor     := number | 'x' ('^' unsigned-integer)? | '(' expression ')' | '-' factor
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Division is
//! only allowed by expressions that evaluate to a nonzero constant.

use std::fmt;

use thiserror::Error;

use crate::potential::Polynomial;

/// Highest power the parser will build.
pub const MAX_DEGREE: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressionSource {
    pub text: String,
    /// File name or `"flag"`, used in error messages.
    pub origin: String,
}

impl ExpressionSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        ExpressionSource { text: text.into(), origin: origin.into() }
    }

    pub fn flag(text: impl Into<String>) -> Self {
        ExpressionSource::new(text, "flag")
    }
}

/// Zero-based character offset into the source plus a message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    NonPolynomial,
}

impl fmt::Display for DslErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslErrorKind::Syntax => f.write_str("syntax error"),
            DslErrorKind::NonPolynomial => f.write_str("not a polynomial"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{origin}: {kind} at offset {}: {}", .diagnostic.position, .diagnostic.message)]
pub struct DslError {
    pub origin: String,
    pub kind: DslErrorKind,
    pub diagnostic: ParseDiagnostic,
}

impl DslError {
    pub fn position(&self) -> usize {
        self.diagnostic.position
    }
}

type Failure = (DslErrorKind, ParseDiagnostic);

fn syntax(position: usize, message: impl Into<String>) -> Failure {
    (DslErrorKind::Syntax, ParseDiagnostic { position, message: message.into() })
}

fn non_polynomial(position: usize, message: impl Into<String>) -> Failure {
    (DslErrorKind::NonPolynomial, ParseDiagnostic { position, message: message.into() })
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn describe(&mut self) -> String {
        match self.peek() {
            Some(c) => format!("unexpected '{c}'"),
            None => "unexpected end of input".to_string(),
        }
    }

    fn expression(&mut self) -> Result<Polynomial, Failure> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, Failure> {
        let mut acc = self.factor()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let rhs = self.factor()?;
            if op == '*' {
                let degree = acc.degree().unwrap_or(0) + rhs.degree().unwrap_or(0);
                if degree > MAX_DEGREE {
                    return Err(syntax(at, format!("degree exceeds {MAX_DEGREE}")));
                }
                acc = &acc * &rhs;
            } else {
                if !rhs.is_constant() {
                    return Err(non_polynomial(at, "division by an x-dependent factor"));
                }
                let d = rhs.coefficients().first().copied().unwrap_or(0.0);
                if d == 0.0 {
                    return Err(syntax(at, "division by zero"));
                }
                acc = Polynomial::new(acc.coefficients().iter().map(|c| c / d).collect());
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, Failure> {
        let Some(c) = self.peek() else {
            return Err(syntax(self.pos, "unexpected end of input"));
        };
        let start = self.pos;
        match c {
            '-' => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            '(' => {
                self.pos += 1;
                let inner = self.expression()?;
                if self.peek() != Some(')') {
                    let msg = format!("expected ')' to close '(' at offset {start}, {}", self.describe());
                    return Err(syntax(self.pos, msg));
                }
                self.pos += 1;
                Ok(inner)
            }
            c if c.is_ascii_digit() || c == '.' => self.number().map(Polynomial::constant),
            c if c.is_alphabetic() || c == '_' => {
                let ident: String = self.chars[start..]
                    .iter()
                    .take_while(|c| c.is_alphanumeric() || **c == '_')
                    .collect();
                if ident != "x" {
                    return Err(non_polynomial(start, format!("unsupported symbol '{ident}'")));
                }
                self.pos += 1;
                let mut power = 1;
                if self.peek() == Some('^') {
                    self.pos += 1;
                    self.skip_ws();
                    power = self.exponent()?;
                }
                Ok(Polynomial::monomial(1.0, power))
            }
            _ => Err(syntax(start, self.describe())),
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn exponent(&mut self) -> Result<usize, Failure> {
        let start = self.pos;
        if self.digits() == 0 {
            return Err(syntax(start, "expected an unsigned integer exponent"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<usize>() {
            Ok(k) if k <= MAX_DEGREE => Ok(k),
            _ => Err(syntax(start, format!("exponent exceeds {MAX_DEGREE}"))),
        }
    }

    fn number(&mut self) -> Result<f64, Failure> {
        let start = self.pos;
        let mut mantissa = self.digits();
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            mantissa += self.digits();
        }
        if mantissa == 0 {
            return Err(syntax(start, "malformed number"));
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(syntax(mark, "malformed exponent"));
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(syntax(start, format!("number '{text}' is out of range"))),
        }
    }
}

pub fn parse_superpotential(src: &ExpressionSource) -> Result<Polynomial, DslError> {
    let mut parser = Parser { chars: src.text.chars().collect(), pos: 0 };
    let result = if parser.peek().is_none() {
        Err(syntax(0, "empty expression"))
    } else {
        parser.expression().and_then(|p| match parser.peek() {
            None => Ok(p),
            Some(_) => {
                let at = parser.pos;
                Err(syntax(at, parser.describe()))
            }
        })
    };
    result.map_err(|(kind, diagnostic)| DslError { origin: src.origin.clone(), kind, diagnostic })
}

/// Shortest decimal that parses back to the same `f64`.
fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Canonical rendering, highest power first; `parse_superpotential` of the
/// result reproduces `p` exactly.
pub fn format_polynomial(p: &Polynomial) -> String {
    let mut out = String::new();
    for (k, &c) in p.coefficients().iter().enumerate().rev() {
        if c == 0.0 {
            continue;
        }
        let magnitude = c.abs();
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        let monomial = match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        };
        match (k, magnitude == 1.0) {
            (0, _) => out.push_str(&format_number(magnitude)),
            (_, true) => out.push_str(&monomial),
            (_, false) => {
                out.push_str(&format_number(magnitude));
                out.push('*');
                out.push_str(&monomial);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Polynomial, DslError> {
        parse_superpotential(&ExpressionSource::flag(s))
    }

    #[test]
    fn examples() {
        assert_eq!(parse("0.35355339*x^2").unwrap().coefficients(), &[0.0, 0.0, 0.35355339]);
        assert_eq!(parse("0.5*x^3 - x + 2").unwrap().coefficients(), &[2.0, -1.0, 0.0, 0.5]);
        let err = parse("sin(x)").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::NonPolynomial);
        assert_eq!(err.position(), 0);
    }

    #[test]
    fn formatting_examples() {
        assert_eq!(format_polynomial(&Polynomial::new(vec![0.0, 0.0, 0.125])), "0.125*x^2");
        assert_eq!(format_polynomial(&Polynomial::zero()), "0");
        let p = Polynomial::new(vec![2.0, -1.0, 0.0, 0.5]);
        assert_eq!(format_polynomial(&p), "0.5*x^3 - x + 2");
        assert_eq!(parse(&format_polynomial(&p)).unwrap(), p);
        assert_eq!(format_polynomial(&Polynomial::new(vec![0.0, 0.0, -1.0])), "-x^2");
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("1-2-3").unwrap();
        for x in [-2.0, 0.0, 3.5] {
            assert_eq!(p.evaluate(x), -4.0);
        }
        assert_eq!(parse("-x^2").unwrap().coefficients(), &[0.0, 0.0, -1.0]);
        assert_eq!(parse("2*(x+1)*(x-1)").unwrap().coefficients(), &[-2.0, 0.0, 2.0]);
        assert_eq!(parse("8/2/2").unwrap().coefficients(), &[2.0]);
        assert_eq!(parse(" - - x ").unwrap().coefficients(), &[0.0, 1.0]);
        assert_eq!(parse("x^2/1.25").unwrap().coefficients(), &[0.0, 0.0, 1.0 / 1.25]);
        assert_eq!(parse("1.5e-3*x").unwrap().coefficients(), &[0.0, 1.5e-3]);
        assert_eq!(parse(".5").unwrap().coefficients(), &[0.5]);
    }

    #[test]
    fn error_positions() {
        let cases = [
            ("", DslErrorKind::Syntax, 0),
            ("   ", DslErrorKind::Syntax, 0),
            ("x +", DslErrorKind::Syntax, 3),
            ("1/x", DslErrorKind::NonPolynomial, 2),
            ("1/(x+1)", DslErrorKind::NonPolynomial, 2),
            ("2 * exp(x)", DslErrorKind::NonPolynomial, 4),
            ("(x + 1", DslErrorKind::Syntax, 6),
            ("x^-2", DslErrorKind::Syntax, 2),
            ("x^2.5", DslErrorKind::Syntax, 3),
            ("x/0", DslErrorKind::Syntax, 2),
            ("2x", DslErrorKind::Syntax, 1),
            ("1e", DslErrorKind::Syntax, 1),
            ("x^999", DslErrorKind::Syntax, 2),
            ("1e400", DslErrorKind::Syntax, 0),
            ("é", DslErrorKind::NonPolynomial, 0),
            ("3 $", DslErrorKind::Syntax, 2),
        ];
        for (src, kind, pos) in cases {
            let err = parse(src).unwrap_err();
            assert_eq!((err.kind, err.position()), (kind, pos), "{src:?}: {err}");
        }
    }

    #[test]
    fn degree_cap_on_products() {
        let src = ["x^40"; 2].join("*");
        assert!(parse(&src).is_err());
        assert!(parse("x^32*x^32").is_ok());
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(coeffs in prop::collection::vec(
            prop_oneof![Just(0.0), Just(1.0), Just(-1.0), -1e6..1e6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())],
            0..8,
        )) {
            let p = Polynomial::new(coeffs);
            let text = format_polynomial(&p);
            let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert_eq!(back, p);
        }

        #[test]
        fn parser_is_total(s in ".{0,40}") {
            match parse(&s) {
                Ok(_) => {}
                Err(e) => prop_assert!(e.position() <= s.chars().count()),
            }
        }

        #[test]
        fn parser_is_total_on_grammar_alphabet(s in "[x0-9.eE+*/^() -]{0,30}") {
            if let Err(e) = parse(&s) {
                prop_assert!(e.position() <= s.chars().count());
            }
        }
    }
}
