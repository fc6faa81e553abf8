//! Text form of series: `3/2*t^(-1/2) + 1 - 5*t^(2) + O(t^(4))`.

use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::hahn::group::{Bound, GroupElement};
use crate::hahn::series::HahnSeries;
use crate::hahn::truncated::TruncatedSeries;
use crate::scalar::{parse_rational, Scalar};

fn write_terms<C: Scalar>(f: &mut fmt::Formatter<'_>, s: &HahnSeries<C>) -> fmt::Result {
    if s.is_zero() {
        return f.write_str("0");
    }
    for (i, (e, c)) in s.terms().iter().enumerate() {
        let shown = if i == 0 {
            c.clone()
        } else if c.is_negative() {
            f.write_str(" - ")?;
            -c.clone()
        } else {
            f.write_str(" + ")?;
            c.clone()
        };
        if e.is_zero() {
            write!(f, "{shown}")?;
        } else {
            write!(f, "{shown}*t^({e})")?;
        }
    }
    Ok(())
}

impl<C: Scalar> fmt::Display for HahnSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self)
    }
}

impl<C: Scalar> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.approx())?;
        if let Bound::Finite(p) = self.prec() {
            write!(f, " + O(t^({p}))")?;
        }
        Ok(())
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::SeriesSyntax(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn coeff(&mut self) -> Result<BigRational> {
        let n = self.digits();
        if n.is_empty() {
            return Err(self.err("expected coefficient"));
        }
        let mut text = n.to_string();
        let save = self.pos;
        if self.eat("/") {
            let d = self.digits();
            if d.is_empty() {
                self.pos = save;
            } else {
                text.push('/');
                text.push_str(d);
            }
        }
        parse_rational(&text).ok_or_else(|| self.err("bad coefficient"))
    }

    fn exponent(&mut self) -> Result<GroupElement> {
        let start = self.pos;
        let end = self.src[start..].find(')').ok_or_else(|| self.err("unclosed exponent"))?;
        self.pos = start + end + 1;
        GroupElement::parse(&self.src[start..start + end].replace(' ', ""))
    }

    /// `coeff ('*' 't^(' exp ')')? | 't^(' exp ')'`
    fn term(&mut self, rank: usize) -> Result<(GroupElement, BigRational)> {
        let coeff = if self.eat("t^(") {
            let e = self.exponent()?;
            return Ok((e, BigRational::from_integer(1.into())));
        } else {
            self.coeff()?
        };
        let save = self.pos;
        self.ws();
        if self.eat("*") {
            self.ws();
            if !self.eat("t^(") {
                return Err(self.err("expected `t^(`"));
            }
            let e = self.exponent()?;
            Ok((e, coeff))
        } else {
            self.pos = save;
            Ok((GroupElement::zero(rank), coeff))
        }
    }
}

/// Parses a series in the text format, with an optional trailing
/// `+ O(t^(p))` precision annotation. Constant-only input takes `rank`.
pub fn parse_series<C: Scalar>(src: &str, rank: usize) -> Result<TruncatedSeries<C>> {
    let mut cur = Cursor { src, pos: 0 };
    let mut terms = Vec::new();
    let mut prec = Bound::Infinite;
    cur.ws();
    let mut negative = cur.eat("-");
    cur.ws();
    if cur.eat("O(t^(") {
        let p = cur.exponent()?;
        if !cur.eat(")") {
            return Err(cur.err("expected `)`"));
        }
        prec = Bound::Finite(p);
    } else {
        loop {
            let (e, c) = cur.term(rank)?;
            terms.push((e, if negative { -c } else { c }));
            cur.ws();
            match cur.peek() {
                None => break,
                Some('+') | Some('-') => {
                    negative = cur.peek() == Some('-');
                    cur.pos += 1;
                    cur.ws();
                    if cur.eat("O(t^(") {
                        if negative {
                            return Err(cur.err("precision term must be added"));
                        }
                        let p = cur.exponent()?;
                        if !cur.eat(")") {
                            return Err(cur.err("expected `)`"));
                        }
                        prec = Bound::Finite(p);
                        break;
                    }
                }
                Some(_) => return Err(cur.err("unexpected character")),
            }
        }
    }
    cur.ws();
    if cur.pos != src.len() {
        return Err(cur.err("trailing input"));
    }
    for (e, _) in &terms {
        if e.rank() != rank {
            return Err(Error::RankMismatch(e.rank(), rank));
        }
    }
    if let Bound::Finite(p) = &prec {
        if p.rank() != rank {
            return Err(Error::RankMismatch(p.rank(), rank));
        }
    }
    let series = HahnSeries::from_terms(terms.into_iter().map(|(e, c)| (e, C::from_rational(&c))));
    if let (Bound::Finite(p), Some(top)) = (&prec, series.max_exponent()) {
        if top >= p {
            return Err(Error::SeriesSyntax(format!("term t^({top}) is not below the precision t^({p})")));
        }
    }
    Ok(TruncatedSeries::new(series, prec, rank))
}

/// Parses a series that must carry no precision annotation.
pub fn parse_exact<C: Scalar>(src: &str, rank: usize) -> Result<HahnSeries<C>> {
    let s = parse_series::<C>(src, rank)?;
    if s.prec().is_finite() {
        return Err(Error::SeriesSyntax(format!("expected an exact series, got `{src}`")));
    }
    Ok(s.approx().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    #[test]
    fn round_trip_spec_example() {
        let s: TruncatedSeries<Q> = parse_series("3/2*t^(-1/2) + 1 - 5*t^(2)", 1).unwrap();
        assert_eq!(s.to_string(), "3/2*t^(-1/2) + 1 - 5*t^(2)");
        let p: TruncatedSeries<Q> = parse_series("1 + 1*t^(1) + 1/2*t^(2) + O(t^(4))", 1).unwrap();
        assert_eq!(p.prec(), &Bound::Finite(GroupElement::int(4)));
        assert_eq!(p.to_string(), "1 + 1*t^(1) + 1/2*t^(2) + O(t^(4))");
    }

    #[test]
    fn forms() {
        let s: TruncatedSeries<Q> = parse_series("t^(1/2) - t^(1)", 1).unwrap();
        assert_eq!(s.to_string(), "1*t^(1/2) - 1*t^(1)");
        let z: TruncatedSeries<Q> = parse_series("0", 1).unwrap();
        assert!(z.is_exactly_zero());
        assert_eq!(z.to_string(), "0");
        let u: TruncatedSeries<Q> = parse_series("0 + O(t^(5))", 1).unwrap();
        assert_eq!(u.to_string(), "0 + O(t^(5))");
        let neg: TruncatedSeries<Q> = parse_series("-2*t^(-3) + 1*t^(1)", 1).unwrap();
        assert_eq!(neg.to_string(), "-2*t^(-3) + 1*t^(1)");
        let r2: TruncatedSeries<Q> = parse_series("2*t^(1,-1) + 1", 2).unwrap();
        assert_eq!(r2.to_string(), "1 + 2*t^(1,-1)");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_series::<Q>("1 +", 1).is_err());
        assert!(parse_series::<Q>("x", 1).is_err());
        assert!(parse_series::<Q>("1*t^(2", 1).is_err());
        assert!(parse_series::<Q>("1*t^(5) + O(t^(3))", 1).is_err());
        assert!(parse_series::<Q>("t^(1,2)", 1).is_err());
    }
}
