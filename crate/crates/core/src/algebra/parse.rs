//! Text grammar shared by every module.
//!
//! Variables are `x1..xn` (base coordinates), `d1..dn` (derivations),
//! `X1..Xn` and `s1..sn` (twisted cotangent coordinates) and `l` (the
//! lambda parameter). Coefficients are integers or `a/b`; operators are
//! `+ - * / ^` with the usual precedence, and juxtaposition such as `2x1`
//! means multiplication. Whitespace is insignificant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::field::{Rationals, Ring};
use super::poly::MultiPoly;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Target algebra for evaluating an [`Expr`].
pub trait ExprAlgebra {
    type Value: Clone;
    fn num(&self, q: &BigRational) -> Result<Self::Value>;
    fn var(&self, name: &str) -> Result<Self::Value>;
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn sub(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: Self::Value) -> Result<Self::Value>;
    fn div(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn pow(&self, a: Self::Value, e: u32) -> Result<Self::Value> {
        let mut acc = self.num(&BigRational::one())?;
        for _ in 0..e {
            acc = self.mul(acc, a.clone())?;
        }
        Ok(acc)
    }
}

impl Expr {
    pub fn eval<A: ExprAlgebra>(&self, alg: &A) -> Result<A::Value> {
        Ok(match self {
            Expr::Num(q) => alg.num(q)?,
            Expr::Var(v) => alg.var(v)?,
            Expr::Neg(a) => alg.neg(a.eval(alg)?)?,
            Expr::Add(a, b) => alg.add(a.eval(alg)?, b.eval(alg)?)?,
            Expr::Sub(a, b) => alg.sub(a.eval(alg)?, b.eval(alg)?)?,
            Expr::Mul(a, b) => alg.mul(a.eval(alg)?, b.eval(alg)?)?,
            Expr::Div(a, b) => alg.div(a.eval(alg)?, b.eval(alg)?)?,
            Expr::Pow(a, e) => alg.pow(a.eval(alg)?, *e)?,
        })
    }

    /// Value of a variable-free expression.
    pub fn as_constant(&self) -> Option<BigRational> {
        Some(match self {
            Expr::Num(q) => q.clone(),
            Expr::Var(_) => return None,
            Expr::Neg(a) => -a.as_constant()?,
            Expr::Add(a, b) => a.as_constant()? + b.as_constant()?,
            Expr::Sub(a, b) => a.as_constant()? - b.as_constant()?,
            Expr::Mul(a, b) => a.as_constant()? * b.as_constant()?,
            Expr::Div(a, b) => {
                let d = b.as_constant()?;
                if d.is_zero() {
                    return None;
                }
                a.as_constant()? / d
            }
            Expr::Pow(a, e) => {
                let base = a.as_constant()?;
                (0..*e).fold(BigRational::one(), |acc, _| acc * &base)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Num(s.parse().unwrap()), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(Error::Parse {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            column: self.col(),
            message: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Op('+')) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Op('-')) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    let e = u32::try_from(n).or_else(|_| self.err("exponent too large"))?;
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: text.chars().count() + 1,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Evaluates expressions into commutative polynomials over a ring with
/// named variables; division is only allowed by nonzero constants.
pub struct PolyAlgebra<'a, R: Ring> {
    pub ring: R,
    pub names: &'a [String],
    pub coeff: &'a dyn Fn(&BigRational) -> Result<R::Elem>,
}

impl<R: Ring> ExprAlgebra for PolyAlgebra<'_, R> {
    type Value = MultiPoly<R>;

    fn num(&self, q: &BigRational) -> Result<MultiPoly<R>> {
        Ok(MultiPoly::constant(self.ring.clone(), self.names.len(), (self.coeff)(q)?))
    }
    fn var(&self, name: &str) -> Result<MultiPoly<R>> {
        match self.names.iter().position(|n| n == name) {
            Some(i) => Ok(MultiPoly::var(self.ring.clone(), self.names.len(), i)),
            None => Err(Error::Parse {
                column: 0,
                message: format!("unknown variable '{name}' (expected one of {:?})", self.names),
            }),
        }
    }
    fn add(&self, a: MultiPoly<R>, b: MultiPoly<R>) -> Result<MultiPoly<R>> {
        a.try_add(&b)
    }
    fn sub(&self, a: MultiPoly<R>, b: MultiPoly<R>) -> Result<MultiPoly<R>> {
        a.try_sub(&b)
    }
    fn mul(&self, a: MultiPoly<R>, b: MultiPoly<R>) -> Result<MultiPoly<R>> {
        a.try_mul(&b)
    }
    fn neg(&self, a: MultiPoly<R>) -> Result<MultiPoly<R>> {
        Ok(-a)
    }
    fn div(&self, _a: MultiPoly<R>, _b: MultiPoly<R>) -> Result<MultiPoly<R>> {
        unreachable!("division is folded before evaluation")
    }
    fn pow(&self, a: MultiPoly<R>, e: u32) -> Result<MultiPoly<R>> {
        a.pow(e)
    }
}

/// Rewrites `a / c` with `c` a nonzero constant into `a * (1/c)`.
pub(crate) fn fold_constant_division(e: &Expr) -> Result<Expr> {
    let b = |x: &Expr| fold_constant_division(x).map(Box::new);
    Ok(match e {
        Expr::Num(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => Expr::Neg(b(a)?),
        Expr::Add(x, y) => Expr::Add(b(x)?, b(y)?),
        Expr::Sub(x, y) => Expr::Sub(b(x)?, b(y)?),
        Expr::Mul(x, y) => Expr::Mul(b(x)?, b(y)?),
        Expr::Pow(x, k) => Expr::Pow(b(x)?, *k),
        Expr::Div(x, y) => match y.as_constant() {
            Some(c) if !c.is_zero() => Expr::Mul(b(x)?, Box::new(Expr::Num(c.recip()))),
            _ => {
                return Err(Error::Parse {
                    column: 0,
                    message: "division is only allowed by nonzero constants here".into(),
                })
            }
        },
    })
}

/// Parses a polynomial over `Q` in the named variables.
pub fn parse_poly(text: &str, names: &[String]) -> Result<MultiPoly<Rationals>> {
    parse_poly_in(text, names, Rationals, &|q: &BigRational| Ok(q.clone()))
}

/// Parses a polynomial over an arbitrary ring given a coefficient map.
pub fn parse_poly_in<R: Ring>(
    text: &str,
    names: &[String],
    ring: R,
    coeff: &dyn Fn(&BigRational) -> Result<R::Elem>,
) -> Result<MultiPoly<R>> {
    let e = fold_constant_division(&parse_expr(text)?)?;
    e.eval(&PolyAlgebra { ring, names, coeff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::var_names;

    #[test]
    fn precedence_and_implicit_multiplication() {
        let n = var_names("x", 2);
        let a = parse_poly("2x1^2 - -x2*(x1+1)", &n).unwrap();
        let b = parse_poly("2*x1^2 + x1*x2 + x2", &n).unwrap();
        assert_eq!(a, b);
        let c = parse_poly("-x1^2", &n).unwrap();
        assert_eq!(c.to_string(), "-x1^2");
        let d = parse_poly("x1^3/3 + 1/2", &n).unwrap();
        assert_eq!(d.to_string(), "1/3*x1^3 + 1/2");
    }

    #[test]
    fn errors_carry_columns() {
        let n = var_names("x", 1);
        match parse_poly("x1 + $", &n) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly("(x1 + 1", &n), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x2", &n), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("1/x1", &n), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x1 x1)", &n), Err(Error::Parse { .. })));
    }
}
