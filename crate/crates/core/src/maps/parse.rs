//! Text form of maps: `d=2; 0: x/2; 1: (3x+1)/2` or a builtin name.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::spec::{builtin, AffineMap, Beta, Branch, MapSpec};
use crate::error::{Error, Result};

/// Parse a map definition or builtin name.
pub fn parse_map(text: &str) -> Result<MapSpec> {
    let t = text.trim();
    if let Some(m) = parse_builtin(t)? {
        return Ok(m);
    }
    let compact: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.starts_with("d=") {
        let map = parse_affine(t)?;
        return Ok(MapSpec::affine(compact, map));
    }
    Err(Error::Syntax {
        position: 0,
        message: format!("expected `d=` or a builtin map name, found {t:?}"),
    })
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::usage(format!("bad {what} {s:?}")))
}

fn parse_builtin(t: &str) -> Result<Option<MapSpec>> {
    let m = match t {
        "T" => builtin::t(),
        "C" => builtin::c(),
        "collatz-perm" => builtin::collatz_permutation(),
        "atkin-perm" => builtin::atkin_permutation(),
        "venturini" => builtin::venturini(),
        "feix3" => builtin::feix3(),
        "mahler" => builtin::mahler(),
        "teriele" => builtin::teriele(),
        _ => {
            let Some((head, arg)) = t.split_once(':') else {
                return Ok(None);
            };
            match head.trim() {
                "3x+d" => builtin::three_x_plus(parse_int(arg, "offset")?)?,
                "qx+1" => builtin::qx_plus_1(parse_int(arg, "multiplier")?)?,
                "qx+r" => {
                    let (q, r) = arg
                        .split_once(',')
                        .ok_or_else(|| Error::usage("qx+r needs `q,r`"))?;
                    builtin::qx_plus_r(parse_int(q, "multiplier")?, parse_int(r, "offset")?)?
                }
                "wiggin" => builtin::wiggin(parse_int(arg, "D")?)?,
                "queneau" => builtin::queneau(parse_int(arg, "n")?)?,
                "beta" => builtin::beta(Beta::parse(arg)?),
                "hasse" => {
                    let (dm, rest) = arg
                        .split_once('[')
                        .ok_or_else(|| Error::usage("hasse needs `d,m,[r1,..]`"))?;
                    let mut it = dm.split(',').map(str::trim).filter(|s| !s.is_empty());
                    let d: u64 = parse_int(it.next().unwrap_or(""), "modulus")?;
                    let m: i64 = parse_int(it.next().unwrap_or(""), "multiplier")?;
                    let inner = rest
                        .strip_suffix(']')
                        .ok_or_else(|| Error::usage("hasse offsets must end with `]`"))?;
                    let r = inner
                        .split(',')
                        .map(|s| parse_int::<i64>(s, "offset"))
                        .collect::<Result<Vec<_>>>()?;
                    builtin::hasse(d, m, &r)?
                }
                _ => return Ok(None),
            }
        }
    };
    Ok(Some(m))
}

/// `a*x + b` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
struct Linear {
    a: BigRational,
    b: BigRational,
}

impl Linear {
    fn constant(c: BigRational) -> Linear {
        Linear { a: BigRational::zero(), b: c }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.base + self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Linear> {
        let mut acc = if self.eat(b'-') {
            let t = self.term()?;
            Linear { a: -t.a, b: -t.b }
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc.a += t.a;
                acc.b += t.b;
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc.a -= t.a;
                acc.b -= t.b;
            } else {
                return Ok(acc);
            }
        }
    }

    // term := factor (('*'|'/') factor | factor)*   (juxtaposition multiplies)
    fn term(&mut self) -> Result<Linear> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = self.mul(acc, f)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let f = self.factor()?;
                    if !f.a.is_zero() {
                        self.pos = at;
                        return Err(self.err("cannot divide by an expression in x"));
                    }
                    if f.b.is_zero() {
                        self.pos = at;
                        return Err(self.err("division by zero"));
                    }
                    acc.a /= &f.b;
                    acc.b /= &f.b;
                }
                Some(c) if c == b'x' || c == b'(' || c.is_ascii_digit() => {
                    let f = self.factor()?;
                    acc = self.mul(acc, f)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn mul(&self, l: Linear, r: Linear) -> Result<Linear> {
        if !l.a.is_zero() && !r.a.is_zero() {
            return Err(self.err("branch is not affine in x"));
        }
        if l.a.is_zero() {
            Ok(Linear { a: &r.a * &l.b, b: &r.b * &l.b })
        } else {
            Ok(Linear { a: &l.a * &r.b, b: &l.b * &r.b })
        }
    }

    fn factor(&mut self) -> Result<Linear> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Linear { a: BigRational::one(), b: BigRational::zero() })
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                let f = self.factor()?;
                Ok(Linear { a: -f.a, b: -f.b })
            }
            Some(c) if c.is_ascii_digit() => Ok(Linear::constant(BigRational::from_integer(self.integer()?))),
            Some(c) => Err(self.err(format!("unexpected character {:?}", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn parse_branch_expr(src: &str, base: usize) -> Result<Branch> {
    let mut lx = Lexer { src: src.as_bytes(), pos: 0, base };
    let e = lx.expr()?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after branch expression"));
    }
    Ok(Branch::new(e.a, e.b))
}

fn parse_affine(text: &str) -> Result<AffineMap> {
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ';' {
            parts.push((start, &text[start..i]));
            start = i + 1;
        }
    }
    parts.push((start, &text[start..]));

    let (hstart, header) = parts[0];
    let lead = header.len() - header.trim_start().len();
    let h = header.trim();
    let rest = h.strip_prefix("d").map(str::trim_start).and_then(|r| r.strip_prefix('='));
    let Some(rest) = rest else {
        return Err(Error::Syntax { position: hstart + lead, message: "expected `d=`".into() });
    };
    let modulus: u64 = rest.trim().parse().map_err(|_| Error::Syntax {
        position: hstart + lead + h.find('=').unwrap_or(0) + 1,
        message: format!("bad modulus {:?}", rest.trim()),
    })?;
    if modulus < 2 {
        return Err(Error::usage(format!("modulus must be at least 2, got {modulus}")));
    }
    if modulus > 1 << 20 {
        return Err(Error::usage(format!("modulus {modulus} is too large")));
    }

    let mut slots: Vec<Option<Branch>> = vec![None; modulus as usize];
    for &(off, part) in &parts[1..] {
        if part.trim().is_empty() {
            continue;
        }
        let Some(colon) = part.find(':') else {
            return Err(Error::Syntax {
                position: off + part.len() - part.trim_start().len(),
                message: "expected `residue: expression`".into(),
            });
        };
        let rtext = part[..colon].trim();
        let residue: u64 = rtext.parse().map_err(|_| Error::Syntax {
            position: off + part.len() - part.trim_start().len(),
            message: format!("bad residue {rtext:?}"),
        })?;
        if residue >= modulus {
            return Err(Error::usage(format!("residue {residue} is not below d={modulus}")));
        }
        if slots[residue as usize].is_some() {
            return Err(Error::usage(format!("residue {residue} defined twice")));
        }
        slots[residue as usize] = Some(parse_branch_expr(&part[colon + 1..], off + colon + 1)?);
    }
    let missing: Vec<usize> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| i)
        .collect();
    if !missing.is_empty() {
        return Err(Error::usage(format!("no branch for residues {missing:?}")));
    }
    AffineMap::new(modulus, slots.into_iter().map(|s| s.expect("checked")).collect())
}
