//! Text format for gates.
//!
//! ```text
//! gate := (displace q p [mode [nmodes]])
//!       | (exp (poly "<polynomial>" [nmodes]) t)
//!       | (affine ((s11 s12 ..) ..) (d1 d2 ..) phase)
//!       | (seq gate*)
//!       | (identity [nmodes]) | (squeeze r) | (rotate theta) | (cubic gamma) | (kerr kappa)
//!       | (cphase s i j [nmodes]) | (bs theta i j [nmodes])
//! ```
//!
//! Polynomials are sums of products such as `0.5*q0*p1^2 - 3i*q^2 + (1-2i)`. `q` and `p`
//! without an index mean mode 0, a trailing `i` marks an imaginary number and factors are
//! multiplied in the written operator order.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::gate::{AffineSymplectic, GateSpec};
use super::poly::CanonicalPolynomial;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String, usize),
    Str(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    pub fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_f64(&self) -> Result<f64> {
        match self {
            Sexp::Atom(a, p) => a.parse().map_err(|_| perr(*p, format!("expected a number, found `{a}`"))),
            other => Err(perr(other.pos(), "expected a number")),
        }
    }

    pub fn as_usize(&self) -> Result<usize> {
        match self {
            Sexp::Atom(a, p) => a.parse().map_err(|_| perr(*p, format!("expected an index, found `{a}`"))),
            other => Err(perr(other.pos(), "expected an index")),
        }
    }

    /// (head args...) split into head and args.
    pub fn as_call(&self) -> Result<(&str, &[Sexp])> {
        match self {
            Sexp::List(items, p) => match items.split_first() {
                Some((Sexp::Atom(h, _), rest)) => Ok((h.as_str(), rest)),
                _ => Err(perr(*p, "expected (name ...)")),
            },
            other => Err(perr(other.pos(), "expected a parenthesized form")),
        }
    }
}

pub(crate) fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Read exactly one s-expression.
pub fn read_sexp(text: &str) -> Result<Sexp> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let e = read_one(text, bytes, &mut i)?;
    skip_ws(bytes, &mut i);
    if i != bytes.len() {
        return Err(perr(i, "trailing input"));
    }
    Ok(e)
}

fn skip_ws(b: &[u8], i: &mut usize) {
    while *i < b.len() && b[*i].is_ascii_whitespace() {
        *i += 1;
    }
}

fn read_one(text: &str, b: &[u8], i: &mut usize) -> Result<Sexp> {
    skip_ws(b, i);
    let start = *i;
    match b.get(*i) {
        None => Err(perr(start, "unexpected end of input")),
        Some(b'(') => {
            *i += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(b, i);
                match b.get(*i) {
                    None => return Err(perr(start, "unclosed `(`")),
                    Some(b')') => {
                        *i += 1;
                        return Ok(Sexp::List(items, start));
                    }
                    _ => items.push(read_one(text, b, i)?),
                }
            }
        }
        Some(b')') => Err(perr(start, "unexpected `)`")),
        Some(b'"') => {
            *i += 1;
            let s = *i;
            while *i < b.len() && b[*i] != b'"' {
                *i += 1;
            }
            if *i == b.len() {
                return Err(perr(start, "unterminated string"));
            }
            let out = text[s..*i].to_string();
            *i += 1;
            Ok(Sexp::Str(out, start))
        }
        Some(_) => {
            while *i < b.len() && !b[*i].is_ascii_whitespace() && !matches!(b[*i], b'(' | b')' | b'"') {
                *i += 1;
            }
            Ok(Sexp::Atom(text[start..*i].to_string(), start))
        }
    }
}

/// Parse a gate expression.
pub fn parse_gate_expression(text: &str) -> Result<GateSpec> {
    gate_from_sexp(&read_sexp(text)?)
}

fn arity(head: &str, args: &[Sexp], lo: usize, hi: usize, pos: usize) -> Result<()> {
    if args.len() < lo || args.len() > hi {
        return Err(perr(pos, format!("`{head}` takes {lo}..={hi} arguments, got {}", args.len())));
    }
    Ok(())
}

fn opt_modes(args: &[Sexp], idx: usize, min: usize, pos: usize) -> Result<usize> {
    let n = match args.get(idx) {
        Some(a) => a.as_usize()?,
        None => min,
    };
    if n < min || n == 0 {
        return Err(perr(pos, format!("mode count {n} is too small (need {min})")));
    }
    Ok(n)
}

pub fn gate_from_sexp(e: &Sexp) -> Result<GateSpec> {
    let (head, args) = e.as_call()?;
    let pos = e.pos();
    match head {
        "displace" => {
            arity(head, args, 2, 4, pos)?;
            let mode = args.get(2).map(Sexp::as_usize).transpose()?.unwrap_or(0);
            let n = opt_modes(args, 3, mode + 1, pos)?;
            Ok(GateSpec::displacement_on(mode, n, args[0].as_f64()?, args[1].as_f64()?))
        }
        "exp" => {
            arity(head, args, 2, 2, pos)?;
            let (ph, pargs) = args[0].as_call()?;
            if ph != "poly" || pargs.is_empty() || pargs.len() > 2 {
                return Err(perr(args[0].pos(), "expected (poly \"...\" [nmodes])"));
            }
            let text = match &pargs[0] {
                Sexp::Str(s, _) => s,
                other => return Err(perr(other.pos(), "polynomial must be a quoted string")),
            };
            let n = pargs.get(1).map(Sexp::as_usize).transpose()?;
            let poly = parse_polynomial(text, n).map_err(|e| shift(e, pargs[0].pos() + 1))?;
            Ok(GateSpec::exponential(poly, args[1].as_f64()?))
        }
        "seq" => Ok(GateSpec::Sequence(args.iter().map(gate_from_sexp).collect::<Result<_>>()?)),
        "affine" => {
            arity(head, args, 3, 3, pos)?;
            let rows = match &args[0] {
                Sexp::List(r, _) => r,
                other => return Err(perr(other.pos(), "expected a list of rows")),
            };
            let dim = rows.len();
            let mut s = Array2::zeros((dim, dim));
            for (j, row) in rows.iter().enumerate() {
                let vals = match row {
                    Sexp::List(v, _) if v.len() == dim => v,
                    other => return Err(perr(other.pos(), format!("expected a row of {dim} numbers"))),
                };
                for (k, v) in vals.iter().enumerate() {
                    s[[j, k]] = v.as_f64()?;
                }
            }
            let d = match &args[1] {
                Sexp::List(v, _) if v.len() == dim => Array1::from(v.iter().map(Sexp::as_f64).collect::<Result<Vec<_>>>()?),
                other => return Err(perr(other.pos(), format!("expected {dim} offsets"))),
            };
            let phase = args[2].as_f64()?;
            AffineSymplectic::new(s, d, phase).map(GateSpec::Affine).map_err(|e| perr(pos, e.to_string()))
        }
        "identity" => {
            arity(head, args, 0, 1, pos)?;
            Ok(GateSpec::identity(opt_modes(args, 0, 1, pos)?))
        }
        "squeeze" | "rotate" | "cubic" | "kerr" => {
            arity(head, args, 1, 1, pos)?;
            let x = args[0].as_f64()?;
            Ok(match head {
                "squeeze" => GateSpec::squeezer(x),
                "rotate" => GateSpec::rotation(x),
                "cubic" => GateSpec::cubic(x),
                _ => GateSpec::kerr(x),
            })
        }
        "cphase" | "bs" => {
            arity(head, args, 3, 4, pos)?;
            let x = args[0].as_f64()?;
            let (i, j) = (args[1].as_usize()?, args[2].as_usize()?);
            if i == j {
                return Err(perr(pos, "modes must differ"));
            }
            let n = opt_modes(args, 3, i.max(j) + 1, pos)?;
            Ok(if head == "cphase" { GateSpec::controlled_phase(x, i, j, n) } else { GateSpec::beamsplitter(x, i, j, n) })
        }
        other => Err(perr(pos, format!("unknown gate `{other}`"))),
    }
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
        e => e,
    }
}

/// Canonical text of a gate; `parse_gate_expression(format_gate(g)) == g`.
pub fn format_gate(g: &GateSpec) -> String {
    match g {
        GateSpec::Exponential { generator, strength } => {
            format!("(exp (poly \"{}\" {}) {})", generator, generator.nmodes(), strength)
        }
        GateSpec::Sequence(gs) => {
            let inner: Vec<String> = gs.iter().map(format_gate).collect();
            if inner.is_empty() {
                "(seq)".into()
            } else {
                format!("(seq {})", inner.join(" "))
            }
        }
        GateSpec::Affine(a) => {
            let rows: Vec<String> =
                a.s.rows()
                    .into_iter()
                    .map(|r| format!("({})", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
                    .collect();
            let d: Vec<String> = a.d.iter().map(|x| x.to_string()).collect();
            format!("(affine ({}) ({}) {})", rows.join(" "), d.join(" "), a.phase)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Var(char, usize),
    Ident,
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v: f64 = s[start..i].parse().map_err(|_| perr(start, "bad number"))?;
            let imag = i < b.len() && b[i] == b'i';
            if imag {
                i += 1;
            }
            out.push((Tok::Num(v, imag), start));
        } else if c == b'q' || c == b'p' {
            i += 1;
            let ds = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let mode = if ds == i { 0 } else { s[ds..i].parse().map_err(|_| perr(ds, "bad mode index"))? };
            out.push((Tok::Var(c as char, mode), start));
        } else if c == b'i' {
            i += 1;
            out.push((Tok::Num(1.0, true), start));
        } else if c == b'I' {
            i += 1;
            out.push((Tok::Ident, start));
        } else if matches!(c, b'+' | b'-' | b'*' | b'^' | b'(' | b')') {
            i += 1;
            out.push((Tok::Op(c as char), start));
        } else {
            return Err(perr(start, format!("unexpected character `{}`", c as char)));
        }
    }
    Ok(out)
}

struct PolyParser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
    end: usize,
}

impl PolyParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }
    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }
    fn expr(&mut self) -> Result<CanonicalPolynomial> {
        let mut sign = 1.0;
        match self.peek() {
            Some(Tok::Op('-')) => {
                sign = -1.0;
                self.at += 1;
            }
            Some(Tok::Op('+')) => self.at += 1,
            _ => {}
        }
        let mut acc = self.term()?.scale(sign);
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let s = if *c == '-' { -1.0 } else { 1.0 };
            self.at += 1;
            acc = acc + self.term()?.scale(s);
        }
        Ok(acc)
    }
    fn term(&mut self) -> Result<CanonicalPolynomial> {
        let mut acc = self.factor()?;
        while let Some(Tok::Op('*')) = self.peek() {
            self.at += 1;
            acc = acc.multiply(&self.factor()?)?;
        }
        Ok(acc)
    }
    fn factor(&mut self) -> Result<CanonicalPolynomial> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.at += 1;
            let pos = self.pos();
            match self.peek() {
                Some(Tok::Num(v, false)) if *v >= 0.0 && v.fract() == 0.0 && *v < 64.0 => {
                    let k = *v as u32;
                    self.at += 1;
                    return Ok(base.pow(k));
                }
                _ => return Err(perr(pos, "exponent must be a small non-negative integer")),
            }
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<CanonicalPolynomial> {
        let pos = self.pos();
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Num(v, imag)) => {
                self.at += 1;
                let c = if imag { C64::new(0.0, v) } else { C64::new(v, 0.0) };
                Ok(CanonicalPolynomial::scalar(self.n, c))
            }
            Some(Tok::Var(c, m)) => {
                self.at += 1;
                if m >= self.n {
                    return Err(perr(pos, format!("mode {m} out of range for {} modes", self.n)));
                }
                Ok(if c == 'q' { CanonicalPolynomial::q(m, self.n) } else { CanonicalPolynomial::p(m, self.n) })
            }
            Some(Tok::Ident) => {
                self.at += 1;
                Ok(CanonicalPolynomial::identity(self.n))
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.at += 1;
                        Ok(e)
                    }
                    _ => Err(perr(self.pos(), "expected `)`")),
                }
            }
            _ => Err(perr(pos, "expected a number, variable or `(`")),
        }
    }
}

/// Parse polynomial text. With `nmodes = None` the mode count is the largest index + 1.
pub fn parse_polynomial(text: &str, nmodes: Option<usize>) -> Result<CanonicalPolynomial> {
    let toks = tokenize(text)?;
    let needed = toks.iter().filter_map(|(t, _)| if let Tok::Var(_, m) = t { Some(m + 1) } else { None }).max().unwrap_or(1);
    let n = nmodes.unwrap_or(needed);
    if n == 0 {
        return Err(perr(0, "mode count must be positive"));
    }
    let mut p = PolyParser { toks, at: 0, n, end: text.len() };
    if p.toks.is_empty() {
        return Err(perr(0, "empty polynomial"));
    }
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(perr(p.pos(), "unexpected token"));
    }
    Ok(e)
}
