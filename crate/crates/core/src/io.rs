//! Plain-text matrix and vector files.
//!
//! One matrix row per line, entries separated by whitespace. An entry is a
//! decimal (`-1.5`, `2.5e-3`) or an exact ratio (`7/3`). `#` starts a comment
//! and blank lines are skipped. Decimals are read exactly, so `0.1` is `1/10`.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use crate::algebra::Rational;
use crate::error::{ParseDiagnostic, Result};
use crate::matrix::DenseMatrix;

pub fn parse_number(token: &str) -> std::result::Result<Rational, String> {
    if let Some((n, d)) = token.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| format!("bad numerator in '{token}'"))?;
        let d: BigInt = d.parse().map_err(|_| format!("bad denominator in '{token}'"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in '{token}'"));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match token.find(['e', 'E']) {
        Some(k) => {
            let e: i32 = token[k + 1..].parse().map_err(|_| format!("bad exponent in '{token}'"))?;
            (&token[..k], e)
        }
        None => (token, 0),
    };
    let (neg, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
    {
        return Err(format!("not a number: '{token}'"));
    }
    if exp.unsigned_abs() > 4096 {
        return Err(format!("exponent out of range in '{token}'"));
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().expect("digits");
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        Rational::new(digits, Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').filter_map(move |line| {
        let start = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("");
        (!content.trim().is_empty()).then_some((start, content))
    })
}

fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |t| (t.as_ptr() as usize - line.as_ptr() as usize, t))
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix<Rational>> {
    let mut rows = Vec::new();
    for (start, line) in data_lines(text) {
        let mut row = Vec::new();
        for (pos, tok) in tokens(line) {
            let v = parse_number(tok).map_err(|m| ParseDiagnostic::at(text, start + pos, m))?;
            row.push(v);
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(ParseDiagnostic::at(
                    text,
                    start,
                    format!("row has {} entries, expected {first}", row.len()),
                )
                .into());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ParseDiagnostic::at(text, text.len(), "no matrix rows").into());
    }
    DenseMatrix::from_rows(rows)
}

/// One entry per line, or all entries on a single line.
pub fn parse_vector(text: &str) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for (start, line) in data_lines(text) {
        for (pos, tok) in tokens(line) {
            out.push(parse_number(tok).map_err(|m| ParseDiagnostic::at(text, start + pos, m))?);
        }
    }
    if out.is_empty() {
        return Err(ParseDiagnostic::at(text, text.len(), "empty vector").into());
    }
    Ok(out)
}

/// Comma or whitespace separated inline vector, as typed on a command line.
pub fn parse_inline_vector(text: &str) -> Result<Vec<Rational>> {
    parse_vector(&text.replace(',', " "))
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        x.to_string()
    }
}

pub fn format_matrix<T>(m: &DenseMatrix<T>, fmt: impl Fn(&T) -> String) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(&fmt).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn rationals_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(crate::matrix::Numeric::to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};
    use crate::error::Error;

    #[test]
    fn numbers_are_exact() {
        assert_eq!(parse_number("1.93758").unwrap(), rat(193758, 100000));
        assert_eq!(parse_number("-2.5e-1").unwrap(), rat(-1, 4));
        assert_eq!(parse_number("3E2").unwrap(), int(300));
        assert_eq!(parse_number("7/3").unwrap(), rat(7, 3));
        assert_eq!(parse_number(".5").unwrap(), rat(1, 2));
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
        assert!(parse_number("-").is_err());
    }

    #[test]
    fn matrix_file() {
        let m = parse_matrix("# gauge\n2 1\n\n1   1 # trailing\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m[(0, 0)], int(2));
        let err = parse_matrix("1 2\n3\n").unwrap_err();
        match err {
            Error::Parse(d) => assert_eq!(d.line, 2),
            other => panic!("{other:?}"),
        }
        let err = parse_matrix("1 x\n").unwrap_err();
        match err {
            Error::Parse(d) => assert_eq!((d.line, d.column), (1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vector_file() {
        assert_eq!(parse_vector("1\n2\n3\n").unwrap(), vec![int(1), int(2), int(3)]);
        assert_eq!(parse_vector("1 2 3").unwrap(), vec![int(1), int(2), int(3)]);
        assert_eq!(parse_inline_vector("3,1").unwrap(), vec![int(3), int(1)]);
        assert!(parse_vector("# nothing\n").is_err());
    }
}
