//! Text formats: the import file (header values followed by one matrix per
//! line) and the run output file.
//!
//! Matrices are written as nested braces, `{{0.1,0.3+0.5I},{0.3-0.5I,0.6}}`,
//! with the imaginary unit as an upper-case `I` at the end of an entry.

use std::fmt::Write as _;

use accinfo_core::linalg::{CMatrix, RNG_ALGORITHM};
use accinfo_core::{Complex64, Ensemble, OptimizerConfig, RunReport};

/// Error inside a single token or line, located by byte offset.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("byte {offset}: {reason}")]
pub struct SyntaxError {
    pub offset: usize,
    pub reason: String,
}

impl SyntaxError {
    fn new(offset: usize, reason: impl Into<String>) -> Self {
        Self {
            offset,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}, {source}")]
    Parse { line: usize, source: SyntaxError },
    #[error("expected {expected} statistical operators, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("line {line}: matrix has dimension {found}, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Contents of an import file.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportFile {
    pub dim: usize,
    pub num_ops: usize,
    pub k_init: usize,
    pub ops: Vec<CMatrix>,
}

impl ImportFile {
    pub fn ensemble(&self) -> Ensemble {
        Ensemble::from_ops(self.dim, self.ops.clone())
    }
}

fn is_number_char(b: u8) -> bool {
    b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-')
}

fn parse_real(text: &str, offset: usize) -> Result<f64, SyntaxError> {
    if text.is_empty() {
        return Err(SyntaxError::new(offset, "empty number"));
    }
    if let Some(pos) = text.bytes().position(|b| !is_number_char(b)) {
        return Err(SyntaxError::new(
            offset + pos,
            format!("unexpected character '{}'", &text[pos..pos + text[pos..].chars().next().map_or(1, char::len_utf8)]),
        ));
    }
    text.parse::<f64>()
        .map_err(|_| SyntaxError::new(offset, format!("malformed number '{text}'")))
}

/// Parses `RealPart+ImaginaryPartI`, a bare real, or a bare imaginary
/// (`0.5I`, `-I`, `I`). The unit must be an upper-case `I` in final position.
pub fn parse_complex(token: &str) -> Result<Complex64, SyntaxError> {
    if let Some(pos) = token.find('i') {
        return Err(SyntaxError::new(pos, "imaginary unit must be upper-case 'I'"));
    }
    let Some(body) = token.strip_suffix('I') else {
        if let Some(pos) = token.find('I') {
            return Err(SyntaxError::new(pos, "imaginary unit 'I' must end the entry"));
        }
        return Ok(Complex64::new(parse_real(token, 0)?, 0.0));
    };
    if let Some(pos) = body.find('I') {
        return Err(SyntaxError::new(pos, "imaginary unit 'I' must end the entry"));
    }
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_text, im_text, im_offset) = match split {
        Some(i) => (&body[..i], &body[i..], i),
        None => ("", body, 0),
    };
    let re = if re_text.is_empty() { 0.0 } else { parse_real(re_text, 0)? };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => parse_real(t, im_offset)?,
    };
    Ok(Complex64::new(re, im))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, want: u8) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(b) if b == want => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(SyntaxError::new(
                self.pos,
                format!("expected '{}', found '{}'", want as char, b as char),
            )),
            None => Err(SyntaxError::new(self.pos, format!("expected '{}', found end of line", want as char))),
        }
    }

    /// One entry up to the next `,` or `}`; interior whitespace is dropped.
    fn entry(&mut self) -> Result<Complex64, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b',' | b'}' | b'{') {
            self.pos += 1;
        }
        let compact: String = self.text[start..self.pos].chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(SyntaxError::new(start, "missing matrix entry"));
        }
        parse_complex(&compact).map_err(|e| SyntaxError::new(start + e.offset, e.reason))
    }
}

/// Parses one matrix line `{{a,b},{c,d}}`.
pub fn parse_matrix(line: &str) -> Result<CMatrix, SyntaxError> {
    let mut cur = Cursor {
        bytes: line.as_bytes(),
        text: line,
        pos: 0,
    };
    cur.expect(b'{')?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    loop {
        let row_start = cur.pos;
        cur.expect(b'{')?;
        let mut row = Vec::new();
        loop {
            row.push(cur.entry()?);
            match cur.peek() {
                Some(b',') => cur.pos += 1,
                Some(b'}') => {
                    cur.pos += 1;
                    break;
                }
                Some(b) => {
                    return Err(SyntaxError::new(cur.pos, format!("unexpected '{}' in row", b as char)))
                }
                None => return Err(SyntaxError::new(cur.pos, "unbalanced braces: row not closed")),
            }
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(SyntaxError::new(
                    row_start,
                    format!("ragged rows: row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
        match cur.peek() {
            Some(b',') => cur.pos += 1,
            Some(b'}') => {
                cur.pos += 1;
                break;
            }
            Some(b) => return Err(SyntaxError::new(cur.pos, format!("unexpected '{}' between rows", b as char))),
            None => return Err(SyntaxError::new(cur.pos, "unbalanced braces: matrix not closed")),
        }
    }
    if cur.peek().is_some() {
        return Err(SyntaxError::new(cur.pos, "trailing characters after matrix"));
    }
    if rows.len() != rows[0].len() {
        return Err(SyntaxError::new(
            0,
            format!("matrix is not square: {} rows of {} entries", rows.len(), rows[0].len()),
        ));
    }
    CMatrix::from_rows(&rows).map_err(|e| SyntaxError::new(0, e.to_string()))
}

fn parse_header_value(line: &str) -> Result<usize, SyntaxError> {
    let Some(eq) = line.find('=') else {
        return Err(SyntaxError::new(0, "expected '<name> = <integer>'"));
    };
    let raw = &line[eq + 1..];
    let value = raw.trim();
    let offset = eq + 1 + (raw.len() - raw.trim_start().len());
    match value.parse::<usize>() {
        Ok(0) => Err(SyntaxError::new(offset, "value must be at least 1")),
        Ok(v) => Ok(v),
        Err(_) => Err(SyntaxError::new(offset, format!("expected a positive integer, found '{value}'"))),
    }
}

fn split_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    lines
}

/// Reads the `N`, `J`, `K` header lines (only the values after `=` matter)
/// and then exactly `J` matrix lines. Trailing blank lines are ignored.
pub fn parse_import(text: &str) -> Result<ImportFile, FormatError> {
    let lines = split_lines(text);
    let mut header = [0usize; 3];
    for (i, slot) in header.iter_mut().enumerate() {
        let line = lines.get(i).copied().unwrap_or("");
        *slot = parse_header_value(line).map_err(|source| FormatError::Parse { line: i + 1, source })?;
    }
    let [dim, num_ops, k_init] = header;
    let body = &lines[3..];
    if body.len() != num_ops {
        return Err(FormatError::CountMismatch {
            expected: num_ops,
            found: body.len(),
        });
    }
    let mut ops = Vec::with_capacity(num_ops);
    for (i, line) in body.iter().enumerate() {
        let line_no = i + 4;
        let m = parse_matrix(line).map_err(|source| FormatError::Parse { line: line_no, source })?;
        if m.dim() != dim {
            return Err(FormatError::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: m.dim(),
            });
        }
        ops.push(m);
    }
    Ok(ImportFile {
        dim,
        num_ops,
        k_init,
        ops,
    })
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}I", format_real(z.re), format_real(z.im.abs()))
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::from("{");
    for (i, row) in m.rows().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('{');
        for (j, z) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_complex(*z));
        }
        out.push('}');
    }
    out.push('}');
    out
}

pub fn write_import(f: &ImportFile) -> String {
    let mut out = format!("N = {}\nJ = {}\nK = {}\n", f.dim, f.num_ops, f.k_init);
    for m in &f.ops {
        out.push_str(&format_matrix(m));
        out.push('\n');
    }
    out
}

/// Key of the seed header line; it names the generator so the seed alone
/// reproduces the run.
pub fn seed_key() -> String {
    format!("seed[{RNG_ALGORITHM}]")
}

/// Output file: six `name = value` header lines (J, K, N, steepest
/// probability, tolerance, seed), then blank-line separated blocks holding
/// the per-iteration mutual information, the statistical operators, the
/// final POVM outcomes, and the reduced POVM outcomes.
pub fn write_output(report: &RunReport, e: &Ensemble, cfg: &OptimizerConfig) -> String {
    let mut out = String::new();
    // writing into a String cannot fail
    let _ = writeln!(out, "J = {}", e.len());
    let _ = writeln!(out, "K = {}", report.k_init);
    let _ = writeln!(out, "N = {}", e.dim());
    let _ = writeln!(out, "steepest_prob = {:e}", cfg.steepest_prob);
    let _ = writeln!(out, "tolerance = {:e}", cfg.tolerance);
    let _ = writeln!(out, "{} = {}", seed_key(), cfg.seed);
    out.push('\n');
    for mi in &report.mi_trace {
        out.push_str(&format_real(*mi));
        out.push('\n');
    }
    let mut block = |mats: &[CMatrix]| {
        out.push('\n');
        for m in mats {
            out.push_str(&format_matrix(m));
            out.push('\n');
        }
    };
    block(e.ops());
    block(&report.final_povm.outcomes());
    block(&report.reduced_povm.outcomes());
    out
}

/// An output file read back.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub num_ops: usize,
    pub k_init: usize,
    pub dim: usize,
    pub steepest_prob: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub mi_trace: Vec<f64>,
    pub ops: Vec<CMatrix>,
    pub final_povm: Vec<CMatrix>,
    pub reduced_povm: Vec<CMatrix>,
}

/// Parses text produced by [`write_output`].
pub fn parse_output(text: &str) -> Result<OutputFile, FormatError> {
    let lines = split_lines(text);
    let value_text = |i: usize| -> Result<&str, FormatError> {
        let line = lines.get(i).copied().unwrap_or("");
        line.split_once('=').map(|(_, v)| v.trim()).ok_or(FormatError::Parse {
            line: i + 1,
            source: SyntaxError::new(0, "expected '<name> = <value>'"),
        })
    };
    let bad = |i: usize| FormatError::Parse {
        line: i + 1,
        source: SyntaxError::new(0, "malformed header value"),
    };
    let num_ops: usize = value_text(0)?.parse().map_err(|_| bad(0))?;
    let k_init: usize = value_text(1)?.parse().map_err(|_| bad(1))?;
    let dim: usize = value_text(2)?.parse().map_err(|_| bad(2))?;
    let steepest_prob: f64 = value_text(3)?.parse().map_err(|_| bad(3))?;
    let tolerance: f64 = value_text(4)?.parse().map_err(|_| bad(4))?;
    let seed: u64 = value_text(5)?.parse().map_err(|_| bad(5))?;

    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    let mut current: Option<Vec<(usize, &str)>> = None;
    for (i, line) in lines.iter().enumerate().skip(6) {
        if line.trim().is_empty() {
            if let Some(b) = current.take() {
                blocks.push(b);
            }
            current = Some(Vec::new());
        } else {
            current.get_or_insert_with(Vec::new).push((i + 1, *line));
        }
    }
    if let Some(b) = current.take() {
        blocks.push(b);
    }
    if blocks.len() != 4 {
        return Err(FormatError::CountMismatch {
            expected: 4,
            found: blocks.len(),
        });
    }
    let mi_trace = blocks[0]
        .iter()
        .map(|&(line, t)| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| FormatError::Parse { line, source: SyntaxError::new(0, "malformed number") })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let matrices = |block: &Vec<(usize, &str)>| {
        block
            .iter()
            .map(|&(line, t)| parse_matrix(t).map_err(|source| FormatError::Parse { line, source }))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(OutputFile {
        num_ops,
        k_init,
        dim,
        steepest_prob,
        tolerance,
        seed,
        mi_trace,
        ops: matrices(&blocks[1])?,
        final_povm: matrices(&blocks[2])?,
        reduced_povm: matrices(&blocks[3])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("-3.1-4.5I").unwrap(), c(-3.1, -4.5));
        assert_eq!(parse_complex("0.6").unwrap(), c(0.6, 0.0));
        assert_eq!(parse_complex("0.3+0.5I").unwrap(), c(0.3, 0.5));
        assert_eq!(parse_complex("0.5I").unwrap(), c(0.0, 0.5));
        assert_eq!(parse_complex("-I").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("I").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("+I").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("2-I").unwrap(), c(2.0, -1.0));
        assert_eq!(parse_complex("1e-3+2E+2I").unwrap(), c(1e-3, 200.0));
        assert_eq!(parse_complex("-1.5e-3").unwrap(), c(-1.5e-3, 0.0));
        assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn lower_case_unit_rejected() {
        let err = parse_complex("0.3+0.5i").unwrap_err();
        assert_eq!(err.offset, 7);
        assert!(err.reason.contains("upper-case"));
    }

    #[test]
    fn unit_must_be_last() {
        assert!(parse_complex("0.3+I0.5").unwrap_err().reason.contains("end the entry"));
        assert!(parse_complex("0.5II").is_err());
        assert!(parse_complex("I0.5").is_err());
    }

    #[test]
    fn junk_rejected() {
        for bad in ["", "abc", "1.2.3", "inf", "NaN", "--1", "1+", "0x10"] {
            assert!(parse_complex(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn import_example_matrix() {
        let m = parse_matrix("{{0.1,0.3+0.5I},{0.3-0.5I,0.6}}").unwrap();
        let expected = CMatrix::from_rows(&[vec![c(0.1, 0.0), c(0.3, 0.5)], vec![c(0.3, -0.5), c(0.6, 0.0)]])
            .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn whitespace_between_tokens() {
        let m = parse_matrix(" { {0.1 , 0.3 + 0.5 I} ,\t{0.3-0.5I, 0.6} } ").unwrap();
        assert_eq!(m.get(0, 1), c(0.3, 0.5));
    }

    #[test]
    fn scalar_matrix() {
        assert_eq!(parse_matrix("{{1}}").unwrap(), CMatrix::identity(1));
    }

    #[test]
    fn malformed_matrices() {
        assert!(parse_matrix("{{1,2},{3}}").unwrap_err().reason.contains("ragged"));
        assert!(parse_matrix("{{1,2}}").unwrap_err().reason.contains("not square"));
        assert!(parse_matrix("{{1,2},{3,4}").unwrap_err().reason.contains("unbalanced"));
        assert!(parse_matrix("{{1,2},{3,4}}}").is_err());
        assert!(parse_matrix("{{1,,2},{3,4}}").is_err());
        assert!(parse_matrix("{1,2}").is_err());
        assert!(parse_matrix("").is_err());
    }

    const VALID: &str = "N = 2\nJ = 2\nK = 2\n{{0.5,0},{0,0}}\n{{0,0},{0,0.5}}\n";

    #[test]
    fn import_file() {
        let f = parse_import(VALID).unwrap();
        assert_eq!((f.dim, f.num_ops, f.k_init), (2, 2, 2));
        assert_eq!(f.ops[1], CMatrix::from_real_diagonal(&[0.0, 0.5]));
        assert!(f.ensemble().validate().is_valid());
    }

    #[test]
    fn import_accepts_crlf_names_and_trailing_blanks() {
        let text = "dimension=2\r\nnumber of operators  =  2\r\nK= 4\r\n{{0.5,0},{0,0}}\r\n{{0,0},{0,0.5}}\r\n\r\n  \n";
        let f = parse_import(text).unwrap();
        assert_eq!((f.dim, f.num_ops, f.k_init), (2, 2, 4));
    }

    #[test]
    fn import_missing_k_line() {
        let err = parse_import("N = 2\nJ = 2\n{{0.5,0},{0,0}}\n{{0,0},{0,0.5}}\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn import_bad_header_values() {
        assert!(matches!(parse_import("N = 0\nJ = 1\nK = 1\n{{1}}\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_import("N = 1\nJ = x\nK = 1\n{{1}}\n"), Err(FormatError::Parse { line: 2, .. })));
    }

    #[test]
    fn import_dimension_mismatch() {
        let text = "N = 2\nJ = 1\nK = 2\n{{1,0,0},{0,0,0},{0,0,0}}\n";
        assert_eq!(
            parse_import(text).unwrap_err(),
            FormatError::DimensionMismatch { line: 4, expected: 2, found: 3 }
        );
    }

    #[test]
    fn import_count_mismatch() {
        assert_eq!(
            parse_import("N = 2\nJ = 3\nK = 2\n{{0.5,0},{0,0}}\n{{0,0},{0,0.5}}\n").unwrap_err(),
            FormatError::CountMismatch { expected: 3, found: 2 }
        );
        assert_eq!(
            parse_import("N = 1\nJ = 1\nK = 1\n{{1}}\n{{1}}\n").unwrap_err(),
            FormatError::CountMismatch { expected: 1, found: 2 }
        );
    }

    #[test]
    fn import_matrix_error_carries_line() {
        let err = parse_import("N = 2\nJ = 2\nK = 2\n{{0.5,0},{0,0}}\n{{0,0},{0,0.5i}}\n").unwrap_err();
        match err {
            FormatError::Parse { line: 5, source } => assert_eq!(source.offset, 13),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn formatting_is_lossless() {
        for x in [0.1, -0.0, 1.0, 1e-300, -2.5e17, std::f64::consts::PI, f64::MIN_POSITIVE] {
            let z = c(x, -x);
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back.re.to_bits(), z.re.to_bits());
            assert_eq!(back.im.to_bits(), z.im.to_bits());
        }
        assert_eq!(format_complex(c(0.1, 0.3)), "1.0000000000000001e-1+2.9999999999999999e-1I");
    }

    #[test]
    fn written_import_reparses() {
        let f = parse_import(VALID).unwrap();
        let text = write_import(&f);
        assert_eq!(parse_import(&text).unwrap(), f);
        assert_eq!(write_import(&parse_import(&text).unwrap()), text);
    }
}
