use std::io::{BufRead, Write};

use kornforge_core::diffops::CKField;
use kornforge_core::fespace::{DofKind, FieldVector};
use kornforge_core::forms::QuadraticForm;

use super::Lines;
use crate::error::AppResult;

/// `fieldvec 1`, `<kind> <n>`, then one coefficient per line in dof order.
pub fn write_field(field: &FieldVector, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "fieldvec 1")?;
    writeln!(w, "{} {}", field.kind.as_str(), field.coeffs.len())?;
    for c in &field.coeffs {
        writeln!(w, "{c:?}")?;
    }
    Ok(())
}

pub fn read_field(reader: impl BufRead, name: &str) -> AppResult<FieldVector> {
    let mut lines = Lines::new(reader, name);
    let header = lines.expect_line("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["fieldvec", "1"] {
        return Err(lines.error(format!("expected header 'fieldvec 1', found '{header}'")));
    }
    let l = lines.expect_line("kind and length")?;
    let toks: Vec<&str> = l.split_whitespace().collect();
    let (kind, n) = match toks.as_slice() {
        [k, n] => (
            DofKind::parse(k).ok_or_else(|| lines.error(format!("unknown field kind '{k}'")))?,
            n.parse::<usize>().map_err(|_| lines.error(format!("invalid length '{n}'")))?,
        ),
        _ => return Err(lines.error("expected '<kind> <length>'")),
    };
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        let [c] = lines.fields::<f64, 1>("coefficient")?;
        coeffs.push(c);
    }
    lines.finish()?;
    Ok(FieldVector { kind, coeffs })
}

/// One CK field per line: `ck a1 a2 a3 b1 b2 b3 rho q1 q2 q3`.
pub fn write_ck(fields: &[CKField], w: &mut impl Write) -> std::io::Result<()> {
    for f in fields {
        writeln!(w, "{f}")?;
    }
    Ok(())
}

pub fn read_ck(reader: impl BufRead, name: &str) -> AppResult<Vec<CKField>> {
    let mut lines = Lines::new(reader, name);
    let mut out = Vec::new();
    while let Some(l) = lines.next_line()? {
        out.push(l.parse::<CKField>().map_err(|e| lines.error(format!("invalid CK line: {e:?}")))?);
    }
    Ok(out)
}

/// Upper triangle of a symmetric matrix in coordinate form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    pub n: usize,
    /// `(i, j, value)` with `i ≤ j`, 0-based.
    pub entries: Vec<(usize, usize, f64)>,
}

/// `symmat <n> <nnz>` followed by `i j value` lines (0-based, i ≤ j).
pub fn write_symmat(form: &QuadraticForm, w: &mut impl Write) -> std::io::Result<()> {
    let entries = form.upper_triplets();
    writeln!(w, "symmat {} {}", form.ndof, entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{i} {j} {v:?}")?;
    }
    Ok(())
}

pub fn read_symmat(reader: impl BufRead, name: &str) -> AppResult<SymMat> {
    let mut lines = Lines::new(reader, name);
    let header = lines.expect_line("header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (n, nnz) = match toks.as_slice() {
        ["symmat", n, nnz] => match (n.parse::<usize>(), nnz.parse::<usize>()) {
            (Ok(n), Ok(nnz)) => (n, nnz),
            _ => return Err(lines.error("invalid symmat dimensions")),
        },
        _ => return Err(lines.error(format!("expected 'symmat <n> <nnz>', found '{header}'"))),
    };
    let mut entries = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let l = lines.expect_line("entry")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let parsed = match toks.as_slice() {
            [i, j, v] => i.parse::<usize>().ok().zip(j.parse::<usize>().ok()).zip(v.parse::<f64>().ok()),
            _ => None,
        };
        let ((i, j), v) = parsed.ok_or_else(|| lines.error(format!("malformed entry '{l}'")))?;
        if i > j || j >= n {
            return Err(lines.error(format!("entry ({i}, {j}) outside the upper triangle of a {n}×{n} matrix")));
        }
        entries.push((i, j, v));
    }
    lines.finish()?;
    Ok(SymMat { n, entries })
}
