//! Flat parameter files: one `name = re[,im]` per line, `#` comments, and
//! the integer dimension keys `n`, `m`, `k`. Chosen over nested formats so
//! regression fixtures diff line by line.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use ellint_core::sampling::NamedParams;

#[derive(Debug, Default, Clone)]
pub struct ParamsFile {
    pub values: NamedParams,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
}

pub fn parse_params_file(path: &Path) -> Result<ParamsFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = ParamsFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, value)) = line.split_once('=') else {
            bail!("{}:{lineno}: expected 'name = value', got '{raw}'", path.display());
        };
        let name = name.trim();
        let value = value.trim();
        if name.is_empty() {
            bail!("{}:{lineno}: missing name before '='", path.display());
        }
        match name {
            "n" | "m" | "k" => {
                let v: usize = value.parse().with_context(|| {
                    format!("{}:{lineno}: dimension {name} must be an integer, got '{value}'",
                        path.display())
                })?;
                match name {
                    "n" => out.n = Some(v),
                    "m" => out.m = Some(v),
                    _ => out.k = Some(v),
                }
            }
            _ => {
                let parsed = parse_complex(value).with_context(|| {
                    format!("{}:{lineno}: field {name}: expected 're' or 're,im', got '{value}'",
                        path.display())
                })?;
                if out.values.insert(name.to_string(), parsed).is_some() {
                    bail!("{}:{lineno}: duplicate field {name}", path.display());
                }
            }
        }
    }
    Ok(out)
}

fn parse_complex(s: &str) -> Result<Complex64> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(re.trim().parse()?, im.trim().parse()?)),
        None => Ok(Complex64::new(s.trim().parse()?, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse_str(content: &str) -> Result<ParamsFile> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        parse_params_file(f.path())
    }

    #[test]
    fn parses_dimensions_comments_and_complex_values() {
        let pf = parse_str("# header\nn = 2\nm = 0\nq = 0.1,-0.2\nt = 0.5\n").unwrap();
        assert_eq!(pf.n, Some(2));
        assert_eq!(pf.m, Some(0));
        assert_eq!(pf.values["q"], Complex64::new(0.1, -0.2));
        assert_eq!(pf.values["t"], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn reports_line_numbers_on_malformed_input() {
        let err = parse_str("n = 1\nbogus line\n").unwrap_err();
        assert!(format!("{err:#}").contains(":2:"), "diagnostic was: {err:#}");
        let err = parse_str("q = nope\n").unwrap_err();
        assert!(format!("{err:#}").contains("field q"), "diagnostic was: {err:#}");
        let err = parse_str("t = 1\nt = 2\n").unwrap_err();
        assert!(format!("{err:#}").contains("duplicate"), "diagnostic was: {err:#}");
    }
}
