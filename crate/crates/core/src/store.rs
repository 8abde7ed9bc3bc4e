//! The `SICFID 1` solution format, catalogue directories and run summaries.
//!
//! ```text
//! SICFID 1
//! d 2
//! symmetry none
//! digits 17
//! frame_error 1.2325951644078310e-32
//! +0.88807383397711525
//! +0.00000000000000000
//! ...
//! created_by sic-core 0.1.0 seed 7     (optional)
//! stabilizer_order 6                    (optional)
//! ```
//!
//! Amplitudes are kept as decimal strings end to end, so files written at
//! high precision round-trip without passing through `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::overlaps::FiducialVector;

pub const MAGIC: &str = "SICFID 1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("line {line}: expected {expected}, found `{found}`")]
    MalformedHeader { line: usize, expected: &'static str, found: String },
    #[error("dimension {dim} needs {expected} amplitude lines, found {found}")]
    AmplitudeCount { dim: usize, expected: usize, found: usize },
    #[error("line {line}: invalid decimal `{text}`")]
    InvalidDecimal { line: usize, text: String },
    #[error("line {line}: unrecognized trailing field `{text}`")]
    UnknownField { line: usize, text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SicSolution {
    pub dim: usize,
    /// `none` or `zauner:<m>`.
    pub symmetry: String,
    pub digits: usize,
    pub frame_error: String,
    /// `re a_0, im a_0, re a_1, …` as signed fixed-point decimals.
    pub amplitudes: Vec<String>,
    pub created_by: Option<Provenance>,
    pub stabilizer_order: Option<u64>,
}

/// `x` to exactly `digits` fractional digits with an explicit sign; `-0` becomes `+0`.
pub fn format_fixed(x: f64, digits: usize) -> String {
    let s = format!("{x:+.digits$}");
    normalize_sign(s)
}

fn normalize_sign(s: String) -> String {
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        format!("+{}", &s[1..])
    } else {
        s
    }
}

pub fn format_frame_error(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_fixed(text: &str, digits: usize) -> bool {
    let Some(rest) = text.strip_prefix('+').or_else(|| text.strip_prefix('-')) else { return false };
    let Some((int, frac)) = rest.split_once('.') else { return digits == 0 && is_digits(rest) };
    is_digits(int) && frac.len() == digits && (digits == 0 || is_digits(frac))
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// `[+-]digits[.digits][e[+-]digits]`
fn is_decimal(text: &str) -> bool {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e)),
        None => (body, None),
    };
    let mantissa_ok = match mantissa.split_once('.') {
        Some((i, f)) => is_digits(i) && is_digits(f),
        None => is_digits(mantissa),
    };
    let exponent_ok = exponent.is_none_or(|e| is_digits(e.strip_prefix(['+', '-']).unwrap_or(e)));
    mantissa_ok && exponent_ok
}

impl SicSolution {
    /// Double-precision vector at `digits` fractional digits.
    pub fn from_vector(v: &FiducialVector, symmetry: &str, digits: usize, frame_error: f64) -> Self {
        Self {
            dim: v.dim(),
            symmetry: symmetry.to_string(),
            digits,
            frame_error: format_frame_error(frame_error),
            amplitudes: v.to_interleaved().iter().map(|&x| format_fixed(x, digits)).collect(),
            created_by: None,
            stabilizer_order: None,
        }
    }

    pub fn with_provenance(mut self, version: &str, seed: u64) -> Self {
        self.created_by = Some(Provenance { tool: "sic-core".into(), version: version.into(), seed });
        self
    }

    pub fn with_stabilizer_order(mut self, order: u64) -> Self {
        self.stabilizer_order = Some(order);
        self
    }

    /// Amplitudes rounded to `f64` (and renormalized).
    pub fn to_vector(&self) -> Result<FiducialVector> {
        let x: Vec<f64> = self.amplitudes.iter().map(|s| s.parse::<f64>().expect("validated decimal")).collect();
        FiducialVector::new(x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }

    pub fn frame_error_value(&self) -> f64 {
        self.frame_error.parse().unwrap_or(f64::NAN)
    }

    /// Serialized bytes; identical input gives identical output.
    pub fn to_sicfid(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "d {}", self.dim);
        let _ = writeln!(out, "symmetry {}", self.symmetry);
        let _ = writeln!(out, "digits {}", self.digits);
        let _ = writeln!(out, "frame_error {}", self.frame_error);
        for a in &self.amplitudes {
            let _ = writeln!(out, "{a}");
        }
        if let Some(p) = &self.created_by {
            let _ = writeln!(out, "created_by {} {} seed {}", p.tool, p.version, p.seed);
        }
        if let Some(n) = self.stabilizer_order {
            let _ = writeln!(out, "stabilizer_order {n}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let Some(body) = text.strip_suffix('\n') else { return Err(FormatError::UnexpectedEof) };
        let lines: Vec<&str> = body.split('\n').collect();
        let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, *l));
        let mut header = |key: &'static str| -> Result<(usize, String), FormatError> {
            let (n, line) = it.next().ok_or(FormatError::UnexpectedEof)?;
            match line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
                Some(v) if !v.is_empty() => Ok((n, v.to_string())),
                _ => Err(FormatError::MalformedHeader { line: n, expected: key, found: line.to_string() }),
            }
        };
        let (n, version) = header("SICFID")?;
        if version != "1" {
            return Err(FormatError::MalformedHeader { line: n, expected: MAGIC, found: format!("SICFID {version}") });
        }
        let parse_count = |(n, v): (usize, String), key: &'static str| {
            v.parse::<usize>().map_err(|_| FormatError::MalformedHeader {
                line: n,
                expected: key,
                found: format!("{key} {v}"),
            })
        };
        let dim = parse_count(header("d")?, "d")?;
        let (_, symmetry) = header("symmetry")?;
        let digits = parse_count(header("digits")?, "digits")?;
        let (n, frame_error) = header("frame_error")?;
        if !is_decimal(&frame_error) {
            return Err(FormatError::InvalidDecimal { line: n, text: frame_error });
        }

        let mut amplitudes = Vec::with_capacity(2 * dim);
        let mut created_by = None;
        let mut stabilizer_order = None;
        let rest: Vec<(usize, &str)> = lines.iter().enumerate().skip(5).map(|(i, l)| (i + 1, *l)).collect();
        let mut idx = 0;
        while idx < rest.len() && !rest[idx].1.starts_with(|c: char| c.is_ascii_alphabetic()) {
            let (n, line) = rest[idx];
            if !is_fixed(line, digits) {
                return Err(FormatError::InvalidDecimal { line: n, text: line.to_string() });
            }
            amplitudes.push(line.to_string());
            idx += 1;
        }
        for &(n, line) in &rest[idx..] {
            let unknown = || FormatError::UnknownField { line: n, text: line.to_string() };
            let words: Vec<&str> = line.split(' ').collect();
            match words.as_slice() {
                ["created_by", tool, version, "seed", seed] => {
                    let seed = seed.parse().map_err(|_| unknown())?;
                    created_by = Some(Provenance { tool: tool.to_string(), version: version.to_string(), seed });
                }
                ["stabilizer_order", k] => stabilizer_order = Some(k.parse().map_err(|_| unknown())?),
                _ => return Err(unknown()),
            }
        }
        if amplitudes.len() != 2 * dim {
            return Err(FormatError::AmplitudeCount { dim, expected: 2 * dim, found: amplitudes.len() });
        }
        Ok(Self { dim, symmetry, digits, frame_error, amplitudes, created_by, stabilizer_order })
    }
}

/// Writes `s` to `path` via a temporary sibling and rename; returns the byte count.
pub fn write_solution(s: &SicSolution, path: &Path) -> Result<usize> {
    let bytes = s.to_sicfid();
    write_atomic(path, bytes.as_bytes())?;
    Ok(bytes.len())
}

pub fn read_solution(path: &Path) -> Result<SicSolution> {
    let text = fs::read_to_string(path)?;
    Ok(SicSolution::parse(&text)?)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub class_id: String,
    pub symmetry: String,
    pub file: String,
    pub frame_error: String,
    pub stabilizer_order: Option<u64>,
    pub members: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dim: usize,
    pub classes: Vec<ManifestEntry>,
}

/// One class representative per entry: `(class id, representative, member count)`.
pub type CatalogueEntry = (String, SicSolution, usize);

/// Writes `root/d<dim>/<symmetry>/<class-id>.sicfid` per class and
/// `root/d<dim>/manifest`; `:` in symmetry labels becomes `-`.
pub fn write_catalogue(root: &Path, dim: usize, classes: &[CatalogueEntry]) -> Result<Manifest> {
    let dir = root.join(format!("d{dim}"));
    let mut entries = Vec::with_capacity(classes.len());
    for (id, sol, members) in classes {
        let sym_dir = sol.symmetry.replace(':', "-");
        let rel = format!("{sym_dir}/{id}.sicfid");
        write_solution(sol, &dir.join(&rel))?;
        entries.push(ManifestEntry {
            class_id: id.clone(),
            symmetry: sol.symmetry.clone(),
            file: rel,
            frame_error: sol.frame_error.clone(),
            stabilizer_order: sol.stabilizer_order,
            members: *members,
        });
    }
    let manifest = Manifest { dim, classes: entries };
    write_atomic(&dir.join("manifest"), run_summary(&manifest)?.as_bytes())?;
    Ok(manifest)
}

pub fn read_manifest(root: &Path, dim: usize) -> Result<Manifest> {
    let text = fs::read_to_string(root.join(format!("d{dim}")).join("manifest"))?;
    toml::from_str(&text).map_err(|e| crate::Error::InvalidConfig(format!("manifest: {e}")))
}

/// Structured-text (TOML) rendering of a report.
pub fn run_summary<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| crate::Error::InvalidConfig(format!("summary: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiducials;
    use crate::verify::verify_sic;
    use proptest::prelude::*;

    fn qubit_solution(digits: usize) -> SicSolution {
        SicSolution::from_vector(&fiducials::qubit(), "none", digits, 1.5e-33).with_provenance("0.1.0", 7)
    }

    #[test]
    fn header_layout() {
        let text = qubit_solution(15).to_sicfid();
        assert!(text.starts_with("SICFID 1\nd 2\nsymmetry none\ndigits 15\nframe_error 1.5000000000000001e-33\n"));
        assert!(text.ends_with("created_by sic-core 0.1.0 seed 7\n"));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5 + 4 + 1);
        assert_eq!(lines[6], "+0.000000000000000");
        assert!(lines[5..9].iter().all(|l| l.len() == "+0.".len() + 15));
    }

    #[test]
    fn fixed_point_formatting() {
        assert_eq!(format_fixed(-0.0, 3), "+0.000");
        assert_eq!(format_fixed(-1e-9, 3), "+0.000");
        assert_eq!(format_fixed(0.5, 2), "+0.50");
        assert_eq!(format_fixed(-2.25, 1), "-2.2");
        assert!(is_fixed("+0.125", 3) && !is_fixed("0.125", 3) && !is_fixed("+0.12", 3) && !is_fixed("+0.1x5", 3));
        assert!(is_decimal("1.25e-30") && is_decimal("-3") && !is_decimal("1e") && !is_decimal("abc"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = qubit_solution(17).with_stabilizer_order(12);
        let text = s.to_sicfid();
        let parsed = SicSolution::parse(&text).unwrap();
        assert_eq!(parsed, s);
        assert_eq!(parsed.to_sicfid(), text);
    }

    #[test]
    fn high_precision_digits_survive() {
        let amp = |sign: &str| {
            format!("{sign}0.{}", "7071067811865475244008443621048490392848359376884740".get(..50).unwrap())
        };
        let s = SicSolution {
            dim: 2,
            symmetry: "zauner:0".into(),
            digits: 50,
            frame_error: "1.0e-101".into(),
            amplitudes: vec![amp("+"), amp("+"), amp("-"), format!("+0.{}", "0".repeat(50))],
            created_by: None,
            stabilizer_order: None,
        };
        let parsed = SicSolution::parse(&s.to_sicfid()).unwrap();
        assert_eq!(parsed.amplitudes[0].len(), 53);
        assert_eq!(parsed, s);
    }

    #[test]
    fn error_kinds_are_distinct() {
        let text = qubit_solution(10).to_sicfid();
        assert_eq!(SicSolution::parse(&text[..text.len() - 3]), Err(FormatError::UnexpectedEof));
        assert_eq!(SicSolution::parse("SICFID 1\nd 2\n"), Err(FormatError::UnexpectedEof));
        assert_eq!(SicSolution::parse(""), Err(FormatError::UnexpectedEof));

        let wrong_dim = text.replace("d 2\n", "d 3\n");
        assert_eq!(SicSolution::parse(&wrong_dim), Err(FormatError::AmplitudeCount { dim: 3, expected: 6, found: 4 }));

        let bad_digit = text.replacen("+0.0000000000", "+0.00000x0000", 1);
        assert!(matches!(SicSolution::parse(&bad_digit), Err(FormatError::InvalidDecimal { line: 7, .. })));

        let bad_magic = text.replace("SICFID 1", "SICFID 2");
        assert!(matches!(SicSolution::parse(&bad_magic), Err(FormatError::MalformedHeader { line: 1, .. })));
        let bad_header = text.replace("digits 10", "precision 10");
        assert!(matches!(SicSolution::parse(&bad_header), Err(FormatError::MalformedHeader { line: 4, .. })));
        let bad_trailer = format!("{text}colour blue\n");
        assert!(matches!(SicSolution::parse(&bad_trailer), Err(FormatError::UnknownField { .. })));
    }

    #[test]
    fn stored_frame_error_matches_reverification() {
        let h = fiducials::hesse();
        let fe = verify_sic(&h, 1e-12).frame_error;
        let s = SicSolution::from_vector(&h, "none", 17, fe);
        let back = SicSolution::parse(&s.to_sicfid()).unwrap();
        let again = verify_sic(&back.to_vector().unwrap(), 1e-12).frame_error;
        assert!((again - back.frame_error_value()).abs() <= 2e-17);
    }

    #[test]
    fn files_and_catalogue() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.sicfid");
        let s = qubit_solution(17);
        let n = write_solution(&s, &path).unwrap();
        assert_eq!(n, s.to_sicfid().len());
        assert_eq!(read_solution(&path).unwrap(), s);

        let h = SicSolution::from_vector(&fiducials::hesse(), "zauner:1", 17, 0.0).with_stabilizer_order(48);
        let m = write_catalogue(dir.path(), 3, &[("c0".into(), h.clone(), 9)]).unwrap();
        assert_eq!(m.classes[0].file, "zauner-1/c0.sicfid");
        assert_eq!(read_solution(&dir.path().join("d3/zauner-1/c0.sicfid")).unwrap(), h);
        assert_eq!(read_manifest(dir.path(), 3).unwrap(), m);
    }

    proptest! {
        #[test]
        fn random_solutions_round_trip(
            amps in proptest::collection::vec(-1.0f64..1.0, 4..20),
            digits in 0usize..30,
            seed in any::<u64>(),
        ) {
            let amps = if amps.len() % 2 == 1 { &amps[1..] } else { &amps[..] };
            prop_assume!(amps.iter().any(|&x| x != 0.0));
            let v = FiducialVector::from_interleaved(amps).unwrap();
            let s = SicSolution::from_vector(&v, "none", digits, 1e-20).with_provenance("0.1.0", seed);
            let text = s.to_sicfid();
            let back = SicSolution::parse(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(back.to_sicfid(), text);
        }
    }
}
