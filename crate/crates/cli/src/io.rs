//! Distribution and map files.
//!
//! A distribution is either JSON, `{"x_labels": [...], "y_labels": [...],
//! "p": [[...], ...]}` with optional labels, or a headerless CSV matrix
//! (blank lines and `#` comments ignored). Entries must sum to 1 within
//! [`SUM_TOLERANCE`] unless the caller asks for normalization.

use std::fs;
use std::io::Write;
use std::path::Path;

use infosep_core::dist::{DeterministicMap, JointDistribution, SUM_TOLERANCE};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_labels: Option<Vec<String>>,
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsFile {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

/// A parsed input plus the hex SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub joint: JointDistribution,
    pub sha256: String,
    pub labeled: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(format!("CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CliError::Parse(format!("CSV row {}: not a number: {f:?}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Parses JSON (first non-blank byte `{`) or CSV.
pub fn parse_distribution(bytes: &[u8], normalize: bool) -> Result<(JointDistribution, bool), CliError> {
    let is_json = bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
    let file = if is_json {
        serde_json::from_slice::<DistributionFile>(bytes)
            .map_err(|e| CliError::Parse(format!("JSON: {e}")))?
    } else {
        DistributionFile { x_labels: None, y_labels: None, p: parse_csv(bytes)? }
    };
    if file.p.is_empty() {
        return Err(CliError::Parse("empty probability matrix".into()));
    }
    if !normalize {
        let total: f64 = file.p.iter().flatten().sum();
        if total.is_nan() || (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(CliError::Parse(format!(
                "entries sum to {total}, not 1; pass --normalize to accept unnormalized weights"
            )));
        }
    }
    let labeled = file.x_labels.is_some() || file.y_labels.is_some();
    let joint = if labeled {
        let nx = file.p.len();
        let ny = file.p[0].len();
        let xl = file.x_labels.unwrap_or_else(|| default_labels(nx));
        let yl = file.y_labels.unwrap_or_else(|| default_labels(ny));
        JointDistribution::validate_and_trim_labeled(&file.p, xl, yl)
    } else {
        JointDistribution::validate_and_trim(&file.p)
    }
    .map_err(|e| CliError::Parse(format!("invalid distribution: {e}")))?;
    Ok((joint, labeled))
}

pub fn load_distribution(path: &Path, normalize: bool) -> Result<LoadedInput, CliError> {
    let bytes = read(path)?;
    let (joint, labeled) = parse_distribution(&bytes, normalize)?;
    Ok(LoadedInput { joint, sha256: sha256_hex(&bytes), labeled })
}

pub fn to_distribution_file(j: &JointDistribution, labeled: bool) -> DistributionFile {
    let labels = |l: Option<&[String]>, n: usize| {
        labeled.then(|| l.map(<[String]>::to_vec).unwrap_or_else(|| default_labels(n)))
    };
    DistributionFile {
        x_labels: labels(j.x_labels(), j.nx()),
        y_labels: labels(j.y_labels(), j.ny()),
        p: j.to_rows(),
    }
}

pub fn load_maps(path: &Path) -> Result<(DeterministicMap, DeterministicMap), CliError> {
    let bytes = read(path)?;
    let file: MapsFile =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Parse(format!("maps JSON: {e}")))?;
    let s = DeterministicMap::from_assignment(file.s)
        .map_err(|e| CliError::Parse(format!("map s: {e}")))?;
    let t = DeterministicMap::from_assignment(file.t)
        .map_err(|e| CliError::Parse(format!("map t: {e}")))?;
    Ok((s, t))
}

/// Writes to `path`, or to stdout when `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let (a, _) = parse_distribution(b"0.45, 0.05\n# comment\n\n0.05,0.45\n", false).unwrap();
        let (b, labeled) = parse_distribution(br#"{"p": [[0.45, 0.05], [0.05, 0.45]]}"#, false).unwrap();
        assert_eq!(a, b);
        assert!(!labeled);
    }

    #[test]
    fn counts_need_normalize_flag() {
        assert!(matches!(parse_distribution(b"9,1\n1,9\n", false), Err(CliError::Parse(_))));
        let (j, _) = parse_distribution(b"9,1\n1,9\n", true).unwrap();
        assert!((j.get(0, 0) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn labels_follow_trimming() {
        let src = br#"{"x_labels": ["a", "b", "c"], "p": [[0.5, 0.0], [0.0, 0.0], [0.25, 0.25]]}"#;
        let (j, labeled) = parse_distribution(src, false).unwrap();
        assert!(labeled);
        assert_eq!(j.x_labels().unwrap(), &["a".to_string(), "c".to_string()]);
        assert_eq!(j.y_labels().unwrap(), &["0".to_string(), "1".to_string()]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_distribution(b"{\"p\": [[0.5, 0.5]", false).is_err());
        assert!(parse_distribution(b"a,b\n", false).is_err());
        assert!(parse_distribution(b"{\"q\": []}", false).is_err());
        assert!(parse_distribution(b"0.5,-0.5\n0.5,0.5\n", false).is_err());
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
