use std::io::Write;
use std::path::Path;

use super::{CliError, CliResult};
use crate::bits::BitString;

/// Reads newline-delimited bitstrings after a required `#bits=n` header.
/// Blank lines are skipped.
pub fn read_dataset(path: &Path) -> CliResult<(usize, Vec<BitString>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read dataset {}: {e}", path.display())))?;
    parse_dataset(&text).map_err(|e| CliError::data(format!("{}: {}", path.display(), e.message)))
}

pub(crate) fn parse_dataset(text: &str) -> CliResult<(usize, Vec<BitString>)> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l.trim())
        .ok_or_else(|| CliError::data("empty dataset, expected a #bits=n header"))?;
    let n: usize = header
        .strip_prefix("#bits=")
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::data(format!("line 1: expected #bits=n header, got {header:?}"))
        })?;
    let mut data = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bits: BitString = line
            .parse()
            .map_err(|_| CliError::data(format!("line {}: {line:?} is not a bitstring", i + 1)))?;
        if bits.len() != n {
            return Err(CliError::data(format!(
                "line {}: expected {n} bits, got {}",
                i + 1,
                bits.len()
            )));
        }
        data.push(bits);
    }
    if data.is_empty() {
        return Err(CliError::data("dataset has no samples"));
    }
    Ok((n, data))
}

pub fn write_dataset<W: Write>(n: usize, data: &[BitString], mut out: W) -> std::io::Result<()> {
    writeln!(out, "#bits={n}")?;
    for x in data {
        writeln!(out, "{x}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let data: Vec<BitString> = ["010", "111"].iter().map(|s| s.parse().unwrap()).collect();
        let mut buf = Vec::new();
        write_dataset(3, &data, &mut buf).unwrap();
        assert_eq!(
            parse_dataset(std::str::from_utf8(&buf).unwrap()).unwrap(),
            (3, data)
        );
    }

    #[test]
    fn header_and_lengths_are_checked() {
        for bad in [
            "",
            "010\n",
            "#bits=x\n010",
            "#bits=3\n01",
            "#bits=3\n012",
            "#bits=3\n",
        ] {
            assert_eq!(parse_dataset(bad).unwrap_err().exit_code(), 3, "{bad:?}");
        }
    }
}
