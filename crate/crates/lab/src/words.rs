//! Word syntax for the command line and config files.
//!
//! A word is a sequence of combinatorics letters, outermost first. Accepted:
//! canonical strings separated by whitespace or newlines, shorthand tokens
//! `M2`, `M3`, `M2^n` joined by `*` or whitespace, or `@path` naming a file
//! with one canonical string (or shorthand token) per line.

use renorm_core::Combinatorics;

use crate::error::{LabError, LabResult};

fn parse_error() -> LabError {
    LabError::Config(renorm_core::Error::Parse.to_string())
}

fn shorthand(token: &str) -> LabResult<Vec<Combinatorics>> {
    let (letter, power) = match token.split_once('^') {
        Some((l, p)) => (l, p.parse::<usize>().map_err(|_| parse_error())?),
        None => (token, 1),
    };
    if power == 0 || power > 64 {
        return Err(parse_error());
    }
    let c = match letter {
        "M2" => Combinatorics::doubling(),
        "M3" => Combinatorics::period_three(),
        _ => return Err(parse_error()),
    };
    Ok(vec![c; power])
}

pub fn parse_word(text: &str) -> LabResult<Vec<Combinatorics>> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let mut word = Vec::new();
        for line in body.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            word.extend(parse_word(line)?);
        }
        return if word.is_empty() { Err(parse_error()) } else { Ok(word) };
    }
    let mut word = Vec::new();
    for token in text.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
        if token.starts_with("v") && token.contains(';') {
            word.push(Combinatorics::parse(token).map_err(|_| parse_error())?);
        } else {
            word.extend(shorthand(token)?);
        }
    }
    if word.is_empty() {
        return Err(parse_error());
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_canonical_agree() {
        let a = parse_word("M2^3").unwrap();
        let canon = Combinatorics::doubling().canonical();
        let b = parse_word(&format!("{canon} {canon}\n{canon}")).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_word("M2*M3").unwrap().len(), 2);
    }

    #[test]
    fn malformed_words_are_config_errors() {
        for bad in ["", "M4", "M2^0", "v1;N=1;m=2", "M2^x"] {
            let e = parse_word(bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}");
            assert_eq!(e.to_string(), "parse: invalid canonical combinatorics");
        }
    }
}
