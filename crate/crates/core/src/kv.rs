//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys must be unique.

use indexmap::IndexMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: invalid value `{value}`")]
    BadValue { key: String, value: String },
}

pub fn parse_kv(text: &str) -> Result<IndexMap<String, String>, KvError> {
    let mut out = IndexMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or(KvError::Malformed { line })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(KvError::Malformed { line });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(KvError::Duplicate { line, key: k.to_string() });
        }
    }
    Ok(out)
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, KvError> {
    value.parse().map_err(|_| KvError::BadValue { key: key.to_string(), value: value.to_string() })
}

/// Parses a comma-separated list of values.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, KvError> {
    value
        .split(',')
        .map(|v| parse_value(key, v.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = parse_kv("# hi\n\n a = 1 \nb=two words\n").unwrap();
        assert_eq!(kv["a"], "1");
        assert_eq!(kv["b"], "two words");
    }

    #[test]
    fn errors() {
        assert_eq!(parse_kv("a 1"), Err(KvError::Malformed { line: 1 }));
        assert_eq!(parse_kv("=1"), Err(KvError::Malformed { line: 1 }));
        assert!(matches!(parse_kv("a=1\na=2"), Err(KvError::Duplicate { line: 2, .. })));
        assert!(parse_value::<f64>("k", "x").is_err());
        assert_eq!(parse_list::<u32>("k", "1, 2,3").unwrap(), vec![1, 2, 3]);
    }
}
