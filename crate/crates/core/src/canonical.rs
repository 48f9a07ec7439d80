//! Canonical JSON: object keys sorted, no insignificant whitespace, byte
//! strings as lowercase hex (handled by the types themselves).

use serde::Serialize;

use crate::error::Result;

pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's Map is a BTreeMap unless `preserve_order` is enabled,
    // so converting through Value sorts every object's keys.
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&v)?)
}

pub fn to_canonical_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    to_canonical_string(value).map(String::into_bytes)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[derive(Serialize)]
    struct Unsorted {
        zeta: u8,
        alpha: Vec<u8>,
        mid: HashMap<&'static str, u8>,
    }

    #[test]
    fn keys_sorted_no_whitespace() {
        let v = Unsorted {
            zeta: 1,
            alpha: vec![1, 2],
            mid: [("b", 2), ("a", 1)].into_iter().collect(),
        };
        assert_eq!(
            to_canonical_string(&v).unwrap(),
            r#"{"alpha":[1,2],"mid":{"a":1,"b":2},"zeta":1}"#
        );
    }
}
