//! JSON helpers for diff-stable report output.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A real number serialized with exactly four decimal places.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed4(pub f64);

impl Serialize for Fixed4 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        // Avoid printing "-0.0000".
        let value = if self.0 == 0.0 { 0.0 } else { self.0 };
        let raw = RawValue::from_string(format!("{value:.4}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decimals() {
        assert_eq!(serde_json::to_string(&Fixed4(0.8)).unwrap(), "0.8000");
        assert_eq!(serde_json::to_string(&Fixed4(2.0 / 3.0)).unwrap(), "0.6667");
        assert_eq!(serde_json::to_string(&Fixed4(-0.0)).unwrap(), "0.0000");
        assert_eq!(serde_json::to_string(&Fixed4(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string_pretty(&vec![Fixed4(1.0)]).unwrap(), "[\n  1.0000\n]");
    }
}
