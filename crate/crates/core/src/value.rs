//! Cell values.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::NaiveDate;

/// A single table cell.
///
/// Integers and decimals compare and hash by numeric value, so `Integer(3)`
/// and `Number(3.0)` are the same value.
#[derive(Clone, Debug)]
pub enum Value {
    Text(String),
    Number(f64),
    Integer(i64),
    Date(NaiveDate),
    Interval { lo: f64, hi: f64 },
    Null,
}

impl Value {
    /// Numeric view used by aggregation and arithmetic. Intervals use their midpoint.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            Value::Interval { lo, hi } => Some((lo + hi) / 2.0),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Number(_) | Value::Integer(_))
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Integer(_) | Value::Number(_) => 1,
            Value::Interval { .. } => 2,
            Value::Date(_) => 3,
            Value::Text(_) => 4,
        }
    }

    /// Ordering used by filters. `None` when the kinds are not comparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Null, _) | (_, Value::Null) => None,
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Text(b)) => parse_date(b).map(|b| a.cmp(&b)),
            (Value::Text(a), Value::Date(b)) => parse_date(a).map(|a| a.cmp(b)),
            (Value::Interval { .. }, Value::Interval { .. }) => Some(self.cmp(other)),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) if self.is_numeric() && other.is_numeric() => {
                    Some(a.total_cmp(&b))
                }
                _ => None,
            },
        }
    }

    /// JSON rendering for inlined chart data.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Text(s) => serde_json::Value::String(s.clone()),
            Value::Integer(i) => serde_json::Value::from(*i),
            Value::Number(x) => serde_json::Number::from_f64(round6(*x))
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::Date(d) => serde_json::Value::String(d.format("%Y-%m-%d").to_string()),
            Value::Interval { lo, hi } => serde_json::Value::String(interval_label(*lo, *hi)),
            Value::Null => serde_json::Value::Null,
        }
    }
}

pub(crate) fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn fmt_num(x: f64) -> String {
    let r = round6(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

/// Label of a bin, `lo-hi`.
pub fn interval_label(lo: f64, hi: f64) -> String {
    format!("{}-{}", fmt_num(lo), fmt_num(hi))
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    const FORMATS: [&str; 3] = ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s.trim(), f).ok())
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Interval { lo: a, hi: b }, Value::Interval { lo: c, hi: d }) => {
                a.total_cmp(c).then(b.total_cmp(d))
            }
            (Value::Null, Value::Null) => Ordering::Equal,
            _ if self.rank() == 1 && other.rank() == 1 => match (self, other) {
                (Value::Integer(a), Value::Integer(b)) => a.cmp(b),
                _ => self.as_f64().unwrap().total_cmp(&other.as_f64().unwrap()),
            },
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Text(s) => s.hash(state),
            Value::Date(d) => d.hash(state),
            Value::Integer(i) => (*i as f64).to_bits().hash(state),
            Value::Number(x) => {
                let x = if *x == 0.0 { 0.0 } else { *x };
                x.to_bits().hash(state)
            }
            Value::Interval { lo, hi } => {
                lo.to_bits().hash(state);
                hi.to_bits().hash(state);
            }
            Value::Null => {}
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Number(x) => {
                let r = round6(*x);
                if r == 0.0 {
                    f.write_str("0.0")
                } else if r.fract() == 0.0 {
                    write!(f, "{r:.1}")
                } else {
                    f.write_str(&fmt_num(r))
                }
            }
            Value::Integer(i) => write!(f, "{i}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::Interval { lo, hi } => f.write_str(&interval_label(*lo, *hi)),
            Value::Null => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn integers_and_numbers_unify() {
        assert_eq!(Value::Integer(3), Value::Number(3.0));
        let set: HashSet<Value> = [Value::Integer(3), Value::Number(3.0)]
            .into_iter()
            .collect();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn incomparable_kinds() {
        assert!(Value::Text("a".into())
            .compare(&Value::Integer(1))
            .is_none());
        assert!(Value::Null.compare(&Value::Null).is_none());
        let d = Value::Date(NaiveDate::from_ymd_opt(2001, 1, 1).unwrap());
        assert_eq!(
            d.compare(&Value::Text("2000-12-31".into())),
            Some(Ordering::Greater)
        );
    }

    #[test]
    fn decimals_keep_their_point() {
        assert_eq!(Value::Number(28.0).to_string(), "28.0");
        assert_eq!(Value::Number(-0.0).to_string(), "0.0");
        assert_eq!(Value::Number(2.0 / 3.0).to_string(), "0.666667");
    }

    #[test]
    fn interval_labels() {
        assert_eq!(interval_label(0.0, 2.5), "0-2.5");
        assert_eq!(Value::Interval { lo: 1.0, hi: 3.0 }.as_f64(), Some(2.0));
    }
}
