//! Flat records serialized as `key=value` blocks and CSV rows.

use crate::model::format_f64;

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Field {
    pub fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) if v.is_nan() => "NaN".into(),
            Field::Float(v) => format_f64(*v),
            Field::Bool(v) => v.to_string(),
            // keep CSV rows single-line and unquoted
            Field::Text(s) => s.replace([',', '\n', '\r'], " "),
        }
    }
}

pub trait Record {
    fn fields(&self) -> Vec<(&'static str, Field)>;

    fn to_key_value(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(k, v)| format!("{k}={}\n", v.render()))
            .collect()
    }

    fn csv_header(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(k, _)| k)
            .collect::<Vec<_>>()
            .join(",")
    }

    fn to_csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(_, v)| v.render())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Header line plus one line per record, LF-terminated.
pub fn to_csv<R: Record>(records: &[R]) -> String {
    let mut out = String::new();
    if let Some(first) = records.first() {
        out.push_str(&first.csv_header());
        out.push('\n');
    }
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Demo;
    impl Record for Demo {
        fn fields(&self) -> Vec<(&'static str, Field)> {
            vec![
                ("a", Field::Int(3)),
                ("b", Field::Float(0.1)),
                ("c", Field::Bool(true)),
                ("d", Field::Text("x,y".into())),
                ("e", Field::Float(f64::NAN)),
            ]
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(Demo.csv_header(), "a,b,c,d,e");
        assert_eq!(Demo.to_csv_row(), "3,1.0000000000000001e-1,true,x y,NaN");
        assert!(Demo.to_key_value().starts_with("a=3\nb=1.0000000000000001e-1\n"));
        assert_eq!(to_csv(&[Demo, Demo]).lines().count(), 3);
    }
}
