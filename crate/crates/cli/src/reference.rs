//! Published reference tables, embedded at build time.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    One,
    Two,
}

#[derive(Debug, Clone, Deserialize)]
struct RawRow {
    m: Option<f64>,
    a: Option<f64>,
    reference_value: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RawTable {
    variable: String,
    n: usize,
    alpha: f64,
    a: Option<f64>,
    m: Option<f64>,
    rows: Vec<RawRow>,
}

/// One reference row at `(n, alpha, a, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub n: usize,
    pub alpha: f64,
    pub a: f64,
    pub m: f64,
    /// The swept parameter (`m` for table 1, `a` for table 2).
    pub parameter: f64,
    pub reference_value: f64,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub variable: &'static str,
    pub rows: Vec<Row>,
}

const TABLE1: &str = include_str!("../data/table1.toml");
const TABLE2: &str = include_str!("../data/table2.toml");

pub fn table(which: Which) -> Table {
    let (src, variable) = match which {
        Which::One => (TABLE1, "m"),
        Which::Two => (TABLE2, "a"),
    };
    let raw: RawTable = toml::from_str(src).expect("embedded reference table parses");
    assert_eq!(raw.variable, variable, "embedded table sweeps the wrong variable");
    let rows = raw
        .rows
        .iter()
        .map(|r| {
            let a = r.a.or(raw.a).expect("start given per row or per table");
            let m = r.m.or(raw.m).expect("wall given per row or per table");
            Row {
                n: raw.n,
                alpha: raw.alpha,
                a,
                m,
                parameter: if variable == "m" { m } else { a },
                reference_value: r.reference_value,
            }
        })
        .collect();
    Table { variable, rows }
}

/// Known inconsistencies inside the reference data, as footer notes.
pub fn anomalies() -> Vec<String> {
    let t1 = table(Which::One);
    let t2 = table(Which::Two);
    let mut out = Vec::new();
    for w in t1.rows.windows(2) {
        if w[1].reference_value < w[0].reference_value {
            out.push(format!(
                "anomaly: reference value at M={} ({}) is below the one at M={} ({}), impossible for a CDF",
                w[1].m, w[1].reference_value, w[0].m, w[0].reference_value
            ));
        }
    }
    for r1 in &t1.rows {
        for r2 in &t2.rows {
            if r1.a == r2.a && r1.m == r2.m && r1.reference_value != r2.reference_value {
                out.push(format!(
                    "anomaly: table1 M={} and table2 a={} share parameters but list {} and {} (diff {:.1e})",
                    r1.m,
                    r2.a,
                    r1.reference_value,
                    r2.reference_value,
                    (r1.reference_value - r2.reference_value).abs()
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_twelve_rows() {
        let t1 = table(Which::One);
        let t2 = table(Which::Two);
        assert_eq!(t1.rows.len(), 12);
        assert_eq!(t2.rows.len(), 12);
        assert_eq!(t1.rows[0].m, 3.25);
        assert_eq!(t2.rows[11].a, 3.75);
        assert!(t1.rows.iter().all(|r| r.a == 1.0 && r.n == 10 && r.alpha == 1.0));
        assert!(t2.rows.iter().all(|r| r.m == 5.0));
    }

    #[test]
    fn both_known_anomalies_are_flagged() {
        let a = anomalies();
        assert_eq!(a.len(), 2, "{a:?}");
        assert!(a[0].contains("M=6"));
        assert!(a[1].contains("0.984423") && a[1].contains("0.984373"));
    }
}
