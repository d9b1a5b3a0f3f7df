//! Trace tables: CSV emission and reading back.

use std::io::{Read, Write};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::simulator::SimTrace;

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trace has no `t` column")]
    MissingTime,
    #[error("bad number {value:?} in column {column}")]
    BadNumber { column: String, value: String },
}

/// Column-oriented numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

const VERBOSE_FAMILIES: [&str; 8] = ["e", "z1", "z2", "v1", "Phi2", "ycheck", "x2check", "uapplied"];

impl TraceTable {
    /// Flattens a trace into the standard column layout.
    pub fn from_trace<T: Scalar>(trace: &SimTrace<T>, verbose: bool) -> Self {
        let n = trace.agents;
        let mut columns = vec!["t".to_string()];
        let mut families: Vec<&str> = vec!["y", "s", "x2", "u", "L", "F1", "F2"];
        if verbose {
            families.extend(VERBOSE_FAMILIES);
        }
        for fam in &families {
            columns.extend((1..=n).map(|i| format!("{fam}_{i}")));
        }
        columns.push("E".into());

        let rows = trace
            .snapshots
            .iter()
            .map(|snap| {
                let mut row = Vec::with_capacity(columns.len());
                row.push(snap.t.as_f64());
                for fam in &families {
                    for i in 0..n {
                        let sig = &snap.signals[i];
                        let v = match *fam {
                            "y" => snap.y(i),
                            "s" => snap.s(i),
                            "x2" => snap.x2(i),
                            "u" => sig.u,
                            "L" => snap.l(i),
                            "F1" => snap.f1(i),
                            "F2" => snap.f2(i),
                            "e" => sig.e,
                            "z1" => sig.z1,
                            "z2" => sig.z2,
                            "v1" => sig.v1,
                            "Phi2" => sig.phi2,
                            "ycheck" => sig.y_check,
                            "x2check" => sig.x2_check,
                            _ => sig.u_applied,
                        };
                        row.push(v.as_f64());
                    }
                }
                row.push(snap.e_sum.as_f64());
                row
            })
            .collect();
        Self { columns, rows }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn times(&self) -> Result<Vec<f64>, TraceIoError> {
        self.column("t").ok_or(TraceIoError::MissingTime)
    }

    /// Columns named `{family}_{i}` in agent order.
    pub fn family(&self, family: &str) -> Vec<(String, Vec<f64>)> {
        let prefix = format!("{family}_");
        self.columns
            .iter()
            .filter(|c| c.strip_prefix(&prefix).is_some_and(|rest| rest.parse::<usize>().is_ok()))
            .map(|c| (c.clone(), self.column(c).expect("listed column")))
            .collect()
    }

    /// Number of agents implied by the `y_i` columns.
    pub fn agent_count(&self) -> usize {
        self.family("y").len()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TraceIoError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceIoError> {
        let mut r = csv::Reader::from_reader(input);
        let columns: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .zip(&columns)
                .map(|(v, c)| {
                    v.trim().parse::<f64>().map_err(|_| TraceIoError::BadNumber { column: c.clone(), value: v.into() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
