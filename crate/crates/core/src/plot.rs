//! Standalone SVG line charts.

use std::fmt::Write as _;

use thiserror::Error;

use crate::io::{TraceIoError, TraceTable};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("selection {0:?} matched no data")]
    EmptySelection(String),
    #[error("unknown selection {0:?}; expected outputs, gains, errors or E")]
    UnknownSelection(String),
    #[error(transparent)]
    Trace(#[from] TraceIoError),
}

/// Which trace families to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Outputs,
    Gains,
    Errors,
    ErrorSum,
}

impl std::str::FromStr for Selection {
    type Err = PlotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "outputs" => Ok(Self::Outputs),
            "gains" => Ok(Self::Gains),
            "errors" => Ok(Self::Errors),
            "E" | "e" => Ok(Self::ErrorSum),
            other => Err(PlotError::UnknownSelection(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal dashed reference lines.
    pub guides: Vec<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return Some((lo - pad, hi + pad));
    }
    let pad = 0.05 * (hi - lo);
    Some((lo - pad, hi + pad))
}

/// Roughly five round tick values spanning `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

impl Chart {
    pub fn to_svg(&self) -> Result<String, PlotError> {
        if self.series.iter().all(|s| s.x.is_empty()) {
            return Err(PlotError::EmptySelection(self.title.clone()));
        }
        let (x0, x1) = range(self.series.iter().flat_map(|s| s.x.iter().copied()))
            .ok_or_else(|| PlotError::EmptySelection(self.title.clone()))?;
        let (y0, y1) = range(self.series.iter().flat_map(|s| s.y.iter().copied()).chain(self.guides.iter().copied()))
            .ok_or_else(|| PlotError::EmptySelection(self.title.clone()))?;
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#333"/>"##,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                MARGIN_TOP + ph + 18.0,
                fmt_tick(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="#333"/>"##,
                MARGIN_LEFT - 5.0
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#eee"/>"##,
                MARGIN_LEFT + pw
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for g in &self.guides {
            let y = sy(*g);
            let _ = writeln!(
                svg,
                r##"<line class="guide" x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
                MARGIN_LEFT + pw
            );
        }
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for (&x, &y) in s.x.iter().zip(&s.y) {
                if !(x.is_finite() && y.is_finite()) {
                    pen_down = false;
                    continue;
                }
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
                pen_down = true;
            }
            let _ = writeln!(
                svg,
                r#"<path class="series" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.trim_end()
            );
            let ly = MARGIN_TOP + 16.0 + 18.0 * k as f64;
            let lx = MARGIN_LEFT + pw + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ =
                writeln!(svg, r#"<text class="legend" x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Builds the charts for one selection of a trace table.
///
/// `outputs` and `errors` give one chart, `gains` gives one chart per gain family,
/// `E` gives the error-sum curve. `omega` adds `±omega` guides to the errors chart.
pub fn trace_charts(table: &TraceTable, selection: Selection, omega: Option<f64>) -> Result<Vec<Chart>, PlotError> {
    let t = table.times()?;
    let per_agent = |family: &str| -> Vec<Series> {
        table.family(family).into_iter().map(|(label, y)| Series { label, x: t.clone(), y }).collect()
    };
    let charts = match selection {
        Selection::Outputs => vec![Chart {
            title: "Outputs".into(),
            x_label: "t (s)".into(),
            y_label: "y".into(),
            series: per_agent("y"),
            guides: vec![],
        }],
        Selection::Gains => ["L", "F1", "F2"]
            .iter()
            .map(|fam| Chart {
                title: format!("Gain {fam}"),
                x_label: "t (s)".into(),
                y_label: (*fam).into(),
                series: per_agent(fam),
                guides: vec![],
            })
            .collect(),
        Selection::Errors => {
            let ys = table.family("y");
            let series = ys
                .iter()
                .skip(1)
                .map(|(label, y)| Series {
                    label: format!("y_1 - {label}"),
                    x: t.clone(),
                    y: ys[0].1.iter().zip(y).map(|(a, b)| a - b).collect(),
                })
                .collect();
            vec![Chart {
                title: "Consensus errors".into(),
                x_label: "t (s)".into(),
                y_label: "y_1 - y_j".into(),
                series,
                guides: omega.map(|w| vec![-w, w]).unwrap_or_default(),
            }]
        }
        Selection::ErrorSum => vec![Chart {
            title: "Sum of squared output differences".into(),
            x_label: "t (s)".into(),
            y_label: "E".into(),
            series: table.column("E").map(|y| vec![Series { label: "E".into(), x: t.clone(), y }]).unwrap_or_default(),
            guides: vec![],
        }],
    };
    if charts.iter().all(|c| c.series.is_empty()) {
        return Err(PlotError::EmptySelection(format!("{selection:?}")));
    }
    Ok(charts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> TraceTable {
        let columns = ["t", "y_1", "y_2", "y_3", "y_4", "L_1", "L_2", "F1_1", "F1_2", "F2_1", "F2_2", "E"];
        let rows = (0..20)
            .map(|k| {
                let t = k as f64 * 0.1;
                let mut r = vec![t];
                r.extend((0..columns.len() - 1).map(|c| (t * (c as f64 + 1.0)).sin()));
                r
            })
            .collect();
        TraceTable { columns: columns.iter().map(|s| s.to_string()).collect(), rows }
    }

    #[test]
    fn outputs_chart_has_one_path_per_agent() {
        let charts = trace_charts(&table(), Selection::Outputs, None).unwrap();
        let svg = charts[0].to_svg().unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"class="series""#).count(), 4);
        for i in 1..=4 {
            assert!(svg.contains(&format!(">y_{i}</text>")));
        }
    }

    #[test]
    fn gains_split_per_family() {
        let charts = trace_charts(&table(), Selection::Gains, None).unwrap();
        assert_eq!(charts.len(), 3);
        assert!(charts.iter().all(|c| c.series.len() == 2));
    }

    #[test]
    fn error_chart_draws_omega_guides() {
        let charts = trace_charts(&table(), Selection::Errors, Some(0.25)).unwrap();
        let svg = charts[0].to_svg().unwrap();
        assert_eq!(svg.matches(r#"class="guide""#).count(), 2);
        assert_eq!(charts[0].series.len(), 3);
    }

    #[test]
    fn empty_selection_is_an_error() {
        let t = TraceTable { columns: vec!["t".into(), "E".into()], rows: vec![vec![0.0, 1.0]] };
        assert!(matches!(trace_charts(&t, Selection::Outputs, None), Err(PlotError::EmptySelection(_))));
        assert!(matches!(Chart::default().to_svg(), Err(PlotError::EmptySelection(_))));
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("E".parse::<Selection>().unwrap(), Selection::ErrorSum);
        assert!("bogus".parse::<Selection>().is_err());
    }

    #[test]
    fn ticks_are_round() {
        let t = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert!(t.iter().enumerate().all(|(k, v)| (v - 0.2 * k as f64).abs() < 1e-12));
    }
}
