//! Compression report: baseline vs refactored size, library storage share,
//! and the normalized compression rate per piece.

use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value as Json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Joint,
    Piecewise,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Joint => "joint",
            Mode::Piecewise => "piecewise",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub title: String,
    pub baseline: usize,
    pub refactored: usize,
    pub storage_share: Ratio<u64>,
}

/// `baseline / (refactored + storage)`.
pub fn compression_rate(baseline: usize, refactored: usize, storage: Ratio<u64>) -> Ratio<u64> {
    Ratio::from_integer(baseline as u64) / (Ratio::from_integer(refactored as u64) + storage)
}

fn float(r: Ratio<u64>) -> f64 {
    r.to_f64().expect("finite ratio")
}

impl ReportRow {
    pub fn cr(&self) -> Ratio<u64> {
        compression_rate(self.baseline, self.refactored, self.storage_share)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressionReport {
    pub mode: Mode,
    pub rows: Vec<ReportRow>,
    /// Library storage summed over every library in the run.
    pub total_storage: usize,
    pub unparsed: Vec<String>,
}

impl CompressionReport {
    pub fn total_baseline(&self) -> usize {
        self.rows.iter().map(|r| r.baseline).sum()
    }

    pub fn total_refactored(&self) -> usize {
        self.rows.iter().map(|r| r.refactored).sum()
    }

    pub fn total_cr(&self) -> Ratio<u64> {
        if self.rows.is_empty() {
            return Ratio::from_integer(1);
        }
        compression_rate(self.total_baseline(), self.total_refactored(), Ratio::from_integer(self.total_storage as u64))
    }

    pub fn objective(&self) -> usize {
        self.total_refactored() + self.total_storage
    }

    pub fn render_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.title.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>12}  {:>13}  {:>6}",
            "Piece", "w/o lib", "with lib", "storage/piece", "CR"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>12}  {:>13.2}  {:>6.2}",
                r.title,
                r.baseline,
                r.refactored,
                float(r.storage_share),
                float(r.cr())
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>12}  {:>13}  {:>6.2}",
            "Total",
            self.total_baseline(),
            self.total_refactored(),
            self.total_storage,
            float(self.total_cr())
        );
        for t in &self.unparsed {
            let _ = writeln!(out, "unparsed: {t}");
        }
        out
    }

    pub fn to_json(&self) -> Json {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "title": r.title,
                    "baseline": r.baseline,
                    "refactored": r.refactored,
                    "storage_share": format!("{}", r.storage_share),
                    "storage_share_decimal": format!("{:.2}", float(r.storage_share)),
                    "cr": format!("{:.2}", float(r.cr())),
                })
            })
            .collect();
        json!({
            "mode": self.mode,
            "rows": rows,
            "total": {
                "baseline": self.total_baseline(),
                "refactored": self.total_refactored(),
                "storage": self.total_storage,
                "cr": format!("{:.2}", float(self.total_cr())),
            },
            "unparsed": self.unparsed,
        })
    }
}

/// Published values for the three-piece corpus, per mode:
/// (title, baseline, refactored, storage share, CR) and totals.
pub struct Reference {
    pub rows: [(&'static str, usize, usize, f64, f64); 3],
    pub total: (usize, usize, usize, f64),
}

pub const REFERENCE_JOINT: Reference = Reference {
    rows: [
        ("Red Clay", 25, 8, 31.0 / 3.0, 1.36),
        ("Valse Hot", 29, 12, 31.0 / 3.0, 1.29),
        ("Sunny", 33, 7, 31.0 / 3.0, 1.90),
    ],
    total: (87, 27, 31, 1.5),
};

pub const REFERENCE_PIECEWISE: Reference = Reference {
    rows: [("Red Clay", 25, 9, 17.0, 0.96), ("Valse Hot", 29, 8, 14.0, 1.32), ("Sunny", 33, 11, 16.0, 1.22)],
    total: (87, 28, 47, 1.16),
};

/// Side-by-side comparison with the published three-piece values, or
/// `None` when the corpus is a different one.
pub fn reference_diff(report: &CompressionReport) -> Option<String> {
    let reference = match report.mode {
        Mode::Joint => &REFERENCE_JOINT,
        Mode::Piecewise => &REFERENCE_PIECEWISE,
    };
    let same = report.rows.len() == 3
        && report.rows.iter().zip(&reference.rows).all(|(r, x)| r.title.eq_ignore_ascii_case(x.0));
    if !same {
        return None;
    }
    let mut out = String::new();
    let _ = writeln!(out, "reference comparison ({}): ours vs published", report.mode);
    for (r, x) in report.rows.iter().zip(&reference.rows) {
        let _ = writeln!(
            out,
            "  {:<10} size {:>3} vs {:>3} ({:+})  storage {:>6.2} vs {:>6.2}  CR {:.2} vs {:.2} ({:+.2})",
            x.0,
            r.refactored,
            x.2,
            r.refactored as i64 - x.2 as i64,
            float(r.storage_share),
            x.3,
            float(r.cr()),
            x.4,
            float(r.cr()) - x.4
        );
    }
    let (b, s, st, cr) = reference.total;
    let _ = writeln!(
        out,
        "  {:<10} baseline {} vs {}  size {} vs {} ({:+})  storage {} vs {} ({:+})  CR {:.2} vs {:.2} ({:+.2})",
        "Total",
        report.total_baseline(),
        b,
        report.total_refactored(),
        s,
        report.total_refactored() as i64 - s as i64,
        report.total_storage,
        st,
        report.total_storage as i64 - st as i64,
        float(report.total_cr()),
        cr,
        float(report.total_cr()) - cr
    );
    Some(out)
}
