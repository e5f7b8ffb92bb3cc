//! Delimited (one header line, comma separated) and structured (JSON) output.
//!
//! Floats are written with 17 significant digits so every value read back is
//! bit-identical to the one computed. Vector-valued fields are joined with `;`.

use std::io::Write;

use serde::Serialize;

use crate::bpharness::{BpReport, ConcavityReport, RatioRecord, SlicingRow};
use crate::intersect::IntersectionVerdict;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn fmt_opt(s: &Option<String>) -> String {
    // notes are free text; keep the row parseable
    s.as_deref().unwrap_or("").replace(',', ";")
}

fn json_tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// A record with a fixed delimited layout.
pub trait Delimited {
    fn header() -> &'static str;
    fn row(&self) -> String;
}

pub fn write_delimited<T: Delimited>(items: &[T], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", T::header())?;
    for item in items {
        writeln!(out, "{}", item.row())?;
    }
    Ok(())
}

pub fn write_structured<T: Serialize + ?Sized>(value: &T, mut out: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

impl Delimited for IntersectionVerdict {
    fn header() -> &'static str {
        "verdict,min_value,min_direction,error_bar,max_value,eps_abs,method,note"
    }

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            json_tag(&self.verdict),
            fmt_f64(self.min_value),
            fmt_vec(&self.min_direction),
            fmt_f64(self.error_bar),
            fmt_f64(self.max_value),
            fmt_f64(self.eps_abs),
            json_tag(&self.method),
            fmt_opt(&self.note)
        )
    }
}

impl Delimited for BpReport {
    fn header() -> &'static str {
        "body_k,body_l,n,i,samples,dominance_fraction,failures,worst_margin,vol_k,vol_l,certificate,verdict,note"
    }

    fn row(&self) -> String {
        let cert = self
            .k_certificate
            .as_ref()
            .map(|c| json_tag(&c.verdict))
            .unwrap_or_else(|| "none".into());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.body_k.replace(',', ";"),
            self.body_l.replace(',', ";"),
            self.n,
            self.dominance.i,
            self.dominance.samples,
            fmt_f64(self.dominance.dominance_fraction),
            self.dominance.failures,
            fmt_f64(self.dominance.worst.relative_margin),
            fmt_f64(self.vol_k),
            fmt_f64(self.vol_l),
            cert,
            json_tag(&self.verdict),
            fmt_opt(&self.note)
        )
    }
}

impl Delimited for RatioRecord {
    fn header() -> &'static str {
        "body_id,n,ratio,max_direction,max_section,volume"
    }

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.body_id.replace(',', ";"),
            self.n,
            fmt_f64(self.ratio),
            fmt_vec(&self.max_direction),
            fmt_f64(self.max_section),
            fmt_f64(self.volume)
        )
    }
}

impl Delimited for SlicingRow {
    fn header() -> &'static str {
        "body_id,n,ratio,max_direction,max_section,volume,ball_ratio"
    }

    fn row(&self) -> String {
        format!("{},{}", self.record.row(), fmt_f64(self.ball_ratio))
    }
}

impl Delimited for ConcavityReport {
    fn header() -> &'static str {
        "body_id,direction,points,worst_violation,worst_z,concave"
    }

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.body_id.replace(',', ";"),
            fmt_vec(&self.direction),
            self.points,
            fmt_f64(self.worst_violation),
            fmt_f64(self.worst_z),
            self.concave
        )
    }
}
