use std::io::Write;

use crate::error::Result;
use crate::split::IterationTrace;

pub const TRACE_COLUMNS: [&str; 6] = [
    "sweep",
    "subsystem",
    "frobenius_change_F",
    "full_ARE_residual",
    "min_eig_P_decrement",
    "stabilizing",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per solved subsystem update. Subsystems are 1-based; the first
/// row has an empty `min_eig_P_decrement`.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for rec in &trace.records {
        w.write_record([
            rec.sweep.to_string(),
            (rec.subsystem + 1).to_string(),
            num(rec.change),
            num(rec.full_residual),
            rec.min_eig_decrement.map(num).unwrap_or_default(),
            u8::from(rec.stabilizing).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_csv_string(trace: &IterationTrace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}
