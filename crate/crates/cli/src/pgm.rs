//! 8-bit binary PGM rendering of one scan column; θ runs down, ρ across.

use wll::waveclass::ScanRecord;

fn column_value(r: &ScanRecord, column: &str) -> Option<f64> {
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    Some(match column {
        "a0" | "a1" | "a2" | "a3" | "a4" | "a5" => r.coeffs[column[1..].parse::<usize>().ok()?],
        "lambda0" => r.lambda0,
        "div_left" => b(r.flags.diverges_left),
        "div_right" => b(r.flags.diverges_right),
        "marginal" => b(r.flags.marginal),
        "moment_order" => r.moment_order as f64,
        "cohen" => r.cohen.cycle_length().unwrap_or(0) as f64,
        "embed0_3" => b(r.embedding.embed0_3),
        "embed1_4" => b(r.embedding.embed1_4),
        "embed2_5" => b(r.embedding.embed2_5),
        _ => return None,
    })
}

/// Linear map of the column's range onto 0..=255 (constant fields render black).
pub fn render(records: &[ScanRecord], cols: usize, column: &str) -> Result<Vec<u8>, String> {
    let values: Vec<f64> = records
        .iter()
        .map(|r| column_value(r, column).ok_or_else(|| format!("unknown scan column {column:?}")))
        .collect::<Result<_, _>>()?;
    let rows = values.len().checked_div(cols).unwrap_or(0);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}
