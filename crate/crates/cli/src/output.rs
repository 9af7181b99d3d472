//! Deterministic serialization helpers.

/// Fixed 17-significant-digit formatting: every finite f64 round-trips
/// bit-exactly, and identical values always print identically.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON string escaping for error messages.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
