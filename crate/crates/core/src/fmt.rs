//! Fixed 17-significant-digit rendering shared by every report format, so CSV
//! and JSON payloads agree to the bit.

/// Scientific notation with 17 significant digits, e.g. `-6.9314718055994529e-1`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
