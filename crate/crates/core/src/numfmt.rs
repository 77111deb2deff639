/// Formats a real with at most six fractional digits, trailing zeros and a
/// dangling decimal point removed. Negative zero prints as `0`.
pub fn format_real(v: f64) -> String {
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_owned();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::format_real;

    #[test]
    fn trims() {
        assert_eq!(format_real(10.0), "10");
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(1.0 / 3.0), "0.333333");
        assert_eq!(format_real(-0.0000001), "0");
        assert_eq!(format_real(-2.25), "-2.25");
        assert_eq!(format_real(140.0), "140");
    }
}
