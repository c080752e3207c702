//! Number formatting shared by the text reports.

/// Six significant digits; `e` notation for magnitudes below 1e-3.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round first so that e.g. 0.99999996 is laid out as 1.00000.
    let r: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if r.abs() < 1e-3 {
        return format!("{r:.5e}");
    }
    let exp = r.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{r:.decimals$}")
}

/// Nine significant digits in `e` notation, used by the dataset files.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}
