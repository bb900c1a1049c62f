use super::MAX_SYMBOL;

/// Round half away from zero, saturated to `[−MAX_SYMBOL, MAX_SYMBOL]`.
#[inline]
pub fn round_symbol(v: f64) -> i32 {
    let r = v.round();
    if r.is_nan() {
        return 0;
    }
    r.clamp(-(MAX_SYMBOL as f64), MAX_SYMBOL as f64) as i32
}

/// Mean-removed quantization: returns `(⌈y − μ⌋, ⌈y − μ⌋ + μ)`.
#[inline]
pub fn quantize_mixed(y: f32, mu: f32) -> (i32, f32) {
    let s = round_symbol(y as f64 - mu as f64);
    (s, dequantize(s, mu))
}

#[inline]
pub fn dequantize(symbol: i32, mu: f32) -> f32 {
    symbol as f32 + mu
}
