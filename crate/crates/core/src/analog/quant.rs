//! Number formats used between and inside nodes.

use half::f16;

/// Largest magnitude of a signed 10-bit activation.
pub const INT10_MAX: i32 = 511;

/// Round through IEEE half precision, ties to even.
pub fn f16_round(x: f32) -> f32 {
    f16::from_f32(x).to_f32()
}

/// Quantize to a signed 10-bit code with step `step`.
pub fn to_int10(x: f32, step: f32) -> i16 {
    if step <= 0.0 {
        return 0;
    }
    (x / step)
        .round()
        .clamp(-(INT10_MAX as f32), INT10_MAX as f32) as i16
}

/// Drop the two low bits of a 10-bit code for the crossbar's 8-bit inputs.
pub fn int10_to_int8(q: i16) -> i8 {
    (f32::from(q) / 4.0).round().clamp(-128.0, 127.0) as i8
}

/// Snap `x` onto the signed 10-bit grid.
pub fn fake_int10(x: f32, step: f32) -> f32 {
    f32::from(to_int10(x, step)) * step
}

/// Step size that maps `max_abs` onto the full 10-bit range.
pub fn int10_step(max_abs: f32) -> f32 {
    if max_abs > 0.0 {
        max_abs / INT10_MAX as f32
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int10_saturates_and_rounds() {
        assert_eq!(to_int10(0.26, 0.5), 1);
        assert_eq!(to_int10(1e9, 0.5), 511);
        assert_eq!(to_int10(-1e9, 0.5), -511);
        assert_eq!(int10_to_int8(511), 127);
        assert_eq!(int10_to_int8(-511), -128);
        assert_eq!(int10_to_int8(6), 2);
    }

    #[test]
    fn half_rounding() {
        assert_eq!(f16_round(1.0), 1.0);
        // 2049 is halfway between representable 2048 and 2050
        assert_eq!(f16_round(2049.0), 2048.0);
        assert_eq!(f16_round(2051.0), 2052.0);
    }
}
