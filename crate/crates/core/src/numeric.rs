//! Software emulation of the reduced-precision formats used by the
//! contribution test: IEEE binary16 and OCP FP8-E4M3 (saturating).
//!
//! Values are carried as `f64` that always lie on the target format's grid;
//! [`quantize`] rounds to nearest, ties to even, with gradual underflow and
//! saturation to the largest finite value.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    /// binary16: 1 sign, 5 exponent, 10 mantissa bits.
    Fp16,
    /// E4M3: 1 sign, 4 exponent, 3 mantissa bits, bias 7, no infinities.
    Fp8,
}

impl Format {
    pub const fn mantissa_bits(self) -> i32 {
        match self {
            Format::Fp16 => 10,
            Format::Fp8 => 3,
        }
    }

    /// Exponent of the smallest normal number.
    pub const fn min_exponent(self) -> i32 {
        match self {
            Format::Fp16 => -14,
            Format::Fp8 => -6,
        }
    }

    pub const fn max_finite(self) -> f64 {
        match self {
            Format::Fp16 => 65504.0,
            Format::Fp8 => 448.0,
        }
    }

    /// Smallest positive subnormal.
    pub fn min_positive(self) -> f64 {
        2f64.powi(self.min_exponent() - self.mantissa_bits())
    }
}

/// Binary exponent of a finite non-zero `f64`, i.e. `floor(log2(|x|))`.
fn exponent_of(x: f64) -> i32 {
    let bits = x.abs().to_bits();
    let biased = (bits >> 52) as i32;
    if biased == 0 {
        // f64 subnormal; far below any target grid.
        -1075
    } else {
        biased - 1023
    }
}

/// Rounds `x` onto the value grid of `format`.
pub fn quantize(x: f64, format: Format) -> f64 {
    if x == 0.0 || x.is_nan() {
        return x;
    }
    let max = format.max_finite();
    if x.is_infinite() {
        return max.copysign(x);
    }
    let exp = exponent_of(x).max(format.min_exponent());
    let ulp = 2f64.powi(exp - format.mantissa_bits());
    let q = (x / ulp).round_ties_even() * ulp;
    if q.abs() > max {
        max.copysign(x)
    } else {
        q
    }
}

/// Arithmetic that rounds every result to one format (or not at all).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arith {
    Exact,
    Rounded(Format),
}

impl Arith {
    #[inline]
    pub fn q(self, x: f64) -> f64 {
        match self {
            Arith::Exact => x,
            Arith::Rounded(f) => quantize(x, f),
        }
    }

    #[inline]
    pub fn mul(self, a: f64, b: f64) -> f64 {
        self.q(a * b)
    }

    #[inline]
    pub fn add(self, a: f64, b: f64) -> f64 {
        self.q(a + b)
    }

    #[inline]
    pub fn sub(self, a: f64, b: f64) -> f64 {
        self.q(a - b)
    }
}
