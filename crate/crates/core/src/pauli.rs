//! Spin-1/2 operator algebra in the Pauli basis.
//!
//! A 2×2 operator is stored as `c0·𝟙 + cx·σx + cy·σy + cz·σz`. Linear maps on
//! such operators that preserve Hermiticity are 4×4 real matrices acting on
//! `(c0, cx, cy, cz)` (Pauli transfer matrices).
//!
//! The two half-superoperations used throughout are
//!
//! * `A⁺ B = {A, B}/2` (anti-commutator half), which survives for classical `A`;
//! * `A⁻ B = −i[A, B]/2` (commutator half), which vanishes for classical `A`.
//!
//! Correlation strings such as `C^{+−−+}` are nested applications of these,
//! evaluated innermost (earliest time) first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SimParams;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Hermitian 2×2 operator with real Pauli coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliOperator {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl PauliOperator {
    pub const fn new(c0: f64, cx: f64, cy: f64, cz: f64) -> Self {
        Self { c0, cx, cy, cz }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn sigma_x() -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0)
    }

    pub const fn sigma_y() -> Self {
        Self::new(0.0, 0.0, 1.0, 0.0)
    }

    pub const fn sigma_z() -> Self {
        Self::new(0.0, 0.0, 0.0, 1.0)
    }

    /// Spin operators `I_k = σ_k / 2`.
    pub const fn spin_x() -> Self {
        Self::new(0.0, 0.5, 0.0, 0.0)
    }

    pub const fn spin_y() -> Self {
        Self::new(0.0, 0.0, 0.5, 0.0)
    }

    pub const fn spin_z() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.5)
    }

    /// Maximally mixed state `𝟙/2`.
    pub const fn maximally_mixed() -> Self {
        Self::new(0.5, 0.0, 0.0, 0.0)
    }

    /// Density operator `(𝟙 + r·σ)/2` for Bloch vector `r`.
    pub fn from_bloch(r: [f64; 3]) -> Self {
        Self::new(0.5, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2])
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.c0, self.cx, self.cy, self.cz)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.c0
    }

    /// Bloch vector of the normalized state `self / Tr self`.
    pub fn bloch(&self) -> [f64; 3] {
        let s = 1.0 / self.c0;
        [self.cx * s, self.cy * s, self.cz * s]
    }

    /// `|r|` for a density operator (`c0 = 1/2`); scales with the trace otherwise.
    pub fn bloch_radius(&self) -> f64 {
        2.0 * (self.cx * self.cx + self.cy * self.cy + self.cz * self.cz).sqrt()
    }

    pub fn to_complex(self) -> ComplexPauli {
        ComplexPauli::new(
            self.c0.into(),
            self.cx.into(),
            self.cy.into(),
            self.cz.into(),
        )
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        self.to_complex().matrix()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.as_vector() - other.as_vector()).amax()
    }
}

impl Add for PauliOperator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c0 + o.c0, self.cx + o.cx, self.cy + o.cy, self.cz + o.cz)
    }
}

impl Sub for PauliOperator {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c0 - o.c0, self.cx - o.cx, self.cy - o.cy, self.cz - o.cz)
    }
}

impl Neg for PauliOperator {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for PauliOperator {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.c0 * s, self.cx * s, self.cy * s, self.cz * s)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:+.6}·1 {:+.6}·σx {:+.6}·σy {:+.6}·σz",
            self.c0, self.cx, self.cy, self.cz
        )
    }
}

/// Operator with complex Pauli coefficients; closes products of Hermitian operators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexPauli {
    pub c: [Complex64; 4],
}

impl ComplexPauli {
    pub const fn new(c0: Complex64, cx: Complex64, cy: Complex64, cz: Complex64) -> Self {
        Self {
            c: [c0, cx, cy, cz],
        }
    }

    pub fn scale(self, s: Complex64) -> Self {
        Self {
            c: self.c.map(|x| x * s),
        }
    }

    /// Operator product `self · other`:
    /// `(a0 + a·σ)(b0 + b·σ) = a0 b0 + a·b + (a0 b + b0 a + i a×b)·σ`.
    pub fn mul(&self, other: &Self) -> Self {
        let [a0, ax, ay, az] = self.c;
        let [b0, bx, by, bz] = other.c;
        Self::new(
            a0 * b0 + ax * bx + ay * by + az * bz,
            a0 * bx + b0 * ax + I * (ay * bz - az * by),
            a0 * by + b0 * ay + I * (az * bx - ax * bz),
            a0 * bz + b0 * az + I * (ax * by - ay * bx),
        )
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other) - other.mul(self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other) + other.mul(self)
    }

    pub fn trace(&self) -> Complex64 {
        self.c[0] * 2.0
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.c.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> PauliOperator {
        PauliOperator::new(self.c[0].re, self.c[1].re, self.c[2].re, self.c[3].re)
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let [c0, cx, cy, cz] = self.c;
        Matrix2::new(c0 + cz, cx - I * cy, cx + I * cy, c0 - cz)
    }

    /// Decompose a 2×2 matrix: `c_k = Tr(σ_k X)/2`.
    pub fn from_matrix(m: &Matrix2<Complex64>) -> Self {
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        Self::new(
            (m00 + m11) * 0.5,
            (m01 + m10) * 0.5,
            (m01 - m10) * 0.5 * I,
            (m00 - m11) * 0.5,
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for ComplexPauli {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        Self { c }
    }
}

impl Sub for ComplexPauli {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x -= y;
        }
        Self { c }
    }
}

/// Product of two Hermitian operators as a complex Pauli operator.
pub fn pauli_mul(a: &PauliOperator, b: &PauliOperator) -> ComplexPauli {
    a.to_complex().mul(&b.to_complex())
}

/// Hermiticity-preserving linear map on 2×2 operators (Pauli transfer matrix).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperOperator(pub Matrix4<f64>);

impl SuperOperator {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix4::zeros())
    }

    /// Tabulate an operator map on the Pauli basis. Imaginary parts of the
    /// images are dropped; callers pass Hermiticity-preserving maps.
    pub fn from_map(f: impl Fn(&Matrix2<Complex64>) -> Matrix2<Complex64>) -> Self {
        let basis = [
            PauliOperator::identity(),
            PauliOperator::sigma_x(),
            PauliOperator::sigma_y(),
            PauliOperator::sigma_z(),
        ];
        let mut m = Matrix4::zeros();
        for (col, b) in basis.iter().enumerate() {
            let image = ComplexPauli::from_matrix(&f(&b.matrix()));
            for row in 0..4 {
                m[(row, col)] = image.c[row].re;
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        Self(self.0 * inner.0)
    }

    pub fn apply(&self, op: &PauliOperator) -> PauliOperator {
        PauliOperator::from_vector(&(self.0 * op.as_vector()))
    }

    /// `Tr[T ρ] = 2 (Tρ).c0`.
    pub fn trace_of_apply(&self, op: &PauliOperator) -> f64 {
        2.0 * self.0.row(0).dot(&op.as_vector().transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0 - other.0)
    }

    pub fn pow(&self, mut n: usize) -> Self {
        let mut base = self.0;
        let mut acc = Matrix4::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        Self(acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).amax()
    }
}

/// `A⁺ : B ↦ {A, B}/2`.
pub fn anti_half(a: &PauliOperator) -> SuperOperator {
    let (a0, ax, ay, az) = (a.c0, a.cx, a.cy, a.cz);
    SuperOperator(Matrix4::new(
        a0, ax, ay, az, //
        ax, a0, 0.0, 0.0, //
        ay, 0.0, a0, 0.0, //
        az, 0.0, 0.0, a0,
    ))
}

/// `A⁻ : B ↦ −i[A, B]/2`, i.e. `b·σ ↦ (a × b)·σ` for `A = a0 + a·σ`.
pub fn comm_half(a: &PauliOperator) -> SuperOperator {
    let (ax, ay, az) = (a.cx, a.cy, a.cz);
    SuperOperator(Matrix4::new(
        0.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, -az, ay, //
        0.0, az, 0.0, -ax, //
        0.0, -ay, ax, 0.0,
    ))
}

/// Target spin `I_x(t) = e^{iω₀I_z t} I_x e^{−iω₀I_z t} = cos(ω₀t) I_x − sin(ω₀t) I_y`.
pub fn heisenberg_ix(t: f64, omega0: f64) -> PauliOperator {
    let (s, c) = (omega0 * t).sin_cos();
    PauliOperator::new(0.0, 0.5 * c, -0.5 * s, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Ordered signs with their times, latest first (`C^{s1 s2 …}(t1, t2, …)`, `t1 > t2 > …`).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrSignString {
    entries: Vec<(Sign, f64)>,
}

impl CorrSignString {
    pub fn new(entries: Vec<(Sign, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySignString);
        }
        for (position, pair) in entries.windows(2).enumerate() {
            if pair[0].1 <= pair[1].1 {
                return Err(Error::NonDescendingTimes {
                    position: position + 1,
                });
            }
        }
        Ok(Self { entries })
    }

    /// Parse a sign pattern like `"+--+"` against latest-first times.
    pub fn parse(pattern: &str, times: &[f64]) -> Result<Self> {
        let signs: Vec<Sign> = pattern
            .chars()
            .filter_map(|ch| match ch {
                '+' => Some(Sign::Plus),
                '-' | '−' => Some(Sign::Minus),
                _ => None,
            })
            .collect();
        if signs.len() != times.len() {
            return Err(crate::error::invalid(
                "pattern",
                format!("{} signs for {} times", signs.len(), times.len()),
            ));
        }
        Self::new(signs.into_iter().zip(times.iter().copied()).collect())
    }

    pub fn entries(&self) -> &[(Sign, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_quantum(&self) -> bool {
        self.entries.iter().any(|(s, _)| *s == Sign::Minus)
    }
}

/// `Tr[B^{s1}(t1) ⋯ B^{sn}(tn) ρ]` for an arbitrary Hermitian field `B(t)`.
pub fn eval_correlation_with(
    signs: &CorrSignString,
    field: impl Fn(f64) -> PauliOperator,
    rho: &PauliOperator,
) -> f64 {
    let mut state = *rho;
    for &(sign, t) in signs.entries().iter().rev() {
        let b = field(t);
        let op = match sign {
            Sign::Plus => anti_half(&b),
            Sign::Minus => comm_half(&b),
        };
        state = op.apply(&state);
    }
    state.trace()
}

/// Target correlation with `B_Q(t) = 2a I_x(t)`.
pub fn eval_correlation(signs: &CorrSignString, params: &SimParams, rho: &PauliOperator) -> f64 {
    let (a, w0) = (params.a, params.omega0);
    eval_correlation_with(signs, |t| heisenberg_ix(t, w0) * (2.0 * a), rho)
}
