//! Gate matrices.
//!
//! Two-qubit matrices are indexed `[t_a t_b ; s_a s_b]`: row `2 t_a + t_b`,
//! column `2 s_a + s_b`, where `a` is the first site named by the gate.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_traits::{One, Zero};

use crate::tensor::C64;

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [C64; 4]);

/// Row-major 4x4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [C64; 16]);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([C64::one(), C64::zero(), C64::zero(), C64::one()])
    }

    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.0[2 * row + col]
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [C64::zero(); 4];
        for r in 0..2 {
            for k in 0..2 {
                out[2 * r + k] = (0..2).map(|j| self.at(r, j) * rhs.at(j, k)).sum();
            }
        }
        Mat2(out)
    }

    pub fn dagger(&self) -> Mat2 {
        Mat2([
            self.0[0].conj(),
            self.0[2].conj(),
            self.0[1].conj(),
            self.0[3].conj(),
        ])
    }

    pub fn conj(&self) -> Mat2 {
        Mat2(self.0.map(|z| z.conj()))
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().mul(self).max_abs_diff(&Mat2::identity()) <= tol
    }
}

impl Mat4 {
    pub fn identity() -> Self {
        let mut m = [C64::zero(); 16];
        for i in 0..4 {
            m[5 * i] = C64::one();
        }
        Mat4(m)
    }

    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.0[4 * row + col]
    }

    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = [C64::zero(); 16];
        for r in 0..4 {
            for k in 0..4 {
                out[4 * r + k] = (0..4).map(|j| self.at(r, j) * rhs.at(j, k)).sum();
            }
        }
        Mat4(out)
    }

    pub fn dagger(&self) -> Mat4 {
        let mut out = [C64::zero(); 16];
        for r in 0..4 {
            for k in 0..4 {
                out[4 * r + k] = self.at(k, r).conj();
            }
        }
        Mat4(out)
    }

    pub fn conj(&self) -> Mat4 {
        Mat4(self.0.map(|z| z.conj()))
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().mul(self).max_abs_diff(&Mat4::identity()) <= tol
    }

    /// The same operator with the roles of the two qubits exchanged.
    pub fn swap_qubits(&self) -> Mat4 {
        let flip = |i: usize| ((i & 1) << 1) | (i >> 1);
        let mut out = [C64::zero(); 16];
        for r in 0..4 {
            for k in 0..4 {
                out[4 * flip(r) + flip(k)] = self.at(r, k);
            }
        }
        Mat4(out)
    }

    /// Kronecker product `a (x) b`, `a` acting on the first qubit.
    pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
        let mut out = [C64::zero(); 16];
        for ta in 0..2 {
            for tb in 0..2 {
                for sa in 0..2 {
                    for sb in 0..2 {
                        out[4 * (2 * ta + tb) + 2 * sa + sb] = a.at(ta, sa) * b.at(tb, sb);
                    }
                }
            }
        }
        Mat4(out)
    }
}

pub fn hadamard() -> Mat2 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    Mat2([h, h, h, -h])
}

pub fn t_gate() -> Mat2 {
    Mat2([
        C64::one(),
        C64::zero(),
        C64::zero(),
        C64::from_polar(1.0, FRAC_PI_4),
    ])
}

pub fn pauli_x() -> Mat2 {
    Mat2([C64::zero(), C64::one(), C64::one(), C64::zero()])
}

pub fn pauli_y() -> Mat2 {
    Mat2([C64::zero(), c(0.0, -1.0), c(0.0, 1.0), C64::zero()])
}

/// Principal square root of X.
pub fn x_half() -> Mat2 {
    Mat2([c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)])
}

/// Principal square root of Y.
pub fn y_half() -> Mat2 {
    Mat2([c(0.5, 0.5), c(-0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5)])
}

pub fn cz() -> Mat4 {
    let mut m = Mat4::identity();
    m.0[15] = -C64::one();
    m
}

pub fn swap() -> Mat4 {
    let mut m = [C64::zero(); 16];
    m[0] = C64::one();
    m[4 + 2] = C64::one();
    m[8 + 1] = C64::one();
    m[15] = C64::one();
    Mat4(m)
}
