//! Interpolation coefficients of the CLI and MR no-slip closures.
//!
//! Both closures write
//!
//! ```text
//! f_qbar(x, t+1) = k1 f~_q(x) + k0 f~_q(x - c_q) + km1 f~_q(x - 2 c_q)
//!                + kb1 f~_qbar(x) + kb2 f~_qbar(x - c_q)
//!                - alpha * 6 w_q v . c_q + f_pc
//! ```
//!
//! with `delta` the fluid-side fraction of the cut link. CLI is the linear
//! member of the family (`km1 = kb2 = 0`, no correction).
//!
//! The MR coefficients are those of the second-order multi-reflection
//! closure of the TRT literature (MR1): with `d = delta`,
//!
//! | coefficient | value                          |
//! |-------------|--------------------------------|
//! | k1          | 1                              |
//! | k0          | (1 - 2d - 2d^2) / (1 + d)^2    |
//! | km1         | d^2 / (1 + d)^2                |
//! | kb1         | -k0                            |
//! | kb2         | -km1                           |
//! | alpha       | 4 / (1 + d)^2                  |
//! | f_pc        | alpha * (1/2 + 1/lambda_-) * (-lambda_-) * n-_q  |
//!
//! where `n-_q = f-_q - e-_q` is the antisymmetric non-equilibrium part of
//! the boundary node populations before collision. The correction makes the
//! closure exact for parabolic profiles at any `delta`; its factor reduces
//! to `-alpha (1 + lambda_-/2)`.

/// Coefficient set shared by all link closures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCoefficients {
    pub k1: f64,
    pub k0: f64,
    pub km1: f64,
    pub kb1: f64,
    pub kb2: f64,
    pub alpha: f64,
    /// Multiplier of `n-_q` in the post-collision correction.
    pub pc: f64,
}

/// Plain bounce-back: CLI at `delta = 1/2`.
pub const BOUNCE_BACK: LinkCoefficients = LinkCoefficients {
    k1: 1.0,
    k0: 0.0,
    km1: 0.0,
    kb1: 0.0,
    kb2: 0.0,
    alpha: 2.0,
    pc: 0.0,
};

pub fn cli(delta: f64) -> LinkCoefficients {
    let k0 = (1.0 - 2.0 * delta) / (1.0 + 2.0 * delta);
    LinkCoefficients {
        k1: 1.0,
        k0,
        km1: 0.0,
        kb1: -k0,
        kb2: 0.0,
        alpha: 4.0 / (1.0 + 2.0 * delta),
        pc: 0.0,
    }
}

pub fn mr(delta: f64, lambda_minus: f64) -> LinkCoefficients {
    let s = (1.0 + delta) * (1.0 + delta);
    let k0 = (1.0 - 2.0 * delta - 2.0 * delta * delta) / s;
    let km1 = delta * delta / s;
    let alpha = 4.0 / s;
    LinkCoefficients {
        k1: 1.0,
        k0,
        km1,
        kb1: -k0,
        kb2: -km1,
        alpha,
        pc: -alpha * (1.0 + 0.5 * lambda_minus),
    }
}
