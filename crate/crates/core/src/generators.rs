//! Smooth frequency windows.
//!
//! Every window is built from one C^inf transition `sigma` that is 0 below 0,
//! 1 above 1, and satisfies `sigma(t) + sigma(1 - t) = 1`. Windows of the form
//! `cos(pi/2 * sigma(s))` then pair up as cosine/sine halves, which is what
//! makes the partition identities hold to rounding.

use std::f64::consts::FRAC_PI_2;

fn rho(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// The transition profile `rho(t) / (rho(t) + rho(1 - t))` with `rho(t) = exp(-1/t)`.
pub fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = rho(t);
    let b = rho(1.0 - t);
    a / (a + b)
}

/// `cos(pi/2 * sigma(s))`, exactly 1 for `s <= 0` and exactly 0 for `s >= 1`.
pub fn cos_ramp(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * transition(s)).cos()
    }
}

/// Meyer-type low-pass: 1 on `[-1/16, 1/16]`, 0 outside `(-1/8, 1/8)`.
pub fn meyer_lowpass(w: f64) -> f64 {
    cos_ramp(16.0 * w.abs() - 1.0)
}

/// `|psi1_hat(w)|^2 = phi^2(w/4) - phi^2(w)` for the Meyer low-pass `phi`.
pub fn psi1_hat_sq(w: f64) -> f64 {
    let a = meyer_lowpass(w / 4.0);
    let b = meyer_lowpass(w);
    (a * a - b * b).max(0.0)
}

/// Nonnegative square root of [`psi1_hat_sq`].
pub fn psi1_hat(w: f64) -> f64 {
    psi1_hat_sq(w).sqrt()
}

/// Angular window `v`: `cos(pi/2 * sigma(|w|))`, supported in `[-1, 1]`.
pub fn psi2_hat(w: f64) -> f64 {
    cos_ramp(w.abs())
}

fn coarse_1d(w: f64) -> f64 {
    cos_ramp(8.0 * w.abs() - 1.0)
}

/// Separable coarse window: 1 on `[-1/8, 1/8]^2`, 0 outside `(-1/4, 1/4)^2`.
pub fn phi_coarse_hat(xi: [f64; 2]) -> f64 {
    coarse_1d(xi[0]) * coarse_1d(xi[1])
}

/// Separable Meyer low-pass `Phi(xi) = phi(xi1) phi(xi2)`.
pub fn meyer_lowpass_2d(xi: [f64; 2]) -> f64 {
    meyer_lowpass(xi[0]) * meyer_lowpass(xi[1])
}

/// `W^2(xi) = Phi^2(xi/4) - Phi^2(xi)`.
pub fn w_hat_sq(xi: [f64; 2]) -> f64 {
    let a = meyer_lowpass_2d([xi[0] / 4.0, xi[1] / 4.0]);
    let b = meyer_lowpass_2d(xi);
    (a * a - b * b).max(0.0)
}

/// Radial low-pass for the isotropic decomposition: 1 for `r <= 1`, 0 for `r >= 2`.
pub fn dyadic_lowpass(r: f64) -> f64 {
    cos_ramp(r - 1.0)
}

/// Squared isotropic band window `Phi_d^2(|xi|) - Phi_d^2(2|xi|)`, supported in `1/2 <= |xi| <= 2`.
pub fn dyadic_band_sq(xi: [f64; 2]) -> f64 {
    let r = xi[0].hypot(xi[1]);
    let a = dyadic_lowpass(r);
    let b = dyadic_lowpass(2.0 * r);
    (a * a - b * b).max(0.0)
}

pub fn dyadic_band(xi: [f64; 2]) -> f64 {
    dyadic_band_sq(xi).sqrt()
}

/// Isotropic coarse window `Phi_d(2|xi|)`.
pub fn dyadic_coarse(xi: [f64; 2]) -> f64 {
    dyadic_lowpass(2.0 * xi[0].hypot(xi[1]))
}

/// Bundle of evaluators for the generating windows.
#[derive(Clone, Copy)]
pub struct GeneratorSet {
    pub psi1_sq: fn(f64) -> f64,
    pub psi2: fn(f64) -> f64,
    pub phi_coarse: fn([f64; 2]) -> f64,
    pub phi_meyer_1d: fn(f64) -> f64,
    pub w_sq: fn([f64; 2]) -> f64,
}

impl Default for GeneratorSet {
    fn default() -> Self {
        GeneratorSet {
            psi1_sq: psi1_hat_sq,
            psi2: psi2_hat,
            phi_coarse: phi_coarse_hat,
            phi_meyer_1d: meyer_lowpass,
            w_sq: w_hat_sq,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // independent transition: direct formula without the clamping branches
    fn sigma_ref(t: f64) -> f64 {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }

    #[test]
    fn transition_values() {
        assert_eq!(transition(-3.0), 0.0);
        assert_eq!(transition(0.5), 0.5);
        assert_eq!(transition(7.0), 1.0);
        let v = transition(0.25);
        assert!((v - sigma_ref(0.25)).abs() < 1e-15);
        assert!((v + transition(0.75) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psi1_values() {
        assert_eq!(psi1_hat_sq(1.0 / 32.0), 0.0);
        assert!((psi1_hat_sq(3.0 / 16.0) - 1.0).abs() < 1e-15);
        let s: f64 = (0..=4).map(|j| psi1_hat_sq(0.25 * 4f64.powi(-j))).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(psi1_hat_sq(0.5), 0.0);
        assert_eq!(psi1_hat_sq(1.0 / 16.0), 0.0);
    }

    #[test]
    fn psi2_values() {
        assert_eq!(psi2_hat(0.0), 1.0);
        assert_eq!(psi2_hat(1.5), 0.0);
        let v = psi2_hat(0.3);
        assert!((v * v + psi2_hat(0.7).powi(2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coarse_values() {
        assert_eq!(phi_coarse_hat([0.0, 0.0]), 1.0);
        assert_eq!(phi_coarse_hat([0.3, 0.0]), 0.0);
        let v = phi_coarse_hat([0.1, 0.2]);
        assert!(v > 0.0 && v < 1.0);
        let expect = (FRAC_PI_2 * sigma_ref(0.6)).cos();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn w_values() {
        assert_eq!(w_hat_sq([0.0, 0.0]), 0.0);
        assert!((w_hat_sq([0.25, 0.0]) - 1.0).abs() < 1e-15);
        let mut s = meyer_lowpass_2d([1.0, 1.0]).powi(2);
        for j in 0..=3 {
            let f = 4f64.powi(-j);
            s += w_hat_sq([f, f]);
        }
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn supports() {
        for i in 0..2000 {
            let w = -2.0 + 4.0 * i as f64 / 1999.0;
            if w.abs() >= 0.5 || w.abs() <= 1.0 / 16.0 {
                assert_eq!(psi1_hat_sq(w), 0.0, "{w}");
            }
            if w.abs() >= 1.0 {
                assert_eq!(psi2_hat(w), 0.0);
            }
            if w.abs() <= 1.0 / 16.0 {
                assert_eq!(meyer_lowpass(w), 1.0);
            }
            if w.abs() >= 0.125 {
                assert_eq!(meyer_lowpass(w), 0.0);
            }
        }
    }

    #[test]
    fn three_term_identity() {
        for i in 0..=10_000 {
            let u = -1.0 + 2.0 * i as f64 / 10_000.0;
            let s: f64 = (-1..=1).map(|m| psi2_hat(u + m as f64).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn shifted_family_identity() {
        for j in 0..=6 {
            let n = 1i64 << j;
            for i in 0..=2000 {
                let u = -1.0 + 2.0 * i as f64 / 2000.0;
                let s: f64 = (-n..=n)
                    .map(|l| psi2_hat(n as f64 * u - l as f64).powi(2))
                    .sum();
                assert!((s - 1.0).abs() < 1e-12, "j={j} u={u}");
            }
        }
    }

    #[test]
    fn dyadic_telescoping() {
        for i in 0..500 {
            let r = 0.01 + 40.0 * i as f64 / 500.0;
            let xi = [r * 0.6, r * 0.8];
            let mut s = dyadic_coarse(xi).powi(2);
            for nu in 0..=6 {
                let f = 2f64.powi(-nu);
                s += dyadic_band_sq([xi[0] * f, xi[1] * f]);
            }
            assert!((s - 1.0).abs() < 1e-12, "r={r}");
        }
    }

    proptest! {
        #[test]
        fn transition_complement(t in -2.0f64..3.0) {
            prop_assert!((transition(t) + transition(1.0 - t) - 1.0).abs() < 1e-14);
            prop_assert!((0.0..=1.0).contains(&transition(t)));
        }

        #[test]
        fn transition_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(transition(lo) <= transition(hi));
        }

        #[test]
        fn windows_even(w in -3.0f64..3.0) {
            prop_assert_eq!(psi1_hat_sq(w), psi1_hat_sq(-w));
            prop_assert_eq!(psi2_hat(w), psi2_hat(-w));
            prop_assert_eq!(meyer_lowpass(w), meyer_lowpass(-w));
            prop_assert_eq!(phi_coarse_hat([w, 0.1]), phi_coarse_hat([-w, 0.1]));
        }

        #[test]
        fn telescoping_sum(x in -64.0f64..64.0, y in -64.0f64..64.0) {
            prop_assume!(x.abs().max(y.abs()) >= 0.125);
            let mut s = meyer_lowpass_2d([x, y]).powi(2);
            for j in 0..=5 {
                let f = 4f64.powi(-j);
                s += w_hat_sq([x * f, y * f]);
            }
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
