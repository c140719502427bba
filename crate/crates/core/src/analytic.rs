//! Closed-form solution of the reduced three-body system.
//!
//! While the topology is `N_a = a ∪ {b}`, `N_b = a ∪ {b, c}`, `N_c = ∅` and `M = 1`,
//! the `N - 1` coincident `a`-particles move as one and
//!
//! ```text
//! v_a' = v_b - v_a
//! v_b' = (N - 1)(v_a - v_b) + (v_c - v_b)
//! ```
//!
//! so `V_b = v_b - v_c` solves `V_b'' + (N + 1) V_b' + V_b = 0` with
//! `V_b(0) = -v_c`, `V_b'(0) = v_c`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSolution {
    pub n: usize,
    pub v_c: f64,
    /// Fast root, about `-(N + 1)`.
    pub r1: f64,
    /// Slow root, about `-1 / (N + 1)`.
    pub r2: f64,
    pub a: f64,
    pub b: f64,
}

pub fn reduced_solution(n: usize, v_c: f64) -> Result<ReducedSolution> {
    if n < 2 {
        return Err(Error::config("n", "the reduced system needs N >= 2"));
    }
    if !v_c.is_finite() {
        return Err(Error::config("v_c", "must be finite"));
    }
    let s = (n + 1) as f64;
    let r1 = (-s - (s * s - 4.0).sqrt()) / 2.0;
    // product of the roots is 1; dividing avoids cancellation in the small root
    let r2 = 1.0 / r1;
    let gap = r2 - r1;
    Ok(ReducedSolution {
        n,
        v_c,
        r1,
        r2,
        a: -v_c * (1.0 + r2) / gap,
        b: v_c * (1.0 + r1) / gap,
    })
}

impl ReducedSolution {
    /// `V_b(t) = v_b(t) - v_c`.
    pub fn big_v_b(&self, t: f64) -> f64 {
        self.a * (self.r1 * t).exp() + self.b * (self.r2 * t).exp()
    }

    /// `V_b'(t)`.
    pub fn big_v_b_dot(&self, t: f64) -> f64 {
        self.a * self.r1 * (self.r1 * t).exp() + self.b * self.r2 * (self.r2 * t).exp()
    }

    /// `V_b''(t)`.
    pub fn big_v_b_ddot(&self, t: f64) -> f64 {
        self.a * self.r1 * self.r1 * (self.r1 * t).exp() + self.b * self.r2 * self.r2 * (self.r2 * t).exp()
    }

    /// `∫_0^T V_b`; tends to `-N v_c`.
    pub fn integral_v_b(&self, t: f64) -> f64 {
        self.a * (self.r1 * t).exp_m1() / self.r1 + self.b * (self.r2 * t).exp_m1() / self.r2
    }

    /// `∫_0^T (v_b - v_a)`; tends to `v_c`.
    pub fn integral_v_b_minus_v_a(&self, t: f64) -> f64 {
        let n = self.n as f64;
        let part = |c: f64, r: f64| c / (n + r) * ((r * t).exp_m1() / r + (-n * t).exp_m1() / n);
        -(part(self.a, self.r1) + part(self.b, self.r2))
    }

    /// Large-`N` leading order `V_b ≈ -v_c e^{-t/(N+1)}`.
    pub fn leading_order_v_b(&self, t: f64) -> f64 {
        -self.v_c * (-t / (self.n + 1) as f64).exp()
    }
}

pub fn eval_v_b(sol: &ReducedSolution, t: f64) -> f64 {
    sol.v_c + sol.big_v_b(t)
}

/// `(v_b - v_a)(t) = -e^{-Nt} ∫_0^t e^{Ns} V_b(s) ds` in closed form.
pub fn eval_v_b_minus_v_a(sol: &ReducedSolution, t: f64) -> f64 {
    let n = sol.n as f64;
    let decay = (-n * t).exp();
    // e^{rt} - e^{-Nt}, through expm1 while the two terms are close
    let diff = |r: f64| {
        let s = (n + r) * t;
        if s.abs() < 1.0 {
            decay * s.exp_m1()
        } else {
            (r * t).exp() - decay
        }
    };
    let part = |c: f64, r: f64| c * diff(r) / (n + r);
    -(part(sol.a, sol.r1) + part(sol.b, sol.r2))
}

/// Times at which `c` leaves `N_b` and `b` leaves `N_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetachTimes {
    /// `(delta - (gamma - beta)) / |v_c|`.
    pub approx_t_c: f64,
    /// `N (delta - beta) / |v_c|`.
    pub approx_t_b: f64,
    /// Root of `|gamma - beta| + |∫ V_b| = delta`, absent when never reached.
    pub exact_t_c: Option<f64>,
    /// Root of `|beta| + |∫ (v_b - v_a)| = delta`, absent when never reached.
    pub exact_t_b: Option<f64>,
}

pub fn detach_times(sol: &ReducedSolution, beta: f64, gamma: f64, delta: f64) -> DetachTimes {
    let speed = sol.v_c.abs();
    let n = sol.n as f64;
    let (approx_t_c, approx_t_b) = if speed == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        ((delta - (gamma - beta)) / speed, n * (delta - beta) / speed)
    };
    let gap_c = (gamma - beta).abs();
    let exact_t_c = first_crossing(|t| gap_c + sol.integral_v_b(t).abs(), n * speed + gap_c, delta);
    let exact_t_b = first_crossing(
        |t| beta.abs() + sol.integral_v_b_minus_v_a(t).abs(),
        speed + beta.abs(),
        delta,
    );
    DetachTimes {
        approx_t_c,
        approx_t_b,
        exact_t_c,
        exact_t_b,
    }
}

/// First `t` with `f(t) = level` for a nondecreasing `f` whose limit is `limit`.
fn first_crossing(f: impl Fn(f64) -> f64, limit: f64, level: f64) -> Option<f64> {
    if f(0.0) >= level {
        return Some(0.0);
    }
    if limit <= level {
        return None;
    }
    let mut hi = 1.0;
    while f(hi) < level {
        hi *= 2.0;
        if hi > 1e15 {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_speed_is_static() {
        let s = reduced_solution(10, 0.0).unwrap();
        assert_eq!((s.a, s.b), (0.0, 0.0));
        assert_eq!(eval_v_b(&s, 3.0), 0.0);
        let d = detach_times(&s, 1.0, 2.0, 2.0);
        assert_eq!((d.exact_t_c, d.exact_t_b), (None, None));
    }

    #[test]
    fn n10_coefficients() {
        let s = reduced_solution(10, 1.0).unwrap();
        assert!((s.r1 + 10.90833).abs() < 1e-5);
        assert!((s.r2 + 0.09167).abs() < 1e-5);
        assert!((s.a + 0.08398).abs() < 1e-5);
        assert!((s.b + 0.91602).abs() < 1e-5);
        assert!((s.a + s.b + 1.0).abs() < 1e-15);
        assert!((s.a * s.r1 + s.b * s.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn initial_values_and_limits() {
        let s = reduced_solution(30, 0.7).unwrap();
        assert!(eval_v_b(&s, 0.0).abs() < 1e-15);
        assert_eq!(eval_v_b_minus_v_a(&s, 0.0), 0.0);
        assert!((eval_v_b(&s, 5000.0) - 0.7).abs() < 1e-12);
        assert!(eval_v_b_minus_v_a(&s, 5000.0).abs() < 1e-12);
        assert!((s.integral_v_b(1e5) + 30.0 * 0.7).abs() < 1e-9);
        assert!((s.integral_v_b_minus_v_a(1e5) - 0.7).abs() < 1e-9);
    }

    #[test]
    fn vieta_for_large_n() {
        for &n in &[2usize, 3, 10, 1000, 100_000, 1_000_000] {
            let s = reduced_solution(n, 1.0).unwrap();
            assert!((s.r1 * s.r2 - 1.0).abs() < 1e-12);
            let sum = s.r1 + s.r2 + (n + 1) as f64;
            assert!(sum.abs() < 1e-12 * (n + 1) as f64, "n = {n}: {sum}");
            assert!(s.r1 < 0.0 && s.r2 < 0.0);
        }
    }

    #[test]
    fn leading_order_for_large_n() {
        let s = reduced_solution(2000, 1.0).unwrap();
        for &t in &[1.0, 10.0, 100.0, 1000.0] {
            assert!((s.big_v_b(t) - s.leading_order_v_b(t)).abs() < 2e-3);
        }
    }

    /// Classic RK4 on the two-variable system with a very fine step.
    fn fine_reduced(n: usize, v_c: f64, t_end: f64, steps: usize) -> (f64, f64) {
        let nf = n as f64;
        let f = |va: f64, vb: f64| (vb - va, (nf - 1.0) * (va - vb) + (v_c - vb));
        let h = t_end / steps as f64;
        let (mut va, mut vb) = (0.0, 0.0);
        for _ in 0..steps {
            let k1 = f(va, vb);
            let k2 = f(va + 0.5 * h * k1.0, vb + 0.5 * h * k1.1);
            let k3 = f(va + 0.5 * h * k2.0, vb + 0.5 * h * k2.1);
            let k4 = f(va + h * k3.0, vb + h * k3.1);
            va += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            vb += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        (va, vb)
    }

    #[test]
    fn matches_fine_numerical_integration() {
        let s = reduced_solution(10, 1.0).unwrap();
        let (va, vb) = fine_reduced(10, 1.0, 1.0, 20_000);
        assert!((eval_v_b(&s, 1.0) - vb).abs() < 1e-10);
        assert!((eval_v_b_minus_v_a(&s, 1.0) - (vb - va)).abs() < 1e-10);
    }

    #[test]
    fn integrals_match_quadrature() {
        let s = reduced_solution(12, -0.4).unwrap();
        let t_end = 7.0;
        let k = 20_000;
        let h = t_end / k as f64;
        // composite Simpson
        let simpson = |g: &dyn Fn(f64) -> f64| {
            let mut acc = g(0.0) + g(t_end);
            for i in 1..k {
                acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        assert!((simpson(&|t| s.big_v_b(t)) - s.integral_v_b(t_end)).abs() < 1e-10);
        assert!((simpson(&|t| eval_v_b_minus_v_a(&s, t)) - s.integral_v_b_minus_v_a(t_end)).abs() < 1e-10);
    }

    #[test]
    fn detach_examples() {
        let s = reduced_solution(30, 1.0).unwrap();
        let d = detach_times(&s, 1.0, 2.0, 2.0);
        assert!((d.approx_t_c - 1.0).abs() < 1e-15);
        assert!((d.approx_t_b - 30.0).abs() < 1e-12);
        // b's displacement tends to exactly v_c = delta - beta, never strictly beyond
        assert_eq!(d.exact_t_b, None);
        let tc = d.exact_t_c.unwrap();
        assert!((tc - 1.0).abs() < 0.15);
        assert!((s.integral_v_b(tc).abs() + 1.0 - 2.0).abs() < 1e-9);

        let d = detach_times(&s, 1.95, 2.0, 2.0);
        assert!((d.approx_t_b - 1.5).abs() < 1e-12);
        assert!((d.approx_t_c - 1.95).abs() < 1e-12);
        let (tb, tc) = (d.exact_t_b.unwrap(), d.exact_t_c.unwrap());
        assert!(tb < tc);
        assert!((tb - 1.5).abs() < 0.15 * 1.5);
        assert!((tc - 1.95).abs() < 0.15 * 1.95);

        // inside the sticking region neither distance ever reaches delta
        let s = reduced_solution(30, 0.03).unwrap();
        let d = detach_times(&s, 1.0, 2.0, 2.0);
        assert_eq!((d.exact_t_c, d.exact_t_b), (None, None));
    }

    proptest! {
        #[test]
        fn ode_residual(n in 2usize..500, v_c in -2.0f64..2.0, t in 0.0f64..50.0) {
            let s = reduced_solution(n, v_c).unwrap();
            let r = s.big_v_b_ddot(t) + (n + 1) as f64 * s.big_v_b_dot(t) + s.big_v_b(t);
            let scale = (n + 1) as f64 * v_c.abs().max(1.0);
            prop_assert!(r.abs() < 1e-9 * scale);
            prop_assert!((s.big_v_b(0.0) + v_c).abs() < 1e-12);
            prop_assert!((s.big_v_b_dot(0.0) - v_c).abs() < 1e-12 * v_c.abs().max(1.0));
        }

        #[test]
        fn exact_and_approximate_times_agree_when_short(n in 30usize..300, beta in 1.0f64..1.99, v_c in 0.5f64..1.0) {
            // the approximations linearize e^{-t/(N+1)}, so they are compared on T <= N / 10
            let s = reduced_solution(n, v_c).unwrap();
            let d = detach_times(&s, beta, 2.0, 2.0);
            if d.approx_t_c <= n as f64 / 10.0 {
                let tc = d.exact_t_c.unwrap();
                prop_assert!((tc - d.approx_t_c).abs() <= 0.15 * d.approx_t_c);
            }
            if d.approx_t_b <= n as f64 / 10.0 {
                let tb = d.exact_t_b.unwrap();
                prop_assert!((tb - d.approx_t_b).abs() <= 0.15 * d.approx_t_b);
            }
        }
    }
}
