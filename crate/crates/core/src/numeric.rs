//! Fixed-step Runge-Kutta integration.

use crate::scalar::Scalar;

/// One classical RK4 step of `x' = f(x)` in place.
///
/// `f` writes the derivative of its first argument into the second.
pub fn rk4_step<T, F>(f: &mut F, x: &mut [T], dt: T)
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]),
{
    let n = x.len();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];

    f(x, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + half * dt * k1[i];
    }
    f(&tmp, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + half * dt * k2[i];
    }
    f(&tmp, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    f(&tmp, &mut k4);
    for i in 0..n {
        x[i] += dt / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
}

/// Number of whole `dt` steps in `duration`, tolerant to representation error.
pub fn step_count<T: Scalar>(duration: T, dt: T) -> Option<usize> {
    let ratio = duration / dt;
    let n = ratio.round();
    if n < T::one() || (ratio - n).abs() > T::lit(1e-6) {
        return None;
    }
    n.to_usize()
}

/// `duration` is a positive integer multiple of `dt`.
pub fn is_multiple<T: Scalar>(duration: T, dt: T) -> bool {
    step_count(duration, dt).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let mut x = [1.0f64];
        let mut f = |s: &[f64], d: &mut [f64]| d[0] = -s[0];
        for _ in 0..100 {
            rk4_step(&mut f, &mut x, 0.01);
        }
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 0.05), Some(20));
        assert_eq!(step_count(0.5f32, 0.05), Some(10));
        assert_eq!(step_count(0.52, 0.05), None);
        assert_eq!(step_count(0.01, 0.05), None);
    }
}
