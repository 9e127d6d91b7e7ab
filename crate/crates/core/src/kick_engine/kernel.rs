use crate::{Error, Real, Result};

/// Banded kick operator: the integer-order Bessel functions `J_d(k)` for
/// `|d| ≤ d_max`, where every dropped coefficient satisfies `|J_d(k)| < ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickKernel<T> {
    k: T,
    epsilon: T,
    d_max: usize,
    /// `J_d(k)` stored at `d + d_max`.
    coefficients: Vec<T>,
    /// `coefficients` reversed, so the convolution walks source amplitudes forward.
    reversed: Vec<T>,
}

impl<T: Real> KickKernel<T> {
    /// Tabulates `J_d(k)` by Miller's backward recurrence and truncates the band at `epsilon`.
    pub fn new(k: T, epsilon: T) -> Result<Self> {
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::invalid(format!(
                "kick strength must be finite and >= 0, got {k}"
            )));
        }
        if !(epsilon > T::zero()) || epsilon > T::lit(1e-10) {
            return Err(Error::invalid(format!(
                "kernel threshold must lie in (0, 1e-10], got {epsilon}"
            )));
        }
        let k_ord = k.ceil().to_usize().unwrap_or(usize::MAX / 4);
        let mut n_max = k_ord + 32;
        let values = loop {
            let values = bessel_orders(k, n_max);
            // Beyond k the sequence is monotonically decreasing; stop once its
            // last entries sit far below the threshold.
            if values[n_max].abs() < epsilon * T::lit(1e-6) {
                break values;
            }
            n_max *= 2;
        };
        let d_max = values.iter().rposition(|v| v.abs() >= epsilon).unwrap_or(0);

        let mut coefficients = Vec::with_capacity(2 * d_max + 1);
        for d in (1..=d_max).rev() {
            let v = values[d];
            coefficients.push(if d % 2 == 0 { v } else { -v });
        }
        coefficients.extend_from_slice(&values[..=d_max]);
        let reversed = coefficients.iter().rev().copied().collect();
        Ok(Self {
            k,
            epsilon,
            d_max,
            coefficients,
            reversed,
        })
    }

    /// Kernel of the inverse kick, `J_{-d}(k) = J_d(-k)`.
    pub fn adjoint(&self) -> Self {
        Self {
            k: -self.k,
            epsilon: self.epsilon,
            d_max: self.d_max,
            coefficients: self.reversed.clone(),
            reversed: self.coefficients.clone(),
        }
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// `J_d(k)`, zero outside the band.
    pub fn coefficient(&self, d: i64) -> T {
        if d.unsigned_abs() as usize > self.d_max {
            T::zero()
        } else {
            self.coefficients[(d + self.d_max as i64) as usize]
        }
    }

    /// Coefficients for `d = -d_max ..= d_max`.
    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub(crate) fn reversed(&self) -> &[T] {
        &self.reversed
    }

    /// `(d, J_d(k))` over the band.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let off = self.d_max as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - off, v))
    }
}

/// `J_0(x) ..= J_{n_max}(x)` for `x ≥ 0`, normalized with `J_0 + 2 Σ J_{2n} = 1`.
fn bessel_orders<T: Real>(x: T, n_max: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    if x == T::zero() {
        out[0] = T::one();
        return out;
    }
    let top = n_max.max(x.ceil().to_usize().unwrap_or(n_max));
    let extra = (40.0 * top as f64).sqrt() as usize;
    let start = (top + 16 + extra) | 1; // odd, so the even-order sum sees J_start-1 first

    let rescale = T::lit(1e10);
    let two_over_x = T::lit(2.0) / x;
    let mut upper = T::zero(); // J_{n+1}
    let mut cur = T::lit(1e-30); // J_n
    let mut even_sum = T::zero();
    for n in (1..=start).rev() {
        // J_{n-1} = (2n/x) J_n - J_{n+1}
        let lower = T::from_usize(n).unwrap() * two_over_x * cur - upper;
        upper = cur;
        cur = lower;
        let m = n - 1;
        if m <= n_max {
            out[m] = cur;
        }
        if m % 2 == 0 && m > 0 {
            even_sum = even_sum + cur;
        }
        if cur.abs() > rescale {
            let s = rescale.recip();
            cur = cur * s;
            upper = upper * s;
            even_sum = even_sum * s;
            for v in out.iter_mut().skip(m) {
                *v = *v * s;
            }
        }
    }
    let norm = out[0] + T::lit(2.0) * even_sum;
    for v in out.iter_mut() {
        *v = *v / norm;
    }
    out
}
