//! Integer-order Bessel and Hankel functions of real argument.
//!
//! `J_n` comes from Miller's downward recurrence normalized with
//! `J_0 + 2 Σ J_{2k} = 1`. `Y_0` and `Y_1` use Neumann series in the
//! already-computed `J_n` for moderate arguments and Hankel's asymptotic
//! expansion for large ones; higher orders follow from upward recurrence,
//! which is stable for `Y`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};
use thiserror::Error;

/// Largest order accepted by the public entry points unless configured otherwise.
pub const DEFAULT_MAX_ORDER: usize = 120;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument `Y_0`/`Y_1` switch from Neumann series to asymptotics.
const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

const RESCALE_LIMIT: f64 = 1e250;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("Bessel order {order} exceeds the configured maximum {max}")]
    OrderTooLarge { order: i64, max: usize },
    #[error("argument x = {0} is outside the domain x > 0")]
    Domain(f64),
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// Integer Bessel order bounded by a truncation limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CylOrder(i32);

impl CylOrder {
    pub fn new(n: i32, max_order: usize) -> Result<Self> {
        if n.unsigned_abs() as usize > max_order {
            return Err(SpecFunError::OrderTooLarge {
                order: n as i64,
                max: max_order,
            });
        }
        Ok(Self(n))
    }

    pub fn get(self) -> i32 {
        self.0
    }

    pub fn abs(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    /// `(-1)^n`, the reflection sign for negative orders.
    fn reflection_sign(self) -> f64 {
        if self.0 < 0 && self.0 % 2 != 0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Evaluator carrying the order limit. Stateless otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselEval {
    pub max_order: usize,
}

impl Default for BesselEval {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

impl BesselEval {
    pub fn new(max_order: usize) -> Self {
        Self { max_order }
    }

    pub fn j(&self, n: i32, x: f64) -> Result<f64> {
        let order = CylOrder::new(n, self.max_order)?;
        if !(x >= 0.0) || !x.is_finite() {
            return Err(SpecFunError::Domain(x));
        }
        let table = j_table(order.abs(), x);
        Ok(order.reflection_sign() * table[order.abs()])
    }

    pub fn y(&self, n: i32, x: f64) -> Result<f64> {
        let order = CylOrder::new(n, self.max_order)?;
        check_positive(x)?;
        let table = y_table(order.abs(), x);
        Ok(order.reflection_sign() * table[order.abs()])
    }

    pub fn h1(&self, n: i32, x: f64) -> Result<Complex64> {
        let order = CylOrder::new(n, self.max_order)?;
        check_positive(x)?;
        let table = hankel1_table(order.abs(), x);
        Ok(order.reflection_sign() * table[order.abs()])
    }

    /// `H_n^(1)'(x) = H_{n-1}(x) - (n/x) H_n(x)`.
    pub fn h1_deriv(&self, n: i32, x: f64) -> Result<Complex64> {
        let order = CylOrder::new(n, self.max_order)?;
        check_positive(x)?;
        let m = order.abs();
        let table = hankel1_table(m.max(1), x);
        Ok(order.reflection_sign() * hankel1_deriv_from_table(&table, m, x))
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SpecFunError::Domain(x))
    }
}

/// `J_n(x)` with the default order limit.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    BesselEval::default().j(n, x)
}

/// `Y_n(x)` with the default order limit.
pub fn bessel_y(n: i32, x: f64) -> Result<f64> {
    BesselEval::default().y(n, x)
}

/// `H_n^(1)(x) = J_n(x) + i Y_n(x)` with the default order limit.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64> {
    BesselEval::default().h1(n, x)
}

/// Derivative of `H_n^(1)` with the default order limit.
pub fn hankel1_deriv(n: i32, x: f64) -> Result<Complex64> {
    BesselEval::default().h1_deriv(n, x)
}

/// `J_0(x), ..., J_nmax(x)` for `x >= 0`.
pub fn j_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 30 + (160.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let two_over_x = 2.0 / x;
    let mut j_next = 0.0;
    let mut j_cur = 1e-30;
    let mut norm = 0.0;
    // Walk k = start, start-1, ..., 1 producing J_{k-1} from J_k and J_{k+1}.
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = j_cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE_LIMIT {
            let s = 1.0 / RESCALE_LIMIT;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = j_cur;
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `(Y_0(x), Y_1(x))` for `x > 0`.
fn y0_y1(x: f64) -> (f64, f64) {
    if x > ASYMPTOTIC_THRESHOLD {
        let (_, y0) = hankel_asymptotic(0.0, x);
        let (_, y1) = hankel_asymptotic(1.0, x);
        return (y0, y1);
    }
    let nmax = x.ceil() as usize + 60;
    let j = j_table(nmax, x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < nmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (-j[0] / x + log_term * j[1] + s1);
    (y0, y1)
}

/// Hankel's large-argument expansion, returning `(J_nu(x), Y_nu(x))`.
fn hankel_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 * p.abs().max(1e-300) {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `Y_0(x), ..., Y_nmax(x)` for `x > 0`.
pub fn y_table(nmax: usize, x: f64) -> Vec<f64> {
    let (y0, y1) = y0_y1(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    out
}

/// `H_0^(1)(x), ..., H_nmax^(1)(x)` for `x > 0`.
pub fn hankel1_table(nmax: usize, x: f64) -> Vec<Complex64> {
    let j = j_table(nmax, x);
    let y = y_table(nmax, x);
    j.into_iter()
        .zip(y)
        .map(|(re, im)| Complex64::new(re, im))
        .collect()
}

/// `H_n'` for `n >= 0` from a table holding at least orders `0..=max(n, 1)`.
pub fn hankel1_deriv_from_table(table: &[Complex64], n: usize, x: f64) -> Complex64 {
    if n == 0 {
        -table[1]
    } else {
        table[n - 1] - table[n] * (n as f64 / x)
    }
}

/// `H_0^(1)`, `H_1^(1)`, `H_2^(1)` at once; the kernel of the elastic point source.
pub fn hankel1_012(x: f64) -> [Complex64; 3] {
    let h01 = if x > ASYMPTOTIC_THRESHOLD {
        let (j0, y0) = hankel_asymptotic(0.0, x);
        let (j1, y1) = hankel_asymptotic(1.0, x);
        [Complex64::new(j0, y0), Complex64::new(j1, y1)]
    } else {
        let t = hankel1_table(1, x);
        [t[0], t[1]]
    };
    let h2 = h01[1] * (2.0 / x) - h01[0];
    [h01[0], h01[1], h2]
}

/// Leading-order large-argument form of `H_0^(1)`, also used for far fields.
pub fn hankel1_leading(x: f64) -> Complex64 {
    (FRAC_2_PI / x).sqrt() * Complex64::from_polar(1.0, x - FRAC_PI_4)
}
