//! Numerical building blocks: modified Bessel functions, circular-moment
//! conversions, Gauss–Hermite and adaptive Gauss–Kronrod quadrature, a
//! bracketed root finder and a few log-domain helpers.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureNotConverged { tol: f64, err: f64 },
    #[error("root not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("root finder did not converge")]
    RootNotConverged,
}

const SERIES_LIMIT: f64 = 30.0;

/// Exponentially scaled modified Bessel function `I_nu(x) e^{-x}` for
/// `nu` in {0, 1} and `x >= 0`.
fn bessel_scaled(nu: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= SERIES_LIMIT {
        // sum_k (x/2)^(2k + nu) / (k! (k + nu)!)
        let q = 0.25 * x * x;
        let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
        let mut sum = term;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + nu as f64));
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// `I_0(x) e^{-|x|}`.
pub fn bessel_i0e(x: f64) -> f64 {
    bessel_scaled(0, x.abs())
}

/// `I_1(x) e^{-|x|}` (odd in `x`).
pub fn bessel_i1e(x: f64) -> f64 {
    let v = bessel_scaled(1, x.abs());
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Mean resultant length of a Von Mises distribution, `A(k) = I_1(k) / I_0(k)`.
pub fn bessel_ratio(kappa: f64) -> f64 {
    let k = kappa.max(0.0);
    if k < 1e-3 {
        let k2 = k * k;
        0.5 * k * (1.0 - k2 / 8.0 + k2 * k2 / 48.0)
    } else if k > 1e3 {
        (-0.5 * circular_variance_asymptotic(k)).exp()
    } else {
        bessel_scaled(1, k) / bessel_scaled(0, k)
    }
}

fn circular_variance_asymptotic(k: f64) -> f64 {
    let u = 1.0 / k;
    u * (1.0 + u * (0.5 + u * (11.0 / 24.0 + u * 0.625)))
}

/// Wrapped-normal variance (radians^2) whose first circular moment equals
/// that of a Von Mises law with concentration `kappa`: `-2 ln A(kappa)`.
///
/// Infinite for `kappa == 0`.
pub fn circular_variance(kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return f64::INFINITY;
    }
    if kappa < 1e-3 {
        let k2 = kappa * kappa;
        -2.0 * (0.5 * kappa).ln() + k2 / 4.0
    } else if kappa > 1e3 {
        circular_variance_asymptotic(kappa)
    } else {
        -2.0 * bessel_ratio(kappa).ln()
    }
}

/// Inverse of [`circular_variance`], solved by bracketed root finding.
pub fn kappa_from_circular_variance(var: f64) -> f64 {
    if !(var < f64::INFINITY) {
        return 0.0;
    }
    if var <= 0.0 {
        return f64::INFINITY;
    }
    // cheap cases first
    if var < circular_variance(1e3) {
        let u = var - var * var / 2.0 + var * var * var / 24.0;
        return 1.0 / u;
    }
    if var > circular_variance(1e-3) {
        let mut k = 2.0 * (-0.5 * var).exp();
        for _ in 0..3 {
            k = 2.0 * (-0.5 * var).exp() * (1.0 + k * k / 8.0);
        }
        return k;
    }
    let target = var.ln();
    let f = |u: f64| circular_variance(u.exp()).ln() - target;
    // circular_variance is decreasing, f changes sign on this bracket
    let lo = (1e-3f64).ln() - 1e-9;
    let hi = (1e3f64).ln() + 1e-9;
    brent(f, lo, hi, 1e-13).map(f64::exp).unwrap_or(f64::NAN)
}

/// Lookup tables for the circular-moment conversions used inside the ADBP
/// check-node update, with cost independent of the argument.
pub struct CircularTables {
    ln_k0: f64,
    ln_k_step: f64,
    ln_var_of_ln_k: Vec<f64>,
    ln_v0: f64,
    ln_v_step: f64,
    ln_k_of_ln_var: Vec<f64>,
}

const TABLE_SIZE: usize = 4096;

impl CircularTables {
    fn build() -> Self {
        let ln_k0 = (1e-3f64).ln();
        let ln_k1 = (1e3f64).ln();
        let ln_k_step = (ln_k1 - ln_k0) / (TABLE_SIZE - 1) as f64;
        let ln_var_of_ln_k = (0..TABLE_SIZE)
            .map(|i| circular_variance((ln_k0 + i as f64 * ln_k_step).exp()).ln())
            .collect();
        let ln_v0 = circular_variance(1e3).ln();
        let ln_v1 = circular_variance(1e-3).ln();
        let ln_v_step = (ln_v1 - ln_v0) / (TABLE_SIZE - 1) as f64;
        let ln_k_of_ln_var = (0..TABLE_SIZE)
            .map(|i| kappa_from_circular_variance((ln_v0 + i as f64 * ln_v_step).exp()).ln())
            .collect();
        CircularTables {
            ln_k0,
            ln_k_step,
            ln_var_of_ln_k,
            ln_v0,
            ln_v_step,
            ln_k_of_ln_var,
        }
    }

    pub fn get() -> &'static CircularTables {
        static TABLES: OnceLock<CircularTables> = OnceLock::new();
        TABLES.get_or_init(CircularTables::build)
    }

    /// Table-driven [`circular_variance`]; asymptotic expansions outside `[1e-3, 1e3]`.
    pub fn variance(&self, kappa: f64) -> f64 {
        if kappa <= 0.0 {
            return f64::INFINITY;
        }
        if kappa < 1e-3 {
            return -2.0 * (0.5 * kappa).ln() + kappa * kappa / 4.0;
        }
        if kappa > 1e3 {
            return circular_variance_asymptotic(kappa);
        }
        let t = (kappa.ln() - self.ln_k0) / self.ln_k_step;
        cubic_lookup(&self.ln_var_of_ln_k, t).exp()
    }

    /// Table-driven [`kappa_from_circular_variance`].
    pub fn kappa(&self, var: f64) -> f64 {
        if !(var < f64::INFINITY) {
            return 0.0;
        }
        if var <= 0.0 {
            return f64::INFINITY;
        }
        let t = (var.ln() - self.ln_v0) / self.ln_v_step;
        if t < 0.0 || t > (TABLE_SIZE - 1) as f64 {
            return kappa_from_circular_variance(var);
        }
        cubic_lookup(&self.ln_k_of_ln_var, t).exp()
    }
}

/// Catmull–Rom interpolation of a uniformly sampled table at fractional index `t`.
fn cubic_lookup(table: &[f64], t: f64) -> f64 {
    let n = table.len();
    let t = t.clamp(0.0, (n - 1) as f64);
    let i = (t.floor() as usize).min(n - 2);
    let f = t - i as f64;
    let p1 = table[i];
    let p2 = table[i + 1];
    let p0 = if i > 0 { table[i - 1] } else { 2.0 * p1 - p2 };
    let p3 = if i + 2 < n { table[i + 2] } else { 2.0 * p2 - p1 };
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    ((a * f + b) * f + c) * f + p1
}

/// Brent's method on a bracketing interval.
pub fn brent<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericError::NotBracketed { lo, hi });
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(NumericError::RootNotConverged)
}

/// Gauss–Hermite rule for `∫ e^{-x²} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 3e-14 {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        GaussHermite {
            nodes: x,
            weights: w,
        }
    }

    /// `E[f(Z)]` for `Z ~ N(0, sigma²)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, sigma: f64, mut f: F) -> f64 {
        let scale = SQRT_2 * sigma;
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(scale * x);
        }
        acc / PI.sqrt()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`, starting
/// from `initial` equal subintervals and bisecting the worst one until the
/// summed error estimate drops below `abs_tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    abs_tol: f64,
) -> Result<f64, NumericError> {
    let initial = initial.max(1);
    let step = (b - a) / initial as f64;
    let mut parts: Vec<(f64, f64, f64, f64)> = (0..initial)
        .map(|i| {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == initial { b } else { lo + step };
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    for _ in 0..5000 {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol {
            return Ok(parts.iter().map(|p| p.2).sum());
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty partition");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    let err: f64 = parts.iter().map(|p| p.3).sum();
    Err(NumericError::QuadratureNotConverged { tol: abs_tol, err })
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / SQRT_2)
}

/// `ln Σ exp(v)`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}
