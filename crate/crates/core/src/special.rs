//! Special functions and quadrature rules.

use crate::scalar::{cr, cx, Cx, Real};

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.mag() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Sine and cosine integrals `(Si(x), Ci(x))`.
///
/// `Ci` is only defined for `x > 0`; for `x <= 0` its slot holds `-inf`.
pub fn sici<T: Real>(x: T) -> (T, T) {
    let euler = T::lit(0.577_215_664_901_532_9);
    let eps = T::eps();
    let fpmin = T::lit(1e-30);
    let t = x.mag();
    if t == T::zero() {
        return (T::zero(), -T::one() / fpmin);
    }
    let (si, ci) = if t > T::lit(2.0) {
        // Continued fraction for E1(i t) evaluated with the modified Lentz method.
        let mut b = cx(T::one(), t);
        let mut c = cr(T::one() / fpmin);
        let mut d = Cx::new(T::one(), T::zero()) / b;
        let mut h = d;
        for i in 2..200 {
            let a = -T::from_count((i - 1) * (i - 1));
            b += cr(T::lit(2.0));
            d = Cx::new(T::one(), T::zero()) / (d * a + b);
            c = b + Cx::new(a, T::zero()) / c;
            let del = c * d;
            h *= del;
            if (del.re - T::one()).mag() + del.im.mag() < eps {
                break;
            }
        }
        let h = cx(t.cos(), -t.sin()) * h;
        (T::frac_pi_2() + h.im, -h.re)
    } else {
        let mut sum = T::zero();
        let mut sums = T::zero();
        let mut sumc = T::zero();
        let mut sign = T::one();
        let mut fact = T::one();
        let mut odd = true;
        for k in 1..200 {
            let kk = T::from_count(k);
            fact *= t / kk;
            let term = fact / kk;
            sum += sign * term;
            let err = term / sum.mag();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < eps {
                break;
            }
            odd = !odd;
        }
        (sums, sumc + t.ln() + euler)
    };
    if x < T::zero() {
        (-si, -T::infinity())
    } else {
        (si, ci)
    }
}

/// `int_q^inf e^{i b s} sinc(a s) ds` for `q > 0`, `a > 0`.
///
/// Requires `|a| != |b|`.
pub fn sinc_tail<T: Real>(a: T, b: T, q: T) -> Cx<T> {
    let half = T::lit(0.5);
    let sin_tail = |lam: T| -> T {
        if lam == T::zero() {
            T::zero()
        } else {
            lam.signum() * (T::frac_pi_2() - sici(lam.mag() * q).0)
        }
    };
    let re = half * (sin_tail(a + b) + sin_tail(a - b));
    let ci = |lam: T| sici(lam.mag() * q).1;
    let im = half * (ci(a + b) - ci(a - b));
    cx(re, im) / a
}

/// `int_R e^{i b s} sinc(a s) ds` for `a > 0`.
pub fn sinc_fourier_total<T: Real>(a: T, b: T) -> T {
    let ab = b.mag();
    if ab < a {
        T::pi() / a
    } else if ab == a {
        T::pi() / (T::lit(2.0) * a)
    } else {
        T::zero()
    }
}

const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

/// Nodes and weights of the 16-point Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_16<T: Real>(a: T, b: T) -> [(T, T); 16] {
    let mid = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let mut out = [(T::zero(), T::zero()); 16];
    for i in 0..8 {
        let dx = half * T::lit(GL16_X[i]);
        let w = half * T::lit(GL16_W[i]);
        out[7 - i] = (mid - dx, w);
        out[8 + i] = (mid + dx, w);
    }
    out
}

/// Composite 16-point Gauss-Legendre integral over `panels` equal panels.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, panels: usize) -> T {
    let n = panels.max(1);
    let w = (b - a) / T::from_count(n);
    let mut total = T::zero();
    for j in 0..n {
        let lo = a + w * T::from_count(j);
        let mut s = T::zero();
        for (x, wt) in gauss_legendre_16(lo, lo + w) {
            s += wt * f(x);
        }
        total += s;
    }
    total
}

/// Complex-valued variant of [`integrate`].
pub fn integrate_complex<T: Real, F: Fn(T) -> Cx<T>>(f: F, a: T, b: T, panels: usize) -> Cx<T> {
    let re = integrate(|x| f(x).re, a, b, panels);
    let im = integrate(|x| f(x).im, a, b, panels);
    cx(re, im)
}

/// Composite Gauss-Legendre integral over consecutive breakpoints.
pub fn integrate_breaks<T: Real, F: Fn(T) -> T>(f: F, breaks: &[T], panel_width: T) -> T {
    let mut total = T::zero();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / panel_width).ceil().as_f64().max(1.0) as usize;
        total += integrate(&f, a, b, n);
    }
    total
}

/// Adaptive Simpson integration with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, max_depth: u32) -> T {
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.mag() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
}

/// Pairwise summation, which keeps rounding error logarithmic in the length.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 16 {
        return xs.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x, f(x))` once the bracket is narrower than `tol` or stops shrinking.
pub fn golden_min<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T, max_iter: usize) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (a, b);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).mag() <= tol || !(c < d) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
