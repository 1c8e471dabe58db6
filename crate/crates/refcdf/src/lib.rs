//! Reference evaluation of the non-central chi-squared CDF with 2 degrees
//! of freedom, by adaptive quadrature of the density.
//!
//! This crate exists as a test oracle. It deliberately shares no code with
//! the series evaluation it is used to check: the CDF here is obtained by
//! integrating
//!
//! ```text
//! p(t) = (1/2) exp(-(t + lambda)/2) I0(sqrt(lambda t))
//! ```
//!
//! with an adaptive Simpson rule, where `I0` is the modified Bessel function
//! of the first kind (order zero). The first-order Marcum Q function is the
//! complement of this CDF:
//!
//! ```text
//! Q1(alpha, beta) = 1 - P(chi2'_2(alpha^2) <= beta^2)
//! ```

/// Power series ln I0(z) = ln sum_k (z^2/4)^k / (k!)^2.
///
/// All terms are positive, so the sum carries no cancellation; usable up to
/// z ~ 700 where the sum approaches f64 overflow.
fn series_ln_i0(z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    while term > sum * 1e-20 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum.ln()
}

/// Hankel expansion ln I0(z) = z - ln(2 pi z)/2 + ln(sum_k c_k / z^k),
/// c_0 = 1, c_k = c_{k-1} (2k-1)^2 / (8k). Truncation error ~ c_11/z^11,
/// far below f64 resolution for z >= 300.
fn asymptotic_ln_i0(z: f64) -> f64 {
    let mut c = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut zk = 1.0_f64;
    for k in 1..=10u32 {
        let kf = k as f64;
        c *= (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf);
        zk *= z;
        sum += c / zk;
    }
    z - 0.5 * (2.0 * core::f64::consts::PI * z).ln() + sum.ln()
}

/// Natural log of the modified Bessel function I0(z), for z >= 0.
pub fn ln_bessel_i0(z: f64) -> f64 {
    assert!(z >= 0.0 && z.is_finite(), "ln_bessel_i0: bad argument {z}");
    if z <= 500.0 {
        series_ln_i0(z)
    } else {
        asymptotic_ln_i0(z)
    }
}

/// Density of the non-central chi-squared distribution with 2 degrees of
/// freedom and noncentrality `lambda`, evaluated at `t >= 0`.
pub fn ncx2_2dof_pdf(lambda: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let ln_i0 = ln_bessel_i0((lambda * t).sqrt());
    0.5 * (-(t + lambda) / 2.0 + ln_i0).exp()
}

/// CDF of the non-central chi-squared distribution with 2 degrees of
/// freedom: `P(chi2'_2(lambda) <= x)`, by adaptive Simpson quadrature.
///
/// Absolute accuracy is ~1e-12 for lambda up to ~1e4 (checked against the
/// Marcum Q identities in this crate's tests).
pub fn ncx2_2dof_cdf(lambda: f64, x: f64) -> f64 {
    assert!(lambda >= 0.0 && lambda.is_finite(), "bad lambda {lambda}");
    assert!(x.is_finite(), "bad x {x}");
    if x <= 0.0 {
        return 0.0;
    }
    let f = |t: f64| ncx2_2dof_pdf(lambda, t);
    // Split at the density peak when it lies inside the interval, so the
    // adaptive rule starts from well-behaved subranges.
    let peak = lambda + 2.0;
    let value = if x > peak && lambda > 0.0 {
        adaptive_simpson(&f, 0.0, peak, 0.5e-14) + adaptive_simpson(&f, peak, x, 0.5e-14)
    } else {
        adaptive_simpson(&f, 0.0, x, 1e-14)
    };
    value.clamp(0.0, 1.0)
}

/// First-order Marcum Q function `Q1(alpha, beta)`.
pub fn marcum_q1(alpha: f64, beta: f64) -> f64 {
    1.0 - ncx2_2dof_cdf(alpha * alpha, beta * beta)
}

/// Reference value of `f(a, b, c) = 1 - Q1(sqrt(2a/b), sqrt(2c/b))`, the
/// probability that a complex Gaussian with mean power `a` and variance `b`
/// has squared magnitude below `c`.
pub fn f_reference(a: f64, b: f64, c: f64) -> f64 {
    assert!(
        a >= 0.0 && b > 0.0 && c >= 0.0,
        "f_reference domain: a={a} b={b} c={c}"
    );
    ncx2_2dof_cdf(2.0 * a / b, 2.0 * c / b)
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `eps` is the acceptance threshold per subinterval and is NOT halved on
/// recursion: halving drives the threshold below the floating-point noise
/// floor of the `delta` estimate and forces full-depth expansion on wide
/// smooth integrands.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps || !(lm > a && rm < b) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, eps, depth - 1)
}
