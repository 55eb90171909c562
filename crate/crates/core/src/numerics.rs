//! Quadrature and root finding used by the self-energy.
//!
//! Adaptive integration is globally adaptive 7/15-point Gauss-Kronrod with
//! QUADPACK error scaling. Principal values are taken by pairing points
//! symmetric about the pole so the integrand handed to the adaptive rule is
//! regular.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Absolute floor added to every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-300;
/// Default relative tolerance for self-energy integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default tolerance for resonance roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Maximum number of subintervals kept by one adaptive integration.
pub const MAX_SUBINTERVALS: usize = 4000;

const MAX_ROOT_ITERATIONS: usize = 300;

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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Requested accuracy: the integration stops once the error estimate is
/// below `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: ABS_FLOOR }
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over `[lo, hi]`.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    integrate(&f, lo, hi, Tolerance::relative(rel_tol))
}

/// [`adaptive_quadrature`] with an explicit absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration bounds must be finite with lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol.rel > 0.0) || tol.abs < 0.0 {
        return Err(Error::InvalidInput(format!("bad tolerance {tol:?}")));
    }
    let first = gauss_kronrod(f, lo, hi);
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let target = |v: f64| tol.abs.max(tol.rel * v.abs());
    while error > target(value) {
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                detail: format!("non-finite integrand on [{lo}, {hi}]"),
            });
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                detail: format!(
                    "subdivision budget exhausted on [{lo}, {hi}]: value {value}, error {error:e}"
                ),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                detail: format!(
                    "interval at {} cannot be split further: value {value}, error {error:e}",
                    worst.lo
                ),
            });
        }
        let left = gauss_kronrod(f, worst.lo, mid);
        let right = gauss_kronrod(f, mid, worst.hi);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically to avoid drift from incremental updates.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let mut segments = heap.into_vec();
    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(QuadratureResult {
        value: segments.iter().map(|s| s.value).sum(),
        error_estimate: segments.iter().map(|s| s.error).sum(),
        evaluations,
    })
}

/// Integrates over consecutive pieces `points[i]..points[i + 1]` and sums.
/// Each piece meets `tol` on its own.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: &F,
    points: &[f64],
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two breakpoints".into()));
    }
    let mut total = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for pair in points.windows(2) {
        let piece = integrate(f, pair[0], pair[1], tol)?;
        total.value += piece.value;
        total.error_estimate += piece.error_estimate;
        total.evaluations += piece.evaluations;
    }
    Ok(total)
}

/// Cauchy principal value of `∫ f` over `[lo, hi]` with a simple pole at `pole`.
///
/// A window of half-width `w = min(pole − lo, hi − pole)/2` is integrated as
/// `∫₀^w [f(pole + u) + f(pole − u)] du`, where the pole terms cancel; the
/// rest of the interval goes through [`integrate`].
pub fn pv_integral<F: Fn(f64) -> f64>(
    f: F,
    pole: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if !(lo < pole && pole < hi) {
        return Err(Error::PoleOutsideDomain { pole, lo, hi });
    }
    let w = 0.5 * (pole - lo).min(hi - pole);
    // Outer pieces are graded geometrically away from the pole so structure
    // on the scale of `w` is resolved even when `w` is tiny.
    let mut left_points = vec![pole - w];
    let mut reach = 4.0 * w;
    while pole - reach > lo {
        left_points.push(pole - reach);
        reach *= 4.0;
    }
    left_points.push(lo);
    left_points.reverse();
    let mut right_points = vec![pole + w];
    let mut reach = 4.0 * w;
    while pole + reach < hi {
        right_points.push(pole + reach);
        reach *= 4.0;
    }
    right_points.push(hi);
    let left = integrate_with_breakpoints(&f, &left_points, Tolerance::relative(rel_tol))?;
    let right = integrate_with_breakpoints(&f, &right_points, Tolerance::relative(rel_tol))?;
    let scale = left.value.abs() + right.value.abs();
    let paired = |u: f64| f(pole + u) + f(pole - u);
    let window = integrate(
        &paired,
        0.0,
        w,
        Tolerance {
            rel: rel_tol,
            abs: (rel_tol * scale).max(ABS_FLOOR),
        },
    )?;
    Ok(QuadratureResult {
        value: left.value + window.value + right.value,
        error_estimate: left.error_estimate + window.error_estimate + right.error_estimate,
        evaluations: left.evaluations + 2 * window.evaluations + right.evaluations,
    })
}

/// A sign-change bracket `f(lo)·f(hi) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !(f_lo * f_hi < 0.0) {
            return Err(Error::InvalidInput(format!(
                "not a bracket: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
            )));
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }
}

/// Brent's method inside a bracket. Stops when the bracket is narrower than
/// `tol` and `|f| <= tol`, or when the bracket has collapsed to adjacent floats.
pub fn refine_root<F, E>(mut f: F, bracket: RootBracket, tol: f64) -> std::result::Result<f64, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
    E: From<Error>,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ROOT_ITERATIONS {
        if fb * fc > 0.0 {
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
        let machine = 2.0 * f64::EPSILON * b.abs();
        let tol1 = machine + 0.25 * tol;
        let xm = 0.5 * (c - b);
        let width = (c - b).abs();
        if fb == 0.0 || (width <= tol && fb.abs() <= tol) || xm.abs() <= machine {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
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
        fb = f(b)?;
    }
    Err(Error::NonConvergence {
        what: "root refinement",
        detail: format!("iteration cap reached in [{}, {}]", bracket.lo, bracket.hi),
    }
    .into())
}

/// Sign-change brackets of `f` on a uniform grid of `scan_points` points.
/// Grid points where `f` vanishes exactly are returned as degenerate roots.
pub fn scan_brackets<F, E>(
    mut f: F,
    lo: f64,
    hi: f64,
    scan_points: usize,
) -> std::result::Result<(Vec<RootBracket>, Vec<f64>), E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
    E: From<Error>,
{
    if !(lo < hi) || scan_points < 2 {
        return Err(Error::InvalidInput(format!(
            "root scan needs lo < hi and at least 2 points, got [{lo}, {hi}] with {scan_points}"
        ))
        .into());
    }
    let step = (hi - lo) / (scan_points - 1) as f64;
    let grid = |i: usize| if i + 1 == scan_points { hi } else { lo + step * i as f64 };
    let mut brackets = Vec::new();
    let mut exact = Vec::new();
    let mut prev_x = grid(0);
    let mut prev_f = f(prev_x)?;
    if prev_f == 0.0 {
        exact.push(prev_x);
    }
    for i in 1..scan_points {
        let x = grid(i);
        let fx = f(x)?;
        if fx == 0.0 {
            exact.push(x);
        } else if prev_f * fx < 0.0 {
            brackets.push(RootBracket {
                lo: prev_x,
                hi: x,
                f_lo: prev_f,
                f_hi: fx,
            });
        }
        prev_x = x;
        prev_f = fx;
    }
    Ok((brackets, exact))
}

/// All sign-change roots of a fallible `f` on `[lo, hi]`, ascending.
pub fn try_find_roots<F, E>(
    mut f: F,
    lo: f64,
    hi: f64,
    scan_points: usize,
    tol: f64,
) -> std::result::Result<Vec<f64>, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
    E: From<Error>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("root tolerance must be positive, got {tol}")).into());
    }
    let (brackets, mut roots) = scan_brackets(&mut f, lo, hi, scan_points)?;
    for bracket in brackets {
        roots.push(refine_root(&mut f, bracket, tol)?);
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// All sign-change roots of `f` on `[lo, hi]`, ascending. No sign change
/// gives an empty list.
pub fn find_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    scan_points: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    try_find_roots(|x| Ok::<f64, Error>(f(x)), lo, hi, scan_points, tol)
}
