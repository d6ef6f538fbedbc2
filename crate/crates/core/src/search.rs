//! Bounded scalar maximization.

use crate::scalar::Real;

/// Result of a bounded one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `xtol`. Endpoints are evaluated too, so a
/// maximum on the boundary is returned exactly.
pub fn golden_section_max<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, xtol: T) -> ScalarMax<T> {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut evaluations = 0;
    let mut eval = |x: T, n: &mut usize| {
        *n += 1;
        f(x)
    };
    let mut best = ScalarMax {
        x: lo,
        value: eval(lo, &mut evaluations),
        evaluations: 0,
    };
    let fhi = eval(hi, &mut evaluations);
    if fhi >= best.value {
        best.x = hi;
        best.value = fhi;
    }
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = eval(c, &mut evaluations);
    let mut fd = eval(d, &mut evaluations);
    while hi - lo > xtol && evaluations < 500 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c, &mut evaluations);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d, &mut evaluations);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best.x = x;
            best.value = v;
        }
    }
    best.evaluations = evaluations;
    best
}

/// Brent's bounded minimizer (golden section plus parabolic steps) applied
/// to `-f`. The endpoints and `x0` (if given) are evaluated as candidates,
/// and the best point seen is returned.
pub fn brent_max<T: Real>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    x0: Option<T>,
    xtol: T,
    max_evals: usize,
) -> ScalarMax<T> {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut evaluations = 0usize;
    let mut best = ScalarMax {
        x: a,
        value: T::neg_infinity(),
        evaluations: 0,
    };
    let mut eval = |x: T, best: &mut ScalarMax<T>, n: &mut usize| {
        *n += 1;
        let v = f(x);
        if v > best.value || (v == best.value && x.abs() < best.x.abs()) {
            best.x = x;
            best.value = v;
        }
        -v
    };
    if let Some(x0) = x0 {
        eval(x0, &mut best, &mut evaluations);
    }
    eval(a, &mut best, &mut evaluations);
    eval(b, &mut best, &mut evaluations);
    if b - a <= xtol {
        best.evaluations = evaluations;
        return best;
    }

    let c = T::lit(0.381_966_011_250_105_1);
    let eps = T::epsilon().sqrt();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut x = a + c * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x, &mut best, &mut evaluations);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();

    while evaluations < max_evals {
        let m = half * (a + b);
        let tol1 = eps * x.abs() + xtol / T::lit(3.0);
        let tol2 = two * tol1;
        if (x - m).abs() <= tol2 - half * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (half * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = c * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u, &mut best, &mut evaluations);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    best.evaluations = evaluations;
    best
}
