//! Adaptive Simpson quadrature for complex-valued integrands.

use num_complex::Complex;

use crate::{fl, Scalar};

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol` (applied to the complex modulus of the local error estimate).
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T, max_depth: u32) -> Complex<T>
where
    T: Scalar,
    F: Fn(T) -> Complex<T>,
{
    let m = (a + b) / fl(2.0);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson<T: Scalar>(a: T, b: T, fa: Complex<T>, fm: Complex<T>, fb: Complex<T>) -> Complex<T> {
    let h = (b - a) / fl(6.0);
    (fa + fm.scale(fl(4.0)) + fb).scale(h)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(
    f: &F,
    a: T,
    b: T,
    fa: Complex<T>,
    fm: Complex<T>,
    fb: Complex<T>,
    whole: Complex<T>,
    tol: T,
    depth: u32,
) -> Complex<T>
where
    T: Scalar,
    F: Fn(T) -> Complex<T>,
{
    let m = (a + b) / fl(2.0);
    let lm = (a + m) / fl(2.0);
    let rm = (m + b) / fl(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= fl::<T>(15.0) * tol {
        // Richardson correction of the composite estimate.
        return left + right + delta.scale(T::one() / fl(15.0));
    }
    let half_tol = tol / fl(2.0);
    recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}
