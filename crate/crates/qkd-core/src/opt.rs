//! Scalar golden-section minimizer shared by the search routines.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a unimodal function on [lo, hi] to within `tol` in the
/// argument. Returns the best sampled point and its value.
pub(crate) fn golden_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    if fmid <= fc && fmid <= fd {
        (mid, fmid)
    } else if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
