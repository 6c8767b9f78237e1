//! Geometry of the four SARG04 signal states and the error-rate bounds
//! they impose on single-photon and two-photon signals.
//!
//! Everything is written in the x basis: `|0_x> = (1, 0)`. The four signal
//! states are unit vectors at angles `pi/8 - m*pi/4`, so consecutive states
//! overlap in `|<phi_m|phi_{m+1}>|^2 = 1/2` and the quarter-turn rotation
//! maps each state to the previous one. The quarter turn to the fourth
//! power is `-I`, not `I`: the state family is periodic with period four
//! only up to global phase, and indices are reduced mod 4 throughout.

use num_complex::Complex64;

use crate::entropy::{h2, rate_one_way, BellDiag};
use crate::{Error, Protocol, Result};

const FRAC_PI_8: f64 = std::f64::consts::FRAC_PI_8;
const FRAC_PI_4: f64 = std::f64::consts::FRAC_PI_4;

/// Single-qubit state or bra, stored as x-basis components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitVec {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl QubitVec {
    pub fn new(c0: Complex64, c1: Complex64) -> QubitVec {
        QubitVec { c0, c1 }
    }

    pub fn from_real(c0: f64, c1: f64) -> QubitVec {
        QubitVec::new(Complex64::new(c0, 0.0), Complex64::new(c1, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    /// `<self|other>`, conjugating self.
    pub fn inner(&self, other: &QubitVec) -> Complex64 {
        self.c0.conj() * other.c0 + self.c1.conj() * other.c1
    }

    pub fn scale(&self, k: Complex64) -> QubitVec {
        QubitVec::new(k * self.c0, k * self.c1)
    }
}

/// Arbitrary 2x2 complex matrix acting on a qubit in transit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveMatrix {
    pub a: [[Complex64; 2]; 2],
}

impl EveMatrix {
    pub fn from_rows(r0: [Complex64; 2], r1: [Complex64; 2]) -> EveMatrix {
        EveMatrix { a: [r0, r1] }
    }

    pub fn from_real(r0: [f64; 2], r1: [f64; 2]) -> EveMatrix {
        EveMatrix::from_rows(
            [Complex64::new(r0[0], 0.0), Complex64::new(r0[1], 0.0)],
            [Complex64::new(r1[0], 0.0), Complex64::new(r1[1], 0.0)],
        )
    }

    pub fn identity() -> EveMatrix {
        EveMatrix::from_real([1.0, 0.0], [0.0, 1.0])
    }

    pub fn apply(&self, v: &QubitVec) -> QubitVec {
        QubitVec::new(
            self.a[0][0] * v.c0 + self.a[0][1] * v.c1,
            self.a[1][0] * v.c0 + self.a[1][1] * v.c1,
        )
    }

    pub fn mul(&self, rhs: &EveMatrix) -> EveMatrix {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.a[i][0] * rhs.a[0][j] + self.a[i][1] * rhs.a[1][j];
            }
        }
        EveMatrix { a: out }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().flatten().all(|c| c.norm_sqr() == 0.0)
    }
}

/// m-th signal state. Any integer index is accepted; only its residue
/// mod 4 matters.
pub fn sarg_state(m: i64) -> QubitVec {
    let theta = FRAC_PI_8 - (m.rem_euclid(4) as f64) * FRAC_PI_4;
    QubitVec::from_real(theta.cos(), theta.sin())
}

/// Quarter-turn rotation to the k-th power (k may be negative). Maps
/// `sarg_state(m)` to `sarg_state(m - k)` up to sign.
pub fn rotation_pow(k: i32) -> EveMatrix {
    let ang = k as f64 * FRAC_PI_4;
    EveMatrix::from_real([ang.cos(), -ang.sin()], [ang.sin(), ang.cos()])
}

/// Sifting filter: keeps the part of the signal that the receiver accepts,
/// diag(sin pi/8, cos pi/8) in the x basis.
pub fn filter_f() -> EveMatrix {
    EveMatrix::from_real([FRAC_PI_8.sin(), 0.0], [0.0, FRAC_PI_8.cos()])
}

/// z-basis vectors expressed in x coordinates. `z_basis(0)` is the +1
/// eigenvector of the bit observable.
pub fn z_basis(b: u8) -> QubitVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match b {
        0 => QubitVec::from_real(s, s),
        _ => QubitVec::from_real(s, -s),
    }
}

/// Bell-diagonal state reachable by an attack on single-photon signals at
/// bit error rate `e_b`: `p_x = e_b - a`, `p_y = a`, `p_z = 3/2 e_b - a`,
/// with the free parameter constrained to `e_b/2 <= a <= e_b`.
pub fn initial_one_photon(e_b: f64, a: f64) -> Result<BellDiag> {
    if !(0.0..1.0 / 3.0).contains(&e_b) {
        return Err(Error::Domain(format!(
            "single-photon bit error rate {e_b} outside [0, 1/3)"
        )));
    }
    if a < e_b / 2.0 - 1e-12 || a > e_b + 1e-12 {
        return Err(Error::Domain(format!(
            "flip-correlation parameter {a} outside [e_b/2, e_b] for e_b = {e_b}"
        )));
    }
    let a = a.clamp(e_b / 2.0, e_b);
    let p_x = e_b - a;
    let p_y = a;
    let p_z = 1.5 * e_b - a;
    BellDiag::new(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)
}

/// One branch of the two-photon phase-error envelope.
pub fn g_func(x: f64) -> Result<f64> {
    let disc = 6.0 - 6.0 * std::f64::consts::SQRT_2 * x + 4.0 * x * x;
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "negative discriminant {disc} in envelope branch at x = {x}"
        )));
    }
    if x > 1.5 {
        // `3 - 2x + sqrt(disc)` cancels to O(1) out of O(x) terms, so past
        // the vertex the equivalent rational form keeps full precision:
        // every term below is positive once x exceeds 3/2.
        let num = (12.0 - 6.0 * std::f64::consts::SQRT_2) * x - 3.0;
        return Ok(num / (6.0 * (disc.sqrt() + 2.0 * x - 3.0)));
    }
    Ok((3.0 - 2.0 * x + disc.sqrt()) / 6.0)
}

/// Tight upper bound on the phase error rate of two-photon signals at bit
/// error rate `e_b`: the lower envelope `min_x [x e_b + g(x)]`, evaluated
/// in closed form through the stationarity condition.
pub fn phase_bound_two_photon(e_b: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&e_b) {
        return Err(Error::Domain(format!(
            "two-photon bit error rate {e_b} outside [0, 1/3]"
        )));
    }
    if e_b == 0.0 {
        // infimum as x runs off to infinity
        return Ok(0.5 - std::f64::consts::SQRT_2 / 4.0);
    }
    let t = 1.0 / 3.0 - e_b;
    let s = 3.0 * t * (6.0 / (1.0 - 9.0 * t * t)).sqrt();
    let x = (s + 3.0 * std::f64::consts::SQRT_2) / 4.0;
    Ok(x * e_b + g_func(x)?)
}

/// Same envelope minimum found by direct search: coarse grid, doubling the
/// range while the minimum sits on the right edge, then golden-section
/// refinement. Exists to cross-check the closed form.
pub fn phase_bound_two_photon_numeric(e_b: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&e_b) {
        return Err(Error::Domain(format!(
            "two-photon bit error rate {e_b} outside [0, 1/3]"
        )));
    }
    let f = |x: f64| x * e_b + g_func(x).expect("envelope branch is total on x >= 0");
    let mut lo = 0.0;
    let mut hi = 1.2;
    let (mut best_x, mut best) = (0.0, f(0.0));
    loop {
        let n = 12_000;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(x);
            if v < best {
                best = v;
                best_x = x;
            }
        }
        if best_x < hi - (hi - lo) / n as f64 * 1.5 || hi > 3e8 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    // golden-section polish around the grid minimum; the tolerance must
    // scale with the abscissa, which grows without bound as e_b -> 0
    let step = (hi - lo) / 12_000.0;
    let (mut a, mut b) = ((best_x - step).max(0.0), best_x + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 * b.abs().max(1.0) {
        let (x1, x2) = (b - phi * (b - a), a + phi * (b - a));
        if f(x1) <= f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(f(0.5 * (a + b)).min(best))
}

/// Largest two-photon bit error rate for which the worst-case state is
/// still a probability vector: the root of `e + phase_bound(e) = 1`.
pub const TWO_PHOTON_MAX_BER: f64 = 0.3153009687409354;

/// Worst-case Bell-diagonal state for two-photon signals: the phase error
/// saturates its envelope and carries no correlation with the bit error.
pub fn initial_two_photon_worst(e_b: f64) -> Result<BellDiag> {
    if !(0.0..=TWO_PHOTON_MAX_BER).contains(&e_b) {
        return Err(Error::Domain(format!(
            "two-photon bit error rate {e_b} outside [0, {TWO_PHOTON_MAX_BER}]"
        )));
    }
    let p_z = phase_bound_two_photon(e_b)?;
    BellDiag::new(1.0 - e_b - p_z, e_b, 0.0, p_z)
}

fn check_not_zero(e: &EveMatrix) -> Result<()> {
    if e.is_zero() {
        return Err(Error::Degenerate(
            "channel map is identically zero; no signal survives".into(),
        ));
    }
    Ok(())
}

/// Pauli-error weights `[w_i, w_x, w_y, w_z]` induced on a shared pair
/// when the map `e` hits the flying qubit the same way in all four state
/// "frames" (conjugated by the quarter turn) and the sifting filter is
/// applied afterwards. Weights are not normalized; the identity map gives
/// `[2, 0, 0, 0]`.
pub fn bell_projection_probs(e: &EveMatrix) -> Result<[f64; 4]> {
    check_not_zero(e)?;
    let (a11, a12) = (e.a[0][0], e.a[0][1]);
    let (a21, a22) = (e.a[1][0], e.a[1][1]);
    let diag = (a11 - a22).norm_sqr();
    let p_i = 0.5 * (a11 + a22).norm_sqr();
    let p_x = 0.25 * ((a12 + a21).norm_sqr() + diag);
    let p_y = 0.25
        * (5.0 * (a12.norm_sqr() + a21.norm_sqr()) - 6.0 * (a12 * a21.conj()).re + diag);
    let p_z = a12.norm_sqr() + a21.norm_sqr() + 0.5 * diag;
    Ok([p_i, p_x, p_y, p_z])
}

/// Same weights computed the long way: build the post-measurement pair
/// state as an explicit 4x4 operator and project it onto the four
/// maximally entangled vectors. Exists to cross-check the closed form.
pub fn bell_projection_probs_brute(e: &EveMatrix) -> Result<[f64; 4]> {
    check_not_zero(e)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let cs = |x: f64| Complex64::new(x, 0.0);

    // pair vector sum_j |j_z>|phi_j>, unnormalized, in x coordinates
    let mut psi = [zero; 4];
    for j in 0..2u8 {
        let zb = z_basis(j);
        let ph = sarg_state(j as i64);
        psi[0] += zb.c0 * ph.c0;
        psi[1] += zb.c0 * ph.c1;
        psi[2] += zb.c1 * ph.c0;
        psi[3] += zb.c1 * ph.c1;
    }

    let bell = [
        [cs(s), zero, zero, cs(s)],   // identity pattern
        [cs(s), zero, zero, cs(-s)],  // bit flip
        [zero, cs(s), cs(-s), zero],  // both flips
        [zero, cs(s), cs(s), zero],   // phase flip
    ];

    let mut acc = [0.0; 4]; // [i, x, y, z]
    let f = filter_f();
    for k in 0..4 {
        let op = f.mul(&rotation_pow(-k)).mul(e).mul(&rotation_pow(k));
        // (I (x) op) |psi>
        let v = [
            op.a[0][0] * psi[0] + op.a[0][1] * psi[1],
            op.a[1][0] * psi[0] + op.a[1][1] * psi[1],
            op.a[0][0] * psi[2] + op.a[0][1] * psi[3],
            op.a[1][0] * psi[2] + op.a[1][1] * psi[3],
        ];
        for (slot, b) in acc.iter_mut().zip(bell.iter()) {
            let amp: Complex64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
            *slot += amp.norm_sqr();
        }
    }
    Ok(acc)
}

/// The two hypotheses under which every distillation step keeps improving
/// the state: returns them as booleans for a candidate initial state with
/// bit error `e_b`, correlation parameter `a`, and phase-to-bit ratio `xi`.
pub fn monotonicity_conditions(e_b: f64, a: f64, xi: f64) -> Result<(bool, bool)> {
    if xi < 1.0 {
        return Err(Error::Domain(format!(
            "phase-to-bit ratio {xi} below 1 is outside the model"
        )));
    }
    let first = e_b < (1.0 + 4.0 * a) / (2.0 * (1.0 + xi));
    let second = e_b < 1.0 / (2.0 * xi);
    Ok((first, second))
}

/// Zero of a decreasing rate function on (0, 0.3]: coarse scan for a sign
/// change, then bisection to 1e-7.
fn falling_root(rate: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut lo = 1e-6;
    if rate(lo)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = lo;
    let mut found = false;
    for i in 1..=300 {
        let e = i as f64 * 1e-3;
        if rate(e)? <= 0.0 {
            hi = e;
            found = true;
            break;
        }
        lo = e;
    }
    if !found {
        return Err(Error::Domain(
            "rate stayed positive over the whole scan range".into(),
        ));
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tolerable bit error rate with one-way postprocessing only.
pub fn one_way_threshold(protocol: Protocol) -> Result<f64> {
    match protocol {
        Protocol::Bb84 => falling_root(|e| Ok(1.0 - 2.0 * h2(e)?)),
        Protocol::Sarg1 => {
            // worst case over the free parameter is a = e_b/2
            falling_root(|e| rate_one_way(&initial_one_photon(e, e / 2.0)?))
        }
        Protocol::Sarg2 => {
            falling_root(|e| Ok(1.0 - h2(e)? - h2(phase_bound_two_photon(e)?)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn state_family_geometry() {
        for m in 0..4 {
            let v = sarg_state(m);
            assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
            let next = sarg_state(m + 1);
            assert!(
                (v.inner(&next).norm_sqr() - 0.5).abs() < 1e-15,
                "adjacent overlap at m = {m}"
            );
            // rotation sends state m+1 to state m
            let rot = rotation_pow(1).apply(&sarg_state(m + 1));
            let align = rot.inner(&v).norm();
            assert!((align - 1.0).abs() < 1e-14, "rotation alignment at m = {m}");
        }
        assert_eq!(sarg_state(-3), sarg_state(1));
        assert_eq!(sarg_state(7), sarg_state(3));

        // fourth power of the quarter turn is -I entrywise
        let r4 = rotation_pow(4);
        assert!((r4.a[0][0].re + 1.0).abs() < 1e-15 && (r4.a[1][1].re + 1.0).abs() < 1e-15);
        assert!(r4.a[0][1].norm() < 1e-15 && r4.a[1][0].norm() < 1e-15);

        // filtered acceptance probability is 1/4 for the two encoding states
        let f = filter_f();
        for m in 0..2 {
            let fv = f.apply(&sarg_state(m));
            assert!((fv.norm_sqr() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn one_photon_state_example() {
        let s = initial_one_photon(0.1, 0.05).unwrap();
        assert!((s.p_i - 0.8).abs() < 1e-15);
        assert!((s.p_x - 0.05).abs() < 1e-15);
        assert!((s.p_y - 0.05).abs() < 1e-15);
        assert!((s.p_z - 0.10).abs() < 1e-15);

        assert!(initial_one_photon(0.34, 0.2).is_err());
        assert!(initial_one_photon(0.1, 0.04).is_err());
        assert!(initial_one_photon(0.1, 0.11).is_err());
        assert!(initial_one_photon(0.199, 0.0995).is_ok());
    }

    #[test]
    fn envelope_reference_points() {
        assert!((g_func(0.0).unwrap() - (3.0 + 6f64.sqrt()) / 6.0).abs() < 1e-15);
        // exact interior point: the minimum at e_b = 1/6 lands on x = sqrt(2)
        assert!((phase_bound_two_photon(1.0 / 6.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(
            (phase_bound_two_photon(0.0).unwrap() - (0.5 - SQRT_2 / 4.0)).abs() < 1e-15
        );
        assert!(phase_bound_two_photon(0.35).is_err());
    }

    #[test]
    fn envelope_closed_form_matches_search() {
        for &e in &[0.0, 1e-4, 0.01, 0.05, 1.0 / 6.0, 0.25, 0.3, 1.0 / 3.0] {
            let c = phase_bound_two_photon(e).unwrap();
            let n = phase_bound_two_photon_numeric(e).unwrap();
            assert!((c - n).abs() < 1e-9, "envelope mismatch at e_b = {e}: {c} vs {n}");
        }
    }

    #[test]
    fn two_photon_worst_state() {
        let s = initial_two_photon_worst(0.1).unwrap();
        assert_eq!(s.p_y, 0.0);
        assert!((s.p_x - 0.1).abs() < 1e-15);
        assert!((s.p_z - phase_bound_two_photon(0.1).unwrap()).abs() < 1e-15);

        // the cap is exactly where the identity weight runs out
        let e = TWO_PHOTON_MAX_BER;
        assert!((e + phase_bound_two_photon(e).unwrap() - 1.0).abs() < 1e-12);
        assert!(initial_two_photon_worst(e + 1e-6).is_err());
    }

    #[test]
    fn projection_weights_identity_map() {
        let p = bell_projection_probs(&EveMatrix::identity()).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-15);
        assert!(p[1].abs() < 1e-15 && p[2].abs() < 1e-15 && p[3].abs() < 1e-15);
        let b = bell_projection_probs_brute(&EveMatrix::identity()).unwrap();
        for (x, y) in p.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let zero = EveMatrix::from_real([0.0, 0.0], [0.0, 0.0]);
        assert!(matches!(
            bell_projection_probs(&zero),
            Err(crate::Error::Degenerate(_))
        ));
    }

    #[test]
    fn projection_weights_swap_map() {
        // pure swap: all weight moves to the flip patterns
        let e = EveMatrix::from_real([0.0, 1.0], [1.0, 0.0]);
        let p = bell_projection_probs(&e).unwrap();
        let b = bell_projection_probs_brute(&e).unwrap();
        for (x, y) in p.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12, "{p:?} vs {b:?}");
        }
        assert!(p[0].abs() < 1e-15);
        // bit and phase weights keep the 2/3 ratio typical for this family
        assert!((p[1] + p[2] - 2.0 / 3.0 * (p[3] + p[2])).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_example() {
        assert_eq!(monotonicity_conditions(0.199, 0.0995, 1.5).unwrap(), (true, true));
        assert!(monotonicity_conditions(0.1, 0.05, 0.5).is_err());
        let (c1, c2) = monotonicity_conditions(0.4, 0.0, 1.5).unwrap();
        assert!(!c1 && !c2);
    }

    #[test]
    fn one_way_thresholds() {
        let bb = one_way_threshold(Protocol::Bb84).unwrap();
        let s1 = one_way_threshold(Protocol::Sarg1).unwrap();
        let s2 = one_way_threshold(Protocol::Sarg2).unwrap();
        // all three computed independently with 50-digit arithmetic
        assert!((bb - 0.11002786443810768).abs() < 1e-7, "got {bb}");
        assert!((s1 - 0.0968924893876465).abs() < 1e-7, "got {s1}");
        assert!((s2 - 0.027100931507354608).abs() < 1e-7, "got {s2}");
    }
}
