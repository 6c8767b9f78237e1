//! Intercept-and-resend bounds: Eve measures a one- or two-photon signal
//! with some POVM, learns what she can, and sends Bob a fresh qubit of her
//! choosing. The smallest bit error rate any such attack can induce among
//! Bob's accepted conclusive results caps the error rate at which the
//! corresponding photon-number contribution can still carry secret key.
//!
//! For a fixed resent qubit the accepted-error and accepted-total weights
//! are quadratic forms in Eve's measurement element, so the optimum over
//! measurements is a generalized eigenvalue problem. The state search on
//! top of that is a Bloch-sphere grid with local refinement.

use num_complex::Complex64;

use crate::linalg::{hermitian_eig, CMatrix};
use crate::opt::golden_min;
use crate::sarg::{filter_f, rotation_pow, sarg_state, z_basis, QubitVec};
use crate::{Error, Result};

/// Smallest bit error rate any intercept-and-resend attack can induce on
/// two-photon signals: (3 - sqrt 2) / 7. Two-photon contributions observed
/// at or above this error rate are treated as fully compromised.
pub const TWO_PHOTON_ATTACK_BER: f64 = (3.0 - std::f64::consts::SQRT_2) / 7.0;

/// Error rate reached by a sloppy attack that measures each photon
/// separately and resends a product state, as a function of the
/// combined-flip weight `a` it induces. Self-consistent points sit at
/// a = e/2 (rate 1/4) and a = e (rate 1/3).
pub fn separability_threshold(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Domain(format!(
            "combined-flip weight {a} outside [0, 1]"
        )));
    }
    Ok(0.2 + 0.4 * a)
}

fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn tensor2(a: &QubitVec, b: &QubitVec) -> Vec<Complex64> {
    vec![a.c0 * b.c0, a.c0 * b.c1, a.c1 * b.c0, a.c1 * b.c1]
}

fn tensor_pow(v: &QubitVec, nu: u8) -> Vec<Complex64> {
    match nu {
        1 => vec![v.c0, v.c1],
        _ => tensor2(v, v),
    }
}

fn check_photon_number(nu: u8) -> Result<()> {
    if nu == 1 || nu == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "photon number {nu} unsupported; expected 1 or 2"
        )))
    }
}

/// Error and acceptance operators on the signal space for a fixed resent
/// qubit `sigma`. For Eve element `M`, `tr(M N)` weighs Bob's conclusive
/// wrong bits and `tr(M D)` all his conclusive bits, both summed over the
/// signal states and sifting branches.
pub fn build_num_den(sigma: &QubitVec, nu: u8) -> Result<(CMatrix, CMatrix)> {
    check_photon_number(nu)?;
    if (sigma.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "resent state norm {} is not 1",
            sigma.norm_sqr().sqrt()
        )));
    }
    let dim = 1usize << nu;
    let mut num = CMatrix::zeros(dim);
    let mut den = CMatrix::zeros(dim);
    for k in 0..4i32 {
        let bob = filter_f().mul(&rotation_pow(-k)).apply(sigma);
        let w = [
            z_basis(0).inner(&bob).norm_sqr(),
            z_basis(1).inner(&bob).norm_sqr(),
        ];
        for j in 0..2i64 {
            let phi = tensor_pow(&sarg_state(j - k as i64), nu);
            let proj = CMatrix::outer(&phi);
            num = num.add(&proj.scale(w[(1 - j) as usize]));
            den = den.add(&proj.scale(w[0] + w[1]));
        }
    }
    Ok((num, den))
}

/// Smallest generalized eigenvalue of `(num, den)` restricted to the range
/// of `den`, which is the best error-per-acceptance ratio any single
/// measurement element supported there can achieve.
/// Projects the pencil onto the numerical range of `den` and solves the
/// whitened problem there. Returns the eigenpairs of the reduced matrix
/// together with the basis (columns and their `den` eigenvalues) needed
/// to map eigenvectors back.
#[allow(clippy::type_complexity)]
fn reduced_pencil(
    num: &CMatrix,
    den: &CMatrix,
) -> Result<(Vec<f64>, CMatrix, Vec<Vec<Complex64>>, Vec<f64>)> {
    let (vals, vecs) = hermitian_eig(den)?;
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 1e-300 {
        return Err(Error::Degenerate(
            "acceptance operator vanishes; Bob never concludes".into(),
        ));
    }
    let cutoff = 1e-10 * lmax;
    let range: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cutoff).collect();
    if range.is_empty() {
        return Err(Error::Degenerate(
            "acceptance operator has empty numerical range".into(),
        ));
    }
    let cols: Vec<Vec<Complex64>> = range.iter().map(|&i| vecs.column(i)).collect();
    let kept: Vec<f64> = range.iter().map(|&i| vals[i]).collect();
    let r = range.len();
    let mut reduced = CMatrix::from_fn(r, |a, b| {
        let nv = num.mul_vec(&cols[b]);
        vdot(&cols[a], &nv) / (kept[a] * kept[b]).sqrt()
    });
    reduced = reduced.add(&reduced.dagger()).scale(0.5);
    let (mvals, mvecs) = hermitian_eig(&reduced)?;
    Ok((mvals, mvecs, cols, kept))
}

/// All generalized eigenvalues of the error-rate pencil on the range of
/// the acceptance operator, ascending.
pub fn generalized_spectrum(num: &CMatrix, den: &CMatrix) -> Result<Vec<f64>> {
    Ok(reduced_pencil(num, den)?.0)
}

fn min_generalized_eig(num: &CMatrix, den: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    let (mvals, mvecs, cols, kept) = reduced_pencil(num, den)?;
    let y = mvecs.column(0);
    let n = num.n;
    let mut vec = vec![Complex64::new(0.0, 0.0); n];
    for (a, col) in cols.iter().enumerate() {
        let coef = y[a] / kept[a].sqrt();
        for i in 0..n {
            vec[i] += coef * col[i];
        }
    }
    let norm = vec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in vec.iter_mut() {
        *c /= norm;
    }
    Ok((mvals[0].max(0.0), vec))
}

/// Minimal induced error rate over Eve's measurements when every outcome
/// resends the same qubit `sigma`.
pub fn min_ber_given_state(sigma: &QubitVec, nu: u8) -> Result<f64> {
    let (num, den) = build_num_den(sigma, nu)?;
    Ok(min_generalized_eig(&num, &den)?.0)
}

/// One-photon minimum in closed form as a function of
/// `c = |sigma_0^2 + sigma_1^2|` of the resent state in the measurement
/// basis. Decreases from 1/2 at c = 0 to 1/3 at c = 1.
pub fn closed_form_one_photon(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("state invariant {c} outside [0, 1]")));
    }
    Ok((2.0 - c) / (4.0 - c))
}

/// Bloch angles to a concrete resent state, stored in the coordinates the
/// signal family uses.
pub fn resend_state(theta_y: f64, theta_z: f64) -> QubitVec {
    let a = Complex64::new((0.5 * theta_y).cos(), 0.0);
    let b = Complex64::from_polar((0.5 * theta_y).sin(), theta_z);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QubitVec::new((a + b) * s, (a - b) * s)
}

/// Global minimum of the induced error rate over both the resent state
/// and Eve's measurement: grid over the Bloch sphere, then alternating
/// golden-section refinement per angle. Returns the minimum and the
/// angles attaining it.
pub fn min_ber_over_states(nu: u8, grid: usize) -> Result<(f64, f64, f64)> {
    check_photon_number(nu)?;
    if grid < 64 {
        return Err(Error::Domain(format!(
            "grid of {grid} points per axis is too coarse; need at least 64"
        )));
    }
    let eval = |ty: f64, tz: f64| -> Result<f64> {
        min_ber_given_state(&resend_state(ty, tz), nu)
    };
    let pi = std::f64::consts::PI;
    let mut best = f64::INFINITY;
    let (mut by, mut bz) = (0.0, 0.0);
    for i in 0..grid {
        let ty = pi * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let tz = 2.0 * pi * j as f64 / grid as f64;
            let v = eval(ty, tz)?;
            if v < best {
                best = v;
                by = ty;
                bz = tz;
            }
        }
    }
    let dy = pi / (grid - 1) as f64;
    let dz = 2.0 * pi / grid as f64;
    for _ in 0..3 {
        let (y, vy) = golden_min(
            |t| eval(t, bz).unwrap_or(f64::INFINITY),
            (by - dy).max(0.0),
            (by + dy).min(pi),
            1e-8,
        );
        if vy < best {
            best = vy;
            by = y;
        }
        let (z, vz) = golden_min(
            |t| eval(by, t).unwrap_or(f64::INFINITY),
            bz - dz,
            bz + dz,
            1e-8,
        );
        if vz < best {
            best = vz;
            bz = z;
        }
    }
    Ok((best, by, bz))
}

/// A full intercept-and-resend strategy: measurement elements paired with
/// the qubit Eve resends on that outcome, plus an optional element on
/// which she suppresses the signal entirely.
pub struct EveStrategy {
    elements: Vec<(CMatrix, QubitVec)>,
    vacuum: Option<CMatrix>,
    photon_number: u8,
}

fn assert_psd(m: &CMatrix, what: &str) -> Result<()> {
    let (vals, _) = hermitian_eig(m)?;
    let floor = -1e-10 * m.max_abs().max(1.0);
    if vals.first().copied().unwrap_or(0.0) < floor {
        return Err(Error::Domain(format!(
            "{what} has negative eigenvalue {}",
            vals[0]
        )));
    }
    Ok(())
}

impl EveStrategy {
    pub fn new(
        elements: Vec<(CMatrix, QubitVec)>,
        vacuum: Option<CMatrix>,
        photon_number: u8,
    ) -> Result<EveStrategy> {
        check_photon_number(photon_number)?;
        let dim = 1usize << photon_number;
        let mut total = CMatrix::zeros(dim);
        for (i, (m, sigma)) in elements.iter().enumerate() {
            if m.n != dim {
                return Err(Error::Domain(format!(
                    "element {i} acts on dimension {}, signal space has {dim}",
                    m.n
                )));
            }
            assert_psd(m, &format!("measurement element {i}"))?;
            if (sigma.norm_sqr() - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "resent state of element {i} is not normalized"
                )));
            }
            total = total.add(m);
        }
        if let Some(v) = &vacuum {
            if v.n != dim {
                return Err(Error::Domain(
                    "vacuum element dimension mismatch".into(),
                ));
            }
            assert_psd(v, "vacuum element")?;
            total = total.add(v);
        }
        let slack = CMatrix::identity(dim).sub(&total);
        assert_psd(&slack, "identity minus the element sum")?;
        Ok(EveStrategy { elements, vacuum, photon_number })
    }

    pub fn elements(&self) -> &[(CMatrix, QubitVec)] {
        &self.elements
    }

    pub fn vacuum(&self) -> Option<&CMatrix> {
        self.vacuum.as_ref()
    }

    pub fn photon_number(&self) -> u8 {
        self.photon_number
    }

    /// Bit error rate among Bob's conclusive results under this strategy.
    /// Outcomes mapped to vacuum never reach Bob and drop out.
    pub fn induced_ber(&self) -> Result<f64> {
        let mut wrong = 0.0;
        let mut accepted = 0.0;
        for (m, sigma) in &self.elements {
            let (num, den) = build_num_den(sigma, self.photon_number)?;
            wrong += m.mul(&num).trace().re;
            accepted += m.mul(&den).trace().re;
        }
        if accepted <= 1e-12 {
            return Err(Error::Degenerate(
                "strategy never produces a conclusive result".into(),
            ));
        }
        Ok(wrong / accepted)
    }
}

/// The naive one-photon attack: measure in the signal family itself and
/// resend whatever was found. Induces an error rate of 1/3.
pub fn one_photon_projective_strategy() -> Result<EveStrategy> {
    let elements = (0..4)
        .map(|m| {
            let phi = sarg_state(m);
            (CMatrix::outer(&tensor_pow(&phi, 1)).scale(0.5), phi)
        })
        .collect();
    EveStrategy::new(elements, None, 1)
}

/// Resend state minimizing the accepted-error ratio for a fixed Eve
/// outcome vector `psi`: the pencil dual to [`build_num_den`], with the
/// roles of measurement and state exchanged.
fn best_resend_for_outcome(psi: &[Complex64]) -> Result<QubitVec> {
    let mut num = CMatrix::zeros(2);
    let mut den = CMatrix::zeros(2);
    for k in 0..4i32 {
        let back = rotation_pow(k).mul(&filter_f());
        let u: Vec<Vec<Complex64>> = (0..2)
            .map(|b| {
                let q = back.apply(&z_basis(b));
                vec![q.c0, q.c1]
            })
            .collect();
        for j in 0..2i64 {
            let phi = tensor_pow(&sarg_state(j - k as i64), 2);
            let w = vdot(psi, &phi).norm_sqr();
            num = num.add(&CMatrix::outer(&u[(1 - j) as usize]).scale(w));
            den = den.add(&CMatrix::outer(&u[0]).scale(w));
            den = den.add(&CMatrix::outer(&u[1]).scale(w));
        }
    }
    let (_, sigma) = min_generalized_eig(&num, &den)?;
    Ok(QubitVec::new(sigma[0], sigma[1]))
}

/// The optimal two-photon attack: four rank-one elements built from
/// same-state pairs of the signal family plus their antipodes, a vacuum
/// element on the leftover antisymmetric direction, and per-outcome
/// resend states chosen to minimize the induced error. Reaches the global
/// two-photon minimum on every outcome simultaneously.
pub fn two_photon_optimal_strategy() -> Result<EveStrategy> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let lp = (2.0 + sqrt2) / 4.0;
    let lm = (-2.0 + sqrt2) / 4.0;
    let mut elements = Vec::with_capacity(4);
    for m in 0..4i64 {
        let same = tensor_pow(&sarg_state(m), 2);
        let anti = tensor_pow(&sarg_state(m + 2), 2);
        let psi: Vec<Complex64> = same
            .iter()
            .zip(&anti)
            .map(|(a, b)| a * lp + b * lm)
            .collect();
        let sigma = best_resend_for_outcome(&psi)?;
        elements.push((CMatrix::outer(&psi), sigma));
    }
    let s02 = tensor2(&sarg_state(0), &sarg_state(2));
    let s20 = tensor2(&sarg_state(2), &sarg_state(0));
    let singlet: Vec<Complex64> = s02.iter().zip(&s20).map(|(a, b)| a - b).collect();
    let vacuum = CMatrix::outer(&singlet).scale(0.5);
    EveStrategy::new(elements, Some(vacuum), 2)
}
