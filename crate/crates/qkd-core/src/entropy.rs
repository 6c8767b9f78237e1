//! Binary entropy, Bell-diagonal error states, and one-way key rates.

use crate::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Binary entropy in bits. Exact zero at both endpoints.
pub fn h2(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("h2 argument {p} outside [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok((-p * p.ln() - (1.0 - p) * (-p).ln_1p()) / LN_2)
}

/// Shannon entropy in bits of an arbitrary sub-normalized weight list.
/// Zero weights contribute nothing.
fn shannon<I: IntoIterator<Item = f64>>(ps: I) -> f64 {
    let mut h = 0.0;
    for p in ps {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h / LN_2
}

/// Bell-diagonal two-qubit state written as the probabilities of the four
/// Pauli error patterns acting on half of a perfect pair: identity, bit
/// flip, combined flip, phase flip.
///
/// The bit error rate seen by the parties is `p_x + p_y`; the phase error
/// rate relevant for privacy amplification is `p_z + p_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiag {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl BellDiag {
    /// Accepts probabilities that are nonnegative up to -1e-12 (clamped)
    /// and normalized up to 1e-9 (renormalized when off by more than
    /// 1e-12). Anything worse is rejected.
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<BellDiag> {
        let mut p = [p_i, p_x, p_y, p_z];
        for v in &mut p {
            if !v.is_finite() || *v < -1e-12 {
                return Err(Error::Domain(format!(
                    "Bell-diagonal weight {v} is negative or not finite"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "Bell-diagonal weights sum to {sum}, not 1"
            )));
        }
        if (sum - 1.0).abs() > 1e-12 {
            for v in &mut p {
                *v /= sum;
            }
        }
        Ok(BellDiag { p_i: p[0], p_x: p[1], p_y: p[2], p_z: p[3] })
    }

    pub fn bit_error(&self) -> f64 {
        self.p_x + self.p_y
    }

    pub fn phase_error(&self) -> f64 {
        self.p_z + self.p_y
    }
}

/// Joint distribution of the (bit flip, phase flip) indicator pair.
/// `p[bit][phase]`: no flip maps to `p_i`, a lone bit flip to `p_x`,
/// a lone phase flip to `p_z`, and both together to `p_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointErrorDist {
    pub p: [[f64; 2]; 2],
}

pub fn joint_dist(s: &BellDiag) -> JointErrorDist {
    JointErrorDist { p: [[s.p_i, s.p_z], [s.p_x, s.p_y]] }
}

impl JointErrorDist {
    pub fn entropy(&self) -> f64 {
        shannon(self.p.iter().flatten().copied())
    }

    pub fn bit_marginal(&self) -> f64 {
        self.p[1][0] + self.p[1][1]
    }

    pub fn phase_marginal(&self) -> f64 {
        self.p[0][1] + self.p[1][1]
    }

    /// Mutual information between the two flip indicators, in bits.
    pub fn mutual_information(&self) -> Result<f64> {
        let hx = h2(self.bit_marginal())?;
        let hz = h2(self.phase_marginal())?;
        Ok(hx + hz - self.entropy())
    }
}

/// Entropy of the phase flip conditioned on the bit flip, in [0, 1].
pub fn cond_entropy_z_given_x(s: &BellDiag) -> Result<f64> {
    let joint = joint_dist(s);
    Ok(joint.entropy() - h2(joint.bit_marginal())?)
}

/// One-way key rate: one bit, minus error correction on the bit flips,
/// minus privacy amplification against the conditioned phase flips.
pub fn rate_one_way(s: &BellDiag) -> Result<f64> {
    Ok(1.0 - h2(s.bit_error())? - cond_entropy_z_given_x(s)?)
}

/// Same rate written through the marginals: correlations between the two
/// flips are credited back as mutual information.
pub fn rate_one_way_mi(s: &BellDiag) -> Result<f64> {
    let joint = joint_dist(s);
    Ok(1.0 - h2(s.bit_error())? - h2(s.phase_error())? + joint.mutual_information()?)
}
