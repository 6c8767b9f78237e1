//! Two-way postprocessing: bit-parity (B) and phase-majority (P) steps on
//! Bell-diagonal states, the residual one-way rate after a step sequence,
//! and the largest tolerable channel error for each protocol.
//!
//! The public step functions work on plain `BellDiag` states. Sequence
//! evolution runs on an internal shadow representation with extended
//! exponents, because the interesting marginals shrink doubly
//! exponentially in the number of B steps and leave f64 range long before
//! the residual rate changes sign.

use std::fmt;
use std::str::FromStr;

use crate::entropy::{h2, BellDiag};
use crate::sarg::{initial_one_photon, initial_two_photon_worst, TWO_PHOTON_MAX_BER};
use crate::xf::Xf;
use crate::{Error, Protocol, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Longest sequence the library evolves. Beyond this the tolerable-error
/// search gains nothing measurable and the exhaustive search space doubles
/// per step.
pub const MAX_STEPS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// Bit-parity comparison across two pairs; survivors keep one pair.
    B,
    /// Phase-majority vote across three pairs; one pair survives.
    P,
}

/// Ordered list of distillation steps, at most [`MAX_STEPS`] long.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepSequence(Vec<Step>);

impl StepSequence {
    pub fn new(steps: Vec<Step>) -> Result<StepSequence> {
        if steps.len() > MAX_STEPS {
            return Err(Error::Domain(format!(
                "sequence of {} steps exceeds the supported maximum of {MAX_STEPS}",
                steps.len()
            )));
        }
        Ok(StepSequence(steps))
    }

    pub fn empty() -> StepSequence {
        StepSequence(Vec::new())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for StepSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for s in &self.0 {
            write!(f, "{}", if *s == Step::B { 'B' } else { 'P' })?;
        }
        Ok(())
    }
}

impl FromStr for StepSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<StepSequence> {
        if s == "-" {
            return StepSequence::new(Vec::new());
        }
        let steps = s
            .chars()
            .map(|c| match c {
                'B' | 'b' => Ok(Step::B),
                'P' | 'p' => Ok(Step::P),
                other => Err(Error::Domain(format!(
                    "unknown step character {other:?}; expected B or P"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        StepSequence::new(steps)
    }
}

/// One bit-parity step. Returns the surviving state and the survival
/// probability of the parity check (the pair-count yield is half of it).
pub fn b_step(s: &BellDiag) -> Result<(BellDiag, f64)> {
    let t_z = s.p_x + s.p_y;
    let p_s = 1.0 - 2.0 * t_z * (1.0 - t_z);
    if p_s <= 1e-15 {
        return Err(Error::Degenerate(format!(
            "parity check survives with probability {p_s}; nothing to keep"
        )));
    }
    let p_x = (s.p_x * s.p_x + s.p_y * s.p_y) / p_s;
    let p_y = 2.0 * s.p_x * s.p_y / p_s;
    let p_z = 2.0 * s.p_i * s.p_z / p_s;
    Ok((BellDiag::new(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)?, p_s))
}

/// One phase-majority step: bit errors add mod 2, phase errors go to a
/// majority vote, and exactly one pair in three survives.
pub fn p_step(s: &BellDiag) -> Result<BellDiag> {
    let (pi, px, py, pz) = (s.p_i, s.p_x, s.p_y, s.p_z);
    let p_x = 3.0 * pi * pi * (px + py) + 6.0 * pi * px * pz + 3.0 * px * px * py + px.powi(3);
    let p_y = 6.0 * pi * py * pz + 3.0 * px * (py * py + pz * pz) + 3.0 * py * pz * pz
        + py.powi(3);
    let p_z = 3.0 * pi * (py * py + pz * pz) + 6.0 * px * py * pz + 3.0 * py * py * pz
        + pz.powi(3);
    BellDiag::new(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)
}

/// Shadow state: the two small marginals plus the offsets of the phase
/// sector from 1/2. `u = 1/2 - p_z - p_y` and `w = 1/2 - p_x - p_z` obey
/// closed recursions of their own, which is what keeps deep sequences
/// exact while `p_i` and `p_z` cling to 1/2.
#[derive(Debug, Clone, Copy)]
struct XState {
    px: Xf,
    py: Xf,
    u: Xf,
    w: Xf,
}

impl XState {
    fn from_state(s: &BellDiag) -> XState {
        XState {
            px: Xf::new(s.p_x),
            py: Xf::new(s.p_y),
            u: Xf::new(0.5 - s.p_z - s.p_y),
            w: Xf::new(0.5 - s.p_x - s.p_z),
        }
    }

    fn snapshot(&self) -> Result<BellDiag> {
        let px = self.px.to_f64();
        let py = self.py.to_f64();
        let pz = (Xf::new(0.5) - self.u - self.py).to_f64();
        BellDiag::new(1.0 - px - py - pz, px, py, pz)
    }

    fn t_z(&self) -> Xf {
        self.px + self.py
    }

    fn apply(&self, step: Step) -> Result<(XState, f64)> {
        let one = Xf::new(1.0);
        match step {
            Step::B => {
                let t_z = self.t_z();
                let p_s = one - t_z * (one - t_z) * 2.0;
                let p_s64 = p_s.to_f64();
                if p_s64 <= 1e-15 {
                    return Err(Error::Degenerate(format!(
                        "parity check survives with probability {p_s64}"
                    )));
                }
                let next = XState {
                    px: (self.px * self.px + self.py * self.py) / p_s,
                    py: self.px * self.py * 2.0 / p_s,
                    u: (self.u * self.u + self.w * self.w) / p_s,
                    w: self.u * self.w * 2.0 / p_s,
                };
                Ok((next, 0.5 * p_s64))
            }
            Step::P => {
                let half = Xf::new(0.5);
                let pi = half + self.u - self.px;
                let pz = half - self.u - self.py;
                let (px, py) = (self.px, self.py);
                let npx = pi * pi * (px + py) * 3.0
                    + pi * px * pz * 6.0
                    + px * px * py * 3.0
                    + px * px * px;
                let npy = pi * py * pz * 6.0
                    + px * (py * py + pz * pz) * 3.0
                    + py * pz * pz * 3.0
                    + py * py * py;
                let nu = self.u * (Xf::new(1.5) - self.u * self.u * 2.0);
                let next = XState { px: npx, py: npy, u: nu, w: nu + npy - npx };
                Ok((next, 1.0 / 3.0))
            }
        }
    }
}

/// `1 - h2(1/2 - u)` evaluated without cancellation: series in `(2u)^2`
/// for small `u`, direct binary entropy otherwise.
fn one_minus_h2_half_minus(u: Xf) -> Xf {
    if u.is_zero() {
        return Xf::ZERO;
    }
    let uf = u.to_f64().abs().min(0.5);
    if uf > 0.01 {
        return Xf::new(1.0 - h2(0.5 - uf).expect("argument inside [0, 1/2]"));
    }
    let x = u * u * 4.0;
    let xf = x.to_f64();
    let factor = 1.0 + xf / 6.0 + xf * xf / 15.0 + xf * xf * xf / 28.0;
    x * Xf::new(factor / (2.0 * LN_2))
}

/// Binary entropy of a small probability in extended range.
fn h2_small(t: Xf) -> Xf {
    if t.is_zero() {
        return Xf::ZERO;
    }
    let tf = t.to_f64();
    if tf > 1e-6 {
        return Xf::new(h2(tf.min(1.0)).expect("argument inside [0, 1]"));
    }
    let lead = t * Xf::new(1.0 - t.ln());
    let corr = t * t * Xf::new(0.5 + tf / 6.0 + tf * tf / 12.0);
    (lead - corr) * Xf::new(1.0 / LN_2)
}

/// Residual one-way rate `1 - h2(t_z) - h2(t_x)` of a shadow state,
/// exact at any scale.
fn residual_rate_x(st: &XState) -> Xf {
    one_minus_h2_half_minus(st.u) - h2_small(st.t_z())
}

/// Rate that also credits bit/phase correlations: `1 - H(joint)`. The
/// dominant near-1/2 sector is expanded around its midpoint so that deep
/// states keep their sign.
fn rate_with_mi_x(st: &XState) -> Xf {
    let di = (st.u - st.px) * 2.0;
    let dz = -((st.u + st.py) * 2.0);
    let lg = |p: Xf| -> Xf {
        if p.is_zero() {
            Xf::ZERO
        } else {
            p * Xf::new(p.ln() / LN_2)
        }
    };
    let big = di.to_f64().abs().max(dz.to_f64().abs());
    if big > 0.05 {
        // everything is comfortably in f64 range here
        let pi = 0.5 * (1.0 + di.to_f64());
        let pz = 0.5 * (1.0 + dz.to_f64());
        let plg = |p: f64| if p > 0.0 { p * p.ln() / LN_2 } else { 0.0 };
        return Xf::new(1.0 + plg(pi) + plg(pz)) + lg(st.px) + lg(st.py);
    }
    // sum over both offsets of (1+d)ln(1+d) = d + d^2/2 - d^3/6 + d^4/12 - ...
    let mut series = Xf::ZERO;
    let coef = [0.5, -1.0 / 6.0, 1.0 / 12.0, -1.0 / 20.0, 1.0 / 30.0];
    for d in [di, dz] {
        let mut pw = d;
        for c in coef {
            pw = pw * d;
            series = series + pw * c;
        }
    }
    let t_z = st.t_z();
    t_z * (1.0 - 1.0 / LN_2) + series * Xf::new(1.0 / (2.0 * LN_2)) + lg(st.px) + lg(st.py)
}

/// Evolve a state through a step sequence. Returns the final state and the
/// fraction of pairs that survive (probability-weighted: each B step
/// contributes survival/2, each P step 1/3).
pub fn evolve(seq: &StepSequence, s: &BellDiag) -> Result<(BellDiag, f64)> {
    let mut st = XState::from_state(s);
    let mut kept = 1.0;
    for (i, step) in seq.steps().iter().enumerate() {
        let (next, frac) = st.apply(*step).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Degenerate(format!("step {i}: {msg}")),
            other => other,
        })?;
        st = next;
        kept *= frac;
    }
    Ok((st.snapshot()?, kept))
}

/// Like [`evolve`], but reports every intermediate state: entry 0 is the
/// input, entry k the state after k steps, each with the yield so far.
pub fn evolve_states(seq: &StepSequence, s: &BellDiag) -> Result<Vec<(BellDiag, f64)>> {
    let mut st = XState::from_state(s);
    let mut kept = 1.0;
    let mut out = vec![(*s, 1.0)];
    for (i, step) in seq.steps().iter().enumerate() {
        let (next, frac) = st.apply(*step).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Degenerate(format!("step {i}: {msg}")),
            other => other,
        })?;
        st = next;
        kept *= frac;
        out.push((st.snapshot()?, kept));
    }
    Ok(out)
}

/// Residual one-way rate (no correlation credit) after running the
/// sequence on the given state.
pub fn residual_rate(seq: &StepSequence, s: &BellDiag) -> Result<f64> {
    let mut st = XState::from_state(s);
    for (i, step) in seq.steps().iter().enumerate() {
        st = st
            .apply(*step)
            .map_err(|e| match e {
                Error::Degenerate(msg) => Error::Degenerate(format!("step {i}: {msg}")),
                other => other,
            })?
            .0;
    }
    Ok(residual_rate_x(&st).to_f64())
}

fn worst_initial(protocol: Protocol, e_b: f64) -> Result<BellDiag> {
    match protocol {
        Protocol::Sarg1 => initial_one_photon(e_b, e_b / 2.0),
        Protocol::Sarg2 => initial_two_photon_worst(e_b),
        Protocol::Bb84 => BellDiag::new(1.0 - 2.0 * e_b, e_b, 0.0, e_b),
    }
}

fn ber_cap(protocol: Protocol) -> f64 {
    match protocol {
        Protocol::Sarg1 => 1.0 / 3.0 - 1e-9,
        Protocol::Sarg2 => TWO_PHOTON_MAX_BER,
        Protocol::Bb84 => 0.5,
    }
}

fn tolerable_ber_by(
    seq: &StepSequence,
    protocol: Protocol,
    rate_positive: impl Fn(&XState) -> bool,
) -> Result<f64> {
    let positive_at = |e: f64| -> Result<bool> {
        let mut st = XState::from_state(&worst_initial(protocol, e)?);
        for step in seq.steps() {
            st = match st.apply(*step) {
                Ok((next, _)) => next,
                // a collapsing parity check means no key either way
                Err(Error::Degenerate(_)) => return Ok(false),
                Err(other) => return Err(other),
            };
        }
        Ok(rate_positive(&st))
    };

    // first sign change on a coarse grid, then bisection
    let cap = ber_cap(protocol);
    let n = 100;
    let mut lo = 0.0;
    let mut hi = cap;
    let mut crossed = false;
    for i in 1..=n {
        let e = cap * i as f64 / n as f64;
        if positive_at(e)? {
            lo = e;
        } else {
            hi = e;
            crossed = true;
            break;
        }
    }
    if !crossed {
        return Ok(cap);
    }
    if lo == 0.0 {
        // not even the first grid point sustains a positive rate
        if !positive_at(cap * 1e-6)? {
            return Ok(0.0);
        }
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if positive_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest channel bit error rate for which the residual rate after the
/// sequence stays positive on the protocol's worst-case initial state.
/// Reported as the first sign change of the rate as the error grows.
pub fn tolerable_ber(seq: &StepSequence, protocol: Protocol) -> Result<f64> {
    tolerable_ber_by(seq, protocol, |st| residual_rate_x(st).is_positive())
}

/// Variant crediting bit/phase correlations as mutual information.
pub fn tolerable_ber_with_mi(seq: &StepSequence, protocol: Protocol) -> Result<f64> {
    tolerable_ber_by(seq, protocol, |st| rate_with_mi_x(st).is_positive())
}

/// Exhaustive search over all sequences up to `max_steps` long (including
/// the empty one). Returns the sequence with the largest tolerable error.
/// Ties keep the earlier candidate: shorter first, then lexicographic with
/// B before P.
pub fn search_best_sequence(
    max_steps: usize,
    protocol: Protocol,
) -> Result<(StepSequence, f64)> {
    if max_steps > MAX_STEPS {
        return Err(Error::Domain(format!(
            "search depth {max_steps} exceeds the supported maximum of {MAX_STEPS}"
        )));
    }
    let mut best_seq = StepSequence::empty();
    let mut best = tolerable_ber(&best_seq, protocol)?;
    for len in 1..=max_steps {
        for pattern in 0u32..(1u32 << len) {
            let steps: Vec<Step> = (0..len)
                .map(|j| if pattern >> j & 1 == 0 { Step::B } else { Step::P })
                .collect();
            let seq = StepSequence(steps);
            let val = tolerable_ber(&seq, protocol)?;
            if val > best {
                best = val;
                best_seq = seq;
            }
        }
    }
    Ok((best_seq, best))
}

/// Marginal view of a Bell-diagonal state: bit error, phase error, and the
/// gap between the lone-phase and combined-flip weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TXZDelta {
    pub t_x: f64,
    pub t_z: f64,
    pub delta: f64,
}

pub fn to_txz_delta(s: &BellDiag) -> TXZDelta {
    TXZDelta { t_x: s.p_y + s.p_z, t_z: s.p_x + s.p_y, delta: s.p_z - s.p_y }
}

/// Index of the first state in the trace whose delta dips below -1e-12,
/// if any. Feed it the trace suffix starting where the claim applies.
pub fn first_negative_delta(trace: &[BellDiag]) -> Option<usize> {
    trace
        .iter()
        .position(|s| to_txz_delta(s).delta < -1e-12)
}

/// Index of the first state violating `1 - 2 t_z - 2 delta >= -1e-12`.
pub fn first_shadow_violation(trace: &[BellDiag]) -> Option<usize> {
    trace.iter().position(|s| {
        let m = to_txz_delta(s);
        1.0 - 2.0 * m.t_z - 2.0 * m.delta < -1e-12
    })
}

/// Sifted error rate a depolarizing channel of strength `p` produces.
pub fn depolarizing_ber(protocol: Protocol, p: f64) -> Result<f64> {
    if !(0.0..=0.75).contains(&p) {
        return Err(Error::Domain(format!(
            "depolarizing probability {p} outside [0, 3/4]"
        )));
    }
    Ok(match protocol {
        Protocol::Bb84 => 2.0 * p / 3.0,
        Protocol::Sarg1 | Protocol::Sarg2 => 4.0 * p / (3.0 + 4.0 * p),
    })
}

/// Depolarizing strength that produces a given sifted error rate.
pub fn depolarizing_prob(protocol: Protocol, e_b: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&e_b) {
        return Err(Error::Domain(format!(
            "sifted error rate {e_b} outside [0, 1/2]"
        )));
    }
    Ok(match protocol {
        Protocol::Bb84 => 1.5 * e_b,
        Protocol::Sarg1 | Protocol::Sarg2 => 3.0 * e_b / (4.0 * (1.0 - e_b)),
    })
}
