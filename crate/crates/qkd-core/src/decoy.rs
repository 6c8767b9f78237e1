//! Weak-coherent-pulse key rates: photon-number yields from a concrete
//! detector model, overall gains and error rates, asymptotic rates under
//! decoy-state and tagged-pulse analyses, and the distances where they
//! run out.
//!
//! The detector is four threshold detectors behind a rotated four-state
//! analyzer. A misalignment angle models the intrinsic error rate, dark
//! counts click a uniformly random detector when no photon arrives, and
//! an `n`-photon pulse is seen whenever at least one photon survives the
//! channel. Everything downstream (yields, gains, rates) is derived from
//! enumerating that model.

use serde::Serialize;

use crate::attack::TWO_PHOTON_ATTACK_BER;
use crate::entropy::{cond_entropy_z_given_x, h2};
use crate::opt::golden_min;
use crate::sarg::{initial_one_photon, phase_bound_two_photon};
use crate::{Error, Result};

/// Source/sifting scheme of the weak-coherent implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoyProtocol {
    Bb84,
    Sarg04,
}

/// Which privacy analysis prices the multi-photon pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateModel {
    /// Per-photon-number yields and error rates assumed known exactly.
    Decoy,
    /// Decoy yields, but only the single-photon contribution is kept.
    DecoyOnePhoton,
    /// Tagged-pulse worst case: every multi-photon pulse is given away.
    Gllp,
}

/// Fiber and receiver parameters of a transmission experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Fiber loss in dB/km.
    pub alpha: f64,
    /// Receiver transmittance including detector efficiency.
    pub eta_bob: f64,
    /// Intrinsic detector error rate (misalignment).
    pub e_detector: f64,
    /// Dark count probability per pulse and detector pair.
    pub p_dark: f64,
    /// Error-correction inefficiency relative to the Shannon limit.
    pub f_ec: f64,
}

impl ChannelParams {
    pub fn new(
        alpha: f64,
        eta_bob: f64,
        e_detector: f64,
        p_dark: f64,
        f_ec: f64,
    ) -> Result<ChannelParams> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Domain(format!("fiber loss {alpha} dB/km is invalid")));
        }
        if !(0.0..=1.0).contains(&eta_bob) {
            return Err(Error::Domain(format!(
                "receiver transmittance {eta_bob} outside [0, 1]"
            )));
        }
        if !(0.0..=0.5).contains(&e_detector) {
            return Err(Error::Domain(format!(
                "detector error rate {e_detector} outside [0, 1/2]"
            )));
        }
        if !(0.0..1.0).contains(&p_dark) {
            return Err(Error::Domain(format!(
                "dark count probability {p_dark} outside [0, 1)"
            )));
        }
        if !(f_ec.is_finite() && f_ec >= 1.0) {
            return Err(Error::Domain(format!(
                "error correction inefficiency {f_ec} below the Shannon limit"
            )));
        }
        Ok(ChannelParams { alpha, eta_bob, e_detector, p_dark, f_ec })
    }

    /// Fiber/detector figures of the long-distance experiment commonly
    /// used for rate projections (0.21 dB/km, 4.5% receiver, 3.3%
    /// detector error, 1.7e-6 dark counts, f = 1.22).
    pub fn gys() -> ChannelParams {
        ChannelParams::new(0.21, 0.045, 0.033, 1.7e-6, 1.22)
            .expect("preset parameters are valid")
    }

    /// Alternative parameter set with a clean detector (0.25 dB/km, 10%
    /// receiver, no misalignment, 1e-5 dark counts, ideal correction).
    pub fn branciard() -> ChannelParams {
        ChannelParams::new(0.25, 0.1, 0.0, 1e-5, 1.0)
            .expect("preset parameters are valid")
    }

    /// Parse `key = value` lines. Keys: alpha, etaBob, eDetector, pDark,
    /// fEc; all five are required, each at most once; '#' starts a
    /// comment line.
    pub fn parse(text: &str) -> Result<ChannelParams> {
        let mut vals: [Option<f64>; 5] = [None; 5];
        const KEYS: [&str; 5] = ["alpha", "etaBob", "eDetector", "pDark", "fEc"];
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Domain(format!("expected key = value, got {line:?}"))
            })?;
            let key = key.trim();
            let idx = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Domain(format!("unknown parameter {key:?}")))?;
            if vals[idx].is_some() {
                return Err(Error::Domain(format!("duplicate parameter {key:?}")));
            }
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::Domain(format!("cannot parse {:?} as a number", value.trim()))
            })?;
            vals[idx] = Some(v);
        }
        for (i, v) in vals.iter().enumerate() {
            if v.is_none() {
                return Err(Error::Domain(format!("missing parameter {:?}", KEYS[i])));
            }
        }
        ChannelParams::new(
            vals[0].unwrap(),
            vals[1].unwrap(),
            vals[2].unwrap(),
            vals[3].unwrap(),
            vals[4].unwrap(),
        )
    }

    /// Overall transmittance after `l_km` of fiber.
    pub fn eta(&self, l_km: f64) -> f64 {
        10f64.powf(-self.alpha * l_km / 10.0) * self.eta_bob
    }

    /// Analyzer rotation that produces the configured detector error.
    pub fn misalignment_angle(&self) -> f64 {
        self.e_detector.sqrt().asin()
    }
}

fn check_distance(l_km: f64) -> Result<()> {
    if l_km.is_finite() && l_km >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("distance {l_km} km is invalid")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("mean photon number {mu} is invalid")))
    }
}

/// Probability that at least one of `n` photons survives transmittance
/// `eta`. The log form stays accurate when `eta` drops below the rounding
/// threshold of `1 - eta`, which matters hundreds of kilometres out.
pub fn eta_n(eta: f64, n: u32) -> f64 {
    if n == 0 || eta <= 0.0 {
        return 0.0;
    }
    if eta >= 1.0 {
        return 1.0;
    }
    -(f64::from(n) * (-eta).ln_1p()).exp_m1()
}

/// Poisson weight of the n-photon component of a pulse with mean `mu`.
pub fn poisson(mu: f64, n: u32) -> f64 {
    let mut p = (-mu).exp();
    for k in 1..=n {
        p *= mu / k as f64;
    }
    p
}

/// Conclusive, correct, and wrong sifting probabilities of the four-state
/// analyzer, enumerated over Alice's state, her announced pair, Bob's
/// basis, and his outcome. With `signal_present` false a dark count fires
/// a uniformly random detector instead.
pub fn detector_model_probs(theta: f64, signal_present: bool) -> (f64, f64, f64) {
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut conclusive = 0.0;
    let mut correct = 0.0;
    let mut wrong = 0.0;
    for s in 0..4usize {
        for t in [(s + 1) % 4, (s + 3) % 4] {
            for o in 0..4usize {
                let p_o = if signal_present {
                    let d = (o as f64 - s as f64) * quarter + theta;
                    0.5 * d.cos().powi(2)
                } else {
                    0.25
                };
                // 1/4 for Alice's state, 1/2 for her pair announcement
                let p = 0.125 * p_o;
                if o == (t + 2) % 4 {
                    conclusive += p;
                    correct += p;
                } else if o == (s + 2) % 4 {
                    conclusive += p;
                    wrong += p;
                }
            }
        }
    }
    (conclusive, correct, wrong)
}

/// Yield and error rate of the n-photon pulse component at distance
/// `l_km`. A component that never produces a conclusive click reports an
/// error rate of 1/2.
pub fn yield_and_error(
    protocol: DecoyProtocol,
    n: u32,
    params: &ChannelParams,
    l_km: f64,
) -> Result<(f64, f64)> {
    check_distance(l_km)?;
    let arrive = eta_n(params.eta(l_km), n);
    let (y, ey) = match protocol {
        DecoyProtocol::Sarg04 => {
            let theta = params.misalignment_angle();
            let (c_sig, _, w_sig) = detector_model_probs(theta, true);
            let (c_dark, _, w_dark) = detector_model_probs(theta, false);
            (
                arrive * c_sig + (1.0 - arrive) * params.p_dark * c_dark,
                arrive * w_sig + (1.0 - arrive) * params.p_dark * w_dark,
            )
        }
        DecoyProtocol::Bb84 => (
            (arrive + (1.0 - arrive) * params.p_dark) / 2.0,
            arrive * params.e_detector / 2.0 + (1.0 - arrive) * params.p_dark / 4.0,
        ),
    };
    let e = if y > 0.0 { ey / y } else { 0.5 };
    Ok((y, e))
}

/// Overall gain and error rate of a phase-randomized pulse with mean
/// photon number `mu`: the Poisson average of the per-number yields in
/// closed form.
pub fn overall_gain_qber(
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
) -> Result<(f64, f64)> {
    check_distance(l_km)?;
    check_mu(mu)?;
    let x = -(-params.eta(l_km) * mu).exp_m1();
    let (q, eq) = match protocol {
        DecoyProtocol::Sarg04 => {
            let theta = params.misalignment_angle();
            let (c_sig, _, w_sig) = detector_model_probs(theta, true);
            let (c_dark, _, w_dark) = detector_model_probs(theta, false);
            (
                c_sig * x + params.p_dark * c_dark * (1.0 - x),
                w_sig * x + params.p_dark * w_dark * (1.0 - x),
            )
        }
        DecoyProtocol::Bb84 => (
            (x + (1.0 - x) * params.p_dark) / 2.0,
            params.e_detector * x / 2.0 + (1.0 - x) * params.p_dark / 4.0,
        ),
    };
    if q <= 0.0 {
        return Err(Error::Degenerate(format!(
            "gain vanishes at {l_km} km with mean photon number {mu}"
        )));
    }
    Ok((q, eq / q))
}

/// Everything a single rate evaluation produces. Fields that do not apply
/// to the protocol or model at hand are zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateReport {
    pub mu: f64,
    pub distance_km: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    pub q1: f64,
    pub e1: f64,
    pub q2: f64,
    pub e2: f64,
    /// Phase error rate charged to the single-photon fraction.
    pub ep1: f64,
    /// Phase error bound charged to the two-photon fraction.
    pub ep2: f64,
    /// Key per pulse before flooring at zero; negative means no key.
    pub rate_raw: f64,
    pub rate: f64,
}

/// Secret fraction of single-photon conclusive bits at error rate `e1`.
/// Vanishes continuously at 1/3, where the interceptable regime begins.
fn one_photon_secret_fraction(e1: f64) -> Result<f64> {
    if e1 >= 1.0 / 3.0 {
        return Ok(0.0);
    }
    let state = initial_one_photon(e1, e1 / 2.0)?;
    Ok(1.0 - cond_entropy_z_given_x(&state)?)
}

/// Secret fraction of two-photon conclusive bits, plus the phase bound
/// it was priced at.
fn two_photon_secret_fraction(e2: f64) -> Result<(f64, f64)> {
    let ep2 = phase_bound_two_photon(e2.min(1.0 / 3.0))?;
    if e2 >= TWO_PHOTON_ATTACK_BER || ep2 >= 0.5 {
        return Ok((0.0, ep2));
    }
    Ok((1.0 - h2(ep2)?, ep2))
}

/// Asymptotic decoy rate: exact per-photon-number yields, single-photon
/// term priced by the one-photon analysis, and (for the four-state
/// two-way sifting) a two-photon term priced by its phase bound.
pub fn rate_decoy(
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
) -> Result<RateReport> {
    rate_decoy_inner(protocol, params, mu, l_km, true)
}

/// [`rate_decoy`] with the two-photon term dropped.
pub fn rate_decoy_one_photon(
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
) -> Result<RateReport> {
    rate_decoy_inner(protocol, params, mu, l_km, false)
}

fn rate_decoy_inner(
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
    keep_two_photon: bool,
) -> Result<RateReport> {
    check_mu(mu)?;
    let (q_mu, e_mu) = overall_gain_qber(protocol, params, mu, l_km)?;
    let correction = q_mu * params.f_ec * h2(e_mu)?;
    let (y1, e1) = yield_and_error(protocol, 1, params, l_km)?;
    let q1 = y1 * mu * (-mu).exp();
    let mut report = RateReport {
        mu,
        distance_km: l_km,
        q_mu,
        e_mu,
        q1,
        e1,
        q2: 0.0,
        e2: 0.0,
        ep1: 0.0,
        ep2: 0.0,
        rate_raw: 0.0,
        rate: 0.0,
    };
    let raw = match protocol {
        DecoyProtocol::Bb84 => {
            report.ep1 = e1;
            -correction + q1 * (1.0 - h2(e1.min(0.5))?)
        }
        DecoyProtocol::Sarg04 => {
            report.ep1 = 1.5 * e1;
            let mut raw = -correction + q1 * one_photon_secret_fraction(e1)?;
            if keep_two_photon {
                let (y2, e2) = yield_and_error(protocol, 2, params, l_km)?;
                let q2 = y2 * mu * mu * (-mu).exp() / 2.0;
                let (frac, ep2) = two_photon_secret_fraction(e2)?;
                report.q2 = q2;
                report.e2 = e2;
                report.ep2 = ep2;
                raw += q2 * frac;
            }
            raw
        }
    };
    report.rate_raw = raw;
    report.rate = raw.max(0.0);
    Ok(report)
}

/// Tagged-pulse rate: every multi-photon pulse is assumed known to the
/// adversary, and the single-photon error rate is bounded by assigning
/// all observed errors to the untagged fraction.
pub fn rate_gllp(
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
) -> Result<RateReport> {
    check_mu(mu)?;
    let (q_mu, e_mu) = overall_gain_qber(protocol, params, mu, l_km)?;
    let correction = q_mu * params.f_ec * h2(e_mu)?;
    let p_multi = 1.0 - (-mu).exp() * (1.0 + mu);
    // the sifted multi-photon gain ceded to the adversary
    let q1 = match protocol {
        DecoyProtocol::Bb84 => q_mu - 0.5 * p_multi,
        DecoyProtocol::Sarg04 => q_mu - p_multi,
    };
    let mut report = RateReport {
        mu,
        distance_km: l_km,
        q_mu,
        e_mu,
        q1,
        e1: 0.5,
        q2: 0.0,
        e2: 0.0,
        ep1: 0.0,
        ep2: 0.0,
        rate_raw: f64::NEG_INFINITY,
        rate: 0.0,
    };
    if q1 <= 0.0 {
        return Ok(report);
    }
    let e1 = (e_mu * q_mu / q1).min(0.5);
    report.e1 = e1;
    let raw = match protocol {
        DecoyProtocol::Bb84 => {
            report.ep1 = e1;
            -correction + q1 * (1.0 - h2(e1)?)
        }
        DecoyProtocol::Sarg04 => {
            report.ep1 = 1.5 * e1;
            -correction + q1 * one_photon_secret_fraction(e1)?
        }
    };
    report.rate_raw = raw;
    report.rate = raw.max(0.0);
    Ok(report)
}

/// Rate under the chosen pricing model.
pub fn key_rate(
    model: RateModel,
    protocol: DecoyProtocol,
    params: &ChannelParams,
    mu: f64,
    l_km: f64,
) -> Result<RateReport> {
    match model {
        RateModel::Decoy => rate_decoy(protocol, params, mu, l_km),
        RateModel::DecoyOnePhoton => rate_decoy_one_photon(protocol, params, mu, l_km),
        RateModel::Gllp => rate_gllp(protocol, params, mu, l_km),
    }
}

/// Mean photon number in (0, 2.5] maximizing the raw rate at the given
/// distance: coarse grid, then golden-section refinement.
pub fn optimal_mu(
    model: RateModel,
    protocol: DecoyProtocol,
    params: &ChannelParams,
    l_km: f64,
) -> Result<(f64, RateReport)> {
    check_distance(l_km)?;
    let raw_at = |mu: f64| -> Result<f64> {
        match key_rate(model, protocol, params, mu, l_km) {
            Ok(rep) => Ok(rep.rate_raw),
            // the gain can underflow at individual pulse strengths on a
            // dark-count-free channel; those points simply yield no key
            Err(Error::Degenerate(_)) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut best_mu = 1e-3;
    let mut best = raw_at(best_mu)?;
    for i in 2..=2500 {
        let mu = i as f64 * 1e-3;
        let r = raw_at(mu)?;
        if r > best {
            best = r;
            best_mu = mu;
        }
    }
    let lo = (best_mu - 2e-3).max(1e-6);
    let hi = (best_mu + 2e-3).min(2.5);
    let (mu_ref, neg) = golden_min(
        |mu| raw_at(mu).map(|r| -r).unwrap_or(f64::INFINITY),
        lo,
        hi,
        1e-6,
    );
    if -neg > best {
        best_mu = mu_ref;
    }
    let report = key_rate(model, protocol, params, best_mu, l_km)?;
    Ok((best_mu, report))
}

/// Longest distance with a positive optimized raw rate, to 0.01 km.
/// Returns infinity when the rate never turns negative (an idealized
/// channel), 0 when there is no key at the receiver's doorstep.
pub fn secure_distance(
    model: RateModel,
    protocol: DecoyProtocol,
    params: &ChannelParams,
) -> Result<f64> {
    let raw_at = |l: f64| -> Result<f64> {
        match optimal_mu(model, protocol, params, l) {
            Ok((_, rep)) => Ok(rep.rate_raw),
            // The gain underflows to an exact zero far past any crossing;
            // for the bracketing search that is just "no key here".
            Err(Error::Degenerate(_)) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    if raw_at(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 50.0;
    while raw_at(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 12_800.0 {
            return Ok(f64::INFINITY);
        }
    }
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if raw_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Model-independent distance limits from the detector alone.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UpperBounds {
    /// Where dark counts push the single-photon error rate past its
    /// interceptability point.
    pub single_photon_km: f64,
    /// Same for the two-photon error rate (four-state sifting only).
    pub two_photon_km: Option<f64>,
    pub overall_km: f64,
}

fn distance_for_transmittance(params: &ChannelParams, eta_target: f64) -> f64 {
    if eta_target <= 0.0 {
        return f64::INFINITY;
    }
    if eta_target >= params.eta_bob {
        return 0.0;
    }
    if params.alpha == 0.0 {
        return f64::INFINITY;
    }
    10.0 / params.alpha * (params.eta_bob / eta_target).log10()
}

/// Distances beyond which no analysis can certify key, because the
/// dark-count-dominated error rates cross the interceptability bounds
/// (1/3 for single photons under four-state sifting, 1/4 under standard
/// sifting; both give the same transmittance condition).
pub fn upper_bound_distance(
    protocol: DecoyProtocol,
    params: &ChannelParams,
) -> Result<UpperBounds> {
    let margin = 1.0 - 4.0 * params.e_detector + params.p_dark;
    if margin <= 0.0 {
        return Err(Error::NoSecureRegion(format!(
            "detector error rate {} is interceptable at any distance",
            params.e_detector
        )));
    }
    let single_photon_km = if params.p_dark == 0.0 {
        f64::INFINITY
    } else {
        distance_for_transmittance(params, params.p_dark / margin)
    };
    let two_photon_km = match protocol {
        DecoyProtocol::Bb84 => None,
        DecoyProtocol::Sarg04 => {
            let e_star = TWO_PHOTON_ATTACK_BER;
            let numer = params.p_dark * (0.5 * e_star - 0.25);
            let denom = 0.5 * params.e_detector * (1.0 - e_star) - 0.25 * e_star;
            Some(if denom >= 0.0 {
                // misalignment alone keeps two-photon errors interceptable
                0.0
            } else if params.p_dark == 0.0 {
                f64::INFINITY
            } else {
                let ratio = numer / denom;
                let eta2 = ratio / (1.0 + ratio);
                let eta = 1.0 - (1.0 - eta2).sqrt();
                distance_for_transmittance(params, eta)
            })
        }
    };
    // Past the two-photon limit the two-photon contribution is simply
    // dropped from the rate; key survives until the single-photon part
    // itself turns interceptable, so that is the overall ceiling.
    let overall_km = single_photon_km;
    Ok(UpperBounds { single_photon_km, two_photon_km, overall_km })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(ChannelParams::new(0.21, 0.045, 0.033, 1.7e-6, 1.22).is_ok());
        assert!(ChannelParams::new(-0.1, 0.045, 0.033, 1.7e-6, 1.22).is_err());
        assert!(ChannelParams::new(0.21, 1.5, 0.033, 1.7e-6, 1.22).is_err());
        assert!(ChannelParams::new(0.21, 0.045, 0.6, 1.7e-6, 1.22).is_err());
        assert!(ChannelParams::new(0.21, 0.045, 0.033, 1.0, 1.22).is_err());
        assert!(ChannelParams::new(0.21, 0.045, 0.033, 1.7e-6, 0.9).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let text = "# fiber\nalpha = 0.21\netaBob = 0.045\n\neDetector = 0.033\npDark = 1.7e-6\nfEc = 1.22\n";
        assert_eq!(ChannelParams::parse(text).unwrap(), ChannelParams::gys());
        assert!(ChannelParams::parse("alpha = 0.21").is_err());
        assert!(ChannelParams::parse("alpha = 0.21\nalpha = 0.3").is_err());
        let unknown = format!("{text}bogus = 1\n");
        assert!(ChannelParams::parse(&unknown).is_err());
        assert!(ChannelParams::parse("alpha = zebra").is_err());
    }

    #[test]
    fn detector_enumeration_matches_closed_form() {
        for i in 0..20 {
            let theta = i as f64 * 0.02;
            let (c, ok, w) = detector_model_probs(theta, true);
            let s2 = theta.sin().powi(2);
            assert!((c - (0.25 + 0.5 * s2)).abs() < 1e-12);
            assert!((ok - 0.25).abs() < 1e-12);
            assert!((w - 0.5 * s2).abs() < 1e-12);
        }
        let (c, ok, w) = detector_model_probs(0.1, false);
        assert!((c - 0.5).abs() < 1e-12);
        assert!((ok - 0.25).abs() < 1e-12);
        assert!((w - 0.25).abs() < 1e-12);
    }

    #[test]
    fn yields_reduce_to_sifting_factors() {
        // perfect detector: only the sifting fraction differs
        let p = ChannelParams::new(0.2, 0.1, 0.0, 0.0, 1.0).unwrap();
        let (ys, es) = yield_and_error(DecoyProtocol::Sarg04, 1, &p, 0.0).unwrap();
        let (yb, eb) = yield_and_error(DecoyProtocol::Bb84, 1, &p, 0.0).unwrap();
        assert!((ys - 0.1 / 4.0).abs() < 1e-15);
        assert!((yb - 0.1 / 2.0).abs() < 1e-15);
        // the enumeration leaves cos(pi/2)^2 residue, not an exact zero
        assert!(es.abs() < 1e-30);
        assert!(eb.abs() < 1e-30);
        // no clicks at all: error rate reported as 1/2
        let (y0, e0) = yield_and_error(DecoyProtocol::Bb84, 0, &p, 0.0).unwrap();
        assert_eq!(y0, 0.0);
        assert_eq!(e0, 0.5);
    }

    #[test]
    fn gain_is_poisson_average_of_yields() {
        let p = ChannelParams::gys();
        for protocol in [DecoyProtocol::Sarg04, DecoyProtocol::Bb84] {
            let (q, e) = overall_gain_qber(protocol, &p, 0.5, 20.0).unwrap();
            let mut q_sum = 0.0;
            let mut eq_sum = 0.0;
            for n in 0..=60u32 {
                let (y, en) = yield_and_error(protocol, n, &p, 20.0).unwrap();
                let w = poisson(0.5, n);
                q_sum += w * y;
                eq_sum += w * y * en;
            }
            assert!((q - q_sum).abs() < 1e-12, "{protocol:?}: {q} vs {q_sum}");
            assert!((e - eq_sum / q_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_pulse_is_all_dark_counts() {
        let p = ChannelParams::gys();
        for protocol in [DecoyProtocol::Sarg04, DecoyProtocol::Bb84] {
            let (q, e) = overall_gain_qber(protocol, &p, 0.0, 10.0).unwrap();
            assert!((q - p.p_dark / 2.0).abs() < 1e-18);
            assert!((e - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gain_vanishes_without_detections() {
        let p = ChannelParams::new(0.21, 0.0, 0.033, 0.0, 1.22).unwrap();
        match overall_gain_qber(DecoyProtocol::Bb84, &p, 0.5, 10.0) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected degenerate gain, got {other:?}"),
        }
    }

    #[test]
    fn ideal_bb84_rate_is_exact() {
        let p = ChannelParams::new(0.25, 0.1, 0.0, 0.0, 1.0).unwrap();
        let (mu, l) = (0.7, 30.0);
        let r = rate_decoy(DecoyProtocol::Bb84, &p, mu, l).unwrap();
        let want = mu * (-mu).exp() * p.eta(l) / 2.0;
        assert!((r.rate_raw - want).abs() < 1e-12 * want, "{} vs {want}", r.rate_raw);
    }

    #[test]
    fn optimal_mu_reference_points() {
        let p = ChannelParams::gys();
        let (mu_s, rep_s) =
            optimal_mu(RateModel::Decoy, DecoyProtocol::Sarg04, &p, 20.0).unwrap();
        let (mu_b, rep_b) =
            optimal_mu(RateModel::Decoy, DecoyProtocol::Bb84, &p, 20.0).unwrap();
        assert!((mu_s - 0.220226).abs() < 1e-3, "got {mu_s}");
        assert!((mu_b - 0.481685).abs() < 1e-3, "got {mu_b}");
        assert!(rep_s.rate > 0.0 && rep_b.rate > rep_s.rate);
    }

    #[test]
    fn secure_distance_reference_points() {
        let p = ChannelParams::gys();
        let d_s = secure_distance(RateModel::Decoy, DecoyProtocol::Sarg04, &p).unwrap();
        let d_b = secure_distance(RateModel::Decoy, DecoyProtocol::Bb84, &p).unwrap();
        assert!((d_s - 97.29).abs() < 0.05, "got {d_s}");
        assert!((d_b - 142.21).abs() < 0.05, "got {d_b}");
    }

    #[test]
    fn tagged_rate_reference_points() {
        let p = ChannelParams::gys();
        let d_s = secure_distance(RateModel::Gllp, DecoyProtocol::Sarg04, &p).unwrap();
        let d_b = secure_distance(RateModel::Gllp, DecoyProtocol::Bb84, &p).unwrap();
        assert!(d_s < 0.5, "tagged four-state analysis barely leaves the lab: {d_s}");
        assert!((d_b - 40.21).abs() < 0.05, "got {d_b}");
    }

    #[test]
    fn ideal_channel_distance_is_unbounded() {
        let p = ChannelParams::new(0.25, 0.1, 0.0, 0.0, 1.0).unwrap();
        let d = secure_distance(RateModel::Decoy, DecoyProtocol::Bb84, &p).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn upper_bound_reference_points() {
        let p = ChannelParams::gys();
        let b_s = upper_bound_distance(DecoyProtocol::Sarg04, &p).unwrap();
        let b_b = upper_bound_distance(DecoyProtocol::Bb84, &p).unwrap();
        assert!((b_s.single_photon_km - 207.68019848330852).abs() < 1e-6);
        assert!((b_b.single_photon_km - 207.68019848330852).abs() < 1e-6);
        assert!((b_s.two_photon_km.unwrap() - 201.43484883010387).abs() < 1e-6);
        // beyond the two-photon limit that term is dropped, not fatal
        assert!((b_s.overall_km - 207.68019848330852).abs() < 1e-6);
        assert!(b_b.two_photon_km.is_none());
        assert!((b_b.overall_km - b_b.single_photon_km).abs() == 0.0);
    }

    #[test]
    fn interceptable_detector_has_no_secure_region() {
        let p = ChannelParams::new(0.21, 0.045, 0.3, 1.7e-6, 1.22).unwrap();
        match upper_bound_distance(DecoyProtocol::Bb84, &p) {
            Err(Error::NoSecureRegion(_)) => {}
            other => panic!("expected no secure region, got {other:?}"),
        }
    }

    #[test]
    fn clean_detector_preset_distances() {
        let p = ChannelParams::branciard();
        let d_s = secure_distance(RateModel::Decoy, DecoyProtocol::Sarg04, &p).unwrap();
        let d_b = secure_distance(RateModel::Decoy, DecoyProtocol::Bb84, &p).unwrap();
        assert!((d_s - 111.06).abs() < 0.05, "got {d_s}");
        assert!((d_b - 120.77).abs() < 0.05, "got {d_b}");
    }
}
