#ifndef QKD_H
#define QKD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Source/sifting scheme of a weak-coherent implementation.
 */
typedef enum {
  QKD_DECOY_PROTOCOL_BB84 = 0,
  QKD_DECOY_PROTOCOL_SARG04 = 1,
} QkdDecoyProtocol;

/**
 * Sifting and source model for threshold queries.
 */
typedef enum {
  QKD_PROTOCOL_BB84 = 0,
  /**
   * Two-state announcement, single-photon signals.
   */
  QKD_PROTOCOL_SARG1 = 1,
  /**
   * Two-state announcement, two-photon signals.
   */
  QKD_PROTOCOL_SARG2 = 2,
} QkdProtocol;

/**
 * Which privacy analysis prices the multi-photon pulses.
 */
typedef enum {
  QKD_RATE_MODEL_DECOY = 0,
  QKD_RATE_MODEL_DECOY_ONE_PHOTON = 1,
  QKD_RATE_MODEL_GLLP = 2,
} QkdRateModel;

/**
 * Outcome of a call. Everything except `Ok` leaves the outputs untouched.
 */
typedef enum {
  QKD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QKD_STATUS_NULL_POINTER = 1,
  /**
   * An argument was outside its mathematical domain.
   */
  QKD_STATUS_DOMAIN = 2,
  /**
   * The computation degenerated (no conclusive events to condition on).
   */
  QKD_STATUS_DEGENERATE = 3,
  /**
   * Every distance is interceptable for these parameters.
   */
  QKD_STATUS_NO_SECURE_REGION = 4,
  /**
   * A caller-provided buffer was too small for the result.
   */
  QKD_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Internal failure; a bug in this library rather than in the call.
   */
  QKD_STATUS_INTERNAL = 6,
} QkdStatus;

/**
 * Opaque fiber/receiver parameter set.
 */
typedef struct QkdChannel QkdChannel;

/**
 * One rate evaluation. Fields that do not apply to the protocol or
 * model at hand are zero.
 */
typedef struct {
  double mu;
  double distance_km;
  double q_mu;
  double e_mu;
  double q1;
  double e1;
  double q2;
  double e2;
  double ep1;
  double ep2;
  /**
   * Key per pulse before flooring at zero; negative means no key.
   */
  double rate_raw;
  double rate;
} QkdRateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code, always NUL-terminated ASCII.
 */
const char *qkd_status_message(QkdStatus status);

/**
 * New channel handle from explicit parameters: fiber loss in dB/km,
 * receiver transmittance, detector error rate, dark count probability,
 * and error-correction inefficiency (at least 1).
 */
QkdStatus qkd_channel_new(double alpha,
                          double eta_bob,
                          double e_detector,
                          double p_dark,
                          double f_ec,
                          QkdChannel **out);

/**
 * The long-haul fiber preset (0.21 dB/km, 4.5% receiver, 3.3% detector
 * error, 1.7e-6 dark counts, f = 1.22).
 */
QkdStatus qkd_channel_gys(QkdChannel **out);

/**
 * The clean-detector preset (0.25 dB/km, 10% receiver, no misalignment,
 * 1e-5 dark counts, ideal correction).
 */
QkdStatus qkd_channel_branciard(QkdChannel **out);

/**
 * Releases a channel handle. Null is accepted and ignored.
 */
void qkd_channel_free(QkdChannel *channel);

/**
 * Binary entropy of `x` in [0, 1], in bits.
 */
QkdStatus qkd_h2(double x, double *out);

/**
 * Tolerable bit error rate with one-way postprocessing only.
 */
QkdStatus qkd_one_way_threshold(QkdProtocol protocol, double *out);

/**
 * Tolerable bit error rate after the two-way step sequence in
 * `sequence`: characters 'B' and 'P', or "-" for the empty sequence.
 */
QkdStatus qkd_tolerable_ber(const char *sequence, QkdProtocol protocol, double *out);

/**
 * Best step sequence up to `max_steps` long and its tolerable error
 * rate. The sequence is written NUL-terminated into `sequence_buf`
 * (capacity `buf_len`); `max_steps + 1` bytes always suffice.
 */
QkdStatus qkd_search_best_sequence(uint32_t max_steps,
                                   QkdProtocol protocol,
                                   char *sequence_buf,
                                   size_t buf_len,
                                   double *out_threshold);

/**
 * Minimum error rate an intercept-resend attack can induce on `photons`
 * photon signals (1 or 2), searched on a `grid` x `grid` angle grid
 * (at least 64) with local refinement. The worst resent state's Bloch
 * angles are written to the optional `out_theta_y` / `out_theta_z`.
 */
QkdStatus qkd_min_ber_over_states(uint32_t photons,
                                  uint32_t grid,
                                  double *out_ber,
                                  double *out_theta_y,
                                  double *out_theta_z);

/**
 * Key rate at fixed mean photon number `mu` and distance `l_km`.
 */
QkdStatus qkd_key_rate(QkdRateModel model,
                       QkdDecoyProtocol protocol,
                       const QkdChannel *channel,
                       double mu,
                       double l_km,
                       QkdRateReport *out);

/**
 * Mean photon number maximizing the raw rate at `l_km`, and optionally
 * the full report at that optimum.
 */
QkdStatus qkd_optimal_mu(QkdRateModel model,
                         QkdDecoyProtocol protocol,
                         const QkdChannel *channel,
                         double l_km,
                         double *out_mu,
                         QkdRateReport *out_report);

/**
 * Longest distance with a positive optimized rate, to 0.01 km.
 * Infinity when the rate never turns negative.
 */
QkdStatus qkd_secure_distance(QkdRateModel model,
                              QkdDecoyProtocol protocol,
                              const QkdChannel *channel,
                              double *out_km);

/**
 * Distances beyond which no analysis can certify key. The two-photon
 * ceiling applies to the four-state sifting only and is written as NaN
 * for the standard one; the overall ceiling is the single-photon one.
 */
QkdStatus qkd_upper_bound_distance(QkdDecoyProtocol protocol,
                                   const QkdChannel *channel,
                                   double *out_single_photon_km,
                                   double *out_two_photon_km,
                                   double *out_overall_km);

/**
 * Sifted error rate a depolarizing channel of strength `p` produces.
 */
QkdStatus qkd_depolarizing_ber(QkdProtocol protocol, double p, double *out);

/**
 * Depolarizing strength that produces a given sifted error rate.
 */
QkdStatus qkd_depolarizing_prob(QkdProtocol protocol, double e_b, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QKD_H */
