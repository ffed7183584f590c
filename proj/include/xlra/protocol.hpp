#pragma once

#include <optional>
#include <span>
#include <vector>

#include "xlra/random.hpp"
#include "xlra/scenario.hpp"

namespace xlra {

/// tau_RA mutually orthogonal RA pilots, indexed 0..size-1. Each has squared norm tau_RA.
struct PilotPool
{
    int size = 10;

    double squared_norm() const { return static_cast<double>(size); }
};

enum class Lifecycle
{
    Inactive,
    Contending,
    Backlogged,
    Accepted,
    Dropped,
};

struct RaUserState
{
    UserId id = 0;
    Lifecycle lifecycle = Lifecycle::Inactive;
    int attempts = 0;                // transmissions in the current access episode
    std::optional<int> chosen_pilot; // set iff Contending
    int episode_start = -1;          // block of the episode's first attempt
};

std::vector<RaUserState> make_user_states(int users);

struct AccessParams
{
    double first_attempt_prob = 0.01; // P_a
    double retry_prob = 0.5;          // P_na
    int max_attempts = 10;
};

/// Per-user randomness consumed by one RA block. Drawn for every user every block,
/// whatever its state, so two protocols run on the same draws stay coupled.
struct AccessDraw
{
    double u = 0.0;
    int pilot = 0;
};

void draw_access(std::span<AccessDraw> out, const PilotPool& pool, RandomStream& rng);

/**
 * Step I. Inactive users join with probability P_a, backlogged users with
 * probability P_na; each joiner takes the pilot from its draw. Updates the
 * joiners' state (Contending, attempts + 1) and returns the contender set of
 * every pilot, ordered by user id.
 */
std::vector<std::vector<UserId>> select_pilots(std::span<RaUserState> states,
                                               const PilotPool& pool,
                                               const AccessParams& access,
                                               std::span<const AccessDraw> draws,
                                               int block = 0);

std::vector<std::vector<UserId>> select_pilots(std::span<RaUserState> states,
                                               const PilotPool& pool,
                                               const AccessParams& access,
                                               RandomStream& rng,
                                               int block = 0);

enum class EstimatorMode
{
    Genie,
    Noisy,
};

struct DecisionConfig
{
    double delta = -300.0;
    EstimatorMode estimator = EstimatorMode::Genie;
    double noise_scale = 0.0;
};

/// Quantities each user can evaluate about itself at decision time.
struct UserGains
{
    std::vector<double> uplink;             // rho_k * tau * sum_{b in V_k} beta_k^(b)
    std::vector<double> visible_beta_sum;   // sum_{b in V_k} beta_k^(b)
    std::vector<int> visible_count;         // |V_k|
    int subarray_size = 0;                  // M_b
};

UserGains make_user_gains(const Scenario& scenario, const PilotPool& pool);

/// Estimate of the total gain on pilot t seen by contender k. Genie mode returns
/// the exact sum; noisy mode adds zero-mean Gaussian error that shrinks with
/// sqrt(M_b * |V_k|) and clips at zero.
double estimate_alpha(UserId k,
                      std::span<const UserId> contenders,
                      const UserGains& gains,
                      const DecisionConfig& cfg,
                      double noise_power,
                      RandomStream& rng);

/// delta / (sqrt(M_b) * sum_beta_visible). Requires sum_beta_visible > 0.
double bias_term(double delta, int subarray_size, double sum_beta_visible);

enum class Decision
{
    Retransmit,
    Withdraw,
};

/// Retransmit iff lhs > alpha_hat / 2 + epsilon; ties withdraw.
Decision decide_retransmit(double lhs, double alpha_hat, double epsilon);

enum class FailureReason
{
    None,
    ThreePlusOverlap,
    OverlapUnresolvable,
    DecodeFail,
};

const char* to_string(FailureReason reason);

struct Rejection
{
    UserId user = 0;
    FailureReason reason = FailureReason::None;
};

struct SubarraySinr
{
    int subarray = 0;
    double sinr = 0.0;
};

/// Resolution record of one pilot in one RA block.
struct ContentionOutcome
{
    int pilot = 0;
    std::vector<UserId> contenders;
    std::vector<UserId> retransmitters;
    std::vector<UserId> withdrawn;
    std::vector<UserId> admitted;
    std::vector<Rejection> rejected;
    std::vector<std::vector<SubarraySinr>> sinr; // parallel to `admitted`; empty for SUCRe-XL

    /// First rejection reason, or None when every retransmitter was admitted.
    FailureReason failure_reason() const;
};

/// Step III decision of every contender on one pilot. Fills contenders,
/// retransmitters and withdrawn. Users with an empty visibility region withdraw.
ContentionOutcome contend(int pilot,
                          std::span<const UserId> contenders,
                          const UserGains& gains,
                          const DecisionConfig& cfg,
                          double noise_power,
                          RandomStream& rng);

/// Admits a retransmitter iff its visibility region is nonempty and disjoint
/// from that of every other retransmitter on the pilot.
ContentionOutcome resolve_sucre_xl(int pilot, std::span<const UserId> retransmitters, const VisibilityMap& vis);

struct ResolutionParams
{
    double varpi = 0.1;       // residual interference after one SIC step
    double noise_power = 1.0; // sigma^2, watts
    bool literal_eq3 = false; // strong-user SINR with the product rho2*beta2*sigma^2 as denominator
    std::optional<double> decode_threshold; // minimum sum of per-SA SINRs; disabled by default
};

/**
 * Per-subarray NOMA resolution with at most one SIC step. A retransmitter
 * visible in a subarray shared by three or more retransmitters is rejected
 * outright; the rest are admitted with per-subarray SINRs (SIC when two
 * retransmitters share the subarray, plain SNR when alone).
 */
ContentionOutcome resolve_nvr_xl(int pilot,
                                 std::span<const UserId> retransmitters,
                                 const VisibilityMap& vis,
                                 const FadingMap& fading,
                                 const ResolutionParams& params);

struct SicSinr
{
    double strong = 0.0; // decoded first
    double weak = 0.0;   // decoded after cancelling the strong user
};

/// Two-user SIC SINRs. Requires rho1*beta1 >= rho2*beta2, sigma2 > 0, varpi in [0, 1].
SicSinr sic_sinr(double rho1, double beta1, double rho2, double beta2, double varpi, double sigma2,
                 bool literal_eq3 = false);

struct Episode
{
    UserId user = 0;
    int attempts = 0;
    bool accepted = false;
    int start_block = -1;
};

/**
 * Step IV. Admitted users become Accepted; withdrawn and rejected contenders
 * become Backlogged, or Dropped once they reach max_attempts. With `recycle`
 * set, Accepted and Dropped users go straight back to Inactive. Returns the
 * episodes that ended in this block.
 */
std::vector<Episode> admit(std::span<const ContentionOutcome> outcomes,
                           std::span<RaUserState> states,
                           int max_attempts,
                           bool recycle);

} // namespace xlra
