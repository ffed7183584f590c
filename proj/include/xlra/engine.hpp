#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlra/metrics.hpp"
#include "xlra/protocol.hpp"
#include "xlra/report.hpp"
#include "xlra/scenario.hpp"

namespace xlra {

enum class Protocol
{
    SucreXl,
    NvrXl,
};

const char* to_string(Protocol p);
Protocol parse_protocol(const std::string& name); // throws ConfigError

/// Everything needed to run one (protocol, K, B, delta) cell. Defaults follow the
/// reference deployment: 100 x 5 URA at 12 m, 200 x 100 m cell, P_a = 0.01,
/// P_na = 0.5, 10 pilots, varpi = 0.1, sigma^2 = rho = 1 W.
struct TrialConfig
{
    Protocol protocol = Protocol::NvrXl;
    ScenarioConfig scenario;
    AccessParams access;
    PilotPool pilots;
    DecisionConfig decision;
    ResolutionParams resolution;
    int n_blocks = 100;
    int warmup_blocks = 0; // leading blocks excluded from every metric
    int n_trials = 500;
    std::uint64_t seed = 1;
    SumRateAveraging averaging = SumRateAveraging::PerBlock;

    void validate() const; // throws ConfigError
};

/// Protocol-side knobs that may vary while the scenario stays fixed.
struct Variant
{
    Protocol protocol = Protocol::NvrXl;
    double delta = 0.0;
};

/// Worker count from XLRA_WORKERS, else the hardware concurrency (at least 1).
int default_worker_count();

/// One trial: scenario and stationary-load RA blocks driven by sub-seeds of (cfg.seed, trial).
TrialTallies run_trial(const TrialConfig& cfg, std::uint64_t trial);

/// Runs every variant on the same scenarios and access draws (common random
/// numbers). Results are independent of `workers`.
std::vector<MetricsAccumulator> run_variants(const TrialConfig& cfg, std::span<const Variant> variants, int workers);

MetricsAccumulator run_cell(const TrialConfig& cfg, int workers);

struct SweepSpec
{
    TrialConfig base;
    std::vector<Protocol> protocols;
    std::vector<int> users;
    std::vector<int> subarrays;
    std::vector<double> deltas;

    std::size_t cell_count() const { return protocols.size() * users.size() * subarrays.size() * deltas.size(); }
};

/// One row per grid cell, ordered protocol, K, B, delta (each in grid order).
/// Cells with invalid geometry get status config_error instead of aborting.
std::vector<ResultRow> run_sweep(const SweepSpec& spec, int workers);

ResultRow make_row(const TrialConfig& cfg, const MetricsAccumulator& acc);

enum class TuneObjective
{
    SumRate,  // maximize mean sum-rate
    Attempts, // minimize mean access attempts
};

struct TunePoint
{
    double delta = 0.0;
    std::int64_t samples = 0;
    double objective = 0.0;
    double ci95 = 0.0;
};

struct TuneResult
{
    std::vector<TunePoint> table;
    double best_delta = 0.0;
};

/// Exhaustive search over `grid` with common random numbers. Ties go to the
/// smaller |delta|.
TuneResult tune_delta(const TrialConfig& base, std::span<const double> grid, TuneObjective objective, int workers);

} // namespace xlra
