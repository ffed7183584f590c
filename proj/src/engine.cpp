#include "xlra/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "xlra/error.hpp"

namespace xlra {

const char*
to_string(Protocol p)
{
    return p == Protocol::SucreXl ? "sucre-xl" : "nvr-xl";
}

Protocol
parse_protocol(const std::string& name)
{
    if (name == "sucre-xl")
    {
        return Protocol::SucreXl;
    }
    if (name == "nvr-xl")
    {
        return Protocol::NvrXl;
    }
    throw ConfigError("unknown protocol '" + name + "' (expected sucre-xl or nvr-xl)");
}

void
TrialConfig::validate() const
{
    scenario.validate();
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
        {
            throw ConfigError(std::string(name) + " must lie in [0, 1]");
        }
    };
    prob(access.first_attempt_prob, "P_a");
    prob(access.retry_prob, "P_na");
    if (access.max_attempts < 1 || access.max_attempts > TrialTallies::kMaxAttempts)
    {
        throw ConfigError("max attempts must lie in [1, 10]");
    }
    if (pilots.size < 1)
    {
        throw ConfigError("at least one RA pilot is required");
    }
    if (!(resolution.varpi >= 0.0 && resolution.varpi <= 1.0))
    {
        throw ConfigError("varpi must lie in [0, 1]");
    }
    if (!(resolution.noise_power > 0.0))
    {
        throw ConfigError("noise power must be positive");
    }
    if (!(decision.noise_scale >= 0.0) || !std::isfinite(decision.delta))
    {
        throw ConfigError("estimator noise scale must be non-negative and delta finite");
    }
    if (n_blocks < 1 || warmup_blocks < 0 || warmup_blocks >= n_blocks)
    {
        throw ConfigError("need n_blocks >= 1 and 0 <= warmup_blocks < n_blocks");
    }
    if (n_trials < 1)
    {
        throw ConfigError("need at least one trial");
    }
}

int
default_worker_count()
{
    if (const char* env = std::getenv("XLRA_WORKERS"))
    {
        const int n = std::atoi(env);
        if (n > 0)
        {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <typename Fn>
void
parallel_for(int count, int workers, Fn&& fn)
{
    workers = std::clamp(workers, 1, std::max(1, count));
    if (workers == 1)
    {
        for (int i = 0; i < count; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                    {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

/// Per-trial inputs shared by every variant.
struct TrialWorld
{
    Scenario scenario;
    UserGains gains;
    std::vector<AccessDraw> draws; // n_blocks x K
};

TrialWorld
make_world(const TrialConfig& cfg, std::uint64_t trial)
{
    TrialWorld w;
    w.scenario = build_scenario(cfg.scenario, cfg.seed, trial);
    w.gains = make_user_gains(w.scenario, cfg.pilots);
    w.draws.resize(static_cast<std::size_t>(cfg.n_blocks) * static_cast<std::size_t>(cfg.scenario.users));
    RandomStream access = make_stream(cfg.seed, trial, StreamId::Access);
    draw_access(w.draws, cfg.pilots, access);
    return w;
}

TrialTallies
simulate(const TrialConfig& cfg, const TrialWorld& world, const Variant& variant, std::uint64_t trial)
{
    const int users = cfg.scenario.users;
    const Scenario& sc = world.scenario;
    DecisionConfig decision = cfg.decision;
    decision.delta = variant.delta;
    RandomStream estimator = make_stream(cfg.seed, trial, StreamId::Estimator);

    std::vector<RaUserState> states = make_user_states(users);
    TrialTallies tallies;
    tallies.blocks.reserve(static_cast<std::size_t>(cfg.n_blocks - cfg.warmup_blocks));
    std::vector<ContentionOutcome> outcomes;

    for (int block = 0; block < cfg.n_blocks; ++block)
    {
        const bool measured = block >= cfg.warmup_blocks;
        const std::span<const AccessDraw> draws(world.draws.data() + static_cast<std::size_t>(block) * users,
                                                static_cast<std::size_t>(users));
        const auto contenders = select_pilots(states, cfg.pilots, cfg.access, draws, block);

        BlockTally tally;
        outcomes.clear();
        for (int t = 0; t < cfg.pilots.size; ++t)
        {
            const auto& set = contenders[static_cast<std::size_t>(t)];
            if (set.empty())
            {
                continue;
            }
            tally.attempting += static_cast<int>(set.size());
            if (measured)
            {
                for (UserId u : set)
                {
                    tallies.episodes_started += states[static_cast<std::size_t>(u)].attempts == 1 ? 1 : 0;
                }
            }
            ContentionOutcome o = contend(t, set, world.gains, decision, cfg.resolution.noise_power, estimator);
            ContentionOutcome r = variant.protocol == Protocol::NvrXl
                                      ? resolve_nvr_xl(t, o.retransmitters, sc.visibility, sc.fading, cfg.resolution)
                                      : resolve_sucre_xl(t, o.retransmitters, sc.visibility);
            o.admitted = std::move(r.admitted);
            o.rejected = std::move(r.rejected);
            o.sinr = std::move(r.sinr);
            tally.accepted += static_cast<int>(o.admitted.size());
            outcomes.push_back(std::move(o));
        }
        tally.sum_rate = variant.protocol == Protocol::NvrXl
                             ? sum_rate_nvr(outcomes)
                             : sum_rate_sucre(outcomes, sc.fading, sc.visibility, cfg.resolution.noise_power);

        for (const Episode& e : admit(outcomes, states, cfg.access.max_attempts, true))
        {
            if (e.start_block >= cfg.warmup_blocks)
            {
                tallies.record(e);
            }
        }
        if (measured)
        {
            tallies.blocks.push_back(tally);
        }
    }
    return tallies;
}

} // namespace

TrialTallies
run_trial(const TrialConfig& cfg, std::uint64_t trial)
{
    cfg.validate();
    const TrialWorld world = make_world(cfg, trial);
    return simulate(cfg, world, {cfg.protocol, cfg.decision.delta}, trial);
}

std::vector<MetricsAccumulator>
run_variants(const TrialConfig& cfg, std::span<const Variant> variants, int workers)
{
    cfg.validate();
    const std::size_t nv = variants.size();
    std::vector<TrialMetrics> per_trial(static_cast<std::size_t>(cfg.n_trials) * nv);
    parallel_for(cfg.n_trials, workers, [&](int trial) {
        const auto t = static_cast<std::uint64_t>(trial);
        const TrialWorld world = make_world(cfg, t);
        for (std::size_t v = 0; v < nv; ++v)
        {
            per_trial[static_cast<std::size_t>(trial) * nv + v] = summarize(simulate(cfg, world, variants[v], t),
                                                                            cfg.averaging);
        }
    });
    // Reduce in trial order so the result does not depend on scheduling.
    std::vector<MetricsAccumulator> acc(nv);
    for (int trial = 0; trial < cfg.n_trials; ++trial)
    {
        for (std::size_t v = 0; v < nv; ++v)
        {
            acc[v].add(per_trial[static_cast<std::size_t>(trial) * nv + v]);
        }
    }
    return acc;
}

MetricsAccumulator
run_cell(const TrialConfig& cfg, int workers)
{
    const Variant v{cfg.protocol, cfg.decision.delta};
    return run_variants(cfg, std::span<const Variant>(&v, 1), workers).front();
}

ResultRow
make_row(const TrialConfig& cfg, const MetricsAccumulator& acc)
{
    ResultRow row;
    row.protocol = to_string(cfg.protocol);
    row.users = cfg.scenario.users;
    row.subarrays = cfg.scenario.subarrays;
    row.first_attempt_prob = cfg.access.first_attempt_prob;
    row.visibility_prob = cfg.scenario.visibility_probability;
    row.delta = cfg.decision.delta;
    row.varpi = cfg.resolution.varpi;
    row.n_trials = cfg.n_trials;
    auto estimate = [](const RunningStat& s) {
        MetricEstimate m;
        if (s.count() > 0)
        {
            m.mean = s.mean();
            m.ci95 = s.ci95();
        }
        return m;
    };
    row.avg_attempts = estimate(acc.avg_attempts);
    row.failed_prob = estimate(acc.failed_prob);
    row.norm_accepted = estimate(acc.norm_accepted);
    row.sum_rate = estimate(acc.sum_rate);
    const bool complete = row.avg_attempts.mean && row.failed_prob.mean && row.norm_accepted.mean && row.sum_rate.mean;
    row.status = complete ? RowStatus::Ok : RowStatus::UndefinedMetric;
    return row;
}

std::vector<ResultRow>
run_sweep(const SweepSpec& spec, int workers)
{
    if (spec.cell_count() == 0)
    {
        throw ConfigError("sweep grid is empty");
    }
    const std::size_t np = spec.protocols.size();
    const std::size_t nk = spec.users.size();
    const std::size_t nb = spec.subarrays.size();
    const std::size_t nd = spec.deltas.size();
    std::vector<ResultRow> rows(spec.cell_count());
    auto index = [&](std::size_t p, std::size_t k, std::size_t b, std::size_t d) {
        return ((p * nk + k) * nb + b) * nd + d;
    };

    for (std::size_t k = 0; k < nk; ++k)
    {
        for (std::size_t b = 0; b < nb; ++b)
        {
            TrialConfig cfg = spec.base;
            cfg.scenario.users = spec.users[k];
            cfg.scenario.subarrays = spec.subarrays[b];

            std::vector<Variant> variants;
            for (std::size_t p = 0; p < np; ++p)
            {
                for (std::size_t d = 0; d < nd; ++d)
                {
                    variants.push_back({spec.protocols[p], spec.deltas[d]});
                }
            }

            std::vector<MetricsAccumulator> acc;
            bool config_error = false;
            try
            {
                cfg.validate();
                acc = run_variants(cfg, variants, workers);
            }
            catch (const ConfigError&)
            {
                config_error = true;
            }

            for (std::size_t p = 0; p < np; ++p)
            {
                for (std::size_t d = 0; d < nd; ++d)
                {
                    TrialConfig cell = cfg;
                    cell.protocol = spec.protocols[p];
                    cell.decision.delta = spec.deltas[d];
                    ResultRow row = make_row(cell, config_error ? MetricsAccumulator{} : acc[p * nd + d]);
                    if (config_error)
                    {
                        row.status = RowStatus::ConfigError;
                    }
                    rows[index(p, k, b, d)] = std::move(row);
                }
            }
        }
    }
    return rows;
}

TuneResult
tune_delta(const TrialConfig& base, std::span<const double> grid, TuneObjective objective, int workers)
{
    if (grid.empty())
    {
        throw ConfigError("delta grid is empty");
    }
    std::vector<Variant> variants;
    for (double d : grid)
    {
        variants.push_back({base.protocol, d});
    }
    const auto acc = run_variants(base, variants, workers);

    TuneResult result;
    bool have_best = false;
    double best_value = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const RunningStat& s = objective == TuneObjective::SumRate ? acc[i].sum_rate : acc[i].avg_attempts;
        TunePoint pt{grid[i], s.count(), s.count() ? s.mean() : std::numeric_limits<double>::quiet_NaN(), s.ci95()};
        result.table.push_back(pt);
        if (s.count() == 0)
        {
            continue;
        }
        const double v = objective == TuneObjective::SumRate ? pt.objective : -pt.objective;
        const bool better = !have_best || v > best_value ||
                            (v == best_value && std::abs(pt.delta) < std::abs(result.best_delta));
        if (better)
        {
            have_best = true;
            best_value = v;
            result.best_delta = pt.delta;
        }
    }
    if (!have_best)
    {
        result.best_delta = grid.front();
    }
    return result;
}

} // namespace xlra
