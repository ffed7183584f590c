/**
 * xlra - Monte Carlo driver for grant-based random access in crowded XL-MIMO cells.
 *
 * Usage:
 *   xlra run          [--config FILE] [flags]
 *   xlra sweep        SPEC [flags] [--out FILE]
 *   xlra tune-delta   SPEC [flags] [--objective sum-rate|attempts]
 *   xlra dump-scenario [--config FILE] [flags] [--trial N] [--format csv|json]
 *
 * Flags override config-file keys. Exit status: 0 ok, 2 configuration error.
 */

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xlra/config.hpp"
#include "xlra/engine.hpp"
#include "xlra/error.hpp"

using namespace xlra;

namespace {

constexpr int kExitConfigError = 2;

/// Flag name -> config key, plus the captured value when given.
struct Overrides
{
    std::map<std::string, std::string> values;
    bool literal_eq3 = false;

    void attach(CLI::App& app)
    {
        static const std::pair<const char*, const char*> flags[] = {
            {"--protocol", "protocol"}, {"--K", "K"},
            {"--B", "B"},               {"--delta", "delta"},
            {"--pa", "pa"},             {"--pna", "pna"},
            {"--pb", "pb"},             {"--tau", "tau"},
            {"--varpi", "varpi"},       {"--sigma2", "sigma2"},
            {"--trials", "trials"},     {"--blocks", "blocks"},
            {"--warmup", "warmup"},     {"--seed", "seed"},
            {"--estimator", "estimator"}, {"--noise-scale", "noise_scale"},
            {"--shadowing", "shadowing"}, {"--averaging", "averaging"},
        };
        for (const auto& [flag, key] : flags)
        {
            app.add_option(flag, values[key], std::string("overrides config key '") + key + "'");
        }
        app.add_flag("--literal-eq3", literal_eq3, "strong-user SINR with the multiplicative denominator");
    }

    void apply(KeyValues& kv, const CLI::App& app) const
    {
        for (const auto& [key, value] : values)
        {
            if (!value.empty())
            {
                kv.set(key, value);
            }
        }
        if (literal_eq3 || app.count("--literal-eq3") > 0)
        {
            kv.set("literal_eq3", "true");
        }
    }
};

std::vector<std::string>
header(const std::string& command, const std::vector<std::pair<std::string, std::string>>& entries)
{
    std::vector<std::string> lines{"xlra " + command};
    for (auto& l : config_lines(entries))
    {
        lines.push_back(std::move(l));
    }
    return lines;
}

std::string
join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        out += (i ? ", " : "") + items[i];
    }
    return out;
}

template <typename T, typename Fmt>
std::string
join_values(const std::vector<T>& values, Fmt fmt)
{
    std::vector<std::string> s;
    for (const auto& v : values)
    {
        s.push_back(fmt(v));
    }
    return join(s);
}

void
replace_entry(std::vector<std::pair<std::string, std::string>>& entries, const std::string& key, std::string value)
{
    for (auto& [k, v] : entries)
    {
        if (k == key)
        {
            v = std::move(value);
        }
    }
}

std::ostream&
open_output(const std::string& path, std::ofstream& file)
{
    if (path.empty())
    {
        return std::cout;
    }
    file.open(path);
    if (!file)
    {
        throw ConfigError("cannot write '" + path + "'");
    }
    return file;
}

std::string
long_path(const std::string& out)
{
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    {
        return out + ".long.csv";
    }
    return out.substr(0, dot) + ".long" + out.substr(dot);
}

KeyValues
load(const std::string& path)
{
    return path.empty() ? KeyValues{} : load_config_file(path);
}

int
cmd_run(const KeyValues& kv, const std::string& out)
{
    TrialConfig cfg;
    apply_config(cfg, kv);
    cfg.validate();
    const ResultRow row = make_row(cfg, run_cell(cfg, default_worker_count()));
    std::ofstream file;
    std::ostream& os = open_output(out, file);
    const auto comments = header("run", config_entries(cfg));
    write_result_csv(os, std::span<const ResultRow>(&row, 1), comments);
    return 0;
}

int
cmd_sweep(const KeyValues& kv, const std::string& out)
{
    const SweepSpec spec = make_sweep_spec(kv);
    if (spec.cell_count() == 0)
    {
        throw ConfigError("sweep grid is empty");
    }
    const auto rows = run_sweep(spec, default_worker_count());

    auto entries = config_entries(spec.base);
    replace_entry(entries, "protocol", join_values(spec.protocols, [](Protocol p) { return std::string(to_string(p)); }));
    replace_entry(entries, "K", join_values(spec.users, [](int v) { return std::to_string(v); }));
    replace_entry(entries, "B", join_values(spec.subarrays, [](int v) { return std::to_string(v); }));
    replace_entry(entries, "delta", join_values(spec.deltas, [](double v) { return format_number(v); }));
    const auto comments = header("sweep", entries);

    std::ofstream file;
    std::ostream& os = open_output(out, file);
    write_result_csv(os, rows, comments);
    if (!out.empty())
    {
        std::ofstream long_file(long_path(out));
        write_long_csv(long_file, rows, comments);
    }
    return 0;
}

int
cmd_tune(const KeyValues& kv, const std::string& objective_name, const std::string& out)
{
    KeyValues scalars = kv;
    std::vector<double> grid;
    if (const std::string* d = kv.find("delta"))
    {
        grid = parse_number_list(*d);
        scalars.erase("delta");
    }
    TrialConfig cfg;
    apply_config(cfg, scalars);
    if (grid.empty())
    {
        throw ConfigError("tune-delta needs a delta grid (delta = start:stop:step or a list)");
    }
    cfg.decision.delta = grid.front();
    cfg.validate();

    TuneObjective objective = TuneObjective::SumRate;
    if (objective_name == "attempts")
    {
        objective = TuneObjective::Attempts;
    }
    else if (objective_name != "sum-rate")
    {
        throw ConfigError("unknown objective '" + objective_name + "' (expected sum-rate or attempts)");
    }

    const TuneResult result = tune_delta(cfg, grid, objective, default_worker_count());

    auto entries = config_entries(cfg);
    replace_entry(entries, "delta", join_values(grid, [](double v) { return format_number(v); }));
    std::ofstream file;
    std::ostream& os = open_output(out, file);
    for (const auto& line : header("tune-delta objective=" + objective_name, entries))
    {
        os << "# " << line << '\n';
    }
    os << "delta,objective,objective_ci95,samples\n";
    for (const TunePoint& p : result.table)
    {
        os << format_number(p.delta) << ',';
        if (p.samples > 0)
        {
            os << format_number(p.objective) << ',' << format_number(p.ci95);
        }
        else
        {
            os << "NA,NA";
        }
        os << ',' << p.samples << '\n';
    }
    os << "delta_star=" << format_number(result.best_delta) << '\n';
    return 0;
}

int
cmd_dump(const KeyValues& kv, std::uint64_t trial, const std::string& format, const std::string& out)
{
    TrialConfig cfg;
    apply_config(cfg, kv);
    cfg.validate();
    const Scenario sc = build_scenario(cfg.scenario, cfg.seed, trial);

    std::ofstream file;
    std::ostream& os = open_output(out, file);
    if (format == "json")
    {
        nlohmann::json j;
        for (const auto& [k, v] : config_entries(cfg))
        {
            j["config"][k] = v;
        }
        j["trial"] = trial;
        j["antennas_per_subarray"] = sc.partition.antennas_per_subarray;
        nlohmann::json users = nlohmann::json::array();
        for (UserId k = 0; k < sc.fading.users; ++k)
        {
            const Vec3& q = sc.positions[static_cast<std::size_t>(k)];
            nlohmann::json u;
            u["id"] = k;
            u["position"] = {q.x, q.y, q.z};
            u["beta"] = std::vector<double>(sc.fading.row(k).begin(), sc.fading.row(k).end());
            std::vector<int> vis;
            for (int b = 0; b < sc.visibility.subarrays; ++b)
            {
                vis.push_back(sc.visibility.at(k, b) ? 1 : 0);
            }
            u["visible"] = vis;
            users.push_back(std::move(u));
        }
        j["users"] = std::move(users);
        os << j.dump(1) << '\n';
        return 0;
    }
    if (format != "csv")
    {
        throw ConfigError("unknown format '" + format + "' (expected csv or json)");
    }
    auto entries = config_entries(cfg);
    for (const auto& line : header("dump-scenario trial=" + std::to_string(trial), entries))
    {
        os << "# " << line << '\n';
    }
    os << "user,x,y,z,subarray,beta,visible\n";
    for (UserId k = 0; k < sc.fading.users; ++k)
    {
        const Vec3& q = sc.positions[static_cast<std::size_t>(k)];
        for (int b = 0; b < sc.fading.subarrays; ++b)
        {
            os << k << ',' << format_number(q.x) << ',' << format_number(q.y) << ',' << format_number(q.z) << ','
               << b << ',' << format_number(sc.fading.at(k, b)) << ',' << (sc.visibility.at(k, b) ? 1 : 0) << '\n';
        }
    }
    return 0;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Random-access simulator for crowded XL-MIMO cells (SUCRe-XL and NVR-XL)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string objective = "sum-rate";
    std::string format = "csv";
    std::uint64_t trial = 0;

    Overrides run_flags, sweep_flags, tune_flags, dump_flags;

    auto* run = app.add_subcommand("run", "run one (protocol, K, B, delta) cell and print one result row");
    run->add_option("--config", config_path, "key = value config file or a previous result CSV");
    run->add_option("--out", out, "write the CSV here instead of standard output");
    run_flags.attach(*run);

    auto* sweep = app.add_subcommand("sweep", "run the Cartesian grid of a spec file");
    sweep->add_option("spec,--spec", config_path, "spec file (grid keys: protocol, K, B, delta)")->required();
    sweep->add_option("--out", out, "CSV path; a .long companion file is written next to it");
    sweep_flags.attach(*sweep);

    auto* tune = app.add_subcommand("tune-delta", "exhaustive search of the bias scale factor");
    tune->add_option("spec,--spec", config_path, "spec file with a delta grid")->required();
    tune->add_option("--objective", objective, "sum-rate (maximize) or attempts (minimize)");
    tune->add_option("--out", out, "write the table here instead of standard output");
    tune_flags.attach(*tune);

    auto* dump = app.add_subcommand("dump-scenario", "write one trial's positions, gains and visibility");
    dump->add_option("--config", config_path, "key = value config file");
    dump->add_option("--trial", trial, "trial index");
    dump->add_option("--format", format, "csv or json");
    dump->add_option("--out", out, "write here instead of standard output");
    dump_flags.attach(*dump);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitConfigError;
    }

    try
    {
        KeyValues kv = load(config_path);
        if (run->parsed())
        {
            run_flags.apply(kv, *run);
            return cmd_run(kv, out);
        }
        if (sweep->parsed())
        {
            sweep_flags.apply(kv, *sweep);
            return cmd_sweep(kv, out);
        }
        if (tune->parsed())
        {
            tune_flags.apply(kv, *tune);
            return cmd_tune(kv, objective, out);
        }
        dump_flags.apply(kv, *dump);
        return cmd_dump(kv, trial, format, out);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "xlra: configuration error: " << e.what() << '\n';
        return kExitConfigError;
    }
    catch (const ContractViolation& e)
    {
        std::cerr << "xlra: " << e.what() << '\n';
        return kExitConfigError;
    }
}
