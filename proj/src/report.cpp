#include "xlra/report.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace xlra {

namespace {

constexpr std::array<const char*, 17> kColumns = {
    "protocol",      "K",           "B",
    "P_a",           "P_b",         "delta",
    "varpi",         "n_trials",    "avg_attempts",
    "avg_attempts_ci95", "failed_prob", "failed_prob_ci95",
    "norm_accepted", "norm_accepted_ci95", "avg_sum_rate_bpcu",
    "sum_rate_ci95", "status",
};

void
write_comments(std::ostream& os, std::span<const std::string> comments)
{
    for (const auto& c : comments)
    {
        os << "# " << c << '\n';
    }
}

void
write_estimate(std::ostream& os, const MetricEstimate& m)
{
    if (m.mean && std::isfinite(*m.mean))
    {
        os << format_number(*m.mean) << ',' << format_number(m.ci95);
    }
    else
    {
        os << "NA,NA";
    }
}

} // namespace

const char*
to_string(RowStatus s)
{
    switch (s)
    {
    case RowStatus::Ok:
        return "ok";
    case RowStatus::UndefinedMetric:
        return "undefined_metric";
    case RowStatus::ConfigError:
        return "config_error";
    }
    return "unknown";
}

std::span<const char* const>
result_columns()
{
    return kColumns;
}

std::string
format_number(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

void
write_result_csv(std::ostream& os, std::span<const ResultRow> rows, std::span<const std::string> comments)
{
    write_comments(os, comments);
    for (std::size_t i = 0; i < kColumns.size(); ++i)
    {
        os << (i ? "," : "") << kColumns[i];
    }
    os << '\n';
    for (const ResultRow& r : rows)
    {
        os << r.protocol << ',' << r.users << ',' << r.subarrays << ',' << format_number(r.first_attempt_prob) << ','
           << format_number(r.visibility_prob) << ',' << format_number(r.delta) << ',' << format_number(r.varpi) << ','
           << r.n_trials << ',';
        write_estimate(os, r.avg_attempts);
        os << ',';
        write_estimate(os, r.failed_prob);
        os << ',';
        write_estimate(os, r.norm_accepted);
        os << ',';
        write_estimate(os, r.sum_rate);
        os << ',' << to_string(r.status) << '\n';
    }
}

void
write_long_csv(std::ostream& os, std::span<const ResultRow> rows, std::span<const std::string> comments)
{
    write_comments(os, comments);
    os << "protocol,K,B,delta,metric,value,ci95\n";
    for (const ResultRow& r : rows)
    {
        const std::array<std::pair<const char*, const MetricEstimate*>, 4> metrics = {{
            {"avg_attempts", &r.avg_attempts},
            {"failed_prob", &r.failed_prob},
            {"norm_accepted", &r.norm_accepted},
            {"avg_sum_rate_bpcu", &r.sum_rate},
        }};
        for (const auto& [name, m] : metrics)
        {
            os << r.protocol << ',' << r.users << ',' << r.subarrays << ',' << format_number(r.delta) << ',' << name
               << ',';
            write_estimate(os, *m);
            os << '\n';
        }
    }
}

} // namespace xlra
