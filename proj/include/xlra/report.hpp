#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace xlra {

struct MetricEstimate
{
    std::optional<double> mean;
    double ci95 = 0.0;
};

enum class RowStatus
{
    Ok,
    UndefinedMetric,
    ConfigError,
};

const char* to_string(RowStatus s);

struct ResultRow
{
    std::string protocol;
    int users = 0;
    int subarrays = 0;
    double first_attempt_prob = 0.0;
    double visibility_prob = 0.0;
    double delta = 0.0;
    double varpi = 0.0;
    int n_trials = 0;
    MetricEstimate avg_attempts;
    MetricEstimate failed_prob;
    MetricEstimate norm_accepted;
    MetricEstimate sum_rate;
    RowStatus status = RowStatus::Ok;
};

/// Column names of the wide result table, in output order.
std::span<const char* const> result_columns();

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Writes `# ` + each comment line, the header row, then one line per row.
/// Undefined metrics print as NA.
void write_result_csv(std::ostream& os, std::span<const ResultRow> rows, std::span<const std::string> comments = {});

/// Long format: protocol,K,B,delta,metric,value,ci95 with one line per (row, metric).
void write_long_csv(std::ostream& os, std::span<const ResultRow> rows, std::span<const std::string> comments = {});

} // namespace xlra
