#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcsim/sim.hpp"

namespace mcsim {

// All floating-point output is printed at 6 significant digits.
std::string format_g6(double v);

struct MetricsRow {
    std::string policy;
    std::uint64_t seed = 0;
    RunMetrics metrics;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

}  // namespace mcsim
