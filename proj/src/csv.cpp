#include "mcsim/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mcsim {

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string metrics_csv_header() {
    return "policy,seed,avg_rate_bps,avg_latency_s,reliability,resource_hz,se_bps_per_hz,"
           "qos_rate_score,qos_lat_score,qos_rel_score";
}

std::string metrics_csv_row(const MetricsRow& row) {
    std::ostringstream out;
    out << row.policy << "," << row.seed;
    for (const auto& [name, value] : metric_values(row.metrics)) {
        out << "," << format_g6(value);
    }
    return out.str();
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("metrics CSV is empty");
    }
    if (line != metrics_csv_header()) {
        throw std::invalid_argument("metrics CSV header mismatch");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        MetricsRow row;
        std::getline(ls, row.policy, ',');
        std::getline(ls, cell, ',');
        row.seed = std::stoull(cell);
        double* fields[] = {
            &row.metrics.avg_rate_bps,  &row.metrics.avg_latency_s, &row.metrics.reliability,
            &row.metrics.resource_hz,   &row.metrics.se_bps_per_hz, &row.metrics.qos_rate_score,
            &row.metrics.qos_lat_score, &row.metrics.qos_rel_score,
        };
        for (double* f : fields) {
            if (!std::getline(ls, cell, ',')) {
                throw std::invalid_argument("metrics CSV row too short");
            }
            *f = std::stod(cell);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::invalid_argument("metrics CSV has no data rows");
    }
    return rows;
}

}  // namespace mcsim
