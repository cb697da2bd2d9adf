#include "mcsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mcsim {

Numerology::Numerology(int mu) : mu_(mu) {
    if (mu < 0 || mu > 3) {
        throw std::invalid_argument("numerology mu must be in {0,1,2,3}, got " + std::to_string(mu));
    }
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
    if (static_cast<int>(entries_.size()) != kMcsCount) {
        throw std::invalid_argument("MCS table must have exactly 28 entries");
    }
    double prev_cr = 0.0;
    int prev_bps = 0;
    for (int i = 0; i < kMcsCount; ++i) {
        const McsEntry& e = entries_[i];
        if (e.index != i) {
            throw std::invalid_argument("MCS table entries must be indexed 0..27 in order");
        }
        if (e.bits_per_symbol != 2 && e.bits_per_symbol != 4 && e.bits_per_symbol != 6 &&
            e.bits_per_symbol != 8) {
            throw std::invalid_argument("bits_per_symbol must be one of {2,4,6,8}");
        }
        if (e.coding_rate <= 0.0 || e.coding_rate > 1.0) {
            throw std::invalid_argument("coding_rate must be in (0,1]");
        }
        if (e.bits_per_symbol == prev_bps && e.coding_rate < prev_cr) {
            throw std::invalid_argument("coding_rate must be nondecreasing within a modulation order");
        }
        prev_bps = e.bits_per_symbol;
        prev_cr = e.coding_rate;
    }
}

const McsTable& McsTable::default_table() {
    // (bits per symbol, coding rate x1024) for indices 0..27.
    static const McsTable table = [] {
        const std::array<std::pair<int, double>, kMcsCount> rows = {{
            {2, 120.0},  {2, 193.0},  {2, 308.0},  {2, 449.0},  {2, 602.0},
            {4, 378.0},  {4, 434.0},  {4, 490.0},  {4, 553.0},  {4, 616.0},
            {4, 658.0},  {6, 466.0},  {6, 517.0},  {6, 567.0},  {6, 616.0},
            {6, 666.0},  {6, 719.0},  {6, 772.0},  {6, 822.0},  {6, 873.0},
            {8, 682.5},  {8, 711.0},  {8, 754.0},  {8, 797.0},  {8, 841.0},
            {8, 885.0},  {8, 916.5},  {8, 948.0},
        }};
        std::vector<McsEntry> entries;
        entries.reserve(kMcsCount);
        for (int i = 0; i < kMcsCount; ++i) {
            entries.push_back({i, rows[i].first, rows[i].second / 1024.0});
        }
        return McsTable(std::move(entries));
    }();
    return table;
}

McsTable McsTable::from_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (!doc.is_array()) {
        throw std::invalid_argument("MCS table JSON must be an array of 28 objects");
    }
    std::vector<McsEntry> entries;
    entries.reserve(doc.size());
    for (const auto& row : doc) {
        McsEntry e;
        e.index = row.at("index").get<int>();
        e.bits_per_symbol = row.at("bits_per_symbol").get<int>();
        e.coding_rate = row.at("coding_rate_x1024").get<double>() / 1024.0;
        entries.push_back(e);
    }
    std::sort(entries.begin(), entries.end(),
              [](const McsEntry& a, const McsEntry& b) { return a.index < b.index; });
    return McsTable(std::move(entries));
}

McsTable McsTable::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open MCS table file: " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string McsTable::to_json_text() const {
    nlohmann::json doc = nlohmann::json::array();
    for (const McsEntry& e : entries_) {
        doc.push_back({{"index", e.index},
                       {"bits_per_symbol", e.bits_per_symbol},
                       {"coding_rate_x1024", e.coding_rate * 1024.0}});
    }
    return doc.dump(2);
}

const McsEntry& McsTable::at(int mcs) const {
    if (mcs < 0 || mcs >= kMcsCount) {
        throw std::invalid_argument("MCS index out of range: " + std::to_string(mcs));
    }
    return entries_[static_cast<std::size_t>(mcs)];
}

namespace {

// floor() with a small relative guard so that values representing exact
// integers do not drop to n-1 from accumulated rounding.
std::int64_t guarded_floor(double x) {
    return static_cast<std::int64_t>(std::floor(x + x * 1e-12 + 1e-9));
}

void require_tx_mcs(int mcs) {
    if (mcs < kMinMcs || mcs > kMaxMcs) {
        throw std::invalid_argument("transmission MCS must be in 1..27, got " + std::to_string(mcs));
    }
}

}  // namespace

std::int64_t slot_count(double t_s, Numerology num) {
    if (!(t_s > 0.0)) {
        throw std::invalid_argument("slot_count requires t > 0");
    }
    return guarded_floor(t_s * num.slots_per_ms() * 1e3);
}

std::int64_t tbs_bits(int alrb, int mcs, const McsTable& table) {
    require_tx_mcs(mcs);
    if (alrb < 0) {
        throw std::invalid_argument("allocated RB count must be >= 0");
    }
    const McsEntry& e = table.at(mcs);
    return guarded_floor(kDataRePerRb * alrb * e.coding_rate * e.bits_per_symbol);
}

double gnb_rate_bps(std::span<const double> bler_per_slot,
                    std::span<const std::int64_t> tbs_per_slot, double t_s) {
    if (bler_per_slot.size() != tbs_per_slot.size()) {
        throw std::invalid_argument("per-slot BLER and TBS lists must have equal length");
    }
    if (!(t_s > 0.0)) {
        throw std::invalid_argument("gnb_rate requires t > 0");
    }
    double bits = 0.0;
    for (std::size_t j = 0; j < bler_per_slot.size(); ++j) {
        double bler = bler_per_slot[j];
        if (bler < 0.0 || bler > 1.0) {
            throw std::invalid_argument("BLER values must be in [0,1]");
        }
        bits += (1.0 - bler) * static_cast<double>(tbs_per_slot[j]);
    }
    return bits / t_s;
}

double total_rate_bps(std::span<const double> per_gnb_rates_bps) {
    double sum = 0.0;
    for (double r : per_gnb_rates_bps) {
        if (r < 0.0) {
            throw std::invalid_argument("per-gNB rates must be >= 0");
        }
        sum += r;
    }
    return sum;
}

double consumed_bandwidth_hz(int alrb, Numerology num) {
    if (alrb < 0) {
        throw std::invalid_argument("allocated RB count must be >= 0");
    }
    return static_cast<double>(alrb) * kSubcarriersPerRb * num.scs_hz();
}

double spectrum_efficiency(double rate_bps, double bandwidth_hz) {
    if (bandwidth_hz <= 0.0) {
        if (rate_bps == 0.0) return 0.0;
        throw std::invalid_argument("spectrum_efficiency with zero bandwidth and nonzero rate");
    }
    return rate_bps / bandwidth_hz;
}

double min_latency_s(Numerology num) {
    return 2.0 / num.slots_per_ms() * 1e-3;
}

double max_latency_s(Numerology num) {
    return 8.0 / num.slots_per_ms() * 1e-3;
}

}  // namespace mcsim
