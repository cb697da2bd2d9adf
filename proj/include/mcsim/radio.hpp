#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mcsim {

inline constexpr int kMcsCount = 28;  // index 0 is the no-transmission sentinel
inline constexpr int kMinMcs = 1;
inline constexpr int kMaxMcs = 27;
inline constexpr int kSubcarriersPerRb = 12;
inline constexpr double kBaseScsHz = 15e3;
inline constexpr double kDataRePerRb = 156.0;  // usable resource elements per RB and slot
inline constexpr int kDefaultRbsPerGnb = 66;

// NR sub-carrier-spacing exponent. SCS = 15 * 2^mu kHz, slot = 1/2^mu ms.
class Numerology {
public:
    explicit Numerology(int mu);
    int mu() const { return mu_; }
    int slots_per_ms() const { return 1 << mu_; }
    double scs_hz() const { return kBaseScsHz * slots_per_ms(); }
    double slot_duration_s() const { return 1e-3 / slots_per_ms(); }
    bool operator==(const Numerology&) const = default;

private:
    int mu_;
};

struct McsEntry {
    int index = 0;
    int bits_per_symbol = 0;
    double coding_rate = 0.0;
};

// 28-row modulation-and-coding table. Index 0 exists in the data but is not
// a valid transmission index; usable range is 1..27.
class McsTable {
public:
    explicit McsTable(std::vector<McsEntry> entries);

    // Ships the NR 256-QAM index table (coding rates 120/1024 .. 948/1024).
    static const McsTable& default_table();

    static McsTable from_json_text(const std::string& text);
    static McsTable from_json_file(const std::string& path);
    std::string to_json_text() const;

    const McsEntry& at(int mcs) const;  // mcs in 0..27
    int size() const { return static_cast<int>(entries_.size()); }

private:
    std::vector<McsEntry> entries_;
};

// Number of slots a gNB with the given numerology fits into t seconds.
std::int64_t slot_count(double t_s, Numerology num);

// Transport block payload in bits for one slot. Floors to whole bits.
std::int64_t tbs_bits(int alrb, int mcs, const McsTable& table);

// Delivered rate of one connection over t seconds given per-slot BLER and
// per-slot transport block sizes.
double gnb_rate_bps(std::span<const double> bler_per_slot,
                    std::span<const std::int64_t> tbs_per_slot, double t_s);

double total_rate_bps(std::span<const double> per_gnb_rates_bps);

// Time-averaged occupied bandwidth of an allocation, in Hz.
double consumed_bandwidth_hz(int alrb, Numerology num);

// bit/s/Hz. Defined as 0 when both inputs are 0.
double spectrum_efficiency(double rate_bps, double bandwidth_hz);

// Decode latency bounds: first-attempt decode and decode after the third
// retransmission, respectively.
double min_latency_s(Numerology num);
double max_latency_s(Numerology num);

}  // namespace mcsim
