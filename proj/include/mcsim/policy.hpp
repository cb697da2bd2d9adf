#pragma once

#include <span>
#include <string>

#include "mcsim/channel.hpp"
#include "mcsim/estimator.hpp"

namespace mcsim {

struct QosRequirement;
struct ClusterAssignment;
struct ScoreCard;

struct DecisionContext {
    const QosRequirement* req = nullptr;
    Position ue_position;
};

// Serving-cluster policies all emit the same assignment shape, so the slot
// engine never branches on which one is active.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual ClusterAssignment decide(std::span<const GnbSnapshot> snapshots,
                                     const DecisionContext& ctx,
                                     std::vector<ScoreCard>* cards_out = nullptr) const = 0;
};

}  // namespace mcsim
