#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jpave::metrics {

// Scoring unit: an (attribute, value) pair. A value predicted under the wrong
// attribute never counts.
using Pair = std::pair<std::string, std::string>;
using PairSet = std::set<Pair>;

struct InstanceLabels {
    std::string id;
    PairSet pairs;
};

// Exact-match counts with the empty-denominator conventions: precision 0 when
// nothing was predicted, recall 0 when there is no gold, F1 0 when P+R is 0.
struct MicroScores {
    std::size_t correct = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

MicroScores micro_scores(std::size_t correct, std::size_t predicted,
                         std::size_t gold);

// Aggregate micro precision/recall/F1 over all instances.
MicroScores micro_f1(const std::vector<InstanceLabels>& pred,
                     const std::vector<InstanceLabels>& gold);

// Share of instances whose predicted set equals the gold set exactly.
double joint_acc(const std::vector<InstanceLabels>& pred,
                 const std::vector<InstanceLabels>& gold);

// Mean per-instance share of gold pairs recovered. An instance with neither
// gold nor predictions scores 1 so exact matches never outrank it.
double instance_acc(const std::vector<InstanceLabels>& pred,
                    const std::vector<InstanceLabels>& gold);

// Mean per-instance micro-F1, same empty-instance convention as instance_acc.
double joint_f1(const std::vector<InstanceLabels>& pred,
                const std::vector<InstanceLabels>& gold);

struct PartitionedScores {
    MicroScores seen;
    MicroScores unseen;
};

// Splits every pair by whether its value string belongs to the unseen set and
// scores the two partitions independently.
PartitionedScores partitioned_f1(const std::vector<InstanceLabels>& pred,
                                 const std::vector<InstanceLabels>& gold,
                                 const std::set<std::string>& unseen_values);

std::vector<std::pair<std::string, MicroScores>> per_attribute_f1(
    const std::vector<InstanceLabels>& pred,
    const std::vector<InstanceLabels>& gold,
    const std::vector<std::string>& attributes);

// Everything one evaluation emits; attribute is present when the run also
// scored attribute presence decisions.
struct EvalReport {
    std::size_t n_instances = 0;
    MicroScores value;
    double jacc = 0.0;
    double iacc = 0.0;
    double jf1 = 0.0;
    std::vector<std::pair<std::string, MicroScores>> per_attribute;
    PartitionedScores partition;
    std::optional<MicroScores> attribute;
};

EvalReport evaluate_pairs(const std::vector<InstanceLabels>& pred,
                          const std::vector<InstanceLabels>& gold,
                          const std::vector<std::string>& attributes,
                          const std::set<std::string>& unseen_values = {});

std::string report_to_json(const EvalReport& report);
std::string per_attribute_csv(const EvalReport& report);

}  // namespace jpave::metrics
