#include "jpave/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "jpave/errors.hpp"

namespace jpave::metrics {
namespace {

void check_aligned(const std::vector<InstanceLabels>& pred,
                   const std::vector<InstanceLabels>& gold) {
    if (pred.size() != gold.size())
        throw UserError("prediction/gold instance counts differ: " +
                        std::to_string(pred.size()) + " vs " +
                        std::to_string(gold.size()));
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i].id != gold[i].id)
            throw UserError("instance id mismatch at position " + std::to_string(i) +
                            ": '" + pred[i].id + "' vs '" + gold[i].id + "'");
}

std::size_t intersection_size(const PairSet& a, const PairSet& b) {
    std::size_t n = 0;
    for (const auto& p : a) n += b.count(p);
    return n;
}

}  // namespace

MicroScores micro_scores(std::size_t correct, std::size_t predicted,
                         std::size_t gold) {
    MicroScores s;
    s.correct = correct;
    s.predicted = predicted;
    s.gold = gold;
    s.precision = predicted == 0 ? 0.0
                                 : static_cast<double>(correct) / static_cast<double>(predicted);
    s.recall = gold == 0 ? 0.0
                         : static_cast<double>(correct) / static_cast<double>(gold);
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

MicroScores micro_f1(const std::vector<InstanceLabels>& pred,
                     const std::vector<InstanceLabels>& gold) {
    check_aligned(pred, gold);
    std::size_t correct = 0, predicted = 0, gold_total = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        correct += intersection_size(pred[i].pairs, gold[i].pairs);
        predicted += pred[i].pairs.size();
        gold_total += gold[i].pairs.size();
    }
    return micro_scores(correct, predicted, gold_total);
}

double joint_acc(const std::vector<InstanceLabels>& pred,
                 const std::vector<InstanceLabels>& gold) {
    check_aligned(pred, gold);
    if (pred.empty()) throw UserError("joint_acc: empty test set");
    std::size_t exact = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        exact += pred[i].pairs == gold[i].pairs ? 1 : 0;
    return static_cast<double>(exact) / static_cast<double>(pred.size());
}

double instance_acc(const std::vector<InstanceLabels>& pred,
                    const std::vector<InstanceLabels>& gold) {
    check_aligned(pred, gold);
    if (pred.empty()) throw UserError("instance_acc: empty test set");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (gold[i].pairs.empty()) {
            total += pred[i].pairs.empty() ? 1.0 : 0.0;
            continue;
        }
        total += static_cast<double>(intersection_size(pred[i].pairs, gold[i].pairs)) /
                 static_cast<double>(gold[i].pairs.size());
    }
    return total / static_cast<double>(pred.size());
}

double joint_f1(const std::vector<InstanceLabels>& pred,
                const std::vector<InstanceLabels>& gold) {
    check_aligned(pred, gold);
    if (pred.empty()) throw UserError("joint_f1: empty test set");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (gold[i].pairs.empty() && pred[i].pairs.empty()) {
            total += 1.0;
            continue;
        }
        total += micro_scores(intersection_size(pred[i].pairs, gold[i].pairs),
                              pred[i].pairs.size(), gold[i].pairs.size())
                     .f1;
    }
    return total / static_cast<double>(pred.size());
}

PartitionedScores partitioned_f1(const std::vector<InstanceLabels>& pred,
                                 const std::vector<InstanceLabels>& gold,
                                 const std::set<std::string>& unseen_values) {
    check_aligned(pred, gold);
    std::size_t correct[2] = {0, 0}, predicted[2] = {0, 0}, gold_total[2] = {0, 0};
    auto side = [&](const Pair& p) { return unseen_values.count(p.second) ? 1 : 0; };
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (const auto& p : pred[i].pairs) {
            const int s = side(p);
            predicted[s] += 1;
            correct[s] += gold[i].pairs.count(p);
        }
        for (const auto& p : gold[i].pairs) gold_total[side(p)] += 1;
    }
    PartitionedScores out;
    out.seen = micro_scores(correct[0], predicted[0], gold_total[0]);
    out.unseen = micro_scores(correct[1], predicted[1], gold_total[1]);
    return out;
}

std::vector<std::pair<std::string, MicroScores>> per_attribute_f1(
    const std::vector<InstanceLabels>& pred,
    const std::vector<InstanceLabels>& gold,
    const std::vector<std::string>& attributes) {
    check_aligned(pred, gold);
    std::vector<std::pair<std::string, MicroScores>> table;
    for (const auto& attr : attributes) {
        std::size_t correct = 0, predicted = 0, gold_total = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            for (const auto& p : pred[i].pairs) {
                if (p.first != attr) continue;
                predicted += 1;
                correct += gold[i].pairs.count(p);
            }
            for (const auto& p : gold[i].pairs)
                if (p.first == attr) gold_total += 1;
        }
        table.emplace_back(attr, micro_scores(correct, predicted, gold_total));
    }
    return table;
}

EvalReport evaluate_pairs(const std::vector<InstanceLabels>& pred,
                          const std::vector<InstanceLabels>& gold,
                          const std::vector<std::string>& attributes,
                          const std::set<std::string>& unseen_values) {
    EvalReport report;
    report.n_instances = pred.size();
    report.value = micro_f1(pred, gold);
    report.jacc = joint_acc(pred, gold);
    report.iacc = instance_acc(pred, gold);
    report.jf1 = joint_f1(pred, gold);
    report.per_attribute = per_attribute_f1(pred, gold, attributes);
    report.partition = partitioned_f1(pred, gold, unseen_values);
    return report;
}

namespace {

nlohmann::json scores_to_json(const MicroScores& s) {
    return {{"correct", s.correct}, {"predicted", s.predicted}, {"gold", s.gold},
            {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["n_instances"] = report.n_instances;
    j["value"] = scores_to_json(report.value);
    j["jacc"] = report.jacc;
    j["iacc"] = report.iacc;
    j["jf1"] = report.jf1;
    j["seen"] = scores_to_json(report.partition.seen);
    j["unseen"] = scores_to_json(report.partition.unseen);
    if (report.attribute.has_value())
        j["attribute"] = scores_to_json(*report.attribute);
    j["per_attribute"] = nlohmann::json::object();
    for (const auto& [attr, scores] : report.per_attribute)
        j["per_attribute"][attr] = scores_to_json(scores);
    return j.dump(2);
}

std::string per_attribute_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "attribute,correct,predicted,gold,precision,recall,f1\n";
    for (const auto& [attr, s] : report.per_attribute) {
        out << attr << ',' << s.correct << ',' << s.predicted << ',' << s.gold
            << ',' << s.precision << ',' << s.recall << ',' << s.f1 << '\n';
    }
    return out.str();
}

}  // namespace jpave::metrics
