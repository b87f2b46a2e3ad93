#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "jpave/dataset.hpp"
#include "jpave/grad_check.hpp"
#include "jpave/metrics.hpp"
#include "jpave/model.hpp"
#include "jpave/target.hpp"
#include "jpave/vocab.hpp"

namespace jpave::train {

// Full run description. Every field has a default so partial JSON configs
// and CLI overrides compose; validate() rejects flag/variant mismatches.
struct TrainConfig {
    model::Variant variant = model::Variant::kGen;
    std::size_t l_max = 46;
    std::size_t d_a = 768;
    std::size_t hidden = 384;
    std::size_t t_max = 10;
    std::size_t batch_train = 64;
    std::size_t batch_val = 16;
    std::size_t batch_test = 16;
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 1;
    double threshold = 0.5;
    std::size_t min_freq = 1;
    data::TokenizeMode tokenize = data::TokenizeMode::kChar;

    bool no_copy = false;
    bool no_apred = false;
    bool freeze_attr_emb = false;
    bool rand_attr_emb = false;
    bool freeze_value_emb = false;
    bool rand_value_emb = false;
    bool gate_values_by_attribute = false;

    model::EmbeddingFiles embedding_files;

    void validate() const;
};

TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& config);

// Adam with global gradient-norm clipping. Frozen parameters are skipped and
// excluded from the clip norm.
class AdamOptimizer {
public:
    explicit AdamOptimizer(numkit::ParamRegistry& params, double learning_rate,
                           double beta1 = 0.9, double beta2 = 0.999,
                           double epsilon = 1e-8, double clip_norm = 5.0);

    void step();

private:
    numkit::ParamRegistry& params_;
    double lr_, beta1_, beta2_, epsilon_, clip_norm_;
    std::size_t t_ = 0;
    std::vector<numkit::Tensor> m_, v_;
};

// Per-attribute decoding targets in schema order; attributes without gold
// values train toward a bare [EOS].
std::vector<data::TargetSequence> instance_targets(
    const data::ProductInstance& inst, const data::Schema& schema,
    const data::Vocab& vocab, const TrainConfig& config);

// Batch losses: forward + backward per instance, gradients accumulate into
// the registry, returns the summed loss value.
double joint_loss_gen(model::Model& model, const std::vector<const data::ProductInstance*>& batch,
                      const data::Schema& schema, const data::Vocab& vocab,
                      const TrainConfig& config, bool accumulate_grads = true);
double joint_loss_cls(model::Model& model, const std::vector<const data::ProductInstance*>& batch,
                      const data::Schema& schema, const data::Vocab& vocab,
                      const TrainConfig& config, bool accumulate_grads = true);

// Greedy (GEN) or thresholded (CLS) predictions for one instance.
struct InstancePrediction {
    metrics::PairSet value_pairs;
    std::set<std::string> attributes_present;
};

InstancePrediction predict_instance(model::Model& model,
                                    const data::ProductInstance& inst,
                                    const data::Schema& schema,
                                    const data::Vocab& vocab,
                                    const TrainConfig& config);

metrics::EvalReport evaluate(model::Model& model, const data::Dataset& dataset,
                             const data::Schema& schema, const data::Vocab& vocab,
                             const TrainConfig& config,
                             const std::set<std::string>& unseen_values = {});

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_value_f1 = 0.0;
    double val_attr_f1 = 0.0;
};

struct TrainResult {
    TrainConfig config;
    std::vector<std::string> vocab_tokens;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_f1 = 0.0;
    std::vector<std::pair<std::string, numkit::Tensor>> best_params;
    std::string rng_state;
};

// Deterministic loop: seeded shuffles, summed batch gradients, Adam step per
// batch, early stop when validation value F1 stalls for `patience` epochs.
TrainResult train(const TrainConfig& config, const data::Dataset& train_set,
                  const data::Dataset& val_set, const data::Schema& schema,
                  const data::Vocab& vocab);

// Rebuilds a model whose parameters are the stored best snapshot.
model::Model model_from_result(const TrainResult& result,
                               const data::Schema& schema,
                               const data::Vocab& vocab);

// Central-difference check of the full joint loss on a fixed toy problem
// (|V|=20, d_a=8, hidden 4, L=6, 3 attributes, 6 values, 2 instances).
numkit::GradCheckReport joint_loss_grad_check(model::Variant variant, double eps);

}  // namespace jpave::train
