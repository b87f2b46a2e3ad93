#include "jpave/training.hpp"

#include <algorithm>
#include <cmath>

#include "jpave/attribute_predictor.hpp"
#include "jpave/classifier.hpp"
#include "jpave/encoder.hpp"
#include "jpave/errors.hpp"
#include "jpave/generator.hpp"
#include "jpave/grad_check.hpp"
#include "jpave/rng.hpp"
#include "jpave/tape.hpp"
#include "jpave/target.hpp"

namespace jpave::train {

using data::ProductInstance;
using data::Schema;
using data::TargetSequence;
using data::Vocab;
using model::Model;
using model::Variant;
using numkit::Tape;
using numkit::Tensor;
using numkit::Var;

void TrainConfig::validate() const {
    if (l_max == 0 || d_a == 0 || hidden == 0 || t_max == 0)
        throw UserError("config: sizes must be positive");
    if (d_a != 2 * hidden)
        throw UserError("config: d_a must equal twice the encoder hidden size");
    if (batch_train == 0 || batch_val == 0 || batch_test == 0)
        throw UserError("config: batch sizes must be positive");
    if (learning_rate < 0.0) throw UserError("config: negative learning rate");
    if (threshold <= 0.0 || threshold >= 1.0)
        throw UserError("config: threshold must lie strictly inside (0, 1)");
    if (variant == Variant::kGen && (freeze_value_emb || rand_value_emb))
        throw UserError("config: value-embedding flags apply to the cls variant only");
    if (variant == Variant::kCls && no_copy)
        throw UserError("config: no_copy applies to the gen variant only");
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

TrainConfig config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "variant", "l_max", "d_a", "hidden", "t_max", "batch_train", "batch_val",
        "batch_test", "learning_rate", "epochs", "patience", "seed", "threshold",
        "min_freq", "tokenize", "no_copy", "no_apred", "freeze_attr_emb",
        "rand_attr_emb", "freeze_value_emb", "rand_value_emb",
        "gate_values_by_attribute", "embedding_file", "attr_embedding_file",
        "value_embedding_file"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw UserError("config: unknown key '" + key + "'");

    TrainConfig c;
    if (j.contains("variant")) c.variant = model::variant_from(j.at("variant"));
    read_field(j, "l_max", c.l_max);
    read_field(j, "d_a", c.d_a);
    read_field(j, "hidden", c.hidden);
    read_field(j, "t_max", c.t_max);
    read_field(j, "batch_train", c.batch_train);
    read_field(j, "batch_val", c.batch_val);
    read_field(j, "batch_test", c.batch_test);
    read_field(j, "learning_rate", c.learning_rate);
    read_field(j, "epochs", c.epochs);
    read_field(j, "patience", c.patience);
    read_field(j, "seed", c.seed);
    read_field(j, "threshold", c.threshold);
    read_field(j, "min_freq", c.min_freq);
    if (j.contains("tokenize"))
        c.tokenize = data::tokenize_mode_from(j.at("tokenize"));
    read_field(j, "no_copy", c.no_copy);
    read_field(j, "no_apred", c.no_apred);
    read_field(j, "freeze_attr_emb", c.freeze_attr_emb);
    read_field(j, "rand_attr_emb", c.rand_attr_emb);
    read_field(j, "freeze_value_emb", c.freeze_value_emb);
    read_field(j, "rand_value_emb", c.rand_value_emb);
    read_field(j, "gate_values_by_attribute", c.gate_values_by_attribute);
    read_field(j, "embedding_file", c.embedding_files.token);
    read_field(j, "attr_embedding_file", c.embedding_files.attribute);
    read_field(j, "value_embedding_file", c.embedding_files.value);
    return c;
}

nlohmann::json config_to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["variant"] = model::to_string(c.variant);
    j["l_max"] = c.l_max;
    j["d_a"] = c.d_a;
    j["hidden"] = c.hidden;
    j["t_max"] = c.t_max;
    j["batch_train"] = c.batch_train;
    j["batch_val"] = c.batch_val;
    j["batch_test"] = c.batch_test;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["patience"] = c.patience;
    j["seed"] = c.seed;
    j["threshold"] = c.threshold;
    j["min_freq"] = c.min_freq;
    j["tokenize"] = data::to_string(c.tokenize);
    j["no_copy"] = c.no_copy;
    j["no_apred"] = c.no_apred;
    j["freeze_attr_emb"] = c.freeze_attr_emb;
    j["rand_attr_emb"] = c.rand_attr_emb;
    j["freeze_value_emb"] = c.freeze_value_emb;
    j["rand_value_emb"] = c.rand_value_emb;
    j["gate_values_by_attribute"] = c.gate_values_by_attribute;
    j["embedding_file"] = c.embedding_files.token;
    j["attr_embedding_file"] = c.embedding_files.attribute;
    j["value_embedding_file"] = c.embedding_files.value;
    return j;
}

AdamOptimizer::AdamOptimizer(numkit::ParamRegistry& params, double learning_rate,
                             double beta1, double beta2, double epsilon,
                             double clip_norm)
    : params_(params), lr_(learning_rate), beta1_(beta1), beta2_(beta2),
      epsilon_(epsilon), clip_norm_(clip_norm) {
    for (const auto& name : params_.names()) {
        m_.emplace_back(params_.at(name).value.shape());
        v_.emplace_back(params_.at(name).value.shape());
    }
}

void AdamOptimizer::step() {
    double sq_norm = 0.0;
    for (const auto& name : params_.names()) {
        const auto& p = params_.at(name);
        if (p.frozen) continue;
        for (double g : p.grad.data()) sq_norm += g * g;
    }
    const double norm = std::sqrt(sq_norm);
    const double scale = (clip_norm_ > 0.0 && norm > clip_norm_) ? clip_norm_ / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t idx = 0;
    for (const auto& name : params_.names()) {
        auto& p = params_.at(name);
        Tensor& m = m_[idx];
        Tensor& v = v_[idx];
        ++idx;
        if (p.frozen) continue;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i] * scale;
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p.value[i] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
        }
    }
}

std::vector<TargetSequence> instance_targets(const ProductInstance& inst,
                                             const Schema& schema,
                                             const Vocab& vocab,
                                             const TrainConfig& config) {
    static const std::vector<std::string> kNoValues;
    std::vector<TargetSequence> targets;
    targets.reserve(schema.attributes.size());
    for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
        const auto* values = inst.values_for(schema.attributes[i]);
        targets.push_back(data::compose_target(values ? *values : kNoValues, vocab,
                                               config.t_max, config.tokenize, i));
    }
    return targets;
}

namespace {

std::vector<bool> gold_attribute_bits(const ProductInstance& inst,
                                      const Schema& schema) {
    std::vector<bool> bits(schema.attributes.size(), false);
    for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
        const auto* values = inst.values_for(schema.attributes[i]);
        bits[i] = values != nullptr && !values->empty();
    }
    return bits;
}

std::vector<bool> gold_value_bits(const ProductInstance& inst,
                                  const Schema& schema) {
    std::vector<bool> bits(schema.values.size(), false);
    for (std::size_t v = 0; v < schema.values.size(); ++v) {
        const auto* values = inst.values_for(schema.values[v].attribute);
        bits[v] = values != nullptr &&
                  std::find(values->begin(), values->end(),
                            schema.values[v].value) != values->end();
    }
    return bits;
}

double finish_instance_loss(Tape& tape, Var loss, const std::string& id,
                            bool accumulate_grads) {
    const double value = tape.val(loss)[0];
    if (!std::isfinite(value))
        throw ContractError("non-finite loss on instance '" + id + "'");
    if (accumulate_grads) tape.backward(loss);
    return value;
}

}  // namespace

double joint_loss_gen(Model& model, const std::vector<const ProductInstance*>& batch,
                      const Schema& schema, const Vocab& vocab,
                      const TrainConfig& config, bool accumulate_grads) {
    require(model.variant() == Variant::kGen, "joint_loss_gen: wrong variant");
    model::DecodeOptions options;
    options.no_copy = config.no_copy;

    double total = 0.0;
    for (const ProductInstance* inst : batch) {
        Tape tape;
        auto enc = model::encode(tape, vocab.encode_all(inst->tokens), model);
        auto forced = model::teacher_forced_nll(
            tape, instance_targets(*inst, schema, vocab, config), enc, model, options);
        Var loss = forced.loss;
        if (!config.no_apred) {
            Var predictor_w = tape.param(model.params().at("attr_predictor.W"));
            std::vector<Var> probs(forced.first_contexts.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                probs[i] = model::attribute_probs(tape, forced.first_contexts[i],
                                                  predictor_w);
            loss = tape.add(loss, model::attribute_loss(
                                      tape, probs, gold_attribute_bits(*inst, schema)));
        }
        total += finish_instance_loss(tape, loss, inst->id, accumulate_grads);
    }
    return total;
}

double joint_loss_cls(Model& model, const std::vector<const ProductInstance*>& batch,
                      const Schema& schema, const Vocab& vocab,
                      const TrainConfig& config, bool accumulate_grads) {
    require(model.variant() == Variant::kCls, "joint_loss_cls: wrong variant");
    double total = 0.0;
    for (const ProductInstance* inst : batch) {
        Tape tape;
        auto enc = model::encode(tape, vocab.encode_all(inst->tokens), model);
        auto attention = model::value_attention(tape, enc, model);
        Var value_probs = model::classify_values(tape, attention.pooled, model);
        Var loss = model::value_bce_loss(tape, value_probs,
                                         gold_value_bits(*inst, schema));
        if (!config.no_apred) {
            Var predictor_w = tape.param(model.params().at("attr_predictor.W"));
            auto contexts = model::cls_contexts(tape, enc, model);
            std::vector<Var> probs(contexts.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                probs[i] = model::attribute_probs(tape, contexts[i], predictor_w);
            loss = tape.add(loss, model::attribute_loss(
                                      tape, probs, gold_attribute_bits(*inst, schema)));
        }
        total += finish_instance_loss(tape, loss, inst->id, accumulate_grads);
    }
    return total;
}

InstancePrediction predict_instance(Model& model, const ProductInstance& inst,
                                    const Schema& schema, const Vocab& vocab,
                                    const TrainConfig& config) {
    InstancePrediction out;
    Tape tape;
    auto enc = model::encode(tape, vocab.encode_all(inst.tokens), model);
    Var predictor_w = tape.param(model.params().at("attr_predictor.W"));

    if (model.variant() == Variant::kGen) {
        model::DecodeOptions options;
        options.no_copy = config.no_copy;
        for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
            auto trace = model::generate_sequence(tape, i, enc, model,
                                                  config.t_max, options);
            Var probs = model::attribute_probs(tape, trace.steps.front().context,
                                               predictor_w);
            const Tensor& pv = tape.val(probs);
            if (pv[model::kAttrExists] > pv[model::kAttrAbsent])
                out.attributes_present.insert(schema.attributes[i]);
            for (const auto& value :
                 data::parse_generated(trace.emitted, vocab, config.tokenize))
                out.value_pairs.insert({schema.attributes[i], value});
        }
    } else {
        auto contexts = model::cls_contexts(tape, enc, model);
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            Var probs = model::attribute_probs(tape, contexts[i], predictor_w);
            const Tensor& pv = tape.val(probs);
            if (pv[model::kAttrExists] > pv[model::kAttrAbsent])
                out.attributes_present.insert(schema.attributes[i]);
        }
        auto attention = model::value_attention(tape, enc, model);
        Var value_probs = model::classify_values(tape, attention.pooled, model);
        const Tensor& pv = tape.val(value_probs);
        for (std::size_t v = 0; v < schema.values.size(); ++v)
            if (pv[v] > config.threshold)
                out.value_pairs.insert({schema.values[v].attribute,
                                        schema.values[v].value});
    }

    if (config.gate_values_by_attribute) {
        metrics::PairSet gated;
        for (const auto& pair : out.value_pairs)
            if (out.attributes_present.count(pair.first)) gated.insert(pair);
        out.value_pairs = std::move(gated);
    }
    return out;
}

metrics::EvalReport evaluate(Model& model, const data::Dataset& dataset,
                             const Schema& schema, const Vocab& vocab,
                             const TrainConfig& config,
                             const std::set<std::string>& unseen_values) {
    if (dataset.instances.empty()) throw UserError("evaluate: empty dataset");
    std::vector<metrics::InstanceLabels> pred, gold, attr_pred, attr_gold;
    for (const auto& inst : dataset.instances) {
        auto prediction = predict_instance(model, inst, schema, vocab, config);
        metrics::InstanceLabels p{inst.id, std::move(prediction.value_pairs)};
        metrics::InstanceLabels g{inst.id, {}};
        for (const auto& av : inst.gold)
            for (const auto& value : av.values) g.pairs.insert({av.attribute, value});

        metrics::InstanceLabels ap{inst.id, {}};
        for (const auto& attr : prediction.attributes_present)
            ap.pairs.insert({attr, ""});
        metrics::InstanceLabels ag{inst.id, {}};
        for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
            const auto* values = inst.values_for(schema.attributes[i]);
            if (values != nullptr && !values->empty())
                ag.pairs.insert({schema.attributes[i], ""});
        }

        pred.push_back(std::move(p));
        gold.push_back(std::move(g));
        attr_pred.push_back(std::move(ap));
        attr_gold.push_back(std::move(ag));
    }
    auto report = metrics::evaluate_pairs(pred, gold, schema.attributes, unseen_values);
    report.attribute = metrics::micro_f1(attr_pred, attr_gold);
    return report;
}

TrainResult train(const TrainConfig& config, const data::Dataset& train_set,
                  const data::Dataset& val_set, const Schema& schema,
                  const Vocab& vocab) {
    config.validate();
    if (train_set.instances.empty()) throw UserError("train: empty training set");
    if (val_set.instances.empty()) throw UserError("train: empty validation set");
    for (const auto& inst : train_set.instances)
        data::validate_instance(inst, schema, config.l_max);
    for (const auto& inst : val_set.instances)
        data::validate_instance(inst, schema, config.l_max);

    model::ModelDims dims;
    dims.vocab_size = vocab.size();
    dims.d_a = config.d_a;
    dims.hidden = config.hidden;
    dims.n_attributes = schema.attributes.size();
    dims.n_values = schema.values.size();

    model::InitFlags flags;
    flags.rand_attr_emb = config.rand_attr_emb;
    flags.freeze_attr_emb = config.freeze_attr_emb;
    flags.rand_value_emb = config.rand_value_emb;
    flags.freeze_value_emb = config.freeze_value_emb;

    Model model(config.variant, dims);
    model.init_params(config.seed, flags, config.embedding_files);
    AdamOptimizer optimizer(model.params(), config.learning_rate);
    Rng shuffle_rng(Rng::mix(config.seed, 0x5AFF));

    TrainResult result;
    result.config = config;
    result.vocab_tokens = vocab.tokens();

    auto snapshot = [&] {
        result.best_params.clear();
        for (const auto& name : model.params().names())
            result.best_params.emplace_back(name, model.params().at(name).value);
    };
    snapshot();  // epoch-0 fallback when training never improves

    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(train_set.instances.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_train) {
            const std::size_t end = std::min(order.size(), start + config.batch_train);
            std::vector<const ProductInstance*> batch;
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&train_set.instances[order[i]]);
            model.params().zero_grad();
            try {
                epoch_loss += config.variant == Variant::kGen
                                  ? joint_loss_gen(model, batch, schema, vocab, config)
                                  : joint_loss_cls(model, batch, schema, vocab, config);
            } catch (const ContractError& e) {
                throw ContractError("epoch " + std::to_string(epoch) + ", batch at " +
                                    std::to_string(start) + ": " + e.what());
            }
            optimizer.step();
        }

        auto val_report = evaluate(model, val_set, schema, vocab, config);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss;
        record.val_value_f1 = val_report.value.f1;
        record.val_attr_f1 = val_report.attribute ? val_report.attribute->f1 : 0.0;
        result.history.push_back(record);

        if (record.val_value_f1 > result.best_val_f1 || result.best_epoch == 0) {
            result.best_val_f1 = record.val_value_f1;
            result.best_epoch = epoch;
            snapshot();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }

    result.rng_state = shuffle_rng.state();
    return result;
}

numkit::GradCheckReport joint_loss_grad_check(Variant variant, double eps) {
    data::Vocab vocab;
    for (const char* tok : {"red", "blue", "cotton", "wool", "warm", "soft",
                            "hat", "cap", "tiny", "huge", "t0", "t1", "t2",
                            "t3", "t4"})
        vocab.add(tok);
    require(vocab.size() == 20, "joint_loss_grad_check: unexpected vocab size");

    Schema schema;
    schema.attributes = {"color", "fabric", "size"};
    schema.values = {{"color", "red warm"},   {"color", "blue soft"},
                     {"fabric", "cotton soft"}, {"fabric", "wool warm"},
                     {"size", "tiny"},        {"size", "huge"}};

    // Two instances covering the awkward paths: a repeated input token (copy
    // scatter has to sum), a gold token absent from the input, a two-value
    // attribute ([SEP] target), and absent attributes ([EOS]-only targets).
    ProductInstance a;
    a.id = "toy-a";
    a.tokens = {"red", "warm", "red", "soft", "hat", "t0"};
    a.gold = {{"color", {"red warm"}}, {"fabric", {"cotton soft"}}};
    ProductInstance b;
    b.id = "toy-b";
    b.tokens = {"blue", "soft", "tiny", "huge", "cap", "t1"};
    b.gold = {{"color", {"blue soft"}}, {"size", {"tiny", "huge"}}};

    TrainConfig config;
    config.variant = variant;
    config.l_max = 6;
    config.d_a = 8;
    config.hidden = 4;
    config.tokenize = data::TokenizeMode::kWhitespace;
    config.seed = 99;

    model::ModelDims dims;
    dims.vocab_size = vocab.size();
    dims.d_a = config.d_a;
    dims.hidden = config.hidden;
    dims.n_attributes = schema.attributes.size();
    dims.n_values = schema.values.size();
    Model model(variant, dims);
    model.init_params(config.seed);

    const std::vector<const ProductInstance*> batch = {&a, &b};
    numkit::LossFn loss = [&](numkit::ParamRegistry& params) {
        params.zero_grad();
        return variant == Variant::kGen
                   ? joint_loss_gen(model, batch, schema, vocab, config)
                   : joint_loss_cls(model, batch, schema, vocab, config);
    };
    return numkit::grad_check(model.params(), loss, eps);
}

Model model_from_result(const TrainResult& result, const Schema& schema,
                        const Vocab& vocab) {
    model::ModelDims dims;
    dims.vocab_size = vocab.size();
    dims.d_a = result.config.d_a;
    dims.hidden = result.config.hidden;
    dims.n_attributes = schema.attributes.size();
    dims.n_values = schema.values.size();
    Model model(result.config.variant, dims);
    for (const auto& [name, tensor] : result.best_params) {
        auto& p = model.params().at(name);
        require(p.value.same_shape(tensor), "model_from_result: shape drift for " + name);
        p.value = tensor;
    }
    return model;
}

}  // namespace jpave::train
