#include "jpave/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jpave/checkpoint.hpp"
#include "jpave/dataset.hpp"
#include "jpave/errors.hpp"
#include "jpave/metrics.hpp"
#include "jpave/rng.hpp"
#include "jpave/synth.hpp"
#include "jpave/training.hpp"

namespace jpave::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("JPAVE_LOG");
        if (env == nullptr) return 0;
        const std::string s(env);
        if (s == "debug" || s == "2") return 2;
        if (s == "info" || s == "1") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << '\n';
}

std::string iso_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write " + path);
    out << content;
    if (!out) throw UserError("short write on " + path);
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::vector<std::string>& argv, const json& details,
                    const std::string& started_at) {
    json manifest;
    manifest["subcommand"] = subcommand;
    manifest["argv"] = argv;
    manifest["started_at"] = started_at;
    manifest["finished_at"] = iso_now();
    manifest["details"] = details;
    write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

json report_summary(const metrics::EvalReport& report) {
    json j = json::parse(metrics::report_to_json(report));
    return j;
}

// One CLI option per overridable config field; a field is copied over the
// config-file value only when its flag was actually passed.
struct TrainArgs {
    std::string config_path;
    train::TrainConfig values;
    std::string variant_str = "gen";
    std::string tokenize_str = "char";

    CLI::Option* variant = nullptr;
    CLI::Option* tokenize = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* epochs = nullptr;
    CLI::Option* patience = nullptr;
    CLI::Option* learning_rate = nullptr;
    CLI::Option* l_max = nullptr;
    CLI::Option* t_max = nullptr;
    CLI::Option* d_a = nullptr;
    CLI::Option* hidden = nullptr;
    CLI::Option* batch_train = nullptr;
    CLI::Option* batch_val = nullptr;
    CLI::Option* batch_test = nullptr;
    CLI::Option* threshold = nullptr;
    CLI::Option* min_freq = nullptr;
    CLI::Option* no_copy = nullptr;
    CLI::Option* no_apred = nullptr;
    CLI::Option* freeze_attr_emb = nullptr;
    CLI::Option* rand_attr_emb = nullptr;
    CLI::Option* freeze_value_emb = nullptr;
    CLI::Option* rand_value_emb = nullptr;
    CLI::Option* gate_values = nullptr;
    CLI::Option* embedding_file = nullptr;
    CLI::Option* attr_embedding_file = nullptr;
    CLI::Option* value_embedding_file = nullptr;
};

void add_train_options(CLI::App* sub, TrainArgs& a) {
    sub->add_option("--config", a.config_path, "JSON config file; flags override it");
    a.variant = sub->add_option("--variant", a.variant_str, "gen or cls");
    a.tokenize = sub->add_option("--tokenize", a.tokenize_str, "char or whitespace");
    a.seed = sub->add_option("--seed", a.values.seed, "run seed");
    a.epochs = sub->add_option("--epochs", a.values.epochs, "epoch cap");
    a.patience = sub->add_option("--patience", a.values.patience,
                                 "early-stop patience in epochs");
    a.learning_rate = sub->add_option("--lr", a.values.learning_rate, "learning rate");
    a.l_max = sub->add_option("--l-max", a.values.l_max, "input token cap");
    a.t_max = sub->add_option("--t-max", a.values.t_max, "decode step cap");
    a.d_a = sub->add_option("--d-a", a.values.d_a, "attention width");
    a.hidden = sub->add_option("--hidden", a.values.hidden,
                               "per-direction encoder state size");
    a.batch_train = sub->add_option("--batch-train", a.values.batch_train, "");
    a.batch_val = sub->add_option("--batch-val", a.values.batch_val, "");
    a.batch_test = sub->add_option("--batch-test", a.values.batch_test, "");
    a.threshold = sub->add_option("--threshold", a.values.threshold,
                                  "cls decision threshold");
    a.min_freq = sub->add_option("--min-freq", a.values.min_freq,
                                 "vocabulary frequency cutoff");
    a.no_copy = sub->add_flag("--no-copy", a.values.no_copy,
                              "drop the copy path (gen)");
    a.no_apred = sub->add_flag("--no-apred", a.values.no_apred,
                               "drop the attribute prediction loss");
    a.freeze_attr_emb = sub->add_flag("--freeze-attr-emb", a.values.freeze_attr_emb, "");
    a.rand_attr_emb = sub->add_flag("--rand-attr-emb", a.values.rand_attr_emb, "");
    a.freeze_value_emb = sub->add_flag("--freeze-value-emb", a.values.freeze_value_emb, "");
    a.rand_value_emb = sub->add_flag("--rand-value-emb", a.values.rand_value_emb, "");
    a.gate_values = sub->add_flag("--gate-values", a.values.gate_values_by_attribute,
                                  "keep only values whose attribute is predicted present");
    a.embedding_file = sub->add_option("--embedding-file", a.values.embedding_files.token,
                                       "token embedding init file");
    a.attr_embedding_file = sub->add_option(
        "--attr-embedding-file", a.values.embedding_files.attribute, "");
    a.value_embedding_file = sub->add_option(
        "--value-embedding-file", a.values.embedding_files.value, "");
}

train::TrainConfig resolve_config(const TrainArgs& a) {
    train::TrainConfig cfg;
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw UserError("cannot open config file: " + a.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UserError(a.config_path + ": bad JSON: " + e.what());
        }
        cfg = train::config_from_json(j);
    }
    if (a.variant->count()) cfg.variant = model::variant_from(a.variant_str);
    if (a.tokenize->count()) cfg.tokenize = data::tokenize_mode_from(a.tokenize_str);
    if (a.seed->count()) cfg.seed = a.values.seed;
    if (a.epochs->count()) cfg.epochs = a.values.epochs;
    if (a.patience->count()) cfg.patience = a.values.patience;
    if (a.learning_rate->count()) cfg.learning_rate = a.values.learning_rate;
    if (a.l_max->count()) cfg.l_max = a.values.l_max;
    if (a.t_max->count()) cfg.t_max = a.values.t_max;
    if (a.d_a->count()) cfg.d_a = a.values.d_a;
    if (a.hidden->count()) cfg.hidden = a.values.hidden;
    if (a.batch_train->count()) cfg.batch_train = a.values.batch_train;
    if (a.batch_val->count()) cfg.batch_val = a.values.batch_val;
    if (a.batch_test->count()) cfg.batch_test = a.values.batch_test;
    if (a.threshold->count()) cfg.threshold = a.values.threshold;
    if (a.min_freq->count()) cfg.min_freq = a.values.min_freq;
    if (a.no_copy->count()) cfg.no_copy = true;
    if (a.no_apred->count()) cfg.no_apred = true;
    if (a.freeze_attr_emb->count()) cfg.freeze_attr_emb = true;
    if (a.rand_attr_emb->count()) cfg.rand_attr_emb = true;
    if (a.freeze_value_emb->count()) cfg.freeze_value_emb = true;
    if (a.rand_value_emb->count()) cfg.rand_value_emb = true;
    if (a.gate_values->count()) cfg.gate_values_by_attribute = true;
    if (a.embedding_file->count()) cfg.embedding_files.token = a.values.embedding_files.token;
    if (a.attr_embedding_file->count())
        cfg.embedding_files.attribute = a.values.embedding_files.attribute;
    if (a.value_embedding_file->count())
        cfg.embedding_files.value = a.values.embedding_files.value;
    cfg.validate();
    return cfg;
}

data::Vocab vocab_from_dataset(const data::Dataset& dataset, std::size_t min_freq) {
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(dataset.instances.size());
    for (const auto& inst : dataset.instances) corpus.push_back(inst.tokens);
    return data::build_vocab(corpus, min_freq);
}

struct LoadedData {
    data::Dataset train, val, test;
    data::Schema schema;
    data::Vocab vocab;
};

LoadedData load_data_dir(const std::string& dir, const train::TrainConfig& cfg) {
    LoadedData d;
    d.schema = data::load_schema(dir + "/schema.json");
    d.train = data::load_jsonl(dir + "/train.jsonl", cfg.tokenize);
    d.val = data::load_jsonl(dir + "/val.jsonl", cfg.tokenize);
    const std::string test_path = dir + "/test.jsonl";
    if (fs::exists(test_path)) d.test = data::load_jsonl(test_path, cfg.tokenize);
    d.vocab = vocab_from_dataset(d.train, cfg.min_freq);
    return d;
}

json history_to_json(const train::TrainResult& result) {
    json rows = json::array();
    for (const auto& r : result.history)
        rows.push_back({{"epoch", r.epoch},
                        {"train_loss", r.train_loss},
                        {"val_value_f1", r.val_value_f1},
                        {"val_attr_f1", r.val_attr_f1}});
    return {{"epochs_run", result.history.size()},
            {"best_epoch", result.best_epoch},
            {"best_val_value_f1", result.best_val_f1},
            {"history", rows}};
}

// Trains one configuration and writes checkpoint + history under out_dir.
train::TrainResult run_training(const train::TrainConfig& cfg, const LoadedData& d,
                                const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto result = train::train(cfg, d.train, d.val, d.schema, d.vocab);
    const auto cp = train::checkpoint_from_result(result, d.schema);
    train::save_checkpoint(cp, out_dir + "/checkpoint.bin");
    write_text(out_dir + "/history.json", history_to_json(result).dump(2) + "\n");
    return result;
}

struct AblationRow {
    std::string name;
    model::Variant variant;
    bool train::TrainConfig::*flag;  // single ablation switch, null for baselines
};

const std::vector<AblationRow>& ablation_rows();

int cmd_synth(const data::SynthConfig& synth_cfg, const std::string& out_dir,
              const std::vector<std::string>& argv, const std::string& started) {
    fs::create_directories(out_dir);
    const auto corpus = data::synth_generate(synth_cfg);
    data::synth_write(corpus, out_dir, synth_cfg.mode);
    json details;
    details["schema_values"] = corpus.schema.values.size();
    details["train"] = corpus.train.instances.size();
    details["val"] = corpus.val.instances.size();
    details["test"] = corpus.test.instances.size();
    details["seed"] = synth_cfg.seed;
    write_manifest(out_dir, "synth", argv, details, started);
    std::cout << "wrote " << corpus.train.instances.size() << "/"
              << corpus.val.instances.size() << "/" << corpus.test.instances.size()
              << " train/val/test instances to " << out_dir << '\n';
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    std::vector<std::string> argv_copy(argv, argv + argc);

    CLI::App app{"joint product attribute prediction and value extraction"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    data::SynthConfig synth_cfg;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--attributes", synth_cfg.n_attributes, "attribute count");
    synth->add_option("--values", synth_cfg.n_values_per_attribute,
                      "values per attribute");
    synth->add_option("--train", synth_cfg.train_size, "train instances");
    synth->add_option("--val", synth_cfg.val_size, "val instances");
    synth->add_option("--test", synth_cfg.test_size, "test instances");
    synth->add_option("--l-max", synth_cfg.l_max, "token cap per instance");
    synth->add_option("--heldout", synth_cfg.heldout_fraction,
                      "fraction of values kept out of train/val");
    synth->add_option("--seed", synth_cfg.seed, "generator seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "train one model");
    TrainArgs train_args;
    std::string train_data_dir, train_out;
    train_cmd->add_option("--data-dir", train_data_dir,
                          "directory with train/val jsonl + schema.json")
        ->required();
    train_cmd->add_option("--out", train_out, "output directory")->required();
    add_train_options(train_cmd, train_args);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_checkpoint, eval_data, eval_out;
    double eval_threshold = 0.5;
    bool eval_gate = false;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--data", eval_data, "jsonl dataset")->required();
    eval_cmd->add_option("--out", eval_out, "output directory")->required();
    auto* eval_threshold_opt =
        eval_cmd->add_option("--threshold", eval_threshold, "override cls threshold");
    auto* eval_gate_opt = eval_cmd->add_flag("--gate-values", eval_gate,
                                             "gate values by predicted attributes");

    // permute
    auto* permute_cmd = app.add_subcommand(
        "permute", "write a token-permuted copy of a dataset");
    std::string permute_in, permute_out, permute_tokenize = "char";
    std::uint64_t permute_seed = 1;
    permute_cmd->add_option("--data", permute_in, "jsonl dataset")->required();
    permute_cmd->add_option("--out", permute_out, "output directory")->required();
    permute_cmd->add_option("--seed", permute_seed, "permutation seed");
    permute_cmd->add_option("--tokenize", permute_tokenize, "char or whitespace");

    // zeroshot
    auto* zeroshot_cmd = app.add_subcommand(
        "zeroshot", "score a checkpoint with seen/unseen value partitions");
    std::string zs_checkpoint, zs_train, zs_test, zs_out;
    zeroshot_cmd->add_option("--checkpoint", zs_checkpoint, "")->required();
    zeroshot_cmd->add_option("--train", zs_train, "train jsonl defining seen values")
        ->required();
    zeroshot_cmd->add_option("--test", zs_test, "test jsonl")->required();
    zeroshot_cmd->add_option("--out", zs_out, "output directory")->required();

    // gradcheck
    auto* gradcheck_cmd = app.add_subcommand(
        "gradcheck", "finite-difference check of both joint losses");
    double gc_eps = 1e-5, gc_threshold = 1e-4;
    std::string gc_variant = "both";
    gradcheck_cmd->add_option("--eps", gc_eps, "probe step");
    gradcheck_cmd->add_option("--threshold", gc_threshold, "max relative error");
    gradcheck_cmd->add_option("--variant", gc_variant, "gen, cls, or both");

    // ablate
    auto* ablate_cmd = app.add_subcommand(
        "ablate", "run the ablation sweep and write a comparison table");
    TrainArgs ablate_args;
    std::string ablate_data_dir, ablate_out;
    ablate_cmd->add_option("--data-dir", ablate_data_dir, "")->required();
    ablate_cmd->add_option("--out", ablate_out, "")->required();
    add_train_options(ablate_cmd, ablate_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string started = iso_now();
    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_out, argv_copy, started);

        if (train_cmd->parsed()) {
            const auto cfg = resolve_config(train_args);
            const auto d = load_data_dir(train_data_dir, cfg);
            const auto result = run_training(cfg, d, train_out);
            json details;
            details["config"] = train::config_to_json(cfg);
            details["data_dir"] = train_data_dir;
            details["checkpoint"] = train_out + "/checkpoint.bin";
            details["best_epoch"] = result.best_epoch;
            details["best_val_value_f1"] = result.best_val_f1;
            write_manifest(train_out, "train", argv_copy, details, started);
            std::cout << "best epoch " << result.best_epoch << ", val value F1 "
                      << result.best_val_f1 << '\n';
            return 0;
        }

        if (eval_cmd->parsed()) {
            fs::create_directories(eval_out);
            const auto cp = train::load_checkpoint(eval_checkpoint);
            auto model = train::model_from_checkpoint(cp);
            const auto vocab = data::Vocab::from_token_list(cp.vocab_tokens);
            train::TrainConfig cfg = cp.config;
            if (eval_threshold_opt->count()) cfg.threshold = eval_threshold;
            if (eval_gate_opt->count()) cfg.gate_values_by_attribute = eval_gate;
            const auto dataset = data::load_jsonl(eval_data, cfg.tokenize);
            const auto report = train::evaluate(model, dataset, cp.schema, vocab, cfg);
            write_text(eval_out + "/report.json", metrics::report_to_json(report) + "\n");
            write_text(eval_out + "/per_attribute.csv", metrics::per_attribute_csv(report));
            json details;
            details["checkpoint"] = eval_checkpoint;
            details["data"] = eval_data;
            details["summary"] = report_summary(report);
            write_manifest(eval_out, "eval", argv_copy, details, started);
            std::cout << "value F1 " << report.value.f1 << ", attribute F1 "
                      << (report.attribute ? report.attribute->f1 : 0.0) << '\n';
            return 0;
        }

        if (permute_cmd->parsed()) {
            fs::create_directories(permute_out);
            const auto mode = data::tokenize_mode_from(permute_tokenize);
            const auto dataset = data::load_jsonl(permute_in, mode);
            data::Dataset permuted;
            for (std::size_t i = 0; i < dataset.instances.size(); ++i)
                permuted.instances.push_back(data::permute_text(
                    dataset.instances[i], Rng::mix(permute_seed, i)));
            data::save_jsonl(permuted, permute_out + "/permuted.jsonl", mode);
            json details;
            details["data"] = permute_in;
            details["seed"] = permute_seed;
            details["instances"] = permuted.instances.size();
            write_manifest(permute_out, "permute", argv_copy, details, started);
            std::cout << "permuted " << permuted.instances.size() << " instances\n";
            return 0;
        }

        if (zeroshot_cmd->parsed()) {
            fs::create_directories(zs_out);
            const auto cp = train::load_checkpoint(zs_checkpoint);
            auto model = train::model_from_checkpoint(cp);
            const auto vocab = data::Vocab::from_token_list(cp.vocab_tokens);
            const auto train_set = data::load_jsonl(zs_train, cp.config.tokenize);
            const auto test_set = data::load_jsonl(zs_test, cp.config.tokenize);
            const auto split = data::zero_shot_split(train_set, test_set);
            const auto report = train::evaluate(model, test_set, cp.schema, vocab,
                                                cp.config, split.unseen);
            write_text(zs_out + "/zeroshot.json", metrics::report_to_json(report) + "\n");
            write_text(zs_out + "/per_attribute.csv", metrics::per_attribute_csv(report));
            json details;
            details["checkpoint"] = zs_checkpoint;
            details["unseen_values"] = split.unseen;
            details["summary"] = report_summary(report);
            write_manifest(zs_out, "zeroshot", argv_copy, details, started);
            std::cout << "seen F1 " << report.partition.seen.f1 << ", unseen F1 "
                      << report.partition.unseen.f1 << '\n';
            return 0;
        }

        if (gradcheck_cmd->parsed()) {
            bool ok = true;
            for (const auto variant : {model::Variant::kGen, model::Variant::kCls}) {
                if (gc_variant != "both" && gc_variant != model::to_string(variant))
                    continue;
                const auto report = train::joint_loss_grad_check(variant, gc_eps);
                std::cout << model::to_string(variant) << " max relative error "
                          << report.max_rel_error << " (" << report.worst_param
                          << "[" << report.worst_index << "])\n";
                ok = ok && report.max_rel_error <= gc_threshold;
            }
            if (!ok) std::cerr << "gradient check failed threshold " << gc_threshold << '\n';
            return ok ? 0 : 2;
        }

        if (ablate_cmd->parsed()) {
            auto base = resolve_config(ablate_args);
            if (base.no_copy || base.no_apred || base.freeze_attr_emb ||
                base.rand_attr_emb || base.freeze_value_emb || base.rand_value_emb)
                throw UserError("ablate: pass a flag-free base config; the sweep "
                                "sets each ablation itself");
            fs::create_directories(ablate_out);
            const auto d = load_data_dir(ablate_data_dir, base);
            if (d.test.instances.empty())
                throw UserError("ablate: " + ablate_data_dir + "/test.jsonl is required");

            json table = json::array();
            std::string csv =
                "name,variant,attr_f1,value_f1,jacc,iacc,jf1\n";
            for (const auto& row : ablation_rows()) {
                train::TrainConfig cfg = base;
                cfg.variant = row.variant;
                if (row.flag != nullptr) cfg.*(row.flag) = true;
                cfg.validate();
                log_info("ablate: running " + row.name);
                const auto result = run_training(cfg, d, ablate_out + "/" + row.name);
                auto model = train::model_from_result(result, d.schema, d.vocab);
                const auto report =
                    train::evaluate(model, d.test, d.schema, d.vocab, cfg);
                const double attr_f1 = report.attribute ? report.attribute->f1 : 0.0;
                table.push_back({{"name", row.name},
                                 {"variant", model::to_string(row.variant)},
                                 {"attr_f1", attr_f1},
                                 {"value_f1", report.value.f1},
                                 {"jacc", report.jacc},
                                 {"iacc", report.iacc},
                                 {"jf1", report.jf1}});
                csv += row.name + "," + model::to_string(row.variant) + "," +
                       std::to_string(attr_f1) + "," + std::to_string(report.value.f1) +
                       "," + std::to_string(report.jacc) + "," +
                       std::to_string(report.iacc) + "," + std::to_string(report.jf1) +
                       "\n";
            }
            write_text(ablate_out + "/ablation.json", table.dump(2) + "\n");
            write_text(ablate_out + "/ablation.csv", csv);
            json details;
            details["config"] = train::config_to_json(base);
            details["rows"] = table;
            write_manifest(ablate_out, "ablate", argv_copy, details, started);
            std::cout << "wrote " << table.size() << " ablation rows to " << ablate_out
                      << '\n';
            return 0;
        }
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("jpave");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

namespace {

const std::vector<AblationRow>& ablation_rows() {
    using TC = train::TrainConfig;
    static const std::vector<AblationRow> rows = {
        {"gen", model::Variant::kGen, nullptr},
        {"gen_no_copy", model::Variant::kGen, &TC::no_copy},
        {"gen_no_apred", model::Variant::kGen, &TC::no_apred},
        {"gen_freeze_attr_emb", model::Variant::kGen, &TC::freeze_attr_emb},
        {"gen_rand_attr_emb", model::Variant::kGen, &TC::rand_attr_emb},
        {"cls", model::Variant::kCls, nullptr},
        {"cls_rand_value_emb", model::Variant::kCls, &TC::rand_value_emb},
        {"cls_freeze_value_emb", model::Variant::kCls, &TC::freeze_value_emb},
    };
    return rows;
}

}  // namespace

}  // namespace jpave::cli
