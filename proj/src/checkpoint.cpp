#include "jpave/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "jpave/errors.hpp"

namespace jpave::train {

using numkit::Tensor;

namespace {

constexpr char kMagic[4] = {'J', 'P', 'C', 'K'};

}  // namespace

Checkpoint checkpoint_from_result(const TrainResult& result,
                                  const data::Schema& schema) {
    Checkpoint cp;
    cp.config = result.config;
    cp.vocab_tokens = result.vocab_tokens;
    cp.schema = schema;
    cp.tensors = result.best_params;
    cp.rng_state = result.rng_state;
    cp.epoch = result.best_epoch;
    return cp;
}

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
    nlohmann::json header;
    header["version"] = cp.version;
    header["config"] = config_to_json(cp.config);
    header["vocab"] = cp.vocab_tokens;
    header["schema"] = data::schema_to_json(cp.schema);
    header["rng_state"] = cp.rng_state;
    header["epoch"] = cp.epoch;
    header["tensors"] = nlohmann::json::array();
    for (const auto& [name, tensor] : cp.tensors)
        header["tensors"].push_back({{"name", name}, {"shape", tensor.shape()}});
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t head_len = head.size();
    out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& [name, tensor] : cp.tensors)
        out.write(reinterpret_cast<const char*>(tensor.data().data()),
                  static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    if (!out) throw UserError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open checkpoint: " + path);
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw UserError(path + " is not a checkpoint file");
    std::uint64_t head_len = 0;
    in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
    if (!in) throw UserError("checkpoint truncated: " + path);
    std::string head(head_len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head_len));
    if (!in) throw UserError("checkpoint truncated: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(head);
    } catch (const nlohmann::json::exception& e) {
        throw UserError("bad checkpoint header in " + path + ": " + e.what());
    }

    Checkpoint cp;
    try {
        cp.version = header.at("version").get<std::uint32_t>();
        cp.config = config_from_json(header.at("config"));
        cp.vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
        cp.schema = data::schema_from_json(header.at("schema"), path);
        cp.rng_state = header.at("rng_state").get<std::string>();
        cp.epoch = header.at("epoch").get<std::size_t>();
        for (const auto& entry : header.at("tensors")) {
            const auto name = entry.at("name").get<std::string>();
            const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            Tensor tensor(shape);
            in.read(reinterpret_cast<char*>(tensor.data().data()),
                    static_cast<std::streamsize>(tensor.size() * sizeof(double)));
            if (!in) throw UserError("checkpoint truncated: " + path);
            cp.tensors.emplace_back(name, std::move(tensor));
        }
    } catch (const nlohmann::json::exception& e) {
        throw UserError("bad checkpoint header in " + path + ": " + e.what());
    }
    if (cp.version != 1)
        throw UserError(path + ": unsupported checkpoint version " +
                        std::to_string(cp.version));
    return cp;
}

model::Model model_from_checkpoint(const Checkpoint& cp) {
    model::ModelDims dims;
    dims.vocab_size = cp.vocab_tokens.size();
    dims.d_a = cp.config.d_a;
    dims.hidden = cp.config.hidden;
    dims.n_attributes = cp.schema.attributes.size();
    dims.n_values = cp.schema.values.size();
    model::Model model(cp.config.variant, dims);
    auto& params = model.params();
    require(cp.tensors.size() == params.size(),
            "checkpoint tensor count does not match the model layout");
    for (const auto& [name, tensor] : cp.tensors) {
        if (!params.contains(name))
            throw UserError("checkpoint tensor '" + name + "' unknown to this model");
        auto& p = params.at(name);
        if (!p.value.same_shape(tensor))
            throw UserError("checkpoint tensor '" + name + "' has the wrong shape");
        p.value = tensor;
    }
    return model;
}

}  // namespace jpave::train
