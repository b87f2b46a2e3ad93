#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jpave/tape.hpp"
#include "jpave/tensor.hpp"

namespace jpave::model {

enum class Variant { kGen, kCls };

std::string to_string(Variant v);
Variant variant_from(const std::string& s);

struct ModelDims {
    std::size_t vocab_size = 0;
    std::size_t d_a = 768;     // embedding and attention width, always 2*hidden
    std::size_t hidden = 384;  // per-direction encoder state size
    std::size_t n_attributes = 0;
    std::size_t n_values = 0;  // schema value count; unused by the GEN head

    void validate(Variant variant) const;
};

// Optional external weight files; empty string means random init.
struct EmbeddingFiles {
    std::string token;
    std::string attribute;
    std::string value;
};

// Init-time ablation switches. rand_* reseeds the matrix from a salted stream
// (and ignores any file); freeze_* pins it for the whole run.
struct InitFlags {
    bool rand_attr_emb = false;
    bool freeze_attr_emb = false;
    bool rand_value_emb = false;
    bool freeze_value_emb = false;
};

// Owns every trainable tensor for one variant. Registry order is fixed by the
// constructor, which makes seeded initialization reproducible.
class Model {
public:
    Model(Variant variant, const ModelDims& dims);

    void init_params(std::uint64_t seed, const InitFlags& flags = {},
                     const EmbeddingFiles& files = {});

    Variant variant() const { return variant_; }
    const ModelDims& dims() const { return dims_; }
    numkit::ParamRegistry& params() { return params_; }
    const numkit::ParamRegistry& params() const { return params_; }

private:
    Variant variant_;
    ModelDims dims_;
    numkit::ParamRegistry params_;
};

// Binds the nine tensors "<prefix>.{w,u,b}_{update,reset,cand}" onto a tape.
numkit::GruCellVars bind_gru(numkit::Tape& tape, numkit::ParamRegistry& params,
                             const std::string& prefix);

// Embedding file: u64 little-endian header length, JSON header
// {"entries": [...], "dim": d}, then rows of little-endian doubles in entry
// order. Loading demands the exact entry list so rows cannot silently shift.
void save_embedding_file(const std::string& path,
                         const std::vector<std::string>& entries,
                         const numkit::Tensor& rows);
numkit::Tensor load_embedding_file(const std::string& path,
                                   const std::vector<std::string>& expected_entries,
                                   std::size_t expected_dim);

}  // namespace jpave::model
