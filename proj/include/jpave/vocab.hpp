#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace jpave::data {

// How raw text maps to tokens. Char mode splits on UTF-8 code points (the
// natural unit for Chinese product text); whitespace mode splits on blanks.
enum class TokenizeMode { kChar, kWhitespace };

std::vector<std::string> tokenize(const std::string& text, TokenizeMode mode);
std::string join_tokens(const std::vector<std::string>& tokens, TokenizeMode mode);

const char* to_string(TokenizeMode mode);
TokenizeMode tokenize_mode_from(const std::string& name);

// Bidirectional token<->id map. Ids 0..4 are reserved for the special tokens
// below, in that order; everything else follows in insertion order.
class Vocab {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;
    static constexpr std::size_t kSep = 2;
    static constexpr std::size_t kEos = 3;
    static constexpr std::size_t kBos = 4;

    Vocab();

    // Adds a token if absent; returns its id either way. Rejects the reserved
    // surface forms (they are already present).
    std::size_t add(const std::string& token);

    std::size_t size() const { return id_to_token_.size(); }
    bool contains(const std::string& token) const;

    // Unknown tokens map to [UNK].
    std::size_t encode(const std::string& token) const;
    std::vector<std::size_t> encode_all(const std::vector<std::string>& tokens) const;

    const std::string& decode(std::size_t id) const;

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    // Rebuilds a vocab from a serialized full token list (reserved entries
    // included and verified).
    static Vocab from_token_list(const std::vector<std::string>& tokens);

    bool operator==(const Vocab& other) const {
        return id_to_token_ == other.id_to_token_;
    }

private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, std::size_t> token_to_id_;
};

// Scans the corpus in order and keeps tokens whose frequency reaches
// min_freq, in first-occurrence order.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus,
                  std::size_t min_freq = 1);

}  // namespace jpave::data
