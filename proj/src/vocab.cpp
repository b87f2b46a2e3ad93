#include "jpave/vocab.hpp"

#include <map>
#include <sstream>

#include "jpave/errors.hpp"

namespace jpave::data {

namespace {
const std::vector<std::string> kReserved = {"[PAD]", "[UNK]", "[SEP]", "[EOS]",
                                            "[BOS]"};

// Length of the UTF-8 sequence starting at byte b (1 for malformed bytes, so
// arbitrary input still tokenizes).
std::size_t utf8_len(unsigned char b) {
    if (b < 0x80) return 1;
    if ((b >> 5) == 0x6) return 2;
    if ((b >> 4) == 0xe) return 3;
    if ((b >> 3) == 0x1e) return 4;
    return 1;
}
}  // namespace

std::vector<std::string> tokenize(const std::string& text, TokenizeMode mode) {
    std::vector<std::string> out;
    if (mode == TokenizeMode::kWhitespace) {
        std::istringstream is(text);
        std::string tok;
        while (is >> tok) out.push_back(tok);
        return out;
    }
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t len = utf8_len(static_cast<unsigned char>(text[i]));
        len = std::min(len, text.size() - i);
        std::string cp = text.substr(i, len);
        i += len;
        if (cp == " " || cp == "\t" || cp == "\n" || cp == "\r") continue;
        out.push_back(cp);
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens, TokenizeMode mode) {
    std::string sep = mode == TokenizeMode::kWhitespace ? " " : "";
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += sep;
        out += tokens[i];
    }
    return out;
}

const char* to_string(TokenizeMode mode) {
    return mode == TokenizeMode::kChar ? "char" : "whitespace";
}

TokenizeMode tokenize_mode_from(const std::string& name) {
    if (name == "char") return TokenizeMode::kChar;
    if (name == "whitespace") return TokenizeMode::kWhitespace;
    throw UserError("unknown tokenizer mode: " + name +
                    " (expected 'char' or 'whitespace')");
}

Vocab::Vocab() {
    for (const auto& t : kReserved) {
        token_to_id_[t] = id_to_token_.size();
        id_to_token_.push_back(t);
    }
}

std::size_t Vocab::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    require(!token.empty(), "vocab: empty token");
    token_to_id_[token] = id_to_token_.size();
    id_to_token_.push_back(token);
    return id_to_token_.size() - 1;
}

bool Vocab::contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
}

std::size_t Vocab::encode(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::encode_all(
    const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(encode(t));
    return ids;
}

const std::string& Vocab::decode(std::size_t id) const {
    require(id < id_to_token_.size(), "vocab: id out of range");
    return id_to_token_[id];
}

Vocab Vocab::from_token_list(const std::vector<std::string>& tokens) {
    require(tokens.size() >= kReserved.size(), "vocab: token list too short");
    for (std::size_t i = 0; i < kReserved.size(); ++i)
        require(tokens[i] == kReserved[i], "vocab: reserved tokens corrupted");
    Vocab v;
    for (std::size_t i = kReserved.size(); i < tokens.size(); ++i) v.add(tokens[i]);
    require(v.size() == tokens.size(), "vocab: duplicate tokens in list");
    return v;
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus,
                  std::size_t min_freq) {
    std::map<std::string, std::size_t> freq;
    for (const auto& tokens : corpus)
        for (const auto& t : tokens) ++freq[t];
    Vocab vocab;
    for (const auto& tokens : corpus)
        for (const auto& t : tokens)
            if (freq[t] >= min_freq) vocab.add(t);
    return vocab;
}

}  // namespace jpave::data
