#pragma once

#include <stdexcept>
#include <string>

namespace jpave {

// Violated internal contract (shape mismatch, invalid argument, broken
// invariant). Maps to exit code 2 at the CLI boundary.
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

// Bad input from the operator (missing file, malformed data, unknown flag).
// Maps to exit code 1 at the CLI boundary.
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

}  // namespace jpave
