#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dkl {

// Linear-algebra failure (singular solve, lost positive-definiteness).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (CSV, graph, checkpoint).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration; carries every violated invariant.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), violations(std::move(problems)) {}

    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) {
            msg += "\n  - " + p;
        }
        return msg;
    }
};

}  // namespace dkl
