#pragma once

#include <stdexcept>
#include <string>

namespace morphtag {

// Exit codes used by the CLI: 0 success, 1 usage, 2 data, 3 divergence.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files, encoding problems, misaligned corpora,
// broken model containers.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss during training.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace morphtag
