#pragma once

#include <stdexcept>
#include <string>

namespace dhgnn {

// Bad input data (files, edge lists, masks). CLI maps this to exit 2.
struct MalformedInputError : std::runtime_error {
    explicit MalformedInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration (out-of-range hyperparameters, unknown keys). Exit 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (shape mismatch, empty mask, non-scalar loss).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Non-finite loss or other numerical breakdown during training. Exit 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dhgnn
