#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bitree {

// Tree or bi-tree exceeds the configured size limits.
struct SizeLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two objects built over different geometries were combined.
struct GeometryMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A mathematical precondition of an operation failed.  `condition` names the
// violated hypothesis; `node` is the offending node id when one exists, and
// `slice` the y-node of the slice for per-slice failures inside the bi-tree
// constructions.
struct PreconditionError : std::runtime_error {
    PreconditionError(const std::string& cond, std::int64_t witness_node = -1,
                      std::int64_t slice_node = -1)
        : std::runtime_error("precondition violated: " + cond +
                             (witness_node >= 0 ? " at node " + std::to_string(witness_node) : "") +
                             (slice_node >= 0 ? " in slice " + std::to_string(slice_node) : "")),
          condition(cond),
          node(witness_node),
          slice(slice_node) {}

    std::string condition;
    std::int64_t node;
    std::int64_t slice;
};

// A bound that the construction guarantees failed to verify on the output.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance; carries the best iterate.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double value, Eigen::VectorXd iterate)
        : std::runtime_error(what), best_value(value), best_iterate(std::move(iterate)) {}

    double best_value;
    Eigen::VectorXd best_iterate;
};

}  // namespace bitree
