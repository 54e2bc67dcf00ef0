#pragma once

#include <stdexcept>
#include <string>

namespace rmplate {

// Bad user input: malformed geometry, invalid material, incompatible loads,
// unreadable configuration. The CLI maps these to exit code 1.
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical step did not produce a trustworthy result (factorization
// failure, residual above tolerance, degenerate kernel). Exit code 2.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A checked inequality (sign law, Energy Lemma chain, bound bracketing)
// does not hold. Exit code 3.
class InequalityViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rmplate
