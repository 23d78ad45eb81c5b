#pragma once

#include <stdexcept>
#include <string>

namespace subloc {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// State evolution stalled at a fixed point below the requested crossing level.
struct NoDivergence : Error {
    explicit NoDivergence(const std::string& msg) : Error(msg) {}
};

// lambda <= 1/e (or below the degree-d threshold): no divergent schedule exists.
struct SubcriticalLambda : Error {
    explicit SubcriticalLambda(const std::string& msg) : Error(msg) {}
};

// (lambda1, lambda2) outside the divergence region of the alternating recursion.
struct OutsideG : Error {
    explicit OutsideG(const std::string& msg) : Error(msg) {}
};

// No block fraction delta on the search grid satisfies the vote condition.
struct NoFeasibleDelta : Error {
    explicit NoFeasibleDelta(const std::string& msg) : Error(msg) {}
};

// Enumeration bound exceeded (brute-force estimators only).
struct TooLarge : Error {
    explicit TooLarge(const std::string& msg) : Error(msg) {}
};

// Cleanup constants requested outside the validity range of their formulas.
struct InvalidRegime : Error {
    explicit InvalidRegime(const std::string& msg) : Error(msg) {}
};

// Power iteration hit an exactly zero vector after the allowed restarts.
struct ZeroVector : Error {
    explicit ZeroVector(const std::string& msg) : Error(msg) {}
};

}  // namespace subloc
