#pragma once

#include <stdexcept>
#include <string>

namespace selchain {

// Argument outside an operation's domain (non-prime ell, bad shape, ...).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Alternating matrices only have even rank.
struct odd_rank_error : domain_error {
    using domain_error::domain_error;
};

// An iterative limit did not settle before its iteration cap.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fast path was asked to run before its oracle gate passed.
struct gate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal consistency check failed; indicates a bug, not bad input.
struct invariant_error : std::logic_error {
    using std::logic_error::logic_error;
};

// A set passed as closed is not closed.
struct closure_error : domain_error {
    using domain_error::domain_error;
};

// f and g disagree on some zero-sum relation.
struct compatibility_error : domain_error {
    using domain_error::domain_error;
};

} // namespace selchain
