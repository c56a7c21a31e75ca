#ifndef BKLAB_ERRORS_HPP
#define BKLAB_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bklab {

// Argument outside the mathematical domain of an operation (negative t,
// malformed multinomial parts, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed input data (non-finite path entries, observation outside every support).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operation called on an input it does not support (non-symmetric law for a
// symmetric-only audit, unsupported moment mode, missing doubling constant).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid experiment or test configuration (m < 2 hypotheses, unknown spec strings).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Tail series G(k) k^-(p+1) fails to converge for the requested p.
class ConditionViolation : public PreconditionError {
public:
    ConditionViolation(const std::string& what, std::optional<int> smallest_admissible_p)
        : PreconditionError(what), smallest_admissible_p_(smallest_admissible_p) {}

    std::optional<int> smallest_admissible_p() const { return smallest_admissible_p_; }

private:
    std::optional<int> smallest_admissible_p_;
};

// A search for a sequence element ran past its limit.
class NotFound : public std::runtime_error {
public:
    NotFound(const std::string& what, std::size_t last_achieved)
        : std::runtime_error(what), last_achieved_(last_achieved) {}

    std::size_t last_achieved() const { return last_achieved_; }

private:
    std::size_t last_achieved_;
};

// A requested numeric precision is out of reach with the supplied data.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bklab

#endif
