#ifndef BKLAB_COMBINATORICS_HPP
#define BKLAB_COMBINATORICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace bklab {

using BigInt = boost::multiprecision::cpp_int;

BigInt factorial(unsigned n);
BigInt binomial(unsigned n, unsigned k);

struct CompositionCount {
    BigInt count;
    // Explicit enumeration, run for p <= 14.
    std::optional<BigInt> enumerated;
    std::string note;
};

// Number of sequences of q positive integers summing to p, C(p-1, q-1).
// Needs 1 <= q, 1 <= p <= 40; q > p gives 0 with a note. Throws
// PrecisionError if enumeration and the formula disagree.
CompositionCount count_compositions(unsigned p, unsigned q);

// p! / (c_1! c_2! ... c_n!). DomainError unless the parts are nonnegative and sum to p.
BigInt multinomial(unsigned p, std::span<const int> parts);

struct MultinomialBoundAudit {
    unsigned p = 0;
    std::uint64_t sequences = 0; // compositions d of p checked
    BigInt bound;                // (2p)! / 2^p
    BigInt worst;                // max over d of M(2p, 2d)
    bool holds = true;
};

// Checks M(2p, 2d) <= (2p)! / 2^p over every composition d of p.
MultinomialBoundAudit audit_multinomial_bound(unsigned p);

// Nearest double; exact big integers only become reals at the final assembly.
double to_double(const BigInt& x);

} // namespace bklab

#endif
