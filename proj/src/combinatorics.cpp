#include "bklab/combinatorics.hpp"

#include <vector>

#include "bklab/errors.hpp"

namespace bklab {

BigInt factorial(unsigned n) {
    BigInt f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigInt c = 1;
    for (unsigned i = 1; i <= k; ++i) {
        c *= n - k + i;
        c /= i;
    }
    return c;
}

namespace {

// Compositions of `left` into exactly `parts` positive parts.
std::uint64_t enumerate_compositions(unsigned left, unsigned parts) {
    if (parts == 0) return left == 0 ? 1 : 0;
    std::uint64_t total = 0;
    for (unsigned first = 1; first + parts - 1 <= left; ++first) {
        total += enumerate_compositions(left - first, parts - 1);
    }
    return total;
}

template <class F>
void for_each_composition(unsigned p, std::vector<int>& prefix, unsigned left, F& f) {
    if (left == 0) {
        f(prefix);
        return;
    }
    for (unsigned first = 1; first <= left; ++first) {
        prefix.push_back(static_cast<int>(first));
        for_each_composition(p, prefix, left - first, f);
        prefix.pop_back();
    }
}

} // namespace

CompositionCount count_compositions(unsigned p, unsigned q) {
    if (p < 1 || p > 40 || q < 1) throw DomainError("count_compositions needs 1 <= q and 1 <= p <= 40");
    CompositionCount out;
    if (q > p) {
        out.count = 0;
        out.note = "q > p: no sequence of q positive integers sums to p";
        return out;
    }
    out.count = binomial(p - 1, q - 1);
    if (p <= 14) {
        out.enumerated = BigInt(enumerate_compositions(p, q));
        if (*out.enumerated != out.count) {
            throw PrecisionError("composition enumeration disagrees with C(p-1, q-1) at p=" + std::to_string(p) +
                                 ", q=" + std::to_string(q));
        }
    }
    return out;
}

BigInt multinomial(unsigned p, std::span<const int> parts) {
    long long sum = 0;
    for (int c : parts) {
        if (c < 0) throw DomainError("multinomial parts must be nonnegative");
        sum += c;
    }
    if (sum != static_cast<long long>(p)) throw DomainError("multinomial parts must sum to p");
    BigInt out = factorial(p);
    for (int c : parts) out /= factorial(static_cast<unsigned>(c));
    return out;
}

MultinomialBoundAudit audit_multinomial_bound(unsigned p) {
    if (p < 1) throw DomainError("audit needs p >= 1");
    MultinomialBoundAudit audit;
    audit.p = p;
    audit.bound = factorial(2 * p) >> p;
    std::vector<int> d;
    std::vector<int> doubled;
    auto check = [&](const std::vector<int>& parts) {
        doubled.assign(parts.begin(), parts.end());
        for (auto& x : doubled) x *= 2;
        const BigInt m = multinomial(2 * p, doubled);
        if (m > audit.worst) audit.worst = m;
        if (m > audit.bound) audit.holds = false;
        ++audit.sequences;
    };
    for_each_composition(p, d, p, check);
    return audit;
}

double to_double(const BigInt& x) { return x.convert_to<double>(); }

} // namespace bklab
