#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <vector>

#include "bklab/combinatorics.hpp"
#include "bklab/errors.hpp"

using namespace bklab;

TEST_CASE("composition counts") {
    CHECK(count_compositions(4, 2).count == 3);
    CHECK(count_compositions(7, 7).count == 1);
    CHECK(count_compositions(9, 1).count == 1);
    const auto none = count_compositions(3, 5);
    CHECK(none.count == 0);
    CHECK_FALSE(none.note.empty());
    CHECK_THROWS_AS(count_compositions(41, 2), DomainError);
    CHECK_THROWS_AS(count_compositions(4, 0), DomainError);
}

TEST_CASE("enumeration matches the binomial formula and sums to 2^(p-1)") {
    for (unsigned p = 1; p <= 14; ++p) {
        BigInt total = 0;
        for (unsigned q = 1; q <= p; ++q) {
            const auto c = count_compositions(p, q);
            REQUIRE(c.enumerated);
            CHECK(*c.enumerated == c.count);
            CHECK(c.count == binomial(p - 1, q - 1));
            total += c.count;
        }
        CHECK(total == (BigInt(1) << (p - 1)));
    }
    CHECK_FALSE(count_compositions(30, 10).enumerated);
    CHECK(count_compositions(40, 20).count == binomial(39, 19));
}

TEST_CASE("multinomial values") {
    const int a[] = {2, 2};
    CHECK(multinomial(4, a) == 6);
    const int b[] = {2, 2, 2};
    CHECK(multinomial(6, b) == 90);
    const int c[] = {11};
    CHECK(multinomial(11, c) == 1);
    // (2p)! at p = 11 no longer fits in 64 bits
    const int d[] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(multinomial(22, d) == BigInt("1124000727777607680000"));
    const int bad[] = {2, -1, 1};
    CHECK_THROWS_AS(multinomial(2, bad), DomainError);
    const int wrong[] = {1, 1};
    CHECK_THROWS_AS(multinomial(3, wrong), DomainError);
}

TEST_CASE("multinomial is symmetric under permutations of the parts") {
    std::vector<int> parts{3, 1, 4, 0, 2};
    const auto ref = multinomial(10, parts);
    std::sort(parts.begin(), parts.end());
    do {
        CHECK(multinomial(10, parts) == ref);
    } while (std::next_permutation(parts.begin(), parts.end()));
}

TEST_CASE("M(2p, 2d) <= (2p)! / 2^p for p <= 8") {
    for (unsigned p = 1; p <= 8; ++p) {
        const auto audit = audit_multinomial_bound(p);
        CHECK(audit.holds);
        CHECK(audit.sequences == (std::uint64_t{1} << (p - 1)));
        CHECK(audit.bound * (BigInt(1) << p) == factorial(2 * p));
        // d = (1, ..., 1) attains the bound
        CHECK(audit.worst == audit.bound);
    }
}

TEST_CASE("factorials convert to doubles") {
    CHECK(to_double(factorial(20)) == 2432902008176640000.0);
    CHECK(to_double(factorial(30)) == doctest::Approx(2.652528598121910e32).epsilon(1e-15));
}
