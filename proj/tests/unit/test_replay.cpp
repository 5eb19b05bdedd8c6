#include <doctest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "softtree/error.hpp"
#include "softtree/replay.hpp"

using namespace softtree;

namespace {

Transition tagged(double c) {
    Transition t;
    t.c = c;
    return t;
}

}  // namespace

TEST_CASE("fifo eviction keeps size bounded") {
    ReplayBuffer buf(3, 0);
    CHECK_THROWS_AS(ReplayBuffer(0, 0), ValidationError);
    for (int i = 0; i < 5; ++i) buf.push(tagged(i));
    CHECK(buf.size() == 3);
    std::vector<double> held;
    for (std::size_t i = 0; i < buf.size(); ++i) held.push_back(buf[i].c);
    std::sort(held.begin(), held.end());
    CHECK(held == std::vector<double>{2, 3, 4});
    CHECK_THROWS_AS(buf.push(tagged(std::numeric_limits<double>::quiet_NaN())), ValidationError);
}

TEST_CASE("sampling needs a full batch") {
    ReplayBuffer buf(10, 1);
    buf.push(tagged(1));
    CHECK_THROWS_AS(buf.sample(2), ContractViolation);
    buf.push(tagged(2));
    CHECK(buf.sample(2).size() == 2);
}

TEST_CASE("sampling is seed-deterministic") {
    ReplayBuffer a(100, 9), b(100, 9);
    for (int i = 0; i < 50; ++i) {
        a.push(tagged(i));
        b.push(tagged(i));
    }
    CHECK(a.sample_indices(32) == b.sample_indices(32));
}

TEST_CASE("sample indices are uniform (chi-square)") {
    constexpr std::size_t n = 50;
    ReplayBuffer buf(n, 123);
    for (std::size_t i = 0; i < n; ++i) buf.push(tagged(static_cast<double>(i)));
    std::vector<double> counts(n, 0.0);
    constexpr std::size_t draws = 100000;
    for (std::size_t k = 0; k < draws / n; ++k)
        for (auto i : buf.sample_indices(n)) counts[i] += 1.0;
    const double expected = static_cast<double>(draws) / n;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // Upper 0.001 quantile of chi-square with 49 degrees of freedom.
    CHECK(chi2 < 85.35);
}
