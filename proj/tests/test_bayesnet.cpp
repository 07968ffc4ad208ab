#include "mnk/bayesnet.hpp"
#include "mnk/error.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

using namespace mnk;

namespace {

Dataset from_strings(int n, std::initializer_list<const char*> rows) {
    Dataset d;
    d.n_vars = n;
    for (const char* r : rows) d.push_back(Solution::from_string(r));
    return d;
}

Dataset coin_data(int n, std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.n_vars = n;
    for (std::size_t i = 0; i < rows; ++i) d.push_back(Solution(n, rng.below(std::uint64_t{1} << n)));
    return d;
}

// Cooper-Herskovits score with r = 2 from direct counting over a map of parent tuples.
double oracle_family_score(const Dataset& d, int var, const std::vector<int>& parents) {
    std::map<std::vector<int>, std::array<int, 2>> counts;
    for (const auto& x : d.rows) {
        std::vector<int> key;
        for (int p : parents) key.push_back(x[p] ? 1 : 0);
        ++counts[key][x[var] ? 1 : 0];
    }
    double score = 0.0;
    for (const auto& [key, c] : counts) {
        // log( (r-1)! / (N_j + r - 1)! * prod N_jk! ) with r = 2
        score += std::lgamma(c[0] + 1.0) + std::lgamma(c[1] + 1.0) - std::lgamma(c[0] + c[1] + 2.0);
    }
    return score;
}

// Chain 0 -> 1 -> 2 with fixed tables.
BayesianNetwork chain() {
    BayesianNetwork net;
    net.structure = BNStructure::empty(3);
    net.structure.parents = {{}, {0}, {1}};
    net.structure.ordering = {0, 1, 2};
    net.cpts.theta = {{{0.3, 0.7}}, {{0.9, 0.1}, {0.2, 0.8}}, {{0.6, 0.4}, {0.25, 0.75}}};
    return net;
}

} // namespace

TEST_CASE("fit_parameters: smoothed frequencies") {
    const auto d = from_strings(1, {"1", "0", "1", "0", "1"});
    const auto c = fit_parameters(BNStructure::empty(1), d);
    CHECK(c.theta[0][0][1] == doctest::Approx(4.0 / 7.0));
    CHECK(c.theta[0][0][0] == doctest::Approx(3.0 / 7.0));

    Dataset empty;
    empty.n_vars = 4;
    const auto u = fit_parameters(BNStructure::empty(4), empty);
    for (const auto& rows : u.theta)
        for (const auto& row : rows) CHECK(row == std::array<double, 2>{0.5, 0.5});

    Dataset wrong;
    wrong.n_vars = 3;
    CHECK_THROWS_AS(fit_parameters(BNStructure::empty(4), wrong), LengthMismatch);
    CHECK_THROWS_AS(wrong.push_back(Solution::from_string("01")), LengthMismatch);
}

TEST_CASE("fit_parameters: one parent, hand counts") {
    // Variable 1 has parent 0.
    //   x0=0 rows: x1 = 0,0,1    -> N = 3, N1 = 1
    //   x0=1 rows: x1 = 1,1,1    -> N = 3, N1 = 3
    const auto d = from_strings(2, {"00", "00", "01", "11", "11", "11"});
    BNStructure s = BNStructure::empty(2);
    s.parents[1] = {0};
    const auto c = fit_parameters(s, d);
    REQUIRE(c.theta[1].size() == 2);
    CHECK(c.theta[1][0][1] == doctest::Approx(2.0 / 5.0));
    CHECK(c.theta[1][0][0] == doctest::Approx(3.0 / 5.0));
    CHECK(c.theta[1][1][1] == doctest::Approx(4.0 / 5.0));
    CHECK(c.theta[1][1][0] == doctest::Approx(1.0 / 5.0));
    CHECK(c.theta[0][0][1] == doctest::Approx(4.0 / 8.0));
}

TEST_CASE("fit_parameters: rows sum to one and stay inside (0,1)") {
    const auto d = coin_data(6, 40, 3);
    BNStructure s = BNStructure::empty(6);
    s.parents = {{}, {0}, {0, 1}, {0, 1, 2}, {3}, {1, 4}};
    const auto c = fit_parameters(s, d);
    for (const auto& rows : c.theta)
        for (const auto& row : rows) {
            CHECK(std::abs(row[0] + row[1] - 1.0) <= 1e-12);
            CHECK(row[0] > 0.0);
            CHECK(row[1] > 0.0);
        }
    CHECK(c.theta[3].size() == 8);
}

TEST_CASE("k2_family_score matches direct counting") {
    const auto d = coin_data(5, 60, 11);
    for (int v = 0; v < 5; ++v)
        for (const auto& pa : std::vector<std::vector<int>>{{}, {0}, {1, 3}, {0, 2, 4}}) {
            if (std::find(pa.begin(), pa.end(), v) != pa.end()) continue;
            CHECK(k2_family_score(d, v, pa) == doctest::Approx(oracle_family_score(d, v, pa)).epsilon(1e-12));
        }
}

TEST_CASE("k2_learn: independent coins give no arcs") {
    const auto d = coin_data(6, 500, 2);
    std::vector<int> ordering{3, 0, 5, 1, 4, 2};
    // The oracle: no single arc from a predecessor improves any family.
    for (std::size_t i = 0; i < ordering.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            CHECK(oracle_family_score(d, ordering[i], {ordering[j]}) <= oracle_family_score(d, ordering[i], {}));
    const auto s = k2_learn(d, ordering, 3);
    for (const auto& pa : s.parents) CHECK(pa.empty());
    CHECK(s.ordering == ordering);
}

TEST_CASE("k2_learn adds a first parent exactly when some single arc improves the family") {
    // Finite coin samples do produce the odd spurious arc; the learner must agree with
    // the score about when that happens.
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto d = coin_data(6, 500, seed);
        const std::vector<int> ordering{0, 1, 2, 3, 4, 5};
        const auto s = k2_learn(d, ordering, 3);
        for (int v = 0; v < 6; ++v) {
            bool improves = false;
            for (int u = 0; u < v; ++u) improves = improves || oracle_family_score(d, v, {u}) > oracle_family_score(d, v, {});
            CHECK(improves == !s.parents[static_cast<std::size_t>(v)].empty());
        }
    }
}

TEST_CASE("k2_learn: a copied column gets its source as parent") {
    Rng rng(8);
    Dataset d;
    d.n_vars = 3;
    for (int i = 0; i < 200; ++i) {
        Solution x(3, rng.below(8));
        x.set(1, x[0]);
        d.push_back(x);
    }
    CHECK(oracle_family_score(d, 1, {0}) > oracle_family_score(d, 1, {}));
    const std::vector<int> ordering{0, 1, 2};
    const auto s = k2_learn(d, ordering, 3);
    CHECK(s.parents[1] == std::vector<int>{0});
    CHECK(s.parents[0].empty());
    validate(s, 3);

    const auto none = k2_learn(d, ordering, 0);
    for (const auto& pa : none.parents) CHECK(pa.empty());

    const std::vector<int> bad{0, 0, 2};
    CHECK_THROWS_AS(k2_learn(d, bad, 3), InvalidParameter);
    const std::vector<int> short_ordering{0, 1};
    CHECK_THROWS_AS(k2_learn(d, short_ordering, 3), InvalidParameter);
    CHECK_THROWS_AS(k2_learn(d, ordering, -1), InvalidParameter);
}

TEST_CASE("k2_learn respects the ordering and the parent cap") {
    // Strongly dependent columns: every later variable copies a parity of earlier ones.
    Rng rng(4);
    Dataset d;
    d.n_vars = 6;
    for (int i = 0; i < 300; ++i) {
        Solution x(6, rng.below(64));
        x.set(3, x[0] != x[1]);
        x.set(4, x[0] != x[2]);
        x.set(5, (x[1] != x[2]) != x[3]);
        d.push_back(x);
    }
    const std::vector<int> ordering{5, 4, 3, 2, 1, 0};
    for (int cap : {1, 2, 3}) {
        const auto s = k2_learn(d, ordering, cap);
        validate(s, cap);
        std::vector<int> position(6);
        for (int i = 0; i < 6; ++i) position[static_cast<std::size_t>(ordering[static_cast<std::size_t>(i)])] = i;
        for (int v = 0; v < 6; ++v)
            for (int p : s.parents[static_cast<std::size_t>(v)]) CHECK(position[static_cast<std::size_t>(p)] < position[static_cast<std::size_t>(v)]);
    }
}

TEST_CASE("joint_pmf") {
    const auto uniform = BNStructure::empty(10);
    const auto c = uniform_cpts(uniform);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) CHECK(joint_pmf(uniform, c, Solution(10, rng.below(1024))) == doctest::Approx(std::ldexp(1.0, -10)));

    const auto net = chain();
    CHECK(joint_pmf(net.structure, net.cpts, Solution::from_string("000")) == doctest::Approx(0.3 * 0.9 * 0.6));
    CHECK(joint_pmf(net.structure, net.cpts, Solution::from_string("011")) == doctest::Approx(0.3 * 0.1 * 0.75));
    CHECK(joint_pmf(net.structure, net.cpts, Solution::from_string("110")) == doctest::Approx(0.7 * 0.8 * 0.25));
    CHECK(log_joint_pmf(net.structure, net.cpts, Solution::from_string("101")) == doctest::Approx(std::log(0.7 * 0.2 * 0.4)));
    CHECK_THROWS_AS(joint_pmf(net.structure, net.cpts, Solution::from_string("0101")), LengthMismatch);
}

TEST_CASE("joint_pmf normalises over the full space") {
    for (int n : {3, 8, 12}) {
        const auto d = coin_data(n, 80, static_cast<std::uint64_t>(n));
        std::vector<int> ordering(static_cast<std::size_t>(n));
        std::iota(ordering.begin(), ordering.end(), 0);
        const auto s = k2_learn(d, ordering, 3);
        const auto c = fit_parameters(s, d);
        double total = 0.0;
        for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) total += joint_pmf(s, c, Solution(n, b));
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("sample") {
    const auto net = chain();
    CHECK(sample(net.structure, net.cpts, 0, 5).size() == 0);

    SUBCASE("near-certain marginal") {
        const int n_seen = 50;
        const double p1 = 1.0 - 1.0 / (2.0 + n_seen);
        auto s = BNStructure::empty(1);
        CPTs c;
        c.theta = {{{1.0 - p1, p1}}};
        const std::size_t count = 100'000;
        const auto d = sample(s, c, count, 99);
        double ones = 0;
        for (const auto& x : d.rows) ones += x[0];
        const double sigma = std::sqrt(p1 * (1 - p1) / count);
        CHECK(std::abs(ones / count - p1) <= 3 * sigma);
    }

    SUBCASE("empirical joint and refit") {
        const std::size_t count = 100'000;
        const auto d = sample(net.structure, net.cpts, count, 7);
        std::array<double, 8> freq{};
        for (const auto& x : d.rows) freq[x.bits()] += 1.0 / count;
        double l1 = 0.0;
        for (std::uint64_t b = 0; b < 8; ++b) l1 += std::abs(freq[b] - joint_pmf(net.structure, net.cpts, Solution(3, b)));
        CHECK(l1 <= 0.02);
        const auto refit = fit_parameters(net.structure, d);
        for (std::size_t v = 0; v < 3; ++v)
            for (std::size_t j = 0; j < net.cpts.theta[v].size(); ++j)
                for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(refit.theta[v][j][k] - net.cpts.theta[v][j][k]) <= 0.02);
    }

    SUBCASE("deterministic given seed") {
        const auto a = sample(net.structure, net.cpts, 100, 3);
        const auto b = sample(net.structure, net.cpts, 100, 3);
        CHECK(a.rows == b.rows);
    }
}

TEST_CASE("structure validation and persistence") {
    BNStructure cyc = BNStructure::empty(2);
    cyc.parents = {{1}, {0}};
    CHECK_THROWS_AS(validate(cyc), InvalidParameter);
    BNStructure unsorted = BNStructure::empty(3);
    unsorted.parents = {{}, {}, {1, 0}};
    CHECK_THROWS_AS(validate(unsorted), InvalidParameter);
    BNStructure many = BNStructure::empty(4);
    many.parents = {{}, {}, {}, {0, 1, 2}};
    CHECK_NOTHROW(validate(many));
    CHECK_THROWS_AS(validate(many, 2), InvalidParameter);

    const auto net = chain();
    const auto back = network_from_json(network_to_json(net));
    CHECK(back.structure == net.structure);
    CHECK(back.cpts.theta == net.cpts.theta);
    CHECK_THROWS_AS(network_from_json("{\"n_vars\": 2}"), MalformedFile);
}
