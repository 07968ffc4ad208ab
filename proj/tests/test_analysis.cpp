#include "mnk/analysis.hpp"
#include "mnk/error.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <numeric>

using namespace mnk;

namespace {

std::vector<RunResult> results(int successes, int failures, std::int64_t time, std::int64_t t_max) {
    std::vector<RunResult> out;
    for (int i = 0; i < successes; ++i) out.push_back({true, time, 1, {}, {}});
    for (int i = 0; i < failures; ++i) out.push_back({false, t_max, 1, {}, {}});
    return out;
}

// Closed-form simple regression.
std::pair<double, double> closed_form(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double sx = std::accumulate(x.begin(), x.end(), 0.0), sy = std::accumulate(y.begin(), y.end(), 0.0);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {(sy - slope * sx) / n, slope};
}

double plain_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

BayesianNetwork chain3() {
    BayesianNetwork net;
    net.structure = BNStructure::empty(3);
    net.structure.parents = {{}, {0}, {1}};
    net.structure.ordering = {0, 1, 2};
    net.cpts.theta = {{{0.3, 0.7}}, {{0.9, 0.1}, {0.2, 0.8}}, {{0.6, 0.4}, {0.25, 0.75}}};
    return net;
}

BayesianNetwork uniform(int n) {
    BayesianNetwork net;
    net.structure = BNStructure::empty(n);
    net.cpts = uniform_cpts(net.structure);
    return net;
}

ObjectiveVector vec(std::initializer_list<double> v) {
    ObjectiveVector z(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) z(i++) = x;
    return z;
}

} // namespace

TEST_CASE("estimate_ert") {
    const auto all = estimate_ert(results(100, 0, 10, 1000), 1000);
    CHECK(all.p_hat == 1.0);
    CHECK(all.value() == 10.0);

    const auto half = estimate_ert(results(50, 50, 10, 100), 100);
    CHECK(half.p_hat == 0.5);
    CHECK(half.value() == 110.0);
    CHECK(half.successes == 50);
    CHECK(half.runs == 100);

    const auto none = estimate_ert(results(0, 100, 10, 100), 100);
    CHECK(none.censored());
    CHECK(none.p_hat == 0.0);
    CHECK_THROWS_AS(none.value(), CensoredErt);

    CHECK_THROWS_AS(estimate_ert(std::span<const RunResult>{}, 100), InvalidParameter);

    std::vector<RunRecord> recs{{"a", "mboa", 0, true, 20, 1}, {"a", "mboa", 1, false, 100, 3}};
    CHECK(estimate_ert(recs, 100).value() == 120.0);
}

TEST_CASE("ert decreases as the success rate grows") {
    double previous = std::numeric_limits<double>::infinity();
    for (int s = 1; s <= 20; ++s) {
        const double e = estimate_ert(results(s, 20 - s, 37, 500), 500).value();
        CHECK(e < previous);
        previous = e;
    }
}

TEST_CASE("fit_simple") {
    SUBCASE("exact line") {
        const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
        const auto f = fit_simple(x, y);
        CHECK(f.model.coefficients(0) == doctest::Approx(1.0));
        CHECK(f.model.coefficients(1) == doctest::Approx(2.0));
        CHECK(f.stats.r == doctest::Approx(1.0));
        CHECK(f.stats.mae == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(f.stats.rmse == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("constant predictor") {
        const std::vector<double> x{2, 2, 2, 2}, y{1, 4, 2, 5};
        const auto f = fit_simple(x, y, "none");
        CHECK(f.model.coefficients(1) == 0.0);
        CHECK(f.model.coefficients(0) == doctest::Approx(3.0));
        CHECK(f.stats.r == 0.0);
        CHECK(f.stats.mae == doctest::Approx(1.5));
    }
    SUBCASE("hand points against the closed form") {
        const std::vector<double> x{1, 2, 4, 5, 7}, y{2.1, 2.9, 5.2, 5.8, 8.4};
        const auto [b0, b1] = closed_form(x, y);
        const auto f = fit_simple(x, y);
        CHECK(f.model.coefficients(0) == doctest::Approx(b0).epsilon(1e-12));
        CHECK(f.model.coefficients(1) == doctest::Approx(b1).epsilon(1e-12));
        std::vector<double> pred;
        double abs_sum = 0, sq_sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            pred.push_back(b0 + b1 * x[i]);
            abs_sum += std::abs(pred.back() - y[i]);
            sq_sum += (pred.back() - y[i]) * (pred.back() - y[i]);
        }
        CHECK(f.stats.r == doctest::Approx(std::abs(plain_pearson(pred, y))));
        CHECK(f.stats.mae == doctest::Approx(abs_sum / 5));
        CHECK(f.stats.rmse == doctest::Approx(std::sqrt(sq_sum / 5)));
        CHECK(f.stats.rmse >= f.stats.mae);
    }
    const std::vector<double> two{1, 2};
    CHECK_THROWS_AS(fit_simple(two, two), InsufficientData);
}

TEST_CASE("fit_multiple") {
    Rng rng(6);
    Eigen::MatrixXd x(30, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.uniform01() * 10 - 5;
    const Eigen::Vector4d beta(0.5, -1.25, 3.0, 0.75);
    const Eigen::VectorXd y = (x * beta.tail(3)).array() + beta(0);
    const auto f = fit_multiple(x, y, {"a", "b", "c"});
    CHECK((f.model.coefficients - beta).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(f.stats.r == doctest::Approx(1.0));
    CHECK(f.stats.mae <= 1e-9);
    CHECK(f.stats.rmse <= 1e-9);
    CHECK(f.model.predict(x.row(4)) == doctest::Approx(y(4)));

    Eigen::MatrixXd dup(30, 3);
    dup << x.col(0), x.col(1), x.col(0);
    try {
        fit_multiple(dup, y, {"a", "b", "a_copy"});
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        const std::string msg = e.what();
        CHECK((msg.find("a_copy") != std::string::npos || msg.find("a") != std::string::npos));
        CHECK(msg.find("collinear") != std::string::npos);
    }

    SUBCASE("normal equations") {
        Eigen::MatrixXd h(6, 2);
        h << 1, 2, 2, 1, 3, 5, 4, 3, 5, 6, 6, 4;
        Eigen::VectorXd hy(6);
        hy << 3.1, 2.2, 7.9, 6.1, 10.8, 8.7;
        Eigen::MatrixXd a(6, 3);
        a << Eigen::VectorXd::Ones(6), h;
        const Eigen::Vector3d expected = (a.transpose() * a).inverse() * (a.transpose() * hy);
        const auto g = fit_multiple(h, hy);
        CHECK((g.model.coefficients - expected).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("k-fold partition and cross validation") {
    const auto folds = kfold_partition(120, 10, 3);
    REQUIRE(folds.size() == 10);
    std::vector<int> seen(120, 0);
    for (const auto& f : folds) {
        CHECK(f.size() == 12);
        for (auto i : f) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK(kfold_partition(120, 10, 3) == folds);
    const auto uneven = kfold_partition(23, 5, 1);
    CHECK(uneven[0].size() == 5);
    CHECK(uneven[2].size() == 5);
    CHECK(uneven[3].size() == 4);
    CHECK_THROWS_AS(kfold_partition(3, 5, 1), InsufficientData);
    CHECK_THROWS_AS(kfold_partition(3, 1, 1), InvalidParameter);

    SUBCASE("exact data") {
        Eigen::MatrixXd x(40, 2);
        Rng rng(2);
        for (Eigen::Index i = 0; i < 40; ++i) x.row(i) << rng.uniform01(), rng.uniform01();
        const Eigen::VectorXd y = (2 * x.col(0) - x.col(1)).array() + 1.0;
        const auto cv = kfold_cv(x, y, 10, 5);
        CHECK(cv.r == doctest::Approx(1.0));
        CHECK(cv.mae <= 1e-10);
        const auto again = kfold_cv(x, y, 10, 5);
        CHECK(again.r == cv.r);
        CHECK(again.mae == cv.mae);
        CHECK(again.rmse == cv.rmse);
    }

    SUBCASE("leave-one-out by hand") {
        const std::vector<double> xs{1, 2, 4, 5, 7}, ys{2.1, 2.9, 5.2, 5.8, 8.4};
        std::vector<double> pred(5);
        for (std::size_t out = 0; out < 5; ++out) {
            std::vector<double> tx, ty;
            for (std::size_t i = 0; i < 5; ++i)
                if (i != out) {
                    tx.push_back(xs[i]);
                    ty.push_back(ys[i]);
                }
            const auto [b0, b1] = closed_form(tx, ty);
            pred[out] = b0 + b1 * xs[out];
        }
        double abs_sum = 0, sq_sum = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            abs_sum += std::abs(pred[i] - ys[i]);
            sq_sum += (pred[i] - ys[i]) * (pred[i] - ys[i]);
        }
        Eigen::MatrixXd x(5, 1);
        Eigen::VectorXd y(5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            x(i, 0) = xs[static_cast<std::size_t>(i)];
            y(i) = ys[static_cast<std::size_t>(i)];
        }
        const auto cv = kfold_cv(x, y, 5, 99);
        CHECK(cv.mae == doctest::Approx(abs_sum / 5));
        CHECK(cv.rmse == doctest::Approx(std::sqrt(sq_sum / 5)));
        CHECK(cv.r == doctest::Approx(std::abs(plain_pearson(pred, ys))));
    }
}

TEST_CASE("backward elimination") {
    Rng rng(10);
    const Eigen::Index n = 120;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) << rng.uniform01(), rng.uniform01(), rng.uniform01();
        y(i) = 3 * x(i, 0) - 2 * x(i, 2) + 1e-3 * (rng.uniform01() - 0.5);
    }
    const auto ladder = backward_eliminate(x, y, {"signal_a", "noise", "signal_b"}, 10, 1);
    REQUIRE(ladder.steps.size() == 3);
    CHECK(ladder.steps[0].removed == "noise");
    CHECK(ladder.steps[0].remaining == std::vector<std::string>{"signal_a", "signal_b"});
    CHECK(ladder.all_fit.r > 0.999);
    CHECK(ladder.steps.back().remaining.empty());
    CHECK(ladder.steps.back().fit.r == 0.0);
    CHECK(ladder.steps.back().cv.r == 0.0);
    for (const auto& s : ladder.steps) {
        CHECK(s.fit.rmse >= s.fit.mae);
        CHECK(s.cv.rmse >= s.cv.mae);
    }
    CHECK_THROWS_AS(backward_eliminate(x.leftCols(1), y, {"a"}, 10, 1), InvalidParameter);

    SUBCASE("ties go to the smaller name") {
        Eigen::MatrixXd twin(n, 2);
        twin << x.col(0), x.col(0);
        const auto t = backward_eliminate(twin, y, {"b", "a"}, 10, 1);
        CHECK(t.steps[0].removed == "a");
    }
}

TEST_CASE("covariates and rank correlation") {
    REQUIRE(covariates().size() == 9);
    CHECK(covariates()[0].name == "log(m)");
    CHECK(covariates()[0].transform == Transform::log);
    CHECK(covariates()[3].name == "hv");
    CHECK(covariates()[3].transform == Transform::identity);
    FeatureVector f{2, 4, 10, 0.5, 3, 6, 2, 0.5, 3};
    const auto row = covariate_row(f);
    CHECK(row(0) == doctest::Approx(std::log(2.0)));
    CHECK(row(1) == doctest::Approx(std::log(4.0)));
    CHECK(row(7) == doctest::Approx(std::log(0.5)));
    CHECK(row(8) == 3.0);
    f.k = 0;
    CHECK_THROWS_AS(covariate_row(f), InvalidParameter);

    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 9, 16, 100}, c{5, 3, 4, 2, 1};
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    CHECK(spearman(a, c) == doctest::Approx(-0.9));
    const std::vector<double> tied{1, 1, 2, 2}, other{1, 2, 3, 4};
    // Average ranks 1.5,1.5,3.5,3.5 against 1..4.
    CHECK(spearman(tied, other) == doctest::Approx(plain_pearson({1.5, 1.5, 3.5, 3.5}, {1, 2, 3, 4})));
}

TEST_CASE("pmf view") {
    SUBCASE("uniform model") {
        const auto inst = generate_instance(3, 10, 3, 2);
        const auto pareto = enumerate_pareto(inst);
        const std::vector<BayesianNetwork> models{uniform(10)};
        const auto rows = pareto_pmf_view(models, pareto);
        REQUIRE(rows.size() == pareto.size());
        for (const auto& r : rows) CHECK(r.mean_pmf == doctest::Approx(std::ldexp(1.0, -10)));
        ObjectiveVector ideal = pareto.objectives[0];
        for (const auto& z : pareto.objectives) ideal = ideal.cwiseMax(z);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].dist_to_ideal == doctest::Approx((rows[i].z - ideal).norm()));
            CHECK(rows[i].rank == static_cast<int>(i + 1));
            if (i > 0) CHECK(rows[i - 1].dist_to_ideal <= rows[i].dist_to_ideal);
        }
    }
    SUBCASE("hand toy") {
        ParetoSet p;
        p.instance_id = "toy";
        p.solutions = {Solution::from_string("011"), Solution::from_string("100"), Solution::from_string("110")};
        p.objectives = {vec({0.9, 0.2, 0.5}), vec({0.4, 0.8, 0.5}), vec({0.6, 0.6, 0.7})};
        const std::vector<BayesianNetwork> models{chain3(), uniform(3)};
        const auto rows = pareto_pmf_view(models, p);
        // Ideal point (0.9, 0.8, 0.7).
        // 011: chain 0.3*0.1*0.75, distances (0, 0.6, 0.2)
        // 100: chain 0.7*0.2*0.6,  distances (0.5, 0, 0.2)
        // 110: chain 0.7*0.8*0.25, distances (0.3, 0.2, 0)
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].x.to_string() == "110");
        CHECK(rows[0].mean_pmf == doctest::Approx((0.7 * 0.8 * 0.25 + 0.125) / 2));
        CHECK(rows[0].dist_to_ideal == doctest::Approx(std::sqrt(0.09 + 0.04)));
        CHECK(rows[1].x.to_string() == "100");
        CHECK(rows[1].mean_pmf == doctest::Approx((0.7 * 0.2 * 0.6 + 0.125) / 2));
        CHECK(rows[1].dist_to_ideal == doctest::Approx(std::sqrt(0.25 + 0.04)));
        CHECK(rows[2].x.to_string() == "011");
        CHECK(rows[2].mean_pmf == doctest::Approx((0.3 * 0.1 * 0.75 + 0.125) / 2));
        CHECK(rows[2].dist_to_ideal == doctest::Approx(std::sqrt(0.36 + 0.04)));
        CHECK(rows[2].rank == 3);

        const auto csv = pmf_view_to_csv(rows);
        CHECK(csv.rfind("bitstring,z1,z2,z3,mean_pmf,dist_to_ideal,rank\n", 0) == 0);

        const std::vector<BayesianNetwork> wrong{uniform(4)};
        CHECK_THROWS_AS(pareto_pmf_view(wrong, p), LengthMismatch);
    }
    SUBCASE("two objectives keep front order") {
        const auto inst = generate_instance(5, 10, 2, 4);
        const auto pareto = enumerate_pareto(inst);
        const std::vector<BayesianNetwork> models{uniform(10)};
        const auto rows = pareto_pmf_view(models, pareto);
        for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].x == pareto.solutions[i]);
    }
}
