#include "mnk/analysis.hpp"

#include "mnk/error.hpp"
#include "mnk/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace mnk {

double ErtRecord::value() const {
    if (!ert) throw CensoredErt("ert of " + instance_id + " (" + algorithm + ") is censored: no successful run");
    return *ert;
}

namespace {

template <typename Range, typename Pred, typename Time>
ErtRecord ert_from(const Range& runs, std::int64_t t_max, Pred success, Time time) {
    if (runs.empty()) throw InvalidParameter("estimate_ert: no runs");
    ErtRecord rec;
    rec.runs = static_cast<int>(runs.size());
    rec.t_max = t_max;
    for (const auto& r : runs) {
        if (!success(r)) continue;
        if (time(r) > t_max) throw InvalidParameter("estimate_ert: success time exceeds t_max");
        ++rec.successes;
        rec.success_times.push_back(time(r));
    }
    rec.p_hat = static_cast<double>(rec.successes) / static_cast<double>(rec.runs);
    if (rec.successes > 0) {
        const double mean = static_cast<double>(std::accumulate(rec.success_times.begin(), rec.success_times.end(), std::int64_t{0})) /
                            static_cast<double>(rec.successes);
        rec.ert = (1.0 - rec.p_hat) / rec.p_hat * static_cast<double>(t_max) + mean;
    }
    return rec;
}

} // namespace

ErtRecord estimate_ert(std::span<const RunResult> results, std::int64_t t_max) {
    return ert_from(
        results, t_max, [](const RunResult& r) { return r.success; }, [](const RunResult& r) { return r.evaluations; });
}

ErtRecord estimate_ert(std::span<const RunRecord> records, std::int64_t t_max) {
    ErtRecord rec = ert_from(
        records, t_max, [](const RunRecord& r) { return r.success; }, [](const RunRecord& r) { return r.evaluations; });
    rec.instance_id = records.front().instance_id;
    rec.algorithm = records.front().algorithm;
    return rec;
}

const char* to_string(Transform t) { return t == Transform::log ? "log" : "identity"; }

double RegressionModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& features) const {
    if (features.size() + 1 != coefficients.size()) throw LengthMismatch("predict: feature count differs from the model");
    return coefficients(0) + features.dot(coefficients.tail(features.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw LengthMismatch("pearson: lengths differ");
    const auto n = static_cast<double>(a.size());
    if (a.empty()) return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
        i = j + 1;
    }
    return ranks;
}

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

ModelStats model_stats(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed, bool has_predictors) {
    if (predicted.size() != observed.size()) throw LengthMismatch("model_stats: lengths differ");
    ModelStats s;
    if (predicted.size() == 0) return s;
    const Eigen::ArrayXd residual = (predicted - observed).array();
    s.mae = residual.abs().mean();
    s.rmse = std::sqrt(residual.square().mean());
    s.r = has_predictors ? std::abs(pearson(as_span(predicted), as_span(observed))) : 0.0;
    return s;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    return a;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return with_intercept(x).completeOrthogonalDecomposition().solve(y);
}

RegressionModel make_model(Eigen::VectorXd beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::vector<std::string> names, std::vector<Transform> transforms, Eigen::VectorXd& fitted) {
    RegressionModel model;
    if (names.empty())
        for (Eigen::Index c = 0; c < x.cols(); ++c) names.push_back("x" + std::to_string(c + 1));
    if (transforms.empty()) transforms.assign(names.size(), Transform::identity);
    if (names.size() != static_cast<std::size_t>(x.cols()) || transforms.size() != names.size())
        throw LengthMismatch("regression: name/transform count differs from the feature count");
    fitted = with_intercept(x) * beta;
    model.feature_names = std::move(names);
    model.transforms = std::move(transforms);
    model.coefficients = std::move(beta);
    model.residual_sum_squares = (fitted - y).squaredNorm();
    const auto dof = y.size() - x.cols() - 1;
    model.residual_std = dof > 0 ? std::sqrt(model.residual_sum_squares / static_cast<double>(dof)) : 0.0;
    return model;
}

} // namespace

FitResult fit_simple(std::span<const double> xs, std::span<const double> ys, std::string name, Transform transform) {
    if (xs.size() != ys.size()) throw LengthMismatch("fit_simple: xs and ys differ in length");
    if (xs.size() < 3) throw InsufficientData("fit_simple: at least 3 observations required");
    const auto n = static_cast<Eigen::Index>(xs.size());
    const Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), n);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    const double xmean = x.mean();
    const bool degenerate = ((x.array() - xmean).abs() <= 1e-12 * std::max(1.0, std::abs(xmean))).all();
    Eigen::VectorXd beta(2);
    if (degenerate) beta << y.mean(), 0.0;
    else beta = least_squares(x, y);
    Eigen::VectorXd fitted;
    FitResult out;
    out.model = make_model(beta, x, y, {std::move(name)}, {transform}, fitted);
    out.stats = model_stats(fitted, y, !degenerate);
    return out;
}

FitResult fit_multiple(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys, std::vector<std::string> names,
                       std::vector<Transform> transforms) {
    if (features.rows() != ys.size()) throw LengthMismatch("fit_multiple: row count differs from response length");
    if (features.rows() < features.cols() + 1)
        throw InsufficientData("fit_multiple: need at least one more row than feature columns");
    const Eigen::MatrixXd a = with_intercept(features);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < a.cols()) {
        std::string cols;
        for (Eigen::Index i = qr.rank(); i < a.cols(); ++i) {
            const auto c = qr.colsPermutation().indices()(i);
            std::string label = c == 0 ? "intercept"
                                       : (static_cast<std::size_t>(c - 1) < names.size() ? names[static_cast<std::size_t>(c - 1)]
                                                                                     : "x" + std::to_string(c));
            cols += (cols.empty() ? "" : ", ") + label;
        }
        throw RankDeficient("design matrix is rank deficient; collinear columns: " + cols);
    }
    Eigen::VectorXd fitted;
    FitResult out;
    out.model = make_model(qr.solve(ys), features, ys, std::move(names), std::move(transforms), fitted);
    out.stats = model_stats(fitted, ys, features.cols() > 0);
    return out;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw InvalidParameter("k-fold: k must be at least 2");
    if (n < k) throw InsufficientData("k-fold: fewer observations than folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

ModelStats kfold_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys, std::size_t k, std::uint64_t seed) {
    if (features.rows() != ys.size()) throw LengthMismatch("kfold_cv: row count differs from response length");
    const auto n = static_cast<std::size_t>(ys.size());
    const auto folds = kfold_partition(n, k, seed);
    Eigen::VectorXd predicted(ys.size());
    for (const auto& fold : folds) {
        std::vector<char> held(n, 0);
        for (std::size_t i : fold) held[i] = 1;
        const auto train_n = static_cast<Eigen::Index>(n - fold.size());
        Eigen::MatrixXd x(train_n, features.cols());
        Eigen::VectorXd y(train_n);
        Eigen::Index row = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (held[i]) continue;
            x.row(row) = features.row(static_cast<Eigen::Index>(i));
            y(row) = ys(static_cast<Eigen::Index>(i));
            ++row;
        }
        const Eigen::VectorXd beta = least_squares(x, y);
        for (std::size_t i : fold) {
            const auto r = static_cast<Eigen::Index>(i);
            predicted(r) = beta(0) + features.row(r).dot(beta.tail(features.cols()));
        }
    }
    return model_stats(predicted, ys, features.cols() > 0);
}

namespace {

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(cols[c]));
    return out;
}

ModelStats in_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd beta = least_squares(x, y);
    return model_stats(with_intercept(x) * beta, y, x.cols() > 0);
}

} // namespace

EliminationLadder backward_eliminate(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys,
                                     const std::vector<std::string>& names, std::size_t k_folds, std::uint64_t seed) {
    if (features.cols() < 2) throw InvalidParameter("backward_eliminate: at least two features required");
    if (names.size() != static_cast<std::size_t>(features.cols())) throw LengthMismatch("backward_eliminate: one name per feature");
    if (features.rows() != ys.size()) throw LengthMismatch("backward_eliminate: row count differs from response length");

    std::vector<std::size_t> active(names.size());
    std::iota(active.begin(), active.end(), std::size_t{0});
    EliminationLadder ladder;
    ladder.all_fit = in_sample(features, ys);
    ladder.all_cv = kfold_cv(features, ys, k_folds, seed);

    while (!active.empty()) {
        std::size_t best_pos = 0;
        ModelStats best_stats;
        bool have = false;
        for (std::size_t pos = 0; pos < active.size(); ++pos) {
            std::vector<std::size_t> trial = active;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
            const ModelStats s = in_sample(select_columns(features, trial), ys);
            const bool better = !have || s.r > best_stats.r ||
                                (s.r == best_stats.r && names[active[pos]] < names[active[best_pos]]);
            if (better) {
                best_pos = pos;
                best_stats = s;
                have = true;
            }
        }
        EliminationStep step;
        step.removed = names[active[best_pos]];
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_pos));
        for (std::size_t c : active) step.remaining.push_back(names[c]);
        const Eigen::MatrixXd x = select_columns(features, active);
        step.fit = best_stats;
        step.cv = kfold_cv(x, ys, k_folds, seed);
        ladder.steps.push_back(std::move(step));
    }
    return ladder;
}

const std::vector<CovariateSpec>& covariates() {
    static const std::vector<CovariateSpec> specs = {
        {"log(m)", Transform::log},        {"log(k)", Transform::log},       {"log(npo)", Transform::log},
        {"hv", Transform::identity},       {"avgd", Transform::identity},    {"maxd", Transform::identity},
        {"log(nconnec)", Transform::log},  {"log(lconnec)", Transform::log}, {"kconnec", Transform::identity},
    };
    return specs;
}

Eigen::RowVectorXd covariate_row(const FeatureVector& f) {
    if (f.m <= 0 || f.k <= 0 || f.npo <= 0 || f.nconnec <= 0 || !(f.lconnec > 0.0))
        throw InvalidParameter("covariate_row: log-transformed features must be positive (k = 0 has no log)");
    Eigen::RowVectorXd row(9);
    row << std::log(f.m), std::log(f.k), std::log(f.npo), f.hv, f.avgd, f.maxd, std::log(f.nconnec), std::log(f.lconnec),
        static_cast<double>(f.kconnec);
    return row;
}

std::vector<PmfRow> pareto_pmf_view(std::span<const BayesianNetwork> models, const ParetoSet& pareto) {
    if (models.empty()) throw InvalidParameter("pareto_pmf_view: no models");
    if (pareto.size() == 0) throw InvalidParameter("pareto_pmf_view: empty Pareto set");
    const int n = pareto.solutions.front().size();
    for (const auto& net : models)
        if (net.structure.n_vars != n) throw LengthMismatch("pareto_pmf_view: model arity differs from the instance N");

    const ObjectiveMatrix objs = objective_matrix(pareto.objectives);
    const Eigen::RowVectorXd ideal = objs.colwise().maxCoeff();
    std::vector<PmfRow> rows(pareto.size());
    for (std::size_t i = 0; i < pareto.size(); ++i) {
        auto& row = rows[i];
        row.x = pareto.solutions[i];
        row.z = pareto.objectives[i];
        double sum = 0.0;
        for (const auto& net : models) sum += joint_pmf(net.structure, net.cpts, row.x);
        row.mean_pmf = sum / static_cast<double>(models.size());
        row.dist_to_ideal = (objs.row(static_cast<Eigen::Index>(i)) - ideal).norm();
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].dist_to_ideal < rows[b].dist_to_ideal; });
    for (std::size_t r = 0; r < order.size(); ++r) rows[order[r]].rank = static_cast<int>(r) + 1;
    if (pareto.n_objectives() >= 3) {
        std::vector<PmfRow> sorted;
        sorted.reserve(rows.size());
        for (std::size_t i : order) sorted.push_back(rows[i]);
        rows = std::move(sorted);
    }
    return rows;
}

std::string pmf_view_to_csv(std::span<const PmfRow> rows) {
    std::string out = "bitstring";
    const auto m = rows.empty() ? 0 : rows.front().z.size();
    for (Eigen::Index i = 0; i < m; ++i) out += ",z" + std::to_string(i + 1);
    out += ",mean_pmf,dist_to_ideal,rank\n";
    char buf[64];
    for (const auto& row : rows) {
        out += row.x.to_string();
        for (double v : row.z) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", row.mean_pmf);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.17g,%d\n", row.dist_to_ideal, row.rank);
        out += buf;
    }
    return out;
}

} // namespace mnk
