#pragma once

#include "mnk/bayesnet.hpp"
#include "mnk/enumeration.hpp"
#include "mnk/features.hpp"
#include "mnk/optimizers.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mnk {

// ---------------------------------------------------------------------------
// Expected runtime

struct ErtRecord {
    std::string instance_id;
    std::string algorithm;
    int runs = 0;
    int successes = 0;
    std::vector<std::int64_t> success_times;
    std::int64_t t_max = 0;
    double p_hat = 0.0;
    std::optional<double> ert; // empty when no run succeeded

    bool censored() const noexcept { return !ert.has_value(); }
    // Throws CensoredErt for a record without successful runs.
    double value() const;
};

// ert = (1 - p) / p * t_max + mean success time, p = successes / runs.
ErtRecord estimate_ert(std::span<const RunResult> results, std::int64_t t_max);
ErtRecord estimate_ert(std::span<const RunRecord> records, std::int64_t t_max);

// How records without successes enter a regression.
enum class CensoredPolicy {
    exclude,     // drop the instance (default)
    impute_tmax, // use t_max as its ert
};

// ---------------------------------------------------------------------------
// Linear cost models

enum class Transform { identity, log };

const char* to_string(Transform t);

struct ModelStats {
    double r = 0.0; // |Pearson(predicted, observed)|, 0 for a model without predictors
    double mae = 0.0;
    double rmse = 0.0;
};

struct RegressionModel {
    std::vector<std::string> feature_names;
    std::vector<Transform> transforms;
    Eigen::VectorXd coefficients; // intercept first
    double residual_sum_squares = 0.0;
    double residual_std = 0.0;

    // `features` holds already-transformed values, one per feature.
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& features) const;
};

struct FitResult {
    RegressionModel model;
    ModelStats stats;
};

ModelStats model_stats(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed, bool has_predictors = true);

// One-predictor OLS. A zero-variance predictor yields slope 0, intercept mean(y) and r = 0.
FitResult fit_simple(std::span<const double> xs, std::span<const double> ys, std::string name = "x",
                     Transform transform = Transform::identity);

// OLS with intercept via column-pivoted QR; throws RankDeficient naming the collinear columns.
FitResult fit_multiple(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys, std::vector<std::string> names = {},
                       std::vector<Transform> transforms = {});

// Seeded shuffle into k folds whose sizes differ by at most one (larger folds first).
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);

// Out-of-fold predictions pooled over the k folds; stats computed on the pooled predictions.
// Rank-deficient training folds fall back to the minimum-norm least-squares solution.
ModelStats kfold_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys, std::size_t k, std::uint64_t seed);

struct EliminationStep {
    std::string removed;
    std::vector<std::string> remaining;
    ModelStats fit;
    ModelStats cv;
};

struct EliminationLadder {
    ModelStats all_fit;
    ModelStats all_cv;
    std::vector<EliminationStep> steps; // one per feature; the last leaves the intercept-only model
};

// Drops, at each step, the feature whose removal leaves the highest in-sample r
// (ties: lexicographically smallest name).
EliminationLadder backward_eliminate(const Eigen::MatrixXd& features, const Eigen::VectorXd& ys,
                                     const std::vector<std::string>& names, std::size_t k_folds, std::uint64_t seed);

// Regression covariates in the order used by reports, with their transforms:
// log(m), log(k), log(npo), hv, avgd, maxd, log(nconnec), log(lconnec), kconnec.
struct CovariateSpec {
    std::string name;
    Transform transform;
};
const std::vector<CovariateSpec>& covariates();
Eigen::RowVectorXd covariate_row(const FeatureVector& f);

double spearman(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Probabilistic view of the Pareto front

struct PmfRow {
    Solution x;
    ObjectiveVector z;
    double mean_pmf = 0.0;
    double dist_to_ideal = 0.0;
    int rank = 0; // 1 = nearest to the ideal point
};

// Mean joint pmf of each Pareto-optimal solution over the given models, and its Euclidean
// distance to the ideal point (per-objective maximum over the front). Rows are sorted by
// distance for M >= 3 and kept in front order for M = 2.
std::vector<PmfRow> pareto_pmf_view(std::span<const BayesianNetwork> models, const ParetoSet& pareto);

// Columns: bitstring, z1..zM, mean_pmf, dist_to_ideal, rank.
std::string pmf_view_to_csv(std::span<const PmfRow> rows);

} // namespace mnk
