#include "mnk/experiment.hpp"

#include "mnk/error.hpp"
#include "mnk/io.hpp"
#include "mnk/rng.hpp"

#include <Eigen/QR>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace mnk {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t ExperimentConfig::effective_t_max() const {
    if (t_max) return *t_max;
    return static_cast<std::int64_t>(std::floor(std::ldexp(1.0, n_vars) / 10.0));
}

void validate(const ExperimentConfig& c) {
    if (c.n_vars < 1 || c.n_vars > c.enumeration_cap) throw InvalidParameter("n_vars must lie in [1, enumeration_cap]");
    if (c.k_values.empty() || c.m_values.empty()) throw InvalidParameter("k_values and m_values must be non-empty");
    for (int k : c.k_values)
        if (k < 0 || k >= c.n_vars) throw InvalidParameter("every k must satisfy 0 <= k < n_vars");
    for (int m : c.m_values)
        if (m < 1) throw InvalidParameter("every m must be positive");
    if (c.landscapes_per_cell < 1) throw InvalidParameter("landscapes_per_cell must be positive");
    if (c.runs_per_instance < 0) throw InvalidParameter("runs_per_instance must be non-negative");
    if (c.k_folds < 2) throw InvalidParameter("k_folds must be at least 2");
    if (!(c.pc >= 0.0 && c.pc <= 1.0) || !(c.pm >= 0.0 && c.pm <= 1.0)) throw InvalidParameter("pc and pm must lie in [0, 1]");
    RunParams p;
    p.pop_size = c.pop_size;
    p.pgm_size = c.pgm_size;
    p.sample_size = c.sample_size;
    p.t_max = c.effective_t_max();
    p.epsilon = c.epsilon;
    p.max_parents = c.max_parents;
    validate(p);
}

namespace {

const char* cadence_name(SuccessCadence c) { return c == SuccessCadence::per_evaluation ? "per_evaluation" : "per_batch"; }
const char* policy_name(CensoredPolicy p) { return p == CensoredPolicy::impute_tmax ? "impute_tmax" : "exclude"; }

} // namespace

ExperimentConfig config_from_json(std::string_view text) {
    ExperimentConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedFile(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw MalformedFile("config: top level must be an object");
    static const std::vector<std::string> known = {
        "master_seed", "n_vars",      "k_values",    "m_values",        "landscapes_per_cell", "runs_per_instance",
        "epsilon",     "t_max",       "pop_size",    "pgm_size",        "sample_size",         "max_parents",
        "pc",          "pm",          "output_dir",  "enumeration_cap", "success_cadence",     "censored_policy",
        "k_folds",     "hv_mc_samples"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw MalformedFile("config: unknown field '" + key + "'");
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("master_seed", c.master_seed);
        get("n_vars", c.n_vars);
        get("k_values", c.k_values);
        get("m_values", c.m_values);
        get("landscapes_per_cell", c.landscapes_per_cell);
        get("runs_per_instance", c.runs_per_instance);
        get("epsilon", c.epsilon);
        if (j.contains("t_max") && !j.at("t_max").is_null()) c.t_max = j.at("t_max").get<std::int64_t>();
        get("pop_size", c.pop_size);
        get("pgm_size", c.pgm_size);
        get("sample_size", c.sample_size);
        get("max_parents", c.max_parents);
        get("pc", c.pc);
        get("pm", c.pm);
        get("output_dir", c.output_dir);
        get("enumeration_cap", c.enumeration_cap);
        get("k_folds", c.k_folds);
        get("hv_mc_samples", c.hv_mc_samples);
        if (j.contains("success_cadence")) {
            const auto s = j.at("success_cadence").get<std::string>();
            if (s == "per_batch") c.cadence = SuccessCadence::per_batch;
            else if (s == "per_evaluation") c.cadence = SuccessCadence::per_evaluation;
            else throw MalformedFile("config: success_cadence must be per_batch or per_evaluation");
        }
        if (j.contains("censored_policy")) {
            const auto s = j.at("censored_policy").get<std::string>();
            if (s == "exclude") c.censored = CensoredPolicy::exclude;
            else if (s == "impute_tmax") c.censored = CensoredPolicy::impute_tmax;
            else throw MalformedFile("config: censored_policy must be exclude or impute_tmax");
        }
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("config: ") + e.what());
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["master_seed"] = c.master_seed;
    j["n_vars"] = c.n_vars;
    j["k_values"] = c.k_values;
    j["m_values"] = c.m_values;
    j["landscapes_per_cell"] = c.landscapes_per_cell;
    j["runs_per_instance"] = c.runs_per_instance;
    j["epsilon"] = c.epsilon;
    j["t_max"] = c.effective_t_max();
    j["pop_size"] = c.pop_size;
    j["pgm_size"] = c.pgm_size;
    j["sample_size"] = c.sample_size;
    j["max_parents"] = c.max_parents;
    j["pc"] = c.pc;
    j["pm"] = c.pm;
    j["output_dir"] = c.output_dir;
    j["enumeration_cap"] = c.enumeration_cap;
    j["success_cadence"] = cadence_name(c.cadence);
    j["censored_policy"] = policy_name(c.censored);
    j["k_folds"] = c.k_folds;
    j["hv_mc_samples"] = c.hv_mc_samples;
    return j.dump(2) + "\n";
}

std::vector<GridCell> instance_grid(const ExperimentConfig& c) {
    std::vector<GridCell> grid;
    char id[96];
    for (int m : c.m_values)
        for (int k : c.k_values)
            for (int l = 0; l < c.landscapes_per_cell; ++l) {
                std::snprintf(id, sizeof id, "n%d_m%d_k%02d_l%02d", c.n_vars, m, k, l);
                const auto seed = derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.n_vars), static_cast<std::uint64_t>(m),
                                                              static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)});
                grid.push_back({id, seed, m, k, l});
            }
    return grid;
}

std::uint64_t run_seed(std::uint64_t master, std::string_view instance_id, std::string_view algorithm, int run_index) {
    return derive_seed(master, {fnv1a(instance_id), fnv1a(algorithm), static_cast<std::uint64_t>(run_index)});
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, count); ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

Experiment::Experiment(ExperimentConfig config, int jobs) : config_(std::move(config)), jobs_(std::max(1, jobs)) {
    validate(config_);
    grid_ = instance_grid(config_);
}

fs::path Experiment::instance_path(const std::string& id) const { return root() / "instances" / (id + ".json"); }
fs::path Experiment::pareto_path(const std::string& id) const { return root() / "pareto" / (id + ".json"); }
fs::path Experiment::reports_dir() const { return root() / "reports"; }

fs::path Experiment::run_path(const std::string& algorithm, const std::string& id, int run) const {
    char name[32];
    std::snprintf(name, sizeof name, "run_%04d.json", run);
    return root() / "runs" / algorithm / id / name;
}

fs::path Experiment::model_path(const std::string& id, int run) const {
    char name[32];
    std::snprintf(name, sizeof name, "model_%04d.json", run);
    return root() / "runs" / "mboa" / id / name;
}

MNKInstance Experiment::load_or_generate(const GridCell& cell) const {
    const auto path = instance_path(cell.id);
    if (fs::exists(path)) return load_instance(path);
    return generate_instance(cell.seed, config_.n_vars, cell.m, cell.k, cell.id);
}

ParetoSet Experiment::load_or_enumerate(const GridCell& cell) const {
    const auto path = pareto_path(cell.id);
    if (fs::exists(path)) return pareto_from_json(read_file(path));
    const MNKInstance inst = load_or_generate(cell);
    ParetoSet pareto = enumerate_pareto(inst, config_.enumeration_cap, 1);
    write_file_atomic(path, pareto_to_json(pareto));
    auto csv = path;
    csv.replace_extension(".csv");
    write_file_atomic(csv, pareto_to_csv(pareto));
    return pareto;
}

std::size_t Experiment::gen() {
    parallel_for(grid_.size(), jobs_, [&](std::size_t i) {
        const auto& cell = grid_[i];
        save_instance(generate_instance(cell.seed, config_.n_vars, cell.m, cell.k, cell.id), instance_path(cell.id));
    });
    return grid_.size();
}

std::size_t Experiment::enumerate() {
    parallel_for(grid_.size(), jobs_, [&](std::size_t i) { (void)load_or_enumerate(grid_[i]); });
    return grid_.size();
}

std::vector<FeatureVector> Experiment::compute_features() const {
    std::vector<FeatureVector> out(grid_.size());
    parallel_for(grid_.size(), jobs_, [&](std::size_t i) {
        const auto& cell = grid_[i];
        HypervolumeOptions hv;
        hv.mc_samples = config_.hv_mc_samples;
        hv.mc_seed = derive_seed(cell.seed, {fnv1a("hypervolume")});
        out[i] = extract_features(load_or_generate(cell), load_or_enumerate(cell), hv);
    });
    return out;
}

void Experiment::features() {
    const auto fv = compute_features();
    std::string csv = features_csv_header();
    for (std::size_t i = 0; i < grid_.size(); ++i) csv += features_csv_row(grid_[i].id, fv[i]);
    write_file_atomic(reports_dir() / "features.csv", csv);
}

std::size_t Experiment::run(const std::string& algorithm) {
    if (algorithm != "mboa" && algorithm != "nsga3") throw InvalidParameter("unknown algorithm '" + algorithm + "'");
    struct Work {
        std::size_t cell;
        int run;
    };
    std::vector<Work> todo;
    for (std::size_t c = 0; c < grid_.size(); ++c)
        for (int r = 0; r < config_.runs_per_instance; ++r)
            if (!fs::exists(run_path(algorithm, grid_[c].id, r))) todo.push_back({c, r});
    if (todo.empty()) return 0;

    // Instances and Pareto sets are prepared up front and shared read-only by the workers.
    std::vector<std::optional<MNKInstance>> instances(grid_.size());
    std::vector<std::optional<ParetoSet>> fronts(grid_.size());
    std::vector<char> needed(grid_.size(), 0);
    for (const auto& w : todo) needed[w.cell] = 1;
    parallel_for(grid_.size(), jobs_, [&](std::size_t c) {
        if (!needed[c]) return;
        if (!fs::exists(instance_path(grid_[c].id))) save_instance(load_or_generate(grid_[c]), instance_path(grid_[c].id));
        instances[c] = load_or_generate(grid_[c]);
        fronts[c] = load_or_enumerate(grid_[c]);
    });

    RunParams base;
    base.pop_size = config_.pop_size;
    base.pgm_size = config_.pgm_size;
    base.sample_size = config_.sample_size;
    base.t_max = config_.effective_t_max();
    base.epsilon = config_.epsilon;
    base.max_parents = config_.max_parents;
    base.cadence = config_.cadence;

    parallel_for(todo.size(), jobs_, [&](std::size_t i) {
        const auto& w = todo[i];
        const auto& id = grid_[w.cell].id;
        RunParams params = base;
        params.seed = run_seed(config_.master_seed, id, algorithm, w.run);
        RunResult result = algorithm == "mboa" ? mboa_run(*instances[w.cell], *fronts[w.cell], params)
                                               : nsga3_run(*instances[w.cell], *fronts[w.cell], params, config_.pc, config_.pm);
        if (result.final_model) write_file_atomic(model_path(id, w.run), network_to_json(*result.final_model));
        // The run record is written last and marks the pair as complete.
        write_file_atomic(run_path(algorithm, id, w.run), run_record_to_json(id, algorithm, w.run, result));
    });
    return todo.size();
}

bool Experiment::has_runs(const std::string& algorithm) const {
    return config_.runs_per_instance > 0 && !grid_.empty() && fs::exists(run_path(algorithm, grid_.front().id, 0));
}

std::vector<ErtRecord> Experiment::collect_ert(const std::string& algorithm) const {
    std::vector<ErtRecord> out;
    for (const auto& cell : grid_) {
        std::vector<RunRecord> records;
        for (int r = 0; r < config_.runs_per_instance; ++r) {
            const auto path = run_path(algorithm, cell.id, r);
            if (!fs::exists(path)) throw InsufficientData("missing run record " + path.string() + "; run the campaign first");
            records.push_back(run_record_from_json(read_file(path)));
        }
        ErtRecord rec = estimate_ert(records, config_.effective_t_max());
        rec.instance_id = cell.id;
        rec.algorithm = algorithm;
        out.push_back(std::move(rec));
    }
    return out;
}

void Experiment::ert() {
    std::string csv = "instance_id,algorithm,p_hat,ert\n";
    char buf[64];
    for (const char* algorithm : algorithm_names) {
        if (!has_runs(algorithm)) continue;
        for (const auto& rec : collect_ert(algorithm)) {
            csv += rec.instance_id + "," + rec.algorithm;
            std::snprintf(buf, sizeof buf, ",%.17g,", rec.p_hat);
            csv += buf;
            if (rec.censored()) {
                csv += "censored\n";
            } else {
                std::snprintf(buf, sizeof buf, "%.17g\n", *rec.ert);
                csv += buf;
            }
        }
    }
    write_file_atomic(reports_dir() / "ert.csv", csv);
}

namespace {

json stats_json(const ModelStats& s) { return {{"r", s.r}, {"mae", s.mae}, {"rmse", s.rmse}}; }

std::vector<FeatureVector> parse_features_csv(const std::string& text, std::vector<std::string>& ids) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    std::vector<FeatureVector> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) throw MalformedFile("features.csv: expected 10 columns in line '" + line + "'");
        ids.push_back(cells[0]);
        FeatureVector f;
        f.m = std::stoi(cells[1]);
        f.k = std::stoi(cells[2]);
        f.npo = std::stoi(cells[3]);
        f.hv = std::stod(cells[4]);
        f.avgd = std::stod(cells[5]);
        f.maxd = std::stod(cells[6]);
        f.nconnec = std::stoi(cells[7]);
        f.lconnec = std::stod(cells[8]);
        f.kconnec = std::stoi(cells[9]);
        out.push_back(f);
    }
    return out;
}

} // namespace

void Experiment::regress() {
    if (!has_runs("mboa") && !has_runs("nsga3")) throw InsufficientData("no run records found; run the campaign before regress");
    const auto features_file = reports_dir() / "features.csv";
    if (!fs::exists(features_file)) features();
    std::vector<std::string> ids;
    const auto fv = parse_features_csv(read_file(features_file), ids);
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < ids.size(); ++i) row_of[ids[i]] = i;

    const auto& specs = covariates();
    std::vector<std::string> names;
    for (const auto& s : specs) names.push_back(s.name);

    json report = json::object();
    for (const char* algorithm : algorithm_names) {
        if (!has_runs(algorithm)) continue;
        const auto records = collect_ert(algorithm);
        std::vector<std::size_t> rows;
        std::vector<double> response;
        json excluded = json::array();
        for (const auto& rec : records) {
            double value;
            if (rec.censored()) {
                if (config_.censored == CensoredPolicy::exclude) {
                    std::cerr << "warning: " << rec.instance_id << " (" << algorithm << ") has no successful run; excluded from regression\n";
                    excluded.push_back(rec.instance_id);
                    continue;
                }
                value = static_cast<double>(rec.t_max);
            } else {
                value = rec.value();
            }
            rows.push_back(row_of.at(rec.instance_id));
            response.push_back(std::log(value));
        }
        if (response.size() < 3)
            throw InsufficientData(std::string("regression for ") + algorithm + " needs at least 3 uncensored instances, have " +
                                   std::to_string(response.size()));

        const auto n = static_cast<Eigen::Index>(response.size());
        Eigen::MatrixXd x(n, static_cast<Eigen::Index>(specs.size()));
        for (Eigen::Index i = 0; i < n; ++i) x.row(i) = covariate_row(fv[rows[static_cast<std::size_t>(i)]]);
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response.data(), n);
        const std::size_t folds = std::min<std::size_t>(static_cast<std::size_t>(config_.k_folds), response.size());
        const std::uint64_t cv_seed = derive_seed(config_.master_seed, {fnv1a("cv"), fnv1a(algorithm)});

        json simple = json::array();
        {
            const Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, y.mean());
            simple.push_back({{"feature", "none"},
                              {"coefficients", {y.mean()}},
                              {"fit", stats_json(model_stats(fitted, y, false))},
                              {"cv", stats_json(kfold_cv(Eigen::MatrixXd(n, 0), y, folds, cv_seed))}});
        }
        for (std::size_t f = 0; f < specs.size(); ++f) {
            const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(f));
            const auto fit = fit_simple({col.data(), static_cast<std::size_t>(n)}, response, specs[f].name, specs[f].transform);
            simple.push_back({{"feature", specs[f].name},
                              {"transform", to_string(specs[f].transform)},
                              {"coefficients", std::vector<double>(fit.model.coefficients.begin(), fit.model.coefficients.end())},
                              {"fit", stats_json(fit.stats)},
                              {"cv", stats_json(kfold_cv(x.col(static_cast<Eigen::Index>(f)), y, folds, cv_seed))}});
        }

        const auto ladder = backward_eliminate(x, y, names, folds, cv_seed);
        json elimination = json::array();
        elimination.push_back({{"removed", "all"}, {"remaining", names}, {"fit", stats_json(ladder.all_fit)}, {"cv", stats_json(ladder.all_cv)}});
        for (const auto& step : ladder.steps)
            elimination.push_back({{"removed", step.removed},
                                   {"remaining", step.remaining},
                                   {"fit", stats_json(step.fit)},
                                   {"cv", stats_json(step.cv)}});

        report[algorithm] = {{"n_instances", response.size()},
                             {"excluded", excluded},
                             {"folds", folds},
                             {"censored_policy", policy_name(config_.censored)},
                             {"simple", simple},
                             {"elimination", elimination}};

        // Plot data: each covariate against log(ert), plus fitted values of the log(k) + log(m) model.
        std::string plot = "instance_id";
        for (const auto& s : specs) plot += "," + s.name;
        plot += ",log_ert\n";
        char buf[64];
        for (Eigen::Index i = 0; i < n; ++i) {
            plot += ids[rows[static_cast<std::size_t>(i)]];
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                std::snprintf(buf, sizeof buf, ",%.17g", x(i, c));
                plot += buf;
            }
            std::snprintf(buf, sizeof buf, ",%.17g\n", y(i));
            plot += buf;
        }
        write_file_atomic(reports_dir() / (std::string("plot_features_") + algorithm + ".csv"), plot);

        // Minimum-norm solution: with a single K or M in the grid the design is rank deficient.
        Eigen::MatrixXd km(n, 3);
        km << Eigen::VectorXd::Ones(n), x.col(1), x.col(0);
        const Eigen::VectorXd km_fitted = km * km.completeOrthogonalDecomposition().solve(y);
        std::string fitted_csv = "instance_id,log_ert,fitted\n";
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", y(i), km_fitted(i));
            fitted_csv += ids[rows[static_cast<std::size_t>(i)]] + buf;
        }
        write_file_atomic(reports_dir() / (std::string("fitted_km_") + algorithm + ".csv"), fitted_csv);
    }

    json cfg = json::parse(config_to_json(config_));
    json layers = json::object();
    for (int m : config_.m_values) {
        const auto l = reference_layers(m, config_.pop_size);
        layers[std::to_string(m)] = {{"outer", l.outer}, {"inner", l.inner}};
    }
    cfg["nsga3_reference_layers"] = layers;
    write_file_atomic(reports_dir() / "config.json", cfg.dump(2) + "\n");
    write_file_atomic(reports_dir() / "regression.json", report.dump(2) + "\n");
}

std::size_t Experiment::pmf_view() {
    std::atomic<std::size_t> written{0};
    parallel_for(grid_.size(), jobs_, [&](std::size_t c) {
        const auto& cell = grid_[c];
        std::vector<BayesianNetwork> models;
        for (int r = 0; r < config_.runs_per_instance; ++r) {
            const auto run = run_path("mboa", cell.id, r);
            if (!fs::exists(run)) continue;
            if (!run_record_from_json(read_file(run)).success) continue;
            const auto model = model_path(cell.id, r);
            if (fs::exists(model)) models.push_back(network_from_json(read_file(model)));
        }
        if (models.empty()) return;
        const auto rows = pareto_pmf_view(models, load_or_enumerate(cell));
        write_file_atomic(reports_dir() / "pmf_view" / (cell.id + ".csv"), pmf_view_to_csv(rows));
        ++written;
    });
    return written;
}

void Experiment::report() {
    features();
    ert();
    regress();
    pmf_view();
}

void Experiment::all() {
    gen();
    enumerate();
    for (const char* algorithm : algorithm_names) run(algorithm);
    report();
}

} // namespace mnk
