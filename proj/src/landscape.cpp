#include "mnk/landscape.hpp"

#include "mnk/error.hpp"
#include "mnk/io.hpp"
#include "mnk/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

namespace mnk {

using nlohmann::json;

Solution::Solution(int n, std::uint64_t bits) : bits_(bits), n_(n) {
    if (n < 0 || n > max_size) throw InvalidParameter("solution length must be in [0, 64], got " + std::to_string(n));
    if (n < max_size && (bits >> n) != 0) throw InvalidParameter("solution bits exceed length " + std::to_string(n));
}

Solution Solution::from_string(std::string_view text) {
    Solution s(static_cast<int>(text.size()));
    for (int i = 0; i < s.n_; ++i) {
        char c = text[static_cast<std::size_t>(i)];
        if (c != '0' && c != '1') throw InvalidParameter("bitstring may only contain '0' and '1'");
        s.set(i, c == '1');
    }
    return s;
}

void Solution::set(int i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (n_ - 1 - i);
    bits_ = value ? (bits_ | mask) : (bits_ & ~mask);
}

std::string Solution::to_string() const {
    std::string out(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i)
        if ((*this)[i]) out[static_cast<std::size_t>(i)] = '1';
    return out;
}

int hamming(const Solution& a, const Solution& b) {
    if (a.size() != b.size()) throw LengthMismatch("hamming: solutions of different length");
    return std::popcount(a.bits() ^ b.bits());
}

double NKComponent::contribution(int var, const Solution& x) const {
    std::size_t idx = x[var] ? 1 : 0;
    for (int nb : neighbors[static_cast<std::size_t>(var)]) idx = (idx << 1) | (x[nb] ? 1U : 0U);
    return tables[static_cast<std::size_t>(var)][idx];
}

double NKComponent::evaluate(const Solution& x) const {
    double sum = 0.0;
    for (int n = 0; n < n_vars; ++n) sum += contribution(n, x);
    return sum / n_vars;
}

void validate(const MNKInstance& instance) {
    if (instance.m_objectives < 1) throw InvalidParameter("instance needs at least one objective");
    if (static_cast<int>(instance.components.size()) != instance.m_objectives)
        throw InvalidParameter("component count does not match m_objectives");
    const int n = instance.n_vars();
    const int k = instance.k();
    if (n < 1 || n > Solution::max_size) throw InvalidParameter("n_vars must be in [1, 64]");
    if (k < 0 || k >= n) throw InvalidParameter("k must satisfy 0 <= k < n");
    const std::size_t table_len = std::size_t{1} << (k + 1);
    for (std::size_t m = 0; m < instance.components.size(); ++m) {
        const auto& c = instance.components[m];
        const std::string where = "component " + std::to_string(m);
        if (c.n_vars != n) throw InvalidParameter(where + ": n_vars differs between components");
        if (c.k != k) throw InvalidParameter(where + ": k differs between components");
        if (c.neighbors.size() != static_cast<std::size_t>(n) || c.tables.size() != static_cast<std::size_t>(n))
            throw InvalidParameter(where + ": expected " + std::to_string(n) + " neighbour lists and tables");
        for (int v = 0; v < n; ++v) {
            const auto& nbs = c.neighbors[static_cast<std::size_t>(v)];
            const std::string var = where + ", variable " + std::to_string(v);
            if (nbs.size() != static_cast<std::size_t>(k))
                throw InvalidParameter(var + ": expected " + std::to_string(k) + " neighbours, got " + std::to_string(nbs.size()));
            for (std::size_t i = 0; i < nbs.size(); ++i) {
                if (nbs[i] < 0 || nbs[i] >= n) throw InvalidParameter(var + ": neighbour index out of range");
                if (nbs[i] == v) throw InvalidParameter(var + ": variable lists itself as a neighbour");
                for (std::size_t j = 0; j < i; ++j)
                    if (nbs[j] == nbs[i]) throw InvalidParameter(var + ": duplicate neighbour " + std::to_string(nbs[i]));
            }
            const auto& table = c.tables[static_cast<std::size_t>(v)];
            if (table.size() != table_len)
                throw InvalidParameter(var + ": table length " + std::to_string(table.size()) + " != 2^(k+1) = " +
                                       std::to_string(table_len));
            for (double t : table)
                if (!(t >= 0.0 && t <= 1.0)) throw InvalidParameter(var + ": table entry outside [0, 1]");
        }
    }
}

std::string default_instance_id(std::uint64_t seed, int n_vars, int m_objectives, int k) {
    std::ostringstream os;
    os << "mnk_n" << n_vars << "_m" << m_objectives << "_k" << k << "_s" << seed;
    return os.str();
}

MNKInstance generate_instance(std::uint64_t seed, int n_vars, int m_objectives, int k, std::string id) {
    if (n_vars < 1 || n_vars > Solution::max_size) throw InvalidParameter("n_vars must be in [1, 64]");
    if (m_objectives < 1) throw InvalidParameter("m_objectives must be positive");
    if (k < 0 || k >= n_vars) throw InvalidParameter("k must satisfy 0 <= k < n_vars");

    MNKInstance inst;
    inst.id = id.empty() ? default_instance_id(seed, n_vars, m_objectives, k) : std::move(id);
    inst.seed = seed;
    inst.m_objectives = m_objectives;
    inst.components.resize(static_cast<std::size_t>(m_objectives));

    const std::size_t table_len = std::size_t{1} << (k + 1);
    std::vector<int> pool(static_cast<std::size_t>(n_vars - 1));
    for (int m = 0; m < m_objectives; ++m) {
        auto& c = inst.components[static_cast<std::size_t>(m)];
        c.n_vars = n_vars;
        c.k = k;
        c.neighbors.resize(static_cast<std::size_t>(n_vars));
        c.tables.resize(static_cast<std::size_t>(n_vars));
        for (int n = 0; n < n_vars; ++n) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n)}));
            // Partial Fisher-Yates over {0..N-1} \ {n}.
            std::iota(pool.begin(), pool.begin() + n, 0);
            std::iota(pool.begin() + n, pool.end(), n + 1);
            for (int i = 0; i < k; ++i) {
                auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
                std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            }
            auto& nbs = c.neighbors[static_cast<std::size_t>(n)];
            nbs.assign(pool.begin(), pool.begin() + k);
            std::sort(nbs.begin(), nbs.end());
            auto& table = c.tables[static_cast<std::size_t>(n)];
            table.resize(table_len);
            for (auto& t : table) t = rng.uniform01();
        }
    }
    return inst;
}

void evaluate_into(const MNKInstance& instance, const Solution& x, double* out) {
    if (x.size() != instance.n_vars())
        throw LengthMismatch("solution length " + std::to_string(x.size()) + " != instance N " +
                             std::to_string(instance.n_vars()));
    for (std::size_t m = 0; m < instance.components.size(); ++m) out[m] = instance.components[m].evaluate(x);
}

ObjectiveVector evaluate(const MNKInstance& instance, const Solution& x) {
    ObjectiveVector z(instance.m_objectives);
    evaluate_into(instance, x, z.data());
    return z;
}

std::string instance_to_json(const MNKInstance& instance) {
    json j;
    j["format_version"] = instance_format_version;
    j["id"] = instance.id;
    j["seed"] = instance.seed;
    j["n"] = instance.n_vars();
    j["m"] = instance.m_objectives;
    j["k"] = instance.k();
    json comps = json::array();
    for (const auto& c : instance.components) comps.push_back({{"neighbors", c.neighbors}, {"tables", c.tables}});
    j["components"] = std::move(comps);
    // nlohmann/json prints doubles as shortest round-trip decimals, so tables reload bit-exactly.
    return j.dump(1) + "\n";
}

namespace {

const json& require(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end()) throw MalformedFile(where + ": missing field '" + field + "'");
    return *it;
}

template <typename T>
T get_as(const json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw MalformedFile(where + ": " + e.what());
    }
}

} // namespace

MNKInstance instance_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedFile(std::string("instance file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedFile("instance file: top level must be an object");
    const int version = get_as<int>(require(j, "format_version", "instance"), "format_version");
    if (version != instance_format_version)
        throw MalformedFile("instance: unsupported format_version " + std::to_string(version));

    MNKInstance inst;
    inst.id = get_as<std::string>(require(j, "id", "instance"), "id");
    inst.seed = get_as<std::uint64_t>(require(j, "seed", "instance"), "seed");
    const int n = get_as<int>(require(j, "n", "instance"), "n");
    inst.m_objectives = get_as<int>(require(j, "m", "instance"), "m");
    const int k = get_as<int>(require(j, "k", "instance"), "k");
    const auto& comps = require(j, "components", "instance");
    if (!comps.is_array()) throw MalformedFile("components: must be an array");
    for (std::size_t m = 0; m < comps.size(); ++m) {
        const std::string where = "components[" + std::to_string(m) + "]";
        NKComponent c;
        c.n_vars = n;
        c.k = k;
        c.neighbors = get_as<std::vector<std::vector<int>>>(require(comps[m], "neighbors", where), where + ".neighbors");
        c.tables = get_as<std::vector<std::vector<double>>>(require(comps[m], "tables", where), where + ".tables");
        inst.components.push_back(std::move(c));
    }
    try {
        validate(inst);
    } catch (const InvalidParameter& e) {
        throw MalformedFile(std::string("instance ") + inst.id + ": " + e.what());
    }
    if (inst.n_vars() != n || inst.k() != k) throw MalformedFile("instance header disagrees with components");
    return inst;
}

void save_instance(const MNKInstance& instance, const std::filesystem::path& path) {
    write_file_atomic(path, instance_to_json(instance));
}

MNKInstance load_instance(const std::filesystem::path& path) {
    try {
        return instance_from_json(read_file(path));
    } catch (const MalformedFile& e) {
        throw MalformedFile(path.string() + ": " + e.what());
    }
}

} // namespace mnk
