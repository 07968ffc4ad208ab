#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mnk {

// Fixed-length bitstring x = (x_0, ..., x_{N-1}), N <= 64.
// x_0 is stored in the most significant of the N used bits, so the integer order of
// bits() coincides with the lexicographic order of the printed string.
class Solution {
public:
    static constexpr int max_size = 64;

    Solution() = default;
    explicit Solution(int n, std::uint64_t bits = 0);

    static Solution from_string(std::string_view text);

    int size() const noexcept { return n_; }
    std::uint64_t bits() const noexcept { return bits_; }

    bool operator[](int i) const noexcept { return (bits_ >> (n_ - 1 - i)) & 1U; }
    void set(int i, bool value) noexcept;
    void flip(int i) noexcept { bits_ ^= std::uint64_t{1} << (n_ - 1 - i); }

    std::string to_string() const;

    friend bool operator==(const Solution&, const Solution&) = default;
    friend std::strong_ordering operator<=>(const Solution& a, const Solution& b) {
        if (auto c = a.n_ <=> b.n_; c != 0) return c;
        return a.bits_ <=> b.bits_;
    }

private:
    std::uint64_t bits_ = 0;
    int n_ = 0;
};

int hamming(const Solution& a, const Solution& b);

using ObjectiveVector = Eigen::VectorXd;

// One NK-landscape. Table index for variable n packs x_n as the most significant bit,
// followed by the neighbour bits in stored neighbour-list order.
struct NKComponent {
    int n_vars = 0;
    int k = 0;
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> tables;

    double contribution(int var, const Solution& x) const;
    double evaluate(const Solution& x) const;
};

struct MNKInstance {
    std::string id;
    std::uint64_t seed = 0;
    int m_objectives = 0;
    std::vector<NKComponent> components;

    int n_vars() const { return components.empty() ? 0 : components.front().n_vars; }
    int k() const { return components.empty() ? 0 : components.front().k; }

    friend bool operator==(const MNKInstance&, const MNKInstance&) = default;
};

inline bool operator==(const NKComponent& a, const NKComponent& b) {
    return a.n_vars == b.n_vars && a.k == b.k && a.neighbors == b.neighbors && a.tables == b.tables;
}

// Throws InvalidParameter describing the first violated invariant.
void validate(const MNKInstance& instance);

std::string default_instance_id(std::uint64_t seed, int n_vars, int m_objectives, int k);

// Neighbours of variable n in component m are a uniform K-subset of the other variables,
// drawn independently per objective. Each (m, n) pair uses its own stream
// derive_seed(seed, {m, n}), first for the neighbours and then the 2^(K+1) table entries.
MNKInstance generate_instance(std::uint64_t seed, int n_vars, int m_objectives, int k, std::string id = {});

ObjectiveVector evaluate(const MNKInstance& instance, const Solution& x);

// Writes the objectives of x into out[0..M) without allocating.
void evaluate_into(const MNKInstance& instance, const Solution& x, double* out);

inline constexpr int instance_format_version = 1;

std::string instance_to_json(const MNKInstance& instance);
MNKInstance instance_from_json(std::string_view text);

void save_instance(const MNKInstance& instance, const std::filesystem::path& path);
MNKInstance load_instance(const std::filesystem::path& path);

} // namespace mnk
