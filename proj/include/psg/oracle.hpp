#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psg/geometry.hpp"
#include "psg/problems.hpp"

namespace psg {

enum class OracleMethod { active_set, projected_gradient, grid_bruteforce };

const char* to_string(OracleMethod method);

struct OracleSolution {
    Vector x_star;
    double J_star = 0.0;
    OracleMethod method = OracleMethod::active_set;
    /// ||r(x_star)||.
    double residual = 0.0;
};

/// Reference minimizer of J over the set, computed independently of psg::run.
///
/// Default choice: primal active set for quadratics over boxes and orthants,
/// a plain projected-gradient loop (identity scaling, tau = 1/L) for other
/// strongly convex models, and a lattice scan for n <= 3. `force` selects a
/// method explicitly; `start` seeds the active-set and projected-gradient
/// solvers. Throws unsupported-configuration when uniqueness is not guaranteed
/// and n > 3.
OracleSolution solve_reference(const ObjectiveModel& model, const FeasibleSet& set,
                               std::optional<OracleMethod> force = std::nullopt,
                               const std::optional<Vector>& start = std::nullopt);

/// x^{k+1}_j = x^k_j / sum_i a^i_j * sum_i b_i a^i_j / <a^i, x^k>, returned as
/// x^0 .. x^steps. Fails with domain-violation if an iterate stops being positive.
std::vector<Vector> bruteforce_em_trace(const LinearSystem& system, const Vector& x0,
                                        std::size_t steps);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// JSON file of oracle solutions keyed by a hash of the problem description.
class OracleCache {
public:
    explicit OracleCache(std::string path);

    static std::string key(const ProblemSpec& spec, const SetSpec& set_spec);

    std::optional<OracleSolution> lookup(const std::string& key) const;
    /// Inserts and rewrites the file.
    void store(const std::string& key, const OracleSolution& solution);

    /// Cached value or a fresh solve that is then stored.
    OracleSolution get_or_solve(const std::string& key, const ObjectiveModel& model,
                                const FeasibleSet& set);

    const std::string& path() const noexcept { return path_; }

private:
    void load();
    void save() const;

    std::string path_;
    std::map<std::string, OracleSolution> entries_;
};

} // namespace psg
