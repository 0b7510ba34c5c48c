#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msgames/piecewise_quadratic.hpp"
#include "msgames/rng.hpp"

namespace msgames {

struct BoxSet {
    std::vector<double> lo;
    std::vector<double> hi;

    BoxSet() = default;
    BoxSet(std::vector<double> lo_, std::vector<double> hi_);
    static BoxSet uniform(std::size_t dim, double lo, double hi);

    [[nodiscard]] std::size_t dim() const { return lo.size(); }
    [[nodiscard]] double diameter() const;
    [[nodiscard]] bool contains(std::span<const double> x, double tol = 0.0) const;
    void project_in_place(std::span<double> x) const;
};

// Coefficient lo + (hi - lo) * u driven by a shared uniform draw u in [0, 1).
// lo == hi gives a deterministic coefficient; lo > hi is allowed and makes the
// coefficient decrease in u.
struct UniformCoefficient {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double mean() const { return 0.5 * (lo + hi); }
    [[nodiscard]] double at(double u) const { return lo + (hi - lo) * u; }
    [[nodiscard]] bool deterministic() const { return lo == hi; }
    static UniformCoefficient constant(double v) { return {v, v}; }
};

// Contribution weight * x_{player, coord} to row `row` of p_i(x_{-i}).
struct CouplingTerm {
    std::size_t row = 0;
    std::size_t player = 0;
    std::size_t coord = 0;
    UniformCoefficient weight;
};

// r_i(x_{-i}) = coeff * sum_{j != i} sum_c h(x_{j,c}).
struct SeparableOffset {
    UniformCoefficient coeff;
    PiecewiseQuadratic1D h;
};

// One player's sampled objective
//   own_coeff(u) * sum_c own_cost[c](y_c) + own_quadratic(u) * |y|^2
//   + p_i(x_{-i}, u)^T y + r_i(x_{-i}, u),
// where p_i(x_{-i}, u)_r = intercept[r](u) + sum of matching coupling terms.
// One uniform draw u per sample drives every coefficient of the player.
struct PlayerSpec {
    std::size_t dim = 1;
    BoxSet set;
    std::vector<PiecewiseQuadratic1D> own_cost;
    UniformCoefficient own_coeff = UniformCoefficient::constant(1.0);
    UniformCoefficient own_quadratic = UniformCoefficient::constant(0.0);
    std::vector<UniformCoefficient> intercept;  // empty means zero
    std::vector<CouplingTerm> coupling;
    std::optional<double> coupling_lipschitz;  // overrides the computed value
    std::optional<SeparableOffset> offset;
    std::optional<double> declared_rho;
};

enum class GameClass { StronglyConvex, WeaklyConvex };
enum class Potentiality { None, Aggregative, Attested };

const char* to_string(GameClass c);
const char* to_string(Potentiality p);

// Stacked strategy profile with per-player slices.
struct Profile {
    std::vector<double> values;
    std::vector<std::size_t> offsets;  // size N + 1

    Profile() = default;
    Profile(std::vector<std::size_t> offsets_, double fill);
    static Profile assemble(const std::vector<std::vector<double>>& parts);

    [[nodiscard]] std::size_t num_players() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    [[nodiscard]] std::span<const double> slice(std::size_t i) const;
    [[nodiscard]] std::span<double> slice(std::size_t i);
    [[nodiscard]] std::vector<double> part(std::size_t i) const;
    void set_slice(std::size_t i, std::span<const double> v);
    [[nodiscard]] std::vector<std::vector<double>> split() const;
};

class GameSpec {
public:
    // Validates players and precomputes expected own terms and moduli. Throws
    // std::invalid_argument when an invariant fails.
    static GameSpec build(std::string name, std::vector<PlayerSpec> players, GameClass cls,
                          std::optional<std::vector<double>> selection_probs = std::nullopt,
                          bool potential_attested = false, std::optional<BoxSet> contraction_region = std::nullopt);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] std::size_t num_players() const { return players_.size(); }
    [[nodiscard]] const PlayerSpec& player(std::size_t i) const;
    [[nodiscard]] const std::vector<PlayerSpec>& players() const { return players_; }
    [[nodiscard]] GameClass game_class() const { return class_; }
    [[nodiscard]] const std::vector<double>& selection_probs() const { return probs_; }
    [[nodiscard]] Potentiality potentiality() const { return potentiality_; }
    [[nodiscard]] bool potential_attested() const { return attested_; }
    [[nodiscard]] const std::optional<BoxSet>& contraction_region() const { return region_; }
    [[nodiscard]] const std::vector<std::size_t>& offsets() const { return offsets_; }
    [[nodiscard]] std::size_t total_dim() const { return offsets_.back(); }

    // own_coeff.mean() * own_cost[c] + own_quadratic.mean() * y^2.
    [[nodiscard]] const PiecewiseQuadratic1D& expected_own(std::size_t i, std::size_t c) const;
    // Strong convexity of the expected own term (zero if not strongly convex).
    [[nodiscard]] double sigma(std::size_t i) const { return sigma_[i]; }
    // Strong convexity of own_cost alone, scaled by the mean coefficient.
    [[nodiscard]] double sigma_own_only(std::size_t i) const { return sigma_own_[i]; }
    // Declared weak-convexity modulus if present, otherwise the computed one.
    [[nodiscard]] double rho(std::size_t i) const { return rho_[i]; }
    [[nodiscard]] double max_rho() const;
    [[nodiscard]] double coupling_lipschitz(std::size_t i) const { return lipschitz_[i]; }
    [[nodiscard]] bool coupling_lipschitz_attested(std::size_t i) const {
        return players_[i].coupling_lipschitz.has_value();
    }
    [[nodiscard]] bool has_coupling() const;

    [[nodiscard]] Profile zero_profile() const { return Profile(offsets_, 0.0); }
    [[nodiscard]] Profile uniform_profile(double v) const { return Profile(offsets_, v); }
    [[nodiscard]] bool feasible(const Profile& x, double tol = 0.0) const;
    void project(Profile& x) const;
    void check_profile(const Profile& x) const;

    // p_i(x_{-i}) with coefficient means.
    [[nodiscard]] std::vector<double> expected_linear(std::size_t i, const Profile& x) const;
    // Affine representation p_i(x_{-i}, u) = base + slope * u, per row.
    void linear_affine(std::size_t i, const Profile& x, std::vector<double>& base, std::vector<double>& slope) const;
    [[nodiscard]] double expected_offset(std::size_t i, const Profile& x) const;

private:
    std::string name_;
    std::vector<PlayerSpec> players_;
    GameClass class_ = GameClass::StronglyConvex;
    std::vector<double> probs_;
    Potentiality potentiality_ = Potentiality::None;
    bool attested_ = false;
    std::optional<BoxSet> region_;
    std::vector<std::size_t> offsets_;
    std::vector<std::vector<PiecewiseQuadratic1D>> expected_own_;
    std::vector<double> sigma_;
    std::vector<double> sigma_own_;
    std::vector<double> rho_;
    std::vector<double> lipschitz_;
};

// Expected objective f_i(x) in closed form from coefficient means.
double evaluate_expected_objective(const GameSpec& game, std::size_t i, const Profile& x);

// Gradient selection of f_i in x_i with coefficient means (first-active-piece
// rule at breakpoints).
std::vector<double> expected_subgradient(const GameSpec& game, std::size_t i, const Profile& x);

// One-sample subgradient of the sampled objective in x_i. Consumes one draw.
std::vector<double> sample_subgradient(const GameSpec& game, std::size_t i, const Profile& x, RngStream& rng);

// Sampled subgradient with x_{-i} frozen, affine in the driving uniform u.
// Used by the stochastic prox loop, which calls it millions of times.
class FrozenSubgradientOracle {
public:
    FrozenSubgradientOracle(const GameSpec& game, std::size_t i, const Profile& x);

    [[nodiscard]] std::size_t dim() const { return own_.size(); }
    // Sampled subgradient at y for coordinate c under draw u.
    [[nodiscard]] double at(std::size_t c, double y, double u) const {
        return (c0_ + c1_ * u) * own_[c]->subgradient(y) + 2.0 * (q0_ + q1_ * u) * y + p0_[c] + p1_[c] * u;
    }

private:
    std::vector<const PiecewiseQuadratic1D*> own_;
    double c0_, c1_, q0_, q1_;
    std::vector<double> p0_, p1_;
};

}  // namespace msgames
