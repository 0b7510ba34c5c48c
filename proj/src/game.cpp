#include "msgames/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "msgames/linalg.hpp"

namespace msgames {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool same_function(const PiecewiseQuadratic1D& a, const PiecewiseQuadratic1D& b) {
    if (a.size() != b.size() || a.breaks() != b.breaks()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& p = a.pieces()[k];
        const auto& q = b.pieces()[k];
        if (p.a != q.a || p.b != q.b || p.c != q.c) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------- BoxSet

BoxSet::BoxSet(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    require(lo.size() == hi.size(), "box: lo/hi dimension mismatch");
    require(!lo.empty(), "box: zero dimension");
    for (std::size_t j = 0; j < lo.size(); ++j) {
        require(std::isfinite(lo[j]) && std::isfinite(hi[j]), "box: bounds must be finite");
        require(lo[j] <= hi[j], "box: lo > hi in coordinate " + std::to_string(j));
    }
    require(diameter() > 0.0, "box: zero diameter");
}

BoxSet BoxSet::uniform(std::size_t dim, double lo, double hi) {
    return BoxSet(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

double BoxSet::diameter() const {
    double s = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j) s += (hi[j] - lo[j]) * (hi[j] - lo[j]);
    return std::sqrt(s);
}

bool BoxSet::contains(std::span<const double> x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
    return true;
}

void BoxSet::project_in_place(std::span<double> x) const {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lo[j], hi[j]);
}

const char* to_string(GameClass c) {
    return c == GameClass::StronglyConvex ? "strongly_convex" : "weakly_convex";
}

const char* to_string(Potentiality p) {
    switch (p) {
        case Potentiality::Aggregative: return "aggregative";
        case Potentiality::Attested: return "attested";
        default: return "none";
    }
}

// ---------------------------------------------------------------- Profile

Profile::Profile(std::vector<std::size_t> offsets_, double fill)
    : values(offsets_.empty() ? 0 : offsets_.back(), fill), offsets(std::move(offsets_)) {}

Profile Profile::assemble(const std::vector<std::vector<double>>& parts) {
    Profile p;
    p.offsets.push_back(0);
    for (const auto& part : parts) {
        p.values.insert(p.values.end(), part.begin(), part.end());
        p.offsets.push_back(p.values.size());
    }
    return p;
}

std::span<const double> Profile::slice(std::size_t i) const {
    if (i + 1 >= offsets.size()) throw std::out_of_range("profile: player index out of range");
    return {values.data() + offsets[i], offsets[i + 1] - offsets[i]};
}

std::span<double> Profile::slice(std::size_t i) {
    if (i + 1 >= offsets.size()) throw std::out_of_range("profile: player index out of range");
    return {values.data() + offsets[i], offsets[i + 1] - offsets[i]};
}

std::vector<double> Profile::part(std::size_t i) const {
    auto s = slice(i);
    return {s.begin(), s.end()};
}

void Profile::set_slice(std::size_t i, std::span<const double> v) {
    auto s = slice(i);
    if (v.size() != s.size()) throw std::invalid_argument("profile: slice dimension mismatch");
    std::copy(v.begin(), v.end(), s.begin());
}

std::vector<std::vector<double>> Profile::split() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < num_players(); ++i) out.push_back(part(i));
    return out;
}

// ---------------------------------------------------------------- GameSpec

GameSpec GameSpec::build(std::string name, std::vector<PlayerSpec> players, GameClass cls,
                         std::optional<std::vector<double>> selection_probs, bool potential_attested,
                         std::optional<BoxSet> contraction_region) {
    GameSpec g;
    g.name_ = std::move(name);
    g.class_ = cls;
    g.attested_ = potential_attested;
    require(!players.empty(), "game: no players");
    const std::size_t n = players.size();

    g.offsets_.push_back(0);
    for (const auto& p : players) g.offsets_.push_back(g.offsets_.back() + p.dim);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = players[i];
        const std::string who = "player " + std::to_string(i) + ": ";
        require(p.dim >= 1, who + "dimension must be positive");
        require(p.set.dim() == p.dim, who + "strategy set dimension mismatch");
        require(p.own_cost.size() == p.dim, who + "need one own cost per coordinate");
        for (const auto& f : p.own_cost) require(!f.empty(), who + "empty own cost");
        require(p.intercept.empty() || p.intercept.size() == p.dim, who + "intercept dimension mismatch");
        for (const auto& t : p.coupling) {
            require(t.player < n && t.player != i, who + "coupling must reference another player");
            require(t.row < p.dim, who + "coupling row out of range");
            require(t.coord < players[t.player].dim, who + "coupling coordinate out of range");
        }
        if (p.coupling_lipschitz) require(*p.coupling_lipschitz >= 0.0, who + "negative coupling Lipschitz constant");
        if (p.declared_rho) require(*p.declared_rho >= 0.0, who + "negative declared rho");
    }
    g.players_ = std::move(players);

    // Expected own terms and their moduli.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.players_[i];
        std::vector<PiecewiseQuadratic1D> own;
        double sig = std::numeric_limits<double>::infinity();
        double sig_own = std::numeric_limits<double>::infinity();
        double rho = 0.0;
        for (const auto& f : p.own_cost) {
            own.push_back(f.scaled_plus(p.own_coeff.mean(), Quadratic{p.own_quadratic.mean(), 0.0, 0.0}));
            sig = std::min(sig, own.back().sigma());
            sig_own = std::min(sig_own, f.scaled_plus(p.own_coeff.mean(), Quadratic{}).sigma());
            rho = std::max(rho, own.back().rho());
        }
        g.expected_own_.push_back(std::move(own));
        g.sigma_.push_back(sig);
        g.sigma_own_.push_back(sig_own);
        g.rho_.push_back(p.declared_rho.value_or(rho));
    }

    // Coupling Lipschitz constants: spectral norm of the mean weight block.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.players_[i];
        if (p.coupling_lipschitz) {
            g.lipschitz_.push_back(*p.coupling_lipschitz);
            continue;
        }
        const std::size_t cols = g.offsets_.back() - p.dim;
        Matrix w(p.dim, std::max<std::size_t>(cols, 1), 0.0);
        for (const auto& t : p.coupling) {
            std::size_t col = g.offsets_[t.player] + t.coord;
            if (t.player > i) col -= p.dim;
            w(t.row, col) += t.weight.mean();
        }
        g.lipschitz_.push_back(spectral_norm(w).norm);
    }

    if (cls == GameClass::StronglyConvex) {
        for (std::size_t i = 0; i < n; ++i)
            require(g.sigma_[i] > 0.0, "game: strongly convex class needs sigma > 0 for player " + std::to_string(i));
    }

    if (selection_probs) {
        require(selection_probs->size() == n, "game: selection_probs length mismatch");
        double s = 0.0;
        for (double q : *selection_probs) {
            require(q > 0.0 && q <= 1.0, "game: selection probabilities must lie in (0, 1]");
            s += q;
        }
        require(std::abs(s - 1.0) <= 1e-12, "game: selection probabilities must sum to 1");
        g.probs_ = *selection_probs;
    } else {
        g.probs_.assign(n, 1.0 / static_cast<double>(n));
    }

    // Aggregative structure: no cross-player coupling in the linear term and a
    // common separable offset (or none).
    bool aggregative = !g.has_coupling();
    const SeparableOffset* first = nullptr;
    for (const auto& p : g.players_) {
        if (!p.offset) continue;
        if (!first) {
            first = &*p.offset;
        } else if (p.offset->coeff.mean() != first->coeff.mean() || !same_function(p.offset->h, first->h)) {
            aggregative = false;
        }
    }
    if (aggregative)
        g.potentiality_ = Potentiality::Aggregative;
    else if (potential_attested)
        g.potentiality_ = Potentiality::Attested;

    if (contraction_region) {
        require(contraction_region->dim() == g.total_dim(), "game: contraction region dimension mismatch");
        g.region_ = std::move(contraction_region);
    }
    return g;
}

const PlayerSpec& GameSpec::player(std::size_t i) const {
    if (i >= players_.size()) throw std::out_of_range("game: player index out of range");
    return players_[i];
}

const PiecewiseQuadratic1D& GameSpec::expected_own(std::size_t i, std::size_t c) const {
    return expected_own_.at(i).at(c);
}

double GameSpec::max_rho() const { return *std::max_element(rho_.begin(), rho_.end()); }

bool GameSpec::has_coupling() const {
    for (const auto& p : players_)
        for (const auto& t : p.coupling)
            if (t.weight.lo != 0.0 || t.weight.hi != 0.0) return true;
    return false;
}

void GameSpec::check_profile(const Profile& x) const {
    if (x.offsets != offsets_) throw std::invalid_argument("profile layout does not match the game");
}

bool GameSpec::feasible(const Profile& x, double tol) const {
    check_profile(x);
    for (std::size_t i = 0; i < num_players(); ++i)
        if (!players_[i].set.contains(x.slice(i), tol)) return false;
    return true;
}

void GameSpec::project(Profile& x) const {
    check_profile(x);
    for (std::size_t i = 0; i < num_players(); ++i) players_[i].set.project_in_place(x.slice(i));
}

void GameSpec::linear_affine(std::size_t i, const Profile& x, std::vector<double>& base,
                             std::vector<double>& slope) const {
    const auto& p = player(i);
    check_profile(x);
    base.assign(p.dim, 0.0);
    slope.assign(p.dim, 0.0);
    for (std::size_t r = 0; r < p.intercept.size(); ++r) {
        base[r] += p.intercept[r].lo;
        slope[r] += p.intercept[r].hi - p.intercept[r].lo;
    }
    for (const auto& t : p.coupling) {
        const double xj = x.values[offsets_[t.player] + t.coord];
        base[t.row] += t.weight.lo * xj;
        slope[t.row] += (t.weight.hi - t.weight.lo) * xj;
    }
}

std::vector<double> GameSpec::expected_linear(std::size_t i, const Profile& x) const {
    std::vector<double> base, slope;
    linear_affine(i, x, base, slope);
    for (std::size_t r = 0; r < base.size(); ++r) base[r] += 0.5 * slope[r];
    return base;
}

double GameSpec::expected_offset(std::size_t i, const Profile& x) const {
    const auto& p = player(i);
    if (!p.offset) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < num_players(); ++j) {
        if (j == i) continue;
        for (double v : x.slice(j)) s += p.offset->h.value(v);
    }
    return p.offset->coeff.mean() * s;
}

// ---------------------------------------------------------------- oracles

double evaluate_expected_objective(const GameSpec& game, std::size_t i, const Profile& x) {
    const auto& p = game.player(i);
    game.check_profile(x);
    const auto xi = x.slice(i);
    const auto lin = game.expected_linear(i, x);
    double v = 0.0;
    for (std::size_t c = 0; c < p.dim; ++c) v += game.expected_own(i, c).value(xi[c]) + lin[c] * xi[c];
    return v + game.expected_offset(i, x);
}

std::vector<double> expected_subgradient(const GameSpec& game, std::size_t i, const Profile& x) {
    const auto& p = game.player(i);
    game.check_profile(x);
    const auto xi = x.slice(i);
    auto g = game.expected_linear(i, x);
    for (std::size_t c = 0; c < p.dim; ++c) g[c] += game.expected_own(i, c).subgradient(xi[c]);
    return g;
}

std::vector<double> sample_subgradient(const GameSpec& game, std::size_t i, const Profile& x, RngStream& rng) {
    FrozenSubgradientOracle oracle(game, i, x);
    const double u = rng.uniform01();
    const auto xi = x.slice(i);
    std::vector<double> g(xi.size());
    for (std::size_t c = 0; c < xi.size(); ++c) g[c] = oracle.at(c, xi[c], u);
    return g;
}

FrozenSubgradientOracle::FrozenSubgradientOracle(const GameSpec& game, std::size_t i, const Profile& x) {
    const auto& p = game.player(i);
    for (const auto& f : p.own_cost) own_.push_back(&f);
    c0_ = p.own_coeff.lo;
    c1_ = p.own_coeff.hi - p.own_coeff.lo;
    q0_ = p.own_quadratic.lo;
    q1_ = p.own_quadratic.hi - p.own_quadratic.lo;
    game.linear_affine(i, x, p0_, p1_);
}

}  // namespace msgames
