#include "penal/path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace penal {

namespace {

// Beyond this exponent a bridge crossing has probability below 5e-18.
constexpr double kNegligibleExponent = 40.0;

bool crosses_above(double level, double x1, double x2, double dt, bool bridge, RngStream& rng) {
    if (x2 > level) return true;
    if (!bridge) return false;
    const double e = 2.0 * (level - x1) * (level - x2) / dt;
    if (e > kNegligibleExponent) return false;
    return rng.uniform() < std::exp(-e);
}

bool crosses_below(double level, double x1, double x2, double dt, bool bridge, RngStream& rng) {
    if (x2 < level) return true;
    if (!bridge) return false;
    const double e = 2.0 * (x1 - level) * (x2 - level) / dt;
    if (e > kNegligibleExponent) return false;
    return rng.uniform() < std::exp(-e);
}

}  // namespace

TimeGrid::TimeGrid(double t0, double dt, std::size_t n_steps) : t0_(t0), dt_(dt), n_steps_(n_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time grid: dt must be positive, got " + std::to_string(dt));
    if (!(t0 >= 0.0)) throw ConfigError("time grid: t0 must be nonnegative");
}

TimeGrid TimeGrid::covering(double horizon, double dt) {
    if (!(dt > 0.0)) throw ConfigError("time grid: dt must be positive");
    if (!(horizon >= 0.0)) throw ConfigError("time grid: horizon must be nonnegative");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    return TimeGrid(0.0, dt, n);
}

Levels::Levels(double lower, double upper) : a(lower), b(upper) {
    if (!(lower < upper)) throw ConfigError("down-crossing levels require a < b");
}

double update_running_max(double current, double x1, double x2, double dt, RngStream& rng) {
    if (std::max(x1, x2) >= current) return std::max(current, bridge_max(x1, x2, dt, rng.uniform()));
    const double e = 2.0 * (current - x1) * (current - x2) / dt;
    if (e > kNegligibleExponent) return current;
    const double u = rng.uniform();
    return u < std::exp(-e) ? bridge_max(x1, x2, dt, u) : current;
}

double update_running_min(double current, double x1, double x2, double dt, RngStream& rng) {
    if (std::min(x1, x2) <= current) return std::min(current, bridge_min(x1, x2, dt, rng.uniform()));
    const double e = 2.0 * (x1 - current) * (x2 - current) / dt;
    if (e > kNegligibleExponent) return current;
    const double u = rng.uniform();
    return u < std::exp(-e) ? bridge_min(x1, x2, dt, u) : current;
}

BrownPath gen_bm(double x0, double drift, const TimeGrid& grid, RngStream& rng) {
    BrownPath p{grid, {}, x0, drift};
    p.values.resize(grid.n_steps() + 1);
    p.values[0] = x0;
    const double dt = grid.dt();
    const double h = std::sqrt(dt);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) p.values[k + 1] = p.values[k] + drift * dt + h * rng.normal();
    return p;
}

std::vector<double> estimate_local_time(const BrownPath& path, double eps) {
    if (!(eps > 0.0)) throw ConfigError("local time: eps must be positive");
    std::vector<double> L(path.values.size());
    const double unit = path.grid.dt() / (2.0 * eps);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        if (std::abs(path.values[k]) < eps) ++hits;
        L[k] = unit * static_cast<double>(hits);
    }
    return L;
}

DownCrossLadder::DownCrossLadder(Levels levels, double x0) : levels_(levels) {
    if (x0 > levels.b) leg_ = Leg::down;
}

LadderEvent DownCrossLadder::update(double x1, double x2, double dt, bool bridge, RngStream& rng) {
    if (leg_ == Leg::up) {
        if (!crosses_above(levels_.b, x1, x2, dt, bridge, rng)) return LadderEvent::none;
        leg_ = Leg::down;
        return LadderEvent::up;
    }
    if (!crosses_below(levels_.a, x1, x2, dt, bridge, rng)) return LadderEvent::none;
    leg_ = Leg::up;
    ++count_;
    return LadderEvent::down;
}

RunningFunctionals track_functionals(const BrownPath& path, std::optional<Levels> levels,
                                     const LocalTimeConfig& lt_cfg, bool bridge, RngStream& rng) {
    const std::size_t n = path.values.size();
    const double dt = path.grid.dt();
    RunningFunctionals f;
    f.S.resize(n);
    f.I.resize(n);
    f.Xstar.resize(n);
    f.D.resize(n);
    f.phase.resize(n);
    if (n == 0) return f;

    const double x0 = path.values[0];
    double s = x0;
    double m = x0;
    std::optional<DownCrossLadder> ladder;
    if (levels) {
        ladder.emplace(*levels, x0);
        if (ladder->leg() == Leg::down) f.sigma.push_back(path.grid.time(0));
    }
    auto record = [&](std::size_t k) {
        f.S[k] = s;
        f.I[k] = std::max(-m, 0.0);
        f.Xstar[k] = std::max(f.S[k], f.I[k]);
        f.D[k] = ladder ? ladder->count() : 0;
        f.phase[k] = ladder ? ladder->leg() : Leg::up;
    };
    record(0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double x1 = path.values[k];
        const double x2 = path.values[k + 1];
        if (bridge) {
            s = update_running_max(s, x1, x2, dt, rng);
            m = update_running_min(m, x1, x2, dt, rng);
        } else {
            s = std::max(s, x2);
            m = std::min(m, x2);
        }
        if (ladder && ladder->update(x1, x2, dt, bridge, rng) != LadderEvent::none)
            f.sigma.push_back(path.grid.time(k + 1));
        record(k + 1);
    }
    if (lt_cfg.enabled) f.L = estimate_local_time(path, lt_cfg.eps > 0.0 ? lt_cfg.eps : std::sqrt(dt));
    return f;
}

LevyPath gen_levy_local_time(const TimeGrid& grid, RngStream& rng, bool sign_flips) {
    const std::size_t n = grid.n_steps() + 1;
    LevyPath p;
    p.abs_x.resize(n);
    p.local_time.resize(n);
    p.signed_x.resize(n);
    const double dt = grid.dt();
    const double h = std::sqrt(dt);
    double b = 0.0;
    double top = 0.0;
    double sign = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double b2 = b + h * rng.normal();
        const double new_top = update_running_max(top, b, b2, dt, rng);
        if (new_top > top && sign_flips) sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        top = new_top;
        b = b2;
        p.abs_x[k] = top - b;
        p.local_time[k] = top;
        p.signed_x[k] = sign * (top - b);
    }
    return p;
}

std::optional<double> hitting_time(const BrownPath& path, double level, bool bridge, RngStream& rng) {
    if (path.values.empty()) return std::nullopt;
    if (path.values[0] == level) return path.grid.time(0);
    const double dt = path.grid.dt();
    const bool above = path.values[0] > level;
    for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
        const double x1 = path.values[k];
        const double x2 = path.values[k + 1];
        const bool hit = above ? (x2 <= level || crosses_below(level, x1, x2, dt, bridge, rng))
                               : (x2 >= level || crosses_above(level, x1, x2, dt, bridge, rng));
        if (hit) return path.grid.time(k + 1);
    }
    return std::nullopt;
}

std::vector<double> gen_bessel3(double r0, const TimeGrid& grid, RngStream& rng) {
    if (!(r0 >= 0.0)) throw ConfigError("Bessel(3): starting point must be nonnegative");
    std::vector<double> r(grid.n_steps() + 1);
    const double h = std::sqrt(grid.dt());
    double v[3] = {r0, 0.0, 0.0};
    r[0] = r0;
    for (std::size_t k = 1; k < r.size(); ++k) {
        for (double& c : v) c += h * rng.normal();
        r[k] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    return r;
}

// ---- BrownianWalker ----------------------------------------------------------

BrownianWalker::BrownianWalker(const WalkerConfig& cfg, double x0) : cfg_(cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("walker: dt must be positive");
    if (cfg.local_time && (cfg.drift != 0.0 || cfg.ladder))
        throw ConfigError("walker: exact local time excludes drift and the down-crossing ladder");
    st_.x = x0;
    st_.s = x0;
    st_.i = std::max(-x0, 0.0);
    if (cfg.ladder) {
        ladder_.emplace(*cfg.ladder, x0);
        st_.leg = ladder_->leg();
    }
    if (cfg.local_time) {
        aux_ = -std::abs(x0);
        top_ = 0.0;
        sign_ = x0 < 0.0 ? -1 : 1;
    }
}

void BrownianWalker::step(RngStream& rng) {
    if (cfg_.local_time)
        step_levy(cfg_.dt, rng, true);
    else
        step_plain(cfg_.dt, rng);
}

void BrownianWalker::run_until(double t, RngStream& rng) {
    const double tol = 1e-9 * cfg_.dt;
    while (st_.t < t - tol) step(rng);
}

void BrownianWalker::jump(double h, RngStream& rng) {
    if (ladder_) throw ConfigError("walker: exact jumps do not carry the down-crossing ladder");
    if (!(h > 0.0)) return;
    if (cfg_.local_time)
        step_levy(h, rng, false);
    else
        step_plain(h, rng);
}

void BrownianWalker::step_plain(double h, RngStream& rng) {
    const double x1 = st_.x;
    const double x2 = x1 + cfg_.drift * h + std::sqrt(h) * rng.normal();
    if (cfg_.bridge) {
        st_.s = update_running_max(st_.s, x1, x2, h, rng);
        st_.i = -update_running_min(-st_.i, x1, x2, h, rng);
    } else {
        st_.s = std::max(st_.s, x2);
        st_.i = std::max(st_.i, -x2);
    }
    if (ladder_) {
        ladder_->update(x1, x2, h, cfg_.bridge, rng);
        st_.d = ladder_->count();
        st_.leg = ladder_->leg();
    }
    st_.x = x2;
    st_.t += h;
}

void BrownianWalker::step_levy(double h, RngStream& rng, bool careful_extremes) {
    const double b1 = aux_;
    const double b2 = b1 + std::sqrt(h) * rng.normal();
    const double new_top = update_running_max(top_, b1, b2, h, rng);
    const bool zero = new_top > top_;
    if (!zero && careful_extremes && cfg_.bridge) {
        // Same excursion throughout: the extreme of |X| is top - min(B).
        double& ext = sign_ > 0 ? st_.s : st_.i;
        ext = std::max(ext, top_ - update_running_min(top_ - std::max(ext, 0.0), b1, b2, h, rng));
    }
    if (zero) sign_ = rng.uniform() < 0.5 ? -1 : 1;
    top_ = new_top;
    aux_ = b2;
    st_.x = sign_ * (top_ - aux_);
    st_.l = top_;
    st_.s = std::max(st_.s, st_.x);
    st_.i = std::max(st_.i, -st_.x);
    st_.t += h;
}

}  // namespace penal
