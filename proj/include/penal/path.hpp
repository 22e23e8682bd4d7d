#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "penal/errors.hpp"
#include "penal/rng.hpp"

namespace penal {

class TimeGrid {
  public:
    TimeGrid(double t0, double dt, std::size_t n_steps);
    // Smallest grid from 0 whose last point is at or beyond the horizon.
    static TimeGrid covering(double horizon, double dt);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t n_steps() const { return n_steps_; }
    double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
    double end() const { return time(n_steps_); }

  private:
    double t0_;
    double dt_;
    std::size_t n_steps_;
};

struct BrownPath {
    TimeGrid grid;
    std::vector<double> values;
    double x0 = 0.0;
    double drift = 0.0;
};

// Down-crossing ladder levels a < b.
struct Levels {
    double a;
    double b;
    Levels(double lower, double upper);
};

// up: armed for the next excess of b; down: armed for the next passage below a.
enum class Leg : std::uint8_t { up, down };

struct RunningFunctionals {
    std::vector<double> S;
    std::vector<double> I;
    std::vector<double> Xstar;
    std::vector<double> L;
    std::vector<int> D;
    std::vector<double> sigma;
    std::vector<Leg> phase;
};

struct LocalTimeConfig {
    bool enabled = true;
    double eps = 0.0;  // 0 selects sqrt(dt)
};

BrownPath gen_bm(double x0, double drift, const TimeGrid& grid, RngStream& rng);

// The rng is consumed only when bridge is set.
RunningFunctionals track_functionals(const BrownPath& path, std::optional<Levels> levels,
                                     const LocalTimeConfig& lt_cfg, bool bridge, RngStream& rng);

std::vector<double> estimate_local_time(const BrownPath& path, double eps);

struct LevyPath {
    std::vector<double> abs_x;
    std::vector<double> local_time;
    std::vector<double> signed_x;
};

// (|X|, L) built as (top(B) - B, top(B)) from an auxiliary Brownian motion B.
LevyPath gen_levy_local_time(const TimeGrid& grid, RngStream& rng, bool sign_flips);

std::optional<double> hitting_time(const BrownPath& path, double level, bool bridge, RngStream& rng);

std::vector<double> gen_bessel3(double r0, const TimeGrid& grid, RngStream& rng);

// ---- step kernels shared by the samplers ------------------------------------

// Exact maximum (minimum) of a Brownian bridge from x1 to x2 over dt, by inversion of u.
inline double bridge_max(double x1, double x2, double dt, double u) {
    const double d = x2 - x1;
    return 0.5 * (x1 + x2 + std::sqrt(d * d - 2.0 * dt * std::log(u)));
}
inline double bridge_min(double x1, double x2, double dt, double u) {
    const double d = x2 - x1;
    return 0.5 * (x1 + x2 - std::sqrt(d * d - 2.0 * dt * std::log(u)));
}

// Probability that a bridge from x1 to x2 touches level; 1 when the endpoints straddle it.
inline double bridge_cross_prob(double level, double x1, double x2, double dt) {
    const double e = (level - x1) * (level - x2);
    if (e <= 0.0) return 1.0;
    return std::exp(-2.0 * e / dt);
}

// Running maximum after a step, sampled from the bridge law.
double update_running_max(double current, double x1, double x2, double dt, RngStream& rng);
double update_running_min(double current, double x1, double x2, double dt, RngStream& rng);

// Exact Bessel(3) transition over dt.
inline double bessel3_step(double r, double dt, RngStream& rng) {
    const double h = std::sqrt(dt);
    const double z1 = r + h * rng.normal();
    const double z2 = h * rng.normal();
    const double z3 = h * rng.normal();
    return std::sqrt(z1 * z1 + z2 * z2 + z3 * z3);
}

// Exact minimum of a Bessel(3) bridge from r1 to r2 over dt: the Brownian bridge
// conditioned to stay positive. u is P(min > m).
inline double bessel3_bridge_min(double r1, double r2, double dt, double u) {
    const double p0 = -std::expm1(-2.0 * r1 * r2 / dt);
    const double q = -0.5 * dt * std::log1p(-u * p0);
    const double d = r1 - r2;
    return 0.5 * ((r1 + r2) - std::sqrt(d * d + 4.0 * q));
}

// Probability that a Bessel(3) bridge from r1 to r2 over dt goes below c, 0 < c.
inline double bessel3_bridge_below_prob(double c, double r1, double r2, double dt) {
    if (c >= std::min(r1, r2)) return 1.0;
    const double hit = std::exp(-2.0 * (r1 - c) * (r2 - c) / dt);
    const double zero = std::exp(-2.0 * r1 * r2 / dt);
    return (hit - zero) / (1.0 - zero);
}

// Norm of a 3-d Brownian motion with drift lambda along the first axis. Started at
// the origin the norm solves dZ = dW + lambda coth(lambda Z) dt.
struct DriftedBessel3 {
    double v[3] = {0.0, 0.0, 0.0};
    double lambda = 0.0;
    double step(double dt, RngStream& rng) {
        const double h = std::sqrt(dt);
        v[0] += lambda * dt + h * rng.normal();
        v[1] += h * rng.normal();
        v[2] += h * rng.normal();
        return norm();
    }
    double norm() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
};

// First passage time of a driftless Brownian motion over a distance c >= 0.
inline double hitting_time_sample(double c, RngStream& rng) {
    const double z = rng.normal();
    return c * c / (z * z);
}

enum class LadderEvent : std::uint8_t { none, up, down };

// Two-state sigma-ladder machine.
class DownCrossLadder {
  public:
    DownCrossLadder(Levels levels, double x0);

    LadderEvent update(double x1, double x2, double dt, bool bridge, RngStream& rng);

    Levels levels() const { return levels_; }
    Leg leg() const { return leg_; }
    int count() const { return count_; }
    void reset(Leg leg, int count) {
        leg_ = leg;
        count_ = count;
    }

  private:
    Levels levels_;
    Leg leg_ = Leg::up;
    int count_ = 0;
};

// Snapshot of the path functionals at one time.
struct PathState {
    double t = 0.0;
    double x = 0.0;
    double s = 0.0;
    double i = 0.0;
    double l = 0.0;
    int d = 0;
    Leg leg = Leg::up;
};

struct WalkerConfig {
    double dt = 0x1.0p-10;
    double drift = 0.0;
    // Exact local time through the excursion construction; excludes drift and ladder.
    bool local_time = false;
    std::optional<Levels> ladder;
    bool bridge = true;
};

// Streaming Brownian motion under P with its running functionals.
class BrownianWalker {
  public:
    BrownianWalker(const WalkerConfig& cfg, double x0);

    void step(RngStream& rng);
    void run_until(double t, RngStream& rng);
    // One exact transition over h for X, S and L; I and S are updated from
    // endpoints only in local-time mode, and the ladder is not supported.
    void jump(double h, RngStream& rng);

    const PathState& state() const { return st_; }
    const WalkerConfig& config() const { return cfg_; }

  private:
    void step_plain(double h, RngStream& rng);
    void step_levy(double h, RngStream& rng, bool careful_extremes);

    WalkerConfig cfg_;
    PathState st_;
    std::optional<DownCrossLadder> ladder_;
    double aux_ = 0.0;  // auxiliary motion B in local-time mode
    double top_ = 0.0;  // max(0, sup B)
    int sign_ = 1;
};

}  // namespace penal
