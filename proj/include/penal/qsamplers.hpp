#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "penal/martingale.hpp"
#include "penal/path.hpp"
#include "penal/rng.hpp"
#include "penal/weights.hpp"

namespace penal {

enum class Route : std::uint8_t { direct, sde, weighted };
std::string route_name(Route r);

// Terminal values of the Q-path. nullopt means not applicable for the family,
// +inf means the functional diverges.
struct Terminals {
    std::optional<double> s_inf;
    std::optional<double> i_inf;
    std::optional<double> xstar_inf;
    std::optional<double> l_inf;
    std::optional<int> d_inf;
    std::optional<int> sign_inf;  // branch of the final excursion, case 2
    std::optional<double> g;
    std::optional<double> gbar;
    // Down-crossing family: whether X returned to b before the grid horizon, and the
    // hit probability given the state at the horizon (1 once hit).
    std::optional<bool> gbar_within_horizon;
    std::optional<double> gbar_hit_prob;
};

struct QConfig {
    double dt = 0x1.0p-10;
    // Grid-aligned snapshot times.
    std::vector<double> observe;
    // The grid runs to max(horizon, max observe); terminals are completed exactly past it.
    double horizon = 0.0;
    bool record_path = false;
    // Bridge-sampled running extremes between grid points.
    bool track_extremes = true;
    // Boundary layer width in units of sqrt(dt).
    double layer = 10.0;
    // Band for the occupation local-time estimator; 0 selects sqrt(dt).
    double eps = 0.0;
};

struct QSample {
    Route route = Route::direct;
    std::vector<PathState> snapshots;
    // Per-snapshot weight M_s / M_0 for the weighted route, 1 otherwise.
    std::vector<double> weights;
    Terminals terminals;
    std::vector<double> path;
    bool valid = true;
    std::string reason;
};

struct TabooParams {
    double s;
    double i;
    TabooParams(double upper, double lower);
};

// Route A, one entry per family.
QSample sample_q_phi_direct(const DensityPhi& phi, double x0, const QConfig& cfg, RngStream& rng);
QSample sample_q_kennedy_direct(const KennedyPsi& k, double x0, const QConfig& cfg, RngStream& rng);
QSample sample_q_signed_direct(const SignWeights& w, const QConfig& cfg, RngStream& rng);
QSample sample_q_taboo(TabooParams p, const QConfig& cfg, RngStream& rng, double x0 = 0.0);
// Picks an atom with probability w_j and runs the taboo process on (-b_j, a_j).
QSample sample_q_atoms_direct(const AtomMeasure& nu, const QConfig& cfg, RngStream& rng);
QSample sample_q_downcross_direct(const GSequence& g, Levels levels, double x0, const QConfig& cfg, RngStream& rng);
QSample sample_q_direct(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng);

// Route B: Euler scheme with the drift d/dx log M, exact Bessel(3) steps inside the
// boundary layer where M is affine in x and close to 0.
QSample sample_q_sde(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng);

// Route C: a P-path with weights M_s / M_0 at the snapshot times.
QSample sample_weighted(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng);

QSample sample_q(Route route, const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng);

// Drift of the taboo process on (-i, s), case 3 with a single atom.
double taboo_drift(TabooParams p, double y);
// One grid step of the taboo process, without running extremes; delta is the width
// of the band around 0 advanced by Euler.
double taboo_step(TabooParams p, double y, double dt, double delta, RngStream& rng);
// Stationary density of the taboo process: 3 (1 - y/s)^2 / (s + i) for y >= 0, mirrored below.
double taboo_density(TabooParams p, double y);
double taboo_cdf(TabooParams p, double y);

// Analytic law of the family's defining terminal.
struct TerminalOracle {
    std::string terminal;
    // Continuous terminals.
    std::function<double(double)> cdf;
    // Discrete terminals: pmf over 0..pmf.size()-1 (atoms are indexed in order).
    std::vector<double> pmf;
    // Case 2: Q(positive final branch).
    std::optional<double> positive_branch;
};
TerminalOracle terminal_law_oracle(const WeightSpec& spec, double x0 = 0.0);

// Down-crossing family under Q_x0: P(D_inf = n); equals G(n) - G(n + 1) when x0 = a.
double downcross_terminal_pmf(const GSequence& g, Levels levels, double x0, int n);

}  // namespace penal
