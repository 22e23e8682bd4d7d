#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "penal/parallel.hpp"
#include "penal/path.hpp"
#include "penal/stats.hpp"
#include "penal/weights.hpp"

namespace penal {

enum class Functional : std::uint8_t { x, s, i, l, d };
std::string functional_name(Functional f);

// lo < value <= hi
struct Constraint {
    Functional f;
    double lo;
    double hi;
};

class EventSpec {
  public:
    EventSpec(double time, std::vector<Constraint> constraints, std::string label = {});
    // The whole space, written as one vacuous constraint.
    static EventSpec everything(double time);

    double time() const { return time_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::string& label() const { return label_; }
    bool contains(const PathState& st) const;

  private:
    double time_;
    std::vector<Constraint> constraints_;
    std::string label_;
};

// Events used for route comparison and penalization: {S_0.5 <= 0.8}, {X_0.5 > 0},
// plus {L_0.5 <= 0.3} for the signed family and {D_1 = 0} for the down-crossing one.
std::vector<EventSpec> event_battery(const WeightSpec& spec);

// P-walker carrying the functionals the family's martingale reads.
WalkerConfig walker_config_for(const WeightSpec& spec, double dt);

// The penalizing functional F_t evaluated on a state at time t.
double penalty_functional(const WeightSpec& spec, const PathState& st);

struct PenalizationConfig {
    double dt = 0x1.0p-10;
    std::vector<double> times{4.0, 16.0, 64.0};
    std::size_t n = 10000;
    double x0 = 0.0;
};

// ratio[e][k] estimates E[1_Gamma_e F_t] / E[F_t] at t = times[k]. Paths follow P up
// to the last event time and continue with exact transitions; the Kennedy and atom
// families use importance sampling after that, the down-crossing family the exact
// conditional expectation of F_t given the state.
std::vector<std::vector<McEstimate>> penalization_ratios(const WeightSpec& spec, const std::vector<EventSpec>& events,
                                                         const PenalizationConfig& cfg, const RunContext& ctx);
McEstimate penalization_ratio(const WeightSpec& spec, const EventSpec& gamma, double t, const PenalizationConfig& cfg,
                              const RunContext& ctx);

// E[1_Gamma M_s] / M_0 under P on the grid.
std::vector<McEstimate> limit_sides(const WeightSpec& spec, const std::vector<EventSpec>& events, double dt, double x0,
                                    std::size_t n, const RunContext& ctx);
McEstimate limit_side(const WeightSpec& spec, const EventSpec& gamma, double dt, double x0, std::size_t n,
                      const RunContext& ctx);

// ---- lemma checkers --------------------------------------------------------------

struct BoundCheck {
    std::string name;
    double at = 0.0;
    double value = 0.0;
    double bound = 0.0;
    bool upper = true;
    bool holds() const { return upper ? value <= bound : value >= bound; }
};

struct LemmaReport {
    std::string name;
    double t = 0.0;
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double ratio() const { return lhs / rhs; }
    std::vector<BoundCheck> bounds;
};

// E_0[phi0(a v (x + S_u))] by quadrature against the law of S_u, with the asymptote
// sqrt(2 / (pi u)) {(a - x) phi0(a) + int_a^inf phi0} and both bounds.
LemmaReport maximum_asymptote_check(const PiecewiseExpPoly& phi0, double a, double x, double u);

// E_0[psi(s v (x + S_t)) e^{lambda (s v (x + S_t) - x - X_t)}] e^{-lambda^2 t / 2} against
// 2 rho, with rho = psi(s) sinh(lambda (s - x)) + lambda e^{lambda x} T(s).
LemmaReport kennedy_asymptote_check(const KennedyPsi& psi, double s, double x, double t);

// E_x[f(a + L_t) 1{X_t > 0}]: closed-form survival part plus an MC part built from the
// passage time to 0 and L_r = S_r in law.
LemmaReport local_time_asymptote_check(const PiecewiseExpPoly& f, double a, double x, double t, std::size_t n,
                              const RunContext& ctx);

struct TabooConstantReport {
    double a = 0.0;
    double b = 0.0;
    // ab E_Q[1 / ((a - X+)(b - X-))] at each time of the grid.
    std::vector<double> times;
    std::vector<McEstimate> estimates;
    double sup_estimate() const;
    // Direct e^{cL} 1{t < T_-b ^ T_a} average under P at times.front().
    McEstimate direct;
    double target = 1.5;
};

struct TabooConstantConfig {
    double dt = 0x1.0p-10;
    double layer = 10.0;
    std::vector<double> times{1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    std::size_t n = 100000;
    std::size_t n_direct = 100000;
};

// c = (1/a + 1/b) / 2, the rate carried by the martingale of the atom family.
TabooConstantReport taboo_constant_check(double a, double b, const TabooConstantConfig& cfg, const RunContext& ctx);

// sqrt(t) E_x[H(D_t)] from the passage-time law of D_t, against
// 2 (b - a) sqrt(2/pi) {sum_{n>=1} H(n) + H(0) (1/2 + |x - b| / (2 (b - a)))}.
// sum_H is the full sum of H and must be finite.
LemmaReport downcross_rate_check(const std::function<double(int)>& H, double sum_H, double x, Levels levels, double t);
// Sum of G(n) for the supported sequences; throws when it diverges.
double sequence_sum(const GSequence& g);

// P_x(D_t >= n) for the ladder started on the up leg at x <= b, or on the down leg.
double downcross_at_least(double x, Leg leg, Levels levels, double t, int n);

}  // namespace penal
