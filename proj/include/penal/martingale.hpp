#pragma once

#include <string>
#include <vector>

#include "penal/path.hpp"
#include "penal/weights.hpp"

namespace penal {

// Azema-Yor family: (S - X) phi(S) + 1 - Phi(S).
double m_phi(double s, double x, const DensityPhi& phi);
// {psi(S) sinh(lambda (S - X)) / lambda + e^{lambda X} T(S)} e^{-lambda^2 t / 2}
double m_kennedy(double s, double x, double t, const KennedyPsi& k);
// 1 - H(L) + X+ h+(L) + X- h-(L)
double m_signed_local(double xp, double xm, double l, const SignWeights& w);
// sum_j w_j (1 - X+/a_j)(1 - X-/b_j) exp(c_j L) 1{S <= a_j, I <= b_j}, c_j = (1/a_j + 1/b_j)/2
double m_nu(double s, double i, double xp, double xm, double l, const AtomMeasure& nu);
// Diagonal form: sum_j w_j (1 - |X|/a_j) e^{L/a_j} 1{X* <= a_j}; requires a diagonal measure.
double m_nu_star(double xstar, double abs_x, double l, const AtomMeasure& nu);
double m_downcross(double x, int d, Leg leg, const GSequence& g, Levels levels);

double martingale_value(const WeightSpec& spec, const PathState& st);
// Value at time 0 from x0, with the down-crossing leg set as the ladder would set it.
double martingale_initial(const WeightSpec& spec, double x0);
PathState initial_state(const WeightSpec& spec, double x0);

// d/dx log M at the state; throws AbsorbedError where M vanishes.
double drift_J(const WeightSpec& spec, const PathState& st);
// d/dx M itself, defined everywhere the state is consistent.
double dM_dx(const WeightSpec& spec, const PathState& st);

struct MartingaleSeries {
    std::string family;
    double M0 = 0.0;
    std::vector<double> M;
    std::vector<double> running_min;
    // First index with M = 0, or M.size() if never absorbed.
    std::size_t absorbed_at = 0;
    bool absorbed() const { return absorbed_at < M.size(); }
};

MartingaleSeries martingale_series(const WeightSpec& spec, const std::vector<PathState>& states);
// The states along a discretized path, taking S, I, L, D and legs from the tracked functionals.
std::vector<PathState> path_states(const BrownPath& path, const RunningFunctionals& f);

// log M_T - log M_0 - sum J dX + 1/2 sum J^2 dt along the states (left-point J).
double stochastic_log_residual(const WeightSpec& spec, const std::vector<PathState>& states);

}  // namespace penal
