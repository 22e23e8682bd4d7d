#include "penal/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace penal {

namespace {

void require_consistent(double s, double x) {
    if (s < x) throw StateError("running maximum below the current value");
}

double atom_rate(const Atom& at) { return 0.5 * (1.0 / at.a + 1.0 / at.b); }

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

double m_phi(double s, double x, const DensityPhi& phi) {
    require_consistent(s, x);
    return (s - x) * phi.pdf(s) + phi.tail(s);
}

double m_kennedy(double s, double x, double t, const KennedyPsi& k) {
    require_consistent(s, x);
    const double lam = k.lambda();
    return (k.psi(s) * std::sinh(lam * (s - x)) / lam + std::exp(lam * x) * k.tail_integral(s)) *
           std::exp(-0.5 * lam * lam * t);
}

double m_signed_local(double xp, double xm, double l, const SignWeights& w) {
    if (xp < 0.0 || xm < 0.0 || l < 0.0) throw StateError("signed local: X+, X- and L must be nonnegative");
    if (xp * xm != 0.0) throw StateError("signed local: X+ and X- cannot both be positive");
    return w.one_minus_H(l) + xp * w.h_plus(l) + xm * w.h_minus(l);
}

double m_nu(double s, double i, double xp, double xm, double l, const AtomMeasure& nu) {
    if (xp < 0.0 || xm < 0.0 || l < 0.0 || s < xp || i < xm) throw StateError("atom family: inconsistent state");
    double v = 0.0;
    for (const auto& at : nu.atoms())
        if (s <= at.a && i <= at.b) v += at.w * (1.0 - xp / at.a) * (1.0 - xm / at.b) * std::exp(atom_rate(at) * l);
    return v;
}

double m_nu_star(double xstar, double abs_x, double l, const AtomMeasure& nu) {
    if (!nu.diagonal()) throw ConfigError("diagonal form needs atoms with a = b");
    if (abs_x < 0.0 || l < 0.0 || xstar < abs_x) throw StateError("diagonal atom family: inconsistent state");
    double v = 0.0;
    for (const auto& at : nu.atoms())
        if (xstar <= at.a) v += at.w * (1.0 - abs_x / at.a) * std::exp(l / at.a);
    return v;
}

double m_downcross(double x, int d, Leg leg, const GSequence& g, Levels levels) {
    const double a = levels.a;
    const double b = levels.b;
    const double gn = g.G(d);
    const double gn1 = g.G(d + 1);
    const double armed = leg == Leg::up ? gn : gn1;  // weight of the 2b - a - X part
    const double other = leg == Leg::up ? gn1 : gn;
    return (armed * (2.0 * b - a - x) + other * (x - a)) / (2.0 * (b - a));
}

double martingale_value(const WeightSpec& spec, const PathState& st) {
    return std::visit(
        overloaded{
            [&](const PhiFamily& f) { return m_phi(st.s, st.x, f.phi); },
            [&](const KennedyFamily& f) { return m_kennedy(st.s, st.x, st.t, f.psi); },
            [&](const SignedLocalFamily& f) {
                return m_signed_local(std::max(st.x, 0.0), std::max(-st.x, 0.0), st.l, f.w);
            },
            [&](const AtomFamily& f) {
                return m_nu(std::max(st.s, 0.0), st.i, std::max(st.x, 0.0), std::max(-st.x, 0.0), st.l, f.nu);
            },
            [&](const DownCrossFamily& f) { return m_downcross(st.x, st.d, st.leg, f.g, f.levels); },
        },
        spec);
}

PathState initial_state(const WeightSpec& spec, double x0) {
    PathState st;
    st.x = x0;
    st.s = x0;
    st.i = std::max(-x0, 0.0);
    if (const auto* dc = std::get_if<DownCrossFamily>(&spec)) st.leg = x0 > dc->levels.b ? Leg::down : Leg::up;
    return st;
}

double martingale_initial(const WeightSpec& spec, double x0) { return martingale_value(spec, initial_state(spec, x0)); }

double dM_dx(const WeightSpec& spec, const PathState& st) {
    return std::visit(
        overloaded{
            [&](const PhiFamily& f) { return -f.phi.pdf(st.s); },
            [&](const KennedyFamily& f) {
                const auto& k = f.psi;
                const double lam = k.lambda();
                return (-k.psi(st.s) * std::cosh(lam * (st.s - st.x)) + lam * std::exp(lam * st.x) * k.tail_integral(st.s)) *
                       std::exp(-0.5 * lam * lam * st.t);
            },
            [&](const SignedLocalFamily& f) {
                if (st.x > 0.0) return f.w.h_plus(st.l);
                if (st.x < 0.0) return -f.w.h_minus(st.l);
                return 0.0;
            },
            [&](const AtomFamily& f) {
                double v = 0.0;
                for (const auto& at : f.nu.atoms()) {
                    if (!(st.s <= at.a && st.i <= at.b)) continue;
                    const double e = at.w * std::exp(atom_rate(at) * st.l);
                    if (st.x > 0.0) v -= e / at.a;
                    else if (st.x < 0.0) v += e / at.b;
                }
                return v;
            },
            [&](const DownCrossFamily& f) {
                const double gn = f.g.G(st.d);
                const double gn1 = f.g.G(st.d + 1);
                const double slope = st.leg == Leg::up ? gn1 - gn : gn - gn1;
                return slope / (2.0 * (f.levels.b - f.levels.a));
            },
        },
        spec);
}

double drift_J(const WeightSpec& spec, const PathState& st) {
    if (const auto* kf = std::get_if<KennedyFamily>(&spec)) {
        // Ratio form divided through by cosh, finite for any lambda (S - X).
        const auto& k = kf->psi;
        require_consistent(st.s, st.x);
        const double lam = k.lambda();
        const double c = k.one_minus_Phi(st.s);
        const double ph = k.phi(st.s);
        const double th = std::tanh(lam * (st.s - st.x));
        const double den = lam * c + ph * th;
        if (!(den > 0.0)) throw AbsorbedError("Kennedy family: martingale vanished");
        return -lam * (ph + lam * c * th) / den;
    }
    const double m = martingale_value(spec, st);
    if (!(m > 0.0)) throw AbsorbedError(family_kind(spec) + " family: martingale vanished");
    return dM_dx(spec, st) / m;
}

std::vector<PathState> path_states(const BrownPath& path, const RunningFunctionals& f) {
    std::vector<PathState> out(path.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        PathState& st = out[k];
        st.t = path.grid.time(k) - path.grid.t0();
        st.x = path.values[k];
        st.s = f.S[k];
        st.i = f.I[k];
        st.l = f.L.empty() ? 0.0 : f.L[k];
        st.d = f.D.empty() ? 0 : f.D[k];
        st.leg = f.phase.empty() ? Leg::up : f.phase[k];
    }
    return out;
}

MartingaleSeries martingale_series(const WeightSpec& spec, const std::vector<PathState>& states) {
    MartingaleSeries ms;
    ms.family = family_kind(spec);
    ms.M.resize(states.size());
    ms.running_min.resize(states.size());
    ms.absorbed_at = states.size();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double m = ms.absorbed() ? 0.0 : martingale_value(spec, states[k]);
        if (!(m > 0.0) && !ms.absorbed()) ms.absorbed_at = k;
        ms.M[k] = m;
        lo = std::min(lo, m);
        ms.running_min[k] = lo;
    }
    if (!states.empty()) ms.M0 = ms.M[0];
    return ms;
}

double stochastic_log_residual(const WeightSpec& spec, const std::vector<PathState>& states) {
    if (states.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        const double j = drift_J(spec, states[k]);
        const double dx = states[k + 1].x - states[k].x;
        const double dt = states[k + 1].t - states[k].t;
        acc += j * dx - 0.5 * j * j * dt;
    }
    const double m0 = martingale_value(spec, states.front());
    const double mt = martingale_value(spec, states.back());
    if (!(mt > 0.0)) throw AbsorbedError("log residual: martingale vanished on the path");
    return std::log(mt) - std::log(m0) - acc;
}

}  // namespace penal
