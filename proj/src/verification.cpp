#include "penal/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "penal/martingale.hpp"
#include "penal/qsamplers.hpp"

namespace penal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeTol = 1e-9;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double value_of(Functional f, const PathState& st) {
    switch (f) {
        case Functional::x: return st.x;
        case Functional::s: return st.s;
        case Functional::i: return st.i;
        case Functional::l: return st.l;
        case Functional::d: return static_cast<double>(st.d);
    }
    return 0.0;
}

// Adaptive Gauss-Kronrod on [lo, hi], split at the given interior points.
template <class F>
double integrate(F&& f, double lo, double hi, std::vector<double> cuts) {
    if (!(hi > lo)) return 0.0;
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    double prev = lo;
    for (double c : cuts) {
        if (c <= prev) continue;
        if (c > hi) break;
        acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, prev, c, 20, 1e-12);
        prev = c;
    }
    return acc;
}

std::vector<double> breakpoints(const PiecewiseExpPoly& f) {
    std::vector<double> out;
    for (const auto& p : f.pieces()) {
        if (std::isfinite(p.lo)) out.push_back(p.lo);
        if (std::isfinite(p.hi)) out.push_back(p.hi);
    }
    return out;
}

struct Plan {
    std::vector<double> event_times;
    std::vector<std::size_t> slot;  // event -> index into event_times
    double last_event = 0.0;
};

Plan make_plan(const std::vector<EventSpec>& events) {
    if (events.empty()) throw ConfigError("penalization: no events given");
    Plan p;
    for (const auto& e : events) p.event_times.push_back(e.time());
    std::sort(p.event_times.begin(), p.event_times.end());
    p.event_times.erase(std::unique(p.event_times.begin(), p.event_times.end()), p.event_times.end());
    for (const auto& e : events)
        p.slot.push_back(static_cast<std::size_t>(
            std::lower_bound(p.event_times.begin(), p.event_times.end(), e.time()) - p.event_times.begin()));
    p.last_event = p.event_times.back();
    return p;
}

// F_t / M_t for the atom family along a path of the mixture of taboo laws; the
// common exponential factor is taken out before summing.
double atoms_weight(const AtomMeasure& nu, const PathState& st) {
    const double xp = std::max(st.x, 0.0);
    const double xm = std::max(-st.x, 0.0);
    double top = -kInf;
    for (const auto& at : nu.atoms())
        if (st.s <= at.a && st.i <= at.b) top = std::max(top, 0.5 * (1.0 / at.a + 1.0 / at.b) * st.l);
    if (!std::isfinite(top)) return 0.0;
    double num = 0.0;
    double den = 0.0;
    for (const auto& at : nu.atoms()) {
        if (!(st.s <= at.a && st.i <= at.b)) continue;
        const double e = at.w * std::exp(0.5 * (1.0 / at.a + 1.0 / at.b) * st.l - top);
        num += e;
        den += e * (1.0 - xp / at.a) * (1.0 - xm / at.b);
    }
    return den > 0.0 ? num / den : 0.0;
}

// E[dG(D_t) | state at s], h = t - s, from the exact law of further passages.
double downcross_conditional(const GSequence& g, Levels levels, const PathState& st, double h) {
    double acc = 0.0;
    double p_at_least = 1.0;
    for (int m = 0;; ++m) {
        const double p_next = downcross_at_least(st.x, st.leg, levels, h, m + 1);
        const double w = g.dG(st.d + m);
        acc += w * (p_at_least - p_next);
        // dG is nonincreasing, so w * p_next bounds what remains.
        if (p_next == 0.0 || w * p_next < 1e-15 * acc || m > 10000000) break;
        p_at_least = p_next;
    }
    return acc;
}

// One sample: snapshots at the event times and the (possibly reweighted) F at each t.
void penalization_sample(const WeightSpec& spec, const Plan& plan, const PenalizationConfig& cfg, RngStream& rng,
                         std::vector<PathState>& snaps, std::vector<double>& F) {
    snaps.clear();
    F.clear();
    if (const auto* af = std::get_if<AtomFamily>(&spec)) {
        QConfig qc;
        qc.dt = cfg.dt;
        qc.observe = plan.event_times;
        qc.observe.insert(qc.observe.end(), cfg.times.begin(), cfg.times.end());
        std::sort(qc.observe.begin(), qc.observe.end());
        const QSample q = sample_q_atoms_direct(af->nu, qc, rng);
        auto at = [&](double t) -> const PathState& {
            const auto it = std::lower_bound(qc.observe.begin(), qc.observe.end(), t - kTimeTol);
            return q.snapshots[static_cast<std::size_t>(it - qc.observe.begin())];
        };
        for (double t : plan.event_times) snaps.push_back(at(t));
        for (double t : cfg.times) F.push_back(atoms_weight(af->nu, at(t)));
        return;
    }

    BrownianWalker walker(walker_config_for(spec, cfg.dt), cfg.x0);
    for (double t : plan.event_times) {
        walker.run_until(t, rng);
        snaps.push_back(walker.state());
    }
    const PathState at_s = walker.state();
    std::visit(
        overloaded{
            [&](const PhiFamily& f) {
                double cur = at_s.t;
                for (double t : cfg.times) {
                    walker.jump(t - cur, rng);
                    cur = t;
                    F.push_back(f.phi.pdf(walker.state().s));
                }
            },
            [&](const KennedyFamily& f) {
                // Drift -lambda after s; the likelihood ratio leaves psi(S_t) e^{lambda (S_t - X_s)}
                // up to a factor that depends on t only.
                const double lam = f.psi.lambda();
                double x = at_s.x;
                double s = at_s.s;
                double cur = at_s.t;
                for (double t : cfg.times) {
                    const double h = t - cur;
                    if (h > 0.0) {
                        const double x2 = x - lam * h + std::sqrt(h) * rng.normal();
                        s = update_running_max(s, x, x2, h, rng);
                        x = x2;
                    }
                    cur = t;
                    F.push_back(f.psi.psi(s) * std::exp(lam * (s - at_s.x)));
                }
            },
            [&](const SignedLocalFamily& f) {
                double cur = at_s.t;
                for (double t : cfg.times) {
                    walker.jump(t - cur, rng);
                    cur = t;
                    const PathState& st = walker.state();
                    F.push_back(st.x > 0.0 ? f.w.h_plus(st.l) : st.x < 0.0 ? f.w.h_minus(st.l) : 0.0);
                }
            },
            [&](const AtomFamily&) {},
            [&](const DownCrossFamily& f) {
                for (double t : cfg.times) F.push_back(downcross_conditional(f.g, f.levels, at_s, t - at_s.t));
            },
        },
        spec);
}

}  // namespace

WalkerConfig walker_config_for(const WeightSpec& spec, double dt) {
    WalkerConfig wc;
    wc.dt = dt;
    wc.local_time = std::holds_alternative<SignedLocalFamily>(spec) || std::holds_alternative<AtomFamily>(spec);
    if (const auto* dc = std::get_if<DownCrossFamily>(&spec)) wc.ladder = dc->levels;
    return wc;
}

std::string functional_name(Functional f) {
    switch (f) {
        case Functional::x: return "X";
        case Functional::s: return "S";
        case Functional::i: return "I";
        case Functional::l: return "L";
        case Functional::d: return "D";
    }
    return "?";
}

EventSpec::EventSpec(double time, std::vector<Constraint> constraints, std::string label)
    : time_(time), constraints_(std::move(constraints)), label_(std::move(label)) {
    if (!(time >= 0.0)) throw ConfigError("event time must be nonnegative");
    if (constraints_.empty()) throw ConfigError("event needs at least one constraint");
    for (const auto& c : constraints_)
        if (!(c.lo < c.hi)) throw ConfigError("event constraint on " + functional_name(c.f) + ": need lo < hi");
    if (label_.empty()) {
        for (const auto& c : constraints_) {
            if (!label_.empty()) label_ += ",";
            label_ += functional_name(c.f) + "_" + std::to_string(time) + " in (" + std::to_string(c.lo) + "," +
                      std::to_string(c.hi) + "]";
        }
    }
}

EventSpec EventSpec::everything(double time) { return EventSpec(time, {{Functional::x, -kInf, kInf}}, "all"); }

bool EventSpec::contains(const PathState& st) const {
    for (const auto& c : constraints_) {
        const double v = value_of(c.f, st);
        if (!(v > c.lo && v <= c.hi)) return false;
    }
    return true;
}

std::vector<EventSpec> event_battery(const WeightSpec& spec) {
    std::vector<EventSpec> out;
    out.emplace_back(0.5, std::vector<Constraint>{{Functional::s, -kInf, 0.8}}, "S_0.5<=0.8");
    out.emplace_back(0.5, std::vector<Constraint>{{Functional::x, 0.0, kInf}}, "X_0.5>0");
    if (std::holds_alternative<SignedLocalFamily>(spec))
        out.emplace_back(0.5, std::vector<Constraint>{{Functional::l, -kInf, 0.3}}, "L_0.5<=0.3");
    if (std::holds_alternative<DownCrossFamily>(spec))
        out.emplace_back(1.0, std::vector<Constraint>{{Functional::d, -kInf, 0.0}}, "D_1=0");
    return out;
}

double penalty_functional(const WeightSpec& spec, const PathState& st) {
    return std::visit(
        overloaded{
            [&](const PhiFamily& f) { return f.phi.pdf(st.s); },
            [&](const KennedyFamily& f) { return f.psi.psi(st.s) * std::exp(f.psi.lambda() * (st.s - st.x)); },
            [&](const SignedLocalFamily& f) {
                return st.x > 0.0 ? f.w.h_plus(st.l) : st.x < 0.0 ? f.w.h_minus(st.l) : 0.0;
            },
            [&](const AtomFamily& f) { return eval_A_nu(f.nu, std::max(st.s, 0.0), st.i, st.l); },
            [&](const DownCrossFamily& f) { return f.g.dG(st.d); },
        },
        spec);
}

std::vector<std::vector<McEstimate>> penalization_ratios(const WeightSpec& spec, const std::vector<EventSpec>& events,
                                                         const PenalizationConfig& cfg, const RunContext& ctx) {
    const Plan plan = make_plan(events);
    if (cfg.times.empty()) throw ConfigError("penalization: no times given");
    for (std::size_t k = 0; k < cfg.times.size(); ++k) {
        if (cfg.times[k] < plan.last_event - kTimeTol) throw ConfigError("penalization: t must not precede the event time");
        if (k > 0 && !(cfg.times[k] > cfg.times[k - 1])) throw ConfigError("penalization: times must increase");
    }
    if (cfg.n == 0) throw ConfigError("penalization: n must be positive");
    if (std::holds_alternative<AtomFamily>(spec) && cfg.x0 != 0.0)
        throw ConfigError("penalization: the atom family starts at 0");
    const std::size_t nt = cfg.times.size();
    const std::size_t ne = events.size();

    using Acc = AccArray<RatioAccumulator>;
    const Acc acc = parallel_accumulate<Acc>(
        ctx, stream_tag("penalization/" + family_kind(spec)), cfg.n,
        [&](RngStream& rng, std::size_t begin, std::size_t end, Acc& out) {
            out.resize(ne * nt);
            std::vector<PathState> snaps;
            std::vector<double> F;
            for (std::size_t j = begin; j < end; ++j) {
                penalization_sample(spec, plan, cfg, rng, snaps, F);
                for (std::size_t e = 0; e < ne; ++e) {
                    const bool in = events[e].contains(snaps[plan.slot[e]]);
                    for (std::size_t k = 0; k < nt; ++k) out[e * nt + k].add(in ? F[k] : 0.0, F[k]);
                }
            }
        });
    std::vector<std::vector<McEstimate>> out(ne, std::vector<McEstimate>(nt));
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t k = 0; k < nt; ++k) out[e][k] = acc[e * nt + k].estimate();
    return out;
}

McEstimate penalization_ratio(const WeightSpec& spec, const EventSpec& gamma, double t, const PenalizationConfig& cfg,
                              const RunContext& ctx) {
    PenalizationConfig one = cfg;
    one.times = {t};
    return penalization_ratios(spec, {gamma}, one, ctx)[0][0];
}

std::vector<McEstimate> limit_sides(const WeightSpec& spec, const std::vector<EventSpec>& events, double dt, double x0,
                                    std::size_t n, const RunContext& ctx) {
    const Plan plan = make_plan(events);
    if (n == 0) throw ConfigError("limit side: n must be positive");
    const double m0 = martingale_initial(spec, x0);
    if (!(m0 > 0.0)) throw ConfigError("limit side: M_0 must be positive");
    const std::size_t ne = events.size();
    using Acc = AccArray<MeanAccumulator>;
    const Acc acc = parallel_accumulate<Acc>(
        ctx, stream_tag("limit/" + family_kind(spec)), n, [&](RngStream& rng, std::size_t begin, std::size_t end, Acc& out) {
            out.resize(ne);
            std::vector<double> m(plan.event_times.size());
            std::vector<PathState> snaps(plan.event_times.size());
            for (std::size_t j = begin; j < end; ++j) {
                BrownianWalker walker(walker_config_for(spec, dt), x0);
                for (std::size_t k = 0; k < plan.event_times.size(); ++k) {
                    walker.run_until(plan.event_times[k], rng);
                    snaps[k] = walker.state();
                    m[k] = martingale_value(spec, snaps[k]) / m0;
                }
                for (std::size_t e = 0; e < ne; ++e)
                    out[e].add(events[e].contains(snaps[plan.slot[e]]) ? m[plan.slot[e]] : 0.0);
            }
        });
    std::vector<McEstimate> out(ne);
    for (std::size_t e = 0; e < ne; ++e) out[e] = acc[e].estimate();
    return out;
}

McEstimate limit_side(const WeightSpec& spec, const EventSpec& gamma, double dt, double x0, std::size_t n,
                      const RunContext& ctx) {
    return limit_sides(spec, {gamma}, dt, x0, n, ctx)[0];
}

// ---- lemmas ----------------------------------------------------------------------

LemmaReport maximum_asymptote_check(const PiecewiseExpPoly& phi0, double a, double x, double u) {
    if (!(a >= x)) throw ConfigError("maximum_asymptote: need a >= x");
    if (!(u > 0.0)) throw ConfigError("maximum_asymptote: u must be positive");
    const double tail = phi0.integral(a, kInf);
    if (!std::isfinite(tail)) throw AdmissibilityError("int_a^inf phi0 < inf", "tail integral diverges");
    const double su = std::sqrt(u);
    const double hi = std::min(std::max(a, x + 10.0 * su), std::max(a, phi0.effective_hi()));
    const auto cuts = breakpoints(phi0);
    const double body = integrate([&](double y) { return phi0(y) * std::exp(-(y - x) * (y - x) / (2.0 * u)); }, a, hi, cuts);
    const double scale = std::sqrt(2.0 / (std::numbers::pi * u));

    LemmaReport r;
    r.name = "maximum_asymptote";
    r.t = u;
    r.lhs = phi0(a) * std::erf((a - x) / std::sqrt(2.0 * u)) + scale * body;
    r.rhs = scale * ((a - x) * phi0(a) + tail);
    r.bounds.push_back({"asymptote", u, r.lhs, r.rhs, true});
    if (u >= 1.0) {
        const double hi1 = std::min(std::max(a, x + 10.0), std::max(a, phi0.effective_hi()));
        const double low = integrate([&](double y) { return phi0(y) * std::exp(-0.5 * (y - x) * (y - x)); }, a, hi1, cuts);
        r.bounds.push_back({"tail", u, r.lhs, scale * low, false});
    }
    return r;
}

LemmaReport kennedy_asymptote_check(const KennedyPsi& psi, double s, double x, double t) {
    if (!(s >= x) || !(s >= 0.0)) throw ConfigError("kennedy_asymptote: need s >= x and s >= 0");
    if (!(t > 0.0)) throw ConfigError("kennedy_asymptote: t must be positive");
    const double lam = psi.lambda();
    const double c = s - x;
    const double rho = psi.psi(s) * std::sinh(lam * c) + lam * std::exp(lam * x) * psi.tail_integral(s);
    if (rho == 0.0 || !std::isfinite(rho)) throw AdmissibilityError("rho_lambda(s, x) != 0", "hypothesis violated");
    const double st = std::sqrt(t);
    const double lt = lam * t;

    // {S_t < s - x}: reflection gives E[e^{-lambda X_t}; S_t < c] in closed form.
    const double d1 = psi.psi(s) * std::exp(lam * c) *
                      (norm_cdf((c + lt) / st) - std::exp(-2.0 * lam * c) * (1.0 - norm_cdf((c - lt) / st)));

    // {S_t > s - x}: the 2 lambda Phi-bar part is integrated exactly away from b ~ lambda t.
    const double lo = std::max(c, lt - 10.0 * st);
    const double hi = std::max(lo, lt + 10.0 * st);
    std::vector<double> cuts;
    for (double bp : breakpoints(psi.psi_function())) cuts.push_back(bp - x);
    cuts.push_back(lt);
    const double window = integrate(
        [&](double b) {
            const double z = (b - lt) / st;
            return psi.psi(x + b) * std::exp(-lam * b) *
                   (2.0 / std::sqrt(2.0 * std::numbers::pi * t) * std::exp(-0.5 * z * z) - 2.0 * lam * norm_cdf(z));
        },
        lo, hi, cuts);
    const double d2 = 2.0 * lam * std::exp(lam * x) * (psi.tail_integral(x + c) - psi.tail_integral(x + hi)) + window;

    LemmaReport r;
    r.name = "kennedy_asymptote";
    r.t = t;
    r.lhs = d1 + d2;
    r.rhs = 2.0 * rho;
    r.bounds.push_back({"asymptote", t, r.lhs, 2.0 * rho * (1.0 + 1.0 / (lam * std::sqrt(2.0 * std::numbers::pi * t))), true});
    if (t >= 1.0)
        r.bounds.push_back({"tail", t, r.lhs, 2.0 * lam * norm_cdf(x - s) * std::exp(lam * x) * psi.tail_integral(s), false});
    return r;
}

LemmaReport local_time_asymptote_check(const PiecewiseExpPoly& f, double a, double x, double t, std::size_t n,
                              const RunContext& ctx) {
    if (!(a >= 0.0)) throw ConfigError("local_time_asymptote: need a >= 0");
    if (!(t > 0.0) || n == 0) throw ConfigError("local_time_asymptote: need t > 0 and n > 0");
    const double total = f.integral(0.0, kInf);
    if (!std::isfinite(total)) throw AdmissibilityError("int_0^inf f < inf", "integral diverges");
    const double survival = x > 0.0 ? f(a) * std::erf(x / std::sqrt(2.0 * t)) : 0.0;

    // After T_0 = x^2 / Z^2 the value is f(a + L_r) 1{X > 0} with r = t - T_0, which has
    // mean 1/2 E[f(a + sqrt(r)|N|)]; |N| is drawn from stratified uniforms.
    const MeanAccumulator acc = parallel_accumulate<MeanAccumulator>(
        ctx, stream_tag("lemma/local_time_asymptote"), n, [&](RngStream& rng, std::size_t begin, std::size_t end, MeanAccumulator& out) {
            for (std::size_t k = begin; k < end; ++k) {
                double t0 = 0.0;
                if (x != 0.0) {
                    const double z = rng.normal();
                    t0 = x * x / (z * z);
                }
                const double u = (static_cast<double>(k) + rng.uniform()) / static_cast<double>(n);
                if (t0 > t) {
                    out.add(0.0);
                    continue;
                }
                const double absn = std::numbers::sqrt2 * boost::math::erf_inv(u);
                out.add(0.5 * f(a + std::sqrt(t - t0) * absn));
            }
        });
    const McEstimate mc = acc.estimate();
    LemmaReport r;
    r.name = "local_time_asymptote";
    r.t = t;
    r.lhs = survival + mc.mean;
    r.lhs_se = mc.std_error;
    r.rhs = f(a) * std::sqrt(2.0 / (std::numbers::pi * t)) * std::max(x, 0.0) +
            f.integral(a, kInf) / std::sqrt(2.0 * std::numbers::pi * t);
    return r;
}

double TabooConstantReport::sup_estimate() const {
    double m = 0.0;
    for (const auto& e : estimates) m = std::max(m, e.mean);
    return std::max(m, direct.mean);
}

TabooConstantReport taboo_constant_check(double a, double b, const TabooConstantConfig& cfg, const RunContext& ctx) {
    const TabooParams p(a, b);
    if (cfg.times.empty() || cfg.n == 0) throw ConfigError("taboo_constant: need times and n > 0");
    std::vector<std::size_t> steps;
    for (double t : cfg.times) {
        const double k = std::round(t / cfg.dt);
        if (!(k >= 1.0) || std::abs(k * cfg.dt - t) > 1e-9 * std::max(1.0, t))
            throw ConfigError("taboo_constant: times must be positive grid points");
        if (!steps.empty() && static_cast<std::size_t>(k) <= steps.back()) throw ConfigError("taboo_constant: times must increase");
        steps.push_back(static_cast<std::size_t>(k));
    }
    const double delta = cfg.layer * std::sqrt(cfg.dt);
    const std::size_t nt = steps.size();

    using Acc = AccArray<MeanAccumulator>;
    const Acc acc = parallel_accumulate<Acc>(
        ctx, stream_tag("lemma/taboo_constant/taboo"), cfg.n, [&](RngStream& rng, std::size_t begin, std::size_t end, Acc& out) {
            out.resize(nt);
            for (std::size_t j = begin; j < end; ++j) {
                double y = 0.0;
                std::size_t k = 0;
                for (std::size_t m = 0; m < nt; ++m) {
                    for (; k < steps[m]; ++k) y = taboo_step(p, y, cfg.dt, delta, rng);
                    out[m].add(a * b / ((a - std::max(y, 0.0)) * (b - std::max(-y, 0.0))));
                }
            }
        });

    TabooConstantReport r;
    r.a = a;
    r.b = b;
    r.times = cfg.times;
    for (std::size_t m = 0; m < nt; ++m) r.estimates.push_back(acc[m].estimate());

    // e^{cL} 1{t < T_-b ^ T_a} under P with the exact local time.
    const double c = 0.5 * (1.0 / a + 1.0 / b);
    const double t1 = cfg.times.front();
    WalkerConfig wc;
    wc.dt = cfg.dt;
    wc.local_time = true;
    const MeanAccumulator direct = parallel_accumulate<MeanAccumulator>(
        ctx, stream_tag("lemma/taboo_constant/direct"), cfg.n_direct,
        [&](RngStream& rng, std::size_t begin, std::size_t end, MeanAccumulator& out) {
            for (std::size_t j = begin; j < end; ++j) {
                BrownianWalker w(wc, 0.0);
                bool alive = true;
                while (alive && w.state().t < t1 - 1e-9 * cfg.dt) {
                    w.step(rng);
                    alive = w.state().s < a && w.state().i < b;
                }
                out.add(alive ? std::exp(c * w.state().l) : 0.0);
            }
        });
    r.direct = direct.estimate();
    return r;
}

double downcross_at_least(double x, Leg leg, Levels levels, double t, int n) {
    if (n <= 0) return 1.0;
    const double span = levels.b - levels.a;
    const double dist = leg == Leg::up ? std::max(levels.b - x, 0.0) + (2.0 * n - 1.0) * span
                                       : std::max(x - levels.a, 0.0) + (2.0 * n - 2.0) * span;
    if (!(t > 0.0)) return dist == 0.0 ? 1.0 : 0.0;
    return std::erfc(dist / std::sqrt(2.0 * t));
}

double sequence_sum(const GSequence& g) {
    if (g.kind() == GSequence::Kind::geometric) return 1.0 / (1.0 - g.parameter());
    if (!(g.parameter() > 1.0)) throw AdmissibilityError("sum H(n) < inf", "power sequence with exponent <= 1 diverges");
    return boost::math::zeta(g.parameter());
}

LemmaReport downcross_rate_check(const std::function<double(int)>& H, double sum_H, double x, Levels levels, double t) {
    if (!std::isfinite(sum_H) || !(sum_H > 0.0)) throw AdmissibilityError("sum H(n) < inf", "sum must be finite and positive");
    if (!(t > 0.0)) throw ConfigError("downcross_rate: t must be positive");
    const double span = levels.b - levels.a;
    const double gap = std::abs(levels.b - x);
    const double scale = std::sqrt(2.0 * t);
    // P(D_t = n) = erf(z_{n+1}) - erf(z_n) with z_0 = 0 and z_n the passage distance over sqrt(2t).
    auto z = [&](int n) { return n == 0 ? 0.0 : (gap + (2.0 * n - 1.0) * span) / scale; };
    double acc = 0.0;
    double e_prev = 0.0;
    for (int n = 0; n < 100000000; ++n) {
        const double e_next = std::erf(z(n + 1));
        acc += H(n) * (e_next - e_prev);
        if (e_next == 1.0) break;
        e_prev = e_next;
    }
    LemmaReport r;
    r.name = "downcross_rate";
    r.t = t;
    r.lhs = std::sqrt(t) * acc;
    r.rhs = 2.0 * span * std::sqrt(2.0 / std::numbers::pi) * ((sum_H - H(0)) + H(0) * (0.5 + gap / (2.0 * span)));
    return r;
}

}  // namespace penal
