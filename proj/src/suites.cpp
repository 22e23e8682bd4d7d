#include "penal/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "penal/martingale.hpp"
#include "penal/qsamplers.hpp"
#include "penal/stats.hpp"
#include "penal/verification.hpp"

namespace penal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<SuiteInfo> kCatalog = {
    {"martingale",
     "E[M_t] = M_0 for the five families at t = 0.25, 1, 4 on P-paths with bridge-sampled extremes.",
     {{"n", 200000, "paths per family"}}},
    {"penalization",
     "Ratio E[1_Gamma F_t] / E[F_t] against the limit E[1_Gamma M_s] / M_0 at t = 4, 16, 64 on the event battery.",
     {{"n", 100000, "paths per family for the ratio"},
      {"n_atoms", 10000, "paths for the atom family (taboo importance sampling)"},
      {"n_limit", 100000, "paths for the limit side"},
      {"late_time", 10000, "extra ratio time for the down-crossing family"}}},
    {"qlaws",
     "Q-process laws: terminal laws and the uniform minimum from route A (direct construction), agreement of "
     "routes A, B (SDE with drift d/dx log M) and C (P-paths weighted by M_s / M_0) on the event battery, "
     "the return probability of the down-crossing family and the taboo invariant density.",
     {{"n_terminal", 10000, "samples per terminal-law test"},
      {"n_routes", 20000, "samples per route and family"},
      {"atom_horizon", 20, "grid horizon used to read off the atom from (S, I)"},
      {"n_gbar", 10000, "down-crossing samples for P(gbar < inf)"},
      {"gbar_horizon", 16, "grid horizon of those samples"},
      {"n_bessel", 10000, "Bessel(3) paths for the hit probability from 2c to c"},
      {"bessel_horizon", 16, "grid horizon of the Bessel(3) paths"},
      {"taboo_replicates", 64, "independent taboo paths for the occupation histogram"},
      {"taboo_horizon", 1000, "horizon of each taboo path"},
      {"taboo_bins", 20, "histogram bins on (-1, 1)"}}},
    {"lemmas",
     "Asymptotic lemmas: the 3/2 constant through taboo importance sampling, the down-crossing rate by exact "
     "passage sums, the maximum and Kennedy estimates by quadrature with their bounds, the local-time estimate by MC.",
     {{"taboo_n", 100000, "taboo paths at a = b = 1"},
      {"taboo_n_ab", 20000, "taboo paths at a = 1, b = 2"},
      {"taboo_t", 50, "time of the constant check"},
      {"taboo_n_direct", 100000, "P-paths for the direct check at t = 1"},
      {"local_time_n", 1000000, "samples per local-time point"},
      {"horizon", 10000, "u and t of the quadrature and local-time ratio checks"},
      {"downcross_t", 1000000, "t of the down-crossing rate check"}}},
    {"paths",
     "Path engine laws at t = 1: running maximum, exact local time, the band estimator, Bessel(3) from 0, "
     "passage times and down-crossing counts.",
     {{"n", 10000, "samples per check"}}},
};

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
};

double param(const SuiteOptions& opt, const std::string& suite, const std::string& key) {
    const auto it = opt.params.find(suite + "." + key);
    if (it != opt.params.end()) return it->second;
    for (const auto& p : find_suite(suite).params)
        if (p.key == key) return p.value;
    throw ConfigError("unknown parameter " + suite + "." + key);
}

std::size_t count(const SuiteOptions& opt, const std::string& suite, const std::string& key) {
    const double v = param(opt, suite, key);
    if (!(v >= 1.0)) throw ConfigError("parameter " + suite + "." + key + " must be at least 1");
    return static_cast<std::size_t>(std::llround(v));
}

std::vector<NamedFamily> families(const SuiteOptions& opt) {
    return opt.families.empty() ? default_families() : opt.families;
}

// Rows of one experiment; wall time is stamped on finish.
class Sink {
  public:
    Sink(const SuiteOptions& opt, std::vector<ResultRow>& rows, std::string experiment, int criterion)
        : opt_(opt), rows_(rows), experiment_(std::move(experiment)), criterion_(criterion), first_(rows.size()) {}

    ResultRow& add(std::string name, double t, double estimate, double se, double target, double margin,
                   bool mandatory = true) {
        ResultRow r;
        r.experiment = experiment_;
        r.name = std::move(name);
        r.t = t;
        r.estimate = estimate;
        r.se = se;
        r.target = target;
        r.margin = margin;
        r.pass = margin >= 0.0;
        r.seed = opt_.ctx.seed.value;
        r.criterion = criterion_;
        r.mandatory = mandatory;
        rows_.push_back(std::move(r));
        return rows_.back();
    }
    // |estimate - target| <= tol
    ResultRow& within(std::string name, double t, double estimate, double se, double target, double tol,
                      bool mandatory = true) {
        return add(std::move(name), t, estimate, se, target, tol - std::abs(estimate - target), mandatory);
    }
    // |estimate - target| <= k se
    ResultRow& within_se(std::string name, double t, double estimate, double se, double target, double k = 3.0,
                         bool mandatory = true) {
        return add(std::move(name), t, estimate, se, target, k * se - std::abs(estimate - target), mandatory);
    }
    // p-value above level
    ResultRow& test(std::string name, double t, const TestReport& rep, double level, bool mandatory = true) {
        ResultRow& r = add(std::move(name), t, rep.statistic, kNaN, level, rep.p_value - level, mandatory);
        r.test = true;
        return r;
    }
    void finish(const Stopwatch& sw) {
        const double ms = opt_.timing ? sw.ms() : 0.0;
        for (std::size_t k = first_; k < rows_.size(); ++k) rows_[k].wall_ms = ms;
    }

  private:
    const SuiteOptions& opt_;
    std::vector<ResultRow>& rows_;
    std::string experiment_;
    int criterion_;
    std::size_t first_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// ---- martingale ------------------------------------------------------------------

void martingale_suite(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    const std::size_t n = count(opt, "martingale", "n");
    const std::vector<double> times{0.25, 1.0, 4.0};
    for (const auto& [label, spec] : families(opt)) {
        Stopwatch sw;
        Sink sink(opt, rows, "martingale_" + label, 1);
        const double m0 = martingale_initial(spec, 0.0);
        const WalkerConfig wc = walker_config_for(spec, opt.dt);
        using Acc = AccArray<MeanAccumulator>;
        const Acc acc = parallel_accumulate<Acc>(
            opt.ctx, stream_tag("martingale/" + label), n, [&](RngStream& rng, std::size_t b, std::size_t e, Acc& out) {
                out.resize(times.size());
                for (std::size_t j = b; j < e; ++j) {
                    BrownianWalker w(wc, 0.0);
                    for (std::size_t k = 0; k < times.size(); ++k) {
                        w.run_until(times[k], rng);
                        out[k].add(martingale_value(spec, w.state()));
                    }
                }
            });
        for (std::size_t k = 0; k < times.size(); ++k) {
            const McEstimate m = acc[k].estimate();
            sink.within_se(label + " E[M_t]", times[k], m.mean, m.std_error, m0);
        }
        sink.finish(sw);
    }
}

// ---- penalization ----------------------------------------------------------------

void penalization_suite(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    const std::size_t n = count(opt, "penalization", "n");
    const std::size_t n_atoms = count(opt, "penalization", "n_atoms");
    const std::size_t n_limit = count(opt, "penalization", "n_limit");
    const double late = param(opt, "penalization", "late_time");
    const std::vector<double> base_times{4.0, 16.0, 64.0};

    for (const auto& [label, spec] : families(opt)) {
        Stopwatch sw;
        Sink sink(opt, rows, "penalization_" + label, 10);
        std::vector<EventSpec> events = event_battery(spec);
        events.push_back(EventSpec::everything(0.5));
        PenalizationConfig pc;
        pc.dt = opt.dt;
        pc.times = base_times;
        const bool downcross = std::holds_alternative<DownCrossFamily>(spec);
        if (downcross && late > base_times.back()) pc.times.push_back(late);
        pc.n = std::holds_alternative<AtomFamily>(spec) ? n_atoms : n;
        const auto ratios = penalization_ratios(spec, events, pc, opt.ctx);
        const auto limits = limit_sides(spec, events, opt.dt, 0.0, n_limit, opt.ctx);

        for (std::size_t e = 0; e < events.size(); ++e) {
            const std::string ev = events[e].label();
            if (e + 1 == events.size()) {
                for (std::size_t k = 0; k < pc.times.size(); ++k)
                    sink.within(label + " ratio[" + ev + "]", pc.times[k], ratios[e][k].mean, ratios[e][k].std_error, 1.0,
                                1e-12);
                sink.within_se(label + " limit[" + ev + "]", events[e].time(), limits[e].mean, limits[e].std_error, 1.0);
                continue;
            }
            sink.add(label + " limit[" + ev + "]", events[e].time(), limits[e].mean, limits[e].std_error, kNaN, 0.0,
                     false);
            std::vector<double> dev(pc.times.size());
            std::vector<double> cse(pc.times.size());
            for (std::size_t k = 0; k < pc.times.size(); ++k) {
                dev[k] = std::abs(ratios[e][k].mean - limits[e].mean);
                cse[k] = combined_se(ratios[e][k], limits[e]);
                const bool last = k + 1 == pc.times.size();
                sink.add(label + " ratio[" + ev + "]", pc.times[k], ratios[e][k].mean, ratios[e][k].std_error,
                         limits[e].mean, std::max(0.02, 3.0 * cse[k]) - dev[k], last);
            }
            // Decay over the base times, within 3 combined SE of the later point.
            double margin = kInf;
            for (std::size_t k = 0; k + 1 < base_times.size(); ++k)
                margin = std::min(margin, dev[k] + 3.0 * cse[k + 1] - dev[k + 1]);
            sink.add(label + " decay[" + ev + "]", base_times.back(), dev[base_times.size() - 1],
                     cse[base_times.size() - 1], 0.0, margin);
        }
        sink.finish(sw);
    }
}

// ---- qlaws -----------------------------------------------------------------------

template <class F>
std::vector<double> collect(const SuiteOptions& opt, const std::string& tag, std::size_t n, F&& draw) {
    using Acc = Collected<double>;
    return parallel_accumulate<Acc>(opt.ctx, stream_tag(tag), n,
                                    [&](RngStream& rng, std::size_t b, std::size_t e, Acc& out) {
                                        for (std::size_t j = b; j < e; ++j) out.items.push_back(draw(rng));
                                    })
        .items;
}

void terminal_laws(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    const std::size_t n = count(opt, "qlaws", "n_terminal");
    QConfig qc;
    qc.dt = opt.dt;

    {
        Stopwatch sw;
        Sink sink(opt, rows, "qlaws_terminal_phi", 5);
        const DensityPhi phi = DensityPhi::exponential(1.0);
        const auto s = collect(opt, "qlaws/terminal/phi", n,
                               [&](RngStream& rng) { return *sample_q_phi_direct(phi, 0.0, qc, rng).terminals.s_inf; });
        auto exp_cdf = [](double y) { return y <= 0.0 ? 0.0 : -std::expm1(-y); };
        sink.within("S_inf KS distance to Exp(1)", kInf, ks_distance(s, exp_cdf), kNaN, 0.0, 0.03);
        sink.test("S_inf KS p-value", kInf, ks_test(s, exp_cdf), 0.01, false);
        sink.finish(sw);

        Stopwatch sw6;
        Sink uni(opt, rows, "qlaws_uniform_minimum", 6);
        std::vector<double> u(s.size());
        const double tail0 = phi.tail(0.0);
        for (std::size_t k = 0; k < s.size(); ++k) u[k] = phi.tail(s[k]) / tail0;
        auto uni_cdf = [](double v) { return std::clamp(v, 0.0, 1.0); };
        uni.within("(1 - Phi(S_inf)) / (1 - Phi(0)) KS distance to U[0,1]", kInf, ks_distance(u, uni_cdf), kNaN, 0.0, 0.03);
        uni.test("uniform KS p-value", kInf, ks_test(u, uni_cdf), 0.01, false);
        uni.finish(sw6);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "qlaws_terminal_signed", 5);
        const SignWeights w = SignWeights::build(parse_function("exp 1 1"), parse_function("exp 1 1"));
        std::vector<double> l;
        double positive = 0.0;
        const auto draws = collect(opt, "qlaws/terminal/signed", n, [&](RngStream& rng) {
            const QSample q = sample_q_signed_direct(w, qc, rng);
            // sign folded into the value: positive branch keeps l, negative stores -l
            return *q.terminals.sign_inf > 0 ? *q.terminals.l_inf : -*q.terminals.l_inf;
        });
        for (double v : draws) {
            l.push_back(std::abs(v));
            if (v > 0.0) positive += 1.0;
        }
        auto exp_cdf = [](double y) { return y <= 0.0 ? 0.0 : -std::expm1(-y); };
        sink.within("L_inf KS distance to Exp(1)", kInf, ks_distance(l, exp_cdf), kNaN, 0.0, 0.03);
        const double f = positive / static_cast<double>(n);
        sink.within("positive final branch frequency", kInf, f, std::sqrt(f * (1.0 - f) / static_cast<double>(n)), 0.5, 0.02);
        sink.finish(sw);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "qlaws_terminal_downcross", 5);
        const GSequence g = GSequence::geometric(0.5);
        const Levels lv(0.0, 1.0);
        const auto d = collect(opt, "qlaws/terminal/downcross", n, [&](RngStream& rng) {
            return static_cast<double>(*sample_q_downcross_direct(g, lv, 0.0, qc, rng).terminals.d_inf);
        });
        constexpr int cells = 12;
        std::vector<double> counts(cells, 0.0);
        std::vector<double> pmf(cells);
        for (int k = 0; k < cells; ++k) pmf[k] = std::pow(0.5, k + 1);
        pmf[cells - 1] = std::pow(0.5, cells - 1);  // tail from cells - 1 on
        for (double v : d) counts[std::min(static_cast<int>(v), cells - 1)] += 1.0;
        sink.test("D_inf chi-square against 2^-(n+1)", kInf, chi2_test(counts, pmf), 0.01);
        sink.finish(sw);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "qlaws_terminal_atoms", 5);
        const AtomMeasure nu = AtomMeasure::build({{1.0, 1.0, 0.3}, {2.0, 0.5, 0.7}});
        QConfig pc = qc;
        pc.observe = {param(opt, "qlaws", "atom_horizon")};
        const auto& atoms = nu.atoms();
        const auto pick = collect(opt, "qlaws/terminal/atoms", n, [&](RngStream& rng) {
            const QSample q = sample_q_atoms_direct(nu, pc, rng);
            // The atom is read off the path: the nearest (a_j, b_j) to (S_T, I_T) among those not exceeded.
            const PathState& end = q.snapshots.back();
            std::size_t best = 0;
            double dist = kInf;
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                if (end.s > atoms[j].a || end.i > atoms[j].b) continue;
                const double d = (atoms[j].a - end.s) + (atoms[j].b - end.i);
                if (d < dist) {
                    dist = d;
                    best = j;
                }
            }
            return static_cast<double>(best);
        });
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            const double f = static_cast<double>(std::count(pick.begin(), pick.end(), static_cast<double>(j))) /
                             static_cast<double>(n);
            sink.within("frequency of (S,I) -> (" + fmt(atoms[j].a) + "," + fmt(atoms[j].b) + ")", pc.observe[0], f,
                        std::sqrt(f * (1.0 - f) / static_cast<double>(n)), atoms[j].w, 0.02);
        }
        sink.finish(sw);
    }
}

struct RouteAcc {
    AccArray<MeanAccumulator> events;
    Collected<double> local_times;
    std::size_t invalid = 0;
    void merge(const RouteAcc& o) {
        events.merge(o.events);
        local_times.merge(o.local_times);
        invalid += o.invalid;
    }
};

void route_equivalence(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    const std::size_t n = count(opt, "qlaws", "n_routes");
    for (const auto& [label, spec] : families(opt)) {
        Stopwatch sw;
        Sink sink(opt, rows, "qlaws_routes_" + label, 7);
        const std::vector<EventSpec> events = event_battery(spec);
        std::vector<double> times;
        for (const auto& e : events) times.push_back(e.time());
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        auto slot = [&](const EventSpec& e) {
            return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), e.time()) - times.begin());
        };
        QConfig qc;
        qc.dt = opt.dt;
        qc.observe = times;
        const bool signed_family = std::holds_alternative<SignedLocalFamily>(spec);
        const std::size_t lt_slot = slot(events.front());

        std::vector<RouteAcc> by_route;
        for (Route route : {Route::direct, Route::sde, Route::weighted}) {
            by_route.push_back(parallel_accumulate<RouteAcc>(
                opt.ctx, stream_tag("qlaws/routes/" + label + "/" + route_name(route)), n,
                [&](RngStream& rng, std::size_t b, std::size_t e, RouteAcc& out) {
                    out.events.resize(events.size());
                    for (std::size_t j = b; j < e; ++j) {
                        const QSample q = sample_q(route, spec, 0.0, qc, rng);
                        if (!q.valid) {
                            ++out.invalid;
                            continue;
                        }
                        for (std::size_t k = 0; k < events.size(); ++k) {
                            const std::size_t s = slot(events[k]);
                            out.events[k].add(events[k].contains(q.snapshots[s]) ? q.weights[s] : 0.0);
                        }
                        if (signed_family && route != Route::weighted) out.local_times.items.push_back(q.snapshots[lt_slot].l);
                    }
                }));
        }
        const char* names[] = {"A", "B", "C"};
        for (std::size_t k = 0; k < events.size(); ++k) {
            const std::string ev = events[k].label();
            McEstimate est[3];
            for (int r = 0; r < 3; ++r) {
                est[r] = by_route[r].events[k].estimate();
                ResultRow& row = sink.add(label + " Q[" + ev + "] route " + names[r], events[k].time(), est[r].mean,
                                          est[r].std_error, kNaN, 0.0, false);
                row.invalid = by_route[r].invalid;
                row.reason = by_route[r].invalid > 0 ? "absorbed" : "";
            }
            for (auto [x, y] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
                ResultRow& row = sink.within_se(label + " Q[" + ev + "] " + names[x] + "-" + names[y], events[k].time(),
                                                est[x].mean - est[y].mean, combined_se(est[x], est[y]), 0.0);
                row.invalid = by_route[x].invalid + by_route[y].invalid;
                row.reason = row.invalid > 0 ? "absorbed" : "";
            }
        }
        if (signed_family) {
            // Route A carries the exact local time, route B the band estimator.
            const double d = ks_two_sample_distance(by_route[0].local_times.items, by_route[1].local_times.items);
            sink.within(label + " band local time KS distance", times[lt_slot], d, kNaN, 0.0, 0.05);
        }
        sink.finish(sw);
    }
}

void return_probability(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    Stopwatch sw;
    Sink sink(opt, rows, "qlaws_downcross_return", 8);
    const std::size_t n = count(opt, "qlaws", "n_gbar");
    QConfig qc;
    qc.dt = opt.dt;
    qc.horizon = param(opt, "qlaws", "gbar_horizon");
    const GSequence g = GSequence::geometric(0.5);
    const Levels lv(0.0, 1.0);
    struct Acc {
        MeanAccumulator raw, hit_prob, within;
        void merge(const Acc& o) {
            raw.merge(o.raw);
            hit_prob.merge(o.hit_prob);
            within.merge(o.within);
        }
    };
    const Acc acc = parallel_accumulate<Acc>(opt.ctx, stream_tag("qlaws/gbar"), n,
                                             [&](RngStream& rng, std::size_t b, std::size_t e, Acc& out) {
                                                 for (std::size_t j = b; j < e; ++j) {
                                                     const Terminals t = sample_q_downcross_direct(g, lv, 0.0, qc, rng).terminals;
                                                     out.raw.add(std::isfinite(*t.gbar) ? 1.0 : 0.0);
                                                     out.hit_prob.add(*t.gbar_hit_prob);
                                                     out.within.add(*t.gbar_within_horizon ? 1.0 : 0.0);
                                                 }
                                             });
    const McEstimate raw = acc.raw.estimate();
    const McEstimate rb = acc.hit_prob.estimate();
    const McEstimate within = acc.within.estimate();
    sink.within("P(gbar < inf)", qc.horizon, raw.mean, raw.std_error, 0.5, 0.02);
    sink.within("P(gbar < inf), conditional on the horizon state", qc.horizon, rb.mean, rb.std_error, 0.5, 0.02);
    sink.add("P(gbar <= horizon)", qc.horizon, within.mean, within.std_error, kNaN, 0.0, false);

    // Bessel(3) from 2c, hitting c on the grid with the bridge correction, then c / R after the horizon.
    const std::size_t nb = count(opt, "qlaws", "n_bessel");
    const double horizon = param(opt, "qlaws", "bessel_horizon");
    const double c = 1.0;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / opt.dt));
    const Acc bes = parallel_accumulate<Acc>(opt.ctx, stream_tag("qlaws/bessel"), nb,
                                             [&](RngStream& rng, std::size_t b, std::size_t e, Acc& out) {
                                                 for (std::size_t j = b; j < e; ++j) {
                                                     double r = 2.0 * c;
                                                     bool hit = false;
                                                     for (std::size_t k = 0; k < steps && !hit; ++k) {
                                                         const double r2 = bessel3_step(r, opt.dt, rng);
                                                         hit = r2 <= c || rng.uniform() < bessel3_bridge_below_prob(c, r, r2, opt.dt);
                                                         r = r2;
                                                     }
                                                     const double p = hit ? 1.0 : c / r;
                                                     out.within.add(hit ? 1.0 : 0.0);
                                                     out.hit_prob.add(p);
                                                     out.raw.add(hit || rng.uniform() < p ? 1.0 : 0.0);
                                                 }
                                             });
    const McEstimate braw = bes.raw.estimate();
    const McEstimate brb = bes.hit_prob.estimate();
    sink.within("Bessel(3) P(hit c from 2c)", horizon, braw.mean, braw.std_error, 0.5, 0.02);
    sink.within("Bessel(3) P(hit c from 2c), conditional on the horizon state", horizon, brb.mean, brb.std_error, 0.5, 0.02);
    sink.add("Bessel(3) P(hit c before horizon)", horizon, bes.within.estimate().mean, bes.within.estimate().std_error,
             kNaN, 0.0, false);
    sink.finish(sw);
}

void taboo_density_check(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    Stopwatch sw;
    Sink sink(opt, rows, "qlaws_taboo_density", 9);
    const std::size_t reps = count(opt, "qlaws", "taboo_replicates");
    const double horizon = param(opt, "qlaws", "taboo_horizon");
    const std::size_t bins = count(opt, "qlaws", "taboo_bins");
    const TabooParams p(1.0, 1.0);
    const double delta = QConfig{}.layer * std::sqrt(opt.dt);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / opt.dt));
    const double width = (p.s + p.i) / static_cast<double>(bins);
    struct Acc {
        std::vector<double> hist;
        MeanAccumulator replicate_means;
        void merge(const Acc& o) {
            if (hist.size() < o.hist.size()) hist.resize(o.hist.size(), 0.0);
            for (std::size_t k = 0; k < o.hist.size(); ++k) hist[k] += o.hist[k];
            replicate_means.merge(o.replicate_means);
        }
    };
    RunContext ctx = opt.ctx;
    ctx.chunk = 1;
    const Acc acc = parallel_accumulate<Acc>(ctx, stream_tag("qlaws/taboo"), reps,
                                             [&](RngStream& rng, std::size_t b, std::size_t e, Acc& out) {
                                                 out.hist.assign(bins, 0.0);
                                                 for (std::size_t j = b; j < e; ++j) {
                                                     double y = 0.0;
                                                     double sum = 0.0;
                                                     for (std::size_t k = 0; k < steps; ++k) {
                                                         y = taboo_step(p, y, opt.dt, delta, rng);
                                                         const auto bin = std::min(bins - 1, static_cast<std::size_t>((y + p.i) / width));
                                                         out.hist[bin] += 1.0;
                                                         sum += 1.0 / ((p.s - std::max(y, 0.0)) * (p.i - std::max(-y, 0.0)));
                                                     }
                                                     out.replicate_means.add(sum / static_cast<double>(steps));
                                                 }
                                             });
    double total = 0.0;
    for (double h : acc.hist) total += h;
    double l1 = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        const double lo = -p.i + width * static_cast<double>(k);
        const double exact = taboo_cdf(p, lo + width) - taboo_cdf(p, lo);
        l1 += std::abs(acc.hist[k] / total - exact);
    }
    sink.within("occupation histogram L1 distance to 3/2 (1 - |x|)^2", horizon, l1, kNaN, 0.0, 0.05);
    const McEstimate avg = acc.replicate_means.estimate();
    sink.within("time average of 1 / ((s - X+)(i - X-))", horizon, avg.mean, avg.std_error, 3.0 / (2.0 * p.s * p.i), 0.05);
    sink.finish(sw);
}

void qlaws_suite(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    terminal_laws(opt, rows);
    route_equivalence(opt, rows);
    return_probability(opt, rows);
    taboo_density_check(opt, rows);
}

// ---- lemmas ----------------------------------------------------------------------

void add_bounds(Sink& sink, const LemmaReport& r) {
    for (const auto& b : r.bounds)
        sink.add(r.name + " bound " + b.name + (b.upper ? " (upper)" : " (lower)"), b.at, b.value, 0.0, b.bound,
                 b.upper ? b.bound - b.value : b.value - b.bound);
}

void lemmas_suite(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    {
        Stopwatch sw;
        Sink sink(opt, rows, "lemmas_taboo_constant", 2);
        TabooConstantConfig cfg;
        cfg.dt = opt.dt;
        const double t = param(opt, "lemmas", "taboo_t");
        cfg.times = {1.0, 2.0, 5.0, 10.0, 20.0};
        cfg.times.erase(std::remove_if(cfg.times.begin(), cfg.times.end(), [&](double v) { return v >= t; }), cfg.times.end());
        cfg.times.push_back(t);
        cfg.n = count(opt, "lemmas", "taboo_n");
        cfg.n_direct = count(opt, "lemmas", "taboo_n_direct");
        const TabooConstantReport r = taboo_constant_check(1.0, 1.0, cfg, opt.ctx);
        for (std::size_t k = 0; k + 1 < r.times.size(); ++k)
            sink.add("E[e^{cL} 1{t < T}] a=1 b=1", r.times[k], r.estimates[k].mean, r.estimates[k].std_error, kNaN, 0.0, false);
        sink.within("E[e^{cL} 1{t < T}] a=1 b=1", t, r.estimates.back().mean, r.estimates.back().std_error, 1.5, 0.05);
        sink.add("sup over the time grid", t, r.sup_estimate(), kNaN, kNaN, std::isfinite(r.sup_estimate()) ? 0.0 : -1.0,
                 false);
        sink.within_se("direct P-average minus taboo estimator a=1 b=1", r.times.front(), r.direct.mean - r.estimates.front().mean,
                       combined_se(r.direct, r.estimates.front()), 0.0);

        TabooConstantConfig ab = cfg;
        ab.times = {t};
        ab.n = count(opt, "lemmas", "taboo_n_ab");
        ab.n_direct = 1000;
        const TabooConstantReport r2 = taboo_constant_check(1.0, 2.0, ab, opt.ctx);
        sink.within("E[e^{cL} 1{t < T}] a=1 b=2", t, r2.estimates.back().mean, r2.estimates.back().std_error, 1.5, 0.05);
        sink.finish(sw);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "lemmas_downcross_rate", 3);
        const GSequence h = GSequence::geometric(0.5);
        auto H = [&](int n) { return h.G(n); };
        const Levels lv(0.0, 1.0);
        const double t = param(opt, "lemmas", "downcross_t");
        const LemmaReport r = downcross_rate_check(H, sequence_sum(h), 0.0, lv, t);
        sink.within("sqrt(t) E[H(D_t)] / RHS, H = 2^-n", t, r.ratio(), 0.0, 1.0, 0.01);
        sink.within("RHS, H = 2^-n", t, r.rhs, 0.0, 4.0 * std::sqrt(2.0 / std::numbers::pi), 1e-12, false);
        auto delta0 = [](int n) { return n == 0 ? 1.0 : 0.0; };
        const LemmaReport r0 = downcross_rate_check(delta0, 1.0, 0.0, lv, t);
        sink.within("sqrt(t) E[H(D_t)] / RHS, H = delta_0", t, r0.ratio(), 0.0, 1.0, 0.01);
        double prev = kInf;
        double margin = kInf;
        for (double tt : {1e2, 1e3, 1e4, 1e5, 1e6}) {
            const double err = std::abs(downcross_rate_check(H, sequence_sum(h), 0.0, lv, tt).ratio() - 1.0);
            sink.add("|ratio - 1|, H = 2^-n", tt, err, 0.0, 0.0, 0.0, false);
            margin = std::min(margin, prev - err);
            prev = err;
        }
        sink.add("ratio error decreases from t = 1e2 to 1e6", 1e6, prev, 0.0, 0.0, margin);
        sink.finish(sw);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "lemmas_maximum_tails", 4);
        const double u = param(opt, "lemmas", "horizon");
        struct Case1 {
            const char* label;
            const char* phi0;
            double a, x;
        };
        for (const Case1& c : {Case1{"phi0 = e^-y, a = x = 0", "exp 1 1", 0.0, 0.0},
                               Case1{"phi0 = 1[0,1], a = x = 0", "box 1 1", 0.0, 0.0},
                               Case1{"phi0 = e^-y, a = 1, x = 0", "exp 1 1", 1.0, 0.0}}) {
            const PiecewiseExpPoly phi0 = parse_function(c.phi0);
            const LemmaReport r = maximum_asymptote_check(phi0, c.a, c.x, u);
            sink.within(std::string("maximum_asymptote ratio, ") + c.label, u, r.ratio(), 0.0, 1.0, 0.01);
            for (double uu : {1.0, 10.0, 100.0, u}) add_bounds(sink, maximum_asymptote_check(phi0, c.a, c.x, uu));
        }
        const KennedyPsi psi = KennedyPsi::build(1.0, parse_function("const 2"));
        struct Case2 {
            double s, x;
        };
        for (const Case2& c : {Case2{0.0, 0.0}, Case2{1.0, 0.0}, Case2{1.0, -1.0}}) {
            const std::string label = "psi = 2, lambda = 1, s = " + fmt(c.s) + ", x = " + fmt(c.x);
            const LemmaReport r = kennedy_asymptote_check(psi, c.s, c.x, u);
            sink.within("kennedy_asymptote ratio, " + label, u, r.ratio(), 0.0, 1.0, 0.02);
            for (double tt : {1.0, 4.0, 100.0, u}) add_bounds(sink, kennedy_asymptote_check(psi, c.s, c.x, tt));
        }
        sink.finish(sw);
    }
    {
        Stopwatch sw;
        Sink sink(opt, rows, "lemmas_local_time", 4);
        const double t = param(opt, "lemmas", "horizon");
        const std::size_t n = count(opt, "lemmas", "local_time_n");
        const PiecewiseExpPoly f = parse_function("exp 1 1");
        for (double x : {0.0, 1.0, -1.0}) {
            const LemmaReport r = local_time_asymptote_check(f, 0.0, x, t, n, opt.ctx);
            sink.within("local_time_asymptote ratio, f = e^-s, a = 0, x = " + fmt(x), t, r.ratio(), r.lhs_se / r.rhs, 1.0, 0.02);
        }
        sink.finish(sw);
    }
}

// ---- paths -----------------------------------------------------------------------

void paths_suite(const SuiteOptions& opt, std::vector<ResultRow>& rows) {
    Stopwatch sw;
    Sink sink(opt, rows, "paths_laws", 0);
    const std::size_t n = count(opt, "paths", "n");
    const double dt = opt.dt;
    auto half_normal_cdf = [](double y) { return y <= 0.0 ? 0.0 : std::erf(y / std::numbers::sqrt2); };

    WalkerConfig plain;
    plain.dt = dt;
    const auto smax = collect(opt, "paths/max", n, [&](RngStream& rng) {
        BrownianWalker w(plain, 0.0);
        w.run_until(1.0, rng);
        return w.state().s;
    });
    sink.within("S_1 KS distance to |N|", 1.0, ks_distance(smax, half_normal_cdf), kNaN, 0.0, 0.03);

    WalkerConfig levy = plain;
    levy.local_time = true;
    const auto lexact = collect(opt, "paths/levy", n, [&](RngStream& rng) {
        BrownianWalker w(levy, 0.0);
        w.run_until(1.0, rng);
        return w.state().l;
    });
    sink.within("exact L_1 KS distance to |N|", 1.0, ks_distance(lexact, half_normal_cdf), kNaN, 0.0, 0.03);

    const TimeGrid grid = TimeGrid::covering(1.0, dt);
    const auto lband = collect(opt, "paths/band", n, [&](RngStream& rng) {
        const BrownPath p = gen_bm(0.0, 0.0, grid, rng);
        return estimate_local_time(p, std::sqrt(dt)).back();
    });
    sink.within("band L_1 KS distance to |N|", 1.0, ks_distance(lband, half_normal_cdf), kNaN, 0.0, 0.05);

    const auto bes = collect(opt, "paths/bessel", n, [&](RngStream& rng) { return gen_bessel3(0.0, grid, rng).back(); });
    auto chi3_cdf = [](double r) {
        return r <= 0.0 ? 0.0 : std::erf(r / std::numbers::sqrt2) - std::sqrt(2.0 / std::numbers::pi) * r * std::exp(-0.5 * r * r);
    };
    sink.within("Bessel(3) R_1 from 0 KS distance to chi(3)", 1.0, ks_distance(bes, chi3_cdf), kNaN, 0.0, 0.03);

    const auto tau = collect(opt, "paths/passage", n, [&](RngStream& rng) { return hitting_time_sample(1.0, rng); });
    sink.within("passage time over 1, KS distance to its law", kInf, ks_distance(tau, [](double t) {
                    return t <= 0.0 ? 0.0 : std::erfc(1.0 / std::sqrt(2.0 * t));
                }), kNaN, 0.0, 0.03);

    const Levels lv(0.0, 1.0);
    WalkerConfig ladder = plain;
    ladder.ladder = lv;
    const double tl = 4.0;
    const auto dcount = collect(opt, "paths/downcross", n, [&](RngStream& rng) {
        BrownianWalker w(ladder, 0.0);
        w.run_until(tl, rng);
        return static_cast<double>(w.state().d);
    });
    double tv = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double exact = downcross_at_least(0.0, Leg::up, lv, tl, k) - downcross_at_least(0.0, Leg::up, lv, tl, k + 1);
        const double f = static_cast<double>(std::count(dcount.begin(), dcount.end(), static_cast<double>(k))) /
                         static_cast<double>(n);
        tv += 0.5 * std::abs(f - exact);
    }
    sink.within("D_4 total variation to the passage-time law", tl, tv, kNaN, 0.0, 0.03);
    sink.finish(sw);
}

}  // namespace

const std::vector<SuiteInfo>& suite_catalog() { return kCatalog; }

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& s : kCatalog) out.push_back(s.name);
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest_name(const std::string& name, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t d = std::numeric_limits<std::size_t>::max();
    for (const auto& c : candidates) {
        const std::size_t e = edit_distance(name, c);
        if (e < d) {
            d = e;
            best = c;
        }
    }
    return best;
}

const SuiteInfo& find_suite(const std::string& name) {
    for (const auto& s : kCatalog)
        if (s.name == name) return s;
    throw ConfigError("unknown suite '" + name + "'; did you mean '" + nearest_name(name, suite_names()) + "'?");
}

std::string describe_suite(const std::string& name) {
    const SuiteInfo& s = find_suite(name);
    std::ostringstream os;
    os << s.name << ": " << s.summary << "\n";
    os << "parameters (set as " << s.name << ".KEY in the [params] section):\n";
    for (const auto& p : s.params) os << "  " << p.key << " = " << p.value << "  " << p.doc << "\n";
    return os.str();
}

void validate_params(const std::map<std::string, double>& params) {
    std::vector<std::string> known;
    for (const auto& s : kCatalog)
        for (const auto& p : s.params) known.push_back(s.name + "." + p.key);
    for (const auto& [key, value] : params) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown parameter '" + key + "'; did you mean '" + nearest_name(key, known) + "'?");
        if (!std::isfinite(value)) throw ConfigError("parameter '" + key + "' must be finite");
    }
}

std::vector<NamedFamily> default_families() {
    std::vector<NamedFamily> out;
    out.emplace_back("phi", PhiFamily{DensityPhi::exponential(1.0)});
    out.emplace_back("kennedy", KennedyFamily{KennedyPsi::build(1.0, parse_function("const 2"))});
    out.emplace_back("signed", SignedLocalFamily{SignWeights::build(parse_function("exp 1 1"), parse_function("exp 1 1"))});
    out.emplace_back("atoms", AtomFamily{AtomMeasure::build({{1.0, 1.0, 1.0}})});
    out.emplace_back("downcross", DownCrossFamily{GSequence::geometric(0.5), Levels(0.0, 1.0)});
    return out;
}

std::vector<ResultRow> run_suite(const std::string& name, const SuiteOptions& opt) {
    find_suite(name);
    validate_params(opt.params);
    if (!(opt.dt > 0.0)) throw ConfigError("dt must be positive");
    std::vector<ResultRow> rows;
    if (name == "martingale") martingale_suite(opt, rows);
    else if (name == "penalization") penalization_suite(opt, rows);
    else if (name == "qlaws") qlaws_suite(opt, rows);
    else if (name == "lemmas") lemmas_suite(opt, rows);
    else if (name == "paths") paths_suite(opt, rows);
    return rows;
}

}  // namespace penal
