#include "penal/qsamplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace penal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegligibleExponent = 40.0;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Grid bookkeeping shared by all routes: snapshots, optional path record and the
// occupation estimate of the local time.
class Track {
  public:
    Track(const QConfig& cfg, const PathState& init, QSample& out, bool occupation_lt)
        : cfg_(cfg), out_(out), occupation_(occupation_lt), st(init) {
        if (!(cfg.dt > 0.0)) throw ConfigError("Q sampler: dt must be positive");
        double end = cfg.horizon;
        for (double t : cfg.observe) {
            if (t < 0.0) throw ConfigError("Q sampler: observation times must be nonnegative");
            const double k = std::round(t / cfg.dt);
            if (std::abs(k * cfg.dt - t) > 1e-9 * std::max(1.0, t))
                throw ConfigError("Q sampler: observation time " + std::to_string(t) + " is not on the grid");
            obs_.push_back(static_cast<std::size_t>(k));
            end = std::max(end, t);
        }
        std::sort(obs_.begin(), obs_.end());
        n_ = static_cast<std::size_t>(std::ceil(end / cfg.dt - 1e-9));
        eps_ = cfg.eps > 0.0 ? cfg.eps : std::sqrt(cfg.dt);
        unit_ = cfg.dt / (2.0 * eps_);
        st.t = 0.0;
        if (occupation_) {
            if (std::abs(st.x) < eps_) ++hits_;
            st.l = unit_ * static_cast<double>(hits_);
        }
        if (cfg.record_path) out_.path.reserve(n_ + 1);
        record();
    }

    bool done() const { return k_ >= n_; }
    double time() const { return static_cast<double>(k_) * cfg_.dt; }
    double dt() const { return cfg_.dt; }
    bool extremes() const { return cfg_.track_extremes; }

    void commit() {
        ++k_;
        st.t = time();
        if (occupation_) {
            if (std::abs(st.x) < eps_) ++hits_;
            st.l = unit_ * static_cast<double>(hits_);
        }
        record();
    }

    // Running extremes after a Brownian step (any constant drift) from x1 to x2.
    void bm_extremes(double x1, double x2, double h, RngStream& rng) {
        if (cfg_.track_extremes) {
            st.s = update_running_max(st.s, x1, x2, h, rng);
            st.i = -update_running_min(-st.i, x1, x2, h, rng);
        }
        st.s = std::max(st.s, x2);
        st.i = std::max(st.i, -x2);
    }

    // Running extremes after a radial step r1 -> r2 with X = anchor + dir * R. The side
    // facing the anchor uses the exact Bessel(3) bridge minimum; the far side uses
    // the Brownian bridge maximum, which differs by terms of order exp(-2 r1 r2 / h).
    void radial_extremes(double anchor, double dir, double r1, double r2, double h, RngStream& rng) {
        const double x2 = anchor + dir * r2;
        if (cfg_.track_extremes) {
            const double c = dir < 0.0 ? anchor - st.s : -anchor - st.i;
            if (c > 0.0) {
                const double p = bessel3_bridge_below_prob(c, r1, r2, h);
                if (p > 1e-18) {
                    const double m = bessel3_bridge_min(r1, r2, h, rng.uniform());
                    if (dir < 0.0)
                        st.s = std::max(st.s, anchor - m);
                    else
                        st.i = std::max(st.i, -(anchor + m));
                }
            }
            if (dir < 0.0)
                st.i = update_running_max(st.i + anchor, r1, r2, h, rng) - anchor;
            else
                st.s = update_running_max(st.s - anchor, r1, r2, h, rng) + anchor;
        }
        st.s = std::max(st.s, x2);
        st.i = std::max(st.i, -x2);
    }

  private:
    void record() {
        if (cfg_.record_path) out_.path.push_back(st.x);
        while (next_ < obs_.size() && obs_[next_] == k_) {
            out_.snapshots.push_back(st);
            out_.weights.push_back(1.0);
            ++next_;
        }
    }

    const QConfig& cfg_;
    QSample& out_;
    bool occupation_;
    std::vector<std::size_t> obs_;
    std::size_t next_ = 0;
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    double eps_ = 0.0;
    double unit_ = 0.0;
    std::size_t hits_ = 0;

  public:
    PathState st;
};

PathState start_at(double x0) {
    PathState st;
    st.x = x0;
    st.s = x0;
    st.i = std::max(-x0, 0.0);
    return st;
}

// Brownian motion with drift mu until it reaches level y from below. Returns the
// in-step hitting time estimate (step midpoint) without committing that step.
std::optional<double> bm_until_level(Track& tr, double mu, double y, RngStream& rng) {
    const double dt = tr.dt();
    const double h = std::sqrt(dt);
    while (!tr.done()) {
        const double x1 = tr.st.x;
        const double x2 = x1 + mu * dt + h * rng.normal();
        bool hit = x2 >= y;
        double bridge_top = std::max(x1, x2);
        bool top_known = false;
        if (!hit) {
            const double e = 2.0 * (y - x1) * (y - x2) / dt;
            if (e <= kNegligibleExponent) {
                const double u = rng.uniform();
                hit = u < std::exp(-e);
                bridge_top = bridge_max(x1, x2, dt, u);
                top_known = true;
            }
        }
        if (hit) return tr.time() + 0.5 * dt;
        if (tr.extremes()) {
            tr.st.s = top_known ? std::max(tr.st.s, bridge_top) : update_running_max(tr.st.s, x1, x2, dt, rng);
            tr.st.i = -update_running_min(-tr.st.i, x1, x2, dt, rng);
        }
        tr.st.s = std::max(tr.st.s, x2);
        tr.st.i = std::max(tr.st.i, -x2);
        tr.st.x = x2;
        tr.commit();
    }
    return std::nullopt;
}

// Runs X = anchor + dir * R for a Bessel(3) R (the drifted variant when lambda > 0)
// started from the vector v, with the first step of length first_h.
double radial_segment(Track& tr, double anchor, double dir, DriftedBessel3 z, double first_h, RngStream& rng) {
    double h = first_h;
    while (!tr.done()) {
        const double r1 = z.norm();
        const double r2 = z.step(h, rng);
        tr.radial_extremes(anchor, dir, r1, r2, h, rng);
        tr.st.x = anchor + dir * r2;
        tr.commit();
        h = tr.dt();
    }
    return z.norm();
}

DriftedBessel3 radial_start(double r0, double lambda = 0.0) {
    DriftedBessel3 z;
    z.v[0] = r0;
    z.lambda = lambda;
    return z;
}

// Inverse Gaussian variate (first passage of drift-lambda motion over c > 0).
double drifted_hitting_time(double c, double lambda, RngStream& rng) {
    if (lambda <= 0.0) return hitting_time_sample(c, rng);
    const double mu = c / lambda;
    const double shape = c * c;
    const double n = rng.normal();
    const double y = n * n;
    const double x = mu + mu * mu * y / (2.0 * shape) - mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
    return rng.uniform() <= mu / (mu + x) ? x : mu * mu / x;
}

}  // namespace

std::string route_name(Route r) {
    switch (r) {
        case Route::direct: return "A";
        case Route::sde: return "B";
        case Route::weighted: return "C";
    }
    return "?";
}

TabooParams::TabooParams(double upper, double lower) : s(upper), i(lower) {
    if (!(upper > 0.0) || !(lower > 0.0)) throw ConfigError("taboo levels s and i must be positive");
}

double taboo_drift(TabooParams p, double y) {
    if (y > 0.0) return -1.0 / (p.s - y);
    if (y < 0.0) return 1.0 / (p.i + y);
    return 0.0;
}

double taboo_step(TabooParams p, double y, double dt, double delta, RngStream& rng) {
    if (y > 0.0 && (y > delta || p.s - y < delta)) return p.s - bessel3_step(p.s - y, dt, rng);
    if (y < 0.0 && (-y > delta || p.i + y < delta)) return bessel3_step(p.i + y, dt, rng) - p.i;
    const double b = taboo_drift(p, y);
    const double h = std::sqrt(dt);
    double y2;
    do {
        y2 = y + b * dt + h * rng.normal();
    } while (!(y2 > -p.i && y2 < p.s));
    return y2;
}

double taboo_density(TabooParams p, double y) {
    if (y <= -p.i || y >= p.s) return 0.0;
    const double h = y >= 0.0 ? 1.0 - y / p.s : 1.0 + y / p.i;
    return 3.0 * h * h / (p.s + p.i);
}

double taboo_cdf(TabooParams p, double y) {
    if (y <= -p.i) return 0.0;
    if (y >= p.s) return 1.0;
    const double z = p.s + p.i;
    if (y < 0.0) {
        const double h = 1.0 + y / p.i;
        return p.i * h * h * h / z;
    }
    const double h = 1.0 - y / p.s;
    return 1.0 - p.s * h * h * h / z;
}

// ---- route A -------------------------------------------------------------------

QSample sample_q_phi_direct(const DensityPhi& phi, double x0, const QConfig& cfg, RngStream& rng) {
    const double tail0 = phi.tail(x0);
    if (!(tail0 > 0.0)) throw AdmissibilityError("1 - Phi(x0) > 0", "no mass above the starting point");
    const double y = std::max(x0, phi.inverse_tail(rng.uniform() * tail0));
    QSample out;
    out.route = Route::direct;
    Track tr(cfg, start_at(x0), out, true);
    auto g = bm_until_level(tr, 0.0, y, rng);
    if (g) {
        tr.st.s = y;
        radial_segment(tr, y, -1.0, radial_start(0.0), tr.time() + tr.dt() - *g, rng);
    } else {
        g = tr.time() + hitting_time_sample(y - tr.st.x, rng);
    }
    out.terminals.s_inf = y;
    out.terminals.i_inf = kInf;
    out.terminals.xstar_inf = kInf;
    out.terminals.g = *g;
    return out;
}

QSample sample_q_kennedy_direct(const KennedyPsi& k, double x0, const QConfig& cfg, RngStream& rng) {
    const double lam = k.lambda();
    const double y = std::max(x0, k.inverse_weighted_tail(x0, rng.uniform()));
    QSample out;
    out.route = Route::direct;
    Track tr(cfg, start_at(x0), out, true);
    auto g = bm_until_level(tr, lam, y, rng);
    if (g) {
        tr.st.s = y;
        radial_segment(tr, y, -1.0, radial_start(0.0, lam), tr.time() + tr.dt() - *g, rng);
    } else {
        g = tr.time() + drifted_hitting_time(y - tr.st.x, lam, rng);
    }
    out.terminals.s_inf = y;
    out.terminals.i_inf = kInf;
    out.terminals.xstar_inf = kInf;
    out.terminals.g = *g;
    return out;
}

QSample sample_q_signed_direct(const SignWeights& w, const QConfig& cfg, RngStream& rng) {
    const double l = w.inverse_one_minus_H(rng.uniform());
    const double hp = w.h_plus(l);
    const double hm = w.h_minus(l);
    const double p_plus = hp + hm > 0.0 ? hp / (hp + hm) : 0.5;
    const int sign = rng.uniform() < p_plus ? 1 : -1;

    QSample out;
    out.route = Route::direct;
    Track tr(cfg, start_at(0.0), out, false);
    WalkerConfig wc;
    wc.dt = cfg.dt;
    wc.local_time = true;
    wc.bridge = cfg.track_extremes;
    BrownianWalker walker(wc, 0.0);
    std::optional<double> g;
    while (!tr.done()) {
        walker.step(rng);
        const PathState& ws = walker.state();
        if (ws.l >= l) {
            g = tr.time() + 0.5 * cfg.dt;
            break;
        }
        tr.st.x = ws.x;
        tr.st.s = ws.s;
        tr.st.i = ws.i;
        tr.st.l = ws.l;
        tr.commit();
    }
    if (g) {
        tr.st.l = l;
        radial_segment(tr, 0.0, static_cast<double>(sign), radial_start(0.0), tr.time() + cfg.dt - *g, rng);
    } else {
        // B sits at L - |X|; the local time reaches l when B first reaches l.
        g = tr.time() + hitting_time_sample(l - tr.st.l + std::abs(tr.st.x), rng);
    }
    out.terminals.l_inf = l;
    out.terminals.sign_inf = sign;
    out.terminals.g = *g;
    out.terminals.xstar_inf = kInf;
    if (sign > 0)
        out.terminals.s_inf = kInf;
    else
        out.terminals.i_inf = kInf;
    return out;
}

QSample sample_q_taboo(TabooParams p, const QConfig& cfg, RngStream& rng, double x0) {
    if (!(x0 > -p.i && x0 < p.s)) throw ConfigError("taboo process must start inside (-i, s)");
    QSample out;
    out.route = Route::direct;
    Track tr(cfg, start_at(x0), out, true);
    const double dt = cfg.dt;
    const double h = std::sqrt(dt);
    const double delta = cfg.layer * h;
    while (!tr.done()) {
        const double y = tr.st.x;
        double y2;
        if (y > 0.0 && (y > delta || p.s - y < delta)) {
            // s - Y is a Bessel(3) process while Y stays positive.
            const double r1 = p.s - y;
            const double r2 = bessel3_step(r1, dt, rng);
            tr.radial_extremes(p.s, -1.0, r1, r2, dt, rng);
            y2 = p.s - r2;
        } else if (y < 0.0 && (-y > delta || p.i + y < delta)) {
            const double r1 = p.i + y;
            const double r2 = bessel3_step(r1, dt, rng);
            tr.radial_extremes(-p.i, 1.0, r1, r2, dt, rng);
            y2 = r2 - p.i;
        } else {
            const double b = taboo_drift(p, y);
            do {
                y2 = y + b * dt + h * rng.normal();
            } while (!(y2 > -p.i && y2 < p.s));
            tr.bm_extremes(y, y2, dt, rng);
        }
        tr.st.x = y2;
        tr.commit();
    }
    out.terminals.s_inf = p.s;
    out.terminals.i_inf = p.i;
    out.terminals.xstar_inf = std::max(p.s, p.i);
    out.terminals.l_inf = kInf;
    return out;
}

QSample sample_q_atoms_direct(const AtomMeasure& nu, const QConfig& cfg, RngStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    const auto& atoms = nu.atoms();
    std::size_t j = 0;
    for (; j + 1 < atoms.size(); ++j) {
        acc += atoms[j].w;
        if (u < acc) break;
    }
    return sample_q_taboo(TabooParams(atoms[j].a, atoms[j].b), cfg, rng);
}

double downcross_terminal_pmf(const GSequence& g, Levels levels, double x0, int n) {
    if (x0 > levels.b) throw ConfigError("down-crossing Q-law implemented for starting points x0 <= b");
    const double span = levels.b - levels.a;
    const double m0 = (g.G(0) * (2.0 * levels.b - levels.a - x0) + g.G(1) * (x0 - levels.a)) / (2.0 * span);
    if (n == 0) return g.dG(0) * (2.0 * levels.b - levels.a - x0) / (2.0 * span) / m0;
    return g.dG(n) / m0;
}

QSample sample_q_downcross_direct(const GSequence& g, Levels levels, double x0, const QConfig& cfg, RngStream& rng) {
    const double a = levels.a;
    const double b = levels.b;
    const double span = b - a;
    const double p0 = downcross_terminal_pmf(g, levels, x0, 0);
    int n = 0;
    if (rng.uniform() >= p0) n = g.index_at_least(rng.uniform() * g.G(1));

    QSample out;
    out.route = Route::direct;
    PathState init = start_at(x0);
    Track tr(cfg, init, out, true);
    DownCrossLadder ladder(levels, x0);
    const double dt = cfg.dt;
    const double h = std::sqrt(dt);

    std::optional<double> g_time;
    double first_h = dt;
    if (n == 0) {
        g_time = 0.0;
    } else {
        while (!tr.done()) {
            const double x1 = tr.st.x;
            const double x2 = x1 + h * rng.normal();
            ladder.update(x1, x2, dt, cfg.track_extremes, rng);
            if (ladder.count() == n) {
                g_time = tr.time() + 0.5 * dt;
                first_h = 0.5 * dt;
                break;
            }
            tr.bm_extremes(x1, x2, dt, rng);
            tr.st.x = x2;
            tr.st.d = ladder.count();
            tr.st.leg = ladder.leg();
            tr.commit();
        }
    }

    const double c = span;
    const double r0 = n == 0 ? 2.0 * b - a - x0 : 2.0 * span;
    Terminals& term = out.terminals;
    term.d_inf = n;

    if (!g_time) {
        // Finish the ladder with exact passage times.
        double t = tr.time();
        double x = tr.st.x;
        int count = ladder.count();
        Leg leg = ladder.leg();
        while (count < n) {
            if (leg == Leg::up) {
                t += hitting_time_sample(std::max(b - x, 0.0), rng);
                x = b;
                leg = Leg::down;
            } else {
                t += hitting_time_sample(std::max(x - a, 0.0), rng);
                x = a;
                leg = Leg::up;
                ++count;
            }
        }
        term.g = t;
        term.gbar_within_horizon = false;
        term.gbar_hit_prob = c / r0;
        term.gbar = rng.uniform() < c / r0 ? t + hitting_time_sample(r0 - c, rng) : kInf;
        return out;
    }
    term.g = *g_time;

    // Between g and gbar: X = 2b - a - R with R Bessel(3) from r0, until R reaches b - a.
    tr.st.d = n;
    tr.st.leg = Leg::up;
    DriftedBessel3 z = radial_start(r0);
    const double anchor = 2.0 * b - a;
    std::optional<double> gbar;
    double hstep = first_h;
    double step_start = *g_time;
    while (!tr.done()) {
        const double r1 = z.norm();
        const double r2 = z.step(hstep, rng);
        bool hit = r2 <= c;
        if (!hit) {
            const double p = bessel3_bridge_below_prob(c, r1, r2, hstep);
            hit = p > 1e-18 && rng.uniform() < p;
        }
        if (hit) {
            gbar = step_start + 0.5 * hstep;
            tr.st.s = std::max(tr.st.s, b);
            break;
        }
        tr.radial_extremes(anchor, -1.0, r1, r2, hstep, rng);
        tr.st.x = anchor - r2;
        tr.commit();
        step_start = tr.time();
        hstep = dt;
    }
    if (!gbar) {
        const double r = z.norm();
        term.gbar_within_horizon = false;
        term.gbar_hit_prob = c / r;
        term.gbar = rng.uniform() < c / r ? tr.time() + hitting_time_sample(r - c, rng) : kInf;
        return out;
    }
    term.gbar = *gbar;
    term.gbar_within_horizon = true;
    term.gbar_hit_prob = 1.0;
    // After gbar: X = a + R' with R' Bessel(3) from b - a; no further down-crossing.
    tr.st.leg = Leg::down;
    const double rest = step_start + hstep - *gbar;
    if (!tr.done()) radial_segment(tr, a, 1.0, radial_start(span), rest, rng);
    return out;
}

QSample sample_q_direct(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng) {
    return std::visit(
        overloaded{
            [&](const PhiFamily& f) { return sample_q_phi_direct(f.phi, x0, cfg, rng); },
            [&](const KennedyFamily& f) { return sample_q_kennedy_direct(f.psi, x0, cfg, rng); },
            [&](const SignedLocalFamily& f) {
                if (x0 != 0.0) throw ConfigError("signed local family: direct route starts at 0");
                return sample_q_signed_direct(f.w, cfg, rng);
            },
            [&](const AtomFamily& f) {
                if (x0 != 0.0) throw ConfigError("atom family: direct route starts at 0");
                return sample_q_atoms_direct(f.nu, cfg, rng);
            },
            [&](const DownCrossFamily& f) { return sample_q_downcross_direct(f.g, f.levels, x0, cfg, rng); },
        },
        spec);
}

// ---- route B -------------------------------------------------------------------

QSample sample_q_sde(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng) {
    QSample out;
    out.route = Route::sde;
    const bool needs_lt = std::holds_alternative<SignedLocalFamily>(spec) || std::holds_alternative<AtomFamily>(spec);
    const bool kennedy = std::holds_alternative<KennedyFamily>(spec);
    Track tr(cfg, initial_state(spec, x0), out, needs_lt);
    std::optional<DownCrossLadder> ladder;
    if (const auto* dc = std::get_if<DownCrossFamily>(&spec)) ladder.emplace(dc->levels, x0);
    const double dt = cfg.dt;
    const double h = std::sqrt(dt);
    const double delta = cfg.layer * h;

    while (!tr.done()) {
        const double x1 = tr.st.x;
        const double m = martingale_value(spec, tr.st);
        if (!(m > 0.0)) {
            out.valid = false;
            out.reason = "absorbed";
            break;
        }
        double x2;
        const double dm = kennedy ? 0.0 : dM_dx(spec, tr.st);
        if (!kennedy && dm != 0.0 && m / std::abs(dm) < delta) {
            // M is affine in x here; the distance to its zero is a Bessel(3) process.
            const double r1 = m / std::abs(dm);
            const double dir = dm > 0.0 ? 1.0 : -1.0;
            const double zero = x1 - m / dm;
            const double r2 = bessel3_step(r1, dt, rng);
            tr.radial_extremes(zero, dir, r1, r2, dt, rng);
            x2 = zero + dir * r2;
        } else {
            const double j = kennedy ? drift_J(spec, tr.st) : dm / m;
            x2 = x1 + j * dt + h * rng.normal();
            tr.bm_extremes(x1, x2, dt, rng);
        }
        if (ladder) {
            ladder->update(x1, x2, dt, cfg.track_extremes, rng);
            tr.st.d = ladder->count();
            tr.st.leg = ladder->leg();
        }
        tr.st.x = x2;
        tr.commit();
    }
    if (out.valid && !(martingale_value(spec, tr.st) > 0.0)) {
        out.valid = false;
        out.reason = "absorbed";
    }
    return out;
}

// ---- route C -------------------------------------------------------------------

QSample sample_weighted(const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng) {
    QSample out;
    out.route = Route::weighted;
    WalkerConfig wc;
    wc.dt = cfg.dt;
    wc.bridge = cfg.track_extremes;
    wc.local_time = std::holds_alternative<SignedLocalFamily>(spec) || std::holds_alternative<AtomFamily>(spec);
    if (const auto* dc = std::get_if<DownCrossFamily>(&spec)) wc.ladder = dc->levels;
    BrownianWalker walker(wc, x0);
    Track tr(cfg, initial_state(spec, x0), out, false);
    while (!tr.done()) {
        walker.step(rng);
        const PathState& ws = walker.state();
        tr.st.x = ws.x;
        tr.st.s = ws.s;
        tr.st.i = ws.i;
        tr.st.l = ws.l;
        tr.st.d = ws.d;
        tr.st.leg = ws.leg;
        tr.commit();
    }
    const double m0 = martingale_initial(spec, x0);
    for (std::size_t j = 0; j < out.snapshots.size(); ++j) out.weights[j] = martingale_value(spec, out.snapshots[j]) / m0;
    return out;
}

QSample sample_q(Route route, const WeightSpec& spec, double x0, const QConfig& cfg, RngStream& rng) {
    switch (route) {
        case Route::direct: return sample_q_direct(spec, x0, cfg, rng);
        case Route::sde: return sample_q_sde(spec, x0, cfg, rng);
        case Route::weighted: return sample_weighted(spec, x0, cfg, rng);
    }
    throw ConfigError("unknown route");
}

// ---- terminal laws -------------------------------------------------------------

TerminalOracle terminal_law_oracle(const WeightSpec& spec, double x0) {
    return std::visit(
        overloaded{
            [&](const PhiFamily& f) {
                const DensityPhi phi = f.phi;
                const double tail0 = phi.tail(x0);
                TerminalOracle o;
                o.terminal = "S_inf";
                o.cdf = [phi, tail0, x0](double y) { return y < x0 ? 0.0 : 1.0 - phi.tail(y) / tail0; };
                return o;
            },
            [&](const KennedyFamily& f) {
                const KennedyPsi k = f.psi;
                const double t0 = k.tail_integral(x0);
                TerminalOracle o;
                o.terminal = "S_inf";
                o.cdf = [k, t0, x0](double y) { return y < x0 ? 0.0 : 1.0 - k.tail_integral(y) / t0; };
                return o;
            },
            [&](const SignedLocalFamily& f) {
                const SignWeights w = f.w;
                TerminalOracle o;
                o.terminal = "L_inf";
                o.cdf = [w](double l) { return l <= 0.0 ? 0.0 : w.H(l); };
                o.positive_branch = w.positive_mass();
                return o;
            },
            [&](const AtomFamily& f) {
                TerminalOracle o;
                o.terminal = "(S_inf, I_inf)";
                for (const auto& at : f.nu.atoms()) o.pmf.push_back(at.w);
                return o;
            },
            [&](const DownCrossFamily& f) {
                TerminalOracle o;
                o.terminal = "D_inf";
                double rest = 1.0;
                for (int n = 0; rest > 1e-12 && n < 200; ++n) {
                    const double p = downcross_terminal_pmf(f.g, f.levels, x0, n);
                    o.pmf.push_back(p);
                    rest -= p;
                }
                return o;
            },
        },
        spec);
}

}  // namespace penal
