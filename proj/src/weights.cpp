#include "penal/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/property_tree/ptree.hpp>

namespace penal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormTol = 1e-9;

double ipow(double u, int k) {
    double r = 1.0;
    for (int j = 0; j < k; ++j) r *= u;
    return r;
}

// Primitive of u^k e^{r u} vanishing at the convergent infinite end.
double primitive(int k, double r, double u) {
    if (std::abs(r) < 1e-14) return ipow(u, k + 1) / (k + 1);
    double sum = 0.0;
    double fall = 1.0;  // k!/(k-j)!
    double rp = r;      // r^{j+1}
    for (int j = 0; j <= k; ++j) {
        sum += ((j % 2) ? -1.0 : 1.0) * fall * ipow(u, k - j) / rp;
        fall *= (k - j);
        rp *= r;
    }
    return std::exp(r * u) * sum;
}

double term_integral(const ExpPolyTerm& t, double anchor, double lo, double hi) {
    if (t.coef == 0.0) return 0.0;
    double upper, lower;
    if (std::isinf(hi)) {
        if (!(t.rate < 0.0)) throw AdmissibilityError("tail integral divergent", "term grows or stays flat at +inf");
        upper = 0.0;
    } else {
        upper = primitive(t.power, t.rate, hi - anchor);
    }
    if (std::isinf(lo)) {
        if (!(t.rate > 0.0)) throw AdmissibilityError("tail integral divergent", "term grows or stays flat at -inf");
        lower = 0.0;
    } else {
        lower = primitive(t.power, t.rate, lo - anchor);
    }
    return t.coef * (upper - lower);
}

double piece_value(const ExpPolyPiece& p, double x) {
    const double u = x - p.anchor;
    double v = 0.0;
    for (const auto& t : p.terms) v += t.coef * ipow(u, t.power) * std::exp(t.rate * u);
    return v;
}

bool piece_is_zero(const ExpPolyPiece& p) {
    return std::all_of(p.terms.begin(), p.terms.end(), [](const ExpPolyTerm& t) { return t.coef == 0.0; });
}

// Sample points covering a piece, with finite stand-ins for infinite ends.
std::vector<double> probe_points(const ExpPolyPiece& p) {
    const double lo = std::isinf(p.lo) ? std::min(p.anchor, std::isinf(p.hi) ? p.anchor : p.hi) - 50.0 : p.lo;
    const double hi = std::isinf(p.hi) ? std::max(p.anchor, lo) + 50.0 : p.hi;
    std::vector<double> pts;
    const int n = 256;
    for (int j = 0; j <= n; ++j) {
        double x = lo + (hi - lo) * j / n;
        if (x >= p.hi) x = std::nextafter(p.hi, -kInf);
        pts.push_back(x);
    }
    return pts;
}

void require_nonnegative(const PiecewiseExpPoly& f, const std::string& what) {
    for (const auto& p : f.pieces())
        for (double x : probe_points(p))
            if (piece_value(p, x) < -1e-12)
                throw AdmissibilityError(what + " nonnegative", "negative value at x=" + std::to_string(x));
}

// Cross-check of the closed form against adaptive quadrature.
void require_quadrature_agreement(const PiecewiseExpPoly& f, double closed, const std::string& what) {
    double q = 0.0;
    for (const auto& p : f.pieces()) {
        auto g = [&p](double x) { return piece_value(p, x); };
        q += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, p.lo, p.hi, 15, 1e-12);
    }
    if (std::abs(q - closed) > 1e-9 * std::max(1.0, std::abs(closed)))
        throw AdmissibilityError(what + " closed form", "quadrature disagrees with closed-form integral");
}

template <class F>
double solve_decreasing(F&& fn, double target, double lo, double hi) {
    // fn decreasing on [lo, hi] with fn(lo) >= target >= fn(hi).
    auto g = [&](double x) { return fn(x) - target; };
    double glo = g(lo);
    double ghi = g(hi);
    if (glo <= 0.0) return lo;
    if (ghi >= 0.0) return hi;
    std::uintmax_t it = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, it);
    return 0.5 * (r.first + r.second);
}

// Bracket [lo, hi] for a decreasing tail function starting at lo.
template <class F>
double upper_bracket(F&& tail, double lo, double target, double hint_hi) {
    if (std::isfinite(hint_hi)) return hint_hi;
    double step = 1.0;
    double hi = lo + step;
    while (tail(hi) > target && step < 1e6) {
        step *= 2.0;
        hi = lo + step;
    }
    return hi;
}

double finite_lower(const PiecewiseExpPoly& f, double x0) {
    if (std::isfinite(x0)) return x0;
    const double lo = f.support_lo();
    return std::isfinite(lo) ? lo : -50.0;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

// ---- PiecewiseExpPoly ----------------------------------------------------------

PiecewiseExpPoly::PiecewiseExpPoly(std::vector<ExpPolyPiece> pieces) : pieces_(std::move(pieces)) {
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
        const auto& p = pieces_[j];
        if (!(p.lo < p.hi)) throw ConfigError("function piece needs lo < hi");
        if (!std::isfinite(p.anchor)) throw ConfigError("function piece anchor must be finite");
        for (const auto& t : p.terms)
            if (t.power < 0 || !std::isfinite(t.coef) || !std::isfinite(t.rate))
                throw ConfigError("function term needs finite coefficients and a nonnegative power");
        if (j > 0 && pieces_[j - 1].hi > p.lo) throw ConfigError("function pieces must be sorted and disjoint");
    }
}

PiecewiseExpPoly PiecewiseExpPoly::constant(double c, double lo, double hi) {
    const double anchor = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
    return PiecewiseExpPoly({ExpPolyPiece{lo, hi, anchor, {ExpPolyTerm{c, 0, 0.0}}}});
}

PiecewiseExpPoly PiecewiseExpPoly::exponential(double coef, double rate, double lo) {
    return PiecewiseExpPoly({ExpPolyPiece{lo, kInf, lo, {ExpPolyTerm{coef, 0, -rate}}}});
}

double PiecewiseExpPoly::operator()(double x) const {
    for (const auto& p : pieces_)
        if (x >= p.lo && x < p.hi) return piece_value(p, x);
    return 0.0;
}

double PiecewiseExpPoly::integral(double lo, double hi) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double a = std::max(lo, p.lo);
        const double b = std::min(hi, p.hi);
        if (!(a < b)) continue;
        for (const auto& t : p.terms) total += term_integral(t, p.anchor, a, b);
    }
    return total;
}

PiecewiseExpPoly PiecewiseExpPoly::times_exp(double r) const {
    std::vector<ExpPolyPiece> out = pieces_;
    for (auto& p : out)
        for (auto& t : p.terms) {
            t.coef *= std::exp(r * p.anchor);
            t.rate += r;
        }
    return PiecewiseExpPoly(std::move(out));
}

double PiecewiseExpPoly::support_lo() const { return pieces_.empty() ? 0.0 : pieces_.front().lo; }
double PiecewiseExpPoly::support_hi() const { return pieces_.empty() ? 0.0 : pieces_.back().hi; }

double PiecewiseExpPoly::effective_hi() const {
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
        if (!piece_is_zero(*it)) return it->hi;
    return -kInf;
}

PiecewiseExpPoly parse_function(const std::string& text) {
    std::vector<ExpPolyPiece> pieces;
    std::stringstream all(text);
    std::string chunk;
    auto fail = [&](const std::string& why) { throw ConfigError("function '" + text + "': " + why); };
    while (std::getline(all, chunk, ';')) {
        std::istringstream in(chunk);
        std::string word;
        if (!(in >> word)) continue;
        auto read = [&]() {
            std::string tok;
            if (!(in >> tok)) fail("missing number");
            try {
                return std::stod(tok);
            } catch (const std::exception&) {
                fail("bad number '" + tok + "'");
            }
            return 0.0;
        };
        if (word == "const") {
            pieces.push_back({-kInf, kInf, 0.0, {{read(), 0, 0.0}}});
        } else if (word == "exp") {
            const double c = read();
            const double r = read();
            pieces.push_back({0.0, kInf, 0.0, {{c, 0, -r}}});
        } else if (word == "box") {
            const double c = read();
            const double a = read();
            pieces.push_back({0.0, a, 0.0, {{c, 0, 0.0}}});
        } else if (word == "piece") {
            ExpPolyPiece p;
            p.lo = read();
            p.hi = read();
            p.anchor = read();
            while (in >> word) {
                if (word != "term") fail("expected 'term', got '" + word + "'");
                const double c = read();
                const double k = read();
                const double r = read();
                if (k != std::floor(k)) fail("term power must be an integer");
                p.terms.push_back({c, static_cast<int>(k), r});
            }
            pieces.push_back(std::move(p));
        } else {
            fail("unknown form '" + word + "'");
        }
        std::string extra;
        if (word != "piece" && (in >> extra)) fail("trailing text '" + extra + "'");
    }
    if (pieces.empty()) fail("empty");
    return PiecewiseExpPoly(std::move(pieces));
}

std::string format_function(const PiecewiseExpPoly& f) {
    std::string out;
    for (const auto& p : f.pieces()) {
        if (!out.empty()) out += " ; ";
        out += "piece " + num(p.lo) + " " + num(p.hi) + " " + num(p.anchor);
        for (const auto& t : p.terms) out += " term " + num(t.coef) + " " + std::to_string(t.power) + " " + num(t.rate);
    }
    return out;
}

// ---- DensityPhi ----------------------------------------------------------------

DensityPhi DensityPhi::exponential(double rate) {
    if (!(rate > 0.0)) throw AdmissibilityError("density normalization", "exponential rate must be positive");
    return from_function(PiecewiseExpPoly::exponential(rate, rate));
}

DensityPhi DensityPhi::uniform(double width) {
    if (!(width > 0.0)) throw AdmissibilityError("density normalization", "uniform width must be positive");
    return from_function(PiecewiseExpPoly::constant(1.0 / width, 0.0, width));
}

DensityPhi DensityPhi::from_function(PiecewiseExpPoly f) {
    require_nonnegative(f, "density");
    const double total = f.integral(-kInf, kInf);
    if (std::abs(total - 1.0) > kNormTol)
        throw AdmissibilityError("density normalization", "integral is " + num(total) + ", expected 1");
    require_quadrature_agreement(f, total, "density");
    return DensityPhi(std::move(f));
}

double DensityPhi::inverse_tail(double q) const {
    const double lo = finite_lower(f_, f_.support_lo());
    auto t = [this](double y) { return tail(y); };
    const double hi = upper_bracket(t, lo, q, f_.effective_hi());
    return solve_decreasing(t, q, lo, hi);
}

// ---- KennedyPsi ----------------------------------------------------------------

KennedyPsi KennedyPsi::build(double lambda, PiecewiseExpPoly psi) {
    if (!(lambda > 0.0)) throw AdmissibilityError("lambda positive", "lambda must be > 0");
    require_nonnegative(psi, "psi");
    PiecewiseExpPoly weighted = psi.times_exp(-lambda);
    // Finiteness of T at every finite point: every unbounded piece must decay.
    for (const auto& p : weighted.pieces())
        if (std::isinf(p.hi))
            for (const auto& t : p.terms)
                if (t.coef != 0.0 && !(t.rate < 0.0))
                    throw AdmissibilityError("tail integral divergent", "psi grows at least like e^{lambda z}");
    return KennedyPsi(lambda, std::move(psi), std::move(weighted));
}

double KennedyPsi::tail_integral(double y) const { return weighted_.integral(y, kInf); }

double KennedyPsi::one_minus_Phi(double y) const { return std::exp(lambda_ * y) * tail_integral(y); }

double KennedyPsi::inverse_weighted_tail(double x0, double q) const {
    const double target = q * tail_integral(x0);
    auto t = [this](double y) { return tail_integral(y); };
    const double hi = upper_bracket(t, x0, target, psi_.effective_hi());
    return solve_decreasing(t, target, x0, hi);
}

// ---- SignWeights ---------------------------------------------------------------

SignWeights SignWeights::build(PiecewiseExpPoly h_plus, PiecewiseExpPoly h_minus) {
    for (const auto* f : {&h_plus, &h_minus}) {
        if (!f->pieces().empty() && f->support_lo() < 0.0)
            throw AdmissibilityError("support in [0, inf)", "sign weights are functions of the local time");
        require_nonnegative(*f, "sign weight");
        for (const auto& p : f->pieces())
            if (std::isinf(p.hi))
                for (const auto& t : p.terms)
                    if (t.coef != 0.0 && (t.rate > 0.0 || (t.rate == 0.0 && t.power > 0)))
                        throw AdmissibilityError("bounded", "sign weight is unbounded");
    }
    double total = 0.0;
    try {
        total = 0.5 * (h_plus.integral(0.0, kInf) + h_minus.integral(0.0, kInf));
    } catch (const AdmissibilityError&) {
        throw AdmissibilityError("H(infinity)=1", "h+ + h- is not integrable");
    }
    if (std::abs(total - 1.0) > kNormTol) throw AdmissibilityError("H(infinity)=1", "H(infinity) is " + num(total));
    if (std::isfinite(std::max(h_plus.effective_hi(), h_minus.effective_hi())))
        throw AdmissibilityError("H(l)=1 at finite l", "h+ + h- vanishes beyond a finite level");
    require_quadrature_agreement(h_plus, h_plus.integral(0.0, kInf), "h+");
    require_quadrature_agreement(h_minus, h_minus.integral(0.0, kInf), "h-");
    return SignWeights(std::move(h_plus), std::move(h_minus));
}

double SignWeights::H(double l) const { return 0.5 * (hp_.integral(0.0, l) + hm_.integral(0.0, l)); }

double SignWeights::one_minus_H(double l) const {
    return 0.5 * (hp_.integral(l, kInf) + hm_.integral(l, kInf));
}

double SignWeights::inverse_one_minus_H(double q) const {
    auto t = [this](double l) { return one_minus_H(l); };
    const double hi = upper_bracket(t, 0.0, q, kInf);
    return solve_decreasing(t, q, 0.0, hi);
}

double SignWeights::positive_mass() const { return 0.5 * hp_.integral(0.0, kInf); }

// ---- AtomMeasure ---------------------------------------------------------------

AtomMeasure AtomMeasure::build(std::vector<Atom> atoms) {
    if (atoms.empty()) throw AdmissibilityError("nonempty support", "atom list is empty");
    double total = 0.0;
    double alpha = kInf;
    for (const auto& at : atoms) {
        if (!(at.a > 0.0) || !(at.b > 0.0))
            throw AdmissibilityError("support bounded away from 0", "atom levels must be positive");
        if (!(at.w > 0.0)) throw AdmissibilityError("positive weights", "atom weight must be positive");
        total += at.w;
        alpha = std::min({alpha, at.a, at.b});
    }
    if (std::abs(total - 1.0) > kNormTol) throw AdmissibilityError("probability measure", "weights sum to " + num(total));
    return AtomMeasure(std::move(atoms), alpha);
}

bool AtomMeasure::diagonal() const {
    return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& at) { return at.a == at.b; });
}

double eval_A_nu(const AtomMeasure& nu, double s, double i, double l) {
    if (s < 0.0 || i < 0.0 || l < 0.0) throw StateError("A_nu: s, i and l must be nonnegative");
    double v = 0.0;
    for (const auto& at : nu.atoms())
        if (s <= at.a && i <= at.b) v += at.w * std::exp(0.5 * (1.0 / at.a + 1.0 / at.b) * l);
    return v;
}

// ---- GSequence -----------------------------------------------------------------

GSequence GSequence::geometric(double q) {
    if (!(q > 0.0 && q < 1.0)) throw AdmissibilityError("G strictly decreasing to 0", "geometric ratio must lie in (0, 1)");
    return GSequence(Kind::geometric, q);
}

GSequence GSequence::power(double p) {
    if (!(p > 0.0)) throw AdmissibilityError("G strictly decreasing to 0", "power exponent must be positive");
    return GSequence(Kind::power, p);
}

double GSequence::G(int n) const {
    if (n < 0) throw StateError("G: negative index");
    return kind_ == Kind::geometric ? std::pow(param_, n) : std::pow(n + 1.0, -param_);
}

int GSequence::index_at_least(double q) const {
    constexpr double cap = 1e9;
    double n = kind_ == Kind::geometric ? std::floor(std::log(q) / std::log(param_))
                                        : std::floor(std::pow(q, -1.0 / param_)) - 1.0;
    n = std::clamp(n, 0.0, cap);
    // Guard the floor against rounding at exact powers.
    while (n > 0.0 && G(static_cast<int>(n)) < q) n -= 1.0;
    while (n < cap && G(static_cast<int>(n) + 1) >= q) n += 1.0;
    return static_cast<int>(n);
}

// ---- family blocks -------------------------------------------------------------

std::string family_kind(const WeightSpec& spec) {
    static const char* names[] = {"phi", "kennedy", "signed_local", "atoms", "downcross"};
    return names[spec.index()];
}

namespace {

std::string required(const boost::property_tree::ptree& block, const std::string& key) {
    auto v = block.get_optional<std::string>(key);
    if (!v) throw ConfigError("family block: missing key '" + key + "'");
    return *v;
}

double required_number(const boost::property_tree::ptree& block, const std::string& key) {
    const std::string s = required(block, key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("family block: key '" + key + "' is not a number: '" + s + "'");
    }
}

DensityPhi parse_density(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    in >> word;
    double v = 0.0;
    if (word == "exponential" && (in >> v)) return DensityPhi::exponential(v);
    if (word == "uniform" && (in >> v)) return DensityPhi::uniform(v);
    return DensityPhi::from_function(parse_function(text));
}

std::vector<Atom> parse_atoms(const std::string& text) {
    std::vector<Atom> atoms;
    std::stringstream all(text);
    std::string chunk;
    while (std::getline(all, chunk, ';')) {
        std::istringstream in(chunk);
        Atom at{};
        if (!(in >> at.a)) continue;
        if (!(in >> at.b >> at.w)) throw ConfigError("atoms: each atom is 'a b w'");
        atoms.push_back(at);
    }
    return atoms;
}

GSequence parse_g(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    double v = 0.0;
    if (!(in >> word >> v)) throw ConfigError("G: expected 'geometric q' or 'power p'");
    if (word == "geometric") return GSequence::geometric(v);
    if (word == "power") return GSequence::power(v);
    throw ConfigError("G: unknown sequence '" + word + "'");
}

}  // namespace

WeightSpec parse_family(const boost::property_tree::ptree& block) {
    const std::string kind = required(block, "kind");
    if (kind == "phi") return PhiFamily{parse_density(required(block, "phi"))};
    if (kind == "kennedy")
        return KennedyFamily{KennedyPsi::build(required_number(block, "lambda"), parse_function(required(block, "psi")))};
    if (kind == "signed_local")
        return SignedLocalFamily{
            SignWeights::build(parse_function(required(block, "h_plus")), parse_function(required(block, "h_minus")))};
    if (kind == "atoms") return AtomFamily{AtomMeasure::build(parse_atoms(required(block, "atoms")))};
    if (kind == "downcross")
        return DownCrossFamily{parse_g(required(block, "G")),
                               Levels(required_number(block, "a"), required_number(block, "b"))};
    throw ConfigError("family block: unknown kind '" + kind + "'");
}

void write_family(const WeightSpec& spec, boost::property_tree::ptree& block) {
    block.put("kind", family_kind(spec));
    std::visit(
        [&block](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, PhiFamily>) {
                block.put("phi", format_function(f.phi.function()));
            } else if constexpr (std::is_same_v<T, KennedyFamily>) {
                block.put("lambda", num(f.psi.lambda()));
                block.put("psi", format_function(f.psi.psi_function()));
            } else if constexpr (std::is_same_v<T, SignedLocalFamily>) {
                block.put("h_plus", format_function(f.w.plus_function()));
                block.put("h_minus", format_function(f.w.minus_function()));
            } else if constexpr (std::is_same_v<T, AtomFamily>) {
                std::string s;
                for (const auto& at : f.nu.atoms()) {
                    if (!s.empty()) s += " ; ";
                    s += num(at.a) + " " + num(at.b) + " " + num(at.w);
                }
                block.put("atoms", s);
            } else {
                block.put("G", std::string(f.g.kind() == GSequence::Kind::geometric ? "geometric " : "power ") +
                                   num(f.g.parameter()));
                block.put("a", num(f.levels.a));
                block.put("b", num(f.levels.b));
            }
        },
        spec);
}

}  // namespace penal
