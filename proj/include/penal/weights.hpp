#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "penal/errors.hpp"
#include "penal/path.hpp"

namespace penal {

// coef * u^power * exp(rate * u) with u = x - anchor.
struct ExpPolyTerm {
    double coef = 0.0;
    int power = 0;
    double rate = 0.0;
};

// Supported on [lo, hi); lo may be -inf and hi may be +inf, the anchor is finite.
struct ExpPolyPiece {
    double lo = 0.0;
    double hi = 0.0;
    double anchor = 0.0;
    std::vector<ExpPolyTerm> terms;
};

class PiecewiseExpPoly {
  public:
    PiecewiseExpPoly() = default;
    explicit PiecewiseExpPoly(std::vector<ExpPolyPiece> pieces);

    static PiecewiseExpPoly constant(double c, double lo, double hi);
    // coef * exp(-rate * (x - lo)) on [lo, +inf)
    static PiecewiseExpPoly exponential(double coef, double rate, double lo = 0.0);

    double operator()(double x) const;
    // Closed-form integral over [lo, hi] intersected with the support.
    double integral(double lo, double hi) const;
    // f(x) * exp(r * x)
    PiecewiseExpPoly times_exp(double r) const;

    const std::vector<ExpPolyPiece>& pieces() const { return pieces_; }
    double support_lo() const;
    double support_hi() const;
    // Upper end of the set where some coefficient is nonzero.
    double effective_hi() const;

  private:
    std::vector<ExpPolyPiece> pieces_;
};

// Text form: "piece LO HI ANCHOR term C K R [term C K R ...] ; piece ..."
// with shorthands "const C", "exp C R" (C e^{-R x} on [0, inf)) and "box C A" (C on [0, A)).
PiecewiseExpPoly parse_function(const std::string& text);
std::string format_function(const PiecewiseExpPoly& f);

class DensityPhi {
  public:
    static DensityPhi exponential(double rate);
    // (1/width) on [0, width]
    static DensityPhi uniform(double width);
    static DensityPhi from_function(PiecewiseExpPoly f);

    double pdf(double x) const { return f_(x); }
    double cdf(double x) const { return 1.0 - tail(x); }
    // 1 - Phi(x), integrated from x upwards.
    double tail(double x) const { return f_.integral(x, kInf); }
    // y with tail(y) = q, for q in (0, tail(lower support)].
    double inverse_tail(double q) const;
    const PiecewiseExpPoly& function() const { return f_; }

  private:
    explicit DensityPhi(PiecewiseExpPoly f) : f_(std::move(f)) {}
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    PiecewiseExpPoly f_;
};

// Kennedy weights with kappa = 0.
class KennedyPsi {
  public:
    static KennedyPsi build(double lambda, PiecewiseExpPoly psi);

    double lambda() const { return lambda_; }
    double psi(double y) const { return psi_(y); }
    // T(y) = int_y^inf psi(z) e^{-lambda z} dz
    double tail_integral(double y) const;
    // 1 - Phi(y) = e^{lambda y} T(y)
    double one_minus_Phi(double y) const;
    double Phi(double y) const { return 1.0 - one_minus_Phi(y); }
    double phi(double y) const { return psi(y) - lambda_ * one_minus_Phi(y); }
    // y >= x0 with int_y^inf psi e^{-lambda z} = q * T(x0).
    double inverse_weighted_tail(double x0, double q) const;
    const PiecewiseExpPoly& psi_function() const { return psi_; }

  private:
    KennedyPsi(double lambda, PiecewiseExpPoly psi, PiecewiseExpPoly weighted)
        : lambda_(lambda), psi_(std::move(psi)), weighted_(std::move(weighted)) {}
    double lambda_;
    PiecewiseExpPoly psi_;
    PiecewiseExpPoly weighted_;
};

class SignWeights {
  public:
    static SignWeights build(PiecewiseExpPoly h_plus, PiecewiseExpPoly h_minus);

    double h_plus(double l) const { return hp_(l); }
    double h_minus(double l) const { return hm_(l); }
    // H(l) = 1/2 int_0^l (h+ + h-)
    double H(double l) const;
    // 1 - H(l), integrated over [l, inf) for accuracy.
    double one_minus_H(double l) const;
    // l with 1 - H(l) = q.
    double inverse_one_minus_H(double q) const;
    // 1/2 int_0^inf h+
    double positive_mass() const;
    const PiecewiseExpPoly& plus_function() const { return hp_; }
    const PiecewiseExpPoly& minus_function() const { return hm_; }

  private:
    SignWeights(PiecewiseExpPoly hp, PiecewiseExpPoly hm) : hp_(std::move(hp)), hm_(std::move(hm)) {}
    PiecewiseExpPoly hp_;
    PiecewiseExpPoly hm_;
};

struct Atom {
    double a;
    double b;
    double w;
};

class AtomMeasure {
  public:
    static AtomMeasure build(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double alpha() const { return alpha_; }
    bool diagonal() const;

  private:
    AtomMeasure(std::vector<Atom> atoms, double alpha) : atoms_(std::move(atoms)), alpha_(alpha) {}
    std::vector<Atom> atoms_;
    double alpha_;
};

double eval_A_nu(const AtomMeasure& nu, double s, double i, double l);

class GSequence {
  public:
    enum class Kind { geometric, power };
    // G(n) = q^n
    static GSequence geometric(double q);
    // G(n) = (n + 1)^{-p}
    static GSequence power(double p);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    double G(int n) const;
    double dG(int n) const { return G(n) - G(n + 1); }
    // n with P(n) = dG(n), from u uniform on (0, 1).
    int sample(double u) const { return index_at_least(u); }
    // Largest n with G(n) >= q, for q in (0, 1].
    int index_at_least(double q) const;

  private:
    GSequence(Kind kind, double param) : kind_(kind), param_(param) {}
    Kind kind_;
    double param_;
};

struct PhiFamily {
    DensityPhi phi;
};
struct KennedyFamily {
    KennedyPsi psi;
};
struct SignedLocalFamily {
    SignWeights w;
};
struct AtomFamily {
    AtomMeasure nu;
};
struct DownCrossFamily {
    GSequence g;
    Levels levels;
};

using WeightSpec = std::variant<PhiFamily, KennedyFamily, SignedLocalFamily, AtomFamily, DownCrossFamily>;

std::string family_kind(const WeightSpec& spec);

// Parse and validate one family block (keys: kind plus the family's parameters).
WeightSpec parse_family(const boost::property_tree::ptree& block);
void write_family(const WeightSpec& spec, boost::property_tree::ptree& block);

}  // namespace penal
