#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace frontlab {

enum class EnvelopeTag { lower, upper };

/// Monostable envelope g on [0,1]: lower envelopes bound f/a from below
/// (g0), upper envelopes from above (g1).
struct EnvelopeFunction {
    std::string name;
    EnvelopeTag tag = EnvelopeTag::lower;
    std::function<double(double)> g;
    std::function<double(double)> dg;

    double operator()(double u) const { return g(u); }
};

EnvelopeFunction logistic_envelope();              // u(1-u), lower
EnvelopeFunction linear_envelope();                // u, upper
EnvelopeFunction quadratic_envelope(double beta);  // u(1+beta u), upper

/// sup over (0,1] of g(u)/u, with the removable singularity at 0 replaced by g'(0).
/// Sampled on [1e-6, 1] and refined by Brent's method to 1e-9.
double envelope_nu(const EnvelopeFunction& g1);

/// Closed-form coefficient a(x), A(x) or q(x) selected by name.
struct CoefficientField {
    std::string kind;
    std::vector<double> params;
    std::function<double(double)> value;

    double operator()(double x) const { return value(x); }
};

/// kinds: constant [c], gaussian [base, amp, width], sine [base, amp, k],
/// indicator [base, amp, half_width]
CoefficientField make_coefficient(const std::string& kind, const std::vector<double>& params);

/// Cached extremal quantities, filled by validation.
struct SpecBounds {
    double a_minus = 0.0;
    double a_plus = 0.0;
    double nu = 1.0;
    double gap_integral = 0.0;     // int_0^1 (g1 - g0)/u^2
    double aA_minus = 0.0;         // inf a(x)A(x), diffusion/drift operators only
    double q_plus = 0.0;           // sup |q(x)|
    double lambda1 = 0.0;          // replaces 2 a_minus when A or q is present
};

struct ReactionSpec {
    std::string name;
    CoefficientField a;
    std::function<double(double, double)> f;
    std::function<double(double, double)> f_u;
    // Optional factorisation f(x, u) = a(x) kernel(m(x), u), evaluated in extended precision by the stepper.
    std::function<long double(long double, long double)> kernel;
    std::function<double(double)> modulation;
    std::optional<double> kernel_beta;  // set when kernel(m, u) = u (1 - u) (1 + beta m u)
    EnvelopeFunction g0;
    EnvelopeFunction g1;
    std::optional<CoefficientField> diffusion;  // A(x)
    std::optional<CoefficientField> drift;      // q(x)

    bool validated = false;
    SpecBounds bounds;

    bool has_transport() const { return diffusion.has_value() || drift.has_value(); }
    double diffusion_at(double x) const { return diffusion ? (*diffusion)(x) : 1.0; }
    double drift_at(double x) const { return drift ? (*drift)(x) : 0.0; }
};

struct ReactionConfig {
    std::string kind = "kpp";  // kpp | cubic | cubic_modulated | tabulated
    double beta = 0.0;
    std::string a_kind = "constant";
    std::vector<double> a_params{1.0};
    std::string g0_kind;  // empty: derived from kind
    std::string g1_kind;
    std::vector<double> table_u;
    std::vector<double> table_f;
    std::string A_kind;
    std::vector<double> A_params;
    std::string q_kind;
    std::vector<double> q_params;
};

ReactionSpec make_reaction(const ReactionConfig& config);

struct SampleGrid {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t nx = 2001;
    std::size_t nu = 1001;
};

struct HypothesisCheck {
    std::string name;
    bool pass = false;
    double worst_violation = 0.0;  // >= 0, zero when satisfied everywhere
    std::string where;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    SpecBounds bounds;

    bool valid() const;
    const HypothesisCheck& check(const std::string& name) const;
    nlohmann::json to_json() const;
};

/// Checks the monostable hypotheses (equilibria at 0 and 1, the envelope
/// sandwich a g0 <= f <= a g1, envelope shapes, positivity and boundedness of
/// a, finiteness of the envelope gap integral) on the sample grid and computes
/// the bounds a-, a+, nu. Throws Error(invalid_spec) on non-finite samples and
/// Error(envelope) when g1(u)/u is unbounded near 0.
ValidationReport validate_spec(const ReactionSpec& spec, const SampleGrid& grid = {});

/// Returns a copy with cached bounds; throws Error(invalid_spec) if any hypothesis fails.
ReactionSpec validated(ReactionSpec spec, const SampleGrid& grid = {});

/// 2a- - 2 sqrt(nu-1)/(sqrt(nu)+sqrt(nu-1)) a+, with lambda1 in place of 2a-
/// for operators with diffusion/drift fields.
double threshold_rhs(const ReactionSpec& spec);
double threshold_rhs(double a_minus, double a_plus, double nu);

/// 2 sqrt(nu-1)/(sqrt(nu)+sqrt(nu-1)), the factor multiplying a+.
double nu_correction(double nu);

}  // namespace frontlab
