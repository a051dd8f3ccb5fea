#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace sdlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hoelder conjugate p' = p/(p-1), with 1' = inf and inf' = 1.
double conjugate(double p);

/// Raised for exponent tuples violating an admissibility constraint; the
/// message names the violated constraint.
class InadmissibleExponents : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// (n, p0, q0, p, q, alpha) with 1 <= p0 <= p <= q < q0 <= inf,
/// 1/p - 1/q = alpha/(n q0'), 0 <= alpha < n and 1/p0 - 1/q0 > alpha/(n q0').
struct ExponentTuple {
    int n = 1;
    double p0 = 1.0;
    double q0 = kInfinity;
    double p = 2.0;
    double q = 2.0;
    double alpha = 0.0;

    [[nodiscard]] double q0_conj() const { return conjugate(q0); }
    /// Fractional order of the sparse operator A^beta_S dominated with this tuple: alpha/q0'.
    [[nodiscard]] double operator_order() const { return alpha / q0_conj(); }
    /// (q0/q)', the reverse Hoelder index; 1 when q0 = inf.
    [[nodiscard]] double rh_index() const;
    /// (1/p0 - 1/p) q + 1, the Muckenhoupt index of the thmA and multiplier bounds.
    [[nodiscard]] double ap_index() const { return (1.0 / p0 - 1.0 / p) * q + 1.0; }

    /// Throws InadmissibleExponents naming the first violated constraint.
    void validate() const;
    [[nodiscard]] bool admissible() const noexcept;
    [[nodiscard]] std::string to_string() const;

    /// Tuple with alpha solved from 1/p - 1/q = alpha/(n q0').
    static ExponentTuple with_derived_alpha(int n, double p0, double q0, double p, double q);
};

/// Tolerance used for the algebraic exponent relations.
inline constexpr double kExponentTolerance = 1e-12;

}  // namespace sdlab
