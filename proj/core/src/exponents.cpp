#include "sdlab/exponents.hpp"

#include <cmath>
#include <sstream>

namespace sdlab {

double conjugate(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("conjugate exponent requires p >= 1");
    if (p == 1.0) return kInfinity;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

double ExponentTuple::rh_index() const {
    if (std::isinf(q0)) return 1.0;
    return conjugate(q0 / q);
}

void ExponentTuple::validate() const {
    if (n < 1) throw InadmissibleExponents("dimension n must be >= 1");
    if (!(p0 >= 1.0)) throw InadmissibleExponents("constraint 1 <= p0 violated");
    if (!(p0 <= p)) throw InadmissibleExponents("constraint p0 <= p violated");
    if (!(p <= q)) throw InadmissibleExponents("constraint p <= q violated");
    if (std::isinf(q)) throw InadmissibleExponents("constraint q < inf violated");
    if (!(q < q0)) throw InadmissibleExponents("constraint q < q0 violated");
    if (!(alpha >= 0.0 && alpha < n)) throw InadmissibleExponents("constraint 0 <= alpha < n violated");
    const double lhs = 1.0 / p - 1.0 / q;
    const double rhs = alpha / (n * q0_conj());
    if (std::abs(lhs - rhs) > kExponentTolerance)
        throw InadmissibleExponents("constraint 1/p - 1/q = alpha/(n q0') violated");
    if (!(1.0 / p0 - 1.0 / q0 > rhs))
        throw InadmissibleExponents("constraint 1/p0 - 1/q0 > alpha/(n q0') violated");
}

bool ExponentTuple::admissible() const noexcept {
    try {
        validate();
        return true;
    } catch (const InadmissibleExponents&) {
        return false;
    }
}

std::string ExponentTuple::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << n << ",p0=" << p0 << ",q0=" << q0 << ",p=" << p << ",q=" << q << ",alpha=" << alpha;
    return os.str();
}

ExponentTuple ExponentTuple::with_derived_alpha(int n, double p0, double q0, double p, double q) {
    ExponentTuple e{n, p0, q0, p, q, 0.0};
    e.alpha = (1.0 / p - 1.0 / q) * n * e.q0_conj();
    return e;
}

}  // namespace sdlab
