// Precondition checks shared by the analysis and synthesis assemblers.
#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "qgcc/qmodel.hpp"

namespace qgcc::detail {

inline void require_class(const UncertainSystem& sys, Method method) {
    sys.validate();
    if (sys.uncertainty_class != required_class(method)) {
        throw ClassMismatch(std::string(to_string(method)) + " needs uncertainty class " +
                            to_string(required_class(method)) + ", got " +
                            to_string(sys.uncertainty_class));
    }
}

inline void require_hurwitz(const CMatrix& F) {
    const double abscissa = spectral_abscissa(F);
    if (abscissa >= -1e-10) {
        std::ostringstream os;
        os << "F not Hurwitz (spectral abscissa " << abscissa << ")";
        throw NotHurwitz(os.str());
    }
}

inline void require_theta(double theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw NonPositiveParameter("theta must be non-negative");
    }
}

}  // namespace qgcc::detail
