#include "qrep/special.hpp"

#include <cmath>
#include <numbers>

#include "qrep/errors.hpp"

namespace qrep {

double erfcx(double z) {
    require(z >= 0.0 && std::isfinite(z), ErrorKind::Domain, "erfcx: argument must be finite and >= 0");
    if (z <= 5.0) return std::exp(z * z) * std::erfc(z);
    // Continued fraction of the asymptotic series, modified Lentz.
    // erfcx(z) = (1/sqrt(pi)) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    constexpr double tiny = 1e-300;
    double f = z;
    double C = f;
    double D = 0.0;
    for (int k = 1; k < 500; ++k) {
        double a = 0.5 * k;
        D = z + a * D;
        if (std::abs(D) < tiny) D = tiny;
        C = z + a / C;
        if (std::abs(C) < tiny) C = tiny;
        D = 1.0 / D;
        double delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace qrep
