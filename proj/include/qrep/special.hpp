#pragma once

namespace qrep {

// e^{z^2} erfc(z) for z >= 0 without overflow.
double erfcx(double z);

}  // namespace qrep
