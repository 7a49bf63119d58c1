#include "desn/rng.hpp"

namespace desn {

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    // Rounding can land on an endpoint for some (lo, hi); redraw in that case.
    for (;;) {
        const double x = lo + (hi - lo) * uniform01();
        if (x > lo && x < hi) return x;
    }
}

}  // namespace desn
