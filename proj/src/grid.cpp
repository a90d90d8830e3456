#include "densiflow/grid.hpp"

#include <cmath>
#include <string>

#include "densiflow/error.hpp"

namespace densiflow {

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

GridSpec GridSpec::make(int n, double length) {
    if (n < 8 || !is_power_of_two(n)) {
        throw Error(ErrorCode::BadGrid, "grid size must be a power of two >= 8, got " + std::to_string(n));
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw Error(ErrorCode::BadGrid, "box length must be positive and finite");
    }
    return GridSpec{n, length};
}

}  // namespace densiflow
