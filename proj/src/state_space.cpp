#include "vsr/state_space.hpp"

#include <cmath>
#include <string>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

// Largest n_half whose flat index still fits the 32-bit transition table.
constexpr int kMaxHalf = 20000;

}  // namespace

std::size_t dimension(int n_half) {
    if (n_half < 1) {
        throw ValidationError("n_half must be >= 1, got " + std::to_string(n_half));
    }
    if (n_half > kMaxHalf) {
        throw ValidationError("n_half too large: " + std::to_string(n_half));
    }
    const auto k = static_cast<std::size_t>(2 * n_half);
    return (k + 1) * (k + 2) / 2;
}

StateSpace::StateSpace(int n_half) : n_half_(n_half), dim_(dimension(n_half)) {}

std::size_t StateSpace::index_of(int n, int m) const {
    if (!contains(n, m)) {
        throw ValidationError("invalid state (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                              ") for 2N=" + std::to_string(total_atoms()));
    }
    // Reversed order is m ascending, n ascending: r = m(m+1)/2 + n.
    const auto mm = static_cast<std::size_t>(m);
    const std::size_t reversed = mm * (mm + 1) / 2 + static_cast<std::size_t>(n);
    return dim_ - 1 - reversed;
}

Occupation StateSpace::state_of(std::size_t index) const {
    if (index >= dim_) {
        throw ValidationError("state index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(dim_) + ")");
    }
    const std::size_t reversed = dim_ - 1 - index;
    auto m = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(reversed) + 1.0) - 1.0) / 2.0);
    while (m * (m + 1) / 2 > reversed) --m;
    while ((m + 1) * (m + 2) / 2 <= reversed) ++m;
    const std::size_t n = reversed - m * (m + 1) / 2;
    return {static_cast<int>(n), static_cast<int>(m)};
}

}  // namespace vsr
