#pragma once

#include <cstddef>
#include <cstdint>

namespace vsr {

// Occupation (n, m) of the 2N-atom ensemble: n atoms in |1>, m-n in |2>,
// 2N-m in the shared ground state |3>.
struct Occupation {
    int n = 0;
    int m = 0;

    friend bool operator==(const Occupation&, const Occupation&) = default;
};

// Number of valid (n, m) pairs for 2N atoms: (2N+1)(2N+2)/2.
std::size_t dimension(int n_half);

/// Triangular lattice 0 <= n <= m <= 2N with a flat index.
///
/// States are laid out by m descending (2N first), and within one m-layer by
/// n descending. Every transition lowers m by exactly one, so transition
/// targets always have a larger index than their source.
class StateSpace {
public:
    explicit StateSpace(int n_half);

    int n_half() const noexcept { return n_half_; }
    int total_atoms() const noexcept { return 2 * n_half_; }
    std::size_t dim() const noexcept { return dim_; }

    bool contains(int n, int m) const noexcept {
        return 0 <= n && n <= m && m <= 2 * n_half_;
    }

    std::size_t index_of(int n, int m) const;
    std::size_t index_of(Occupation s) const { return index_of(s.n, s.m); }
    Occupation state_of(std::size_t index) const;

private:
    int n_half_;
    std::size_t dim_;
};

}  // namespace vsr
