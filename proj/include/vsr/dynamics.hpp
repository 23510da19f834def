#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vsr/state_space.hpp"

namespace vsr {

using Distribution = std::vector<double>;

/// Single-atom spontaneous decay rates of |1>->|3> and |2>->|3>.
struct DecayRates {
    double gamma1 = 1.0;
    double gamma2 = 0.1;

    // Throws ValidationError on negative, non-finite or all-zero rates.
    void validate() const;
};

enum class Mode { first = 1, second = 2 };

// Cooperative enhancement factors, exact integers.
std::int64_t coop_rate_mode1(int n, int m, int n_half);  // n (2N - m + 1)
std::int64_t coop_rate_mode2(int n, int m, int n_half);  // (m - n)(2N - m + 1)

struct Transition {
    std::uint32_t source;
    std::uint32_t target;
    double rate;
    Mode mode;
};

/// Sparse generator G of dP/dt = G P.
///
/// `diagonal` holds the negated total outflow of each state; `transitions`
/// holds every off-diagonal entry. Each state has at most one incoming edge
/// per mode, which `apply` exploits by gathering per target.
class Generator {
public:
    Generator(const StateSpace& space, const DecayRates& rates);

    const StateSpace& space() const noexcept { return space_; }
    const DecayRates& rates() const noexcept { return rates_; }
    std::size_t dim() const noexcept { return diagonal_.size(); }

    const std::vector<double>& diagonal() const noexcept { return diagonal_; }
    const std::vector<Transition>& transitions() const noexcept { return transitions_; }

    // Largest total outflow rate over all states.
    double max_outflow() const noexcept { return max_outflow_; }
    bool is_absorbing(std::size_t index) const noexcept { return diagonal_[index] == 0.0; }

    // out = G * in
    void apply(const double* in, double* out) const noexcept;

    // Incoming edge of `target` for a mode, or kNoSource. Used by the fused
    // integrator kernel.
    static constexpr std::uint32_t kNoSource = 0xffffffffu;
    std::uint32_t source1(std::size_t target) const noexcept { return src1_[target]; }
    std::uint32_t source2(std::size_t target) const noexcept { return src2_[target]; }
    double rate1(std::size_t target) const noexcept { return rate1_[target]; }
    double rate2(std::size_t target) const noexcept { return rate2_[target]; }

    // Test fixture: multiply one transition rate by (1 + rel), keeping the
    // outflow consistent. Used as a negative control for the oracle battery.
    void perturb_transition(std::size_t which, double rel);

private:
    StateSpace space_;
    DecayRates rates_;
    std::vector<double> diagonal_;
    std::vector<Transition> transitions_;
    std::vector<std::uint32_t> src1_, src2_;
    std::vector<double> rate1_, rate2_;
    double max_outflow_ = 0.0;
};

Generator build_generator(const StateSpace& space, const DecayRates& rates);

enum class InitialKind { v_standard, two_level_conventional, two_level_unconventional, custom };

std::string_view to_string(InitialKind kind);
// Accepts "v-standard", "two-level-conventional", "two-level-unconventional"
// (underscores also accepted).
InitialKind parse_initial_kind(std::string_view text);

/// v_standard and two_level_conventional: point mass at (N, 2N).
/// two_level_unconventional: point mass at (0, N).
/// custom: validated copy of `custom` (non-negative, sums to 1 within 1e-12).
Distribution initial_distribution(const StateSpace& space, InitialKind kind,
                                  const Distribution& custom = {});

}  // namespace vsr
