#include "vsr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vsr/errors.hpp"

namespace vsr {

void DecayRates::validate() const {
    if (!std::isfinite(gamma1) || !std::isfinite(gamma2) || gamma1 < 0.0 || gamma2 < 0.0) {
        throw ValidationError("decay rates must be finite and non-negative");
    }
    if (gamma1 == 0.0 && gamma2 == 0.0) {
        throw ValidationError("at least one decay rate must be positive");
    }
}

namespace {

void check_state(int n, int m, int n_half) {
    if (n_half < 1 || n < 0 || n > m || m > 2 * n_half) {
        throw ValidationError("invalid state (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                              ") for N=" + std::to_string(n_half));
    }
}

}  // namespace

std::int64_t coop_rate_mode1(int n, int m, int n_half) {
    check_state(n, m, n_half);
    return static_cast<std::int64_t>(n) * (2 * static_cast<std::int64_t>(n_half) - m + 1);
}

std::int64_t coop_rate_mode2(int n, int m, int n_half) {
    check_state(n, m, n_half);
    return static_cast<std::int64_t>(m - n) * (2 * static_cast<std::int64_t>(n_half) - m + 1);
}

Generator::Generator(const StateSpace& space, const DecayRates& rates) : space_(space), rates_(rates) {
    rates_.validate();
    const std::size_t dim = space_.dim();
    const int n_half = space_.n_half();

    diagonal_.assign(dim, 0.0);
    src1_.assign(dim, kNoSource);
    src2_.assign(dim, kNoSource);
    rate1_.assign(dim, 0.0);
    rate2_.assign(dim, 0.0);
    transitions_.reserve(2 * dim);

    // Walk sources in index order so the transition list is sorted by source.
    for (std::size_t s = 0; s < dim; ++s) {
        const auto [n, m] = space_.state_of(s);
        const double out1 = rates_.gamma1 * static_cast<double>(coop_rate_mode1(n, m, n_half));
        const double out2 = rates_.gamma2 * static_cast<double>(coop_rate_mode2(n, m, n_half));
        diagonal_[s] = -(out1 + out2);
        max_outflow_ = std::max(max_outflow_, out1 + out2);
        if (out1 > 0.0) {
            const auto t = static_cast<std::uint32_t>(space_.index_of(n - 1, m - 1));
            transitions_.push_back({static_cast<std::uint32_t>(s), t, out1, Mode::first});
            src1_[t] = static_cast<std::uint32_t>(s);
            rate1_[t] = out1;
        }
        if (out2 > 0.0) {
            const auto t = static_cast<std::uint32_t>(space_.index_of(n, m - 1));
            transitions_.push_back({static_cast<std::uint32_t>(s), t, out2, Mode::second});
            src2_[t] = static_cast<std::uint32_t>(s);
            rate2_[t] = out2;
        }
    }
}

void Generator::apply(const double* in, double* out) const noexcept {
    const std::size_t dim = diagonal_.size();
    for (std::size_t t = 0; t < dim; ++t) {
        double v = diagonal_[t] * in[t];
        if (src1_[t] != kNoSource) v += rate1_[t] * in[src1_[t]];
        if (src2_[t] != kNoSource) v += rate2_[t] * in[src2_[t]];
        out[t] = v;
    }
}

void Generator::perturb_transition(std::size_t which, double rel) {
    if (which >= transitions_.size()) {
        throw ValidationError("transition index out of range");
    }
    Transition& tr = transitions_[which];
    const double delta = tr.rate * rel;
    tr.rate += delta;
    diagonal_[tr.source] -= delta;
    if (tr.mode == Mode::first) {
        rate1_[tr.target] = tr.rate;
    } else {
        rate2_[tr.target] = tr.rate;
    }
    max_outflow_ = std::max(max_outflow_, -diagonal_[tr.source]);
}

Generator build_generator(const StateSpace& space, const DecayRates& rates) {
    return Generator(space, rates);
}

std::string_view to_string(InitialKind kind) {
    switch (kind) {
        case InitialKind::v_standard: return "v-standard";
        case InitialKind::two_level_conventional: return "two-level-conventional";
        case InitialKind::two_level_unconventional: return "two-level-unconventional";
        case InitialKind::custom: return "custom";
    }
    return "custom";
}

InitialKind parse_initial_kind(std::string_view text) {
    std::string s(text);
    std::replace(s.begin(), s.end(), '_', '-');
    if (s == "v-standard") return InitialKind::v_standard;
    if (s == "two-level-conventional") return InitialKind::two_level_conventional;
    if (s == "two-level-unconventional") return InitialKind::two_level_unconventional;
    throw ValidationError("unknown initial condition '" + std::string(text) + "'");
}

Distribution initial_distribution(const StateSpace& space, InitialKind kind, const Distribution& custom) {
    const int n_half = space.n_half();
    Distribution p(space.dim(), 0.0);
    switch (kind) {
        case InitialKind::v_standard:
        case InitialKind::two_level_conventional:
            p[space.index_of(n_half, 2 * n_half)] = 1.0;
            return p;
        case InitialKind::two_level_unconventional:
            p[space.index_of(0, n_half)] = 1.0;
            return p;
        case InitialKind::custom:
            break;
    }
    if (custom.size() != space.dim()) {
        throw ValidationError("custom distribution has " + std::to_string(custom.size()) +
                              " entries, expected " + std::to_string(space.dim()));
    }
    for (double v : custom) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ValidationError("custom distribution has a negative or non-finite entry");
        }
    }
    const double total = std::accumulate(custom.begin(), custom.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("custom distribution sums to " + std::to_string(total) + ", not 1");
    }
    return custom;
}

}  // namespace vsr
