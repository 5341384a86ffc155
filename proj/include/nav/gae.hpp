#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nav {

struct AdvantageEstimate {
    std::vector<double> advantages;
    std::vector<double> returns;  // value-function targets, A + V
};

/// Generalized advantage estimation over one trajectory segment.
/// `values` carries one extra trailing element: the bootstrap value for a
/// truncated segment (ignored when the last step is terminal).
inline AdvantageEstimate compute_gae(const std::vector<double>& rewards,
                                     const std::vector<double>& values,
                                     const std::vector<std::uint8_t>& terminals, double gamma,
                                     double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n + 1 || terminals.size() != n) {
        throw std::invalid_argument("compute_gae: array length mismatch");
    }
    AdvantageEstimate out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double nonterminal = terminals[i] ? 0.0 : 1.0;
        const double delta = rewards[i] + gamma * values[i + 1] * nonterminal - values[i];
        acc = delta + gamma * lambda * nonterminal * acc;
        out.advantages[i] = acc;
        out.returns[i] = acc + values[i];
    }
    return out;
}

}  // namespace nav
