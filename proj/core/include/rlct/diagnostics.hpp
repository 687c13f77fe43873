#pragma once

#include <span>
#include <vector>

namespace rlct {

/// Split potential scale reduction factor. Each chain is cut in half and the
/// 2m halves are compared with the classic between/within variance ratio.
/// Returns NaN when any half has fewer than 2 draws.
[[nodiscard]] double split_rhat(std::span<const std::vector<double>> chains);

/// Multi-chain effective sample size with Geyer's initial monotone sequence
/// estimator on the combined autocorrelation.
[[nodiscard]] double effective_sample_size(std::span<const std::vector<double>> chains);

}  // namespace rlct
