#pragma once

// Serial reference implementations of the parallel kernels. They follow the
// plain definitions (no blocking, no caching) and exist for tests and
// benchmarks.

#include <span>
#include <vector>

#include "lumibal/distsim.hpp"
#include "lumibal/modality.hpp"
#include "lumibal/types.hpp"

namespace lumibal::reference {

// Four direct IoUs per set, cf-major / af-minor order.
std::vector<distsim::SetScore> all_set_scores(std::span<const BrightnessDistribution> cf_images,
                                              std::span<const distsim::PairRef> cf_pairs,
                                              std::span<const BrightnessDistribution> af_images,
                                              std::span<const distsim::PairRef> af_pairs,
                                              double min_bdiou);

void annotate_dataset(CohortDataset& ds, const modality::ModalityConfig& cfg);

}  // namespace lumibal::reference
