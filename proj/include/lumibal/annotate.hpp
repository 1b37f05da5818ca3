#pragma once

#include "lumibal/modality.hpp"
#include "lumibal/types.hpp"

namespace lumibal {

// Fills bv and modality on every image, then bvd and pair_type on every pair.
// Runs across images with OpenMP; the result does not depend on thread count.
void annotate_dataset(CohortDataset& ds, const modality::ModalityConfig& cfg);

}  // namespace lumibal
