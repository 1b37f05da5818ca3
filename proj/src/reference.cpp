#include "lumibal/reference.hpp"

#include <algorithm>

#include "lumibal/brightness.hpp"

namespace lumibal::reference {

std::vector<distsim::SetScore> all_set_scores(std::span<const BrightnessDistribution> cf_images,
                                              std::span<const distsim::PairRef> cf_pairs,
                                              std::span<const BrightnessDistribution> af_images,
                                              std::span<const distsim::PairRef> af_pairs,
                                              double min_bdiou) {
  const double threshold = std::clamp(min_bdiou, 0.0, 1.0);
  std::vector<distsim::SetScore> out;
  for (std::size_t i = 0; i < cf_pairs.size(); ++i) {
    const auto& c1 = cf_images[cf_pairs[i].x];
    const auto& c2 = cf_images[cf_pairs[i].y];
    for (std::size_t k = 0; k < af_pairs.size(); ++k) {
      const auto v = distsim::bdiou_set(c1, c2, af_images[af_pairs[k].x], af_images[af_pairs[k].y]);
      if (v.bdiou >= threshold) {
        out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), v.bdiou,
                       v.assignment});
      }
    }
  }
  return out;
}

void annotate_dataset(CohortDataset& ds, const modality::ModalityConfig& cfg) {
  cfg.validate();
  for (auto& img : ds.mutable_images()) {
    img.bv = brightness::brightness_value(img.dist);
    img.modality = modality::classify(img.dist, cfg);
  }
  for (auto& p : ds.mutable_pairs()) {
    p.bvd = brightness::bvd(*ds.image_x(p).bv, *ds.image_y(p).bv);
    p.pair_type = modality::pair_type(*ds.image_x(p).modality, *ds.image_y(p).modality);
  }
}

}  // namespace lumibal::reference
