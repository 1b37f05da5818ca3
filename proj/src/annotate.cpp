#include "lumibal/annotate.hpp"

#include <exception>
#include <optional>

#include "lumibal/brightness.hpp"
#include "lumibal/error.hpp"

namespace lumibal {

void annotate_dataset(CohortDataset& ds, const modality::ModalityConfig& cfg) {
  cfg.validate();
  auto& images = ds.mutable_images();
  const auto n = static_cast<std::ptrdiff_t>(images.size());

  // Exceptions must not escape an OpenMP region; keep the first one by index.
  std::vector<std::optional<Error>> failures(images.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& img = images[i];
    try {
      img.bv = brightness::brightness_value(img.dist);
      img.modality = modality::classify(img.dist, cfg);
    } catch (const Error& e) {
      failures[i].emplace(e.code(), "image '" + img.image_id + "': " + e.what());
    }
  }
  for (auto& f : failures) {
    if (f) throw *f;
  }

  for (auto& p : ds.mutable_pairs()) {
    const auto& x = ds.image_x(p);
    const auto& y = ds.image_y(p);
    p.bvd = brightness::bvd(*x.bv, *y.bv);
    p.pair_type = modality::pair_type(*x.modality, *y.modality);
  }
}

}  // namespace lumibal
