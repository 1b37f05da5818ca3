#include <doctest.h>

#include <random>
#include <sstream>

#include "lumibal/error.hpp"
#include "lumibal/io.hpp"
#include "lumibal/types.hpp"
#include "test_support.hpp"

using namespace lumibal;
using namespace lumibal::testing;

namespace {

std::string record_line(const std::string& id, const std::string& subject, const std::string& cohort,
                        const std::vector<int>& counts) {
  std::string s = id + "\t" + subject + "\t" + cohort + "\t";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(counts[i]);
  }
  return s + "\n";
}

std::vector<int> bins_with(int level, int count) {
  std::vector<int> c(256, 0);
  c[static_cast<std::size_t>(level)] = count;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
}

CohortDataset four_images() {
  CohortDataset ds(Cohort::A);
  ds.set_images({image("s1_a", "s1", Cohort::A, dist_from_values({10})),
                 image("s1_b", "s1", Cohort::A, dist_from_values({20})),
                 image("s2_a", "s2", Cohort::A, dist_from_values({30})),
                 image("s2_b", "s2", Cohort::A, dist_from_values({40}))});
  return ds;
}

}  // namespace

TEST_CASE("load_images rejects an all-zero record") {
  std::istringstream in(std::string(kHistogramSchema) + "\n" + record_line("i1", "s1", "A", std::vector<int>(256, 0)));
  const auto msg = message_of([&] { read_images(in, Cohort::A, "f"); });
  CHECK(msg.find("empty distribution") != std::string::npos);
  CHECK(msg.find("f:2:") != std::string::npos);
}

TEST_CASE("load_images rejects a 255-bin record") {
  std::istringstream in(std::string(kHistogramSchema) + "\n" + record_line("i1", "s1", "A", std::vector<int>(255, 1)));
  const auto msg = message_of([&] { read_images(in, Cohort::A, "f"); });
  CHECK(msg.find("expected 256 bins") != std::string::npos);
}

TEST_CASE("load_images rejects negative counts and duplicate ids") {
  auto neg = bins_with(3, 4);
  neg[7] = -1;
  std::istringstream bad(std::string(kHistogramSchema) + "\n" + record_line("i1", "s1", "A", neg));
  CHECK(code_of([&] { read_images(bad, Cohort::A); }) == ErrorCode::kIngestion);

  std::istringstream dup(std::string(kHistogramSchema) + "\n" + record_line("i1", "s1", "A", bins_with(3, 4)) +
                         record_line("i1", "s2", "A", bins_with(5, 4)));
  CHECK(code_of([&] { read_images(dup, Cohort::A); }) == ErrorCode::kConflict);
}

TEST_CASE("load_images rejects a missing schema tag and a foreign cohort") {
  std::istringstream untagged(record_line("i1", "s1", "A", bins_with(3, 4)));
  CHECK(code_of([&] { read_images(untagged, Cohort::A); }) == ErrorCode::kIngestion);
  std::istringstream other(std::string(kHistogramSchema) + "\n" + record_line("i1", "s1", "B", bins_with(3, 4)));
  CHECK(code_of([&] { read_images(other, Cohort::A); }) == ErrorCode::kIngestion);
}

TEST_CASE("load_images keeps three valid records and their ids") {
  std::istringstream in(std::string(kHistogramSchema) + "\n" + record_line("x1", "s1", "A", bins_with(1, 5)) +
                        "# comment\n\n" + record_line("x2", "s1", "A", bins_with(2, 5)) +
                        record_line("x3", "s2", "A", bins_with(3, 5)));
  const auto imgs = read_images(in, Cohort::A);
  REQUIRE(imgs.size() == 3);
  CHECK(imgs[0].image_id == "x1");
  CHECK(imgs[1].image_id == "x2");
  CHECK(imgs[2].image_id == "x3");
  CHECK_FALSE(imgs[0].bv.has_value());
  CHECK_FALSE(imgs[0].modality.has_value());
}

TEST_CASE("load_pairs resolves references and enforces integrity") {
  const auto images = four_images();
  const std::string head = std::string(kPairSchema) + "\npair_id,image_x,image_y,score\n";

  SUBCASE("two valid pairs") {
    std::istringstream in(head + "p1,s1_a,s1_b,0.75\np2,s2_a,s2_b,-0.25\n");
    auto ds = images;
    ds.set_pairs(read_pairs(in, ds));
    REQUIRE(ds.pairs().size() == 2);
    CHECK(ds.image_x(ds.pairs()[0]).image_id == "s1_a");
    CHECK(ds.image_y(ds.pairs()[1]).image_id == "s2_b");
    CHECK(ds.pairs()[1].score == -0.25);
  }
  SUBCASE("unknown image id") {
    std::istringstream in(head + "p1,s1_a,nope,0.5\n");
    CHECK(code_of([&] { read_pairs(in, images); }) == ErrorCode::kReference);
  }
  SUBCASE("score out of range") {
    std::istringstream in(head + "p1,s1_a,s1_b,1.7\n");
    CHECK(code_of([&] { read_pairs(in, images); }) == ErrorCode::kRange);
  }
  SUBCASE("cross-subject pair") {
    std::istringstream in(head + "p1,s1_a,s2_b,0.5\n");
    CHECK(code_of([&] { read_pairs(in, images); }) == ErrorCode::kIntegrity);
  }
  SUBCASE("self pair") {
    std::istringstream in(head + "p1,s1_a,s1_a,0.5\n");
    CHECK(code_of([&] { read_pairs(in, images); }) == ErrorCode::kIntegrity);
  }
  SUBCASE("duplicate pair id") {
    std::istringstream in(head + "p1,s1_a,s1_b,0.5\np1,s2_a,s2_b,0.5\n");
    CHECK(code_of([&] { read_pairs(in, images); }) == ErrorCode::kConflict);
  }
}

TEST_CASE("dataset_summary counts cardinalities") {
  CHECK(dataset_summary(CohortDataset(Cohort::B)) == DatasetSummary{0, 0, 0});

  CohortDataset ds(Cohort::A);
  ds.set_images({image("a1", "s1", Cohort::A, dist_from_values({1})),
                 image("a2", "s1", Cohort::A, dist_from_values({2})),
                 image("a3", "s1", Cohort::A, dist_from_values({3})),
                 image("b1", "s2", Cohort::A, dist_from_values({4})),
                 image("b2", "s2", Cohort::A, dist_from_values({5}))});
  ds.set_pairs({pair("p1", "a1", "a2", 0.1), pair("p2", "a1", "a3", 0.2), pair("p3", "b1", "b2", 0.3)});
  CHECK(dataset_summary(ds) == DatasetSummary{5, 2, 3});
}

TEST_CASE("write then read reproduces random datasets field for field") {
  std::mt19937_64 rng(20241016);
  for (int round = 0; round < 20; ++round) {
    const Cohort cohort = round % 2 ? Cohort::B : Cohort::A;
    std::vector<ImageRecord> imgs;
    std::vector<MatedPair> pairs;
    const int subjects = 1 + static_cast<int>(rng() % 6);
    for (int s = 0; s < subjects; ++s) {
      const int per = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < per; ++i) {
        imgs.push_back(image("im" + std::to_string(s) + "_" + std::to_string(i), "sub" + std::to_string(s), cohort,
                             random_dist(rng)));
        if (round % 3 == 0) {
          imgs.back().bv = HalfStep::from_halves(static_cast<int>(rng() % 511));
          imgs.back().modality = static_cast<Modality>(rng() % 3);
        }
      }
      for (int i = 0; i < per; ++i) {
        for (int j = i + 1; j < per; ++j) {
          const double score = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
          pairs.push_back(pair("p" + std::to_string(s) + "_" + std::to_string(i) + std::to_string(j),
                               "im" + std::to_string(s) + "_" + std::to_string(i),
                               "im" + std::to_string(s) + "_" + std::to_string(j), score));
        }
      }
    }
    CohortDataset ds(cohort);
    ds.set_images(imgs);
    ds.set_pairs(pairs);

    std::ostringstream img_out;
    std::ostringstream pair_out;
    write_images(img_out, ds.images(), true);
    write_pairs(pair_out, ds.pairs());

    std::istringstream img_in(img_out.str());
    CohortDataset back(cohort);
    back.set_images(read_images(img_in, cohort));
    std::istringstream pair_in(pair_out.str());
    back.set_pairs(read_pairs(pair_in, back));
    CHECK(back == ds);

    for (const auto& img : back.images()) {
      double sum = 0.0;
      for (int v = 0; v < kLevels; ++v) sum += img.dist.relfreq(v);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (const auto& p : back.pairs()) {
      CHECK(back.image_x(p).subject_id == back.image_y(p).subject_id);
    }
  }
}

TEST_CASE("set_images rejects duplicates and re-resolves existing pairs") {
  auto ds = four_images();
  ds.set_pairs({pair("p1", "s2_a", "s2_b", 0.5)});
  auto imgs = ds.images();
  std::swap(imgs[0], imgs[3]);
  ds.set_images(imgs);
  CHECK(ds.image_x(ds.pairs()[0]).image_id == "s2_a");
  imgs.push_back(imgs.front());
  CHECK(code_of([&] { ds.set_images(imgs); }) == ErrorCode::kConflict);
}
