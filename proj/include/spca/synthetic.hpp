#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "spca/data.hpp"
#include "spca/linalg.hpp"
#include "spca/types.hpp"

namespace spca {

/// Zero-mean low-rank "images": x = B z with B an orthonormal d x rank basis
/// whose columns are scaled by exp(-decay * r), and z drawn per class as
/// class_spread * mu_c + N(0, I).
struct SyntheticSpec {
  Index height = 4;
  Index width = 5;
  Index rank = 3;
  Index classes = 1;
  Index per_class = 60;
  double decay = 0.0;
  double class_spread = 0.0;
  std::uint64_t seed = 0;
};

inline ImageDataset make_synthetic(const SyntheticSpec& spec) {
  const Index d = spec.height * spec.width;
  if (spec.rank < 1 || spec.rank > d) detail::fail("make_synthetic: rank must be in [1, ", d, "]");
  if (spec.classes < 1 || spec.per_class < 1) detail::fail("make_synthetic: need at least one sample per class");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix B = random_orthonormal(d, spec.rank, rng);
  for (Index r = 0; r < spec.rank; ++r) B.col(r) *= std::exp(-spec.decay * static_cast<double>(r));

  ImageDataset ds;
  ds.height = spec.height;
  ds.width = spec.width;
  ds.pixels.resize(d, spec.classes * spec.per_class);
  Index col = 0;
  for (Index c = 0; c < spec.classes; ++c) {
    Vector mu(spec.rank);
    for (Index r = 0; r < spec.rank; ++r) mu[r] = spec.class_spread * normal(rng);
    const std::string cname = "class" + std::to_string(c);
    ds.class_names.push_back(cname);
    for (Index s = 0; s < spec.per_class; ++s, ++col) {
      Vector z(spec.rank);
      for (Index r = 0; r < spec.rank; ++r) z[r] = mu[r] + normal(rng);
      ds.pixels.col(col) = B * z;
      ds.labels.push_back(static_cast<int>(c));
      ds.names.push_back(cname + "/s" + std::to_string(s) + ".pgm");
    }
  }
  return ds;
}

/// The 20 x 60 rank-3 set used by the outlier checks: 4x5 images, 30% of
/// columns blacked out with a 2x2 block, columns normalized afterwards.
inline SyntheticSpec outlier_fixture_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.height = 4;
  s.width = 5;
  s.rank = 3;
  s.classes = 1;
  s.per_class = 60;
  s.seed = seed;
  return s;
}

inline constexpr double kOutlierFixtureSideRatio = 0.5;

inline ImageDataset outlier_fixture(std::uint64_t seed) {
  ImageDataset ds = make_synthetic(outlier_fixture_spec(seed));
  OcclusionOptions occ;
  occ.fraction = 0.3;
  occ.side_ratio = kOutlierFixtureSideRatio;
  occ.fill = OcclusionFill::black;
  occ.seed = seed + 1000;
  return normalize_samples(occlude(std::move(ds), occ));
}

/// Benchmark: 16x16 images, rank 100 with a decaying spectrum, 10 classes of
/// 20 images.
inline SyntheticSpec benchmark_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.height = 16;
  s.width = 16;
  s.rank = 100;
  s.classes = 10;
  s.per_class = 20;
  s.decay = 0.03;
  s.class_spread = 1.0;
  s.seed = seed;
  return s;
}

/// Train/test pair following the evaluation protocol: per-class half split,
/// occlusion of the training half, normalization after occlusion; the test
/// half stays clean and is normalized from the pristine values.
struct BenchmarkData {
  ImageDataset train;
  ImageDataset test;
};

inline BenchmarkData prepare_benchmark(const ImageDataset& ds, double train_ratio, std::uint64_t split_seed,
                                       const OcclusionOptions& occ) {
  Split s = split_per_class(ds, train_ratio, split_seed);
  return {normalize_samples(occlude(std::move(s.train), occ)), normalize_samples(std::move(s.test))};
}

inline BenchmarkData synthetic_benchmark(std::uint64_t seed) {
  OcclusionOptions occ;
  occ.fraction = 0.3;
  occ.side_ratio = 0.5;
  occ.fill = OcclusionFill::black;
  occ.seed = seed + 2000;
  return prepare_benchmark(make_synthetic(benchmark_spec(seed)), 0.5, seed + 1000, occ);
}

}  // namespace spca
