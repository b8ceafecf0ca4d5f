#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "ted/knn.hpp"
#include "ted/rng.hpp"

using namespace ted;

namespace {

MatrixXd gaussian(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = normal_unit(rng);
  return x;
}

EmbeddingIndex<double> small_index(const MatrixXd& embeddings, const MatrixXd& labels,
                                   const MatrixXd& explanations, SpaceDescriptor y_space,
                                   SpaceDescriptor e_space) {
  return build_index<double>(embeddings, labels, explanations, {}, std::move(y_space), std::move(e_space));
}

/// Brute-force scan straight from the unnormalized embeddings.
std::vector<Neighbor<double>> oracle_neighbors(const MatrixXd& raw, const VectorXd& q, Index k) {
  std::vector<Neighbor<double>> all;
  for (Index i = 0; i < raw.rows(); ++i) {
    const double cos = raw.row(i).dot(q.transpose()) / (raw.row(i).norm() * q.norm());
    all.push_back({i, 1.0 - cos});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
  });
  all.resize(static_cast<std::size_t>(std::min(k, raw.rows())));
  return all;
}

}  // namespace

TEST_CASE("index rows are unit-normalized at insertion") {
  const MatrixXd emb = 3.7 * gaussian(3, 64, 1);
  const auto idx = small_index(emb, MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  CHECK(idx.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(idx.embeddings.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("duplicates are stored, empty and zero-norm inputs are rejected") {
  MatrixXd emb(2, 3);
  emb << 1, 0, 0, 1, 0, 0;
  const auto idx = small_index(emb, MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  CHECK(idx.size() == 2);

  CHECK_THROWS_AS(small_index(MatrixXd(0, 3), MatrixXd(0, 1), MatrixXd(0, 1),
                              SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar()),
                  std::invalid_argument);

  MatrixXd with_zero(2, 3);
  with_zero << 1, 0, 0, 0, 0, 0;
  CHECK_THROWS_WITH_AS(
      build_index<double>(with_zero, MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1), {"row-a", "row-b"},
                          SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar()),
      doctest::Contains("row-b"), std::invalid_argument);
}

TEST_CASE("query distances follow the cosine of the angle") {
  MatrixXd emb(3, 2);
  emb << 1, 0, 0, 1, -1, 0;
  const auto idx = small_index(emb, MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  VectorXd q(2);
  q << 1, 0;
  const auto neighbors = query_neighbors(idx, q, 3);
  REQUIRE(neighbors.size() == 3);
  CHECK(neighbors[0].row == 0);
  CHECK(neighbors[0].distance == doctest::Approx(0.0));
  CHECK(neighbors[1].row == 1);
  CHECK(neighbors[1].distance == doctest::Approx(1.0));
  CHECK(neighbors[2].row == 2);
  CHECK(neighbors[2].distance == doctest::Approx(2.0));

  const VectorXd zero = VectorXd::Zero(2);
  CHECK_THROWS_AS(query_neighbors(idx, zero, 1), std::invalid_argument);
}

TEST_CASE("a stored row is its own nearest neighbor") {
  const MatrixXd emb = gaussian(40, 16, 2);
  const auto idx = small_index(emb, MatrixXd::Zero(40, 1), MatrixXd::Zero(40, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  for (Index i = 0; i < 40; i += 7) {
    const VectorXd q = emb.row(i).transpose();
    const auto neighbors = query_neighbors(idx, q, 1);
    CHECK(neighbors[0].row == i);
    CHECK(neighbors[0].distance == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("query equals the brute-force oracle on random instances") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 2 + static_cast<Index>(uniform_index(rng, 200));
    const Index d = 2 + static_cast<Index>(uniform_index(rng, 24));
    const MatrixXd emb = gaussian(n, d, 100 + static_cast<std::uint64_t>(trial));
    const auto idx = small_index(emb, MatrixXd::Zero(n, 1), MatrixXd::Zero(n, 1),
                                 SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
    const VectorXd q = gaussian(1, d, 900 + static_cast<std::uint64_t>(trial)).row(0).transpose();
    for (Index k : {Index(1), Index(5), n}) {
      const auto got = query_neighbors(idx, q, k);
      const auto expected = oracle_neighbors(emb, q, k);
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].row == expected[i].row);
        CHECK(std::abs(got[i].distance - expected[i].distance) <= 1e-12);
      }
    }
  }
}

TEST_CASE("tied distances break toward the lower row index") {
  MatrixXd emb(3, 2);
  emb << 0, 1, 1, 0, 2, 0;  // rows 1 and 2 are colinear: identical distance
  const auto idx = small_index(emb, MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  VectorXd q(2);
  q << 1, 0;
  const auto neighbors = query_neighbors(idx, q, 2);
  CHECK(neighbors[0].row == 1);
  CHECK(neighbors[1].row == 2);
}

TEST_CASE("k = 1 returns the nearest payload exactly, any sigma") {
  const MatrixXd emb = gaussian(20, 8, 4);
  const MatrixXd labels = gaussian(20, 1, 5);
  const MatrixXd expl = gaussian(20, 3, 6);
  const auto idx = small_index(emb, labels, expl, SpaceDescriptor::continuous_scalar(),
                               SpaceDescriptor::continuous_vector(3));
  const VectorXd q = gaussian(1, 8, 7).row(0).transpose();
  const auto nearest = query_neighbors(idx, q, 1)[0];
  for (double sigma : {0.01, 1.0, 100.0}) {
    KnnConfig cfg;
    cfg.k = 1;
    cfg.adaptive_sigma = false;
    cfg.sigma = sigma;
    const auto pred = predict(idx, q, cfg);
    CHECK(pred.label(0) == labels(nearest.row, 0));
    CHECK(pred.explanation == expl.row(nearest.row).transpose());
    CHECK(pred.evidence.size() == 1);
    CHECK(pred.evidence[0].weight == 1.0);
  }
}

TEST_CASE("two-neighbor kernel weighting gives the hand-computed mean") {
  // distances 0 and sqrt(2 ln 2): kernel weights 1 and 0.5 at sigma=1
  const double d2 = std::sqrt(2.0 * std::log(2.0));
  const double cos2 = 1.0 - d2;
  MatrixXd emb(2, 2);
  emb << 1, 0, cos2, std::sqrt(1.0 - cos2 * cos2);
  MatrixXd labels(2, 1);
  labels << 0, 1;
  const auto idx = small_index(emb, labels, MatrixXd::Zero(2, 1), SpaceDescriptor::continuous_scalar(),
                               SpaceDescriptor::continuous_scalar());
  VectorXd q(2);
  q << 1, 0;
  KnnConfig cfg;
  cfg.k = 2;
  cfg.adaptive_sigma = false;
  cfg.sigma = 1.0;
  const auto pred = predict(idx, q, cfg);
  CHECK(pred.label(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(pred.evidence[0].weight == doctest::Approx(2.0 / 3.0));
  CHECK(pred.evidence[1].weight == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("categorical payloads use a weighted vote") {
  MatrixXd emb(3, 2);
  emb << 1, 0, 0.8, 0.6, 0.8, -0.6;  // equal distances for rows 1 and 2... row 0 exact
  MatrixXd labels(3, 1);
  labels << 0, 0, 1;  // two votes for class 0
  const auto idx = small_index(emb, labels, labels, SpaceDescriptor::categorical(2),
                               SpaceDescriptor::categorical(2));
  VectorXd q(2);
  q << 1, 0;
  KnnConfig cfg;
  cfg.k = 3;
  cfg.adaptive_sigma = false;
  cfg.sigma = 10.0;  // near-uniform weights
  const auto pred = predict(idx, q, cfg);
  CHECK(pred.label(0) == 0.0);
  CHECK(pred.explanation(0) == 0.0);
}

TEST_CASE("vote ties resolve toward the smallest class index") {
  MatrixXd emb(2, 2);
  emb << 0.8, 0.6, 0.8, -0.6;  // symmetric around the query
  MatrixXd labels(2, 1);
  labels << 1, 0;
  const auto idx = small_index(emb, labels, labels, SpaceDescriptor::categorical(3),
                               SpaceDescriptor::categorical(3));
  VectorXd q(2);
  q << 1, 0;
  KnnConfig cfg;
  cfg.k = 2;
  const auto pred = predict(idx, q, cfg);
  CHECK(pred.label(0) == 0.0);
}

TEST_CASE("weights are a normalized, monotone convex combination") {
  const MatrixXd emb = gaussian(100, 10, 8);
  const MatrixXd labels = gaussian(100, 2, 9);
  const auto idx = small_index(emb, labels, labels, SpaceDescriptor::continuous_vector(2),
                               SpaceDescriptor::continuous_vector(2));
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd q = gaussian(1, 10, 500 + static_cast<std::uint64_t>(trial)).row(0).transpose();
    KnnConfig cfg;
    cfg.k = 10;
    const auto pred = predict(idx, q, cfg);
    double sum = 0;
    for (std::size_t i = 0; i < pred.evidence.size(); ++i) {
      sum += pred.evidence[i].weight;
      CHECK(pred.evidence[i].weight >= 0.0);
      if (i > 0) {
        CHECK(pred.evidence[i - 1].distance <= pred.evidence[i].distance);
        CHECK(pred.evidence[i - 1].weight >= pred.evidence[i].weight);  // kernel monotonicity
      }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // convexity: prediction lies inside the neighbor payload box
    for (Index c = 0; c < 2; ++c) {
      double lo = 1e300, hi = -1e300;
      for (const auto& ev : pred.evidence) {
        lo = std::min(lo, labels(ev.row, c));
        hi = std::max(hi, labels(ev.row, c));
      }
      CHECK(pred.label(c) >= lo - 1e-12);
      CHECK(pred.label(c) <= hi + 1e-12);
    }
  }
}

TEST_CASE("kernel underflow falls back to uniform weights") {
  MatrixXd emb(3, 2);
  emb << 0, 1, -1, 0, 0.5, 0.5;
  const auto idx = small_index(emb, MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  VectorXd q(2);
  q << 1, 0;  // strictly positive distance to every row
  KnnConfig cfg;
  cfg.k = 3;
  cfg.adaptive_sigma = false;
  cfg.sigma = 1e-200;
  const auto pred = predict(idx, q, cfg);
  CHECK(pred.uniform_weight_fallback);
  for (const auto& ev : pred.evidence) CHECK(ev.weight == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("k larger than the index clamps with a warning flag") {
  const MatrixXd emb = gaussian(4, 3, 11);
  const auto idx = small_index(emb, MatrixXd::Zero(4, 1), MatrixXd::Zero(4, 1),
                               SpaceDescriptor::continuous_scalar(), SpaceDescriptor::continuous_scalar());
  const VectorXd q = emb.row(0).transpose();
  KnnConfig cfg;
  cfg.k = 10;
  const auto pred = predict(idx, q, cfg);
  CHECK(pred.clamped_k);
  CHECK(pred.evidence.size() == 4);
}

TEST_CASE("small sigma perturbations preserve a categorical argmax") {
  const MatrixXd emb = gaussian(30, 5, 20);
  MatrixXd labels(30, 1);
  for (Index i = 0; i < 30; ++i) labels(i, 0) = static_cast<double>(i % 3);
  const auto idx = small_index(emb, labels, labels, SpaceDescriptor::categorical(3),
                               SpaceDescriptor::categorical(3));
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd q = gaussian(1, 5, 700 + static_cast<std::uint64_t>(trial)).row(0).transpose();
    KnnConfig cfg;
    cfg.k = 7;
    cfg.adaptive_sigma = false;
    cfg.sigma = 0.8;
    const auto base = predict(idx, q, cfg);
    cfg.sigma = 0.8 * (1.0 + 1e-9);
    const auto nudged = predict(idx, q, cfg);
    CHECK(base.label(0) == nudged.label(0));
  }
}

TEST_CASE("prediction is deterministic") {
  const MatrixXd emb = gaussian(50, 6, 12);
  const MatrixXd labels = gaussian(50, 1, 13);
  const auto idx = small_index(emb, labels, labels, SpaceDescriptor::continuous_scalar(),
                               SpaceDescriptor::continuous_scalar());
  const VectorXd q = gaussian(1, 6, 14).row(0).transpose();
  KnnConfig cfg;
  cfg.k = 7;
  const auto a = predict(idx, q, cfg);
  const auto b = predict(idx, q, cfg);
  CHECK(a.label == b.label);
  for (std::size_t i = 0; i < a.evidence.size(); ++i) {
    CHECK(a.evidence[i].row == b.evidence[i].row);
    CHECK(a.evidence[i].weight == b.evidence[i].weight);
  }
}
