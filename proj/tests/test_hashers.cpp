#include <gtest/gtest.h>

#include <map>
#include <random>

#include "ccws/dataset.hpp"
#include "ccws/hashers.hpp"
#include "ccws/kernels.hpp"
#include "ccws/parallel.hpp"
#include "support/oracles.hpp"

namespace {

using ccws::SparseVector;
namespace t = ccws::testing;

constexpr std::uint64_t kSeed = 42;
constexpr int kTrials = 10000;

SparseVector planted_half_x() {
  return SparseVector::from_pairs(8, {{0, 2.0}, {1, 0.5}, {3, 0.5}});
}
// Shared mass 2 over total mass 4, so pgmm(x, y, 1) = 0.5.
SparseVector planted_half_y() {
  return SparseVector::from_pairs(8, {{0, 2.0}, {5, 1.0}});
}

TEST(Cws, PlantedPairHasHalfSimilarity) {
  EXPECT_DOUBLE_EQ(ccws::pgmm(planted_half_x(), planted_half_y(), 1.0), 0.5);
}

TEST(Cws, SingleNonzeroAlwaysSampled) {
  const auto u = SparseVector::from_pairs(1000, {{417, 3.25}});
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_EQ(ccws::cws_sample(u, 1.3, s, kSeed).istar, 417u);
    EXPECT_EQ(ccws::cws_zero_bit(u, 0.6, s, kSeed), 417u);
  }
}

TEST(Cws, EmptyVectorIsUndefined) {
  const SparseVector empty(5, {}, {});
  EXPECT_THROW(ccws::cws_sample(empty, 1.0, 0, kSeed), ccws::UndefinedHashError);
  EXPECT_THROW(ccws::minhash(empty, 0, kSeed), ccws::UndefinedHashError);
  EXPECT_THROW(ccws::signrp(empty, 0, kSeed), ccws::UndefinedHashError);
}

TEST(Cws, ScalePIdentity) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> p_dist(0.3, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto u = t::random_sparse(gen, 200, 25, 0.1, 10.0);
    const double p = p_dist(gen);
    const std::uint64_t s = gen();
    EXPECT_EQ(ccws::cws_sample(u, p, s, kSeed),
              ccws::cws_sample(ccws::elementwise_power(u, p), 1.0, s, kSeed));
  }
}

TEST(Cws, WeightsBelowOneGiveNegativeLevels) {
  const auto u = SparseVector::from_pairs(4, {{2, 1e-6}});
  bool negative = false;
  for (std::uint64_t s = 0; s < 50; ++s) negative |= ccws::cws_sample(u, 1.0, s, kSeed).tstar < 0;
  EXPECT_TRUE(negative);
}

TEST(Cws, FullTupleCollisionMatchesPgmm) {
  const auto x = planted_half_x();
  const auto y = planted_half_y();
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) {
    hits += ccws::cws_sample(x, 1.0, s, kSeed) == ccws::cws_sample(y, 1.0, s, kSeed);
  }
  EXPECT_NEAR(hits / double(kTrials), 0.5, 0.015);
}

TEST(Cws, ZeroBitCollisionApproximatesPgmm) {
  const auto x = planted_half_x();
  const auto y = planted_half_y();
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) {
    const auto a = ccws::cws_zero_bit(x, 1.0, s, kSeed);
    EXPECT_EQ(a, ccws::cws_sample(x, 1.0, s, kSeed).istar);
    hits += a == ccws::cws_zero_bit(y, 1.0, s, kSeed);
  }
  EXPECT_NEAR(hits / double(kTrials), 0.5, 0.03);
}

TEST(Cws, CollisionLawAcrossPowers) {
  const auto battery = t::cws_battery();
  for (double p : {0.5, 1.5}) {
    for (const auto& pair : battery) {
      const double q = t::dense_pgmm(t::to_dense(pair.x), t::to_dense(pair.y), p);
      int hits = 0;
      for (int s = 0; s < kTrials; ++s) {
        hits += ccws::cws_sample(pair.x, p, s, 5) == ccws::cws_sample(pair.y, p, s, 5);
      }
      EXPECT_NEAR(hits / double(kTrials), q, t::three_sigma(q, kTrials)) << "p=" << p;
    }
  }
}

// Records every draw so the consistency property can be checked directly.
struct RecordingSource {
  std::uint64_t state;
  std::map<ccws::Dim, std::tuple<double, double, double>>* log;
  std::size_t* calls;
  ccws::CwsDraws operator()(ccws::Dim dim) const {
    const auto d = ccws::cws_draws(state, dim);
    (*log)[dim] = {d.r, d.log_c, d.beta};
    ++*calls;
    return d;
  }
};

TEST(Cws, SharedDimensionsSeeIdenticalDraws) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = t::random_sparse(gen, 60, 30);
    const auto y = t::random_sparse(gen, 60, 30);
    const std::uint64_t state = ccws::rng::sample_prefix(kSeed, trial);
    std::map<ccws::Dim, std::tuple<double, double, double>> lx, ly;
    std::size_t calls = 0;
    const auto sx = ccws::cws_sample_with(x, 1.0, RecordingSource{state, &lx, &calls});
    ccws::cws_sample_with(y, 1.0, RecordingSource{state, &ly, &calls});
    EXPECT_EQ(sx, ccws::cws_sample(x, 1.0, trial, kSeed));
    for (const auto& [dim, draws] : lx) {
      if (ly.contains(dim)) EXPECT_EQ(draws, ly.at(dim));
    }
  }
}

TEST(Cws, CostIsProportionalToSupport) {
  std::vector<std::pair<ccws::Dim, double>> entries;
  for (ccws::Dim i = 0; i < 10; ++i) entries.emplace_back(i * 99991, 1.0 + i);
  const auto u = SparseVector::from_pairs(1'000'000, entries);
  std::map<ccws::Dim, std::tuple<double, double, double>> log;
  std::size_t calls = 0;
  ccws::cws_sample_with(u, 1.0, RecordingSource{ccws::rng::sample_prefix(kSeed, 0), &log, &calls});
  EXPECT_EQ(calls, 10u);
  EXPECT_EQ(log.size(), 10u);
}

TEST(MinHash, IdenticalSupportsCollideAlways) {
  const auto x = SparseVector::from_pairs(50, {{3, 1.0}, {7, 2.0}, {40, 0.5}});
  const auto y = SparseVector::from_pairs(50, {{3, 9.0}, {7, 0.1}, {40, 3.0}});
  for (int s = 0; s < 500; ++s) EXPECT_EQ(ccws::minhash(x, s, kSeed), ccws::minhash(y, s, kSeed));
}

TEST(MinHash, CollisionMatchesBinaryJaccard) {
  const auto x = SparseVector::from_pairs(10, {{1, 1.0}, {2, 1.0}, {3, 1.0}});
  const auto y = SparseVector::from_pairs(10, {{2, 1.0}, {3, 1.0}, {4, 1.0}});
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) hits += ccws::minhash(x, s, kSeed) == ccws::minhash(y, s, kSeed);
  EXPECT_NEAR(hits / double(kTrials), 0.5, 0.015);
}

TEST(MinHash, DisjointSupportsAlmostNeverCollide) {
  const auto x = SparseVector::from_pairs(10, {{1, 1.0}, {2, 1.0}});
  const auto y = SparseVector::from_pairs(10, {{5, 1.0}, {6, 1.0}});
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) hits += ccws::minhash(x, s, kSeed) == ccws::minhash(y, s, kSeed);
  EXPECT_LE(hits / double(kTrials), 1e-3);
}

TEST(SignRp, PositiveScalingPreservesSign) {
  const auto x = SparseVector::from_pairs(10, {{1, 1.0}, {4, 2.5}, {8, 0.3}});
  const auto y = SparseVector::from_pairs(10, {{1, 2.0}, {4, 5.0}, {8, 0.6}});
  for (int s = 0; s < 1000; ++s) EXPECT_EQ(ccws::signrp(x, s, kSeed), ccws::signrp(y, s, kSeed));
}

TEST(SignRp, OrthogonalPairCollidesHalfTheTime) {
  const auto x = SparseVector::from_pairs(10, {{1, 1.0}, {2, 2.0}});
  const auto y = SparseVector::from_pairs(10, {{5, 3.0}, {6, 1.0}});
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) hits += ccws::signrp(x, s, kSeed) == ccws::signrp(y, s, kSeed);
  EXPECT_NEAR(hits / double(kTrials), 0.5, 0.015);
}

TEST(SignRp, OppositeVectorsNeverCollide) {
  const std::vector<double> dense = {1.0, -2.0, 0.5, 3.0, -1.0};
  std::vector<double> neg = dense;
  for (double& v : neg) v = -v;
  const auto x = ccws::SignedVector::from_dense(dense);
  const auto y = ccws::SignedVector::from_dense(neg);
  int hits = 0;
  for (int s = 0; s < kTrials; ++s) hits += ccws::signrp(x, s, kSeed) == ccws::signrp(y, s, kSeed);
  EXPECT_LE(hits / double(kTrials), 1e-3);
}

TEST(HashVector, SingletonMatchesSingleSample) {
  const auto u = planted_half_x();
  const ccws::HashMethod cws{ccws::HashFamily::kCws, 1.2, ccws::CwsBits::kZero};
  EXPECT_EQ(ccws::hash_vector(u, cws, 1, kSeed).values,
            std::vector<std::uint64_t>{ccws::cws_zero_bit(u, 1.2, 0, kSeed)});
  const ccws::HashMethod full{ccws::HashFamily::kCws, 1.2, ccws::CwsBits::kFull};
  EXPECT_EQ(ccws::hash_vector(u, full, 1, kSeed).values,
            std::vector<std::uint64_t>{ccws::pack_cws(ccws::cws_sample(u, 1.2, 0, kSeed))});
  const ccws::HashMethod mh{ccws::HashFamily::kMinHash};
  EXPECT_EQ(ccws::hash_vector(u, mh, 1, kSeed).values[0], ccws::minhash(u, 0, kSeed));
  const ccws::HashMethod rp{ccws::HashFamily::kSignRp};
  EXPECT_EQ(ccws::hash_vector(u, rp, 1, kSeed).values[0], ccws::signrp(u, 0, kSeed) ? 1u : 0u);
  EXPECT_THROW(ccws::hash_vector(u, mh, 0, kSeed), ccws::InvalidArgumentError);
}

TEST(HashVector, IdenticalUsersIdenticalVectors) {
  const auto u = planted_half_y();
  for (auto family : {ccws::HashFamily::kCws, ccws::HashFamily::kMinHash, ccws::HashFamily::kSignRp}) {
    const ccws::HashMethod m{family, 0.8};
    EXPECT_EQ(ccws::hash_vector(u, m, 75, kSeed), ccws::hash_vector(u, m, 75, kSeed));
  }
}

TEST(HashVector, MoreSimilarPairsAgreeOnMorePositions) {
  // Pairs built as a shared part plus private parts; private mass sets pgmm.
  std::mt19937_64 gen(11);
  const ccws::HashMethod cws{ccws::HashFamily::kCws, 1.0};
  auto make_pair = [&](double target, std::uint64_t offset) {
    std::vector<std::pair<ccws::Dim, double>> shared;
    std::uniform_real_distribution<double> w(0.5, 2.0);
    double mass = 0.0;
    for (ccws::Dim i = 0; i < 10; ++i) {
      shared.emplace_back(static_cast<ccws::Dim>(offset + i), w(gen));
      mass += shared.back().second;
    }
    const double extra = 0.5 * (mass / target - mass);
    auto x = shared;
    auto y = shared;
    x.emplace_back(static_cast<ccws::Dim>(offset + 20), extra);
    y.emplace_back(static_cast<ccws::Dim>(offset + 30), extra);
    return t::Pair{SparseVector::from_pairs(1000, x), SparseVector::from_pairs(1000, y)};
  };
  auto agreement = [&](const t::Pair& p, std::uint64_t seed) {
    const auto a = ccws::hash_vector(p.x, cws, 100, seed);
    const auto b = ccws::hash_vector(p.y, cws, 100, seed);
    int same = 0;
    for (int k = 0; k < 100; ++k) same += a.values[k] == b.values[k];
    return same;
  };
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const auto close = make_pair(0.9, 0);
    const auto far = make_pair(0.1, 100);
    EXPECT_NEAR(ccws::pgmm(close.x, close.y, 1.0), 0.9, 1e-9);
    EXPECT_NEAR(ccws::pgmm(far.x, far.y, 1.0), 0.1, 1e-9);
    EXPECT_GT(agreement(close, inst), agreement(far, inst));
  }
}

TEST(HashDataset, RowsMatchPerUserHashVectors) {
  std::mt19937_64 gen(5);
  ccws::Dataset ds(300);
  for (int i = 0; i < 120; ++i) ds.add("u" + std::to_string(i), t::random_sparse(gen, 300, 20));
  const std::vector<ccws::HashMethod> methods = {
      {ccws::HashFamily::kCws, 1.0}, {ccws::HashFamily::kCws, 0.7, ccws::CwsBits::kFull},
      {ccws::HashFamily::kMinHash}, {ccws::HashFamily::kSignRp}};
  for (unsigned threads : {1u, 3u}) {
    ccws::set_thread_count(threads);
    for (const auto& method : methods) {
      const auto matrix = ccws::hash_dataset(ds, method, 9, kSeed);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto row = matrix.row(i);
        EXPECT_EQ(std::vector<std::uint64_t>(row.begin(), row.end()),
                  ccws::hash_vector(ds[i].vector, method, 9, kSeed).values);
      }
    }
  }
  ccws::set_thread_count(0);
}

TEST(HashFamily, NamesRoundTrip) {
  for (auto f : {ccws::HashFamily::kCws, ccws::HashFamily::kMinHash, ccws::HashFamily::kSignRp}) {
    EXPECT_EQ(ccws::parse_hash_family(ccws::to_string(f)), f);
  }
  EXPECT_THROW(ccws::parse_hash_family("simhash"), ccws::ConfigError);
}

}  // namespace
