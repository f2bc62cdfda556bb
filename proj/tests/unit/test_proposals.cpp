#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "minsm/mcmc_engine.hpp"
#include "minsm/proposals.hpp"
#include "support.hpp"

using namespace minsm;
using minsm::test::within_se;

namespace {

constexpr std::size_t kDraws = 100000;

std::vector<PointId> sorted(std::vector<PointId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Angle via the half-chord identity, independent of the acos form.
long double srp_pair_prob(VectorView a, VectorView b, bool negate_a) {
  long double na = 0, nb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    na += static_cast<long double>(a[j]) * a[j];
    nb += static_cast<long double>(b[j]) * b[j];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  long double diff = 0, sum = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const long double x = (negate_a ? -a[j] : a[j]) / na;
    const long double y = b[j] / nb;
    diff += (x - y) * (x - y);
    sum += (x + y) * (x + y);
  }
  const long double angle = 2.0L * std::atan2(std::sqrt(diff), std::sqrt(sum));
  return 1.0L - angle / 3.14159265358979323846264338327950288L;
}

// Lowest-indexed table where the query's code matches some point's code,
// recomputed from raw hashes.
std::vector<PointId> first_bucket(const Dataset& data, const HashSpec& spec, const FeatureVector& q) {
  for (int l = 0; l < spec.L; ++l) {
    const HashCode code = srp_hash(q, spec, static_cast<std::size_t>(l));
    std::vector<PointId> bucket;
    for (PointId p = 0; p < data.size(); ++p) {
      if (srp_hash(data.point(p), spec, static_cast<std::size_t>(l)) == code) bucket.push_back(p);
    }
    if (!bucket.empty()) return bucket;
  }
  return {};
}

// Brute-force double sum, v outer and u inner, in extended precision.
long double brute_double_sum(const Dataset& data, const HashSpec& spec,
                             const std::vector<PointId>& u_side,
                             const std::vector<PointId>& v_side, bool dissimilar) {
  long double total = 0;
  for (PointId v : v_side) {
    for (PointId u : u_side) {
      FeatureVector q(data.point(u).begin(), data.point(u).end());
      if (dissimilar) {
        for (double& x : q) x = -x;
      }
      const auto bucket = first_bucket(data, spec, q);
      long double frac = 0;
      if (!bucket.empty()) {
        std::size_t hits = 0;
        for (PointId b : bucket) {
          hits += std::count(v_side.begin(), v_side.end(), b) > 0 ? 1 : 0;
        }
        frac = static_cast<long double>(hits) / bucket.size();
      }
      const long double p = srp_pair_prob(data.point(u), data.point(v), dissimilar);
      const long double hit = 1.0L - std::pow(1.0L - std::pow(p, spec.K), spec.L);
      total += hit * frac / static_cast<long double>(data.size());
    }
  }
  return total;
}

// Outcome counts keyed by move; `ordered` keeps split sides as (left | right),
// otherwise the side holding the lowest point comes first.
template <typename Kernel>
std::map<std::string, std::pair<std::size_t, double>> tally(std::size_t draws, Kernel&& kernel,
                                                             bool ordered = true) {
  std::map<std::string, std::pair<std::size_t, double>> out;
  for (std::size_t d = 0; d < draws; ++d) {
    const ProposalOutcome o = kernel(d);
    std::string key = "noop";
    if (const auto* s = std::get_if<SplitMove>(&o.move)) {
      auto first = sorted(s->left);
      auto second = sorted(s->right);
      if (!ordered && second.front() < first.front()) std::swap(first, second);
      key = "split";
      for (PointId p : first) key += " " + std::to_string(p);
      key += " |";
      for (PointId p : second) key += " " + std::to_string(p);
    } else if (const auto* m = std::get_if<MergeMove>(&o.move)) {
      key = "merge " + std::to_string(to_underlying(m->a)) + " " +
            std::to_string(to_underlying(m->b));
    }
    auto& slot = out[key];
    ++slot.first;
    slot.second = o.is_noop() ? 0.0 : o.log_q_fwd;
  }
  return out;
}

}  // namespace

TEST_CASE("dumb split probabilities") {
  // Two coin patterns give the same unordered split: 2/M (1/2)^|C|.
  CHECK(std::exp(dumb_split_log_prob(1, 2)) == doctest::Approx(0.5));
  CHECK(std::exp(dumb_split_log_prob(4, 3)) == doctest::Approx(2.0 / 4.0 / 8.0));

  const Dataset one = Dataset::from_rows({{1.0}});
  Rng rng(1);
  CHECK(dumb_split(PartitionState::single_cluster(one), rng).is_noop());

  const Dataset three = Dataset::from_rows({{1.0}, {2.0}, {3.0}});
  const PartitionState s = PartitionState::single_cluster(three);
  const auto counts = tally(
      kDraws, [&](std::size_t) { return dumb_split(s, rng); }, /*ordered=*/false);
  std::size_t realized = 0;
  for (const auto& [key, slot] : counts) {
    if (key == "noop") {
      CHECK(within_se(slot.first, kDraws, 0.25));
      continue;
    }
    ++realized;
    CHECK(within_se(slot.first, kDraws, std::exp(slot.second)));
  }
  CHECK(realized == 3);
}

TEST_CASE("dumb merge probabilities") {
  CHECK(std::exp(dumb_merge_log_prob(2)) == doctest::Approx(1.0));
  CHECK(std::exp(dumb_merge_log_prob(3)) == doctest::Approx(1.0 / 3.0));
  const Dataset data = Dataset::from_rows({{1.0}, {2.0}, {3.0}, {4.0}});
  const PartitionState s = PartitionState::singletons(data);
  Rng rng(2);
  const PartitionState single = PartitionState::single_cluster(data);
  CHECK(dumb_merge(single, rng).is_noop());
  std::map<std::set<std::uint64_t>, std::size_t> pairs;
  for (std::size_t d = 0; d < kDraws; ++d) {
    const auto o = dumb_merge(s, rng);
    const auto& m = std::get<MergeMove>(o.move);
    ++pairs[{to_underlying(m.a), to_underlying(m.b)}];
    CHECK(o.reverse_kind == MoveKind::DumbSplit);
  }
  CHECK(pairs.size() == 6);
  for (const auto& [pair, count] : pairs) CHECK(within_se(count, kDraws, 1.0 / 6.0));
}

TEST_CASE("naive split and merge formulas equal brute-force sums on small datasets") {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int rep = 0; rep < 6; ++rep) {
      const Dataset data = test::random_dataset(rng, n, 2 + rep % 3);
      const PointVectors points(data);
      const HashSpec spec{HashFamily::SignRandomProjection, rng(), 1 + rep % 3, 1 + (rep / 2) % 3};
      const NaiveLshIndex index(points, spec);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<PointId> perm(n);
        std::iota(perm.begin(), perm.end(), PointId{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const std::size_t size = 2 + rng() % (n - 1);
        const std::size_t cut = 1 + rng() % (size - 1);
        const std::vector<PointId> a(perm.begin(), perm.begin() + static_cast<long>(cut));
        const std::vector<PointId> b(perm.begin() + static_cast<long>(cut),
                                     perm.begin() + static_cast<long>(size));

        const long double split_sum = brute_double_sum(data, spec, a, b, true);
        if (split_sum > 0) {
          const long double expected =
              std::log(split_sum) + (a.size() + b.size() - 2.0L) * std::log(0.5L);
          CHECK(std::abs(naive_split_log_prob(index, a, b) - static_cast<double>(expected)) <=
                1e-12 * std::max(1.0, std::abs(static_cast<double>(expected))));
          ++checked;
        } else {
          CHECK_FALSE(std::isfinite(naive_split_log_prob(index, a, b)));
        }
        const long double merge_sum = brute_double_sum(data, spec, a, b, false);
        if (merge_sum > 0) {
          const long double expected = std::log(merge_sum);
          CHECK(std::abs(naive_merge_log_prob(index, a, b) - static_cast<double>(expected)) <=
                1e-12 * std::max(1.0, std::abs(static_cast<double>(expected))));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("naive split of a two-point cluster by hand") {
  const Dataset data = Dataset::from_rows({{1.0, 0.2}, {-0.8, 0.5}});
  const PointVectors points(data);
  const HashSpec spec{HashFamily::SignRandomProjection, 21, 1, 1};
  const NaiveLshIndex index(points, spec);
  const auto bucket = index.dissimilar_bucket(0);
  const double frac = std::count(bucket.begin(), bucket.end(), ItemId{1}) /
                      static_cast<double>(std::max<std::size_t>(bucket.size(), 1));
  const double pr = srp_collision_prob(FeatureVector{-1.0, -0.2}, FeatureVector{-0.8, 0.5});
  const std::vector<PointId> u{0}, v{1};
  if (frac > 0) {
    CHECK(std::exp(naive_split_log_prob(index, u, v)) == doctest::Approx(0.5 * pr * frac));
  } else {
    CHECK(naive_split_log_prob(index, u, v) == -INFINITY);
  }
}

TEST_CASE("naive merge of singletons and duplicates by hand") {
  const Dataset data = Dataset::from_rows({{1.0, 2.0}, {1.0, 2.0}, {-3.0, 0.5}});
  const PointVectors points(data);
  const NaiveLshIndex index(points, HashSpec{HashFamily::SignRandomProjection, 4, 1, 1});
  const auto bucket = index.similar_bucket(0);
  REQUIRE(std::count(bucket.begin(), bucket.end(), ItemId{1}) == 1);
  const std::vector<PointId> u{0}, v{1};
  // Pr(u, v) = 1 for duplicates.
  CHECK(std::exp(naive_merge_log_prob(index, u, v)) ==
        doctest::Approx((1.0 / 3.0) / static_cast<double>(bucket.size())));
}

TEST_CASE("naive smart split on points in different clusters falls back to a dumb merge") {
  std::mt19937_64 gen(5);
  const Dataset data = test::random_dataset(gen, 6, 3);
  const PointVectors points(data);
  const NaiveLshIndex index(points, HashSpec{HashFamily::SignRandomProjection, 2, 2, 2});
  const PartitionState s = PartitionState::singletons(data);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto o = naive_smart_split(s, index, rng);
    CHECK((o.kind == MoveKind::DumbMerge || o.kind == MoveKind::NoOp));
  }
  const PartitionState one = PartitionState::single_cluster(data);
  for (int i = 0; i < 200; ++i) {
    const auto o = naive_smart_merge(one, index, rng);
    CHECK((o.kind == MoveKind::DumbSplit || o.kind == MoveKind::NoOp));
  }
}

TEST_CASE("naive split formula summed over every outcome of a 4-point cluster") {
  // Each term weights v by both its collision probability and its share of
  // S_{-u}, so the total over all (u side, v side) splits is not a
  // distribution and exceeds one on some instances.
  std::mt19937_64 gen(6);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset data = test::random_dataset(gen, 4, 2);
    const PointVectors points(data);
    const NaiveLshIndex index(points, HashSpec{HashFamily::SignRandomProjection, gen(), 1, 1});
    double total = 0.0;
    for (unsigned mask = 1; mask < 15; ++mask) {
      std::vector<PointId> a, b;
      for (PointId p = 0; p < 4; ++p) ((mask >> p) & 1u ? a : b).push_back(p);
      total += std::exp(naive_split_log_prob(index, a, b));
    }
    worst = std::max(worst, total);
  }
  MESSAGE("largest total forward mass: " << worst);
  CHECK(worst > 1.0);
}

TEST_CASE("MinHash split probability by hand") {
  const Dataset data = Dataset::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const PointVectors points(data);
  const std::vector<PointId> c{0}, a{1};
  CHECK(std::exp(minsm_split_log_prob(points, c, a, 1)) == doctest::Approx(0.5 * 0.5));
}

TEST_CASE("MinHash split of a cluster inside one bucket is a NoOp") {
  const Dataset data = Dataset::from_rows({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  const PointVectors points(data);
  LssTable table(HashSpec{HashFamily::WeightedMinHash, 3, 1, 1}, 4, ItemKind::DataPoint);
  for (PointId p = 0; p < 3; ++p) table.insert(p, points.transformed(p));
  Rng rng(1);
  CHECK(minsm_smart_split(PartitionState::single_cluster(data), points, table, rng).is_noop());
}

TEST_CASE("MinHash split frequencies over fresh hash seeds") {
  // Nested vectors: x0 <= x1 <= ... <= x5. When the top vector is on u's
  // side every avoider is dominated and the formula is the exact event
  // probability; otherwise it is a lower bound.
  std::mt19937_64 gen(7);
  std::vector<FeatureVector> rows;
  FeatureVector x = test::random_nonneg(gen, 4);
  for (int i = 0; i < 6; ++i) {
    rows.push_back(x);
    const FeatureVector step = test::random_nonneg(gen, 4);
    for (std::size_t j = 0; j < 4; ++j) x[j] += 0.6 * step[j];
  }
  const Dataset data = Dataset::from_rows(rows);
  const PointVectors points(data);
  const PartitionState s = PartitionState::single_cluster(data);
  Rng rng(7);
  const auto counts = tally(kDraws, [&](std::size_t d) {
    LssTable table(HashSpec{HashFamily::WeightedMinHash, 1000 + d, 1, 1}, 8, ItemKind::DataPoint);
    for (PointId p = 0; p < 6; ++p) table.insert(p, points.transformed(p));
    return minsm_smart_split(s, points, table, rng);
  });
  int exact = 0;
  for (const auto& [key, slot] : counts) {
    if (key == "noop") continue;
    const double q = std::exp(slot.second);
    const bool top_on_u_side = key.find(" 5 |") != std::string::npos;
    const double se = std::sqrt(q * (1 - q) / kDraws);
    if (top_on_u_side) {
      CHECK(within_se(slot.first, kDraws, q));
      ++exact;
    } else {
      CHECK(q <= static_cast<double>(slot.first) / kDraws + 3 * se);
    }
  }
  CHECK(exact > 0);
}

TEST_CASE("MinHash merge probabilities") {
  const Dataset single = Dataset::from_rows({{1.0, 1.0}});
  const PartitionState one = PartitionState::single_cluster(single);
  Rng rng(8);
  const LssTable one_table = build_centroid_table(one, HashSpec{HashFamily::WeightedMinHash, 1, 1, 1});
  CHECK(minsm_smart_merge(one, one_table, rng).is_noop());

  SUBCASE("identical centroids") {
    const Dataset twins = Dataset::from_rows({{1.0, 3.0}, {1.0, 3.0}});
    const PartitionState s = PartitionState::singletons(twins);
    const LssTable t = build_centroid_table(s, HashSpec{HashFamily::WeightedMinHash, 2, 1, 1});
    ProposalOutcome o = minsm_smart_merge(s, t, rng);
    while (o.is_noop()) o = minsm_smart_merge(s, t, rng);
    CHECK(std::exp(o.log_q_fwd) == doctest::Approx(0.5 * 1.0 / 2.0));
  }

  SUBCASE("ordered pair frequencies over fresh hash seeds") {
    // One broad centroid and four whose supports are disjoint: any bucket
    // holds at most two centroids, so |S_u| is fixed given a collision.
    const Dataset data = Dataset::from_rows({{1.0, 0.8, 1.2, 0.5},
                                             {2.0, 0.0, 0.0, 0.0},
                                             {0.0, 0.5, 0.0, 0.0},
                                             {0.0, 0.0, 1.0, 0.0},
                                             {0.0, 0.0, 0.0, 3.0}});
    const PartitionState s = PartitionState::singletons(data);
    const auto counts = tally(kDraws, [&](std::size_t d) {
      const LssTable t =
          build_centroid_table(s, HashSpec{HashFamily::WeightedMinHash, 5000 + d, 1, 1});
      return minsm_smart_merge(s, t, rng);
    });
    int pairs = 0;
    for (const auto& [key, slot] : counts) {
      if (key == "noop") continue;
      CHECK(within_se(slot.first, kDraws, std::exp(slot.second)));
      ++pairs;
    }
    CHECK(pairs == 8);
  }
}

TEST_CASE("MinHash merge rejects a stale centroid table") {
  const Dataset data = Dataset::from_rows({{1.0}, {2.0}, {3.0}});
  PartitionState s = PartitionState::singletons(data);
  const LssTable t = build_centroid_table(s, HashSpec{HashFamily::WeightedMinHash, 1, 1, 1});
  s.apply(MergeMove{s.cluster_of(0), s.cluster_of(1)});
  Rng rng(1);
  CHECK_THROWS(minsm_smart_merge(s, t, rng));
}

TEST_CASE("move kind names round-trip") {
  for (MoveKind k : {MoveKind::NoOp, MoveKind::DumbSplit, MoveKind::DumbMerge, MoveKind::SmartSplit,
                     MoveKind::SmartMerge, MoveKind::Init}) {
    CHECK(move_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS(move_kind_from_string("bogus"));
}
