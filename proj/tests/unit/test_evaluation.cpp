#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "minsm/evaluation.hpp"
#include "support.hpp"

using namespace minsm;

namespace {

// Best accuracy over every injective relabeling of the predicted clusters.
double brute_accuracy(const std::vector<long>& pred, const std::vector<long>& truth) {
  std::vector<long> p_ids(pred), t_ids(truth);
  std::sort(p_ids.begin(), p_ids.end());
  p_ids.erase(std::unique(p_ids.begin(), p_ids.end()), p_ids.end());
  std::sort(t_ids.begin(), t_ids.end());
  t_ids.erase(std::unique(t_ids.begin(), t_ids.end()), t_ids.end());
  while (t_ids.size() < p_ids.size()) t_ids.push_back(-1000 - static_cast<long>(t_ids.size()));
  double best = 0.0;
  std::vector<std::size_t> perm(t_ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto k = static_cast<std::size_t>(
          std::find(p_ids.begin(), p_ids.end(), pred[i]) - p_ids.begin());
      hits += t_ids[perm[k]] == truth[i] ? 1 : 0;
    }
    best = std::max(best, static_cast<double>(hits) / pred.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TraceRecord rec(std::size_t i, double t, double ll, bool accepted = false) {
  TraceRecord r;
  r.iteration = i;
  r.wall_time_ms = t;
  r.log_likelihood = ll;
  r.move_type = i == 0 ? MoveKind::Init : MoveKind::DumbMerge;
  r.accepted = accepted;
  return r;
}

}  // namespace

TEST_CASE("nmi") {
  const std::vector<long> truth{0, 0, 1, 1, 2, 2};
  CHECK(nmi(truth, truth) == doctest::Approx(1.0));
  CHECK(nmi(std::vector<long>{7, 7, 3, 3, 9, 9}, truth) == doctest::Approx(1.0));
  CHECK(nmi(std::vector<long>{0, 0, 0, 0}, std::vector<long>{0, 0, 1, 1}) == 0.0);
  CHECK(nmi(std::vector<long>{4, 4, 4}, std::vector<long>{1, 1, 1}) == 1.0);
  CHECK_THROWS(nmi(std::vector<long>{0}, truth));
}

TEST_CASE("accuracy") {
  const std::vector<long> truth{0, 0, 1, 1};
  CHECK(accuracy(truth, truth) == 1.0);
  CHECK(accuracy(std::vector<long>{1, 1, 0, 0}, truth) == 1.0);
  CHECK(accuracy(std::vector<long>{1, 1, 1, 2}, truth) == doctest::Approx(0.75));
  CHECK(brute_accuracy({1, 1, 1, 2}, truth) == doctest::Approx(0.75));
  CHECK_THROWS(accuracy(std::vector<long>{0}, truth));
}

TEST_CASE("metric properties on random labelings") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<long> a(n), b(n);
    for (auto& x : a) x = static_cast<long>(rng() % 4);
    for (auto& x : b) x = static_cast<long>(rng() % 4);
    const double acc = accuracy(a, b);
    const double m = nmi(a, b);
    CHECK(acc == doctest::Approx(brute_accuracy(a, b)));
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    // Label permutation and point reordering.
    std::vector<long> relabeled(a);
    for (auto& x : relabeled) x = 10 - 3 * x;
    CHECK(nmi(relabeled, b) == doctest::Approx(m));
    CHECK(accuracy(relabeled, b) == doctest::Approx(acc));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<long> a2(n), b2(n);
    for (std::size_t i = 0; i < n; ++i) {
      a2[i] = a[order[i]];
      b2[i] = b[order[i]];
    }
    CHECK(nmi(a2, b2) == doctest::Approx(m));
    CHECK(accuracy(a2, b2) == doctest::Approx(acc));
    std::vector<long> ua(a), ub(b);
    std::sort(ua.begin(), ua.end());
    std::sort(ub.begin(), ub.end());
    if (std::unique(ua.begin(), ua.end()) - ua.begin() == std::unique(ub.begin(), ub.end()) - ub.begin()) {
      CHECK(accuracy(b, a) == doctest::Approx(acc));
    }
  }
}

TEST_CASE("exact partition posterior") {
  std::mt19937_64 rng(2);
  const Dataset one = Dataset::from_rows({{0.5}});
  const auto p1 = exact_partition_posterior(one, Hyperparams::defaults_for(one));
  REQUIRE(p1.size() == 1);
  CHECK(p1.begin()->second == doctest::Approx(1.0));

  const Dataset three = test::random_dataset(rng, 3, 2);
  const auto p3 = exact_partition_posterior(three, Hyperparams::defaults_for(three));
  CHECK(p3.size() == 5);
  double total = 0.0;
  for (const auto& [k, v] : p3) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  const std::vector<std::size_t> bell{1, 1, 2, 5, 15, 52, 203, 877};
  for (std::size_t n = 1; n <= 7; ++n) {
    const Dataset d = test::random_dataset(rng, n, 1);
    CHECK(exact_partition_posterior(d, Hyperparams::defaults_for(d)).size() == bell[n]);
  }

  // Two triples 20 standard deviations apart.
  const Dataset triples = Dataset::from_rows({{-10.1}, {-9.9}, {-10.0}, {10.0}, {9.8}, {10.2}});
  const auto p6 = exact_partition_posterior(triples, Hyperparams::defaults_for(triples));
  const auto mode = std::max_element(p6.begin(), p6.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(mode->first == "0,0,0,1,1,1");

  // Point order only permutes the partitions.
  const Dataset reordered = Dataset::from_rows({{10.0}, {-10.1}, {9.8}, {-9.9}, {10.2}, {-10.0}});
  const auto q6 = exact_partition_posterior(reordered, Hyperparams::defaults_for(reordered));
  CHECK(q6.at("0,1,0,1,0,1") == doctest::Approx(mode->second).epsilon(1e-12));

  CHECK_THROWS(exact_partition_posterior(test::random_dataset(rng, 11, 1),
                                         Hyperparams::defaults_for(test::random_dataset(rng, 11, 1))));
}

TEST_CASE("total variation") {
  const PartitionDistribution p{{"a", 0.5}, {"b", 0.3}, {"c", 0.2}};
  const PartitionDistribution q{{"a", 0.2}, {"b", 0.3}, {"c", 0.5}};
  CHECK(total_variation(p, p) == 0.0);
  CHECK(total_variation(p, q) == doctest::Approx(0.3));
  CHECK(total_variation(PartitionDistribution{{"x", 1.0}}, PartitionDistribution{{"y", 1.0}}) ==
        doctest::Approx(1.0));
}

TEST_CASE("partition keys are restricted growth strings") {
  CHECK(partition_key(std::vector<long>{5, 5, 2, 5, 9}) == "0,0,1,0,2");
}

TEST_CASE("convergence summary") {
  std::vector<TraceRecord> flat;
  for (std::size_t i = 0; i < 20; ++i) flat.push_back(rec(i, 3.0 + i, -7.0));
  const auto s = convergence_summary(flat);
  CHECK(s.time_to_plateau_ms == 3.0);
  CHECK(s.acceptance_rate == 0.0);
  CHECK(s.plateau == -7.0);

  // Linear rise from -100 to 0 over 50 records, then flat: the knee is where
  // the 99% threshold (-1) is first met.
  std::vector<TraceRecord> knee;
  for (std::size_t i = 0; i <= 200; ++i) {
    const double ll = i < 50 ? -100.0 + 2.0 * static_cast<double>(i) : 0.0;
    knee.push_back(rec(i, 10.0 * static_cast<double>(i), ll, i % 4 == 1));
  }
  const auto k = convergence_summary(knee);
  CHECK(k.plateau == 0.0);
  CHECK(k.time_to_plateau_ms == 500.0);
  CHECK(k.acceptance_rate == doctest::Approx(50.0 / 200.0));
  const auto unreachable = convergence_summary(knee, 50.0);
  CHECK_FALSE(unreachable.reached);
  CHECK(unreachable.time_to_plateau_ms == 2000.0);

  CHECK_THROWS(convergence_summary(std::vector<TraceRecord>{}));
}
