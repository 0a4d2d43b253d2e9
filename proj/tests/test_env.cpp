#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "rms/cocycle.hpp"
#include "rms/env.hpp"
#include "rms/rng.hpp"

using namespace rms;

namespace {

std::shared_ptr<const EnvironmentDriver> golden_rotation() {
  return std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::rotation(std::sqrt(2.0) - 1.0, 0.0, {0.0, 0.5}));
}

}  // namespace

TEST_CASE("driver validation enforces the declared invariants") {
  CHECK_THROWS_AS(EnvironmentDriver::iid_finite({0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(EnvironmentDriver::iid_finite({0.5, -0.5, 1.0}), ValidationError);
  CHECK_THROWS_AS(EnvironmentDriver::rotation(0.0, 0.0, {0.0}), ValidationError);
  CHECK_THROWS_AS(EnvironmentDriver::rotation(0.5, 0.0, {0.0}), ValidationError);
  CHECK_THROWS_AS(EnvironmentDriver::rotation(3.0 / 7.0, 0.0, {0.0}), ValidationError);
  CHECK_NOTHROW(EnvironmentDriver::rotation(std::sqrt(2.0) - 1.0, 0.0, {0.0, 0.5}));
  // period-2 chain: aperiodicity check fails
  CHECK_THROWS_AS(EnvironmentDriver::markov_finite({{0.0, 1.0}, {1.0, 0.0}}), ValidationError);
  // reducible chain
  CHECK_THROWS_AS(EnvironmentDriver::markov_finite({{1.0, 0.0}, {0.5, 0.5}}), ValidationError);
  // wrong stationary hint rejected
  CHECK_THROWS_AS(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}, {0.5, 0.5}),
      ValidationError);
  CHECK_NOTHROW(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}, {5.0 / 6.0, 1.0 / 6.0}));
}

TEST_CASE("stationary_distribution: identity on iid, solver on markov") {
  auto iid = EnvironmentDriver::iid_finite({0.3, 0.7});
  auto pi = stationary_distribution(iid);
  CHECK(pi[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(pi[1] == doctest::Approx(0.7).epsilon(1e-14));

  auto mk = EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}});
  auto mpi = stationary_distribution(mk);
  CHECK(mpi[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(mpi[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  // residual of the solve
  double r0 = std::abs(mpi[0] * 0.9 + mpi[1] * 0.5 - mpi[0]);
  double r1 = std::abs(mpi[0] * 0.1 + mpi[1] * 0.5 - mpi[1]);
  CHECK(r0 <= 1e-12);
  CHECK(r1 <= 1e-12);

  CHECK_THROWS_AS(stationary_distribution(*golden_rotation()), ValidationError);
}

TEST_CASE("reversed chain matches the pi_j P_ji / pi_i formula") {
  auto mk = EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}});
  // P~_01 = pi_1 P_10 / pi_0 = (1/6 * 0.5) / (5/6) = 0.1: this chain is
  // reversible, so the reversal equals the chain itself.
  CHECK(mk.reversed_transition(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(mk.reversed_transition(0, 0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(mk.reversed_transition(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("state_at: determinism and rotation initial point") {
  auto rot = golden_rotation();
  EnvPath rpath(rot, 7);
  CHECK(rpath.state_at(0).id == 0);  // frac(0) falls in [0, 0.5)
  CHECK(rpath.state_at(0).point == doctest::Approx(0.0));

  auto iid = std::make_shared<EnvironmentDriver>(EnvironmentDriver::iid_finite({0.5, 0.5}));
  EnvPath a(iid, 42), b(iid, 42);
  for (std::int64_t k = -1000; k <= 1000; ++k) CHECK(a.state_at(k).id == b.state_at(k).id);
  CHECK(a.state_at(5).id == a.state_at(5).id);
}

TEST_CASE("markov empirical frequency matches the stationary law") {
  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.5, 0.5}, {0.5, 0.5}}));
  EnvPath path(mk, 123);
  std::int64_t hits = 0, n = 100000;
  for (std::int64_t k = 0; k < n; ++k) hits += path.state_at(k).id == 0 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("shift-consistency: the shifted view is the orbit of theta omega") {
  auto drivers = std::vector<std::shared_ptr<const EnvironmentDriver>>{
      std::make_shared<EnvironmentDriver>(EnvironmentDriver::iid_finite({0.2, 0.3, 0.5})),
      std::make_shared<EnvironmentDriver>(
          EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}})),
      golden_rotation()};
  for (const auto& d : drivers) {
    EnvPath path(d, 99);
    EnvPath shifted = path.shifted(1);
    for (std::int64_t k = -50; k <= 50; ++k) {
      CHECK(shifted.state_at(k).id == path.state_at(k + 1).id);
      CHECK(shifted.state_at(k).point == path.state_at(k + 1).point);
    }
    EnvPath twice = path.shifted(3).shifted(-5);
    for (std::int64_t k = -20; k <= 20; ++k)
      CHECK(twice.state_at(k).id == path.state_at(k - 2).id);
  }
}

TEST_CASE("step law: forward states follow the driver's one-step advance") {
  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}));
  EnvPath path(mk, 5);
  for (std::int64_t k = 0; k < 200; ++k) {
    std::size_t expect = mk->sample_forward(path.state_at(k).id, path.uniform_at(k + 1));
    CHECK(path.state_at(k + 1).id == expect);
  }
  // negative side: the time-reversed chain drives steps to the left
  for (std::int64_t k = 0; k >= -200; --k) {
    std::size_t expect = mk->sample_backward(path.state_at(k).id, path.uniform_at(k - 1));
    CHECK(path.state_at(k - 1).id == expect);
  }
}

TEST_CASE("rotation: backward step is the exact inverse of the forward step") {
  auto rot = golden_rotation();
  EnvPath path(rot, 0);
  // advancing the point at -1 by alpha recovers the point at 0 exactly
  std::uint64_t alpha = rot->alpha_fp();
  for (std::int64_t k = -100; k <= 100; ++k) {
    std::uint64_t xk = rot->x0_fp() + static_cast<std::uint64_t>(k) * alpha;
    std::uint64_t xk1 = rot->x0_fp() + static_cast<std::uint64_t>(k + 1) * alpha;
    CHECK(xk + alpha == xk1);  // exact in Z / 2^64
    CHECK(path.state_at(k).id == rot->region_of(xk));
  }
}

TEST_CASE("two-sided stationarity: negative-index marginals match the law") {
  auto iid = std::make_shared<EnvironmentDriver>(EnvironmentDriver::iid_finite({0.3, 0.7}));
  EnvPath path(iid, 77);
  std::int64_t n = 100000;
  std::int64_t hits = 0;
  for (std::int64_t k = -n; k < 0; ++k) hits += path.state_at(k).id == 0 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(n) - 0.3) < 0.01);

  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}));
  EnvPath mpath(mk, 78);
  std::int64_t neg = 0, pos = 0;
  for (std::int64_t k = -n; k < 0; ++k) neg += mpath.state_at(k).id == 0 ? 1 : 0;
  for (std::int64_t k = 0; k < n; ++k) pos += mpath.state_at(k).id == 0 ? 1 : 0;
  double se = std::sqrt(0.25 / static_cast<double>(n));
  // both windows near pi_0 = 5/6 within 3 Monte Carlo standard errors of
  // each other (correlated chain: allow the usual inflation via 3 * 3se)
  CHECK(std::abs(static_cast<double>(neg - pos) / static_cast<double>(n)) < 9.0 * se);
  CHECK(std::abs(static_cast<double>(neg) / static_cast<double>(n) - 5.0 / 6.0) < 0.02);
}

TEST_CASE("birkhoff_average: exact expectations for finite drivers") {
  auto iid = std::make_shared<EnvironmentDriver>(EnvironmentDriver::iid_finite({0.5, 0.5}));
  EnvPath path(iid, 2024);
  CHECK(birkhoff_average(path, [](const EnvState&) { return 3.25; }, 1000) ==
        doctest::Approx(3.25).epsilon(1e-15));

  // f = ln d with d in {1,4}: E ln d = ln 2
  double mean = birkhoff_average(
      path, [](const EnvState& s) { return std::log(s.id == 0 ? 1.0 : 4.0); }, 1000000);
  CHECK(std::abs(mean - std::log(2.0)) < 0.01);

  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}));
  EnvPath mpath(mk, 2025);
  double freq1 =
      birkhoff_average(mpath, [](const EnvState& s) { return s.id == 1 ? 1.0 : 0.0; }, 1000000);
  CHECK(std::abs(freq1 - 1.0 / 6.0) < 0.005);
}

TEST_CASE("birkhoff convergence within 5 batch-mean standard errors") {
  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.9, 0.1}, {0.5, 0.5}}));
  EnvPath path(mk, 31337);
  std::int64_t n = 1000000;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k)
    values.push_back(path.state_at(k).id == 1 ? 1.0 : 0.0);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double se = batch_means_stderr(values);
  CHECK(std::abs(mean - 1.0 / 6.0) <= 5.0 * se);
}

TEST_CASE("concurrent readers see one consistent path") {
  auto mk = std::make_shared<EnvironmentDriver>(
      EnvironmentDriver::markov_finite({{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}}));
  EnvPath path(mk, 404);
  // reference realization, single-threaded
  std::vector<std::size_t> expect(4001);
  for (std::int64_t k = -2000; k <= 2000; ++k)
    expect[static_cast<std::size_t>(k + 2000)] = EnvPath(mk, 404).state_at(k).id;
  std::vector<std::thread> readers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    readers.emplace_back([&, t]() {
      for (std::int64_t k = -2000 + t; k <= 2000; k += 3) {
        if (path.state_at(k).id != expect[static_cast<std::size_t>(k + 2000)])
          mismatches.fetch_add(1);
      }
    });
  }
  for (auto& r : readers) r.join();
  CHECK(mismatches.load() == 0);
}

TEST_CASE("rotation empirical frequencies approach the partition lengths") {
  EnvPath path(golden_rotation(), 0);
  std::int64_t n = 100000, hits = 0, back_hits = 0;
  for (std::int64_t k = 0; k < n; ++k) hits += path.state_at(k).id == 0 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(n) - 0.5) < 0.005);
  // two-sided stationarity: the backward window matches within 3 MC SE
  for (std::int64_t k = -n; k < 0; ++k) back_hits += path.state_at(k).id == 0 ? 1 : 0;
  double se = std::sqrt(0.25 / static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(hits - back_hits) / static_cast<double>(n)) < 3.0 * se);
}
