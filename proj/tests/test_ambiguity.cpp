#include <doctest.h>

#include <cmath>

#include "fuzz.hpp"
#include "helpers.hpp"
#include "snnens/ambiguity.hpp"
#include "snnens/combine.hpp"
#include "snnens/errors.hpp"

using namespace snnens;

TEST_CASE("ad_regression") {
  const std::vector<double> same{2.0, 2.0, 2.0};
  const auto s = ad_regression(1.0, same, MemberWeights::uniform(3));
  CHECK(s.ambiguity == 0.0);
  CHECK(s.ensemble_error == s.avg_member_error);

  const std::vector<double> pm{1.0, -1.0};
  const auto r = ad_regression(0.0, pm, MemberWeights::uniform(2));
  CHECK(r.ensemble_error == 0.0);
  CHECK(r.avg_member_error == 1.0);
  CHECK(r.ambiguity == 1.0);

  fuzz::Rng rng(1);
  for (int rep = 0; rep < 10000; ++rep) {
    const auto M = static_cast<std::size_t>(fuzz::uniform_int(rng, 1, 10));
    std::vector<double> preds(M);
    for (auto& p : preds) p = fuzz::uniform(rng, -10, 10);
    const auto rep_ = ad_regression(fuzz::uniform(rng, -10, 10), preds, fuzz::weights(rng, M));
    REQUIRE(rep_.residual <= 1e-12 * std::max(1.0, rep_.avg_member_error));
  }
}

TEST_CASE("kl_categorical") {
  const ClassProbabilities p{{0.3, 0.7}};
  CHECK(kl_categorical(p, p) == doctest::Approx(0.0));
  CHECK(kl_categorical({{1.0, 0.0}}, {{0.5, 0.5}}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  fuzz::Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto C = static_cast<std::size_t>(fuzz::uniform_int(rng, 2, 20));
    CHECK(kl_categorical(fuzz::distribution(rng, C, 3.0), fuzz::distribution(rng, C, 3.0)) >= 0.0);
  }
}

TEST_CASE("ad_categorical") {
  const ClassProbabilities a{{0.8, 0.2}};
  const std::vector<ClassProbabilities> same{a, a};
  CHECK(std::abs(ad_categorical({{1.0, 0.0}}, same, MemberWeights::uniform(2)).ambiguity) <= 1e-15);

  const std::vector<ClassProbabilities> sym{a, {{0.2, 0.8}}};
  const auto r = ad_categorical({{1.0, 0.0}}, sym, MemberWeights::uniform(2));
  CHECK(r.ensemble_error == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(r.avg_member_error == doctest::Approx(-0.5 * (std::log(0.8) + std::log(0.2))).epsilon(1e-14));
  CHECK(r.avg_member_error == doctest::Approx(0.9163).epsilon(1e-4));
  CHECK(r.ambiguity == doctest::Approx(0.2231).epsilon(1e-3));
  CHECK(r.residual <= 1e-12);

  fuzz::Rng rng(3);
  for (int rep = 0; rep < 2000; ++rep) {
    const auto inst = fuzz::categorical(rng);
    const auto ad = ad_categorical(inst.target, inst.members, inst.weights);
    REQUIRE(ad.residual <= 1e-9);
    REQUIRE(ad.ambiguity >= -1e-9);
  }
}

TEST_CASE("kl_poisson") {
  CHECK(kl_poisson(3.0, 3.0) == doctest::Approx(0.0));
  CHECK(kl_poisson(0.0, 2.0) == 2.0);
  CHECK(kl_poisson(4.0, 2.0) == doctest::Approx(4 * std::log(2.0) - 2).epsilon(1e-14));
  CHECK(kl_poisson(4.0, 2.0) == doctest::Approx(0.7726).epsilon(1e-4));
  CHECK_THROWS_AS(kl_poisson(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(kl_poisson(-1.0, 1.0), DomainError);
  const Matrix a = testing::matrix({{4.0, 0.0}}), b = testing::matrix({{2.0, 2.0}});
  CHECK(kl_poisson(a, b) == doctest::Approx(4 * std::log(2.0)));
}

TEST_CASE("ad_poisson") {
  const PoissonMeans a{testing::matrix({{1.0}})}, b{testing::matrix({{4.0}})};
  const std::vector<PoissonMeans> same{a, a};
  CHECK(std::abs(ad_poisson({testing::matrix({{2.0}})}, same, MemberWeights::uniform(2)).ambiguity) <= 1e-15);

  const std::vector<PoissonMeans> ab{a, b};
  const auto r = ad_poisson({testing::matrix({{2.0}})}, ab, MemberWeights::uniform(2));
  CHECK(std::abs(r.ensemble_error) <= 1e-15);
  CHECK(r.avg_member_error == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.ambiguity == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.residual <= 1e-12);

  fuzz::Rng rng(4);
  for (int rep = 0; rep < 2000; ++rep) {
    const auto inst = fuzz::poisson(rng);
    const auto ad = ad_poisson(inst.target, inst.members, inst.weights);
    REQUIRE(ad.residual <= 1e-9);
    REQUIRE(ad.ambiguity >= -1e-9);
  }
}

TEST_CASE("average_reports") {
  const std::vector<AdReport> rs{make_report(1.0, 2.0, 1.0), make_report(3.0, 5.0, 2.0)};
  const auto avg = average_reports(rs);
  CHECK(avg.ensemble_error == 2.0);
  CHECK(avg.avg_member_error == 3.5);
  CHECK(avg.ambiguity == 1.5);
}
