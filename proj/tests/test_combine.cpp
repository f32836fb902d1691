#include <doctest.h>

#include <cmath>

#include "fuzz.hpp"
#include "helpers.hpp"
#include "snnens/combine.hpp"
#include "snnens/errors.hpp"

using namespace snnens;
using testing::matrix;

TEST_CASE("MemberWeights") {
  CHECK(MemberWeights::uniform(4)[2] == 0.25);
  CHECK_NOTHROW(MemberWeights({0.2, 0.8}));
  CHECK_THROWS_AS(MemberWeights({0.2, 0.7}), DomainError);
  CHECK_THROWS_AS(MemberWeights({-0.2, 1.2}), DomainError);
  CHECK_THROWS_AS(MemberWeights(std::vector<double>{}), DomainError);
}

TEST_CASE("ngm") {
  const ClassProbabilities a{{0.8, 0.2}}, b{{0.2, 0.8}};
  const std::vector<ClassProbabilities> one{a};
  const auto id = ngm(one, MemberWeights::uniform(1)).p;
  CHECK(id[0] == doctest::Approx(0.8));

  const std::vector<ClassProbabilities> sym{a, b};
  const auto half = ngm(sym, MemberWeights::uniform(2)).p;
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  const std::vector<ClassProbabilities> same{a, a, a};
  CHECK(ngm(same, MemberWeights::uniform(3)).p[1] == doctest::Approx(0.2));

  // weighted: q ∝ 0.8^0.75 0.2^0.25 vs 0.2^0.75 0.8^0.25
  const auto w = ngm(sym, MemberWeights({0.75, 0.25})).p;
  const double u0 = std::pow(0.8, 0.75) * std::pow(0.2, 0.25), u1 = std::pow(0.2, 0.75) * std::pow(0.8, 0.25);
  CHECK(w[0] == doctest::Approx(u0 / (u0 + u1)));
}

TEST_CASE("ngm survives products that underflow in linear space") {
  std::vector<ClassProbabilities> tiny(10, ClassProbabilities{{1e-300, 1.0 - 1e-300}});
  tiny[0] = {{0.5, 0.5}};
  const auto q = ngm(tiny, MemberWeights::uniform(10));
  CHECK(is_distribution(q));
  CHECK(q.p[1] > q.p[0]);
}

TEST_CASE("ngm rejects inconsistent inputs") {
  const std::vector<ClassProbabilities> bad{{{0.5, 0.5}}, {{0.2, 0.3, 0.5}}};
  CHECK_THROWS_AS(ngm(bad, MemberWeights::uniform(2)), ShapeError);
  const std::vector<ClassProbabilities> none;
  CHECK_THROWS_AS(ngm(none, MemberWeights::uniform(1)), CombinationError);
}

TEST_CASE("ngm output is a distribution on fuzzed inputs") {
  fuzz::Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto inst = fuzz::categorical(rng);
    CHECK(is_distribution(ngm(inst.members, inst.weights)));
  }
}

TEST_CASE("gm_poisson") {
  const PoissonMeans a{matrix({{1.0, 3.0}})}, b{matrix({{4.0, 3.0}})};
  const std::vector<PoissonMeans> ab{a, b};
  const auto g = gm_poisson(ab, MemberWeights::uniform(2)).lambda;
  CHECK(g(0, 0) == doctest::Approx(2.0));
  CHECK(g(0, 1) == doctest::Approx(3.0));

  const std::vector<PoissonMeans> same{a, a};
  CHECK(gm_poisson(same, MemberWeights::uniform(2)).lambda(0, 1) == doctest::Approx(3.0));

  fuzz::Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = fuzz::poisson(rng);
    const auto base = gm_poisson(inst.members, inst.weights).lambda;
    for (auto& m : inst.members) {
      for (auto& v : m.lambda.data()) v *= 3.0;
    }
    const auto scaled = gm_poisson(inst.members, inst.weights).lambda;
    for (std::size_t i = 0; i < base.data().size(); ++i) {
      CHECK(scaled.data()[i] == doctest::Approx(3.0 * base.data()[i]).epsilon(1e-12));
    }
  }

  const std::vector<PoissonMeans> under{{matrix({{0.0}})}};
  CHECK_THROWS_AS(gm_poisson(under, MemberWeights::uniform(1)), DomainError);
}

TEST_CASE("am_combine") {
  const std::vector<Matrix> one{matrix({{1}, {7}, {3}})};
  CHECK(am_combine(one).predicted == 1);

  const std::vector<Matrix> two{matrix({{1}, {3}}), matrix({{3}, {1}})};
  const auto r = am_combine(two);
  CHECK(r.scores == std::vector<double>{2.0, 2.0});
  CHECK(r.predicted == 0);

  const std::vector<Matrix> zeros{matrix({{0}, {0}})};
  CHECK(am_combine(zeros).degenerate);
  CHECK(am_combine(zeros).predicted == 0);
}

TEST_CASE("mv_combine") {
  const std::vector<std::vector<int>> unanimous{{2}, {2}, {2}};
  CHECK(mv_combine(unanimous, 3) == 2);
  const std::vector<std::vector<int>> maj{{0}, {1}, {1}};
  CHECK(mv_combine(maj, 2) == 1);
  const std::vector<std::vector<int>> tie{{1}, {0}};
  CHECK(mv_combine(tie, 2) == 0);
  const std::vector<std::vector<int>> windows{{0, 1, 1}, {1, 0, 0}};
  CHECK(mv_combine(windows, 2) == 0);
}

TEST_CASE("am_mv_combine") {
  fuzz::Rng rng(4);
  for (int rep = 0; rep < 500; ++rep) {
    const int M = fuzz::uniform_int(rng, 1, 6), C = fuzz::uniform_int(rng, 2, 8);
    std::vector<Matrix> members;
    for (int m = 0; m < M; ++m) {
      Matrix x(static_cast<std::size_t>(C), 1);
      for (auto& v : x.data()) v = static_cast<double>(fuzz::uniform_int(rng, 0, 10));
      members.push_back(x);
    }
    CHECK(am_mv_combine(members) == am_combine(members).predicted);
  }

  // window winners of the mean rates: 2, 2, 5
  Matrix m(6, 3);
  m(2, 0) = 5;
  m(2, 1) = 5;
  m(5, 2) = 9;
  const std::vector<Matrix> single{m};
  CHECK(am_mv_combine(single) == 2);
}

TEST_CASE("am_mv can disagree with am when one window is dominated") {
  // member 0 puts a huge count on class 1 in window 0; the other windows favour class 0
  const std::vector<Matrix> members{matrix({{0, 3, 3}, {100, 0, 0}}), matrix({{1, 2, 2}, {0, 1, 1}})};
  CHECK(am_combine(members).predicted == 1);
  CHECK(am_mv_combine(members) == 0);
}
