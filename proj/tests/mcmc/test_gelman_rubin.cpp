#include <doctest.h>

#include "dbflu/mcmc.hpp"
#include "dbflu/rng.hpp"

using namespace dbflu;

TEST_CASE("identical chains are flagged degenerate and report 1.0") {
  Rng rng(5);
  Eigen::VectorXd chain(500);
  for (int i = 0; i < 500; ++i) chain(i) = rng.normal();
  bool degenerate = false;
  CHECK(gelman_rubin({chain, chain}, &degenerate) == 1.0);
  CHECK(degenerate);

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(500, 3.14);
  CHECK(gelman_rubin({constant, constant}, &degenerate) == 1.0);
  CHECK(degenerate);
}

TEST_CASE("independent chains from one normal stay below 1.05") {
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Eigen::VectorXd> chains;
    for (int c = 0; c < 4; ++c) {
      Eigen::VectorXd chain(1000);
      for (int i = 0; i < 1000; ++i) chain(i) = rng.normal(2.0, 1.5);
      chains.push_back(chain);
    }
    bool degenerate = false;
    const double rhat = gelman_rubin(chains, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK(rhat < 1.05);
  }
}

TEST_CASE("separated chains blow past 1.1") {
  Rng rng(7);
  Eigen::VectorXd a(1000), b(1000);
  for (int i = 0; i < 1000; ++i) {
    a(i) = rng.normal(0.0, 1.0);
    b(i) = rng.normal(5.0, 1.0);
  }
  CHECK(gelman_rubin({a, b}) > 2.0);
}

TEST_CASE("input validation") {
  Eigen::VectorXd chain(100);
  chain.setZero();
  CHECK_THROWS_AS(gelman_rubin({chain}), std::invalid_argument);
  Eigen::VectorXd shorter(50);
  shorter.setZero();
  CHECK_THROWS_AS(gelman_rubin({chain, shorter}), std::invalid_argument);
  Eigen::VectorXd tiny(5);
  tiny.setZero();
  CHECK_THROWS_AS(gelman_rubin({tiny, tiny}), std::invalid_argument);
}
