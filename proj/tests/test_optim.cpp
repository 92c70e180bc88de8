#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sembed/errors.hpp"
#include "sembed/optim.hpp"

using namespace sembed;

TEST_CASE("zero grads and zero decay leave parameters unchanged") {
  Tensor p({3}, {1.0, -2.0, 0.5});
  std::vector<double> g(3, 0.0);
  std::vector<Tensor*> params = {&p};
  std::vector<const std::vector<double>*> grads = {&g};
  AdamWState state(params);
  adamw_step(params, grads, state, 0.1, 0.9, 0.999, 1e-8, 0.0);
  CHECK(p.values() == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(state.step_count() == 1);
}

TEST_CASE("first step matches the hand-evaluated update") {
  // p=1, g=1, lr=0.1, wd=0: bias corrections cancel at step 1 so the update
  // is lr * g / (sqrt(g^2) + eps) ~ 0.1
  Tensor p({1}, {1.0});
  std::vector<double> g = {1.0};
  std::vector<Tensor*> params = {&p};
  std::vector<const std::vector<double>*> grads = {&g};
  AdamWState state(params);
  adamw_step(params, grads, state, 0.1, 0.9, 0.999, 1e-8, 0.0);
  CHECK(p.values()[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("pure decay scales by (1 - lr*wd) per step") {
  Tensor p({1}, {1.0});
  std::vector<double> g = {0.0};
  std::vector<Tensor*> params = {&p};
  std::vector<const std::vector<double>*> grads = {&g};
  AdamWState state(params);
  double expected = 1.0;
  for (int i = 0; i < 5; ++i) {
    adamw_step(params, grads, state, 0.1, 0.9, 0.999, 1e-8, 0.1);
    expected *= (1.0 - 0.01);
    CHECK(p.values()[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("shape mismatches are contract errors") {
  Tensor p({2}, {1.0, 2.0});
  std::vector<double> g = {1.0};  // wrong length
  std::vector<Tensor*> params = {&p};
  std::vector<const std::vector<double>*> grads = {&g};
  AdamWState state(params);
  CHECK_THROWS_AS(adamw_step(params, grads, state, 0.1), ContractError);
}

TEST_CASE("lr schedule endpoints and warmup peak") {
  const double base = 2e-5;
  CHECK(lr_schedule(0, 100, base, 0.1) == 0.0);
  CHECK(lr_schedule(10, 100, base, 0.1) == doctest::Approx(base));
  CHECK(lr_schedule(100, 100, base, 0.1) == 0.0);
  // halfway through decay
  CHECK(lr_schedule(55, 100, base, 0.1) == doctest::Approx(base * 0.5));
  // warmup is linear
  CHECK(lr_schedule(5, 100, base, 0.1) == doctest::Approx(base * 0.5));
  // no warmup: starts at base
  CHECK(lr_schedule(0, 100, base, 0.0) == doctest::Approx(base));
  CHECK_THROWS_AS(lr_schedule(101, 100, base, 0.1), InputError);
}
