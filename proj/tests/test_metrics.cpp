#include <cmath>

#include "doctest.h"

#include "evflow/core/error.hpp"
#include "evflow/metrics/metrics.hpp"
#include "support.hpp"

using namespace evflow;
using namespace evflow::metrics;

namespace {

FlowField random_flow(Rng& rng, int w, int h, double scale, double valid_p) {
  FlowField f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.u(x, y) = static_cast<float>(rng.uniform(-scale, scale));
      f.v(x, y) = static_cast<float>(rng.uniform(-scale, scale));
      f.valid(x, y) = rng.uniform() < valid_p;
    }
  }
  return f;
}

struct Brute {
  double epe;
  double out;
};

// Elementwise reference loop.
Brute brute(const FlowField& p, const FlowField& g, const Mask& m) {
  double sum = 0.0;
  double out = 0.0;
  int n = 0;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (!m(x, y)) continue;
      const double du = double(p.u(x, y)) - double(g.u(x, y));
      const double dv = double(p.v(x, y)) - double(g.v(x, y));
      const double e = std::sqrt(du * du + dv * dv);
      const double mag = std::sqrt(double(g.u(x, y)) * g.u(x, y) + double(g.v(x, y)) * g.v(x, y));
      sum += e;
      if (e > 3.0 && e > 0.05 * mag) out += 1.0;
      ++n;
    }
  }
  return n == 0 ? Brute{0, 0} : Brute{sum / n, 100.0 * out / n};
}

}  // namespace

TEST_CASE("identical fields have zero error") {
  Rng rng(1);
  const FlowField g = random_flow(rng, 8, 8, 5, 1.0);
  CHECK(epe(g, g, g.valid) == 0.0);
  CHECK(outlier_pct(g, g, g.valid) == 0.0);
}

TEST_CASE("a (3, 4) offset at one pixel has end-point error 5") {
  FlowField g(3, 3);
  FlowField p(3, 3);
  p.u(1, 2) = 3.0f;
  p.v(1, 2) = 4.0f;
  Mask m(3, 3, 0);
  m(1, 2) = 1;
  CHECK(epe(p, g, m) == 5.0);
}

TEST_CASE("outliers need both the absolute and relative excess") {
  FlowField g(1, 1);
  FlowField p(1, 1);
  Mask m(1, 1, 1);
  g.u(0, 0) = 100.0f;
  p.u(0, 0) = 104.0f;
  CHECK(outlier_pct(p, g, m) == 0.0);
  g.u(0, 0) = 10.0f;
  p.u(0, 0) = 14.0f;
  CHECK(outlier_pct(p, g, m) == 100.0);
}

TEST_CASE("metrics match the brute-force loop on random fields") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const FlowField g = random_flow(rng, 8, 8, 20, 0.8);
    const FlowField p = random_flow(rng, 8, 8, 20, 1.0);
    const Brute b = brute(p, g, g.valid);
    CHECK(std::abs(epe(p, g, g.valid) - b.epe) <= 1e-9);
    CHECK(outlier_pct(p, g, g.valid) == b.out);
  }
}

TEST_CASE("epe is invariant to a shared translation") {
  Rng rng(3);
  FlowField g = random_flow(rng, 8, 8, 3, 1.0);
  FlowField p = random_flow(rng, 8, 8, 3, 1.0);
  const double before = epe(p, g, g.valid);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      g.u(x, y) += 0.5f;
      p.u(x, y) += 0.5f;
      g.v(x, y) -= 0.25f;
      p.v(x, y) -= 0.25f;
    }
  }
  CHECK(std::abs(epe(p, g, g.valid) - before) < 1e-5);
}

TEST_CASE("outlier percentage does not drop when errors are scaled up") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const FlowField g = random_flow(rng, 8, 8, 10, 1.0);
    const FlowField p = random_flow(rng, 8, 8, 10, 1.0);
    double prev = outlier_pct(p, g, g.valid);
    for (double lambda : {1.0, 1.5, 2.0, 4.0}) {
      FlowField q = g;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          q.u(x, y) = g.u(x, y) + static_cast<float>(lambda * (p.u(x, y) - g.u(x, y)));
          q.v(x, y) = g.v(x, y) + static_cast<float>(lambda * (p.v(x, y) - g.v(x, y)));
        }
      }
      const double now = outlier_pct(q, g, g.valid);
      CHECK(now >= prev);
      prev = now;
    }
  }
}

TEST_CASE("evaluate selects dense and sparse masks") {
  Rng rng(5);
  const FlowField g = random_flow(rng, 8, 8, 4, 1.0);
  const FlowField p = random_flow(rng, 8, 8, 4, 1.0);
  const EvalReport dense = evaluate(p, g, EvalMode::kDense);
  CHECK(dense.n_pixels == 64);
  CHECK_FALSE(dense.degenerate);

  const repr::VoxelGrid empty(5, 8, 8, 0, 10);
  const EvalReport none = evaluate(p, g, EvalMode::kSparse, &empty);
  CHECK(none.n_pixels == 0);
  CHECK(none.degenerate);
  CHECK(none.epe == 0.0);
  CHECK(none.out_pct == 0.0);

  // Events on the left half only.
  repr::VoxelGrid half(5, 8, 8, 0, 10);
  Mask left(8, 8, 0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 4; ++x) {
      half.at(2, y, x) = 1.0f;
      left(x, y) = 1;
    }
  }
  const EvalReport sparse = evaluate(p, g, EvalMode::kSparse, &half);
  CHECK(sparse.n_pixels == 32);
  CHECK(std::abs(sparse.epe - brute(p, g, left).epe) < 1e-9);
  CHECK(sparse.out_pct == brute(p, g, left).out);

  CHECK_THROWS_AS(evaluate(p, g, EvalMode::kSparse), Error);
  const FlowField small(4, 4);
  CHECK_THROWS_AS(evaluate(small, g, EvalMode::kDense), Error);
  CHECK(parse_eval_mode("sparse") == EvalMode::kSparse);
  CHECK_THROWS_AS(parse_eval_mode("both"), Error);
}
