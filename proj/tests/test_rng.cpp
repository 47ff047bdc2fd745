/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <vector>

#include "pasoa/rng.hpp"
#include "test_helpers.hpp"

using namespace pasoa;

TEST_SUITE("rng") {

TEST_CASE("streams are deterministic and fork-independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // forking does not consume parent draws, and fork order is irrelevant
  Rng parent(7);
  Rng f1 = parent.fork({3, 4});
  (void)parent.next_u64();
  Rng f2 = parent.fork({3, 4});
  CHECK(f1.next_u64() == f2.next_u64());

  // distinct tags give distinct streams
  CHECK(parent.fork({3, 5}).next_u64() != parent.fork({3, 4}).next_u64());
  CHECK(parent.fork({1}).next_u64() != parent.fork({2}).next_u64());
}

TEST_CASE("u01 lies in (0, 1]") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.u01();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("normal draws have the right moments") {
  Rng rng(2);
  const std::size_t n = 1000000;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.5 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform_index stays in range and covers it") {
  Rng rng(3);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto v = rng.uniform_index(10);
    REQUIRE(v < 10);
    counts[v] += 1;
  }
  for (int c : counts) CHECK(c > 800);
}

}  // TEST_SUITE
