#include "nlsv/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nlsv;

TEST_SUITE("rng") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<double> xa(100), xb(100), xc(100), xd(100);
  a.normals(xa);
  b.normals(xb);
  c.normals(xc);
  d.normals(xd);
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
  const RngStream base(42, 7);
  CHECK(base.substream(1).normal() != base.substream(2).normal());
  CHECK(base.substream(3).normal() == RngStream(42, 7, 3).normal());
}

TEST_CASE("normal draws have unit variance and are uncorrelated across streams") {
  const int n = 200000;
  RngStream a(1, 0), b(1, 1);
  double s = 0, s2 = 0, s3 = 0, s4 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    const double y = b.normal();
    s += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
    cross += x * y;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s3 / n) < 4.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(cross / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("uniforms lie in the open unit interval") {
  RngStream r(5, 5);
  double lo = 1, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 1e-3);
  CHECK(hi > 1 - 1e-3);
}

TEST_CASE("null stream yields zeros") {
  RngStream z = RngStream::null();
  CHECK(z.is_null());
  for (int i = 0; i < 10; ++i) CHECK(z.normal() == 0.0);
  CHECK(z.substream(3).normal() == 0.0);
}

TEST_CASE("block accounting") {
  RngStream r(9, 9);
  CHECK(r.blocks_used() == 0);
  for (int i = 0; i < 4; ++i) r.normal();
  const auto used = r.blocks_used();
  CHECK(used >= 1);
  RngStream s(9, 9);
  for (int i = 0; i < 4; ++i) s.normal();
  CHECK(s.blocks_used() == used);
}

}  // TEST_SUITE
