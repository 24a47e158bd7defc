#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"
#include "tubetrace/errors.hpp"
#include "tubetrace/imaging.hpp"

using namespace tubetrace;
using testing::mask_from_rows;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

RasterImage horizontal_bar(int w, int h, int row, int half_width) {
  RasterImage img(w, h, 0.0);
  for (int y = row - half_width; y <= row + half_width; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 1.0;
  return img;
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("raw PGM bytes map to intensities") {
  std::string file = "P5\n2 2\n255\n";
  file += std::string{char(0), char(255), char(128), char(64)};
  const RasterImage img = decode_image(bytes_of(file));
  REQUIRE(img.width() == 2);
  REQUIRE(img.height() == 2);
  CHECK(img.at(0, 0) == 0.0);
  CHECK(img.at(1, 0) == 1.0);
  CHECK(img.at(0, 1) == doctest::Approx(128.0 / 255.0));
  CHECK(img.at(1, 1) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("ASCII PGM with comments and a non-255 maximum") {
  const RasterImage img = decode_image(bytes_of("P2\n# hello\n3 1\n4\n0 2 4\n"));
  REQUIRE(img.width() == 3);
  CHECK(img.at(1, 0) == doctest::Approx(0.5));
  CHECK(img.at(2, 0) == 1.0);
}

TEST_CASE("all-zero image stays zero") {
  std::string file = "P5\n3 2\n255\n" + std::string(6, char(0));
  const RasterImage img = decode_image(bytes_of(file));
  for (double v : img.values()) CHECK(v == 0.0);
}

TEST_CASE("truncated or unknown input is rejected") {
  for (const std::string bad : {"P5\n2", "P5\n2 2\n255\n\x01", "GIF89a", ""}) {
    CAPTURE(bad);
    try {
      (void)decode_image(bytes_of(bad));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("unsupported format") == 0);
    }
  }
  CHECK_THROWS_AS(decode_image(bytes_of("P5\n0 4\n255\n")), FormatError);
}

TEST_CASE("PGM encode/decode round trip through a file") {
  RasterImage img(5, 4, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y) = (x + 5 * y) / 19.0;
  const auto path = std::filesystem::temp_directory_path() / "tubetrace_roundtrip.pgm";
  save_pgm(img, path);
  const RasterImage back = load_image(path);
  std::filesystem::remove(path);
  REQUIRE(back.width() == 5);
  for (std::size_t k = 0; k < img.size(); ++k)
    CHECK(back.values()[k] == doctest::Approx(img.values()[k]).epsilon(0.5 / 255.0));
  CHECK_THROWS_AS(load_image("/nonexistent/x.pgm"), Error);
}

TEST_CASE("tubularity of a constant image is zero") {
  const RasterImage img(20, 20, 0.7);
  const std::vector<double> scales{1.0, 2.0};
  const ScalarField f = tubularity(img, scales);
  CHECK(f.width() == 20);
  for (double v : f.values()) CHECK(v == 0.0);
}

TEST_CASE("bar centre row carries the maximal response") {
  const int row = 16;
  const RasterImage img = horizontal_bar(40, 33, row, 1);
  const std::vector<double> scales{1.5};
  const ScalarField f = tubularity(img, scales, true);

  // brute-force scan for the brightest row of the rendered image and the argmax row of
  // the field, away from the left/right borders
  int brightest = 0, best_row = 0;
  double bright = -1.0, best = -1.0;
  for (int y = 0; y < img.height(); ++y) {
    double s = 0.0, fs = 0.0;
    for (int x = 5; x < 35; ++x) {
      s += img.at(x, y);
      fs += f.at(x, y);
    }
    if (s > bright) bright = s, brightest = y;
    if (fs > best) best = fs, best_row = y;
  }
  CHECK(brightest == row - 1);  // first of the three equal rows
  CHECK(best_row == row);
  CHECK(f.at(20, row) == doctest::Approx(1.0));

  const ScalarField dark = tubularity(img, scales, false);
  CHECK(dark.at(20, row) == 0.0);
}

TEST_CASE("tubularity rejects bad scales") {
  const RasterImage img(8, 8, 0.0);
  CHECK_THROWS_AS(tubularity(img, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(tubularity(img, std::vector<double>{0.3}), InvalidArgument);
}

TEST_CASE("binarize thresholds inclusively") {
  CHECK(testing::count_true(binarize(ScalarField(3, 3, 0.6), 0.5)) == 9);
  CHECK(testing::count_true(binarize(ScalarField(3, 3, 0.4), 0.5)) == 0);
  const BinaryMask m = binarize(ScalarField(2, 1, std::vector<double>{0.2, 0.8}), 0.5);
  CHECK(m.at(0, 0) == 0);
  CHECK(m.at(1, 0) == 1);
  CHECK(binarize(ScalarField(1, 1, 0.5), 0.5).at(0, 0) == 1);
  CHECK_THROWS_AS(binarize(ScalarField(1, 1, 0.5), 1.0), InvalidArgument);
}

TEST_CASE("skeletonize keeps thin input and empties empty input") {
  const BinaryMask empty(10, 10, 0);
  CHECK(skeletonize(empty) == empty);
  const BinaryMask line = mask_from_rows({
      "..........",
      ".########.",
      "..........",
  });
  CHECK(skeletonize(line) == line);
  const BinaryMask diag = mask_from_rows({
      "#.....",
      ".#....",
      "..#...",
      "...##.",
  });
  CHECK(skeletonize(diag) == diag);
}

TEST_CASE("7x3 rectangle thins to a middle-row curve") {
  const BinaryMask rect = mask_from_rows({
      ".........",
      ".#######.",
      ".#######.",
      ".#######.",
      ".........",
  });
  const BinaryMask sk = skeletonize(rect);
  CHECK(testing::components8(sk) == 1);
  CHECK_FALSE(testing::has_full_2x2(sk));
  // textbook two-subcycle deletion, worked through by hand: the ends erode unevenly
  const BinaryMask expected = mask_from_rows({
      ".........",
      ".........",
      "..####...",
      ".........",
      ".........",
  });
  CHECK(sk == expected);
}

TEST_CASE("plus sign splits into four arms") {
  BinaryMask plus(11, 11, 0);
  for (int k = 1; k <= 9; ++k) {
    plus.at(k, 5) = 1;
    plus.at(5, k) = 1;
  }
  // independent count: the centre is the only pixel with >= 3 foreground 4-neighbours
  int branch = 0;
  for (int y = 1; y < 10; ++y)
    for (int x = 1; x < 10; ++x) {
      if (!plus.at(x, y)) continue;
      const int n4 = plus.at(x + 1, y) + plus.at(x - 1, y) + plus.at(x, y + 1) + plus.at(x, y - 1);
      branch += n4 >= 3;
    }
  CHECK(branch == 1);

  const auto segs = extract_segments(plus, 3);
  REQUIRE(segs.size() == 4);
  std::set<Pixel> all;
  for (const Segment& s : segs) {
    CHECK(s.points.size() == 4);
    for (Pixel p : s.points) {
      CHECK_FALSE(p == Pixel{5, 5});
      all.insert(p);
    }
  }
  CHECK(all.size() == 16);
}

TEST_CASE("straight line tangents point outward along x") {
  BinaryMask line(14, 3, 0);
  for (int x = 2; x < 12; ++x) line.at(x, 1) = 1;
  const auto segs = extract_segments(line, 3);
  REQUIRE(segs.size() == 1);
  const Segment& s = segs[0];
  CHECK(s.points.size() == 10);
  const Point2 outward_a = s.endpoint_a().x < s.endpoint_b().x ? Point2{-1, 0} : Point2{1, 0};
  CHECK(s.tangent_a.x == doctest::Approx(outward_a.x).epsilon(1e-3));
  CHECK(std::abs(s.tangent_a.y) < 1e-3);
  CHECK(s.tangent_b.x == doctest::Approx(-s.tangent_a.x).epsilon(1e-3));
  CHECK(std::abs(s.tangent_b.y) < 1e-3);
}

TEST_CASE("short components are dropped") {
  BinaryMask line(6, 3, 0);
  line.at(2, 1) = line.at(3, 1) = 1;
  CHECK(extract_segments(line, 3).empty());
  CHECK(extract_segments(line, 2).size() == 1);
}

TEST_CASE("a closed ring is opened at its top-left pixel") {
  const BinaryMask ring = mask_from_rows({
      ".......",
      "..###..",
      ".#...#.",
      ".#...#.",
      "..###..",
      ".......",
  });
  const auto segs = extract_segments(ring, 3);
  REQUIRE(segs.size() == 1);
  const Segment& s = segs[0];
  CHECK(s.points.size() == 10);
  // opened at the topmost-leftmost pixel: the walk starts there
  CHECK(s.points.front() == Pixel{2, 1});
  for (std::size_t k = 1; k < s.points.size(); ++k)
    CHECK(std::max(std::abs(s.points[k].x - s.points[k - 1].x),
                   std::abs(s.points[k].y - s.points[k - 1].y)) == 1);
}

TEST_CASE("fit_end_tangent is unit and outward") {
  const std::vector<Pixel> pts{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
  const Point2 front = fit_end_tangent(pts, true);
  const Point2 back = fit_end_tangent(pts, false);
  CHECK(norm(front) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(front.x == doctest::Approx(-std::sqrt(0.5)));
  CHECK(back.y == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("skeleton and segment invariants on random masks") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    CAPTURE(seed);
    const BinaryMask m = testing::random_mask(seed);
    const BinaryMask sk = skeletonize(m);

    // subset and idempotence
    bool subset = true;
    for (std::size_t k = 0; k < m.size(); ++k) subset &= !sk.values()[k] || m.values()[k];
    CHECK(subset);
    CHECK(skeletonize(sk) == sk);
    CHECK_FALSE(testing::has_full_2x2(sk));

    const auto segs = extract_segments(sk, 3);
    std::set<Pixel> seen;
    for (const Segment& s : segs) {
      REQUIRE(s.points.size() >= 3);
      CHECK(norm(s.tangent_a) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(norm(s.tangent_b) == doctest::Approx(1.0).epsilon(1e-6));
      for (Pixel p : s.points) {
        CHECK(sk.at(p) == 1);
        // disjointness across segments and no repeats within one
        CHECK(seen.insert(p).second);
      }
      // consecutive points are 8-neighbours; every point touches only its chain
      // neighbours when measured with the tracing adjacency
      BinaryMask own(sk.width(), sk.height(), 0);
      for (Pixel p : s.points) own.at(p) = 1;
      for (std::size_t k = 0; k < s.points.size(); ++k) {
        const Pixel p = s.points[k];
        if (k + 1 < s.points.size()) {
          const Pixel q = s.points[k + 1];
          CHECK(std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) == 1);
        }
        const std::size_t expected = (k == 0 || k + 1 == s.points.size()) ? 1 : 2;
        CHECK(detail::m_neighbors(own, p).size() == expected);
      }
    }
  }
}

}  // TEST_SUITE
