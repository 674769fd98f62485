#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "curplus/io.hpp"
#include "helpers.hpp"

using namespace curplus;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("matrix market array round trip", "[io]") {
  Rng rng(101);
  const Matrix M = test::random_matrix(6, 4, rng);
  std::stringstream ss;
  write_matrix_market_array(M, ss);
  const Matrix back = read_matrix_market_array(ss);
  REQUIRE(back.rows() == 6);
  REQUIRE(back.cols() == 4);
  CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix market coordinate round trip keeps 1-based disk indices",
          "[io]") {
  std::vector<Observation> entries{{0, 0, 1.5}, {2, 1, -3.25}};
  const ObservationSet obs(3, 2, std::move(entries));
  std::stringstream ss;
  write_matrix_market_coord(obs, ss);

  const std::string text = ss.str();
  CHECK_THAT(text, ContainsSubstring("1 1 1.5"));
  CHECK_THAT(text, ContainsSubstring("3 2 -3.25"));

  const ObservationSet back = read_matrix_market_coord(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].row == 0);
  CHECK(back[1].row == 2);
  CHECK(back[1].col == 1);
  CHECK(back[1].value == -3.25);
}

TEST_CASE("csv round trip", "[io]") {
  Rng rng(102);
  const Matrix M = test::random_matrix(5, 7, rng);
  std::stringstream ss;
  write_csv(M, ss);
  const Matrix back = read_csv(ss);
  CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bad matrix market banner is rejected", "[io]") {
  std::stringstream ss("%%NotMatrixMarket foo\n2 2\n1\n2\n3\n4\n");
  REQUIRE_THROWS_WITH(read_matrix_market_array(ss),
                      ContainsSubstring("banner"));
}

TEST_CASE("coordinate format rejected by the array reader", "[io]") {
  std::stringstream ss(
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 5\n");
  REQUIRE_THROWS_WITH(read_matrix_market_array(ss),
                      ContainsSubstring("expected array"));
}

TEST_CASE("truncated array data is rejected", "[io]") {
  std::stringstream ss("%%MatrixMarket matrix array real general\n2 2\n1\n2\n");
  REQUIRE_THROWS_WITH(read_matrix_market_array(ss),
                      ContainsSubstring("truncated"));
}

TEST_CASE("ragged csv is rejected", "[io]") {
  std::stringstream ss("1,2,3\n4,5\n");
  REQUIRE_THROWS_WITH(read_csv(ss), ContainsSubstring("ragged"));
}
