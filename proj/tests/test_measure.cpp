#include "ebt/measure.hpp"
#include "ebt/measure_io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace ebt;

TEST_CASE("total mass") {
    CHECK(total_mass(AtomicMeasure(1)) == 0.0);
    AtomicMeasure mu(1);
    mu.add(0.5, 2.0);
    mu.add(1.0, 3.0);
    CHECK(total_mass(mu) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("unit density on [0,1) has total mass one on any uniform grid") {
    for (int cells : {1, 7, 10, 64, 1000}) {
        AtomicMeasure mu(1);
        const double w = 1.0 / cells;
        for (int i = 0; i < cells; ++i) {
            mu.add((i + 0.5) * w, w);
        }
        CHECK(std::abs(total_mass(mu) - 1.0) <= 1e-12);
    }
}

TEST_CASE("normalize") {
    AtomicMeasure single(1, {0.0}, {2.0});
    CHECK(normalize(single).weight(0) == 1.0);

    AtomicMeasure two(1, {0.0, 1.0}, {1.0, 3.0});
    const auto n = normalize(two);
    CHECK(n.weight(0) == doctest::Approx(0.25));
    CHECK(n.weight(1) == doctest::Approx(0.75));
    CHECK(n.coord(1, 0) == 1.0);

    CHECK_THROWS_AS(normalize(AtomicMeasure(1, {0.0}, {0.0})), std::domain_error);
    CHECK_THROWS_AS(normalize(AtomicMeasure(2)), std::domain_error);
}

TEST_CASE("invalid atoms are rejected") {
    AtomicMeasure mu(1);
    CHECK_THROWS_AS(mu.add(0.1, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(mu.add(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mu.add(0.1, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(mu.add(0.1, 0.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(AtomicMeasure(3), std::invalid_argument);
    CHECK_THROWS_AS(AtomicMeasure(2, {0.0, 1.0, 2.0}, {1.0}), std::invalid_argument);
    mu.add(0.0, 0.0);
    CHECK(mu.size() == 1);
}

TEST_CASE("dirac upper bound") {
    AtomicMeasure mu(1, {0.0, 1.0}, {1.0, 2.0});
    CHECK(dirac_upper_bound(mu, mu) == 0.0);
    CHECK(dirac_upper_bound(AtomicMeasure(1, {0.0}, {1.0}), AtomicMeasure(1, {0.3}, {1.0})) ==
          doctest::Approx(0.3));
    AtomicMeasure nu(1, {0.1, 1.0}, {1.5, 2.0});
    CHECK(dirac_upper_bound(mu, nu) == doctest::Approx(0.6));
    CHECK_THROWS_AS(dirac_upper_bound(mu, AtomicMeasure(1, {0.0}, {1.0})), std::invalid_argument);
}

TEST_CASE("total variation with location matching") {
    AtomicMeasure mu(1, {0.0, 1.0}, {1.0, 2.0});
    CHECK(tv_distance(mu, mu) == 0.0);
    CHECK(tv_distance(AtomicMeasure(1, {0.0}, {1.0}), AtomicMeasure(1, {0.001}, {1.0})) ==
          doctest::Approx(2.0));
    CHECK(tv_distance(mu, AtomicMeasure(1, {0.0}, {1.5})) == doctest::Approx(2.5));
    // Locations equal after rounding to 12 decimals are matched.
    CHECK(tv_distance(AtomicMeasure(1, {0.3}, {1.0}), AtomicMeasure(1, {0.1 + 0.2}, {1.0})) == 0.0);
}

TEST_CASE("total variation never exceeds the summed masses") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + trial % 2;
        const auto a = oracle::random_measure(rng, dim, 1 + trial % 9, 1.0, false);
        const auto b = oracle::random_measure(rng, dim, 1 + trial % 5, 1.0, false);
        CHECK(tv_distance(a, b) <= total_mass(a) + total_mass(b) + 1e-12);
    }
}

TEST_CASE("drop zero atoms and bounding box") {
    AtomicMeasure mu(2);
    mu.add(0.5, 0.25, 0.0);
    mu.add(1.0, 2.0, 3.0);
    const auto d = drop_zero_atoms(mu);
    REQUIRE(d.size() == 1);
    CHECK(d.coord(0, 1) == 2.0);
    const auto box = joint_bounding_box(mu, AtomicMeasure(2, {3.0, 0.0}, {1.0}));
    CHECK(box.lo[0] == 0.5);
    CHECK(box.hi[0] == 3.0);
    CHECK(box.lo[1] == 0.0);
    CHECK(box.hi[1] == 2.0);
    CHECK(box.diameter() == doctest::Approx(std::hypot(2.5, 2.0)));
}

TEST_CASE("csv round trip is exact") {
    std::mt19937_64 rng(3);
    for (int dim : {1, 2}) {
        const auto mu = oracle::random_measure(rng, dim, 17, 3.0, false);
        std::stringstream ss;
        write_measure_csv(ss, mu);
        const auto back = read_measure_csv(ss);
        CHECK(back.dim() == dim);
        CHECK(back.coords() == mu.coords());
        CHECK(back.weights() == mu.weights());
    }
}

TEST_CASE("json round trip and file dispatch") {
    AtomicMeasure mu(2, {0.1, 0.2, 1.5, 0.0}, {0.25, 4.0});
    const auto back = measure_from_json(measure_to_json(mu));
    CHECK(back.coords() == mu.coords());
    CHECK(back.weights() == mu.weights());

    const auto dir = std::filesystem::temp_directory_path() / "ebt_measure_io_test";
    std::filesystem::create_directories(dir);
    for (const char *name : {"m.csv", "m.json"}) {
        save_measure(dir / name, mu);
        const auto loaded = load_measure(dir / name);
        CHECK(loaded.weights() == mu.weights());
        CHECK(loaded.coords() == mu.coords());
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed measure files are rejected") {
    std::stringstream bad_header("a,b\n1,2\n");
    CHECK_THROWS(read_measure_csv(bad_header));
    std::stringstream bad_value("x,weight\n0.5,abc\n");
    CHECK_THROWS(read_measure_csv(bad_value));
    std::stringstream negative("x,weight\n0.5,-1\n");
    CHECK_THROWS(read_measure_csv(negative));
    CHECK_THROWS(measure_from_json(R"({"dim":2,"points":[[1]],"weights":[1]})"));
    CHECK_THROWS(measure_from_json("not json"));
}
