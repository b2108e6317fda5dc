#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soltower/boxes.hpp"
#include "soltower/rng.hpp"

using namespace soltower;

namespace {

UnitCube cube2(const Rat& x, const Rat& y) { return UnitCube{{x, y}}; }

}  // namespace

TEST_CASE("nearest lattice point") {
    auto r = nearest_lattice({Rat(3, 10), Rat(-1, 5)});
    CHECK(r[0] == 0);
    CHECK(r[1] == 0);

    r = nearest_lattice({Rat(1, 2), Rat(1, 2)});  // tie goes to floor
    CHECK(r[0] == 0);
    CHECK(r[1] == 0);

    r = nearest_lattice({Rat(3, 5), Rat(6, 5)});
    CHECK(r[0] == 1);
    CHECK(r[1] == 1);
}

TEST_CASE("host grid cube") {
    SECTION("a grid cube hosts itself with sub-cube index 0") {
        auto h = host_grid_cube(cube2(Rat(2), Rat(-1)));
        CHECK(h.lattice[0] == 2);
        CHECK(h.lattice[1] == -1);
        CHECK(h.sub.i == std::vector<int>{0, 0});
    }
    SECTION("q = (1.25, 0.25): brute force confirms the returned sub-cube") {
        UnitCube q = cube2(Rat(5, 4), Rat(1, 4));
        auto h = host_grid_cube(q);
        CHECK(h.lattice[0] == 1);
        CHECK(h.lattice[1] == 0);
        Box g = grid_cube_box(h.lattice);
        Box sb = h.sub.sub_box(q);
        CHECK(g.contains(sb));
        CHECK(q.box().contains(sb));
        // brute force over all four sub-cubes: at least one fits, ours does
        int fits = 0;
        for (int a : {-1, 0})
            for (int b : {-1, 0}) {
                SubCubeIndex s{{a, b}};
                if (g.contains(s.sub_box(q))) ++fits;
            }
        CHECK(fits >= 1);
    }
    SECTION("cube centered at a cell corner: host is the floor lattice point") {
        UnitCube q = cube2(Rat(1, 2), Rat(1, 2));
        auto h = host_grid_cube(q);
        CHECK(h.lattice[0] == 0);
        CHECK(h.lattice[1] == 0);
        // all four sub-cubes land in distinct grid cubes
        for (int a : {-1, 0})
            for (int b : {-1, 0}) {
                SubCubeIndex s{{a, b}};
                Box sb = s.sub_box(q);
                RatVec mid{(sb.iv[0].lo + sb.iv[0].hi) / 2, (sb.iv[1].lo + sb.iv[1].hi) / 2};
                Box host = grid_cube_box(nearest_lattice(mid));
                CHECK(host.contains(sb));
            }
    }
}

TEST_CASE("grid incidence") {
    SECTION("single grid cube is incident only to itself") {
        auto inc = grid_incidence({cube2(Rat(0), Rat(0))});
        REQUIRE(inc.size() == 1);
        CHECK(inc.begin()->first == LatticeKey{0, 0});
    }
    SECTION("cube at a corner touches 4 grid cubes, bound tight") {
        auto inc = grid_incidence({cube2(Rat(1, 2), Rat(1, 2))});
        CHECK(inc.size() == 4);
        for (auto& [k, ids] : inc) CHECK(ids.size() == 1);
    }
    SECTION("random disjoint cubes keep lists within 2^{2d}") {
        Rng rng(77);
        std::vector<UnitCube> cubes;
        while (cubes.size() < 20) {
            UnitCube c{{Rat(static_cast<long>(rng.below(4000)), 100),
                        Rat(static_cast<long>(rng.below(4000)), 100)}};
            bool ok = true;
            for (const auto& o : cubes)
                if (!closed_disjoint(c.box(), o.box())) ok = false;
            if (ok) cubes.push_back(c);
        }
        auto inc = grid_incidence(cubes);
        for (auto& [k, ids] : inc) CHECK(ids.size() <= 4);
    }
    SECTION("overlapping inputs are rejected") {
        CHECK_THROWS_AS(grid_incidence({cube2(Rat(0), Rat(0)), cube2(Rat(1, 4), Rat(0))}),
                        std::invalid_argument);
        // touching closed cubes are not disjoint either
        CHECK_THROWS_AS(grid_incidence({cube2(Rat(0), Rat(0)), cube2(Rat(1), Rat(0))}),
                        std::invalid_argument);
        // ... but half-open tilings are fine
        CHECK_NOTHROW(grid_incidence({cube2(Rat(0), Rat(0)), cube2(Rat(1), Rat(0))}, true));
    }
}

TEST_CASE("measure of box union") {
    auto box = [](long x0, long y0, long x1, long y1) {
        Box b;
        b.iv = {Interval{Rat(x0, 100), Rat(x1, 100)}, Interval{Rat(y0, 100), Rat(y1, 100)}};
        return b;
    };

    SECTION("one unit box") { CHECK(measure_of_box_union({box(0, 0, 100, 100)}) == 1); }

    SECTION("two overlapping unit boxes: inclusion-exclusion by hand") {
        CHECK(measure_of_box_union({box(0, 0, 100, 100), box(50, 50, 150, 150)}) == Rat(7, 4));
    }

    SECTION("random boxes vs Monte Carlo") {
        Rng rng(12345);
        std::vector<Box> boxes;
        for (int i = 0; i < 10; ++i) {
            long x0 = static_cast<long>(rng.below(300)), y0 = static_cast<long>(rng.below(300));
            long w = static_cast<long>(rng.below(150)) + 10, h = static_cast<long>(rng.below(150)) + 10;
            boxes.push_back(box(x0, y0, x0 + w, y0 + h));
        }
        Rat exact = measure_of_box_union(boxes);
        const double X = 4.6;
        const int N = 1000000;
        long hits = 0;
        for (int i = 0; i < N; ++i) {
            double x = rng.unit_double() * X, y = rng.unit_double() * X;
            for (const auto& b : boxes) {
                if (x >= b.iv[0].lo.get_d() && x <= b.iv[0].hi.get_d() &&
                    y >= b.iv[1].lo.get_d() && y <= b.iv[1].hi.get_d()) {
                    ++hits;
                    break;
                }
            }
        }
        double p = exact.get_d() / (X * X);
        double sigma = std::sqrt(N * p * (1 - p));
        CHECK(std::abs(hits - N * p) <= 3 * sigma);
    }

    SECTION("4-dimensional boxes") {
        Box a;
        a.iv = {Interval{Rat(0), Rat(1)}, Interval{Rat(0), Rat(1)}, Interval{Rat(0), Rat(1)},
                Interval{Rat(0), Rat(1)}};
        Box b = a;
        b.iv[0] = Interval{Rat(1, 2), Rat(3, 2)};
        CHECK(measure_of_box_union({a, b}) == Rat(3, 2));
    }
}
