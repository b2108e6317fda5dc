#include <catch2/catch_amalgamated.hpp>

#include "soltower/enumeration.hpp"
#include "soltower/towers.hpp"
#include "test_util.hpp"

using namespace soltower;

namespace {

TowersPlan desk_towers_plan() {
    TowersPlan plan;
    plan.radix = radix_products({2, 8, 8});  // a = (2, 16, 128)
    plan.polys = desk_polys(3);
    plan.degree_caps = {8, 16, 16};
    return plan;
}

}  // namespace

TEST_CASE("tower validation") {
    SECTION("solenoid tower from radix (2,4,8): a = R = (2,8,64), exact pass") {
        auto seq = radix_products({2, 4, 8});
        SolenoidModel m(seq);
        auto t = solenoid_tower(seq);
        CHECK(t.sum_ratio() == Rat(3, 8));  // 2/8 + 8/64
        auto rep = validate_tower(t, m);
        CHECK(rep.exact);
        CHECK(rep.sset_disjoint);
        CHECK(rep.nested);
        for (double c : rep.coverage) CHECK(c == 1.0);
    }
    SECTION("a = (1,3,9) violates the ratio sum") {
        TowerData t;
        t.a = {Rat(1), Rat(3), Rat(9)};
        SolenoidModel m(radix_products({2, 2, 2}));
        CHECK_THROWS_AS(validate_tower(t, m), std::invalid_argument);
    }
    SECTION("a = (1,4,16) sits exactly at 1/2: strict inequality required") {
        TowerData t;
        t.a = {Rat(1), Rat(4), Rat(16)};
        SolenoidModel m(radix_products({2, 2, 2}));
        CHECK_THROWS_AS(validate_tower(t, m), std::invalid_argument);
    }
    SECTION("non-integer ratios are rejected") {
        TowerData t;
        t.a = {Rat(2), Rat(7), Rat(100)};
        SolenoidModel m(radix_products({2, 2, 2}));
        CHECK_THROWS_AS(validate_tower(t, m), std::invalid_argument);
    }
    SECTION("sampled model reports coverage with confidence intervals") {
        auto seq = radix_products({2, 4, 8});
        SolenoidModel m(seq, /*exact=*/false);
        auto rep = validate_tower(solenoid_tower(seq), m, 400, 9);
        CHECK_FALSE(rep.exact);
        REQUIRE(rep.coverage.size() == 3);
        for (size_t i = 0; i < rep.coverage.size(); ++i)
            CHECK(rep.coverage[i] + rep.coverage_ci[i] >= 1.0);
    }
}

TEST_CASE("return sets on the exact solenoid") {
    auto seq = radix_products({2, 2});  // a = (2, 4)
    SolenoidModel m(seq);
    auto t = solenoid_tower(seq);
    auto x = m.base_point(2);
    auto rs = return_sets(x, 2, 1, t, m);
    REQUIRE(rs.size() == 1);

    SECTION("R_2^1 = {0,2}^2, four points") {
        REQUIRE(rs[0].pts.size() == 4);
        std::vector<std::pair<long, long>> got;
        for (const auto& p : rs[0].pts)
            got.push_back({p[0].get_num().get_si(), p[1].get_num().get_si()});
        std::sort(got.begin(), got.end());
        CHECK(got == std::vector<std::pair<long, long>>{{0, 0}, {0, 2}, {2, 0}, {2, 2}});
    }
    SECTION("spacing is at least a_{n-1}, exactly") {
        CHECK(rs[0].min_spacing >= Rat(2));
        CHECK(rs[0].min_spacing == Rat(2));  // lattice spacing achieved
    }
    SECTION("count matches (a_n/a_{n-1})^2") { CHECK(rs[0].pts.size() == 4); }
    SECTION("points outside B_n are rejected") {
        auto y = translate(x, {Rat(1, 3), Rat(0)});
        CHECK_THROWS_AS(return_sets(y, 2, 1, t, m), std::invalid_argument);
    }
}

TEST_CASE("delta-fine partitions") {
    auto seq = radix_products({2, 8, 8});
    SolenoidModel m(seq);
    auto t = solenoid_tower(seq);

    SECTION("the solenoid needs a single cell with d_H = 0") {
        auto part = delta_fine_partition(t, 2, Rat(1, 100), m);
        CHECK(part.cells() == 1);
        CHECK(m.in_base(part.reps[0], 2));
    }
    SECTION("refining delta keeps the partition nested (both trivial)") {
        auto coarse = delta_fine_partition(t, 2, Rat(1, 10), m);
        auto fine = delta_fine_partition(t, 2, Rat(1, 1000), m);
        CHECK(coarse.cells() == 1);
        CHECK(fine.cells() == 1);
    }
    SECTION("injected fault: two differing return sets in one cell are caught") {
        std::vector<std::vector<RatVec>> sets;
        sets.push_back({{Rat(0), Rat(0)}, {Rat(2), Rat(0)}});
        sets.push_back({{Rat(0), Rat(0)}, {Rat(3), Rat(0)}});  // d_H = 1
        auto hit = partition_fineness_violation(sets, Rat(1, 2));
        REQUIRE(hit.has_value());
        CHECK(hit->first == 0);
        CHECK(hit->second == 1);
        CHECK_FALSE(partition_fineness_violation(sets, Rat(2)).has_value());
    }
}

TEST_CASE("center selection") {
    SECTION("a=(2,8): four lattice-aligned centers, one per quadrant") {
        TowerData t;
        t.a = {Rat(2), Rat(8)};
        auto c = choose_centers(t, 2);
        REQUIRE(c.size() == 4);
        std::vector<std::pair<long, long>> got;
        for (const auto& w : c) {
            CHECK(rat_mod(w[0], Rat(2)) == 0);  // lattice aligned
            CHECK(rat_mod(w[1], Rat(2)) == 0);
            got.push_back({w[0].get_num().get_si(), w[1].get_num().get_si()});
        }
        // quadrants [0,4)x[0,4), [0,4)x[4,8), ...: one center in each
        std::sort(got.begin(), got.end());
        for (auto& [x, y] : got) {
            CHECK(x % 2 == 0);
            CHECK(y % 2 == 0);
        }
        CHECK(got[0].first < 4);
        CHECK(got[3].first >= 4);
    }
    SECTION("ratio 2: the copy fills exactly one lattice cell per quadrant") {
        TowerData t;
        t.a = {Rat(2), Rat(4)};
        auto c = choose_centers(t, 2);
        REQUIRE(c.size() == 4);
        std::vector<std::pair<long, long>> got;
        for (const auto& w : c) got.push_back({w[0].get_num().get_si(), w[1].get_num().get_si()});
        std::sort(got.begin(), got.end());
        CHECK(got == std::vector<std::pair<long, long>>{{0, 0}, {0, 2}, {2, 0}, {2, 2}});
    }
    SECTION("ratio 1 leaves no room") {
        TowerData t;
        t.a = {Rat(2), Rat(2)};
        CHECK_THROWS_AS(choose_centers(t, 2), std::invalid_argument);
    }
    SECTION("the choice depends only on the ratio") {
        TowerData t1, t2;
        t1.a = {Rat(2), Rat(16)};
        t2.a = {Rat(4), Rat(32)};
        auto c1 = choose_centers(t1, 2);
        auto c2 = choose_centers(t2, 2);
        for (int i = 0; i < 4; ++i) {
            CHECK(c1[i][0] / Rat(2) == c2[i][0] / Rat(4));
            CHECK(c1[i][1] / Rat(2) == c2[i][1] / Rat(4));
        }
    }
}

TEST_CASE("collection assembly") {
    auto seq = radix_products({2, 8});
    SolenoidModel m(seq);
    auto t = solenoid_tower(seq);
    auto x = m.base_point(2);
    auto lambdas = return_sets(x, 2, 1, t, m)[0].pts;
    auto centers = choose_centers(t, 2);
    auto col = assemble_collection(lambdas, centers, t, 2);

    SECTION("each center displaces exactly one lattice cube") {
        CHECK(col.dropped == 4);
        CHECK(col.cubes.size() == lambdas.size());  // 4 centers + (64 - 4) lambdas
    }
    SECTION("dropped count within (2^{2d})^2") { CHECK(col.dropped <= 16); }
    SECTION("cubes pairwise disjoint and inside S_n") {
        for (const auto& c : col.cubes) {
            CHECK(c.corner[0] >= 0);
            CHECK(c.corner[1] >= 0);
            CHECK(c.corner[0] + Rat(2) <= Rat(16));
            CHECK(c.corner[1] + Rat(2) <= Rat(16));
        }
    }
}

TEST_CASE("general stage 1 is p_1 everywhere") {
    auto plan = desk_towers_plan();
    auto s1 = make_general_stage1(plan);
    CHECK(s1.n == 1);
    CHECK(s1.q == plan.polys[0]);
    REQUIRE(s1.condition_d.size() == 1);
    CHECK(s1.condition_d[0].pass);
    CHECK(s1.condition_d[0].measured == 0.0);
}

TEST_CASE("three-stage desk towers run: fits, condition D, and the E_n ledger") {
    auto plan = desk_towers_plan();
    SolenoidModel m(plan.radix);
    auto t = solenoid_tower(plan.radix);
    auto rep = validate_tower(t, m);
    REQUIRE(rep.sset_disjoint);

    auto stages = towers_build(plan, t, m, 3);
    REQUIRE(stages.size() == 3);

    Rat ledger_total = 0;
    for (int n = 2; n <= 3; ++n) {
        const auto& s = stages[n - 1];
        REQUIRE(s.report.success);
        CHECK(s.report.achieved_eps < plan.eps(n).get_d());
        // E_n < 2^{-n}, with the three summands reported
        CHECK(s.e_total < plan.eps(n));
        CHECK(s.e_total == s.e_decomposition + s.e_replaced + s.e_uncovered);
        CHECK(s.e_uncovered == 0);  // solenoid towers cover everything
        ledger_total += s.e_total;
        // Condition-(D) certificates for all k <= n
        REQUIRE(s.condition_d.size() == static_cast<size_t>(s.n));
        for (const auto& d : s.condition_d) {
            INFO("k=" << d.k << " n=" << d.n << " measured=" << d.measured);
            CHECK(d.pass);
        }
    }
    CHECK(ledger_total < 1);

    SECTION("condition D holds on random points beyond the certificate grid") {
        const auto& s3 = stages[2];
        auto d2 = s3.condition_d[1];  // k = 2
        REQUIRE(d2.k == 2);
        Rng rng(31337);
        BF lo = rat_to<BF>(d2.lo), hi = rat_to<BF>(d2.hi);
        BF wre = rat_to<BF>(d2.w.re), wim = rat_to<BF>(d2.w.im);
        const auto& p2 = plan.polys[1];
        double bound = d2.bound.get_d();
        for (int i = 0; i < 100; ++i) {
            BF x = lo + (hi - lo) * BF(rng.unit_double());
            BF y = lo + (hi - lo) * BF(rng.unit_double());
            auto ref = p2.eval<BF>({x, y});
            auto got = stages[2].q.eval<BF>({x + wre, y + wim});
            double e = to_double(cx_abs(Cx<BF>{got.re - ref.re, got.im - ref.im}));
            CHECK(e <= bound);
        }
    }
}

TEST_CASE("general stage with order-one targets fails loudly at the wall") {
    TowersPlan plan;
    plan.radix = radix_products({2, 8});
    plan.polys = diagonal_enumeration(2);  // p_1 = 0, p_2 = 1
    plan.degree_caps = {8, 24};
    SolenoidModel m(plan.radix);
    auto t = solenoid_tower(plan.radix);
    auto s1 = make_general_stage1(plan);
    try {
        general_stage(plan, s1, t, m);
        FAIL("expected approximation failure");
    } catch (const ApproximationFailure& f) {
        CHECK(f.best_report.achieved_eps > 0.2);  // jump of 1 across micro-slots
    }
}

TEST_CASE("budget violation: too-small tower ratios are rejected") {
    // ratio 4 makes the replaced-cube fraction 4/16 = 1/4 alone reach 2^{-2}
    TowersPlan plan;
    plan.radix = radix_products({2, 4, 4});
    plan.polys = desk_polys(2);
    plan.degree_caps = {8, 8};
    SolenoidModel m(plan.radix);
    auto t = solenoid_tower(plan.radix);
    auto s1 = make_general_stage1(plan);
    CHECK_THROWS_WITH(general_stage(plan, s1, t, m), Catch::Matchers::ContainsSubstring("budget"));
}

TEST_CASE("rescaling commutes with decomposition") {
    // decompose-then-rescale equals rescale-then-decompose with scaled delta
    std::vector<UnitCube> unit{UnitCube{{Rat(1, 2), Rat(1, 2)}}, UnitCube{{Rat(3, 2), Rat(1, 2)}}};
    auto dec = decompose(unit, Rat(1, 4), true);
    Rat a(2);
    for (const auto& leaf : dec.boxes) {
        // scaling the leaf by a equals insetting the scaled cell by a*delta:
        // reconstruct the unscaled cell, scale, inset, compare
        Box cell = leaf.box.inset(-dec.delta);  // outer cell edges
        Box scaled_cell;
        scaled_cell.iv = {Interval{cell.iv[0].lo * a, cell.iv[0].hi * a},
                          Interval{cell.iv[1].lo * a, cell.iv[1].hi * a}};
        Box direct = scaled_cell.inset(a * dec.delta);
        Box scaled_leaf;
        scaled_leaf.iv = {Interval{leaf.box.iv[0].lo * a, leaf.box.iv[0].hi * a},
                          Interval{leaf.box.iv[1].lo * a, leaf.box.iv[1].hi * a}};
        CHECK(direct == scaled_leaf);
    }
}
