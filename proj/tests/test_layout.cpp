#include <doctest.h>

#include <set>

#include "nsreduce/layout.hpp"

using namespace nsreduce;

TEST_CASE("layout dimensions and uniqueness") {
    const auto& L = StateLayout::instance();
    CHECK(L.x_names().size() == 59);
    CHECK(L.z_names().size() == 55);
    CHECK(L.quad_pairs().size() == 9);

    std::set<std::string> xs(L.x_names().begin(), L.x_names().end());
    std::set<std::string> zs(L.z_names().begin(), L.z_names().end());
    CHECK(xs.size() == 59);
    CHECK(zs.size() == 55);
}

TEST_CASE("layout slot positions match the published component order") {
    const auto& L = StateLayout::instance();
    // X stacks the four constrained components in front.
    CHECK(L.x_slot("du1/dx1") == 0);
    CHECK(L.x_slot("du1/dt") == 1);
    CHECK(L.x_slot("du2/dt") == 2);
    CHECK(L.x_slot("du3/dt") == 3);
    CHECK(L.x_slot("u1") == 6);

    // Z slots, zero-based (published numbering is one-based).
    CHECK(L.z_slot("du1/dx2") == 0);
    CHECK(L.z_slot("du1/dx3") == 1);
    CHECK(L.z_slot("u1") == 2);
    CHECK(L.z_slot("du2/dx1") == 3);
    CHECK(L.z_slot("u2") == 6);
    CHECK(L.z_slot("u3") == 10);
    CHECK(L.z_slot("dp/dt") == 11);
    CHECK(L.z_slot("dp/dx1") == 12);
    CHECK(L.z_slot("p") == 15);
    CHECK(L.z_slot("d2u1/dtdt") == 16);
    CHECK(L.z_slot("d2u1/dx1dx1") == 17);
    CHECK(L.z_slot("d2u1/dtdx1") == 20);
    CHECK(L.z_slot("d2u1/dx1dx2") == 23);
    CHECK(L.z_slot("d2u2/dtdt") == 26);
    CHECK(L.z_slot("d2u3/dx2dx3") == 45);
    CHECK(L.z_slot("u1*du1/dx1") == 46);
    CHECK(L.z_slot("u3*du3/dx3") == 54);

    CHECK_THROWS_AS(L.z_slot("du1/dx1"), std::out_of_range);  // constrained, not in Z
    CHECK_THROWS_AS(L.z_slot("nope"), std::out_of_range);
}

TEST_CASE("quadratic pairs reproduce the nine product constraints in order") {
    const auto& L = StateLayout::instance();
    const auto& qp = L.quad_pairs();

    // lhs slots are the nine product components in order.
    for (int j = 0; j < 9; ++j) CHECK(qp[j].lhs == 46 + j);

    // Left factors cycle u1, u2, u3.
    const std::array<int, 3> carriers = {L.z_slot("u1"), L.z_slot("u2"), L.z_slot("u3")};
    for (int j = 0; j < 9; ++j) {
        for (int i = 0; i < 55; ++i) {
            const double expect = (i == carriers[j % 3]) ? 1.0 : 0.0;
            CHECK(qp[j].left[i] == expect);
        }
    }

    // First right factor substitutes the continuity relation.
    for (int i = 0; i < 55; ++i) {
        double expect = 0.0;
        if (i == L.z_slot("du2/dx2") || i == L.z_slot("du3/dx3")) expect = -1.0;
        CHECK(qp[0].right[i] == expect);
    }
    const std::array<const char*, 8> rest = {"du1/dx2", "du1/dx3", "du2/dx1", "du2/dx2",
                                             "du2/dx3", "du3/dx1", "du3/dx2", "du3/dx3"};
    for (int j = 1; j < 9; ++j) {
        for (int i = 0; i < 55; ++i) {
            const double expect = (i == L.z_slot(rest[j - 1])) ? 1.0 : 0.0;
            CHECK(qp[j].right[i] == expect);
        }
    }
}

TEST_CASE("system row names") {
    const auto& L = StateLayout::instance();
    const auto& names = L.system_row_names();
    REQUIRE(names.size() == 16);
    CHECK(names[0] == "du1/dx1");
    CHECK(names[6] == "u1");
    CHECK(names[10] == "u2");
    CHECK(names[14] == "u3");
    CHECK(names[15] == "p");
}
